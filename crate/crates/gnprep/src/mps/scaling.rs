//! Bond-dimension and cost predictions for vacuum preparation near the
//! continuum limit. The half-chain entanglement entropy of a massive
//! fermion vacuum grows logarithmically in the correlation length, and the
//! bond dimension needed for a fixed truncation error follows from the
//! asymptotic Schmidt-spectrum profile.

use crate::error::{Error, Result};

/// Inputs for the asymptotic predictions: species count, dimensionless mass
/// `m a`, and truncation error target.
#[derive(Clone, Copy, Debug)]
pub struct ScalingModel {
    pub n_species: u32,
    pub ma: f64,
    pub eps: f64,
}

impl ScalingModel {
    pub fn new(n_species: u32, ma: f64, eps: f64) -> Result<ScalingModel> {
        if n_species < 1 {
            return Err(Error::InvalidParameter(
                "need at least one fermion species".into(),
            ));
        }
        if !(0.0 < ma && ma < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "scaling regime needs 0 < m a < 1, got {ma}"
            )));
        }
        if !(0.0 < eps && eps < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "truncation target must lie in (0, 1), got {eps}"
            )));
        }
        Ok(ScalingModel { n_species, ma, eps })
    }

    /// Half-chain entropy of the vacuum, `(N/6) ln(1/(m a))`: each species
    /// contributes a unit-central-charge amount.
    pub fn half_chain_entropy(&self) -> f64 {
        f64::from(self.n_species) / 6.0 * (1.0 / self.ma).ln()
    }

    /// Prefactor `k = exp sqrt(2 S ln(1/eps))` relating the entropy to the
    /// bond dimension that reaches the truncation target.
    pub fn schmidt_prefactor(&self) -> f64 {
        let s = self.half_chain_entropy();
        (2.0 * s * (1.0 / self.eps).ln()).sqrt().exp()
    }

    /// Predicted bond dimension `ceil(k e^S)`.
    pub fn predict_chi(&self) -> usize {
        chi_from_parts(self.half_chain_entropy(), self.schmidt_prefactor())
    }

    /// Exponent of `1/(m a)` governing bond-dimension growth when the
    /// truncation target tracks the correlation scale: `N/6 + sqrt(N/3)`.
    pub fn chi_epsilon_exponent(&self) -> f64 {
        let n = f64::from(self.n_species);
        n / 6.0 + (n / 3.0).sqrt()
    }

    /// Sweep cost `n chi^3` at the predicted bond dimension, together with
    /// the signed accuracy exponent `-(N/2 + 1 + sqrt(3 N))` of the total
    /// preparation cost.
    pub fn dmrg_cost_model(&self, n_qubits: usize) -> CostModel {
        CostModel {
            cost: dmrg_cost(n_qubits, self.predict_chi()),
            epsilon_exponent: -cost_epsilon_exponent(self.n_species),
        }
    }
}

/// Cost estimate paired with its accuracy exponent.
#[derive(Clone, Copy, Debug)]
pub struct CostModel {
    /// Contraction work `n chi^3` of one sweep at the predicted chi.
    pub cost: f64,
    /// Signed power of the accuracy target in the total cost.
    pub epsilon_exponent: f64,
}

/// Bond dimension from an entropy value and a Schmidt prefactor.
pub fn chi_from_parts(s_half: f64, k: f64) -> usize {
    (k * s_half.exp()).ceil() as usize
}

/// Exponent of `1/(m a)` in the total preparation cost, `N/2 + 1 + sqrt(3 N)`;
/// the `N = 0` limit recovers the linear cost of a free product state.
pub fn cost_epsilon_exponent(n_species: u32) -> f64 {
    let n = f64::from(n_species);
    n / 2.0 + 1.0 + (3.0 * n).sqrt()
}

/// Leading sweep cost of the variational search, `n chi^3` contraction work.
pub fn dmrg_cost(n_qubits: usize, chi: usize) -> f64 {
    n_qubits as f64 * (chi as f64).powi(3)
}

/// Least-squares fit of measured entropies against `ln(1/(m a))`.
#[derive(Clone, Copy, Debug)]
pub struct EntropyFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub points: usize,
}

/// Fit `S = slope ln(1/(m a)) + intercept` over measured `(m a, S)` pairs.
/// Needs at least three pairs with three distinct masses so the residual is
/// meaningful; a two-point fit is always exact and certifies nothing.
pub fn entropy_scaling_check(pairs: &[(f64, f64)]) -> Result<EntropyFit> {
    if pairs.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "need at least 3 entropy samples, got {}",
            pairs.len()
        )));
    }
    let mut xs = Vec::with_capacity(pairs.len());
    let mut ys = Vec::with_capacity(pairs.len());
    for &(ma, s) in pairs {
        if !(ma > 0.0) || !ma.is_finite() || !s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "entropy sample (ma = {ma}, S = {s}) is out of domain"
            )));
        }
        xs.push((1.0 / ma).ln());
        ys.push(s);
    }
    let mut sorted = xs.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut distinct = 1;
    for w in sorted.windows(2) {
        if (w[1] - w[0]).abs() > 1e-12 * (1.0 + w[1].abs()) {
            distinct += 1;
        }
    }
    if distinct < 3 {
        return Err(Error::DegenerateInput(format!(
            "need 3 distinct masses, got {distinct}"
        )));
    }
    let n = pairs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    Ok(EntropyFit {
        slope,
        intercept,
        rms_residual: (ss / n).sqrt(),
        points: pairs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_prefactor_example_gives_chi_three() {
        // m a = 0.01, one species: S = ln(100)/6, e^S = 100^(1/6) ~ 2.154.
        let model = ScalingModel::new(1, 0.01, 0.5).unwrap();
        let s = model.half_chain_entropy();
        assert!((s - 100.0f64.ln() / 6.0).abs() < 1e-14);
        assert_eq!(chi_from_parts(s, 1.0), 3);
    }

    #[test]
    fn exponents_match_pinned_values() {
        let model = ScalingModel::new(1, 0.1, 1e-6).unwrap();
        assert!((model.chi_epsilon_exponent() - (1.0 / 6.0 + (1.0f64 / 3.0).sqrt())).abs() < 1e-15);
        assert!((model.chi_epsilon_exponent() - 0.744).abs() < 5e-4);
        assert!((cost_epsilon_exponent(1) - 3.232).abs() < 5e-4);
        assert!((cost_epsilon_exponent(0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sweep_cost_is_cubic_in_bond_dimension() {
        let base = dmrg_cost(10, 8);
        assert!((dmrg_cost(10, 16) / base - 8.0).abs() < 1e-12);
        assert!((dmrg_cost(20, 8) / base - 2.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_fit_recovers_an_exact_line()     {
        let slope = 1.0 / 6.0;
        let pairs: Vec<(f64, f64)> = [0.5, 0.25, 0.125]
            .iter()
            .map(|&ma: &f64| (ma, slope * (1.0 / ma).ln() + 0.2))
            .collect();
        let fit = entropy_scaling_check(&pairs).unwrap();
        assert!((fit.slope - slope).abs() < 1e-12, "slope {}", fit.slope);
        assert!((fit.intercept - 0.2).abs() < 1e-12);
        assert!(fit.rms_residual < 1e-13);
        assert_eq!(fit.points, 3);
    }

    #[test]
    fn degenerate_fits_are_rejected() {
        assert!(matches!(
            entropy_scaling_check(&[(0.5, 0.1), (0.25, 0.2)]),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            entropy_scaling_check(&[(0.5, 0.1), (0.5, 0.2), (0.5, 0.3)]),
            Err(Error::DegenerateInput(_))
        ));
        assert!(entropy_scaling_check(&[(0.5, 0.1), (-0.2, 0.2), (0.25, 0.3)]).is_err());
    }

    #[test]
    fn model_rejects_out_of_domain_inputs() {
        assert!(ScalingModel::new(0, 0.1, 0.1).is_err());
        assert!(ScalingModel::new(1, 1.5, 0.1).is_err());
        assert!(ScalingModel::new(1, 0.1, 0.0).is_err());
        assert!(ScalingModel::new(1, 0.0, 0.1).is_err());
    }

    proptest! {
        #[test]
        fn predicted_chi_is_monotone_in_correlation_length_and_accuracy(
            ma_hi in 1e-4f64..0.9,
            shrink in 0.1f64..0.99,
            eps_hi in 1e-9f64..0.9,
            tighten in 0.1f64..0.99,
            n in 1u32..4,
        ) {
            let ma_lo = ma_hi * shrink;
            let eps_lo = eps_hi * tighten;
            let base = ScalingModel::new(n, ma_hi, eps_hi).unwrap();
            let longer = ScalingModel::new(n, ma_lo, eps_hi).unwrap();
            let tighter = ScalingModel::new(n, ma_hi, eps_lo).unwrap();
            prop_assert!(longer.predict_chi() >= base.predict_chi());
            prop_assert!(tighter.predict_chi() >= base.predict_chi());
        }
    }
}
