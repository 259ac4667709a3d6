//! Projected few-level dynamics under a cosine drive, compared against the
//! full evolution.
//!
//! Both evolutions run in the eigenbasis of the static Hamiltonian, in the
//! rotating frame that absorbs the static phases: only the drive term
//! remains on the right-hand side, so step sizes track the drive rather
//! than the full spectral range.

use crate::exact::{
    align_degenerate_blocks, detuning_coupled, eigenbasis_matrix, eigensolve, integrate_sampled,
    EigenOptions, OdeOptions, Spectrum,
};
use crate::operators::SpinOperator;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

/// Relative cutoff below which an eigenbasis matrix element counts as
/// decoupled when scanning for the nearest driven transition.
pub const COUPLING_THRESHOLD: f64 = 1e-8;

/// Comparison of projected and full driven dynamics at one time.
#[derive(Clone, Debug, Serialize)]
pub struct FewLevelRun {
    /// Number of retained levels.
    pub nu: usize,
    /// Drive strength.
    pub lambda: f64,
    /// Drive frequency.
    pub omega: f64,
    /// Evolution time.
    pub t: f64,
    /// Detuning of the nearest driven transition out of the retained space.
    pub delta: f64,
    /// Tr[rho_projected(t) rho_full(t)].
    pub overlap: f64,
    /// Guaranteed floor: 1 - (2 nu lambda + 3 nu lambda^2 t) / delta.
    pub bound: f64,
}

impl FewLevelRun {
    /// Slack of the guarantee; nonnegative whenever the floor is honest.
    pub fn margin(&self) -> f64 {
        self.overlap - self.bound
    }
}

/// The guaranteed overlap floor for `nu` retained levels after driving at
/// strength `lambda` for time `t` against detuning `delta`.
pub fn theorem1_bound(nu: usize, lambda: f64, delta: f64, t: f64) -> f64 {
    1.0 - (2.0 * nu as f64 * lambda + 3.0 * nu as f64 * lambda * lambda * t) / delta
}

/// Zero the diagonal of an eigenbasis coupling matrix and rescale it to
/// unit spectral norm. Returns the cleaned matrix and the norm removed.
/// The overlap guarantee assumes both properties.
pub fn diagonal_free_normalized(w_eig: &DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, f64)> {
    let n = w_eig.nrows();
    if w_eig.ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "coupling matrix must be square, got {}x{}",
            n,
            w_eig.ncols()
        )));
    }
    let mut w = w_eig.clone();
    for i in 0..n {
        w[(i, i)] = Complex64::new(0.0, 0.0);
    }
    let scale = w.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return Err(Error::DegenerateInput(
            "coupling operator is diagonal in the eigenbasis".into(),
        ));
    }
    let mut herm_dev = 0.0_f64;
    for i in 0..n {
        for j in 0..i {
            herm_dev = herm_dev.max((w[(i, j)] - w[(j, i)].conj()).norm());
        }
    }
    if herm_dev > 1e-9 * scale {
        return Err(Error::NotHermitian(format!(
            "eigenbasis coupling deviates from hermitian by {herm_dev:.3e}"
        )));
    }
    // kill roundoff asymmetry so the evolution stays exactly unitary
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (w[(i, j)] + w[(j, i)].conj());
            w[(i, j)] = avg;
            w[(j, i)] = avg.conj();
        }
    }
    let norm = hermitian_spectral_norm(&w);
    if norm <= 0.0 {
        return Err(Error::DegenerateInput(
            "coupling operator vanishes off the diagonal".into(),
        ));
    }
    w /= Complex64::new(norm, 0.0);
    Ok((w, norm))
}

fn hermitian_spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0_f64, |acc, &e| acc.max(e.abs()))
}

/// Evolve `i c' = (E + lambda cos(omega t) W) c` in the rotating frame of
/// the diagonal part, sampling at `samples`. States come back in the lab
/// frame (diagonal phases restored) and renormalized.
pub fn driven_eigenbasis_evolution(
    energies: &[f64],
    w: &DMatrix<Complex64>,
    lambda: f64,
    omega: f64,
    psi0: &DVector<Complex64>,
    samples: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<DVector<Complex64>>> {
    let dim = energies.len();
    if w.nrows() != dim || w.ncols() != dim || psi0.len() != dim {
        return Err(Error::ShapeMismatch(format!(
            "dimension mismatch: {} energies, {}x{} coupling, state of {}",
            dim,
            w.nrows(),
            w.ncols(),
            psi0.len()
        )));
    }
    let last = *samples.last().ok_or_else(|| {
        Error::InvalidParameter("need at least one sample time".into())
    })?;
    if !(last > 0.0) {
        return Err(Error::InvalidParameter(
            "final sample time must be positive".into(),
        ));
    }
    let e: Vec<f64> = energies.to_vec();
    let w = w.clone();
    let rhs = move |t: f64, c: &DVector<Complex64>| {
        let mut d = DVector::from_element(dim, Complex64::new(0.0, 0.0));
        for k in 0..dim {
            d[k] = (-Complex64::i() * e[k] * t).exp() * c[k];
        }
        let mut out = &w * d;
        let coeff = -Complex64::i() * lambda * (omega * t).cos();
        for k in 0..dim {
            out[k] *= coeff * (Complex64::i() * e[k] * t).exp();
        }
        out
    };
    let (frames, _) = integrate_sampled(rhs, 0.0, last, psi0, samples, opts)?;
    let mut out = Vec::with_capacity(frames.len());
    for (frame, &t) in frames.iter().zip(samples) {
        let mut lab = frame.clone();
        for k in 0..dim {
            lab[k] *= (-Complex64::i() * energies[k] * t).exp();
        }
        let norm = lab.norm();
        if norm > 0.0 {
            lab /= Complex64::new(norm, 0.0);
        }
        out.push(lab);
    }
    Ok(out)
}

/// Run the projected and full dynamics for a spectrum given directly as
/// energies plus the eigenbasis coupling matrix. The coupling is cleaned
/// to diagonal-free unit norm before anything else.
pub fn few_level_run(
    energies: &[f64],
    w_eig: &DMatrix<Complex64>,
    lambda: f64,
    omega: f64,
    nu: usize,
    t_grid: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<FewLevelRun>> {
    let dim = energies.len();
    if nu == 0 || nu > dim {
        return Err(Error::InvalidParameter(format!(
            "retained level count {nu} must lie in 1..={dim}"
        )));
    }
    if !(lambda >= 0.0) || !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need lambda >= 0 and omega > 0, got {lambda}, {omega}"
        )));
    }
    let (w, _) = diagonal_free_normalized(w_eig)?;
    let delta = if nu == dim {
        f64::INFINITY
    } else {
        detuning_coupled(energies, &w, omega, nu, COUPLING_THRESHOLD)?
    };
    let start_full = basis_state(dim, 0);
    let full = driven_eigenbasis_evolution(energies, &w, lambda, omega, &start_full, t_grid, opts)?;
    let w_proj = w.view((0, 0), (nu, nu)).into_owned();
    let start_proj = basis_state(nu, 0);
    let proj = driven_eigenbasis_evolution(
        &energies[..nu],
        &w_proj,
        lambda,
        omega,
        &start_proj,
        t_grid,
        opts,
    )?;
    let mut runs = Vec::with_capacity(t_grid.len());
    for (idx, &t) in t_grid.iter().enumerate() {
        let mut inner = Complex64::new(0.0, 0.0);
        for mu in 0..nu {
            inner += proj[idx][mu].conj() * full[idx][mu];
        }
        runs.push(FewLevelRun {
            nu,
            lambda,
            omega,
            t,
            delta,
            overlap: inner.norm_sqr(),
            bound: theorem1_bound(nu, lambda, delta, t),
        });
    }
    Ok(runs)
}

fn basis_state(dim: usize, idx: usize) -> DVector<Complex64> {
    let mut v = DVector::from_element(dim, Complex64::new(0.0, 0.0));
    v[idx] = Complex64::new(1.0, 0.0);
    v
}

/// Full pipeline from qubit operators: resolve the spectrum of `h0`,
/// rotate degenerate blocks so the drive singles out bright members,
/// build the eigenbasis coupling, and compare projected against full
/// dynamics on `t_grid`.
pub fn few_level_evolve(
    h0: &SpinOperator,
    w: &SpinOperator,
    lambda: f64,
    omega: f64,
    nu: usize,
    t_grid: &[f64],
    eig_opts: &EigenOptions,
    ode_opts: &OdeOptions,
) -> Result<Vec<FewLevelRun>> {
    let (spectrum, w_eig) = resolve_driven_spectrum(h0, w, eig_opts)?;
    few_level_run(
        &spectrum.energies,
        &w_eig,
        lambda,
        omega,
        nu,
        t_grid,
        ode_opts,
    )
}

/// Complete spectrum of `h0` with degenerate blocks rotated so the drive
/// singles out bright members, plus the raw eigenbasis coupling of `w`.
pub fn resolve_driven_spectrum(
    h0: &SpinOperator,
    w: &SpinOperator,
    eig_opts: &EigenOptions,
) -> Result<(Spectrum, DMatrix<Complex64>)> {
    let mut spectrum = eigensolve(h0, eig_opts)?;
    if !spectrum.complete {
        return Err(Error::Unsupported(
            "few-level comparison needs the complete spectrum; use the dense backend".into(),
        ));
    }
    let span = spectrum.energies.last().unwrap() - spectrum.energies[0];
    let source = spectrum.states[0].clone();
    align_degenerate_blocks(&mut spectrum, w, &source, 1e-8 * span.max(1.0));
    let w_eig = eigenbasis_matrix(w, &spectrum.states);
    Ok((spectrum, w_eig))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    /// All-to-all coupling with zero diagonal on three levels.
    fn toy_coupling() -> DMatrix<Complex64> {
        DMatrix::from_fn(3, 3, |i, j| if i == j { re(0.0) } else { re(1.0) })
    }

    #[test]
    fn cleaning_zeroes_diagonal_and_normalizes() {
        let (w, scale) = diagonal_free_normalized(&toy_coupling()).unwrap();
        // eigenvalues of the all-ones off-diagonal 3x3 are {2, -1, -1}
        assert!((scale - 2.0).abs() < 1e-12);
        for i in 0..3 {
            assert_eq!(w[(i, i)], re(0.0));
            for j in 0..3 {
                if i != j {
                    assert!((w[(i, j)] - re(0.5)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_diagonal_coupling() {
        let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![re(1.0), re(2.0)]));
        assert!(matches!(
            diagonal_free_normalized(&diag),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn retaining_everything_is_exact() {
        let energies = [0.0, 1.0, 2.5];
        let runs = few_level_run(
            &energies,
            &toy_coupling(),
            0.05,
            1.0,
            3,
            &[2.0, 5.0],
            &OdeOptions::default(),
        )
        .unwrap();
        for run in &runs {
            assert!(run.delta.is_infinite());
            assert!((run.overlap - 1.0).abs() < 1e-9, "overlap {}", run.overlap);
            assert!((run.bound - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn three_level_guarantee_holds() {
        let energies = [0.0, 1.0, 2.5];
        let (lambda, omega, nu) = (0.01, 1.0, 2);
        let t = std::f64::consts::PI / lambda;
        let runs = few_level_run(
            &energies,
            &toy_coupling(),
            lambda,
            omega,
            nu,
            &[0.5 * t, t],
            &OdeOptions::default(),
        )
        .unwrap();
        // nearest driven transition out of {0,1}: |E_1 - E_2 + omega| = 0.5
        assert!((runs[0].delta - 0.5).abs() < 1e-12);
        let last = runs.last().unwrap();
        let explicit =
            1.0 - (2.0 * 2.0 * 0.01 + 3.0 * 2.0 * 0.0001 * t) / 0.5;
        assert!((last.bound - explicit).abs() < 1e-12);
        for run in &runs {
            assert!(run.overlap >= 0.0 && run.overlap <= 1.0 + 1e-12);
            assert!(
                run.margin() >= 0.0,
                "overlap {} under bound {}",
                run.overlap,
                run.bound
            );
        }
    }

    #[test]
    fn overlap_floor_tightens_with_weaker_drive() {
        // fixed horizon so the projected-vs-full discrepancy is linear
        // response in lambda and the comparison is clean
        let energies = [0.0, 1.0, 2.5];
        let (omega, t) = (1.0, 77.3);
        let mut failures = Vec::new();
        for &lambda in &[0.04, 0.02, 0.01] {
            let runs = few_level_run(
                &energies,
                &toy_coupling(),
                lambda,
                omega,
                2,
                &[t],
                &OdeOptions::default(),
            )
            .unwrap();
            assert!(runs[0].overlap >= runs[0].bound);
            failures.push(1.0 - runs[0].overlap);
        }
        assert!(failures[0] > failures[1] && failures[1] > failures[2]);
    }

    #[test]
    fn spin_level_wrapper_matches_direct_run() {
        use crate::operators::{Pauli, PauliString};
        // two qubits: H0 = Z0 + 0.35 Z1, drive X0 + 0.6 X1
        let h0 = SpinOperator::from_strings(
            2,
            vec![
                PauliString::single(2, 0, Pauli::Z, re(1.0)),
                PauliString::single(2, 1, Pauli::Z, re(0.35)),
            ],
        )
        .unwrap();
        let w = SpinOperator::from_strings(
            2,
            vec![
                PauliString::single(2, 0, Pauli::X, re(1.0)),
                PauliString::single(2, 1, Pauli::X, re(0.6)),
            ],
        )
        .unwrap();
        let omega = 0.7; // resonant with the Z1 flip out of the ground state
        let runs = few_level_evolve(
            &h0,
            &w,
            0.01,
            omega,
            2,
            &[40.0],
            &EigenOptions::default(),
            &OdeOptions::default(),
        )
        .unwrap();
        assert_eq!(runs.len(), 1);
        assert!(runs[0].overlap >= runs[0].bound);
        assert!(runs[0].delta > 0.0 && runs[0].delta.is_finite());
    }

    #[test]
    fn rejects_bad_level_counts() {
        let energies = [0.0, 1.0, 2.5];
        let err = few_level_run(
            &energies,
            &toy_coupling(),
            0.01,
            1.0,
            0,
            &[1.0],
            &OdeOptions::default(),
        );
        assert!(err.is_err());
        let err = few_level_run(
            &energies,
            &toy_coupling(),
            0.01,
            1.0,
            4,
            &[1.0],
            &OdeOptions::default(),
        );
        assert!(err.is_err());
    }
}
