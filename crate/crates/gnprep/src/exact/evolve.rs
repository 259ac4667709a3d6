//! Time evolution under a statically defined Hamiltonian with an optional
//! classical drive `lambda * cos(omega t) * W`.
//!
//! The reference integrator is an adaptive embedded Runge-Kutta 5(4) pair
//! (Dormand-Prince coefficients, first-same-as-last) applied to the
//! Schrodinger equation `i d/dt psi = H(t) psi`. A split-step product
//! formula with pre-diagonalized exponentials lives in
//! [`crate::exact::trotter`].

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::{SpinOperator, StringAction};

/// Classical drive coefficient `lambda * cos(omega t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveProtocol {
    pub lambda: f64,
    pub omega: f64,
}

impl DriveProtocol {
    #[inline]
    pub fn coefficient(&self, t: f64) -> f64 {
        self.lambda * (self.omega * t).cos()
    }
}

#[derive(Clone, Debug)]
pub struct OdeOptions {
    /// Relative local tolerance.
    pub rtol: f64,
    /// Absolute local tolerance.
    pub atol: f64,
    pub max_steps: usize,
    /// Initial step; `None` picks a small fraction of the interval.
    pub h_init: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 200_000_000,
            h_init: None,
        }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = B1 - 5179.0 / 57600.0;
const E3: f64 = B3 - 7571.0 / 16695.0;
const E4: f64 = B4 - 393.0 / 640.0;
const E5: f64 = B5 + 92097.0 / 339200.0;
const E6: f64 = B6 - 187.0 / 2100.0;
const E7: f64 = -1.0 / 40.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

type CVec = DVector<Complex64>;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Integrate `y' = rhs(t, y)` from `t0` to `t1`, reporting the state at
/// every time in `samples` (which must be sorted and lie within the span).
/// Returns `(sampled states, final state)`.
pub fn integrate_sampled<F>(
    mut rhs: F,
    t0: f64,
    t1: f64,
    y0: &CVec,
    samples: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<CVec>, CVec)>
where
    F: FnMut(f64, &CVec) -> CVec,
{
    if !(t1 > t0) {
        return Err(Error::InvalidParameter(format!(
            "need t1 > t0, got [{t0}, {t1}]"
        )));
    }
    for w in samples.windows(2) {
        if w[1] < w[0] {
            return Err(Error::InvalidParameter(
                "sample times must be nondecreasing".into(),
            ));
        }
    }
    if let (Some(&first), Some(&last)) = (samples.first(), samples.last()) {
        if first < t0 - 1e-12 || last > t1 + 1e-12 {
            return Err(Error::InvalidParameter(
                "sample times must lie within the integration span".into(),
            ));
        }
    }

    let mut t = t0;
    let mut y = y0.clone();
    let mut h = opts.h_init.unwrap_or((t1 - t0) * 1e-3).min(t1 - t0);
    let mut k1 = rhs(t, &y);
    let mut out: Vec<CVec> = Vec::with_capacity(samples.len());
    let mut next_sample = 0usize;

    // emit any samples at exactly t0
    while next_sample < samples.len() && samples[next_sample] <= t + 1e-15 {
        out.push(y.clone());
        next_sample += 1;
    }

    let mut steps = 0usize;
    while t < t1 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::IntegratorFailure(format!(
                "exceeded {} steps at t = {t:.6e}",
                opts.max_steps
            )));
        }
        // land exactly on the next sample boundary or the endpoint
        let mut target = t1;
        if next_sample < samples.len() {
            target = target.min(samples[next_sample]);
        }
        if h > target - t {
            h = target - t;
        }
        if h <= 0.0 {
            // already at the boundary: emit and move on
            while next_sample < samples.len() && samples[next_sample] <= t + 1e-15 {
                out.push(y.clone());
                next_sample += 1;
            }
            h = (t1 - t).max(0.0) * 1e-3 + 1e-300;
            continue;
        }

        let k2 = rhs(t + C2 * h, &(&y + &k1 * re(A21 * h)));
        let k3 = rhs(t + C3 * h, &(&y + &k1 * re(A31 * h) + &k2 * re(A32 * h)));
        let k4 = rhs(
            t + C4 * h,
            &(&y + &k1 * re(A41 * h) + &k2 * re(A42 * h) + &k3 * re(A43 * h)),
        );
        let k5 = rhs(
            t + C5 * h,
            &(&y + &k1 * re(A51 * h) + &k2 * re(A52 * h) + &k3 * re(A53 * h) + &k4 * re(A54 * h)),
        );
        let k6 = rhs(
            t + h,
            &(&y + &k1 * re(A61 * h)
                + &k2 * re(A62 * h)
                + &k3 * re(A63 * h)
                + &k4 * re(A64 * h)
                + &k5 * re(A65 * h)),
        );
        let y5 = &y
            + &k1 * re(B1 * h)
            + &k3 * re(B3 * h)
            + &k4 * re(B4 * h)
            + &k5 * re(B5 * h)
            + &k6 * re(B6 * h);
        let k7 = rhs(t + h, &y5);
        let err_vec = &k1 * re(E1 * h)
            + &k3 * re(E3 * h)
            + &k4 * re(E4 * h)
            + &k5 * re(E5 * h)
            + &k6 * re(E6 * h)
            + &k7 * re(E7 * h);

        // scaled RMS error
        let n = y.len();
        let mut acc = 0.0;
        for i in 0..n {
            let sc = opts.atol + opts.rtol * y[i].norm().max(y5[i].norm());
            let e = err_vec[i].norm() / sc;
            acc += e * e;
        }
        let err = (acc / n as f64).sqrt();

        if err <= 1.0 {
            t += h;
            y = y5;
            k1 = k7; // first-same-as-last
            while next_sample < samples.len() && samples[next_sample] <= t + 1e-12 {
                out.push(y.clone());
                next_sample += 1;
            }
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        let remaining = t1 - t;
        if remaining > 0.0 {
            h = h.min(remaining).max(remaining * 1e-14);
        }
    }
    while next_sample < samples.len() {
        out.push(y.clone());
        next_sample += 1;
    }
    Ok((out, y))
}

/// Endpoint-only convenience wrapper.
pub fn integrate<F>(rhs: F, t0: f64, t1: f64, y0: &CVec, opts: &OdeOptions) -> Result<CVec>
where
    F: FnMut(f64, &CVec) -> CVec,
{
    let (_, y) = integrate_sampled(rhs, t0, t1, y0, &[], opts)?;
    Ok(y)
}

/// Evolution record: states at the requested sample times.
#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub states: Vec<CVec>,
    /// `| ||psi(T)|| - 1 |`, a cheap global sanity indicator.
    pub norm_drift: f64,
}

fn schrodinger_rhs<'a>(
    h0_actions: &'a [StringAction],
    drive: Option<(&'a [StringAction], DriveProtocol)>,
) -> impl FnMut(f64, &CVec) -> CVec + 'a {
    move |t, y| {
        let mut hy = DVector::from_element(y.len(), Complex64::new(0.0, 0.0));
        for act in h0_actions {
            let dim = y.len() as u64;
            for src in 0..dim {
                hy[(src ^ act.xmask) as usize] += act.amplitude(src) * y[src as usize];
            }
        }
        if let Some((w_actions, protocol)) = drive {
            let c = protocol.coefficient(t);
            if c != 0.0 {
                let cc = Complex64::new(c, 0.0);
                for act in w_actions {
                    let dim = y.len() as u64;
                    for src in 0..dim {
                        hy[(src ^ act.xmask) as usize] += cc * act.amplitude(src) * y[src as usize];
                    }
                }
            }
        }
        hy * Complex64::new(0.0, -1.0)
    }
}

/// Schrodinger evolution of a statevector under `H0 + lambda cos(omega t) W`.
pub fn evolve_driven(
    h0: &SpinOperator,
    drive: Option<(&SpinOperator, DriveProtocol)>,
    psi0: &CVec,
    t_final: f64,
    n_samples: usize,
    opts: &OdeOptions,
) -> Result<EvolutionResult> {
    if psi0.len() != h0.dim() {
        return Err(Error::ShapeMismatch(format!(
            "state dimension {} vs operator dimension {}",
            psi0.len(),
            h0.dim()
        )));
    }
    if let Some((w, _)) = drive {
        if w.n_qubits() != h0.n_qubits() {
            return Err(Error::ShapeMismatch(
                "drive register differs from Hamiltonian register".into(),
            ));
        }
    }
    let h0_actions = h0.actions();
    let w_actions = drive.map(|(w, p)| (w.actions(), p));
    let samples: Vec<f64> = (0..=n_samples.max(1))
        .map(|i| t_final * i as f64 / n_samples.max(1) as f64)
        .collect();
    let rhs = schrodinger_rhs(
        &h0_actions,
        w_actions.as_ref().map(|(a, p)| (a.as_slice(), *p)),
    );
    let (states, last) = integrate_sampled(rhs, 0.0, t_final, psi0, &samples, opts)?;
    let norm_drift = (last.norm() - 1.0).abs();
    Ok(EvolutionResult {
        times: samples,
        states,
        norm_drift,
    })
}
