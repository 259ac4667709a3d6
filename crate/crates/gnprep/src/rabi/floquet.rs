//! Closed-form response of a resonantly driven two-level system.
//!
//! The drive `lambda cos(omega t)` is kept to all orders: quasi-energies
//! and mode weights come out in terms of `J_0` and `J_1` at argument
//! `2 lambda / omega`, and the time-dependent state resums its sideband
//! series into trigonometric factors at argument `lambda / omega`.

use super::bessel::{bessel_j, truncation_order, DEFAULT_ORDER_CAP};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Quasi-energy data for a two-level system driven at its own splitting.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwoLevelFloquet {
    /// Level splitting; the resonant closed form fixes it to `omega`.
    pub splitting: f64,
    /// Drive amplitude multiplying `cos(omega t)`.
    pub lambda: f64,
    /// Drive angular frequency.
    pub omega: f64,
    /// Mixing angle, `tan(theta) = J_1(2 lambda/omega) / (1 - J_0(2 lambda/omega))`.
    pub theta: f64,
    /// Lower quasi-energy.
    pub eps0: f64,
    /// Upper quasi-energy.
    pub eps1: f64,
    /// Weight of the start state on the lower Floquet mode, `sin(theta/2)`.
    pub beta0: f64,
    /// Weight of the start state on the upper Floquet mode, `cos(theta/2)`.
    pub beta1: f64,
    /// Sideband order beyond which |J_n| < 1e-14 in the mode expansion.
    pub truncation_order: i32,
    /// Pulse-end phase factor `sin(pi omega / lambda)`; zero when the
    /// drive is off.
    pub kappa: f64,
}

/// Solve the resonant two-level problem for drive strength `lambda` and
/// frequency `omega`.
pub fn floquet_solution(lambda: f64, omega: f64) -> Result<TwoLevelFloquet> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "drive frequency must be positive, got {omega}"
        )));
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "drive strength must be nonnegative, got {lambda}"
        )));
    }
    let x = 2.0 * lambda / omega;
    let j0 = bessel_j(0, x)?;
    let j1 = bessel_j(1, x)?;
    let rad = omega * ((1.0 - j0).powi(2) + j1 * j1).sqrt();
    let eps0 = 0.5 * (-omega - rad);
    let eps1 = 0.5 * (-omega + rad);
    // atan2 keeps theta on the branch where the lambda -> 0 limit is pi/2
    // (J_1 ~ x/2 dominates 1 - J_0 ~ x^2/4).
    let theta = if lambda == 0.0 {
        std::f64::consts::FRAC_PI_2
    } else {
        f64::atan2(j1, 1.0 - j0)
    };
    let kappa = if lambda == 0.0 {
        0.0
    } else {
        (std::f64::consts::PI * omega / lambda).sin()
    };
    Ok(TwoLevelFloquet {
        splitting: omega,
        lambda,
        omega,
        theta,
        eps0,
        eps1,
        beta0: (0.5 * theta).sin(),
        beta1: (0.5 * theta).cos(),
        truncation_order: truncation_order(x, 1e-14, DEFAULT_ORDER_CAP)?,
        kappa,
    })
}

/// State at time `t`, starting from the lower level at `t = 0`.
///
/// Components are exactly normalized: the sideband sums collapse to
/// `cos(x sin(omega t))` and `sin(x sin(omega t))` with `x = lambda/omega`.
pub fn floquet_state(sol: &TwoLevelFloquet, t: f64) -> [Complex64; 2] {
    let i = Complex64::i();
    let x = sol.lambda / sol.omega;
    let phi = sol.omega * t;
    let e0 = (-i * sol.eps0 * t).exp();
    let e1 = (-i * sol.eps1 * t).exp();
    let a = sol.beta0 * sol.beta0 * e0 + sol.beta1 * sol.beta1 * e1;
    let b = sol.beta0 * sol.beta1 * (e0 - e1);
    let arg = x * phi.sin();
    let u = (-i * phi).exp();
    let lower = b * u * i * arg.sin() + a * arg.cos();
    let upper = -b * u * arg.cos() - i * a * arg.sin();
    [lower, upper]
}

/// Infidelity bound for the resonant pi-pulse of duration `pi/lambda`:
/// `(1/sqrt(3)) (lambda/omega)^2`.
pub fn theorem2_bound(lambda: f64, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "drive frequency must be positive, got {omega}"
        )));
    }
    let r = lambda / omega;
    Ok(r * r / 3.0_f64.sqrt())
}

/// Lower edge of the infidelity window at the special tunings
/// `omega = (n + 1/2) lambda`, where the quadratic term cancels:
/// `(pi/48) (lambda/omega)^4`.
pub fn theorem2_window_bound(lambda: f64, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "drive frequency must be positive, got {omega}"
        )));
    }
    let r = lambda / omega;
    Ok(std::f64::consts::PI / 48.0 * r.powi(4))
}
