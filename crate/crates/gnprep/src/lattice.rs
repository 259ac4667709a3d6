//! Lattice model assembly: a periodic chain of two-component fermions with
//! `N` species, a symmetric-difference kinetic term, a mass term, a Wilson
//! term lifting the doubler branch, and a quartic scalar-density interaction.
//!
//! With spacing `a`, sites `x = 0..n-1`, fields `psi_{j,alpha}(x)`, and
//! `psibar = psi^dag gamma^0`, the pieces are
//!
//! ```text
//! H_0 = sum_x a sum_j psibar_j(x) [ -i gamma^1 d_sym + m0 ] psi_j(x)
//! H_g = -(g0^2/2) sum_x a ( sum_j psibar_j psi_j(x) )^2
//! H_W = -(r/2a)  sum_x a sum_j psibar_j(x) [ psi_j(x+a) - 2 psi_j(x) + psi_j(x-a) ]
//! ```
//!
//! where `d_sym psi(x) = (psi(x+a) - psi(x-a)) / 2a` and site arithmetic is
//! mod n. The free single-particle dispersion is
//! `E(p)^2 = (sin(pa)/a)^2 + (m0 + (2r/a) sin^2(pa/2))^2`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{FermionOperator, Mode};

/// Model parameters for one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    /// Number of spatial sites `n` (periodic).
    pub n_sites: u32,
    /// Number of fermion species `N`.
    pub n_species: u32,
    /// Lattice spacing `a`.
    pub spacing: f64,
    /// Bare mass `m0`.
    pub mass: f64,
    /// Four-fermion coupling `g0` (the interaction enters as `g0^2`).
    pub coupling: f64,
    /// Wilson parameter `r`, in `(0, 1]`.
    pub wilson: f64,
}

impl LatticeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 sites for a periodic chain, got {}",
                self.n_sites
            )));
        }
        if self.n_species < 1 {
            return Err(Error::InvalidParameter("need at least one species".into()));
        }
        if !(self.spacing > 0.0) || !self.spacing.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "spacing must be positive and finite, got {}",
                self.spacing
            )));
        }
        for (name, v) in [("mass", self.mass), ("coupling", self.coupling)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        if !(self.wilson > 0.0 && self.wilson <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "wilson parameter must lie in (0, 1], got {}",
                self.wilson
            )));
        }
        Ok(())
    }

    /// Qubits of the mapped register.
    pub fn n_qubits(&self) -> usize {
        2 * self.n_sites as usize * self.n_species as usize
    }

    /// Momentum grid `p_k = 2 pi k / (n a)`, `k = 0..n-1`.
    pub fn momenta(&self) -> Vec<f64> {
        let n = self.n_sites as usize;
        let l = n as f64 * self.spacing;
        (0..n)
            .map(|k| 2.0 * std::f64::consts::PI * k as f64 / l)
            .collect()
    }

    /// Free single-particle energy at momentum `p` (uses mass + Wilson shift).
    pub fn dispersion(&self, p: f64) -> f64 {
        let a = self.spacing;
        let sk = (p * a).sin() / a;
        let half = (0.5 * p * a).sin();
        let mp = self.mass + 2.0 * self.wilson / a * half * half;
        (sk * sk + mp * mp).sqrt()
    }
}

/// A 2x2 matrix in spinor space.
pub type SpinorMatrix = [[Complex64; 2]; 2];

/// The gamma-matrix pair fixing the spinor structure. The default is
/// `gamma^0 = diag(1,-1)` and `gamma^1 = [[0,1],[-1,0]]` (that is `i
/// sigma_y`), giving `gamma^0 gamma^1 = sigma_x`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GammaConvention {
    pub gamma0: SpinorMatrix,
    pub gamma1: SpinorMatrix,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl Default for GammaConvention {
    fn default() -> Self {
        GammaConvention {
            gamma0: [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]],
            gamma1: [[c(0.0, 0.0), c(1.0, 0.0)], [c(-1.0, 0.0), c(0.0, 0.0)]],
        }
    }
}

fn mat2_mul(a: &SpinorMatrix, b: &SpinorMatrix) -> SpinorMatrix {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn mat2_add(a: &SpinorMatrix, b: &SpinorMatrix) -> SpinorMatrix {
    let mut out = *a;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] += b[i][j];
        }
    }
    out
}

fn mat2_max_abs(a: &SpinorMatrix) -> f64 {
    a.iter()
        .flatten()
        .map(|x| x.norm())
        .fold(0.0, f64::max)
}

impl GammaConvention {
    /// Verify the Clifford relations in signature `(+,-)`:
    /// `(gamma^0)^2 = 1`, `(gamma^1)^2 = -1`, `{gamma^0, gamma^1} = 0`,
    /// with `gamma^0` hermitian and `gamma^1` anti-hermitian.
    pub fn validate(&self) -> Result<()> {
        let id = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        let neg_id = [[c(-1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]];
        let tol = 1e-12;

        let g00 = mat2_mul(&self.gamma0, &self.gamma0);
        let mut d = g00;
        for i in 0..2 {
            for j in 0..2 {
                d[i][j] -= id[i][j];
            }
        }
        if mat2_max_abs(&d) > tol {
            return Err(Error::InvalidParameter(
                "gamma0 squared is not the identity".into(),
            ));
        }

        let g11 = mat2_mul(&self.gamma1, &self.gamma1);
        let mut d = g11;
        for i in 0..2 {
            for j in 0..2 {
                d[i][j] -= neg_id[i][j];
            }
        }
        if mat2_max_abs(&d) > tol {
            return Err(Error::InvalidParameter(
                "gamma1 squared is not minus the identity".into(),
            ));
        }

        let anti = mat2_add(
            &mat2_mul(&self.gamma0, &self.gamma1),
            &mat2_mul(&self.gamma1, &self.gamma0),
        );
        if mat2_max_abs(&anti) > tol {
            return Err(Error::InvalidParameter(
                "gamma0 and gamma1 do not anticommute".into(),
            ));
        }

        for i in 0..2 {
            for j in 0..2 {
                if (self.gamma0[i][j] - self.gamma0[j][i].conj()).norm() > tol {
                    return Err(Error::InvalidParameter("gamma0 is not hermitian".into()));
                }
                if (self.gamma1[i][j] + self.gamma1[j][i].conj()).norm() > tol {
                    return Err(Error::InvalidParameter(
                        "gamma1 is not anti-hermitian".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// `gamma^0 gamma^1`, the hopping spinor structure.
    pub fn gamma01(&self) -> SpinorMatrix {
        mat2_mul(&self.gamma0, &self.gamma1)
    }

    /// Single-particle Bloch matrix `h(p) = sin(pa)/a * g0g1 + M(p) * g0`
    /// with `M(p) = m0 + (2r/a) sin^2(pa/2)`.
    pub fn bloch(&self, cfg: &LatticeConfig, p: f64) -> DMatrix<Complex64> {
        let a = cfg.spacing;
        let sk = (p * a).sin() / a;
        let half = (0.5 * p * a).sin();
        let mp = cfg.mass + 2.0 * cfg.wilson / a * half * half;
        let g01 = self.gamma01();
        DMatrix::from_fn(2, 2, |i, j| {
            c(sk, 0.0) * g01[i][j] + c(mp, 0.0) * self.gamma0[i][j]
        })
    }
}

/// Bilinear `sum_{alpha,beta} psi^dag_{j,alpha}(x) M_{alpha,beta} psi_{j,beta}(y)`.
fn bilinear(
    cfg: &LatticeConfig,
    species: u32,
    x: u32,
    y: u32,
    m: &SpinorMatrix,
    coeff: Complex64,
    apow: i32,
    out: &mut FermionOperator,
) -> Result<()> {
    use crate::operators::Factor;
    for alpha in 0..2u8 {
        for beta in 0..2u8 {
            let entry = m[alpha as usize][beta as usize];
            if entry.norm() == 0.0 {
                continue;
            }
            out.add_term(
                coeff * entry,
                apow,
                vec![
                    Factor::create(Mode::new(x, species, alpha)),
                    Factor::annihilate(Mode::new(y, species, beta)),
                ],
            )?;
        }
    }
    let _ = cfg;
    Ok(())
}

/// Kinetic part of `H_0`: symmetric-difference derivative, periodic wrap.
pub fn build_kinetic(cfg: &LatticeConfig, gamma: &GammaConvention) -> Result<FermionOperator> {
    cfg.validate()?;
    gamma.validate()?;
    let n = cfg.n_sites;
    let mut out = FermionOperator::zero(n, cfg.n_species);
    // a * psibar (-i gamma^1) (psi(x+a)-psi(x-a))/(2a)
    //   = (-i/2) psi^dag (gamma^0 gamma^1) [psi(x+1) - psi(x-1)]
    let g01 = gamma.gamma01();
    let half = c(0.0, -0.5);
    for j in 1..=cfg.n_species {
        for x in 0..n {
            let xp = (x + 1) % n;
            let xm = (x + n - 1) % n;
            bilinear(cfg, j, x, xp, &g01, half, 0, &mut out)?;
            bilinear(cfg, j, x, xm, &g01, -half, 0, &mut out)?;
        }
    }
    Ok(out)
}

/// Mass part of `H_0`: `a m0 psibar psi` per site and species.
pub fn build_mass(cfg: &LatticeConfig, gamma: &GammaConvention) -> Result<FermionOperator> {
    cfg.validate()?;
    gamma.validate()?;
    let mut out = FermionOperator::zero(cfg.n_sites, cfg.n_species);
    let coeff = c(cfg.mass, 0.0);
    for j in 1..=cfg.n_species {
        for x in 0..cfg.n_sites {
            bilinear(cfg, j, x, x, &gamma.gamma0, coeff, 1, &mut out)?;
        }
    }
    Ok(out)
}

/// Free Dirac part `H_0` (kinetic + mass).
pub fn build_h0(cfg: &LatticeConfig, gamma: &GammaConvention) -> Result<FermionOperator> {
    build_kinetic(cfg, gamma)?.add(&build_mass(cfg, gamma)?)
}

/// Wilson term `H_W`; vanishing only in the formal continuum limit.
pub fn build_hw(cfg: &LatticeConfig, gamma: &GammaConvention) -> Result<FermionOperator> {
    cfg.validate()?;
    gamma.validate()?;
    let n = cfg.n_sites;
    let mut out = FermionOperator::zero(n, cfg.n_species);
    // -(r/2a) * a * psi^dag gamma^0 [psi(x+1) - 2 psi(x) + psi(x-1)]
    let pref = c(-0.5 * cfg.wilson, 0.0);
    for j in 1..=cfg.n_species {
        for x in 0..n {
            let xp = (x + 1) % n;
            let xm = (x + n - 1) % n;
            bilinear(cfg, j, x, xp, &gamma.gamma0, pref, 0, &mut out)?;
            bilinear(cfg, j, x, x, &gamma.gamma0, pref * c(-2.0, 0.0), 0, &mut out)?;
            bilinear(cfg, j, x, xm, &gamma.gamma0, pref, 0, &mut out)?;
        }
    }
    Ok(out)
}

/// Scalar density `S(x) = sum_j psibar_j psi_j(x)` at a single site.
fn scalar_density(cfg: &LatticeConfig, gamma: &GammaConvention, x: u32) -> Result<FermionOperator> {
    let mut out = FermionOperator::zero(cfg.n_sites, cfg.n_species);
    for j in 1..=cfg.n_species {
        bilinear(cfg, j, x, x, &gamma.gamma0, c(1.0, 0.0), 0, &mut out)?;
    }
    Ok(out)
}

/// Quartic interaction `H_g = -(g0^2/2) sum_x a S(x)^2`.
pub fn build_hg(cfg: &LatticeConfig, gamma: &GammaConvention) -> Result<FermionOperator> {
    cfg.validate()?;
    gamma.validate()?;
    let mut out = FermionOperator::zero(cfg.n_sites, cfg.n_species);
    if cfg.coupling == 0.0 {
        return Ok(out);
    }
    let pref = c(-0.5 * cfg.coupling * cfg.coupling, 0.0);
    for x in 0..cfg.n_sites {
        let s = scalar_density(cfg, gamma, x)?;
        let s2 = s.mul(&s)?.scale(pref).scale_apow(1);
        out = out.add(&s2)?;
    }
    Ok(out)
}

/// The full Hamiltonian `H_0 + H_g + H_W`.
pub fn build_hamiltonian(cfg: &LatticeConfig, gamma: &GammaConvention) -> Result<FermionOperator> {
    build_h0(cfg, gamma)?
        .add(&build_hg(cfg, gamma)?)?
        .add(&build_hw(cfg, gamma)?)
}

/// Shape of the excitation drive in space and spinor/species indices.
///
/// The drive operator is the hermitian source term
///
/// ```text
/// W_raw = sum_x a [ f(x) psi_{j0,alpha0}(x) + conj(f(x)) psi^dag_{j0,alpha0}(x) ]
/// f(x)  = exp(i p x) * exp(-d(x,x0)^2 / sigma^2)
/// ```
///
/// with `d` the minimal periodic image distance; `sigma = None` means a flat
/// envelope. The spin-operator realization is rescaled to unit spectral norm
/// downstream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    /// Species the drive attaches to (1-based).
    pub species: u32,
    /// Spinor component the drive attaches to (0 or 1).
    pub spinor: u8,
    /// Carrier momentum `p`.
    pub momentum: f64,
    /// Envelope center `x0` in physical units.
    pub center: f64,
    /// Gaussian envelope width; `None` for a flat profile.
    pub sigma: Option<f64>,
}

impl DriveConfig {
    pub fn validate(&self, cfg: &LatticeConfig) -> Result<()> {
        if self.species == 0 || self.species > cfg.n_species {
            return Err(Error::InvalidParameter(format!(
                "drive species {} out of range 1..={}",
                self.species, cfg.n_species
            )));
        }
        if self.spinor > 1 {
            return Err(Error::InvalidParameter(
                "drive spinor component must be 0 or 1".into(),
            ));
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "drive sigma must be positive, got {s}"
                )));
            }
        }
        if !self.momentum.is_finite() || !self.center.is_finite() {
            return Err(Error::InvalidParameter(
                "drive momentum and center must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Envelope samples `f(x)` on the site grid, peak magnitude rescaled to 1.
    pub fn envelope(&self, cfg: &LatticeConfig) -> Result<Vec<Complex64>> {
        self.validate(cfg)?;
        let a = cfg.spacing;
        let circumference = cfg.n_sites as f64 * a;
        let mut samples = Vec::with_capacity(cfg.n_sites as usize);
        for xi in 0..cfg.n_sites {
            let x = xi as f64 * a;
            let mut d = (x - self.center).rem_euclid(circumference);
            if d > circumference / 2.0 {
                d -= circumference;
            }
            let mag = match self.sigma {
                Some(s) => (-d * d / (s * s)).exp(),
                None => 1.0,
            };
            let phase = Complex64::new(0.0, self.momentum * x).exp();
            samples.push(phase * mag);
        }
        let peak = samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if peak <= 0.0 {
            return Err(Error::DegenerateInput(
                "drive envelope vanishes on every site".into(),
            ));
        }
        for z in &mut samples {
            *z /= peak;
        }
        Ok(samples)
    }
}

/// Unnormalized drive operator; see [`DriveConfig`].
pub fn build_drive_operator(cfg: &LatticeConfig, drive: &DriveConfig) -> Result<FermionOperator> {
    cfg.validate()?;
    let f = drive.envelope(cfg)?;
    let mut out = FermionOperator::zero(cfg.n_sites, cfg.n_species);
    for x in 0..cfg.n_sites {
        use crate::operators::Factor;
        let mode = Mode::new(x, drive.species, drive.spinor);
        let fx = f[x as usize];
        out.add_term(fx, 1, vec![Factor::annihilate(mode)])?;
        out.add_term(fx.conj(), 1, vec![Factor::create(mode)])?;
    }
    Ok(out)
}
