//! Second-quantized fermion operators on a spatial lattice.
//!
//! A mode is a (site, species, spinor-component) triple. Field operators obey
//! `{psi_m, psi_k^dag} = a^-1 delta_mk` where `a` is the lattice spacing, so
//! coefficients carry an explicit integer power of `a` (`apow`) alongside the
//! numeric factor. Powers stay symbolic until matrix realization.
//!
//! Canonical form: within each term, factors are sorted by
//! (site, species, spinor, kind) with creation before annihilation on the
//! same mode; equal-mode repeats of one kind vanish. Reordering across
//! different modes anticommutes freely; the same-mode pair contraction
//! `psi psi^dag = a^-1 - psi^dag psi` introduces the `apow - 1` term.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MERGE_EPS: f64 = 1e-14;

/// One fermionic mode: lattice site, species index (1-based), spinor component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Mode {
    pub site: u32,
    pub species: u32,
    pub spinor: u8,
}

impl Mode {
    pub fn new(site: u32, species: u32, spinor: u8) -> Self {
        Mode {
            site,
            species,
            spinor,
        }
    }
}

/// A single creation or annihilation factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub mode: Mode,
    pub create: bool,
}

impl Factor {
    pub fn create(mode: Mode) -> Self {
        Factor { mode, create: true }
    }

    pub fn annihilate(mode: Mode) -> Self {
        Factor {
            mode,
            create: false,
        }
    }

    /// Canonical sort key: mode-major, creation before annihilation.
    fn key(&self) -> (u32, u32, u8, u8) {
        (
            self.mode.site,
            self.mode.species,
            self.mode.spinor,
            if self.create { 0 } else { 1 },
        )
    }
}

impl PartialOrd for Factor {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Factor {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

/// One additive term: `coeff * a^apow * f_1 f_2 ... f_k`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FermionTerm {
    pub coeff: Complex64,
    pub apow: i32,
    pub factors: Vec<Factor>,
}

/// A polynomial in fermion field operators over a fixed register shape.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FermionOperator {
    pub sites: u32,
    pub species: u32,
    terms: Vec<FermionTerm>,
}

impl FermionOperator {
    pub fn zero(sites: u32, species: u32) -> Self {
        assert!(sites >= 1 && species >= 1, "empty register");
        FermionOperator {
            sites,
            species,
            terms: Vec::new(),
        }
    }

    pub fn identity(sites: u32, species: u32) -> Self {
        let mut op = Self::zero(sites, species);
        op.terms.push(FermionTerm {
            coeff: Complex64::new(1.0, 0.0),
            apow: 0,
            factors: Vec::new(),
        });
        op
    }

    /// Number of modes: 2 spinor components per site per species.
    pub fn n_modes(&self) -> usize {
        2 * self.sites as usize * self.species as usize
    }

    fn check_mode(&self, m: Mode) -> Result<()> {
        if m.site >= self.sites {
            return Err(Error::InvalidParameter(format!(
                "site {} out of range 0..{}",
                m.site, self.sites
            )));
        }
        if m.species == 0 || m.species > self.species {
            return Err(Error::InvalidParameter(format!(
                "species {} out of range 1..={}",
                m.species, self.species
            )));
        }
        if m.spinor > 1 {
            return Err(Error::InvalidParameter(format!(
                "spinor component {} out of range 0..=1",
                m.spinor
            )));
        }
        Ok(())
    }

    /// The field operator `psi_m` (annihilation) as a one-term polynomial.
    pub fn field(sites: u32, species: u32, mode: Mode) -> Result<Self> {
        let mut op = Self::zero(sites, species);
        op.check_mode(mode)?;
        op.terms.push(FermionTerm {
            coeff: Complex64::new(1.0, 0.0),
            apow: 0,
            factors: vec![Factor::annihilate(mode)],
        });
        Ok(op)
    }

    /// The conjugate field operator `psi_m^dag`.
    pub fn field_dagger(sites: u32, species: u32, mode: Mode) -> Result<Self> {
        let mut op = Self::zero(sites, species);
        op.check_mode(mode)?;
        op.terms.push(FermionTerm {
            coeff: Complex64::new(1.0, 0.0),
            apow: 0,
            factors: vec![Factor::create(mode)],
        });
        Ok(op)
    }

    /// Add a raw monomial; the operator is re-canonicalized.
    pub fn add_term(&mut self, coeff: Complex64, apow: i32, factors: Vec<Factor>) -> Result<()> {
        for f in &factors {
            self.check_mode(f.mode)?;
        }
        self.terms.push(FermionTerm {
            coeff,
            apow,
            factors,
        });
        self.canonicalize();
        Ok(())
    }

    pub fn terms(&self) -> &[FermionTerm] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_same_shape(&self, rhs: &FermionOperator) -> Result<()> {
        if self.sites != rhs.sites || self.species != rhs.species {
            return Err(Error::ShapeMismatch(format!(
                "registers ({} sites, {} species) and ({} sites, {} species)",
                self.sites, self.species, rhs.sites, rhs.species
            )));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &FermionOperator) -> Result<FermionOperator> {
        self.check_same_shape(rhs)?;
        let mut out = self.clone();
        out.terms.extend(rhs.terms.iter().cloned());
        out.canonicalize();
        Ok(out)
    }

    pub fn sub(&self, rhs: &FermionOperator) -> Result<FermionOperator> {
        self.add(&rhs.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> FermionOperator {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff *= factor;
        }
        out.canonicalize();
        out
    }

    /// Multiply by an explicit power of the lattice spacing.
    pub fn scale_apow(&self, dpow: i32) -> FermionOperator {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.apow += dpow;
        }
        out
    }

    pub fn mul(&self, rhs: &FermionOperator) -> Result<FermionOperator> {
        self.check_same_shape(rhs)?;
        let mut out = Self::zero(self.sites, self.species);
        for a in &self.terms {
            for b in &rhs.terms {
                let mut factors = a.factors.clone();
                factors.extend(b.factors.iter().copied());
                out.terms.push(FermionTerm {
                    coeff: a.coeff * b.coeff,
                    apow: a.apow + b.apow,
                    factors,
                });
            }
        }
        out.canonicalize();
        Ok(out)
    }

    /// Hermitian conjugate: reverse factors, flip kinds, conjugate coefficients.
    pub fn dagger(&self) -> FermionOperator {
        let mut out = Self::zero(self.sites, self.species);
        for t in &self.terms {
            let factors = t
                .factors
                .iter()
                .rev()
                .map(|f| Factor {
                    mode: f.mode,
                    create: !f.create,
                })
                .collect();
            out.terms.push(FermionTerm {
                coeff: t.coeff.conj(),
                apow: t.apow,
                factors,
            });
        }
        out.canonicalize();
        out
    }

    /// `{A, B} = AB + BA`, normal ordered.
    pub fn anticommutator(&self, rhs: &FermionOperator) -> Result<FermionOperator> {
        self.mul(rhs)?.add(&rhs.mul(self)?)
    }

    /// `[A, B] = AB - BA`, normal ordered.
    pub fn commutator(&self, rhs: &FermionOperator) -> Result<FermionOperator> {
        self.mul(rhs)?.sub(&rhs.mul(self)?)
    }

    /// True when `self - self^dag` cancels to zero after normal ordering.
    pub fn is_hermitian(&self) -> bool {
        match self.sub(&self.dagger()) {
            Ok(d) => d.is_zero(),
            Err(_) => false,
        }
    }

    /// Rewrite every term into canonical normal order and merge duplicates.
    fn canonicalize(&mut self) {
        let mut ordered: Vec<FermionTerm> = Vec::with_capacity(self.terms.len());
        let mut stack: Vec<FermionTerm> = self.terms.drain(..).collect();
        while let Some(term) = stack.pop() {
            match first_violation(&term.factors) {
                None => ordered.push(term),
                Some(Violation::Vanishes) => {}
                Some(Violation::Swap(i)) => {
                    let mut t = term;
                    t.factors.swap(i, i + 1);
                    t.coeff = -t.coeff;
                    stack.push(t);
                }
                Some(Violation::Contract(i)) => {
                    // psi psi^dag = a^-1 - psi^dag psi  (same mode)
                    let mut contracted = term.clone();
                    contracted.factors.remove(i + 1);
                    contracted.factors.remove(i);
                    contracted.apow -= 1;
                    stack.push(contracted);
                    let mut swapped = term;
                    swapped.factors.swap(i, i + 1);
                    swapped.coeff = -swapped.coeff;
                    stack.push(swapped);
                }
            }
        }
        let mut merged: BTreeMap<(Vec<Factor>, i32), Complex64> = BTreeMap::new();
        for t in ordered {
            *merged
                .entry((t.factors, t.apow))
                .or_insert_with(|| Complex64::new(0.0, 0.0)) += t.coeff;
        }
        let scale = merged
            .values()
            .map(|c| c.norm())
            .fold(0.0_f64, f64::max)
            .max(1.0);
        self.terms = merged
            .into_iter()
            .filter(|(_, c)| c.norm() > MERGE_EPS * scale)
            .map(|((factors, apow), coeff)| FermionTerm {
                coeff,
                apow,
                factors,
            })
            .collect();
    }
}

enum Violation {
    /// Adjacent identical factors: the term is zero.
    Vanishes,
    /// Factors at (i, i+1) are on different modes and out of order.
    Swap(usize),
    /// Factors at (i, i+1) are (annihilate, create) on the same mode.
    Contract(usize),
}

fn first_violation(factors: &[Factor]) -> Option<Violation> {
    for i in 0..factors.len().saturating_sub(1) {
        let a = factors[i];
        let b = factors[i + 1];
        if a.mode == b.mode {
            if a.create == b.create {
                return Some(Violation::Vanishes);
            }
            if !a.create && b.create {
                return Some(Violation::Contract(i));
            }
            // creation then annihilation on one mode: canonical
        } else if a.key() > b.key() {
            return Some(Violation::Swap(i));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn psi(m: Mode) -> FermionOperator {
        FermionOperator::field(2, 1, m).unwrap()
    }

    fn psid(m: Mode) -> FermionOperator {
        FermionOperator::field_dagger(2, 1, m).unwrap()
    }

    #[test]
    fn same_mode_square_vanishes() {
        let m = Mode::new(0, 1, 0);
        assert!(psi(m).mul(&psi(m)).unwrap().is_zero());
        assert!(psid(m).mul(&psid(m)).unwrap().is_zero());
    }

    #[test]
    fn same_mode_anticommutator_is_inverse_spacing() {
        let m = Mode::new(1, 1, 1);
        let acomm = psi(m).anticommutator(&psid(m)).unwrap();
        assert_eq!(acomm.num_terms(), 1);
        let t = &acomm.terms()[0];
        assert!(t.factors.is_empty());
        assert_eq!(t.apow, -1);
        assert_abs_diff_eq!(t.coeff.re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.coeff.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn cross_mode_anticommutators_vanish() {
        let m = Mode::new(0, 1, 0);
        let k = Mode::new(1, 1, 0);
        assert!(psi(m).anticommutator(&psid(k)).unwrap().is_zero());
        assert!(psi(m).anticommutator(&psi(k)).unwrap().is_zero());
        assert!(psid(m).anticommutator(&psid(k)).unwrap().is_zero());
    }

    #[test]
    fn normal_order_reverses_cross_mode_pair() {
        // psi_k psi_m^dag with k > m reorders to -psi_m^dag psi_k
        let m = Mode::new(0, 1, 0);
        let k = Mode::new(1, 1, 0);
        let prod = psi(k).mul(&psid(m)).unwrap();
        assert_eq!(prod.num_terms(), 1);
        let t = &prod.terms()[0];
        assert_eq!(t.factors, vec![Factor::create(m), Factor::annihilate(k)]);
        assert_abs_diff_eq!(t.coeff.re, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn dagger_is_involutive_and_detects_hermiticity() {
        let m = Mode::new(0, 1, 0);
        let k = Mode::new(1, 1, 1);
        // psi_m^dag psi_k + psi_k^dag psi_m is hermitian
        let h = psid(m)
            .mul(&psi(k))
            .unwrap()
            .add(&psid(k).mul(&psi(m)).unwrap())
            .unwrap();
        assert!(h.is_hermitian());
        let dd = h.dagger().dagger();
        assert!(h.sub(&dd).unwrap().is_zero());
        // i * number operator is anti-hermitian
        let n = psid(m).mul(&psi(m)).unwrap().scale(c(0.0, 1.0));
        assert!(!n.is_hermitian());
    }

    #[test]
    fn contraction_tracks_spacing_power() {
        // psi psi^dag psi = a^-1 psi - psi^dag psi psi = a^-1 psi
        let m = Mode::new(0, 1, 0);
        let prod = psi(m).mul(&psid(m)).unwrap().mul(&psi(m)).unwrap();
        assert_eq!(prod.num_terms(), 1);
        let t = &prod.terms()[0];
        assert_eq!(t.apow, -1);
        assert_eq!(t.factors, vec![Factor::annihilate(m)]);
        assert_abs_diff_eq!(t.coeff.re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn number_operator_squares_to_scaled_self() {
        // (psi^dag psi)^2 = a^-1 psi^dag psi for a single mode
        let m = Mode::new(0, 1, 1);
        let n = psid(m).mul(&psi(m)).unwrap();
        let n2 = n.mul(&n).unwrap();
        assert_eq!(n2.num_terms(), 1);
        let t = &n2.terms()[0];
        assert_eq!(t.apow, -1);
        assert_eq!(t.factors, vec![Factor::create(m), Factor::annihilate(m)]);
        assert_abs_diff_eq!(t.coeff.re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let a = FermionOperator::identity(2, 1);
        let b = FermionOperator::identity(3, 1);
        assert!(a.add(&b).is_err());
        assert!(a.mul(&b).is_err());
    }
}
