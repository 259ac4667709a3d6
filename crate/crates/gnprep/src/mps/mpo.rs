//! Matrix-product operator built from weighted Pauli strings by a
//! bidirectional automaton: prefix-deduplicated trunk states with a backward
//! pass that merges states whose weighted suffix languages are proportional.
//! Long-range strings that share interior content (periodic wrap terms) then
//! cost one bond state per distinct trunk instead of one per string.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mps::state::{Mps, SiteTensor};
use crate::operators::pauli::Pauli;
use crate::operators::spin::SpinOperator;

/// Dense-contraction cap for oracle checks, qubits.
pub const MPO_DENSE_CAP: usize = 12;

fn letter_matrix(p: Pauli) -> Matrix2<Complex64> {
    let z = |re: f64, im: f64| Complex64::new(re, im);
    match p {
        Pauli::I => Matrix2::new(z(1.0, 0.0), z(0.0, 0.0), z(0.0, 0.0), z(1.0, 0.0)),
        Pauli::X => Matrix2::new(z(0.0, 0.0), z(1.0, 0.0), z(1.0, 0.0), z(0.0, 0.0)),
        Pauli::Y => Matrix2::new(z(0.0, 0.0), z(0.0, -1.0), z(0.0, 1.0), z(0.0, 0.0)),
        Pauli::Z => Matrix2::new(z(1.0, 0.0), z(0.0, 0.0), z(0.0, 0.0), z(-1.0, 0.0)),
    }
}

/// One MPO site: sparse nonzero blocks over (left bond, right bond), each a
/// full 2x2 single-qubit operator (accumulated sums of weighted letters).
#[derive(Clone, Debug)]
pub struct MpoSite {
    pub d_left: usize,
    pub d_right: usize,
    entries: BTreeMap<(usize, usize), Matrix2<Complex64>>,
}

impl MpoSite {
    fn new(d_left: usize, d_right: usize) -> Self {
        MpoSite {
            d_left,
            d_right,
            entries: BTreeMap::new(),
        }
    }

    fn add(&mut self, l: usize, r: usize, block: Matrix2<Complex64>) {
        debug_assert!(l < self.d_left && r < self.d_right);
        *self
            .entries
            .entry((l, r))
            .or_insert_with(|| Matrix2::from_element(Complex64::new(0.0, 0.0))) += block;
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Matrix2<Complex64>)> {
        self.entries.iter().map(|(&(l, r), m)| (l, r, m))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }
}

/// Matrix-product operator on `n` qubits; bond spaces are automaton state
/// sets with dimension 1 at both edges.
#[derive(Clone, Debug)]
pub struct Mpo {
    sites: Vec<MpoSite>,
}

/// A Pauli string prepared for automaton construction.
struct Str {
    lo: usize,
    hi: usize,
    letters: Vec<Pauli>,
    coeff: Complex64,
}

type StateKey = (usize, Vec<Pauli>);

/// Raw trunk state: strings sharing (lo, letters[lo..=cut]).
#[derive(Default)]
struct RawState {
    members: Vec<usize>,
}

/// Suffix fingerprint of a raw state: sorted suffixes with coefficients
/// normalized by the first one.
struct Fingerprint {
    suffixes: Vec<Vec<Pauli>>,
    ratios: Vec<Complex64>,
    /// Coefficient of the reference (first) suffix.
    alpha: Complex64,
}

fn fingerprint(state: &RawState, strs: &[Str], cut: usize) -> Fingerprint {
    let mut pairs: Vec<(Vec<Pauli>, Complex64)> = state
        .members
        .iter()
        .map(|&idx| {
            let s = &strs[idx];
            (s.letters[cut + 1..=s.hi].to_vec(), s.coeff)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.cmp(&b.0));
    let alpha = pairs[0].1;
    Fingerprint {
        suffixes: pairs.iter().map(|p| p.0.clone()).collect(),
        ratios: pairs.iter().map(|p| p.1 / alpha).collect(),
        alpha,
    }
}

fn fingerprints_match(a: &Fingerprint, b: &Fingerprint) -> bool {
    if a.suffixes != b.suffixes {
        return false;
    }
    a.ratios
        .iter()
        .zip(b.ratios.iter())
        .all(|(x, y)| (x - y).norm() <= 1e-10 * (1.0 + y.norm()))
}

/// Per-cut automaton layout after the merge pass.
struct CutPlan {
    /// raw key -> (representative key, beta) with raw = beta * rep.
    remap: BTreeMap<StateKey, (StateKey, Complex64)>,
    /// representative key -> bond slot.
    slots: BTreeMap<StateKey, usize>,
    has_start: bool,
    has_done: bool,
    dim: usize,
}

impl CutPlan {
    fn start_slot(&self) -> Option<usize> {
        self.has_start.then_some(0)
    }

    fn done_slot(&self) -> Option<usize> {
        self.has_done.then_some(usize::from(self.has_start))
    }
}

impl Mpo {
    /// Build from the operator's Pauli strings (already deduplicated and
    /// zero-filtered by `SpinOperator`). Identity-content strings are routed
    /// as single-site identity emissions at qubit 0.
    pub fn from_spin_operator(op: &SpinOperator) -> Result<Mpo> {
        let n = op.n_qubits();
        if n == 0 {
            return Err(Error::InvalidParameter("empty register".into()));
        }
        let strs: Vec<Str> = op
            .terms()
            .iter()
            .map(|t| {
                let (lo, hi) = t.support().unwrap_or((0, 0));
                Str {
                    lo,
                    hi,
                    letters: t.letters.clone(),
                    coeff: t.coeff,
                }
            })
            .collect();

        // Raw trunk states per internal cut c (between sites c and c+1):
        // strings with lo <= c < hi keyed by (lo, prefix letters).
        let n_cuts = n.saturating_sub(1);
        let mut raw: Vec<BTreeMap<StateKey, RawState>> =
            (0..n_cuts).map(|_| BTreeMap::new()).collect();
        for (idx, s) in strs.iter().enumerate() {
            for c in s.lo..s.hi {
                raw[c]
                    .entry((s.lo, s.letters[s.lo..=c].to_vec()))
                    .or_default()
                    .members
                    .push(idx);
            }
        }

        let mut plans: Vec<CutPlan> = Vec::with_capacity(n_cuts);
        for c in 0..n_cuts {
            let mut reps: Vec<(StateKey, Fingerprint)> = Vec::new();
            let mut remap = BTreeMap::new();
            for (key, state) in &raw[c] {
                let fp = fingerprint(state, &strs, c);
                let mut assigned = false;
                for (rep_key, rep_fp) in &reps {
                    if fingerprints_match(&fp, rep_fp) {
                        remap.insert(key.clone(), (rep_key.clone(), fp.alpha / rep_fp.alpha));
                        assigned = true;
                        break;
                    }
                }
                if !assigned {
                    remap.insert(key.clone(), (key.clone(), Complex64::new(1.0, 0.0)));
                    reps.push((key.clone(), fp));
                }
            }
            // START continues past cut c only if some string begins later;
            // DONE exists only once some string has finished.
            let has_start = strs.iter().any(|s| s.lo > c);
            let has_done = strs.iter().any(|s| s.hi <= c);
            let mut slots = BTreeMap::new();
            let mut next = usize::from(has_start) + usize::from(has_done);
            for (rep_key, _) in &reps {
                slots.insert(rep_key.clone(), next);
                next += 1;
            }
            plans.push(CutPlan {
                remap,
                slots,
                has_start,
                has_done,
                dim: next.max(1),
            });
        }

        let mut sites: Vec<MpoSite> = (0..n)
            .map(|i| {
                let dl = if i == 0 { 1 } else { plans[i - 1].dim };
                let dr = if i == n - 1 { 1 } else { plans[i].dim };
                MpoSite::new(dl, dr)
            })
            .collect();

        // Bond slot of the START rail on the row side of site i; the single
        // left-boundary slot acts as START.
        let row_start = |i: usize| -> Option<usize> {
            if i == 0 {
                Some(0)
            } else {
                plans[i - 1].start_slot()
            }
        };
        // Bond slot of the DONE rail on the column side of site i; the
        // single right-boundary slot acts as DONE.
        let col_done = |i: usize| -> Option<usize> {
            if i == n - 1 {
                Some(0)
            } else {
                plans[i].done_slot()
            }
        };

        // Identity rails.
        for i in 0..n {
            if let (Some(r), Some(cl)) = (
                row_start(i),
                if i == n - 1 { None } else { plans[i].start_slot() },
            ) {
                sites[i].add(r, cl, letter_matrix(Pauli::I));
            }
            if let (Some(r), Some(cl)) = (
                if i == 0 { None } else { plans[i - 1].done_slot() },
                col_done(i),
            ) {
                sites[i].add(r, cl, letter_matrix(Pauli::I));
            }
        }

        // Single-site terms: START -> DONE at their site.
        for s in &strs {
            if s.lo == s.hi {
                let row = row_start(s.lo).expect("entry rail exists where a string starts");
                let col = col_done(s.lo).expect("exit rail exists where a string ends");
                sites[s.lo].add(row, col, letter_matrix(s.letters[s.lo]) * s.coeff);
            }
        }

        // Entry edges: one per raw entry state (prefix of length 1), scaled
        // by the raw-to-representative factor; the representative's own
        // suffix coefficients then reproduce each member's total weight.
        for (c, plan) in plans.iter().enumerate() {
            for (key, (rep, beta)) in &plan.remap {
                if key.1.len() != 1 {
                    continue;
                }
                let row = row_start(c).expect("entry rail exists where a string starts");
                let col = plan.slots[rep];
                sites[c].add(row, col, letter_matrix(key.1[0]) * *beta);
            }
        }

        // Trunk and exit edges, walked once per representative state.
        for c in 0..n_cuts {
            let plan = &plans[c];
            let site = c + 1;
            for (rep_key, &slot) in &plan.slots {
                let state = &raw[c][rep_key];
                let mut continuing: BTreeSet<StateKey> = BTreeSet::new();
                for &idx in &state.members {
                    let s = &strs[idx];
                    if s.hi == site {
                        let col = col_done(site).expect("exit rail exists where a string ends");
                        sites[site].add(slot, col, letter_matrix(s.letters[site]) * s.coeff);
                    } else {
                        continuing.insert((s.lo, s.letters[s.lo..=site].to_vec()));
                    }
                }
                for child_key in continuing {
                    let (child_rep, child_beta) = plans[site].remap[&child_key].clone();
                    let col = plans[site].slots[&child_rep];
                    let letter = *child_key.1.last().expect("nonempty prefix");
                    sites[site].add(slot, col, letter_matrix(letter) * child_beta);
                }
            }
        }

        Ok(Mpo { sites })
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn site(&self, i: usize) -> &MpoSite {
        &self.sites[i]
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.sites.len() + 1);
        dims.push(self.sites[0].d_left);
        for s in &self.sites {
            dims.push(s.d_right);
        }
        dims
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Dense matrix by direct bond contraction; oracle use only.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        let n = self.n_sites();
        if n > MPO_DENSE_CAP {
            return Err(Error::RegisterTooLarge {
                qubits: n,
                cap: MPO_DENSE_CAP,
            });
        }
        // Carry per right-bond slot: operator on the sites processed so far
        // (qubit 0 occupies the most significant index bits).
        let mut carry: Vec<DMatrix<Complex64>> =
            vec![DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0))];
        for site in &self.sites {
            let dim = carry[0].nrows();
            let mut next: Vec<DMatrix<Complex64>> = vec![
                    DMatrix::from_element(dim * 2, dim * 2, Complex64::new(0.0, 0.0));
                    site.d_right
                ];
            for (l, r, block) in site.entries() {
                let grown = carry[l].kronecker(&DMatrix::from_fn(2, 2, |a, b| block[(a, b)]));
                next[r] += grown;
            }
            carry = next;
        }
        Ok(carry.pop().expect("right boundary slot"))
    }

    /// `<psi|O|psi>` by exact environment contraction.
    pub fn expectation(&self, psi: &Mps) -> Result<Complex64> {
        if psi.n_sites() != self.n_sites() {
            return Err(Error::ShapeMismatch(format!(
                "operator on {} sites, state on {}",
                self.n_sites(),
                psi.n_sites()
            )));
        }
        let mut env = boundary_env();
        for i in 0..self.n_sites() {
            env = advance_left_env(&env, self.site(i), psi.site(i), psi.site(i));
        }
        Ok(env.pop().expect("right boundary slot")[(0, 0)])
    }
}

/// 1x1 identity environment at either chain boundary.
pub(crate) fn boundary_env() -> Vec<DMatrix<Complex64>> {
    vec![DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0))]
}

/// Grow a left environment across one site: `env[w]` is the (bra bond x ket
/// bond) block for MPO slot `w`.
pub(crate) fn advance_left_env(
    env: &[DMatrix<Complex64>],
    w: &MpoSite,
    bra: &SiteTensor,
    ket: &SiteTensor,
) -> Vec<DMatrix<Complex64>> {
    let mut out = vec![
        DMatrix::from_element(bra.chi_right(), ket.chi_right(), Complex64::new(0.0, 0.0));
        w.d_right
    ];
    for (l, r, block) in w.entries() {
        for s_out in 0..2 {
            for s_in in 0..2 {
                let coef = block[(s_out, s_in)];
                if coef.norm() == 0.0 {
                    continue;
                }
                out[r] += (bra.blocks[s_out].adjoint() * &env[l] * &ket.blocks[s_in]) * coef;
            }
        }
    }
    out
}

/// Grow a right environment across one site.
pub(crate) fn advance_right_env(
    env: &[DMatrix<Complex64>],
    w: &MpoSite,
    bra: &SiteTensor,
    ket: &SiteTensor,
) -> Vec<DMatrix<Complex64>> {
    let mut out = vec![
        DMatrix::from_element(bra.chi_left(), ket.chi_left(), Complex64::new(0.0, 0.0));
        w.d_left
    ];
    for (l, r, block) in w.entries() {
        for s_out in 0..2 {
            for s_in in 0..2 {
                let coef = block[(s_out, s_in)];
                if coef.norm() == 0.0 {
                    continue;
                }
                out[l] += (bra.blocks[s_out].conjugate() * &env[r] * ket.blocks[s_in].transpose())
                    * coef;
            }
        }
    }
    out
}

/// Apply the effective two-site operator (left environment, two MPO sites,
/// right environment) to a two-site tensor laid out as
/// `theta[s1][(a, s2 * chi_r + b)]`.
pub(crate) fn apply_effective_two_site(
    lenv: &[DMatrix<Complex64>],
    w1: &MpoSite,
    w2: &MpoSite,
    renv: &[DMatrix<Complex64>],
    theta: &[DMatrix<Complex64>; 2],
) -> [DMatrix<Complex64>; 2] {
    let chi_l = theta[0].nrows();
    let chi_r = theta[0].ncols() / 2;
    // Stage 1: left environment and w1. g[mid slot][s1'] is chi_l x (2 chi_r).
    let zero = DMatrix::from_element(chi_l, 2 * chi_r, Complex64::new(0.0, 0.0));
    let mut g: Vec<[DMatrix<Complex64>; 2]> = vec![[zero.clone(), zero.clone()]; w1.d_right];
    let mut cache: Vec<[Option<DMatrix<Complex64>>; 2]> = vec![[None, None]; w1.d_left];
    for (l, r, block) in w1.entries() {
        for s_in in 0..2 {
            if (0..2).all(|s_out| block[(s_out, s_in)].norm() == 0.0) {
                continue;
            }
            if cache[l][s_in].is_none() {
                cache[l][s_in] = Some(&lenv[l] * &theta[s_in]);
            }
            let base = cache[l][s_in].as_ref().expect("cached product");
            for s_out in 0..2 {
                let coef = block[(s_out, s_in)];
                if coef.norm() == 0.0 {
                    continue;
                }
                g[r][s_out] += base * coef;
            }
        }
    }
    // Stage 2: w2 and the right environment.
    let mut out = [zero.clone(), zero];
    for (l, r, block) in w2.entries() {
        for s_in in 0..2 {
            if (0..2).all(|s_out| block[(s_out, s_in)].norm() == 0.0) {
                continue;
            }
            for s1 in 0..2 {
                let seg = g[l][s1].columns(s_in * chi_r, chi_r);
                let grown = seg * renv[r].transpose();
                for s_out in 0..2 {
                    let coef = block[(s_out, s_in)];
                    if coef.norm() == 0.0 {
                        continue;
                    }
                    let mut target = out[s1].columns_mut(s_out * chi_r, chi_r);
                    target += &grown * coef;
                }
            }
        }
    }
    out
}
