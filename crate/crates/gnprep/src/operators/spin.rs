//! Sums of weighted Pauli strings with canonical term merging, statevector
//! application, and dense/sparse matrix realization.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::pauli::{Pauli, PauliString, StringAction};

/// Default cap for dense matrix realization.
pub const DENSE_QUBIT_CAP: usize = 12;
/// Default cap for any explicit matrix realization or statevector work.
pub const REGISTER_QUBIT_CAP: usize = 22;

/// Coefficients with magnitude below `MERGE_EPS * scale` are dropped when
/// canonicalizing, where `scale` is the largest coefficient magnitude.
const MERGE_EPS: f64 = 1e-14;

/// A qubit operator stored as a merged, letter-sorted list of Pauli strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpinOperator {
    n_qubits: usize,
    terms: Vec<PauliString>,
}

impl SpinOperator {
    pub fn zero(n_qubits: usize) -> Self {
        SpinOperator {
            n_qubits,
            terms: Vec::new(),
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        SpinOperator {
            n_qubits,
            terms: vec![PauliString::identity(n_qubits)],
        }
    }

    /// Build from raw strings; terms are sorted by letters, merged, and
    /// near-zero coefficients dropped.
    pub fn from_strings(n_qubits: usize, strings: Vec<PauliString>) -> Result<Self> {
        for s in &strings {
            if s.n_qubits() != n_qubits {
                return Err(Error::ShapeMismatch(format!(
                    "string on {} qubits in a {}-qubit operator",
                    s.n_qubits(),
                    n_qubits
                )));
            }
        }
        let mut op = SpinOperator {
            n_qubits,
            terms: strings,
        };
        op.canonicalize();
        Ok(op)
    }

    fn canonicalize(&mut self) {
        let mut merged: BTreeMap<Vec<Pauli>, Complex64> = BTreeMap::new();
        for t in self.terms.drain(..) {
            *merged
                .entry(t.letters)
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
            .map(|(letters, coeff)| PauliString { coeff, letters })
            .collect();
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_same_register(&self, rhs: &SpinOperator) -> Result<()> {
        if self.n_qubits != rhs.n_qubits {
            return Err(Error::ShapeMismatch(format!(
                "register widths {} and {}",
                self.n_qubits, rhs.n_qubits
            )));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &SpinOperator) -> Result<SpinOperator> {
        self.check_same_register(rhs)?;
        let mut terms = self.terms.clone();
        terms.extend(rhs.terms.iter().cloned());
        SpinOperator::from_strings(self.n_qubits, terms)
    }

    pub fn sub(&self, rhs: &SpinOperator) -> Result<SpinOperator> {
        self.add(&rhs.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> SpinOperator {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff *= factor;
        }
        out.canonicalize();
        out
    }

    pub fn mul(&self, rhs: &SpinOperator) -> Result<SpinOperator> {
        self.check_same_register(rhs)?;
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                terms.push(a.mul(b));
            }
        }
        SpinOperator::from_strings(self.n_qubits, terms)
    }

    pub fn dagger(&self) -> SpinOperator {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff = t.coeff.conj();
        }
        // letters stay sorted; merging is unnecessary but cheap to keep canonical
        out.canonicalize();
        out
    }

    /// Hermitian iff every merged coefficient is real (strings are self-adjoint).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let scale = self
            .terms
            .iter()
            .map(|t| t.coeff.norm())
            .fold(0.0_f64, f64::max)
            .max(1.0);
        self.terms.iter().all(|t| t.coeff.im.abs() <= tol * scale)
    }

    /// Triangle-inequality bound on the spectral norm: sum of |coeff|.
    pub fn coeff_norm_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).sum()
    }

    /// Precomputed per-string actions, reused across many `apply` calls.
    pub fn actions(&self) -> Vec<StringAction> {
        self.terms.iter().map(|t| t.action_masks()).collect()
    }

    /// Matrix-free application `out = op * v`.
    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::from_element(v.len(), Complex64::new(0.0, 0.0));
        self.apply_into(v, &mut out);
        out
    }

    /// `out += op * v` with `out` pre-zeroed by the caller replaced: this
    /// overwrites `out`.
    pub fn apply_into(&self, v: &DVector<Complex64>, out: &mut DVector<Complex64>) {
        assert_eq!(v.len(), self.dim(), "statevector dimension mismatch");
        assert_eq!(out.len(), self.dim(), "output dimension mismatch");
        out.fill(Complex64::new(0.0, 0.0));
        for act in self.actions() {
            apply_action(&act, v, out);
        }
    }

    /// Dense matrix realization; errors above `dense_cap`.
    pub fn to_dense(&self, dense_cap: usize) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > dense_cap {
            return Err(Error::RegisterTooLarge {
                qubits: self.n_qubits,
                cap: dense_cap,
            });
        }
        let dim = self.dim();
        let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for act in self.actions() {
            for col in 0..dim as u64 {
                let row = col ^ act.xmask;
                m[(row as usize, col as usize)] += act.amplitude(col);
            }
        }
        Ok(m)
    }

    /// Sparse (CSR) realization for registers past the dense cap; errors
    /// above `register_cap`.
    pub fn to_sparse(&self, register_cap: usize) -> Result<SparseMatrix> {
        if self.n_qubits > register_cap {
            return Err(Error::RegisterTooLarge {
                qubits: self.n_qubits,
                cap: register_cap,
            });
        }
        let dim = self.dim();
        // Column-grouped triplets: every string touches each column once.
        let acts = self.actions();
        let mut entries: Vec<(u64, u64, Complex64)> = Vec::with_capacity(acts.len() * dim);
        for act in &acts {
            for col in 0..dim as u64 {
                entries.push((col ^ act.xmask, col, act.amplitude(col)));
            }
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx: Vec<usize> = Vec::new();
        let mut values: Vec<Complex64> = Vec::new();
        let mut last: Option<(u64, u64)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().expect("merge follows a push") += v;
            } else {
                col_idx.push(c as usize);
                values.push(v);
                row_ptr[r as usize + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(SparseMatrix {
            dim,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Histogram of contiguous support widths over terms, identity excluded.
    pub fn width_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for t in &self.terms {
            let w = t.width();
            if w > 0 {
                *h.entry(w).or_insert(0) += 1;
            }
        }
        h
    }
}

#[inline]
fn apply_action(act: &StringAction, v: &DVector<Complex64>, out: &mut DVector<Complex64>) {
    let dim = v.len() as u64;
    for src in 0..dim {
        let amp = act.amplitude(src);
        out[(src ^ act.xmask) as usize] += amp * v[src as usize];
    }
}

/// Compressed sparse row matrix over `Complex64`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SparseMatrix {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<Complex64>,
}

impl SparseMatrix {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        assert_eq!(v.len(), self.dim);
        let mut out = DVector::from_element(self.dim, Complex64::new(0.0, 0.0));
        for row in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.values[k] * v[self.col_idx[k]];
            }
            out[row] = acc;
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, Complex64::new(0.0, 0.0));
        for row in 0..self.dim {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                m[(row, self.col_idx[k])] += self.values[k];
            }
        }
        m
    }
}

/// Raising operator sigma^+ = (X - iY)/2 = |1><0| at `qubit`.
pub fn sigma_plus(n_qubits: usize, qubit: usize) -> SpinOperator {
    two_string_ladder(n_qubits, qubit, -0.5)
}

/// Lowering operator sigma^- = (X + iY)/2 = |0><1| at `qubit`.
pub fn sigma_minus(n_qubits: usize, qubit: usize) -> SpinOperator {
    two_string_ladder(n_qubits, qubit, 0.5)
}

fn two_string_ladder(n_qubits: usize, qubit: usize, y_half: f64) -> SpinOperator {
    let x = PauliString::single(n_qubits, qubit, Pauli::X, Complex64::new(0.5, 0.0));
    let y = PauliString::single(n_qubits, qubit, Pauli::Y, Complex64::new(0.0, y_half));
    SpinOperator::from_strings(n_qubits, vec![x, y]).expect("fixed-width strings")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        a.kronecker(b)
    }

    fn letter_dense(p: Pauli) -> DMatrix<Complex64> {
        let z = c(0.0, 0.0);
        let rows = match p {
            Pauli::I => [[c(1.0, 0.0), z], [z, c(1.0, 0.0)]],
            Pauli::X => [[z, c(1.0, 0.0)], [c(1.0, 0.0), z]],
            Pauli::Y => [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
            Pauli::Z => [[c(1.0, 0.0), z], [z, c(-1.0, 0.0)]],
        };
        DMatrix::from_fn(2, 2, |i, j| rows[i][j])
    }

    /// Kronecker-product oracle with qubit 0 as the leftmost factor.
    fn string_dense_oracle(s: &PauliString) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(1, 1, s.coeff);
        for &p in &s.letters {
            m = kron(&m, &letter_dense(p));
        }
        m
    }

    fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        (a - b).iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn dense_matches_kronecker_oracle() {
        let strings = vec![
            PauliString {
                coeff: c(0.7, -0.2),
                letters: vec![Pauli::X, Pauli::I, Pauli::Z],
            },
            PauliString {
                coeff: c(0.0, 1.3),
                letters: vec![Pauli::Y, Pauli::Y, Pauli::I],
            },
            PauliString {
                coeff: c(-0.4, 0.0),
                letters: vec![Pauli::I, Pauli::I, Pauli::I],
            },
        ];
        let oracle = strings
            .iter()
            .map(string_dense_oracle)
            .fold(DMatrix::from_element(8, 8, c(0.0, 0.0)), |acc, m| acc + m);
        let op = SpinOperator::from_strings(3, strings).unwrap();
        let dense = op.to_dense(DENSE_QUBIT_CAP).unwrap();
        assert!(max_abs_diff(&dense, &oracle) < 1e-14);
    }

    #[test]
    fn apply_matches_dense() {
        let strings = vec![
            PauliString {
                coeff: c(0.3, 0.1),
                letters: vec![Pauli::Z, Pauli::X, Pauli::Y],
            },
            PauliString {
                coeff: c(1.0, 0.0),
                letters: vec![Pauli::X, Pauli::Y, Pauli::Z],
            },
        ];
        let op = SpinOperator::from_strings(3, strings).unwrap();
        let dense = op.to_dense(DENSE_QUBIT_CAP).unwrap();
        let v = DVector::from_fn(8, |i, _| c(i as f64 * 0.1 + 0.05, -(i as f64) * 0.03));
        let via_apply = op.apply(&v);
        let via_dense = &dense * &v;
        for i in 0..8 {
            assert_abs_diff_eq!(via_apply[i].re, via_dense[i].re, epsilon = 1e-13);
            assert_abs_diff_eq!(via_apply[i].im, via_dense[i].im, epsilon = 1e-13);
        }
    }

    #[test]
    fn sparse_matches_dense() {
        let strings = vec![
            PauliString {
                coeff: c(0.5, 0.0),
                letters: vec![Pauli::X, Pauli::X],
            },
            PauliString {
                coeff: c(0.5, 0.0),
                letters: vec![Pauli::Y, Pauli::Y],
            },
            PauliString {
                coeff: c(0.25, 0.0),
                letters: vec![Pauli::Z, Pauli::I],
            },
        ];
        let op = SpinOperator::from_strings(2, strings).unwrap();
        let dense = op.to_dense(DENSE_QUBIT_CAP).unwrap();
        let sparse = op.to_sparse(REGISTER_QUBIT_CAP).unwrap();
        assert!(max_abs_diff(&sparse.to_dense(), &dense) < 1e-14);
        // XX and YY share the same xmask; their (row, col) entries must merge
        assert!(sparse.nnz() <= 8);
    }

    #[test]
    fn merging_cancels_opposite_terms() {
        let s1 = PauliString::single(2, 0, Pauli::X, c(1.0, 0.0));
        let s2 = PauliString::single(2, 0, Pauli::X, c(-1.0, 0.0));
        let op = SpinOperator::from_strings(2, vec![s1, s2]).unwrap();
        assert!(op.is_zero());
    }

    #[test]
    fn ladder_operators_are_projector_conjugates() {
        // sigma^+ sigma^- = |1><1| = (I - Z)/2 on the target qubit
        let sp = sigma_plus(1, 0);
        let sm = sigma_minus(1, 0);
        let number = sp.mul(&sm).unwrap();
        let dense = number.to_dense(DENSE_QUBIT_CAP).unwrap();
        assert_abs_diff_eq!(dense[(0, 0)].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dense[(1, 1)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dense[(0, 1)].norm(), 0.0, epsilon = 1e-15);
        // sigma^+ |0> = |1>
        let v0 = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let up = sp.apply(&v0);
        assert_abs_diff_eq!(up[1].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn hermiticity_detection() {
        let h = SpinOperator::from_strings(
            2,
            vec![
                PauliString::single(2, 0, Pauli::X, c(0.5, 0.0)),
                PauliString::single(2, 1, Pauli::Z, c(-1.5, 0.0)),
            ],
        )
        .unwrap();
        assert!(h.is_hermitian(1e-12));
        let a = SpinOperator::from_strings(
            2,
            vec![PauliString::single(2, 0, Pauli::X, c(0.0, 0.5))],
        )
        .unwrap();
        assert!(!a.is_hermitian(1e-12));
    }

    #[test]
    fn dense_cap_enforced() {
        let op = SpinOperator::identity(13);
        assert!(matches!(
            op.to_dense(DENSE_QUBIT_CAP),
            Err(Error::RegisterTooLarge { .. })
        ));
    }
}
