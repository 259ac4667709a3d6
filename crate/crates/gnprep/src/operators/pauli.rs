//! Pauli letters and weighted Pauli strings on a fixed-width qubit register.
//!
//! Qubit 0 is the leftmost letter and the most significant bit of a basis
//! index: for an `n`-qubit register, basis state `b` assigns qubit `q` the
//! bit `(b >> (n - 1 - q)) & 1`.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Product of two letters as `(phase, letter)` with `self * rhs = phase * letter`.
    pub fn mul(self, rhs: Pauli) -> (Complex64, Pauli) {
        use Pauli::*;
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match (self, rhs) {
            (I, p) => (one, p),
            (p, I) => (one, p),
            (X, X) | (Y, Y) | (Z, Z) => (one, I),
            (X, Y) => (i, Z),
            (Y, X) => (-i, Z),
            (Y, Z) => (i, X),
            (Z, Y) => (-i, X),
            (Z, X) => (i, Y),
            (X, Z) => (-i, Y),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Result<Pauli> {
        match c {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::InvalidParameter(format!(
                "unknown Pauli letter `{other}`"
            ))),
        }
    }
}

/// One weighted Pauli string: `coeff * P_0 P_1 ... P_{n-1}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PauliString {
    pub coeff: Complex64,
    pub letters: Vec<Pauli>,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        PauliString {
            coeff: Complex64::new(1.0, 0.0),
            letters: vec![Pauli::I; n_qubits],
        }
    }

    /// A single letter placed at `qubit`, all other positions identity.
    pub fn single(n_qubits: usize, qubit: usize, letter: Pauli, coeff: Complex64) -> Self {
        assert!(qubit < n_qubits, "qubit index out of range");
        let mut letters = vec![Pauli::I; n_qubits];
        letters[qubit] = letter;
        PauliString { coeff, letters }
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    /// String product, accumulating letter phases into the coefficient.
    pub fn mul(&self, rhs: &PauliString) -> PauliString {
        assert_eq!(
            self.letters.len(),
            rhs.letters.len(),
            "register width mismatch"
        );
        let mut coeff = self.coeff * rhs.coeff;
        let letters = self
            .letters
            .iter()
            .zip(&rhs.letters)
            .map(|(&a, &b)| {
                let (phase, p) = a.mul(b);
                coeff *= phase;
                p
            })
            .collect();
        PauliString { coeff, letters }
    }

    /// Hermitian conjugate: letters are self-adjoint, so only the
    /// coefficient conjugates.
    pub fn dagger(&self) -> PauliString {
        PauliString {
            coeff: self.coeff.conj(),
            letters: self.letters.clone(),
        }
    }

    /// Inclusive `(first, last)` non-identity positions, `None` for identity strings.
    pub fn support(&self) -> Option<(usize, usize)> {
        let first = self.letters.iter().position(|&p| p != Pauli::I)?;
        let last = self.letters.iter().rposition(|&p| p != Pauli::I)?;
        Some((first, last))
    }

    /// Contiguous width of the support window; 0 for identity strings.
    pub fn width(&self) -> usize {
        match self.support() {
            Some((a, b)) => b - a + 1,
            None => 0,
        }
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn letters_key(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn cmp_letters(&self, rhs: &PauliString) -> Ordering {
        self.letters.cmp(&rhs.letters)
    }

    /// Masks used when applying the string to a statevector: bit `n-1-q` of
    /// `xmask` is set for X/Y letters at qubit `q` (column bit flips), and of
    /// `zymask` for Y/Z letters (sign from the source bit). `i^{#Y}` is the
    /// letter-independent phase prefactor.
    pub fn action_masks(&self) -> StringAction {
        let n = self.letters.len();
        let mut xmask: u64 = 0;
        let mut zymask: u64 = 0;
        let mut ny: u32 = 0;
        for (q, &p) in self.letters.iter().enumerate() {
            let bit = 1u64 << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => xmask |= bit,
                Pauli::Y => {
                    xmask |= bit;
                    zymask |= bit;
                    ny += 1;
                }
                Pauli::Z => zymask |= bit,
            }
        }
        let phase = Complex64::new(0.0, 1.0).powu(ny % 4);
        StringAction {
            xmask,
            zymask,
            base: self.coeff * phase,
        }
    }

    pub fn label(&self) -> String {
        self.letters.iter().map(|p| p.as_char()).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({:+.6e}{:+.6e}i) {}",
            self.coeff.re,
            self.coeff.im,
            self.label()
        )
    }
}

/// Precomputed data for applying one string to basis vectors.
///
/// For source index `b`: the string maps `|b>` to
/// `base * (-1)^{popcount(b & zymask)} |b ^ xmask>`.
#[derive(Clone, Copy, Debug)]
pub struct StringAction {
    pub xmask: u64,
    pub zymask: u64,
    pub base: Complex64,
}

impl StringAction {
    #[inline]
    pub fn amplitude(&self, source: u64) -> Complex64 {
        if (source & self.zymask).count_ones() & 1 == 1 {
            -self.base
        } else {
            self.base
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Dense 2x2 matrices as the oracle for the letter product table.
    fn letter_matrix(p: Pauli) -> [[Complex64; 2]; 2] {
        let z = c(0.0, 0.0);
        match p {
            Pauli::I => [[c(1.0, 0.0), z], [z, c(1.0, 0.0)]],
            Pauli::X => [[z, c(1.0, 0.0)], [c(1.0, 0.0), z]],
            Pauli::Y => [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
            Pauli::Z => [[c(1.0, 0.0), z], [z, c(-1.0, 0.0)]],
        }
    }

    fn mat_mul(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
        let z = c(0.0, 0.0);
        let mut out = [[z; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        out
    }

    #[test]
    fn letter_products_match_matrix_oracle() {
        let all = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        for &a in &all {
            for &b in &all {
                let (phase, p) = a.mul(b);
                let lhs = mat_mul(letter_matrix(a), letter_matrix(b));
                let rhs = letter_matrix(p);
                for i in 0..2 {
                    for j in 0..2 {
                        let want = phase * rhs[i][j];
                        assert_abs_diff_eq!(lhs[i][j].re, want.re, epsilon = 1e-15);
                        assert_abs_diff_eq!(lhs[i][j].im, want.im, epsilon = 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn string_product_tracks_phases() {
        // (X ⊗ Y) * (Y ⊗ Y) = (XY) ⊗ (YY) = iZ ⊗ I
        let a = PauliString {
            coeff: c(1.0, 0.0),
            letters: vec![Pauli::X, Pauli::Y],
        };
        let b = PauliString {
            coeff: c(1.0, 0.0),
            letters: vec![Pauli::Y, Pauli::Y],
        };
        let p = a.mul(&b);
        assert_eq!(p.letters, vec![Pauli::Z, Pauli::I]);
        assert_abs_diff_eq!(p.coeff.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.coeff.im, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn support_and_width() {
        let s = PauliString {
            coeff: c(1.0, 0.0),
            letters: vec![Pauli::I, Pauli::Z, Pauli::I, Pauli::X, Pauli::I],
        };
        assert_eq!(s.support(), Some((1, 3)));
        assert_eq!(s.width(), 3);
        assert_eq!(s.weight(), 2);
        assert_eq!(PauliString::identity(4).width(), 0);
    }

    #[test]
    fn action_masks_reproduce_letter_action() {
        // Y at qubit 0 of a 2-qubit register. Qubit 0 is the MSB.
        let s = PauliString::single(2, 0, Pauli::Y, c(1.0, 0.0));
        let act = s.action_masks();
        assert_eq!(act.xmask, 0b10);
        assert_eq!(act.zymask, 0b10);
        // |00> -> i|10>, source bit 0: amplitude i
        assert_abs_diff_eq!(act.amplitude(0b00).im, 1.0, epsilon = 1e-15);
        // |10> -> -i|00>, source bit 1: amplitude -i
        assert_abs_diff_eq!(act.amplitude(0b10).im, -1.0, epsilon = 1e-15);
    }
}
