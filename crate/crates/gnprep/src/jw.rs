//! Jordan-Wigner transform from fermionic polynomials to Pauli-string
//! operators, plus locality diagnostics for the mapped terms.
//!
//! Occupation convention: an occupied mode is qubit state `|1>`, so the mode
//! number operator maps to `(I - Z)/(2a)`. A field factor on qubit `q` maps
//! to `-(1/sqrt(a)) Z_0...Z_{q-1} (X pm iY)/2` with `+i` for annihilation
//! and `-i` for creation; the per-factor `1/sqrt(a)` is folded into the term
//! coefficient as `a^{apow - k/2}` for a `k`-factor term.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{FermionOperator, Mode, Pauli, PauliString, SpinOperator};

/// Layout of modes on the qubit line. Site index is always the outermost
/// (slowest) key, keeping hopping terms contiguous.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QubitOrdering {
    /// site, then species, then spinor component: `q = 2N x + 2(j-1) + s`.
    SpeciesMajor,
    /// site, then spinor component, then species: `q = 2N x + N s + (j-1)`.
    SpinorMajor,
}

impl Default for QubitOrdering {
    fn default() -> Self {
        QubitOrdering::SpeciesMajor
    }
}

impl QubitOrdering {
    pub fn qubit_index(self, n_species: u32, mode: Mode) -> usize {
        let nn = n_species as usize;
        let x = mode.site as usize;
        let j = (mode.species - 1) as usize;
        let s = mode.spinor as usize;
        match self {
            QubitOrdering::SpeciesMajor => 2 * nn * x + 2 * j + s,
            QubitOrdering::SpinorMajor => 2 * nn * x + nn * s + j,
        }
    }

    pub fn mode_at(self, n_species: u32, qubit: usize) -> Mode {
        let nn = n_species as usize;
        let x = qubit / (2 * nn);
        let rem = qubit % (2 * nn);
        let (j, s) = match self {
            QubitOrdering::SpeciesMajor => (rem / 2, rem % 2),
            QubitOrdering::SpinorMajor => (rem % nn, rem / nn),
        };
        Mode::new(x as u32, j as u32 + 1, s as u8)
    }
}

/// Qubits needed for a register of `sites * species` two-component fields.
pub fn register_width(sites: u32, species: u32) -> usize {
    2 * sites as usize * species as usize
}

/// The two Pauli strings realizing one ladder factor on qubit `q`.
fn ladder_strings(n_qubits: usize, q: usize, create: bool) -> [PauliString; 2] {
    use num_complex::Complex64;
    let mut letters = vec![Pauli::I; n_qubits];
    for l in letters.iter_mut().take(q) {
        *l = Pauli::Z;
    }
    let mut lx = letters.clone();
    lx[q] = Pauli::X;
    let mut ly = letters;
    ly[q] = Pauli::Y;
    let y_half = if create { 0.5 } else { -0.5 };
    [
        PauliString {
            coeff: Complex64::new(-0.5, 0.0),
            letters: lx,
        },
        PauliString {
            coeff: Complex64::new(0.0, y_half),
            letters: ly,
        },
    ]
}

/// Map a fermionic polynomial to a qubit operator. Spacing powers are
/// realized numerically here; half-integer powers arise for odd factor
/// counts.
pub fn jw_map(
    op: &FermionOperator,
    spacing: f64,
    ordering: QubitOrdering,
) -> Result<SpinOperator> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lattice spacing must be positive and finite, got {spacing}"
        )));
    }
    let nq = register_width(op.sites, op.species);
    if nq > 64 {
        return Err(Error::RegisterTooLarge {
            qubits: nq,
            cap: 64,
        });
    }
    let mut strings: Vec<PauliString> = Vec::new();
    for term in op.terms() {
        let k = term.factors.len();
        let spow = spacing.powf(term.apow as f64 - k as f64 / 2.0);
        let mut current = vec![PauliString {
            coeff: term.coeff * spow,
            letters: vec![Pauli::I; nq],
        }];
        for f in &term.factors {
            let q = ordering.qubit_index(op.species, f.mode);
            let pair = ladder_strings(nq, q, f.create);
            let mut next = Vec::with_capacity(current.len() * 2);
            for c in &current {
                next.push(c.mul(&pair[0]));
                next.push(c.mul(&pair[1]));
            }
            current = next;
        }
        strings.extend(current);
    }
    SpinOperator::from_strings(nq, strings)
}

/// Width histogram of a mapped operator, split into bulk terms and terms
/// that cross the periodic boundary. A string is classified as
/// boundary-crossing when its contiguous support exceeds the widest bulk
/// window `2 * (2 * n_species)` (nearest-neighbor support spans two full
/// site blocks).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalityReport {
    pub n_qubits: usize,
    pub bulk_window: usize,
    pub bulk_histogram: BTreeMap<usize, usize>,
    pub bulk_max_width: usize,
    pub wrap_count: usize,
    pub wrap_max_weight: usize,
}

pub fn locality_report(op: &SpinOperator, n_species: u32) -> LocalityReport {
    let bulk_window = 4 * n_species as usize;
    let mut bulk_histogram = BTreeMap::new();
    let mut bulk_max_width = 0usize;
    let mut wrap_count = 0usize;
    let mut wrap_max_weight = 0usize;
    for t in op.terms() {
        let w = t.width();
        if w == 0 {
            continue;
        }
        if w <= bulk_window {
            *bulk_histogram.entry(w).or_insert(0) += 1;
            bulk_max_width = bulk_max_width.max(w);
        } else {
            wrap_count += 1;
            wrap_max_weight = wrap_max_weight.max(t.weight());
        }
    }
    LocalityReport {
        n_qubits: op.n_qubits(),
        bulk_window,
        bulk_histogram,
        bulk_max_width,
        wrap_count,
        wrap_max_weight,
    }
}

/// A mapped Hamiltonian with its locality diagnostics.
#[derive(Clone, Debug)]
pub struct MappedHamiltonian {
    pub op: SpinOperator,
    pub report: LocalityReport,
}

/// Map a Hamiltonian, verifying hermiticity before and after the transform.
pub fn map_hamiltonian(
    h: &FermionOperator,
    spacing: f64,
    ordering: QubitOrdering,
) -> Result<MappedHamiltonian> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian(
            "fermionic Hamiltonian is not self-adjoint".into(),
        ));
    }
    let op = jw_map(h, spacing, ordering)?;
    if !op.is_hermitian(1e-12) {
        return Err(Error::NotHermitian(
            "mapped operator has complex string coefficients".into(),
        ));
    }
    let report = locality_report(&op, h.species);
    Ok(MappedHamiltonian { op, report })
}
