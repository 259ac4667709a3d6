//! Compilation of a matrix product state into a sequential preparation circuit.
//!
//! A right-canonical state with bond dimensions `chi[0..=n]` is prepared from
//! `|0...0>` by one dense unitary per site, applied left to right.  The gate
//! for site `i` acts on the qubit window `[i, i + w_i)` with
//! `w_i = max(bits(chi[i]), 1 + bits(chi[i+1]))`, where `bits(x)` is the
//! number of qubits needed to address `x` bond values (`bits(1) = 0`).  On
//! input the window holds the incoming bond value in its leading qubits and
//! zeros elsewhere; on output qubit `i` carries the physical bit and the next
//! `bits(chi[i+1])` window qubits carry the outgoing bond value.  A bond
//! dimension that is not a power of two is padded to the next one with unused
//! bond values of zero Schmidt weight; the columns addressing the padding are
//! fixed only by the orthonormal completion of the gate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mps::state::{Canonical, Mps, MPS_DENSE_CAP};

/// Largest allowed deviation of a site tensor's embedded columns from
/// orthonormality.
pub const ISOMETRY_TOL: f64 = 1e-10;

/// Largest allowed deviation of a finished gate from unitarity.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Completion candidates closer than this to the span of the existing
/// columns are discarded.
const COMPLETION_KEEP_TOL: f64 = 1e-6;

/// Entries below this magnitude are skipped when picking the pivot that
/// fixes a completed column's global phase.
const SIGN_TOL: f64 = 1e-9;

/// Number of qubits needed to address `x` bond values; `bits(1) = 0`.
fn bits(x: usize) -> usize {
    (usize::BITS - (x - 1).leading_zeros()) as usize
}

/// One dense unitary acting on a contiguous qubit window.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    /// Register qubits the matrix acts on; `window[0]` is the most
    /// significant bit of the matrix row and column index.
    pub window: Vec<usize>,
    /// Row-major dense unitary of dimension `2^window.len()`.
    pub matrix: DMatrix<Complex64>,
}

impl Gate {
    /// Matrix dimension `2^window.len()`.
    pub fn dim(&self) -> usize {
        1usize << self.window.len()
    }

    /// Cost of the gate in two-level-unitary units, `d (d - 1) / 2`.
    pub fn two_level_units(&self) -> usize {
        let d = self.dim();
        d * (d - 1) / 2
    }

    /// Largest entry of `U^dagger U - I`.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.matrix.nrows();
        let gram = self.matrix.adjoint() * &self.matrix;
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                let target = if r == c {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                worst = worst.max((gram[(r, c)] - target).norm());
            }
        }
        worst
    }
}

/// An ordered list of window gates preparing a state from `|0...0>`.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitDescription {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

#[derive(Serialize, Deserialize)]
struct GateWire {
    window: Vec<usize>,
    /// Row-major `[re, im]` pairs.
    matrix: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct CircuitWire {
    n_qubits: usize,
    gates: Vec<GateWire>,
}

impl CircuitDescription {
    /// Total cost in two-level-unitary units across all gates.
    pub fn two_level_units(&self) -> usize {
        self.gates.iter().map(Gate::two_level_units).sum()
    }

    /// Widest gate window in the circuit.
    pub fn max_window(&self) -> usize {
        self.gates.iter().map(|g| g.window.len()).max().unwrap_or(0)
    }

    /// Checks window bounds, matrix shapes, and unitarity of every gate.
    pub fn validate(&self) -> Result<()> {
        for (k, gate) in self.gates.iter().enumerate() {
            let w = gate.window.len();
            if w == 0 {
                return Err(Error::InvalidParameter(format!("gate {k} has an empty window")));
            }
            let mut seen = gate.window.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != w {
                return Err(Error::InvalidParameter(format!(
                    "gate {k} repeats a qubit in its window"
                )));
            }
            if gate.window.iter().any(|&q| q >= self.n_qubits) {
                return Err(Error::InvalidParameter(format!(
                    "gate {k} addresses a qubit outside the {}-qubit register",
                    self.n_qubits
                )));
            }
            let d = 1usize << w;
            if gate.matrix.nrows() != d || gate.matrix.ncols() != d {
                return Err(Error::ShapeMismatch(format!(
                    "gate {k} matrix is {}x{}, expected {d}x{d}",
                    gate.matrix.nrows(),
                    gate.matrix.ncols()
                )));
            }
            let dev = gate.unitarity_deviation();
            if !(dev <= UNITARITY_TOL) {
                return Err(Error::InvalidParameter(format!(
                    "gate {k} deviates from unitarity by {dev:.3e}"
                )));
            }
        }
        Ok(())
    }

    /// Applies the gates in order to `|0...0>` and returns the dense state.
    pub fn simulate(&self) -> Result<DVector<Complex64>> {
        let n = self.n_qubits;
        if n == 0 {
            return Err(Error::InvalidParameter("circuit has no qubits".into()));
        }
        if n > MPS_DENSE_CAP {
            return Err(Error::RegisterTooLarge {
                qubits: n,
                cap: MPS_DENSE_CAP,
            });
        }
        self.validate()?;
        let dim = 1usize << n;
        let mut state = DVector::<Complex64>::zeros(dim);
        state[0] = Complex64::new(1.0, 0.0);
        for gate in &self.gates {
            apply_gate(&mut state, n, gate);
        }
        Ok(state)
    }

    /// Serializes to the interchange format: per gate, the window and the
    /// matrix as row-major `[re, im]` pairs.
    pub fn to_json(&self) -> Result<String> {
        let gates = self
            .gates
            .iter()
            .map(|g| {
                let d = g.matrix.nrows();
                let mut flat = Vec::with_capacity(d * d);
                for r in 0..d {
                    for c in 0..d {
                        let z = g.matrix[(r, c)];
                        flat.push([z.re, z.im]);
                    }
                }
                GateWire {
                    window: g.window.clone(),
                    matrix: flat,
                }
            })
            .collect();
        let wire = CircuitWire {
            n_qubits: self.n_qubits,
            gates,
        };
        Ok(serde_json::to_string_pretty(&wire)?)
    }

    /// Parses the interchange format and validates the result.
    pub fn from_json(text: &str) -> Result<CircuitDescription> {
        let wire: CircuitWire = serde_json::from_str(text)?;
        let mut gates = Vec::with_capacity(wire.gates.len());
        for (k, g) in wire.gates.into_iter().enumerate() {
            let w = g.window.len();
            if w == 0 || w > MPS_DENSE_CAP {
                return Err(Error::InvalidParameter(format!(
                    "gate {k} window of {w} qubits is outside 1..={MPS_DENSE_CAP}"
                )));
            }
            let d = 1usize << w;
            if g.matrix.len() != d * d {
                return Err(Error::ShapeMismatch(format!(
                    "gate {k} carries {} entries, expected {}",
                    g.matrix.len(),
                    d * d
                )));
            }
            let matrix = DMatrix::from_fn(d, d, |r, c| {
                let [re, im] = g.matrix[r * d + c];
                Complex64::new(re, im)
            });
            gates.push(Gate {
                window: g.window,
                matrix,
            });
        }
        let circuit = CircuitDescription {
            n_qubits: wire.n_qubits,
            gates,
        };
        circuit.validate()?;
        Ok(circuit)
    }
}

fn apply_gate(state: &mut DVector<Complex64>, n: usize, gate: &Gate) {
    let w = gate.window.len();
    let d = 1usize << w;
    // dense index bit carried by window position k (qubit 0 is the MSB)
    let shifts: Vec<usize> = gate.window.iter().map(|&q| n - 1 - q).collect();
    let others: Vec<usize> = (0..n).filter(|b| !shifts.contains(b)).collect();
    let mut place = vec![0usize; d];
    for (g, slot) in place.iter_mut().enumerate() {
        for (k, &shift) in shifts.iter().enumerate() {
            *slot |= ((g >> (w - 1 - k)) & 1) << shift;
        }
    }
    let mut sub = DVector::<Complex64>::zeros(d);
    for r in 0..(1usize << others.len()) {
        let mut base = 0usize;
        for (k, &shift) in others.iter().enumerate() {
            base |= ((r >> k) & 1) << shift;
        }
        for g in 0..d {
            sub[g] = state[base | place[g]];
        }
        let out = &gate.matrix * &sub;
        for g in 0..d {
            state[base | place[g]] = out[g];
        }
    }
}

/// Extends a partially filled matrix, whose columns listed in `filled` are
/// already orthonormal, to a full unitary.  Empty columns are filled in
/// ascending index order from standard basis vectors taken in index order,
/// orthogonalized twice against all accepted columns, and kept when the
/// remainder is well conditioned.  Each new column's phase is fixed by
/// rotating its first significant entry to the positive real axis.
fn complete_unitary(m: &mut DMatrix<Complex64>, filled: &[usize]) -> Result<()> {
    let d = m.nrows();
    let mut have: Vec<usize> = filled.to_vec();
    let empty: Vec<usize> = (0..d).filter(|c| !filled.contains(c)).collect();
    let mut candidate = 0usize;
    for &slot in &empty {
        loop {
            if candidate == d {
                return Err(Error::DegenerateInput(
                    "orthonormal completion exhausted the standard basis".into(),
                ));
            }
            let j = candidate;
            candidate += 1;
            let mut v = DVector::<Complex64>::zeros(d);
            v[j] = Complex64::new(1.0, 0.0);
            for _ in 0..2 {
                for &c in &have {
                    let col = m.column(c);
                    let overlap = col.dotc(&v);
                    v.axpy(-overlap, &m.column(c), Complex64::new(1.0, 0.0));
                }
            }
            let norm = v.norm();
            if norm <= COMPLETION_KEEP_TOL {
                continue;
            }
            v.unscale_mut(norm);
            if let Some(k) = (0..d).find(|&k| v[k].norm() > SIGN_TOL) {
                let phase = v[k] / Complex64::new(v[k].norm(), 0.0);
                v *= phase.conj();
            }
            m.set_column(slot, &v);
            have.push(slot);
            break;
        }
    }
    Ok(())
}

/// Compiles a state into one window gate per site.  The input is copied,
/// normalized, and brought to right-canonical form first; the circuit
/// prepares that normalized state from `|0...0>`.
pub fn compile_mps(psi: &Mps) -> Result<CircuitDescription> {
    let n = psi.n_sites();
    if n == 0 {
        return Err(Error::InvalidParameter("cannot compile an empty register".into()));
    }
    let mut work = psi.clone();
    work.normalize();
    work.canonicalize(Canonical::Right)?;
    let mut gates = Vec::with_capacity(n);
    for i in 0..n {
        let site = work.site(i);
        let chi_l = site.chi_left();
        let chi_r = site.chi_right();
        let bl = bits(chi_l);
        let br = bits(chi_r);
        let w = bl.max(1 + br);
        if i + w > n {
            return Err(Error::ShapeMismatch(format!(
                "site {i} window of {w} qubits overruns the {n}-qubit register \
                 (bond dimensions {chi_l} and {chi_r})"
            )));
        }
        let d = 1usize << w;
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        let mut filled = Vec::with_capacity(chi_l);
        for a in 0..chi_l {
            let col = a << (w - bl);
            filled.push(col);
            for (s, block) in site.blocks.iter().enumerate() {
                for b in 0..chi_r {
                    let row = (s << (w - 1)) | (b << (w - 1 - br));
                    m[(row, col)] = block[(a, b)];
                }
            }
        }
        let mut iso_dev = 0.0f64;
        for (ka, &ca) in filled.iter().enumerate() {
            for &cb in filled.iter().take(ka + 1) {
                let dot = m.column(ca).dotc(&m.column(cb));
                let target = if ca == cb {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                iso_dev = iso_dev.max((dot - target).norm());
            }
        }
        if !(iso_dev <= ISOMETRY_TOL) {
            return Err(Error::InvalidParameter(format!(
                "site {i} tensor embeds into columns that deviate from \
                 orthonormality by {iso_dev:.3e}"
            )));
        }
        complete_unitary(&mut m, &filled)?;
        let gate = Gate {
            window: (i..i + w).collect(),
            matrix: m,
        };
        let dev = gate.unitarity_deviation();
        if !(dev <= UNITARITY_TOL) {
            return Err(Error::InvalidParameter(format!(
                "completed gate for site {i} deviates from unitarity by {dev:.3e}"
            )));
        }
        gates.push(gate);
    }
    Ok(CircuitDescription { n_qubits: n, gates })
}

/// Squared overlap `|<a|b>|^2` of two dense states, assumed unit norm.
pub fn state_fidelity(a: &DVector<Complex64>, b: &DVector<Complex64>) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!(
            "state lengths {} and {} differ",
            a.len(),
            b.len()
        )));
    }
    Ok(a.dotc(b).norm_sqr())
}

/// Simulates the circuit and returns its squared overlap with the dense form
/// of the (normalized) source state.
pub fn compile_fidelity(psi: &Mps, circuit: &CircuitDescription) -> Result<f64> {
    let sim = circuit.simulate()?;
    let mut reference = psi.clone();
    reference.normalize();
    let dense = reference.to_statevector()?;
    state_fidelity(&sim, &dense)
}
