//! Eigensolver front end: dense decomposition for small registers, deflated
//! Lanczos above the dense cap, plus spectral utilities shared by the
//! driven-dynamics analysis (detunings, eigenbasis matrix elements,
//! degenerate-block alignment against a coupling operator).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::lanczos::{lanczos_lowest, LanczosOptions};
use crate::operators::spin::{DENSE_QUBIT_CAP, REGISTER_QUBIT_CAP};
use crate::operators::{SpinOperator, StringAction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EigenBackend {
    /// Dense below the dense cap, Lanczos above it.
    Auto,
    Dense,
    Lanczos,
}

#[derive(Clone, Debug)]
pub struct EigenOptions {
    pub backend: EigenBackend,
    /// Number of lowest eigenpairs to keep; `None` keeps everything the
    /// dense path produces and defaults to 8 for Lanczos.
    pub k: Option<usize>,
    pub dense_cap: usize,
    pub register_cap: usize,
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            backend: EigenBackend::Auto,
            k: None,
            dense_cap: DENSE_QUBIT_CAP,
            register_cap: REGISTER_QUBIT_CAP,
            tol: 1e-10,
            max_restarts: 600,
            seed: 7,
        }
    }
}

/// Resolved portion of a spectrum, energies ascending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub n_qubits: usize,
    pub dim: usize,
    pub energies: Vec<f64>,
    pub states: Vec<DVector<Complex64>>,
    /// True when every level of the register was resolved.
    pub complete: bool,
}

impl Spectrum {
    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    /// Gap between the two lowest resolved levels.
    pub fn gap(&self) -> f64 {
        self.energies[1] - self.energies[0]
    }

    /// Transition frequency `E_j - E_i`.
    pub fn transition(&self, i: usize, j: usize) -> f64 {
        self.energies[j] - self.energies[i]
    }
}

fn apply_with_actions(actions: &[StringAction], v: &DVector<Complex64>) -> DVector<Complex64> {
    let mut out = DVector::from_element(v.len(), Complex64::new(0.0, 0.0));
    for act in actions {
        let dim = v.len() as u64;
        for src in 0..dim {
            out[(src ^ act.xmask) as usize] += act.amplitude(src) * v[src as usize];
        }
    }
    out
}

/// Lowest eigenpairs of a hermitian qubit operator.
pub fn eigensolve(op: &SpinOperator, opts: &EigenOptions) -> Result<Spectrum> {
    if !op.is_hermitian(1e-12) {
        return Err(Error::NotHermitian(
            "eigensolve requires a hermitian operator".into(),
        ));
    }
    let nq = op.n_qubits();
    if nq > opts.register_cap {
        return Err(Error::RegisterTooLarge {
            qubits: nq,
            cap: opts.register_cap,
        });
    }
    let dim = op.dim();
    let dense = match opts.backend {
        EigenBackend::Dense => {
            if nq > opts.dense_cap {
                return Err(Error::RegisterTooLarge {
                    qubits: nq,
                    cap: opts.dense_cap,
                });
            }
            true
        }
        EigenBackend::Lanczos => false,
        EigenBackend::Auto => nq <= opts.dense_cap,
    };

    if dense {
        let m = op.to_dense(opts.dense_cap)?;
        let (evals, evecs) = dense_hermitian_eigen(&m)?;
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| evals[a].total_cmp(&evals[b]));
        let keep = opts.k.unwrap_or(dim).min(dim);
        let energies: Vec<f64> = order[..keep].iter().map(|&i| evals[i]).collect();
        let states: Vec<DVector<Complex64>> = order[..keep]
            .iter()
            .map(|&i| evecs.column(i).into_owned())
            .collect();
        Ok(Spectrum {
            n_qubits: nq,
            dim,
            energies,
            states,
            complete: keep == dim,
        })
    } else {
        let k = opts.k.unwrap_or(8).min(dim);
        let actions = op.actions();
        let lopts = LanczosOptions {
            k,
            tol: opts.tol,
            krylov_cap: 120,
            max_restarts: opts.max_restarts,
            seed: opts.seed,
        };
        let scale = op.coeff_norm_bound();
        let (energies, states) =
            lanczos_lowest(|v| apply_with_actions(&actions, v), dim, scale, &lopts)?;
        Ok(Spectrum {
            n_qubits: nq,
            dim,
            energies,
            states,
            complete: k == dim,
        })
    }
}

/// Dense hermitian eigendecomposition; eigenvalues nondecreasing, columns
/// of the returned matrix are the matching orthonormal eigenvectors.
fn dense_hermitian_eigen(m: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let n = m.nrows();
    let a = faer::Mat::<Complex64>::from_fn(n, n, |r, c| m[(r, c)]);
    let eig = a.self_adjoint_eigen(faer::Side::Lower).map_err(|e| {
        Error::EigenNonConverged(format!("dense eigendecomposition failed: {e:?}"))
    })?;
    let energies: Vec<f64> = eig
        .S()
        .column_vector()
        .iter()
        .map(|x| x.re)
        .collect();
    let u = eig.U();
    let vectors = DMatrix::from_fn(n, n, |r, c| u[(r, c)]);
    Ok((energies, vectors))
}

/// Eigenvalues only, nondecreasing.
fn dense_hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    let a = faer::Mat::<Complex64>::from_fn(n, n, |r, c| m[(r, c)]);
    a.self_adjoint_eigenvalues(faer::Side::Lower).map_err(|e| {
        Error::EigenNonConverged(format!("dense eigenvalue solve failed: {e:?}"))
    })
}

/// Spectral norm (largest eigenvalue magnitude) of a hermitian operator.
pub fn spectral_norm(op: &SpinOperator, opts: &EigenOptions) -> Result<f64> {
    if !op.is_hermitian(1e-12) {
        return Err(Error::NotHermitian(
            "spectral norm routine requires a hermitian operator".into(),
        ));
    }
    let nq = op.n_qubits();
    if nq <= opts.dense_cap {
        let m = op.to_dense(opts.dense_cap)?;
        return Ok(dense_hermitian_eigenvalues(&m)?
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max));
    }
    if nq > opts.register_cap {
        return Err(Error::RegisterTooLarge {
            qubits: nq,
            cap: opts.register_cap,
        });
    }
    // Both spectral edges via Lanczos; the norm is the larger magnitude.
    let actions = op.actions();
    let scale = op.coeff_norm_bound();
    let lopts = LanczosOptions {
        k: 1,
        tol: opts.tol,
        krylov_cap: 120,
        max_restarts: opts.max_restarts,
        seed: opts.seed,
    };
    let (low, _) = lanczos_lowest(|v| apply_with_actions(&actions, v), op.dim(), scale, &lopts)?;
    let (neg_high, _) = lanczos_lowest(
        |v| -apply_with_actions(&actions, v),
        op.dim(),
        scale,
        &lopts,
    )?;
    Ok(low[0].abs().max(neg_high[0].abs()))
}

/// Matrix elements `<s_i| op |s_j>` over a list of states.
pub fn eigenbasis_matrix(op: &SpinOperator, states: &[DVector<Complex64>]) -> DMatrix<Complex64> {
    let k = states.len();
    let actions = op.actions();
    let mut m = DMatrix::from_element(k, k, Complex64::new(0.0, 0.0));
    for j in 0..k {
        let applied = apply_with_actions(&actions, &states[j]);
        for i in 0..k {
            m[(i, j)] = states[i].dotc(&applied);
        }
    }
    m
}

/// Absolute floor below which a detuning counts as an exact resonance
/// collision.
pub fn resonance_floor(omega: f64) -> f64 {
    1e-12 * omega.abs().max(1.0)
}

/// Spectral detuning for a target space of the lowest `nu` levels:
/// `min_{mu < nu <= eta} min_{sign} | sign * omega + E_mu - E_eta |`.
pub fn detuning(energies: &[f64], omega: f64, nu: usize) -> Result<f64> {
    if nu == 0 || nu >= energies.len() {
        return Err(Error::InvalidParameter(format!(
            "target size {nu} must lie in 1..{}",
            energies.len()
        )));
    }
    let mut best = f64::INFINITY;
    for mu in 0..nu {
        for eta in nu..energies.len() {
            let de = energies[mu] - energies[eta];
            for sign in [-1.0, 1.0] {
                best = best.min((sign * omega + de).abs());
            }
        }
    }
    let floor = resonance_floor(omega);
    if best < floor {
        return Err(Error::ResonanceCollision {
            delta: best,
            tol: floor,
        });
    }
    Ok(best)
}

/// Detuning restricted to transitions the coupling operator actually
/// drives: pairs with `|W_eig[mu, eta]|` below `rel_threshold` times the
/// largest off-diagonal magnitude are ignored. Spectator levels that are
/// exactly decoupled cannot create a fake resonance collision this way.
pub fn detuning_coupled(
    energies: &[f64],
    w_eig: &DMatrix<Complex64>,
    omega: f64,
    nu: usize,
    rel_threshold: f64,
) -> Result<f64> {
    if nu == 0 || nu >= energies.len() {
        return Err(Error::InvalidParameter(format!(
            "target size {nu} must lie in 1..{}",
            energies.len()
        )));
    }
    if w_eig.nrows() < energies.len() || w_eig.ncols() < energies.len() {
        return Err(Error::ShapeMismatch(format!(
            "coupling matrix is {}x{} but {} levels were given",
            w_eig.nrows(),
            w_eig.ncols(),
            energies.len()
        )));
    }
    let mut wmax: f64 = 0.0;
    for i in 0..energies.len() {
        for j in 0..energies.len() {
            if i != j {
                wmax = wmax.max(w_eig[(i, j)].norm());
            }
        }
    }
    if wmax == 0.0 {
        return Err(Error::DegenerateInput(
            "coupling operator has no off-diagonal matrix element".into(),
        ));
    }
    let mut best = f64::INFINITY;
    let mut coupled_pairs = 0usize;
    for mu in 0..nu {
        for eta in nu..energies.len() {
            if w_eig[(mu, eta)].norm() <= rel_threshold * wmax {
                continue;
            }
            coupled_pairs += 1;
            let de = energies[mu] - energies[eta];
            for sign in [-1.0, 1.0] {
                best = best.min((sign * omega + de).abs());
            }
        }
    }
    if coupled_pairs == 0 {
        return Err(Error::DegenerateInput(
            "no driven transition leaves the target space; detuning undefined".into(),
        ));
    }
    let floor = resonance_floor(omega);
    if best < floor {
        return Err(Error::ResonanceCollision {
            delta: best,
            tol: floor,
        });
    }
    Ok(best)
}

/// Rotate each degenerate eigenspace so that the component coupled to
/// `source` through `w` is concentrated on the first member of the block;
/// the remaining members become exactly dark. Keeps the spectrum valid
/// (energies untouched, states orthonormal) and makes target-space
/// selection deterministic when a degenerate multiplet straddles the
/// target boundary.
pub fn align_degenerate_blocks(
    spectrum: &mut Spectrum,
    w: &SpinOperator,
    source: &DVector<Complex64>,
    degeneracy_tol: f64,
) {
    let n = spectrum.energies.len();
    let actions = w.actions();
    let w_source = apply_with_actions(&actions, source);
    let mut block_start = 0;
    while block_start < n {
        let mut block_end = block_start + 1;
        while block_end < n
            && (spectrum.energies[block_end] - spectrum.energies[block_start]).abs()
                <= degeneracy_tol
        {
            block_end += 1;
        }
        let len = block_end - block_start;
        if len > 1 {
            // couplings c_i = <s_i | W | source>
            let c: Vec<Complex64> = (block_start..block_end)
                .map(|i| spectrum.states[i].dotc(&w_source))
                .collect();
            let cnorm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if cnorm > 1e-12 {
                // bright vector b = sum_i c_i s_i / |c|
                let dim = spectrum.states[block_start].len();
                let mut bright = DVector::from_element(dim, Complex64::new(0.0, 0.0));
                for (i, ci) in c.iter().enumerate() {
                    bright.axpy(
                        *ci / Complex64::new(cnorm, 0.0),
                        &spectrum.states[block_start + i],
                        Complex64::new(1.0, 0.0),
                    );
                }
                // Complete the block with pivoted Gram-Schmidt over the old
                // members: always extend with the largest residual, so a
                // member nearly parallel to the bright vector never injects
                // cancellation-amplified roundoff into the new basis.
                let mut new_states = vec![bright];
                let mut candidates: Vec<DVector<Complex64>> =
                    spectrum.states[block_start..block_end].to_vec();
                while new_states.len() < len {
                    let mut best: Option<(usize, f64, DVector<Complex64>)> = None;
                    for (ci, cand) in candidates.iter().enumerate() {
                        let mut v = cand.clone();
                        for b in &new_states {
                            let overlap = b.dotc(&v);
                            v.axpy(-overlap, b, Complex64::new(1.0, 0.0));
                        }
                        let nrm = v.norm();
                        if best.as_ref().is_none_or(|(_, bn, _)| nrm > *bn) {
                            best = Some((ci, nrm, v));
                        }
                    }
                    let Some((ci, nrm, mut v)) = best else { break };
                    if nrm <= 1e-8 {
                        break;
                    }
                    v /= Complex64::new(nrm, 0.0);
                    // second pass clears roundoff surfaced by the division
                    for b in &new_states {
                        let overlap = b.dotc(&v);
                        v.axpy(-overlap, b, Complex64::new(1.0, 0.0));
                    }
                    let nrm2 = v.norm();
                    if nrm2 <= 0.5 {
                        break;
                    }
                    v /= Complex64::new(nrm2, 0.0);
                    candidates.swap_remove(ci);
                    new_states.push(v);
                }
                if new_states.len() == len {
                    for (i, s) in new_states.into_iter().enumerate() {
                        spectrum.states[block_start + i] = s;
                    }
                }
            }
        }
        block_start = block_end;
    }
}
