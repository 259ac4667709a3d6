//! Matrix-product state container: site tensors with physical dimension 2,
//! mixed-canonical gauge bookkeeping, Schmidt spectra per cut, entanglement
//! entropy, truncation weights, and a binary serialization format.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Register cap for dense contraction (`to_statevector`), qubits.
pub const MPS_DENSE_CAP: usize = 22;

/// Sweep direction for canonicalization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Canonical {
    /// All tensors left-isometric, center at the last site.
    Left,
    /// All tensors right-isometric, center at site 0.
    Right,
}

/// Convention for the truncation weight `f(chi)` over a Schmidt spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightConvention {
    /// Sum of discarded reduced-density-matrix eigenvalues (squared Schmidt
    /// values). Default.
    Probability,
    /// Sum of discarded Schmidt values themselves (amplitudes).
    Amplitude,
}

/// One site: `blocks[s]` is the `chi_left x chi_right` matrix for physical
/// basis value `s`.
#[derive(Clone, Debug)]
pub struct SiteTensor {
    pub blocks: [DMatrix<Complex64>; 2],
}

impl SiteTensor {
    pub fn chi_left(&self) -> usize {
        self.blocks[0].nrows()
    }

    pub fn chi_right(&self) -> usize {
        self.blocks[0].ncols()
    }
}

/// Truncation policy for an SVD split.
#[derive(Clone, Copy, Debug)]
pub struct SplitPolicy {
    /// Hard cap on kept singular values; `None` keeps every value above the
    /// relative floor.
    pub chi_max: Option<usize>,
    /// Values below `rel_tol * sigma_0` are dropped.
    pub rel_tol: f64,
}

impl SplitPolicy {
    /// Keeps full numerical rank: only exact-zero-level values are dropped.
    pub fn exact() -> Self {
        SplitPolicy {
            chi_max: None,
            rel_tol: 1e-14,
        }
    }

    pub fn capped(chi_max: usize, rel_tol: f64) -> Self {
        SplitPolicy {
            chi_max: Some(chi_max),
            rel_tol,
        }
    }
}

/// Truncated SVD: `(u, sigma, v_t, discarded)` with `discarded` the dropped
/// probability weight (squared values over total squared).
pub fn svd_split(
    m: DMatrix<Complex64>,
    policy: &SplitPolicy,
) -> Result<(DMatrix<Complex64>, DVector<f64>, DMatrix<Complex64>, f64)> {
    let svd = m.svd(true, true);
    let u = svd.u.ok_or_else(|| {
        Error::EigenNonConverged("svd did not produce left singular vectors".into())
    })?;
    let v_t = svd.v_t.ok_or_else(|| {
        Error::EigenNonConverged("svd did not produce right singular vectors".into())
    })?;
    let sigma = svd.singular_values;
    let total: f64 = sigma.iter().map(|s| s * s).sum();
    let floor = policy.rel_tol * sigma[0].max(0.0);
    let mut keep = sigma.iter().take_while(|&&s| s > floor).count().max(1);
    if let Some(cap) = policy.chi_max {
        keep = keep.min(cap.max(1));
    }
    let kept: f64 = sigma.iter().take(keep).map(|s| s * s).sum();
    let discarded = if total > 0.0 {
        ((total - kept) / total).max(0.0)
    } else {
        0.0
    };
    Ok((
        u.columns(0, keep).into_owned(),
        DVector::from_iterator(keep, sigma.iter().take(keep).copied()),
        v_t.rows(0, keep).into_owned(),
        discarded,
    ))
}

/// Matrix-product state on `n` physical qubits (site i = qubit i, most
/// significant dense-index bit first). Tensors strictly left of `center` are
/// left-isometric, those strictly right of it right-isometric; `schmidt[k]`
/// holds the unit-2-norm Schmidt values at the cut between sites k and k+1.
#[derive(Clone, Debug)]
pub struct Mps {
    sites: Vec<SiteTensor>,
    center: usize,
    schmidt: Vec<DVector<f64>>,
}

impl Mps {
    /// Computational basis product state from explicit bits (0 or 1 per site).
    pub fn product_state(bits: &[u8]) -> Result<Mps> {
        if bits.is_empty() {
            return Err(Error::InvalidParameter("empty product state".into()));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidParameter(
                "product state bits must be 0 or 1".into(),
            ));
        }
        let sites = bits
            .iter()
            .map(|&b| {
                let mut blocks = [
                    DMatrix::from_element(1, 1, Complex64::new(0.0, 0.0)),
                    DMatrix::from_element(1, 1, Complex64::new(0.0, 0.0)),
                ];
                blocks[b as usize][(0, 0)] = Complex64::new(1.0, 0.0);
                SiteTensor { blocks }
            })
            .collect::<Vec<_>>();
        let schmidt = vec![DVector::from_element(1, 1.0); bits.len() - 1];
        Ok(Mps {
            sites,
            center: 0,
            schmidt,
        })
    }

    /// Basis state from a dense index (qubit 0 = most significant bit).
    pub fn basis_state(n_sites: usize, index: u64) -> Result<Mps> {
        if n_sites == 0 || n_sites > 63 {
            return Err(Error::InvalidParameter(format!(
                "basis state needs 1..=63 sites, got {n_sites}"
            )));
        }
        if index >> n_sites != 0 {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for {n_sites} sites"
            )));
        }
        let bits: Vec<u8> = (0..n_sites)
            .map(|i| ((index >> (n_sites - 1 - i)) & 1) as u8)
            .collect();
        Mps::product_state(&bits)
    }

    /// Normalized random MPS with pyramid bond dimensions capped at
    /// `chi_max`, canonicalized to the right. Deterministic in `seed`.
    pub fn random(n_sites: usize, chi_max: usize, seed: u64) -> Result<Mps> {
        if n_sites == 0 || chi_max == 0 {
            return Err(Error::InvalidParameter(
                "random MPS needs n_sites >= 1 and chi_max >= 1".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim_at = |i: usize| -> usize {
            let from_left = 1usize << i.min(40);
            let from_right = 1usize << (n_sites - i).min(40);
            chi_max.min(from_left).min(from_right)
        };
        let sites = (0..n_sites)
            .map(|i| {
                let (dl, dr) = (dim_at(i), dim_at(i + 1));
                let mut blk = || {
                    DMatrix::from_fn(dl, dr, |_, _| {
                        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                    })
                };
                SiteTensor {
                    blocks: [blk(), blk()],
                }
            })
            .collect::<Vec<_>>();
        let mut m = Mps {
            sites,
            center: 0,
            schmidt: vec![DVector::from_element(1, 1.0); n_sites - 1],
        };
        m.canonicalize(Canonical::Right)?;
        m.normalize();
        Ok(m)
    }

    /// Exact (or `chi_max`-truncated) MPS of a dense statevector; returns the
    /// state and the total discarded probability weight. The result is
    /// left-canonical with valid Schmidt tables.
    pub fn from_statevector(
        v: &DVector<Complex64>,
        chi_max: Option<usize>,
    ) -> Result<(Mps, f64)> {
        let len = v.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "statevector length {len} is not a power of two >= 2"
            )));
        }
        let n = len.trailing_zeros() as usize;
        let policy = SplitPolicy {
            chi_max,
            rel_tol: 1e-14,
        };
        let mut sites = Vec::with_capacity(n);
        let mut schmidt = Vec::with_capacity(n - 1);
        let mut discarded_total = 0.0;
        // Carry t: chi_l x 2^(n-i) over the dense suffix index of sites i..n.
        let mut t = DMatrix::from_fn(1, len, |_, c| v[c]);
        for _i in 0..n - 1 {
            let chi_l = t.nrows();
            let half = t.ncols() / 2;
            let m = DMatrix::from_fn(chi_l * 2, half, |row, col| t[(row / 2, (row % 2) * half + col)]);
            let (u, sigma, v_t, disc) = svd_split(m, &policy)?;
            discarded_total += disc;
            let r = sigma.len();
            sites.push(SiteTensor {
                blocks: [
                    DMatrix::from_fn(chi_l, r, |a, k| u[(a * 2, k)]),
                    DMatrix::from_fn(chi_l, r, |a, k| u[(a * 2 + 1, k)]),
                ],
            });
            let norm = sigma.norm();
            schmidt.push(if norm > 0.0 { &sigma / norm } else { sigma.clone() });
            t = DMatrix::from_fn(r, half, |k, col| sigma[k] * v_t[(k, col)]);
        }
        sites.push(SiteTensor {
            blocks: [
                DMatrix::from_fn(t.nrows(), 1, |a, _| t[(a, 0)]),
                DMatrix::from_fn(t.nrows(), 1, |a, _| t[(a, 1)]),
            ],
        });
        Ok((
            Mps {
                sites,
                center: n - 1,
                schmidt,
            },
            discarded_total,
        ))
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn site(&self, i: usize) -> &SiteTensor {
        &self.sites[i]
    }

    /// Bond dimensions, length `n_sites + 1`, 1 at both edges.
    pub fn bond_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.sites.len() + 1);
        dims.push(self.sites[0].chi_left());
        for s in &self.sites {
            dims.push(s.chi_right());
        }
        dims
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Schmidt values (unit 2-norm, descending) at the cut between sites
    /// `cut` and `cut + 1`.
    pub fn schmidt_values(&self, cut: usize) -> &DVector<f64> {
        &self.schmidt[cut]
    }

    pub fn n_cuts(&self) -> usize {
        self.schmidt.len()
    }

    /// `<self|other>` by exact transfer contraction.
    pub fn inner(&self, other: &Mps) -> Result<Complex64> {
        if self.n_sites() != other.n_sites() {
            return Err(Error::ShapeMismatch(format!(
                "inner product between {} and {} sites",
                self.n_sites(),
                other.n_sites()
            )));
        }
        let mut e = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        for (a, b) in self.sites.iter().zip(other.sites.iter()) {
            let mut next = DMatrix::from_element(
                a.chi_right(),
                b.chi_right(),
                Complex64::new(0.0, 0.0),
            );
            for s in 0..2 {
                next += a.blocks[s].adjoint() * &e * &b.blocks[s];
            }
            e = next;
        }
        Ok(e[(0, 0)])
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).map(|z| z.re.max(0.0).sqrt()).unwrap_or(0.0)
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let f = Complex64::new(1.0 / n, 0.0);
            for s in 0..2 {
                self.sites[self.center].blocks[s] *= f;
            }
        }
    }

    /// Dense statevector (qubit 0 = most significant bit). Register capped.
    pub fn to_statevector(&self) -> Result<DVector<Complex64>> {
        let n = self.n_sites();
        if n > MPS_DENSE_CAP {
            return Err(Error::RegisterTooLarge {
                qubits: n,
                cap: MPS_DENSE_CAP,
            });
        }
        // Carry t: 2^i x chi_i over the dense prefix of sites 0..i.
        let mut t = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        for site in &self.sites {
            let rows = t.nrows();
            let mut next = DMatrix::from_element(
                rows * 2,
                site.chi_right(),
                Complex64::new(0.0, 0.0),
            );
            for s in 0..2 {
                let prod = &t * &site.blocks[s];
                for p in 0..rows {
                    for b in 0..site.chi_right() {
                        next[(p * 2 + s, b)] = prod[(p, b)];
                    }
                }
            }
            t = next;
        }
        Ok(DVector::from_fn(t.nrows(), |r, _| t[(r, 0)]))
    }

    /// Left-split site `i`: make it left-isometric, absorb `sigma v_t` into
    /// site `i+1`, and refresh the Schmidt table at cut `i`. Returns the
    /// discarded probability weight.
    fn split_left(&mut self, i: usize, policy: &SplitPolicy) -> Result<f64> {
        let (chi_l, chi_r) = (self.sites[i].chi_left(), self.sites[i].chi_right());
        let m = DMatrix::from_fn(chi_l * 2, chi_r, |row, b| {
            self.sites[i].blocks[row % 2][(row / 2, b)]
        });
        let (u, sigma, v_t, disc) = svd_split(m, policy)?;
        let r = sigma.len();
        self.sites[i] = SiteTensor {
            blocks: [
                DMatrix::from_fn(chi_l, r, |a, k| u[(a * 2, k)]),
                DMatrix::from_fn(chi_l, r, |a, k| u[(a * 2 + 1, k)]),
            ],
        };
        let norm = sigma.norm();
        self.schmidt[i] = if norm > 0.0 { &sigma / norm } else { sigma.clone() };
        let carry = DMatrix::from_fn(r, chi_r, |k, b| sigma[k] * v_t[(k, b)]);
        for s in 0..2 {
            self.sites[i + 1].blocks[s] = &carry * &self.sites[i + 1].blocks[s];
        }
        Ok(disc)
    }

    /// Right-split site `i`: make it right-isometric, absorb `u sigma` into
    /// site `i-1`, and refresh the Schmidt table at cut `i-1`. Returns the
    /// discarded probability weight.
    fn split_right(&mut self, i: usize, policy: &SplitPolicy) -> Result<f64> {
        let (chi_l, chi_r) = (self.sites[i].chi_left(), self.sites[i].chi_right());
        let m = DMatrix::from_fn(chi_l, 2 * chi_r, |a, col| {
            self.sites[i].blocks[col / chi_r][(a, col % chi_r)]
        });
        let (u, sigma, v_t, disc) = svd_split(m, policy)?;
        let r = sigma.len();
        self.sites[i] = SiteTensor {
            blocks: [
                DMatrix::from_fn(r, chi_r, |k, b| v_t[(k, b)]),
                DMatrix::from_fn(r, chi_r, |k, b| v_t[(k, chi_r + b)]),
            ],
        };
        let norm = sigma.norm();
        self.schmidt[i - 1] = if norm > 0.0 { &sigma / norm } else { sigma.clone() };
        let carry = DMatrix::from_fn(chi_l, r, |a, k| u[(a, k)] * sigma[k]);
        for s in 0..2 {
            self.sites[i - 1].blocks[s] = &self.sites[i - 1].blocks[s] * &carry;
        }
        Ok(disc)
    }

    /// Full canonicalization. Preserves the state (exact-rank splits) and
    /// refreshes every Schmidt table; center lands at site 0 (`Right`) or the
    /// last site (`Left`).
    pub fn canonicalize(&mut self, direction: Canonical) -> Result<()> {
        let n = self.n_sites();
        let policy = SplitPolicy::exact();
        // Gauge pass: right-isometrize everything (Schmidt tables recorded
        // here are provisional; the next pass makes them exact).
        for i in (1..n).rev() {
            self.split_right(i, &policy)?;
        }
        self.center = 0;
        if n == 1 {
            return Ok(());
        }
        // Mixed-canonical sweep: left side is now isometric at each step, so
        // the recorded singular values are the true Schmidt values.
        for i in 0..n - 1 {
            self.split_left(i, &policy)?;
        }
        self.center = n - 1;
        if direction == Canonical::Right {
            for i in (1..n).rev() {
                self.split_right(i, &policy)?;
            }
            self.center = 0;
        }
        Ok(())
    }

    /// Move the orthogonality center to `pos` with exact-rank splits.
    pub fn move_center_to(&mut self, pos: usize) -> Result<()> {
        if pos >= self.n_sites() {
            return Err(Error::InvalidParameter(format!(
                "center {pos} out of range for {} sites",
                self.n_sites()
            )));
        }
        let policy = SplitPolicy::exact();
        while self.center < pos {
            self.split_left(self.center, &policy)?;
            self.center += 1;
        }
        while self.center > pos {
            self.split_right(self.center, &policy)?;
            self.center -= 1;
        }
        Ok(())
    }

    /// Truncate every bond to `chi_max`, recanonicalize, and return the total
    /// discarded probability weight. Renormalizes the state.
    pub fn truncate(&mut self, chi_max: usize) -> Result<f64> {
        if chi_max == 0 {
            return Err(Error::InvalidParameter("chi_max must be >= 1".into()));
        }
        self.canonicalize(Canonical::Right)?;
        let policy = SplitPolicy::capped(chi_max, 1e-14);
        let n = self.n_sites();
        let mut discarded = 0.0;
        for i in 0..n - 1 {
            discarded += self.split_left(i, &policy)?;
        }
        self.center = n - 1;
        self.normalize();
        // Second pass refreshes Schmidt tables of the truncated state.
        for i in (1..n).rev() {
            self.split_right(i, &SplitPolicy::exact())?;
        }
        self.center = 0;
        Ok(discarded)
    }

    /// Von Neumann entropy (natural log) of the Schmidt squares at `cut`.
    pub fn entropy_at(&self, cut: usize) -> f64 {
        let sv = &self.schmidt[cut];
        -sv.iter()
            .map(|&s| s * s)
            .filter(|&p| p > 1e-300)
            .map(|p| p * p.ln())
            .sum::<f64>()
    }

    /// Entropy at the middle cut (between the two half-registers).
    pub fn half_chain_entropy(&self) -> f64 {
        if self.schmidt.is_empty() {
            return 0.0;
        }
        self.entropy_at((self.n_sites() - 1) / 2)
    }

    /// Worst isometry residual over the canonical sides of the center:
    /// `max |sum_s A[s]^dag A[s] - I|` left of it, `max |sum_s B[s] B[s]^dag - I|`
    /// right of it.
    pub fn canonical_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, site) in self.sites.iter().enumerate() {
            if i == self.center {
                continue;
            }
            let g = if i < self.center {
                let d = site.chi_right();
                let mut g = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
                for s in 0..2 {
                    g += site.blocks[s].adjoint() * &site.blocks[s];
                }
                g
            } else {
                let d = site.chi_left();
                let mut g = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
                for s in 0..2 {
                    g += &site.blocks[s] * site.blocks[s].adjoint();
                }
                g
            };
            let d = g.nrows();
            for r in 0..d {
                for c in 0..d {
                    let expect = if r == c { 1.0 } else { 0.0 };
                    worst = worst.max((g[(r, c)] - Complex64::new(expect, 0.0)).norm());
                }
            }
        }
        worst
    }

    /// Replace the tensors at sites `i` and `i+1` and the Schmidt table at
    /// cut `i`; the caller asserts the gauge implied by `center`.
    pub(crate) fn set_pair(
        &mut self,
        i: usize,
        left: SiteTensor,
        right: SiteTensor,
        schmidt: DVector<f64>,
        center: usize,
    ) {
        self.sites[i] = left;
        self.sites[i + 1] = right;
        self.schmidt[i] = schmidt;
        self.center = center;
    }

    /// Binary container: magic, dims, row-major complex tensor payloads,
    /// Schmidt tables. Little-endian f64/u64 throughout.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(b"GNMPS01\n")?;
        w.write_all(&(self.n_sites() as u64).to_le_bytes())?;
        w.write_all(&(self.center as u64).to_le_bytes())?;
        for site in &self.sites {
            w.write_all(&(site.chi_left() as u64).to_le_bytes())?;
            w.write_all(&(site.chi_right() as u64).to_le_bytes())?;
            for s in 0..2 {
                for a in 0..site.chi_left() {
                    for b in 0..site.chi_right() {
                        let z = site.blocks[s][(a, b)];
                        w.write_all(&z.re.to_le_bytes())?;
                        w.write_all(&z.im.to_le_bytes())?;
                    }
                }
            }
        }
        w.write_all(&(self.schmidt.len() as u64).to_le_bytes())?;
        for sv in &self.schmidt {
            w.write_all(&(sv.len() as u64).to_le_bytes())?;
            for v in sv.iter() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Mps> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != b"GNMPS01\n" {
            return Err(Error::InvalidParameter(
                "not an MPS container (bad magic)".into(),
            ));
        }
        let n = read_u64(r)? as usize;
        let center = read_u64(r)? as usize;
        if n == 0 || n > 4096 || center >= n {
            return Err(Error::InvalidParameter(format!(
                "malformed MPS header: {n} sites, center {center}"
            )));
        }
        let mut sites = Vec::with_capacity(n);
        for i in 0..n {
            let dl = read_u64(r)? as usize;
            let dr = read_u64(r)? as usize;
            if dl == 0 || dr == 0 || dl > 1 << 20 || dr > 1 << 20 {
                return Err(Error::InvalidParameter(format!(
                    "malformed bond dims {dl}x{dr} at site {i}"
                )));
            }
            let mut blocks = Vec::with_capacity(2);
            for _s in 0..2 {
                let mut m = DMatrix::from_element(dl, dr, Complex64::new(0.0, 0.0));
                for a in 0..dl {
                    for b in 0..dr {
                        let re = read_f64(r)?;
                        let im = read_f64(r)?;
                        m[(a, b)] = Complex64::new(re, im);
                    }
                }
                blocks.push(m);
            }
            let b1 = blocks.pop().unwrap();
            let b0 = blocks.pop().unwrap();
            sites.push(SiteTensor { blocks: [b0, b1] });
        }
        if sites[0].chi_left() != 1 || sites[n - 1].chi_right() != 1 {
            return Err(Error::InvalidParameter("edge bond dims must be 1".into()));
        }
        for i in 0..n - 1 {
            if sites[i].chi_right() != sites[i + 1].chi_left() {
                return Err(Error::InvalidParameter(format!(
                    "bond mismatch between sites {i} and {}",
                    i + 1
                )));
            }
        }
        let n_cuts = read_u64(r)? as usize;
        if n_cuts != n - 1 {
            return Err(Error::InvalidParameter(format!(
                "expected {} Schmidt tables, found {n_cuts}",
                n - 1
            )));
        }
        let mut schmidt = Vec::with_capacity(n_cuts);
        for _ in 0..n_cuts {
            let len = read_u64(r)? as usize;
            if len == 0 || len > 1 << 20 {
                return Err(Error::InvalidParameter(
                    "malformed Schmidt table length".into(),
                ));
            }
            let mut vals = DVector::from_element(len, 0.0);
            for k in 0..len {
                vals[k] = read_f64(r)?;
            }
            schmidt.push(vals);
        }
        Ok(Mps {
            sites,
            center,
            schmidt,
        })
    }
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

/// Truncation weight `f(chi)` at the middle cut under the given convention:
/// the summed weight of Schmidt data beyond rank `chi`.
pub fn truncation_weight_with(m: &Mps, chi: usize, convention: WeightConvention) -> f64 {
    if m.n_cuts() == 0 {
        return 0.0;
    }
    truncation_weight_at(m, (m.n_sites() - 1) / 2, chi, convention)
}

/// Truncation weight at an explicit cut.
pub fn truncation_weight_at(
    m: &Mps,
    cut: usize,
    chi: usize,
    convention: WeightConvention,
) -> f64 {
    let sv = m.schmidt_values(cut);
    sv.iter()
        .skip(chi)
        .map(|&s| match convention {
            WeightConvention::Probability => s * s,
            WeightConvention::Amplitude => s,
        })
        .sum()
}

/// Truncation weight at the middle cut under the default convention
/// (discarded reduced-density-matrix eigenvalues).
pub fn truncation_weight(m: &Mps, chi: usize) -> f64 {
    truncation_weight_with(m, chi, WeightConvention::Probability)
}

/// Half-chain von Neumann entropy of the state.
pub fn half_chain_entropy(m: &Mps) -> f64 {
    m.half_chain_entropy()
}
