//! Shared oracles for integration tests. Everything here is computed from
//! closed-form expressions, independent of the operator-algebra, mapping,
//! and eigensolver code paths under test.

#![allow(dead_code)]

use gnprep::lattice::LatticeConfig;

/// Single-particle energy of the free lattice theory at momentum `p`,
/// evaluated straight from the dispersion relation:
/// `E(p)^2 = (sin(pa)/a)^2 + (m0 + (2r/a) sin^2(pa/2))^2`.
pub fn oracle_dispersion(p: f64, mass: f64, wilson: f64, spacing: f64) -> f64 {
    let sk = (p * spacing).sin() / spacing;
    let half = (0.5 * p * spacing).sin();
    let mp = mass + 2.0 * wilson / spacing * half * half;
    (sk * sk + mp * mp).sqrt()
}

/// Momentum grid `p_k = 2 pi k / (n a)`.
pub fn oracle_momenta(n_sites: u32, spacing: f64) -> Vec<f64> {
    let l = n_sites as f64 * spacing;
    (0..n_sites)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / l)
        .collect()
}

/// Full many-body spectrum of the free theory, as a sorted multiset.
///
/// Each (momentum, species) block carries one particle and one antiparticle
/// mode at energy `E(p_k)`, so it contributes the multiset
/// `{-E, 0, 0, +E}` to the direct sum. The result has `4^(n N)` entries,
/// the full register dimension.
pub fn oracle_free_spectrum(cfg: &LatticeConfig) -> Vec<f64> {
    let mut spectrum = vec![0.0_f64];
    for p in oracle_momenta(cfg.n_sites, cfg.spacing) {
        let e = oracle_dispersion(p, cfg.mass, cfg.wilson, cfg.spacing);
        for _ in 0..cfg.n_species {
            let mut next = Vec::with_capacity(spectrum.len() * 4);
            for &base in &spectrum {
                next.push(base - e);
                next.push(base);
                next.push(base);
                next.push(base + e);
            }
            spectrum = next;
        }
    }
    spectrum.sort_by(f64::total_cmp);
    spectrum
}

/// Lowest `k` values of the free many-body spectrum without enumerating all
/// `4^(n N)` of them: every level is the filled sea plus a subset of
/// single-mode excitations of energies `E(p_k)` (each appearing twice per
/// species: particle and antiparticle).
pub fn oracle_free_lowest(cfg: &LatticeConfig, k: usize) -> Vec<f64> {
    let ground: f64 = oracle_momenta(cfg.n_sites, cfg.spacing)
        .iter()
        .map(|&p| -oracle_dispersion(p, cfg.mass, cfg.wilson, cfg.spacing))
        .sum::<f64>()
        * cfg.n_species as f64;
    // excitation energies, two per (momentum, species)
    let mut quanta: Vec<f64> = Vec::new();
    for p in oracle_momenta(cfg.n_sites, cfg.spacing) {
        let e = oracle_dispersion(p, cfg.mass, cfg.wilson, cfg.spacing);
        for _ in 0..cfg.n_species {
            quanta.push(e);
            quanta.push(e);
        }
    }
    quanta.sort_by(f64::total_cmp);
    // Smallest-first enumeration of subset sums: state (sum, i) is a subset
    // whose largest chosen quantum is index i; children extend with i+1 or
    // swap i for i+1. Every nonempty subset appears exactly once.
    #[derive(PartialEq)]
    struct Key(f64, usize);
    impl Eq for Key {}
    impl PartialOrd for Key {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Key {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
        }
    }
    let mut out = Vec::with_capacity(k);
    out.push(ground);
    let mut pq = std::collections::BinaryHeap::new();
    if let Some(&q0) = quanta.first() {
        pq.push(std::cmp::Reverse(Key(q0, 0)));
    }
    while out.len() < k {
        let std::cmp::Reverse(Key(sum, i)) = match pq.pop() {
            Some(x) => x,
            None => break,
        };
        out.push(ground + sum);
        if i + 1 < quanta.len() {
            pq.push(std::cmp::Reverse(Key(sum + quanta[i + 1], i + 1)));
            pq.push(std::cmp::Reverse(Key(sum - quanta[i] + quanta[i + 1], i + 1)));
        }
    }
    out
}

/// Element-wise closeness of two sorted spectra under a relative tolerance.
pub fn spectra_close(got: &[f64], want: &[f64], rel_tol: f64) -> Result<(), String> {
    if got.len() != want.len() {
        return Err(format!(
            "spectrum sizes differ: {} vs {}",
            got.len(),
            want.len()
        ));
    }
    let scale = want
        .iter()
        .map(|v| v.abs())
        .fold(1.0_f64, f64::max);
    for (i, (g, w)) in got.iter().zip(want).enumerate() {
        if (g - w).abs() > rel_tol * scale {
            return Err(format!(
                "level {i}: {g:.12e} vs {w:.12e} (scale {scale:.3e})"
            ));
        }
    }
    Ok(())
}
