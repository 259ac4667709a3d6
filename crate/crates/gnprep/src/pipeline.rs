//! Shared run stages behind the subcommands, CSV rendering, and the
//! end-to-end pipeline with its summary report.
//!
//! Every stage is a pure function of the run configuration; the pipeline
//! chains them, tags failures with the stage name, and leaves a STATUS file
//! in the bundle directory that reads `ok` only after a complete run.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::circuit::{compile_fidelity, compile_mps};
use crate::config::{Backend, RunConfig};
use crate::error::{Error, Result};
use crate::exact::{
    detuning_coupled, eigensolve, evolve_driven, spectral_norm, DriveProtocol, EigenOptions,
    OdeOptions, Spectrum,
};
use crate::jw::{jw_map, map_hamiltonian, MappedHamiltonian, QubitOrdering};
use crate::lattice::{build_drive_operator, build_hamiltonian, GammaConvention, LatticeConfig};
use crate::manifest::RunManifest;
use crate::mps::{
    dmrg_ground_state, entropy_scaling_check, truncation_weight, DmrgOptions, DmrgResult,
    EntropyFit, Mps, ScalingModel, MPS_DENSE_CAP,
};
use crate::operators::{FermionOperator, SpinOperator};
use crate::rabi::{
    diagonal_free_normalized, driven_eigenbasis_evolution, excite_wavepacket, few_level_run,
    floquet_solution, floquet_state, resolve_driven_spectrum, theorem2_bound, ExcitationReport,
    ExciteOptions, LambdaSpec, COUPLING_THRESHOLD,
};

/// Wraps a stage so failures carry the stage name.
pub fn stage<T>(name: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    f().map_err(|source| Error::Stage {
        stage: name,
        source: Box::new(source),
    })
}

/// Eigensolver options derived from the run configuration.
pub fn eigen_options(cfg: &RunConfig) -> EigenOptions {
    EigenOptions {
        register_cap: cfg.solver.qubit_cap,
        seed: cfg.solver.seed,
        ..EigenOptions::default()
    }
}

/// Variational options derived from the run configuration.
pub fn dmrg_options(cfg: &RunConfig) -> DmrgOptions {
    DmrgOptions {
        chi_max: cfg.solver.chi_max,
        max_sweeps: cfg.solver.max_sweeps,
        tol: cfg.solver.tol,
        seed: cfg.solver.seed,
        ..DmrgOptions::default()
    }
}

/// Builds the fermionic Hamiltonian of the configured model.
pub fn fermion_hamiltonian(cfg: &RunConfig) -> Result<FermionOperator> {
    build_hamiltonian(&cfg.lattice, &GammaConvention::default())
}

/// Builds and maps the configured Hamiltonian to qubits.
pub fn mapped_hamiltonian(cfg: &RunConfig) -> Result<MappedHamiltonian> {
    map_hamiltonian(
        &fermion_hamiltonian(cfg)?,
        cfg.lattice.spacing,
        QubitOrdering::SpeciesMajor,
    )
}

/// Maps the configured drive to qubits and rescales it to unit spectral
/// norm; returns the operator and the norm stripped off.
pub fn unit_drive_operator(cfg: &RunConfig) -> Result<(SpinOperator, f64)> {
    let raw = jw_map(
        &build_drive_operator(&cfg.lattice, &cfg.drive_or_default())?,
        cfg.lattice.spacing,
        QubitOrdering::SpeciesMajor,
    )?;
    let norm = spectral_norm(&raw, &eigen_options(cfg))?;
    if norm < 1e-14 {
        return Err(Error::DegenerateInput(
            "drive operator vanishes on this lattice".into(),
        ));
    }
    Ok((raw.scale(Complex64::new(1.0 / norm, 0.0)), norm))
}

/// How the vacuum was obtained.
pub enum GroundSolve {
    Exact { spectrum: Spectrum },
    Dmrg { result: DmrgResult },
}

/// Finds the vacuum with the configured backend; returns it as a state
/// train together with its energy.
pub fn solve_ground(cfg: &RunConfig, mapped: &MappedHamiltonian) -> Result<(Mps, f64, GroundSolve)> {
    match cfg.solver.backend {
        Backend::Exact => {
            let spectrum = eigensolve(&mapped.op, &eigen_options(cfg))?;
            let energy = spectrum.ground_energy();
            let (mps, _) = Mps::from_statevector(&spectrum.states[0], None)?;
            Ok((mps, energy, GroundSolve::Exact { spectrum }))
        }
        Backend::Mps => {
            let result = dmrg_ground_state(&mapped.op, &dmrg_options(cfg))?;
            Ok((result.mps.clone(), result.energy, GroundSolve::Dmrg { result }))
        }
    }
}

/// One row of the bound-sweep CSVs.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundsRow {
    pub lambda: f64,
    pub omega: f64,
    pub delta: f64,
    pub nu: usize,
    pub overlap: f64,
    pub bound: f64,
}

impl BoundsRow {
    pub fn margin(&self) -> f64 {
        self.overlap - self.bound
    }
}

/// One row of the entropy and bond-dimension CSV.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScalingRow {
    pub ma: f64,
    pub s: f64,
    pub chi_pred: usize,
    pub chi_used: usize,
    pub energy: f64,
    pub f_chi: f64,
}

/// Closed-form versus integrated two-level state, one drive ratio.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FloquetDeviation {
    pub ratio: f64,
    /// Worst state infidelity `1 - |<exact|closed form>|` over the pulse.
    pub deviation: f64,
}

/// Sampled driven evolution with eigenlevel overlaps.
pub struct EvolveTable {
    pub times: Vec<f64>,
    /// `overlaps[k][j]` is the probability in eigenlevel `j` at time `k`.
    pub overlaps: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
    pub levels: usize,
    pub norm_drift: f64,
}

/// Projected-versus-full leakage sweep on the configured lattice, one row
/// per drive strength at `t = pi / lambda`.
pub fn theorem1_rows(cfg: &RunConfig) -> Result<Vec<BoundsRow>> {
    let mapped = mapped_hamiltonian(cfg)?;
    let (w_spin, _) = unit_drive_operator(cfg)?;
    let eig = eigen_options(cfg);
    let (spectrum, w_eig) = resolve_driven_spectrum(&mapped.op, &w_spin, &eig)?;
    let nu = cfg.excite.nu;
    let dim = spectrum.energies.len();
    if nu >= dim {
        return Err(Error::InvalidParameter(format!(
            "retained level count {nu} must lie in 1..{dim}"
        )));
    }
    let omega = match cfg.excite.omega {
        Some(w) => w,
        None => spectrum.transition(0, 1),
    };
    let (w_clean, _) = diagonal_free_normalized(&w_eig)?;
    let delta = detuning_coupled(&spectrum.energies, &w_clean, omega, nu, COUPLING_THRESHOLD)?;
    let lambdas = resolve_lambdas(cfg, delta);
    let mut rows = Vec::with_capacity(lambdas.len());
    for lambda in lambdas {
        let t = std::f64::consts::PI / lambda;
        let runs = few_level_run(
            &spectrum.energies,
            &w_eig,
            lambda,
            omega,
            nu,
            &[t],
            &OdeOptions::default(),
        )?;
        let run = &runs[0];
        rows.push(BoundsRow {
            lambda,
            omega,
            delta: run.delta,
            nu,
            overlap: run.overlap,
            bound: run.bound,
        });
    }
    Ok(rows)
}

fn resolve_lambdas(cfg: &RunConfig, delta: f64) -> Vec<f64> {
    if cfg.excite.lambda.is_empty() {
        cfg.excite
            .lambda_fractions
            .iter()
            .map(|f| f * delta)
            .collect()
    } else {
        cfg.excite.lambda.clone()
    }
}

/// Integrated two-level pi pulses at resonance, one row per configured
/// `lambda / omega` ratio.  The `delta` column records the level splitting;
/// `overlap` is the excited amplitude `|<1|psi(pi/lambda)>|`.
pub fn theorem2_rows(cfg: &RunConfig) -> Result<Vec<BoundsRow>> {
    let omega = cfg.excite.omega.unwrap_or(1.0);
    let mut rows = Vec::with_capacity(cfg.excite.ratios.len());
    for &ratio in &cfg.excite.ratios {
        let lambda = ratio * omega;
        let t = std::f64::consts::PI / lambda;
        let psi = two_level_ode(lambda, omega, &[t])?;
        rows.push(BoundsRow {
            lambda,
            omega,
            delta: omega,
            nu: 2,
            overlap: psi[0][1].norm(),
            bound: 1.0 - theorem2_bound(lambda, omega)?,
        });
    }
    Ok(rows)
}

/// Exact two-level states under `H(t) = -(omega/2) Z + lambda cos(omega t) X`
/// from the lower level, at the requested times.
pub fn two_level_ode(lambda: f64, omega: f64, samples: &[f64]) -> Result<Vec<DVector<Complex64>>> {
    let energies = [-0.5 * omega, 0.5 * omega];
    let w = DMatrix::from_fn(2, 2, |r, c| {
        if r == c {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        }
    });
    let mut psi0 = DVector::from_element(2, Complex64::new(0.0, 0.0));
    psi0[0] = Complex64::new(1.0, 0.0);
    driven_eigenbasis_evolution(
        &energies,
        &w,
        lambda,
        omega,
        &psi0,
        samples,
        &OdeOptions::default(),
    )
}

/// Closed-form two-level pulses: one row per ratio with the closed form's
/// excited amplitude, plus its worst infidelity against the integrated
/// state across the pulse.
pub fn floquet_rows(cfg: &RunConfig) -> Result<(Vec<BoundsRow>, Vec<FloquetDeviation>)> {
    let omega = cfg.excite.omega.unwrap_or(1.0);
    let mut rows = Vec::with_capacity(cfg.excite.ratios.len());
    let mut deviations = Vec::with_capacity(cfg.excite.ratios.len());
    for &ratio in &cfg.excite.ratios {
        let lambda = ratio * omega;
        let sol = floquet_solution(lambda, omega)?;
        let t_final = std::f64::consts::PI / lambda;
        let grid: Vec<f64> = (1..=24).map(|k| t_final * k as f64 / 24.0).collect();
        let exact = two_level_ode(lambda, omega, &grid)?;
        let mut worst = 0.0_f64;
        for (state, &t) in exact.iter().zip(&grid) {
            let approx = floquet_state(&sol, t);
            let inner = state[0].conj() * approx[0] + state[1].conj() * approx[1];
            worst = worst.max(1.0 - inner.norm());
        }
        deviations.push(FloquetDeviation {
            ratio,
            deviation: worst,
        });
        rows.push(BoundsRow {
            lambda,
            omega,
            delta: omega,
            nu: 2,
            overlap: floquet_state(&sol, t_final)[1].norm(),
            bound: 1.0 - theorem2_bound(lambda, omega)?,
        });
    }
    Ok((rows, deviations))
}

/// End-to-end excitation sweep, one report per drive strength.
pub fn rabi_reports(cfg: &RunConfig) -> Result<Vec<ExcitationReport>> {
    let drive = cfg.drive_or_default();
    let specs: Vec<LambdaSpec> = if cfg.excite.lambda.is_empty() {
        cfg.excite
            .lambda_fractions
            .iter()
            .map(|&f| LambdaSpec::DetuningFraction(f))
            .collect()
    } else {
        cfg.excite
            .lambda
            .iter()
            .map(|&l| LambdaSpec::Absolute(l))
            .collect()
    };
    let mut reports = Vec::with_capacity(specs.len());
    for spec in specs {
        let opts = ExciteOptions {
            lambda: spec,
            omega: cfg.excite.omega,
            nu: cfg.excite.nu,
            window: cfg.excite.window,
            eigen: eigen_options(cfg),
            ..ExciteOptions::default()
        };
        reports.push(excite_wavepacket(
            &cfg.lattice,
            &GammaConvention::default(),
            &drive,
            &opts,
        )?);
    }
    Ok(reports)
}

/// The bound-sweep row of one excitation report: measured window
/// probability against the composed floor.
pub fn excitation_row(r: &ExcitationReport) -> BoundsRow {
    BoundsRow {
        lambda: r.lambda,
        omega: r.omega,
        delta: r.delta,
        nu: r.nu,
        overlap: r.p_measured,
        bound: r.composed.bound,
    }
}

/// Free-theory vacuum study over the configured mass grid at fixed
/// `n_sites * m * a`: measured half-chain entropy, predicted and realized
/// bond dimensions, energy, and the discarded weight at the predicted rank.
pub fn scaling_rows(cfg: &RunConfig) -> Result<(Vec<ScalingRow>, EntropyFit)> {
    let section = cfg.scaling.clone().unwrap_or_default();
    let mut rows = Vec::with_capacity(section.ma_grid.len());
    for &ma in &section.ma_grid {
        let n_sites = (section.site_mass / ma).round().max(2.0) as u32;
        let lattice = LatticeConfig {
            n_sites,
            n_species: cfg.lattice.n_species,
            spacing: 1.0,
            mass: ma,
            coupling: 0.0,
            wilson: cfg.lattice.wilson,
        };
        let mapped = map_hamiltonian(
            &build_hamiltonian(&lattice, &GammaConvention::default())?,
            lattice.spacing,
            QubitOrdering::SpeciesMajor,
        )?;
        let result = dmrg_ground_state(&mapped.op, &dmrg_options(cfg))?;
        let model = ScalingModel::new(cfg.lattice.n_species, ma, section.eps)?;
        let chi_pred = model.predict_chi();
        rows.push(ScalingRow {
            ma,
            s: result.mps.half_chain_entropy(),
            chi_pred,
            chi_used: result.mps.max_bond(),
            energy: result.energy,
            f_chi: truncation_weight(&result.mps, chi_pred),
        });
    }
    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.ma, r.s)).collect();
    let fit = entropy_scaling_check(&pairs)?;
    Ok((rows, fit))
}

/// Driven (or free) evolution of the exact vacuum with eigenlevel overlaps.
pub fn evolve_table(cfg: &RunConfig) -> Result<EvolveTable> {
    let mapped = mapped_hamiltonian(cfg)?;
    let spectrum = eigensolve(&mapped.op, &eigen_options(cfg))?;
    let levels = cfg.evolve.levels.min(spectrum.states.len());
    let psi0 = spectrum.states[0].clone();
    let drive = match &cfg.drive {
        Some(_) => {
            let (w, _) = unit_drive_operator(cfg)?;
            let omega = cfg.excite.omega.unwrap_or_else(|| spectrum.transition(0, 1));
            let lambda = cfg
                .excite
                .lambda
                .first()
                .copied()
                .unwrap_or(0.05 * omega);
            Some((w, DriveProtocol { lambda, omega }))
        }
        None => None,
    };
    let t_final = cfg.evolve.t_final.unwrap_or(match &drive {
        Some((_, p)) => std::f64::consts::PI / p.lambda,
        None => 10.0,
    });
    let result = evolve_driven(
        &mapped.op,
        drive.as_ref().map(|(w, p)| (w, *p)),
        &psi0,
        t_final,
        cfg.evolve.samples,
        &OdeOptions::default(),
    )?;
    let mut overlaps = Vec::with_capacity(result.states.len());
    let mut norms = Vec::with_capacity(result.states.len());
    for state in &result.states {
        norms.push(state.norm());
        overlaps.push(
            (0..levels)
                .map(|j| spectrum.states[j].dotc(state).norm_sqr())
                .collect(),
        );
    }
    Ok(EvolveTable {
        times: result.times,
        overlaps,
        norms,
        levels,
        norm_drift: result.norm_drift,
    })
}

// ---------------------------------------------------------------------------
// text renderings

/// Header plus one line per fermionic term.
pub fn dump_fermion_terms(h: &FermionOperator) -> String {
    let mut out = String::from(
        "# coeff_re coeff_im spacing_power factors; c=create a=annihilate, mode=(site,species,spinor)\n",
    );
    for t in h.terms() {
        let _ = write!(out, "{} {} {}", t.coeff.re, t.coeff.im, t.apow);
        for f in &t.factors {
            let _ = write!(
                out,
                " {}({},{},{})",
                if f.create { 'c' } else { 'a' },
                f.mode.site,
                f.mode.species,
                f.mode.spinor
            );
        }
        out.push('\n');
    }
    out
}

/// Header plus `weight re im letters` per Pauli string.
pub fn dump_pauli_strings(op: &SpinOperator) -> String {
    let mut out = String::from("# weight coeff_re coeff_im letters\n");
    for t in op.terms() {
        let _ = writeln!(out, "{} {} {} {}", t.weight(), t.coeff.re, t.coeff.im, t.label());
    }
    out
}

fn fmt_f(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else {
        format!("{x}")
    }
}

/// CSV of a resolved spectrum.
pub fn spectrum_csv(energies: &[f64]) -> String {
    let mut out = String::from("index (count),energy (natural units)\n");
    for (i, e) in energies.iter().enumerate() {
        let _ = writeln!(out, "{i},{}", fmt_f(*e));
    }
    out
}

/// CSV of per-sweep variational energies.
pub fn dmrg_csv(sweep_energies: &[f64]) -> String {
    let mut out = String::from("sweep (count),energy (natural units)\n");
    for (i, e) in sweep_energies.iter().enumerate() {
        let _ = writeln!(out, "{},{}", i + 1, fmt_f(*e));
    }
    out
}

/// Shared header of the bound-sweep CSVs.
pub const BOUNDS_CSV_HEADER: &str = "lambda (natural units),omega (natural units),delta (natural units),nu (count),overlap (dimensionless),bound (dimensionless),margin (dimensionless)";

/// CSV of bound-sweep rows.
pub fn bounds_csv(rows: &[BoundsRow]) -> String {
    let mut out = String::from(BOUNDS_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f(r.lambda),
            fmt_f(r.omega),
            fmt_f(r.delta),
            r.nu,
            fmt_f(r.overlap),
            fmt_f(r.bound),
            fmt_f(r.margin())
        );
    }
    out
}

/// CSV of the entropy and bond-dimension study.
pub fn scaling_csv(rows: &[ScalingRow]) -> String {
    let mut out = String::from(
        "ma (dimensionless),S (nats),chi_pred (count),chi_used (count),energy (natural units),f_chi (dimensionless)\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f(r.ma),
            fmt_f(r.s),
            r.chi_pred,
            r.chi_used,
            fmt_f(r.energy),
            fmt_f(r.f_chi)
        );
    }
    out
}

/// CSV of the sampled evolution: time, one overlap column per tabulated
/// eigenlevel, and the state norm.
pub fn evolve_csv(table: &EvolveTable) -> String {
    let mut out = String::from("t (natural units)");
    for j in 0..table.levels {
        let _ = write!(out, ",overlap{j} (dimensionless)");
    }
    out.push_str(",norm (dimensionless)\n");
    for (k, &t) in table.times.iter().enumerate() {
        let _ = write!(out, "{}", fmt_f(t));
        for j in 0..table.levels {
            let _ = write!(out, ",{}", fmt_f(table.overlaps[k][j]));
        }
        let _ = writeln!(out, ",{}", fmt_f(table.norms[k]));
    }
    out
}

// ---------------------------------------------------------------------------
// the pipeline

/// Scalar results the pipeline accumulates for the report.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PipelineSummary {
    pub backend: String,
    pub n_qubits: usize,
    pub stages: Vec<String>,
    pub ground_energy: Option<f64>,
    pub compile_fidelity: Option<f64>,
    pub two_level_units: Option<usize>,
    pub max_window: Option<usize>,
    pub min_margin_few_level: Option<f64>,
    pub min_margin_pulse: Option<f64>,
    pub min_margin_excite: Option<f64>,
    pub entropy_slope: Option<f64>,
    pub entropy_rms: Option<f64>,
}

/// A finished output bundle.
#[derive(Debug)]
pub struct ArtifactBundle {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub summary: PipelineSummary,
}

fn min_margin(rows: &[BoundsRow]) -> Option<f64> {
    rows.iter()
        .map(BoundsRow::margin)
        .min_by(f64::total_cmp)
}

/// Runs every stage the configuration asks for and writes the bundle.
/// The STATUS file in `out_dir` reads `ok` only after a complete run;
/// any earlier content flags the partial outputs as stale.
pub fn run_pipeline(cfg: &RunConfig, out_dir: &Path) -> Result<ArtifactBundle> {
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("STATUS"), "stale: run in progress\n")?;
    let mut manifest = RunManifest::new("pipeline", cfg);
    match run_stages(cfg, out_dir, &mut manifest) {
        Ok(summary) => {
            let text = report_text(&summary)?;
            fs::write(out_dir.join("summary.txt"), &text)?;
            manifest.record("summary.txt");
            manifest.write(out_dir)?;
            fs::write(out_dir.join("STATUS"), "ok\n")?;
            Ok(ArtifactBundle {
                dir: out_dir.to_path_buf(),
                manifest,
                summary,
            })
        }
        Err(e) => {
            let _ = fs::write(out_dir.join("STATUS"), format!("stale: {e}\n"));
            let _ = manifest.write(out_dir);
            Err(e)
        }
    }
}

fn write_output(
    dir: &Path,
    manifest: &mut RunManifest,
    name: &str,
    content: &str,
) -> Result<()> {
    fs::write(dir.join(name), content)?;
    manifest.record(name);
    Ok(())
}

fn run_stages(cfg: &RunConfig, dir: &Path, manifest: &mut RunManifest) -> Result<PipelineSummary> {
    let mut summary = PipelineSummary {
        backend: cfg.solver.backend.name().into(),
        ..PipelineSummary::default()
    };

    let h = stage("build", || fermion_hamiltonian(cfg))?;
    write_output(dir, manifest, "hamiltonian.txt", &dump_fermion_terms(&h))?;
    summary
        .stages
        .push(format!("build: {} fermionic terms", h.terms().len()));

    let mapped = stage("jw", || {
        map_hamiltonian(&h, cfg.lattice.spacing, QubitOrdering::SpeciesMajor)
    })?;
    write_output(dir, manifest, "paulis.txt", &dump_pauli_strings(&mapped.op))?;
    summary.n_qubits = mapped.op.n_qubits();
    summary.stages.push(format!(
        "jw: {} Pauli strings on {} qubits; bulk support <= {}, {} wrap terms",
        mapped.op.terms().len(),
        mapped.op.n_qubits(),
        mapped.report.bulk_max_width,
        mapped.report.wrap_count
    ));

    let (ground, energy, how) = stage("ground-state", || solve_ground(cfg, &mapped))?;
    summary.ground_energy = Some(energy);
    match &how {
        GroundSolve::Exact { spectrum } => {
            write_output(dir, manifest, "spectrum.csv", &spectrum_csv(&spectrum.energies))?;
            summary.stages.push(format!(
                "ground-state: exact, {} levels resolved, E0 = {energy:.12}",
                spectrum.energies.len()
            ));
        }
        GroundSolve::Dmrg { result } => {
            write_output(dir, manifest, "dmrg.csv", &dmrg_csv(&result.sweep_energies))?;
            summary.stages.push(format!(
                "ground-state: variational, {} sweeps, converged = {}, E0 = {energy:.12}",
                result.sweeps_run, result.converged
            ));
        }
    }
    {
        let mut buf = Vec::new();
        ground.write_to(&mut buf)?;
        fs::write(dir.join("ground.mps"), &buf)?;
        manifest.record("ground.mps");
    }

    let circuit = stage("compile", || compile_mps(&ground))?;
    write_output(dir, manifest, "circuit.json", &circuit.to_json()?)?;
    summary.two_level_units = Some(circuit.two_level_units());
    summary.max_window = Some(circuit.max_window());
    if summary.n_qubits <= MPS_DENSE_CAP.min(cfg.solver.qubit_cap) {
        let f = stage("compile", || compile_fidelity(&ground, &circuit))?;
        summary.compile_fidelity = Some(f);
    }
    summary.stages.push(format!(
        "compile: {} gates, {} two-level units, widest window {}",
        circuit.gates.len(),
        circuit.two_level_units(),
        circuit.max_window()
    ));

    if cfg.drive.is_some() {
        let t1 = stage("excite", || theorem1_rows(cfg))?;
        write_output(dir, manifest, "theorem1.csv", &bounds_csv(&t1))?;
        summary.min_margin_few_level = min_margin(&t1);

        let t2 = stage("excite", || theorem2_rows(cfg))?;
        write_output(dir, manifest, "theorem2.csv", &bounds_csv(&t2))?;
        summary.min_margin_pulse = min_margin(&t2);

        let reports = stage("excite", || rabi_reports(cfg))?;
        let rows: Vec<BoundsRow> = reports.iter().map(excitation_row).collect();
        write_output(dir, manifest, "excite.csv", &bounds_csv(&rows))?;
        summary.min_margin_excite = min_margin(&rows);
        summary.stages.push(format!(
            "excite: {} few-level rows, {} pulse rows, {} end-to-end rows",
            t1.len(),
            t2.len(),
            rows.len()
        ));
    }

    if cfg.scaling.is_some() {
        let (rows, fit) = stage("scaling", || scaling_rows(cfg))?;
        write_output(dir, manifest, "scaling.csv", &scaling_csv(&rows))?;
        summary.entropy_slope = Some(fit.slope);
        summary.entropy_rms = Some(fit.rms_residual);
        summary
            .stages
            .push(format!("scaling: {} mass points", rows.len()));
    }

    Ok(summary)
}

/// Renders the human-readable summary of a finished run.
pub fn report_text(s: &PipelineSummary) -> Result<String> {
    if s.stages.is_empty() {
        return Err(Error::InvalidParameter(
            "empty bundle: no stages produced results".into(),
        ));
    }
    let mut out = String::new();
    let _ = writeln!(out, "gnprep run summary ({} backend)", s.backend);
    for line in &s.stages {
        let _ = writeln!(out, "  {line}");
    }
    if let Some(e) = s.ground_energy {
        let _ = writeln!(out, "vacuum energy: {e:.12}");
    }
    if let Some(f) = s.compile_fidelity {
        let _ = writeln!(out, "circuit preparation fidelity: {f:.12}");
    }
    if let (Some(u), Some(w)) = (s.two_level_units, s.max_window) {
        let _ = writeln!(out, "circuit cost: {u} two-level units, widest window {w}");
    }
    if let Some(m) = s.min_margin_few_level {
        let _ = writeln!(out, "few-level floor: min margin {m:.6e} ({})", pass(m));
    }
    if let Some(m) = s.min_margin_pulse {
        let _ = writeln!(out, "pulse-shape floor: min margin {m:.6e} ({})", pass(m));
    }
    if let Some(m) = s.min_margin_excite {
        let _ = writeln!(out, "composed floor: min margin {m:.6e} ({})", pass(m));
    }
    if let Some(slope) = s.entropy_slope {
        let _ = writeln!(
            out,
            "entropy growth: fitted slope {slope:.4} vs asymptotic 1/6 = {:.4} (finite-size trend, not asserted); rms residual {:.3e}",
            1.0 / 6.0,
            s.entropy_rms.unwrap_or(f64::NAN)
        );
    }
    Ok(out)
}

fn pass(margin: f64) -> &'static str {
    if margin >= 0.0 {
        "holds"
    } else {
        "VIOLATED"
    }
}

/// Renders the report of a finished bundle.
pub fn report(bundle: &ArtifactBundle) -> Result<String> {
    report_text(&bundle.summary)
}
