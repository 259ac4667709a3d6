//! Command-line front end: argument parsing and subcommand dispatch.
//!
//! Every subcommand reads the same sectioned key=value configuration,
//! prints its results to stdout, and, when `--out DIR` is given, writes
//! the machine-readable artifacts plus a run manifest into that directory.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::circuit::compile_mps;
use crate::config::{load_run_config, Backend, RunConfig};
use crate::error::{Error, Result};
use crate::exact::eigensolve;
use crate::manifest::RunManifest;
use crate::mps::dmrg_ground_state;
use crate::pipeline::{
    bounds_csv, dmrg_csv, dump_fermion_terms, dump_pauli_strings, eigen_options, evolve_csv,
    evolve_table, excitation_row, fermion_hamiltonian, floquet_rows, mapped_hamiltonian,
    rabi_reports, report, run_pipeline, scaling_csv, scaling_rows, solve_ground, spectrum_csv,
    theorem1_rows, theorem2_rows, GroundSolve,
};

/// Desk-scale state preparation study for the lattice model.
#[derive(Debug, Parser)]
#[command(name = "gnprep", version, about)]
pub struct Cli {
    /// Sectioned key=value run configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Directory for machine-readable outputs and the run manifest.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Overrides the configured random seed.
    #[arg(long, global = true, value_name = "INT")]
    pub seed: Option<u64>,

    /// Overrides the configured dense-register cap.
    #[arg(long, global = true, value_name = "INT")]
    pub qubit_cap: Option<usize>,

    /// Overrides the configured vacuum backend.
    #[arg(long, global = true, value_enum, value_name = "NAME")]
    pub backend: Option<BackendArg>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BackendArg {
    Exact,
    Mps,
}

impl BackendArg {
    fn to_backend(self) -> Backend {
        match self {
            BackendArg::Exact => Backend::Exact,
            BackendArg::Mps => Backend::Mps,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the fermionic lattice Hamiltonian.
    BuildHamiltonian {
        /// Print every fermionic term.
        #[arg(long)]
        dump_terms: bool,
    },
    /// Map the Hamiltonian to Pauli strings and report term locality.
    Jw {
        /// Print every Pauli string as `weight re im letters`.
        #[arg(long)]
        dump_paulis: bool,
    },
    /// Resolve the exact spectrum of the mapped Hamiltonian.
    Spectrum,
    /// Find the vacuum variationally and save it as a state train.
    Dmrg,
    /// Compile the vacuum into a staircase circuit.
    CompileCircuit {
        /// Re-simulate the circuit and print the preparation fidelity.
        #[arg(long)]
        verify: bool,
    },
    /// Integrate the configured evolution from the vacuum.
    Evolve,
    /// Pi-pulse excitation sweep with the composed probability floor.
    Rabi,
    /// Closed-form two-level pulses checked against integrated ones.
    Floquet,
    /// Projected-versus-full leakage sweep on the configured lattice.
    Theorem1,
    /// Resonant two-level pulse sweep against the quadratic floor.
    Theorem2,
    /// Vacuum entropy and bond-dimension growth over a mass grid.
    Scaling,
    /// Run every configured stage into one output bundle.
    Pipeline,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::BuildHamiltonian { .. } => "build-hamiltonian",
            Command::Jw { .. } => "jw",
            Command::Spectrum => "spectrum",
            Command::Dmrg => "dmrg",
            Command::CompileCircuit { .. } => "compile-circuit",
            Command::Evolve => "evolve",
            Command::Rabi => "rabi",
            Command::Floquet => "floquet",
            Command::Theorem1 => "theorem1",
            Command::Theorem2 => "theorem2",
            Command::Scaling => "scaling",
            Command::Pipeline => "pipeline",
        }
    }
}

/// Output collector: stdout text always, files plus manifest when
/// `--out` was given.
struct Sink {
    dir: Option<PathBuf>,
    manifest: RunManifest,
    stdout: String,
}

impl Sink {
    fn new(out: Option<PathBuf>, command: &str, cfg: &RunConfig) -> Result<Self> {
        if let Some(d) = &out {
            fs::create_dir_all(d)?;
        }
        Ok(Sink {
            dir: out,
            manifest: RunManifest::new(command, cfg),
            stdout: String::new(),
        })
    }

    fn say(&mut self, line: &str) {
        self.stdout.push_str(line);
        if !line.ends_with('\n') {
            self.stdout.push('\n');
        }
    }

    fn file(&mut self, name: &str, content: &[u8]) -> Result<()> {
        if let Some(d) = &self.dir {
            fs::write(d.join(name), content)?;
            self.manifest.record(name);
        }
        Ok(())
    }

    fn finish(mut self) -> Result<String> {
        if let Some(d) = &self.dir {
            self.manifest.write(d)?;
        }
        Ok(std::mem::take(&mut self.stdout))
    }
}

/// Loads the configuration, applies command-line overrides, and validates.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => load_run_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.solver.seed = seed;
    }
    if let Some(cap) = cli.qubit_cap {
        cfg.solver.qubit_cap = cap;
    }
    if let Some(backend) = cli.backend {
        cfg.solver.backend = backend.to_backend();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Executes the parsed command line and returns the stdout text.
pub fn run(cli: &Cli) -> Result<String> {
    let cfg = resolve_config(cli)?;
    let mut sink = Sink::new(cli.out.clone(), cli.command.name(), &cfg)?;
    match &cli.command {
        Command::BuildHamiltonian { dump_terms } => {
            let h = fermion_hamiltonian(&cfg)?;
            sink.say(&format!(
                "fermionic Hamiltonian: {} terms, {} sites, {} species",
                h.terms().len(),
                cfg.lattice.n_sites,
                cfg.lattice.n_species
            ));
            let dump = dump_fermion_terms(&h);
            if *dump_terms {
                sink.say(&dump);
            }
            sink.file("hamiltonian.txt", dump.as_bytes())?;
        }
        Command::Jw { dump_paulis } => {
            let mapped = mapped_hamiltonian(&cfg)?;
            let r = &mapped.report;
            sink.say(&format!(
                "mapped Hamiltonian: {} Pauli strings on {} qubits",
                mapped.op.terms().len(),
                r.n_qubits
            ));
            sink.say(&format!(
                "bulk terms fit in {} contiguous qubits (allowed window {}); {} wrap terms, max weight {}",
                r.bulk_max_width, r.bulk_window, r.wrap_count, r.wrap_max_weight
            ));
            let dump = dump_pauli_strings(&mapped.op);
            if *dump_paulis {
                sink.say(&dump);
            }
            sink.file("paulis.txt", dump.as_bytes())?;
        }
        Command::Spectrum => {
            let mapped = mapped_hamiltonian(&cfg)?;
            let spectrum = eigensolve(&mapped.op, &eigen_options(&cfg))?;
            sink.say(&format!(
                "{} of {} levels resolved on {} qubits",
                spectrum.energies.len(),
                spectrum.dim,
                spectrum.n_qubits
            ));
            sink.say(&format!("ground energy: {}", spectrum.ground_energy()));
            if spectrum.energies.len() > 1 {
                sink.say(&format!("gap: {}", spectrum.gap()));
            }
            let csv = spectrum_csv(&spectrum.energies);
            sink.say(&csv);
            sink.file("spectrum.csv", csv.as_bytes())?;
        }
        Command::Dmrg => {
            let mapped = mapped_hamiltonian(&cfg)?;
            let result = dmrg_ground_state(&mapped.op, &crate::pipeline::dmrg_options(&cfg))?;
            sink.say(&format!(
                "variational vacuum: energy {}, {} sweeps, converged = {}",
                result.energy, result.sweeps_run, result.converged
            ));
            sink.say(&format!(
                "max bond {}, half-chain entropy {}",
                result.mps.max_bond(),
                result.mps.half_chain_entropy()
            ));
            let csv = dmrg_csv(&result.sweep_energies);
            sink.say(&csv);
            sink.file("dmrg.csv", csv.as_bytes())?;
            let mut buf = Vec::new();
            result.mps.write_to(&mut buf)?;
            sink.file("ground.mps", &buf)?;
        }
        Command::CompileCircuit { verify } => {
            let mapped = mapped_hamiltonian(&cfg)?;
            let (ground, energy, _) = solve_ground(&cfg, &mapped)?;
            let circuit = compile_mps(&ground)?;
            sink.say(&format!(
                "vacuum at energy {} compiled to {} gates, {} two-level units, widest window {}",
                energy,
                circuit.gates.len(),
                circuit.two_level_units(),
                circuit.max_window()
            ));
            if *verify {
                let f = crate::circuit::compile_fidelity(&ground, &circuit)?;
                sink.say(&format!("preparation fidelity: {f}"));
            }
            sink.file("circuit.json", circuit.to_json()?.as_bytes())?;
        }
        Command::Evolve => {
            let table = evolve_table(&cfg)?;
            let csv = evolve_csv(&table);
            sink.say(&csv);
            sink.say(&format!("# norm drift {}", table.norm_drift));
            sink.file("evolve.csv", csv.as_bytes())?;
        }
        Command::Rabi => {
            let reports = rabi_reports(&cfg)?;
            let rows: Vec<_> = reports.iter().map(excitation_row).collect();
            let csv = bounds_csv(&rows);
            sink.say(&csv);
            for r in &reports {
                let mut line = format!(
                    "# lambda {}: register strength {}, matrix element {}, window +-{} captures levels {:?}",
                    r.lambda, r.lambda_register, r.rabi_matrix_element, r.window, r.window_levels
                );
                if r.bound_vacuous {
                    line.push_str(" (floor vacuous at this strength)");
                }
                sink.say(&line);
            }
            sink.file("excite.csv", csv.as_bytes())?;
        }
        Command::Floquet => {
            let (rows, deviations) = floquet_rows(&cfg)?;
            let csv = bounds_csv(&rows);
            sink.say(&csv);
            let mut dev = String::from("ratio (dimensionless),deviation (dimensionless)\n");
            for d in &deviations {
                let _ = writeln!(dev, "{},{}", d.ratio, d.deviation);
            }
            sink.say(&dev);
            sink.file("floquet.csv", csv.as_bytes())?;
            sink.file("floquet_deviation.csv", dev.as_bytes())?;
        }
        Command::Theorem1 => {
            let rows = theorem1_rows(&cfg)?;
            let csv = bounds_csv(&rows);
            sink.say(&csv);
            sink.file("theorem1.csv", csv.as_bytes())?;
        }
        Command::Theorem2 => {
            let rows = theorem2_rows(&cfg)?;
            let csv = bounds_csv(&rows);
            sink.say(&csv);
            sink.file("theorem2.csv", csv.as_bytes())?;
        }
        Command::Scaling => {
            let (rows, fit) = scaling_rows(&cfg)?;
            let csv = scaling_csv(&rows);
            sink.say(&csv);
            sink.say(&format!(
                "# entropy vs ln(1/(m a)): slope {} intercept {} rms {}",
                fit.slope, fit.intercept, fit.rms_residual
            ));
            sink.file("scaling.csv", csv.as_bytes())?;
        }
        Command::Pipeline => {
            let dir = cli.out.clone().ok_or_else(|| {
                Error::InvalidParameter("pipeline requires --out DIR for its bundle".into())
            })?;
            let bundle = run_pipeline(&cfg, &dir)?;
            // run_pipeline writes its own manifest; skip the sink's.
            return Ok(report(&bundle)?);
        }
    }
    sink.finish()
}

/// Appendix of ground-solve provenance for tests.
pub fn ground_backend_name(gs: &GroundSolve) -> &'static str {
    match gs {
        GroundSolve::Exact { .. } => "exact",
        GroundSolve::Dmrg { .. } => "mps",
    }
}
