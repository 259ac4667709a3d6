//! Sectioned key = value run configuration.
//!
//! Hand-edited input lives in a plain text file with `[section]` headers,
//! `key = value` lines, and `#` or `;` comments.  Machine outputs are JSON
//! and CSV; this format is only for what humans author.  Unknown sections
//! and keys are rejected so typos fail loudly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{DriveConfig, LatticeConfig};

/// Which engine finds the vacuum and spectra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Mps,
}

impl Backend {
    pub fn parse(s: &str) -> Option<Backend> {
        match s {
            "exact" => Some(Backend::Exact),
            "mps" => Some(Backend::Mps),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Mps => "mps",
        }
    }
}

/// Engine knobs shared by all subcommands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub backend: Backend,
    /// Hard ceiling on dense register work.
    pub qubit_cap: usize,
    /// Seed for every randomized initialization.
    pub seed: u64,
    /// Variational bond-dimension cap.
    pub chi_max: usize,
    pub max_sweeps: usize,
    /// Energy convergence threshold between sweeps.
    pub tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: Backend::Exact,
            qubit_cap: 22,
            seed: 7,
            chi_max: 64,
            max_sweeps: 40,
            tol: 1e-9,
        }
    }
}

/// Drive-strength grids and leakage knobs for the excitation runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExciteSection {
    /// Retained level count for the leakage budget.
    pub nu: usize,
    /// Drive frequency; `None` targets the lowest transition.
    pub omega: Option<f64>,
    /// One-particle window half-width; `None` uses half the detuning.
    pub window: Option<f64>,
    /// Sweep strengths as fractions of the measured detuning.
    pub lambda_fractions: Vec<f64>,
    /// Absolute sweep strengths; overrides the fractions when nonempty.
    pub lambda: Vec<f64>,
    /// lambda/omega grid for the two-level pulse-shape checks.
    pub ratios: Vec<f64>,
}

impl Default for ExciteSection {
    fn default() -> Self {
        ExciteSection {
            nu: 2,
            omega: None,
            window: None,
            lambda_fractions: vec![1.0 / 200.0, 1.0 / 100.0, 1.0 / 50.0, 1.0 / 20.0],
            lambda: Vec::new(),
            ratios: vec![0.01, 0.02, 0.05, 0.1],
        }
    }
}

/// Time grid for the driven-evolution dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveSection {
    /// Total evolution time; `None` runs one pi pulse when a drive is
    /// configured and falls back to 10 otherwise.
    pub t_final: Option<f64>,
    pub samples: usize,
    /// Number of lowest eigenlevels whose overlaps are tabulated.
    pub levels: usize,
}

impl Default for EvolveSection {
    fn default() -> Self {
        EvolveSection {
            t_final: None,
            samples: 200,
            levels: 4,
        }
    }
}

/// Grid for the entropy and bond-dimension study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSection {
    /// Dimensionless mass points, scanned at fixed `n_sites * m * a`.
    pub ma_grid: Vec<f64>,
    /// Truncation target fed to the bond-dimension predictor.
    pub eps: f64,
    /// Fixed product `n_sites * m * a` setting the chain length per point.
    pub site_mass: f64,
}

impl Default for ScalingSection {
    fn default() -> Self {
        ScalingSection {
            ma_grid: vec![0.5, 0.25, 0.125],
            eps: 1e-3,
            site_mass: 2.0,
        }
    }
}

/// Everything a run needs: the physical model, the optional drive, and all
/// solver parameters.  This whole struct is snapshotted into the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub lattice: LatticeConfig,
    pub drive: Option<DriveConfig>,
    pub solver: SolverConfig,
    pub excite: ExciteSection,
    pub evolve: EvolveSection,
    pub scaling: Option<ScalingSection>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            lattice: LatticeConfig {
                n_sites: 4,
                n_species: 1,
                spacing: 1.0,
                mass: 1.0,
                coupling: 0.5,
                wilson: 1.0,
            },
            drive: None,
            solver: SolverConfig::default(),
            excite: ExciteSection::default(),
            evolve: EvolveSection::default(),
            scaling: None,
        }
    }
}

impl RunConfig {
    /// The drive to use when a subcommand needs one and the file has no
    /// `[drive]` section: a unit-width Gaussian at the origin on the first
    /// species' upper spinor component.
    pub fn drive_or_default(&self) -> DriveConfig {
        self.drive.clone().unwrap_or(DriveConfig {
            species: 1,
            spinor: 0,
            momentum: 0.0,
            center: 0.0,
            sigma: Some(1.0),
        })
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::ConfigParse {
        line,
        message: message.into(),
    }
}

fn parse_u32(line: usize, key: &str, value: &str) -> Result<u32> {
    value
        .parse()
        .map_err(|_| parse_err(line, format!("{key} expects an unsigned integer, got `{value}`")))
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| parse_err(line, format!("{key} expects an unsigned integer, got `{value}`")))
}

fn parse_u64(line: usize, key: &str, value: &str) -> Result<u64> {
    value
        .parse()
        .map_err(|_| parse_err(line, format!("{key} expects an unsigned integer, got `{value}`")))
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| parse_err(line, format!("{key} expects a number, got `{value}`")))
}

fn parse_f64_list(line: usize, key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_f64(line, key, s))
        .collect()
}

/// Parses the sectioned key = value format.
pub fn parse_run_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut saw_drive = false;
    let mut saw_scaling = false;
    let mut drive = cfg.drive_or_default();
    let mut scaling = ScalingSection::default();
    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find(['#', ';']) {
            Some(cut) => &raw[..cut],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| parse_err(line_no, "unterminated section header"))?
                .trim();
            match name {
                "lattice" | "solver" | "excite" | "evolve" => {}
                "drive" => saw_drive = true,
                "scaling" => saw_scaling = true,
                _ => return Err(parse_err(line_no, format!("unknown section `[{name}]`"))),
            }
            section = name.to_string();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(line_no, "expected `key = value`"))?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(parse_err(line_no, format!("key `{key}` has no value")));
        }
        match (section.as_str(), key) {
            ("lattice", "n_sites") => cfg.lattice.n_sites = parse_u32(line_no, key, value)?,
            ("lattice", "n_species") => cfg.lattice.n_species = parse_u32(line_no, key, value)?,
            ("lattice", "spacing") => cfg.lattice.spacing = parse_f64(line_no, key, value)?,
            ("lattice", "mass") => cfg.lattice.mass = parse_f64(line_no, key, value)?,
            ("lattice", "coupling") => cfg.lattice.coupling = parse_f64(line_no, key, value)?,
            ("lattice", "wilson") => cfg.lattice.wilson = parse_f64(line_no, key, value)?,
            ("drive", "species") => drive.species = parse_u32(line_no, key, value)?,
            ("drive", "spinor") => {
                let v = parse_u32(line_no, key, value)?;
                if v > 1 {
                    return Err(parse_err(line_no, "spinor must be 0 or 1"));
                }
                drive.spinor = v as u8;
            }
            ("drive", "momentum") => drive.momentum = parse_f64(line_no, key, value)?,
            ("drive", "center") => drive.center = parse_f64(line_no, key, value)?,
            ("drive", "sigma") => {
                drive.sigma = if value == "flat" {
                    None
                } else {
                    Some(parse_f64(line_no, key, value)?)
                }
            }
            ("solver", "backend") => {
                cfg.solver.backend = Backend::parse(value).ok_or_else(|| {
                    parse_err(line_no, format!("backend must be `exact` or `mps`, got `{value}`"))
                })?
            }
            ("solver", "qubit_cap") => cfg.solver.qubit_cap = parse_usize(line_no, key, value)?,
            ("solver", "seed") => cfg.solver.seed = parse_u64(line_no, key, value)?,
            ("solver", "chi_max") => cfg.solver.chi_max = parse_usize(line_no, key, value)?,
            ("solver", "max_sweeps") => cfg.solver.max_sweeps = parse_usize(line_no, key, value)?,
            ("solver", "tol") => cfg.solver.tol = parse_f64(line_no, key, value)?,
            ("excite", "nu") => cfg.excite.nu = parse_usize(line_no, key, value)?,
            ("excite", "omega") => {
                cfg.excite.omega = if value == "auto" {
                    None
                } else {
                    Some(parse_f64(line_no, key, value)?)
                }
            }
            ("excite", "window") => {
                cfg.excite.window = if value == "auto" {
                    None
                } else {
                    Some(parse_f64(line_no, key, value)?)
                }
            }
            ("excite", "lambda_fractions") => {
                cfg.excite.lambda_fractions = parse_f64_list(line_no, key, value)?
            }
            ("excite", "lambda") => cfg.excite.lambda = parse_f64_list(line_no, key, value)?,
            ("excite", "ratios") => cfg.excite.ratios = parse_f64_list(line_no, key, value)?,
            ("evolve", "t_final") => cfg.evolve.t_final = Some(parse_f64(line_no, key, value)?),
            ("evolve", "samples") => cfg.evolve.samples = parse_usize(line_no, key, value)?,
            ("evolve", "levels") => cfg.evolve.levels = parse_usize(line_no, key, value)?,
            ("scaling", "ma_grid") => scaling.ma_grid = parse_f64_list(line_no, key, value)?,
            ("scaling", "eps") => scaling.eps = parse_f64(line_no, key, value)?,
            ("scaling", "site_mass") => scaling.site_mass = parse_f64(line_no, key, value)?,
            ("", _) => return Err(parse_err(line_no, "key outside any [section]")),
            (s, k) => return Err(parse_err(line_no, format!("unknown key `{k}` in [{s}]"))),
        }
    }
    if saw_drive {
        cfg.drive = Some(drive);
    }
    if saw_scaling {
        cfg.scaling = Some(scaling);
    }
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// Checks every section for internally consistent, positive settings.
    pub fn validate(&self) -> Result<()> {
        let cfg = self;
        cfg.lattice.validate()?;
        if let Some(drive) = &cfg.drive {
            drive.validate(&cfg.lattice)?;
        }
        let s = &cfg.solver;
        if s.qubit_cap == 0 || s.chi_max == 0 || s.max_sweeps == 0 {
            return Err(Error::InvalidParameter(
                "solver caps and sweep budget must be positive".into(),
            ));
        }
        if !(s.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "solver tol must be positive, got {}",
                s.tol
            )));
        }
        if cfg.excite.nu == 0 {
            return Err(Error::InvalidParameter("excite nu must be positive".into()));
        }
        for &f in cfg.excite.lambda_fractions.iter().chain(&cfg.excite.lambda) {
            if !(f > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "drive strengths must be positive, got {f}"
                )));
            }
        }
        for &r in &cfg.excite.ratios {
            if !(r > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "lambda/omega ratios must be positive, got {r}"
                )));
            }
        }
        if cfg.evolve.samples < 2 || cfg.evolve.levels == 0 {
            return Err(Error::InvalidParameter(
                "evolve needs at least 2 samples and 1 level".into(),
            ));
        }
        if let Some(t) = cfg.evolve.t_final {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "evolve t_final must be positive, got {t}"
                )));
            }
        }
        if let Some(sc) = &cfg.scaling {
            if sc.ma_grid.is_empty() || sc.ma_grid.iter().any(|&ma| !(ma > 0.0)) {
                return Err(Error::InvalidParameter(
                    "scaling ma_grid needs positive entries".into(),
                ));
            }
            if !(sc.eps > 0.0 && sc.eps < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "scaling eps must lie in (0, 1), got {}",
                    sc.eps
                )));
            }
            if !(sc.site_mass > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "scaling site_mass must be positive, got {}",
                    sc.site_mass
                )));
            }
        }
        Ok(())
    }
}

/// Reads and parses a config file.
pub fn load_run_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    parse_run_config(&text)
}
