//! Run manifests: a JSON snapshot of everything that produced an output
//! bundle, so any CSV row can be traced back to the exact configuration and
//! seed that generated it.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::Result;

/// Provenance record written next to every output bundle.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Seconds since the Unix epoch at creation.
    pub created_unix: u64,
    /// The same instant as an ISO 8601 UTC string.
    pub created_utc: String,
    /// Subcommand that produced the bundle.
    pub command: String,
    /// Seed in effect for every randomized initialization.
    pub seed: u64,
    /// Full configuration snapshot.
    pub config: RunConfig,
    /// Bundle files, relative to the manifest's directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig) -> RunManifest {
        let created_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunManifest {
            tool: "gnprep".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            created_unix,
            created_utc: utc_string(created_unix),
            command: command.into(),
            seed: config.solver.seed,
            config: config.clone(),
            outputs: Vec::new(),
        }
    }

    /// Records one output file name (relative to the bundle directory).
    pub fn record(&mut self, name: impl Into<String>) {
        self.outputs.push(name.into());
    }

    /// Writes `manifest.json` into `dir` and returns its path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }
}

/// Formats a Unix timestamp as `YYYY-MM-DDThh:mm:ssZ`.
pub fn utc_string(unix: u64) -> String {
    let secs_of_day = unix % 86_400;
    let days = (unix / 86_400) as i64;
    let (year, month, day) = civil_from_days(days);
    format!(
        "{year:04}-{month:02}-{day:02}T{:02}:{:02}:{:02}Z",
        secs_of_day / 3600,
        (secs_of_day / 60) % 60,
        secs_of_day % 60
    )
}

/// Proleptic Gregorian date from days since 1970-01-01.
fn civil_from_days(z: i64) -> (i64, u32, u32) {
    let z = z + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    (if m <= 2 { y + 1 } else { y }, m, d)
}
