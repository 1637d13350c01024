//! Result files: CSV tables, 16-bit PGM images and the run manifest.
//!
//! CSV files use LF line endings, a header row, and `{:.16e}` numbers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ConfigFile;
use crate::dynamics::{SimulationConfig, Trajectory};
use crate::error::{Error, Result};
use crate::experiments::{EndfireSeries, SpectrumTable, SPECTRUM_MODES};
use crate::observables::PatternImage;

pub const MANIFEST_NAME: &str = "manifest.toml";

fn num(out: &mut String, v: f64) {
    write!(out, "{v:.16e}").expect("writing to a String");
}

fn row(out: &mut String, values: impl IntoIterator<Item = f64>) {
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        num(out, v);
    }
    out.push('\n');
}

pub fn populations_csv(traj: &Trajectory) -> String {
    let mut out = String::from("tau,t_us");
    for mode in traj.modes() {
        write!(out, ",\"N{mode}\"").expect("writing to a String");
    }
    out.push('\n');
    for c in &traj.captures {
        row(&mut out, [c.tau, c.t_us].into_iter().chain(c.populations.iter().copied()));
    }
    out
}

/// Columns `xi`, then initial and final `|ψ_{0,0}|²`.
pub fn depletion_csv(xi: &[f64], initial: &[f64], last: &[f64]) -> String {
    let mut out = String::from("xi,initial,final\n");
    for ((x, a), b) in xi.iter().zip(initial).zip(last) {
        row(&mut out, [*x, *a, *b]);
    }
    out
}

pub fn spectrum_csv(table: &SpectrumTable) -> String {
    let mut out = String::from("delta_omega_khz");
    for mode in SPECTRUM_MODES {
        write!(out, ",\"N{mode}\"").expect("writing to a String");
    }
    out.push_str(",total_scattered,error\n");
    for r in &table.rows {
        let mut line = String::new();
        row(&mut line, [r.delta_omega_khz].into_iter().chain(r.values).chain([r.total_scattered]));
        line.pop();
        out.push_str(&line);
        out.push(',');
        if let Some(e) = &r.error {
            write!(out, "\"{}\"", e.replace('"', "'")).expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

pub fn endfire_csv(traj: &Trajectory, series: &EndfireSeries) -> String {
    let mut out = String::from("tau,t_us,abs_e_plus,abs_e_minus");
    for (mode, _) in &series.components {
        write!(out, ",\"abs_e_plus{mode}\"").expect("writing to a String");
    }
    out.push('\n');
    for (k, c) in traj.captures.iter().enumerate() {
        row(
            &mut out,
            [c.tau, c.t_us, c.e_plus, c.e_minus]
                .into_iter()
                .chain(series.components.iter().map(|(_, v)| v[k])),
        );
    }
    out
}

/// Binary PGM (P5), 16-bit big-endian, `[0, 1] -> [0, 65535]`.
pub fn pgm_bytes(image: &PatternImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n65535\n", image.width, image.height).into_bytes();
    out.reserve(2 * image.pixels.len());
    for &v in &image.pixels {
        let s = (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
        out.extend_from_slice(&s.to_be_bytes());
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_clock_s: f64,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_khz: Option<Vec<f64>>,
    pub outputs: Vec<OutputEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigFile>,
}

/// A run-private output directory that records every file it writes.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    entries: Vec<OutputEntry>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(Self {
            root,
            entries: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn entries(&self) -> &[OutputEntry] {
        &self.entries
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.entries.retain(|e| e.file != name);
        self.entries.push(OutputEntry {
            file: name.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    /// Write `manifest.toml` describing everything written so far.
    pub fn finish(
        self,
        command: &str,
        config: Option<&SimulationConfig>,
        outcome: std::result::Result<(), &Error>,
        warnings: Vec<String>,
        sweep_khz: Option<Vec<f64>>,
        elapsed: Duration,
    ) -> Result<PathBuf> {
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            status: if outcome.is_ok() { "ok" } else { "error" }.to_string(),
            error: outcome.err().map(|e| e.to_string()),
            wall_clock_s: elapsed.as_secs_f64(),
            warnings,
            sweep_khz,
            outputs: self.entries,
            config: config.map(ConfigFile::from_config),
        };
        let text = toml::to_string(&manifest).expect("manifest always serializes");
        let path = self.root.join(MANIFEST_NAME);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}
