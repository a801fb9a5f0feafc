//! Output plumbing: manifests, CSV writers, table formats.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use ballsde::model::RawModelConfig;
use ballsde::schemes::{BackwardPath, VectorPath};

use crate::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

/// Echo of every resolved input, written next to the data files.
#[derive(Serialize)]
pub struct Manifest {
    pub command: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub model: RawModelConfig,
    #[serde(flatten)]
    pub extra: serde_json::Value,
    pub outputs: Vec<String>,
}

pub struct OutDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(dir: &str) -> CliResult<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: PathBuf::from(dir),
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes a file and records it for the manifest.
    pub fn write(&mut self, name: &str, contents: &[u8]) -> CliResult<()> {
        fs::write(self.path(name), contents)?;
        self.written.push(name.to_string());
        println!("wrote {}", self.path(name).display());
        Ok(())
    }

    pub fn finish(mut self, command: &'static str, seed: u64, model: RawModelConfig, extra: serde_json::Value) -> CliResult<()> {
        let manifest = Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            seed,
            model,
            extra,
            outputs: std::mem::take(&mut self.written),
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(self.path("manifest.json"), text)?;
        println!("wrote {}", self.path("manifest.json").display());
        Ok(())
    }
}

pub fn read_to_string(path: &str) -> CliResult<String> {
    fs::read_to_string(Path::new(path))
        .map_err(|e| crate::CliError::Config(format!("cannot read model file {path}: {e}")))
}

/// t, y0, x_1..x_d; one row per grid point.
pub fn backward_csv(path: &BackwardPath<f64>) -> Vec<u8> {
    let mut out = Vec::new();
    let d = path.d();
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain(std::iter::once("y0".to_string()))
        .chain((1..=d).map(|i| format!("x{i}")))
        .collect();
    writeln!(out, "{}", header.join(",")).expect("in-memory write");
    for k in 0..path.num_states() {
        write!(out, "{}", path.grid.time(k)).expect("in-memory write");
        write!(out, ",{}", path.y0(k)).expect("in-memory write");
        for v in path.x(k) {
            write!(out, ",{v}").expect("in-memory write");
        }
        writeln!(out).expect("in-memory write");
    }
    out
}

/// t, x_1..x_d; one row per grid point.
pub fn vector_csv(path: &VectorPath<f64>) -> Vec<u8> {
    let mut out = Vec::new();
    let d = path.d();
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=d).map(|i| format!("x{i}")))
        .collect();
    writeln!(out, "{}", header.join(",")).expect("in-memory write");
    for k in 0..path.num_states() {
        write!(out, "{}", path.grid.time(k)).expect("in-memory write");
        for v in path.x(k) {
            write!(out, ",{v}").expect("in-memory write");
        }
        writeln!(out).expect("in-memory write");
    }
    out
}

/// t, distance rows for the paired-path experiment.
pub fn distance_csv(times: impl Iterator<Item = f64>, distances: &[f64]) -> Vec<u8> {
    let mut out = Vec::new();
    writeln!(out, "t,distance").expect("in-memory write");
    for (t, dist) in times.zip(distances.iter()) {
        writeln!(out, "{t},{dist}").expect("in-memory write");
    }
    out
}
