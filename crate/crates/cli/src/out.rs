//! Output sink: a run directory with CSV/JSON/SVG artifacts and one
//! manifest that records what produced them.

use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Formats {
    pub fn parse(list: &[String]) -> Result<Formats, String> {
        if list.is_empty() {
            return Ok(Formats { csv: true, json: true, svg: true });
        }
        let mut f = Formats { csv: false, json: false, svg: false };
        for item in list {
            match item.as_str() {
                "csv" => f.csv = true,
                "json" => f.json = true,
                "svg" => f.svg = true,
                other => return Err(format!("unknown format {other}")),
            }
        }
        Ok(f)
    }
}

/// Run metadata written alongside every artifact set.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub library_version: &'static str,
    pub operation: String,
    pub preset: Option<String>,
    /// Flag and parameter overrides, sorted by key.
    pub overrides: BTreeMap<String, String>,
    pub grid: usize,
    pub tolerances: ManifestTolerances,
    pub assumptions: Vec<String>,
    pub outputs: Vec<String>,
    /// Suppressed (null) under --reproducible so reruns are byte-identical.
    pub wall_clock_s: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ManifestTolerances {
    pub rtol: f64,
    pub atol: f64,
}

pub struct Sink {
    dir: PathBuf,
    formats: Formats,
    reproducible: bool,
    started: Instant,
    manifest: Manifest,
}

impl Sink {
    pub fn new(
        dir: &Path,
        formats: Formats,
        reproducible: bool,
        operation: &str,
        preset: Option<&str>,
        grid: usize,
    ) -> std::io::Result<Sink> {
        fs::create_dir_all(dir)?;
        Ok(Sink {
            dir: dir.to_path_buf(),
            formats,
            reproducible,
            started: Instant::now(),
            manifest: Manifest {
                library_version: env!("CARGO_PKG_VERSION"),
                operation: operation.to_string(),
                preset: preset.map(String::from),
                overrides: BTreeMap::new(),
                grid,
                tolerances: ManifestTolerances { rtol: 1e-9, atol: 1e-12 },
                assumptions: Vec::new(),
                outputs: Vec::new(),
                wall_clock_s: None,
            },
        })
    }

    pub fn record_override(&mut self, key: &str, value: impl ToString) {
        self.manifest.overrides.insert(key.to_string(), value.to_string());
    }

    pub fn assume(&mut self, note: &str) {
        self.manifest.assumptions.push(note.to_string());
    }

    fn register(&mut self, name: &str) {
        self.manifest.outputs.push(name.to_string());
    }

    /// Write a CSV file with RFC-4180-style quoting.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
        if !self.formats.csv {
            return Ok(());
        }
        let path = self.dir.join(name);
        let mut file = fs::File::create(&path)?;
        writeln!(file, "{}", header.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(","))?;
        for row in rows {
            writeln!(file, "{}", row.iter().map(|v| csv_field(v)).collect::<Vec<_>>().join(","))?;
        }
        self.register(name);
        Ok(())
    }

    /// Write a JSON artifact (pretty, stable key order from struct fields).
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<()> {
        if !self.formats.json {
            return Ok(());
        }
        let path = self.dir.join(name);
        let text = serde_json::to_string_pretty(value).expect("serializable");
        fs::write(&path, text + "\n")?;
        self.register(name);
        Ok(())
    }

    pub fn svg(&mut self, name: &str, plot: &crate::svg::Plot) -> std::io::Result<()> {
        if !self.formats.svg {
            return Ok(());
        }
        let path = self.dir.join(name);
        fs::write(&path, plot.render())?;
        self.register(name);
        Ok(())
    }

    /// Plain-text artifact (aligned tables, reports).
    pub fn text(&mut self, name: &str, body: &str) -> std::io::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body)?;
        self.register(name);
        Ok(())
    }

    /// Timestamp comment for SVG headers; empty under --reproducible.
    pub fn svg_comment(&self) -> String {
        if self.reproducible {
            String::new()
        } else {
            format!("generated in {:.3} s", self.started.elapsed().as_secs_f64())
        }
    }

    /// Write the manifest and finish the run.
    pub fn finish(mut self) -> std::io::Result<()> {
        self.manifest.wall_clock_s = if self.reproducible {
            None
        } else {
            Some(self.started.elapsed().as_secs_f64())
        };
        let text = serde_json::to_string_pretty(&self.manifest).expect("serializable");
        fs::write(self.dir.join("manifest.json"), text + "\n")
    }
}

fn csv_field(v: &str) -> String {
    if v.contains(',') || v.contains('"') || v.contains('\n') {
        format!("\"{}\"", v.replace('"', "\"\""))
    } else {
        v.to_string()
    }
}

/// Shortest-roundtrip decimal form; deterministic across runs.
pub fn num(v: f64) -> String {
    format!("{v}")
}
