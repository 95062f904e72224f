//! Artifact emission: CSV tables and text files with a provenance header, plus
//! a JSON manifest per run.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::error::LabResult;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest decimal that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub struct OutputDir {
    dir: PathBuf,
    invocation: String,
    files: Vec<Value>,
}

impl OutputDir {
    pub fn create(dir: &Path, invocation: String) -> LabResult<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            invocation,
            files: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn header(&self) -> String {
        format!("# rmtlab {VERSION}\n# invocation: {}\n", self.invocation)
    }

    fn record(&mut self, name: &str, kind: &str, seed: Option<u64>) {
        let mut entry = Map::new();
        entry.insert("file".into(), json!(name));
        entry.insert("kind".into(), json!(kind));
        if let Some(s) = seed {
            entry.insert("seed".into(), json!(s));
        }
        self.files.push(Value::Object(entry));
    }

    /// Writes `name` as CSV: the provenance header, a column line, then rows.
    pub fn csv<I>(
        &mut self,
        name: &str,
        columns: &[&str],
        rows: I,
        seed: Option<u64>,
    ) -> LabResult<PathBuf>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.path(name);
        let mut f = fs::File::create(&path)?;
        f.write_all(self.header().as_bytes())?;
        let mut w = csv::Writer::from_writer(f);
        w.write_record(columns)?;
        for row in rows {
            debug_assert_eq!(row.len(), columns.len());
            w.write_record(&row)?;
        }
        w.flush()?;
        self.record(name, "csv", seed);
        Ok(path)
    }

    /// Writes a text artifact prefixed with the provenance header.
    pub fn text(
        &mut self,
        name: &str,
        body: &str,
        kind: &str,
        seed: Option<u64>,
    ) -> LabResult<PathBuf> {
        let path = self.path(name);
        fs::write(&path, format!("{}{body}", self.header()))?;
        self.record(name, kind, seed);
        Ok(path)
    }

    /// Records a file written by other means, such as a binary matrix.
    pub fn register(&mut self, name: &str, kind: &str, seed: Option<u64>) {
        self.record(name, kind, seed);
    }

    /// Writes `<subcommand>.manifest.json` listing every artifact of the run.
    pub fn finish(self, subcommand: &str, seed: Option<u64>, summary: Value) -> LabResult<PathBuf> {
        let manifest = json!({
            "toolkit": "rmtlab",
            "version": VERSION,
            "invocation": self.invocation,
            "subcommand": subcommand,
            "seed": seed,
            "files": self.files,
            "summary": summary,
        });
        let path = self.dir.join(format!("{subcommand}.manifest.json"));
        let mut text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}
