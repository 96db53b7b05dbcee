//! Output files: JSON reports, CSV tables, SVG plots and the run metadata sidecar.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::RunConfig;

/// A named invariant check recorded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct Invariant {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

impl Invariant {
    pub fn new(name: &str, ok: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            ok,
            detail: detail.into(),
        }
    }
}

/// Deterministic report body: identical inputs give byte-identical JSON.
#[derive(Debug, Serialize)]
pub struct Report<'a, T> {
    pub command: &'a str,
    pub version: &'static str,
    pub config: &'a RunConfig,
    pub invariants: &'a [Invariant],
    pub results: T,
}

/// Non-deterministic facts about a run, kept out of the report itself.
#[derive(Debug, Serialize)]
struct Metadata<'a> {
    command: &'a str,
    version: &'static str,
    started_unix_seconds: u64,
    elapsed_seconds: f64,
    threads: usize,
    files: &'a [String],
}

pub struct Output {
    dir: PathBuf,
    written: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &[u8]) -> io::Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(io::Error::other)?;
        for row in rows {
            w.write_record(&row).map_err(io::Error::other)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| io::Error::other(e.to_string()))?;
        self.write(name, &bytes)
    }

    pub fn svg(&mut self, name: &str, contents: &str) -> io::Result<()> {
        self.write(name, contents.as_bytes())
    }

    /// Writes `<command>.meta.json` listing the files produced so far.
    pub fn finish(
        mut self,
        command: &str,
        started: SystemTime,
        elapsed: Duration,
    ) -> io::Result<Vec<String>> {
        let meta = Metadata {
            command,
            version: env!("CARGO_PKG_VERSION"),
            started_unix_seconds: started
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            elapsed_seconds: elapsed.as_secs_f64(),
            threads: rayon::current_num_threads(),
            files: &self.written.clone(),
        };
        self.json(&format!("{command}.meta.json"), &meta)?;
        Ok(self.written)
    }
}

/// Shortest round-trip decimal text for a CSV cell.
pub fn num(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn files_are_listed_in_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Output::new(dir.path()).unwrap();
        out.csv("t.csv", &["a", "b"], vec![vec![num(1.5), num(f64::NAN)]])
            .unwrap();
        let files = out
            .finish("t", SystemTime::now(), Duration::from_millis(5))
            .unwrap();
        assert_eq!(files, vec!["t.csv".to_string(), "t.meta.json".to_string()]);
        let csv = fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert_eq!(csv, "a,b\n1.5,NaN\n");
    }
}
