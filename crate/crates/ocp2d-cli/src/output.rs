//! Run directories and deterministic result emission. Every run writes a
//! fresh directory named by the config digest; files are never appended to.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResultRecord {
    pub run_id: String,
    pub config_digest: String,
    pub input_hash: String,
    pub metric: String,
    pub value: f64,
    pub stderr: f64,
    pub units: String,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunMeta {
    pub run_id: String,
    pub command: String,
    pub config_digest: String,
    pub input_hash: String,
    pub seeds: Vec<u64>,
    pub rng_algorithm: String,
    pub scalar: String,
    pub beta: Option<f64>,
    pub interrupted: bool,
    pub wall_time_s: f64,
}

pub struct RunContext {
    pub run_id: String,
    pub dir: PathBuf,
    pub command: String,
    pub config_digest: String,
    pub input_hash: String,
    pub seeds: Vec<u64>,
    pub beta: Option<f64>,
    pub interrupted: bool,
    records: Vec<ResultRecord>,
    started: Instant,
}

impl RunContext {
    pub fn create(
        out_root: &Path,
        command: &str,
        config_digest: String,
        input_hash: String,
        seeds: Vec<u64>,
        config_bytes: &[u8],
    ) -> Result<Self, CliError> {
        let base = format!("{command}-{}", &config_digest[..12]);
        // Append-never: pick a fresh directory if this exact run id exists.
        let mut dir = out_root.join(&base);
        let mut attempt = 1;
        while dir.exists() {
            attempt += 1;
            dir = out_root.join(format!("{base}-r{attempt}"));
        }
        fs::create_dir_all(&dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        fs::write(dir.join("config.echo.toml"), config_bytes)
            .map_err(|e| CliError::Io(format!("cannot write config echo: {e}")))?;
        Ok(RunContext {
            run_id: dir.file_name().unwrap().to_string_lossy().into_owned(),
            dir,
            command: command.to_string(),
            config_digest,
            input_hash,
            seeds,
            beta: None,
            interrupted: false,
            records: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn record(&mut self, metric: &str, value: f64, stderr: f64, units: &str) {
        self.records.push(ResultRecord {
            run_id: self.run_id.clone(),
            config_digest: self.config_digest.clone(),
            input_hash: self.input_hash.clone(),
            metric: metric.to_string(),
            value,
            stderr,
            units: units.to_string(),
            wall_time_s: self.started.elapsed().as_secs_f64(),
        });
    }

    /// Write a CSV with the exact header and rows given, LF line endings,
    /// shortest-round-trip float formatting (byte-deterministic).
    pub fn write_csv(&self, name: &str, header: &str, rows: &[Vec<String>]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut out = Vec::with_capacity(rows.len() * 32 + header.len() + 1);
        out.extend_from_slice(header.as_bytes());
        out.push(b'\n');
        for row in rows {
            out.extend_from_slice(row.join(",").as_bytes());
            out.push(b'\n');
        }
        fs::write(&path, out)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut body = serde_json::to_vec_pretty(value)
            .map_err(|e| CliError::Io(format!("serialize {name}: {e}")))?;
        body.push(b'\n');
        fs::write(&path, body)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
    }

    pub fn finish(self) -> Result<PathBuf, CliError> {
        self.write_json("results.json", &self.records)?;
        let meta = RunMeta {
            run_id: self.run_id.clone(),
            command: self.command.clone(),
            config_digest: self.config_digest.clone(),
            input_hash: self.input_hash.clone(),
            seeds: self.seeds.clone(),
            rng_algorithm: "chacha8".into(),
            scalar: "f64".into(),
            beta: self.beta,
            interrupted: self.interrupted,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        let path = self.dir.join("run_meta.json");
        let mut body = serde_json::to_vec_pretty(&meta)
            .map_err(|e| CliError::Io(format!("serialize run meta: {e}")))?;
        body.push(b'\n');
        fs::write(&path, body)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        let mut stdout = std::io::stdout();
        let _ = writeln!(stdout, "run {} complete in {}", meta.run_id, self.dir.display());
        Ok(self.dir)
    }
}

/// Shortest round-trip decimal form of a float (deterministic on all
/// platforms for finite values).
pub fn fmt(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}
