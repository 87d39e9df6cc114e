use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

/// SHA-256 of the compact JSON form of a config. Object keys serialize in
/// sorted order, so equal configs hash equally however they were written.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String, CliError> {
    let v = serde_json::to_value(config)?;
    Ok(hex::encode(Sha256::digest(serde_json::to_string(&v)?.as_bytes())))
}

/// Every result file wraps the payload with the config and seed that produced it.
#[derive(Serialize)]
pub struct Envelope<'a, C: Serialize, R: Serialize> {
    pub command: &'a str,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub config: &'a C,
    pub result: R,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub struct Sink {
    pub dir: Option<PathBuf>,
}

impl Sink {
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.as_deref().unwrap_or(Path::new(".")).join(name)
    }

    /// Print the envelope and, with `--out`, also write it to `<name>.json`.
    pub fn emit<C: Serialize, R: Serialize>(&self, name: &str, env: &Envelope<C, R>) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(env)?;
        let mut out = std::io::stdout().lock();
        match writeln!(out, "{text}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
            _ => {}
        }
        if self.dir.is_some() {
            self.ensure_dir()?;
            std::fs::write(self.path(&format!("{name}.json")), text + "\n")?;
        }
        Ok(())
    }

    pub fn ensure_dir(&self) -> Result<(), CliError> {
        if let Some(d) = &self.dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(())
    }

    /// Write a CSV table; skipped without `--out`.
    pub fn csv<R: Serialize>(&self, name: &str, rows: &[R]) -> Result<(), CliError> {
        if self.dir.is_none() {
            return Ok(());
        }
        self.ensure_dir()?;
        let mut w = csv::Writer::from_path(self.path(&format!("{name}.csv")))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Replace the `seed` field of a config object.
pub fn override_seed(v: &mut Value, seed: Option<u64>) {
    if let (Some(s), Some(obj)) = (seed, v.as_object_mut()) {
        obj.insert("seed".into(), Value::from(s));
    }
}
