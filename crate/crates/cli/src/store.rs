//! Append-only result store.
//!
//! Artifacts live under `objects/` with the first 16 hex digits of their
//! SHA-256 in the file name; manifests live under `runs/` keyed by command and
//! config hash. Existing files are never rewritten.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::JobConfig;
use crate::error::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the canonical JSON of everything that can change results.
pub fn config_hash(cfg: &JobConfig) -> String {
    let bytes = serde_json::to_vec(&cfg.canonical()).expect("config serialises");
    sha256_hex(&bytes)
}

/// `{:.16e}`: 17 significant digits, round-trips every `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

/// RFC-4180 table built in memory.
pub struct Table {
    w: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(header).expect("in-memory write");
        Table { w }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.w.write_record(fields).expect("in-memory write");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.w.into_inner().expect("in-memory flush")
    }
}

/// Artifact produced by a command before it is stored.
pub struct Artifact {
    pub name: String,
    pub ext: &'static str,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn csv(name: &str, t: Table) -> Self {
        Artifact { name: name.into(), ext: "csv", bytes: t.into_bytes() }
    }

    pub fn json<T: Serialize>(name: &str, v: &T) -> Self {
        let mut bytes = serde_json::to_vec_pretty(v).expect("serialisable");
        bytes.push(b'\n');
        Artifact { name: name.into(), ext: "json", bytes }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ArtifactRef {
    /// `<name>.<ext>`; unique within a manifest.
    pub name: String,
    /// Relative to the output root.
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct Versions {
    pub core: String,
    pub cli: String,
}

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config: JobConfig,
    pub config_hash: String,
    pub versions: Versions,
    pub seed: u64,
    pub workers: usize,
    pub wall_time_s: f64,
    pub artifacts: Vec<ArtifactRef>,
    pub summary: serde_json::Value,
}

pub struct Store {
    root: PathBuf,
}

impl Store {
    pub fn open(root: &Path) -> Result<Self, CliError> {
        for sub in ["objects", "runs"] {
            fs::create_dir_all(root.join(sub)).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
        }
        Ok(Store { root: root.to_path_buf() })
    }

    fn manifest_stem(command: &str, cfg_hash: &str) -> String {
        format!("{command}-{}", &cfg_hash[..16])
    }

    /// Manifest of an earlier run of `command` with this config.
    pub fn cached(&self, command: &str, cfg_hash: &str) -> Option<PathBuf> {
        let p = self.root.join("runs").join(format!("{}.json", Self::manifest_stem(command, cfg_hash)));
        p.is_file().then_some(p)
    }

    pub fn put(&self, a: &Artifact) -> Result<ArtifactRef, CliError> {
        let digest = sha256_hex(&a.bytes);
        let file = format!("objects/{}-{}.{}", a.name, &digest[..16], a.ext);
        let path = self.root.join(&file);
        if !path.exists() {
            write_new(&path, &a.bytes)?;
        }
        Ok(ArtifactRef { name: format!("{}.{}", a.name, a.ext), file, sha256: digest, bytes: a.bytes.len() })
    }

    /// Writes the manifest under the first free name; returns its path.
    pub fn put_manifest(&self, m: &Manifest) -> Result<PathBuf, CliError> {
        let stem = Self::manifest_stem(&m.command, &m.config_hash);
        let mut bytes = serde_json::to_vec_pretty(m).expect("serialisable");
        bytes.push(b'\n');
        let runs = self.root.join("runs");
        let mut k = 0usize;
        loop {
            let name = if k == 0 { format!("{stem}.json") } else { format!("{stem}.{k}.json") };
            let path = runs.join(name);
            if !path.exists() {
                write_new(&path, &bytes)?;
                return Ok(path);
            }
            k += 1;
        }
    }
}

/// Creates `path` through a temporary file so readers never see partial content.
fn write_new(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(bytes).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02e23, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
    }

    #[test]
    fn csv_quotes_and_crlf() {
        let mut t = Table::new(&["a", "b"]);
        t.row(["x,y", "plain"]);
        assert_eq!(t.into_bytes(), b"a,b\r\n\"x,y\",plain\r\n");
    }

    #[test]
    fn objects_are_content_addressed() {
        let dir = tempfile::tempdir().unwrap();
        let s = Store::open(dir.path()).unwrap();
        let a = Artifact { name: "t".into(), ext: "csv", bytes: b"1\r\n".to_vec() };
        let r1 = s.put(&a).unwrap();
        let r2 = s.put(&a).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(fs::read(dir.path().join(&r1.file)).unwrap(), b"1\r\n");
        let b = Artifact { bytes: b"2\r\n".to_vec(), ..a };
        assert_ne!(s.put(&b).unwrap().file, r1.file);
    }
}
