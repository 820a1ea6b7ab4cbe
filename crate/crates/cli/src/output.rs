//! Files written into the output directory.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use cal_core::dynamics::{write_csv, Trajectory, TrajectoryMeta};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub struct OutDir {
    root: PathBuf,
}

#[derive(Debug, Serialize)]
struct CsvSidecar<'a> {
    file: &'a str,
    sha256: String,
    rows: usize,
    dim: usize,
    meta: &'a TrajectoryMeta,
}

impl OutDir {
    pub fn create(root: impl Into<PathBuf>) -> CliResult<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
        Ok(Self { root })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let p = self.path(name);
        fs::write(&p, bytes).map_err(|e| CliError::io(&p, e))?;
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).expect("report serializes");
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Trajectory CSV plus `<name>.meta.json` with its SHA-256.
    pub fn write_trajectory(&self, name: &str, traj: &Trajectory) -> CliResult<PathBuf> {
        let mut buf = Vec::new();
        write_csv(traj, &mut buf).map_err(|e| CliError::io(self.path(name), e))?;
        let p = self.write_bytes(name, &buf)?;
        let sidecar = CsvSidecar {
            file: name,
            sha256: hex::encode(Sha256::digest(&buf)),
            rows: traj.states.len(),
            dim: traj.dim(),
            meta: &traj.meta,
        };
        self.write_json(&format!("{name}.meta.json"), &sidecar)?;
        Ok(p)
    }

    /// Two whitespace-separated columns, one pair per line.
    pub fn write_dat(&self, name: &str, header: (&str, &str), rows: &[(f64, f64)]) -> CliResult<PathBuf> {
        let p = self.path(name);
        let f = fs::File::create(&p).map_err(|e| CliError::io(&p, e))?;
        let mut w = BufWriter::new(f);
        let io = |e| CliError::io(&p, e);
        writeln!(w, "# {} {}", header.0, header.1).map_err(io)?;
        for (x, y) in rows {
            writeln!(w, "{x:.16e} {y:.16e}").map_err(io)?;
        }
        w.flush().map_err(io)?;
        Ok(p)
    }

    /// `<prefix>_q<i>.dat` with columns `t q_i`, one file per coordinate.
    pub fn write_q_plots(&self, prefix: &str, traj: &Trajectory) -> CliResult<()> {
        for i in 0..traj.dim() {
            let rows: Vec<(f64, f64)> = traj.states.iter().map(|s| (s.t, s.q[i])).collect();
            let col = format!("q_{}", i + 1);
            self.write_dat(&format!("{prefix}_q{}.dat", i + 1), ("t", &col), &rows)?;
        }
        Ok(())
    }

    pub fn root(&self) -> &Path {
        &self.root
    }
}
