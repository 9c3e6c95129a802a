//! Run-directory plumbing: config snapshots, CSV/JSON artifacts and the
//! content hash that makes a run reproducible and comparable.

use attostm_core::config::RawConfig;
use attostm_core::units;
use attostm_core::Spectrum;
use sha2::{Digest, Sha256};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// A directory receiving the artifacts of one run. Every file written
/// through it feeds the accumulated content hash.
pub struct RunDir {
    pub path: PathBuf,
    hasher: Sha256,
}

impl RunDir {
    pub fn create(path: &Path) -> io::Result<RunDir> {
        fs::create_dir_all(path)?;
        Ok(RunDir { path: path.to_path_buf(), hasher: Sha256::new() })
    }

    pub fn subdir(&self, name: &str) -> io::Result<RunDir> {
        RunDir::create(&self.path.join(name))
    }

    pub fn write(&mut self, name: &str, content: &str) -> io::Result<()> {
        self.hasher.update(name.as_bytes());
        self.hasher.update(content.as_bytes());
        fs::write(self.path.join(name), content)
    }

    /// Snapshot of the exact configuration this run used.
    pub fn write_config_snapshot(&mut self, raw: &RawConfig) -> io::Result<()> {
        let text = toml::to_string_pretty(raw)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        self.write("config.snapshot.toml", &text)
    }

    pub fn write_spectrum_csv(&mut self, name: &str, s: &Spectrum) -> io::Result<()> {
        let mut out = String::from("energy_eV,probability_density\n");
        for (e, v) in s.energies.iter().zip(&s.values) {
            out.push_str(&format!("{:.6},{:.9e}\n", units::au_to_ev(*e), v));
        }
        self.write(name, &out)
    }

    pub fn write_json<T: serde::Serialize>(&mut self, name: &str, value: &T) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    /// Hex digest over everything written so far, in write order.
    pub fn content_hash(&self) -> String {
        let h = self.hasher.clone().finalize();
        h.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Generic CSV writer: header line plus formatted rows.
pub fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_tracks_content_and_order() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = RunDir::create(dir.path()).unwrap();
        a.write("x.csv", "1,2\n").unwrap();
        a.write("y.csv", "3,4\n").unwrap();
        let mut b = RunDir::create(dir.path()).unwrap();
        b.write("x.csv", "1,2\n").unwrap();
        b.write("y.csv", "3,4\n").unwrap();
        assert_eq!(a.content_hash(), b.content_hash());
        let mut c = RunDir::create(dir.path()).unwrap();
        c.write("y.csv", "3,4\n").unwrap();
        c.write("x.csv", "1,2\n").unwrap();
        assert_ne!(a.content_hash(), c.content_hash());
    }

    #[test]
    fn spectrum_csv_round_trips_units() {
        let dir = tempfile::tempdir().unwrap();
        let mut rd = RunDir::create(dir.path()).unwrap();
        let s = Spectrum::new(
            vec![units::ev_to_au(1.0), units::ev_to_au(2.0)],
            vec![0.5, 0.25],
            "tdse",
        )
        .unwrap();
        rd.write_spectrum_csv("spectrum.csv", &s).unwrap();
        let text = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "energy_eV,probability_density");
        assert!(lines.next().unwrap().starts_with("1.000000,"));
    }
}
