use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::json;
use sievelab::dataset::{write_csv, Csv, SCHEMA_VERSION};
use sievelab::{Error, Result};

/// Collects emitted files and writes `manifest.json` next to them.
pub struct Output {
    dir: PathBuf,
    checksums: BTreeMap<String, String>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            checksums: BTreeMap::new(),
        })
    }

    pub fn emit(&mut self, name: &str, csv: &Csv) -> Result<()> {
        let sum = write_csv(&self.dir.join(name), csv)?;
        self.checksums.insert(name.to_string(), sum);
        Ok(())
    }

    pub fn finish(self, seed: u64, kmax: Option<u64>) -> Result<()> {
        // argv[0] varies with install location; record the tool name instead
        let argv: Vec<String> = std::iter::once("sievelab".to_string())
            .chain(std::env::args().skip(1))
            .collect();
        let manifest = json!({
            "command_line": argv.join(" "),
            "argv": argv,
            "seed": seed,
            "kmax": kmax,
            "version": env!("CARGO_PKG_VERSION"),
            "schema_version": SCHEMA_VERSION,
            "outputs": self.checksums,
        });
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}
