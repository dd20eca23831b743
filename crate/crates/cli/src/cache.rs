//! Memoized results under `TEICHKIT_CACHE_DIR`, keyed by the coefficient
//! hash, the grid and a hash of the remaining settings.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::result::{ExperimentResult, Table};

pub const CACHE_ENV: &str = "TEICHKIT_CACHE_DIR";

#[derive(Serialize, Deserialize)]
struct Entry {
    result: ExperimentResult,
    tables: BTreeMap<String, Table>,
}

fn digest(v: &impl Serialize) -> String {
    let bytes = serde_json::to_vec(v).expect("serializable key");
    hex::encode(Sha256::digest(bytes))
}

/// Cache file for `cfg`, or `None` for commands that are never cached.
pub fn entry_path(dir: &Path, cfg: &ExperimentConfig) -> Option<PathBuf> {
    if cfg.command == "verify-all" {
        return None;
    }
    let mut key = cfg.clone();
    key.output_path = None;
    let mu = digest(&cfg.mu);
    let grid = match cfg.grid {
        Some(g) => match g.half_width {
            Some(w) => format!("n{}-w{w}", g.n),
            None => format!("n{}", g.n),
        },
        None => "default".to_string(),
    };
    let rest = digest(&key);
    Some(dir.join(format!(
        "{}-{}-{grid}-{}.json",
        cfg.command,
        &mu[..16],
        &rest[..16]
    )))
}

pub fn load(path: &Path) -> Option<ExperimentResult> {
    let text = std::fs::read_to_string(path).ok()?;
    let entry: Entry = serde_json::from_str(&text).ok()?;
    let mut r = entry.result;
    r.tables = entry.tables;
    Some(r)
}

pub fn store(path: &Path, r: &ExperimentResult) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let entry = Entry {
        result: r.clone(),
        tables: r.tables.clone(),
    };
    // Write then rename so concurrent jobs never read a partial file.
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    std::fs::write(&tmp, serde_json::to_vec(&entry)?)?;
    std::fs::rename(tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::GridConfig;
    use teichkit_core::domains::CoefficientSpec;

    #[test]
    fn keys_separate_coefficients_and_grids() {
        let dir = Path::new("/c");
        let mut a = ExperimentConfig::new("norm");
        a.mu = Some(CoefficientSpec::ConstantDisk {
            k: 0.3,
            k_im: 0.0,
            r: 0.5,
        });
        let mut b = a.clone();
        b.grid = Some(GridConfig {
            n: 256,
            half_width: Some(4.0),
        });
        let mut c = a.clone();
        c.output_path = Some("elsewhere.json".into());
        let pa = entry_path(dir, &a).unwrap();
        assert_ne!(pa, entry_path(dir, &b).unwrap());
        assert_eq!(pa, entry_path(dir, &c).unwrap());
        assert!(entry_path(dir, &ExperimentConfig::new("verify-all")).is_none());
    }

    #[test]
    fn roundtrip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::new("norm");
        let path = entry_path(dir.path(), &cfg).unwrap();
        let mut r = ExperimentResult::new(cfg);
        r.verdict("finite", true);
        let mut t = Table::new(&["a"]);
        t.push(vec!["1".into()]);
        r.tables.insert("t".into(), t);
        store(&path, &r).unwrap();
        let back = load(&path).unwrap();
        assert_eq!(back, r);
    }
}
