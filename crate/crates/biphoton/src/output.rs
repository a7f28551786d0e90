//! Output files: CSV tables, JSON documents and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use biphoton_core::analytic::Quantity;
use biphoton_core::{CorrelationMap, DensityMatrix};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{AppError, AppResult};

pub const SWEEP_HEADER: &str = "delta_phi,delta_beta_over_c,value";
pub const RHO_HEADER: &str = "basis,11,12,21,22";
pub const BASIS_LABELS: [&str; 4] = ["11", "12", "21", "22"];

/// Shortest representation that parses back to the same `f64`. Plain
/// decimal for moderate magnitudes, exponent form otherwise, `NaN` for
/// undefined values.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if v.is_nan() {
        "NaN".to_string()
    } else if a == 0.0 || (1e-5..1e16).contains(&a) || a.is_infinite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn sweep_csv(map: &CorrelationMap, q: Quantity) -> String {
    let mut out = String::with_capacity(64 * map.points().len());
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for (p, b, v) in map.rows(q) {
        let _ = writeln!(out, "{},{},{}", format_number(p), format_number(b), format_number(v));
    }
    out
}

fn json_number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn sweep_json(map: &CorrelationMap) -> Value {
    let grid = map.grid();
    let mut doc = serde_json::Map::new();
    doc.insert(
        "delta_phi".into(),
        grid.delta_phi().iter().map(|&v| json_number(v)).collect(),
    );
    doc.insert(
        "delta_beta_over_c".into(),
        grid.delta_beta_over_c().iter().map(|&v| json_number(v)).collect(),
    );
    doc.insert("layout".into(), json!("delta_phi outer, delta_beta_over_c inner"));
    for q in Quantity::ALL {
        let values: Vec<Value> = map.rows(q).map(|(_, _, v)| json_number(v)).collect();
        doc.insert(q.name().into(), Value::Array(values));
    }
    Value::Object(doc)
}

/// `(real, imag)` CSV tables of a 4×4 matrix.
pub fn rho_csv(rho: &DensityMatrix) -> (String, String) {
    let table = |part: fn(biphoton_core::C64) -> f64| {
        let mut out = String::from(RHO_HEADER);
        out.push('\n');
        for (i, label) in BASIS_LABELS.iter().enumerate() {
            out.push_str(label);
            for j in 0..4 {
                out.push(',');
                out.push_str(&format_number(part(rho.get(i, j))));
            }
            out.push('\n');
        }
        out
    };
    (table(|z| z.re), table(|z| z.im))
}

pub fn counts_csv(counts: &[f64]) -> String {
    let mut out = String::from("projector_id,count\n");
    for (k, c) in counts.iter().enumerate() {
        let _ = writeln!(out, "{},{}", k + 1, format_number(*c));
    }
    out
}

pub fn to_json_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Writes data files into one directory and remembers their checksums.
pub struct OutputDir {
    dir: PathBuf,
    files: Vec<(String, String, usize)>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> AppResult<Self> {
        fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &str) -> AppResult<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| AppError::io(&path, e))?;
        let digest = hex::encode(Sha256::digest(contents.as_bytes()));
        self.files.push((name.to_string(), digest, contents.len()));
        Ok(path)
    }

    /// `manifest.json` with the config echo, per-file checksums and
    /// `run_info`, the only field that varies between identical runs.
    pub fn finish(self, command: &str, config: &Value, parameters: Value, run_info: Value) -> AppResult<PathBuf> {
        let files: Vec<Value> = self
            .files
            .iter()
            .map(|(name, sha, bytes)| json!({ "name": name, "sha256": sha, "bytes": bytes }))
            .collect();
        let manifest = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "parameters": parameters,
            "config": config,
            "files": files,
            "run_info": run_info,
        });
        let path = self.dir.join("manifest.json");
        fs::write(&path, to_json_text(&manifest)).map_err(|e| AppError::io(&path, e))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [
            0.0,
            -0.0,
            1.0,
            -0.25,
            1e-5,
            9.99e-6,
            1e-300,
            3.0e16,
            0.1 + 0.2,
            std::f64::consts::PI,
        ] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(1.5e-7), "1.5e-7");
        assert_eq!(format_number(f64::NAN), "NaN");
    }

    #[test]
    fn rho_table_layout() {
        let (re, im) = rho_csv(&DensityMatrix::maximally_mixed());
        let lines: Vec<_> = re.lines().collect();
        assert_eq!(lines[0], RHO_HEADER);
        assert_eq!(lines[1], "11,0.25,0,0,0");
        assert_eq!(lines.len(), 5);
        assert!(im.lines().skip(1).all(|l| l.ends_with(",0,0,0,0")));
    }
}
