use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn tests_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests")
}

pub fn fixture(name: &str) -> String {
    tests_dir().join("fixtures").join(name).display().to_string()
}

pub fn pcat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcat")).args(args).output().expect("binary runs")
}

/// Structural equality with numbers compared to `1e-12·(1 + max|x|)`.
pub fn approx_eq(a: &Value, b: &Value, path: &str) -> Result<(), String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            if (x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs())) {
                Ok(())
            } else {
                Err(format!("{path}: {x} != {y}"))
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Err(format!("{path}: length {} != {}", x.len(), y.len()));
            }
            x.iter().zip(y).enumerate().try_for_each(|(i, (p, q))| approx_eq(p, q, &format!("{path}[{i}]")))
        }
        (Value::Object(x), Value::Object(y)) => {
            let mut kx: Vec<_> = x.keys().collect();
            let mut ky: Vec<_> = y.keys().collect();
            kx.sort();
            ky.sort();
            if kx != ky {
                return Err(format!("{path}: keys {kx:?} != {ky:?}"));
            }
            x.iter().try_for_each(|(k, v)| approx_eq(v, &y[k], &format!("{path}.{k}")))
        }
        _ if a == b => Ok(()),
        _ => Err(format!("{path}: {a} != {b}")),
    }
}

/// Compares against `tests/golden/<name>.json`; `PCAT_BLESS=1` rewrites the file first.
pub fn compare_golden(name: &str, actual: &Value) -> Result<(), String> {
    let path = tests_dir().join("golden").join(format!("{name}.json"));
    if std::env::var_os("PCAT_BLESS").is_some() {
        fs::write(&path, serde_json::to_string_pretty(actual).unwrap() + "\n").unwrap();
    }
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", Path::new(&path).display()))?;
    let expected: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    approx_eq(actual, &expected, name)
}
