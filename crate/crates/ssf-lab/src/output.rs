//! Artifact writers. Curve CSVs and report JSONs are rendered fully in
//! memory and written through a temp-file-then-rename step, so a crash or
//! a concurrent reader never sees a half-written artifact.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use ssf_core::ssf::SsfCurve;

use crate::CliError;

/// Exact column contract for curve artifacts.
pub const CSV_HEADER: &str = "lambda,xi,method,epsilon,reliable";

/// 17 significant digits: enough for f64 round-trips.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Render a curve. `epsilon` is 0 for extrapolated and counting curves
/// (the emitted values are ε → 0 limits, never a single-ε slice).
pub fn curve_csv(curve: &SsfCurve) -> String {
    let mut s = String::with_capacity(64 * (curve.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for i in 0..curve.len() {
        s.push_str(&num(curve.lambdas[i]));
        s.push(',');
        s.push_str(&num(curve.values[i]));
        s.push(',');
        s.push_str(curve.method.tag());
        s.push(',');
        s.push_str(&num(0.0));
        s.push(',');
        s.push_str(if curve.reliable[i] { "true" } else { "false" });
        s.push('\n');
    }
    s
}

pub fn write_atomic(path: &Path, content: &str) -> Result<(), CliError> {
    let io_err = |e: std::io::Error| {
        CliError::Validation(format!("cannot write {}: {e}", path.display()))
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = std::path::PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(io_err)?;
    f.write_all(content.as_bytes()).map_err(io_err)?;
    f.sync_all().map_err(io_err)?;
    drop(f);
    fs::rename(&tmp, path).map_err(io_err)?;
    Ok(())
}

/// Write to the path when one is given, stdout otherwise.
pub fn deliver(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
