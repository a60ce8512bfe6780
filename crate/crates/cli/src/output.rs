use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use lk_core::linalg::Matrix;
use serde::Serialize;

use crate::error::CliError;

/// Decimal form with 17 significant digits, which round-trips every `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `--out` file or stdout.
pub fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn io_err(out: Option<&Path>, e: io::Error) -> CliError {
    CliError::io(out.map_or("<stdout>".to_string(), |p| p.display().to_string()), e)
}

pub fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_err(out, e.into()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| io_err(out, e))
}

pub fn write_csv(out: Option<&Path>, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let w = sink(out)?;
    let mut writer = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| io_err(out, e.into());
    writer.write_record(header).map_err(csv_err)?;
    for row in rows {
        writer.write_record(row).map_err(csv_err)?;
    }
    writer.flush().map_err(|e| io_err(out, e))
}

/// Sidecar path: `P.bin` becomes `P.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

/// Row-major little-endian binary64 dump.
pub fn write_matrix(path: &Path, m: &Matrix) -> Result<(), CliError> {
    let err = |e| CliError::io(path.display().to_string(), e);
    let mut w = BufWriter::new(File::create(path).map_err(err)?);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            w.write_all(&m[(i, j)].to_le_bytes()).map_err(err)?;
        }
    }
    w.flush().map_err(err)
}
