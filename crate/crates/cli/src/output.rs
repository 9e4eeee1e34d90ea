use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::scenarios::{ScanRow, CSV_HEADER};

fn number(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v:.16e}"))
}

fn label<T: Serialize>(x: Option<T>) -> String {
    match x.map(|v| serde_json::to_value(v)) {
        Some(Ok(serde_json::Value::String(s))) => s,
        _ => String::new(),
    }
}

pub fn csv_bytes(rows: &[ScanRow]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            number(Some(r.parameter)),
            label(r.criterion),
            label(r.verdict),
            number(r.margin),
            number(r.lhs),
            number(r.rhs),
            number(r.ic_base),
            number(r.ic_probe),
            label(r.conclusion),
            number(r.witness_epsilon),
            number(r.witness_f),
            number(r.admissible_r),
        ])?;
    }
    w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))
}

/// `path` if absolute, else `dir/path`.
pub fn resolve(dir: &Path, path: Option<&str>, default_name: String) -> PathBuf {
    match path {
        Some(p) if Path::new(p).is_absolute() => PathBuf::from(p),
        Some(p) => dir.join(p),
        None => dir.join(default_name),
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io)?;
    }
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(bytes).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use cohpert::criteria::Verdict;

    #[test]
    fn csv_uses_seventeen_digits_and_empty_cells() {
        let row = ScanRow {
            parameter: 0.1,
            verdict: Some(Verdict::Fires),
            ..Default::default()
        };
        let text = String::from_utf8(csv_bytes(&[row]).unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(lines.next().unwrap(), "1.0000000000000001e-1,,fires,,,,,,,,,");
    }
}
