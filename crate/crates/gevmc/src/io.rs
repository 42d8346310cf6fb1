//! CSV and JSON file formats.
//!
//! Series files hold one value per row, or a label and a value, with an
//! optional header row. Chain files have a header of parameter names and one
//! row per retained draw on the natural scale. Numbers are written with
//! Rust's shortest round-trip formatting so a file read back gives the same
//! `f64`s bit for bit.

use std::fs;
use std::io::Write;
use std::path::Path;

use gevmc_core::sampler::ChainSettings;
use gevmc_core::{PosteriorSummary, SampleChain, SamplerKind, TimeSeries};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| AppError::Usage(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let res = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = res {
        let _ = fs::remove_file(&tmp);
        return Err(AppError::io(path, e));
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|source| AppError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|source| AppError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_reader(path: &Path, headers: bool) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| AppError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(headers)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn csv_error(path: &Path, e: csv::Error) -> AppError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => AppError::io(path, io),
        kind => AppError::parse(path, line, format!("{kind:?}")),
    }
}

fn parse_value(path: &Path, line: u64, field: &str) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(AppError::parse(path, line, format!("non-finite value {v}"))),
        Err(_) => Err(AppError::parse(
            path,
            line,
            format!("cannot parse {field:?} as a number"),
        )),
    }
}

/// Reads a series: one column of values, or two columns of `label,value`.
/// A first row whose value field is not numeric is taken as a header.
pub fn read_series(path: &Path) -> Result<TimeSeries> {
    let mut rdr = csv_reader(path, false)?;
    let mut width = None;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if w != 1 && w != 2 {
            return Err(AppError::parse(
                path,
                line,
                format!("expected 1 or 2 columns, found {w}"),
            ));
        }
        if rec.len() != w {
            return Err(AppError::parse(
                path,
                line,
                format!("expected {w} columns, found {}", rec.len()),
            ));
        }
        let field = &rec[w - 1];
        if i == 0 && field.parse::<f64>().is_err() {
            continue;
        }
        values.push(parse_value(path, line, field)?);
        if w == 2 {
            labels.push(rec[0].to_string());
        }
    }
    if values.is_empty() {
        return Err(AppError::parse(path, 0, "no observations"));
    }
    let series = if width == Some(2) {
        TimeSeries::with_timestamps(values, labels)?
    } else {
        TimeSeries::new(values)?
    };
    Ok(series)
}

pub fn series_to_csv(series: &TimeSeries) -> Vec<u8> {
    let mut out = String::new();
    match series.timestamps() {
        Some(ts) => {
            out.push_str("label,value\n");
            for (t, v) in ts.iter().zip(series.values()) {
                out.push_str(&format!("{t},{v}\n"));
            }
        }
        None => {
            out.push_str("value\n");
            for v in series.values() {
                out.push_str(&format!("{v}\n"));
            }
        }
    }
    out.into_bytes()
}

pub fn chain_to_csv(chain: &SampleChain) -> Vec<u8> {
    let mut out = chain.names().join(",");
    out.push('\n');
    for row in chain.rows() {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out.into_bytes()
}

/// Reads draws written by [`chain_to_csv`] (or any header-plus-numbers CSV).
pub fn read_chain(path: &Path) -> Result<SampleChain> {
    let mut rdr = csv_reader(path, true)?;
    let names: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if names.is_empty() || names.iter().any(String::is_empty) {
        return Err(AppError::parse(path, 1, "missing or empty column names"));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != names.len() {
            return Err(AppError::parse(
                path,
                line,
                format!("expected {} columns, found {}", names.len(), rec.len()),
            ));
        }
        rows.push(
            rec.iter()
                .map(|f| parse_value(path, line, f))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    if rows.is_empty() {
        return Err(AppError::parse(path, 1, "chain has no draws"));
    }
    Ok(SampleChain::from_rows(names, &rows)?)
}

/// Metadata written next to a chain CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSidecar {
    pub sampler: SamplerKind,
    pub parameters: Vec<String>,
    pub draws: usize,
    /// Absent for chains that were read back from a file.
    pub acceptance_rate: Option<f64>,
    pub divergences: usize,
    pub seed: u64,
    pub settings: ChainSettings,
}

impl ChainSidecar {
    pub fn new(chain: &SampleChain) -> Self {
        let rate = chain.acceptance_rate();
        Self {
            sampler: chain.sampler(),
            parameters: chain.names().to_vec(),
            draws: chain.len(),
            acceptance_rate: rate.is_finite().then_some(rate),
            divergences: chain.divergences(),
            seed: chain.settings().seed,
            settings: chain.settings().clone(),
        }
    }
}

/// One summary per parameter, in chain column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub parameter: String,
    #[serde(flatten)]
    pub summary: PosteriorSummary,
}

/// Fixed columns `parameter,mean,sd,mode,median,lower,upper,interval_prob`.
/// An omitted mode is an empty field.
pub fn summaries_to_csv(rows: &[ParameterSummary]) -> Vec<u8> {
    let mut out = String::from("parameter,mean,sd,mode,median,lower,upper,interval_prob\n");
    for r in rows {
        let s = &r.summary;
        let mode = s.mode.map(|m| m.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.parameter, s.mean, s.sd, mode, s.median, s.lower, s.upper, s.interval_prob
        ));
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn series_with_and_without_header() {
        let dir = tempfile::tempdir().unwrap();
        let a = read_series(&write(dir.path(), "a.csv", "1.5\n2\n-3e-1\n")).unwrap();
        assert_eq!(a.values(), &[1.5, 2.0, -0.3]);
        let b = read_series(&write(
            dir.path(),
            "b.csv",
            "year,level\n1923, 4.03\n1924,3.83\n",
        ))
        .unwrap();
        assert_eq!(b.values(), &[4.03, 3.83]);
        assert_eq!(
            b.timestamps().unwrap(),
            &["1923".to_string(), "1924".to_string()]
        );
    }

    #[test]
    fn malformed_row_names_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "bad.csv", "value\n1.0\n2.0\nabc\n4.0\n");
        let err = read_series(&p).unwrap_err();
        assert!(matches!(err, AppError::Parse { line: 4, .. }), "{err}");
        assert!(err.to_string().contains("line 4"));
        assert_eq!(err.exit_code(), 1);
        let p = write(dir.path(), "ragged.csv", "1,2\n3\n");
        assert!(matches!(
            read_series(&p).unwrap_err(),
            AppError::Parse { line: 2, .. }
        ));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = read_series(Path::new("/nonexistent/series.csv")).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn chain_csv_round_trips_exactly() {
        let rows = vec![
            vec![0.1 + 0.2, -1e-300, 3.0],
            vec![f64::MIN_POSITIVE, 1.0 / 3.0, -7.25],
        ];
        let names = vec!["mu".to_string(), "sigma".to_string(), "xi".to_string()];
        let chain = SampleChain::from_rows(names, &rows).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("chain.csv");
        write_atomic(&p, &chain_to_csv(&chain)).unwrap();
        let back = read_chain(&p).unwrap();
        assert_eq!(back.names(), chain.names());
        assert_eq!(back.row(0), chain.row(0));
        assert_eq!(back.row(1), chain.row(1));
    }

    #[test]
    fn atomic_write_leaves_no_temporary_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(write_atomic(&dir.path().join("missing/out.txt"), b"x").is_err());
    }
}
