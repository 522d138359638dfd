//! Matrix and vector files, result tables and plot data.
//!
//! Matrices are read from either format below, picked by the leading bytes:
//!
//! * binary: the magic `NNSM1`, `m` and `n` as little-endian `u64`, a layout
//!   byte (`0` row-major, `1` column-major) and `m·n` little-endian `f64`;
//! * CSV: one matrix row per line, comma separated, no header.
//!
//! Vectors are plain text with values separated by commas or newlines.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use ndrt_core::bench::{SweepSummary, TrialOutcome, THRESHOLD_LEVELS};
use ndrt_core::{Algorithm, Matrix};

use crate::error::{CliError, CliResult};
use crate::verify::VerifyLine;

pub const MATRIX_MAGIC: &[u8; 5] = b"NNSM1";
const HEADER_LEN: usize = 5 + 8 + 8 + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    RowMajor = 0,
    ColMajor = 1,
}

pub fn read_matrix(path: &Path) -> CliResult<Matrix> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    if bytes.starts_with(MATRIX_MAGIC) {
        decode_matrix(&bytes).map_err(|m| CliError::format(path, m))
    } else {
        read_matrix_csv(path, &bytes)
    }
}

fn decode_matrix(bytes: &[u8]) -> Result<Matrix, String> {
    if bytes.len() < HEADER_LEN {
        return Err("truncated header".into());
    }
    let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let (m, n) = (word(5) as usize, word(13) as usize);
    let layout = match bytes[21] {
        0 => Layout::RowMajor,
        1 => Layout::ColMajor,
        other => return Err(format!("unknown layout byte {other}")),
    };
    let expected = m
        .checked_mul(n)
        .and_then(|c| c.checked_mul(8))
        .ok_or("dimensions overflow")?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != expected {
        return Err(format!("expected {expected} data bytes for {m} x {n}, found {}", body.len()));
    }
    let data: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let out = match layout {
        Layout::RowMajor => Matrix::from_row_major(m, n, &data),
        Layout::ColMajor => Matrix::from_col_major(m, n, data),
    };
    out.map_err(|e| e.to_string())
}

fn read_matrix_csv(path: &Path, bytes: &[u8]) -> CliResult<Matrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(bytes);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::format(path, e.to_string()))?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| CliError::format(path, format!("row {}: cannot parse {f:?}", line + 1)))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    Matrix::from_rows(&refs).map_err(|e| CliError::format(path, e.to_string()))
}

pub fn write_matrix(path: &Path, a: &Matrix, layout: Layout) -> CliResult<()> {
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * a.rows() * a.cols());
    buf.extend_from_slice(MATRIX_MAGIC);
    buf.extend_from_slice(&(a.rows() as u64).to_le_bytes());
    buf.extend_from_slice(&(a.cols() as u64).to_le_bytes());
    buf.push(layout as u8);
    let data = match layout {
        Layout::RowMajor => a.to_row_major(),
        Layout::ColMajor => a.as_slice().to_vec(),
    };
    for v in data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, buf).map_err(|e| CliError::io(path, e))
}

pub fn read_vector(path: &Path) -> CliResult<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|f| !f.is_empty())
        .map(|f| {
            f.parse::<f64>()
                .map_err(|_| CliError::format(path, format!("cannot parse {f:?}")))
        })
        .collect()
}

pub fn write_vector(path: &Path, v: &[f64]) -> CliResult<()> {
    let mut text = String::with_capacity(v.len() * 24);
    for x in v {
        text.push_str(&format!("{x:e}\n"));
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::format(path, e.to_string())
}

/// Nonzero entries as `index,value`.
pub fn write_signal_csv(path: &Path, x: &[f64]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let err = csv_err(path);
    w.write_record(["index", "value"]).map_err(&err)?;
    for (i, v) in x.iter().enumerate().filter(|(_, v)| **v != 0.0) {
        w.write_record([i.to_string(), format!("{v:e}")]).map_err(&err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub const OUTCOME_HEADER: [&str; 8] = [
    "algo",
    "k",
    "trial",
    "seed",
    "success",
    "rel_error",
    "iters",
    "wall_time_s",
];

pub fn write_outcomes_csv(path: &Path, outcomes: &[TrialOutcome]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let err = csv_err(path);
    w.write_record(OUTCOME_HEADER).map_err(&err)?;
    for o in outcomes {
        w.write_record([
            o.algorithm.name().to_string(),
            o.k.to_string(),
            o.trial.to_string(),
            o.seed.to_string(),
            o.success.to_string(),
            format!("{:e}", o.rel_error),
            o.iterations.to_string(),
            format!("{:.6}", o.wall_time_s),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Per `(algorithm, k)` success frequency and mean time over successes.
pub fn write_summary_csv(path: &Path, summary: &SweepSummary) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let err = csv_err(path);
    w.write_record(["algo", "k", "success_freq", "mean_time_success"])
        .map_err(&err)?;
    for r in &summary.rows {
        w.write_record([
            r.algorithm.name().to_string(),
            r.k.to_string(),
            format!("{}", r.success_frequency),
            r.mean_time_success.map(|t| format!("{t:.6}")).unwrap_or_default(),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// One row per success level, one column per algorithm; empty cells mean no
/// grid point reached the level.
pub fn write_thresholds_csv(path: &Path, summary: &SweepSummary, algorithms: &[Algorithm]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let err = csv_err(path);
    let mut header = vec!["level".to_string()];
    header.extend(algorithms.iter().map(|a| a.name().to_string()));
    w.write_record(&header).map_err(&err)?;
    for level in THRESHOLD_LEVELS {
        let mut row = vec![format!("{level}")];
        row.extend(
            algorithms
                .iter()
                .map(|&a| summary.threshold(a, level).map(|k| k.to_string()).unwrap_or_default()),
        );
        w.write_record(&row).map_err(&err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Reads a thresholds table back as `(level, [(algorithm, k)])` rows.
pub fn read_thresholds_csv(path: &Path) -> CliResult<Vec<(f64, Vec<(Algorithm, Option<usize>)>)>> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = rdr.headers().map_err(csv_err(path))?.clone();
    let algs = header
        .iter()
        .skip(1)
        .map(|h| h.parse::<Algorithm>().map_err(|e| CliError::format(path, e.to_string())))
        .collect::<CliResult<Vec<_>>>()?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err(path))?;
        let bad = |f: &str| CliError::format(path, format!("cannot parse {f:?}"));
        let level = rec[0].parse::<f64>().map_err(|_| bad(&rec[0]))?;
        let mut cells = Vec::new();
        for (a, f) in algs.iter().zip(rec.iter().skip(1)) {
            let k = if f.is_empty() {
                None
            } else {
                Some(f.parse::<usize>().map_err(|_| bad(f))?)
            };
            cells.push((*a, k));
        }
        out.push((level, cells));
    }
    Ok(out)
}

/// Two-column blocks per algorithm, separated by blank lines, for gnuplot's
/// `index` or any tool that reads whitespace-separated series.
/// `plot_success.dat` holds `k success_freq`; `plot_time.dat` holds
/// `k log2(mean_time_success)` at levels with at least one success.
pub fn write_plot_data(dir: &Path, summary: &SweepSummary, algorithms: &[Algorithm]) -> CliResult<()> {
    let success = dir.join("plot_success.dat");
    let time = dir.join("plot_time.dat");
    let mut ws = create(&success)?;
    let mut wt = create(&time)?;
    for (i, &a) in algorithms.iter().enumerate() {
        let sep = if i == 0 { "" } else { "\n\n" };
        write!(ws, "{sep}# {a}\n# k success_freq\n").map_err(|e| CliError::io(&success, e))?;
        write!(wt, "{sep}# {a}\n# k log2_mean_time_s\n").map_err(|e| CliError::io(&time, e))?;
        for r in summary.rows.iter().filter(|r| r.algorithm == a) {
            writeln!(ws, "{} {}", r.k, r.success_frequency).map_err(|e| CliError::io(&success, e))?;
            if let Some(t) = r.mean_time_success.filter(|t| *t > 0.0) {
                writeln!(wt, "{} {:.6}", r.k, t.log2()).map_err(|e| CliError::io(&time, e))?;
            }
        }
    }
    ws.flush().map_err(|e| CliError::io(&success, e))?;
    wt.flush().map_err(|e| CliError::io(&time, e))
}

/// One row per verification line.
pub fn write_verify_csv(path: &Path, lines: &[VerifyLine]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let err = csv_err(path);
    w.write_record(["check", "inequality", "trials", "violations", "worst_excess", "worst_ratio", "passed", "detail"])
        .map_err(&err)?;
    for l in lines {
        w.write_record([
            l.check.name().to_string(),
            l.report.name.to_string(),
            l.report.trials.to_string(),
            l.report.violations.to_string(),
            format!("{:e}", l.report.worst_excess),
            format!("{:e}", l.report.worst_ratio),
            l.passed().to_string(),
            l.detail.clone(),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
