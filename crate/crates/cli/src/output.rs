//! CSV and plain-text rendering of study results.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CliError, CliResult};
use crate::study::{ResultRow, SpeedupTable};

pub const CSV_HEADER: [&str; 9] = [
    "scheme",
    "steps",
    "dt",
    "error_inf",
    "error_l2",
    "wall_ms",
    "workers",
    "restarts",
    "observed_order",
];

/// 17 significant digits: enough to read the identical `f64` back.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(CSV_HEADER).map_err(csv_err(path))?;
    for r in rows {
        w.write_record([
            r.scheme.clone(),
            r.steps.to_string(),
            fmt_float(r.dt),
            fmt_opt(r.error_inf),
            fmt_opt(r.error_l2),
            fmt_float(r.wall_ms),
            r.workers.to_string(),
            r.restarts.to_string(),
            fmt_opt(r.observed_order),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_csv(path: &Path) -> CliResult<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = r.headers().map_err(csv_err(path))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(CliError::Config(format!(
            "{}: unexpected header",
            path.display()
        )));
    }
    let bad = |what: &str| CliError::Config(format!("{}: malformed {what}", path.display()));
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        let num = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(CSV_HEADER[i]));
        let opt = |i: usize| {
            if rec[i].is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        let int = |i: usize| rec[i].parse::<usize>().map_err(|_| bad(CSV_HEADER[i]));
        rows.push(ResultRow {
            scheme: rec[0].to_string(),
            steps: int(1)?,
            dt: num(2)?,
            error_inf: opt(3)?,
            error_l2: opt(4)?,
            wall_ms: num(5)?,
            workers: int(6)?,
            restarts: int(7)?,
            observed_order: opt(8)?,
        });
    }
    Ok(rows)
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "failed".to_string(), |v| format!("{v:.3e}"))
}

pub fn format_rows(rows: &[ResultRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<10} {:>7} {:>11} {:>11} {:>11} {:>10} {:>7} {:>8} {:>7}",
        "scheme", "steps", "dt", "err_inf", "err_l2", "wall_ms", "workers", "restarts", "order"
    );
    for r in rows {
        let order = r
            .observed_order
            .map_or_else(|| "-".to_string(), |o| format!("{o:.2}"));
        let _ = writeln!(
            s,
            "{:<10} {:>7} {:>11.4e} {:>11} {:>11} {:>10.1} {:>7} {:>8} {:>7}",
            r.scheme,
            r.steps,
            r.dt,
            cell(r.error_inf),
            cell(r.error_l2),
            r.wall_ms,
            r.workers,
            r.restarts,
            order
        );
    }
    s
}

pub fn format_speedup(table: &SpeedupTable) -> String {
    let mut s = format!(
        "{} speedup, {} steps, {} restart(s)\n{:>7} {:>10} {:>8}\n",
        table.scheme, table.steps, table.restarts, "workers", "wall_ms", "speedup"
    );
    for r in &table.rows {
        let _ = writeln!(s, "{:>7} {:>10.1} {:>8.2}", r.workers, r.wall_ms, r.speedup);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> std::path::PathBuf {
        std::env::temp_dir().join(format!("ridc-cli-{}-{name}.csv", std::process::id()))
    }

    #[test]
    fn header_only() {
        let path = tmp("empty");
        emit_csv(&[], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "scheme,steps,dt,error_inf,error_l2,wall_ms,workers,restarts,observed_order\n"
        );
        assert!(read_csv(&path).unwrap().is_empty());
        std::fs::remove_file(path).unwrap();
    }

    #[test]
    fn round_trip() {
        let rows = vec![
            ResultRow {
                scheme: "ridc4-fbe".into(),
                steps: 100,
                dt: 0.04,
                error_inf: Some(1.0 / 3.0),
                error_l2: Some(std::f64::consts::PI * 1e-9),
                wall_ms: 12.345678901234567,
                workers: 4,
                restarts: 2,
                observed_order: None,
            },
            ResultRow {
                scheme: "fbe".into(),
                steps: 200,
                dt: 0.02,
                error_inf: None,
                error_l2: None,
                wall_ms: 0.0,
                workers: 1,
                restarts: 1,
                observed_order: Some(-0.1 + 1e-17),
            },
        ];
        let path = tmp("rows");
        emit_csv(&rows, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.lines().all(|l| l.split(',').count() == 9));
        assert_eq!(read_csv(&path).unwrap(), rows);
        std::fs::remove_file(path).unwrap();
    }

    #[test]
    fn unwritable_path_names_the_path() {
        let path = Path::new("/nonexistent-dir/out.csv");
        let err = emit_csv(&[], path).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/out.csv"));
    }
}
