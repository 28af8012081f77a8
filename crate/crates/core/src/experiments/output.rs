//! CSV tables: header row, 17 significant digits, `inf` for infinite values.

use std::io::Write;

use super::fit::ExponentEstimate;
use super::sweep::{BinarySweep, ChernoffReport, MultiSweep, PlanReport};
use crate::error::{Error, Result};

pub fn format_value(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

fn write_table<W: Write>(out: W, header: &[String], rows: &[Vec<String>]) -> Result<W> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(row).map_err(io_err)?;
    }
    w.into_inner().map_err(io_err)
}

fn write_fit_comment<W: Write>(mut out: W, fit: Option<&ExponentEstimate>) -> Result<()> {
    if let Some(fit) = fit {
        let window: Vec<String> = fit.window().iter().map(usize::to_string).collect();
        let r2 = match fit {
            ExponentEstimate::Fitted(f) => format_value(f.r_squared),
            ExponentEstimate::Infinite { .. } => "nan".into(),
        };
        writeln!(
            out,
            "# fit slope={} r_squared={} window={}",
            format_value(fit.slope()),
            r2,
            window.join(";")
        )
        .map_err(io_err)?;
    }
    Ok(())
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// Columns `n,error,exponent`, then a `# fit` comment line.
pub fn write_binary_csv<W: Write>(out: W, sweep: &BinarySweep) -> Result<()> {
    let rows: Vec<Vec<String>> = sweep
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                format_value(r.error),
                format_value(r.exponent),
            ]
        })
        .collect();
    let out = write_table(out, &strings(&["n", "error", "exponent"]), &rows)?;
    write_fit_comment(out, sweep.fit.as_ref())
}

/// Columns `n,err_1..err_r,error,exponent`, plus `std_error` for Monte Carlo.
pub fn write_multi_csv<W: Write>(out: W, sweep: &MultiSweep) -> Result<()> {
    let r = sweep
        .rows
        .first()
        .map_or(0, |row| row.result.per_hypothesis_error.len());
    let with_se = sweep
        .rows
        .iter()
        .any(|row| row.result.averaged_standard_error.is_some());
    let mut header = vec!["n".to_string()];
    header.extend((1..=r).map(|i| format!("err_{i}")));
    header.extend(strings(&["error", "exponent"]));
    if with_se {
        header.push("std_error".into());
    }
    let rows: Vec<Vec<String>> = sweep
        .rows
        .iter()
        .map(|row| {
            let mut rec = vec![row.n.to_string()];
            rec.extend(
                row.result
                    .per_hypothesis_error
                    .iter()
                    .map(|&e| format_value(e)),
            );
            rec.push(format_value(row.result.averaged_error));
            rec.push(format_value(row.exponent));
            if with_se {
                rec.push(format_value(
                    row.result.averaged_standard_error.unwrap_or(f64::NAN),
                ));
            }
            rec
        })
        .collect();
    let out = write_table(out, &header, &rows)?;
    write_fit_comment(out, sweep.fit.as_ref())
}

/// One row per pair: `i,j,xi,s_star,source` (1-based hypothesis indices).
pub fn write_chernoff_csv<W: Write>(out: W, report: &ChernoffReport) -> Result<()> {
    let d = &report.distances;
    let rows: Vec<Vec<String>> = d
        .pairs
        .pairs()
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| {
            vec![
                (i + 1).to_string(),
                (j + 1).to_string(),
                format_value(d.xi[k]),
                format_value(d.s_star[k]),
                d.sources[k].to_string(),
            ]
        })
        .collect();
    write_table(out, &strings(&["i", "j", "xi", "s_star", "source"]), &rows)?;
    Ok(())
}

/// One row per block: `k,i,j,weight,length,xi`.
pub fn write_plan_csv<W: Write>(out: W, report: &PlanReport) -> Result<()> {
    let d = &report.chernoff.distances;
    let rows: Vec<Vec<String>> = d
        .pairs
        .pairs()
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| {
            vec![
                (k + 1).to_string(),
                (i + 1).to_string(),
                (j + 1).to_string(),
                format_value(report.plan.weights()[k]),
                report.plan.lengths()[k].to_string(),
                format_value(d.xi[k]),
            ]
        })
        .collect();
    write_table(
        out,
        &strings(&["k", "i", "j", "weight", "length", "xi"]),
        &rows,
    )?;
    Ok(())
}
