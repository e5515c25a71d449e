//! Rendering reports to files.
//!
//! Sweep CSVs carry the columns `theta_hat, p_plus_exact, p_minus_exact,
//! p_plus_sampled, p_minus_sampled, fi_model, fi_fit_lo90, fi_fit_hi90`,
//! one file per fitted fringe.

use std::path::{Path, PathBuf};

use super::config::OutputFormat;
use super::{svg, HarnessError, RunReport};

pub const FRINGE_COLUMNS: [&str; 8] = [
    "theta_hat",
    "p_plus_exact",
    "p_minus_exact",
    "p_plus_sampled",
    "p_minus_sampled",
    "fi_model",
    "fi_fit_lo90",
    "fi_fit_hi90",
];

pub const TOTAL_COLUMNS: [&str; 6] = [
    "theta_hat",
    "fi_model",
    "fi_fit",
    "fi_fit_lo90",
    "fi_fit_hi90",
    "fi_effective",
];

pub const ESTIMATION_COLUMNS: [&str; 8] = [
    "theta_true",
    "theta_hat",
    "std_dev",
    "std_dev_error",
    "crb",
    "effective_fi",
    "snl_delta",
    "limit_delta",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RenderOptions {
    pub format: OutputFormat,
    pub svg: bool,
}

/// A rendered output file, named relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

fn csv_table<const N: usize>(
    header: [&str; N],
    rows: impl Iterator<Item = [f64; N]>,
) -> Result<Vec<u8>, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| HarnessError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(io)?;
    }
    w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))
}

/// All files for `report`, in a fixed order.
pub fn render(report: &RunReport, options: RenderOptions) -> Result<Vec<Artifact>, HarnessError> {
    let name = &report.config.name;
    let mut out = Vec::new();
    let json = serde_json::to_vec_pretty(report).map_err(|e| HarnessError::Io(e.to_string()))?;
    out.push(Artifact {
        name: format!("{name}.json"),
        bytes: json,
    });
    if options.format == OutputFormat::Csv {
        if let Some(sweep) = &report.sweep {
            for f in &sweep.fringes {
                let rows = f.points.iter().map(|p| {
                    [
                        p.theta_hat,
                        p.p_plus_exact,
                        p.p_minus_exact,
                        p.p_plus_sampled,
                        p.p_minus_sampled,
                        p.fi_model,
                        p.fi_fit_lo90,
                        p.fi_fit_hi90,
                    ]
                });
                out.push(Artifact {
                    name: format!("{name}_fringe{}.csv", f.group),
                    bytes: csv_table(FRINGE_COLUMNS, rows)?,
                });
            }
            if sweep.fringes.len() > 1 {
                let rows = sweep.totals.iter().map(|t| {
                    [
                        t.theta_hat,
                        t.fi_model,
                        t.fi_fit,
                        t.fi_fit_lo90,
                        t.fi_fit_hi90,
                        t.fi_effective,
                    ]
                });
                out.push(Artifact {
                    name: format!("{name}_total.csv"),
                    bytes: csv_table(TOTAL_COLUMNS, rows)?,
                });
            }
        }
        if let Some(est) = &report.estimation {
            let rows = est.points.iter().map(|p| {
                let r = &p.result;
                [
                    r.theta_true,
                    r.theta_hat,
                    r.std_dev,
                    r.std_dev_error,
                    r.crb,
                    r.effective_fi,
                    p.snl_delta,
                    p.limit_delta.unwrap_or(f64::NAN),
                ]
            });
            out.push(Artifact {
                name: format!("{name}_estimation.csv"),
                bytes: csv_table(ESTIMATION_COLUMNS, rows)?,
            });
        }
    }
    if options.svg {
        if let Some(sweep) = &report.sweep {
            for f in &sweep.fringes {
                out.push(Artifact {
                    name: format!("{name}_fringe{}.svg", f.group),
                    bytes: svg::fringe_plot(name, f, &sweep.limits).into_bytes(),
                });
            }
        }
    }
    Ok(out)
}

/// Writes rendered artifacts into `dir`, creating it if needed.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, HarnessError> {
    let io = |p: &Path, e: std::io::Error| HarnessError::Io(format!("{}: {e}", p.display()));
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    artifacts
        .iter()
        .map(|a| {
            let path = dir.join(&a.name);
            std::fs::write(&path, &a.bytes).map_err(|e| io(&path, e))?;
            Ok(path)
        })
        .collect()
}

/// Reads fringe samples from a CSV with `theta_hat`, `p_plus_sampled` and
/// `p_minus_sampled` columns and an optional `weight` column.
pub fn read_fringe_csv(path: &Path) -> Result<Vec<crate::estimation::FringeSample>, HarnessError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| HarnessError::Io(e.to_string()))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let need = |name: &str| {
        column(name).ok_or_else(|| {
            HarnessError::Config(format!("{}: missing column {name:?}", path.display()))
        })
    };
    let (t, p, m) = (need("theta_hat")?, need("p_plus_sampled")?, need("p_minus_sampled")?);
    let w = column("weight");
    let mut samples = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| HarnessError::Io(e.to_string()))?;
        let value = |i: usize| -> Result<f64, HarnessError> {
            row.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| {
                    HarnessError::Config(format!(
                        "{}: row {}: column {} is not a number",
                        path.display(),
                        line + 2,
                        headers.get(i).unwrap_or("?")
                    ))
                })
        };
        samples.push(crate::estimation::FringeSample {
            theta_hat: value(t)?,
            p_plus: value(p)?,
            p_minus: value(m)?,
            weight: match w {
                Some(i) => value(i)?,
                None => 1.0,
            },
        });
    }
    Ok(samples)
}
