//! `solve` and `sweep` subcommands.

use crate::config::RunConfig;
use crate::error::CliError;
use helmbie::postprocess::{eval_field, far_field, flux_check, radiation_residual, LayerPotential};
use helmbie::{solve_with, BieProblem, DensitySolution, Point, TotalField};
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Number of angles for the radiation-residual metric.
const RADIATION_ANGLES: usize = 32;

#[derive(Debug, Clone, Serialize)]
pub struct RadiationMetric {
    pub radius: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    pub residual_norm: f64,
    pub condition_estimate: Option<f64>,
    pub iterations: Option<usize>,
    /// Relative `|Im ∮ ū ∂_n u|` on a circle of radius 0.5 above the bump.
    pub flux_check: Option<f64>,
    pub radiation_residuals: Vec<RadiationMetric>,
    pub wall_time_seconds: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub density_file: PathBuf,
    pub nearfield_file: PathBuf,
    pub farfield_file: Option<PathBuf>,
    pub metrics: Metrics,
}

fn num(out: &mut String, v: f64) {
    write!(out, "{v:.16e}").expect("writing to a String");
}

fn csv_row(out: &mut String, values: &[f64]) {
    for (i, &v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        num(out, v);
    }
    out.push('\n');
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn density_csv(problem: &BieProblem, density: &DensitySolution) -> String {
    let mut s = String::from("t,x,y,re,im\n");
    for (n, v) in problem.mesh.nodes().iter().zip(&density.values) {
        csv_row(&mut s, &[n.t, n.point.x, n.point.y, v.re, v.im]);
    }
    s
}

/// Solves one configuration and writes `density.csv`, `nearfield.csv`,
/// `farfield.csv` (real `k` only), `metrics.json` and `report.json` to `out`.
pub fn run_solve(config: &RunConfig, out: &Path) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let problem = config.build()?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let density = solve_with(&problem, &config.solver).map_err(|e| CliError::solver("solving the boundary integral equation", e))?;
    let mut notes = Vec::new();

    let density_file = out.join("density.csv");
    write_file(&density_file, &density_csv(&problem, &density))?;

    let samples = eval_field(&problem, &density, &config.eval_points()).map_err(|e| CliError::solver("evaluating the field", e))?;
    let mut near = String::from("x,y,re_total,im_total,abs_total,re_correction,im_correction\n");
    for s in &samples {
        csv_row(&mut near, &[s.point.x, s.point.y, s.total.re, s.total.im, s.total.norm(), s.correction.re, s.correction.im]);
    }
    let nearfield_file = out.join("nearfield.csv");
    write_file(&nearfield_file, &near)?;

    let real_k = problem.k.is_real();
    let farfield_file = if real_k {
        let angles: Vec<f64> = config.eval.farfield_angles_deg.iter().map(|a| a.to_radians()).collect();
        let ff = far_field(&problem, &density, &angles).map_err(|e| CliError::solver("computing the far field", e))?;
        let mut s = String::from("theta_deg,re,im,abs\n");
        for (deg, v) in config.eval.farfield_angles_deg.iter().zip(&ff.values) {
            csv_row(&mut s, &[*deg, v.re, v.im, v.norm()]);
        }
        let path = out.join("farfield.csv");
        write_file(&path, &s)?;
        Some(path)
    } else {
        let stale = out.join("farfield.csv");
        if stale.exists() {
            std::fs::remove_file(&stale).map_err(|e| CliError::io(&stale, e))?;
        }
        notes.push("farfield skipped: complex k".to_string());
        None
    };

    let (flux, radiation) = if real_k {
        let total = TotalField::new(&problem, &density);
        let center = Point::new(0.5 * problem.profile.support_length(), problem.profile.max_height() + 1.0);
        let flux = flux_check(&problem, &total, center, 0.5).map_err(|e| CliError::solver("flux check", e))?;
        let scattered = LayerPotential::new(&problem, &density);
        let k = problem.k.value().re;
        let r1 = (50.0 / k).max(4.0 * problem.profile.support_length());
        let angles: Vec<f64> = (0..RADIATION_ANGLES).map(|i| (i as f64 + 0.5) * PI / RADIATION_ANGLES as f64).collect();
        let radiation = [r1, 4.0 * r1]
            .iter()
            .map(|&radius| {
                radiation_residual(&problem, &scattered, radius, &angles)
                    .map(|residual| RadiationMetric { radius, residual })
                    .map_err(|e| CliError::solver("radiation residual", e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        (Some(flux.relative), radiation)
    } else {
        notes.push("flux and radiation checks skipped: complex k".to_string());
        (None, Vec::new())
    };

    let metrics = Metrics {
        residual_norm: density.residual_norm,
        condition_estimate: density.condition_estimate,
        iterations: density.iterations,
        flux_check: flux,
        radiation_residuals: radiation,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        notes,
    };
    let metrics_path = out.join("metrics.json");
    write_file(&metrics_path, &to_json(&metrics))?;
    let report = RunReport { config: config.clone(), density_file, nearfield_file, farfield_file, metrics };
    write_file(&out.join("report.json"), &to_json(&report))?;
    Ok(report)
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Replaces the scalar at dotted path `param` in the configuration.
fn set_param(base: &serde_json::Value, param: &str, raw: &str) -> Result<serde_json::Value, CliError> {
    let mut value = base.clone();
    let mut slot = &mut value;
    for key in param.split('.') {
        slot = match slot {
            serde_json::Value::Object(map) => map.get_mut(key),
            serde_json::Value::Array(items) => key.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| CliError::config("param", format!("no configuration field `{param}`")))?;
    }
    let parsed: f64 = raw.trim().parse().map_err(|_| CliError::config("values", format!("`{raw}` is not a number")))?;
    *slot = match slot {
        serde_json::Value::Number(n) if n.is_u64() || n.is_i64() => {
            if parsed.fract() != 0.0 {
                return Err(CliError::config("values", format!("`{param}` is an integer field, got {raw}")));
            }
            serde_json::Value::from(parsed as i64)
        }
        serde_json::Value::Number(_) => serde_json::Value::from(parsed),
        _ => return Err(CliError::config("param", format!("`{param}` is not a scalar numeric field"))),
    };
    Ok(value)
}

#[derive(Debug, Serialize)]
pub struct SweepEntry {
    pub value: String,
    pub directory: PathBuf,
    pub report: RunReport,
}

/// Runs `config` once per value of the scalar field `param`, each into
/// `out/<param>=<value>`.
pub fn run_sweep(config: &RunConfig, param: &str, values: &[String], out: &Path) -> Result<Vec<SweepEntry>, CliError> {
    if values.is_empty() {
        return Err(CliError::config("values", "at least one value is required"));
    }
    let base = serde_json::to_value(config).expect("configuration serializes");
    let variants = values
        .iter()
        .map(|raw| RunConfig::from_value(set_param(&base, param, raw)?).map(|c| (raw, c)))
        .collect::<Result<Vec<_>, _>>()?;
    for (_, c) in &variants {
        c.build()?;
    }
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut entries = Vec::with_capacity(variants.len());
    for (raw, c) in variants {
        let dir = out.join(format!("{param}={}", raw.trim()));
        let report = run_solve(&c, &dir)?;
        entries.push(SweepEntry { value: raw.trim().to_string(), directory: dir, report });
    }
    write_file(&out.join("sweep.json"), &to_json(&entries))?;
    Ok(entries)
}
