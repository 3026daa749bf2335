use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Result};
use rayon::prelude::*;

use faddeev_core::config;
use faddeev_core::evolve::RunConfig;
use faddeev_core::io::fmt_f64;

use crate::output::run_to_dir;

/// One swept key and its values.
pub struct Axis {
    pub key: String,
    pub values: Vec<String>,
}

pub fn parse_axis(spec: &str) -> Result<Axis> {
    let (key, _) = config::parse_override(spec)?;
    let (_, list) = spec.split_once('=').unwrap_or_default();
    let values: Vec<String> = list
        .split(',')
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect();
    if values.is_empty() {
        bail!("grid axis `{key}` has no values");
    }
    Ok(Axis { key, values })
}

/// One point of the product: its coordinates and the resulting config.
pub struct Point {
    pub coords: Vec<String>,
    pub config: RunConfig,
}

/// Cartesian product, last axis fastest, applied on top of the base file
/// text and overrides. Every point is validated up front.
pub fn expand(base_text: &str, base_overrides: &[(String, String)], axes: &[Axis]) -> Result<Vec<Point>> {
    let mut combos: Vec<Vec<String>> = vec![Vec::new()];
    for axis in axes {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                axis.values.iter().map(move |v| {
                    let mut next = c.clone();
                    next.push(v.clone());
                    next
                })
            })
            .collect();
    }
    combos
        .into_iter()
        .map(|coords| {
            let overrides: Vec<(String, String)> = base_overrides
                .iter()
                .cloned()
                .chain(axes.iter().zip(&coords).map(|(a, v)| (a.key.clone(), v.clone())))
                .collect();
            let config = config::load(base_text, &overrides)?;
            Ok(Point { coords, config })
        })
        .collect()
}

pub struct Row {
    pub status: String,
    pub t_final: f64,
    pub steps: u64,
    pub drift_max: f64,
    pub monitors_max: [f64; 3],
    pub error: String,
}

fn run_point(point: &Point, dir: &Path) -> Row {
    match run_to_dir(&point.config, dir) {
        Ok(out) => {
            let mut m = [0.0f64; 3];
            let mut drift = 0.0f64;
            for r in &out.records {
                m[0] = m[0].max(r.monitors.v);
                m[1] = m[1].max(r.monitors.v_t);
                m[2] = m[2].max(r.monitors.grad_v);
                drift = drift.max(r.energy_drift.abs());
            }
            Row {
                status: out.status.label().to_string(),
                t_final: out.final_state.time,
                steps: out.steps_taken,
                drift_max: drift,
                monitors_max: m,
                error: String::new(),
            }
        }
        Err(e) => Row {
            status: "error".to_string(),
            t_final: f64::NAN,
            steps: 0,
            drift_max: f64::NAN,
            monitors_max: [f64::NAN; 3],
            error: format!("{e:#}").replace([',', '\n'], ";"),
        },
    }
}

/// Runs in parallel, results in point order; failures become rows.
pub fn run_all(points: &[Point], out: &Path) -> Vec<Row> {
    points
        .par_iter()
        .enumerate()
        .map(|(i, p)| run_point(p, &out.join(format!("run_{i:04}"))))
        .collect()
}

pub fn summary_csv(axes: &[Axis], points: &[Point], rows: &[Row]) -> String {
    let mut out = String::from("run");
    for a in axes {
        let _ = write!(out, ",{}", a.key);
    }
    out.push_str(",status,t_final,steps,energy_drift_max,monitor_v_max,monitor_vt_max,monitor_gradv_max,error\n");
    for (i, (row, point)) in rows.iter().zip(points).enumerate() {
        let _ = write!(out, "{i:04}");
        for v in &point.coords {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(
            out,
            ",{},{},{},{},{},{},{},{}",
            row.status,
            fmt_f64(row.t_final),
            row.steps,
            fmt_f64(row.drift_max),
            fmt_f64(row.monitors_max[0]),
            fmt_f64(row.monitors_max[1]),
            fmt_f64(row.monitors_max[2]),
            row.error
        );
    }
    out
}
