use std::path::Path;

use anyhow::{ensure, Result};

use faddeev_core::config;
use faddeev_core::diagnostics::records_csv;
use faddeev_core::evolve::{run_with, RunConfig, RunOutcome};
use faddeev_core::io::{csv_string, field_csv, meta_string, sha256_hex, write_text};
use faddeev_core::transform::TransformBundle;
use faddeev_core::{FieldState, KernelParams};

pub fn write(path: &Path, text: &str) -> Result<()> {
    Ok(write_text(path, text)?)
}

fn sidecar(cfg_text: &str, status: &str, state: &FieldState, step: u64) -> String {
    let mut pairs: Vec<(&str, String)> = vec![
        ("time", faddeev_core::io::fmt_f64(state.time)),
        ("step", step.to_string()),
        ("status", status.to_string()),
        ("config_sha256", sha256_hex(cfg_text)),
    ];
    let echoed = config::parse_pairs(cfg_text).unwrap_or_default();
    pairs.extend(echoed.iter().map(|(k, v)| (k.as_str(), v.clone())));
    meta_string(&pairs)
}

/// Run `cfg` writing into `dir`:
/// `config.txt`, `diagnostics.csv`, `meta.txt`, and per snapshot
/// `snapshots/bundle_<step>.csv` (+ `.meta`), `snapshots/v_<step>.csv` and
/// `snapshots/v_t_<step>.csv`.
pub fn run_to_dir(cfg: &RunConfig, dir: &Path) -> Result<RunOutcome> {
    let cfg_text = config::render(cfg);
    write(&dir.join("config.txt"), &cfg_text)?;
    let snaps = dir.join("snapshots");
    let outcome = run_with(cfg, |step, state| {
        let bundle = TransformBundle::from_v(state, &cfg.kernels)?;
        write_text(&snaps.join(format!("bundle_{step:08}.csv")), &bundle.to_csv())?;
        write_text(
            &snaps.join(format!("bundle_{step:08}.meta")),
            &sidecar(&cfg_text, "snapshot", state, step),
        )?;
        write_text(&snaps.join(format!("v_{step:08}.csv")), &field_csv(&state.f))?;
        write_text(&snaps.join(format!("v_t_{step:08}.csv")), &field_csv(&state.f_t))?;
        Ok(())
    })?;
    write(&dir.join("diagnostics.csv"), &records_csv(&outcome.records))?;
    write(
        &dir.join("meta.txt"),
        &sidecar(&cfg_text, outcome.status.label(), &outcome.final_state, outcome.steps_taken),
    )?;
    Ok(outcome)
}

/// `x,F0..F4` on `[0, x_max]` and `A1, A3, A4, A5` at `(x, radius)`.
pub fn kernels_table(alpha: f64, x_max: f64, samples: usize, radius: f64) -> Result<String> {
    ensure!(samples >= 2, "samples must be at least 2");
    ensure!(x_max > 0.0 && x_max.is_finite(), "x_max must be positive");
    ensure!(radius > 0.0 && radius.is_finite(), "radius must be positive");
    let p = KernelParams::with_alpha(alpha)?;
    let header = ["x", "F0", "F1", "F2", "F3", "F4", "A1", "A3", "A4", "A5"];
    let rows: Vec<Vec<f64>> = (0..samples)
        .map(|k| {
            let x = x_max * k as f64 / (samples - 1) as f64;
            let mut row = vec![x];
            row.extend(p.ftilde_all(x));
            row.extend([p.a1(x, radius), p.a3(x, radius), p.a4(x, radius), p.a5(x, radius)]);
            row
        })
        .collect();
    Ok(csv_string(&header, &rows))
}
