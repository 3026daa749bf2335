//! Line-oriented `key = value` run configuration with `[section]` headers.
//!
//! ```text
//! [grid]
//! n_cells = 1024
//! r_max = 40
//! ```
//!
//! `#` starts a comment. Unknown sections or keys are errors, and overrides
//! use the dotted form `section.key=value`.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::evolve::{GaussianShape, InitialDataSpec, Model, RunConfig};
use crate::kernels::{CutoffProfile, KernelParams};

/// Every accepted key, in rendering order.
pub const KEYS: &[(&str, &[&str])] = &[
    ("grid", &["n_cells", "r_max"]),
    (
        "integrator",
        &["t_end", "cfl", "dt", "sponge_start", "sponge_strength", "model"],
    ),
    (
        "initial_data",
        &[
            "family",
            "amplitude",
            "center",
            "width",
            "velocity_amplitude",
            "velocity_center",
            "velocity_width",
            "profile",
        ],
    ),
    ("kernels", &["alpha", "x_switch", "series_terms", "cutoff_order"]),
    (
        "diagnostics",
        &["every", "sobolev", "phi", "decay_s", "monitor_ceiling", "drift_limit"],
    ),
    ("output", &["snapshot_every"]),
];

fn known(section: &str, key: &str) -> bool {
    KEYS.iter()
        .any(|(s, ks)| *s == section && ks.contains(&key))
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Parsed `(section.key, value)` pairs in file order.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut section: Option<String> = None;
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| cfg_err(format!("line {}: malformed section header", n + 1)))?
                .trim();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                return Err(cfg_err(format!("line {}: unknown section `{name}`", n + 1)));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| cfg_err(format!("line {}: expected `key = value`", n + 1)))?;
        let sec = section
            .as_deref()
            .ok_or_else(|| cfg_err(format!("line {}: key outside any section", n + 1)))?;
        let key = key.trim();
        if !known(sec, key) {
            return Err(cfg_err(format!("unknown key `{sec}.{key}`")));
        }
        out.push((format!("{sec}.{key}"), value.trim().to_string()));
    }
    Ok(out)
}

/// Parse a `section.key=value` override.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| cfg_err(format!("override `{s}` is not key=value")))?;
    let k = k.trim();
    let (sec, key) = k
        .split_once('.')
        .ok_or_else(|| cfg_err(format!("override key `{k}` must be section.key")))?;
    if !known(sec, key) {
        return Err(cfg_err(format!("unknown key `{k}`")));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| cfg_err(format!("`{key}`: cannot parse `{v}`")))
}

fn boolean(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(cfg_err(format!("`{key}`: expected true or false, got `{v}`"))),
    }
}

fn opt_num(key: &str, v: &str) -> Result<Option<f64>> {
    if v == "auto" {
        Ok(None)
    } else {
        num(key, v).map(Some)
    }
}

#[derive(Debug, Clone)]
struct Draft {
    cfg: RunConfig,
    family: String,
    v: GaussianShape,
    v_t: GaussianShape,
    profile: Option<PathBuf>,
    alpha: f64,
    x_switch: f64,
    series_terms: usize,
    cutoff_order: usize,
}

impl Draft {
    fn from_config(cfg: &RunConfig) -> Self {
        let (family, v, v_t, profile) = match &cfg.initial {
            InitialDataSpec::GaussianV { v, v_t } => ("gaussian_v", *v, *v_t, None),
            InitialDataSpec::ProfileU { path } => {
                let g = GaussianShape {
                    amplitude: 0.0,
                    center: 0.0,
                    width: 1.0,
                };
                ("profile_u", g, g, Some(path.clone()))
            }
        };
        Self {
            cfg: cfg.clone(),
            family: family.to_string(),
            v,
            v_t,
            profile,
            alpha: cfg.kernels.alpha(),
            x_switch: cfg.kernels.x_switch(),
            series_terms: cfg.kernels.series_terms(),
            cutoff_order: cfg.kernels.cutoff().order(),
        }
    }

    fn apply(&mut self, key: &str, v: &str) -> Result<()> {
        let c = &mut self.cfg;
        match key {
            "grid.n_cells" => c.n_cells = num(key, v)?,
            "grid.r_max" => c.r_max = num(key, v)?,
            "integrator.t_end" => c.t_end = num(key, v)?,
            "integrator.cfl" => c.cfl = num(key, v)?,
            "integrator.dt" => c.dt = opt_num(key, v)?,
            "integrator.sponge_start" => c.sponge.start = opt_num(key, v)?,
            "integrator.sponge_strength" => c.sponge.strength = num(key, v)?,
            "integrator.model" => {
                c.model = Model::parse(v)
                    .ok_or_else(|| cfg_err(format!("`{key}`: unknown model `{v}`")))?
            }
            "initial_data.family" => match v {
                "gaussian_v" | "profile_u" => self.family = v.to_string(),
                _ => return Err(cfg_err(format!("`{key}`: unknown family `{v}`"))),
            },
            "initial_data.amplitude" => self.v.amplitude = num(key, v)?,
            "initial_data.center" => self.v.center = num(key, v)?,
            "initial_data.width" => self.v.width = num(key, v)?,
            "initial_data.velocity_amplitude" => self.v_t.amplitude = num(key, v)?,
            "initial_data.velocity_center" => self.v_t.center = num(key, v)?,
            "initial_data.velocity_width" => self.v_t.width = num(key, v)?,
            "initial_data.profile" => {
                self.profile = if v.is_empty() { None } else { Some(PathBuf::from(v)) }
            }
            "kernels.alpha" => self.alpha = num(key, v)?,
            "kernels.x_switch" => self.x_switch = num(key, v)?,
            "kernels.series_terms" => self.series_terms = num(key, v)?,
            "kernels.cutoff_order" => self.cutoff_order = num(key, v)?,
            "diagnostics.every" => c.diagnostics_every = num(key, v)?,
            "diagnostics.sobolev" => c.toggles.sobolev = boolean(key, v)?,
            "diagnostics.phi" => c.toggles.phi = boolean(key, v)?,
            "diagnostics.decay_s" => c.toggles.decay_s = num(key, v)?,
            "diagnostics.monitor_ceiling" => c.limits.monitor_ceiling = num(key, v)?,
            "diagnostics.drift_limit" => c.limits.drift_limit = num(key, v)?,
            "output.snapshot_every" => c.snapshot_every = num(key, v)?,
            _ => return Err(cfg_err(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    fn finish(mut self) -> Result<RunConfig> {
        let cutoff = CutoffProfile::new(self.cutoff_order).map_err(|e| cfg_err(e.to_string()))?;
        self.cfg.kernels = KernelParams::new(self.alpha, self.x_switch, self.series_terms, cutoff)
            .map_err(|e| cfg_err(e.to_string()))?;
        self.cfg.initial = match self.family.as_str() {
            "profile_u" => InitialDataSpec::ProfileU {
                path: self
                    .profile
                    .ok_or_else(|| cfg_err("`initial_data.profile` required for profile_u"))?,
            },
            _ => InitialDataSpec::GaussianV {
                v: self.v,
                v_t: self.v_t,
            },
        };
        self.cfg.validate().map_err(|e| cfg_err(e.to_string()))?;
        Ok(self.cfg)
    }
}

/// Build a validated [`RunConfig`] from defaults, file text and overrides
/// (applied in order, later wins).
pub fn load(text: &str, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut draft = Draft::from_config(&RunConfig::default());
    for (k, v) in parse_pairs(text)?.iter().chain(overrides) {
        draft.apply(k, v)?;
    }
    draft.finish()
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "auto".to_string(), |v| v.to_string())
}

/// Full effective configuration; `load(&render(c), &[]) == c`.
pub fn render(cfg: &RunConfig) -> String {
    let d = Draft::from_config(cfg);
    let value = |key: &str| -> String {
        match key {
            "grid.n_cells" => cfg.n_cells.to_string(),
            "grid.r_max" => cfg.r_max.to_string(),
            "integrator.t_end" => cfg.t_end.to_string(),
            "integrator.cfl" => cfg.cfl.to_string(),
            "integrator.dt" => opt(cfg.dt),
            "integrator.sponge_start" => opt(cfg.sponge.start),
            "integrator.sponge_strength" => cfg.sponge.strength.to_string(),
            "integrator.model" => cfg.model.name().to_string(),
            "initial_data.family" => d.family.clone(),
            "initial_data.amplitude" => d.v.amplitude.to_string(),
            "initial_data.center" => d.v.center.to_string(),
            "initial_data.width" => d.v.width.to_string(),
            "initial_data.velocity_amplitude" => d.v_t.amplitude.to_string(),
            "initial_data.velocity_center" => d.v_t.center.to_string(),
            "initial_data.velocity_width" => d.v_t.width.to_string(),
            "initial_data.profile" => d
                .profile
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
            "kernels.alpha" => d.alpha.to_string(),
            "kernels.x_switch" => d.x_switch.to_string(),
            "kernels.series_terms" => d.series_terms.to_string(),
            "kernels.cutoff_order" => d.cutoff_order.to_string(),
            "diagnostics.every" => cfg.diagnostics_every.to_string(),
            "diagnostics.sobolev" => cfg.toggles.sobolev.to_string(),
            "diagnostics.phi" => cfg.toggles.phi.to_string(),
            "diagnostics.decay_s" => cfg.toggles.decay_s.to_string(),
            "diagnostics.monitor_ceiling" => cfg.limits.monitor_ceiling.to_string(),
            "diagnostics.drift_limit" => cfg.limits.drift_limit.to_string(),
            "output.snapshot_every" => cfg.snapshot_every.to_string(),
            _ => unreachable!("key table and renderer out of sync: {key}"),
        }
    };
    let mut out = String::new();
    for (i, (sec, keys)) in KEYS.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "[{sec}]");
        for key in *keys {
            let _ = writeln!(out, "{key} = {}", value(&format!("{sec}.{key}")));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        assert_eq!(load(&render(&c), &[]).unwrap(), c);
    }

    #[test]
    fn values_and_overrides_apply() {
        let text = "[grid]\nn_cells = 256 # comment\nr_max = 12.5\n\n[integrator]\nmodel = free_wave\n";
        let ov = vec![parse_override("grid.n_cells=300").unwrap()];
        let c = load(text, &ov).unwrap();
        assert_eq!(c.n_cells, 300);
        assert_eq!(c.r_max, 12.5);
        assert_eq!(c.model, Model::FreeWave);
        assert_eq!(load(&render(&c), &[]).unwrap(), c);
    }

    #[test]
    fn unknown_keys_named() {
        let e = load("[grid]\nn_cels = 10\n", &[]).unwrap_err();
        assert!(e.to_string().contains("grid.n_cels"), "{e}");
        let e = parse_override("grid.bogus=1").unwrap_err();
        assert!(e.to_string().contains("grid.bogus"));
        assert!(load("[nope]\n", &[]).is_err());
        assert!(load("n_cells = 3\n", &[]).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(load("[integrator]\ncfl = 0.9\n", &[]).is_err());
        assert!(load("[grid]\nr_max = abc\n", &[]).is_err());
        assert!(load("[diagnostics]\nphi = yes\n", &[]).is_err());
    }
}
