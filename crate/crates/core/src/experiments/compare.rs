use super::closed_loop::{run_closed_loop, Trajectory};
use super::config::{ControllerKind, ScenarioConfig, ScenarioFile};
use super::metrics::{compute_metrics, extract_reference_orbit, Metrics, ReferenceOrbit};
use super::{ExperimentError, Result};
use rayon::prelude::*;

/// Per-axis candidate gains for the linear baseline grid search.
pub const BASELINE_GAIN_GRID: [f64; 4] = [0.5, 1.0, 2.0, 5.0];

/// Phase samples used for reference orbits.
pub const ORBIT_SAMPLES: usize = 512;

#[derive(Debug, Clone)]
pub struct Comparison {
    pub adaptive: Metrics,
    pub linear: Metrics,
    pub adaptive_lower_error: bool,
    pub adaptive_faster: bool,
    /// Final period of the adaptive run, if it converged.
    pub reference: Option<ReferenceOrbit>,
    pub times: Vec<f64>,
    /// `x(t) - x_upo(t)` per channel, one vector per channel.
    pub adaptive_error: Vec<Vec<f64>>,
    pub linear_error: Vec<Vec<f64>>,
    pub adaptive_trajectory: Trajectory,
    pub linear_trajectory: Trajectory,
}

fn tracking_error(traj: &Trajectory, orbit: &ReferenceOrbit) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::with_capacity(traj.len()); traj.n];
    for r in &traj.records {
        let want = orbit.sample(r.t);
        for (c, series) in out.iter_mut().enumerate() {
            series.push(r.x[c] - want[c]);
        }
    }
    out
}

fn same_settings(a: &ScenarioConfig, b: &ScenarioConfig) -> Result<()> {
    let mismatch = |what: &str| Err(ExperimentError::MismatchedPlant(what.to_string()));
    if a.system.name != b.system.name {
        return mismatch("plant");
    }
    if a.forcing_frequency != b.forcing_frequency {
        return mismatch("forcing_frequency");
    }
    if a.system.alpha != b.system.alpha {
        return mismatch("alpha");
    }
    if a.system.period != b.system.period || a.controller.period != b.controller.period {
        return mismatch("T");
    }
    if a.simulation != b.simulation {
        return mismatch("simulation settings");
    }
    if a.controller.t_on != b.controller.t_on {
        return mismatch("t_on");
    }
    Ok(())
}

/// Runs the adaptive scenario and its linear counterpart side by side.
pub fn compare_controllers(adaptive: &ScenarioConfig, linear: &ScenarioConfig) -> Result<Comparison> {
    same_settings(adaptive, linear)?;
    if adaptive.kind != ControllerKind::AdaptiveDelayed || linear.kind != ControllerKind::LinearDelayed {
        return Err(ExperimentError::Config(
            "compare expects an adaptive_delayed and a linear_delayed scenario".into(),
        ));
    }
    let (a, l) = rayon::join(|| run_closed_loop(adaptive), || run_closed_loop(linear));
    let (a, l) = (a?, l?);
    let threshold = adaptive.convergence_threshold;
    let ma = compute_metrics(&a, threshold);
    let ml = compute_metrics(&l, threshold);
    let reference = extract_reference_orbit(&a, adaptive.period(), ORBIT_SAMPLES, threshold).ok();
    let (adaptive_error, linear_error) = match &reference {
        Some(orbit) => (tracking_error(&a, orbit), tracking_error(&l, orbit)),
        None => (vec![], vec![]),
    };
    Ok(Comparison {
        adaptive_lower_error: ma.steady_state_error < ml.steady_state_error,
        adaptive_faster: ma.convergence_time <= ml.convergence_time,
        adaptive: ma,
        linear: ml,
        reference,
        times: a.times(),
        adaptive_error,
        linear_error,
        adaptive_trajectory: a,
        linear_trajectory: l,
    })
}

#[derive(Debug, Clone)]
pub struct BaselineTuning {
    pub gains: Vec<f64>,
    pub metrics: Metrics,
    /// Every grid point tried, in grid order.
    pub tried: Vec<(Vec<f64>, Option<Metrics>)>,
}

fn rank(m: &Metrics) -> (f64, f64) {
    (m.steady_state_error, m.convergence_time)
}

/// Grid search for the linear delayed-feedback gains: lowest steady-state
/// error, ties broken by convergence time. Diverging gains are skipped.
pub fn tune_linear_baseline(base: &ScenarioConfig, grid: &[f64]) -> Result<BaselineTuning> {
    let n = base.system.n;
    let mut candidates: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..n {
        candidates = candidates
            .into_iter()
            .flat_map(|c| {
                grid.iter().map(move |g| {
                    let mut next = c.clone();
                    next.push(*g);
                    next
                })
            })
            .collect();
    }
    let tried: Vec<(Vec<f64>, Option<Metrics>)> = candidates
        .into_par_iter()
        .map(|gains| {
            let mut cfg = base.clone().with_kind(ControllerKind::LinearDelayed);
            cfg.baseline_gains = gains.clone();
            let metrics = run_closed_loop(&cfg)
                .ok()
                .map(|t| compute_metrics(&t, cfg.convergence_threshold));
            (gains, metrics)
        })
        .collect();
    let best = tried
        .iter()
        .filter_map(|(g, m)| m.as_ref().map(|m| (g, m)))
        .min_by(|a, b| rank(a.1).partial_cmp(&rank(b.1)).unwrap_or(std::cmp::Ordering::Equal))
        .ok_or_else(|| ExperimentError::Config("every baseline gain diverged".into()))?;
    Ok(BaselineTuning {
        gains: best.0.clone(),
        metrics: best.1.clone(),
        tried,
    })
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: String,
    pub result: std::result::Result<Metrics, String>,
}

/// Splits `a,b,[c,d]` on top-level commas.
pub fn split_values(list: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut quoted = false;
    let mut cur = String::new();
    for ch in list.chars() {
        match ch {
            '"' => quoted = !quoted,
            '[' | '{' if !quoted => depth += 1,
            ']' | '}' if !quoted => depth -= 1,
            ',' if depth == 0 && !quoted => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

fn parse_value(text: &str) -> Result<toml::Value> {
    let wrapped = format!("v = {text}");
    let table: toml::Table = match toml::from_str(&wrapped) {
        Ok(t) => t,
        // bare words become strings
        Err(_) => toml::from_str(&format!("v = {:?}", text))
            .map_err(|e| ExperimentError::Config(format!("value {text:?}: {e}")))?,
    };
    Ok(table["v"].clone())
}

/// Scenario `base` with `key` overridden by the TOML literal `value`.
pub fn override_key(base: &ScenarioFile, key: &str, value: &str) -> Result<ScenarioConfig> {
    let mut table: toml::Table = toml::from_str(&base.to_toml_string())
        .map_err(|e| ExperimentError::Config(e.to_string()))?;
    let mut v = parse_value(value)?;
    if let toml::Value::Integer(i) = v {
        // integers stay integers only where the schema wants them
        if key != "memory_window" {
            v = toml::Value::Float(i as f64);
        }
    }
    if let toml::Value::Array(items) = &mut v {
        for item in items.iter_mut() {
            if let toml::Value::Integer(i) = item {
                *item = toml::Value::Float(*i as f64);
            }
        }
    }
    table.insert(key.to_string(), v);
    let text = toml::to_string(&table).map_err(|e| ExperimentError::Config(e.to_string()))?;
    ScenarioFile::from_toml_str(&text)?.resolve()
}

/// One run per value of `key`; failures are recorded, not fatal.
pub fn run_sweep(base: &ScenarioFile, key: &str, values: &[String]) -> Result<Vec<SweepPoint>> {
    let configs = values
        .iter()
        .map(|v| override_key(base, key, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(configs
        .par_iter()
        .zip(values.par_iter())
        .map(|(cfg, value)| SweepPoint {
            value: value.clone(),
            result: run_closed_loop(cfg)
                .map(|t| compute_metrics(&t, cfg.convergence_threshold))
                .map_err(|e| e.to_string()),
        })
        .collect())
}
