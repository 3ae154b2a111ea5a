use super::closed_loop::Trajectory;
use super::compare::Comparison;
use super::metrics::{extract_reference_orbit, Metrics};
use super::{plot, ExperimentError, Result};
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub fn trajectory_header(n: usize, m: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=n).map(|i| format!("x{i}")));
    h.extend(["u", "u_eq", "u_ad", "u_s", "S"].map(String::from));
    h.extend((1..=n).map(|i| format!("e{i}")));
    h.extend((1..=m).map(|i| format!("theta_hat_{i}")));
    h.push("k_hat".into());
    h.push("V".into());
    h
}

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "{}", trajectory_header(traj.n, traj.m).join(","))?;
    let mut line = String::new();
    for r in &traj.records {
        line.clear();
        let _ = write!(line, "{}", r.t);
        let scalars = [r.u, r.u_eq, r.u_ad, r.u_s, r.s];
        for v in r.x.iter().chain(&scalars).chain(&r.e).chain(&r.theta_hat) {
            let _ = write!(line, ",{v}");
        }
        let _ = write!(line, ",{},{}", r.k_hat, r.v);
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

/// Metrics as TOML key-value text.
pub fn metrics_summary(metrics: &Metrics) -> String {
    toml::to_string(metrics).expect("metrics serialize")
}

pub fn write_metrics(metrics: &Metrics, path: &Path) -> Result<()> {
    fs::write(path, metrics_summary(metrics))?;
    Ok(())
}

fn create(path: &Path) -> Result<fs::File> {
    Ok(fs::File::create(path)?)
}

/// Writes `trajectory.csv`, `metrics.toml` and, with `plots`, SVG figures
/// into `dir`. Returns the paths written.
pub fn emit_outputs(traj: &Trajectory, metrics: &Metrics, dir: &Path, plots: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv = dir.join("trajectory.csv");
    write_trajectory_csv(traj, create(&csv)?)?;
    let summary = dir.join("metrics.toml");
    write_metrics(metrics, &summary)?;
    let mut written = vec![csv, summary];
    if plots {
        let orbit = extract_reference_orbit(
            traj,
            traj.period,
            super::compare::ORBIT_SAMPLES,
            metrics.threshold,
        )
        .ok();
        written.extend(plot::trajectory_plots(traj, orbit.as_ref(), dir)?);
    }
    Ok(written)
}

/// Both runs under `dir/adaptive` and `dir/linear`, a side-by-side summary
/// and the tracking-error series.
pub fn emit_comparison(cmp: &Comparison, dir: &Path, plots: bool) -> Result<Vec<PathBuf>> {
    let mut written = emit_outputs(&cmp.adaptive_trajectory, &cmp.adaptive, &dir.join("adaptive"), plots)?;
    written.extend(emit_outputs(&cmp.linear_trajectory, &cmp.linear, &dir.join("linear"), plots)?);

    let mut table = toml::Table::new();
    let section = |m: &Metrics| toml::Value::try_from(m).map_err(|e| ExperimentError::Config(e.to_string()));
    table.insert("adaptive".into(), section(&cmp.adaptive)?);
    table.insert("linear".into(), section(&cmp.linear)?);
    table.insert("adaptive_lower_error".into(), cmp.adaptive_lower_error.into());
    table.insert("adaptive_faster".into(), cmp.adaptive_faster.into());
    let summary = dir.join("comparison.toml");
    fs::write(
        &summary,
        toml::to_string(&table).map_err(|e| ExperimentError::Config(e.to_string()))?,
    )?;
    written.push(summary);

    if !cmp.adaptive_error.is_empty() {
        let path = dir.join("tracking_error.csv");
        let mut w = BufWriter::new(create(&path)?);
        let n = cmp.adaptive_error.len();
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("adaptive_e{i}")));
        header.extend((1..=n).map(|i| format!("linear_e{i}")));
        writeln!(w, "{}", header.join(","))?;
        for (k, t) in cmp.times.iter().enumerate() {
            let mut line = format!("{t}");
            for series in cmp.adaptive_error.iter().chain(&cmp.linear_error) {
                let _ = write!(line, ",{}", series[k]);
            }
            writeln!(w, "{line}")?;
        }
        w.flush()?;
        written.push(path.clone());
        if plots {
            written.push(plot::error_plot(cmp, dir)?);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_arithmetic() {
        for (n, m) in [(2, 4), (3, 1), (1, 0)] {
            assert_eq!(trajectory_header(n, m).len(), 2 * n + m + 8);
        }
        assert_eq!(
            trajectory_header(2, 1).join(","),
            "t,x1,x2,u,u_eq,u_ad,u_s,S,e1,e2,theta_hat_1,k_hat,V"
        );
    }

    #[test]
    fn metrics_round_trip_with_infinity() {
        let m = Metrics {
            system: "duffing".into(),
            controller: "none".into(),
            threshold: 0.05,
            steady_state_error: 1.5,
            convergence_time: f64::INFINITY,
            k_hat_final: 0.1,
            control_effort: 0.0,
            final_window_max_abs_s: 2.0,
            lyapunov_at_activation: 1.0,
            lyapunov_final: 1.0,
            steps: 10,
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.toml");
        write_metrics(&m, &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.contains("convergence_time = inf"));
        let back: Metrics = toml::from_str(&text).unwrap();
        assert_eq!(back, m);
    }
}
