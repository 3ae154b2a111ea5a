use super::closed_loop::Trajectory;
use super::{ExperimentError, Result};
use serde::{Deserialize, Serialize};

/// Summary of one run.
///
/// `convergence_time` is `+inf` when the defect never stays below the
/// threshold for a full period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub system: String,
    pub controller: String,
    pub threshold: f64,
    /// Max of `|x(t) - x(t-T)|_inf` over the final `2T`.
    pub steady_state_error: f64,
    /// Seconds from `t_on`.
    pub convergence_time: f64,
    pub k_hat_final: f64,
    /// Trapezoid integral of `|u|`.
    pub control_effort: f64,
    /// Max `|S|` over the final `2T`.
    pub final_window_max_abs_s: f64,
    pub lyapunov_at_activation: f64,
    pub lyapunov_final: f64,
    pub steps: usize,
}

/// `|x(tau) - x(tau - T)|_inf` at each grid point; `None` until a full
/// period of data exists.
pub fn pointwise_defect(traj: &Trajectory, period: f64) -> Vec<Option<f64>> {
    let h = traj.h;
    let t0 = traj.t0();
    let len = traj.len();
    let n = traj.n;
    let mut delayed = vec![0.0; n];
    (0..len)
        .map(|i| {
            let pos = (traj.records[i].t - period - t0) / h;
            if pos < -1e-9 {
                return None;
            }
            let left = (pos.floor().max(0.0) as usize).min(len - 1);
            let frac = (pos - left as f64).clamp(0.0, 1.0);
            let a = traj.state(left);
            if frac <= 1e-9 || left + 1 >= len {
                delayed.copy_from_slice(a);
            } else {
                let b = traj.state(left + 1);
                for c in 0..n {
                    delayed[c] = a[c] + frac * (b[c] - a[c]);
                }
            }
            Some(
                traj.state(i)
                    .iter()
                    .zip(&delayed)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max),
            )
        })
        .collect()
}

fn window_max(defect: &[Option<f64>], first: usize, last: usize) -> f64 {
    defect[first..=last]
        .iter()
        .map(|d| d.unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}

/// Max of the pointwise defect over `[t - T, t]`.
pub fn periodicity_defect(traj: &Trajectory, period: f64, t: f64) -> f64 {
    let defect = pointwise_defect(traj, period);
    let last = traj.index_at_or_after(t);
    let first = traj.index_at_or_after(t - period);
    window_max(&defect, first, last)
}

pub fn compute_metrics(traj: &Trajectory, threshold: f64) -> Metrics {
    let period = traj.period;
    let defect = pointwise_defect(traj, period);
    let last = traj.len() - 1;
    let window_start = traj.index_at_or_after(traj.t_end() - 2.0 * period);
    let steady_state_error = window_max(&defect, window_start, last);

    let on = traj.index_at_or_after(traj.t_on);
    let span = (period / traj.h - 1e-9).floor() as usize;
    let mut run = 0usize;
    let mut runs = vec![0usize; traj.len()];
    for i in (0..traj.len()).rev() {
        run = match defect[i] {
            Some(d) if d < threshold => run + 1,
            _ => 0,
        };
        runs[i] = run;
    }
    let convergence_time = (on..traj.len())
        .find(|&i| runs[i] > span)
        .map_or(f64::INFINITY, |i| (traj.records[i].t - traj.t_on).max(0.0));

    let control_effort = traj
        .records
        .windows(2)
        .map(|w| 0.5 * traj.h * (w[0].u.abs() + w[1].u.abs()))
        .sum();
    let final_window_max_abs_s = traj.records[window_start..]
        .iter()
        .map(|r| r.s.abs())
        .fold(0.0, f64::max);
    Metrics {
        system: traj.system.clone(),
        controller: traj.kind.to_string(),
        threshold,
        steady_state_error,
        convergence_time,
        k_hat_final: traj.records[last].k_hat,
        control_effort,
        final_window_max_abs_s,
        lyapunov_at_activation: traj.records[on].v,
        lyapunov_final: traj.records[last].v,
        steps: last,
    }
}

/// One period of a converged trajectory on a uniform phase grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceOrbit {
    pub period: f64,
    /// Absolute time of phase zero.
    pub start: f64,
    pub phases: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl ReferenceOrbit {
    /// Orbit state at absolute time `t`, extended periodically.
    pub fn sample(&self, t: f64) -> Vec<f64> {
        let samples = self.phases.len();
        let phase = (t - self.start).rem_euclid(self.period);
        let pos = phase / self.period * samples as f64;
        let left = (pos.floor() as usize).min(samples - 1);
        let right = (left + 1) % samples;
        let frac = pos - left as f64;
        self.states[left]
            .iter()
            .zip(&self.states[right])
            .map(|(a, b)| a + frac * (b - a))
            .collect()
    }
}

fn interpolate_state(traj: &Trajectory, t: f64) -> Vec<f64> {
    let pos = ((t - traj.t0()) / traj.h).clamp(0.0, (traj.len() - 1) as f64);
    let left = (pos.floor() as usize).min(traj.len() - 1);
    let frac = pos - left as f64;
    let a = traj.state(left);
    if frac <= 0.0 || left + 1 >= traj.len() {
        return a.to_vec();
    }
    let b = traj.state(left + 1);
    a.iter().zip(b).map(|(p, q)| p + frac * (q - p)).collect()
}

/// Resamples the period ending at `window_end` onto `samples` phases.
pub fn orbit_ending_at(traj: &Trajectory, period: f64, window_end: f64, samples: usize) -> ReferenceOrbit {
    let start = window_end - period;
    let phases: Vec<f64> = (0..samples)
        .map(|i| i as f64 * period / samples as f64)
        .collect();
    let states = phases
        .iter()
        .map(|p| interpolate_state(traj, start + p))
        .collect();
    ReferenceOrbit {
        period,
        start,
        phases,
        states,
    }
}

/// Final full period of a converged trajectory.
pub fn extract_reference_orbit(
    traj: &Trajectory,
    period: f64,
    samples: usize,
    threshold: f64,
) -> Result<ReferenceOrbit> {
    if traj.is_empty() || samples == 0 {
        return Err(ExperimentError::Config("empty trajectory or no samples".into()));
    }
    let defect = pointwise_defect(traj, period);
    let window_start = traj.index_at_or_after(traj.t_end() - 2.0 * period);
    let steady_state_error = window_max(&defect, window_start, traj.len() - 1);
    if !(steady_state_error < threshold) {
        return Err(ExperimentError::NotConverged {
            steady_state_error,
            threshold,
        });
    }
    Ok(orbit_ending_at(traj, period, traj.t_end(), samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(h: f64, period: f64, amp: f64, omega: f64, len: usize) -> Trajectory {
        let states = (0..len)
            .map(|i| {
                let t = i as f64 * h;
                vec![amp * (omega * t).sin(), amp * omega * (omega * t).cos()]
            })
            .collect();
        Trajectory::from_states(h, period, states)
    }

    #[test]
    fn periodic_signal_has_zero_defect() {
        // period an exact multiple of h so the delayed samples are on grid
        let h = 0.01;
        let period = 2.0;
        let traj = sine(h, period, 1.3, PI, 1201);
        let m = compute_metrics(&traj, 0.05);
        assert!(m.steady_state_error < 1e-12);
        // the defect only exists from one period in
        assert!((m.convergence_time - period).abs() < 1e-9);
        assert!(periodicity_defect(&traj, period, 10.0) < 1e-12);
    }

    #[test]
    fn antisymmetric_half_shift_doubles_amplitude() {
        let h = 0.01;
        let period = 2.0;
        let amp = 0.7;
        // x(t - T) = -x(t)
        let states = (0..1201)
            .map(|i| vec![amp * (PI * i as f64 * h / period).sin()])
            .collect();
        let traj = Trajectory::from_states(h, period, states);
        let d = periodicity_defect(&traj, period, 11.0);
        assert!((d - 2.0 * amp).abs() < 1e-9, "{d}");
    }

    #[test]
    fn never_converging_signal_reports_infinity() {
        let traj = sine(0.01, 2.0, 1.0, 1.0, 1201);
        let m = compute_metrics(&traj, 0.05);
        assert!(m.convergence_time.is_infinite());
        assert!(m.steady_state_error > 0.1);
        assert!(m.steady_state_error >= 0.0 && m.control_effort >= 0.0);
    }

    #[test]
    fn extracted_periods_repeat() {
        let h = 0.005;
        let period = 2.0 * PI;
        let traj = sine(h, period, 1.0, 1.0, 6000);
        let orbit = extract_reference_orbit(&traj, period, 128, 0.05).unwrap();
        let earlier = orbit_ending_at(&traj, period, traj.t_end() - period, 128);
        for (a, b) in orbit.states.iter().zip(&earlier.states) {
            for (p, q) in a.iter().zip(b) {
                assert!((p - q).abs() < 1e-4);
            }
        }
        // one sine cycle starting at the window start
        for (phase, s) in orbit.phases.iter().zip(&orbit.states) {
            let want = (orbit.start + phase).sin();
            assert!((s[0] - want).abs() < 1e-5);
        }
        let back = orbit.sample(orbit.start - 3.0 * period + 0.25);
        assert!((back[0] - (orbit.start + 0.25).sin()).abs() < 1e-3);
    }

    #[test]
    fn exactly_periodic_extraction_is_identical() {
        let h = 0.01;
        let period = 1.0;
        let states = (0..1001)
            .map(|i| {
                let k = i % 100;
                vec![(k as f64 * 0.37).sin()]
            })
            .collect();
        let traj = Trajectory::from_states(h, period, states);
        let a = extract_reference_orbit(&traj, period, 100, 0.05).unwrap();
        let b = orbit_ending_at(&traj, period, traj.t_end() - period, 100);
        let c = orbit_ending_at(&traj, period, traj.t_end() - 2.0 * period, 100);
        for ((x, y), z) in a.states.iter().zip(&b.states).zip(&c.states) {
            assert!((x[0] - y[0]).abs() < 1e-9);
            assert!((x[0] - z[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn unconverged_extraction_fails() {
        let traj = sine(0.01, 2.0, 1.0, 1.0, 1201);
        assert!(matches!(
            extract_reference_orbit(&traj, 2.0, 64, 0.05),
            Err(ExperimentError::NotConverged { .. })
        ));
    }
}
