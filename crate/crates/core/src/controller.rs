//! Adaptive delayed-feedback sliding-mode control.
//!
//! The tracking error is `e = x(t) - x(t - T)`, the sliding surface is
//! `S = e_n + sum_i eta_i I^a e_i`, and the control splits into
//!
//! ```text
//! u_eq = -(sum eta_i e_i + f(t,x) - f(t-T,x~) - g(t-T,x~) u~) / g(t,x)
//! u_ad = -(F(t,x).th^(t) - F(t-T,x~).th^(t-T) + 2 k^ sw(S)) / g(t,x)
//! u_s  = -(M + mu) sw(S) / g(t,x)
//! ```
//!
//! with adaptation `D^a th^_i = gamma_i S (F_i(t,x) - F_i(t-T,x~))` and
//! `D^a k^ = 2 gamma_k |S|`. `sw` is sign, saturation or a centred
//! sigmoid. A Pyragas-style linear delayed feedback is kept as a baseline.

use crate::delay_history::DelayedSample;
use crate::frac_calc::{
    fractional_integral, validate_sliding_gains, FracCalcError, FractionalOrder, RunningIntegral,
    SampledSignal,
};
use crate::systems::{dot, SystemDefinition};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControllerError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("control gain g(t, x) = {0} is singular")]
    SingularGain(f64),
    #[error("invalid controller configuration: {0}")]
    InvalidConfig(String),
    #[error("sliding gains {eta:?} are not admissible for alpha = {alpha}")]
    InadmissibleGains { eta: Vec<f64>, alpha: f64 },
    #[error(transparent)]
    FracCalc(#[from] FracCalcError),
}

pub type Result<T> = std::result::Result<T, ControllerError>;

const SINGULAR_GAIN: f64 = 1e-9;

/// Replacement for `sgn(S)` in `u_ad` and `u_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Switching {
    Sign,
    /// `sat(S / delta)`.
    Saturation { delta: f64 },
    /// `2 / (1 + exp(-S / delta)) - 1`, the logistic curve centred on zero.
    Sigmoid { delta: f64 },
}

impl Switching {
    pub fn apply(&self, s: f64) -> f64 {
        match *self {
            Switching::Sign => sgn(s),
            Switching::Saturation { delta } => {
                let r = s / delta;
                if r.abs() < 1.0 {
                    r
                } else {
                    sgn(r)
                }
            }
            Switching::Sigmoid { delta } => 2.0 / (1.0 + (-s / delta).exp()) - 1.0,
        }
    }

    pub fn delta(&self) -> Option<f64> {
        match *self {
            Switching::Sign => None,
            Switching::Saturation { delta } | Switching::Sigmoid { delta } => Some(delta),
        }
    }
}

/// Sign with `sgn(0) = 0`.
#[inline]
pub fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    /// Period of the orbit, seconds.
    pub period: f64,
    pub eta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub gamma_k: f64,
    pub mu: f64,
    /// Robustness constant `M`.
    pub robustness: f64,
    pub switching: Switching,
    /// Activation time, seconds.
    pub t_on: f64,
    /// Use `u_s = -mu sw(S) / g`, valid when the true parameters are constant.
    #[serde(default)]
    pub reduced_switching: bool,
}

impl ControllerConfig {
    /// Checks gains and the sliding-surface admissibility for `alpha`.
    pub fn validate(&self, alpha: FractionalOrder, n: usize, m: usize) -> Result<()> {
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(ControllerError::InvalidConfig(format!(
                "period {} must be positive",
                self.period
            )));
        }
        if self.eta.len() != n {
            return Err(ControllerError::Dimension(format!(
                "{} sliding gains for a plant of order {n}",
                self.eta.len()
            )));
        }
        if self.gamma.len() != m {
            return Err(ControllerError::Dimension(format!(
                "{} adaptation gains for {m} parameters",
                self.gamma.len()
            )));
        }
        let report = validate_sliding_gains(alpha, &self.eta)?;
        if !report.admissible {
            return Err(ControllerError::InadmissibleGains {
                eta: self.eta.clone(),
                alpha: alpha.value(),
            });
        }
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ControllerError::InvalidConfig(format!("{name} = {v} must be positive")))
            }
        };
        for (i, &g) in self.gamma.iter().enumerate() {
            positive(&format!("gamma_{}", i + 1), g)?;
        }
        for (i, &e) in self.eta.iter().enumerate() {
            positive(&format!("eta_{}", i + 1), e)?;
        }
        positive("gamma_k", self.gamma_k)?;
        positive("mu", self.mu)?;
        positive("M", self.robustness)?;
        if let Some(delta) = self.switching.delta() {
            positive("delta", delta)?;
        }
        if !self.t_on.is_finite() || self.t_on < 0.0 {
            return Err(ControllerError::InvalidConfig(format!(
                "t_on = {} must be non-negative",
                self.t_on
            )));
        }
        Ok(())
    }

    pub fn is_active(&self, t: f64) -> bool {
        t >= self.t_on
    }
}

/// Adaptation states; these live inside the augmented solver state.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    pub theta_hat: Vec<f64>,
    pub k_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ControlDecomposition {
    pub u_eq: f64,
    pub u_ad: f64,
    pub u_s: f64,
    pub u: f64,
    pub s: f64,
    pub e: Vec<f64>,
    /// Lyapunov diagnostic, computed against the plant's true parameters.
    pub v: f64,
}

/// `e = x - x~`.
pub fn compute_error(x: &[f64], x_delayed: &[f64]) -> Result<Vec<f64>> {
    if x.len() != x_delayed.len() {
        return Err(ControllerError::Dimension(format!(
            "state {} vs delayed state {}",
            x.len(),
            x_delayed.len()
        )));
    }
    Ok(x.iter().zip(x_delayed).map(|(a, b)| a - b).collect())
}

/// Sliding surface at the last sample of aligned per-component error
/// histories.
pub fn sliding_surface(
    e_history: &[SampledSignal],
    alpha: FractionalOrder,
    eta: &[f64],
) -> Result<f64> {
    let n = eta.len();
    if e_history.len() != n || n == 0 {
        return Err(ControllerError::Dimension(format!(
            "{} error histories for {n} gains",
            e_history.len()
        )));
    }
    let first = &e_history[0];
    let aligned = e_history
        .iter()
        .all(|s| s.len() == first.len() && s.h == first.h && s.t0 == first.t0);
    if !aligned || first.is_empty() {
        return Err(ControllerError::Dimension("misaligned error histories".into()));
    }
    let mut s = e_history[n - 1].last().expect("non-empty");
    for (signal, &gain) in e_history.iter().zip(eta) {
        let integral = fractional_integral(alpha, signal)?;
        s += gain * integral.last().expect("non-empty");
    }
    Ok(s)
}

/// Sliding surface with the fractional integrals updated once per grid step.
///
/// [`SlidingSurface::value`] evaluates `S` at the grid point following the
/// last [`push`](SlidingSurface::push); the integral terms only use pushed
/// samples, so the current error enters through the `e_n` term alone.
#[derive(Debug, Clone)]
pub struct SlidingSurface {
    eta: Vec<f64>,
    integrals: Vec<RunningIntegral>,
}

impl SlidingSurface {
    pub fn new(alpha: FractionalOrder, h: f64, eta: &[f64], capacity: usize) -> Result<Self> {
        let integrals = eta
            .iter()
            .map(|_| RunningIntegral::with_capacity(alpha, h, capacity))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self {
            eta: eta.to_vec(),
            integrals,
        })
    }

    pub fn push(&mut self, e: &[f64]) {
        for (integral, &v) in self.integrals.iter_mut().zip(e) {
            integral.push(v);
        }
    }

    pub fn integral_term(&self) -> f64 {
        self.integrals
            .iter()
            .zip(&self.eta)
            .map(|(i, g)| g * i.value())
            .sum()
    }

    pub fn value(&self, e: &[f64]) -> f64 {
        e[e.len() - 1] + self.integral_term()
    }

    pub fn samples(&self) -> usize {
        self.integrals.first().map_or(0, |i| i.len())
    }
}

/// Scratch space for [`control_law_into`]; avoids per-call allocation.
#[derive(Debug, Clone)]
pub struct LawScratch {
    reg_now: Vec<f64>,
    reg_delayed: Vec<f64>,
}

impl LawScratch {
    pub fn new(m: usize) -> Self {
        Self {
            reg_now: vec![0.0; m],
            reg_delayed: vec![0.0; m],
        }
    }

    pub fn regressors(&self) -> (&[f64], &[f64]) {
        (&self.reg_now, &self.reg_delayed)
    }
}

/// Evaluates the control law; `s` is the sliding-surface value at `t`.
///
/// Before `t_on` the control terms are zero; `e`, `S` and `V` are still
/// reported.
pub fn control_law(
    t: f64,
    x: &[f64],
    delayed: &DelayedSample,
    state: &ControllerState,
    s: f64,
    system: &SystemDefinition,
    config: &ControllerConfig,
) -> Result<ControlDecomposition> {
    let mut scratch = LawScratch::new(system.m);
    let mut out = ControlDecomposition::default();
    control_law_into(t, x, delayed, state, s, system, config, &mut scratch, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
pub fn control_law_into(
    t: f64,
    x: &[f64],
    delayed: &DelayedSample,
    state: &ControllerState,
    s: f64,
    system: &SystemDefinition,
    config: &ControllerConfig,
    scratch: &mut LawScratch,
    out: &mut ControlDecomposition,
) -> Result<()> {
    let (n, m) = (system.n, system.m);
    if x.len() != n || delayed.x.len() != n {
        return Err(ControllerError::Dimension(format!(
            "state {} / delayed {} for plant order {n}",
            x.len(),
            delayed.x.len()
        )));
    }
    if state.theta_hat.len() != m || delayed.theta_hat.len() != m || config.eta.len() != n {
        return Err(ControllerError::Dimension(
            "parameter estimate or gain length".into(),
        ));
    }
    out.e.clear();
    out.e.extend(x.iter().zip(&delayed.x).map(|(a, b)| a - b));
    out.s = s;
    out.v = lyapunov_diagnostic(
        s,
        &system.theta_true,
        &state.theta_hat,
        system.k_true,
        state.k_hat,
        &config.gamma,
        config.gamma_k,
    );
    let t_delayed = t - config.period;
    system.regressor_into(t, x, &mut scratch.reg_now);
    system.regressor_into(t_delayed, &delayed.x, &mut scratch.reg_delayed);
    if !config.is_active(t) {
        out.u_eq = 0.0;
        out.u_ad = 0.0;
        out.u_s = 0.0;
        out.u = 0.0;
        return Ok(());
    }
    let g = system.g(t, x);
    if !(g.abs() >= SINGULAR_GAIN) {
        return Err(ControllerError::SingularGain(g));
    }
    let sw = config.switching.apply(s);
    let sliding: f64 = config.eta.iter().zip(&out.e).map(|(a, b)| a * b).sum();
    let known = system.f(t, x) - system.f(t_delayed, &delayed.x)
        - system.g(t_delayed, &delayed.x) * delayed.u;
    out.u_eq = -(sliding + known) / g;
    let adaptive = dot(&scratch.reg_now, &state.theta_hat)
        - dot(&scratch.reg_delayed, &delayed.theta_hat)
        + 2.0 * state.k_hat * sw;
    out.u_ad = -adaptive / g;
    let switching_gain = if config.reduced_switching {
        config.mu
    } else {
        config.robustness + config.mu
    };
    out.u_s = -switching_gain * sw / g;
    out.u = out.u_eq + out.u_ad + out.u_s;
    Ok(())
}

/// Caputo rates of the parameter and bound estimates.
pub fn adaptation_rates(
    s: f64,
    regressor_now: &[f64],
    regressor_delayed: &[f64],
    config: &ControllerConfig,
) -> Result<(Vec<f64>, f64)> {
    let mut theta_rates = vec![0.0; config.gamma.len()];
    let k_rate = adaptation_rates_into(s, regressor_now, regressor_delayed, config, &mut theta_rates)?;
    Ok((theta_rates, k_rate))
}

pub fn adaptation_rates_into(
    s: f64,
    regressor_now: &[f64],
    regressor_delayed: &[f64],
    config: &ControllerConfig,
    theta_rates: &mut [f64],
) -> Result<f64> {
    let m = config.gamma.len();
    if regressor_now.len() != m || regressor_delayed.len() != m || theta_rates.len() != m {
        return Err(ControllerError::Dimension(format!(
            "regressors {}/{} for {m} adaptation gains",
            regressor_now.len(),
            regressor_delayed.len()
        )));
    }
    for i in 0..m {
        theta_rates[i] = config.gamma[i] * s * (regressor_now[i] - regressor_delayed[i]);
    }
    Ok(2.0 * config.gamma_k * s.abs())
}

/// `V = S^2/2 + sum (theta_i - th^_i)^2 / (2 gamma_i) + (k - k^)^2 / (2 gamma_k)`.
pub fn lyapunov_diagnostic(
    s: f64,
    theta: &[f64],
    theta_hat: &[f64],
    k: f64,
    k_hat: f64,
    gamma: &[f64],
    gamma_k: f64,
) -> f64 {
    let params: f64 = theta
        .iter()
        .zip(theta_hat)
        .zip(gamma)
        .map(|((a, b), g)| (a - b).powi(2) / (2.0 * g))
        .sum();
    0.5 * s * s + params + (k - k_hat).powi(2) / (2.0 * gamma_k)
}

/// `u = -sum K_i (x_i - x~_i)` once `t >= t_on`, zero before.
pub fn linear_delayed_feedback(
    t: f64,
    x: &[f64],
    x_delayed: &[f64],
    gains: &[f64],
    t_on: f64,
) -> Result<f64> {
    if x.len() != x_delayed.len() || x.len() != gains.len() {
        return Err(ControllerError::Dimension(format!(
            "state {} / delayed {} / gains {}",
            x.len(),
            x_delayed.len(),
            gains.len()
        )));
    }
    if t < t_on {
        return Ok(0.0);
    }
    Ok(-x
        .iter()
        .zip(x_delayed)
        .zip(gains)
        .map(|((a, b), k)| k * (a - b))
        .sum::<f64>())
}
