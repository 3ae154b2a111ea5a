//! Control-affine fractional plants in chain form:
//!
//! ```text
//! D^a x_i = x_{i+1},                                   i < n
//! D^a x_n = f(t,x) + F(t,x)^T theta + d(t) + g(t,x) u
//! ```
//!
//! plus the two benchmark plants (Duffing, Gyro).

use crate::frac_calc::FractionalOrder;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SystemError {
    #[error("state has {got} entries, plant has {want}")]
    Dimension { got: usize, want: usize },
    #[error("non-finite input to plant at t = {t}")]
    NonFinite { t: f64 },
    #[error("unknown plant {0:?} (expected \"duffing\" or \"gyro\")")]
    UnknownPlant(String),
}

pub type ScalarFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
pub type RegressorFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;
pub type DisturbanceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A plant of the control-affine chain class.
///
/// `theta_true` and `k_true` are simulation ground truth; controllers only
/// see them through the Lyapunov diagnostic.
#[derive(Clone)]
pub struct SystemDefinition {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub alpha: FractionalOrder,
    pub drift: ScalarFn,
    pub regressor: RegressorFn,
    pub theta_true: Vec<f64>,
    pub gain: ScalarFn,
    pub disturbance: DisturbanceFn,
    pub k_true: f64,
    /// Period of the orbit to stabilize.
    pub period: f64,
}

impl fmt::Debug for SystemDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemDefinition")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("alpha", &self.alpha)
            .field("theta_true", &self.theta_true)
            .field("k_true", &self.k_true)
            .field("period", &self.period)
            .finish_non_exhaustive()
    }
}

impl SystemDefinition {
    #[inline]
    pub fn f(&self, t: f64, x: &[f64]) -> f64 {
        (self.drift)(t, x)
    }

    #[inline]
    pub fn g(&self, t: f64, x: &[f64]) -> f64 {
        (self.gain)(t, x)
    }

    #[inline]
    pub fn d(&self, t: f64) -> f64 {
        (self.disturbance)(t)
    }

    #[inline]
    pub fn regressor_into(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.regressor)(t, x, out)
    }

    pub fn regressor(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        self.regressor_into(t, x, &mut out);
        out
    }

    /// Uncontrolled last-channel rate `f + F^T theta + d`.
    pub fn free_rate(&self, t: f64, x: &[f64]) -> f64 {
        let mut reg = vec![0.0; self.m];
        self.regressor_into(t, x, &mut reg);
        self.f(t, x) + dot(&reg, &self.theta_true) + self.d(t)
    }

    pub fn with_alpha(mut self, alpha: FractionalOrder) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_period(mut self, period: f64) -> Self {
        self.period = period;
        self
    }

    /// Looks a benchmark plant up by name.
    pub fn by_name(name: &str) -> Result<Self, SystemError> {
        match name.trim().to_ascii_lowercase().as_str() {
            "duffing" => Ok(duffing_system()),
            "gyro" => Ok(gyro_system()),
            _ => Err(SystemError::UnknownPlant(name.to_string())),
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Fractional Duffing oscillator with `theta = (-1, 1, 0.15, 0.3)`,
/// `omega = 1`, disturbance `0.2 cos 2t`, gain `1 + x1^2`, `T = 2 pi`.
pub fn duffing_system() -> SystemDefinition {
    const OMEGA: f64 = 1.0;
    SystemDefinition {
        name: "duffing".into(),
        n: 2,
        m: 4,
        alpha: FractionalOrder::new(0.98).expect("valid order"),
        drift: Arc::new(|_, _| 0.0),
        regressor: Arc::new(|t, x, out| {
            out[0] = -x[0];
            out[1] = -x[0].powi(3);
            out[2] = -x[1];
            out[3] = (OMEGA * t).cos();
        }),
        theta_true: vec![-1.0, 1.0, 0.15, 0.3],
        gain: Arc::new(|_, x| 1.0 + x[0] * x[0]),
        disturbance: Arc::new(|t| 0.2 * (2.0 * t).cos()),
        k_true: 0.2,
        period: 2.0 * PI,
    }
}

pub const GYRO_FORCING_AMPLITUDE: f64 = 35.5;
pub const GYRO_FORCING_FREQUENCY: f64 = 25.0;

/// Guard width on `|sin x1|` below which [`gyro_restoring_term`] stops
/// using the closed form.
const GYRO_GUARD: f64 = 1e-4;

/// `(1 - cos y)^2 / sin^3 y`, odd, smooth through `y = 0` and singular at
/// `y = pi (mod 2 pi)`.
///
/// Away from the guard it is computed as `sin(y/2) / (2 cos^3(y/2))`,
/// which is algebraically identical and free of the cancellation in
/// `1 - cos y`. Within the guard near zero it uses `r/4 + r^3/12`; near
/// the pole it is evaluated at the guard boundary.
pub fn gyro_restoring_term(y: f64) -> f64 {
    let sin_y = y.sin();
    if sin_y.abs() < GYRO_GUARD {
        // r is y reduced to (-pi, pi]
        let r = y - 2.0 * PI * (y / (2.0 * PI)).round();
        if r.abs() < 0.5 * PI {
            return r / 4.0 + r.powi(3) / 12.0;
        }
        let half = (0.5 * y).sin();
        let c = (0.5 * y).cos();
        let c = c.signum() * c.abs().max(0.5 * GYRO_GUARD);
        return half / (2.0 * c.powi(3));
    }
    let (s, c) = (0.5 * y).sin_cos();
    s / (2.0 * c * c * c)
}

/// Fractional chaotic gyro with `theta = (psi1^2, psi2, psi3, beta) =
/// (100, 0.5, 0.05, 1)`, drift `35.5 sin(25 t) sin x1`, disturbance
/// `0.1 sin t`, gain `1 + x1^2`, `T = 4 pi`.
pub fn gyro_system() -> SystemDefinition {
    gyro_system_with_forcing(GYRO_FORCING_AMPLITUDE, GYRO_FORCING_FREQUENCY)
}

/// Gyro with forcing `amplitude * sin(frequency * t) * sin(x1)`.
pub fn gyro_system_with_forcing(amplitude: f64, frequency: f64) -> SystemDefinition {
    SystemDefinition {
        name: "gyro".into(),
        n: 2,
        m: 4,
        alpha: FractionalOrder::new(0.98).expect("valid order"),
        drift: Arc::new(move |t, x| amplitude * (frequency * t).sin() * x[0].sin()),
        regressor: Arc::new(|_, x, out| {
            out[0] = -gyro_restoring_term(x[0]);
            out[1] = -x[1];
            out[2] = -x[1].powi(3);
            out[3] = x[0].sin();
        }),
        theta_true: vec![100.0, 0.5, 0.05, 1.0],
        gain: Arc::new(|_, x| 1.0 + x[0] * x[0]),
        disturbance: Arc::new(|t| 0.1 * t.sin()),
        k_true: 0.1,
        period: 4.0 * PI,
    }
}

/// Plant rates `(x_2, ..., x_n, f + F^T theta + d + g u)`.
pub fn eval_plant_rate(
    system: &SystemDefinition,
    t: f64,
    x: &[f64],
    u: f64,
) -> Result<Vec<f64>, SystemError> {
    let mut out = vec![0.0; system.n];
    let mut reg = vec![0.0; system.m];
    eval_plant_rate_into(system, t, x, u, &mut reg, &mut out)?;
    Ok(out)
}

/// In-place form of [`eval_plant_rate`]; `regressor` is scratch of length `m`.
pub fn eval_plant_rate_into(
    system: &SystemDefinition,
    t: f64,
    x: &[f64],
    u: f64,
    regressor: &mut [f64],
    out: &mut [f64],
) -> Result<(), SystemError> {
    let n = system.n;
    if x.len() != n {
        return Err(SystemError::Dimension { got: x.len(), want: n });
    }
    if !t.is_finite() || !u.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return Err(SystemError::NonFinite { t });
    }
    out[..n - 1].copy_from_slice(&x[1..]);
    system.regressor_into(t, x, regressor);
    out[n - 1] = system.f(t, x)
        + dot(regressor, &system.theta_true)
        + system.d(t)
        + system.g(t, x) * u;
    Ok(())
}
