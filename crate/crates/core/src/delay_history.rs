//! Uniform-grid record of past states, controls and parameter estimates,
//! queried at `t - T`.

use crate::fde_solver::RhsError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HistoryError {
    #[error("append at t = {got} out of order, expected t = {expected}")]
    OutOfOrder { expected: f64, got: f64 },
    #[error("record has state length {state}/{theta}, buffer expects {want_state}/{want_theta}")]
    Shape {
        state: usize,
        theta: usize,
        want_state: usize,
        want_theta: usize,
    },
    #[error("delay must be positive, got {0}")]
    NonPositiveDelay(f64),
    #[error("step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("lookup at t = {requested} ahead of last stored time {available}")]
    NotYetAvailable { requested: f64, available: f64 },
    #[error("history is empty")]
    Empty,
}

impl From<HistoryError> for RhsError {
    fn from(e: HistoryError) -> Self {
        match e {
            HistoryError::NotYetAvailable {
                requested,
                available,
            } => RhsError::Causality {
                requested,
                available,
            },
            other => RhsError::Model(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, HistoryError>;

/// How lookups before the first stored sample resolve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PreHistory {
    /// Replay the first record unchanged.
    HoldInitial,
    /// First record's state and estimates, with the control forced to zero.
    #[default]
    ZeroControl,
}

/// Result of a delayed lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayedSample {
    pub x: Vec<f64>,
    pub u: f64,
    pub theta_hat: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct HistoryBuffer {
    t0: f64,
    h: f64,
    n: usize,
    m: usize,
    policy: PreHistory,
    // flat storage, one row per grid point
    states: Vec<f64>,
    controls: Vec<f64>,
    thetas: Vec<f64>,
}

const GRID_TOL: f64 = 1e-9;

impl HistoryBuffer {
    pub fn new(t0: f64, h: f64, n: usize, m: usize, policy: PreHistory) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(HistoryError::NonPositiveStep(h));
        }
        Ok(Self {
            t0,
            h,
            n,
            m,
            policy,
            states: Vec::new(),
            controls: Vec::new(),
            thetas: Vec::new(),
        })
    }

    pub fn reserve(&mut self, records: usize) {
        self.states.reserve(records * self.n);
        self.controls.reserve(records);
        self.thetas.reserve(records * self.m);
    }

    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.h
    }

    pub fn last_time(&self) -> Option<f64> {
        self.len().checked_sub(1).map(|i| self.time(i))
    }

    /// Stores the record for time `t`, which must be the next grid point.
    pub fn append(&mut self, t: f64, x: &[f64], u: f64, theta_hat: &[f64]) -> Result<()> {
        if x.len() != self.n || theta_hat.len() != self.m {
            return Err(HistoryError::Shape {
                state: x.len(),
                theta: theta_hat.len(),
                want_state: self.n,
                want_theta: self.m,
            });
        }
        let expected = self.time(self.len());
        if (t - expected).abs() > GRID_TOL * self.h.max(expected.abs()) {
            return Err(HistoryError::OutOfOrder { expected, got: t });
        }
        self.states.extend_from_slice(x);
        self.controls.push(u);
        self.thetas.extend_from_slice(theta_hat);
        Ok(())
    }

    pub fn record(&self, i: usize) -> Option<DelayedSample> {
        (i < self.len()).then(|| DelayedSample {
            x: self.state(i).to_vec(),
            u: self.controls[i],
            theta_hat: self.theta(i).to_vec(),
        })
    }

    fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.n..(i + 1) * self.n]
    }

    fn theta(&self, i: usize) -> &[f64] {
        &self.thetas[i * self.m..(i + 1) * self.m]
    }

    /// Returns `(x(t-T), u(t-T), theta_hat(t-T))`.
    pub fn lookup_delayed(&self, t: f64, delay: f64) -> Result<DelayedSample> {
        let mut out = DelayedSample {
            x: vec![0.0; self.n],
            u: 0.0,
            theta_hat: vec![0.0; self.m],
        };
        self.lookup_into(t, delay, &mut out)?;
        Ok(out)
    }

    /// Allocation-free form of [`lookup_delayed`](Self::lookup_delayed).
    pub fn lookup_into(&self, t: f64, delay: f64, out: &mut DelayedSample) -> Result<()> {
        if !(delay.is_finite() && delay > 0.0) {
            return Err(HistoryError::NonPositiveDelay(delay));
        }
        if self.is_empty() {
            return Err(HistoryError::Empty);
        }
        out.x.resize(self.n, 0.0);
        out.theta_hat.resize(self.m, 0.0);
        let tau = t - delay;
        let pos = (tau - self.t0) / self.h;
        let nearest = pos.round();
        let on_grid = (pos - nearest).abs() <= GRID_TOL;
        if (on_grid && nearest <= 0.0) || pos < 0.0 {
            out.x.copy_from_slice(self.state(0));
            out.theta_hat.copy_from_slice(self.theta(0));
            out.u = match (self.policy, on_grid && nearest == 0.0) {
                (_, true) | (PreHistory::HoldInitial, _) => self.controls[0],
                (PreHistory::ZeroControl, false) => 0.0,
            };
            return Ok(());
        }
        let last = self.len() - 1;
        let available = self.time(last);
        if on_grid {
            let i = nearest as usize;
            if i > last {
                return Err(HistoryError::NotYetAvailable {
                    requested: tau,
                    available,
                });
            }
            out.x.copy_from_slice(self.state(i));
            out.theta_hat.copy_from_slice(self.theta(i));
            out.u = self.controls[i];
            return Ok(());
        }
        let left = pos.floor() as usize;
        if left + 1 > last {
            return Err(HistoryError::NotYetAvailable {
                requested: tau,
                available,
            });
        }
        let frac = pos - left as f64;
        let (x0, x1) = (self.state(left), self.state(left + 1));
        for (o, (a, b)) in out.x.iter_mut().zip(x0.iter().zip(x1)) {
            *o = a + frac * (b - a);
        }
        let (th0, th1) = (self.theta(left), self.theta(left + 1));
        for (o, (a, b)) in out.theta_hat.iter_mut().zip(th0.iter().zip(th1)) {
            *o = a + frac * (b - a);
        }
        out.u = self.controls[left];
        Ok(())
    }
}
