//! Fractional Adams-Bashforth-Moulton integrator (one predictor, one
//! corrector, full memory) for Caputo systems `D^alpha z = rhs(t, z)`.
//!
//! The right-hand side may keep its own delayed history. It is told about
//! every accepted grid state through [`FdeRhs::accept`] before it is asked
//! for the rate at that state, so a lookup at `t - T` with `T >= h` only
//! ever touches accepted data.

use crate::frac_calc::{gamma_fn, FractionalOrder};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RhsError {
    #[error("history lookup at t = {requested} is ahead of the last stored time {available}")]
    Causality { requested: f64, available: f64 },
    #[error("{0}")]
    Model(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("non-finite state at step {step} (t = {time})")]
    Divergence { step: usize, time: f64 },
    #[error("causality violation at step {step}: {source}")]
    Causality { step: usize, source: RhsError },
    #[error("right-hand side failed at step {step}: {source}")]
    Rhs { step: usize, source: RhsError },
    #[error("classical reference integrator requires alpha = 1, got {0}")]
    NotClassical(f64),
}

pub type Result<T> = std::result::Result<T, SolverError>;

/// Right-hand side of a (possibly history-dependent) Caputo system.
pub trait FdeRhs {
    fn dimension(&self) -> usize;

    fn eval(&mut self, t: f64, z: &[f64], out: &mut [f64]) -> std::result::Result<(), RhsError>;

    /// Called once per accepted grid state, in time order, starting with
    /// the initial state at step 0.
    fn accept(&mut self, _step: usize, _t: f64, _z: &[f64]) -> std::result::Result<(), RhsError> {
        Ok(())
    }
}

/// Memoryless right-hand side built from a closure.
pub struct FnRhs<F> {
    dim: usize,
    f: F,
}

pub fn rhs_fn<F>(dim: usize, f: F) -> FnRhs<F>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    FnRhs { dim, f }
}

impl<F> FdeRhs for FnRhs<F>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    fn dimension(&self) -> usize {
        self.dim
    }

    fn eval(&mut self, t: f64, z: &[f64], out: &mut [f64]) -> std::result::Result<(), RhsError> {
        (self.f)(t, z, out);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdeProblem {
    pub alpha: FractionalOrder,
    pub z0: Vec<f64>,
    pub t_end: f64,
    pub h: f64,
    /// Keep only the most recent `L` memory terms. `None` keeps everything.
    pub memory_window: Option<usize>,
}

impl FdeProblem {
    pub fn new(alpha: FractionalOrder, z0: Vec<f64>, t_end: f64, h: f64) -> Self {
        Self {
            alpha,
            z0,
            t_end,
            h,
            memory_window: None,
        }
    }

    pub fn validate(&self, dimension: usize) -> Result<()> {
        if dimension == 0 {
            return Err(SolverError::InvalidProblem("dimension must be at least 1".into()));
        }
        if self.z0.len() != dimension {
            return Err(SolverError::InvalidProblem(format!(
                "initial state has {} entries, rhs dimension is {dimension}",
                self.z0.len()
            )));
        }
        if self.z0.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::InvalidProblem("initial state is not finite".into()));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(SolverError::InvalidProblem(format!("step {} must be positive", self.h)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(SolverError::InvalidProblem(format!(
                "horizon {} must be positive",
                self.t_end
            )));
        }
        if self.memory_window == Some(0) {
            return Err(SolverError::InvalidProblem("memory window must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps needed to reach `t_end` on the uniform grid.
    pub fn steps(&self) -> usize {
        ((self.t_end / self.h) - 1e-9).ceil().max(1.0) as usize
    }

    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOutput {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub rhs_evals: usize,
}

impl SolverOutput {
    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("solver output always holds z0")
    }
}

/// Predictor and corrector weights for advancing from step `k` to `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeceWeights {
    /// `b_j = h^a / a * ((k+1-j)^a - (k-j)^a)`, `j = 0..=k`. The predictor
    /// multiplies their weighted sum by `1/Gamma(a)`.
    pub predictor: Vec<f64>,
    /// Corrector weights scaled by `h^a / Gamma(a+2)`, `j = 0..=k+1`; the
    /// last entry multiplies the rate at the predicted state.
    pub corrector: Vec<f64>,
}

/// Explicit weights for one step.
pub fn pece_weights(alpha: FractionalOrder, h: f64, k: usize) -> PeceWeights {
    let a = alpha.value();
    let kf = k as f64;
    let ha = h.powf(a);
    let predictor = (0..=k)
        .map(|j| {
            let l = (k - j) as f64;
            ha / a * ((l + 1.0).powf(a) - l.powf(a))
        })
        .collect();
    let cc = ha / gamma_fn(a + 2.0);
    let mut corrector = Vec::with_capacity(k + 2);
    corrector.push(cc * (kf.powf(a + 1.0) - (kf - a) * (kf + 1.0).powf(a)));
    for j in 1..=k {
        corrector.push(cc * second_difference(a, k - j));
    }
    corrector.push(cc);
    PeceWeights {
        predictor,
        corrector,
    }
}

/// `(l+2)^p + l^p - 2 (l+1)^p` with `p = a + 1`, evaluated without the
/// catastrophic cancellation of the naive form at large `l`.
fn second_difference(a: f64, l: usize) -> f64 {
    let p = a + 1.0;
    if a == 1.0 {
        return 2.0;
    }
    let m = l as f64 + 1.0;
    let x = 1.0 / m;
    let up = (p * x.ln_1p()).exp_m1();
    let down = if l == 0 {
        -1.0
    } else {
        (p * (-x).ln_1p()).exp_m1()
    };
    m.powf(p) * (up + down)
}

/// `(l+1)^a - l^a`.
fn first_difference(a: f64, l: usize) -> f64 {
    if a == 1.0 {
        return 1.0;
    }
    let lf = l as f64;
    if l == 0 {
        return 1.0;
    }
    lf.powf(a) * (a * (1.0 / lf).ln_1p()).exp_m1()
}

struct Weights {
    predictor_scale: f64,
    corrector_scale: f64,
    // first_diff[l] = (l+1)^a - l^a
    first_diff: Vec<f64>,
    // second_diff[l] = (l+2)^(a+1) + l^(a+1) - 2(l+1)^(a+1)
    second_diff: Vec<f64>,
    alpha: f64,
}

impl Weights {
    fn new(alpha: FractionalOrder, h: f64, steps: usize) -> Self {
        let a = alpha.value();
        let ha = h.powf(a);
        let (predictor_scale, corrector_scale) = if alpha.is_classical() {
            (h, h / 2.0)
        } else {
            (ha / gamma_fn(a + 1.0), ha / gamma_fn(a + 2.0))
        };
        Self {
            predictor_scale,
            corrector_scale,
            first_diff: (0..=steps).map(|l| first_difference(a, l)).collect(),
            second_diff: (0..=steps).map(|l| second_difference(a, l)).collect(),
            alpha: a,
        }
    }

    fn corrector_initial(&self, k: usize) -> f64 {
        let a = self.alpha;
        let kf = k as f64;
        if k == 0 {
            return a;
        }
        if a == 1.0 {
            return 1.0;
        }
        // k^(a+1) - (k-a)(k+1)^a = k^a * (k - (k-a)(1+1/k)^a)
        let ratio = (a * (1.0 / kf).ln_1p()).exp_m1();
        kf.powf(a) * (a - (kf - a) * ratio)
    }
}

/// Integrates `problem` with the fractional PECE scheme.
pub fn solve<R: FdeRhs + ?Sized>(problem: &FdeProblem, rhs: &mut R) -> Result<SolverOutput> {
    let d = rhs.dimension();
    problem.validate(d)?;
    let steps = problem.steps();
    let w = Weights::new(problem.alpha, problem.h, steps);
    let z0 = problem.z0.clone();

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut memory = vec![0.0; (steps + 1) * d];
    let mut rhs_evals = 0usize;

    let mut pred_acc = vec![0.0; d];
    let mut corr_acc = vec![0.0; d];
    let mut predicted = vec![0.0; d];
    let mut fresh = vec![0.0; d];
    let mut corrected = vec![0.0; d];

    rhs.accept(0, 0.0, &z0).map_err(|e| wrap(0, e))?;
    rhs.eval(0.0, &z0, &mut memory[..d]).map_err(|e| wrap(0, e))?;
    rhs_evals += 1;
    times.push(0.0);
    states.push(z0.clone());

    for k in 0..steps {
        let t_next = problem.time(k + 1);
        let first = match problem.memory_window {
            Some(l) => (k + 1).saturating_sub(l),
            None => 0,
        };
        pred_acc.iter_mut().for_each(|v| *v = 0.0);
        corr_acc.iter_mut().for_each(|v| *v = 0.0);
        for j in first..=k {
            let row = &memory[j * d..(j + 1) * d];
            let bj = w.first_diff[k - j];
            let aj = if j == 0 {
                w.corrector_initial(k)
            } else {
                w.second_diff[k - j]
            };
            for c in 0..d {
                pred_acc[c] += bj * row[c];
                corr_acc[c] += aj * row[c];
            }
        }
        for c in 0..d {
            predicted[c] = z0[c] + w.predictor_scale * pred_acc[c];
        }
        if predicted.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::Divergence {
                step: k + 1,
                time: t_next,
            });
        }
        rhs.eval(t_next, &predicted, &mut fresh)
            .map_err(|e| wrap(k + 1, e))?;
        rhs_evals += 1;
        for c in 0..d {
            corrected[c] = z0[c] + w.corrector_scale * (fresh[c] + corr_acc[c]);
        }
        if corrected.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::Divergence {
                step: k + 1,
                time: t_next,
            });
        }
        rhs.accept(k + 1, t_next, &corrected)
            .map_err(|e| wrap(k + 1, e))?;
        if k + 1 < steps {
            rhs.eval(t_next, &corrected, &mut memory[(k + 1) * d..(k + 2) * d])
                .map_err(|e| wrap(k + 1, e))?;
            rhs_evals += 1;
        }
        times.push(t_next);
        states.push(corrected.clone());
    }

    Ok(SolverOutput {
        times,
        states,
        rhs_evals,
    })
}

fn wrap(step: usize, e: RhsError) -> SolverError {
    match e {
        RhsError::Causality { .. } => SolverError::Causality { step, source: e },
        RhsError::Model(_) => SolverError::Rhs { step, source: e },
    }
}

/// Classical fixed-step fourth-order Runge-Kutta on the same right-hand
/// side. Only valid for `alpha = 1`; used as an independent oracle.
pub fn solve_reference_classical<R: FdeRhs + ?Sized>(
    problem: &FdeProblem,
    rhs: &mut R,
) -> Result<SolverOutput> {
    if !problem.alpha.is_classical() {
        return Err(SolverError::NotClassical(problem.alpha.value()));
    }
    let d = rhs.dimension();
    problem.validate(d)?;
    let steps = problem.steps();
    let h = problem.h;

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut z = problem.z0.clone();
    let mut k1 = vec![0.0; d];
    let mut k2 = vec![0.0; d];
    let mut k3 = vec![0.0; d];
    let mut k4 = vec![0.0; d];
    let mut stage = vec![0.0; d];
    let mut rhs_evals = 0;

    rhs.accept(0, 0.0, &z).map_err(|e| wrap(0, e))?;
    times.push(0.0);
    states.push(z.clone());
    for k in 0..steps {
        let t = problem.time(k);
        let step = k + 1;
        rhs.eval(t, &z, &mut k1).map_err(|e| wrap(step, e))?;
        for c in 0..d {
            stage[c] = z[c] + 0.5 * h * k1[c];
        }
        rhs.eval(t + 0.5 * h, &stage, &mut k2).map_err(|e| wrap(step, e))?;
        for c in 0..d {
            stage[c] = z[c] + 0.5 * h * k2[c];
        }
        rhs.eval(t + 0.5 * h, &stage, &mut k3).map_err(|e| wrap(step, e))?;
        for c in 0..d {
            stage[c] = z[c] + h * k3[c];
        }
        rhs.eval(t + h, &stage, &mut k4).map_err(|e| wrap(step, e))?;
        rhs_evals += 4;
        for c in 0..d {
            z[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::Divergence {
                step,
                time: problem.time(step),
            });
        }
        let t_next = problem.time(step);
        rhs.accept(step, t_next, &z).map_err(|e| wrap(step, e))?;
        times.push(t_next);
        states.push(z.clone());
    }
    Ok(SolverOutput {
        times,
        states,
        rhs_evals,
    })
}
