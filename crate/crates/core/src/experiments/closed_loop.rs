use super::config::{ControllerKind, ScenarioConfig};
use super::Result;
use crate::controller::{
    adaptation_rates_into, control_law_into, linear_delayed_feedback, lyapunov_diagnostic,
    ControlDecomposition, ControllerState, LawScratch, SlidingSurface,
};
use crate::delay_history::{DelayedSample, HistoryBuffer};
use crate::fde_solver::{solve, FdeProblem, FdeRhs, RhsError};
use crate::systems::{eval_plant_rate_into, SystemDefinition};

/// One recorded grid point of a closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: f64,
    pub u_eq: f64,
    pub u_ad: f64,
    pub u_s: f64,
    pub s: f64,
    pub e: Vec<f64>,
    pub theta_hat: Vec<f64>,
    pub k_hat: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub system: String,
    pub kind: ControllerKind,
    pub n: usize,
    pub m: usize,
    pub h: f64,
    pub period: f64,
    pub t_on: f64,
    pub records: Vec<StepRecord>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn t0(&self) -> f64 {
        self.records.first().map_or(0.0, |r| r.t)
    }

    pub fn t_end(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.t)
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.records[i].x
    }

    /// Index of the first grid point at or after `t`.
    pub fn index_at_or_after(&self, t: f64) -> usize {
        let pos = ((t - self.t0()) / self.h - 1e-9).ceil().max(0.0) as usize;
        pos.min(self.len().saturating_sub(1))
    }

    /// Assembles a trajectory from bare states (no controller data), e.g. for
    /// metric checks on synthetic signals.
    pub fn from_states(h: f64, period: f64, states: Vec<Vec<f64>>) -> Self {
        let n = states.first().map_or(0, |s| s.len());
        let records = states
            .into_iter()
            .enumerate()
            .map(|(i, x)| StepRecord {
                t: i as f64 * h,
                e: vec![0.0; x.len()],
                x,
                u: 0.0,
                u_eq: 0.0,
                u_ad: 0.0,
                u_s: 0.0,
                s: 0.0,
                theta_hat: vec![],
                k_hat: 0.0,
                v: 0.0,
            })
            .collect();
        Self {
            system: "synthetic".into(),
            kind: ControllerKind::None,
            n,
            m: 0,
            h,
            period,
            t_on: 0.0,
            records,
        }
    }
}

/// Augmented right-hand side `z = (x, theta_hat, k_hat)` of a closed loop.
pub struct ClosedLoop<'a> {
    cfg: &'a ScenarioConfig,
    history: HistoryBuffer,
    surface: SlidingSurface,
    delayed: DelayedSample,
    scratch: LawScratch,
    decomposition: ControlDecomposition,
    state: ControllerState,
    plant_regressor: Vec<f64>,
    theta_rates: Vec<f64>,
    cached: Option<(f64, Vec<f64>, Vec<f64>)>,
    records: Vec<StepRecord>,
}

impl<'a> ClosedLoop<'a> {
    pub fn new(cfg: &'a ScenarioConfig, steps: usize) -> Result<Self> {
        let sys = &cfg.system;
        let sim = &cfg.simulation;
        let mut history = HistoryBuffer::new(0.0, sim.h, sys.n, sys.m, sim.pre_history)
            .map_err(|e| super::ExperimentError::Config(e.to_string()))?;
        history.reserve(steps + 1);
        let surface = SlidingSurface::new(sys.alpha, sim.h, &cfg.controller.eta, steps + 1)?;
        Ok(Self {
            cfg,
            history,
            surface,
            delayed: DelayedSample {
                x: vec![0.0; sys.n],
                u: 0.0,
                theta_hat: vec![0.0; sys.m],
            },
            scratch: LawScratch::new(sys.m),
            decomposition: ControlDecomposition::default(),
            state: ControllerState {
                theta_hat: vec![0.0; sys.m],
                k_hat: 0.0,
            },
            plant_regressor: vec![0.0; sys.m],
            theta_rates: vec![0.0; sys.m],
            cached: None,
            records: Vec::with_capacity(steps + 1),
        })
    }

    fn system(&self) -> &SystemDefinition {
        &self.cfg.system
    }

    /// Control decomposition and augmented rates at `(t, z)`.
    fn evaluate(&mut self, t: f64, z: &[f64], out: &mut [f64]) -> std::result::Result<(), RhsError> {
        let cfg = self.cfg;
        let sys = &cfg.system;
        let (n, m) = (sys.n, sys.m);
        let x = &z[..n];
        self.state.theta_hat.copy_from_slice(&z[n..n + m]);
        self.state.k_hat = z[n + m];
        if self.history.is_empty() {
            // very first point: pre-history is the initial state itself
            self.delayed.x.copy_from_slice(x);
            self.delayed.theta_hat.copy_from_slice(&self.state.theta_hat);
            self.delayed.u = 0.0;
        } else {
            self.history
                .lookup_into(t, cfg.controller.period, &mut self.delayed)?;
        }
        let e_last = x[n - 1] - self.delayed.x[n - 1];
        let s = e_last + self.surface.integral_term();
        let active = cfg.controller.is_active(t);
        let model = |e: &dyn std::fmt::Display| RhsError::Model(e.to_string());
        let d = &mut self.decomposition;
        match cfg.kind {
            ControllerKind::AdaptiveDelayed => {
                control_law_into(
                    t,
                    x,
                    &self.delayed,
                    &self.state,
                    s,
                    sys,
                    &cfg.controller,
                    &mut self.scratch,
                    d,
                )
                .map_err(|e| model(&e))?;
            }
            ControllerKind::LinearDelayed | ControllerKind::None => {
                d.e.clear();
                d.e.extend(x.iter().zip(&self.delayed.x).map(|(a, b)| a - b));
                d.s = s;
                d.v = lyapunov_diagnostic(
                    s,
                    &sys.theta_true,
                    &self.state.theta_hat,
                    sys.k_true,
                    self.state.k_hat,
                    &cfg.controller.gamma,
                    cfg.controller.gamma_k,
                );
                let u = if cfg.kind == ControllerKind::LinearDelayed {
                    linear_delayed_feedback(
                        t,
                        x,
                        &self.delayed.x,
                        &cfg.baseline_gains,
                        cfg.controller.t_on,
                    )
                    .map_err(|e| model(&e))?
                } else {
                    0.0
                };
                // the baseline has no decomposition; report it all as u_eq
                d.u_eq = u;
                d.u_ad = 0.0;
                d.u_s = 0.0;
                d.u = u;
            }
        }
        eval_plant_rate_into(sys, t, x, d.u, &mut self.plant_regressor, &mut out[..n])
            .map_err(|e| model(&e))?;
        if cfg.kind == ControllerKind::AdaptiveDelayed && active {
            let (now, delayed) = self.scratch.regressors();
            let k_rate = adaptation_rates_into(s, now, delayed, &cfg.controller, &mut self.theta_rates)
                .map_err(|e| model(&e))?;
            out[n..n + m].copy_from_slice(&self.theta_rates);
            out[n + m] = k_rate;
        } else {
            out[n..].iter_mut().for_each(|v| *v = 0.0);
        }
        Ok(())
    }

    pub fn into_trajectory(self) -> Trajectory {
        let cfg = self.cfg;
        Trajectory {
            system: cfg.system.name.clone(),
            kind: cfg.kind,
            n: cfg.system.n,
            m: cfg.system.m,
            h: cfg.simulation.h,
            period: cfg.controller.period,
            t_on: cfg.controller.t_on,
            records: self.records,
        }
    }
}

impl FdeRhs for ClosedLoop<'_> {
    fn dimension(&self) -> usize {
        self.system().n + self.system().m + 1
    }

    fn eval(&mut self, t: f64, z: &[f64], out: &mut [f64]) -> std::result::Result<(), RhsError> {
        if let Some((ct, cz, rates)) = &self.cached {
            if *ct == t && cz.as_slice() == z {
                out.copy_from_slice(rates);
                return Ok(());
            }
        }
        self.evaluate(t, z, out)
    }

    fn accept(&mut self, _step: usize, t: f64, z: &[f64]) -> std::result::Result<(), RhsError> {
        let (n, m) = (self.system().n, self.system().m);
        let mut rates = vec![0.0; n + m + 1];
        self.evaluate(t, z, &mut rates)?;
        let d = &self.decomposition;
        self.records.push(StepRecord {
            t,
            x: z[..n].to_vec(),
            u: d.u,
            u_eq: d.u_eq,
            u_ad: d.u_ad,
            u_s: d.u_s,
            s: d.s,
            e: d.e.clone(),
            theta_hat: z[n..n + m].to_vec(),
            k_hat: z[n + m],
            v: d.v,
        });
        self.history
            .append(t, &z[..n], d.u, &z[n..n + m])
            .map_err(RhsError::from)?;
        if self.cfg.controller.is_active(t) {
            self.surface.push(&self.decomposition.e);
        }
        self.cached = Some((t, z.to_vec(), rates));
        Ok(())
    }
}

/// Integrates the plant with the configured controller and records every
/// grid point.
pub fn run_closed_loop(cfg: &ScenarioConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let sys = &cfg.system;
    if cfg.kind == ControllerKind::AdaptiveDelayed {
        cfg.controller.validate(sys.alpha, sys.n, sys.m)?;
    }
    let sim = &cfg.simulation;
    let mut z0 = sim.x0.clone();
    z0.extend_from_slice(&sim.theta_hat0);
    z0.push(sim.k_hat0);
    let mut problem = FdeProblem::new(sys.alpha, z0, sim.t_end, sim.h);
    problem.memory_window = sim.memory_window;
    let mut rhs = ClosedLoop::new(cfg, problem.steps())?;
    solve(&problem, &mut rhs)?;
    Ok(rhs.into_trajectory())
}
