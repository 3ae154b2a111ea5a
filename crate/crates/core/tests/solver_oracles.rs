use fracdfc::delay_history::{HistoryBuffer, PreHistory};
use fracdfc::fde_solver::{rhs_fn, solve, solve_reference_classical, FdeProblem, FdeRhs, RhsError};
use fracdfc::frac_calc::{gamma_fn, FractionalOrder};
use fracdfc::systems::{duffing_system, eval_plant_rate};

fn order(a: f64) -> FractionalOrder {
    FractionalOrder::new(a).unwrap()
}

fn quadratic_error(a: f64, h: f64) -> f64 {
    let c = gamma_fn(3.0) / gamma_fn(3.0 - a);
    let problem = FdeProblem::new(order(a), vec![0.0], 1.0, h);
    let out = solve(&problem, &mut rhs_fn(1, |t, _, o| o[0] = c * t.powf(2.0 - a))).unwrap();
    (out.last_state()[0] - 1.0).abs()
}

#[test]
fn quadratic_oracle_converges() {
    let coarse = quadratic_error(0.98, 0.005);
    let fine = quadratic_error(0.98, 0.0025);
    assert!(coarse < 5e-3, "{coarse}");
    assert!(coarse / fine >= 1.8, "ratio {}", coarse / fine);
    for a in [0.5, 0.8] {
        assert!(quadratic_error(a, 0.005) < 5e-3);
    }
}

#[test]
fn classical_duffing_matches_rk4() {
    let sys = duffing_system().with_alpha(FractionalOrder::ONE);
    let field = |t: f64, z: &[f64], out: &mut [f64]| {
        out.copy_from_slice(&eval_plant_rate(&sys, t, z, 0.0).unwrap());
    };
    let problem = FdeProblem::new(FractionalOrder::ONE, vec![0.15, 0.1], 20.0, 1e-3);
    let a = solve(&problem, &mut rhs_fn(2, field)).unwrap();
    let b = solve_reference_classical(&problem, &mut rhs_fn(2, field)).unwrap();
    assert_eq!(a.times.len(), b.times.len());
    for (x, y) in a.states.iter().zip(&b.states) {
        for (p, q) in x.iter().zip(y) {
            assert!((p - q).abs() < 1e-2);
        }
    }
}

/// `x' = -x(t - 1)` with `x = 1` on `[-1, 0]`: on `[0, 1]` the solution is
/// `1 - t`, on `[1, 2]` it is `1 - t + (t - 1)^2 / 2`.
struct DelayedDecay {
    history: HistoryBuffer,
}

impl FdeRhs for DelayedDecay {
    fn dimension(&self) -> usize {
        1
    }

    fn eval(&mut self, t: f64, _z: &[f64], out: &mut [f64]) -> Result<(), RhsError> {
        out[0] = -self.history.lookup_delayed(t, 1.0)?.x[0];
        Ok(())
    }

    fn accept(&mut self, _step: usize, t: f64, z: &[f64]) -> Result<(), RhsError> {
        self.history.append(t, z, 0.0, &[])?;
        Ok(())
    }
}

#[test]
fn delay_equation_through_history() {
    let h = 1e-3;
    let mut rhs = DelayedDecay {
        history: HistoryBuffer::new(0.0, h, 1, 0, PreHistory::HoldInitial).unwrap(),
    };
    let problem = FdeProblem::new(FractionalOrder::ONE, vec![1.0], 2.0, h);
    let out = solve(&problem, &mut rhs).unwrap();
    for (t, z) in out.times.iter().zip(&out.states) {
        let exact = if *t <= 1.0 {
            1.0 - t
        } else {
            1.0 - t + (t - 1.0).powi(2) / 2.0
        };
        assert!((z[0] - exact).abs() < 1e-5, "t={t} z={} exact={exact}", z[0]);
    }
}

#[test]
fn lookahead_is_a_causality_error() {
    let h = 0.01;
    let mut history = HistoryBuffer::new(0.0, h, 1, 0, PreHistory::ZeroControl).unwrap();
    history.append(0.0, &[0.0], 0.0, &[]).unwrap();
    // t - delay = 0.4 lies past the only stored sample
    let err = history.lookup_delayed(0.5, 0.1).unwrap_err();
    assert!(matches!(RhsError::from(err), RhsError::Causality { .. }));
}
