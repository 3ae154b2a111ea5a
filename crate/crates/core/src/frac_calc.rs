//! Discrete fractional-calculus operators on uniform grids, plus the
//! commensurate-order stability tests used to admit linear systems and
//! sliding-surface gains.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FracCalcError {
    #[error("fractional order {value} outside {range}")]
    OrderOutOfRange { value: f64, range: &'static str },
    #[error("signal is empty")]
    EmptySignal,
    #[error("signal needs at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("step size must be positive and finite, got {0}")]
    NonPositiveStep(f64),
    #[error("state matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("at least one sliding gain is required")]
    NoGains,
    #[error("sliding gain eta_{index} = {value} is not finite")]
    NonFiniteGain { index: usize, value: f64 },
}

pub type Result<T> = std::result::Result<T, FracCalcError>;

/// Euler Gamma function.
pub fn gamma_fn(x: f64) -> f64 {
    gamma(x)
}

/// Derivative/integral order restricted to `(0, 1]`.
///
/// `1` is the classical-calculus case.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub const ONE: FractionalOrder = FractionalOrder(1.0);

    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
            Ok(Self(alpha))
        } else {
            Err(FracCalcError::OrderOutOfRange {
                value: alpha,
                range: "(0, 1]",
            })
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_classical(self) -> bool {
        self.0 == 1.0
    }
}

impl TryFrom<f64> for FractionalOrder {
    type Error = FracCalcError;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FractionalOrder> for f64 {
    fn from(a: FractionalOrder) -> f64 {
        a.0
    }
}

impl std::fmt::Display for FractionalOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Uniformly sampled scalar signal; sample `i` sits at `t0 + i*h`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub t0: f64,
    pub h: f64,
    pub values: Vec<f64>,
}

impl SampledSignal {
    pub fn new(t0: f64, h: f64, values: Vec<f64>) -> Result<Self> {
        check_step(h)?;
        Ok(Self { t0, h, values })
    }

    /// Samples `f` at `len` grid points starting from `t0`.
    pub fn from_fn(t0: f64, h: f64, len: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        check_step(h)?;
        let values = (0..len).map(|i| f(t0 + i as f64 * h)).collect();
        Ok(Self { t0, h, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.h
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }

    fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            t0: self.t0,
            h: self.h,
            values,
        }
    }
}

fn check_step(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(FracCalcError::NonPositiveStep(h))
    }
}

/// Riemann-Liouville integral kept up to date one sample at a time.
///
/// Uses product-rectangle quadrature: the sample at `t_j` is held over
/// `[t_j, t_{j+1})` and integrated exactly against the power-law kernel.
/// After `k` pushes, [`RunningIntegral::value`] is the integral at
/// `t0 + k*h`; before any push it is the (zero) value at `t0`.
#[derive(Debug, Clone)]
pub struct RunningIntegral {
    scale: f64,
    alpha: f64,
    // lag_weights[l - 1] = l^a - (l-1)^a
    lag_weights: Vec<f64>,
    samples: Vec<f64>,
    value: f64,
}

impl RunningIntegral {
    pub fn new(alpha: FractionalOrder, h: f64) -> Result<Self> {
        check_step(h)?;
        let a = alpha.value();
        let scale = if alpha.is_classical() {
            h
        } else {
            h.powf(a) / gamma(a + 1.0)
        };
        Ok(Self {
            scale,
            alpha: a,
            lag_weights: Vec::new(),
            samples: Vec::new(),
            value: 0.0,
        })
    }

    pub fn with_capacity(alpha: FractionalOrder, h: f64, capacity: usize) -> Result<Self> {
        let mut r = Self::new(alpha, h)?;
        r.lag_weights.reserve(capacity);
        r.samples.reserve(capacity);
        Ok(r)
    }

    pub fn push(&mut self, sample: f64) {
        self.samples.push(sample);
        let k = self.samples.len();
        while self.lag_weights.len() < k {
            let l = self.lag_weights.len() as f64 + 1.0;
            let w = if self.alpha == 1.0 {
                1.0
            } else {
                l.powf(self.alpha) - (l - 1.0).powf(self.alpha)
            };
            self.lag_weights.push(w);
        }
        // sample j has lag k - j
        let acc: f64 = self
            .samples
            .iter()
            .zip(self.lag_weights[..k].iter().rev())
            .map(|(s, w)| s * w)
            .sum();
        self.value = self.scale * acc;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Discrete fractional integral of order `alpha` at every grid point.
pub fn fractional_integral(alpha: FractionalOrder, signal: &SampledSignal) -> Result<SampledSignal> {
    check_step(signal.h)?;
    if signal.is_empty() {
        return Err(FracCalcError::EmptySignal);
    }
    let mut running = RunningIntegral::with_capacity(alpha, signal.h, signal.len())?;
    let mut out = Vec::with_capacity(signal.len());
    out.push(0.0);
    for &v in &signal.values[..signal.len() - 1] {
        running.push(v);
        out.push(running.value());
    }
    Ok(signal.with_values(out))
}

/// L1-scheme estimate of the Caputo derivative for `0 < alpha < 1`.
///
/// The first output sample is zero.
pub fn caputo_derivative_estimate(
    alpha: FractionalOrder,
    signal: &SampledSignal,
) -> Result<SampledSignal> {
    check_step(signal.h)?;
    let a = alpha.value();
    if a >= 1.0 {
        return Err(FracCalcError::OrderOutOfRange {
            value: a,
            range: "(0, 1)",
        });
    }
    if signal.len() < 2 {
        return Err(FracCalcError::TooFewSamples {
            needed: 2,
            got: signal.len(),
        });
    }
    let n = signal.len();
    let beta = 1.0 - a;
    let weights: Vec<f64> = (0..n)
        .map(|i| (i as f64 + 1.0).powf(beta) - (i as f64).powf(beta))
        .collect();
    let diffs: Vec<f64> = signal.values.windows(2).map(|w| w[1] - w[0]).collect();
    let scale = signal.h.powf(-a) / gamma(2.0 - a);
    let mut out = Vec::with_capacity(n);
    out.push(0.0);
    for k in 1..n {
        let acc: f64 = diffs[..k]
            .iter()
            .zip(weights[..k].iter().rev())
            .map(|(d, w)| d * w)
            .sum();
        out.push(scale * acc);
    }
    Ok(signal.with_values(out))
}

/// Commensurate-order linear system `D^alpha x = A x`, `0 < alpha < 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFoSystem {
    a: DMatrix<f64>,
    alpha: f64,
}

impl LinearFoSystem {
    pub fn new(a: DMatrix<f64>, alpha: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(FracCalcError::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        if !(alpha.is_finite() && alpha > 0.0 && alpha < 2.0) {
            return Err(FracCalcError::OrderOutOfRange {
                value: alpha,
                range: "(0, 2)",
            });
        }
        Ok(Self { a, alpha })
    }

    pub fn from_rows(rows: &[&[f64]], alpha: f64) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(FracCalcError::NotSquare {
                rows: nrows,
                cols: ncols,
            });
        }
        let a = DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]);
        Self::new(a, alpha)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Argument test result for one eigenvalue or polynomial root.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootMargin {
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    /// `|arg(value)|`, radians.
    pub abs_arg: f64,
    /// `|arg| - alpha*pi/2`; positive means the root sits in the stable sector.
    pub margin: f64,
    /// The root is (numerically) zero and its argument is undefined.
    pub degenerate: bool,
}

fn ser_complex<S: serde::Serializer>(c: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&c.re)?;
    t.serialize_element(&c.im)?;
    t.end()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub stable: bool,
    pub alpha: f64,
    pub eigenvalues: Vec<RootMargin>,
}

fn root_margin(value: Complex64, alpha: f64, zero_tol: f64) -> RootMargin {
    let degenerate = value.norm() <= zero_tol;
    let abs_arg = if degenerate { 0.0 } else { value.arg().abs() };
    RootMargin {
        value,
        abs_arg,
        margin: abs_arg - alpha * FRAC_PI_2,
        degenerate,
    }
}

fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex64> {
    a.clone().complex_eigenvalues().iter().copied().collect()
}

/// Sector test on the eigenvalues of `A`: stable iff every eigenvalue
/// satisfies `|arg(lambda)| > alpha*pi/2`. Zero eigenvalues count as unstable.
pub fn check_linear_stability(system: &LinearFoSystem) -> StabilityReport {
    let scale = system.a.amax().max(1.0);
    let zero_tol = 1e-12 * scale;
    let eigenvalues: Vec<RootMargin> = eigenvalues(&system.a)
        .into_iter()
        .map(|l| root_margin(l, system.alpha, zero_tol))
        .collect();
    let stable = eigenvalues.iter().all(|e| !e.degenerate && e.margin > 0.0);
    StabilityReport {
        stable,
        alpha: system.alpha,
        eigenvalues,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlidingRoot {
    /// Root of the substituted polynomial in `w = s^alpha`.
    pub w: RootMargin,
    /// `|arg(w)|/alpha`, the argument of the principal `s` root.
    pub s_abs_arg: f64,
    /// `s_abs_arg - alpha*pi/2`, the sector test applied to `s` directly.
    pub s_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainReport {
    pub admissible: bool,
    pub alpha: f64,
    pub eta: Vec<f64>,
    pub roots: Vec<SlidingRoot>,
}

/// Checks that the sliding dynamics `D^alpha e_n = -sum eta_i e_i` are
/// stable.
///
/// With `w = s^alpha` the characteristic equation becomes
/// `w^n + eta_n w^(n-1) + ... + eta_2 w + eta_1 = 0`, and the gains are
/// admissible iff every root has `|arg(w)| > alpha*pi/2`.
pub fn validate_sliding_gains(alpha: FractionalOrder, eta: &[f64]) -> Result<GainReport> {
    if eta.is_empty() {
        return Err(FracCalcError::NoGains);
    }
    if let Some((i, &v)) = eta.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(FracCalcError::NonFiniteGain {
            index: i + 1,
            value: v,
        });
    }
    let a = alpha.value();
    let n = eta.len();
    // companion matrix of the monic polynomial with coefficients c_i = eta_{i+1}
    let companion = DMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -eta[i]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let scale = eta.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let roots: Vec<SlidingRoot> = eigenvalues(&companion)
        .into_iter()
        .map(|w| {
            let w = root_margin(w, a, 1e-12 * scale);
            let s_abs_arg = w.abs_arg / a;
            SlidingRoot {
                s_abs_arg,
                s_margin: s_abs_arg - a * FRAC_PI_2,
                w,
            }
        })
        .collect();
    let admissible = roots.iter().all(|r| !r.w.degenerate && r.w.margin > 0.0);
    Ok(GainReport {
        admissible,
        alpha: a,
        eta: eta.to_vec(),
        roots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn order(a: f64) -> FractionalOrder {
        FractionalOrder::new(a).unwrap()
    }

    #[test]
    fn order_range() {
        assert!(FractionalOrder::new(0.0).is_err());
        assert!(FractionalOrder::new(1.0 + 1e-12).is_err());
        assert!(FractionalOrder::new(f64::NAN).is_err());
        assert!(FractionalOrder::new(1.0).unwrap().is_classical());
    }

    #[test]
    fn gamma_reference_values() {
        assert_eq!(gamma_fn(2.0), 1.0);
        assert_relative_eq!(gamma_fn(0.5), PI.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(gamma_fn(1.5), PI.sqrt() / 2.0, max_relative = 1e-12);
        assert_relative_eq!(gamma_fn(5.0), 24.0, max_relative = 1e-12);
    }

    #[test]
    fn integral_of_one_is_ramp_for_classical_order() {
        let s = SampledSignal::from_fn(0.0, 0.01, 101, |_| 1.0).unwrap();
        let i = fractional_integral(FractionalOrder::ONE, &s).unwrap();
        assert_eq!(i.values[0], 0.0);
        assert!((i.last().unwrap() - 1.0).abs() <= 0.01);
    }

    #[test]
    fn integral_of_one_half_order() {
        let h = 1e-3;
        let s = SampledSignal::from_fn(0.0, h, 1001, |_| 1.0).unwrap();
        let i = fractional_integral(order(0.5), &s).unwrap();
        let exact = 1.0 / gamma_fn(1.5);
        assert!((exact - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-6);
        assert!((i.last().unwrap() - exact).abs() < 1e-3);
    }

    #[test]
    fn integral_of_zero_is_zero() {
        let s = SampledSignal::new(0.0, 0.1, vec![0.0; 50]).unwrap();
        let i = fractional_integral(order(0.3), &s).unwrap();
        assert!(i.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn integral_rejects_bad_input() {
        let empty = SampledSignal::new(0.0, 0.1, vec![]).unwrap();
        assert_eq!(
            fractional_integral(order(0.5), &empty),
            Err(FracCalcError::EmptySignal)
        );
        assert!(SampledSignal::new(0.0, 0.0, vec![1.0]).is_err());
        let bad = SampledSignal {
            t0: 0.0,
            h: -1.0,
            values: vec![1.0],
        };
        assert!(matches!(
            fractional_integral(order(0.5), &bad),
            Err(FracCalcError::NonPositiveStep(_))
        ));
    }

    #[test]
    fn classical_integral_equals_cumulative_rectangle() {
        let h = 0.01;
        let s = SampledSignal::from_fn(0.0, h, 300, |t| (3.0 * t).sin() + t * t).unwrap();
        let i = fractional_integral(FractionalOrder::ONE, &s).unwrap();
        let mut acc = 0.0;
        for k in 0..s.len() {
            assert_eq!(i.values[k], h * acc);
            acc += s.values[k];
        }
    }

    #[test]
    fn running_integral_matches_batch() {
        let a = order(0.7);
        let s = SampledSignal::from_fn(0.0, 0.02, 200, |t| t.cos()).unwrap();
        let batch = fractional_integral(a, &s).unwrap();
        let mut r = RunningIntegral::new(a, 0.02).unwrap();
        assert_eq!(r.value(), 0.0);
        for k in 1..s.len() {
            r.push(s.values[k - 1]);
            assert_eq!(r.value(), batch.values[k]);
        }
    }

    #[test]
    fn semigroup_error_shrinks_with_step() {
        // I^0.3 I^0.4 sin vs I^0.7 sin on [0, 2]
        let err = |h: f64| {
            let n = (2.0 / h).round() as usize + 1;
            let s = SampledSignal::from_fn(0.0, h, n, |t| t.sin() + 1.0).unwrap();
            let inner = fractional_integral(order(0.4), &s).unwrap();
            let two = fractional_integral(order(0.3), &inner).unwrap();
            let one = fractional_integral(order(0.7), &s).unwrap();
            two.values
                .iter()
                .zip(&one.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let coarse = err(0.02);
        let fine = err(0.01);
        assert!(fine < coarse, "coarse {coarse} fine {fine}");
        assert!(coarse / fine > 1.6, "ratio {}", coarse / fine);
        // left-hold rule: first order, with a sizeable constant
        assert!(fine < 6e-2, "fine {fine}");
    }

    #[test]
    fn caputo_of_constant_vanishes() {
        let s = SampledSignal::new(0.0, 0.01, vec![2.5; 100]).unwrap();
        let d = caputo_derivative_estimate(order(0.6), &s).unwrap();
        assert!(d.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn caputo_of_ramp() {
        let h = 1e-3;
        let s = SampledSignal::from_fn(0.0, h, 1001, |t| t).unwrap();
        let d = caputo_derivative_estimate(order(0.5), &s).unwrap();
        let exact = 1.0 / gamma_fn(1.5);
        assert!((d.last().unwrap() - exact).abs() < 1e-2);
    }

    #[test]
    fn caputo_near_classical_limit() {
        let h = 1e-3;
        let s = SampledSignal::from_fn(0.0, h, 1001, |t| t * t).unwrap();
        let d = caputo_derivative_estimate(order(0.999), &s).unwrap();
        for k in (100..s.len()).step_by(100) {
            let t = s.time(k);
            assert!((d.values[k] - 2.0 * t).abs() < 5e-2, "t={t}");
        }
    }

    #[test]
    fn caputo_rejects_bad_input() {
        let one = SampledSignal::new(0.0, 0.01, vec![1.0]).unwrap();
        assert!(matches!(
            caputo_derivative_estimate(order(0.5), &one),
            Err(FracCalcError::TooFewSamples { .. })
        ));
        let two = SampledSignal::new(0.0, 0.01, vec![1.0, 2.0]).unwrap();
        assert!(caputo_derivative_estimate(FractionalOrder::ONE, &two).is_err());
    }

    #[test]
    fn caputo_inverts_integral_on_smooth_signal() {
        let a = order(0.8);
        let h = 1e-3;
        let s = SampledSignal::from_fn(0.0, h, 2001, |t| (2.0 * t).cos()).unwrap();
        let i = fractional_integral(a, &s).unwrap();
        let d = caputo_derivative_estimate(a, &i).unwrap();
        for k in (200..s.len()).step_by(200) {
            assert!((d.values[k] - s.values[k]).abs() < 2e-2, "k={k}");
        }
    }

    #[test]
    fn linear_stability_examples() {
        let unstable = LinearFoSystem::from_rows(&[&[0.0, 1.0], &[2.0, 1.0]], 0.98).unwrap();
        assert!(!check_linear_stability(&unstable).stable);

        let sys = LinearFoSystem::from_rows(&[&[0.0, 1.0], &[-2.0, -2.0]], 0.98).unwrap();
        let r = check_linear_stability(&sys);
        assert!(r.stable);
        for e in &r.eigenvalues {
            assert_relative_eq!(e.abs_arg, 0.75 * PI, epsilon = 1e-12);
            assert_relative_eq!(e.margin, 0.75 * PI - 0.49 * PI, epsilon = 1e-12);
        }

        let neg_eye = LinearFoSystem::new(-DMatrix::identity(2, 2), 1.9).unwrap();
        let r = check_linear_stability(&neg_eye);
        assert!(r.stable);
        assert!(r.eigenvalues.iter().all(|e| (e.abs_arg - PI).abs() < 1e-12));
    }

    #[test]
    fn zero_eigenvalue_is_degenerate() {
        let sys = LinearFoSystem::from_rows(&[&[0.0, 1.0], &[0.0, -1.0]], 0.5).unwrap();
        let r = check_linear_stability(&sys);
        assert!(!r.stable);
        assert!(r.eigenvalues.iter().any(|e| e.degenerate));
    }

    #[test]
    fn linear_system_validation() {
        assert!(matches!(
            LinearFoSystem::new(DMatrix::zeros(2, 3), 0.5),
            Err(FracCalcError::NotSquare { .. })
        ));
        assert!(LinearFoSystem::new(DMatrix::identity(2, 2), 2.0).is_err());
        assert!(LinearFoSystem::new(DMatrix::identity(2, 2), 0.0).is_err());
    }

    #[test]
    fn sliding_gain_examples() {
        let r = validate_sliding_gains(order(0.98), &[1.0, 2.0]).unwrap();
        assert!(r.admissible);
        for root in &r.roots {
            assert!((root.w.value - Complex64::new(-1.0, 0.0)).norm() < 1e-6);
            assert!((root.w.abs_arg - PI).abs() < 1e-6);
        }

        let r = validate_sliding_gains(order(0.5), &[-1.0, 0.0]).unwrap();
        assert!(!r.admissible);
        assert!(r
            .roots
            .iter()
            .any(|root| (root.w.value - Complex64::new(1.0, 0.0)).norm() < 1e-9));

        let r = validate_sliding_gains(order(0.5), &[5.0]).unwrap();
        assert!(r.admissible);
        assert_eq!(r.roots.len(), 1);
        assert!((r.roots[0].w.value.re + 5.0).abs() < 1e-12);
        assert!((r.roots[0].s_abs_arg - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn sliding_gain_errors() {
        assert_eq!(
            validate_sliding_gains(order(0.5), &[]),
            Err(FracCalcError::NoGains)
        );
        assert!(matches!(
            validate_sliding_gains(order(0.5), &[1.0, f64::INFINITY]),
            Err(FracCalcError::NonFiniteGain { index: 2, .. })
        ));
    }

    proptest! {
        #[test]
        fn integral_is_linear(
            a in 0.05f64..=1.0,
            ca in -3.0f64..3.0,
            cb in -3.0f64..3.0,
            f in prop::collection::vec(-10.0f64..10.0, 2..60),
            g_seed in -10.0f64..10.0,
        ) {
            let alpha = order(a);
            let g: Vec<f64> = f.iter().enumerate().map(|(i, v)| g_seed * (i as f64).sin() - v).collect();
            let combo: Vec<f64> = f.iter().zip(&g).map(|(x, y)| ca * x + cb * y).collect();
            let sf = SampledSignal::new(0.0, 0.05, f.clone()).unwrap();
            let sg = SampledSignal::new(0.0, 0.05, g).unwrap();
            let sc = SampledSignal::new(0.0, 0.05, combo).unwrap();
            let i_f = fractional_integral(alpha, &sf).unwrap();
            let i_g = fractional_integral(alpha, &sg).unwrap();
            let i_c = fractional_integral(alpha, &sc).unwrap();
            for k in 0..sf.len() {
                let lhs = i_c.values[k];
                let rhs = ca * i_f.values[k] + cb * i_g.values[k];
                let scale = 1.0 + lhs.abs().max(rhs.abs()) + i_f.values[k].abs() + i_g.values[k].abs();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * scale * sf.len() as f64);
            }
        }

        #[test]
        fn classical_sector_test_matches_real_part(
            a11 in -5.0f64..5.0, a12 in -5.0f64..5.0,
            a21 in -5.0f64..5.0, a22 in -5.0f64..5.0,
        ) {
            let sys = LinearFoSystem::from_rows(&[&[a11, a12], &[a21, a22]], 1.0).unwrap();
            let r = check_linear_stability(&sys);
            let max_re = r.eigenvalues.iter().map(|e| e.value.re).fold(f64::MIN, f64::max);
            prop_assume!(max_re.abs() > 1e-6);
            prop_assert_eq!(r.stable, max_re < 0.0);
        }

        #[test]
        fn classical_gains_match_routh_hurwitz(e1 in -5.0f64..5.0, e2 in -5.0f64..5.0) {
            prop_assume!(e1.abs() > 1e-3 && e2.abs() > 1e-3);
            let r = validate_sliding_gains(FractionalOrder::ONE, &[e1, e2]).unwrap();
            prop_assert_eq!(r.admissible, e1 > 0.0 && e2 > 0.0);
        }
    }
}
