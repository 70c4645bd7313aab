//! Explicit embedded stepping with FSAL reuse, error estimation from the
//! difference weights, the elementary step-size controller
//! `h <- 0.9 h (ATOL / E)^(1/5)`, and dense output.

use thiserror::Error;

use crate::stage::STAGES;
use crate::tableau::ButcherPair;

#[derive(Debug, Error)]
pub enum IntegrateError {
    #[error("right-hand side returned a non-finite value at t = {t}")]
    NonFiniteRhs { t: f64 },
    #[error("step size underflow at t = {t} (h = {h:e}); the problem may be too stiff")]
    StepSizeUnderflow {
        t: f64,
        h: f64,
        partial: IntegrationStats,
    },
    #[error("dense output requires a pair with an interpolant")]
    MissingInterpolant,
    #[error("invalid configuration: {0}")]
    BadConfig(String),
}

/// An initial-value problem right-hand side. Implementations must be
/// deterministic for identical inputs and reentrant.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, x: &[f64], dxdt: &mut [f64]);
}

/// A closure-backed system.
pub struct FnSystem<F: Fn(f64, &[f64], &mut [f64])> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(f64, &[f64], &mut [f64])> OdeSystem for FnSystem<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn rhs(&self, t: f64, x: &[f64], dxdt: &mut [f64]) {
        (self.f)(t, x, dxdt)
    }
}

/// Adaptive controller settings. Defaults follow the benchmark protocol:
/// safety 0.9, exponent 1/5, starting step 1e-6, no step clamps.
#[derive(Clone, Debug)]
pub struct ControllerConfig {
    pub atol: f64,
    pub safety: f64,
    pub exponent: f64,
    pub h0: f64,
    /// Optional `(shrink, grow)` factor clamps per attempt; disabled by
    /// default (the elementary controller corrects the start-up swiftly).
    pub clamps: Option<(f64, f64)>,
}

impl ControllerConfig {
    pub fn new(atol: f64) -> Self {
        ControllerConfig {
            atol,
            safety: 0.9,
            exponent: 0.2,
            h0: 1e-6,
            clamps: None,
        }
    }

    /// Enables the conventional per-attempt factor clamps `[0.2, 5.0]` for
    /// robustness experiments; the benchmark protocol runs unclamped.
    pub fn with_clamps(mut self) -> Self {
        self.clamps = Some((0.2, 5.0));
        self
    }

    fn validate(&self) -> Result<(), IntegrateError> {
        if !(self.atol > 0.0) {
            return Err(IntegrateError::BadConfig("atol must be positive".into()));
        }
        if !(self.safety > 0.0 && self.safety < 1.0) {
            return Err(IntegrateError::BadConfig("safety must lie in (0, 1)".into()));
        }
        if !(self.exponent > 0.0) {
            return Err(IntegrateError::BadConfig("exponent must be positive".into()));
        }
        if !(self.h0 > 0.0) {
            return Err(IntegrateError::BadConfig("h0 must be positive".into()));
        }
        Ok(())
    }
}

/// Counters and the accepted trajectory of one integration.
#[derive(Clone, Debug, Default)]
pub struct IntegrationStats {
    pub n_rhs: u64,
    pub n_accept: u64,
    pub n_reject: u64,
    pub trajectory: Vec<(f64, Vec<f64>)>,
}

impl IntegrationStats {
    pub fn final_state(&self) -> &(f64, Vec<f64>) {
        self.trajectory.last().expect("trajectory never empty")
    }
}

/// Result of a single embedded step attempt.
#[derive(Clone, Debug)]
pub struct StepResult {
    pub x_next: Vec<f64>,
    /// l2 norm of `h * sum d_j F_j`, the difference of the two solutions.
    pub error: f64,
    /// All stage derivatives; `stages[6]` is `F7 = f(t + h, x_next)` for an
    /// FSAL pair and seeds the next step.
    pub stages: Vec<Vec<f64>>,
}

struct Counting<'a, S: OdeSystem + ?Sized> {
    sys: &'a S,
    n_rhs: std::cell::Cell<u64>,
}

impl<'a, S: OdeSystem + ?Sized> Counting<'a, S> {
    fn new(sys: &'a S) -> Self {
        Counting {
            sys,
            n_rhs: std::cell::Cell::new(0),
        }
    }
    fn rhs(&self, t: f64, x: &[f64], out: &mut [f64]) {
        self.n_rhs.set(self.n_rhs.get() + 1);
        self.sys.rhs(t, x, out);
    }
}

fn stage_loop<S: OdeSystem + ?Sized>(
    pair: &ButcherPair<f64>,
    counting: &Counting<'_, S>,
    t: f64,
    x: &[f64],
    h: f64,
    f1: Option<&[f64]>,
) -> Result<StepResult, IntegrateError> {
    let dim = x.len();
    let mut stages: Vec<Vec<f64>> = Vec::with_capacity(STAGES);
    match f1 {
        Some(f) => stages.push(f.to_vec()),
        None => {
            let mut f = vec![0.0; dim];
            counting.rhs(t, x, &mut f);
            stages.push(f);
        }
    }
    let mut work = vec![0.0; dim];
    for i in 1..STAGES {
        for (n, w) in work.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, stage) in stages.iter().enumerate() {
                let a = pair.a[i][j];
                if a != 0.0 {
                    acc += a * stage[n];
                }
            }
            *w = x[n] + h * acc;
        }
        let mut f = vec![0.0; dim];
        counting.rhs(t + pair.c[i] * h, &work, &mut f);
        if f.iter().any(|v| !v.is_finite()) {
            return Err(IntegrateError::NonFiniteRhs {
                t: t + pair.c[i] * h,
            });
        }
        stages.push(f);
    }
    let mut x_next = vec![0.0; dim];
    let mut err_sq = 0.0;
    for n in 0..dim {
        let mut bx = 0.0;
        let mut dx = 0.0;
        for (j, stage) in stages.iter().enumerate() {
            bx += pair.b[j] * stage[n];
            dx += pair.d[j] * stage[n];
        }
        x_next[n] = x[n] + h * bx;
        err_sq += (h * dx) * (h * dx);
    }
    if x_next.iter().any(|v| !v.is_finite()) {
        return Err(IntegrateError::NonFiniteRhs { t: t + h });
    }
    Ok(StepResult {
        x_next,
        error: err_sq.sqrt(),
        stages,
    })
}

/// One embedded step attempt. A cached `f1` (which must equal `rhs(t, x)`)
/// saves the first evaluation; for an FSAL pair the last stage of an accepted
/// step is exactly the next step's `f1`.
pub fn rk_step<S: OdeSystem + ?Sized>(
    pair: &ButcherPair<f64>,
    sys: &S,
    t: f64,
    x: &[f64],
    h: f64,
    f1: Option<&[f64]>,
) -> Result<StepResult, IntegrateError> {
    let counting = Counting::new(sys);
    stage_loop(pair, &counting, t, x, h, f1)
}

/// Adaptive integration over `[t0, tend]` with the elementary controller:
/// after every attempt `h <- safety * h * (ATOL / E)^exponent`, accepting the
/// step iff `E <= ATOL`. The final step is truncated to land on `tend`
/// exactly. Rejected attempts cost the same stage evaluations as accepted
/// ones; the cached first stage survives rejections, and FSAL pairs reuse the
/// last stage on acceptance.
pub fn integrate_adaptive<S: OdeSystem + ?Sized>(
    pair: &ButcherPair<f64>,
    sys: &S,
    t0: f64,
    tend: f64,
    x0: &[f64],
    cfg: &ControllerConfig,
) -> Result<IntegrationStats, IntegrateError> {
    cfg.validate()?;
    if !(tend > t0) {
        return Err(IntegrateError::BadConfig("tend must exceed t0".into()));
    }
    let counting = Counting::new(sys);
    let mut stats = IntegrationStats::default();
    stats.trajectory.push((t0, x0.to_vec()));
    let mut t = t0;
    let mut x = x0.to_vec();
    let mut h = cfg.h0;
    let mut f1 = {
        let mut f = vec![0.0; x.len()];
        counting.rhs(t, &x, &mut f);
        f
    };
    let h_floor = 1e-15 * (tend - t0).abs();
    while t < tend {
        let truncated = h >= tend - t;
        let h_try = if truncated { tend - t } else { h };
        if h_try < h_floor {
            stats.n_rhs = counting.n_rhs.get();
            return Err(IntegrateError::StepSizeUnderflow {
                t,
                h: h_try,
                partial: stats,
            });
        }
        let step = match stage_loop(pair, &counting, t, &x, h_try, Some(&f1)) {
            Ok(step) => step,
            Err(e) => {
                stats.n_rhs = counting.n_rhs.get();
                return Err(e);
            }
        };
        // E = 0 would stall the controller; treat it as pure roundoff
        let err = if step.error > 0.0 {
            step.error
        } else {
            f64::EPSILON * cfg.atol
        };
        let mut factor = cfg.safety * (cfg.atol / err).powf(cfg.exponent);
        if let Some((shrink, grow)) = cfg.clamps {
            factor = factor.clamp(shrink, grow);
        }
        let accept = step.error <= cfg.atol;
        if accept {
            t += h_try;
            x = step.x_next;
            stats.n_accept += 1;
            stats.trajectory.push((t, x.clone()));
            if pair.fsal {
                f1 = step.stages.into_iter().next_back().unwrap();
            } else if t < tend {
                let mut f = vec![0.0; x.len()];
                counting.rhs(t, &x, &mut f);
                f1 = f;
            }
        } else {
            stats.n_reject += 1;
        }
        h = h_try * factor;
    }
    stats.n_rhs = counting.n_rhs.get();
    Ok(stats)
}

/// Which weight vector drives a fixed-step integration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightSet {
    /// Fifth-order weights `b`.
    Fifth,
    /// Fourth-order weights `b + d`.
    Fourth,
}

/// Fixed-step integration with `n_steps` equal steps, used for convergence
/// studies of both methods in a pair.
pub fn integrate_fixed<S: OdeSystem + ?Sized>(
    pair: &ButcherPair<f64>,
    sys: &S,
    t0: f64,
    tend: f64,
    x0: &[f64],
    n_steps: usize,
    weights: WeightSet,
) -> Result<Vec<f64>, IntegrateError> {
    let mut effective = pair.clone();
    if weights == WeightSet::Fourth {
        effective.b = std::array::from_fn(|j| pair.b[j] + pair.d[j]);
        // the fourth-order weights break the FSAL identity
        effective.fsal = false;
    }
    let h = (tend - t0) / n_steps as f64;
    let counting = Counting::new(sys);
    let mut t = t0;
    let mut x = x0.to_vec();
    let mut f1: Option<Vec<f64>> = None;
    for k in 0..n_steps {
        let step = stage_loop(&effective, &counting, t, &x, h, f1.as_deref())?;
        x = step.x_next;
        t = t0 + (k + 1) as f64 * h;
        f1 = if effective.fsal {
            Some(step.stages.into_iter().next_back().unwrap())
        } else {
            None
        };
    }
    Ok(x)
}

/// Dense-output evaluation `x + h * sum_j beta_j(theta) F_j` on the stages of
/// an accepted step.
pub fn dense_eval(
    pair: &ButcherPair<f64>,
    x: &[f64],
    h: f64,
    stages: &[Vec<f64>],
    theta: f64,
) -> Result<Vec<f64>, IntegrateError> {
    let interp = pair
        .interpolant
        .as_ref()
        .ok_or(IntegrateError::MissingInterpolant)?;
    let weights = interp.weights_at(&theta);
    let mut out = x.to_vec();
    for (n, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, stage) in stages.iter().enumerate() {
            acc += weights[j] * stage[n];
        }
        *o += h * acc;
    }
    Ok(out)
}
