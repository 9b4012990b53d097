//! Embedded adaptive Runge–Kutta integration with dense output.
//!
//! A plain Dormand–Prince 5(4) pair over fixed-size states, sufficient for
//! the smooth, non-stiff scalar and second-order equations this crate
//! integrates. Accepted steps are stored with their endpoint derivatives so
//! the solution can be evaluated anywhere by cubic Hermite interpolation.

use crate::error::{Error, Result};

/// Fallible right-hand side of dy/dt = f(t, y).
pub type RhsFn<'a, const N: usize> = dyn Fn(f64, &[f64; N]) -> Result<[f64; N]> + 'a;
/// Post-acceptance hook; an error vetoes the step and aborts the run.
pub type AcceptFn<'a, const N: usize> = dyn FnMut(f64, &[f64; N]) -> Result<()> + 'a;

/// Tolerances and limits for one integration run.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step magnitude, in units of the independent variable.
    pub max_step: f64,
    /// Optional fixed first step; estimated when absent.
    pub first_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, max_step: 0.01, first_step: None, max_steps: 1_000_000 }
    }
}

/// One accepted step with endpoint slopes, the unit of dense output.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    pub f0: [f64; N],
    pub f1: [f64; N],
}

impl<const N: usize> DenseStep<N> {
    /// Cubic Hermite evaluation inside [t0, t1].
    pub fn eval(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        if h == 0.0 {
            return self.y1;
        }
        let s = (t - self.t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let mut out = [0.0; N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = h00 * self.y0[i] + h10 * h * self.f0[i] + h01 * self.y1[i] + h11 * h * self.f1[i];
        }
        out
    }
}

/// Result of an adaptive integration: endpoint, dense steps, and a
/// conservative global error estimate (sum of accepted local estimates).
#[derive(Debug, Clone)]
pub struct OdeSolution<const N: usize> {
    pub steps: Vec<DenseStep<N>>,
    pub t_end: f64,
    pub y_end: [f64; N],
    pub error_estimate: f64,
    pub n_accepted: usize,
    pub n_rejected: usize,
}

impl<const N: usize> OdeSolution<N> {
    pub fn t_start(&self) -> f64 {
        self.steps.first().map_or(self.t_end, |s| s.t0)
    }

    /// Dense evaluation anywhere in the covered interval (clamped at the ends).
    pub fn eval(&self, t: f64) -> [f64; N] {
        eval_dense(&self.steps, t).unwrap_or(self.y_end)
    }
}

/// Locate the dense step containing `t` and interpolate. Works for both
/// integration directions; `t` outside the covered range is rejected.
pub fn eval_dense<const N: usize>(steps: &[DenseStep<N>], t: f64) -> Option<[f64; N]> {
    if steps.is_empty() {
        return None;
    }
    let forward = steps[0].t1 >= steps[0].t0;
    let inside = |st: &DenseStep<N>| {
        if forward { t >= st.t0 - 1e-14 && t <= st.t1 + 1e-14 } else { t <= st.t0 + 1e-14 && t >= st.t1 - 1e-14 }
    };
    let idx = steps.partition_point(|st| if forward { st.t1 < t } else { st.t1 > t });
    let st = steps.get(idx).or_else(|| steps.last())?;
    if inside(st) {
        Some(st.eval(t))
    } else if idx > 0 && inside(&steps[idx - 1]) {
        Some(steps[idx - 1].eval(t))
    } else {
        None
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// 5th-order weights coincide with the last A row (FSAL).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const STEP_FLOOR: f64 = 1e-14;

/// Integrate dy/dt = rhs(t, y) from `t0` to `t_end` (either direction).
///
/// `on_accept` runs after every accepted step and may veto it with an error,
/// which aborts the run; this is how callers enforce trajectory invariants
/// such as growth bounds or monotonicity.
pub fn integrate<const N: usize>(
    rhs: &RhsFn<'_, N>,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    on_accept: &mut AcceptFn<'_, N>,
) -> Result<OdeSolution<N>> {
    let span = t_end - t0;
    if span == 0.0 {
        let f = rhs(t0, &y0)?;
        let step = DenseStep { t0, t1: t0, y0, y1: y0, f0: f, f1: f };
        return Ok(OdeSolution {
            steps: vec![step],
            t_end,
            y_end: y0,
            error_estimate: 0.0,
            n_accepted: 0,
            n_rejected: 0,
        });
    }
    let dir = span.signum();
    let mut h = opts
        .first_step
        .map(|h| h.abs())
        .unwrap_or_else(|| (span.abs() / 100.0).min(opts.max_step))
        .min(opts.max_step)
        .min(span.abs())
        * dir;

    let mut t = t0;
    let mut y = y0;
    let mut f_cur = rhs(t, &y)?;
    let mut steps: Vec<DenseStep<N>> = Vec::new();
    let mut error_estimate = 0.0;
    let mut n_accepted = 0;
    let mut n_rejected = 0;
    let mut k = [[0.0; N]; 7];

    for _ in 0..opts.max_steps {
        if (t - t_end) * dir >= 0.0 {
            return Ok(OdeSolution { steps, t_end: t, y_end: y, error_estimate, n_accepted, n_rejected });
        }
        // land exactly on the endpoint, stretching the last step slightly
        // rather than leaving a sliver behind
        if (t + 1.01 * h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        if h.abs() < STEP_FLOOR * t.abs().max(1.0) {
            return Err(Error::StepSizeCollapse { t, limit: STEP_FLOOR });
        }

        k[0] = f_cur;
        let mut failed = None;
        for stage in 0..6 {
            let mut y_stage = y;
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                let a = A[stage][j];
                if a != 0.0 {
                    for i in 0..N {
                        y_stage[i] += h * a * kj[i];
                    }
                }
            }
            match rhs(t + C[stage] * h, &y_stage) {
                Ok(f) => k[stage + 1] = f,
                Err(e) => {
                    failed = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = failed {
            // retry with a smaller step; give up when the step floor is hit
            h *= 0.25;
            if h.abs() < STEP_FLOOR * t.abs().max(1.0) {
                return Err(e);
            }
            n_rejected += 1;
            continue;
        }

        // 5th-order solution = stage 7 state (FSAL), error from the embedded pair
        let mut y_new = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let b = A[5][j];
            if b != 0.0 {
                for i in 0..N {
                    y_new[i] += h * b * kj[i];
                }
            }
        }
        let f_new = k[6];

        let mut err_norm: f64 = 0.0;
        let mut err_abs: f64 = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            e *= h;
            let scale = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            err_norm += (e / scale) * (e / scale);
            err_abs = err_abs.max(e.abs());
        }
        err_norm = (err_norm / N as f64).sqrt();

        if err_norm <= 1.0 {
            let mut t_new = t + h;
            if (t_new - t_end).abs() <= 10.0 * f64::EPSILON * t_end.abs().max(1.0) {
                t_new = t_end;
            }
            let step = DenseStep { t0: t, t1: t_new, y0: y, y1: y_new, f0: f_cur, f1: f_new };
            t = t_new;
            y = y_new;
            f_cur = f_new;
            on_accept(t, &y)?;
            steps.push(step);
            error_estimate += err_abs;
            n_accepted += 1;
        } else {
            n_rejected += 1;
        }

        let factor = if err_norm == 0.0 { 10.0 } else { (0.9 * err_norm.powf(-0.2)).clamp(0.2, 10.0) };
        h = (h * factor).clamp(-opts.max_step, opts.max_step);
        if h == 0.0 {
            return Err(Error::StepSizeCollapse { t, limit: STEP_FLOOR });
        }
    }
    Err(Error::NoConvergence(format!("integrator exceeded {} steps at t = {t}", opts.max_steps)))
}
