//! Shooting solver: adaptive integration of the auxiliary and profile ODEs,
//! the outer-radius map P(λ) = H_λ(R), the critical radius R∘, and the full
//! boundary-value solve.
//!
//! The BVP Ḧ = (H − tḢ)M, H(1) = 1, H(R) = R* is solved as an IVP family in
//! the initial slope λ = Ḣ(1). P is continuous, strictly increasing and
//! unbounded, with P(0) = R∘; a diffeomorphic solution exists iff R* ≥ R∘,
//! and the root λ* is found by bracket expansion plus Brent iteration.

use std::sync::Arc;

use crate::energy::{total_energy, EnergyBreakdown};
use crate::error::{Error, Result};
use crate::euler_lagrange::{aux_rhs, el_rhs, el_rhs_aux_route, growth_bound, ElRhsForm};
use crate::kinematics::{AnnulusProblem, RadialProfile};
use crate::material::StoredEnergy;
use crate::ode::{eval_dense, integrate, DenseStep, OdeOptions, OdeSolution};
use crate::roots::brent;

/// Integration and root-finding tolerances for one solve.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest integrator step, in radius units.
    pub max_step: f64,
    /// Tolerance on |H(R) − R*| for the boundary-value solve.
    pub root_tol: f64,
    /// Initial λ bracket for the shooting map, expanded on demand.
    pub lambda_bracket: (f64, f64),
    pub max_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.01,
            root_tol: 1e-9,
            lambda_bracket: (0.0, 2.0),
            max_iters: 200,
        }
    }
}

impl SolverConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.max_step > 0.0 && self.root_tol > 0.0)
        {
            return Err(Error::InvalidParameter("solver tolerances must be positive".into()));
        }
        if !(self.lambda_bracket.0 >= 0.0 && self.lambda_bracket.1 > self.lambda_bracket.0) {
            return Err(Error::InvalidParameter("lambda bracket must satisfy 0 <= lo < hi".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        Ok(())
    }

    fn ode_opts(&self) -> OdeOptions {
        OdeOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            first_step: None,
            max_steps: 1_000_000,
        }
    }
}

/// Sampled solution s ↦ v of the auxiliary equation with v(1) = λ.
#[derive(Debug, Clone)]
pub struct AuxTrajectory {
    pub lambda: f64,
    samples: Vec<(f64, f64)>,
    steps: Vec<DenseStep<1>>,
    s_range: (f64, f64),
}

impl AuxTrajectory {
    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// Covered s-interval (lo, hi).
    pub fn s_range(&self) -> (f64, f64) {
        self.s_range
    }

    /// Dense evaluation of v(s) inside the covered range.
    pub fn eval(&self, s: f64) -> Option<f64> {
        if s == 1.0 {
            return Some(self.lambda);
        }
        eval_dense(&self.steps, s).map(|y| y[0])
    }
}

/// Integrate the auxiliary equation from s = 1, v(1) = λ, toward `s_target`.
///
/// Every accepted step is checked against the a-priori growth bound; a
/// violation is reported as an error since it can only come from an
/// inconsistent right-hand side.
pub fn integrate_aux(
    n: u32,
    phi: &StoredEnergy,
    lambda: f64,
    s_target: f64,
    config: &SolverConfig,
) -> Result<AuxTrajectory> {
    config.check()?;
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    if !(s_target > 0.0) {
        return Err(Error::InvalidParameter(format!("s_target must be > 0, got {s_target}")));
    }
    let rhs = |s: f64, y: &[f64; 1]| -> Result<[f64; 1]> { Ok([aux_rhs(n, phi, s, y[0])?]) };
    let mut check = |s: f64, y: &[f64; 1]| -> Result<()> {
        let v = y[0];
        if v >= 0.0 {
            let g = aux_rhs(n, phi, s, v)?;
            let bound = growth_bound(n, s, v);
            if g.abs() > bound * (1.0 + 1e-9) + 1e-12 {
                return Err(Error::GrowthBound { s, v, rhs: g.abs(), bound });
            }
        }
        Ok(())
    };
    let sol = integrate(&rhs, 1.0, [lambda], s_target, &config.ode_opts(), &mut check)?;
    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(sol.steps.len() + 1);
    samples.push((1.0, lambda));
    samples.extend(sol.steps.iter().map(|st| (st.t1, st.y1[0])));
    let (lo, hi) = if s_target < 1.0 { (s_target, 1.0) } else { (1.0, s_target) };
    Ok(AuxTrajectory { lambda, samples, steps: sol.steps, s_range: (lo, hi) })
}

/// Length of the seeded first step used when λ = 0 makes t = 1 degenerate.
const SEED_STEP: f64 = 1e-6;

/// One backward-Euler-style step for the degenerate λ = 0 start, solved by
/// fixed-point iteration, before handing off to the adaptive pair.
fn seeded_step(rhs2: &crate::ode::RhsFn<'_, 2>, t0: f64, y0: [f64; 2]) -> Result<DenseStep<2>> {
    let h = SEED_STEP;
    let t1 = t0 + h;
    let mut y1 = y0;
    for _ in 0..4 {
        let f = rhs2(t1, &y1)?;
        y1 = [y0[0] + h * f[0], y0[1] + h * f[1]];
    }
    let f0 = rhs2(t0, &y0)?;
    let f1 = rhs2(t1, &y1)?;
    Ok(DenseStep { t0, t1, y0, y1, f0, f1 })
}

pub(crate) fn integrate_profile_impl(
    lambda: f64,
    r_outer: f64,
    config: &SolverConfig,
    rhs: &dyn Fn(f64, f64, f64) -> Result<f64>,
) -> Result<RadialProfile> {
    config.check()?;
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    if !(r_outer > 1.0) {
        return Err(Error::InvalidParameter(format!("R must be > 1, got {r_outer}")));
    }
    let rhs2 = |t: f64, y: &[f64; 2]| -> Result<[f64; 2]> {
        if !(y[0] > 0.0) {
            return Err(Error::DegenerateState { t });
        }
        Ok([y[1], rhs(t, y[0], y[1])?])
    };
    let mut check = |t: f64, y: &[f64; 2]| -> Result<()> {
        if y[1] <= 0.0 {
            Err(Error::MonotonicityLoss { t })
        } else {
            Ok(())
        }
    };

    let mut segments: Vec<DenseStep<2>> = Vec::new();
    let (t_start, y_start) = if lambda == 0.0 {
        let seed = seeded_step(&rhs2, 1.0, [1.0, 0.0])?;
        let out = (seed.t1, seed.y1);
        segments.push(seed);
        out
    } else {
        (1.0, [1.0, lambda])
    };
    let sol: OdeSolution<2> =
        integrate(&rhs2, t_start, y_start, r_outer, &config.ode_opts(), &mut check)?;
    segments.extend(sol.steps);

    let mut nodes = Vec::with_capacity(segments.len() + 1);
    nodes.push(1.0);
    nodes.extend(segments.iter().map(|st| st.t1));
    RadialProfile::from_dense(Arc::new(segments), nodes)
}

/// Integrate the profile equation with the production right-hand side
/// (the aux-route form, valid for every n ≥ 2), from H(1) = 1, Ḣ(1) = λ,
/// up to t = R. H is strictly increasing on the result or an error reports
/// where monotonicity failed.
pub fn integrate_profile(
    n: u32,
    phi: &StoredEnergy,
    lambda: f64,
    r_outer: f64,
    config: &SolverConfig,
) -> Result<RadialProfile> {
    integrate_profile_impl(lambda, r_outer, config, &|t, h, k| el_rhs_aux_route(n, phi, t, h, k))
}

/// Same integration driven by one of the alternative algebraic forms; used by
/// the residual arbitration diagnostics, not by the production solver.
pub fn integrate_profile_with_form(
    n: u32,
    phi: &StoredEnergy,
    lambda: f64,
    r_outer: f64,
    config: &SolverConfig,
    form: ElRhsForm,
) -> Result<RadialProfile> {
    integrate_profile_impl(lambda, r_outer, config, &|t, h, k| el_rhs(form, n, phi, t, h, k))
}

/// Cross-check route: co-integrate the pair (H, v) with
/// Ḣ = (t/H)·v and v̇ = G(v, H/t)·d(H/t)/dt, so the auxiliary solution is
/// carried along the trajectory instead of being eliminated.
pub fn integrate_profile_via_aux(
    n: u32,
    phi: &StoredEnergy,
    lambda: f64,
    r_outer: f64,
    config: &SolverConfig,
) -> Result<RadialProfile> {
    config.check()?;
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    let rhs2 = |t: f64, y: &[f64; 2]| -> Result<[f64; 2]> {
        let (h, v) = (y[0], y[1]);
        if !(h > 0.0) {
            return Err(Error::DegenerateState { t });
        }
        let s = h / t;
        let hdot = t / h * v;
        let g = aux_rhs(n, phi, s, v)?;
        let ds_dt = (hdot * t - h) / (t * t);
        Ok([hdot, g * ds_dt])
    };
    let mut check = |t: f64, y: &[f64; 2]| -> Result<()> {
        let (h, v) = (y[0], y[1]);
        let s = h / t;
        if v >= 0.0 && s > 0.0 {
            let g = aux_rhs(n, phi, s, v)?;
            let bound = growth_bound(n, s, v);
            if g.abs() > bound * (1.0 + 1e-9) + 1e-12 {
                return Err(Error::GrowthBound { s, v, rhs: g.abs(), bound });
            }
        }
        Ok(())
    };
    let mut segments: Vec<DenseStep<2>> = Vec::new();
    let (t_start, y_start) = if lambda == 0.0 {
        let seed = seeded_step(&rhs2, 1.0, [1.0, 0.0])?;
        let out = (seed.t1, seed.y1);
        segments.push(seed);
        out
    } else {
        (1.0, [1.0, lambda])
    };
    let sol = integrate(&rhs2, t_start, y_start, r_outer, &config.ode_opts(), &mut check)?;
    segments.extend(sol.steps);

    let mut nodes = vec![1.0];
    let mut h = vec![1.0];
    let mut hdot = vec![lambda];
    for st in &segments {
        let (t, hv, v) = (st.t1, st.y1[0], st.y1[1]);
        nodes.push(t);
        h.push(hv);
        hdot.push(t / hv * v);
    }
    RadialProfile::from_samples(nodes, h, hdot)
}

/// Outer image and the integrator's accumulated error estimate for it.
pub fn shoot(
    n: u32,
    phi: &StoredEnergy,
    lambda: f64,
    r_outer: f64,
    config: &SolverConfig,
) -> Result<(f64, f64)> {
    config.check()?;
    let rhs2 = |t: f64, y: &[f64; 2]| -> Result<[f64; 2]> {
        if !(y[0] > 0.0) {
            return Err(Error::DegenerateState { t });
        }
        Ok([y[1], el_rhs_aux_route(n, phi, t, y[0], y[1])?])
    };
    let (t_start, y_start) = if lambda == 0.0 {
        let seed = seeded_step(&rhs2, 1.0, [1.0, 0.0])?;
        (seed.t1, seed.y1)
    } else {
        (1.0, [1.0, lambda])
    };
    let mut check = |t: f64, y: &[f64; 2]| -> Result<()> {
        if y[1] <= 0.0 {
            Err(Error::MonotonicityLoss { t })
        } else {
            Ok(())
        }
    };
    let sol = integrate(&rhs2, t_start, y_start, r_outer, &config.ode_opts(), &mut check)?;
    Ok((sol.y_end[0], sol.error_estimate))
}

/// The shooting map P(λ) = H_λ(R): continuous, strictly increasing,
/// P(1) = R, unbounded as λ → ∞.
pub fn outer_radius_map(
    n: u32,
    phi: &StoredEnergy,
    r_outer: f64,
    lambda: f64,
    config: &SolverConfig,
) -> Result<f64> {
    Ok(shoot(n, phi, lambda, r_outer, config)?.0)
}

/// Critical outer radius R∘ = H₀(R), the λ = 0 outer image.
///
/// Materials flagged with α = χ(0) = 0 have no obstruction: R∘ = 1 exactly,
/// returned without integrating.
pub fn critical_radius(n: u32, phi: &StoredEnergy, r_outer: f64, config: &SolverConfig) -> Result<f64> {
    if phi.alpha_is_zero() {
        return Ok(1.0);
    }
    outer_radius_map(n, phi, r_outer, 0.0, config)
}

/// A successful boundary-value solve.
#[derive(Debug, Clone)]
pub struct ShootingOutcome {
    /// Initial slope Ḣ(1) of the solution.
    pub lambda: f64,
    pub profile: RadialProfile,
    /// Achieved outer image P(λ) = H_λ(R).
    pub outer_image: f64,
    /// Critical radius R∘ for this (n, Φ, R).
    pub r_circ: f64,
    pub energy: EnergyBreakdown,
}

/// Outcome of [`solve_bvp`]: either the unique solution or a structured
/// no-solution report carrying the critical radius.
#[derive(Debug, Clone)]
pub enum BvpOutcome {
    Solved(Box<ShootingOutcome>),
    NoSolution { r_circ: f64 },
}

impl BvpOutcome {
    pub fn solved(self) -> Option<ShootingOutcome> {
        match self {
            BvpOutcome::Solved(o) => Some(*o),
            BvpOutcome::NoSolution { .. } => None,
        }
    }
}

/// Solve the boundary-value problem H(1) = 1, H(R) = R*.
///
/// Returns `NoSolution` iff R* < R∘; otherwise finds the unique λ with
/// |P(λ) − R*| ≤ root_tol by expanding the λ bracket (doubling the upper
/// end; guaranteed to terminate since P → ∞) and running Brent on it.
pub fn solve_bvp(problem: &AnnulusProblem) -> Result<BvpOutcome> {
    let config = problem.config;
    config.check()?;
    let r_star = problem.r_star.ok_or(Error::MissingTarget)?;
    let (n, phi, r_outer) = (problem.n, &problem.phi, problem.r_outer);

    let r_circ = critical_radius(n, phi, r_outer, &config)?;
    if r_star < r_circ {
        return Ok(BvpOutcome::NoSolution { r_circ });
    }

    let p = |lambda: f64| -> Result<f64> { outer_radius_map(n, phi, r_outer, lambda, &config) };

    // α = 0 keeps λ = 0 out of the bracket; its infimum value 1 is not attained
    let mut lo = if phi.alpha_is_zero() { config.lambda_bracket.0.max(1e-6) } else { config.lambda_bracket.0 };
    let mut hi = config.lambda_bracket.1.max(lo + 1e-6);
    let mut p_hi = p(hi)?;
    let mut expansions = 0usize;
    while p_hi < r_star {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > config.max_iters {
            return Err(Error::BracketExhausted { lo, hi, iters: expansions });
        }
        p_hi = p(hi)?;
    }

    let lambda = brent(|l| Ok(p(l)? - r_star), lo, hi, 1e-13, config.max_iters.max(100))?;
    let achieved = p(lambda)?;
    if (achieved - r_star).abs() > config.root_tol {
        return Err(Error::NoConvergence(format!(
            "shooting met |P(lambda) - R*| = {:e} > root_tol = {:e}",
            (achieved - r_star).abs(),
            config.root_tol
        )));
    }

    let profile = integrate_profile(n, phi, lambda, r_outer, &config)?;
    let outer_image = profile.outer().1;
    let energy = total_energy(problem, &profile)?;
    Ok(BvpOutcome::Solved(Box::new(ShootingOutcome {
        lambda,
        profile,
        outer_image,
        r_circ,
        energy,
    })))
}

/// One cell of a critical-radius sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub kappa: f64,
    pub r_outer: f64,
    pub r_circ: Option<f64>,
    pub error: Option<String>,
}

fn sweep_cell(kappa: f64, r_outer: f64, config: &SolverConfig) -> SweepRow {
    let result = StoredEnergy::quadratic(0.0, 0.0, kappa)
        .and_then(|phi| critical_radius(2, &phi, r_outer, config));
    match result {
        Ok(r_circ) => SweepRow { kappa, r_outer, r_circ: Some(r_circ), error: None },
        Err(e) => SweepRow { kappa, r_outer, r_circ: None, error: Some(e.to_string()) },
    }
}

fn sweep_grid(kappas: &[f64], r_values: &[f64]) -> Vec<(f64, f64)> {
    let mut grid = Vec::with_capacity(kappas.len() * r_values.len());
    for &k in kappas {
        for &r in r_values {
            grid.push((k, r));
        }
    }
    grid
}

/// Critical-radius sweep over a κ × R grid (planar quadratic material),
/// sequential reference implementation. Rows come back sorted by (κ, R)
/// when the inputs are sorted.
pub fn rcirc_sweep_seq(kappas: &[f64], r_values: &[f64], config: &SolverConfig) -> Vec<SweepRow> {
    sweep_grid(kappas, r_values)
        .iter()
        .map(|&(k, r)| sweep_cell(k, r, config))
        .collect()
}

/// Critical-radius sweep over a κ × R grid, one independent solve per cell.
/// Runs data-parallel when the `parallel` feature is enabled; output order
/// and values are identical to [`rcirc_sweep_seq`].
#[cfg(feature = "parallel")]
pub fn rcirc_sweep(kappas: &[f64], r_values: &[f64], config: &SolverConfig) -> Vec<SweepRow> {
    use rayon::prelude::*;
    sweep_grid(kappas, r_values)
        .par_iter()
        .map(|&(k, r)| sweep_cell(k, r, config))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn rcirc_sweep(kappas: &[f64], r_values: &[f64], config: &SolverConfig) -> Vec<SweepRow> {
    rcirc_sweep_seq(kappas, r_values, config)
}
