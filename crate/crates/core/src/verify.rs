//! Cross-module consistency suites: every closed form is replayed against
//! the solver, every solver output against an independent oracle. This is
//! what `annuli verify` runs.
//!
//! Checks never panic; failures (including unexpected errors) come back as
//! failed [`CheckResult`]s so a report always forms.

use crate::comparison::{ordering_check, ORDERING_TOL};
use crate::energy::{discrete_energy, discrete_minimizer, total_energy};
use crate::error::Result;
use crate::euler_lagrange::{el_rhs, variational_residual, ElRhsForm};
use crate::kinematics::{AnnulusProblem, RadialProfile, Regime};
use crate::material::StoredEnergy;
use crate::quadratic::{self, QuadraticCase};
use crate::solver::{
    critical_radius, integrate_aux, integrate_profile, integrate_profile_impl, outer_radius_map,
    solve_bvp, SolverConfig,
};

/// Fault injection hooks for negative-control runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Injection {
    None,
    /// Flip the sign of the Euler–Lagrange right-hand side used by the
    /// residual suite; the variational oracle must catch it.
    FlipElRhsSign,
}

/// One verified invariant with its measured value and tolerance.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

/// Full verification report.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Suites runnable individually through the `--suite` CLI flag.
pub const SUITES: &[&str] = &["quadratic", "residual", "comparison", "energy", "shooting"];

struct Recorder {
    suite: &'static str,
    checks: Vec<CheckResult>,
}

impl Recorder {
    fn new(suite: &'static str) -> Self {
        Self { suite, checks: Vec::new() }
    }

    /// Record `measured <= tolerance` as the pass criterion.
    fn le(&mut self, name: &str, measured: Result<f64>, tolerance: f64, detail: &str) {
        let check = match measured {
            Ok(m) => CheckResult {
                suite: self.suite,
                name: name.to_string(),
                passed: m.is_finite() && m <= tolerance,
                measured: m,
                tolerance,
                detail: detail.to_string(),
            },
            Err(e) => CheckResult {
                suite: self.suite,
                name: name.to_string(),
                passed: false,
                measured: f64::NAN,
                tolerance,
                detail: format!("{detail} [error: {e}]"),
            },
        };
        self.checks.push(check);
    }

    /// Record `measured > tolerance` as the pass criterion (separations).
    fn gt(&mut self, name: &str, measured: Result<f64>, tolerance: f64, detail: &str) {
        let check = match measured {
            Ok(m) => CheckResult {
                suite: self.suite,
                name: name.to_string(),
                passed: m.is_finite() && m > tolerance,
                measured: m,
                tolerance,
                detail: detail.to_string(),
            },
            Err(e) => CheckResult {
                suite: self.suite,
                name: name.to_string(),
                passed: false,
                measured: f64::NAN,
                tolerance,
                detail: format!("{detail} [error: {e}]"),
            },
        };
        self.checks.push(check);
    }
}

fn quad(kappa: f64) -> Result<StoredEnergy> {
    StoredEnergy::quadratic(0.0, 0.0, kappa)
}

fn uniform_nodes(r: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| 1.0 + (r - 1.0) * i as f64 / (count - 1) as f64).collect()
}

/// Deterministic generator for randomized checks (splitmix64).
struct TestRng(u64);

impl TestRng {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform draw in [lo, hi).
    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }
}

fn quadratic_suite(rec: &mut Recorder) {
    let config = SolverConfig::default();
    // closed form vs shooting, profile and recovered slope
    for r_star in [1.5, 3.0] {
        let run = || -> Result<(f64, f64)> {
            let phi = quad(1.0)?;
            let problem = AnnulusProblem::new(2, 2.0, Some(r_star), phi)?;
            let outcome = solve_bvp(&problem)?.solved().ok_or(crate::error::Error::NoConvergence(
                "unexpected no-solution".into(),
            ))?;
            let case = QuadraticCase::new(1.0, 2.0, Some(r_star))?;
            let nodes = uniform_nodes(2.0, 201);
            let closed = quadratic::closed_form_profile(&case, &nodes)?;
            let mut sup: f64 = 0.0;
            for (t, h) in closed.nodes().iter().zip(closed.h_values()) {
                sup = sup.max((outcome.profile.eval(*t).0 - h).abs());
            }
            Ok((sup, (outcome.lambda - case.lambda()?).abs()))
        };
        match run() {
            Ok((sup, dl)) => {
                rec.le(
                    &format!("closed_form_profile_gap_rstar_{r_star}"),
                    Ok(sup),
                    1e-6,
                    "sup |H_shooting - H_closed| on 201 nodes, kappa = 1, R = 2",
                );
                rec.le(
                    &format!("closed_form_lambda_gap_rstar_{r_star}"),
                    Ok(dl),
                    1e-6,
                    "recovered initial slope vs closed-form value",
                );
            }
            Err(e) => {
                rec.le(&format!("closed_form_profile_gap_rstar_{r_star}"), Err(e.clone()), 1e-6, "");
                rec.le(&format!("closed_form_lambda_gap_rstar_{r_star}"), Err(e), 1e-6, "");
            }
        }
    }
    // dual-route critical radius
    for kappa in [0.5, 1.0, 2.0] {
        let gap = (|| -> Result<f64> {
            let phi = quad(kappa)?;
            let shooting = critical_radius(2, &phi, 2.0, &config)?;
            let closed = quadratic::nitsche_bound(kappa, 2.0)?;
            Ok((shooting - closed).abs())
        })();
        rec.le(
            &format!("critical_radius_dual_route_kappa_{kappa}"),
            gap,
            1e-6,
            "lambda = 0 shooting vs admissibility-equation root, R = 2",
        );
    }
    // limit anchors of the critical radius
    rec.le(
        "nitsche_bound_small_kappa_limit",
        quadratic::nitsche_bound(1e-3, 2.0).map(|b| (b - 1.25).abs()),
        1e-4,
        "kappa -> 0 limit (1+R^2)/(2R) at R = 2",
    );
    rec.le(
        "nitsche_bound_large_kappa_limit",
        quadratic::nitsche_bound(1e3, 2.0).map(|b| (b - 1.0).abs()),
        1e-2,
        "kappa -> infinity limit 1",
    );
    // the closed-form auxiliary solution satisfies the auxiliary equation
    let residual = (|| -> Result<f64> {
        let phi = quad(1.3)?;
        let case = QuadraticCase::new(1.3, 2.0, Some(2.4))?;
        let lambda = quadratic::lambda_from_c0(1.3, case.c0()?);
        let mut worst: f64 = 0.0;
        for i in 0..40 {
            let s = 0.6 + i as f64 * 0.02;
            let v = quadratic::aux_solution(1.3, lambda, s);
            let lhs = quadratic::aux_solution_derivative(1.3, lambda, s);
            let rhs = crate::euler_lagrange::aux_rhs(2, &phi, s, v)?;
            worst = worst.max((lhs - rhs).abs());
        }
        Ok(worst)
    })();
    rec.le(
        "closed_form_aux_satisfies_ode",
        residual,
        1e-10,
        "analytic derivative of the closed-form v against the auxiliary right-hand side",
    );
}

fn residual_suite(rec: &mut Recorder, injection: Injection) {
    let config = SolverConfig::default();
    let lambda = 1.5;
    let nodes = uniform_nodes(2.0, 202);
    let flipped = injection == Injection::FlipElRhsSign;

    let production = (|| -> Result<f64> {
        let phi = quad(1.0)?;
        let problem = AnnulusProblem::new(2, 2.0, None, phi.clone())?;
        let rhs = |t: f64, h: f64, k: f64| -> Result<f64> {
            let v = el_rhs(ElRhsForm::PlanarDirect, 2, &phi, t, h, k)?;
            Ok(if flipped { -v } else { v })
        };
        let profile = integrate_profile_impl(lambda, 2.0, &config, &rhs)?;
        let report = variational_residual(&problem, &profile.resample(&nodes)?)?;
        Ok(report.sup())
    })();
    rec.le(
        "planar_direct_residual",
        production,
        1e-5,
        "sup Euler-Lagrange residual of the planar-direct-integrated profile, 200 interior nodes",
    );

    let alternative = (|| -> Result<f64> {
        let phi = quad(1.0)?;
        let problem = AnnulusProblem::new(2, 2.0, None, phi.clone())?;
        let profile =
            crate::solver::integrate_profile_with_form(2, &phi, lambda, 2.0, &config, ElRhsForm::GeneralM)?;
        let report = variational_residual(&problem, &profile.resample(&nodes)?)?;
        Ok(report.sup())
    })();
    rec.gt(
        "general_m_form_rejected_by_oracle",
        alternative,
        1e-5,
        "the alternative general-dimension coefficient must exceed the oracle tolerance away from t = 1",
    );
}

fn comparison_suite(rec: &mut Recorder) {
    let config = SolverConfig::default();
    let pair = |k1: f64, k2: f64, l1: f64, l2: f64| -> Result<f64> {
        Ok(ordering_check(&quad(k1)?, &quad(k2)?, l1, l2, 2.0, &config)?.max_violation)
    };
    rec.le("ordering_kappa_2_vs_1", pair(2.0, 1.0, 0.5, 0.5), ORDERING_TOL, "stiffer material stays below");
    rec.le("ordering_lambda_05_vs_07", pair(1.0, 1.0, 0.5, 0.7), ORDERING_TOL, "larger initial slope dominates");
    let transitivity = (|| -> Result<f64> {
        let a = pair(3.0, 1.5, 0.8, 0.8)?;
        let b = pair(1.5, 0.7, 0.8, 0.8)?;
        let c = pair(3.0, 0.7, 0.8, 0.8)?;
        Ok(a.max(b).max(c))
    })();
    rec.le("ordering_transitive_triple", transitivity, ORDERING_TOL, "kappa 3.0 >= 1.5 >= 0.7 at lambda 0.8");
}

fn energy_suite(rec: &mut Recorder) {
    // analytic identity energies
    let planar = (|| -> Result<f64> {
        let problem = AnnulusProblem::new(2, 2.0, None, quad(1.0)?)?;
        let nodes = uniform_nodes(2.0, 65);
        let profile = RadialProfile::from_samples(nodes.clone(), nodes, vec![1.0; 65])?;
        Ok((total_energy(&problem, &profile)?.total - 4.5).abs())
    })();
    rec.le("identity_energy_planar", planar, 1e-9, "integral of 3t over [1, 2]");

    let spatial = (|| -> Result<f64> {
        let phi = StoredEnergy::quadratic(1.0, 0.0, 1.0)?;
        let problem = AnnulusProblem::new(3, 2.0, None, phi)?;
        let nodes = uniform_nodes(2.0, 65);
        let profile = RadialProfile::from_samples(nodes.clone(), nodes, vec![1.0; 65])?;
        let want = (7.0 / 3.0) * (3.0 * 3.0_f64.sqrt() + 2.0);
        Ok((total_energy(&problem, &profile)?.total - want).abs())
    })();
    rec.le("identity_energy_spatial", spatial, 1e-9, "integral of t^2 (3^{3/2} + 2) over [1, 2]");

    // discrete minimizer against the shooting profile
    let minimizer_gap = (|| -> Result<f64> {
        let problem = AnnulusProblem::new(2, 2.0, Some(3.0), quad(1.0)?)?;
        let result = discrete_minimizer(&problem, 200)?;
        let outcome = solve_bvp(&problem)?.solved().unwrap();
        let mut sup: f64 = 0.0;
        for (t, h) in result.profile.nodes().iter().zip(result.profile.h_values()) {
            sup = sup.max((outcome.profile.eval(*t).0 - h).abs());
        }
        Ok(sup)
    })();
    rec.le(
        "discrete_minimizer_matches_shooting",
        minimizer_gap,
        1e-3,
        "sup gap, N = 200, (n, kappa, R, R*) = (2, 1, 2, 3)",
    );

    // energy gap against random monotone perturbations of the minimizer
    let gap = (|| -> Result<f64> {
        let problem = AnnulusProblem::new(2, 2.0, Some(3.0), quad(1.0)?)?;
        let result = discrete_minimizer(&problem, 64)?;
        let nodes = result.profile.nodes().to_vec();
        let base_h = result.profile.h_values().to_vec();
        let base_e = discrete_energy(&problem, &nodes, &base_h)?;
        let mut rng = TestRng(0x5eed);
        let mut worst = f64::INFINITY;
        for _ in 0..50 {
            let mut increments: Vec<f64> =
                base_h.windows(2).map(|w| w[1] - w[0]).collect();
            for d in increments.iter_mut() {
                *d *= (0.05 * rng.uniform(-1.0, 1.0)).exp();
            }
            let total: f64 = increments.iter().sum();
            let scale = (base_h.last().unwrap() - base_h[0]) / total;
            let mut h = vec![base_h[0]];
            for d in &increments {
                h.push(h.last().unwrap() + d * scale);
            }
            let e = discrete_energy(&problem, &nodes, &h)?;
            worst = worst.min(e - base_e);
        }
        Ok(-worst)
    })();
    rec.le(
        "energy_gap_random_perturbations",
        gap,
        1e-9,
        "max energy decrease over 50 random monotone endpoint-fixed perturbations (should be none)",
    );
}

fn shooting_suite(rec: &mut Recorder) {
    let config = SolverConfig::default();
    // identity fixed point
    for n in [2u32, 3, 4] {
        let gap = (|| -> Result<f64> {
            let problem = AnnulusProblem::new(n, 2.0, Some(2.0), quad(1.0)?)?;
            let outcome = solve_bvp(&problem)?.solved().unwrap();
            let mut sup = (outcome.lambda - 1.0).abs();
            for (t, h) in outcome.profile.nodes().iter().zip(outcome.profile.h_values()) {
                sup = sup.max((h - t).abs());
            }
            Ok(sup)
        })();
        rec.le(
            &format!("identity_fixed_point_n{n}"),
            gap,
            1e-8,
            "R* = R must return lambda = 1 and the identity profile",
        );
    }
    // monotone shooting map
    let monotone = (|| -> Result<f64> {
        let phi = quad(1.0)?;
        let mut prev = f64::NEG_INFINITY;
        let mut min_gap = f64::INFINITY;
        for lambda in [0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0] {
            let p = outer_radius_map(2, &phi, 2.0, lambda, &config)?;
            min_gap = min_gap.min(p - prev);
            prev = p;
        }
        Ok(-min_gap)
    })();
    rec.le("outer_map_strictly_increasing", monotone, 0.0, "P(lambda) over 0.1..10");

    // round-trip lambda recovery
    let round_trip = (|| -> Result<f64> {
        let phi = quad(1.0)?;
        let mut rng = TestRng(0xabcd);
        let mut worst: f64 = 0.0;
        for _ in 0..5 {
            let lambda = rng.uniform(0.1, 5.0);
            let target = outer_radius_map(2, &phi, 2.0, lambda, &config)?;
            let problem = AnnulusProblem::new(2, 2.0, Some(target), phi.clone())?;
            let outcome = solve_bvp(&problem)?.solved().unwrap();
            worst = worst.max((outcome.lambda - lambda).abs());
        }
        Ok(worst)
    })();
    rec.le("lambda_round_trip", round_trip, SolverConfig::default().root_tol, "solve_bvp(P(lambda)) recovers lambda");

    // growth bound along auxiliary trajectories (the integrator asserts it
    // at every accepted step; any violation surfaces as an error here)
    let growth = (|| -> Result<f64> {
        let phi = quad(1.0)?;
        for (n, lambda, s_target) in [(2u32, 0.3, 0.4), (3, 1.8, 2.0), (4, 0.0, 0.5)] {
            integrate_aux(n, &phi, lambda, s_target, &config)?;
        }
        Ok(0.0)
    })();
    rec.le("growth_bound_along_trajectories", growth, 0.5, "no accepted step violates the a-priori bound");

    // regime coherence and sign permanence of H - t Hdot
    let coherence = (|| -> Result<f64> {
        let phi = quad(1.0)?;
        for (lambda, want) in [(0.5, Regime::Inelastic), (2.0, Regime::Elastic)] {
            let profile = integrate_profile(2, &phi, lambda, 2.0, &config)?;
            if profile.regime() != want {
                return Ok(1.0);
            }
            let outer = profile.outer().1;
            if (lambda < 1.0 && outer >= 2.0) || (lambda > 1.0 && outer <= 2.0) {
                return Ok(1.0);
            }
            let mut signs = profile
                .nodes()
                .iter()
                .zip(profile.h_values().iter().zip(profile.hdot_values()))
                .map(|(t, (h, k))| h - t * k);
            let first = signs.next().unwrap();
            if signs.any(|s| s.signum() != first.signum()) {
                return Ok(1.0);
            }
        }
        Ok(0.0)
    })();
    rec.le("regime_coherence", coherence, 0.5, "lambda < 1 inelastic below R; lambda > 1 elastic above R; constant sign of H - t Hdot");
}

/// Run the named suite (or all of them) and collect the report.
pub fn run(suite_filter: Option<&str>, injection: Injection) -> VerifyReport {
    let mut checks = Vec::new();
    let want = |name: &str| suite_filter.is_none_or(|f| f == name);
    if want("quadratic") {
        let mut rec = Recorder::new("quadratic");
        quadratic_suite(&mut rec);
        checks.extend(rec.checks);
    }
    if want("residual") {
        let mut rec = Recorder::new("residual");
        residual_suite(&mut rec, injection);
        checks.extend(rec.checks);
    }
    if want("comparison") {
        let mut rec = Recorder::new("comparison");
        comparison_suite(&mut rec);
        checks.extend(rec.checks);
    }
    if want("energy") {
        let mut rec = Recorder::new("energy");
        energy_suite(&mut rec);
        checks.extend(rec.checks);
    }
    if want("shooting") {
        let mut rec = Recorder::new("shooting");
        shooting_suite(&mut rec);
        checks.extend(rec.checks);
    }
    VerifyReport { checks }
}
