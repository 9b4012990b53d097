//! Cross-checks between the independent integration routes: the direct
//! second-order form, the co-integrated auxiliary pair, the standalone
//! auxiliary trajectory, and the closed-form machinery where it exists.

use annuli::energy::{discrete_minimizer, total_energy};
use annuli::euler_lagrange::variational_residual;
use annuli::kinematics::AnnulusProblem;
use annuli::material::StoredEnergy;
use annuli::quadratic::{self, QuadraticCase};
use annuli::solver::{
    critical_radius, integrate_aux, integrate_profile, integrate_profile_via_aux, shoot,
    SolverConfig,
};

fn quad(kappa: f64) -> StoredEnergy {
    StoredEnergy::quadratic(0.0, 0.0, kappa).unwrap()
}

#[test]
fn direct_and_coaux_routes_agree_across_dimensions() {
    let config = SolverConfig::default();
    for n in [2u32, 3, 4, 5] {
        for lambda in [0.0, 0.4, 1.0, 2.3] {
            let direct = integrate_profile(n, &quad(1.0), lambda, 2.0, &config).unwrap();
            let coaux = integrate_profile_via_aux(n, &quad(1.0), lambda, 2.0, &config).unwrap();
            let mut sup: f64 = 0.0;
            for (t, h) in coaux.nodes().iter().zip(coaux.h_values()) {
                sup = sup.max((direct.eval(*t).0 - h).abs());
            }
            assert!(sup <= 1e-8, "n={n} lambda={lambda}: route gap {sup:e}");
        }
    }
}

#[test]
fn aux_trajectory_reconstructs_profile_slope() {
    // Hdot(t) = (t/H) v(H/t) with the trajectory integrated separately
    let config = SolverConfig::default();
    let lambda = 0.5;
    let profile = integrate_profile(2, &quad(1.0), lambda, 2.0, &config).unwrap();
    let s_end = profile.outer().1 / 2.0;
    let traj = integrate_aux(2, &quad(1.0), lambda, s_end * 0.999, &config).unwrap();
    for i in (0..profile.len()).step_by(7) {
        let t = profile.nodes()[i];
        let h = profile.h_values()[i];
        let k = profile.hdot_values()[i];
        if let Some(v) = traj.eval(h / t) {
            let k_from_aux = (t / h) * v;
            assert!(
                (k - k_from_aux).abs() <= 1e-7,
                "t={t}: Hdot {k} vs aux-reconstructed {k_from_aux}"
            );
        }
    }
}

#[test]
fn closed_form_is_third_route() {
    let config = SolverConfig::default();
    let kappa = 2.0;
    let case = QuadraticCase::new(kappa, 2.0, Some(1.6)).unwrap();
    let lambda = case.lambda().unwrap();
    let direct = integrate_profile(2, &quad(kappa), lambda, 2.0, &config).unwrap();
    let nodes: Vec<f64> = (0..101).map(|i| 1.0 + i as f64 / 100.0).collect();
    let closed = quadratic::closed_form_profile(&case, &nodes).unwrap();
    for (t, h) in closed.nodes().iter().zip(closed.h_values()) {
        assert!((direct.eval(*t).0 - h).abs() <= 1e-7, "t={t}");
    }
}

#[test]
fn lambda_zero_seeding_is_consistent() {
    let config = SolverConfig::default();
    for n in [2u32, 3, 4] {
        let profile = integrate_profile(n, &quad(1.0), 0.0, 2.0, &config).unwrap();
        assert_eq!(profile.hdot_values()[0], 0.0);
        assert!(profile.hdot_values()[1..].iter().all(|&k| k > 0.0));
        let r_circ = profile.outer().1;
        assert!(r_circ > 1.0 && r_circ < 2.0, "n={n}: H_0(R) = {r_circ}");
        assert_eq!(critical_radius(n, &quad(1.0), 2.0, &config).unwrap(), r_circ);
    }
}

#[test]
fn critical_radius_in_range_across_dimensions() {
    let config = SolverConfig::default();
    for n in [2u32, 3, 4, 5] {
        let r_circ = critical_radius(n, &quad(1.0), 2.0, &config).unwrap();
        assert!(r_circ > 1.0 && r_circ < 2.0, "n={n}: {r_circ}");
    }
}

#[test]
fn minimizer_profile_passes_residual_oracle_at_discretization_scale() {
    // sup over nodes away from the boundary, where the piecewise-linear
    // representative's slope estimates are uniformly second order
    let trimmed_sup = |report: &annuli::euler_lagrange::ResidualReport| {
        report.residuals[2..report.residuals.len() - 2]
            .iter()
            .cloned()
            .fold(0.0_f64, f64::max)
    };
    let problem = AnnulusProblem::new(2, 2.0, Some(3.0), quad(1.0)).unwrap();
    let fine = discrete_minimizer(&problem, 200).unwrap();
    let coarse = discrete_minimizer(&problem, 100).unwrap();
    let res_fine = trimmed_sup(&variational_residual(&problem, &fine.profile).unwrap());
    let res_coarse = trimmed_sup(&variational_residual(&problem, &coarse.profile).unwrap());
    assert!(res_fine < 1e-2, "N=200 residual {res_fine:e}");
    // O(1/N^2) decay: halving the resolution should roughly quadruple it
    let ratio = res_coarse / res_fine;
    assert!(ratio > 2.5, "residual decay ratio {ratio} (coarse {res_coarse:e}, fine {res_fine:e})");
}

#[test]
fn energy_gap_under_smooth_perturbations() {
    // first-order stationarity: perturbing the solved profile by smooth
    // endpoint-fixed bumps never lowers the energy
    let problem = AnnulusProblem::new(2, 2.0, Some(3.0), quad(1.0)).unwrap();
    let outcome = annuli::solver::solve_bvp(&problem).unwrap().solved().unwrap();
    let nodes: Vec<f64> = (0..201).map(|i| 1.0 + i as f64 / 200.0).collect();
    let base = total_energy(&problem, &outcome.profile).unwrap().total;
    let pi = std::f64::consts::PI;
    for mode in 1..=3 {
        for eps in [0.01, 0.05, 0.1] {
            let omega = mode as f64 * pi;
            let h: Vec<f64> = nodes
                .iter()
                .map(|t| outcome.profile.eval(*t).0 + eps * (omega * (t - 1.0)).sin())
                .collect();
            let hdot: Vec<f64> = nodes
                .iter()
                .map(|t| outcome.profile.eval(*t).1 + eps * omega * (omega * (t - 1.0)).cos())
                .collect();
            if hdot.iter().any(|&k| k <= 0.0) {
                continue; // perturbation broke monotonicity; outside the class
            }
            let perturbed =
                annuli::kinematics::RadialProfile::from_samples(nodes.clone(), h, hdot).unwrap();
            let e = total_energy(&problem, &perturbed).unwrap().total;
            assert!(
                e >= base - 1e-9,
                "mode {mode}, eps {eps}: perturbed energy {e} below minimum {base}"
            );
        }
    }
}

#[test]
fn shoot_reports_usable_error_estimate() {
    let config = SolverConfig { rel_tol: 1e-8, abs_tol: 1e-10, ..SolverConfig::default() };
    let tight = SolverConfig { rel_tol: 1e-12, abs_tol: 1e-14, ..SolverConfig::default() };
    for n in [2u32, 3] {
        for lambda in [0.4, 1.7] {
            let (p, est) = shoot(n, &quad(1.0), lambda, 2.0, &config).unwrap();
            let (p_ref, _) = shoot(n, &quad(1.0), lambda, 2.0, &tight).unwrap();
            assert!(
                (p - p_ref).abs() <= est.max(1e-13),
                "n={n} lambda={lambda}: |{p} - {p_ref}| > estimate {est:e}"
            );
        }
    }
}
