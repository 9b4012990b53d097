//! Energy quadrature, the convexity/coercivity facts behind minimality, and
//! an independent discrete variational minimizer used as ground truth.
//!
//! The discrete minimizer never touches the ODE machinery: it minimizes a
//! composite-trapezoid discretization of the energy over piecewise-linear
//! monotone profiles, so agreement with the shooting solver is a genuine
//! two-route check.

use crate::error::{Error, Result};
use crate::kinematics::{
    lagrangian_density, lagrangian_partials, sphere_measure, AnnulusProblem, RadialProfile,
};
use crate::quadrature;

/// Energy of a profile, split into its distortion and volumetric parts.
///
/// `distortion`, `volumetric` and `total` are per unit sphere measure;
/// `total_absolute` carries the ω_{n−1} factor.
#[derive(Debug, Clone, Copy)]
pub struct EnergyBreakdown {
    pub distortion: f64,
    pub volumetric: f64,
    pub total: f64,
    pub total_absolute: f64,
    /// Accumulated quadrature error estimate for `total`.
    pub error_estimate: f64,
}

/// Integrate the energy density of a profile over [1, R] by adaptive
/// Gauss–Kronrod quadrature (relative tolerance 1e−10).
pub fn total_energy(problem: &AnnulusProblem, profile: &RadialProfile) -> Result<EnergyBreakdown> {
    let (t0, _) = profile.inner();
    let (t1, _) = profile.outer();
    if (t0 - 1.0).abs() > 1e-9 || (t1 - problem.r_outer).abs() > 1e-9 * problem.r_outer.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "profile covers [{t0}, {t1}], expected [1, {}]",
            problem.r_outer
        )));
    }
    if profile.h_values().windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("profile must be strictly monotone".into()));
    }
    let n = problem.n;
    let phi = &problem.phi;
    let distortion_density = |t: f64| -> Result<f64> {
        let (h, k) = profile.eval(t);
        let w = crate::kinematics::frobenius_sq(n, t, h, k);
        Ok(t.powi(n as i32 - 1) * w.powf(n as f64 / 2.0))
    };
    let volumetric_density = |t: f64| -> Result<f64> {
        let (h, k) = profile.eval(t);
        let j = crate::kinematics::jacobian(n, t, h, k);
        let p = phi.phi(j);
        if !p.is_finite() {
            return Err(Error::JacobianDomain { t, jacobian: j });
        }
        Ok(t.powi(n as i32 - 1) * p)
    };
    let dist = quadrature::adaptive(&distortion_density, t0, t1, 1e-10, 1e-14)?;
    let vol = quadrature::adaptive(&volumetric_density, t0, t1, 1e-10, 1e-14)?;
    let total = dist.value + vol.value;
    Ok(EnergyBreakdown {
        distortion: dist.value,
        volumetric: vol.value,
        total,
        total_absolute: sphere_measure(n) * total,
        error_estimate: dist.error_estimate + vol.error_estimate,
    })
}

/// Second finite differences of the density in K = Ḣ at a K-grid.
#[derive(Debug, Clone)]
pub struct ConvexityReport {
    pub k_grid: Vec<f64>,
    pub second_differences: Vec<f64>,
}

impl ConvexityReport {
    pub fn all_positive(&self) -> bool {
        self.second_differences.iter().all(|&d| d > 0.0)
    }
}

/// Check ∂²Λ/∂K² > 0 pointwise at fixed (t, H) over a grid of K > 0.
pub fn convexity_in_k(
    problem: &AnnulusProblem,
    t: f64,
    h: f64,
    k_grid: &[f64],
) -> Result<ConvexityReport> {
    if k_grid.is_empty() || k_grid.iter().any(|&k| !(k > 0.0)) {
        return Err(Error::InvalidParameter("convexity grid must be positive".into()));
    }
    let mut second_differences = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        // keep K - dk positive so the Jacobian stays in the domain of Φ
        let dk = (1e-4 * k.abs().max(1e-3)).min(0.5 * k);
        let f = |kk: f64| lagrangian_density(problem.n, &problem.phi, t, h, kk);
        let dd = (f(k + dk)? - 2.0 * f(k)? + f(k - dk)?) / (dk * dk);
        second_differences.push(dd);
    }
    Ok(ConvexityReport { k_grid: k_grid.to_vec(), second_differences })
}

/// Largest constant C with C·|Ḣ|ⁿ ≤ Λ over the sample; +∞ when every
/// sampled Ḣ is zero. Coercivity guarantees C ≥ min t^{n−1} = 1 on [1, R].
pub fn coercivity_constant(problem: &AnnulusProblem, sample: &[(f64, f64, f64)]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InvalidParameter("coercivity sample is empty".into()));
    }
    let mut c = f64::INFINITY;
    for &(t, h, k) in sample {
        let lam = lagrangian_density(problem.n, &problem.phi, t, h, k)?;
        if k != 0.0 {
            c = c.min(lam / k.abs().powi(problem.n as i32));
        }
    }
    Ok(c)
}

/// Composite-trapezoid discretization of the energy of a piecewise-linear
/// profile through (nodes, h): per segment, the slope is the secant and the
/// density is averaged over the two segment ends.
pub fn discrete_energy(problem: &AnnulusProblem, nodes: &[f64], h: &[f64]) -> Result<f64> {
    if nodes.len() != h.len() || nodes.len() < 2 {
        return Err(Error::InvalidParameter("discrete energy needs >= 2 aligned samples".into()));
    }
    let n = problem.n;
    let phi = &problem.phi;
    let mut total = 0.0;
    for i in 1..nodes.len() {
        let dt = nodes[i] - nodes[i - 1];
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter("nodes must be strictly increasing".into()));
        }
        let k = (h[i] - h[i - 1]) / dt;
        let a = lagrangian_density(n, phi, nodes[i - 1], h[i - 1], k)?;
        let b = lagrangian_density(n, phi, nodes[i], h[i], k)?;
        total += 0.5 * dt * (a + b);
    }
    Ok(total)
}

/// Discrete energies of a batch of candidate profiles on shared nodes.
/// Evaluates in parallel when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub fn discrete_energy_batch(
    problem: &AnnulusProblem,
    nodes: &[f64],
    candidates: &[Vec<f64>],
) -> Vec<Result<f64>> {
    use rayon::prelude::*;
    candidates.par_iter().map(|h| discrete_energy(problem, nodes, h)).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn discrete_energy_batch(
    problem: &AnnulusProblem,
    nodes: &[f64],
    candidates: &[Vec<f64>],
) -> Vec<Result<f64>> {
    candidates.iter().map(|h| discrete_energy(problem, nodes, h)).collect()
}

/// Result of the discrete variational minimization.
#[derive(Debug, Clone)]
pub struct MinimizerResult {
    pub profile: RadialProfile,
    pub energy: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    /// Slope of the first segment; collapses toward 0 when the target is at
    /// or below the critical radius.
    pub inner_slope: f64,
}

/// Gradient ∞-norm threshold for minimizer convergence.
const GRAD_TOL: f64 = 1e-9;
const MAX_MINIMIZER_ITERS: usize = 200_000;

/// Direct minimization of the discrete energy over piecewise-linear profiles
/// with H(1) = 1, H(R) = R* and `n_interior` uniform interior nodes.
///
/// Strict monotonicity is enforced by construction: the optimization
/// variables are logs of the node increments, normalized to the fixed total
/// rise R* − 1. Gradient descent with Barzilai–Borwein step sizes and Armijo
/// backtracking runs until the gradient ∞-norm falls below 1e−9.
pub fn discrete_minimizer(problem: &AnnulusProblem, n_interior: usize) -> Result<MinimizerResult> {
    let r_star = problem.r_star.ok_or(Error::MissingTarget)?;
    if n_interior < 16 {
        return Err(Error::InvalidParameter(format!(
            "discrete minimizer needs >= 16 interior nodes, got {n_interior}"
        )));
    }
    let r = problem.r_outer;
    let m = n_interior + 1; // number of segments
    let nodes: Vec<f64> =
        (0..=m).map(|i| 1.0 + (r - 1.0) * i as f64 / m as f64).collect();
    let rise = r_star - 1.0;

    // H from log-increment coordinates theta
    let heights = |theta: &[f64]| -> Vec<f64> {
        let max = theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = theta.iter().map(|&x| (x - max).exp()).collect();
        let sum: f64 = weights.iter().sum();
        let mut h = Vec::with_capacity(m + 1);
        let mut acc = 1.0;
        h.push(acc);
        for w in &weights {
            acc += rise * w / sum;
            h.push(acc);
        }
        h
    };

    let energy_of = |h: &[f64]| discrete_energy(problem, &nodes, h);

    // gradient with respect to theta, through H and the increment normalization
    let grad_of = |theta: &[f64], h: &[f64]| -> Result<Vec<f64>> {
        let n = problem.n;
        let phi = &problem.phi;
        // partials of E with respect to interior H_j
        let mut g_h = vec![0.0; m + 1];
        let mut lam_k_ends: Vec<(f64, f64)> = Vec::with_capacity(m);
        let mut lam_h_ends: Vec<(f64, f64)> = Vec::with_capacity(m);
        for i in 1..=m {
            let dt = nodes[i] - nodes[i - 1];
            let k = (h[i] - h[i - 1]) / dt;
            let (lh0, lk0) = lagrangian_partials(n, phi, nodes[i - 1], h[i - 1], k)?;
            let (lh1, lk1) = lagrangian_partials(n, phi, nodes[i], h[i], k)?;
            lam_h_ends.push((lh0, lh1));
            lam_k_ends.push((lk0, lk1));
        }
        for j in 1..m {
            let dt_l = nodes[j] - nodes[j - 1];
            let dt_r = nodes[j + 1] - nodes[j];
            let (lk0_l, lk1_l) = lam_k_ends[j - 1];
            let (lk0_r, lk1_r) = lam_k_ends[j];
            let (_, lh1_l) = lam_h_ends[j - 1];
            let (lh0_r, _) = lam_h_ends[j];
            g_h[j] = 0.5 * dt_l * lh1_l + 0.5 * dt_r * lh0_r + 0.5 * (lk0_l + lk1_l)
                - 0.5 * (lk0_r + lk1_r);
        }
        // dE/dd_i = suffix sums of g_h over interior nodes >= i
        let mut s = vec![0.0; m];
        let mut acc = 0.0;
        for i in (1..=m).rev() {
            if i < m {
                acc += g_h[i];
            }
            s[i - 1] = acc;
        }
        // chain through the softmax normalization of increments
        let max = theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = theta.iter().map(|&x| (x - max).exp()).collect();
        let wsum: f64 = weights.iter().sum();
        let d: Vec<f64> = weights.iter().map(|w| rise * w / wsum).collect();
        let mean: f64 = s.iter().zip(&d).map(|(si, di)| si * di).sum::<f64>() / rise;
        Ok(d.iter().zip(&s).map(|(di, si)| di * (si - mean)).collect())
    };

    let mut theta = vec![0.0; m];
    let mut h = heights(&theta);
    let mut energy = energy_of(&h)?;
    let mut grad = grad_of(&theta, &h)?;
    let mut step = 1e-2;
    let mut prev_theta: Option<Vec<f64>> = None;
    let mut prev_grad: Option<Vec<f64>> = None;
    let mut iterations = 0;
    // nonmonotone (watchdog) Armijo reference window; plain monotone Armijo
    // would defeat the Barzilai-Borwein step on this ill-conditioned problem
    let mut recent = std::collections::VecDeque::with_capacity(10);
    recent.push_back(energy);

    loop {
        let g_inf = grad.iter().cloned().fold(0.0_f64, |a, g| a.max(g.abs()));
        if g_inf <= GRAD_TOL {
            break;
        }
        if iterations >= MAX_MINIMIZER_ITERS {
            return Err(Error::NoConvergence(format!(
                "discrete minimizer hit {MAX_MINIMIZER_ITERS} iterations (grad inf-norm {g_inf:e})"
            )));
        }
        // Barzilai-Borwein step estimate, alternating the two quotients
        if let (Some(pt), Some(pg)) = (&prev_theta, &prev_grad) {
            let mut sy = 0.0;
            let mut ss = 0.0;
            let mut yy = 0.0;
            for i in 0..m {
                let si = theta[i] - pt[i];
                let yi = grad[i] - pg[i];
                sy += si * yi;
                ss += si * si;
                yy += yi * yi;
            }
            if sy > 0.0 {
                let bb = if iterations % 2 == 0 { ss / sy } else { sy / yy };
                if bb.is_finite() && bb > 0.0 {
                    step = bb.clamp(1e-10, 1e6);
                }
            }
        }
        let g_sq: f64 = grad.iter().map(|g| g * g).sum();
        let e_ref = recent.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut alpha = step;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t - alpha * g).collect();
            let h_trial = heights(&trial);
            let e_trial = energy_of(&h_trial)?;
            if e_trial <= e_ref - 1e-4 * alpha * g_sq {
                prev_theta = Some(std::mem::replace(&mut theta, trial));
                prev_grad = Some(std::mem::take(&mut grad));
                h = h_trial;
                energy = e_trial;
                grad = grad_of(&theta, &h)?;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // descent stalled at numerical noise level
            break;
        }
        if recent.len() == 10 {
            recent.pop_front();
        }
        recent.push_back(energy);
        iterations += 1;
    }

    // node slopes for the sampled profile: centered secants inside,
    // second-order one-sided estimates at the ends
    let dt = nodes[1] - nodes[0];
    let mut hdot = Vec::with_capacity(m + 1);
    hdot.push((-3.0 * h[0] + 4.0 * h[1] - h[2]) / (2.0 * dt));
    for j in 1..m {
        hdot.push((h[j + 1] - h[j - 1]) / (nodes[j + 1] - nodes[j - 1]));
    }
    hdot.push((3.0 * h[m] - 4.0 * h[m - 1] + h[m - 2]) / (2.0 * dt));
    let inner_slope = hdot[0];
    let grad_norm = grad.iter().cloned().fold(0.0_f64, |a, g| a.max(g.abs()));
    let profile = RadialProfile::from_samples(nodes, h, hdot)?;
    Ok(MinimizerResult { profile, energy, iterations, grad_norm, inner_slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::StoredEnergy;
    use crate::solver::SolverConfig;
    use approx::assert_relative_eq;

    fn quad(kappa: f64) -> StoredEnergy {
        StoredEnergy::quadratic(0.0, 0.0, kappa).unwrap()
    }

    fn identity_profile(r: f64, count: usize) -> RadialProfile {
        let nodes: Vec<f64> = (0..count).map(|i| 1.0 + (r - 1.0) * i as f64 / (count - 1) as f64).collect();
        let h = nodes.clone();
        let hdot = vec![1.0; count];
        RadialProfile::from_samples(nodes, h, hdot).unwrap()
    }

    #[test]
    fn identity_energy_planar() {
        let problem = AnnulusProblem::new(2, 2.0, None, quad(1.0)).unwrap();
        let profile = identity_profile(2.0, 65);
        let e = total_energy(&problem, &profile).unwrap();
        assert_relative_eq!(e.distortion, 3.0, epsilon = 1e-10);
        assert_relative_eq!(e.volumetric, 1.5, epsilon = 1e-10);
        assert_relative_eq!(e.total, 4.5, epsilon = 1e-10);
        assert_relative_eq!(e.total_absolute, 9.0 * std::f64::consts::PI, epsilon = 1e-9);
    }

    #[test]
    fn identity_energy_spatial() {
        let phi = StoredEnergy::quadratic(1.0, 0.0, 1.0).unwrap();
        let problem = AnnulusProblem::new(3, 2.0, None, phi).unwrap();
        let profile = identity_profile(2.0, 65);
        let e = total_energy(&problem, &profile).unwrap();
        let want = (7.0 / 3.0) * (3.0 * 3.0_f64.sqrt() + 2.0);
        assert_relative_eq!(e.total, want, epsilon = 1e-9);
        assert!(e.distortion > 0.0 && e.volumetric > 0.0);
        assert_relative_eq!(e.total, e.distortion + e.volumetric, epsilon = 1e-12);
    }

    #[test]
    fn solved_profile_beats_linear_competitor() {
        let problem = AnnulusProblem::new(2, 2.0, Some(3.0), quad(1.0)).unwrap();
        let outcome = crate::solver::solve_bvp(&problem).unwrap().solved().unwrap();
        let nodes: Vec<f64> = (0..=64).map(|i| 1.0 + i as f64 / 64.0).collect();
        let h: Vec<f64> = nodes.iter().map(|t| 1.0 + 2.0 * (t - 1.0)).collect();
        let hdot = vec![2.0; nodes.len()];
        let linear = RadialProfile::from_samples(nodes, h, hdot).unwrap();
        let e_lin = total_energy(&problem, &linear).unwrap();
        assert!(outcome.energy.total < e_lin.total);
    }

    #[test]
    fn convexity_positive() {
        let problem = AnnulusProblem::new(2, 2.0, None, quad(1.0)).unwrap();
        let grid: Vec<f64> = vec![0.1, 0.5, 1.0, 2.0, 5.0];
        let report = convexity_in_k(&problem, 1.0, 1.0, &grid).unwrap();
        assert!(report.all_positive());

        let problem = AnnulusProblem::new(3, 2.0, None, quad(1.0)).unwrap();
        let report = convexity_in_k(&problem, 1.5, 1.2, &grid).unwrap();
        assert!(report.all_positive());

        // K -> 0+ boundary: distortion term dominates and stays convex
        let report = convexity_in_k(&problem, 1.5, 1.2, &[1e-6]).unwrap();
        assert!(report.all_positive());
    }

    #[test]
    fn coercivity_bounds() {
        let problem = AnnulusProblem::new(2, 2.0, None, quad(1.0)).unwrap();
        let sample: Vec<(f64, f64, f64)> = (0..50)
            .map(|i| {
                let t = 1.0 + (i as f64) / 49.0;
                (t, 0.5 + 0.05 * i as f64, 0.1 + 0.1 * i as f64)
            })
            .collect();
        let c = coercivity_constant(&problem, &sample).unwrap();
        assert!(c >= 1.0, "C = {c}");

        // Hdot = 0 rows are trivially fine
        let c = coercivity_constant(&problem, &[(1.0, 1.0, 0.0)]).unwrap();
        assert!(c.is_infinite());

        // n = 3 spot value: Lambda >= |Hdot|^3
        let problem = AnnulusProblem::new(3, 2.0, None, quad(1.0)).unwrap();
        let lam = lagrangian_density(3, &problem.phi, 1.0, 1.0, 2.0).unwrap();
        assert!(lam >= 8.0);
    }

    #[test]
    fn minimizer_recovers_identity() {
        let problem = AnnulusProblem::new(2, 2.0, Some(2.0), quad(1.0)).unwrap();
        let result = discrete_minimizer(&problem, 32).unwrap();
        for (t, h) in result.profile.nodes().iter().zip(result.profile.h_values()) {
            assert!((h - t).abs() <= 1e-6, "H({t}) = {h}");
        }
    }

    #[test]
    fn minimizer_needs_enough_nodes() {
        let problem = AnnulusProblem::new(2, 2.0, Some(2.0), quad(1.0)).unwrap();
        assert!(discrete_minimizer(&problem, 8).is_err());
    }

    #[test]
    fn minimizer_matches_shooting() {
        let problem = AnnulusProblem::new(2, 2.0, Some(3.0), quad(1.0)).unwrap();
        let result = discrete_minimizer(&problem, 64).unwrap();
        let config = SolverConfig::default();
        let case = crate::quadratic::QuadraticCase::new(1.0, 2.0, Some(3.0)).unwrap();
        let lambda = case.lambda().unwrap();
        let shooting = crate::solver::integrate_profile(2, &problem.phi, lambda, 2.0, &config).unwrap();
        let mut sup: f64 = 0.0;
        for (t, h) in result.profile.nodes().iter().zip(result.profile.h_values()) {
            let (hs, _) = shooting.eval(*t);
            sup = sup.max((h - hs).abs());
        }
        assert!(sup <= 5e-3, "sup gap {sup}");
    }

    #[test]
    fn discrete_energy_batch_matches_single() {
        let problem = AnnulusProblem::new(2, 2.0, Some(3.0), quad(1.0)).unwrap();
        let nodes: Vec<f64> = (0..=20).map(|i| 1.0 + i as f64 * 0.05).collect();
        let base: Vec<f64> = nodes.iter().map(|t| 1.0 + 2.0 * (t - 1.0)).collect();
        let squeezed: Vec<f64> = nodes.iter().map(|t| 1.0 + 2.0 * (t - 1.0).powi(2) / 1.0).collect();
        let batch = discrete_energy_batch(&problem, &nodes, &[base.clone(), squeezed.clone()]);
        assert_relative_eq!(
            batch[0].as_ref().unwrap(),
            &discrete_energy(&problem, &nodes, &base).unwrap()
        );
        assert_relative_eq!(
            batch[1].as_ref().unwrap(),
            &discrete_energy(&problem, &nodes, &squeezed).unwrap()
        );
    }

    #[test]
    fn quadrature_error_estimate_is_honest() {
        let problem = AnnulusProblem::new(2, 2.0, None, quad(1.0)).unwrap();
        let profile = identity_profile(2.0, 129);
        let e = total_energy(&problem, &profile).unwrap();
        assert!((e.total - 4.5).abs() <= 4.0 * e.error_estimate.max(1e-12));
    }
}
