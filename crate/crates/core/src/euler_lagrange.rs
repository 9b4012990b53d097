//! Right-hand sides of the radial Euler–Lagrange equation and of the
//! auxiliary first-order equation, plus a derivative-free variational
//! residual oracle that arbitrates between algebraic forms.
//!
//! The stationary profiles of the neohookean energy satisfy a second-order
//! equation of the form Ḧ = (H − tḢ)·M(t, H, Ḣ). Substituting
//! Ḣ = v(s)/s with s = H/t collapses it to the scalar equation
//! v̇ = G(v, s) = −Xₙ/Zₙ, an IVP family in the initial slope λ = v(1).
//! The production right-hand side for every n ≥ 2 is reconstructed from G
//! through that substitution ([`el_rhs_aux_route`]); the two tabulated forms
//! ([`ElRhsForm`]) are kept for diagnostics and are judged by the residual
//! oracle, not trusted.

use crate::error::{Error, Result};
use crate::kinematics::{lagrangian_density, AnnulusProblem, RadialProfile};
use crate::material::StoredEnergy;

/// Algebraic form of the second-order right-hand side.
///
/// `GeneralM` is the general-dimension coefficient with B, C, D, E factors;
/// `PlanarDirect` is the n = 2 equation
/// Ḧ = (H − tḢ)(HḢΦ̈ + 2t)/(tH²Φ̈ + 2t³). The two disagree at n = 2 away
/// from t = 1 (GeneralM lacks a factor t in one numerator term); the
/// variational residual oracle confirms `PlanarDirect` and the aux route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElRhsForm {
    GeneralM,
    PlanarDirect,
}

/// Ḧ from the selected algebraic form.
pub fn el_rhs(
    form: ElRhsForm,
    n: u32,
    phi: &StoredEnergy,
    t: f64,
    h: f64,
    hdot: f64,
) -> Result<f64> {
    if !(t > 0.0) || !(h > 0.0) {
        return Err(Error::DegenerateState { t });
    }
    match form {
        ElRhsForm::PlanarDirect => {
            if n != 2 {
                return Err(Error::InvalidParameter(format!(
                    "planar_direct form is only defined for n = 2, got n = {n}"
                )));
            }
            let dd = phi.ddphi(h * hdot / t);
            let denom = t * h * h * dd + 2.0 * t * t * t;
            if denom == 0.0 || !denom.is_finite() {
                return Err(Error::DegenerateState { t });
            }
            Ok((h - t * hdot) * (h * hdot * dd + 2.0 * t) / denom)
        }
        ElRhsForm::GeneralM => {
            let nf = n as f64;
            let a = nf - 1.0;
            let w = a * h * h / (t * t) + hdot * hdot;
            let pw = w.powf(nf / 2.0);
            let t2n = t.powi(2 * n as i32);
            let h2n = h.powi(2 * n as i32);
            let q = a * h * h + t * t * hdot * hdot;
            let dd = phi.ddphi(t.powi(1 - n as i32) * h.powi(n as i32 - 1) * hdot);
            let b = nf * t2n * h * h * h * pw * (a * h * h + (nf - 2.0) * t * h * hdot + t * t * hdot * hdot);
            let c = h2n * hdot * q * q * dd;
            let d = a * nf * t2n * h * h * pw * (h * h + t * t * hdot * hdot);
            let e = h2n * q * q * dd;
            let denom = d + e;
            if denom == 0.0 || !denom.is_finite() {
                return Err(Error::DegenerateState { t });
            }
            let m = a / (t * t * h) * (b + c) / denom;
            Ok((h - t * hdot) * m)
        }
    }
}

/// Production second-order right-hand side for any n ≥ 2, reconstructed
/// from the auxiliary equation: with s = H/t and v = sḢ,
/// Ḧ = (H − tḢ)·(v − s·G(v, s))/(s²t²).
///
/// At n = 2 this reduces exactly to the `PlanarDirect` form, and it stays
/// finite on the conformal branch H = λt where the substitution itself
/// degenerates.
pub fn el_rhs_aux_route(n: u32, phi: &StoredEnergy, t: f64, h: f64, hdot: f64) -> Result<f64> {
    if !(t > 0.0) || !(h > 0.0) {
        return Err(Error::DegenerateState { t });
    }
    let s = h / t;
    let v = s * hdot;
    let g = aux_rhs(n, phi, s, v)?;
    let m = (v - s * g) / (s * s * t * t);
    Ok((h - t * hdot) * m)
}

/// Numerator factor Xₙ(v, s) of the auxiliary right-hand side.
fn x_n(n: u32, phi: &StoredEnergy, s: f64, v: f64) -> f64 {
    let nf = n as f64;
    let a = nf - 1.0;
    let s2 = s * s;
    let s4 = s2 * s2;
    let r = a * s4 + v * v;
    let rp = r.powf(nf / 2.0);
    let dd = phi.ddphi(s.powi(n as i32 - 2) * v);
    a * nf * s4 * rp * (a * s4 * s2 + v * ((nf - 3.0) * s4 + (s2 - v) * v))
        + (nf - 2.0) * s.powi(3 * n as i32) * v * r * r * dd
}

/// Denominator factor Zₙ(v, s); strictly positive for s > 0 and convex Φ.
fn z_n(n: u32, phi: &StoredEnergy, s: f64, v: f64) -> f64 {
    let nf = n as f64;
    let a = nf - 1.0;
    let s2 = s * s;
    let s4 = s2 * s2;
    let r = a * s4 + v * v;
    let rp = r.powf(nf / 2.0);
    let dd = phi.ddphi(s.powi(n as i32 - 2) * v);
    a * nf * s4 * s * (s4 + v * v) * rp + s.powi(1 + 3 * n as i32) * r * r * dd
}

/// Remainder factor Yₙ(v, s) in the split v̇ = −(n−2)v/s + Yₙ/Zₙ.
fn y_n(n: u32, s: f64, v: f64) -> f64 {
    let nf = n as f64;
    let a = nf - 1.0;
    let s2 = s * s;
    let s4 = s2 * s2;
    let r = a * s4 + v * v;
    let rp = r.powf(nf / 2.0);
    a * nf * s4 * (v - s2) * rp * (a * s4 + (nf - 2.0) * s2 * v + a * v * v)
}

/// Auxiliary right-hand side v̇ = G(v, s) = −Xₙ/Zₙ, with Φ̈ taken at the
/// Jacobian s^{n−2}v. Extended to v < 0 by odd reflection about G(s, 0).
pub fn aux_rhs(n: u32, phi: &StoredEnergy, s: f64, v: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("aux_rhs needs s > 0, got {s}")));
    }
    if v < 0.0 {
        // G(s, -v) := 2 G(s, 0) - G(s, v)
        let g0 = aux_rhs(n, phi, s, 0.0)?;
        let gp = aux_rhs(n, phi, s, -v)?;
        return Ok(2.0 * g0 - gp);
    }
    let z = z_n(n, phi, s, v);
    if z == 0.0 || !z.is_finite() {
        return Err(Error::ZeroDenominator { s, v });
    }
    Ok(-x_n(n, phi, s, v) / z)
}

/// Equivalent split of the auxiliary right-hand side,
/// −(n−2)v/s + Yₙ/Zₙ. Equal to [`aux_rhs`] identically; exposed for the
/// algebraic-identity property test.
pub fn aux_rhs_split(n: u32, phi: &StoredEnergy, s: f64, v: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("aux_rhs needs s > 0, got {s}")));
    }
    let z = z_n(n, phi, s, v);
    if z == 0.0 || !z.is_finite() {
        return Err(Error::ZeroDenominator { s, v });
    }
    Ok(-(n as f64 - 2.0) * v / s + y_n(n, s, v) / z)
}

/// A-priori bound (3n−5)v/s + (n−1)s on |G(v, s)| for v ≥ 0, valid for
/// every convex Φ. Violation along a trajectory signals a right-hand-side
/// bug, so integrators assert it at every accepted step.
pub fn growth_bound(n: u32, s: f64, v: f64) -> f64 {
    debug_assert!(s > 0.0 && v >= 0.0);
    (3.0 * n as f64 - 5.0) * v / s + (n as f64 - 1.0) * s
}

/// Recover Ḣ from the auxiliary solution: Ḣ(t) = (t/H)·v(H/t).
pub fn hdot_from_aux(t: f64, h: f64, v_at: impl Fn(f64) -> f64) -> f64 {
    (t / h) * v_at(h / t)
}

/// Relative finite-difference step for the residual oracle.
const FD_REL_STEP: f64 = 1e-5;

/// Pointwise Euler–Lagrange residual |Λ_H − d/dt Λ_Ḣ| of a sampled profile.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    /// Interior nodes where the residual was evaluated.
    pub nodes: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl ResidualReport {
    pub fn sup(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }
}

/// Derivative-free variational oracle: evaluates |Λ_H − d/dt Λ_Ḣ| at the
/// interior nodes of a profile by central finite differences of the energy
/// density alone (relative step 1e−5 in H and Ḣ, node spacing in t with
/// one Richardson refinement). A stationary profile scores at
/// discretization-error scale; the oracle never touches any ODE right-hand
/// side, so it can arbitrate between them.
pub fn variational_residual(
    problem: &AnnulusProblem,
    profile: &RadialProfile,
) -> Result<ResidualReport> {
    let nodes = profile.nodes();
    let h = profile.h_values();
    let hdot = profile.hdot_values();
    if nodes.len() < 5 {
        return Err(Error::InvalidParameter("residual oracle needs >= 5 nodes".into()));
    }
    if hdot.iter().any(|&k| !(k > 0.0)) {
        return Err(Error::InvalidParameter("residual oracle needs Hdot > 0".into()));
    }
    let n = problem.n;
    let phi = &problem.phi;

    let lam = |t: f64, hv: f64, kv: f64| lagrangian_density(n, phi, t, hv, kv);
    // Λ_Ḣ at every node, then differentiate the node series in t.
    let mut lam_k = Vec::with_capacity(nodes.len());
    for i in 0..nodes.len() {
        let dk = FD_REL_STEP * hdot[i].abs().max(1.0);
        lam_k.push((lam(nodes[i], h[i], hdot[i] + dk)? - lam(nodes[i], h[i], hdot[i] - dk)?) / (2.0 * dk));
    }

    // uniform spacing admits the 4th-order five-point stencils; otherwise
    // fall back to plain centered differences everywhere
    let spacing = nodes[1] - nodes[0];
    let uniform = nodes.len() >= 5
        && nodes.windows(2).all(|w| ((w[1] - w[0]) - spacing).abs() <= 1e-9 * spacing);

    let last = nodes.len() - 1;
    let d_dt = |lam_k: &[f64], i: usize| -> f64 {
        if !uniform {
            return (lam_k[i + 1] - lam_k[i - 1]) / (nodes[i + 1] - nodes[i - 1]);
        }
        let g = lam_k;
        if i == 1 {
            (-3.0 * g[0] - 10.0 * g[1] + 18.0 * g[2] - 6.0 * g[3] + g[4]) / (12.0 * spacing)
        } else if i == last - 1 {
            (3.0 * g[last] + 10.0 * g[last - 1] - 18.0 * g[last - 2] + 6.0 * g[last - 3]
                - g[last - 4])
                / (12.0 * spacing)
        } else {
            (g[i - 2] - 8.0 * g[i - 1] + 8.0 * g[i + 1] - g[i + 2]) / (12.0 * spacing)
        }
    };

    let mut out_nodes = Vec::with_capacity(nodes.len() - 2);
    let mut residuals = Vec::with_capacity(nodes.len() - 2);
    for i in 1..last {
        let dh = FD_REL_STEP * h[i].abs().max(1.0);
        let lam_h = (lam(nodes[i], h[i] + dh, hdot[i])? - lam(nodes[i], h[i] - dh, hdot[i])?) / (2.0 * dh);
        out_nodes.push(nodes[i]);
        residuals.push((lam_h - d_dt(&lam_k, i)).abs());
    }
    Ok(ResidualReport { nodes: out_nodes, residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::StoredEnergy;
    use approx::assert_relative_eq;

    fn quad(kappa: f64) -> StoredEnergy {
        StoredEnergy::quadratic(0.0, 0.0, kappa).unwrap()
    }

    #[test]
    fn conformal_state_is_stationary() {
        let phi = quad(1.3);
        for n in 2..=4 {
            for t in [1.0, 1.5, 2.7] {
                if n == 2 {
                    assert_eq!(el_rhs(ElRhsForm::PlanarDirect, n, &phi, t, t, 1.0).unwrap(), 0.0);
                }
                assert_eq!(el_rhs(ElRhsForm::GeneralM, n, &phi, t, t, 1.0).unwrap(), 0.0);
                assert_eq!(el_rhs_aux_route(n, &phi, t, t, 1.0).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn planar_direct_matches_quadratic_euler_equation() {
        // For the quadratic family the n = 2 equation is
        // Hddot = (H - t Hdot)(t + kappa^2 H Hdot) / (t^3 + kappa^2 t H^2)
        let kappa = 0.8;
        let phi = quad(kappa);
        let k2 = kappa * kappa;
        for (t, h, hdot) in [(1.0, 1.0, 0.5), (1.5, 1.2, 0.9), (2.0, 2.6, 1.7), (1.1, 0.8, 2.4)] {
            let lhs = el_rhs(ElRhsForm::PlanarDirect, 2, &phi, t, h, hdot).unwrap();
            let rhs = (h - t * hdot) * (t + k2 * h * hdot) / (t * t * t + k2 * t * h * h);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-15);
        }
    }

    #[test]
    fn planar_direct_frozen_value() {
        // (1 - 2)(1*2*2 + 2) / (1*1*2 + 2) = -6/4
        let phi = quad(1.0);
        let v = el_rhs(ElRhsForm::PlanarDirect, 2, &phi, 1.0, 1.0, 2.0).unwrap();
        assert_relative_eq!(v, -1.5, epsilon = 1e-15);
    }

    #[test]
    fn planar_direct_rejects_other_dimensions() {
        let phi = quad(1.0);
        assert!(el_rhs(ElRhsForm::PlanarDirect, 3, &phi, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn aux_route_equals_planar_direct_at_n2() {
        let phi = StoredEnergy::polynomial(&[0.5, 0.1, 1.0, 0.2]).unwrap();
        for (t, h, hdot) in [(1.0, 1.0, 0.5), (1.4, 1.9, 1.3), (2.0, 1.1, 0.2), (2.9, 3.4, 2.0)] {
            let a = el_rhs_aux_route(2, &phi, t, h, hdot).unwrap();
            let b = el_rhs(ElRhsForm::PlanarDirect, 2, &phi, t, h, hdot).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn general_m_differs_from_planar_direct_away_from_t1() {
        // the general-dimension variant disagrees at n = 2 except where t = 1
        let phi = quad(1.0);
        let at_t1 = |f: ElRhsForm| el_rhs(f, 2, &phi, 1.0, 1.0, 0.5).unwrap();
        assert_relative_eq!(at_t1(ElRhsForm::GeneralM), at_t1(ElRhsForm::PlanarDirect), max_relative = 1e-12);
        let a = el_rhs(ElRhsForm::GeneralM, 2, &phi, 1.8, 1.4, 0.6).unwrap();
        let b = el_rhs(ElRhsForm::PlanarDirect, 2, &phi, 1.8, 1.4, 0.6).unwrap();
        assert!((a - b).abs() > 1e-3 * b.abs());
    }

    #[test]
    fn aux_rhs_quadratic_planar_closed_form() {
        // n = 2, quadratic: v' = -(s^2 - v)/(s (1 + kappa^2 s^2))
        let kappa = 1.7;
        let phi = quad(kappa);
        for (s, v) in [(0.5, 0.3), (1.0, 1.0), (1.3, 2.0), (2.0, 0.1)] {
            let got = aux_rhs(2, &phi, s, v).unwrap();
            let want = -(s * s - v) / (s * (1.0 + kappa * kappa * s * s));
            assert_relative_eq!(got, want, max_relative = 1e-13);
        }
    }

    #[test]
    fn aux_rhs_vanishes_at_conformal_relation_n2() {
        for phi in [quad(0.5), quad(2.0)] {
            for s in [0.4, 1.0, 2.5] {
                assert_relative_eq!(aux_rhs(2, &phi, s, s * s).unwrap(), 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn aux_rhs_at_conformal_relation_general_n() {
        // at v = s^2 the remainder Y_n vanishes, leaving v' = -(n-2)v/s
        let phi = quad(1.0);
        let got = aux_rhs(3, &phi, 1.0, 1.0).unwrap();
        assert_relative_eq!(got, -1.0, epsilon = 1e-13);
        for n in [3u32, 4, 5] {
            for s in [0.7, 1.0, 1.9] {
                let v = s * s;
                let got = aux_rhs(n, &phi, s, v).unwrap();
                assert_relative_eq!(got, -(n as f64 - 2.0) * s, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn growth_bound_examples() {
        assert_relative_eq!(growth_bound(2, 1.0, 1.0), 2.0);
        assert_relative_eq!(growth_bound(3, 2.0, 0.0), 4.0);
        let phi = quad(1.0);
        let g = aux_rhs(2, &phi, 1.0, 4.0).unwrap();
        assert_relative_eq!(g.abs(), 1.5, epsilon = 1e-14);
        assert!(g.abs() <= growth_bound(2, 1.0, 4.0));
        assert_relative_eq!(growth_bound(2, 1.0, 4.0), 5.0);
    }

    #[test]
    fn hdot_from_aux_examples() {
        let lambda = 0.9;
        assert_relative_eq!(hdot_from_aux(2.0, 2.0, |_| lambda), lambda);
        assert_relative_eq!(hdot_from_aux(2.0, 1.0, |s| { assert_eq!(s, 0.5); 0.25 }), 0.5);
    }

    #[test]
    fn odd_reflection_below_zero() {
        let phi = quad(1.0);
        let g0 = aux_rhs(3, &phi, 1.2, 0.0).unwrap();
        let gp = aux_rhs(3, &phi, 1.2, 0.4).unwrap();
        let gm = aux_rhs(3, &phi, 1.2, -0.4).unwrap();
        assert_relative_eq!(gm, 2.0 * g0 - gp, epsilon = 1e-14);
    }

    fn uniform_profile(f: impl Fn(f64) -> (f64, f64), r: f64, count: usize) -> RadialProfile {
        let nodes: Vec<f64> = (0..count).map(|i| 1.0 + (r - 1.0) * i as f64 / (count - 1) as f64).collect();
        let (h, hdot): (Vec<f64>, Vec<f64>) = nodes.iter().map(|&t| f(t)).unzip();
        RadialProfile::from_samples(nodes, h, hdot).unwrap()
    }

    #[test]
    fn residual_vanishes_on_identity() {
        let phi = StoredEnergy::quadratic(0.5, 0.2, 1.1).unwrap();
        for n in [2u32, 3, 4] {
            let problem = AnnulusProblem::new(n, 2.0, None, phi.clone()).unwrap();
            let profile = uniform_profile(|t| (t, 1.0), 2.0, 101);
            let report = variational_residual(&problem, &profile).unwrap();
            assert!(report.sup() < 1e-6, "n = {n}: sup residual {}", report.sup());
        }
    }

    #[test]
    fn residual_flags_non_stationary_profile() {
        let phi = quad(1.0);
        let problem = AnnulusProblem::new(2, 2.0, None, phi).unwrap();
        let profile = uniform_profile(|t| (t * t, 2.0 * t), 2.0, 101);
        let report = variational_residual(&problem, &profile).unwrap();
        let min = report.residuals.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min > 1e-2, "min residual {min}");
    }

    #[test]
    fn residual_needs_enough_nodes() {
        let phi = quad(1.0);
        let problem = AnnulusProblem::new(2, 2.0, None, phi).unwrap();
        let profile = uniform_profile(|t| (t, 1.0), 2.0, 4);
        assert!(variational_residual(&problem, &profile).is_err());
    }
}
