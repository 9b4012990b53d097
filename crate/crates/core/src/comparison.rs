//! Comparison theorems made numerical: pointwise ordering of planar
//! profiles under Φ̈-ordering of the materials, and the sup-Φ̈ necessary
//! condition for admissibility.
//!
//! A stiffer volumetric response never produces a larger profile: if
//! Φ̈₁ ≥ Φ̈₂ pointwise and 0 < Ḣ₁(1) ≤ Ḣ₂(1), the planar profiles satisfy
//! H₁(t) ≤ H₂(t) on [1, R]. Consequently a material with sup Φ̈ = 2κ² can
//! only reach targets the κ-quadratic material reaches.

use crate::error::{Error, Result};
use crate::material::{default_validation_grid, validate_energy, StoredEnergy};
use crate::quadratic;
use crate::solver::{integrate_profile, SolverConfig};

/// Non-strict orderings are checked up to this slack, which absorbs
/// integrator error at the default tolerances.
pub const ORDERING_TOL: f64 = 1e-8;

/// Nodewise record of an ordering check between two planar profiles.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub grid: Vec<f64>,
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    /// max over the grid of H₁ − H₂; ≤ 0 means the ordering holds exactly.
    pub max_violation: f64,
}

impl ComparisonReport {
    pub fn pass(&self) -> bool {
        self.max_violation <= ORDERING_TOL
    }
}

/// Integrate both planar profiles and check H₁ ≤ H₂ nodewise.
///
/// Hypotheses are verified first: both energies pass validation, Φ̈₁ ≥ Φ̈₂
/// on the default grid, and 0 < λ₁ ≤ λ₂.
pub fn ordering_check(
    phi1: &StoredEnergy,
    phi2: &StoredEnergy,
    lambda1: f64,
    lambda2: f64,
    r_outer: f64,
    config: &SolverConfig,
) -> Result<ComparisonReport> {
    let grid = default_validation_grid();
    for (label, phi) in [("phi1", phi1), ("phi2", phi2)] {
        let report = validate_energy(phi, &grid)?;
        if !report.passed() {
            return Err(Error::InvalidParameter(format!(
                "{label} fails positivity/convexity validation at {} grid points",
                report.violations.len()
            )));
        }
    }
    if let Some(d) = grid.iter().find(|&&d| phi1.ddphi(d) < phi2.ddphi(d) - 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "ordering hypothesis fails: phi1''({d}) = {} < phi2''({d}) = {}",
            phi1.ddphi(*d),
            phi2.ddphi(*d)
        )));
    }
    if !(0.0 < lambda1 && lambda1 <= lambda2) {
        return Err(Error::InvalidParameter(format!(
            "ordering needs 0 < lambda1 <= lambda2, got {lambda1}, {lambda2}"
        )));
    }

    let p1 = integrate_profile(2, phi1, lambda1, r_outer, config)?;
    let p2 = integrate_profile(2, phi2, lambda2, r_outer, config)?;
    let count = 201;
    let grid: Vec<f64> =
        (0..count).map(|i| 1.0 + (r_outer - 1.0) * i as f64 / (count - 1) as f64).collect();
    let mut h1 = Vec::with_capacity(count);
    let mut h2 = Vec::with_capacity(count);
    let mut max_violation = f64::NEG_INFINITY;
    for &t in &grid {
        let a = p1.eval(t).0;
        let b = p2.eval(t).0;
        max_violation = max_violation.max(a - b);
        h1.push(a);
        h2.push(b);
    }
    Ok(ComparisonReport { grid, h1, h2, max_violation })
}

/// Outcome of the sup-Φ̈ necessary condition.
#[derive(Debug, Clone, Copy)]
pub struct SupKappaVerdict {
    /// κ = √(sup Φ̈ / 2) over the grid.
    pub kappa: f64,
    /// Whether the admissibility inequality holds for (κ, R, R*).
    pub holds: bool,
}

/// With 2κ² = sup Φ̈, an increasing diffeomorphic solution onto (1, R*)
/// forces admissibility of (κ, R, R*); this evaluates that necessary
/// condition. Errors when Φ̈ is not finite somewhere on the grid.
pub fn sup_kappa_admissibility(
    phi: &StoredEnergy,
    r_outer: f64,
    r_star: f64,
    grid: &[f64],
) -> Result<SupKappaVerdict> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("sup-kappa grid is empty".into()));
    }
    let mut sup: f64 = 0.0;
    for &d in grid {
        let c = phi.ddphi(d);
        if !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "phi'' unbounded on the grid: phi''({d}) = {c}"
            )));
        }
        sup = sup.max(c);
    }
    if !(sup > 0.0) {
        return Err(Error::InvalidParameter("sup phi'' must be positive".into()));
    }
    let kappa = (sup / 2.0).sqrt();
    Ok(SupKappaVerdict { kappa, holds: quadratic::admissible(kappa, r_outer, r_star) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn quad(kappa: f64) -> StoredEnergy {
        StoredEnergy::quadratic(0.0, 0.0, kappa).unwrap()
    }

    #[test]
    fn reflexive_ordering_has_zero_violation() {
        let config = SolverConfig::default();
        let r = ordering_check(&quad(1.0), &quad(1.0), 0.5, 0.5, 2.0, &config).unwrap();
        assert!(r.pass());
        assert!(r.max_violation.abs() <= 1e-12, "violation {}", r.max_violation);
    }

    #[test]
    fn stiffer_material_stays_below() {
        let config = SolverConfig::default();
        let r = ordering_check(&quad(2.0), &quad(1.0), 0.5, 0.5, 2.0, &config).unwrap();
        assert!(r.pass());
        // strict somewhere in the interior
        let spread = r.h2.iter().zip(&r.h1).map(|(b, a)| b - a).fold(0.0_f64, f64::max);
        assert!(spread > 1e-4, "profiles did not separate: {spread}");
    }

    #[test]
    fn larger_slope_dominates() {
        let config = SolverConfig::default();
        let r = ordering_check(&quad(1.0), &quad(1.0), 0.5, 0.7, 2.0, &config).unwrap();
        assert!(r.pass());
    }

    #[test]
    fn hypothesis_violations_are_rejected() {
        let config = SolverConfig::default();
        // phi1'' < phi2''
        assert!(ordering_check(&quad(1.0), &quad(2.0), 0.5, 0.5, 2.0, &config).is_err());
        // lambda1 > lambda2
        assert!(ordering_check(&quad(2.0), &quad(1.0), 0.7, 0.5, 2.0, &config).is_err());
        // lambda1 = 0
        assert!(ordering_check(&quad(2.0), &quad(1.0), 0.0, 0.5, 2.0, &config).is_err());
    }

    #[test]
    fn transitive_on_kappa_triples() {
        let config = SolverConfig::default();
        let (k1, k2, k3) = (3.0, 1.5, 0.7);
        let r12 = ordering_check(&quad(k1), &quad(k2), 0.8, 0.8, 2.0, &config).unwrap();
        let r23 = ordering_check(&quad(k2), &quad(k3), 0.8, 0.8, 2.0, &config).unwrap();
        let r13 = ordering_check(&quad(k1), &quad(k3), 0.8, 0.8, 2.0, &config).unwrap();
        assert!(r12.pass() && r23.pass() && r13.pass());
    }

    #[test]
    fn sup_kappa_reduces_to_quadratic() {
        let grid = default_validation_grid();
        let v = sup_kappa_admissibility(&quad(1.0), 2.0, 3.0, &grid).unwrap();
        assert_relative_eq!(v.kappa, 1.0, epsilon = 1e-12);
        assert!(v.holds);

        // target >= source is always admissible
        let phi = StoredEnergy::polynomial(&[0.5, 0.1, 1.0]).unwrap();
        let v = sup_kappa_admissibility(&phi, 2.0, 3.0, &grid).unwrap();
        assert_relative_eq!(v.kappa, 1.0, epsilon = 1e-12);
        assert!(v.holds);
    }

    #[test]
    fn sup_kappa_detects_thin_targets() {
        let grid = default_validation_grid();
        let v = sup_kappa_admissibility(&quad(5.0), 2.0, 1.01, &grid).unwrap();
        assert_relative_eq!(v.kappa, 5.0, epsilon = 1e-12);
        assert_eq!(v.holds, quadratic::admissible(5.0, 2.0, 1.01));
    }

    #[test]
    fn nitsche_bound_orders_with_kappa() {
        // larger curvature bound never shrinks the admissible set
        for r in [1.5, 2.0, 3.0] {
            let b1 = quadratic::nitsche_bound(2.0, r).unwrap();
            let b2 = quadratic::nitsche_bound(1.0, r).unwrap();
            assert!(b1 <= b2);
        }
    }
}
