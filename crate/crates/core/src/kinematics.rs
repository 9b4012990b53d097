//! Pointwise geometry of radial maps h(x) = H(|x|)·x/|x|.
//!
//! For a radial profile H on [1, R] the differential has singular values
//! Ḣ (radial) and H/t with multiplicity n−1 (tangential), so
//! ‖Dh‖² = (n−1)H²/t² + Ḣ² and det Dh = Ḣ·(H/t)^{n−1}. The energy density
//! per unit sphere measure is Λ = t^{n−1}(‖Dh‖ⁿ + Φ(det Dh)).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::material::StoredEnergy;
use crate::ode::{eval_dense, DenseStep};
use crate::solver::SolverConfig;

/// Squared Frobenius norm of Dh at radius t: (n−1)H²/t² + Ḣ².
pub fn frobenius_sq(n: u32, t: f64, h: f64, hdot: f64) -> f64 {
    debug_assert!(t > 0.0);
    let ratio = h / t;
    (n - 1) as f64 * ratio * ratio + hdot * hdot
}

/// Jacobian determinant of the radial map: Ḣ·(H/t)^{n−1}.
pub fn jacobian(n: u32, t: f64, h: f64, hdot: f64) -> f64 {
    debug_assert!(t > 0.0);
    hdot * (h / t).powi(n as i32 - 1)
}

/// Elasticity function μ_H(t) = tḢ/H, the regime classifier.
pub fn elasticity(t: f64, h: f64, hdot: f64) -> f64 {
    t * hdot / h
}

/// Surface measure of the unit (n−1)-sphere, ω_{n−1} = 2π^{n/2}/Γ(n/2).
pub fn sphere_measure(n: u32) -> f64 {
    let pi = std::f64::consts::PI;
    // Γ(n/2) by upward recursion from Γ(1) or Γ(1/2)
    let even = n.is_multiple_of(2);
    let mut x = if even { 1.0 } else { 0.5 };
    let mut gamma = if even { 1.0 } else { pi.sqrt() };
    while x < n as f64 / 2.0 - 0.25 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * pi.powf(n as f64 / 2.0) / gamma
}

/// Neohookean energy density per unit sphere measure,
/// Λ(t, H, Ḣ) = t^{n−1}(‖Dh‖ⁿ + Φ(J)).
pub fn lagrangian_density(n: u32, phi: &StoredEnergy, t: f64, h: f64, hdot: f64) -> Result<f64> {
    if !(t > 0.0) || !(h > 0.0) {
        return Err(Error::DegenerateState { t });
    }
    let j = jacobian(n, t, h, hdot);
    let volumetric = phi.phi(j);
    if !volumetric.is_finite() {
        return Err(Error::JacobianDomain { t, jacobian: j });
    }
    let distortion = frobenius_sq(n, t, h, hdot).powf(n as f64 / 2.0);
    Ok(t.powi(n as i32 - 1) * (distortion + volumetric))
}

/// Analytic partials (Λ_H, Λ_Ḣ) of the density, used by the discrete
/// minimizer's gradient. Independent of the finite-difference residual path.
pub fn lagrangian_partials(
    n: u32,
    phi: &StoredEnergy,
    t: f64,
    h: f64,
    hdot: f64,
) -> Result<(f64, f64)> {
    if !(t > 0.0) || !(h > 0.0) {
        return Err(Error::DegenerateState { t });
    }
    let nf = n as f64;
    let a = nf - 1.0;
    let w = frobenius_sq(n, t, h, hdot);
    let p = w.powf(nf / 2.0 - 1.0);
    let j = jacobian(n, t, h, hdot);
    let dphi = phi.dphi(j);
    if !dphi.is_finite() {
        return Err(Error::JacobianDomain { t, jacobian: j });
    }
    // dJ/dH = (n−1)·Ḣ·H^{n−2}/t^{n−1}, dJ/dḢ = (H/t)^{n−1}
    let tpow = t.powi(n as i32 - 1);
    let dj_dh = a * hdot * h.powi(n as i32 - 2) / tpow;
    let dj_dk = (h / t).powi(n as i32 - 1);
    let lam_h = tpow * (nf * p * a * h / (t * t) + dphi * dj_dh);
    let lam_k = tpow * (nf * p * hdot + dphi * dj_dk);
    Ok((lam_h, lam_k))
}

/// Normalize raw annulus radii (r, R_raw) → (r*, R*_raw) to inner radius 1:
/// returns (R_raw/r, R*_raw/r*).
pub fn normalize(r: f64, r_raw: f64, r_star: f64, r_star_raw: f64) -> Result<(f64, f64)> {
    if !(0.0 < r && r < r_raw) || !(0.0 < r_star && r_star < r_star_raw) {
        return Err(Error::InvalidParameter(format!(
            "annulus radii must satisfy 0 < inner < outer, got ({r}, {r_raw}) and ({r_star}, {r_star_raw})"
        )));
    }
    Ok((r_raw / r, r_star_raw / r_star))
}

/// Deformation regime of a profile, from the elasticity function μ_H = tḢ/H.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// μ < 1 throughout: H/t strictly decreasing.
    Inelastic,
    /// μ ≡ 1: H(t) = λt.
    Conformal,
    /// μ > 1 throughout: H/t strictly increasing.
    Elastic,
    Mixed,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Inelastic => "inelastic",
            Regime::Conformal => "conformal",
            Regime::Elastic => "elastic",
            Regime::Mixed => "mixed",
        }
    }
}

/// Tolerance on |μ − 1| below which a node counts as conformal.
pub const CONFORMAL_TOL: f64 = 1e-9;

/// A sampled radial profile t ↦ (H, Ḣ) with its regime label.
///
/// Profiles produced by the integrator carry their dense Hermite segments,
/// so `eval` reproduces the integrated trajectory between nodes; profiles
/// built from bare samples fall back to Hermite interpolation of the nodes.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    nodes: Vec<f64>,
    h: Vec<f64>,
    hdot: Vec<f64>,
    regime: Regime,
    dense: Option<Arc<Vec<DenseStep<2>>>>,
}

impl RadialProfile {
    /// Build from bare samples. Nodes must be strictly increasing.
    pub fn from_samples(nodes: Vec<f64>, h: Vec<f64>, hdot: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != h.len() || nodes.len() != hdot.len() {
            return Err(Error::InvalidParameter("profile needs >= 2 aligned samples".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("profile nodes must be strictly increasing".into()));
        }
        let regime = classify_nodes(&nodes, &h, &hdot);
        Ok(Self { nodes, h, hdot, regime, dense: None })
    }

    /// Build by sampling a dense integrator output at the given nodes.
    pub fn from_dense(segments: Arc<Vec<DenseStep<2>>>, nodes: Vec<f64>) -> Result<Self> {
        let mut h = Vec::with_capacity(nodes.len());
        let mut hdot = Vec::with_capacity(nodes.len());
        for &t in &nodes {
            let y = eval_dense(&segments, t).ok_or_else(|| {
                Error::InvalidParameter(format!("node t = {t} outside the integrated range"))
            })?;
            h.push(y[0]);
            hdot.push(y[1]);
        }
        let mut profile = Self::from_samples(nodes, h, hdot)?;
        profile.dense = Some(segments);
        Ok(profile)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn h_values(&self) -> &[f64] {
        &self.h
    }

    pub fn hdot_values(&self) -> &[f64] {
        &self.hdot
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Inner and outer endpoints as (t, H).
    pub fn inner(&self) -> (f64, f64) {
        (self.nodes[0], self.h[0])
    }

    pub fn outer(&self) -> (f64, f64) {
        (*self.nodes.last().unwrap(), *self.h.last().unwrap())
    }

    /// Evaluate (H, Ḣ) anywhere in the covered interval.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        if let Some(dense) = &self.dense {
            if let Some(y) = eval_dense(dense, t) {
                return (y[0], y[1]);
            }
        }
        self.eval_from_nodes(t)
    }

    /// Hermite interpolation of the node samples, using Ḣ as slope data.
    fn eval_from_nodes(&self, t: f64) -> (f64, f64) {
        let n = self.nodes.len();
        let t = t.clamp(self.nodes[0], self.nodes[n - 1]);
        let idx = self.nodes.partition_point(|&x| x < t).clamp(1, n - 1);
        let (t0, t1) = (self.nodes[idx - 1], self.nodes[idx]);
        let dt = t1 - t0;
        let s = (t - t0) / dt;
        let (y0, y1) = (self.h[idx - 1], self.h[idx]);
        let (m0, m1) = (self.hdot[idx - 1], self.hdot[idx]);
        let s2 = s * s;
        let s3 = s2 * s;
        let h = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * dt * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * dt * m1;
        let hdot = ((6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * dt * m0
            + (6.0 * s - 6.0 * s2) * y1
            + (3.0 * s2 - 2.0 * s) * dt * m1)
            / dt;
        (h, hdot)
    }

    /// Resample onto new nodes, reusing the dense interpolant when present.
    pub fn resample(&self, nodes: &[f64]) -> Result<Self> {
        if let Some(dense) = &self.dense {
            return Self::from_dense(Arc::clone(dense), nodes.to_vec());
        }
        let mut h = Vec::with_capacity(nodes.len());
        let mut hdot = Vec::with_capacity(nodes.len());
        for &t in nodes {
            let (hv, kv) = self.eval_from_nodes(t);
            h.push(hv);
            hdot.push(kv);
        }
        Self::from_samples(nodes.to_vec(), h, hdot)
    }
}

fn classify_nodes(nodes: &[f64], h: &[f64], hdot: &[f64]) -> Regime {
    let interior = 1..nodes.len().saturating_sub(1);
    let mut lo = 0usize;
    let mut hi = 0usize;
    for i in interior {
        let mu = elasticity(nodes[i], h[i], hdot[i]);
        if (mu - 1.0).abs() <= CONFORMAL_TOL {
            continue;
        } else if mu < 1.0 {
            lo += 1;
        } else {
            hi += 1;
        }
    }
    match (lo, hi) {
        (0, 0) => Regime::Conformal,
        (_, 0) if lo > 0 => Regime::Inelastic,
        (0, _) => Regime::Elastic,
        _ => Regime::Mixed,
    }
}

/// Classify a profile by the elasticity function at its interior nodes.
pub fn classify_regime(profile: &RadialProfile) -> Regime {
    classify_nodes(profile.nodes(), profile.h_values(), profile.hdot_values())
}

/// A normalized annulus problem: map A(1, R) onto A(1, R*) in dimension n.
#[derive(Debug, Clone)]
pub struct AnnulusProblem {
    pub n: u32,
    pub r_outer: f64,
    pub r_star: Option<f64>,
    pub phi: StoredEnergy,
    pub config: SolverConfig,
}

impl AnnulusProblem {
    pub fn new(n: u32, r_outer: f64, r_star: Option<f64>, phi: StoredEnergy) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("dimension must be >= 2, got {n}")));
        }
        if !(r_outer > 1.0) || !r_outer.is_finite() {
            return Err(Error::InvalidParameter(format!("R must be > 1, got {r_outer}")));
        }
        if let Some(rs) = r_star {
            if !(rs > 1.0) || !rs.is_finite() {
                return Err(Error::InvalidParameter(format!("R* must be > 1, got {rs}")));
            }
        }
        Ok(Self { n, r_outer, r_star, phi, config: SolverConfig::default() })
    }

    pub fn with_config(mut self, config: SolverConfig) -> Self {
        self.config = config;
        self
    }

    /// Energy density Λ at a state of this problem.
    pub fn density(&self, t: f64, h: f64, hdot: f64) -> Result<f64> {
        lagrangian_density(self.n, &self.phi, t, h, hdot)
    }
}
