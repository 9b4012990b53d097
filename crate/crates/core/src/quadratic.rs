//! Closed-form machinery for the planar quadratic family
//! Φ_κ(d) = a + b·d + κ²d² at n = 2.
//!
//! Only Φ̈ = 2κ² enters the Euler–Lagrange equation, so everything here is
//! parameterized by κ alone. The auxiliary equation
//! v̇ = −(s² − v)/(s(1 + κ²s²)) integrates in closed form,
//!
//!   v(s) = s(c₀ − asinh(κs)) / (κ√(1+κ²s²)),
//!
//! and the profile is implicit in ψ(H/t) = Ψ(t), where
//! ψ(x) = κx√(1+κ²x²) + asinh(κx) and Ψ(t) = c₀ + (ψ(1) − c₀)/t². The
//! boundary conditions H(1) = 1, H(R) = R* pin
//! c₀ = (R²ψ(R*/R) − ψ(1))/(R² − 1); an increasing diffeomorphic solution
//! exists iff c₀ ≥ asinh(κ), which is the admissibility inequality below
//! and degenerates to the classical Nitsche bound (1+R²)/(2R) as κ → 0.

use crate::error::{Error, Result};
use crate::kinematics::RadialProfile;
use crate::roots::brent;

/// ψ(x) = κx√(1+κ²x²) + asinh(κx); strictly increasing on [0, ∞).
pub fn psi(kappa: f64, x: f64) -> f64 {
    let kx = kappa * x;
    kx * (1.0 + kx * kx).sqrt() + kx.asinh()
}

/// ψ′(x) = 2κ√(1+κ²x²).
pub fn psi_prime(kappa: f64, x: f64) -> f64 {
    let kx = kappa * x;
    2.0 * kappa * (1.0 + kx * kx).sqrt()
}

/// Inverse of ψ on [0, ∞): safeguarded Newton with bisection fallback,
/// accurate to ψ(ψ⁻¹(y)) = y within 1e−12·max(1, y).
pub fn psi_inv(kappa: f64, y: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidParameter(format!("psi_inv needs kappa > 0, got {kappa}")));
    }
    if y < 0.0 {
        return Err(Error::InvalidParameter(format!("psi_inv needs y >= 0, got {y}")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let tol = 1e-12 * y.abs().max(1.0);
    // bracket by doubling
    let mut hi = (y / (2.0 * kappa)).max(1e-8);
    while psi(kappa, hi) < y {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NoConvergence(format!("psi_inv bracket overflow for y = {y}")));
        }
    }
    let mut lo = 0.0;
    let mut x = 0.5 * hi;
    for _ in 0..200 {
        let f = psi(kappa, x) - y;
        if f.abs() <= tol {
            return Ok(x);
        }
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let step = f / psi_prime(kappa, x);
        let newton = x - step;
        x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Err(Error::NoConvergence(format!("psi_inv did not converge for y = {y}")))
}

/// Closed-form auxiliary solution with v(1) = λ:
/// v(s) = s(c₀ − asinh(κs))/(κ√(1+κ²s²)), c₀ = asinh(κ) + λκ√(1+κ²).
pub fn aux_solution(kappa: f64, lambda: f64, s: f64) -> f64 {
    let c0 = asinh_kappa_c0(kappa, lambda);
    aux_solution_c0(kappa, c0, s)
}

fn asinh_kappa_c0(kappa: f64, lambda: f64) -> f64 {
    kappa.asinh() + lambda * kappa * (1.0 + kappa * kappa).sqrt()
}

fn aux_solution_c0(kappa: f64, c0: f64, s: f64) -> f64 {
    let ks = kappa * s;
    s * (c0 - ks.asinh()) / (kappa * (1.0 + ks * ks).sqrt())
}

/// The initial slope implied by a constant c₀: λ = (c₀ − asinh κ)/(κ√(1+κ²)).
pub fn lambda_from_c0(kappa: f64, c0: f64) -> f64 {
    (c0 - kappa.asinh()) / (kappa * (1.0 + kappa * kappa).sqrt())
}

/// Analytic s-derivative of the closed-form auxiliary solution:
/// v̇(s) = (c₀ − asinh(κs))/(κ(1+κ²s²)^{3/2}) − s/(1+κ²s²).
pub fn aux_solution_derivative(kappa: f64, lambda: f64, s: f64) -> f64 {
    let c0 = asinh_kappa_c0(kappa, lambda);
    let q2 = 1.0 + kappa * s * kappa * s;
    (c0 - (kappa * s).asinh()) / (kappa * q2 * q2.sqrt()) - s / q2
}

/// A planar quadratic boundary-value case.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticCase {
    pub kappa: f64,
    pub r_outer: f64,
    pub r_star: Option<f64>,
}

impl QuadraticCase {
    pub fn new(kappa: f64, r_outer: f64, r_star: Option<f64>) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::InvalidParameter(format!("kappa must be > 0, got {kappa}")));
        }
        if !(r_outer > 1.0) {
            return Err(Error::InvalidParameter(format!("R must be > 1, got {r_outer}")));
        }
        if let Some(rs) = r_star {
            if !(rs > 1.0) {
                return Err(Error::InvalidParameter(format!("R* must be > 1, got {rs}")));
            }
        }
        Ok(Self { kappa, r_outer, r_star })
    }

    fn r_star_required(&self) -> Result<f64> {
        self.r_star.ok_or(Error::MissingTarget)
    }

    /// Target-to-source outer ratio R*/R.
    pub fn a_ratio(&self) -> Result<f64> {
        Ok(self.r_star_required()? / self.r_outer)
    }

    /// Integration constant pinned by H(1) = 1 and H(R) = R*:
    /// c₀ = (R²·ψ(R*/R) − ψ(1))/(R² − 1).
    pub fn c0(&self) -> Result<f64> {
        let r = self.r_outer;
        let a = self.a_ratio()?;
        Ok((r * r * psi(self.kappa, a) - psi(self.kappa, 1.0)) / (r * r - 1.0))
    }

    /// Initial slope λ = Ḣ(1) implied by the boundary data.
    pub fn lambda(&self) -> Result<f64> {
        Ok(lambda_from_c0(self.kappa, self.c0()?))
    }

    /// True when the case admits an increasing diffeomorphic solution.
    pub fn admissible(&self) -> Result<bool> {
        Ok(admissible(self.kappa, self.r_outer, self.r_star_required()?))
    }
}

/// Ψ(t) = c₀ + (ψ(1) − c₀)/t², the implicit right side of ψ(H(t)/t) = Ψ(t).
///
/// Both boundary conditions are built in: Ψ(1) = ψ(1) and Ψ(R) = ψ(R*/R).
pub fn big_psi(case: &QuadraticCase, t: f64) -> Result<f64> {
    if !(1.0 - 1e-12 <= t && t <= case.r_outer + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "big_psi needs 1 <= t <= R = {}, got {t}",
            case.r_outer
        )));
    }
    let c0 = case.c0()?;
    Ok(c0 + (psi(case.kappa, 1.0) - c0) / (t * t))
}

/// Closed-form diffeomorphic profile H(t) = t·ψ⁻¹(Ψ(t)) sampled at `nodes`.
///
/// Errors on inadmissible boundary data. Ḣ comes from the auxiliary
/// solution: Ḣ(t) = (c₀ − asinh(κs))/(κ√(1+κ²s²)) at s = H/t.
pub fn closed_form_profile(case: &QuadraticCase, nodes: &[f64]) -> Result<RadialProfile> {
    if !case.admissible()? {
        return Err(Error::Inadmissible {
            kappa: case.kappa,
            r: case.r_outer,
            r_star: case.r_star_required()?,
        });
    }
    let c0 = case.c0()?;
    let mut h = Vec::with_capacity(nodes.len());
    let mut hdot = Vec::with_capacity(nodes.len());
    for &t in nodes {
        let s = psi_inv(case.kappa, big_psi(case, t)?)?;
        h.push(t * s);
        let v = aux_solution_c0(case.kappa, c0, s);
        hdot.push(v / s);
    }
    RadialProfile::from_samples(nodes.to_vec(), h, hdot)
}

/// Margin of the admissibility inequality,
/// (R*/R)√(1+κ²R*²/R²) − √(1+κ²)/R² − (1/κ)(asinh κ − asinh(κR*/R));
/// non-negative iff an increasing diffeomorphic solution exists.
pub fn admissibility_margin(kappa: f64, r_outer: f64, r_star: f64) -> f64 {
    let a = r_star / r_outer;
    let ka = kappa * a;
    a * (1.0 + ka * ka).sqrt() - (1.0 + kappa * kappa).sqrt() / (r_outer * r_outer)
        - (kappa.asinh() - ka.asinh()) / kappa
}

/// Whether the data (κ, R, R*) admits an increasing diffeomorphic solution.
pub fn admissible(kappa: f64, r_outer: f64, r_star: f64) -> bool {
    admissibility_margin(kappa, r_outer, r_star) >= 0.0
}

/// Critical outer target radius R∘(R, κ): the unique root in (1, R) of the
/// admissibility margin. Decreasing in κ, increasing in R; tends to the
/// classical Nitsche bound (1+R²)/(2R) as κ → 0 and to 1 as κ → ∞.
pub fn nitsche_bound(kappa: f64, r_outer: f64) -> Result<f64> {
    if !(kappa > 0.0) || !(r_outer > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "nitsche_bound needs kappa > 0 and R > 1, got kappa = {kappa}, R = {r_outer}"
        )));
    }
    // margin(1) < 0 < margin(R): the bracket [1, R] always works
    brent(
        |r_star| Ok(admissibility_margin(kappa, r_outer, r_star)),
        1.0,
        r_outer,
        1e-14,
        200,
    )
}

/// κ → 0 limit of the critical radius: the classical bound (1+R²)/(2R).
pub fn nitsche_limit_small_kappa(r_outer: f64) -> f64 {
    (1.0 + r_outer * r_outer) / (2.0 * r_outer)
}
