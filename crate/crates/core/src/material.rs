//! Stored-energy functions Φ and the hypotheses the solver needs from them.
//!
//! A [`StoredEnergy`] bundles evaluators for Φ(d), Φ̇(d), Φ̈(d) and
//! χ(d) = 1/Φ̈(d), where d is the Jacobian determinant of the deformation.
//! Two families are built in: the quadratic family Φ(d) = a + b·d + κ²d²
//! and general polynomials with analytic derivatives. Arbitrary energies can
//! be supplied as an evaluator bundle.
//!
//! The solver requires Φ positive and convex, with χ extending continuously
//! to d = 0. The value α = χ(0) controls whether a Nitsche-type obstruction
//! exists at all: α = 0 (flagging Φ̈(0) = +∞) removes it.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum EnergyForm {
    Quadratic { a: f64, b: f64, kappa: f64 },
    Polynomial { coeffs: Vec<f64> },
    Custom { phi: Evaluator, dphi: Evaluator, ddphi: Evaluator, alpha: f64, label: String },
}

/// Immutable evaluation bundle for a stored-energy function.
///
/// Values are cheap to clone and safe to share across parallel workers.
#[derive(Clone)]
pub struct StoredEnergy {
    form: EnergyForm,
    alpha: f64,
}

impl fmt::Debug for StoredEnergy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            EnergyForm::Quadratic { a, b, kappa } => {
                write!(f, "StoredEnergy::Quadratic {{ a: {a}, b: {b}, kappa: {kappa} }}")
            }
            EnergyForm::Polynomial { coeffs } => {
                write!(f, "StoredEnergy::Polynomial {{ coeffs: {coeffs:?} }}")
            }
            EnergyForm::Custom { label, alpha, .. } => {
                write!(f, "StoredEnergy::Custom {{ label: {label:?}, alpha: {alpha} }}")
            }
        }
    }
}

/// Default validation grid: 256 log-spaced points on [1e-6, 1e6].
pub fn default_validation_grid() -> Vec<f64> {
    log_spaced_grid(1e-6, 1e6, 256)
}

/// Log-spaced grid between two positive bounds, inclusive.
pub fn log_spaced_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (llo + (lhi - llo) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

impl StoredEnergy {
    /// Quadratic family Φ(d) = a + b·d + κ²·d².
    ///
    /// Requires κ > 0 and Φ > 0 on the default validation grid.
    pub fn quadratic(a: f64, b: f64, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "kappa must be positive and finite, got {kappa}"
            )));
        }
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter("quadratic coefficients must be finite".into()));
        }
        let energy = Self {
            form: EnergyForm::Quadratic { a, b, kappa },
            alpha: 1.0 / (2.0 * kappa * kappa),
        };
        energy.reject_if_nonpositive()?;
        Ok(energy)
    }

    /// Polynomial Φ(d) = Σ cᵢ·dⁱ with analytic derivatives.
    ///
    /// Requires Φ̈(0) = 2c₂ > 0 so that χ extends continuously to d = 0,
    /// plus positivity and convexity on the default validation grid.
    pub fn polynomial(coeffs: &[f64]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("polynomial needs at least one coefficient".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("polynomial coefficients must be finite".into()));
        }
        let ddphi0 = if coeffs.len() > 2 { 2.0 * coeffs[2] } else { 0.0 };
        if !(ddphi0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "polynomial must have positive curvature at d = 0 (phi''(0) = {ddphi0})"
            )));
        }
        let energy = Self {
            form: EnergyForm::Polynomial { coeffs: coeffs.to_vec() },
            alpha: 1.0 / ddphi0,
        };
        energy.reject_if_nonpositive()?;
        for &d in &default_validation_grid() {
            let c = energy.ddphi(d);
            if c < 0.0 {
                return Err(Error::EnergyNotConvex { d, value: c });
            }
        }
        Ok(energy)
    }

    /// Arbitrary stored energy from an evaluator bundle.
    ///
    /// `alpha` is χ(0) = 1/Φ̈(0); pass 0.0 to flag Φ̈(0) = +∞. The caller is
    /// responsible for the analytic hypotheses; [`validate_energy`] checks
    /// them pointwise on a grid.
    pub fn from_evaluators(
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dphi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        ddphi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        alpha: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
        }
        Ok(Self {
            form: EnergyForm::Custom {
                phi: Arc::new(phi),
                dphi: Arc::new(dphi),
                ddphi: Arc::new(ddphi),
                alpha,
                label: label.into(),
            },
            alpha,
        })
    }

    fn reject_if_nonpositive(&self) -> Result<()> {
        for &d in &default_validation_grid() {
            let p = self.phi(d);
            if !(p > 0.0) {
                return Err(Error::EnergyNotPositive { d, value: p });
            }
        }
        Ok(())
    }

    /// Φ(d).
    pub fn phi(&self, d: f64) -> f64 {
        match &self.form {
            EnergyForm::Quadratic { a, b, kappa } => a + b * d + kappa * kappa * d * d,
            EnergyForm::Polynomial { coeffs } => horner(coeffs, d),
            EnergyForm::Custom { phi, .. } => phi(d),
        }
    }

    /// Φ̇(d).
    pub fn dphi(&self, d: f64) -> f64 {
        match &self.form {
            EnergyForm::Quadratic { b, kappa, .. } => b + 2.0 * kappa * kappa * d,
            EnergyForm::Polynomial { coeffs } => horner_derivative(coeffs, d, 1),
            EnergyForm::Custom { dphi, .. } => dphi(d),
        }
    }

    /// Φ̈(d).
    pub fn ddphi(&self, d: f64) -> f64 {
        match &self.form {
            EnergyForm::Quadratic { kappa, .. } => 2.0 * kappa * kappa,
            EnergyForm::Polynomial { coeffs } => horner_derivative(coeffs, d, 2),
            EnergyForm::Custom { ddphi, .. } => ddphi(d),
        }
    }

    /// χ(d) = 1/Φ̈(d).
    pub fn chi(&self, d: f64) -> f64 {
        1.0 / self.ddphi(d)
    }

    /// α = χ(0). Zero flags Φ̈(0) = +∞ (no Nitsche obstruction).
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// True when α = 0, i.e. Φ̈(0) was flagged as +∞.
    pub fn alpha_is_zero(&self) -> bool {
        self.alpha == 0.0
    }

    /// For the quadratic family, its κ.
    pub fn quadratic_kappa(&self) -> Option<f64> {
        match &self.form {
            EnergyForm::Quadratic { kappa, .. } => Some(*kappa),
            _ => None,
        }
    }

    /// Short display form used in CSV/JSON outputs.
    pub fn spec_string(&self) -> String {
        match &self.form {
            EnergyForm::Quadratic { a, b, kappa } => format!("quad:a={a},b={b},kappa={kappa}"),
            EnergyForm::Polynomial { coeffs } => {
                let parts: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                format!("poly:{}", parts.join(","))
            }
            EnergyForm::Custom { label, .. } => format!("custom:{label}"),
        }
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// k-th derivative of Σ cᵢ xⁱ, evaluated by Horner on the shifted coefficients.
fn horner_derivative(coeffs: &[f64], x: f64, k: u32) -> f64 {
    if coeffs.len() <= k as usize {
        return 0.0;
    }
    let shifted: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .skip(k as usize)
        .map(|(i, &c)| {
            let mut m = 1.0;
            for j in 0..k {
                m *= (i as u32 - j) as f64;
            }
            c * m
        })
        .collect();
    horner(&shifted, x)
}

/// Which hypothesis a grid point violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Positivity,
    Convexity,
}

/// A single grid-point violation found by [`validate_energy`].
#[derive(Debug, Clone)]
pub struct Violation {
    pub d: f64,
    pub kind: ViolationKind,
    pub value: f64,
}

/// Outcome of the pointwise hypothesis check.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub grid_len: usize,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check Φ > 0 and Φ̈ ≥ 0 at every grid point.
///
/// Report-valued: a failing energy comes back as a list of offending points,
/// not an error.
pub fn validate_energy(phi: &StoredEnergy, grid: &[f64]) -> Result<ValidationReport> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("validation grid is empty".into()));
    }
    if grid.iter().any(|&d| !(d >= 0.0) || !d.is_finite()) {
        return Err(Error::InvalidParameter("validation grid must be finite and >= 0".into()));
    }
    let mut violations = Vec::new();
    for &d in grid {
        let p = phi.phi(d);
        if !(p > 0.0) {
            violations.push(Violation { d, kind: ViolationKind::Positivity, value: p });
        }
        let c = phi.ddphi(d);
        if !(c >= 0.0) {
            violations.push(Violation { d, kind: ViolationKind::Convexity, value: c });
        }
    }
    Ok(ValidationReport { violations, grid_len: grid.len() })
}

/// Parse the CLI syntax for Φ:
/// `quad:a=<r>,b=<r>,kappa=<r>` or `poly:c0,c1,c2,...`.
pub fn parse_phi_spec(spec: &str) -> Result<StoredEnergy> {
    let bad = |msg: &str| Error::InvalidParameter(format!("bad --phi spec {spec:?}: {msg}"));
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| bad("expected `quad:...` or `poly:...`"))?;
    match kind {
        "quad" => {
            let (mut a, mut b, mut kappa) = (None, None, None);
            for part in rest.split(',') {
                let (key, value) = part
                    .split_once('=')
                    .ok_or_else(|| bad("quad parts must look like key=value"))?;
                let value: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| bad(&format!("cannot parse number {value:?}")))?;
                match key.trim() {
                    "a" => a = Some(value),
                    "b" => b = Some(value),
                    "kappa" => kappa = Some(value),
                    other => return Err(bad(&format!("unknown key {other:?}"))),
                }
            }
            match (a, b, kappa) {
                (Some(a), Some(b), Some(kappa)) => StoredEnergy::quadratic(a, b, kappa),
                _ => Err(bad("quad needs a=, b= and kappa=")),
            }
        }
        "poly" => {
            let coeffs: Result<Vec<f64>> = rest
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|_| bad(&format!("cannot parse coefficient {c:?}")))
                })
                .collect();
            StoredEnergy::polynomial(&coeffs?)
        }
        other => Err(bad(&format!("unknown energy kind {other:?}"))),
    }
}
