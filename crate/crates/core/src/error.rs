//! Error types shared across the solver suite.

use thiserror::Error;

/// Everything that can go wrong while building materials, integrating the
/// ODEs, shooting, or minimizing.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A constructor or operation precondition was violated.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The stored energy evaluated non-positive on the validation grid.
    #[error("stored energy not positive at d = {d}: phi(d) = {value}")]
    EnergyNotPositive { d: f64, value: f64 },

    /// The stored energy is not convex at a grid point.
    #[error("stored energy not convex at d = {d}: phi''(d) = {value}")]
    EnergyNotConvex { d: f64, value: f64 },

    /// The Lagrangian density was asked for a Jacobian outside the domain of Φ.
    #[error("stored energy undefined at jacobian {jacobian} (t = {t})")]
    JacobianDomain { t: f64, jacobian: f64 },

    /// The auxiliary right-hand side denominator vanished.
    #[error("auxiliary ODE denominator Z_n = 0 at s = {s}, v = {v}")]
    ZeroDenominator { s: f64, v: f64 },

    /// A profile right-hand side denominator degenerated (H → 0).
    #[error("degenerate state in ODE right-hand side at t = {t}")]
    DegenerateState { t: f64 },

    /// The adaptive integrator could not make progress.
    #[error("step size collapsed below {limit:e} at t = {t}")]
    StepSizeCollapse { t: f64, limit: f64 },

    /// An accepted step violated the a-priori growth bound; the right-hand
    /// side is inconsistent with the theory it implements.
    #[error("growth bound violated at s = {s}, v = {v}: |rhs| = {rhs} > bound = {bound}")]
    GrowthBound { s: f64, v: f64, rhs: f64, bound: f64 },

    /// Integration of a profile lost strict monotonicity.
    #[error("profile lost monotonicity (Hdot <= 0) at t = {t}")]
    MonotonicityLoss { t: f64 },

    /// Bracket expansion for the shooting map gave up.
    #[error("bracket expansion exhausted after {iters} iterations, last bracket [{lo}, {hi}]")]
    BracketExhausted { lo: f64, hi: f64, iters: usize },

    /// An iterative routine hit its iteration cap without converging.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// A quadratic-case routine was called on an inadmissible target.
    #[error("inadmissible quadratic case: kappa = {kappa}, R = {r}, R* = {r_star}")]
    Inadmissible { kappa: f64, r: f64, r_star: f64 },

    /// The problem is missing the outer target radius R*.
    #[error("problem has no target radius R*")]
    MissingTarget,
}

pub type Result<T> = std::result::Result<T, Error>;
