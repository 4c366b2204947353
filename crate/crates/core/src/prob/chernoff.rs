use super::ProbError;
use crate::scalar::Real;

/// A multiplicative Chernoff bound in exact form plus its weaker closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChernoffBound<F> {
    pub exact: F,
    /// `None` where the simplified form is not claimed (lower tail with `gamma >= 1/2`).
    pub simplified: Option<F>,
}

fn check<F: Real>(gamma: F, mu: F) -> Result<(), ProbError> {
    if gamma > F::zero() && mu > F::zero() && gamma.is_finite() && mu.is_finite() {
        Ok(())
    } else {
        Err(ProbError::DomainError)
    }
}

/// Bound on `Pr(X >= e^gamma mu)`: `exp(e^g - 1 - g e^g)^mu` and `e^(-g^2 mu / 2)`.
pub fn chernoff_upper<F: Real>(gamma: F, mu: F) -> Result<ChernoffBound<F>, ProbError> {
    check(gamma, mu)?;
    let eg = gamma.exp();
    let exact = ((eg - F::one() - gamma * eg) * mu).exp();
    let simplified = (-gamma * gamma * mu / F::lit(2.0)).exp();
    Ok(ChernoffBound { exact, simplified: Some(simplified) })
}

/// Bound on `Pr(X <= e^-gamma mu)`: `exp(e^-g - 1 + g e^-g)^mu`, and `e^(-g^2 mu / 3)`
/// for `gamma < 1/2`.
pub fn chernoff_lower<F: Real>(gamma: F, mu: F) -> Result<ChernoffBound<F>, ProbError> {
    check(gamma, mu)?;
    let eg = (-gamma).exp();
    let exact = ((eg - F::one() + gamma * eg) * mu).exp();
    let simplified = (gamma < F::lit(0.5)).then(|| (-gamma * gamma * mu / F::lit(3.0)).exp());
    Ok(ChernoffBound { exact, simplified })
}
