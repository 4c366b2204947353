use std::fmt;

use num_rational::Rational64;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::ParamError;
use crate::ff::is_prime;
use crate::routing::Rate;
use crate::schedule::ScheduleKind;

/// The prime lower bounds required by the throughput guarantees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Inequality {
    /// `p > C(g+1)`
    PhaseCount,
    /// `p > 2 + 2/(1-eps)`
    FirstLastHop,
    /// `p > (g+3)/eps - 2`
    SornEdgeBlocks,
    /// `p > (2-delta)/(1-delta)`
    SornFailover,
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Inequality::PhaseCount => "p > C(g+1)",
            Inequality::FirstLastHop => "p > 2 + 2/(1-eps)",
            Inequality::SornEdgeBlocks => "p > (g+3)/eps - 2",
            Inequality::SornFailover => "p > (2-delta)/(1-delta)",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypothesis {
    pub inequality: Inequality,
    pub statement: String,
    /// Right-hand side; infinite when the quantity is undefined.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignParams {
    pub r: Rate,
    pub p: u64,
    pub mode: ScheduleKind,
    /// `floor(1/r - 1)`
    pub g: u64,
    /// `g + 1 - (1/r - 1)`
    pub eps: Rational64,
    /// `p^g`, when it fits.
    pub n: Option<u128>,
    pub ln_n: f64,
    /// `floor(1/(2r))`
    pub h: u64,
    /// `h + 1 - 1/(2r)`
    pub eps_o: Rational64,
    /// `ln((g - eps - 2/(p-2)) / (g-1))`; undefined for `g < 2` or a non-positive argument.
    pub gamma_orn: Option<f64>,
    /// `ln((g + 2 - eps) / (g+1))`
    pub gamma_sorn: f64,
    /// `ceil(ln ln N / gamma^2 * ln N)` for the mode's gamma.
    pub c: Option<u64>,
    /// `((g+1)/(g+2-eps))^(1/g)`
    pub delta: f64,
    /// `floor(1/r)`
    pub theta: u64,
    pub hypotheses: Vec<Hypothesis>,
}

impl DesignParams {
    pub fn violated(&self) -> Vec<Inequality> {
        self.hypotheses.iter().filter(|h| !h.holds).map(|h| h.inequality).collect()
    }

    pub fn eps_f64(&self) -> f64 {
        to_f64(&self.eps)
    }
}

fn to_f64(r: &Rational64) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn required_c(gamma: f64, ln_n: f64) -> Option<u64> {
    if !(gamma > 0.0) || !(ln_n > 1.0) {
        return None;
    }
    let c = (ln_n.ln() / (gamma * gamma) * ln_n).ceil();
    c.is_finite().then(|| c.max(1.0) as u64)
}

/// Computes every parameter and records which prime lower bounds hold.
pub fn assess_params(r: Rate, p: u64, mode: ScheduleKind) -> Result<DesignParams, ParamError> {
    let rv = *r.value();
    if rv <= Rational64::zero() {
        return Err(ParamError::InvalidRate);
    }
    if !is_prime(p) {
        return Err(ParamError::NotPrime(p));
    }
    let inv = rv.recip();
    if inv.is_integer() {
        return Err(ParamError::EpsilonOne);
    }
    let one = Rational64::one();
    let g_r = (inv - one).floor();
    let g = g_r.to_integer() as u64;
    let eps = g_r + one - (inv - one);
    let half_inv = inv / Rational64::from_integer(2);
    let h = half_inv.floor().to_integer() as u64;
    let eps_o = Rational64::from_integer(h as i64) + one - half_inv;
    let theta = inv.floor().to_integer() as u64;

    let (gf, ef, pf) = (g as f64, to_f64(&eps), p as f64);
    let n = (p as u128).checked_pow(g as u32);
    let ln_n = gf * pf.ln();
    let gamma_orn = if g >= 2 && p > 2 {
        let arg = (gf - ef - 2.0 / (pf - 2.0)) / (gf - 1.0);
        (arg > 0.0).then(|| arg.ln())
    } else {
        None
    };
    let gamma_sorn = ((gf + 2.0 - ef) / (gf + 1.0)).ln();
    let c = match mode {
        // with a single hop block per side every hop is a first or last hop,
        // so no concentration is needed
        ScheduleKind::Orn if g < 2 => Some(1),
        ScheduleKind::Orn => gamma_orn.and_then(|gm| required_c(gm, ln_n)),
        ScheduleKind::Sorn => required_c(gamma_sorn, ln_n),
    };
    let delta = ((gf + 1.0) / (gf + 2.0 - ef)).powf(1.0 / gf);

    let mut hypotheses = Vec::new();
    let mut check = |inequality: Inequality, bound: f64| {
        hypotheses.push(Hypothesis {
            inequality,
            statement: inequality.to_string(),
            bound,
            holds: pf > bound,
        });
    };
    check(Inequality::PhaseCount, c.map_or(f64::INFINITY, |c| (c * (g + 1)) as f64));
    check(Inequality::FirstLastHop, 2.0 + 2.0 / (1.0 - ef));
    if mode == ScheduleKind::Sorn {
        check(Inequality::SornEdgeBlocks, (gf + 3.0) / ef - 2.0);
        check(Inequality::SornFailover, (2.0 - delta) / (1.0 - delta));
    }
    Ok(DesignParams {
        r,
        p,
        mode,
        g,
        eps,
        n,
        ln_n,
        h,
        eps_o,
        gamma_orn,
        gamma_sorn,
        c,
        delta,
        theta,
        hypotheses,
    })
}

/// Like [`assess_params`], but fails when any prime lower bound is violated.
pub fn derive_params(r: Rate, p: u64, mode: ScheduleKind) -> Result<DesignParams, ParamError> {
    let params = assess_params(r, p, mode)?;
    let violated = params.violated();
    if violated.is_empty() {
        Ok(params)
    } else {
        Err(ParamError::PrimeTooSmall { p, violated })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rate(n: i64, d: i64) -> Rate {
        Rate::new(n, d).unwrap()
    }

    #[test]
    fn worked_examples() {
        let a = assess_params(rate(3, 10), 7, ScheduleKind::Orn).unwrap();
        assert_eq!((a.g, a.eps), (2, Rational64::new(2, 3)));
        assert_eq!(a.theta, 3);
        let b = assess_params(rate(11, 50), 13, ScheduleKind::Sorn).unwrap();
        assert_eq!((b.g, b.eps, b.h, b.eps_o), (3, Rational64::new(5, 11), 2, Rational64::new(8, 11)));
        assert_eq!(assess_params(rate(1, 4), 7, ScheduleKind::Orn), Err(ParamError::EpsilonOne));
        assert_eq!(assess_params(rate(3, 10), 9, ScheduleKind::Orn), Err(ParamError::NotPrime(9)));
    }

    #[test]
    fn small_prime_names_inequality() {
        // 2 + 2/(1 - 2/3) = 8
        let err = derive_params(rate(3, 10), 7, ScheduleKind::Orn).unwrap_err();
        let ParamError::PrimeTooSmall { violated, .. } = err else { panic!() };
        assert!(violated.contains(&Inequality::FirstLastHop));
    }

    #[test]
    fn large_prime_passes_orn() {
        let p = derive_params(rate(3, 10), 2039, ScheduleKind::Orn).unwrap();
        assert!(p.c.unwrap() * 3 < 2039);
    }
}
