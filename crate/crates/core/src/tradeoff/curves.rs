use std::fmt::Write as _;

use num_rational::Rational64;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::ParamError;
use crate::routing::Rate;
use crate::scalar::{real_from_rational, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curve {
    /// `g N^(1/g)`
    Upp,
    /// `g ((eps N)^(1/g) + N^(1/(g+1)))`
    Low,
    /// `eps_o (eps_o N)^(1/h) + N^(1/(h+1))`
    Obl,
    /// `eps (eps N)^(1/g) + N^(1/(g+1))`
    Sem,
    /// Latency `h N^(1/h)` at which two-hop oblivious routing guarantees `1/(2h)`.
    Vlb,
}

impl Curve {
    pub const ALL: [Curve; 5] = [Curve::Upp, Curve::Low, Curve::Obl, Curve::Sem, Curve::Vlb];
}

struct Shape {
    g: i64,
    eps: Rational64,
    h: i64,
    eps_o: Rational64,
    eps_one: bool,
}

fn shape(r: Rate) -> Result<Shape, ParamError> {
    let inv = r.recip().ok_or(ParamError::InvalidRate)?;
    let one = Rational64::one();
    let g = (inv - one).floor();
    let half = inv / Rational64::from_integer(2);
    let h = half.floor();
    Ok(Shape {
        g: g.to_integer(),
        eps: g + one - (inv - one),
        h: h.to_integer(),
        eps_o: h + one - half,
        eps_one: inv.is_integer(),
    })
}

/// Evaluates one tradeoff curve at throughput `r` and network size `n`.
pub fn curve<F: Real>(r: Rate, n: F, which: Curve) -> Result<F, ParamError> {
    if !(n > F::one()) {
        return Err(ParamError::SizeTooSmall);
    }
    let s = shape(r)?;
    if s.eps_one && matches!(which, Curve::Upp | Curve::Low | Curve::Sem) {
        return Err(ParamError::EpsilonOne);
    }
    let int = |k: i64| F::from_i64(k).expect("small integer");
    let root = |x: F, k: i64| x.powf(int(k).recip());
    let (g, h) = (int(s.g), int(s.h));
    let eps: F = real_from_rational(&s.eps);
    let eps_o: F = real_from_rational(&s.eps_o);
    Ok(match which {
        Curve::Upp => g * root(n, s.g),
        Curve::Low => g * (root(eps * n, s.g) + root(n, s.g + 1)),
        Curve::Obl => eps_o * root(eps_o * n, s.h) + root(n, s.h + 1),
        Curve::Sem => eps * root(eps * n, s.g) + root(n, s.g + 1),
        Curve::Vlb => h * root(n, s.h),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint<F> {
    pub r: Rate,
    pub n: F,
    pub g: i64,
    pub eps: f64,
    pub l_upp: F,
    pub l_low: F,
    pub l_obl: F,
    pub l_sem: F,
    pub vlb: F,
}

impl<F: Real> CurvePoint<F> {
    /// Whether `eps >= 2^-g`, where `L_low >= L_upp / 2` is claimed.
    pub fn half_bound_applies(&self) -> bool {
        self.eps >= 2f64.powi(-(self.g as i32))
    }

    pub fn half_bound_holds(&self) -> bool {
        self.l_low + self.l_low >= self.l_upp
    }
}

/// All curves on the grid `r = i / (2 points)`, `i = 1..=points`, skipping rates
/// with integer `1/r`.
pub fn curve_sweep<F: Real>(n: F, points: u32) -> Result<Vec<CurvePoint<F>>, ParamError> {
    let mut out = Vec::new();
    for i in 1..=points {
        let r = Rate::new(i64::from(i), 2 * i64::from(points)).map_err(|_| ParamError::InvalidRate)?;
        let s = shape(r)?;
        if s.eps_one {
            continue;
        }
        out.push(CurvePoint {
            r,
            n,
            g: s.g,
            eps: s.eps.to_f64().unwrap_or(f64::NAN),
            l_upp: curve(r, n, Curve::Upp)?,
            l_low: curve(r, n, Curve::Low)?,
            l_obl: curve(r, n, Curve::Obl)?,
            l_sem: curve(r, n, Curve::Sem)?,
            vlb: curve(r, n, Curve::Vlb)?,
        });
    }
    Ok(out)
}

pub const CURVE_CSV_HEADER: &str =
    "r,N,L_upp,L_low,L_obl,L_sem,vlb_line,r_exact,g,eps,half_bound_applies,half_bound_holds";

/// CSV rows for a sweep, floats in shortest round-trip form.
pub fn sweep_csv<F: Real>(points: &[CurvePoint<F>]) -> String {
    let mut s = String::from(CURVE_CSV_HEADER);
    s.push('\n');
    let f = |x: F| x.to_f64().unwrap_or(f64::NAN);
    for p in points {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            p.r.to_f64(),
            f(p.n),
            f(p.l_upp),
            f(p.l_low),
            f(p.l_obl),
            f(p.l_sem),
            f(p.vlb),
            p.r,
            p.g,
            p.eps,
            p.half_bound_applies(),
            p.half_bound_holds()
        )
        .expect("writing to a String");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_curve_example() {
        let r = Rate::new(3, 10).unwrap();
        assert!((curve(r, 1e4f64, Curve::Upp).unwrap() - 200.0).abs() < 1e-9);
        assert_eq!(curve(Rate::new(1, 3).unwrap(), 1e4f64, Curve::Low), Err(ParamError::EpsilonOne));
        assert!(curve(Rate::new(1, 3).unwrap(), 1e4f64, Curve::Obl).is_ok());
        assert_eq!(curve(r, 1.0f64, Curve::Upp), Err(ParamError::SizeTooSmall));
    }

    #[test]
    fn sweep_skips_integer_reciprocals() {
        let pts = curve_sweep(1e6f64, 20).unwrap();
        assert!(pts.iter().all(|p| !p.r.recip().unwrap().is_integer()));
        let skipped = (1..=20).filter(|i| 40 % i == 0).count();
        assert_eq!(skipped, 7);
        assert_eq!(pts.len(), 20 - skipped);
    }
}
