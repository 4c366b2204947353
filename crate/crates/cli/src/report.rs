use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

/// An exact rational as integer strings, with a float for plotting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exact {
    pub num: String,
    pub den: String,
    pub value: f64,
}

impl From<&BigRational> for Exact {
    fn from(r: &BigRational) -> Self {
        Self { num: r.numer().to_string(), den: r.denom().to_string(), value: r.to_f64().unwrap_or(f64::NAN) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl From<bool> for Verdict {
    fn from(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}
