use ornlab::routing::Rate;
use ornlab::schedule::{Schedule, ScheduleKind};
use ornlab::tradeoff::{curve_sweep, expected_dual_bound, maxlat_lowerbound, sweep_csv, CurvePoint, DualEstimate};
use serde::{Deserialize, Serialize};

use crate::load::oblivious_latency_bound;
use crate::{Check, CommandConfig, Meta, Outcome};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualConfig {
    pub kind: ScheduleKind,
    pub p: u64,
    pub g: usize,
    #[serde(rename = "C")]
    pub c: usize,
    /// Defaults to `g + 1`.
    #[serde(default)]
    pub theta: Option<u32>,
    /// Defaults to the scheme's worst-case latency.
    #[serde(default)]
    pub latency: Option<u64>,
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurvesConfig {
    /// Network size for the sweep.
    pub n: f64,
    /// Grid `r = i / (2 points)`.
    pub points: u32,
    /// Degree `d` in the latency lower bound.
    pub maxlat_d: f64,
    pub dual: Vec<DualConfig>,
    /// Also assert `L_low <= L_upp <= vlb_line` at every grid point.
    pub assert_ordering: bool,
    pub seed: u64,
}

impl Default for CurvesConfig {
    fn default() -> Self {
        Self {
            n: 1e20,
            points: 1000,
            maxlat_d: 1.0,
            dual: vec![
                DualConfig { kind: ScheduleKind::Orn, p: 5, g: 2, c: 1, theta: None, latency: None, trials: 200 },
                DualConfig { kind: ScheduleKind::Sorn, p: 5, g: 2, c: 1, theta: None, latency: None, trials: 100 },
            ],
            assert_ordering: false,
            seed: 0,
        }
    }
}

impl CommandConfig for CurvesConfig {
    fn seed_mut(&mut self) -> &mut u64 {
        &mut self.seed
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct OrderingSummary {
    pub points: usize,
    /// Grid points where `L_low > L_upp`.
    pub low_above_upp: Vec<String>,
    /// Grid points where `L_upp` or `L_low` exceeds the two-hop reference line.
    pub above_vlb: Vec<String>,
    pub half_bound_applicable: usize,
    pub half_bound_violations: Vec<String>,
}

pub fn ordering(points: &[CurvePoint<f64>]) -> OrderingSummary {
    let mut s = OrderingSummary { points: points.len(), ..Default::default() };
    for p in points {
        let r = p.r.to_string();
        if p.l_low > p.l_upp {
            s.low_above_upp.push(r.clone());
        }
        if p.l_upp > p.vlb || p.l_low > p.vlb {
            s.above_vlb.push(r.clone());
        }
        if p.half_bound_applies() {
            s.half_bound_applicable += 1;
            if !p.half_bound_holds() {
                s.half_bound_violations.push(r);
            }
        }
    }
    s
}

#[derive(Debug, Clone, Serialize)]
struct MaxLatPoint {
    r: Rate,
    value: f64,
}

#[derive(Debug, Clone, Serialize)]
struct CurvesSummary<'a> {
    meta: &'a Meta,
    n: f64,
    ordering: OrderingSummary,
    maxlat_lowerbound: Vec<MaxLatPoint>,
}

#[derive(Debug, Clone, Serialize)]
struct DualEvaluation {
    kind: ScheduleKind,
    p: u64,
    g: usize,
    #[serde(rename = "C")]
    c: usize,
    nodes: usize,
    period: u64,
    estimate: DualEstimate,
    within_closed_form: bool,
}

#[derive(Debug, Clone, Serialize)]
struct DualFile<'a> {
    meta: &'a Meta,
    evaluations: Vec<DualEvaluation>,
}

pub fn run(cfg: &CurvesConfig, meta: &Meta) -> anyhow::Result<Outcome> {
    let points = curve_sweep(cfg.n, cfg.points)?;
    let ord = ordering(&points);
    let maxlat = points
        .iter()
        .map(|p| Ok(MaxLatPoint { r: p.r, value: maxlat_lowerbound(p.r, cfg.n, cfg.maxlat_d)? }))
        .collect::<anyhow::Result<Vec<_>>>()?;

    let mut evaluations = Vec::new();
    for d in &cfg.dual {
        let sched = Schedule::new(d.kind, d.p, d.g, d.c)?;
        let theta = d.theta.unwrap_or(d.g as u32 + 1);
        let latency = d.latency.unwrap_or_else(|| oblivious_latency_bound(&sched));
        let estimate = expected_dual_bound(&sched, theta, latency, d.trials, cfg.seed);
        evaluations.push(DualEvaluation {
            kind: d.kind,
            p: d.p,
            g: d.g,
            c: d.c,
            nodes: sched.node_count(),
            period: sched.period(),
            within_closed_form: estimate.mean <= estimate.closed_form + estimate.half_width,
            estimate,
        });
    }

    let mut out = Outcome::default();
    out.checks.push(Check::new(
        "half bound where eps >= 2^-g",
        ord.half_bound_violations.is_empty(),
        format!("{} applicable points, {} violations", ord.half_bound_applicable, ord.half_bound_violations.len()),
    ));
    if cfg.assert_ordering {
        out.checks.push(Check::new(
            "L_low <= L_upp",
            ord.low_above_upp.is_empty(),
            format!("{} of {} points violate", ord.low_above_upp.len(), ord.points),
        ));
        out.checks.push(Check::new(
            "curves below vlb line",
            ord.above_vlb.is_empty(),
            format!("{} of {} points violate", ord.above_vlb.len(), ord.points),
        ));
    }
    for e in &evaluations {
        out.checks.push(Check::new(
            format!("dual estimate {:?} p={} g={} C={}", e.kind, e.p, e.g, e.c).to_lowercase(),
            e.within_closed_form,
            format!(
                "mean {} +- {} vs closed form {}",
                e.estimate.mean, e.estimate.half_width, e.estimate.closed_form
            ),
        ));
    }
    out.add_text("curves.csv", meta.comment() + &sweep_csv(&points));
    out.add_json("curves.json", &CurvesSummary { meta, n: cfg.n, ordering: ord, maxlat_lowerbound: maxlat });
    out.add_json("dual.json", &DualFile { meta, evaluations });
    Ok(out)
}
