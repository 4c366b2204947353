use std::fmt::Write as _;

use ornlab::perm::Permutation;
use ornlab::rng;
use ornlab::routing::Rate;
use ornlab::schedule::{Schedule, ScheduleDescription, ScheduleKind};
use ornlab::tradeoff::{assess_params, DesignParams};
use serde::{Deserialize, Serialize};

use crate::{Check, CommandConfig, Meta, Outcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildConfig {
    pub r: Rate,
    pub p: u64,
    #[serde(default = "default_mode")]
    pub mode: ScheduleKind,
    /// Phases per block used for the emitted schedule.
    #[serde(rename = "C", default = "default_c")]
    pub c: usize,
    /// Relabel nodes by a permutation drawn from `seed`.
    #[serde(default)]
    pub relabel: bool,
    /// Treat every prime lower bound as an assertion.
    #[serde(default)]
    pub enforce_hypotheses: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_mode() -> ScheduleKind {
    ScheduleKind::Orn
}

fn default_c() -> usize {
    1
}

impl CommandConfig for BuildConfig {
    fn seed_mut(&mut self) -> &mut u64 {
        &mut self.seed
    }
}

#[derive(Serialize)]
struct ScheduleFile<'a> {
    meta: &'a Meta,
    schedule: ScheduleDescription,
}

#[derive(Serialize)]
struct ParamsFile<'a> {
    meta: &'a Meta,
    params: &'a DesignParams,
    schedule_c: usize,
    nodes: usize,
    period: u64,
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "undefined".to_string(), T::to_string)
}

pub fn params_table(params: &DesignParams, schedule_c: usize) -> String {
    let mut s = String::new();
    let rows: Vec<(&str, String)> = vec![
        ("r", params.r.to_string()),
        ("p", params.p.to_string()),
        ("mode", format!("{:?}", params.mode).to_lowercase()),
        ("g", params.g.to_string()),
        ("eps", params.eps.to_string()),
        ("N", opt(&params.n)),
        ("ln N", format!("{:.6}", params.ln_n)),
        ("h", params.h.to_string()),
        ("eps_o", params.eps_o.to_string()),
        ("theta", params.theta.to_string()),
        ("gamma_orn", opt(&params.gamma_orn.map(|x| format!("{x:.6}")))),
        ("gamma_sorn", format!("{:.6}", params.gamma_sorn)),
        ("C (required)", opt(&params.c)),
        ("C (schedule)", schedule_c.to_string()),
        ("delta", format!("{:.6}", params.delta)),
    ];
    for (k, v) in rows {
        writeln!(s, "{k:<14}{v}").expect("writing to a String");
    }
    writeln!(s).expect("writing to a String");
    writeln!(s, "{:<26}{:>14}  verdict", "hypothesis", "bound").expect("writing to a String");
    for h in &params.hypotheses {
        writeln!(s, "{:<26}{:>14.4}  {}", h.statement, h.bound, crate::Verdict::from(h.holds)).expect("writing to a String");
    }
    s
}

pub fn run(cfg: &BuildConfig, meta: &Meta) -> anyhow::Result<Outcome> {
    let params = assess_params(cfg.r, cfg.p, cfg.mode)?;
    let mut sched = Schedule::new(cfg.mode, cfg.p, params.g as usize, cfg.c)?;
    if cfg.relabel {
        let tau = Permutation::random(sched.node_count(), &mut rng::master(cfg.seed));
        sched = sched.with_relabel(tau)?;
    }
    let mut out = Outcome::default();
    out.add_json("schedule.json", &ScheduleFile { meta, schedule: sched.describe() });
    out.add_json(
        "params.json",
        &ParamsFile {
            meta,
            params: &params,
            schedule_c: cfg.c,
            nodes: sched.node_count(),
            period: sched.period(),
        },
    );
    out.add_text("params.txt", meta.comment() + &params_table(&params, cfg.c));
    if cfg.enforce_hypotheses {
        for h in &params.hypotheses {
            out.checks.push(Check::new(
                format!("hypothesis {}", h.statement),
                h.holds,
                format!("p = {} against bound {}", cfg.p, h.bound),
            ));
        }
    }
    Ok(out)
}
