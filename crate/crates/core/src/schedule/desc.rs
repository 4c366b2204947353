use serde::{Deserialize, Serialize};

use super::{Schedule, ScheduleError, ScheduleKind};
use crate::perm::Permutation;

/// JSON form of a schedule. Loading rebuilds the canonical construction and
/// checks that the recorded phase list and family order agree with it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleDescription {
    pub kind: ScheduleKind,
    pub p: u64,
    pub g: usize,
    #[serde(rename = "C")]
    pub c: usize,
    pub phases: Vec<u64>,
    pub family: Vec<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relabel: Option<Vec<usize>>,
}

impl ScheduleDescription {
    pub(super) fn of(s: &Schedule) -> Self {
        Self {
            kind: s.kind(),
            p: s.p(),
            g: s.g(),
            c: s.c(),
            phases: s.phase_x().to_vec(),
            family: s.family().iter().map(|d| d.entries().to_vec()).collect(),
            relabel: s.relabeling().map(|t| t.as_slice().to_vec()),
        }
    }

    pub fn build(&self) -> Result<Schedule, ScheduleError> {
        let sched = Schedule::new(self.kind, self.p, self.g, self.c)?;
        if sched.phase_x() != self.phases.as_slice() {
            return Err(ScheduleError::DescriptionMismatch("phase list".into()));
        }
        let family: Vec<Vec<u64>> = sched.family().iter().map(|d| d.entries().to_vec()).collect();
        if family != self.family {
            return Err(ScheduleError::DescriptionMismatch("family order".into()));
        }
        match &self.relabel {
            None => Ok(sched),
            Some(tau) => {
                let tau = Permutation::new(tau.clone())
                    .map_err(|e| ScheduleError::DescriptionMismatch(format!("relabel: {e}")))?;
                sched.with_relabel(tau)
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
