//! Observer-augmented searches: turn stability and bypass counting.

use std::fmt;

use crate::error::Result;
use crate::model::{Configuration, Edge, Location, ProtocolDefinition, RoleId, TurnValue};
use crate::trace::Trace;

use super::{ensure_supported, search, Monitor, PropertyId, SearchOptions, Verdict};

const NONE: u8 = 0xFF;

/// Remembers the process holding an outstanding grant. Any write of `turn`
/// while a grant is outstanding is a violation; the grant is discharged when
/// the granted process enters the critical section.
pub(crate) struct TurnStability;

impl Monitor for TurnStability {
    fn width(&self) -> usize {
        1
    }

    fn init(&self, _: &Configuration, obs: &mut [u8]) {
        obs[0] = NONE;
    }

    fn step(&self, obs: &mut [u8], _: &Configuration, role: RoleId, edge: &Edge, post: &Configuration) -> bool {
        let mut ok = true;
        if edge.turn_write().is_some() {
            ok = obs[0] == NONE;
            if let TurnValue::Pid(granted) = post.shared.turn {
                obs[0] = granted;
            }
        }
        if edge.to == Location::Cs && obs[0] as usize == role.0 {
            obs[0] = NONE;
        }
        ok
    }
}

/// Checks that a grant of `turn` to a process is never overwritten before
/// that process reaches the critical section.
pub fn check_turn_stability(proto: &ProtocolDefinition, state_cap: usize) -> Result<Verdict> {
    ensure_supported(proto, PropertyId::TurnStable)?;
    let g = search(proto, &TurnStability, &SearchOptions { state_cap, keep_edges: false, stop_on_violation: true });
    Ok(match g.violation {
        Some((id, role, edge)) => {
            let mut path = g.path_to(id);
            path.push((role, edge));
            Verdict::Fail(Box::new(Trace::from_path(proto, &path)))
        }
        None if g.truncated => Verdict::Bounded,
        None => Verdict::Pass,
    })
}

pub(crate) fn trace_breaks_turn_stability(
    proto: &ProtocolDefinition,
    trace: &Trace,
    configs: &[Configuration],
) -> bool {
    let mut obs = [NONE];
    trace.steps.iter().enumerate().any(|(i, s)| {
        let aut = &proto.roles[s.role.0];
        let edge = &aut.edges[aut.edge_by_id(&s.edge).expect("replayed edge exists")];
        !TurnStability.step(&mut obs, &configs[i], s.role, edge, &configs[i + 1])
    })
}

/// Per-process count of critical-section entries by others since the process
/// entered its trying region, saturating at N + 1.
pub(crate) struct BypassCounter<'p> {
    pub proto: &'p ProtocolDefinition,
}

impl BypassCounter<'_> {
    pub fn saturation(&self) -> u8 {
        self.proto.n() as u8 + 1
    }
}

impl Monitor for BypassCounter<'_> {
    fn width(&self) -> usize {
        self.proto.n()
    }

    fn init(&self, _: &Configuration, obs: &mut [u8]) {
        obs.fill(NONE);
    }

    fn step(&self, obs: &mut [u8], _: &Configuration, role: RoleId, edge: &Edge, _: &Configuration) -> bool {
        let Some(pid) = self.proto.roles[role.0].kind.pid() else {
            return true;
        };
        let trying = self.proto.roles[role.0].trying;
        if !trying.contains(edge.from) && trying.contains(edge.to) {
            obs[pid as usize] = 0;
        }
        if edge.to == Location::Cs {
            let cap = self.saturation();
            for (q, count) in obs.iter_mut().enumerate() {
                if q != pid as usize && *count != NONE {
                    *count = (*count + 1).min(cap);
                }
            }
            obs[pid as usize] = NONE;
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BypassBound {
    Bounded(u32),
    /// The counter saturated: more than N overtakes were observed.
    ExceedsN(u32),
}

impl BypassBound {
    pub fn is_bounded(self) -> bool {
        matches!(self, BypassBound::Bounded(_))
    }
}

impl fmt::Display for BypassBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BypassBound::Bounded(b) => write!(f, "{b}"),
            BypassBound::ExceedsN(n) => write!(f, ">{n}"),
        }
    }
}

/// Worst-case number of times each process is overtaken between requesting
/// and entering the critical section, over every execution. `None` if the
/// state cap was hit.
pub fn max_bypass(proto: &ProtocolDefinition, state_cap: usize) -> Option<Vec<BypassBound>> {
    let monitor = BypassCounter { proto };
    let g = search(proto, &monitor, &SearchOptions { state_cap, keep_edges: false, stop_on_violation: false });
    if g.truncated {
        return None;
    }
    let mut max = vec![0u8; proto.n()];
    for id in 0..g.len() as u32 {
        for (m, &c) in max.iter_mut().zip(g.observer(id)) {
            if c != NONE {
                *m = (*m).max(c);
            }
        }
    }
    let sat = monitor.saturation();
    Some(
        max.into_iter()
            .map(|m| if m >= sat { BypassBound::ExceedsN(proto.n() as u32) } else { BypassBound::Bounded(m as u32) })
            .collect(),
    )
}
