//! Exhaustive interleaving exploration.
//!
//! Safety properties are checked over the BFS state graph, so the first
//! violating state (or transition) in discovery order yields a shortest
//! counterexample. Turn stability and bypass bounds run the protocol in
//! product with a small observer automaton. Lockout freedom is decided by
//! fair-SCC analysis of the completed graph.

mod dot;
mod graph;
mod liveness;
mod monitors;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::model::{
    election_region, extended_cs, for_each_enabled, Configuration, Family, Location, LocationSet, ProtocolDefinition,
    RoleId, TurnTerm,
};
use crate::trace::Trace;

pub use dot::export_dot;
pub use liveness::{check_liveness, LivenessVerdict};
pub use monitors::{check_turn_stability, max_bypass, BypassBound};

pub(crate) use graph::{search, Monitor, NoMonitor, SearchOptions, StateGraph, Transition};

/// Default bound on stored configurations.
pub const DEFAULT_STATE_CAP: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PropertyId {
    Mutex,
    ExtMutex,
    NoTwo351,
    FreeImpliesClear,
    TurnStable,
    NoDeadlock,
    LockoutFreedom,
}

impl PropertyId {
    pub const ALL: [PropertyId; 7] = [
        PropertyId::Mutex,
        PropertyId::ExtMutex,
        PropertyId::NoTwo351,
        PropertyId::FreeImpliesClear,
        PropertyId::TurnStable,
        PropertyId::NoDeadlock,
        PropertyId::LockoutFreedom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PropertyId::Mutex => "mutex",
            PropertyId::ExtMutex => "ext-mutex",
            PropertyId::NoTwo351 => "no-two-351",
            PropertyId::FreeImpliesClear => "free-implies-clear",
            PropertyId::TurnStable => "turn-stable",
            PropertyId::NoDeadlock => "no-deadlock",
            PropertyId::LockoutFreedom => "lockout-freedom",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            PropertyId::Mutex => "at most one process is in the critical section",
            PropertyId::ExtMutex => {
                "at most one process is in the extended critical section (CS up to, not including, 8)"
            }
            PropertyId::NoTwo351 => "at most one process is at location 3.5.1",
            PropertyId::FreeImpliesClear => {
                "whenever turn is set to FREE, no other process is at a location from 3 to 4"
            }
            PropertyId::TurnStable => {
                "once turn is granted to a process, turn is not written again before it enters CS"
            }
            PropertyId::NoDeadlock => {
                "every reachable configuration enables a non-exempt edge or leaves every role quiescent"
            }
            PropertyId::LockoutFreedom => "under weak per-process fairness, every trying process eventually enters CS",
        }
    }

    /// Defined only for the coordinator-free protocols.
    pub fn symmetric_only(self) -> bool {
        matches!(
            self,
            PropertyId::ExtMutex | PropertyId::NoTwo351 | PropertyId::FreeImpliesClear | PropertyId::TurnStable
        )
    }

    pub fn applies_to(self, family: Family) -> bool {
        family == Family::Symmetric || !self.symmetric_only()
    }

    /// Properties checked when `all` is requested.
    pub fn defaults(family: Family) -> Vec<PropertyId> {
        PropertyId::ALL.into_iter().filter(|p| p.applies_to(family)).collect()
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PropertyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PropertyId::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| Error::UnknownProperty(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(Box<Trace>),
    /// The state cap was reached before a violation was found.
    Bounded,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail(_) => "fail",
            Verdict::Bounded => "bounded",
        }
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn trace(&self) -> Option<&Trace> {
        match self {
            Verdict::Fail(t) => Some(t),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExploreOptions {
    pub state_cap: usize,
    /// Also compute per-process bypass bounds.
    pub bypass: bool,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions { state_cap: DEFAULT_STATE_CAP, bypass: false }
    }
}

#[derive(Debug, Clone)]
pub struct ExplorationReport {
    pub protocol: String,
    pub n: usize,
    pub states: usize,
    pub transitions: u64,
    /// True if the state cap cut the search short.
    pub truncated: bool,
    pub verdicts: Vec<(PropertyId, Verdict)>,
    /// Per process; `None` when not requested or when the cap was hit.
    pub max_bypass: Option<Vec<BypassBound>>,
    /// Bypass was requested but its augmented graph hit the state cap.
    pub bypass_truncated: bool,
    pub wall_time: Duration,
}

impl ExplorationReport {
    pub fn verdict(&self, p: PropertyId) -> Option<&Verdict> {
        self.verdicts.iter().find(|(id, _)| *id == p).map(|(_, v)| v)
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|(_, v)| v.is_pass())
    }

    pub fn any_fail(&self) -> bool {
        self.verdicts.iter().any(|(_, v)| matches!(v, Verdict::Fail(_)))
    }
}

pub(crate) fn ensure_supported(proto: &ProtocolDefinition, p: PropertyId) -> Result<()> {
    if p.applies_to(proto.family) {
        Ok(())
    } else {
        Err(Error::UnsupportedProperty { property: p.to_string(), protocol: proto.name.clone() })
    }
}

/// State invariant for the location-counting properties.
fn occupancy_bound(p: PropertyId) -> Option<LocationSet> {
    match p {
        PropertyId::Mutex => Some(LocationSet::of(&[Location::Cs])),
        PropertyId::ExtMutex => Some(extended_cs()),
        PropertyId::NoTwo351 => Some(LocationSet::of(&[Location::L3_5_1])),
        _ => None,
    }
}

pub(crate) fn state_violates(p: PropertyId, c: &Configuration) -> bool {
    occupancy_bound(p).is_some_and(|set| c.count_at(set) > 1)
}

/// The transition writes FREE into `turn` while another process sits in
/// locations 3..4.
pub(crate) fn free_write_violates(
    proto: &ProtocolDefinition,
    pre: &Configuration,
    role: RoleId,
    edge_idx: usize,
) -> bool {
    let edge = proto.edge(role, edge_idx);
    if edge.turn_write() != Some(TurnTerm::Free) {
        return false;
    }
    let region = election_region();
    proto.processes().any(|q| q != role && region.contains(pre.pc(q)))
}

/// Neither a non-exempt edge is enabled nor is every role quiescent.
///
/// Evaluated on the configuration itself: a truncated graph may be missing
/// successors of its frontier.
pub(crate) fn is_deadlock(proto: &ProtocolDefinition, c: &Configuration) -> bool {
    let mut any_subject = false;
    for_each_enabled(proto, c, |r, i| any_subject |= !proto.edge(r, i).is_exempt());
    !any_subject && !proto.roles.iter().zip(&c.pcs).all(|(aut, pc)| aut.quiescent.contains(*pc))
}

pub(crate) fn build_graph(proto: &ProtocolDefinition, state_cap: usize) -> StateGraph {
    search(proto, &NoMonitor, &SearchOptions { state_cap, keep_edges: true, stop_on_violation: false })
}

/// Calls `visit` on every reachable configuration in BFS order. Returns
/// `false` if the state cap cut the search short.
pub fn for_each_reachable(proto: &ProtocolDefinition, state_cap: usize, mut visit: impl FnMut(&Configuration)) -> bool {
    let g = search(proto, &NoMonitor, &SearchOptions { state_cap, keep_edges: false, stop_on_violation: false });
    for id in 0..g.len() as u32 {
        visit(&g.config(proto, id));
    }
    !g.truncated
}

/// Checks `properties` over every interleaving of `proto`.
pub fn explore(
    proto: &ProtocolDefinition,
    properties: &[PropertyId],
    opts: &ExploreOptions,
) -> Result<ExplorationReport> {
    let started = Instant::now();
    let mut wanted: Vec<PropertyId> = Vec::new();
    for &p in properties {
        ensure_supported(proto, p)?;
        if !wanted.contains(&p) {
            wanted.push(p);
        }
    }
    wanted.sort();

    let g = build_graph(proto, opts.state_cap);
    let mut first_state_hit: Vec<Option<u32>> = vec![None; PropertyId::ALL.len()];
    let mut first_edge_hit: Option<(u32, RoleId, usize)> = None;
    let want = |p: PropertyId| wanted.contains(&p);

    for id in 0..g.len() as u32 {
        let c = g.config(proto, id);
        for &p in &wanted {
            let slot = &mut first_state_hit[p as usize];
            if slot.is_some() {
                continue;
            }
            let hit = match p {
                PropertyId::NoDeadlock => is_deadlock(proto, &c),
                _ => state_violates(p, &c),
            };
            if hit {
                *slot = Some(id);
            }
        }
        if want(PropertyId::FreeImpliesClear) && first_edge_hit.is_none() {
            for t in g.successors(id) {
                let role = RoleId(t.role as usize);
                if free_write_violates(proto, &c, role, t.edge as usize) {
                    first_edge_hit = Some((id, role, t.edge as usize));
                    break;
                }
            }
        }
    }

    let mut verdicts = Vec::with_capacity(wanted.len());
    for &p in &wanted {
        let verdict = match p {
            PropertyId::FreeImpliesClear => match first_edge_hit {
                Some((id, role, edge)) => {
                    let mut path = g.path_to(id);
                    path.push((role, edge));
                    Verdict::Fail(Box::new(Trace::from_path(proto, &path)))
                }
                None if g.truncated => Verdict::Bounded,
                None => Verdict::Pass,
            },
            PropertyId::TurnStable => check_turn_stability(proto, opts.state_cap)?,
            PropertyId::LockoutFreedom => liveness::check_on_graph(proto, &g).into_verdict(),
            _ => match first_state_hit[p as usize] {
                Some(id) => Verdict::Fail(Box::new(Trace::from_path(proto, &g.path_to(id)))),
                None if g.truncated => Verdict::Bounded,
                None => Verdict::Pass,
            },
        };
        verdicts.push((p, verdict));
    }

    let max_bypass = if opts.bypass { max_bypass(proto, opts.state_cap) } else { None };
    let bypass_truncated = opts.bypass && max_bypass.is_none();

    Ok(ExplorationReport {
        protocol: proto.name.clone(),
        n: proto.n(),
        states: g.len(),
        transitions: g.transitions,
        truncated: g.truncated,
        verdicts,
        max_bypass,
        bypass_truncated,
        wall_time: started.elapsed(),
    })
}

/// Replays a failing trace and confirms it exhibits a violation of `p`.
pub fn confirms_violation(proto: &ProtocolDefinition, trace: &Trace, p: PropertyId) -> Result<bool> {
    let configs = trace.replay(proto)?;
    let last = configs.last().expect("replay yields the initial configuration");
    Ok(match p {
        PropertyId::Mutex | PropertyId::ExtMutex | PropertyId::NoTwo351 => state_violates(p, last),
        PropertyId::NoDeadlock => is_deadlock(proto, last),
        PropertyId::FreeImpliesClear => match (trace.steps.last(), configs.len()) {
            (Some(step), len) if len >= 2 => {
                let aut = &proto.roles[step.role.0];
                let idx = aut.edge_by_id(&step.edge).expect("replayed edge exists");
                free_write_violates(proto, &configs[len - 2], step.role, idx)
            }
            _ => false,
        },
        PropertyId::TurnStable => monitors::trace_breaks_turn_stability(proto, trace, &configs),
        PropertyId::LockoutFreedom => liveness::lasso_is_fair_starvation(proto, trace, &configs),
    })
}
