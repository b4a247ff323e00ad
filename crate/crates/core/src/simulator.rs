//! Seeded random-scheduler runs with online safety monitors.
//!
//! Schedules come from `ChaCha8Rng::seed_from_u64(seed)`, so a run is fully
//! determined by the protocol, N, the options and the seed.

use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::explorer::{state_violates, PropertyId};
use crate::model::{
    apply_unchecked, enabled_indices, initial_configuration, Configuration, Family, Location, ProtocolDefinition,
    RoleId,
};
use crate::trace::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Pick among all enabled edges; exempt edges get a reduced weight.
    UniformEnabled,
    /// Poll roles cyclically; a polled role with only exempt edges enabled
    /// takes one with probability `min(exempt_weight, 1)`, otherwise passes.
    RoundRobinPoll,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Policy::UniformEnabled => "uniform-enabled",
            Policy::RoundRobinPoll => "round-robin-poll",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "uniform-enabled" => Ok(Policy::UniformEnabled),
            "round-robin-poll" => Ok(Policy::RoundRobinPoll),
            _ => Err(format!("unknown policy '{s}' (expected uniform-enabled or round-robin-poll)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulateOptions {
    pub steps: u64,
    pub seed: u64,
    pub policy: Policy,
    /// Weight of an exempt edge relative to a non-exempt one.
    pub exempt_weight: f64,
    /// Return the trace of the whole run, not only on a finding.
    pub record_trace: bool,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        SimulateOptions {
            steps: 10_000,
            seed: 0,
            policy: Policy::UniformEnabled,
            exempt_weight: 0.5,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Finding {
    Violation(PropertyId),
    /// No edge enabled while some role is not quiescent.
    Deadlock,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::Violation(p) => write!(f, "{p}"),
            Finding::Deadlock => f.write_str("deadlock"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stop {
    /// The step budget was used up.
    Budget,
    /// Nothing enabled and every role quiescent.
    Quiescent,
    Finding(Finding),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub seed: u64,
    pub steps: u64,
    pub cs_entries: Vec<u64>,
    pub max_bypass: Vec<u64>,
    /// `(step, finding)`; a run aborts at its first finding.
    pub violations: Vec<(u64, Finding)>,
    pub stop: Stop,
    pub final_configuration: Configuration,
}

impl RunStats {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub stats: RunStats,
    pub trace: Option<Trace>,
}

fn monitored(proto: &ProtocolDefinition) -> Vec<PropertyId> {
    match proto.family {
        Family::Symmetric => vec![PropertyId::Mutex, PropertyId::ExtMutex, PropertyId::NoTwo351],
        Family::Coordinated => vec![PropertyId::Mutex],
    }
}

pub fn simulate(proto: &ProtocolDefinition, opts: &SimulateOptions) -> SimulationResult {
    simulate_visiting(proto, opts, |_| {})
}

/// As [`simulate`], calling `visit` on every configuration the run passes
/// through, starting with the initial one.
pub fn simulate_visiting(
    proto: &ProtocolDefinition,
    opts: &SimulateOptions,
    mut visit: impl FnMut(&Configuration),
) -> SimulationResult {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let properties = monitored(proto);
    let n = proto.n();
    let mut c = initial_configuration(proto);
    visit(&c);
    let mut path: Vec<(RoleId, usize)> = Vec::new();
    let mut cs_entries = vec![0u64; n];
    let mut waiting_since: Vec<Option<u64>> = vec![None; n];
    let mut max_bypass = vec![0u64; n];
    let mut violations = Vec::new();
    let mut poll_next = 0usize;
    let mut stop = Stop::Budget;

    let mut steps = 0u64;
    while steps < opts.steps {
        let enabled = enabled_indices(proto, &c);
        let any_subject = enabled.iter().any(|&(r, i)| !proto.edge(r, i).is_exempt());
        if enabled.is_empty() || (!any_subject && opts.exempt_weight <= 0.0) {
            let quiescent = proto.roles.iter().zip(&c.pcs).all(|(a, pc)| a.quiescent.contains(*pc));
            stop = if quiescent {
                Stop::Quiescent
            } else {
                violations.push((steps, Finding::Deadlock));
                Stop::Finding(Finding::Deadlock)
            };
            break;
        }

        let (role, idx) = match opts.policy {
            Policy::UniformEnabled => {
                let weights =
                    enabled.iter().map(|&(r, i)| if proto.edge(r, i).is_exempt() { opts.exempt_weight } else { 1.0 });
                let dist = WeightedIndex::new(weights).expect("positive total weight");
                enabled[dist.sample(&mut rng)]
            }
            Policy::RoundRobinPoll => loop {
                let r = RoleId(poll_next);
                poll_next = (poll_next + 1) % proto.role_count();
                let mine: Vec<_> = enabled.iter().copied().filter(|(q, _)| *q == r).collect();
                if mine.is_empty() {
                    continue;
                }
                let subject: Vec<_> = mine.iter().copied().filter(|&(q, i)| !proto.edge(q, i).is_exempt()).collect();
                if !subject.is_empty() {
                    break subject[rng.gen_range(0..subject.len())];
                }
                if rng.gen_bool(opts.exempt_weight.clamp(0.0, 1.0)) {
                    break mine[rng.gen_range(0..mine.len())];
                }
            },
        };

        let edge = proto.edge(role, idx);
        let next = apply_unchecked(proto, &c, role, edge);
        steps += 1;
        path.push((role, idx));

        if let Some(pid) = proto.roles[role.0].kind.pid().map(usize::from) {
            let trying = proto.roles[role.0].trying;
            if !trying.contains(edge.from) && trying.contains(edge.to) {
                waiting_since[pid] = Some(0);
            }
            if edge.to == Location::Cs {
                cs_entries[pid] += 1;
                for (q, w) in waiting_since.iter_mut().enumerate() {
                    if let (true, Some(count)) = (q != pid, w.as_mut()) {
                        *count += 1;
                        max_bypass[q] = max_bypass[q].max(*count);
                    }
                }
                waiting_since[pid] = None;
            }
        }

        c = next;
        visit(&c);
        if let Some(&p) = properties.iter().find(|p| state_violates(**p, &c)) {
            violations.push((steps, Finding::Violation(p)));
            stop = Stop::Finding(Finding::Violation(p));
            break;
        }
    }

    let trace =
        (opts.record_trace || !violations.is_empty()).then(|| Trace::from_path(proto, &path).with_seed(opts.seed));
    SimulationResult {
        stats: RunStats { seed: opts.seed, steps, cs_entries, max_bypass, violations, stop, final_configuration: c },
        trace,
    }
}

/// Runs seeds `opts.seed .. opts.seed + runs` in parallel; results are in
/// seed order.
pub fn simulate_many(proto: &ProtocolDefinition, opts: &SimulateOptions, runs: u64) -> Vec<SimulationResult> {
    (0..runs)
        .into_par_iter()
        .map(|k| simulate(proto, &SimulateOptions { seed: opts.seed.wrapping_add(k), ..*opts }))
        .collect()
}

pub fn check_options(opts: &SimulateOptions) -> Result<()> {
    if opts.exempt_weight.is_finite() && opts.exempt_weight >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidOption(format!("exempt weight must be a non-negative number, got {}", opts.exempt_weight)))
    }
}
