//! Counterexample executions and their line-oriented file format.
//!
//! ```text
//! mutexlab-trace v1 protocol=<id> n=<int> seed=<int|none>
//! <step> <role> <edge-id> turn=<val> flags=<csv> pc=<location>
//! ...
//! cycle-start=<k>
//! ```
//!
//! Steps are numbered from 1. `turn` is rendered as a pid, `T` or `F`; flags as
//! `R`, `W` or `C`. The optional trailing `cycle-start` line marks a lasso: the
//! steps after the first `k` repeat forever. When no step follows `k` the
//! system stutters in the final configuration.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{
    apply_edge, initial_configuration, Configuration, FlagValue, Location, ProtocolDefinition, RoleId, SharedState,
    TurnValue,
};

pub const HEADER_MAGIC: &str = "mutexlab-trace";
pub const FORMAT_VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub index: usize,
    pub role: RoleId,
    pub edge: String,
    pub shared: SharedState,
    pub pc: Location,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub protocol: String,
    pub n: usize,
    pub seed: Option<u64>,
    pub initial: Configuration,
    pub steps: Vec<TraceStep>,
    /// Number of stem steps of a lasso; `None` for finite traces.
    pub cycle_start: Option<usize>,
}

impl Trace {
    /// Records the execution of `path` (role, edge index) from the initial
    /// configuration. Panics if a step is not enabled; callers pass paths taken
    /// from the state graph.
    pub(crate) fn from_path(proto: &ProtocolDefinition, path: &[(RoleId, usize)]) -> Trace {
        let initial = initial_configuration(proto);
        let mut c = initial.clone();
        let mut steps = Vec::with_capacity(path.len());
        for (i, &(role, idx)) in path.iter().enumerate() {
            let edge = proto.edge(role, idx);
            c = apply_edge(proto, &c, role, edge).expect("trace path follows enabled edges");
            steps.push(TraceStep {
                index: i + 1,
                role,
                edge: edge.id.clone(),
                shared: c.shared.clone(),
                pc: c.pc(role),
            });
        }
        Trace { protocol: proto.name.clone(), n: proto.n(), seed: None, initial, steps, cycle_start: None }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_lasso(&self) -> bool {
        self.cycle_start.is_some()
    }

    pub fn render(&self, proto: &ProtocolDefinition) -> String {
        let mut out = String::new();
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        let _ = writeln!(out, "{HEADER_MAGIC} {FORMAT_VERSION} protocol={} n={} seed={seed}", self.protocol, self.n);
        for s in &self.steps {
            let _ = writeln!(
                out,
                "{} {} {} turn={} flags={} pc={}",
                s.index,
                proto.role_name(s.role),
                s.edge,
                s.shared.turn.short(),
                s.shared.flags_csv(),
                s.pc
            );
        }
        if let Some(k) = self.cycle_start {
            let _ = writeln!(out, "cycle-start={k}");
        }
        out
    }

    /// Parses a rendered trace. The header must name `proto` and its N.
    pub fn parse(text: &str, proto: &ProtocolDefinition) -> Result<Trace> {
        let err = |line: usize, message: String| Error::TraceParse { line, message };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty trace".into()))?;
        let mut fields = header.split(' ');
        if fields.next() != Some(HEADER_MAGIC) || fields.next() != Some(FORMAT_VERSION) {
            return Err(err(1, format!("expected '{HEADER_MAGIC} {FORMAT_VERSION}' header")));
        }
        let mut protocol = None;
        let mut n = None;
        let mut seed = None;
        for f in fields {
            match f.split_once('=') {
                Some(("protocol", v)) => protocol = Some(v.to_string()),
                Some(("n", v)) => n = Some(v.parse::<usize>().map_err(|e| err(1, format!("n: {e}")))?),
                Some(("seed", "none")) => seed = None,
                Some(("seed", v)) => seed = Some(v.parse::<u64>().map_err(|e| err(1, format!("seed: {e}")))?),
                _ => return Err(err(1, format!("unexpected header field '{f}'"))),
            }
        }
        let protocol = protocol.ok_or_else(|| err(1, "missing protocol".into()))?;
        let n = n.ok_or_else(|| err(1, "missing n".into()))?;
        if protocol != proto.name || n != proto.n() {
            return Err(err(1, format!("trace is for {protocol} n={n}, not {} n={}", proto.name, proto.n())));
        }

        let mut steps = Vec::new();
        let mut cycle_start = None;
        for (ln, line) in lines {
            if line.is_empty() {
                continue;
            }
            if let Some(k) = line.strip_prefix("cycle-start=") {
                cycle_start = Some(k.parse::<usize>().map_err(|e| err(ln, format!("cycle-start: {e}")))?);
                continue;
            }
            if cycle_start.is_some() {
                return Err(err(ln, "step after cycle-start".into()));
            }
            let parts: Vec<&str> = line.split(' ').collect();
            let [index, role, edge, turn, flags, pc] = parts[..] else {
                return Err(err(ln, format!("expected 6 fields, got {}", parts.len())));
            };
            let index = index.parse::<usize>().map_err(|e| err(ln, format!("step: {e}")))?;
            if index != steps.len() + 1 {
                return Err(err(ln, format!("step {index} out of order")));
            }
            let role = proto.role_by_name(role).ok_or_else(|| err(ln, format!("unknown role '{role}'")))?;
            fn value<'a>(s: &'a str, key: &str, ln: usize) -> Result<&'a str> {
                s.strip_prefix(key)
                    .and_then(|v| v.strip_prefix('='))
                    .ok_or_else(|| Error::TraceParse { line: ln, message: format!("expected {key}=...") })
            }
            let turn_raw = value(turn, "turn", ln)?;
            let turn = TurnValue::parse_short(turn_raw).ok_or_else(|| err(ln, format!("bad turn '{turn_raw}'")))?;
            let flags = value(flags, "flags", ln)?
                .split(',')
                .map(|f| FlagValue::parse_short(f).ok_or_else(|| err(ln, format!("bad flag '{f}'"))))
                .collect::<Result<Vec<_>>>()?;
            let pc_raw = value(pc, "pc", ln)?;
            let pc = Location::from_name(pc_raw).ok_or_else(|| err(ln, format!("bad location '{pc_raw}'")))?;
            steps.push(TraceStep { index, role, edge: edge.to_string(), shared: SharedState { turn, flags }, pc });
        }
        if cycle_start.is_some_and(|k| k > steps.len()) {
            return Err(err(0, "cycle-start beyond last step".into()));
        }
        Ok(Trace { protocol, n, seed, initial: initial_configuration(proto), steps, cycle_start })
    }

    /// Re-executes every step through [`apply_edge`] and checks the recorded
    /// snapshots. Returns the initial configuration followed by the
    /// configuration after each step.
    pub fn replay(&self, proto: &ProtocolDefinition) -> Result<Vec<Configuration>> {
        let mut c = initial_configuration(proto);
        if c != self.initial {
            return Err(Error::Replay { step: 0, message: "initial configuration differs".into() });
        }
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push(c.clone());
        for s in &self.steps {
            let aut = proto
                .roles
                .get(s.role.0)
                .ok_or_else(|| Error::Replay { step: s.index, message: "unknown role".into() })?;
            let idx = aut
                .edge_by_id(&s.edge)
                .ok_or_else(|| Error::Replay { step: s.index, message: format!("unknown edge {}", s.edge) })?;
            c = apply_edge(proto, &c, s.role, &aut.edges[idx])
                .map_err(|e| Error::Replay { step: s.index, message: e.to_string() })?;
            if c.shared != s.shared || c.pc(s.role) != s.pc {
                return Err(Error::Replay {
                    step: s.index,
                    message: format!("recorded {} but replay gives {}", s.shared.flags_csv(), c.compact()),
                });
            }
            out.push(c.clone());
        }
        Ok(out)
    }
}
