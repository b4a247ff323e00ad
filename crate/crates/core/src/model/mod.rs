//! Shared variables, automata, configurations and the interleaving step
//! semantics common to every protocol.

pub mod expr;
mod values;

use std::fmt;

use crate::error::{Error, Result};

pub use expr::{Effect, FlagIndex, Guard, SharedVar, TurnTerm, VarRef};
pub use values::{election_region, extended_cs, FlagValue, Locals, Location, LocationSet, SharedState, TurnValue};

use expr::EvalCtx;

/// Upper bound on N; role sets are bitmasks and locals are packed into bytes.
pub const MAX_PROCESSES: usize = 16;

/// Index of a role in [`ProtocolDefinition::roles`]. Processes come first
/// (role `i` is process `p_i`), the coordinator, when present, last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RoleId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoleKind {
    Process(u8),
    Coordinator,
}

impl RoleKind {
    pub fn pid(self) -> Option<u8> {
        match self {
            RoleKind::Process(i) => Some(i),
            RoleKind::Coordinator => None,
        }
    }
}

impl fmt::Display for RoleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoleKind::Process(i) => write!(f, "p{i}"),
            RoleKind::Coordinator => f.write_str("coord"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fairness {
    Subject,
    /// Voluntary action; weak fairness never forces it.
    Exempt,
}

/// Atomic guarded transition of one automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub from: Location,
    pub to: Location,
    pub guard: Guard,
    pub effects: Vec<Effect>,
    pub fairness: Fairness,
}

impl Edge {
    pub fn new(from: Location, to: Location) -> Self {
        Edge {
            id: format!("{from}->{to}"),
            from,
            to,
            guard: Guard::True,
            effects: Vec::new(),
            fairness: Fairness::Subject,
        }
    }

    pub fn guard(mut self, guard: Guard) -> Self {
        self.guard = guard;
        self
    }

    pub fn effect(mut self, effect: Effect) -> Self {
        self.effects.push(effect);
        self
    }

    pub fn exempt(mut self) -> Self {
        self.fairness = Fairness::Exempt;
        self
    }

    /// Appends a `/suffix` to the id to tell parallel edges apart.
    pub fn tagged(mut self, suffix: &str) -> Self {
        self.id = format!("{}/{suffix}", self.id);
        self
    }

    pub fn is_exempt(&self) -> bool {
        self.fairness == Fairness::Exempt
    }

    /// The value this edge stores into `turn`, if any.
    pub fn turn_write(&self) -> Option<TurnTerm> {
        self.effects.iter().find_map(Effect::turn_term)
    }
}

/// One role's automaton.
#[derive(Debug, Clone)]
pub struct Automaton {
    pub kind: RoleKind,
    pub initial: Location,
    /// Sorted by id; enabled-edge order follows this order.
    pub edges: Vec<Edge>,
    /// Locations in which the role counts as trying to enter the critical section.
    pub trying: LocationSet,
    /// Locations where having only exempt edges enabled is acceptable.
    pub quiescent: LocationSet,
    outgoing: Vec<Vec<u16>>,
}

impl Automaton {
    pub fn new(
        kind: RoleKind,
        initial: Location,
        mut edges: Vec<Edge>,
        trying: LocationSet,
        quiescent: LocationSet,
    ) -> Self {
        edges.sort_by(|a, b| a.id.cmp(&b.id));
        let mut outgoing = vec![Vec::new(); Location::ALL.len()];
        for (idx, e) in edges.iter().enumerate() {
            outgoing[e.from.code() as usize].push(idx as u16);
        }
        Automaton { kind, initial, edges, trying, quiescent, outgoing }
    }

    pub fn locations(&self) -> LocationSet {
        let mut set = LocationSet::of(&[self.initial]);
        for e in &self.edges {
            set.insert(e.from);
            set.insert(e.to);
        }
        set
    }

    /// Indices into [`Automaton::edges`] of the edges leaving `loc`.
    pub fn outgoing(&self, loc: Location) -> &[u16] {
        &self.outgoing[loc.code() as usize]
    }

    pub fn edge_by_id(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }
}

/// Bitmask of roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct RoleSet(pub u32);

impl RoleSet {
    pub fn all(roles: usize) -> Self {
        RoleSet(((1u64 << roles) - 1) as u32)
    }

    pub fn only(role: RoleId) -> Self {
        RoleSet(1 << role.0)
    }

    pub fn contains(self, role: RoleId) -> bool {
        self.0 & (1 << role.0) != 0
    }

    pub fn is_singleton(self, role: RoleId) -> bool {
        self.0 == 1 << role.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Access {
    pub readers: RoleSet,
    pub writers: RoleSet,
}

/// Who may read and write each shared variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permissions {
    pub turn: Access,
    pub flags: Vec<Access>,
}

impl Permissions {
    pub fn of(&self, var: SharedVar) -> Access {
        match var {
            SharedVar::Turn => self.turn,
            SharedVar::Flag(i) => self.flags[i as usize],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Processes plus a coordinator; `turn` ranges over pids and THINKING.
    Coordinated,
    /// Processes only; `turn` additionally takes FREE.
    Symmetric,
}

#[derive(Debug, Clone)]
pub struct ProtocolDefinition {
    pub name: String,
    pub family: Family,
    n: u8,
    pub roles: Vec<Automaton>,
    pub permissions: Permissions,
    pub initial_turn: TurnValue,
}

impl ProtocolDefinition {
    pub fn new(
        name: impl Into<String>,
        family: Family,
        n: usize,
        roles: Vec<Automaton>,
        permissions: Permissions,
        initial_turn: TurnValue,
    ) -> Result<Self> {
        check_process_count(n)?;
        Ok(ProtocolDefinition { name: name.into(), family, n: n as u8, roles, permissions, initial_turn })
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn role_count(&self) -> usize {
        self.roles.len()
    }

    pub fn role_name(&self, role: RoleId) -> String {
        self.roles[role.0].kind.to_string()
    }

    pub fn role_by_name(&self, name: &str) -> Option<RoleId> {
        self.roles.iter().position(|a| a.kind.to_string() == name).map(RoleId)
    }

    /// Roles that are processes competing for the critical section.
    pub fn processes(&self) -> impl Iterator<Item = RoleId> + '_ {
        self.roles.iter().enumerate().filter(|(_, a)| matches!(a.kind, RoleKind::Process(_))).map(|(i, _)| RoleId(i))
    }

    pub fn edge(&self, role: RoleId, idx: usize) -> &Edge {
        &self.roles[role.0].edges[idx]
    }

    /// Byte length of [`Configuration::encode`] for this protocol.
    pub fn encoded_len(&self) -> usize {
        self.roles.len() * (1 + Locals::WIDTH) + 1 + self.n()
    }
}

pub(crate) fn check_process_count(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::EmptySystem)
    } else if n > MAX_PROCESSES {
        Err(Error::TooManyProcesses(n))
    } else {
        Ok(())
    }
}

/// One global state: every role's control location and locals plus the
/// shared variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub shared: SharedState,
    pub pcs: Vec<Location>,
    pub locals: Vec<Locals>,
}

impl Configuration {
    pub fn pc(&self, role: RoleId) -> Location {
        self.pcs[role.0]
    }

    /// Canonical byte encoding.
    ///
    /// Layout: one byte per role pc (`Location::code`) in role order; then per
    /// role six locals as signed bytes in the order `p`, `nCandidates`,
    /// `minCandidate`, `j`, `k`, `nextTurn`; then `turn`; then one byte per
    /// flag. `turn` and `nextTurn` use 0..N-1 for pids, 254 for THINKING and
    /// 255 for FREE. Flags are 0 = REMAINDER, 1 = WAITING, 2 = CANDIDATE.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.pcs.len() * 7 + 1 + self.shared.flags.len());
        self.encode_into(&mut out);
        out
    }

    pub fn encode_into(&self, out: &mut Vec<u8>) {
        out.extend(self.pcs.iter().map(|l| l.code()));
        for l in &self.locals {
            out.extend_from_slice(&[l.p, l.n_candidates, l.min_candidate as u8, l.j as u8, l.k, l.next_turn.code()]);
        }
        out.push(self.shared.turn.code());
        out.extend(self.shared.flags.iter().map(|f| *f as u8));
    }

    pub fn decode(proto: &ProtocolDefinition, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != proto.encoded_len() {
            return Err(Error::Decode(format!("expected {} bytes, got {}", proto.encoded_len(), bytes.len())));
        }
        let roles = proto.role_count();
        let pcs = bytes[..roles]
            .iter()
            .map(|b| Location::from_code(*b).ok_or_else(|| Error::Decode(format!("bad location {b}"))))
            .collect::<Result<Vec<_>>>()?;
        let locals = bytes[roles..roles * (1 + Locals::WIDTH)]
            .chunks_exact(Locals::WIDTH)
            .map(|c| Locals {
                p: c[0],
                n_candidates: c[1],
                min_candidate: c[2] as i8,
                j: c[3] as i8,
                k: c[4],
                next_turn: TurnValue::from_code(c[5]),
            })
            .collect();
        let rest = &bytes[roles * (1 + Locals::WIDTH)..];
        let turn = TurnValue::from_code(rest[0]);
        let flags = rest[1..]
            .iter()
            .map(|b| FlagValue::from_code(*b).ok_or_else(|| Error::Decode(format!("bad flag {b}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Configuration { shared: SharedState { turn, flags }, pcs, locals })
    }

    /// `turn=…|flags=…|pcs=…`
    pub fn compact(&self) -> String {
        let pcs: Vec<&str> = self.pcs.iter().map(|l| l.name()).collect();
        format!("turn={}|flags={}|pcs={}", self.shared.turn.short(), self.shared.flags_csv(), pcs.join(","))
    }

    /// The locals each family actually uses: the coordinator cursor, or
    /// every process's election and exit-scan variables.
    pub fn locals_label(&self, proto: &ProtocolDefinition) -> String {
        match proto.family {
            Family::Coordinated => format!("coord:p={}", self.locals[proto.role_count() - 1].p),
            Family::Symmetric => self
                .locals
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    format!(
                        "p{i}:nc={},min={},j={},k={},next={}",
                        l.n_candidates,
                        l.min_candidate,
                        l.j,
                        l.k,
                        l.next_turn.short()
                    )
                })
                .collect::<Vec<_>>()
                .join(";"),
        }
    }

    pub fn count_at(&self, set: LocationSet) -> usize {
        self.pcs.iter().filter(|l| set.contains(**l)).count()
    }
}

pub fn initial_configuration(proto: &ProtocolDefinition) -> Configuration {
    Configuration {
        shared: SharedState { turn: proto.initial_turn, flags: vec![FlagValue::Remainder; proto.n()] },
        pcs: proto.roles.iter().map(|a| a.initial).collect(),
        locals: vec![Locals::default(); proto.role_count()],
    }
}

pub(crate) fn guard_holds(proto: &ProtocolDefinition, c: &Configuration, role: RoleId, e: &Edge) -> bool {
    let cx = EvalCtx { own: proto.roles[role.0].kind.pid(), n: proto.n, locals: &c.locals[role.0], shared: &c.shared };
    e.guard.eval(&cx)
}

/// Calls `f` for each enabled edge, by role index then edge id.
pub(crate) fn for_each_enabled(proto: &ProtocolDefinition, c: &Configuration, mut f: impl FnMut(RoleId, usize)) {
    for (r, aut) in proto.roles.iter().enumerate() {
        let role = RoleId(r);
        for &idx in aut.outgoing(c.pcs[r]) {
            if guard_holds(proto, c, role, &aut.edges[idx as usize]) {
                f(role, idx as usize);
            }
        }
    }
}

pub(crate) fn enabled_indices(proto: &ProtocolDefinition, c: &Configuration) -> Vec<(RoleId, usize)> {
    let mut out = Vec::new();
    for_each_enabled(proto, c, |r, i| out.push((r, i)));
    out
}

/// Edges enabled in `c`, ordered by role index then edge id.
pub fn enabled_edges<'p>(proto: &'p ProtocolDefinition, c: &Configuration) -> Vec<(RoleId, &'p Edge)> {
    enabled_indices(proto, c).into_iter().map(|(r, i)| (r, proto.edge(r, i))).collect()
}

pub(crate) fn apply_unchecked(proto: &ProtocolDefinition, c: &Configuration, role: RoleId, e: &Edge) -> Configuration {
    let mut next = c.clone();
    let own = proto.roles[role.0].kind.pid();
    for eff in &e.effects {
        eff.apply(own, proto.n, &mut next.locals[role.0], &mut next.shared);
    }
    next.pcs[role.0] = e.to;
    next
}

/// Fires `e` for `role`, returning the successor configuration.
pub fn apply_edge(proto: &ProtocolDefinition, c: &Configuration, role: RoleId, e: &Edge) -> Result<Configuration> {
    let enabled = role.0 < proto.role_count()
        && c.pcs[role.0] == e.from
        && proto.roles[role.0].edges.contains(e)
        && guard_holds(proto, c, role, e);
    if !enabled {
        return Err(Error::EdgeNotEnabled { role: role.0.to_string(), edge: e.id.clone() });
    }
    Ok(apply_unchecked(proto, c, role, e))
}
