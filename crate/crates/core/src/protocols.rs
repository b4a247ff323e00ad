//! The shipped protocols, known-bad mutants and the static access-discipline
//! validator.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{
    check_process_count, election_region, Access, Automaton, Edge, Effect, Family, FlagIndex, FlagValue, Guard,
    Location, LocationSet, Permissions, ProtocolDefinition, RoleId, RoleKind, RoleSet, SharedVar, TurnTerm, TurnValue,
    VarRef,
};

use FlagValue::{Candidate, Remainder, Waiting};
use Location::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtocolId {
    Asym,
    AsymSw,
    Sym,
    AsymSwNoExitWait,
    SymNoCandidate,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 5] = [
        ProtocolId::Asym,
        ProtocolId::AsymSw,
        ProtocolId::Sym,
        ProtocolId::AsymSwNoExitWait,
        ProtocolId::SymNoCandidate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolId::Asym => "asym",
            ProtocolId::AsymSw => "asym-sw",
            ProtocolId::Sym => "sym",
            ProtocolId::AsymSwNoExitWait => "asym-sw-noexitwait",
            ProtocolId::SymNoCandidate => "sym-nocandidate",
        }
    }

    pub fn is_mutant(self) -> bool {
        matches!(self, ProtocolId::AsymSwNoExitWait | ProtocolId::SymNoCandidate)
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProtocolId::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| Error::UnknownProtocol(s.to_string()))
    }
}

/// Builds any registered protocol.
pub fn build(id: ProtocolId, n: usize) -> Result<ProtocolDefinition> {
    match id {
        ProtocolId::Asym => build_asym(n),
        ProtocolId::AsymSw => build_asym_sw(n),
        ProtocolId::Sym => build_sym(n),
        ProtocolId::AsymSwNoExitWait | ProtocolId::SymNoCandidate => build_mutant(id, n),
    }
}

fn single_writer_flags(n: usize) -> Vec<Access> {
    (0..n).map(|i| Access { readers: RoleSet::all(n + 1), writers: RoleSet::only(RoleId(i)) }).collect()
}

fn asym_process(i: u8, single_writer: bool) -> Automaton {
    let release = if single_writer {
        // Wait for the coordinator to withdraw the turn instead of writing it.
        Edge::new(L3, L4).guard(Guard::TurnIsNot(TurnTerm::Own))
    } else {
        Edge::new(L3, L4).effect(Effect::SetTurn(TurnTerm::Thinking))
    };
    let edges = vec![
        Edge::new(L1, L2).effect(Effect::SetFlag(FlagIndex::Own, Waiting)).exempt(),
        Edge::new(L2, Cs).guard(Guard::TurnIs(TurnTerm::Own)),
        Edge::new(Cs, L3).effect(Effect::SetFlag(FlagIndex::Own, Remainder)),
        release,
        Edge::new(L4, L1).exempt(),
    ];
    Automaton::new(RoleKind::Process(i), L1, edges, LocationSet::of(&[L2]), LocationSet::of(&[L1, L4]))
}

fn asym_coordinator(single_writer: bool) -> Automaton {
    let mut edges = vec![
        Edge::new(L1, L2).effect(Effect::ResetCursor),
        Edge::new(L2, L2_1).guard(Guard::FlagIs(FlagIndex::Cursor, Waiting)),
        Edge::new(L2, L3).guard(Guard::FlagIsNot(FlagIndex::Cursor, Waiting)),
        Edge::new(L2_1, L2_2).effect(Effect::SetTurn(TurnTerm::Cursor)),
        Edge::new(L3, L2).effect(Effect::AdvanceCursor),
    ];
    if single_writer {
        edges.push(Edge::new(L2_2, L2_3).guard(Guard::FlagIs(FlagIndex::Cursor, Remainder)));
        edges.push(Edge::new(L2_3, L3).effect(Effect::SetTurn(TurnTerm::Thinking)));
    } else {
        edges.push(Edge::new(L2_2, L3).guard(Guard::TurnIs(TurnTerm::Thinking)));
    }
    Automaton::new(RoleKind::Coordinator, L1, edges, LocationSet::EMPTY, LocationSet::EMPTY)
}

fn coordinated(name: &str, n: usize, single_writer: bool) -> Result<ProtocolDefinition> {
    check_process_count(n)?;
    let mut roles: Vec<Automaton> = (0..n as u8).map(|i| asym_process(i, single_writer)).collect();
    roles.push(asym_coordinator(single_writer));
    let all = RoleSet::all(n + 1);
    let turn_writers = if single_writer { RoleSet::only(RoleId(n)) } else { all };
    let permissions =
        Permissions { turn: Access { readers: all, writers: turn_writers }, flags: single_writer_flags(n) };
    ProtocolDefinition::new(name, Family::Coordinated, n, roles, permissions, TurnValue::Thinking)
}

/// Asymmetric algorithm: processes announce themselves in `flag`, a
/// coordinator grants `turn` round-robin and waits for it to come back as
/// THINKING.
pub fn build_asym(n: usize) -> Result<ProtocolDefinition> {
    coordinated(ProtocolId::Asym.as_str(), n, false)
}

/// Asymmetric algorithm where only the coordinator writes `turn`.
pub fn build_asym_sw(n: usize) -> Result<ProtocolDefinition> {
    coordinated(ProtocolId::AsymSw.as_str(), n, true)
}

fn sym_entry_common() -> Vec<Edge> {
    use Guard::*;
    vec![
        Edge::new(L1, L2).effect(Effect::SetFlag(FlagIndex::Own, Waiting)).exempt(),
        Edge::new(L2, L3).guard(TurnIsNot(TurnTerm::Thinking)),
        Edge::new(L3, L4).guard(TurnIsNot(TurnTerm::Free)),
    ]
}

fn sym_election() -> Vec<Edge> {
    use Guard::*;
    vec![
        Edge::new(L3, L3_1).guard(TurnIs(TurnTerm::Free)),
        Edge::new(L3_1, L3_2).effect(Effect::SetFlag(FlagIndex::Own, Candidate)),
        Edge::new(L3_2, L3_3).guard(And(vec![TurnIs(TurnTerm::Free), FlagIs(FlagIndex::Own, Candidate)])),
        Edge::new(L3_2, L3_7).guard(Or(vec![TurnIsNot(TurnTerm::Free), FlagIsNot(FlagIndex::Own, Candidate)])),
        Edge::new(L3_3, L3_4).effect(Effect::BeginCandidateScan),
        Edge::new(L3_4, L3_4_1).guard(And(vec![ScanPending, FlagIs(FlagIndex::ScanJ, Candidate)])),
        Edge::new(L3_4, L3_4_2).guard(And(vec![ScanPending, FlagIsNot(FlagIndex::ScanJ, Candidate)])),
        Edge::new(L3_4_1, L3_4_2).effect(Effect::CountCandidate),
        Edge::new(L3_4_2, L3_4).effect(Effect::StepCandidateScan),
        Edge::new(L3_4, L3_5).guard(ScanDone),
        Edge::new(L3_5, L3_5_1).guard(And(vec![TurnIs(TurnTerm::Free), CandidatesEq(1)])),
        Edge::new(L3_5, L3_5_2).guard(Or(vec![TurnIsNot(TurnTerm::Free), CandidatesNe(1)])),
        Edge::new(L3_5_1, L3_5_2).effect(Effect::SetTurn(TurnTerm::Own)),
        Edge::new(L3_5_2, L3_6).guard(Or(vec![TurnIsNot(TurnTerm::Free), MinCandidateBelowOwn])),
        Edge::new(L3_5_2, L3_2).guard(And(vec![TurnIs(TurnTerm::Free), MinCandidateNotBelowOwn])),
        Edge::new(L3_6, L3_2).effect(Effect::SetFlag(FlagIndex::Own, Waiting)),
        Edge::new(L3_7, L4).effect(Effect::SetFlag(FlagIndex::Own, Waiting)),
    ]
}

fn sym_critical_and_exit() -> Vec<Edge> {
    use Guard::*;
    vec![
        Edge::new(L4, Cs).guard(TurnIs(TurnTerm::Own)),
        Edge::new(Cs, L5).effect(Effect::SetTurn(TurnTerm::Thinking)),
        Edge::new(L5, L5_1).effect(Effect::SetFlag(FlagIndex::Own, Remainder)),
        Edge::new(L5_1, L6).effect(Effect::BeginExitScan),
        Edge::new(L6, L6_1).guard(And(vec![
            NextTurnIs(TurnTerm::Thinking),
            ExitScanPending,
            FlagIsNot(FlagIndex::ExitOffset, Remainder),
        ])),
        Edge::new(L6, L6_2).guard(And(vec![
            NextTurnIs(TurnTerm::Thinking),
            ExitScanPending,
            FlagIs(FlagIndex::ExitOffset, Remainder),
        ])),
        Edge::new(L6_1, L6_2).effect(Effect::PickExitCandidate),
        Edge::new(L6_2, L6).effect(Effect::StepExitScan),
        Edge::new(L6, L6_3).guard(Or(vec![NextTurnIsNot(TurnTerm::Thinking), ExitScanDone])),
        Edge::new(L6_3, L8)
            .tagged("free")
            .guard(NextTurnIs(TurnTerm::Thinking))
            .effect(Effect::SetTurn(TurnTerm::Free)),
        Edge::new(L6_3, L8)
            .tagged("next")
            .guard(NextTurnIsNot(TurnTerm::Thinking))
            .effect(Effect::SetTurn(TurnTerm::NextTurn)),
        Edge::new(L8, L1).exempt(),
    ]
}

fn symmetric(name: &str, n: usize, election: fn() -> Vec<Edge>) -> Result<ProtocolDefinition> {
    check_process_count(n)?;
    let mut trying = election_region();
    trying.insert(L2);
    let roles = (0..n as u8)
        .map(|i| {
            let mut edges = sym_entry_common();
            edges.extend(election());
            edges.extend(sym_critical_and_exit());
            Automaton::new(RoleKind::Process(i), L1, edges, trying, LocationSet::of(&[L1, L8]))
        })
        .collect();
    let all = RoleSet::all(n);
    let flags = (0..n).map(|i| Access { readers: all, writers: RoleSet::only(RoleId(i)) }).collect();
    let permissions = Permissions { turn: Access { readers: all, writers: all }, flags };
    ProtocolDefinition::new(name, Family::Symmetric, n, roles, permissions, TurnValue::Free)
}

/// Symmetric algorithm: no coordinator; a process leaving the critical
/// section elects the next waiting process in circular order, or sets `turn`
/// to FREE so that arriving processes run a candidate election.
pub fn build_sym(n: usize) -> Result<ProtocolDefinition> {
    symmetric(ProtocolId::Sym.as_str(), n, sym_election)
}

fn no_candidate_election() -> Vec<Edge> {
    vec![
        Edge::new(L3, L3_5_1).guard(Guard::TurnIs(TurnTerm::Free)),
        Edge::new(L3_5_1, L3_5_2).effect(Effect::SetTurn(TurnTerm::Own)),
        Edge::new(L3_5_2, L4),
    ]
}

/// Known-bad variants used as negative controls.
///
/// `asym-sw-noexitwait` lets a process leave without waiting for the
/// coordinator to withdraw its turn. `sym-nocandidate` replaces the candidate
/// election with an immediate self-grant whenever `turn` is FREE.
pub fn build_mutant(id: ProtocolId, n: usize) -> Result<ProtocolDefinition> {
    match id {
        ProtocolId::AsymSwNoExitWait => {
            let mut proto = coordinated(id.as_str(), n, true)?;
            for aut in proto.roles.iter_mut().filter(|a| a.kind != RoleKind::Coordinator) {
                let mut edges = aut.edges.clone();
                let release = edges.iter_mut().find(|e| e.from == L3).expect("exit edge");
                release.guard = Guard::True;
                *aut = Automaton::new(aut.kind, aut.initial, edges, aut.trying, aut.quiescent);
            }
            Ok(proto)
        }
        ProtocolId::SymNoCandidate => symmetric(id.as_str(), n, no_candidate_election),
        other => Err(Error::NotAMutant(other.to_string())),
    }
}

/// The asymmetric protocol with the coordinator's `3->2` edge removed, so the
/// coordinator halts after its first pass. Not registered; it exists to show
/// that the liveness checker rejects an obviously starving system.
pub fn build_stuck_coordinator(n: usize) -> Result<ProtocolDefinition> {
    let mut proto = build_asym(n)?;
    proto.name = "asym-stuckcoord".into();
    let coord = proto.roles.last_mut().expect("coordinator");
    let edges = coord.edges.iter().filter(|e| e.id != "3->2").cloned().collect();
    *coord = Automaton::new(coord.kind, coord.initial, edges, coord.trying, coord.quiescent);
    Ok(proto)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AccessKind {
    Read,
    Write,
}

impl fmt::Display for AccessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AccessKind::Read => "read",
            AccessKind::Write => "write",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessViolation {
    pub role: RoleId,
    pub edge: String,
    pub variable: SharedVar,
    pub kind: AccessKind,
}

impl fmt::Display for AccessViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "role {} edge {} may not {} {}", self.role.0, self.edge, self.kind, self.variable)
    }
}

/// Every guard read and effect write checked against the declared
/// permissions. Indirect indices (`flag[p]`, `flag[j]`, ...) are checked for
/// every cell they can denote.
pub fn validate_access_discipline(proto: &ProtocolDefinition) -> Vec<AccessViolation> {
    let n = proto.n() as u8;
    let mut out = Vec::new();
    for (r, aut) in proto.roles.iter().enumerate() {
        let role = RoleId(r);
        let own = aut.kind.pid();
        for e in &aut.edges {
            let reads = e.guard.reads().into_iter().map(|v| (v, AccessKind::Read));
            let writes = e.effects.iter().filter_map(|x| x.writes()).map(|v| (v, AccessKind::Write));
            for (var, kind) in reads.chain(writes) {
                for target in var.targets(own, n) {
                    let access = proto.permissions.of(target);
                    let allowed = match kind {
                        AccessKind::Read => access.readers.contains(role),
                        AccessKind::Write => access.writers.contains(role),
                    };
                    if !allowed {
                        out.push(AccessViolation { role, edge: e.id.clone(), variable: target, kind });
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GranularityViolation {
    pub role: RoleId,
    pub edge: String,
    pub reason: String,
}

/// Checks the one-event-one-access granularity: a guard reads at most one
/// shared variable the role does not own, an effect writes at most one shared
/// variable, and no edge both reads a foreign variable and writes another.
pub fn validate_granularity(proto: &ProtocolDefinition) -> Vec<GranularityViolation> {
    let n = proto.n() as u8;
    let mut out = Vec::new();
    for (r, aut) in proto.roles.iter().enumerate() {
        let role = RoleId(r);
        let own = aut.kind.pid();
        let owned = |v: VarRef| v.targets(own, n).iter().all(|t| proto.permissions.of(*t).writers.is_singleton(role));
        for e in &aut.edges {
            let foreign: Vec<VarRef> = e.guard.reads().into_iter().filter(|v| !owned(*v)).collect();
            let mut writes: Vec<VarRef> = e.effects.iter().filter_map(|x| x.writes()).collect();
            writes.dedup();
            let mut fail = |reason: String| out.push(GranularityViolation { role, edge: e.id.clone(), reason });
            if foreign.len() > 1 {
                fail(format!("guard reads {} foreign shared variables", foreign.len()));
            }
            if writes.len() > 1 {
                fail(format!("effect writes {} shared variables", writes.len()));
            }
            if let (Some(read), Some(write)) = (foreign.first(), writes.first()) {
                if read != write {
                    fail("guard reads one shared variable and effect writes another".into());
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge<'a>(p: &'a ProtocolDefinition, role: usize, id: &str) -> &'a Edge {
        let aut = &p.roles[role];
        &aut.edges[aut.edge_by_id(id).unwrap_or_else(|| panic!("no edge {id}"))]
    }

    #[test]
    fn asym_edge_counts() {
        let p = build_asym(2).unwrap();
        assert_eq!(p.roles.len(), 3);
        assert_eq!(p.roles[0].edges.len(), 5);
        assert_eq!(p.roles[2].edges.len(), 6);
    }

    #[test]
    fn asym_entry_waits_for_own_turn() {
        let p = build_asym(2).unwrap();
        assert_eq!(edge(&p, 1, "2->CS").guard, Guard::TurnIs(TurnTerm::Own));
    }

    #[test]
    fn asym_flag_writers_are_owners() {
        let p = build_asym(2).unwrap();
        assert_eq!(p.permissions.flags[0].writers, RoleSet::only(RoleId(0)));
        assert_eq!(p.permissions.turn.writers, RoleSet::all(3));
    }

    #[test]
    fn asym_sw_exit_waits_without_writing() {
        let p = build_asym_sw(2).unwrap();
        let e = edge(&p, 0, "3->4");
        assert!(e.effects.is_empty());
        assert_eq!(e.guard, Guard::TurnIsNot(TurnTerm::Own));
        let c = edge(&p, 2, "2.2->2.3");
        assert_eq!(c.guard, Guard::FlagIs(FlagIndex::Cursor, Remainder));
        assert!(p.roles[2].edge_by_id("2.2->3").is_none());
    }

    #[test]
    fn asym_sw_turn_written_only_by_coordinator() {
        for n in 1..=4 {
            let p = build_asym_sw(n).unwrap();
            assert!(validate_access_discipline(&p).is_empty());
            for aut in p.roles.iter().filter(|a| a.kind != RoleKind::Coordinator) {
                assert!(aut.edges.iter().all(|e| e.turn_write().is_none()));
            }
        }
    }

    #[test]
    fn shipped_protocols_are_clean() {
        for id in ProtocolId::ALL {
            for n in 1..=4 {
                let p = build(id, n).unwrap();
                assert_eq!(validate_access_discipline(&p), vec![], "{id} n={n}");
                assert_eq!(validate_granularity(&p), vec![], "{id} n={n}");
            }
        }
    }

    #[test]
    fn seeded_foreign_flag_write_is_reported() {
        let mut p = build_asym(3).unwrap();
        let aut = &p.roles[0];
        let mut edges = aut.edges.clone();
        edges.push(Edge::new(L4, L1).tagged("bad").effect(Effect::SetFlag(FlagIndex::Fixed(1), Waiting)));
        p.roles[0] = Automaton::new(aut.kind, aut.initial, edges, aut.trying, aut.quiescent);
        let v = validate_access_discipline(&p);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].variable, SharedVar::Flag(1));
        assert_eq!(v[0].kind, AccessKind::Write);
        assert_eq!(v[0].edge, "4->1/bad");
    }

    #[test]
    fn double_access_edge_is_reported() {
        let mut p = build_sym(2).unwrap();
        let aut = &p.roles[0];
        let mut edges = aut.edges.clone();
        edges.push(
            Edge::new(L2, L3)
                .tagged("bad")
                .guard(Guard::FlagIs(FlagIndex::Fixed(1), Waiting))
                .effect(Effect::SetTurn(TurnTerm::Own)),
        );
        p.roles[0] = Automaton::new(aut.kind, aut.initial, edges, aut.trying, aut.quiescent);
        let v = validate_granularity(&p);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].edge, "2->3/bad");
    }

    #[test]
    fn sym_initial_turn_is_free() {
        let p = build_sym(3).unwrap();
        assert_eq!(p.initial_turn, TurnValue::Free);
        assert_eq!(p.family, Family::Symmetric);
    }

    #[test]
    fn every_location_has_an_outgoing_edge() {
        for id in ProtocolId::ALL {
            let p = build(id, 3).unwrap();
            for aut in &p.roles {
                for loc in aut.locations().iter() {
                    assert!(!aut.outgoing(loc).is_empty(), "{id} {} at {loc}", aut.kind);
                }
            }
        }
    }

    #[test]
    fn mutant_builder_rejects_real_protocols() {
        assert_eq!(build_mutant(ProtocolId::Asym, 2).unwrap_err(), Error::NotAMutant("asym".into()));
        assert!(build_mutant(ProtocolId::SymNoCandidate, 2).is_ok());
    }

    #[test]
    fn zero_processes_rejected() {
        for id in ProtocolId::ALL {
            assert_eq!(build(id, 0).unwrap_err(), Error::EmptySystem);
        }
    }

    #[test]
    fn protocol_ids_parse() {
        for id in ProtocolId::ALL {
            assert_eq!(id.as_str().parse::<ProtocolId>().unwrap(), id);
        }
        assert!("peterson".parse::<ProtocolId>().is_err());
    }
}
