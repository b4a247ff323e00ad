//! Guard and effect language for automaton edges.
//!
//! Guards and effects are plain data so that the variables an edge touches can
//! be inspected statically (see `protocols::validate_access_discipline`) as
//! well as evaluated.

use super::values::{FlagValue, Locals, SharedState, TurnValue};

/// Which `flag` cell an atom refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlagIndex {
    /// `flag[i]` of the acting process.
    Own,
    Fixed(u8),
    /// `flag[p]`, the coordinator's cursor.
    Cursor,
    /// `flag[j]`, the entry scan counter.
    ScanJ,
    /// `flag[(i + k) mod N]`, the exit scan position.
    ExitOffset,
}

/// A value that can be compared against or stored into `turn`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TurnTerm {
    Own,
    Thinking,
    Free,
    /// `Pid(p)`.
    Cursor,
    /// The local `nextTurn`.
    NextTurn,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Guard {
    True,
    TurnIs(TurnTerm),
    TurnIsNot(TurnTerm),
    FlagIs(FlagIndex, FlagValue),
    FlagIsNot(FlagIndex, FlagValue),
    /// `j >= 0`
    ScanPending,
    /// `j < 0`
    ScanDone,
    CandidatesEq(u8),
    CandidatesNe(u8),
    /// `minCandidate < i`
    MinCandidateBelowOwn,
    MinCandidateNotBelowOwn,
    NextTurnIs(TurnTerm),
    NextTurnIsNot(TurnTerm),
    /// `k <= N - 1`
    ExitScanPending,
    ExitScanDone,
    And(Vec<Guard>),
    Or(Vec<Guard>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Effect {
    SetFlag(FlagIndex, FlagValue),
    SetTurn(TurnTerm),
    /// `p <- 0`
    ResetCursor,
    /// `p <- (p + 1) mod N`
    AdvanceCursor,
    /// `nCandidates <- 0; minCandidate <- -1; j <- N - 1`
    BeginCandidateScan,
    /// `nCandidates <- nCandidates + 1; minCandidate <- j`
    CountCandidate,
    /// `j <- j - 1`
    StepCandidateScan,
    /// `nextTurn <- THINKING; k <- 1`
    BeginExitScan,
    /// `nextTurn <- Pid((i + k) mod N)`
    PickExitCandidate,
    /// `k <- k + 1`
    StepExitScan,
}

/// Shared variable reference as written in an edge, before index resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarRef {
    Turn,
    Flag(FlagIndex),
}

/// A concrete shared variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SharedVar {
    Turn,
    Flag(u8),
}

impl std::fmt::Display for SharedVar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SharedVar::Turn => f.write_str("turn"),
            SharedVar::Flag(i) => write!(f, "flag[{i}]"),
        }
    }
}

pub(crate) struct EvalCtx<'a> {
    /// Process index of the acting role; `None` for the coordinator.
    pub own: Option<u8>,
    pub n: u8,
    pub locals: &'a Locals,
    pub shared: &'a SharedState,
}

impl EvalCtx<'_> {
    fn flag_index(&self, idx: FlagIndex) -> Option<u8> {
        let i = match idx {
            FlagIndex::Own => self.own?,
            FlagIndex::Fixed(x) => x,
            FlagIndex::Cursor => self.locals.p,
            FlagIndex::ScanJ => u8::try_from(self.locals.j).ok()?,
            FlagIndex::ExitOffset => {
                let own = self.own? as u16;
                ((own + self.locals.k as u16) % self.n as u16) as u8
            }
        };
        (i < self.n).then_some(i)
    }

    fn flag(&self, idx: FlagIndex) -> Option<FlagValue> {
        self.flag_index(idx).map(|i| self.shared.flags[i as usize])
    }

    fn turn_term(&self, t: TurnTerm) -> Option<TurnValue> {
        Some(match t {
            TurnTerm::Own => TurnValue::Pid(self.own?),
            TurnTerm::Thinking => TurnValue::Thinking,
            TurnTerm::Free => TurnValue::Free,
            TurnTerm::Cursor => TurnValue::Pid(self.locals.p),
            TurnTerm::NextTurn => self.locals.next_turn,
        })
    }
}

impl Guard {
    pub(crate) fn eval(&self, cx: &EvalCtx<'_>) -> bool {
        let l = cx.locals;
        match self {
            Guard::True => true,
            Guard::TurnIs(t) => cx.turn_term(*t) == Some(cx.shared.turn),
            Guard::TurnIsNot(t) => cx.turn_term(*t).is_some_and(|v| v != cx.shared.turn),
            Guard::FlagIs(i, v) => cx.flag(*i) == Some(*v),
            Guard::FlagIsNot(i, v) => cx.flag(*i).is_some_and(|f| f != *v),
            Guard::ScanPending => l.j >= 0,
            Guard::ScanDone => l.j < 0,
            Guard::CandidatesEq(c) => l.n_candidates == *c,
            Guard::CandidatesNe(c) => l.n_candidates != *c,
            Guard::MinCandidateBelowOwn => cx.own.is_some_and(|i| (l.min_candidate as i16) < i as i16),
            Guard::MinCandidateNotBelowOwn => cx.own.is_some_and(|i| (l.min_candidate as i16) >= i as i16),
            Guard::NextTurnIs(t) => cx.turn_term(*t) == Some(l.next_turn),
            Guard::NextTurnIsNot(t) => cx.turn_term(*t).is_some_and(|v| v != l.next_turn),
            Guard::ExitScanPending => l.k < cx.n,
            Guard::ExitScanDone => l.k >= cx.n,
            Guard::And(gs) => gs.iter().all(|g| g.eval(cx)),
            Guard::Or(gs) => gs.iter().any(|g| g.eval(cx)),
        }
    }

    /// Shared variables the guard may read, deduplicated, in first-use order.
    pub fn reads(&self) -> Vec<VarRef> {
        let mut out = Vec::new();
        self.collect_reads(&mut out);
        out
    }

    fn collect_reads(&self, out: &mut Vec<VarRef>) {
        let mut push = |v: VarRef| {
            if !out.contains(&v) {
                out.push(v);
            }
        };
        match self {
            Guard::TurnIs(_) | Guard::TurnIsNot(_) => push(VarRef::Turn),
            Guard::FlagIs(i, _) | Guard::FlagIsNot(i, _) => push(VarRef::Flag(*i)),
            Guard::And(gs) | Guard::Or(gs) => gs.iter().for_each(|g| g.collect_reads(out)),
            _ => {}
        }
    }
}

impl Effect {
    pub(crate) fn apply(&self, own: Option<u8>, n: u8, locals: &mut Locals, shared: &mut SharedState) {
        match self {
            Effect::SetFlag(idx, v) => {
                let cx = EvalCtx { own, n, locals, shared };
                if let Some(i) = cx.flag_index(*idx) {
                    shared.flags[i as usize] = *v;
                }
            }
            Effect::SetTurn(t) => {
                let cx = EvalCtx { own, n, locals, shared };
                if let Some(v) = cx.turn_term(*t) {
                    shared.turn = v;
                }
            }
            Effect::ResetCursor => locals.p = 0,
            Effect::AdvanceCursor => locals.p = (locals.p + 1) % n,
            Effect::BeginCandidateScan => {
                locals.n_candidates = 0;
                locals.min_candidate = -1;
                locals.j = n as i8 - 1;
            }
            Effect::CountCandidate => {
                locals.n_candidates += 1;
                locals.min_candidate = locals.j;
            }
            Effect::StepCandidateScan => locals.j -= 1,
            Effect::BeginExitScan => {
                locals.next_turn = TurnValue::Thinking;
                locals.k = 1;
            }
            Effect::PickExitCandidate => {
                let own = own.unwrap_or(0) as u16;
                locals.next_turn = TurnValue::Pid(((own + locals.k as u16) % n as u16) as u8);
            }
            Effect::StepExitScan => locals.k += 1,
        }
    }

    /// The shared variable this effect writes, if any.
    pub fn writes(&self) -> Option<VarRef> {
        match self {
            Effect::SetFlag(i, _) => Some(VarRef::Flag(*i)),
            Effect::SetTurn(_) => Some(VarRef::Turn),
            _ => None,
        }
    }

    /// Value written to `turn` by this effect, if it writes `turn`.
    pub fn turn_term(&self) -> Option<TurnTerm> {
        match self {
            Effect::SetTurn(t) => Some(*t),
            _ => None,
        }
    }
}

impl FlagIndex {
    /// Every concrete cell this index can denote for process `own`.
    pub fn targets(self, own: Option<u8>, n: u8) -> Vec<u8> {
        match self {
            FlagIndex::Own => own.into_iter().collect(),
            FlagIndex::Fixed(x) => vec![x],
            FlagIndex::Cursor | FlagIndex::ScanJ => (0..n).collect(),
            FlagIndex::ExitOffset => (0..n).filter(|j| Some(*j) != own).collect(),
        }
    }
}

impl VarRef {
    pub fn targets(self, own: Option<u8>, n: u8) -> Vec<SharedVar> {
        match self {
            VarRef::Turn => vec![SharedVar::Turn],
            VarRef::Flag(i) => i.targets(own, n).into_iter().map(SharedVar::Flag).collect(),
        }
    }
}
