//! Lockout freedom under weak per-process fairness.
//!
//! For each process `p` the graph is restricted to states where `p` is in its
//! trying region. A strongly connected component of that subgraph contains a
//! weakly fair cycle iff every role that has a non-exempt edge enabled in all
//! of the component's states also takes some step inside it: the cycle that
//! visits every state and edge of the component then satisfies all fairness
//! obligations, and any other cycle only has more of them. States in which no
//! non-exempt edge is enabled carry an implicit stutter loop, modelling the
//! infinite execution where every remaining role idles.

use std::collections::{HashMap, VecDeque};

use crate::model::{enabled_edges, Configuration, ProtocolDefinition, RoleId};
use crate::trace::Trace;

use super::{build_graph, StateGraph, Transition, Verdict};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LivenessVerdict {
    Pass,
    /// `process` can wait forever on the fair lasso `trace`.
    Fail {
        process: RoleId,
        trace: Box<Trace>,
    },
    Bounded,
}

impl LivenessVerdict {
    pub fn into_verdict(self) -> Verdict {
        match self {
            LivenessVerdict::Pass => Verdict::Pass,
            LivenessVerdict::Fail { trace, .. } => Verdict::Fail(trace),
            LivenessVerdict::Bounded => Verdict::Bounded,
        }
    }
}

/// Searches for a process that can starve on a weakly fair infinite execution.
pub fn check_liveness(proto: &ProtocolDefinition, state_cap: usize) -> LivenessVerdict {
    check_on_graph(proto, &build_graph(proto, state_cap))
}

fn subject_masks(proto: &ProtocolDefinition, g: &StateGraph) -> Vec<u32> {
    (0..g.len() as u32)
        .map(|id| {
            g.successors(id)
                .iter()
                .filter(|t| !proto.edge(RoleId(t.role as usize), t.edge as usize).is_exempt())
                .fold(0u32, |m, t| m | (1 << t.role))
        })
        .collect()
}

pub(crate) fn check_on_graph(proto: &ProtocolDefinition, g: &StateGraph) -> LivenessVerdict {
    if g.truncated {
        return LivenessVerdict::Bounded;
    }
    let masks = subject_masks(proto, g);
    for p in proto.processes() {
        let trying = proto.roles[p.0].trying;
        let include: Vec<bool> = (0..g.len() as u32)
            .map(|id| crate::model::Location::from_code(g.bytes(id)[p.0]).is_some_and(|l| trying.contains(l)))
            .collect();
        let mut found = None;
        tarjan(g, &include, |scc| {
            if found.is_none() {
                found = fair_component(g, &masks, scc);
            }
            found.is_some()
        });
        if let Some(component) = found {
            let trace = lasso(proto, g, &masks, &component);
            return LivenessVerdict::Fail { process: p, trace: Box::new(trace) };
        }
    }
    LivenessVerdict::Pass
}

/// Returns the component back if it holds a weakly fair cycle.
fn fair_component(g: &StateGraph, masks: &[u32], scc: &[u32]) -> Option<Vec<u32>> {
    let members: std::collections::HashSet<u32> = scc.iter().copied().collect();
    let mut internal = false;
    let mut stepped = 0u32;
    let mut always_enabled = u32::MAX;
    for &s in scc {
        always_enabled &= masks[s as usize];
        for t in g.successors(s) {
            if members.contains(&t.target) {
                internal = true;
                stepped |= 1 << t.role;
            }
        }
    }
    let stutter = scc.len() == 1 && masks[scc[0] as usize] == 0;
    if !(internal || stutter) {
        return None;
    }
    (always_enabled & !stepped == 0).then(|| scc.to_vec())
}

/// Iterative Tarjan over the subgraph induced by `include`. `emit` receives
/// each component and returns `true` to stop early.
fn tarjan(g: &StateGraph, include: &[bool], mut emit: impl FnMut(&[u32]) -> bool) {
    const UNVISITED: u32 = u32::MAX;
    let n = g.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut call: Vec<(u32, usize)> = Vec::new();
    let mut counter = 0u32;

    for root in 0..n as u32 {
        if !include[root as usize] || index[root as usize] != UNVISITED {
            continue;
        }
        index[root as usize] = counter;
        low[root as usize] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root as usize] = true;
        call.push((root, 0));

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let succ = g.successors(v);
            if *pos < succ.len() {
                let w = succ[*pos].target;
                *pos += 1;
                if !include[w as usize] {
                    continue;
                }
                if index[w as usize] == UNVISITED {
                    index[w as usize] = counter;
                    low[w as usize] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    call.push((w, 0));
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
                continue;
            }
            call.pop();
            if let Some(&(u, _)) = call.last() {
                low[u as usize] = low[u as usize].min(low[v as usize]);
            }
            if low[v as usize] == index[v as usize] {
                let mut component = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack holds v");
                    on_stack[w as usize] = false;
                    component.push(w);
                    if w == v {
                        break;
                    }
                }
                if emit(&component) {
                    return;
                }
            }
        }
    }
}

enum Waypoint {
    Edge(u32, Transition),
    State(u32),
}

fn lasso(proto: &ProtocolDefinition, g: &StateGraph, masks: &[u32], scc: &[u32]) -> Trace {
    let members: std::collections::HashSet<u32> = scc.iter().copied().collect();
    let entry = *scc.iter().min().expect("non-empty component");
    let mut path = g.path_to(entry);
    let stem_len = path.len();

    let internal: Vec<(u32, Transition)> = {
        let mut sorted = scc.to_vec();
        sorted.sort_unstable();
        sorted
            .iter()
            .flat_map(|&s| g.successors(s).iter().map(move |t| (s, *t)))
            .filter(|(_, t)| members.contains(&t.target))
            .collect()
    };

    if !internal.is_empty() {
        let mut waypoints = Vec::new();
        for role in 0..proto.role_count() as u8 {
            if let Some(&(s, t)) = internal.iter().find(|(_, t)| t.role == role) {
                waypoints.push(Waypoint::Edge(s, t));
            } else if let Some(&d) = scc.iter().find(|&&s| masks[s as usize] & (1 << role) == 0) {
                waypoints.push(Waypoint::State(d));
            }
        }
        if !waypoints.iter().any(|w| matches!(w, Waypoint::Edge(..))) {
            let (s, t) = internal[0];
            waypoints.push(Waypoint::Edge(s, t));
        }
        let mut cur = entry;
        for w in waypoints {
            match w {
                Waypoint::Edge(s, t) => {
                    path.extend(walk_within(g, &members, cur, s));
                    path.push((RoleId(t.role as usize), t.edge as usize));
                    cur = t.target;
                }
                Waypoint::State(d) => {
                    path.extend(walk_within(g, &members, cur, d));
                    cur = d;
                }
            }
        }
        path.extend(walk_within(g, &members, cur, entry));
    }

    let mut trace = Trace::from_path(proto, &path);
    trace.cycle_start = Some(stem_len);
    trace
}

/// Shortest edge path from `from` to `to` staying inside `members`.
fn walk_within(g: &StateGraph, members: &std::collections::HashSet<u32>, from: u32, to: u32) -> Vec<(RoleId, usize)> {
    if from == to {
        return Vec::new();
    }
    let mut pred: HashMap<u32, (u32, Transition)> = HashMap::new();
    let mut queue = VecDeque::from([from]);
    while let Some(s) = queue.pop_front() {
        for t in g.successors(s) {
            if !members.contains(&t.target) || t.target == from || pred.contains_key(&t.target) {
                continue;
            }
            pred.insert(t.target, (s, *t));
            if t.target == to {
                let mut out = Vec::new();
                let mut cur = to;
                while cur != from {
                    let (p, t) = pred[&cur];
                    out.push((RoleId(t.role as usize), t.edge as usize));
                    cur = p;
                }
                out.reverse();
                return out;
            }
            queue.push_back(t.target);
        }
    }
    unreachable!("states of one component are mutually reachable")
}

fn subject_mask_of(proto: &ProtocolDefinition, c: &Configuration) -> u32 {
    enabled_edges(proto, c).into_iter().filter(|(_, e)| !e.is_exempt()).fold(0, |m, (r, _)| m | (1 << r.0))
}

/// Independent check of a lasso on its replayed configurations: the cycle
/// closes, some process is trying throughout, and the cycle is weakly fair.
pub(crate) fn lasso_is_fair_starvation(proto: &ProtocolDefinition, trace: &Trace, configs: &[Configuration]) -> bool {
    let Some(k) = trace.cycle_start else {
        return false;
    };
    let last = configs.len() - 1;
    let cycle_states: &[Configuration] = if k == last { &configs[k..] } else { &configs[k..last] };
    if k != last && configs[last] != configs[k] {
        return false;
    }
    let starving = proto.processes().any(|p| {
        let trying = proto.roles[p.0].trying;
        cycle_states.iter().all(|c| trying.contains(c.pc(p)))
    });
    if !starving {
        return false;
    }
    if k == last {
        return subject_mask_of(proto, &configs[last]) == 0;
    }
    let always = cycle_states.iter().fold(u32::MAX, |m, c| m & subject_mask_of(proto, c));
    let stepped = trace.steps[k..].iter().fold(0u32, |m, s| m | (1 << s.role.0));
    always & !stepped == 0
}
