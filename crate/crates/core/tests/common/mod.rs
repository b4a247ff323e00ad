//! Hand-written reference semantics for the shipped protocols, kept apart
//! from the edge DSL so that reachable counts and bypass maxima can be
//! cross-checked against an implementation sharing no code with the library.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};

pub const THINKING: i8 = -1;
pub const FREE: i8 = -2;
pub const R: u8 = 0;
pub const W: u8 = 1;
pub const C: u8 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Asym,
    AsymSw,
    Sym,
}

/// Process locals for the symmetric algorithm; unused by the others.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Vars {
    pub ncand: i8,
    pub minc: i8,
    pub j: i8,
    pub k: i8,
    pub next: i8,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct St {
    pub turn: i8,
    pub flag: Vec<u8>,
    pub pc: Vec<&'static str>,
    pub vars: Vec<Vars>,
    pub coord_pc: &'static str,
    pub coord_p: i8,
}

impl St {
    pub fn initial(kind: Kind, n: usize) -> St {
        St {
            turn: if kind == Kind::Sym { FREE } else { THINKING },
            flag: vec![R; n],
            pc: vec!["1"; n],
            vars: vec![Vars { ncand: 0, minc: -1, j: -1, k: 1, next: THINKING }; n],
            coord_pc: "1",
            coord_p: 0,
        }
    }
}

/// One step: acting role (n = coordinator), whether the step is exempt from
/// fairness, successor.
pub struct Step {
    pub who: usize,
    pub exempt: bool,
    pub next: St,
}

fn go(s: &St, i: usize, to: &'static str, f: impl FnOnce(&mut St)) -> St {
    let mut t = s.clone();
    t.pc[i] = to;
    f(&mut t);
    t
}

fn asym_process(kind: Kind, s: &St, i: usize, out: &mut Vec<Step>) {
    let me = i as i8;
    let mut push = |exempt, next| out.push(Step { who: i, exempt, next });
    match s.pc[i] {
        "1" => push(true, go(s, i, "2", |t| t.flag[i] = W)),
        "2" if s.turn == me => push(false, go(s, i, "CS", |_| {})),
        "CS" => push(false, go(s, i, "3", |t| t.flag[i] = R)),
        "3" if kind == Kind::Asym => push(false, go(s, i, "4", |t| t.turn = THINKING)),
        "3" if s.turn != me => push(false, go(s, i, "4", |_| {})),
        "4" => push(true, go(s, i, "1", |_| {})),
        _ => {}
    }
}

fn coordinator(kind: Kind, s: &St, n: usize, out: &mut Vec<Step>) {
    let p = s.coord_p as usize;
    let at = |to: &'static str, f: &dyn Fn(&mut St)| {
        let mut t = s.clone();
        t.coord_pc = to;
        f(&mut t);
        Step { who: n, exempt: false, next: t }
    };
    match s.coord_pc {
        "1" => out.push(at("2", &|t| t.coord_p = 0)),
        "2" if s.flag[p] == W => out.push(at("2.1", &|_| {})),
        "2" => out.push(at("3", &|_| {})),
        "2.1" => out.push(at("2.2", &|t| t.turn = p as i8)),
        "2.2" if kind == Kind::Asym && s.turn == THINKING => out.push(at("3", &|_| {})),
        "2.2" if kind == Kind::AsymSw && s.flag[p] == R => out.push(at("2.3", &|_| {})),
        "2.3" => out.push(at("3", &|t| t.turn = THINKING)),
        "3" => out.push(at("2", &|t| t.coord_p = ((p + 1) % n) as i8)),
        _ => {}
    }
}

fn sym_process(s: &St, n: usize, i: usize, out: &mut Vec<Step>) {
    let me = i as i8;
    let v = &s.vars[i];
    let mut push = |exempt, next| out.push(Step { who: i, exempt, next });
    match s.pc[i] {
        "1" => push(true, go(s, i, "2", |t| t.flag[i] = W)),
        "2" if s.turn != THINKING => push(false, go(s, i, "3", |_| {})),
        "3" if s.turn == FREE => push(false, go(s, i, "3.1", |_| {})),
        "3" => push(false, go(s, i, "4", |_| {})),
        "3.1" => push(false, go(s, i, "3.2", |t| t.flag[i] = C)),
        "3.2" if s.turn == FREE && s.flag[i] == C => push(false, go(s, i, "3.3", |_| {})),
        "3.2" => push(false, go(s, i, "3.7", |_| {})),
        "3.3" => push(
            false,
            go(s, i, "3.4", |t| {
                let v = &mut t.vars[i];
                v.ncand = 0;
                v.minc = -1;
                v.j = n as i8 - 1;
            }),
        ),
        "3.4" if v.j < 0 => push(false, go(s, i, "3.5", |_| {})),
        "3.4" if s.flag[v.j as usize] == C => push(false, go(s, i, "3.4.1", |_| {})),
        "3.4" => push(false, go(s, i, "3.4.2", |_| {})),
        "3.4.1" => push(
            false,
            go(s, i, "3.4.2", |t| {
                let v = &mut t.vars[i];
                v.ncand += 1;
                v.minc = v.j;
            }),
        ),
        "3.4.2" => push(false, go(s, i, "3.4", |t| t.vars[i].j -= 1)),
        "3.5" if s.turn == FREE && v.ncand == 1 => push(false, go(s, i, "3.5.1", |_| {})),
        "3.5" => push(false, go(s, i, "3.5.2", |_| {})),
        "3.5.1" => push(false, go(s, i, "3.5.2", |t| t.turn = me)),
        "3.5.2" if s.turn != FREE || v.minc < me => push(false, go(s, i, "3.6", |_| {})),
        "3.5.2" => push(false, go(s, i, "3.2", |_| {})),
        "3.6" => push(false, go(s, i, "3.2", |t| t.flag[i] = W)),
        "3.7" => push(false, go(s, i, "4", |t| t.flag[i] = W)),
        "4" if s.turn == me => push(false, go(s, i, "CS", |_| {})),
        "CS" => push(false, go(s, i, "5", |t| t.turn = THINKING)),
        "5" => push(false, go(s, i, "5.1", |t| t.flag[i] = R)),
        "5.1" => push(
            false,
            go(s, i, "6", |t| {
                t.vars[i].next = THINKING;
                t.vars[i].k = 1;
            }),
        ),
        "6" if v.next == THINKING && (v.k as usize) < n => {
            let j = (i + v.k as usize) % n;
            if s.flag[j] != R {
                push(false, go(s, i, "6.1", |_| {}))
            } else {
                push(false, go(s, i, "6.2", |_| {}))
            }
        }
        "6" => push(false, go(s, i, "6.3", |_| {})),
        "6.1" => {
            let j = ((i + v.k as usize) % n) as i8;
            push(false, go(s, i, "6.2", |t| t.vars[i].next = j))
        }
        "6.2" => push(false, go(s, i, "6", |t| t.vars[i].k += 1)),
        "6.3" if v.next == THINKING => push(false, go(s, i, "8", |t| t.turn = FREE)),
        "6.3" => {
            let nt = v.next;
            push(false, go(s, i, "8", |t| t.turn = nt))
        }
        "8" => push(true, go(s, i, "1", |_| {})),
        _ => {}
    }
}

pub fn successors(kind: Kind, n: usize, s: &St) -> Vec<Step> {
    let mut out = Vec::new();
    for i in 0..n {
        match kind {
            Kind::Sym => sym_process(s, n, i, &mut out),
            _ => asym_process(kind, s, i, &mut out),
        }
    }
    if kind != Kind::Sym {
        coordinator(kind, s, n, &mut out);
    }
    out
}

/// Depth-first enumeration of the reachable set.
pub fn reachable(kind: Kind, n: usize) -> HashSet<St> {
    let mut seen = HashSet::new();
    let mut stack = vec![St::initial(kind, n)];
    seen.insert(stack[0].clone());
    while let Some(s) = stack.pop() {
        for step in successors(kind, n, &s) {
            if seen.insert(step.next.clone()) {
                stack.push(step.next);
            }
        }
    }
    seen
}

pub fn transition_count(kind: Kind, n: usize, states: &HashSet<St>) -> usize {
    states.iter().map(|s| successors(kind, n, s).len()).sum()
}

/// Worst-case bypass per process: BFS over (state, counters) where counter
/// `p` counts CS entries of others since p left location 1, saturating at
/// `n + 1`.
pub fn bypass(kind: Kind, n: usize) -> Vec<u32> {
    let sat = n as u32 + 1;
    let start = (St::initial(kind, n), vec![None::<u32>; n]);
    let mut seen: HashMap<(St, Vec<Option<u32>>), ()> = HashMap::new();
    let mut queue = VecDeque::from([start.clone()]);
    seen.insert(start, ());
    let mut max = vec![0u32; n];
    while let Some((s, ctr)) = queue.pop_front() {
        for step in successors(kind, n, &s) {
            let mut c = ctr.clone();
            if step.who < n {
                let q = step.who;
                if s.pc[q] == "1" {
                    c[q] = Some(0);
                }
                if step.next.pc[q] == "CS" {
                    for (p, slot) in c.iter_mut().enumerate() {
                        if let (true, Some(v)) = (p != q, slot.as_mut()) {
                            *v = (*v + 1).min(sat);
                            max[p] = max[p].max(*v);
                        }
                    }
                    c[q] = None;
                }
            }
            let key = (step.next, c);
            if !seen.contains_key(&key) {
                seen.insert(key.clone(), ());
                queue.push_back(key);
            }
        }
    }
    max
}
