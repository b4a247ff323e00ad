use std::hash::BuildHasher;

use hashbrown::{DefaultHashBuilder, HashTable};

use crate::model::{
    apply_unchecked, for_each_enabled, initial_configuration, Configuration, Edge, ProtocolDefinition, RoleId,
};

/// Observer automaton run in lock-step with the protocol. Its state is a
/// fixed number of bytes appended to the configuration encoding.
pub(crate) trait Monitor {
    fn width(&self) -> usize;

    fn init(&self, c: &Configuration, obs: &mut [u8]);

    /// Updates `obs` for one transition; returns `false` if the transition
    /// violates the monitored property.
    fn step(&self, obs: &mut [u8], pre: &Configuration, role: RoleId, edge: &Edge, post: &Configuration) -> bool;
}

/// Plain reachability with no observer.
pub(crate) struct NoMonitor;

impl Monitor for NoMonitor {
    fn width(&self) -> usize {
        0
    }

    fn init(&self, _: &Configuration, _: &mut [u8]) {}

    fn step(&self, _: &mut [u8], _: &Configuration, _: RoleId, _: &Edge, _: &Configuration) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Transition {
    pub target: u32,
    pub role: u8,
    pub edge: u16,
}

const NO_PARENT: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Parent {
    state: u32,
    role: u8,
    edge: u16,
}

pub(crate) struct SearchOptions {
    pub state_cap: usize,
    pub keep_edges: bool,
    pub stop_on_violation: bool,
}

/// Reachable (configuration, observer) pairs in BFS discovery order.
///
/// State ids are discovery indices, so ascending id is non-decreasing depth.
pub(crate) struct StateGraph {
    config_len: usize,
    stride: usize,
    arena: Vec<u8>,
    parents: Vec<Parent>,
    offsets: Vec<u32>,
    succ: Vec<Transition>,
    pub transitions: u64,
    /// A successor was dropped because the state cap was reached.
    pub truncated: bool,
    /// First monitor violation in BFS order: source state and edge.
    pub violation: Option<(u32, RoleId, usize)>,
}

impl StateGraph {
    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn bytes(&self, id: u32) -> &[u8] {
        let start = id as usize * self.stride;
        &self.arena[start..start + self.stride]
    }

    pub fn observer(&self, id: u32) -> &[u8] {
        &self.bytes(id)[self.config_len..]
    }

    pub fn config(&self, proto: &ProtocolDefinition, id: u32) -> Configuration {
        Configuration::decode(proto, &self.bytes(id)[..self.config_len]).expect("arena holds valid encodings")
    }

    /// Recorded successors; empty unless the search kept edges.
    pub fn successors(&self, id: u32) -> &[Transition] {
        match (self.offsets.get(id as usize), self.offsets.get(id as usize + 1)) {
            (Some(&a), Some(&b)) => &self.succ[a as usize..b as usize],
            _ => &[],
        }
    }

    /// Edge path from the initial state to `id` along BFS parents.
    pub fn path_to(&self, id: u32) -> Vec<(RoleId, usize)> {
        let mut path = Vec::new();
        let mut cur = id;
        while self.parents[cur as usize].state != NO_PARENT {
            let p = self.parents[cur as usize];
            path.push((RoleId(p.role as usize), p.edge as usize));
            cur = p.state;
        }
        path.reverse();
        path
    }
}

pub(crate) fn search<M: Monitor>(proto: &ProtocolDefinition, monitor: &M, opts: &SearchOptions) -> StateGraph {
    let config_len = proto.encoded_len();
    let stride = config_len + monitor.width();
    let hasher = DefaultHashBuilder::default();
    let mut table: HashTable<u32> = HashTable::new();
    let mut g = StateGraph {
        config_len,
        stride,
        arena: Vec::new(),
        parents: Vec::new(),
        offsets: Vec::new(),
        succ: Vec::new(),
        transitions: 0,
        truncated: false,
        violation: None,
    };

    let init = initial_configuration(proto);
    let mut buf = Vec::with_capacity(stride);
    init.encode_into(&mut buf);
    buf.resize(stride, 0);
    monitor.init(&init, &mut buf[config_len..]);
    table.insert_unique(hasher.hash_one(&buf[..]), 0, |_| unreachable!());
    g.arena.extend_from_slice(&buf);
    g.parents.push(Parent { state: NO_PARENT, role: 0, edge: 0 });
    if opts.keep_edges {
        g.offsets.push(0);
    }

    let mut obs = vec![0u8; monitor.width()];
    let mut head = 0u32;
    'bfs: while (head as usize) < g.parents.len() {
        let c = g.config(proto, head);
        let mut enabled = Vec::new();
        for_each_enabled(proto, &c, |r, i| enabled.push((r, i)));
        for (role, idx) in enabled {
            let edge = proto.edge(role, idx);
            let next = apply_unchecked(proto, &c, role, edge);
            obs.copy_from_slice(g.observer(head));
            g.transitions += 1;
            if !monitor.step(&mut obs, &c, role, edge, &next) && g.violation.is_none() {
                g.violation = Some((head, role, idx));
                if opts.stop_on_violation {
                    break 'bfs;
                }
            }
            buf.clear();
            next.encode_into(&mut buf);
            buf.extend_from_slice(&obs);
            let hash = hasher.hash_one(&buf[..]);
            let arena = &g.arena;
            let found =
                table.find(hash, |&id| arena[id as usize * stride..(id as usize + 1) * stride] == buf[..]).copied();
            let target = match found {
                Some(id) => id,
                None if g.parents.len() >= opts.state_cap => {
                    g.truncated = true;
                    continue;
                }
                None => {
                    let id = g.parents.len() as u32;
                    let arena = &g.arena;
                    table.insert_unique(hash, id, |&other| {
                        hasher.hash_one(&arena[other as usize * stride..(other as usize + 1) * stride])
                    });
                    g.arena.extend_from_slice(&buf);
                    g.parents.push(Parent { state: head, role: role.0 as u8, edge: idx as u16 });
                    id
                }
            };
            if opts.keep_edges {
                g.succ.push(Transition { target, role: role.0 as u8, edge: idx as u16 });
            }
        }
        if opts.keep_edges {
            g.offsets.push(g.succ.len() as u32);
        }
        head += 1;
    }
    g
}
