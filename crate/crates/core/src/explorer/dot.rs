use std::fmt::Write as _;

use crate::model::{ProtocolDefinition, RoleId};

use super::build_graph;

/// Reachable configuration graph in DOT syntax. Nodes are numbered in BFS
/// discovery order and labelled with the shared state and pcs on one line and
/// the locals on a second; edges are labelled
/// `role:edge-id`.
pub fn export_dot(proto: &ProtocolDefinition, state_cap: usize) -> String {
    let g = build_graph(proto, state_cap);
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{}_n{}\" {{", proto.name, proto.n());
    for id in 0..g.len() as u32 {
        let c = g.config(proto, id);
        let _ = writeln!(out, "  s{id} [label=\"{}\\n{}\"];", c.compact(), c.locals_label(proto));
    }
    for id in 0..g.len() as u32 {
        for t in g.successors(id) {
            let role = RoleId(t.role as usize);
            let _ = writeln!(
                out,
                "  s{id} -> s{} [label=\"{}:{}\"];",
                t.target,
                proto.role_name(role),
                proto.edge(role, t.edge as usize).id
            );
        }
    }
    out.push_str("}\n");
    out
}
