//! Mutual-exclusion workbench.
//!
//! Three shared-variable mutual exclusion algorithms (an asymmetric one with a
//! coordinator process, its single-writer variant, and a symmetric one in which
//! the exiting process elects its successor) are encoded as guarded automata.
//! The [`explorer`] enumerates every interleaving for small process counts and
//! checks safety, turn stability, lockout freedom under weak fairness and
//! bypass bounds. The [`simulator`] runs seeded random schedules for larger
//! systems.

pub mod error;
pub mod explorer;
pub mod model;
pub mod protocols;
pub mod report;
pub mod simulator;
pub mod trace;

pub use error::{Error, Result};
pub use explorer::{
    check_liveness, check_turn_stability, confirms_violation, explore, export_dot, for_each_reachable, max_bypass,
    BypassBound, ExplorationReport, ExploreOptions, LivenessVerdict, PropertyId, Verdict,
};
pub use model::{
    apply_edge, enabled_edges, initial_configuration, Configuration, Edge, Fairness, FlagValue, Locals, Location,
    ProtocolDefinition, RoleId, SharedState, TurnValue,
};
pub use protocols::{build, build_asym, build_asym_sw, build_mutant, build_sym, ProtocolId};
pub use simulator::{simulate, simulate_many, Policy, RunStats, SimulateOptions, SimulationResult};
pub use trace::Trace;
