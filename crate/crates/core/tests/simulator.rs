use std::collections::HashSet;

use mutexlab::explorer::DEFAULT_STATE_CAP;
use mutexlab::simulator::{check_options, simulate_visiting, Finding, Stop};
use mutexlab::{
    build, confirms_violation, for_each_reachable, simulate, simulate_many, Location, Policy, PropertyId, ProtocolId,
    SimulateOptions,
};

#[test]
fn long_asym_run_is_clean() {
    let proto = build(ProtocolId::Asym, 4).unwrap();
    let r = simulate(&proto, &SimulateOptions { steps: 1_000_000, seed: 42, ..Default::default() });
    assert!(r.stats.is_clean(), "{:?}", r.stats.violations);
    assert_eq!(r.stats.steps, 1_000_000);
    assert!(r.stats.cs_entries.iter().all(|&e| e > 0));
    assert!(r.trace.is_none());
}

#[test]
fn mutant_violation_found_by_some_seed() {
    let proto = build(ProtocolId::AsymSwNoExitWait, 2).unwrap();
    let runs = simulate_many(&proto, &SimulateOptions { steps: 10_000, seed: 0, ..Default::default() }, 100);
    let hits: Vec<_> =
        runs.iter().filter(|r| r.stats.stop == Stop::Finding(Finding::Violation(PropertyId::Mutex))).collect();
    assert!(!hits.is_empty());
    for r in hits {
        let trace = r.trace.as_ref().unwrap();
        assert_eq!(trace.seed, Some(r.stats.seed));
        assert!(confirms_violation(&proto, trace, PropertyId::Mutex).unwrap());
    }
}

#[test]
fn simulated_configurations_are_reachable() {
    for (id, n) in [
        (ProtocolId::Asym, 2),
        (ProtocolId::Asym, 3),
        (ProtocolId::AsymSw, 3),
        (ProtocolId::Sym, 1),
        (ProtocolId::Sym, 2),
    ] {
        let proto = build(id, n).unwrap();
        let mut reachable = HashSet::new();
        assert!(for_each_reachable(&proto, DEFAULT_STATE_CAP, |c| {
            reachable.insert(c.encode());
        }));
        for policy in [Policy::UniformEnabled, Policy::RoundRobinPoll] {
            let opts = SimulateOptions { steps: 20_000, seed: 9, policy, ..Default::default() };
            let r =
                simulate_visiting(&proto, &opts, |c| assert!(reachable.contains(&c.encode()), "{id}: {}", c.compact()));
            assert!(r.stats.is_clean());
        }
    }
}

#[test]
fn single_sym_process_cycles_through_cs() {
    let proto = build(ProtocolId::Sym, 1).unwrap();
    for seed in 0..20 {
        let opts = SimulateOptions { steps: 100, seed, record_trace: true, ..Default::default() };
        let r = simulate(&proto, &opts);
        assert!(r.stats.is_clean());
        assert!(r.stats.cs_entries[0] >= 1);
        let trace = r.trace.unwrap();
        let cs = trace.steps.iter().position(|s| s.pc == Location::Cs).unwrap();
        let back = trace.steps.iter().position(|s| s.pc == Location::L8).unwrap();
        assert!(cs < back);
        assert_eq!(trace.steps[back + 1].pc, Location::L1);
    }
}

#[test]
fn runs_are_reproducible_per_seed() {
    let proto = build(ProtocolId::Sym, 3).unwrap();
    let opts = SimulateOptions { steps: 20_000, seed: 100, ..Default::default() };
    let many = simulate_many(&proto, &opts, 4);
    for (k, r) in many.iter().enumerate() {
        let single = simulate(&proto, &SimulateOptions { seed: 100 + k as u64, ..opts });
        assert_eq!(r.stats, single.stats);
    }
    assert_ne!(many[0].stats.final_configuration, many[1].stats.final_configuration);
}

#[test]
fn invalid_weight_rejected() {
    for w in [-1.0, f64::NAN, f64::INFINITY] {
        assert!(check_options(&SimulateOptions { exempt_weight: w, ..Default::default() }).is_err());
    }
}
