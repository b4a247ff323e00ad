use std::path::Path;
use std::process::{Command, Output};

use mutexlab::report::{parse_record, SCHEMA_LINE};
use mutexlab::{build, confirms_violation, PropertyId, ProtocolId, Trace};

fn mutexlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mutexlab")).args(args).current_dir(cwd).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn sym_two_passes_everything() {
    let dir = tempfile::tempdir().unwrap();
    let o = mutexlab(&["check", "--protocol", "sym", "--n", "2", "--properties", "all"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert_eq!(text.matches("PASS").count(), 7);
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn mutant_fails_with_trace_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traces");
    let o = mutexlab(
        &["check", "--protocol", "asym-sw-noexitwait", "--n", "2", "--properties", "mutex", "--trace-out"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2), "missing value is a usage error");
    let o = mutexlab(
        &[
            "check",
            "--protocol",
            "asym-sw-noexitwait",
            "--n",
            "2",
            "--properties",
            "mutex",
            "--trace-out",
            out.to_str().unwrap(),
            "--format",
            "machine",
            "--no-timing",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let path = out.join("asym-sw-noexitwait-n2-mutex.trace");
    let text = std::fs::read_to_string(&path).unwrap();
    let proto = build(ProtocolId::AsymSwNoExitWait, 2).unwrap();
    let trace = Trace::parse(&text, &proto).unwrap();
    assert!(confirms_violation(&proto, &trace, PropertyId::Mutex).unwrap());
    let machine = stdout(&o);
    assert!(machine.contains(&format!("record=property id=mutex verdict=fail trace={}", path.display())));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["check", "--protocol", "asym", "--n", "0"][..],
        &["check", "--protocol", "asym", "--n", "17"],
        &["check", "--protocol", "nope", "--n", "2"],
        &["check", "--n", "2"],
        &["check", "--protocol", "asym"],
        &["check", "--protocol", "asym", "--n", "2", "--properties", "ext-mutex"],
        &["check", "--protocol", "asym", "--n", "2", "--properties", "bogus"],
        &["check", "--protocol", "asym", "--n", "2", "--frobnicate"],
        &["simulate", "--protocol", "asym", "--n", "2", "--policy", "random"],
        &["simulate", "--protocol", "asym", "--n", "2", "--exempt-weight", "-1"],
        &["explode"],
        &[],
    ] {
        let o = mutexlab(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn state_cap_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = mutexlab(&["check", "--protocol", "sym", "--n", "2", "--state-cap", "100"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert!(stdout(&o).contains("BOUNDED"));
}

#[test]
fn machine_output_is_stable_and_parseable() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["check", "--protocol", "sym-nocandidate", "--n", "2", "--format", "machine", "--no-timing", "--bypass"];
    let a = mutexlab(&args, dir.path());
    let b = mutexlab(&args, dir.path());
    assert_eq!(a.status.code(), Some(1));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(SCHEMA_LINE));
    for line in lines {
        let rec = parse_record(line).expect(line);
        assert_eq!(rec[0].0, "record");
    }
    assert!(!text.contains("timing"));
}

#[test]
fn simulate_reports_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = mutexlab(
        &[
            "simulate",
            "--protocol",
            "sym",
            "--n",
            "3",
            "--steps",
            "5000",
            "--seed",
            "7",
            "--runs",
            "3",
            "--format",
            "machine",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let seeds: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| parse_record(l).unwrap().into_iter().find(|(k, _)| *k == "seed").unwrap().1)
        .collect();
    assert_eq!(seeds, ["7", "8", "9"]);
}

#[test]
fn simulate_mutant_writes_replayable_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = mutexlab(
        &["simulate", "--protocol", "asym-sw-noexitwait", "--n", "2", "--runs", "100", "--policy", "uniform-enabled"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let proto = build(ProtocolId::AsymSwNoExitWait, 2).unwrap();
    let mut found = 0;
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        let trace = Trace::parse(&text, &proto).unwrap();
        assert!(trace.seed.is_some());
        assert!(confirms_violation(&proto, &trace, PropertyId::Mutex).unwrap());
        found += 1;
    }
    assert!(found > 0);
}

#[test]
fn graph_writes_dot() {
    let dir = tempfile::tempdir().unwrap();
    let o = mutexlab(&["graph", "--protocol", "asym", "--n", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let dot = stdout(&o);
    assert!(dot.starts_with("digraph \"asym_n1\" {"));
    let path = dir.path().join("g.dot");
    let o = mutexlab(&["graph", "--protocol", "asym", "--n", "1", "--dot-out", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(path).unwrap(), dot);
}

#[test]
fn props_lists_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let o = mutexlab(&["props"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for p in PropertyId::ALL {
        assert!(text.contains(p.as_str()));
    }
    let o = mutexlab(&["props", "--format", "machine"], dir.path());
    assert_eq!(stdout(&o).lines().count(), 1 + PropertyId::ALL.len());
}

#[test]
fn help_goes_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let o = mutexlab(&["--help"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("simulate"));
}
