//! Human-readable and machine-readable renderings of results.
//!
//! The machine format is line-oriented. The first line is
//! `schema=mutexlab-report version=1`; every following line is one record of
//! space-separated `key=value` pairs whose first pair is `record=<kind>`.
//! Keys and values never contain spaces or `=`. Record kinds:
//!
//! - `run protocol=<id> n=<int> states=<int> transitions=<int> truncated=<bool>`
//! - `property id=<property> verdict=<pass|fail|bounded> trace=<path|none>`
//! - `bypass process=<role> max=<int|>N>`, or `bypass process=all max=bounded`
//!   when the augmented graph hit the state cap
//! - `sim seed=<int> steps=<int> stop=<budget|quiescent|deadlock|property> cs_entries=<csv> max_bypass=<csv> trace=<path|none>`
//! - `timing wall_ms=<int>` (omitted when timing is disabled)

use std::fmt::Write as _;

use crate::explorer::{ExplorationReport, PropertyId, Verdict};
use crate::simulator::{Finding, RunStats, Stop};

pub const SCHEMA_LINE: &str = "schema=mutexlab-report version=1";

fn csv<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn path_or_none(path: Option<&str>) -> &str {
    path.unwrap_or("none")
}

/// `trace_paths` maps failing properties to the files their traces were
/// written to.
pub fn machine_check(report: &ExplorationReport, trace_paths: &[(PropertyId, String)], timing: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{SCHEMA_LINE}");
    let _ = writeln!(
        out,
        "record=run protocol={} n={} states={} transitions={} truncated={}",
        report.protocol, report.n, report.states, report.transitions, report.truncated
    );
    for (p, v) in &report.verdicts {
        let path = trace_paths.iter().find(|(q, _)| q == p).map(|(_, s)| s.as_str());
        let _ = writeln!(out, "record=property id={p} verdict={} trace={}", v.label(), path_or_none(path));
    }
    if let Some(bounds) = &report.max_bypass {
        for (i, b) in bounds.iter().enumerate() {
            let _ = writeln!(out, "record=bypass process=p{i} max={b}");
        }
    } else if report.bypass_truncated {
        let _ = writeln!(out, "record=bypass process=all max=bounded");
    }
    if timing {
        let _ = writeln!(out, "record=timing wall_ms={}", report.wall_time.as_millis());
    }
    out
}

pub fn text_check(report: &ExplorationReport, trace_paths: &[(PropertyId, String)], timing: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} n={}: {} states, {} transitions{}",
        report.protocol,
        report.n,
        report.states,
        report.transitions,
        if report.truncated { " (state cap reached)" } else { "" }
    );
    for (p, v) in &report.verdicts {
        let mark = match v {
            Verdict::Pass => "PASS   ",
            Verdict::Fail(_) => "FAIL   ",
            Verdict::Bounded => "BOUNDED",
        };
        let _ = write!(out, "  {mark} {:<20} {}", p.as_str(), p.description());
        if let Some(t) = v.trace() {
            let _ = write!(out, " [{} steps", t.len());
            match t.cycle_start {
                Some(k) if k == t.len() => out.push_str(", then stutters forever"),
                Some(k) => {
                    let _ = write!(out, ", cycle from step {}", k + 1);
                }
                None => {}
            }
            out.push(']');
        }
        if let Some((_, path)) = trace_paths.iter().find(|(q, _)| q == p) {
            let _ = write!(out, " -> {path}");
        }
        out.push('\n');
    }
    if let Some(bounds) = &report.max_bypass {
        let _ = writeln!(out, "  max bypass per process: {}", csv(bounds));
    } else if report.bypass_truncated {
        out.push_str("  max bypass: BOUNDED (state cap reached on the augmented graph)\n");
    }
    if timing {
        let _ = writeln!(out, "  wall time: {:.3}s", report.wall_time.as_secs_f64());
    }
    out
}

fn stop_label(stop: &Stop) -> String {
    match stop {
        Stop::Budget => "budget".into(),
        Stop::Quiescent => "quiescent".into(),
        Stop::Finding(Finding::Deadlock) => "deadlock".into(),
        Stop::Finding(Finding::Violation(p)) => p.to_string(),
    }
}

pub fn machine_sim_record(stats: &RunStats, trace_path: Option<&str>) -> String {
    format!(
        "record=sim seed={} steps={} stop={} cs_entries={} max_bypass={} trace={}\n",
        stats.seed,
        stats.steps,
        stop_label(&stats.stop),
        csv(&stats.cs_entries),
        csv(&stats.max_bypass),
        path_or_none(trace_path)
    )
}

pub fn text_sim(stats: &RunStats, trace_path: Option<&str>) -> String {
    let mut out = format!(
        "seed {}: {} steps, stop={}, cs entries [{}], max bypass [{}]",
        stats.seed,
        stats.steps,
        stop_label(&stats.stop),
        csv(&stats.cs_entries),
        csv(&stats.max_bypass)
    );
    for (step, f) in &stats.violations {
        let _ = write!(out, "\n  {f} at step {step}");
    }
    if let Some(p) = trace_path {
        let _ = write!(out, "\n  trace -> {p}");
    }
    let _ = write!(out, "\n  final {}", stats.final_configuration.compact());
    out.push('\n');
    out
}

/// Parses one machine record into its pairs; `None` if the line is malformed.
pub fn parse_record(line: &str) -> Option<Vec<(&str, &str)>> {
    line.split(' ').map(|kv| kv.split_once('=')).collect()
}
