//! `mutexlab`: check, simulate and graph the shipped mutual exclusion protocols.
//!
//! Exit codes: 0 all properties pass or simulation clean, 1 violation found,
//! 2 usage or configuration error, 3 state cap exceeded.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mutexlab::explorer::DEFAULT_STATE_CAP;
use mutexlab::report;
use mutexlab::simulator::{check_options, simulate_many, SimulateOptions};
use mutexlab::{build, explore, export_dot, ExploreOptions, Policy, PropertyId, ProtocolId, Verdict};

const EXIT_OK: u8 = 0;
const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BOUNDED: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "mutexlab", version, about = "Explicit-state checker for shared-variable mutual exclusion protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Explore every interleaving and check the selected properties.
    Check(CheckArgs),
    /// Run seeded random schedules with online safety monitors.
    Simulate(SimulateArgs),
    /// Export the reachable configuration graph as DOT.
    Graph(GraphArgs),
    /// List the property catalog.
    Props(PropsArgs),
}

#[derive(Args, Debug)]
struct Target {
    /// asym, asym-sw, sym, asym-sw-noexitwait or sym-nocandidate.
    #[arg(long, value_parser = parse_protocol)]
    protocol: ProtocolId,
    /// Number of processes.
    #[arg(long)]
    n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    target: Target,
    /// Comma-separated property ids, or `all` for the protocol's default set.
    #[arg(long, default_value = "all")]
    properties: String,
    /// Directory receiving counterexample traces.
    #[arg(long, value_name = "PATH")]
    trace_out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    state_cap: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Omit wall-clock timing from the output.
    #[arg(long)]
    no_timing: bool,
    /// Also compute the worst-case bypass per process.
    #[arg(long)]
    bypass: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    target: Target,
    #[arg(long, default_value_t = 10_000)]
    steps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of runs; run k uses seed + k.
    #[arg(long, default_value_t = 1)]
    runs: u64,
    #[arg(long, value_parser = parse_policy, default_value = "uniform-enabled")]
    policy: Policy,
    /// Weight of exempt (voluntary) edges relative to the others.
    #[arg(long, default_value_t = 0.5)]
    exempt_weight: f64,
    /// Directory receiving traces of runs that hit a finding.
    #[arg(long, value_name = "PATH")]
    trace_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct GraphArgs {
    #[command(flatten)]
    target: Target,
    /// Write DOT here instead of standard output.
    #[arg(long, value_name = "PATH")]
    dot_out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    state_cap: usize,
}

#[derive(Args, Debug)]
struct PropsArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn parse_protocol(s: &str) -> Result<ProtocolId, String> {
    s.parse().map_err(|e: mutexlab::Error| e.to_string())
}

fn parse_policy(s: &str) -> Result<Policy, String> {
    s.parse()
}

fn parse_properties(spec: &str, proto: &mutexlab::ProtocolDefinition) -> mutexlab::Result<Vec<PropertyId>> {
    if spec == "all" {
        return Ok(PropertyId::defaults(proto.family));
    }
    spec.split(',').map(|s| s.trim().parse()).collect()
}

/// Failure reported to the user with an exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<mutexlab::Error> for Failure {
    fn from(e: mutexlab::Error) -> Self {
        Failure { code: EXIT_USAGE, message: e.to_string() }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: EXIT_USAGE, message: format!("{}: {e}", path.display()) }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| io_failure(path, e))
}

fn check(args: CheckArgs, out: &mut impl Write) -> Result<u8, Failure> {
    let proto = build(args.target.protocol, args.target.n)?;
    let properties = parse_properties(&args.properties, &proto)?;
    let opts = ExploreOptions { state_cap: args.state_cap, bypass: args.bypass };
    let report = explore(&proto, &properties, &opts)?;

    let dir = args.trace_out.unwrap_or_else(|| PathBuf::from("."));
    let mut written = Vec::new();
    for (p, v) in &report.verdicts {
        if let Some(trace) = v.trace() {
            let path = dir.join(format!("{}-n{}-{}.trace", proto.name, proto.n(), p));
            write_file(&path, &trace.render(&proto))?;
            written.push((*p, path.display().to_string()));
        }
    }

    let rendered = match args.format {
        Format::Text => report::text_check(&report, &written, !args.no_timing),
        Format::Machine => report::machine_check(&report, &written, !args.no_timing),
    };
    let _ = out.write_all(rendered.as_bytes());

    let bounded = report.verdicts.iter().any(|(_, v)| matches!(v, Verdict::Bounded)) || report.bypass_truncated;
    Ok(if report.any_fail() {
        EXIT_VIOLATION
    } else if bounded {
        EXIT_BOUNDED
    } else {
        EXIT_OK
    })
}

fn simulate(args: SimulateArgs, out: &mut impl Write) -> Result<u8, Failure> {
    let proto = build(args.target.protocol, args.target.n)?;
    let opts = SimulateOptions {
        steps: args.steps,
        seed: args.seed,
        policy: args.policy,
        exempt_weight: args.exempt_weight,
        record_trace: false,
    };
    check_options(&opts)?;
    let results = simulate_many(&proto, &opts, args.runs);

    let dir = args.trace_out.unwrap_or_else(|| PathBuf::from("."));
    let mut rendered = String::new();
    if args.format == Format::Machine {
        rendered.push_str(report::SCHEMA_LINE);
        rendered.push('\n');
    }
    let mut dirty = false;
    for r in &results {
        let path = match &r.trace {
            Some(trace) => {
                let path = dir.join(format!("{}-n{}-seed{}.trace", proto.name, proto.n(), r.stats.seed));
                write_file(&path, &trace.render(&proto))?;
                Some(path.display().to_string())
            }
            None => None,
        };
        dirty |= !r.stats.is_clean();
        rendered.push_str(&match args.format {
            Format::Text => report::text_sim(&r.stats, path.as_deref()),
            Format::Machine => report::machine_sim_record(&r.stats, path.as_deref()),
        });
    }
    let _ = out.write_all(rendered.as_bytes());
    Ok(if dirty { EXIT_VIOLATION } else { EXIT_OK })
}

fn graph(args: GraphArgs, out: &mut impl Write) -> Result<u8, Failure> {
    let proto = build(args.target.protocol, args.target.n)?;
    let dot = export_dot(&proto, args.state_cap);
    match args.dot_out {
        Some(path) => write_file(&path, &dot)?,
        None => {
            let _ = out.write_all(dot.as_bytes());
        }
    }
    Ok(EXIT_OK)
}

fn props(args: PropsArgs, out: &mut impl Write) -> u8 {
    let mut rendered = String::new();
    if args.format == Format::Machine {
        rendered.push_str(report::SCHEMA_LINE);
        rendered.push('\n');
    }
    for p in PropertyId::ALL {
        let scope = if p.symmetric_only() { "sym" } else { "all" };
        match args.format {
            Format::Text => rendered.push_str(&format!("{:<20} [{scope}] {}\n", p.as_str(), p.description())),
            Format::Machine => rendered.push_str(&format!("record=prop id={p} protocols={scope}\n")),
        }
    }
    let _ = out.write_all(rendered.as_bytes());
    EXIT_OK
}

fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let mut stdout = std::io::stdout().lock();
    let result = match cli.command {
        Command::Check(a) => check(a, &mut stdout),
        Command::Simulate(a) => simulate(a, &mut stdout),
        Command::Graph(a) => graph(a, &mut stdout),
        Command::Props(a) => Ok(props(a, &mut stdout)),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}
