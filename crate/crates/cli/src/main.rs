use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};

use pinball::config::{ConfigError, RunConfig, Script};
use pinball::report::{render_report, ReportInputs};
use pinball::run::{execute, RunOptions};
use pinball::trace::RunTrace;
use pinball::verify::{check_trace, replay};
use pinball::Mode;

const EXIT_VIOLATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "pinball", version, about = "Deterministic simulator for pinball-machine constructions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run configurations and write trace, snapshots and report.
    Run(RunArgs),
    /// Re-execute a trace and compare it event by event.
    Replay { trace: PathBuf },
    /// Check a trace file against the trace-level laws.
    Verify {
        trace: PathBuf,
        /// Also replay the trace and check every per-stage invariant.
        #[arg(long)]
        full: bool,
    },
    /// Print the report for a trace file.
    Report { trace: PathBuf },
    /// Script utilities.
    Scripts {
        #[command(subcommand)]
        command: ScriptsCommand,
    },
}

#[derive(Subcommand)]
enum ScriptsCommand {
    /// Validate run configurations or bare scripts.
    Validate {
        files: Vec<PathBuf>,
        /// Mode for bare scripts.
        #[arg(long, value_parser = parse_mode)]
        mode: Option<Mode>,
        /// Horizon for bare scripts.
        #[arg(long, default_value_t = 1000)]
        budget: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Full run configuration (TOML); may be repeated.
    #[arg(long)]
    config: Vec<PathBuf>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    #[arg(long)]
    budget: Option<u64>,
    /// Bare script (TOML) combined with --mode and --budget.
    #[arg(long)]
    script: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    levels: Option<usize>,
    /// Output directory.
    #[arg(long, env = "PINBALL_OUT", default_value = "pinball-out")]
    out: PathBuf,
    /// Skip the per-stage invariant checks.
    #[arg(long)]
    no_check: bool,
    /// Parallel runs when several configurations are given.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Replay a trace file instead of running.
    #[arg(long)]
    replay: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "maximal" => Ok(Mode::Maximal),
        "hhs" => Ok(Mode::Hhs),
        "balg" => Ok(Mode::Balg),
        _ => Err(format!("unknown mode {s:?} (expected maximal, hhs or balg)")),
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn load_trace(path: &Path) -> Result<RunTrace, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    RunTrace::from_jsonl(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Named configurations from the run arguments.
fn configs(a: &RunArgs) -> Result<Vec<(String, RunConfig)>, String> {
    let mut out = Vec::new();
    for p in &a.config {
        let mut cfg = RunConfig::from_toml_str(&read(p).map_err(|e| e.to_string())?)
            .map_err(|e| format!("{}: {e}", p.display()))?;
        if let Some(b) = a.budget {
            cfg.budget = b;
        }
        out.push((stem(p), cfg));
    }
    if let Some(p) = &a.script {
        let mode = a.mode.ok_or("--script needs --mode")?;
        let budget = a.budget.ok_or("--script needs --budget")?;
        let script = Script::from_toml_str(&read(p).map_err(|e| e.to_string())?)
            .map_err(|e| format!("{}: {e}", p.display()))?;
        out.push((stem(p), RunConfig::new(mode, budget, script)));
    }
    if out.is_empty() {
        return Err("nothing to run: give --config or --script".into());
    }
    for (name, cfg) in &mut out {
        if let Some(s) = a.seed {
            cfg.seed = s;
        }
        if let Some(l) = a.levels {
            cfg.levels = l;
        }
        cfg.validate().map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(out)
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into())
}

/// Runs one configuration into `dir`; returns whether every check passed.
fn run_one(name: &str, cfg: &RunConfig, dir: &Path, check: bool) -> Result<bool, String> {
    let io = |e: std::io::Error| format!("{}: {e}", dir.display());
    let opts = RunOptions { check_invariants: check, keep_snapshots: true, sample_ells: true };
    let out = execute(cfg, opts).map_err(|e| format!("{name}: {e}"))?;
    let oracles = cfg.validate().map_err(|e| format!("{name}: {e}"))?;
    fs::create_dir_all(dir.join("snapshots")).map_err(io)?;
    fs::write(dir.join("config.toml"), cfg.to_toml()).map_err(io)?;
    fs::write(dir.join("trace.jsonl"), out.trace.to_jsonl()).map_err(io)?;
    for s in &out.snapshots {
        fs::write(dir.join("snapshots").join(format!("stage-{:08}.json", s.stage)), s.to_json()).map_err(io)?;
    }
    let inputs = ReportInputs { violations: check.then_some(&out.violations[..]), ells: out.ells.as_ref() };
    let report = render_report(&out.trace, &oracles, inputs);
    fs::write(dir.join("report.txt"), &report).map_err(io)?;
    let trace_ok = check_trace(&out.trace, &oracles).is_empty();
    let ok = out.violations.is_empty() && trace_ok;
    println!(
        "{name}: {} stages, {} events, {} -> {}",
        out.trace.header.stages,
        out.trace.events.len(),
        if ok { "pass" } else { "VIOLATIONS" },
        dir.display()
    );
    Ok(ok)
}

fn cmd_run(a: &RunArgs) -> ExitCode {
    if let Some(t) = &a.replay {
        return cmd_replay(t);
    }
    let cfgs = match configs(a) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let many = cfgs.len() > 1;
    let dirs: Vec<PathBuf> =
        cfgs.iter().enumerate().map(|(i, (n, _))| if many { a.out.join(format!("{i:02}-{n}")) } else { a.out.clone() }).collect();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<bool, String>>>> = Mutex::new(vec![None; cfgs.len()]);
    std::thread::scope(|s| {
        for _ in 0..a.jobs.clamp(1, cfgs.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some((name, cfg)) = cfgs.get(i) else { break };
                let r = run_one(name, cfg, &dirs[i], !a.no_check);
                results.lock().expect("results lock")[i] = Some(r);
            });
        }
    });
    let results = results.into_inner().expect("results lock");
    let mut code = 0;
    for r in results.into_iter().flatten() {
        match r {
            Ok(true) => {}
            Ok(false) => code = code.max(EXIT_VIOLATION),
            Err(e) => {
                eprintln!("error: {e}");
                code = EXIT_CONFIG;
            }
        }
    }
    ExitCode::from(code)
}

fn cmd_replay(path: &Path) -> ExitCode {
    let trace = match load_trace(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match replay(&trace) {
        Ok(()) => {
            println!("replay: identical over {} stages", trace.header.stages);
            ExitCode::SUCCESS
        }
        Err(m) => {
            println!("replay: {m}");
            ExitCode::from(EXIT_VIOLATION)
        }
    }
}

fn cmd_verify(path: &Path, full: bool) -> ExitCode {
    let trace = match load_trace(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let oracles = match trace.header.config.validate() {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let mut ok = true;
    let vs = check_trace(&trace, &oracles);
    for v in &vs {
        println!("{} stage {}: {}", v.check, v.stage, v.detail);
    }
    println!("trace checks: {}", if vs.is_empty() { "pass" } else { "FAIL" });
    ok &= vs.is_empty();
    if full {
        match replay(&trace) {
            Ok(()) => println!("replay: identical"),
            Err(m) => {
                println!("replay: {m}");
                ok = false;
            }
        }
        let opts = RunOptions { check_invariants: true, ..Default::default() };
        match execute(&trace.header.config, opts) {
            Ok(out) => {
                for v in out.violations.iter().take(20) {
                    println!("{v}");
                }
                println!("stage invariants: {}", if out.violations.is_empty() { "pass" } else { "FAIL" });
                ok &= out.violations.is_empty();
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VIOLATION)
    }
}

fn cmd_report(path: &Path) -> ExitCode {
    let trace = match load_trace(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match trace.header.config.validate() {
        Ok(o) => {
            print!("{}", render_report(&trace, &o, ReportInputs::default()));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn cmd_validate(files: &[PathBuf], mode: Option<Mode>, budget: u64) -> ExitCode {
    let mut code = 0;
    for p in files {
        let res = read(p).and_then(|text| match RunConfig::from_toml_str(&text) {
            Ok(_) => Ok("run configuration"),
            Err(ConfigError::Parse(_)) if mode.is_some() => {
                let script = Script::from_toml_str(&text)?;
                let cfg = RunConfig::new(mode.expect("checked"), budget, script);
                cfg.validate().map_err(ConfigError::Script)?;
                Ok("script")
            }
            Err(e) => Err(e),
        });
        match res {
            Ok(kind) => println!("{}: ok ({kind})", p.display()),
            Err(e) => {
                println!("{}: {e}", p.display());
                code = EXIT_CONFIG;
            }
        }
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Replay { trace } => cmd_replay(trace),
        Command::Verify { trace, full } => cmd_verify(trace, *full),
        Command::Report { trace } => cmd_report(trace),
        Command::Scripts { command: ScriptsCommand::Validate { files, mode, budget } } => cmd_validate(files, *mode, *budget),
    }
}
