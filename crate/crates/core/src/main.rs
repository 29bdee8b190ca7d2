use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use stable_husbands::bounds::{optimize_tail, tail_bound, theorem_envelope, Direction, Pgf};
use stable_husbands::harness::{self, ExperimentConfig, Kind, Method, Sizes};
use stable_husbands::labels::Labels;
use stable_husbands::matching::{find_blocking_pairs, stable_husbands, trace_table};
use stable_husbands::oracle::{enumerate_stable, DEFAULT_LIMIT};
use stable_husbands::process::{
    self, audit_window, lemma_audit, ProposalMode, RunConfig, StopRule,
};
use stable_husbands::{Matching, PreferenceInstance};

#[derive(Parser)]
#[command(
    name = "stable-husbands",
    version,
    about = "Stable husbands of a fixed girl: enumeration, random model, tail bounds, Monte Carlo"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a uniformly random instance (or the four-couple example) as JSON.
    Generate {
        #[arg(long, required_unless_present = "fixture")]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, conflicts_with = "n")]
        fixture: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List every stable husband of one girl, worst first.
    Husbands {
        #[arg(long)]
        instance: PathBuf,
        /// Index, or a letter for the four-couple example.
        #[arg(long)]
        girl: String,
        #[arg(long)]
        trace: bool,
        /// Print the trace as a tab-separated table instead of JSON.
        #[arg(long, requires = "trace")]
        table: bool,
    },
    /// Report the blocking pairs of a matching; exits 1 when there are any.
    Check {
        #[arg(long)]
        instance: PathBuf,
        /// JSON array of husband indices per girl, `null` for single.
        #[arg(long)]
        matching: PathBuf,
    },
    /// All stable matchings by exhaustive search (small n only).
    Enumerate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
    },
    /// One run of the random proposal process.
    Simulate(SimulateArgs),
    /// Generating-function tail bound.
    Bounds {
        /// `binom N TRIALS` or `accept M`.
        #[arg(long, num_args = 2..=3, value_names = ["FORM", "ARGS"])]
        pgf: Vec<String>,
        #[arg(long, value_enum)]
        tail: Tail,
        #[arg(long)]
        r: f64,
        #[arg(
            long,
            conflicts_with = "optimize",
            required_unless_present = "optimize"
        )]
        x: Option<f64>,
        #[arg(long)]
        optimize: bool,
    },
    /// Interval and proof quantities for given constants.
    Envelope {
        #[arg(long)]
        n: f64,
        #[arg(long)]
        c: f64,
        #[arg(long = "C")]
        big_c: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        eps: f64,
    },
    /// Monte Carlo campaign; exits 1 when a gate fails, 2 on a bad config.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Tail {
    Lower,
    Upper,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    girl: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop after this many proposals.
    #[arg(long, conflicts_with = "natural")]
    cap: Option<u64>,
    /// Stop where the deterministic enumeration would (the default).
    #[arg(long)]
    natural: bool,
    /// Audit window exponent; the cap defaults to floor(n^(1+delta)).
    #[arg(long, default_value_t = 0.3)]
    delta: f64,
    /// Run the lemma audits on the capped run.
    #[arg(long, conflicts_with = "natural")]
    audit: bool,
    /// Proposers never repeat a girl.
    #[arg(long)]
    memory: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, conflicts_with = "kind")]
    config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    kind: Option<Kind>,
    /// One size or a comma-separated sweep.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    girl: usize,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    memory: bool,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long = "C")]
    big_c: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    verify_oracle: bool,
    /// Overrides the config file.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory; overrides the config file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    plot_data: bool,
}

/// Exit 2: unusable input. Exit 1: a check or gate failed.
enum Failure {
    Input(String),
    Gate,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Gate) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Stdout line that exits quietly when the reader has gone away.
fn emit(text: &str) {
    use std::io::Write;
    if let Err(e) = writeln!(std::io::stdout().lock(), "{text}") {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        panic!("stdout: {e}");
    }
}

fn print(value: &impl Serialize) {
    emit(&serde_json::to_string_pretty(value).expect("serializable"));
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Generate {
            n,
            seed,
            fixture,
            out,
        } => {
            let inst = if fixture {
                PreferenceInstance::four_couples()
            } else {
                PreferenceInstance::generate_uniform(n.expect("required"), seed)?
            };
            match out {
                Some(path) => inst.save(path)?,
                None => emit(&inst.to_json()),
            }
        }
        Command::Husbands {
            instance,
            girl,
            trace,
            table,
        } => {
            let inst = PreferenceInstance::load(instance)?;
            let labels = Labels::for_instance(&inst);
            let g = labels
                .parse_girl(&girl)
                .ok_or_else(|| Failure::Input(format!("cannot parse girl {girl:?}")))?;
            let found = stable_husbands(&inst, g, trace)?;
            let rows = trace_table(&found, labels);
            if table {
                for row in rows {
                    emit(&row.join("\t"));
                }
            } else {
                let names: Vec<String> = found.husbands.iter().map(|&b| labels.boy(b)).collect();
                let mut doc = json!({ "enumeration": found, "labels": names });
                if trace {
                    doc["table"] = json!(rows);
                }
                print(&doc);
            }
        }
        Command::Check { instance, matching } => {
            let inst = PreferenceInstance::load(instance)?;
            let text = std::fs::read_to_string(&matching)?;
            let m: Matching = serde_json::from_str(&text)?;
            let pairs = find_blocking_pairs(&inst, &m)?;
            let stable = pairs.is_empty() && m.is_complete();
            print(
                &json!({ "stable": stable, "complete": m.is_complete(), "blocking_pairs": pairs }),
            );
            if !stable {
                return Err(Failure::Gate);
            }
        }
        Command::Enumerate { instance, limit } => {
            let inst = PreferenceInstance::load(instance)?;
            print(&enumerate_stable(&inst, limit)?);
        }
        Command::Simulate(args) => simulate(args)?,
        Command::Bounds {
            pgf,
            tail,
            r,
            x,
            optimize,
        } => {
            let pgf = parse_pgf(&pgf)?;
            let direction = match tail {
                Tail::Lower => Direction::Lower,
                Tail::Upper => Direction::Upper,
            };
            let bound = if optimize {
                optimize_tail(&pgf, direction, r)?
            } else {
                tail_bound(&pgf, direction, r, x.expect("required"))?
            };
            print(&bound);
        }
        Command::Envelope {
            n,
            c,
            big_c,
            delta,
            eps,
        } => {
            print(&theorem_envelope(n, c, big_c, delta, eps)?);
        }
        Command::Experiment(args) => experiment(args)?,
    }
    Ok(())
}

fn parse_pgf(words: &[String]) -> Result<Pgf, Failure> {
    let num = |s: &String| {
        s.parse::<u64>()
            .map_err(|_| Failure::Input(format!("expected a nonnegative integer, got {s:?}")))
    };
    match words {
        [form, n, trials] if form == "binom" => Ok(Pgf::binomial(num(n)?, num(trials)?)),
        [form, m] if form == "accept" => Ok(Pgf::acceptances(num(m)?)),
        _ => Err(Failure::Input(format!(
            "--pgf takes `binom N TRIALS` or `accept M`, got {words:?}"
        ))),
    }
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    if args.n == 0 || args.girl >= args.n {
        return Err(Failure::Input(format!(
            "need 0 <= girl < n, got girl {} and n {}",
            args.girl, args.n
        )));
    }
    let capped = args.audit || args.cap.is_some();
    let max_proposals = match (args.cap, args.audit) {
        (Some(cap), _) => cap,
        (None, true) => audit_window(args.n, args.delta),
        (None, false) => u64::MAX,
    };
    let config = RunConfig {
        n: args.n,
        girl: args.girl,
        seed: args.seed,
        max_proposals: max_proposals.max(1),
        stop: if capped {
            StopRule::TimeCap
        } else {
            StopRule::Natural
        },
        mode: if args.memory {
            ProposalMode::Memory
        } else {
            ProposalMode::Amnesia
        },
    };
    let out = process::run(&config);
    let s = &out.stats;
    let longest_run = s.run_lengths.iter().map(|r| r.length).max().unwrap_or(0);
    let mut doc = json!({
        "config": config,
        "stop": out.stop,
        "husband_count": out.husband_count(),
        "outputs": out.outputs,
        "proposals": s.proposals,
        "first_output_time": s.first_output_time,
        "acceptances_by_g": s.acceptances_by_g,
        "acceptances_by_g_before_first_output": s.acceptances_by_g_before_first_output,
        "max_proposals_per_girl": s.proposals_per_girl.iter().max(),
        "min_proposals_per_girl": s.proposals_per_girl.iter().min(),
        "runs": s.run_lengths.len(),
        "longest_run": longest_run,
    });
    let mut failed = false;
    if args.audit {
        match lemma_audit(s, args.n, args.delta) {
            Ok(report) => {
                failed = !report.passed;
                doc["audit"] = json!(report);
            }
            Err(e) => {
                failed = true;
                doc["audit_error"] = json!(e.to_string());
            }
        }
    }
    print(&doc);
    if failed {
        return Err(Failure::Gate);
    }
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<(), Failure> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let kind = args.kind.expect("required");
            let n = match args.n.as_slice() {
                [] => return Err(Failure::Input("--n is required without --config".into())),
                [one] => Sizes::One(*one),
                many => Sizes::Sweep(many.to_vec()),
            };
            let mut c = ExperimentConfig::new(kind, 0, args.trials, args.seed);
            c.n = n;
            c.girl = args.girl;
            c.method = args.method.unwrap_or_default();
            if args.memory {
                c.mode = ProposalMode::Memory;
            }
            c.c = args.c.unwrap_or(c.c);
            c.big_c = args.big_c.unwrap_or(c.big_c);
            c.delta = args.delta;
            c.epsilon = args.eps;
            c.m = args.m;
            c.verify_with_oracle = args.verify_oracle;
            c
        }
    };
    if args.workers.is_some() {
        config.workers = args.workers;
    }
    if let Some(dir) = args.out {
        config.output = Some(harness::OutputSpec {
            dir,
            plot_data: args.plot_data,
        });
    } else if args.plot_data {
        if let Some(target) = config.output.as_mut() {
            target.plot_data = true;
        }
    }
    let run = harness::run_experiment(&config)?;
    match &config.output {
        Some(target) => {
            harness::write_outputs(&run, &target.dir, target.plot_data)?;
        }
        None => print!("{}", run.report.to_json()),
    }
    for size in &run.report.sizes {
        for gate in &size.gates {
            eprintln!(
                "{} n={} {}: {} (bounds {:?}..{:?})",
                if gate.passed { "PASS" } else { "FAIL" },
                size.n,
                gate.name,
                gate.value,
                gate.lower,
                gate.upper
            );
        }
    }
    for f in &run.report.failures {
        eprintln!(
            "FAIL n={} trial {} (seed {}): {}",
            f.n, f.trial, f.seed, f.message
        );
    }
    if run.report.passed {
        Ok(())
    } else {
        Err(Failure::Gate)
    }
}
