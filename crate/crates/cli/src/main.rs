use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use noregret::learners::LearnerKind;
use noregret::scalar::{format_rational, Rational};
use noregret::verify::VerificationReport;
use noregret_cli::commands;
use noregret_cli::config::{self, Command, ExperimentConfig, LpProgram, VerifyBlock};
use noregret_cli::render::{self, Format};
use noregret_cli::{parse_config, CliError};

#[derive(Parser)]
#[command(name = "noregret", version, about = "Repeated auctions against no-regret buyers")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Output directory for written artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured trial count.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Worker threads for trials.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Stdout format.
    #[arg(long, global = true, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Runs an experiment file (any command).
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Simulates a configuration and writes trace.csv and summary.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solves one of the revenue LPs.
    Lp {
        #[arg(value_enum)]
        program: LpProgram,
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Exact checks of the counterexamples.
    Verify {
        #[command(subcommand)]
        claim: VerifyCmd,
    },
    /// Compares learner kinds on one configuration.
    BenchLearners {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "mw,ftl,ftpl")]
        kinds: Vec<String>,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    Counterexample {
        #[arg(long)]
        delta: String,
        #[arg(long = "M")]
        scale: String,
    },
    Nonconvex,
    Samebid {
        #[arg(long = "qS")]
        q_s: String,
        #[arg(long)]
        n: usize,
    },
    UniformSubopt,
    /// Simulates the configuration and checks its empirical allocations.
    Bmsw {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Whether the command's own check passed; errors are reported separately.
type Outcome = Result<bool, CliError>;

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Reads an experiment file; a bare simulation config is wrapped as one with `command`.
fn load(path: &Path, command: Command, g: &Global) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut doc: Value = serde_json::from_str(&text).map_err(|e| CliError::io(path, e))?;
    if doc.get("command").is_none() {
        doc = json!({ "command": command, "simulation": doc });
        if command == Command::Verify {
            doc["verify"] = json!({"claim": "bmsw"});
        }
        if command == Command::BenchLearners {
            doc["bench"] = json!({"kinds": []});
        }
    }
    if let Some(s) = g.seed {
        doc["seed"] = json!(s);
    }
    if let Some(t) = g.trials {
        doc["trials"] = json!(t);
    }
    parse_config(&doc.to_string(), &base_dir(path)).map_err(CliError::Schema)
}

fn out_dir(g: &Global, cfg: &ExperimentConfig) -> PathBuf {
    g.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"))
}

fn emit(text: String) {
    print!("{text}");
}

fn save_json(g: &Global, name: &str, v: &impl serde::Serialize) -> Result<(), CliError> {
    if let Some(dir) = &g.out {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(name);
        let text = serde_json::to_string_pretty(v).map_err(|e| CliError::io(&path, e))?;
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}

fn show_report(g: &Global, r: &VerificationReport) -> Outcome {
    save_json(g, "report.json", r)?;
    emit(render::report(r, g.format));
    Ok(r.pass)
}

fn samebid(g: &Global, q_s: &str, n: usize) -> Outcome {
    let bound: Rational = commands::samebid(q_s, n)?;
    let doc = json!({"q_s": q_s, "n": n, "bound": format_rational(&bound)});
    save_json(g, "report.json", &doc)?;
    match g.format {
        Format::Json => emit(serde_json::to_string_pretty(&doc).expect("json") + "\n"),
        Format::Csv => emit(format!("q_s,n,bound\n{q_s},{n},{}\n", format_rational(&bound))),
        Format::Table => emit(format!("{}\n", format_rational(&bound))),
    }
    Ok(true)
}

fn run_experiment(cfg: &ExperimentConfig, base: &Path, g: &Global) -> Outcome {
    match cfg.command {
        Command::Simulate => {
            let sim = cfg.simulation.as_ref().expect("validated");
            let summary = commands::simulate(sim, &out_dir(g, cfg), g.jobs)?;
            emit(render::simulation(&summary, g.format));
            Ok(true)
        }
        Command::Lp => {
            let block = cfg.lp.as_ref().expect("validated");
            let dist = config::experiment_dist(cfg, base)?;
            let out = commands::lp(block.program, &dist, block.n)?;
            save_json(g, "solution.json", &out)?;
            emit(render::lp(&out, g.format));
            Ok(true)
        }
        Command::Verify => match cfg.verify.as_ref().expect("validated") {
            VerifyBlock::Counterexample { delta, scale } => show_report(g, &commands::counterexample(delta, scale)?),
            VerifyBlock::Nonconvex => show_report(g, &commands::nonconvex()),
            VerifyBlock::UniformSubopt => show_report(g, &commands::uniform_subopt()),
            VerifyBlock::Samebid { q_s, n } => samebid(g, q_s, *n),
            VerifyBlock::Bmsw => show_report(g, &commands::bmsw(cfg.simulation.as_ref().expect("validated"))?),
        },
        Command::BenchLearners => {
            let sim = cfg.simulation.as_ref().expect("validated");
            let kinds = &cfg.bench.as_ref().expect("validated").kinds;
            let rows = commands::bench_learners(sim, kinds, g.jobs)?;
            save_json(g, "bench.json", &rows)?;
            emit(render::bench(&rows, g.format));
            Ok(true)
        }
    }
}

fn parse_kinds(names: &[String]) -> Result<Vec<LearnerKind>, CliError> {
    names
        .iter()
        .map(|k| serde_json::from_value(json!(k)).map_err(|_| CliError::Usage(format!("unknown learner kind {k:?}"))))
        .collect()
}

fn dispatch(cli: &Cli) -> Outcome {
    let g = &cli.global;
    match &cli.command {
        Cmd::Run { config } => {
            let cfg = load(config, Command::Simulate, g)?;
            run_experiment(&cfg, &base_dir(config), g)
        }
        Cmd::Simulate { config } => {
            let cfg = load(config, Command::Simulate, g)?;
            if cfg.command != Command::Simulate {
                return Err(CliError::Usage("simulate needs a simulation config; use `run` for other commands".into()));
            }
            run_experiment(&cfg, &base_dir(config), g)
        }
        Cmd::BenchLearners { config, kinds } => {
            let mut cfg = load(config, Command::BenchLearners, g)?;
            let kinds = parse_kinds(kinds)?;
            match cfg.bench.as_mut() {
                Some(b) if b.kinds.is_empty() => b.kinds = kinds,
                Some(_) => {}
                None => cfg.bench = Some(config::BenchBlock { kinds }),
            }
            cfg.command = Command::BenchLearners;
            run_experiment(&cfg, &base_dir(config), g)
        }
        Cmd::Lp { program, dist, n } => {
            let d = config::read_dist::<Rational>(dist)?;
            if *n == 0 {
                return Err(CliError::Usage("--n must be at least 1".into()));
            }
            let out = commands::lp(*program, &d, *n)?;
            save_json(g, "solution.json", &out)?;
            emit(render::lp(&out, g.format));
            Ok(true)
        }
        Cmd::Verify { claim } => match claim {
            VerifyCmd::Counterexample { delta, scale } => show_report(g, &commands::counterexample(delta, scale)?),
            VerifyCmd::Nonconvex => show_report(g, &commands::nonconvex()),
            VerifyCmd::Samebid { q_s, n } => samebid(g, q_s, *n),
            VerifyCmd::UniformSubopt => show_report(g, &commands::uniform_subopt()),
            VerifyCmd::Bmsw { config } => {
                let cfg = load(config, Command::Verify, g)?;
                let sim = cfg.simulation.as_ref().ok_or_else(|| CliError::Usage("bmsw needs a simulation block".into()))?;
                show_report(g, &commands::bmsw(sim)?)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(2)
        }
    }
}
