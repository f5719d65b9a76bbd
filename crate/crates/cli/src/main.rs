use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand};
use growthbound::formats::record::{CountMatrix, RunRecord};
use growthbound::formats::{diagram_dot, schreier_dot, zoo};
use growthbound::growth::growth;
use growthbound::opt::OptOptions;
use growthbound::strategy::{run_opt, run_ovi, Caps, StrategyOptions, StrategyRun};
use growthbound::superpoly::superpoly_report;
use growthbound::weights::parse_weight_list;
use growthbound::{alpha_from, search_egg, Context, PortraitCaps, SearchConfig, SearchStatus, Weights};

#[derive(Parser)]
#[command(name = "growthbound", version, about = "Certified growth bounds for automata groups")]
struct Cli {
    /// Worker threads for the search (results do not depend on it).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct MachineArgs {
    /// Builtin name or path to an automaton file.
    machine: String,
    /// Cover blocks, e.g. `{a},{b,c,d}`, `free` or `auto`.
    #[arg(long)]
    aux_blocks: Option<String>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 256)]
    radius_cap: usize,
    #[arg(long, default_value_t = 20_000_000)]
    max_frontier: usize,
    /// Emit the run record as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a machine and its cover.
    Validate {
        #[command(flatten)]
        m: MachineArgs,
    },
    /// Search for an egg under fixed weights.
    Target {
        #[command(flatten)]
        m: MachineArgs,
        #[arg(long, default_value = "uniform")]
        weights: String,
        #[arg(long, default_value_t = 0.99)]
        target: f64,
        #[command(flatten)]
        s: SearchArgs,
        /// Also write the egg's count matrix to this file.
        #[arg(long)]
        count_matrix: Option<PathBuf>,
    },
    /// Alternate searches and weight optimization over a target schedule.
    Opt {
        #[command(flatten)]
        m: MachineArgs,
        #[arg(long, default_value = "uniform")]
        weights: String,
        /// Comma-separated targets.
        #[arg(long, default_value = "0.9")]
        targets: String,
        /// Reoptimize during each search at levels divisible by this.
        #[arg(long)]
        update: Option<usize>,
        #[arg(long, default_value_t = 0)]
        opt_seed: u64,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[command(flatten)]
        s: SearchArgs,
    },
    /// One search that reoptimizes every `update` levels.
    Ovi {
        #[command(flatten)]
        m: MachineArgs,
        #[arg(long, default_value = "uniform")]
        weights: String,
        #[arg(long, default_value_t = 0.99)]
        target: f64,
        #[arg(long, default_value_t = 10)]
        update: usize,
        #[arg(long, default_value_t = 0)]
        opt_seed: u64,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[command(flatten)]
        s: SearchArgs,
    },
    /// Ball sizes for the uniform word metric.
    Growth {
        #[command(flatten)]
        m: MachineArgs,
        #[arg(long, default_value_t = 8)]
        maxlen: usize,
        /// Add inverses to the generating set first.
        #[arg(long)]
        symmetric: bool,
        #[arg(long, default_value_t = 5_000_000)]
        max_ball: usize,
    },
    /// Bounded checks of the super-polynomial growth criterion.
    Superpoly {
        #[command(flatten)]
        m: MachineArgs,
        /// Block partition to test; defaults to the cover.
        #[arg(long)]
        blocks: Option<String>,
        #[arg(long, default_value_t = 8)]
        maxlen: usize,
        /// Weights for the egg search part of the verdict.
        #[arg(long, default_value = "uniform")]
        weights: String,
        #[arg(long, default_value_t = 0.99)]
        target: f64,
        #[arg(long, default_value_t = 64)]
        radius_cap: usize,
    },
    /// Graphviz export of the machine (or its level-one Schreier graph).
    ExportDot {
        machine: String,
        #[arg(long)]
        dual: bool,
    },
    /// Run the session service.
    Serve {
        #[arg(long, default_value_t = 8765)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
        #[arg(long, env = "GROWTHBOUND_WORKDIR")]
        workdir: Option<PathBuf>,
    },
    /// Growth exponent certified by a contraction coefficient.
    Bound {
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        d: usize,
    },
    /// List the builtin machines.
    Zoo,
}

fn source_text(machine: &str) -> Result<String> {
    if zoo::builtin(machine).is_ok() {
        return Ok(machine.to_string());
    }
    let p = Path::new(machine);
    if p.exists() {
        return std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()));
    }
    bail!("`{machine}` is neither a builtin nor a readable file")
}

fn load(m: &MachineArgs) -> Result<Context> {
    let text = source_text(&m.machine)?;
    let mut ctx = Context::resolve(&text, m.aux_blocks.as_deref(), PortraitCaps::default())?;
    if zoo::builtin(&m.machine).is_err() {
        ctx.name = Path::new(&m.machine).file_stem().map_or("custom".into(), |s| s.to_string_lossy().into_owned());
    }
    Ok(ctx)
}

fn weights(ctx: &Context, text: &str, notes: &mut Vec<String>) -> Result<Weights> {
    let raw = parse_weight_list(text, ctx.num_gens())?;
    let ing = ctx.ingest(&raw)?;
    if ing.normalized && text.trim() != "uniform" {
        notes.push("weights normalized to sum 1".into());
    }
    if ing.projected {
        notes.push("weights projected onto the triangular constraints".into());
    }
    Ok(ing.weights)
}

fn status_code(s: SearchStatus) -> ExitCode {
    match s {
        SearchStatus::Found => ExitCode::SUCCESS,
        _ => ExitCode::from(2),
    }
}

fn print_record(rec: &RunRecord, json: bool) {
    if json {
        println!("{}", serde_json::to_string_pretty(rec).expect("records serialize"));
    } else {
        println!("machine   {} ({}: {})", rec.machine, rec.aux.mode, rec.aux.blocks);
        println!("weights   {:?}", rec.weights);
        println!("target    {}", rec.target);
        println!("status    {}", rec.status);
        println!("eta       {:.6}", rec.eta);
        match rec.alpha {
            Some(a) => println!("alpha     {a:.6}"),
            None => println!("alpha     -"),
        }
        println!("radius    {}", rec.radius);
        println!("egg size  {}", rec.egg_size);
        for n in &rec.notes {
            println!("note      {n}");
        }
    }
}

fn strategy_opts(s: &SearchArgs, workers: Option<usize>, seed: u64, restarts: usize) -> StrategyOptions {
    StrategyOptions {
        caps: Caps { radius_cap: s.radius_cap, max_frontier: s.max_frontier, workers },
        opt: OptOptions { seed, restarts, ..OptOptions::default() },
        checkpoints: false,
    }
}

fn finish_strategy(ctx: &Context, run: &StrategyRun, seed: u64, json: bool, mut notes: Vec<String>) -> ExitCode {
    let Some(last) = run.rounds.last() else {
        println!("empty schedule");
        return ExitCode::SUCCESS;
    };
    // report the last certified bound; a failing final round does not erase it
    let round = run.best().unwrap_or(last);
    let mut rec = RunRecord::from_round(ctx, round, Some(seed));
    notes.extend(run.notes.iter().cloned());
    for (i, r) in run.rounds.iter().enumerate() {
        notes.push(format!(
            "round {}: target {} status {} eta {:.6} radius {} egg {}",
            i + 1,
            r.target,
            r.status.as_str(),
            r.eta,
            r.radius,
            r.egg_size
        ));
    }
    rec.notes = notes;
    print_record(&rec, json);
    status_code(last.status)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Validate { m } => {
            let text = source_text(&m.machine)?;
            let machine = match zoo::builtin(&text) {
                Ok(mm) => mm,
                Err(_) => growthbound::formats::parse_automaton(&text)?,
            };
            let report = machine.validate();
            println!("states {} letters {}", machine.num_states(), machine.degree());
            println!("complete {} invertible {} identity {}", report.complete, report.invertible, report.identity_ok);
            for issue in &report.issues {
                println!("issue {issue:?}");
            }
            if !report.is_valid() {
                return Ok(ExitCode::from(2));
            }
            let ctx = load(&m)?;
            println!("cover {} ({}) verified", ctx.aux.describe(&ctx.group), ctx.aux.mode());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Target { m, weights: w, target, s, count_matrix } => {
            let ctx = load(&m)?;
            let mut notes = Vec::new();
            let pi = weights(&ctx, &w, &mut notes)?;
            let mut cfg = SearchConfig::new(target).radius_cap(s.radius_cap).workers(cli.workers);
            cfg.max_frontier = s.max_frontier;
            let (res, _) = search_egg(ctx.table.clone(), pi, &ctx.constraints, &cfg)?;
            let mut rec = RunRecord::from_result(&ctx, &res);
            if let Some(path) = count_matrix {
                let cm = CountMatrix::from_result(&ctx, &res);
                std::fs::write(&path, serde_json::to_vec_pretty(&cm)?)?;
                rec.count_matrix_ref = Some(path.display().to_string());
            }
            rec.notes = notes;
            print_record(&rec, s.json);
            Ok(status_code(res.status))
        }
        Cmd::Opt { m, weights: w, targets, update, opt_seed, restarts, s } => {
            let ctx = load(&m)?;
            let mut notes = Vec::new();
            let pi = weights(&ctx, &w, &mut notes)?;
            let targets: Vec<f64> = targets
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<f64>().with_context(|| format!("bad target `{t}`")))
                .collect::<Result<_>>()?;
            let opts = strategy_opts(&s, cli.workers, opt_seed, restarts);
            let run = run_opt(&ctx, &pi, &targets, update, &opts)?;
            Ok(finish_strategy(&ctx, &run, opt_seed, s.json, notes))
        }
        Cmd::Ovi { m, weights: w, target, update, opt_seed, restarts, s } => {
            let ctx = load(&m)?;
            let mut notes = Vec::new();
            let pi = weights(&ctx, &w, &mut notes)?;
            let opts = strategy_opts(&s, cli.workers, opt_seed, restarts);
            let run = run_ovi(&ctx, &pi, target, update, &opts)?;
            Ok(finish_strategy(&ctx, &run, opt_seed, s.json, notes))
        }
        Cmd::Growth { m, maxlen, symmetric, max_ball } => {
            let mut ctx = load(&m)?;
            if symmetric {
                let sym = growthbound::symmetrize(ctx.group.machine())?;
                ctx = Context::new(ctx.name.clone(), sym, "auto", PortraitCaps::default())?;
            }
            let series = growth(&ctx.table, maxlen, max_ball);
            for (l, g) in series.gamma.iter().enumerate() {
                println!("{l}\t{g}");
            }
            if series.complete {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("stopped early: ball exceeded {max_ball} elements");
                Ok(ExitCode::from(2))
            }
        }
        Cmd::Superpoly { m, blocks, maxlen, weights: w, target, radius_cap } => {
            let ctx = load(&m)?;
            let partition: Vec<Vec<growthbound::Gen>> = match &blocks {
                Some(b) => {
                    let aux = growthbound::AuxGroup::parse_blocks(&ctx.group, b)?;
                    aux.blocks().iter().map(|b| b.members().to_vec()).collect()
                }
                None => ctx.aux.blocks().iter().map(|b| b.members().to_vec()).collect(),
            };
            let mut notes = Vec::new();
            let pi = weights(&ctx, &w, &mut notes)?;
            let cfg = SearchConfig::new(target).radius_cap(radius_cap).workers(cli.workers);
            let (res, _) = search_egg(ctx.table.clone(), pi, &ctx.constraints, &cfg)?;
            let report = superpoly_report(&ctx.group, &ctx.aux, &partition, maxlen, Some(&res))?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if report.verdict == "intermediate-conditional" { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Cmd::ExportDot { machine, dual } => {
            let text = source_text(&machine)?;
            let m = match zoo::builtin(&text) {
                Ok(mm) => mm,
                Err(_) => growthbound::formats::parse_automaton(&text)?,
            };
            print!("{}", if dual { schreier_dot(&m) } else { diagram_dot(&m) });
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Serve { port, bind, workdir } => {
            tracing_subscriber::fmt().with_writer(std::io::stderr).init();
            let addr: std::net::SocketAddr = format!("{bind}:{port}").parse().context("bind address")?;
            let state = match workdir {
                Some(w) => growthbound_service::AppState::load(w).map_err(|e| anyhow::anyhow!("{e}"))?,
                None => growthbound_service::AppState::new(None),
            };
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(growthbound_service::serve(addr, state))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Bound { eta, d } => {
            println!("{}", alpha_from(eta, d)?);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Zoo => {
            for e in zoo::list() {
                println!("{:<18} {:>2} states {:>2} letters  {:<28} {}", e.name, e.states, e.letters, e.blocks, e.description);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
