use std::fs;
use std::io::{self, BufRead, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use chrono::TimeDelta;
use clap::{Args, Parser, Subcommand, ValueEnum};

use peakpoll::engine::{advance, Plan, Step};
use peakpoll::{http, PollService, ServiceConfig, SystemClock};
use peakpoll_core::elicit::ElicitationContext;
use peakpoll_core::single_peaked::is_single_peaked;
use peakpoll_core::spverify::{
    aggregate_ranking, find_consistent_axes_bruteforce, is_cardinally_realizable, median_peak_winner,
    pairwise_matrix, SpverifyError, DEFAULT_AXIS_CAP,
};
use peakpoll_core::text::{parse_profile, Alternatives};
use peakpoll_core::types::parse_rational;
use peakpoll_core::{CardinalLayout, Profile};
use peakpoll_simlab::adversary::{audit, AdversaryInstance, Elicitor};
use peakpoll_simlab::experiment::{run_experiment, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "peakpoll", version, about = "Preference elicitation for single-peaked electorates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation experiment and write its CSV.
    Simulate(SimulateArgs),
    /// Elicit one ranking, from a given truth or interactively.
    Elicit(ElicitArgs),
    /// Check a profile for single-peakedness.
    Check(CheckArgs),
    /// Majority aggregate of a profile.
    Aggregate(AggregateArgs),
    /// Build the lower-bound adversary, optionally auditing an elicitor.
    Adversary(AdversaryArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    experiment: ExperimentKind,
    /// Comma-separated alternative counts; defaults depend on the experiment.
    #[arg(long, value_delimiter = ',')]
    m: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    /// Population per run (robust) or agent count (adversary).
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long, default_value_t = 1)]
    swaps: usize,
    /// Do not reuse earlier answers when a robust session falls back.
    #[arg(long)]
    no_reuse: bool,
    /// Output CSV; a summary is written next to it. Without it the rows go to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Axis,
    Vote,
    Cardinal,
    None,
}

#[derive(Args)]
struct ElicitArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Comma-separated names; defaults to letters.
    #[arg(long)]
    alternatives: Option<String>,
    /// Number of letter-named alternatives when no names or context fix it.
    #[arg(long)]
    m: Option<usize>,
    /// Axis as `a < b < c`.
    #[arg(long)]
    axis: Option<String>,
    /// Known vote as `a > b > c`.
    #[arg(long)]
    vote: Option<String>,
    /// Comma-separated decimal positions in alternative order.
    #[arg(long)]
    positions: Option<String>,
    /// Answer from this ranking.
    #[arg(long, conflicts_with = "interactive")]
    truth: Option<String>,
    /// Ask on the terminal.
    #[arg(long)]
    interactive: bool,
    /// Verify the result and fall back to a full sort if it fails.
    #[arg(long)]
    robust: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    profile: PathBuf,
    /// Check against this axis instead of searching for one.
    #[arg(long)]
    axis: Option<String>,
    /// Also decide whether the profile is realizable by positions on the axis.
    #[arg(long)]
    cardinal: bool,
}

#[derive(Args)]
struct AggregateArgs {
    #[arg(long)]
    profile: PathBuf,
    /// Cross-check the winner against the median peak on this axis.
    #[arg(long)]
    axis: Option<String>,
}

#[derive(Args)]
struct AdversaryArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    /// mergesort, other_vote, positions, cardinal or skippingI.
    #[arg(long)]
    audit: Option<String>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Data directory; PEAKPOLL_DATA takes precedence. Without either, state is kept in memory.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 30)]
    timeout_minutes: i64,
    #[arg(long, default_value_t = 1000)]
    snapshot_every: usize,
    /// Skip fsync after each write.
    #[arg(long)]
    no_sync: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Elicit(a) => elicit_cmd(a),
        Command::Check(a) => check(a),
        Command::Aggregate(a) => aggregate(a),
        Command::Adversary(a) => adversary(a),
        Command::Serve(a) => serve(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut config = ExperimentConfig::new(a.experiment);
    if !a.m.is_empty() {
        config.m_values = a.m;
    }
    config.runs = a.runs;
    config.seed = a.seed;
    config.alpha = a.alpha;
    config.swaps = a.swaps;
    config.reuse_answers = !a.no_reuse;
    if let Some(n) = a.agents {
        config.agents = n;
    }
    let result = run_experiment(&config)?;
    // the table goes wherever the CSV does not
    let mut table: Box<dyn Write> = match &a.out {
        Some(out) => {
            let summary = result.write_files(out, config.agents)?;
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "wrote {} and {}", out.display(), summary.display())?;
            for row in result.summary(config.agents) {
                let bound = row.bound.map_or_else(|| "-".to_string(), |b| b.to_string());
                writeln!(
                    stdout,
                    "{:>6} {:<12} mean {:>12.2} bound {bound}",
                    row.m, row.algorithm, row.mean_queries
                )?;
            }
            Box::new(stdout)
        }
        None => {
            result.write_csv(io::stdout().lock())?;
            Box::new(io::stderr().lock())
        }
    };
    for s in &result.robust {
        writeln!(
            table,
            "{:>4} {:<12} agents {} fallback rate {:.4} exposure rate {:.4} unexposed fallbacks {} mean queries {:.2}",
            s.m,
            s.algorithm,
            s.agents,
            s.fallback_rate(),
            s.exposure_rate(),
            s.unexposed_fallbacks,
            s.mean_queries()
        )?;
    }
    Ok(())
}

fn split_list(text: &str) -> Vec<String> {
    text.split(',').map(|s| s.trim().to_string()).collect()
}

fn elicit_cmd(a: ElicitArgs) -> Result<()> {
    let positions = a.positions.as_deref().map(split_list);
    let m_hint = a
        .m
        .or(positions.as_ref().map(Vec::len))
        .or_else(|| a.axis.as_ref().map(|s| s.split('<').count()))
        .or_else(|| a.vote.as_ref().map(|s| s.split('>').count()))
        .or_else(|| a.truth.as_ref().map(|s| s.split('>').count()));
    let names = match (&a.alternatives, m_hint) {
        (Some(list), _) => Alternatives::new(split_list(list))?,
        (None, Some(m)) => Alternatives::letters(m),
        (None, None) => bail!("give --alternatives or --m"),
    };
    let context = match a.mode {
        Mode::Axis => {
            ElicitationContext::KnownAxis(names.parse_axis(a.axis.as_deref().context("--mode axis needs --axis")?)?)
        }
        Mode::Vote => ElicitationContext::KnownVote(
            names.parse_ranking(a.vote.as_deref().context("--mode vote needs --vote")?)?,
        ),
        Mode::Cardinal => {
            let values = positions
                .context("--mode cardinal needs --positions")?
                .iter()
                .map(|s| parse_rational(s))
                .collect::<Result<Vec<_>, _>>()?;
            ElicitationContext::KnownCardinal(CardinalLayout::new(values)?)
        }
        Mode::None => ElicitationContext::None,
    };
    if let Some(k) = context.alternatives() {
        if k != names.len() {
            bail!("the context covers {k} alternatives but {} are named", names.len());
        }
    }
    let truth = a.truth.as_deref().map(|t| names.parse_ranking(t)).transpose()?;
    if truth.is_none() && !a.interactive {
        bail!("give --truth or --interactive");
    }
    let plan = Plan {
        m: names.len(),
        context,
        robust: a.robust,
    };
    let stdin = io::stdin();
    let mut input = stdin.lock().lines();
    let mut answers = Vec::new();
    println!("at most {} questions", plan.bound());
    loop {
        match advance(&plan, &answers) {
            Step::Ask { left, right } => {
                let (l, r) = (names.name(left), names.name(right));
                let prefer_left = match &truth {
                    Some(t) => {
                        let p = t.prefers(left, right);
                        println!("{}. {l} or {r}? {}", answers.len() + 1, if p { l } else { r });
                        p
                    }
                    None => loop {
                        print!("{}. {l} or {r}? [1/2] ", answers.len() + 1);
                        io::stdout().flush()?;
                        let line = input.next().context("input ended before the ranking was complete")??;
                        match line.trim() {
                            "1" | "l" | "left" => break true,
                            "2" | "r" | "right" => break false,
                            s if s == l => break true,
                            s if s == r => break false,
                            _ => println!("answer 1 for {l} or 2 for {r}"),
                        }
                    },
                };
                answers.push(prefer_left);
            }
            Step::Done(report) => {
                println!("ranking: {}", names.format_ranking(&report.ranking));
                println!(
                    "queries: {}  verified: {}  fell back: {}",
                    report.queries_used, report.verified, report.fell_back
                );
                return Ok(());
            }
            Step::Failed(reason) => bail!("elicitation failed: {reason}"),
        }
    }
}

fn load_profile(path: &PathBuf) -> Result<(Alternatives, Profile)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_profile(&text)?)
}

fn check(a: CheckArgs) -> Result<()> {
    let (names, profile) = load_profile(&a.profile)?;
    let axes = match &a.axis {
        Some(text) => {
            let axis = names.parse_axis(text)?;
            let mut all = true;
            for (k, vote) in profile.votes().iter().enumerate() {
                let sp = is_single_peaked(vote, &axis)?;
                all &= sp;
                println!("vote {}: {} {}", k + 1, names.format_ranking(vote), if sp { "single-peaked" } else { "not single-peaked" });
            }
            println!("profile single-peaked on {}: {}", names.format_axis(&axis), yes(all));
            if all { vec![axis] } else { Vec::new() }
        }
        None => {
            let found = find_consistent_axes_bruteforce(&profile, DEFAULT_AXIS_CAP)?;
            println!("consistent axes: {}", found.len());
            for axis in &found {
                println!("  {}", names.format_axis(axis));
            }
            found.into_iter().collect()
        }
    };
    if a.cardinal {
        let axes = match &a.axis {
            // realizability is asked of the given axis even if some vote fails it
            Some(text) => vec![names.parse_axis(text)?],
            None => axes,
        };
        let mut any = false;
        for axis in &axes {
            let ok = is_cardinally_realizable(&profile, axis)?;
            any |= ok;
            println!("cardinally realizable on {}: {}", names.format_axis(axis), yes(ok));
        }
        println!("cardinally single-peaked: {}", yes(any));
    }
    Ok(())
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn aggregate(a: AggregateArgs) -> Result<()> {
    let (names, profile) = load_profile(&a.profile)?;
    let margins = pairwise_matrix(&profile);
    println!("margins:");
    for (k, row) in margins.rows().iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>4}")).collect();
        println!("  {:<8}{}", names.names()[k], cells.join(""));
    }
    match aggregate_ranking(&profile) {
        Ok(ranking) => {
            println!("ranking: {}", names.format_ranking(&ranking));
            println!("winner: {}", names.name(ranking.peak()));
            if let Some(text) = &a.axis {
                let axis = names.parse_axis(text)?;
                let median = median_peak_winner(&profile, &axis)?;
                println!("median peak: {}", names.name(median));
            }
        }
        Err(SpverifyError::EvenVoters(n)) => println!("status: partial ({n} votes; an odd number is needed)"),
        Err(SpverifyError::CycleDetected) => println!("status: cyclic"),
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn adversary(a: AdversaryArgs) -> Result<()> {
    let instance = AdversaryInstance::new(a.m, a.n)?;
    let names = Alternatives::letters(a.m);
    println!("anchors: {:?}", instance.anchors());
    println!("axis: {}", names.format_axis(&instance.anchor_axis()));
    println!("forced ranking: {}", names.format_ranking(&instance.forced_ranking()));
    println!("lower bound: {} queries", a.m * a.n / 2);
    if let Some(name) = &a.audit {
        let elicitor = Elicitor::parse(name).with_context(|| format!("unknown elicitor {name:?}"))?;
        let report = audit(a.m, a.n, elicitor)?;
        println!("{}: {} queries, {} designated pairs unasked", elicitor.name(), report.queries, report.unasked.len());
        println!("answers consistent with the anchor world: {}", yes(report.consistent));
        println!("caught by a counterexample: {}", yes(report.caught));
    }
    Ok(())
}

fn serve(a: ServeArgs) -> Result<()> {
    let data_dir = std::env::var_os("PEAKPOLL_DATA").map(PathBuf::from).or(a.data);
    let config = ServiceConfig {
        data_dir,
        session_timeout: TimeDelta::minutes(a.timeout_minutes),
        snapshot_every: a.snapshot_every.max(1),
        sync: !a.no_sync,
    };
    let service = Arc::new(PollService::open(config, Arc::new(SystemClock))?);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let addr: SocketAddr = format!("{}:{}", a.host, a.port).parse().context("bad --host or --port")?;
        let listener = tokio::net::TcpListener::bind(addr).await?;
        println!("listening on {}", listener.local_addr()?);
        io::stdout().flush()?;
        let sweeper = service.clone();
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(Duration::from_secs(60));
            loop {
                tick.tick().await;
                if let Err(e) = sweeper.expire_idle() {
                    eprintln!("expiry sweep failed: {e}");
                }
            }
        });
        axum::serve(listener, http::router(service))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
