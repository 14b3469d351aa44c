//! Experiment runner.
//!
//! Every `(m, run)` cell draws from its own stream `derive(seed, [m, run])`,
//! so the rows do not depend on the schedule. Rows are sorted by
//! `(experiment, m, algorithm, run)` before they are returned.

use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use peakpoll_core::elicit::{
    bound_cardinal, bound_given_other_vote, bound_given_positions, find_ranking_given_cardinal_positions,
    find_ranking_given_other_vote, find_ranking_given_positions, mergesort_elicit, robust_elicit_with,
    ElicitError, ElicitReport, ElicitationContext, RobustOptions,
};
use peakpoll_core::oracle::{make_true_ranking_oracle, CardinalAgent, CountingOracle};
use peakpoll_core::Ranking;

use crate::adversary::{audit, AdversaryError, Elicitor};
use crate::generate::{random_axis, random_cardinal_instance, random_non_sp_ranking, random_sp_ranking};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Fig1,
    Fig2,
    Robust,
    Adversary,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Fig1 => "fig1",
            ExperimentKind::Fig2 => "fig2",
            ExperimentKind::Robust => "robust",
            ExperimentKind::Adversary => "adversary",
        }
    }

    /// Invented defaults: powers of two from 8.
    pub fn default_m_values(self) -> Vec<usize> {
        let top = match self {
            ExperimentKind::Fig1 => 65536,
            ExperimentKind::Fig2 => 1024,
            ExperimentKind::Robust => 64,
            ExperimentKind::Adversary => 32,
        };
        std::iter::successors(Some(8usize), |m| Some(m * 2)).take_while(|&m| m <= top).collect()
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig1" => Ok(ExperimentKind::Fig1),
            "fig2" => Ok(ExperimentKind::Fig2),
            "robust" => Ok(ExperimentKind::Robust),
            "adversary" => Ok(ExperimentKind::Adversary),
            other => Err(ExperimentError::UnknownExperiment(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub m_values: Vec<usize>,
    pub runs: usize,
    pub seed: u64,
    /// Probability that a robust-experiment agent is not single-peaked.
    pub alpha: f64,
    /// Population per run (robust) or agent count (adversary).
    pub agents: usize,
    /// Adjacent transpositions applied to a non-single-peaked agent.
    pub swaps: usize,
    pub reuse_answers: bool,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment,
            m_values: experiment.default_m_values(),
            runs: 5,
            seed: 0,
            alpha: 0.2,
            agents: match experiment {
                ExperimentKind::Adversary => 5,
                _ => 10_000,
            },
            swaps: 1,
            reuse_answers: true,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.runs == 0 {
            return Err(ExperimentError::Invalid("runs must be at least 1".into()));
        }
        if self.m_values.is_empty() || self.m_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ExperimentError::Invalid("m values must be non-empty and strictly increasing".into()));
        }
        if self.m_values[0] == 0 {
            return Err(ExperimentError::Invalid("m must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ExperimentError::Invalid(format!("alpha {} is outside [0, 1]", self.alpha)));
        }
        match self.experiment {
            ExperimentKind::Robust if self.alpha > 0.0 && self.m_values[0] < 3 => Err(ExperimentError::Invalid(
                "every ranking of fewer than 3 alternatives is single-peaked".into(),
            )),
            ExperimentKind::Robust | ExperimentKind::Adversary if self.agents == 0 => {
                Err(ExperimentError::Invalid("at least one agent is required".into()))
            }
            ExperimentKind::Adversary if self.m_values.iter().any(|m| m % 2 == 1) => {
                Err(ExperimentError::Invalid("the adversary needs even m".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("unknown experiment {0:?}")]
    UnknownExperiment(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("{algorithm} returned a wrong ranking (seed {seed}, m {m})")]
    Incorrect { algorithm: &'static str, seed: u64, m: usize },
    #[error("{algorithm} failed (seed {seed}, m {m}): {source}")]
    Elicit {
        algorithm: &'static str,
        seed: u64,
        m: usize,
        source: ElicitError,
    },
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One elicitation; the CSV row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunRow {
    pub experiment: ExperimentKind,
    pub m: usize,
    pub algorithm: &'static str,
    /// Run index; in the robust experiment, `run · agents + agent`.
    pub run: usize,
    /// Seed of the cell's stream.
    pub seed: u64,
    pub queries: usize,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub experiment: ExperimentKind,
    pub m: usize,
    pub algorithm: &'static str,
    pub mean_queries: f64,
    pub bound: Option<usize>,
}

/// Per `(m, algorithm)` totals of the robust experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustStats {
    pub m: usize,
    pub algorithm: &'static str,
    /// Agents that count towards the rate (the known-vote mode skips the
    /// first agent of each run).
    pub agents: usize,
    pub fallbacks: usize,
    pub non_single_peaked: usize,
    /// Agents for whom some input was not single-peaked: the agent itself,
    /// or in the known-vote mode also the previous agent.
    pub exposed: usize,
    /// Fallbacks of agents that were not exposed; zero when verification
    /// only fails for a reason.
    pub unexposed_fallbacks: usize,
    pub total_queries: usize,
}

impl RobustStats {
    pub fn fallback_rate(&self) -> f64 {
        self.fallbacks as f64 / self.agents as f64
    }

    pub fn exposure_rate(&self) -> f64 {
        self.exposed as f64 / self.agents as f64
    }

    pub fn mean_queries(&self) -> f64 {
        self.total_queries as f64 / self.agents as f64
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentResult {
    pub rows: Vec<RunRow>,
    pub robust: Vec<RobustStats>,
}

pub const CSV_HEADER: [&str; 7] = ["experiment", "m", "algorithm", "run", "seed", "queries", "correct"];
pub const SUMMARY_HEADER: [&str; 5] = ["experiment", "m", "algorithm", "mean_queries", "bound"];

/// `out.csv` → `out.summary.csv`.
pub fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.summary.csv"))
}

/// The bound shown next to an algorithm's mean; the adversary's is a lower bound.
pub fn summary_bound(experiment: ExperimentKind, algorithm: &str, m: usize, agents: usize) -> Option<usize> {
    match (experiment, algorithm) {
        (ExperimentKind::Adversary, _) => Some(agents * m / 2),
        (_, "positions") => Some(bound_given_positions(m)),
        (_, "other_vote") => Some(bound_given_other_vote(m)),
        (_, "cardinal") => Some(bound_cardinal(m)),
        _ => None,
    }
}

impl ExperimentResult {
    pub fn summary(&self, agents: usize) -> Vec<SummaryRow> {
        let mut groups: BTreeMap<(ExperimentKind, usize, &'static str), (usize, usize)> = BTreeMap::new();
        for row in &self.rows {
            let entry = groups.entry((row.experiment, row.m, row.algorithm)).or_default();
            entry.0 += row.queries;
            entry.1 += 1;
        }
        groups
            .into_iter()
            .map(|((experiment, m, algorithm), (total, count))| SummaryRow {
                experiment,
                m,
                algorithm,
                mean_queries: total as f64 / count as f64,
                bound: summary_bound(experiment, algorithm, m, agents),
            })
            .collect()
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), ExperimentError> {
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        writer.write_record(CSV_HEADER)?;
        for row in &self.rows {
            writer.serialize(row)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn write_summary_csv<W: io::Write>(&self, out: W, agents: usize) -> Result<(), ExperimentError> {
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        writer.write_record(SUMMARY_HEADER)?;
        for row in self.summary(agents) {
            writer.serialize(row)?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Writes `out` and its companion summary.
    pub fn write_files(&self, out: &Path, agents: usize) -> Result<PathBuf, ExperimentError> {
        self.write_csv(std::fs::File::create(out)?)?;
        let summary = summary_path(out);
        self.write_summary_csv(std::fs::File::create(&summary)?, agents)?;
        Ok(summary)
    }
}

struct Cell {
    rows: Vec<RunRow>,
    robust: Vec<RobustStats>,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    config.validate()?;
    let cells: Vec<(usize, usize)> = config
        .m_values
        .iter()
        .flat_map(|&m| (0..config.runs).map(move |run| (m, run)))
        .collect();
    let done: Vec<Cell> = cells
        .par_iter()
        .map(|&(m, run)| run_cell(config, m, run))
        .collect::<Result<_, _>>()?;

    let mut result = ExperimentResult::default();
    let mut robust: BTreeMap<(usize, &'static str), RobustStats> = BTreeMap::new();
    for cell in done {
        result.rows.extend(cell.rows);
        for s in cell.robust {
            let entry = robust.entry((s.m, s.algorithm)).or_insert(RobustStats {
                m: s.m,
                algorithm: s.algorithm,
                agents: 0,
                fallbacks: 0,
                non_single_peaked: 0,
                exposed: 0,
                unexposed_fallbacks: 0,
                total_queries: 0,
            });
            entry.agents += s.agents;
            entry.fallbacks += s.fallbacks;
            entry.non_single_peaked += s.non_single_peaked;
            entry.exposed += s.exposed;
            entry.unexposed_fallbacks += s.unexposed_fallbacks;
            entry.total_queries += s.total_queries;
        }
    }
    result
        .rows
        .sort_by(|a, b| (a.experiment, a.m, a.algorithm, a.run).cmp(&(b.experiment, b.m, b.algorithm, b.run)));
    result.robust = robust.into_values().collect();
    Ok(result)
}

fn run_cell(config: &ExperimentConfig, m: usize, run: usize) -> Result<Cell, ExperimentError> {
    let mut rng = SplitMix64::derive(config.seed, &[m as u64, run as u64]);
    let seed = rng.seed();
    let experiment = config.experiment;
    let row = |algorithm, queries| RunRow {
        experiment,
        m,
        algorithm,
        run,
        seed,
        queries,
        correct: true,
    };
    let check = |algorithm: &'static str, report: Result<ElicitReport, ElicitError>, truth: &Ranking| {
        let report = report.map_err(|source| ExperimentError::Elicit {
            algorithm,
            seed,
            m,
            source,
        })?;
        if report.ranking != *truth {
            return Err(ExperimentError::Incorrect { algorithm, seed, m });
        }
        Ok(report.queries_used)
    };

    match experiment {
        ExperimentKind::Fig1 => {
            let axis = random_axis(m, &mut rng);
            let known = random_sp_ranking(&axis, &mut rng);
            let truth = random_sp_ranking(&axis, &mut rng);
            let oracle = || make_true_ranking_oracle(truth.clone());
            let positions = check("positions", find_ranking_given_positions(&mut oracle(), &axis), &truth)?;
            let other = check("other_vote", find_ranking_given_other_vote(&mut oracle(), &known), &truth)?;
            let sort = check("mergesort", mergesort_elicit(&mut oracle(), m), &truth)?;
            Ok(Cell {
                rows: vec![row("positions", positions), row("other_vote", other), row("mergesort", sort)],
                robust: Vec::new(),
            })
        }
        ExperimentKind::Fig2 => {
            let instance = random_cardinal_instance(m, &mut rng);
            let truth = instance.ranking.clone();
            let mut agent = CountingOracle::new(CardinalAgent::new(instance.layout.clone(), instance.agent));
            let cardinal = check(
                "cardinal",
                find_ranking_given_cardinal_positions(&mut agent, &instance.layout),
                &truth,
            )?;
            let axis = instance.layout.induced_axis();
            let positions = check(
                "positions",
                find_ranking_given_positions(&mut make_true_ranking_oracle(truth.clone()), &axis),
                &truth,
            )?;
            Ok(Cell {
                rows: vec![row("cardinal", cardinal), row("positions", positions)],
                robust: Vec::new(),
            })
        }
        ExperimentKind::Robust => robust_cell(config, m, run, &mut rng),
        ExperimentKind::Adversary => {
            let mut rows = Vec::new();
            for (algorithm, elicitor) in [
                ("mergesort", Elicitor::MergeSort),
                ("other_vote", Elicitor::OtherVote),
                ("positions", Elicitor::Positions),
            ] {
                let report = audit(m, config.agents, elicitor)?;
                let correct = report.consistent && report.unasked.is_empty();
                rows.push(RunRow {
                    correct,
                    ..row(algorithm, report.queries)
                });
            }
            Ok(Cell {
                rows,
                robust: Vec::new(),
            })
        }
    }
}

/// One population of `config.agents` agents, each independently not
/// single-peaked with probability `alpha`, elicited with the axis known and
/// with the previous agent's vote known.
fn robust_cell(config: &ExperimentConfig, m: usize, run: usize, rng: &mut SplitMix64) -> Result<Cell, ExperimentError> {
    let seed = rng.seed();
    let n = config.agents;
    let axis = random_axis(m, rng);
    let mut truths = Vec::with_capacity(n);
    let mut deviant = Vec::with_capacity(n);
    for _ in 0..n {
        let off = config.alpha > 0.0 && rng.bernoulli(config.alpha);
        truths.push(if off {
            random_non_sp_ranking(&axis, config.swaps, rng)
        } else {
            random_sp_ranking(&axis, rng)
        });
        deviant.push(off);
    }
    let options = RobustOptions {
        reuse_answers: config.reuse_answers,
    };

    let mut rows = Vec::with_capacity(2 * n);
    let mut stats = Vec::with_capacity(2);
    for (algorithm, by_vote) in [("robust_axis", false), ("robust_vote", true)] {
        let mut s = RobustStats {
            m,
            algorithm,
            agents: 0,
            fallbacks: 0,
            non_single_peaked: 0,
            exposed: 0,
            unexposed_fallbacks: 0,
            total_queries: 0,
        };
        for (i, truth) in truths.iter().enumerate() {
            let context = match (by_vote, i) {
                (false, _) => ElicitationContext::KnownAxis(axis.clone()),
                (true, 0) => ElicitationContext::None,
                (true, _) => ElicitationContext::KnownVote(truths[i - 1].clone()),
            };
            let mut oracle = make_true_ranking_oracle(truth.clone());
            let report = robust_elicit_with(&mut oracle, &context, options).map_err(|source| ExperimentError::Elicit {
                algorithm,
                seed,
                m,
                source,
            })?;
            if report.ranking != *truth {
                return Err(ExperimentError::Incorrect { algorithm, seed, m });
            }
            rows.push(RunRow {
                experiment: ExperimentKind::Robust,
                m,
                algorithm,
                run: run * n + i,
                seed,
                queries: report.queries_used,
                correct: true,
            });
            if by_vote && i == 0 {
                continue;
            }
            let exposed = deviant[i] || (by_vote && deviant[i - 1]);
            s.agents += 1;
            s.fallbacks += usize::from(report.fell_back);
            s.non_single_peaked += usize::from(deviant[i]);
            s.exposed += usize::from(exposed);
            s.unexposed_fallbacks += usize::from(report.fell_back && !exposed);
            s.total_queries += report.queries_used;
        }
        stats.push(s);
    }
    Ok(Cell { rows, robust: stats })
}
