//! Composite procedures: search then optimize (`opt`), optimize during the
//! search (`ovi`), and the single plain search (`rec`).

use serde::{Deserialize, Serialize};

use crate::context::Context;
use crate::egg::{alpha_of_bound, EggSearch, LevelRecord, SearchResult, SearchState, SearchStatus, WordStats};
use crate::error::{Error, Result};
use crate::opt::{MinimaxProblem, OptOptions, OptResult};
use crate::weights::Weights;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    Rec,
    Opt,
    Ovi,
    Loop,
}

/// Search limits shared by every round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Caps {
    pub radius_cap: usize,
    pub max_frontier: usize,
    pub workers: Option<usize>,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { radius_cap: 256, max_frontier: 20_000_000, workers: None }
    }
}

/// A mid-search reweighting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reweight {
    pub level: usize,
    pub rows: usize,
    pub eta_before: f64,
    pub eta_after: f64,
    pub weights: Weights,
    /// Shell words sent back to the yolk by the new weights.
    pub moved: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub target: f64,
    pub weights_in: Weights,
    pub weights_out: Weights,
    pub status: SearchStatus,
    /// Bound certified by this round alone; meaningful when `status` is found.
    pub eta: f64,
    pub alpha: Option<f64>,
    pub radius: usize,
    pub egg_size: usize,
    pub per_level_sizes: Vec<usize>,
    pub reweights: Vec<Reweight>,
    pub optimization: Option<OptResult>,
    /// The search as it ended, for replaying this round.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<SearchState>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyRun {
    pub kind: StrategyKind,
    pub rounds: Vec<Round>,
    pub notes: Vec<String>,
}

impl StrategyRun {
    /// The last round that ended with an egg.
    pub fn best(&self) -> Option<&Round> {
        self.rounds.iter().rev().find(|r| r.status == SearchStatus::Found)
    }

    pub fn final_status(&self) -> Option<SearchStatus> {
        self.rounds.last().map(|r| r.status)
    }
}

#[derive(Clone, Debug, Default)]
pub struct StrategyOptions {
    pub caps: Caps,
    pub opt: OptOptions,
    /// Keep a search checkpoint in every round.
    pub checkpoints: bool,
}

/// One search, reweighting at every level divisible by `update`.
fn search_round(
    ctx: &Context,
    weights: Weights,
    target: f64,
    update: Option<usize>,
    opts: &StrategyOptions,
    on_level: &mut (dyn FnMut(&LevelRecord) + Send),
) -> Result<(SearchResult, EggSearch, Vec<Reweight>)> {
    if update == Some(0) {
        return Err(Error::InvalidArgument("update must be at least 1".into()));
    }
    match opts.caps.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(|| search_loop(ctx, weights, target, update, opts, on_level)),
        None => search_loop(ctx, weights, target, update, opts, on_level),
    }
}

fn search_loop(
    ctx: &Context,
    weights: Weights,
    target: f64,
    update: Option<usize>,
    opts: &StrategyOptions,
    on_level: &mut (dyn FnMut(&LevelRecord) + Send),
) -> Result<(SearchResult, EggSearch, Vec<Reweight>)> {
    let mut s = EggSearch::new(ctx.table.clone(), weights, &ctx.constraints, target, opts.checkpoints)?;
    let mut reweights = Vec::new();
    let mut optimized_at = None;
    let status = loop {
        let Some(level) = s.next_level() else { break SearchStatus::Found };
        if level > opts.caps.radius_cap {
            break SearchStatus::RadiusExceeded;
        }
        if s.yolk().len() > opts.caps.max_frontier {
            break SearchStatus::Aborted;
        }
        if let Some(u) = update {
            if level % u == 0 && optimized_at != Some(level) {
                optimized_at = Some(level);
                let rows: Vec<WordStats> = s.shell().iter().chain(s.yolk()).map(|n| n.stats.clone()).collect();
                let p = MinimaxProblem::new(&rows, ctx.constraints.clone())?;
                let r = p.optimize(s.weights().as_slice(), &opts.opt)?;
                if r.eta < r.start_eta {
                    let moved = s.reweight(r.weights.clone(), &ctx.constraints)?;
                    reweights.push(Reweight {
                        level,
                        rows: rows.len(),
                        eta_before: r.start_eta,
                        eta_after: r.eta,
                        weights: r.weights,
                        moved,
                    });
                    continue;
                }
            }
        }
        let rec = s.step();
        on_level(&rec);
    };
    Ok((s.result(status), s, reweights))
}

fn round_from(result: &SearchResult, weights_in: Weights, reweights: Vec<Reweight>, search: &EggSearch, keep: bool) -> Round {
    Round {
        target: result.target,
        weights_in,
        weights_out: result.weights.clone(),
        status: result.status,
        eta: result.eta_max,
        alpha: result.alpha,
        radius: result.radius,
        egg_size: result.egg_size,
        per_level_sizes: result.per_level_sizes(),
        reweights,
        optimization: None,
        checkpoint: keep.then(|| search.save()),
    }
}

/// Plain search under fixed weights.
pub fn run_rec(ctx: &Context, weights: &Weights, target: f64, opts: &StrategyOptions) -> Result<StrategyRun> {
    let (res, s, rw) = search_round(ctx, weights.clone(), target, None, opts, &mut |_| {})?;
    Ok(StrategyRun {
        kind: StrategyKind::Rec,
        rounds: vec![round_from(&res, weights.clone(), rw, &s, opts.checkpoints)],
        notes: Vec::new(),
    })
}

/// For each target: search (reweighting every `update` levels if given),
/// then optimize the weights over the egg found. The next round starts from
/// the optimized weights. Stops at the first round without an egg.
pub fn run_opt(
    ctx: &Context,
    start: &Weights,
    targets: &[f64],
    update: Option<usize>,
    opts: &StrategyOptions,
) -> Result<StrategyRun> {
    let mut run = StrategyRun { kind: StrategyKind::Opt, rounds: Vec::new(), notes: Vec::new() };
    let mut weights = start.clone();
    for &target in targets {
        let (res, s, rw) = search_round(ctx, weights.clone(), target, update, opts, &mut |_| {})?;
        let mut round = round_from(&res, weights.clone(), rw, &s, opts.checkpoints);
        if res.status != SearchStatus::Found {
            run.notes.push(format!("target {target} ended with {}", res.status.as_str()));
            run.rounds.push(round);
            break;
        }
        let p = MinimaxProblem::new(&res.count_rows(), ctx.constraints.clone())?;
        let r = p.optimize(res.weights.as_slice(), &opts.opt)?;
        // the egg stays an egg under any feasible weights, so its max ratio
        // under the optimized weights is a valid bound
        if r.eta <= res.eta_max {
            round.weights_out = r.weights.clone();
            round.eta = r.eta;
            round.alpha = alpha_of_bound(r.eta, ctx.degree());
        }
        weights = round.weights_out.clone();
        round.optimization = Some(r);
        run.rounds.push(round);
    }
    Ok(run)
}

/// One search that reoptimizes over shell and yolk at every level divisible
/// by `update`.
pub fn run_ovi(
    ctx: &Context,
    start: &Weights,
    target: f64,
    update: usize,
    opts: &StrategyOptions,
) -> Result<StrategyRun> {
    let (res, s, rw) = search_round(ctx, start.clone(), target, Some(update), opts, &mut |_| {})?;
    Ok(StrategyRun {
        kind: StrategyKind::Ovi,
        rounds: vec![round_from(&res, start.clone(), rw, &s, opts.checkpoints)],
        notes: Vec::new(),
    })
}
