//! Interactive steering of a single search: expand, optimize, retarget,
//! checkpoint and roll back, each command answered by an immutable snapshot.

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::context::Context;
use crate::egg::{alpha_of_bound, EggSearch, LevelRecord, Node, WordStats};
use crate::error::{Error, Result};
use crate::opt::{MinimaxProblem, OptOptions};
use crate::weights::Weights;

pub const HISTOGRAM_BINS: usize = 50;
pub const HISTOGRAM_MAX: f64 = 2.0;

/// Which frontier (and, for optimization, shell) words a command acts on.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Selector {
    #[default]
    All,
    /// `min ≤ η ≤ max` under the current weights.
    Eta { min: f64, max: f64 },
    /// Words of exactly this length.
    Level { level: usize },
    /// Words whose printed form matches the pattern.
    Regex { pattern: String },
}

enum Compiled {
    All,
    Eta(f64, f64),
    Level(usize),
    Regex(Regex),
}

impl Selector {
    fn compile(&self) -> Result<Compiled> {
        Ok(match self {
            Selector::All => Compiled::All,
            Selector::Eta { min, max } => {
                if !(min <= max) {
                    return Err(Error::InvalidArgument(format!("empty eta range [{min}, {max}]")));
                }
                Compiled::Eta(*min, *max)
            }
            Selector::Level { level } => Compiled::Level(*level),
            Selector::Regex { pattern } => Compiled::Regex(
                Regex::new(pattern).map_err(|e| Error::InvalidArgument(format!("bad pattern: {e}")))?,
            ),
        })
    }
}

impl Compiled {
    fn matches(&self, ctx: &Context, node: &Node, eta: f64) -> bool {
        match self {
            Compiled::All => true,
            Compiled::Eta(lo, hi) => *lo <= eta && eta <= *hi,
            Compiled::Level(l) => node.len() == *l,
            Compiled::Regex(re) => re.is_match(&ctx.group.format_word(&crate::group::Word(node.word.clone()))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    Expand {
        #[serde(default)]
        filter: Selector,
    },
    Optimize {
        #[serde(default)]
        subset: Selector,
        #[serde(default)]
        restarts: Option<usize>,
        #[serde(default)]
        seed: Option<u64>,
    },
    SetTarget { target: f64 },
    Checkpoint,
    Rollback { id: u32 },
    Stop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SessionStatus {
    Running,
    Found,
    Stopped,
}

/// One optimize command's effect.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeEvent {
    pub rows: usize,
    pub eta_before: f64,
    pub eta_after: f64,
    pub applied: bool,
    pub moved: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub status: SessionStatus,
    pub machine: String,
    pub aux: String,
    pub weights: Vec<f64>,
    pub target: f64,
    pub yolk: usize,
    pub shell: usize,
    pub radius: usize,
    pub eta_max: f64,
    /// The bound certified if the session stopped now with an empty yolk.
    pub alpha: Option<f64>,
    /// Counts of frontier η values in 50 equal bins on [0, 2]; larger
    /// values land in the last bin.
    pub histogram: Vec<u64>,
    pub levels: Vec<LevelRecord>,
    pub optimizations: Vec<OptimizeEvent>,
    pub checkpoints: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionOpen {
    pub machine: String,
    #[serde(default)]
    pub blocks: Option<String>,
    /// Raw weights, normalized and projected on open; uniform when absent.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default = "default_target")]
    pub target: f64,
}

fn default_target() -> f64 {
    0.99
}

#[derive(Clone)]
struct Saved {
    id: u32,
    search: EggSearch,
    optimizations: Vec<OptimizeEvent>,
}

pub struct Session {
    ctx: Context,
    search: EggSearch,
    stopped: bool,
    checkpoints: Vec<Saved>,
    next_checkpoint: u32,
    optimizations: Vec<OptimizeEvent>,
    journal: Vec<Command>,
    opt: OptOptions,
}

pub fn histogram(etas: impl IntoIterator<Item = f64>) -> Vec<u64> {
    let mut h = vec![0u64; HISTOGRAM_BINS];
    for e in etas {
        let b = ((e / HISTOGRAM_MAX) * HISTOGRAM_BINS as f64).floor();
        let b = if b.is_nan() { HISTOGRAM_BINS - 1 } else { (b.max(0.0) as usize).min(HISTOGRAM_BINS - 1) };
        h[b] += 1;
    }
    h
}

impl Session {
    pub fn open(ctx: Context, weights: Weights, target: f64) -> Result<Session> {
        let search = EggSearch::new(ctx.table.clone(), weights, &ctx.constraints, target, false)?;
        Ok(Session {
            ctx,
            search,
            stopped: false,
            checkpoints: Vec::new(),
            next_checkpoint: 1,
            optimizations: Vec::new(),
            journal: Vec::new(),
            opt: OptOptions { restarts: 4, ..OptOptions::default() },
        })
    }

    pub fn from_request(req: &SessionOpen, caps: crate::portrait::PortraitCaps) -> Result<Session> {
        let ctx = Context::resolve(&req.machine, req.blocks.as_deref(), caps)?;
        let weights = match &req.weights {
            Some(w) => ctx.ingest(w)?.weights,
            None => ctx.uniform(),
        };
        Session::open(ctx, weights, req.target)
    }

    pub fn context(&self) -> &Context {
        &self.ctx
    }

    pub fn search(&self) -> &EggSearch {
        &self.search
    }

    pub fn journal(&self) -> &[Command] {
        &self.journal
    }

    pub fn is_stopped(&self) -> bool {
        self.stopped
    }

    /// Validates and applies one command atomically: on error nothing changes.
    pub fn apply(&mut self, cmd: Command) -> Result<Snapshot> {
        if self.stopped {
            return Err(Error::Session("session is stopped".into()));
        }
        match &cmd {
            Command::Expand { filter } => {
                let sel = filter.compile()?;
                let ctx = &self.ctx;
                let f = |n: &Node, eta: f64| sel.matches(ctx, n, eta);
                self.search.step_filtered(Some(&f));
            }
            Command::Optimize { subset, restarts, seed } => {
                let sel = subset.compile()?;
                let w = self.search.weights().clone();
                let rows: Vec<WordStats> = self
                    .search
                    .shell()
                    .iter()
                    .chain(self.search.yolk())
                    .filter(|n| sel.matches(&self.ctx, n, n.stats.eta(&w)))
                    .map(|n| n.stats.clone())
                    .collect();
                let opts = OptOptions {
                    restarts: restarts.unwrap_or(self.opt.restarts),
                    seed: seed.unwrap_or(self.opt.seed),
                    ..self.opt.clone()
                };
                let p = MinimaxProblem::new(&rows, self.ctx.constraints.clone())?;
                let r = p.optimize(w.as_slice(), &opts)?;
                let applied = r.eta < r.start_eta;
                let moved = if applied { self.search.reweight(r.weights, &self.ctx.constraints)? } else { 0 };
                self.optimizations.push(OptimizeEvent {
                    rows: rows.len(),
                    eta_before: r.start_eta,
                    eta_after: if applied { r.eta } else { r.start_eta },
                    applied,
                    moved,
                });
            }
            Command::SetTarget { target } => {
                self.search.set_target(*target)?;
            }
            Command::Checkpoint => {
                let id = self.next_checkpoint;
                self.next_checkpoint += 1;
                self.checkpoints.push(Saved { id, search: self.search.clone(), optimizations: self.optimizations.clone() });
            }
            Command::Rollback { id } => {
                let saved = self
                    .checkpoints
                    .iter()
                    .find(|c| c.id == *id)
                    .ok_or_else(|| Error::InvalidArgument(format!("no checkpoint {id}")))?;
                self.search = saved.search.clone();
                self.optimizations = saved.optimizations.clone();
                // later checkpoints belong to the abandoned branch
                let keep = *id;
                self.checkpoints.retain(|c| c.id <= keep);
            }
            Command::Stop => self.stopped = true,
        }
        self.journal.push(cmd);
        Ok(self.snapshot())
    }

    pub fn snapshot(&self) -> Snapshot {
        let s = &self.search;
        let w = s.weights();
        let status = if self.stopped {
            SessionStatus::Stopped
        } else if s.is_done() {
            SessionStatus::Found
        } else {
            SessionStatus::Running
        };
        let eta_max = s.eta_max();
        Snapshot {
            status,
            machine: self.ctx.name.clone(),
            aux: self.ctx.aux.describe(&self.ctx.group),
            weights: w.as_slice().to_vec(),
            target: s.target(),
            yolk: s.yolk().len(),
            shell: s.shell().len(),
            radius: s.radius(),
            eta_max,
            alpha: if s.is_done() && !s.shell().is_empty() { alpha_of_bound(eta_max, self.ctx.degree()) } else { None },
            histogram: histogram(s.yolk().iter().map(|n| n.stats.eta(w))),
            levels: s.levels().to_vec(),
            optimizations: self.optimizations.clone(),
            checkpoints: self.checkpoints.iter().map(|c| c.id).collect(),
        }
    }

    /// Rebuilds a session by replaying a journal on a fresh open.
    pub fn replay(req: &SessionOpen, caps: crate::portrait::PortraitCaps, journal: &[Command]) -> Result<Session> {
        let mut s = Session::from_request(req, caps)?;
        for c in journal {
            s.apply(c.clone())?;
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::zoo;

    fn bartholdi() -> Session {
        let ctx = Context::builtin("grigorchuk").unwrap();
        Session::open(ctx, Weights::from_vec_unchecked(zoo::BARTHOLDI_WEIGHTS.to_vec()), 0.99).unwrap()
    }

    #[test]
    fn two_expands_finish_level_one() {
        let mut s = bartholdi();
        s.apply(Command::Expand { filter: Selector::All }).unwrap();
        let snap = s.apply(Command::Expand { filter: Selector::All }).unwrap();
        assert_eq!(snap.yolk, 0);
        assert_eq!(snap.status, SessionStatus::Found);
        assert!((snap.eta_max - 0.8106).abs() < 1e-4);
        assert!(snap.alpha.is_some());
    }

    #[test]
    fn stopped_sessions_refuse_commands() {
        let mut s = bartholdi();
        s.apply(Command::Stop).unwrap();
        assert!(matches!(s.apply(Command::Checkpoint), Err(Error::Session(_))));
    }

    #[test]
    fn rollback_then_replay_is_identical() {
        let ctx = Context::builtin("grigorchuk").unwrap();
        let mut s = Session::open(ctx.clone(), ctx.uniform(), 0.99).unwrap();
        let e = Command::Expand { filter: Selector::All };
        s.apply(e.clone()).unwrap();
        s.apply(Command::Checkpoint).unwrap();
        s.apply(e.clone()).unwrap();
        let first = serde_json::to_string(&s.apply(e.clone()).unwrap()).unwrap();
        s.apply(Command::Rollback { id: 1 }).unwrap();
        s.apply(e.clone()).unwrap();
        let second = serde_json::to_string(&s.apply(e).unwrap()).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn bad_selectors_change_nothing() {
        let mut s = bartholdi();
        let before = s.snapshot();
        let r = s.apply(Command::Expand { filter: Selector::Regex { pattern: "(".into() } });
        assert!(r.is_err());
        assert_eq!(s.snapshot(), before);
        assert!(s.journal().is_empty());
    }

    #[test]
    fn optimizing_never_raises_the_bound() {
        let ctx = Context::builtin("grigorchuk").unwrap();
        let mut s = Session::open(ctx.clone(), ctx.uniform(), 0.99).unwrap();
        for _ in 0..4 {
            s.apply(Command::Expand { filter: Selector::All }).unwrap();
        }
        let snap = s.apply(Command::Optimize { subset: Selector::All, restarts: Some(2), seed: None }).unwrap();
        let ev = snap.optimizations.last().unwrap();
        assert!(ev.eta_after <= ev.eta_before);
    }

    #[test]
    fn histogram_layout() {
        let h = histogram([0.0, 0.039, 0.04, 1.99, 5.0]);
        assert_eq!(h.len(), 50);
        assert_eq!(h[0], 2);
        assert_eq!(h[1], 1);
        assert_eq!(h[49], 2);
    }

    #[test]
    fn commands_parse_from_json() {
        let c: Command = serde_json::from_str(r#"{"command":"expand","filter":{"kind":"level","level":3}}"#).unwrap();
        assert_eq!(c, Command::Expand { filter: Selector::Level { level: 3 } });
        let c: Command = serde_json::from_str(r#"{"command":"rollback","id":2}"#).unwrap();
        assert_eq!(c, Command::Rollback { id: 2 });
    }
}
