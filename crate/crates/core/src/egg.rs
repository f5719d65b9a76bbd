//! Contraction coefficients and the level-synchronous egg search.

use std::sync::Arc;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Gen, Word};
use crate::portrait::{ElementId, ElementTable};
use crate::weights::{Constraints, Weights};

/// Occurrence counts of a word: `n[s] = N_s(w)` and `c[s] = Σ_x N_s(w_x)`
/// over reduced, non-trivial sections.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WordStats {
    pub n: Vec<u32>,
    pub c: Vec<u32>,
}

impl WordStats {
    pub fn numerator(&self, w: &Weights) -> f64 {
        self.c.iter().zip(w.as_slice()).map(|(&k, &p)| k as f64 * p).sum()
    }

    pub fn denominator(&self, w: &Weights) -> f64 {
        self.n.iter().zip(w.as_slice()).map(|(&k, &p)| k as f64 * p).sum()
    }

    pub fn eta(&self, w: &Weights) -> f64 {
        self.numerator(w) / self.denominator(w)
    }

    pub fn syllables(&self) -> u32 {
        self.n.iter().sum()
    }
}

/// `α = ln d / (ln d − ln η)`.
pub fn alpha_from(eta: f64, d: usize) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidArgument(format!("eta must lie in (0, 1], got {eta}")));
    }
    if d < 2 {
        return Err(Error::InvalidArgument("alphabet size must be at least 2".into()));
    }
    let ld = (d as f64).ln();
    Ok(ld / (ld - eta.ln()))
}

/// Exponent certified by a contraction coefficient, `0` for `η = 0`.
pub fn alpha_of_bound(eta: f64, d: usize) -> Option<f64> {
    if eta == 0.0 {
        Some(0.0)
    } else {
        alpha_from(eta, d).ok().filter(|_| eta < 1.0)
    }
}

/// A frontier word with its wreath data kept reduced, so that extending by
/// one letter only touches the last letter of each section.
#[derive(Clone, Debug)]
pub struct Node {
    pub word: Vec<Gen>,
    perm: Box<[u8]>,
    sections: Vec<Vec<Gen>>,
    section_ids: Vec<Option<ElementId>>,
    pub id: Option<ElementId>,
    pub stats: WordStats,
}

fn count_stats(table: &ElementTable, word: &[Gen], sections: &[Vec<Gen>], ids: &[Option<ElementId>]) -> WordStats {
    let n_gens = table.group().num_gens();
    let mut n = vec![0u32; n_gens];
    for &s in word {
        n[s as usize] += 1;
    }
    let mut c = vec![0u32; n_gens];
    for (sec, id) in sections.iter().zip(ids) {
        if *id == Some(ElementId::IDENTITY) {
            continue;
        }
        for &s in sec {
            c[s as usize] += 1;
        }
    }
    WordStats { n, c }
}

impl Node {
    /// Builds the node of a reduced word from scratch.
    pub fn build(table: &ElementTable, word: &[Gen]) -> Node {
        let g = table.group();
        let aux = table.aux();
        let d = g.degree();
        let perm: Box<[u8]> = g.perm_images(word).into();
        let mut sections = Vec::with_capacity(d);
        let mut tmp = Vec::new();
        for x in 0..d {
            tmp.clear();
            g.section_into(word, x, &mut tmp);
            sections.push(aux.reduce_slice(&tmp));
        }
        Self::finish(table, word.to_vec(), perm, sections)
    }

    fn finish(table: &ElementTable, word: Vec<Gen>, perm: Box<[u8]>, sections: Vec<Vec<Gen>>) -> Node {
        let section_ids: Vec<Option<ElementId>> = sections.iter().map(|s| table.id_of_reduced(s)).collect();
        let id = if word.len() == 1 {
            Some(table.atom(word[0]))
        } else if section_ids.iter().all(Option::is_some) {
            let children: Vec<ElementId> = section_ids.iter().map(|c| c.unwrap()).collect();
            table.intern(&perm, &children)
        } else {
            None
        };
        let stats = count_stats(table, &word, &sections, &section_ids);
        Node { word, perm, sections, section_ids, id, stats }
    }

    /// The node of `word · s`; `s` must keep the word reduced.
    pub fn extend(&self, table: &ElementTable, s: Gen) -> Node {
        let g = table.group();
        let aux = table.aux();
        let mut word = Vec::with_capacity(self.word.len() + 1);
        word.extend_from_slice(&self.word);
        word.push(s);
        let ps = g.gen_perm(s);
        let perm: Box<[u8]> = self.perm.iter().map(|&y| ps[y as usize]).collect();
        let sections = self
            .sections
            .iter()
            .enumerate()
            .map(|(x, sec)| {
                let mut out = Vec::with_capacity(sec.len() + 1);
                out.extend_from_slice(sec);
                if let Some(t) = g.gen_section(s, self.perm[x] as usize) {
                    aux.push(&mut out, t);
                }
                out
            })
            .collect();
        Self::finish(table, word, perm, sections)
    }

    pub fn sections(&self) -> &[Vec<Gen>] {
        &self.sections
    }

    pub fn section_ids(&self) -> &[Option<ElementId>] {
        &self.section_ids
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }
}

/// Counts of a reduced non-empty word.
pub fn word_stats(table: &ElementTable, w: &Word) -> Result<WordStats> {
    if w.is_empty() {
        return Err(Error::InvalidArgument("the contraction ratio of the empty word is undefined".into()));
    }
    table.group().check_word(w)?;
    let red = table.aux().reduce_slice(&w.0);
    if red.is_empty() {
        return Err(Error::InvalidArgument("word reduces to the identity".into()));
    }
    Ok(Node::build(table, &red).stats)
}

/// `η(w) = Σ_x |w_x|_π / |w|_π` with sections reduced and trivial ones dropped.
pub fn eta_of(table: &ElementTable, w: &Word, weights: &Weights) -> Result<f64> {
    Ok(word_stats(table, w)?.eta(weights))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStatus {
    Found,
    RadiusExceeded,
    Aborted,
}

impl SearchStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SearchStatus::Found => "found",
            SearchStatus::RadiusExceeded => "radius-exceeded",
            SearchStatus::Aborted => "aborted",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub target: f64,
    pub radius_cap: usize,
    /// Abort when the yolk grows beyond this many words.
    pub max_frontier: usize,
    /// Keep every enqueued word (needed for checkpoints and oracle checks).
    pub keep_trace: bool,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl SearchConfig {
    pub fn new(target: f64) -> Self {
        SearchConfig { target, radius_cap: 256, max_frontier: 20_000_000, keep_trace: false, workers: None }
    }

    pub fn radius_cap(mut self, r: usize) -> Self {
        self.radius_cap = r;
        self
    }

    pub fn trace(mut self, on: bool) -> Self {
        self.keep_trace = on;
        self
    }

    pub fn workers(mut self, n: Option<usize>) -> Self {
        self.workers = n;
        self
    }
}

/// One processed frontier level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    pub processed: usize,
    pub accepted: usize,
    pub candidates: usize,
    pub merged: usize,
    pub unknown: usize,
    pub yolk: usize,
    pub shell: usize,
    pub eta_max: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub words_processed: u64,
    pub candidates: u64,
    pub merged: u64,
    pub unknown_ids: u64,
    pub table_nodes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellWord {
    pub word: Word,
    pub stats: WordStats,
    pub eta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub status: SearchStatus,
    pub target: f64,
    pub weights: Weights,
    pub eta_max: f64,
    pub alpha: Option<f64>,
    pub radius: usize,
    pub egg_size: usize,
    pub shell: Vec<ShellWord>,
    /// Unprocessed yolk words (empty when found).
    pub frontier: Vec<Word>,
    pub levels: Vec<LevelRecord>,
    pub stats: SearchStats,
}

impl SearchResult {
    pub fn per_level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.yolk).collect()
    }

    pub fn count_rows(&self) -> Vec<WordStats> {
        self.shell.iter().map(|s| s.stats.clone()).collect()
    }
}

/// Serializable search state, words only; ids are recomputed on restore.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchState {
    pub weights: Weights,
    pub target: f64,
    pub yolk: Vec<Word>,
    pub shell: Vec<Word>,
    pub interior: Vec<Word>,
    pub radius: usize,
    pub levels: Vec<LevelRecord>,
    pub stats: SearchStats,
}

/// The target semi-algorithm as a resumable state machine.
#[derive(Clone)]
pub struct EggSearch {
    table: Arc<ElementTable>,
    weights: Weights,
    target: f64,
    yolk: Vec<Node>,
    shell: Vec<Node>,
    interior: Option<Vec<Word>>,
    /// Canonical id of every enqueued word with its length.
    seen: FxHashMap<ElementId, u32>,
    radius: usize,
    levels: Vec<LevelRecord>,
    stats: SearchStats,
}

impl std::fmt::Debug for EggSearch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EggSearch")
            .field("target", &self.target)
            .field("yolk", &self.yolk.len())
            .field("shell", &self.shell.len())
            .field("radius", &self.radius)
            .finish()
    }
}

fn check_target(target: f64) -> Result<()> {
    if target > 0.0 && target <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("target must lie in (0, 1], got {target}")))
    }
}

impl EggSearch {
    /// Starts from the generators. Weights must satisfy `constraints`.
    pub fn new(
        table: Arc<ElementTable>,
        weights: Weights,
        constraints: &Constraints,
        target: f64,
        keep_trace: bool,
    ) -> Result<EggSearch> {
        check_target(target)?;
        constraints.check(&weights)?;
        if weights.len() != table.group().num_gens() {
            return Err(Error::Weights("weight count differs from the generator count".into()));
        }
        let mut seen = FxHashMap::default();
        seen.insert(ElementId::IDENTITY, 0);
        let mut yolk = Vec::new();
        for s in 0..table.group().num_gens() as Gen {
            let node = Node::build(&table, &[s]);
            let id = node.id.expect("atoms are interned");
            if seen.contains_key(&id) {
                continue;
            }
            seen.insert(id, 1);
            yolk.push(node);
        }
        Ok(EggSearch {
            table,
            weights,
            target,
            yolk,
            shell: Vec::new(),
            interior: keep_trace.then(Vec::new),
            seen,
            radius: 0,
            levels: Vec::new(),
            stats: SearchStats::default(),
        })
    }

    pub fn table(&self) -> &Arc<ElementTable> {
        &self.table
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn set_target(&mut self, target: f64) -> Result<usize> {
        check_target(target)?;
        self.target = target;
        Ok(self.reverify())
    }

    pub fn yolk(&self) -> &[Node] {
        &self.yolk
    }

    pub fn shell(&self) -> &[Node] {
        &self.shell
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn levels(&self) -> &[LevelRecord] {
        &self.levels
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }

    pub fn is_done(&self) -> bool {
        self.yolk.is_empty()
    }

    pub fn trace(&self) -> Option<&[Word]> {
        self.interior.as_deref()
    }

    /// Length of the shortest yolk word, the next level to process.
    pub fn next_level(&self) -> Option<usize> {
        self.yolk.iter().map(Node::len).min()
    }

    pub fn eta_max(&self) -> f64 {
        self.shell.iter().map(|n| n.stats.eta(&self.weights)).fold(0.0, f64::max)
    }

    /// Switches weights and moves shell words that no longer meet the target
    /// back to the yolk. Returns how many moved.
    pub fn reweight(&mut self, weights: Weights, constraints: &Constraints) -> Result<usize> {
        constraints.check(&weights)?;
        self.weights = weights;
        Ok(self.reverify())
    }

    fn reverify(&mut self) -> usize {
        let (keep, back): (Vec<Node>, Vec<Node>) =
            std::mem::take(&mut self.shell).into_iter().partition(|n| n.stats.eta(&self.weights) <= self.target);
        self.shell = keep;
        let moved = back.len();
        self.yolk.extend(back);
        moved
    }

    /// Processes the yolk words accepted by `select` (all when `None`):
    /// contracting words go to the shell, the others are replaced by their
    /// reduced one-letter extensions that represent new elements.
    pub fn step_filtered(&mut self, select: Option<&(dyn Fn(&Node, f64) -> bool + Sync)>) -> LevelRecord {
        let mut yolk = std::mem::take(&mut self.yolk);
        yolk.sort_by(|a, b| a.word.len().cmp(&b.word.len()).then_with(|| a.word.cmp(&b.word)));
        let weights = &self.weights;
        let (chosen, kept): (Vec<Node>, Vec<Node>) = match select {
            None => (yolk, Vec::new()),
            Some(f) => yolk.into_iter().partition(|n| f(n, n.stats.eta(weights))),
        };
        let processed = chosen.len();
        let level = chosen.iter().map(Node::len).max().unwrap_or(0);
        self.radius = self.radius.max(level);
        let mut to_extend = Vec::new();
        let mut accepted = 0;
        for node in chosen {
            if node.stats.eta(weights) <= self.target {
                accepted += 1;
                self.shell.push(node);
            } else {
                to_extend.push(node);
            }
        }
        let table = &self.table;
        let aux = table.aux();
        let n_gens = table.group().num_gens() as Gen;
        let children: Vec<Vec<Node>> = to_extend
            .par_iter()
            .map(|node| {
                let last = node.word.last().copied();
                (0..n_gens).filter(|&s| aux.extends(last, s)).map(|s| node.extend(table, s)).collect()
            })
            .collect();
        if let Some(trace) = self.interior.as_mut() {
            trace.extend(to_extend.iter().map(|n| Word(n.word.clone())));
        }
        drop(to_extend);
        let mut candidates = 0;
        let mut merged = 0;
        let mut unknown = 0;
        let mut next = kept;
        for child in children.into_iter().flatten() {
            candidates += 1;
            match child.id {
                Some(id) => {
                    let len = child.word.len() as u32;
                    match self.seen.get(&id) {
                        Some(&l) if l <= len => {
                            merged += 1;
                            continue;
                        }
                        _ => {
                            self.seen.insert(id, len);
                        }
                    }
                }
                None => unknown += 1,
            }
            next.push(child);
        }
        self.yolk = next;
        self.stats.words_processed += processed as u64;
        self.stats.candidates += candidates as u64;
        self.stats.merged += merged as u64;
        self.stats.unknown_ids += unknown as u64;
        self.stats.table_nodes = self.table.len() as u64;
        let record = LevelRecord {
            level,
            processed,
            accepted,
            candidates,
            merged,
            unknown,
            yolk: self.yolk.len(),
            shell: self.shell.len(),
            eta_max: self.eta_max(),
        };
        self.levels.push(record.clone());
        record
    }

    pub fn step(&mut self) -> LevelRecord {
        self.step_filtered(None)
    }

    /// Runs until the yolk empties, the next level exceeds `radius_cap`, or
    /// the yolk outgrows `max_frontier`. `on_level` sees every level record.
    pub fn run_with(&mut self, cfg: &SearchConfig, mut on_level: impl FnMut(&LevelRecord)) -> SearchStatus {
        let pool = cfg.workers.map(|n| {
            rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().expect("thread pool")
        });
        loop {
            match self.next_level() {
                None => return SearchStatus::Found,
                Some(l) if l > cfg.radius_cap => return SearchStatus::RadiusExceeded,
                _ => {}
            }
            if self.yolk.len() > cfg.max_frontier {
                return SearchStatus::Aborted;
            }
            let rec = match &pool {
                Some(p) => p.install(|| self.step()),
                None => self.step(),
            };
            on_level(&rec);
        }
    }

    pub fn result(&self, status: SearchStatus) -> SearchResult {
        let mut shell: Vec<ShellWord> = self
            .shell
            .iter()
            .map(|n| ShellWord { word: Word(n.word.clone()), stats: n.stats.clone(), eta: n.stats.eta(&self.weights) })
            .collect();
        shell.sort_by(|a, b| a.word.len().cmp(&b.word.len()).then_with(|| a.word.cmp(&b.word)));
        let mut frontier: Vec<Word> = self.yolk.iter().map(|n| Word(n.word.clone())).collect();
        frontier.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let eta_max = self.eta_max();
        let alpha = if status == SearchStatus::Found {
            alpha_of_bound(eta_max, self.table.group().degree())
        } else {
            None
        };
        SearchResult {
            status,
            target: self.target,
            weights: self.weights.clone(),
            eta_max,
            alpha,
            radius: self.radius,
            egg_size: shell.len(),
            shell,
            frontier,
            levels: self.levels.clone(),
            stats: self.stats.clone(),
        }
    }

    pub fn save(&self) -> SearchState {
        let words = |v: &[Node]| v.iter().map(|n| Word(n.word.clone())).collect::<Vec<_>>();
        SearchState {
            weights: self.weights.clone(),
            target: self.target,
            yolk: words(&self.yolk),
            shell: words(&self.shell),
            interior: self.interior.clone().unwrap_or_default(),
            radius: self.radius,
            levels: self.levels.clone(),
            stats: self.stats.clone(),
        }
    }

    /// Rebuilds a search from saved words. The seen set is recomputed from
    /// every enqueued word, so the state must have been saved with a trace.
    pub fn restore(table: Arc<ElementTable>, state: SearchState, constraints: &Constraints) -> Result<EggSearch> {
        let mut s = EggSearch::new(table.clone(), state.weights.clone(), constraints, state.target, true)?;
        s.seen.clear();
        s.seen.insert(ElementId::IDENTITY, 0);
        let build = |w: &Word| -> Result<Node> {
            table.group().check_word(w)?;
            Ok(Node::build(&table, &w.0))
        };
        s.yolk = state.yolk.iter().map(build).collect::<Result<_>>()?;
        s.shell = state.shell.iter().map(build).collect::<Result<_>>()?;
        for w in state.interior.iter().chain(&state.shell).chain(&state.yolk) {
            if let Some(id) = table.id_of_reduced(&w.0) {
                let len = w.len() as u32;
                let e = s.seen.entry(id).or_insert(len);
                *e = (*e).min(len);
            }
        }
        s.interior = Some(state.interior);
        s.radius = state.radius;
        s.levels = state.levels;
        s.stats = state.stats;
        Ok(s)
    }
}

/// One-shot search from the generators.
pub fn search_egg(
    table: Arc<ElementTable>,
    weights: Weights,
    constraints: &Constraints,
    cfg: &SearchConfig,
) -> Result<(SearchResult, EggSearch)> {
    let mut s = EggSearch::new(table, weights, constraints, cfg.target, cfg.keep_trace)?;
    let status = s.run_with(cfg, |_| {});
    Ok((s.result(status), s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aux::AuxGroup;
    use crate::formats::zoo;
    use crate::group::Group;
    use crate::portrait::PortraitCaps;

    fn setup() -> (Arc<ElementTable>, Constraints) {
        let g = Group::new(zoo::grigorchuk()).unwrap();
        let aux = AuxGroup::parse_blocks(&g, "{a},{b,c,d}").unwrap();
        let c = Constraints::from_aux(&aux);
        (Arc::new(ElementTable::new(g, aux, PortraitCaps::default())), c)
    }

    fn bartholdi() -> Weights {
        Weights::from_vec_unchecked(zoo::BARTHOLDI_WEIGHTS.to_vec())
    }

    #[test]
    fn eta_examples() {
        let (t, _) = setup();
        let w = |s: &str| t.group().parse_word(s).unwrap();
        let e = eta_of(&t, &w("ba"), &bartholdi()).unwrap();
        assert!((e - 0.528900 / 0.652531).abs() < 1e-6);
        assert_eq!(eta_of(&t, &w("a"), &Weights::uniform(4)).unwrap(), 0.0);
        assert!((eta_of(&t, &w("d"), &bartholdi()).unwrap() - 0.34747 / 0.123631).abs() < 1e-9);
        assert!(eta_of(&t, &Word::empty(), &bartholdi()).is_err());
    }

    #[test]
    fn alpha_examples() {
        assert!((alpha_from(0.8106, 2).unwrap() - 0.7675).abs() < 1e-4);
        assert_eq!(alpha_from(1.0, 5).unwrap(), 1.0);
        assert!(alpha_from(0.0, 2).is_err());
        assert!(alpha_from(1.5, 2).is_err());
        assert!(alpha_from(0.5, 1).is_err());
    }

    #[test]
    fn level_one_bartholdi() {
        let (t, c) = setup();
        let (r, _) = search_egg(t.clone(), bartholdi(), &c, &SearchConfig::new(0.99)).unwrap();
        assert_eq!(r.status, SearchStatus::Found);
        assert_eq!((r.radius, r.egg_size), (2, 4));
        let names: Vec<String> = r.shell.iter().map(|s| t.group().format_word(&s.word)).collect();
        assert_eq!(names, ["a", "ba", "ca", "da"]);
        assert!((r.eta_max - 0.8106).abs() < 1e-4);
    }

    #[test]
    fn uniform_does_not_end() {
        let (t, c) = setup();
        let cfg = SearchConfig::new(0.99).radius_cap(10);
        let (r, _) = search_egg(t, Weights::uniform(4), &c, &cfg).unwrap();
        assert_eq!(r.status, SearchStatus::RadiusExceeded);
        assert_eq!(r.radius, 10);
        assert!(r.alpha.is_none());
    }

    #[test]
    fn save_restore_round_trip() {
        let (t, c) = setup();
        let mut s = EggSearch::new(t.clone(), Weights::uniform(4), &c, 0.99, true).unwrap();
        for _ in 0..4 {
            s.step();
        }
        let state = s.save();
        let mut r = EggSearch::restore(t, state.clone(), &c).unwrap();
        assert_eq!(r.save(), state);
        s.step();
        r.step();
        assert_eq!(r.save(), s.save());
    }
}
