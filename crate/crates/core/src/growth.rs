//! Exact ball sizes for the uniform word metric by breadth-first enumeration.

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::equality::words_equal;
use crate::group::{Gen, Word};
use crate::portrait::{ElementId, ElementTable};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthSeries {
    /// `gamma[ℓ]` = number of elements of length at most `ℓ`.
    pub gamma: Vec<u64>,
    /// False when the ball cap stopped the enumeration early.
    pub complete: bool,
    /// Words whose canonical id was unavailable and were compared pairwise.
    pub fallback_comparisons: u64,
}

/// Ball sizes `γ(0..=max_len)` for the generating set of `table`'s group.
/// Pass a symmetrized machine for the symmetric word metric.
pub fn growth(table: &ElementTable, max_len: usize, max_ball: usize) -> GrowthSeries {
    let g = table.group();
    let aux = table.aux();
    let mut ids: FxHashSet<ElementId> = FxHashSet::default();
    ids.insert(ElementId::IDENTITY);
    // elements without an id, kept as words for pairwise comparison
    let mut loose: Vec<Word> = Vec::new();
    let mut all_words: Vec<Word> = vec![Word::empty()];
    let mut sphere: Vec<Vec<Gen>> = vec![Vec::new()];
    let mut gamma = vec![1u64];
    let mut fallback = 0u64;
    for _ in 1..=max_len {
        let mut next = Vec::new();
        for w in &sphere {
            let last = w.last().copied();
            for s in 0..g.num_gens() as Gen {
                if !aux.extends(last, s) {
                    continue;
                }
                let mut ws = w.clone();
                ws.push(s);
                let fresh = match table.id_of_reduced(&ws) {
                    Some(id) => ids.insert(id),
                    None => {
                        fallback += 1;
                        let cand = Word(ws.clone());
                        let dup = all_words.iter().chain(&loose).any(|u| words_equal(g, &cand, u, Some(aux)));
                        if !dup {
                            loose.push(cand);
                        }
                        !dup
                    }
                };
                if fresh {
                    all_words.push(Word(ws.clone()));
                    next.push(ws);
                }
                if ids.len() + loose.len() > max_ball {
                    gamma.push((ids.len() + loose.len()) as u64);
                    return GrowthSeries { gamma, complete: false, fallback_comparisons: fallback };
                }
            }
        }
        gamma.push((ids.len() + loose.len()) as u64);
        sphere = next;
    }
    GrowthSeries { gamma, complete: true, fallback_comparisons: fallback }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::Context;

    #[test]
    fn grigorchuk_small_balls() {
        let ctx = Context::builtin("grigorchuk").unwrap();
        let s = growth(&ctx.table, 4, 1_000_000);
        assert_eq!(&s.gamma[..3], &[1, 5, 11]);
        assert!(s.complete);
    }

    #[test]
    fn adding_machine_is_linear() {
        let ctx = Context::builtin("adding-machine").unwrap();
        let s = growth(&ctx.table, 12, 1_000_000);
        assert_eq!(s.gamma, (0..=12u64).map(|l| 2 * l + 1).collect::<Vec<_>>());
    }
}
