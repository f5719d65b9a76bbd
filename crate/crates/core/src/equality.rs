//! Equality in the automaton group by closing pairs of words under sections.
//!
//! Two words are equal iff every pair reachable by taking sections at the
//! same letter has matching root permutations. Sections never grow longer
//! than the word, so the closure is finite and the test always terminates.

use std::collections::VecDeque;

use rustc_hash::FxHashSet;

use crate::aux::AuxGroup;
use crate::group::{Gen, Group, Word};

fn reduce_opt(aux: Option<&AuxGroup>, w: Vec<Gen>) -> Vec<Gen> {
    match aux {
        Some(a) => a.reduce_slice(&w),
        None => w,
    }
}

/// Sound and complete equality test. `aux` (if given) is only used to
/// shorten section words, so it must be a verified cover.
pub fn words_equal(g: &Group, u: &Word, v: &Word, aux: Option<&AuxGroup>) -> bool {
    let d = g.degree();
    let start = (reduce_opt(aux, u.0.clone()), reduce_opt(aux, v.0.clone()));
    let mut seen: FxHashSet<(Vec<Gen>, Vec<Gen>)> = FxHashSet::default();
    let mut queue = VecDeque::new();
    seen.insert(start.clone());
    queue.push_back(start);
    let mut su = Vec::new();
    let mut sv = Vec::new();
    while let Some((a, b)) = queue.pop_front() {
        if a == b {
            continue;
        }
        if g.perm_images(&a) != g.perm_images(&b) {
            return false;
        }
        for x in 0..d {
            su.clear();
            sv.clear();
            g.section_into(&a, x, &mut su);
            g.section_into(&b, x, &mut sv);
            let pair = (reduce_opt(aux, su.clone()), reduce_opt(aux, sv.clone()));
            if !seen.contains(&pair) {
                seen.insert(pair.clone());
                queue.push_back(pair);
            }
        }
    }
    true
}

pub fn is_identity(g: &Group, w: &Word, aux: Option<&AuxGroup>) -> bool {
    words_equal(g, w, &Word::empty(), aux)
}

/// Finds `u` among `candidates` with `w = u` in the group.
pub fn find_equal<'a>(
    g: &Group,
    w: &Word,
    candidates: impl IntoIterator<Item = &'a Word>,
    aux: Option<&AuxGroup>,
) -> Option<&'a Word> {
    candidates.into_iter().find(|c| words_equal(g, w, c, aux))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::zoo;

    #[test]
    fn grigorchuk_identities() {
        let g = Group::new(zoo::grigorchuk()).unwrap();
        let w = |s: &str| g.parse_word(s).unwrap();
        assert!(is_identity(&g, &w("aa"), None));
        assert!(!is_identity(&g, &w("ab"), None));
        assert!(is_identity(&g, &w("adadadad"), None));
        assert!(!is_identity(&g, &w("adad"), None));
        assert!(is_identity(&g, &w("bcd"), None));
        assert!(words_equal(&g, &w("bc"), &w("d"), None));
        assert!(!words_equal(&g, &w("ab"), &w("ba"), None));
        // ab has order 16
        assert!(is_identity(&g, &w("ab").pow(16), None));
        assert!(!is_identity(&g, &w("ab").pow(8), None));
    }
}
