//! Bounded checks of the hypotheses of the super-polynomial growth criterion.
//!
//! A pass of the section-length scan is evidence up to the scanned length,
//! never a proof; verdicts say so.

use serde::{Deserialize, Serialize};

use crate::aux::AuxGroup;
use crate::egg::{SearchResult, SearchStatus};
use crate::equality::words_equal;
use crate::error::{Error, Result};
use crate::group::{Gen, Group, Word};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum PartitionVerdict {
    Pass { orders: Vec<usize> },
    Fail { reason: String },
}

/// Each block together with `e` must be a subgroup, and either there are at
/// least three blocks, or two blocks that are not both of order two.
pub fn check_partition(group: &Group, blocks: &[Vec<Gen>]) -> Result<PartitionVerdict> {
    let n = group.num_gens();
    let mut hit = vec![false; n];
    for &s in blocks.iter().flatten() {
        let slot = hit.get_mut(s as usize).ok_or(Error::GeneratorOutOfRange(s as usize))?;
        if *slot {
            return Err(Error::InvalidArgument("blocks overlap".into()));
        }
        *slot = true;
    }
    if hit.iter().any(|h| !h) {
        return Err(Error::InvalidArgument("blocks do not cover the generators".into()));
    }
    let aux = match AuxGroup::infer(group, blocks) {
        Ok(a) => a,
        Err(e) => return Ok(PartitionVerdict::Fail { reason: e.to_string() }),
    };
    let report = aux.verify_factors(group);
    if !report.ok {
        return Ok(PartitionVerdict::Fail { reason: format!("{report:?}") });
    }
    let orders: Vec<usize> = blocks.iter().map(|b| b.len() + 1).collect();
    let k = orders.len();
    let sized = k >= 3 || (k == 2 && !(orders[0] == 2 && orders[1] == 2));
    Ok(if sized {
        PartitionVerdict::Pass { orders }
    } else {
        PartitionVerdict::Fail {
            reason: format!("{k} block(s) of orders {orders:?}: need three blocks, or two not both of order two"),
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum ContractionVerdict {
    /// No violation among reduced words up to `max_len` (evidence only).
    Pass { max_len: usize, words_checked: u64 },
    Counterexample { word: String, letter: usize, section_len: usize },
}

fn for_each_reduced(aux: &AuxGroup, max_len: usize, mut f: impl FnMut(&[Gen]) -> bool) {
    let n = aux.num_gens() as Gen;
    let mut level: Vec<Vec<Gen>> = (0..n).map(|s| vec![s]).collect();
    for _ in 1..=max_len {
        for w in &level {
            if !f(w) {
                return;
            }
        }
        let mut next = Vec::new();
        for w in &level {
            for s in 0..n {
                if aux.extends(w.last().copied(), s) {
                    let mut ws = w.clone();
                    ws.push(s);
                    next.push(ws);
                }
            }
        }
        level = next;
    }
}

/// Scans reduced words for `2·|w_x| ≤ |w| + 1`, sections reduced in the cover.
pub fn check_section_contraction(group: &Group, aux: &AuxGroup, max_len: usize) -> ContractionVerdict {
    let mut found = None;
    let mut checked = 0u64;
    let mut sec = Vec::new();
    for_each_reduced(aux, max_len, |w| {
        checked += 1;
        for x in 0..group.degree() {
            sec.clear();
            group.section_into(w, x, &mut sec);
            let len = aux.reduce_slice(&sec).len();
            if 2 * len > w.len() + 1 {
                found = Some((group.format_word(&Word(w.to_vec())), x + 1, len));
                return false;
            }
        }
        true
    });
    match found {
        Some((word, letter, section_len)) => ContractionVerdict::Counterexample { word, letter, section_len },
        None => ContractionVerdict::Pass { max_len, words_checked: checked },
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum SurjectivityVerdict {
    /// For each generator, a word fixing the first letter whose section there
    /// equals it.
    Pass { witnesses: Vec<(String, String)> },
    Inconclusive { missing: Vec<String> },
}

pub fn check_first_section_surjective(group: &Group, aux: &AuxGroup, max_len: usize) -> SurjectivityVerdict {
    let n = group.num_gens();
    let mut witness: Vec<Option<Word>> = vec![None; n];
    let mut sec = Vec::new();
    for_each_reduced(aux, max_len, |w| {
        sec.clear();
        if group.section_into(w, 0, &mut sec) != 0 {
            return true;
        }
        let red = Word(aux.reduce_slice(&sec));
        for s in 0..n {
            if witness[s].is_none() && words_equal(group, &red, &Word(vec![s as Gen]), Some(aux)) {
                witness[s] = Some(Word(w.to_vec()));
            }
        }
        witness.iter().any(Option::is_none)
    });
    if witness.iter().all(Option::is_some) {
        SurjectivityVerdict::Pass {
            witnesses: witness
                .iter()
                .enumerate()
                .map(|(s, w)| (group.gen_name(s as Gen).to_string(), group.format_word(w.as_ref().unwrap())))
                .collect(),
        }
    } else {
        SurjectivityVerdict::Inconclusive {
            missing: (0..n).filter(|&s| witness[s].is_none()).map(|s| group.gen_name(s as Gen).to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperpolyReport {
    pub partition: PartitionVerdict,
    pub section_contraction: ContractionVerdict,
    pub first_section: SurjectivityVerdict,
    pub contracting_egg: Option<f64>,
    /// `intermediate-conditional` when every check passes, `inconclusive` otherwise.
    pub verdict: String,
    pub note: String,
}

pub fn superpoly_report(
    group: &Group,
    aux: &AuxGroup,
    blocks: &[Vec<Gen>],
    max_len: usize,
    search: Option<&SearchResult>,
) -> Result<SuperpolyReport> {
    let partition = check_partition(group, blocks)?;
    let section_contraction = check_section_contraction(group, aux, max_len);
    let first_section = check_first_section_surjective(group, aux, max_len);
    let contracting_egg = search
        .filter(|r| r.status == SearchStatus::Found && r.eta_max < 1.0)
        .map(|r| r.eta_max);
    let all = matches!(partition, PartitionVerdict::Pass { .. })
        && matches!(section_contraction, ContractionVerdict::Pass { .. })
        && matches!(first_section, SurjectivityVerdict::Pass { .. })
        && contracting_egg.is_some();
    Ok(SuperpolyReport {
        partition,
        section_contraction,
        first_section,
        contracting_egg,
        verdict: if all { "intermediate-conditional" } else { "inconclusive" }.into(),
        note: format!("section lengths were only scanned up to length {max_len}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::{parse_automaton, zoo};

    #[test]
    fn grigorchuk_checks() {
        let g = Group::new(zoo::grigorchuk()).unwrap();
        let aux = AuxGroup::parse_blocks(&g, "{a},{b,c,d}").unwrap();
        assert!(matches!(check_partition(&g, &[vec![0], vec![1, 2, 3]]).unwrap(), PartitionVerdict::Pass { .. }));
        assert!(matches!(check_section_contraction(&g, &aux, 8), ContractionVerdict::Pass { .. }));
        assert!(matches!(check_section_contraction(&g, &aux, 1), ContractionVerdict::Pass { .. }));
        match check_first_section_surjective(&g, &aux, 3) {
            SurjectivityVerdict::Pass { witnesses } => {
                assert_eq!(witnesses[0], ("a".into(), "b".into()));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            check_first_section_surjective(&g, &aux, 1),
            SurjectivityVerdict::Inconclusive { missing: vec!["b".into(), "c".into(), "d".into()] }
        );
    }

    #[test]
    fn two_involutions_fail_the_size_condition() {
        let m = parse_automaton("a = <e,e> (1,2)\nb = <a,b>").unwrap();
        let g = Group::new(m).unwrap();
        assert!(matches!(check_partition(&g, &[vec![0], vec![1]]).unwrap(), PartitionVerdict::Fail { .. }));
    }

    #[test]
    fn three_involutions_pass() {
        let g = Group::new(zoo::y_shape()).unwrap();
        assert!(matches!(
            check_partition(&g, &[vec![0], vec![1], vec![2]]).unwrap(),
            PartitionVerdict::Pass { .. }
        ));
    }

    #[test]
    fn long_sections_are_reported() {
        let m = parse_automaton("q = <q,r>\nr = <r,q> (1,2)").unwrap();
        let g = Group::new(m).unwrap();
        let aux = AuxGroup::detect(&g).unwrap();
        match check_section_contraction(&g, &aux, 4) {
            ContractionVerdict::Counterexample { word, section_len, .. } => {
                assert_eq!(word.len(), 2);
                assert_eq!(section_len, 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn trivial_first_sections_stay_inconclusive() {
        let m = parse_automaton("a = <e,e> (1,2)\nb = <e,b>").unwrap();
        let g = Group::new(m).unwrap();
        let aux = AuxGroup::detect(&g).unwrap();
        assert!(matches!(check_first_section_surjective(&g, &aux, 5), SurjectivityVerdict::Inconclusive { .. }));
    }
}
