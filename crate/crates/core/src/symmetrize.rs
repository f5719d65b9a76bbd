//! Closing a machine under inverses.

use crate::equality::words_equal;
use crate::error::Result;
use crate::group::{Group, Word};
use crate::mealy::MealyMachine;

/// Adds a state `q^-1` for every state without an inverse among the
/// existing states. Involutions and existing inverse pairs are detected with
/// the equality test, so they are not duplicated.
pub fn symmetrize(m: &MealyMachine) -> Result<MealyMachine> {
    let group = Group::new(m.clone())?;
    let n = m.num_states();
    let d = m.degree();
    // inv[q] = index of the inverse state, possibly a new one
    let mut inv: Vec<Option<usize>> = vec![None; n];
    let mut names = m.state_names().to_vec();
    for q in 0..n {
        if inv[q].is_some() {
            continue;
        }
        let Some(sq) = group.state_gen(q) else {
            inv[q] = Some(q);
            continue;
        };
        let found = (q..n).find(|&p| match group.state_gen(p) {
            Some(sp) => words_equal(&group, &Word(vec![sq, sp]), &Word::empty(), None),
            None => false,
        });
        match found {
            Some(p) => {
                inv[q] = Some(p);
                inv[p] = Some(q);
            }
            None => {
                names.push(format!("{}^-1", names[q]));
                inv[q] = Some(names.len() - 1);
            }
        }
    }
    let total = names.len();
    let mut delta: Vec<Vec<usize>> = (0..n).map(|q| (0..d).map(|x| m.delta(q, x)).collect()).collect();
    let mut rho: Vec<Vec<usize>> = (0..n).map(|q| (0..d).map(|x| m.rho(q, x)).collect()).collect();
    let mut owner = vec![0; total];
    for q in 0..n {
        let i = inv[q].unwrap();
        if i >= n {
            owner[i] = q;
        }
    }
    for i in n..total {
        let q = owner[i];
        let p = m.perm(q).expect("invertible").inverse();
        // q^-1 reads y, outputs ρ_q^-1(y), and moves to the inverse of δ(q, ρ_q^-1(y))
        delta.push((0..d).map(|y| inv[m.delta(q, p.apply(y))].unwrap()).collect());
        rho.push(p.images().to_vec());
    }
    Ok(m.extend_states(names, delta, rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::zoo;

    #[test]
    fn involutions_are_not_duplicated() {
        let g = zoo::grigorchuk();
        assert_eq!(symmetrize(&g).unwrap(), g);
        let m = zoo::mnote();
        assert_eq!(symmetrize(&m).unwrap().state_names(), ["a", "b", "b^-1", "e"]);
    }

    #[test]
    fn adds_missing_inverse() {
        let m = crate::formats::parse_automaton("a = <e,a> (1,2)").unwrap();
        let s = symmetrize(&m).unwrap();
        assert_eq!(s.state_names(), ["a", "e", "a^-1"]);
        let g = Group::new(s).unwrap();
        assert!(words_equal(&g, &g.parse_word("a a^-1").unwrap(), &Word::empty(), None));
        assert!(words_equal(&g, &g.parse_word("a^-1 a").unwrap(), &Word::empty(), None));
    }

    #[test]
    fn identity_only() {
        let m = crate::formats::parse_automaton("e = <e,e>").unwrap();
        assert_eq!(symmetrize(&m).unwrap(), m);
    }
}
