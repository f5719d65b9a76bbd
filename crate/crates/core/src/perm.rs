use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A permutation of the alphabet `{0, .., d-1}`, stored as its image array.
///
/// Composition follows the left-to-right convention used throughout the crate:
/// `p.then(q)` first applies `p`, then `q`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn identity(d: usize) -> Self {
        Perm((0..d).collect())
    }

    /// Builds a permutation from its image array, checking bijectivity.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let d = images.len();
        let mut hit = vec![false; d];
        for &y in &images {
            if y >= d || hit[y] {
                return Err(Error::InvalidArgument(format!(
                    "{images:?} is not a permutation"
                )));
            }
            hit[y] = true;
        }
        Ok(Perm(images))
    }

    /// Builds a permutation of `{0..d}` from 0-based disjoint cycles.
    pub fn from_cycles(d: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<usize> = (0..d).collect();
        let mut touched = vec![false; d];
        for cycle in cycles {
            for (i, &x) in cycle.iter().enumerate() {
                if x >= d {
                    return Err(Error::LetterOutOfRange { letter: x, degree: d });
                }
                if touched[x] {
                    return Err(Error::InvalidArgument(format!(
                        "letter {} appears twice in cycle notation",
                        x + 1
                    )));
                }
                touched[x] = true;
                images[x] = cycle[(i + 1) % cycle.len()];
            }
        }
        Ok(Perm(images))
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &y)| i == y)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (x, &y) in self.0.iter().enumerate() {
            inv[y] = x;
        }
        Perm(inv)
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Perm) -> Self {
        Perm(self.0.iter().map(|&y| other.0[y]).collect())
    }

    /// Disjoint cycles of length at least two, each starting at its smallest
    /// letter, ordered by that letter.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.0.len()];
        let mut out = Vec::new();
        for start in 0..self.0.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.0[start];
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.0[x];
            }
            if cycle.len() > 1 {
                out.push(cycle);
            }
        }
        out
    }

    /// 1-based cycle notation, empty string for the identity.
    pub fn cycle_string(&self) -> String {
        self.cycles()
            .iter()
            .map(|c| {
                let inner: Vec<String> = c.iter().map(|x| (x + 1).to_string()).collect();
                format!("({})", inner.join(","))
            })
            .collect()
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            write!(f, "()")
        } else {
            write!(f, "{}", self.cycle_string())
        }
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycles_round_trip() {
        let p = Perm::from_cycles(6, &[vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap();
        assert_eq!(p.cycle_string(), "(1,2)(3,4)(5,6)");
        assert_eq!(Perm::from_cycles(6, &p.cycles()).unwrap(), p);
        assert!(p.then(&p).is_identity());
    }

    #[test]
    fn then_is_left_to_right() {
        let p = Perm::from_cycles(3, &[vec![0, 1]]).unwrap();
        let q = Perm::from_cycles(3, &[vec![1, 2]]).unwrap();
        // 0 -p-> 1 -q-> 2
        assert_eq!(p.then(&q).apply(0), 2);
        assert_eq!(p.then(&q).inverse().then(&p.then(&q)), Perm::identity(3));
    }

    #[test]
    fn rejects_repeated_letters() {
        assert!(Perm::from_cycles(3, &[vec![0, 1], vec![1, 2]]).is_err());
        assert!(Perm::from_cycles(2, &[vec![0, 2]]).is_err());
        assert!(Perm::from_images(vec![0, 0]).is_err());
    }
}
