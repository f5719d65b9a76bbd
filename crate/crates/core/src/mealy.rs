//! Mealy transducers: validation, action on letter strings, duals and level powers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::Perm;

/// A transducer description that may still be partial; used for validation
/// reports before a [`MealyMachine`] is built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawMachine {
    pub states: Vec<String>,
    pub degree: usize,
    /// `delta[q][x]`, the target state.
    pub delta: Vec<Vec<Option<usize>>>,
    /// `rho[q][x]`, the output letter.
    pub rho: Vec<Vec<Option<usize>>>,
    pub identity: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Issue {
    MissingTransition { state: String, letter: usize },
    MissingOutput { state: String, letter: usize },
    StateOutOfRange { state: String, letter: usize, target: usize },
    LetterOutOfRange { state: String, letter: usize, output: usize },
    NonBijectiveOutput { state: String },
    BadIdentityState { state: String, reason: String },
    Shape { message: String },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub complete: bool,
    pub invertible: bool,
    pub identity_ok: bool,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks completeness, invertibility and the identity-state contract.
pub fn validate(raw: &RawMachine) -> ValidationReport {
    let mut issues = Vec::new();
    let n = raw.states.len();
    let d = raw.degree;
    if n == 0 || d == 0 {
        issues.push(Issue::Shape {
            message: "machine needs at least one state and one letter".into(),
        });
    }
    if raw.delta.len() != n || raw.rho.len() != n {
        issues.push(Issue::Shape {
            message: "transition tables do not match the state list".into(),
        });
        return ValidationReport { issues, ..Default::default() };
    }
    let mut complete = true;
    let mut invertible = true;
    for q in 0..n {
        let name = &raw.states[q];
        for x in 0..d {
            match raw.delta[q].get(x).copied().flatten() {
                None => {
                    complete = false;
                    issues.push(Issue::MissingTransition { state: name.clone(), letter: x });
                }
                Some(t) if t >= n => {
                    complete = false;
                    issues.push(Issue::StateOutOfRange { state: name.clone(), letter: x, target: t });
                }
                _ => {}
            }
            match raw.rho[q].get(x).copied().flatten() {
                None => {
                    complete = false;
                    issues.push(Issue::MissingOutput { state: name.clone(), letter: x });
                }
                Some(y) if y >= d => {
                    complete = false;
                    issues.push(Issue::LetterOutOfRange { state: name.clone(), letter: x, output: y });
                }
                _ => {}
            }
        }
        let outs: Vec<usize> = raw.rho[q].iter().flatten().copied().filter(|&y| y < d).collect();
        if outs.len() == d && Perm::from_images(outs).is_err() {
            invertible = false;
            issues.push(Issue::NonBijectiveOutput { state: name.clone() });
        }
    }
    let mut identity_ok = true;
    if let Some(e) = raw.identity {
        if e >= n {
            identity_ok = false;
            issues.push(Issue::BadIdentityState {
                state: e.to_string(),
                reason: "index out of range".into(),
            });
        } else {
            let name = &raw.states[e];
            for x in 0..d {
                if raw.rho[e].get(x).copied().flatten() != Some(x) {
                    identity_ok = false;
                    issues.push(Issue::BadIdentityState {
                        state: name.clone(),
                        reason: format!("output on letter {} is not trivial", x + 1),
                    });
                    break;
                }
                if raw.delta[e].get(x).copied().flatten() != Some(e) {
                    identity_ok = false;
                    issues.push(Issue::BadIdentityState {
                        state: name.clone(),
                        reason: format!("transition on letter {} leaves the state", x + 1),
                    });
                    break;
                }
            }
        }
    }
    ValidationReport { complete, invertible: invertible && complete, identity_ok, issues }
}

/// A complete deterministic letter-to-letter transducer.
///
/// Complete by construction. Invertibility is checked on demand since duals
/// are generally not invertible; group operations refuse such machines.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MealyMachine {
    states: Vec<String>,
    letters: Vec<String>,
    delta: Vec<Vec<usize>>,
    rho: Vec<Vec<usize>>,
    identity: Option<usize>,
    /// Letter that plays the identity role once states and letters are swapped.
    identity_letter: Option<usize>,
}

fn default_letters(d: usize) -> Vec<String> {
    (1..=d).map(|x| x.to_string()).collect()
}

impl MealyMachine {
    /// Builds a machine from dense tables; fails with the validation issues if
    /// the tables are incomplete or the identity state is inconsistent.
    pub fn new(
        states: Vec<String>,
        degree: usize,
        delta: Vec<Vec<usize>>,
        rho: Vec<Vec<usize>>,
        identity: Option<usize>,
    ) -> Result<Self> {
        let raw = RawMachine {
            states,
            degree,
            delta: delta.iter().map(|r| r.iter().map(|&t| Some(t)).collect()).collect(),
            rho: rho.iter().map(|r| r.iter().map(|&y| Some(y)).collect()).collect(),
            identity,
        };
        Self::from_raw(raw)
    }

    pub fn from_raw(raw: RawMachine) -> Result<Self> {
        let report = validate(&raw);
        let fatal: Vec<_> = report
            .issues
            .iter()
            .filter(|i| !matches!(i, Issue::NonBijectiveOutput { .. }))
            .collect();
        if !fatal.is_empty() {
            return Err(Error::InvalidMachine(format!("{fatal:?}")));
        }
        let unwrap = |t: Vec<Vec<Option<usize>>>| -> Vec<Vec<usize>> {
            t.into_iter().map(|r| r.into_iter().map(Option::unwrap).collect()).collect()
        };
        let mut names = std::collections::HashSet::new();
        for s in &raw.states {
            if !names.insert(s.as_str()) {
                return Err(Error::InvalidMachine(format!("duplicate state name `{s}`")));
            }
        }
        Ok(MealyMachine {
            letters: default_letters(raw.degree),
            states: raw.states,
            delta: unwrap(raw.delta),
            rho: unwrap(raw.rho),
            identity: raw.identity,
            identity_letter: None,
        })
    }

    pub fn to_raw(&self) -> RawMachine {
        RawMachine {
            states: self.states.clone(),
            degree: self.degree(),
            delta: self.delta.iter().map(|r| r.iter().map(|&t| Some(t)).collect()).collect(),
            rho: self.rho.iter().map(|r| r.iter().map(|&y| Some(y)).collect()).collect(),
            identity: self.identity,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate(&self.to_raw())
    }

    pub fn with_letter_names(mut self, letters: Vec<String>) -> Result<Self> {
        if letters.len() != self.degree() {
            return Err(Error::InvalidArgument("wrong number of letter names".into()));
        }
        self.letters = letters;
        Ok(self)
    }

    pub fn degree(&self) -> usize {
        self.letters.len()
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn letter_names(&self) -> &[String] {
        &self.letters
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn identity_state(&self) -> Option<usize> {
        self.identity
    }

    #[inline]
    pub fn delta(&self, q: usize, x: usize) -> usize {
        self.delta[q][x]
    }

    #[inline]
    pub fn rho(&self, q: usize, x: usize) -> usize {
        self.rho[q][x]
    }

    pub fn is_invertible(&self) -> bool {
        self.rho.iter().all(|r| Perm::from_images(r.clone()).is_ok())
    }

    /// Root permutation of a state, if its output is bijective.
    pub fn perm(&self, q: usize) -> Option<Perm> {
        Perm::from_images(self.rho[q].clone()).ok()
    }

    pub(crate) fn require_invertible(&self) -> Result<()> {
        match self.rho.iter().position(|r| Perm::from_images(r.clone()).is_err()) {
            None => Ok(()),
            Some(q) => Err(Error::InvalidMachine(format!(
                "state `{}` has a non-bijective output",
                self.states[q]
            ))),
        }
    }

    /// Image of the letter string `u` under state `q`.
    pub fn apply_state(&self, q: usize, u: &[usize]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(u.len());
        let mut q = q;
        for &x in u {
            if x >= self.degree() {
                return Err(Error::LetterOutOfRange { letter: x, degree: self.degree() });
            }
            out.push(self.rho[q][x]);
            q = self.delta[q][x];
        }
        Ok(out)
    }

    /// Image of `u` under the state sequence `word`, acting left to right.
    pub fn apply_states(&self, word: &[usize], u: &[usize]) -> Result<Vec<usize>> {
        let mut cur = u.to_vec();
        for &q in word {
            cur = self.apply_state(q, &cur)?;
        }
        if word.is_empty() {
            if let Some(&x) = u.iter().find(|&&x| x >= self.degree()) {
                return Err(Error::LetterOutOfRange { letter: x, degree: self.degree() });
            }
        }
        Ok(cur)
    }

    /// Swaps the roles of states and letters: `q --x|y--> p` becomes `x --q|p--> y`.
    pub fn dual(&self) -> MealyMachine {
        let n = self.num_states();
        let d = self.degree();
        let delta = (0..d).map(|x| (0..n).map(|q| self.rho[q][x]).collect()).collect();
        let rho = (0..d).map(|x| (0..n).map(|q| self.delta[q][x]).collect()).collect();
        MealyMachine {
            states: self.letters.clone(),
            letters: self.states.clone(),
            delta,
            rho,
            identity: self.identity_letter,
            identity_letter: self.identity,
        }
    }

    /// The same states acting on `Σ^k`, letters ordered lexicographically.
    pub fn level_power(&self, k: usize) -> Result<MealyMachine> {
        if k == 0 {
            return Err(Error::InvalidArgument("level must be positive".into()));
        }
        let d = self.degree();
        let dk = d
            .checked_pow(k as u32)
            .filter(|&v| v <= 1 << 16)
            .ok_or_else(|| Error::InvalidArgument(format!("alphabet of size {d}^{k} is too large")))?;
        let n = self.num_states();
        let mut delta = vec![vec![0; dk]; n];
        let mut rho = vec![vec![0; dk]; n];
        for q in 0..n {
            for (u, (dst, out)) in delta[q].iter_mut().zip(rho[q].iter_mut()).enumerate() {
                let letters = decode(u, d, k);
                let mut p = q;
                let mut y = 0;
                for x in letters {
                    y = y * d + self.rho[p][x];
                    p = self.delta[p][x];
                }
                *dst = p;
                *out = y;
            }
        }
        let letters = if k == 1 {
            self.letters.clone()
        } else {
            (0..dk)
                .map(|u| decode(u, d, k).iter().map(|&x| self.letters[x].as_str()).collect::<Vec<_>>().join(""))
                .collect()
        };
        Ok(MealyMachine {
            states: self.states.clone(),
            letters,
            delta,
            rho,
            identity: self.identity,
            identity_letter: None,
        })
    }

    /// Renames states; used when adding formal inverses.
    pub(crate) fn extend_states(
        &self,
        names: Vec<String>,
        delta: Vec<Vec<usize>>,
        rho: Vec<Vec<usize>>,
    ) -> MealyMachine {
        MealyMachine {
            states: names,
            letters: self.letters.clone(),
            delta,
            rho,
            identity: self.identity,
            identity_letter: None,
        }
    }
}

/// Splits a letter of `Σ^k` into its `k` base-`d` digits, most significant first.
pub fn decode(mut u: usize, d: usize, k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    for slot in out.iter_mut().rev() {
        *slot = u % d;
        u /= d;
    }
    out
}

pub fn encode(letters: &[usize], d: usize) -> usize {
    letters.iter().fold(0, |acc, &x| acc * d + x)
}
