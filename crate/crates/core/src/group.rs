//! Generator words over `S = Q \ {e}` and their wreath recursion.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mealy::MealyMachine;
use crate::perm::Perm;

/// Index of a generator in `S`.
pub type Gen = u8;

/// A word over the generating set.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<Gen>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Gen] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn pow(&self, k: usize) -> Word {
        Word(self.0.repeat(k))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<Gen>> for Word {
    fn from(v: Vec<Gen>) -> Self {
        Word(v)
    }
}

/// Perm and section words of a generator word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WreathImage {
    pub perm: Perm,
    pub sections: Vec<Word>,
}

/// An invertible machine viewed as a group with its standard generating set.
#[derive(Debug)]
pub struct Group {
    machine: MealyMachine,
    gens: Vec<usize>,
    state_to_gen: Vec<Option<Gen>>,
    /// `perm[s][x]`
    perm: Vec<Vec<u8>>,
    /// `section[s][x]`, `None` for the identity state.
    section: Vec<Vec<Option<Gen>>>,
}

impl Group {
    pub fn new(machine: MealyMachine) -> Result<Arc<Group>> {
        machine.require_invertible()?;
        let d = machine.degree();
        if d > 256 {
            return Err(Error::InvalidMachine("alphabets above 256 letters are not supported".into()));
        }
        let gens: Vec<usize> =
            (0..machine.num_states()).filter(|&q| Some(q) != machine.identity_state()).collect();
        if gens.len() > Gen::MAX as usize {
            return Err(Error::InvalidMachine("too many generators".into()));
        }
        let mut state_to_gen = vec![None; machine.num_states()];
        for (i, &q) in gens.iter().enumerate() {
            state_to_gen[q] = Some(i as Gen);
        }
        let perm = gens
            .iter()
            .map(|&q| (0..d).map(|x| machine.rho(q, x) as u8).collect())
            .collect();
        let section = gens
            .iter()
            .map(|&q| (0..d).map(|x| state_to_gen[machine.delta(q, x)]).collect())
            .collect();
        Ok(Arc::new(Group { machine, gens, state_to_gen, perm, section }))
    }

    pub fn machine(&self) -> &MealyMachine {
        &self.machine
    }

    pub fn degree(&self) -> usize {
        self.machine.degree()
    }

    pub fn num_gens(&self) -> usize {
        self.gens.len()
    }

    pub fn gen_state(&self, s: Gen) -> usize {
        self.gens[s as usize]
    }

    pub fn state_gen(&self, q: usize) -> Option<Gen> {
        self.state_to_gen[q]
    }

    pub fn gen_name(&self, s: Gen) -> &str {
        &self.machine.state_names()[self.gens[s as usize]]
    }

    pub fn gen_names(&self) -> Vec<String> {
        (0..self.num_gens()).map(|s| self.gen_name(s as Gen).to_string()).collect()
    }

    pub fn gen_index(&self, name: &str) -> Option<Gen> {
        (0..self.num_gens() as Gen).find(|&s| self.gen_name(s) == name)
    }

    #[inline]
    pub fn gen_perm(&self, s: Gen) -> &[u8] {
        &self.perm[s as usize]
    }

    #[inline]
    pub fn gen_section(&self, s: Gen, x: usize) -> Option<Gen> {
        self.section[s as usize][x]
    }

    /// Parses a word from generator names. Names are matched greedily
    /// (longest first); whitespace, `.` and `*` separate tokens. `1` and `e`
    /// (when not generators) denote the empty word.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let mut names: Vec<(String, Gen)> =
            (0..self.num_gens()).map(|s| (self.gen_name(s as Gen).to_string(), s as Gen)).collect();
        names.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(&b.0)));
        let trimmed = text.trim();
        if trimmed.is_empty() || ((trimmed == "1" || trimmed == "e") && self.gen_index(trimmed).is_none()) {
            return Ok(Word::empty());
        }
        let mut rest = trimmed;
        let mut out = Vec::new();
        while !rest.is_empty() {
            let c = rest.chars().next().unwrap();
            if c.is_whitespace() || c == '.' || c == '*' {
                rest = &rest[c.len_utf8()..];
                continue;
            }
            match names.iter().find(|(n, _)| rest.starts_with(n.as_str())) {
                Some((n, s)) => {
                    out.push(*s);
                    rest = &rest[n.len()..];
                }
                None => return Err(Error::UnknownGenerator(rest.to_string())),
            }
        }
        Ok(Word(out))
    }

    /// Concatenated generator names; `1` for the empty word.
    pub fn format_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".into();
        }
        let multi = (0..self.num_gens()).any(|s| self.gen_name(s as Gen).chars().count() > 1);
        let parts: Vec<&str> = w.0.iter().map(|&s| self.gen_name(s)).collect();
        if multi {
            parts.join(".")
        } else {
            parts.concat()
        }
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        match w.0.iter().find(|&&s| s as usize >= self.num_gens()) {
            Some(&s) => Err(Error::GeneratorOutOfRange(s as usize)),
            None => Ok(()),
        }
    }

    /// Root permutation of `w` as images; the word acts left to right.
    pub fn perm_images(&self, w: &[Gen]) -> Vec<u8> {
        let d = self.degree();
        let mut img: Vec<u8> = (0..d as u8).collect();
        for &s in w {
            let p = &self.perm[s as usize];
            for y in img.iter_mut() {
                *y = p[*y as usize];
            }
        }
        img
    }

    /// Section of `w` at letter `x`, appended to `out` (no reduction).
    pub fn section_into(&self, w: &[Gen], x: usize, out: &mut Vec<Gen>) -> usize {
        let mut y = x;
        for &s in w {
            if let Some(t) = self.section[s as usize][y] {
                out.push(t);
            }
            y = self.perm[s as usize][y] as usize;
        }
        y
    }

    pub fn wreath(&self, w: &Word) -> Result<WreathImage> {
        self.check_word(w)?;
        let d = self.degree();
        let mut images = Vec::with_capacity(d);
        let mut sections = Vec::with_capacity(d);
        for x in 0..d {
            let mut sec = Vec::new();
            images.push(self.section_into(&w.0, x, &mut sec));
            sections.push(Word(sec));
        }
        Ok(WreathImage { perm: Perm::from_images(images).expect("product of permutations"), sections })
    }

    /// Action of `w` on the letter string `u`.
    pub fn apply(&self, w: &Word, u: &[usize]) -> Result<Vec<usize>> {
        self.check_word(w)?;
        let states: Vec<usize> = w.0.iter().map(|&s| self.gens[s as usize]).collect();
        self.machine.apply_states(&states, u)
    }
}

/// Product law of the permutational wreath product: `ψ(v)ψ(w)`.
pub fn wreath_product(v: &WreathImage, w: &WreathImage) -> WreathImage {
    let sections = v
        .sections
        .iter()
        .enumerate()
        .map(|(x, vx)| vx.concat(&w.sections[v.perm.apply(x)]))
        .collect();
    WreathImage { perm: v.perm.then(&w.perm), sections }
}
