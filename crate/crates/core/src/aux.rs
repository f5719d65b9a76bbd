//! The cover group `G̃`: a free product of finite blocks and free generators.
//!
//! Free reduction in `G̃` is a stack machine over [`AuxGroup::combine`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::equality::words_equal;
use crate::error::{Error, Result};
use crate::group::{Gen, Group, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Combine {
    Keep,
    Cancel,
    Merge(Gen),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuxMode {
    FreeProduct,
    FreeGroup,
    Mixed,
}

impl fmt::Display for AuxMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AuxMode::FreeProduct => "free-product",
            AuxMode::FreeGroup => "free-group",
            AuxMode::Mixed => "mixed",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Block {
    /// A finite group on `members ∪ {e}`; `table[i][j]` is the product of
    /// members `i` and `j`, `None` meaning the identity.
    Finite { members: Vec<Gen>, table: Vec<Vec<Option<Gen>>> },
    /// A free factor: one generator, optionally with its inverse as a second member.
    Free { members: Vec<Gen> },
}

impl Block {
    pub fn members(&self) -> &[Gen] {
        match self {
            Block::Finite { members, .. } | Block::Free { members } => members,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxGroup {
    num_gens: usize,
    blocks: Vec<Block>,
    #[serde(skip)]
    combine: Vec<Combine>,
    #[serde(skip)]
    inverse: Vec<Option<Gen>>,
    #[serde(skip)]
    block_of: Vec<usize>,
}

/// Outcome of checking a declared table against the machine.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorReport {
    pub ok: bool,
    /// `(s, t, declared product)` entries that fail in the group.
    pub failures: Vec<(String, String, String)>,
    /// Table-level problems (not a group, blocks not a partition).
    pub problems: Vec<String>,
}

impl AuxGroup {
    /// Builds from explicit blocks, checking the partition and the group
    /// axioms of each finite table. No check against a machine is made here.
    pub fn from_blocks(num_gens: usize, blocks: Vec<Block>) -> Result<AuxGroup> {
        let mut block_of = vec![usize::MAX; num_gens];
        for (b, block) in blocks.iter().enumerate() {
            if block.members().is_empty() {
                return Err(Error::Auxiliary("empty block".into()));
            }
            for &s in block.members() {
                let slot = block_of
                    .get_mut(s as usize)
                    .ok_or(Error::GeneratorOutOfRange(s as usize))?;
                if *slot != usize::MAX {
                    return Err(Error::Auxiliary(format!("generator {s} appears in two blocks")));
                }
                *slot = b;
            }
        }
        if let Some(s) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::Auxiliary(format!("generator {s} is not covered by any block")));
        }
        for block in &blocks {
            match block {
                Block::Finite { members, table } => check_group_table(members, table)?,
                Block::Free { members } => {
                    if members.len() > 2 {
                        return Err(Error::Auxiliary("free blocks hold a generator and its inverse".into()));
                    }
                }
            }
        }
        let mut aux = AuxGroup { num_gens, blocks, combine: Vec::new(), inverse: Vec::new(), block_of };
        aux.rebuild();
        Ok(aux)
    }

    fn rebuild(&mut self) {
        let n = self.num_gens;
        self.block_of = vec![0; n];
        self.inverse = vec![None; n];
        self.combine = vec![Combine::Keep; n * n];
        for (b, block) in self.blocks.iter().enumerate() {
            for &s in block.members() {
                self.block_of[s as usize] = b;
            }
            match block {
                Block::Finite { members, table } => {
                    for (i, &s) in members.iter().enumerate() {
                        for (j, &t) in members.iter().enumerate() {
                            let c = match table[i][j] {
                                None => {
                                    self.inverse[s as usize] = Some(t);
                                    Combine::Cancel
                                }
                                Some(u) => Combine::Merge(u),
                            };
                            self.combine[s as usize * n + t as usize] = c;
                        }
                    }
                }
                Block::Free { members } => {
                    if let [s, t] = members[..] {
                        self.inverse[s as usize] = Some(t);
                        self.inverse[t as usize] = Some(s);
                        self.combine[s as usize * n + t as usize] = Combine::Cancel;
                        self.combine[t as usize * n + s as usize] = Combine::Cancel;
                    }
                }
            }
        }
    }

    /// Restores derived tables after deserialization.
    pub fn revalidate(self) -> Result<AuxGroup> {
        AuxGroup::from_blocks(self.num_gens, self.blocks)
    }

    /// Infers tables for the given finite blocks with the independent
    /// equality test. Generators outside every block become free factors,
    /// paired with an inverse generator when one exists.
    pub fn infer(group: &Group, finite: &[Vec<Gen>]) -> Result<AuxGroup> {
        let n = group.num_gens();
        let mut covered = vec![false; n];
        let mut blocks = Vec::new();
        for members in finite {
            for &s in members {
                if s as usize >= n {
                    return Err(Error::GeneratorOutOfRange(s as usize));
                }
                covered[s as usize] = true;
            }
            let mut table = vec![vec![None; members.len()]; members.len()];
            for (i, &s) in members.iter().enumerate() {
                for (j, &t) in members.iter().enumerate() {
                    let st = Word(vec![s, t]);
                    if words_equal(group, &st, &Word::empty(), None) {
                        table[i][j] = None;
                    } else if let Some(&u) =
                        members.iter().find(|&&u| words_equal(group, &st, &Word(vec![u]), None))
                    {
                        table[i][j] = Some(u);
                    } else {
                        return Err(Error::Auxiliary(format!(
                            "block {{{}}} is not closed: {}{} is not in it",
                            members.iter().map(|&m| group.gen_name(m)).collect::<Vec<_>>().join(","),
                            group.gen_name(s),
                            group.gen_name(t)
                        )));
                    }
                }
            }
            blocks.push(Block::Finite { members: members.clone(), table });
        }
        for s in 0..n {
            if covered[s] {
                continue;
            }
            covered[s] = true;
            let s = s as Gen;
            let inv = (0..n as Gen)
                .filter(|&t| !covered[t as usize])
                .find(|&t| words_equal(group, &Word(vec![s, t]), &Word::empty(), None));
            match inv {
                Some(t) => {
                    covered[t as usize] = true;
                    blocks.push(Block::Free { members: vec![s, t] });
                }
                None => blocks.push(Block::Free { members: vec![s] }),
            }
        }
        AuxGroup::from_blocks(n, blocks)
    }

    /// Free group on the generators, pairing inverse generators. Involutions
    /// become order-two finite blocks so that `ss` still cancels.
    pub fn free(group: &Group) -> Result<AuxGroup> {
        let involutions: Vec<Vec<Gen>> = (0..group.num_gens() as Gen)
            .filter(|&s| words_equal(group, &Word(vec![s, s]), &Word::empty(), None))
            .map(|s| vec![s])
            .collect();
        AuxGroup::infer(group, &involutions)
    }

    /// Detects finite blocks: generators are grouped when a product of two of
    /// them is again a generator, and a group closes on each component.
    pub fn detect(group: &Group) -> Result<AuxGroup> {
        let n = group.num_gens();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for s in 0..n as Gen {
            for t in 0..n as Gen {
                let st = Word(vec![s, t]);
                if let Some(u) = (0..n as Gen).find(|&u| words_equal(group, &st, &Word(vec![u]), None)) {
                    let (a, b) = (find(&mut parent, s as usize), find(&mut parent, t as usize));
                    parent[a] = b;
                    let (a, b) = (find(&mut parent, u as usize), find(&mut parent, t as usize));
                    parent[a] = b;
                } else if words_equal(group, &st, &Word::empty(), None) && s != t {
                    let (a, b) = (find(&mut parent, s as usize), find(&mut parent, t as usize));
                    parent[a] = b;
                }
            }
        }
        let mut comps: Vec<Vec<Gen>> = Vec::new();
        let mut root_idx = std::collections::BTreeMap::new();
        for s in 0..n {
            let r = find(&mut parent, s);
            let idx = *root_idx.entry(r).or_insert_with(|| {
                comps.push(Vec::new());
                comps.len() - 1
            });
            comps[idx].push(s as Gen);
        }
        let finite: Vec<Vec<Gen>> =
            comps.into_iter().filter(|c| AuxGroup::infer(group, &[c.clone()]).is_ok()).collect();
        AuxGroup::infer(group, &finite)
    }

    /// Parses a block list such as `{a},{b,c,d}` and infers the tables.
    pub fn parse_blocks(group: &Group, text: &str) -> Result<AuxGroup> {
        let text = text.trim();
        if text == "free" {
            return AuxGroup::free(group);
        }
        if text == "auto" || text.is_empty() {
            return AuxGroup::detect(group);
        }
        let re = regex::Regex::new(r"\{([^}]*)\}").expect("static regex");
        let mut blocks = Vec::new();
        let mut consumed = 0;
        for cap in re.captures_iter(text) {
            let whole = cap.get(0).unwrap();
            let between = &text[consumed..whole.start()];
            if !between.chars().all(|c| c == ',' || c.is_whitespace()) {
                return Err(Error::InvalidArgument(format!("unexpected `{between}` in block list")));
            }
            consumed = whole.end();
            let mut block = Vec::new();
            for name in cap[1].split(',').map(str::trim).filter(|s| !s.is_empty()) {
                block.push(group.gen_index(name).ok_or_else(|| Error::UnknownGenerator(name.into()))?);
            }
            blocks.push(block);
        }
        if blocks.is_empty() || !text[consumed..].trim().is_empty() {
            return Err(Error::InvalidArgument(format!("cannot parse block list `{text}`")));
        }
        AuxGroup::infer(group, &blocks)
    }

    pub fn num_gens(&self) -> usize {
        self.num_gens
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block_of(&self, s: Gen) -> usize {
        self.block_of[s as usize]
    }

    pub fn mode(&self) -> AuxMode {
        let finite = self.blocks.iter().filter(|b| matches!(b, Block::Finite { .. })).count();
        if finite == self.blocks.len() {
            AuxMode::FreeProduct
        } else if finite == 0 {
            AuxMode::FreeGroup
        } else {
            AuxMode::Mixed
        }
    }

    pub fn inverse(&self, s: Gen) -> Option<Gen> {
        self.inverse[s as usize]
    }

    /// Formal inverse of a word, when every letter has an inverse.
    pub fn inverse_word(&self, w: &Word) -> Option<Word> {
        w.0.iter().rev().map(|&s| self.inverse(s)).collect::<Option<Vec<_>>>().map(Word)
    }

    #[inline]
    pub fn combine(&self, s: Gen, t: Gen) -> Combine {
        self.combine[s as usize * self.num_gens + t as usize]
    }

    /// Whether `ws` is freely reduced given that `w` (ending in `last`) is.
    #[inline]
    pub fn extends(&self, last: Option<Gen>, s: Gen) -> bool {
        last.is_none_or(|t| self.combine(t, s) == Combine::Keep)
    }

    /// Pushes a letter onto a reduced word, keeping it reduced.
    #[inline]
    pub fn push(&self, out: &mut Vec<Gen>, s: Gen) {
        let mut s = s;
        while let Some(&t) = out.last() {
            match self.combine(t, s) {
                Combine::Keep => break,
                Combine::Cancel => {
                    out.pop();
                    return;
                }
                Combine::Merge(u) => {
                    out.pop();
                    s = u;
                }
            }
        }
        out.push(s);
    }

    pub fn reduce_slice(&self, w: &[Gen]) -> Vec<Gen> {
        let mut out = Vec::with_capacity(w.len());
        for &s in w {
            self.push(&mut out, s);
        }
        out
    }

    pub fn reduce(&self, w: &Word) -> Word {
        Word(self.reduce_slice(&w.0))
    }

    pub fn is_reduced(&self, w: &[Gen]) -> bool {
        w.windows(2).all(|p| self.combine(p[0], p[1]) == Combine::Keep)
    }

    /// Pairs `(s, t, u)` with `st = u ≠ e` inside a finite block.
    pub fn triangles(&self) -> Vec<(Gen, Gen, Gen)> {
        let mut out = Vec::new();
        for block in &self.blocks {
            if let Block::Finite { members, table } = block {
                for (i, &s) in members.iter().enumerate() {
                    for (j, &t) in members.iter().enumerate() {
                        if let Some(u) = table[i][j] {
                            out.push((s, t, u));
                        }
                    }
                }
            }
        }
        out
    }

    /// Pairs `(s, s⁻¹)` with `s < s⁻¹`.
    pub fn inverse_pairs(&self) -> Vec<(Gen, Gen)> {
        (0..self.num_gens as Gen)
            .filter_map(|s| self.inverse(s).filter(|&t| s < t).map(|t| (s, t)))
            .collect()
    }

    pub fn describe(&self, group: &Group) -> String {
        self.blocks
            .iter()
            .map(|b| {
                let names: Vec<&str> = b.members().iter().map(|&s| group.gen_name(s)).collect();
                match b {
                    Block::Finite { .. } => format!("{{{}}}", names.join(",")),
                    Block::Free { .. } => format!("free({})", names.join(",")),
                }
            })
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Checks every table entry against the machine with the independent
    /// equality test (never with this cover itself).
    pub fn verify_factors(&self, group: &Group) -> FactorReport {
        let mut report = FactorReport::default();
        if group.num_gens() != self.num_gens {
            report.problems.push("generator count differs from the machine".into());
            return report;
        }
        for block in &self.blocks {
            match block {
                Block::Finite { members, table } => {
                    if let Err(e) = check_group_table(members, table) {
                        report.problems.push(e.to_string());
                    }
                    for (i, &s) in members.iter().enumerate() {
                        for (j, &t) in members.iter().enumerate() {
                            let rhs = table[i][j].map(|u| Word(vec![u])).unwrap_or_default();
                            if !words_equal(group, &Word(vec![s, t]), &rhs, None) {
                                report.failures.push((
                                    group.gen_name(s).into(),
                                    group.gen_name(t).into(),
                                    table[i][j].map_or("e".into(), |u| group.gen_name(u).into()),
                                ));
                            }
                        }
                    }
                }
                Block::Free { members } => {
                    if let [s, t] = members[..] {
                        if !words_equal(group, &Word(vec![s, t]), &Word::empty(), None) {
                            report.failures.push((group.gen_name(s).into(), group.gen_name(t).into(), "e".into()));
                        }
                    }
                }
            }
        }
        report.ok = report.failures.is_empty() && report.problems.is_empty();
        report
    }
}

/// Group axioms for a table on `members ∪ {e}`.
fn check_group_table(members: &[Gen], table: &[Vec<Option<Gen>>]) -> Result<()> {
    let k = members.len();
    if table.len() != k || table.iter().any(|r| r.len() != k) {
        return Err(Error::Auxiliary("table shape does not match the block".into()));
    }
    let idx = |g: Option<Gen>| -> Result<usize> {
        match g {
            None => Ok(0),
            Some(u) => members
                .iter()
                .position(|&m| m == u)
                .map(|p| p + 1)
                .ok_or_else(|| Error::Auxiliary("table entry outside its block".into())),
        }
    };
    // Elements 0 = e, i+1 = members[i].
    let mut mul = vec![vec![0usize; k + 1]; k + 1];
    for a in 0..=k {
        mul[0][a] = a;
        mul[a][0] = a;
    }
    for i in 0..k {
        for j in 0..k {
            mul[i + 1][j + 1] = idx(table[i][j])?;
        }
    }
    for a in 0..=k {
        if !(0..=k).any(|b| mul[a][b] == 0) {
            return Err(Error::Auxiliary("table element without inverse".into()));
        }
        let mut row: Vec<usize> = mul[a].clone();
        row.sort_unstable();
        if row != (0..=k).collect::<Vec<_>>() {
            return Err(Error::Auxiliary("table is not a Latin square".into()));
        }
        for b in 0..=k {
            for c in 0..=k {
                if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                    return Err(Error::Auxiliary("table is not associative".into()));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::zoo;

    fn setup() -> (std::sync::Arc<Group>, AuxGroup) {
        let g = Group::new(zoo::grigorchuk()).unwrap();
        let aux = AuxGroup::parse_blocks(&g, "{a},{b,c,d}").unwrap();
        (g, aux)
    }

    #[test]
    fn reduce_examples() {
        let (g, aux) = setup();
        let w = |s: &str| g.parse_word(s).unwrap();
        assert_eq!(aux.reduce(&w("bc")), w("d"));
        assert_eq!(aux.reduce(&w("aa")), Word::empty());
        assert_eq!(aux.reduce(&w("abab")), w("abab"));
        assert_eq!(aux.reduce(&w("abcda")), Word::empty());
        assert_eq!(aux.mode(), AuxMode::FreeProduct);
    }

    #[test]
    fn verify_grigorchuk_blocks() {
        let (g, aux) = setup();
        assert!(aux.verify_factors(&g).ok);
        assert_eq!(AuxGroup::detect(&g).unwrap().describe(&g), "{a},{b,c,d}");
    }

    #[test]
    fn wrong_entry_is_pinpointed() {
        let (g, aux) = setup();
        let mut blocks = aux.blocks().to_vec();
        let b = g.gen_index("b").unwrap();
        let c = g.gen_index("c").unwrap();
        let d = g.gen_index("d").unwrap();
        // Swapping two rows keeps a Latin square but breaks bc = d.
        if let Block::Finite { members, table } = &mut blocks[1] {
            assert_eq!(members, &vec![b, c, d]);
            table[0][1] = Some(b);
            table[0][0] = Some(c);
        }
        // The altered table is no longer a group; verification reports both.
        let bad = AuxGroup { blocks, ..aux.clone() };
        let report = bad.verify_factors(&g);
        assert!(!report.ok);
        assert!(report.failures.contains(&("b".into(), "c".into(), "b".into())));
    }

    #[test]
    fn open_block_is_rejected() {
        let g = Group::new(zoo::adding_machine()).unwrap();
        assert!(AuxGroup::parse_blocks(&g, "{a}").is_err());
        let free = AuxGroup::free(&g).unwrap();
        assert_eq!(free.mode(), AuxMode::FreeGroup);
        let w = g.parse_word("a a^-1 a").unwrap();
        assert_eq!(free.reduce(&w).len(), 1);
    }
}
