//! Hash-consed portraits: a canonical id for every group element reached.
//!
//! Node keys are `(root permutation, child ids)`. The table starts from the
//! minimized machine (one node per equivalence class of states, plus the
//! identity) and only ever adds nodes whose children are already canonical,
//! so by induction two words get equal ids iff they are equal in the group.

use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use dashmap::DashMap;
use rustc_hash::FxBuildHasher;
use serde::{Deserialize, Serialize};

use crate::aux::AuxGroup;
use crate::group::{Gen, Group};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub u32);

impl ElementId {
    pub const IDENTITY: ElementId = ElementId(0);

    pub fn is_identity(self) -> bool {
        self == Self::IDENTITY
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortraitCaps {
    pub max_nodes: usize,
    pub max_depth: usize,
    /// The memo of reduced words is flushed when it grows past this size.
    pub max_cached_words: usize,
}

impl Default for PortraitCaps {
    fn default() -> Self {
        PortraitCaps { max_nodes: 1_000_000, max_depth: 64, max_cached_words: 2_000_000 }
    }
}

pub struct ElementTable {
    group: Arc<Group>,
    aux: AuxGroup,
    caps: PortraitCaps,
    nodes: DashMap<Box<[u32]>, u32, FxBuildHasher>,
    next: AtomicU32,
    atoms: Vec<u32>,
    words: DashMap<Box<[Gen]>, u32, FxBuildHasher>,
}

impl std::fmt::Debug for ElementTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ElementTable").field("nodes", &self.len()).field("caps", &self.caps).finish()
    }
}

/// Moore partition refinement over the machine states plus a virtual
/// identity state (the last index). Returns the class of every state.
fn minimize(group: &Group) -> (Vec<usize>, usize) {
    let m = group.machine();
    let n = m.num_states();
    let d = m.degree();
    let perm_of = |q: usize| -> Vec<usize> {
        if q == n {
            (0..d).collect()
        } else {
            (0..d).map(|x| m.rho(q, x)).collect()
        }
    };
    let succ = |q: usize, x: usize| -> usize {
        if q == n || Some(q) == m.identity_state() {
            n
        } else {
            m.delta(q, x)
        }
    };
    let mut class = vec![0usize; n + 1];
    let mut sigs: Vec<Vec<usize>> = (0..=n).map(perm_of).collect();
    let mut count = 0;
    loop {
        let mut map = std::collections::HashMap::new();
        // identity first so that it receives class 0
        let order: Vec<usize> = std::iter::once(n).chain(0..n).collect();
        let mut next = vec![0usize; n + 1];
        for &q in &order {
            let len = map.len();
            next[q] = *map.entry(sigs[q].clone()).or_insert(len);
        }
        let new_count = map.len();
        class = next;
        if new_count == count {
            return (class, new_count);
        }
        count = new_count;
        sigs = (0..=n)
            .map(|q| {
                let mut s = vec![class[q]];
                s.extend((0..d).map(|x| class[succ(q, x)]));
                s
            })
            .collect();
    }
}

impl ElementTable {
    pub fn new(group: Arc<Group>, aux: AuxGroup, caps: PortraitCaps) -> Self {
        let (class, classes) = minimize(&group);
        let d = group.degree();
        let n = group.machine().num_states();
        let nodes = DashMap::with_hasher(FxBuildHasher);
        let mut rep = vec![usize::MAX; classes];
        for q in (0..=n).rev() {
            rep[class[q]] = q;
        }
        for (c, &q) in rep.iter().enumerate() {
            let mut key: Vec<u32> = Vec::with_capacity(2 * d);
            if q == n || Some(q) == group.machine().identity_state() {
                key.extend((0..d as u32).chain(std::iter::repeat_n(0, d)));
            } else {
                let m = group.machine();
                key.extend((0..d).map(|x| m.rho(q, x) as u32));
                key.extend((0..d).map(|x| class[m.delta(q, x)] as u32));
            }
            nodes.insert(key.into_boxed_slice(), c as u32);
        }
        let atoms = (0..group.num_gens()).map(|s| class[group.gen_state(s as Gen)] as u32).collect();
        ElementTable {
            group,
            aux,
            caps,
            nodes,
            next: AtomicU32::new(classes as u32),
            atoms,
            words: DashMap::with_hasher(FxBuildHasher),
        }
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn aux(&self) -> &AuxGroup {
        &self.aux
    }

    pub fn caps(&self) -> PortraitCaps {
        self.caps
    }

    pub fn len(&self) -> usize {
        self.next.load(Ordering::Relaxed) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn atom(&self, s: Gen) -> ElementId {
        ElementId(self.atoms[s as usize])
    }

    /// Interns a node; `None` once the table is full.
    pub fn intern(&self, perm: &[u8], children: &[ElementId]) -> Option<ElementId> {
        let key: Box<[u32]> =
            perm.iter().map(|&y| y as u32).chain(children.iter().map(|c| c.0)).collect();
        if let Some(v) = self.nodes.get(&key) {
            return Some(ElementId(*v));
        }
        if self.len() >= self.caps.max_nodes {
            return None;
        }
        let id = *self.nodes.entry(key).or_insert_with(|| self.next.fetch_add(1, Ordering::Relaxed));
        Some(ElementId(id))
    }

    /// Canonical id of a word (reduced in the cover first), or `None` when a
    /// cap is hit or the section closure cycles through a long word.
    pub fn id_of(&self, w: &[Gen]) -> Option<ElementId> {
        let reduced = self.aux.reduce_slice(w);
        let mut stack = Vec::new();
        self.compute(&reduced, &mut stack)
    }

    /// Same as [`Self::id_of`] for a word known to be reduced.
    pub fn id_of_reduced(&self, w: &[Gen]) -> Option<ElementId> {
        let mut stack = Vec::new();
        self.compute(w, &mut stack)
    }

    fn compute(&self, w: &[Gen], stack: &mut Vec<Vec<Gen>>) -> Option<ElementId> {
        match w.len() {
            0 => return Some(ElementId::IDENTITY),
            1 => return Some(self.atom(w[0])),
            _ => {}
        }
        if let Some(v) = self.words.get(w) {
            return Some(ElementId(*v));
        }
        if stack.len() >= self.caps.max_depth || stack.iter().any(|s| s.as_slice() == w) {
            return None;
        }
        let g = &self.group;
        let d = g.degree();
        stack.push(w.to_vec());
        let mut children = Vec::with_capacity(d);
        let mut sec = Vec::with_capacity(w.len());
        let mut ok = true;
        for x in 0..d {
            sec.clear();
            g.section_into(w, x, &mut sec);
            let red = self.aux.reduce_slice(&sec);
            match self.compute(&red, stack) {
                Some(c) => children.push(c),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        stack.pop();
        if !ok {
            return None;
        }
        let perm = g.perm_images(w);
        let id = self.intern(&perm, &children)?;
        if self.words.len() >= self.caps.max_cached_words {
            self.words.clear();
        }
        self.words.insert(w.into(), id.0);
        Some(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::zoo;

    #[test]
    fn canonical_ids() {
        let g = Group::new(zoo::grigorchuk()).unwrap();
        let aux = AuxGroup::parse_blocks(&g, "{a},{b,c,d}").unwrap();
        let t = ElementTable::new(g.clone(), aux, PortraitCaps::default());
        let id = |s: &str| t.id_of(&g.parse_word(s).unwrap().0).unwrap();
        assert_eq!(id("bc"), id("d"));
        assert_eq!(id("aa"), ElementId::IDENTITY);
        assert_ne!(id("ab"), id("ba"));
        assert_eq!(id(&"ab".repeat(16)), ElementId::IDENTITY);
        assert_ne!(id(&"ab".repeat(8)), ElementId::IDENTITY);
    }
}
