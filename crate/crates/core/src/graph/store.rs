use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use indexmap::IndexSet;
use thiserror::Error;

use super::prefix::PrefixMap;
use super::term::{Term, TermError, Triple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("store is frozen; mutation rejected")]
    Frozen,
    #[error(transparent)]
    Term(#[from] TermError),
}

/// Dense identifier of an interned term.
pub type TermId = u32;

/// Index orderings maintained by [`TripleStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexOrder {
    Spo,
    Pos,
    Osp,
}

/// In-memory triple store with interned terms and three sorted indexes.
///
/// Mutation is single-writer. After [`freeze`](Self::freeze) every mutating
/// call fails, and a shared reference may be read from any number of threads.
#[derive(Debug, Clone, Default)]
pub struct TripleStore {
    terms: IndexSet<Term>,
    spo: BTreeSet<[TermId; 3]>,
    pos: BTreeSet<[TermId; 3]>,
    osp: BTreeSet<[TermId; 3]>,
    prefixes: PrefixMap,
    frozen: bool,
}

impl TripleStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_prefixes(prefixes: PrefixMap) -> Self {
        TripleStore {
            prefixes,
            ..Self::default()
        }
    }

    pub fn prefixes(&self) -> &PrefixMap {
        &self.prefixes
    }

    pub fn prefixes_mut(&mut self) -> &mut PrefixMap {
        &mut self.prefixes
    }

    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Inserts `t`; returns `true` when it was not already present.
    pub fn add_triple(&mut self, t: Triple) -> Result<bool, StoreError> {
        if self.frozen {
            return Err(StoreError::Frozen);
        }
        let (s, p, o) = t.into_parts();
        let s = self.intern(s);
        let p = self.intern(p);
        let o = self.intern(o);
        if !self.spo.insert([s, p, o]) {
            return Ok(false);
        }
        self.pos.insert([p, o, s]);
        self.osp.insert([o, s, p]);
        Ok(true)
    }

    /// Validates and inserts a triple built from its parts.
    pub fn add(&mut self, s: Term, p: Term, o: Term) -> Result<bool, StoreError> {
        self.add_triple(Triple::new(s, p, o)?)
    }

    /// Inserts every triple of `other`, returning the number newly added.
    pub fn extend_from(&mut self, other: &TripleStore) -> Result<usize, StoreError> {
        let mut added = 0;
        for t in other.iter() {
            added += usize::from(self.add_triple(t)?);
        }
        self.prefixes.merge(&other.prefixes);
        Ok(added)
    }

    pub fn contains(&self, t: &Triple) -> bool {
        match (
            self.id_of(t.subject()),
            self.id_of(t.predicate()),
            self.id_of(t.object()),
        ) {
            (Some(s), Some(p), Some(o)) => self.spo.contains(&[s, p, o]),
            _ => false,
        }
    }

    fn intern(&mut self, term: Term) -> TermId {
        let (idx, _) = self.terms.insert_full(term);
        TermId::try_from(idx).expect("term dictionary exceeds u32 range")
    }

    pub fn id_of(&self, term: &Term) -> Option<TermId> {
        self.terms.get_index_of(term).map(|i| i as TermId)
    }

    pub fn term(&self, id: TermId) -> &Term {
        self.terms
            .get_index(id as usize)
            .expect("term id issued by this store")
    }

    /// Number of interned terms (subjects, predicates and objects).
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    fn triple_of(&self, [s, p, o]: [TermId; 3]) -> Triple {
        Triple::new(self.term(s).clone(), self.term(p).clone(), self.term(o).clone())
            .expect("stored triples are valid")
    }

    /// All triples in `(subject, predicate, object)` term order.
    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        let mut all: Vec<Triple> = self.spo.iter().map(|&k| self.triple_of(k)).collect();
        all.sort_unstable();
        all.into_iter()
    }

    /// Triples agreeing with every bound position, in term order.
    pub fn match_pattern(&self, s: Option<&Term>, p: Option<&Term>, o: Option<&Term>) -> Vec<Triple> {
        let Some((s, p, o)) = self.resolve_ids(s, p, o) else {
            return Vec::new();
        };
        let mut out: Vec<Triple> = self.match_ids(s, p, o).map(|k| self.triple_of(k)).collect();
        out.sort_unstable();
        out
    }

    /// Same as [`match_pattern`](Self::match_pattern) but scanning a fixed
    /// index, filtering positions the index cannot seek on.
    pub fn match_with_index(
        &self,
        order: IndexOrder,
        s: Option<&Term>,
        p: Option<&Term>,
        o: Option<&Term>,
    ) -> Vec<Triple> {
        let Some((s, p, o)) = self.resolve_ids(s, p, o) else {
            return Vec::new();
        };
        let agrees = |[ts, tp, to]: [TermId; 3]| {
            s.map_or(true, |x| x == ts) && p.map_or(true, |x| x == tp) && o.map_or(true, |x| x == to)
        };
        let keys: Vec<[TermId; 3]> = match order {
            IndexOrder::Spo => scan(&self.spo, s, p).map(|k| *k).collect(),
            IndexOrder::Pos => scan(&self.pos, p, o).map(|&[p, o, s]| [s, p, o]).collect(),
            IndexOrder::Osp => scan(&self.osp, o, s).map(|&[o, s, p]| [s, p, o]).collect(),
        };
        let mut out: Vec<Triple> = keys
            .into_iter()
            .filter(|&k| agrees(k))
            .map(|k| self.triple_of(k))
            .collect();
        out.sort_unstable();
        out
    }

    fn resolve_ids(
        &self,
        s: Option<&Term>,
        p: Option<&Term>,
        o: Option<&Term>,
    ) -> Option<(Option<TermId>, Option<TermId>, Option<TermId>)> {
        let lookup = |t: Option<&Term>| match t {
            None => Some(None),
            Some(t) => self.id_of(t).map(Some),
        };
        Some((lookup(s)?, lookup(p)?, lookup(o)?))
    }

    /// Id-level pattern match in index order; the cheapest index for the
    /// bound positions is chosen.
    pub fn match_ids(
        &self,
        s: Option<TermId>,
        p: Option<TermId>,
        o: Option<TermId>,
    ) -> Box<dyn Iterator<Item = [TermId; 3]> + '_> {
        match (s, p, o) {
            (Some(s), Some(p), Some(o)) => {
                let hit = self.spo.contains(&[s, p, o]).then_some([s, p, o]);
                Box::new(hit.into_iter())
            }
            (Some(_), _, None) => Box::new(scan(&self.spo, s, p).copied()),
            (Some(s), None, Some(o)) => {
                Box::new(scan(&self.osp, Some(o), Some(s)).map(|&[o, s, p]| [s, p, o]))
            }
            (None, Some(_), _) => Box::new(scan(&self.pos, p, o).map(|&[p, o, s]| [s, p, o])),
            (None, None, Some(_)) => Box::new(scan(&self.osp, o, None).map(|&[o, s, p]| [s, p, o])),
            (None, None, None) => Box::new(self.spo.iter().copied()),
        }
    }

    /// Number of triples the index would yield for the bound positions.
    pub fn count_ids(&self, s: Option<TermId>, p: Option<TermId>, o: Option<TermId>) -> usize {
        self.match_ids(s, p, o).count()
    }

    /// Objects of `(s, p, ?)`, in id order.
    pub fn objects(&self, s: TermId, p: TermId) -> impl Iterator<Item = TermId> + '_ {
        scan(&self.spo, Some(s), Some(p)).map(|k| k[2])
    }

    /// Subjects of `(?, p, o)`, in id order.
    pub fn subjects(&self, p: TermId, o: TermId) -> impl Iterator<Item = TermId> + '_ {
        scan(&self.pos, Some(p), Some(o)).map(|k| k[2])
    }

    /// Ids of every term used in subject or object position.
    pub fn node_ids(&self) -> BTreeSet<TermId> {
        let mut nodes = BTreeSet::new();
        for &[s, _, o] in &self.spo {
            nodes.insert(s);
            nodes.insert(o);
        }
        nodes
    }
}

fn scan<'a>(
    index: &'a BTreeSet<[TermId; 3]>,
    first: Option<TermId>,
    second: Option<TermId>,
) -> std::collections::btree_set::Range<'a, [TermId; 3]> {
    index.range(prefix_range(first, second))
}

fn prefix_range(first: Option<TermId>, second: Option<TermId>) -> RangeInclusive<[TermId; 3]> {
    const MAX: TermId = TermId::MAX;
    match (first, second) {
        (Some(a), Some(b)) => [a, b, 0]..=[a, b, MAX],
        (Some(a), None) => [a, 0, 0]..=[a, MAX, MAX],
        (None, _) => [0, 0, 0]..=[MAX, MAX, MAX],
    }
}
