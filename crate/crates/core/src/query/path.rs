use std::collections::BTreeSet;
use std::fmt;

use crate::graph::{PrefixMap, Term, TermId, TripleStore};

/// Property path AST.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PathExpr {
    Atom(Term),
    Inverse(Box<PathExpr>),
    Sequence(Box<PathExpr>, Box<PathExpr>),
    Alternative(Box<PathExpr>, Box<PathExpr>),
    Repeat {
        path: Box<PathExpr>,
        min: u32,
        max: Option<u32>,
    },
}

impl PathExpr {
    pub fn atom(iri: Term) -> Self {
        PathExpr::Atom(iri)
    }

    pub fn inverse(p: PathExpr) -> Self {
        PathExpr::Inverse(Box::new(p))
    }

    pub fn sequence(a: PathExpr, b: PathExpr) -> Self {
        PathExpr::Sequence(Box::new(a), Box::new(b))
    }

    pub fn alternative(a: PathExpr, b: PathExpr) -> Self {
        PathExpr::Alternative(Box::new(a), Box::new(b))
    }

    /// Panics if `max < min`.
    pub fn repeat(p: PathExpr, min: u32, max: Option<u32>) -> Self {
        assert!(max.map_or(true, |m| m >= min), "repeat bounds {min}..{max:?}");
        PathExpr::Repeat {
            path: Box::new(p),
            min,
            max,
        }
    }

    pub fn as_atom(&self) -> Option<&Term> {
        match self {
            PathExpr::Atom(t) => Some(t),
            _ => None,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            PathExpr::Atom(_) => 1,
            PathExpr::Inverse(p) | PathExpr::Repeat { path: p, .. } => 1 + p.depth(),
            PathExpr::Sequence(a, b) | PathExpr::Alternative(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Renders with full parentheses, compacting IRIs through `prefixes`.
    pub fn display(&self, prefixes: &PrefixMap) -> String {
        match self {
            PathExpr::Atom(t) => prefixes.display(t),
            PathExpr::Inverse(p) => format!("^({})", p.display(prefixes)),
            PathExpr::Sequence(a, b) => format!("({})/({})", a.display(prefixes), b.display(prefixes)),
            PathExpr::Alternative(a, b) => format!("({})|({})", a.display(prefixes), b.display(prefixes)),
            PathExpr::Repeat { path, min, max } => match max {
                Some(max) => format!("({}){{{min},{max}}}", path.display(prefixes)),
                None => format!("({}){{{min},}}", path.display(prefixes)),
            },
        }
    }
}

impl fmt::Display for PathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display(&PrefixMap::new()))
    }
}

/// Nodes reachable from `from` along `path` (or against it when `forward`
/// is false).
pub(crate) fn step(store: &TripleStore, path: &PathExpr, from: &BTreeSet<TermId>, forward: bool) -> BTreeSet<TermId> {
    if from.is_empty() {
        return BTreeSet::new();
    }
    match path {
        PathExpr::Atom(p) => {
            let Some(pid) = store.id_of(p) else {
                return BTreeSet::new();
            };
            let mut out = BTreeSet::new();
            for &n in from {
                if forward {
                    out.extend(store.objects(n, pid));
                } else {
                    out.extend(store.subjects(pid, n));
                }
            }
            out
        }
        PathExpr::Inverse(p) => step(store, p, from, !forward),
        PathExpr::Sequence(a, b) => {
            let (first, second) = if forward { (a, b) } else { (b, a) };
            let mid = step(store, first, from, forward);
            step(store, second, &mid, forward)
        }
        PathExpr::Alternative(a, b) => {
            let mut out = step(store, a, from, forward);
            out.extend(step(store, b, from, forward));
            out
        }
        PathExpr::Repeat { path, min, max } => {
            let mut current = from.clone();
            for _ in 0..*min {
                current = step(store, path, &current, forward);
                if current.is_empty() {
                    return current;
                }
            }
            let mut reached = current.clone();
            let mut frontier = current;
            let mut k = *min;
            while max.map_or(true, |m| k < m) && !frontier.is_empty() {
                frontier = step(store, path, &frontier, forward)
                    .into_iter()
                    .filter(|n| !reached.contains(n))
                    .collect();
                reached.extend(frontier.iter().copied());
                k += 1;
            }
            reached
        }
    }
}

/// Whether the path can match the empty walk, relating a node to itself.
pub(crate) fn matches_empty(path: &PathExpr) -> bool {
    match path {
        PathExpr::Atom(_) => false,
        PathExpr::Inverse(p) => matches_empty(p),
        PathExpr::Sequence(a, b) => matches_empty(a) && matches_empty(b),
        PathExpr::Alternative(a, b) => matches_empty(a) || matches_empty(b),
        PathExpr::Repeat { path, min, .. } => *min == 0 || matches_empty(path),
    }
}

/// All `(start, end)` pairs connected by `path`. Without a start, every
/// subject or object of the store is tried. A start absent from the store
/// is still related to itself by paths that admit the empty walk.
pub fn eval_path(store: &TripleStore, start: Option<&Term>, path: &PathExpr) -> BTreeSet<(Term, Term)> {
    let mut out = BTreeSet::new();
    match start {
        Some(s) => match store.id_of(s) {
            Some(id) => {
                for end in step(store, path, &BTreeSet::from([id]), true) {
                    out.insert((s.clone(), store.term(end).clone()));
                }
            }
            None => {
                if matches_empty(path) {
                    out.insert((s.clone(), s.clone()));
                }
            }
        },
        None => {
            for id in store.node_ids() {
                let s = store.term(id);
                for end in step(store, path, &BTreeSet::from([id]), true) {
                    out.insert((s.clone(), store.term(end).clone()));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab;

    fn chain() -> TripleStore {
        let mut s = TripleStore::new();
        s.add(vocab::ncbi("taxon/687295"), vocab::rdfs_subclass_of(), vocab::ncbi("taxon/513583")).unwrap();
        s.add(vocab::ncbi("taxon/513583"), vocab::rdfs_subclass_of(), vocab::ncbi("taxon/104431")).unwrap();
        s
    }

    fn ends(store: &TripleStore, start: &Term, path: &PathExpr) -> Vec<Term> {
        eval_path(store, Some(start), path).into_iter().map(|(_, e)| e).collect()
    }

    #[test]
    fn bounded_repeat_reaches_both_ancestors() {
        let s = chain();
        let p = PathExpr::repeat(PathExpr::atom(vocab::rdfs_subclass_of()), 1, Some(2));
        let got = ends(&s, &vocab::ncbi("taxon/687295"), &p);
        assert_eq!(got, vec![vocab::ncbi("taxon/104431"), vocab::ncbi("taxon/513583")]);
        let one = PathExpr::repeat(PathExpr::atom(vocab::rdfs_subclass_of()), 1, Some(1));
        assert_eq!(
            eval_path(&s, None, &one),
            eval_path(&s, None, &PathExpr::atom(vocab::rdfs_subclass_of()))
        );
    }

    #[test]
    fn zero_length_and_cycles() {
        let mut s = TripleStore::new();
        let p = vocab::et("p");
        s.add(vocab::et("a"), p.clone(), vocab::et("b")).unwrap();
        s.add(vocab::et("b"), p.clone(), vocab::et("a")).unwrap();
        let star = PathExpr::repeat(PathExpr::atom(p.clone()), 0, None);
        assert_eq!(ends(&s, &vocab::et("a"), &star), vec![vocab::et("a"), vocab::et("b")]);
        assert_eq!(ends(&s, &vocab::et("zzz"), &star), vec![vocab::et("zzz")]);
        assert!(ends(&s, &vocab::et("zzz"), &PathExpr::atom(p)).is_empty());
    }

    #[test]
    fn inverse_sequence() {
        let s = chain();
        let sub = PathExpr::atom(vocab::rdfs_subclass_of());
        let up_down = PathExpr::sequence(sub.clone(), PathExpr::inverse(sub));
        let got = ends(&s, &vocab::ncbi("taxon/687295"), &up_down);
        assert_eq!(got, vec![vocab::ncbi("taxon/687295")]);
    }

    #[test]
    fn empty_walk_detection() {
        let a = PathExpr::atom(vocab::rdf_type());
        assert!(!matches_empty(&a));
        assert!(matches_empty(&PathExpr::repeat(a.clone(), 0, Some(3))));
        assert!(matches_empty(&PathExpr::alternative(a.clone(), PathExpr::repeat(a.clone(), 0, None))));
        assert!(!matches_empty(&PathExpr::sequence(a.clone(), PathExpr::repeat(a, 0, None))));
    }
}
