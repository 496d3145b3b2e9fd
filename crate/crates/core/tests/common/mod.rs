#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use ecokg::graph::{Literal, Term, TripleStore};
use ecokg::query::PathExpr;

pub const ET: &str = "https://cfpub.epa.gov/ecotox/";
pub const NCBI: &str = "https://www.ncbi.nlm.nih.gov/taxonomy/";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const OWL: &str = "http://www.w3.org/2002/07/owl#";
pub const EX: &str = "http://example.org/";

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn iri(s: &str) -> Term {
    Term::iri(s).unwrap()
}

pub fn ex(local: &str) -> Term {
    iri(&format!("{EX}{local}"))
}

/// Plain DP table, filled cell by cell.
pub fn edit_distance_oracle(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

/// Weighted digit sum check, written independently of the library.
pub fn cas_oracle(cas: &str) -> bool {
    let parts: Vec<&str> = cas.split('-').collect();
    if parts.len() != 3 || parts[1].len() != 2 || parts[2].len() != 1 {
        return false;
    }
    if !(2..=7).contains(&parts[0].len()) || !cas.chars().all(|c| c == '-' || c.is_ascii_digit()) {
        return false;
    }
    let body: Vec<u32> = format!("{}{}", parts[0], parts[1])
        .chars()
        .map(|c| c.to_digit(10).unwrap())
        .collect();
    let sum: u32 = body.iter().rev().enumerate().map(|(i, d)| (i as u32 + 1) * d).sum();
    sum % 10 == parts[2].parse::<u32>().unwrap()
}

/// A random store over a small vocabulary, plus the raw triple list used to
/// build it (duplicates included).
pub struct RandomGraph {
    pub store: TripleStore,
    pub raw: Vec<(String, String, String, bool)>,
}

pub fn random_graph(rng: &mut StdRng, max_triples: usize) -> RandomGraph {
    let n_entities = rng.gen_range(2..60);
    let n_preds = rng.gen_range(1..8);
    let count = rng.gen_range(1..=max_triples);
    let mut store = TripleStore::new();
    let mut raw = Vec::with_capacity(count);
    for _ in 0..count {
        let s = format!("e{}", rng.gen_range(0..n_entities));
        let p = format!("p{}", rng.gen_range(0..n_preds));
        let literal = rng.gen_bool(0.2);
        let o = if literal {
            format!("v{}", rng.gen_range(0..10))
        } else {
            format!("e{}", rng.gen_range(0..n_entities))
        };
        let obj = if literal { Term::literal(o.clone()) } else { ex(&o) };
        store.add(ex(&s), ex(&p), obj).unwrap();
        raw.push((s, p, o, literal));
    }
    RandomGraph { store, raw }
}

/// (triples, relations, entities) recounted from the raw list.
pub fn brute_counts(raw: &[(String, String, String, bool)]) -> (u64, u64, u64) {
    let triples: HashSet<(&str, &str, &str)> = raw
        .iter()
        .filter(|t| !t.3)
        .map(|(s, p, o, _)| (s.as_str(), p.as_str(), o.as_str()))
        .collect();
    let relations: HashSet<&str> = triples.iter().map(|t| t.1).collect();
    let entities: HashSet<&str> = triples.iter().flat_map(|t| [t.0, t.2]).collect();
    (triples.len() as u64, relations.len() as u64, entities.len() as u64)
}

/// A random store with arbitrary term shapes, for serialization round trips.
pub fn random_rich_store(rng: &mut StdRng, max_triples: usize) -> TripleStore {
    const PIECES: &[&str] = &[
        "a", "Z", "0", " ", "\"", "\\", "\n", "\r", "\t", "é", "漢", "🦀", "#", ">", "<", "'", ".",
    ];
    let lexical = |rng: &mut StdRng| -> String {
        (0..rng.gen_range(0..8)).map(|_| *PIECES.choose(rng).unwrap()).collect()
    };
    let mut store = TripleStore::new();
    for _ in 0..rng.gen_range(0..=max_triples) {
        let s = if rng.gen_bool(0.2) {
            Term::blank(format!("b{}", rng.gen_range(0..5))).unwrap()
        } else {
            ex(&format!("s{}", rng.gen_range(0..20)))
        };
        let p = ex(&format!("p/{}", rng.gen_range(0..4)));
        let o = match rng.gen_range(0..6) {
            0 => ex(&format!("o{}", rng.gen_range(0..20))),
            1 => Term::blank(format!("b{}", rng.gen_range(0..5))).unwrap(),
            2 => Term::Literal(Literal::lang(lexical(rng), ["en", "no", "en-GB"].choose(rng).unwrap().to_string()).unwrap()),
            3 => Term::Literal(
                Literal::typed(
                    format!("{}", rng.gen_range(-1000..1000)),
                    "http://www.w3.org/2001/XMLSchema#integer",
                )
                .unwrap(),
            ),
            _ => Term::literal(lexical(rng)),
        };
        store.add(s, p, o).unwrap();
    }
    store
}

// Relation-algebra oracle for property paths over node indices.

pub type Relation = BTreeSet<(usize, usize)>;

pub struct PathGraph {
    pub store: TripleStore,
    pub nodes: Vec<Term>,
    pub edges: BTreeMap<usize, Relation>,
    pub node_set: BTreeSet<usize>,
}

pub fn pred(i: usize) -> Term {
    ex(&format!("rel{i}"))
}

pub fn random_path_graph(rng: &mut StdRng, preds: usize) -> PathGraph {
    let n = rng.gen_range(1..=30);
    let nodes: Vec<Term> = (0..n).map(|i| ex(&format!("n{i}"))).collect();
    let mut store = TripleStore::new();
    let mut edges: BTreeMap<usize, Relation> = (0..preds).map(|p| (p, Relation::new())).collect();
    let mut node_set = BTreeSet::new();
    for _ in 0..rng.gen_range(0..=2 * n) {
        let (a, b, p) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..preds));
        store.add(nodes[a].clone(), pred(p), nodes[b].clone()).unwrap();
        edges.get_mut(&p).unwrap().insert((a, b));
        node_set.insert(a);
        node_set.insert(b);
    }
    PathGraph { store, nodes, edges, node_set }
}

pub fn random_path(rng: &mut StdRng, preds: usize, depth: usize) -> PathExpr {
    if depth <= 1 {
        return PathExpr::atom(pred(rng.gen_range(0..preds)));
    }
    let d = depth - 1;
    match rng.gen_range(0..5) {
        0 => PathExpr::atom(pred(rng.gen_range(0..preds))),
        1 => PathExpr::inverse(random_path(rng, preds, d)),
        2 => PathExpr::sequence(random_path(rng, preds, d), random_path(rng, preds, d)),
        3 => PathExpr::alternative(random_path(rng, preds, d), random_path(rng, preds, d)),
        _ => {
            let min = rng.gen_range(0..=3);
            let max = if rng.gen_bool(0.25) { None } else { Some(rng.gen_range(min..=5)) };
            PathExpr::repeat(random_path(rng, preds, d), min, max)
        }
    }
}

fn compose(a: &Relation, b: &Relation) -> Relation {
    let mut out = Relation::new();
    for &(x, y) in a {
        for &(y2, z) in b.range((y, 0)..=(y, usize::MAX)) {
            debug_assert_eq!(y, y2);
            out.insert((x, z));
        }
    }
    out
}

pub fn relation_of(g: &PathGraph, path: &PathExpr) -> Relation {
    match path {
        PathExpr::Atom(t) => {
            let i: usize = t.as_iri().unwrap().rsplit("rel").next().unwrap().parse().unwrap();
            g.edges[&i].clone()
        }
        PathExpr::Inverse(p) => relation_of(g, p).into_iter().map(|(a, b)| (b, a)).collect(),
        PathExpr::Sequence(a, b) => compose(&relation_of(g, a), &relation_of(g, b)),
        PathExpr::Alternative(a, b) => {
            let mut r = relation_of(g, a);
            r.extend(relation_of(g, b));
            r
        }
        PathExpr::Repeat { path, min, max } => {
            let r = relation_of(g, path);
            let mut power: Relation = g.node_set.iter().map(|&n| (n, n)).collect();
            for _ in 0..*min {
                power = compose(&power, &r);
            }
            let mut acc = power.clone();
            let mut k = *min;
            loop {
                if max.is_some_and(|m| k >= m) {
                    break;
                }
                power = compose(&power, &r);
                let before = acc.len();
                acc.extend(power.iter().copied());
                k += 1;
                if max.is_none() && acc.len() == before {
                    break;
                }
            }
            acc
        }
    }
}

pub fn oracle_pairs(g: &PathGraph, path: &PathExpr) -> BTreeSet<(Term, Term)> {
    relation_of(g, path)
        .into_iter()
        .map(|(a, b)| (g.nodes[a].clone(), g.nodes[b].clone()))
        .collect()
}

// Synthetic taxonomies for alignment.

const SYLLABLES: &[&str] = &[
    "ba", "ko", "ri", "mu", "te", "sa", "lo", "vi", "ne", "gu", "pha", "dro", "cyl", "mel", "tur", "xan", "qui",
    "bel", "sor", "fen",
];

pub fn random_word(rng: &mut StdRng) -> String {
    (0..3).map(|_| *SYLLABLES.choose(rng).unwrap()).collect()
}

pub fn random_binomial(rng: &mut StdRng) -> String {
    let mut genus = random_word(rng);
    genus[..1].make_ascii_uppercase();
    format!("{genus} {}", random_word(rng))
}

/// One substitution, insertion or deletion of a letter, or nothing.
pub fn perturb(rng: &mut StdRng, label: &str) -> String {
    let mut chars: Vec<char> = label.chars().collect();
    let letters: Vec<usize> = (0..chars.len()).filter(|&i| chars[i].is_alphabetic()).collect();
    let at = *letters.choose(rng).unwrap();
    let fresh = (b'a' + rng.gen_range(0..26)) as char;
    match rng.gen_range(0..4) {
        0 => {}
        1 => chars[at] = fresh,
        2 => chars.insert(at, fresh),
        _ => {
            chars.remove(at);
        }
    }
    chars.into_iter().collect()
}

pub struct Planted {
    pub source: Vec<ecokg::alignment::Entity>,
    pub target: Vec<ecokg::alignment::Entity>,
    pub truth: Vec<(String, String)>,
}

pub fn planted_taxonomies(rng: &mut StdRng, n_source: usize, n_target: usize, n_true: usize) -> Planted {
    let mut seen = HashSet::new();
    let mut fresh = |rng: &mut StdRng| loop {
        let l = random_binomial(rng);
        if seen.insert(l.clone()) {
            return l;
        }
    };
    let target_labels: Vec<String> = (0..n_target).map(|_| fresh(rng)).collect();
    let target: Vec<_> = target_labels
        .iter()
        .enumerate()
        .map(|(i, l)| ecokg::alignment::Entity::new(&format!("{NCBI}taxon/{}", i + 1), &[l.as_str()]))
        .collect();
    let mut picks: Vec<usize> = (0..n_target).collect();
    picks.shuffle(rng);
    let mut source = Vec::with_capacity(n_source);
    let mut truth = Vec::with_capacity(n_true);
    for (k, &t) in picks.iter().take(n_true).enumerate() {
        let iri = format!("{ET}taxon/{}", k + 1);
        source.push(ecokg::alignment::Entity::new(&iri, &[perturb(rng, &target_labels[t]).as_str()]));
        truth.push((iri, target[t].iri.clone()));
    }
    for k in n_true..n_source {
        let label = fresh(rng);
        source.push(ecokg::alignment::Entity::new(&format!("{ET}taxon/{}", k + 1), &[label.as_str()]));
    }
    Planted { source, target, truth }
}
