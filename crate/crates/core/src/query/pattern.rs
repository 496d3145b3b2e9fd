use std::collections::{BTreeSet, HashMap};

use super::path::{step, PathExpr};
use super::QueryError;
use crate::graph::{PrefixMap, Term, TermId, Triple, TripleStore};

/// A pattern position: a constant or a variable. Variables whose name
/// starts with `_:` come from blank nodes; they join but are never projected.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Const(Term),
    Var(String),
}

impl Node {
    pub fn var(name: &str) -> Self {
        Node::Var(name.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Verb {
    Var(String),
    Path(PathExpr),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: Node,
    pub verb: Verb,
    pub object: Node,
}

impl TriplePattern {
    pub fn new(subject: Node, verb: Verb, object: Node) -> Self {
        TriplePattern { subject, verb, object }
    }

    fn vars(&self) -> impl Iterator<Item = &str> {
        let s = match &self.subject {
            Node::Var(v) => Some(v.as_str()),
            _ => None,
        };
        let p = match &self.verb {
            Verb::Var(v) => Some(v.as_str()),
            _ => None,
        };
        let o = match &self.object {
            Node::Var(v) => Some(v.as_str()),
            _ => None,
        };
        s.into_iter().chain(p).chain(o)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphPattern {
    pub patterns: Vec<TriplePattern>,
}

impl GraphPattern {
    pub fn new(patterns: Vec<TriplePattern>) -> Self {
        GraphPattern { patterns }
    }

    /// Named variables in order of first appearance.
    pub fn variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for p in &self.patterns {
            for v in p.vars() {
                if !v.starts_with("_:") && !out.iter().any(|o| o == v) {
                    out.push(v.to_string());
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Select { projection: Vec<String>, pattern: GraphPattern },
    Construct { template: GraphPattern, pattern: GraphPattern },
}

/// SELECT output: distinct rows in ascending term order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solutions {
    pub vars: Vec<String>,
    pub rows: Vec<Vec<Term>>,
}

impl Solutions {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Header of `?var` names, then one line per row with terms in
    /// N-Triples form.
    pub fn to_tsv(&self) -> String {
        let mut out = self.vars.iter().map(|v| format!("?{v}")).collect::<Vec<_>>().join("\t");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Term::to_string).collect::<Vec<_>>().join("\t"));
            out.push('\n');
        }
        out
    }

    /// Like [`Solutions::to_tsv`] with IRIs compacted to curies.
    pub fn to_tsv_compact(&self, prefixes: &PrefixMap) -> String {
        let mut out = self.vars.iter().map(|v| format!("?{v}")).collect::<Vec<_>>().join("\t");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(|t| prefixes.display(t)).collect::<Vec<_>>().join("\t"));
            out.push('\n');
        }
        out
    }
}

/// Store ids plus ids for query constants the store has never seen.
struct Ctx<'a> {
    store: &'a TripleStore,
    locals: Vec<Term>,
    local_ids: HashMap<Term, TermId>,
}

impl<'a> Ctx<'a> {
    fn new(store: &'a TripleStore) -> Self {
        Ctx {
            store,
            locals: Vec::new(),
            local_ids: HashMap::new(),
        }
    }

    fn id(&mut self, t: &Term) -> TermId {
        if let Some(id) = self.store.id_of(t) {
            return id;
        }
        if let Some(&id) = self.local_ids.get(t) {
            return id;
        }
        let id = (self.store.term_count() + self.locals.len()) as TermId;
        self.locals.push(t.clone());
        self.local_ids.insert(t.clone(), id);
        id
    }

    fn term(&self, id: TermId) -> &Term {
        let n = self.store.term_count();
        if (id as usize) < n {
            self.store.term(id)
        } else {
            &self.locals[id as usize - n]
        }
    }
}

enum Slot {
    Const(TermId),
    Var(usize),
}

enum CompiledVerb {
    Slot(Slot),
    Path(PathExpr),
}

struct Compiled {
    s: Slot,
    p: CompiledVerb,
    o: Slot,
}

type Row = Vec<Option<TermId>>;

fn compile(ctx: &mut Ctx, pattern: &GraphPattern, slots: &mut HashMap<String, usize>) -> Vec<Compiled> {
    let mut slot = |ctx: &mut Ctx, n: &Node| match n {
        Node::Const(t) => Slot::Const(ctx.id(t)),
        Node::Var(v) => {
            let next = slots.len();
            Slot::Var(*slots.entry(v.clone()).or_insert(next))
        }
    };
    let mut out = Vec::new();
    for tp in &pattern.patterns {
        let s = slot(ctx, &tp.subject);
        let p = match &tp.verb {
            Verb::Var(v) => CompiledVerb::Slot(slot(ctx, &Node::Var(v.clone()))),
            Verb::Path(PathExpr::Atom(t)) => CompiledVerb::Slot(Slot::Const(ctx.id(t))),
            Verb::Path(path) => CompiledVerb::Path(path.clone()),
        };
        let o = slot(ctx, &tp.object);
        out.push(Compiled { s, p, o });
    }
    out
}

fn is_bound(slot: &Slot, bound: &BTreeSet<usize>) -> bool {
    match slot {
        Slot::Const(_) => true,
        Slot::Var(v) => bound.contains(v),
    }
}

fn const_of(slot: &Slot) -> Option<TermId> {
    match slot {
        Slot::Const(id) => Some(*id),
        Slot::Var(_) => None,
    }
}

/// Most selective first: fewest unbound positions, then smallest
/// constant-only index fan-out, then textual order.
fn join_order(store: &TripleStore, compiled: &[Compiled]) -> Vec<usize> {
    let mut remaining: Vec<usize> = (0..compiled.len()).collect();
    let mut bound = BTreeSet::new();
    let mut order = Vec::new();
    while !remaining.is_empty() {
        let best = remaining
            .iter()
            .enumerate()
            .min_by_key(|(_, &i)| {
                let c = &compiled[i];
                let (p_bound, fan) = match &c.p {
                    CompiledVerb::Slot(p) => (
                        is_bound(p, &bound),
                        store.count_ids(const_of(&c.s), const_of(p), const_of(&c.o)),
                    ),
                    CompiledVerb::Path(_) => (true, usize::MAX),
                };
                let unbound = [!is_bound(&c.s, &bound), !p_bound, !is_bound(&c.o, &bound)]
                    .iter()
                    .filter(|&&u| u)
                    .count();
                (unbound, fan, i)
            })
            .map(|(k, _)| k)
            .expect("non-empty");
        let i = remaining.remove(best);
        let c = &compiled[i];
        for s in [&c.s, &c.o] {
            if let Slot::Var(v) = s {
                bound.insert(*v);
            }
        }
        if let CompiledVerb::Slot(Slot::Var(v)) = &c.p {
            bound.insert(*v);
        }
        order.push(i);
    }
    order
}

fn value(slot: &Slot, row: &Row) -> Option<TermId> {
    match slot {
        Slot::Const(id) => Some(*id),
        Slot::Var(v) => row[*v],
    }
}

/// Binds `slot` to `id` in `row`; false on conflict with an earlier binding.
fn bind(slot: &Slot, id: TermId, row: &mut Row) -> bool {
    match slot {
        Slot::Const(c) => *c == id,
        Slot::Var(v) => match row[*v] {
            Some(existing) => existing == id,
            None => {
                row[*v] = Some(id);
                true
            }
        },
    }
}

fn extend(ctx: &Ctx, c: &Compiled, row: &Row, out: &mut Vec<Row>) {
    let store = ctx.store;
    let s = value(&c.s, row);
    let o = value(&c.o, row);
    match &c.p {
        CompiledVerb::Slot(ps) => {
            let p = value(ps, row);
            for [ts, tp, to] in store.match_ids(s, p, o) {
                let mut r = row.clone();
                if bind(&c.s, ts, &mut r) && bind(ps, tp, &mut r) && bind(&c.o, to, &mut r) {
                    out.push(r);
                }
            }
        }
        CompiledVerb::Path(path) => {
            let pairs: Vec<(TermId, TermId)> = match (s, o) {
                (Some(s), _) => step(store, path, &BTreeSet::from([s]), true)
                    .into_iter()
                    .map(|e| (s, e))
                    .collect(),
                (None, Some(o)) => step(store, path, &BTreeSet::from([o]), false)
                    .into_iter()
                    .map(|b| (b, o))
                    .collect(),
                (None, None) => store
                    .node_ids()
                    .into_iter()
                    .flat_map(|n| {
                        step(store, path, &BTreeSet::from([n]), true)
                            .into_iter()
                            .map(move |e| (n, e))
                    })
                    .collect(),
            };
            for (a, b) in pairs {
                let mut r = row.clone();
                if bind(&c.s, a, &mut r) && bind(&c.o, b, &mut r) {
                    out.push(r);
                }
            }
        }
    }
}

struct Solved<'a> {
    ctx: Ctx<'a>,
    slots: HashMap<String, usize>,
    rows: Vec<Row>,
}

fn solve<'a>(store: &'a TripleStore, pattern: &GraphPattern) -> Solved<'a> {
    let mut ctx = Ctx::new(store);
    let mut slots = HashMap::new();
    let compiled = compile(&mut ctx, pattern, &mut slots);
    let mut rows: Vec<Row> = vec![vec![None; slots.len()]];
    for i in join_order(store, &compiled) {
        let mut next = Vec::new();
        for row in &rows {
            extend(&ctx, &compiled[i], row, &mut next);
        }
        rows = next;
        if rows.is_empty() {
            break;
        }
    }
    Solved { ctx, slots, rows }
}

/// Evaluates `pattern` and projects the named variables in `projection`.
pub fn select(store: &TripleStore, pattern: &GraphPattern, projection: &[String]) -> Result<Solutions, QueryError> {
    let named = pattern.variables();
    for v in projection {
        if !named.contains(v) {
            return Err(QueryError::UnboundVariable(v.clone()));
        }
    }
    let solved = solve(store, pattern);
    let idx: Vec<usize> = projection.iter().map(|v| solved.slots[v]).collect();
    let rows: BTreeSet<Vec<Term>> = solved
        .rows
        .iter()
        .map(|r| {
            idx.iter()
                .map(|&i| solved.ctx.term(r[i].expect("every pattern variable is bound")).clone())
                .collect()
        })
        .collect();
    Ok(Solutions {
        vars: projection.to_vec(),
        rows: rows.into_iter().collect(),
    })
}

/// Instantiates `template` once per solution of `pattern`. Template blank
/// nodes become fresh blank nodes per solution; instantiations that are not
/// valid triples are skipped.
pub fn construct(store: &TripleStore, pattern: &GraphPattern, template: &GraphPattern) -> Result<TripleStore, QueryError> {
    let named = pattern.variables();
    for tp in &template.patterns {
        if let Verb::Path(p) = &tp.verb {
            if p.as_atom().is_none() {
                return Err(QueryError::Unsupported("property paths in a CONSTRUCT template".into()));
            }
        }
        for v in tp.vars() {
            if !v.starts_with("_:") && !named.iter().any(|n| n == v) {
                return Err(QueryError::UnboundTemplateVariable(v.to_string()));
            }
        }
    }
    let solved = solve(store, pattern);
    let mut out = TripleStore::with_prefixes(store.prefixes().clone());
    let mut blank_names: HashMap<&str, usize> = HashMap::new();
    for tp in &template.patterns {
        for v in tp.vars().filter(|v| v.starts_with("_:")) {
            let n = blank_names.len();
            blank_names.entry(v).or_insert(n);
        }
    }
    for (k, row) in solved.rows.iter().enumerate() {
        let inst = |n: &Node| -> Term {
            match n {
                Node::Const(t) => t.clone(),
                Node::Var(v) if v.starts_with("_:") => Term::Blank(format!("b{}x{k}", blank_names[v.as_str()])),
                Node::Var(v) => solved.ctx.term(row[solved.slots[v]].expect("bound")).clone(),
            }
        };
        for tp in &template.patterns {
            let p = match &tp.verb {
                Verb::Path(p) => p.as_atom().expect("checked above").clone(),
                Verb::Var(v) => inst(&Node::Var(v.clone())),
            };
            if let Ok(t) = Triple::new(inst(&tp.subject), p, inst(&tp.object)) {
                out.add_triple(t).map_err(|e| QueryError::Unsupported(e.to_string()))?;
            }
        }
    }
    Ok(out)
}
