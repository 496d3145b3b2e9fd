//! Taxonomy dump ingestion (`nodes.dmp`, `names.dmp`, `divisions.dmp`).
//!
//! Records are single lines; fields are separated by `\t|\t` and the record
//! ends with `\t|`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::graph::{StoreError, Term, TripleStore};
use crate::vocab;

const FIELD_SEP: &str = "\t|\t";
const RECORD_END: &str = "\t|";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NcbiError {
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("dangling parent ids: {0:?}")]
    DanglingParent(Vec<u64>),
    #[error("duplicate division id {0}")]
    DuplicateDivision(u32),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Splits a dump file into per-record field lists.
pub fn parse_dmp(text: &str) -> Result<Vec<Vec<String>>, NcbiError> {
    let mut records = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            continue;
        }
        let body = line.strip_suffix(RECORD_END).ok_or_else(|| NcbiError::Malformed {
            line: i + 1,
            message: "missing record terminator".into(),
        })?;
        records.push(body.split(FIELD_SEP).map(str::to_string).collect());
    }
    Ok(records)
}

/// Renders field lists back into dump format.
pub fn write_dmp<I, R, S>(records: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out = String::new();
    for rec in records {
        let fields: Vec<S> = rec.into_iter().collect();
        let joined = fields.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(FIELD_SEP);
        out.push_str(&joined);
        out.push_str(RECORD_END);
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaxonNodeRow {
    pub taxon_id: u64,
    pub parent_id: u64,
    pub rank: String,
    pub division_id: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaxonNameRow {
    pub taxon_id: u64,
    pub name: String,
    pub name_class: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisionRow {
    pub division_id: u32,
    pub label: String,
}

fn field<'a>(rec: &'a [String], idx: usize, line: usize) -> Result<&'a str, NcbiError> {
    rec.get(idx)
        .map(|s| s.trim())
        .ok_or_else(|| NcbiError::Malformed {
            line,
            message: format!("expected at least {} fields, found {}", idx + 1, rec.len()),
        })
}

fn number<T: std::str::FromStr>(text: &str, what: &str, line: usize) -> Result<T, NcbiError> {
    text.parse().map_err(|_| NcbiError::Malformed {
        line,
        message: format!("{what} {text:?} is not a number"),
    })
}

fn positive(id: u64, what: &str, line: usize) -> Result<u64, NcbiError> {
    if id == 0 {
        return Err(NcbiError::Malformed {
            line,
            message: format!("{what} must be >= 1"),
        });
    }
    Ok(id)
}

/// Reads node rows from columns 1, 2, 3 and 5.
pub fn node_rows(text: &str) -> Result<Vec<TaxonNodeRow>, NcbiError> {
    parse_dmp(text)?
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let line = i + 1;
            Ok(TaxonNodeRow {
                taxon_id: positive(number(field(rec, 0, line)?, "taxon id", line)?, "taxon id", line)?,
                parent_id: positive(number(field(rec, 1, line)?, "parent id", line)?, "parent id", line)?,
                rank: field(rec, 2, line)?.to_string(),
                division_id: number(field(rec, 4, line)?, "division id", line)?,
            })
        })
        .collect()
}

/// Reads name rows from columns 1, 2 and 4.
pub fn name_rows(text: &str) -> Result<Vec<TaxonNameRow>, NcbiError> {
    parse_dmp(text)?
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let line = i + 1;
            let name = field(rec, 1, line)?;
            if name.is_empty() {
                return Err(NcbiError::Malformed {
                    line,
                    message: "empty name text".into(),
                });
            }
            Ok(TaxonNameRow {
                taxon_id: positive(number(field(rec, 0, line)?, "taxon id", line)?, "taxon id", line)?,
                name: name.to_string(),
                name_class: field(rec, 3, line)?.to_string(),
            })
        })
        .collect()
}

/// Reads division rows from columns 1 and 3.
pub fn division_rows(text: &str) -> Result<Vec<DivisionRow>, NcbiError> {
    parse_dmp(text)?
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let line = i + 1;
            Ok(DivisionRow {
                division_id: number(field(rec, 0, line)?, "division id", line)?,
                label: field(rec, 2, line)?.to_string(),
            })
        })
        .collect()
}

pub fn taxon_iri(id: u64) -> Term {
    vocab::ncbi(&format!("taxon/{id}"))
}

pub fn division_iri(id: u32) -> Term {
    vocab::ncbi(&format!("division/{id}"))
}

/// `species` -> `Species`, `no rank` -> `No_rank`.
pub fn rank_local_name(rank: &str) -> String {
    let mut chars = rank.trim().chars();
    let mut out = String::with_capacity(rank.len());
    if let Some(first) = chars.next() {
        out.extend(first.to_uppercase());
    }
    out.extend(chars);
    iri_safe_local(&out)
}

/// `genbank common name` -> `genbank_common_name`.
pub fn name_class_local_name(class: &str) -> String {
    iri_safe_local(class.trim())
}

fn iri_safe_local(text: &str) -> String {
    text.chars()
        .filter_map(|c| match c {
            ' ' => Some('_'),
            c if c.is_alphanumeric() || matches!(c, '_' | '-' | '.') => Some(c),
            _ => None,
        })
        .collect()
}

/// Emits subclass, rank and division triples for each node row.
pub fn ingest_nodes(rows: &[TaxonNodeRow], store: &mut TripleStore) -> Result<usize, NcbiError> {
    let known: BTreeSet<u64> = rows.iter().map(|r| r.taxon_id).collect();
    let dangling: BTreeSet<u64> = rows
        .iter()
        .map(|r| r.parent_id)
        .filter(|p| !known.contains(p))
        .collect();
    if !dangling.is_empty() {
        return Err(NcbiError::DanglingParent(dangling.into_iter().collect()));
    }

    let subclass = vocab::rdfs_subclass_of();
    let rank = vocab::ncbi("rank");
    let division = vocab::ncbi("division");
    let mut added = 0;
    for row in rows {
        let taxon = taxon_iri(row.taxon_id);
        if row.parent_id != row.taxon_id {
            added += usize::from(store.add(taxon.clone(), subclass.clone(), taxon_iri(row.parent_id))?);
        }
        let rank_iri = vocab::ncbi(&rank_local_name(&row.rank));
        added += usize::from(store.add(taxon.clone(), rank.clone(), rank_iri)?);
        added += usize::from(store.add(taxon, division.clone(), division_iri(row.division_id))?);
    }
    Ok(added)
}

/// Emits a class-specific name triple and an `rdfs:label` triple per row.
pub fn ingest_names(rows: &[TaxonNameRow], store: &mut TripleStore) -> Result<usize, NcbiError> {
    let label = vocab::rdfs_label();
    let mut added = 0;
    for row in rows {
        let taxon = taxon_iri(row.taxon_id);
        let class = vocab::ncbi(&name_class_local_name(&row.name_class));
        added += usize::from(store.add(taxon.clone(), class, Term::literal(row.name.clone()))?);
        added += usize::from(store.add(taxon, label.clone(), Term::literal(row.name.clone()))?);
    }
    Ok(added)
}

/// Emits division labels and pairwise disjointness (lower id first).
pub fn ingest_divisions(rows: &[DivisionRow], store: &mut TripleStore) -> Result<usize, NcbiError> {
    let mut divisions: BTreeMap<u32, &str> = BTreeMap::new();
    for row in rows {
        if divisions.insert(row.division_id, &row.label).is_some() {
            return Err(NcbiError::DuplicateDivision(row.division_id));
        }
    }
    let label = vocab::rdfs_label();
    let disjoint = vocab::owl_disjoint_with();
    let mut added = 0;
    for (&id, &name) in &divisions {
        added += usize::from(store.add(division_iri(id), label.clone(), Term::literal(name))?);
    }
    let ids: Vec<u32> = divisions.keys().copied().collect();
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            added += usize::from(store.add(division_iri(a), disjoint.clone(), division_iri(b))?);
        }
    }
    Ok(added)
}

/// Ids of taxa whose parent chain never reaches a self-parented root.
pub fn hierarchy_cycles(rows: &[TaxonNodeRow]) -> Vec<u64> {
    let parent: HashMap<u64, u64> = rows.iter().map(|r| (r.taxon_id, r.parent_id)).collect();
    // 0 = unvisited, 1 = on current walk, 2 = reaches root, 3 = cyclic
    let mut state: HashMap<u64, u8> = HashMap::new();
    let mut cyclic = BTreeSet::new();
    for &start in parent.keys() {
        if state.contains_key(&start) {
            continue;
        }
        let mut walk = Vec::new();
        let mut cur = start;
        let verdict = loop {
            match state.get(&cur) {
                Some(2) => break 2,
                Some(3) | Some(1) => break 3,
                _ => {}
            }
            state.insert(cur, 1);
            walk.push(cur);
            match parent.get(&cur) {
                Some(&p) if p == cur => break 2,
                Some(&p) => cur = p,
                None => break 2,
            }
        };
        for id in walk {
            state.insert(id, verdict);
            if verdict == 3 {
                cyclic.insert(id);
            }
        }
    }
    cyclic.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Triple;

    fn has(store: &TripleStore, s: Term, p: Term, o: Term) -> bool {
        store.contains(&Triple::new(s, p, o).unwrap())
    }

    #[test]
    fn dmp_fields_are_stripped() {
        let recs = parse_dmp("687295\t|\t513583\t|\tspecies\t|\t1\t|\n").unwrap();
        assert_eq!(recs, vec![vec!["687295", "513583", "species", "1"]]);
    }

    #[test]
    fn dmp_empty_field_preserved() {
        let recs = parse_dmp("1\t|\t\t|\tx\t|\n0\t|\tBCT\t|\tBacteria\t|\t\t|\n").unwrap();
        assert_eq!(recs[0], vec!["1", "", "x"]);
        assert_eq!(recs[1], vec!["0", "BCT", "Bacteria", ""]);
    }

    #[test]
    fn dmp_missing_terminator() {
        let err = parse_dmp("1\t|\t2\t|\n3\t|\t4\n").unwrap_err();
        assert!(matches!(err, NcbiError::Malformed { line: 2, .. }));
    }

    #[test]
    fn dmp_write_round_trip() {
        let recs = vec![vec!["1", "", "three"], vec!["", "x", ""]];
        let text = write_dmp(recs.clone());
        assert_eq!(parse_dmp(&text).unwrap(), recs);
    }

    #[test]
    fn node_row_triples() {
        let rows = vec![
            TaxonNodeRow { taxon_id: 1, parent_id: 1, rank: "no rank".into(), division_id: 8 },
            TaxonNodeRow { taxon_id: 513583, parent_id: 1, rank: "genus".into(), division_id: 1 },
            TaxonNodeRow { taxon_id: 687295, parent_id: 513583, rank: "species".into(), division_id: 1 },
        ];
        let mut store = TripleStore::new();
        let n = ingest_nodes(&rows, &mut store).unwrap();
        assert_eq!(n, 2 + 3 + 3);
        assert!(has(&store, taxon_iri(687295), vocab::rdfs_subclass_of(), taxon_iri(513583)));
        assert!(has(&store, taxon_iri(687295), vocab::ncbi("rank"), vocab::ncbi("Species")));
        assert!(has(&store, taxon_iri(1), vocab::ncbi("rank"), vocab::ncbi("No_rank")));
        assert!(store
            .match_pattern(Some(&taxon_iri(1)), Some(&vocab::rdfs_subclass_of()), None)
            .is_empty());
    }

    #[test]
    fn dangling_parents_listed() {
        let rows = vec![
            TaxonNodeRow { taxon_id: 2, parent_id: 7, rank: "genus".into(), division_id: 0 },
            TaxonNodeRow { taxon_id: 3, parent_id: 9, rank: "genus".into(), division_id: 0 },
        ];
        let err = ingest_nodes(&rows, &mut TripleStore::new()).unwrap_err();
        assert_eq!(err, NcbiError::DanglingParent(vec![7, 9]));
    }

    #[test]
    fn chain_emits_n_minus_one_edges() {
        let n = 40u64;
        let rows: Vec<_> = (1..=n)
            .map(|id| TaxonNodeRow {
                taxon_id: id,
                parent_id: if id == 1 { 1 } else { id - 1 },
                rank: ["kingdom", "genus", "species"][(id % 3) as usize].into(),
                division_id: 0,
            })
            .collect();
        let mut store = TripleStore::new();
        ingest_nodes(&rows, &mut store).unwrap();
        let edges = store.match_pattern(None, Some(&vocab::rdfs_subclass_of()), None);
        assert_eq!(edges.len() as u64, n - 1);
        assert!(hierarchy_cycles(&rows).is_empty());
    }

    #[test]
    fn cycles_detected() {
        let rows = vec![
            TaxonNodeRow { taxon_id: 1, parent_id: 1, rank: "no rank".into(), division_id: 0 },
            TaxonNodeRow { taxon_id: 2, parent_id: 1, rank: "genus".into(), division_id: 0 },
            TaxonNodeRow { taxon_id: 3, parent_id: 4, rank: "genus".into(), division_id: 0 },
            TaxonNodeRow { taxon_id: 4, parent_id: 3, rank: "genus".into(), division_id: 0 },
            TaxonNodeRow { taxon_id: 5, parent_id: 4, rank: "species".into(), division_id: 0 },
        ];
        assert_eq!(hierarchy_cycles(&rows), vec![3, 4, 5]);
    }

    #[test]
    fn names_emit_class_and_label() {
        let rows: Vec<_> = ["scientific name", "synonym", "genbank common name", "authority"]
            .iter()
            .enumerate()
            .map(|(i, c)| TaxonNameRow {
                taxon_id: 687295,
                name: format!("name {i}"),
                name_class: (*c).into(),
            })
            .collect();
        let mut store = TripleStore::new();
        assert_eq!(ingest_names(&rows, &mut store).unwrap(), 8);
        assert!(has(
            &store,
            taxon_iri(687295),
            vocab::ncbi("genbank_common_name"),
            Term::literal("name 2")
        ));
    }

    #[test]
    fn scientific_name_triple() {
        let rows = name_rows("687295\t|\tColeophora cornella\t|\t\t|\tscientific name\t|\n").unwrap();
        let mut store = TripleStore::new();
        ingest_names(&rows, &mut store).unwrap();
        assert!(has(
            &store,
            taxon_iri(687295),
            vocab::ncbi("scientific_name"),
            Term::literal("Coleophora cornella")
        ));
    }

    #[test]
    fn division_disjointness() {
        let rows = division_rows(
            "2\t|\tMAM\t|\tMammals\t|\t\t|\n4\t|\tPLN\t|\tPlants and Fungi\t|\t\t|\n",
        )
        .unwrap();
        let mut store = TripleStore::new();
        ingest_divisions(&rows, &mut store).unwrap();
        assert!(has(&store, division_iri(2), vocab::owl_disjoint_with(), division_iri(4)));
        assert!(!has(&store, division_iri(4), vocab::owl_disjoint_with(), division_iri(2)));
        assert!(has(&store, division_iri(2), vocab::rdfs_label(), Term::literal("Mammals")));
    }

    #[test]
    fn division_pair_counts() {
        for k in 1..8u32 {
            let rows: Vec<_> = (0..k)
                .map(|i| DivisionRow { division_id: i * 3, label: format!("d{i}") })
                .collect();
            let mut store = TripleStore::new();
            ingest_divisions(&rows, &mut store).unwrap();
            let pairs = store.match_pattern(None, Some(&vocab::owl_disjoint_with()), None);
            assert_eq!(pairs.len() as u32, k * (k - 1) / 2);
        }
    }

    #[test]
    fn duplicate_division_rejected() {
        let rows = vec![
            DivisionRow { division_id: 1, label: "a".into() },
            DivisionRow { division_id: 1, label: "b".into() },
        ];
        assert_eq!(
            ingest_divisions(&rows, &mut TripleStore::new()),
            Err(NcbiError::DuplicateDivision(1))
        );
    }
}
