use std::collections::BTreeSet;

use super::{
    chemical_iri, emit_pairwise_disjoint, group_local_name, primary_group, EcotoxConfig, EcotoxError,
    Table, Warnings,
};
use crate::bridge::{normalize_cas, validate_cas};
use crate::graph::{Term, TripleStore};
use crate::vocab;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChemicalRecord {
    /// Hyphenated CAS form, e.g. `877-43-0`.
    pub cas: String,
    pub name: Option<String>,
    pub ecotox_group: Option<String>,
}

/// Reads the chemicals table. CAS numbers may be hyphenated or bare digits.
pub fn chemical_records(table: &Table, config: &EcotoxConfig) -> Result<Vec<ChemicalRecord>, EcotoxError> {
    let cas_col = table.require("cas_number")?;
    let name_col = table.column("chemical_name");
    let group_col = table.column("ecotox_group");
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let raw = row[cas_col].trim();
            let cas = normalize_cas(raw).ok_or_else(|| EcotoxError::Table {
                table: table.name.clone(),
                line: i + 2,
                message: format!("cas_number {raw:?} is not a CAS registry number"),
            })?;
            Ok(ChemicalRecord {
                cas,
                name: name_col.and_then(|c| config.cell(&row[c])),
                ecotox_group: group_col
                    .and_then(|c| config.cell(&row[c]))
                    .and_then(|g| primary_group(&g)),
            })
        })
        .collect()
}

/// Emits chemical labels and compound groups. Records failing the CAS check
/// digit are kept and reported as warnings.
pub fn ingest_chemicals(
    records: &[ChemicalRecord],
    store: &mut TripleStore,
) -> Result<(usize, Warnings), EcotoxError> {
    let mut warnings = Warnings::default();
    let mut groups: Vec<Term> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut added = 0;
    for rec in records {
        if !seen.insert(rec.cas.as_str()) {
            return Err(EcotoxError::DuplicateId {
                kind: "chemical",
                id: rec.cas.clone(),
            });
        }
        if !validate_cas(&rec.cas) {
            warnings.push(format!("chemical {}: CAS check digit mismatch", rec.cas));
        }
        let subject = chemical_iri(&rec.cas.replace('-', ""));
        added += usize::from(store.add(subject.clone(), vocab::rdf_type(), vocab::et("Chemical"))?);
        if let Some(name) = &rec.name {
            added += usize::from(store.add(subject.clone(), vocab::rdfs_label(), Term::literal(name.clone()))?);
        }
        if let Some(group) = &rec.ecotox_group {
            let g = vocab::et(&format!("chemical_group/{}", group_local_name(group)));
            if !groups.contains(&g) {
                groups.push(g.clone());
            }
            added += usize::from(store.add(subject, vocab::et("ecotoxGroup"), g)?);
        }
    }
    added += emit_pairwise_disjoint(&groups, store)?;
    Ok((added, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Triple;

    #[test]
    fn chemical_label_under_stripped_cas() {
        let recs = vec![ChemicalRecord {
            cas: "877-43-0".into(),
            name: Some("2,6-Dimethylquinoline".into()),
            ecotox_group: None,
        }];
        let mut store = TripleStore::new();
        let (_, warnings) = ingest_chemicals(&recs, &mut store).unwrap();
        assert!(warnings.is_empty());
        let t = Triple::new(
            vocab::et("chemical/877430"),
            vocab::rdfs_label(),
            Term::literal("2,6-Dimethylquinoline"),
        )
        .unwrap();
        assert!(store.contains(&t));
    }

    #[test]
    fn empty_name_omits_label() {
        let table = Table::parse("chemicals", "cas_number|chemical_name|ecotox_group\n79061|NR|\n").unwrap();
        let recs = chemical_records(&table, &EcotoxConfig::default()).unwrap();
        assert_eq!(recs[0].cas, "79-06-1");
        let mut store = TripleStore::new();
        ingest_chemicals(&recs, &mut store).unwrap();
        assert!(store.match_pattern(None, Some(&vocab::rdfs_label()), None).is_empty());
    }

    #[test]
    fn bad_check_digit_is_flagged_not_dropped() {
        let recs = vec![ChemicalRecord { cas: "877-43-1".into(), name: Some("x".into()), ecotox_group: None }];
        let mut store = TripleStore::new();
        let (_, warnings) = ingest_chemicals(&recs, &mut store).unwrap();
        assert_eq!(warnings.len(), 1);
        assert_eq!(store.match_pattern(Some(&vocab::et("chemical/877431")), None, None).len(), 2);
    }
}
