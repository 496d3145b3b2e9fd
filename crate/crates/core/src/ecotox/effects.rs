use std::collections::{BTreeMap, BTreeSet};

use super::{
    chemical_iri, code_local_name, is_id, result_iri, sanitize_name, species_iri, test_iri,
    EcotoxConfig, EcotoxError, Table,
};
use crate::bridge::normalize_cas;
use crate::graph::{Literal, Term, TripleStore};
use crate::units::UnitRegistry;
use crate::vocab;

const TEST_CORE: &[&str] = &["test_id", "reference_number", "test_cas", "species_number"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestRecord {
    pub test_id: String,
    pub reference_number: Option<String>,
    /// Hyphenated CAS.
    pub test_cas: String,
    pub species_number: String,
    /// Optional metadata columns with a non-missing value, in header order.
    pub metadata: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultRecord {
    pub result_id: String,
    pub test_id: String,
    pub endpoint: Option<String>,
    pub conc1_mean: Option<String>,
    pub conc1_unit: Option<String>,
    pub effect: Option<String>,
}

/// A parsed `conc1_mean` cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Concentration {
    /// Plain non-negative number, lexical form preserved.
    Number(String),
    /// A value carrying a qualifier (`>100`, `400*`) or a range (`10-20`).
    Qualified { value: String, qualifier: String },
}

fn id_cell(table: &Table, row: &[String], col: usize, line: usize) -> Result<String, EcotoxError> {
    let v = row[col].trim();
    if !is_id(v) {
        return Err(EcotoxError::Table {
            table: table.name.clone(),
            line,
            message: format!("{} {v:?} is not a positive integer", table.header[col]),
        });
    }
    Ok(v.to_string())
}

pub fn test_records(table: &Table, config: &EcotoxConfig) -> Result<Vec<TestRecord>, EcotoxError> {
    let id_col = table.require("test_id")?;
    let cas_col = table.require("test_cas")?;
    let species_col = table.require("species_number")?;
    let ref_col = table.column("reference_number");
    let meta_cols: Vec<usize> = (0..table.header.len())
        .filter(|&i| !TEST_CORE.contains(&table.header[i].as_str()))
        .collect();
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let line = i + 2;
            let raw_cas = row[cas_col].trim();
            let test_cas = normalize_cas(raw_cas).ok_or_else(|| EcotoxError::Table {
                table: table.name.clone(),
                line,
                message: format!("test_cas {raw_cas:?} is not a CAS registry number"),
            })?;
            Ok(TestRecord {
                test_id: id_cell(table, row, id_col, line)?,
                reference_number: ref_col.and_then(|c| config.cell(&row[c])),
                test_cas,
                species_number: id_cell(table, row, species_col, line)?,
                metadata: meta_cols
                    .iter()
                    .filter_map(|&c| config.cell(&row[c]).map(|v| (table.header[c].clone(), v)))
                    .collect(),
            })
        })
        .collect()
}

pub fn result_records(table: &Table, config: &EcotoxConfig) -> Result<Vec<ResultRecord>, EcotoxError> {
    let id_col = table.require("result_id")?;
    let test_col = table.require("test_id")?;
    let opt = |name: &str, row: &[String]| table.column(name).and_then(|c| config.cell(&row[c]));
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let line = i + 2;
            Ok(ResultRecord {
                result_id: id_cell(table, row, id_col, line)?,
                test_id: id_cell(table, row, test_col, line)?,
                endpoint: opt("endpoint", row),
                conc1_mean: opt("conc1_mean", row),
                conc1_unit: opt("conc1_unit", row),
                effect: opt("effect", row),
            })
        })
        .collect()
}

fn is_plain_number(s: &str) -> bool {
    !s.is_empty() && s.parse::<f64>().is_ok_and(f64::is_finite) && !s.contains(['i', 'n', 'I', 'N'])
}

fn is_xsd_decimal(s: &str) -> bool {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    !(int.is_empty() && frac.is_empty())
        && int.bytes().all(|b| b.is_ascii_digit())
        && frac.bytes().all(|b| b.is_ascii_digit())
}

/// Classifies a concentration cell without lossy coercion.
pub fn parse_concentration(raw: &str) -> Concentration {
    let s = raw.trim();
    if is_plain_number(s) {
        return Concentration::Number(s.to_string());
    }
    let op_len = s
        .find(|c: char| !matches!(c, '<' | '>' | '=' | '~'))
        .unwrap_or(s.len());
    let (op, rest) = s.split_at(op_len);
    let core = rest.trim_end_matches('*').trim();
    let marks = &rest[rest.trim_end_matches('*').len()..];
    if is_plain_number(core) && (!op.is_empty() || !marks.is_empty()) {
        return Concentration::Qualified {
            value: core.to_string(),
            qualifier: format!("{op}{marks}"),
        };
    }
    if let Some((lo, hi)) = s.split_once('-').filter(|(lo, _)| !lo.is_empty()) {
        if is_plain_number(lo.trim()) && is_plain_number(hi.trim()) {
            return Concentration::Qualified {
                value: s.to_string(),
                qualifier: "range".into(),
            };
        }
    }
    Concentration::Qualified {
        value: s.to_string(),
        qualifier: "unparsed".into(),
    }
}

/// `organism_lifestage` -> (`organismLifestage`, `lifestage`).
fn metadata_names(column: &str) -> (String, String) {
    let mut parts = column.split('_').filter(|p| !p.is_empty());
    let mut prop = parts.next().unwrap_or("").to_lowercase();
    let mut last = prop.clone();
    for p in parts {
        let mut cs = p.chars();
        if let Some(c) = cs.next() {
            prop.extend(c.to_uppercase());
            prop.push_str(&cs.as_str().to_lowercase());
        }
        last = p.to_lowercase();
    }
    prop.retain(|c| c.is_ascii_alphanumeric());
    (prop, sanitize_name(&last))
}

fn unit_term(symbol: &str, units: &UnitRegistry) -> Term {
    match units.by_abbreviation(symbol) {
        Some(def) => Term::Iri(def.id.clone()),
        None => Term::literal(symbol),
    }
}

/// Emits test nodes, their results, and result concentrations.
pub fn ingest_tests(
    tests: &[TestRecord],
    results: &[ResultRecord],
    units: &UnitRegistry,
    store: &mut TripleStore,
) -> Result<usize, EcotoxError> {
    let mut by_test: BTreeMap<&str, Vec<&ResultRecord>> = BTreeMap::new();
    for t in tests {
        if by_test.insert(t.test_id.as_str(), Vec::new()).is_some() {
            return Err(EcotoxError::DuplicateId {
                kind: "test",
                id: t.test_id.clone(),
            });
        }
    }
    let mut result_ids = BTreeSet::new();
    for r in results {
        if !result_ids.insert(r.result_id.as_str()) {
            return Err(EcotoxError::DuplicateId {
                kind: "result",
                id: r.result_id.clone(),
            });
        }
        by_test
            .get_mut(r.test_id.as_str())
            .ok_or_else(|| EcotoxError::OrphanResult {
                result: r.result_id.clone(),
                test: r.test_id.clone(),
            })?
            .push(r);
    }

    let mut added = 0;
    let mut add = |store: &mut TripleStore, s: &Term, p: Term, o: Term| -> Result<(), EcotoxError> {
        added += usize::from(store.add(s.clone(), p, o)?);
        Ok(())
    };
    for t in tests {
        let test = test_iri(&t.test_id);
        add(store, &test, vocab::rdf_type(), vocab::et("Test"))?;
        add(store, &test, vocab::et("compound"), chemical_iri(&t.test_cas.replace('-', "")))?;
        add(store, &test, vocab::et("species"), species_iri(&t.species_number))?;
        if let Some(r) = &t.reference_number {
            add(store, &test, vocab::et("referenceNumber"), Term::literal(r.clone()))?;
        }
        for (column, value) in &t.metadata {
            let (prop, stem) = metadata_names(column);
            let local = sanitize_name(value);
            if prop.is_empty() || stem.is_empty() || local.is_empty() {
                continue;
            }
            add(store, &test, vocab::et(&prop), vocab::et(&format!("{stem}/{local}")))?;
        }

        for r in &by_test[t.test_id.as_str()] {
            let result = result_iri(&r.result_id);
            add(store, &test, vocab::et("hasResult"), result.clone())?;
            add(store, &result, vocab::rdf_type(), vocab::et("Result"))?;
            if let Some(code) = r.endpoint.as_deref().map(code_local_name).filter(|c| !c.is_empty()) {
                add(store, &result, vocab::et("endpoint"), vocab::et(&code))?;
            }
            if let Some(code) = r.effect.as_deref().map(code_local_name).filter(|c| !c.is_empty()) {
                add(store, &result, vocab::et("effectType"), vocab::et(&code))?;
            }
            let Some(raw) = &r.conc1_mean else { continue };
            let conc = vocab::et(&format!("result/{}/concentration", r.result_id));
            add(store, &result, vocab::et("concentration"), conc.clone())?;
            match parse_concentration(raw) {
                Concentration::Number(lex) => {
                    if lex.starts_with('-') && lex.parse::<f64>().is_ok_and(|v| v < 0.0) {
                        return Err(EcotoxError::NegativeConcentration {
                            result: r.result_id.clone(),
                            value: lex,
                        });
                    }
                    let dt = if is_xsd_decimal(&lex) { "decimal" } else { "double" };
                    let lit = Literal::typed(lex, vocab::xsd(dt)).expect("xsd IRI is valid");
                    add(store, &conc, vocab::rdf_value(), Term::Literal(lit))?;
                }
                Concentration::Qualified { value, qualifier } => {
                    add(store, &conc, vocab::rdf_value(), Term::literal(value))?;
                    add(store, &conc, vocab::et("qualifier"), Term::literal(qualifier))?;
                }
            }
            if let Some(symbol) = &r.conc1_unit {
                add(store, &conc, vocab::iri(vocab::UNIT, "units"), unit_term(symbol, units))?;
            }
        }
    }
    Ok(added)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Triple;

    fn test(id: &str, cas: &str, species: &str) -> TestRecord {
        TestRecord {
            test_id: id.into(),
            reference_number: Some("5390".into()),
            test_cas: cas.into(),
            species_number: species.into(),
            metadata: vec![],
        }
    }

    fn result(id: &str, test: &str, endpoint: &str) -> ResultRecord {
        ResultRecord {
            result_id: id.into(),
            test_id: test.into(),
            endpoint: Some(endpoint.into()),
            conc1_mean: Some("400".into()),
            conc1_unit: Some("mg/kg diet".into()),
            effect: None,
        }
    }

    fn has(store: &TripleStore, s: Term, p: Term, o: Term) -> bool {
        store.contains(&Triple::new(s, p, o).unwrap())
    }

    #[test]
    fn table_rows_become_test_and_result_nodes() {
        let mut store = TripleStore::new();
        ingest_tests(
            &[test("1068553", "877-43-0", "5156")],
            &[result("98004", "1068553", "LC50")],
            &UnitRegistry::seeded(),
            &mut store,
        )
        .unwrap();
        let t = test_iri("1068553");
        let r = result_iri("98004");
        assert!(has(&store, t.clone(), vocab::et("compound"), vocab::et("chemical/877430")));
        assert!(has(&store, t.clone(), vocab::et("species"), vocab::et("taxon/5156")));
        assert!(has(&store, t, vocab::et("hasResult"), r.clone()));
        assert!(has(&store, r, vocab::et("endpoint"), vocab::et("LC50")));
        let conc = vocab::et("result/98004/concentration");
        let value = Literal::typed("400", vocab::xsd("decimal")).unwrap();
        assert!(has(&store, conc.clone(), vocab::rdf_value(), Term::Literal(value)));
        assert!(has(&store, conc, vocab::iri(vocab::UNIT, "units"), Term::literal("mg/kg diet")));
    }

    #[test]
    fn test_without_results() {
        let mut store = TripleStore::new();
        let n = ingest_tests(&[test("1", "79-06-1", "14")], &[], &UnitRegistry::seeded(), &mut store).unwrap();
        assert_eq!(n, 4);
        assert!(store.match_pattern(None, Some(&vocab::et("hasResult")), None).is_empty());
    }

    #[test]
    fn three_results_three_links() {
        let mut store = TripleStore::new();
        let results: Vec<_> = (1..=3).map(|i| result(&i.to_string(), "7", "LC50")).collect();
        ingest_tests(&[test("7", "79-06-1", "14")], &results, &UnitRegistry::seeded(), &mut store).unwrap();
        assert_eq!(store.match_pattern(None, Some(&vocab::et("hasResult")), None).len(), 3);
    }

    #[test]
    fn orphan_result_rejected() {
        let err = ingest_tests(
            &[test("1", "79-06-1", "14")],
            &[result("5", "2", "LC50")],
            &UnitRegistry::seeded(),
            &mut TripleStore::new(),
        )
        .unwrap_err();
        assert_eq!(err, EcotoxError::OrphanResult { result: "5".into(), test: "2".into() });
    }

    #[test]
    fn known_unit_becomes_iri() {
        let mut store = TripleStore::new();
        let mut r = result("1", "1", "LC10");
        r.conc1_unit = Some("mg/L".into());
        ingest_tests(&[test("1", "79-06-1", "14")], &[r], &UnitRegistry::seeded(), &mut store).unwrap();
        assert!(has(
            &store,
            vocab::et("result/1/concentration"),
            vocab::iri(vocab::UNIT, "units"),
            vocab::et("MilligramPerLiter")
        ));
    }

    #[test]
    fn lifestage_metadata() {
        let mut t = test("001", "115-86-6", "26812");
        t.metadata.push(("organism_lifestage".into(), "Adult".into()));
        let mut store = TripleStore::new();
        ingest_tests(&[t], &[], &UnitRegistry::seeded(), &mut store).unwrap();
        assert!(has(
            &store,
            vocab::et("test/001"),
            vocab::et("organismLifestage"),
            vocab::et("lifestage/adult")
        ));
    }

    #[test]
    fn concentration_forms() {
        assert_eq!(parse_concentration("400"), Concentration::Number("400".into()));
        assert_eq!(parse_concentration("1.5E-3"), Concentration::Number("1.5E-3".into()));
        assert_eq!(
            parse_concentration(">100"),
            Concentration::Qualified { value: "100".into(), qualifier: ">".into() }
        );
        assert_eq!(
            parse_concentration("400*"),
            Concentration::Qualified { value: "400".into(), qualifier: "*".into() }
        );
        assert_eq!(
            parse_concentration("10-20"),
            Concentration::Qualified { value: "10-20".into(), qualifier: "range".into() }
        );
        assert_eq!(
            parse_concentration("NaN"),
            Concentration::Qualified { value: "NaN".into(), qualifier: "unparsed".into() }
        );
    }

    #[test]
    fn negative_concentration_rejected() {
        let mut r = result("1", "1", "LC50");
        r.conc1_mean = Some("-3".into());
        let err = ingest_tests(&[test("1", "79-06-1", "14")], &[r], &UnitRegistry::seeded(), &mut TripleStore::new())
            .unwrap_err();
        assert!(matches!(err, EcotoxError::NegativeConcentration { .. }));
    }

    #[test]
    fn metadata_property_names() {
        assert_eq!(metadata_names("organism_lifestage"), ("organismLifestage".into(), "lifestage".into()));
        assert_eq!(metadata_names("media_type"), ("mediaType".into(), "type".into()));
    }
}
