use std::collections::BTreeSet;

use super::{
    emit_pairwise_disjoint, group_local_name, is_id, lineage_iri, primary_group, species_iri,
    EcotoxConfig, EcotoxError, Table, Warnings,
};
use crate::graph::{Term, TripleStore};
use crate::vocab;

/// Columns of the species file that are not lineage levels.
const SPECIES_METADATA: &[&str] = &[
    "species_number",
    "common_name",
    "latin_name",
    "ecotox_group",
    "ncbi_taxid",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineageLevel {
    pub level: String,
    pub name: Option<String>,
}

impl LineageLevel {
    pub fn new(level: &str, name: Option<&str>) -> Self {
        LineageLevel {
            level: level.to_string(),
            name: name.map(str::to_string),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeciesRecord {
    pub species_number: String,
    pub common_name: Option<String>,
    pub latin_name: Option<String>,
    pub ecotox_group: Option<String>,
    /// Highest level first.
    pub lineage: Vec<LineageLevel>,
}

/// Drops unidentified-species and variant tokens; `None` for missing values.
pub fn clean_species_name(raw: &str, config: &EcotoxConfig) -> Option<String> {
    if config.is_missing(raw) {
        return None;
    }
    let cleaned = raw
        .split_whitespace()
        .filter(|tok| {
            !config
                .name_filter_tokens
                .iter()
                .any(|f| f.eq_ignore_ascii_case(tok))
        })
        .collect::<Vec<_>>()
        .join(" ");
    (!cleaned.is_empty() && !config.is_missing(&cleaned)).then_some(cleaned)
}

/// Fills every empty level below the highest filled one with the name of
/// its nearest filled ancestor followed by the level name.
pub fn synthesize_lineage(
    species: &str,
    lineage: &[LineageLevel],
) -> Result<Vec<LineageLevel>, EcotoxError> {
    let first = lineage
        .iter()
        .position(|l| l.name.is_some())
        .ok_or_else(|| EcotoxError::EmptyLineage(species.to_string()))?;
    let mut out = lineage.to_vec();
    for i in first + 1..out.len() {
        if out[i].name.is_none() {
            let parent = out[i - 1].name.as_deref().expect("filled by induction");
            out[i].name = Some(format!("{parent} {}", out[i].level));
        }
    }
    Ok(out)
}

/// Reads, cleans and lineage-completes the species table.
///
/// Rows without any usable name or lineage are dropped with a warning.
pub fn species_records(
    table: &Table,
    config: &EcotoxConfig,
) -> Result<(Vec<SpeciesRecord>, Warnings), EcotoxError> {
    let number_col = table.require("species_number")?;
    let common_col = table.column("common_name");
    let latin_col = table.column("latin_name");
    let group_col = table.column("ecotox_group");
    let levels: Vec<(usize, &str)> = table
        .header
        .iter()
        .enumerate()
        .filter(|(_, h)| !SPECIES_METADATA.contains(&h.as_str()))
        .map(|(i, h)| (i, h.as_str()))
        .collect();

    let mut records = Vec::with_capacity(table.rows.len());
    let mut warnings = Warnings::default();
    let mut seen = BTreeSet::new();
    for (row_idx, row) in table.rows.iter().enumerate() {
        let number = row[number_col].trim();
        if !is_id(number) {
            return Err(EcotoxError::Table {
                table: table.name.clone(),
                line: row_idx + 2,
                message: format!("species_number {number:?} is not a positive integer"),
            });
        }
        if !seen.insert(number.to_string()) {
            return Err(EcotoxError::DuplicateId {
                kind: "species",
                id: number.to_string(),
            });
        }
        let name_at = |col: Option<usize>| col.and_then(|c| clean_species_name(&row[c], config));
        let common_name = name_at(common_col);
        let latin_name = name_at(latin_col);
        if common_name.is_none() && latin_name.is_none() {
            warnings.push(format!("species {number}: no usable name, skipped"));
            continue;
        }
        let lineage: Vec<LineageLevel> = levels
            .iter()
            .map(|&(c, level)| LineageLevel {
                level: level.to_string(),
                name: clean_species_name(&row[c], config),
            })
            .collect();
        let lineage = match synthesize_lineage(number, &lineage) {
            Ok(l) => l,
            Err(e) => {
                warnings.push(format!("{e}, skipped"));
                continue;
            }
        };
        records.push(SpeciesRecord {
            species_number: number.to_string(),
            common_name,
            latin_name,
            ecotox_group: group_col.and_then(|c| config.cell(&row[c])).and_then(|g| primary_group(&g)),
            lineage,
        });
    }
    Ok((records, warnings))
}

fn level_rank(level: &str) -> Term {
    let mut chars = level.trim().chars();
    let mut local = String::new();
    if let Some(c) = chars.next() {
        local.extend(c.to_uppercase());
    }
    local.extend(chars.map(|c| if c.is_alphanumeric() { c } else { '_' }));
    vocab::et(&local)
}

/// Emits the species taxonomy: leaf labels and group, the lineage chain up
/// to the highest filled level, and pairwise disjointness between groups.
pub fn ingest_species(records: &[SpeciesRecord], store: &mut TripleStore) -> Result<usize, EcotoxError> {
    let subclass = vocab::rdfs_subclass_of();
    let label = vocab::rdfs_label();
    let rank = vocab::et("rank");
    let mut groups: Vec<Term> = Vec::new();
    let mut added = 0;
    let mut add = |store: &mut TripleStore, s: Term, p: Term, o: Term| -> Result<(), EcotoxError> {
        added += usize::from(store.add(s, p, o)?);
        Ok(())
    };

    for rec in records {
        let leaf = species_iri(&rec.species_number);
        add(store, leaf.clone(), vocab::rdf_type(), vocab::et("Taxon"))?;
        if let Some(name) = &rec.common_name {
            add(store, leaf.clone(), label.clone(), Term::literal(name.clone()))?;
            add(store, leaf.clone(), vocab::et("commonName"), Term::literal(name.clone()))?;
        }
        if let Some(name) = &rec.latin_name {
            add(store, leaf.clone(), label.clone(), Term::literal(name.clone()))?;
            add(store, leaf.clone(), vocab::et("latinName"), Term::literal(name.clone()))?;
        }
        if let Some(group) = &rec.ecotox_group {
            let g = vocab::et(&format!("group/{}", group_local_name(group)));
            if !groups.contains(&g) {
                groups.push(g.clone());
            }
            add(store, leaf.clone(), vocab::et("ecotoxGroup"), g)?;
        }

        let mut parent: Option<Term> = None;
        for level in &rec.lineage {
            let Some(name) = &level.name else { continue };
            let node = lineage_iri(name).ok_or_else(|| EcotoxError::UnresolvableParent {
                species: rec.species_number.clone(),
                name: name.clone(),
            })?;
            add(store, node.clone(), rank.clone(), level_rank(&level.level))?;
            add(store, node.clone(), label.clone(), Term::literal(name.clone()))?;
            if let Some(p) = &parent {
                if p != &node {
                    add(store, node.clone(), subclass.clone(), p.clone())?;
                }
            }
            parent = Some(node);
        }
        let parent = parent.ok_or_else(|| EcotoxError::EmptyLineage(rec.species_number.clone()))?;
        add(store, leaf, subclass.clone(), parent)?;
    }
    added += emit_pairwise_disjoint(&groups, store)?;
    Ok(added)
}
