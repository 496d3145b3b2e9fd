//! End-to-end composition of the ingesters, used by the command-line tool.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::alignment::{self, MappingSet, Method, StopWords};
use crate::bridge::{self, BridgeReport, RewriteRule};
use crate::ecotox::{self, EcotoxConfig, Table};
use crate::graph::{parse_into, serialize_ntriples, PrefixMap, Term, TripleStore};
use crate::ncbi;
use crate::stats::StatsReport;
use crate::traits::{self, Glossary};
use crate::units::UnitRegistry;
use crate::{vocab, Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.8;

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NcbiPaths {
    pub nodes: PathBuf,
    pub names: PathBuf,
    pub divisions: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EcotoxPaths {
    pub species: PathBuf,
    pub chemicals: PathBuf,
    pub tests: PathBuf,
    pub results: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraitPaths {
    pub table: PathBuf,
    pub glossary: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BridgeTable {
    pub pairs: PathBuf,
    pub rule: String,
}

/// Which alignment output becomes `owl:sameAs` triples in the snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmitMappings {
    #[default]
    Levenshtein,
    Consensus,
    None,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlignConfig {
    #[serde(default = "default_source_ns")]
    pub source_namespace: String,
    #[serde(default = "default_target_ns")]
    pub target_namespace: String,
    #[serde(default)]
    pub emit: EmitMappings,
    /// Interchange TSVs from external matchers.
    #[serde(default)]
    pub external: Vec<PathBuf>,
    pub reference: Option<PathBuf>,
}

fn default_source_ns() -> String {
    format!("{}taxon/", vocab::ET)
}

fn default_target_ns() -> String {
    format!("{}taxon/", vocab::NCBI)
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            source_namespace: default_source_ns(),
            target_namespace: default_target_ns(),
            emit: EmitMappings::default(),
            external: Vec::new(),
            reference: None,
        }
    }
}

/// TOML run configuration. Relative paths are resolved against the
/// directory of the configuration file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub output_dir: Option<PathBuf>,
    pub prefixes: Option<PathBuf>,
    pub units: Option<PathBuf>,
    pub stop_words: Option<PathBuf>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    pub ncbi: Option<NcbiPaths>,
    pub ecotox: Option<EcotoxPaths>,
    pub traits: Option<TraitPaths>,
    #[serde(default)]
    pub bridge: Vec<BridgeTable>,
    pub align: Option<AlignConfig>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            output_dir: None,
            prefixes: None,
            units: None,
            stop_words: None,
            threshold: DEFAULT_THRESHOLD,
            ncbi: None,
            ecotox: None,
            traits: None,
            bridge: Vec::new(),
            align: None,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let mut config: PipelineConfig = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        config.rebase(&base);
        Ok(config)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut self.output_dir, &mut self.prefixes, &mut self.units, &mut self.stop_words]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        if let Some(n) = &mut self.ncbi {
            for p in [&mut n.nodes, &mut n.names, &mut n.divisions] {
                fix(p);
            }
        }
        if let Some(e) = &mut self.ecotox {
            for p in [&mut e.species, &mut e.chemicals, &mut e.tests, &mut e.results] {
                fix(p);
            }
        }
        if let Some(t) = &mut self.traits {
            fix(&mut t.table);
            if let Some(g) = &mut t.glossary {
                fix(g);
            }
        }
        for b in &mut self.bridge {
            fix(&mut b.pairs);
        }
        if let Some(a) = &mut self.align {
            a.external.iter_mut().for_each(fix);
            if let Some(r) = &mut a.reference {
                fix(r);
            }
        }
    }

    /// Checks the threshold range and that every referenced input exists.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::Config(format!("threshold {} is outside [0,1]", self.threshold)));
        }
        let mut inputs: Vec<&PathBuf> = [&self.prefixes, &self.units, &self.stop_words].into_iter().flatten().collect();
        if let Some(n) = &self.ncbi {
            inputs.extend([&n.nodes, &n.names, &n.divisions]);
        }
        if let Some(e) = &self.ecotox {
            inputs.extend([&e.species, &e.chemicals, &e.tests, &e.results]);
        }
        if let Some(t) = &self.traits {
            inputs.push(&t.table);
            inputs.extend(&t.glossary);
        }
        inputs.extend(self.bridge.iter().map(|b| &b.pairs));
        if let Some(a) = &self.align {
            inputs.extend(&a.external);
            inputs.extend(&a.reference);
        }
        for p in inputs {
            if !p.exists() {
                return Err(Error::Config(format!("input {} does not exist", p.display())));
            }
        }
        for b in &self.bridge {
            b.rule.parse::<RewriteRule>()?;
        }
        Ok(())
    }
}

/// Machine-readable record of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunSummary {
    pub command: String,
    pub counts: BTreeMap<String, u64>,
    pub warnings: Vec<String>,
    pub timings_ms: BTreeMap<String, f64>,
}

impl RunSummary {
    pub fn new(command: &str) -> Self {
        RunSummary {
            command: command.to_string(),
            ..Self::default()
        }
    }

    pub fn count(&mut self, key: &str, n: usize) {
        *self.counts.entry(key.to_string()).or_default() += n as u64;
    }

    /// Records the wall time elapsed since `start` under `key`.
    pub fn record_time(&mut self, key: &str, start: Instant) {
        self.timings_ms
            .insert(key.to_string(), start.elapsed().as_secs_f64() * 1000.0);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Default prefixes, extended by an optional prefix TSV.
pub fn load_prefixes(path: Option<&Path>) -> Result<PrefixMap> {
    let mut map = PrefixMap::with_defaults();
    if let Some(p) = path {
        map.merge(&PrefixMap::from_tsv(&read_text(p)?)?);
    }
    Ok(map)
}

/// The seeded registry, extended by an optional unit TSV.
pub fn load_units(path: Option<&Path>, prefixes: &PrefixMap) -> Result<UnitRegistry> {
    let mut reg = UnitRegistry::seeded();
    if let Some(p) = path {
        reg.merge(UnitRegistry::from_tsv(&read_text(p)?, prefixes)?)?;
    }
    Ok(reg)
}

pub fn load_stop_words(path: Option<&Path>) -> Result<StopWords> {
    match path {
        Some(p) => Ok(StopWords::from_text(&read_text(p)?)),
        None => Ok(StopWords::default()),
    }
}

/// Parses and merges N-Triples files into one store.
pub fn load_graph(paths: &[PathBuf], prefixes: &PrefixMap) -> Result<TripleStore> {
    let mut store = TripleStore::with_prefixes(prefixes.clone());
    for p in paths {
        let text = read_text(p)?;
        parse_into(&text, &mut store).map_err(|source| Error::NTriples {
            context: p.display().to_string(),
            source,
        })?;
    }
    Ok(store)
}

pub fn ingest_ncbi(nodes: &str, names: &str, divisions: &str, prefixes: &PrefixMap, summary: &mut RunSummary) -> Result<TripleStore> {
    let mut store = TripleStore::with_prefixes(prefixes.clone());
    let node_rows = ncbi::node_rows(nodes)?;
    let cycles = ncbi::hierarchy_cycles(&node_rows);
    if !cycles.is_empty() {
        summary.warnings.push(format!("taxonomy cycles through {cycles:?}"));
    }
    summary.count("ncbi_nodes", node_rows.len());
    summary.count("triples_nodes", ncbi::ingest_nodes(&node_rows, &mut store)?);
    let name_rows = ncbi::name_rows(names)?;
    summary.count("ncbi_names", name_rows.len());
    summary.count("triples_names", ncbi::ingest_names(&name_rows, &mut store)?);
    let division_rows = ncbi::division_rows(divisions)?;
    summary.count("ncbi_divisions", division_rows.len());
    summary.count("triples_divisions", ncbi::ingest_divisions(&division_rows, &mut store)?);
    Ok(store)
}

/// Raw text of the four ECOTOX tables.
#[derive(Debug, Clone, Copy)]
pub struct EcotoxTexts<'a> {
    pub species: &'a str,
    pub chemicals: &'a str,
    pub tests: &'a str,
    pub results: &'a str,
}

/// Converts the ECOTOX tables. Definitions of registry units referenced by
/// results are added to the output.
pub fn ingest_ecotox(
    texts: EcotoxTexts,
    units: &UnitRegistry,
    prefixes: &PrefixMap,
    summary: &mut RunSummary,
) -> Result<TripleStore> {
    let config = EcotoxConfig::default();
    let mut store = TripleStore::with_prefixes(prefixes.clone());

    let (species, warnings) = ecotox::species_records(&Table::parse("species", texts.species)?, &config)?;
    summary.warnings.extend(warnings.0);
    summary.count("species", species.len());
    summary.count("triples_species", ecotox::ingest_species(&species, &mut store)?);

    let chemicals = ecotox::chemical_records(&Table::parse("chemicals", texts.chemicals)?, &config)?;
    summary.count("chemicals", chemicals.len());
    let (added, warnings) = ecotox::ingest_chemicals(&chemicals, &mut store)?;
    summary.warnings.extend(warnings.0);
    summary.count("triples_chemicals", added);

    let tests = ecotox::test_records(&Table::parse("tests", texts.tests)?, &config)?;
    let results = ecotox::result_records(&Table::parse("results", texts.results)?, &config)?;
    summary.count("tests", tests.len());
    summary.count("results", results.len());
    summary.count("triples_tests", ecotox::ingest_tests(&tests, &results, units, &mut store)?);

    let used: Vec<String> = store
        .match_pattern(None, Some(&vocab::iri(vocab::UNIT, "units")), None)
        .into_iter()
        .filter_map(|t| t.object().as_iri().map(str::to_string))
        .collect();
    let mut unit_triples = 0;
    for id in used {
        unit_triples += units.emit_unit(&id, &mut store)?;
    }
    summary.count("triples_units", unit_triples);
    Ok(store)
}

pub fn ingest_traits(table: &str, glossary: Option<&str>, prefixes: &PrefixMap, summary: &mut RunSummary) -> Result<TripleStore> {
    let mut store = TripleStore::with_prefixes(prefixes.clone());
    let rows = traits::read_traits(table, prefixes)?;
    let glossary = match glossary {
        Some(text) => Glossary::from_tsv(text, prefixes)?,
        None => Glossary::new(),
    };
    summary.count("trait_rows", rows.len());
    summary.count("triples_traits", traits::ingest_traits(&rows, &glossary, &mut store)?);
    Ok(store)
}

pub fn bridge_pairs(pairs: &str, rule: RewriteRule, prefixes: &PrefixMap, summary: &mut RunSummary) -> Result<TripleStore> {
    let mut store = TripleStore::with_prefixes(prefixes.clone());
    let pairs = bridge::read_pairs(pairs)?;
    let BridgeReport { inserted, rejected } = bridge::construct_sameas(&pairs, rule, &mut store)?;
    summary.count("pairs", pairs.len());
    summary.count("triples_sameas", inserted);
    summary.count("pairs_rejected", rejected.len());
    for (i, e) in rejected {
        summary.warnings.push(format!("pair {}: {e}", i + 1));
    }
    Ok(store)
}

/// Aligns labelled entities of the two namespaces in `store`.
pub fn align_store(
    store: &TripleStore,
    source_namespace: &str,
    target_namespace: &str,
    threshold: f64,
    stop: &StopWords,
) -> MappingSet {
    let source = alignment::labelled_entities(store, source_namespace);
    let target = alignment::labelled_entities(store, target_namespace);
    alignment::align_lexical(&source, &target, threshold, stop)
}

/// Recall of each named set, pairwise disagreement and the consensus size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub sets: Vec<(String, usize, Option<f64>)>,
    pub disagreement: Vec<Vec<usize>>,
    pub consensus: Option<usize>,
    pub consensus_recall: Option<f64>,
}

pub fn evaluate_sets(sets: &[(String, MappingSet)], reference: Option<&MappingSet>) -> Result<EvalReport> {
    let recall = |s: &MappingSet| -> Result<Option<f64>> {
        reference.map(|r| alignment::evaluate(s, r)).transpose().map_err(Error::from)
    };
    let mut rows = Vec::new();
    for (name, s) in sets {
        rows.push((name.clone(), s.len(), recall(s)?));
    }
    let disagreement = sets
        .iter()
        .map(|(_, a)| sets.iter().map(|(_, b)| alignment::disagreement(a, b)).collect())
        .collect();
    let (consensus, consensus_recall) = if sets.len() >= 2 {
        let refs: Vec<&MappingSet> = sets.iter().map(|(_, s)| s).collect();
        let c = alignment::intersect(&refs)?;
        (Some(c.len()), recall(&c)?)
    } else {
        (None, None)
    };
    Ok(EvalReport {
        sets: rows,
        disagreement,
        consensus,
        consensus_recall,
    })
}

impl EvalReport {
    pub fn to_tsv(&self) -> String {
        let names: Vec<&str> = self.sets.iter().map(|(n, _, _)| n.as_str()).collect();
        let mut out = format!("method\tmappings\trecall\t{}\n", names.join("\t"));
        for (i, (name, n, recall)) in self.sets.iter().enumerate() {
            let r = recall.map_or("-".to_string(), |r| format!("{r:.4}"));
            let d: Vec<String> = self.disagreement[i].iter().map(usize::to_string).collect();
            out.push_str(&format!("{name}\t{n}\t{r}\t{}\n", d.join("\t")));
        }
        if let Some(c) = self.consensus {
            let r = self.consensus_recall.map_or("-".to_string(), |r| format!("{r:.4}"));
            out.push_str(&format!("consensus\t{c}\t{r}{}\n", "\t-".repeat(names.len())));
        }
        out
    }
}

/// Output of a full rebuild.
#[derive(Debug)]
pub struct Build {
    pub store: TripleStore,
    pub mappings: Option<MappingSet>,
    pub summary: RunSummary,
}

/// Rebuilds the whole graph from the inputs named in `config`.
pub fn build(config: &PipelineConfig) -> Result<Build> {
    config.validate()?;
    let mut summary = RunSummary::new("update");
    let prefixes = load_prefixes(config.prefixes.as_deref())?;
    let units = load_units(config.units.as_deref(), &prefixes)?;
    let mut store = TripleStore::with_prefixes(prefixes.clone());

    if let Some(n) = &config.ncbi {
        let (nodes, names, divisions) = (read_text(&n.nodes)?, read_text(&n.names)?, read_text(&n.divisions)?);
        let start = Instant::now();
        let part = ingest_ncbi(&nodes, &names, &divisions, &prefixes, &mut summary)?;
        summary.record_time("ncbi", start);
        store.extend_from(&part)?;
    }
    if let Some(e) = &config.ecotox {
        let texts = [&e.species, &e.chemicals, &e.tests, &e.results]
            .map(|p| read_text(p))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let start = Instant::now();
        let part = ingest_ecotox(
            EcotoxTexts {
                species: &texts[0],
                chemicals: &texts[1],
                tests: &texts[2],
                results: &texts[3],
            },
            &units,
            &prefixes,
            &mut summary,
        )?;
        summary.record_time("ecotox", start);
        store.extend_from(&part)?;
    }
    if let Some(t) = &config.traits {
        let table = read_text(&t.table)?;
        let glossary = t.glossary.as_deref().map(read_text).transpose()?;
        let part = ingest_traits(&table, glossary.as_deref(), &prefixes, &mut summary)?;
        store.extend_from(&part)?;
    }
    for b in &config.bridge {
        let rule: RewriteRule = b.rule.parse()?;
        let part = bridge_pairs(&read_text(&b.pairs)?, rule, &prefixes, &mut summary)?;
        store.extend_from(&part)?;
    }

    let mut mappings = None;
    if let Some(a) = &config.align {
        let stop = load_stop_words(config.stop_words.as_deref())?;
        let start = Instant::now();
        let lexical = align_store(&store, &a.source_namespace, &a.target_namespace, config.threshold, &stop);
        summary.record_time("align", start);
        summary.count("mappings_levenshtein", lexical.len());
        let chosen = match a.emit {
            EmitMappings::Levenshtein => Some(lexical.clone()),
            EmitMappings::Consensus => {
                let mut sets = vec![lexical.clone()];
                for p in &a.external {
                    sets.push(MappingSet::from_tsv(&read_text(p)?, external_method(p))?);
                }
                let refs: Vec<&MappingSet> = sets.iter().collect();
                Some(alignment::intersect(&refs)?)
            }
            EmitMappings::None => None,
        };
        if let Some(set) = &chosen {
            summary.count("triples_mappings", alignment::emit_sameas(set, &mut store)?);
        }
        if let Some(r) = &a.reference {
            let reference = MappingSet::from_tsv(&read_text(r)?, Method::External("reference".into()))?;
            let recall = alignment::evaluate(&lexical, &reference)?;
            summary.count("reference_mappings", reference.len());
            summary
                .counts
                .insert("recall_levenshtein_permille".into(), (recall * 1000.0).round() as u64);
        }
        mappings = Some(lexical);
    }

    store.freeze();
    summary.count("triples", store.len());
    Ok(Build {
        store,
        mappings,
        summary,
    })
}

/// Method tag for an external matcher file, from its file stem.
pub fn external_method(path: &Path) -> Method {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .filter(|s| !s.is_empty())
        .unwrap_or("external");
    Method::External(stem.to_string())
}

/// Full rebuild writing `graph.nt`, `mappings.tsv` and `stats.tsv` into the
/// configured output directory. The returned summary carries timings and is
/// kept out of the snapshot so reruns stay byte-identical.
pub fn update(config: &PipelineConfig) -> Result<RunSummary> {
    let out = config
        .output_dir
        .clone()
        .ok_or_else(|| Error::Config("update needs output_dir".into()))?;
    let start = Instant::now();
    let Build {
        store,
        mappings,
        mut summary,
    } = build(config)?;
    write_text(&out.join("graph.nt"), &serialize_ntriples(&store))?;
    if let Some(m) = &mappings {
        write_text(&out.join("mappings.tsv"), &m.to_tsv())?;
    }
    match StatsReport::from_store(&store) {
        Ok(report) => write_text(&out.join("stats.tsv"), &report.to_tsv())?,
        Err(e) => summary.warnings.push(format!("stats: {e}")),
    }
    summary.record_time("total", start);
    Ok(summary)
}

/// Resolves a term given as `<iri>`, a bare IRI, a curie, or a quoted
/// N-Triples literal.
pub fn resolve_term(text: &str, prefixes: &PrefixMap) -> Result<Term> {
    if text.starts_with('"') || text.starts_with("_:") {
        return crate::graph::parse_term(text).map_err(|message| {
            Error::Config(format!("term {text:?}: {message}"))
        });
    }
    Ok(prefixes.resolve(text)?)
}
