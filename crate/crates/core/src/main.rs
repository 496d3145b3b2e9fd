use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use ecokg::alignment::{self, MappingSet, Method};
use ecokg::bridge::RewriteRule;
use ecokg::graph::{serialize_ntriples, PrefixMap, TripleStore};
use ecokg::pipeline::{self, EcotoxTexts, PipelineConfig, RunSummary};
use ecokg::query::{self, QueryOutput};
use ecokg::stats::StatsReport;
use ecokg::units::{self, UnitRegistry};
use ecokg::{Error, Result};

#[derive(Parser)]
#[command(name = "ecokg", version, about = "Build, align and query an ecotoxicology knowledge graph")]
struct Cli {
    /// TOML pipeline configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Prefix TSV (label, namespace); overrides the config file
    #[arg(long, global = true)]
    prefixes: Option<PathBuf>,
    /// Where to write the JSON run summary
    #[arg(long, global = true)]
    summary: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Output file; stdout when omitted
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Graphs {
    /// N-Triples input, repeatable
    #[arg(short, long = "graph", required = true)]
    graphs: Vec<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatsFormat {
    Tsv,
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Convert NCBI taxonomy dump files to N-Triples
    IngestNcbi {
        #[arg(long)]
        nodes: Option<PathBuf>,
        #[arg(long)]
        names: Option<PathBuf>,
        #[arg(long)]
        divisions: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Convert ECOTOX species, chemical, test and result tables
    IngestEcotox {
        #[arg(long)]
        species: Option<PathBuf>,
        #[arg(long)]
        chemicals: Option<PathBuf>,
        #[arg(long)]
        tests: Option<PathBuf>,
        #[arg(long)]
        results: Option<PathBuf>,
        /// Unit registry TSV
        #[arg(long)]
        units: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Convert a trait table, resolving values through a glossary
    IngestTraits {
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        glossary: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Emit unit definitions, or convert a value between units
    Units {
        #[arg(long)]
        units: Option<PathBuf>,
        /// Value to convert; needs --from and --to (abbreviations or ids)
        #[arg(long, requires_all = ["from", "to"])]
        convert: Option<f64>,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// Lexically align two taxonomies found in the input graphs
    Align {
        #[command(flatten)]
        graphs: Graphs,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        source_namespace: Option<String>,
        #[arg(long)]
        target_namespace: Option<String>,
        #[arg(long)]
        stop_words: Option<PathBuf>,
        /// Also write accepted mappings as owl:sameAs N-Triples
        #[arg(long)]
        emit: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Recall, disagreement and consensus of mapping sets
    EvalMappings {
        /// Mapping TSVs, repeatable
        #[arg(short, long = "mappings", required = true)]
        mappings: Vec<PathBuf>,
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Write the consensus set as interchange TSV
        #[arg(long)]
        consensus: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Build owl:sameAs links from an external id table
    Bridge {
        #[arg(long)]
        pairs: PathBuf,
        /// cas, ncbi or verbatim
        #[arg(long)]
        rule: String,
        #[command(flatten)]
        out: Output,
    },
    /// Merge graphs into one canonically sorted N-Triples file
    Export {
        #[command(flatten)]
        graphs: Graphs,
        #[command(flatten)]
        out: Output,
    },
    /// Run a SELECT or CONSTRUCT mini-query
    Query {
        #[command(flatten)]
        graphs: Graphs,
        /// Query file
        #[arg(long, conflicts_with = "text")]
        file: Option<PathBuf>,
        /// Inline query text
        #[arg(long)]
        text: Option<String>,
        /// Compact IRIs in SELECT output
        #[arg(long)]
        compact: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Evaluate a property path
    Path {
        #[command(flatten)]
        graphs: Graphs,
        #[arg(long)]
        path: String,
        #[arg(long)]
        start: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// Rank entities by label similarity to a name
    Lookup {
        #[command(flatten)]
        graphs: Graphs,
        #[arg(long)]
        name: String,
        #[arg(short, long, default_value_t = 10)]
        k: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Ancestors (and optionally siblings) of a taxon
    Lineage {
        #[command(flatten)]
        graphs: Graphs,
        #[arg(long)]
        taxon: String,
        #[arg(long)]
        siblings: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Triple, relation and entity counts with density measures
    Stats {
        #[command(flatten)]
        graphs: Graphs,
        #[arg(long, value_enum, default_value_t = StatsFormat::Text)]
        format: StatsFormat,
        #[command(flatten)]
        out: Output,
    },
    /// Rebuild the whole graph from the inputs named in --config
    Update {
        /// Overrides output_dir from the config
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let class = e.class();
            eprintln!("{e}");
            println!("error: {}", class.as_str());
            ExitCode::from(class.exit_code() as u8)
        }
    }
}

fn emit(out: &Output, text: &str) -> Result<()> {
    match &out.output {
        Some(p) => pipeline::write_text(p, text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn required(flag: Option<PathBuf>, from_config: Option<&PathBuf>, name: &str) -> Result<PathBuf> {
    flag.or_else(|| from_config.cloned())
        .ok_or_else(|| Error::Config(format!("missing --{name} (and no value in the config)")))
}

struct Ctx {
    config: PipelineConfig,
    prefixes: PrefixMap,
    summary_path: Option<PathBuf>,
}

impl Ctx {
    fn graph(&self, graphs: &Graphs) -> Result<TripleStore> {
        let mut store = pipeline::load_graph(&graphs.graphs, &self.prefixes)?;
        store.freeze();
        Ok(store)
    }

    fn finish(&self, mut summary: RunSummary, start: Instant) -> Result<()> {
        summary.record_time("total", start);
        for w in &summary.warnings {
            warn!("{w}");
        }
        match &self.summary_path {
            Some(p) => pipeline::write_text(p, &summary.to_json()),
            None => {
                info!("{}", summary.to_json());
                Ok(())
            }
        }
    }
}

fn load_mappings(path: &Path) -> Result<MappingSet> {
    Ok(MappingSet::from_tsv(&pipeline::read_text(path)?, pipeline::external_method(path))?)
}

fn find_unit<'a>(reg: &'a UnitRegistry, key: &str, prefixes: &PrefixMap) -> Result<&'a units::UnitDef> {
    reg.by_abbreviation(key)
        .or_else(|| {
            let iri = prefixes.resolve(key).ok()?;
            reg.get(iri.as_iri()?)
        })
        .ok_or_else(|| Error::Config(format!("unknown unit {key:?}")))
}

fn run(cli: Cli) -> Result<()> {
    let start = Instant::now();
    let config = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    let prefix_path = cli.prefixes.clone().or_else(|| config.prefixes.clone());
    let prefixes = pipeline::load_prefixes(prefix_path.as_deref())?;
    let mut ctx = Ctx {
        config,
        prefixes,
        summary_path: cli.summary.clone(),
    };

    match cli.command {
        Command::IngestNcbi { nodes, names, divisions, out } => {
            let n = ctx.config.ncbi.as_ref();
            let nodes = required(nodes, n.map(|n| &n.nodes), "nodes")?;
            let names = required(names, n.map(|n| &n.names), "names")?;
            let divisions = required(divisions, n.map(|n| &n.divisions), "divisions")?;
            let mut summary = RunSummary::new("ingest-ncbi");
            let store = pipeline::ingest_ncbi(
                &pipeline::read_text(&nodes)?,
                &pipeline::read_text(&names)?,
                &pipeline::read_text(&divisions)?,
                &ctx.prefixes,
                &mut summary,
            )?;
            summary.count("triples", store.len());
            emit(&out, &serialize_ntriples(&store))?;
            ctx.finish(summary, start)
        }
        Command::IngestEcotox { species, chemicals, tests, results, units, out } => {
            let e = ctx.config.ecotox.as_ref();
            let paths = [
                required(species, e.map(|e| &e.species), "species")?,
                required(chemicals, e.map(|e| &e.chemicals), "chemicals")?,
                required(tests, e.map(|e| &e.tests), "tests")?,
                required(results, e.map(|e| &e.results), "results")?,
            ];
            let texts = paths.iter().map(|p| pipeline::read_text(p)).collect::<Result<Vec<_>>>()?;
            let unit_path = units.or_else(|| ctx.config.units.clone());
            let registry = pipeline::load_units(unit_path.as_deref(), &ctx.prefixes)?;
            let mut summary = RunSummary::new("ingest-ecotox");
            let store = pipeline::ingest_ecotox(
                EcotoxTexts {
                    species: &texts[0],
                    chemicals: &texts[1],
                    tests: &texts[2],
                    results: &texts[3],
                },
                &registry,
                &ctx.prefixes,
                &mut summary,
            )?;
            summary.count("triples", store.len());
            emit(&out, &serialize_ntriples(&store))?;
            ctx.finish(summary, start)
        }
        Command::IngestTraits { table, glossary, out } => {
            let t = ctx.config.traits.as_ref();
            let table = required(table, t.map(|t| &t.table), "table")?;
            let glossary = glossary.or_else(|| t.and_then(|t| t.glossary.clone()));
            let glossary_text = glossary.as_deref().map(pipeline::read_text).transpose()?;
            let mut summary = RunSummary::new("ingest-traits");
            let store = pipeline::ingest_traits(
                &pipeline::read_text(&table)?,
                glossary_text.as_deref(),
                &ctx.prefixes,
                &mut summary,
            )?;
            summary.count("triples", store.len());
            emit(&out, &serialize_ntriples(&store))?;
            ctx.finish(summary, start)
        }
        Command::Units { units, convert, from, to, out } => {
            let unit_path = units.or_else(|| ctx.config.units.clone());
            let registry = pipeline::load_units(unit_path.as_deref(), &ctx.prefixes)?;
            let mut summary = RunSummary::new("units");
            summary.count("units", registry.len());
            if let (Some(v), Some(from), Some(to)) = (convert, from, to) {
                let a = find_unit(&registry, &from, &ctx.prefixes)?;
                let b = find_unit(&registry, &to, &ctx.prefixes)?;
                let r = units::convert(v, a, b)?;
                emit(&out, &format!("{r}\n"))?;
            } else {
                let mut store = TripleStore::with_prefixes(ctx.prefixes.clone());
                summary.count("triples", registry.emit_all(&mut store)?);
                emit(&out, &serialize_ntriples(&store))?;
            }
            ctx.finish(summary, start)
        }
        Command::Align {
            graphs,
            threshold,
            source_namespace,
            target_namespace,
            stop_words,
            emit: emit_path,
            out,
        } => {
            let store = ctx.graph(&graphs)?;
            let threshold = threshold.unwrap_or(ctx.config.threshold);
            if !(0.0..=1.0).contains(&threshold) {
                return Err(Error::Config(format!("threshold {threshold} is outside [0,1]")));
            }
            let defaults = ctx.config.align.clone().unwrap_or_default();
            let stop_path = stop_words.or_else(|| ctx.config.stop_words.clone());
            let stop = pipeline::load_stop_words(stop_path.as_deref())?;
            let set = pipeline::align_store(
                &store,
                &source_namespace.unwrap_or(defaults.source_namespace),
                &target_namespace.unwrap_or(defaults.target_namespace),
                threshold,
                &stop,
            );
            let mut summary = RunSummary::new("align");
            summary.count("mappings", set.len());
            emit(&out, &set.to_tsv())?;
            if let Some(p) = emit_path {
                let mut links = TripleStore::with_prefixes(ctx.prefixes.clone());
                summary.count("triples", alignment::emit_sameas(&set, &mut links)?);
                pipeline::write_text(&p, &serialize_ntriples(&links))?;
            }
            ctx.finish(summary, start)
        }
        Command::EvalMappings { mappings, reference, consensus, out } => {
            let sets = mappings
                .iter()
                .map(|p| {
                    let name = p.file_stem().map_or("mappings".into(), |s| s.to_string_lossy().into_owned());
                    Ok((name, load_mappings(p)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let reference = reference
                .map(|p| -> Result<MappingSet> {
                    Ok(MappingSet::from_tsv(&pipeline::read_text(&p)?, Method::External("reference".into()))?)
                })
                .transpose()?;
            let report = pipeline::evaluate_sets(&sets, reference.as_ref())?;
            emit(&out, &report.to_tsv())?;
            let mut summary = RunSummary::new("eval-mappings");
            summary.count("sets", sets.len());
            if let Some(p) = consensus {
                let refs: Vec<&MappingSet> = sets.iter().map(|(_, s)| s).collect();
                let c = alignment::intersect(&refs)?;
                summary.count("consensus", c.len());
                pipeline::write_text(&p, &c.to_tsv())?;
            }
            ctx.finish(summary, start)
        }
        Command::Bridge { pairs, rule, out } => {
            let rule: RewriteRule = rule.parse()?;
            let mut summary = RunSummary::new("bridge");
            let store = pipeline::bridge_pairs(&pipeline::read_text(&pairs)?, rule, &ctx.prefixes, &mut summary)?;
            emit(&out, &serialize_ntriples(&store))?;
            ctx.finish(summary, start)
        }
        Command::Export { graphs, out } => {
            let store = ctx.graph(&graphs)?;
            let mut summary = RunSummary::new("export");
            summary.count("triples", store.len());
            emit(&out, &serialize_ntriples(&store))?;
            ctx.finish(summary, start)
        }
        Command::Query { graphs, file, text, compact, out } => {
            let text = match (file, text) {
                (Some(p), _) => pipeline::read_text(&p)?,
                (None, Some(t)) => t,
                (None, None) => return Err(Error::Config("query needs --file or --text".into())),
            };
            let store = ctx.graph(&graphs)?;
            let q = query::parse_query(&text, &ctx.prefixes)?;
            let mut summary = RunSummary::new("query");
            match query::run_query(&store, &q)? {
                QueryOutput::Table(sol) => {
                    summary.count("rows", sol.len());
                    let tsv = if compact { sol.to_tsv_compact(&ctx.prefixes) } else { sol.to_tsv() };
                    emit(&out, &tsv)?;
                }
                QueryOutput::Graph(g) => {
                    summary.count("triples", g.len());
                    emit(&out, &serialize_ntriples(&g))?;
                }
            }
            ctx.finish(summary, start)
        }
        Command::Path { graphs, path, start: from, out } => {
            let store = ctx.graph(&graphs)?;
            let expr = query::parse_path(&path, &ctx.prefixes)?;
            let from = from.map(|s| pipeline::resolve_term(&s, &ctx.prefixes)).transpose()?;
            let pairs = query::eval_path(&store, from.as_ref(), &expr);
            let mut text = String::from("start\tend\n");
            for (a, b) in &pairs {
                text.push_str(&format!("{a}\t{b}\n"));
            }
            emit(&out, &text)?;
            let mut summary = RunSummary::new("path");
            summary.count("pairs", pairs.len());
            ctx.finish(summary, start)
        }
        Command::Lookup { graphs, name, k, out } => {
            if k == 0 {
                return Err(Error::Config("k must be at least 1".into()));
            }
            let store = ctx.graph(&graphs)?;
            let ranked = query::fuzzy_lookup(&store, &name, k);
            let mut text = String::from("entity\tscore\n");
            for (t, s) in &ranked {
                text.push_str(&format!("{t}\t{s:.6}\n"));
            }
            emit(&out, &text)?;
            let mut summary = RunSummary::new("lookup");
            summary.count("hits", ranked.len());
            ctx.finish(summary, start)
        }
        Command::Lineage { graphs, taxon, siblings, out } => {
            let store = ctx.graph(&graphs)?;
            let taxon = pipeline::resolve_term(&taxon, &ctx.prefixes)?;
            let mut text = String::new();
            let ancestors = query::lineage(&store, &taxon)?;
            for (depth, a) in ancestors.iter().enumerate() {
                text.push_str(&format!("ancestor\t{}\t{a}\n", depth + 1));
            }
            let mut summary = RunSummary::new("lineage");
            summary.count("ancestors", ancestors.len());
            if siblings {
                let sibs = query::siblings(&store, &taxon)?;
                for s in &sibs {
                    text.push_str(&format!("sibling\t-\t{s}\n"));
                }
                summary.count("siblings", sibs.len());
            }
            emit(&out, &text)?;
            ctx.finish(summary, start)
        }
        Command::Stats { graphs, format, out } => {
            let store = ctx.graph(&graphs)?;
            let report = StatsReport::from_store(&store)?;
            let text = match format {
                StatsFormat::Tsv => report.to_tsv(),
                StatsFormat::Text => report.to_text(),
                StatsFormat::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
            };
            emit(&out, &text)?;
            let mut summary = RunSummary::new("stats");
            summary.count("triples", store.len());
            ctx.finish(summary, start)
        }
        Command::Update { output_dir } => {
            if cli.config.is_none() {
                return Err(Error::Config("update needs --config".into()));
            }
            if let Some(d) = output_dir {
                ctx.config.output_dir = Some(d);
            }
            if let Some(p) = &cli.prefixes {
                ctx.config.prefixes = Some(p.clone());
            }
            let summary = pipeline::update(&ctx.config)?;
            ctx.finish(summary, start)
        }
    }
}
