use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spellir_core::census::{self, oov_census};
use spellir_core::corpus::{build_vocabulary, load_jsonl, save_jsonl, Passage, QueryRecord};
use spellir_core::correct::{ConfusablePairs, Corrector, CorrectorConfig, Lexicon, Method};
use spellir_core::error::HarnessError;
use spellir_core::harness::report::{emit_csv, emit_markdown, write_outputs};
use spellir_core::harness::{
    grid_cells, CellSpec, Condition, CorrectedQuery, Datasets, Experiment, GridReport, RunConfig,
    Settings,
};
use spellir_core::retrieval::{format_run, RetrieverKind};
use spellir_core::symspell::DeleteIndex;
use spellir_core::synthetic::{SyntheticConfig, SyntheticData};

#[derive(Parser, Debug)]
#[command(name = "spellir", version, about = "Query spelling correction and lexical retrieval experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count spelling errors in queries against their paraphrases.
    Census(CensusArgs),
    /// Build the corpus vocabulary and write it as `word<TAB>count`.
    BuildVocab(VocabArgs),
    /// Correct queries with one method and write them with the token log.
    Correct(CorrectArgs),
    /// Build and save the delete-variant index.
    Index(VocabArgs),
    /// Run one grid cell.
    Run(RunArgs),
    /// Run the whole grid and write every artifact.
    Grid(GridArgs),
    /// Categorize a method's corrections against the paraphrases.
    Analyze(CorrectArgs),
    /// Re-render `report.md` and `metrics.csv` from a saved `report.json`.
    Report(ReportArgs),
    /// Write a synthetic dataset for trying the pipeline.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
struct CorpusArgs {
    #[arg(long, env = "SPELLIR_PASSAGES")]
    passages: PathBuf,
    #[arg(long, env = "SPELLIR_MIN_FREQ", default_value_t = 2)]
    min_freq: u64,
}

#[derive(Args, Debug)]
struct CensusArgs {
    #[arg(long, env = "SPELLIR_QUERIES")]
    queries: PathBuf,
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Queries without paraphrases whose error rate is estimated from OOV counts.
    #[arg(long, env = "SPELLIR_UNPAIRED")]
    unpaired: Option<PathBuf>,
    #[arg(long, env = "SPELLIR_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VocabArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, env = "SPELLIR_OUT")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CorrectArgs {
    #[arg(long, env = "SPELLIR_QUERIES")]
    queries: PathBuf,
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, env = "SPELLIR_METHOD", default_value = "edit_distance")]
    method: Method,
    #[arg(long, env = "SPELLIR_BLACKLIST")]
    blacklist: Option<PathBuf>,
    #[arg(long, env = "SPELLIR_SEED", default_value_t = 42)]
    seed: u64,
    #[arg(long, env = "SPELLIR_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DataArgs {
    #[arg(long, env = "SPELLIR_QUERIES")]
    queries: PathBuf,
    #[arg(long, env = "SPELLIR_PASSAGES")]
    passages: PathBuf,
    #[arg(long, env = "SPELLIR_JUDGMENTS")]
    judgments: PathBuf,
    #[arg(long, env = "SPELLIR_BLACKLIST")]
    blacklist: Option<PathBuf>,
    #[arg(long, env = "SPELLIR_K", default_value_t = 20)]
    k: usize,
    #[arg(long, env = "SPELLIR_SEED", default_value_t = 42)]
    seed: u64,
    #[arg(long, env = "SPELLIR_MIN_FREQ", default_value_t = 2)]
    min_freq: u64,
    #[arg(long, env = "SPELLIR_OUT")]
    out: PathBuf,
}

impl DataArgs {
    fn settings(&self) -> Settings {
        Settings {
            k: self.k,
            seed: self.seed,
            min_freq: self.min_freq,
            ..Settings::default()
        }
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, env = "SPELLIR_RETRIEVER", default_value = "bm25")]
    retriever: RetrieverKind,
    #[arg(long, env = "SPELLIR_METHOD")]
    method: Option<Method>,
    #[arg(long, env = "SPELLIR_CONDITION", default_value = "exp2")]
    condition: Condition,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Restrict to these methods (repeatable).
    #[arg(long, env = "SPELLIR_METHOD", value_delimiter = ',')]
    method: Vec<Method>,
    /// Restrict to these retrievers (repeatable).
    #[arg(long, env = "SPELLIR_RETRIEVER", value_delimiter = ',')]
    retriever: Vec<RetrieverKind>,
    /// Where corrected corpora are kept between runs.
    #[arg(long, env = "SPELLIR_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Directory holding `report.json`.
    #[arg(long, env = "SPELLIR_OUT")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, env = "SPELLIR_SEED", default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    large: bool,
    #[arg(long, env = "SPELLIR_OUT")]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), HarnessError> {
    match cmd {
        Command::Census(a) => cmd_census(a),
        Command::BuildVocab(a) => cmd_build_vocab(a),
        Command::Correct(a) => cmd_correct(a),
        Command::Index(a) => cmd_index(a),
        Command::Run(a) => cmd_run(a),
        Command::Grid(a) => cmd_grid(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Report(a) => cmd_report(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

fn require(path: &Path, what: &str) -> Result<(), HarnessError> {
    if path.exists() {
        Ok(())
    } else {
        Err(HarnessError::InvalidConfig(format!(
            "{what} file {} does not exist",
            path.display()
        )))
    }
}

fn load_passages(c: &CorpusArgs) -> Result<Vec<Passage>, HarnessError> {
    require(&c.passages, "passages")?;
    Ok(load_jsonl(&c.passages)?)
}

fn load_queries(path: &Path) -> Result<Vec<QueryRecord>, HarnessError> {
    require(path, "queries")?;
    Ok(load_jsonl(path)?)
}

fn load_blacklist(path: Option<&Path>) -> Result<ConfusablePairs, HarnessError> {
    match path {
        Some(p) => {
            require(p, "blacklist")?;
            Ok(ConfusablePairs::load(p)?)
        }
        None => Ok(ConfusablePairs::new()),
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    fs::write(path, content).map_err(|e| HarnessError::io(path, e))
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), HarnessError> {
    match out {
        Some(p) => write_file(p, content),
        None => io::stdout()
            .write_all(content.as_bytes())
            .map_err(|e| HarnessError::io(Path::new("<stdout>"), e)),
    }
}

fn cmd_census(a: CensusArgs) -> Result<(), HarnessError> {
    let queries = load_queries(&a.queries)?;
    let vocab = build_vocabulary(&load_passages(&a.corpus)?, a.corpus.min_freq)?;
    let report = census::census(&queries, &vocab)?;
    let mut value = serde_json::json!({ "census": report.census });
    if let Some(path) = &a.unpaired {
        let unpaired = load_queries(path)?;
        let oov = oov_census(&unpaired, &vocab)?;
        let y = report.census.yield_ratio.ok_or(spellir_core::CensusError::NoFlags)?;
        let estimate = census::calibrate(oov.oov_rate, y)?;
        value["unpaired"] = serde_json::json!({ "oov": oov, "calibrated": estimate });
    }
    emit(a.out.as_deref(), &(serde_json::to_string_pretty(&value)? + "\n"))
}

fn cmd_build_vocab(a: VocabArgs) -> Result<(), HarnessError> {
    let vocab = build_vocabulary(&load_passages(&a.corpus)?, a.corpus.min_freq)?;
    let mut text = String::new();
    for (w, f) in vocab.iter() {
        text.push_str(&format!("{w}\t{f}\n"));
    }
    write_file(&a.out, &text)?;
    eprintln!("{} terms, fingerprint {}", vocab.total_types(), vocab.fingerprint());
    Ok(())
}

fn cmd_index(a: VocabArgs) -> Result<(), HarnessError> {
    let vocab = build_vocabulary(&load_passages(&a.corpus)?, a.corpus.min_freq)?;
    let index = DeleteIndex::build(&vocab, 2)?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    index.save(&a.out)?;
    eprintln!("{} delete keys over {} terms", index.len(), vocab.total_types());
    Ok(())
}

fn corrected_queries(a: &CorrectArgs) -> Result<(Vec<QueryRecord>, Vec<CorrectedQuery>), HarnessError> {
    let queries = load_queries(&a.queries)?;
    let passages = load_passages(&a.corpus)?;
    let vocab = build_vocabulary(&passages, a.corpus.min_freq)?;
    let lexicon = Lexicon::build(vocab, &passages)?;
    let blacklist = load_blacklist(a.blacklist.as_deref())?;
    let corrector = Corrector::new(CorrectorConfig::for_method(a.method), &lexicon, &blacklist)?;
    let cache = corrector.build_cache(queries.iter().map(|q| q.original_text.as_str()));
    let out = queries
        .iter()
        .map(|q| {
            let c = corrector.correct_text_cached(&q.original_text, &cache);
            CorrectedQuery {
                query_id: q.id.clone(),
                text: c.text,
                corrections: c.corrections,
            }
        })
        .collect();
    Ok((queries, out))
}

fn cmd_correct(a: CorrectArgs) -> Result<(), HarnessError> {
    let (_, corrected) = corrected_queries(&a)?;
    let modified = corrected
        .iter()
        .filter(|q| q.corrections.iter().any(|c| c.changed))
        .count();
    match &a.out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
            }
            save_jsonl(&corrected, p)?;
        }
        None => {
            let mut text = String::new();
            for q in &corrected {
                text.push_str(&serde_json::to_string(q)?);
                text.push('\n');
            }
            emit(None, &text)?;
        }
    }
    eprintln!("{}: {modified}/{} queries modified", a.method, corrected.len());
    Ok(())
}

fn cmd_analyze(a: CorrectArgs) -> Result<(), HarnessError> {
    use spellir_core::harness::{error_analysis, LoggedCorrection};
    use std::collections::{BTreeMap, HashSet};

    let (queries, corrected) = corrected_queries(&a)?;
    let paraphrases: BTreeMap<String, HashSet<String>> = queries
        .iter()
        .filter_map(|q| {
            q.paraphrase_text.as_ref().map(|p| {
                let words = spellir_core::corpus::tokenize_words(p).into_iter().collect();
                (q.id.clone(), words)
            })
        })
        .collect();
    let log: Vec<LoggedCorrection> = corrected
        .iter()
        .flat_map(|q| {
            q.corrections
                .iter()
                .enumerate()
                .filter(|(_, c)| c.changed)
                .map(|(position, c)| LoggedCorrection {
                    query_id: q.query_id.clone(),
                    position,
                    correction: c.clone(),
                })
        })
        .collect();
    let analysis = error_analysis(a.method, &log, &paraphrases, 100, a.seed)?;
    emit(a.out.as_deref(), &(serde_json::to_string_pretty(&analysis)? + "\n"))
}

fn run_config(a: &RunArgs) -> RunConfig {
    RunConfig {
        queries: a.data.queries.clone(),
        passages: a.data.passages.clone(),
        judgments: a.data.judgments.clone(),
        blacklist: a.data.blacklist.clone(),
        retriever: a.retriever,
        method: a.method,
        condition: a.condition,
        settings: a.data.settings(),
        out: a.data.out.clone(),
    }
}

fn cmd_run(a: RunArgs) -> Result<(), HarnessError> {
    let cfg = run_config(&a);
    let exp = cfg.experiment()?;
    let spec: CellSpec = cfg.spec();
    let cell = exp.run_cell(spec)?;
    let report = GridReport {
        settings: exp.settings.clone(),
        n_queries: exp.all_queries.len(),
        n_eval_queries: exp.eval_queries.len(),
        n_passages: exp.passages.len(),
        vocabulary_size: exp.lexicon.vocab.total_types(),
        word_types: exp.word_type_count(),
        census: None,
        cells: vec![spellir_core::harness::CellSummary {
            spec,
            row: cell.row.clone(),
        }],
        modifications: Vec::new(),
        analyses: Vec::new(),
        intervals: Vec::new(),
    };
    let tag = spec.tag();
    let out = &cfg.out;
    write_file(&out.join(format!("{tag}.run")), &format_run(&cell.runs, &tag))?;
    write_file(&out.join("metrics.csv"), &emit_csv(&report))?;
    write_file(&out.join("report.md"), &emit_markdown(&report))?;
    if let Some(m) = spec.method.filter(|_| spec.condition.query_corrected()) {
        let log = exp.corrections(m)?.log();
        save_jsonl(&log, &out.join(format!("corrections_{m}.jsonl")))?;
    }
    print!("{}", emit_csv(&report));
    Ok(())
}

fn cmd_grid(a: GridArgs) -> Result<(), HarnessError> {
    let d = &a.data;
    for (p, what) in [(&d.queries, "queries"), (&d.passages, "passages"), (&d.judgments, "judgments")] {
        require(p, what)?;
    }
    let data = Datasets::load(&d.queries, &d.passages, &d.judgments)?;
    let blacklist = load_blacklist(d.blacklist.as_deref())?;
    let mut exp = Experiment::new(data, d.settings(), blacklist)?;
    if let Some(dir) = &a.cache_dir {
        exp = exp.with_cache_dir(dir);
    }
    let methods = if a.method.is_empty() { Method::ALL.to_vec() } else { a.method.clone() };
    let retrievers = if a.retriever.is_empty() {
        RetrieverKind::ALL.to_vec()
    } else {
        a.retriever.clone()
    };
    log::info!("running {} cells", grid_cells(&methods, &retrievers).len());
    let (report, cells) = exp.full_report(&methods, &retrievers)?;
    write_outputs(&d.out, &exp, &report, &cells)?;
    print!("{}", emit_csv(&report));
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<(), HarnessError> {
    let path = a.out.join("report.json");
    require(&path, "report")?;
    let text = fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
    let report: GridReport = serde_json::from_str(&text)?;
    if report.cells.is_empty() {
        return Err(HarnessError::InvalidConfig("report has no cells".into()));
    }
    write_file(&a.out.join("report.md"), &emit_markdown(&report))?;
    write_file(&a.out.join("metrics.csv"), &emit_csv(&report))?;
    print!("{}", emit_markdown(&report));
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<(), HarnessError> {
    let base = if a.large { SyntheticConfig::large() } else { SyntheticConfig::small() };
    let data = SyntheticData::generate(&SyntheticConfig { seed: a.seed, ..base });
    fs::create_dir_all(&a.out).map_err(|e| HarnessError::io(&a.out, e))?;
    save_jsonl(&data.queries, &a.out.join("queries.jsonl"))?;
    save_jsonl(&data.passages, &a.out.join("passages.jsonl"))?;
    save_jsonl(&data.judgments, &a.out.join("judgments.jsonl"))?;
    eprintln!(
        "{} queries, {} passages, {} judgments in {}",
        data.queries.len(),
        data.passages.len(),
        data.judgments.len(),
        a.out.display()
    );
    Ok(())
}
