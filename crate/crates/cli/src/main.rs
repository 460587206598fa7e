//! `clg`: generate, filter, augment and evaluate Chinese grammatical error
//! correction corpora.
//!
//! Exit codes: 0 success, 1 runtime or I/O error, 2 usage error,
//! 3 malformed input data.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use clg_core::generator::{augment_corpus, generate_corpus, thread_pool, AugmentConfig, GenConfig};
use clg_core::lm::{audit_sample, lowest_indices, perplexities, LmConfig, NGramCounter, NGramModel};
use clg_core::metrics::{
    fleiss_kappa, pairs_to_m2, parse_m2, score_corpus, type_table, ScoreParams, StatsAccumulator, TypeEditAccumulator,
};
use clg_core::rules::RuleResources;
use clg_core::tagging::{Tagger, TaggerConfig, TaggerMode};
use clg_core::text::{CorpusPair, FineType, TaggedSentence};
use clg_core::{Error, ErrorKind};

const LINES_PER_BATCH: usize = 4096;

#[derive(Parser)]
#[command(name = "clg", version, about = "Rule-based corpus generation and evaluation for Chinese grammatical error correction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Keep the lowest-perplexity share of a corpus under a character n-gram model.
    Filter(FilterArgs),
    /// Turn correct sentences into labeled ungrammatical pairs with the rule set.
    Generate(GenerateArgs),
    /// Random word-level corruption baseline.
    Augment(AugmentArgs),
    /// Corpus statistics and per-type edit counts for a pair file.
    Stats(StatsArgs),
    /// MaxMatch (M²) precision, recall and F-score.
    Score(ScoreArgs),
    /// Fleiss' kappa for an items × categories count matrix.
    Kappa(KappaArgs),
    /// Draw a reproducible uniform sample of lines.
    Sample(SampleArgs),
}

#[derive(Args)]
struct TaggingArgs {
    /// Input lines are `word/TAG word/TAG ...` instead of raw text.
    #[arg(long)]
    pretagged: bool,
    /// Segmentation lexicon (`surface<TAB>tag` lines); defaults to `<resources>/lexicon.tsv`.
    #[arg(long, value_name = "FILE")]
    lexicon: Option<PathBuf>,
    /// External tag → universal tag table; defaults to the builtin THULAC mapping.
    #[arg(long, value_name = "FILE")]
    tag_mapping: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Correct sentences, one per line.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// JSON-lines pair output; standard output when absent.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Generation report (JSON); defaults to `<output>.report.json` when `--output` is set.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Also write the pairs as character-tokenized M² gold (score with `--char-tokenize`).
    #[arg(long, value_name = "FILE")]
    m2: Option<PathBuf>,
    /// Rule resource directory.
    #[arg(long, env = "CLG_RESOURCES", value_name = "DIR")]
    resources: PathBuf,
    /// Base seed; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// TOML file; its `[generate]` table holds generation settings.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Comma-separated rule ids to enable (default: all 26).
    #[arg(long, value_delimiter = ',', value_name = "IDS")]
    rules: Option<Vec<String>>,
    /// Pairs to attempt per sentence.
    #[arg(long)]
    per_sentence: Option<usize>,
    /// Maximum number of rules stacked in one pair.
    #[arg(long)]
    combine_max: Option<usize>,
    #[command(flatten)]
    tagging: TaggingArgs,
}

#[derive(Args)]
struct AugmentArgs {
    /// Correct sentences, one per line.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// JSON-lines pair output; standard output when absent.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Operation counts (JSON).
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Words used for random insertion and replacement, one per line; defaults to the lexicon's words.
    #[arg(long, value_name = "FILE")]
    pool: Option<PathBuf>,
    /// Resource directory, used only to locate the default lexicon.
    #[arg(long, env = "CLG_RESOURCES", value_name = "DIR")]
    resources: Option<PathBuf>,
    /// Base seed; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// TOML file; its `[augment]` table holds p_keep, p_insert, p_replace and p_delete.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[command(flatten)]
    tagging: TaggingArgs,
}

#[derive(Args)]
struct FilterArgs {
    /// Sentences to filter, one per line.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Kept sentences in input order; standard output when absent.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Load this model instead of training one.
    #[arg(long, value_name = "FILE", conflicts_with = "train")]
    model: Option<PathBuf>,
    /// Training corpus (default: the input itself).
    #[arg(long, value_name = "FILE")]
    train: Option<PathBuf>,
    /// Write the trained model here.
    #[arg(long, value_name = "FILE")]
    save_model: Option<PathBuf>,
    /// Percentage of sentences to keep, in (0, 100].
    #[arg(long)]
    keep: Option<f64>,
    /// N-gram order.
    #[arg(long)]
    order: Option<usize>,
    /// Additive smoothing constant.
    #[arg(long)]
    alpha: Option<f64>,
    /// TOML file; its `[filter]` table holds keep, order and alpha.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct StatsArgs {
    /// JSON-lines pair file.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Also write both reports as one JSON object.
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    /// System output, one sentence per line.
    #[arg(long, value_name = "FILE")]
    hyp: PathBuf,
    /// Gold M² file.
    #[arg(long, value_name = "FILE")]
    m2: PathBuf,
    /// Source sentences; checked against the gold `S` lines.
    #[arg(long, value_name = "FILE")]
    source: Option<PathBuf>,
    /// F-score weight.
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Unchanged tokens allowed inside one system edit.
    #[arg(long, default_value_t = 2)]
    max_unchanged: usize,
    /// Split hypotheses into characters instead of on whitespace.
    #[arg(long)]
    char_tokenize: bool,
    /// JSON report output.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct KappaArgs {
    /// One item per line: whitespace-separated counts per category.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Raters per item (default: the first row's total).
    #[arg(long)]
    raters: Option<u64>,
}

#[derive(Args)]
struct SampleArgs {
    /// Lines to sample from.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Output of `index<TAB>line` rows; standard output when absent.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Sample size.
    #[arg(long, short = 'k', default_value_t = 1000)]
    count: usize,
    /// Sampling seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    generate: Option<GenConfig>,
    augment: Option<AugmentSection>,
    filter: Option<FilterSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct AugmentSection {
    seed: Option<u64>,
    p_keep: Option<f64>,
    p_insert: Option<f64>,
    p_replace: Option<f64>,
    p_delete: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FilterSection {
    keep: Option<f64>,
    order: Option<usize>,
    alpha: Option<f64>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn runtime(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        Failure::runtime(format!("{}: {e}", path.display()))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Io | ErrorKind::Config => 1,
            ErrorKind::Parse | ErrorKind::Validation => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Filter(a) => filter(a),
        Command::Generate(a) => generate(a),
        Command::Augment(a) => augment(a),
        Command::Stats(a) => stats(a),
        Command::Score(a) => score(a),
        Command::Kappa(a) => kappa(a),
        Command::Sample(a) => sample(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("clg: error[{}]: {}", f.code, f.message.replace('\n', " "));
            ExitCode::from(f.code)
        }
    }
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Failure::io(path, e))
}

fn read_to_string(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn create(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Failure::io(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    std::fs::write(path, text + "\n").map_err(|e| Failure::io(path, e))
}

fn load_config(path: Option<&Path>) -> CliResult<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => toml::from_str(&read_to_string(p)?)
            .map_err(|e| Failure::runtime(format!("{}: {}", p.display(), e.message()))),
    }
}

fn build_tagger(args: &TaggingArgs, resources: Option<&Path>) -> CliResult<Tagger> {
    let lexicon = args
        .lexicon
        .clone()
        .or_else(|| resources.map(|r| r.join("lexicon.tsv")));
    let mode = if args.pretagged {
        TaggerMode::PretaggedInput
    } else {
        TaggerMode::BuiltinLexicon
    };
    let lexicon_path = match mode {
        TaggerMode::PretaggedInput => lexicon.filter(|p| p.exists()),
        TaggerMode::BuiltinLexicon => lexicon,
    };
    Ok(Tagger::from_config(&TaggerConfig {
        mode,
        lexicon_path,
        tag_mapping_path: args.tag_mapping.clone(),
    })?)
}

/// Non-blank input lines, tagged, with file/line context on failure.
fn tagged_lines<'a>(
    path: &'a Path,
    tagger: &'a Tagger,
) -> CliResult<impl Iterator<Item = clg_core::Result<TaggedSentence>> + 'a> {
    let origin = path.display().to_string();
    Ok(open(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(move |(n, line)| {
            let line = line.map_err(|e| Error::Io {
                path: origin.clone().into(),
                source: e,
            })?;
            tagger.tag_line(&line).map_err(|e| Error::Parse {
                origin: origin.clone(),
                line: n + 1,
                message: e.to_string(),
            })
        }))
}

fn generate(args: GenerateArgs) -> CliResult {
    let file = load_config(args.config.as_deref())?;
    let mut config = file.generate.unwrap_or_default();
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(ids) = &args.rules {
        config.enabled_rules = ids
            .iter()
            .map(|id| {
                id.trim()
                    .parse::<FineType>()
                    .map_err(|_| Failure::runtime(format!("unknown rule id `{id}`")))
            })
            .collect::<CliResult<_>>()?;
    }
    if let Some(n) = args.per_sentence {
        config.per_sentence = n;
    }
    if let Some(n) = args.combine_max {
        config.combine_max = n;
    }
    let resources = RuleResources::load(&args.resources)?;
    let tagger = build_tagger(&args.tagging, Some(&args.resources))?;
    let mut out = create(args.output.as_deref())?;
    let out_path = args.output.clone();
    let mut gold = args.m2.as_deref().map(|p| create(Some(p))).transpose()?;
    let report = generate_corpus(
        tagged_lines(&args.input, &tagger)?,
        &config,
        &resources,
        args.workers,
        |pair| {
            writeln!(out, "{}", pair.to_json_line()).map_err(|e| Error::Io {
                path: out_path.clone().unwrap_or_else(|| "<stdout>".into()),
                source: e,
            })?;
            if let Some(g) = gold.as_mut() {
                let block = pairs_to_m2(std::slice::from_ref(pair))?;
                g.write_all(block.as_bytes()).map_err(|e| Error::Io {
                    path: args.m2.clone().unwrap_or_default(),
                    source: e,
                })?;
            }
            Ok(())
        },
    )?;
    out.flush().map_err(|e| Failure::runtime(format!("output: {e}")))?;
    if let Some(g) = gold.as_mut() {
        g.flush().map_err(|e| Failure::runtime(format!("m2 output: {e}")))?;
    }
    let report_path = args
        .report
        .or_else(|| args.output.as_ref().map(|o| PathBuf::from(format!("{}.report.json", o.display()))));
    if let Some(p) = report_path {
        write_json(&p, &report)?;
    }
    eprintln!(
        "clg: {} sentences read, {} pairs written, {} attempts skipped",
        report.sentences_read, report.pairs_emitted, report.skipped
    );
    Ok(())
}

fn augment(args: AugmentArgs) -> CliResult {
    let file = load_config(args.config.as_deref())?;
    let section = file.augment.unwrap_or_default();
    let defaults = AugmentConfig::default();
    let tagger = build_tagger(&args.tagging, args.resources.as_deref())?;
    let word_pool = match &args.pool {
        Some(p) => read_to_string(p)?
            .lines()
            .map(str::trim)
            .filter(|w| !w.is_empty())
            .map(String::from)
            .collect(),
        None => tagger.lexicon().surfaces(),
    };
    let config = AugmentConfig {
        p_keep: section.p_keep.unwrap_or(defaults.p_keep),
        p_insert: section.p_insert.unwrap_or(defaults.p_insert),
        p_replace: section.p_replace.unwrap_or(defaults.p_replace),
        p_delete: section.p_delete.unwrap_or(defaults.p_delete),
        word_pool,
        seed: args.seed.or(section.seed).unwrap_or(0),
    };
    let mut out = create(args.output.as_deref())?;
    let out_path = args.output.clone();
    let counts = augment_corpus(tagged_lines(&args.input, &tagger)?, &config, args.workers, |pair| {
        writeln!(out, "{}", pair.to_json_line()).map_err(|e| Error::Io {
            path: out_path.clone().unwrap_or_else(|| "<stdout>".into()),
            source: e,
        })
    })?;
    out.flush().map_err(|e| Failure::runtime(format!("output: {e}")))?;
    if let Some(p) = &args.report {
        write_json(p, &counts)?;
    }
    Ok(())
}

fn lines_of(path: &Path) -> CliResult<impl Iterator<Item = CliResult<String>> + '_> {
    Ok(open(path)?
        .lines()
        .map(move |l| l.map_err(|e| Failure::io(path, e))))
}

fn filter(args: FilterArgs) -> CliResult {
    let file = load_config(args.config.as_deref())?.filter.unwrap_or_default();
    let keep = args.keep.or(file.keep).unwrap_or(90.0);
    let defaults = LmConfig::default();
    let lm_config = LmConfig {
        order: args.order.or(file.order).unwrap_or(defaults.order),
        alpha: args.alpha.or(file.alpha).unwrap_or(defaults.alpha),
    };
    lm_config.validate()?;
    let pool = thread_pool(args.workers)?;
    let model = match &args.model {
        Some(p) => NGramModel::load(open(p)?, &p.display().to_string())?,
        None => {
            let source = args.train.as_deref().unwrap_or(&args.input);
            let mut counter = NGramCounter::new(lm_config.order);
            for line in lines_of(source)? {
                counter.add_sentence(line?.trim_end_matches('\r'));
            }
            counter.finish(&lm_config)?
        }
    };
    if let Some(p) = &args.save_model {
        let mut w = create(Some(p))?;
        model.save(&mut w).and_then(|_| w.flush()).map_err(|e| Failure::io(p, e))?;
    }

    let mut scores = Vec::new();
    let mut batch = Vec::with_capacity(LINES_PER_BATCH);
    let mut lines = lines_of(&args.input)?;
    loop {
        batch.clear();
        for line in lines.by_ref() {
            batch.push(line?.trim_end_matches('\r').to_string());
            if batch.len() == LINES_PER_BATCH {
                break;
            }
        }
        if batch.is_empty() {
            break;
        }
        scores.extend(pool.install(|| perplexities(&batch, &model)));
    }
    let kept = lowest_indices(&scores, keep)?;
    let mut out = create(args.output.as_deref())?;
    let mut next = kept.iter().peekable();
    for (i, line) in lines_of(&args.input)?.enumerate() {
        let line = line?;
        if next.peek() == Some(&&i) {
            next.next();
            writeln!(out, "{}", line.trim_end_matches('\r')).map_err(|e| Failure::runtime(format!("output: {e}")))?;
        }
    }
    out.flush().map_err(|e| Failure::runtime(format!("output: {e}")))?;
    eprintln!("clg: kept {} of {} sentences", kept.len(), scores.len());
    Ok(())
}

fn stats(args: StatsArgs) -> CliResult {
    let mut corpus = StatsAccumulator::default();
    let mut types = TypeEditAccumulator::default();
    for (n, line) in lines_of(&args.input)?.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let pair = CorpusPair::from_json_line(&line)
            .map_err(|e| Failure::invalid(format!("{}:{}: {e}", args.input.display(), n + 1)))?;
        corpus.add(&pair);
        types.add(&pair);
    }
    let report = corpus.finish();
    let rows = types.finish();
    print!("{}\n{}", report.to_table(), type_table(&rows));
    if let Some(p) = &args.json {
        let per_type: serde_json::Map<String, serde_json::Value> = rows
            .iter()
            .map(|(k, v)| (k.as_str().to_string(), serde_json::to_value(v).expect("row serializes")))
            .collect();
        write_json(p, &serde_json::json!({ "corpus": report, "per_type": per_type }))?;
    }
    Ok(())
}

fn score(args: ScoreArgs) -> CliResult {
    let gold = parse_m2(&read_to_string(&args.m2)?, &args.m2.display().to_string())?;
    let read_lines = |p: &Path| -> CliResult<Vec<String>> {
        Ok(read_to_string(p)?
            .lines()
            .map(|l| l.trim_end_matches('\r').to_string())
            .collect())
    };
    let hyps = read_lines(&args.hyp)?;
    let sources = args.source.as_deref().map(read_lines).transpose()?;
    let params = ScoreParams {
        beta: args.beta,
        max_unchanged: args.max_unchanged,
        char_tokenize: args.char_tokenize,
    };
    let report = score_corpus(&hyps, &gold, sources.as_deref(), &params)?;
    print!("{}", report.summary_lines());
    if let Some(p) = &args.report {
        write_json(p, &report)?;
    }
    Ok(())
}

fn kappa(args: KappaArgs) -> CliResult {
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for (n, line) in lines_of(&args.input)?.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|c| c.parse::<u64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Failure::invalid(format!("{}:{}: {e}", args.input.display(), n + 1)))?;
        rows.push(row);
    }
    let raters = args
        .raters
        .or_else(|| rows.first().map(|r| r.iter().sum()))
        .unwrap_or(0);
    let k = fleiss_kappa(&rows, raters)?;
    println!("Fleiss' kappa : {k:.4}");
    Ok(())
}

fn sample(args: SampleArgs) -> CliResult {
    let lines = lines_of(&args.input)?.collect::<CliResult<Vec<String>>>()?;
    let picked = audit_sample(lines, args.count, args.seed);
    let mut out = create(args.output.as_deref())?;
    for (i, line) in picked {
        writeln!(out, "{i}\t{line}").map_err(|e| Failure::runtime(format!("output: {e}")))?;
    }
    out.flush().map_err(|e| Failure::runtime(format!("output: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn config_sections_parse() {
        let c: FileConfig = toml::from_str(
            "[generate]\ncombine_max = 2\nenabled_rules = [\"LackSubject\"]\n[generate.rule_weights]\nLackSubject = 2.0\n[filter]\nkeep = 80\n",
        )
        .unwrap();
        let g = c.generate.unwrap();
        assert_eq!(g.combine_max, 2);
        assert_eq!(g.per_sentence, 1);
        assert_eq!(g.weight(FineType::LackSubject), 2.0);
        assert_eq!(c.filter.unwrap().keep, Some(80.0));
        assert!(toml::from_str::<FileConfig>("[generate]\nbogus = 1\n").is_err());
    }

    #[test]
    fn core_errors_map_to_exit_codes() {
        assert_eq!(Failure::from(Error::Config("x".into())).code, 1);
        assert_eq!(Failure::from(Error::Validation("x".into())).code, 3);
        let parse = Error::Parse {
            origin: "f".into(),
            line: 2,
            message: "bad".into(),
        };
        assert_eq!(Failure::from(parse).code, 3);
    }
}
