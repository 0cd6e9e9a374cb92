//! `linlab`: treebank splitting, tagging, tag corruption, tree
//! linearization, and the accuracy-grid sweep, glued over one library.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 tolerance failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use linlab_core::labels::{
    align_predictions, parse_label_file, parse_tag_predictions, write_label_file,
    LabeledSentence,
};
use linlab_core::linearize::{decode, encode};
use linlab_core::noise::{build_plan, corrupt, CorruptOptions, Eligibility, ErrorModel};
use linlab_core::tagger::train_tagger;
use linlab_core::{
    attachment_scores, parse_conllu, write_conllu, DepTree, Encoding, Error, RepairStats,
    Result, Treebank,
};

mod sweep;

#[derive(Parser)]
#[command(name = "linlab", version, about = "dependency tree linearization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Shuffle a treebank into 60/10/30 train/dev/test files
    Split(SplitArgs),
    /// Train the frequency tagger on one file and tag another
    Tag(TagArgs),
    /// Fit a tag error model from gold trees and predicted tags
    FitErrors(FitErrorsArgs),
    /// Rewrite UPoS tags to a target accuracy under a fitted error model
    Corrupt(CorruptArgs),
    /// Turn trees into one label per token
    Encode(EncodeArgs),
    /// Turn label files back into trees
    Decode(DecodeArgs),
    /// Score a predicted treebank against gold
    Eval(EvalArgs),
    /// Run the full accuracy-grid experiment from a JSON config
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SplitArgs {
    /// CoNLL-U file to split
    file: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output prefix; defaults to the input path without its extension
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TagArgs {
    /// Training treebank (gold tags)
    #[arg(long)]
    train: PathBuf,
    /// Treebank to tag
    #[arg(long)]
    input: PathBuf,
    /// Prediction file to write (form<TAB>upos); stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitErrorsArgs {
    /// Gold treebank
    #[arg(long)]
    gold: PathBuf,
    /// Predicted tags, one form<TAB>upos line per token
    #[arg(long)]
    predictions: PathBuf,
    /// Model JSON to write; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["predictions", "model"]))]
struct CorruptArgs {
    /// Gold treebank whose tags get rewritten
    #[arg(long)]
    gold: PathBuf,
    /// Predicted tags to fit the error model on (aligned with --gold)
    #[arg(long)]
    predictions: Option<PathBuf>,
    /// Previously fitted model JSON (positions in it are ignored)
    #[arg(long, conflicts_with = "predictions")]
    model: Option<PathBuf>,
    /// Target tagging accuracy in [0, 1]
    #[arg(long)]
    target_acc: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Relative tolerance on the flipped-token count
    #[arg(long)]
    tolerance: Option<f64>,
    /// Corrupted CoNLL-U to write; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    /// CoNLL-U file to encode
    file: PathBuf,
    #[arg(long, value_parser = parse_encoding)]
    encoding: Encoding,
    /// Drop non-projective sentences instead of failing (ah_tb only needs this)
    #[arg(long)]
    skip_nonprojective: bool,
    /// Label file to write; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    /// Label file to decode
    file: PathBuf,
    #[arg(long, value_parser = parse_encoding)]
    encoding: Encoding,
    /// CoNLL-U file supplying the tags to decode against (rp_h reads them;
    /// the output carries whichever tags were used)
    #[arg(long)]
    tags: Option<PathBuf>,
    /// CoNLL-U file to write; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// csv or json
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON config; see the README for the schema
    config: PathBuf,
    /// Master seed every cell derives its stream from
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output prefix override
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tolerance override
    #[arg(long)]
    tolerance: Option<f64>,
    /// Score a predicted label file instead of oracle labels, as
    /// encoding=path; repeatable, overrides the config's labels map
    #[arg(long = "labels", value_parser = parse_label_override)]
    labels: Vec<(Encoding, PathBuf)>,
}

fn parse_encoding(s: &str) -> std::result::Result<Encoding, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_label_override(s: &str) -> std::result::Result<(Encoding, PathBuf), String> {
    let (enc, path) = s
        .split_once('=')
        .ok_or_else(|| format!("expected encoding=path, got {s:?}"))?;
    Ok((parse_encoding(enc)?, PathBuf::from(path)))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Tolerance { .. } => 3,
                _ => 2,
            })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Split(args) => cmd_split(args),
        Command::Tag(args) => cmd_tag(args),
        Command::FitErrors(args) => cmd_fit_errors(args),
        Command::Corrupt(args) => cmd_corrupt(args),
        Command::Encode(args) => cmd_encode(args),
        Command::Decode(args) => cmd_decode(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Sweep(args) => sweep::cmd_sweep(
            &args.config,
            args.seed,
            args.out,
            args.tolerance,
            &args.labels,
        ),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_treebank(path: &Path) -> Result<Treebank> {
    let mut tb = parse_conllu(&read_text(path)?)?;
    tb.name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "treebank".into());
    Ok(tb)
}

fn cmd_split(args: SplitArgs) -> Result<()> {
    let tb = read_treebank(&args.file)?;
    let (train, dev, test) = linlab_core::conllu::resplit(&tb, (0.6, 0.1, 0.3), args.seed)?;
    let prefix = args.out.unwrap_or_else(|| args.file.with_extension(""));
    let prefix = prefix.to_string_lossy();
    for (part, name) in [(&train, "train"), (&dev, "dev"), (&test, "test")] {
        write_text(Path::new(&format!("{prefix}.{name}.conllu")), &write_conllu(part))?;
    }
    eprintln!(
        "split {} sentences into {}/{}/{}",
        tb.sentences.len(),
        train.sentences.len(),
        dev.sentences.len(),
        test.sentences.len()
    );
    Ok(())
}

fn predictions_text(tb: &Treebank, tags: &[Vec<String>]) -> String {
    let mut out = String::new();
    for (sent, row) in tb.sentences.iter().zip(tags) {
        for (tok, tag) in sent.tokens.iter().zip(row) {
            out.push_str(&format!("{}\t{}\n", tok.form, tag));
        }
        out.push('\n');
    }
    out
}

fn cmd_tag(args: TagArgs) -> Result<()> {
    let train = read_treebank(&args.train)?;
    let input = read_treebank(&args.input)?;
    let model = train_tagger(&train)?;
    let predicted = model.tag(&input);
    emit(args.out.as_deref(), &predictions_text(&input, &predicted))
}

fn read_predictions(gold: &Treebank, path: &Path) -> Result<Vec<Vec<String>>> {
    let rows = parse_tag_predictions(&read_text(path)?)?;
    align_predictions(gold, &rows)
}

fn cmd_fit_errors(args: FitErrorsArgs) -> Result<()> {
    let gold = read_treebank(&args.gold)?;
    let predicted = read_predictions(&gold, &args.predictions)?;
    let model = ErrorModel::fit(&gold, &predicted)?;
    eprintln!(
        "fitted on {} tokens, {} errors",
        model.total_tokens(),
        model.total_errors()
    );
    emit(args.out.as_deref(), &model.to_json())
}

fn cmd_corrupt(args: CorruptArgs) -> Result<()> {
    let gold = read_treebank(&args.gold)?;
    // a model fitted right here pins its error positions to this very file;
    // a loaded one was fitted elsewhere, so every token is fair game
    let (model, eligibility) = match (&args.predictions, &args.model) {
        (Some(path), None) => {
            let predicted = read_predictions(&gold, path)?;
            (ErrorModel::fit(&gold, &predicted)?, Eligibility::CalibrationSplit)
        }
        (None, Some(path)) => (ErrorModel::from_json(&read_text(path)?)?, Eligibility::AllTokens),
        _ => unreachable!("clap enforces the group"),
    };
    let plan = build_plan(&model, args.target_acc)?;
    let mut opts = CorruptOptions::default();
    if let Some(t) = args.tolerance {
        opts.tolerance = t;
    }
    let (corrupted, achieved) = corrupt(&gold, &model, &plan, eligibility, args.seed, &opts)?;
    emit(args.out.as_deref(), &write_conllu(&corrupted))?;
    eprintln!("achieved {achieved:.4} (target {})", args.target_acc);
    Ok(())
}

fn cmd_encode(args: EncodeArgs) -> Result<()> {
    let tb = read_treebank(&args.file)?;
    let mut out = Vec::new();
    let mut skipped = 0usize;
    let mut dropped = 0usize;
    for (i, tree) in tb.sentences.iter().enumerate() {
        match encode(args.encoding, tree) {
            Ok((encoded, d)) => {
                dropped += d;
                out.push(LabeledSentence::from_encoded(tree, &encoded));
            }
            Err(Error::NotProjective) if args.skip_nonprojective => skipped += 1,
            Err(Error::NotProjective) => {
                return Err(Error::Invalid {
                    sentence: i + 1,
                    msg: format!(
                        "not projective; {} cannot encode it (pass --skip-nonprojective to drop such sentences)",
                        args.encoding
                    ),
                })
            }
            Err(e) => return Err(e),
        }
    }
    if skipped > 0 {
        eprintln!("skipped {skipped} non-projective sentences");
    }
    if dropped > 0 {
        eprintln!("dropped {dropped} unencodable arcs");
    }
    emit(args.out.as_deref(), &write_label_file(&out))
}

fn cmd_decode(args: DecodeArgs) -> Result<()> {
    let sentences = parse_label_file(&read_text(&args.file)?)?;
    let tag_source = match &args.tags {
        Some(path) => {
            let tb = read_treebank(path)?;
            if tb.sentences.len() != sentences.len() {
                return Err(Error::Alignment(format!(
                    "{} sentences in --tags vs {} in the label file",
                    tb.sentences.len(),
                    sentences.len()
                )));
            }
            Some(tb)
        }
        None => None,
    };

    let mut trees = Vec::with_capacity(sentences.len());
    let mut repairs = RepairStats::default();
    for (i, sent) in sentences.iter().enumerate() {
        let tags: Vec<String> = match &tag_source {
            Some(tb) => {
                if tb.sentences[i].len() != sent.len() {
                    return Err(Error::Alignment(format!(
                        "sentence {}: {} tags vs {} labels",
                        i + 1,
                        tb.sentences[i].len(),
                        sent.len()
                    )));
                }
                tb.sentences[i].tokens.iter().map(|t| t.upos.clone()).collect()
            }
            None => sent.upos.clone(),
        };
        let tag_refs: Vec<&str> = tags.iter().map(|s| s.as_str()).collect();
        let encoded = sent.decode_labels(args.encoding)?;
        let (heads, stats) = decode(&encoded, &tag_refs)?;
        repairs.merge(&stats);
        let forms: Vec<&str> = sent.forms.iter().map(|s| s.as_str()).collect();
        let rels: Vec<&str> = sent.deprels.iter().map(|s| s.as_str()).collect();
        trees.push(DepTree::from_parts(&forms, &tag_refs, &heads, &rels));
    }
    let tb = Treebank::new("decoded", trees);
    emit(args.out.as_deref(), &write_conllu(&tb))?;
    if repairs.total() > 0 {
        eprintln!("repairs: {}", repairs.total());
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let gold = read_treebank(&args.gold)?;
    let pred = read_treebank(&args.pred)?;
    let result = attachment_scores(&gold, &pred)?;
    match args.format.as_str() {
        "csv" => print!(
            "uas,las,n\n{:.4},{:.4},{}\n",
            result.uas, result.las, result.tokens
        ),
        "json" => println!(
            "{}",
            serde_json::to_string_pretty(&result).expect("result serializes")
        ),
        other => return Err(Error::Data(format!("unknown format {other:?} (csv or json)"))),
    }
    Ok(())
}
