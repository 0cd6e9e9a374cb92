//! The accuracy-grid experiment. One corruption per (target, seed) cell,
//! shared by every encoding, so score differences come from the encodings
//! alone. Output: a row-per-cell CSV, a JSON report, and mean LAS curves.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use linlab_core::labels::parse_label_file;
use linlab_core::linearize::{decode, encode, tree_with_heads, EncodedSentence};
use linlab_core::noise::{build_plan, corrupt, CorruptOptions, Eligibility, ErrorModel};
use linlab_core::seeding::derive_seed;
use linlab_core::tagger::train_tagger;
use linlab_core::{attachment_scores, Encoding, Error, RepairStats, Result, Treebank};

use crate::{read_predictions, read_text, read_treebank, write_text};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepConfig {
    /// Name stamped into the first CSV column
    treebank: String,
    train: PathBuf,
    /// Accepted so a standard three-way layout can be pointed at verbatim;
    /// the sweep itself never reads it
    #[serde(default)]
    dev: Option<PathBuf>,
    test: PathBuf,
    encodings: Vec<String>,
    /// Target tagging accuracies, each in [0, 1]
    grid: Vec<f64>,
    seeds: Vec<u64>,
    #[serde(default)]
    tolerance: Option<f64>,
    /// Output prefix: writes {out}.csv, {out}.json, {out}_curves.csv
    out: PathBuf,
    calibration: Calibration,
    #[serde(default)]
    skip_nonprojective: bool,
    /// Predicted label files by encoding id; listed encodings are scored on
    /// these instead of oracle labels from the gold trees
    #[serde(default)]
    labels: BTreeMap<String, PathBuf>,
}

#[derive(Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
enum Calibration {
    /// Train the frequency tagger on the train split, tag the test split
    BaselineTagger,
    /// Read a form<TAB>upos file aligned with the test split
    Predictions { path: PathBuf },
}

#[derive(Serialize)]
struct Row {
    treebank: String,
    encoding: String,
    target_acc: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    achieved_acc: Option<f64>,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    uas: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    las: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    repairs: Option<RepairStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct CurvePoint {
    encoding: String,
    target_acc: f64,
    mean_las: f64,
    seeds_used: usize,
}

#[derive(Serialize)]
struct CoverageNote {
    encoding: String,
    sentences: usize,
    skipped_sentences: usize,
    dropped_arcs: usize,
}

#[derive(Serialize)]
struct Report {
    treebank: String,
    master_seed: u64,
    tolerance: f64,
    coverage: Vec<CoverageNote>,
    rows: Vec<Row>,
    curves: Vec<CurvePoint>,
}

/// What one encoding managed to pre-encode from the gold test split.
struct Prep {
    encoding: Encoding,
    covered: Vec<usize>,
    encoded: Vec<EncodedSentence>,
    skipped: usize,
    dropped: usize,
    error: Option<String>,
}

fn empty_prep(encoding: Encoding) -> Prep {
    Prep {
        encoding,
        covered: Vec::new(),
        encoded: Vec::new(),
        skipped: 0,
        dropped: 0,
        error: None,
    }
}

/// Labels predicted by an external parser stand in for the oracle ones;
/// whatever they decode to is what gets scored.
fn prepare_from_file(encoding: Encoding, path: &Path, test: &Treebank) -> Prep {
    let mut prep = empty_prep(encoding);
    let text = match read_text(path) {
        Ok(text) => text,
        Err(e) => {
            prep.error = Some(e.to_string());
            return prep;
        }
    };
    let sentences = match parse_label_file(&text) {
        Ok(s) => s,
        Err(e) => {
            prep.error = Some(format!("{}: {e}", path.display()));
            return prep;
        }
    };
    if sentences.len() != test.sentences.len() {
        prep.error = Some(format!(
            "{}: {} sentences vs {} in the test split",
            path.display(),
            sentences.len(),
            test.sentences.len()
        ));
        return prep;
    }
    for (i, (sent, gold)) in sentences.iter().zip(&test.sentences).enumerate() {
        if sent.forms != gold.tokens.iter().map(|t| t.form.clone()).collect::<Vec<_>>() {
            prep.error = Some(format!(
                "{}: sentence {} forms do not match the test split",
                path.display(),
                i + 1
            ));
            return prep;
        }
        match sent.decode_labels(encoding) {
            Ok(encoded) => {
                prep.covered.push(i);
                prep.encoded.push(encoded);
            }
            Err(e) => {
                prep.error = Some(format!("{}: sentence {}: {e}", path.display(), i + 1));
                return prep;
            }
        }
    }
    prep
}

fn prepare(encoding: Encoding, test: &Treebank, skip_nonprojective: bool) -> Prep {
    let mut prep = empty_prep(encoding);
    for (i, tree) in test.sentences.iter().enumerate() {
        match encode(encoding, tree) {
            Ok((sent, dropped)) => {
                prep.dropped += dropped;
                prep.covered.push(i);
                prep.encoded.push(sent);
            }
            Err(Error::NotProjective) if skip_nonprojective => prep.skipped += 1,
            Err(e) => {
                prep.error = Some(format!("sentence {}: {e}", i + 1));
                return prep;
            }
        }
    }
    if prep.covered.is_empty() {
        prep.error = Some("no encodable sentences".into());
    }
    prep
}

/// Corruption outcome for one grid cell: per-sentence tag rows plus the
/// accuracy actually reached.
type CellTags = (Vec<Vec<String>>, f64);

fn sanitize(msg: &str) -> String {
    msg.replace('\n', " ")
}

pub fn cmd_sweep(
    config_path: &Path,
    master_seed: u64,
    out_override: Option<PathBuf>,
    tol_override: Option<f64>,
    label_overrides: &[(Encoding, PathBuf)],
) -> Result<()> {
    let cfg: SweepConfig = serde_json::from_str(&read_text(config_path)?)
        .map_err(|e| Error::Data(format!("{}: {e}", config_path.display())))?;
    if cfg.grid.is_empty() || cfg.seeds.is_empty() || cfg.encodings.is_empty() {
        return Err(Error::Data(
            "config needs at least one grid value, one seed, and one encoding".into(),
        ));
    }
    for &a in &cfg.grid {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::Data(format!("grid value {a} outside [0, 1]")));
        }
    }
    let encodings: Vec<Encoding> = cfg
        .encodings
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_>>()?;

    let train = read_treebank(&cfg.train)?;
    let test = read_treebank(&cfg.test)?;
    if let Some(dev) = &cfg.dev {
        read_treebank(dev)?;
    }

    let predicted = match &cfg.calibration {
        Calibration::BaselineTagger => train_tagger(&train)?.tag(&test),
        Calibration::Predictions { path } => read_predictions(&test, path)?,
    };
    let model = ErrorModel::fit(&test, &predicted)?;

    let mut label_files: BTreeMap<Encoding, PathBuf> = cfg
        .labels
        .iter()
        .map(|(id, path)| Ok((id.parse()?, path.clone())))
        .collect::<Result<_>>()?;
    label_files.extend(label_overrides.iter().cloned());

    let preps: Vec<Prep> = encodings
        .iter()
        .map(|&e| match label_files.get(&e) {
            Some(path) => prepare_from_file(e, path, &test),
            None => prepare(e, &test, cfg.skip_nonprojective),
        })
        .collect();

    // NoErrorEvidence at plan time poisons that grid value's cells, nothing else
    let plans: Vec<std::result::Result<_, String>> = cfg
        .grid
        .iter()
        .map(|&a| build_plan(&model, a).map_err(|e| e.to_string()))
        .collect();

    let mut opts = CorruptOptions::default();
    if let Some(t) = tol_override.or(cfg.tolerance) {
        opts.tolerance = t;
    }

    let cells: Vec<(usize, usize)> = (0..cfg.grid.len())
        .flat_map(|gi| (0..cfg.seeds.len()).map(move |si| (gi, si)))
        .collect();
    let outcomes: Vec<std::result::Result<CellTags, String>> = cells
        .par_iter()
        .map(|&(gi, si)| {
            let plan = plans[gi].as_ref().map_err(Clone::clone)?;
            let a = cfg.grid[gi];
            let seed = cfg.seeds[si];
            let cell_seed = derive_seed(
                master_seed,
                &[&cfg.treebank, &format!("{a}"), &seed.to_string()],
            );
            let (corrupted, achieved) =
                corrupt(&test, &model, plan, Eligibility::CalibrationSplit, cell_seed, &opts)
                    .map_err(|e| e.to_string())?;
            let tags = corrupted
                .sentences
                .iter()
                .map(|s| s.tokens.iter().map(|t| t.upos.clone()).collect())
                .collect();
            Ok((tags, achieved))
        })
        .collect();

    let mut rows = Vec::with_capacity(preps.len() * cells.len());
    for prep in &preps {
        for (&(gi, si), outcome) in cells.iter().zip(&outcomes) {
            let mut row = Row {
                treebank: cfg.treebank.clone(),
                encoding: prep.encoding.id().to_string(),
                target_acc: cfg.grid[gi],
                achieved_acc: None,
                seed: cfg.seeds[si],
                uas: None,
                las: None,
                repairs: None,
                error: None,
            };
            match (&prep.error, outcome) {
                (Some(msg), _) => row.error = Some(msg.clone()),
                (None, Err(msg)) => row.error = Some(msg.clone()),
                (None, Ok((tags, achieved))) => match score(prep, &test, tags) {
                    Ok((result, repairs)) => {
                        row.achieved_acc = Some(*achieved);
                        row.uas = Some(result.uas);
                        row.las = Some(result.las);
                        row.repairs = Some(repairs);
                    }
                    Err(e) => row.error = Some(e.to_string()),
                },
            }
            rows.push(row);
        }
    }

    let enc_rank = |id: &str| Encoding::ALL.iter().position(|e| e.id() == id).unwrap();
    rows.sort_by(|a, b| {
        a.treebank
            .cmp(&b.treebank)
            .then(enc_rank(&a.encoding).cmp(&enc_rank(&b.encoding)))
            .then(a.target_acc.total_cmp(&b.target_acc))
            .then(a.seed.cmp(&b.seed))
    });

    let curves = mean_curves(&rows);
    let coverage = preps
        .iter()
        .map(|p| CoverageNote {
            encoding: p.encoding.id().to_string(),
            sentences: p.covered.len(),
            skipped_sentences: p.skipped,
            dropped_arcs: p.dropped,
        })
        .collect();

    let prefix = out_override.unwrap_or_else(|| cfg.out.clone());
    let prefix = prefix.to_string_lossy();
    write_text(Path::new(&format!("{prefix}.csv")), &rows_csv(&rows)?)?;
    write_text(Path::new(&format!("{prefix}_curves.csv")), &curves_csv(&curves)?)?;
    let report = Report {
        treebank: cfg.treebank.clone(),
        master_seed,
        tolerance: opts.tolerance,
        coverage,
        rows,
        curves,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_text(Path::new(&format!("{prefix}.json")), &json)?;

    let failed = report.rows.iter().filter(|r| r.error.is_some()).count();
    eprintln!(
        "{} rows ({} failed) -> {prefix}.csv, {prefix}.json, {prefix}_curves.csv",
        report.rows.len(),
        failed
    );
    Ok(())
}

fn score(
    prep: &Prep,
    test: &Treebank,
    tags: &[Vec<String>],
) -> Result<(linlab_core::EvalResult, RepairStats)> {
    let mut gold = Vec::with_capacity(prep.covered.len());
    let mut decoded = Vec::with_capacity(prep.covered.len());
    let mut repairs = RepairStats::default();
    for (&i, sent) in prep.covered.iter().zip(&prep.encoded) {
        let tag_refs: Vec<&str> = tags[i].iter().map(|s| s.as_str()).collect();
        let (heads, stats) = decode(sent, &tag_refs)?;
        repairs.merge(&stats);
        gold.push(test.sentences[i].clone());
        decoded.push(tree_with_heads(&test.sentences[i], &heads, &sent.deprels));
    }
    let result = attachment_scores(
        &Treebank::new(test.name.clone(), gold),
        &Treebank::new(test.name.clone(), decoded),
    )?;
    Ok((result, repairs))
}

fn mean_curves(rows: &[Row]) -> Vec<CurvePoint> {
    let mut curves: Vec<CurvePoint> = Vec::new();
    for row in rows {
        let las = match row.las {
            Some(las) => las,
            None => continue,
        };
        match curves.last_mut() {
            Some(p) if p.encoding == row.encoding && p.target_acc == row.target_acc => {
                p.mean_las += las;
                p.seeds_used += 1;
            }
            _ => curves.push(CurvePoint {
                encoding: row.encoding.clone(),
                target_acc: row.target_acc,
                mean_las: las,
                seeds_used: 1,
            }),
        }
    }
    for p in &mut curves {
        p.mean_las /= p.seeds_used as f64;
    }
    curves
}

fn rows_csv(rows: &[Row]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| Error::Data(format!("csv: {e}"));
    w.write_record([
        "treebank",
        "encoding",
        "target_acc",
        "achieved_acc",
        "seed",
        "uas",
        "las",
        "repairs",
    ])
    .map_err(io_err)?;
    for row in rows {
        let fmt4 = |v: Option<f64>| v.map(|v| format!("{v:.4}")).unwrap_or_default();
        // a failed row keeps all eight columns; the marker sits where the
        // repair count would
        let repairs = match (&row.repairs, &row.error) {
            (Some(r), None) => r.total().to_string(),
            (_, Some(msg)) => format!("error: {}", sanitize(msg)),
            (None, None) => String::new(),
        };
        w.write_record([
            row.treebank.clone(),
            row.encoding.clone(),
            format!("{}", row.target_acc),
            fmt4(row.achieved_acc),
            row.seed.to_string(),
            fmt4(row.uas),
            fmt4(row.las),
            repairs,
        ])
        .map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Data(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

fn curves_csv(curves: &[CurvePoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| Error::Data(format!("csv: {e}"));
    w.write_record(["encoding", "target_acc", "mean_las", "seeds_used"])
        .map_err(io_err)?;
    for p in curves {
        w.write_record([
            p.encoding.clone(),
            format!("{}", p.target_acc),
            format!("{:.6}", p.mean_las),
            p.seeds_used.to_string(),
        ])
        .map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Data(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}
