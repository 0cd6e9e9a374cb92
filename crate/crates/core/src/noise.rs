//! Tag-noise injection calibrated on a real tagger's mistakes.
//!
//! An [`ErrorModel`] counts, per gold tag t, how often a tagger got it wrong
//! (E_t of C_t) and what it confused it with. A [`CorruptionPlan`] rescales
//! those per-tag error rates by gamma = E_A / E so the expected error count
//! hits the target E_A = round((1 - A) * N), capping tags whose scaled rate
//! would pass 1 and redistributing their shortfall over the rest.

use std::collections::{BTreeMap, BTreeSet};

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conllu::Treebank;
use crate::error::{Error, Result};
use crate::seeding;

/// Per-tag error statistics of one tagger run over one treebank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorModel {
    counts: BTreeMap<String, u64>,
    errors: BTreeMap<String, u64>,
    confusion: BTreeMap<String, BTreeMap<String, u64>>,
    real_errors: BTreeSet<(usize, usize)>,
    total_tokens: u64,
    total_errors: u64,
}

impl ErrorModel {
    /// Counts mismatches between gold tags and an aligned prediction.
    pub fn fit(gold: &Treebank, predicted: &[Vec<String>]) -> Result<ErrorModel> {
        if gold.sentences.len() != predicted.len() {
            return Err(Error::Alignment(format!(
                "{} sentences vs {} predicted tag rows",
                gold.sentences.len(),
                predicted.len()
            )));
        }
        let mut model = ErrorModel::empty();
        for (si, (sent, tags)) in gold.sentences.iter().zip(predicted).enumerate() {
            if sent.len() != tags.len() {
                return Err(Error::Alignment(format!(
                    "sentence {}: {} tokens vs {} predicted tags",
                    si + 1,
                    sent.len(),
                    tags.len()
                )));
            }
            for (tok, pred) in sent.tokens.iter().zip(tags) {
                model.total_tokens += 1;
                *model.counts.entry(tok.upos.clone()).or_default() += 1;
                if *pred != tok.upos {
                    model.total_errors += 1;
                    *model.errors.entry(tok.upos.clone()).or_default() += 1;
                    *model
                        .confusion
                        .entry(tok.upos.clone())
                        .or_default()
                        .entry(pred.clone())
                        .or_default() += 1;
                    model.real_errors.insert((si, tok.index));
                }
            }
        }
        Ok(model)
    }

    /// Builds a model from bare counts, for callers with an external
    /// confusion table. Error counts are the confusion row sums; no
    /// real-error positions are recorded.
    pub fn from_counts(
        counts: &[(&str, u64)],
        confusion: &[(&str, &str, u64)],
    ) -> Result<ErrorModel> {
        let mut model = ErrorModel::empty();
        for (tag, c) in counts {
            if model.counts.insert(tag.to_string(), *c).is_some() {
                return Err(Error::data(format!("duplicate tag {tag:?} in counts")));
            }
            model.total_tokens += c;
        }
        for (tag, wrong, k) in confusion {
            *model
                .confusion
                .entry(tag.to_string())
                .or_default()
                .entry(wrong.to_string())
                .or_default() += k;
            *model.errors.entry(tag.to_string()).or_default() += k;
            model.total_errors += k;
        }
        for (tag, e) in &model.errors {
            let c = model.counts.get(tag).copied().unwrap_or(0);
            if *e > c {
                return Err(Error::data(format!(
                    "tag {tag:?} has {e} errors but only {c} tokens"
                )));
            }
        }
        Ok(model)
    }

    fn empty() -> ErrorModel {
        ErrorModel {
            counts: BTreeMap::new(),
            errors: BTreeMap::new(),
            confusion: BTreeMap::new(),
            real_errors: BTreeSet::new(),
            total_tokens: 0,
            total_errors: 0,
        }
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn total_errors(&self) -> u64 {
        self.total_errors
    }

    pub fn count(&self, tag: &str) -> u64 {
        self.counts.get(tag).copied().unwrap_or(0)
    }

    pub fn error_count(&self, tag: &str) -> u64 {
        self.errors.get(tag).copied().unwrap_or(0)
    }

    /// p(error | tag): observed per-tag error rate.
    pub fn error_rate(&self, tag: &str) -> f64 {
        let c = self.count(tag);
        if c == 0 {
            0.0
        } else {
            self.error_count(tag) as f64 / c as f64
        }
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(|s| s.as_str())
    }

    /// Whether the calibration tagger mispredicted this position.
    /// `sentence` is 0-based, `token` is the 1-based CoNLL-U index.
    pub fn is_real_error(&self, sentence: usize, token: usize) -> bool {
        self.real_errors.contains(&(sentence, token))
    }

    /// Draws a wrong tag from p(e | tag, error). None if the model never
    /// saw this tag fail.
    fn sample_confusion(&self, tag: &str, rng: &mut ChaCha8Rng) -> Option<&str> {
        let row = self.confusion.get(tag)?;
        let weights: Vec<u64> = row.values().copied().collect();
        let i = seeding::pick_weighted(rng, &weights);
        row.keys().nth(i).map(|s| s.as_str())
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format: 1,
            counts: self.counts.clone(),
            errors: self.errors.clone(),
            confusion: self.confusion.clone(),
            real_error_positions: self.real_errors.iter().copied().collect(),
            totals: ModelTotals {
                tokens: self.total_tokens,
                errors: self.total_errors,
            },
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<ErrorModel> {
        let file: ModelFile = serde_json::from_str(text)
            .map_err(|e| Error::data(format!("bad model document: {e}")))?;
        if file.format != 1 {
            return Err(Error::data(format!(
                "unsupported model format {}",
                file.format
            )));
        }
        let model = ErrorModel {
            counts: file.counts,
            errors: file.errors,
            confusion: file.confusion,
            real_errors: file.real_error_positions.into_iter().collect(),
            total_tokens: file.totals.tokens,
            total_errors: file.totals.errors,
        };
        model.check()?;
        Ok(model)
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Data(msg));
        if self.counts.values().sum::<u64>() != self.total_tokens {
            return bad("token counts do not sum to the stated total".into());
        }
        if self.errors.values().sum::<u64>() != self.total_errors {
            return bad("error counts do not sum to the stated total".into());
        }
        for (tag, e) in &self.errors {
            if *e > self.count(tag) {
                return bad(format!("tag {tag:?} has more errors than tokens"));
            }
            let row: u64 = self
                .confusion
                .get(tag)
                .map(|r| r.values().sum())
                .unwrap_or(0);
            if row != *e {
                return bad(format!("confusion row for {tag:?} does not sum to E"));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: u32,
    counts: BTreeMap<String, u64>,
    errors: BTreeMap<String, u64>,
    confusion: BTreeMap<String, BTreeMap<String, u64>>,
    real_error_positions: Vec<(usize, usize)>,
    totals: ModelTotals,
}

#[derive(Serialize, Deserialize)]
struct ModelTotals {
    tokens: u64,
    errors: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanMode {
    /// Target error count at or below the observed one; only real errors flip.
    Shrink,
    /// Target above the observed count; real errors always flip, correctly
    /// tagged tokens absorb the surplus.
    Grow,
}

/// Per-tag corruption probabilities for one target accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionPlan {
    pub target: f64,
    /// E_A: target error count over the model's N tokens.
    pub target_errors: u64,
    /// Final rate multiplier after capping.
    pub gamma: f64,
    pub mode: PlanMode,
    /// Tags whose scaled rate passed 1; they flip with probability 1.
    pub capped: BTreeSet<String>,
    /// Flip probability per tag when every token is eligible.
    pub per_tag: BTreeMap<String, f64>,
    /// Extra flip probability on correctly tagged tokens in grow mode.
    pub grow_extra: BTreeMap<String, f64>,
}

/// Scales the model's error rates to a target accuracy `a`, capping
/// overflowing tags and redistributing iteratively.
pub fn build_plan(model: &ErrorModel, a: f64) -> Result<CorruptionPlan> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::data(format!("target accuracy {a} outside [0, 1]")));
    }
    if model.total_tokens == 0 {
        return Err(Error::data("empty model"));
    }
    let e_a = ((1.0 - a) * model.total_tokens as f64).round() as u64;
    let mut plan = CorruptionPlan {
        target: a,
        target_errors: e_a,
        gamma: 0.0,
        mode: PlanMode::Shrink,
        capped: BTreeSet::new(),
        per_tag: BTreeMap::new(),
        grow_extra: BTreeMap::new(),
    };
    if e_a == 0 {
        return Ok(plan);
    }
    let e = model.total_errors;
    if e == 0 {
        return Err(Error::NoErrorEvidence {
            target: a,
            demanded: e_a,
            capacity: 0,
        });
    }
    plan.mode = if e_a > e { PlanMode::Grow } else { PlanMode::Shrink };

    // Cap iteratively: gamma = (E_A - sum of capped C_t) / (E - capped E_t),
    // in exact integer arithmetic so capping decisions never ride on float
    // rounding.
    loop {
        let c_capped: u64 = plan.capped.iter().map(|t| model.count(t)).sum();
        let e_capped: u64 = plan.capped.iter().map(|t| model.error_count(t)).sum();
        let remaining_errors = e - e_capped;
        if remaining_errors == 0 {
            // every tag with evidence is saturated and demand remains
            return Err(Error::NoErrorEvidence {
                target: a,
                demanded: e_a,
                capacity: c_capped,
            });
        }
        let remaining_target = (e_a - c_capped) as i128;
        plan.gamma = remaining_target as f64 / remaining_errors as f64;
        let mut newly: Vec<String> = Vec::new();
        for (tag, &e_t) in &model.errors {
            if e_t == 0 || plan.capped.contains(tag) {
                continue;
            }
            let c_t = model.count(tag);
            if remaining_target * e_t as i128 > (c_t as i128) * (remaining_errors as i128) {
                newly.push(tag.clone());
            }
        }
        if newly.is_empty() {
            break;
        }
        plan.capped.extend(newly);
    }

    for (tag, &e_t) in &model.errors {
        if e_t == 0 {
            continue;
        }
        let c_t = model.count(tag);
        if plan.capped.contains(tag) {
            plan.per_tag.insert(tag.clone(), 1.0);
            continue;
        }
        plan.per_tag
            .insert(tag.clone(), (plan.gamma * e_t as f64 / c_t as f64).min(1.0));
        if plan.mode == PlanMode::Grow && c_t > e_t {
            let extra = ((plan.gamma - 1.0) * e_t as f64 / (c_t - e_t) as f64).min(1.0);
            plan.grow_extra.insert(tag.clone(), extra);
        }
    }
    Ok(plan)
}

/// Which tokens a corruption pass may touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Eligibility {
    /// The split the model was fitted on: its real-error positions anchor
    /// the plan (shrink flips only those; grow always flips them).
    CalibrationSplit,
    /// Any other split: every token of a modeled tag is eligible.
    AllTokens,
}

#[derive(Debug, Clone, Copy)]
pub struct CorruptOptions {
    /// Relative tolerance on the achieved error count.
    pub tolerance: f64,
    /// Reseeded attempts before giving up.
    pub max_attempts: u32,
}

impl Default for CorruptOptions {
    fn default() -> Self {
        CorruptOptions {
            tolerance: 0.05,
            max_attempts: 20,
        }
    }
}

/// Rewrites UPoS tags (only) per the plan. Deterministic in `seed`; a fresh
/// attempt seed is derived whenever the achieved error count misses the
/// tolerance. Returns the corrupted treebank and the achieved accuracy.
pub fn corrupt(
    tb: &Treebank,
    model: &ErrorModel,
    plan: &CorruptionPlan,
    eligibility: Eligibility,
    seed: u64,
    opts: &CorruptOptions,
) -> Result<(Treebank, f64)> {
    let n = tb.token_count() as u64;
    if n == 0 {
        return Err(Error::data("nothing to corrupt: zero tokens"));
    }
    // the plan's E_A is scaled to the model's N; re-anchor on this input
    let target_flips = ((1.0 - plan.target) * n as f64).round();
    let slack = opts.tolerance * target_flips + 1e-9;

    let mut best: Option<(f64, f64)> = None; // (distance, achieved)
    for attempt in 0..opts.max_attempts.max(1) {
        let attempt_seed = seeding::derive_seed(seed, &["corrupt", &attempt.to_string()]);
        let mut rng = seeding::rng_from(attempt_seed);
        let mut out = tb.clone();
        let mut flips = 0u64;
        for (si, sent) in out.sentences.iter_mut().enumerate() {
            for tok in &mut sent.tokens {
                let p = match eligibility {
                    Eligibility::AllTokens => {
                        plan.per_tag.get(&tok.upos).copied().unwrap_or(0.0)
                    }
                    Eligibility::CalibrationSplit => {
                        let real = model.is_real_error(si, tok.index);
                        match plan.mode {
                            PlanMode::Shrink => {
                                if real {
                                    plan.gamma
                                } else {
                                    0.0
                                }
                            }
                            PlanMode::Grow => {
                                if real || plan.capped.contains(&tok.upos) {
                                    1.0
                                } else {
                                    plan.grow_extra.get(&tok.upos).copied().unwrap_or(0.0)
                                }
                            }
                        }
                    }
                };
                if p > 0.0 && seeding::bernoulli(&mut rng, p) {
                    if let Some(wrong) = model.sample_confusion(&tok.upos, &mut rng) {
                        tok.upos = wrong.to_string();
                        flips += 1;
                    }
                }
            }
        }
        // same division tagging_accuracy performs, so recounts agree bitwise
        let achieved = (n - flips) as f64 / n as f64;
        let distance = (flips as f64 - target_flips).abs();
        if distance <= slack {
            return Ok((out, achieved));
        }
        if best.map_or(true, |(d, _)| distance < d) {
            best = Some((distance, achieved));
        }
    }
    Err(Error::Tolerance {
        target: plan.target,
        best: best.map(|(_, a)| a).unwrap_or(1.0),
        attempts: opts.max_attempts,
    })
}

/// Fraction of tokens whose UPoS matches, over aligned treebanks.
pub fn tagging_accuracy(gold: &Treebank, other: &Treebank) -> Result<f64> {
    if gold.sentences.len() != other.sentences.len() {
        return Err(Error::Alignment(format!(
            "{} sentences vs {}",
            gold.sentences.len(),
            other.sentences.len()
        )));
    }
    let mut n = 0u64;
    let mut hits = 0u64;
    for (i, (g, o)) in gold.sentences.iter().zip(&other.sentences).enumerate() {
        if g.len() != o.len() {
            return Err(Error::Alignment(format!(
                "sentence {}: {} tokens vs {}",
                i + 1,
                g.len(),
                o.len()
            )));
        }
        for (gt, ot) in g.tokens.iter().zip(&o.tokens) {
            n += 1;
            hits += u64::from(gt.upos == ot.upos);
        }
    }
    if n == 0 {
        return Err(Error::data("nothing to compare: zero tokens"));
    }
    Ok(hits as f64 / n as f64)
}
