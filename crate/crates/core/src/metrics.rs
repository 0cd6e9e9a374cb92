//! Attachment-score evaluation. Punctuation counts like any other token;
//! multiword surface lines carry no head and are outside the token stream.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::conllu::Treebank;
use crate::error::{Error, Result};
use crate::linearize::RepairStats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub uas: f64,
    pub las: f64,
    #[serde(rename = "n")]
    pub tokens: usize,
    pub repairs: RepairStats,
}

impl EvalResult {
    pub fn with_repairs(mut self, repairs: RepairStats) -> Self {
        self.repairs = repairs;
        self
    }
}

impl fmt::Display for EvalResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "UAS {:.4}  LAS {:.4}  n={}  repairs={}",
            self.uas,
            self.las,
            self.tokens,
            self.repairs.total()
        )
    }
}

/// UAS: fraction of tokens with the correct head. LAS: correct head and
/// relation. Inputs must align sentence-by-sentence and token-by-token.
pub fn attachment_scores(gold: &Treebank, predicted: &Treebank) -> Result<EvalResult> {
    if gold.sentences.len() != predicted.sentences.len() {
        return Err(Error::Alignment(format!(
            "{} gold sentences vs {} predicted",
            gold.sentences.len(),
            predicted.sentences.len()
        )));
    }
    let mut n = 0usize;
    let mut head_hits = 0usize;
    let mut labeled_hits = 0usize;
    for (i, (g, p)) in gold.sentences.iter().zip(&predicted.sentences).enumerate() {
        if g.len() != p.len() {
            return Err(Error::Alignment(format!(
                "sentence {}: {} gold tokens vs {} predicted",
                i + 1,
                g.len(),
                p.len()
            )));
        }
        for (gt, pt) in g.tokens.iter().zip(&p.tokens) {
            n += 1;
            if gt.head == pt.head {
                head_hits += 1;
                if gt.deprel == pt.deprel {
                    labeled_hits += 1;
                }
            }
        }
    }
    if n == 0 {
        return Err(Error::data("nothing to score: zero tokens"));
    }
    Ok(EvalResult {
        uas: head_hits as f64 / n as f64,
        las: labeled_hits as f64 / n as f64,
        tokens: n,
        repairs: RepairStats::default(),
    })
}
