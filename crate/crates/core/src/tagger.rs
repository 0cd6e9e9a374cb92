//! Frequency tagger used to seed the error model when no external tagger
//! output is supplied. Lookup order: exact form, lowercased form, longest
//! known suffix (4 down to 1, on the lowercased form), global modal tag.
//! Modal ties break toward the lexicographically smallest tag.

use std::collections::BTreeMap;

use crate::conllu::Treebank;
use crate::error::{Error, Result};

type TagCounts = BTreeMap<String, u64>;

#[derive(Debug, Clone)]
pub struct TaggerModel {
    forms: BTreeMap<String, TagCounts>,
    forms_lower: BTreeMap<String, TagCounts>,
    // suffixes of the lowercased form, keyed by (length, suffix)
    suffixes: BTreeMap<(usize, String), TagCounts>,
    prior: TagCounts,
}

const MAX_SUFFIX: usize = 4;

pub fn train_tagger(train: &Treebank) -> Result<TaggerModel> {
    if train.token_count() == 0 {
        return Err(Error::data("cannot train a tagger on zero tokens"));
    }
    let mut model = TaggerModel {
        forms: BTreeMap::new(),
        forms_lower: BTreeMap::new(),
        suffixes: BTreeMap::new(),
        prior: BTreeMap::new(),
    };
    for sent in &train.sentences {
        for tok in &sent.tokens {
            let lower = tok.form.to_lowercase();
            bump(model.forms.entry(tok.form.clone()).or_default(), &tok.upos);
            bump(model.forms_lower.entry(lower.clone()).or_default(), &tok.upos);
            let chars: Vec<char> = lower.chars().collect();
            for k in 1..=MAX_SUFFIX.min(chars.len()) {
                let suf: String = chars[chars.len() - k..].iter().collect();
                bump(model.suffixes.entry((k, suf)).or_default(), &tok.upos);
            }
            bump(&mut model.prior, &tok.upos);
        }
    }
    Ok(model)
}

fn bump(counts: &mut TagCounts, tag: &str) {
    *counts.entry(tag.to_string()).or_default() += 1;
}

fn modal(counts: &TagCounts) -> Option<&str> {
    let mut best: Option<(&str, u64)> = None;
    for (tag, &n) in counts {
        // strictly greater keeps the first (smallest) tag on ties
        if best.map_or(true, |(_, b)| n > b) {
            best = Some((tag, n));
        }
    }
    best.map(|(t, _)| t)
}

impl TaggerModel {
    pub fn tag_form(&self, form: &str) -> &str {
        if let Some(counts) = self.forms.get(form) {
            return modal(counts).expect("trained entry");
        }
        let lower = form.to_lowercase();
        if let Some(counts) = self.forms_lower.get(&lower) {
            return modal(counts).expect("trained entry");
        }
        let chars: Vec<char> = lower.chars().collect();
        for k in (1..=MAX_SUFFIX.min(chars.len())).rev() {
            let suf: String = chars[chars.len() - k..].iter().collect();
            if let Some(counts) = self.suffixes.get(&(k, suf)) {
                return modal(counts).expect("trained entry");
            }
        }
        modal(&self.prior).expect("trained prior")
    }

    /// Predicted tags per sentence, aligned with `tb`.
    pub fn tag(&self, tb: &Treebank) -> Vec<Vec<String>> {
        tb.sentences
            .iter()
            .map(|s| s.tokens.iter().map(|t| self.tag_form(&t.form).to_string()).collect())
            .collect()
    }

    /// p(tag) over the training tokens. Sums to 1.
    pub fn prior(&self) -> BTreeMap<String, f64> {
        let total: u64 = self.prior.values().sum();
        self.prior
            .iter()
            .map(|(t, &n)| (t.clone(), n as f64 / total as f64))
            .collect()
    }

    pub fn modal_tag(&self) -> &str {
        modal(&self.prior).expect("trained prior")
    }
}
