//! Label files: one token per line as `index<TAB>form<TAB>upos<TAB>label<TAB>deprel`,
//! blank line between sentences. Also the two-column `form<TAB>upos`
//! prediction format used to feed external tagger output in.

use crate::conllu::{DepTree, Treebank};
use crate::error::{Error, Result};
use crate::linearize::{EncodedSentence, Encoding, Labels};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSentence {
    pub forms: Vec<String>,
    pub upos: Vec<String>,
    pub labels: Vec<String>,
    pub deprels: Vec<String>,
}

impl LabeledSentence {
    pub fn from_encoded(tree: &DepTree, encoded: &EncodedSentence) -> LabeledSentence {
        LabeledSentence {
            forms: tree.tokens.iter().map(|t| t.form.clone()).collect(),
            upos: tree.tokens.iter().map(|t| t.upos.clone()).collect(),
            labels: encoded.labels.surfaces(),
            deprels: encoded.deprels.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    /// Re-types the stored label surfaces under `encoding`.
    pub fn decode_labels(&self, encoding: Encoding) -> Result<EncodedSentence> {
        let surfaces: Vec<&str> = self.labels.iter().map(|s| s.as_str()).collect();
        Ok(EncodedSentence {
            encoding,
            labels: Labels::from_surfaces(encoding, &surfaces)?,
            deprels: self.deprels.clone(),
        })
    }
}

pub fn write_label_file(sentences: &[LabeledSentence]) -> String {
    let mut out = String::new();
    for sent in sentences {
        for i in 0..sent.len() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                i + 1,
                sent.forms[i],
                sent.upos[i],
                sent.labels[i],
                sent.deprels[i]
            ));
        }
        out.push('\n');
    }
    out
}

pub fn parse_label_file(text: &str) -> Result<Vec<LabeledSentence>> {
    let mut sentences = Vec::new();
    let mut current: Option<LabeledSentence> = None;
    for (lineno, line) in text.lines().enumerate() {
        let at = lineno + 1;
        if line.trim().is_empty() {
            if let Some(sent) = current.take() {
                sentences.push(sent);
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 5 {
            return Err(Error::Parse {
                line: at,
                msg: format!("expected 5 tab-separated columns, got {}", cols.len()),
            });
        }
        let index: usize = cols[0].parse().map_err(|_| Error::Parse {
            line: at,
            msg: format!("bad token index {:?}", cols[0]),
        })?;
        let sent = current.get_or_insert_with(|| LabeledSentence {
            forms: Vec::new(),
            upos: Vec::new(),
            labels: Vec::new(),
            deprels: Vec::new(),
        });
        if index != sent.len() + 1 {
            return Err(Error::Parse {
                line: at,
                msg: format!("token index {} out of sequence", index),
            });
        }
        sent.forms.push(cols[1].to_string());
        sent.upos.push(cols[2].to_string());
        sent.labels.push(cols[3].to_string());
        sent.deprels.push(cols[4].to_string());
    }
    if let Some(sent) = current.take() {
        sentences.push(sent);
    }
    Ok(sentences)
}

/// Parses `form<TAB>upos` lines, blank line between sentences.
pub fn parse_tag_predictions(text: &str) -> Result<Vec<Vec<(String, String)>>> {
    let mut sentences = Vec::new();
    let mut current: Vec<(String, String)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        let Some((form, upos)) = line.split_once('\t') else {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: "expected form<TAB>upos".into(),
            });
        };
        current.push((form.to_string(), upos.to_string()));
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    Ok(sentences)
}

/// Checks predictions line up with the gold treebank (sentence lengths and
/// forms) and strips them down to the tag sequences.
pub fn align_predictions(
    gold: &Treebank,
    predictions: &[Vec<(String, String)>],
) -> Result<Vec<Vec<String>>> {
    if gold.sentences.len() != predictions.len() {
        return Err(Error::Alignment(format!(
            "{} gold sentences vs {} predicted",
            gold.sentences.len(),
            predictions.len()
        )));
    }
    let mut tags = Vec::with_capacity(predictions.len());
    for (i, (sent, rows)) in gold.sentences.iter().zip(predictions).enumerate() {
        if sent.len() != rows.len() {
            return Err(Error::Alignment(format!(
                "sentence {}: {} gold tokens vs {} predicted",
                i + 1,
                sent.len(),
                rows.len()
            )));
        }
        for (tok, (form, _)) in sent.tokens.iter().zip(rows) {
            if tok.form != *form {
                return Err(Error::Alignment(format!(
                    "sentence {} token {}: form {:?} does not match gold {:?}",
                    i + 1,
                    tok.index,
                    form,
                    tok.form
                )));
            }
        }
        tags.push(rows.iter().map(|(_, upos)| upos.clone()).collect());
    }
    Ok(tags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearize::encode;

    fn four_token_tree() -> DepTree {
        DepTree::from_parts(
            &["the", "dog", "barks", "loudly"],
            &["DET", "NOUN", "VERB", "ADV"],
            &[2, 3, 0, 3],
            &["det", "nsubj", "root", "advmod"],
        )
    }

    #[test]
    fn label_file_round_trips_for_every_encoding() {
        let tree = four_token_tree();
        for enc in Encoding::ALL {
            let (encoded, dropped) = encode(enc, &tree).unwrap();
            assert_eq!(dropped, 0);
            let sent = LabeledSentence::from_encoded(&tree, &encoded);
            let text = write_label_file(&[sent.clone()]);
            let back = parse_label_file(&text).unwrap();
            assert_eq!(back, vec![sent.clone()]);
            let re = back[0].decode_labels(enc).unwrap();
            assert_eq!(re.labels.surfaces(), encoded.labels.surfaces());
        }
    }

    #[test]
    fn written_lines_have_the_fixed_shape() {
        let tree = four_token_tree();
        let (encoded, _) = encode(Encoding::RelPos, &tree).unwrap();
        let sent = LabeledSentence::from_encoded(&tree, &encoded);
        let text = write_label_file(&[sent]);
        let first = text.lines().next().unwrap();
        assert_eq!(first, "1\tthe\tDET\t+1@NOUN\tdet");
        assert!(text.ends_with("\n\n"));
    }

    #[test]
    fn parse_rejects_bad_column_counts_and_indices() {
        let err = parse_label_file("1\tdog\tNOUN\t+1@VERB\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = parse_label_file("2\tdog\tNOUN\t+1@VERB\tdet\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn predictions_parse_and_align() {
        let tb = Treebank::new("t", vec![four_token_tree()]);
        let text = "the\tDET\ndog\tNOUN\nbarks\tNOUN\nloudly\tADV\n";
        let rows = parse_tag_predictions(text).unwrap();
        let tags = align_predictions(&tb, &rows).unwrap();
        assert_eq!(tags, vec![vec!["DET", "NOUN", "NOUN", "ADV"]]);
    }

    #[test]
    fn misaligned_predictions_are_rejected() {
        let tb = Treebank::new("t", vec![four_token_tree()]);
        let short = parse_tag_predictions("the\tDET\ndog\tNOUN\n").unwrap();
        assert!(align_predictions(&tb, &short).is_err());
        let wrong_form =
            parse_tag_predictions("a\tDET\ndog\tNOUN\nbarks\tVERB\nloudly\tADV\n").unwrap();
        assert!(align_predictions(&tb, &wrong_form).is_err());
    }

    #[test]
    fn empty_input_is_an_empty_list() {
        assert!(parse_label_file("").unwrap().is_empty());
        assert!(parse_tag_predictions("\n\n").unwrap().is_empty());
    }
}
