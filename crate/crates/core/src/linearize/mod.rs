//! Tree-to-label encodings and their decoders.
//!
//! Four families: head selection by PoS-ranked offset (`rp_h`), two-planar
//! bracketing (`2p_b`), and the arc-hybrid (`ah_tb`) and Covington (`c_tb`)
//! transition systems. Only `rp_h` consumes PoS tags when decoding.

pub mod brackets;
pub mod rel_pos;
pub mod repair;
pub mod transitions;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use brackets::{assign_planes, decode_2pb, encode_2pb, BracketLabel, PlaneChoice, PlaneSymbols};
pub use rel_pos::{decode_rph, encode_rph, HeadSelLabel, ROOT_TAG};
pub use repair::{repair_heads, RepairStats};
pub use transitions::{
    decode_transitions, oracle_arc_hybrid, oracle_covington, transitions_to_labels, Transition,
    TransitionLabel, TransitionSystem,
};

use crate::conllu::DepTree;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Encoding {
    #[serde(rename = "rp_h")]
    RelPos,
    #[serde(rename = "2p_b")]
    Brackets,
    #[serde(rename = "ah_tb")]
    ArcHybrid,
    #[serde(rename = "c_tb")]
    Covington,
}

impl Encoding {
    pub const ALL: [Encoding; 4] = [
        Encoding::RelPos,
        Encoding::Brackets,
        Encoding::ArcHybrid,
        Encoding::Covington,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Encoding::RelPos => "rp_h",
            Encoding::Brackets => "2p_b",
            Encoding::ArcHybrid => "ah_tb",
            Encoding::Covington => "c_tb",
        }
    }

    /// Whether the decoder reads the tag sequence at all.
    pub fn decoder_uses_tags(&self) -> bool {
        matches!(self, Encoding::RelPos)
    }

    /// Whether encoding is defined only for projective trees.
    pub fn requires_projective(&self) -> bool {
        matches!(self, Encoding::ArcHybrid)
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Encoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Encoding::ALL
            .into_iter()
            .find(|e| e.id() == s)
            .ok_or_else(|| {
                Error::data(format!(
                    "unknown encoding {s:?} (expected rp_h, 2p_b, ah_tb, or c_tb)"
                ))
            })
    }
}

/// Per-token labels of one sentence, in the family the encoding dictates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Labels {
    HeadSel(Vec<HeadSelLabel>),
    Bracket(Vec<BracketLabel>),
    Transition(Vec<TransitionLabel>),
}

impl Labels {
    pub fn len(&self) -> usize {
        match self {
            Labels::HeadSel(v) => v.len(),
            Labels::Bracket(v) => v.len(),
            Labels::Transition(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn surfaces(&self) -> Vec<String> {
        match self {
            Labels::HeadSel(v) => v.iter().map(|l| l.to_string()).collect(),
            Labels::Bracket(v) => v.iter().map(|l| l.to_string()).collect(),
            Labels::Transition(v) => v.iter().map(|l| l.to_string()).collect(),
        }
    }

    pub fn from_surfaces(encoding: Encoding, surfaces: &[&str]) -> Result<Labels> {
        fn all<T: FromStr<Err = Error>>(surfaces: &[&str]) -> Result<Vec<T>> {
            surfaces.iter().map(|s| s.parse()).collect()
        }
        Ok(match encoding {
            Encoding::RelPos => Labels::HeadSel(all(surfaces)?),
            Encoding::Brackets => Labels::Bracket(all(surfaces)?),
            Encoding::ArcHybrid | Encoding::Covington => Labels::Transition(all(surfaces)?),
        })
    }
}

/// One sentence's labels paired with its relation strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedSentence {
    pub encoding: Encoding,
    pub labels: Labels,
    pub deprels: Vec<String>,
}

impl EncodedSentence {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Encodes a tree. Returns the labels and the number of arcs dropped as
/// unencodable (only ever nonzero for the bracket encoding).
pub fn encode(encoding: Encoding, tree: &DepTree) -> Result<(EncodedSentence, usize)> {
    let deprels: Vec<String> = tree.tokens.iter().map(|t| t.deprel.clone()).collect();
    let (labels, dropped) = match encoding {
        Encoding::RelPos => (Labels::HeadSel(encode_rph(tree)), 0),
        Encoding::Brackets => {
            let (labels, dropped) = encode_2pb(tree);
            (Labels::Bracket(labels), dropped)
        }
        Encoding::ArcHybrid => {
            let seq = oracle_arc_hybrid(tree)?;
            let labels = transitions_to_labels(&seq, Transition::Shift, tree.len())?;
            (Labels::Transition(labels), 0)
        }
        Encoding::Covington => {
            let seq = oracle_covington(tree);
            let labels = transitions_to_labels(&seq, Transition::Shift, tree.len())?;
            (Labels::Transition(labels), 0)
        }
    };
    Ok((
        EncodedSentence {
            encoding,
            labels,
            deprels,
        },
        dropped,
    ))
}

/// Decodes one sentence's labels into a head assignment. `tags` is consumed
/// only by `rp_h`; the other decoders ignore it entirely.
pub fn decode(sent: &EncodedSentence, tags: &[&str]) -> Result<(Vec<usize>, RepairStats)> {
    match (&sent.labels, sent.encoding) {
        (Labels::HeadSel(labels), Encoding::RelPos) => {
            if tags.len() != labels.len() {
                return Err(Error::Alignment(format!(
                    "{} tags for {} labels",
                    tags.len(),
                    labels.len()
                )));
            }
            Ok(decode_rph(labels, tags))
        }
        (Labels::Bracket(labels), Encoding::Brackets) => Ok(decode_2pb(labels)),
        (Labels::Transition(labels), Encoding::ArcHybrid) => {
            Ok(decode_transitions(labels, TransitionSystem::ArcHybrid))
        }
        (Labels::Transition(labels), Encoding::Covington) => {
            Ok(decode_transitions(labels, TransitionSystem::Covington))
        }
        _ => Err(Error::data("label family does not match encoding")),
    }
}

/// Builds the decoded tree a head assignment describes, reusing the forms
/// and tags of a reference sentence.
pub fn tree_with_heads(reference: &DepTree, heads: &[usize], deprels: &[String]) -> DepTree {
    assert_eq!(reference.len(), heads.len());
    assert_eq!(heads.len(), deprels.len());
    let mut out = reference.clone();
    for ((tok, &h), rel) in out.tokens.iter_mut().zip(heads).zip(deprels) {
        tok.head = h;
        tok.deprel = rel.clone();
    }
    out
}
