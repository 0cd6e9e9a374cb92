//! Head selection by PoS-ranked relative offset: each token's label names
//! its head as the n-th word with a given tag, to the left or right.

use std::fmt;
use std::str::FromStr;

use super::repair::{repair_heads, RepairStats};
use crate::conllu::DepTree;
use crate::error::Error;

/// Reserved property naming the artificial root, treated as a leftmost
/// position 0 that only it occupies.
pub const ROOT_TAG: &str = "ROOT";

/// `(+n, X)`: head is the n-th token to the right bearing tag X; negative n
/// counts leftward. `(-1, ROOT)` attaches to the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeadSelLabel {
    pub offset: i32,
    pub property: String,
}

impl fmt::Display for HeadSelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}@{}", self.offset, self.property)
    }
}

impl FromStr for HeadSelLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let (off, prop) = s
            .split_once('@')
            .ok_or_else(|| Error::data(format!("bad head-selection label {s:?}")))?;
        let offset: i32 = off
            .parse()
            .map_err(|_| Error::data(format!("bad offset in label {s:?}")))?;
        if offset == 0 || prop.is_empty() {
            return Err(Error::data(format!("bad head-selection label {s:?}")));
        }
        Ok(HeadSelLabel {
            offset,
            property: prop.to_string(),
        })
    }
}

/// Labels a tree by ranked tag offsets; root arcs become `(-1, ROOT)`.
pub fn encode_rph(tree: &DepTree) -> Vec<HeadSelLabel> {
    let tags = tree.upos();
    tree.tokens
        .iter()
        .map(|tok| {
            let (i, h) = (tok.index, tok.head);
            if h == 0 {
                return HeadSelLabel {
                    offset: -1,
                    property: ROOT_TAG.into(),
                };
            }
            let want = tags[h - 1];
            let rank = if h > i {
                (i + 1..=h).filter(|&j| tags[j - 1] == want).count() as i32
            } else {
                -((h..i).filter(|&j| tags[j - 1] == want).count() as i32)
            };
            HeadSelLabel {
                offset: rank,
                property: want.into(),
            }
        })
        .collect()
}

/// Resolves labels against the *provided* tag sequence (which may differ
/// from the tags the labels were produced under). An over-long offset clamps
/// to the last matching candidate; no candidate at all means the root.
pub fn decode_rph(labels: &[HeadSelLabel], tags: &[&str]) -> (Vec<usize>, RepairStats) {
    assert_eq!(labels.len(), tags.len());
    let n = labels.len();
    let mut stats = RepairStats::default();
    let mut heads: Vec<Option<usize>> = Vec::with_capacity(n);
    for (idx, lab) in labels.iter().enumerate() {
        let i = idx + 1;
        let want = lab.property.as_str();
        let cands: Vec<usize> = if lab.offset > 0 {
            (i + 1..=n).filter(|&j| tags[j - 1] == want).collect()
        } else {
            let mut v: Vec<usize> = (1..i).rev().filter(|&j| tags[j - 1] == want).collect();
            if want == ROOT_TAG {
                v.push(0);
            }
            v
        };
        let k = lab.offset.unsigned_abs() as usize;
        let head = if cands.is_empty() {
            stats.relpos_rooted += 1;
            0
        } else if k <= cands.len() {
            cands[k - 1]
        } else {
            stats.relpos_clamped += 1;
            *cands.last().unwrap()
        };
        heads.push(Some(head));
    }
    let heads = repair_heads(&heads, &mut stats);
    (heads, stats)
}
