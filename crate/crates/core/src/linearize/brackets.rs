//! Bracket linearization over two planes. A left arc (dependent before
//! head) opens `<` at the dependent and closes `\` at the head; a right arc
//! opens `/` at the head and closes `>` at the dependent. Crossing arcs are
//! moved to a second, starred plane. Root arcs carry no brackets.

use std::fmt;
use std::str::FromStr;

use super::repair::{repair_heads, RepairStats};
use crate::conllu::{Arc, DepTree};
use crate::error::Error;

/// Bracket multiset for one token on one plane. Within a label, symbols are
/// canonically ordered closers-first: `>? \* <? /*`.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct PlaneSymbols {
    /// `>`: closes the most recent open `/` (this token ends a right arc).
    pub close_right: bool,
    /// `\` count: left arcs this token heads.
    pub close_left: u32,
    /// `<`: opens a left arc a later `\` will close.
    pub open_left: bool,
    /// `/` count: right arcs this token heads.
    pub open_right: u32,
}

impl PlaneSymbols {
    fn is_empty(&self) -> bool {
        !self.close_right && self.close_left == 0 && !self.open_left && self.open_right == 0
    }

    fn write(&self, out: &mut String, star: bool) {
        let mut push = |c: char| {
            out.push(c);
            if star {
                out.push('*');
            }
        };
        if self.close_right {
            push('>');
        }
        for _ in 0..self.close_left {
            push('\\');
        }
        if self.open_left {
            push('<');
        }
        for _ in 0..self.open_right {
            push('/');
        }
    }
}

/// One token's brackets: plane 1 plain, plane 2 starred. A fully empty label
/// prints as `_`.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct BracketLabel {
    pub p1: PlaneSymbols,
    pub p2: PlaneSymbols,
}

impl BracketLabel {
    pub fn is_empty(&self) -> bool {
        self.p1.is_empty() && self.p2.is_empty()
    }
}

impl fmt::Display for BracketLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("_");
        }
        let mut s = String::new();
        self.p1.write(&mut s, false);
        self.p2.write(&mut s, true);
        f.write_str(&s)
    }
}

impl FromStr for BracketLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let mut lab = BracketLabel::default();
        if s == "_" || s.is_empty() {
            return Ok(lab);
        }
        let bad = || Error::data(format!("bad bracket label {s:?}"));
        let mut chars = s.chars().peekable();
        let mut head_markers = 0u32;
        while let Some(c) = chars.next() {
            let starred = chars.next_if_eq(&'*').is_some();
            let plane = if starred { &mut lab.p2 } else { &mut lab.p1 };
            match c {
                '>' => {
                    if plane.close_right {
                        return Err(bad());
                    }
                    plane.close_right = true;
                    head_markers += 1;
                }
                '\\' => plane.close_left += 1,
                '<' => {
                    if plane.open_left {
                        return Err(bad());
                    }
                    plane.open_left = true;
                    head_markers += 1;
                }
                '/' => plane.open_right += 1,
                _ => return Err(bad()),
            }
        }
        // a token has one head, so one dependent-side marker at most
        if head_markers > 1 {
            return Err(bad());
        }
        Ok(lab)
    }
}

/// Plane assignment for one arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaneChoice {
    One,
    Two,
    Unencodable,
}

/// Greedily assigns arcs to planes, left endpoint first, shorter arcs
/// breaking ties. An arc crossing assigned arcs on both planes is
/// unencodable. Root arcs are never bracket-encoded and always report plane
/// one. Returned in dependent order, aligned with [`DepTree::arcs`].
pub fn assign_planes(tree: &DepTree) -> Vec<PlaneChoice> {
    let arcs = tree.arcs();
    let mut order: Vec<usize> = (0..arcs.len()).filter(|&i| arcs[i].head != 0).collect();
    order.sort_by_key(|&i| {
        let a = &arcs[i];
        let lo = a.head.min(a.dep);
        let hi = a.head.max(a.dep);
        (lo, hi - lo, a.dep)
    });

    let mut choice = vec![PlaneChoice::One; arcs.len()];
    let mut planes: [Vec<Arc>; 2] = [Vec::new(), Vec::new()];
    for i in order {
        let arc = arcs[i];
        if !planes[0].iter().any(|other| arc.crosses(other)) {
            planes[0].push(arc);
            choice[i] = PlaneChoice::One;
        } else if !planes[1].iter().any(|other| arc.crosses(other)) {
            planes[1].push(arc);
            choice[i] = PlaneChoice::Two;
        } else {
            choice[i] = PlaneChoice::Unencodable;
        }
    }
    choice
}

/// Encodes a tree into bracket labels. Returns the labels and how many arcs
/// were dropped as unencodable.
pub fn encode_2pb(tree: &DepTree) -> (Vec<BracketLabel>, usize) {
    let n = tree.len();
    let mut labels = vec![BracketLabel::default(); n];
    let mut dropped = 0;
    for (arc, plane) in tree.arcs().into_iter().zip(assign_planes(tree)) {
        if arc.head == 0 {
            continue;
        }
        let starred = match plane {
            PlaneChoice::One => false,
            PlaneChoice::Two => true,
            PlaneChoice::Unencodable => {
                dropped += 1;
                continue;
            }
        };
        fn side(lab: &mut BracketLabel, starred: bool) -> &mut PlaneSymbols {
            if starred {
                &mut lab.p2
            } else {
                &mut lab.p1
            }
        }
        if arc.dep < arc.head {
            side(&mut labels[arc.dep - 1], starred).open_left = true;
            side(&mut labels[arc.head - 1], starred).close_left += 1;
        } else {
            side(&mut labels[arc.head - 1], starred).open_right += 1;
            side(&mut labels[arc.dep - 1], starred).close_right = true;
        }
    }
    (labels, dropped)
}

/// Decodes bracket labels with one matcher per plane and direction: each
/// `>` pairs with the most recent unmatched `/`, each `\` with the most
/// recent unmatched `<`. Unmatched symbols are discarded and counted; PoS
/// tags play no part.
pub fn decode_2pb(labels: &[BracketLabel]) -> (Vec<usize>, RepairStats) {
    let n = labels.len();
    let mut stats = RepairStats::default();
    let mut heads: Vec<Option<usize>> = vec![None; n];
    let mut open_left: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    let mut open_right: [Vec<usize>; 2] = [Vec::new(), Vec::new()];

    let attach = |heads: &mut Vec<Option<usize>>, stats: &mut RepairStats, dep: usize, head: usize| {
        if heads[dep - 1].is_none() {
            heads[dep - 1] = Some(head);
        } else {
            stats.bracket_discards += 1;
        }
    };

    for i in 1..=n {
        for (p, plane) in [&labels[i - 1].p1, &labels[i - 1].p2].into_iter().enumerate() {
            if plane.close_right {
                match open_right[p].pop() {
                    Some(h) => attach(&mut heads, &mut stats, i, h),
                    None => stats.bracket_discards += 1,
                }
            }
            for _ in 0..plane.close_left {
                match open_left[p].pop() {
                    Some(d) => attach(&mut heads, &mut stats, d, i),
                    None => stats.bracket_discards += 1,
                }
            }
            if plane.open_left {
                open_left[p].push(i);
            }
            for _ in 0..plane.open_right {
                open_right[p].push(i);
            }
        }
    }
    stats.bracket_discards +=
        open_left[0].len() + open_left[1].len() + open_right[0].len() + open_right[1].len();
    let heads = repair_heads(&heads, &mut stats);
    (heads, stats)
}
