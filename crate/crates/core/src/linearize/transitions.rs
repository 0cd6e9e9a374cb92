//! Transition-based linearizations: static oracles for the arc-hybrid
//! (projective) and Covington (fully non-projective) systems, splitting of
//! action sequences into per-token labels on the SHIFT read transition, and
//! robust replay of predicted labels.

use std::fmt;
use std::str::FromStr;

use super::repair::{repair_heads, RepairStats};
use crate::conllu::{is_projective, DepTree};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    Shift,
    LeftArc,
    RightArc,
    NoArc,
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transition::Shift => "SH",
            Transition::LeftArc => "LA",
            Transition::RightArc => "RA",
            Transition::NoArc => "NA",
        })
    }
}

impl FromStr for Transition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "SH" => Ok(Transition::Shift),
            "LA" => Ok(Transition::LeftArc),
            "RA" => Ok(Transition::RightArc),
            "NA" => Ok(Transition::NoArc),
            _ => Err(Error::data(format!("unknown transition {s:?}"))),
        }
    }
}

/// One token's slice of a transition sequence: the read transition (SHIFT)
/// followed by the actions up to the next read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionLabel {
    pub actions: Vec<Transition>,
}

impl fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.actions.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl FromStr for TransitionLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let actions: Vec<Transition> = s
            .split(';')
            .map(|part| part.parse())
            .collect::<Result<_>>()?;
        if actions.first() != Some(&Transition::Shift)
            || actions[1..].contains(&Transition::Shift)
        {
            return Err(Error::data(format!(
                "transition label {s:?} must contain exactly one leading SH"
            )));
        }
        Ok(TransitionLabel { actions })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionSystem {
    ArcHybrid,
    Covington,
}

/// Static arc-hybrid oracle. Stack starts as [root]; LEFT-ARC attaches the
/// stack top to the buffer front, RIGHT-ARC to the element below it, and a
/// token is attached only once its own dependents are collected. The root
/// arc is the final RIGHT-ARC against the stack bottom.
pub fn oracle_arc_hybrid(tree: &DepTree) -> Result<Vec<Transition>> {
    if !is_projective(tree) {
        return Err(Error::NotProjective);
    }
    let n = tree.len();
    let heads = tree.heads();
    let mut deps_total = vec![0usize; n + 1];
    for &h in &heads {
        deps_total[h] += 1;
    }
    let mut deps_done = vec![0usize; n + 1];

    let mut out = Vec::new();
    let mut stack = vec![0usize];
    let mut front = 1;
    while stack.len() > 1 || front <= n {
        let top = *stack.last().unwrap();
        let finished = top != 0 && deps_done[top] == deps_total[top];
        if finished && front <= n && heads[top - 1] == front {
            out.push(Transition::LeftArc);
            deps_done[front] += 1;
            stack.pop();
        } else if finished && stack.len() >= 2 && heads[top - 1] == stack[stack.len() - 2] {
            out.push(Transition::RightArc);
            let below = stack[stack.len() - 2];
            deps_done[below] += 1;
            stack.pop();
        } else if front <= n {
            out.push(Transition::Shift);
            stack.push(front);
            front += 1;
        } else {
            unreachable!("arc-hybrid oracle stuck on a projective tree");
        }
    }
    Ok(out)
}

/// Covington oracle. For each focus token j (one SHIFT each), candidates
/// j-1 down to 0 draw LEFT-ARC, RIGHT-ARC, or NO-ARC; the scan stops once
/// j's leftward arcs are exhausted, so trailing NO-ARCs are never emitted.
pub fn oracle_covington(tree: &DepTree) -> Vec<Transition> {
    let heads = tree.heads();
    let mut out = Vec::new();
    for j in 1..=tree.len() {
        out.push(Transition::Shift);
        let mut needed = (1..j).filter(|&i| heads[i - 1] == j).count();
        if heads[j - 1] < j {
            needed += 1;
        }
        let mut i = j - 1;
        while needed > 0 {
            if i >= 1 && heads[i - 1] == j {
                out.push(Transition::LeftArc);
                needed -= 1;
            } else if heads[j - 1] == i {
                out.push(Transition::RightArc);
                needed -= 1;
            } else {
                out.push(Transition::NoArc);
            }
            if i == 0 {
                break;
            }
            i -= 1;
        }
    }
    out
}

/// Splits a transition sequence into per-token labels at each read
/// transition. Concatenating the labels reproduces the sequence.
pub fn transitions_to_labels(
    seq: &[Transition],
    read: Transition,
    n: usize,
) -> Result<Vec<TransitionLabel>> {
    let count = seq.iter().filter(|&&t| t == read).count();
    if count != n {
        return Err(Error::data(format!(
            "{count} {read} transitions for {n} tokens"
        )));
    }
    if !seq.is_empty() && seq[0] != read {
        return Err(Error::data(format!(
            "sequence starts with {} instead of the read transition",
            seq[0]
        )));
    }
    let mut labels: Vec<TransitionLabel> = Vec::with_capacity(n);
    for &t in seq {
        if t == read {
            labels.push(TransitionLabel { actions: vec![t] });
        } else {
            labels.last_mut().unwrap().actions.push(t);
        }
    }
    Ok(labels)
}

/// Replays predicted labels through the named system. Actions invalid in
/// the current configuration are skipped and counted; tokens left headless
/// are repaired to the root. PoS tags play no part.
pub fn decode_transitions(
    labels: &[TransitionLabel],
    system: TransitionSystem,
) -> (Vec<usize>, RepairStats) {
    match system {
        TransitionSystem::ArcHybrid => decode_arc_hybrid(labels),
        TransitionSystem::Covington => decode_covington(labels),
    }
}

fn decode_arc_hybrid(labels: &[TransitionLabel]) -> (Vec<usize>, RepairStats) {
    let n = labels.len();
    let mut stats = RepairStats::default();
    let mut heads: Vec<Option<usize>> = vec![None; n];
    let mut stack = vec![0usize];
    let mut front = 1;
    for act in labels.iter().flat_map(|l| &l.actions) {
        match act {
            Transition::Shift => {
                if front <= n {
                    stack.push(front);
                    front += 1;
                } else {
                    stats.transition_skips += 1;
                }
            }
            Transition::LeftArc => {
                let top = *stack.last().unwrap();
                if top != 0 && front <= n && heads[top - 1].is_none() {
                    heads[top - 1] = Some(front);
                    stack.pop();
                } else {
                    stats.transition_skips += 1;
                }
            }
            Transition::RightArc => {
                let top = *stack.last().unwrap();
                if stack.len() >= 2 && heads[top - 1].is_none() {
                    heads[top - 1] = Some(stack[stack.len() - 2]);
                    stack.pop();
                } else {
                    stats.transition_skips += 1;
                }
            }
            Transition::NoArc => stats.transition_skips += 1,
        }
    }
    let heads = repair_heads(&heads, &mut stats);
    (heads, stats)
}

fn decode_covington(labels: &[TransitionLabel]) -> (Vec<usize>, RepairStats) {
    let n = labels.len();
    let mut stats = RepairStats::default();
    let mut heads: Vec<Option<usize>> = vec![None; n];
    for (idx, lab) in labels.iter().enumerate() {
        let j = idx + 1;
        // the label position fixes the focus; its leading SHIFT is implicit
        let mut cand = Some(j - 1);
        for act in &lab.actions[1..] {
            let Some(i) = cand else {
                stats.transition_skips += 1;
                continue;
            };
            match act {
                Transition::LeftArc => {
                    if i >= 1 && heads[i - 1].is_none() {
                        heads[i - 1] = Some(j);
                    } else {
                        stats.transition_skips += 1;
                    }
                }
                Transition::RightArc => {
                    if heads[j - 1].is_none() {
                        heads[j - 1] = Some(i);
                    } else {
                        stats.transition_skips += 1;
                    }
                }
                Transition::NoArc => {}
                Transition::Shift => {
                    stats.transition_skips += 1;
                    continue;
                }
            }
            cand = i.checked_sub(1);
        }
    }
    let heads = repair_heads(&heads, &mut stats);
    (heads, stats)
}

#[cfg(test)]
mod tests {
    use super::Transition::{LeftArc as LA, NoArc as NA, RightArc as RA, Shift as SH};
    use super::*;

    fn four() -> DepTree {
        DepTree::from_parts(
            &["the", "dog", "chased", "cats"],
            &["DET", "NOUN", "VERB", "NOUN"],
            &[2, 3, 0, 3],
            &["det", "nsubj", "root", "obj"],
        )
    }

    fn tree(heads: &[usize]) -> DepTree {
        let forms: Vec<String> = (0..heads.len()).map(|i| format!("w{i}")).collect();
        let refs: Vec<&str> = forms.iter().map(|s| s.as_str()).collect();
        DepTree::from_parts(&refs, &vec!["X"; heads.len()], heads, &vec!["dep"; heads.len()])
    }

    #[test]
    fn arc_hybrid_oracle_on_the_four_token_tree() {
        let seq = oracle_arc_hybrid(&four()).unwrap();
        assert_eq!(seq, vec![SH, LA, SH, LA, SH, SH, RA, RA]);
    }

    #[test]
    fn arc_hybrid_oracle_on_a_single_token() {
        let seq = oracle_arc_hybrid(&tree(&[0])).unwrap();
        assert_eq!(seq, vec![SH, RA]);
    }

    #[test]
    fn arc_hybrid_rejects_nonprojective_input() {
        let err = oracle_arc_hybrid(&tree(&[3, 0, 4, 2])).unwrap_err();
        assert!(matches!(err, Error::NotProjective));
    }

    #[test]
    fn covington_oracle_on_the_four_token_tree() {
        let seq = oracle_covington(&four());
        let labels = transitions_to_labels(&seq, SH, 4).unwrap();
        let parts: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
        assert_eq!(parts, vec!["SH", "SH;LA", "SH;LA;NA;RA", "SH;RA"]);
    }

    #[test]
    fn covington_oracle_on_a_single_token() {
        assert_eq!(oracle_covington(&tree(&[0])), vec![SH, RA]);
    }

    #[test]
    fn covington_handles_nonprojective_trees() {
        let t = tree(&[3, 0, 4, 2]);
        let labels = transitions_to_labels(&oracle_covington(&t), SH, 4).unwrap();
        let (heads, stats) = decode_transitions(&labels, TransitionSystem::Covington);
        assert_eq!(heads, vec![3, 0, 4, 2]);
        assert_eq!(stats.total(), 0);
    }

    #[test]
    fn label_split_concatenation_identity() {
        let seq = vec![SH, LA, SH, LA, SH, SH, RA, RA];
        let labels = transitions_to_labels(&seq, SH, 4).unwrap();
        let texts: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
        assert_eq!(texts, vec!["SH;LA", "SH;LA", "SH", "SH;RA;RA"]);
        let rejoined: Vec<Transition> =
            labels.into_iter().flat_map(|l| l.actions).collect();
        assert_eq!(rejoined, seq);
    }

    #[test]
    fn label_split_count_mismatch_is_an_error() {
        assert!(transitions_to_labels(&[SH], SH, 1).is_ok());
        assert!(transitions_to_labels(&[SH, SH], SH, 1).is_err());
        assert!(transitions_to_labels(&[LA, SH], SH, 1).is_err());
    }

    #[test]
    fn arc_hybrid_labels_round_trip() {
        let t = four();
        let seq = oracle_arc_hybrid(&t).unwrap();
        let labels = transitions_to_labels(&seq, SH, 4).unwrap();
        let (heads, stats) = decode_transitions(&labels, TransitionSystem::ArcHybrid);
        assert_eq!(heads, vec![2, 3, 0, 3]);
        assert_eq!(stats.total(), 0);
    }

    #[test]
    fn invalid_actions_are_skipped_and_repaired() {
        let labels = vec!["SH;LA;LA".parse::<TransitionLabel>().unwrap()];
        let (heads, stats) = decode_transitions(&labels, TransitionSystem::ArcHybrid);
        assert_eq!(heads, vec![0]);
        // both LAs lack a buffer token; repair roots the stranded token
        assert_eq!(stats.transition_skips, 2);
        assert_eq!(stats.headless_to_root, 1);
    }

    #[test]
    fn covington_replay_survives_shuffled_labels() {
        let labels = vec![
            "SH".parse::<TransitionLabel>().unwrap(),
            "SH;LA".parse().unwrap(),
            "SH;LA;RA".parse().unwrap(),
        ];
        // replay builds 1->2->3->1; repair re-roots its smallest member
        let (heads, stats) = decode_transitions(&labels, TransitionSystem::Covington);
        assert_eq!(heads, vec![0, 3, 1]);
        assert_eq!(stats.cycles_broken, 1);
        assert!(crate::conllu::validate(&tree(&heads), 1).is_ok());
    }

    #[test]
    fn transition_label_surfaces() {
        let lab: TransitionLabel = "SH;LA;NA;RA".parse().unwrap();
        assert_eq!(lab.actions, vec![SH, LA, NA, RA]);
        assert_eq!(lab.to_string(), "SH;LA;NA;RA");
        assert!("LA;SH".parse::<TransitionLabel>().is_err());
        assert!("SH;SH".parse::<TransitionLabel>().is_err());
        assert!("SH;XX".parse::<TransitionLabel>().is_err());
    }
}
