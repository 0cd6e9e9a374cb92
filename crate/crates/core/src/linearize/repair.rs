//! Deterministic repair of decoded head assignments.

use serde::{Deserialize, Serialize};

/// Counters for every fallback a decoder or the repair pass took.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairStats {
    /// Tokens with no decoded head, attached to the root.
    pub headless_to_root: usize,
    /// Cycles broken by re-rooting their smallest member.
    pub cycles_broken: usize,
    /// Head-selection offsets clamped to the last matching candidate.
    pub relpos_clamped: usize,
    /// Head-selection labels with no matching candidate at all.
    pub relpos_rooted: usize,
    /// Bracket symbols discarded by the matchers.
    pub bracket_discards: usize,
    /// Transition actions skipped as invalid in their configuration.
    pub transition_skips: usize,
}

impl RepairStats {
    pub fn total(&self) -> usize {
        self.headless_to_root
            + self.cycles_broken
            + self.relpos_clamped
            + self.relpos_rooted
            + self.bracket_discards
            + self.transition_skips
    }

    pub fn merge(&mut self, other: &RepairStats) {
        self.headless_to_root += other.headless_to_root;
        self.cycles_broken += other.cycles_broken;
        self.relpos_clamped += other.relpos_clamped;
        self.relpos_rooted += other.relpos_rooted;
        self.bracket_discards += other.bracket_discards;
        self.transition_skips += other.transition_skips;
    }
}

/// Turns a partial head assignment into a valid rooted tree: headless tokens
/// attach to the root, and each cycle is broken by re-rooting its
/// smallest-index member. The result always validates.
pub fn repair_heads(partial: &[Option<usize>], stats: &mut RepairStats) -> Vec<usize> {
    let n = partial.len();
    let mut heads: Vec<usize> = partial
        .iter()
        .enumerate()
        .map(|(idx, h)| match h {
            Some(h) if *h <= n && *h != idx + 1 => *h,
            _ => {
                stats.headless_to_root += 1;
                0
            }
        })
        .collect();

    // Parent walks with tri-state marks; a revisit of an in-progress node
    // pins down one cycle, whose members are then all rooted-or-done.
    let mut state = vec![0u8; n + 1];
    state[0] = 2;
    for start in 1..=n {
        let mut path = Vec::new();
        let mut cur = start;
        while state[cur] == 0 {
            state[cur] = 1;
            path.push(cur);
            cur = heads[cur - 1];
        }
        if state[cur] == 1 {
            let mut min = cur;
            let mut x = heads[cur - 1];
            while x != cur {
                min = min.min(x);
                x = heads[x - 1];
            }
            heads[min - 1] = 0;
            stats.cycles_broken += 1;
        }
        for p in path {
            state[p] = 2;
        }
    }
    heads
}
