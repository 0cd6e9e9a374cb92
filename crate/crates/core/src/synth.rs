//! Synthetic data: a template-built corpus with a controlled tag mix, a
//! fixed-structure tag-noise simulator, and random tree generators for
//! round-trip suites. Everything here is deterministic in its seed.

use rand_chacha::ChaCha8Rng;

use crate::conllu::{DepTree, Treebank};
use crate::seeding;

#[derive(Clone, Copy)]
enum FormSpec {
    Fixed(&'static str),
    Pool(&'static [&'static str]),
}

#[derive(Clone, Copy)]
struct Slot {
    form: FormSpec,
    upos: &'static str,
    head: usize,
    deprel: &'static str,
}

const NOUNS: &[&str] = &[
    "time", "stone", "river", "garden", "window", "music", "story", "bridge", "market",
    "mountain", "letter", "pattern", "village", "road", "winter", "morning", "evening",
    "building", "feeling", "meeting", "painting", "teacher", "farmer", "doctor", "island",
    "forest", "harbor", "castle", "valley", "shadow", "corner", "silver", "bottle", "basket",
    "candle", "flower", "branch", "cloud", "stream", "meadow", "work", "play", "walk", "call",
    "answer", "change", "cover", "dream", "watch", "report", "study", "visit", "plan", "turn",
    "start", "light", "sound", "field", "house", "paper",
];

// regular stems only; inflected forms are stem + {"", "s", "ed", "ing"}
const VERB_STEMS: &[&str] = &[
    "walk", "talk", "work", "play", "call", "answer", "cover", "turn", "start", "follow",
    "travel", "listen", "wander", "gather", "explain", "wonder", "remember", "deliver",
    "discover", "protect", "whisper", "repair", "report", "visit", "happen", "open", "clean",
    "climb", "paint", "pull",
];

const ADJS: &[&str] = &[
    "old", "young", "small", "large", "quiet", "bright", "dark", "cold", "warm", "green",
    "narrow", "distant", "gentle", "steady", "hollow", "fast", "hard", "early", "late", "deep",
];

const ADVS: &[&str] = &[
    "slowly", "quietly", "carefully", "suddenly", "often", "always", "never", "almost",
    "again", "together", "fast", "hard", "early", "late", "soon",
];

const ADPS: &[&str] = &[
    "in", "on", "under", "over", "through", "across", "near", "behind", "before", "after",
];

const SCONJS: &[&str] = &["because", "while", "although", "if", "before", "after"];

const PRONS: &[&str] = &["he", "she", "they", "we", "it", "you", "that", "some"];

const DETS: &[&str] = &["this", "that", "these", "some", "each", "every"];

const AUXES: &[&str] = &["will", "can", "may", "must", "could", "should"];

const PROPNS: &[&str] = &[
    "Anna", "Peter", "Maria", "Daniel", "Lucia", "Thomas", "Elena", "Martin", "Sofia",
    "Oliver", "Clara", "Simon", "Laura", "Victor", "Irene", "Leo", "Nora", "Hugo",
];

const CCONJS: &[&str] = &["and", "or", "but"];

const NUMS: &[&str] = &["two", "three", "four", "five", "six", "seven", "eight", "nine"];

const fn fixed(form: &'static str, upos: &'static str, head: usize, deprel: &'static str) -> Slot {
    Slot { form: FormSpec::Fixed(form), upos, head, deprel }
}

const fn pool(
    forms: &'static [&'static str],
    upos: &'static str,
    head: usize,
    deprel: &'static str,
) -> Slot {
    Slot { form: FormSpec::Pool(forms), upos, head, deprel }
}

// Six projective shapes; one cycle is exactly 50 tokens across 13 tags.
const TEMPLATES: &[&[Slot]] = &[
    &[
        fixed("the", "DET", 2, "det"),
        pool(NOUNS, "NOUN", 3, "nsubj"),
        pool(VERB_STEMS, "VERB", 0, "root"),
        fixed("a", "DET", 6, "det"),
        pool(ADJS, "ADJ", 6, "amod"),
        pool(NOUNS, "NOUN", 3, "obj"),
        pool(ADPS, "ADP", 9, "case"),
        pool(DETS, "DET", 9, "det"),
        pool(NOUNS, "NOUN", 3, "obl"),
        pool(ADVS, "ADV", 3, "advmod"),
        fixed(".", "PUNCT", 3, "punct"),
    ],
    &[
        pool(PROPNS, "PROPN", 2, "nsubj"),
        pool(VERB_STEMS, "VERB", 0, "root"),
        pool(ADPS, "ADP", 5, "case"),
        fixed("the", "DET", 5, "det"),
        pool(NOUNS, "NOUN", 2, "obl"),
        fixed(".", "PUNCT", 2, "punct"),
    ],
    &[
        pool(PRONS, "PRON", 3, "nsubj"),
        pool(AUXES, "AUX", 3, "aux"),
        pool(VERB_STEMS, "VERB", 0, "root"),
        pool(SCONJS, "SCONJ", 6, "mark"),
        pool(PRONS, "PRON", 6, "nsubj"),
        pool(VERB_STEMS, "VERB", 3, "advcl"),
        pool(ADVS, "ADV", 6, "advmod"),
        pool(CCONJS, "CCONJ", 9, "cc"),
        pool(ADVS, "ADV", 7, "conj"),
    ],
    &[
        pool(NUMS, "NUM", 2, "nummod"),
        pool(NOUNS, "NOUN", 3, "nsubj"),
        pool(VERB_STEMS, "VERB", 0, "root"),
        fixed("the", "DET", 5, "det"),
        pool(NOUNS, "NOUN", 3, "obj"),
        pool(ADVS, "ADV", 3, "advmod"),
        fixed(".", "PUNCT", 3, "punct"),
    ],
    &[
        fixed("the", "DET", 3, "det"),
        pool(ADJS, "ADJ", 3, "amod"),
        pool(NOUNS, "NOUN", 4, "nsubj"),
        pool(VERB_STEMS, "VERB", 0, "root"),
        pool(CCONJS, "CCONJ", 6, "cc"),
        pool(VERB_STEMS, "VERB", 4, "conj"),
        fixed("the", "DET", 8, "det"),
        pool(NOUNS, "NOUN", 6, "obj"),
        pool(ADPS, "ADP", 11, "case"),
        fixed("the", "DET", 11, "det"),
        pool(NOUNS, "NOUN", 6, "obl"),
        fixed(".", "PUNCT", 4, "punct"),
    ],
    &[
        pool(PROPNS, "PROPN", 3, "nsubj"),
        pool(AUXES, "AUX", 3, "aux"),
        pool(VERB_STEMS, "VERB", 0, "root"),
        pool(NOUNS, "NOUN", 3, "obj"),
        fixed(".", "PUNCT", 3, "punct"),
    ],
];

const VERB_ENDINGS: &[&str] = &["", "s", "ed", "ing"];

fn draw_form(spec: FormSpec, upos: &str, rng: &mut ChaCha8Rng) -> String {
    match spec {
        FormSpec::Fixed(s) => s.to_string(),
        FormSpec::Pool(forms) => {
            let stem = forms[seeding::next_index(rng, forms.len())];
            if upos == "VERB" {
                let ending = VERB_ENDINGS[seeding::next_index(rng, VERB_ENDINGS.len())];
                format!("{stem}{ending}")
            } else {
                stem.to_string()
            }
        }
    }
}

fn sentence_from(template: &[Slot], rng: &mut ChaCha8Rng) -> DepTree {
    let forms: Vec<String> = template
        .iter()
        .map(|s| draw_form(s.form, s.upos, rng))
        .collect();
    let form_refs: Vec<&str> = forms.iter().map(|s| s.as_str()).collect();
    let upos: Vec<&str> = template.iter().map(|s| s.upos).collect();
    let heads: Vec<usize> = template.iter().map(|s| s.head).collect();
    let deprels: Vec<&str> = template.iter().map(|s| s.deprel).collect();
    DepTree::from_parts(&form_refs, &upos, &heads, &deprels)
}

/// Builds a projective corpus by cycling the templates, stopping at the
/// first sentence boundary at or past `target_tokens`. One template cycle
/// is 50 tokens, so any multiple of 50 is hit exactly.
pub fn synthetic_corpus(seed: u64, target_tokens: usize) -> Treebank {
    let mut rng = seeding::rng_from(seeding::derive_seed(seed, &["synth"]));
    let mut sentences = Vec::new();
    let mut total = 0usize;
    let mut next = 0usize;
    while total < target_tokens {
        let template = TEMPLATES[next % TEMPLATES.len()];
        next += 1;
        let tree = sentence_from(template, &mut rng);
        total += tree.len();
        sentences.push(tree);
    }
    Treebank::new("synthetic", sentences)
}

/// Fixed confusion structure: gold tag, wrong tag, flip probability.
/// Overall error mass is about 4.4% on the synthetic tag mix.
pub const SIMULATED_CONFUSION: &[(&str, &str, f64)] = &[
    ("NOUN", "VERB", 0.05),
    ("NOUN", "PROPN", 0.03),
    ("VERB", "NOUN", 0.04),
    ("VERB", "AUX", 0.02),
    ("ADJ", "ADV", 0.05),
    ("ADJ", "NOUN", 0.02),
    ("DET", "PRON", 0.03),
    ("ADP", "SCONJ", 0.02),
    ("ADV", "ADJ", 0.04),
    ("PROPN", "NOUN", 0.06),
    ("AUX", "VERB", 0.05),
    ("PRON", "DET", 0.02),
    ("NUM", "NOUN", 0.03),
    ("CCONJ", "SCONJ", 0.01),
    ("SCONJ", "ADP", 0.05),
];

/// Samples predicted tags by flipping each token independently per
/// [`SIMULATED_CONFUSION`]. Tags without a row (PUNCT) never flip.
pub fn simulated_tags(tb: &Treebank, seed: u64) -> Vec<Vec<String>> {
    let mut rng = seeding::rng_from(seeding::derive_seed(seed, &["simtag"]));
    tb.sentences
        .iter()
        .map(|sent| {
            sent.tokens
                .iter()
                .map(|tok| {
                    let rows: Vec<_> = SIMULATED_CONFUSION
                        .iter()
                        .filter(|(gold, _, _)| *gold == tok.upos)
                        .collect();
                    if rows.is_empty() {
                        return tok.upos.clone();
                    }
                    let u = seeding::next_f64(&mut rng);
                    let mut acc = 0.0;
                    for (_, wrong, p) in rows {
                        acc += p;
                        if u < acc {
                            return wrong.to_string();
                        }
                    }
                    tok.upos.clone()
                })
                .collect()
        })
        .collect()
}

const RANDOM_TAGS: &[&str] = &["NOUN", "VERB", "DET", "ADJ", "ADV", "ADP", "PROPN"];
const RANDOM_DEPRELS: &[&str] = &["nsubj", "obj", "nmod", "amod", "det", "case", "advmod", "dep"];

fn decorate(heads: Vec<usize>, rng: &mut ChaCha8Rng) -> DepTree {
    let n = heads.len();
    let forms: Vec<String> = (1..=n).map(|i| format!("w{i}")).collect();
    let form_refs: Vec<&str> = forms.iter().map(|s| s.as_str()).collect();
    let upos: Vec<&str> = (0..n)
        .map(|_| RANDOM_TAGS[seeding::next_index(rng, RANDOM_TAGS.len())])
        .collect();
    let deprels: Vec<&str> = heads
        .iter()
        .map(|&h| {
            if h == 0 {
                "root"
            } else {
                RANDOM_DEPRELS[seeding::next_index(rng, RANDOM_DEPRELS.len())]
            }
        })
        .collect();
    DepTree::from_parts(&form_refs, &upos, &heads, &deprels)
}

/// Uniform random tree over n tokens plus the root, by decoding a random
/// Pruefer sequence on n+1 nodes and orienting away from node 0.
pub fn random_tree(n: usize, rng: &mut ChaCha8Rng) -> DepTree {
    assert!(n >= 1);
    let m = n + 1;
    let mut degree = vec![1u32; m];
    let seq: Vec<usize> = (0..m.saturating_sub(2))
        .map(|_| seeding::next_index(rng, m))
        .collect();
    for &v in &seq {
        degree[v] += 1;
    }
    let mut adj = vec![Vec::new(); m];
    let mut used = vec![false; m];
    for &v in &seq {
        let leaf = (0..m).find(|&u| !used[u] && degree[u] == 1).unwrap();
        used[leaf] = true;
        degree[v] -= 1;
        adj[leaf].push(v);
        adj[v].push(leaf);
    }
    let rest: Vec<usize> = (0..m).filter(|&u| !used[u]).collect();
    debug_assert_eq!(rest.len(), 2);
    adj[rest[0]].push(rest[1]);
    adj[rest[1]].push(rest[0]);

    let mut heads = vec![0usize; n];
    let mut seen = vec![false; m];
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                heads[v - 1] = u;
                queue.push_back(v);
            }
        }
    }
    decorate(heads, rng)
}

/// Random projective tree: picks a segment head uniformly and recurses on
/// both sides, so every subtree covers a contiguous span.
pub fn random_projective_tree(n: usize, rng: &mut ChaCha8Rng) -> DepTree {
    assert!(n >= 1);
    fn fill(heads: &mut [usize], lo: usize, hi: usize, head: usize, rng: &mut ChaCha8Rng) {
        if lo > hi {
            return;
        }
        let r = lo + seeding::next_index(rng, hi - lo + 1);
        heads[r - 1] = head;
        if r > lo {
            fill(heads, lo, r - 1, r, rng);
        }
        fill(heads, r + 1, hi, r, rng);
    }
    let mut heads = vec![0usize; n];
    fill(&mut heads, 1, n, 0, rng);
    decorate(heads, rng)
}
