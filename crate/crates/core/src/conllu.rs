//! CoNLL-U parsing, serialization, validation, and the tree predicates the
//! encodings build on.
//!
//! Only ID, FORM, UPOS, HEAD, and DEPREL are interpreted. LEMMA, XPOS,
//! FEATS, DEPS, and MISC pass through byte-for-byte, as do comment lines,
//! multiword-token ranges ("3-4"), and empty nodes ("5.1").

use crate::error::{Error, Result};
use crate::seeding;

/// One syntactic word. `index` is 1-based; `head` 0 means the artificial root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub index: usize,
    pub form: String,
    pub upos: String,
    pub head: usize,
    pub deprel: String,
    lemma: String,
    xpos: String,
    feats: String,
    deps: String,
    misc: String,
}

impl Token {
    pub fn new(
        index: usize,
        form: impl Into<String>,
        upos: impl Into<String>,
        head: usize,
        deprel: impl Into<String>,
    ) -> Self {
        Token {
            index,
            form: form.into(),
            upos: upos.into(),
            head,
            deprel: deprel.into(),
            lemma: "_".into(),
            xpos: "_".into(),
            feats: "_".into(),
            deps: "_".into(),
            misc: "_".into(),
        }
    }

    /// All ten columns in file order.
    pub fn columns(&self) -> [String; 10] {
        [
            self.index.to_string(),
            self.form.clone(),
            self.lemma.clone(),
            self.upos.clone(),
            self.xpos.clone(),
            self.feats.clone(),
            self.head.to_string(),
            self.deprel.clone(),
            self.deps.clone(),
            self.misc.clone(),
        ]
    }

    fn write_line(&self, out: &mut String) {
        use std::fmt::Write;
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.index,
            self.form,
            self.lemma,
            self.upos,
            self.xpos,
            self.feats,
            self.head,
            self.deprel,
            self.deps,
            self.misc
        )
        .unwrap();
    }
}

/// One sentence: a rooted dependency tree over its tokens.
///
/// `extras` holds pass-through lines (ranges, empty nodes) keyed by how many
/// word lines preceded them, so serialization restores the original order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DepTree {
    pub tokens: Vec<Token>,
    pub comments: Vec<String>,
    extras: Vec<(usize, String)>,
}

impl DepTree {
    /// Builds a sentence from parallel slices. Lengths must agree.
    pub fn from_parts(forms: &[&str], upos: &[&str], heads: &[usize], deprels: &[&str]) -> Self {
        assert!(forms.len() == upos.len() && upos.len() == heads.len());
        assert!(heads.len() == deprels.len());
        let tokens = forms
            .iter()
            .zip(upos)
            .zip(heads)
            .zip(deprels)
            .enumerate()
            .map(|(i, (((f, u), h), d))| Token::new(i + 1, *f, *u, *h, *d))
            .collect();
        DepTree {
            tokens,
            comments: Vec::new(),
            extras: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn heads(&self) -> Vec<usize> {
        self.tokens.iter().map(|t| t.head).collect()
    }

    pub fn upos(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.upos.as_str()).collect()
    }

    /// All dependency arcs, root arcs included, ordered by dependent.
    pub fn arcs(&self) -> Vec<Arc> {
        self.tokens
            .iter()
            .map(|t| Arc {
                head: t.head,
                dep: t.index,
            })
            .collect()
    }

    fn write_block(&self, out: &mut String) {
        for c in &self.comments {
            out.push_str(c);
            out.push('\n');
        }
        let mut extras = self.extras.iter().peekable();
        for words_done in 0..=self.tokens.len() {
            while let Some((_, line)) = extras.next_if(|(at, _)| *at == words_done) {
                out.push_str(line);
                out.push('\n');
            }
            if let Some(tok) = self.tokens.get(words_done) {
                tok.write_line(out);
            }
        }
    }
}

/// An ordered collection of sentences.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Treebank {
    pub name: String,
    pub sentences: Vec<DepTree>,
}

impl Treebank {
    pub fn new(name: impl Into<String>, sentences: Vec<DepTree>) -> Self {
        Treebank {
            name: name.into(),
            sentences,
        }
    }

    /// Syntactic-word count across all sentences.
    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.len()).sum()
    }
}

/// A single dependency arc; `head` 0 is the artificial root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub head: usize,
    pub dep: usize,
}

impl Arc {
    /// Right arcs point rightward from the head; root arcs count as right.
    pub fn is_right(&self) -> bool {
        self.head < self.dep
    }

    fn span(&self) -> (usize, usize) {
        (self.head.min(self.dep), self.head.max(self.dep))
    }

    /// Strict interleaving: shared endpoints never cross.
    pub fn crosses(&self, other: &Arc) -> bool {
        let (a1, b1) = self.span();
        let (a2, b2) = other.span();
        (a1 < a2 && a2 < b1 && b1 < b2) || (a2 < a1 && a1 < b2 && b2 < b1)
    }
}

/// Two crossing arcs, ordered by dependent index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossingPair {
    pub first: Arc,
    pub second: Arc,
    pub same_direction: bool,
}

/// Checks head range, self-attachment, and rooted-tree shape.
pub fn validate(tree: &DepTree, sentence: usize) -> Result<()> {
    let n = tree.tokens.len();
    if n == 0 {
        return Err(Error::Invalid {
            sentence,
            msg: "sentence has no tokens".into(),
        });
    }
    for tok in &tree.tokens {
        if tok.head > n {
            return Err(Error::Invalid {
                sentence,
                msg: format!("token {}: head {} out of range (n={})", tok.index, tok.head, n),
            });
        }
        if tok.head == tok.index {
            return Err(Error::Invalid {
                sentence,
                msg: format!("token {} is its own head", tok.index),
            });
        }
        if tok.upos.is_empty() {
            return Err(Error::Invalid {
                sentence,
                msg: format!("token {} has an empty tag", tok.index),
            });
        }
    }
    // Parent walk with tri-state marks: every token must reach the root
    // without revisiting an in-progress node.
    let mut state = vec![0u8; n + 1];
    state[0] = 2;
    for start in 1..=n {
        let mut path = Vec::new();
        let mut cur = start;
        while state[cur] == 0 {
            state[cur] = 1;
            path.push(cur);
            cur = tree.tokens[cur - 1].head;
        }
        if state[cur] == 1 {
            return Err(Error::Invalid {
                sentence,
                msg: format!("cycle through token {cur}"),
            });
        }
        for p in path {
            state[p] = 2;
        }
    }
    Ok(())
}

/// True iff no two arcs (root arcs included) cross.
pub fn is_projective(tree: &DepTree) -> bool {
    let arcs = tree.arcs();
    for (i, a) in arcs.iter().enumerate() {
        for b in &arcs[i + 1..] {
            if a.crosses(b) {
                return false;
            }
        }
    }
    true
}

/// Every crossing pair, ordered by the dependents of the two arcs.
pub fn crossing_arc_pairs(tree: &DepTree) -> Vec<CrossingPair> {
    let arcs = tree.arcs();
    let mut out = Vec::new();
    for (i, a) in arcs.iter().enumerate() {
        for b in &arcs[i + 1..] {
            if a.crosses(b) {
                out.push(CrossingPair {
                    first: *a,
                    second: *b,
                    same_direction: a.is_right() == b.is_right(),
                });
            }
        }
    }
    out
}

fn is_plain_index(id: &str) -> bool {
    !id.is_empty() && id.bytes().all(|b| b.is_ascii_digit())
}

fn is_passthrough_id(id: &str) -> bool {
    // "3-4" multiword ranges and "5.1" empty nodes stay opaque.
    let mut parts = id.splitn(2, ['-', '.']);
    match (parts.next(), parts.next()) {
        (Some(a), Some(b)) => is_plain_index(a) && is_plain_index(b),
        _ => false,
    }
}

struct SentenceAccum {
    tree: DepTree,
    start_line: usize,
}

fn parse_token_line(line: &str, lineno: usize) -> Result<Token> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("expected 10 tab-separated columns, found {}", cols.len()),
        });
    }
    let index: usize = cols[0].parse().map_err(|_| Error::Parse {
        line: lineno,
        msg: format!("bad token id {:?}", cols[0]),
    })?;
    let head: usize = cols[6].parse().map_err(|_| Error::Parse {
        line: lineno,
        msg: format!("non-integer head {:?}", cols[6]),
    })?;
    Ok(Token {
        index,
        form: cols[1].to_string(),
        upos: cols[3].to_string(),
        head,
        deprel: cols[7].to_string(),
        lemma: cols[2].to_string(),
        xpos: cols[4].to_string(),
        feats: cols[5].to_string(),
        deps: cols[8].to_string(),
        misc: cols[9].to_string(),
    })
}

fn parse_sentences(text: &str) -> Result<Vec<(DepTree, usize)>> {
    let mut done: Vec<(DepTree, usize)> = Vec::new();
    let mut cur: Option<SentenceAccum> = None;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        if raw.trim().is_empty() {
            if let Some(acc) = cur.take() {
                done.push((acc.tree, acc.start_line));
            }
            continue;
        }
        let acc = cur.get_or_insert_with(|| SentenceAccum {
            tree: DepTree::default(),
            start_line: lineno,
        });
        let words_seen = acc.tree.tokens.len();
        if raw.starts_with('#') {
            if words_seen == 0 {
                acc.tree.comments.push(raw.to_string());
            } else {
                acc.tree.extras.push((words_seen, raw.to_string()));
            }
            continue;
        }
        let id = raw.split('\t').next().unwrap_or("");
        if is_passthrough_id(id) {
            acc.tree.extras.push((words_seen, raw.to_string()));
            continue;
        }
        let tok = parse_token_line(raw, lineno)?;
        if tok.index != words_seen + 1 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("token id {} out of sequence (expected {})", tok.index, words_seen + 1),
            });
        }
        acc.tree.tokens.push(tok);
    }
    if let Some(acc) = cur.take() {
        done.push((acc.tree, acc.start_line));
    }
    Ok(done)
}

/// Parses CoNLL-U text, validating every sentence. The first invalid
/// sentence aborts the parse.
pub fn parse_conllu(text: &str) -> Result<Treebank> {
    let mut sentences = Vec::new();
    for (idx, (tree, _)) in parse_sentences(text)?.into_iter().enumerate() {
        validate(&tree, idx + 1)?;
        sentences.push(tree);
    }
    Ok(Treebank::new("", sentences))
}

/// Like [`parse_conllu`], but invalid sentences are dropped and reported
/// instead of aborting. Parse-level errors (malformed lines) still abort.
pub fn parse_conllu_skipping(text: &str) -> Result<(Treebank, Vec<Error>)> {
    let mut sentences = Vec::new();
    let mut skipped = Vec::new();
    for (idx, (tree, _)) in parse_sentences(text)?.into_iter().enumerate() {
        match validate(&tree, idx + 1) {
            Ok(()) => sentences.push(tree),
            Err(e) => skipped.push(e),
        }
    }
    Ok((Treebank::new("", sentences), skipped))
}

/// Serializes a treebank; each sentence block ends with one blank line.
pub fn write_conllu(tb: &Treebank) -> String {
    let mut out = String::new();
    for tree in &tb.sentences {
        tree.write_block(&mut out);
        out.push('\n');
    }
    out
}

/// Splits sentences into (train, dev, test) with floor-based dev/test counts
/// and the remainder in train. Deterministic for a given seed; corpus order
/// is kept within each split.
pub fn resplit(
    tb: &Treebank,
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<(Treebank, Treebank, Treebank)> {
    let (rt, rd, rs) = ratios;
    if rt < 0.0 || rd < 0.0 || rs < 0.0 || (rt + rd + rs - 1.0).abs() > 1e-9 {
        return Err(Error::data(format!("ratios {ratios:?} do not sum to 1")));
    }
    let n = tb.sentences.len();
    if n < 3 {
        return Err(Error::data(format!("cannot split {n} sentences three ways")));
    }
    // The epsilon absorbs binary-fraction noise so 0.3 * 100 counts as 30.
    let dev_n = ((n as f64) * rd + 1e-9).floor() as usize;
    let test_n = ((n as f64) * rs + 1e-9).floor() as usize;
    let train_n = n - dev_n - test_n;

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = seeding::rng_from(seed);
    seeding::shuffle(&mut rng, &mut order);

    let take = |count: usize, offset: usize| {
        let mut picked: Vec<usize> = order[offset..offset + count].to_vec();
        picked.sort_unstable();
        Treebank::new(
            tb.name.clone(),
            picked.iter().map(|&i| tb.sentences[i].clone()).collect(),
        )
    };
    let train = take(train_n, 0);
    let dev = take(dev_n, train_n);
    let test = take(test_n, train_n + dev_n);
    Ok((train, dev, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FOUR: &str = "\
1\tthe\t_\tDET\t_\t_\t2\tdet\t_\t_
2\tdog\t_\tNOUN\t_\t_\t3\tnsubj\t_\t_
3\tchased\t_\tVERB\t_\t_\t0\troot\t_\t_
4\tcats\t_\tNOUN\t_\t_\t3\tobj\t_\t_
";

    fn four_tree() -> DepTree {
        DepTree::from_parts(
            &["the", "dog", "chased", "cats"],
            &["DET", "NOUN", "VERB", "NOUN"],
            &[2, 3, 0, 3],
            &["det", "nsubj", "root", "obj"],
        )
    }

    #[test]
    fn parses_a_four_token_sentence() {
        let tb = parse_conllu(FOUR).unwrap();
        assert_eq!(tb.sentences.len(), 1);
        let s = &tb.sentences[0];
        assert_eq!(s.len(), 4);
        assert_eq!(s.heads(), vec![2, 3, 0, 3]);
        assert_eq!(s.upos(), vec!["DET", "NOUN", "VERB", "NOUN"]);
        assert_eq!(s.tokens[0].form, "the");
        assert_eq!(s.tokens[2].deprel, "root");
    }

    #[test]
    fn empty_input_is_an_empty_treebank() {
        let tb = parse_conllu("").unwrap();
        assert!(tb.sentences.is_empty());
        assert_eq!(parse_conllu("\n\n").unwrap().sentences.len(), 0);
    }

    #[test]
    fn head_out_of_range_is_rejected() {
        let bad = FOUR.replace("2\tdog\t_\tNOUN\t_\t_\t3", "2\tdog\t_\tNOUN\t_\t_\t9");
        let err = parse_conllu(&bad).unwrap_err();
        assert!(err.to_string().contains("out of range"), "{err}");
    }

    #[test]
    fn malformed_lines_name_the_line_number() {
        let err = parse_conllu("1\tonly\tthree\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = parse_conllu("1\ta\t_\tX\t_\t_\tzz\tdep\t_\t_\n").unwrap_err();
        assert!(err.to_string().contains("non-integer head"), "{err}");
    }

    #[test]
    fn self_head_and_cycles_are_rejected() {
        let own = "1\ta\t_\tX\t_\t_\t1\tdep\t_\t_\n";
        assert!(parse_conllu(own).is_err());
        let cyc = "1\ta\t_\tX\t_\t_\t2\tdep\t_\t_\n2\tb\t_\tX\t_\t_\t1\tdep\t_\t_\n";
        let err = parse_conllu(cyc).unwrap_err();
        assert!(err.to_string().contains("cycle"), "{err}");
    }

    #[test]
    fn skipping_parse_keeps_good_sentences() {
        let two = format!("{FOUR}\n1\ta\t_\tX\t_\t_\t7\tdep\t_\t_\n\n{FOUR}");
        let (tb, skipped) = parse_conllu_skipping(&two).unwrap();
        assert_eq!(tb.sentences.len(), 2);
        assert_eq!(skipped.len(), 1);
        assert!(skipped[0].to_string().contains("sentence 2"));
    }

    #[test]
    fn round_trip_preserves_everything_retained() {
        let text = "\
# sent_id = demo-1
# text = the dog chased cats
1\tthe\tthe\tDET\tDT\tDefinite=Def\t2\tdet\t_\tSpaceAfter=No
2\tdog\tdog\tNOUN\tNN\tNumber=Sing\t3\tnsubj\t2:nsubj\t_
3-4\tchased'em\t_\t_\t_\t_\t_\t_\t_\t_
3\tchased\tchase\tVERB\tVBD\tTense=Past\t0\troot\t_\t_
4\tcats\tcat\tNOUN\tNNS\tNumber=Plur\t3\tobj\t_\tHighlight=Yes
4.1\telided\t_\t_\t_\t_\t_\t_\t_\t_
";
        let tb = parse_conllu(text).unwrap();
        let written = write_conllu(&tb);
        assert_eq!(written, format!("{text}\n"));
        assert_eq!(parse_conllu(&written).unwrap(), tb);
        // pass-through lines carry no tokens
        assert_eq!(tb.sentences[0].len(), 4);
        assert_eq!(tb.sentences[0].comments.len(), 2);
    }

    #[test]
    fn upos_edit_changes_only_column_four() {
        let mut tb = parse_conllu(FOUR).unwrap();
        tb.sentences[0].tokens[1].upos = "VERB".into();
        let before: Vec<Vec<String>> = parse_conllu(FOUR).unwrap().sentences[0]
            .tokens
            .iter()
            .map(|t| t.columns().to_vec())
            .collect();
        let after: Vec<Vec<String>> = tb.sentences[0]
            .tokens
            .iter()
            .map(|t| t.columns().to_vec())
            .collect();
        for (i, (b, a)) in before.iter().zip(&after).enumerate() {
            for c in 0..10 {
                if i == 1 && c == 3 {
                    assert_ne!(b[c], a[c]);
                } else {
                    assert_eq!(b[c], a[c]);
                }
            }
        }
    }

    #[test]
    fn projectivity_of_known_trees() {
        assert!(is_projective(&four_tree()));
        let single = DepTree::from_parts(&["hi"], &["INTJ"], &[0], &["root"]);
        assert!(is_projective(&single));
        let crossing = DepTree::from_parts(
            &["a", "b", "c", "d"],
            &["X", "X", "X", "X"],
            &[3, 0, 4, 2],
            &["dep", "root", "dep", "dep"],
        );
        assert!(!is_projective(&crossing));
    }

    #[test]
    fn crossing_pairs_on_the_known_nonprojective_tree() {
        // heads [3,0,4,2]: arc (2,4) interleaves with (3,1), and so does the
        // root arc (0,2); arcs sharing an endpoint never count.
        let crossing = DepTree::from_parts(
            &["a", "b", "c", "d"],
            &["X", "X", "X", "X"],
            &[3, 0, 4, 2],
            &["dep", "root", "dep", "dep"],
        );
        let pairs = crossing_arc_pairs(&crossing);
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].first, Arc { head: 3, dep: 1 });
        assert_eq!(pairs[0].second, Arc { head: 0, dep: 2 });
        assert!(!pairs[0].same_direction); // left arc vs root (right) arc
        assert_eq!(pairs[1].first, Arc { head: 3, dep: 1 });
        assert_eq!(pairs[1].second, Arc { head: 2, dep: 4 });
        assert!(!pairs[1].same_direction);
        assert!(crossing_arc_pairs(&four_tree()).is_empty());
    }

    #[test]
    fn nested_arcs_do_not_cross() {
        // token 4 heads everything; spans [3,4] nests inside [1,4] via (4,1),(4,3)
        let nested = DepTree::from_parts(
            &["a", "b", "c", "d"],
            &["X", "X", "X", "X"],
            &[4, 4, 4, 0],
            &["dep", "dep", "dep", "root"],
        );
        assert!(crossing_arc_pairs(&nested).is_empty());
    }

    #[test]
    fn resplit_sizes_and_determinism() {
        let make = |n: usize| {
            Treebank::new(
                "toy",
                (0..n)
                    .map(|i| {
                        DepTree::from_parts(&[&format!("w{i}")], &["NOUN"], &[0], &["root"])
                    })
                    .collect(),
            )
        };
        let (tr, dv, te) = resplit(&make(10), (0.6, 0.1, 0.3), 7).unwrap();
        assert_eq!((tr.sentences.len(), dv.sentences.len(), te.sentences.len()), (6, 1, 3));
        let (tr2, dv2, te2) = resplit(&make(10), (0.6, 0.1, 0.3), 7).unwrap();
        assert_eq!((tr, dv, te), (tr2, dv2, te2));

        let (tr, dv, te) = resplit(&make(100), (0.6, 0.1, 0.3), 1).unwrap();
        assert_eq!((tr.sentences.len(), dv.sentences.len(), te.sentences.len()), (60, 10, 30));
    }

    #[test]
    fn resplit_is_a_partition() {
        let tb = Treebank::new(
            "toy",
            (0..23)
                .map(|i| DepTree::from_parts(&[&format!("w{i}")], &["NOUN"], &[0], &["root"]))
                .collect(),
        );
        let (tr, dv, te) = resplit(&tb, (0.6, 0.1, 0.3), 99).unwrap();
        let mut seen: Vec<String> = tr
            .sentences
            .iter()
            .chain(&dv.sentences)
            .chain(&te.sentences)
            .map(|s| s.tokens[0].form.clone())
            .collect();
        assert_eq!(seen.len(), 23);
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 23);
        assert!(resplit(&Treebank::new("x", tb.sentences[..2].to_vec()), (0.6, 0.1, 0.3), 1).is_err());
    }
}
