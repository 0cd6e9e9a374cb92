//! Randomized invariants: validation vs reachability, projectivity vs the
//! exhaustive crossing check, encode/decode round trips, decoder
//! well-formedness under shuffled labels, label bookkeeping identities,
//! plan construction vs a water-filling oracle, and split partitioning.

use linlab_core::conllu::{crossing_arc_pairs, is_projective, resplit, validate};
use linlab_core::linearize::{
    decode, encode, oracle_arc_hybrid, oracle_covington, transitions_to_labels, Transition,
    TransitionSystem,
};
use linlab_core::noise::{build_plan, corrupt, tagging_accuracy, CorruptOptions, Eligibility,
    ErrorModel, PlanMode};
use linlab_core::synth::{random_projective_tree, random_tree};
use linlab_core::{seeding, DepTree, Encoding, Error, Labels, Treebank};
use proptest::prelude::*;

fn tree_from_heads(heads: &[usize]) -> DepTree {
    const TAGS: [&str; 5] = ["NOUN", "VERB", "DET", "ADJ", "ADP"];
    let forms: Vec<String> = (1..=heads.len()).map(|i| format!("w{i}")).collect();
    let refs: Vec<&str> = forms.iter().map(|s| s.as_str()).collect();
    let tags: Vec<&str> = (0..heads.len()).map(|i| TAGS[i % TAGS.len()]).collect();
    let rels: Vec<&str> = heads
        .iter()
        .map(|&h| if h == 0 { "root" } else { "dep" })
        .collect();
    DepTree::from_parts(&refs, &tags, heads, &rels)
}

fn reaches_root(heads: &[usize]) -> bool {
    let n = heads.len();
    for start in 1..=n {
        let mut at = start;
        let mut steps = 0;
        while at != 0 {
            if at > n || steps > n {
                return false;
            }
            at = heads[at - 1];
            steps += 1;
        }
    }
    true
}

fn arb_tree() -> impl Strategy<Value = DepTree> {
    (any::<u64>(), 1..=12usize).prop_map(|(seed, n)| {
        let mut rng = seeding::rng_from(seed);
        random_tree(n, &mut rng)
    })
}

fn arb_projective() -> impl Strategy<Value = DepTree> {
    (any::<u64>(), 1..=12usize).prop_map(|(seed, n)| {
        let mut rng = seeding::rng_from(seed);
        random_projective_tree(n, &mut rng)
    })
}

// Independent capping solver: repeatedly cap the single most saturated tag,
// using the same exact integer overflow test the plan builder must satisfy.
fn water_filling(model: &ErrorModel, e_a: u64) -> (f64, Vec<String>) {
    let mut order: Vec<&str> = model
        .tags()
        .filter(|t| model.error_count(t) > 0)
        .collect();
    order.sort_by(|a, b| {
        let ra = model.count(a) as f64 / model.error_count(a) as f64;
        let rb = model.count(b) as f64 / model.error_count(b) as f64;
        ra.partial_cmp(&rb).unwrap().then(a.cmp(b))
    });
    let mut capped: Vec<&str> = Vec::new();
    loop {
        let c_capped: u64 = capped.iter().map(|t| model.count(t)).sum();
        let e_rem: u64 = order
            .iter()
            .filter(|t| !capped.contains(t))
            .map(|t| model.error_count(t))
            .sum();
        let target = (e_a - c_capped) as u128;
        let gamma = target as f64 / e_rem as f64;
        let next = order.iter().copied().find(|t| {
            !capped.contains(t)
                && target * model.error_count(t) as u128
                    > model.count(t) as u128 * e_rem as u128
        });
        match next {
            Some(t) => capped.push(t),
            None => {
                let mut names: Vec<String> = capped.iter().map(|s| s.to_string()).collect();
                names.sort();
                return (gamma, names);
            }
        }
    }
}

proptest! {
    #[test]
    fn validation_agrees_with_reachability(
        heads in (1..=8usize).prop_flat_map(|n| proptest::collection::vec(0..=n + 1, n))
    ) {
        let tree = tree_from_heads(&heads);
        let self_head = heads.iter().enumerate().any(|(i, &h)| h == i + 1);
        let sound = !self_head && reaches_root(&heads);
        prop_assert_eq!(validate(&tree, 1).is_ok(), sound);
    }

    #[test]
    fn projectivity_matches_the_exhaustive_pair_check(tree in arb_tree()) {
        let arcs = tree.arcs();
        let mut any_cross = false;
        for i in 0..arcs.len() {
            for j in i + 1..arcs.len() {
                any_cross |= arcs[i].crosses(&arcs[j]);
            }
        }
        prop_assert_eq!(is_projective(&tree), !any_cross);
        prop_assert_eq!(crossing_arc_pairs(&tree).is_empty(), !any_cross);
    }

    #[test]
    fn relpos_and_covington_round_trip_every_tree(tree in arb_tree()) {
        let tags = tree.upos();
        for enc in [Encoding::RelPos, Encoding::Covington] {
            let (sent, dropped) = encode(enc, &tree).unwrap();
            prop_assert_eq!(dropped, 0);
            let (heads, _) = decode(&sent, &tags).unwrap();
            prop_assert_eq!(&heads, &tree.heads());
        }
    }

    #[test]
    fn arc_hybrid_round_trips_projective_trees(tree in arb_projective()) {
        let (sent, _) = encode(Encoding::ArcHybrid, &tree).unwrap();
        let (heads, stats) = decode(&sent, &tree.upos()).unwrap();
        prop_assert_eq!(&heads, &tree.heads());
        prop_assert_eq!(stats.transition_skips, 0);
    }

    #[test]
    fn brackets_round_trip_or_stay_well_formed(tree in arb_tree()) {
        let (sent, dropped) = encode(Encoding::Brackets, &tree).unwrap();
        let (heads, _) = decode(&sent, &tree.upos()).unwrap();
        let rebuilt = tree_from_heads(&heads);
        prop_assert!(validate(&rebuilt, 1).is_ok());
        if dropped == 0 {
            prop_assert_eq!(&heads, &tree.heads());
        }
    }

    #[test]
    fn nonprojective_input_is_rejected_by_arc_hybrid_only(tree in arb_tree()) {
        let result = encode(Encoding::ArcHybrid, &tree);
        if is_projective(&tree) {
            prop_assert!(result.is_ok());
        } else {
            prop_assert!(matches!(result, Err(Error::NotProjective)));
        }
    }

    #[test]
    fn decoders_ignore_tags_except_relpos(tree in arb_tree(), shuffle_seed in any::<u64>()) {
        let tags = tree.upos();
        let mut permuted: Vec<&str> = tags.clone();
        let mut rng = seeding::rng_from(shuffle_seed);
        seeding::shuffle(&mut rng, &mut permuted);
        for enc in [Encoding::Brackets, Encoding::Covington] {
            let (sent, _) = encode(enc, &tree).unwrap();
            let (a, _) = decode(&sent, &tags).unwrap();
            let (b, _) = decode(&sent, &permuted).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn shuffled_labels_still_decode_to_valid_trees(
        tree in arb_tree(),
        shuffle_seed in any::<u64>(),
    ) {
        let mut rng = seeding::rng_from(shuffle_seed);
        for enc in Encoding::ALL {
            let encoded = match encode(enc, &tree) {
                Ok((sent, _)) => sent,
                Err(Error::NotProjective) => continue,
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            };
            let mut surfaces = encoded.labels.surfaces();
            seeding::shuffle(&mut rng, &mut surfaces);
            let refs: Vec<&str> = surfaces.iter().map(|s| s.as_str()).collect();
            let mangled = linlab_core::EncodedSentence {
                encoding: enc,
                labels: Labels::from_surfaces(enc, &refs).unwrap(),
                deprels: encoded.deprels.clone(),
            };
            let (heads, _) = decode(&mangled, &tree.upos()).unwrap();
            let rebuilt = tree_from_heads(&heads);
            prop_assert!(validate(&rebuilt, 1).is_ok(), "{} produced an invalid tree", enc);
        }
    }

    #[test]
    fn bracket_symbols_pay_two_per_encoded_arc(tree in arb_tree()) {
        let (sent, dropped) = encode(Encoding::Brackets, &tree).unwrap();
        let surfaces = sent.labels.surfaces();
        let symbols: usize = surfaces
            .iter()
            .map(|s| s.chars().filter(|c| ['<', '>', '/', '\\'].contains(c)).count())
            .sum();
        let non_root = tree.arcs().iter().filter(|a| a.head != 0).count();
        prop_assert_eq!(symbols, 2 * (non_root - dropped));
    }

    #[test]
    fn transition_labels_concatenate_back_to_the_sequence(tree in arb_tree()) {
        let seq = oracle_covington(&tree);
        let labels = transitions_to_labels(&seq, Transition::Shift, tree.len()).unwrap();
        let rebuilt: Vec<Transition> = labels.iter().flat_map(|l| l.actions.clone()).collect();
        prop_assert_eq!(rebuilt, seq);

        if is_projective(&tree) {
            let seq = oracle_arc_hybrid(&tree).unwrap();
            let labels = transitions_to_labels(&seq, Transition::Shift, tree.len()).unwrap();
            let rebuilt: Vec<Transition> =
                labels.iter().flat_map(|l| l.actions.clone()).collect();
            prop_assert_eq!(rebuilt, seq);
        }
    }

    #[test]
    fn arbitrary_transition_labels_decode_to_valid_trees(
        raw in proptest::collection::vec(
            proptest::sample::select(vec![
                "SH", "SH;LA", "SH;RA", "SH;NA", "SH;LA;RA", "SH;RA;LA", "SH;NA;NA;LA",
                "SH;LA;LA", "SH;RA;RA;NA",
            ]),
            1..10,
        )
    ) {
        let refs: Vec<&str> = raw.to_vec();
        for (enc, system) in [
            (Encoding::ArcHybrid, TransitionSystem::ArcHybrid),
            (Encoding::Covington, TransitionSystem::Covington),
        ] {
            let labels = match Labels::from_surfaces(enc, &refs) {
                Ok(Labels::Transition(v)) => v,
                _ => unreachable!(),
            };
            let (heads, _) = linlab_core::linearize::decode_transitions(&labels, system);
            prop_assert_eq!(heads.len(), raw.len());
            let rebuilt = tree_from_heads(&heads);
            prop_assert!(validate(&rebuilt, 1).is_ok(), "{:?} broke {}", raw, enc);
        }
    }

    #[test]
    fn plans_match_the_water_filling_oracle(
        mix in proptest::collection::vec((1u64..60, 0u64..60), 1..6),
        pct in 0u32..=100,
    ) {
        let tags: Vec<String> = (0..mix.len()).map(|i| format!("t{i}")).collect();
        let counts: Vec<(&str, u64)> = tags
            .iter()
            .zip(&mix)
            .map(|(t, (c, _))| (t.as_str(), *c))
            .collect();
        let confusion: Vec<(&str, &str, u64)> = tags
            .iter()
            .zip(&mix)
            .filter(|(_, (c, e))| e.min(c) > &0)
            .map(|(t, (c, e))| (t.as_str(), "x", *e.min(c)))
            .collect();
        let model = ErrorModel::from_counts(&counts, &confusion).unwrap();
        let a = f64::from(pct) / 100.0;
        let e_a = ((1.0 - a) * model.total_tokens() as f64).round() as u64;
        let capacity: u64 = tags
            .iter()
            .filter(|t| model.error_count(t) > 0)
            .map(|t| model.count(t))
            .sum();

        match build_plan(&model, a) {
            Err(Error::NoErrorEvidence { demanded, capacity: reported, .. }) => {
                prop_assert!(capacity < e_a);
                prop_assert_eq!(demanded, e_a);
                prop_assert_eq!(reported, capacity);
            }
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
            Ok(plan) => {
                prop_assert!(capacity >= e_a);
                prop_assert_eq!(plan.target_errors, e_a);
                if e_a > 0 {
                    let expected: f64 = tags
                        .iter()
                        .filter(|t| model.error_count(t) > 0)
                        .map(|t| {
                            if plan.capped.contains(t.as_str()) {
                                model.count(t) as f64
                            } else {
                                plan.gamma * model.error_count(t) as f64
                            }
                        })
                        .sum();
                    prop_assert!(
                        (expected - e_a as f64).abs() < 1e-6 * (e_a as f64).max(1.0),
                        "expected {} vs target {}", expected, e_a
                    );
                    let oracle = water_filling(&model, e_a);
                    prop_assert!((plan.gamma - oracle.0).abs() < 1e-9);
                    prop_assert_eq!(&plan.capped.iter().cloned().collect::<Vec<_>>(), &oracle.1);
                    let correct_mode =
                        if e_a > model.total_errors() { PlanMode::Grow } else { PlanMode::Shrink };
                    prop_assert_eq!(plan.mode, correct_mode);
                }
                for p in plan.per_tag.values().chain(plan.grow_extra.values()) {
                    prop_assert!((0.0..=1.0).contains(p), "probability {}", p);
                }
            }
        }
    }

    #[test]
    fn corruption_hits_tolerance_or_reports_its_best(
        pct in 50u32..100,
        seed in any::<u64>(),
    ) {
        let trees = (0..10)
            .map(|_| {
                let forms: Vec<String> = (0..20).map(|i| format!("w{i}")).collect();
                let refs: Vec<&str> = forms.iter().map(|s| s.as_str()).collect();
                let mut heads = vec![0];
                heads.extend([1].repeat(19));
                DepTree::from_parts(&refs, &vec!["NOUN"; 20], &heads, &vec!["dep"; 20])
            })
            .collect();
        let tb = Treebank::new("t", trees);
        let model = ErrorModel::from_counts(&[("NOUN", 200)], &[("NOUN", "VERB", 20)]).unwrap();
        let a = f64::from(pct) / 100.0;
        let plan = build_plan(&model, a).unwrap();
        let opts = CorruptOptions::default();
        match corrupt(&tb, &model, &plan, Eligibility::AllTokens, seed, &opts) {
            Ok((out, achieved)) => {
                prop_assert_eq!(tagging_accuracy(&tb, &out).unwrap(), achieved);
                let target = ((1.0 - a) * 200.0).round();
                let flips = (1.0 - achieved) * 200.0;
                prop_assert!((flips - target).abs() <= opts.tolerance * target + 1e-6);
            }
            Err(Error::Tolerance { attempts, .. }) => prop_assert_eq!(attempts, 20),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn resplit_partitions_and_keeps_order(n in 3usize..80, seed in any::<u64>()) {
        let trees: Vec<DepTree> = (0..n)
            .map(|i| {
                let form = format!("s{i}");
                DepTree::from_parts(&[form.as_str()], &["NOUN"], &[0], &["root"])
            })
            .collect();
        let tb = Treebank::new("t", trees);
        let (train, dev, test) = resplit(&tb, (0.6, 0.1, 0.3), seed).unwrap();
        let nf = n as f64;
        prop_assert_eq!(dev.sentences.len(), (nf * 0.1 + 1e-9).floor() as usize);
        prop_assert_eq!(test.sentences.len(), (nf * 0.3 + 1e-9).floor() as usize);
        prop_assert_eq!(
            train.sentences.len() + dev.sentences.len() + test.sentences.len(),
            n
        );

        let ids = |part: &Treebank| -> Vec<usize> {
            part.sentences
                .iter()
                .map(|s| s.tokens[0].form[1..].parse().unwrap())
                .collect()
        };
        let (a, b, c) = (ids(&train), ids(&dev), ids(&test));
        for part in [&a, &b, &c] {
            prop_assert!(part.windows(2).all(|w| w[0] < w[1]), "split not in corpus order");
        }
        let mut all: Vec<usize> = a.into_iter().chain(b).chain(c).collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }
}
