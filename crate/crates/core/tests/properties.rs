mod common;

use std::collections::{BTreeMap, BTreeSet};

use gdim::annotate::{dialogue_to_labels, pronoun_majority_label, AnnotateConfig, Utterance};
use gdim::apps::{
    build_control_corpus_wordlist, completes_repeat, generate_ids, generation_stats, median,
    parse_line, train_controlled_lm, ControlToken, GenControl, GenerateConfig,
};
use gdim::classifier::{softmax, BiEncoderModel, TrainConfig};
use gdim::dataset::{
    class_counts, epoch_view, impute_about, oversample_balance, read_corpus, read_mdgender, split,
    write_corpus, write_mdgender, Confidence, Example, LabelOrigin,
};
use gdim::stats::welch_t_test;
use gdim::textkit::{
    count_gendered, mask_gendered, overrepresentation, tokenize, word_list_label, Lexicon,
    MASK_TOKEN,
};
use gdim::{Dimension, GenderLabel};
use proptest::prelude::*;
use proptest::sample::select;

const WORDS: &[&str] = &[
    "he", "she", "they", "his", "her", "them", "man", "woman", "mother", "father", "bob", "mary",
    "the", "a", "cat", "ran", "pregnant", "football", "happy", "house", "king", "queen", "sister",
    "brother", ",", ".", "!",
];

fn text_strategy(max_words: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(select(WORDS), 0..max_words).prop_map(|w| w.join(" "))
}

fn known_label() -> impl Strategy<Value = GenderLabel> {
    select(vec![
        GenderLabel::Masculine,
        GenderLabel::Feminine,
        GenderLabel::Neutral,
        GenderLabel::Unknown,
    ])
}

fn lex() -> Lexicon {
    Lexicon::builtin()
}

fn masc_list(lex: &Lexicon) -> Vec<&str> {
    lex.masculine_words.iter().map(String::as_str).collect()
}

fn fem_list(lex: &Lexicon) -> Vec<&str> {
    lex.feminine_words.iter().map(String::as_str).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn masking_keeps_length_and_is_idempotent(text in text_strategy(30), names in any::<bool>()) {
        let lex = lex();
        let toks = tokenize(&text);
        let once = mask_gendered(&toks, &lex, names);
        prop_assert_eq!(once.len(), toks.len());
        let twice = mask_gendered(&once, &lex, names);
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(count_gendered(&once, &lex).total(), 0);
        for (a, b) in toks.iter().zip(&once) {
            if b.surface != MASK_TOKEN {
                prop_assert_eq!(&a.surface, &b.surface);
            }
        }
    }

    #[test]
    fn gendered_counts_match_oracle_and_add(a in text_strategy(30), b in text_strategy(30)) {
        let lex = lex();
        let (m, f) = common::count_gendered(&a, &masc_list(&lex), &fem_list(&lex));
        let c = count_gendered(&tokenize(&a), &lex);
        prop_assert_eq!((c.masculine, c.feminine), (m, f));
        let joined = count_gendered(&tokenize(&format!("{a} {b}")), &lex);
        prop_assert_eq!(joined, c + count_gendered(&tokenize(&b), &lex));
        prop_assert_eq!(
            word_list_label(&tokenize(&a), &lex),
            common::word_list_label(&a, &masc_list(&lex), &fem_list(&lex))
        );
    }

    #[test]
    fn pronoun_label_ignores_order_and_filler(words in prop::collection::vec(select(WORDS), 0..25), seed in any::<u64>()) {
        let lex = lex();
        let cfg = AnnotateConfig::default();
        let base = pronoun_majority_label(&tokenize(&words.join(" ")), &lex, &cfg);
        let mut shuffled = words.clone();
        let n = shuffled.len();
        for i in 0..n {
            let j = (seed.wrapping_mul(i as u64 + 7) % n as u64) as usize;
            shuffled.swap(i, j);
        }
        prop_assert_eq!(pronoun_majority_label(&tokenize(&shuffled.join(" ")), &lex, &cfg), base);
        let padded = format!("house {} the cat ran", words.join(" "));
        prop_assert_eq!(pronoun_majority_label(&tokenize(&padded), &lex, &cfg), base);
    }

    #[test]
    fn overrepresentation_matches_brute_force(
        docs in prop::collection::vec((text_strategy(12), known_label()), 1..8),
        min_count in 1u64..4,
    ) {
        let corpus: Vec<_> = docs.iter().map(|(t, g)| (tokenize(t), *g)).collect();
        let oracle = common::overrepresentation(&docs, min_count);
        match overrepresentation(&corpus, min_count) {
            Ok(stats) => {
                prop_assert_eq!(stats.len(), oracle.len());
                for s in &stats {
                    let (ratio, count) = oracle[&(s.gender, s.word.clone())];
                    prop_assert!((s.ratio - ratio).abs() < 1e-9, "{} {}: {} vs {}", s.gender, s.word, s.ratio, ratio);
                    prop_assert_eq!(s.count, count);
                }
                for g in GenderLabel::CLASSES {
                    let ratios: Vec<f64> = stats.iter().filter(|s| s.gender == g).map(|s| s.ratio).collect();
                    prop_assert!(ratios.windows(2).all(|w| w[0] >= w[1]));
                }
            }
            Err(_) => prop_assert!(oracle.is_empty()),
        }
    }

    #[test]
    fn flipped_labels_balance_over_even_windows(n in 1usize..20, start in 0usize..50, k in 1usize..6, seed in any::<u64>()) {
        let examples: Vec<Example> = (0..n).map(|i| Example::new(format!("e{i}"), format!("text {i}"), "t")).collect();
        for e in 0..n {
            for dim in [Dimension::To, Dimension::As] {
                let masc = (start..start + 2 * k)
                    .filter(|&ep| epoch_view(&examples, ep, seed).examples[e].label(dim) == GenderLabel::Masculine)
                    .count();
                prop_assert_eq!(masc, k);
            }
        }
        let view = epoch_view(&examples, start, seed);
        prop_assert!(view.examples.iter().all(|e| e.label(Dimension::About) == GenderLabel::Unknown));
        prop_assert!(view.examples.iter().all(|e| e.origin[Dimension::To] == LabelOrigin::Flipped));
    }

    #[test]
    fn oversampling_only_adds(labels in prop::collection::vec(known_label(), 0..40)) {
        let examples: Vec<Example> = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| Example::new(format!("e{i}"), format!("text {i}"), "t").with_label(Dimension::About, l, LabelOrigin::Gold))
            .collect();
        let view = epoch_view(&examples, 0, 1);
        let balanced = oversample_balance(&view, Dimension::About);
        prop_assert_eq!(&balanced.examples[..examples.len()], &view.examples[..]);
        let before: BTreeSet<_> = examples.iter().map(|e| e.text.clone()).collect();
        let after: BTreeSet<_> = balanced.examples.iter().map(|e| e.text.clone()).collect();
        prop_assert_eq!(before, after);
        let counts = class_counts(&balanced.examples, Dimension::About);
        let max = counts.iter().copied().max().unwrap();
        for (c, orig) in counts.iter().zip(class_counts(&examples, Dimension::About)) {
            prop_assert!(*c == max || (*c == 0 && orig == 0));
        }
    }

    #[test]
    fn split_is_a_partition_that_keeps_groups(n in 1usize..60, groups in 1usize..10, seed in any::<u64>()) {
        let examples: Vec<Example> = (0..n)
            .map(|i| {
                let mut e = Example::new(format!("e{i}"), format!("t{i}"), "s");
                e.group = Some(format!("g{}", i % groups));
                e
            })
            .collect();
        let s = split(&examples, (0.6, 0.2, 0.2), seed).unwrap();
        let mut ids: Vec<String> = s.train.iter().chain(&s.valid).chain(&s.test).map(|e| e.id.clone()).collect();
        ids.sort();
        let mut expected: Vec<String> = examples.iter().map(|e| e.id.clone()).collect();
        expected.sort();
        prop_assert_eq!(ids, expected);
        let part_of = |g: &str| -> BTreeSet<usize> {
            [&s.train, &s.valid, &s.test]
                .iter()
                .enumerate()
                .filter(|(_, part)| part.iter().any(|e| e.group.as_deref() == Some(g)))
                .map(|(i, _)| i)
                .collect()
        };
        for g in 0..groups.min(n) {
            prop_assert_eq!(part_of(&format!("g{g}")).len(), 1);
        }
        prop_assert_eq!(split(&examples, (0.6, 0.2, 0.2), seed).unwrap(), s);
    }

    #[test]
    fn corpus_formats_round_trip(
        rows in prop::collection::vec((text_strategy(8).prop_filter("non-empty", |t| !t.trim().is_empty()), known_label(), known_label(), known_label()), 1..10)
    ) {
        let examples: Vec<Example> = rows
            .iter()
            .enumerate()
            .map(|(i, (t, a, to, as_))| {
                Example::new(format!("x{i}"), t.clone(), "src")
                    .with_label(Dimension::About, *a, LabelOrigin::Gold)
                    .with_label(Dimension::To, *to, LabelOrigin::Rule)
                    .with_label(Dimension::As, *as_, LabelOrigin::Imputed)
            })
            .collect();
        let mut buf = Vec::new();
        write_corpus(&examples, &mut buf).unwrap();
        prop_assert_eq!(read_corpus(&buf[..], "src").unwrap(), examples.clone());

        let md: Vec<Example> = examples
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let dim = Dimension::ALL[i % 3];
                let label = if i % 2 == 0 { GenderLabel::Masculine } else { GenderLabel::Feminine };
                let mut x = Example::new(format!("mdgender:{}", i + 1), e.text.clone(), "mdgender")
                    .with_label(dim, label, LabelOrigin::Gold);
                x.confidence = Some(Confidence::PrettySure);
                x
            })
            .collect();
        let mut buf = Vec::new();
        write_mdgender(&md, &mut buf).unwrap();
        let back = read_mdgender(&buf[..], "mdgender").unwrap();
        for (a, b) in back.iter().zip(&md) {
            prop_assert_eq!(&a.text, &b.text);
            prop_assert_eq!(a.labels, b.labels);
            prop_assert_eq!(a.confidence, b.confidence);
        }
    }

    #[test]
    fn softmax_is_a_distribution_and_shift_invariant(scores in prop::collection::vec(-50.0f64..50.0, 1..9), shift in -100.0f64..100.0) {
        let p = softmax(&scores);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let shifted: Vec<f64> = scores.iter().map(|s| s + shift).collect();
        let q = softmax(&shifted);
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        let am = |v: &[f64]| v.iter().enumerate().fold(0, |best, (i, x)| if *x > v[best] { i } else { best });
        prop_assert_eq!(am(&p), am(&q));
    }

    #[test]
    fn predictions_are_distributions(text in text_strategy(15), seed in any::<u64>()) {
        let model = BiEncoderModel::new(TrainConfig { feature_dim: 256, embed_dim: 6, seed, ..TrainConfig::default() }).unwrap();
        for dim in Dimension::ALL {
            let probs = model.probabilities(&text, dim).unwrap();
            prop_assert_eq!(probs.len(), dim.candidate_labels().len());
            prop_assert!((probs.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs() < 1e-9);
            let (label, p) = model.predict(&text, dim).unwrap();
            prop_assert_eq!(label, common::argmax_label(&probs));
            prop_assert!(probs.iter().all(|(_, q)| *q <= p));
        }
    }

    #[test]
    fn analytic_gradients_match_finite_differences(
        batch in prop::collection::vec((text_strategy(6), select(Dimension::ALL.to_vec()), any::<bool>()), 1..4),
        seed in any::<u64>(),
    ) {
        let model = BiEncoderModel::new(TrainConfig { feature_dim: 64, embed_dim: 4, seed, init_scale: 0.5, ..TrainConfig::default() }).unwrap();
        let triples: Vec<(&str, Dimension, GenderLabel)> = batch
            .iter()
            .map(|(t, d, m)| (t.as_str(), *d, if *m { GenderLabel::Masculine } else { GenderLabel::Feminine }))
            .collect();
        let (worst, _) = common::gradient_check(&model, &triples, 1e-3);
        prop_assert!(worst <= 1e-4, "relative error {worst}");
    }

    #[test]
    fn model_bytes_round_trip(seed in any::<u64>(), dim in 1usize..9) {
        let model = BiEncoderModel::new(TrainConfig { feature_dim: 32, embed_dim: dim, seed, ..TrainConfig::default() }).unwrap();
        let bytes = model.to_bytes().unwrap();
        let back = BiEncoderModel::from_bytes(&bytes).unwrap();
        prop_assert_eq!(back.to_bytes().unwrap(), bytes);
    }

    #[test]
    fn median_ignores_order(values in prop::collection::vec(0.0f64..1.0, 1..40), seed in any::<u64>()) {
        let m = median(&values).unwrap();
        prop_assert_eq!(m, common::median(&values));
        let mut v = values.clone();
        let n = v.len();
        for i in (1..n).rev() {
            v.swap(i, (seed.rotate_left(i as u32) % (i as u64 + 1)) as usize);
        }
        prop_assert_eq!(median(&v).unwrap(), m);
    }

    #[test]
    fn addressee_labels_come_from_speakers(speakers in prop::collection::vec((0u8..4, known_label()), 0..12)) {
        let genders: BTreeMap<u8, GenderLabel> = speakers.iter().map(|(s, g)| (*s, *g)).collect();
        let conv: Vec<(Utterance, GenderLabel)> = speakers
            .iter()
            .map(|(s, _)| {
                let mut u = Utterance::new("hi");
                u.speaker_id = Some(format!("s{s}"));
                (u, genders[s])
            })
            .collect();
        let labels = dialogue_to_labels(&conv);
        prop_assert_eq!(labels.len(), conv.len());
        let present: BTreeSet<GenderLabel> = conv.iter().map(|(_, g)| *g).collect();
        for l in labels {
            prop_assert!(l == GenderLabel::Unknown || present.contains(&l));
        }
    }

    #[test]
    fn welch_matches_textbook(
        a in prop::collection::vec(-5.0f64..5.0, 2..30),
        b in prop::collection::vec(-5.0f64..5.0, 2..30),
    ) {
        let r = welch_t_test(&a, &b).unwrap();
        let (t, df, p) = common::welch(&a, &b);
        if t.is_finite() {
            prop_assert!((r.t - t).abs() <= 1e-9 * t.abs().max(1.0));
            prop_assert!((r.df - df).abs() <= 1e-9 * df.max(1.0));
            prop_assert!((r.p - p).abs() <= 1e-9, "p {} vs {}", r.p, p);
        }
    }

    #[test]
    fn generation_respects_blocking_and_length(seed in any::<u64>(), block in 2usize..5, k in 1usize..12) {
        let lm = train_controlled_lm(
            &[
                "ABOUT:masculine he said the cat ran to the house and the cat sat",
                "ABOUT:masculine the king ran home happy and the king sang",
                "ABOUT:feminine she said the queen ran to the house",
            ],
            3,
        )
        .unwrap();
        let control: ControlToken = "ABOUT:masculine".parse().unwrap();
        let cfg = GenerateConfig { k, block_n: block, min_tokens: 8, max_tokens: 25 };
        let ids = generate_ids(&lm, control, &cfg, seed).unwrap();
        for i in 0..ids.len() {
            prop_assert!(!completes_repeat(&ids[..i], ids[i], block));
        }
        prop_assert!(ids.len() >= 8 && ids.len() <= 25);
        prop_assert_eq!(generate_ids(&lm, control, &cfg, seed).unwrap(), ids);
    }

    #[test]
    fn control_lines_strip_back_to_input(utts in prop::collection::vec(text_strategy(10), 0..10)) {
        let lex = lex();
        let lines = build_control_corpus_wordlist(&utts, &lex, Dimension::To);
        prop_assert_eq!(lines.len(), utts.len());
        for (line, utt) in lines.iter().zip(&utts) {
            let (tok, rest) = parse_line(line).unwrap();
            prop_assert_eq!(tok.dimension, Dimension::To);
            prop_assert_eq!(rest, utt.as_str());
        }
    }

    #[test]
    fn generation_stats_are_additive(texts in prop::collection::vec((any::<bool>(), text_strategy(12)), 0..12)) {
        let lex = lex();
        let m: GenControl = "AS:masculine".parse().unwrap();
        let f = GenControl::WordList(GenderLabel::Feminine);
        let gens: Vec<(GenControl, String)> = texts.iter().map(|(b, t)| (if *b { m } else { f }, t.clone())).collect();
        let stats = generation_stats(&gens, &lex);
        for s in &stats {
            let (mut em, mut ef) = (0, 0);
            for (c, t) in &gens {
                if *c == s.control {
                    let (a, b) = common::count_gendered(t, &masc_list(&lex), &fem_list(&lex));
                    em += a;
                    ef += b;
                }
            }
            prop_assert_eq!((s.masculine, s.feminine, s.gendered_word_count), (em, ef, em + ef));
            if em + ef > 0 {
                prop_assert!((s.pct_masculine.unwrap() - 100.0 * em as f64 / (em + ef) as f64).abs() < 1e-9);
            } else {
                prop_assert!(s.pct_masculine.is_none());
            }
        }
    }

    #[test]
    fn imputation_only_fills_unknown_about(labels in prop::collection::vec(known_label(), 1..15)) {
        let model = BiEncoderModel::new(TrainConfig { feature_dim: 64, embed_dim: 4, ..TrainConfig::single_task(Dimension::About) }).unwrap();
        let examples: Vec<Example> = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| Example::new(format!("e{i}"), "some text", "s").with_label(Dimension::About, l, LabelOrigin::Gold))
            .collect();
        let out = impute_about(&examples, &model).unwrap();
        prop_assert_eq!(out.len(), examples.len());
        for (a, b) in examples.iter().zip(&out) {
            if a.label(Dimension::About).is_known() {
                prop_assert_eq!(a, b);
            } else {
                prop_assert!(b.label(Dimension::About).is_known());
                prop_assert_eq!(b.origin[Dimension::About], LabelOrigin::Imputed);
            }
        }
    }
}
