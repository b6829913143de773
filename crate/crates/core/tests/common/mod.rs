//! Independent reference implementations used to check the library.
//!
//! Nothing here calls the library code it is checking: tokenization,
//! counting, ratios, medians, accuracies and the t distribution are all
//! recomputed from first principles.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use gdim::classifier::{BiEncoderModel, TrainConfig};
use gdim::{ClassId, Dimension, GenderLabel};

/// Whitespace split, punctuation peeled off both ends and dropped, lowercased.
pub fn words(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| {
            w.trim_matches(|c: char| c.is_ascii_punctuation())
                .to_lowercase()
        })
        .filter(|w| !w.is_empty())
        .collect()
}

pub fn count_gendered(text: &str, masculine: &[&str], feminine: &[&str]) -> (u64, u64) {
    let mut m = 0;
    let mut f = 0;
    for w in words(text) {
        if masculine.contains(&w.as_str()) {
            m += 1;
        }
        if feminine.contains(&w.as_str()) {
            f += 1;
        }
    }
    (m, f)
}

pub fn word_list_label(text: &str, masculine: &[&str], feminine: &[&str]) -> GenderLabel {
    let (m, f) = count_gendered(text, masculine, feminine);
    if m > f {
        GenderLabel::Masculine
    } else if f > m {
        GenderLabel::Feminine
    } else {
        GenderLabel::Neutral
    }
}

/// `(gender, word) → P(word | gender) / P(word)` by nested loops over the corpus.
pub fn overrepresentation(
    docs: &[(String, GenderLabel)],
    min_count: u64,
) -> BTreeMap<(GenderLabel, String), (f64, u64)> {
    let known: Vec<(Vec<String>, GenderLabel)> = docs
        .iter()
        .filter(|(_, g)| *g != GenderLabel::Unknown)
        .map(|(t, g)| (words(t), *g))
        .collect();
    let mut vocab: Vec<String> = known.iter().flat_map(|(w, _)| w.clone()).collect();
    vocab.sort();
    vocab.dedup();
    let all_tokens: usize = known.iter().map(|(w, _)| w.len()).sum();
    let mut out = BTreeMap::new();
    for word in &vocab {
        let mut total = 0u64;
        for (ws, _) in &known {
            total += ws.iter().filter(|x| *x == word).count() as u64;
        }
        if total < min_count {
            continue;
        }
        for g in [
            GenderLabel::Masculine,
            GenderLabel::Feminine,
            GenderLabel::Neutral,
        ] {
            let mut in_g = 0u64;
            let mut g_tokens = 0u64;
            for (ws, label) in &known {
                if *label == g {
                    g_tokens += ws.len() as u64;
                    in_g += ws.iter().filter(|x| *x == word).count() as u64;
                }
            }
            if g_tokens == 0 {
                continue;
            }
            let p_w_g = in_g as f64 / g_tokens as f64;
            let p_w = total as f64 / all_tokens as f64;
            out.insert((g, word.clone()), (p_w_g / p_w, total));
        }
    }
    out
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    // insertion sort, to stay independent of the library's sort
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            j -= 1;
        }
    }
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Lanczos approximation (g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut c = 1.0;
    let mut d = 1.0 - (a + b) * x / (a + 1.0);
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
        d = 1.0 + aa * d;
        d = if d.abs() < tiny { tiny } else { d };
        c = 1.0 + aa / c;
        c = if c.abs() < tiny { tiny } else { c };
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
        d = 1.0 + aa * d;
        d = if d.abs() < tiny { tiny } else { d };
        c = 1.0 + aa / c;
        c = if c.abs() < tiny { tiny } else { c };
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Textbook Welch test: `(t, df, two-sided p)`.
pub fn welch(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let var = |x: &[f64]| {
        let m = mean(x);
        x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
    };
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (var(a) / na, var(b) / nb);
    let t = (mean(a) - mean(b)) / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let p = incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
    (t, df, p)
}

/// Per-class accuracy from (dimension, gold, predicted) triples.
pub fn accuracy_grid(
    rows: &[(Dimension, GenderLabel, GenderLabel)],
) -> BTreeMap<(Dimension, GenderLabel), f64> {
    let mut tally: BTreeMap<(Dimension, GenderLabel), (u32, u32)> = BTreeMap::new();
    for &(dim, gold, pred) in rows {
        if gold == GenderLabel::Unknown {
            continue;
        }
        let e = tally.entry((dim, gold)).or_default();
        e.1 += 1;
        if gold == pred {
            e.0 += 1;
        }
    }
    tally
        .into_iter()
        .map(|(k, (c, n))| (k, c as f64 / n as f64))
        .collect()
}

/// Most probable label with masculine < feminine < neutral tie order.
pub fn argmax_label(probs: &[(GenderLabel, f64)]) -> GenderLabel {
    let order = |l: GenderLabel| match l {
        GenderLabel::Masculine => 0,
        GenderLabel::Feminine => 1,
        GenderLabel::Neutral => 2,
        GenderLabel::Unknown => 3,
    };
    let mut best = probs[0];
    for &(l, p) in &probs[1..] {
        if p > best.1 || (p == best.1 && order(l) < order(best.0)) {
            best = (l, p);
        }
    }
    best.0
}

fn slot(label: GenderLabel) -> usize {
    match label {
        GenderLabel::Masculine => 0,
        GenderLabel::Feminine => 1,
        GenderLabel::Neutral => 2,
        GenderLabel::Unknown => panic!("no slot for unknown"),
    }
}

/// A model whose predictions are fixed by hand: each marker word's feature
/// row is a basis vector for its label, every other row is zero, and each
/// class embedding is `sharpness` times its label's basis vector. A text
/// made of one marker word is predicted as that word's label on every
/// dimension that has the label.
pub fn hand_model(
    tasks: &[Dimension],
    markers: &[(&str, GenderLabel)],
    sharpness: f32,
) -> BiEncoderModel {
    let config = TrainConfig {
        feature_dim: 1 << 12,
        embed_dim: 4,
        tasks: tasks.to_vec(),
        ..TrainConfig::default()
    };
    let mut model = BiEncoderModel::new(config).unwrap();
    for b in 0..model.feature_dim() {
        model.feature_row_mut(b).iter_mut().for_each(|x| *x = 0.0);
    }
    let mut used: HashMap<usize, &str> = HashMap::new();
    for &(word, label) in markers {
        let f = model.features(word);
        assert_eq!(f.buckets.len(), 1, "marker must be one token");
        let b = f.buckets[0].0;
        if let Some(other) = used.insert(b, word) {
            panic!("markers {other} and {word} share a bucket");
        }
        let row = model.feature_row_mut(b);
        row.iter_mut().for_each(|x| *x = 0.0);
        row[slot(label)] = 1.0;
    }
    for class in ClassId::all() {
        if !model.supports(class.dimension)
            || !class.dimension.candidate_labels().contains(&class.label)
        {
            continue;
        }
        let emb = model.class_embedding_mut(class);
        emb.iter_mut().for_each(|x| *x = 0.0);
        emb[slot(class.label)] = sharpness;
    }
    model
}

/// Largest relative error between the analytic gradient and a central finite
/// difference, over every parameter the gradient touches. The step actually
/// applied is measured after f32 rounding.
pub fn gradient_check(
    model: &BiEncoderModel,
    batch: &[(&str, Dimension, GenderLabel)],
    h: f32,
) -> (f64, usize) {
    let (_, grads) = model.loss_and_gradients(batch).unwrap();
    let loss = |m: &BiEncoderModel| m.loss_and_gradients(batch).unwrap().0;
    let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-8);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut m = model.clone();
    for (&bucket, g) in &grads.features {
        for (i, &analytic) in g.iter().enumerate() {
            let orig = m.feature_row(bucket)[i];
            let (up, down) = (orig + h, orig - h);
            m.feature_row_mut(bucket)[i] = up;
            let lu = loss(&m);
            m.feature_row_mut(bucket)[i] = down;
            let ld = loss(&m);
            m.feature_row_mut(bucket)[i] = orig;
            let numeric = (lu - ld) / (up as f64 - down as f64);
            worst = worst.max(rel(analytic, numeric));
            checked += 1;
        }
    }
    for (&class, g) in &grads.classes {
        for (i, &analytic) in g.iter().enumerate() {
            let orig = m.class_embedding(class)[i];
            let (up, down) = (orig + h, orig - h);
            m.class_embedding_mut(class)[i] = up;
            let lu = loss(&m);
            m.class_embedding_mut(class)[i] = down;
            let ld = loss(&m);
            m.class_embedding_mut(class)[i] = orig;
            let numeric = (lu - ld) / (up as f64 - down as f64);
            worst = worst.max(rel(analytic, numeric));
            checked += 1;
        }
    }
    (worst, checked)
}
