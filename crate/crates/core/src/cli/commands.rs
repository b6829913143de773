use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use super::manifest::RunContext;
use super::*;
use crate::annotate::{
    confident_retention, dialogue_to_labels, kinship_label, name_gender_label, persona_gender,
    pronoun_majority_label, AnnotateConfig, Threshold, Utterance,
};
use crate::apps::{
    build_control_corpus, build_control_corpus_wordlist, document_genderedness,
    gendered_word_analysis, generate, generation_stats, generation_stats_table, offensive_analysis,
    offensive_table, ranking_tsv, train_controlled_lm_smoothed, Document, GenControl,
    GenerateConfig, WordAnalysisOptions,
};
use crate::classifier::{
    evaluate_cross_dimension, evaluate_with, train, BiEncoderModel, EvalOptions, TrainConfig,
};
use crate::dataset::{
    assemble, impute_about, read_corpus, read_mdgender, split, write_corpus, AnnotatedSource,
    Example, SourceRecord,
};
use crate::error::Error;
use crate::labels::{Dimension, GenderLabel};
use crate::seeds;
use crate::textkit::{
    filter_by_pos, mask_text, overrepresentation, tokenize, Lexicon, LexiconPaths, Token,
};

pub(super) fn dispatch(command: &Command) -> Result<()> {
    let common = command.common();
    let args = serde_json::to_value(command)?;
    let mut ctx = RunContext::new(&common.out, command.name(), common.seed, args)?;
    let lexicon = load_lexicon(common, &mut ctx)?;
    match command {
        Command::Annotate(a) => annotate(a, &lexicon, &mut ctx)?,
        Command::Train(a) => train_cmd(a, &lexicon, &mut ctx)?,
        Command::Eval(a) => eval(a, &lexicon, &mut ctx)?,
        Command::Impute(a) => impute(a, &mut ctx)?,
        Command::Score(a) => score(a, &mut ctx)?,
        Command::Stats(a) => stats(a, &mut ctx)?,
        Command::ControlCorpus(a) => control_corpus(a, &lexicon, &mut ctx)?,
        Command::Generate(a) => generate_cmd(a, &mut ctx)?,
        Command::StatsGen(a) => stats_gen(a, &lexicon, &mut ctx)?,
        Command::Offense(a) => offense(a, &lexicon, &mut ctx)?,
        Command::Lexicon(LexiconCommand::Export(_)) => {
            lexicon.write_dir(&common.out)?;
            println!("lexicon written to {}", common.out.display());
        }
    }
    ctx.finish()?;
    Ok(())
}

fn load_lexicon(common: &Common, ctx: &mut RunContext) -> Result<Lexicon> {
    let dir = common.lexicon_dir.clone().or_else(|| {
        std::env::var_os(LEXICON_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    });
    let Some(dir) = dir else {
        ctx.note("lexicon: built-in");
        return Ok(Lexicon::builtin());
    };
    let paths = LexiconPaths::in_dir(&dir);
    let lexicon = Lexicon::load(&paths)?;
    let files = [
        Some(&paths.masculine),
        Some(&paths.feminine),
        paths.names.as_ref(),
        paths.kinship.as_ref(),
        paths.stopwords.as_ref(),
        paths.pronouns.as_ref(),
    ];
    for p in files.into_iter().flatten() {
        ctx.record_input(p)?;
    }
    ctx.note(format!("lexicon: {}", dir.display()));
    Ok(lexicon)
}

fn lines(text: &str) -> Vec<&str> {
    text.lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.trim().is_empty())
        .collect()
}

fn read_lines(path: &Path, ctx: &mut RunContext) -> Result<Vec<String>> {
    let text = ctx.read_string(path)?;
    Ok(lines(&text).into_iter().map(str::to_string).collect())
}

fn load_canonical(path: &Path, ctx: &mut RunContext) -> Result<Vec<Example>> {
    let bytes = ctx.read(path)?;
    Ok(read_corpus(&bytes[..], &path.display().to_string())?)
}

fn load_model(path: &Path, ctx: &mut RunContext) -> Result<BiEncoderModel> {
    let bytes = ctx.read(path)?;
    BiEncoderModel::from_bytes(&bytes).with_context(|| format!("loading {}", path.display()))
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

fn corpus_bytes(examples: &[Example]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_corpus(examples, &mut buf)?;
    Ok(buf)
}

fn malformed(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::MalformedRecord {
        source_name: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn distribution_table(examples: &[Example]) -> String {
    let mut out = format!(
        "{:<6} {:>10} {:>10} {:>10} {:>10}\n",
        "dim", "masculine", "feminine", "neutral", "unknown"
    );
    for dim in Dimension::ALL {
        let mut counts = [0usize; 4];
        for e in examples {
            let i = GenderLabel::ALL
                .iter()
                .position(|l| *l == e.label(dim))
                .expect("label");
            counts[i] += 1;
        }
        let _ = writeln!(
            out,
            "{:<6} {:>10} {:>10} {:>10} {:>10}",
            dim.upper(),
            counts[0],
            counts[1],
            counts[2],
            counts[3]
        );
    }
    out
}

#[derive(Deserialize)]
struct Turn {
    #[serde(default)]
    speaker: Option<String>,
    text: String,
    #[serde(default = "unknown_label")]
    speaker_gender: GenderLabel,
}

fn unknown_label() -> GenderLabel {
    GenderLabel::Unknown
}

#[derive(Deserialize)]
struct Conversation {
    #[serde(default)]
    id: Option<String>,
    turns: Vec<Turn>,
    /// Speaker name → persona lines.
    #[serde(default)]
    personas: BTreeMap<String, Vec<String>>,
}

#[derive(Deserialize)]
struct TextRecord {
    #[serde(default)]
    id: Option<String>,
    text: String,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    persona: Vec<String>,
    #[serde(default)]
    group: Option<String>,
}

#[derive(Deserialize)]
struct ScoredRecord {
    #[serde(default)]
    id: Option<String>,
    text: String,
    prob_masculine: f64,
}

enum InputKind {
    Conversations,
    Scored,
    Text,
    Plain,
}

fn detect(first_line: &str) -> InputKind {
    match serde_json::from_str::<serde_json::Value>(first_line) {
        Ok(serde_json::Value::Object(map)) if map.contains_key("turns") => InputKind::Conversations,
        Ok(serde_json::Value::Object(map)) if map.contains_key("prob_masculine") => {
            InputKind::Scored
        }
        Ok(serde_json::Value::Object(_)) => InputKind::Text,
        _ => InputKind::Plain,
    }
}

fn annotate(a: &AnnotateArgs, lexicon: &Lexicon, ctx: &mut RunContext) -> Result<()> {
    let rules: BTreeSet<Rule> = a.rules.iter().copied().collect();
    if !matches!(a.they_maps_to, GenderLabel::Neutral | GenderLabel::Unknown) {
        return Err(UsageError("--they-maps-to must be neutral or unknown".into()).into());
    }
    let config = AnnotateConfig {
        name_threshold: Threshold::new(a.name_threshold)?,
        they_maps_to: a.they_maps_to,
    };
    let text = ctx.read_string(&a.input)?;
    let source_name = a.source.clone().unwrap_or_else(|| {
        a.input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "input".into())
    });
    let numbered: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    let Some(&(_, first)) = numbered.first() else {
        return Err(Error::EmptyCorpus.into());
    };

    let mut records = Vec::new();
    match detect(first) {
        InputKind::Conversations => {
            for &(line, raw) in &numbered {
                let conv: Conversation = serde_json::from_str(raw)
                    .map_err(|e| malformed(&a.input, line, e.to_string()))?;
                let conv_id = conv
                    .id
                    .clone()
                    .unwrap_or_else(|| format!("{source_name}:{line}"));
                let speaker_gender = |turn: &Turn| -> GenderLabel {
                    if turn.speaker_gender.is_known() {
                        return turn.speaker_gender;
                    }
                    let Some(name) = &turn.speaker else {
                        return GenderLabel::Unknown;
                    };
                    let mut g = GenderLabel::Unknown;
                    if rules.contains(&Rule::Persona) {
                        if let Some(p) = conv.personas.get(name) {
                            g = persona_gender(p, lexicon, &config);
                        }
                    }
                    if !g.is_known() && rules.contains(&Rule::Names) {
                        g = name_gender_label(name, lexicon, config.name_threshold);
                    }
                    if !g.is_known() && rules.contains(&Rule::Kinship) {
                        g = kinship_label(&tokenize(name), lexicon);
                    }
                    g
                };
                let turns: Vec<(Utterance, GenderLabel)> = conv
                    .turns
                    .iter()
                    .enumerate()
                    .map(|(i, t)| {
                        let utt = Utterance {
                            text: t.text.clone(),
                            speaker_id: t.speaker.clone(),
                            conversation_id: Some(conv_id.clone()),
                            turn_index: Some(i),
                        };
                        (utt, speaker_gender(t))
                    })
                    .collect();
                let to = dialogue_to_labels(&turns);
                for (i, ((utt, as_label), to_label)) in turns.into_iter().zip(to).enumerate() {
                    let mut labels = BTreeMap::new();
                    labels.insert(Dimension::As, as_label);
                    labels.insert(Dimension::To, to_label);
                    if rules.contains(&Rule::Pronoun) {
                        labels.insert(
                            Dimension::About,
                            pronoun_majority_label(&tokenize(&utt.text), lexicon, &config),
                        );
                    }
                    records.push(SourceRecord {
                        line,
                        id: Some(format!("{conv_id}:{i}")),
                        text: utt.text,
                        labels,
                        group: Some(conv_id.clone()),
                    });
                }
            }
        }
        InputKind::Scored => {
            if !rules.contains(&Rule::Retention) {
                return Err(UsageError(
                    "input holds prob_masculine records; use --rules retention".into(),
                )
                .into());
            }
            let mut scored = Vec::new();
            for &(line, raw) in &numbered {
                let r: ScoredRecord = serde_json::from_str(raw)
                    .map_err(|e| malformed(&a.input, line, e.to_string()))?;
                let mut utt = Utterance::new(r.text);
                utt.conversation_id = Some(r.id.unwrap_or_else(|| format!("{source_name}:{line}")));
                utt.turn_index = Some(line);
                scored.push((utt, r.prob_masculine));
            }
            for (utt, label) in confident_retention(scored, Threshold::new(a.retention_threshold)?)?
            {
                records.push(SourceRecord {
                    line: utt.turn_index.unwrap_or(0),
                    id: utt.conversation_id,
                    text: utt.text,
                    labels: BTreeMap::from([(Dimension::As, label)]),
                    group: None,
                });
            }
        }
        kind @ (InputKind::Text | InputKind::Plain) => {
            for &(line, raw) in &numbered {
                let r = match kind {
                    InputKind::Text => serde_json::from_str::<TextRecord>(raw)
                        .map_err(|e| malformed(&a.input, line, e.to_string()))?,
                    _ => TextRecord {
                        id: None,
                        text: raw.to_string(),
                        name: None,
                        persona: Vec::new(),
                        group: None,
                    },
                };
                let tokens: Vec<Token> = tokenize(&r.text);
                let mut about = GenderLabel::Unknown;
                if rules.contains(&Rule::Pronoun) {
                    about = pronoun_majority_label(&tokens, lexicon, &config);
                }
                if !about.is_known() && rules.contains(&Rule::Kinship) {
                    about = kinship_label(&tokens, lexicon);
                }
                if !about.is_known() && rules.contains(&Rule::Names) {
                    if let Some(name) = &r.name {
                        about = name_gender_label(name, lexicon, config.name_threshold);
                    }
                }
                let mut labels = BTreeMap::from([(Dimension::About, about)]);
                if rules.contains(&Rule::Persona) && !r.persona.is_empty() {
                    labels.insert(Dimension::As, persona_gender(&r.persona, lexicon, &config));
                }
                records.push(SourceRecord {
                    line,
                    id: r.id,
                    text: r.text,
                    labels,
                    group: r.group,
                });
            }
        }
    }

    let examples = assemble(&[AnnotatedSource {
        name: source_name,
        records,
    }])?;
    ctx.write("corpus.jsonl", &corpus_bytes(&examples)?)?;
    let table = distribution_table(&examples);
    ctx.write("distribution.txt", table.as_bytes())?;
    print!("{table}");
    Ok(())
}

fn masked(examples: Vec<Example>, lexicon: &Lexicon, mode: MaskMode) -> Vec<Example> {
    if mode == MaskMode::None {
        return examples;
    }
    examples
        .into_iter()
        .map(|mut e| {
            e.text = mask_text(&e.text, lexicon, mode);
            e
        })
        .collect()
}

fn train_cmd(a: &TrainArgs, lexicon: &Lexicon, ctx: &mut RunContext) -> Result<()> {
    let mut data = Vec::new();
    for p in &a.train {
        data.extend(load_canonical(p, ctx)?);
    }
    if data.is_empty() {
        return Err(Error::EmptyCorpus.into());
    }
    let seed = a.common.seed;
    let (train_set, valid_set) = match &a.valid {
        Some(v) => (data, load_canonical(v, ctx)?),
        None => {
            let parts = split(&data, a.split, seed)?;
            ctx.write("test.jsonl", &corpus_bytes(&parts.test)?)?;
            ctx.write("valid.jsonl", &corpus_bytes(&parts.valid)?)?;
            (parts.train, parts.valid)
        }
    };
    let train_set = masked(train_set, lexicon, a.mask);
    let valid_set = masked(valid_set, lexicon, a.mask);
    let config = TrainConfig {
        feature_dim: 1usize << a.feature_bits,
        embed_dim: a.embed_dim,
        learning_rate: a.lr,
        epochs: a.epochs,
        tasks: a.task.dimensions(),
        seed,
        init_scale: a.init_scale,
        patience: a.patience,
    };
    let outcome = train(&train_set, &valid_set, &config)?;
    ctx.write("model.gdim", &outcome.model.to_bytes()?)?;
    let mut log = String::new();
    for entry in &outcome.log {
        log.push_str(&serde_json::to_string(entry)?);
        log.push('\n');
    }
    ctx.write("train_log.jsonl", log.as_bytes())?;
    ctx.note("unknown TO/AS labels alternate masculine/feminine by epoch; classes are oversampled after that resolution");
    ctx.note("multitask epochs shuffle all (example, dimension) pairs together");
    if a.mask != MaskMode::None {
        ctx.note(format!("texts masked with mode {:?}", a.mask));
    }
    if outcome.skipped_unsupported > 0 {
        ctx.note(format!(
            "{} neutral TO/AS pairs skipped per epoch (no such class)",
            outcome.skipped_unsupported
        ));
    }
    if outcome.validated_on_train {
        ctx.note("no labeled validation data; model selection used the training data");
    }
    let best = &outcome.log[outcome.best_epoch];
    println!(
        "trained {} on {} examples; best epoch {} (valid avg {:.4})",
        match a.task {
            Task::Multitask => "multitask".to_string(),
            t => format!("{t:?}").to_lowercase(),
        },
        train_set.len(),
        outcome.best_epoch,
        best.valid_avg
    );
    Ok(())
}

fn eval(a: &EvalArgs, lexicon: &Lexicon, ctx: &mut RunContext) -> Result<()> {
    let model = load_model(&a.model, ctx)?;
    let bytes = ctx.read(&a.data)?;
    let name = a.data.display().to_string();
    let data = match a.format {
        DataFormat::Canonical => read_corpus(&bytes[..], &name)?,
        DataFormat::Mdgender => read_mdgender(&bytes[..], &name)?,
    };
    if data.is_empty() {
        return Err(Error::EmptyCorpus.into());
    }
    let data = masked(data, lexicon, a.mask);
    let options = EvalOptions {
        nine_way: a.nine_way,
        certain_only: a.certain_only,
    };
    let report = if model.is_single_task() {
        ctx.note("single-task model evaluated on every dimension");
        evaluate_cross_dimension(&model, &data, options)?
    } else {
        evaluate_with(&model, &data, options)?
    };
    ctx.write("report.json", &json_bytes(&report)?)?;
    let text = report.to_string();
    ctx.write("report.txt", text.as_bytes())?;
    print!("{text}");
    Ok(())
}

fn impute(a: &ImputeArgs, ctx: &mut RunContext) -> Result<()> {
    let model = load_model(&a.model, ctx)?;
    let data = load_canonical(&a.input, ctx)?;
    let filled = impute_about(&data, &model)?;
    let changed = data
        .iter()
        .zip(&filled)
        .filter(|(x, y)| x.labels != y.labels)
        .count();
    ctx.write("corpus.jsonl", &corpus_bytes(&filled)?)?;
    println!("imputed ABOUT for {changed} of {} examples", data.len());
    Ok(())
}

fn score(a: &ScoreArgs, ctx: &mut RunContext) -> Result<()> {
    let model = load_model(&a.model, ctx)?;
    let text = ctx.read_string(&a.docs)?;
    let mut docs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let d: Document =
            serde_json::from_str(raw).map_err(|e| malformed(&a.docs, i + 1, e.to_string()))?;
        docs.push(d);
    }
    if docs.is_empty() {
        return Err(Error::EmptyCorpus.into());
    }
    let ranking = document_genderedness(&docs, &model, a.min_paragraphs)?;
    ctx.write("ranking.tsv", ranking_tsv(&ranking).as_bytes())?;
    ctx.write("report.json", &json_bytes(&ranking)?)?;
    if let Some(agg) = ranking.aggregate {
        println!(
            "documents {}  mean {:.4}  median {:.4}",
            agg.documents, agg.mean, agg.median
        );
    }
    println!("most masculine (>= {} paragraphs):", a.min_paragraphs);
    for s in ranking.most_masculine.iter().take(a.top) {
        println!(
            "  {:<30} {:.4} {:>5}",
            s.doc_id, s.median_score, s.paragraph_count
        );
    }
    println!("most feminine (>= {} paragraphs):", a.min_paragraphs);
    for s in ranking.most_feminine.iter().take(a.top) {
        println!(
            "  {:<30} {:.4} {:>5}",
            s.doc_id, s.median_score, s.paragraph_count
        );
    }
    Ok(())
}

fn stats(a: &StatsArgs, ctx: &mut RunContext) -> Result<()> {
    let data = load_canonical(&a.input, ctx)?;
    let tags: Option<Vec<Vec<String>>> = match &a.tags {
        Some(p) => {
            let text = ctx.read_string(p)?;
            let mut rows = Vec::new();
            for (i, raw) in text.lines().enumerate() {
                if raw.trim().is_empty() {
                    continue;
                }
                rows.push(
                    serde_json::from_str(raw).map_err(|e| malformed(p, i + 1, e.to_string()))?,
                );
            }
            if rows.len() != data.len() {
                return Err(malformed(
                    p,
                    rows.len(),
                    format!("{} tag rows for {} examples", rows.len(), data.len()),
                )
                .into());
            }
            Some(rows)
        }
        None => None,
    };
    let allowed: BTreeSet<String> = a.pos.iter().cloned().collect();
    let mut corpus = Vec::with_capacity(data.len());
    for (i, e) in data.iter().enumerate() {
        let tokens = tokenize(&e.text);
        let tokens = match &tags {
            Some(rows) => {
                if rows[i].len() != tokens.len() {
                    let path = a.tags.as_deref().unwrap_or(Path::new("tags"));
                    return Err(malformed(
                        path,
                        i + 1,
                        format!("{} tags for {} tokens", rows[i].len(), tokens.len()),
                    )
                    .into());
                }
                filter_by_pos(&tokens, &rows[i], &allowed)
            }
            None => tokens,
        };
        corpus.push((tokens, e.label(a.dimension)));
    }
    let table = overrepresentation(&corpus, a.min_count)?;
    let mut tsv = String::from("gender\tword\tratio\tcount\n");
    for w in &table {
        let _ = writeln!(tsv, "{}\t{}\t{}\t{}", w.gender, w.word, w.ratio, w.count);
    }
    ctx.write("overrepresentation.tsv", tsv.as_bytes())?;
    ctx.write("overrepresentation.json", &json_bytes(&table)?)?;
    for gender in GenderLabel::CLASSES {
        let rows: Vec<_> = table
            .iter()
            .filter(|w| w.gender == gender)
            .take(a.top)
            .collect();
        if rows.is_empty() {
            continue;
        }
        println!("{gender}");
        for w in rows {
            println!("  {:<20} {:>8.3} {:>8}", w.word, w.ratio, w.count);
        }
    }
    Ok(())
}

fn control_corpus(a: &ControlCorpusArgs, lexicon: &Lexicon, ctx: &mut RunContext) -> Result<()> {
    let utterances = read_lines(&a.input, ctx)?;
    let model = a.model.as_deref().map(|p| load_model(p, ctx)).transpose()?;
    let mut out = Vec::new();
    for &dim in &a.dimension {
        match &model {
            Some(m) => out.extend(build_control_corpus(&utterances, m, dim)?),
            None => out.extend(build_control_corpus_wordlist(&utterances, lexicon, dim)),
        }
    }
    let mut text = out.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    ctx.write("control.txt", text.as_bytes())?;
    println!("{} control lines", out.len());
    Ok(())
}

/// Seed for one generation, independent of how many others are requested.
fn generation_seed(seed: u64, control: &str, index: usize) -> u64 {
    seeds::stable_hash(seed, format!("{control}\u{1f}{index}").as_bytes())
}

fn generate_cmd(a: &GenerateArgs, ctx: &mut RunContext) -> Result<()> {
    let corpus = read_lines(&a.corpus, ctx)?;
    let lm = train_controlled_lm_smoothed(&corpus, a.order, a.smoothing)?;
    let config = GenerateConfig {
        k: a.k,
        block_n: a.block,
        min_tokens: a.min_tokens,
        max_tokens: a.max_tokens,
    };
    let mut tsv = String::from("control\tindex\ttext\n");
    for &control in &a.control {
        let tag = if a.wordlist_baseline {
            GenControl::WordList(control.label)
        } else {
            GenControl::Classifier(control)
        };
        for i in 0..a.n {
            let text = generate(
                &lm,
                control,
                &config,
                generation_seed(a.common.seed, &control.to_string(), i),
            )?;
            let _ = writeln!(tsv, "{tag}\t{i}\t{text}");
        }
    }
    ctx.write("generations.tsv", tsv.as_bytes())?;
    ctx.note("token counts are whitespace/punctuation tokens of the built-in tokenizer");
    ctx.note("top-k sampling from a single rollout; no beam search");
    println!(
        "{} generations for {} control tokens",
        a.n * a.control.len(),
        a.control.len()
    );
    Ok(())
}

fn stats_gen(a: &StatsGenArgs, lexicon: &Lexicon, ctx: &mut RunContext) -> Result<()> {
    let mut generations = Vec::new();
    for p in &a.input {
        let text = ctx.read_string(p)?;
        for (i, raw) in text.lines().enumerate() {
            if i == 0 && raw.starts_with("control\t") || raw.trim().is_empty() {
                continue;
            }
            let mut cols = raw.splitn(3, '\t');
            let (Some(control), Some(_), Some(body)) = (cols.next(), cols.next(), cols.next())
            else {
                return Err(malformed(p, i + 1, "expected control<TAB>index<TAB>text").into());
            };
            let control: GenControl = control
                .parse()
                .map_err(|e: String| malformed(p, i + 1, e))?;
            generations.push((control, body.to_string()));
        }
    }
    let stats = generation_stats(&generations, lexicon);
    ctx.write("gen_stats.json", &json_bytes(&stats)?)?;
    let table = generation_stats_table(&stats);
    ctx.write("gen_stats.txt", table.as_bytes())?;
    print!("{table}");
    Ok(())
}

fn offense(a: &OffenseArgs, lexicon: &Lexicon, ctx: &mut RunContext) -> Result<()> {
    let model = load_model(&a.model, ctx)?;
    let safe = read_lines(&a.safe, ctx)?;
    let offensive = read_lines(&a.offensive, ctx)?;
    let report = offensive_analysis(&safe, &offensive, &model)?;
    ctx.write("offense.json", &json_bytes(&report)?)?;
    let table = offensive_table(&report);
    ctx.write("offense.txt", table.as_bytes())?;
    print!("{table}");
    if a.words {
        let options = WordAnalysisOptions {
            prob_threshold: a.prob_threshold,
            min_len: a.min_len,
            top_n: a.top_n,
        };
        let words = gendered_word_analysis(&offensive, &model, lexicon, &options)?;
        ctx.write("words.json", &json_bytes(&words)?)?;
        for (name, list) in [
            ("masculine", &words.masculine),
            ("feminine", &words.feminine),
        ] {
            let joined: Vec<String> = list.iter().map(|(w, c)| format!("{w}({c})")).collect();
            println!("{name}: {}", joined.join(" "));
        }
    }
    Ok(())
}
