use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gdim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gdim"))
        .args(args)
        .env_remove("GDIM_LEXICON_DIR")
        .output()
        .expect("spawn gdim")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const TEXT: &str = "He said his brother would come home.
She told her mother about the trip.
The king rode out with his men.
The queen and her daughter sang.
They walked the dog in the park.
";

fn annotated(dir: &Path) -> std::path::PathBuf {
    fs::write(dir.join("plain.txt"), TEXT).unwrap();
    let out = dir.join("ann");
    let o = gdim(&[
        "annotate",
        "--in",
        s(&dir.join("plain.txt")),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    out.join("corpus.jsonl")
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(gdim(&["--help"]).status.code(), Some(0));
    assert_eq!(gdim(&["--version"]).status.code(), Some(0));
    assert_eq!(gdim(&["train", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("plain.txt"), TEXT).unwrap();

    let o = gdim(&[
        "annotate",
        "--in",
        s(&d.join("plain.txt")),
        "--rules",
        "astrology",
        "--out",
        s(&d.join("a")),
    ]);
    assert_eq!(o.status.code(), Some(2));

    let o = gdim(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));

    let o = gdim(&[
        "annotate",
        "--in",
        s(&d.join("plain.txt")),
        "--lexicon-dir",
        s(&d.join("no-such-lexicon")),
        "--out",
        s(&d.join("b")),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("no-such-lexicon"));

    let o = gdim(&[
        "annotate",
        "--in",
        s(&d.join("missing.txt")),
        "--out",
        s(&d.join("c")),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_evaluation_data_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let corpus = annotated(d);
    let o = gdim(&[
        "train",
        "--train",
        s(&corpus),
        "--epochs",
        "2",
        "--feature-bits",
        "8",
        "--embed-dim",
        "4",
        "--out",
        s(&d.join("m")),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    fs::write(d.join("empty.jsonl"), "").unwrap();
    let o = gdim(&[
        "eval",
        "--model",
        s(&d.join("m/model.gdim")),
        "--data",
        s(&d.join("empty.jsonl")),
        "--out",
        s(&d.join("e")),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn divergence_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let corpus = annotated(d);
    let o = gdim(&[
        "train",
        "--train",
        s(&corpus),
        "--epochs",
        "5",
        "--lr",
        "1e300",
        "--init-scale",
        "10",
        "--feature-bits",
        "8",
        "--embed-dim",
        "4",
        "--out",
        s(&d.join("m")),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("plain.txt"), TEXT).unwrap();
    fs::write(
        d.join("control.txt"),
        "ABOUT:masculine he went to the market and bought bread\n",
    )
    .unwrap();
    fs::write(
        d.join("run.conf"),
        "# generation settings\nmin_tokens = 3\nmax-tokens = 5\nn = 2\nseed = 9\n",
    )
    .unwrap();

    let o = gdim(&[
        "generate",
        "--config",
        s(&d.join("run.conf")),
        "--corpus",
        s(&d.join("control.txt")),
        "--control",
        "ABOUT:masculine",
        "--n",
        "3",
        "--out",
        s(&d.join("g")),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let tsv = fs::read_to_string(d.join("g/generations.tsv")).unwrap();
    let rows: Vec<&str> = tsv.lines().skip(1).collect();
    assert_eq!(rows.len(), 3, "the command-line --n wins");
    for row in rows {
        let text = row.splitn(3, '\t').nth(2).unwrap();
        assert!(
            text.split_whitespace().count() <= 5,
            "max_tokens from the config file: {text}"
        );
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("g/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 9);

    fs::write(d.join("bad.conf"), "no_such_option = 1\n").unwrap();
    let o = gdim(&[
        "stats-gen",
        "--config",
        s(&d.join("bad.conf")),
        "--in",
        s(&d.join("g/generations.tsv")),
        "--out",
        s(&d.join("x")),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn every_run_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let corpus = annotated(d);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("ann/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "annotate");
    assert_eq!(manifest["tool_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    let outputs = manifest["outputs"].as_object().unwrap();
    assert!(outputs.contains_key("corpus.jsonl"));
    let inputs = manifest["inputs"].as_object().unwrap();
    assert!(inputs.keys().any(|k| k.ends_with("plain.txt")));
    let bytes = fs::read(corpus).unwrap();
    assert!(!bytes.is_empty());
}

#[test]
fn lexicon_export_round_trips_through_lexicon_dir() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = gdim(&["lexicon", "export", "--out", s(&d.join("lex"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    fs::write(d.join("plain.txt"), TEXT).unwrap();
    let with_dir = gdim(&[
        "annotate",
        "--in",
        s(&d.join("plain.txt")),
        "--lexicon-dir",
        s(&d.join("lex")),
        "--out",
        s(&d.join("a")),
    ]);
    assert!(with_dir.status.success(), "{}", stderr(&with_dir));
    let builtin = gdim(&[
        "annotate",
        "--in",
        s(&d.join("plain.txt")),
        "--out",
        s(&d.join("b")),
    ]);
    assert!(builtin.status.success());
    assert_eq!(
        fs::read(d.join("a/corpus.jsonl")).unwrap(),
        fs::read(d.join("b/corpus.jsonl")).unwrap()
    );
}
