//! Gendered word lists, the name → gender probability table, kinship terms,
//! stopwords, and the pronoun inventory used by the annotators.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::GenderLabel;

pub const MASCULINE_FILE: &str = "masculine.txt";
pub const FEMININE_FILE: &str = "feminine.txt";
pub const NAMES_FILE: &str = "names.tsv";
pub const KINSHIP_FILE: &str = "kinship.tsv";
pub const STOPWORDS_FILE: &str = "stopwords.txt";
pub const PRONOUNS_FILE: &str = "pronouns.tsv";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NameEntry {
    pub prob_masculine: f64,
    pub count: u64,
}

/// Pronoun forms counted by the majority-pronoun annotator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PronounInventory {
    pub masculine: BTreeSet<String>,
    pub feminine: BTreeSet<String>,
    pub neutral: BTreeSet<String>,
}

impl Default for PronounInventory {
    fn default() -> Self {
        PronounInventory {
            masculine: set(&["he", "him", "his", "himself"]),
            feminine: set(&["she", "her", "hers", "herself"]),
            neutral: set(&["they", "them", "their", "theirs", "themself", "themselves"]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    pub masculine_words: BTreeSet<String>,
    pub feminine_words: BTreeSet<String>,
    pub name_table: BTreeMap<String, NameEntry>,
    pub kinship: BTreeMap<String, GenderLabel>,
    pub stopwords: BTreeSet<String>,
    pub pronouns: PronounInventory,
}

/// Explicit locations of the lexicon files. Only the two word lists are required.
#[derive(Debug, Clone, Default)]
pub struct LexiconPaths {
    pub masculine: PathBuf,
    pub feminine: PathBuf,
    pub names: Option<PathBuf>,
    pub kinship: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub pronouns: Option<PathBuf>,
}

impl LexiconPaths {
    /// Standard file names inside `dir`; optional files are used when present.
    pub fn in_dir(dir: &Path) -> Self {
        let optional = |name: &str| Some(dir.join(name)).filter(|p| p.exists());
        LexiconPaths {
            masculine: dir.join(MASCULINE_FILE),
            feminine: dir.join(FEMININE_FILE),
            names: optional(NAMES_FILE),
            kinship: optional(KINSHIP_FILE),
            stopwords: optional(STOPWORDS_FILE),
            pronouns: optional(PRONOUNS_FILE),
        }
    }
}

fn set(words: &[&str]) -> BTreeSet<String> {
    words.iter().map(|w| w.to_string()).collect()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Non-empty, non-comment lines.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_word_list(text: &str) -> BTreeSet<String> {
    data_lines(text).map(|(_, l)| l.to_lowercase()).collect()
}

fn bad_line(path: &Path, line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Lexicon(format!("{}:{line}: {msg}", path.display()))
}

fn parse_names(path: &Path, text: &str) -> Result<BTreeMap<String, NameEntry>> {
    let mut table = BTreeMap::new();
    for (line, l) in data_lines(text) {
        let fields: Vec<&str> = l.split('\t').collect();
        if fields.len() != 3 {
            return Err(bad_line(
                path,
                line,
                "expected name<TAB>prob_masculine<TAB>count",
            ));
        }
        let prob_masculine: f64 = fields[1]
            .trim()
            .parse()
            .map_err(|e| bad_line(path, line, e))?;
        let count: u64 = fields[2]
            .trim()
            .parse()
            .map_err(|e| bad_line(path, line, e))?;
        table.insert(
            fields[0].trim().to_lowercase(),
            NameEntry {
                prob_masculine,
                count,
            },
        );
    }
    Ok(table)
}

fn parse_gendered_table(
    path: &Path,
    text: &str,
    allow_neutral: bool,
) -> Result<Vec<(String, GenderLabel)>> {
    let mut out = Vec::new();
    for (line, l) in data_lines(text) {
        let (word, label) = l
            .split_once('\t')
            .ok_or_else(|| bad_line(path, line, "expected word<TAB>label"))?;
        let label: GenderLabel = label
            .trim()
            .parse()
            .map_err(|e: String| bad_line(path, line, e))?;
        let ok = matches!(label, GenderLabel::Masculine | GenderLabel::Feminine)
            || (allow_neutral && label == GenderLabel::Neutral);
        if !ok {
            return Err(bad_line(
                path,
                line,
                format!("label `{label}` not allowed here"),
            ));
        }
        out.push((word.trim().to_lowercase(), label));
    }
    Ok(out)
}

impl Lexicon {
    pub fn load(paths: &LexiconPaths) -> Result<Self> {
        let masculine_words = parse_word_list(&read(&paths.masculine)?);
        let feminine_words = parse_word_list(&read(&paths.feminine)?);
        let name_table = match &paths.names {
            Some(p) => parse_names(p, &read(p)?)?,
            None => BTreeMap::new(),
        };
        let kinship = match &paths.kinship {
            Some(p) => parse_gendered_table(p, &read(p)?, false)?
                .into_iter()
                .collect(),
            None => BTreeMap::new(),
        };
        let stopwords = match &paths.stopwords {
            Some(p) => parse_word_list(&read(p)?),
            None => BTreeSet::new(),
        };
        let pronouns = match &paths.pronouns {
            Some(p) => {
                let mut inv = PronounInventory {
                    masculine: BTreeSet::new(),
                    feminine: BTreeSet::new(),
                    neutral: BTreeSet::new(),
                };
                for (word, label) in parse_gendered_table(p, &read(p)?, true)? {
                    match label {
                        GenderLabel::Masculine => inv.masculine.insert(word),
                        GenderLabel::Feminine => inv.feminine.insert(word),
                        _ => inv.neutral.insert(word),
                    };
                }
                inv
            }
            None => PronounInventory::default(),
        };
        let lex = Lexicon {
            masculine_words,
            feminine_words,
            name_table,
            kinship,
            stopwords,
            pronouns,
        };
        lex.validate()?;
        Ok(lex)
    }

    pub fn from_dir(dir: &Path) -> Result<Self> {
        Lexicon::load(&LexiconPaths::in_dir(dir))
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self
            .masculine_words
            .intersection(&self.feminine_words)
            .next()
        {
            return Err(Error::Lexicon(format!(
                "`{w}` is in both the masculine and feminine lists"
            )));
        }
        for (name, e) in &self.name_table {
            if !(0.0..=1.0).contains(&e.prob_masculine) {
                return Err(Error::Lexicon(format!(
                    "name `{name}` has prob_masculine {} outside [0, 1]",
                    e.prob_masculine
                )));
            }
        }
        for (word, label) in &self.kinship {
            if !matches!(label, GenderLabel::Masculine | GenderLabel::Feminine) {
                return Err(Error::Lexicon(format!(
                    "kinship term `{word}` has label {label}"
                )));
            }
        }
        Ok(())
    }

    /// Gender of an explicitly gendered word, if it is on either list.
    pub fn word_gender(&self, surface: &str) -> Option<GenderLabel> {
        if self.masculine_words.contains(surface) {
            Some(GenderLabel::Masculine)
        } else if self.feminine_words.contains(surface) {
            Some(GenderLabel::Feminine)
        } else {
            None
        }
    }

    pub fn is_stopword(&self, surface: &str) -> bool {
        self.stopwords.contains(surface)
    }

    /// Writes the lexicon in the on-disk layout read by [`Lexicon::from_dir`].
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, body: String| {
            let p = dir.join(name);
            fs::write(&p, body).map_err(|e| Error::io(p, e))
        };
        let lines =
            |words: &BTreeSet<String>| words.iter().map(|w| format!("{w}\n")).collect::<String>();
        write(MASCULINE_FILE, lines(&self.masculine_words))?;
        write(FEMININE_FILE, lines(&self.feminine_words))?;
        write(
            NAMES_FILE,
            self.name_table
                .iter()
                .map(|(n, e)| format!("{n}\t{}\t{}\n", e.prob_masculine, e.count))
                .collect(),
        )?;
        write(
            KINSHIP_FILE,
            self.kinship
                .iter()
                .map(|(w, l)| format!("{w}\t{l}\n"))
                .collect(),
        )?;
        write(STOPWORDS_FILE, lines(&self.stopwords))?;
        let mut pronouns = String::new();
        for (words, label) in [
            (&self.pronouns.masculine, GenderLabel::Masculine),
            (&self.pronouns.feminine, GenderLabel::Feminine),
            (&self.pronouns.neutral, GenderLabel::Neutral),
        ] {
            for w in words {
                pronouns.push_str(&format!("{w}\t{label}\n"));
            }
        }
        write(PRONOUNS_FILE, pronouns)
    }

    /// A small English lexicon bundled with the toolkit. Real audits should
    /// load curated lists instead.
    pub fn builtin() -> Self {
        let masculine_words = set(&[
            "he",
            "him",
            "his",
            "himself",
            "man",
            "men",
            "boy",
            "boys",
            "male",
            "males",
            "father",
            "fathers",
            "dad",
            "daddy",
            "son",
            "sons",
            "brother",
            "brothers",
            "husband",
            "husbands",
            "boyfriend",
            "uncle",
            "nephew",
            "grandfather",
            "grandson",
            "king",
            "prince",
            "lord",
            "sir",
            "mr",
            "gentleman",
            "gentlemen",
            "guy",
            "guys",
            "bro",
            "dude",
            "fiance",
            "groom",
            "monk",
            "actor",
            "waiter",
            "mister",
            "stepfather",
            "stepson",
            "godfather",
            "masculine",
            "manhood",
            "boyhood",
        ]);
        let feminine_words = set(&[
            "she",
            "her",
            "hers",
            "herself",
            "woman",
            "women",
            "girl",
            "girls",
            "female",
            "females",
            "mother",
            "mothers",
            "mom",
            "mommy",
            "mum",
            "daughter",
            "daughters",
            "sister",
            "sisters",
            "wife",
            "wives",
            "girlfriend",
            "aunt",
            "niece",
            "grandmother",
            "granddaughter",
            "queen",
            "princess",
            "lady",
            "madam",
            "mrs",
            "ms",
            "miss",
            "gal",
            "gals",
            "fiancee",
            "bride",
            "nun",
            "actress",
            "waitress",
            "mistress",
            "stepmother",
            "stepdaughter",
            "godmother",
            "feminine",
            "womanhood",
            "girlhood",
        ]);
        let kinship: BTreeMap<String, GenderLabel> = [
            ("father", GenderLabel::Masculine),
            ("dad", GenderLabel::Masculine),
            ("son", GenderLabel::Masculine),
            ("brother", GenderLabel::Masculine),
            ("husband", GenderLabel::Masculine),
            ("boyfriend", GenderLabel::Masculine),
            ("uncle", GenderLabel::Masculine),
            ("nephew", GenderLabel::Masculine),
            ("grandfather", GenderLabel::Masculine),
            ("grandson", GenderLabel::Masculine),
            ("stepfather", GenderLabel::Masculine),
            ("stepson", GenderLabel::Masculine),
            ("mother", GenderLabel::Feminine),
            ("mom", GenderLabel::Feminine),
            ("mum", GenderLabel::Feminine),
            ("daughter", GenderLabel::Feminine),
            ("sister", GenderLabel::Feminine),
            ("wife", GenderLabel::Feminine),
            ("girlfriend", GenderLabel::Feminine),
            ("aunt", GenderLabel::Feminine),
            ("niece", GenderLabel::Feminine),
            ("grandmother", GenderLabel::Feminine),
            ("granddaughter", GenderLabel::Feminine),
            ("stepmother", GenderLabel::Feminine),
            ("stepdaughter", GenderLabel::Feminine),
        ]
        .into_iter()
        .map(|(w, l)| (w.to_string(), l))
        .collect();
        let name_table: BTreeMap<String, NameEntry> = [
            ("bob", 1.0, 98_211),
            ("john", 0.996, 5_136_937),
            ("james", 0.996, 5_209_170),
            ("michael", 0.995, 4_405_306),
            ("david", 0.996, 3_642_160),
            ("william", 0.996, 4_166_159),
            ("george", 0.995, 1_480_425),
            ("philip", 0.997, 363_181),
            ("mary", 0.004, 4_138_360),
            ("jane", 0.002, 331_727),
            ("linda", 0.002, 1_454_247),
            ("elizabeth", 0.004, 1_646_549),
            ("susan", 0.002, 1_122_212),
            ("sarah", 0.003, 1_076_045),
            ("emma", 0.001, 700_474),
            ("anna", 0.003, 919_108),
            ("alex", 0.55, 184_024),
            ("taylor", 0.32, 434_718),
            ("jordan", 0.78, 513_126),
            ("casey", 0.57, 185_468),
            ("riley", 0.38, 228_046),
        ]
        .into_iter()
        .map(|(n, p, c)| {
            (
                n.to_string(),
                NameEntry {
                    prob_masculine: p,
                    count: c,
                },
            )
        })
        .collect();
        let stopwords = set(&[
            "a",
            "about",
            "above",
            "after",
            "again",
            "against",
            "all",
            "am",
            "an",
            "and",
            "any",
            "are",
            "as",
            "at",
            "be",
            "because",
            "been",
            "before",
            "being",
            "below",
            "between",
            "both",
            "but",
            "by",
            "can",
            "could",
            "did",
            "do",
            "does",
            "doing",
            "down",
            "during",
            "each",
            "few",
            "for",
            "from",
            "further",
            "had",
            "has",
            "have",
            "having",
            "here",
            "how",
            "i",
            "if",
            "in",
            "into",
            "is",
            "it",
            "its",
            "itself",
            "just",
            "me",
            "more",
            "most",
            "my",
            "myself",
            "no",
            "nor",
            "not",
            "now",
            "of",
            "off",
            "on",
            "once",
            "only",
            "or",
            "other",
            "our",
            "ours",
            "ourselves",
            "out",
            "over",
            "own",
            "same",
            "should",
            "so",
            "some",
            "such",
            "than",
            "that",
            "the",
            "then",
            "there",
            "these",
            "this",
            "those",
            "through",
            "to",
            "too",
            "under",
            "until",
            "up",
            "very",
            "was",
            "we",
            "were",
            "what",
            "when",
            "where",
            "which",
            "while",
            "who",
            "whom",
            "why",
            "will",
            "with",
            "would",
            "you",
            "your",
            "yours",
            "yourself",
            "yourselves",
            "they",
            "them",
            "their",
            "theirs",
            "he",
            "him",
            "his",
            "she",
            "her",
            "hers",
            "get",
            "got",
            "like",
            "really",
            "one",
        ]);
        Lexicon {
            masculine_words,
            feminine_words,
            name_table,
            kinship,
            stopwords,
            pronouns: PronounInventory::default(),
        }
    }
}
