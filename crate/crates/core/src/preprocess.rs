//! Tweet cleaning: emoji and emoticon replacement, account-tag removal,
//! hashtag stripping, digit and punctuation deletion, whitespace collapsing,
//! optional stop-word removal, and mean pooling of word vectors.
//!
//! The emoticon table, emoji table, and stop-word list are bundled data
//! files (`data/emoticons.tsv`, `data/emoji.tsv`, `data/stopwords.txt`) so
//! cleaning is reproducible without network access.

use std::collections::{HashMap, HashSet};
use std::str::FromStr;
use std::sync::OnceLock;

use thiserror::Error;
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

#[derive(Debug, Error, PartialEq)]
pub enum PreprocessError {
    #[error("no known tokens to pool")]
    NoKnownTokens,
    #[error("word vectors have mixed dimensions ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("{file} line {line}: expected `key<TAB>description`")]
    MalformedTableLine { file: &'static str, line: usize },
    #[error("{file} line {line}: empty key")]
    EmptyKey { file: &'static str, line: usize },
    #[error("{file} line {line}: duplicate key")]
    DuplicateKey { file: &'static str, line: usize },
    #[error("{file} line {line}: description must be lowercase alphabetic words")]
    BadDescription { file: &'static str, line: usize },
    #[error("{file} line {line}: bad codepoint `{token}`")]
    BadCodepoint {
        file: &'static str,
        line: usize,
        token: String,
    },
    #[error("{file} line {line}: emoticon key must contain a character that cleaning deletes")]
    UnreplaceableKey { file: &'static str, line: usize },
    #[error("unknown cleaning level `{0}` (expected raw|standard|stopword)")]
    UnknownLevel(String),
}

/// Which cleaning steps to apply.
///
/// `stopwords` only has effect together with `general`: stop-word removal
/// operates on cleaned text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CleanOptions {
    pub general: bool,
    pub stopwords: bool,
}

/// The three preparation levels used in experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CleanLevel {
    /// No preparation at all.
    Raw,
    /// General cleaning without stop-word removal.
    Standard,
    /// General cleaning plus stop-word removal.
    Stopword,
}

impl CleanLevel {
    pub const ALL: [CleanLevel; 3] = [CleanLevel::Raw, CleanLevel::Standard, CleanLevel::Stopword];

    pub fn token(self) -> &'static str {
        match self {
            CleanLevel::Raw => "raw",
            CleanLevel::Standard => "standard",
            CleanLevel::Stopword => "stopword",
        }
    }

    pub fn options(self) -> CleanOptions {
        match self {
            CleanLevel::Raw => CleanOptions {
                general: false,
                stopwords: false,
            },
            CleanLevel::Standard => CleanOptions {
                general: true,
                stopwords: false,
            },
            CleanLevel::Stopword => CleanOptions {
                general: true,
                stopwords: true,
            },
        }
    }
}

impl std::fmt::Display for CleanLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for CleanLevel {
    type Err = PreprocessError;

    fn from_str(s: &str) -> Result<Self, PreprocessError> {
        match s {
            "raw" => Ok(CleanLevel::Raw),
            "standard" => Ok(CleanLevel::Standard),
            "stopword" => Ok(CleanLevel::Stopword),
            other => Err(PreprocessError::UnknownLevel(other.to_string())),
        }
    }
}

/// Characters the general cleaning step deletes outright: digits, Unicode
/// punctuation, and a handful of symbols.
pub(crate) fn is_deleted_char(c: char) -> bool {
    c.is_numeric()
        || c.general_category_group() == GeneralCategoryGroup::Punctuation
        || matches!(c, '$' | '^' | '~' | '+' | '=' | '<' | '>' | '|')
}

/// Emoji and emoticon replacement tables.
///
/// Emoticons (`:)`, `<3`, ...) are matched against whole whitespace-delimited
/// tokens; Unicode emoji are matched as substrings, longest sequence first.
/// Every emoticon key must contain at least one character that cleaning
/// deletes, so cleaned text can never re-introduce a match (this keeps
/// cleaning idempotent).
#[derive(Debug, Clone)]
pub struct EmojiTable {
    emoticon_map: HashMap<String, String>,
    // unicode keys grouped by first char, longest key first within a group
    unicode_by_first: HashMap<char, Vec<(String, String)>>,
}

fn valid_description(desc: &str) -> bool {
    !desc.is_empty()
        && desc
            .chars()
            .all(|c| c.is_ascii_lowercase() || c == ' ')
        && !desc.starts_with(' ')
        && !desc.ends_with(' ')
}

impl EmojiTable {
    /// Parses the two table files. `emoticons_tsv` holds
    /// `emoticon<TAB>description` lines; `emoji_tsv` holds
    /// `hex codepoints (space-separated)<TAB>description` lines.
    pub fn parse(emoticons_tsv: &str, emoji_tsv: &str) -> Result<Self, PreprocessError> {
        let mut emoticon_map = HashMap::new();
        for (idx, raw) in emoticons_tsv.lines().enumerate() {
            let line = idx + 1;
            let file = "emoticons.tsv";
            if raw.is_empty() {
                continue;
            }
            let (key, desc) = raw
                .split_once('\t')
                .ok_or(PreprocessError::MalformedTableLine { file, line })?;
            if key.is_empty() {
                return Err(PreprocessError::EmptyKey { file, line });
            }
            if !key.chars().any(is_deleted_char) {
                return Err(PreprocessError::UnreplaceableKey { file, line });
            }
            if !valid_description(desc) {
                return Err(PreprocessError::BadDescription { file, line });
            }
            if emoticon_map.insert(key.to_string(), desc.to_string()).is_some() {
                return Err(PreprocessError::DuplicateKey { file, line });
            }
        }

        let mut unicode_by_first: HashMap<char, Vec<(String, String)>> = HashMap::new();
        let mut seen = HashSet::new();
        for (idx, raw) in emoji_tsv.lines().enumerate() {
            let line = idx + 1;
            let file = "emoji.tsv";
            if raw.is_empty() {
                continue;
            }
            let (codes, desc) = raw
                .split_once('\t')
                .ok_or(PreprocessError::MalformedTableLine { file, line })?;
            if !valid_description(desc) {
                return Err(PreprocessError::BadDescription { file, line });
            }
            let mut key = String::new();
            for token in codes.split_whitespace() {
                let cp = u32::from_str_radix(token, 16)
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| PreprocessError::BadCodepoint {
                        file,
                        line,
                        token: token.to_string(),
                    })?;
                key.push(cp);
            }
            if key.is_empty() {
                return Err(PreprocessError::EmptyKey { file, line });
            }
            if !seen.insert(key.clone()) {
                return Err(PreprocessError::DuplicateKey { file, line });
            }
            let first = key.chars().next().expect("non-empty key");
            unicode_by_first
                .entry(first)
                .or_default()
                .push((key, desc.to_string()));
        }
        for group in unicode_by_first.values_mut() {
            group.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(&b.0)));
        }
        Ok(Self {
            emoticon_map,
            unicode_by_first,
        })
    }

    /// The table bundled with the crate.
    pub fn bundled() -> &'static EmojiTable {
        static TABLE: OnceLock<EmojiTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            EmojiTable::parse(
                include_str!("../data/emoticons.tsv"),
                include_str!("../data/emoji.tsv"),
            )
            .expect("bundled emoji tables are valid")
        })
    }

    pub fn emoticon(&self, token: &str) -> Option<&str> {
        self.emoticon_map.get(token).map(String::as_str)
    }

    pub fn emoticon_count(&self) -> usize {
        self.emoticon_map.len()
    }

    pub fn unicode_count(&self) -> usize {
        self.unicode_by_first.values().map(Vec::len).sum()
    }

    /// Replaces every known emoji sequence with ` description `.
    fn replace_unicode(&self, text: &str) -> String {
        let mut out = String::with_capacity(text.len());
        let mut rest = text;
        'scan: while let Some(c) = rest.chars().next() {
            if let Some(group) = self.unicode_by_first.get(&c) {
                for (key, desc) in group {
                    if rest.starts_with(key.as_str()) {
                        out.push(' ');
                        out.push_str(desc);
                        out.push(' ');
                        rest = &rest[key.len()..];
                        continue 'scan;
                    }
                }
            }
            out.push(c);
            rest = &rest[c.len_utf8()..];
        }
        out
    }
}

/// The stop-word list bundled with the crate (127 words).
pub fn bundled_stopwords() -> &'static HashSet<String> {
    static LIST: OnceLock<HashSet<String>> = OnceLock::new();
    LIST.get_or_init(|| parse_stopwords(include_str!("../data/stopwords.txt")))
}

/// One word per line; matching is case-insensitive, so entries are folded to
/// lowercase here.
pub fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Applies the cleaning pipeline in order: emoji/emoticon replacement,
/// deletion of `@`-initial tokens, `#` stripping, `&` -> `and`, digit
/// deletion, punctuation deletion, whitespace collapsing, and (optionally)
/// stop-word removal. With `general` off the input is returned unchanged.
pub fn clean_tweet(text: &str, opts: CleanOptions, table: &EmojiTable) -> String {
    if !opts.general {
        return text.to_string();
    }
    let replaced = table.replace_unicode(text);

    // emoticon replacement runs before @-deletion and punctuation removal
    let mut tokens = String::with_capacity(replaced.len());
    for token in replaced.split_whitespace() {
        if let Some(desc) = table.emoticon(token) {
            tokens.push_str(desc);
            tokens.push(' ');
        } else if !token.starts_with('@') {
            tokens.push_str(token);
            tokens.push(' ');
        }
    }

    let mut chars = String::with_capacity(tokens.len());
    for c in tokens.chars() {
        if c == '#' {
            continue;
        }
        if c == '&' {
            chars.push_str("and");
            continue;
        }
        if is_deleted_char(c) {
            continue;
        }
        if c.is_whitespace() {
            chars.push(' ');
            continue;
        }
        chars.push(c);
    }

    let collapsed = chars.split_whitespace().collect::<Vec<_>>().join(" ");
    if opts.stopwords {
        remove_stopwords(&collapsed, bundled_stopwords())
    } else {
        collapsed
    }
}

/// Drops tokens whose lowercase form is in `stoplist`; surviving tokens keep
/// their casing and order.
pub fn remove_stopwords(text: &str, stoplist: &HashSet<String>) -> String {
    text.split_whitespace()
        .filter(|t| !stoplist.contains(&t.to_lowercase()))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Component-wise arithmetic mean of word vectors.
pub fn pool_mean<V: AsRef<[f64]>>(word_vectors: &[V]) -> Result<Vec<f64>, PreprocessError> {
    let first = word_vectors.first().ok_or(PreprocessError::NoKnownTokens)?;
    let dim = first.as_ref().len();
    let mut sum = vec![0.0f64; dim];
    for v in word_vectors {
        let v = v.as_ref();
        if v.len() != dim {
            return Err(PreprocessError::DimensionMismatch(dim, v.len()));
        }
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
    }
    let n = word_vectors.len() as f64;
    for s in &mut sum {
        *s /= n;
    }
    Ok(sum)
}
