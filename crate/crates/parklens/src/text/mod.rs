//! Text preprocessing: cleaning, tokenization, negation-scope marking,
//! stopword removal and stemming.
//!
//! The pipeline order is fixed: [`normalize`] -> [`tokenize`] ->
//! [`apply_negation_scope`] -> stopword removal -> stemming. Negation runs
//! before stemming so markers attach to surface words; stems are computed on
//! the marked token's suffix afterwards.

mod porter;

pub use porter::stem;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Sentence-boundary pseudo-token kept by [`normalize`] for negation scoping
/// and dropped from final output.
pub const BOUNDARY: &str = "<P>";

/// Marker prefix carried by tokens inside a negation scope.
pub const NEGATION_MARKER: &str = "NOT_";

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");
const DEFAULT_TRIGGERS: &str = include_str!("../../data/negation_triggers.txt");

/// An ordered, preprocessed token sequence. Tokens are either plain stems or
/// negated stems carrying the literal `NOT_` prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    tokens: Vec<String>,
}

impl TokenSequence {
    /// Build a sequence from raw tokens, validating the type invariants:
    /// no empty tokens, no whitespace inside a token, and `NOT_` appearing
    /// only as a prefix.
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        for t in &tokens {
            if t.is_empty() {
                return Err(Error::Data("empty token in sequence".into()));
            }
            if t.chars().any(char::is_whitespace) {
                return Err(Error::Data(format!("token {t:?} contains whitespace")));
            }
            if let Some(pos) = t.find(NEGATION_MARKER) {
                if pos != 0 {
                    return Err(Error::Data(format!(
                        "token {t:?} carries a negation marker away from the prefix position"
                    )));
                }
            }
        }
        Ok(TokenSequence { tokens })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Render the sequence back to whitespace-joined text.
    pub fn render(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Negation triggers plus the words that end a negation scope. Sentence
/// boundaries always end a scope regardless of this set.
#[derive(Debug, Clone)]
pub struct NegationLexicon {
    triggers: BTreeSet<String>,
    scope_terminators: BTreeSet<String>,
}

impl NegationLexicon {
    pub fn new(
        triggers: impl IntoIterator<Item = String>,
        scope_terminators: impl IntoIterator<Item = String>,
    ) -> Result<Self> {
        let triggers: BTreeSet<String> = triggers.into_iter().collect();
        if triggers.is_empty() {
            return Err(Error::Config("negation trigger set is empty".into()));
        }
        for t in &triggers {
            if t.chars().any(char::is_uppercase) {
                return Err(Error::Config(format!(
                    "negation trigger {t:?} must be lowercase"
                )));
            }
        }
        Ok(NegationLexicon {
            triggers,
            scope_terminators: scope_terminators.into_iter().collect(),
        })
    }

    /// Triggers loaded from a one-token-per-line file; terminators supplied
    /// separately (they come from configuration).
    pub fn from_trigger_file(
        path: impl AsRef<Path>,
        scope_terminators: impl IntoIterator<Item = String>,
    ) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::new(parse_word_lines(&text), scope_terminators)
    }

    pub fn triggers(&self) -> impl Iterator<Item = &str> {
        self.triggers.iter().map(String::as_str)
    }

    pub fn scope_terminators(&self) -> impl Iterator<Item = &str> {
        self.scope_terminators.iter().map(String::as_str)
    }

    pub fn is_trigger(&self, word: &str) -> bool {
        self.triggers.contains(word)
    }

    pub fn is_terminator(&self, word: &str) -> bool {
        self.scope_terminators.contains(word)
    }
}

impl Default for NegationLexicon {
    fn default() -> Self {
        NegationLexicon::new(parse_word_lines(DEFAULT_TRIGGERS), ["but".to_string()])
            .expect("built-in trigger list is valid")
    }
}

/// Lowercase stopword set.
#[derive(Debug, Clone)]
pub struct StopwordList {
    words: BTreeSet<String>,
}

impl StopwordList {
    pub fn new(words: impl IntoIterator<Item = String>) -> Self {
        StopwordList {
            words: words.into_iter().collect(),
        }
    }

    /// The versioned English list shipped with the crate.
    pub fn default_english() -> Self {
        StopwordList::new(parse_word_lines(DEFAULT_STOPWORDS))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(StopwordList::new(parse_word_lines(&text)))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

fn parse_word_lines(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_lowercase())
        .collect()
}

/// Clean raw review text into a lowercase, digit-free, punctuation-free
/// string in which sentence punctuation is replaced by the [`BOUNDARY`]
/// sentinel and whitespace is collapsed.
pub fn normalize(raw: &str) -> String {
    let text = strip_tags(raw);
    let text = decode_entities(&text);
    let text = text.to_lowercase();
    // Split contraction suffixes so "n't" survives as its own token.
    let text = text.replace("n't", " n't");

    let mut tokens: Vec<String> = Vec::new();
    let mut current = String::new();
    fn flush(current: &mut String, tokens: &mut Vec<String>) {
        if !current.is_empty() {
            tokens.push(std::mem::take(current));
        }
    }
    for ch in text.chars() {
        match ch {
            'a'..='z' | '_' | '\'' => current.push(ch),
            '0'..='9' => {}
            '.' | '!' | '?' | ';' | ':' | ',' => {
                flush(&mut current, &mut tokens);
                if tokens.last().map(String::as_str) != Some(BOUNDARY) {
                    tokens.push(BOUNDARY.to_string());
                }
            }
            c if c.is_alphabetic() => current.push(c),
            _ => flush(&mut current, &mut tokens),
        }
    }
    flush(&mut current, &mut tokens);

    let mut out: Vec<String> = Vec::with_capacity(tokens.len());
    for t in tokens {
        if t == BOUNDARY {
            out.push(t);
            continue;
        }
        if t == "n't" {
            out.push(t);
            continue;
        }
        // Possessives and stray apostrophes are dropped in place.
        let cleaned: String = t.chars().filter(|&c| c != '\'').collect();
        if !cleaned.is_empty() {
            out.push(cleaned);
        }
    }
    out.join(" ")
}

fn strip_tags(s: &str) -> String {
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::with_capacity(s.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '<'
            && i + 1 < chars.len()
            && (chars[i + 1].is_ascii_alphabetic() || chars[i + 1] == '/' || chars[i + 1] == '!')
        {
            let mut j = i + 1;
            while j < chars.len() && chars[j] != '>' {
                j += 1;
            }
            out.push(' ');
            if j == chars.len() {
                break;
            }
            i = j + 1;
        } else {
            out.push(c);
            i += 1;
        }
    }
    out
}

fn decode_entities(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let bytes: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != '&' {
            out.push(bytes[i]);
            i += 1;
            continue;
        }
        let end = bytes[i + 1..]
            .iter()
            .take(10)
            .position(|&c| c == ';')
            .map(|p| i + 1 + p);
        let Some(end) = end else {
            out.push('&');
            i += 1;
            continue;
        };
        let name: String = bytes[i + 1..end].iter().collect();
        let decoded = match name.as_str() {
            "amp" => Some('&'),
            "lt" => Some('<'),
            "gt" => Some('>'),
            "quot" => Some('"'),
            "apos" => Some('\''),
            "nbsp" => Some(' '),
            _ => {
                if let Some(num) = name.strip_prefix("#x").or_else(|| name.strip_prefix("#X")) {
                    u32::from_str_radix(num, 16).ok().and_then(char::from_u32)
                } else if let Some(num) = name.strip_prefix('#') {
                    num.parse::<u32>().ok().and_then(char::from_u32)
                } else {
                    None
                }
            }
        };
        match decoded {
            Some(c) => {
                out.push(c);
                i = end + 1;
            }
            None => {
                out.push('&');
                i += 1;
            }
        }
    }
    out
}

/// Split normalized text on whitespace, retaining [`BOUNDARY`] sentinels as
/// distinct pseudo-tokens.
pub fn tokenize(normalized: &str) -> Vec<String> {
    normalized.split_whitespace().map(str::to_string).collect()
}

/// Split a token into (marked, body), peeling any leading negation markers.
/// Markers are matched case-insensitively so rendered output re-enters the
/// pipeline cleanly.
fn strip_markers(token: &str) -> (bool, &str) {
    let mut marked = false;
    let mut body = token;
    while body.len() > NEGATION_MARKER.len()
        && body[..NEGATION_MARKER.len()].eq_ignore_ascii_case(NEGATION_MARKER)
    {
        marked = !marked;
        body = &body[NEGATION_MARKER.len()..];
    }
    (marked, body)
}

/// Mark every content token inside a negation scope with the `NOT_` prefix.
///
/// A scope opens at a trigger and closes at a sentence boundary, a scope
/// terminator word, or the end of the sequence. Triggers and sentinels are
/// consumed; a second trigger inside an open scope cancels it (markers
/// combine by exclusive-or).
pub fn apply_negation_scope(tokens: &[String], lexicon: &NegationLexicon) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut negated = false;
    for token in tokens {
        if token == BOUNDARY {
            negated = false;
            continue;
        }
        let (marked, body) = strip_markers(token);
        if !marked {
            if lexicon.is_trigger(body) {
                negated = !negated;
                continue;
            }
            if lexicon.is_terminator(body) {
                negated = false;
                out.push(body.to_string());
                continue;
            }
        }
        if negated != marked {
            out.push(format!("{NEGATION_MARKER}{body}"));
        } else {
            out.push(body.to_string());
        }
    }
    out
}

/// The full preprocessing pipeline with validated inputs.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    stopwords: StopwordList,
    lexicon: NegationLexicon,
}

impl Preprocessor {
    /// Fails if any negation trigger appears in the stopword list, which
    /// would remove scope openers before they can act.
    pub fn new(stopwords: StopwordList, lexicon: NegationLexicon) -> Result<Self> {
        for trigger in lexicon.triggers() {
            if stopwords.contains(trigger) {
                return Err(Error::Config(format!(
                    "stopword list contains negation trigger {trigger:?}"
                )));
            }
        }
        Ok(Preprocessor { stopwords, lexicon })
    }

    pub fn default_english() -> Self {
        Preprocessor::new(StopwordList::default_english(), NegationLexicon::default())
            .expect("built-in lists are consistent")
    }

    pub fn stopwords(&self) -> &StopwordList {
        &self.stopwords
    }

    pub fn lexicon(&self) -> &NegationLexicon {
        &self.lexicon
    }

    /// normalize -> tokenize -> negation scope -> stopword removal -> stem.
    pub fn preprocess(&self, raw: &str) -> TokenSequence {
        let normalized = normalize(raw);
        let tokens = tokenize(&normalized);
        let scoped = apply_negation_scope(&tokens, &self.lexicon);
        let tokens = scoped
            .into_iter()
            .filter(|t| {
                let (_, body) = strip_markers(t);
                !self.stopwords.contains(body)
            })
            .map(|t| {
                let (marked, body) = strip_markers(&t);
                let stemmed = stem(body);
                if marked {
                    format!("{NEGATION_MARKER}{stemmed}")
                } else {
                    stemmed
                }
            })
            .collect();
        TokenSequence { tokens }
    }
}

/// Convenience free function mirroring the pipeline composition.
pub fn preprocess(
    raw: &str,
    stopwords: &StopwordList,
    lexicon: &NegationLexicon,
) -> Result<TokenSequence> {
    let p = Preprocessor::new(stopwords.clone(), lexicon.clone())?;
    Ok(p.preprocess(raw))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_decodes_entities_and_marks_boundaries() {
        assert_eq!(normalize("Great&amp; place!!"), "great place <P>");
    }

    #[test]
    fn normalize_empty() {
        assert_eq!(normalize(""), "");
    }

    #[test]
    fn normalize_removes_digits() {
        assert_eq!(normalize("3 km of paths"), "km of paths");
    }

    #[test]
    fn normalize_strips_tags_and_splits_contractions() {
        assert_eq!(normalize("<b>Wasn't</b> clean"), "was n't clean");
        assert_eq!(normalize("the park's ponds"), "the parks ponds");
    }

    #[test]
    fn normalize_handles_numeric_entities() {
        assert_eq!(normalize("caf&#233; lawn"), "café lawn");
        // &#51; is the digit 3, which the digit rule then removes.
        assert_eq!(normalize("&#51; swans"), "swans");
    }

    #[test]
    fn normalize_collapses_boundary_runs() {
        assert_eq!(normalize("bad!! ... really?"), "bad <P> really <P>");
    }

    #[test]
    fn tokenize_splits_and_keeps_sentinels() {
        assert_eq!(tokenize("great place <P>"), vec!["great", "place", "<P>"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("nice walk around the park").len(), 5);
    }

    #[test]
    fn negation_scope_marks_until_boundary() {
        let lex = NegationLexicon::default();
        let tokens = vec![
            "not".to_string(),
            "clean".to_string(),
            BOUNDARY.to_string(),
            "nice".to_string(),
        ];
        assert_eq!(apply_negation_scope(&tokens, &lex), vec!["NOT_clean", "nice"]);
    }

    #[test]
    fn negation_scope_no_trigger_is_identity() {
        let lex = NegationLexicon::default();
        let tokens = vec!["clean".to_string(), "park".to_string()];
        assert_eq!(apply_negation_scope(&tokens, &lex), vec!["clean", "park"]);
    }

    #[test]
    fn double_negation_cancels() {
        let lex = NegationLexicon::default();
        let tokens = vec!["not".to_string(), "not".to_string(), "good".to_string()];
        assert_eq!(apply_negation_scope(&tokens, &lex), vec!["good"]);
    }

    #[test]
    fn terminator_word_closes_scope() {
        let lex = NegationLexicon::default();
        let tokens = tokenize("not clean but nice");
        assert_eq!(
            apply_negation_scope(&tokens, &lex),
            vec!["NOT_clean", "but", "nice"]
        );
    }

    #[test]
    fn premarked_tokens_xor_with_open_scopes() {
        let lex = NegationLexicon::default();
        // A marked token outside any scope keeps its marker.
        let tokens = vec!["not_clean".to_string(), "nice".to_string()];
        assert_eq!(apply_negation_scope(&tokens, &lex), vec!["NOT_clean", "nice"]);
        // Inside a scope the marks cancel.
        let tokens = vec!["not".to_string(), "not_clean".to_string()];
        assert_eq!(apply_negation_scope(&tokens, &lex), vec!["clean"]);
    }

    #[test]
    fn preprocess_full_pipeline() {
        let p = Preprocessor::default_english();
        assert_eq!(
            p.preprocess("The park was not clean.").tokens(),
            ["park", "NOT_clean"]
        );
        assert_eq!(
            p.preprocess("Beautiful gardens and paths to walk around.")
                .tokens(),
            ["beauti", "garden", "path", "walk", "around"]
        );
        assert!(p.preprocess("").is_empty());
    }

    #[test]
    fn preprocess_contraction_negation() {
        let p = Preprocessor::default_english();
        assert_eq!(
            p.preprocess("Wouldn't mind it on my own.").tokens(),
            ["NOT_mind"]
        );
    }

    #[test]
    fn preprocess_is_idempotent_on_rendered_output() {
        let p = Preprocessor::default_english();
        for raw in [
            "The park was not clean.",
            "Beautiful gardens and paths to walk around.",
            "No ducks, no swans... but lovely music playing!",
            "Never visiting again; the playground was broken and unsafe.",
            "Great place to relax in the city.",
        ] {
            let once = p.preprocess(raw);
            let twice = p.preprocess(&once.render());
            assert_eq!(once, twice, "not idempotent for {raw:?}");
        }
    }

    #[test]
    fn trigger_in_stoplist_is_rejected() {
        let stop = StopwordList::new(["not".to_string()]);
        assert!(Preprocessor::new(stop, NegationLexicon::default()).is_err());
    }

    #[test]
    fn token_sequence_invariants() {
        assert!(TokenSequence::new(vec!["ok".into(), "NOT_fine".into()]).is_ok());
        assert!(TokenSequence::new(vec!["".into()]).is_err());
        assert!(TokenSequence::new(vec!["two words".into()]).is_err());
        assert!(TokenSequence::new(vec!["midNOT_dle".into()]).is_err());
    }
}
