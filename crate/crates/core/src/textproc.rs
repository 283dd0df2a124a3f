//! Sentence splitting, tokenization and term normalization.
//!
//! Everything here is a pure function of the input bytes and the configured
//! word lists, so the same text always yields the same spans and tokens.

use std::collections::HashSet;
use std::path::Path;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUNDLED_STOPWORDS: &str = include_str!("../data/stopwords.txt");
const BUNDLED_ABBREVIATIONS: &str = include_str!("../data/abbreviations.txt");

static DEFAULT: LazyLock<TextProcessor> = LazyLock::new(TextProcessor::default);

/// A sentence as a byte range of the text it was split from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceSpan {
    pub index: usize,
    pub start: usize,
    pub end: usize,
}

impl SentenceSpan {
    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        &text[self.start..self.end]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub norm: String,
    pub sentence_index: usize,
    pub position: usize,
}

/// Sentences and tokens of one document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Analysis {
    pub sentences: Vec<SentenceSpan>,
    pub tokens: Vec<Token>,
}

impl Analysis {
    pub fn norms(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.norm.as_str())
    }

    /// Token norms grouped by sentence, one entry per sentence span.
    pub fn sentence_norms(&self) -> Vec<Vec<String>> {
        let mut out = vec![Vec::new(); self.sentences.len()];
        for tok in &self.tokens {
            out[tok.sentence_index].push(tok.norm.clone());
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct TextProcessor {
    stopwords: HashSet<String>,
    abbreviations: Vec<Vec<char>>,
    stem: bool,
}

impl Default for TextProcessor {
    fn default() -> Self {
        Self::from_lists(BUNDLED_STOPWORDS, BUNDLED_ABBREVIATIONS, false)
    }
}

fn parse_list(src: &str) -> impl Iterator<Item = String> + '_ {
    src.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
}

impl TextProcessor {
    /// Builds a processor from newline separated word lists.
    pub fn from_lists(stopwords: &str, abbreviations: &str, stem: bool) -> Self {
        Self {
            stopwords: parse_list(stopwords).collect(),
            abbreviations: parse_list(abbreviations).map(|a| a.chars().collect()).collect(),
            stem,
        }
    }

    /// Loads the word lists from disk, falling back to the bundled list when
    /// a path is `None`.
    pub fn load(stopwords: Option<&Path>, abbreviations: Option<&Path>, stem: bool) -> Result<Self> {
        let read = |p: Option<&Path>, fallback: &'static str| -> Result<String> {
            match p {
                Some(p) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e)),
                None => Ok(fallback.to_string()),
            }
        };
        Ok(Self::from_lists(
            &read(stopwords, BUNDLED_STOPWORDS)?,
            &read(abbreviations, BUNDLED_ABBREVIATIONS)?,
            stem,
        ))
    }

    pub fn stemming(&self) -> bool {
        self.stem
    }

    pub fn is_stopword(&self, norm: &str) -> bool {
        norm.is_empty() || self.stopwords.contains(norm)
    }

    pub fn split_sentences(&self, text: &str) -> Vec<SentenceSpan> {
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let mut spans = Vec::new();
        let mut start: Option<usize> = None;
        let mut i = 0;
        while i < chars.len() {
            let (pos, c) = chars[i];
            if start.is_none() && !c.is_whitespace() {
                start = Some(pos);
            }
            if let (Some(s), true) = (start, is_terminator(c)) {
                let mut j = i;
                while j + 1 < chars.len() && (is_terminator(chars[j + 1].1) || is_closer(chars[j + 1].1)) {
                    j += 1;
                }
                let mut k = j + 1;
                let followed_by_space = k < chars.len() && chars[k].1.is_whitespace();
                while k < chars.len() && chars[k].1.is_whitespace() {
                    k += 1;
                }
                if followed_by_space
                    && k < chars.len()
                    && (chars[k].1.is_uppercase() || chars[k].1.is_numeric())
                    && !(c == '.' && self.ends_with_abbreviation(&chars[..=i]))
                {
                    let end = chars[j].0 + chars[j].1.len_utf8();
                    spans.push(SentenceSpan {
                        index: spans.len(),
                        start: s,
                        end,
                    });
                    start = None;
                    i = j + 1;
                    continue;
                }
            }
            i += 1;
        }
        if let Some(s) = start {
            let end = text.trim_end().len();
            spans.push(SentenceSpan {
                index: spans.len(),
                start: s,
                end,
            });
        }
        spans
    }

    fn ends_with_abbreviation(&self, upto_dot: &[(usize, char)]) -> bool {
        self.abbreviations.iter().any(|abbr| {
            if abbr.len() > upto_dot.len() {
                return false;
            }
            let tail = &upto_dot[upto_dot.len() - abbr.len()..];
            let same = tail
                .iter()
                .zip(abbr)
                .all(|(&(_, c), &a)| c == a || c.to_lowercase().eq(std::iter::once(a)));
            let head = upto_dot.len() - abbr.len();
            same && (head == 0 || !upto_dot[head - 1].1.is_alphanumeric())
        })
    }

    /// Tokenizes a single sentence; positions start at zero.
    pub fn tokenize(&self, sentence: &str) -> Vec<Token> {
        let mut out = Vec::new();
        tokenize_into(sentence, 0, &mut out);
        out
    }

    /// Splits and tokenizes a document, applying the stemming pass when enabled.
    pub fn analyze(&self, text: &str) -> Analysis {
        let sentences = self.split_sentences(text);
        let mut tokens = Vec::new();
        for span in &sentences {
            tokenize_into(span.slice(text), span.index, &mut tokens);
        }
        if self.stem {
            for t in &mut tokens {
                t.norm = stem(&t.norm);
            }
        }
        Analysis { sentences, tokens }
    }

    /// Normalized terms of free text, in order, without stopword removal.
    pub fn terms(&self, text: &str) -> Vec<String> {
        self.analyze(text).tokens.into_iter().map(|t| t.norm).collect()
    }

    /// Normalizes a label into the token norms it must match.
    pub fn label_norms(&self, label: &str) -> Vec<String> {
        let mut toks = Vec::new();
        tokenize_into(label, 0, &mut toks);
        toks.into_iter()
            .map(|t| if self.stem { stem(&t.norm) } else { t.norm })
            .collect()
    }
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201d}' | '\u{2019}')
}

fn is_joiner(c: char) -> bool {
    matches!(c, '-' | '\'' | '\u{2019}')
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || is_joiner(c)
}

fn tokenize_into(sentence: &str, sentence_index: usize, out: &mut Vec<Token>) {
    for piece in sentence.split(|c: char| !is_word_char(c)) {
        if piece.is_empty() {
            continue;
        }
        let norm: String = piece
            .to_lowercase()
            .trim_matches(|c: char| !c.is_alphanumeric())
            .chars()
            .filter(|&c| is_word_char(c))
            .collect();
        if norm.is_empty() {
            continue;
        }
        let position = out.len();
        out.push(Token {
            surface: piece.to_string(),
            norm,
            sentence_index,
            position,
        });
    }
}

/// Strips one of `ing`, `ed`, `es`, `s` when at least three characters remain.
pub fn stem(norm: &str) -> String {
    for suffix in ["ing", "ed", "es", "s"] {
        if let Some(base) = norm.strip_suffix(suffix) {
            if base.chars().count() >= 3 {
                return base.to_string();
            }
        }
    }
    norm.to_string()
}

/// True when every character is numeric.
pub fn is_numeric_token(norm: &str) -> bool {
    !norm.is_empty() && norm.chars().all(char::is_numeric)
}

pub fn split_sentences(text: &str) -> Vec<SentenceSpan> {
    DEFAULT.split_sentences(text)
}

pub fn tokenize(sentence: &str) -> Vec<Token> {
    DEFAULT.tokenize(sentence)
}

pub fn is_stopword(norm: &str) -> bool {
    DEFAULT.is_stopword(norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sentences(text: &str) -> Vec<&str> {
        split_sentences(text).iter().map(|s| s.slice(text)).collect()
    }

    fn norms(s: &str) -> Vec<String> {
        tokenize(s).into_iter().map(|t| t.norm).collect()
    }

    #[test]
    fn splits_after_abbreviation_only_at_real_boundary() {
        assert_eq!(
            sentences("Dr. Smith treats COPD. CKD worsens."),
            vec!["Dr. Smith treats COPD.", "CKD worsens."]
        );
    }

    #[test]
    fn empty_and_unterminated_text() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("   \n ").is_empty());
        let text = "no terminator here";
        let spans = split_sentences(text);
        assert_eq!(spans.len(), 1);
        assert_eq!((spans[0].start, spans[0].end), (0, text.len()));
    }

    #[test]
    fn abbreviation_list_is_respected() {
        assert_eq!(
            sentences("See Fig. 2 for details. Done."),
            vec!["See Fig. 2 for details.", "Done."]
        );
        assert_eq!(
            sentences("Smith et al. Reported it."),
            vec!["Smith et al. Reported it."]
        );
        assert_eq!(
            sentences("Drugs, e.g. Steroids, help."),
            vec!["Drugs, e.g. Steroids, help."]
        );
        assert_eq!(sentences("Vol. 3 is out."), vec!["Vol. 3 is out."]);
        // "no." only matches a whole word
        assert_eq!(
            sentences("It was piano. No one came."),
            vec!["It was piano.", "No one came."]
        );
    }

    #[test]
    fn boundary_requires_uppercase_or_digit() {
        assert_eq!(sentences("a. b. c."), vec!["a. b. c."]);
        assert_eq!(sentences("Why? 12 cases! Done"), vec!["Why?", "12 cases!", "Done"]);
        assert_eq!(
            sentences("He said \"stop.\" Then left."),
            vec!["He said \"stop.\"", "Then left."]
        );
        assert_eq!(sentences("Wait... What?"), vec!["Wait...", "What?"]);
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(
            norms("abnormal coughing, toxicity!"),
            vec!["abnormal", "coughing", "toxicity"]
        );
        assert_eq!(norms("COPD"), vec!["copd"]);
        assert!(norms("\u{2014}").is_empty());
        assert_eq!(norms("a rule-based (splitter)"), vec!["a", "rule-based", "splitter"]);
        assert_eq!(norms("'quoted' --dash-"), vec!["quoted", "dash"]);
    }

    #[test]
    fn token_positions_follow_document_order() {
        let a = TextProcessor::default().analyze("First one here. Second one.");
        let pos: Vec<_> = a.tokens.iter().map(|t| (t.sentence_index, t.position)).collect();
        assert_eq!(pos, vec![(0, 0), (0, 1), (0, 2), (1, 3), (1, 4)]);
    }

    #[test]
    fn stopwords() {
        assert!(is_stopword("the"));
        assert!(!is_stopword("copd"));
        assert!(is_stopword(""));
    }

    #[test]
    fn stemming_is_off_by_default_and_keeps_short_stems() {
        let tp = TextProcessor::default();
        assert_eq!(tp.terms("coughing"), vec!["coughing"]);
        let tp = TextProcessor::from_lists("", "", true);
        assert_eq!(
            tp.terms("coughing treated kidneys gas"),
            vec!["cough", "treat", "kidney", "gas"]
        );
        assert_eq!(stem("sings"), "sing");
        assert_eq!(stem("bus"), "bus");
    }

    #[test]
    fn numeric_tokens() {
        assert!(is_numeric_token("2008"));
        assert!(!is_numeric_token("covid-19"));
        assert!(!is_numeric_token(""));
    }

    fn text_strategy() -> impl Strategy<Value = String> {
        let word = prop_oneof![
            "[a-z]{1,8}",
            "[A-Z][a-z]{0,6}",
            "[0-9]{1,4}",
            Just("Dr.".to_string()),
            Just("e.g.".to_string()),
            Just("et al.".to_string()),
            Just("rule-based".to_string()),
            Just("Ünïcode".to_string()),
            Just("\u{2014}".to_string()),
        ];
        let punct = prop_oneof![
            Just(""),
            Just("."),
            Just(","),
            Just("!"),
            Just("?"),
            Just("..."),
            Just(";"),
            Just(".\"")
        ];
        let ws = prop_oneof![Just(" "), Just("  "), Just("\n"), Just("\t ")];
        proptest::collection::vec((word, punct, ws), 0..30).prop_map(|parts| {
            parts
                .into_iter()
                .map(|(w, p, s)| format!("{w}{p}{s}"))
                .collect::<String>()
        })
    }

    proptest! {
        #[test]
        fn spans_reconstruct_input(text in text_strategy()) {
            let spans = split_sentences(&text);
            let mut cursor = 0;
            for (i, span) in spans.iter().enumerate() {
                prop_assert_eq!(span.index, i);
                prop_assert!(span.start < span.end);
                prop_assert!(text[cursor..span.start].chars().all(char::is_whitespace));
                cursor = span.end;
            }
            prop_assert!(text[cursor..].chars().all(char::is_whitespace));
            for span in &spans {
                let s = span.slice(&text);
                prop_assert!(!s.starts_with(char::is_whitespace));
                prop_assert!(!s.ends_with(char::is_whitespace));
            }
        }

        #[test]
        fn tokenize_idempotent_on_norms(text in text_strategy()) {
            let first = norms(&text);
            prop_assert!(first.iter().all(|n| !n.is_empty()));
            let again = norms(&first.join(" "));
            prop_assert_eq!(first, again);
        }

        #[test]
        fn deterministic(text in text_strategy()) {
            let tp = TextProcessor::default();
            prop_assert_eq!(tp.analyze(&text), tp.analyze(&text));
        }
    }
}
