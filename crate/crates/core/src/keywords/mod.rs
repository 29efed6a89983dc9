//! Keyword extraction from navigation instructions.
//!
//! Keywords are scene-grounded noun phrases ("dining table", "kitchen") used
//! as open-vocabulary detection queries. Every extractor upholds one rule:
//! an emitted keyword appears in its instruction, compared after
//! [`normalize_keyword`].

mod ablation;
mod cache;
mod lexicon;
mod llm;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ablation::{AblationMode, COMMON_CATEGORIES};
pub use cache::{instruction_hash, CacheRecord, KeywordCache};
pub use lexicon::DEFAULT_LEXICON;
pub use llm::{format_llm_answer, parse_llm_response, render_llm_prompt, LlmPrompt, ANSWER_MARKER, SYSTEM_PROMPT};

#[derive(Debug, Error)]
pub enum KeywordError {
    #[error("response has no \"{}\" marker", ANSWER_MARKER)]
    MissingAnswerMarker,
    #[error("keyword cache corrupt at line {line}: {message}")]
    CacheCorrupt { line: usize, message: String },
    #[error("keyword '{keyword}' does not appear in the instruction")]
    NotInInstruction { keyword: String },
    #[error("duplicate or empty keyword '{0}'")]
    InvalidKeyword(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl KeywordError {
    pub fn code(&self) -> &'static str {
        match self {
            KeywordError::MissingAnswerMarker => "MissingAnswerMarker",
            KeywordError::CacheCorrupt { .. } => "CacheCorrupt",
            KeywordError::NotInInstruction { .. } => "NotInInstruction",
            KeywordError::InvalidKeyword(_) => "InvalidKeyword",
            KeywordError::Io(_) => "Io",
        }
    }
}

/// Lowercase and collapse runs of whitespace to single spaces.
pub fn normalize_keyword(s: &str) -> String {
    s.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

/// Keywords of one instruction, in first-occurrence order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordSet {
    pub instruction: String,
    pub keywords: Vec<String>,
}

impl KeywordSet {
    /// Build a set, normalizing each keyword and rejecting duplicates and
    /// keywords absent from the instruction.
    pub fn new(instruction: impl Into<String>, keywords: Vec<String>) -> Result<Self, KeywordError> {
        let instruction = instruction.into();
        let haystack = normalize_keyword(&instruction);
        let mut out: Vec<String> = Vec::with_capacity(keywords.len());
        for k in keywords {
            let k = normalize_keyword(&k);
            if k.is_empty() || out.contains(&k) {
                return Err(KeywordError::InvalidKeyword(k));
            }
            if !haystack.contains(&k) {
                return Err(KeywordError::NotInInstruction { keyword: k });
            }
            out.push(k);
        }
        Ok(Self { instruction, keywords: out })
    }

    pub fn empty(instruction: impl Into<String>) -> Self {
        Self { instruction: instruction.into(), keywords: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty()
    }
}

/// Anything that maps an instruction to its keywords.
pub trait KeywordExtractor: Send + Sync {
    fn extract(&self, instruction: &str) -> Result<KeywordSet, KeywordError>;
}

/// Byte spans of alphanumeric runs in `s`.
fn word_spans(s: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        match (c.is_alphanumeric(), start) {
            (true, None) => start = Some(i),
            (false, Some(st)) => {
                spans.push((st, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(st) = start {
        spans.push((st, s.len()));
    }
    spans
}

fn words(s: &str) -> Vec<String> {
    word_spans(s).into_iter().map(|(a, b)| s[a..b].to_lowercase()).collect()
}

/// Longest-match lexicon extractor. Deterministic and offline.
#[derive(Debug, Clone)]
pub struct RuleBasedExtractor {
    phrases: Vec<Vec<String>>,
}

impl Default for RuleBasedExtractor {
    fn default() -> Self {
        Self::new(DEFAULT_LEXICON.iter().copied())
    }
}

impl RuleBasedExtractor {
    pub fn new<I, S>(lexicon: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut phrases: Vec<Vec<String>> =
            lexicon.into_iter().map(|p| words(p.as_ref())).filter(|w| !w.is_empty()).collect();
        phrases.sort();
        phrases.dedup();
        Self { phrases }
    }

    /// Lexicon phrases found in `instruction`, left to right. Where matches
    /// overlap the longer one wins (earlier start on equal length).
    pub fn extract_keywords(&self, instruction: &str) -> KeywordSet {
        let text = normalize_keyword(instruction);
        let spans = word_spans(&text);
        let tokens: Vec<&str> = spans.iter().map(|&(a, b)| &text[a..b]).collect();

        let mut matches: Vec<(usize, usize)> = Vec::new();
        for start in 0..tokens.len() {
            for phrase in &self.phrases {
                let end = start + phrase.len();
                if end <= tokens.len() && tokens[start..end].iter().zip(phrase).all(|(t, p)| *t == p) {
                    matches.push((start, phrase.len()));
                }
            }
        }
        matches.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut taken = vec![false; tokens.len()];
        let mut chosen: Vec<(usize, usize)> = Vec::new();
        for (start, len) in matches {
            if taken[start..start + len].iter().any(|t| *t) {
                continue;
            }
            taken[start..start + len].iter_mut().for_each(|t| *t = true);
            chosen.push((start, len));
        }
        chosen.sort();

        let mut keywords: Vec<String> = Vec::new();
        for (start, len) in chosen {
            let phrase = text[spans[start].0..spans[start + len - 1].1].to_string();
            if !keywords.contains(&phrase) {
                keywords.push(phrase);
            }
        }
        KeywordSet { instruction: instruction.to_string(), keywords }
    }
}

impl KeywordExtractor for RuleBasedExtractor {
    fn extract(&self, instruction: &str) -> Result<KeywordSet, KeywordError> {
        Ok(self.extract_keywords(instruction))
    }
}

/// Serves cached (typically LLM-produced) keyword sets, falling back to the
/// rule-based extractor on a miss.
pub struct CachedExtractor {
    cache: KeywordCache,
    fallback: RuleBasedExtractor,
}

impl CachedExtractor {
    pub fn new(cache: KeywordCache, fallback: RuleBasedExtractor) -> Self {
        Self { cache, fallback }
    }
}

impl KeywordExtractor for CachedExtractor {
    fn extract(&self, instruction: &str) -> Result<KeywordSet, KeywordError> {
        match self.cache.lookup_instruction(instruction) {
            Some(set) => Ok(set.clone()),
            None => self.fallback.extract(instruction),
        }
    }
}

/// Extraction followed by the ablation filter; yields detection queries.
pub struct KeywordPipeline {
    extractor: Box<dyn KeywordExtractor>,
    mode: AblationMode,
}

impl KeywordPipeline {
    pub fn new(extractor: Box<dyn KeywordExtractor>, mode: AblationMode) -> Self {
        Self { extractor, mode }
    }

    pub fn rule_based(mode: AblationMode) -> Self {
        Self::new(Box::new(RuleBasedExtractor::default()), mode)
    }

    pub fn mode(&self) -> AblationMode {
        self.mode
    }

    pub fn queries(&self, instruction: &str) -> Result<Vec<String>, KeywordError> {
        if self.mode == AblationMode::Type1 {
            return Ok(self.mode.apply(&[]));
        }
        let set = self.extractor.extract(instruction)?;
        Ok(self.mode.apply(&set.keywords))
    }
}
