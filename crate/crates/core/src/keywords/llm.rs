//! Prompt rendering and response parsing for LLM keyword extraction.
//!
//! The model is expected to answer in the form
//! `Query: <QUERY> Answer: <ANSWER> Therefore the answer is: a, b, c`.

use serde::{Deserialize, Serialize};

use super::{normalize_keyword, KeywordError, KeywordSet};

pub const ANSWER_MARKER: &str = "Therefore the answer is:";

// Placeholder spelling (TARGET_OBJETCTS) is kept as the model was prompted with it.
pub const SYSTEM_PROMPT: &str = "You are a helpful assistant. You can help me by answering my questions. \
I will give you some instructions for vision-language navigation, you need to give me the key objects \
that are mentioned in this instruction. Key object is the noun or noun phrase that a navigation agent \
can use as milestone.

The query will be given by:

Instruction: <QUERY>

You must respond to any queries or answer in the following way:

Query: <QUERY> Answer: <ANSWER> Therefore the answer is: <TARGET_OBJETCTS>

The key objects in <TARGET_OBJETCTS> must appear in the instruction and are separated by commas.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmPrompt {
    pub system: String,
    pub user: String,
}

pub fn render_llm_prompt(instruction: &str) -> LlmPrompt {
    LlmPrompt { system: SYSTEM_PROMPT.to_string(), user: format!("Instruction: {instruction}") }
}

/// Parse the comma-separated list after the last answer marker. Keywords are
/// trimmed of whitespace and trailing periods, normalized, filtered to those
/// present in `instruction`, and deduplicated in order.
pub fn parse_llm_response(text: &str, instruction: &str) -> Result<KeywordSet, KeywordError> {
    let idx = text.rfind(ANSWER_MARKER).ok_or(KeywordError::MissingAnswerMarker)?;
    let answer = &text[idx + ANSWER_MARKER.len()..];
    let haystack = normalize_keyword(instruction);
    let mut keywords: Vec<String> = Vec::new();
    for raw in answer.split(',') {
        let k = normalize_keyword(raw.trim().trim_end_matches('.').trim());
        if k.is_empty() || !haystack.contains(&k) || keywords.contains(&k) {
            continue;
        }
        keywords.push(k);
    }
    Ok(KeywordSet { instruction: instruction.to_string(), keywords })
}

/// The answer tail a well-behaved model would produce for `keywords`.
pub fn format_llm_answer(keywords: &[String]) -> String {
    format!("{ANSWER_MARKER} {}", keywords.join(", "))
}
