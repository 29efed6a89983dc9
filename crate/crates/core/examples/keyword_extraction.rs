//! Rule-based extraction, the LLM prompt/response round trip, and the cache.

use omninav::keywords::{
    format_llm_answer, parse_llm_response, render_llm_prompt, AblationMode, CachedExtractor, KeywordCache,
    KeywordExtractor, KeywordPipeline, RuleBasedExtractor,
};

fn main() -> anyhow::Result<()> {
    let instruction = "Walk past the marble kitchen counter, turn left at the kitchen island and stop near the plant.";

    let rules = RuleBasedExtractor::default();
    println!("rule-based: {:?}", rules.extract_keywords(instruction).keywords);

    let prompt = render_llm_prompt(instruction);
    println!("prompt user turn: {}", prompt.user);
    // pretend a model answered
    let reply =
        format!("The landmarks are listed below. {}", format_llm_answer(&["kitchen island".into(), "plant".into()]));
    let parsed = parse_llm_response(&reply, instruction)?;
    println!("parsed reply: {:?}", parsed.keywords);

    let dir = std::env::temp_dir().join(format!("omninav-keywords-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let mut cache = KeywordCache::open(dir.join("cache.jsonl"))?;
    let hash = cache.store(parsed)?;
    println!("cached under {hash}");
    let cached = CachedExtractor::new(cache, rules);
    println!("from cache: {:?}", cached.extract(instruction)?.keywords);

    for mode in [AblationMode::Full, AblationMode::Type2, AblationMode::Type1] {
        let q = KeywordPipeline::rule_based(mode).queries(instruction)?;
        println!("{mode:>5}: {q:?}");
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
