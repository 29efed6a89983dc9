//! Turn fused keywords into an embedding matrix and attend over it.

use ndarray::Array1;
use omninav::fusion::{
    attention_weights, build_map_embedding, keyword_attention, EmbeddingConfig, EmbeddingParams, FusedKeyword,
    HashEmbedder, KeywordEmbedder, Space,
};

fn main() -> anyhow::Result<()> {
    let fused = vec![
        FusedKeyword { label: "sofa".into(), distance: 1.0, direction: 3.0, confidence: 0.9 },
        FusedKeyword { label: "lamp".into(), distance: 2.0, direction: 3.0, confidence: 0.7 },
        FusedKeyword { label: "sink".into(), distance: 0.0, direction: 0.0, confidence: 0.5 },
    ];
    let cfg = EmbeddingConfig::from_params(EmbeddingParams { dim: 16, seed: 7, ..EmbeddingParams::default() })?;
    let embedder = HashEmbedder::new(16, 7);
    let map = build_map_embedding(&fused, Space::Discrete, &cfg, &embedder)?;
    let (rows, cols, data) = map.to_row_major();
    println!("map embedding {rows}×{cols}, rows {:?}, first values {:?}", map.labels, &data[..4]);

    let query = Array1::from(embedder.embed("sofa"));
    let w = attention_weights(query.view(), map.matrix.view())?;
    for (label, weight) in map.labels.iter().zip(w.iter()) {
        println!("  {label:5} {weight:.3}");
    }
    let ctx = keyword_attention(query.view(), map.matrix.view(), map.matrix.view())?;
    println!("context vector width {}", ctx.len());
    Ok(())
}
