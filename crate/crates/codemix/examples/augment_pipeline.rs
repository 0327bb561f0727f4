//! Run the three-stage augmentation loop end to end with stub backends:
//! translate monolingual sentences in batches, filter each batch, retrain,
//! and finish with the standalone quality gate. Checkpoints land in a
//! temporary directory and the run is resumable at every phase boundary.
//!
//! Run with: cargo run --example augment_pipeline

use std::collections::HashMap;

use codemix::filters::{TableScorer, CODEMIX_EQUILIBRIUM};
use codemix::pipeline::{
    collect_stage2_corpus, stage2_iterate, stage3_qa, PipelineConfig, SourceSentence,
    StubTranslator,
};
use codemix::textcore::LexiconSet;
use codemix::FilterConfig;

fn main() {
    let checkpoint_dir = tempfile::tempdir().unwrap();
    let mut filter = FilterConfig::default();
    // The stub translator echoes its input, which never balances the two
    // languages, so the equilibrium heuristic is off for this demo.
    filter.disabled.push(CODEMIX_EQUILIBRIUM.into());
    let config = PipelineConfig {
        iteration_count: 3,
        batch_size: Some(4),
        filter,
        checkpoint_dir: checkpoint_dir.path().to_path_buf(),
    };

    let source: Vec<SourceSentence> = (0..12)
        .map(|i| SourceSentence {
            id: format!("mono{i}"),
            text: format!("plain sentence number {i} with several words"),
        })
        .collect();
    let qe = TableScorer {
        name: "demo-qe".into(),
        scores: HashMap::new(),
        default: 0.93,
    };

    let status = stage2_iterate(
        &config,
        &source,
        &[],
        &StubTranslator,
        None,
        Some(&qe),
        &LexiconSet::default(),
        None,
    )
    .unwrap();
    println!("stage 2 done = {}", status.done);
    for record in &status.iterations {
        println!(
            "  iteration {}: generated {} -> heuristics {} -> qe {}  (model {})",
            record.iteration,
            record.generated,
            record.survived_heuristics,
            record.survived_qe,
            record.model_tag
        );
    }

    let accumulated = collect_stage2_corpus(&config).unwrap();
    let (accepted, report, _deferred) = stage3_qa(accumulated, &qe, &config.filter);
    println!(
        "stage 3: {} of {} accumulated pairs pass the final gate",
        accepted.len(),
        report.input
    );
}
