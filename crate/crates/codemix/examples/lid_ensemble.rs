//! Two-stage language identification: a cheap lexical gate routes candidate
//! posts to a three-voter ensemble, and the majority label wins. Stub
//! backends stand in for remote classifiers so the example runs offline.
//!
//! Run with: cargo run --example lid_ensemble

use codemix::backend::{build_stub, BackendConfig, BackendKind};
use codemix::lid::{ensemble_classify, stage1_filter};
use codemix::textcore::{analyze, LexiconSet};

fn stub(name: &str, behavior: &str) -> (Box<dyn codemix::backend::Backend>, BackendConfig) {
    let config = BackendConfig {
        name: name.into(),
        transport: BackendKind::Stub {
            behavior: behavior.into(),
        },
        prompt_template: Some("Classify the text: {text}".into()),
        timeout_ms: 1000,
        max_retries: 0,
        requests_per_sec: None,
        api_key_env: None,
    };
    (build_stub(name, behavior), config)
}

fn main() {
    let lexicons = LexiconSet::from_words(["la", "em"], ["ok", "meeting"]);
    let ensemble = vec![
        stub("voter-1", "code_mixed"),
        stub("voter-2", "code_mixed"),
        stub("voter-3", "monolingual"),
    ];

    let posts = [
        ("p1", "hôm nay meeting nhé mọi người"),
        ("p2", "just a normal english sentence"),
    ];
    for (id, text) in posts {
        let tagged = analyze(text, &lexicons);
        if !stage1_filter(&tagged) {
            println!("{id}: stage 1 gate says monolingual, ensemble skipped");
            continue;
        }
        let decision = ensemble_classify(id, text, &ensemble).unwrap();
        println!(
            "{id}: final = {:?} after {} votes",
            decision.final_label.unwrap(),
            decision.ensemble_votes.len()
        );
        for vote in &decision.ensemble_votes {
            println!("   {} voted {:?}", vote.backend, vote.vote);
        }
    }
}
