//! Push candidate translation pairs through the quality bank: four cheap
//! heuristics, then a synthetic-text classifier gate, then a final quality
//! estimation gate. Table-backed scorers keep the example offline.
//!
//! Run with: cargo run --example filter_bank

use std::collections::HashMap;

use codemix::filters::{run_filter_bank, FilterConfig, TableScorer};
use codemix::textcore::{analyze, tokenize, LexiconSet};
use codemix::ParallelPair;

fn pair(id: &str, source: &str, target: &str, lexicons: &LexiconSet) -> ParallelPair {
    let mut p = ParallelPair::new(id, source, target);
    p.source_tokens = tokenize(source);
    p.target_tokens = analyze(target, lexicons);
    p
}

fn main() {
    let lexicons = LexiconSet::from_words(["hom", "nay", "rat"], ["ok", "deadline"]);
    let pairs = vec![
        pair("good", "the deadline is friday", "deadline là thứ sáu nhé", &lexicons),
        pair("too-long", "hi", "một câu dài hơn bản gốc rất nhiều lần", &lexicons),
        pair(
            "loopy",
            "it repeats and repeats and repeats and repeats and repeats again",
            "lặp đi lặp đi lặp đi lặp đi lặp đi lặp đi lặp đi lặp đi",
            &lexicons,
        ),
        pair("low-quality", "see you then later", "hẹn gặp lại sau nhé", &lexicons),
    ];

    let classifier = TableScorer {
        name: "demo-classifier".into(),
        scores: HashMap::new(),
        default: 0.1, // confident everything reads natural
    };
    let qe = TableScorer {
        name: "demo-qe".into(),
        scores: HashMap::from([("low-quality".to_string(), 0.42)]),
        default: 0.95,
    };

    let outcome = run_filter_bank(pairs, &FilterConfig::default(), Some(&classifier), Some(&qe));
    println!("accepted: {:?}", outcome.accepted.iter().map(|p| &p.id).collect::<Vec<_>>());
    for pair in &outcome.rejected {
        let verdict = pair.verdicts.last().unwrap();
        println!(
            "rejected {}: {} statistic {:.3} vs threshold {:.3}",
            pair.id, verdict.filter_name, verdict.statistic, verdict.threshold
        );
    }
    println!("\nreport: {}", serde_json::to_string_pretty(&outcome.report).unwrap());
}
