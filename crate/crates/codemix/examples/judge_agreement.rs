//! Measure how often an automatic metric agrees with human pairwise
//! judgments, using a relative tie margin, and aggregate the raw judgments
//! into win/tie percentages.
//!
//! Run with: cargo run --example judge_agreement

use codemix::evalstats::{
    metric_judge_agreement, win_tie_aggregate, JudgePreference, JudgeVerdict, MarginMode,
    Segment, SystemScores,
};

fn main() {
    let scores = SystemScores {
        system_a: "augmented".into(),
        system_b: "baseline".into(),
        segments: vec![
            Segment { id: "s1".into(), score_a: 0.90, score_b: 0.70 },
            Segment { id: "s2".into(), score_a: 0.60, score_b: 0.85 },
            Segment { id: "s3".into(), score_a: 0.80, score_b: 0.79 }, // inside margin
            Segment { id: "s4".into(), score_a: 0.95, score_b: 0.50 },
        ],
    };
    let prefs = vec![
        JudgePreference { id: "s1".into(), verdict: JudgeVerdict::A, rationale: None },
        JudgePreference { id: "s2".into(), verdict: JudgeVerdict::B, rationale: None },
        JudgePreference { id: "s3".into(), verdict: JudgeVerdict::A, rationale: None },
        JudgePreference { id: "s4".into(), verdict: JudgeVerdict::Tie, rationale: None },
    ];

    let result = metric_judge_agreement(&scores, &prefs, 0.02, MarginMode::Relative).unwrap();
    println!(
        "jointly decided {} of {} segments, metric matched the judge on {}",
        result.n_decided, result.total_segments, result.matches
    );
    match result.agreement {
        Some(a) => println!("agreement = {:.1}%", 100.0 * a),
        None => println!("agreement undefined: no jointly decided segments"),
    }

    let summary = win_tie_aggregate(&prefs).unwrap();
    println!("\njudge tallies: {summary:?}");
}
