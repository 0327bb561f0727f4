//! Compare two systems with a paired permutation test. Small score sets are
//! enumerated exactly; larger ones fall back to seeded Monte Carlo.
//!
//! Run with: cargo run --example significance_test

use codemix::evalstats::{paired_permutation_test, Segment, SystemScores};

fn main() {
    // A beats B on every one of five segments.
    let small = SystemScores {
        system_a: "augmented".into(),
        system_b: "baseline".into(),
        segments: (0..5)
            .map(|i| Segment {
                id: format!("s{i}"),
                score_a: 0.8,
                score_b: 0.6,
            })
            .collect(),
    };
    let result = paired_permutation_test(&small, 10_000, 0).unwrap();
    println!(
        "5 segments : mean diff {:+.3}, p = {:.4} ({}, {:?})",
        result.statistic,
        result.p_value,
        if result.exact { "exact" } else { "monte carlo" },
        result.band
    );

    // A noisier 60-segment comparison with a modest real gap.
    let noisy = SystemScores {
        system_a: "augmented".into(),
        system_b: "baseline".into(),
        segments: (0..60)
            .map(|i| {
                let wiggle = ((i * 37) % 17) as f64 / 17.0 - 0.5;
                Segment {
                    id: format!("n{i}"),
                    score_a: 0.70 + 0.03 + 0.1 * wiggle,
                    score_b: 0.70 - 0.1 * wiggle,
                }
            })
            .collect(),
    };
    let result = paired_permutation_test(&noisy, 10_000, 0).unwrap();
    println!(
        "60 segments: mean diff {:+.3}, p = {:.4} ({}, {:?})",
        result.statistic,
        result.p_value,
        if result.exact { "exact" } else { "monte carlo" },
        result.band
    );
}
