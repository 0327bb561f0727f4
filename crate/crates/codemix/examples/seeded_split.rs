//! Deterministic train/dev/test split of a small corpus. The same seed
//! always yields the same assignment; a different seed reshuffles.
//!
//! Run with: cargo run --example seeded_split

use codemix::corpus::{split, PiiStatus, Post, SplitSpec};

fn main() {
    let posts: Vec<Post> = (0..20)
        .map(|i| Post {
            id: format!("post{i:02}"),
            text: format!("nội dung bài viết số {i}"),
            platform: Some("forum".into()),
            collected_at: None,
            pii_status: PiiStatus::Clean,
            split: None,
            lid: None,
        })
        .collect();

    for seed in [7, 8] {
        let spec = SplitSpec::new(0.7, 0.15, 0.15, seed).unwrap();
        let splits = split(posts.clone(), &spec).unwrap();
        let ids = |v: &[Post]| v.iter().map(|p| p.id.clone()).collect::<Vec<_>>().join(" ");
        println!("seed {seed}:");
        println!("  train ({}): {}", splits.train.len(), ids(&splits.train));
        println!("  dev   ({}): {}", splits.dev.len(), ids(&splits.dev));
        println!("  test  ({}): {}", splits.test.len(), ids(&splits.test));
    }
}
