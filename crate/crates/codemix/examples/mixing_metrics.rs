//! Tokenize a few code-mixed posts, tag each token, and report CMI and the
//! switch-point fraction per post and for the corpus as a whole.
//!
//! Run with: cargo run --example mixing_metrics

use codemix::metrics::{corpus_stats, sentence_stats};
use codemix::textcore::{analyze, LexiconSet};

fn main() {
    let lexicons = LexiconSet::from_words(
        ["khong", "la", "em", "anh", "di"],
        ["ok", "deadline", "meeting", "check", "email"],
    );

    let posts = [
        "hôm nay meeting lúc 3h nhé, nhớ check email",
        "deadline là thứ sáu, đừng quên",
        "ok anh, em làm xong rồi 🎉",
        "this one is entirely in english",
    ];

    let mut tagged_posts = Vec::new();
    for post in posts {
        let tagged = analyze(post, &lexicons);
        let stats = sentence_stats(&tagged);
        println!("{post:?}");
        println!(
            "  cmi = {:5.1}   spf = {:.2}   tokens = {} (A={}, B={}, neutral={})",
            stats.cmi, stats.spf, stats.n_tokens, stats.n_lang_a, stats.n_lang_b, stats.n_neutral
        );
        tagged_posts.push(tagged);
    }

    let corpus = corpus_stats(tagged_posts.iter().map(Vec::as_slice)).unwrap();
    println!("\ncorpus: mean cmi = {:.1}, mean spf = {:.2}", corpus.cmi, corpus.spf);
}
