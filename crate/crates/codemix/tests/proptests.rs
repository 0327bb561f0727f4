//! Property-based invariants over randomized inputs.

use proptest::prelude::*;

use codemix::filters::{
    char_repetition_coefficient, lexical_repetition_coefficient, length_ratio_filter,
    FilterConfig,
};
use codemix::lid::f1_from_pr;
use codemix::metrics::{cmi, spf};
use codemix::textcore::{analyze, tokenize, LexiconSet};
use codemix::ParallelPair;

proptest! {
    #[test]
    fn token_spans_reconstruct_their_surfaces(text in "\\PC{0,120}") {
        for token in tokenize(&text) {
            let (start, end) = token.span;
            prop_assert_eq!(&text[start..end], token.surface.as_str());
        }
    }

    #[test]
    fn tokens_appear_in_order(text in "\\PC{0,120}") {
        let tokens = tokenize(&text);
        for pair in tokens.windows(2) {
            prop_assert!(pair[0].span.1 <= pair[1].span.0);
        }
    }

    #[test]
    fn lexical_coefficient_is_a_proportion(words in proptest::collection::vec("[a-c]{1,3}", 0..40)) {
        let refs: Vec<&str> = words.iter().map(String::as_str).collect();
        let r = lexical_repetition_coefficient(&refs, 5);
        prop_assert!((0.0..=1.0).contains(&r));
    }

    #[test]
    fn char_coefficient_is_a_proportion(text in "[ab ]{0,80}") {
        let r = char_repetition_coefficient(&text, 10);
        prop_assert!((0.0..=1.0).contains(&r));
    }

    #[test]
    fn metrics_stay_in_range(text in "\\PC{0,120}") {
        let lexicons = LexiconSet::default();
        let tagged = analyze(&text, &lexicons);
        prop_assert!((0.0..=50.0).contains(&cmi(&tagged)));
        prop_assert!((0.0..=1.0).contains(&spf(&tagged)));
    }

    #[test]
    fn f1_bounded_by_its_inputs(p in 0.0f64..=100.0, r in 0.0f64..=100.0) {
        let f1 = f1_from_pr(p, r);
        prop_assert!(f1 <= p.max(r) + 1e-9);
        prop_assert!(f1 >= 0.0);
        // Harmonic mean never exceeds the arithmetic mean.
        prop_assert!(f1 <= (p + r) / 2.0 + 1e-9);
    }

    #[test]
    fn verdicts_are_self_consistent(src in "[a-z ]{0,40}", tgt in "[a-z ]{0,40}") {
        let mut pair = ParallelPair::new("p", &src, &tgt);
        pair.source_tokens = tokenize(&src);
        pair.target_tokens = tokenize(&tgt);
        let verdict = length_ratio_filter(&pair, &FilterConfig::default());
        prop_assert!(verdict.self_consistent());
    }
}
