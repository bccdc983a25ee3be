use std::sync::Arc;

use hintlab_core::bench::table::{dominates, pareto_front, ParetoPoint};
use hintlab_core::client::stub::StubTransport;
use hintlab_core::client::{EndpointTable, ModelClient, RetryPolicy};
use hintlab_core::hints::{HintChain, HintStrategy};
use hintlab_core::metrics::{
    aggregate, leakage_em, redundancy, redundancy_of_embeddings, rouge_l_recall, TextCounts,
};
use proptest::prelude::*;

/// Longest common subsequence by trying every subsequence of the reference,
/// longest first.
fn brute_lcs(candidate: &[u8], reference: &[u8]) -> usize {
    let n = reference.len();
    let mut best = 0;
    for mask in 0u32..(1 << n) {
        let len = mask.count_ones() as usize;
        if len <= best {
            continue;
        }
        let sub: Vec<u8> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| reference[i]).collect();
        if is_subsequence(&sub, candidate) {
            best = len;
        }
    }
    best
}

fn is_subsequence(needle: &[u8], hay: &[u8]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|c| it.any(|h| h == c))
}

fn tokens(max: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..4, 0..=max)
}

proptest! {
    #[test]
    fn rouge_matches_subsequence_oracle(c in tokens(10), r in prop::collection::vec(0u8..4, 1..=8)) {
        let got = rouge_l_recall(&c, &r).unwrap();
        let want = brute_lcs(&c, &r) as f64 / r.len() as f64;
        prop_assert!((got - want).abs() < 1e-12);
        prop_assert_eq!(got == 1.0, is_subsequence(&r, &c));
    }

    #[test]
    fn redundancy_ignores_hint_order(
        vs in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 1..6),
        seed in any::<u64>(),
    ) {
        let mut shuffled = vs.clone();
        let n = shuffled.len();
        shuffled.rotate_left((seed as usize) % n);
        shuffled.swap(0, (seed as usize / 7) % n);
        let a = redundancy_of_embeddings(&vs).unwrap();
        let b = redundancy_of_embeddings(&shuffled).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn duplicating_a_hint_never_lowers_redundancy(
        vs in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 1..6),
        pick in any::<usize>(),
    ) {
        let before = redundancy_of_embeddings(&vs).unwrap();
        let mut more = vs.clone();
        more.push(vs[pick % vs.len()].clone());
        prop_assert!(redundancy_of_embeddings(&more).unwrap() >= before - 1e-12);
    }

    #[test]
    fn appending_a_hint_never_clears_leakage(
        texts in prop::collection::vec("[a-c ]{0,12}", 0..5),
        extra in "[a-c ]{0,12}",
        answer in "[a-c]{1,3}",
    ) {
        let chain = HintChain::from_texts("q", HintStrategy::Static, &texts);
        let mut longer = texts.clone();
        longer.push(extra);
        let longer = HintChain::from_texts("q", HintStrategy::Static, &longer);
        prop_assert!(leakage_em(&longer, &answer) >= leakage_em(&chain, &answer));
    }

    #[test]
    fn aggregate_moves_a_quarter_per_unit(
        g in -1.0f64..1.0, c in 0.0f64..1.0, r in 0.0f64..1.0, l in 0.0f64..1.0, d in 0.001f64..0.5,
    ) {
        let base = aggregate(g, c, r, l);
        prop_assert!((aggregate(g + d, c, r, l) - base - d / 4.0).abs() < 1e-12);
        prop_assert!((aggregate(g, c + d, r, l) - base - d / 4.0).abs() < 1e-12);
        prop_assert!((aggregate(g, c, r + d, l) - base + d / 4.0).abs() < 1e-12);
        prop_assert!((aggregate(g, c, r, l + d) - base + d / 4.0).abs() < 1e-12);
    }

    #[test]
    fn reading_ease_falls_and_grade_rises_with_syllables(
        words in 1usize..200, sentences in 1usize..20, syl in 1usize..400, extra in 1usize..100,
    ) {
        let a = TextCounts { words, sentences, syllables: syl, difficult: 0 }.scores().unwrap();
        let b = TextCounts { words, sentences, syllables: syl + extra, difficult: 0 }.scores().unwrap();
        prop_assert!(b.fre < a.fre);
        prop_assert!(b.fk_grade > a.fk_grade);
    }

    #[test]
    fn pareto_front_matches_all_pairs_check(
        pts in prop::collection::vec((0u8..6, 0u8..6), 1..=5), mx in any::<bool>(), my in any::<bool>(),
    ) {
        let points: Vec<ParetoPoint> = pts
            .iter()
            .enumerate()
            .map(|(i, (x, y))| ParetoPoint::new(*x as f64, *y as f64, format!("p{i}")))
            .collect();
        let mut want: Vec<String> = Vec::new();
        for p in &points {
            let beaten = points.iter().any(|q| {
                let ox = |v: f64| if mx { v } else { -v };
                let oy = |v: f64| if my { v } else { -v };
                ox(q.x) >= ox(p.x) && oy(q.y) >= oy(p.y) && (ox(q.x) > ox(p.x) || oy(q.y) > oy(p.y))
            });
            if !beaten {
                want.push(p.label.clone());
            }
        }
        let mut got = pareto_front(&points, mx, my);
        got.sort();
        want.sort();
        prop_assert_eq!(got, want);
        for a in &points {
            prop_assert!(!dominates(a, a, mx, my));
        }
    }
}

/// Unit vectors with the given pairwise cosines, via a Cholesky factor of
/// the Gram matrix.
fn vectors_with_cosines(c12: f64, c13: f64, c23: f64) -> Vec<Vec<f64>> {
    let l11 = 1.0;
    let l21 = c12;
    let l22 = (1.0 - l21 * l21).sqrt();
    let l31 = c13;
    let l32 = (c23 - l31 * l21) / l22;
    let l33 = (1.0 - l31 * l31 - l32 * l32).sqrt();
    vec![vec![l11, 0.0, 0.0], vec![l21, l22, 0.0], vec![l31, l32, l33]]
}

#[tokio::test]
async fn three_hint_redundancy_from_scripted_cosines() {
    let vs = vectors_with_cosines(0.5, 0.2, 0.4);
    let by_text = move |t: &str| match t {
        "one" => vs[0].clone(),
        "two" => vs[1].clone(),
        _ => vs[2].clone(),
    };
    let client = ModelClient::with_transport(
        EndpointTable::all_mock(),
        Arc::new(StubTransport::new().with_embed(by_text)),
    )
    .retry(RetryPolicy::none());
    let chain = HintChain::from_texts("q", HintStrategy::Static, &["one", "two", "three"]);
    let r = redundancy(&client, &chain).await.unwrap();
    // max per hint: 0.5, 0.5, 0.4
    assert!((r - (0.5 + 0.5 + 0.4) / 3.0).abs() < 1e-9);
    assert!((r - 0.4667).abs() < 1e-4);
}

#[tokio::test]
async fn identical_hints_are_fully_redundant_through_the_client() {
    let client = ModelClient::with_transport(
        EndpointTable::all_mock(),
        Arc::new(StubTransport::char_count_embedder(16)),
    );
    let chain = HintChain::from_texts("q", HintStrategy::Static, &["same", "same"]);
    assert!((redundancy(&client, &chain).await.unwrap() - 1.0).abs() < 1e-12);
    let single = HintChain::from_texts("q", HintStrategy::Static, &["only"]);
    assert_eq!(redundancy(&client, &single).await.unwrap(), 0.0);
}
