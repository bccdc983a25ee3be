use hintlab_core::analysis::{chi_squared_2x2, mann_whitney_with, pearson, PMethod};
use proptest::prelude::*;

/// U for `a` by counting pairs: 1 when a < b, ½ on ties.
fn pairwise_u(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| (x, y)))
        .map(|(x, y)| if x > y { 1.0 } else if x == y { 0.5 } else { 0.0 })
        .sum()
}

/// Exact two-sided p by relabelling every subset of the pooled values as
/// group a.
fn enumerated_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let (na, nb) = (a.len(), b.len());
    let centre = na as f64 * nb as f64 / 2.0;
    let observed = (pairwise_u(a, b) - centre).abs();
    let (mut extreme, mut total) = (0usize, 0usize);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != na {
            continue;
        }
        let (ga, gb): (Vec<f64>, Vec<f64>) = {
            let mut ga = Vec::new();
            let mut gb = Vec::new();
            for (i, v) in pooled.iter().enumerate() {
                if mask & (1 << i) != 0 { ga.push(*v) } else { gb.push(*v) }
            }
            (ga, gb)
        };
        total += 1;
        if (pairwise_u(&ga, &gb) - centre).abs() >= observed - 1e-9 {
            extreme += 1;
        }
    }
    extreme as f64 / total as f64
}

fn likert(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((1u8..=5).prop_map(f64::from), 1..=max_len)
}

proptest! {
    #[test]
    fn mann_whitney_u_and_exact_p_match_enumeration(a in likert(6), b in likert(6)) {
        let r = mann_whitney_with(&a, &b, PMethod::Exact).unwrap();
        // The library reports U for `a` as the rank-sum statistic, which
        // counts pairs where a is larger.
        prop_assert!((r.u - pairwise_u(&a, &b)).abs() < 1e-9);
        prop_assert!((r.p_two_sided - enumerated_p(&a, &b)).abs() < 1e-9);
        prop_assert!((-1.0..=1.0).contains(&r.rank_biserial));
    }

    #[test]
    fn u_values_sum_to_the_pair_count(
        a in prop::collection::hash_set(0i32..1000, 1..15),
        b in prop::collection::hash_set(1000i32..2000, 1..15),
    ) {
        let a: Vec<f64> = a.into_iter().map(f64::from).collect();
        let b: Vec<f64> = b.into_iter().map(f64::from).collect();
        let ab = mann_whitney_with(&a, &b, PMethod::Normal).unwrap();
        let ba = mann_whitney_with(&b, &a, PMethod::Normal).unwrap();
        prop_assert!((ab.u + ba.u - (a.len() * b.len()) as f64).abs() < 1e-9);
    }

    #[test]
    fn mann_whitney_ignores_monotone_transforms(a in likert(10), b in likert(10), k in 0.1f64..5.0) {
        let f = |v: &f64| (k * v).exp() + 3.0;
        let ta: Vec<f64> = a.iter().map(f).collect();
        let tb: Vec<f64> = b.iter().map(f).collect();
        for method in [PMethod::Exact, PMethod::Normal] {
            let x = mann_whitney_with(&a, &b, method).unwrap();
            let y = mann_whitney_with(&ta, &tb, method).unwrap();
            prop_assert!((x.u - y.u).abs() < 1e-9);
            prop_assert!((x.p_two_sided - y.p_two_sided).abs() < 1e-9);
        }
    }

    #[test]
    fn normal_and_exact_p_agree_once_groups_grow(
        a in prop::collection::hash_set(0u32..10_000, 10..=15),
        b in prop::collection::hash_set(0u32..10_000, 10..=15),
    ) {
        // Untied data; without a continuity correction the gap is about half
        // a step of U on the normal scale, well under 0.05 at these sizes.
        let a: Vec<f64> = a.into_iter().map(f64::from).collect();
        let b: Vec<f64> = b.into_iter().map(f64::from).collect();
        let exact = mann_whitney_with(&a, &b, PMethod::Exact).unwrap().p_two_sided;
        let normal = mann_whitney_with(&a, &b, PMethod::Normal).unwrap().p_two_sided;
        prop_assert!((exact - normal).abs() <= 0.05, "exact {exact} normal {normal}");
    }

    #[test]
    fn pearson_survives_positive_affine_maps(
        xy in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 3..30),
        s in 0.1f64..10.0, t in -100.0f64..100.0,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        if let Ok(r) = pearson(&x, &y) {
            let x2: Vec<f64> = x.iter().map(|v| s * v + t).collect();
            prop_assert!((pearson(&x2, &y).unwrap() - r).abs() < 1e-9);
            prop_assert!((-1.0..=1.0).contains(&r));
        }
    }

    #[test]
    fn proportional_rows_have_no_association(a in 1u64..50, b in 1u64..50, k in 1u64..6) {
        let t = chi_squared_2x2([[a, b], [a * k, b * k]], false).unwrap();
        prop_assert!(t.chi2.abs() < 1e-9);
    }

    #[test]
    fn cramers_v_is_bounded(t in prop::array::uniform4(0u64..60)) {
        if let Ok(r) = chi_squared_2x2([[t[0], t[1]], [t[2], t[3]]], false) {
            prop_assert!((0.0..=1.0).contains(&r.cramers_v));
            prop_assert!((0.0..=1.0).contains(&r.p));
        }
    }
}

#[test]
fn yates_correction_shrinks_the_statistic() {
    let plain = chi_squared_2x2([[12, 8], [6, 14]], false).unwrap();
    let yates = chi_squared_2x2([[12, 8], [6, 14]], true).unwrap();
    assert!((plain.chi2 - 40.0 / 11.0).abs() < 1e-9);
    // (|O−E| − ½)² = 6.25 over E = 9, 11, 9, 11
    assert!((yates.chi2 - (6.25 / 9.0 * 2.0 + 6.25 / 11.0 * 2.0)).abs() < 1e-9);
}
