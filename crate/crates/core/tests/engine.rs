use graph_poincare::calculus::{poincare_ratio, Exponent, VertexFunction};
use graph_poincare::engine::{certify_constant_p2, estimate_constant, EstimateOptions};
use graph_poincare::graph::{ball, classify_region, generate, Family, Graph, Region};
use graph_poincare::measure::Measure;
use graph_poincare::Error;
use proptest::prelude::*;

const EXPONENTS: [Exponent; 4] = [Exponent::Finite(1.0), Exponent::Finite(1.5), Exponent::Finite(2.0), Exponent::Infinity];

fn small() -> impl Strategy<Value = (Graph, Region, Measure)> {
    (3u32..=8, 2u32..=3, 0u32..3, any::<u64>(), any::<u32>(), 0u32..=2, prop::collection::vec(0.5f64..4.0, 8))
        .prop_map(|(n, b, extra, seed, c, r, w)| {
            let g = generate(&Family::RandomBoundedDegree { n, b, extra }, seed).unwrap();
            let e = ball(&g, c % g.len() as u32, r).unwrap();
            let m = Measure::from_weights((0..g.len()).map(|i| w[i % w.len()]).collect()).unwrap();
            (g, e, m)
        })
}

fn opts(seed: u64, restarts: usize) -> EstimateOptions {
    EstimateOptions { seed, restarts, iters: 120 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn witness_attains_the_lower_bound((g, e, m) in small(), seed in any::<u64>(), pi in 0usize..4) {
        let p = EXPONENTS[pi];
        let est = estimate_constant(&g, &e, &m, p, opts(seed, 6)).unwrap();
        let r = poincare_ratio(&g, &est.witness, &e, &m, p).unwrap();
        prop_assert!((r - est.lower).abs() <= 1e-12 * est.lower.max(1.0), "{} vs {}", r, est.lower);
    }

    #[test]
    fn more_restarts_never_lower((g, e, m) in small(), seed in any::<u64>(), pi in 0usize..4) {
        let p = EXPONENTS[pi];
        let few = estimate_constant(&g, &e, &m, p, opts(seed, 3)).unwrap();
        let many = estimate_constant(&g, &e, &m, p, opts(seed, 9)).unwrap();
        prop_assert!(many.lower >= few.lower);
    }

    #[test]
    fn certified_bracket_dominates_samples(
        (g, e, m) in small(),
        seed in any::<u64>(),
        samples in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 16), 64),
    ) {
        let est = match certify_constant_p2(&g, &e, &m, opts(seed, 6)) {
            Ok(est) => est,
            Err(Error::Size { .. }) => return Ok(()),
            Err(err) => panic!("{err}"),
        };
        let upper = est.upper.unwrap();
        prop_assert!(est.lower <= upper);
        prop_assert!(upper - est.lower <= 1e-6 * upper);
        for s in &samples {
            let f = VertexFunction::from_fn(g.vertices(), |v| s[v as usize % s.len()]);
            let r = poincare_ratio(&g, &f, &e, &m, Exponent::Finite(2.0)).unwrap();
            prop_assert!(r <= upper * (1.0 + 1e-9), "{} > {}", r, upper);
        }
    }

    #[test]
    fn scaling_the_measure_by_a_power_of_two((g, e, m) in small(), seed in any::<u64>(), k in -4i32..=4, pi in 0usize..4) {
        let p = EXPONENTS[pi];
        let scaled = m.scaled(2f64.powi(k)).unwrap();
        let a = estimate_constant(&g, &e, &m, p, opts(seed, 4)).unwrap();
        let b = estimate_constant(&g, &e, &scaled, p, opts(seed, 4)).unwrap();
        prop_assert_eq!(&a.witness, &b.witness);
        prop_assert!((a.lower - b.lower).abs() <= 1e-12 * a.lower.max(1.0));
    }
}

#[test]
fn single_edge_is_one_half_for_every_exponent() {
    let g = generate(&Family::Path { n: 2 }, 0).unwrap();
    let e = classify_region(&g, [0, 1]).unwrap();
    for p in EXPONENTS.into_iter().chain([Exponent::Finite(3.0)]) {
        let est = estimate_constant(&g, &e, &Measure::counting(), p, EstimateOptions::default()).unwrap();
        assert_eq!(est.lower, 0.5, "p = {p}");
    }
}

#[test]
fn path_of_three_closed_form() {
    // Centre vertex with two leaves, counting measure, p = 2. The extremal
    // function is f = (1, 0, -1): ‖f − f_E‖² = 2 and ‖∇f‖² = 1 + 4 + 1.
    let g = generate(&Family::Path { n: 3 }, 0).unwrap();
    let e = classify_region(&g, [0, 1, 2]).unwrap();
    let est = certify_constant_p2(&g, &e, &Measure::counting(), EstimateOptions::default()).unwrap();
    let expected = (2.0f64 / 6.0).sqrt();
    assert!((est.lower - expected).abs() < 1e-12, "{}", est.lower);
    assert!((est.upper.unwrap() - expected).abs() < 1e-9);
}
