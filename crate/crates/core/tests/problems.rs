use proptest::prelude::*;
use stochastic_accel::problems::libsvm::{parse_libsvm_str, to_libsvm_string};
use stochastic_accel::problems::{
    random_least_squares, synthetic_logistic_dataset, Dataset, LeastSquares, Logistic, Sample,
};
use stochastic_accel::{DenseVec, Problem};

fn problem(kind: u8, seed: u64) -> Box<dyn Problem> {
    match kind % 3 {
        0 => Box::new(random_least_squares(12, 6, seed).unwrap()),
        1 => Box::new(Logistic::new(synthetic_logistic_dataset(30, 5, seed), 0.5, 4).unwrap()),
        _ => {
            let mut d = synthetic_logistic_dataset(25, 4, seed);
            d.normalize_rows();
            Box::new(Logistic::new(d, 0.0, 25).unwrap())
        }
    }
}

fn point(dim: usize) -> impl Strategy<Value = DenseVec> {
    prop::collection::vec(-2.0f64..2.0, dim).prop_map(DenseVec::new)
}

fn case() -> impl Strategy<Value = (u8, u64, DenseVec, DenseVec)> {
    (0u8..3, 0u64..1000).prop_flat_map(|(kind, seed)| {
        let dim = problem(kind, seed).dim();
        (Just(kind), Just(seed), point(dim), point(dim))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn gradient_matches_central_differences((kind, seed, x, _y) in case()) {
        let p = problem(kind, seed);
        let g = p.gradient(&x).unwrap();
        let h = 1e-6;
        for i in 0..p.dim() {
            let mut plus = x.clone();
            plus.as_mut_slice()[i] += h;
            let mut minus = x.clone();
            minus.as_mut_slice()[i] -= h;
            let fd = (p.value(&plus).unwrap() - p.value(&minus).unwrap()) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() <= 1e-5 * g[i].abs().max(1.0), "i={i} fd={fd} g={}", g[i]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn convex_smooth_and_strongly_convex((kind, seed, x, y) in case()) {
        let p = problem(kind, seed);
        let (fx, fy) = (p.value(&x).unwrap(), p.value(&y).unwrap());
        let mid = DenseVec::combine(0.5, &x, 0.5, &y).unwrap();
        prop_assert!(p.value(&mid).unwrap() <= 0.5 * fx + 0.5 * fy + 1e-12 * (1.0 + fx.abs() + fy.abs()));
        let g = p.gradient(&x).unwrap();
        let d = y.sub(&x).unwrap();
        let linear = fx + g.dot(&d).unwrap();
        let dist = d.norm2_sq();
        let slack = 1e-10 * (1.0 + fy.abs());
        prop_assert!(fy <= linear + 0.5 * p.smoothness() * dist + slack);
        prop_assert!(fy >= linear + 0.5 * p.strong_convexity() * dist - slack);
    }

    #[test]
    fn gradient_is_sum_of_components((kind, seed, x, _y) in case()) {
        let p = problem(kind, seed);
        let mut sum = DenseVec::zeros(p.dim());
        for l in 0..p.num_components() {
            sum.add_scaled(1.0, &p.component_gradient(l, &x).unwrap()).unwrap();
        }
        let g = p.gradient(&x).unwrap();
        prop_assert!(sum.max_abs_diff(&g).unwrap() <= 1e-10 * g.norm2().max(1.0));
    }

    #[test]
    fn libsvm_roundtrip_is_identity(seed in 0u64..10_000, n in 1usize..40, dim in 1usize..30) {
        let mut data = synthetic_logistic_dataset(n, dim, seed);
        // exercise non-binary values too
        if seed % 2 == 0 {
            data.normalize_rows();
        }
        let once = parse_libsvm_str(&to_libsvm_string(&data)).unwrap();
        let twice = parse_libsvm_str(&to_libsvm_string(&once)).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(once.len(), n);
        for (a, b) in once.samples().iter().zip(data.samples()) {
            prop_assert_eq!(a.label, b.label);
            prop_assert_eq!(a.features.as_slice(), &b.features.as_slice()[..a.features.dim()]);
        }
    }
}

#[test]
fn least_squares_examples() {
    let id = LeastSquares::new(
        vec![DenseVec::basis(2, 0), DenseVec::basis(2, 1)],
        DenseVec::zeros(2),
    )
    .unwrap();
    let x = DenseVec::new(vec![0.3, -1.2]);
    assert_eq!(id.gradient(&x).unwrap(), x);
    assert!((id.smoothness() - 1.0).abs() < 1e-12 && (id.strong_convexity() - 1.0).abs() < 1e-12);

    let diag = LeastSquares::new(
        vec![DenseVec::new(vec![1.0, 0.0]), DenseVec::new(vec![0.0, 3.0])],
        DenseVec::zeros(2),
    )
    .unwrap();
    assert!((diag.smoothness() - 9.0).abs() < 1e-9);
    assert!((diag.strong_convexity() - 1.0).abs() < 1e-9);
    assert!(LeastSquares::new(vec![DenseVec::zeros(2)], DenseVec::zeros(3)).is_err());
}

#[test]
fn least_squares_constants_match_brute_force_eigenvalues() {
    // 2x2 normal matrix: eigenvalues in closed form.
    let p = random_least_squares(7, 2, 11).unwrap();
    let (mut a11, mut a12, mut a22) = (0.0, 0.0, 0.0);
    for r in p.rows() {
        a11 += r[0] * r[0];
        a12 += r[0] * r[1];
        a22 += r[1] * r[1];
    }
    let tr = a11 + a22;
    let det = a11 * a22 - a12 * a12;
    let disc = (tr * tr / 4.0 - det).sqrt();
    assert!((p.smoothness() - (tr / 2.0 + disc)).abs() < 1e-8 * p.smoothness());
    assert!((p.strong_convexity() - (tr / 2.0 - disc)).abs() < 1e-6 * (tr / 2.0 - disc));
}

#[test]
fn logistic_examples() {
    let one = Dataset::new(
        vec![Sample {
            features: DenseVec::new(vec![1.0]),
            label: 1.0,
        }],
        1,
    );
    let p = Logistic::new(one, 0.0, 1).unwrap();
    let x = DenseVec::zeros(1);
    assert!((p.value(&x).unwrap() - 2f64.ln()).abs() < 1e-15);
    assert_eq!(p.gradient(&x).unwrap()[0], -0.5);

    let empty_features = Dataset::new(
        vec![Sample {
            features: DenseVec::zeros(3),
            label: -1.0,
        }],
        3,
    );
    let p = Logistic::new(empty_features, 1.0, 1).unwrap();
    let x = DenseVec::new(vec![0.5, -2.0, 1.0]);
    assert_eq!(p.gradient(&x).unwrap(), x);
    assert_eq!(p.strong_convexity(), 1.0);

    let d = synthetic_logistic_dataset(5, 2, 0);
    assert!(Logistic::new(d.clone(), 1.0, 6).is_err());
    assert!(Logistic::new(d, -1.0, 1).is_err());
    assert!(Logistic::new(Dataset::new(vec![], 2), 1.0, 1).is_err());
}

#[test]
fn bundled_dataset_with_ten_clients() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic1000.svm");
    let data = stochastic_accel::problems::libsvm::read_libsvm_file(path).unwrap();
    assert_eq!(data, synthetic_logistic_dataset(1000, 50, 2024));
    let p = Logistic::new(data, 1.0, 10).unwrap();
    let x = DenseVec::new((0..50).map(|i| (i as f64 * 0.37).sin()).collect());
    let mut sum = DenseVec::zeros(50);
    for l in 0..10 {
        assert_eq!(p.shard(l).len(), 100);
        sum.add_scaled(1.0, &p.component_gradient(l, &x).unwrap())
            .unwrap();
    }
    let g = p.gradient(&x).unwrap();
    assert!(sum.max_abs_diff(&g).unwrap() <= 1e-10 * g.norm2());
}
