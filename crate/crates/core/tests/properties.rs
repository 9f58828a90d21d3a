use levynet::chaos;
use levynet::construct::draw_increments;
use levynet::levy::{LevyModel1D, LevyModelD, SymbolSector};
use levynet::relu::emulate::chebyshev_eval;
use levynet::relu::{diag_rows, payoff_net, polynomial_emulator, Layer, PayoffSpec, ReluNetwork};
use levynet::spectral::{chebyshev_extrema, chebyshev_interpolate};
use levynet::stats::{linspace, RateFit};
use num_complex::Complex64;
use proptest::prelude::*;

fn layer_strategy(rows: usize, cols: usize) -> impl Strategy<Value = Layer> {
    let entry = prop_oneof![1 => Just(0.0), 3 => -2.0..2.0f64];
    (prop::collection::vec(entry.clone(), rows * cols), prop::collection::vec(entry, rows))
        .prop_map(move |(a, b)| Layer::new(rows, cols, a, b).unwrap())
}

fn net_strategy(d: usize, widths: Vec<usize>) -> impl Strategy<Value = ReluNetwork> {
    let mut dims = vec![d];
    dims.extend(widths);
    let layers: Vec<_> = dims.windows(2).map(|w| layer_strategy(w[1], w[0])).collect();
    layers.prop_map(move |l| ReluNetwork::new(d, l).unwrap())
}

/// `n` networks with common input dimension, depth and output dimension.
fn family() -> impl Strategy<Value = (usize, Vec<ReluNetwork>)> {
    (1usize..4, 1usize..4, 1usize..4)
        .prop_flat_map(|(d, depth, n)| {
            let widths = prop::collection::vec(1usize..5, depth - 1);
            (Just(d), widths, Just(n))
        })
        .prop_flat_map(|(d, mut widths, n)| {
            widths.push(1);
            (Just(d), prop::collection::vec(net_strategy(d, widths), n))
        })
}

fn arb_model() -> impl Strategy<Value = LevyModel1D> {
    prop_oneof![
        (0.05..0.6f64).prop_map(|s| LevyModel1D::black_scholes(s, 0.0).unwrap()),
        (0.05..0.4f64, 0.1..3.0f64, -0.3..0.3f64, 0.05..0.4f64)
            .prop_map(|(s, l, m, j)| LevyModel1D::merton(s, 0.0, l, m, j).unwrap()),
        (0.05..0.4f64, 0.1..3.0f64, 0.1..0.9f64, 3.0..20.0f64, 2.0..20.0f64)
            .prop_map(|(s, l, p, a, b)| LevyModel1D::kou(s, 0.0, l, p, a, b).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn average_realizes_weighted_sum(
        (d, nets) in family(),
        seed in any::<u64>(),
    ) {
        let n = nets.len();
        let mut r = levynet::rng::stream(seed, 0);
        use rand::Rng;
        let w: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let g: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.gen_range(0.1..2.0)).collect()).collect();
        let dm: Vec<Vec<Vec<f64>>> = g.iter().map(|v| diag_rows(v)).collect();
        let avg = ReluNetwork::average(&nets, &w, &dm, &vec![vec![0.0; d]; n]).unwrap();
        prop_assert!(avg.size() <= nets.iter().map(|x| x.size()).sum::<usize>());
        prop_assert_eq!(avg.depth(), nets[0].depth());
        for _ in 0..10 {
            let x: Vec<f64> = (0..d).map(|_| r.gen_range(-2.0..2.0)).collect();
            let want: f64 = (0..n)
                .map(|i| {
                    let xi: Vec<f64> = x.iter().zip(&g[i]).map(|(a, b)| a * b).collect();
                    w[i] * nets[i].eval1(&xi)
                })
                .sum();
            prop_assert!((avg.eval1(&x) - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn json_roundtrip_preserves_realization((d, nets) in family()) {
        let net = &nets[0];
        let back = ReluNetwork::from_json(&net.to_json()).unwrap();
        prop_assert_eq!(back.metrics(), net.metrics());
        let x = vec![0.3; d];
        prop_assert_eq!(back.eval(&x), net.eval(&x));
    }

    #[test]
    fn symbol_identities(m in arb_model(), xi in -40.0..40.0f64, t in 0.1..2.0f64) {
        let m = m.with_martingale_drift().unwrap();
        prop_assert!(m.symbol_complex(Complex64::new(0.0, -1.0)).norm() <= 1e-12);
        prop_assert!((m.exp_moment(1.0, t).unwrap() - 1.0).abs() <= 1e-10);
        let p = m.symbol(xi);
        prop_assert!(p.re >= -1e-12);
        prop_assert!((m.symbol(-xi) - p.conj()).norm() <= 1e-12 * (1.0 + p.norm()));
    }

    #[test]
    fn payoff_networks_are_exact(k in 0.5..1.5f64, s in prop::collection::vec(0.0..3.0f64, 3)) {
        let specs = [
            PayoffSpec::Call { k },
            PayoffSpec::Put { k },
            PayoffSpec::Butterfly { k1: 0.5 * k, k, k2: 1.7 * k },
            PayoffSpec::BasketCall { weights: vec![0.2, 0.3, 0.5], k },
            PayoffSpec::CallOnMax { k },
            PayoffSpec::SeparableCalls { weights: vec![0.5, 0.25, 0.25], k },
        ];
        for spec in &specs {
            let d = match spec {
                PayoffSpec::BasketCall { .. } | PayoffSpec::CallOnMax { .. } | PayoffSpec::SeparableCalls { .. } => 3,
                _ => 1,
            };
            let (net, _) = payoff_net(spec, d).unwrap();
            let want = spec.eval(&s[..d]);
            prop_assert!((net.eval1(&s[..d]) - want).abs() <= 1e-12 * (1.0 + want.abs()), "{:?}", spec);
        }
    }

    #[test]
    fn rate_fit_r2_in_unit_interval(ys in prop::collection::vec(-5.0..5.0f64, 3..20)) {
        let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64).collect();
        let f = RateFit::fit(&xs, &ys);
        prop_assert!((0.0..=1.0).contains(&f.r2));
        prop_assert_eq!(f.residuals.len(), ys.len());
    }

    #[test]
    fn chebyshev_interpolation_reproduces_polynomials(c in prop::collection::vec(-1.0..1.0f64, 1..12)) {
        let p = c.len() - 1;
        let vals: Vec<f64> = chebyshev_extrema(p).iter().map(|x| chebyshev_eval(&c, *x)).collect();
        let got = chebyshev_interpolate(&vals);
        for (a, b) in got.iter().zip(&c) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn polynomial_emulator_meets_delta(c in prop::collection::vec(-1.0..1.0f64, 1..8), e in 2..6i32) {
        let delta = 10f64.powi(-e);
        let net = polynomial_emulator(&c, delta).unwrap();
        let worst = linspace(-1.0, 1.0, 1001).iter().map(|x| (net.eval1(&[*x]) - chebyshev_eval(&c, *x)).abs()).fold(0.0, f64::max);
        prop_assert!(worst <= delta, "{} > {}", worst, delta);
    }

    #[test]
    fn index_sets_nested_and_closed(d in 1usize..4, f in 1.2..4.0f64, n in 1usize..40) {
        let sector = SymbolSector::new(1.0, 0.5, 0.5, 0.0).unwrap();
        let tau = f * chaos::tau0(d, 1.0, 1.0, 0.5);
        let cands = chaos::candidate_set(d, tau, &sector, 10, 200).unwrap();
        prop_assert!(chaos::is_downward_closed(&cands));
        let model = LevyModelD::independent(&vec![LevyModel1D::black_scholes(1.0, 0.0).unwrap(); d]).unwrap();
        let v0 = chaos::LogPayoff::Gaussian { width: 1.0, d };
        let cands: Vec<_> = cands.into_iter().filter(|nu| nu.iter().sum::<u32>() <= 4).collect();
        let exp = chaos::taylor_coeffs(&model, &v0, tau, &sector, &cands).unwrap();
        let n = n.min(exp.entries.len());
        let a = chaos::build_index_set(&exp, n);
        prop_assert_eq!(a.len(), n);
        prop_assert!(chaos::is_downward_closed(&a));
        if n > 1 {
            let b = chaos::build_index_set(&exp, n - 1);
            prop_assert!(b.iter().all(|nu| a.contains(nu)));
        }
    }

    #[test]
    fn increments_are_prefix_stable(n in 1usize..9000, m in 1usize..9000, seed in any::<u64>()) {
        let model = LevyModel1D::merton(0.2, 0.0, 1.0, -0.1, 0.2).unwrap().to_d().unwrap();
        let s = model.sampler(0.5).unwrap();
        let (lo, hi) = (n.min(m), n.max(m));
        let a = draw_increments(&s, lo, seed);
        let b = draw_increments(&s, hi, seed);
        prop_assert_eq!(&a[..], &b[..lo]);
    }
}
