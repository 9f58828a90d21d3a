use levynet::construct::{self, ConstructionConfig};
use levynet::experiments::{
    calib_experiment, calib_mse, chaos_experiment, chaos_fixture_model, dimension_sweep, separable_check, CalibConfig, ChaosConfig,
    ExperimentConfig, ModelConfig, SweepConfig,
};
use levynet::oracle::bs_call;
use levynet::relu::{PayoffSpec, ReluNetwork};

#[test]
fn sweep_d1_reproduces_rate_study() {
    let cc = ConstructionConfig { seed: 4, ..Default::default() };
    let sc = SweepConfig { d_list: vec![1], trials: 4, n_max: 1 << 12, separable_d: 0, ..Default::default() };
    let base = ModelConfig::black_scholes(0.2);
    let sweep = dimension_sweep(&base, cc.a, cc.b, cc.maturity, &sc, &cc).unwrap();
    let row = &sweep.rows[0];
    assert!(row.met && row.error <= sc.target / sc.headroom);
    let model = base.to_d().unwrap();
    let spec = PayoffSpec::BasketCall { weights: vec![1.0], k: 1.0 };
    let study = construct::rate_study(&model, &spec, &cc, &[row.n, 2 * row.n], 4).unwrap();
    assert_eq!(study.rows[0].mean_error, row.error);
    assert_eq!(study.rows[0].std_error, row.std_error);
    assert_eq!(study.rows[0].m, row.m);
    assert!(sweep.polynomial_fit.is_none());
}

#[test]
fn separable_prices_add_up() {
    let cc = ConstructionConfig { oracle_samples: 1 << 15, ..Default::default() };
    let base = ModelConfig::black_scholes(0.25);
    let chk = separable_check(&base, 0.7, 1.3, 0.5, 3, 5, &cc).unwrap();
    assert_eq!(chk.points.len(), 5);
    for (s, _, composed, _) in &chk.points {
        let m = base.to_1d().unwrap();
        let want: f64 = s.iter().map(|x| bs_call(*x, 1.0, 0.25, m.gamma, 0.5) / 3.0).sum();
        assert!((composed - want).abs() < 1e-9);
    }
    assert!(chk.within_three_se, "{}", chk.max_deviation_in_se);
}

#[test]
fn calib_single_at_the_money_strike() {
    let cal = CalibConfig { strikes: 1, k_min: 1.0, k_max: 1.0, ..Default::default() };
    let base = ConstructionConfig::default();
    let (net, r) = calib_experiment(&ModelConfig::black_scholes(0.2), &cal, 1.0, &base).unwrap();
    let m = ModelConfig::black_scholes(0.2).to_1d().unwrap();
    let mse = calib_mse(&net, 1.0, &[1.0], &[bs_call(1.0, 1.0, 0.2, m.gamma, 1.0)]);
    assert!(mse <= 1e-3 && (mse - r.mse).abs() < 1e-15);
    assert!(r.a < 1.0 && r.b > 1.0);
    assert_eq!(r.delta, 1e-3f64.sqrt());
}

#[test]
fn calib_self_fit_with_generator_network() {
    let gen = ReluNetwork::affine(&[vec![0.7]], vec![-0.2]).unwrap();
    // power-of-two strikes keep C_i / K_i exact
    let strikes = [0.25, 0.5, 1.0, 2.0, 4.0];
    let prices: Vec<f64> = strikes.iter().map(|k| k * gen.eval1(&[1.0 / k])).collect();
    assert_eq!(calib_mse(&gen, 1.0, &strikes, &prices), 0.0);
}

#[test]
fn calib_rejects_bad_strikes() {
    let cal = CalibConfig { k_min: -1.0, ..Default::default() };
    assert!(calib_experiment(&ModelConfig::black_scholes(0.2), &cal, 1.0, &ConstructionConfig::default()).is_err());
}

#[test]
fn chaos_relu_emulation_within_allowance() {
    let cc = ChaosConfig { n_max: 16, grid_per_dim: 21, relu_n: 10, ..Default::default() };
    let run = chaos_experiment(&chaos_fixture_model(), &cc).unwrap();
    let relu = run.relu.unwrap();
    assert_eq!(relu.n, 10);
    assert!(relu.grid_error <= relu.allowed, "{} > {}", relu.grid_error, relu.allowed);
    assert!(run.certificate.finite);
    assert!(run.certificate.computed_sum.unwrap() <= run.certificate.lq_norm_bound.unwrap());
}

#[test]
fn config_defaults_leave_tables_empty() {
    let c = ExperimentConfig::from_toml_str("").unwrap();
    assert_eq!(c, ExperimentConfig::default());
    let c = ExperimentConfig::from_toml_str("[sweep]\ndList = [1, 3]\n").unwrap();
    let s = c.sweep.unwrap();
    assert_eq!(s.d_list, vec![1, 3]);
    assert_eq!(s.target, SweepConfig::default().target);
}
