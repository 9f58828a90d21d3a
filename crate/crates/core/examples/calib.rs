//! Nonparametric fit of a Merton call chain.
use levynet::construct::ConstructionConfig;
use levynet::experiments::{calib_experiment, merton_fixture, CalibConfig};

fn main() -> levynet::Result<()> {
    for strikes in [20, 40] {
        let cal = CalibConfig { strikes, ..Default::default() };
        let (_, r) = calib_experiment(&merton_fixture(), &cal, 0.5, &ConstructionConfig::default())?;
        println!("N={strikes}: mse={:.2e} (epsilon {}) weights={} on [{:.3}, {:.3}]", r.mse, r.epsilon, r.weights, r.a, r.b);
    }
    Ok(())
}
