//! Barron norm of a Gaussian, its evolution, and greedy two-layer fits.
use levynet::barron::{barron_norm, evolved_norm, fit_two_layer, two_layer_bound, BarronFunction, FitConfig, FitMethod};
use levynet::levy::LevyModel1D;

fn main() -> levynet::Result<()> {
    let f = BarronFunction::gaussian(1, 1.0)?;
    let norm = barron_norm(&f)?;
    let model = LevyModel1D::black_scholes(0.2, 0.0)?.to_d()?;
    println!("norm {norm:.6}, evolved to tau=1: {:.6}", evolved_norm(&f, &model, 1.0)?);
    let target = |x: &[f64]| (-0.5 * x[0] * x[0]).exp();
    let cfg = FitConfig { train_points: 2048, eval_points: 20_000, ..Default::default() };
    for fit in fit_two_layer(1, &target, &[16, 64, 256], FitMethod::Greedy, &cfg, 0)? {
        println!("m={:4} L2 error={:.2e} bound={:.3}", fit.m, fit.l2pi_error, two_layer_bound(cfg.radius, fit.m, norm));
    }
    Ok(())
}
