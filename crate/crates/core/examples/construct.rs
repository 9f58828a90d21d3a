//! Averaging network for a Black–Scholes call on [0.5, 1.5].
use levynet::construct::{construct, ConstructionConfig};
use levynet::levy::LevyModel1D;
use levynet::relu::PayoffSpec;

fn main() -> levynet::Result<()> {
    let model = LevyModel1D::black_scholes(0.2, 0.0)?.with_martingale_drift()?.to_d()?;
    let cfg = ConstructionConfig { epsilon: 0.01, n_override: Some(2048), ..Default::default() };
    let (net, rep) = construct(&model, &PayoffSpec::Call { k: 1.0 }, &cfg)?;
    println!("n = {}, M = {}, L = {}", rep.n, rep.metrics.m, rep.metrics.l);
    println!("measured sup error {:.4} (target {})", rep.error.sup_error, cfg.epsilon);
    println!("proof sample count for this target: {:.3e}", rep.constants.n);
    println!("network at s = 1: {:.6}", net.eval1(&[1.0]));
    Ok(())
}
