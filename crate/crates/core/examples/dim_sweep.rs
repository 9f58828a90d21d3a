//! Network size at fixed error for a basket call in growing dimension.
use levynet::construct::ConstructionConfig;
use levynet::experiments::{dimension_sweep, ModelConfig, SweepConfig};

fn main() -> levynet::Result<()> {
    let cc = ConstructionConfig { epsilon: 0.02, ..Default::default() };
    let sc = SweepConfig { d_list: vec![1, 2, 4, 8], trials: 8, separable_d: 2, ..Default::default() };
    let sweep = dimension_sweep(&ModelConfig::black_scholes(0.2), cc.a, cc.b, cc.maturity, &sc, &cc)?;
    for r in &sweep.rows {
        println!("d={:2} n={:5} M={:6} error={:.4}", r.d, r.n, r.m, r.error);
    }
    if let (Some(p), Some(e)) = (&sweep.polynomial_fit, &sweep.exponential_fit) {
        println!("ln M vs ln d: slope {:.2} r2 {:.3}; ln M vs d: r2 {:.3}", p.slope, p.r2, e.r2);
    }
    Ok(())
}
