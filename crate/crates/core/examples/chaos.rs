//! Sparse Taylor expansion of a two-dimensional heat-smoothed butterfly.
use levynet::experiments::{chaos_experiment, chaos_fixture_model, ChaosConfig};

fn main() -> levynet::Result<()> {
    let cc = ChaosConfig { n_max: 32, grid_per_dim: 21, ..Default::default() };
    let run = chaos_experiment(&chaos_fixture_model(), &cc)?;
    println!("tau = {} (tau0 = {}), certificate finite: {}", run.tau, run.tau0, run.certificate.finite);
    for e in run.expansion.entries.iter().take(6) {
        println!("nu={:?} t={:+.3e} bound={:.3e}", e.nu, e.t, e.bound);
    }
    for r in run.study.rows.iter().step_by(8) {
        println!("n={:2} sup error={:.2e} tail bound={:.2e}", r.n, r.sup_error, r.tail_bound);
    }
    if let Some(relu) = run.relu {
        println!("ReLU emulation of {} terms: M={} L={} error={:.2e}", relu.n, relu.m, relu.l, relu.grid_error);
    }
    Ok(())
}
