//! Chebyshev interpolation of a butterfly price and its ReLU emulation.
use levynet::experiments::spectral_fixture;
use levynet::spectral::{cheb_approx, gevrey_bound, log_payoff_l2, spectral_emulate};

fn main() -> levynet::Result<()> {
    let (mc, spec) = spectral_fixture();
    let model = mc.to_1d()?;
    let sector = mc.default_sector()?;
    let cheb = cheb_approx(&model, &spec, &sector, 0.25, 0.5, 1.5, &[4, 8, 12, 16, 20, 24])?;
    for r in &cheb.rows {
        let (_, em) = spectral_emulate(&cheb, r.p, 1e-6)?;
        println!("p={:2} cheb={:.2e} relu={:.2e} M={} L={}", r.p, r.sup_error, em.measured_error, em.m, em.l);
    }
    let v0 = log_payoff_l2(&spec)?;
    for k in [0, 2, 4, 8] {
        println!("Gevrey bound k={k}: {:.3e}", gevrey_bound(k, 0.25, &sector, v0));
    }
    Ok(())
}
