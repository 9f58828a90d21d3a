//! Sup error of the averaging network against the sample count.
use levynet::construct::{rate_study, ConstructionConfig};
use levynet::levy::LevyModel1D;
use levynet::relu::PayoffSpec;

fn main() -> levynet::Result<()> {
    let model = LevyModel1D::black_scholes(0.2, 0.0)?.with_martingale_drift()?.to_d()?;
    let n_list: Vec<usize> = (6..=12).map(|k| 1 << k).collect();
    let study = rate_study(&model, &PayoffSpec::Call { k: 1.0 }, &ConstructionConfig::default(), &n_list, 8)?;
    for r in &study.rows {
        println!("n={:5} error={:.5} +- {:.5} M={}", r.n, r.mean_error, r.std_error, r.m);
    }
    println!("log-log slope {:.3}", study.fit.slope);
    Ok(())
}
