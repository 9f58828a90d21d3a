//! Fourier and closed-form call prices under Black–Scholes and Merton.
use levynet::levy::LevyModel1D;
use levynet::oracle::{bs_call, price_1d, price_fourier_1d};
use levynet::relu::PayoffSpec;

fn main() -> levynet::Result<()> {
    let spots = [0.8, 1.0, 1.2];
    let call = PayoffSpec::Call { k: 1.0 };
    let bs = LevyModel1D::black_scholes(0.2, 0.0)?.with_martingale_drift()?;
    for (s, r) in spots.iter().zip(price_fourier_1d(&bs, &call, 1.0, &spots)?) {
        println!("BS     s={s:.2} fourier={:.8} closed={:.8}", r.value, bs_call(*s, 1.0, 0.2, bs.gamma, 1.0));
    }
    let merton = LevyModel1D::merton(0.1, 0.0, 1.0, -0.1, 0.15)?.with_martingale_drift()?;
    for (s, r) in spots.iter().zip(price_1d(&merton, &call, 0.5, &spots)?) {
        println!("Merton s={s:.2} value={:.8} ({:?}, bound {:.1e})", r.value, r.kind, r.error_bound);
    }
    Ok(())
}
