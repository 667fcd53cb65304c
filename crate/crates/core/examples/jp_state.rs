//! Jaksch-Papageorgiou states: overlap decay and n0 calibration.
use sleig::jpstate::{calibrate_n0, coarse_state, overlap, replicate_state, TARGET_PROBABILITY};
use sleig::potential::{catalog, Potential};

fn main() -> sleig::Result<()> {
    let q = Potential::constant(0.0);
    let n = 1024;
    let mut last = None;
    for n0 in [2usize, 4, 8, 16, 32, 64, 128] {
        let state = replicate_state(&coarse_state(&q, n0)?, (n / n0).trailing_zeros());
        let r = overlap(&state, &q)?;
        let ratio = last.map(|l: f64| l / r.one_minus_d_squared);
        println!(
            "n0 = {n0:>3}, n = {n}: d = {:.8}, 1 - d^2 = {:.3e}, ratio {:?}",
            r.d, r.one_minus_d_squared, ratio
        );
        last = Some(r.one_minus_d_squared);
    }
    let cal = calibrate_n0(&catalog(), TARGET_PROBABILITY)?;
    println!(
        "catalog calibration: c_hat = {:.4}, n0 = {}",
        cal.c_hat, cal.n0
    );
    Ok(())
}
