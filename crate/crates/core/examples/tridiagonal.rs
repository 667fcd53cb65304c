//! Sturm counts, bisection and the closed-form spectrum of M_c.
use std::f64::consts::PI;

use sleig::potential::Potential;
use sleig::tridiag::{discretize, eigendecompose, smallest_eigenvalue, sturm_count};

fn main() -> sleig::Result<()> {
    for n in [7usize, 63, 1023, 16383] {
        let t = discretize(&Potential::constant(0.5), n);
        let np1 = (n + 1) as f64;
        let exact = 0.5 + 4.0 * np1 * np1 * (PI / (2.0 * np1)).sin().powi(2);
        let est = smallest_eigenvalue(&t, 1e-12);
        println!(
            "n = {n:>5}: lambda_1 = {:.12} (closed form {:.12}), {} bisection steps",
            est.value, exact, est.iterations
        );
    }
    let t = discretize(&Potential::constant(0.0), 3);
    println!(
        "eigenvalues of M_0 (n=3) below 32: {}",
        sturm_count(&t, 32.0)
    );
    let sd = eigendecompose(&discretize(&Potential::parse("poly:0,1")?, 8))?;
    println!("spectrum of M_q, q(x) = x, n = 8: {:.3?}", sd.values);
    Ok(())
}
