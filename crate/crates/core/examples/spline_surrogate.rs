//! Spline surrogate q_bar and the resolvent eigenvector approximation.
use sleig::approx::{approximate_eigenvector, shift_nonnegative, SplinePotential};
use sleig::potential::{Evaluate, Potential};
use sleig::tridiag::{discretize, smallest_eigenvalue};

fn main() -> sleig::Result<()> {
    let q = Potential::parse("bump:4:1011:0.4")?;
    for m in [8usize, 16, 32, 64] {
        let qbar = shift_nonnegative(SplinePotential::sample(&q, m)?);
        let err = (0..=4096)
            .map(|i| i as f64 / 4096.0)
            .map(|x| (q.value(x) - qbar.value(x)).abs())
            .fold(0.0, f64::max);
        println!(
            "m = {m:>3}: |q - q_bar| = {err:.3e}, shift = {:.1e}",
            qbar.shift()
        );
    }
    let t = discretize(&Potential::constant(0.0), 32);
    let lam = smallest_eigenvalue(&t, 32f64.powf(-2.5));
    let z = approximate_eigenvector(&t, lam.value)?;
    let exact = |x: f64| std::f64::consts::SQRT_2 * (std::f64::consts::PI * x).sin();
    let dev = (0..=100)
        .map(|i| i as f64 / 100.0)
        .map(|x| (z.function.value(x) - exact(x)).abs())
        .fold(0.0, f64::max);
    println!(
        "eigenvector from column {}: max deviation from sqrt(2) sin(pi x) = {dev:.2e}",
        z.column
    );
    Ok(())
}
