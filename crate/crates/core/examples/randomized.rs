//! Randomized solver: RMSE over seeds and the Monte Carlo rate.
use sleig::approx::{approximate_eigenvector, shift_nonnegative, SplinePotential};
use sleig::classical::{monte_carlo_correction, reference_eigenvalue, solve_randomized, Constants};
use sleig::potential::Potential;
use sleig::rng::{Purpose, Stream};
use sleig::tridiag::{discretize, smallest_eigenvalue};

fn main() -> sleig::Result<()> {
    let q = Potential::parse("bump:4:1011:0.1")?;
    let lref = reference_eigenvalue(&q).lambda_ref;
    let c = Constants::default();
    for eps in [1e-2, 1e-3, 1e-4] {
        let runs: Vec<_> = (0..100)
            .map(|s| solve_randomized(&q, eps, s, &c))
            .collect::<Result<_, _>>()?;
        let rmse = (runs
            .iter()
            .map(|r| (r.estimate - lref).powi(2))
            .sum::<f64>()
            / 100.0)
            .sqrt();
        println!(
            "eps {eps:.0e}: rmse {rmse:.3e}, {} function values",
            runs[0].resources.function_values
        );
    }

    // Standard deviation of the correction alone shrinks like k^-1/2.
    let qbar = shift_nonnegative(SplinePotential::sample(&q, 6)?);
    let t = discretize(&qbar, 16);
    let z = approximate_eigenvector(&t, smallest_eigenvalue(&t, 1e-6).value)?.function;
    for k in [16usize, 64, 256, 1024] {
        let draws: Vec<f64> = (0..400)
            .map(|s| {
                monte_carlo_correction(
                    &q,
                    &qbar,
                    &z,
                    k,
                    &mut Stream::derive(s, Purpose::MonteCarlo, 0),
                )
            })
            .collect();
        let mean = draws.iter().sum::<f64>() / 400.0;
        let sd = (draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / 399.0).sqrt();
        println!("k = {k:>4}: correction mean {mean:.4e}, sd {sd:.3e}");
    }
    Ok(())
}
