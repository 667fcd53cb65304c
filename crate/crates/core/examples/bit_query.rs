//! Bit-query hybrid and the quantum summation it relies on.
use sleig::classical::{reference_eigenvalue, Constants};
use sleig::potential::Potential;
use sleig::qsolvers::{quantum_sum, quantum_sum_amplitude_estimation, run_bit_query};
use sleig::rng::Stream;

fn main() -> sleig::Result<()> {
    let mut rng = Stream::new(3);
    let bits: Vec<f64> = (0..256)
        .map(|_| if rng.bernoulli(0.3) { 1.0 } else { 0.0 })
        .collect();
    let mean = bits.iter().sum::<f64>() / 256.0;
    let qs = quantum_sum(&bits, 1.0, 0.05, &mut rng);
    let ae = quantum_sum_amplitude_estimation(&bits, 1.0, 0.05, &mut rng)?;
    println!(
        "mean {mean:.4}: sum path {:?} -> {:.4}; forced AE with t = {} -> {:.4}",
        qs.path, qs.value, ae.t, ae.value
    );

    let c = Constants::default();
    let q = Potential::parse("bump:4:1011:0.1")?;
    let lref = reference_eigenvalue(&q).lambda_ref;
    for k in 4..=9 {
        let eps = 2f64.powi(-k);
        let run = run_bit_query(&q, eps, 0, &c)?;
        println!(
            "eps 2^-{k}: error {:.2e}, bit queries {:>4}, function values {:>4}, qubits {}, path {:?}",
            (run.result.estimate - lref).abs(),
            run.result.resources.bit_queries,
            run.result.resources.function_values,
            run.result.resources.qubits,
            run.sum.path
        );
    }
    Ok(())
}
