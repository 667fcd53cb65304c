//! Phase-estimation kernel, exact distributions and the statevector check.
use num_complex::Complex64;
use sleig::jpstate::{coarse_state, replicate_state};
use sleig::potential::Potential;
use sleig::qkernel::{
    fractional_distance, kernel_g, pe_distribution, pe_statevector, PhaseSpectrum, DEFAULT_GAMMA,
};
use sleig::tridiag::{discretize, dot, eigendecompose};

fn main() -> sleig::Result<()> {
    println!(
        "|g(0.25, l)|^2 for m = 1: {:?}",
        (0..2)
            .map(|l| kernel_g(0.25, l, 1).norm_sqr())
            .collect::<Vec<_>>()
    );
    println!("Delta(0.9, 0.05) = {:.2}", fractional_distance(0.9, 0.05));

    let two = PhaseSpectrum::new(
        vec![0.25, 0.625],
        vec![Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)],
    )?;
    let d = pe_distribution(&two, 3)?;
    println!("two representable phases, m = 3: {:?}", d.probs());

    let q = Potential::constant(0.5);
    let t = discretize(&q, 8);
    let init = replicate_state(&coarse_state(&q, 4)?, 1).vector;
    let sd = eigendecompose(&t)?;
    let overlaps: Vec<f64> = sd.vectors.iter().map(|v| dot(v, &init)).collect();
    let spec = PhaseSpectrum::from_eigenvalues(&sd.values, &overlaps, DEFAULT_GAMMA)?;
    for m in 1..=5 {
        let (state, brute) = pe_statevector(&t, &init, m, DEFAULT_GAMMA)?;
        let exact = pe_distribution(&spec, m)?;
        println!(
            "m = {m}: {} qubits, |state| - 1 = {:+.1e}, TV(statevector, analytic) = {:.1e}",
            state.nu,
            state.norm() - 1.0,
            brute.total_variation(&exact)
        );
    }
    Ok(())
}
