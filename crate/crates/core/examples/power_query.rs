//! Power-query phase estimation: plan, exact success probability, samples.
use std::f64::consts::PI;

use sleig::potential::Potential;
use sleig::qsolvers::{default_calibration, run_power_query, PowerQueryPlan};

fn main() -> sleig::Result<()> {
    let q = Potential::constant(0.5);
    let cal = default_calibration()?;
    let plan = PowerQueryPlan::new(2f64.powi(-10), cal.n0)?;
    println!("plan: {plan:?}");
    for reps in [1, 3, 5] {
        let run = run_power_query(&q, &plan, 42, reps)?;
        let a = &run.analysis;
        println!(
            "reps {reps}: estimate {:.6} (exact {:.6}), P(success) single {:.4}, median {:.4}, power queries {}, qubits {}",
            run.result.estimate,
            PI * PI + 0.5,
            a.success_probability(),
            a.median_success_probability(reps),
            run.result.resources.power_queries,
            run.result.resources.qubits
        );
    }
    Ok(())
}
