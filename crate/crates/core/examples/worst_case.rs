//! Deterministic worst-case solver across the catalog.
use sleig::classical::{reference_eigenvalue, solve_worst_case, Constants};
use sleig::potential::catalog;

fn main() -> sleig::Result<()> {
    let c = Constants::default();
    for q in catalog() {
        let r = reference_eigenvalue(&q);
        print!(
            "{:<24} ref {:.10} ({:?})",
            q.label(),
            r.lambda_ref,
            r.method
        );
        for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
            let s = solve_worst_case(&q, eps, &c)?;
            print!(
                "  {:.2}eps/{}fv",
                (s.estimate - r.lambda_ref).abs() / eps,
                s.resources.function_values
            );
        }
        println!();
    }
    Ok(())
}
