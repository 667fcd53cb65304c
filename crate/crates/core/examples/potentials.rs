//! Parse potential specs and check membership in the class Q.
use sleig::potential::{catalog, Potential};

fn main() -> sleig::Result<()> {
    let mut all = catalog();
    all.push(Potential::parse("poly:0,0,2")?); // q'' = 4: outside Q
    println!(
        "{:<24} {:>8} {:>8} {:>8}  in Q",
        "potential", "|q|", "|q'|", "|q''|"
    );
    for q in &all {
        let r = q.verify_class_q(4096)?;
        println!(
            "{:<24} {:>8.4} {:>8.4} {:>8.4}  {}",
            q.label(),
            r.max_abs_value,
            r.max_abs_first,
            r.max_abs_second,
            r.pass
        );
    }
    let custom = Potential::custom("sin", |x| 0.5 + 0.02 * (6.0 * x).sin());
    println!(
        "custom via finite differences: {:?}",
        custom.verify_class_q(1024)?.pass
    );
    Ok(())
}
