//! A full study with slope fits, rendered as CSV and JSON.
use sleig::bench::{render, run_study, Format, SolverKind, StudyConfig};

fn main() -> sleig::Result<()> {
    let cfg = StudyConfig::new(
        SolverKind::Worst,
        "constant:0.5",
        vec![1e-2, 1e-3, 1e-4],
        vec![],
    );
    let report = run_study(&cfg)?;
    print!("{}", render(&report, Format::Csv)?);
    for f in &report.fits {
        println!("slope of {} vs eps: {:+.3}", f.quantity, f.slope);
    }

    let cfg = StudyConfig::new(
        SolverKind::Bitquery,
        "poly:0.5,0.25,-0.25",
        vec![1e-2, 1e-3],
        vec![0, 1],
    );
    let json = render(&run_study(&cfg)?, Format::Json)?;
    println!("{}", &json[..json.len().min(600)]);
    Ok(())
}
