//! Run the existence / nonexistence criteria on a few initial data across
//! the critical exponent p_m = 1 + 2m/N.
//!
//!     cargo run --release --example classify_data

use polyheat::criteria::{classify, ClassifyConfig, InitialData, Summary};
use polyheat::params::ProblemParams;

fn show(mu: &InitialData, p: f64) {
    let params = ProblemParams::new(1, 2, p, 1.0).unwrap();
    let report = classify(mu, &params, &ClassifyConfig::default()).unwrap();
    let verdict = match report.summary {
        Summary::ExistsBy(id) => format!("EXISTS (by {id})"),
        Summary::NonexistenceBy(id) => format!("NONEXISTENCE (by {id})"),
        Summary::Undecided => "UNDECIDED".into(),
    };
    let t = report
        .suggested_t
        .map(|t| format!(", T <= {t:.3e}"))
        .unwrap_or_default();
    println!("  p = {p}: {verdict}{t}");
}

fn main() {
    // N = 1, m = 2, so p_m = 5
    let dirac = InitialData::Dirac { location: vec![0.0], mass: 1.0 };
    println!("Dirac mass (the sharpest admissible singularity below p_m):");
    for p in [3.0, 5.0, 6.0] {
        show(&dirac, p);
    }

    let power = InitialData::Power { c: 0.01, a: 0.5, cutoff: 1.0 };
    println!("power profile c |x|^(-1/2) (mild singularity, small amplitude):");
    for p in [3.0, 6.0] {
        show(&power, p);
    }

    // the borderline log-power profile at the critical exponent
    let log_power = InitialData::LogPower { c: 8.0, a: 1.0, b: 1.25, cutoff: 0.5 };
    println!("critical log-power profile |x|^-1 [log]^(-5/4), large amplitude:");
    show(&log_power, 5.0);
}
