//! Mollified-atom sweep toward Dirac data: the contraction functional D_*
//! stabilizes below the critical exponent and blows up above it.
//!
//!     cargo run --release --example delta_sweep

use polyheat::majorant::MajorantSpec;
use polyheat::params::ProblemParams;
use polyheat::profile::{build_profile, KernelKind};
use polyheat::solver::{delta_sweep, PicardConfig, WeightMode};

fn main() {
    let gm = build_profile(KernelKind::Polyharmonic { order: 2 }, 1, 14.0, 128).unwrap();
    let gt = build_profile(KernelKind::Stable { theta: 1.0 }, 1, 400.0, 256).unwrap();
    let eps: Vec<f64> = (1..=6).map(|k| 2.0f64.powi(-k)).collect();

    // p_m = 5 here: p = 3 is subcritical, p = 6 supercritical
    for (p, horizon) in [(3.0, 32.0), (6.0, 1.0)] {
        let params = ProblemParams::new(1, 2, p, 1.0).unwrap();
        let spec = MajorantSpec::new(params, gm.clone(), gt.clone()).unwrap();
        let cfg = PicardConfig {
            horizon,
            n_t: 64,
            tol: 1e-8,
            max_iter: 200,
            weight_mode: WeightMode::Linear,
            delta: 0.6,
            m_ball: 1.2,
            d0: 1.0,
            dstar: 1.3,
            force: false,
            seed: 7,
            n_snapshots: 8,
        };
        let rows = delta_sweep(&spec, 0.05, &eps, &cfg, 10.0, 1 << 12).unwrap();
        println!("p = {p} (horizon {horizon}):");
        for r in &rows {
            println!(
                "  eps = {:>6.4}: D_* = {:.4e}  nu = {:.4}  converged = {}",
                r.eps, r.d_star_functional, r.nu, r.converged
            );
        }
    }
}
