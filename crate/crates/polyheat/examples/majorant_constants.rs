//! Estimate the constants that make K(x,t) = G_theta(x, t^{theta/2m}) a
//! majorant for the polyharmonic kernel, with their refinement histories.
//!
//!     cargo run --release --example majorant_constants

use polyheat::criteria::InitialData;
use polyheat::majorant::{
    cross_check_convolution, dstar_sample_sweep, estimate_d_j, estimate_d_star,
    smoothing_bound_check, MajorantSpec,
};
use polyheat::params::ProblemParams;
use polyheat::profile::{build_profile, KernelKind};

fn main() {
    let params = ProblemParams::new(1, 2, 3.0, 1.0).unwrap();
    let gm = build_profile(KernelKind::Polyharmonic { order: 2 }, 1, 14.0, 128).unwrap();
    let gt = build_profile(KernelKind::Stable { theta: 1.0 }, 1, 400.0, 256).unwrap();
    let spec = MajorantSpec::new(params, gm, gt).unwrap();

    let d0 = estimate_d_j(&spec, 0, 8.0, 256).unwrap();
    println!("d_0  (|G_m| <= d_0 K):          {:.4}  saturated={}", d0.value, d0.saturated);
    println!("     refinement {:?}", d0.refinement_history);

    let mu = InitialData::Dirac { location: vec![0.0], mass: 1.0 };
    let times: Vec<f64> = (0..8).map(|k| 2.0f64.powi(-k)).collect();
    let dpp = smoothing_bound_check(&spec, &mu, &times, 50.0, 1 << 10).unwrap();
    println!("d'' (smoothing bound):          {:.4}  saturated={}", dpp.value, dpp.saturated);

    let dstar = estimate_d_star(&spec, &dstar_sample_sweep(10, 50, 50.0)).unwrap();
    println!("d_* (time-split self-bound):    {:.4}  saturated={}", dstar.value, dstar.saturated);

    // independent audit: the K * K convolution collapses to G_theta(., omega)
    let res = cross_check_convolution(&spec, 2.0, 1.0, 400.0, 1 << 14).unwrap();
    println!("convolution vs closed reduction: residual {:.3e}", res);
}
