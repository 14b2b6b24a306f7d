//! Build the two kernel families as radial profiles and inspect them:
//! the sign-changing polyharmonic kernel and the heavy-tailed stable one.
//!
//!     cargo run --release --example kernel_profiles

use polyheat::profile::{build_profile, KernelKind};

fn main() {
    let gm = build_profile(KernelKind::Polyharmonic { order: 2 }, 1, 14.0, 128).unwrap();
    println!("biharmonic kernel, N = 1:");
    println!("  value at origin   {:+.6}", gm.values[0]);
    println!("  reconstructed mass {:.8}", gm.total_mass());
    let min = gm.radii.iter().map(|&r| gm.interp(r)).fold(f64::INFINITY, f64::min);
    println!("  deepest negative   {:+.3e}  (no maximum principle)", min);

    let gt = build_profile(KernelKind::Stable { theta: 1.0 }, 1, 400.0, 256).unwrap();
    println!("stable kernel, theta = 1 (Cauchy):");
    println!("  value at origin   {:+.6}  (exact 1/pi)", gt.values[0]);
    println!("  reconstructed mass {:.8}", gt.total_mass());
    // positive everywhere, with (1+r)^{-N-theta} tails
    for r in [1.0, 10.0, 100.0] {
        let exact = 1.0 / (std::f64::consts::PI * (1.0 + r * r));
        println!("  r = {r:>5}: {:.6e}  vs closed form {:.6e}", gt.interp(r), exact);
    }

    // the same profile evaluated at other times through exact scaling
    for t in [0.25, 4.0] {
        println!("  G_theta(0, {t}) = {:.6e}", gt.eval_radial(0.0, t).unwrap());
    }
}
