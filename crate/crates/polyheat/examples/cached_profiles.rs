//! Profile caching: expensive oscillatory quadrature runs once, later loads
//! come from a checksummed text file. `POLYHEAT_CACHE` overrides the
//! directory.
//!
//!     cargo run --release --example cached_profiles

use polyheat::cache;
use polyheat::profile::KernelKind;

fn main() {
    let dir = std::env::var("POLYHEAT_CACHE")
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|_| ".polyheat-cache".into());
    let kind = KernelKind::Polyharmonic { order: 2 };

    for round in 1..=2 {
        let t0 = std::time::Instant::now();
        let (profile, hit) = cache::load_or_build(&dir, kind, 1, 14.0, 128).unwrap();
        println!(
            "round {round}: cache {} in {:?} (mass {:.8})",
            if hit { "hit" } else { "miss" },
            t0.elapsed(),
            profile.total_mass()
        );
    }
    println!("cache directory: {}", dir.display());
}
