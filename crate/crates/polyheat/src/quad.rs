//! Panel-based Gauss-Legendre quadrature and the one-dimensional radial
//! reduction of the kernel Fourier integrals.

use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::sync::OnceLock;

const GL_POINTS: usize = 20;

fn gl_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(GL_POINTS))
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence.
fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Evaluate P_n and P_n' via the three-term recurrence.
            let (mut p0, mut p1) = (1.0_f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0_f64, x);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// 20-point Gauss-Legendre on [a, b].
pub fn gauss_panel<F: FnMut(f64) -> f64>(a: f64, b: f64, f: &mut F) -> f64 {
    let (nodes, weights) = gl_rule();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Composite rule over explicit panel break points.
pub fn composite<F: FnMut(f64) -> f64>(breaks: &[f64], f: &mut F) -> f64 {
    let mut acc = 0.0;
    for pair in breaks.windows(2) {
        acc += gauss_panel(pair[0], pair[1], f);
    }
    acc
}

/// Integrate a smooth function on [a, b] with `panels` equal panels.
pub fn integrate_uniform<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, f: &mut F) -> f64 {
    let mut acc = 0.0;
    let w = (b - a) / panels as f64;
    for i in 0..panels {
        acc += gauss_panel(a + i as f64 * w, a + (i + 1) as f64 * w, f);
    }
    acc
}

/// Bessel function J0. Power series below 12, Hankel asymptotics above;
/// absolute accuracy around 1e-11 over the real line.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= 12.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..80 {
            let kf = k as f64;
            term *= -q / (kf * kf);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1.0) {
                break;
            }
        }
        sum
    } else {
        // Hankel expansion, coefficients a_k = a_{k-1} (-(2k-1)^2)/(8k),
        // truncated at the smallest term (error ~ e^{-2x}, negligible here)
        let z = 1.0 / x;
        let mut p0 = 0.0;
        let mut q0 = 0.0;
        let mut term: f64 = 1.0; // a_k z^k
        let mut last = f64::INFINITY;
        for k in 0..24u32 {
            if term.abs() >= last || term.abs() < 1e-18 {
                break;
            }
            last = term.abs();
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                p0 += sign * term;
            } else {
                q0 += sign * term;
            }
            let kk = (k + 1) as f64;
            term *= -(2.0 * kk - 1.0) * (2.0 * kk - 1.0) / (8.0 * kk) * z;
        }
        let chi = x - PI / 4.0;
        (2.0 / (PI * x)).sqrt() * (p0 * chi.cos() - q0 * chi.sin())
    }
}

/// Surface area of the unit sphere in R^N.
pub fn unit_sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => panic!("unit_sphere_area: dimension {dim} unsupported"),
    }
}

/// Volume of the unit ball in R^N.
pub fn unit_ball_volume(dim: usize) -> f64 {
    unit_sphere_area(dim) / dim as f64
}

/// Truncation point P such that the neglected integrand tail of
/// rho^a exp(-rho^q) beyond P is below `eps` in absolute value.
pub fn truncation_point(poly_degree: f64, symbol_exponent: f64, eps: f64) -> f64 {
    let s = (poly_degree + 1.0) / symbol_exponent;
    let mut p = (2.0 * s + 2.0).powf(1.0 / symbol_exponent).max(1.0);
    loop {
        let x = p.powf(symbol_exponent);
        // Upper incomplete gamma bound: Gamma(s, x) <= 2 x^{s-1} e^{-x} for x >= 2s.
        let bound = 2.0 / symbol_exponent * x.powf(s - 1.0) * (-x).exp();
        if bound < eps {
            return p;
        }
        p *= 1.05;
        if p > 1e9 {
            return p;
        }
    }
}

/// Panel break points for the oscillatory radial integral on [0, upper]:
/// geometric grading near zero (the symbol rho^q is non-smooth there for
/// q < 1) and oscillation-limited widths elsewhere.
fn radial_breaks(upper: f64, radius: f64, refine: usize) -> Vec<f64> {
    let mut breaks = vec![0.0];
    let scale = 1.0 / (1 << refine) as f64;
    let w = (6.0 / radius.max(1.0)).min(1.0) * scale;
    // geometric panels must stay below the oscillation width too
    let mut h = 1e-8 * scale;
    while h < upper.min(1.0).min(2.0 * w) {
        breaks.push(h);
        h *= 2.0;
    }
    let start = *breaks.last().unwrap();
    let rest = upper - start;
    if rest > 0.0 {
        let panels = (rest / w).ceil().max(1.0) as usize;
        for i in 1..=panels {
            breaks.push(start + rest * i as f64 / panels as f64);
        }
    }
    breaks
}

/// Radial section of the N-dimensional Fourier integral
/// `(2 pi)^{-N/2} \int e^{i x.xi} e^{-|xi|^q} dxi` at `|x| = radius`,
/// reduced to a one-dimensional Hankel-type integral.
pub fn radial_kernel_value(dim: usize, symbol_exponent: f64, radius: f64) -> Result<f64> {
    if dim == 0 || dim > 3 {
        return Err(Error::UnsupportedDimension(dim));
    }
    let poly_degree = (dim - 1) as f64;
    let upper = truncation_point(poly_degree, symbol_exponent, 1e-16);
    let eval = |refine: usize| -> f64 {
        let breaks = radial_breaks(upper, radius, refine);
        let q = symbol_exponent;
        match dim {
            1 => composite(&breaks, &mut |rho: f64| {
                (radius * rho).cos() * (-rho.powf(q)).exp()
            }) / PI,
            2 => composite(&breaks, &mut |rho: f64| {
                bessel_j0(radius * rho) * rho * (-rho.powf(q)).exp()
            }) / (2.0 * PI),
            _ => {
                if radius < 1e-12 {
                    composite(&breaks, &mut |rho: f64| rho * rho * (-rho.powf(q)).exp())
                        / (2.0 * PI * PI)
                } else {
                    composite(&breaks, &mut |rho: f64| {
                        rho * (radius * rho).sin() * (-rho.powf(q)).exp()
                    }) / (2.0 * PI * PI * radius)
                }
            }
        }
    };
    let coarse = eval(0);
    let fine = eval(1);
    let tol = 5e-11 * fine.abs().max(1e-3);
    let delta = (coarse - fine).abs();
    if delta > tol {
        return Err(Error::QuadratureNonConvergence { delta, tol });
    }
    Ok(fine)
}
