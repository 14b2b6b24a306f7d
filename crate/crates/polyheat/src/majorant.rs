//! The majorizing kernel `K(x,t) = G_theta(x, t^{theta/2m})` and numerical
//! estimation of the comparison constants that make it a majorant: the
//! pointwise domination constant d_0 (and its derivative analogues d_j), the
//! smoothing constant d'', and the self-reproduction constant d_*.

use crate::criteria::{self, InitialData};
use crate::error::{Error, Result};
use crate::grid::{self, GridField};
use crate::params::ProblemParams;
use crate::profile::{self, KernelKind, RadialKernelProfile};
use crate::quad;

/// A numerically estimated constant together with the grid-refinement record
/// that justifies (or refutes) trusting it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantEstimate {
    pub value: f64,
    /// (grid size, estimate) pairs across successive refinements.
    pub refinement_history: Vec<(usize, f64)>,
    /// Last two history entries agree within 2%.
    pub saturated: bool,
}

impl ConstantEstimate {
    pub fn from_history(refinement_history: Vec<(usize, f64)>) -> Self {
        let value = refinement_history.last().map(|e| e.1).unwrap_or(0.0);
        let saturated = refinement_history.len() >= 2 && {
            let prev = refinement_history[refinement_history.len() - 2].1;
            (value - prev).abs() <= 0.02 * value.abs().max(1e-300)
        };
        Self { value, refinement_history, saturated }
    }
}

/// The two kernel profiles that together define the majorant.
#[derive(Debug, Clone)]
pub struct MajorantSpec {
    pub params: ProblemParams,
    pub gm_profile: RadialKernelProfile,
    pub gtheta_profile: RadialKernelProfile,
}

impl MajorantSpec {
    pub fn new(
        params: ProblemParams,
        gm_profile: RadialKernelProfile,
        gtheta_profile: RadialKernelProfile,
    ) -> Result<Self> {
        if gm_profile.dim != params.dim || gtheta_profile.dim != params.dim {
            return Err(Error::InvalidParameter(
                "profile dimensions must match the problem dimension".into(),
            ));
        }
        match gm_profile.kind {
            KernelKind::Polyharmonic { order } if order == params.order => {}
            _ => {
                return Err(Error::InvalidParameter(
                    "gm_profile must be polyharmonic of the problem order".into(),
                ))
            }
        }
        match gtheta_profile.kind {
            KernelKind::Stable { theta } if theta == params.theta => {}
            _ => {
                return Err(Error::InvalidParameter(
                    "gtheta_profile must be stable with the problem theta".into(),
                ))
            }
        }
        let warp = params.time_warp_exponent();
        if !(warp > 0.0 && warp < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "time warp exponent must lie in (0,1), got {warp}"
            )));
        }
        Ok(Self { params, gm_profile, gtheta_profile })
    }

    /// The majorant at a point: the stable kernel at the warped time.
    pub fn eval_k(&self, x: &[f64], t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::NonPositiveTime(t));
        }
        self.gtheta_profile
            .eval_point(x, t.powf(self.params.time_warp_exponent()))
    }

    pub fn eval_k_radial(&self, r: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::NonPositiveTime(t));
        }
        self.gtheta_profile
            .eval_radial(r, t.powf(self.params.time_warp_exponent()))
    }
}

/// Estimate d_j = sup_x max_{|alpha|=j} |d^alpha G_m(x,1)| / K(x,1) by grid
/// sup over expanding periodic grids. Both sides obey the same space-time
/// scaling, so t = 1 suffices. The sup cannot hide beyond the grid: the
/// numerator decays stretched-exponentially while the denominator only
/// polynomially, so the ratio is eventually decreasing in |x|.
pub fn estimate_d_j(
    spec: &MajorantSpec,
    j: usize,
    base_half_width: f64,
    base_n: usize,
) -> Result<ConstantEstimate> {
    if j > 2 {
        return Err(Error::InvalidParameter("derivative order must be <= 2".into()));
    }
    let mut history = Vec::new();
    for level in 0..4usize {
        let hw = base_half_width * (1.0 + 0.3 * level as f64);
        let n = base_n << level.min(2);
        let mut worst: f64 = 0.0;
        for alpha in profile::multi_indices(spec.params.dim, j) {
            let field = profile::sample_derivative_field(&spec.gm_profile, &alpha, hw, n)?;
            let mut point = [0.0f64; 3];
            for (idx, v) in field.values.iter().enumerate() {
                field.coords(idx, &mut point);
                let r = point[..field.dim].iter().map(|x| x * x).sum::<f64>().sqrt();
                let denom = spec.gtheta_profile.interp(r);
                worst = worst.max(v.abs() / denom);
            }
        }
        history.push((n, worst));
    }
    profile::finish_estimate(history)
}

/// Sup over a periodic grid of the majorant semigroup applied to the data,
/// `sup_x (S_K(t) mu)(x)`.
pub fn sup_sk(
    spec: &MajorantSpec,
    mu: &InitialData,
    t: f64,
    half_width: f64,
    n: usize,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    let dim = spec.params.dim;
    match mu {
        InitialData::Dirac { location, mass } => {
            let field = GridField::from_fn(dim, half_width, n, |x| {
                let diff: Vec<f64> = x.iter().zip(location).map(|(a, b)| a - b).collect();
                mass * spec.eval_k(&diff, t).expect("t > 0")
            })?;
            Ok(field.max_abs())
        }
        InitialData::Atoms { atoms } => {
            let field = GridField::from_fn(dim, half_width, n, |x| {
                atoms
                    .iter()
                    .map(|(loc, mass)| {
                        let diff: Vec<f64> = x.iter().zip(loc).map(|(a, b)| a - b).collect();
                        mass * spec.eval_k(&diff, t).expect("t > 0")
                    })
                    .sum()
            })?;
            Ok(field.max_abs())
        }
        InitialData::Power { .. } | InitialData::LogPower { .. } => {
            // radially decreasing data: the sup of the convolution sits at the
            // origin, where the integral is a one-dimensional radial one
            let cutoff = match mu {
                InitialData::Power { cutoff, .. } | InitialData::LogPower { cutoff, .. } => *cutoff,
                _ => unreachable!(),
            };
            let mut breaks = vec![0.0];
            let mut r = cutoff * 1e-9;
            while r < cutoff {
                breaks.push(r);
                r *= 2.0;
            }
            breaks.push(cutoff);
            let area = quad::unit_sphere_area(dim);
            let nm1 = (dim - 1) as i32;
            let v = quad::composite(&breaks, &mut |r: f64| {
                criteria::radial_density(mu, r) * spec.eval_k_radial(r, t).expect("t > 0")
                    * r.powi(nm1)
            });
            Ok(area * v)
        }
        InitialData::Grid { density } => {
            let warp = t.powf(spec.params.time_warp_exponent());
            let kernel = GridField::from_fn(density.dim, density.half_width, density.n, |x| {
                spec.gtheta_profile.eval_point(x, warp).expect("t > 0")
            })?;
            let conv = grid::convolve(density, &kernel)?;
            Ok(conv.max_abs())
        }
    }
}

/// Empirical smoothing constant d'': max over the sampled times of
/// `t^{N/2m} * sup_x (S_K(t) mu)(x) / sup_x mu(B(x, t^{1/2m}))`.
pub fn smoothing_bound_check(
    spec: &MajorantSpec,
    mu: &InitialData,
    times: &[f64],
    half_width: f64,
    n: usize,
) -> Result<ConstantEstimate> {
    if times.is_empty() {
        return Err(Error::InvalidParameter("need at least one time".into()));
    }
    let dim = spec.params.dim;
    let two_m = spec.params.symbol_exponent();
    let mut history = Vec::new();
    let mut running: f64 = 0.0;
    let mut any_mass = false;
    for (i, &t) in times.iter().enumerate() {
        if !(t > 0.0) {
            return Err(Error::NonPositiveTime(t));
        }
        let sigma = t.powf(1.0 / two_m);
        let ball = criteria::ball_mass_sup(mu, dim, sigma)?;
        if ball > 0.0 {
            any_mass = true;
            let sup = sup_sk(spec, mu, t, half_width, n)?;
            let ratio = t.powf(dim as f64 / two_m) * sup / ball;
            running = running.max(ratio);
        }
        history.push((i + 1, running));
    }
    if !any_mass {
        return Err(Error::DegenerateMeasure);
    }
    Ok(ConstantEstimate::from_history(history))
}

/// Warped-time sum `omega = (t-s)^{theta/2m} + s^{theta/2m}` appearing in the
/// time-split convolution of the majorant.
pub fn omega(params: &ProblemParams, t: f64, s: f64) -> f64 {
    let w = params.time_warp_exponent();
    (t - s).powf(w) + s.powf(w)
}

/// Default (t, s, |x|) sample sweep for the d_* estimate: logarithmic t-grid,
/// three s/t fractions, radial x up to `x_max`.
pub fn dstar_sample_sweep(n_t: usize, n_x: usize, x_max: f64) -> Vec<(f64, f64, f64)> {
    let mut samples = Vec::new();
    for i in 0..n_t {
        let t = 0.1 * 100.0f64.powf(i as f64 / (n_t - 1).max(1) as f64);
        for frac in [0.1, 0.5, 0.9] {
            let s = frac * t;
            for k in 0..n_x {
                let x = x_max * k as f64 / (n_x - 1).max(1) as f64;
                samples.push((t, s, x));
            }
        }
    }
    samples
}

/// Estimate d_* = sup over (t, s, x) of the time-split convolution
/// `int K(x-y, t-s) K(y, s) dy` against `K(x, t)`. The convolution collapses
/// exactly to `G_theta(x, omega)` by the stable semigroup identity; the grid
/// convolution is cross-checked against that closed reduction in one
/// dimension, and the omega sandwich `t^{theta/2m} <= omega <= 2 t^{theta/2m}`
/// is asserted for every sample.
pub fn estimate_d_star(spec: &MajorantSpec, samples: &[(f64, f64, f64)]) -> Result<ConstantEstimate> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let params = &spec.params;
    let warp = params.time_warp_exponent();
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    let mut x_max: f64 = 0.0;
    for &(t, s, x) in samples {
        if !(s > 0.0 && s < t) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < s < t, got s={s} t={t}"
            )));
        }
        let w = omega(params, t, s);
        let tw = t.powf(warp);
        assert!(tw <= w * (1.0 + 1e-12) && w <= 2.0 * tw * (1.0 + 1e-12),
            "omega sandwich violated: t^w={tw} omega={w}");
        if !pairs.iter().any(|&(a, b)| a == t && b == s) {
            pairs.push((t, s));
        }
        x_max = x_max.max(x.abs());
    }
    if x_max == 0.0 {
        x_max = 50.0;
    }

    let ratio = |t: f64, s: f64, x: f64| -> f64 {
        let w = omega(params, t, s);
        let conv = spec.gtheta_profile.eval_radial(x, w).expect("omega > 0");
        let target = spec.gtheta_profile.eval_radial(x, t.powf(warp)).expect("t > 0");
        conv / target
    };

    // history over radial sampling density; the sample x's are always included
    let mut history = Vec::new();
    for level in 0..3usize {
        let n_x = 40 << level;
        let mut worst: f64 = 0.0;
        for &(t, s) in &pairs {
            for k in 0..=n_x {
                let x = x_max * k as f64 / n_x as f64;
                worst = worst.max(ratio(t, s, x));
            }
        }
        for &(t, s, x) in samples {
            worst = worst.max(ratio(t, s, x));
        }
        history.push((n_x, worst));
    }

    if params.dim == 1 {
        // audit the best-resolved pair: both factors need a kernel width
        // comfortably above the grid spacing, else skip the cross-check
        let (hw, n) = (400.0, 1usize << 14);
        let h = 2.0 * hw / n as f64;
        let width = |&(t, s): &(f64, f64)| (t - s).powf(warp).min(s.powf(warp));
        let best = pairs
            .iter()
            .max_by(|a, b| width(a).partial_cmp(&width(b)).unwrap())
            .unwrap();
        if width(best) >= 20.0 * h {
            cross_check_convolution(spec, best.0, best.1, hw, n)?;
        }
    }

    profile::finish_estimate(history)
}

/// Verify that the periodic-grid convolution of `K(., t-s)` with `K(., s)`
/// matches the closed stable reduction `G_theta(., omega)` in sup norm.
pub fn cross_check_convolution(
    spec: &MajorantSpec,
    t: f64,
    s: f64,
    half_width: f64,
    n: usize,
) -> Result<f64> {
    if spec.params.dim != 1 {
        return Err(Error::UnsupportedDimension(spec.params.dim));
    }
    let warp = spec.params.time_warp_exponent();
    let gt = &spec.gtheta_profile;
    for tau in [(t - s).powf(warp), s.powf(warp)] {
        let q = gt.kind.symbol_exponent();
        // fraction of mass outside the box; a heavy tail never vanishes, it
        // only needs to be small enough not to pollute the circular sum
        let tail = gt.abs_mass_beyond(half_width * tau.powf(-1.0 / q));
        if tail > 5e-2 {
            return Err(Error::BoxTooSmall { tail, limit: 5e-2 });
        }
    }
    let sample = |tau: f64| -> Result<GridField> {
        GridField::from_fn(1, half_width, n, |x| gt.eval_radial(x[0], tau).expect("tau > 0"))
    };
    let a = sample((t - s).powf(warp))?;
    let b = sample(s.powf(warp))?;
    let target = sample(omega(&spec.params, t, s))?;
    let conv = grid::convolve(&a, &b)?;
    let residual = conv.sup_diff(&target);
    if residual > 1e-5 {
        return Err(Error::SemigroupMismatch(residual));
    }
    Ok(residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::build_profile;
    use std::f64::consts::PI;
    use std::sync::OnceLock;

    fn spec_m2() -> &'static MajorantSpec {
        static SPEC: OnceLock<MajorantSpec> = OnceLock::new();
        SPEC.get_or_init(|| {
            let params = ProblemParams::new(1, 2, 3.0, 1.0).unwrap();
            let gm = build_profile(KernelKind::Polyharmonic { order: 2 }, 1, 14.0, 128).unwrap();
            let gt = build_profile(KernelKind::Stable { theta: 1.0 }, 1, 400.0, 256).unwrap();
            MajorantSpec::new(params, gm, gt).unwrap()
        })
    }

    fn spec_m1() -> &'static MajorantSpec {
        static SPEC: OnceLock<MajorantSpec> = OnceLock::new();
        SPEC.get_or_init(|| {
            let params = ProblemParams::new(1, 1, 1.5, 1.0).unwrap();
            let gm = build_profile(KernelKind::Polyharmonic { order: 1 }, 1, 25.0, 128).unwrap();
            let gt = build_profile(KernelKind::Stable { theta: 1.0 }, 1, 400.0, 256).unwrap();
            MajorantSpec::new(params, gm, gt).unwrap()
        })
    }

    #[test]
    fn k_at_origin_unit_time() {
        let spec = spec_m2();
        assert_eq!(spec.eval_k(&[0.0], 1.0).unwrap(), spec.gtheta_profile.values[0]);
    }

    #[test]
    fn k_warp_arithmetic() {
        // theta=1, m=2: warp exponent 1/4, so t=16 maps to stable time 2.
        let spec = spec_m2();
        for x in [0.0, 0.5, 3.0] {
            let a = spec.eval_k(&[x], 16.0).unwrap();
            let b = spec.gtheta_profile.eval_point(&[x], 2.0).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn k_cauchy_closed_form() {
        // theta=1, N=1: K(x,t) = (1/pi) t^{1/4} / (t^{1/2} + x^2).
        let spec = spec_m2();
        for (x, t) in [(0.0f64, 1.0f64), (1.0, 1.0), (2.0, 0.3), (5.0, 7.0)] {
            let want = t.powf(0.25) / (PI * (t.sqrt() + x * x));
            let got = spec.eval_k(&[x], t).unwrap();
            assert!((got - want).abs() < 1e-6, "x={x} t={t}: {got} vs {want}");
        }
    }

    #[test]
    fn k_rejects_nonpositive_time() {
        assert!(matches!(
            spec_m2().eval_k(&[0.0], 0.0),
            Err(Error::NonPositiveTime(_))
        ));
    }

    #[test]
    fn d0_gaussian_oracle() {
        // sup_r (4 pi)^{-1/2} e^{-r^2/4} * pi (1 + r^2), maximized at r^2 = 3:
        // 2 sqrt(pi) e^{-3/4}.
        let want = 2.0 * PI.sqrt() * (-0.75f64).exp();
        let est = estimate_d_j(spec_m1(), 0, 12.0, 256).unwrap();
        assert!(est.saturated);
        assert!(
            (est.value - want).abs() / want < 0.01,
            "d0 = {} want {want}",
            est.value
        );
    }

    #[test]
    fn d0_biharmonic_saturates() {
        let est = estimate_d_j(spec_m2(), 0, 10.0, 128).unwrap();
        assert!(est.saturated, "history {:?}", est.refinement_history);
        assert!(est.value.is_finite() && est.value > 0.0);
        // the origin ratio is a lower bound for the sup
        let origin = spec_m2().gm_profile.values[0] / spec_m2().gtheta_profile.values[0];
        assert!(est.value >= origin - 1e-12);
    }

    #[test]
    fn smoothing_dirac_is_kernel_peak() {
        // For an atom the ratio is exactly G_theta(0,1) at every time.
        let spec = spec_m2();
        let mu = InitialData::Dirac { location: vec![0.0], mass: 1.0 };
        let est = smoothing_bound_check(spec, &mu, &[1e-3, 1e-2, 0.1, 1.0], 50.0, 1 << 10).unwrap();
        let want = spec.gtheta_profile.values[0];
        assert!(
            (est.value - want).abs() / want < 1e-6,
            "d'' = {} want {want}",
            est.value
        );
        assert!(est.saturated);
    }

    #[test]
    fn smoothing_indicator_data_t_stable() {
        let spec = spec_m2();
        let mu = InitialData::Power { c: 1.0, a: 0.0, cutoff: 1.0 };
        let times = [1e-3, 1e-2, 0.1, 1.0];
        let est = smoothing_bound_check(spec, &mu, &times, 100.0, 1 << 10).unwrap();
        assert!(est.value.is_finite() && est.value > 0.0);
        // the running max must not be dominated by one extreme time
        let first = est.refinement_history[0].1;
        assert!(est.value / first < 3.0, "ratio drifts: {:?}", est.refinement_history);
    }

    #[test]
    fn smoothing_zero_mass_rejected() {
        let spec = spec_m2();
        let mu = InitialData::Power { c: 0.0, a: 0.0, cutoff: 1.0 };
        assert!(matches!(
            smoothing_bound_check(spec, &mu, &[1.0], 20.0, 64),
            Err(Error::DegenerateMeasure)
        ));
    }

    #[test]
    fn omega_sandwich_arithmetic() {
        // theta=1, m=2, t=1, s=1/2: omega = 2 (1/2)^{1/4}.
        let params = ProblemParams::new(1, 2, 3.0, 1.0).unwrap();
        let w = omega(&params, 1.0, 0.5);
        assert!((w - 2.0 * 0.5f64.powf(0.25)).abs() < 1e-15);
        assert!(w > 1.0 && w < 2.0);
    }

    #[test]
    fn dstar_ratio_near_one_for_small_s() {
        let spec = spec_m2();
        // for Cauchy tails the sup ratio is omega/t^{1/4} = 1 + s^{1/4}
        let est = estimate_d_star(spec, &[(1.0, 1e-16, 0.0)]).unwrap();
        assert!((est.value - 1.0).abs() < 1e-3, "ratio {}", est.value);
    }

    #[test]
    fn dstar_sweep_saturates() {
        let spec = spec_m2();
        let samples = dstar_sample_sweep(5, 20, 50.0);
        let est = estimate_d_star(spec, &samples).unwrap();
        assert!(est.saturated, "history {:?}", est.refinement_history);
        assert!(est.value >= 1.0 && est.value < 10.0, "d_* = {}", est.value);
    }

    #[test]
    fn dstar_rejects_bad_times() {
        let spec = spec_m2();
        assert!(estimate_d_star(spec, &[(1.0, 1.5, 0.0)]).is_err());
    }

    #[test]
    fn convolution_matches_closed_reduction() {
        let spec = spec_m2();
        let res = cross_check_convolution(spec, 2.0, 1.0, 400.0, 1 << 14).unwrap();
        assert!(res < 1e-5, "residual {res}");
    }
}
