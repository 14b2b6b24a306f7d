//! Mild solutions by weighted Picard iteration on a periodic spectral grid.
//!
//! Both semigroups are exact Fourier multipliers on the torus: `exp(-dt
//! |xi|^{2m})` for the polyharmonic flow and `exp(-t^{theta/2m} |xi|^theta)`
//! for the majorant flow, so the only discretization errors are the box
//! truncation of `R^N` and the Duhamel time quadrature.

use crate::criteria::{self, InitialData};
use crate::error::{Error, Result};
use crate::grid::{GridField, Spectrum};
use crate::majorant::MajorantSpec;
use crate::params::ProblemParams;
use rand::Rng;
use rand::SeedableRng;
use rustfft::num_complex::Complex;

/// Weight function family defining the contraction norm `sup |u| / Psi(U)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightMode {
    /// `Psi(s) = s`, with `U = 2 d_0 S_K(t) mu`.
    Linear,
    /// `Psi(s) = s^{1/alpha}`, with `U = (2 d_0)^alpha S_K(t) |mu|^alpha`.
    Alpha { alpha: f64 },
    /// `Psi = Phi_L^{-1}` for `Phi_L(s) = s [log(L+s)]^beta`, with
    /// `U = S_K(t) Phi_L(|mu|)`.
    Orlicz { beta: f64, l: f64 },
}

#[derive(Debug, Clone)]
pub struct PicardConfig {
    pub horizon: f64,
    /// Duhamel time steps (left-endpoint product rule).
    pub n_t: usize,
    /// Fixed-point tolerance in the weighted norm.
    pub tol: f64,
    pub max_iter: usize,
    pub weight_mode: WeightMode,
    /// Bound on the weighted norm of the free term.
    pub delta: f64,
    /// Radius of the invariant ball.
    pub m_ball: f64,
    /// Pointwise domination constant of the majorant.
    pub d0: f64,
    /// Self-reproduction constant of the majorant.
    pub dstar: f64,
    /// Iterate even when the contraction condition fails.
    pub force: bool,
    pub seed: u64,
    pub n_snapshots: usize,
}

impl PicardConfig {
    pub fn validate(&self, params: &ProblemParams) -> Result<()> {
        if !(self.horizon > 0.0) {
            return Err(Error::InvalidParameter("horizon must be > 0".into()));
        }
        if self.n_t < 2 {
            return Err(Error::InvalidParameter("n_t must be >= 2".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("tol must be > 0".into()));
        }
        if !(self.delta > 0.0 && self.delta <= self.m_ball) {
            return Err(Error::InvalidParameter("need 0 < delta <= M".into()));
        }
        if !(self.d0 > 0.0 && self.dstar > 0.0) {
            return Err(Error::InvalidParameter("need d0 > 0 and dstar > 0".into()));
        }
        match self.weight_mode {
            WeightMode::Linear => {}
            WeightMode::Alpha { alpha } => {
                if !(alpha > 1.0 && alpha < params.exponent) {
                    return Err(Error::AlphaOutOfRange(alpha));
                }
            }
            WeightMode::Orlicz { beta, l } => {
                if !(beta > 0.0) || l < std::f64::consts::E {
                    return Err(Error::InvalidParameter(
                        "orlicz weight needs beta > 0 and L >= e".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ContractionReport {
    /// The mixed sup / time-integral functional D_*.
    pub d_star_functional: f64,
    /// The two inequalities of the fixed-point condition.
    pub condition_53: (bool, bool),
    /// Contraction factor bound `nu = 2 p d_0 d_* D_* M^{p-1}`.
    pub nu: f64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    /// Weighted increment norm per iteration.
    pub norm_history: Vec<f64>,
    /// Weighted norm of each iterate (ball membership record).
    pub ball_history: Vec<f64>,
    /// Max ratio of successive increments (iterations >= 2).
    pub contraction_estimate: f64,
    pub d_star_functional: f64,
    pub d0_used: f64,
    pub dstar_used: f64,
    pub condition_53: (bool, bool),
    pub nu: f64,
    pub snapshots: Vec<(f64, GridField)>,
    /// Defect of the integral equation at random samples, by a direct
    /// (non-recursive) Duhamel sum.
    pub residual: f64,
    /// Grid points excluded from the norm because the weight underflowed.
    pub weight_excluded: usize,
}

/// Polyharmonic semigroup: multiplier `exp(-dt |xi|^{2m})`.
pub fn apply_sm(field: &GridField, dt: f64, params: &ProblemParams) -> Result<GridField> {
    if dt < 0.0 {
        return Err(Error::InvalidParameter("dt must be >= 0".into()));
    }
    if dt == 0.0 {
        return Ok(field.clone());
    }
    let q = params.symbol_exponent();
    Ok(field.apply_radial_multiplier(|xi| (-dt * xi.powf(q)).exp()))
}

/// Majorant semigroup on fields: multiplier `exp(-t^{theta/2m} |xi|^theta)`,
/// the exact symbol of the stable kernel at the warped time.
pub fn apply_sk(field: &GridField, t: f64, params: &ProblemParams) -> Result<GridField> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    let tau = t.powf(params.time_warp_exponent());
    let theta = params.theta;
    Ok(field.apply_radial_multiplier(|xi| (-tau * xi.powf(theta)).exp()))
}

/// Majorant semigroup applied to initial data: direct kernel evaluation for
/// atomic data, spectral multiplier for densities.
pub fn apply_sk_measure(
    spec: &MajorantSpec,
    mu: &InitialData,
    t: f64,
    half_width: f64,
    n: usize,
) -> Result<GridField> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    match mu {
        InitialData::Dirac { location, mass } => {
            GridField::from_fn(spec.params.dim, half_width, n, |x| {
                let diff: Vec<f64> = x.iter().zip(location).map(|(a, b)| a - b).collect();
                mass * spec.eval_k(&diff, t).expect("t > 0")
            })
        }
        InitialData::Atoms { atoms } => GridField::from_fn(spec.params.dim, half_width, n, |x| {
            atoms
                .iter()
                .map(|(loc, mass)| {
                    let diff: Vec<f64> = x.iter().zip(loc).map(|(a, b)| a - b).collect();
                    mass * spec.eval_k(&diff, t).expect("t > 0")
                })
                .sum()
        }),
        _ => {
            let data = initial_field(mu, spec.params.dim, half_width, n)?;
            apply_sk(&data, t, &spec.params)
        }
    }
}

/// Sample density-type data on the grid. Radial profiles are sampled with the
/// radius floored at half a cell, a mild mollification of the origin
/// singularity; atomic data must be mollified by the caller.
pub fn initial_field(
    mu: &InitialData,
    dim: usize,
    half_width: f64,
    n: usize,
) -> Result<GridField> {
    mu.validate(dim)?;
    match mu {
        InitialData::Dirac { .. } | InitialData::Atoms { .. } => Err(Error::InvalidParameter(
            "atomic data has no grid density; mollify it first".into(),
        )),
        InitialData::Grid { density } => {
            if density.dim != dim || density.n != n
                || (density.half_width - half_width).abs() > 1e-12
            {
                return Err(Error::InvalidParameter(
                    "grid data geometry must match the solver grid".into(),
                ));
            }
            Ok(density.clone())
        }
        _ => {
            let floor = half_width / n as f64; // half a cell
            GridField::from_fn(dim, half_width, n, |x| {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                criteria::radial_density(mu, r.max(floor))
            })
        }
    }
}

fn psi(mode: WeightMode, u: f64) -> f64 {
    match mode {
        WeightMode::Linear => u,
        WeightMode::Alpha { alpha } => u.powf(1.0 / alpha),
        WeightMode::Orlicz { beta, l } => criteria::phi_inv(u, beta, l),
    }
}

/// The data transform whose majorant flow defines `U(t)`.
fn weight_base(data: &GridField, mode: WeightMode, d0: f64) -> GridField {
    let mut base = data.clone();
    match mode {
        WeightMode::Linear => {
            for v in &mut base.values {
                *v *= 2.0 * d0;
            }
        }
        WeightMode::Alpha { alpha } => {
            let scale = (2.0 * d0).powf(alpha);
            for v in &mut base.values {
                *v = scale * v.abs().powf(alpha);
            }
        }
        WeightMode::Orlicz { beta, l } => {
            for v in &mut base.values {
                *v = criteria::phi(v.abs(), beta, l);
            }
        }
    }
    base
}

const WEIGHT_FLOOR: f64 = 1e-300;

/// Evaluate the contraction functional
/// `D_* = sup_t ||U(t)/Psi(U(t))|| * int_0^t ||Psi(U(s))^p / U(s)|| ds`
/// on a geometrically graded time grid (the integrand can spike at scales
/// far below the horizon for sharply concentrated data), and check the
/// fixed-point inequalities.
pub fn check_contraction(
    data: &GridField,
    params: &ProblemParams,
    cfg: &PicardConfig,
) -> Result<ContractionReport> {
    cfg.validate(params)?;
    let p = params.exponent;
    if data.max_abs() == 0.0 {
        return Ok(ContractionReport {
            d_star_functional: 0.0,
            condition_53: (cfg.delta <= cfg.m_ball, true),
            nu: 0.0,
        });
    }
    let base = weight_base(data, cfg.weight_mode, cfg.d0);
    if base.max_abs() == 0.0 {
        return Err(Error::WeightDegenerate);
    }
    let t_end = cfg.horizon;
    // geometric break points T 2^{-48} .. T
    let mut breaks: Vec<f64> = (0..=48).rev().map(|j| t_end * 2.0f64.powi(-j)).collect();
    breaks.insert(0, 0.0);
    let norms_at = |t: f64| -> Result<(f64, f64)> {
        let u = apply_sk(&base, t, params)?;
        let mut a: f64 = 0.0; // ||U / Psi(U)||
        let mut c: f64 = 0.0; // ||Psi(U)^p / U||
        for &v in &u.values {
            if v > WEIGHT_FLOOR {
                let w = psi(cfg.weight_mode, v);
                a = a.max(v / w);
                c = c.max(w.powf(p) / v);
            }
        }
        Ok((a, c))
    };
    let mut d_star: f64 = 0.0;
    let mut integral = 0.0;
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = 0.5 * (lo + hi);
        if mid <= 0.0 {
            continue;
        }
        let (_, c_mid) = norms_at(mid)?;
        integral += c_mid * (hi - lo);
        let (a_hi, _) = norms_at(hi)?;
        d_star = d_star.max(a_hi * integral);
    }
    let m = cfg.m_ball;
    let lhs = cfg.delta + cfg.d0 * cfg.dstar * d_star * m.powf(p);
    let nu = 2.0 * p * cfg.d0 * cfg.dstar * d_star * m.powf(p - 1.0);
    Ok(ContractionReport {
        d_star_functional: d_star,
        condition_53: (lhs <= m, nu < 1.0),
        nu,
    })
}

/// Pointwise radial multiplier values on the spectrum lattice.
fn multiplier_values(spec: &Spectrum, g: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut probe = spec.clone();
    let mut out = vec![0.0; spec.data.len()];
    let mut idx = 0;
    probe.for_each_mode(|xi, _| {
        let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        out[idx] = g(norm);
        idx += 1;
    });
    out
}

/// Picard iteration for the integral equation on `[0, T)`. The Duhamel
/// integral uses the left-endpoint product rule; its running sum is advanced
/// by the exact semigroup recurrence, so one iteration costs two transforms
/// per time step.
pub fn picard_solve(
    mu: &InitialData,
    params: &ProblemParams,
    cfg: &PicardConfig,
    half_width: f64,
    n: usize,
) -> Result<SolveReport> {
    cfg.validate(params)?;
    let data = initial_field(mu, params.dim, half_width, n)?;
    let contraction = check_contraction(&data, params, cfg)?;
    if !contraction.condition_53.1 && !cfg.force {
        return Err(Error::NoContraction { nu: contraction.nu });
    }
    let p = params.exponent;
    let n_t = cfg.n_t;
    let dt = cfg.horizon / n_t as f64;
    let q = params.symbol_exponent();

    let data_spec = data.spectrum();
    let e_mult = multiplier_values(&data_spec, |xi| (-dt * xi.powf(q)).exp());

    // snapshot indices (time > 0) and weight fields there
    let n_snap = cfg.n_snapshots.clamp(1, n_t);
    let snap_idx: Vec<usize> = (1..=n_snap)
        .map(|j| (j * n_t) / n_snap)
        .collect();
    let zero_data = data.max_abs() == 0.0;
    let base = weight_base(&data, cfg.weight_mode, cfg.d0);
    let mut weight_excluded = 0usize;
    let v_fields: Vec<Vec<f64>> = snap_idx
        .iter()
        .map(|&i| -> Result<Vec<f64>> {
            let u = apply_sk(&base, i as f64 * dt, params)?;
            Ok(u.values
                .iter()
                .map(|&v| {
                    if v > WEIGHT_FLOOR {
                        psi(cfg.weight_mode, v)
                    } else {
                        weight_excluded += 1;
                        0.0
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let weighted_sup = |diff: &[f64], v: &[f64]| -> f64 {
        diff.iter()
            .zip(v)
            .filter(|(_, v)| **v > 0.0)
            .fold(0.0f64, |a, (d, v)| a.max(d.abs() / v))
    };

    // storage across the whole time grid; u[0] is the data itself
    let mut u: Vec<GridField> = Vec::with_capacity(n_t + 1);
    u.push(data.clone());
    {
        // first iterate: the free term S_m(t) mu
        let mut u0_hat = data_spec.clone();
        for i in 1..=n_t {
            for (c, e) in u0_hat.data.iter_mut().zip(&e_mult) {
                *c *= e;
            }
            let mut f = u0_hat.clone().into_field(Some(i as f64 * dt));
            f.time_tag = Some(i as f64 * dt);
            u.push(f);
        }
    }

    let mut norm_history = Vec::new();
    let mut ball_history = Vec::new();
    let mut contraction_estimate: f64 = 0.0;
    let mut converged = false;
    let mut rises = 0usize;
    let mut iterations = 0usize;

    for iter in 1..=cfg.max_iter {
        iterations = iter;
        let mut u0_hat = data_spec.clone();
        let mut n_hat = Spectrum::zeros(params.dim, half_width, n)?;
        let mut prev_old = u[0].clone();
        let mut increment: f64 = 0.0;
        let mut ball: f64 = 0.0;
        for i in 1..=n_t {
            // w at the left endpoint, from the previous iterate
            let mut w = prev_old.clone();
            for v in &mut w.values {
                *v = v.abs().powf(p);
            }
            let w_hat = w.spectrum();
            for ((nh, wh), e) in n_hat.data.iter_mut().zip(&w_hat.data).zip(&e_mult) {
                *nh = (*nh + dt * wh) * e;
            }
            for (c, e) in u0_hat.data.iter_mut().zip(&e_mult) {
                *c *= e;
            }
            let mut sum = u0_hat.clone();
            for (s, nh) in sum.data.iter_mut().zip(&n_hat.data) {
                *s += nh;
            }
            let mut new_field = sum.into_field(Some(i as f64 * dt));
            new_field.time_tag = Some(i as f64 * dt);
            if new_field.max_abs().is_nan() {
                return Err(Error::NaNDetected(iter));
            }
            if let Some(pos) = snap_idx.iter().position(|&s| s == i) {
                let v = &v_fields[pos];
                let diff: Vec<f64> = new_field
                    .values
                    .iter()
                    .zip(&u[i].values)
                    .map(|(a, b)| a - b)
                    .collect();
                increment = increment.max(weighted_sup(&diff, v));
                ball = ball.max(weighted_sup(&new_field.values, v));
            }
            prev_old = std::mem::replace(&mut u[i], new_field);
        }
        if let Some(&last) = norm_history.last() {
            if increment > last {
                rises += 1;
                if rises >= 5 {
                    return Err(Error::IterationDiverged(rises));
                }
            } else {
                rises = 0;
            }
            if last > 0.0 && norm_history.len() >= 1 {
                contraction_estimate = contraction_estimate.max(increment / last);
            }
        }
        norm_history.push(increment);
        ball_history.push(ball);
        if increment <= cfg.tol || zero_data {
            converged = true;
            break;
        }
    }

    // residual: direct Duhamel sum (fresh multiplier powers, no recurrence)
    // at random sample times, probed at random grid points
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut residual: f64 = 0.0;
    if !zero_data {
        let spectra: Vec<Spectrum> = Vec::new();
        drop(spectra);
        for _ in 0..8 {
            let i = rng.gen_range(1..=n_t.min(256).max(1));
            let x_idx = rng.gen_range(0..u[0].len());
            let t_i = i as f64 * dt;
            let mut acc = Spectrum::zeros(params.dim, half_width, n)?;
            for j in 0..i {
                let mut w = u[j].clone();
                for v in &mut w.values {
                    *v = v.abs().powf(p);
                }
                let mut w_hat = w.spectrum();
                let gap = t_i - j as f64 * dt;
                let mult = multiplier_values(&w_hat, |xi| (-gap * xi.powf(q)).exp());
                for (c, m) in w_hat.data.iter_mut().zip(&mult) {
                    *c *= m * dt;
                }
                for (a, b) in acc.data.iter_mut().zip(&w_hat.data) {
                    *a += b;
                }
            }
            let mut u0_hat = data_spec.clone();
            let mult = multiplier_values(&u0_hat, |xi| (-t_i * xi.powf(q)).exp());
            for (c, m) in u0_hat.data.iter_mut().zip(&mult) {
                *c *= m;
            }
            let duhamel = acc.into_field(None);
            let free = u0_hat.into_field(None);
            let defect =
                (u[i].values[x_idx] - free.values[x_idx] - duhamel.values[x_idx]).abs();
            residual = residual.max(defect);
        }
    }

    let snapshots: Vec<(f64, GridField)> = snap_idx
        .iter()
        .map(|&i| (i as f64 * dt, u[i].clone()))
        .collect();
    Ok(SolveReport {
        converged,
        iterations,
        norm_history,
        ball_history,
        contraction_estimate,
        d_star_functional: contraction.d_star_functional,
        d0_used: cfg.d0,
        dstar_used: cfg.dstar,
        condition_53: contraction.condition_53,
        nu: contraction.nu,
        snapshots,
        residual,
        weight_excluded,
    })
}

/// Similarity rescaling of a field: `u_T(x) = T^{1/(p-1)} u(T^{1/2m} x)`,
/// sampled by trigonometric interpolation in one dimension (multilinear
/// otherwise). The time tag, if any, is divided by `T`. Fails if the dilated
/// argument wraps around the box where the field is non-negligible.
pub fn rescale_field(u: &GridField, t: f64, params: &ProblemParams) -> Result<GridField> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    let amp = t.powf(params.amplitude_scale_exponent());
    let scale = t.powf(params.space_scale_exponent());
    let sup = u.max_abs();
    let l = u.half_width;

    let spec = if u.dim == 1 { Some(u.spectrum()) } else { None };
    let eval = |point: &[f64]| -> f64 {
        if let Some(spec) = &spec {
            // direct trigonometric interpolation; the +L phase accounts for
            // sample index 0 sitting at x = -L
            let mut acc = Complex::new(0.0, 0.0);
            for (k, c) in spec.data.iter().enumerate() {
                let xi = spec.frequency(k);
                acc += c * Complex::new(0.0, xi * (point[0] + l)).exp();
            }
            acc.re / spec.data.len() as f64
        } else {
            u.sample(point)
        }
    };

    let mut out = GridField::zeros(u.dim, u.half_width, u.n)?;
    let mut point = [0.0f64; 3];
    for idx in 0..out.len() {
        out.coords(idx, &mut point);
        let src: Vec<f64> = point[..u.dim].iter().map(|x| x * scale).collect();
        if src.iter().any(|y| y.abs() > l) {
            // periodic wrap: legal only where the field carries no mass
            let wrapped = eval(&src);
            if wrapped.abs() > 1e-8 * sup.max(1e-300) {
                return Err(Error::OutOfBox);
            }
            out.values[idx] = amp * wrapped;
        } else {
            out.values[idx] = amp * eval(&src);
        }
    }
    out.time_tag = u.time_tag.map(|tag| tag / t);
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub eps: f64,
    pub d_star_functional: f64,
    pub nu: f64,
    pub converged: bool,
    /// Sup norm of the solution near the half horizon (NaN if not solved).
    pub sup_mid: f64,
}

/// Mollified-atom sweep: data `mu_eps = D * G_theta(., eps)`, a mass-D bump
/// of width `eps^{1/theta}`, pushed toward the atom as `eps` halves. The
/// growth (or stabilization) of D_* across the sweep reproduces the critical
/// dichotomy.
pub fn delta_sweep(
    spec: &MajorantSpec,
    d_mass: f64,
    eps_list: &[f64],
    cfg: &PicardConfig,
    half_width: f64,
    n: usize,
) -> Result<Vec<SweepRow>> {
    cfg.validate(&spec.params)?;
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("eps list must be strictly decreasing".into()));
    }
    if !(d_mass >= 0.0) {
        return Err(Error::InvalidParameter("mass must be >= 0".into()));
    }
    let params = &spec.params;
    let mut rows = Vec::new();
    for &eps in eps_list {
        if !(eps > 0.0) {
            return Err(Error::NonPositiveTime(eps));
        }
        let density = GridField::from_fn(params.dim, half_width, n, |x| {
            d_mass * spec.gtheta_profile.eval_point(x, eps).expect("eps > 0")
        })?;
        let mu = InitialData::Grid { density };
        let data = initial_field(&mu, params.dim, half_width, n)?;
        let contraction = check_contraction(&data, params, cfg)?;
        if contraction.condition_53.1 || cfg.force {
            let report = picard_solve(&mu, params, cfg, half_width, n)?;
            let mid = report
                .snapshots
                .iter()
                .min_by(|a, b| {
                    let ha = (a.0 - cfg.horizon / 2.0).abs();
                    let hb = (b.0 - cfg.horizon / 2.0).abs();
                    ha.partial_cmp(&hb).unwrap()
                })
                .map(|(_, f)| f.max_abs())
                .unwrap_or(f64::NAN);
            rows.push(SweepRow {
                eps,
                d_star_functional: contraction.d_star_functional,
                nu: contraction.nu,
                converged: report.converged,
                sup_mid: mid,
            });
        } else {
            rows.push(SweepRow {
                eps,
                d_star_functional: contraction.d_star_functional,
                nu: contraction.nu,
                converged: false,
                sup_mid: f64::NAN,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{build_profile, KernelKind};
    use std::f64::consts::PI;

    fn params_m2(p: f64) -> ProblemParams {
        ProblemParams::new(1, 2, p, 1.0).unwrap()
    }

    fn base_cfg() -> PicardConfig {
        PicardConfig {
            horizon: 0.5,
            n_t: 256,
            tol: 1e-10,
            max_iter: 200,
            weight_mode: WeightMode::Linear,
            delta: 0.6,
            m_ball: 1.2,
            d0: 1.0,
            dstar: 1.3,
            force: false,
            seed: 7,
            n_snapshots: 8,
        }
    }

    #[test]
    fn sm_dt_zero_is_identity() {
        let f = GridField::from_fn(1, 4.0, 64, |x| (x[0]).sin()).unwrap();
        let g = apply_sm(&f, 0.0, &params_m2(2.0)).unwrap();
        assert!(f.sup_diff(&g) < 1e-15);
    }

    #[test]
    fn sm_preserves_constants() {
        let f = GridField::from_fn(1, 4.0, 64, |_| 3.25).unwrap();
        for dt in [0.1, 1.0, 10.0] {
            let g = apply_sm(&f, dt, &params_m2(2.0)).unwrap();
            assert!(f.sup_diff(&g) < 1e-12, "dt={dt}");
        }
    }

    #[test]
    fn sm_single_mode_eigenvalue() {
        let l = 5.0;
        let k = PI * 4.0 / l;
        let f = GridField::from_fn(1, l, 128, |x| (k * x[0]).cos()).unwrap();
        let dt = 0.3;
        let g = apply_sm(&f, dt, &params_m2(2.0)).unwrap();
        let factor = (-dt * k.powi(4)).exp();
        for (a, b) in g.values.iter().zip(&f.values) {
            assert!((a - factor * b).abs() < 1e-12);
        }
    }

    #[test]
    fn sm_semigroup_composes() {
        let f = GridField::from_fn(1, 4.0, 64, |x| (-x[0] * x[0]).exp()).unwrap();
        let p = params_m2(2.0);
        let ab = apply_sm(&apply_sm(&f, 0.2, &p).unwrap(), 0.5, &p).unwrap();
        let once = apply_sm(&f, 0.7, &p).unwrap();
        assert!(ab.sup_diff(&once) < 1e-13);
    }

    #[test]
    fn sm_contracts_mean_zero_and_keeps_mean() {
        let f = GridField::from_fn(1, 4.0, 128, |x| (x[0] * 2.1).sin() + 0.7).unwrap();
        let p = params_m2(2.0);
        let g = apply_sm(&f, 0.4, &p).unwrap();
        assert!((g.mean() - f.mean()).abs() < 1e-13);
        let f0 = GridField::from_fn(1, 4.0, 128, |x| (x[0] * 2.1).sin()).unwrap();
        let g0 = apply_sm(&f0, 0.4, &p).unwrap();
        assert!(g0.max_abs() <= f0.max_abs());
    }

    #[test]
    fn sm_breaks_positivity_for_higher_order() {
        let bump = GridField::from_fn(1, 10.0, 512, |x| (-4.0 * x[0] * x[0]).exp()).unwrap();
        let g2 = apply_sm(&bump, 0.5, &params_m2(2.0)).unwrap();
        assert!(g2.min() < -1e-8, "expected negative values, min {}", g2.min());
        let g1 = apply_sm(&bump, 0.5, &ProblemParams::new(1, 1, 2.0, 1.0).unwrap()).unwrap();
        assert!(g1.min() > -1e-12, "heat flow must stay positive, min {}", g1.min());
    }

    #[test]
    fn sk_preserves_constants_exactly() {
        let f = GridField::from_fn(1, 4.0, 64, |_| 1.0).unwrap();
        let g = apply_sk(&f, 0.7, &params_m2(2.0)).unwrap();
        assert!(f.sup_diff(&g) < 1e-12);
    }

    #[test]
    fn sk_measure_atom_is_kernel_sampling() {
        let params = params_m2(2.0);
        let gm = build_profile(KernelKind::Polyharmonic { order: 2 }, 1, 14.0, 128).unwrap();
        let gt = build_profile(KernelKind::Stable { theta: 1.0 }, 1, 400.0, 256).unwrap();
        let spec = MajorantSpec::new(params, gm, gt).unwrap();
        let mu = InitialData::Dirac { location: vec![0.5], mass: 2.0 };
        let field = apply_sk_measure(&spec, &mu, 1.0, 20.0, 256).unwrap();
        let h = field.spacing();
        let idx = 130; // x = -20 + 130 h
        let x = -20.0 + idx as f64 * h;
        let want = 2.0 * spec.eval_k(&[x - 0.5], 1.0).unwrap();
        assert!((field.values[idx] - want).abs() < 1e-14);
    }

    #[test]
    fn sk_matches_dense_quadrature_oracle() {
        let params = params_m2(2.0);
        let gm = build_profile(KernelKind::Polyharmonic { order: 2 }, 1, 14.0, 128).unwrap();
        let gt = build_profile(KernelKind::Stable { theta: 1.0 }, 1, 400.0, 256).unwrap();
        let spec = MajorantSpec::new(params, gm, gt).unwrap();
        let n = 1 << 13;
        let l = 400.0;
        let f = GridField::from_fn(1, l, n, |x| (-x[0] * x[0]).exp()).unwrap();
        let t = 1.0;
        let conv = apply_sk(&f, t, &spec.params).unwrap();
        let h = conv.spacing();
        for probe_x in [0.0f64, 1.5, -3.0] {
            let idx = ((probe_x + l) / h).round() as usize;
            let x = -l + idx as f64 * h;
            let oracle = crate::quad::integrate_uniform(-9.0, 9.0, 64, &mut |y: f64| {
                spec.eval_k(&[x - y], t).unwrap() * (-y * y).exp()
            });
            assert!(
                (conv.values[idx] - oracle).abs() < 1e-5,
                "x={x}: {} vs {oracle}",
                conv.values[idx]
            );
        }
    }

    #[test]
    fn contraction_zero_data() {
        let data = GridField::zeros(1, 4.0, 64).unwrap();
        let rep = check_contraction(&data, &params_m2(2.0), &base_cfg()).unwrap();
        assert_eq!(rep.d_star_functional, 0.0);
        assert_eq!(rep.nu, 0.0);
        assert!(rep.condition_53.0 && rep.condition_53.1);
    }

    #[test]
    fn contraction_constant_data_closed_form() {
        // constant data c: U(s) = 2 d0 c for every s, so
        // D_* = T (2 d0 c)^{p-1} exactly.
        let c = 0.1;
        let cfg = base_cfg();
        let data = GridField::from_fn(1, 4.0, 64, |_| c).unwrap();
        let p = params_m2(2.0);
        let rep = check_contraction(&data, &p, &cfg).unwrap();
        let want = cfg.horizon * (2.0 * cfg.d0 * c).powf(p.exponent - 1.0);
        assert!(
            (rep.d_star_functional - want).abs() / want < 1e-10,
            "{} vs {want}",
            rep.d_star_functional
        );
    }

    #[test]
    fn picard_zero_data_one_iteration() {
        let mu = InitialData::Power { c: 0.0, a: 0.0, cutoff: 1.0 };
        let rep = picard_solve(&mu, &params_m2(2.0), &base_cfg(), 4.0, 64).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        for (_, f) in &rep.snapshots {
            assert_eq!(f.max_abs(), 0.0);
        }
    }

    #[test]
    fn picard_matches_ode_oracle() {
        // homogeneous data: the multiplier is trivial on constants and the
        // equation collapses to v' = v^p
        let c = 0.1;
        let p = params_m2(2.0);
        let mut cfg = base_cfg();
        cfg.n_t = 512;
        let mu = InitialData::Power { c, a: 0.0, cutoff: 1e9 };
        let rep = picard_solve(&mu, &p, &cfg, 1.0, 16).unwrap();
        assert!(rep.converged, "norms {:?}", rep.norm_history);
        let (t, field) = rep.snapshots.last().unwrap();
        let exact = c / (1.0 - c * t);
        let err = (field.values[0] - exact).abs();
        assert!(err < 5.0 * 2.77 * c * c * cfg.horizon / cfg.n_t as f64 + 1e-6,
            "err {err} at t={t}");
        // convergence order: doubling n_t improves the ODE error
        cfg.n_t = 256;
        let rep2 = picard_solve(&mu, &p, &cfg, 1.0, 16).unwrap();
        let (t2, field2) = rep2.snapshots.last().unwrap();
        let err2 = (field2.values[0] - c / (1.0 - c * t2)).abs();
        assert!(err2 / err > 1.5, "coarse {err2} vs fine {err}");
    }

    #[test]
    fn picard_contraction_observed_below_nu() {
        let c = 0.05;
        let p = params_m2(2.0);
        let cfg = base_cfg();
        let mu = InitialData::Power { c, a: 0.0, cutoff: 1e9 };
        let rep = picard_solve(&mu, &p, &cfg, 1.0, 16).unwrap();
        assert!(rep.converged);
        assert!(rep.nu < 1.0);
        assert!(
            rep.contraction_estimate <= rep.nu * 1.1,
            "observed {} vs nu {}",
            rep.contraction_estimate,
            rep.nu
        );
        for b in &rep.ball_history {
            assert!(*b <= cfg.m_ball, "ball violated: {b}");
        }
        assert!(rep.residual < 10.0 * cfg.tol, "residual {}", rep.residual);
    }

    #[test]
    fn picard_refuses_without_contraction() {
        let c = 10.0;
        let p = params_m2(2.0);
        let cfg = base_cfg();
        let mu = InitialData::Power { c, a: 0.0, cutoff: 1e9 };
        assert!(matches!(
            picard_solve(&mu, &p, &cfg, 1.0, 16),
            Err(Error::NoContraction { .. })
        ));
    }

    #[test]
    fn rescale_identity_at_unit_horizon() {
        let p = params_m2(3.0);
        let f = GridField::from_fn(1, 8.0, 256, |x| (-x[0] * x[0]).exp()).unwrap();
        let g = rescale_field(&f, 1.0, &p).unwrap();
        assert!(f.sup_diff(&g) < 1e-10);
    }

    #[test]
    fn rescale_round_trip() {
        let p = params_m2(3.0);
        let f = GridField::from_fn(1, 8.0, 256, |x| (-x[0] * x[0]).exp()).unwrap();
        let g = rescale_field(&f, 2.0, &p).unwrap();
        let back = rescale_field(&g, 0.5, &p).unwrap();
        assert!(f.sup_diff(&back) < 1e-6, "round trip error {}", f.sup_diff(&back));
    }

    #[test]
    fn rescale_rejects_escaping_mass() {
        let p = params_m2(3.0);
        // field with mass near the boundary: dilation wraps it around
        let f = GridField::from_fn(1, 4.0, 128, |x| 1.0 / (1.0 + x[0] * x[0])).unwrap();
        assert!(matches!(rescale_field(&f, 1e6, &p), Err(Error::OutOfBox)));
    }

    #[test]
    fn delta_sweep_rows_and_zero_mass() {
        let params = params_m2(3.0);
        let gm = build_profile(KernelKind::Polyharmonic { order: 2 }, 1, 14.0, 128).unwrap();
        let gt = build_profile(KernelKind::Stable { theta: 1.0 }, 1, 400.0, 256).unwrap();
        let spec = MajorantSpec::new(params, gm, gt).unwrap();
        let mut cfg = base_cfg();
        cfg.horizon = 1.0;
        cfg.n_t = 64;
        cfg.tol = 1e-8;
        let rows = delta_sweep(&spec, 0.0, &[0.5, 0.25, 0.125, 0.0625], &cfg, 20.0, 1 << 11)
            .unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.converged && r.d_star_functional == 0.0));
        let rows = delta_sweep(&spec, 0.05, &[0.5, 0.25], &cfg, 20.0, 1 << 11).unwrap();
        assert!(rows.iter().all(|r| r.converged && r.nu < 1.0));
        assert!(rows[1].d_star_functional > rows[0].d_star_functional);
    }
}
