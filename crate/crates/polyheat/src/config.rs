//! Plain-text `key = value` run configuration.
//!
//! Every knob of every subcommand lives here with a default, so a config
//! file (or a chain of `--set key=value` overrides) fully determines a run.
//! The normalized rendering is canonical: parsing it back yields an
//! identical struct, and its hash is stamped into every CSV the tools emit.

use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::solver::{PicardConfig, WeightMode};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // problem
    pub dim: usize,
    pub order: usize,
    pub exponent: f64,
    pub theta: f64,
    // grid
    pub half_width: f64,
    pub n: usize,
    pub n_t: usize,
    // solver
    pub horizon: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub n_snapshots: usize,
    pub weight_mode: String,
    pub alpha: f64,
    pub beta: f64,
    pub orlicz_l: f64,
    pub delta: f64,
    pub m_ball: f64,
    pub d0: f64,
    pub dstar: f64,
    pub force: bool,
    // classifier thresholds
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma_alpha: f64,
    pub gamma_orlicz: f64,
    // kernel profiles
    pub gm_rmax: f64,
    pub gm_resolution: usize,
    pub gtheta_rmax: f64,
    pub gtheta_resolution: usize,
    // data and sweep
    pub data: String,
    pub sweep_mass: f64,
    pub sweep_eps_count: usize,
    // plumbing
    pub cache_dir: String,
    pub output_dir: String,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: 1,
            order: 2,
            exponent: 3.0,
            theta: 1.0,
            half_width: 20.0,
            n: 1 << 10,
            n_t: 1 << 10,
            horizon: 0.5,
            tol: 1e-8,
            max_iter: 200,
            n_snapshots: 8,
            weight_mode: "linear".into(),
            alpha: 0.0, // 0 = pick (1+p)/2
            beta: 1.0,
            orlicz_l: std::f64::consts::E,
            delta: 0.6,
            m_ball: 1.2,
            d0: 1.1,
            dstar: 1.4,
            force: false,
            gamma2: 0.05,
            gamma3: 0.05,
            gamma_alpha: 0.05,
            gamma_orlicz: 0.05,
            gm_rmax: 14.0,
            gm_resolution: 128,
            gtheta_rmax: 400.0,
            gtheta_resolution: 256,
            data: "kind=dirac mass=1".into(),
            sweep_mass: 0.05,
            sweep_eps_count: 6,
            cache_dir: ".polyheat-cache".into(),
            output_dir: ".".into(),
            seed: 7,
        }
    }
}

fn fmt_f64(v: f64) -> String {
    // shortest round-trip decimal form; canonical for hashing
    format!("{v:?}")
}

impl RunConfig {
    /// All keys with their canonical value rendering, sorted by key.
    fn entries(&self) -> Vec<(&'static str, String)> {
        let mut rows = vec![
            ("alpha", fmt_f64(self.alpha)),
            ("beta", fmt_f64(self.beta)),
            ("cache_dir", self.cache_dir.clone()),
            ("d0", fmt_f64(self.d0)),
            ("data", self.data.clone()),
            ("delta", fmt_f64(self.delta)),
            ("dim", self.dim.to_string()),
            ("dstar", fmt_f64(self.dstar)),
            ("exponent", fmt_f64(self.exponent)),
            ("force", self.force.to_string()),
            ("gamma2", fmt_f64(self.gamma2)),
            ("gamma3", fmt_f64(self.gamma3)),
            ("gamma_alpha", fmt_f64(self.gamma_alpha)),
            ("gamma_orlicz", fmt_f64(self.gamma_orlicz)),
            ("gm_resolution", self.gm_resolution.to_string()),
            ("gm_rmax", fmt_f64(self.gm_rmax)),
            ("gtheta_resolution", self.gtheta_resolution.to_string()),
            ("gtheta_rmax", fmt_f64(self.gtheta_rmax)),
            ("half_width", fmt_f64(self.half_width)),
            ("horizon", fmt_f64(self.horizon)),
            ("m_ball", fmt_f64(self.m_ball)),
            ("max_iter", self.max_iter.to_string()),
            ("n", self.n.to_string()),
            ("n_snapshots", self.n_snapshots.to_string()),
            ("n_t", self.n_t.to_string()),
            ("order", self.order.to_string()),
            ("orlicz_l", fmt_f64(self.orlicz_l)),
            ("output_dir", self.output_dir.clone()),
            ("seed", self.seed.to_string()),
            ("sweep_eps_count", self.sweep_eps_count.to_string()),
            ("sweep_mass", fmt_f64(self.sweep_mass)),
            ("theta", fmt_f64(self.theta)),
            ("tol", fmt_f64(self.tol)),
            ("weight_mode", self.weight_mode.clone()),
        ];
        rows.sort_by_key(|(k, _)| *k);
        rows
    }

    /// Canonical text rendering; `parse` of this is the identity.
    pub fn normalized(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        }
        out
    }

    /// Short hash of the normalized form, stamped into output files.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.normalized().as_bytes());
        let digest = hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        hex[..16].to_string()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("bad value for {what}: {value:?}"));
        macro_rules! num {
            ($field:ident, $what:expr) => {
                self.$field = value.trim().parse().map_err(|_| bad($what))?
            };
        }
        match key.trim() {
            "dim" => num!(dim, "dim"),
            "order" => num!(order, "order"),
            "exponent" => num!(exponent, "exponent"),
            "theta" => num!(theta, "theta"),
            "half_width" => num!(half_width, "half_width"),
            "n" => num!(n, "n"),
            "n_t" => num!(n_t, "n_t"),
            "horizon" => num!(horizon, "horizon"),
            "tol" => num!(tol, "tol"),
            "max_iter" => num!(max_iter, "max_iter"),
            "n_snapshots" => num!(n_snapshots, "n_snapshots"),
            "weight_mode" => {
                let v = value.trim();
                if !["linear", "alpha", "orlicz"].contains(&v) {
                    return Err(bad("weight_mode"));
                }
                self.weight_mode = v.to_string();
            }
            "alpha" => num!(alpha, "alpha"),
            "beta" => num!(beta, "beta"),
            "orlicz_l" => num!(orlicz_l, "orlicz_l"),
            "delta" => num!(delta, "delta"),
            "m_ball" => num!(m_ball, "m_ball"),
            "d0" => num!(d0, "d0"),
            "dstar" => num!(dstar, "dstar"),
            "force" => num!(force, "force"),
            "gamma2" => num!(gamma2, "gamma2"),
            "gamma3" => num!(gamma3, "gamma3"),
            "gamma_alpha" => num!(gamma_alpha, "gamma_alpha"),
            "gamma_orlicz" => num!(gamma_orlicz, "gamma_orlicz"),
            "gm_rmax" => num!(gm_rmax, "gm_rmax"),
            "gm_resolution" => num!(gm_resolution, "gm_resolution"),
            "gtheta_rmax" => num!(gtheta_rmax, "gtheta_rmax"),
            "gtheta_resolution" => num!(gtheta_resolution, "gtheta_resolution"),
            "data" => self.data = value.trim().to_string(),
            "sweep_mass" => num!(sweep_mass, "sweep_mass"),
            "sweep_eps_count" => num!(sweep_eps_count, "sweep_eps_count"),
            "cache_dir" => self.cache_dir = value.trim().to_string(),
            "output_dir" => self.output_dir = value.trim().to_string(),
            "seed" => num!(seed, "seed"),
            other => return Err(Error::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Parse `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            cfg.set(key, value)?;
        }
        Ok(cfg)
    }

    pub fn params(&self) -> Result<ProblemParams> {
        ProblemParams::new(self.dim, self.order, self.exponent, self.theta)
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn weight_mode(&self) -> Result<WeightMode> {
        Ok(match self.weight_mode.as_str() {
            "linear" => WeightMode::Linear,
            "alpha" => {
                let alpha = if self.alpha == 0.0 {
                    (1.0 + self.exponent) / 2.0
                } else {
                    self.alpha
                };
                WeightMode::Alpha { alpha }
            }
            "orlicz" => WeightMode::Orlicz { beta: self.beta, l: self.orlicz_l },
            other => return Err(Error::Config(format!("unknown weight mode {other:?}"))),
        })
    }

    pub fn picard(&self) -> Result<PicardConfig> {
        let cfg = PicardConfig {
            horizon: self.horizon,
            n_t: self.n_t,
            tol: self.tol,
            max_iter: self.max_iter,
            weight_mode: self.weight_mode()?,
            delta: self.delta,
            m_ball: self.m_ball,
            d0: self.d0,
            dstar: self.dstar,
            force: self.force,
            seed: self.seed,
            n_snapshots: self.n_snapshots,
        };
        cfg.validate(&self.params()?)
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Cache directory with the POLYHEAT_CACHE environment override.
    pub fn effective_cache_dir(&self) -> std::path::PathBuf {
        match std::env::var("POLYHEAT_CACHE") {
            Ok(dir) if !dir.is_empty() => dir.into(),
            _ => self.cache_dir.clone().into(),
        }
    }

    /// Full validation against downstream preconditions; everything a
    /// subcommand will touch must be rejected here, before any computation.
    pub fn validate(&self) -> Result<()> {
        self.params()?;
        if !(self.half_width > 0.0) {
            return Err(Error::Config("half_width must be > 0".into()));
        }
        if !self.n.is_power_of_two() || self.n < 16 {
            return Err(Error::Config("n must be a power of two >= 16".into()));
        }
        self.picard()?;
        for (name, g) in [
            ("gamma2", self.gamma2),
            ("gamma3", self.gamma3),
            ("gamma_alpha", self.gamma_alpha),
            ("gamma_orlicz", self.gamma_orlicz),
        ] {
            if !(g > 0.0) {
                return Err(Error::Config(format!("{name} must be > 0")));
            }
        }
        if self.gm_resolution < 64 || self.gtheta_resolution < 64 {
            return Err(Error::Config("profile resolution must be >= 64".into()));
        }
        if !(self.gm_rmax > 0.01) || !(self.gtheta_rmax > 0.01) {
            return Err(Error::Config("profile r_max too small".into()));
        }
        if !(self.sweep_mass >= 0.0) {
            return Err(Error::Config("sweep_mass must be >= 0".into()));
        }
        if self.sweep_eps_count == 0 || self.sweep_eps_count > 20 {
            return Err(Error::Config("sweep_eps_count must be in 1..=20".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.set("exponent", "2.5").unwrap();
        cfg.set("n", "64").unwrap();
        cfg.set("data", "kind=power c=0.1 a=0.5 cutoff=1").unwrap();
        let text = cfg.normalized();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(back.normalized(), text);
        assert_eq!(cfg.hash(), back.hash());
    }

    #[test]
    fn hash_is_sensitive_to_values() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        b.set("seed", "8").unwrap();
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(
            RunConfig::parse("no_such_key = 1\n"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn validation_rejects_downstream_violations() {
        let mut cfg = RunConfig::default();
        cfg.set("n", "100").unwrap(); // not a power of two
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.set("tol", "-1").unwrap();
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.set("theta", "2.5").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let cfg = RunConfig::parse("# a comment\n\nseed = 11 # trailing\n").unwrap();
        assert_eq!(cfg.seed, 11);
    }

    #[test]
    fn env_overrides_cache_dir() {
        let cfg = RunConfig::default();
        std::env::set_var("POLYHEAT_CACHE", "/tmp/ph-test-cache");
        assert_eq!(
            cfg.effective_cache_dir(),
            std::path::PathBuf::from("/tmp/ph-test-cache")
        );
        std::env::remove_var("POLYHEAT_CACHE");
        assert_eq!(
            cfg.effective_cache_dir(),
            std::path::PathBuf::from(".polyheat-cache")
        );
    }
}
