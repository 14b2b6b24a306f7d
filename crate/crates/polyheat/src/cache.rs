//! On-disk cache of radial kernel profiles.
//!
//! Versioned text records: a header line with the build parameters and a
//! checksum of the payload, tail parameters, then one `radius value` row per
//! node. Writes go through a temporary file and an atomic rename so
//! concurrent readers never observe a partial record.

use crate::error::{Error, Result};
use crate::profile::{build_profile, KernelKind, QuadMeta, RadialKernelProfile, TailModel};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

const FORMAT_VERSION: u32 = 1;

fn kind_tag(kind: KernelKind) -> (String, f64) {
    match kind {
        KernelKind::Polyharmonic { order } => ("polyharmonic".into(), order as f64),
        KernelKind::Stable { theta } => ("stable".into(), theta),
    }
}

/// Cache file name for a profile request.
pub fn cache_file_name(kind: KernelKind, dim: usize, r_max: f64, resolution: usize) -> String {
    let (tag, param) = kind_tag(kind);
    format!("profile-v{FORMAT_VERSION}-{tag}-{param}-n{dim}-rmax{r_max}-res{resolution}.txt")
}

fn payload(profile: &RadialKernelProfile) -> String {
    let mut body = String::new();
    match &profile.tail {
        TailModel::Stretched { amplitude, rate, exponent } => {
            body.push_str(&format!("tail stretched {amplitude:.17e} {rate:.17e} {exponent:.17e}\n"));
        }
        TailModel::PowerLaw { amplitude, exponent } => {
            body.push_str(&format!("tail powerlaw {amplitude:.17e} {exponent:.17e}\n"));
        }
    }
    for (r, v) in profile.radii.iter().zip(&profile.values) {
        body.push_str(&format!("{r:.17e} {v:.17e}\n"));
    }
    body
}

fn checksum(body: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(body.as_bytes());
    format!("{:x}", hasher.finalize())
}

/// Serialize a profile into the cache directory (atomic rename).
pub fn store(
    dir: &Path,
    profile: &RadialKernelProfile,
    requested_resolution: usize,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let (tag, param) = kind_tag(profile.kind);
    let body = payload(profile);
    let header = format!(
        "polyheat-profile v{FORMAT_VERSION} kind={tag} param={param} dim={} rmax={:.17e} \
         resolution={} rows={} sha256={}\n",
        profile.dim,
        profile.quad_meta.r_max,
        profile.quad_meta.resolution,
        profile.radii.len(),
        checksum(&body),
    );
    let path = dir.join(cache_file_name(
        profile.kind,
        profile.dim,
        profile.quad_meta.r_max,
        requested_resolution,
    ));
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(header.as_bytes())?;
        f.write_all(body.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, &path)?;
    Ok(path)
}

fn header_field<'a>(fields: &'a [&str], key: &str) -> Result<&'a str> {
    fields
        .iter()
        .find_map(|f| f.strip_prefix(key).and_then(|rest| rest.strip_prefix('=')))
        .ok_or_else(|| Error::CacheFormat(format!("missing header field {key}")))
}

/// Load a cached profile if present. `Ok(None)` when the file does not
/// exist; corrupt or mismatched records are a `CacheFormat` error.
pub fn load(
    dir: &Path,
    kind: KernelKind,
    dim: usize,
    r_max: f64,
    resolution: usize,
) -> Result<Option<RadialKernelProfile>> {
    let path = dir.join(cache_file_name(kind, dim, r_max, resolution));
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let (header, body) = text
        .split_once('\n')
        .ok_or_else(|| Error::CacheFormat("empty cache file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&"polyheat-profile")
        || fields.get(1) != Some(&format!("v{FORMAT_VERSION}").as_str())
    {
        return Err(Error::CacheFormat("unknown cache record version".into()));
    }
    let (want_tag, want_param) = kind_tag(kind);
    if header_field(&fields, "kind")? != want_tag {
        return Err(Error::CacheFormat("kernel kind mismatch".into()));
    }
    let param: f64 = header_field(&fields, "param")?
        .parse()
        .map_err(|_| Error::CacheFormat("bad param".into()))?;
    if (param - want_param).abs() > 1e-12 {
        return Err(Error::CacheFormat("kernel parameter mismatch".into()));
    }
    let got_dim: usize = header_field(&fields, "dim")?
        .parse()
        .map_err(|_| Error::CacheFormat("bad dim".into()))?;
    if got_dim != dim {
        return Err(Error::CacheFormat("dimension mismatch".into()));
    }
    let got_rmax: f64 = header_field(&fields, "rmax")?
        .parse()
        .map_err(|_| Error::CacheFormat("bad rmax".into()))?;
    if (got_rmax - r_max).abs() > 1e-9 * r_max {
        return Err(Error::CacheFormat("r_max mismatch".into()));
    }
    let stored_res: usize = header_field(&fields, "resolution")?
        .parse()
        .map_err(|_| Error::CacheFormat("bad resolution".into()))?;
    let rows: usize = header_field(&fields, "rows")?
        .parse()
        .map_err(|_| Error::CacheFormat("bad row count".into()))?;
    let sum = header_field(&fields, "sha256")?;
    if checksum(body) != sum {
        return Err(Error::CacheFormat("checksum mismatch".into()));
    }

    let mut lines = body.lines();
    let tail_line = lines
        .next()
        .ok_or_else(|| Error::CacheFormat("missing tail line".into()))?;
    let tp: Vec<&str> = tail_line.split_whitespace().collect();
    let tail = match tp.as_slice() {
        ["tail", "stretched", a, r, e] => TailModel::Stretched {
            amplitude: a.parse().map_err(|_| Error::CacheFormat("bad tail".into()))?,
            rate: r.parse().map_err(|_| Error::CacheFormat("bad tail".into()))?,
            exponent: e.parse().map_err(|_| Error::CacheFormat("bad tail".into()))?,
        },
        ["tail", "powerlaw", a, e] => TailModel::PowerLaw {
            amplitude: a.parse().map_err(|_| Error::CacheFormat("bad tail".into()))?,
            exponent: e.parse().map_err(|_| Error::CacheFormat("bad tail".into()))?,
        },
        _ => return Err(Error::CacheFormat("unrecognized tail model".into())),
    };
    let mut radii = Vec::with_capacity(rows);
    let mut values = Vec::with_capacity(rows);
    for line in lines {
        let (r, v) = line
            .split_once(' ')
            .ok_or_else(|| Error::CacheFormat("bad data row".into()))?;
        radii.push(r.parse().map_err(|_| Error::CacheFormat("bad radius".into()))?);
        values.push(v.parse().map_err(|_| Error::CacheFormat("bad value".into()))?);
    }
    if radii.len() != rows {
        return Err(Error::CacheFormat(format!(
            "row count mismatch: header {rows}, found {}",
            radii.len()
        )));
    }
    let profile = RadialKernelProfile::from_parts(
        kind,
        dim,
        radii,
        values,
        tail,
        QuadMeta { resolution: stored_res, r_max: got_rmax },
    )
    .map_err(|e| Error::CacheFormat(format!("invalid cached table: {e}")))?;
    Ok(Some(profile))
}

/// Load a profile from the cache or build and store it. The boolean reports
/// a cache hit.
pub fn load_or_build(
    dir: &Path,
    kind: KernelKind,
    dim: usize,
    r_max: f64,
    resolution: usize,
) -> Result<(RadialKernelProfile, bool)> {
    if let Some(profile) = load(dir, kind, dim, r_max, resolution)? {
        return Ok((profile, true));
    }
    let profile = build_profile(kind, dim, r_max, resolution)?;
    store(dir, &profile, resolution)?;
    Ok((profile, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_evaluation() {
        let dir = tempfile::tempdir().unwrap();
        let kind = KernelKind::Stable { theta: 1.0 };
        let (built, hit) = load_or_build(dir.path(), kind, 1, 50.0, 64).unwrap();
        assert!(!hit);
        let (loaded, hit) = load_or_build(dir.path(), kind, 1, 50.0, 64).unwrap();
        assert!(hit);
        for r in [0.0, 0.37, 1.0, 5.0, 49.0, 120.0] {
            let a = built.interp(r);
            let b = loaded.interp(r);
            assert!((a - b).abs() <= 1e-15 * a.abs().max(1e-300), "r={r}: {a} vs {b}");
        }
        assert_eq!(built.radii.len(), loaded.radii.len());
    }

    #[test]
    fn missing_file_is_none() {
        let dir = tempfile::tempdir().unwrap();
        let got = load(dir.path(), KernelKind::Stable { theta: 1.0 }, 1, 50.0, 64).unwrap();
        assert!(got.is_none());
    }

    #[test]
    fn corrupt_record_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let kind = KernelKind::Stable { theta: 1.0 };
        load_or_build(dir.path(), kind, 1, 50.0, 64).unwrap();
        let path = dir.path().join(cache_file_name(kind, 1, 50.0, 64));
        let mut text = std::fs::read_to_string(&path).unwrap();
        text.push_str("0.5 0.5\n");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(
            load(dir.path(), kind, 1, 50.0, 64),
            Err(Error::CacheFormat(_))
        ));
    }

    #[test]
    fn parameter_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let kind = KernelKind::Stable { theta: 1.0 };
        load_or_build(dir.path(), kind, 1, 50.0, 64).unwrap();
        // same file name cannot collide across parameters, but a renamed
        // record with wrong contents must fail the header check
        let src = dir.path().join(cache_file_name(kind, 1, 50.0, 64));
        let other = KernelKind::Stable { theta: 1.5 };
        let dst = dir.path().join(cache_file_name(other, 1, 50.0, 64));
        std::fs::copy(&src, &dst).unwrap();
        assert!(matches!(
            load(dir.path(), other, 1, 50.0, 64),
            Err(Error::CacheFormat(_))
        ));
    }
}
