//! Growth of norms under the normal dilation `f ↦ f(r·)`.

use crate::error::{Error, Result};
use crate::normlab::mesh::{combine, GradedMesh};
use crate::normlab::norms::{NormFamily, NormSpec};
use crate::normlab::probe::ProbeConfig;
use crate::normlab::spectral::Spectrum;
use crate::normlab::testfam::TestFunction;
use crate::operator::GridFunction;

/// `4^{-4}, 4^{-3}, …, 4^4`.
pub fn default_radii() -> Vec<f64> {
    (-4..=4).map(|e| 4f64.powi(e)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DilationRow {
    pub r: f64,
    pub norm: f64,
    /// `‖f(r·)‖ / ‖f‖`.
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct DilationReport {
    pub spec: NormSpec,
    pub function_id: String,
    pub rows: Vec<DilationRow>,
    /// Least-squares slope of `log ratio` against `log r` over all radii.
    pub slope: f64,
    /// The same fit restricted to `r <= 1` and to `r >= 1`.
    pub slope_small: f64,
    pub slope_large: f64,
}

impl DilationReport {
    /// Smallest `M` with `ratio <= C(r^{-M} + r^M)` suggested by the fits.
    pub fn growth_exponent(&self) -> f64 {
        self.slope_small.abs().max(self.slope_large.abs())
    }
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(num, den), (x, y)| (num + (x - mx) * (y - my), den + (x - mx) * (x - mx)));
    num / den
}

/// Half-line `W^{k,p}` norm of `x ↦ f(rx)` on a graded mesh.
fn sobolev_dilated(f: &TestFunction, k: u32, p: f64, r: f64, cfg: &ProbeConfig) -> Result<f64> {
    let hi = f.support().1;
    if !(hi > 0.0) {
        return Err(Error::InvalidParameter(format!("{} does not reach the half line", f.id())));
    }
    let mesh = GradedMesh::new(cfg.mesh_floor.min(cfg.mesh_floor / r), hi / r, cfg.per_decade)?;
    let parts: Vec<f64> = (0..=k as usize)
        .map(|g| {
            let scale = r.powi(g as i32);
            let v: Vec<f64> = mesh.nodes().iter().map(|&x| scale * f.derivative(g, r * x)).collect();
            mesh.lp(&v, p)
        })
        .collect();
    Ok(combine(&parts, p))
}

/// Spectral norm of the full-line representative dilated by `r`.
fn spectral_dilated(f: &TestFunction, spec: &NormSpec, r: f64, cfg: &ProbeConfig) -> Result<f64> {
    let (lo, hi) = f.support();
    let h = (1.0 / (2.0 * cfg.oversample * f.bandwidth() * r)).min(0.02);
    let (lo, hi) = (lo / r, hi / r);
    let n = (((hi - lo) / h).ceil() as usize + 32).next_power_of_two();
    if n > 1usize << cfg.max_torus_log2 {
        return Err(Error::GridTooCoarse { needed: n, have: 1usize << cfg.max_torus_log2 });
    }
    let start = (lo / h).floor() as i64 - 16;
    let g = GridFunction::sample_1d(|x| f.eval(r * x), start, n, h)?;
    let sp = Spectrum::new(&g)?;
    let value = match spec.family {
        NormFamily::Besov => sp.besov(spec.p, spec.q, spec.order, spec.levels)?,
        _ => sp.triebel_diag(spec.p, spec.order, spec.levels)?,
    };
    Ok(value.value)
}

/// Norms of `f(r·)` for each radius, relative to `r = 1`, with log-log fits.
pub fn dilation_growth_probe(spec: &NormSpec, f: &TestFunction, radii: &[f64], cfg: &ProbeConfig) -> Result<DilationReport> {
    if radii.len() < 2 || radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidParameter("dilation probes need at least two positive radii".into()));
    }
    let norm = |r: f64| match spec.family {
        NormFamily::Lp | NormFamily::Sobolev => sobolev_dilated(f, spec.k() as u32, spec.p, r, cfg),
        NormFamily::Besov | NormFamily::TriebelDiag => spectral_dilated(f, spec, r, cfg),
        _ => Err(Error::InvalidParameter(format!("dilation probes do not support {}", spec.family.name()))),
    };
    let base = norm(1.0)?;
    if !(base > 0.0) {
        return Err(Error::InvalidParameter(format!("{} has zero norm", f.id())));
    }
    let rows = radii
        .iter()
        .map(|&r| norm(r).map(|n| DilationRow { r, norm: n, ratio: n / base }))
        .collect::<Result<Vec<_>>>()?;
    let fit = |keep: &dyn Fn(f64) -> bool| {
        let pts: Vec<(f64, f64)> = rows.iter().filter(|w| keep(w.r)).map(|w| (w.r.ln(), w.ratio.ln())).collect();
        if pts.len() < 2 {
            f64::NAN
        } else {
            fit_slope(&pts)
        }
    };
    Ok(DilationReport {
        spec: *spec,
        function_id: f.id().into(),
        slope: fit(&|_| true),
        slope_small: fit(&|r| r <= 1.0),
        slope_large: fit(&|r| r >= 1.0),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normlab::testfam::test_family;

    #[test]
    fn lp_slopes_follow_change_of_variables() {
        let fam = test_family();
        let cfg = ProbeConfig::default();
        for p in [1.0, 2.0, f64::INFINITY] {
            let rep = dilation_growth_probe(&NormSpec::lp(p).unwrap(), &fam[3], &default_radii(), &cfg).unwrap();
            let want = if p.is_infinite() { 0.0 } else { -1.0 / p };
            assert!((rep.slope - want).abs() < 0.01, "p={p}: {}", rep.slope);
        }
    }

    #[test]
    fn sobolev_growth_at_large_radii() {
        let fam = test_family();
        let rep = dilation_growth_probe(&NormSpec::sobolev(1, 2.0).unwrap(), &fam[0], &default_radii(), &ProbeConfig::default()).unwrap();
        assert!(rep.slope_large <= 0.55, "{}", rep.slope_large);
        assert!(rep.slope_small < 0.0, "{}", rep.slope_small);
    }

    #[test]
    fn besov_growth_is_polynomial() {
        let fam = test_family();
        let spec = NormSpec::besov(2.0, 2.0, 0.5).unwrap();
        let rep = dilation_growth_probe(&spec, &fam[0], &default_radii(), &ProbeConfig::default()).unwrap();
        assert!(rep.growth_exponent() < 2.0, "{rep:?}");
    }

    #[test]
    fn bad_radii() {
        let fam = test_family();
        assert!(dilation_growth_probe(&NormSpec::lp(2.0).unwrap(), &fam[0], &[1.0], &ProbeConfig::default()).is_err());
        assert!(dilation_growth_probe(&NormSpec::holder(0, 0.5).unwrap(), &fam[0], &[1.0, 2.0], &ProbeConfig::default()).is_err());
        assert_eq!(fit_slope(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]), 2.0);
    }
}
