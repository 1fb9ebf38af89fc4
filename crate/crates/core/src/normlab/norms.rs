//! Grid estimators for `L^p`, `W^{k,p}` and Hölder norms.

use crate::error::{Error, Result};
use crate::normlab::mesh::combine;
use crate::operator::GridFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormFamily {
    Lp,
    Sobolev,
    NegSobolevUpper,
    Holder,
    Besov,
    TriebelDiag,
}

impl NormFamily {
    pub fn name(self) -> &'static str {
        match self {
            NormFamily::Lp => "lp",
            NormFamily::Sobolev => "sobolev",
            NormFamily::NegSobolevUpper => "neg-sobolev-upper",
            NormFamily::Holder => "holder",
            NormFamily::Besov => "besov",
            NormFamily::TriebelDiag => "triebel-diag",
        }
    }
}

/// Which norm to estimate. `order` is `k` (integer families) or `s`;
/// for Hölder specs `order = k + s` with `s ∈ (0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormSpec {
    pub family: NormFamily,
    pub order: f64,
    pub p: f64,
    pub q: f64,
    /// Littlewood–Paley levels; `None` picks enough to reach the grid's Nyquist frequency.
    pub levels: Option<usize>,
}

fn check_exponent(name: &str, p: f64) -> Result<()> {
    if p > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must lie in (0, ∞], got {p}")))
    }
}

impl NormSpec {
    pub fn lp(p: f64) -> Result<Self> {
        check_exponent("p", p)?;
        Ok(NormSpec { family: NormFamily::Lp, order: 0.0, p, q: p, levels: None })
    }

    pub fn sobolev(k: u32, p: f64) -> Result<Self> {
        check_exponent("p", p)?;
        Ok(NormSpec { family: NormFamily::Sobolev, order: k as f64, p, q: p, levels: None })
    }

    pub fn neg_sobolev(k: i32, p: f64) -> Result<Self> {
        check_exponent("p", p)?;
        if k >= 0 {
            return Err(Error::InvalidParameter(format!("negative-order spec needs k < 0, got {k}")));
        }
        Ok(NormSpec { family: NormFamily::NegSobolevUpper, order: k as f64, p, q: p, levels: None })
    }

    pub fn holder(k: u32, s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidParameter(format!("Hölder exponent must lie in (0, 1), got {s}")));
        }
        Ok(NormSpec { family: NormFamily::Holder, order: k as f64 + s, p: f64::INFINITY, q: f64::INFINITY, levels: None })
    }

    pub fn besov(p: f64, q: f64, s: f64) -> Result<Self> {
        check_exponent("p", p)?;
        check_exponent("q", q)?;
        if !s.is_finite() {
            return Err(Error::InvalidParameter("smoothness must be finite".into()));
        }
        Ok(NormSpec { family: NormFamily::Besov, order: s, p, q, levels: None })
    }

    /// The diagonal Triebel–Lizorkin norm `F^s_{pp}`; only `q = p` is supported.
    pub fn triebel_diag(p: f64, q: f64, s: f64) -> Result<Self> {
        check_exponent("p", p)?;
        if q != p {
            return Err(Error::InvalidParameter(format!("triebel-diag requires q = p, got p={p} q={q}")));
        }
        Ok(NormSpec { family: NormFamily::TriebelDiag, order: s, p, q, levels: None })
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.levels = Some(levels);
        self
    }

    pub fn k(&self) -> i32 {
        self.order.floor() as i32
    }

    pub fn label(&self) -> String {
        let p = fmt_exp(self.p);
        match self.family {
            NormFamily::Lp => format!("L^{p}"),
            NormFamily::Sobolev | NormFamily::NegSobolevUpper => format!("W^{{{},{p}}}", self.order),
            NormFamily::Holder => format!("C^{{{},{}}}", self.k(), self.order - self.order.floor()),
            NormFamily::Besov => format!("B^{}_{{{p},{}}}", self.order, fmt_exp(self.q)),
            NormFamily::TriebelDiag => format!("F^{}_{{{p},{p}}}", self.order),
        }
    }
}

pub fn fmt_exp(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}

/// Weights of the `m`-th derivative at `z` through nodes `xs` (Fornberg).
pub fn fd_weights(z: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] *= c4 / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// `m`-th derivative of uniformly spaced samples: centered stencils of
/// accuracy two, shifted one-sided near the ends.
pub fn derivative_samples(v: &[f64], h: f64, m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Ok(v.to_vec());
    }
    let n = v.len();
    if n < m + 2 {
        return Err(Error::GridTooCoarse { needed: m + 2, have: n });
    }
    let width = if m.is_multiple_of(2) { m + 1 } else { m + 2 }.min(n);
    let offsets: Vec<f64> = (0..width).map(|i| i as f64).collect();
    let mut cache: Vec<Option<Vec<f64>>> = vec![None; width];
    let half = width / 2;
    Ok((0..n)
        .map(|i| {
            let start = i.saturating_sub(half).min(n - width);
            let pos = i - start;
            let w = cache[pos].get_or_insert_with(|| fd_weights(pos as f64, &offsets, m));
            let scale = h.powi(m as i32);
            w.iter().zip(&v[start..start + width]).map(|(a, b)| a * b).sum::<f64>() / scale
        })
        .collect())
}

/// Applies `op` to every line of the grid along `axis` (0 = tangential, 1 = normal).
fn along_axis(f: &GridFunction, values: &[f64], axis: usize, op: impl Fn(&[f64], f64) -> Result<Vec<f64>>) -> Result<Vec<f64>> {
    let n = f.normal_len();
    let cols = f.columns();
    match (axis, f.tangential()) {
        (1, _) | (_, None) => {
            let mut out = Vec::with_capacity(values.len());
            for c in 0..cols {
                out.extend(op(&values[c * n..(c + 1) * n], f.h())?);
            }
            Ok(out)
        }
        (_, Some(ax)) => {
            let mut out = vec![0.0; values.len()];
            for i in 0..n {
                let line: Vec<f64> = (0..cols).map(|c| values[c * n + i]).collect();
                for (c, v) in op(&line, ax.h)?.into_iter().enumerate() {
                    out[c * n + i] = v;
                }
            }
            Ok(out)
        }
    }
}

/// Partial derivative `∂_t^{at} ∂_n^{an}` of a grid function.
pub fn grid_derivative(f: &GridFunction, at: usize, an: usize) -> Result<Vec<f64>> {
    if at > 0 && f.tangential().is_none() {
        return Err(Error::InvalidParameter("tangential derivative of a 1D grid".into()));
    }
    let dn = along_axis(f, f.values(), 1, |v, h| derivative_samples(v, h, an))?;
    along_axis(f, &dn, 0, |v, h| derivative_samples(v, h, at))
}

fn cell_volume(f: &GridFunction) -> f64 {
    f.h() * f.tangential().map_or(1.0, |a| a.h)
}

/// `(Σ |f|^p h^n)^{1/p}`, or `max |f|` for `p = ∞`.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    Ok(lp_values(f.values(), cell_volume(f), p))
}

fn lp_values(v: &[f64], vol: f64, p: f64) -> f64 {
    if p.is_infinite() {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    } else {
        (vol * v.iter().map(|x| x.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
    }
}

fn multi_indices(f: &GridFunction, order: usize, exact: bool) -> Vec<(usize, usize)> {
    let lo = if exact { order } else { 0 };
    match f.tangential() {
        None => (lo..=order).map(|m| (0, m)).collect(),
        Some(_) => (lo..=order).flat_map(|t| (0..=t).map(move |a| (a, t - a))).collect(),
    }
}

/// `(Σ_{|α| <= k} ‖∂^α f‖_p^p)^{1/p}` with finite-difference derivatives.
pub fn sobolev_norm(f: &GridFunction, k: u32, p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    let vol = cell_volume(f);
    let parts = multi_indices(f, k as usize, false)
        .into_iter()
        .map(|(at, an)| grid_derivative(f, at, an).map(|d| lp_values(&d, vol, p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(combine(&parts, p))
}

/// `max_{|α| = k} sup |∂^α f(x) − ∂^α f(y)|/|x − y|^s` over grid pairs on a
/// common axis line with `|x − y| <= L/4`. A lower estimate of the true sup.
pub fn holder_seminorm(f: &GridFunction, k: u32, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!("Hölder exponent must lie in (0, 1), got {s}")));
    }
    let mut best = 0.0f64;
    for (at, an) in multi_indices(f, k as usize, true) {
        let d = grid_derivative(f, at, an)?;
        for axis in 0..f.dim() {
            let quot = along_axis(f, &d, if f.dim() == 1 { 1 } else { axis }, |line, h| {
                Ok(vec![line_holder(line, h, s)])
            })?;
            best = quot.into_iter().fold(best, f64::max);
        }
    }
    Ok(best)
}

fn line_holder(v: &[f64], h: f64, s: f64) -> f64 {
    let n = v.len();
    let window = (((n - 1) as f64) / 4.0).floor().max(1.0) as usize;
    let mut best = 0.0f64;
    for lag in 1..=window.min(n - 1) {
        let denom = (lag as f64 * h).powf(s);
        for i in 0..n - lag {
            best = best.max((v[i + lag] - v[i]).abs() / denom);
        }
    }
    best
}

/// `max(sup|∂^α f|, [∂^k f]_s)` over `|α| <= k`, equivalent to the usual `C^{k,s}` norm.
pub fn holder_norm(f: &GridFunction, k: u32, s: f64) -> Result<f64> {
    let mut total = holder_seminorm(f, k, s)?;
    for (at, an) in multi_indices(f, k as usize, false) {
        let d = grid_derivative(f, at, an)?;
        total = total.max(lp_values(&d, 1.0, f64::INFINITY));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::Axis;
    use std::f64::consts::PI;

    #[test]
    fn fornberg_known_stencils() {
        let w = fd_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert!((w[0] - 1.0).abs() < 1e-14 && (w[1] + 2.0).abs() < 1e-14 && (w[2] - 1.0).abs() < 1e-14);
        let w = fd_weights(0.0, &[0.0, 1.0, 2.0], 1);
        assert!((w[0] + 1.5).abs() < 1e-14 && (w[1] - 2.0).abs() < 1e-14 && (w[2] + 0.5).abs() < 1e-14);
    }

    #[test]
    fn unit_mass_bump() {
        let mut v = vec![0.0; 11];
        v[5] = 10.0;
        let f = GridFunction::new(None, 0, 0.1, v).unwrap();
        assert!((lp_norm(&f, 1.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_l2() {
        let h = 1e-3;
        let n = 16000;
        let f = GridFunction::sample_1d(|x| (-x * x).exp(), -8000, n + 1, h).unwrap();
        assert!((lp_norm(&f, 2.0).unwrap() - (PI / 2.0).powf(0.25)).abs() < 1e-10);
    }

    #[test]
    fn half_power_triangle_fails() {
        let bump = |c: f64| move |x: f64| if (x - c).abs() < 0.5 { 1.0 } else { 0.0 };
        let f = GridFunction::sample_1d(bump(2.0), 0, 1001, 0.01).unwrap();
        let g = GridFunction::sample_1d(bump(7.0), 0, 1001, 0.01).unwrap();
        let sum = GridFunction::new(None, 0, 0.01, f.values().iter().zip(g.values()).map(|(a, b)| a + b).collect()).unwrap();
        let (nf, ng, ns) = (lp_norm(&f, 0.5).unwrap(), lp_norm(&g, 0.5).unwrap(), lp_norm(&sum, 0.5).unwrap());
        // disjoint unit bumps: ‖f + g‖_{1/2} = 4‖f‖_{1/2}/2 = 2(‖f‖ + ‖g‖)/2
        assert!(ns > nf + ng);
        assert!((ns / (nf + ng) - 2.0).abs() < 0.05);
    }

    #[test]
    fn sobolev_of_waves() {
        let omega = 3.0;
        let h = 2.0 * PI / 3.0 / 4000.0;
        let f = GridFunction::sample_1d(|x| (omega * x).sin(), 0, 4001 * 3, h).unwrap();
        let d = grid_derivative(&f, 0, 1).unwrap();
        let l2 = lp_norm(&f, 2.0).unwrap();
        let dl2 = (h * d.iter().map(|x| x * x).sum::<f64>()).sqrt();
        assert!((dl2 / l2 / omega - 1.0).abs() < 0.01);
        assert_eq!(sobolev_norm(&f, 0, 2.0).unwrap(), l2);
        let c = GridFunction::sample_1d(|_| 2.0, 0, 50, 0.1).unwrap();
        let w = sobolev_norm(&c, 2, 2.0).unwrap();
        assert!((w - lp_norm(&c, 2.0).unwrap()).abs() < 1e-12);
        assert!(matches!(sobolev_norm(&c.restrict_half().unwrap(), 60, 2.0), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn two_dimensional_sobolev() {
        let ax = Axis::new(0.0, 0.01, 201).unwrap();
        let f = GridFunction::sample_2d(|s, t| s + 2.0 * t, ax, 0, 201, 0.01).unwrap();
        // derivatives are 1 and 2 on the unit square-ish domain
        let d_t = grid_derivative(&f, 1, 0).unwrap();
        let d_n = grid_derivative(&f, 0, 1).unwrap();
        assert!(d_t.iter().all(|v| (v - 1.0).abs() < 1e-9));
        assert!(d_n.iter().all(|v| (v - 2.0).abs() < 1e-9));
    }

    #[test]
    fn holder_examples() {
        let c = GridFunction::sample_1d(|_| 1.0, 0, 100, 0.01).unwrap();
        assert_eq!(holder_seminorm(&c, 0, 0.5).unwrap(), 0.0);
        let h = 1e-3;
        let f = GridFunction::sample_1d(|x: f64| x.abs().sqrt(), -1000, 2001, h).unwrap();
        let v = holder_seminorm(&f, 0, 0.5).unwrap();
        assert!((0.9..=1.0 + 1e-9).contains(&v), "{v}");
        // variation on scales beyond 1: quotients drop as s grows
        let g = GridFunction::sample_1d(|x: f64| (-(x / 3.0) * (x / 3.0)).exp(), -2000, 4001, 1e-2).unwrap();
        let vals: Vec<f64> = [0.25, 0.5, 0.75].iter().map(|&s| holder_seminorm(&g, 0, s).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{vals:?}");
    }

    #[test]
    fn spec_validation() {
        assert!(NormSpec::lp(0.0).is_err());
        assert!(NormSpec::triebel_diag(2.0, 1.0, 0.5).is_err());
        assert!(NormSpec::holder(0, 1.0).is_err());
        assert!(NormSpec::neg_sobolev(1, 2.0).is_err());
        assert_eq!(NormSpec::besov(2.0, 2.0, 0.5).unwrap().label(), "B^0.5_{2,2}");
    }
}
