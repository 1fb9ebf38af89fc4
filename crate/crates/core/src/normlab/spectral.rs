//! Spectral estimators on the torus embedding of a 1D grid.
//!
//! The grid `x_i = (lo + i)h`, `i < N`, is read as one period of length
//! `L = N h`. Frequencies are in cycles per unit, `ξ_k = k/L`, and the
//! discrete transform `F_k = Σ_i v_i e^{−2πi ik/N}` gives
//! `∫|f|² ≈ (h/N) Σ_k |F_k|²`.

use rustfft::num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::normlab::mesh::combine;
use crate::operator::GridFunction;

/// Warn when the spectral mass above this fraction of Nyquist exceeds 1%.
pub const ALIAS_BAND: f64 = 0.8;
pub const ALIAS_LIMIT: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralNorm {
    pub value: f64,
    /// Share of the (weighted) norm carried above `0.8·Nyquist`.
    pub aliasing_tail: f64,
    pub aliasing_warning: bool,
    /// Share of the plain `L²` mass above the last Littlewood–Paley level.
    pub level_tail: f64,
}

fn psi(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth monotone step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let (a, b) = (psi(t), psi(1.0 - t));
    a / (a + b)
}

/// `λ̂_0(ξ) = 1 − S(|ξ| − 1)`: 1 on `|ξ| <= 1`, 0 on `|ξ| >= 2`.
pub fn lp_window(xi: f64) -> f64 {
    1.0 - smooth_step(xi.abs() - 1.0)
}

/// `λ̂_j(ξ) = λ̂_0(2^{−j}ξ) − λ̂_0(2^{1−j}ξ)` for `j >= 1`, supported in
/// `2^{j−1} < |ξ| < 2^{j+1}`.
pub fn lp_level(j: usize, xi: f64) -> f64 {
    if j == 0 {
        return lp_window(xi);
    }
    let a = xi.abs() * (-(j as f64)).exp2();
    if a <= 0.5 || a >= 2.0 {
        0.0
    } else {
        lp_window(a) - lp_window(2.0 * a)
    }
}

fn check_1d(f: &GridFunction) -> Result<()> {
    if f.dim() != 1 {
        return Err(Error::InvalidParameter("spectral estimators take 1D grids".into()));
    }
    if f.normal_len() < 4 {
        return Err(Error::GridTooCoarse { needed: 4, have: f.normal_len() });
    }
    Ok(())
}

fn check_exponents(p: f64, q: f64) -> Result<()> {
    if p > 0.0 && q > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p and q must be positive, got {p}, {q}")))
    }
}

pub fn frequencies(n: usize, h: f64) -> Vec<f64> {
    let len = n as f64 * h;
    (0..n).map(|k| if k <= n / 2 { k as f64 / len } else { (k as f64 - n as f64) / len }).collect()
}

fn inverse(mut spec: Vec<C64>) -> Vec<f64> {
    let n = spec.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    spec.into_iter().map(|c| c.re / n as f64).collect()
}

/// Level count reaching the Nyquist frequency.
pub fn default_levels(h: f64) -> usize {
    (0.5 / h).log2().ceil().max(0.0) as usize
}

fn lp_of(v: &[f64], h: f64, p: f64) -> f64 {
    if p.is_infinite() {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    } else {
        (h * v.iter().map(|x| x.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
    }
}

/// Discrete transform of a 1D grid, shared by every spectral estimate on it.
#[derive(Clone, Debug)]
pub struct Spectrum {
    coeffs: Vec<C64>,
    xi: Vec<f64>,
    h: f64,
}

impl Spectrum {
    pub fn new(f: &GridFunction) -> Result<Self> {
        check_1d(f)?;
        let mut coeffs: Vec<C64> = f.values().iter().map(|&x| C64::new(x, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(coeffs.len()).process(&mut coeffs);
        Ok(Spectrum { xi: frequencies(coeffs.len(), f.h()), coeffs, h: f.h() })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn nyquist(&self) -> f64 {
        0.5 / self.h
    }

    fn energy(&self, weight: impl Fn(f64) -> f64, cutoff: f64) -> (f64, f64) {
        let (mut total, mut tail) = (0.0, 0.0);
        for (c, &x) in self.coeffs.iter().zip(&self.xi) {
            let e = weight(x) * c.norm_sqr();
            total += e;
            if x.abs() > cutoff {
                tail += e;
            }
        }
        (total, tail)
    }

    /// Share of the `(1 + ξ²)^s`-weighted norm above `0.8·Nyquist`.
    pub fn aliasing_tail(&self, s: f64) -> f64 {
        let (total, tail) = self.energy(|x| (1.0 + x * x).powf(s), ALIAS_BAND * self.nyquist());
        if total > 0.0 {
            (tail / total).sqrt()
        } else {
            0.0
        }
    }

    /// Share of the `L²` norm above `2^J`, where the levels stop.
    pub fn level_tail(&self, levels: usize) -> f64 {
        let (total, tail) = self.energy(|_| 1.0, (levels as f64).exp2());
        if total > 0.0 {
            (tail / total).sqrt()
        } else {
            0.0
        }
    }

    pub fn levels(&self, levels: Option<usize>) -> usize {
        levels.unwrap_or_else(|| default_levels(self.h))
    }

    fn filtered(&self, j: usize) -> Vec<C64> {
        self.coeffs.iter().zip(&self.xi).map(|(c, &x)| c * lp_level(j, x)).collect()
    }

    fn diagnostics(&self, value: f64, s: f64, levels: usize) -> SpectralNorm {
        let aliasing_tail = self.aliasing_tail(s);
        SpectralNorm {
            value,
            aliasing_tail,
            aliasing_warning: aliasing_tail > ALIAS_LIMIT,
            level_tail: self.level_tail(levels),
        }
    }

    /// `(Σ (1 + ξ²)^s |f̂(ξ)|²)^{1/2}`.
    pub fn h_s(&self, s: f64) -> SpectralNorm {
        let (total, _) = self.energy(|x| (1.0 + x * x).powf(s), f64::INFINITY);
        let mut out = self.diagnostics((self.h / self.len() as f64 * total).sqrt(), s, 0);
        out.level_tail = 0.0;
        out
    }

    /// `‖λ_j ∗ f‖_p` for `j = 0..=J`; Parseval when `p = 2`.
    pub fn level_norms(&self, p: f64, levels: Option<usize>) -> Vec<f64> {
        let scale = self.h / self.len() as f64;
        (0..=self.levels(levels))
            .map(|j| {
                if p == 2.0 {
                    let e: f64 = self
                        .coeffs
                        .iter()
                        .zip(&self.xi)
                        .map(|(c, &x)| {
                            let w = lp_level(j, x);
                            if w == 0.0 {
                                0.0
                            } else {
                                w * w * c.norm_sqr()
                            }
                        })
                        .sum();
                    (scale * e).sqrt()
                } else {
                    lp_of(&inverse(self.filtered(j)), self.h, p)
                }
            })
            .collect()
    }

    /// Besov quasi-norm from precomputed level norms.
    pub fn besov_from_levels(&self, norms: &[f64], q: f64, s: f64) -> SpectralNorm {
        let weighted: Vec<f64> = norms.iter().enumerate().map(|(j, n)| (j as f64 * s).exp2() * n).collect();
        self.diagnostics(combine(&weighted, q), s, norms.len().saturating_sub(1))
    }

    pub fn besov(&self, p: f64, q: f64, s: f64, levels: Option<usize>) -> Result<SpectralNorm> {
        check_exponents(p, q)?;
        Ok(self.besov_from_levels(&self.level_norms(p, levels), q, s))
    }

    /// `‖(Σ_j 2^{jsp}|λ_j ∗ f|^p)^{1/p}‖_p`.
    pub fn triebel_diag(&self, p: f64, s: f64, levels: Option<usize>) -> Result<SpectralNorm> {
        check_exponents(p, p)?;
        let levels = self.levels(levels);
        let mut acc = vec![0.0; self.len()];
        for j in 0..=levels {
            let w = (j as f64 * s).exp2();
            for (a, v) in acc.iter_mut().zip(inverse(self.filtered(j))) {
                let t = w * v.abs();
                if p.is_infinite() {
                    *a = t.max(*a);
                } else {
                    *a += t.powf(p);
                }
            }
        }
        let value = if p.is_infinite() {
            acc.iter().fold(0.0, |m: f64, &x| m.max(x))
        } else {
            (self.h * acc.iter().sum::<f64>()).powf(1.0 / p)
        };
        Ok(self.diagnostics(value, s, levels))
    }
}

/// `(Σ (1 + ξ²)^s |f̂(ξ)|²)^{1/2}`.
pub fn h_s_norm(f: &GridFunction, s: f64) -> Result<SpectralNorm> {
    Ok(Spectrum::new(f)?.h_s(s))
}

/// Applies the multiplier `(1 + ξ²)^{s/2}`.
pub fn bessel_potential(f: &GridFunction, s: f64) -> Result<GridFunction> {
    let sp = Spectrum::new(f)?;
    let coeffs = sp.coeffs.iter().zip(&sp.xi).map(|(c, x)| c * (1.0 + x * x).powf(s / 2.0)).collect();
    GridFunction::new(None, f.lo(), f.h(), inverse(coeffs))
}

/// `(Σ_{j<=J} 2^{jsq} ‖λ_j ∗ f‖_p^q)^{1/q}` on the torus.
pub fn besov_quasinorm(f: &GridFunction, p: f64, q: f64, s: f64, levels: Option<usize>) -> Result<SpectralNorm> {
    check_exponents(p, q)?;
    Spectrum::new(f)?.besov(p, q, s, levels)
}

/// Per-level contributions `2^{js}‖λ_j ∗ f‖_p`.
pub fn besov_levels(f: &GridFunction, p: f64, s: f64, levels: Option<usize>) -> Result<Vec<f64>> {
    check_exponents(p, p)?;
    let norms = Spectrum::new(f)?.level_norms(p, levels);
    Ok(norms.iter().enumerate().map(|(j, n)| (j as f64 * s).exp2() * n).collect())
}

/// The diagonal `F^s_{pp}` quasi-norm.
pub fn triebel_diag_quasinorm(f: &GridFunction, p: f64, s: f64, levels: Option<usize>) -> Result<SpectralNorm> {
    Spectrum::new(f)?.triebel_diag(p, s, levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normlab::norms::lp_norm;

    fn gaussian(sigma: f64, h: f64, half_width: f64) -> GridFunction {
        let m = (half_width / h) as i64;
        GridFunction::sample_1d(|x| (-(x / sigma) * (x / sigma)).exp(), -m, (2 * m) as usize, h).unwrap()
    }

    #[test]
    fn window_shape() {
        assert_eq!(lp_window(0.7), 1.0);
        assert_eq!(lp_window(2.5), 0.0);
        assert!((lp_window(1.5) - 0.5).abs() < 1e-12);
        // the levels telescope to λ̂_0(2^{−J}ξ)
        for &x in &[0.3, 1.7, 5.0, 40.0] {
            let s: f64 = (0..=6).map(|j| lp_level(j, x)).sum();
            assert!((s - lp_window(x / 64.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn parseval() {
        let f = gaussian(0.5, 0.01, 10.0);
        let hs = h_s_norm(&f, 0.0).unwrap();
        assert!((hs.value - lp_norm(&f, 2.0).unwrap()).abs() < 1e-12);
        assert!(!hs.aliasing_warning);
    }

    #[test]
    fn multiplier_round_trip() {
        let f = gaussian(0.3, 0.01, 8.0);
        let g = bessel_potential(&bessel_potential(&f, 1.0).unwrap(), -1.0).unwrap();
        assert!(g.max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn negative_order_of_narrowing_bumps() {
        let vals: Vec<f64> = [0.1, 0.03, 0.01]
            .iter()
            .map(|&w| {
                let f = gaussian(w, 5e-4, 10.0);
                let mass = w * std::f64::consts::PI.sqrt();
                let unit = GridFunction::new(None, f.lo(), f.h(), f.values().iter().map(|v| v / mass).collect()).unwrap();
                h_s_norm(&unit, -1.0).unwrap().value
            })
            .collect();
        // unit masses approach the delta, whose norm is (∫(1 + ξ²)^{−1}dξ)^{1/2} = √π
        let delta = std::f64::consts::PI.sqrt();
        assert!(vals.windows(2).all(|w| w[0] < w[1] && w[1] < delta), "{vals:?}");
        assert!(delta - vals[2] < 0.06);
    }

    #[test]
    fn aliasing_flagged() {
        let h = 0.05;
        let f = GridFunction::sample_1d(|x| (2.0 * std::f64::consts::PI * 9.0 * x).sin() * (-x * x / 4.0).exp(), -400, 800, h).unwrap();
        assert!(h_s_norm(&f, 0.0).unwrap().aliasing_warning);
    }

    #[test]
    fn besov_basics() {
        let zero = GridFunction::sample_1d(|_| 0.0, -64, 128, 0.1).unwrap();
        assert_eq!(besov_quasinorm(&zero, 2.0, 2.0, 0.5, None).unwrap().value, 0.0);
        // a wave at 2^4 cycles lives in level 4
        let h = 1.0 / 256.0;
        let f = GridFunction::sample_1d(
            |x| (2.0 * std::f64::consts::PI * 16.0 * x).cos() * (-(x / 3.0) * (x / 3.0)).exp(),
            -4096,
            8192,
            h,
        )
        .unwrap();
        let lv = besov_levels(&f, 2.0, 0.5, None).unwrap();
        let total: f64 = lv.iter().map(|v| v * v).sum();
        assert!(lv[4] * lv[4] >= 0.8 * total, "{lv:?}");
        // the diagonal Triebel–Lizorkin norm equals the Besov norm with q = p
        for p in [1.0, 2.0] {
            let b = besov_quasinorm(&f, p, p, 0.25, None).unwrap().value;
            let t = triebel_diag_quasinorm(&f, p, 0.25, None).unwrap().value;
            assert!((b / t - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn besov_tracks_h_s() {
        let ratios: Vec<f64> = [0.2, 0.5, 1.0, 2.0]
            .iter()
            .map(|&w| {
                let f = gaussian(w, 0.005, 20.0);
                besov_quasinorm(&f, 2.0, 2.0, 0.5, None).unwrap().value / h_s_norm(&f, 0.5).unwrap().value
            })
            .collect();
        let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
        assert!(hi / lo < 1.2, "{ratios:?}");
    }
}
