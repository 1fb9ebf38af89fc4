//! Quadrature: logarithmically graded meshes and adaptive Simpson.

use crate::error::{Error, Result};

/// Nodes `x_i = e^{u_i}` on `[lo, hi]` with `u` uniform and composite Simpson
/// weights (including the Jacobian `e^u`).
///
/// The grading is dilation invariant, so reflected copies `f(b x)` are
/// resolved equally well for every `b`.
#[derive(Clone, Debug)]
pub struct GradedMesh {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GradedMesh {
    pub fn new(lo: f64, hi: f64, per_decade: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) || per_decade < 2 {
            return Err(Error::InvalidParameter(format!("bad graded mesh [{lo}, {hi}] x {per_decade}")));
        }
        let (ul, uh) = (lo.ln(), hi.ln());
        let mut n = ((hi / lo).log10() * per_decade as f64).ceil() as usize;
        n += n % 2;
        let n = n.max(2);
        let du = (uh - ul) / n as f64;
        let nodes: Vec<f64> = (0..=n).map(|i| (ul + i as f64 * du).exp()).collect();
        let weights = nodes
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let s = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                s * du / 3.0 * x
            })
            .collect();
        Ok(GradedMesh { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `(∫|v|^p)^{1/p}` from samples at the nodes; `max|v|` for `p = ∞`.
    pub fn lp(&self, values: &[f64], p: f64) -> f64 {
        lp_weighted(values, &self.weights, p)
    }
}

/// `(Σ w_i |v_i|^p)^{1/p}`, or `max |v_i|` when `p` is infinite.
pub fn lp_weighted(values: &[f64], weights: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    values.iter().zip(weights).map(|(v, w)| w * v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `p`-combination of per-part norms: `(Σ n_i^p)^{1/p}`, or the max.
pub fn combine(parts: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        parts.iter().fold(0.0, |m, &v| m.max(v))
    } else {
        parts.iter().map(|v| v.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Adaptive Simpson over consecutive panels `[breaks[i], breaks[i+1]]`.
pub fn integrate_panels(f: &dyn Fn(f64) -> f64, breaks: &[f64], tol: f64) -> f64 {
    let panels = breaks.len().saturating_sub(1).max(1) as f64;
    breaks.windows(2).map(|w| adaptive_simpson(f, w[0], w[1], tol / panels)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_mesh_integrates() {
        let m = GradedMesh::new(1e-12, 40.0, 400).unwrap();
        let v: Vec<f64> = m.nodes().iter().map(|x| (-x * x).exp()).collect();
        let half_sqrt_pi = 0.5 * std::f64::consts::PI.sqrt();
        assert!((m.lp(&v, 1.0) - half_sqrt_pi).abs() < 1e-10);
        // ∫ e^{−2x²} over the half line is √(π/8)
        assert!((m.lp(&v, 2.0).powi(2) - (std::f64::consts::PI / 8.0).sqrt()).abs() < 1e-10);
        assert_eq!(m.lp(&v, f64::INFINITY), v[0]);
        assert!(GradedMesh::new(0.0, 1.0, 10).is_err());
    }

    #[test]
    fn simpson_on_polynomials_and_peaks() {
        assert!((adaptive_simpson(&|x| x * x * x, 0.0, 2.0, 1e-12) - 4.0).abs() < 1e-12);
        let g = |x: f64| (-(x - 0.3) * (x - 0.3) * 1e4).exp();
        let exact = std::f64::consts::PI.sqrt() / 100.0;
        assert!((integrate_panels(&g, &[-1.0, 0.0, 0.3, 1.0], 1e-14) - exact).abs() < 1e-12);
    }

    #[test]
    fn combinations() {
        assert_eq!(combine(&[3.0, 4.0], 2.0), 5.0);
        assert_eq!(combine(&[3.0, 4.0], f64::INFINITY), 4.0);
        assert_eq!(lp_weighted(&[1.0, -2.0], &[1.0, 1.0], 1.0), 3.0);
    }
}
