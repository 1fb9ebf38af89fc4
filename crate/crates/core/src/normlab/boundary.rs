//! One-sided derivative matching of `Ef` and `f` across `x_n = 0`.

use crate::coeffs::CoefficientFamily;
use crate::error::{Error, Result};
use crate::normlab::dilation::fit_slope;
use crate::operator::{extend_extended, Builtin};
use crate::precision::Real;

/// Smallest observed order accepted as `O(h)` convergence.
pub const MIN_FITTED_ORDER: f64 = 0.8;

/// Weights `w_i` with `Σ w_i g(x_i) ≈ g^{(m)}(0)`, in extended precision.
pub fn fd_weights_real(xs: &[Real], m: usize, bits: usize) -> Vec<Real> {
    let n = xs.len();
    let zero = Real::zero(bits);
    let mut c = vec![vec![zero.clone(); m + 1]; n];
    let mut c1 = Real::one(bits);
    let mut c4 = xs[0].clone();
    c[0][0] = Real::one(bits);
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = Real::one(bits);
        let c5 = c4.clone();
        c4 = xs[i].clone();
        for j in 0..i {
            let c3 = &xs[i] - &xs[j];
            c2 = &c2 * &c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    let kk = Real::from_i64(k as i64, bits);
                    c[i][k] = &(&c1 * &(&(&kk * &c[i - 1][k - 1]) - &(&c5 * &c[i - 1][k]))) / &c2;
                }
                c[i][0] = -(&(&(&c1 * &c5) * &c[i - 1][0]) / &c2);
            }
            for k in (1..=mn).rev() {
                let kk = Real::from_i64(k as i64, bits);
                c[j][k] = &(&(&c4 * &c[j][k]) - &(&kk * &c[j][k - 1])) / &c3;
            }
            c[j][0] = &(&c[j][0] * &c4) / &c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|mut row| row.swap_remove(m)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderMismatch {
    pub order: usize,
    /// `(h, |∂^κ Ef(0^−) − ∂^κ f(0^+)|)` per step.
    pub mismatches: Vec<(f64, f64)>,
    pub fitted_order: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryReport {
    pub function: String,
    pub floor: f64,
    pub orders: Vec<OrderMismatch>,
    pub pass: bool,
}

/// Stencil of `max(κ + 1, 4)` nodes on each side: `−h, …, −nh` for `Ef`
/// and `0, h, …, (n − 1)h` for `f`.
fn one_sided(
    family: &CoefficientFamily,
    f: Builtin,
    order: usize,
    h: f64,
    bits: usize,
) -> Result<f64> {
    let n = (order + 1).max(4);
    let step = Real::from_f64(h, bits);
    let scale = step.powi(-(order as i32));
    let left: Vec<Real> = (1..=n).map(|i| Real::from_i64(-(i as i64), bits)).collect();
    let right: Vec<Real> = (0..n).map(|i| Real::from_i64(i as i64, bits)).collect();
    let wl = fd_weights_real(&left, order, bits);
    let wr = fd_weights_real(&right, order, bits);
    let mut dl = Real::zero(bits);
    for (w, x) in wl.iter().zip(&left) {
        let v = extend_extended(family, |t| f.eval_real(t), &(x * &step))?;
        dl = dl + w * &v;
    }
    let mut dr = Real::zero(bits);
    for (w, x) in wr.iter().zip(&right) {
        dr = dr + w * &f.eval_real(&(x * &step));
    }
    let diff = &(&dl - &dr) * &scale;
    Ok(diff.abs().to_f64())
}

/// Mismatch of one-sided derivatives of orders `0..=max_order` at each step
/// in `hs`, with the observed convergence order. An order passes when the
/// fitted order is at least [`MIN_FITTED_ORDER`] or every mismatch is below
/// `floor`.
pub fn boundary_smoothness_report(
    family: &CoefficientFamily,
    f: Builtin,
    max_order: usize,
    hs: &[f64],
    floor: f64,
) -> Result<BoundaryReport> {
    if hs.is_empty() || hs.iter().any(|&h| !(h > 0.0 && h < 1.0)) {
        return Err(Error::InvalidParameter("steps must lie in (0, 1)".into()));
    }
    let bits = family.bits();
    let orders = (0..=max_order)
        .map(|order| {
            let mismatches =
                hs.iter().map(|&h| one_sided(family, f, order, h, bits).map(|m| (h, m))).collect::<Result<Vec<_>>>()?;
            let exact = mismatches.iter().all(|&(_, m)| m <= floor);
            let fitted_order = (hs.len() >= 2).then(|| {
                let pts: Vec<(f64, f64)> = mismatches.iter().map(|&(h, m)| (h.ln(), m.max(floor).max(f64::MIN_POSITIVE).ln())).collect();
                fit_slope(&pts)
            });
            let pass = exact || fitted_order.is_some_and(|o| o >= MIN_FITTED_ORDER);
            Ok(OrderMismatch { order, mismatches, fitted_order, pass })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = orders.iter().all(|o| o.pass);
    Ok(BoundaryReport { function: f.name(), floor, orders, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{seeley_one_sided_coefficients, synthesize_two_sided};
    use crate::precision::PrecisionContext;

    #[test]
    fn weights_match_double_precision() {
        let bits = 256;
        let xs: Vec<Real> = (0..5).map(|i| Real::from_i64(i, bits)).collect();
        let w = fd_weights_real(&xs, 2, bits);
        let d = crate::normlab::norms::fd_weights(0.0, &[0.0, 1.0, 2.0, 3.0, 4.0], 2);
        for (a, b) in w.iter().zip(d) {
            assert!((a.to_f64() - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_matches_exactly() {
        let ctx = PrecisionContext::new(512, 20, 1e-30).unwrap();
        let fam = synthesize_two_sided(&ctx, 10, None).unwrap().family;
        let rep = boundary_smoothness_report(&fam, Builtin::Poly(3), 3, &[1e-2, 1e-3], 1e-20).unwrap();
        assert!(rep.pass, "{rep:?}");
        for o in &rep.orders {
            assert!(o.mismatches.iter().all(|&(_, m)| m <= 1e-20), "{o:?}");
        }
    }

    #[test]
    fn seeley_low_orders() {
        let ctx = PrecisionContext::new(512, 20, 1e-30).unwrap();
        let fam = seeley_one_sided_coefficients(&ctx, 6, 4).unwrap();
        let rep = boundary_smoothness_report(&fam, Builtin::ExpDecay, 3, &[1e-2, 1e-3], 1e-20).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn rejects_bad_steps() {
        let ctx = PrecisionContext::new(256, 20, 1e-20).unwrap();
        let fam = seeley_one_sided_coefficients(&ctx, 3, 4).unwrap();
        assert!(boundary_smoothness_report(&fam, Builtin::ExpDecay, 1, &[], 0.0).is_err());
        assert!(boundary_smoothness_report(&fam, Builtin::ExpDecay, 1, &[2.0], 0.0).is_err());
    }
}
