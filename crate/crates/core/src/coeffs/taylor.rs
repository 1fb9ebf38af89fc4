//! Power-series coefficients of the interpolant `F_u` at the origin.
//!
//! Each partial-fraction term `W(z)/(z − β^k)` equals `−β^{−k} ∏_{j≠k}(1 − z/β^j)`,
//! so both paths below only multiply or divide truncated polynomials.

use crate::coeffs::interpolant::{BoundarySequence, Interpolant};
use crate::coeffs::weierstrass::WeierstrassProduct;
use crate::error::{Error, Result};
use crate::precision::{PrecisionContext, Real};

// p(z) <- p(z)·(1 − c z), truncated to p.len() coefficients
fn mul_linear(p: &mut [Real], c: &Real) {
    for i in (1..p.len()).rev() {
        p[i] = &p[i] - &(c * &p[i - 1]);
    }
}

fn check_count(product: &WeierstrassProduct, count: usize, ctx: &PrecisionContext) -> Result<()> {
    let beta = product.beta().to_f64();
    let guard = (-ctx.tail_tol().ln() / beta.ln()).ceil() as usize;
    if count + guard > product.terms() {
        return Err(Error::InvalidParameter(format!(
            "{count} coefficients need at least {} product factors, have {}",
            count + guard,
            product.terms()
        )));
    }
    Ok(())
}

/// Path A: multiply out `∏_{j≠k}` separately for every retained node.
pub fn taylor_by_product(u: &BoundarySequence, count: usize, ctx: &PrecisionContext) -> Result<Vec<Real>> {
    let f = Interpolant::new(u, ctx)?;
    let product = f.product();
    check_count(product, count, ctx)?;
    let bits = ctx.bits();
    let mut out = vec![Real::zero(bits); count];
    for (k, weight) in f.weights().iter().enumerate() {
        if weight.is_zero() || count == 0 {
            continue;
        }
        let mut poly = vec![Real::zero(bits); count];
        poly[0] = -product.inv_node(k);
        for j in (0..product.terms()).filter(|&j| j != k) {
            mul_linear(&mut poly, product.inv_node(j));
        }
        for (o, p) in out.iter_mut().zip(&poly) {
            *o = &*o + &(weight * p);
        }
    }
    Ok(out)
}

/// Path B: expand `W` once, then divide by `(z − β^k)` from the low end.
pub fn taylor_by_division(u: &BoundarySequence, count: usize, ctx: &PrecisionContext) -> Result<Vec<Real>> {
    let f = Interpolant::new(u, ctx)?;
    let product = f.product();
    check_count(product, count, ctx)?;
    let bits = ctx.bits();
    let mut w = vec![Real::zero(bits); count];
    if count == 0 {
        return Ok(w);
    }
    w[0] = Real::one(bits);
    for j in 0..product.terms() {
        mul_linear(&mut w, product.inv_node(j));
    }
    let mut out = vec![Real::zero(bits); count];
    for (k, weight) in f.weights().iter().enumerate() {
        if weight.is_zero() {
            continue;
        }
        let inv = product.inv_node(k);
        let mut q_prev = Real::zero(bits);
        for (i, wi) in w.iter().enumerate() {
            let q = &(&q_prev - wi) * inv;
            out[i] = &out[i] + &(weight * &q);
            q_prev = q;
        }
    }
    Ok(out)
}

/// `ã_0..ã_{count−1}` with `F_u(z) = Σ ã_j z^j`; both paths must agree to `tail_tol`.
pub fn taylor_coefficients(u: &BoundarySequence, count: usize, ctx: &PrecisionContext) -> Result<Vec<Real>> {
    let a = taylor_by_product(u, count, ctx)?;
    let b = taylor_by_division(u, count, ctx)?;
    let (index, diff) = max_gap(&a, &b);
    if diff > ctx.tail_tol() {
        return Err(Error::TaylorMismatch { index, diff });
    }
    Ok(a)
}

/// Largest absolute disagreement between two coefficient lists.
pub fn max_gap(a: &[Real], b: &[Real]) -> (usize, f64) {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs().to_f64())
        .enumerate()
        .fold((0, 0.0), |best, (i, d)| if d > best.1 { (i, d) } else { best })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(256, 10, 1e-40).unwrap()
    }

    #[test]
    fn zero_sequence_gives_zero() {
        let ctx = ctx();
        let u = BoundarySequence::zeros(ctx.int(4), 6);
        assert!(taylor_coefficients(&u, 12, &ctx).unwrap().iter().all(Real::is_zero));
    }

    #[test]
    fn paths_agree_and_resum() {
        let ctx = ctx();
        let u = BoundarySequence::alternating(ctx.int(4), 8);
        let a = taylor_by_product(&u, 21, &ctx).unwrap();
        let b = taylor_by_division(&u, 21, &ctx).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs().to_f64() < 1e-70);
        }
        // resumming the series at z = 1/16 reproduces the interpolant there
        let f = Interpolant::new(&u, &ctx).unwrap();
        let z = Real::ratio(1, 16, ctx.bits());
        let series: Real = a.iter().enumerate().map(|(i, c)| c * &z.powi(i as i32)).sum();
        assert!((&series - &f.eval(&z)).abs().to_f64() < 1e-60);
    }

    #[test]
    fn too_many_coefficients_rejected() {
        let ctx = PrecisionContext::with_product_terms(256, 10, 30, 1e-40).unwrap();
        let u = BoundarySequence::alternating(ctx.int(4), 4);
        assert!(taylor_coefficients(&u, 25, &ctx).is_err());
    }
}
