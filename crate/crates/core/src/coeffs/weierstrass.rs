//! The entire function `W_β(z) = ∏_{j≥0} (1 − z/β^j)` and its node derivatives.

use crate::error::{Error, Result};
use crate::precision::{PrecisionContext, Real};

/// A value together with a certified relative bound on the dropped factors.
#[derive(Clone, Debug)]
pub struct Certified {
    pub value: Real,
    pub rel_tail: f64,
}

/// Truncated product with the node reciprocals `β^{−j}` cached.
#[derive(Clone, Debug)]
pub struct WeierstrassProduct {
    beta: Real,
    beta_f64: f64,
    inv_nodes: Vec<Real>,
    tail_tol: f64,
}

impl WeierstrassProduct {
    pub fn new(beta: &Real, ctx: &PrecisionContext) -> Result<Self> {
        let one = Real::one(ctx.bits());
        let beta = beta.with_bits(ctx.bits());
        if beta <= one {
            return Err(Error::InvalidParameter(format!("beta must exceed 1, got {}", beta.to_f64())));
        }
        ctx.require_tail_resolution()?;
        let inv = beta.recip();
        let mut inv_nodes = Vec::with_capacity(ctx.product_terms());
        let mut cur = one;
        for _ in 0..ctx.product_terms() {
            inv_nodes.push(cur.clone());
            cur = &cur * &inv;
        }
        Ok(WeierstrassProduct { beta_f64: beta.to_f64(), beta, inv_nodes, tail_tol: ctx.tail_tol() })
    }

    pub fn beta(&self) -> &Real {
        &self.beta
    }

    pub fn terms(&self) -> usize {
        self.inv_nodes.len()
    }

    /// `β^{−j}` for `j < terms`.
    pub fn inv_node(&self, j: usize) -> &Real {
        &self.inv_nodes[j]
    }

    /// Relative bound `exp(2|z|β^{−P}/(1−1/β)) − 1` on the dropped factors.
    pub fn tail_bound(&self, z_abs: f64) -> f64 {
        let p = self.terms() as f64;
        let lead = z_abs * (-p * self.beta_f64.ln()).exp();
        (2.0 * lead / (1.0 - 1.0 / self.beta_f64)).exp_m1()
    }

    fn check_terms(&self, z_abs: f64) -> Result<()> {
        if z_abs == 0.0 {
            return Ok(());
        }
        let log_ratio = z_abs.ln() - self.terms() as f64 * self.beta_f64.ln();
        if log_ratio > self.tail_tol.ln() {
            return Err(Error::InsufficientPrecision {
                bits: self.terms(),
                needed: ((z_abs.ln() - self.tail_tol.ln()) / self.beta_f64.ln()).ceil() as usize,
                what: format!("product factors for |z| = {z_abs:e}"),
            });
        }
        Ok(())
    }

    /// Truncated product without the certificate check.
    pub fn eval_raw(&self, z: &Real) -> Real {
        let one = Real::one(z.bits().max(self.beta.bits()));
        let mut acc = one.clone();
        for inv in &self.inv_nodes {
            let factor = &one - &(z * inv);
            if factor.is_zero() {
                return Real::zero(one.bits());
            }
            acc = &acc * &factor;
        }
        acc
    }

    pub fn eval(&self, z: &Real) -> Result<Certified> {
        let z_abs = z.abs().to_f64();
        self.check_terms(z_abs)?;
        Ok(Certified { value: self.eval_raw(z), rel_tail: self.tail_bound(z_abs) })
    }

    /// `W_β'(β^k) = −β^{−k} W_β(β^{−1}) ∏_{l=1}^{k} (1 − β^l)`.
    pub fn derivative_at_node(&self, k: usize) -> Result<Real> {
        let bits = self.beta.bits();
        let one = Real::one(bits);
        let w_inv = self.eval_raw(&self.beta.recip());
        let mut prod = one.clone();
        let mut node = one.clone();
        for _ in 1..=k {
            node = &node * &self.beta;
            prod = &prod * &(&one - &node);
        }
        let scale = self.beta.powi(-(k as i32));
        let value = -(&(&scale * &w_inv) * &prod);
        if !value.is_finite() {
            return Err(Error::Overflow(format!("W'(beta^{k})")));
        }
        Ok(value)
    }
}

pub fn weierstrass_eval(beta: &Real, z: &Real, ctx: &PrecisionContext) -> Result<Certified> {
    WeierstrassProduct::new(beta, ctx)?.eval(z)
}

pub fn weierstrass_derivative_at_node(beta: &Real, k: usize, ctx: &PrecisionContext) -> Result<Real> {
    WeierstrassProduct::new(beta, ctx)?.derivative_at_node(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(256, 20, 1e-40).unwrap()
    }

    // Independent oracle: plain f64 product with 60 factors.
    fn w4_f64(z: f64) -> f64 {
        (0..60).map(|j| 1.0 - z / 4f64.powi(j)).product()
    }

    #[test]
    fn zeros_and_origin() {
        let ctx = ctx();
        let four = ctx.int(4);
        for k in [0, 1, 5, 17] {
            let z = Real::int_pow(4, k, ctx.bits());
            assert!(weierstrass_eval(&four, &z, &ctx).unwrap().value.is_zero());
        }
        let w0 = weierstrass_eval(&four, &ctx.int(0), &ctx).unwrap();
        assert_eq!(w0.value, ctx.int(1));
        assert_eq!(w0.rel_tail, 0.0);
    }

    #[test]
    fn quarter_value() {
        let ctx = ctx();
        let w = weierstrass_eval(&ctx.int(4), &Real::ratio(1, 4, ctx.bits()), &ctx).unwrap();
        assert!((w.value.to_f64() - w4_f64(0.25)).abs() < 1e-15);
        assert!((w.value.to_f64() - 0.6885373).abs() < 5e-7);
        assert!(w.rel_tail < 1e-90);
    }

    #[test]
    fn node_derivatives() {
        let ctx = ctx();
        let four = ctx.int(4);
        let w = w4_f64(0.25);
        let d0 = weierstrass_derivative_at_node(&four, 0, &ctx).unwrap().to_f64();
        let d1 = weierstrass_derivative_at_node(&four, 1, &ctx).unwrap().to_f64();
        let d2 = weierstrass_derivative_at_node(&four, 2, &ctx).unwrap().to_f64();
        assert!((d0 + w).abs() < 1e-14);
        assert!((d1 - 0.75 * w).abs() < 1e-14);
        assert!((d2 + 45.0 / 16.0 * w).abs() < 1e-13);
        assert!((d1 - 0.5164030).abs() < 1e-6);
        assert!((d2 + 1.9365).abs() < 1e-4);
    }

    // central difference of the raw product at a node, as a second oracle
    #[test]
    fn node_derivative_matches_difference_quotient() {
        let ctx = ctx();
        let p = WeierstrassProduct::new(&ctx.int(4), &ctx).unwrap();
        for k in 0..5 {
            let node = Real::int_pow(4, k, ctx.bits());
            let h = Real::from_f64(1e-20, ctx.bits());
            let diff = &(&p.eval_raw(&(&node + &h)) - &p.eval_raw(&(&node - &h))) / &(&h + &h);
            let closed = p.derivative_at_node(k as usize).unwrap();
            let rel = (&(&diff - &closed) / &closed).abs().to_f64();
            assert!(rel < 1e-30, "k={k} rel={rel}");
        }
    }

    #[test]
    fn node_derivative_growth() {
        let ctx = ctx();
        let p = WeierstrassProduct::new(&ctx.int(4), &ctx).unwrap();
        let w = p.eval_raw(&Real::ratio(1, 4, ctx.bits())).abs();
        for k in 0..=12i32 {
            let lower = &(&w * &Real::ratio(3, 4, ctx.bits()).powi(k)) * &Real::int_pow(4, (k * k - k) / 2, ctx.bits());
            assert!(p.derivative_at_node(k as usize).unwrap().abs() >= lower, "k={k}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let ctx = ctx();
        assert!(weierstrass_eval(&ctx.int(1), &ctx.int(0), &ctx).is_err());
        let short = PrecisionContext::with_product_terms(256, 4, 4, 1e-30).unwrap();
        assert!(weierstrass_eval(&short.int(4), &short.int(1000), &short).is_err());
        let coarse = PrecisionContext::new(64, 4, 1e-40).unwrap();
        assert!(weierstrass_eval(&coarse.int(4), &coarse.int(0), &coarse).is_err());
    }
}
