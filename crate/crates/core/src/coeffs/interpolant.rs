//! Cardinal interpolation at geometric nodes `β^k`.

use crate::coeffs::weierstrass::WeierstrassProduct;
use crate::error::{Error, Result};
use crate::precision::{PrecisionContext, Real};

/// Target values `u_0..u_K` at the nodes `β^0..β^K`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySequence {
    beta: Real,
    entries: Vec<Real>,
}

impl BoundarySequence {
    pub fn new(beta: Real, entries: Vec<Real>) -> Result<Self> {
        if beta <= Real::one(beta.bits()) {
            return Err(Error::InvalidParameter("beta must exceed 1".into()));
        }
        if entries.iter().any(|u| !u.is_finite()) {
            return Err(Error::InvalidParameter("boundary sequence entries must be finite".into()));
        }
        Ok(BoundarySequence { beta, entries })
    }

    /// The alternating sequence `u_k = (−1)^k`, `k = 0..=last`.
    pub fn alternating(beta: Real, last: usize) -> Self {
        let bits = beta.bits();
        let entries = (0..=last).map(|k| Real::from_i64(if k % 2 == 0 { 1 } else { -1 }, bits)).collect();
        BoundarySequence { beta, entries }
    }

    pub fn zeros(beta: Real, last: usize) -> Self {
        let bits = beta.bits();
        BoundarySequence { beta, entries: vec![Real::zero(bits); last + 1] }
    }

    pub fn beta(&self) -> &Real {
        &self.beta
    }

    pub fn entries(&self) -> &[Real] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.entries.iter().map(|u| u.abs().to_f64()).fold(0.0, f64::max)
    }
}

/// `F_u(z) = Σ_k u_k/W'(β^k) · W(z)/(z − β^k)` with weights precomputed.
#[derive(Clone, Debug)]
pub struct Interpolant {
    product: WeierstrassProduct,
    nodes: Vec<Real>,
    weights: Vec<Real>,
    values: Vec<Real>,
}

impl Interpolant {
    pub fn new(u: &BoundarySequence, ctx: &PrecisionContext) -> Result<Self> {
        let product = WeierstrassProduct::new(u.beta(), ctx)?;
        if u.len() > product.terms() {
            return Err(Error::InvalidParameter(format!(
                "{} interpolation nodes exceed the {} product factors",
                u.len(),
                product.terms()
            )));
        }
        let beta = product.beta().clone();
        let mut nodes = Vec::with_capacity(u.len());
        let mut node = Real::one(ctx.bits());
        for _ in 0..u.len() {
            nodes.push(node.clone());
            node = &node * &beta;
        }
        let weights = u
            .entries()
            .iter()
            .enumerate()
            .map(|(k, uk)| Ok(&uk.with_bits(ctx.bits()) / &product.derivative_at_node(k)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Interpolant { product, nodes, weights, values: u.entries().to_vec() })
    }

    pub fn product(&self) -> &WeierstrassProduct {
        &self.product
    }

    /// `u_k / W'(β^k)`.
    pub fn weights(&self) -> &[Real] {
        &self.weights
    }

    pub fn nodes(&self) -> &[Real] {
        &self.nodes
    }

    pub fn eval(&self, z: &Real) -> Real {
        if let Some(m) = self.nodes.iter().position(|n| n == z) {
            return self.values[m].clone();
        }
        let w = self.product.eval_raw(z);
        if w.is_zero() {
            // z is a zero of W beyond the retained nodes: every term vanishes
            return Real::zero(z.bits());
        }
        let sum: Real = self.weights.iter().zip(&self.nodes).map(|(c, n)| c / &(z - n)).sum();
        &w * &sum
    }

    /// Coefficient of `u_k` in `F_u(z)`: `W(z) / (W'(β^k)(z − β^k))`.
    pub fn cardinal(&self, z: &Real, k: usize) -> Result<Real> {
        let d = self.product.derivative_at_node(k)?;
        let node = self.product.beta().powi(k as i32);
        if &node == z {
            return Ok(Real::one(z.bits()));
        }
        Ok(&self.product.eval_raw(z) / &(&d * &(z - &node)))
    }
}

pub fn interpolant_eval(u: &BoundarySequence, z: &Real, ctx: &PrecisionContext) -> Result<Real> {
    Ok(Interpolant::new(u, ctx)?.eval(z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(256, 20, 1e-40).unwrap()
    }

    #[test]
    fn reproduces_nodes() {
        let ctx = ctx();
        let four = ctx.int(4);
        let u = BoundarySequence::new(four.clone(), (0..6).map(|k| ctx.real(0.3 * k as f64 - 0.7)).collect()).unwrap();
        let f = Interpolant::new(&u, &ctx).unwrap();
        for m in 0..6 {
            assert_eq!(f.eval(&four.powi(m)), u.entries()[m as usize]);
        }
    }

    #[test]
    fn cardinal_unit_sequence() {
        let ctx = ctx();
        let four = ctx.int(4);
        let mut e0 = vec![ctx.int(0); 5];
        e0[0] = ctx.int(1);
        let u = BoundarySequence::new(four.clone(), e0).unwrap();
        assert_eq!(interpolant_eval(&u, &ctx.int(1), &ctx).unwrap(), ctx.int(1));
        assert!(interpolant_eval(&u, &ctx.int(4), &ctx).unwrap().is_zero());
        // near a node the generic branch approaches the cardinal value
        let near = ctx.real(1.0 + 1e-30);
        assert!((interpolant_eval(&u, &near, &ctx).unwrap().to_f64() - 1.0).abs() < 1e-25);
    }

    #[test]
    fn zero_sequence() {
        let ctx = ctx();
        let u = BoundarySequence::zeros(ctx.int(4), 7);
        for z in [0.0, 0.1, -3.0, 17.5] {
            assert!(interpolant_eval(&u, &ctx.real(z), &ctx).unwrap().is_zero());
        }
    }

    #[test]
    fn cardinal_matches_eval() {
        let ctx = ctx();
        let u = BoundarySequence::alternating(ctx.int(4), 6);
        let f = Interpolant::new(&u, &ctx).unwrap();
        let z = Real::ratio(1, 16, ctx.bits());
        let via_cardinal: Real =
            (0..u.len()).map(|k| &u.entries()[k] * &f.cardinal(&z, k).unwrap()).sum();
        assert!((&via_cardinal - &f.eval(&z)).abs().to_f64() < 1e-70);
    }
}
