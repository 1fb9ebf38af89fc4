//! One-sided coefficients from the explicit sequence `u_k = (−1)^k`.

use crate::coeffs::family::{CoefficientFamily, Entry, FamilyKind, ValidatedRange};
use crate::coeffs::fixed_point::{DEFAULT_DELTA, NODE_GUARD};
use crate::coeffs::interpolant::BoundarySequence;
use crate::coeffs::moments::moment_report;
use crate::coeffs::taylor::taylor_coefficients;
use crate::error::{Error, Result};
use crate::precision::{PrecisionContext, Real};

/// `a_j = ã_j`, `b_j = β^j` for `0 <= j <= jmax`, where `ã_j` are the Taylor
/// coefficients of the interpolant of `(−1)^k` at `β^k`.
///
/// Only `0 <= k <= kmax` is validated; negative moments fail by design.
pub fn seeley_one_sided_coefficients(ctx: &PrecisionContext, kmax: usize, beta: u32) -> Result<CoefficientFamily> {
    if beta < 2 {
        return Err(Error::InvalidParameter(format!("beta must be an integer >= 2, got {beta}")));
    }
    ctx.require_moment_bits(kmax)?;
    let bits = ctx.bits();
    let beta_r = Real::from_i64(beta as i64, bits);
    let u = BoundarySequence::alternating(beta_r.clone(), kmax + NODE_GUARD);
    let count = 2 * ctx.jmax() + 1;
    let taylor = taylor_coefficients(&u, count, ctx)?;
    let mk = |j: usize, a: &Real| Entry { j: j as i64, a: a.clone(), b: beta_r.powi(j as i32) };
    let entries = taylor.iter().enumerate().take(ctx.jmax() + 1).map(|(j, a)| mk(j, a)).collect();
    let tail = taylor.iter().enumerate().skip(ctx.jmax() + 1).map(|(j, a)| mk(j, a)).collect();
    let mut family = CoefficientFamily::new(
        FamilyKind::OneSidedSeeley,
        Some(beta_r),
        DEFAULT_DELTA,
        entries,
        tail,
        ValidatedRange::Span { m1: 0, m2: kmax as u32 },
    )?;
    let report = moment_report(&family, 0..=kmax as i32, DEFAULT_DELTA, ctx);
    if let Some(worst) = report.worst() {
        return Err(Error::MomentValidation { k: worst.k, residual: worst.residual, tol: ctx.tail_tol() });
    }
    family.set_residuals(report.rows.iter().map(|r| (r.k, r.residual)).collect());
    Ok(family)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_moments_only() {
        let ctx = PrecisionContext::new(256, 20, 1e-30).unwrap();
        let fam = seeley_one_sided_coefficients(&ctx, 4, 2).unwrap();
        let r = moment_report(&fam, -1..=4, 0.5, &ctx);
        assert!(r.row(0).unwrap().pass);
        assert!(!r.row(-1).unwrap().pass);
        assert!(r.row(-1).unwrap().residual > 1e-3);
        assert!((0..=4).all(|k| r.row(k).unwrap().pass));
    }

    #[test]
    fn super_geometric_decay() {
        let ctx = PrecisionContext::new(256, 20, 1e-30).unwrap();
        let fam = seeley_one_sided_coefficients(&ctx, 4, 2).unwrap();
        let a: Vec<f64> = fam.entries().iter().map(|e| e.a.abs().to_f64()).collect();
        for j in 6..a.len() - 1 {
            assert!(a[j + 1] * 2.0 <= a[j], "j={j}: {} vs {}", a[j + 1], a[j]);
        }
    }
}
