use std::ops::RangeInclusive;

use crate::coeffs::family::{CoefficientFamily, Entry};
use crate::precision::{PrecisionContext, Real};

/// Candidate growth weights, smallest first.
pub const DELTA_LADDER: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

#[derive(Clone, Debug, PartialEq)]
pub struct MomentRow {
    pub k: i32,
    /// `Σ_j a_j(−b_j)^k` over the summed entries.
    pub sum: Real,
    /// `|sum − 1|`.
    pub residual: f64,
    /// `Σ_j 2^{δ|j|}|a_j| b_j^k` over the summed entries.
    pub weighted_sum: f64,
    /// Same sum over the stored tail entries: the truncation estimate.
    pub weighted_tail: f64,
    pub unweighted_sum: f64,
    pub unweighted_tail: f64,
    pub pass: bool,
    /// Set when the row could not be represented (reported, not fatal).
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub family_id: String,
    pub delta: f64,
    pub tail_tol: f64,
    pub rows: Vec<MomentRow>,
    /// Largest δ in [`DELTA_LADDER`] whose weighted tail converges numerically.
    pub largest_convergent_delta: Option<f64>,
    pub pass: bool,
}

impl MomentReport {
    pub fn worst(&self) -> Option<&MomentRow> {
        self.rows.iter().filter(|r| !r.pass).max_by(|a, b| a.residual.total_cmp(&b.residual))
    }

    pub fn row(&self, k: i32) -> Option<&MomentRow> {
        self.rows.iter().find(|r| r.k == k)
    }

    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual).fold(0.0, f64::max)
    }
}

fn weighted(entries: &[Entry], k: i32, delta: f64, bits: usize) -> (Real, Real) {
    let mut w = Real::zero(bits);
    let mut u = Real::zero(bits);
    for e in entries {
        let term = &e.a.abs().with_bits(bits) * &e.b.with_bits(bits).powi(k);
        let weight = Real::from_f64((delta * e.j.unsigned_abs() as f64).exp2(), bits);
        w = &w + &(&weight * &term);
        u = &u + &term;
    }
    (w, u)
}

// The last stored tail terms must be decreasing and already below tol.
fn tail_converges(family: &CoefficientFamily, k: i32, delta: f64, tol: f64) -> bool {
    let tail = family.tail();
    if tail.is_empty() {
        return true;
    }
    let mut outer: Vec<&Entry> = tail.iter().collect();
    outer.sort_by_key(|e| e.j.unsigned_abs());
    let terms: Vec<f64> = outer
        .iter()
        .rev()
        .take(2)
        .map(|e| {
            let t = &e.a.abs().with_bits(128) * &e.b.with_bits(128).powi(k);
            t.to_f64() * (delta * e.j.unsigned_abs() as f64).exp2()
        })
        .collect();
    match terms.as_slice() {
        [last, prev] => last <= prev && *last <= tol,
        [last] => *last <= tol,
        _ => true,
    }
}

/// Moment sums `Σ a_j(−b_j)^k` with residuals and weighted tails.
///
/// Passing means every residual is `<= tail_tol`; tails are informative.
pub fn moment_report(
    family: &CoefficientFamily,
    k_range: RangeInclusive<i32>,
    delta: f64,
    ctx: &PrecisionContext,
) -> MomentReport {
    let bits = ctx.bits().max(family.bits());
    let tol = ctx.tail_tol();
    let one = Real::one(bits);
    let rows: Vec<MomentRow> = k_range
        .clone()
        .map(|k| {
            let sum: Real = family
                .entries()
                .iter()
                .map(|e| &e.a.with_bits(bits) * &(-&e.b.with_bits(bits)).powi(k))
                .fold(Real::zero(bits), |acc, t| acc + t);
            let (ws, us) = weighted(family.entries(), k, delta, 128);
            let (wt, ut) = weighted(family.tail(), k, delta, 128);
            let error = if !sum.is_finite() || !ws.is_finite() {
                Some(format!("moment k={k} overflows at {bits} bits"))
            } else {
                None
            };
            let residual = if error.is_some() { f64::INFINITY } else { (&sum - &one).abs().to_f64() };
            MomentRow {
                k,
                sum,
                residual,
                weighted_sum: ws.to_f64(),
                weighted_tail: wt.to_f64(),
                unweighted_sum: us.to_f64(),
                unweighted_tail: ut.to_f64(),
                pass: error.is_none() && residual <= tol,
                error,
            }
        })
        .collect();
    let largest_convergent_delta =
        DELTA_LADDER.iter().copied().rfind(|&d| k_range.clone().all(|k| tail_converges(family, k, d, tol)));
    let pass = rows.iter().all(|r| r.pass);
    MomentReport { family_id: family.id(), delta, tail_tol: tol, rows, largest_convergent_delta, pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::family::{FamilyKind, ValidatedRange};

    fn hestenes() -> CoefficientFamily {
        let bits = 128;
        CoefficientFamily::new(
            FamilyKind::FiniteVandermonde,
            None,
            0.5,
            vec![
                Entry { j: 0, a: Real::from_i64(3, bits), b: Real::from_i64(1, bits) },
                Entry { j: 1, a: Real::from_i64(-2, bits), b: Real::from_i64(2, bits) },
            ],
            vec![],
            ValidatedRange::Span { m1: 0, m2: 1 },
        )
        .unwrap()
    }

    #[test]
    fn finite_family_rows() {
        let ctx = PrecisionContext::new(128, 4, 1e-30).unwrap();
        let r = moment_report(&hestenes(), 0..=2, 0.5, &ctx);
        assert_eq!(r.rows.len(), 3);
        assert_eq!(r.rows[0].residual, 0.0);
        assert_eq!(r.rows[1].residual, 0.0);
        assert_eq!(r.rows[2].residual, 6.0);
        assert_eq!(r.rows[2].sum.to_f64(), -5.0);
        assert!(!r.rows[2].pass);
        assert!(!r.pass);
        assert_eq!(r.worst().unwrap().k, 2);
        // 3·1 + 2^{0.5}·2·2 at k = 1
        assert!((r.rows[1].weighted_sum - (3.0 + 2f64.sqrt() * 4.0)).abs() < 1e-12);
        assert_eq!(r.rows[1].weighted_tail, 0.0);
        assert_eq!(r.largest_convergent_delta, Some(4.0));
    }

    #[test]
    fn empty_range_passes() {
        let ctx = PrecisionContext::new(128, 4, 1e-30).unwrap();
        #[allow(clippy::reversed_empty_ranges)]
        let r = moment_report(&hestenes(), 1..=0, 0.5, &ctx);
        assert!(r.rows.is_empty());
        assert!(r.pass);
    }
}
