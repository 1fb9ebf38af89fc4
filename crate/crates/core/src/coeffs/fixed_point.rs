//! Two-sided dyadic coefficients from the contraction on boundary sequences.
//!
//! With `F = F_u` interpolating `u_k` at `4^k`, the iteration
//! `u_k <- (−1)^k − F_u(4^{−k})` (k ≥ 1, `u_0 = 1/2`) converges to a sequence
//! for which `F(4^k) + F(4^{−k}) = (−1)^k`. Writing `F(z) = Σ ã_j z^j`, the
//! family `a_{±j} = ã_j` (j ≥ 1), `a_0 = 2ã_0`, `b_j = 4^j` then has all
//! moments `Σ_j a_j(−b_j)^k = 1`.

use crate::coeffs::family::{CoefficientFamily, Entry, FamilyKind, ValidatedRange};
use crate::coeffs::interpolant::{BoundarySequence, Interpolant};
use crate::coeffs::moments::{moment_report, MomentReport};
use crate::coeffs::taylor::{max_gap, taylor_by_division, taylor_by_product};
use crate::error::{Error, Result};
use crate::precision::{PrecisionContext, Real};

/// `64 e^{2/3} / 165`.
pub fn contraction_constant() -> f64 {
    64.0 * (2.0f64 / 3.0).exp() / 165.0
}

/// Ratio above which the iteration is declared broken.
pub const NON_CONTRACTION_RATIO: f64 = 0.76;

/// Nodes retained beyond `kmax`.
pub const NODE_GUARD: usize = 8;

pub const DEFAULT_DELTA: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct FixedPointRun {
    pub sequence: BoundarySequence,
    pub iterations: usize,
    /// `‖u^{ν+1} − u^ν‖_∞` per step.
    pub diffs: Vec<f64>,
    /// Successive ratios of `diffs`, recorded while above roundoff.
    pub ratios: Vec<f64>,
    /// `max_l Σ_{k≥1} |W(4^{−l}) / (W'(4^k)(4^{−l} − 4^k))|` for the retained nodes.
    pub operator_bound: f64,
    pub taylor: Vec<Real>,
    /// Largest disagreement between the two Taylor paths.
    pub taylor_gap: f64,
    /// Bound on the contribution of nodes beyond the retained ones.
    pub dropped_node_bound: f64,
    pub family: CoefficientFamily,
    pub report: MomentReport,
}

/// Row `l` of the iteration matrix: coefficients of `u_k` in `F_u(4^{−l})`.
fn matrix_row(f: &Interpolant, l: usize, bits: usize) -> Result<Vec<Real>> {
    let z = Real::int_pow(4, -(l as i32), bits);
    (0..f.nodes().len()).map(|k| f.cardinal(&z, k)).collect()
}

/// `Σ_{k=1}^{last} |W(4^{−l}) / (W'(4^k)(4^{−l} − 4^k))|`.
pub fn sum_bound(l: usize, last: usize, ctx: &PrecisionContext) -> Result<Real> {
    let u = BoundarySequence::zeros(ctx.int(4), last);
    let f = Interpolant::new(&u, ctx)?;
    let row = matrix_row(&f, l, ctx.bits())?;
    Ok(row.iter().skip(1).map(Real::abs).fold(Real::zero(ctx.bits()), |a, b| a + b))
}

fn sup_diff(a: &[Real], b: &[Real]) -> Real {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(Real::zero(64), Real::max)
}

/// Bound `‖u‖_∞ · C · Σ_{k>K} β^{−k}/|W'(β^k)|`, where `C = ∏(1 + β^{−j})`
/// dominates every Taylor coefficient of `∏_{j≠k}(1 − z/β^j)`.
pub(crate) fn dropped_nodes(f: &Interpolant, u_sup: f64) -> Result<f64> {
    let p = f.product();
    let beta = p.beta().to_f64();
    let c: f64 = (0..60).map(|j| 1.0 + beta.powi(-j)).product();
    let last = f.nodes().len();
    let mut s = 0.0;
    for k in last..last + 12 {
        let d = p.derivative_at_node(k)?.abs();
        let term = &p.beta().powi(-(k as i32)) / &d;
        s += term.to_f64();
    }
    Ok(u_sup * c * s)
}

/// Runs the contraction and assembles the family; moment failures are
/// recorded in the report, not raised.
pub fn synthesize_two_sided(ctx: &PrecisionContext, kmax: usize, fp_tol: Option<f64>) -> Result<FixedPointRun> {
    if kmax < 1 {
        return Err(Error::InvalidParameter("kmax must be >= 1".into()));
    }
    ctx.require_moment_bits(kmax)?;
    let bits = ctx.bits();
    let fp_tol = fp_tol.unwrap_or_else(|| (-(bits as f64) / 2.0).exp2());
    if !(fp_tol > 0.0) {
        return Err(Error::InvalidParameter("fp_tol must be positive".into()));
    }
    let last = kmax + NODE_GUARD;
    let four = ctx.int(4);
    let f = Interpolant::new(&BoundarySequence::zeros(four.clone(), last), ctx)?;
    let rows: Vec<Vec<Real>> = (1..=last).map(|l| matrix_row(&f, l, bits)).collect::<Result<_>>()?;
    let operator_bound = rows
        .iter()
        .map(|r| r.iter().skip(1).map(|m| m.abs().to_f64()).sum::<f64>())
        .fold(0.0, f64::max);

    let half = Real::ratio(1, 2, bits);
    let sign = |k: usize| ctx.int(if k.is_multiple_of(2) { 1 } else { -1 });
    let mut u: Vec<Real> = (0..=last).map(|k| if k == 0 { half.clone() } else { sign(k) }).collect();
    let noise = (-(bits as f64) + 40.0).exp2();
    let max_iter = 4 * bits;
    let mut diffs = Vec::new();
    let mut ratios = Vec::new();
    let mut iterations = 0;
    loop {
        let mut next = Vec::with_capacity(u.len());
        next.push(half.clone());
        for (l, row) in rows.iter().enumerate() {
            let fz: Real = row.iter().zip(&u).map(|(m, uk)| m * uk).fold(Real::zero(bits), |a, b| a + b);
            next.push(&sign(l + 1) - &fz);
        }
        let d = sup_diff(&next, &u).to_f64();
        if let Some(&prev) = diffs.last() {
            if prev > noise && d > noise {
                let ratio = d / prev;
                if ratio > NON_CONTRACTION_RATIO {
                    return Err(Error::NonContraction { step: iterations, ratio });
                }
                ratios.push(ratio);
            }
        }
        diffs.push(d);
        u = next;
        iterations += 1;
        if d < fp_tol {
            break;
        }
        if iterations >= max_iter {
            return Err(Error::NonContraction { step: iterations, ratio: ratios.last().copied().unwrap_or(1.0) });
        }
    }

    let sequence = BoundarySequence::new(four, u)?;
    let count = 2 * ctx.jmax() + 1;
    let taylor = taylor_by_product(&sequence, count, ctx)?;
    let check = taylor_by_division(&sequence, count, ctx)?;
    let (index, taylor_gap) = max_gap(&taylor, &check);
    if taylor_gap > ctx.tail_tol() {
        return Err(Error::TaylorMismatch { index, diff: taylor_gap });
    }
    let interp = Interpolant::new(&sequence, ctx)?;
    let dropped_node_bound = dropped_nodes(&interp, sequence.sup_norm())?;

    let family = two_sided_family(&taylor, ctx.jmax(), kmax, bits)?;
    let report = moment_report(&family, -(kmax as i32)..=kmax as i32, DEFAULT_DELTA, ctx);
    let mut family = family;
    family.set_residuals(report.rows.iter().map(|r| (r.k, r.residual)).collect());
    Ok(FixedPointRun {
        sequence,
        iterations,
        diffs,
        ratios,
        operator_bound,
        taylor,
        taylor_gap,
        dropped_node_bound,
        family,
        report,
    })
}

/// `a_{±j} = ã_j`, `a_0 = 2ã_0`, `b_j = 4^j` for `|j| <= jmax`; further
/// coefficients go to the tail.
pub fn two_sided_family(taylor: &[Real], jmax: usize, kmax: usize, bits: usize) -> Result<CoefficientFamily> {
    let mk = |j: i64, a: &Real| Entry { j, a: a.clone(), b: Real::int_pow(4, j as i32, bits) };
    let mut entries = Vec::with_capacity(2 * jmax + 1);
    let mut tail = Vec::new();
    for (i, t) in taylor.iter().enumerate() {
        let j = i as i64;
        let target = if i <= jmax { &mut entries } else { &mut tail };
        if i == 0 {
            target.push(mk(0, &(t + t)));
        } else {
            target.push(mk(j, t));
            target.push(mk(-j, t));
        }
    }
    entries.sort_by_key(|e| e.j);
    tail.sort_by_key(|e| e.j);
    CoefficientFamily::new(
        FamilyKind::TwoSidedDyadic,
        Some(Real::from_i64(4, bits)),
        DEFAULT_DELTA,
        entries,
        tail,
        ValidatedRange::Symmetric { kmax: kmax as u32 },
    )
}

/// The validated two-sided family, or an error naming the failing moment.
pub fn fixed_point_coefficients(ctx: &PrecisionContext, kmax: usize, fp_tol: Option<f64>) -> Result<CoefficientFamily> {
    let run = synthesize_two_sided(ctx, kmax, fp_tol)?;
    if let Some(worst) = run.report.worst() {
        return Err(Error::MomentValidation { k: worst.k, residual: worst.residual, tol: ctx.tail_tol() });
    }
    Ok(run.family)
}

#[cfg(test)]
mod tests {
    use super::*;

    // 256 bits, jmax 14, kmax 4: small enough for unit tests, validated to 1e-30.
    fn small_run() -> FixedPointRun {
        let ctx = PrecisionContext::new(256, 14, 1e-30).unwrap();
        synthesize_two_sided(&ctx, 4, None).unwrap()
    }

    #[test]
    fn constant_value() {
        assert!((contraction_constant() - 0.755485).abs() < 1e-6);
    }

    #[test]
    fn small_run_is_consistent() {
        let run = small_run();
        assert!(run.report.pass, "{:?}", run.report.worst());
        assert_eq!(run.sequence.entries()[0], Real::ratio(1, 2, 256));
        assert!(run.ratios.iter().all(|&r| r <= 0.756));
        assert!(run.operator_bound <= contraction_constant() + 1e-6);
        // F(1) = u_0 = 1/2 resums from the Taylor coefficients
        let s: Real = run.taylor.iter().cloned().sum();
        assert!((s.to_f64() - 0.5).abs() < 1e-30);
        assert!(run.dropped_node_bound < 1e-40);
    }

    #[test]
    fn first_coefficients() {
        let run = small_run();
        let t: Vec<f64> = run.taylor.iter().map(Real::to_f64).collect();
        // frozen from an independent 512-bit mpmath run
        assert!((t[0] - 1.9389932).abs() < 1e-6);
        assert!((t[1] + 1.5511945).abs() < 1e-6);
        assert!((t[2] - 0.11405842).abs() < 1e-7);
    }

    #[test]
    fn symmetric_entries() {
        let run = small_run();
        let e = run.family.entries();
        for x in e.iter().filter(|x| x.j > 0) {
            let m = e.iter().find(|y| y.j == -x.j).unwrap();
            assert_eq!(x.a, m.a);
        }
    }

    #[test]
    fn low_precision_rejected() {
        let ctx = PrecisionContext::new(64, 20, 1e-10).unwrap();
        assert!(matches!(
            synthesize_two_sided(&ctx, 10, None),
            Err(Error::InsufficientPrecision { .. })
        ));
    }

    #[test]
    fn sum_bound_small() {
        let ctx = PrecisionContext::new(256, 12, 1e-30).unwrap();
        for l in 1..=4 {
            let s = sum_bound(l, 12, &ctx).unwrap().to_f64();
            assert!(s <= 0.75550, "l={l} s={s}");
        }
    }
}
