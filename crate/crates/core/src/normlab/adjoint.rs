//! Duality and boundary flatness of the adjoint `E*`.

use crate::error::{Error, Result};
use crate::normlab::mesh::integrate_panels;
use crate::normlab::testfam::TestFunction;
use crate::operator::{adjoint_normal_derivative, extend_callable, ExtensionPlan};

/// Absolute quadrature target for each side of the duality check.
const QUADRATURE_TOL: f64 = 1e-13;
/// Smallest panel break; the integrands are bounded, so `[0, floor]` is
/// negligible.
const PANEL_FLOOR: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualityCheck {
    /// `⟨Ef, g⟩` over the line.
    pub lhs: f64,
    /// `⟨f, E*g⟩` over the half line.
    pub rhs: f64,
    pub error: f64,
    pub tol: f64,
    pub pass: bool,
}

/// `0` followed by `hi·4^{-k}`, ascending, down to [`PANEL_FLOOR`].
fn geometric_breaks(hi: f64) -> Vec<f64> {
    let mut breaks = vec![hi];
    while *breaks.last().expect("non-empty") > PANEL_FLOOR {
        let next = breaks.last().expect("non-empty") / 4.0;
        breaks.push(next);
    }
    breaks.push(0.0);
    breaks.reverse();
    breaks
}

/// `⟨Ef, g⟩ = ⟨f, E*g⟩` by adaptive quadrature on geometric panels. `f` is
/// used on the half line, `g` through its full-line representative.
pub fn duality_check(plan: &ExtensionPlan, f: &TestFunction, g: &TestFunction, tol: f64) -> Result<DualityCheck> {
    let (flo, fhi) = f.support();
    let (glo, ghi) = g.support();
    if !(fhi > 0.0) {
        return Err(Error::InvalidParameter(format!("{} vanishes on the half line", f.id())));
    }
    let fc = f.callable();
    let gc = g.representative();
    let fail = std::cell::Cell::new(None);
    let note = |r: Result<f64>| {
        r.unwrap_or_else(|e| {
            fail.set(Some(e));
            0.0
        })
    };
    // ∫_0^∞ f g + ∫_0^∞ Ef(−y) g(−y) dy
    let upper = fhi.min(ghi).max(flo.max(glo).max(0.0));
    let inside = integrate_panels(&|x| f.eval(x) * g.eval(x), &geometric_breaks(upper.max(PANEL_FLOOR * 8.0)), QUADRATURE_TOL);
    let reach = plan.terms().iter().map(|t| fhi / t.b).fold(0.0, f64::max).min(-glo);
    let outside = if reach > 0.0 {
        integrate_panels(
            &|y| if y <= 0.0 { 0.0 } else { note(extend_callable(plan, &fc, &[-y]).map(|e| e.value)) * g.eval(-y) },
            &geometric_breaks(reach),
            QUADRATURE_TOL,
        )
    } else {
        0.0
    };
    let rhs = integrate_panels(
        &|x| if x <= 0.0 { 0.0 } else { f.eval(x) * note(adjoint_normal_derivative(plan, &gc, 0, &[x]).map(|e| e.value)) },
        &geometric_breaks(fhi),
        QUADRATURE_TOL,
    );
    if let Some(e) = fail.take() {
        return Err(e);
    }
    let lhs = inside + outside;
    let error = (lhs - rhs).abs();
    Ok(DualityCheck { lhs, rhs, error, tol, pass: error <= tol })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatnessRow {
    pub order: usize,
    pub near: f64,
    pub far: f64,
    /// `|∂^β E*g(near)| / |∂^β E*g(far)|`.
    pub ratio: f64,
    /// `(x, |∂^β E*g(x)|)` at the profile points.
    pub profile: Vec<(f64, f64)>,
    /// The profile does not grow as `x` decreases.
    pub decreasing: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatnessReport {
    pub function_id: String,
    pub near_point: f64,
    pub far_point: f64,
    pub limit: f64,
    pub rows: Vec<FlatnessRow>,
    pub pass: bool,
}

/// Profile points approaching the boundary.
pub const FLATNESS_PROFILE: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// One-sided derivatives of `E*g` near `x_n = 0` against a reference point.
pub fn adjoint_flatness(
    plan: &ExtensionPlan,
    g: &TestFunction,
    max_order: usize,
    near_point: f64,
    far_point: f64,
    limit: f64,
) -> Result<FlatnessReport> {
    if !(near_point > 0.0 && far_point > near_point) {
        return Err(Error::InvalidParameter(format!("need 0 < near < far, got {near_point}, {far_point}")));
    }
    let gc = g.representative();
    let at = |m: usize, x: f64| adjoint_normal_derivative(plan, &gc, m, &[x]).map(|e| e.value.abs());
    let rows = (0..=max_order)
        .map(|order| {
            let near = at(order, near_point)?;
            let far = at(order, far_point)?;
            let profile = FLATNESS_PROFILE.iter().map(|&x| at(order, x).map(|v| (x, v))).collect::<Result<Vec<_>>>()?;
            let decreasing = profile.windows(2).all(|w| w[1].1 <= w[0].1);
            let ratio = near / far;
            Ok(FlatnessRow { order, near, far, ratio, profile, decreasing, pass: near <= limit * far })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = rows.iter().all(|r| r.pass);
    Ok(FlatnessReport { function_id: g.id().into(), near_point, far_point, limit, rows, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::synthesize_two_sided;
    use crate::normlab::testfam::test_family;
    use crate::precision::PrecisionContext;

    fn plan() -> ExtensionPlan {
        let ctx = PrecisionContext::new(512, 20, 1e-30).unwrap();
        ExtensionPlan::new(synthesize_two_sided(&ctx, 10, None).unwrap().family)
    }

    #[test]
    fn breaks_are_ascending() {
        let b = geometric_breaks(4.0);
        assert_eq!(b[0], 0.0);
        assert_eq!(*b.last().unwrap(), 4.0);
        assert!(b.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn gaussian_pair() {
        let fam = test_family();
        let d = duality_check(&plan(), &fam[3], &fam[0], 1e-8).unwrap();
        assert!(d.pass, "{d:?}");
        assert!(d.lhs.abs() > 0.1);
    }

    #[test]
    fn flat_at_the_boundary() {
        let fam = test_family();
        let r = adjoint_flatness(&plan(), &fam[0], 3, 1e-3, 0.5, 1e-3).unwrap();
        assert!(r.rows.iter().all(|row| row.decreasing), "{r:?}");
        assert!(r.rows[0].pass);
        // the reflected copies with b_j ~ 4^{-5} still act at 1e-3
        assert!(!r.rows[3].pass);
        let deep = adjoint_flatness(&plan(), &fam[0], 3, 1e-5, 0.5, 1e-3).unwrap();
        assert!(deep.pass, "{deep:?}");
        assert!(adjoint_flatness(&plan(), &fam[0], 1, 0.5, 0.1, 1e-3).is_err());
    }
}
