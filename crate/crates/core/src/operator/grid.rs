//! Uniform grids in `x_n` (optionally times one tangential axis) and the
//! discrete versions of `E`, `S` and `ϑ^r`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operator::function::CallableFunction;
use crate::operator::plan::{ExtensionPlan, OutOfRangePolicy};

/// Tangential axis `origin + i·h`, `i = 0..n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub origin: f64,
    pub h: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(origin: f64, h: f64, n: usize) -> Result<Self> {
        if !(h > 0.0) || !origin.is_finite() || n == 0 {
            return Err(Error::InvalidParameter(format!("bad axis origin={origin} h={h} n={n}")));
        }
        Ok(Axis { origin, h, n })
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.h
    }
}

/// Values on `x_n = (lo + i)·h`, `i = 0..n`, for every tangential node.
/// Storage is row-major with the normal index fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    tangential: Option<Axis>,
    lo: i64,
    n: usize,
    h: f64,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(tangential: Option<Axis>, lo: i64, h: f64, values: Vec<f64>) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter(format!("spacing must be positive, got {h}")));
        }
        let cols = tangential.map_or(1, |a| a.n);
        if values.is_empty() || !values.len().is_multiple_of(cols) {
            return Err(Error::InvalidParameter(format!(
                "{} values do not fill {cols} columns",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid value {i} is not finite")));
        }
        Ok(GridFunction { tangential, lo, n: values.len() / cols, h, values })
    }

    pub fn sample_1d(f: impl Fn(f64) -> f64, lo: i64, n: usize, h: f64) -> Result<Self> {
        let values = (0..n).map(|i| f((lo + i as i64) as f64 * h)).collect();
        Self::new(None, lo, h, values)
    }

    pub fn sample_2d(f: impl Fn(f64, f64) -> f64, tangential: Axis, lo: i64, n: usize, h: f64) -> Result<Self> {
        let mut values = Vec::with_capacity(tangential.n * n);
        for c in 0..tangential.n {
            let xt = tangential.coord(c);
            values.extend((0..n).map(|i| f(xt, (lo + i as i64) as f64 * h)));
        }
        Self::new(Some(tangential), lo, h, values)
    }

    /// Samples a callable on its own dimension (1 or 2).
    pub fn sample(f: &CallableFunction, tangential: Option<Axis>, lo: i64, n: usize, h: f64) -> Result<Self> {
        match tangential {
            None => Self::sample_1d(|t| f.eval(&[t]), lo, n, h),
            Some(ax) => Self::sample_2d(|s, t| f.eval(&[s, t]), ax, lo, n, h),
        }
    }

    pub fn dim(&self) -> usize {
        if self.tangential.is_some() {
            2
        } else {
            1
        }
    }

    pub fn tangential(&self) -> Option<Axis> {
        self.tangential
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn normal_len(&self) -> usize {
        self.n
    }

    pub fn columns(&self) -> usize {
        self.tangential.map_or(1, |a| a.n)
    }

    pub fn is_half(&self) -> bool {
        self.lo == 0
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, c: usize) -> &[f64] {
        &self.values[c * self.n..(c + 1) * self.n]
    }

    pub fn normal_coord(&self, i: usize) -> f64 {
        (self.lo + i as i64) as f64 * self.h
    }

    pub fn normal_coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.normal_coord(i)).collect()
    }

    /// `(tangential, normal)` coordinates of node `(c, i)`.
    pub fn point(&self, c: usize, i: usize) -> Vec<f64> {
        match self.tangential {
            None => vec![self.normal_coord(i)],
            Some(a) => vec![a.coord(c), self.normal_coord(i)],
        }
    }

    /// The nodes with `x_n >= 0`.
    pub fn restrict_half(&self) -> Result<GridFunction> {
        if self.lo > 0 {
            return Err(Error::InvalidParameter("grid does not reach x_n = 0".into()));
        }
        let skip = (-self.lo) as usize;
        let values = (0..self.columns()).flat_map(|c| self.column(c)[skip..].iter().copied()).collect();
        GridFunction::new(self.tangential, 0, self.h, values)
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Lagrange value at fractional index `s` through integer nodes `start..start+len`.
fn lagrange(col: &[f64], start: usize, len: usize, s: f64) -> f64 {
    (start..start + len)
        .map(|i| {
            let w: f64 = (start..start + len)
                .filter(|&k| k != i)
                .map(|k| (s - k as f64) / (i as f64 - k as f64))
                .product();
            w * col[i]
        })
        .sum()
}

/// Interpolated value at fractional index `s` and the estimate
/// `|P_{order+1}(s) − P_order(s)|`; `s` must lie in `[0, len − 1]`.
pub fn interpolate(col: &[f64], s: f64, order: usize) -> Result<(f64, f64)> {
    let len = col.len();
    if len < order + 2 {
        return Err(Error::GridTooCoarse { needed: order + 2, have: len });
    }
    let r = s.round();
    if (s - r).abs() < 1e-12 && r >= 0.0 && (r as usize) < len {
        return Ok((col[r as usize], 0.0));
    }
    let start = ((s - order as f64 / 2.0).round().max(0.0) as usize).min(len - 1 - order);
    let value = lagrange(col, start, order + 1, s);
    let wide_start = if start + order + 1 < len { start } else { start - 1 };
    let wide = lagrange(col, wide_start, order + 2, s);
    Ok((value, (wide - value).abs()))
}

/// Column value at normal coordinate `y`, applying `policy` off the sampled range.
fn read_column(col: &[f64], lo: i64, h: f64, y: f64, order: usize, policy: OutOfRangePolicy) -> Result<(f64, f64)> {
    let s = y / h - lo as f64;
    let last = (col.len() - 1) as f64;
    let slack = 1e-9;
    if s >= -slack && s <= last + slack {
        return interpolate(col, s.clamp(0.0, last), order);
    }
    let edge = if s < 0.0 { 0 } else { col.len() - 1 };
    match policy {
        OutOfRangePolicy::Error => Err(Error::OutOfRange { point: y, max: (lo as f64 + last) * h }),
        OutOfRangePolicy::ZeroPad => Ok((0.0, 0.0)),
        OutOfRangePolicy::DecayModel { rate } => {
            let dist = if s < 0.0 { -s * h } else { (s - last) * h };
            Ok((col[edge] * (-rate * dist).exp(), 0.0))
        }
    }
}

#[derive(Clone, Debug)]
pub struct GridExtension {
    pub grid: GridFunction,
    /// Largest stencil error estimate times `|a_j|`, summed over a node's terms.
    pub max_stencil_error: f64,
}

/// Extends a half grid to `x_n = −neg·h .. X_max`.
pub fn extend_grid(plan: &ExtensionPlan, f: &GridFunction, neg: usize) -> Result<GridExtension> {
    if !f.is_half() {
        return Err(Error::InvalidParameter("extend_grid expects a half grid starting at x_n = 0".into()));
    }
    let h = f.h();
    let cols = f.columns();
    let order = plan.order();
    let policy = plan.policy();
    let neg_values: Vec<(f64, f64)> = (0..cols * neg)
        .into_par_iter()
        .map(|idx| {
            let (c, i) = (idx / neg, idx % neg);
            let xn = -((neg - i) as f64) * h;
            let col = f.column(c);
            plan.terms().iter().try_fold((0.0, 0.0), |(v, e), t| {
                let (val, err) = read_column(col, 0, h, -t.b * xn, order, policy)?;
                Ok((v + t.a * val, e + t.a.abs() * err))
            })
        })
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(cols * (neg + f.normal_len()));
    let mut max_err = 0.0f64;
    for c in 0..cols {
        for &(v, e) in &neg_values[c * neg..(c + 1) * neg] {
            values.push(v);
            max_err = max_err.max(e);
        }
        values.extend_from_slice(f.column(c));
    }
    let grid = GridFunction::new(f.tangential(), -(neg as i64), h, values)?;
    Ok(GridExtension { grid, max_stencil_error: max_err })
}

/// `Sf` on a grid: `neg` zero nodes below `x_n = 0`.
pub fn zero_extend_grid(f: &GridFunction, neg: usize) -> Result<GridFunction> {
    if !f.is_half() {
        return Err(Error::InvalidParameter("zero extension expects a half grid".into()));
    }
    let values = (0..f.columns())
        .flat_map(|c| std::iter::repeat_n(0.0, neg).chain(f.column(c).iter().copied()))
        .collect();
    GridFunction::new(f.tangential(), -(neg as i64), f.h(), values)
}

/// `ϑ^r f` on the same nodes, reading `f(x', r x_n)` by interpolation.
pub fn dilate_grid(r: f64, f: &GridFunction, order: usize, policy: OutOfRangePolicy) -> Result<GridFunction> {
    if r == 0.0 || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("dilation factor must be finite and nonzero, got {r}")));
    }
    let n = f.normal_len();
    let values: Vec<f64> = (0..f.columns() * n)
        .into_par_iter()
        .map(|idx| {
            let (c, i) = (idx / n, idx % n);
            read_column(f.column(c), f.lo(), f.h(), r * f.normal_coord(i), order, policy).map(|(v, _)| v)
        })
        .collect::<Result<_>>()?;
    GridFunction::new(f.tangential(), f.lo(), f.h(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::synthesize_two_sided;
    use crate::operator::function::Builtin;
    use crate::operator::plan::extend_callable;
    use crate::precision::PrecisionContext;

    fn plan() -> ExtensionPlan {
        let ctx = PrecisionContext::new(256, 14, 1e-30).unwrap();
        ExtensionPlan::new(synthesize_two_sided(&ctx, 4, None).unwrap().family)
    }

    #[test]
    fn interpolation_reproduces_low_degree() {
        let col: Vec<f64> = (0..20).map(|i| (i as f64).powi(3) - 2.0 * i as f64).collect();
        for &s in &[0.3, 7.5, 18.7] {
            let (v, e) = interpolate(&col, s, 3).unwrap();
            assert!((v - (s.powi(3) - 2.0 * s)).abs() < 1e-9);
            assert!(e < 1e-9);
        }
        assert!(matches!(interpolate(&col[..3], 1.5, 4), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn quadratic_extends_exactly() {
        let p = plan().with_policy(OutOfRangePolicy::ZeroPad).unwrap();
        let h = 0.01;
        // rays beyond 4^8·0.05 only meet negligible a_j
        let n = (4f64.powi(8) * 0.05 / h) as usize;
        let f = GridFunction::sample_1d(|t| t * t, 0, n, h).unwrap();
        let ext = extend_grid(&p, &f, 5).unwrap();
        for i in 0..5 {
            let x = ext.grid.normal_coord(i);
            assert!((ext.grid.values()[i] - x * x).abs() < 1e-9, "x={x}");
        }
        assert!(ext.max_stencil_error < 1e-9);
    }

    #[test]
    fn zero_and_out_of_range() {
        let p = plan();
        let zero = GridFunction::sample_1d(|_| 0.0, 0, 50, 0.1).unwrap();
        assert!(matches!(extend_grid(&p, &zero, 3), Err(Error::OutOfRange { .. })));
        let p = p.with_policy(OutOfRangePolicy::ZeroPad).unwrap();
        assert!(extend_grid(&p, &zero, 3).unwrap().grid.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn exp_decay_matches_callable() {
        let p = plan().with_policy(OutOfRangePolicy::DecayModel { rate: 1.0 }).unwrap();
        let h = 0.01;
        let f = GridFunction::sample_1d(|t| (-t).exp(), 0, 3000, h).unwrap();
        let ext = extend_grid(&p, &f, 20).unwrap();
        let g = Builtin::ExpDecay.callable(1);
        for i in 0..20 {
            let x = ext.grid.normal_coord(i);
            let exact = extend_callable(&p, &g, &[x]).unwrap().value;
            assert!((ext.grid.values()[i] - exact).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn two_dimensional_columns() {
        let p = plan().with_policy(OutOfRangePolicy::DecayModel { rate: 1.0 }).unwrap();
        let ax = Axis::new(-1.0, 0.5, 5).unwrap();
        let f = GridFunction::sample_2d(|s, t| s * (-t).exp(), ax, 0, 2000, 0.01).unwrap();
        let ext = extend_grid(&p, &f, 4).unwrap();
        assert_eq!(ext.grid.normal_len(), 2004);
        let base = extend_grid(&p, &GridFunction::sample_1d(|t| (-t).exp(), 0, 2000, 0.01).unwrap(), 4).unwrap();
        for c in 0..5 {
            let s = ax.coord(c);
            for i in 0..4 {
                assert!((ext.grid.column(c)[i] - s * base.grid.values()[i]).abs() < 1e-12);
            }
        }
        assert_eq!(ext.grid.restrict_half().unwrap(), f);
    }

    #[test]
    fn zero_extension_and_dilation() {
        let f = GridFunction::sample_1d(|t| t + 1.0, 0, 10, 0.1).unwrap();
        let s = zero_extend_grid(&f, 3).unwrap();
        assert_eq!(&s.values()[..3], &[0.0; 3]);
        assert_eq!(s.restrict_half().unwrap(), f);
        let d = dilate_grid(0.5, &f, 3, OutOfRangePolicy::Error).unwrap();
        for i in 0..10 {
            assert!((d.values()[i] - (0.5 * f.normal_coord(i) + 1.0)).abs() < 1e-12);
        }
        assert!(dilate_grid(2.0, &f, 3, OutOfRangePolicy::Error).is_err());
    }
}
