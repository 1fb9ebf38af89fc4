//! Pointwise application of `E`, `E*`, `S`, dilations and the finite operators.

use rayon::prelude::*;

use crate::coeffs::{dyadic_finite_coefficients, CoefficientFamily, Term};
use crate::error::{Error, Result};
use crate::operator::function::{CallableFunction, EvalFn, Growth, Support};
use crate::precision::Real;

/// What grid extension does when a reflected ray leaves the sampled range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OutOfRangePolicy {
    Error,
    ZeroPad,
    /// `f(X_max)·exp(−rate·(y − X_max))` beyond the last node.
    DecayModel { rate: f64 },
}

pub const DEFAULT_TAIL_TARGET: f64 = 1e-10;
pub const DEFAULT_ORDER: usize = 4;
pub const MAX_ORDER: usize = 8;

#[derive(Clone, Debug)]
pub struct ExtensionPlan {
    family: CoefficientFamily,
    terms: Vec<Term>,
    tail: Vec<Term>,
    tail_target: f64,
    order: usize,
    policy: OutOfRangePolicy,
}

/// A value together with the certified bound on the dropped tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub tail_bound: f64,
}

impl Evaluation {
    fn exact(value: f64) -> Self {
        Evaluation { value, tail_bound: 0.0 }
    }
}

impl ExtensionPlan {
    pub fn new(family: CoefficientFamily) -> Self {
        let terms = family.terms().into_iter().filter(|t| t.a != 0.0).collect();
        let tail = family.tail_terms();
        ExtensionPlan {
            family,
            terms,
            tail,
            tail_target: DEFAULT_TAIL_TARGET,
            order: DEFAULT_ORDER,
            policy: OutOfRangePolicy::Error,
        }
    }

    pub fn with_tail_target(mut self, target: f64) -> Result<Self> {
        if !(target > 0.0) {
            return Err(Error::InvalidParameter(format!("tail target must be positive, got {target}")));
        }
        self.tail_target = target;
        Ok(self)
    }

    pub fn with_order(mut self, order: usize) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(Error::InvalidParameter(format!("interpolation order must be in 1..={MAX_ORDER}, got {order}")));
        }
        self.order = order;
        Ok(self)
    }

    pub fn with_policy(mut self, policy: OutOfRangePolicy) -> Result<Self> {
        if let OutOfRangePolicy::DecayModel { rate } = policy {
            if !(rate > 0.0) {
                return Err(Error::InvalidParameter(format!("decay rate must be positive, got {rate}")));
            }
        }
        self.policy = policy;
        Ok(self)
    }

    pub fn family(&self) -> &CoefficientFamily {
        &self.family
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Stored terms beyond the truncation, used only for certificates.
    pub fn tail_terms(&self) -> &[Term] {
        &self.tail
    }

    pub fn tail_target(&self) -> f64 {
        self.tail_target
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn policy(&self) -> OutOfRangePolicy {
        self.policy
    }

    /// `Σ_tail |weight(t)|·growth(arg(t))`, plus the last stored term again as
    /// a stand-in for whatever lies beyond the stored tail.
    fn tail_bound(&self, growth: Growth, weight: impl Fn(&Term) -> f64, arg: impl Fn(&Term) -> f64) -> Result<f64> {
        let mut sum = 0.0;
        let mut last = 0.0f64;
        for t in &self.tail {
            let v = weight(t).abs() * growth.bound(arg(t));
            sum += v;
            last = last.max(v);
        }
        let bound = sum + last;
        if !(bound <= self.tail_target) {
            return Err(Error::TailCertificate { bound, target: self.tail_target });
        }
        Ok(bound)
    }
}

fn with_normal(x: &[f64], y: f64) -> Vec<f64> {
    let mut p = x.to_vec();
    *p.last_mut().expect("point has at least one coordinate") = y;
    p
}

fn normal_of(x: &[f64]) -> Result<f64> {
    x.last().copied().ok_or_else(|| Error::InvalidParameter("empty point".into()))
}

/// `Ef(x)`: `f(x)` for `x_n >= 0`, else `Σ_j a_j f(x', −b_j x_n)`.
pub fn extend_callable(plan: &ExtensionPlan, f: &CallableFunction, x: &[f64]) -> Result<Evaluation> {
    let xn = normal_of(x)?;
    if xn > 0.0 {
        return f.try_eval(x).map(Evaluation::exact);
    }
    if xn == 0.0 {
        if let Growth::Power { exponent, .. } = f.growth() {
            if exponent < 0 {
                return Err(Error::Evaluation(format!("{} has no boundary value", f.label())));
            }
        }
        return f.try_eval(x).map(Evaluation::exact);
    }
    let tail_bound = plan.tail_bound(f.growth(), |t| t.a, |t| t.b * xn)?;
    let mut p = x.to_vec();
    let n = p.len() - 1;
    let mut value = 0.0;
    for t in plan.terms() {
        let y = -t.b * xn;
        if f.may_be_nonzero(y) {
            p[n] = y;
            value += t.a * f.try_eval(&p)?;
        }
    }
    Ok(Evaluation { value, tail_bound })
}

/// `∂_n^m Ef(x) = Σ_j a_j(−b_j)^m f^{(m)}(x', −b_j x_n)` for `x_n < 0` (chain rule),
/// `f^{(m)}(x)` for `x_n > 0`.
pub fn extend_normal_derivative(plan: &ExtensionPlan, f: &CallableFunction, m: usize, x: &[f64]) -> Result<Evaluation> {
    let d = f
        .derivative_function(m)
        .ok_or_else(|| Error::InvalidParameter(format!("{} has no derivative of order {m}", f.label())))?;
    let xn = normal_of(x)?;
    if xn >= 0.0 {
        return d.try_eval(x).map(Evaluation::exact);
    }
    let weight = |t: &Term| t.a * (-t.b).powi(m as i32);
    let tail_bound = plan.tail_bound(f.growth(), weight, |t| t.b * xn)?;
    let mut p = x.to_vec();
    let n = p.len() - 1;
    let mut value = 0.0;
    for t in plan.terms() {
        let y = -t.b * xn;
        if d.may_be_nonzero(y) {
            p[n] = y;
            value += weight(t) * d.try_eval(&p)?;
        }
    }
    Ok(Evaluation { value, tail_bound })
}

/// Batch form; runs in parallel unless `f` declared itself single-threaded.
pub fn extend_points(plan: &ExtensionPlan, f: &CallableFunction, points: &[Vec<f64>]) -> Result<Vec<Evaluation>> {
    if f.is_concurrent() {
        points.par_iter().map(|x| extend_callable(plan, f, x)).collect()
    } else {
        points.iter().map(|x| extend_callable(plan, f, x)).collect()
    }
}

/// One-dimensional `Ef(t)` for `t < 0` in the family's own precision.
pub fn extend_extended(family: &CoefficientFamily, f: impl Fn(&Real) -> Real, t: &Real) -> Result<Real> {
    if !t.is_negative() {
        return Err(Error::InvalidParameter("extended evaluation is for x_n < 0".into()));
    }
    let bits = family.bits().max(t.bits());
    let t = t.with_bits(bits);
    Ok(family
        .entries()
        .iter()
        .map(|e| &e.a * &f(&-(&e.b * &t)))
        .fold(Real::zero(bits), |acc, v| acc + v))
}

/// `E*g(x) = g(x) + Σ_j (a_j/b_j) g(x', −x_n/b_j)` for `x_n > 0`.
pub fn adjoint_apply(plan: &ExtensionPlan, g: &CallableFunction, x: &[f64]) -> Result<Evaluation> {
    adjoint_normal_derivative(plan, g, 0, x)
}

/// `∂_n^m E*g(x) = g^{(m)}(x) + Σ_j (a_j/b_j)(−1/b_j)^m g^{(m)}(x', −x_n/b_j)`.
pub fn adjoint_normal_derivative(plan: &ExtensionPlan, g: &CallableFunction, m: usize, x: &[f64]) -> Result<Evaluation> {
    let xn = normal_of(x)?;
    if !(xn > 0.0) {
        return Err(Error::InvalidParameter(format!("adjoint is evaluated at x_n > 0, got {xn}")));
    }
    let d = g
        .derivative_function(m)
        .ok_or_else(|| Error::InvalidParameter(format!("{} has no derivative of order {m}", g.label())))?;
    let weight = |t: &Term| t.a / t.b * (-1.0 / t.b).powi(m as i32);
    let tail_bound = plan.tail_bound(g.growth(), weight, |t| xn / t.b)?;
    let mut value = d.try_eval(x)?;
    let mut p = x.to_vec();
    let n = p.len() - 1;
    for t in plan.terms() {
        let y = -xn / t.b;
        if d.may_be_nonzero(y) {
            p[n] = y;
            value += weight(t) * d.try_eval(&p)?;
        }
    }
    Ok(Evaluation { value, tail_bound })
}

/// `Sf`: `f` on `x_n >= 0` (the boundary keeps `f`'s value), zero below.
pub fn zero_extend(f: &CallableFunction) -> CallableFunction {
    let cut = |h: EvalFn| -> EvalFn {
        std::sync::Arc::new(move |x: &[f64]| if x[x.len() - 1] < 0.0 { 0.0 } else { h(x) })
    };
    let base = f.clone();
    let derivs = (1..=f.derivative_order())
        .filter_map(|m| f.derivative_function(m))
        .map(|d| cut(std::sync::Arc::new(move |x: &[f64]| d.eval(x))))
        .collect();
    let g = CallableFunction::new(format!("S[{}]", f.label()), f.dim(), Support::FullSpace, f.growth(), move |x| {
        if x[x.len() - 1] < 0.0 {
            0.0
        } else {
            base.eval(x)
        }
    })
    .with_normal_derivatives(derivs);
    if f.is_concurrent() {
        g
    } else {
        g.single_threaded()
    }
}

/// `ϑ^r f(x) = f(x', r x_n)`; derivative handles pick up `r^m`.
pub fn dilate(r: f64, f: &CallableFunction) -> Result<CallableFunction> {
    if r == 0.0 || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("dilation factor must be finite and nonzero, got {r}")));
    }
    let base = f.clone();
    let derivs = (1..=f.derivative_order())
        .filter_map(|m| f.derivative_function(m).map(|d| (m, d)))
        .map(|(m, d)| {
            let s = r.powi(m as i32);
            std::sync::Arc::new(move |x: &[f64]| s * d.eval(&with_normal(x, r * x[x.len() - 1]))) as EvalFn
        })
        .collect();
    let growth = match f.growth() {
        Growth::Bounded(c) => Growth::Bounded(c),
        Growth::Polynomial { degree, constant } => {
            Growth::Polynomial { degree, constant: constant * r.abs().max(1.0).powi(degree as i32) }
        }
        Growth::Power { exponent, constant } => Growth::Power { exponent, constant: constant * r.abs().powi(exponent) },
    };
    let support = if r > 0.0 { f.support() } else { Support::FullSpace };
    let g = CallableFunction::new(format!("dil({r})[{}]", f.label()), f.dim(), support, growth, move |x| {
        base.eval(&with_normal(x, r * x[x.len() - 1]))
    })
    .with_normal_derivatives(derivs);
    Ok(if f.is_concurrent() { g } else { g.single_threaded() })
}

/// `𝐄^{m,r}f(x)` as an exact finite sum over a prepared finite family.
pub fn finite_extend_with(family: &CoefficientFamily, f: &CallableFunction, x: &[f64]) -> Result<f64> {
    if !family.kind().is_finite() || !family.tail().is_empty() {
        return Err(Error::InvalidParameter("finite extension needs a finite family".into()));
    }
    let xn = normal_of(x)?;
    if xn == 0.0 {
        return Err(Error::InvalidParameter("finite extension is not evaluated on the boundary".into()));
    }
    if xn > 0.0 {
        return f.try_eval(x);
    }
    let mut p = x.to_vec();
    let n = p.len() - 1;
    let mut value = 0.0;
    for t in family.terms() {
        p[n] = -t.b * xn;
        value += t.a * f.try_eval(&p)?;
    }
    Ok(value)
}

/// Precision used when `finite_extend` builds its own coefficients.
pub const FINITE_BITS: usize = 192;

pub fn finite_extend(m: usize, r: f64, f: &CallableFunction, x: &[f64]) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("r must be positive, got {r}")));
    }
    let family = dyadic_finite_coefficients(m, &Real::from_f64(r, FINITE_BITS))?;
    finite_extend_with(&family, f, x)
}

/// `(a(−b)^γ, b)`: the family that satisfies `∂_n^γ E = E' ∂_n^γ`.
pub fn commuted_family(family: &CoefficientFamily, gamma: i32) -> Result<CoefficientFamily> {
    family.commuted(gamma)
}

/// `(a(−b)^γ, 1/b)`: the family appearing in `∂_n^γ E* = E'* ∂_n^γ`.
pub fn commuted_family_inverted(family: &CoefficientFamily, gamma: i32) -> Result<CoefficientFamily> {
    family.commuted_inverted(gamma)
}

/// `K_{q,δ} = ((2^{δ/(1−q)} + 1)/(2^{δ/(1−q)} − 1))^{1/q − 1}`, and 1 at `q = 1`.
pub fn triangle_constant(q: f64, delta: f64) -> Result<f64> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidParameter(format!("q must lie in (0, 1], got {q}")));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    if q == 1.0 {
        return Ok(1.0);
    }
    let s = (delta / (1.0 - q)).exp2();
    Ok(((s + 1.0) / (s - 1.0)).powf(1.0 / q - 1.0))
}

/// Central difference at step `h`, Richardson-extrapolated once with `h/2`.
pub fn richardson_derivative(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{synthesize_two_sided, vandermonde_coefficients};
    use crate::operator::function::Builtin;
    use crate::precision::PrecisionContext;
    use std::sync::OnceLock;

    fn family() -> &'static CoefficientFamily {
        static F: OnceLock<CoefficientFamily> = OnceLock::new();
        F.get_or_init(|| {
            let ctx = PrecisionContext::new(256, 14, 1e-30).unwrap();
            synthesize_two_sided(&ctx, 4, None).unwrap().family
        })
    }

    fn plan() -> ExtensionPlan {
        ExtensionPlan::new(family().clone())
    }

    #[test]
    fn constants_and_lines() {
        let p = plan();
        let one = extend_callable(&p, &Builtin::Const.callable(1), &[-0.3]).unwrap();
        assert!((one.value - 1.0).abs() < 1e-12);
        let lin = extend_callable(&p, &Builtin::Poly(1).callable(1), &[-0.3]).unwrap();
        assert!((lin.value + 0.3).abs() < 1e-12);
        // positive side is f itself
        let f = Builtin::Sine(2.0).callable(2);
        assert_eq!(extend_callable(&p, &f, &[0.4, 0.7]).unwrap().value, f.eval(&[0.4, 0.7]));
    }

    #[test]
    fn exp_decay_matches_direct_sum() {
        let p = plan();
        let t = 0.25;
        let v = extend_callable(&p, &Builtin::ExpDecay.callable(1), &[-t]).unwrap().value;
        let direct: f64 = family().terms().iter().map(|e| e.a * (-e.b * t).exp()).sum();
        assert!((v - direct).abs() < 1e-14);
    }

    #[test]
    fn tail_certificate_fails_for_fast_growth() {
        let p = plan();
        let f = Builtin::Poly(6).callable(1);
        let ok = extend_callable(&p, &f, &[-3.0]);
        assert!(ok.is_ok(), "{ok:?}");
        let far = extend_callable(&p, &f, &[-1e10]);
        assert!(matches!(far, Err(Error::TailCertificate { .. })), "{far:?}");
    }

    #[test]
    fn plan_validation() {
        assert!(plan().with_order(0).is_err());
        assert!(plan().with_order(9).is_err());
        assert!(plan().with_tail_target(0.0).is_err());
        assert!(plan().with_policy(OutOfRangePolicy::DecayModel { rate: -1.0 }).is_err());
    }

    #[test]
    fn decomposition_identity() {
        let p = plan();
        let f = Builtin::Gaussian.callable(1);
        let s = zero_extend(&f);
        for &x in &[-0.05, -0.4, -1.3] {
            let sum: f64 = p.terms().iter().map(|t| t.a * dilate(-t.b, &s).unwrap().eval(&[x])).sum();
            let direct = extend_callable(&p, &f, &[x]).unwrap().value;
            assert!((s.eval(&[x]) + sum - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_extension_and_dilation() {
        let s = zero_extend(&Builtin::Const.callable(1));
        assert_eq!(s.eval(&[-1.0]), 0.0);
        assert_eq!(s.eval(&[0.0]), 1.0);
        let f = Builtin::Sine(1.3).callable(1);
        let back = dilate(0.25, &dilate(4.0, &f).unwrap()).unwrap();
        assert_eq!(back.eval(&[0.37]), f.eval(&[0.37]));
        assert_eq!(dilate(1.0, &f).unwrap().eval(&[0.9]), f.eval(&[0.9]));
        // ϑ^{−4}Sf at x_n < 0 reads f at −4x_n
        let g = dilate(-4.0, &zero_extend(&f)).unwrap();
        assert_eq!(g.eval(&[-0.1]), f.eval(&[0.4]));
        assert!(dilate(0.0, &f).is_err());
    }

    #[test]
    fn adjoint_basics() {
        let p = plan();
        let zero = CallableFunction::normal("0", Support::FullSpace, Growth::Bounded(0.0), |_| 0.0);
        assert_eq!(adjoint_apply(&p, &zero, &[0.3]).unwrap().value, 0.0);
        let up = CallableFunction::normal("up", Support::FullSpace, Growth::Bounded(1.0), |t| {
            if t > 0.0 {
                (-t).exp()
            } else {
                0.0
            }
        });
        assert_eq!(adjoint_apply(&p, &up, &[0.3]).unwrap().value, (-0.3f64).exp());
        assert!(adjoint_apply(&p, &up, &[-0.3]).is_err());
    }

    #[test]
    fn finite_operator_moments() {
        let x = [-0.7];
        let line = Builtin::Poly(1).callable(1);
        assert!((finite_extend(1, 1.0, &line, &x).unwrap() + 0.7).abs() < 1e-14);
        let inv = Builtin::Poly(-1).callable(1);
        assert!((finite_extend(1, 1.0, &inv, &x).unwrap() + 1.0 / 0.7).abs() < 1e-12);
        let sq = Builtin::Poly(2).callable(1);
        assert!((finite_extend(1, 1.0, &sq, &[-1.0]).unwrap() + 2.75).abs() < 1e-14);
        assert!(finite_extend(1, 1.0, &sq, &[0.0]).is_err());
        // Vandermonde families are finite too
        let v = vandermonde_coefficients(&[Real::one(128), Real::from_i64(2, 128)], 0, 1).unwrap();
        assert!((finite_extend_with(&v, &line, &[-0.5]).unwrap() + 0.5).abs() < 1e-14);
    }

    #[test]
    fn triangle_constant_values() {
        assert_eq!(triangle_constant(1.0, 0.3).unwrap(), 1.0);
        assert!((triangle_constant(0.5, 0.5).unwrap() - 3.0).abs() < 1e-12);
        let ks: Vec<f64> = [0.25, 0.5, 1.0, 2.0].iter().map(|&d| triangle_constant(0.5, d).unwrap()).collect();
        assert!(ks.windows(2).all(|w| w[1] < w[0]));
        assert!(triangle_constant(0.0, 1.0).is_err());
        assert!(triangle_constant(0.5, 0.0).is_err());
    }

    #[test]
    fn commutation_with_derivative() {
        let fam = commuted_family(family(), 1).unwrap();
        let p1 = ExtensionPlan::new(fam);
        let p = plan();
        let f = Builtin::Gaussian.callable(1);
        let df = f.derivative_function(1).unwrap();
        for &x in &[-0.2, -0.6, -1.1] {
            let fd = richardson_derivative(|t| extend_callable(&p, &f, &[t]).unwrap().value, x, 1e-4);
            let exact = extend_callable(&p1, &df, &[x]).unwrap().value;
            assert!((fd - exact).abs() < 1e-6, "x={x}: {fd} vs {exact}");
        }
    }
}
