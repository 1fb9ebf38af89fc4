//! Evaluable functions on the half-space or the full space.
//!
//! Points are slices whose last coordinate is the normal variable `x_n`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::precision::Real;

pub type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Support {
    HalfSpace,
    FullSpace,
}

/// Declared bound on `|f(x', y)|` along a normal ray, used by tail certificates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Growth {
    /// `|f| <= c`.
    Bounded(f64),
    /// `|f(x', y)| <= c(1 + |y|)^degree`.
    Polynomial { degree: u32, constant: f64 },
    /// `|f(x', y)| <= c|y|^exponent` (negative exponents allowed).
    Power { exponent: i32, constant: f64 },
}

impl Growth {
    pub fn bound(&self, y: f64) -> f64 {
        let y = y.abs();
        match *self {
            Growth::Bounded(c) => c,
            Growth::Polynomial { degree, constant } => constant * (1.0 + y).powi(degree as i32),
            Growth::Power { exponent, constant } => constant * y.powi(exponent),
        }
    }
}

#[derive(Clone)]
pub struct CallableFunction {
    dim: usize,
    support: Support,
    growth: Growth,
    eval: EvalFn,
    normal_derivatives: Vec<EvalFn>,
    concurrent: bool,
    label: String,
    support_hint: Option<(f64, f64)>,
}

impl fmt::Debug for CallableFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CallableFunction")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("support", &self.support)
            .field("growth", &self.growth)
            .field("derivative_order", &self.normal_derivatives.len())
            .finish()
    }
}

impl CallableFunction {
    pub fn new<F>(label: impl Into<String>, dim: usize, support: Support, growth: Growth, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        CallableFunction {
            dim: dim.max(1),
            support,
            growth,
            eval: Arc::new(f),
            normal_derivatives: Vec::new(),
            concurrent: true,
            label: label.into(),
            support_hint: None,
        }
    }

    /// One-dimensional function of `x_n` alone.
    pub fn normal<F>(label: impl Into<String>, support: Support, growth: Growth, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(label, 1, support, growth, move |x: &[f64]| f(x[x.len() - 1]))
    }

    /// Attach `∂_n^m f` for `m = 1..=derivs.len()`.
    pub fn with_normal_derivatives(mut self, derivs: Vec<EvalFn>) -> Self {
        self.normal_derivatives = derivs;
        self
    }

    /// Declare `f` and its derivative handles negligible for `x_n` outside `[lo, hi]`;
    /// engines may then skip terms whose ray point falls outside.
    pub fn with_support_hint(mut self, lo: f64, hi: f64) -> Self {
        self.support_hint = Some((lo, hi));
        self
    }

    pub fn support_hint(&self) -> Option<(f64, f64)> {
        self.support_hint
    }

    /// Whether the normal coordinate `y` may carry a non-negligible value.
    pub fn may_be_nonzero(&self, y: f64) -> bool {
        self.support_hint.is_none_or(|(lo, hi)| y >= lo && y <= hi)
    }

    /// Mark the handle as unsafe for concurrent calls; engines then serialize.
    pub fn single_threaded(mut self) -> Self {
        self.concurrent = false;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_concurrent(&self) -> bool {
        self.concurrent
    }

    pub fn derivative_order(&self) -> usize {
        self.normal_derivatives.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn try_eval(&self, x: &[f64]) -> Result<f64> {
        let v = (self.eval)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation(format!("{} at {:?} returned {v}", self.label, x)))
        }
    }

    /// `∂_n^m f(x)`; order 0 is the function itself.
    pub fn normal_derivative(&self, m: usize, x: &[f64]) -> Option<f64> {
        match m {
            0 => Some(self.eval(x)),
            _ => self.normal_derivatives.get(m - 1).map(|d| d(x)),
        }
    }

    /// The derivative handle `∂_n^m f` as a function of its own.
    pub fn derivative_function(&self, m: usize) -> Option<CallableFunction> {
        if m == 0 {
            return Some(self.clone());
        }
        let eval = self.normal_derivatives.get(m - 1)?.clone();
        Some(CallableFunction {
            dim: self.dim,
            support: self.support,
            growth: self.growth,
            eval,
            normal_derivatives: self.normal_derivatives[m..].to_vec(),
            concurrent: self.concurrent,
            label: format!("d^{m} {}", self.label),
            support_hint: self.support_hint,
        })
    }
}

/// The shared registry of named test functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Builtin {
    Const,
    Poly(i32),
    ExpDecay,
    Gaussian,
    Sine(f64),
}

/// Analytic normal derivatives shipped with every builtin.
pub const BUILTIN_DERIVATIVES: usize = 8;

// physicists' Hermite polynomial H_m(x)
fn hermite(m: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    if m == 0 {
        return h0;
    }
    for k in 1..m {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

fn falling(k: i32, m: usize) -> f64 {
    (0..m as i32).map(|i| (k - i) as f64).product()
}

impl Builtin {
    pub fn parse(s: &str) -> Result<Builtin> {
        let s = s.trim();
        let s = s.strip_prefix("builtin:").unwrap_or(s);
        let bad = || Error::InvalidParameter(format!("unknown builtin function {s:?}"));
        match s.split_once(':') {
            None => match s {
                "const" => Ok(Builtin::Const),
                "exp-decay" => Ok(Builtin::ExpDecay),
                "gaussian" => Ok(Builtin::Gaussian),
                _ => Err(bad()),
            },
            Some(("poly", k)) => k.parse().map(Builtin::Poly).map_err(|_| bad()),
            Some(("sine", w)) => match w.parse::<f64>() {
                Ok(w) if w.is_finite() => Ok(Builtin::Sine(w)),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Builtin::Const => "const".into(),
            Builtin::Poly(k) => format!("poly:{k}"),
            Builtin::ExpDecay => "exp-decay".into(),
            Builtin::Gaussian => "gaussian".into(),
            Builtin::Sine(w) => format!("sine:{w}"),
        }
    }

    pub fn growth(&self) -> Growth {
        match *self {
            Builtin::Poly(k) if k >= 0 => Growth::Polynomial { degree: k as u32, constant: 1.0 },
            Builtin::Poly(k) => Growth::Power { exponent: k, constant: 1.0 },
            _ => Growth::Bounded(1.0),
        }
    }

    /// `∂_n^m` of the builtin at `x` (tangential coordinates only enter the Gaussian).
    pub fn derivative(&self, m: usize, x: &[f64]) -> f64 {
        let t = x[x.len() - 1];
        match *self {
            Builtin::Const => {
                if m == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Builtin::Poly(k) => {
                if k >= 0 && m as i32 > k {
                    0.0
                } else {
                    falling(k, m) * t.powi(k - m as i32)
                }
            }
            Builtin::ExpDecay => {
                let s = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
                s * (-t).exp()
            }
            Builtin::Gaussian => {
                let tang: f64 = x[..x.len() - 1].iter().map(|v| v * v).sum();
                let s = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
                s * hermite(m, t) * (-(t * t) - tang).exp()
            }
            Builtin::Sine(w) => w.powi(m as i32) * (w * t + m as f64 * std::f64::consts::FRAC_PI_2).sin(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.derivative(0, x)
    }

    pub fn callable(&self, dim: usize) -> CallableFunction {
        let b = *self;
        let derivs: Vec<EvalFn> = (1..=BUILTIN_DERIVATIVES)
            .map(|m| Arc::new(move |x: &[f64]| b.derivative(m, x)) as EvalFn)
            .collect();
        CallableFunction::new(self.name(), dim, Support::HalfSpace, self.growth(), move |x: &[f64]| b.eval(x))
            .with_normal_derivatives(derivs)
    }

    /// Extended-precision value at the normal coordinate `t` (one dimension).
    pub fn eval_real(&self, t: &Real) -> Real {
        let bits = t.bits();
        match *self {
            Builtin::Const => Real::one(bits),
            Builtin::Poly(k) => t.powi(k),
            Builtin::ExpDecay => (-t).exp(),
            Builtin::Gaussian => (-(t * t)).exp(),
            Builtin::Sine(w) => (&Real::from_f64(w, bits) * t).sin(),
        }
    }
}
