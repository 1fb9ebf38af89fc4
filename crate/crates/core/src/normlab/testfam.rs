//! The shipped 20-function test family.
//!
//! Every member is either `Re(P(x)·exp(q(x)))` with a complex polynomial `P`
//! and a complex quadratic `q`, or a compact bump `(1 − ((x − c)/w)²)^6`.
//! Both forms are defined on the whole line, so each member doubles as its own
//! smooth full-line representative.

use std::sync::Arc;

use rustfft::num_complex::Complex64 as C64;

use crate::operator::{CallableFunction, EvalFn, Growth, Support};

/// Derivative handles carried by each member.
pub const FAMILY_DERIVATIVES: usize = 8;

/// Relative level below which a member counts as zero.
const NEGLIGIBLE: f64 = 1e-17;

#[derive(Clone, Debug)]
enum Profile {
    /// `Re(P_m(x)·exp(q(x)))` for the m-th derivative, `P_0 = P`.
    Wave { polys: Vec<Vec<C64>>, q: [C64; 3] },
    /// `(1 − t²)^power`, `t = (x − center)/width`, zero for `|t| >= 1`.
    Bump { center: f64, width: f64, polys: Vec<Vec<f64>> },
}

#[derive(Clone, Debug)]
pub struct TestFunction {
    id: String,
    profile: Profile,
    support: (f64, f64),
    peak: f64,
    bandwidth: f64,
}

fn poly_eval<T>(p: &[T], x: T) -> T
where
    T: Copy + std::ops::Mul<Output = T> + std::ops::Add<Output = T> + Default,
{
    p.iter().rev().fold(T::default(), |acc, &c| acc * x + c)
}

fn poly_deriv<T>(p: &[T]) -> Vec<T>
where
    T: Copy + std::ops::Mul<f64, Output = T>,
{
    p.iter().enumerate().skip(1).map(|(i, &c)| c * i as f64).collect()
}

impl TestFunction {
    fn wave(id: &str, poly: Vec<C64>, q: [C64; 3], freq: f64) -> Self {
        // P_{m+1} = P_m' + P_m·q'
        let dq = [q[1], q[2] * 2.0];
        let mut polys = vec![poly];
        for _ in 0..FAMILY_DERIVATIVES {
            let p = polys.last().expect("non-empty");
            let mut next = vec![C64::default(); p.len() + 1];
            for (i, c) in poly_deriv(p).into_iter().enumerate() {
                next[i] += c;
            }
            for (i, &c) in p.iter().enumerate() {
                next[i] += c * dq[0];
                next[i + 1] += c * dq[1];
            }
            polys.push(next);
        }
        let sigma = 1.0 / (-q[2].re).sqrt();
        let degree = (polys[0].len() - 1) as f64;
        let bandwidth = freq / (2.0 * std::f64::consts::PI) + (2.0 + degree) / sigma;
        let envelope = |x: f64| poly_eval(&polys[0], C64::new(x, 0.0)).norm() * poly_eval(&q, C64::new(x, 0.0)).re.exp();
        let center = q[1].re / (-2.0 * q[2].re);
        let peak = (0..=4000)
            .map(|i| envelope(center - 8.0 * sigma + i as f64 * 4e-3 * sigma))
            .fold(0.0, f64::max);
        let edge = |dir: f64| {
            let mut x = center;
            while envelope(x) > NEGLIGIBLE * peak || (x - center).abs() < sigma {
                x += dir * 0.01 * sigma;
            }
            x
        };
        let support = (edge(-1.0), edge(1.0));
        TestFunction { id: id.into(), profile: Profile::Wave { polys, q }, support, peak, bandwidth }
    }

    fn gaussian(c: f64, sigma: f64) -> Self {
        let s2 = sigma * sigma;
        let q = [C64::new(-c * c / s2, 0.0), C64::new(2.0 * c / s2, 0.0), C64::new(-1.0 / s2, 0.0)];
        Self::wave(&format!("gauss(c={c},s={sigma})"), vec![C64::new(1.0, 0.0)], q, 0.0)
    }

    fn bump(center: f64, width: f64) -> Self {
        // (1 − t²)^6 expanded in t, then differentiated in x
        let power = 6usize;
        let mut base = vec![1.0];
        for _ in 0..power {
            let mut next = vec![0.0; base.len() + 2];
            for (i, &c) in base.iter().enumerate() {
                next[i] += c;
                next[i + 2] -= c;
            }
            base = next;
        }
        let mut polys = vec![base];
        for _ in 0..FAMILY_DERIVATIVES {
            let d: Vec<f64> = poly_deriv(polys.last().expect("non-empty")).iter().map(|c| c / width).collect();
            polys.push(if d.is_empty() { vec![0.0] } else { d });
        }
        TestFunction {
            id: format!("bump(c={center},w={width})"),
            profile: Profile::Bump { center, width, polys },
            support: (center - width, center + width),
            peak: 1.0,
            bandwidth: 8.0 / width,
        }
    }

    /// `cos(ωx)·exp(−(x − c)²/σ²)`, or the sine when `sine` is set.
    fn modulated(omega: f64, c: f64, sigma: f64, sine: bool) -> Self {
        let s2 = sigma * sigma;
        let q = [C64::new(-c * c / s2, 0.0), C64::new(2.0 * c / s2, omega), C64::new(-1.0 / s2, 0.0)];
        let (p, name) = if sine { (C64::new(0.0, -1.0), "sin") } else { (C64::new(1.0, 0.0), "cos") };
        Self::wave(&format!("{name}(w={omega})gauss(c={c},s={sigma})"), vec![p], q, omega)
    }

    /// `x^m·exp(−x²/σ²)`: vanishes to order `m` at the boundary.
    fn one_sided(m: usize, sigma: f64) -> Self {
        let mut poly = vec![C64::default(); m + 1];
        poly[m] = C64::new(1.0, 0.0);
        let q = [C64::default(), C64::default(), C64::new(-1.0 / (sigma * sigma), 0.0)];
        Self::wave(&format!("x^{m}gauss(s={sigma})"), poly, q, 0.0)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Interval outside which `|f| < 1e-17·peak`.
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    /// Frequency (cycles per unit) above which the spectrum is negligible.
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn derivative(&self, m: usize, x: f64) -> f64 {
        match &self.profile {
            Profile::Wave { polys, q } => {
                let z = C64::new(x, 0.0);
                let Some(p) = polys.get(m) else { return f64::NAN };
                (poly_eval(p, z) * poly_eval(q, z).exp()).re
            }
            Profile::Bump { center, width, polys } => {
                let t = (x - center) / width;
                if t.abs() >= 1.0 {
                    0.0
                } else {
                    polys.get(m).map_or(f64::NAN, |p| poly_eval(p, t))
                }
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    /// Largest `|f^{(m)}|` on a fine sample of the support.
    pub fn derivative_bound(&self, m: usize) -> f64 {
        let (lo, hi) = self.support;
        (0..=20000).map(|i| self.derivative(m, lo + (hi - lo) * i as f64 / 20000.0).abs()).fold(0.0, f64::max)
    }

    fn handle(&self, support: Support) -> CallableFunction {
        let me = Arc::new(self.clone());
        let derivs = (1..=FAMILY_DERIVATIVES)
            .map(|m| {
                let f = me.clone();
                Arc::new(move |x: &[f64]| f.derivative(m, x[x.len() - 1])) as EvalFn
            })
            .collect();
        let f = me.clone();
        let growth = Growth::Bounded((0..=3).map(|m| self.derivative_bound(m)).fold(0.0, f64::max) * 1.01);
        CallableFunction::normal(self.id.clone(), support, growth, move |x| f.eval(x))
            .with_normal_derivatives(derivs)
            .with_support_hint(self.support.0, self.support.1)
    }

    /// The member as a half-space input.
    pub fn callable(&self) -> CallableFunction {
        self.handle(Support::HalfSpace)
    }

    /// Smooth full-line representative (same formula on the whole line).
    pub fn representative(&self) -> CallableFunction {
        self.handle(Support::FullSpace)
    }
}

/// Gaussians, dilated bumps, modulated waves at three frequencies and
/// one-sided profiles, in a fixed order.
pub fn test_family() -> Vec<TestFunction> {
    let mut fam = vec![
        TestFunction::gaussian(0.0, 1.0),
        TestFunction::gaussian(0.0, 0.3),
        TestFunction::gaussian(0.5, 0.2),
        TestFunction::gaussian(1.0, 0.5),
        TestFunction::gaussian(2.0, 1.0),
    ];
    for (c, w) in [(0.5, 0.4), (1.0, 0.5), (0.2, 0.15), (3.0, 2.0), (0.0, 1.0), (1.5, 0.1)] {
        fam.push(TestFunction::bump(c, w));
    }
    for omega in [2.0, 8.0, 32.0] {
        fam.push(TestFunction::modulated(omega, 0.0, 1.0, false));
    }
    for omega in [2.0, 8.0, 32.0] {
        fam.push(TestFunction::modulated(omega, 1.0, 0.7, true));
    }
    fam.push(TestFunction::one_sided(1, 1.0));
    fam.push(TestFunction::one_sided(2, 0.7));
    fam.push(TestFunction::one_sided(3, 2.0));
    fam
}
