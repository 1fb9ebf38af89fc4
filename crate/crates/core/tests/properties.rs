use std::sync::OnceLock;

use proptest::prelude::*;
use reflext::coeffs::{seeley_one_sided_coefficients, synthesize_two_sided, vandermonde_coefficients, CoefficientFamily};
use reflext::domain::{CutoffProfile, DomainExtension, PlanarDomain, Point};
use reflext::operator::{extend_callable, CallableFunction, ExtensionPlan, Growth, Support};
use reflext::{PrecisionContext, Real};

fn family() -> &'static CoefficientFamily {
    static FAMILY: OnceLock<CoefficientFamily> = OnceLock::new();
    FAMILY.get_or_init(|| synthesize_two_sided(&PrecisionContext::new(512, 20, 1e-30).unwrap(), 8, None).unwrap().family)
}

fn plan() -> ExtensionPlan {
    ExtensionPlan::new(family().clone())
}

fn bump(c: f64, w: f64, scale: f64) -> CallableFunction {
    CallableFunction::normal("bump", Support::HalfSpace, Growth::Bounded(scale.abs()), move |y| {
        scale * (-((y - c) / w).powi(2)).exp()
    })
}

fn power(k: i32) -> CallableFunction {
    CallableFunction::normal("power", Support::HalfSpace, Growth::Polynomial { degree: k as u32, constant: 1.0 }, move |y| {
        y.powi(k)
    })
}

fn ext(f: &CallableFunction, x: f64) -> f64 {
    extend_callable(&plan(), f, &[x]).unwrap().value
}

fn disk() -> &'static DomainExtension {
    static EXT: OnceLock<DomainExtension> = OnceLock::new();
    EXT.get_or_init(|| DomainExtension::new(PlanarDomain::disk(0.3).unwrap(), CutoffProfile::default(), plan(), 2).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn restriction_is_the_identity(c in 0.0..3.0f64, w in 0.1..2.0f64, x in 0.0..5.0f64) {
        let f = bump(c, w, 1.0);
        prop_assert_eq!(ext(&f, x), (-((x - c) / w).powi(2)).exp());
    }

    #[test]
    fn linear_in_the_input(
        c1 in 0.0..2.0f64, c2 in 0.0..2.0f64, w in 0.2..1.5f64,
        alpha in -3.0..3.0f64, beta in -3.0..3.0f64, x in -3.0..-1e-3f64,
    ) {
        let (f, g) = (bump(c1, w, 1.0), bump(c2, w, 1.0));
        let sum = CallableFunction::normal("sum", Support::HalfSpace, Growth::Bounded(alpha.abs() + beta.abs()), move |y| {
            alpha * (-((y - c1) / w).powi(2)).exp() + beta * (-((y - c2) / w).powi(2)).exp()
        });
        let lhs = ext(&sum, x);
        let rhs = alpha * ext(&f, x) + beta * ext(&g, x);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + alpha.abs() + beta.abs()) * 10.0, "{lhs} vs {rhs}");
    }

    #[test]
    fn reproduces_low_powers(k in 0i32..=4, x in -2.0..-0.01f64) {
        let v = ext(&power(k), x);
        let expect = x.powi(k);
        prop_assert!((v - expect).abs() <= 1e-9 * expect.abs().max(1e-300), "k={k} x={x}: {v} vs {expect}");
    }

    #[test]
    fn vandermonde_moments_hold(raw in proptest::collection::btree_set(1u32..40, 2..5), m1_frac in 0.0..1.0f64) {
        let bits = 256;
        let nodes: Vec<Real> = raw.iter().map(|&n| Real::ratio(n as i64, 8, bits)).collect();
        let n = nodes.len();
        let m1 = ((n - 1) as f64 * m1_frac).floor() as usize;
        let m2 = n - 1 - m1;
        let fam = vandermonde_coefficients(&nodes, m1, m2).unwrap();
        for k in -(m1 as i32)..=m2 as i32 {
            let s: Real = fam.entries().iter().map(|e| &e.a * &(-&e.b).powi(k)).sum();
            prop_assert!((&s - &Real::one(bits)).abs().to_f64() < 1e-50, "k={k}");
        }
    }

    #[test]
    fn domain_extension_keeps_interior_values(r in 0.0..0.98f64, angle in 0.0..std::f64::consts::TAU) {
        let x: Point = [r * angle.cos(), r * angle.sin()];
        let f = |p: Point| (p[0] - 0.3 * p[1]).sin() + p[1] * p[1];
        prop_assert_eq!(disk().extend(&f, x).unwrap().value, f(x));
    }

    #[test]
    fn chart_round_trips(theta in 0.0..std::f64::consts::TAU, t in -0.99..0.99f64) {
        let chart = disk().chart();
        let x = chart.forward(theta, t).unwrap();
        let (th, tt) = chart.inverse(x).unwrap();
        let dtheta = (th - theta).rem_euclid(std::f64::consts::TAU);
        prop_assert!(dtheta.min(std::f64::consts::TAU - dtheta) < 1e-10 && (tt - t).abs() < 1e-10);
    }
}

#[test]
fn two_sided_family_is_symmetric() {
    let e = family().entries();
    for x in e.iter().filter(|x| x.j > 0) {
        let mirror = e.iter().find(|y| y.j == -x.j).unwrap();
        assert_eq!(x.a, mirror.a);
        assert_eq!(x.b, Real::int_pow(4, x.j as i32, 512));
    }
}

#[test]
fn seeley_family_has_positive_moments() {
    let ctx = PrecisionContext::new(512, 20, 1e-30).unwrap();
    let fam = seeley_one_sided_coefficients(&ctx, 6, 4).unwrap();
    for k in 0..=6 {
        let s: Real = fam.entries().iter().map(|e| &e.a * &(-&e.b).powi(k)).sum();
        assert!((s - Real::one(512)).abs().to_f64() < 1e-30, "k={k}");
    }
}
