//! Extension, continuity, C² matching and locality checks on the shipped shapes.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::curve::{PlanarDomain, Point};
use crate::domain::cutoff::CutoffProfile;
use crate::domain::extend::{Bump, DependenceReport, DomainExtension, DomainFn};
use crate::error::{Error, Result};
use crate::normlab::dilation::fit_slope;
use crate::normlab::norms::fd_weights;
use crate::operator::ExtensionPlan;

/// Smooth functions on the plane used by the domain checks and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlaneFunction {
    One,
    X1,
    X1X2,
    ExpNegX1,
}

impl PlaneFunction {
    pub const ALL: [PlaneFunction; 4] = [PlaneFunction::One, PlaneFunction::X1, PlaneFunction::X1X2, PlaneFunction::ExpNegX1];

    pub fn id(self) -> &'static str {
        match self {
            PlaneFunction::One => "one",
            PlaneFunction::X1 => "x1",
            PlaneFunction::X1X2 => "x1x2",
            PlaneFunction::ExpNegX1 => "exp-neg-x1",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown plane function {s:?}")))
    }

    pub fn eval(self, p: Point) -> f64 {
        match self {
            PlaneFunction::One => 1.0,
            PlaneFunction::X1 => p[0],
            PlaneFunction::X1X2 => p[0] * p[1],
            PlaneFunction::ExpNegX1 => (-p[0]).exp(),
        }
    }
}

/// The disk, the 1.3 × 0.8 ellipse and the three-mode star, all with the
/// same tube half-width.
pub fn shipped_shapes(t_max: f64) -> Result<Vec<(&'static str, PlanarDomain)>> {
    Ok(vec![
        ("disk", PlanarDomain::disk(t_max)?),
        ("ellipse", PlanarDomain::ellipse(1.3, 0.8, t_max)?),
        ("star", PlanarDomain::star(0.15, 3, t_max)?),
    ])
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub t_max: f64,
    pub interior_points: usize,
    pub boundary_points: usize,
    /// Distance from the boundary for the continuity comparison.
    pub offset: f64,
    pub continuity_limit: f64,
    pub c2_points: usize,
    /// Stencil steps in distance units, coarse to fine.
    pub c2_steps: Vec<f64>,
    /// Mismatches below this count as matched regardless of the fit.
    pub c2_floor: f64,
    pub min_order: f64,
    pub dependence_cases: usize,
    pub dependence_tol: f64,
    pub margin: f64,
    pub control_limit: f64,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            t_max: 0.3,
            interior_points: 100,
            boundary_points: 64,
            offset: 1e-4,
            continuity_limit: 1e-3,
            c2_points: 8,
            c2_steps: vec![4e-5, 2e-5, 1e-5],
            c2_floor: 1e-4,
            min_order: 0.8,
            dependence_cases: 20,
            dependence_tol: 1e-12,
            margin: 0.02,
            control_limit: 1e-6,
            seed: 20_240_601,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SecondDerivativeRow {
    pub function: &'static str,
    pub theta: f64,
    /// `(h, |∂²_ν ℰf(0⁻) − ∂²_ν f(0⁺)|)` from one-sided stencils.
    pub mismatches: Vec<(f64, f64)>,
    pub fitted_order: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShapeReport {
    pub shape: &'static str,
    pub reach: f64,
    pub interior_max_error: f64,
    /// Largest continuity mismatch divided by the sampled `C¹` scale of `f`.
    pub continuity_max: f64,
    pub second_derivative: Vec<SecondDerivativeRow>,
    pub dependence: Vec<DependenceReport>,
    /// `|ℰ(f + bump)(x) − ℰf(x)|` with the bump sitting on the normal ray of `x`.
    pub control_difference: f64,
    pub interior_pass: bool,
    pub continuity_pass: bool,
    pub second_derivative_pass: bool,
    pub dependence_pass: bool,
    pub control_pass: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DomainSuiteReport {
    pub config: SuiteConfig,
    pub shapes: Vec<ShapeReport>,
    pub pass: bool,
}

/// Runs every check on each shipped shape.
pub fn domain_suite(plan: &ExtensionPlan, cfg: &SuiteConfig) -> Result<DomainSuiteReport> {
    let shapes = shipped_shapes(cfg.t_max)?
        .into_iter()
        .enumerate()
        .map(|(i, (name, dom))| {
            let ext = DomainExtension::new(dom, CutoffProfile::default(), plan.clone(), 2)?;
            shape_suite(name, &ext, &SuiteConfig { seed: cfg.seed.wrapping_add(i as u64), ..cfg.clone() })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = shapes.iter().all(|s| s.pass);
    Ok(DomainSuiteReport { config: cfg.clone(), shapes, pass })
}

/// All checks on one domain, with random draws seeded from `cfg.seed`.
pub fn shape_suite(shape: &'static str, ext: &DomainExtension, cfg: &SuiteConfig) -> Result<ShapeReport> {
    if cfg.c2_steps.len() < 2 || cfg.c2_steps.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::InvalidParameter("C² check needs at least two positive steps".into()));
    }
    let rng = &mut ChaCha8Rng::seed_from_u64(cfg.seed);
    let interior_max_error = interior_error(ext, cfg.interior_points, rng)?;
    let continuity_max = PlaneFunction::ALL
        .into_iter()
        .map(|f| continuity_mismatch(ext, f, cfg.boundary_points, cfg.offset))
        .try_fold(0.0f64, |m, r| r.map(|v| m.max(v)))?;
    let second_derivative = (0..cfg.c2_points)
        .flat_map(|i| PlaneFunction::ALL.into_iter().map(move |f| (f, TAU * (i as f64 + 0.25) / cfg.c2_points as f64)))
        .map(|(f, theta)| second_derivative_row(ext, f, theta, cfg))
        .collect::<Result<Vec<_>>>()?;
    let dependence = dependence_cases(ext, cfg, rng)?;
    let control_difference = control_case(ext)?;

    let interior_pass = interior_max_error == 0.0;
    let continuity_pass = continuity_max <= cfg.continuity_limit;
    let second_derivative_pass = second_derivative.iter().all(|r| r.pass);
    let dependence_pass = dependence.len() == cfg.dependence_cases && dependence.iter().all(|r| r.pass);
    let control_pass = control_difference > cfg.control_limit;
    Ok(ShapeReport {
        shape,
        reach: ext.domain().reach(),
        interior_max_error,
        continuity_max,
        second_derivative,
        dependence,
        control_difference,
        interior_pass,
        continuity_pass,
        second_derivative_pass,
        dependence_pass,
        control_pass,
        pass: interior_pass && continuity_pass && second_derivative_pass && dependence_pass && control_pass,
    })
}

fn bounding_box(dom: &PlanarDomain) -> (Point, Point) {
    dom.samples().1.iter().fold(([f64::MAX; 2], [f64::MIN; 2]), |(lo, hi), p| {
        ([lo[0].min(p[0]), lo[1].min(p[1])], [hi[0].max(p[0]), hi[1].max(p[1])])
    })
}

/// Largest `|ℰf(x) − f(x)|` over random interior points, for every plane function.
fn interior_error(ext: &DomainExtension, count: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let (lo, hi) = bounding_box(ext.domain());
    let mut worst = 0.0f64;
    let mut found = 0;
    while found < count {
        let x = [rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1])];
        if !ext.domain().polygon_contains(x) || ext.domain().sampled_distance(x) < 1e-6 {
            continue;
        }
        found += 1;
        for f in PlaneFunction::ALL {
            let g = move |p: Point| f.eval(p);
            worst = worst.max((ext.extend(&g, x)?.value - f.eval(x)).abs());
        }
    }
    Ok(worst)
}

/// `max |f| + |∇f|` on the boundary samples, central differences.
fn c1_scale(dom: &PlanarDomain, f: PlaneFunction) -> f64 {
    let d = 1e-6;
    dom.samples()
        .1
        .iter()
        .map(|&p| {
            let gx = (f.eval([p[0] + d, p[1]]) - f.eval([p[0] - d, p[1]])) / (2.0 * d);
            let gy = (f.eval([p[0], p[1] + d]) - f.eval([p[0], p[1] - d])) / (2.0 * d);
            f.eval(p).abs() + gx.hypot(gy)
        })
        .fold(0.0, f64::max)
}

/// `max_k |ℰf(γ_k − τν_k) − f(γ_k + τν_k)|` relative to the `C¹` scale.
fn continuity_mismatch(ext: &DomainExtension, f: PlaneFunction, points: usize, offset: f64) -> Result<f64> {
    let dom = ext.domain();
    let g = move |p: Point| f.eval(p);
    let mut worst = 0.0f64;
    for k in 0..points {
        let theta = TAU * k as f64 / points as f64;
        let (p, n) = (dom.point(theta), dom.inward_normal(theta));
        let outside = ext.extend(&g, [p[0] - offset * n[0], p[1] - offset * n[1]])?.value;
        let inside = f.eval([p[0] + offset * n[0], p[1] + offset * n[1]]);
        worst = worst.max((outside - inside).abs());
    }
    Ok(worst / c1_scale(dom, f).max(f64::MIN_POSITIVE))
}

/// One-sided second normal derivatives at `γ(θ)`: exterior nodes `−h..−4h`,
/// interior nodes `0..3h`.
fn second_derivative_row(ext: &DomainExtension, f: PlaneFunction, theta: f64, cfg: &SuiteConfig) -> Result<SecondDerivativeRow> {
    let dom = ext.domain();
    let (p, n) = (dom.point(theta), dom.inward_normal(theta));
    let g = move |q: Point| f.eval(q);
    let at = |s: f64| [p[0] + s * n[0], p[1] + s * n[1]];
    let mismatches = cfg
        .c2_steps
        .iter()
        .map(|&h| {
            let outer: Vec<f64> = (1..=4).map(|i| -(i as f64) * h).collect();
            let inner: Vec<f64> = (0..4).map(|i| i as f64 * h).collect();
            let side = |nodes: &[f64]| -> Result<f64> {
                let w = fd_weights(0.0, nodes, 2);
                nodes.iter().zip(&w).try_fold(0.0, |acc, (&s, w)| Ok(acc + w * ext.extend(&g, at(s))?.value))
            };
            Ok((h, (side(&outer)? - side(&inner)?).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let logs: Vec<(f64, f64)> = mismatches.iter().filter(|(_, m)| *m > 0.0).map(|(h, m)| (h.ln(), m.ln())).collect();
    let fitted_order = (logs.len() >= 2).then(|| fit_slope(&logs));
    let small = mismatches.iter().all(|(_, m)| *m <= cfg.c2_floor);
    let pass = small || fitted_order.is_some_and(|o| o >= cfg.min_order);
    Ok(SecondDerivativeRow { function: f.id(), theta, mismatches, fitted_order, pass })
}

/// Random exterior points with random interior bumps kept off their normal
/// segments; invalid draws are redrawn.
fn dependence_cases(ext: &DomainExtension, cfg: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<Vec<DependenceReport>> {
    let (lo, hi) = bounding_box(ext.domain());
    let f = |p: Point| PlaneFunction::ExpNegX1.eval(p) + PlaneFunction::X1X2.eval(p);
    let mut out = Vec::with_capacity(cfg.dependence_cases);
    let mut attempts = 0;
    while out.len() < cfg.dependence_cases {
        attempts += 1;
        if attempts > 1000 * cfg.dependence_cases.max(1) {
            return Err(Error::InvalidParameter("could not place disjoint bumps".into()));
        }
        let x = ext.chart().forward(rng.gen_range(0.0..TAU), rng.gen_range(-0.9..-0.05))?;
        let bump = Bump::new([rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1])], rng.gen_range(0.05..0.3));
        match ext.curve_dependence_check(&f, x, &bump, cfg.margin, cfg.dependence_tol) {
            Ok(r) => out.push(r),
            Err(Error::InvalidParameter(_) | Error::BumpNotDisjoint { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// A bump straddling the normal ray through `x = Ψ^{-1}(0, −1/3)`; on the
/// unit disk with `t_max = 0.3` this is `x = (1.1, 0)`, bump at `(0.7, 0)`.
fn control_case(ext: &DomainExtension) -> Result<f64> {
    let f: DomainFn = &|p: Point| PlaneFunction::ExpNegX1.eval(p);
    let x = ext.chart().forward(0.0, -1.0 / 3.0)?;
    let center = ext.chart().forward(0.0, 1.0 - 1e-12)?;
    ext.dependence_difference(f, x, &Bump::new(center, 0.25))
}
