//! The domain extension `ℰ` and its one-parameter dependence structure.

use crate::domain::chart::{Location, TubularChart};
use crate::domain::curve::{dot, norm, sub, PlanarDomain, Point};
use crate::domain::cutoff::CutoffProfile;
use crate::error::{Error, Result};
use crate::operator::{Evaluation, ExtensionPlan};

/// A function on the closed domain.
pub type DomainFn<'a> = &'a (dyn Fn(Point) -> f64 + Sync);

/// Chart, cutoffs and reflection coefficients bundled for evaluation.
#[derive(Clone, Debug)]
pub struct DomainExtension {
    chart: TubularChart,
    cutoff: CutoffProfile,
    plan: ExtensionPlan,
}

impl DomainExtension {
    /// `smoothness` is the largest derivative order later checks rely on;
    /// the family must have validated moments `0..=smoothness`.
    pub fn new(domain: PlanarDomain, cutoff: CutoffProfile, plan: ExtensionPlan, smoothness: u32) -> Result<Self> {
        let validated = plan.family().validated();
        if !(0..=smoothness as i32).all(|k| validated.contains(k)) {
            return Err(Error::InvalidParameter(format!(
                "coefficient family is validated on {:?}, need 0..={smoothness}",
                validated.range()
            )));
        }
        Ok(DomainExtension { chart: TubularChart::new(domain), cutoff, plan })
    }

    pub fn chart(&self) -> &TubularChart {
        &self.chart
    }

    pub fn domain(&self) -> &PlanarDomain {
        self.chart.domain()
    }

    pub fn cutoff(&self) -> &CutoffProfile {
        &self.cutoff
    }

    pub fn plan(&self) -> &ExtensionPlan {
        &self.plan
    }

    /// `f(x)` on the domain; `χ_1(t)·Σ_j a_j (χ_0 f)(Ψ^{-1}(θ, b_j|t|))` in
    /// the outer half of the tube; 0 beyond it.
    pub fn extend(&self, f: DomainFn, x: Point) -> Result<Evaluation> {
        match self.chart.locate(x)? {
            Location::Interior => Ok(Evaluation { value: f(x), tail_bound: 0.0 }),
            Location::Tube { t, .. } if t >= 0.0 => Ok(Evaluation { value: f(x), tail_bound: 0.0 }),
            Location::Exterior => Ok(Evaluation { value: 0.0, tail_bound: 0.0 }),
            Location::Tube { theta, t } => self.reflect(f, theta, -t),
        }
    }

    fn reflect(&self, f: DomainFn, theta: f64, depth: f64) -> Result<Evaluation> {
        let outer = self.cutoff.chi1(depth);
        if outer == 0.0 {
            return Ok(Evaluation { value: 0.0, tail_bound: 0.0 });
        }
        let reach = self.cutoff.ends()[0];
        let mut sum = 0.0;
        let mut sup = f(self.domain().point(theta)).abs();
        for term in self.plan.terms() {
            let s = term.b * depth;
            if s >= reach {
                continue;
            }
            let v = self.cutoff.chi0(s) * f(self.chart.unchecked_forward(theta, s));
            sup = sup.max(v.abs());
            sum += term.a * v;
        }
        let tail: f64 = self.plan.tail_terms().iter().map(|t| t.a.abs()).sum();
        Ok(Evaluation { value: outer * sum, tail_bound: outer * tail * sup })
    }

    /// `X = χ_2(t)·∂x/∂t = χ_2(t)·t_max·ν_in(θ)` in the tube, 0 elsewhere.
    pub fn dependence_field(&self, x: Point) -> Result<Point> {
        match self.chart.locate(x)? {
            Location::Tube { theta, t } => {
                let w = self.cutoff.chi2(t) * self.domain().t_max();
                let n = self.domain().inward_normal(theta);
                Ok([w * n[0], w * n[1]])
            }
            _ => Ok([0.0, 0.0]),
        }
    }

    /// RK4 integral curve of the dependence field.
    pub fn integral_curve(&self, start: Point, dt: f64, steps: usize) -> Result<Vec<Point>> {
        let mut path = vec![start];
        let mut p = start;
        let shift = |p: Point, v: Point, h: f64| [p[0] + h * v[0], p[1] + h * v[1]];
        for _ in 0..steps {
            let k1 = self.dependence_field(p)?;
            let k2 = self.dependence_field(shift(p, k1, dt / 2.0))?;
            let k3 = self.dependence_field(shift(p, k2, dt / 2.0))?;
            let k4 = self.dependence_field(shift(p, k3, dt))?;
            p = [
                p[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                p[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ];
            path.push(p);
        }
        Ok(path)
    }

    /// `|ℰ(f + bump)(x) − ℰf(x)|` with no precondition on the bump.
    pub fn dependence_difference(&self, f: DomainFn, x: Point, bump: &Bump) -> Result<f64> {
        let perturbed = |y: Point| f(y) + bump.eval(y);
        let a = self.extend(&perturbed, x)?.value;
        let b = self.extend(f, x)?.value;
        Ok((a - b).abs())
    }

    /// Checks that a bump kept `margin` away from the normal segment through
    /// the exterior point `x` does not change `ℰf(x)`.
    pub fn curve_dependence_check(&self, f: DomainFn, x: Point, bump: &Bump, margin: f64, tol: f64) -> Result<DependenceReport> {
        let Location::Tube { theta, t } = self.chart.locate(x)? else {
            return Err(Error::InvalidParameter("dependence checks need an exterior point in the tube".into()));
        };
        if t >= 0.0 {
            return Err(Error::InvalidParameter("dependence checks need an exterior point in the tube".into()));
        }
        let dom = self.domain();
        // sampled distances overestimate by at most half a chord
        let samples = dom.samples().1;
        let chord = samples.windows(2).map(|w| norm(sub(w[1], w[0]))).fold(0.0, f64::max);
        let inside = dom.polygon_contains(bump.center) && dom.sampled_distance(bump.center) - chord >= bump.radius;
        if !inside {
            return Err(Error::InvalidParameter("bump support must lie inside the domain".into()));
        }
        let a = dom.point(theta);
        let b = self.chart.unchecked_forward(theta, 1.0);
        let clearance = segment_distance(bump.center, a, b) - bump.radius;
        if clearance < margin {
            return Err(Error::BumpNotDisjoint { clearance, margin });
        }
        let difference = self.dependence_difference(f, x, bump)?;
        Ok(DependenceReport { x, theta, t, bump: *bump, clearance, difference, tol, pass: difference <= tol })
    }
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let s = (dot(sub(p, a), ab) / dot(ab, ab)).clamp(0.0, 1.0);
    norm(sub(p, [a[0] + s * ab[0], a[1] + s * ab[1]]))
}

/// `amplitude·exp(1 − 1/(1 − ρ²))` for `ρ = |y − center|/radius < 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub center: Point,
    pub radius: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn new(center: Point, radius: f64) -> Self {
        Bump { center, radius, amplitude: 1.0 }
    }

    pub fn eval(&self, y: Point) -> f64 {
        let rho2 = dot(sub(y, self.center), sub(y, self.center)) / (self.radius * self.radius);
        if rho2 >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - 1.0 / (1.0 - rho2)).exp()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DependenceReport {
    pub x: Point,
    pub theta: f64,
    pub t: f64,
    pub bump: Bump,
    pub clearance: f64,
    pub difference: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Whether a grid node lies inside, outside, or in the tube.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mask {
    Inside,
    Outside,
    Tube,
}

impl Mask {
    pub fn name(self) -> &'static str {
        match self {
            Mask::Inside => "inside",
            Mask::Outside => "outside",
            Mask::Tube => "tube",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample {
    pub point: Point,
    pub field: Point,
    pub mask: Mask,
}

impl DomainExtension {
    /// The dependence field on an `n × n` grid over `[lo, hi]²`, row-major in `y`.
    pub fn field_samples(&self, lo: Point, hi: Point, n: usize) -> Result<Vec<FieldSample>> {
        if n < 2 {
            return Err(Error::InvalidParameter("field grid needs n >= 2".into()));
        }
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for k in 0..n {
                let p = [
                    lo[0] + (hi[0] - lo[0]) * k as f64 / (n - 1) as f64,
                    lo[1] + (hi[1] - lo[1]) * i as f64 / (n - 1) as f64,
                ];
                let mask = match self.chart.locate(p)? {
                    Location::Tube { .. } => Mask::Tube,
                    Location::Interior => Mask::Inside,
                    Location::Exterior => Mask::Outside,
                };
                out.push(FieldSample { point: p, field: self.dependence_field(p)?, mask });
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::synthesize_two_sided;
    use crate::precision::PrecisionContext;

    pub(crate) fn disk() -> DomainExtension {
        let ctx = PrecisionContext::new(512, 20, 1e-30).unwrap();
        let plan = ExtensionPlan::new(synthesize_two_sided(&ctx, 10, None).unwrap().family);
        DomainExtension::new(PlanarDomain::disk(0.3).unwrap(), CutoffProfile::default(), plan, 2).unwrap()
    }

    #[test]
    fn constant_and_support() {
        let e = disk();
        let one = |_: Point| 1.0;
        assert_eq!(e.extend(&one, [0.3, 0.2]).unwrap().value, 1.0);
        assert_eq!(e.extend(&one, [1.5, 0.0]).unwrap().value, 0.0);
        let near: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|d| e.extend(&one, [1.0 + d, 0.0]).unwrap().value).collect();
        let gaps: Vec<f64> = near.iter().map(|v| (v - 1.0).abs()).collect();
        assert!(gaps[0] >= gaps[1] && gaps[1] >= gaps[2] && gaps[2] < 1e-9, "{near:?}");
        assert_eq!(e.extend(&one, [1.295, 0.0]).unwrap().value, 0.0);
    }

    #[test]
    fn field_and_curves() {
        let e = disk();
        let v = e.dependence_field([1.05, 0.0]).unwrap();
        assert!(v[0] < 0.0 && v[1].abs() < 1e-15);
        assert_eq!(e.dependence_field([2.0, 0.0]).unwrap(), [0.0, 0.0]);
        let path = e.integral_curve([0.9, 0.0], 0.1, 20).unwrap();
        assert!(path.iter().all(|p| p[1].abs() < 1e-14));
    }

    #[test]
    fn dependence_cases() {
        let e = disk();
        let f = |p: Point| (-p[0]).exp() + p[1];
        let r = e.curve_dependence_check(&f, [1.1, 0.0], &Bump::new([0.0, 0.5], 0.2), 0.02, 1e-12).unwrap();
        assert!(r.pass && r.difference == 0.0, "{r:?}");
        assert!(e.dependence_difference(&f, [1.1, 0.0], &Bump::new([0.7, 0.0], 0.25)).unwrap() > 1e-6);
        let zero = Bump { amplitude: 0.0, ..Bump::new([0.0, 0.5], 0.2) };
        assert_eq!(e.dependence_difference(&f, [1.1, 0.0], &zero).unwrap(), 0.0);
        assert!(matches!(
            e.curve_dependence_check(&f, [1.1, 0.0], &Bump::new([0.7, 0.0], 0.25), 0.02, 1e-12),
            Err(Error::BumpNotDisjoint { .. })
        ));
    }
}
