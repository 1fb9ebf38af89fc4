//! Normal-exponential tube coordinates `(θ, t)` around the boundary.

use std::f64::consts::TAU;

use crate::domain::curve::{dot, norm, sub, PlanarDomain, Point};
use crate::error::{Error, Result};

pub const PROJECTION_TOL: f64 = 1e-13;
pub const PROJECTION_ITERS: usize = 60;

/// `(θ, t) ↦ γ(θ) + t·t_max·ν_in(θ)`; `t > 0` inside the domain.
#[derive(Clone, Debug)]
pub struct TubularChart {
    domain: PlanarDomain,
    tol: f64,
    max_iter: usize,
}

/// Where a point sits relative to the tube.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Location {
    Tube { theta: f64, t: f64 },
    Interior,
    Exterior,
}

impl TubularChart {
    pub fn new(domain: PlanarDomain) -> Self {
        TubularChart { domain, tol: PROJECTION_TOL, max_iter: PROJECTION_ITERS }
    }

    pub fn with_projection(mut self, tol: f64, max_iter: usize) -> Result<Self> {
        if !(tol > 0.0) || max_iter == 0 {
            return Err(Error::InvalidParameter("projection needs tol > 0 and at least one iteration".into()));
        }
        self.tol = tol;
        self.max_iter = max_iter;
        Ok(self)
    }

    pub fn domain(&self) -> &PlanarDomain {
        &self.domain
    }

    pub fn forward(&self, theta: f64, t: f64) -> Result<Point> {
        if !(t.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!("chart coordinate t = {t} is outside (-1, 1)")));
        }
        Ok(self.unchecked_forward(theta, t))
    }

    pub(crate) fn unchecked_forward(&self, theta: f64, t: f64) -> Point {
        let p = self.domain.point(theta);
        let n = self.domain.inward_normal(theta);
        let s = t * self.domain.t_max();
        [p[0] + s * n[0], p[1] + s * n[1]]
    }

    /// Nearest-point projection by damped Newton on `(γ(θ) − x)·γ'(θ) = 0`,
    /// started from the nearest sample.
    fn project(&self, x: Point) -> Result<(f64, f64)> {
        let curve = self.domain.curve();
        let (i, _) = self.domain.nearest_sample(x);
        let mut theta = self.domain.samples().0[i];
        let step_cap = TAU / 64.0;
        let dist2 = |th: f64| {
            let d = sub(curve.point(th), x);
            dot(d, d)
        };
        for _ in 0..self.max_iter {
            let d = sub(curve.point(theta), x);
            let d1 = curve.derivative(1, theta);
            let d2 = curve.derivative(2, theta);
            let g = dot(d, d1);
            let h = dot(d1, d1) + dot(d, d2);
            let newton = if h > 0.0 { -g / h } else { -g.signum() * step_cap };
            if newton.abs() <= self.tol {
                let theta = (theta + newton).rem_euclid(TAU);
                let d = sub(x, curve.point(theta));
                let t = dot(d, self.domain.inward_normal(theta)) / self.domain.t_max();
                return Ok((theta, t));
            }
            let mut step = newton.clamp(-step_cap, step_cap);
            let before = dist2(theta);
            while step.abs() > 1e-9 && dist2(theta + step) > before {
                step /= 2.0;
            }
            theta += step;
        }
        Err(Error::ProjectionFailed(x[0], x[1]))
    }

    /// `(θ, t)` with `t` = signed distance / `t_max`, positive inside.
    pub fn inverse(&self, x: Point) -> Result<(f64, f64)> {
        if self.domain.sampled_distance(x) > 2.0 * self.domain.t_max() {
            return Err(Error::OutsideTube(x[0], x[1]));
        }
        let (theta, t) = self.project(x)?;
        if !(t.abs() < 1.0) {
            return Err(Error::OutsideTube(x[0], x[1]));
        }
        Ok((theta, t))
    }

    pub fn locate(&self, x: Point) -> Result<Location> {
        if self.domain.sampled_distance(x) > 1.2 * self.domain.t_max() {
            return Ok(if self.domain.polygon_contains(x) { Location::Interior } else { Location::Exterior });
        }
        let (theta, t) = self.project(x)?;
        Ok(if t >= 1.0 {
            Location::Interior
        } else if t <= -1.0 {
            Location::Exterior
        } else {
            Location::Tube { theta, t }
        })
    }

    /// Largest `|forward(inverse(x)) − x|` over the points.
    pub fn round_trip_error(&self, points: &[Point]) -> Result<f64> {
        points.iter().try_fold(0.0f64, |m, &x| {
            let (theta, t) = self.inverse(x)?;
            Ok(m.max(norm(sub(self.forward(theta, t)?, x))))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn circle_oracle() {
        let chart = TubularChart::new(PlanarDomain::disk(0.3).unwrap());
        let (th, t) = chart.inverse([0.85, 0.0]).unwrap();
        assert!(th.min(TAU - th) < 1e-12 && (t - 0.5).abs() < 1e-12);
        let (th, t) = chart.inverse([1.15, 0.0]).unwrap();
        assert!(th.min(TAU - th) < 1e-12 && (t + 0.5).abs() < 1e-12);
        assert!(matches!(chart.inverse([1.5, 0.0]), Err(Error::OutsideTube(..))));
        assert_eq!(chart.locate([0.1, 0.0]).unwrap(), Location::Interior);
        assert_eq!(chart.locate([2.0, 0.0]).unwrap(), Location::Exterior);
    }

    #[test]
    fn round_trip_on_all_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dom in [PlanarDomain::disk(0.3), PlanarDomain::ellipse(1.3, 0.8, 0.3), PlanarDomain::star(0.15, 3, 0.3)] {
            let chart = TubularChart::new(dom.unwrap());
            let pts: Vec<Point> =
                (0..100).map(|_| chart.forward(rng.gen_range(0.0..TAU), rng.gen_range(-0.99..0.99)).unwrap()).collect();
            let err = chart.round_trip_error(&pts).unwrap();
            assert!(err < 1e-10, "{err}");
        }
    }
}
