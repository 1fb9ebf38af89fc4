//! Closed boundary curves given by truncated trigonometric series.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Nodes used for the curve invariants and the reach estimate.
pub const CURVE_SAMPLES: usize = 1024;

/// `x(θ) = Σ_k x_cos[k] cos kθ + x_sin[k] sin kθ`, and likewise `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCurve {
    pub x_cos: Vec<f64>,
    pub x_sin: Vec<f64>,
    pub y_cos: Vec<f64>,
    pub y_sin: Vec<f64>,
}

fn series(cos: &[f64], sin: &[f64], theta: f64, m: usize) -> f64 {
    // m-th derivative of Σ c_k cos kθ + s_k sin kθ
    let term = |k: usize, c: f64, s: f64| {
        let kf = k as f64;
        let phase = kf * theta + m as f64 * std::f64::consts::FRAC_PI_2;
        kf.powi(m as i32) * (c * phase.cos() + s * phase.sin())
    };
    let n = cos.len().max(sin.len());
    (0..n)
        .map(|k| {
            let c = cos.get(k).copied().unwrap_or(0.0);
            let s = sin.get(k).copied().unwrap_or(0.0);
            if k == 0 {
                if m == 0 {
                    c
                } else {
                    0.0
                }
            } else {
                term(k, c, s)
            }
        })
        .sum()
}

impl FourierCurve {
    pub fn circle(radius: f64) -> Self {
        FourierCurve { x_cos: vec![0.0, radius], x_sin: vec![], y_cos: vec![], y_sin: vec![0.0, radius] }
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        FourierCurve { x_cos: vec![0.0, a], x_sin: vec![], y_cos: vec![], y_sin: vec![0.0, b] }
    }

    /// The polar curve `r(θ) = 1 + amp·cos(mθ)` for `m >= 2`.
    pub fn star(amp: f64, modes: usize) -> Self {
        let n = modes + 2;
        let (mut xc, mut ys) = (vec![0.0; n], vec![0.0; n]);
        xc[1] = 1.0;
        ys[1] = 1.0;
        // cos mθ cos θ = (cos(m+1)θ + cos(m−1)θ)/2, cos mθ sin θ = (sin(m+1)θ − sin(m−1)θ)/2
        xc[modes + 1] += amp / 2.0;
        xc[modes - 1] += amp / 2.0;
        ys[modes + 1] += amp / 2.0;
        ys[modes - 1] -= amp / 2.0;
        FourierCurve { x_cos: xc, x_sin: vec![], y_cos: vec![], y_sin: ys }
    }

    /// `∂_θ^m γ(θ)`.
    pub fn derivative(&self, m: usize, theta: f64) -> Point {
        [series(&self.x_cos, &self.x_sin, theta, m), series(&self.y_cos, &self.y_sin, theta, m)]
    }

    pub fn point(&self, theta: f64) -> Point {
        self.derivative(0, theta)
    }
}

/// Which side of the parametrization the interior lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    InteriorLeft,
    InteriorRight,
}

impl Orientation {
    fn sign(self) -> f64 {
        match self {
            Orientation::InteriorLeft => 1.0,
            Orientation::InteriorRight => -1.0,
        }
    }
}

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn segments_cross(p: Point, q: Point, r: Point, s: Point) -> bool {
    let d1 = cross(sub(q, p), sub(r, p));
    let d2 = cross(sub(q, p), sub(s, p));
    let d3 = cross(sub(s, r), sub(p, r));
    let d4 = cross(sub(s, r), sub(q, r));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// A bounded planar domain with its tube half-width.
#[derive(Clone, Debug)]
pub struct PlanarDomain {
    curve: FourierCurve,
    t_max: f64,
    orientation: Orientation,
    thetas: Vec<f64>,
    samples: Vec<Point>,
    reach: f64,
}

impl PlanarDomain {
    pub fn new(curve: FourierCurve, t_max: f64, orientation: Orientation) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_max must be positive, got {t_max}")));
        }
        let thetas: Vec<f64> = (0..CURVE_SAMPLES).map(|i| TAU * i as f64 / CURVE_SAMPLES as f64).collect();
        let samples: Vec<Point> = thetas.iter().map(|&t| curve.point(t)).collect();
        let speeds: Vec<f64> = thetas.iter().map(|&t| norm(curve.derivative(1, t))).collect();
        if let Some(i) = speeds.iter().position(|&s| !(s > 1e-12)) {
            return Err(Error::InvalidCurve(format!("|γ'| vanishes near θ = {:.6}", thetas[i])));
        }
        let n = samples.len();
        for i in 0..n {
            for k in i + 2..n {
                if i == 0 && k == n - 1 {
                    continue;
                }
                if segments_cross(samples[i], samples[(i + 1) % n], samples[k], samples[(k + 1) % n])
                    || norm(sub(samples[i], samples[k])) < 1e-12
                {
                    return Err(Error::InvalidCurve(format!("self-intersection near θ = {:.6}", thetas[i])));
                }
            }
        }
        let area: f64 = (0..n).map(|i| cross(samples[i], samples[(i + 1) % n])).sum::<f64>() / 2.0;
        if area * orientation.sign() <= 0.0 {
            return Err(Error::InvalidCurve("orientation flag disagrees with the signed area".into()));
        }
        let reach = estimate_reach(&curve, &thetas, &samples, &speeds);
        if !(t_max < reach) {
            return Err(Error::ReachExceeded { t_max, reach });
        }
        Ok(PlanarDomain { curve, t_max, orientation, thetas, samples, reach })
    }

    pub fn disk(t_max: f64) -> Result<Self> {
        Self::new(FourierCurve::circle(1.0), t_max, Orientation::InteriorLeft)
    }

    pub fn ellipse(a: f64, b: f64, t_max: f64) -> Result<Self> {
        Self::new(FourierCurve::ellipse(a, b), t_max, Orientation::InteriorLeft)
    }

    pub fn star(amp: f64, modes: usize, t_max: f64) -> Result<Self> {
        if modes < 2 {
            return Err(Error::InvalidParameter("a star needs at least 2 modes".into()));
        }
        Self::new(FourierCurve::star(amp, modes), t_max, Orientation::InteriorLeft)
    }

    pub fn curve(&self) -> &FourierCurve {
        &self.curve
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn reach(&self) -> f64 {
        self.reach
    }

    pub fn samples(&self) -> (&[f64], &[Point]) {
        (&self.thetas, &self.samples)
    }

    pub fn point(&self, theta: f64) -> Point {
        self.curve.point(theta)
    }

    /// Unit normal pointing into the domain.
    pub fn inward_normal(&self, theta: f64) -> Point {
        let d = self.curve.derivative(1, theta);
        let s = self.orientation.sign() / norm(d);
        [-d[1] * s, d[0] * s]
    }

    /// Winding-number test against the sample polygon; meant for points well
    /// away from the boundary.
    pub fn polygon_contains(&self, x: Point) -> bool {
        let n = self.samples.len();
        let mut winding = 0i32;
        for i in 0..n {
            let (a, b) = (self.samples[i], self.samples[(i + 1) % n]);
            let c = cross(sub(b, a), sub(x, a));
            if a[1] <= x[1] {
                if b[1] > x[1] && c > 0.0 {
                    winding += 1;
                }
            } else if b[1] <= x[1] && c < 0.0 {
                winding -= 1;
            }
        }
        winding != 0
    }

    /// Index of the nearest sample and its distance.
    pub(crate) fn nearest_sample(&self, x: Point) -> (usize, f64) {
        self.samples
            .iter()
            .enumerate()
            .map(|(i, &p)| (i, norm(sub(x, p))))
            .fold((0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
    }

    /// Distance to the boundary from the sample polygon vertices.
    pub fn sampled_distance(&self, x: Point) -> f64 {
        self.nearest_sample(x).1
    }
}

/// `min(min radius of curvature, half the smallest distance between sample
/// pairs more than π·ρ_min apart along the curve)`.
pub fn estimate_reach(curve: &FourierCurve, thetas: &[f64], samples: &[Point], speeds: &[f64]) -> f64 {
    let rho = thetas
        .iter()
        .zip(speeds)
        .map(|(&t, &s)| {
            let k = cross(curve.derivative(1, t), curve.derivative(2, t)).abs();
            if k == 0.0 {
                f64::INFINITY
            } else {
                s.powi(3) / k
            }
        })
        .fold(f64::INFINITY, f64::min);
    let n = samples.len();
    let dtheta = TAU / n as f64;
    // cumulative arc length
    let mut arc = vec![0.0; n + 1];
    for i in 0..n {
        arc[i + 1] = arc[i] + 0.5 * (speeds[i] + speeds[(i + 1) % n]) * dtheta;
    }
    let total = arc[n];
    let gap = std::f64::consts::PI * rho;
    let mut far = f64::INFINITY;
    for i in 0..n {
        for k in i + 1..n {
            let along = arc[k] - arc[i];
            if along.min(total - along) > gap {
                far = far.min(norm(sub(samples[i], samples[k])));
            }
        }
    }
    rho.min(far / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_matches_polar_form() {
        let c = FourierCurve::star(0.15, 3);
        for i in 0..50 {
            let t = 0.13 * i as f64;
            let r = 1.0 + 0.15 * (3.0 * t).cos();
            let p = c.point(t);
            assert!((p[0] - r * t.cos()).abs() < 1e-14 && (p[1] - r * t.sin()).abs() < 1e-14);
            let h = 1e-5;
            let (a, b) = (c.point(t + h), c.point(t - h));
            let d = c.derivative(1, t);
            assert!((d[0] - (a[0] - b[0]) / (2.0 * h)).abs() < 1e-8);
        }
    }

    #[test]
    fn reach_estimates() {
        assert!((PlanarDomain::disk(0.3).unwrap().reach() - 1.0).abs() < 1e-3);
        // b²/a for the ellipse
        let e = PlanarDomain::ellipse(1.3, 0.8, 0.3).unwrap();
        assert!((e.reach() - 0.64 / 1.3).abs() < 1e-3, "{}", e.reach());
        let s = PlanarDomain::star(0.15, 3, 0.3).unwrap();
        assert!(s.reach() > 0.3 && s.reach() < 0.6, "{}", s.reach());
    }

    #[test]
    fn invalid_domains() {
        assert!(matches!(PlanarDomain::disk(1.5), Err(Error::ReachExceeded { .. })));
        assert!(PlanarDomain::new(FourierCurve::circle(1.0), 0.3, Orientation::InteriorRight).is_err());
        let figure_eight = FourierCurve { x_cos: vec![], x_sin: vec![0.0, 1.0], y_cos: vec![], y_sin: vec![0.0, 0.0, 0.5] };
        assert!(matches!(PlanarDomain::new(figure_eight, 0.1, Orientation::InteriorLeft), Err(Error::InvalidCurve(_))));
        let degenerate = FourierCurve { x_cos: vec![1.0], x_sin: vec![], y_cos: vec![], y_sin: vec![] };
        assert!(PlanarDomain::new(degenerate, 0.1, Orientation::InteriorLeft).is_err());
    }

    #[test]
    fn containment_and_normals() {
        let d = PlanarDomain::disk(0.3).unwrap();
        assert!(d.polygon_contains([0.2, 0.1]));
        assert!(!d.polygon_contains([1.5, 0.0]));
        let n = d.inward_normal(0.0);
        assert!((n[0] + 1.0).abs() < 1e-15 && n[1].abs() < 1e-15);
    }
}
