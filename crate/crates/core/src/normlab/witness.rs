//! Feasible decompositions `f = Σ_α ∂^α g_α` for negative-order norms.
//!
//! The cost `(Σ_α ‖g_α‖_p^p)^{1/p}` of any such decomposition bounds the
//! `W^{k,p}` norm (`k < 0`) from above. Witnesses are built from iterated
//! antiderivatives taken from `+∞`, and carried to the whole line by the
//! extension operator with the commuted coefficients `a_j(−b_j)^{−α}`.

use std::sync::Arc;

use crate::coeffs::CoefficientFamily;
use crate::error::{Error, Result};
use crate::normlab::mesh::{combine, GradedMesh};
use crate::normlab::norms::fd_weights;

pub type Part = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessDomain {
    HalfLine,
    Line,
}

#[derive(Clone)]
pub struct WitnessPart {
    pub order: usize,
    pub g: Part,
}

#[derive(Clone)]
pub struct DecompositionWitness {
    target_order: i32,
    domain: WitnessDomain,
    parts: Vec<WitnessPart>,
    /// `g_α` vanish for `|x|` beyond these (negative side, positive side).
    reach: (f64, f64),
}

/// Tabulated `G` with `G' = D` on a log-graded node set, read back by cubic
/// Hermite interpolation.
struct Table {
    ul: f64,
    du: f64,
    x: Vec<f64>,
    v: Vec<f64>,
    d: Vec<f64>,
}

impl Table {
    fn eval(&self, x: f64) -> f64 {
        let last = self.x.len() - 1;
        if x >= self.x[last] {
            return 0.0;
        }
        if x <= self.x[0] {
            return self.v[0] + (x - self.x[0]) * self.d[0];
        }
        let i = (((x.ln() - self.ul) / self.du) as usize).min(last - 1);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let w = x1 - x0;
        let t = (x - x0) / w;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.v[i] + h10 * w * self.d[i] + h01 * self.v[i + 1] + h11 * w * self.d[i + 1]
    }
}

const GL_X: [f64; 4] = [-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526];
const GL_W: [f64; 4] = [0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538];

fn binomial(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `G_m(x) = (−1)^m/(m−1)! ∫_x^∞ (t − x)^{m−1} f(t) dt` for `m = 0..=order`
/// (`G_0 = f`), so `G_m' = G_{m−1}` and every `G_m` vanishes beyond `hi`.
fn antiderivatives(f: &Part, order: usize, lo: f64, hi: f64, per_decade: usize) -> Result<Vec<Part>> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!("bad antiderivative range [{lo}, {hi}]")));
    }
    let ul = lo.ln();
    let n = (((hi / lo).log10() * per_decade as f64).ceil() as usize).max(2);
    let du = (hi.ln() - ul) / n as f64;
    let x: Vec<f64> = (0..=n).map(|i| (ul + i as f64 * du).exp()).collect();
    let fv: Vec<f64> = x.iter().map(|&t| f(t)).collect();
    // M_r(x_i) = ∫_{x_i}^{hi} t^r f(t) dt
    let mut moments = vec![vec![0.0; n + 1]; order];
    for i in (0..n).rev() {
        let (a, b) = (x[i], x[i + 1]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut panel = vec![0.0; order];
        for (gx, gw) in GL_X.iter().zip(GL_W) {
            let t = mid + half * gx;
            let ft = f(t) * gw * half;
            let mut tp = 1.0;
            for p in panel.iter_mut() {
                *p += tp * ft;
                tp *= t;
            }
        }
        for (r, m) in moments.iter_mut().enumerate() {
            m[i] = m[i + 1] + panel[r];
        }
    }
    let mut values = vec![fv];
    for m in 1..=order {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let fact: f64 = (1..m).map(|i| i as f64).product();
        let v = (0..=n)
            .map(|i| {
                let s: f64 = (0..m).map(|r| binomial(m - 1, r) * (-x[i]).powi((m - 1 - r) as i32) * moments[r][i]).sum();
                sign * s / fact
            })
            .collect();
        values.push(v);
    }
    let mut parts: Vec<Part> = Vec::with_capacity(order + 1);
    parts.push(f.clone());
    for m in 1..=order {
        let table = Table { ul, du, x: x.clone(), v: values[m].clone(), d: values[m - 1].clone() };
        parts.push(Arc::new(move |t: f64| if t < 0.0 { 0.0 } else { table.eval(t) }));
    }
    Ok(parts)
}

/// Sampling controls for the finite-difference consistency check.
#[derive(Clone, Debug)]
pub struct WitnessCheck {
    pub points: Vec<f64>,
    pub step: f64,
    /// Relative to `max |f|` over the points.
    pub tol: f64,
}

impl WitnessCheck {
    /// Nine points spread over `(lo, hi)`, stencil step `step`.
    pub fn spread(lo: f64, hi: f64, step: f64) -> Self {
        let points = (1..=9).map(|i| lo + (hi - lo) * i as f64 / 10.0).collect();
        WitnessCheck { points, step, tol: 1e-5 }
    }
}

impl DecompositionWitness {
    pub fn new(target_order: i32, domain: WitnessDomain, parts: Vec<WitnessPart>, reach: (f64, f64)) -> Result<Self> {
        if target_order >= 0 {
            return Err(Error::InvalidParameter(format!("witness order must be negative, got {target_order}")));
        }
        if let Some(p) = parts.iter().find(|p| p.order as i32 > -target_order) {
            return Err(Error::InvalidParameter(format!("part of order {} exceeds |k| = {}", p.order, -target_order)));
        }
        Ok(DecompositionWitness { target_order, domain, parts, reach })
    }

    pub fn zero(target_order: i32) -> Result<Self> {
        Self::new(target_order, WitnessDomain::HalfLine, Vec::new(), (0.0, 0.0))
    }

    /// `f = ∂^{|k|} G_{|k|}` with `G` the iterated antiderivative from `+∞`.
    /// `f` must vanish beyond `hi`.
    pub fn antiderivative(f: &Part, k: i32, hi: f64, per_decade: usize) -> Result<Self> {
        let m = Self::order_of(k)?;
        let g = antiderivatives(f, m, ANTIDERIVATIVE_FLOOR, hi, per_decade)?;
        let part = WitnessPart { order: m, g: g[m].clone() };
        Self::new(k, WitnessDomain::HalfLine, vec![part], (0.0, hi))
    }

    /// `f = Σ_{α<=|k|} ∂^α (G_α/(|k|+1))`: every order carries an equal share.
    pub fn mixed(f: &Part, k: i32, hi: f64, per_decade: usize) -> Result<Self> {
        let m = Self::order_of(k)?;
        let g = antiderivatives(f, m, ANTIDERIVATIVE_FLOOR, hi, per_decade)?;
        let share = 1.0 / (m + 1) as f64;
        let parts = g
            .into_iter()
            .enumerate()
            .map(|(order, g)| WitnessPart { order, g: Arc::new(move |x: f64| share * g(x)) as Part })
            .collect();
        Self::new(k, WitnessDomain::HalfLine, parts, (0.0, hi))
    }

    fn order_of(k: i32) -> Result<usize> {
        if k >= 0 {
            return Err(Error::InvalidParameter(format!("witness order must be negative, got {k}")));
        }
        Ok((-k) as usize)
    }

    pub fn target_order(&self) -> i32 {
        self.target_order
    }

    pub fn domain(&self) -> WitnessDomain {
        self.domain
    }

    pub fn parts(&self) -> &[WitnessPart] {
        &self.parts
    }

    pub fn reach(&self) -> (f64, f64) {
        self.reach
    }

    /// `Σ_α ∂^α g_α(x)` by centred 7-point differences.
    pub fn reconstruct(&self, x: f64, step: f64) -> f64 {
        let offsets: Vec<f64> = (-3..=3).map(|i| i as f64 * step).collect();
        self.parts
            .iter()
            .map(|p| {
                if p.order == 0 {
                    (p.g)(x)
                } else {
                    let w = fd_weights(0.0, &offsets, p.order);
                    w.iter().zip(&offsets).map(|(w, o)| w * (p.g)(x + o)).sum()
                }
            })
            .sum()
    }

    /// Largest `|Σ ∂^α g_α − f|` at the check points; errors beyond tolerance.
    pub fn verify(&self, f: &dyn Fn(f64) -> f64, check: &WitnessCheck) -> Result<f64> {
        let scale = check.points.iter().fold(0.0f64, |m, &x| m.max(f(x).abs()));
        let mismatch = check
            .points
            .iter()
            .map(|&x| (self.reconstruct(x, check.step) - f(x)).abs())
            .fold(0.0, f64::max);
        let tol = check.tol * scale.max(f64::MIN_POSITIVE);
        if mismatch > tol {
            return Err(Error::WitnessInconsistent { mismatch, tol });
        }
        Ok(mismatch)
    }

    /// `‖g_α‖_{L^p}` per part over the witness domain, on `mesh` (mirrored
    /// for the negative half).
    pub fn part_norms(&self, p: f64, mesh: &GradedMesh) -> Vec<f64> {
        self.parts
            .iter()
            .map(|part| {
                let side = |sign: f64, reach: f64| {
                    let v: Vec<f64> =
                        mesh.nodes().iter().map(|&x| if x > reach { 0.0 } else { (part.g)(sign * x) }).collect();
                    mesh.lp(&v, p)
                };
                let pos = side(1.0, self.reach.1);
                match self.domain {
                    WitnessDomain::HalfLine => pos,
                    WitnessDomain::Line => combine(&[pos, side(-1.0, self.reach.0)], p),
                }
            })
            .collect()
    }

    /// `(Σ_α ‖g_α‖_p^p)^{1/p}`.
    pub fn cost(&self, p: f64, mesh: &GradedMesh) -> f64 {
        combine(&self.part_norms(p, mesh), p)
    }

    /// The decomposition of `Ef`: `g_α ↦ E^{a(−b)^{−α}, b} g_α`, since
    /// `E ∂^α = ∂^α E^{a(−b)^{−α}, b}`.
    pub fn transport(&self, family: &CoefficientFamily) -> Result<DecompositionWitness> {
        if self.domain != WitnessDomain::HalfLine {
            return Err(Error::InvalidParameter("only half-line witnesses can be transported".into()));
        }
        let hi = self.reach.1;
        let mut neg_reach = 0.0f64;
        let mut parts = Vec::with_capacity(self.parts.len());
        for part in &self.parts {
            let terms: Vec<(f64, f64)> = family
                .commuted(-(part.order as i32))?
                .terms()
                .into_iter()
                .filter(|t| t.a != 0.0)
                .map(|t| (t.a, t.b))
                .collect();
            neg_reach = terms.iter().fold(neg_reach, |m, &(_, b)| m.max(hi / b));
            let g = part.g.clone();
            let moved: Part = Arc::new(move |x: f64| {
                if x >= 0.0 {
                    g(x)
                } else {
                    terms.iter().filter(|(_, b)| -b * x < hi).map(|&(a, b)| a * g(-b * x)).sum()
                }
            });
            parts.push(WitnessPart { order: part.order, g: moved });
        }
        Self::new(self.target_order, WitnessDomain::Line, parts, (neg_reach, hi))
    }
}

/// Left end of the tabulated antiderivatives; below it they are continued linearly.
pub const ANTIDERIVATIVE_FLOOR: f64 = 1e-14;

/// Upper bound for `‖f‖_{W^{k,p}}`, `k < 0`: the cost of a verified witness.
pub fn neg_sobolev_upper(
    f: &dyn Fn(f64) -> f64,
    k: i32,
    p: f64,
    witness: &DecompositionWitness,
    mesh: &GradedMesh,
    check: &WitnessCheck,
) -> Result<f64> {
    if k >= 0 || witness.target_order() != k {
        return Err(Error::InvalidParameter(format!("witness of order {} used for k = {k}", witness.target_order())));
    }
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!("p must be positive, got {p}")));
    }
    witness.verify(f, check)?;
    Ok(witness.cost(p, mesh))
}
