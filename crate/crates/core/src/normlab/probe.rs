//! Operator-norm probes: ratios `‖Ef‖/‖f‖` over a test family.

use std::sync::Arc;

use rayon::prelude::*;

use crate::coeffs::Term;
use crate::error::{Error, Result};
use crate::normlab::mesh::{combine, GradedMesh};
use crate::normlab::norms::{holder_norm, NormFamily, NormSpec};
use crate::normlab::spectral::{SpectralNorm, Spectrum};
use crate::normlab::testfam::TestFunction;
use crate::normlab::witness::{neg_sobolev_upper, DecompositionWitness, Part, WitnessCheck};
use crate::operator::{extend_callable, extend_normal_derivative, ExtensionPlan, GridFunction};

/// Besov probes pass when `max ratio / min ratio` stays below this.
pub const BESOV_SPREAD_LIMIT: f64 = 10.0;

#[derive(Clone, Debug)]
pub struct ProbeConfig {
    /// Graded-mesh nodes per decade for the `L^p`/Sobolev quadrature.
    pub per_decade: usize,
    /// Smallest mesh node; the half line is integrated over `[floor, ·]`.
    pub mesh_floor: f64,
    /// Table density for the antiderivative witnesses.
    pub witness_per_decade: usize,
    /// Torus step: Nyquist frequency is at least `oversample` × bandwidth.
    pub oversample: f64,
    /// Largest torus has `2^max_torus_log2` nodes.
    pub max_torus_log2: u32,
    /// Torus window: terms with `|a_j|` below this may be cut by the window.
    pub window_level: f64,
    /// Hölder grids take `h = 1/(holder_oversample × bandwidth)`, at most 0.01.
    pub holder_oversample: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            per_decade: 2000,
            mesh_floor: 1e-14,
            witness_per_decade: 6000,
            oversample: 16.0,
            max_torus_log2: 20,
            window_level: 1e-12,
            holder_oversample: 16.0,
        }
    }
}

/// `Σ_j 2^{δ|j|}|a_j|(b_j^{−1/p} + b_j^{k−1/p})`.
pub fn probe_constant(terms: &[Term], k: i32, p: f64, delta: f64) -> f64 {
    let ip = if p.is_infinite() { 0.0 } else { 1.0 / p };
    terms
        .iter()
        .map(|t| (delta * t.j.unsigned_abs() as f64).exp2() * t.a.abs() * (t.b.powf(-ip) + t.b.powf(k as f64 - ip)))
        .sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRow {
    pub function_id: String,
    pub norm_in: f64,
    pub norm_out: f64,
    pub ratio: f64,
    pub bound: Option<f64>,
    pub pass: bool,
    pub note: Option<String>,
}

impl ProbeRow {
    fn new(function_id: String, norm_in: f64, norm_out: f64, bound: Option<f64>) -> Self {
        let ratio = norm_out / norm_in;
        let pass = ratio.is_finite() && ratio >= 0.0 && bound.is_none_or(|b| ratio <= b);
        ProbeRow { function_id, norm_in, norm_out, ratio, bound, pass, note: None }
    }

    fn failed(function_id: String, err: &Error) -> Self {
        ProbeRow {
            function_id,
            norm_in: f64::NAN,
            norm_out: f64::NAN,
            ratio: f64::NAN,
            bound: None,
            pass: false,
            note: Some(err.to_string()),
        }
    }

    fn with_note(mut self, note: Option<String>) -> Self {
        self.note = note;
        self
    }
}

#[derive(Clone, Debug)]
pub struct NormProbeReport {
    pub operator_id: String,
    pub spec: NormSpec,
    pub constant: Option<f64>,
    pub rows: Vec<ProbeRow>,
    /// Functions left out because their input norm vanished.
    pub excluded: Vec<String>,
    /// `max ratio / min ratio`, for specs judged by uniformity.
    pub spread: Option<f64>,
    pub pass: bool,
}

impl NormProbeReport {
    fn finish(operator_id: String, spec: NormSpec, constant: Option<f64>, rows: Vec<ProbeRow>) -> Self {
        let (excluded, rows): (Vec<_>, Vec<_>) = rows.into_iter().partition(|r| r.norm_in == 0.0);
        let excluded = excluded.into_iter().map(|r| r.function_id).collect();
        let uniform = matches!(spec.family, NormFamily::Besov | NormFamily::TriebelDiag);
        let spread = uniform.then(|| {
            let (lo, hi) = rows.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.ratio), hi.max(r.ratio)));
            if rows.is_empty() {
                1.0
            } else {
                hi / lo
            }
        });
        let pass = rows.iter().all(|r| r.pass) && spread.is_none_or(|s| s <= BESOV_SPREAD_LIMIT);
        NormProbeReport { operator_id, spec, constant, rows, excluded, spread, pass }
    }

    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(f64::NAN, f64::max)
    }

    pub fn min_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(f64::NAN, f64::min)
    }
}

fn smallest_b(plan: &ExtensionPlan) -> f64 {
    plan.terms().iter().map(|t| t.b).fold(1.0, f64::min)
}

/// Per-derivative `L^p` data for one member: samples of `f^{(γ)}` on
/// `(0, hi)` and of `∂^γ Ef(−y)` for `y > 0`.
struct SobolevSamples {
    input: GradedMesh,
    output: GradedMesh,
    f: Vec<Vec<f64>>,
    ef: Vec<Vec<f64>>,
}

impl SobolevSamples {
    fn new(plan: &ExtensionPlan, f: &TestFunction, kmax: u32, cfg: &ProbeConfig) -> Result<Self> {
        let hi = f.support().1;
        if !(hi > cfg.mesh_floor) {
            return Err(Error::InvalidParameter(format!("{} does not reach the half line", f.id())));
        }
        let input = GradedMesh::new(cfg.mesh_floor, hi, cfg.per_decade)?;
        let output = GradedMesh::new(cfg.mesh_floor, hi / smallest_b(plan), cfg.per_decade)?;
        let callable = f.callable();
        let mut fs = Vec::new();
        let mut efs = Vec::new();
        for g in 0..=kmax as usize {
            fs.push(input.nodes().iter().map(|&x| f.derivative(g, x)).collect());
            let ef = output
                .nodes()
                .iter()
                .map(|&y| extend_normal_derivative(plan, &callable, g, &[-y]).map(|e| e.value))
                .collect::<Result<Vec<f64>>>()?;
            efs.push(ef);
        }
        Ok(SobolevSamples { input, output, f: fs, ef: efs })
    }

    /// `(‖f‖_{W^{k,p}(R+)}, ‖Ef‖_{W^{k,p}(R)})`.
    fn norms(&self, k: u32, p: f64) -> (f64, f64) {
        let ins: Vec<f64> = self.f.iter().take(k as usize + 1).map(|v| self.input.lp(v, p)).collect();
        let outs: Vec<f64> = self.ef.iter().take(k as usize + 1).map(|v| self.output.lp(v, p)).collect();
        let all: Vec<f64> = ins.iter().chain(&outs).copied().collect();
        (combine(&ins, p), combine(&all, p))
    }
}

/// `W^{k,p}` probes (`L^p` at `k = 0`) for every `(k, p)` pair, reusing samples.
pub fn sobolev_probe_grid(
    plan: &ExtensionPlan,
    ks: &[u32],
    ps: &[f64],
    family: &[TestFunction],
    cfg: &ProbeConfig,
) -> Result<Vec<NormProbeReport>> {
    let specs = ks
        .iter()
        .flat_map(|&k| ps.iter().map(move |&p| if k == 0 { NormSpec::lp(p) } else { NormSpec::sobolev(k, p) }))
        .collect::<Result<Vec<_>>>()?;
    let kmax = ks.iter().copied().max().unwrap_or(0);
    let samples: Vec<Result<SobolevSamples>> = family.par_iter().map(|f| SobolevSamples::new(plan, f, kmax, cfg)).collect();
    let terms = plan.terms();
    let delta = plan.family().delta();
    Ok(specs
        .into_iter()
        .map(|spec| {
            let k = spec.k() as u32;
            let constant = probe_constant(terms, k as i32, spec.p, delta);
            let rows = family
                .iter()
                .zip(&samples)
                .map(|(f, s)| match s {
                    Ok(s) => {
                        let (a, b) = s.norms(k, spec.p);
                        ProbeRow::new(f.id().into(), a, b, Some(constant))
                    }
                    Err(e) => ProbeRow::failed(f.id().into(), e),
                })
                .collect();
            NormProbeReport::finish(plan.family().id(), spec, Some(constant), rows)
        })
        .collect())
}

fn as_part(f: &TestFunction) -> Part {
    let f = Arc::new(f.clone());
    Arc::new(move |x: f64| f.eval(x))
}

/// Negative orders: for each member, the antiderivative and mixed witnesses
/// are transported by the commuted operators and their costs compared.
pub fn witness_transport_probe(
    plan: &ExtensionPlan,
    ks: &[i32],
    ps: &[f64],
    family: &[TestFunction],
    cfg: &ProbeConfig,
) -> Result<Vec<NormProbeReport>> {
    let specs: Vec<NormSpec> =
        ks.iter().flat_map(|&k| ps.iter().map(move |&p| NormSpec::neg_sobolev(k, p))).collect::<Result<_>>()?;
    let terms = plan.terms();
    let delta = plan.family().delta();
    // rows[f][spec] holds the two witness rows
    let rows: Vec<Vec<Vec<ProbeRow>>> = family
        .par_iter()
        .map(|f| {
            specs
                .iter()
                .map(|spec| match witness_rows(plan, f, spec, cfg) {
                    Ok(r) => r,
                    Err(e) => vec![ProbeRow::failed(f.id().into(), &e)],
                })
                .collect()
        })
        .collect();
    Ok(specs
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let constant = probe_constant(terms, spec.k(), spec.p, delta);
            let rows = rows
                .iter()
                .flat_map(|per_f| per_f[i].iter().cloned())
                .map(|mut r| {
                    if r.note.is_none() {
                        r.bound = Some(constant);
                        r.pass = r.ratio.is_finite() && r.ratio <= constant;
                    }
                    r
                })
                .collect();
            NormProbeReport::finish(plan.family().id(), *spec, Some(constant), rows)
        })
        .collect())
}

fn witness_rows(plan: &ExtensionPlan, f: &TestFunction, spec: &NormSpec, cfg: &ProbeConfig) -> Result<Vec<ProbeRow>> {
    let k = spec.k();
    let (lo, hi) = f.support();
    let step = 0.04 / (1.0 + f.bandwidth());
    let check = WitnessCheck::spread(lo.max(0.0) + 4.0 * step, hi, step);
    let target = as_part(f);
    let witnesses = [
        ("antiderivative", DecompositionWitness::antiderivative(&target, k, hi, cfg.witness_per_decade)?),
        ("mixed", DecompositionWitness::mixed(&target, k, hi, cfg.witness_per_decade)?),
    ];
    let mut rows = Vec::new();
    for (name, w) in witnesses {
        let moved = w.transport(plan.family())?;
        let mesh = GradedMesh::new(cfg.mesh_floor, moved.reach().0.max(hi), cfg.per_decade)?;
        let cost = neg_sobolev_upper(&|x| f.eval(x), k, spec.p, &w, &mesh, &check)?;
        let moved_cost = moved.cost(spec.p, &mesh);
        rows.push(ProbeRow::new(format!("{} [{name}]", f.id()), cost, moved_cost, None));
    }
    Ok(rows)
}

/// `C^{0,s}` probes on uniform grids; the bound is the `k = 0`, `p = ∞` constant.
pub fn holder_probe(plan: &ExtensionPlan, ss: &[f64], family: &[TestFunction], cfg: &ProbeConfig) -> Result<Vec<NormProbeReport>> {
    let specs: Vec<NormSpec> = ss.iter().map(|&s| NormSpec::holder(0, s)).collect::<Result<_>>()?;
    let constant = probe_constant(plan.terms(), 0, f64::INFINITY, plan.family().delta());
    let grids: Vec<Result<(GridFunction, GridFunction)>> = family.par_iter().map(|f| holder_grids(plan, f, cfg)).collect();
    Ok(specs
        .into_iter()
        .map(|spec| {
            let s = spec.order;
            let rows = family
                .iter()
                .zip(&grids)
                .map(|(f, g)| {
                    let norms = g.as_ref().map_err(Clone::clone).and_then(|(a, b)| Ok((holder_norm(a, 0, s)?, holder_norm(b, 0, s)?)));
                    match norms {
                        Ok((a, b)) => ProbeRow::new(f.id().into(), a, b, Some(constant)),
                        Err(e) => ProbeRow::failed(f.id().into(), &e),
                    }
                })
                .collect();
            NormProbeReport::finish(plan.family().id(), spec, Some(constant), rows)
        })
        .collect())
}

fn holder_grids(plan: &ExtensionPlan, f: &TestFunction, cfg: &ProbeConfig) -> Result<(GridFunction, GridFunction)> {
    let h = (1.0 / (cfg.holder_oversample * f.bandwidth())).min(0.01);
    let n = (f.support().1 / h).ceil() as usize + 1;
    let input = GridFunction::sample_1d(|x| f.eval(x), 0, n, h)?;
    let callable = f.callable();
    let values = (0..2 * n)
        .map(|i| extend_callable(plan, &callable, &[(i as f64 - n as f64) * h]).map(|e| e.value))
        .collect::<Result<Vec<_>>>()?;
    Ok((input, GridFunction::new(None, -(n as i64), h, values)?))
}

/// Torus samples of `Ef` and of the full-line representative on one grid.
pub struct TorusPair {
    pub extended: GridFunction,
    pub representative: GridFunction,
    /// `Σ |a_j|` over terms whose reflected support the window cuts off.
    pub window_error: f64,
}

/// Window `[−L_neg, hi]` holding every term with `|a_j| > window_level`,
/// step from the bandwidth, node count capped (shrinking `L_neg`).
pub fn torus_pair(plan: &ExtensionPlan, f: &TestFunction, cfg: &ProbeConfig) -> Result<TorusPair> {
    let h = (1.0 / (2.0 * cfg.oversample * f.bandwidth())).min(0.02);
    let (lo, hi) = f.support();
    let n_pos = (hi / h).ceil() as usize + 16;
    let reach = plan
        .terms()
        .iter()
        .filter(|t| t.a.abs() > cfg.window_level)
        .map(|t| hi / t.b)
        .fold(-lo, f64::max);
    let wanted = n_pos + (reach / h).ceil() as usize + 16;
    let n = wanted.next_power_of_two().min(1usize << cfg.max_torus_log2);
    if n <= n_pos + 16 {
        return Err(Error::GridTooCoarse { needed: wanted, have: n });
    }
    let n_neg = n - n_pos;
    let left = n_neg as f64 * h;
    let window_error = plan.terms().iter().filter(|t| hi / t.b > left).map(|t| t.a.abs()).sum();
    let callable = f.callable();
    let values = (0..n)
        .into_par_iter()
        .map(|i| extend_callable(plan, &callable, &[(i as f64 - n_neg as f64) * h]).map(|e| e.value))
        .collect::<Result<Vec<_>>>()?;
    let extended = GridFunction::new(None, -(n_neg as i64), h, values)?;
    let representative = GridFunction::sample_1d(|x| f.eval(x), -(n_neg as i64), n, h)?;
    Ok(TorusPair { extended, representative, window_error })
}

/// A torus spectrum with `B^s_{pq}` level norms cached by `(p, levels)`.
struct CachedSpectrum {
    spectrum: Spectrum,
    levels: Vec<(u64, Option<usize>, Vec<f64>)>,
}

impl CachedSpectrum {
    fn new(g: &GridFunction) -> Result<Self> {
        Ok(CachedSpectrum { spectrum: Spectrum::new(g)?, levels: Vec::new() })
    }

    fn eval(&mut self, spec: &NormSpec) -> Result<SpectralNorm> {
        match spec.family {
            NormFamily::Besov => {
                if !(spec.p > 0.0 && spec.q > 0.0) {
                    return Err(Error::InvalidParameter(format!("p and q must be positive, got {}, {}", spec.p, spec.q)));
                }
                let key = (spec.p.to_bits(), spec.levels);
                let idx = match self.levels.iter().position(|(p, l, _)| (*p, *l) == key) {
                    Some(i) => i,
                    None => {
                        self.levels.push((key.0, key.1, self.spectrum.level_norms(spec.p, spec.levels)));
                        self.levels.len() - 1
                    }
                };
                Ok(self.spectrum.besov_from_levels(&self.levels[idx].2, spec.q, spec.order))
            }
            NormFamily::TriebelDiag => self.spectrum.triebel_diag(spec.p, spec.order, spec.levels),
            _ => Err(Error::InvalidParameter(format!("{} is not a spectral spec", spec.family.name()))),
        }
    }
}

fn spectral_note(a: &SpectralNorm, b: &SpectralNorm, window: f64) -> Option<String> {
    let mut notes = Vec::new();
    if a.aliasing_warning || b.aliasing_warning {
        notes.push(format!("aliasing tail {:.2e}", a.aliasing_tail.max(b.aliasing_tail)));
    }
    let tail = a.level_tail.max(b.level_tail);
    if tail > 1e-6 {
        notes.push(format!("level tail {tail:.2e}"));
    }
    if window > 0.0 {
        notes.push(format!("window cut {window:.2e}"));
    }
    (!notes.is_empty()).then(|| notes.join("; "))
}

/// Besov / diagonal Triebel–Lizorkin probes on the torus. Inputs are measured
/// through the full-line representative; only uniformity is judged.
pub fn besov_probe_grid(
    plan: &ExtensionPlan,
    specs: &[NormSpec],
    family: &[TestFunction],
    cfg: &ProbeConfig,
) -> Result<Vec<NormProbeReport>> {
    if let Some(s) = specs.iter().find(|s| !matches!(s.family, NormFamily::Besov | NormFamily::TriebelDiag)) {
        return Err(Error::InvalidParameter(format!("{} is not a spectral spec", s.family.name())));
    }
    let rows: Vec<Vec<ProbeRow>> = family
        .iter()
        .map(|f| match torus_pair(plan, f, cfg).and_then(|t| {
            Ok((CachedSpectrum::new(&t.representative)?, CachedSpectrum::new(&t.extended)?, t.window_error))
        }) {
            Ok((mut rep, mut ext, window)) => specs
                .iter()
                .map(|spec| match (rep.eval(spec), ext.eval(spec)) {
                    (Ok(a), Ok(b)) => {
                        ProbeRow::new(f.id().into(), a.value, b.value, None).with_note(spectral_note(&a, &b, window))
                    }
                    (Err(e), _) | (_, Err(e)) => ProbeRow::failed(f.id().into(), &e),
                })
                .collect(),
            Err(e) => specs.iter().map(|_| ProbeRow::failed(f.id().into(), &e)).collect(),
        })
        .collect();
    Ok(specs
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let rows = rows.iter().map(|r| r[i].clone()).collect();
            NormProbeReport::finish(plan.family().id(), *spec, None, rows)
        })
        .collect())
}

/// Runs the probe matching `spec.family`.
pub fn operator_norm_probe(plan: &ExtensionPlan, spec: &NormSpec, family: &[TestFunction], cfg: &ProbeConfig) -> Result<NormProbeReport> {
    let mut reports = match spec.family {
        NormFamily::Lp | NormFamily::Sobolev => sobolev_probe_grid(plan, &[spec.k() as u32], &[spec.p], family, cfg)?,
        NormFamily::NegSobolevUpper => witness_transport_probe(plan, &[spec.k()], &[spec.p], family, cfg)?,
        NormFamily::Holder => {
            if spec.k() != 0 {
                return Err(Error::InvalidParameter("Hölder probes support k = 0 only".into()));
            }
            holder_probe(plan, &[spec.order], family, cfg)?
        }
        NormFamily::Besov | NormFamily::TriebelDiag => besov_probe_grid(plan, &[*spec], family, cfg)?,
    };
    let mut report = reports.pop().expect("one spec yields one report");
    report.spec = *spec;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{vandermonde_coefficients, CoefficientFamily};
    use crate::normlab::testfam::test_family;
    use crate::precision::Real;

    fn hestenes() -> CoefficientFamily {
        let nodes = [Real::from_i64(1, 128), Real::from_i64(2, 128)];
        vandermonde_coefficients(&nodes, 0, 1).unwrap()
    }

    #[test]
    fn constant_by_hand() {
        // (3, −2) at b = (1, 2) with j = (0, 1), k = 1, p = 2, δ = 1/2
        let fam = hestenes();
        let terms = fam.terms();
        let expect = 3.0 * 2.0 + 2f64.sqrt() * 2.0 * (2f64.powf(-0.5) + 2f64.powf(0.5));
        let c = probe_constant(&terms, 1, 2.0, 0.5);
        assert!((c - expect).abs() < 1e-12, "{c} vs {expect}");
    }

    #[test]
    fn l2_ratio_of_finite_reflection_is_exact() {
        // E f(x) = 3f(−x) − 2f(−2x); its L² norm is known in closed form for e^{−x²}
        let plan = ExtensionPlan::new(hestenes());
        let fam = test_family();
        let cfg = ProbeConfig { per_decade: 400, ..ProbeConfig::default() };
        let report = &sobolev_probe_grid(&plan, &[0], &[2.0], &fam[..1], &cfg).unwrap()[0];
        // ∫_0^∞ (3e^{−y²} − 2e^{−4y²})² dy = 9√(π/8) − 12√(π/20) + 4√(π/32)
        let pi = std::f64::consts::PI;
        let neg = 9.0 * (pi / 8.0).sqrt() - 12.0 * (pi / 20.0).sqrt() + 4.0 * (pi / 32.0).sqrt();
        let pos = (pi / 8.0).sqrt();
        let expect = ((pos + neg) / pos).sqrt();
        assert!((report.rows[0].ratio - expect).abs() < 1e-9, "{} vs {expect}", report.rows[0].ratio);
    }

    #[test]
    fn report_bookkeeping() {
        let rows = vec![
            ProbeRow::new("a".into(), 1.0, 2.0, Some(3.0)),
            ProbeRow::new("zero".into(), 0.0, 0.0, Some(3.0)),
            ProbeRow::new("b".into(), 1.0, 4.0, Some(3.0)),
        ];
        let r = NormProbeReport::finish("op".into(), NormSpec::lp(2.0).unwrap(), Some(3.0), rows);
        assert_eq!(r.excluded, vec!["zero".to_string()]);
        assert_eq!(r.rows.len(), 2);
        assert!(!r.pass);
        assert_eq!(r.max_ratio(), 4.0);
        let b = NormProbeReport::finish(
            "op".into(),
            NormSpec::besov(2.0, 2.0, 0.5).unwrap(),
            None,
            vec![ProbeRow::new("a".into(), 1.0, 1.0, None), ProbeRow::new("b".into(), 1.0, 20.0, None)],
        );
        assert_eq!(b.spread, Some(20.0));
        assert!(!b.pass);
    }
}
