//! Coefficient files, grid CSV files and domain spec files.

use std::fs;
use std::path::Path;

use reflext::coeffs::{CoefficientFamily, Entry, FamilyKind, ValidatedRange};
use reflext::domain::{FourierCurve, Orientation, PlanarDomain};
use reflext::operator::{Axis, GridFunction};
use reflext::Real;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::decimal;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryRecord {
    pub j: i64,
    pub a: String,
    pub b: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValidatedRecord {
    Span { m1: u32, m2: u32 },
    Symmetric { kmax: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub bits: usize,
    pub jmax: usize,
    pub tail_tol: String,
    pub tool_version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientFile {
    pub kind: String,
    pub beta: Option<String>,
    pub delta: String,
    pub entries: Vec<EntryRecord>,
    #[serde(default)]
    pub tail: Vec<EntryRecord>,
    pub validated: ValidatedRecord,
    pub meta: Meta,
}

fn record(e: &Entry) -> EntryRecord {
    EntryRecord { j: e.j, a: e.a.to_decimal(), b: e.b.to_decimal() }
}

impl CoefficientFile {
    pub fn from_family(family: &CoefficientFamily, jmax: usize, tail_tol: f64) -> Self {
        CoefficientFile {
            kind: family.kind().name().into(),
            beta: family.beta().map(Real::to_decimal),
            delta: decimal(family.delta()),
            entries: family.entries().iter().map(record).collect(),
            tail: family.tail().iter().map(record).collect(),
            validated: match family.validated() {
                ValidatedRange::Span { m1, m2 } => ValidatedRecord::Span { m1, m2 },
                ValidatedRange::Symmetric { kmax } => ValidatedRecord::Symmetric { kmax },
            },
            meta: Meta {
                bits: family.bits(),
                jmax,
                tail_tol: decimal(tail_tol),
                tool_version: env!("CARGO_PKG_VERSION").into(),
            },
        }
    }

    pub fn to_family(&self) -> CliResult<CoefficientFamily> {
        let bits = self.meta.bits;
        let kind = FamilyKind::from_name(&self.kind).ok_or_else(|| CliError::Usage(format!("unknown family kind {:?}", self.kind)))?;
        let parse = |s: &str| Real::parse(s, bits);
        let entries = |rs: &[EntryRecord]| -> CliResult<Vec<Entry>> {
            rs.iter().map(|r| Ok(Entry { j: r.j, a: parse(&r.a)?, b: parse(&r.b)? })).collect()
        };
        let delta: f64 = self.delta.parse().map_err(|_| CliError::Usage(format!("bad delta {:?}", self.delta)))?;
        let validated = match self.validated {
            ValidatedRecord::Span { m1, m2 } => ValidatedRange::Span { m1, m2 },
            ValidatedRecord::Symmetric { kmax } => ValidatedRange::Symmetric { kmax },
        };
        let beta = self.beta.as_deref().map(parse).transpose()?;
        Ok(CoefficientFamily::new(kind, beta, delta, entries(&self.entries)?, entries(&self.tail)?, validated)?)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        serde_json::from_str(&text).map_err(|e| CliError::format(path, e))
    }
}

/// `# dim=…, h=…, origin=…, half|full` followed by coordinate and value
/// columns, tangential index outermost.
pub fn grid_csv(grid: &GridFunction) -> String {
    let origin = grid.normal_coord(0);
    let span = if grid.is_half() { "half" } else { "full" };
    let mut out = format!("# dim={}, h={}, origin={}, {span}", grid.dim(), decimal(grid.h()), decimal(origin));
    match grid.tangential() {
        Some(ax) => {
            out.push_str(&format!(", tangential={}:{}:{}\nx_t,x_n,value\n", decimal(ax.origin), decimal(ax.h), ax.n));
            for c in 0..grid.columns() {
                for (i, v) in grid.column(c).iter().enumerate() {
                    out.push_str(&format!("{},{},{}\n", decimal(ax.coord(c)), decimal(grid.normal_coord(i)), decimal(*v)));
                }
            }
        }
        None => {
            out.push_str("\nx_n,value\n");
            for (i, v) in grid.column(0).iter().enumerate() {
                out.push_str(&format!("{},{}\n", decimal(grid.normal_coord(i)), decimal(*v)));
            }
        }
    }
    out
}

pub fn read_grid(path: &Path) -> CliResult<GridFunction> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let bad = |m: &str| CliError::format(path, m);
    let mut lines = text.lines();
    let header = lines.next().and_then(|l| l.strip_prefix('#')).ok_or_else(|| bad("missing '#' header"))?;
    let mut dim = None;
    let mut h = None;
    let mut origin = None;
    let mut tangential = None;
    for field in header.split(',').map(str::trim) {
        match field.split_once('=') {
            Some(("dim", v)) => dim = v.parse::<usize>().ok(),
            Some(("h", v)) => h = v.parse::<f64>().ok(),
            Some(("origin", v)) => origin = v.parse::<f64>().ok(),
            Some(("tangential", v)) => {
                let parts: Vec<&str> = v.split(':').collect();
                if let [o, th, n] = parts.as_slice() {
                    let ax = (o.parse(), th.parse(), n.parse());
                    if let (Ok(o), Ok(th), Ok(n)) = ax {
                        tangential = Some(Axis::new(o, th, n)?);
                    }
                }
                if tangential.is_none() {
                    return Err(bad("tangential must be origin:h:n"));
                }
            }
            _ => {}
        }
    }
    let (dim, h, origin) = match (dim, h, origin) {
        (Some(d), Some(h), Some(o)) => (d, h, o),
        _ => return Err(bad("header needs dim, h and origin")),
    };
    if (dim == 2) != tangential.is_some() || !(1..=2).contains(&dim) {
        return Err(bad("dim=2 grids need a tangential axis, dim=1 grids none"));
    }
    let lo = (origin / h).round();
    if ((lo * h - origin) / h).abs() > 1e-6 {
        return Err(bad("origin must be a multiple of h"));
    }
    lines.next().ok_or_else(|| bad("missing column header"))?;
    let values = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.rsplit(',').next().and_then(|v| v.trim().parse::<f64>().ok()).ok_or_else(|| bad(&format!("bad row {l:?}"))))
        .collect::<CliResult<Vec<f64>>>()?;
    Ok(GridFunction::new(tangential, lo as i64, h, values)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierRecord {
    #[serde(default)]
    pub x_cos: Vec<f64>,
    #[serde(default)]
    pub x_sin: Vec<f64>,
    #[serde(default)]
    pub y_cos: Vec<f64>,
    #[serde(default)]
    pub y_sin: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrientationRecord {
    InteriorLeft,
    InteriorRight,
}

/// `{fourier_coefficients, t_max, orientation}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub fourier_coefficients: FourierRecord,
    pub t_max: f64,
    #[serde(default = "default_orientation")]
    pub orientation: OrientationRecord,
}

fn default_orientation() -> OrientationRecord {
    OrientationRecord::InteriorLeft
}

impl DomainSpec {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        serde_json::from_str(&text).map_err(|e| CliError::format(path, e))
    }

    pub fn build(&self) -> CliResult<PlanarDomain> {
        let c = &self.fourier_coefficients;
        let curve = FourierCurve { x_cos: c.x_cos.clone(), x_sin: c.x_sin.clone(), y_cos: c.y_cos.clone(), y_sin: c.y_sin.clone() };
        let orientation = match self.orientation {
            OrientationRecord::InteriorLeft => Orientation::InteriorLeft,
            OrientationRecord::InteriorRight => Orientation::InteriorRight,
        };
        Ok(PlanarDomain::new(curve, self.t_max, orientation)?)
    }
}
