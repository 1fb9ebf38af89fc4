pub mod coeffs;
pub mod domain;
pub mod extend;
pub mod probe;

use reflext::coeffs::synthesize_two_sided;
use reflext::operator::ExtensionPlan;
use reflext::PrecisionContext;

use crate::cli::{CoefficientSource, GlobalArgs};
use crate::error::{CliError, CliResult};
use crate::files::CoefficientFile;

/// Moment order validated when the two-sided family is synthesized on the fly.
pub const DEFAULT_KMAX: usize = 10;

pub fn context(global: &GlobalArgs) -> CliResult<PrecisionContext> {
    Ok(PrecisionContext::new(global.bits, global.jmax, global.tol)?)
}

/// The plan from `--coeffs`, or the synthesized two-sided family.
pub fn load_plan(global: &GlobalArgs, source: &CoefficientSource) -> CliResult<ExtensionPlan> {
    let family = match &source.coeffs {
        Some(path) => CoefficientFile::read(path)?.to_family()?,
        None => synthesize_two_sided(&context(global)?, DEFAULT_KMAX, None)?.family,
    };
    Ok(ExtensionPlan::new(family))
}

/// `inf`, a fraction `a/b`, or a decimal.
pub fn parse_exponent(s: &str) -> CliResult<f64> {
    let s = s.trim();
    let bad = || CliError::Usage(format!("bad exponent {s:?}"));
    let v = match s {
        "inf" | "infinity" | "∞" => f64::INFINITY,
        _ => match s.split_once('/') {
            Some((a, b)) => a.trim().parse::<f64>().map_err(|_| bad())? / b.trim().parse::<f64>().map_err(|_| bad())?,
            None => s.parse().map_err(|_| bad())?,
        },
    };
    if v.is_nan() {
        return Err(bad());
    }
    Ok(v)
}

/// Comma-separated list; the empty string is the empty list.
pub fn parse_list<T>(s: &str, item: impl Fn(&str) -> CliResult<T>) -> CliResult<Vec<T>> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(item).collect()
}

pub fn parse_number<T: std::str::FromStr>(s: &str) -> CliResult<T> {
    s.trim().parse().map_err(|_| CliError::Usage(format!("bad number {s:?}")))
}

/// `lo:hi` with `lo < hi`.
pub fn parse_range(s: &str) -> CliResult<(f64, f64)> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| CliError::Usage(format!("range must be lo:hi, got {s:?}")))?;
    let (lo, hi) = (parse_number::<f64>(lo)?, parse_number::<f64>(hi)?);
    if !(lo < hi) {
        return Err(CliError::Usage(format!("empty range {s:?}")));
    }
    Ok((lo, hi))
}
