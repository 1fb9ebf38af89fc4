use reflext::operator::{extend_grid, extend_points, Axis, Builtin, GridFunction, OutOfRangePolicy};
use serde::Serialize;

use crate::cli::{ExtendArgs, GlobalArgs};
use crate::commands::{load_plan, parse_number, parse_range};
use crate::error::{CliError, CliResult, Outcome};
use crate::files::{grid_csv, read_grid};
use crate::output::{num, Num, OutputDir};

#[derive(Serialize)]
struct ExtendRecord {
    function: String,
    family_id: String,
    dim: usize,
    h: Num,
    origin: Num,
    normal_nodes: usize,
    /// Truncation certificate for callables, interpolation estimate for grids.
    max_error_bound: Num,
}

fn parse_axis(s: &str) -> CliResult<Axis> {
    let parts: Vec<&str> = s.split(':').collect();
    let [o, h, n] = parts.as_slice() else {
        return Err(CliError::Usage(format!("tangential axis must be origin:h:n, got {s:?}")));
    };
    Ok(Axis::new(parse_number(o)?, parse_number(h)?, parse_number(n)?)?)
}

fn parse_policy(s: &str) -> CliResult<OutOfRangePolicy> {
    match s.split_once(':') {
        None if s == "error" => Ok(OutOfRangePolicy::Error),
        None if s == "zero" => Ok(OutOfRangePolicy::ZeroPad),
        Some(("decay", rate)) => Ok(OutOfRangePolicy::DecayModel { rate: parse_number(rate)? }),
        _ => Err(CliError::Usage(format!("policy must be error, zero or decay:RATE, got {s:?}"))),
    }
}

pub fn run(global: &GlobalArgs, args: &ExtendArgs) -> CliResult<Outcome> {
    let plan = load_plan(global, &args.source)?;
    let (grid, label, bound) = match &args.input {
        Some(path) => {
            let input = read_grid(path)?;
            let mut plan = plan.clone().with_policy(parse_policy(&args.policy)?)?;
            if let Some(order) = args.order {
                plan = plan.with_order(order)?;
            }
            let ext = extend_grid(&plan, &input, args.neg)?;
            (ext.grid, path.display().to_string(), ext.max_stencil_error)
        }
        None => {
            if !(args.h > 0.0) {
                return Err(CliError::Usage("--h must be positive".into()));
            }
            let f = Builtin::parse(&args.function)?;
            let (lo, hi) = parse_range(&args.range)?;
            let first = (lo / args.h).round() as i64;
            let n = ((hi / args.h).round() as i64 - first + 1).max(1) as usize;
            let tangential = args.tangential.as_deref().map(parse_axis).transpose()?;
            let callable = f.callable(if tangential.is_some() { 2 } else { 1 });
            let columns: Vec<Option<f64>> = match tangential {
                Some(ax) => (0..ax.n).map(|c| Some(ax.coord(c))).collect(),
                None => vec![None],
            };
            let points: Vec<Vec<f64>> = columns
                .iter()
                .flat_map(|t| (0..n).map(move |i| t.iter().copied().chain([(first + i as i64) as f64 * args.h]).collect()))
                .collect();
            let evals = extend_points(&plan, &callable, &points)?;
            let bound = evals.iter().map(|e| e.tail_bound).fold(0.0, f64::max);
            let grid = GridFunction::new(tangential, first, args.h, evals.into_iter().map(|e| e.value).collect())?;
            (grid, f.name(), bound)
        }
    };
    let out = OutputDir::acquire(&global.out)?;
    out.write_text("extend.csv", &grid_csv(&grid))?;
    out.write_json(
        "extend.json",
        &ExtendRecord {
            function: label,
            family_id: plan.family().id(),
            dim: grid.dim(),
            h: num(grid.h()),
            origin: num(grid.normal_coord(0)),
            normal_nodes: grid.normal_len(),
            max_error_bound: num(bound),
        },
    )?;
    Ok(Outcome::Pass)
}
