use reflext::coeffs::{
    dyadic_finite_coefficients, moment_report, seeley_one_sided_coefficients, synthesize_two_sided, vandermonde_coefficients,
    CoefficientFamily, MomentReport,
};
use reflext::coeffs::fixed_point::contraction_constant;
use reflext::{PrecisionContext, Real};
use serde::Serialize;

use crate::cli::{CheckArgs, GenArgs, GlobalArgs, KindArg};
use crate::commands::{context, DEFAULT_KMAX};
use crate::error::{CliError, CliResult, Outcome};
use crate::files::CoefficientFile;
use crate::output::{num, real, Num, OutputDir};

#[derive(Serialize)]
struct MomentRowRecord {
    k: i32,
    sum: Num,
    residual: Num,
    weighted_sum: Num,
    weighted_tail: Num,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct MomentRecord {
    family_id: String,
    delta: Num,
    tail_tol: Num,
    max_residual: Num,
    largest_convergent_delta: Option<Num>,
    rows: Vec<MomentRowRecord>,
    pass: bool,
}

fn moment_record(r: &MomentReport) -> MomentRecord {
    MomentRecord {
        family_id: r.family_id.clone(),
        delta: num(r.delta),
        tail_tol: num(r.tail_tol),
        max_residual: num(r.max_residual()),
        largest_convergent_delta: r.largest_convergent_delta.map(num),
        rows: r
            .rows
            .iter()
            .map(|row| MomentRowRecord {
                k: row.k,
                sum: real(&row.sum),
                residual: num(row.residual),
                weighted_sum: num(row.weighted_sum),
                weighted_tail: num(row.weighted_tail),
                pass: row.pass,
                error: row.error.clone(),
            })
            .collect(),
        pass: r.pass,
    }
}

#[derive(Serialize)]
struct FixedPointRecord {
    iterations: usize,
    step_diffs: Vec<Num>,
    step_ratios: Vec<Num>,
    max_step_ratio: Num,
    contraction_constant: Num,
    operator_bound: Num,
    taylor_gap: Num,
    dropped_node_bound: Num,
}

fn write_outputs(out: &OutputDir, family: &CoefficientFamily, report: &MomentReport, ctx: &PrecisionContext) -> CliResult<()> {
    out.write_json("coeffs.json", &CoefficientFile::from_family(family, ctx.jmax(), ctx.tail_tol()))?;
    out.write_json("moments.json", &moment_record(report))?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| vec![r.k.to_string(), num(r.residual).value, num(r.weighted_sum).value, r.pass.to_string()])
        .collect();
    out.write_csv("moments.csv", &["k", "residual", "weighted_sum", "pass"], &rows)?;
    Ok(())
}

pub fn generate(global: &GlobalArgs, args: &GenArgs) -> CliResult<Outcome> {
    let ctx = context(global)?;
    let out = OutputDir::acquire(&global.out)?;
    let bits = ctx.bits();
    let (family, report) = match args.kind {
        KindArg::TwoSided => {
            let run = synthesize_two_sided(&ctx, args.kmax.unwrap_or(DEFAULT_KMAX), None)?;
            let record = FixedPointRecord {
                iterations: run.iterations,
                step_diffs: run.diffs.iter().copied().map(num).collect(),
                step_ratios: run.ratios.iter().copied().map(num).collect(),
                max_step_ratio: num(run.ratios.iter().copied().fold(0.0, f64::max)),
                contraction_constant: num(contraction_constant()),
                operator_bound: num(run.operator_bound),
                taylor_gap: num(run.taylor_gap),
                dropped_node_bound: num(run.dropped_node_bound),
            };
            out.write_json("fixed_point.json", &record)?;
            (run.family, run.report)
        }
        KindArg::Seeley => {
            let family = seeley_one_sided_coefficients(&ctx, args.kmax.unwrap_or(6), args.beta)?;
            let report = moment_report(&family, family.validated().range(), family.delta(), &ctx);
            (family, report)
        }
        KindArg::Vandermonde => {
            if args.nodes.is_empty() {
                return Err(CliError::Usage("--kind vandermonde needs --nodes".into()));
            }
            let nodes = args.nodes.iter().map(|s| Real::parse(s, bits)).collect::<reflext::Result<Vec<_>>>()?;
            let family = vandermonde_coefficients(&nodes, args.m1, args.m2)?;
            let report = moment_report(&family, family.validated().range(), family.delta(), &ctx);
            (family, report)
        }
        KindArg::Dyadic => {
            let family = dyadic_finite_coefficients(args.m, &Real::parse(&args.r, bits)?)?;
            let report = moment_report(&family, family.validated().range(), family.delta(), &ctx);
            (family, report)
        }
    };
    write_outputs(&out, &family, &report, &ctx)?;
    Ok(Outcome::from_pass(report.pass))
}

pub fn check(global: &GlobalArgs, args: &CheckArgs) -> CliResult<Outcome> {
    let file = CoefficientFile::read(&args.file)?;
    let family = file.to_family()?;
    let ctx = PrecisionContext::new(global.bits.max(family.bits()), file.meta.jmax.max(1), global.tol)?;
    let range = match args.kmax {
        Some(k) if k < 0 => return Err(CliError::Usage("--kmax must be non-negative".into())),
        Some(k) => -k..=k,
        None => family.validated().range(),
    };
    let report = moment_report(&family, range, family.delta(), &ctx);
    let out = OutputDir::acquire(&global.out)?;
    out.write_json("moments.json", &moment_record(&report))?;
    Ok(Outcome::from_pass(report.pass))
}
