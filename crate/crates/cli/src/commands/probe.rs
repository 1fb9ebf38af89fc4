use reflext::coeffs::seeley_one_sided_coefficients;
use reflext::normlab::{
    adjoint_flatness, besov_probe_grid, boundary_smoothness_report, default_radii, dilation_growth_probe, duality_check,
    holder_probe, sobolev_probe_grid, test_family, witness_transport_probe, NormFamily, NormProbeReport, NormSpec,
    ProbeConfig, TestFunction,
};
use reflext::operator::Builtin;
use serde::Serialize;

use crate::cli::{GlobalArgs, ProbeArgs, ProbeCommand};
use crate::commands::{context, load_plan, parse_exponent, parse_list, parse_number};
use crate::error::{CliError, CliResult, Outcome};
use crate::output::{decimal, num, opt_num, Num, OutputDir};

#[derive(Serialize)]
struct RowRecord {
    function_id: String,
    norm_in: Num,
    norm_out: Num,
    ratio: Num,
    bound: Option<Num>,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Serialize)]
struct ReportRecord {
    operator_id: String,
    spec: String,
    norm: &'static str,
    order: Num,
    p: Num,
    q: Num,
    constant: Option<Num>,
    spread: Option<Num>,
    excluded: Vec<String>,
    rows: Vec<RowRecord>,
    pass: bool,
}

fn report_record(r: &NormProbeReport) -> ReportRecord {
    ReportRecord {
        operator_id: r.operator_id.clone(),
        spec: r.spec.label(),
        norm: r.spec.family.name(),
        order: num(r.spec.order),
        p: num(r.spec.p),
        q: num(r.spec.q),
        constant: opt_num(r.constant),
        spread: opt_num(r.spread),
        excluded: r.excluded.clone(),
        rows: r
            .rows
            .iter()
            .map(|row| RowRecord {
                function_id: row.function_id.clone(),
                norm_in: num(row.norm_in),
                norm_out: num(row.norm_out),
                ratio: num(row.ratio),
                bound: opt_num(row.bound),
                pass: row.pass,
                note: row.note.clone(),
            })
            .collect(),
        pass: r.pass,
    }
}

fn write_reports(out: &OutputDir, name: &str, reports: &[NormProbeReport]) -> CliResult<Outcome> {
    let records: Vec<ReportRecord> = reports.iter().map(report_record).collect();
    out.write_json(&format!("probe-{name}.json"), &records)?;
    let rows: Vec<Vec<String>> = reports
        .iter()
        .flat_map(|r| {
            r.rows.iter().map(move |row| {
                vec![
                    r.spec.label(),
                    row.function_id.clone(),
                    decimal(row.norm_in),
                    decimal(row.norm_out),
                    decimal(row.ratio),
                    row.bound.map(decimal).unwrap_or_default(),
                    row.pass.to_string(),
                ]
            })
        })
        .collect();
    out.write_csv(&format!("probe-{name}.csv"), &["spec", "function_id", "norm_in", "norm_out", "ratio", "bound", "pass"], &rows)?;
    Ok(Outcome::from_pass(reports.iter().all(|r| r.pass)))
}

fn selected(indices: &[usize]) -> CliResult<Vec<TestFunction>> {
    let fam = test_family();
    if indices.is_empty() {
        return Ok(fam);
    }
    indices
        .iter()
        .map(|&i| fam.get(i).cloned().ok_or_else(|| CliError::Usage(format!("test family has {} members, no index {i}", fam.len()))))
        .collect()
}

fn member(i: usize) -> CliResult<TestFunction> {
    Ok(selected(&[i])?.remove(0))
}

fn probe_config(args: &ProbeArgs) -> ProbeConfig {
    let mut cfg = ProbeConfig::default();
    if let Some(n) = args.per_decade {
        cfg.per_decade = n;
    }
    cfg
}

/// `lp:P`, `sobolev:K:P`, `besov:P:Q:S` or `triebel:P:S`.
fn parse_norm(s: &str) -> CliResult<NormSpec> {
    let parts: Vec<&str> = s.split(':').collect();
    let spec = match parts.as_slice() {
        ["lp", p] => NormSpec::lp(parse_exponent(p)?),
        ["sobolev", k, p] => NormSpec::sobolev(parse_number(k)?, parse_exponent(p)?),
        ["besov", p, q, s] => NormSpec::besov(parse_exponent(p)?, parse_exponent(q)?, parse_number(s)?),
        ["triebel", p, s] => {
            let p = parse_exponent(p)?;
            NormSpec::triebel_diag(p, p, parse_number(s)?)
        }
        _ => return Err(CliError::Usage(format!("unknown norm {s:?}"))),
    };
    Ok(spec?)
}

#[derive(Serialize)]
struct DilationRecord {
    function_id: String,
    spec: String,
    radii: Vec<Num>,
    ratios: Vec<Num>,
    slope: Num,
    slope_small: Num,
    slope_large: Num,
    expected_slope: Option<Num>,
    pass: bool,
}

#[derive(Serialize)]
struct BoundaryRecord {
    function: String,
    family_id: String,
    floor: Num,
    orders: Vec<OrderRecord>,
    pass: bool,
}

#[derive(Serialize)]
struct OrderRecord {
    order: usize,
    steps: Vec<Num>,
    mismatches: Vec<Num>,
    fitted_order: Option<Num>,
    pass: bool,
}

#[derive(Serialize)]
struct AdjointRecord {
    f: String,
    g: String,
    lhs: Num,
    rhs: Num,
    duality_error: Num,
    duality_tol: Num,
    duality_pass: bool,
    near: Num,
    far: Num,
    limit: Num,
    flatness: Vec<FlatnessRecord>,
    flatness_pass: bool,
    pass: bool,
}

#[derive(Serialize)]
struct FlatnessRecord {
    order: usize,
    near_value: Num,
    far_value: Num,
    ratio: Num,
    decreasing: bool,
    pass: bool,
}

pub fn run(global: &GlobalArgs, cmd: &ProbeCommand) -> CliResult<Outcome> {
    match cmd {
        ProbeCommand::Sobolev { probe, k, p } => {
            let ks = parse_list(k, parse_number::<i32>)?;
            let ps = parse_list(p, parse_exponent)?;
            let fam = selected(&probe.functions)?;
            let cfg = probe_config(probe);
            let out = OutputDir::acquire(&global.out)?;
            let plan = load_plan(global, &probe.source)?;
            let pos: Vec<u32> = ks.iter().filter(|&&k| k >= 0).map(|&k| k as u32).collect();
            let neg: Vec<i32> = ks.iter().copied().filter(|&k| k < 0).collect();
            let mut reports = Vec::new();
            if !pos.is_empty() && !ps.is_empty() {
                reports.extend(sobolev_probe_grid(&plan, &pos, &ps, &fam, &cfg)?);
            }
            if !neg.is_empty() && !ps.is_empty() {
                reports.extend(witness_transport_probe(&plan, &neg, &ps, &fam, &cfg)?);
            }
            write_reports(&out, "sobolev", &reports)
        }
        ProbeCommand::Lp { probe, p } => {
            let ps = parse_list(p, parse_exponent)?;
            let fam = selected(&probe.functions)?;
            let out = OutputDir::acquire(&global.out)?;
            let plan = load_plan(global, &probe.source)?;
            let reports = if ps.is_empty() { Vec::new() } else { sobolev_probe_grid(&plan, &[0], &ps, &fam, &probe_config(probe))? };
            write_reports(&out, "lp", &reports)
        }
        ProbeCommand::Holder { probe, s } => {
            let ss = parse_list(s, parse_number::<f64>)?;
            let fam = selected(&probe.functions)?;
            let out = OutputDir::acquire(&global.out)?;
            let plan = load_plan(global, &probe.source)?;
            let reports = holder_probe(&plan, &ss, &fam, &probe_config(probe))?;
            write_reports(&out, "holder", &reports)
        }
        ProbeCommand::Besov { probe, p, q, s, triebel } => {
            let (ps, qs, ss) = (parse_list(p, parse_exponent)?, parse_list(q, parse_exponent)?, parse_list(s, parse_number::<f64>)?);
            let mut specs = Vec::new();
            for &p in &ps {
                for &q in &qs {
                    for &s in &ss {
                        specs.push(if *triebel { NormSpec::triebel_diag(p, q, s)? } else { NormSpec::besov(p, q, s)? });
                    }
                }
            }
            let fam = selected(&probe.functions)?;
            let out = OutputDir::acquire(&global.out)?;
            let plan = load_plan(global, &probe.source)?;
            let reports = if specs.is_empty() { Vec::new() } else { besov_probe_grid(&plan, &specs, &fam, &probe_config(probe))? };
            write_reports(&out, if *triebel { "triebel" } else { "besov" }, &reports)
        }
        ProbeCommand::Dilation { probe, norm, radii, slope_tol } => {
            let spec = parse_norm(norm)?;
            let radii = if radii.is_empty() { default_radii() } else { radii.clone() };
            let fam = selected(&probe.functions)?;
            let cfg = probe_config(probe);
            let out = OutputDir::acquire(&global.out)?;
            let expected = (spec.family == NormFamily::Lp).then(|| if spec.p.is_infinite() { 0.0 } else { -1.0 / spec.p });
            let records = fam
                .iter()
                .map(|f| {
                    let r = dilation_growth_probe(&spec, f, &radii, &cfg)?;
                    let finite = r.rows.iter().all(|row| row.ratio.is_finite() && row.ratio > 0.0);
                    let pass = finite && expected.is_none_or(|e| (r.slope - e).abs() <= *slope_tol);
                    Ok(DilationRecord {
                        function_id: r.function_id.clone(),
                        spec: spec.label(),
                        radii: r.rows.iter().map(|row| num(row.r)).collect(),
                        ratios: r.rows.iter().map(|row| num(row.ratio)).collect(),
                        slope: num(r.slope),
                        slope_small: num(r.slope_small),
                        slope_large: num(r.slope_large),
                        expected_slope: expected.map(num),
                        pass,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            out.write_json("probe-dilation.json", &records)?;
            let rows: Vec<Vec<String>> = records
                .iter()
                .flat_map(|rec| rec.radii.iter().zip(&rec.ratios).map(|(r, q)| vec![rec.function_id.clone(), r.value.clone(), q.value.clone()]))
                .collect();
            out.write_csv("probe-dilation.csv", &["function_id", "r", "ratio"], &rows)?;
            Ok(Outcome::from_pass(records.iter().all(|r| r.pass)))
        }
        ProbeCommand::Boundary { source, seeley, function, max_order, h, floor } => {
            let f = Builtin::parse(function)?;
            let family = match seeley {
                Some(beta) => seeley_one_sided_coefficients(&context(global)?, 6, *beta)?,
                None => load_plan(global, source)?.family().clone(),
            };
            let out = OutputDir::acquire(&global.out)?;
            let r = boundary_smoothness_report(&family, f, *max_order, h, *floor)?;
            let record = BoundaryRecord {
                function: r.function.clone(),
                family_id: family.id(),
                floor: num(r.floor),
                orders: r
                    .orders
                    .iter()
                    .map(|o| OrderRecord {
                        order: o.order,
                        steps: o.mismatches.iter().map(|m| num(m.0)).collect(),
                        mismatches: o.mismatches.iter().map(|m| num(m.1)).collect(),
                        fitted_order: opt_num(o.fitted_order),
                        pass: o.pass,
                    })
                    .collect(),
                pass: r.pass,
            };
            out.write_json("probe-boundary.json", &record)?;
            Ok(Outcome::from_pass(r.pass))
        }
        ProbeCommand::Adjoint { source, f_index, g_index, duality_tol, max_order, near, far, limit } => {
            let (f, g) = (member(*f_index)?, member(*g_index)?);
            let out = OutputDir::acquire(&global.out)?;
            let plan = load_plan(global, source)?;
            let d = duality_check(&plan, &f, &g, *duality_tol)?;
            let fl = adjoint_flatness(&plan, &g, *max_order, *near, *far, *limit)?;
            let record = AdjointRecord {
                f: f.id().into(),
                g: g.id().into(),
                lhs: num(d.lhs),
                rhs: num(d.rhs),
                duality_error: num(d.error),
                duality_tol: num(d.tol),
                duality_pass: d.pass,
                near: num(fl.near_point),
                far: num(fl.far_point),
                limit: num(fl.limit),
                flatness: fl
                    .rows
                    .iter()
                    .map(|r| FlatnessRecord {
                        order: r.order,
                        near_value: num(r.near),
                        far_value: num(r.far),
                        ratio: num(r.ratio),
                        decreasing: r.decreasing,
                        pass: r.pass,
                    })
                    .collect(),
                flatness_pass: fl.pass,
                pass: d.pass && fl.pass,
            };
            out.write_json("probe-adjoint.json", &record)?;
            Ok(Outcome::from_pass(record.pass))
        }
    }
}
