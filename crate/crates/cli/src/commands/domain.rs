use reflext::domain::{shape_suite, CutoffProfile, DomainExtension, PlanarDomain, PlaneFunction, ShapeReport, SuiteConfig};
use serde::Serialize;

use crate::cli::{DomainCommand, GlobalArgs, ShapeArg, ShapeArgs};
use crate::commands::load_plan;
use crate::error::{CliError, CliResult, Outcome};
use crate::files::DomainSpec;
use crate::output::{decimal, num, opt_num, Num, OutputDir};

fn build(args: &ShapeArgs) -> CliResult<(&'static str, PlanarDomain)> {
    if let Some(path) = &args.spec {
        return Ok(("spec", DomainSpec::read(path)?.build()?));
    }
    let t = args.t_max;
    Ok(match args.shape {
        ShapeArg::Disk => ("disk", PlanarDomain::disk(t)?),
        ShapeArg::Ellipse => ("ellipse", PlanarDomain::ellipse(1.3, 0.8, t)?),
        ShapeArg::Star => ("star", PlanarDomain::star(0.15, 3, t)?),
    })
}

fn extension(global: &GlobalArgs, args: &ShapeArgs) -> CliResult<(&'static str, DomainExtension)> {
    let (name, dom) = build(args)?;
    let plan = load_plan(global, &args.source)?;
    Ok((name, DomainExtension::new(dom, CutoffProfile::default(), plan, 2)?))
}

#[derive(Serialize)]
struct FieldRecord {
    shape: &'static str,
    function: &'static str,
    family_id: String,
    t_max: Num,
    reach: Num,
    nodes_per_axis: usize,
    max_tail_bound: Num,
}

#[derive(Serialize)]
struct SecondDerivativeRecord {
    function: &'static str,
    theta: Num,
    steps: Vec<Num>,
    mismatches: Vec<Num>,
    fitted_order: Option<Num>,
    pass: bool,
}

#[derive(Serialize)]
struct DependenceRecord {
    x: [Num; 2],
    theta: Num,
    t: Num,
    bump_center: [Num; 2],
    bump_radius: Num,
    clearance: Num,
    difference: Num,
    pass: bool,
}

#[derive(Serialize)]
struct SuiteRecord {
    shape: &'static str,
    reach: Num,
    interior_max_error: Num,
    interior_pass: bool,
    continuity_max: Num,
    continuity_pass: bool,
    second_derivative: Vec<SecondDerivativeRecord>,
    second_derivative_pass: bool,
    dependence: Vec<DependenceRecord>,
    dependence_pass: bool,
    control_difference: Num,
    control_pass: bool,
    pass: bool,
}

fn suite_record(r: &ShapeReport) -> SuiteRecord {
    SuiteRecord {
        shape: r.shape,
        reach: num(r.reach),
        interior_max_error: num(r.interior_max_error),
        interior_pass: r.interior_pass,
        continuity_max: num(r.continuity_max),
        continuity_pass: r.continuity_pass,
        second_derivative: r
            .second_derivative
            .iter()
            .map(|row| SecondDerivativeRecord {
                function: row.function,
                theta: num(row.theta),
                steps: row.mismatches.iter().map(|m| num(m.0)).collect(),
                mismatches: row.mismatches.iter().map(|m| num(m.1)).collect(),
                fitted_order: opt_num(row.fitted_order),
                pass: row.pass,
            })
            .collect(),
        second_derivative_pass: r.second_derivative_pass,
        dependence: r
            .dependence
            .iter()
            .map(|d| DependenceRecord {
                x: d.x.map(num),
                theta: num(d.theta),
                t: num(d.t),
                bump_center: d.bump.center.map(num),
                bump_radius: num(d.bump.radius),
                clearance: num(d.clearance),
                difference: num(d.difference),
                pass: d.pass,
            })
            .collect(),
        dependence_pass: r.dependence_pass,
        control_difference: num(r.control_difference),
        control_pass: r.control_pass,
        pass: r.pass,
    }
}

pub fn run(global: &GlobalArgs, cmd: &DomainCommand) -> CliResult<Outcome> {
    match cmd {
        DomainCommand::Extend { shape, function, n } => {
            let f = PlaneFunction::parse(function)?;
            if *n < 2 {
                return Err(CliError::Usage("--n must be at least 2".into()));
            }
            let (name, ext) = extension(global, shape)?;
            let out = OutputDir::acquire(&global.out)?;
            let dom = ext.domain();
            let pad = 1.1 * dom.t_max();
            let (lo, hi) = dom.samples().1.iter().fold(([f64::MAX; 2], [f64::MIN; 2]), |(lo, hi), p| {
                ([lo[0].min(p[0] - pad), lo[1].min(p[1] - pad)], [hi[0].max(p[0] + pad), hi[1].max(p[1] + pad)])
            });
            let samples = ext.field_samples(lo, hi, *n)?;
            let g = move |p: reflext::domain::Point| f.eval(p);
            let step = |i: usize| (hi[i] - lo[i]) / (*n - 1) as f64;
            let mut text = format!(
                "# dim=2, h={}:{}, origin={}:{}, full\nx,y,value,field_x,field_y,mask\n",
                decimal(step(0)),
                decimal(step(1)),
                decimal(lo[0]),
                decimal(lo[1])
            );
            let mut tail = 0.0f64;
            for s in &samples {
                let e = ext.extend(&g, s.point)?;
                tail = tail.max(e.tail_bound);
                text.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    decimal(s.point[0]),
                    decimal(s.point[1]),
                    decimal(e.value),
                    decimal(s.field[0]),
                    decimal(s.field[1]),
                    s.mask.name()
                ));
            }
            out.write_text("domain-field.csv", &text)?;
            out.write_json(
                "domain-field.json",
                &FieldRecord {
                    shape: name,
                    function: f.id(),
                    family_id: ext.plan().family().id(),
                    t_max: num(dom.t_max()),
                    reach: num(dom.reach()),
                    nodes_per_axis: *n,
                    max_tail_bound: num(tail),
                },
            )?;
            Ok(Outcome::Pass)
        }
        DomainCommand::Depend { shape, cases } => {
            let (name, ext) = extension(global, shape)?;
            let out = OutputDir::acquire(&global.out)?;
            let cfg = SuiteConfig { t_max: shape.t_max, dependence_cases: *cases, seed: global.seed, ..SuiteConfig::default() };
            let report = shape_suite(name, &ext, &cfg)?;
            out.write_json("domain-depend.json", &suite_record(&report))?;
            Ok(Outcome::from_pass(report.pass))
        }
    }
}
