use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "reflext", version, about = "Reflection-type extension operators: coefficients, probes and planar domains")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Args)]
pub struct GlobalArgs {
    /// Binary working precision for coefficient synthesis.
    #[arg(long, global = true, default_value_t = 512)]
    pub bits: usize,
    /// Two-sided truncation index.
    #[arg(long, global = true, default_value_t = 20)]
    pub jmax: usize,
    /// Moment residual tolerance.
    #[arg(long, global = true, default_value = "1e-30")]
    pub tol: f64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Seed for randomized test points.
    #[arg(long, global = true, default_value_t = 20_240_601)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize or check coefficient families.
    #[command(subcommand)]
    Coeffs(CoeffsCommand),
    /// Extend a builtin function or a half grid to the full line or plane.
    Extend(ExtendArgs),
    /// Operator-norm, dilation, boundary and adjoint probes.
    #[command(subcommand)]
    Probe(ProbeCommand),
    /// Extension from planar domains.
    #[command(subcommand)]
    Domain(DomainCommand),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    TwoSided,
    Seeley,
    Vandermonde,
    Dyadic,
}

#[derive(Debug, Subcommand)]
pub enum CoeffsCommand {
    /// Build a family and write it with its moment report.
    Gen(GenArgs),
    /// Recompute the moments of a coefficient file.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Largest validated moment order (two-sided and Seeley).
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Seeley node ratio.
    #[arg(long, default_value_t = 4)]
    pub beta: u32,
    /// Vandermonde nodes, comma separated decimals.
    #[arg(long, value_delimiter = ',')]
    pub nodes: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub m1: usize,
    #[arg(long, default_value_t = 1)]
    pub m2: usize,
    /// Dyadic order `m` of the finite family.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Dyadic base point `r`.
    #[arg(long, default_value = "1")]
    pub r: String,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub file: PathBuf,
    /// Check `|k| <= kmax` instead of the file's validated range.
    #[arg(long)]
    pub kmax: Option<i32>,
}

#[derive(Debug, Args)]
pub struct CoefficientSource {
    /// Coefficient file; the two-sided family is synthesized when absent.
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtendArgs {
    /// Builtin function, e.g. `builtin:poly:2`, `exp-decay`, `sine:3`.
    #[arg(long = "f", default_value = "builtin:exp-decay")]
    pub function: String,
    #[arg(long, default_value_t = 0.01)]
    pub h: f64,
    /// Normal range `lo:hi`.
    #[arg(long, default_value = "-2:2", allow_hyphen_values = true)]
    pub range: String,
    /// Tangential axis `origin:h:n`; makes the output two-dimensional.
    #[arg(long, allow_hyphen_values = true)]
    pub tangential: Option<String>,
    /// Extend this half grid instead of a builtin.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Nodes added below `x_n = 0` for `--input`.
    #[arg(long, default_value_t = 200)]
    pub neg: usize,
    /// Rays leaving the sampled range: `error`, `zero` or `decay:RATE`.
    #[arg(long, default_value = "error")]
    pub policy: String,
    /// Interpolation order along the normal for `--input`.
    #[arg(long)]
    pub order: Option<usize>,
    #[command(flatten)]
    pub source: CoefficientSource,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub source: CoefficientSource,
    /// Test family members by index, comma separated; all 20 when absent.
    #[arg(long, value_delimiter = ',')]
    pub functions: Vec<usize>,
    /// Graded-mesh density.
    #[arg(long)]
    pub per_decade: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum ProbeCommand {
    /// Sobolev ratios against the bound; negative orders by witness transport.
    Sobolev {
        #[command(flatten)]
        probe: ProbeArgs,
        /// Orders, comma separated; negative orders use witness transport.
        #[arg(long, default_value = "0,1,2,3", allow_hyphen_values = true)]
        k: String,
        /// Exponents such as `1/2`, `2`, `inf`.
        #[arg(long, default_value = "1,2,inf")]
        p: String,
    },
    /// Lebesgue ratios against the bound.
    Lp {
        #[command(flatten)]
        probe: ProbeArgs,
        #[arg(long, default_value = "1/2,1,2,inf")]
        p: String,
    },
    /// Hölder ratios against the sup-norm bound.
    Holder {
        #[command(flatten)]
        probe: ProbeArgs,
        #[arg(long, default_value = "0.25,0.5,0.75")]
        s: String,
    },
    /// Besov or Triebel–Lizorkin ratios, judged by uniformity.
    Besov {
        #[command(flatten)]
        probe: ProbeArgs,
        #[arg(long, default_value = "2")]
        p: String,
        #[arg(long, default_value = "2")]
        q: String,
        #[arg(long, default_value = "-0.5,0.5", allow_hyphen_values = true)]
        s: String,
        /// Diagonal Triebel–Lizorkin norms instead (requires q = p).
        #[arg(long)]
        triebel: bool,
    },
    /// Growth of norms under dilation of each test function.
    Dilation {
        #[command(flatten)]
        probe: ProbeArgs,
        /// `lp:P`, `sobolev:K:P`, `besov:P:Q:S` or `triebel:P:S`.
        #[arg(long, default_value = "lp:2", allow_hyphen_values = true)]
        norm: String,
        #[arg(long, value_delimiter = ',')]
        radii: Vec<f64>,
        /// Allowed distance of an `L^p` slope from `−1/p`.
        #[arg(long, default_value_t = 0.02)]
        slope_tol: f64,
    },
    /// One-sided derivative mismatch at the boundary.
    Boundary {
        #[command(flatten)]
        source: CoefficientSource,
        /// Use the one-sided Seeley family with this node ratio.
        #[arg(long)]
        seeley: Option<u32>,
        #[arg(long = "f", default_value = "exp-decay")]
        function: String,
        #[arg(long, default_value_t = 6)]
        max_order: usize,
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3")]
        h: Vec<f64>,
        #[arg(long, default_value_t = 1e-12)]
        floor: f64,
    },
    /// Duality pairing and boundary flatness of the adjoint.
    Adjoint {
        #[command(flatten)]
        source: CoefficientSource,
        /// Index of `f` in the test family.
        #[arg(long = "f", default_value_t = 3)]
        f_index: usize,
        #[arg(long = "g", default_value_t = 0)]
        g_index: usize,
        #[arg(long, default_value_t = 1e-8)]
        duality_tol: f64,
        #[arg(long, default_value_t = 3)]
        max_order: usize,
        #[arg(long, default_value_t = 1e-3)]
        near: f64,
        #[arg(long, default_value_t = 0.5)]
        far: f64,
        #[arg(long, default_value_t = 1e-3)]
        limit: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    Disk,
    Ellipse,
    Star,
}

#[derive(Debug, Args)]
pub struct ShapeArgs {
    #[arg(long, value_enum, default_value_t = ShapeArg::Disk)]
    pub shape: ShapeArg,
    /// Domain spec file; overrides `--shape`.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 0.3)]
    pub t_max: f64,
    #[command(flatten)]
    pub source: CoefficientSource,
}

#[derive(Debug, Subcommand)]
pub enum DomainCommand {
    /// Sample the extension and the dependence field on the bounding box.
    Extend {
        #[command(flatten)]
        shape: ShapeArgs,
        /// `one`, `x1`, `x1x2` or `exp-neg-x1`.
        #[arg(long = "f", default_value = "exp-neg-x1")]
        function: String,
        /// Grid nodes per axis.
        #[arg(long, default_value_t = 81)]
        n: usize,
    },
    /// Extension, continuity, C² and curve-dependence checks.
    Depend {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, default_value_t = 20)]
        cases: usize,
    },
}
