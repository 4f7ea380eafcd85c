use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "hopfion",
    version,
    about = "Dirac and Maxwell hopfions: sampling, tracing, analysis, verification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a field on a grid.
    Sample(SampleArgs),
    /// Trace streamlines from seed points.
    Trace(TraceArgs),
    /// Sweep normalization, moments, spreading, or uncertainty.
    Analyze(AnalyzeArgs),
    /// Run the verification suites.
    Verify(VerifyArgs),
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Winding number.
    #[arg(long, default_value_t = 0)]
    pub l: u32,
    /// Packet size.
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Mass.
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    /// Boost speed along z.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub v: f64,
    /// Bispinor kind: psi+, psi-, phi+, phi-.
    #[arg(long, default_value = "psi+")]
    pub kind: String,
    /// Output format; csv by default, json for verify.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Relative tolerance: quadrature tolerance for sample/trace/analyze,
    /// replacement tolerance of every check for verify.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long, default_value_t = 42)]
    pub rng_seed: u64,
    /// Print lengths and times in reduced Compton wavelengths to stderr.
    #[arg(long)]
    pub compton: bool,
}

impl Common {
    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldSelector {
    #[value(name = "f_l")]
    FL,
    #[value(name = "j_mu")]
    JMu,
    #[value(name = "v_dirac")]
    VDirac,
    #[value(name = "v_maxwell")]
    VMaxwell,
    #[value(name = "rs_vector")]
    RsVector,
    #[value(name = "charge_profile")]
    ChargeProfile,
    #[value(name = "upsilon")]
    Upsilon,
}

impl FieldSelector {
    pub fn name(self) -> &'static str {
        match self {
            FieldSelector::FL => "f_l",
            FieldSelector::JMu => "j_mu",
            FieldSelector::VDirac => "v_dirac",
            FieldSelector::VMaxwell => "v_maxwell",
            FieldSelector::RsVector => "rs_vector",
            FieldSelector::ChargeProfile => "charge_profile",
            FieldSelector::Upsilon => "upsilon",
        }
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub field: FieldSelector,
    /// Axes as `x=-3:3:41,z=-3:3:41,y=0,t=0`; ranged axes loop outer to inner
    /// in the order given, unlisted axes sit at 0.
    #[arg(long, default_value = "x=-3:3:41,z=-3:3:41")]
    pub grid: String,
    /// Keep out-of-plane vector components on a two-axis spatial slice.
    #[arg(long)]
    pub all_components: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceSelector {
    Current,
    Dirac,
    Maxwell,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long, value_enum, default_value_t = SourceSelector::Maxwell)]
    pub source: SourceSelector,
    /// Seeds as `x,y,z;x,y,z`; defaults to `(a,0,0)` and `(1.5a,0,0)`.
    #[arg(long, allow_hyphen_values = true)]
    pub seeds: Option<String>,
    /// Time slice.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t: f64,
    /// Stop rule: `return` (first return to the seed), `arc:<length>`, or `lambda:<value>`.
    #[arg(long, default_value = "return")]
    pub stop: String,
    /// Give-up arc length for `return`, in units of a.
    #[arg(long, default_value_t = 200.0)]
    pub max_arc: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Analysis {
    Norm,
    Moments,
    Spreading,
    Uncertainty,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(value_enum)]
    pub analysis: Analysis,
    /// Winding numbers to sweep; overrides --l.
    #[arg(long, value_delimiter = ',')]
    pub l_list: Option<Vec<u32>>,
    /// Packet sizes to sweep; overrides --a.
    #[arg(long, value_delimiter = ',')]
    pub a_list: Option<Vec<f64>>,
    /// Apply the sweep to all four kinds.
    #[arg(long)]
    pub all_kinds: bool,
    /// Also write the run report as JSON here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Level::Quick)]
    pub level: Level,
    /// Run only these suites (comma separated names).
    #[arg(long, value_delimiter = ',')]
    pub suites: Option<Vec<String>>,
    #[command(flatten)]
    pub common: Common,
}
