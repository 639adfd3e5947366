use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "projinv", version, about = "Random-projection tests for distributional invariance")]
pub struct Cli {
    /// Worker threads (default: available parallelism). Results do not
    /// depend on this value.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test a data file for invariance under a group.
    Test(TestArgs),
    /// Monte Carlo power curve for a built-in scenario.
    Simulate(SimulateArgs),
    /// Pairwise bivariate symmetry indices of the empirical copula.
    CopulaIndex(CopulaArgs),
    /// Inspect or validate a group specification.
    Group(GroupArgs),
    /// Print download instructions for the reference datasets, or fetch
    /// them with `--allow-network`.
    Fetch(FetchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Delimited text file, one observation per row.
    #[arg(long)]
    pub input: PathBuf,

    /// Comma-separated column names. A bare `N` or range `N-M` selects
    /// 1-based column positions. Default: every numeric column.
    #[arg(long, value_delimiter = ',')]
    pub columns: Option<Vec<String>>,

    /// Field delimiter: a single character, `tab`, or `space`.
    #[arg(long, default_value = ",")]
    pub delimiter: String,

    /// The file has no header row; columns are named c1, c2, ...
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProcedureArg {
    A,
    B,
    PermNull,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum SchemeArg {
    #[default]
    Symmetrized,
    Plain,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// `exchangeable`, `sign-exchangeable` or `file:PATH` (JSON).
    #[arg(long, default_value = "exchangeable")]
    pub group: String,

    #[arg(long, value_enum, default_value = "b")]
    pub procedure: ProcedureArg,

    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    /// Number of random directions.
    #[arg(long, default_value_t = 50)]
    pub directions: usize,

    /// Bootstrap replicates for procedure b.
    #[arg(long, default_value_t = 1000)]
    pub bootstrap: usize,

    #[arg(long, value_enum, default_value = "symmetrized")]
    pub bootstrap_scheme: SchemeArg,

    /// Null replicates for the permutation procedure.
    #[arg(long, default_value_t = 10_000)]
    pub replicates: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Report path; a run manifest is written next to it.
    #[arg(long, default_value = "report.json")]
    pub out: PathBuf,

    /// Write the observed-statistic directions to this CSV.
    #[arg(long)]
    pub dump_directions: Option<PathBuf>,

    /// Treat each row as `columns / G` curves of `G` grid points each,
    /// stored component-major.
    #[arg(long)]
    pub functional_grid: Option<usize>,

    /// Replace each column by its normalized ranks before testing. Always
    /// applied for `perm-null`.
    #[arg(long)]
    pub rank_transform: bool,

    /// Run the test on each of these leading-row prefixes.
    #[arg(long, value_delimiter = ',')]
    pub prefix_sizes: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    Gauss,
    ClaytonC1,
    ClaytonC2,
    Sign,
    Functional,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub scenario: ScenarioArg,

    #[arg(long, default_value_t = 1000)]
    pub n: usize,

    /// Dimension for `gauss` (default 6) and `sign` (default 3).
    #[arg(long)]
    pub dim: Option<usize>,

    /// Equicorrelation for `gauss`.
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,

    /// Grid points per curve for `functional`.
    #[arg(long, default_value_t = 100)]
    pub grid: usize,

    /// Comma-separated parameter values (default: the scenario's grid).
    #[arg(long, value_delimiter = ',')]
    pub params: Option<Vec<f64>>,

    #[arg(long, value_enum, default_value = "b")]
    pub procedure: ProcedureArg,

    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    #[arg(long, default_value_t = 50)]
    pub directions: usize,

    #[arg(long, default_value_t = 1000)]
    pub bootstrap: usize,

    #[arg(long, value_enum, default_value = "symmetrized")]
    pub bootstrap_scheme: SchemeArg,

    /// Monte Carlo replicates per parameter value.
    #[arg(long, default_value_t = 500)]
    pub replicates: usize,

    /// Null replicates per test for `perm-null`.
    #[arg(long, default_value_t = 1000)]
    pub null_replicates: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value = "curve.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CopulaArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Only `all` is supported.
    #[arg(long, default_value = "all")]
    pub pairs: String,

    #[arg(long, default_value = "symmetry.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GroupArgs {
    /// `exchangeable`, `sign-exchangeable` or `file:PATH`.
    #[arg(long)]
    pub group: String,

    /// Dimension for the built-in groups.
    #[arg(long)]
    pub dim: Option<usize>,

    /// Also enumerate the generated group.
    #[arg(long)]
    pub closure: bool,

    /// Largest group to enumerate.
    #[arg(long, default_value_t = 100_000)]
    pub cap: usize,

    /// Write the group as JSON to this path.
    #[arg(long)]
    pub export: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    /// Download the files with `curl`. Without this flag nothing is
    /// downloaded.
    #[arg(long)]
    pub allow_network: bool,

    #[arg(long, default_value = "data")]
    pub dir: PathBuf,
}
