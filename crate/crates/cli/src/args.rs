use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "qchaos",
    version,
    about = "Exact moments of q-Gaussian chaos: pairings, joint moments, fourth-moment diagnostics",
    long_about = "Exact moments of multiple integrals with respect to q-Brownian motion.\n\n\
        Joint moments are sums over pairings weighted by q^crossings and are reported as \
        exact polynomials in q unless --q fixes a value."
)]
pub struct Cli {
    #[command(flatten)]
    pub session: Session,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct Session {
    /// Value of q as a rational ("1/2", "-0.5") or "symbolic" for polynomials in q.
    #[arg(long, global = true, default_value = "symbolic")]
    pub q: String,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Seed for randomly generated kernel sequences.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Largest number of points a pairing enumeration may use (at most 64).
    #[arg(long, global = true, default_value_t = 20)]
    pub max_points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enumerate pair partitions of {1..2k} and their crossing statistics.
    ///
    /// A crossing is a pair of pairs {a,c}, {b,d} with a < b < c < d. The
    /// crossing histogram over all pairings of 2k points is the coefficient
    /// list of the q-Gaussian moment sum_pi q^Cr(pi).
    Pairings(PairingsArgs),

    /// Joint moments phi(I_n1(f1) ... I_nr(fr)) of multiple q-Wiener integrals.
    ///
    /// The moment is sum over pairings pi of the blocks n1 (x) ... (x) nr with
    /// no pair inside a block of q^Cr(pi) times the integral of f1 (x) ... (x) fr
    /// with paired variables identified.
    Moments(MomentsArgs),

    /// Second, third and fourth moments of I_2(sqrt(2) 1_[0,1]^2) at q = -1/2.
    ///
    /// They equal 1, sqrt(2)/4 and 33/16 = 2 + q^4: second and fourth moments
    /// match the q^4-Gaussian law while the third moment does not vanish.
    /// Exits with status 1 if any value differs.
    Counterexample,

    /// Fourth-moment diagnostics along a sequence of symmetric kernels.
    ///
    /// For each k reports <f_k,f_k>_q, phi(I_n(f_k)^4), the target 2 + q^(n^2),
    /// the excess phi(I_n(f_k)^4) - (2 + q^(n^2)) <f_k,f_k>_q^2 and the contraction
    /// norms ||f_k ⌢_p f_k||^2 for p = 1..n-1. Requires a rational --q in [0, 1].
    FmtDiagnose(FmtArgs),

    /// Contraction norms of a kernel sequence evaluated at several values of q.
    ///
    /// The norms ||f_k ⌢_p f_k||^2 contain no q, so the columns must agree across
    /// q; sigma_q^2 = sum over S_n of q^inv and the targets 2 + q^(n^2) vary.
    /// Exits with status 1 if the columns differ.
    TransferCheck(TransferArgs),

    /// Finite-k moments and limits in the q-Breuer-Major theorem.
    ///
    /// With f_k(t) = k^(-1/2) sum_(l=1..floor(kt)) e_l^(x)n and <e_l, e_m> = rho(l-m),
    /// computes phi(I_n(f_k(s1)) ... I_n(f_k(sr))) exactly, and the limit
    /// (sum_(S_n) q^inv sum_l rho(l)^n)^(r/2) sum_(pi in P2(r)) q^(n^2 Cr(pi)) prod s_a ∧ s_b.
    BreuerMajor(BreuerArgs),

    /// Density of the q-Gaussian law and quadrature checks of its moments.
    ///
    /// For 0 <= q < 1 the density at x = 2cos(theta)/sqrt(1-q) is
    /// (1/pi) sqrt(1-q) sin(theta) prod_(n>=1) (1-q^n) |1 - q^n e^(2i theta)|^2;
    /// at q = 1 it is the standard normal. Requires a numeric --q.
    Density(DensityArgs),
}

#[derive(Args, Debug)]
pub struct PairingsArgs {
    /// Number of points 2k.
    #[arg(long, required_unless_present = "blocks")]
    pub points: Option<usize>,

    /// Only pairings with no pair inside a block of these consecutive sizes.
    #[arg(long, value_delimiter = ',', conflicts_with = "points")]
    pub blocks: Option<Vec<usize>>,

    /// Only noncrossing pairings.
    #[arg(long, conflicts_with = "blocks")]
    pub noncrossing: bool,

    /// Statistic to report.
    #[arg(long, value_enum, default_value_t = Stat::Crossings)]
    pub stat: Stat,

    /// List every pairing with its crossing number.
    #[arg(long)]
    pub list: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Stat {
    /// Number of pairings with each crossing number.
    Crossings,
    /// Number of pairings.
    Count,
}

#[derive(Args, Debug)]
pub struct MomentsArgs {
    /// Kernel JSON files, one per factor; all on the same grid.
    #[arg(long, num_args = 1.., required_unless_present = "gaussian")]
    pub kernels: Vec<PathBuf>,

    /// Instead, the moment of order 2k of the standard q-Gaussian law.
    #[arg(long, conflicts_with_all = ["kernels", "decompose"])]
    pub gaussian: Option<usize>,

    /// With a single symmetric kernel f: the fourth moment split as
    /// (2 + q^(n^2)) ||f||_q^4 + sum_p (||f ⌢_p^q f||_q^2 + w_p(q) ||f ⌢_p f||^2).
    #[arg(long)]
    pub decompose: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SequenceKind {
    /// k^(-1/2) sum_(l<k) e_l^(x)n on a k-cell unit grid.
    Spread,
    /// The constant sequence e^(x)n with e = 1_[0,1].
    Pure,
    /// Random symmetric kernels on a two-cell grid, from --seed.
    Random,
}

#[derive(Args, Debug)]
pub struct SequenceArgs {
    /// Built-in kernel sequence.
    #[arg(long, value_enum, default_value_t = SequenceKind::Spread)]
    pub sequence: SequenceKind,

    /// Chaos order of the built-in sequence.
    #[arg(long, default_value_t = 2)]
    pub n: usize,

    /// Indices k to evaluate.
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
    pub k_list: Vec<usize>,

    /// Use these symmetric kernel files as the sequence, indexed from k = 1.
    #[arg(long, num_args = 1.., conflicts_with_all = ["sequence", "n", "k_list"])]
    pub kernel_files: Vec<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FmtArgs {
    #[command(flatten)]
    pub sequence: SequenceArgs,
}

#[derive(Args, Debug)]
pub struct TransferArgs {
    #[command(flatten)]
    pub sequence: SequenceArgs,

    /// Values of q to compare.
    #[arg(long, value_delimiter = ',', default_value = "0,1/4,1/2,3/4,1")]
    pub q_list: Vec<String>,
}

#[derive(Args, Debug)]
pub struct BreuerArgs {
    /// Correlation file {"support": s, "values": [rho(0), ..., rho(s)]}.
    #[arg(long, required_unless_present = "rho_values")]
    pub rho: Option<PathBuf>,

    /// Correlation values rho(0), ..., rho(s) inline.
    #[arg(long, value_delimiter = ',', conflicts_with = "rho")]
    pub rho_values: Option<Vec<String>>,

    /// Chaos order n of each factor.
    #[arg(long, default_value_t = 2)]
    pub n: usize,

    /// Indices k to evaluate.
    #[arg(long, value_delimiter = ',', default_value = "10")]
    pub k_list: Vec<usize>,

    /// Time s of each factor, or of each group of factors with --orders.
    #[arg(long, value_delimiter = ',', default_value = "1,1")]
    pub times: Vec<String>,

    /// Number of factors at each listed time.
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<usize>>,

    /// Largest number of l-tuples the summation may visit.
    #[arg(long, default_value_t = qchaos::analysis::DEFAULT_BREUER_BUDGET)]
    pub budget: u64,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    /// Number of (x, density) samples across the support.
    #[arg(long, default_value_t = 201)]
    pub points: usize,

    /// Instead, check these moments by quadrature against the exact values.
    #[arg(long, value_delimiter = ',')]
    pub moments: Option<Vec<usize>>,

    /// Factors kept in the infinite product.
    #[arg(long)]
    pub truncation: Option<usize>,

    /// Quadrature nodes.
    #[arg(long)]
    pub nodes: Option<usize>,
}
