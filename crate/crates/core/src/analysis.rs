//! Finite-k diagnostics for kernel sequences in a fixed chaos, plus exact
//! moments in the Breuer-Major setting.
//!
//! Reports carry exact values for the requested indices; no limit is decided.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::combinatorics::{
    enumerate_pairings, enumerate_respecting_capped, BlockStructure, DEFAULT_PAIRING_CAP,
};
use crate::error::{contract, Error, Result};
use crate::kernels::{is_symmetric, Grid, Kernel, RhoFunction};
use crate::moments::{fourth_moment_decomposition, joint_moment, third_moment, ChaosElement};
use crate::qalgebra::{int, q_factorial, ratio, rational_to_f64, QPoly, Rational, Surd};

/// Default number of l-tuples the Breuer-Major summation may visit.
pub const DEFAULT_BREUER_BUDGET: u64 = 50_000_000;

type Generator = dyn Fn(usize) -> Result<Kernel> + Send + Sync;

/// An indexed family of symmetric kernels of fixed arity.
#[derive(Clone)]
pub struct KernelSequence {
    description: String,
    arity: usize,
    generator: Arc<Generator>,
}

impl fmt::Debug for KernelSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSequence")
            .field("description", &self.description)
            .field("arity", &self.arity)
            .finish()
    }
}

impl KernelSequence {
    pub fn from_fn(
        description: impl Into<String>,
        arity: usize,
        generator: impl Fn(usize) -> Result<Kernel> + Send + Sync + 'static,
    ) -> Self {
        KernelSequence {
            description: description.into(),
            arity,
            generator: Arc::new(generator),
        }
    }

    /// `f_k = k^{-1/2} sum_{l<k} e_l^{⊗n}` with `e_l` the indicator of the
    /// `l`-th unit cell of a `k`-cell grid.
    pub fn spread(n: usize) -> Self {
        KernelSequence::from_fn(
            format!("k^(-1/2) sum_(l<k) e_l^(x){n}, orthonormal unit cells"),
            n,
            move |k| {
                if k == 0 {
                    return contract("the spread sequence starts at k = 1");
                }
                let grid = Grid::uniform(k, int(1))?;
                let diag = Kernel::from_fn(grid, n, |idx| {
                    if idx.iter().all(|&i| i == idx[0]) {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                });
                diag.with_scale(ratio(1, k as i64))
            },
        )
    }

    /// The constant sequence `e^{⊗n}` with `e` the indicator of `[0, 1]`.
    pub fn pure(n: usize) -> Self {
        KernelSequence::from_fn(format!("e^(x){n}, e = 1_[0,1]"), n, move |_| {
            Ok(Kernel::constant(Grid::uniform(1, int(1))?, n, int(1)))
        })
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn kernel(&self, k: usize) -> Result<Kernel> {
        let f = (self.generator)(k)?;
        if f.arity() != self.arity {
            return contract(format!(
                "sequence of arity {} produced arity {} at k = {k}",
                self.arity,
                f.arity()
            ));
        }
        if !is_symmetric(&f) {
            return contract(format!("kernel at k = {k} is not symmetric"));
        }
        Ok(f)
    }
}

fn to_text(r: &Rational) -> String {
    r.to_string()
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&to_text(r))
}

fn ser_rationals<S: serde::Serializer>(
    rs: &[Rational],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(rs.iter().map(to_text))
}

/// One index of a fourth-moment diagnostic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FmtRow {
    pub k: usize,
    /// `<f_k, f_k>_q`.
    #[serde(serialize_with = "ser_rational")]
    pub norm_q: Rational,
    /// `phi(I_n(f_k)^4)`.
    #[serde(serialize_with = "ser_rational")]
    pub fourth_moment: Rational,
    /// `phi(I_n(f_k)^4) - (2 + q^{n^2}) <f_k, f_k>_q^2`.
    #[serde(serialize_with = "ser_rational")]
    pub excess: Rational,
    /// `||f_k ⌢_p f_k||^2` for `p = 1, ..., n-1`.
    #[serde(serialize_with = "ser_rationals")]
    pub contraction_norms: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FmtReport {
    pub description: String,
    pub n: usize,
    #[serde(serialize_with = "ser_rational")]
    pub q: Rational,
    /// `2 + q^{n^2}`.
    #[serde(serialize_with = "ser_rational")]
    pub target: Rational,
    pub classical_case: bool,
    pub rows: Vec<FmtRow>,
}

impl FmtReport {
    /// Whether `excess` strictly decreases along the rows.
    pub fn excess_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].excess < w[0].excess)
    }
}

/// Evaluates the fourth moment, its normalization and the contraction norms of
/// `seq` at the indices `ks`, for a rational `q` in `[0, 1]`.
pub fn fmt_diagnose(seq: &KernelSequence, q: &Rational, ks: &[usize]) -> Result<FmtReport> {
    if q.is_negative() || q > &Rational::one() {
        return contract(format!("q must lie in [0, 1], got {q}"));
    }
    let n = seq.arity();
    let target = int(2) + QPoly::monomial(Rational::one(), n * n).eval(q);
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let f = ChaosElement::new(seq.kernel(k)?)?;
        let d = fourth_moment_decomposition(&f)?;
        let norm_q = d.norm_q.eval(q);
        let fourth_moment = d.total().eval(q);
        let excess = &fourth_moment - &target * &norm_q * &norm_q;
        rows.push(FmtRow {
            k,
            norm_q,
            fourth_moment,
            excess,
            contraction_norms: d.terms.iter().map(|t| t.contraction_norm.clone()).collect(),
        });
    }
    Ok(FmtReport {
        description: seq.description().to_string(),
        n,
        q: q.clone(),
        target,
        classical_case: q.is_one(),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransferColumn {
    #[serde(serialize_with = "ser_rational")]
    pub q: Rational,
    /// `sum over S_n of q^inv`.
    #[serde(serialize_with = "ser_rational")]
    pub sigma_sq: Rational,
    pub report: FmtReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransferReport {
    pub n: usize,
    pub ks: Vec<usize>,
    pub columns: Vec<TransferColumn>,
    /// Whether every `q` produced the same contraction-norm table.
    pub contraction_columns_identical: bool,
}

/// Runs [`fmt_diagnose`] independently for every `q` and compares the
/// contraction norms, which contain no `q`.
pub fn transfer_check(
    seq: &KernelSequence,
    ks: &[usize],
    qs: &[Rational],
) -> Result<TransferReport> {
    let sigma = q_factorial(seq.arity());
    let columns = qs
        .iter()
        .map(|q| {
            Ok(TransferColumn {
                q: q.clone(),
                sigma_sq: sigma.eval(q),
                report: fmt_diagnose(seq, q, ks)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tables: Vec<Vec<&Vec<Rational>>> = columns
        .iter()
        .map(|c| c.report.rows.iter().map(|r| &r.contraction_norms).collect())
        .collect();
    let identical = tables.windows(2).all(|w| w[0] == w[1]);
    Ok(TransferReport {
        n: seq.arity(),
        ks: ks.to_vec(),
        columns,
        contraction_columns_identical: identical,
    })
}

/// A golden value with the number it was compared against.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GoldenCheck {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

fn golden(name: &str, expected: &Surd<Rational>, actual: &Surd<Rational>) -> GoldenCheck {
    GoldenCheck {
        name: name.to_string(),
        expected: expected.to_string(),
        actual: actual.to_string(),
        pass: expected == actual,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CounterexampleReport {
    pub q: String,
    pub kernel: String,
    pub second_moment: String,
    pub third_moment: String,
    pub fourth_moment: String,
    /// The same moments as polynomials in `q`.
    pub second_moment_poly: String,
    pub third_moment_poly: String,
    pub fourth_moment_poly: String,
    pub checks: Vec<GoldenCheck>,
    pub passed: bool,
}

/// At `q = -1/2` and `f = sqrt(2) 1_{[0,1]^2}`: the second and fourth moments of
/// `I_2(f)` match those of the q^4-Gaussian law, yet the third moment does not
/// vanish.
pub fn negative_q_counterexample() -> Result<CounterexampleReport> {
    let q = ratio(-1, 2);
    let kernel = Kernel::constant(Grid::uniform(1, int(1))?, 2, int(1)).with_scale(int(2))?;
    let f = ChaosElement::new(kernel)?;
    let copies = |r: usize| vec![f.clone(); r];
    let second = joint_moment(&copies(2))?.value;
    let fourth = joint_moment(&copies(4))?.value;
    let third = third_moment(&f)?;
    let third_enumerated = joint_moment(&copies(3))?.value;
    let decomposition = fourth_moment_decomposition(&f)?;

    let second_at = second.eval(&q);
    let third_at = third.eval(&q);
    let fourth_at = fourth.eval(&q);
    let two = BigInt::from(2);
    let mut checks = vec![
        golden("second moment", &Surd::rational(int(1)), &second_at),
        golden("fourth moment", &Surd::rational(ratio(33, 16)), &fourth_at),
        golden(
            "fourth moment equals 2 + q^4",
            &Surd::rational(int(2) + q.clone().pow(4)),
            &fourth_at,
        ),
        golden(
            "third moment",
            &Surd::new(ratio(1, 4), &Rational::from_integer(two.clone())),
            &third_at,
        ),
        golden(
            "third moment by enumeration",
            &third_at,
            &third_enumerated.eval(&q),
        ),
        golden(
            "fourth moment by decomposition",
            &fourth_at,
            &Surd::rational(decomposition.total().eval(&q)),
        ),
    ];
    checks.push(GoldenCheck {
        name: "third moment of the q^4-Gaussian target".into(),
        expected: "0".into(),
        actual: gaussian_target_odd_moment().to_string(),
        pass: gaussian_target_odd_moment().is_zero(),
    });
    let passed = checks.iter().all(|c| c.pass) && !third_at.value().is_zero();
    Ok(CounterexampleReport {
        q: q.to_string(),
        kernel: "sqrt(2) * 1_[0,1]^2".into(),
        second_moment: second_at.to_string(),
        third_moment: third_at.to_string(),
        fourth_moment: fourth_at.to_string(),
        second_moment_poly: second.to_string(),
        third_moment_poly: third.to_string(),
        fourth_moment_poly: fourth.to_string(),
        checks,
        passed,
    })
}

/// Odd moments of a q-Gaussian law vanish: there is no pairing of three points.
fn gaussian_target_odd_moment() -> QPoly {
    QPoly::from_counts(
        &enumerate_pairings(3)
            .expect("3 points")
            .crossing_histogram(),
    )
}

/// Exact finite-k Breuer-Major moment with enumeration statistics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BreuerMajorMoment {
    pub value: Surd<QPoly>,
    pub pairings: u64,
    /// Distinct block multigraphs among the pairings.
    pub multigraphs: usize,
    /// l-tuples visited by the pruned summation.
    pub visited: u64,
}

/// Edge multiplicities of the block multigraph, upper triangle row by row.
type Multigraph = Vec<u32>;

struct Budget {
    used: u64,
    cap: u64,
}

impl Budget {
    fn spend(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.cap {
            return Err(Error::ResourceCap {
                what: "Breuer-Major l-tuples",
                requested: self.used as usize,
                cap: self.cap as usize,
            });
        }
        Ok(())
    }
}

fn upper_index(r: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    a * r - a * (a + 1) / 2 + (b - a - 1)
}

/// `sum over l in [1..upper[v]]^r of prod_{edges} rho(l_a - l_b)^mult`,
/// factorized over connected components; each component is summed by
/// assigning vertices in breadth-first order, restricting every new index to
/// the support window around an already assigned neighbour.
fn multigraph_sum(
    graph: &Multigraph,
    r: usize,
    upper: &[i64],
    rho: &RhoFunction,
    budget: &mut Budget,
) -> Result<Rational> {
    let mult = |a: usize, b: usize| {
        if a == b {
            0
        } else {
            graph[upper_index(r, a, b)]
        }
    };
    let s = rho.support() as i64;
    let mut seen = vec![false; r];
    let mut total = Rational::one();
    for root in 0..r {
        if seen[root] {
            continue;
        }
        let mut order = Vec::new();
        let mut parent = Vec::new();
        let mut queue = VecDeque::from([(root, usize::MAX)]);
        seen[root] = true;
        while let Some((v, p)) = queue.pop_front() {
            order.push(v);
            parent.push(p);
            for (w, flag) in seen.iter_mut().enumerate() {
                if !*flag && mult(v, w) > 0 {
                    *flag = true;
                    queue.push_back((w, v));
                }
            }
        }
        let mut l = vec![0i64; r];
        let component = sum_component(&order, &parent, 0, &mut l, upper, s, rho, &mult, budget)?;
        total *= component;
        if total.is_zero() {
            break;
        }
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn sum_component(
    order: &[usize],
    parent: &[usize],
    depth: usize,
    l: &mut [i64],
    upper: &[i64],
    s: i64,
    rho: &RhoFunction,
    mult: &dyn Fn(usize, usize) -> u32,
    budget: &mut Budget,
) -> Result<Rational> {
    if depth == order.len() {
        return Ok(Rational::one());
    }
    let v = order[depth];
    let (lo, hi) = if depth == 0 {
        (1, upper[v])
    } else {
        let c = l[parent[depth]];
        ((c - s).max(1), (c + s).min(upper[v]))
    };
    let mut acc = Rational::zero();
    for value in lo..=hi {
        budget.spend()?;
        l[v] = value;
        let mut weight = Rational::one();
        for &u in &order[..depth] {
            let m = mult(u, v);
            if m > 0 {
                weight *= rho.get(l[u] - value).pow(m as i32);
                if weight.is_zero() {
                    break;
                }
            }
        }
        if weight.is_zero() {
            continue;
        }
        let rest = sum_component(order, parent, depth + 1, l, upper, s, rho, mult, budget)?;
        acc += weight * rest;
    }
    Ok(acc)
}

/// `phi(I_n(f_k(s_1)) ... I_n(f_k(s_r)))` with
/// `f_k(t) = k^{-1/2} sum_{l=1}^{[kt]} e_l^{⊗n}` and `<e_l, e_m> = rho(l - m)`,
/// computed from `rho` without building the `e_l`.
pub fn breuer_major_moment(
    rho: &RhoFunction,
    n: usize,
    k: usize,
    times: &[Rational],
) -> Result<BreuerMajorMoment> {
    breuer_major_moment_with_budget(rho, n, k, times, DEFAULT_BREUER_BUDGET)
}

pub fn breuer_major_moment_with_budget(
    rho: &RhoFunction,
    n: usize,
    k: usize,
    times: &[Rational],
    budget: u64,
) -> Result<BreuerMajorMoment> {
    if n == 0 || k == 0 {
        return contract("Breuer-Major moments need n >= 1 and k >= 1");
    }
    if times.iter().any(|t| t.is_negative()) {
        return contract("times must be nonnegative");
    }
    let r = times.len();
    let zero = BreuerMajorMoment {
        value: Surd::rational(QPoly::zero()),
        pairings: 0,
        multigraphs: 0,
        visited: 0,
    };
    if r == 0 {
        return Ok(BreuerMajorMoment {
            value: Surd::rational(QPoly::one()),
            ..zero
        });
    }
    if (n * r) % 2 == 1 {
        return Ok(zero);
    }
    let blocks = BlockStructure::new(vec![n; r])?;
    let mut groups: BTreeMap<Multigraph, Vec<u64>> = BTreeMap::new();
    let mut pairings = 0u64;
    for p in enumerate_respecting_capped(&blocks, DEFAULT_PAIRING_CAP)? {
        pairings += 1;
        let mut graph = vec![0u32; r * (r - 1) / 2];
        for &(a, b) in p.pairs() {
            graph[upper_index(r, blocks.block_of(a), blocks.block_of(b))] += 1;
        }
        let hist = groups.entry(graph).or_default();
        if hist.len() <= p.crossings() {
            hist.resize(p.crossings() + 1, 0);
        }
        hist[p.crossings()] += 1;
    }
    let kq = Rational::from_integer(BigInt::from(k));
    let upper: Vec<i64> = times
        .iter()
        .map(|t| {
            let v = (t * &kq).floor().to_integer();
            i64::try_from(v).map_err(|_| Error::ResourceCap {
                what: "Breuer-Major summation range",
                requested: usize::MAX,
                cap: i64::MAX as usize,
            })
        })
        .collect::<Result<_>>()?;
    let mut budget = Budget {
        used: 0,
        cap: budget,
    };
    let mut total = QPoly::zero();
    for (graph, hist) in &groups {
        let weight = multigraph_sum(graph, r, &upper, rho, &mut budget)?;
        if !weight.is_zero() {
            total += QPoly::from_counts(hist).scale(&weight);
        }
    }
    let k_pow = Rational::from_integer(BigInt::from(k).pow(r as u32));
    Ok(BreuerMajorMoment {
        value: Surd::new(total, &k_pow.recip()),
        pairings,
        multigraphs: groups.len(),
        visited: budget.used,
    })
}

/// `sum_{l in Z} rho(l)^n`.
pub fn rho_power_sum(rho: &RhoFunction, n: usize) -> Rational {
    let tail: Rational = rho.values()[1..].iter().map(|v| v.pow(n as i32)).sum();
    Rational::one() + tail * int(2)
}

/// `(sigma^2)^{r/2} sum_{pi in P_2(r)} q^{n^2 Cr(pi)} prod_{pairs} s_a ∧ s_b`
/// with `sigma^2 = [n]_q! sum_l rho(l)^n`.
pub fn breuer_major_limit(rho: &RhoFunction, n: usize, times: &[Rational]) -> Result<QPoly> {
    let power_sum = rho_power_sum(rho, n);
    if power_sum.is_negative() {
        return contract(format!("sum of rho(l)^{n} is negative: {power_sum}"));
    }
    let r = times.len();
    if r % 2 == 1 {
        return Ok(QPoly::zero());
    }
    let sigma_sq = q_factorial(n).scale(&power_sum);
    let mut wick = QPoly::zero();
    for p in enumerate_pairings(r)? {
        let weight = p.pairs().iter().fold(Rational::one(), |acc, &(a, b)| {
            acc * std::cmp::min(&times[a - 1], &times[b - 1])
        });
        wick += QPoly::monomial(weight, n * n * p.crossings());
    }
    Ok(&sigma_sq.pow((r / 2) as u32) * &wick)
}

/// Outcome of the optional positive-definiteness check on `rho`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RhoValidation {
    /// Minimum of `rho(0) + 2 sum_l rho(l) cos(l theta)` over the sampled grid.
    pub min_spectral_density: f64,
    pub theta_at_min: f64,
    pub nonnegative: bool,
}

/// Samples the spectral density of `rho` at `points` angles in `[0, pi]`.
pub fn validate_rho(rho: &RhoFunction, points: usize) -> RhoValidation {
    let values: Vec<f64> = rho.values().iter().map(rational_to_f64).collect();
    let steps = points.max(2) - 1;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=steps {
        let theta = std::f64::consts::PI * i as f64 / steps as f64;
        let s = values[0]
            + 2.0
                * values[1..]
                    .iter()
                    .enumerate()
                    .map(|(l, v)| v * ((l + 1) as f64 * theta).cos())
                    .sum::<f64>();
        if s < best.0 {
            best = (s, theta);
        }
    }
    RhoValidation {
        min_spectral_density: best.0,
        theta_at_min: best.1,
        nonnegative: best.0 >= -1e-12,
    }
}
