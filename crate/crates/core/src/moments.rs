//! Moments of multiple q-Wiener integrals.
//!
//! The joint moment of `I_{n_1}(f_1), ..., I_{n_r}(f_r)` is the sum over
//! pairings respecting the blocks `n_1 (x) ... (x) n_r` of `q^Cr(pi)` times the
//! pairing integral. Everything else here (isometry, product formula,
//! fourth-moment decomposition) is an independent route to quantities that
//! this sum also produces, which is how the conventions are cross-checked.

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::combinatorics::{
    cross_color_crossings, enumerate_colored, enumerate_respecting_capped, BlockStructure,
    DEFAULT_PAIRING_CAP,
};
use crate::error::{contract, Error, Result};
use crate::kernels::{
    adjoint, contract as contraction, is_symmetric, l2_inner, q_contract, q_inner, q_inner_poly,
    Kernel, PairingIntegrator, QKernel,
};
use crate::qalgebra::{QPoly, Rational, Surd};

/// The multiple integral `I_n(f)`, represented by its kernel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChaosElement {
    kernel: Kernel,
}

impl ChaosElement {
    pub fn new(kernel: Kernel) -> Result<Self> {
        if kernel.arity() == 0 {
            return contract("a chaos element needs a kernel of arity at least 1");
        }
        Ok(ChaosElement { kernel })
    }

    pub fn order(&self) -> usize {
        self.kernel.arity()
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }
}

/// A joint moment together with enumeration statistics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentResult {
    pub value: Surd<QPoly>,
    /// Number of respecting pairings enumerated.
    pub pairing_count: u64,
    /// Pairings whose integral was nonzero.
    pub terms_evaluated: u64,
}

#[derive(Default)]
struct Tally {
    hist: Vec<Rational>,
    pairings: u64,
    nonzero: u64,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        if self.hist.len() < other.hist.len() {
            self.hist.resize(other.hist.len(), Rational::zero());
        }
        for (a, b) in self.hist.iter_mut().zip(other.hist) {
            *a += b;
        }
        self.pairings += other.pairings;
        self.nonzero += other.nonzero;
        self
    }
}

/// `phi(I_{n_1}(f_1) ... I_{n_r}(f_r))`.
pub fn joint_moment(elems: &[ChaosElement]) -> Result<MomentResult> {
    joint_moment_capped(elems, DEFAULT_PAIRING_CAP)
}

pub fn joint_moment_capped(elems: &[ChaosElement], cap: usize) -> Result<MomentResult> {
    if elems.is_empty() {
        return Ok(MomentResult {
            value: Surd::rational(QPoly::one()),
            pairing_count: 1,
            terms_evaluated: 1,
        });
    }
    let kernels: Vec<&Kernel> = elems.iter().map(|e| &e.kernel).collect();
    let integrator = PairingIntegrator::new(&kernels)?;
    let blocks = BlockStructure::new(elems.iter().map(ChaosElement::order).collect())?;
    let pairings = enumerate_respecting_capped(&blocks, cap)?;
    let tally = pairings
        .par_bridge()
        .try_fold(Tally::default, |mut acc, p| -> Result<Tally> {
            acc.pairings += 1;
            let v = integrator.integrate(&p)?;
            if !v.is_zero() {
                acc.nonzero += 1;
                let c = p.crossings();
                if acc.hist.len() <= c {
                    acc.hist.resize(c + 1, Rational::zero());
                }
                acc.hist[c] += v;
            }
            Ok(acc)
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
    Ok(MomentResult {
        value: Surd::new(QPoly::from_coeffs(tally.hist), integrator.scale()),
        pairing_count: tally.pairings,
        terms_evaluated: tally.nonzero,
    })
}

/// `phi(I_m(f)* I_n(g)) = delta_{m,n} <f, g>_q`.
pub fn isometry(f: &ChaosElement, g: &ChaosElement) -> Result<Surd<QPoly>> {
    if f.kernel.grid() != g.kernel.grid() {
        return contract("kernels live on different grids");
    }
    if f.order() != g.order() {
        return Ok(Surd::rational(QPoly::zero()));
    }
    q_inner(&f.kernel, &g.kernel)
}

/// `I_n(f) I_m(g) = sum_{p=0}^{min(n,m)} I_{n+m-2p}(f ⌢_p^q g)`, as
/// `(order, kernel)` terms in increasing `p`.
pub fn product_expand(f: &ChaosElement, g: &ChaosElement) -> Result<Vec<(usize, QKernel)>> {
    let (n, m) = (f.order(), g.order());
    (0..=n.min(m))
        .map(|p| Ok((n + m - 2 * p, q_contract(&f.kernel, &g.kernel, p)?)))
        .collect()
}

/// `phi(I(F) I(h))` for a polynomial-valued kernel `F`; an order-0 `F` is a
/// scalar and contributes nothing against a chaos element.
pub fn pair_moment(big_f: &QKernel, h: &ChaosElement) -> Result<Surd<QPoly>> {
    if big_f.arity() != h.order() {
        return Ok(Surd::rational(QPoly::zero()));
    }
    q_inner_poly(&big_f.adjoint(), &QKernel::from_kernel(&h.kernel))
}

/// One summand `p` of the fourth-moment decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourthMomentTerm {
    pub p: usize,
    /// `||f ⌢_p^q f||_q^2`.
    pub q_contraction_norm: QPoly,
    /// `sum over S^p_{2n} of q^inv`.
    pub weight: QPoly,
    /// `||f ⌢_p f||^2` in `L^2`.
    pub contraction_norm: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourthMomentDecomposition {
    pub n: usize,
    /// `||f||_q^2`.
    pub norm_q: QPoly,
    /// `(2 + q^{n^2}) ||f||_q^4`.
    pub leading: QPoly,
    pub terms: Vec<FourthMomentTerm>,
}

impl FourthMomentDecomposition {
    /// Sum of the correction terms.
    pub fn correction(&self) -> QPoly {
        self.terms
            .iter()
            .map(|t| &t.q_contraction_norm + &t.weight.scale(&t.contraction_norm))
            .sum()
    }

    pub fn total(&self) -> QPoly {
        &self.leading + &self.correction()
    }
}

fn expect_rational(s: Surd<QPoly>, what: &str) -> Result<QPoly> {
    if !s.is_rational() {
        return Err(Error::InvariantViolation(format!(
            "{what} should be rational, got {s}"
        )));
    }
    Ok(s.into_parts().0)
}

/// `phi(I_n(f)^4) = (2+q^{n^2}) ||f||_q^4 + sum_{p=1}^{n-1} { ||f ⌢_p^q f||_q^2
/// + (sum over S^p_{2n} of q^inv) ||f ⌢_p f||^2 }` for symmetric `f`.
pub fn fourth_moment_decomposition(f: &ChaosElement) -> Result<FourthMomentDecomposition> {
    let k = &f.kernel;
    if !is_symmetric(k) {
        return contract("the fourth-moment decomposition needs a symmetric kernel");
    }
    let n = f.order();
    let norm_q = q_inner(k, k)?;
    let norm_q = norm_q
        .value()
        .scale(&Rational::from_integer(norm_q.radicand().clone()));
    let target =
        QPoly::constant(Rational::from_integer(2.into())) + QPoly::monomial(Rational::one(), n * n);
    let leading = &target * &(&norm_q * &norm_q);
    let mut terms = Vec::new();
    for p in 1..n {
        let qc = q_contract(k, k, p)?;
        let q_contraction_norm = expect_rational(q_inner_poly(&qc, &qc)?, "contraction norm")?;
        let c = contraction(k, k, p)?;
        let cn = l2_inner(&c, &c)?;
        if !cn.is_rational() {
            return Err(Error::InvariantViolation(format!(
                "contraction norm should be rational, got {cn}"
            )));
        }
        terms.push(FourthMomentTerm {
            p,
            q_contraction_norm,
            weight: crate::combinatorics::inversion_sum_spn(n, p),
            contraction_norm: cn.into_parts().0,
        });
    }
    Ok(FourthMomentDecomposition {
        n,
        norm_q,
        leading,
        terms,
    })
}

/// `phi(I_n(f)^3)`; for `n = 2` this is `<f*, f ⌢_1^q f>_q`, otherwise the
/// pairing sum over three copies.
pub fn third_moment(f: &ChaosElement) -> Result<Surd<QPoly>> {
    if f.order() == 2 {
        let k = &f.kernel;
        let qc = q_contract(k, k, 1)?;
        return q_inner_poly(&QKernel::from_kernel(&adjoint(k)), &qc);
    }
    if f.order() % 2 == 1 {
        return Ok(Surd::rational(QPoly::zero()));
    }
    Ok(joint_moment(&[f.clone(), f.clone(), f.clone()])?.value)
}

/// The limit of joint moments under the fourth-moment conditions:
/// `sum over coloured pairings of prod_{i<=j} q^{Cr(pi_i,pi_j) N_i N_j}
/// prod_{pairs {l,m}} c(l,m)`, with `sizes[l]` the order of element `l` and
/// `c` its covariance matrix by position.
pub fn limit_formula(sizes: &[usize], c: &[Vec<Rational>]) -> Result<QPoly> {
    let r = sizes.len();
    if c.len() != r || c.iter().any(|row| row.len() != r) {
        return contract(format!("covariance must be {r}x{r}"));
    }
    if (0..r).any(|i| (0..i).any(|j| c[i][j] != c[j][i])) {
        return contract("covariance must be symmetric");
    }
    let mut total = QPoly::zero();
    for cp in enumerate_colored(sizes)? {
        let mut exponent = 0;
        for (a, ca) in cp.classes.iter().enumerate() {
            for cb in &cp.classes[a..] {
                exponent +=
                    cross_color_crossings(&cp.pairing, &ca.pairs, &cb.pairs)? * ca.color * cb.color;
            }
        }
        let weight = cp
            .pairing
            .pairs()
            .iter()
            .fold(Rational::one(), |acc, &(l, m)| acc * &c[l - 1][m - 1]);
        total += QPoly::monomial(weight, exponent);
    }
    Ok(total)
}
