//! q-Hermite polynomials `H_n(x)`, defined by `H_0 = 1`, `H_1 = x` and
//! `x H_n = H_{n+1} + [n]_q H_{n-1}`.
//!
//! The identity `H_n(I_1(e)) = I_n(e^{⊗n})` for a unit vector `e` is an operator
//! statement; what can be checked exactly is its moment shadow, namely that
//! the `H_n` are orthogonal for the q-Gaussian law with `phi(H_n(G)^2) = [n]_q!`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::combinatorics::{gaussian_moment_fast, DEFAULT_PERMUTATION_CAP};
use crate::error::{Error, Result};
use crate::kernels::{q_inner, Grid, Kernel};
use crate::qalgebra::{int, q_factorial, q_integer, QPoly};

/// Largest degree [`q_hermite`] builds by default.
pub const DEFAULT_HERMITE_CAP: usize = 24;

/// A polynomial in `x` whose coefficients are polynomials in `q`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct XPoly {
    coeffs: Vec<QPoly>,
}

impl XPoly {
    pub fn from_coeffs(mut coeffs: Vec<QPoly>) -> Self {
        while coeffs.last().is_some_and(QPoly::is_zero) {
            coeffs.pop();
        }
        XPoly { coeffs }
    }

    pub fn one() -> Self {
        XPoly::from_coeffs(vec![QPoly::one()])
    }

    pub fn x() -> Self {
        XPoly::from_coeffs(vec![QPoly::zero(), QPoly::one()])
    }

    /// Coefficient of `x^j`, constant term first.
    pub fn coeffs(&self) -> &[QPoly] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> QPoly {
        self.coeffs.get(j).cloned().unwrap_or_default()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn scale(&self, c: &QPoly) -> XPoly {
        XPoly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    fn shift(&self) -> XPoly {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(QPoly::zero());
        coeffs.extend(self.coeffs.iter().cloned());
        XPoly::from_coeffs(coeffs)
    }

    /// `phi(P(G))` for `G` standard q-Gaussian: replaces `x^j` by the `j`-th moment.
    pub fn gaussian_expectation(&self) -> QPoly {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| c * &gaussian_moment_fast(j))
            .sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("xpoly serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: XPoly = serde_json::from_str(s)?;
        Ok(XPoly::from_coeffs(p.coeffs))
    }
}

impl Add<&XPoly> for &XPoly {
    type Output = XPoly;

    fn add(self, rhs: &XPoly) -> XPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        XPoly::from_coeffs((0..len).map(|j| &self.coeff(j) + &rhs.coeff(j)).collect())
    }
}

impl Sub<&XPoly> for &XPoly {
    type Output = XPoly;

    fn sub(self, rhs: &XPoly) -> XPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        XPoly::from_coeffs((0..len).map(|j| &self.coeff(j) - &rhs.coeff(j)).collect())
    }
}

impl Mul<&XPoly> for &XPoly {
    type Output = XPoly;

    fn mul(self, rhs: &XPoly) -> XPoly {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return XPoly::default();
        }
        let mut out = vec![QPoly::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += &(a * b);
            }
        }
        XPoly::from_coeffs(out)
    }
}

impl fmt::Display for XPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| match j {
                0 => format!("({c})"),
                1 => format!("({c})*x"),
                _ => format!("({c})*x^{j}"),
            })
            .collect();
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join(" + "))
        }
    }
}

/// `H_0, ..., H_n`.
pub fn q_hermite_table(n: usize) -> Result<Vec<XPoly>> {
    if n > DEFAULT_HERMITE_CAP {
        return Err(Error::ResourceCap {
            what: "q-Hermite degree",
            requested: n,
            cap: DEFAULT_HERMITE_CAP,
        });
    }
    let mut table = vec![XPoly::one(), XPoly::x()];
    for k in 1..n {
        let next = &table[k].shift() - &table[k - 1].scale(&q_integer(k)?);
        table.push(next);
    }
    table.truncate(n + 1);
    Ok(table)
}

pub fn q_hermite(n: usize) -> Result<XPoly> {
    Ok(q_hermite_table(n)?.swap_remove(n))
}

/// `phi(H_n(G) H_m(G))` by expanding the product in powers of `x`, checked
/// against `delta_{n,m} <e^{⊗n}, e^{⊗n}>_q` for a unit step function `e`.
pub fn hermite_moment_check(n: usize, m: usize) -> Result<QPoly> {
    let table = q_hermite_table(n.max(m))?;
    let expanded = (&table[n] * &table[m]).gaussian_expectation();
    let expected = if n != m {
        QPoly::zero()
    } else if n <= DEFAULT_PERMUTATION_CAP {
        let unit = Grid::uniform(1, int(1))?;
        let e = Kernel::constant(unit, n, int(1));
        q_inner(&e, &e)?.value().clone()
    } else {
        q_factorial(n)
    };
    if expanded != expected {
        return Err(Error::InvariantViolation(format!(
            "phi(H_{n} H_{m}) = {expanded}, isometry gives {expected}"
        )));
    }
    Ok(expanded)
}
