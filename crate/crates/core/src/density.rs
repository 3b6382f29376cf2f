//! Floating-point evaluation of the q-Gaussian law and quadrature checks of
//! its moments.
//!
//! For `0 <= q < 1` the law has density
//! `(1/pi) sqrt(1-q) sin(theta) prod_{n>=1} (1-q^n) |1 - q^n e^{2i theta}|^2`
//! at `x = 2 cos(theta) / sqrt(1-q)`, supported on `[-2/sqrt(1-q), 2/sqrt(1-q)]`.
//! In `theta` the moment integrand becomes the smooth `pi`-periodic function
//! `(2/pi) x^k sin^2(theta) prod(...)`, so the trapezoid rule on a uniform grid
//! converges geometrically; halving the grid gives the error estimate.
//! At `q = 1` the law is the standard normal.

use serde::Serialize;

use crate::combinatorics::gaussian_moment_fast;
use crate::error::{contract, Error, Result};

/// Largest moment order [`quadrature_moment`] accepts.
pub const MAX_MOMENT_ORDER: usize = 12;
const MIN_TRUNCATION: usize = 60;
const DEFAULT_NODES: usize = 2048;
const DEFAULT_TOLERANCE: f64 = 1e-10;
/// Half-width of the integration window used for the normal law.
const NORMAL_WINDOW: f64 = 20.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityParams {
    pub q: f64,
    /// Number of factors kept in the infinite product.
    pub truncation: usize,
    /// Quadrature nodes; the error estimate also uses half as many.
    pub nodes: usize,
    /// Largest acceptable quadrature error estimate.
    pub tolerance: f64,
}

impl DensityParams {
    /// Defaults: at least 60 product factors, more if `q^M` is not yet below
    /// `1e-16`.
    pub fn new(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return contract(format!("density needs 0 <= q <= 1, got {q}"));
        }
        let needed = if q > 0.0 && q < 1.0 {
            ((1e-16f64).ln() / q.ln()).ceil() as usize
        } else {
            0
        };
        Ok(DensityParams {
            q,
            truncation: MIN_TRUNCATION.max(needed),
            nodes: DEFAULT_NODES,
            tolerance: DEFAULT_TOLERANCE,
        })
    }

    pub fn with_truncation(mut self, m: usize) -> Result<Self> {
        if m == 0 {
            return contract("product truncation must be at least 1");
        }
        self.truncation = m;
        Ok(self)
    }

    pub fn with_nodes(mut self, nodes: usize) -> Result<Self> {
        if nodes < 8 || nodes % 2 == 1 {
            return contract("quadrature needs an even node count of at least 8");
        }
        self.nodes = nodes;
        Ok(self)
    }

    pub fn is_classical(&self) -> bool {
        self.q == 1.0
    }

    /// Right endpoint of the support (infinite at `q = 1`).
    pub fn support_edge(&self) -> f64 {
        if self.is_classical() {
            f64::INFINITY
        } else {
            2.0 / (1.0 - self.q).sqrt()
        }
    }

    /// Bound on the relative effect of dropping the factors beyond the truncation.
    pub fn truncation_tail(&self) -> f64 {
        if self.q == 0.0 || self.is_classical() {
            0.0
        } else {
            3.0 * self.q.powi(self.truncation as i32 + 1) / (1.0 - self.q)
        }
    }

    /// `prod_{n<=M} (1-q^n)(1 - 2 q^n cos(2 theta) + q^{2n})`.
    fn product(&self, theta: f64) -> f64 {
        let c = (2.0 * theta).cos();
        let mut acc = 1.0;
        let mut qn = 1.0;
        for _ in 0..self.truncation {
            qn *= self.q;
            if qn == 0.0 {
                break;
            }
            acc *= (1.0 - qn) * (1.0 - 2.0 * qn * c + qn * qn);
        }
        acc
    }
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// The density at `x`; zero outside the support.
pub fn density_eval(params: &DensityParams, x: f64) -> f64 {
    if params.is_classical() {
        return normal_pdf(x);
    }
    let edge = params.support_edge();
    if x.abs() > edge {
        return 0.0;
    }
    let theta = (x / edge).clamp(-1.0, 1.0).acos();
    (1.0 - params.q).sqrt() * theta.sin() * params.product(theta) / std::f64::consts::PI
}

/// `points` evenly spaced `(x, density)` samples across the support, or across
/// `[-5, 5]` at `q = 1`.
pub fn density_curve(params: &DensityParams, points: usize) -> Vec<(f64, f64)> {
    let edge = if params.is_classical() {
        5.0
    } else {
        params.support_edge()
    };
    let steps = points.max(2) - 1;
    (0..=steps)
        .map(|i| {
            let x = -edge + 2.0 * edge * i as f64 / steps as f64;
            (x, density_eval(params, x))
        })
        .collect()
}

/// Quadrature of `x^k` against the law.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentCheck {
    pub k: usize,
    pub q: f64,
    pub exact: f64,
    pub quadrature: f64,
    pub abs_error: f64,
    /// `|I_N - I_{N/2}|`.
    pub error_estimate: f64,
    pub truncation_tail: f64,
    pub nodes: usize,
    pub truncation: usize,
    pub classical_case: bool,
}

fn trapezoid_theta(params: &DensityParams, k: usize, nodes: usize) -> f64 {
    let edge = params.support_edge();
    let h = std::f64::consts::PI / nodes as f64;
    let mut sum = 0.0;
    for j in 0..nodes {
        let theta = j as f64 * h;
        let s = theta.sin();
        let x = edge * theta.cos();
        sum += x.powi(k as i32) * s * s * params.product(theta);
    }
    2.0 / std::f64::consts::PI * sum * h
}

fn trapezoid_normal(k: usize, nodes: usize) -> f64 {
    let h = 2.0 * NORMAL_WINDOW / nodes as f64;
    let mut sum = 0.0;
    for j in 0..=nodes {
        let x = -NORMAL_WINDOW + j as f64 * h;
        let w = if j == 0 || j == nodes { 0.5 } else { 1.0 };
        sum += w * x.powi(k as i32) * normal_pdf(x);
    }
    sum * h
}

/// `int x^k nu_q(dx)` by quadrature, compared with the exact moment polynomial.
pub fn quadrature_moment(params: &DensityParams, k: usize) -> Result<MomentCheck> {
    if k > MAX_MOMENT_ORDER {
        return Err(Error::ResourceCap {
            what: "density moment order",
            requested: k,
            cap: MAX_MOMENT_ORDER,
        });
    }
    let rule = |nodes| {
        if params.is_classical() {
            trapezoid_normal(k, nodes)
        } else {
            trapezoid_theta(params, k, nodes)
        }
    };
    let quadrature = rule(params.nodes);
    let coarse = rule(params.nodes / 2);
    let error_estimate = (quadrature - coarse).abs();
    if !quadrature.is_finite() || error_estimate > params.tolerance * quadrature.abs().max(1.0) {
        return Err(Error::InvariantViolation(format!(
            "quadrature of x^{k} at q={} did not converge: estimate {error_estimate:e}",
            params.q
        )));
    }
    let exact = gaussian_moment_fast(k).eval_f64(params.q);
    Ok(MomentCheck {
        k,
        q: params.q,
        exact,
        quadrature,
        abs_error: (quadrature - exact).abs(),
        error_estimate,
        truncation_tail: params.truncation_tail(),
        nodes: params.nodes,
        truncation: params.truncation,
        classical_case: params.is_classical(),
    })
}
