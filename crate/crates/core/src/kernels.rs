//! Step-function kernels on a shared rational grid.
//!
//! A kernel of arity `n` on a grid of `m` cells is a dense row-major tensor of
//! shape `(m, ..., m)`: the coefficient at `(i_1, ..., i_n)` is the value of the
//! function on the product of cells `i_1 x ... x i_n`. Every integral is a sum
//! over cells weighted by cell widths.
//!
//! A kernel may carry a scale tag `c > 0`, meaning the true kernel is
//! `sqrt(c)` times the stored one. Scalar results of multilinear operations
//! come back as a [`Surd`] over the product of the scale tags.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{
    decreasing_injections, injections, permutations, BlockStructure, Pairing,
};
use crate::error::{contract as violation, Error, Result};
use crate::qalgebra::{parse_rational, QPoly, Rational, Surd};

/// Consecutive cells partitioning `[0, T]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Grid {
    widths: Vec<Rational>,
}

impl Grid {
    pub fn new(widths: Vec<Rational>) -> Result<Self> {
        if widths.is_empty() {
            return violation("a grid needs at least one cell");
        }
        if widths.iter().any(|w| !w.is_positive()) {
            return violation("grid widths must be positive");
        }
        Ok(Grid { widths })
    }

    /// `m` cells of equal width.
    pub fn uniform(m: usize, width: Rational) -> Result<Self> {
        Grid::new(vec![width; m])
    }

    /// Cells `[0, b_1], [b_1, b_2], ...` for increasing positive breakpoints.
    pub fn from_breakpoints(points: &[Rational]) -> Result<Self> {
        let mut prev = Rational::zero();
        let mut widths = Vec::with_capacity(points.len());
        for b in points {
            widths.push(b - &prev);
            prev = b.clone();
        }
        Grid::new(widths)
    }

    pub fn len(&self) -> usize {
        self.widths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.widths.is_empty()
    }

    pub fn widths(&self) -> &[Rational] {
        &self.widths
    }

    /// Right endpoints of the cells.
    pub fn breakpoints(&self) -> Vec<Rational> {
        let mut acc = Rational::zero();
        self.widths
            .iter()
            .map(|w| {
                acc += w;
                acc.clone()
            })
            .collect()
    }

    /// Number of cells lying in `[0, t]`, provided `t` is `0` or a breakpoint.
    pub fn cells_up_to(&self, t: &Rational) -> Option<usize> {
        if t.is_zero() {
            return Some(0);
        }
        self.breakpoints()
            .iter()
            .position(|b| b == t)
            .map(|i| i + 1)
    }

    /// Product of cell widths for every multi-index of the given arity.
    fn weight_tensor(&self, arity: usize) -> Vec<Rational> {
        let mut out = vec![Rational::one()];
        for _ in 0..arity {
            out = out
                .iter()
                .flat_map(|a| self.widths.iter().map(move |w| a * w))
                .collect();
        }
        out
    }
}

/// A step kernel `sqrt(scale) * coeffs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Kernel {
    grid: Grid,
    arity: usize,
    coeffs: Vec<Rational>,
    scale: Rational,
}

fn power(m: usize, n: usize) -> usize {
    m.pow(n as u32)
}

/// Big-endian digits of `idx` in base `m`.
fn digits(mut idx: usize, m: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = idx % m;
        idx /= m;
    }
    out
}

/// Splits `sqrt(c)` into a rational factor and a reduced radicand.
fn split_scale(c: &Rational) -> (Rational, Rational) {
    let (factor, radicand) = Surd::new(Rational::one(), c).into_parts();
    (factor, Rational::from_integer(radicand))
}

impl Kernel {
    pub fn new(grid: Grid, arity: usize, coeffs: Vec<Rational>) -> Result<Self> {
        let expected = power(grid.len(), arity);
        if coeffs.len() != expected {
            return violation(format!(
                "arity {arity} on {} cells needs {expected} coefficients, got {}",
                grid.len(),
                coeffs.len()
            ));
        }
        Ok(Kernel {
            grid,
            arity,
            coeffs,
            scale: Rational::one(),
        })
    }

    pub fn zeros(grid: Grid, arity: usize) -> Self {
        let len = power(grid.len(), arity);
        Kernel {
            grid,
            arity,
            coeffs: vec![Rational::zero(); len],
            scale: Rational::one(),
        }
    }

    pub fn constant(grid: Grid, arity: usize, value: Rational) -> Self {
        let len = power(grid.len(), arity);
        Kernel {
            grid,
            arity,
            coeffs: vec![value; len],
            scale: Rational::one(),
        }
    }

    /// Builds the kernel whose coefficient at each multi-index is `f(index)`.
    pub fn from_fn(grid: Grid, arity: usize, mut f: impl FnMut(&[usize]) -> Rational) -> Self {
        let m = grid.len();
        let coeffs = (0..power(m, arity))
            .map(|i| f(&digits(i, m, arity)))
            .collect();
        Kernel {
            grid,
            arity,
            coeffs,
            scale: Rational::one(),
        }
    }

    /// `value` on the product of the first `cells[a]` cells along each axis `a`,
    /// i.e. the indicator of `[0, t_1] x ... x [0, t_n]` when those are breakpoints.
    pub fn indicator(grid: Grid, cells: &[usize], value: Rational) -> Self {
        let arity = cells.len();
        Kernel::from_fn(grid, arity, |idx| {
            if idx.iter().zip(cells).all(|(i, c)| i < c) {
                value.clone()
            } else {
                Rational::zero()
            }
        })
    }

    /// Attaches a scale tag: the represented kernel becomes `sqrt(c)` times the
    /// stored coefficients. Perfect-square factors are folded into them.
    pub fn with_scale(mut self, c: Rational) -> Result<Self> {
        if !c.is_positive() {
            return violation("kernel scale must be positive");
        }
        self.scale = c;
        Ok(self.normalized())
    }

    fn normalized(mut self) -> Self {
        if self.scale.is_one() {
            return self;
        }
        let (factor, radicand) = split_scale(&self.scale);
        if !factor.is_one() {
            for c in &mut self.coeffs {
                *c *= &factor;
            }
        }
        self.scale = radicand;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn scale(&self) -> &Rational {
        &self.scale
    }

    pub fn get(&self, idx: &[usize]) -> &Rational {
        let m = self.grid.len();
        let flat = idx.iter().fold(0, |acc, &i| acc * m + i);
        &self.coeffs[flat]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Same grid and scale, stored coefficients multiplied by `c`.
    pub fn scaled(&self, c: &Rational) -> Kernel {
        Kernel {
            grid: self.grid.clone(),
            arity: self.arity,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            scale: self.scale.clone(),
        }
    }

    /// Sum of two kernels with equal grid, arity and scale.
    pub fn add(&self, other: &Kernel) -> Result<Kernel> {
        same_shape(self, other)?;
        if self.scale != other.scale {
            return violation("cannot add kernels with different scales");
        }
        Ok(Kernel {
            grid: self.grid.clone(),
            arity: self.arity,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
            scale: self.scale.clone(),
        })
    }

    /// Reorders axes: output axis `a` reads input axis `src[a]`.
    pub fn rearrange(&self, src: &[usize]) -> Result<Kernel> {
        let n = self.arity;
        let mut seen = vec![false; n];
        if src.len() != n
            || src
                .iter()
                .any(|&s| s >= n || std::mem::replace(&mut seen[s], true))
        {
            return violation(format!("{src:?} is not an axis permutation of arity {n}"));
        }
        Ok(Kernel {
            grid: self.grid.clone(),
            arity: n,
            coeffs: rearrange_coeffs(&self.coeffs, self.grid.len(), src),
            scale: self.scale.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&KernelFile::from(self)).expect("kernel serializes")
    }

    pub fn from_json(s: &str) -> Result<Kernel> {
        let file: KernelFile = serde_json::from_str(s)?;
        file.try_into()
    }
}

fn rearrange_coeffs(coeffs: &[Rational], m: usize, src: &[usize]) -> Vec<Rational> {
    let n = src.len();
    let in_stride: Vec<usize> = (0..n).map(|k| power(m, n - 1 - k)).collect();
    let stride: Vec<usize> = src.iter().map(|&s| in_stride[s]).collect();
    let mut out = Vec::with_capacity(coeffs.len());
    let mut idx = vec![0usize; n];
    let mut input = 0usize;
    for _ in 0..coeffs.len() {
        out.push(coeffs[input].clone());
        for a in (0..n).rev() {
            idx[a] += 1;
            input += stride[a];
            if idx[a] < m {
                break;
            }
            input -= m * stride[a];
            idx[a] = 0;
        }
    }
    out
}

fn same_grid(f: &Kernel, g: &Kernel) -> Result<()> {
    if f.grid != g.grid {
        return violation("kernels live on different grids");
    }
    Ok(())
}

fn same_shape(f: &Kernel, g: &Kernel) -> Result<()> {
    same_grid(f, g)?;
    if f.arity != g.arity {
        return violation(format!("arity mismatch: {} vs {}", f.arity, g.arity));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct KernelFile {
    arity: usize,
    widths: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<String>,
    coeffs: Vec<String>,
}

impl From<&Kernel> for KernelFile {
    fn from(k: &Kernel) -> Self {
        KernelFile {
            arity: k.arity,
            widths: k.grid.widths.iter().map(ToString::to_string).collect(),
            scale: (!k.scale.is_one()).then(|| k.scale.to_string()),
            coeffs: k.coeffs.iter().map(ToString::to_string).collect(),
        }
    }
}

impl TryFrom<KernelFile> for Kernel {
    type Error = Error;

    fn try_from(file: KernelFile) -> Result<Kernel> {
        let widths = file
            .widths
            .iter()
            .map(|w| parse_rational(w))
            .collect::<Result<Vec<_>>>()?;
        let coeffs = file
            .coeffs
            .iter()
            .map(|c| parse_rational(c))
            .collect::<Result<Vec<_>>>()?;
        let kernel = Kernel::new(Grid::new(widths)?, file.arity, coeffs)?;
        match file.scale {
            Some(s) => kernel.with_scale(parse_rational(&s)?),
            None => Ok(kernel),
        }
    }
}

/// `f (x) g`, of arity `n + m`.
pub fn tensor_product(f: &Kernel, g: &Kernel) -> Result<Kernel> {
    same_grid(f, g)?;
    let coeffs = f
        .coeffs
        .iter()
        .flat_map(|a| g.coeffs.iter().map(move |b| a * b))
        .collect();
    Ok(Kernel {
        grid: f.grid.clone(),
        arity: f.arity + g.arity,
        coeffs,
        scale: &f.scale * &g.scale,
    }
    .normalized())
}

/// `f*(t_1, ..., t_n) = f(t_n, ..., t_1)`.
pub fn adjoint(f: &Kernel) -> Kernel {
    let src: Vec<usize> = (0..f.arity).rev().collect();
    f.rearrange(&src).expect("reversal is a permutation")
}

/// Average of `f` over all permutations of its axes.
pub fn symmetrize(f: &Kernel) -> Kernel {
    let n = f.arity;
    let m = f.grid.len();
    let mut acc = vec![Rational::zero(); f.coeffs.len()];
    let mut count = 0i64;
    for s in permutations(n) {
        let src: Vec<usize> = s.images().iter().map(|v| v - 1).collect();
        for (a, b) in acc.iter_mut().zip(rearrange_coeffs(&f.coeffs, m, &src)) {
            *a += b;
        }
        count += 1;
    }
    let inv = Rational::new(BigInt::one(), BigInt::from(count));
    Kernel {
        grid: f.grid.clone(),
        arity: n,
        coeffs: acc.into_iter().map(|x| x * &inv).collect(),
        scale: f.scale.clone(),
    }
}

/// Invariance under every axis permutation, checked on adjacent transpositions.
pub fn is_symmetric(f: &Kernel) -> bool {
    let m = f.grid.len();
    (0..f.arity.saturating_sub(1)).all(|a| {
        let mut src: Vec<usize> = (0..f.arity).collect();
        src.swap(a, a + 1);
        rearrange_coeffs(&f.coeffs, m, &src) == f.coeffs
    })
}

/// `f ⌢_p g`: the last `p` variables of `f`, read in reverse order, are
/// integrated against the first `p` variables of `g`.
pub fn contract(f: &Kernel, g: &Kernel, p: usize) -> Result<Kernel> {
    same_grid(f, g)?;
    if p == 0 || p > f.arity.min(g.arity) {
        return contract_range(p, f.arity, g.arity);
    }
    let coeffs = contract_coeffs(&f.coeffs, f.arity, &g.coeffs, g.arity, p, &f.grid);
    Ok(Kernel {
        grid: f.grid.clone(),
        arity: f.arity + g.arity - 2 * p,
        coeffs,
        scale: &f.scale * &g.scale,
    }
    .normalized())
}

fn contract_range<T>(p: usize, n: usize, m: usize) -> Result<T> {
    violation(format!(
        "contraction order {p} must lie in 1..={}",
        n.min(m)
    ))
}

fn contract_coeffs(
    f: &[Rational],
    n: usize,
    g: &[Rational],
    k: usize,
    p: usize,
    grid: &Grid,
) -> Vec<Rational> {
    let m = grid.len();
    let rows = power(m, n - p);
    let inner = power(m, p);
    let cols = power(m, k - p);
    let weights = grid.weight_tensor(p);
    // f's trailing axes hold s_p, ..., s_1: map (s_1..s_p) to that position.
    let reversed: Vec<usize> = (0..inner)
        .map(|s| digits(s, m, p).iter().rev().fold(0, |acc, &d| acc * m + d))
        .collect();
    let mut out = vec![Rational::zero(); rows * cols];
    for t in 0..rows {
        let row = &mut out[t * cols..(t + 1) * cols];
        for s in 0..inner {
            let fv = &f[t * inner + reversed[s]];
            if fv.is_zero() {
                continue;
            }
            let fw = fv * &weights[s];
            let grow = &g[s * cols..(s + 1) * cols];
            for (o, gv) in row.iter_mut().zip(grow) {
                if !gv.is_zero() {
                    *o += &fw * gv;
                }
            }
        }
    }
    out
}

/// A kernel whose coefficients are polynomials in `q`, stored as one
/// coefficient tensor per power of `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QKernel {
    grid: Grid,
    arity: usize,
    layers: Vec<Vec<Rational>>,
    scale: Rational,
}

impl QKernel {
    pub fn zero(grid: Grid, arity: usize, scale: Rational) -> Self {
        QKernel {
            grid,
            arity,
            layers: Vec::new(),
            scale,
        }
    }

    pub fn from_kernel(k: &Kernel) -> Self {
        let mut out = QKernel::zero(k.grid.clone(), k.arity, k.scale.clone());
        out.add_layer(0, &k.coeffs);
        out
    }

    fn add_layer(&mut self, degree: usize, coeffs: &[Rational]) {
        let len = power(self.grid.len(), self.arity);
        while self.layers.len() <= degree {
            self.layers.push(vec![Rational::zero(); len]);
        }
        for (a, b) in self.layers[degree].iter_mut().zip(coeffs) {
            *a += b;
        }
        self.trim();
    }

    fn trim(&mut self) {
        while self
            .layers
            .last()
            .is_some_and(|l| l.iter().all(Zero::is_zero))
        {
            self.layers.pop();
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn scale(&self) -> &Rational {
        &self.scale
    }

    pub fn is_zero(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.layers.len().checked_sub(1)
    }

    /// Coefficient kernel of `q^d`.
    pub fn layer(&self, d: usize) -> Kernel {
        match self.layers.get(d) {
            Some(c) => Kernel {
                grid: self.grid.clone(),
                arity: self.arity,
                coeffs: c.clone(),
                scale: self.scale.clone(),
            },
            None => {
                let mut k = Kernel::zeros(self.grid.clone(), self.arity);
                k.scale = self.scale.clone();
                k
            }
        }
    }

    /// Specializes `q` to a rational value.
    pub fn eval(&self, q: &Rational) -> Kernel {
        let mut coeffs = vec![Rational::zero(); power(self.grid.len(), self.arity)];
        let mut qp = Rational::one();
        for layer in &self.layers {
            for (a, b) in coeffs.iter_mut().zip(layer) {
                *a += &qp * b;
            }
            qp *= q;
        }
        Kernel {
            grid: self.grid.clone(),
            arity: self.arity,
            coeffs,
            scale: self.scale.clone(),
        }
    }

    /// Multiplies every entry by the polynomial `p`.
    pub fn times(&self, p: &QPoly) -> QKernel {
        let mut out = QKernel::zero(self.grid.clone(), self.arity, self.scale.clone());
        for (i, c) in p.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (j, layer) in self.layers.iter().enumerate() {
                let scaled: Vec<Rational> = layer.iter().map(|x| x * c).collect();
                out.add_layer(i + j, &scaled);
            }
        }
        out
    }

    /// Polynomial value of the entry at a multi-index.
    pub fn entry(&self, idx: &[usize]) -> QPoly {
        let m = self.grid.len();
        let flat = idx.iter().fold(0, |acc, &i| acc * m + i);
        QPoly::from_coeffs(self.layers.iter().map(|l| l[flat].clone()).collect())
    }

    /// Entrywise adjoint.
    pub fn adjoint(&self) -> QKernel {
        let src: Vec<usize> = (0..self.arity).rev().collect();
        QKernel {
            grid: self.grid.clone(),
            arity: self.arity,
            layers: self
                .layers
                .iter()
                .map(|l| rearrange_coeffs(l, self.grid.len(), &src))
                .collect(),
            scale: self.scale.clone(),
        }
    }
}

/// `f^(p)_q`: the sum over decreasing `sigma: {1..p} -> {1..n}` of
/// `q^alpha(sigma)` times `f` with `s_i` placed at `sigma(i)`; output axes are
/// `(t_1, ..., t_{n-p}, s_p, ..., s_1)`.
pub fn q_deform_left(f: &Kernel, p: usize) -> Result<QKernel> {
    let n = f.arity;
    if p == 0 || p > n {
        return violation(format!("deformation order {p} must lie in 1..={n}"));
    }
    let mut out = QKernel::zero(f.grid.clone(), n, f.scale.clone());
    for sigma in decreasing_injections(p, n) {
        let places = sigma.images();
        let mut src = vec![0; n];
        for (i, &place) in places.iter().enumerate() {
            src[n - 1 - i] = place - 1;
        }
        let rest = (1..=n).filter(|x| !places.contains(x));
        for (a, place) in rest.enumerate() {
            src[a] = place - 1;
        }
        out.add_layer(
            sigma.alpha(),
            &rearrange_coeffs(&f.coeffs, f.grid.len(), &src),
        );
    }
    Ok(out)
}

/// `f^[p]_q`: the sum over injective `sigma: {1..p} -> {1..n}` of
/// `q^beta(sigma)` times `f` with `s_i` placed at `sigma(i)`; output axes are
/// `(s_1, ..., s_p, t_1, ..., t_{n-p})`.
pub fn q_deform_right(f: &Kernel, p: usize) -> Result<QKernel> {
    let n = f.arity;
    if p == 0 || p > n {
        return violation(format!("deformation order {p} must lie in 1..={n}"));
    }
    let mut out = QKernel::zero(f.grid.clone(), n, f.scale.clone());
    for sigma in injections(p, n) {
        let places = sigma.images();
        let mut src = vec![0; n];
        for (i, &place) in places.iter().enumerate() {
            src[i] = place - 1;
        }
        let rest = (1..=n).filter(|x| !places.contains(x));
        for (a, place) in rest.enumerate() {
            src[p + a] = place - 1;
        }
        out.add_layer(
            sigma.beta(),
            &rearrange_coeffs(&f.coeffs, f.grid.len(), &src),
        );
    }
    Ok(out)
}

/// `f ⌢_p^q g = f^(p)_q ⌢_p g^[p]_q`; `p = 0` gives the tensor product.
pub fn q_contract(f: &Kernel, g: &Kernel, p: usize) -> Result<QKernel> {
    same_grid(f, g)?;
    if p == 0 {
        return Ok(QKernel::from_kernel(&tensor_product(f, g)?));
    }
    if p > f.arity.min(g.arity) {
        return contract_range(p, f.arity, g.arity);
    }
    let left = q_deform_left(f, p)?;
    let right = q_deform_right(g, p)?;
    let arity = f.arity + g.arity - 2 * p;
    let (factor, radicand) = split_scale(&(&f.scale * &g.scale));
    let mut out = QKernel::zero(f.grid.clone(), arity, radicand);
    for (i, l) in left.layers.iter().enumerate() {
        for (j, r) in right.layers.iter().enumerate() {
            let mut c = contract_coeffs(l, f.arity, r, g.arity, p, &f.grid);
            if !factor.is_one() {
                for x in &mut c {
                    *x *= &factor;
                }
            }
            out.add_layer(i + j, &c);
        }
    }
    Ok(out)
}

fn dot_weighted(a: &[Rational], b: &[Rational], w: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for ((x, y), z) in a.iter().zip(b).zip(w) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y * z;
        }
    }
    acc
}

/// `<f, g>` in `L^2`, as `value * sqrt(scale_f * scale_g)`.
pub fn l2_inner(f: &Kernel, g: &Kernel) -> Result<Surd<Rational>> {
    same_shape(f, g)?;
    let w = f.grid.weight_tensor(f.arity);
    Ok(Surd::new(
        dot_weighted(&f.coeffs, &g.coeffs, &w),
        &(&f.scale * &g.scale),
    ))
}

/// Inversion-weighted inner products of stored coefficient tensors.
fn q_inner_coeffs(f: &[Rational], g: &[Rational], n: usize, grid: &Grid) -> QPoly {
    let w = grid.weight_tensor(n);
    let mut hist = vec![Rational::zero(); n * n.saturating_sub(1) / 2 + 1];
    for s in permutations(n) {
        let src: Vec<usize> = s.images().iter().map(|v| v - 1).collect();
        let permuted = rearrange_coeffs(f, grid.len(), &src);
        hist[s.inversions()] += dot_weighted(&permuted, g, &w);
    }
    QPoly::from_coeffs(hist)
}

/// `<f, g>_q = sum over S_n of q^inv(sigma) <f o sigma, g>`.
pub fn q_inner(f: &Kernel, g: &Kernel) -> Result<Surd<QPoly>> {
    same_shape(f, g)?;
    Ok(Surd::new(
        q_inner_coeffs(&f.coeffs, &g.coeffs, f.arity, &f.grid),
        &(&f.scale * &g.scale),
    ))
}

/// The q-inner product extended bilinearly to polynomial-valued kernels.
pub fn q_inner_poly(f: &QKernel, g: &QKernel) -> Result<Surd<QPoly>> {
    if f.grid != g.grid || f.arity != g.arity {
        return violation("q-inner product needs equal grids and arities");
    }
    let mut total = QPoly::zero();
    for (i, a) in f.layers.iter().enumerate() {
        for (j, b) in g.layers.iter().enumerate() {
            let term = q_inner_coeffs(a, b, f.arity, &f.grid);
            total += &term * &QPoly::monomial(Rational::one(), i + j);
        }
    }
    Ok(Surd::new(total, &(&f.scale * &g.scale)))
}

/// Exact ring arithmetic used by the pairing-integral network; `None` signals
/// overflow.
trait Ring: Clone {
    fn nil() -> Self;
    fn unit() -> Self;
    fn is_nil(&self) -> bool;
    fn plus(&self, other: &Self) -> Option<Self>;
    fn times(&self, other: &Self) -> Option<Self>;
}

impl Ring for i128 {
    fn nil() -> Self {
        0
    }
    fn unit() -> Self {
        1
    }
    fn is_nil(&self) -> bool {
        *self == 0
    }
    fn plus(&self, other: &Self) -> Option<Self> {
        self.checked_add(*other)
    }
    fn times(&self, other: &Self) -> Option<Self> {
        self.checked_mul(*other)
    }
}

impl Ring for BigInt {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Option<Self> {
        Some(self + other)
    }
    fn times(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }
}

/// Integer numerators of a rational list over their common denominator.
fn to_common_denominator(values: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let den = values
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let nums = values
        .iter()
        .map(|v| v.numer() * (&den / v.denom()))
        .collect();
    (nums, den)
}

/// Evaluates pairing integrals of a fixed list of kernels for many pairings.
///
/// Coefficients are rescaled to integers once; each integral then runs as a
/// block-by-block tensor-network contraction in `i128`, falling back to
/// arbitrary precision on overflow.
#[derive(Clone, Debug)]
pub struct PairingIntegrator {
    blocks: BlockStructure,
    m: usize,
    big_tensors: Vec<Vec<BigInt>>,
    big_widths: Vec<BigInt>,
    small: Option<(Vec<Vec<i128>>, Vec<i128>)>,
    denominator_per_pair: BigInt,
    denominator_fixed: BigInt,
    scale: Rational,
}

impl PairingIntegrator {
    pub fn new(fs: &[&Kernel]) -> Result<Self> {
        let Some(first) = fs.first() else {
            return violation("pairing integral needs at least one kernel");
        };
        for f in fs {
            same_grid(first, f)?;
        }
        let blocks = BlockStructure::new(fs.iter().map(|f| f.arity).collect())?;
        let mut big_tensors = Vec::with_capacity(fs.len());
        let mut denominator_fixed = BigInt::one();
        for f in fs {
            let (nums, den) = to_common_denominator(&f.coeffs);
            denominator_fixed *= den;
            big_tensors.push(nums);
        }
        let (big_widths, denominator_per_pair) = to_common_denominator(&first.grid.widths);
        let small_tensors: Option<Vec<Vec<i128>>> = big_tensors
            .iter()
            .map(|t| t.iter().map(ToPrimitive::to_i128).collect())
            .collect();
        let small_widths: Option<Vec<i128>> = big_widths.iter().map(ToPrimitive::to_i128).collect();
        let small = small_tensors.zip(small_widths);
        let scale = fs.iter().fold(Rational::one(), |acc, f| acc * &f.scale);
        Ok(PairingIntegrator {
            blocks,
            m: first.grid.len(),
            big_tensors,
            big_widths,
            small,
            denominator_per_pair,
            denominator_fixed,
            scale,
        })
    }

    pub fn blocks(&self) -> &BlockStructure {
        &self.blocks
    }

    /// Product of the kernels' scale tags.
    pub fn scale(&self) -> &Rational {
        &self.scale
    }

    /// The pairing integral of the stored coefficients (without the scale tags).
    pub fn integrate(&self, pairing: &Pairing) -> Result<Rational> {
        if !self.blocks.respects(pairing) {
            return violation(format!(
                "{pairing} does not respect the block structure {:?}",
                self.blocks.sizes()
            ));
        }
        let mut partner = vec![0usize; pairing.points()];
        for &(a, b) in pairing.pairs() {
            partner[a - 1] = b - 1;
            partner[b - 1] = a - 1;
        }
        let numerator = match &self.small {
            Some((tensors, widths)) => self
                .network(tensors, widths, &partner)
                .map(BigInt::from)
                .unwrap_or_else(|| self.big_network(&partner)),
            None => self.big_network(&partner),
        };
        let den = &self.denominator_fixed
            * num_traits::pow(self.denominator_per_pair.clone(), pairing.pairs().len());
        Ok(Rational::new(numerator, den))
    }

    fn big_network(&self, partner: &[usize]) -> BigInt {
        self.network(&self.big_tensors, &self.big_widths, partner)
            .expect("arbitrary precision does not overflow")
    }

    fn network<R: Ring>(&self, tensors: &[Vec<R>], widths: &[R], partner: &[usize]) -> Option<R> {
        let m = self.m;
        let mut open: Vec<usize> = Vec::new();
        let mut state: Vec<R> = vec![R::unit()];
        let mut start = 0;
        for (j, &size) in self.blocks.sizes().iter().enumerate() {
            let tensor = &tensors[j];
            let stride: Vec<usize> = (0..size).map(|a| power(m, size - 1 - a)).collect();
            let mut closing: Vec<(usize, usize)> = Vec::new();
            let mut opening: Vec<usize> = Vec::new();
            for a in 0..size {
                let other = partner[start + a];
                if other < start {
                    let pos = open.iter().position(|&o| o == other)?;
                    closing.push((a, pos));
                } else {
                    opening.push(a);
                }
            }
            let kept: Vec<usize> = (0..open.len())
                .filter(|k| !closing.iter().any(|&(_, pos)| pos == *k))
                .collect();
            let span = power(m, opening.len());
            let mut next = vec![R::nil(); power(m, kept.len()) * span];
            for (old, v) in state.iter().enumerate() {
                if v.is_nil() {
                    continue;
                }
                let cells = digits(old, m, open.len());
                let mut base = v.clone();
                let mut tbase = 0;
                for &(a, pos) in &closing {
                    base = base.times(&widths[cells[pos]])?;
                    tbase += cells[pos] * stride[a];
                }
                if base.is_nil() {
                    continue;
                }
                let kept_code = kept.iter().fold(0, |acc, &k| acc * m + cells[k]);
                let mut assign = vec![0usize; opening.len()];
                for code in 0..span {
                    if code > 0 {
                        for slot in assign.iter_mut().rev() {
                            *slot += 1;
                            if *slot < m {
                                break;
                            }
                            *slot = 0;
                        }
                    }
                    let tidx = tbase
                        + opening
                            .iter()
                            .zip(&assign)
                            .map(|(&a, &c)| c * stride[a])
                            .sum::<usize>();
                    let t = &tensor[tidx];
                    if t.is_nil() {
                        continue;
                    }
                    let target = &mut next[kept_code * span + code];
                    *target = target.plus(&base.times(t)?)?;
                }
            }
            open = kept
                .iter()
                .map(|&k| open[k])
                .chain(opening.iter().map(|&a| start + a))
                .collect();
            state = next;
            start += size;
        }
        state.into_iter().next()
    }
}

/// `∫_pi f_1 (x) ... (x) f_r`, with each pair identifying two variables.
pub fn pairing_integral(pairing: &Pairing, fs: &[&Kernel]) -> Result<Surd<Rational>> {
    let integrator = PairingIntegrator::new(fs)?;
    let value = integrator.integrate(pairing)?;
    Ok(Surd::new(value, integrator.scale()))
}

/// A finitely supported even correlation `rho: Z -> R` with `rho(0) = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhoFunction {
    values: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct RhoFile {
    support: usize,
    values: Vec<String>,
}

impl RhoFunction {
    /// `values[l] = rho(l)` for `l = 0..=s`.
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        if values.first().is_none_or(|v| !v.is_one()) {
            return violation("rho(0) must equal 1");
        }
        Ok(RhoFunction { values })
    }

    pub fn support(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn get(&self, l: i64) -> Rational {
        self.values
            .get(l.unsigned_abs() as usize)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&RhoFile {
            support: self.support(),
            values: self.values.iter().map(ToString::to_string).collect(),
        })
        .expect("rho serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: RhoFile = serde_json::from_str(s)?;
        if file.values.len() != file.support + 1 {
            return violation(format!(
                "support {} needs {} values, got {}",
                file.support,
                file.support + 1,
                file.values.len()
            ));
        }
        let values = file
            .values
            .iter()
            .map(|v| parse_rational(v))
            .collect::<Result<Vec<_>>>()?;
        RhoFunction::new(values)
    }
}
