#![allow(dead_code)]

use num_traits::One;
use qchaos::combinatorics::{
    contraction_gluing, decreasing_injections, enumerate_respecting, injections, BlockStructure,
    Pairing,
};
use qchaos::kernels::{pairing_integral, q_contract, symmetrize, Grid, Kernel};
use qchaos::qalgebra::{int, ratio, QPoly, Rational};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_grid(rng: &mut ChaCha8Rng, m: usize) -> Grid {
    Grid::new(
        (0..m)
            .map(|_| ratio(rng.gen_range(1..=3), rng.gen_range(1..=3)))
            .collect(),
    )
    .unwrap()
}

pub fn random_kernel(rng: &mut ChaCha8Rng, grid: &Grid, n: usize) -> Kernel {
    Kernel::from_fn(grid.clone(), n, |_| {
        ratio(rng.gen_range(-3..=3), rng.gen_range(1..=3))
    })
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, grid: &Grid, n: usize) -> Kernel {
    symmetrize(&random_kernel(rng, grid, n))
}

/// `sum over pairings of 2k points of prod t_a ∧ t_b`, optionally only the
/// noncrossing ones, by a direct recursive matching independent of the
/// library enumerators.
pub fn wick_oracle(times: &[Rational], noncrossing_only: bool) -> Rational {
    fn go(points: &[usize], times: &[Rational], nc: bool) -> Rational {
        let Some((&first, rest)) = points.split_first() else {
            return Rational::one();
        };
        let mut acc = int(0);
        for (j, &partner) in rest.iter().enumerate() {
            let weight = std::cmp::min(&times[first], &times[partner]).clone();
            if nc {
                if j % 2 == 1 {
                    continue;
                }
                acc += weight * go(&rest[..j], times, nc) * go(&rest[j + 1..], times, nc);
            } else {
                let remaining: Vec<usize> =
                    rest.iter().copied().filter(|&x| x != partner).collect();
                acc += weight * go(&remaining, times, nc);
            }
        }
        acc
    }
    let points: Vec<usize> = (0..times.len()).collect();
    go(&points, times, noncrossing_only)
}

/// Checks `Cr(F(sigma1, sigma2, pi')) = alpha(sigma1) + beta(sigma2) + Cr(pi')`
/// over every `p`, `sigma1`, `sigma2` and respecting `pi'` for the given
/// block sizes. Returns the number of identities checked.
pub fn check_recursion(sizes: &[usize]) -> Result<usize, String> {
    let (n1, n2) = (sizes[0], sizes[1]);
    let mut checked = 0;
    for p in 1..=n1.min(n2) {
        let (merged, rest) = reduced_blocks(sizes, p);
        for pi in reduced_pairings(merged, &rest) {
            for s1 in decreasing_injections(p, n1) {
                for s2 in injections(p, n2) {
                    let glued =
                        contraction_gluing(n1, n2, &s1, &s2, &pi).map_err(|e| e.to_string())?;
                    let b = BlockStructure::new(sizes.to_vec()).unwrap();
                    if !b.respects(&glued) {
                        return Err(format!("glued pairing {glued} does not respect {sizes:?}"));
                    }
                    if glued.crossings() != s1.alpha() + s2.beta() + pi.crossings() {
                        return Err(format!(
                            "sizes {sizes:?} p={p}: Cr({glued}) = {} but alpha + beta + Cr(pi') = {} + {} + {}",
                            glued.crossings(),
                            s1.alpha(),
                            s2.beta(),
                            pi.crossings()
                        ));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(checked)
}

fn reduced_blocks(sizes: &[usize], p: usize) -> (usize, Vec<usize>) {
    (sizes[0] + sizes[1] - 2 * p, sizes[2..].to_vec())
}

/// Respecting pairings of `(merged, rest...)`, dropping an empty merged block.
fn reduced_pairings(merged: usize, rest: &[usize]) -> Vec<Pairing> {
    let mut blocks = Vec::new();
    if merged > 0 {
        blocks.push(merged);
    }
    blocks.extend_from_slice(rest);
    if blocks.is_empty() {
        return vec![Pairing::from_pairs(&[]).unwrap()];
    }
    enumerate_respecting(&BlockStructure::new(blocks).unwrap())
        .unwrap()
        .collect()
}

fn integral(p: &Pairing, fs: &[&Kernel]) -> Result<Rational, String> {
    if fs.is_empty() {
        return Ok(Rational::one());
    }
    let v = pairing_integral(p, fs).map_err(|e| e.to_string())?;
    v.as_rational()
        .cloned()
        .ok_or_else(|| format!("integral {v} is not rational"))
}

/// Checks `int_{pi'} (f1 ⌢_p^q f2) ⊗ f3 ⊗ ... = sum q^{alpha + beta}
/// int_{F(sigma1, sigma2, pi')} f1 ⊗ f2 ⊗ ...` as polynomials in `q`.
pub fn check_decomposition(kernels: &[Kernel]) -> Result<usize, String> {
    let sizes: Vec<usize> = kernels.iter().map(Kernel::arity).collect();
    let (n1, n2) = (sizes[0], sizes[1]);
    let all: Vec<&Kernel> = kernels.iter().collect();
    let mut checked = 0;
    for p in 1..=n1.min(n2) {
        let qc = q_contract(&kernels[0], &kernels[1], p).map_err(|e| e.to_string())?;
        let (merged, rest) = reduced_blocks(&sizes, p);
        for pi in reduced_pairings(merged, &rest) {
            let mut lhs = QPoly::zero();
            for d in 0..=qc.degree().unwrap_or(0) {
                let layer = qc.layer(d);
                let value = if merged == 0 {
                    let scalar = layer.coeffs()[0].clone();
                    let scale = layer.scale().clone();
                    if !scale.is_one() {
                        return Err("unexpected scale on a scalar contraction".into());
                    }
                    scalar * integral(&pi, &all[2..])?
                } else {
                    let mut fs = vec![&layer];
                    fs.extend_from_slice(&all[2..]);
                    integral(&pi, &fs)?
                };
                lhs += QPoly::monomial(value, d);
            }
            let mut rhs = QPoly::zero();
            for s1 in decreasing_injections(p, n1) {
                for s2 in injections(p, n2) {
                    let glued =
                        contraction_gluing(n1, n2, &s1, &s2, &pi).map_err(|e| e.to_string())?;
                    rhs += QPoly::monomial(integral(&glued, &all)?, s1.alpha() + s2.beta());
                }
            }
            if lhs != rhs {
                return Err(format!("sizes {sizes:?} p={p} pi'={pi}: {lhs} != {rhs}"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// Every block structure with `r` in `2..=4` blocks of sizes `1..=3` whose
/// total is even.
pub fn block_structures() -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for r in 2..=4usize {
        let mut sizes = vec![1; r];
        loop {
            if sizes.iter().sum::<usize>() % 2 == 0 {
                out.push(sizes.clone());
            }
            let mut i = 0;
            while i < r && sizes[i] == 3 {
                sizes[i] = 1;
                i += 1;
            }
            if i == r {
                break;
            }
            sizes[i] += 1;
        }
    }
    out
}

/// First-order elements `I_1(1_{[0, t_i]})` on the common grid of the `t_i`.
pub fn brownian_elements(times: &[Rational]) -> Vec<qchaos::ChaosElement> {
    let mut points: Vec<Rational> = times.iter().filter(|t| **t > int(0)).cloned().collect();
    points.sort();
    points.dedup();
    if points.is_empty() {
        points.push(int(1));
    }
    let grid = Grid::from_breakpoints(&points).unwrap();
    times
        .iter()
        .map(|t| {
            let cells = grid.cells_up_to(t).unwrap();
            qchaos::ChaosElement::new(Kernel::indicator(grid.clone(), &[cells], int(1))).unwrap()
        })
        .collect()
}

pub fn random_times(rng: &mut ChaCha8Rng, r: usize) -> Vec<Rational> {
    (0..r)
        .map(|_| ratio(rng.gen_range(1..=6), rng.gen_range(1..=3)))
        .collect()
}

pub fn double_factorial(n: u64) -> u64 {
    (1..=n).rev().step_by(2).product()
}

pub fn catalan(k: u64) -> u64 {
    (0..k).fold(1, |c, i| c * 2 * (2 * i + 1) / (i + 2))
}

/// Crossing histogram over all pairings of `k2` points by naive recursion and
/// a quadratic crossing count.
pub fn crossing_histogram_oracle(k2: usize) -> Vec<u64> {
    fn go(rest: &[usize], pairs: &mut Vec<(usize, usize)>, hist: &mut Vec<u64>) {
        let Some((&first, tail)) = rest.split_first() else {
            let mut c = 0;
            for (i, &(a, b)) in pairs.iter().enumerate() {
                for &(x, y) in &pairs[i + 1..] {
                    if (a < x && x < b && b < y) || (x < a && a < y && y < b) {
                        c += 1;
                    }
                }
            }
            if hist.len() <= c {
                hist.resize(c + 1, 0);
            }
            hist[c] += 1;
            return;
        };
        for &partner in tail {
            let remaining: Vec<usize> = tail.iter().copied().filter(|&x| x != partner).collect();
            pairs.push((first, partner));
            go(&remaining, pairs, hist);
            pairs.pop();
        }
    }
    let mut hist = Vec::new();
    if k2.is_multiple_of(2) {
        let points: Vec<usize> = (1..=k2).collect();
        go(&points, &mut Vec::new(), &mut hist);
    }
    hist
}
