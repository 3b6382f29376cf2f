//! Deterministic fixtures shared by the benchmarks.

use qchaos::kernels::{symmetrize, Grid, Kernel, RhoFunction};
use qchaos::qalgebra::{int, ratio};
use qchaos::ChaosElement;

/// A dense symmetric kernel of arity `n` on `m` cells of unequal widths.
pub fn symmetric_element(m: usize, n: usize) -> ChaosElement {
    let grid = Grid::new((1..=m as i64).map(|i| ratio(i, m as i64 + 1)).collect())
        .expect("positive widths");
    let raw = Kernel::from_fn(grid, n, |idx| {
        let s: usize = idx
            .iter()
            .enumerate()
            .map(|(a, &i)| (a + 2) * (i + 1))
            .sum();
        ratio((s % 7) as i64 - 3, 1 + (s % 3) as i64)
    });
    ChaosElement::new(symmetrize(&raw)).expect("arity at least one")
}

/// `rho(0) = 1`, `rho(+-1) = 1/2`.
pub fn nearest_neighbour_rho() -> RhoFunction {
    RhoFunction::new(vec![int(1), ratio(1, 2)]).expect("rho(0) = 1")
}
