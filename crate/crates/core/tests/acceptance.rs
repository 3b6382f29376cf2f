mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{
    block_structures, brownian_elements, catalan, check_decomposition, check_recursion,
    crossing_histogram_oracle, double_factorial, random_grid, random_kernel, random_symmetric,
    random_times, rng, wick_oracle,
};
use num_traits::{Signed, Zero};
use qchaos::analysis::{
    breuer_major_limit, breuer_major_moment, fmt_diagnose, negative_q_counterexample,
    transfer_check, KernelSequence,
};
use qchaos::combinatorics::{
    count_inversions, enumerate_noncrossing, enumerate_pairings, enumerate_respecting,
    gaussian_moment, gaussian_moment_fast, p2_of_permutation, permutations, BlockStructure,
};
use qchaos::density::{quadrature_moment, DensityParams};
use qchaos::kernels::{Grid, Kernel};
use qchaos::moments::{fourth_moment_decomposition, joint_moment, third_moment};
use qchaos::qalgebra::{int, q_factorial, ratio, QPoly, Rational, Surd};
use qchaos::qhermite::{hermite_moment_check, q_hermite};
use qchaos::{ChaosElement, RhoFunction};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn golden_counterexample() -> Outcome {
    let q = ratio(-1, 2);
    let report = negative_q_counterexample().map_err(err)?;
    ensure(report.passed, || {
        format!("library report failed: {:?}", report.checks)
    })?;

    // I_2(sqrt(2) e⊗e) = sqrt(2) H_2(G): moments from the Hermite expansion
    let h2 = q_hermite(2).map_err(err)?;
    let power = |k: usize| (1..k).fold(h2.clone(), |acc, _| &acc * &h2);
    let oracle = |k: usize| {
        let v = power(k).gaussian_expectation().eval(&q);
        Surd::new(v, &int(2).pow(k as i32))
    };
    let f = ChaosElement::new(
        Kernel::constant(Grid::uniform(1, int(1)).map_err(err)?, 2, int(1))
            .with_scale(int(2))
            .map_err(err)?,
    )
    .map_err(err)?;
    let second = joint_moment(&[f.clone(), f.clone()])
        .map_err(err)?
        .value
        .eval(&q);
    let third = third_moment(&f).map_err(err)?.eval(&q);
    let fourth = joint_moment(&vec![f.clone(); 4])
        .map_err(err)?
        .value
        .eval(&q);
    let root2_quarter = Surd::new(ratio(1, 4), &int(2));
    let checks = [
        ("second", &second, oracle(2), Surd::rational(int(1))),
        ("third", &third, oracle(3), root2_quarter),
        ("fourth", &fourth, oracle(4), Surd::rational(ratio(33, 16))),
    ];
    for (name, got, from_hermite, golden) in checks {
        ensure(*got == golden && from_hermite == golden, || {
            format!("{name}: got {got}, hermite oracle {from_hermite}, golden {golden}")
        })?;
    }
    ensure(fourth == Surd::rational(int(2) + q.clone().pow(4)), || {
        "fourth != 2+q^4".into()
    })?;
    Ok(format!("m2 = {second}, m3 = {third}, m4 = {fourth}"))
}

fn fourth_moment_vs_enumeration() -> Outcome {
    let mut rng = rng(2);
    for i in 0..50 {
        let n = 1 + i % 3;
        let m = 2 + (i / 3) % 3;
        let grid = random_grid(&mut rng, m);
        let f = ChaosElement::new(random_symmetric(&mut rng, &grid, n)).map_err(err)?;
        let d = fourth_moment_decomposition(&f).map_err(err)?;
        let jm = joint_moment(&vec![f; 4]).map_err(err)?.value;
        ensure(jm == Surd::rational(d.total()), || {
            format!(
                "kernel {i} (n={n}, m={m}): enumeration {jm}, decomposition {}",
                d.total()
            )
        })?;
    }
    Ok("50 kernels, n in {1,2,3}, m in {2,3,4}".into())
}

fn second_order_correction() -> Outcome {
    let mut rng = rng(3);
    let factor = &QPoly::from_integers(&[1, 1]).pow(4) * &QPoly::from_integers(&[1, 2]);
    for i in 0..20 {
        let grid = random_grid(&mut rng, 2 + i % 3);
        let f = ChaosElement::new(random_symmetric(&mut rng, &grid, 2)).map_err(err)?;
        let d = fourth_moment_decomposition(&f).map_err(err)?;
        let expected = factor.scale(&d.terms[0].contraction_norm);
        ensure(d.correction() == expected, || {
            format!("kernel {i}: correction {} != {expected}", d.correction())
        })?;
    }
    Ok("20 kernels, correction = (1+q)^4 (2q+1) ||f ⌢_1 f||^2".into())
}

fn wick_specializations() -> Outcome {
    let mut rng = rng(4);
    let mut checked = 0;
    for r in 1..=8 {
        for _ in 0..4 {
            let times = random_times(&mut rng, r);
            let m = joint_moment(&brownian_elements(&times)).map_err(err)?.value;
            let poly = m.as_rational().ok_or("moment not rational")?;
            for (q, nc) in [(int(1), false), (int(0), true)] {
                let oracle = wick_oracle(&times, nc);
                ensure(poly.eval(&q) == oracle, || {
                    format!("times {times:?} at q={q}: {} != {oracle}", poly.eval(&q))
                })?;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} time tuples, r <= 8"))
}

fn moment_polynomials() -> Outcome {
    ensure(
        gaussian_moment(4).map_err(err)? == QPoly::from_integers(&[2, 1]),
        || "m4".into(),
    )?;
    ensure(
        gaussian_moment(6).map_err(err)? == QPoly::from_integers(&[5, 6, 3, 1]),
        || "m6".into(),
    )?;
    for k in 1..=7u64 {
        let k2 = 2 * k as usize;
        let m = gaussian_moment(k2).map_err(err)?;
        let oracle = QPoly::from_counts(&crossing_histogram_oracle(k2));
        ensure(m == oracle, || format!("2k={k2}: {m} != {oracle}"))?;
        ensure(gaussian_moment_fast(k2) == oracle, || {
            format!("fast 2k={k2}")
        })?;
        ensure(
            m.eval(&int(1)) == int(double_factorial(2 * k - 1) as i64),
            || format!("q=1 2k={k2}"),
        )?;
        ensure(m.eval(&int(0)) == int(catalan(k) as i64), || {
            format!("q=0 2k={k2}")
        })?;
    }
    Ok("2k <= 14".into())
}

fn structural_counts() -> Outcome {
    for k in 1..=7u64 {
        let k2 = 2 * k as usize;
        let all = enumerate_pairings(k2).map_err(err)?.count() as u64;
        let nc = enumerate_noncrossing(k2).map_err(err)?.count() as u64;
        ensure(all == double_factorial(2 * k - 1), || {
            format!("|P2({k2})| = {all}")
        })?;
        ensure(nc == catalan(k), || format!("|NC2({k2})| = {nc}"))?;
    }
    for n in 1..=6usize {
        let b = BlockStructure::new(vec![n, n]).map_err(err)?;
        let count = enumerate_respecting(&b).map_err(err)?.count();
        ensure(count == (1..=n).product::<usize>(), || {
            format!("|C2({n}x{n})| = {count}")
        })?;
        for s in permutations(n) {
            let p = p2_of_permutation(&s);
            ensure(p.crossings() == count_inversions(s.images()), || {
                format!("Cr(P2({:?})) = {}", s.images(), p.crossings())
            })?;
        }
    }
    Ok("2k <= 14, n <= 6".into())
}

fn gluing_identities() -> Outcome {
    let mut rng = rng(7);
    let (mut recursion, mut decomposition) = (0, 0);
    for sizes in block_structures() {
        recursion += check_recursion(&sizes)?;
        let grid = random_grid(&mut rng, 2);
        let kernels: Vec<_> = sizes
            .iter()
            .map(|&n| random_kernel(&mut rng, &grid, n))
            .collect();
        decomposition += check_decomposition(&kernels)?;
    }
    Ok(format!(
        "{recursion} crossing identities, {decomposition} integral identities"
    ))
}

fn hermite_orthogonality() -> Outcome {
    for n in 0..=8 {
        for m in 0..=8 {
            let v = hermite_moment_check(n, m).map_err(err)?;
            let expected = if n == m {
                q_factorial(n)
            } else {
                QPoly::zero()
            };
            ensure(v == expected, || format!("phi(H_{n} H_{m}) = {v}"))?;
        }
    }
    Ok("n, m <= 8".into())
}

fn fmt_convergence() -> Outcome {
    let ks = [2, 4, 8, 16];
    let seq = KernelSequence::spread(2);
    let mut last = Vec::new();
    for q in [int(0), ratio(1, 2), int(1)] {
        let report = fmt_diagnose(&seq, &q, &ks).map_err(err)?;
        for row in &report.rows {
            ensure(
                row.contraction_norms == vec![ratio(1, row.k as i64)],
                || format!("k={}: contraction norms {:?}", row.k, row.contraction_norms),
            )?;
            ensure(row.norm_q == int(1) + &q, || {
                format!("k={}: norm {}", row.k, row.norm_q)
            })?;
        }
        ensure(report.excess_decreasing(), || {
            format!("excess not decreasing at q={q}")
        })?;
        ensure(
            report.rows.iter().all(|r| r.excess >= Rational::zero()),
            || "negative excess".into(),
        )?;
        last.push(format!("q={q}: excess(16) = {}", report.rows[3].excess));
    }
    Ok(last.join(", "))
}

fn transfer_principle() -> Outcome {
    let qs = [int(0), ratio(1, 4), ratio(1, 2), ratio(3, 4), int(1)];
    let random = KernelSequence::from_fn("random symmetric", 3, |k| {
        let mut rng = rng(100 + k as u64);
        let grid = random_grid(&mut rng, 2);
        Ok(random_symmetric(&mut rng, &grid, 3))
    });
    for seq in [KernelSequence::spread(2), KernelSequence::spread(3), random] {
        let report = transfer_check(&seq, &[1, 2, 3], &qs).map_err(err)?;
        ensure(report.contraction_columns_identical, || {
            format!("{}: columns differ", seq.description())
        })?;
        let columns: Vec<String> = report
            .columns
            .iter()
            .map(|c| {
                let table: Vec<_> = c.report.rows.iter().map(|r| &r.contraction_norms).collect();
                format!("{table:?}")
            })
            .collect();
        ensure(columns.windows(2).all(|w| w[0] == w[1]), || {
            format!("{}: rendered columns differ", seq.description())
        })?;
    }
    Ok("3 sequences, 5 values of q".into())
}

fn breuer_major() -> Outcome {
    let rho = RhoFunction::new(vec![int(1), ratio(1, 2)]).map_err(err)?;
    let q = ratio(1, 2);
    let m = breuer_major_moment(&rho, 2, 10, &[int(1), int(1)]).map_err(err)?;
    let at = m.value.eval(&q);
    let expected = ratio(3, 2) * ratio(29, 20);
    ensure(at == Surd::rational(expected.clone()), || {
        format!("k=10 second moment {at}, expected {expected}")
    })?;
    let mut ratios = Vec::new();
    for r in [2usize, 4] {
        let times = vec![int(1); r];
        let limit = breuer_major_limit(&rho, 2, &times).map_err(err)?.eval(&q);
        let error = |k: usize| -> Result<Rational, String> {
            let v = breuer_major_moment(&rho, 2, k, &times)
                .map_err(err)?
                .value
                .eval(&q);
            let v = v.as_rational().ok_or("moment not rational")?.clone();
            Ok((v - &limit).abs())
        };
        let (e25, e50) = (error(25)?, error(50)?);
        ensure(!e25.is_zero(), || format!("r={r}: zero error at k=25"))?;
        let ratio_ = &e50 / &e25;
        ensure(ratio_ >= ratio(3, 10) && ratio_ <= ratio(7, 10), || {
            format!("r={r}: error ratio {ratio_} outside [0.3, 0.7]")
        })?;
        ratios.push(format!("r={r}: {ratio_}"));
    }
    Ok(format!(
        "k=10 moment {expected}; error ratios {}",
        ratios.join(", ")
    ))
}

fn density_quadrature() -> Outcome {
    let mut out = Vec::new();
    for q in [0.0, 0.3, 0.7] {
        let params = DensityParams::new(q).map_err(err)?;
        let m0 = quadrature_moment(&params, 0).map_err(err)?.quadrature;
        let m2 = quadrature_moment(&params, 2).map_err(err)?.quadrature;
        let m4 = quadrature_moment(&params, 4).map_err(err)?.quadrature;
        let exact4 = 2.0 + q;
        ensure((m0 - 1.0).abs() < 1e-8, || format!("q={q}: mass {m0}"))?;
        ensure((m2 - 1.0).abs() < 1e-8, || format!("q={q}: variance {m2}"))?;
        ensure((m4 - exact4).abs() < 1e-6, || format!("q={q}: fourth {m4}"))?;
        ensure(
            (m4 - gaussian_moment(4).unwrap().eval_f64(q)).abs() < 1e-6,
            || format!("q={q}: fourth vs polynomial"),
        )?;
        out.push(format!("q={q}: m4={m4:.10}"));
    }
    let free = quadrature_moment(&DensityParams::new(0.0).map_err(err)?, 4).map_err(err)?;
    ensure((free.quadrature - 2.0).abs() < 1e-6, || {
        "q=0 fourth moment".into()
    })?;
    Ok(out.join(", "))
}

struct Criterion {
    id: u8,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "negative-q counterexample golden values",
            limit: Duration::from_secs(1),
            run: golden_counterexample,
        },
        Criterion {
            id: 2,
            name: "fourth-moment formula equals pairing enumeration",
            limit: Duration::from_secs(120),
            run: fourth_moment_vs_enumeration,
        },
        Criterion {
            id: 3,
            name: "second-order correction closed form",
            limit: Duration::from_secs(120),
            run: second_order_correction,
        },
        Criterion {
            id: 4,
            name: "Wick formulas at q = 0 and q = 1",
            limit: Duration::from_secs(120),
            run: wick_specializations,
        },
        Criterion {
            id: 5,
            name: "q-Gaussian moment polynomials",
            limit: Duration::from_secs(60),
            run: moment_polynomials,
        },
        Criterion {
            id: 6,
            name: "structural counts",
            limit: Duration::from_secs(120),
            run: structural_counts,
        },
        Criterion {
            id: 7,
            name: "gluing recursion and contraction decomposition",
            limit: Duration::from_secs(300),
            run: gluing_identities,
        },
        Criterion {
            id: 8,
            name: "q-Hermite orthogonality",
            limit: Duration::from_secs(120),
            run: hermite_orthogonality,
        },
        Criterion {
            id: 9,
            name: "fourth-moment convergence of the spread sequence",
            limit: Duration::from_secs(120),
            run: fmt_convergence,
        },
        Criterion {
            id: 10,
            name: "contraction norms identical across q",
            limit: Duration::from_secs(120),
            run: transfer_principle,
        },
        Criterion {
            id: 11,
            name: "Breuer-Major moments and convergence rate",
            limit: Duration::from_secs(300),
            run: breuer_major,
        },
        Criterion {
            id: 12,
            name: "density quadrature",
            limit: Duration::from_secs(30),
            run: density_quadrature,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.limit => {
                Err(format!("{detail}; took {elapsed:.2?}, limit {:?}", c.limit))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {:>2} {} ({detail}) [{elapsed:.2?}]", c.id, c.name),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {} ({detail}) [{elapsed:.2?}]", c.id, c.name);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
