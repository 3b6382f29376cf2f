use proptest::prelude::*;
use qchaos::combinatorics::{crossing_number, enumerate_pairings, Pairing};
use qchaos::kernels::{adjoint, is_symmetric, l2_inner, q_inner, symmetrize, Grid, Kernel};
use qchaos::moments::{isometry, joint_moment, pair_moment, product_expand};
use qchaos::qalgebra::{ratio, QPoly, Rational};
use qchaos::ChaosElement;

fn rational() -> impl Strategy<Value = Rational> {
    (-4i64..=4, 1i64..=3).prop_map(|(a, b)| ratio(a, b))
}

fn qpoly() -> impl Strategy<Value = QPoly> {
    prop::collection::vec(rational(), 0..5).prop_map(QPoly::from_coeffs)
}

fn grid(m: usize) -> impl Strategy<Value = Grid> {
    prop::collection::vec((1i64..=3, 1i64..=2), m)
        .prop_map(|w| Grid::new(w.into_iter().map(|(a, b)| ratio(a, b)).collect()).unwrap())
}

fn kernel_on(grid: Grid, n: usize) -> impl Strategy<Value = Kernel> {
    let len = grid.len().pow(n as u32);
    prop::collection::vec(rational(), len)
        .prop_map(move |c| Kernel::new(grid.clone(), n, c).unwrap())
}

/// Two kernels on a shared grid.
fn kernel_pair(max_arity: usize) -> impl Strategy<Value = (Kernel, Kernel)> {
    (1usize..=2, 1..=max_arity, 1..=max_arity).prop_flat_map(|(m, n1, n2)| {
        grid(m).prop_flat_map(move |g| (kernel_on(g.clone(), n1), kernel_on(g, n2)))
    })
}

fn pairing() -> impl Strategy<Value = Pairing> {
    (1usize..=7).prop_flat_map(|k| {
        Just((1..=2 * k).collect::<Vec<usize>>())
            .prop_shuffle()
            .prop_map(|points| {
                let pairs: Vec<(usize, usize)> = points.chunks(2).map(|c| (c[0], c[1])).collect();
                Pairing::from_pairs(&pairs).unwrap()
            })
    })
}

fn brute_crossings(p: &Pairing) -> usize {
    let pairs = p.pairs();
    let mut c = 0;
    for (i, &(a1, b1)) in pairs.iter().enumerate() {
        for &(a2, b2) in &pairs[i + 1..] {
            let (x1, y1) = (a1.min(b1), a1.max(b1));
            let (x2, y2) = (a2.min(b2), a2.max(b2));
            if (x1 < x2 && x2 < y1 && y1 < y2) || (x2 < x1 && x1 < y2 && y2 < y1) {
                c += 1;
            }
        }
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn qpoly_ring_laws(a in qpoly(), b in qpoly(), c in qpoly(), x in rational()) {
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(b.clone() + c.clone()), &a * &b + &a * &c);
        prop_assert_eq!((&a * &b).eval(&x), a.eval(&x) * b.eval(&x));
        prop_assert_eq!(a.clone() - a.clone(), QPoly::zero());
        prop_assert_eq!(QPoly::from_json(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn crossings_match_definition(p in pairing()) {
        prop_assert_eq!(crossing_number(&p), brute_crossings(&p));
        prop_assert_eq!(p.crossings(), brute_crossings(&p));
        prop_assert_eq!(Pairing::parse_text(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn adjoint_is_involution((f, _) in kernel_pair(3)) {
        prop_assert_eq!(adjoint(&adjoint(&f)), f.clone());
        let s = symmetrize(&f);
        prop_assert!(is_symmetric(&s));
        prop_assert_eq!(symmetrize(&s), s);
        prop_assert_eq!(Kernel::from_json(&f.to_json()).unwrap(), f);
    }

    #[test]
    fn q_inner_specializations((f, g) in kernel_pair(3)) {
        prop_assume!(f.arity() == g.arity());
        let fg = q_inner(&f, &g).unwrap();
        let gf = q_inner(&g, &f).unwrap();
        prop_assert_eq!(&fg, &gf);
        let at_zero = fg.eval(&ratio(0, 1));
        prop_assert_eq!(at_zero, l2_inner(&f, &g).unwrap());
        let sf = symmetrize(&f);
        let at_one = q_inner(&sf, &g).unwrap().eval(&ratio(1, 1));
        let expect = l2_inner(&sf, &g).unwrap();
        let n_fact: i64 = (1..=f.arity() as i64).product();
        prop_assert_eq!(at_one.value(), &(expect.value() * ratio(n_fact, 1)));
    }

    #[test]
    fn isometry_is_a_second_moment((f, g) in kernel_pair(3)) {
        let fe = ChaosElement::new(adjoint(&f)).unwrap();
        let ge = ChaosElement::new(g.clone()).unwrap();
        let via_pairings = joint_moment(&[fe, ge.clone()]).unwrap().value;
        let direct = isometry(&ChaosElement::new(f).unwrap(), &ge).unwrap();
        prop_assert_eq!(via_pairings, direct);
    }

    #[test]
    fn product_formula_against_third_element((f, g) in kernel_pair(2), seed in 0u8..4) {
        let (n1, n2) = (f.arity(), g.arity());
        let mut p = seed as usize % (n1.min(n2) + 1);
        if n1 + n2 == 2 * p {
            p = 0;
        }
        let h = Kernel::from_fn(f.grid().clone(), n1 + n2 - 2 * p, |idx| {
            ratio(idx.iter().enumerate().map(|(a, i)| (a + 1) * i).sum::<usize>() as i64 - seed as i64, 2)
        });
        let fe = ChaosElement::new(f).unwrap();
        let ge = ChaosElement::new(g).unwrap();
        let he = ChaosElement::new(h).unwrap();
        let direct = joint_moment(&[fe.clone(), ge.clone(), he.clone()]).unwrap().value;
        let mut expanded = QPoly::zero();
        let mut radicand = None;
        for (_, term) in product_expand(&fe, &ge).unwrap() {
            let v = pair_moment(&term, &he).unwrap();
            if v.value().is_zero() {
                continue;
            }
            radicand.get_or_insert_with(|| v.radicand().clone());
            prop_assert_eq!(Some(v.radicand()), radicand.as_ref());
            expanded += v.value().clone();
        }
        if expanded.is_zero() {
            prop_assert!(direct.value().is_zero());
        } else {
            prop_assert_eq!(direct.value(), &expanded);
            prop_assert_eq!(Some(direct.radicand()), radicand.as_ref());
        }
    }
}

#[test]
fn enumeration_is_deterministic() {
    let a: Vec<String> = enumerate_pairings(10)
        .unwrap()
        .map(|p| p.to_text())
        .collect();
    let b: Vec<String> = enumerate_pairings(10)
        .unwrap()
        .map(|p| p.to_text())
        .collect();
    assert_eq!(a, b);
}
