use std::collections::BTreeMap;

use flagint::algebra::{
    commutator, conjugate, group_distance, mat_exp, mat_log, random_algebra_element, AlgebraElement, GroupElement,
};
use flagint::cohomology::{alpha_class, conjugacy_invariants, discrepancy_s1, same_alpha_class, CircleForm};
use flagint::formlang::{parse, partial, partial2, BinOp, Func, Node, ScalarExpr};
use flagint::forms::{covariant_ext_derivative, curvature, preset_cr_connection, random_polynomial_connection};
use flagint::holonomy::{path_holonomy, word_holonomy, Word};
use flagint::lattice::PathSpec;
use num_complex::Complex64;
use proptest::prelude::*;

fn node() -> impl Strategy<Value = Node> {
    let leaf = prop_oneof![
        (0u32..50).prop_map(|k| Node::Num(k as f64 / 4.0)),
        Just(Node::ImagUnit),
        Just(Node::Pi),
        (0usize..2).prop_map(Node::Var),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|n| Node::Neg(Box::new(n))),
            (
                prop_oneof![
                    Just(BinOp::Add),
                    Just(BinOp::Sub),
                    Just(BinOp::Mul),
                    Just(BinOp::Div),
                    Just(BinOp::Pow)
                ],
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, a, b)| Node::Binary(op, Box::new(a), Box::new(b))),
            (prop::sample::select(Func::ALL.to_vec()), inner).prop_map(|(f, a)| Node::Call(f, Box::new(a))),
        ]
    })
}

/// Smooth expressions in two variables: sums and products of trig and exp.
fn smooth() -> impl Strategy<Value = ScalarExpr> {
    let leaf = prop_oneof![
        (-2.0f64..2.0).prop_map(|c| ScalarExpr::real(c, 2)),
        (0usize..2).prop_map(|k| ScalarExpr::var(k, 2)),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(&b)),
            (prop::sample::select(vec![Func::Sin, Func::Cos, Func::Exp]), inner).prop_map(|(f, a)| a.call(f)),
        ]
    })
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.9f64..0.9, 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exp_log_round_trip(seed in any::<u64>(), n in 1usize..4, size in 0.01f64..0.4) {
        // |x| <= 0.4 keeps |exp(x) - I| <= e^0.4 - 1 inside the log domain
        let x = random_algebra_element(seed, n, 1.0);
        let x = &x * (size / x.norm().max(1e-300));
        let back = mat_log(&mat_exp(&x).unwrap()).unwrap();
        prop_assert!((&back - &x).norm() <= 1e-12 * x.norm().max(1.0));
    }

    #[test]
    fn det_of_exp_is_exp_of_trace(seed in any::<u64>(), n in 1usize..5, scale in 0.0f64..2.0) {
        let x = random_algebra_element(seed, n, scale);
        let det = mat_exp(&x).unwrap().determinant();
        prop_assert!((det - x.trace().exp()).norm() <= 1e-11 * det.norm().max(1.0));
    }

    #[test]
    fn commuting_exponentials_multiply(seed in any::<u64>(), s in -1.0f64..1.0, t in -1.0f64..1.0) {
        let x = random_algebra_element(seed, 3, 0.8);
        let prod = &mat_exp(&(&x * s)).unwrap() * &mat_exp(&(&x * t)).unwrap();
        let sum = mat_exp(&(&x * (s + t))).unwrap();
        prop_assert!(group_distance(&prod, &sum) <= 1e-12 * sum.norm());
    }

    #[test]
    fn conjugation_preserves_commutators(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let (x, y) = (random_algebra_element(s1, 3, 1.0), random_algebra_element(s2, 3, 1.0));
        let g = mat_exp(&random_algebra_element(s3, 3, 0.5)).unwrap();
        let lhs = conjugate(&g, &commutator(&x, &y).unwrap()).unwrap();
        let rhs = commutator(&conjugate(&g, &x).unwrap(), &conjugate(&g, &y).unwrap()).unwrap();
        prop_assert!((&lhs - &rhs).norm() <= 1e-12 * lhs.norm().max(1.0));
    }

    #[test]
    fn printed_expressions_reparse(n in node()) {
        let e = ScalarExpr::from_node(n, 2).unwrap();
        let text = e.to_string();
        let back = parse(&text, 2).unwrap();
        prop_assert_eq!(back.node(), e.node(), "{}", text);
    }

    #[test]
    fn partial_matches_central_difference(e in smooth(), p in point(), k in 0usize..2) {
        let h = 1e-5;
        let shifted = |d: f64| {
            let mut q = p.clone();
            q[k] += d;
            e.eval_real(&q).unwrap()
        };
        let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
        let exact = partial(&e, &p, k).unwrap();
        prop_assert!((fd - exact).norm() <= 1e-6 * exact.norm().max(1.0), "{} vs {}", fd, exact);
    }

    #[test]
    fn mixed_partials_are_symmetric(e in smooth(), p in point()) {
        prop_assert_eq!(partial2(&e, &p, 0, 1).unwrap(), partial2(&e, &p, 1, 0).unwrap());
    }

    #[test]
    fn holonomy_splits_at_any_parameter(seed in 0u64..1000, s in 0.1f64..0.9) {
        let a = random_polynomial_connection(seed, 2, 2, 2, 0.7);
        let whole = PathSpec::parse(&["0.5*t + 0.2*t^2", "sin(2*t) - 0.4"]).unwrap();
        let first = PathSpec::parse(&[format!("0.5*({s}*t) + 0.2*({s}*t)^2"), format!("sin(2*{s}*t) - 0.4")]).unwrap();
        let r = format!("({s} + (1 - {s})*t)");
        let second = PathSpec::parse(&[format!("0.5*{r} + 0.2*{r}^2"), format!("sin(2*{r}) - 0.4")]).unwrap();
        let fine = path_holonomy(&a, &whole, 8192).unwrap();
        let split = &path_holonomy(&a, &second, 8192).unwrap() * &path_holonomy(&a, &first, 8192).unwrap();
        prop_assert!(group_distance(&fine, &split) <= 1e-6);
    }

    #[test]
    fn holonomy_ignores_reparametrization(seed in 0u64..1000, k in 0.1f64..0.9) {
        let a = random_polynomial_connection(seed, 2, 2, 2, 0.7);
        let plain = PathSpec::parse(&["cos(2*t)", "t - 0.5"]).unwrap();
        let u = format!("(t + {k}*t*(1 - t))");
        let warped = PathSpec::parse(&[format!("cos(2*{u})"), format!("{u} - 0.5")]).unwrap();
        let d = group_distance(&path_holonomy(&a, &plain, 4096).unwrap(), &path_holonomy(&a, &warped, 4096).unwrap());
        prop_assert!(d <= 1e-6);
    }

    #[test]
    fn reversed_path_inverts(seed in 0u64..1000) {
        let a = random_polynomial_connection(seed, 2, 2, 2, 0.7);
        let fwd = PathSpec::parse(&["t^2", "sin(t)"]).unwrap();
        let back = PathSpec::parse(&["(1 - t)^2", "sin(1 - t)"]).unwrap();
        let prod = &path_holonomy(&a, &back, 64).unwrap() * &path_holonomy(&a, &fwd, 64).unwrap();
        prop_assert!(group_distance(&prod, &GroupElement::identity(2)) <= 1e-12);
    }

    #[test]
    fn bianchi_holds_everywhere(seed in 0u64..1000, p in prop::collection::vec(-1.0f64..1.0, 3)) {
        let a = random_polynomial_connection(seed, 3, 2, 2, 1.0);
        let c = covariant_ext_derivative(&curvature(&a), &a).unwrap();
        prop_assert!(c.max_norm(&p).unwrap() <= 1e-10);
    }

    #[test]
    fn curvature_is_antisymmetric(seed in 0u64..1000, p in point()) {
        let f = curvature(&random_polynomial_connection(seed, 2, 2, 2, 1.0));
        let sum = &f.component(&p, 0, 1).unwrap() + &f.component(&p, 1, 0).unwrap();
        prop_assert_eq!(sum.norm(), 0.0);
    }

    #[test]
    fn cyclic_words_are_conjugate(s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = mat_exp(&random_algebra_element(s1, 2, 0.7)).unwrap();
        let b = mat_exp(&random_algebra_element(s2, 2, 0.7)).unwrap();
        let env: BTreeMap<String, GroupElement> = [("a".into(), a), ("b".into(), b)].into();
        let w1 = word_holonomy(&env, &"a b a^-1 b^-1".parse::<Word>().unwrap()).unwrap();
        let w2 = word_holonomy(&env, &"b a^-1 b^-1 a".parse::<Word>().unwrap()).unwrap();
        prop_assert!(conjugacy_invariants(&w1).distance(&conjugacy_invariants(&w2)) <= 1e-10);
    }

    #[test]
    fn discrepancy_is_linear(c1 in -3.0f64..3.0, c2 in -3.0f64..3.0, a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let w1 = CircleForm::density(parse(&format!("{c1} + ({a})*cos(2*pi*x1)"), 1).unwrap());
        let w2 = CircleForm::density(parse(&format!("{c2} + ({b})*sin(4*pi*x1)"), 1).unwrap());
        let d = discrepancy_s1(&w1.clone().plus(&w2), 64).unwrap();
        let sum = discrepancy_s1(&w1, 64).unwrap() + discrepancy_s1(&w2, 64).unwrap();
        prop_assert!((d - sum).abs() <= 1e-12);
        prop_assert!((d - (c1 + c2)).abs() <= 1e-12);
    }

    #[test]
    fn cr_flatness_matches_cauchy_riemann_residual(
        coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3),
        anti in prop_oneof![Just(0.0), 0.1f64..1.0],
    ) {
        let z = "(x1 + i*x2)";
        let mut f = String::from("0");
        for (k, (re, im)) in coeffs.iter().enumerate() {
            f += &format!(" + ({re} + {im}*i)*{z}^{k}");
        }
        f += &format!(" + {anti}*exp((x1 - i*x2)/2)");
        let e = parse(&f, 2).unwrap();
        let curv = curvature(&preset_cr_connection(&e).unwrap());
        let (mut flat, mut cr) = (0.0f64, 0.0f64);
        for a in 0..7 {
            for b in 0..7 {
                let p = [-1.0 + a as f64 / 3.0, -1.0 + b as f64 / 3.0];
                flat = flat.max(curv.max_norm(&p).unwrap());
                let d = partial(&e, &p, 0).unwrap() + Complex64::i() * partial(&e, &p, 1).unwrap();
                cr = cr.max(d.norm());
            }
        }
        prop_assert_eq!(flat <= 1e-10, cr <= 1e-10, "flat {} cr {}", flat, cr);
        prop_assert_eq!(anti == 0.0, flat <= 1e-10);
    }

    #[test]
    fn alpha_class_ignores_integer_shifts(re in -5.0f64..5.0, im in -0.5f64..0.5, k in -4i32..4) {
        let alpha = Complex64::new(re, im);
        let shifted = alpha + k as f64;
        prop_assert!(same_alpha_class(alpha, shifted));
        let r = alpha_class(alpha).representative;
        prop_assert!((0.0..1.0).contains(&r.re));
        prop_assert!(same_alpha_class(r, alpha));
    }
}

#[test]
fn algebra_zero_exponentiates_to_identity() {
    assert_eq!(mat_exp(&AlgebraElement::zeros(3)).unwrap(), GroupElement::identity(3));
}
