//! Scalar expression language for form components, paths and homotopies.
//!
//! Expressions are parsed once and evaluated over any [`Scalar`]. Feeding
//! dual numbers gives exact first partials, nested dual numbers exact second
//! partials. Coordinates are real; complex values enter through literals and
//! the constant `i`.

mod ast;
mod dual;
mod parse;

pub use ast::{BinOp, EvalError, Func, Node, ScalarExpr};
pub use dual::{seed, Dual, Scalar};
pub use parse::{parse, ParseError};

use num_complex::Complex64;

fn complex_point(point: &[f64]) -> Vec<Complex64> {
    point.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

pub fn eval(e: &ScalarExpr, point: &[f64]) -> Result<Complex64, EvalError> {
    e.eval_real(point)
}

/// `d e / d x_{k+1}` at `point`, exact to rounding.
pub fn partial(e: &ScalarExpr, point: &[f64], k: usize) -> Result<Complex64, EvalError> {
    let p = seed(&complex_point(point), k);
    Ok(e.eval(&p)?.tangent)
}

/// Mixed second partial. Indices are ordered before seeding so the result
/// is bitwise symmetric in `(k, l)`.
pub fn partial2(e: &ScalarExpr, point: &[f64], k: usize, l: usize) -> Result<Complex64, EvalError> {
    let (outer, inner) = if k <= l { (k, l) } else { (l, k) };
    let base = seed(&complex_point(point), inner);
    let p = seed(&base, outer);
    Ok(e.eval(&p)?.tangent.tangent)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn polynomial_value() {
        let e = parse("x1^2 + x2", 2).unwrap();
        assert_eq!(eval(&e, &[2.0, 3.0]).unwrap(), c(7.0));
    }

    #[test]
    fn dangling_operator_reports_offset() {
        match parse("x1 +", 1) {
            Err(ParseError::Syntax { offset, expected, .. }) => {
                assert_eq!(offset, 4);
                assert!(expected.contains(&"number"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn imaginary_unit() {
        let e = parse("i*x1", 1).unwrap();
        assert_eq!(eval(&e, &[2.0]).unwrap(), Complex64::new(0.0, 2.0));
    }

    #[test]
    fn unknown_identifier_and_range() {
        assert!(matches!(
            parse("y + 1", 1),
            Err(ParseError::UnknownIdentifier { offset: 0, .. })
        ));
        assert!(matches!(
            parse("x1 + x3", 2),
            Err(ParseError::VariableOutOfRange {
                offset: 5,
                index: 3,
                arity: 2
            })
        ));
        assert!(matches!(parse("sin x1", 1), Err(ParseError::Syntax { offset: 4, .. })));
        assert!(matches!(parse("(x1", 1), Err(ParseError::Syntax { offset: 3, .. })));
        assert!(matches!(parse("x1 x1", 1), Err(ParseError::Syntax { offset: 3, .. })));
    }

    #[test]
    fn precedence_and_associativity() {
        let at = |s: &str, p: &[f64]| eval(&parse(s, 2).unwrap(), p).unwrap();
        assert_eq!(at("-x1^2", &[3.0, 0.0]), c(-9.0));
        assert!((at("2^3^2", &[0.0, 0.0]) - c(512.0)).norm() < 1e-12);
        assert_eq!(at("8/4/2", &[0.0, 0.0]), c(1.0));
        assert_eq!(at("1 - 2 - 3", &[0.0, 0.0]), c(-4.0));
        assert_eq!(at("2*x1^-1", &[4.0, 0.0]), c(0.5));
        assert_eq!(at("1.5e2 + .5", &[0.0, 0.0]), c(150.5));
    }

    #[test]
    fn elementary_values() {
        assert_eq!(eval(&parse("exp(x1)", 1).unwrap(), &[0.0]).unwrap(), c(1.0));
        let s = eval(&parse("sin(x1)^2+cos(x1)^2", 1).unwrap(), &[1.3]).unwrap();
        assert!((s - c(1.0)).norm() <= 1e-15);
        let z = eval(&parse("conj(x1 + i*x2)", 2).unwrap(), &[1.0, 2.0]).unwrap();
        assert_eq!(z, Complex64::new(1.0, -2.0));
        let r = eval(&parse("re(exp(i*pi))", 1).unwrap(), &[0.0]).unwrap();
        assert!((r - c(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        match eval(&parse("1 + log(x1)", 1).unwrap(), &[0.0]) {
            Err(EvalError::Domain { expr, .. }) => assert_eq!(expr, "log(x1)"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            eval(&parse("1/(x1-x1)", 1).unwrap(), &[0.3]),
            Err(EvalError::Domain {
                op: "division by zero",
                ..
            })
        ));
        assert!(matches!(
            eval(&parse("x1", 1).unwrap(), &[0.3, 0.2]),
            Err(EvalError::Arity { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn first_partials() {
        let e = parse("x1*x2", 2).unwrap();
        assert_eq!(partial(&e, &[2.0, 3.0], 0).unwrap(), c(3.0));
        let k = parse("4.5 - i", 2).unwrap();
        assert_eq!(partial(&k, &[2.0, 3.0], 0).unwrap(), c(0.0));
    }

    fn central_difference(e: &ScalarExpr, p: &[f64], k: usize, h: f64) -> Complex64 {
        let mut hi = p.to_vec();
        let mut lo = p.to_vec();
        hi[k] += h;
        lo[k] -= h;
        (eval(e, &hi).unwrap() - eval(e, &lo).unwrap()) / (2.0 * h)
    }

    #[test]
    fn partial_matches_finite_difference() {
        let e = parse("exp(x1)*cos(x2)", 2).unwrap();
        let exact = partial(&e, &[1.0, 1.0], 1).unwrap();
        let fd = central_difference(&e, &[1.0, 1.0], 1, 1e-5);
        assert!((exact - fd).norm() <= 1e-9);
        assert!((exact - c(-std::f64::consts::E * 1f64.sin())).norm() <= 1e-12);
    }

    #[test]
    fn second_partials() {
        let sq = parse("x1^2", 1).unwrap();
        assert_eq!(partial2(&sq, &[0.4], 0, 0).unwrap(), c(2.0));
        let xy = parse("x1*x2", 2).unwrap();
        assert_eq!(partial2(&xy, &[0.4, -1.0], 0, 1).unwrap(), c(1.0));

        let e = parse("sin(x1*x2)", 2).unwrap();
        let p = [0.7, 0.4];
        let h = 1e-4;
        let f = |dx: f64, dy: f64| eval(&e, &[p[0] + dx, p[1] + dy]).unwrap();
        let fd = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
        let exact = partial2(&e, &p, 0, 1).unwrap();
        assert!((exact - fd).norm() <= 1e-8, "{exact} vs {fd}");
        assert_eq!(exact, partial2(&e, &p, 1, 0).unwrap());
    }

    #[test]
    fn restriction_fixes_a_coordinate() {
        let h = parse("x1 + 10*x2", 2).unwrap();
        let bottom = h.restrict(1, 0.0);
        let left = h.restrict(0, 0.5);
        assert_eq!(bottom.arity(), 1);
        assert_eq!(eval(&bottom, &[0.25]).unwrap(), c(0.25));
        assert_eq!(eval(&left, &[0.25]).unwrap(), c(3.0));
    }

    #[test]
    fn printing_reparses() {
        for s in [
            "-x1^2",
            "(x1 - x2) - (x1 + 2)",
            "2^-x1^3",
            "(-x1)^2",
            "a",
            "x1/(x2*x1)",
            "-(-x1)",
        ] {
            let Ok(e) = parse(s, 2) else { continue };
            let printed = e.to_string();
            assert_eq!(parse(&printed, 2).unwrap(), e, "{s} -> {printed}");
        }
    }
}
