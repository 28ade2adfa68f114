use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ConnectionForm, ExprMatrix, GaugeFunction};
use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::formlang::{parse, BinOp, Func, Node, ScalarExpr};

/// Connection built from a function `f` of `z = x1 + i x2`:
/// `A_1 = [[u, v], [-v, u]]`, `A_2 = [[v, -u], [u, v]]` with `u = Re f`,
/// `v = -Im f`. Both components lie in the commutative copy of `C` inside
/// the real 2x2 matrices, and the curvature is that copy's image of
/// `-i (df/dx1 + i df/dx2)`, so the connection is flat exactly when `f`
/// satisfies the Cauchy-Riemann equations.
pub fn preset_cr_connection(f: &ScalarExpr) -> Result<ConnectionForm> {
    if f.arity() != 2 {
        return Err(Error::Dimension(format!(
            "Cauchy-Riemann preset needs a function of x1, x2; got arity {}",
            f.arity()
        )));
    }
    let u = f.call(Func::Re);
    let v = f.call(Func::Im).neg();
    let a1 = ExprMatrix::new(2, vec![u.clone(), v.clone(), v.neg(), u.clone()])?;
    let a2 = ExprMatrix::new(2, vec![v.clone(), u.neg(), u, v])?;
    ConnectionForm::from_exprs(vec![a1, a2])
}

/// `A = alpha dz / z` in real coordinates, a flat `n = 1` connection on the
/// punctured plane with monodromy `exp(2 pi i alpha)` around the origin.
pub fn preset_alpha_connection(alpha: Complex64) -> ConnectionForm {
    let k = ScalarExpr::constant(alpha, 2);
    let a1 = k.mul(&parse("(x1 - i*x2)/(x1^2 + x2^2)", 2).expect("static expression"));
    let a2 = k.mul(&parse("(x2 + i*x1)/(x1^2 + x2^2)", 2).expect("static expression"));
    ConnectionForm::from_exprs(vec![
        ExprMatrix::new(1, vec![a1]).expect("1x1"),
        ExprMatrix::new(1, vec![a2]).expect("1x1"),
    ])
    .expect("consistent shapes")
}

/// `A_i(p) = xs[i]` everywhere.
pub fn preset_constant(xs: Vec<AlgebraElement>) -> Result<ConnectionForm> {
    ConnectionForm::constant(xs)
}

fn exponents(m: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|e: Vec<u32>| {
                let used: u32 = e.iter().sum();
                (0..=degree - used).map(move |k| {
                    let mut e = e.clone();
                    e.push(k);
                    e
                })
            })
            .collect();
    }
    out
}

fn monomial(coeff: Complex64, powers: &[u32]) -> Node {
    let mut node = Node::Const(coeff);
    for (k, &e) in powers.iter().enumerate() {
        let factor = match e {
            0 => continue,
            1 => Node::Var(k),
            e => Node::Binary(BinOp::Pow, Box::new(Node::Var(k)), Box::new(Node::Num(e as f64))),
        };
        node = Node::Binary(BinOp::Mul, Box::new(node), Box::new(factor));
    }
    node
}

fn random_polynomial(rng: &mut ChaCha8Rng, m: usize, degree: u32, scale: f64, offset: f64) -> ScalarExpr {
    let mut sum: Option<Node> = None;
    for powers in exponents(m, degree) {
        let mut c = Complex64::from_polar(scale * rng.random::<f64>(), std::f64::consts::TAU * rng.random::<f64>());
        if powers.iter().all(|&e| e == 0) {
            c += offset;
        }
        let term = monomial(c, &powers);
        sum = Some(match sum {
            None => term,
            Some(s) => Node::Binary(BinOp::Add, Box::new(s), Box::new(term)),
        });
    }
    ScalarExpr::from_node(sum.expect("at least the constant monomial"), m).expect("indices below m")
}

/// Polynomial connection of total degree at most `degree` in `m` variables
/// with `n x n` complex coefficients of modulus at most `scale`.
/// Deterministic in `seed`.
pub fn random_polynomial_connection(seed: u64, m: usize, n: usize, degree: u32, scale: f64) -> ConnectionForm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let comps = (0..m)
        .map(|_| {
            let entries = (0..n * n)
                .map(|_| random_polynomial(&mut rng, m, degree, scale, 0.0))
                .collect();
            ExprMatrix::new(n, entries).expect("n x n entries")
        })
        .collect();
    ConnectionForm::from_exprs(comps).expect("consistent shapes")
}

/// Quadratic gauge function `g = I + P(x)` whose entries of `P` are bounded
/// by `scale` on the cube `[-1, 1]^m`. For `n * scale < 1` it is invertible
/// there.
pub fn random_polynomial_gauge(seed: u64, m: usize, n: usize, scale: f64) -> GaugeFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_term = scale / exponents(m, 2).len() as f64;
    let entries = (0..n * n)
        .map(|k| {
            let diag = if k / n == k % n { 1.0 } else { 0.0 };
            random_polynomial(&mut rng, m, 2, per_term, diag)
        })
        .collect();
    GaugeFunction::new(ExprMatrix::new(n, entries).expect("n x n entries"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_count() {
        assert_eq!(exponents(3, 2).len(), 10);
        assert_eq!(exponents(2, 2).len(), 6);
        assert_eq!(exponents(1, 0).len(), 1);
    }

    #[test]
    fn random_connections_are_deterministic() {
        let a = random_polynomial_connection(9, 3, 2, 2, 1.0);
        let b = random_polynomial_connection(9, 3, 2, 2, 1.0);
        let c = random_polynomial_connection(10, 3, 2, 2, 1.0);
        let p = [0.3, 0.2, 0.1];
        assert_eq!(a.components(&p).unwrap(), b.components(&p).unwrap());
        assert_ne!(a.components(&p).unwrap(), c.components(&p).unwrap());
    }

    #[test]
    fn printed_polynomials_reparse() {
        let a = random_polynomial_connection(1, 2, 1, 2, 1.0);
        let p = [0.4, -0.6];
        let value = a.components(&p).unwrap()[0].entry(0, 0);
        let super::super::ConnRepr::Expr(ms) = &*a.repr else {
            unreachable!()
        };
        let text = ms[0].entry(0, 0).to_string();
        let again = parse(&text, 2).unwrap().eval_real(&p).unwrap();
        assert!((again - value).norm() < 1e-14, "{text}");
    }

    #[test]
    fn gauge_is_near_identity() {
        let g = random_polynomial_gauge(2, 2, 2, 0.3);
        for p in [[1.0, 1.0], [-1.0, 1.0], [0.0, 0.0]] {
            let v = g.eval(&p).unwrap();
            let id = crate::algebra::GroupElement::identity(2);
            assert!(crate::algebra::group_distance(&v, &id) <= 0.3 * 2.0);
        }
    }
}
