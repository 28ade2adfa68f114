use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use super::dual::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Re,
    Im,
    Conj,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Re,
        Func::Im,
        Func::Conj,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Re => "re",
            Func::Im => "im",
            Func::Conj => "conj",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression tree. Variables are zero-based; `x1` is `Var(0)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Non-negative real literal as written in source.
    Num(f64),
    /// Complex constant built programmatically; never produced by the parser.
    Const(Complex64),
    ImagUnit,
    Pi,
    Var(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed scalar expression over real chart coordinates `x1..xm`.
#[derive(Clone, PartialEq)]
pub struct ScalarExpr {
    root: Arc<Node>,
    arity: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{op}: domain error in `{expr}`")]
    Domain { op: &'static str, expr: String },
    #[error("expression expects {expected} coordinates, got {got}")]
    Arity { expected: usize, got: usize },
}

impl ScalarExpr {
    /// Wraps a tree, checking that every variable index is below `arity`.
    pub fn from_node(root: Node, arity: usize) -> Option<Self> {
        max_var(&root).is_none_or(|v| v < arity).then(|| Self {
            root: Arc::new(root),
            arity,
        })
    }

    pub fn constant(c: Complex64, arity: usize) -> Self {
        Self {
            root: Arc::new(Node::Const(c)),
            arity,
        }
    }

    pub fn real(x: f64, arity: usize) -> Self {
        Self::constant(Complex64::new(x, 0.0), arity)
    }

    /// Coordinate `x{k+1}`.
    pub fn var(k: usize, arity: usize) -> Self {
        assert!(k < arity, "variable index {k} outside arity {arity}");
        Self {
            root: Arc::new(Node::Var(k)),
            arity,
        }
    }

    pub fn node(&self) -> &Node {
        &self.root
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero_constant(&self) -> bool {
        match &*self.root {
            Node::Num(v) => *v == 0.0,
            Node::Const(c) => *c == Complex64::new(0.0, 0.0),
            _ => false,
        }
    }

    fn combine(&self, other: &Self, op: BinOp) -> Self {
        assert_eq!(self.arity, other.arity, "combining expressions of different arity");
        Self {
            root: Arc::new(Node::Binary(
                op,
                Box::new((*self.root).clone()),
                Box::new((*other.root).clone()),
            )),
            arity: self.arity,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, BinOp::Add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, BinOp::Sub)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.combine(other, BinOp::Mul)
    }

    pub fn div(&self, other: &Self) -> Self {
        self.combine(other, BinOp::Div)
    }

    pub fn pow(&self, other: &Self) -> Self {
        self.combine(other, BinOp::Pow)
    }

    pub fn neg(&self) -> Self {
        Self {
            root: Arc::new(Node::Neg(Box::new((*self.root).clone()))),
            arity: self.arity,
        }
    }

    pub fn call(&self, f: Func) -> Self {
        Self {
            root: Arc::new(Node::Call(f, Box::new((*self.root).clone()))),
            arity: self.arity,
        }
    }

    /// Fixes coordinate `k` to `value`; later coordinates shift down by one.
    pub fn restrict(&self, k: usize, value: f64) -> Self {
        assert!(k < self.arity);
        Self {
            root: Arc::new(substitute(&self.root, k, value)),
            arity: self.arity - 1,
        }
    }

    /// Evaluates at a point of the chart. Works for any [`Scalar`], so dual
    /// points yield exact derivatives.
    pub fn eval<T: Scalar>(&self, point: &[T]) -> Result<T, EvalError> {
        if point.len() != self.arity {
            return Err(EvalError::Arity {
                expected: self.arity,
                got: point.len(),
            });
        }
        eval_node(&self.root, point)
    }

    pub fn eval_real(&self, point: &[f64]) -> Result<Complex64, EvalError> {
        let p: Vec<Complex64> = point.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.eval(&p)
    }
}

impl fmt::Debug for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarExpr({self}; arity {})", self.arity)
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root, 0)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, self, 0)
    }
}

fn max_var(node: &Node) -> Option<usize> {
    match node {
        Node::Var(k) => Some(*k),
        Node::Num(_) | Node::Const(_) | Node::ImagUnit | Node::Pi => None,
        Node::Neg(a) | Node::Call(_, a) => max_var(a),
        Node::Binary(_, a, b) => match (max_var(a), max_var(b)) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, y) => x.or(y),
        },
    }
}

fn substitute(node: &Node, k: usize, value: f64) -> Node {
    match node {
        Node::Var(j) if *j == k => Node::Const(Complex64::new(value, 0.0)),
        Node::Var(j) if *j > k => Node::Var(j - 1),
        Node::Neg(a) => Node::Neg(Box::new(substitute(a, k, value))),
        Node::Call(f, a) => Node::Call(*f, Box::new(substitute(a, k, value))),
        Node::Binary(op, a, b) => Node::Binary(
            *op,
            Box::new(substitute(a, k, value)),
            Box::new(substitute(b, k, value)),
        ),
        other => other.clone(),
    }
}

// Binding strength used by the printer: + - < * / < unary - < ^ < atoms.
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;

type Writer<'a> = Box<dyn Fn(&mut fmt::Formatter<'_>) -> fmt::Result + 'a>;

fn write_node(f: &mut fmt::Formatter<'_>, node: &Node, min_prec: u8) -> fmt::Result {
    let (prec, body): (u8, Writer<'_>) = match node {
        Node::Num(v) => (u8::MAX, Box::new(move |f| write!(f, "{v}"))),
        Node::Const(c) => (
            u8::MAX,
            Box::new(move |f| {
                if c.im == 0.0 && c.re >= 0.0 {
                    write!(f, "{}", c.re)
                } else {
                    write!(f, "({}+{}*i)", c.re, c.im)
                }
            }),
        ),
        Node::ImagUnit => (u8::MAX, Box::new(|f| write!(f, "i"))),
        Node::Pi => (u8::MAX, Box::new(|f| write!(f, "pi"))),
        Node::Var(k) => (u8::MAX, Box::new(move |f| write!(f, "x{}", k + 1))),
        Node::Call(func, arg) => (
            u8::MAX,
            Box::new(move |f| {
                write!(f, "{}(", func.name())?;
                write_node(f, arg, 0)?;
                write!(f, ")")
            }),
        ),
        Node::Neg(a) => (
            PREC_NEG,
            Box::new(move |f| {
                write!(f, "-")?;
                write_node(f, a, PREC_NEG)
            }),
        ),
        Node::Binary(op, a, b) => {
            let (prec, sym, lmin, rmin) = match op {
                BinOp::Add => (PREC_ADD, " + ", PREC_ADD, PREC_MUL),
                BinOp::Sub => (PREC_ADD, " - ", PREC_ADD, PREC_MUL),
                BinOp::Mul => (PREC_MUL, "*", PREC_MUL, PREC_NEG),
                BinOp::Div => (PREC_MUL, "/", PREC_MUL, PREC_NEG),
                BinOp::Pow => (PREC_POW, "^", u8::MAX, PREC_NEG),
            };
            (
                prec,
                Box::new(move |f| {
                    write_node(f, a, lmin)?;
                    write!(f, "{sym}")?;
                    write_node(f, b, rmin)
                }),
            )
        }
    };
    if prec < min_prec {
        write!(f, "(")?;
        body(f)?;
        write!(f, ")")
    } else {
        body(f)
    }
}

fn domain(op: &'static str, node: &Node) -> EvalError {
    EvalError::Domain {
        op,
        expr: node.to_string(),
    }
}

fn integer_exponent(node: &Node) -> Option<i32> {
    match node {
        Node::Num(v) if v.fract() == 0.0 && *v <= 64.0 => Some(*v as i32),
        Node::Neg(inner) => integer_exponent(inner).map(|k| -k),
        _ => None,
    }
}

fn finite<T: Scalar>(value: T, op: &'static str, node: &Node) -> Result<T, EvalError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(domain(op, node))
    }
}

fn eval_node<T: Scalar>(node: &Node, point: &[T]) -> Result<T, EvalError> {
    let zero = Complex64::new(0.0, 0.0);
    match node {
        Node::Num(v) => Ok(T::real(*v)),
        Node::Const(c) => Ok(T::constant(*c)),
        Node::ImagUnit => Ok(T::constant(Complex64::new(0.0, 1.0))),
        Node::Pi => Ok(T::real(std::f64::consts::PI)),
        Node::Var(k) => Ok(point[*k].clone()),
        Node::Neg(a) => Ok(-eval_node(a, point)?),
        Node::Binary(op, a, b) => {
            let x = eval_node(a, point)?;
            match op {
                BinOp::Add => Ok(x + eval_node(b, point)?),
                BinOp::Sub => Ok(x - eval_node(b, point)?),
                BinOp::Mul => finite(x * eval_node(b, point)?, "multiplication", node),
                BinOp::Div => {
                    let y = eval_node(b, point)?;
                    if y.primal() == zero {
                        return Err(domain("division by zero", node));
                    }
                    finite(x / y, "division", node)
                }
                BinOp::Pow => {
                    if let Some(k) = integer_exponent(b) {
                        if k < 0 && x.primal() == zero {
                            return Err(domain("negative power of zero", node));
                        }
                        return finite(x.powi(k), "power", node);
                    }
                    let y = eval_node(b, point)?;
                    if x.primal() == zero {
                        return Err(domain("non-integer power of zero", node));
                    }
                    finite((y * x.ln()).exp(), "power", node)
                }
            }
        }
        Node::Call(func, a) => {
            let x = eval_node(a, point)?;
            let out = match func {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Log => {
                    if x.primal() == zero {
                        return Err(domain("log of zero", node));
                    }
                    x.ln()
                }
                Func::Sqrt => x.sqrt(),
                Func::Re => x.re(),
                Func::Im => x.im(),
                Func::Conj => x.conj(),
            };
            finite(out, func.name(), node)
        }
    }
}
