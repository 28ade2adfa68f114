//! Algebra-valued differential forms on a single chart.
//!
//! A [`ConnectionForm`] is a 1-form `A = sum A_i dx_i`, a [`TwoForm`] has
//! components `w_ij` for `i < j` with `w_ji = -w_ij`. Both are backed by
//! expressions, so every derivative used below is exact.
//!
//! Conventions:
//! - curvature `F_ij = dA_i/dx_j - dA_j/dx_i + [A_i, A_j]`;
//! - gauge action `A'_i = g A_i g^-1 + (dg/dx_i) g^-1`, which makes path
//!   holonomy transform as `g(end) Hol g(start)^-1`;
//! - covariant derivative of a 2-form against a connection
//!   `C_ijk = cyclic sum of (dw_ij/dx_k + [w_ij, A_k])`, which vanishes on
//!   `(curvature(A), A)`.

mod mat;
mod presets;

use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{AlgebraElement, GroupElement};
use crate::error::{Error, Result};
use crate::formlang::{parse, seed, Dual, Scalar, ScalarExpr};

pub(crate) use mat::Mat;
pub use presets::{
    preset_alpha_connection, preset_constant, preset_cr_connection, random_polynomial_connection,
    random_polynomial_gauge,
};

/// Smallest `|det g|` accepted at an evaluation point.
pub const GAUGE_DET_FLOOR: f64 = 1e-9;

fn primal_point<T: Scalar>(p: &[T]) -> Vec<f64> {
    p.iter().map(|x| x.primal().re).collect()
}

fn complex_point(p: &[f64]) -> Vec<Complex64> {
    p.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

fn check_point(dim: usize, len: usize) -> Result<()> {
    if dim == len {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "form on a {dim}-dimensional chart evaluated at a point with {len} coordinates"
        )))
    }
}

/// Index of the pair `(i, j)`, `i < j < m`, in lexicographic order.
fn pair_index(m: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < m);
    i * (2 * m - i - 1) / 2 + (j - i - 1)
}

/// Axis indices `(i, j, k)` of a 3-form coefficient.
pub type Triple = (usize, usize, usize);

/// All pairs `i < j < m` in lexicographic order.
pub fn index_pairs(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect()
}

/// An `n x n` matrix of expressions sharing one arity.
#[derive(Clone, Debug, PartialEq)]
pub struct ExprMatrix {
    n: usize,
    arity: usize,
    entries: Vec<ScalarExpr>,
}

impl ExprMatrix {
    /// Row-major entries.
    pub fn new(n: usize, entries: Vec<ScalarExpr>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::Dimension(format!(
                "{} entries do not form a non-empty {n}x{n} matrix",
                entries.len()
            )));
        }
        let arity = entries[0].arity();
        if let Some(e) = entries.iter().find(|e| e.arity() != arity) {
            return Err(Error::Dimension(format!(
                "entry `{e}` has arity {}, expected {arity}",
                e.arity()
            )));
        }
        Ok(Self { n, arity, entries })
    }

    pub fn parse<S: AsRef<str>>(rows: &[Vec<S>], arity: usize) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::Dimension(format!(
                "matrix row has {} entries, expected {n}",
                r.len()
            )));
        }
        let entries = rows
            .iter()
            .flatten()
            .map(|s| parse(s.as_ref(), arity))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(n, entries)
    }

    pub fn constant(x: &AlgebraElement, arity: usize) -> Self {
        let n = x.dim();
        let entries = (0..n * n)
            .map(|k| ScalarExpr::constant(x.entry(k / n, k % n), arity))
            .collect();
        Self { n, arity, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn entry(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.entries[i * self.n + j]
    }

    pub(crate) fn eval_generic<T: Scalar>(&self, p: &[T]) -> Result<Mat<T>> {
        let data = self
            .entries
            .iter()
            .map(|e| e.eval(p))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Error::eval(e, &primal_point(p)))?;
        Ok(Mat::from_vec(self.n, data))
    }

    pub fn eval(&self, p: &[f64]) -> Result<AlgebraElement> {
        Ok(self.eval_generic(&complex_point(p))?.to_algebra())
    }
}

/// A pointwise-invertible matrix-valued function `g(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeFunction {
    entries: ExprMatrix,
}

impl GaugeFunction {
    pub fn new(entries: ExprMatrix) -> Self {
        Self { entries }
    }

    pub fn parse<S: AsRef<str>>(rows: &[Vec<S>], dim: usize) -> Result<Self> {
        Ok(Self::new(ExprMatrix::parse(rows, dim)?))
    }

    pub fn dim(&self) -> usize {
        self.entries.arity()
    }

    pub fn n(&self) -> usize {
        self.entries.n()
    }

    pub fn entries(&self) -> &ExprMatrix {
        &self.entries
    }

    /// `g(p)` and `g(p)^-1`.
    fn eval_pair<T: Scalar>(&self, p: &[T]) -> Result<(Mat<T>, Mat<T>)> {
        check_point(self.dim(), p.len())?;
        let g = self.entries.eval_generic(p)?;
        let det = g.primal().to_dmatrix().determinant().norm();
        let singular = || Error::SingularGauge {
            point: primal_point(p),
            det,
        };
        if det.is_nan() || det <= GAUGE_DET_FLOOR {
            return Err(singular());
        }
        let inv = g.inverse().ok_or_else(singular)?;
        Ok((g, inv))
    }

    pub fn eval(&self, p: &[f64]) -> Result<GroupElement> {
        let (g, _) = self.eval_pair(&complex_point(p))?;
        Ok(GroupElement::from_matrix_unchecked(g.to_dmatrix()))
    }
}

#[derive(Debug)]
enum ConnRepr {
    Expr(Vec<ExprMatrix>),
    Constant(Vec<AlgebraElement>),
    Gauged { gauge: GaugeFunction, base: ConnectionForm },
}

/// An algebra-valued 1-form `A = sum_i A_i dx_i` on an `m`-dimensional chart.
#[derive(Clone, Debug)]
pub struct ConnectionForm {
    dim: usize,
    n: usize,
    repr: Arc<ConnRepr>,
}

impl ConnectionForm {
    /// One expression matrix per chart coordinate.
    pub fn from_exprs(components: Vec<ExprMatrix>) -> Result<Self> {
        let dim = components.len();
        let Some(first) = components.first() else {
            return Err(Error::Dimension("connection needs at least one component".into()));
        };
        let n = first.n();
        for (i, c) in components.iter().enumerate() {
            if c.n() != n || c.arity() != dim {
                return Err(Error::Dimension(format!(
                    "component {} is {}x{} in {} variables, expected {n}x{n} in {dim}",
                    i + 1,
                    c.n(),
                    c.n(),
                    c.arity()
                )));
            }
        }
        Ok(Self {
            dim,
            n,
            repr: Arc::new(ConnRepr::Expr(components)),
        })
    }

    /// `components[i]` holds the rows of `A_{i+1}` as expression strings.
    pub fn parse<S: AsRef<str>>(components: &[Vec<Vec<S>>]) -> Result<Self> {
        let dim = components.len();
        let mats = components
            .iter()
            .map(|rows| ExprMatrix::parse(rows, dim))
            .collect::<Result<Vec<_>>>()?;
        Self::from_exprs(mats)
    }

    pub(crate) fn constant(values: Vec<AlgebraElement>) -> Result<Self> {
        let dim = values.len();
        let Some(first) = values.first() else {
            return Err(Error::Dimension("connection needs at least one component".into()));
        };
        let n = first.dim();
        if values.iter().any(|v| v.dim() != n) {
            return Err(Error::Dimension("constant components differ in size".into()));
        }
        Ok(Self {
            dim,
            n,
            repr: Arc::new(ConnRepr::Constant(values)),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub(crate) fn components_generic<T: Scalar>(&self, p: &[T]) -> Result<Vec<Mat<T>>> {
        check_point(self.dim, p.len())?;
        match &*self.repr {
            ConnRepr::Expr(ms) => ms.iter().map(|m| m.eval_generic(p)).collect(),
            ConnRepr::Constant(xs) => Ok(xs.iter().map(Mat::constant).collect()),
            ConnRepr::Gauged { gauge, base } => {
                let (g, ginv) = gauge.eval_pair(p)?;
                let a = base.components_generic(p)?;
                let mut out = Vec::with_capacity(self.dim);
                for (i, ai) in a.iter().enumerate() {
                    let dg = gauge.entries.eval_generic::<Dual<T>>(&seed(p, i))?.tangent();
                    out.push(g.mul(ai).add(&dg).mul(&ginv));
                }
                Ok(out)
            }
        }
    }

    /// `A_1(p), ..., A_m(p)`.
    pub fn components(&self, p: &[f64]) -> Result<Vec<AlgebraElement>> {
        Ok(self
            .components_generic(&complex_point(p))?
            .iter()
            .map(Mat::to_algebra)
            .collect())
    }

    /// `sum_i A_i(p) v_i`.
    pub fn contract(&self, p: &[f64], v: &[f64]) -> Result<AlgebraElement> {
        check_point(self.dim, v.len())?;
        let comps = self.components_generic(&complex_point(p))?;
        let mut acc = Mat::zeros(self.n);
        for (a, &vi) in comps.iter().zip(v) {
            if vi != 0.0 {
                acc = acc.add(&a.scale(&Complex64::new(vi, 0.0)));
            }
        }
        Ok(acc.to_algebra())
    }
}

#[derive(Debug)]
enum TwoRepr {
    /// Dense by `pair_index`; `None` is identically zero.
    Expr(Vec<Option<ExprMatrix>>),
    Curvature(ConnectionForm),
    Conjugated {
        gauge: GaugeFunction,
        base: TwoForm,
    },
}

/// An algebra-valued 2-form with components `w_ij`, `i < j`.
#[derive(Clone, Debug)]
pub struct TwoForm {
    dim: usize,
    n: usize,
    repr: Arc<TwoRepr>,
}

impl TwoForm {
    /// Components for pairs `i < j` (zero-based); omitted pairs are zero.
    /// A pair given as `(j, i)` with `j > i` contributes `-w`.
    pub fn from_exprs(dim: usize, n: usize, components: Vec<((usize, usize), ExprMatrix)>) -> Result<Self> {
        let mut dense: Vec<Option<ExprMatrix>> = vec![None; dim * dim.saturating_sub(1) / 2];
        for ((i, j), m) in components {
            if i == j || i >= dim || j >= dim {
                return Err(Error::Dimension(format!(
                    "2-form component ({}, {}) invalid on a {dim}-dimensional chart",
                    i + 1,
                    j + 1
                )));
            }
            if m.n() != n || m.arity() != dim {
                return Err(Error::Dimension(format!(
                    "2-form component ({}, {}) is {}x{} in {} variables, expected {n}x{n} in {dim}",
                    i + 1,
                    j + 1,
                    m.n(),
                    m.n(),
                    m.arity()
                )));
            }
            let (lo, hi, m) = if i < j {
                (i, j, m)
            } else {
                let negated = m.entries.iter().map(ScalarExpr::neg).collect();
                (j, i, ExprMatrix::new(n, negated)?)
            };
            let slot = &mut dense[pair_index(dim, lo, hi)];
            if slot.is_some() {
                return Err(Error::InvalidArgument(format!(
                    "2-form component ({}, {}) given twice",
                    lo + 1,
                    hi + 1
                )));
            }
            *slot = Some(m);
        }
        if dim == 0 || n == 0 {
            return Err(Error::Dimension("2-form needs a positive dimension".into()));
        }
        Ok(Self {
            dim,
            n,
            repr: Arc::new(TwoRepr::Expr(dense)),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Components in the order of [`index_pairs`].
    pub(crate) fn components_generic<T: Scalar>(&self, p: &[T]) -> Result<Vec<Mat<T>>> {
        check_point(self.dim, p.len())?;
        match &*self.repr {
            TwoRepr::Expr(dense) => dense
                .iter()
                .map(|m| match m {
                    Some(m) => m.eval_generic(p),
                    None => Ok(Mat::zeros(self.n)),
                })
                .collect(),
            TwoRepr::Curvature(a) => curvature_generic(a, p),
            TwoRepr::Conjugated { gauge, base } => {
                let (g, ginv) = gauge.eval_pair(p)?;
                Ok(base
                    .components_generic(p)?
                    .iter()
                    .map(|w| g.mul(w).mul(&ginv))
                    .collect())
            }
        }
    }

    /// `w_ij(p)` for any pair, with `w_ii = 0` and `w_ji = -w_ij`.
    pub fn component(&self, p: &[f64], i: usize, j: usize) -> Result<AlgebraElement> {
        if i >= self.dim || j >= self.dim {
            return Err(Error::Dimension(format!(
                "index out of range for a {}-form chart",
                self.dim
            )));
        }
        let comps = self.components_generic(&complex_point(p))?;
        Ok(signed(&comps, self.dim, self.n, i, j).to_algebra())
    }

    /// `((i, j), w_ij(p))` for all `i < j`.
    pub fn components(&self, p: &[f64]) -> Result<Vec<((usize, usize), AlgebraElement)>> {
        let comps = self.components_generic(&complex_point(p))?;
        Ok(index_pairs(self.dim)
            .into_iter()
            .zip(comps.iter().map(Mat::to_algebra))
            .collect())
    }

    /// `sum_{i<j} w_ij(p) (u_i v_j - u_j v_i)`.
    pub fn contract(&self, p: &[f64], u: &[f64], v: &[f64]) -> Result<AlgebraElement> {
        check_point(self.dim, u.len())?;
        check_point(self.dim, v.len())?;
        let comps = self.components_generic(&complex_point(p))?;
        let mut acc = Mat::zeros(self.n);
        for ((i, j), w) in index_pairs(self.dim).into_iter().zip(&comps) {
            let area = u[i] * v[j] - u[j] * v[i];
            if area != 0.0 {
                acc = acc.add(&w.scale(&Complex64::new(area, 0.0)));
            }
        }
        Ok(acc.to_algebra())
    }

    /// Largest Frobenius norm over all components at `p`.
    pub fn max_norm(&self, p: &[f64]) -> Result<f64> {
        let comps = self.components_generic(&complex_point(p))?;
        Ok(comps.iter().map(Mat::norm).fold(0.0, f64::max))
    }
}

fn signed<T: Scalar>(comps: &[Mat<T>], m: usize, n: usize, i: usize, j: usize) -> Mat<T> {
    use std::cmp::Ordering::*;
    match i.cmp(&j) {
        Less => comps[pair_index(m, i, j)].clone(),
        Greater => comps[pair_index(m, j, i)].map(|x| -x.clone()),
        Equal => Mat::zeros(n),
    }
}

fn curvature_generic<T: Scalar>(a: &ConnectionForm, p: &[T]) -> Result<Vec<Mat<T>>> {
    let m = a.dim();
    let mut values = Vec::new();
    // d[j][i] = dA_i/dx_j
    let mut d = Vec::with_capacity(m);
    for j in 0..m {
        let c = a.components_generic::<Dual<T>>(&seed(p, j))?;
        if j == 0 {
            values = c.iter().map(Mat::value).collect();
        }
        d.push(c.iter().map(Mat::tangent).collect::<Vec<_>>());
    }
    Ok(index_pairs(m)
        .into_iter()
        .map(|(i, j)| d[j][i].sub(&d[i][j]).add(&values[i].commutator(&values[j])))
        .collect())
}

/// `F_ij = dA_i/dx_j - dA_j/dx_i + [A_i, A_j]`.
pub fn curvature(a: &ConnectionForm) -> TwoForm {
    TwoForm {
        dim: a.dim,
        n: a.n,
        repr: Arc::new(TwoRepr::Curvature(a.clone())),
    }
}

/// The pair `(w, A)` whose cyclic covariant derivative is [`ThreeFormCoefficient`].
#[derive(Clone, Debug)]
pub struct ThreeFormCoefficient {
    omega: TwoForm,
    a: ConnectionForm,
}

fn dim_match(what: &str, a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "{what}: chart/algebra dimensions {}/{} vs {}/{}",
            a.0, a.1, b.0, b.1
        )))
    }
}

pub fn covariant_ext_derivative(omega: &TwoForm, a: &ConnectionForm) -> Result<ThreeFormCoefficient> {
    dim_match("covariant derivative", (omega.dim, omega.n), (a.dim, a.n))?;
    if a.dim < 3 {
        return Err(Error::Dimension(format!(
            "covariant exterior derivative of a 2-form needs at least 3 coordinates, got {}",
            a.dim
        )));
    }
    Ok(ThreeFormCoefficient {
        omega: omega.clone(),
        a: a.clone(),
    })
}

impl ThreeFormCoefficient {
    pub fn dim(&self) -> usize {
        self.a.dim
    }

    /// `C_ijk(p)`.
    pub fn component(&self, p: &[f64], i: usize, j: usize, k: usize) -> Result<AlgebraElement> {
        let m = self.dim();
        if i >= m || j >= m || k >= m {
            return Err(Error::Dimension(format!(
                "index out of range for a {m}-dimensional chart"
            )));
        }
        let pc = complex_point(p);
        let a = self.a.components_generic(&pc)?;
        let (m, n) = (self.omega.dim, self.omega.n);
        // derivs[l] = dw/dx_l, computed once per distinct index
        let mut derivs: Vec<Option<Vec<Mat<Complex64>>>> = vec![None; m];
        let mut w = Vec::new();
        for l in [i, j, k] {
            if derivs[l].is_none() {
                let wl = self.omega.components_generic::<Dual<Complex64>>(&seed(&pc, l))?;
                if w.is_empty() {
                    w = wl.iter().map(Mat::value).collect();
                }
                derivs[l] = Some(wl.iter().map(Mat::tangent).collect());
            }
        }
        let dw = |l: usize, p: usize, q: usize| signed(derivs[l].as_ref().unwrap(), m, n, p, q);
        let w_at = |p: usize, q: usize| signed(&w, m, n, p, q);
        let total = dw(k, i, j)
            .add(&dw(j, k, i))
            .add(&dw(i, j, k))
            .add(&w_at(i, j).commutator(&a[k]))
            .add(&w_at(k, i).commutator(&a[j]))
            .add(&w_at(j, k).commutator(&a[i]));
        Ok(total.to_algebra())
    }

    /// `((i, j, k), C_ijk(p))` for all `i < j < k`.
    pub fn components(&self, p: &[f64]) -> Result<Vec<(Triple, AlgebraElement)>> {
        let m = self.dim();
        let mut out = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                for k in j + 1..m {
                    out.push(((i, j, k), self.component(p, i, j, k)?));
                }
            }
        }
        Ok(out)
    }

    pub fn max_norm(&self, p: &[f64]) -> Result<f64> {
        Ok(self.components(p)?.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max))
    }
}

/// `A'_i = g A_i g^-1 + (dg/dx_i) g^-1`.
pub fn gauge_transform_connection(g: &GaugeFunction, a: &ConnectionForm) -> Result<ConnectionForm> {
    dim_match("gauge transform", (g.dim(), g.n()), (a.dim, a.n))?;
    Ok(ConnectionForm {
        dim: a.dim,
        n: a.n,
        repr: Arc::new(ConnRepr::Gauged {
            gauge: g.clone(),
            base: a.clone(),
        }),
    })
}

/// `F' = g F g^-1` componentwise.
pub fn gauge_transform_curvature(g: &GaugeFunction, f: &TwoForm) -> Result<TwoForm> {
    dim_match("gauge transform", (g.dim(), g.n()), (f.dim, f.n))?;
    Ok(TwoForm {
        dim: f.dim,
        n: f.n,
        repr: Arc::new(TwoRepr::Conjugated {
            gauge: g.clone(),
            base: f.clone(),
        }),
    })
}

/// An ordered flag of forms of descending degree.
#[derive(Clone, Debug)]
pub enum FormFlag {
    Degree1(ConnectionForm),
    Degree2 { top: TwoForm, lower: ConnectionForm },
}

impl FormFlag {
    pub fn degree2(top: TwoForm, lower: ConnectionForm) -> Result<Self> {
        dim_match("form flag", (top.dim, top.n), (lower.dim, lower.n))?;
        Ok(FormFlag::Degree2 { top, lower })
    }

    /// `(curvature(A), A)`.
    pub fn curvature_flag(a: &ConnectionForm) -> Self {
        FormFlag::Degree2 {
            top: curvature(a),
            lower: a.clone(),
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            FormFlag::Degree1(_) => 1,
            FormFlag::Degree2 { .. } => 2,
        }
    }

    pub fn connection(&self) -> &ConnectionForm {
        match self {
            FormFlag::Degree1(a) => a,
            FormFlag::Degree2 { lower, .. } => lower,
        }
    }

    pub fn dim(&self) -> usize {
        self.connection().dim()
    }

    pub fn n(&self) -> usize {
        self.connection().n()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::commutator;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn xy() -> (AlgebraElement, AlgebraElement) {
        (
            AlgebraElement::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap(),
            AlgebraElement::from_real_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap(),
        )
    }

    #[test]
    fn pair_indexing_is_lexicographic() {
        let pairs = index_pairs(4);
        for (k, &(i, j)) in pairs.iter().enumerate() {
            assert_eq!(pair_index(4, i, j), k);
        }
        assert_eq!(pairs.len(), 6);
    }

    #[test]
    fn constant_curvature_is_commutator() {
        let (x, y) = xy();
        let a = preset_constant(vec![x, y]).unwrap();
        let f = curvature(&a);
        let f12 = f.component(&[0.3, -0.2], 0, 1).unwrap();
        let expected = AlgebraElement::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert_eq!(f12, expected);
        assert_eq!(f.component(&[0.3, -0.2], 1, 0).unwrap(), -&expected);
        assert_eq!(f.component(&[0.3, -0.2], 1, 1).unwrap(), AlgebraElement::zeros(2));
    }

    #[test]
    fn exact_abelian_form_is_flat() {
        // A = d(x1^2 x2 + sin x2)
        let a = ConnectionForm::parse(&[vec![vec!["2*x1*x2"]], vec![vec!["x1^2 + cos(x2)"]]]).unwrap();
        assert_eq!(curvature(&a).component(&[0.7, -1.1], 0, 1).unwrap().norm(), 0.0);
    }

    #[test]
    fn curvature_of_x2_dx1() {
        let a = ConnectionForm::parse(&[vec![vec!["x2"]], vec![vec!["0"]]]).unwrap();
        let f = curvature(&a).component(&[0.1, 0.2], 0, 1).unwrap();
        assert_eq!(f.entry(0, 0), c(1.0));
    }

    #[test]
    fn cr_preset_flatness() {
        for f in ["x1 + i*x2", "(x1 + i*x2)^2", "exp(x1 + i*x2)"] {
            let a = preset_cr_connection(&parse(f, 2).unwrap()).unwrap();
            assert!(curvature(&a).max_norm(&[1.0, 1.0]).unwrap() <= 1e-12, "{f}");
        }
        let a = preset_cr_connection(&parse("x1 - i*x2", 2).unwrap()).unwrap();
        assert!(curvature(&a).max_norm(&[0.0, 0.0]).unwrap() > 0.1);
    }

    #[test]
    fn cr_preset_matrix_pattern() {
        let a = preset_cr_connection(&parse("x1 + i*x2", 2).unwrap()).unwrap();
        let comps = a.components(&[0.5, 0.25]).unwrap();
        // u = Re f, v = -Im f
        let (u, v) = (0.5, -0.25);
        assert_eq!(
            comps[0],
            AlgebraElement::from_real_rows(&[vec![u, v], vec![-v, u]]).unwrap()
        );
        assert_eq!(
            comps[1],
            AlgebraElement::from_real_rows(&[vec![v, -u], vec![u, v]]).unwrap()
        );
    }

    #[test]
    fn alpha_preset_is_flat_off_origin() {
        let a = preset_alpha_connection(Complex64::new(0.3, 0.7));
        for p in [[1.0, 0.0], [-0.3, 0.8], [2.0, -1.5]] {
            assert!(curvature(&a).max_norm(&p).unwrap() <= 1e-12);
        }
        let err = a.components(&[0.0, 0.0]).unwrap_err();
        assert!(err.is_domain());
        let zero = preset_alpha_connection(c(0.0));
        assert_eq!(zero.components(&[0.4, 0.1]).unwrap()[0].norm(), 0.0);
    }

    #[test]
    fn bianchi_vanishes_on_curvature() {
        for s in 0..5 {
            let a = random_polynomial_connection(s, 3, 2, 2, 1.0);
            let cov = covariant_ext_derivative(&curvature(&a), &a).unwrap();
            let r = cov.max_norm(&[0.3, -0.5, 0.8]).unwrap();
            assert!(r <= 1e-10, "seed {s}: {r}");
        }
    }

    #[test]
    fn bianchi_single_term() {
        let n = |s: &str| ExprMatrix::parse(&[vec![s]], 3).unwrap();
        let w = TwoForm::from_exprs(3, 1, vec![((0, 1), n("x3"))]).unwrap();
        let a = ConnectionForm::parse(&[vec![vec!["0"]], vec![vec!["0"]], vec![vec!["0"]]]).unwrap();
        let cov = covariant_ext_derivative(&w, &a).unwrap();
        assert_eq!(cov.component(&[0.1, 0.2, 0.3], 0, 1, 2).unwrap().entry(0, 0), c(1.0));
        let a2 = ConnectionForm::parse(&[vec![vec!["0"]], vec![vec!["0"]]]).unwrap();
        let w2 = TwoForm::from_exprs(2, 1, vec![]).unwrap();
        assert!(matches!(covariant_ext_derivative(&w2, &a2), Err(Error::Dimension(_))));
    }

    #[test]
    fn covariant_derivative_is_antisymmetric() {
        let a = random_polynomial_connection(11, 3, 2, 2, 0.5);
        let b = random_polynomial_connection(12, 3, 2, 2, 0.5);
        // a generic 2-form that is not a curvature of `a`
        let cov = covariant_ext_derivative(&curvature(&b), &a).unwrap();
        let p = [0.2, 0.1, -0.4];
        let c012 = cov.component(&p, 0, 1, 2).unwrap();
        assert!(c012.norm() > 1e-3);
        assert!((&cov.component(&p, 1, 0, 2).unwrap() + &c012).norm() < 1e-12);
        assert!((&cov.component(&p, 1, 2, 0).unwrap() - &c012).norm() < 1e-12);
    }

    #[test]
    fn gauge_identity_and_pure_gauge() {
        let a = random_polynomial_connection(3, 2, 2, 2, 1.0);
        let id = GaugeFunction::parse(&[vec!["1", "0"], vec!["0", "1"]], 2).unwrap();
        let ga = gauge_transform_connection(&id, &a).unwrap();
        let p = [0.2, 0.9];
        for (x, y) in a.components(&p).unwrap().iter().zip(ga.components(&p).unwrap()) {
            assert!((x - &y).norm() < 1e-15);
        }

        let zero = ConnectionForm::parse(&[vec![vec!["0"]], vec![vec!["0"]]]).unwrap();
        let g = GaugeFunction::parse(&[vec!["exp(x1*x2 + sin(x1))"]], 2).unwrap();
        let ga = gauge_transform_connection(&g, &zero).unwrap().components(&p).unwrap();
        let (x, y) = (p[0], p[1]);
        assert!((ga[0].entry(0, 0) - c(y + x.cos())).norm() < 1e-14);
        assert!((ga[1].entry(0, 0) - c(x)).norm() < 1e-14);
    }

    #[test]
    fn gauge_consistency_of_curvature() {
        let a = random_polynomial_connection(5, 2, 2, 2, 1.0);
        let g = random_polynomial_gauge(6, 2, 2, 0.3);
        let lhs = curvature(&gauge_transform_connection(&g, &a).unwrap());
        let rhs = gauge_transform_curvature(&g, &curvature(&a)).unwrap();
        for p in [[0.1, 0.2], [-0.5, 0.7], [0.9, -0.9]] {
            let d = &lhs.component(&p, 0, 1).unwrap() - &rhs.component(&p, 0, 1).unwrap();
            assert!(d.norm() <= 1e-9, "{}", d.norm());
        }
    }

    #[test]
    fn singular_gauge_is_reported() {
        let g = GaugeFunction::parse(&[vec!["x1"]], 1).unwrap();
        assert!(matches!(g.eval(&[0.0]), Err(Error::SingularGauge { .. })));
    }

    #[test]
    fn constant_connection_curvature_and_commuting() {
        let (x, y) = xy();
        let a = preset_constant(vec![x.clone(), y.clone(), x.clone()]).unwrap();
        let f = curvature(&a);
        assert_eq!(f.component(&[0.0; 3], 0, 1).unwrap(), commutator(&x, &y).unwrap());
        assert_eq!(f.component(&[0.0; 3], 0, 2).unwrap().norm(), 0.0);
    }

    #[test]
    fn two_form_contraction() {
        let n = |s: &str| ExprMatrix::parse(&[vec![s]], 2).unwrap();
        let w = TwoForm::from_exprs(2, 1, vec![((1, 0), n("2"))]).unwrap();
        // w_12 = -2
        let v = w.contract(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 0.5]).unwrap();
        assert_eq!(v.entry(0, 0), c(-1.0));
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        let bad = ConnectionForm::parse(&[vec![vec!["x1", "0"], vec!["0", "1"]], vec![vec!["x2"]]]);
        assert!(matches!(bad, Err(Error::Dimension(_))));
        assert!(matches!(
            ConnectionForm::parse(&[vec![vec!["x3"]], vec![vec!["1"]]]),
            Err(Error::Parse(_))
        ));
    }
}
