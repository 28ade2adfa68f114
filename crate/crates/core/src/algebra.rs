//! Dense complex matrix algebra `g` and its group `G = exp g`.
//!
//! Every algebra in this crate is a concrete `n x n` complex matrix algebra.
//! Real algebras embed as complex matrices with zero imaginary parts.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Below this Frobenius distance from the identity `mat_log` is defined.
pub const LOG_DOMAIN_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is singular (|det| = {det:e})")]
    Singular { det: f64 },
    #[error(
        "logarithm requested at distance {distance:.3} from the identity (limit {LOG_DOMAIN_RADIUS}); refine the mesh"
    )]
    LogDomain { distance: f64 },
}

/// An element of the matrix Lie algebra.
#[derive(Clone, PartialEq)]
pub struct AlgebraElement(DMatrix<Complex64>);

/// An invertible matrix in `G = exp g`.
#[derive(Clone, PartialEq)]
pub struct GroupElement(DMatrix<Complex64>);

fn check_square_finite(m: &DMatrix<Complex64>) -> Result<(), AlgebraError> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(AlgebraError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(AlgebraError::NonFinite);
    }
    Ok(())
}

fn same_dim(a: usize, b: usize) -> Result<(), AlgebraError> {
    if a == b {
        Ok(())
    } else {
        Err(AlgebraError::DimensionMismatch { left: a, right: b })
    }
}

impl AlgebraElement {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self, AlgebraError> {
        check_square_finite(&matrix)?;
        Ok(Self(matrix))
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<Complex64>) -> Self {
        Self(matrix)
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    /// Builds an element from row-major complex entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, AlgebraError> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(AlgebraError::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Builds an element from row-major real entries.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self, AlgebraError> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Result<Self, AlgebraError> {
        let n = diag.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl GroupElement {
    /// Wraps an invertible matrix. Invertibility is checked against
    /// `|det| > 1e-12 * ||M||^n`.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self, AlgebraError> {
        check_square_finite(&matrix)?;
        let n = matrix.nrows() as i32;
        let det = matrix.determinant().norm();
        if det <= 1e-12 * matrix.norm().powi(n) {
            return Err(AlgebraError::Singular { det });
        }
        Ok(Self(matrix))
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<Complex64>) -> Self {
        Self(matrix)
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, AlgebraError> {
        Self::new(AlgebraElement::from_rows(rows)?.0)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self, AlgebraError> {
        Self::new(AlgebraElement::from_real_rows(rows)?.0)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn determinant(&self) -> Complex64 {
        self.0.determinant()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn inverse(&self) -> Result<Self, AlgebraError> {
        self.0
            .clone()
            .try_inverse()
            .filter(|m| m.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
            .map(Self)
            .ok_or_else(|| AlgebraError::Singular {
                det: self.0.determinant().norm(),
            })
    }

    /// Eigenvalues from the complex Schur form, sorted by real then imaginary part.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let mut eig: Vec<Complex64> = match self.0.clone().schur().eigenvalues() {
            Some(v) => v.iter().copied().collect(),
            None => self.0.clone().schur().unpack().1.diagonal().iter().copied().collect(),
        };
        eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        eig
    }

    /// Reinterprets the group element as a matrix in the enveloping algebra.
    pub fn as_algebra(&self) -> AlgebraElement {
        AlgebraElement(self.0.clone())
    }
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgebraElement{}", MatrixDisplay(&self.0))
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupElement{}", MatrixDisplay(&self.0))
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        MatrixDisplay(&self.0).fmt(f)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        MatrixDisplay(&self.0).fmt(f)
    }
}

/// Compact row-major rendering, `[[a, b], [c, d]]`.
pub struct MatrixDisplay<'a>(pub &'a DMatrix<Complex64>);

impl fmt::Display for MatrixDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.0;
        write!(f, "[")?;
        for i in 0..m.nrows() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..m.ncols() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", format_complex(m[(i, j)]))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:.12}", z.re)
    } else if z.im < 0.0 {
        format!("{:.12}-{:.12}i", z.re, -z.im)
    } else {
        format!("{:.12}+{:.12}i", z.re, z.im)
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        AlgebraElement(&self.0 + &rhs.0)
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        AlgebraElement(&self.0 - &rhs.0)
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        AlgebraElement(-&self.0)
    }
}

impl Mul<f64> for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: f64) -> AlgebraElement {
        AlgebraElement(&self.0 * Complex64::new(rhs, 0.0))
    }
}

impl Mul for &GroupElement {
    type Output = GroupElement;
    fn mul(self, rhs: &GroupElement) -> GroupElement {
        GroupElement(&self.0 * &rhs.0)
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;
    fn mul(self, rhs: GroupElement) -> GroupElement {
        GroupElement(self.0 * rhs.0)
    }
}

/// Matrix exponential (nalgebra's Padé scaling and squaring).
pub fn mat_exp(x: &AlgebraElement) -> Result<GroupElement, AlgebraError> {
    if !x.is_finite() {
        return Err(AlgebraError::NonFinite);
    }
    let e = x.0.clone().exp();
    if e.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(AlgebraError::NonFinite);
    }
    Ok(GroupElement(e))
}

/// Principal logarithm of a group element close to the identity.
///
/// Only defined for `||G - I||_F < 0.5`. One Newton (Denman-Beavers) square
/// root brings the argument closer to the identity, the Mercator series is
/// summed there, and the result is doubled.
pub fn mat_log(g: &GroupElement) -> Result<AlgebraElement, AlgebraError> {
    let n = g.dim();
    let id = DMatrix::<Complex64>::identity(n, n);
    let distance = (&g.0 - &id).norm();
    if !distance.is_finite() {
        return Err(AlgebraError::NonFinite);
    }
    if distance >= LOG_DOMAIN_RADIUS {
        return Err(AlgebraError::LogDomain { distance });
    }
    if n == 1 {
        return Ok(AlgebraElement(DMatrix::from_element(1, 1, g.0[(0, 0)].ln())));
    }

    let root = sqrt_newton(&g.0)?;
    let e = root - &id;
    let mut sum = DMatrix::<Complex64>::zeros(n, n);
    let mut power = id.clone();
    for k in 1..=80 {
        power = &power * &e;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let term = &power * Complex64::new(sign / k as f64, 0.0);
        sum += &term;
        if term.norm() <= 1e-18 * sum.norm().max(1e-300) {
            break;
        }
    }
    Ok(AlgebraElement(sum * Complex64::new(2.0, 0.0)))
}

/// Denman-Beavers iteration for the principal square root.
fn sqrt_newton(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>, AlgebraError> {
    let n = a.nrows();
    let half = Complex64::new(0.5, 0.0);
    let mut y = a.clone();
    let mut z = DMatrix::<Complex64>::identity(n, n);
    for _ in 0..60 {
        let y_inv = y.clone().try_inverse().ok_or(AlgebraError::Singular { det: 0.0 })?;
        let z_inv = z.clone().try_inverse().ok_or(AlgebraError::Singular { det: 0.0 })?;
        let y_next = (&y + z_inv) * half;
        let z_next = (&z + y_inv) * half;
        let step = (&y_next - &y).norm();
        y = y_next;
        z = z_next;
        if step <= 1e-16 * y.norm() {
            break;
        }
    }
    Ok(y)
}

/// `XY - YX`.
pub fn commutator(x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
    same_dim(x.dim(), y.dim())?;
    Ok(AlgebraElement(&x.0 * &y.0 - &y.0 * &x.0))
}

/// `g X g^-1`.
pub fn conjugate(g: &GroupElement, x: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
    same_dim(g.dim(), x.dim())?;
    let inv = g.inverse()?;
    Ok(AlgebraElement(&g.0 * &x.0 * inv.0))
}

/// Frobenius distance between two group elements of the same dimension.
pub fn group_distance(g: &GroupElement, h: &GroupElement) -> f64 {
    assert_eq!(g.dim(), h.dim(), "group_distance on mismatched dimensions");
    (&g.0 - &h.0).norm()
}

/// Deterministic pseudo-random algebra element with entry moduli at most `scale`.
pub fn random_algebra_element(seed: u64, n: usize, scale: f64) -> AlgebraElement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    AlgebraElement(DMatrix::from_fn(n, n, |_, _| {
        let r = scale * rng.random::<f64>();
        let theta = std::f64::consts::TAU * rng.random::<f64>();
        Complex64::from_polar(r, theta)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn mat(rows: &[&[f64]]) -> AlgebraElement {
        AlgebraElement::from_real_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = mat_exp(&AlgebraElement::zeros(3)).unwrap();
        assert_eq!(e, GroupElement::identity(3));
    }

    #[test]
    fn exp_of_diagonal_logs() {
        let x = AlgebraElement::from_diagonal(&[c(2f64.ln()), c(3f64.ln())]).unwrap();
        let e = mat_exp(&x).unwrap();
        let want = GroupElement::from_real_rows(&[vec![2.0, 0.0], vec![0.0, 3.0]]).unwrap();
        assert!(group_distance(&e, &want) <= 1e-12 * 3.0);
    }

    #[test]
    fn exp_of_nilpotent_terminates() {
        let e = mat_exp(&mat(&[&[0.0, 1.0], &[0.0, 0.0]])).unwrap();
        let want = GroupElement::from_real_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert!(group_distance(&e, &want) <= 1e-15);
    }

    #[test]
    fn exp_rejects_non_finite() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(f64::NAN, 0.0);
        let x = AlgebraElement::from_matrix_unchecked(m);
        assert_eq!(mat_exp(&x), Err(AlgebraError::NonFinite));
    }

    #[test]
    fn exp_matches_rotation_closed_form() {
        // exp(t J) for J = [[0,-1],[1,0]] is a rotation by t.
        let t = 7.3;
        let e = mat_exp(&mat(&[&[0.0, -t], &[t, 0.0]])).unwrap();
        let want = GroupElement::from_real_rows(&[vec![t.cos(), -t.sin()], vec![t.sin(), t.cos()]]).unwrap();
        assert!(group_distance(&e, &want) <= 1e-12 * 2f64.sqrt());
    }

    #[test]
    fn log_of_identity_is_zero() {
        let l = mat_log(&GroupElement::identity(2)).unwrap();
        assert!(l.norm() == 0.0);
    }

    #[test]
    fn log_inverts_exp_near_identity() {
        for seed in 0..20 {
            let x = random_algebra_element(seed, 3, 1.0);
            let x = x.scale(c(0.1 / x.norm()));
            let back = mat_log(&mat_exp(&x).unwrap()).unwrap();
            assert!((&back - &x).norm() <= 1e-13, "seed {seed}");
        }
    }

    #[test]
    fn log_refuses_far_from_identity() {
        let g = GroupElement::from_real_rows(&[vec![1.9, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(mat_log(&g), Err(AlgebraError::LogDomain { .. })));
    }

    #[test]
    fn exp_of_log_round_trip() {
        for seed in 0..20 {
            let x = random_algebra_element(100 + seed, 2, 1.0);
            let x = x.scale(c(0.3 / x.norm()));
            let g = mat_exp(&x).unwrap();
            if (g.matrix() - DMatrix::identity(2, 2)).norm() >= LOG_DOMAIN_RADIUS {
                continue;
            }
            let again = mat_exp(&mat_log(&g).unwrap()).unwrap();
            assert!(group_distance(&again, &g) <= 1e-11 * g.norm());
        }
    }

    #[test]
    fn commutator_examples() {
        let x = mat(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let y = mat(&[&[0.0, 0.0], &[1.0, 0.0]]);
        assert_eq!(commutator(&x, &y).unwrap(), mat(&[&[1.0, 0.0], &[0.0, -1.0]]));
        assert_eq!(commutator(&x, &x).unwrap(), AlgebraElement::zeros(2));
        let d1 = AlgebraElement::from_diagonal(&[c(1.5), c(-2.0)]).unwrap();
        let d2 = AlgebraElement::from_diagonal(&[c(0.25), c(4.0)]).unwrap();
        assert_eq!(commutator(&d1, &d2).unwrap(), AlgebraElement::zeros(2));
        assert!(matches!(
            commutator(&x, &AlgebraElement::zeros(3)),
            Err(AlgebraError::DimensionMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn conjugation_examples() {
        let x = random_algebra_element(7, 3, 1.0);
        let g = mat_exp(&random_algebra_element(8, 3, 1.0)).unwrap();
        assert_eq!(conjugate(&GroupElement::identity(3), &x).unwrap(), x);
        assert_eq!(
            conjugate(&g, &AlgebraElement::zeros(3)).unwrap(),
            AlgebraElement::zeros(3)
        );
        let gx = conjugate(&g, &x).unwrap();
        assert!((gx.trace() - x.trace()).norm() <= 1e-12);
        let singular = GroupElement::from_matrix_unchecked(DMatrix::zeros(3, 3));
        assert!(matches!(conjugate(&singular, &x), Err(AlgebraError::Singular { .. })));
    }

    #[test]
    fn distance_examples() {
        let g = mat_exp(&random_algebra_element(1, 2, 1.0)).unwrap();
        let h = mat_exp(&random_algebra_element(2, 2, 1.0)).unwrap();
        assert_eq!(group_distance(&g, &g), 0.0);
        let two = GroupElement::from_real_rows(&[vec![2.0, 0.0], vec![0.0, 2.0]]).unwrap();
        assert!((group_distance(&GroupElement::identity(2), &two) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(group_distance(&g, &h), group_distance(&h, &g));
    }

    #[test]
    fn random_elements_are_seeded() {
        assert_eq!(random_algebra_element(5, 3, 2.0), random_algebra_element(5, 3, 2.0));
        assert_eq!(random_algebra_element(5, 3, 0.0), AlgebraElement::zeros(3));
        let x = random_algebra_element(9, 4, 0.7);
        assert!(x.matrix().iter().all(|z| z.norm() <= 0.7));
        let distinct = (0..100)
            .filter(|&s| random_algebra_element(2 * s, 2, 1.0) != random_algebra_element(2 * s + 1, 2, 1.0))
            .count();
        assert_eq!(distinct, 100);
    }

    #[test]
    fn eigenvalues_of_triangular() {
        let g = GroupElement::from_rows(&[
            vec![Complex64::new(2.0, 1.0), c(5.0)],
            vec![c(0.0), Complex64::new(-1.0, 0.5)],
        ])
        .unwrap();
        let eig = g.eigenvalues();
        assert!((eig[0] - Complex64::new(-1.0, 0.5)).norm() < 1e-12);
        assert!((eig[1] - Complex64::new(2.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn group_element_rejects_singular() {
        assert!(matches!(
            GroupElement::from_real_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]),
            Err(AlgebraError::Singular { .. })
        ));
    }
}
