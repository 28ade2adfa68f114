//! Small dense matrices over any [`Scalar`], used to push dual numbers
//! through matrix-valued formulas.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::AlgebraElement;
use crate::formlang::{Dual, Scalar};

#[derive(Clone, Debug)]
pub(crate) struct Mat<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn from_vec(n: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        Self { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_vec(n, vec![T::zero(); n * n])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn constant(x: &AlgebraElement) -> Self {
        let n = x.dim();
        Self::from_vec(n, (0..n * n).map(|k| T::constant(x.entry(k / n, k % n))).collect())
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a - b)
    }

    fn zip(&self, o: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(self.n, o.n);
        let data = self
            .data
            .iter()
            .zip(&o.data)
            .map(|(a, b)| f(a.clone(), b.clone()))
            .collect();
        Self::from_vec(self.n, data)
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::from_vec(self.n, self.data.iter().map(|a| a.clone() * s.clone()).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.n, o.n);
        let n = self.n;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = self.get(i, 0).clone() * o.get(0, j).clone();
                for k in 1..n {
                    acc = acc + self.get(i, k).clone() * o.get(k, j).clone();
                }
                out.push(acc);
            }
        }
        Self::from_vec(n, out)
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    /// Gauss-Jordan inverse with partial pivoting on the primal values.
    /// Returns `None` when a pivot vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut inv = Self::identity(n).data;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| {
                    a[r * n + col]
                        .primal()
                        .norm()
                        .total_cmp(&a[s * n + col].primal().norm())
                })
                .expect("non-empty range");
            if a[pivot * n + col].primal().norm() == 0.0 {
                return None;
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(pivot * n + k, col * n + k);
                    inv.swap(pivot * n + k, col * n + k);
                }
            }
            let p = a[col * n + col].clone();
            for k in 0..n {
                a[col * n + k] = a[col * n + k].clone() / p.clone();
                inv[col * n + k] = inv[col * n + k].clone() / p.clone();
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r * n + col].clone();
                for k in 0..n {
                    a[r * n + k] = a[r * n + k].clone() - f.clone() * a[col * n + k].clone();
                    inv[r * n + k] = inv[r * n + k].clone() - f.clone() * inv[col * n + k].clone();
                }
            }
        }
        Some(Self::from_vec(n, inv))
    }

    pub fn primal(&self) -> Mat<Complex64> {
        self.map(|x| x.primal())
    }
}

impl<T: Scalar> Mat<Dual<T>> {
    pub fn value(&self) -> Mat<T> {
        self.map(|x| x.value.clone())
    }

    pub fn tangent(&self) -> Mat<T> {
        self.map(|x| x.tangent.clone())
    }
}

impl Mat<Complex64> {
    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    pub fn to_algebra(&self) -> AlgebraElement {
        AlgebraElement::from_matrix_unchecked(self.to_dmatrix())
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}
