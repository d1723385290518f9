//! Small dense square matrices over [`Gq`].

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::scalar::Gq;

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Matrix {
    n: usize,
    data: Vec<Gq>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Gq::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, Gq::one())
    }

    pub fn scalar(n: usize, c: Gq) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = c.clone();
        }
        m
    }

    /// Matrix unit `E_{ij}`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n);
        m.data[i * n + j] = Gq::one();
        m
    }

    pub fn from_rows(rows: Vec<Vec<Gq>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Self { n, data: rows.into_iter().flatten().collect() }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Gq {
        &self.data[i * self.n + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut Gq {
        &mut self.data[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<Gq>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// True when the matrix is `c * 1` for some scalar `c`.
    pub fn is_scalar(&self) -> bool {
        let c = self.get(0, 0);
        (0..self.n).all(|i| {
            (0..self.n).all(|j| {
                let v = self.get(i, j);
                if i == j { v == c } else { v.is_zero() }
            })
        })
    }

    pub fn trace(&self) -> Gq {
        let mut t = Gq::zero();
        for i in 0..self.n {
            t += self.get(i, i);
        }
        t
    }

    pub fn scale(&self, c: &Gq) -> Self {
        Self { n: self.n, data: self.data.iter().map(|v| v * c).collect() }
    }

    pub fn add_assign(&mut self, o: &Matrix) {
        for (a, b) in self.data.iter_mut().zip(&o.data) {
            *a += b;
        }
    }

    pub fn add_scaled(&mut self, o: &Matrix, c: &Gq) {
        for (a, b) in self.data.iter_mut().zip(&o.data) {
            if !b.is_zero() {
                *a += &(b * c);
            }
        }
    }

    pub fn commutator(&self, o: &Matrix) -> Matrix {
        &(self * o) - &(o * self)
    }

    pub fn transpose(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                *m.get_mut(j, i) = self.get(i, j).clone();
            }
        }
        m
    }

    /// Exact inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Option<Matrix> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let piv = (col..n).find(|&r| !a.get(r, col).is_zero())?;
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                    inv.data.swap(piv * n + j, col * n + j);
                }
            }
            let p = a.get(col, col).inv()?;
            for j in 0..n {
                *a.get_mut(col, j) = a.get(col, j) * &p;
                *inv.get_mut(col, j) = inv.get(col, j) * &p;
            }
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let f = a.get(r, col).clone();
                for j in 0..n {
                    let av = a.get(col, j) * &f;
                    let iv = inv.get(col, j) * &f;
                    *a.get_mut(r, j) -= &av;
                    *inv.get_mut(r, j) -= &iv;
                }
            }
        }
        Some(inv)
    }
}

impl<'a> Mul<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn mul(self, o: &Matrix) -> Matrix {
        let n = self.n;
        debug_assert_eq!(n, o.n);
        if n == 1 {
            return Matrix { n, data: vec![&self.data[0] * &o.data[0]] };
        }
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &o.data[k * n + j];
                    if !b.is_zero() {
                        out.data[i * n + j] += &(a * b);
                    }
                }
            }
        }
        out
    }
}

impl<'a> Add<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn add(self, o: &Matrix) -> Matrix {
        let mut m = self.clone();
        m.add_assign(o);
        m
    }
}

impl<'a> Sub<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn sub(self, o: &Matrix) -> Matrix {
        Matrix { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        Matrix { n: self.n, data: self.data.iter().map(|a| -a).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let m = Matrix::from_rows(vec![
            vec![Gq::from_int(0), Gq::from_int(1), Gq::i()],
            vec![Gq::from_frac(1, 2), Gq::from_int(0), Gq::from_int(3)],
            vec![Gq::from_int(2), Gq::from_int(-1), Gq::from_int(1)],
        ]);
        let inv = m.inverse().unwrap();
        assert_eq!(&m * &inv, Matrix::identity(3));
        assert!(Matrix::zeros(2).inverse().is_none());
    }

    #[test]
    fn units_multiply() {
        let e01 = Matrix::unit(2, 0, 1);
        let e10 = Matrix::unit(2, 1, 0);
        assert_eq!(&e01 * &e10, Matrix::unit(2, 0, 0));
        assert!(Matrix::identity(2).is_scalar());
        assert!(!e01.is_scalar());
    }
}
