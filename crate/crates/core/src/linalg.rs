//! Dense complex linear algebra for the small systems of the ESPAR model.

use num_complex::Complex;

use crate::scalar::Scalar;

/// Square row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CMatrix<T> {
    pub n: usize,
    pub data: Vec<Complex<T>>,
}

impl<T: Scalar> CMatrix<T> {
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(Self {
            n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![Complex::new(T::zero(), T::zero()); n * n];
        for i in 0..n {
            data[i * n + i] = Complex::new(T::one(), T::zero());
        }
        Self { n, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        self.data[i * self.n + j] = v;
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> T {
        (0..self.n)
            .map(|j| (0..self.n).fold(T::zero(), |acc, i| acc + self.get(i, j).norm()))
            .fold(T::zero(), T::max)
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting.
    /// `None` if a pivot vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a.get(r, col).norm().partial_cmp(&a.get(s, col).norm()).unwrap())?;
            if a.get(pivot, col).norm() == T::zero() {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let d = a.get(col, col).inv();
            for j in 0..n {
                a.set(col, j, a.get(col, j) * d);
                inv.set(col, j, inv.get(col, j) * d);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col);
                if f.norm() == T::zero() {
                    continue;
                }
                for j in 0..n {
                    a.set(r, j, a.get(r, j) - f * a.get(col, j));
                    inv.set(r, j, inv.get(r, j) - f * inv.get(col, j));
                }
            }
        }
        Some(inv)
    }

    #[cfg(test)]
    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.n)
            .map(|i| {
                (0..self.n).fold(Complex::new(T::zero(), T::zero()), |acc, j| acc + self.get(i, j) * x[j])
            })
            .collect()
    }
}
