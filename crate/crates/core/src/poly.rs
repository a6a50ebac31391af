//! Scalar complex polynomials, ascending coefficient order.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::tensor::{eigenvalues, CMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> Poly<T> {
    pub fn new(mut coeffs: Vec<Complex<T>>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(Complex::zero());
        }
        Self { coeffs }
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::new(vec![c])
    }

    /// `prod_k (u - roots[k])`.
    pub fn from_roots(roots: &[Complex<T>]) -> Self {
        roots.iter().fold(Self::constant(Complex::one()), |acc, &r| {
            &acc * &Self::new(vec![-r, Complex::one()])
        })
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// Length of the coefficient vector minus one (an upper bound on the degree).
    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, u: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::zero(), |acc, &c| acc * u + c)
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::constant(Complex::zero());
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * lit::<T>(k as f64))
                .collect(),
        )
    }

    /// The polynomial `u ↦ p(u + a)`.
    pub fn shift(&self, a: Complex<T>) -> Self {
        // Horner in polynomial arithmetic
        let lin = Self::new(vec![a, Complex::one()]);
        self.coeffs
            .iter()
            .rev()
            .fold(Self::constant(Complex::zero()), |acc, &c| &(&acc * &lin) + &Self::constant(c))
    }

    pub fn max_coeff_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    /// Roots via eigenvalues of the companion matrix. Trailing coefficients
    /// below `eps * max|coeff|` are treated as zero.
    pub fn roots(&self) -> Result<Vec<Complex<T>>> {
        let scale = self.max_coeff_abs();
        let cut = T::epsilon() * scale;
        let mut n = self.coeffs.len() - 1;
        while n > 0 && self.coeffs[n].norm() <= cut {
            n -= 1;
        }
        if n == 0 {
            if self.coeffs[0].norm() <= cut {
                return Err(Error::DegenerateArgument("roots of the zero polynomial".into()));
            }
            return Ok(Vec::new());
        }
        let lead = self.coeffs[n];
        let companion = CMatrix::from_fn(n, n, |i, j| {
            if i == 0 {
                -self.coeffs[n - 1 - j] / lead
            } else if i == j + 1 {
                Complex::one()
            } else {
                Complex::zero()
            }
        });
        eigenvalues(&companion)
    }
}

impl<T: Real> Add for &Poly<T> {
    type Output = Poly<T>;

    fn add(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or_else(Complex::zero)
                        + rhs.coeffs.get(k).copied().unwrap_or_else(Complex::zero)
                })
                .collect(),
        )
    }
}

impl<T: Real> Sub for &Poly<T> {
    type Output = Poly<T>;

    fn sub(self, rhs: &Poly<T>) -> Poly<T> {
        self + &rhs.scale(-Complex::one())
    }
}

impl<T: Real> Mul for &Poly<T> {
    type Output = Poly<T>;

    fn mul(self, rhs: &Poly<T>) -> Poly<T> {
        let mut out = vec![Complex::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn roots_of_quadratic() {
        let p = Poly::from_roots(&[cplx::<f64>(1.0, 2.0), cplx(-3.0, 0.5)]);
        let mut r = p.roots().unwrap();
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((r[0] - cplx(-3.0, 0.5)).norm() < 1e-12);
        assert!((r[1] - cplx(1.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn shift_matches_pointwise_evaluation() {
        let p = Poly::new(vec![cplx::<f64>(1.0, 0.0), cplx(2.0, -1.0), cplx(0.5, 0.5)]);
        let a = cplx(0.3, -0.7);
        let u = cplx(1.1, 0.2);
        assert!((p.shift(a).eval(u) - p.eval(u + a)).norm() < 1e-13);
    }
}
