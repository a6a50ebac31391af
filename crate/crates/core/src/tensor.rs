//! Dense complex linear algebra for operators on the `2^N`-dimensional
//! quantum space.
//!
//! Basis convention: the quantum space is ordered lexicographically in the
//! tensor factors, site 1 most significant, and on every site spin-up is the
//! first basis vector. So `|0>` (all spins up) is basis vector 0 and the state
//! with only site 1 flipped is basis vector `2^(N-1)`.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, vec_norm, Real};

/// Dense complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row vectors; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::Dimension("matrix must have positive dimensions".into()));
        }
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Convenience constructor from real row data.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex::new(lit(x), T::zero())).collect())
                .collect(),
        )
    }

    pub fn diag(entries: &[Complex<T>]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        vec_norm(&self.data)
    }

    /// `self * x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.cols, "mul_vec dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(Complex::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// `y * self` for a row vector `y`.
    pub fn vec_mul(&self, y: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(y.len(), self.rows, "vec_mul dimension mismatch");
        let mut out = vec![Complex::zero(); self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi.is_zero() {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += yi * a;
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sum shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix difference shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Real> Neg for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn neg(self) -> CMatrix<T> {
        self.scale(-Complex::one())
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    CMatrix::from_fn(a.rows * b.rows, a.cols * b.cols, |i, j| {
        a[(i / b.rows, j / b.cols)] * b[(i % b.rows, j % b.cols)]
    })
}

/// LU factorisation with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: CMatrix<T>,
    perm: Vec<usize>,
    sign: T,
}

impl<T: Real> Lu<T> {
    pub fn new(m: &CMatrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "LU of non-square {}x{} matrix",
                m.rows, m.cols
            )));
        }
        let n = m.rows;
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&a, &b| lu[(a, k)].norm().partial_cmp(&lu[(b, k)].norm()).unwrap())
                .unwrap_or(k);
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            if pivot.is_zero() {
                continue;
            }
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let t = lu[(k, j)];
                    lu[(i, j)] -= factor * t;
                }
            }
        }
        Ok(Self { lu, perm, sign })
    }

    pub fn determinant(&self) -> Complex<T> {
        let n = self.lu.rows;
        (0..n).fold(Complex::new(self.sign, T::zero()), |acc, i| acc * self.lu[(i, i)])
    }

    pub fn is_singular(&self) -> bool {
        (0..self.lu.rows).any(|i| self.lu[(i, i)].is_zero())
    }

    pub fn solve(&self, b: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let n = self.lu.rows;
        if b.len() != n {
            return Err(Error::Dimension(format!("rhs length {} for {n}x{n} system", b.len())));
        }
        if self.is_singular() {
            return Err(Error::Singular("zero pivot in LU factorisation".into()));
        }
        let mut x: Vec<Complex<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[(i, j)];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[(i, j)];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] = x[i] / self.lu[(i, i)];
        }
        Ok(x)
    }
}

/// Determinant via LU with partial pivoting.
pub fn determinant<T: Real>(m: &CMatrix<T>) -> Result<Complex<T>> {
    Ok(Lu::new(m)?.determinant())
}

pub fn inverse<T: Real>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    let lu = Lu::new(m)?;
    let n = m.rows;
    let mut inv = CMatrix::zeros(n, n);
    let mut e = vec![Complex::zero(); n];
    for j in 0..n {
        e.iter_mut().for_each(|z| *z = Complex::zero());
        e[j] = Complex::one();
        let col = lu.solve(&e)?;
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    Ok(inv)
}

/// Solves `min ‖a x − b‖₂` for a tall full-rank `a` by Householder QR.
/// Returns the solution and the residual norm.
pub fn least_squares<T: Real>(a: &CMatrix<T>, b: &[Complex<T>]) -> Result<(Vec<Complex<T>>, T)> {
    let (m, n) = (a.rows, a.cols);
    if m < n {
        return Err(Error::Dimension(format!("least squares needs rows >= cols, got {m}x{n}")));
    }
    if b.len() != m {
        return Err(Error::Dimension(format!("rhs length {} for {m} rows", b.len())));
    }
    let mut r = a.clone();
    let mut y = b.to_vec();
    for k in 0..n {
        let x: Vec<Complex<T>> = (k..m).map(|i| r[(i, k)]).collect();
        let norm_x = vec_norm(&x);
        if norm_x.is_zero() {
            return Err(Error::Singular("rank-deficient least-squares system".into()));
        }
        let phase = if x[0].norm().is_zero() {
            Complex::one()
        } else {
            x[0] / x[0].norm()
        };
        let alpha = -phase * norm_x;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = vec_norm(&v);
        if vnorm.is_zero() {
            continue;
        }
        v.iter_mut().for_each(|z| *z = *z / vnorm);
        let two: T = lit(2.0);
        for j in k..n {
            let dot: Complex<T> = (k..m).map(|i| v[i - k].conj() * r[(i, j)]).sum();
            for i in k..m {
                let vi = v[i - k];
                r[(i, j)] -= vi * dot * two;
            }
        }
        let dot: Complex<T> = (k..m).map(|i| v[i - k].conj() * y[i]).sum();
        for i in k..m {
            y[i] -= v[i - k] * dot * two;
        }
    }
    let scale = a.max_abs();
    let mut x = vec![Complex::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for j in i + 1..n {
            s -= r[(i, j)] * x[j];
        }
        if r[(i, i)].norm() <= T::epsilon() * scale {
            return Err(Error::Singular("rank-deficient least-squares system".into()));
        }
        x[i] = s / r[(i, i)];
    }
    let residual = vec_norm(&y[n..]);
    Ok((x, residual))
}

/// An eigenvalue with a unit-norm right eigenvector.
#[derive(Clone, Debug)]
pub struct Eigenpair<T> {
    pub value: Complex<T>,
    pub vector: Vec<Complex<T>>,
}

struct Schur<T> {
    t: CMatrix<T>,
    z: CMatrix<T>,
}

fn householder_hessenberg<T: Real>(a: &CMatrix<T>) -> (CMatrix<T>, CMatrix<T>) {
    let n = a.rows;
    let mut h = a.clone();
    let mut q = CMatrix::identity(n);
    let two: T = lit(2.0);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex<T>> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let norm_x = vec_norm(&x);
        if norm_x.is_zero() {
            continue;
        }
        let phase = if x[0].norm().is_zero() {
            Complex::one()
        } else {
            x[0] / x[0].norm()
        };
        let mut v = x;
        v[0] += phase * norm_x;
        let vnorm = vec_norm(&v);
        v.iter_mut().for_each(|z| *z = *z / vnorm);
        // H <- (I - 2vv*) H
        for j in 0..n {
            let dot: Complex<T> = (k + 1..n).map(|i| v[i - k - 1].conj() * h[(i, j)]).sum();
            for i in k + 1..n {
                let vi = v[i - k - 1];
                h[(i, j)] -= vi * dot * two;
            }
        }
        // H <- H (I - 2vv*), Q <- Q (I - 2vv*)
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let dot: Complex<T> = (k + 1..n).map(|j| m[(i, j)] * v[j - k - 1]).sum();
                for j in k + 1..n {
                    let vj = v[j - k - 1].conj();
                    m[(i, j)] -= dot * vj * two;
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex::zero();
        }
    }
    (h, q)
}

fn complex_schur<T: Real>(a: &CMatrix<T>) -> Result<Schur<T>> {
    let n = a.rows;
    let (mut h, mut z) = householder_hessenberg(a);
    if n <= 1 {
        return Ok(Schur { t: h, z });
    }
    let eps = T::epsilon();
    let cap = 100 * n;
    let mut total = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;
    let anorm = h.frobenius_norm().max(T::min_positive_value());
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let s = if s.is_zero() { anorm } else { s };
            if h[(l, l - 1)].norm() <= eps * s {
                h[(l, l - 1)] = Complex::zero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if total >= cap {
            let best = (1..=hi).fold(T::zero(), |m, i| m.max(h[(i, i - 1)].norm()));
            return Err(Error::Convergence {
                iterations: total,
                residual: to_f64(best),
            });
        }
        total += 1;
        since_deflation += 1;

        let shift = if since_deflation % 11 == 10 {
            // exceptional shift to break cycles
            h[(hi, hi)] + Complex::new(h[(hi, hi - 1)].norm() * lit(0.75), T::zero())
        } else {
            let a11 = h[(hi - 1, hi - 1)];
            let a12 = h[(hi - 1, hi)];
            let a21 = h[(hi, hi - 1)];
            let a22 = h[(hi, hi)];
            let half: T = lit(0.5);
            let mean = (a11 + a22) * half;
            let disc = ((a11 - a22) * half * ((a11 - a22) * half) + a12 * a21).sqrt();
            let mu1 = mean + disc;
            let mu2 = mean - disc;
            if (mu1 - a22).norm() <= (mu2 - a22).norm() {
                mu1
            } else {
                mu2
            }
        };

        for i in l..=hi {
            h[(i, i)] -= shift;
        }
        let mut rotations = Vec::with_capacity(hi - l);
        for k in l..hi {
            let a = h[(k, k)];
            let b = h[(k + 1, k)];
            let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let (c, s) = if r.is_zero() {
                (Complex::one(), Complex::zero())
            } else {
                (a / r, b / r)
            };
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = c.conj() * x + s.conj() * y;
                h[(k + 1, j)] = -s * x + c * y;
            }
            rotations.push((k, c, s));
        }
        for &(k, c, s) in &rotations {
            let upper = (k + 2).min(hi);
            for i in 0..=upper {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s;
                h[(i, k + 1)] = -x * s.conj() + y * c.conj();
            }
            for i in 0..n {
                let x = z[(i, k)];
                let y = z[(i, k + 1)];
                z[(i, k)] = x * c + y * s;
                z[(i, k + 1)] = -x * s.conj() + y * c.conj();
            }
        }
        for i in l..=hi {
            h[(i, i)] += shift;
        }
    }
    Ok(Schur { t: h, z })
}

/// Eigenvalues only (complex Schur diagonal), with multiplicity.
pub fn eigenvalues<T: Real>(m: &CMatrix<T>) -> Result<Vec<Complex<T>>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigenvalues of non-square {}x{} matrix",
            m.rows, m.cols
        )));
    }
    let schur = complex_schur(m)?;
    Ok((0..m.rows).map(|i| schur.t[(i, i)]).collect())
}

/// All eigenpairs of a square matrix via Hessenberg reduction and shifted QR.
pub fn eigenpairs<T: Real>(m: &CMatrix<T>) -> Result<Vec<Eigenpair<T>>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigenpairs of non-square {}x{} matrix",
            m.rows, m.cols
        )));
    }
    let n = m.rows;
    let Schur { t, z } = complex_schur(m)?;
    let tnorm = t.frobenius_norm().max(T::min_positive_value());
    let small = T::epsilon() * tnorm;
    let mut pairs = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = vec![Complex::zero(); n];
        y[k] = Complex::one();
        for j in (0..k).rev() {
            let s: Complex<T> = (j + 1..=k).map(|p| t[(j, p)] * y[p]).sum();
            let mut d = t[(j, j)] - lambda;
            if d.norm() < small {
                d = Complex::new(small, T::zero());
            }
            y[j] = -s / d;
        }
        let mut v = z.mul_vec(&y);
        let norm = vec_norm(&v);
        v.iter_mut().for_each(|x| *x = *x / norm);
        pairs.push(Eigenpair { value: lambda, vector: v });
    }
    Ok(pairs)
}

/// `‖m v − λ v‖₂`.
pub fn eigen_residual<T: Real>(m: &CMatrix<T>, pair: &Eigenpair<T>) -> T {
    let mv = m.mul_vec(&pair.vector);
    let diff: Vec<Complex<T>> = mv
        .iter()
        .zip(&pair.vector)
        .map(|(&a, &b)| a - pair.value * b)
        .collect();
    vec_norm(&diff)
}

/// Polynomial in `u` with matrix coefficients; index = power of `u`.
/// `degree()` is an upper bound, the leading coefficient may vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPolynomial<T> {
    coefficients: Vec<CMatrix<T>>,
}

impl<T: Real> MatrixPolynomial<T> {
    pub fn new(coefficients: Vec<CMatrix<T>>) -> Result<Self> {
        let first = coefficients
            .first()
            .ok_or_else(|| Error::Dimension("matrix polynomial needs a coefficient".into()))?;
        let shape = (first.rows, first.cols);
        if coefficients.iter().any(|c| (c.rows, c.cols) != shape) {
            return Err(Error::Dimension("coefficient shapes differ".into()));
        }
        Ok(Self { coefficients })
    }

    pub fn constant(m: CMatrix<T>) -> Self {
        Self { coefficients: vec![m] }
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn dim(&self) -> (usize, usize) {
        let c = &self.coefficients[0];
        (c.rows, c.cols)
    }

    pub fn coefficient(&self, k: usize) -> Option<&CMatrix<T>> {
        self.coefficients.get(k)
    }

    pub fn coefficients(&self) -> &[CMatrix<T>] {
        &self.coefficients
    }

    pub fn eval(&self, u: Complex<T>) -> CMatrix<T> {
        let mut acc = self.coefficients.last().unwrap().clone();
        for c in self.coefficients.iter().rev().skip(1) {
            acc = &acc.scale(u) + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coefficients.len() == 1 {
            let (r, c) = self.dim();
            return Self::constant(CMatrix::zeros(r, c));
        }
        Self {
            coefficients: self
                .coefficients
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, m)| m.scale(Complex::new(lit(k as f64), T::zero())))
                .collect(),
        }
    }

    /// `Σ w_k P_k`; all terms must share a shape.
    pub fn combine(terms: &[(Complex<T>, &MatrixPolynomial<T>)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::Dimension("empty linear combination".into()))?;
        let shape = first.dim();
        if terms.iter().any(|(_, p)| p.dim() != shape) {
            return Err(Error::Dimension("combined polynomials differ in shape".into()));
        }
        let len = terms.iter().map(|(_, p)| p.coefficients.len()).max().unwrap();
        let mut coefficients = vec![CMatrix::zeros(shape.0, shape.1); len];
        for (w, p) in terms {
            for (acc, c) in coefficients.iter_mut().zip(&p.coefficients) {
                *acc = &*acc + &c.scale(*w);
            }
        }
        Ok(Self { coefficients })
    }
}

/// Default interpolation nodes `u_k = k c`, shifted by `c/2` whenever a node
/// hits an inhomogeneity.
pub fn default_nodes<T: Real>(degree: usize, c: Complex<T>, avoid: &[Complex<T>]) -> Vec<Complex<T>> {
    let scale = c.norm().max(T::one());
    let tol = lit::<T>(1e-12) * scale;
    let mut offset = Complex::zero();
    loop {
        let nodes: Vec<Complex<T>> = (0..=degree)
            .map(|k| c * lit::<T>(k as f64) + offset)
            .collect();
        let collides = nodes
            .iter()
            .any(|u| avoid.iter().any(|th| (*u - *th).norm() <= tol));
        if !collides {
            return nodes;
        }
        offset += c * lit::<T>(0.5);
    }
}

/// Entrywise Lagrange interpolation of matrix samples. Uses the first
/// `degree + 1` samples.
pub fn poly_from_samples<T: Real>(
    samples: &[(Complex<T>, CMatrix<T>)],
    degree: usize,
) -> Result<MatrixPolynomial<T>> {
    let needed = degree + 1;
    if samples.len() < needed {
        return Err(Error::Node(format!(
            "degree {degree} needs {needed} samples, got {}",
            samples.len()
        )));
    }
    let used = &samples[..needed];
    let (r, c) = (used[0].1.rows, used[0].1.cols);
    if used.iter().any(|(_, m)| (m.rows, m.cols) != (r, c)) {
        return Err(Error::Dimension("sample shapes differ".into()));
    }
    let scale = used.iter().fold(T::one(), |m, (u, _)| m.max(u.norm()));
    for i in 0..needed {
        for j in i + 1..needed {
            if (used[i].0 - used[j].0).norm() <= lit::<T>(1e-13) * scale {
                return Err(Error::Node(format!("nodes {i} and {j} coincide")));
            }
        }
    }
    let mut coefficients = vec![CMatrix::zeros(r, c); needed];
    for (j, (xj, mj)) in used.iter().enumerate() {
        // basis polynomial ℓ_j as coefficient vector
        let mut basis = vec![Complex::<T>::zero(); needed];
        basis[0] = Complex::one();
        let mut denom = Complex::<T>::one();
        let mut len = 1;
        for (m, (xm, _)) in used.iter().enumerate() {
            if m == j {
                continue;
            }
            for k in (0..=len).rev() {
                let lower = if k > 0 { basis[k - 1] } else { Complex::zero() };
                let here = if k < len { basis[k] } else { Complex::zero() };
                basis[k] = lower - *xm * here;
            }
            len += 1;
            denom *= *xj - *xm;
        }
        for (k, b) in basis.iter().enumerate() {
            let w = *b / denom;
            if w.is_zero() {
                continue;
            }
            coefficients[k] = &coefficients[k] + &mj.scale(w);
        }
    }
    MatrixPolynomial::new(coefficients)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    type M = CMatrix<f64>;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn determinant_of_identity_and_swap() {
        assert!((determinant(&M::identity(3)).unwrap() - c(1.0)).norm() < 1e-15);
        let swap = M::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert!((determinant(&swap).unwrap() - c(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn determinant_rejects_non_square() {
        let m = M::zeros(2, 3);
        assert!(matches!(determinant(&m), Err(Error::Dimension(_))));
    }

    #[test]
    fn singular_inverse_fails() {
        let m = M::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(matches!(inverse(&m), Err(Error::Singular(_))));
    }

    #[test]
    fn eigenpairs_of_diagonal() {
        let m = M::diag(&[c(1.0), c(2.0)]);
        let mut vals: Vec<f64> = eigenpairs(&m).unwrap().iter().map(|p| p.value.re).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn eigenpairs_of_transfer_matrix_at_zero() {
        // [[3u+2, 1], [1, 3u+1]] at u = 0
        let m = M::from_real_rows(&[&[2.0, 1.0], &[1.0, 1.0]]).unwrap();
        let mut vals: Vec<f64> = eigenpairs(&m).unwrap().iter().map(|p| p.value.re).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let s5 = 5f64.sqrt();
        assert!((vals[0] - (3.0 - s5) / 2.0).abs() < 1e-12);
        assert!((vals[1] - (3.0 + s5) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn eigenpairs_of_jordan_like_and_zero_matrices() {
        let z = M::zeros(3, 3);
        assert!(eigenpairs(&z).unwrap().iter().all(|p| p.value.norm() < 1e-15));
        let m = M::from_real_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]]).unwrap();
        let pairs = eigenpairs(&m).unwrap();
        for p in &pairs {
            assert!((p.value.norm() - 1.0).abs() < 1e-12);
            assert!(eigen_residual(&m, p) < 1e-10);
        }
    }

    #[test]
    fn least_squares_exact_system() {
        let a = M::from_real_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]).unwrap();
        let b = [c(1.0), c(2.0), c(3.0)];
        let (x, res) = least_squares(&a, &b).unwrap();
        assert!((x[0] - c(1.0)).norm() < 1e-14 && (x[1] - c(2.0)).norm() < 1e-14);
        assert!(res < 1e-14);
    }

    #[test]
    fn interpolation_of_linear_samples() {
        let samples = vec![(c(0.0), M::zeros(2, 2)), (c(1.0), M::identity(2))];
        let p = poly_from_samples(&samples, 1).unwrap();
        assert!(p.coefficient(0).unwrap().max_abs() < 1e-15);
        assert!((p.coefficient(1).unwrap() - &M::identity(2)).max_abs() < 1e-15);
    }

    #[test]
    fn interpolation_of_constant_has_vanishing_leading_terms() {
        let k = M::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let samples: Vec<_> = [0.0, 1.0, 2.0].iter().map(|&u| (c(u), k.clone())).collect();
        let p = poly_from_samples(&samples, 2).unwrap();
        assert!(p.coefficient(1).unwrap().max_abs() < 1e-13);
        assert!(p.coefficient(2).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn interpolation_rejects_coincident_nodes() {
        let samples = vec![(c(1.0), M::identity(2)), (c(1.0), M::identity(2))];
        assert!(matches!(poly_from_samples(&samples, 1), Err(Error::Node(_))));
    }

    #[test]
    fn default_nodes_avoid_inhomogeneities() {
        let nodes = default_nodes(2, cplx::<f64>(1.0, 0.0), &[cplx(1.0, 0.0)]);
        assert!((nodes[0] - c(0.5)).norm() < 1e-15);
        let plain = default_nodes(2, cplx::<f64>(1.0, 0.0), &[cplx(0.3, 0.0)]);
        assert!((plain[2] - c(2.0)).norm() < 1e-15);
    }

    #[test]
    fn derivative_of_matrix_polynomial() {
        let p = MatrixPolynomial::new(vec![M::identity(2), M::identity(2).scale(c(3.0))]).unwrap();
        let d = p.derivative();
        assert_eq!(d.degree(), 0);
        assert!((&d.eval(c(7.0)) - &M::identity(2).scale(c(3.0))).max_abs() < 1e-15);
    }
}
