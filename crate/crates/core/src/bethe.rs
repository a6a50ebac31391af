//! Rational kernels, Bethe-parameter sets and the scalar functionals of the
//! modified Bethe ansatz: eigenvalue, Bethe residual, their derivatives and
//! the inhomogeneous T-Q relation.
//!
//! Product conventions over a set `ū = {u_1, …, u_M}`:
//! `f(ū, u) = Π_k f(u_k, u)`, `f(u, ū) = Π_k f(u, u_k)`, empty products are 1.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::chain::ChainParams;
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::{lit, product_derivative, to_f64, Real};
use crate::tensor::CMatrix;
use crate::twist::TwistFactorization;

/// `g(u, v) = c / (u − v)`.
#[inline]
pub fn g<T: Real>(u: Complex<T>, v: Complex<T>, c: Complex<T>) -> Complex<T> {
    c / (u - v)
}

/// `f(u, v) = (u − v + c) / (u − v)`.
#[inline]
pub fn f<T: Real>(u: Complex<T>, v: Complex<T>, c: Complex<T>) -> Complex<T> {
    (u - v + c) / (u - v)
}

/// `h(u, v) = f(u, v) / g(u, v) = (u − v + c) / c`.
#[inline]
pub fn h<T: Real>(u: Complex<T>, v: Complex<T>, c: Complex<T>) -> Complex<T> {
    (u - v + c) / c
}

/// `∂/∂u g(u, v) = ∂/∂u f(u, v) = −c/(u − v)²`; the `v`-derivative is its negative.
#[inline]
fn dg_first<T: Real>(u: Complex<T>, v: Complex<T>, c: Complex<T>) -> Complex<T> {
    let d = u - v;
    -c / (d * d)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kernels<T> {
    pub g: Complex<T>,
    pub f: Complex<T>,
    pub h: Complex<T>,
}

/// Default coincidence threshold `1e-9 max(1, |c|)`.
pub fn default_distinctness<T: Real>(c: Complex<T>) -> T {
    lit::<T>(1e-9) * c.norm().max(T::one())
}

/// `(g, f, h)` at `(u, v)`; `g` and `f` are singular at `u = v`.
pub fn kernels<T: Real>(u: Complex<T>, v: Complex<T>, c: Complex<T>) -> Result<Kernels<T>> {
    if (u - v).norm() <= default_distinctness(c) {
        return Err(Error::Coincidence(format!(
            "kernel arguments coincide within {:e}",
            to_f64(default_distinctness(c))
        )));
    }
    Ok(Kernels {
        g: g(u, v, c),
        f: f(u, v, c),
        h: h(u, v, c),
    })
}

/// Ordered set of pairwise-distinct Bethe parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct VariableSet<T> {
    values: Vec<Complex<T>>,
}

impl<T: Real> VariableSet<T> {
    /// Rejects pairs closer than `eps`.
    pub fn new(values: Vec<Complex<T>>, eps: T) -> Result<Self> {
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                if (values[i] - values[j]).norm() <= eps {
                    return Err(Error::Coincidence(format!(
                        "Bethe parameters {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(Self { values })
    }

    pub fn empty() -> Self {
        Self { values: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = &Complex<T>> {
        self.values.iter()
    }

    pub fn get(&self, i: usize) -> Complex<T> {
        self.values[i]
    }

    /// `ū_i`
    pub fn without(&self, i: usize) -> Self {
        Self {
            values: self
                .values
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .map(|(_, &v)| v)
                .collect(),
        }
    }

    /// `ū_ij`
    pub fn without_pair(&self, i: usize, j: usize) -> Self {
        Self {
            values: self
                .values
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i && k != j)
                .map(|(_, &v)| v)
                .collect(),
        }
    }

    /// `{u, ū}` with `u` in front. Does not re-check distinctness.
    pub fn with_front(&self, u: Complex<T>) -> Self {
        let mut values = Vec::with_capacity(self.values.len() + 1);
        values.push(u);
        values.extend_from_slice(&self.values);
        Self { values }
    }

    /// Sorted by real part, then imaginary part.
    pub fn canonical(&self) -> Self {
        let mut values = self.values.clone();
        values.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
        });
        Self { values }
    }

    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            values: order.iter().map(|&k| self.values[k]).collect(),
        }
    }

    pub fn nearest_distance(&self, u: Complex<T>) -> Option<T> {
        self.values.iter().map(|&v| (v - u).norm()).reduce(T::min)
    }

    /// `Π_k kern(u_k, u)`
    pub fn prod_left(&self, u: Complex<T>, kern: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Complex<T> {
        self.values.iter().map(|&v| kern(v, u)).product()
    }

    /// `Π_k kern(u, u_k)`
    pub fn prod_right(&self, u: Complex<T>, kern: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Complex<T> {
        self.values.iter().map(|&v| kern(u, v)).product()
    }
}

/// Coefficients of a vector identity `X = wanted·B(ū) + Σ_i unwanted_i·B(u, ū_i)`
/// together with the coefficient of the raised vector `B(u, ū)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OffShellDecomposition<T> {
    pub wanted: Complex<T>,
    pub unwanted: Vec<Complex<T>>,
    pub raising: Complex<T>,
}

/// Chain and twist data needed by every scalar functional.
#[derive(Clone, Debug)]
pub struct SpectralContext<T> {
    pub chain: ChainParams<T>,
    pub twist: TwistFactorization<T>,
    pub eps_dist: T,
}

impl<T: Real> SpectralContext<T> {
    pub fn new(chain: ChainParams<T>, twist: TwistFactorization<T>) -> Self {
        let eps_dist = default_distinctness(chain.c());
        Self { chain, twist, eps_dist }
    }

    pub fn c(&self) -> Complex<T> {
        self.chain.c()
    }

    pub fn sites(&self) -> usize {
        self.chain.sites()
    }

    pub fn rho(&self) -> Complex<T> {
        self.twist.rho
    }

    pub fn vacuum_weights(&self, u: Complex<T>) -> (Complex<T>, Complex<T>) {
        self.chain.vacuum_weights(u)
    }

    pub fn variables(&self, values: Vec<Complex<T>>) -> Result<VariableSet<T>> {
        VariableSet::new(values, self.eps_dist)
    }

    fn ensure_apart(&self, u: Complex<T>, set: &VariableSet<T>) -> Result<()> {
        match set.nearest_distance(u) {
            Some(d) if d <= self.eps_dist => Err(Error::Coincidence(
                "spectral parameter coincides with a Bethe parameter".into(),
            )),
            _ => Ok(()),
        }
    }

    fn two_rho(&self) -> Complex<T> {
        self.twist.rho * lit::<T>(2.0)
    }

    /// `x λ₁(u) f(ū,u) + y λ₂(u) f(u,ū) + z λ₁(u)λ₂(u) g(u,ū)`.
    pub fn eigenvalue_with(
        &self,
        u: Complex<T>,
        set: &VariableSet<T>,
        x: Complex<T>,
        y: Complex<T>,
        z: Complex<T>,
    ) -> Result<Complex<T>> {
        self.ensure_apart(u, set)?;
        let c = self.c();
        let (l1, l2) = self.vacuum_weights(u);
        Ok(x * l1 * set.prod_left(u, |a, b| f(a, b, c))
            + y * l2 * set.prod_right(u, |a, b| f(a, b, c))
            + z * l1 * l2 * set.prod_right(u, |a, b| g(a, b, c)))
    }

    /// `−x λ₁(u_i) f(ū_i,u_i) + y λ₂(u_i) f(u_i,ū_i) + z λ₁λ₂(u_i) g(u_i,ū_i)`.
    pub fn bethe_with(
        &self,
        i: usize,
        set: &VariableSet<T>,
        x: Complex<T>,
        y: Complex<T>,
        z: Complex<T>,
    ) -> Result<Complex<T>> {
        if i >= set.len() {
            return Err(Error::Parameter(format!("index {i} outside a set of {}", set.len())));
        }
        let ui = set.get(i);
        let rest = set.without(i);
        self.ensure_apart(ui, &rest)?;
        let c = self.c();
        let (l1, l2) = self.vacuum_weights(ui);
        Ok(-x * l1 * rest.prod_left(ui, |a, b| f(a, b, c))
            + y * l2 * rest.prod_right(ui, |a, b| f(a, b, c))
            + z * l1 * l2 * rest.prod_right(ui, |a, b| g(a, b, c)))
    }

    /// The inhomogeneous eigenvalue `Λ(u, ū)`.
    pub fn eigenvalue(&self, u: Complex<T>, set: &VariableSet<T>) -> Result<Complex<T>> {
        self.eigenvalue_with(u, set, self.twist.weight1(), self.twist.weight2(), self.two_rho())
    }

    /// `Λ_d(u, ū | x, y)`.
    pub fn eigenvalue_diagonal(&self, u: Complex<T>, set: &VariableSet<T>, x: Complex<T>, y: Complex<T>) -> Result<Complex<T>> {
        self.eigenvalue_with(u, set, x, y, Complex::zero())
    }

    /// `Λ_g(u, ū) = 2ρ λ₁(u)λ₂(u) g(u, ū)`.
    pub fn eigenvalue_raising(&self, u: Complex<T>, set: &VariableSet<T>) -> Result<Complex<T>> {
        self.eigenvalue_with(u, set, Complex::zero(), Complex::zero(), self.two_rho())
    }

    /// The inhomogeneous Bethe residual `E(u_i, ū_i)`.
    pub fn bethe_residual(&self, i: usize, set: &VariableSet<T>) -> Result<Complex<T>> {
        self.bethe_with(i, set, self.twist.weight1(), self.twist.weight2(), self.two_rho())
    }

    pub fn bethe_residuals(&self, set: &VariableSet<T>) -> Result<Vec<Complex<T>>> {
        (0..set.len()).map(|i| self.bethe_residual(i, set)).collect()
    }

    /// `max(1, max_i |λ₁(u_i)λ₂(u_i)|)`, the scale of the on-shell tolerance.
    pub fn residual_scale(&self, set: &VariableSet<T>) -> T {
        set.iter().fold(T::one(), |m, &u| {
            let (l1, l2) = self.vacuum_weights(u);
            m.max((l1 * l2).norm())
        })
    }

    /// Maximum Bethe residual and whether it is within `base · scale`.
    pub fn onshell_status(&self, set: &VariableSet<T>, base: T) -> Result<(T, bool)> {
        let worst = self
            .bethe_residuals(set)?
            .iter()
            .fold(T::zero(), |m, z| m.max(z.norm()));
        Ok((worst, worst <= base * self.residual_scale(set)))
    }

    /// Fails with `NotOnShell` unless every Bethe residual is within tolerance.
    pub fn require_onshell(&self, set: &VariableSet<T>, base: T) -> Result<()> {
        let (worst, ok) = self.onshell_status(set, base)?;
        if ok {
            Ok(())
        } else {
            Err(Error::NotOnShell {
                max_residual: to_f64(worst),
                tolerance: to_f64(base * self.residual_scale(set)),
            })
        }
    }

    /// `∂Λ(u, ū)/∂u_i`, analytic.
    pub fn eigenvalue_gradient(&self, u: Complex<T>, set: &VariableSet<T>, i: usize) -> Result<Complex<T>> {
        if i >= set.len() {
            return Err(Error::Parameter(format!("index {i} outside a set of {}", set.len())));
        }
        self.ensure_apart(u, set)?;
        let c = self.c();
        let ui = set.get(i);
        let rest = set.without(i);
        let (l1, l2) = self.vacuum_weights(u);
        let t1 = self.twist.weight1() * l1 * dg_first(ui, u, c) * rest.prod_left(u, |a, b| f(a, b, c));
        let t2 = self.twist.weight2() * l2 * (-dg_first(u, ui, c)) * rest.prod_right(u, |a, b| f(a, b, c));
        let t3 = self.two_rho() * l1 * l2 * (-dg_first(u, ui, c)) * rest.prod_right(u, |a, b| g(a, b, c));
        Ok(t1 + t2 + t3)
    }

    /// `J_ij = ∂Λ(v_j, ū)/∂u_i`.
    pub fn eigenvalue_jacobian(&self, set: &VariableSet<T>, probes: &VariableSet<T>) -> Result<CMatrix<T>> {
        let n = set.len();
        if probes.len() != n {
            return Err(Error::Arity {
                expected: n,
                got: probes.len(),
            });
        }
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self.eigenvalue_gradient(probes.get(j), set, i)?;
            }
        }
        Ok(out)
    }

    /// `∂E(u_i, ū_i)/∂u_k`, the Jacobian of the Bethe residual map.
    pub fn bethe_jacobian(&self, set: &VariableSet<T>) -> Result<CMatrix<T>> {
        let n = set.len();
        let c = self.c();
        let (x, y, z) = (self.twist.weight1(), self.twist.weight2(), self.two_rho());
        let mut jac = CMatrix::zeros(n, n);
        for i in 0..n {
            let ui = set.get(i);
            let rest = set.without(i);
            self.ensure_apart(ui, &rest)?;
            let (l1, l2) = self.vacuum_weights(ui);
            let (d1, d2) = self.chain.vacuum_weight_derivatives(ui);
            let f1: Vec<_> = rest.iter().map(|&v| f(v, ui, c)).collect();
            let f2: Vec<_> = rest.iter().map(|&v| f(ui, v, c)).collect();
            let gg: Vec<_> = rest.iter().map(|&v| g(ui, v, c)).collect();
            let df1: Vec<_> = rest.iter().map(|&v| -dg_first(v, ui, c)).collect();
            let df2: Vec<_> = rest.iter().map(|&v| dg_first(ui, v, c)).collect();
            let prod = |v: &[Complex<T>]| v.iter().copied().product::<Complex<T>>();
            let (p1, p2, pg) = (prod(&f1), prod(&f2), prod(&gg));
            jac[(i, i)] = -x * (d1 * p1 + l1 * product_derivative(&f1, &df1))
                + y * (d2 * p2 + l2 * product_derivative(&f2, &df2))
                + z * ((d1 * l2 + l1 * d2) * pg + l1 * l2 * product_derivative(&gg, &df2));
            let mut slot = 0;
            for k in 0..n {
                if k == i {
                    continue;
                }
                let uk = set.get(k);
                let skip = |v: &[Complex<T>]| {
                    v.iter()
                        .enumerate()
                        .filter(|&(m, _)| m != slot)
                        .map(|(_, &w)| w)
                        .product::<Complex<T>>()
                };
                jac[(i, k)] = -x * l1 * dg_first(uk, ui, c) * skip(&f1)
                    + y * l2 * (-dg_first(ui, uk, c)) * skip(&f2)
                    + z * l1 * l2 * (-dg_first(ui, uk, c)) * skip(&gg);
                slot += 1;
            }
        }
        Ok(jac)
    }

    /// Coefficients of the transfer-matrix action on `B^M(ū)`:
    /// wanted `Λ_d(u,ū|κ̃−ρ,κ−ρ)`, unwanted `g(u_i,u) E_d(u_i,ū_i|κ̃−ρ,κ−ρ)`,
    /// raising `κ⁻/μ`.
    pub fn transfer_action(&self, u: Complex<T>, set: &VariableSet<T>) -> Result<OffShellDecomposition<T>> {
        let (x, y) = (self.twist.weight1(), self.twist.weight2());
        let zero = Complex::zero();
        let c = self.c();
        let wanted = self.eigenvalue_with(u, set, x, y, zero)?;
        let unwanted = (0..set.len())
            .map(|i| Ok(g(set.get(i), u, c) * self.bethe_with(i, set, x, y, zero)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(OffShellDecomposition {
            wanted,
            unwanted,
            raising: self.twist.raising_coefficient(),
        })
    }

    /// Decomposition of `(κ⁻/μ) B^{N+1}(u, ū)`: wanted `Λ_g(u, ū)`, unwanted
    /// `g(u_i,u) E_g(u_i,ū_i)`; `raising` holds the left-hand coefficient `κ⁻/μ`.
    pub fn raising_action(&self, u: Complex<T>, set: &VariableSet<T>) -> Result<OffShellDecomposition<T>> {
        let zero = Complex::zero();
        let c = self.c();
        let z = self.two_rho();
        let wanted = self.eigenvalue_with(u, set, zero, zero, z)?;
        let unwanted = (0..set.len())
            .map(|i| Ok(g(set.get(i), u, c) * self.bethe_with(i, set, zero, zero, z)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(OffShellDecomposition {
            wanted,
            unwanted,
            raising: self.twist.raising_coefficient(),
        })
    }

    /// `λ₁` as a polynomial in `u`.
    pub fn lambda1_poly(&self) -> Poly<T> {
        let c = self.c();
        let shifted: Vec<_> = self.chain.inhomogeneities().iter().map(|&t| t - c).collect();
        Poly::from_roots(&shifted).scale(Complex::<T>::one() / c.powu(self.sites() as u32))
    }

    pub fn lambda2_poly(&self) -> Poly<T> {
        let c = self.c();
        Poly::from_roots(self.chain.inhomogeneities()).scale(Complex::<T>::one() / c.powu(self.sites() as u32))
    }

    /// Right-hand side of the T-Q relation,
    /// `(κ̃−ρ)λ₁(u)Q(u−c) + (κ−ρ)λ₂(u)Q(u+c) + 2ρ c^N λ₁(u)λ₂(u)`, as a polynomial.
    pub fn tq_rhs(&self, q: &Poly<T>) -> Poly<T> {
        let c = self.c();
        let l1 = self.lambda1_poly();
        let l2 = self.lambda2_poly();
        let a = &l1 * &q.shift(-c);
        let b = &l2 * &q.shift(c);
        let inhom = (&l1 * &l2).scale(self.two_rho() * c.powu(self.sites() as u32));
        &(&a.scale(self.twist.weight1()) + &b.scale(self.twist.weight2())) + &inhom
    }

    /// Largest coefficient modulus of `Λ(u)Q(u) − RHS(u)`.
    pub fn tq_polynomial_residual(&self, lambda: &Poly<T>, q: &Poly<T>) -> T {
        (&(lambda * q) - &self.tq_rhs(q)).max_coeff_abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;
    use crate::twist::{diagonal_limit, factorize_twist, RhoBranch, TwistParams};

    type C = Complex<f64>;

    fn re(x: f64) -> C {
        Complex::new(x, 0.0)
    }

    fn config_a() -> SpectralContext<f64> {
        let chain = ChainParams::homogeneous(1, re(1.0)).unwrap();
        let k = TwistParams::new(re(2.0), re(1.0), re(1.0), re(1.0));
        SpectralContext::new(chain, factorize_twist(&k, RhoBranch::Minus).unwrap())
    }

    fn set(ctx: &SpectralContext<f64>, v: &[C]) -> VariableSet<f64> {
        ctx.variables(v.to_vec()).unwrap()
    }

    const GOLDEN: f64 = 1.618_033_988_749_895;

    #[test]
    fn kernel_values() {
        let k = kernels(re(2.0), re(1.0), re(1.0)).unwrap();
        assert_eq!((k.g, k.f), (re(1.0), re(2.0)));
        assert_eq!(h(re(1.0), re(1.0), re(1.0)), re(1.0));
        assert!(matches!(kernels(re(1.0), re(1.0), re(1.0)), Err(Error::Coincidence(_))));
    }

    #[test]
    fn set_product_convention() {
        let s = VariableSet::new(vec![re(2.0), re(3.0)], 1e-9).unwrap();
        assert!((s.prod_left(re(1.0), |a, b| f(a, b, re(1.0))) - re(3.0)).norm() < 1e-15);
        assert_eq!(VariableSet::<f64>::empty().prod_left(re(1.0), |a, b| f(a, b, re(1.0))), re(1.0));
    }

    #[test]
    fn variable_set_rejects_coincidences() {
        assert!(matches!(
            VariableSet::new(vec![re(0.5), re(0.5)], 1e-9),
            Err(Error::Coincidence(_))
        ));
    }

    #[test]
    fn vacuum_weights_examples() {
        let chain = ChainParams::homogeneous(2, re(1.0)).unwrap();
        assert_eq!(chain.vacuum_weights(re(1.0)), (re(4.0), re(1.0)));
        let inhom = ChainParams::new(2, re(1.0), vec![cplx(0.3, 0.1), re(-0.2)]).unwrap();
        assert_eq!(inhom.lambda2(cplx(0.3, 0.1)), re(0.0));
        let single = ChainParams::homogeneous(1, re(1.0)).unwrap();
        for u in [re(0.2), cplx(-1.0, 3.0)] {
            let (l1, l2) = single.vacuum_weights(u);
            assert!((l1 - l2 - re(1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn config_a_eigenvalues() {
        let ctx = config_a();
        let s5 = 5f64.sqrt();
        let up = set(&ctx, &[re(GOLDEN)]);
        let down = set(&ctx, &[re(-1.309_016_994_374_947_4)]);
        assert!((ctx.eigenvalue(re(0.0), &up).unwrap() - re((3.0 + s5) / 2.0)).norm() < 1e-12);
        assert!((ctx.eigenvalue(re(0.0), &down).unwrap() - re((3.0 - s5) / 2.0)).norm() < 1e-12);
        // full branch 3u + (3+√5)/2
        let u = cplx(0.4, -0.3);
        assert!((ctx.eigenvalue(u, &up).unwrap() - (u * 3.0 + (3.0 + s5) / 2.0)).norm() < 1e-12);
    }

    #[test]
    fn config_a_bethe_residuals() {
        let ctx = config_a();
        assert!(ctx.bethe_residual(0, &set(&ctx, &[re(GOLDEN)])).unwrap().norm() < 1e-14);
        let rho = ctx.rho();
        let e1 = ctx.bethe_residual(0, &set(&ctx, &[re(1.0)])).unwrap();
        assert!((e1 - (rho * 5.0 - 3.0)).norm() < 1e-14);
        assert!((e1 - re(-1.090_169_943_749_474)).norm() < 1e-12);
        // N = 1 quadratic 2ρu² + (2ρ+κ−κ̃)u − (κ̃−ρ)
        let u = cplx(0.3, 0.8);
        let quad = rho * 2.0 * u * u + (rho * 2.0 - 1.0) * u - (re(2.0) - rho);
        assert!((ctx.bethe_residual(0, &set(&ctx, &[u])).unwrap() - quad).norm() < 1e-13);
    }

    #[test]
    fn eigenvalue_rejects_coincidence() {
        let ctx = config_a();
        let s = set(&ctx, &[re(0.5)]);
        assert!(matches!(ctx.eigenvalue(re(0.5), &s), Err(Error::Coincidence(_))));
    }

    #[test]
    fn diagonal_limit_eigenvalue_drops_inhomogeneous_term() {
        let chain = ChainParams::homogeneous(2, re(1.0)).unwrap();
        let k = TwistParams::new(re(2.0), re(0.5), re(0.0), re(0.0));
        let ctx = SpectralContext::new(chain, diagonal_limit(&k).unwrap());
        let s = set(&ctx, &[cplx(0.3, 0.1), cplx(-0.4, 0.2)]);
        let u = cplx(0.9, -0.1);
        let expected = ctx.eigenvalue_diagonal(u, &s, re(2.0), re(0.5)).unwrap();
        assert!((ctx.eigenvalue(u, &s).unwrap() - expected).norm() < 1e-15);
    }

    #[test]
    fn single_root_gradient_closed_form() {
        let ctx = config_a();
        let (u1, v) = (cplx(0.7, 0.2), cplx(-0.3, 0.5));
        let s = set(&ctx, &[u1]);
        let grad = ctx.eigenvalue_gradient(v, &s, 0).unwrap();
        // E¹ evaluated at v with the empty set
        let ev = ctx.bethe_residual(0, &set(&ctx, &[v])).unwrap();
        let expected = ctx.c() * ev / ((u1 - v) * (u1 - v));
        assert!((grad - expected).norm() < 1e-13);
    }

    #[test]
    fn tq_residual_config_a() {
        let ctx = config_a();
        let s5 = 5f64.sqrt();
        let lambda = Poly::new(vec![re((3.0 + s5) / 2.0), re(3.0)]);
        let q = Poly::from_roots(&[re(GOLDEN)]);
        assert!(ctx.tq_polynomial_residual(&lambda, &q) < 1e-9);
        let perturbed = Poly::from_roots(&[re(GOLDEN + 0.1)]);
        assert!(ctx.tq_polynomial_residual(&lambda, &perturbed) > 1e-2);
    }
}
