//! Twist matrix `K`, its factorisation `K = L D L`, and the modified
//! operators `ν_ij` built from it.

use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::chain::{vector_residual, ChainParams, MonodromyFamily};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::tensor::{CMatrix, MatrixPolynomial};

/// The four entries of `K = [[κ̃, κ⁺], [κ⁻, κ]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwistParams<T> {
    pub kappa_tilde: Complex<T>,
    pub kappa: Complex<T>,
    pub kappa_plus: Complex<T>,
    pub kappa_minus: Complex<T>,
}

impl<T: Real> TwistParams<T> {
    pub fn new(kappa_tilde: Complex<T>, kappa: Complex<T>, kappa_plus: Complex<T>, kappa_minus: Complex<T>) -> Self {
        Self {
            kappa_tilde,
            kappa,
            kappa_plus,
            kappa_minus,
        }
    }

    /// `γ = κ̃κ − κ⁺κ⁻ = det K`.
    pub fn gamma(&self) -> Complex<T> {
        self.kappa_tilde * self.kappa - self.kappa_plus * self.kappa_minus
    }

    pub fn matrix(&self) -> CMatrix<T> {
        CMatrix::from_rows(vec![
            vec![self.kappa_tilde, self.kappa_plus],
            vec![self.kappa_minus, self.kappa],
        ])
        .expect("2x2 twist matrix")
    }

    pub fn is_diagonal(&self) -> bool {
        self.kappa_plus.is_zero() && self.kappa_minus.is_zero()
    }

    /// The twist eigenvalue `α = ½(κ + κ̃ + √((κ − κ̃)² + 4κ⁺κ⁻))`, principal root.
    pub fn alpha(&self) -> Complex<T> {
        let d = self.kappa - self.kappa_tilde;
        let disc = (d * d + self.kappa_plus * self.kappa_minus * lit::<T>(4.0)).sqrt();
        (self.kappa + self.kappa_tilde + disc) * lit::<T>(0.5)
    }
}

/// Which root of `ρ² − (κ̃ + κ)ρ + κ⁺κ⁻ = 0` is used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhoBranch {
    /// The root of smaller modulus.
    Minus,
    /// The complementary root `κ̃ + κ − ρ_minus`.
    Plus,
}

impl RhoBranch {
    pub fn other(self) -> Self {
        match self {
            RhoBranch::Minus => RhoBranch::Plus,
            RhoBranch::Plus => RhoBranch::Minus,
        }
    }
}

impl fmt::Display for RhoBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RhoBranch::Minus => "minus",
            RhoBranch::Plus => "plus",
        })
    }
}

/// `K = L D L` with `L = μ^{1/2} [[1, ρ/κ⁻], [ρ/κ⁺, 1]]`, `D = diag(κ̃ − ρ, κ − ρ)`.
///
/// The diagonal (U(1)) limit has `ρ = 0`, `μ = 1`, `L = I`; there the ratios
/// `ρ/κ^±` are taken as zero.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistFactorization<T> {
    pub params: TwistParams<T>,
    /// `None` in the diagonal limit.
    pub branch: Option<RhoBranch>,
    pub rho: Complex<T>,
    pub mu: Complex<T>,
    pub l: CMatrix<T>,
    pub d: CMatrix<T>,
    pub alpha: Complex<T>,
    rho_over_kappa_plus: Complex<T>,
    rho_over_kappa_minus: Complex<T>,
}

/// Both roots of the ρ quadratic, smaller modulus first.
pub fn rho_roots<T: Real>(k: &TwistParams<T>) -> (Complex<T>, Complex<T>) {
    let s = k.kappa_tilde + k.kappa;
    let prod = k.kappa_plus * k.kappa_minus;
    let mut r = (s * s - prod * lit::<T>(4.0)).sqrt();
    // align the root with s so that s + r does not cancel
    if (s.conj() * r).re < T::zero() {
        r = -r;
    }
    let big_half = (s + r) * lit::<T>(0.5);
    let small = if big_half.is_zero() { Complex::zero() } else { prod / big_half };
    (small, s - small)
}

pub fn factorize_twist<T: Real>(k: &TwistParams<T>, branch: RhoBranch) -> Result<TwistFactorization<T>> {
    if (k.kappa_plus * k.kappa_minus).is_zero() {
        return Err(Error::DegenerateTwist(
            "kappa_plus * kappa_minus = 0; use the diagonal (U(1)) limit instead".into(),
        ));
    }
    let s = k.kappa_tilde + k.kappa;
    let (small, large) = rho_roots(k);
    let rho = match branch {
        RhoBranch::Minus => small,
        RhoBranch::Plus => large,
    };
    let denom = s - rho * lit::<T>(2.0);
    if denom.norm() <= lit::<T>(1e-12) * s.norm().max(T::one()) {
        return Err(Error::MuSingular {
            branch: branch.to_string(),
            other: branch.other().to_string(),
        });
    }
    let mu = (s - rho) / denom;
    let a = rho / k.kappa_minus;
    let b = rho / k.kappa_plus;
    let l = CMatrix::from_rows(vec![vec![Complex::one(), a], vec![b, Complex::one()]])
        .expect("2x2")
        .scale(mu.sqrt());
    let d = CMatrix::diag(&[k.kappa_tilde - rho, k.kappa - rho]);
    Ok(TwistFactorization {
        params: *k,
        branch: Some(branch),
        rho,
        mu,
        l,
        d,
        alpha: k.alpha(),
        rho_over_kappa_plus: b,
        rho_over_kappa_minus: a,
    })
}

/// The U(1)-symmetric limit `κ⁺ = κ⁻ = 0` with `ρ = 0`.
pub fn diagonal_limit<T: Real>(k: &TwistParams<T>) -> Result<TwistFactorization<T>> {
    if !k.is_diagonal() {
        return Err(Error::Parameter(
            "the diagonal limit needs kappa_plus = kappa_minus = 0".into(),
        ));
    }
    Ok(TwistFactorization {
        params: *k,
        branch: None,
        rho: Complex::zero(),
        mu: Complex::one(),
        l: CMatrix::identity(2),
        d: CMatrix::diag(&[k.kappa_tilde, k.kappa]),
        alpha: k.alpha(),
        rho_over_kappa_plus: Complex::zero(),
        rho_over_kappa_minus: Complex::zero(),
    })
}

impl<T: Real> TwistFactorization<T> {
    /// Factorises generic twists and falls back to the diagonal limit when
    /// `κ⁺ = κ⁻ = 0`.
    pub fn new(k: &TwistParams<T>, branch: RhoBranch) -> Result<Self> {
        if k.is_diagonal() {
            diagonal_limit(k)
        } else {
            factorize_twist(k, branch)
        }
    }

    pub fn is_diagonal_limit(&self) -> bool {
        self.branch.is_none()
    }

    pub fn rho_over_kappa_plus(&self) -> Complex<T> {
        self.rho_over_kappa_plus
    }

    pub fn rho_over_kappa_minus(&self) -> Complex<T> {
        self.rho_over_kappa_minus
    }

    /// `κ̃ − ρ`
    pub fn weight1(&self) -> Complex<T> {
        self.params.kappa_tilde - self.rho
    }

    /// `κ − ρ`
    pub fn weight2(&self) -> Complex<T> {
        self.params.kappa - self.rho
    }

    /// `κ⁻/μ`, coefficient of the raised vector in the transfer action.
    pub fn raising_coefficient(&self) -> Complex<T> {
        self.params.kappa_minus / self.mu
    }

    /// `μ² / (κ̃ + κ − ρ)`, the per-root constant of the determinant formulas.
    pub fn overlap_constant(&self) -> Complex<T> {
        self.mu * self.mu / (self.params.kappa_tilde + self.params.kappa - self.rho)
    }

    /// `‖L D L − K‖` entrywise maximum.
    pub fn reconstruction_error(&self) -> T {
        let ldl = &(&self.l * &self.d) * &self.l;
        (&ldl - &self.params.matrix()).max_abs()
    }
}

/// `ν_ij` as combinations of `t_ij` from the entries of `L T L`.
pub fn build_modified_operators<T: Real>(
    m: &MonodromyFamily<T>,
    f: &TwistFactorization<T>,
) -> Result<MonodromyFamily<T>> {
    let mu = f.mu;
    let a = f.rho_over_kappa_minus;
    let b = f.rho_over_kappa_plus;
    let ab = a * b;
    let comb = |terms: &[(Complex<T>, &MatrixPolynomial<T>)]| {
        let scaled: Vec<_> = terms.iter().map(|&(w, p)| (w * mu, p)).collect();
        MatrixPolynomial::combine(&scaled)
    };
    let one = Complex::one();
    Ok(MonodromyFamily {
        t11: comb(&[(one, &m.t11), (b, &m.t12), (a, &m.t21), (ab, &m.t22)])?,
        t12: comb(&[(one, &m.t12), (a, &m.t11), (a, &m.t22), (a * a, &m.t21)])?,
        t21: comb(&[(one, &m.t21), (b, &m.t11), (b, &m.t22), (b * b, &m.t12)])?,
        t22: comb(&[(one, &m.t22), (b, &m.t12), (a, &m.t21), (ab, &m.t11)])?,
    })
}

/// Residual of `(κ̃ − ρ)ν11(u) + (κ − ρ)ν22(u) = t(u)`.
pub fn modified_diagonal_residual<T: Real>(
    nu: &MonodromyFamily<T>,
    f: &TwistFactorization<T>,
    transfer: &MatrixPolynomial<T>,
    u: Complex<T>,
) -> T {
    let lhs = &nu.t11.eval(u).scale(f.weight1()) + &nu.t22.eval(u).scale(f.weight2());
    crate::chain::operator_residual(&transfer.eval(u), &lhs)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VacuumActionReport<T> {
    pub nu11: T,
    pub nu22: T,
    pub nu21: T,
}

impl<T: Real> VacuumActionReport<T> {
    pub fn max(&self) -> T {
        self.nu11.max(self.nu22).max(self.nu21)
    }
}

/// Residuals of the modified highest-weight actions of `ν11`, `ν22`, `ν21`.
pub fn vacuum_action_residuals<T: Real>(
    nu: &MonodromyFamily<T>,
    f: &TwistFactorization<T>,
    p: &ChainParams<T>,
    u: Complex<T>,
) -> VacuumActionReport<T> {
    let dim = p.dim();
    let mut vac = vec![Complex::zero(); dim];
    vac[0] = Complex::one();
    let (l1, l2) = p.vacuum_weights(u);
    let b = f.rho_over_kappa_plus;
    let raised = nu.t12.eval(u).mul_vec(&vac);
    let expected = |diag: Complex<T>, raise: Complex<T>| -> Vec<Complex<T>> {
        raised
            .iter()
            .enumerate()
            .map(|(i, &z)| z * raise + if i == 0 { diag } else { Complex::zero() })
            .collect()
    };
    VacuumActionReport {
        nu11: vector_residual(&nu.t11.eval(u).mul_vec(&vac), &expected(l1, b)),
        nu22: vector_residual(&nu.t22.eval(u).mul_vec(&vac), &expected(l2, b)),
        nu21: vector_residual(&nu.t21.eval(u).mul_vec(&vac), &expected(b * (l1 + l2), b * b)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_monodromy, exchange_relation_residuals};
    use crate::scalar::cplx;

    type C = Complex<f64>;

    fn re(x: f64) -> C {
        Complex::new(x, 0.0)
    }

    fn config_a() -> TwistParams<f64> {
        TwistParams::new(re(2.0), re(1.0), re(1.0), re(1.0))
    }

    #[test]
    fn config_a_factorisation() {
        let f = factorize_twist(&config_a(), RhoBranch::Minus).unwrap();
        let s5 = 5f64.sqrt();
        assert!((f.rho - re((3.0 - s5) / 2.0)).norm() < 1e-14);
        assert!((f.mu - re(1.170820393249937)).norm() < 1e-12);
        assert!(f.reconstruction_error() < 1e-12);
        assert!((f.alpha - re((3.0 + s5) / 2.0)).norm() < 1e-14);
        // K w = α w
        let k = config_a().matrix();
        let shifted = &k - &CMatrix::identity(2).scale(f.alpha);
        let w = [shifted[(0, 1)], -shifted[(0, 0)]];
        let kw = k.mul_vec(&w);
        assert!((kw[0] - f.alpha * w[0]).norm() < 1e-12 && (kw[1] - f.alpha * w[1]).norm() < 1e-12);
    }

    #[test]
    fn factorisation_relations() {
        let k = TwistParams::new(cplx(0.7, 0.2), cplx(1.3, -0.1), cplx(0.4, 0.3), cplx(0.9, -0.5));
        for branch in [RhoBranch::Minus, RhoBranch::Plus] {
            let f = factorize_twist(&k, branch).unwrap();
            let s = k.kappa_tilde + k.kappa;
            assert!((f.mu * (s - f.rho * 2.0) - (s - f.rho)).norm() < 1e-13);
            let lhs = f.rho / k.kappa_plus * (s - f.rho * 2.0);
            assert!((lhs - k.kappa_minus / f.mu).norm() < 1e-13);
        }
    }

    #[test]
    fn vanishing_kappa_plus_restores_u1() {
        let k = TwistParams::new(re(2.0), re(1.0), re(1e-10), re(1.0));
        let f = factorize_twist(&k, RhoBranch::Minus).unwrap();
        assert!(f.rho.norm() < 1e-9);
        assert!((f.mu - re(1.0)).norm() < 1e-9);
        // ρ/κ⁺ stays finite: κ⁻/(κ̃ + κ)
        let expected = CMatrix::from_real_rows(&[&[1.0, 0.0], &[1.0 / 3.0, 1.0]]).unwrap();
        assert!((&f.l - &expected).max_abs() < 1e-9);
        let both = TwistParams::new(re(2.0), re(1.0), re(1e-6), re(1e-6));
        let f = factorize_twist(&both, RhoBranch::Minus).unwrap();
        assert!((&f.l - &CMatrix::identity(2)).max_abs() < 1e-6);
    }

    #[test]
    fn degenerate_and_mu_singular_errors() {
        let diag = TwistParams::new(re(2.0), re(1.0), re(0.0), re(0.0));
        assert!(matches!(
            factorize_twist(&diag, RhoBranch::Minus),
            Err(Error::DegenerateTwist(_))
        ));
        // (κ̃+κ)² = 4κ⁺κ⁻ gives the double root ρ = (κ̃+κ)/2
        let double = TwistParams::new(re(1.0), re(1.0), re(1.0), re(1.0));
        match factorize_twist(&double, RhoBranch::Minus) {
            Err(Error::MuSingular { other, .. }) => assert_eq!(other, "plus"),
            other => panic!("expected mu singularity, got {other:?}"),
        }
    }

    #[test]
    fn diagonal_limit_is_identity_transformation() {
        let p = ChainParams::new(2, re(1.0), vec![re(0.2), re(-0.1)]).unwrap();
        let m = build_monodromy(&p).unwrap();
        let k = TwistParams::new(re(2.0), re(1.0), re(0.0), re(0.0));
        let f = diagonal_limit(&k).unwrap();
        let nu = build_modified_operators(&m, &f).unwrap();
        let u = cplx(0.3, 0.7);
        for (i, j) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            assert_eq!(nu.entry(i, j).eval(u), m.entry(i, j).eval(u));
        }
        let r = vacuum_action_residuals(&nu, &f, &p, u);
        assert!(r.max() < 1e-14);
        assert_eq!(f.alpha, re(2.0));
    }

    #[test]
    fn single_site_raising_operator_on_vacuum() {
        let p = ChainParams::homogeneous(1, re(1.0)).unwrap();
        let m = build_monodromy(&p).unwrap();
        let f = factorize_twist(&config_a(), RhoBranch::Minus).unwrap();
        let nu = build_modified_operators(&m, &f).unwrap();
        let u = re(0.3);
        let v = nu.t12.eval(u).mul_vec(&[re(1.0), re(0.0)]);
        assert!((v[0] - f.mu * f.rho * (u * 2.0 + 1.0)).norm() < 1e-13);
        assert!((v[1] - f.mu).norm() < 1e-13);
        let r = vacuum_action_residuals(&nu, &f, &p, u);
        assert!(r.max() < 1e-12, "{r:?}");
    }

    #[test]
    fn modified_operators_satisfy_exchange_relations() {
        let p = ChainParams::new(3, re(1.0), vec![re(0.1), re(-0.2), re(0.05)]).unwrap();
        let m = build_monodromy(&p).unwrap();
        let k = TwistParams::new(cplx(0.7, 0.2), cplx(1.3, -0.1), cplx(0.4, 0.3), cplx(0.9, -0.5));
        let f = factorize_twist(&k, RhoBranch::Minus).unwrap();
        let nu = build_modified_operators(&m, &f).unwrap();
        let t = m.transfer(&k).unwrap();
        let (u, v) = (cplx(0.4, -0.3), cplx(-0.2, 0.6));
        assert!(exchange_relation_residuals(&nu, p.c(), u, v).max() < 1e-10);
        assert!(modified_diagonal_residual(&nu, &f, &t, u) < 1e-11);
        assert!(vacuum_action_residuals(&nu, &f, &p, u).max() < 1e-10);
    }
}
