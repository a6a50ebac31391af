//! Physical operators of the twisted XXX chain: R-matrix, monodromy entries,
//! transfer matrix and Hamiltonian.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::bethe::{f, g};
use crate::error::{Error, Result};
use crate::scalar::{lit, vec_norm, Real};
use crate::tensor::{default_nodes, inverse, kron, poly_from_samples, CMatrix, MatrixPolynomial};
use crate::twist::TwistParams;

/// Site count, crossing parameter `c` and inhomogeneities.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainParams<T> {
    sites: usize,
    c: Complex<T>,
    inhomogeneities: Vec<Complex<T>>,
}

impl<T: Real> ChainParams<T> {
    pub fn new(sites: usize, c: Complex<T>, inhomogeneities: Vec<Complex<T>>) -> Result<Self> {
        if sites == 0 {
            return Err(Error::Parameter("chain needs at least one site".into()));
        }
        if c.is_zero() {
            return Err(Error::Parameter("crossing parameter c must be nonzero".into()));
        }
        if inhomogeneities.len() != sites {
            return Err(Error::Parameter(format!(
                "expected {sites} inhomogeneities, got {}",
                inhomogeneities.len()
            )));
        }
        Ok(Self {
            sites,
            c,
            inhomogeneities,
        })
    }

    /// Chain with all inhomogeneities set to zero.
    pub fn homogeneous(sites: usize, c: Complex<T>) -> Result<Self> {
        Self::new(sites, c, vec![Complex::zero(); sites])
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn c(&self) -> Complex<T> {
        self.c
    }

    pub fn inhomogeneities(&self) -> &[Complex<T>] {
        &self.inhomogeneities
    }

    /// Dimension `2^N` of the quantum space.
    pub fn dim(&self) -> usize {
        1 << self.sites
    }

    pub fn is_homogeneous(&self) -> bool {
        self.inhomogeneities.iter().all(|t| t.is_zero())
    }

    pub fn lambda1(&self, u: Complex<T>) -> Complex<T> {
        self.inhomogeneities
            .iter()
            .map(|&th| (u - th + self.c) / self.c)
            .product()
    }

    pub fn lambda2(&self, u: Complex<T>) -> Complex<T> {
        self.inhomogeneities
            .iter()
            .map(|&th| (u - th) / self.c)
            .product()
    }

    /// `(λ₁(u), λ₂(u))`, the eigenvalues of `t11`, `t22` on the vacuum.
    pub fn vacuum_weights(&self, u: Complex<T>) -> (Complex<T>, Complex<T>) {
        (self.lambda1(u), self.lambda2(u))
    }

    /// `(λ₁'(u), λ₂'(u))`.
    pub fn vacuum_weight_derivatives(&self, u: Complex<T>) -> (Complex<T>, Complex<T>) {
        let inv_c = Complex::<T>::one() / self.c;
        let ders = vec![inv_c; self.sites];
        let v1: Vec<_> = self.inhomogeneities.iter().map(|&th| (u - th + self.c) / self.c).collect();
        let v2: Vec<_> = self.inhomogeneities.iter().map(|&th| (u - th) / self.c).collect();
        (
            crate::scalar::product_derivative(&v1, &ders),
            crate::scalar::product_derivative(&v2, &ders),
        )
    }
}

/// Local 2×2 spin operators and the 4×4 permutation.
pub mod local {
    use super::*;

    fn m2<T: Real>(a: [[(f64, f64); 2]; 2]) -> CMatrix<T> {
        CMatrix::from_fn(2, 2, |i, j| Complex::new(lit(a[i][j].0), lit(a[i][j].1)))
    }

    pub fn identity<T: Real>() -> CMatrix<T> {
        CMatrix::identity(2)
    }

    pub fn sigma_plus<T: Real>() -> CMatrix<T> {
        m2([[(0., 0.), (1., 0.)], [(0., 0.), (0., 0.)]])
    }

    pub fn sigma_minus<T: Real>() -> CMatrix<T> {
        m2([[(0., 0.), (0., 0.)], [(1., 0.), (0., 0.)]])
    }

    pub fn sigma_x<T: Real>() -> CMatrix<T> {
        m2([[(0., 0.), (1., 0.)], [(1., 0.), (0., 0.)]])
    }

    pub fn sigma_y<T: Real>() -> CMatrix<T> {
        m2([[(0., 0.), (0., -1.)], [(0., 1.), (0., 0.)]])
    }

    pub fn sigma_z<T: Real>() -> CMatrix<T> {
        m2([[(1., 0.), (0., 0.)], [(0., 0.), (-1., 0.)]])
    }

    /// Elementary unit `E_ij` (0-based indices).
    pub fn unit<T: Real>(i: usize, j: usize) -> CMatrix<T> {
        let mut m = CMatrix::zeros(2, 2);
        m[(i, j)] = Complex::one();
        m
    }

    /// `P = Σ E_ij ⊗ E_ji`.
    pub fn permutation<T: Real>() -> CMatrix<T> {
        let mut p = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                p = &p + &kron(&unit(i, j), &unit(j, i));
            }
        }
        p
    }
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` on the 0-based `site`.
pub fn embed<T: Real>(op: &CMatrix<T>, site: usize, sites: usize) -> CMatrix<T> {
    let left = CMatrix::identity(1 << site);
    let right = CMatrix::identity(1 << (sites - site - 1));
    kron(&kron(&left, op), &right)
}

/// `R(u) = u/c + P` on `C² ⊗ C²`.
pub fn r_matrix<T: Real>(u: Complex<T>, c: Complex<T>) -> Result<CMatrix<T>> {
    if c.is_zero() {
        return Err(Error::Parameter("crossing parameter c must be nonzero".into()));
    }
    Ok(&CMatrix::identity(4).scale(u / c) + &local::permutation())
}

/// Block entries `t_ij(u)` of a 2×2 operator-valued matrix, or the modified
/// entries `ν_ij(u)`; each is a matrix polynomial of degree at most `N`.
#[derive(Clone, Debug)]
pub struct MonodromyFamily<T> {
    pub t11: MatrixPolynomial<T>,
    pub t12: MatrixPolynomial<T>,
    pub t21: MatrixPolynomial<T>,
    pub t22: MatrixPolynomial<T>,
}

/// Monodromy entries evaluated at one spectral parameter.
#[derive(Clone, Debug)]
pub struct MonodromyAt<T> {
    pub t11: CMatrix<T>,
    pub t12: CMatrix<T>,
    pub t21: CMatrix<T>,
    pub t22: CMatrix<T>,
}

impl<T: Real> MonodromyAt<T> {
    fn from_blocks([[a, b], [c, d]]: [[CMatrix<T>; 2]; 2]) -> Self {
        Self {
            t11: a,
            t12: b,
            t21: c,
            t22: d,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> &CMatrix<T> {
        match (i, j) {
            (1, 1) => &self.t11,
            (1, 2) => &self.t12,
            (2, 1) => &self.t21,
            (2, 2) => &self.t22,
            _ => panic!("monodromy entry ({i},{j}) out of range"),
        }
    }
}

impl<T: Real> MonodromyFamily<T> {
    /// Entry with 1-based indices, matching `t_ij`.
    pub fn entry(&self, i: usize, j: usize) -> &MatrixPolynomial<T> {
        match (i, j) {
            (1, 1) => &self.t11,
            (1, 2) => &self.t12,
            (2, 1) => &self.t21,
            (2, 2) => &self.t22,
            _ => panic!("monodromy entry ({i},{j}) out of range"),
        }
    }

    pub fn at(&self, u: Complex<T>) -> MonodromyAt<T> {
        MonodromyAt {
            t11: self.t11.eval(u),
            t12: self.t12.eval(u),
            t21: self.t21.eval(u),
            t22: self.t22.eval(u),
        }
    }

    /// `t(u) = κ̃ t11 + κ t22 + κ⁺ t21 + κ⁻ t12`.
    pub fn transfer(&self, k: &TwistParams<T>) -> Result<MatrixPolynomial<T>> {
        MatrixPolynomial::combine(&[
            (k.kappa_tilde, &self.t11),
            (k.kappa, &self.t22),
            (k.kappa_plus, &self.t21),
            (k.kappa_minus, &self.t12),
        ])
    }
}

/// `T_a(u) = R_a1(u−θ₁)⋯R_aN(u−θ_N)` evaluated directly as 2×2 blocks.
pub fn monodromy_direct<T: Real>(p: &ChainParams<T>, u: Complex<T>) -> MonodromyAt<T> {
    let dim = p.dim();
    let id = CMatrix::identity(dim);
    let zero = CMatrix::zeros(dim, dim);
    let mut acc = [[id.clone(), zero.clone()], [zero, id]];
    for (site, &th) in p.inhomogeneities.iter().enumerate() {
        // block (i, j) of R_{a,site} is (u−θ)/c δ_ij + E_ji acting on `site`
        let shift = (u - th) / p.c;
        let lax: [[CMatrix<T>; 2]; 2] = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let e = embed(&local::unit(j, i), site, p.sites);
                if i == j {
                    &e + &CMatrix::identity(dim).scale(shift)
                } else {
                    e
                }
            })
        });
        acc = std::array::from_fn(|i| {
            std::array::from_fn(|j| &(&acc[i][0] * &lax[0][j]) + &(&acc[i][1] * &lax[1][j]))
        });
    }
    MonodromyAt::from_blocks(acc)
}

/// Samples the R-matrix product at `N + 1` nodes and interpolates each entry.
pub fn build_monodromy<T: Real>(p: &ChainParams<T>) -> Result<MonodromyFamily<T>> {
    let nodes = default_nodes(p.sites, p.c, &p.inhomogeneities);
    let evaluated: Vec<_> = nodes.iter().map(|&u| (u, monodromy_direct(p, u))).collect();
    let fit = |pick: fn(&MonodromyAt<T>) -> &CMatrix<T>| {
        let samples: Vec<_> = evaluated.iter().map(|(u, m)| (*u, pick(m).clone())).collect();
        poly_from_samples(&samples, p.sites)
    };
    Ok(MonodromyFamily {
        t11: fit(|m| &m.t11)?,
        t12: fit(|m| &m.t12)?,
        t21: fit(|m| &m.t21)?,
        t22: fit(|m| &m.t22)?,
    })
}

pub fn build_transfer<T: Real>(p: &ChainParams<T>, k: &TwistParams<T>) -> Result<MatrixPolynomial<T>> {
    build_monodromy(p)?.transfer(k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HamiltonianRoute {
    /// Nearest-neighbour sum with the twisted boundary substitution.
    Direct,
    /// Logarithmic derivative `2c t'(0) t(0)⁻¹ − N` of the transfer matrix.
    Transfer,
}

/// Coefficients `M_αβ` with `σ^α_{N+1} = Σ_β M_αβ σ^β_1`, `α, β ∈ {x, y, z}`.
pub fn boundary_coefficients<T: Real>(k: &TwistParams<T>) -> Result<[[Complex<T>; 3]; 3]> {
    let gamma = k.gamma();
    if gamma.is_zero() {
        return Err(Error::DegenerateTwist(
            "gamma = kappa_tilde kappa - kappa_plus kappa_minus vanishes".into(),
        ));
    }
    let (kt, kk, kp, km) = (k.kappa_tilde, k.kappa, k.kappa_plus, k.kappa_minus);
    let i = Complex::<T>::i();
    let half: T = lit(0.5);
    let (kt2, kk2, kp2, km2) = (kt * kt, kk * kk, kp * kp, km * km);
    let m = [
        [
            (kt2 + kk2 - kp2 - km2) * half,
            i * (kk2 - kt2 - kp2 + km2) * half,
            kk * km - kt * kp,
        ],
        [
            i * (kt2 - kk2 - kp2 + km2) * half,
            (kt2 + kk2 + kp2 + km2) * half,
            -i * (kt * kp + kk * km),
        ],
        [kk * kp - kt * km, i * (kt * km + kk * kp), kt * kk + kp * km],
    ];
    Ok(m.map(|row| row.map(|z| z / gamma)))
}

pub fn build_hamiltonian<T: Real>(
    p: &ChainParams<T>,
    k: &TwistParams<T>,
    route: HamiltonianRoute,
) -> Result<CMatrix<T>> {
    match route {
        HamiltonianRoute::Direct => hamiltonian_direct(p, k),
        HamiltonianRoute::Transfer => hamiltonian_from_transfer(p, k),
    }
}

fn hamiltonian_direct<T: Real>(p: &ChainParams<T>, k: &TwistParams<T>) -> Result<CMatrix<T>> {
    let m = boundary_coefficients(k)?;
    let n = p.sites;
    let sigmas = [local::sigma_x(), local::sigma_y(), local::sigma_z()];
    let mut h = CMatrix::zeros(p.dim(), p.dim());
    for site in 0..n.saturating_sub(1) {
        for s in &sigmas {
            h = &h + &(&embed(s, site, n) * &embed(s, site + 1, n));
        }
    }
    for (alpha, s) in sigmas.iter().enumerate() {
        let mut image = CMatrix::zeros(p.dim(), p.dim());
        for (beta, sb) in sigmas.iter().enumerate() {
            image = &image + &embed(sb, 0, n).scale(m[alpha][beta]);
        }
        h = &h + &(&embed(s, n - 1, n) * &image);
    }
    Ok(h)
}

fn hamiltonian_from_transfer<T: Real>(p: &ChainParams<T>, k: &TwistParams<T>) -> Result<CMatrix<T>> {
    if !p.is_homogeneous() {
        return Err(Error::Parameter(
            "the transfer-matrix Hamiltonian needs all inhomogeneities equal to zero".into(),
        ));
    }
    let t = build_transfer(p, k)?;
    let t0 = t.eval(Complex::zero());
    let dt0 = t.derivative().eval(Complex::zero());
    let inv = inverse(&t0).map_err(|_| Error::Singular("t(0) is not invertible".into()))?;
    if !inv.is_finite() {
        return Err(Error::Singular("t(0) is not invertible".into()));
    }
    let two_c = p.c * lit::<T>(2.0);
    let n: T = lit(p.sites as f64);
    Ok(&(&dt0 * &inv).scale(two_c) - &CMatrix::identity(p.dim()).scale(Complex::new(n, T::zero())))
}

/// Residuals of the three exchange relations used by the Bethe ansatz,
/// evaluated as operator identities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExchangeResiduals<T> {
    /// `t11(u)t12(v) = f(v,u)t12(v)t11(u) + g(u,v)t12(u)t11(v)`
    pub t11_t12: T,
    /// `t22(u)t12(v) = f(u,v)t12(v)t22(u) + g(v,u)t12(u)t22(v)`
    pub t22_t12: T,
    /// `t21(u)t12(v) = t12(u)t21(v) + g(u,v)(t11(v)t22(u) − t11(u)t22(v))`
    pub t21_t12: T,
}

impl<T: Real> ExchangeResiduals<T> {
    pub fn max(&self) -> T {
        self.t11_t12.max(self.t22_t12).max(self.t21_t12)
    }
}

/// `‖lhs − rhs‖_F / max(1, ‖lhs‖_F)`.
pub(crate) fn operator_residual<T: Real>(lhs: &CMatrix<T>, rhs: &CMatrix<T>) -> T {
    (lhs - rhs).frobenius_norm() / lhs.frobenius_norm().max(T::one())
}

pub(crate) fn vector_residual<T: Real>(lhs: &[Complex<T>], rhs: &[Complex<T>]) -> T {
    let diff: Vec<Complex<T>> = lhs.iter().zip(rhs).map(|(&a, &b)| a - b).collect();
    vec_norm(&diff) / vec_norm(lhs).max(vec_norm(rhs)).max(T::one())
}

pub fn exchange_relation_residuals<T: Real>(
    m: &MonodromyFamily<T>,
    c: Complex<T>,
    u: Complex<T>,
    v: Complex<T>,
) -> ExchangeResiduals<T> {
    let a = m.at(u);
    let b = m.at(v);
    let guv = g(u, v, c);
    let gvu = g(v, u, c);
    let lhs1 = &a.t11 * &b.t12;
    let rhs1 = &(&b.t12 * &a.t11).scale(f(v, u, c)) + &(&a.t12 * &b.t11).scale(guv);
    let lhs2 = &a.t22 * &b.t12;
    let rhs2 = &(&b.t12 * &a.t22).scale(f(u, v, c)) + &(&a.t12 * &b.t22).scale(gvu);
    let lhs3 = &a.t21 * &b.t12;
    let rhs3 = &(&b.t12 * &a.t21) + &(&(&b.t11 * &a.t22) - &(&a.t11 * &b.t22)).scale(guv);
    ExchangeResiduals {
        t11_t12: operator_residual(&lhs1, &rhs1),
        t22_t12: operator_residual(&lhs2, &rhs2),
        t21_t12: operator_residual(&lhs3, &rhs3),
    }
}

/// `R_ab(u−v) T_a(u) T_b(v) = T_b(v) T_a(u) R_ab(u−v)` on `C² ⊗ C² ⊗ H`.
pub fn rtt_residual<T: Real>(m: &MonodromyFamily<T>, c: Complex<T>, u: Complex<T>, v: Complex<T>) -> Result<T> {
    let a = m.at(u);
    let b = m.at(v);
    let dim = a.t11.rows();
    let id2 = CMatrix::identity(2);
    let mut ta = CMatrix::zeros(4 * dim, 4 * dim);
    let mut tb = CMatrix::zeros(4 * dim, 4 * dim);
    for i in 0..2 {
        for j in 0..2 {
            let e = local::unit(i, j);
            ta = &ta + &kron(&kron(&e, &id2), a.entry(i + 1, j + 1));
            tb = &tb + &kron(&kron(&id2, &e), b.entry(i + 1, j + 1));
        }
    }
    let r = kron(&r_matrix(u - v, c)?, &CMatrix::identity(dim));
    let lhs = &(&r * &ta) * &tb;
    let rhs = &(&tb * &ta) * &r;
    Ok(operator_residual(&lhs, &rhs))
}

/// Residual report of the structural identities of the chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructureReport<T> {
    pub rtt: T,
    pub transfer_commutator: T,
    pub gl2_invariance: T,
    pub exchange: ExchangeResiduals<T>,
}

impl<T: Real> StructureReport<T> {
    pub fn entries(&self) -> [(&'static str, T); 6] {
        [
            ("rtt", self.rtt),
            ("transfer_commutator", self.transfer_commutator),
            ("gl2_invariance", self.gl2_invariance),
            ("exchange_t11_t12", self.exchange.t11_t12),
            ("exchange_t22_t12", self.exchange.t22_t12),
            ("exchange_t21_t12", self.exchange.t21_t12),
        ]
    }

    pub fn max(&self) -> T {
        self.entries().iter().fold(T::zero(), |m, (_, r)| m.max(*r))
    }
}

pub fn structure_checks<T: Real>(
    p: &ChainParams<T>,
    k: &TwistParams<T>,
    u: Complex<T>,
    v: Complex<T>,
) -> Result<StructureReport<T>> {
    if (u - v).norm() <= T::epsilon() * u.norm().max(T::one()) {
        return Err(Error::DegenerateArgument("structure checks need u != v".into()));
    }
    let m = build_monodromy(p)?;
    let t = m.transfer(k)?;
    let tu = t.eval(u);
    let tv = t.eval(v);
    let comm = tu.commutator(&tv).frobenius_norm() / (tu.frobenius_norm() * tv.frobenius_norm()).max(T::one());
    let kk = kron(&k.matrix(), &k.matrix());
    let r = r_matrix(u - v, p.c)?;
    let gl2 = r.commutator(&kk).frobenius_norm() / (r.frobenius_norm() * kk.frobenius_norm()).max(T::one());
    Ok(StructureReport {
        rtt: rtt_residual(&m, p.c, u, v)?,
        transfer_commutator: comm,
        gl2_invariance: gl2,
        exchange: exchange_relation_residuals(&m, p.c, u, v),
    })
}

/// Residuals of the string-action expansions of `t11(u)` and `t22(u)` on
/// `t12(v₁)⋯t12(v_M)|0⟩`.
pub fn string_action_residuals<T: Real>(
    m: &MonodromyFamily<T>,
    p: &ChainParams<T>,
    u: Complex<T>,
    vs: &[Complex<T>],
) -> (T, T) {
    let c = p.c;
    let mut vac = vec![Complex::zero(); p.dim()];
    vac[0] = Complex::one();
    let string = |params: &[Complex<T>]| {
        params
            .iter()
            .rev()
            .fold(vac.clone(), |acc, &x| m.t12.eval(x).mul_vec(&acc))
    };
    let base = string(vs);
    let (l1u, l2u) = p.vacuum_weights(u);
    let f_left: Complex<T> = vs.iter().map(|&v| f(v, u, c)).product();
    let f_right: Complex<T> = vs.iter().map(|&v| f(u, v, c)).product();
    let mut rhs11: Vec<Complex<T>> = base.iter().map(|&z| z * f_left * l1u).collect();
    let mut rhs22: Vec<Complex<T>> = base.iter().map(|&z| z * f_right * l2u).collect();
    for i in 0..vs.len() {
        let vi = vs[i];
        let rest: Vec<Complex<T>> = vs.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x).collect();
        let mut exchanged = vec![u];
        exchanged.extend_from_slice(&rest);
        let vec = string(&exchanged);
        let (l1, l2) = p.vacuum_weights(vi);
        let w11 = g(u, vi, c) * rest.iter().map(|&x| f(x, vi, c)).product::<Complex<T>>() * l1;
        let w22 = g(vi, u, c) * rest.iter().map(|&x| f(vi, x, c)).product::<Complex<T>>() * l2;
        for (k, z) in vec.iter().enumerate() {
            rhs11[k] += *z * w11;
            rhs22[k] += *z * w22;
        }
    }
    let lhs11 = m.t11.eval(u).mul_vec(&base);
    let lhs22 = m.t22.eval(u).mul_vec(&base);
    (vector_residual(&lhs11, &rhs11), vector_residual(&lhs22, &rhs22))
}
