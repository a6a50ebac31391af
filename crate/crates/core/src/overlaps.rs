//! Scalar products of Bethe vectors: direct contraction against the modified
//! Slavnov and Gaudin–Korepin determinant formulas, plus the one-site closed
//! forms and the usual-ansatz eigenvalue branch.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bethe::{g, h, SpectralContext, VariableSet};
use crate::error::{Error, Result};
use crate::scalar::{lit, relative_error, vec_norm, Real};
use crate::states::{build_bethe_vector, build_dual_vector, contract, w0, BetheVector, ChainOperators};
use crate::tensor::{determinant, eigenvalues, CMatrix, MatrixPolynomial};

/// Floor of the denominator in [`OverlapReport::relative_error`].
pub const RELATIVE_FLOOR: f64 = 1e-30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// The dual side `C(ū)` is on-shell.
    UOnshell,
    /// The ket side `B(v̄)` is on-shell.
    VOnshell,
    Norm,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverlapReport<T> {
    pub orientation: Orientation,
    pub direct: Complex<T>,
    pub formula: Complex<T>,
    pub relative_error: T,
}

impl<T: Real> OverlapReport<T> {
    pub fn new(orientation: Orientation, direct: Complex<T>, formula: Complex<T>) -> Self {
        Self {
            orientation,
            direct,
            formula,
            relative_error: relative_error(direct, formula, lit(RELATIVE_FLOOR)),
        }
    }
}

/// `⟨C|B⟩`, the plain contraction of dual and ket amplitudes.
pub fn scalar_direct<T: Real>(dual: &BetheVector<T>, ket: &BetheVector<T>) -> Result<Complex<T>> {
    if dual.amplitudes.len() != ket.amplitudes.len() {
        return Err(Error::Dimension(format!(
            "dual has {} amplitudes, ket has {}",
            dual.amplitudes.len(),
            ket.amplitudes.len()
        )));
    }
    Ok(contract(&dual.amplitudes, &ket.amplitudes))
}

/// `⟨0|C(ū) B(v̄)|0⟩` from the matrices.
pub fn overlap_direct<T: Real>(ops: &ChainOperators<T>, u: &VariableSet<T>, v: &VariableSet<T>) -> Result<Complex<T>> {
    scalar_direct(&build_dual_vector(&ops.nu, u), &build_bethe_vector(&ops.nu, v))
}

fn check_sizes<T: Real>(ctx: &SpectralContext<T>, on: &VariableSet<T>, other: &VariableSet<T>) -> Result<()> {
    if on.len() != other.len() {
        return Err(Error::Arity {
            expected: on.len(),
            got: other.len(),
        });
    }
    if !ctx.twist.is_diagonal_limit() && on.len() != ctx.sites() {
        return Err(Error::Arity {
            expected: ctx.sites(),
            got: on.len(),
        });
    }
    Ok(())
}

/// `J_ij = ∂Λ(other_j, on)/∂on_i`.
pub fn slavnov_jacobian<T: Real>(ctx: &SpectralContext<T>, on: &VariableSet<T>, other: &VariableSet<T>) -> Result<CMatrix<T>> {
    ctx.eigenvalue_jacobian(on, other)
}

/// `K_ij = g(other_i, on_j)`.
pub fn cauchy_matrix<T: Real>(ctx: &SpectralContext<T>, on: &VariableSet<T>, other: &VariableSet<T>) -> Result<CMatrix<T>> {
    let c = ctx.c();
    let mut out = CMatrix::zeros(other.len(), on.len());
    for (i, &x) in other.iter().enumerate() {
        for (j, &y) in on.iter().enumerate() {
            if (x - y).norm() <= ctx.eps_dist {
                return Err(Error::Coincidence(format!("on-shell parameter {j} meets off-shell parameter {i}")));
            }
            out[(i, j)] = g(x, y, c);
        }
    }
    Ok(out)
}

/// `(μ²/(κ̃ + κ − ρ))^M`.
fn overlap_prefactor<T: Real>(ctx: &SpectralContext<T>, m: usize) -> Complex<T> {
    ctx.twist.overlap_constant().powu(m as u32)
}

fn slavnov_unchecked<T: Real>(ctx: &SpectralContext<T>, on: &VariableSet<T>, other: &VariableSet<T>) -> Result<Complex<T>> {
    let m = on.len();
    let cauchy = cauchy_matrix(ctx, on, other)?;
    let jac = slavnov_jacobian(ctx, on, other)?;
    let ratio = determinant(&jac)? / determinant(&cauchy)?;
    Ok(ctx.c().powu(m as u32) * overlap_prefactor(ctx, m) * w0(ctx, on)? * ratio)
}

/// The determinant formula for `⟨0|C(ū)B(v̄)|0⟩`, with the side named by
/// `orientation` on-shell within `onshell_tol`.
pub fn slavnov_formula<T: Real>(
    ctx: &SpectralContext<T>,
    u: &VariableSet<T>,
    v: &VariableSet<T>,
    orientation: Orientation,
    onshell_tol: T,
) -> Result<Complex<T>> {
    let (on, other) = match orientation {
        Orientation::UOnshell => (u, v),
        Orientation::VOnshell => (v, u),
        Orientation::Norm => return gaudin_norm(ctx, u, onshell_tol),
    };
    check_sizes(ctx, on, other)?;
    ctx.require_onshell(on, onshell_tol)?;
    slavnov_unchecked(ctx, on, other)
}

pub fn slavnov_check<T: Real>(
    ctx: &SpectralContext<T>,
    ops: &ChainOperators<T>,
    u: &VariableSet<T>,
    v: &VariableSet<T>,
    orientation: Orientation,
    onshell_tol: T,
) -> Result<OverlapReport<T>> {
    let formula = slavnov_formula(ctx, u, v, orientation, onshell_tol)?;
    Ok(OverlapReport::new(orientation, overlap_direct(ops, u, v)?, formula))
}

/// The Gaudin matrix of an on-shell set (no on-shell check here).
pub fn gaudin_matrix<T: Real>(ctx: &SpectralContext<T>, set: &VariableSet<T>) -> Result<CMatrix<T>> {
    let n = set.len();
    let c = ctx.c();
    let sign: Complex<T> = if n.is_multiple_of(2) { Complex::one() } else { -Complex::<T>::one() };
    let wa = ctx.twist.weight1() * sign;
    let wb = ctx.twist.weight2();
    let two_rho_c = ctx.rho() * c * lit::<T>(2.0);
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        let ui = set.get(i);
        let rest = set.without(i);
        for j in 0..n {
            if i == j {
                let (l1, l2) = ctx.vacuum_weights(ui);
                let (d1, d2) = ctx.chain.vacuum_weight_derivatives(ui);
                let sum_a = (0..rest.len()).fold(Complex::zero(), |acc, k| {
                    acc + rest.without(k).prod_left(ui, |a, b| h(a, b, c))
                });
                let sum_b = (0..rest.len()).fold(Complex::zero(), |acc, k| {
                    acc + rest.without(k).prod_right(ui, |a, b| h(a, b, c))
                });
                out[(i, i)] = two_rho_c * (l2 * d1 + l1 * d2)
                    + wa * (c * rest.prod_left(ui, |a, b| h(a, b, c)) * d1 - l1 * sum_a)
                    + wb * (c * rest.prod_right(ui, |a, b| h(a, b, c)) * d2 + l2 * sum_b);
            } else {
                let uj = set.get(j);
                let rest2 = set.without_pair(i, j);
                let (l1, l2) = ctx.vacuum_weights(uj);
                out[(i, j)] = wa * l1 * rest2.prod_left(uj, |a, b| h(a, b, c))
                    - wb * l2 * rest2.prod_right(uj, |a, b| h(a, b, c));
            }
        }
    }
    Ok(out)
}

fn gaudin_unchecked<T: Real>(ctx: &SpectralContext<T>, set: &VariableSet<T>) -> Result<Complex<T>> {
    let n = set.len();
    let c = ctx.c();
    let mut pairs = Complex::one();
    for i in 0..n {
        for j in i + 1..n {
            pairs *= g(set.get(i), set.get(j), c) * g(set.get(j), set.get(i), c);
        }
    }
    Ok(overlap_prefactor(ctx, n) * w0(ctx, set)? * pairs * determinant(&gaudin_matrix(ctx, set)?)?)
}

/// The squared norm `⟨0|C(ū)B(ū)|0⟩` of an on-shell state from the Gaudin
/// determinant.
pub fn gaudin_norm<T: Real>(ctx: &SpectralContext<T>, set: &VariableSet<T>, onshell_tol: T) -> Result<Complex<T>> {
    check_sizes(ctx, set, set)?;
    ctx.require_onshell(set, onshell_tol)?;
    gaudin_unchecked(ctx, set)
}

pub fn norm_check<T: Real>(
    ctx: &SpectralContext<T>,
    ops: &ChainOperators<T>,
    set: &VariableSet<T>,
    onshell_tol: T,
) -> Result<OverlapReport<T>> {
    let formula = gaudin_norm(ctx, set, onshell_tol)?;
    Ok(OverlapReport::new(Orientation::Norm, overlap_direct(ops, set, set)?, formula))
}

fn richardson<T: Real>(coarse: Complex<T>, fine: Complex<T>, ratio: T) -> Complex<T> {
    (fine * ratio - coarse) / (ratio - T::one())
}

/// Largest relative deviation between the Gaudin matrix entries and
/// `lim_{v_j → u_j} c ∂Λ(v_j, ū)/∂u_i / g(v_j, ū)`, estimated at
/// `v_j = u_j + ε` for `ε ∈ {1e-4, 1e-5}` and Richardson-extrapolated.
pub fn lhospital_check<T: Real>(ctx: &SpectralContext<T>, set: &VariableSet<T>) -> Result<T> {
    let c = ctx.c();
    let gm = gaudin_matrix(ctx, set)?;
    let (e1, e2): (T, T) = (lit(1e-4), lit(1e-5));
    let at = |i: usize, j: usize, eps: T| -> Result<Complex<T>> {
        let v = set.get(j) + Complex::new(eps, T::zero());
        let denom = set.prod_right(v, |a, b| g(a, b, c));
        Ok(c * ctx.eigenvalue_gradient(v, set, i)? / denom)
    };
    let mut worst = T::zero();
    for i in 0..set.len() {
        for j in 0..set.len() {
            let limit = richardson(at(i, j, e1)?, at(i, j, e2)?, e1 / e2);
            worst = worst.max(relative_error(limit, gm[(i, j)], T::one()));
        }
    }
    Ok(worst)
}

/// Relative deviation between the Gaudin norm and the Slavnov formula at
/// `v̄ = ū + ε(1, 2, …, N)`, Richardson-extrapolated from `ε` and `2ε`.
pub fn slavnov_limit_check<T: Real>(ctx: &SpectralContext<T>, set: &VariableSet<T>, eps: T) -> Result<T> {
    let shifted = |e: T| {
        let vals = set
            .iter()
            .enumerate()
            .map(|(k, &u)| u + Complex::new(e * lit::<T>((k + 1) as f64), T::zero()))
            .collect();
        VariableSet::new(vals, T::zero())
    };
    let two = lit::<T>(2.0);
    let coarse = slavnov_unchecked(ctx, set, &shifted(eps * two)?)?;
    let fine = slavnov_unchecked(ctx, set, &shifted(eps)?)?;
    let limit = richardson(coarse, fine, two);
    Ok(relative_error(limit, gaudin_unchecked(ctx, set)?, lit(RELATIVE_FLOOR)))
}

/// Largest relative deviation of the analytic Slavnov Jacobian from central
/// differences with step `step`.
pub fn jacobian_fd_check<T: Real>(ctx: &SpectralContext<T>, on: &VariableSet<T>, other: &VariableSet<T>, step: T) -> Result<T> {
    let jac = slavnov_jacobian(ctx, on, other)?;
    let hs = Complex::new(step, T::zero());
    let mut worst = T::zero();
    for i in 0..on.len() {
        let mut plus = on.as_slice().to_vec();
        let mut minus = plus.clone();
        plus[i] += hs;
        minus[i] -= hs;
        let plus = VariableSet::new(plus, T::zero())?;
        let minus = VariableSet::new(minus, T::zero())?;
        for (j, &v) in other.iter().enumerate() {
            let fd = (ctx.eigenvalue(v, &plus)? - ctx.eigenvalue(v, &minus)?) / (hs * lit::<T>(2.0));
            let scale = jac[(i, j)].norm().max(fd.norm()).max(T::one());
            worst = worst.max((fd - jac[(i, j)]).norm() / scale);
        }
    }
    Ok(worst)
}

/// The classical Slavnov formula for a diagonal twist with `v̄` on-shell:
/// `(c/κ̃)^M λ₂(v̄) Det(∂Λ_d(u_j, v̄)/∂v_i) / Det g(u_i, v_j)`, with
/// `Λ_d(u, v̄) = κ̃λ₁(u)f(v̄,u) + κλ₂(u)f(u,v̄)`.
pub fn classical_slavnov<T: Real>(ctx: &SpectralContext<T>, u: &VariableSet<T>, v: &VariableSet<T>) -> Result<Complex<T>> {
    if u.len() != v.len() {
        return Err(Error::Arity {
            expected: v.len(),
            got: u.len(),
        });
    }
    let m = v.len();
    let c = ctx.c();
    let k = &ctx.twist.params;
    let mut jac = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            jac[(i, j)] = diagonal_gradient(ctx, u.get(j), v, i, k.kappa_tilde, k.kappa)?;
        }
    }
    let cauchy = cauchy_matrix(ctx, v, u)?;
    let lambda2 = v.iter().fold(Complex::one(), |acc, &x| acc * ctx.chain.lambda2(x));
    Ok((c / k.kappa_tilde).powu(m as u32) * lambda2 * determinant(&jac)? / determinant(&cauchy)?)
}

/// `∂Λ_d(u, v̄ | x, y)/∂v_i` by differentiating the factor that contains `v_i`.
fn diagonal_gradient<T: Real>(
    ctx: &SpectralContext<T>,
    u: Complex<T>,
    v: &VariableSet<T>,
    i: usize,
    x: Complex<T>,
    y: Complex<T>,
) -> Result<Complex<T>> {
    let c = ctx.c();
    let vi = v.get(i);
    if (u - vi).norm() <= ctx.eps_dist {
        return Err(Error::Coincidence("probe meets an on-shell parameter".into()));
    }
    let rest = v.without(i);
    let (l1, l2) = ctx.vacuum_weights(u);
    // f(a, b) = 1 + c/(a − b): ∂_a f = −c/(a − b)², ∂_b f = c/(a − b)².
    let d = vi - u;
    let dleft = -c / (d * d);
    let dright = c / (d * d);
    Ok(x * l1 * dleft * rest.prod_left(u, |a, b| crate::bethe::f(a, b, c))
        + y * l2 * dright * rest.prod_right(u, |a, b| crate::bethe::f(a, b, c)))
}

/// One-site closed forms evaluated against the direct contraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OneSiteReport<T> {
    pub direct: Complex<T>,
    pub parametrization: Complex<T>,
    pub parametrization_error: T,
    pub alternative: Complex<T>,
    pub alternative_error: T,
    /// The on-shell form for `v`, present when `v` is on-shell.
    pub onshell_form: Option<Complex<T>>,
    pub onshell_error: Option<T>,
}

/// `S_d(u, v) = g(u, v)(λ₁(v)λ₂(u) − λ₁(u)λ₂(v))`.
fn one_site_diagonal<T: Real>(ctx: &SpectralContext<T>, u: Complex<T>, v: Complex<T>) -> Complex<T> {
    let (u1, u2) = ctx.vacuum_weights(u);
    let (v1, v2) = ctx.vacuum_weights(v);
    g(u, v, ctx.c()) * (v1 * u2 - u1 * v2)
}

pub fn one_site_reference<T: Real>(
    ctx: &SpectralContext<T>,
    ops: &ChainOperators<T>,
    u: Complex<T>,
    v: Complex<T>,
    onshell_tol: T,
) -> Result<OneSiteReport<T>> {
    if ctx.sites() != 1 {
        return Err(Error::Arity {
            expected: 1,
            got: ctx.sites(),
        });
    }
    let us = ctx.variables(vec![u])?;
    let vs = ctx.variables(vec![v])?;
    ctx.variables(vec![u, v])?;
    let c = ctx.c();
    let tw = &ctx.twist;
    let mu = tw.mu;
    let rho = ctx.rho();
    let (u1, u2) = ctx.vacuum_weights(u);
    let (v1, v2) = ctx.vacuum_weights(v);
    let w0u = u1 + u2;
    let w0v = v1 + v2;
    let two_rho = rho * lit::<T>(2.0);
    let lg_uv = two_rho * u1 * u2 * g(u, v, c);
    let lg_vu = two_rho * v1 * v2 * g(v, u, c);
    let sd = one_site_diagonal(ctx, u, v);
    let kappa_sum = tw.params.kappa_tilde + tw.params.kappa;
    let parametrization = mu * (sd + mu / (kappa_sum - rho) * (lg_uv * w0v + lg_vu * w0u));
    let alternative = mu * mu * sd
        + mu * mu * rho * rho / (tw.params.kappa_plus * tw.params.kappa_minus) * w0u * w0v;
    let direct = overlap_direct(ops, &us, &vs)?;
    let floor = lit(RELATIVE_FLOOR);
    let (_, v_on) = ctx.onshell_status(&vs, onshell_tol)?;
    let onshell_form = v_on.then(|| {
        tw.overlap_constant() * g(v, u, c) * w0v * (tw.weight1() * u1 - tw.weight2() * u2 - two_rho * u1 * u2)
    });
    Ok(OneSiteReport {
        direct,
        parametrization,
        parametrization_error: relative_error(direct, parametrization, floor),
        alternative,
        alternative_error: relative_error(direct, alternative, floor),
        onshell_form,
        onshell_error: onshell_form.map(|s| relative_error(direct, s, floor)),
    })
}

/// `u ↦ αλ₁(u) + (κ + κ̃ − α)λ₂(u)` compared with the transfer-matrix
/// spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct SimpleAbaReport<T> {
    pub alpha: Complex<T>,
    /// Largest (over probes) relative distance from the branch to the nearest
    /// transfer-matrix eigenvalue.
    pub max_distance: T,
    /// Index of the first solution whose eigenvalue reproduces the branch.
    pub matched_solution: Option<usize>,
}

pub fn simple_aba_check<T: Real>(
    ctx: &SpectralContext<T>,
    transfer: &MatrixPolynomial<T>,
    solutions: &[VariableSet<T>],
    probes: &[Complex<T>],
    tol: T,
) -> Result<SimpleAbaReport<T>> {
    let k = &ctx.twist.params;
    let alpha = k.alpha();
    let branch = |u: Complex<T>| {
        let (l1, l2) = ctx.vacuum_weights(u);
        alpha * l1 + (k.kappa + k.kappa_tilde - alpha) * l2
    };
    let mut max_distance = T::zero();
    for &p in probes {
        let target = branch(p);
        let spectrum = eigenvalues(&transfer.eval(p))?;
        let d = spectrum
            .iter()
            .map(|&z| relative_error(z, target, T::one()))
            .fold(T::infinity(), T::min);
        max_distance = max_distance.max(d);
    }
    let mut matched_solution = None;
    for (idx, sol) in solutions.iter().enumerate() {
        let mut ok = true;
        for &p in probes {
            match ctx.eigenvalue(p, sol) {
                Ok(lam) if relative_error(lam, branch(p), T::one()) <= tol => {}
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            matched_solution = Some(idx);
            break;
        }
    }
    Ok(SimpleAbaReport {
        alpha,
        max_distance,
        matched_solution,
    })
}

/// `|⟨C(a)|B(b)⟩| / (‖C(a)‖ ‖B(b)‖)`.
pub fn normalized_overlap<T: Real>(ops: &ChainOperators<T>, a: &VariableSet<T>, b: &VariableSet<T>) -> T {
    let dual = build_dual_vector(&ops.nu, a);
    let ket = build_bethe_vector(&ops.nu, b);
    let scale = (dual.norm() * ket.norm()).max(lit(RELATIVE_FLOOR));
    contract(&dual.amplitudes, &ket.amplitudes).norm() / scale
}

/// `⟨x|B(ū)⟩⟨C(ū)|y⟩ / 𝒩(ū)`, a matrix element of the spectral projector of
/// an on-shell state. It does not depend on how the state is normalised.
pub fn projector_element<T: Real>(
    ops: &ChainOperators<T>,
    set: &VariableSet<T>,
    x: &[Complex<T>],
    y: &[Complex<T>],
    norm: Complex<T>,
) -> Result<Complex<T>> {
    let ket = build_bethe_vector(&ops.nu, set).amplitudes;
    let dual = build_dual_vector(&ops.nu, set).amplitudes;
    if x.len() != ket.len() || y.len() != ket.len() {
        return Err(Error::Dimension(format!("probe vectors must have {} amplitudes", ket.len())));
    }
    if norm.norm() <= lit::<T>(RELATIVE_FLOOR) * vec_norm(&ket) * vec_norm(&dual) {
        return Err(Error::Singular("state has vanishing norm".into()));
    }
    Ok(contract(x, &ket) * contract(&dual, y) / norm)
}
