//! Bethe vectors as explicit `2^N` amplitude vectors, the off-shell action
//! identities, and the projection onto strings of `t12`.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::bethe::{f, g, SpectralContext, VariableSet};
use crate::chain::{build_monodromy, vector_residual, MonodromyFamily};
use crate::error::{Error, Result};
use crate::scalar::{lit, vec_norm, Real};
use crate::tensor::MatrixPolynomial;
use crate::twist::build_modified_operators;

/// The monodromy entries, the modified operators and the transfer matrix of
/// one chain.
#[derive(Clone, Debug)]
pub struct ChainOperators<T> {
    pub monodromy: MonodromyFamily<T>,
    pub nu: MonodromyFamily<T>,
    pub transfer: MatrixPolynomial<T>,
}

impl<T: Real> ChainOperators<T> {
    pub fn new(ctx: &SpectralContext<T>) -> Result<Self> {
        let monodromy = build_monodromy(&ctx.chain)?;
        let nu = build_modified_operators(&monodromy, &ctx.twist)?;
        let transfer = monodromy.transfer(&ctx.twist.params)?;
        Ok(Self { monodromy, nu, transfer })
    }

    pub fn dim(&self) -> usize {
        self.transfer.dim().0
    }
}

/// The all-up state `|0⟩ = e_0`; the same amplitudes represent `⟨0|`.
pub fn vacuum<T: Real>(dim: usize) -> Vec<Complex<T>> {
    let mut v = vec![Complex::zero(); dim];
    v[0] = Complex::one();
    v
}

/// `ν12(u_1)⋯ν12(u_M)|0⟩`, or the dual `⟨0|ν21(u_1)⋯ν21(u_M)` stored as a
/// row of amplitudes.
#[derive(Clone, Debug)]
pub struct BetheVector<T> {
    pub parameters: VariableSet<T>,
    pub amplitudes: Vec<Complex<T>>,
    /// `M > N`: the vector may vanish or be linearly dependent.
    pub exceeds_sites: bool,
}

impl<T: Real> BetheVector<T> {
    pub fn order(&self) -> usize {
        self.parameters.len()
    }

    pub fn norm(&self) -> T {
        vec_norm(&self.amplitudes)
    }
}

fn sites_of(dim: usize) -> usize {
    dim.trailing_zeros() as usize
}

pub fn build_bethe_vector<T: Real>(nu: &MonodromyFamily<T>, set: &VariableSet<T>) -> BetheVector<T> {
    let dim = nu.t12.dim().0;
    let amplitudes = set
        .as_slice()
        .iter()
        .rev()
        .fold(vacuum(dim), |acc, &u| nu.t12.eval(u).mul_vec(&acc));
    BetheVector {
        parameters: set.clone(),
        amplitudes,
        exceeds_sites: set.len() > sites_of(dim),
    }
}

pub fn build_dual_vector<T: Real>(nu: &MonodromyFamily<T>, set: &VariableSet<T>) -> BetheVector<T> {
    let dim = nu.t21.dim().0;
    let amplitudes = set
        .iter()
        .fold(vacuum(dim), |acc, &u| nu.t21.eval(u).vec_mul(&acc));
    BetheVector {
        parameters: set.clone(),
        amplitudes,
        exceeds_sites: set.len() > sites_of(dim),
    }
}

/// `Σ_k a_k b_k` without conjugation.
pub fn contract<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::zero(), |acc, (x, y)| acc + x * y)
}

fn axpy<T: Real>(acc: &mut [Complex<T>], s: Complex<T>, x: &[Complex<T>]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += s * b;
    }
}

/// Residuals of the off-shell action identities on `B^M(ū)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OffShellReport<T> {
    pub raising: T,
    pub nu11: T,
    pub nu22: T,
    pub nu21: T,
    pub transfer: T,
}

impl<T: Real> OffShellReport<T> {
    pub fn entries(&self) -> [(&'static str, T); 5] {
        [
            ("nu12_raising", self.raising),
            ("nu11_action", self.nu11),
            ("nu22_action", self.nu22),
            ("nu21_action", self.nu21),
            ("transfer_action", self.transfer),
        ]
    }

    pub fn max(&self) -> T {
        self.entries().iter().fold(T::zero(), |m, &(_, r)| m.max(r))
    }
}

fn check_apart<T: Real>(ctx: &SpectralContext<T>, u: Complex<T>, set: &VariableSet<T>) -> Result<()> {
    ctx.variables(set.with_front(u).as_slice().to_vec()).map(|_| ())
}

fn prod_left<T: Real>(set: &VariableSet<T>, u: Complex<T>, c: Complex<T>) -> Complex<T> {
    set.prod_left(u, |a, b| f(a, b, c))
}

fn prod_right<T: Real>(set: &VariableSet<T>, u: Complex<T>, c: Complex<T>) -> Complex<T> {
    set.prod_right(u, |a, b| f(a, b, c))
}

/// Evaluates the actions of `ν12`, `ν11`, `ν22`, `ν21` and `t(u)` on `B^M(ū)`
/// against their closed forms.
pub fn offshell_action_residuals<T: Real>(
    ops: &ChainOperators<T>,
    ctx: &SpectralContext<T>,
    u: Complex<T>,
    set: &VariableSet<T>,
) -> Result<OffShellReport<T>> {
    check_apart(ctx, u, set)?;
    let c = ctx.c();
    let m = set.len();
    let nu = &ops.nu;
    let at = nu.at(u);
    let b = build_bethe_vector(nu, set).amplitudes;
    let raised = build_bethe_vector(nu, &set.with_front(u)).amplitudes;
    let swapped: Vec<Vec<Complex<T>>> = (0..m)
        .map(|i| build_bethe_vector(nu, &set.without(i).with_front(u)).amplitudes)
        .collect();
    let (l1, l2) = ctx.vacuum_weights(u);
    let r = ctx.twist.rho_over_kappa_plus();
    let one = Complex::one();

    let mut e11 = vec![Complex::zero(); b.len()];
    axpy(&mut e11, r, &raised);
    axpy(&mut e11, l1 * prod_left(set, u, c), &b);
    let mut e22 = vec![Complex::zero(); b.len()];
    axpy(&mut e22, r, &raised);
    axpy(&mut e22, l2 * prod_right(set, u, c), &b);
    for i in 0..m {
        let ui = set.get(i);
        let rest = set.without(i);
        let (a1, a2) = ctx.vacuum_weights(ui);
        axpy(&mut e11, g(u, ui, c) * a1 * prod_left(&rest, ui, c), &swapped[i]);
        axpy(&mut e22, g(ui, u, c) * a2 * prod_right(&rest, ui, c), &swapped[i]);
    }

    let mut e21 = vec![Complex::zero(); b.len()];
    axpy(&mut e21, r * r, &raised);
    axpy(&mut e21, r * ctx.eigenvalue_diagonal(u, set, one, one)?, &b);
    for i in 0..m {
        let ui = set.get(i);
        let rest = set.without(i);
        let ed = ctx.bethe_with(i, set, one, one, Complex::zero())?;
        axpy(&mut e21, r * g(ui, u, c) * ed, &swapped[i]);
        let (a1, a2) = ctx.vacuum_weights(ui);
        let ff = g(u, ui, c) * l2 * a1 * prod_right(&rest, u, c) * prod_left(&rest, ui, c)
            + g(ui, u, c) * a2 * l1 * prod_right(&rest, ui, c) * prod_left(&rest, u, c);
        axpy(&mut e21, ff, &build_bethe_vector(nu, &rest).amplitudes);
        for j in i + 1..m {
            let uj = set.get(j);
            let rest2 = set.without_pair(i, j);
            let (b1, b2) = ctx.vacuum_weights(uj);
            let gg = g(u, ui, c) * g(uj, u, c) * a1 * b2 * f(uj, ui, c) * prod_left(&rest2, ui, c) * prod_right(&rest2, uj, c)
                + g(u, uj, c) * g(ui, u, c) * b1 * a2 * f(ui, uj, c) * prod_left(&rest2, uj, c) * prod_right(&rest2, ui, c);
            axpy(&mut e21, gg, &build_bethe_vector(nu, &rest2.with_front(u)).amplitudes);
        }
    }

    let decomposition = ctx.transfer_action(u, set)?;
    let mut et = vec![Complex::zero(); b.len()];
    axpy(&mut et, decomposition.raising, &raised);
    axpy(&mut et, decomposition.wanted, &b);
    for (i, &w) in decomposition.unwanted.iter().enumerate() {
        axpy(&mut et, w, &swapped[i]);
    }

    Ok(OffShellReport {
        raising: vector_residual(&at.t12.mul_vec(&b), &raised),
        nu11: vector_residual(&at.t11.mul_vec(&b), &e11),
        nu22: vector_residual(&at.t22.mul_vec(&b), &e22),
        nu21: vector_residual(&at.t21.mul_vec(&b), &e21),
        transfer: vector_residual(&ops.transfer.eval(u).mul_vec(&b), &et),
    })
}

/// Residual of `(κ⁻/μ)B^{N+1}(u,ū) = Λ_g(u,ū)B^N(ū) + Σ_i g(u_i,u)E_g(u_i,ū_i)B^N(u,ū_i)`.
pub fn raising_identity_residual<T: Real>(
    ops: &ChainOperators<T>,
    ctx: &SpectralContext<T>,
    u: Complex<T>,
    set: &VariableSet<T>,
) -> Result<T> {
    if set.len() != ctx.sites() {
        return Err(Error::Arity {
            expected: ctx.sites(),
            got: set.len(),
        });
    }
    check_apart(ctx, u, set)?;
    let nu = &ops.nu;
    let d = ctx.raising_action(u, set)?;
    let lhs: Vec<Complex<T>> = build_bethe_vector(nu, &set.with_front(u))
        .amplitudes
        .iter()
        .map(|&z| z * d.raising)
        .collect();
    let mut rhs: Vec<Complex<T>> = build_bethe_vector(nu, set).amplitudes.iter().map(|&z| z * d.wanted).collect();
    for (i, &w) in d.unwanted.iter().enumerate() {
        axpy(&mut rhs, w, &build_bethe_vector(nu, &set.without(i).with_front(u)).amplitudes);
    }
    Ok(vector_residual(&lhs, &rhs))
}

/// Relative residuals of `t(u)B = Λ(u,ū)B` and `C t(u) = Λ(u,ū)C`.
pub fn eigenstate_residuals<T: Real>(
    ops: &ChainOperators<T>,
    ctx: &SpectralContext<T>,
    u: Complex<T>,
    set: &VariableSet<T>,
) -> Result<(T, T)> {
    let lam = ctx.eigenvalue(u, set)?;
    let t = ops.transfer.eval(u);
    let rel = |lhs: Vec<Complex<T>>, v: &[Complex<T>]| {
        let rhs: Vec<Complex<T>> = v.iter().map(|&z| z * lam).collect();
        let diff: Vec<Complex<T>> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
        let scale = vec_norm(&lhs).max(vec_norm(&rhs)).max(lit(1e-300));
        vec_norm(&diff) / scale
    };
    let b = build_bethe_vector(&ops.nu, set).amplitudes;
    let cdual = build_dual_vector(&ops.nu, set).amplitudes;
    Ok((rel(t.mul_vec(&b), &b), rel(t.vec_mul(&cdual), &cdual)))
}

/// Calls `visit` with every permutation of `0..n`, in lexicographic order.
pub fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        visit(&p);
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return;
        };
        let j = (i..n).rev().find(|&j| p[i - 1] < p[j]).expect("pivot successor");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

/// The projection coefficient `W_i(ū_I | ū_II)`: the symmetrisation over `ū_I`
/// of `Π_j Λ_d(u_j, {u_{j+1}, …} ∪ ū_II | 1, 1)`.
pub fn w_coefficient<T: Real>(ctx: &SpectralContext<T>, first: &[Complex<T>], second: &[Complex<T>]) -> Result<Complex<T>> {
    let one = Complex::one();
    let mut total = Complex::zero();
    let mut count = 0usize;
    let mut failure = None;
    for_each_permutation(first.len(), |perm| {
        if failure.is_some() {
            return;
        }
        let seq: Vec<Complex<T>> = perm.iter().map(|&k| first[k]).chain(second.iter().copied()).collect();
        let mut prod = one;
        for j in 0..first.len() {
            let tail = VariableSet::new(seq[j + 1..].to_vec(), T::zero());
            match tail.and_then(|t| ctx.eigenvalue_diagonal(seq[j], &t, one, one)) {
                Ok(v) => prod *= v,
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            }
        }
        total += prod;
        count += 1;
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(total / lit::<T>(count as f64)),
    }
}

/// `W_0(ū)`, the coefficient of the vacuum component.
pub fn w0<T: Real>(ctx: &SpectralContext<T>, set: &VariableSet<T>) -> Result<Complex<T>> {
    w_coefficient(ctx, set.as_slice(), &[])
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionTerm<T> {
    /// Indices forming `ū_I`.
    pub first: Vec<usize>,
    /// Indices forming `ū_II`, the arguments of the `t12` string.
    pub second: Vec<usize>,
    pub coefficient: Complex<T>,
}

#[derive(Clone, Debug)]
pub struct ProjectionExpansion<T> {
    pub terms: Vec<ProjectionTerm<T>>,
    /// `W_0(ū)` from the symmetrised recursion.
    pub w0_expansion: Complex<T>,
    /// `(κ⁻/(μρ))^M ⟨0|ν12(ū)|0⟩`; `None` when `ρ = 0`.
    pub w0_direct: Option<Complex<T>>,
    pub w0_difference: Option<T>,
    /// Residual between the reassembled and the directly built vector.
    pub ket_residual: T,
    /// Same for the dual vector, expanded in `t21` with `(ρ/κ⁺)` weights.
    pub dual_residual: T,
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Expands `ν12(ū)|0⟩` over `t12` strings,
/// `μ^M Σ_{ū → {ū_I, ū_II}} (ρ/κ⁻)^{#ū_I} W(ū_I|ū_II) t12(ū_II)|0⟩`,
/// and compares the reassembled vectors with the direct construction.
pub fn projection_expansion<T: Real>(
    ops: &ChainOperators<T>,
    ctx: &SpectralContext<T>,
    set: &VariableSet<T>,
) -> Result<ProjectionExpansion<T>> {
    let m = set.len();
    let dim = ops.dim();
    let mu_m = ctx.twist.mu.powu(m as u32);
    let a = ctx.twist.rho_over_kappa_minus();
    let b = ctx.twist.rho_over_kappa_plus();
    let mut terms = Vec::new();
    let mut ket = vec![Complex::zero(); dim];
    let mut dual = vec![Complex::zero(); dim];
    for i in 0..=m {
        for second in subsets(m, i) {
            let first: Vec<usize> = (0..m).filter(|k| !second.contains(k)).collect();
            let fv: Vec<Complex<T>> = first.iter().map(|&k| set.get(k)).collect();
            let sv: Vec<Complex<T>> = second.iter().map(|&k| set.get(k)).collect();
            let w = w_coefficient(ctx, &fv, &sv)?;
            let string = VariableSet::new(sv, T::zero())?;
            let k = (m - i) as u32;
            let t12 = build_bethe_vector(&ops.monodromy, &string).amplitudes;
            let t21 = build_dual_vector(&ops.monodromy, &string).amplitudes;
            axpy(&mut ket, mu_m * a.powu(k) * w, &t12);
            axpy(&mut dual, mu_m * b.powu(k) * w, &t21);
            terms.push(ProjectionTerm {
                first,
                second,
                coefficient: w,
            });
        }
    }
    let w0_expansion = w0(ctx, set)?;
    let w0_direct = if ctx.rho().is_zero() {
        None
    } else {
        let direct = build_bethe_vector(&ops.nu, set).amplitudes[0];
        let factor = ctx.twist.params.kappa_minus / (ctx.twist.mu * ctx.rho());
        Some(factor.powu(m as u32) * direct)
    };
    let w0_difference = w0_direct.map(|d| crate::scalar::relative_error(d, w0_expansion, T::one()));
    Ok(ProjectionExpansion {
        terms,
        w0_expansion,
        w0_direct,
        w0_difference,
        ket_residual: vector_residual(&ket, &build_bethe_vector(&ops.nu, set).amplitudes),
        dual_residual: vector_residual(&dual, &build_dual_vector(&ops.nu, set).amplitudes),
    })
}
