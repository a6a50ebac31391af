//! Bethe-root finders: damped Newton multi-start and a linear T-Q fit
//! against exact-diagonalisation eigenvalues.

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bethe::{SpectralContext, VariableSet};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::{lit, relative_error, Real};
use crate::tensor::{default_nodes, eigenpairs, eigenvalues, least_squares, CMatrix, Lu, MatrixPolynomial};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Base on-shell tolerance, multiplied by the residual scale of the roots.
    pub tol: f64,
    pub dedup: f64,
    pub halvings: usize,
    /// Least-squares residual above which a T-Q fit is flagged.
    pub fit_threshold: f64,
    pub parallel: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            starts: 200,
            seed: 0,
            max_iter: 100,
            tol: 1e-8,
            dedup: 1e-6,
            halvings: 20,
            fit_threshold: 1e-8,
            parallel: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BetheSolution<T> {
    /// Canonically ordered roots.
    pub roots: VariableSet<T>,
    /// `|E(u_i, ū_i)|` in the order of `roots`.
    pub residuals: Vec<T>,
    /// `Λ(u*, ū)` at the probe points of a spectrum match, when one was made.
    pub matched_eigenvalue: Option<Vec<Complex<T>>>,
    pub onshell: bool,
    /// Relative least-squares residual of the T-Q fit that produced the roots.
    pub fit_residual: Option<T>,
    /// Set for suspicious fits and near-duplicate Newton solutions.
    pub flagged: bool,
}

impl<T: Real> BetheSolution<T> {
    pub fn max_residual(&self) -> T {
        self.residuals.iter().fold(T::zero(), |m, &r| m.max(r))
    }
}

fn evaluate<T: Real>(ctx: &SpectralContext<T>, roots: Vec<Complex<T>>, tol: T) -> Result<BetheSolution<T>> {
    let set = ctx.variables(roots)?.canonical();
    let residuals: Vec<T> = ctx.bethe_residuals(&set)?.iter().map(|z| z.norm()).collect();
    let worst = residuals.iter().fold(T::zero(), |m, &r| m.max(r));
    let onshell = worst <= tol * ctx.residual_scale(&set);
    Ok(BetheSolution {
        roots: set,
        residuals,
        matched_eigenvalue: None,
        onshell,
        fit_residual: None,
        flagged: false,
    })
}

fn max_norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |m, z| m.max(z.norm()))
}


/// `log m(x)` and its real directional derivative along `d` for the
/// deflation factor `m(x) = Π (1/q + 1)`. One factor per pinned configuration,
/// with `q = |u_i − θ_m|² + |u_j − θ_m + c|²`, and one per known solution, with
/// `q` the squared distance between the coefficient vectors of `Π (u − u_i)`.
fn deflation<T: Real>(
    ctx: &SpectralContext<T>,
    x: &[Complex<T>],
    d: Option<&[Complex<T>]>,
    known: &[Poly<T>],
) -> (T, T) {
    let c = ctx.c();
    let mut log_m = T::zero();
    let mut dlog = T::zero();
    if !known.is_empty() {
        let q = Poly::from_roots(x);
        let dq = d.map(|d| {
            (0..x.len()).fold(Poly::constant(Complex::zero()), |acc, i| {
                let mut others = x.to_vec();
                others.remove(i);
                &acc + &Poly::from_roots(&others).scale(-d[i])
            })
        });
        for r in known {
            let diff = &q - r;
            let dist = diff.coeffs().iter().fold(T::zero(), |m, z| m + z.norm_sqr());
            let inv = T::one() / dist;
            log_m += (inv + T::one()).ln();
            if let Some(dq) = &dq {
                let ddist = diff
                    .coeffs()
                    .iter()
                    .zip(dq.coeffs())
                    .fold(T::zero(), |m, (a, b)| m + (a.conj() * b).re)
                    * lit(2.0);
                dlog += -ddist * inv * inv / (inv + T::one());
            }
        }
    }
    for &th in ctx.chain.inhomogeneities() {
        for i in 0..x.len() {
            for j in 0..x.len() {
                if i == j {
                    continue;
                }
                let a = x[i] - th;
                let b = x[j] - th + c;
                let q = a.norm_sqr() + b.norm_sqr();
                let inv = T::one() / q;
                log_m += (inv + T::one()).ln();
                if let Some(d) = d {
                    let dq = ((a.conj() * d[i]).re + (b.conj() * d[j]).re) * lit(2.0);
                    dlog += -dq * inv * inv / (inv + T::one());
                }
            }
        }
    }
    (log_m, dlog)
}

const MAX_KICKS: usize = 40;

/// Damped, deflated Newton iteration on `ū ↦ (E(u_i, ū_i))_i` from one start.
/// Returns `None` when the iteration breaks down.
pub fn newton_from<T: Real>(ctx: &SpectralContext<T>, start: Vec<Complex<T>>, opts: &SolverOptions) -> Option<Vec<Complex<T>>> {
    newton_deflated(ctx, start, opts, &[])
}

fn newton_deflated<T: Real>(
    ctx: &SpectralContext<T>,
    start: Vec<Complex<T>>,
    opts: &SolverOptions,
    known: &[Poly<T>],
) -> Option<Vec<Complex<T>>> {
    let tol: T = lit(opts.tol);
    let mut x = start;
    let residual_at = |x: &[Complex<T>]| -> Option<(VariableSet<T>, Vec<Complex<T>>)> {
        let set = ctx.variables(x.to_vec()).ok()?;
        let e = ctx.bethe_residuals(&set).ok()?;
        e.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some((set, e))
    };
    let merit = |x: &[Complex<T>], e: &[Complex<T>]| {
        let (log_m, _) = deflation(ctx, x, None, known);
        e.iter().fold(T::zero(), |m, z| m + z.norm_sqr()).ln() + log_m * lit(2.0)
    };
    let (mut set, mut e) = residual_at(&x)?;
    let mut kicks = 0;
    for _ in 0..opts.max_iter {
        let norm = max_norm(&e);
        if norm <= tol * lit::<T>(1e-4) * ctx.residual_scale(&set) {
            break;
        }
        let current = merit(&x, &e);
        let jac = ctx.bethe_jacobian(&set).ok()?;
        let lu = Lu::new(&jac).ok()?;
        let neg: Vec<Complex<T>> = e.iter().map(|&z| -z).collect();
        let mut step = lu.solve(&neg).ok()?;
        let (_, dlog) = deflation(ctx, &x, Some(&step), known);
        let denom = T::one() - dlog;
        if denom.abs() > lit(1e-3) {
            let s = T::one() / denom;
            step.iter_mut().for_each(|z| *z = *z * s);
        }
        let mut lambda = T::one();
        let mut accepted = None;
        for _ in 0..=opts.halvings {
            let trial: Vec<Complex<T>> = x.iter().zip(&step).map(|(&a, &d)| a + d * lambda).collect();
            if let Some((s, et)) = residual_at(&trial) {
                if merit(&trial, &et) < current || max_norm(&et) < norm * lit(1e-2) {
                    accepted = Some((trial, s, et));
                    break;
                }
            }
            lambda = lambda * lit(0.5);
        }
        if accepted.is_none() && kicks < MAX_KICKS {
            // no damped decrease: take the full step and keep going
            kicks += 1;
            let trial: Vec<Complex<T>> = x.iter().zip(&step).map(|(&a, &d)| a + d).collect();
            accepted = residual_at(&trial).map(|(s, et)| (trial, s, et));
        }
        let (trial, s, et) = accepted?;
        let moved = trial.iter().zip(&x).fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()));
        x = trial;
        set = s;
        e = et;
        let size = x.iter().fold(T::one(), |m, z| m.max(z.norm()));
        if moved <= T::epsilon() * size {
            break;
        }
    }
    Some(x)
}

/// Undeflated, undamped Newton steps taken while they reduce the residual.
fn polish<T: Real>(ctx: &SpectralContext<T>, mut x: Vec<Complex<T>>) -> Vec<Complex<T>> {
    let residual = |x: &[Complex<T>]| -> Option<T> {
        let set = ctx.variables(x.to_vec()).ok()?;
        Some(max_norm(&ctx.bethe_residuals(&set).ok()?))
    };
    let Some(mut best) = residual(&x) else {
        return x;
    };
    for _ in 0..POLISH_STEPS {
        let Some(step) = ctx
            .variables(x.clone())
            .and_then(|set| {
                let e: Vec<Complex<T>> = ctx.bethe_residuals(&set)?.iter().map(|&z| -z).collect();
                Lu::new(&ctx.bethe_jacobian(&set)?)?.solve(&e)
            })
            .ok()
        else {
            break;
        };
        let trial: Vec<Complex<T>> = x.iter().zip(&step).map(|(&a, &d)| a + d).collect();
        match residual(&trial) {
            Some(r) if r < best => {
                best = r;
                x = trial;
            }
            _ => break,
        }
    }
    x
}

const POLISH_STEPS: usize = 30;

/// Roots pinned at an inhomogeneity `θ_m` together with `θ_m − c` satisfy the
/// residual equations trivially while the Bethe vector vanishes.
pub fn is_pinned_solution<T: Real>(ctx: &SpectralContext<T>, roots: &VariableSet<T>, tol: T) -> bool {
    let c = ctx.c();
    let scale = tol * c.norm().max(T::one());
    ctx.chain.inhomogeneities().iter().any(|&th| {
        let at = roots.iter().any(|&u| (u - th).norm() <= scale);
        let below = roots.iter().any(|&u| (u - th + c).norm() <= scale);
        at && below
    })
}

fn start_point<T: Real>(ctx: &SpectralContext<T>, seed: u64, index: usize) -> Vec<Complex<T>> {
    let th = ctx.chain.inhomogeneities();
    let n = ctx.sites();
    let center = th.iter().fold(Complex::<T>::zero(), |a, &b| a + b) / lit::<T>(n as f64);
    let spread = th.iter().fold(T::zero(), |m, z| m.max(z.norm()));
    let cn = ctx.c().norm();
    let radius = (cn * lit(2.0)).max(spread * lit(2.0) + cn);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
    (0..n)
        .map(|_| {
            let r: f64 = rng.gen::<f64>().sqrt();
            let phi: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
            center + Complex::from_polar(radius * lit(r), lit(phi))
        })
        .collect()
}

fn root_distance<T: Real>(a: &VariableSet<T>, b: &VariableSet<T>) -> T {
    if a.len() != b.len() {
        return T::infinity();
    }
    let mut used = vec![false; b.len()];
    let mut worst = T::zero();
    for &x in a.iter() {
        let mut best: Option<(usize, T)> = None;
        for (j, &y) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (x - y).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        match best {
            Some((j, d)) => {
                used[j] = true;
                worst = worst.max(d);
            }
            None => return T::infinity(),
        }
    }
    worst
}

fn canonical_cmp<T: Real>(a: &VariableSet<T>, b: &VariableSet<T>) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let o = x
            .re
            .partial_cmp(&y.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.im.partial_cmp(&y.im).unwrap_or(std::cmp::Ordering::Equal));
        if o != std::cmp::Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

fn insert_unique<T: Real>(unique: &mut Vec<BetheSolution<T>>, sol: BetheSolution<T>, dedup: T) {
    let mut duplicate = false;
    for kept in unique.iter_mut() {
        let d = root_distance(&kept.roots, &sol.roots);
        if d <= dedup {
            duplicate = true;
            break;
        }
        if d <= dedup * lit(1e3) {
            kept.flagged = true;
        }
    }
    if !duplicate {
        unique.push(sol);
    }
}

/// Union of two solution lists, deduplicated at `dedup` and sorted
/// canonically. Entries of `a` win over their duplicates in `b`.
pub fn merge_solutions<T: Real>(a: Vec<BetheSolution<T>>, b: Vec<BetheSolution<T>>, dedup: T) -> Vec<BetheSolution<T>> {
    let mut unique = Vec::new();
    for sol in a.into_iter().chain(b) {
        insert_unique(&mut unique, sol, dedup);
    }
    unique.sort_by(|x, y| canonical_cmp(&x.roots, &y.roots));
    unique
}

const NEWTON_ROUNDS: usize = 4;

/// Multi-start Newton search for all on-shell solutions with `M = N`.
/// Starts run in rounds; solutions found in earlier rounds are deflated in
/// later ones.
///
/// Output is sorted canonically and depends only on `opts.seed`, not on
/// thread scheduling.
pub fn solve_newton<T: Real>(ctx: &SpectralContext<T>, opts: &SolverOptions) -> Vec<BetheSolution<T>> {
    let tol: T = lit(opts.tol);
    let dedup: T = lit(opts.dedup);
    let mut unique: Vec<BetheSolution<T>> = Vec::new();
    let batch = opts.starts.div_ceil(NEWTON_ROUNDS).max(1);
    let mut first = 0;
    while first < opts.starts {
        let last = (first + batch).min(opts.starts);
        let known: Vec<Poly<T>> = unique.iter().map(|s| Poly::from_roots(s.roots.as_slice())).collect();
        let run = |k: usize| -> Option<BetheSolution<T>> {
            let start = start_point(ctx, opts.seed, k);
            let roots = polish(ctx, newton_deflated(ctx, start, opts, &known)?);
            let sol = evaluate(ctx, roots, tol).ok()?;
            (sol.onshell && !is_pinned_solution(ctx, &sol.roots, dedup)).then_some(sol)
        };
        let found: Vec<Option<BetheSolution<T>>> = if opts.parallel {
            (first..last).into_par_iter().map(run).collect()
        } else {
            (first..last).map(run).collect()
        };
        for sol in found.into_iter().flatten() {
            insert_unique(&mut unique, sol, dedup);
        }
        first = last;
    }
    unique.sort_by(|a, b| canonical_cmp(&a.roots, &b.roots));
    unique
}

fn interpolate_scalar<T: Real>(nodes: &[Complex<T>], values: &[Complex<T>]) -> Result<Poly<T>> {
    let n = nodes.len();
    let v = CMatrix::from_fn(n, n, |i, j| nodes[i].powu(j as u32));
    Ok(Poly::new(Lu::new(&v)?.solve(values)?))
}

/// Linear map `Q ↦ Λ Q − (κ̃−ρ)λ₁ Q(u−c) − (κ−ρ)λ₂ Q(u+c)`.
fn tq_linear<T: Real>(ctx: &SpectralContext<T>, lambda: &Poly<T>, q: &Poly<T>) -> Poly<T> {
    let zero_inhom = ctx.tq_rhs(q);
    let inhom = ctx.tq_rhs(&Poly::constant(Complex::zero()));
    &(lambda * q) - &(&zero_inhom - &inhom)
}

/// Least-squares fit of a monic degree-`N` `Q` to `Λ` through the T-Q identity.
/// Returns `Q` and the relative residual of the overdetermined system.
pub fn fit_q<T: Real>(ctx: &SpectralContext<T>, lambda: &Poly<T>) -> Result<(Poly<T>, T)> {
    let n = ctx.sites();
    let rows = 2 * n + 1;
    let coeff = |p: &Poly<T>, k: usize| p.coeffs().get(k).copied().unwrap_or_else(Complex::zero);
    let monomial = |k: usize| {
        let mut c = vec![Complex::zero(); k + 1];
        c[k] = Complex::one();
        Poly::new(c)
    };
    let columns: Vec<Poly<T>> = (0..n).map(|k| tq_linear(ctx, lambda, &monomial(k))).collect();
    let a = CMatrix::from_fn(rows, n, |i, j| coeff(&columns[j], i));
    let inhom = ctx.tq_rhs(&Poly::constant(Complex::zero()));
    let lead = tq_linear(ctx, lambda, &monomial(n));
    let b: Vec<Complex<T>> = (0..rows).map(|i| coeff(&inhom, i) - coeff(&lead, i)).collect();
    let (x, residual) = least_squares(&a, &b)?;
    let bnorm = b.iter().fold(T::zero(), |m, z| m + z.norm_sqr()).sqrt();
    let mut q = x;
    q.push(Complex::one());
    Ok((Poly::new(q), residual / bnorm.max(T::one())))
}

/// Samples of one transfer-matrix eigenvalue as a polynomial in `u`.
#[derive(Clone, Debug)]
pub struct EigenvalueSamples<T> {
    pub nodes: Vec<Complex<T>>,
    pub values: Vec<Complex<T>>,
    /// Distance to the nearest other eigenvalue at the probe point.
    pub gap: T,
}

impl<T: Real> EigenvalueSamples<T> {
    pub fn polynomial(&self) -> Result<Poly<T>> {
        interpolate_scalar(&self.nodes, &self.values)
    }
}

fn rayleigh<T: Real>(m: &CMatrix<T>, v: &[Complex<T>]) -> Complex<T> {
    let mv = m.mul_vec(v);
    let num = v.iter().zip(&mv).fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b);
    let den = v.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr());
    num / den
}

/// The probe point for exact diagonalisation.
pub fn default_probe<T: Real>(c: Complex<T>) -> Complex<T> {
    c * Complex::new(lit::<T>(0.37), lit::<T>(0.21))
}

/// Rayleigh-quotient samples of every eigenvalue of `t(u)` with eigenvectors
/// fixed at `probe`.
pub fn sample_eigenvalues<T: Real>(
    ctx: &SpectralContext<T>,
    transfer: &MatrixPolynomial<T>,
    probe: Complex<T>,
) -> Result<Vec<EigenvalueSamples<T>>> {
    let n = ctx.sites();
    let nodes = default_nodes(n, ctx.c(), ctx.chain.inhomogeneities());
    let mats: Vec<CMatrix<T>> = nodes.iter().map(|&u| transfer.eval(u)).collect();
    let pairs = eigenpairs(&transfer.eval(probe))?;
    let values: Vec<Complex<T>> = pairs.iter().map(|p| p.value).collect();
    Ok(pairs
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let gap = values
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .fold(T::infinity(), |m, (_, v)| m.min((*v - p.value).norm()));
            EigenvalueSamples {
                nodes: nodes.clone(),
                values: mats.iter().map(|m| rayleigh(m, &p.vector)).collect(),
                gap,
            }
        })
        .collect())
}

/// Solves the T-Q identity for each exact eigenvalue of `t(u)`.
///
/// Fits whose least-squares residual exceeds `opts.fit_threshold`, or whose
/// eigenvalue is degenerate at the probe point, are flagged but still returned.
pub fn solve_tq_fit<T: Real>(
    ctx: &SpectralContext<T>,
    transfer: &MatrixPolynomial<T>,
    opts: &SolverOptions,
) -> Result<Vec<BetheSolution<T>>> {
    let tol: T = lit(opts.tol);
    let samples = sample_eigenvalues(ctx, transfer, default_probe(ctx.c()))?;
    let scale = samples
        .iter()
        .fold(T::one(), |m, s| s.values.iter().fold(m, |mm, v| mm.max(v.norm())));
    let mut out = Vec::with_capacity(samples.len());
    for s in &samples {
        let lambda = s.polynomial()?;
        let (q, fit) = fit_q(ctx, &lambda)?;
        let degenerate = s.gap <= lit::<T>(1e-8) * scale;
        let raw = q.roots()?;
        let direct = polish(ctx, raw.clone());
        let near = |roots: &[Complex<T>]| -> bool {
            match (ctx.variables(roots.to_vec()), ctx.variables(raw.clone())) {
                (Ok(a), Ok(b)) => root_distance(&a, &b) <= lit(1e-4),
                _ => false,
            }
        };
        let polished = match evaluate(ctx, direct.clone(), tol) {
            Ok(sol) if sol.onshell => direct,
            _ => newton_from(ctx, raw.clone(), opts)
                .map(|x| polish(ctx, x))
                .filter(|x| near(x))
                .unwrap_or(direct),
        };
        let pick = |roots: Vec<Complex<T>>| evaluate(ctx, roots, tol);
        let sol = match (pick(polished), pick(raw)) {
            (Ok(a), Ok(b)) => {
                if a.max_residual() <= b.max_residual() && root_distance(&a.roots, &b.roots) <= lit(1e-4) {
                    a
                } else {
                    b
                }
            }
            (Ok(a), Err(_)) => a,
            (Err(_), Ok(b)) => b,
            (Err(e), Err(_)) => {
                if matches!(e, Error::Coincidence(_)) {
                    continue;
                }
                return Err(e);
            }
        };
        out.push(BetheSolution {
            fit_residual: Some(fit),
            flagged: degenerate || fit > lit(opts.fit_threshold),
            ..sol
        });
    }
    out.sort_by(|a, b| canonical_cmp(&a.roots, &b.roots));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchReport<T> {
    /// `(index in a, index in b, root distance)`.
    pub pairs: Vec<(usize, usize, T)>,
    pub unmatched_a: Vec<usize>,
    pub unmatched_b: Vec<usize>,
    pub max_root_distance: T,
    /// Largest `|Λ_a(u*) − Λ_b(u*)|` over matched pairs and probe points.
    pub max_eigenvalue_gap: T,
}

/// Pairs solutions from two methods by root distance and compares their
/// eigenvalues at `probes`.
pub fn classify_solutions<T: Real>(
    ctx: &SpectralContext<T>,
    a: &[BetheSolution<T>],
    b: &[BetheSolution<T>],
    probes: &[Complex<T>],
    tol: T,
) -> MatchReport<T> {
    let mut used = vec![false; b.len()];
    let mut pairs = Vec::new();
    let mut unmatched_a = Vec::new();
    let mut max_root_distance = T::zero();
    let mut max_eigenvalue_gap = T::zero();
    for (i, sa) in a.iter().enumerate() {
        let best = b
            .iter()
            .enumerate()
            .filter(|&(j, _)| !used[j])
            .map(|(j, sb)| (j, root_distance(&sa.roots, &sb.roots)))
            .fold(None, |acc: Option<(usize, T)>, (j, d)| match acc {
                Some((_, bd)) if bd <= d => acc,
                _ => Some((j, d)),
            });
        match best {
            Some((j, d)) if d <= tol => {
                used[j] = true;
                pairs.push((i, j, d));
                max_root_distance = max_root_distance.max(d);
                for &p in probes {
                    if let (Ok(x), Ok(y)) = (ctx.eigenvalue(p, &sa.roots), ctx.eigenvalue(p, &b[j].roots)) {
                        max_eigenvalue_gap = max_eigenvalue_gap.max((x - y).norm());
                    }
                }
            }
            _ => unmatched_a.push(i),
        }
    }
    let unmatched_b = (0..b.len()).filter(|&j| !used[j]).collect();
    MatchReport {
        pairs,
        unmatched_a,
        unmatched_b,
        max_root_distance,
        max_eigenvalue_gap,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumMatch<T> {
    pub probes: Vec<Complex<T>>,
    pub spectrum_size: usize,
    pub solutions: usize,
    /// Exact eigenvalues left without a Bethe solution, summed over probes.
    pub unmatched_eigenvalues: usize,
    /// Worst relative gap between a solution's `Λ(u*, ū)` and its matched
    /// exact eigenvalue.
    pub max_relative_gap: T,
}

impl<T: Real> SpectrumMatch<T> {
    pub fn is_complete(&self, tol: T) -> bool {
        self.solutions == self.spectrum_size && self.unmatched_eigenvalues == 0 && self.max_relative_gap <= tol
    }
}

/// Compares the eigenvalues `Λ(u*, ū)` of the solutions with the exact
/// spectrum of `t(u*)` and records the samples on each solution.
pub fn match_spectrum<T: Real>(
    ctx: &SpectralContext<T>,
    transfer: &MatrixPolynomial<T>,
    solutions: &mut [BetheSolution<T>],
    probes: &[Complex<T>],
) -> Result<SpectrumMatch<T>> {
    let mut unmatched = 0;
    let mut worst = T::zero();
    let mut spectrum_size = 0;
    for s in solutions.iter_mut() {
        s.matched_eigenvalue = Some(Vec::with_capacity(probes.len()));
    }
    for &p in probes {
        let exact = eigenvalues(&transfer.eval(p))?;
        spectrum_size = exact.len();
        let mut used = vec![false; exact.len()];
        for s in solutions.iter_mut() {
            let lam = ctx.eigenvalue(p, &s.roots)?;
            if let Some(v) = s.matched_eigenvalue.as_mut() {
                v.push(lam);
            }
            let best = exact
                .iter()
                .enumerate()
                .filter(|&(j, _)| !used[j])
                .fold(None, |acc: Option<(usize, T)>, (j, e)| {
                    let d = (lam - *e).norm();
                    match acc {
                        Some((_, bd)) if bd <= d => acc,
                        _ => Some((j, d)),
                    }
                });
            match best {
                Some((j, _)) => {
                    used[j] = true;
                    worst = worst.max(relative_error(lam, exact[j], T::one()));
                }
                None => worst = T::infinity(),
            }
        }
        unmatched += used.iter().filter(|u| !**u).count();
    }
    Ok(SpectrumMatch {
        probes: probes.to_vec(),
        spectrum_size,
        solutions: solutions.len(),
        unmatched_eigenvalues: unmatched,
        max_relative_gap: worst,
    })
}

/// Three probe points used for spectrum comparisons.
pub fn default_probes<T: Real>(c: Complex<T>) -> Vec<Complex<T>> {
    [(0.31, 0.17), (-0.53, 0.42), (0.77, -0.29)]
        .iter()
        .map(|&(re, im)| c * Complex::new(lit::<T>(re), lit::<T>(im)))
        .collect()
}
