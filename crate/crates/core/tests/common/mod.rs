#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twisted_xxx::scalar::cplx;
use twisted_xxx::solver::{merge_solutions, solve_newton, solve_tq_fit, SolverOptions};
use twisted_xxx::{
    BetheSolution, ChainOperators, ChainParams, RhoBranch, SpectralContext, TwistFactorization, TwistParams, C64,
};

pub const ROOT_A: f64 = 1.618033988749895;
pub const ROOT_B: f64 = -1.3090169943749475;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn re(x: f64) -> C64 {
    cplx(x, 0.0)
}

pub fn point(rng: &mut ChaCha8Rng, scale: f64) -> C64 {
    cplx(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

pub fn points(rng: &mut ChaCha8Rng, m: usize, scale: f64) -> Vec<C64> {
    (0..m).map(|_| point(rng, scale)).collect()
}

pub fn config_a() -> SpectralContext {
    let p = ChainParams::homogeneous(1, re(1.0)).unwrap();
    let k = TwistParams::new(re(2.0), re(1.0), re(1.0), re(1.0));
    SpectralContext::new(p, TwistFactorization::new(&k, RhoBranch::Minus).unwrap())
}

pub fn random_twist(rng: &mut ChaCha8Rng) -> TwistParams {
    let diag = |rng: &mut ChaCha8Rng| cplx(rng.gen_range(0.5..1.5), rng.gen_range(-0.3..0.3));
    let off = |rng: &mut ChaCha8Rng| cplx(rng.gen_range(0.2..1.0), rng.gen_range(-0.5..0.5));
    TwistParams::new(diag(rng), diag(rng), off(rng), off(rng))
}

pub fn random_chain(rng: &mut ChaCha8Rng, n: usize) -> ChainParams {
    let th = (0..n)
        .map(|_| cplx(rng.gen_range(-0.3..0.3), rng.gen_range(-0.1..0.1)))
        .collect();
    ChainParams::new(n, re(1.0), th).unwrap()
}

pub fn random_context(rng: &mut ChaCha8Rng, n: usize) -> SpectralContext {
    let chain = random_chain(rng, n);
    let k = random_twist(rng);
    SpectralContext::new(chain, TwistFactorization::new(&k, RhoBranch::Minus).unwrap())
}

/// Diagonal twist `diag(κ̃, κ)` on a random chain; the `ρ = 0` path.
pub fn diagonal_context(rng: &mut ChaCha8Rng, n: usize) -> SpectralContext {
    let chain = random_chain(rng, n);
    let kt = cplx(rng.gen_range(0.5..1.5), rng.gen_range(-0.3..0.3));
    let kk = cplx(rng.gen_range(0.5..1.5), rng.gen_range(-0.3..0.3));
    let k = TwistParams::new(kt, kk, re(0.0), re(0.0));
    SpectralContext::new(chain, TwistFactorization::new(&k, RhoBranch::Minus).unwrap())
}

/// On-shell solutions found by Newton or by the T-Q fit.
pub fn joint_solutions(ctx: &SpectralContext, ops: &ChainOperators) -> Vec<BetheSolution> {
    let opts = SolverOptions::default();
    let newton = solve_newton(ctx, &opts);
    let fit = solve_tq_fit(ctx, &ops.transfer, &opts).unwrap_or_default();
    merge_solutions(newton, fit, opts.dedup)
        .into_iter()
        .filter(|s| s.onshell)
        .collect()
}
