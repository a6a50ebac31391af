//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use twisted_xxx::chain::{build_hamiltonian, structure_checks, HamiltonianRoute};
use twisted_xxx::overlaps::{
    classical_slavnov, gaudin_matrix, jacobian_fd_check, lhospital_check, norm_check, normalized_overlap,
    overlap_direct, slavnov_check, slavnov_formula, Orientation,
};
use twisted_xxx::scalar::relative_error;
use twisted_xxx::solver::{default_probes, match_spectrum, solve_newton, SolverOptions};
use twisted_xxx::states::{offshell_action_residuals, raising_identity_residual, w0};
use twisted_xxx::tensor::eigenvalues;
use twisted_xxx::{ChainOperators, ChainParams, Result, TwistParams, VariableSet, C64};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

fn run(name: &str, f: impl FnOnce() -> Result<Outcome>) -> (bool, Duration) {
    let start = Instant::now();
    let outcome = f().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
    let elapsed = start.elapsed();
    let tag = if outcome.pass { "PASS" } else { "FAIL" };
    println!("{tag} {name}: {} [{:.2} s]", outcome.detail, elapsed.as_secs_f64());
    (outcome.pass, elapsed)
}

fn structural() -> Result<Outcome> {
    let start = Instant::now();
    let mut r = rng(101);
    let mut worst = 0.0f64;
    for n in 1..=4 {
        for _ in 0..5 {
            let chain = random_chain(&mut r, n);
            let k = random_twist(&mut r);
            let (u, v) = (point(&mut r, 1.0), point(&mut r, 1.0));
            worst = worst.max(structure_checks(&chain, &k, u, v)?.max());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome::new(
        worst < 1e-10 && secs < 10.0,
        format!("max residual {worst:.3e} over N <= 4 x 5 draws, {secs:.2} s"),
    ))
}

fn hamiltonian() -> Result<Outcome> {
    let mut r = rng(202);
    let mut worst = 0.0f64;
    for n in [2, 3] {
        for _ in 0..3 {
            let chain = ChainParams::homogeneous(n, re(1.0))?;
            let k = random_twist(&mut r);
            let direct = build_hamiltonian(&chain, &k, HamiltonianRoute::Direct)?;
            let via = build_hamiltonian(&chain, &k, HamiltonianRoute::Transfer)?;
            worst = worst.max((&direct - &via).frobenius_norm() / direct.frobenius_norm().max(1.0));
        }
    }
    let periodic = TwistParams::new(re(1.0), re(1.0), re(0.0), re(0.0));
    let h = build_hamiltonian(&ChainParams::homogeneous(2, re(1.0))?, &periodic, HamiltonianRoute::Direct)?;
    let mut ev: Vec<f64> = eigenvalues(&h)?.iter().map(|z| z.re).collect();
    ev.sort_by(f64::total_cmp);
    let expected = [-6.0, 2.0, 2.0, 2.0];
    let spec_err = ev.iter().zip(expected).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let imag = eigenvalues(&h)?.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    Ok(Outcome::new(
        worst < 1e-8 && spec_err.max(imag) < 1e-10,
        format!("route residual {worst:.3e}; periodic N=2 spectrum {ev:?} (error {:.1e})", spec_err.max(imag)),
    ))
}

fn offshell_actions() -> Result<Outcome> {
    let mut r = rng(303);
    let mut worst = 0.0f64;
    for n in 1..=3 {
        for _ in 0..10 {
            let ctx = random_context(&mut r, n);
            let ops = ChainOperators::new(&ctx)?;
            let u = point(&mut r, 1.0);
            for m in 0..=n {
                let set = ctx.variables(points(&mut r, m, 1.0))?;
                worst = worst.max(offshell_action_residuals(&ops, &ctx, u, &set)?.max());
            }
        }
    }
    Ok(Outcome::new(worst < 1e-9, format!("max residual {worst:.3e} over M <= N <= 3 x 10 draws")))
}

fn raising() -> Result<Outcome> {
    let mut r = rng(404);
    let mut worst = 0.0f64;
    for n in 1..=3 {
        for _ in 0..10 {
            let ctx = random_context(&mut r, n);
            let ops = ChainOperators::new(&ctx)?;
            let u = point(&mut r, 1.0);
            let set = ctx.variables(points(&mut r, n, 1.0))?;
            worst = worst.max(raising_identity_residual(&ops, &ctx, u, &set)?);
        }
    }
    Ok(Outcome::new(worst < 1e-9, format!("max residual {worst:.3e} over N = 1..3 x 10 draws")))
}

fn branch(u: C64, sign: f64) -> C64 {
    u * 3.0 + (3.0 + sign * 5f64.sqrt()) / 2.0
}

fn completeness() -> Result<Outcome> {
    let mut r = rng(505);
    let mut notes = Vec::new();
    let mut pass = true;
    for n in 1..=3 {
        let ctx = random_context(&mut r, n);
        let ops = ChainOperators::new(&ctx)?;
        let mut sols = joint_solutions(&ctx, &ops);
        let m = match_spectrum(&ctx, &ops.transfer, &mut sols, &default_probes(ctx.c()))?;
        let ok = sols.len() == 1 << n && m.is_complete(1e-8);
        pass &= ok;
        notes.push(format!("N={n}: {}/{} gap {:.1e}", sols.len(), 1 << n, m.max_relative_gap));
    }
    let ctx = config_a();
    let ops = ChainOperators::new(&ctx)?;
    let sols = joint_solutions(&ctx, &ops);
    let roots: Vec<f64> = sols.iter().map(|s| s.roots.get(0).re).collect();
    let anchor_roots = sols.len() == 2
        && (roots[0] - ROOT_B).abs() < 1e-9
        && (roots[1] - ROOT_A).abs() < 1e-9
        && sols.iter().all(|s| s.roots.get(0).im.abs() < 1e-9);
    let mut branch_err = 0.0f64;
    for p in default_probes(ctx.c()) {
        let lo = ctx.eigenvalue(p, &sols[0].roots)?;
        let hi = ctx.eigenvalue(p, &sols[1].roots)?;
        branch_err = branch_err
            .max(relative_error(lo, branch(p, -1.0), 1.0))
            .max(relative_error(hi, branch(p, 1.0), 1.0));
    }
    let anchor = anchor_roots && branch_err < 1e-10;
    notes.push(format!("config A roots {roots:.6?}, branch error {branch_err:.1e}"));
    Ok(Outcome::new(pass && anchor, notes.join("; ")))
}

fn slavnov() -> Result<Outcome> {
    let mut r = rng(606);
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in 1..=3 {
        let ctx = random_context(&mut r, n);
        let ops = ChainOperators::new(&ctx)?;
        for sol in joint_solutions(&ctx, &ops) {
            for _ in 0..5 {
                let off = ctx.variables(points(&mut r, n, 1.5))?;
                let a = slavnov_check(&ctx, &ops, &sol.roots, &off, Orientation::UOnshell, 1e-8)?;
                let b = slavnov_check(&ctx, &ops, &off, &sol.roots, Orientation::VOnshell, 1e-8)?;
                worst = worst.max(a.relative_error).max(b.relative_error);
                count += 2;
            }
        }
    }
    let ctx = config_a();
    let ops = ChainOperators::new(&ctx)?;
    let u = ctx.variables(vec![re(0.0)])?;
    let v = ctx.variables(vec![re(ROOT_A)])?;
    let anchor = slavnov_check(&ctx, &ops, &u, &v, Orientation::VOnshell, 1e-8)?;
    let mu = ctx.twist.mu;
    let target = mu * mu * ROOT_A;
    let anchor_err = relative_error(anchor.formula, target, 1.0).max(anchor.relative_error);
    Ok(Outcome::new(
        worst < 1e-8 && anchor_err < 1e-10,
        format!(
            "max relative error {worst:.3e} over {count} overlaps; config A S = {:.6} (mu^2 u1 = {:.6})",
            anchor.formula.re, target.re
        ),
    ))
}

fn gaudin() -> Result<Outcome> {
    let mut r = rng(707);
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in 1..=3 {
        let ctx = random_context(&mut r, n);
        let ops = ChainOperators::new(&ctx)?;
        for sol in joint_solutions(&ctx, &ops) {
            worst = worst.max(norm_check(&ctx, &ops, &sol.roots, 1e-8)?.relative_error);
            count += 1;
        }
    }
    let ctx = config_a();
    let ops = ChainOperators::new(&ctx)?;
    let set = ctx.variables(vec![re(ROOT_A)])?;
    let rep = norm_check(&ctx, &ops, &set, 1e-8)?;
    let g11 = gaudin_matrix(&ctx, &set)?[(0, 0)];
    let anchor = (rep.formula - re(4.959675)).norm() < 1e-6 && (g11 - re(5f64.sqrt())).norm() < 1e-12;
    Ok(Outcome::new(
        worst < 1e-8 && anchor && rep.relative_error < 1e-9,
        format!(
            "max relative error {worst:.3e} over {count} norms; config A N = {:.6}, G11 = {:.6}",
            rep.formula.re, g11.re
        ),
    ))
}

fn orthogonality() -> Result<Outcome> {
    let mut r = rng(808);
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for n in 1..=3 {
        let ctx = random_context(&mut r, n);
        let ops = ChainOperators::new(&ctx)?;
        let sols = joint_solutions(&ctx, &ops);
        for a in &sols {
            for b in &sols {
                if a.roots != b.roots {
                    worst = worst.max(normalized_overlap(&ops, &a.roots, &b.roots));
                    pairs += 1;
                }
            }
        }
    }
    let ctx = config_a();
    let rho = ctx.rho().re;
    let closed = 1.0 + rho * rho * (2.0 * ROOT_A + 1.0) * (2.0 * ROOT_B + 1.0);
    Ok(Outcome::new(
        worst < 1e-8 && closed.abs() < 1e-14,
        format!("max normalized overlap {worst:.3e} over {pairs} ordered pairs; config A closed form {closed:.1e}"),
    ))
}

fn u1_limit() -> Result<Outcome> {
    let mut r = rng(909);
    let mut worst_s = 0.0f64;
    let mut worst_w = 0.0f64;
    let mut found = 0;
    for n in 1..=3 {
        for _ in 0..3 {
            let ctx = diagonal_context(&mut r, n);
            let ops = ChainOperators::new(&ctx)?;
            let opts = SolverOptions { starts: 60, ..SolverOptions::default() };
            for sol in solve_newton(&ctx, &opts) {
                let v = &sol.roots;
                let k = &ctx.twist.params;
                let lambda2 = v.iter().fold(re(1.0), |acc, &x| acc * ctx.chain.lambda2(x));
                let expected = lambda2 * (k.kappa / k.kappa_tilde + 1.0).powu(n as u32);
                worst_w = worst_w.max(relative_error(w0(&ctx, v)?, expected, 1e-30));
                let u = ctx.variables(points(&mut r, n, 1.5))?;
                let pipeline = slavnov_formula(&ctx, &u, v, Orientation::VOnshell, 1e-8)?;
                let classical = classical_slavnov(&ctx, &u, v)?;
                let direct = overlap_direct(&ops, &u, v)?;
                worst_s = worst_s
                    .max(relative_error(pipeline, classical, 1e-30))
                    .max(relative_error(pipeline, direct, 1e-30));
                found += 1;
            }
        }
    }
    Ok(Outcome::new(
        found > 0 && worst_s < 1e-10 && worst_w < 1e-10,
        format!("{found} on-shell sets: Slavnov vs classical {worst_s:.3e}, W0 vs lambda2 (kappa/kappa_tilde + 1)^N {worst_w:.3e}"),
    ))
}

fn gradients() -> Result<Outcome> {
    let mut r = rng(1010);
    let mut worst_fd = 0.0f64;
    let mut worst_lim = 0.0f64;
    for n in 1..=3 {
        let ctx = random_context(&mut r, n);
        let ops = ChainOperators::new(&ctx)?;
        for sol in joint_solutions(&ctx, &ops) {
            let other: VariableSet = ctx.variables(points(&mut r, n, 1.5))?;
            worst_fd = worst_fd.max(jacobian_fd_check(&ctx, &sol.roots, &other, 1e-5)?);
            worst_lim = worst_lim.max(lhospital_check(&ctx, &sol.roots)?);
        }
    }
    Ok(Outcome::new(
        worst_fd < 1e-6 && worst_lim < 1e-5,
        format!("Jacobian vs central differences {worst_fd:.3e}; l'Hospital limit {worst_lim:.3e}"),
    ))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let criteria: [(&str, fn() -> Result<Outcome>); 10] = [
        ("1 structural identities", structural),
        ("2 Hamiltonian equivalence", hamiltonian),
        ("3 off-shell actions", offshell_actions),
        ("4 raising identity", raising),
        ("5 completeness", completeness),
        ("6 modified Slavnov formula", slavnov),
        ("7 modified Gaudin-Korepin norm", gaudin),
        ("8 orthogonality", orthogonality),
        ("9 diagonal-twist limit", u1_limit),
        ("10 gradient and limit checks", gradients),
    ];
    let mut all = true;
    for (name, f) in criteria {
        all &= run(name, f).0;
    }
    let total = start.elapsed().as_secs_f64();
    let in_time = total < 120.0;
    println!(
        "{} total runtime: {total:.2} s (target 120 s)",
        if in_time { "PASS" } else { "FAIL" }
    );
    if all && in_time {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
