mod common;

use common::*;
use proptest::prelude::*;
use twisted_xxx::bethe::VariableSet;
use twisted_xxx::chain::{build_transfer, ChainParams};
use twisted_xxx::cli::{apply_override, round15};
use twisted_xxx::poly::Poly;
use twisted_xxx::scalar::cplx;
use twisted_xxx::states::{
    build_bethe_vector, build_dual_vector, offshell_action_residuals, projection_expansion, raising_identity_residual,
    ChainOperators,
};
use twisted_xxx::twist::{RhoBranch, TwistFactorization, TwistParams};
use twisted_xxx::bethe::SpectralContext;
use twisted_xxx::{Error, C64};

fn complex(scale: f64) -> impl Strategy<Value = C64> {
    (-scale..scale, -scale..scale).prop_map(|(a, b)| cplx(a, b))
}

fn twist() -> impl Strategy<Value = TwistParams<f64>> {
    (
        (0.5..1.5f64, -0.3..0.3f64),
        (0.5..1.5f64, -0.3..0.3f64),
        (0.2..1.0f64, -0.5..0.5f64),
        (0.2..1.0f64, -0.5..0.5f64),
    )
        .prop_map(|(a, b, p, m)| TwistParams::new(cplx(a.0, a.1), cplx(b.0, b.1), cplx(p.0, p.1), cplx(m.0, m.1)))
}

fn chain(n: usize) -> impl Strategy<Value = ChainParams<f64>> {
    prop::collection::vec(complex(0.3), n).prop_map(move |th| ChainParams::new(n, cplx(1.0, 0.0), th).unwrap())
}

fn context(n: usize) -> impl Strategy<Value = SpectralContext<f64>> {
    (chain(n), twist()).prop_map(|(c, k)| SpectralContext::new(c, TwistFactorization::new(&k, RhoBranch::Minus).unwrap()))
}

fn separated(values: Vec<C64>) -> bool {
    values
        .iter()
        .enumerate()
        .all(|(i, a)| values[i + 1..].iter().all(|b| (a - b).norm() > 0.05))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn twist_factorization_reconstructs_k(k in twist(), plus in any::<bool>()) {
        let branch = if plus { RhoBranch::Plus } else { RhoBranch::Minus };
        match TwistFactorization::new(&k, branch) {
            Ok(f) => {
                prop_assert!(f.reconstruction_error() < 1e-11);
                let rho = f.rho;
                let poly = rho * rho - (k.kappa_tilde + k.kappa) * rho + k.kappa_plus * k.kappa_minus;
                prop_assert!(poly.norm() < 1e-11);
            }
            Err(e) => {
                let singular = matches!(e, Error::MuSingular { .. });
                prop_assert!(singular);
            }
        }
    }

    #[test]
    fn transfer_matrices_commute(p in chain(3), k in twist(), u in complex(1.0), v in complex(1.0)) {
        let t = build_transfer(&p, &k).unwrap();
        let (a, b) = (t.eval(u), t.eval(v));
        let scale = a.frobenius_norm() * b.frobenius_norm();
        prop_assert!(a.commutator(&b).frobenius_norm() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn bethe_vectors_are_symmetric(ctx in context(3), vals in prop::collection::vec(complex(1.0), 3), rot in 0usize..3) {
        prop_assume!(separated(vals.clone()));
        let ops = ChainOperators::new(&ctx).unwrap();
        let set = ctx.variables(vals).unwrap();
        let order: Vec<usize> = (0..3).map(|k| (k + rot) % 3).collect();
        let perm = set.permuted(&order);
        for (a, b) in [
            (build_bethe_vector(&ops.nu, &set), build_bethe_vector(&ops.nu, &perm)),
            (build_dual_vector(&ops.nu, &set), build_dual_vector(&ops.nu, &perm)),
        ] {
            let diff: f64 = a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(diff <= 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn offshell_actions_hold(ctx in context(2), u in complex(1.0), vals in prop::collection::vec(complex(1.0), 0..=2)) {
        let mut all = vals.clone();
        all.push(u);
        prop_assume!(separated(all));
        let ops = ChainOperators::new(&ctx).unwrap();
        let set = ctx.variables(vals).unwrap();
        let r = offshell_action_residuals(&ops, &ctx, u, &set).unwrap();
        prop_assert!(r.max() < 1e-10, "{:?}", r);
    }

    #[test]
    fn raising_identity_holds(ctx in context(2), u in complex(1.0), vals in prop::collection::vec(complex(1.0), 2)) {
        let mut all = vals.clone();
        all.push(u);
        prop_assume!(separated(all));
        let ops = ChainOperators::new(&ctx).unwrap();
        let set = ctx.variables(vals).unwrap();
        prop_assert!(raising_identity_residual(&ops, &ctx, u, &set).unwrap() < 1e-10);
    }

    #[test]
    fn projection_reassembles(ctx in context(2), vals in prop::collection::vec(complex(1.0), 0..=2)) {
        prop_assume!(separated(vals.clone()));
        let ops = ChainOperators::new(&ctx).unwrap();
        let set = ctx.variables(vals).unwrap();
        let p = projection_expansion(&ops, &ctx, &set).unwrap();
        prop_assert!(p.ket_residual < 1e-10 && p.dual_residual < 1e-10);
        prop_assert!(p.w0_difference.unwrap() < 1e-10);
    }

    #[test]
    fn coincident_parameters_are_rejected(u in complex(1.0)) {
        let ctx = config_a();
        let rejected = matches!(ctx.variables(vec![u, u]), Err(Error::Coincidence(_)));
        prop_assert!(rejected);
    }

    #[test]
    fn polynomial_roots_round_trip(roots in prop::collection::vec(complex(2.0), 1..5)) {
        prop_assume!(separated(roots.clone()));
        let found = Poly::from_roots(&roots).roots().unwrap();
        for r in &roots {
            let d = found.iter().map(|f| (f - r).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(d < 1e-8);
        }
    }

    #[test]
    fn round15_is_idempotent(x in -1e12..1e12f64) {
        let once = round15(x);
        prop_assert_eq!(round15(once), once);
        prop_assert!((once - x).abs() <= 1e-14 * x.abs());
    }

    #[test]
    fn overrides_replace_values(seed in 0u64..1000) {
        let mut v: serde_json::Value = serde_json::json!({"solver": {"seed": 0}});
        apply_override(&mut v, &format!("solver.seed={seed}")).unwrap();
        prop_assert_eq!(v["solver"]["seed"].as_u64(), Some(seed));
    }
}

#[test]
fn empty_set_is_a_valid_variable_set() {
    let e = VariableSet::<f64>::empty();
    assert!(e.is_empty());
}
