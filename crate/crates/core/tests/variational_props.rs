mod common;

use std::f64::consts::PI;
use std::sync::OnceLock;

use kirchhoff::fem::{assemble, build_interval_mesh, build_rect_mesh, AssembledOperators};
use kirchhoff::model::{sine, sine_forcing, KirchhoffLaw};
use kirchhoff::variational::{grad_j, grad_phi, grad_psi, inverse_t, j_functional, phi, psi_functional, Problem};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn interval() -> &'static AssembledOperators {
    static OPS: OnceLock<AssembledOperators> = OnceLock::new();
    OPS.get_or_init(|| assemble(&build_interval_mesh(40, 1.0).unwrap()).unwrap())
}

fn square() -> &'static AssembledOperators {
    static OPS: OnceLock<AssembledOperators> = OnceLock::new();
    OPS.get_or_init(|| assemble(&build_rect_mesh(8, 8, 1.0, 1.0).unwrap()).unwrap())
}

fn law_strategy() -> impl Strategy<Value = (f64, f64)> {
    prop_oneof![Just((1.0, 0.0)), Just((1.0, 1.0)), Just((2.0, 3.0)), (0.1f64..5.0, 0.0f64..5.0)]
}

fn ops_strategy() -> impl Strategy<Value = &'static AssembledOperators> {
    prop_oneof![Just(()).prop_map(|_| interval()), Just(()).prop_map(|_| square())]
}

fn field(ops: &AssembledOperators, seed: &[f64], amp: f64) -> Vec<f64> {
    seed.iter().cycle().take(ops.num_dofs()).map(|s| s * amp).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coercivity_lower_bound(ops in ops_strategy(), (a, b) in law_strategy(),
                              seed in prop::collection::vec(-1.0f64..1.0, 49), amp in 0.0f64..20.0) {
        let law = KirchhoffLaw::affine(a, b);
        let u = field(ops, &seed, amp);
        let n2 = ops.h1_norm(&u).unwrap().powi(2);
        prop_assert!(phi(ops, &law, &u).unwrap() >= 0.5 * a * n2 - 1e-9);
    }

    #[test]
    fn inverse_t_undoes_grad_phi(ops in ops_strategy(), (a, b) in law_strategy(),
                                 seed in prop::collection::vec(-1.0f64..1.0, 49), amp in 0.0f64..20.0) {
        let law = KirchhoffLaw::affine(a, b);
        let u = field(ops, &seed, amp);
        let back = inverse_t(ops, &law, &grad_phi(ops, &law, &u).unwrap()).unwrap();
        let err = ops.h1_distance(&back, &u).unwrap();
        prop_assert!(err <= 1e-8 * (1.0 + ops.h1_norm(&u).unwrap()), "err {err}");
    }

    #[test]
    fn grad_phi_scales_with_k(ops in ops_strategy(), (a, b) in law_strategy(),
                              seed in prop::collection::vec(-1.0f64..1.0, 49), c in -4.0f64..4.0) {
        let law = KirchhoffLaw::affine(a, b);
        let u = field(ops, &seed, 1.0);
        let cu: Vec<f64> = u.iter().map(|x| c * x).collect();
        let g = grad_phi(ops, &law, &cu).unwrap();
        let k = law.k(c * c * ops.h1_norm(&u).unwrap().powi(2));
        for (gi, ui) in g.iter().zip(&u) {
            prop_assert!((gi - k * c * ui).abs() <= 1e-12 * (1.0 + (k * c * ui).abs()));
        }
    }

    #[test]
    fn energy_total_is_the_combination(ops in ops_strategy(), seed in prop::collection::vec(-1.0f64..1.0, 49),
                                       lambda in 0.0f64..1e3, mu in -10.0f64..10.0) {
        let law = KirchhoffLaw::affine(1.0, 1.0);
        let (f, g) = (sine(), sine_forcing());
        let p = Problem::new(ops, &law, &f).with_perturbation(&g).with_params(lambda, mu);
        let u = field(ops, &seed, 2.0);
        let e = p.energy(&u).unwrap();
        let expect = e.phi - lambda * e.j - mu * e.psi;
        prop_assert!((e.total - expect).abs() <= 1e-14 * (e.phi.abs() + (lambda * e.j).abs() + (mu * e.psi).abs()).max(1e-300));
        prop_assert!((e.total_at(lambda, mu) - e.total).abs() <= 1e-14 * (1.0 + e.total.abs()));
    }
}

#[test]
fn gradients_match_central_differences() {
    let hs = [1e-3, 1e-4, 1e-5];
    let law = KirchhoffLaw::affine(1.0, 1.0);
    let (f, g) = (sine(), common::cubic());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for ops in [interval(), square()] {
        for _ in 0..5 {
            let u = common::smooth_positive(ops.mesh(), &mut rng, 1.0);
            let v = common::smooth_positive(ops.mesh(), &mut rng, 6.0);
            let checks = [
                (ops.h1_inner(&grad_phi(ops, &law, &u).unwrap(), &v).unwrap(), 0),
                (ops.h1_inner(&grad_j(ops, &f, &u).unwrap(), &v).unwrap(), 1),
                (ops.h1_inner(&grad_psi(ops, &g, &u).unwrap(), &v).unwrap(), 2),
            ];
            for (exact, which) in checks {
                let e = |w: &[f64]| match which {
                    0 => phi(ops, &law, w).unwrap(),
                    1 => j_functional(ops, &f, w).unwrap(),
                    _ => psi_functional(ops, &g, w).unwrap(),
                };
                let (order, rel) = common::fd_check(e, &u, &v, exact, &hs);
                assert!(order >= 1.9 && rel <= 1e-6, "functional {which}: order {order}, rel {rel}");
            }
        }
    }
}

#[test]
fn residual_of_interpolated_oracle_is_second_order() {
    // K ≡ 1, f = sin(πx), λ = 1: exact solution sin(πx)/π².
    let law = KirchhoffLaw::constant(1.0);
    let f = sine_forcing();
    let mut prev: Option<f64> = None;
    for cells in [16, 32, 64] {
        let ops = assemble(&build_interval_mesh(cells, 1.0).unwrap()).unwrap();
        let p = Problem::new(&ops, &law, &f).with_params(1.0, 0.0);
        let u = ops.mesh().interpolate(|x| (PI * x[0]).sin() / (PI * PI));
        let (_, r) = p.residual(&u).unwrap();
        if let Some(rp) = prev {
            let order = (rp / r).log2();
            assert!(order >= 1.8, "order {order}");
        }
        prev = Some(r);
    }
}
