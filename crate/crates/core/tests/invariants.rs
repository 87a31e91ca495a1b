use proptest::prelude::*;
use qes_core::bethe::{bae_jacobian, bae_residual_cleared, certify_ode, solve_all, theorem_coeffs, BetheSolution};
use qes_core::exec::Execution;
use qes_core::forms::{CanonicalForm, FormKind, GHeun3Form, HeunForm};
use qes_core::linalg::min_separation;
use qes_core::{OdeSpec, SolverConfig, C64};

fn arb_c64(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(a, b)| C64::new(a, b))
}

fn arb_spec(n: usize) -> impl Strategy<Value = OdeSpec> {
    (prop::array::uniform5(arb_c64(1.0)), prop::array::uniform4(arb_c64(1.0))).prop_map(move |(mut a, b)| {
        a[4] += 1.5;
        OdeSpec::new(a, b, n).unwrap()
    })
}

fn arb_roots(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(arb_c64(2.0), n).prop_filter("distinct roots", |z| z.len() < 2 || min_separation(z) > 0.2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficients_ignore_root_order((spec, z) in (1usize..=4).prop_flat_map(|n| (arb_spec(n), arb_roots(n)))) {
        let c = theorem_coeffs(&spec, &z);
        let mut rev = z.clone();
        rev.reverse();
        rev.rotate_left(1);
        let d = theorem_coeffs(&spec, &rev);
        for k in 0..3 {
            prop_assert!((c[k] - d[k]).norm() <= 1e-12 * (1.0 + c[k].norm()));
        }
    }

    #[test]
    fn jacobian_matches_central_differences((spec, z) in (1usize..=4).prop_flat_map(|n| (arb_spec(n), arb_roots(n)))) {
        let jac = bae_jacobian(&spec, &z);
        let h = 1e-6;
        let scale = 1.0 + jac.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for m in 0..z.len() {
            let mut up = z.clone();
            let mut dn = z.clone();
            up[m] += h;
            dn[m] -= h;
            let (fu, fd) = (bae_residual_cleared(&spec, &up), bae_residual_cleared(&spec, &dn));
            for i in 0..z.len() {
                let fd_val = (fu[i] - fd[i]) / (2.0 * h);
                prop_assert!((fd_val - jac[(i, m)]).norm() <= 1e-6 * scale, "J[{i},{m}]");
            }
        }
    }

    #[test]
    fn heun_round_trip(d in prop::array::uniform3(arb_c64(2.0)), alpha in prop::array::uniform3(arb_c64(2.0))) {
        prop_assume!(min_separation(&d) > 0.1);
        let form = CanonicalForm::Heun(HeunForm { d, alpha });
        let back = CanonicalForm::from_spec(&form.to_spec(2).unwrap(), FormKind::Heun).unwrap();
        let CanonicalForm::Heun(h) = back else { panic!("kind changed") };
        for (p, r) in d.iter().zip(alpha.iter()) {
            let k = h.d.iter().position(|q| (q - p).norm() < 1e-9).expect("pole recovered");
            prop_assert!((h.alpha[k] - r).norm() <= 1e-9 * (1.0 + r.norm()));
        }
    }

    #[test]
    fn gheun3_round_trip(g1 in arb_c64(2.0), g2 in arb_c64(2.0), s in prop::array::uniform4(arb_c64(2.0))) {
        prop_assume!((g1 - g2).norm() > 0.1);
        let f = GHeun3Form { g1, g2, sigma1: s[0], sigma2: s[1], sigma: s[2], kappa: s[3] };
        let back = CanonicalForm::from_spec(&CanonicalForm::GHeun3(f.clone()).to_spec(1).unwrap(), FormKind::GHeun3).unwrap();
        let CanonicalForm::GHeun3(b) = back else { panic!("kind changed") };
        prop_assert!((b.sigma - f.sigma).norm() < 1e-9 && (b.kappa - f.kappa).norm() < 1e-9 * (1.0 + f.kappa.norm() + f.sigma.norm() * 4.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Every certified solution is a genuine polynomial solution, and moving
    /// one root by 1e-3 breaks certification.
    #[test]
    fn certified_solutions_substitute(spec in (1usize..=3).prop_flat_map(arb_spec), seed in 0u64..1000) {
        let cfg = SolverConfig::default().with_restarts(120).with_seed(seed);
        for s in solve_all(&spec, &cfg).unwrap() {
            prop_assert!(s.certified);
            prop_assert!(certify_ode(&spec, s.roots.as_slice(), s.coeffs()) <= cfg.cert_tol);
            let mut moved = s.roots.as_slice().to_vec();
            moved[0] += C64::new(1e-3, 0.0);
            let bumped = BetheSolution::evaluate(&spec, moved, &cfg);
            prop_assert!(!bumped.certified);
        }
    }
}

#[test]
fn sequential_and_parallel_agree_across_seeds() {
    let spec = OdeSpec::from_real([0.2, -0.4, 0.1, 0.9, 1.3], [0.5, 0.3, -0.8, 0.6], 2).unwrap();
    let base = SolverConfig::default().with_restarts(300);
    let reference = solve_all(&spec, &base.clone().with_execution(Execution::Sequential)).unwrap();
    assert_eq!(reference.len(), 6);
    for seed in [1, 2, 3] {
        let cfg = base.clone().with_seed(seed);
        let seq = solve_all(&spec, &cfg.clone().with_execution(Execution::Sequential)).unwrap();
        let par = solve_all(&spec, &cfg.with_execution(Execution::Parallel)).unwrap();
        assert_eq!(seq, par, "seed {seed}");
        assert_eq!(seq.len(), reference.len());
        for (a, b) in seq.iter().zip(&reference) {
            assert!((a.c0 - b.c0).norm() < 1e-9 * (1.0 + b.c0.norm()));
        }
    }
}

#[test]
fn json_round_trip_preserves_solutions() {
    let spec = OdeSpec::from_real([0.0, -1.0, 0.0, 1.0, 0.0], [-1.0, 0.0, 2.0, 0.0], 2).unwrap();
    let sols = solve_all(&spec, &SolverConfig::default().with_restarts(80)).unwrap();
    let text = serde_json::to_string(&(&spec, &sols)).unwrap();
    let (spec2, sols2): (OdeSpec, Vec<BetheSolution>) = serde_json::from_str(&text).unwrap();
    assert_eq!(spec, spec2);
    assert_eq!(sols, sols2);
}
