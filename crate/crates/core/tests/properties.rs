use num_complex::Complex64;
use proptest::prelude::*;

use vanhove::dispersion::DispersionModel;
use vanhove::fitlab::fit_log_square;
use vanhove::matsubara::{bose, bose_fermi_product, fermi, sigma2_kernel, ThermalState};
use vanhove::orthant::{epsilon_signed, OrthantTerm, Point4};
use vanhove::quad::{integrate, FnIntegrand, QuadSpec, Region};

fn unit4() -> impl Strategy<Value = Point4> {
    [0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64]
}

fn hubbard() -> impl Strategy<Value = DispersionModel> {
    (0.01..0.95f64, -0.5..0.5f64).prop_map(|(t, mu)| DispersionModel::hubbard(t, mu).unwrap())
}

fn state() -> impl Strategy<Value = ThermalState> {
    prop_oneof![
        1 => Just(ThermalState::ZeroTemperature),
        4 => (0.1..100.0f64).prop_map(|b| ThermalState::finite(b).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gradient_matches_central_differences(m in hubbard(), k in [-3.0..3.0f64, -3.0..3.0f64]) {
        let h = 1e-5;
        let g = m.gradient(k);
        let fd = [
            (m.evaluate([k[0] + h, k[1]]) - m.evaluate([k[0] - h, k[1]])) / (2.0 * h),
            (m.evaluate([k[0], k[1] + h]) - m.evaluate([k[0], k[1] - h])) / (2.0 * h),
        ];
        let scale = g[0].hypot(g[1]).max(1e-3);
        for i in 0..2 {
            prop_assert!((g[i] - fd[i]).abs() / scale < 1e-6, "{g:?} vs {fd:?}");
        }
    }

    #[test]
    fn hessian_is_symmetric(m in hubbard(), k in [-3.0..3.0f64, -3.0..3.0f64]) {
        let hm = m.hessian(k);
        prop_assert_eq!(hm[0][1], hm[1][0]);
    }

    #[test]
    fn hubbard_is_even_and_exchange_symmetric(m in hubbard(), k in [-3.0..3.0f64, -3.0..3.0f64]) {
        let e = m.evaluate(k);
        prop_assert!((e - m.evaluate([k[1], k[0]])).abs() < 1e-14);
        prop_assert!((e - m.evaluate([-k[0], -k[1]])).abs() < 1e-14);
    }

    #[test]
    fn fermi_is_particle_hole_symmetric(s in state(), e in -50.0..50.0f64) {
        prop_assert!((fermi(s, e) + fermi(s, -e) - 1.0).abs() <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn bose_fermi_product_matches_definition(beta in 0.1..50.0f64, e2 in -2.0..2.0f64, gap in 1e-3..2.0f64) {
        let s = ThermalState::finite(beta).unwrap();
        let e3 = e2 + gap;
        let direct = bose(s, e2 - e3).unwrap() * (fermi(s, e2) - fermi(s, e3));
        prop_assert!((direct - bose_fermi_product(s, e2, e3)).abs() < 1e-12);
    }

    #[test]
    fn kernel_is_bounded_and_conjugate_odd(
        s in state(),
        e in [-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64],
        q0 in 1e-4..2.0f64,
    ) {
        let k = sigma2_kernel(s, e[0], e[1], e[2], q0).unwrap();
        prop_assert!(k.norm() <= 2.0 / q0 * (1.0 + 1e-15));
        prop_assert_eq!(sigma2_kernel(s, e[0], e[1], e[2], -q0).unwrap(), k.conj());
    }

    #[test]
    fn orthant_rows_match_signed_formula(p in unit4(), n in 1usize..=16) {
        let t = OrthantTerm::new(n).unwrap();
        let direct = epsilon_signed(&t.signed_point(&p));
        prop_assert!((t.epsilon(&p) - direct).abs() <= 1e-14);
    }

    #[test]
    fn orthant_exchange(p in unit4()) {
        let (t1, t2) = (OrthantTerm::new(1).unwrap(), OrthantTerm::new(2).unwrap());
        let s = [p[1], p[0], p[3], p[2]];
        prop_assert_eq!(t2.epsilon(&s), t1.epsilon(&p));
        prop_assert_eq!(t2.rho(&s), t1.rho(&p));
    }

    #[test]
    fn orthant_reflection(p in unit4(), n in 1usize..=8) {
        let (a, b) = (OrthantTerm::new(n).unwrap(), OrthantTerm::new(n + 8).unwrap());
        prop_assert_eq!(a.epsilon(&p), b.epsilon(&p));
        prop_assert_eq!(a.d(&p).map(|d| -d), b.d(&p));
        prop_assert_eq!(a.f(&p), b.f(&p));
        prop_assert_eq!(a.rho(&p), b.rho(&p));
    }

    #[test]
    fn orthant_one_three(p in unit4()) {
        let t = |n| OrthantTerm::new(n).unwrap();
        prop_assert!((t(3).epsilon(&p) + t(1).epsilon(&p)).abs() <= 1e-14);
        prop_assert!((t(4).epsilon(&p) + t(2).epsilon(&p)).abs() <= 1e-14);
    }

    #[test]
    fn fit_ignores_sample_order(
        coef in [-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64],
        noise in prop::collection::vec(-0.1..0.1f64, 9),
        perm in Just((0..9).collect::<Vec<usize>>()).prop_shuffle(),
    ) {
        let xs = vanhove::fitlab::geometric_grid(1e-6, 1e-2, 9);
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .zip(&noise)
            .map(|(&x, r)| (x, coef[0] * x.ln().powi(2) + coef[1] * x.ln() + coef[2] + r))
            .collect();
        let shuffled: Vec<_> = perm.iter().map(|&i| pts[i]).collect();
        prop_assert_eq!(fit_log_square(&pts).unwrap(), fit_log_square(&shuffled).unwrap());
    }

    #[test]
    fn predicted_point_leaves_exact_fit_unchanged(coef in [-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64], extra in 1e-7..1.0f64) {
        let model = |x: f64| coef[0] * x.ln().powi(2) + coef[1] * x.ln() + coef[2];
        let mut pts: Vec<_> = vanhove::fitlab::geometric_grid(1e-6, 1e-2, 9).into_iter().map(|x| (x, model(x))).collect();
        let f = fit_log_square(&pts).unwrap();
        pts.push((extra, f.predict(extra)));
        let g = fit_log_square(&pts).unwrap();
        prop_assert!((f.a - g.a).abs() < 1e-10 && (f.b - g.b).abs() < 1e-10 && (f.c - g.c).abs() < 1e-10);
    }

    #[test]
    fn bounded_remainder_moves_a_by_at_most_kappa(
        coef in [-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64],
        r in prop::collection::vec(-1.0..1.0f64, 9),
        bound in 1e-3..1.0f64,
    ) {
        let pts: Vec<_> = vanhove::fitlab::geometric_grid(1e-6, 1e-2, 9)
            .into_iter()
            .zip(&r)
            .map(|(x, r)| (x, coef[0] * x.ln().powi(2) + coef[1] * x.ln() + coef[2] + bound * r))
            .collect();
        let f = fit_log_square(&pts).unwrap();
        prop_assert!((f.a - coef[0]).abs() <= bound * f.kappa_a * (1.0 + 1e-9) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn halving_tolerance_stays_within_error_bars(
        a in [-1.0..1.0f64, -1.0..1.0f64],
        w in 0.5..6.0f64,
        q0 in 1e-3..0.5f64,
    ) {
        // peaked along the line x + y = 1, as the self-energy integrands are
        let f = move |p: &[f64]| {
            let e = p[0] + p[1] - 1.0;
            Complex64::new(e, q0).inv() * (a[0] * p[0] + a[1] * (w * p[1]).cos())
        };
        let coarse = integrate(&FnIntegrand(f), &Region::unit(2), &QuadSpec::new(1e-6, 1e-6, 2_000_000)).unwrap();
        let fine = integrate(&FnIntegrand(f), &Region::unit(2), &QuadSpec::new(5e-7, 5e-7, 2_000_000)).unwrap();
        prop_assert!((coarse.value - fine.value).norm() <= coarse.error_estimate + fine.error_estimate);
    }
}
