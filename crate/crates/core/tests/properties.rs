use assoc_lame::bloch::{bloch_pair, Sign};
use assoc_lame::elliptic::{jacobi, lattice_from_modulus, wp, wsigma, wzeta};
use assoc_lame::frobenius::{f_triplet, shift_energy, ModelParams};
use assoc_lame::numeric::linspace;
use assoc_lame::susy::{susy1_defect, susy1_periodic};
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn close(a: C, b: C, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobi_squares(k2 in 0.01..0.99f64, re in -8.0..8.0f64, im in -0.8..0.8f64) {
        let lat = lattice_from_modulus(k2).unwrap();
        let j = jacobi(C::new(re, im * lat.Kprime()), k2).unwrap();
        prop_assert!(close(j.sn * j.sn + j.cn * j.cn, C::new(1.0, 0.0), 1e-11));
        prop_assert!(close(j.dn * j.dn + k2 * j.sn * j.sn, C::new(1.0, 0.0), 1e-11));
    }

    #[test]
    fn wp_is_even_and_doubly_periodic(k2 in 0.05..0.95f64, s in 0.05..0.95f64, t in 0.05..0.95f64) {
        let lat = lattice_from_modulus(k2).unwrap();
        let z = 2.0 * (s * lat.omega1() + t * lat.omega3());
        let v = wp(z, &lat).unwrap();
        prop_assert!(close(wp(-z, &lat).unwrap(), v, 1e-11));
        prop_assert!(close(wp(z + 2.0 * lat.omega1(), &lat).unwrap(), v, 1e-10));
        prop_assert!(close(wp(z + 2.0 * lat.omega3(), &lat).unwrap(), v, 1e-10));
    }

    #[test]
    fn zeta_and_sigma_are_odd(k2 in 0.05..0.95f64, s in 0.05..0.95f64, t in 0.05..0.95f64) {
        let lat = lattice_from_modulus(k2).unwrap();
        let z = 2.0 * (s * lat.omega1() + t * lat.omega3());
        prop_assert!(close(wzeta(-z, &lat).unwrap(), -wzeta(z, &lat).unwrap(), 1e-11));
        prop_assert!(close(wsigma(-z, &lat).unwrap(), -wsigma(z, &lat).unwrap(), 1e-11));
    }

    #[test]
    fn f_reflection_symmetries(
        m in 1u32..7,
        frac in 0.0..1.0f64,
        k2 in 0.05..0.95f64,
        e in -20.0..40.0f64,
        nu in -3i64..8,
    ) {
        let l = ((m as f64 + 1.0) * frac).floor().min(m as f64) as u32;
        let p = ModelParams::new(m, l, k2).unwrap();
        let lat = lattice_from_modulus(k2).unwrap();
        let et = shift_energy(C::new(e, 0.0), &p, &lat);
        let f = |r: i64| f_triplet(r, &p, et, &lat);
        let l2 = 2 * l as i64;
        let scale = 1.0 + f(nu).1.norm() + f(nu + 1).0.norm() + f(nu).2.norm();
        prop_assert!((f(l2 - nu).0 + f(nu + 1).0).norm() <= 1e-12 * scale);
        prop_assert!((f(l2 - nu).1 + f(nu).1).norm() <= 1e-12 * scale);
        prop_assert!((f(l2 - nu - 1).2 + f(nu).2).norm() <= 1e-12 * scale);
    }

    #[test]
    fn linspace_is_uniform(a in -50.0..50.0f64, w in 0.1..100.0f64, n in 2usize..3000) {
        let xs = linspace(a, a + w, n);
        prop_assert_eq!(xs.len(), n);
        let h = w / (n - 1) as f64;
        for (i, x) in xs.iter().enumerate() {
            prop_assert!((x - (a + h * i as f64)).abs() <= 1e-12 * (1.0 + x.abs()));
        }
        prop_assert!(xs.windows(2).all(|p| p[1] > p[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn bloch_parity_and_quasi_periodicity(e in -3.0..25.0f64, x in -10.0..10.0f64) {
        let p = ModelParams::new(3, 1, 0.95).unwrap();
        let lat = lattice_from_modulus(0.95).unwrap();
        // stay clear of the band edges, where the pair degenerates
        let edges = [4.79991, 4.8, 9.55, 9.574059, 11.705933, 12.375618, 13.944156, 14.225941];
        prop_assume!(edges.iter().all(|b| (e - b).abs() > 1e-2));
        let pair = bloch_pair(&p, e, &lat).unwrap();
        let a = pair.ln_psi(x, Sign::Minus).unwrap();
        let b = pair.ln_psi(-x, Sign::Plus).unwrap();
        prop_assert!(((a - b).exp() - 1.0).norm() < 1e-9);
        let t = pair.period();
        let step = pair.ln_psi(x + t, Sign::Plus).unwrap() - pair.ln_psi(x, Sign::Plus).unwrap();
        prop_assert!(close(step.exp(), pair.multiplier(), 1e-9));
    }

    #[test]
    fn first_order_partners_are_finite(x in -40.0..40.0f64, lambda in 0.05..20.0f64) {
        let p = ModelParams::new(3, 1, 0.95).unwrap();
        let lat = lattice_from_modulus(0.95).unwrap();
        let f = susy1_defect(&p, 4.75, lambda, &lat).unwrap();
        let g = susy1_periodic(&p, 4.75, Sign::Plus, &lat).unwrap();
        prop_assert!(f.eval(x).unwrap().is_finite());
        prop_assert!(g.eval(x).unwrap().is_finite());
    }
}
