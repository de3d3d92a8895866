use proptest::prelude::*;
use softimpact::{jacobi_transform, JacobiSetup, PhaseState, WedgeModel};

fn central(f: impl Fn(&[f64]) -> f64, q: &[f64], h: f64) -> Vec<f64> {
    (0..q.len())
        .map(|i| {
            let (mut a, mut b) = (q.to_vec(), q.to_vec());
            a[i] += h;
            b[i] -= h;
            (f(&a) - f(&b)) / (2.0 * h)
        })
        .collect()
}

fn close(a: &[f64], b: &[f64], rel: f64) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (x - y).abs() <= rel * x.abs().max(y.abs()).max(1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn background_gradient_matches_differences(u1 in 0.5f64..12.0, f in -0.95f64..0.95) {
        let m = WedgeModel::reference();
        let q = [u1, f * u1 * (m.beta / 2.0).tan()];
        let (_, g) = m.background_potential(&q).unwrap();
        let fd = central(|x| m.background_potential(x).unwrap().0, &q, 1e-6);
        prop_assert!(close(&g, &fd, 1e-5), "{g:?} {fd:?}");
    }

    #[test]
    fn wall_gradient_matches_differences(u1 in 0.5f64..12.0, f in -0.95f64..0.95, eps in 0.05f64..0.5) {
        let m = WedgeModel::reference().with_epsilon(eps);
        let q = [u1, f * u1 * (m.beta / 2.0).tan()];
        let (_, g) = m.wall_potential(&q).unwrap();
        let fd = central(|x| m.wall_potential(x).unwrap().0, &q, 1e-6 * eps);
        prop_assert!(close(&g, &fd, 1e-5), "{g:?} {fd:?}");
    }

    #[test]
    fn coupled_gradient_matches_differences(u1 in 1.0f64..12.0, f in -0.9f64..0.9, u3 in -1.0f64..1.0, delta in 0.0f64..0.5) {
        let m = WedgeModel::reference().with_oscillator(3f64.sqrt(), 0.0, delta);
        let q = [u1, f * u1 * (m.beta / 2.0).tan(), u3];
        let (_, g) = m.background_potential(&q).unwrap();
        let fd = central(|x| m.background_potential(x).unwrap().0, &q, 1e-6);
        prop_assert!(close(&g, &fd, 1e-5), "{g:?} {fd:?}");
    }

    #[test]
    fn v20_from_energy_round_trips(u1 in 3.0f64..12.0, v1 in -2.0f64..2.0, v2 in 0.1f64..8.0) {
        let m = WedgeModel::reference();
        let h = m.total_energy(&PhaseState::planar(u1, 0.0, v1, v2)).unwrap();
        let back = m.v20_from_energy(h, u1, v1, 0.0).unwrap();
        prop_assert!((back - v2).abs() < 1e-9 * v2.max(1.0));
    }

    #[test]
    fn jacobi_transform_is_linear(r1 in 0.5f64..5.0, r2 in 0.5f64..5.0, ma in 0.5f64..20.0, mb in 0.5f64..20.0, mc in 0.5f64..20.0) {
        let s = JacobiSetup::new(ma, mb, mc).unwrap();
        let a = jacobi_transform(r1, r2, &s).unwrap();
        let b = jacobi_transform(2.0 * r1, 2.0 * r2, &s).unwrap();
        prop_assert!((b.0 - 2.0 * a.0).abs() < 1e-12 * b.0.abs().max(1.0));
        prop_assert!((b.1 - 2.0 * a.1).abs() < 1e-12 * b.1.abs().max(1.0));
        prop_assert!(s.beta > 0.0 && s.beta < std::f64::consts::FRAC_PI_2);
    }
}

#[test]
fn energy_is_even_in_u2_for_the_symmetric_model() {
    let m = WedgeModel::reference().with_epsilon(0.1);
    let a = m
        .total_energy(&PhaseState::planar(7.0, 1.3, 0.2, 0.4))
        .unwrap();
    let b = m
        .total_energy(&PhaseState::planar(7.0, -1.3, 0.2, -0.4))
        .unwrap();
    assert!((a - b).abs() < 1e-12);
}
