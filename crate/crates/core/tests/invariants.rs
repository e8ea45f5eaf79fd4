use proptest::prelude::*;
use toflab::abk::{pi_ab, Line1DPacket};
use toflab::bohmian::{arrival_time_of, guiding_velocity, helix_at, p_infinity_exact, pi_bm_cdf, velocity};
use toflab::flux::{current, current_density, pi_qf, pi_qf_closed, SurfacePatch};
use toflab::standard::{pi_std_magnetic, StdConfig, StdMethod};
use toflab::states::{Cylindrical, FieldMode};
use toflab::{Arrival, GaugeGeometry, WavePacketSpec};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn qf_plane_integral_matches_closed_form(l in 0.2f64..30.0, x in 0.05f64..4.0, eta in -2.0f64..2.0) {
        let tau = x * l;
        let v = pi_qf(&WavePacketSpec::magnetic_gaussian(eta), &SurfacePatch::plane(l), tau).unwrap();
        let c = pi_qf_closed(l, tau);
        prop_assert!(v >= 0.0);
        prop_assert!(rel(v, c) < 1e-8, "{v} vs {c}");
    }

    #[test]
    fn bm_cdf_is_monotone_and_completes(l in 0.0f64..5.0, a in 0.0f64..50.0, b in 0.0f64..50.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(pi_bm_cdf(l, lo) <= pi_bm_cdf(l, hi) + 1e-16);
        prop_assert!((pi_bm_cdf(l, 1e15) + p_infinity_exact(l) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn helix_reaches_detector_at_its_arrival_time(r in 0.0f64..3.0, phi in -3.0f64..3.0, z0 in 0.01f64..3.0, l in 0.0f64..50.0) {
        let x0 = Cylindrical { r, phi, z: z0 };
        match arrival_time_of(z0, l) {
            Arrival::At(t) => {
                let x = helix_at(x0, t, FieldMode::Uniform);
                prop_assert!((x.z - l).abs() <= 1e-9 * l.max(1.0));
                prop_assert_eq!(x.r, r);
            }
            Arrival::Never => prop_assert!(z0 > l),
        }
    }

    #[test]
    fn std_closed_form_agrees_with_quadrature(eta in -1.5f64..1.5, l in 0.5f64..5.0, tau in 0.0f64..20.0) {
        let g = GaugeGeometry::magnetic(eta, l);
        let a = pi_std_magnetic(&StdConfig::new(g, vec![]).with_method(StdMethod::ClosedForm), tau).unwrap();
        let b = pi_std_magnetic(&StdConfig::new(g, vec![]).with_method(StdMethod::DirectQuadrature), tau).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-8 * a.max(1e-12), "{a} vs {b}");
    }

    #[test]
    fn ab_density_is_galilean_invariant(p in -2.0f64..2.0, s in 0.3f64..1.5, l in -5.0f64..5.0, shift in -4.0f64..4.0, tau in -10.0f64..10.0) {
        let base = Line1DPacket::gaussian(p, s, l).unwrap();
        let moved = base.translated(shift).with_l(l + shift);
        let (a, b) = (pi_ab(&base, tau).unwrap(), pi_ab(&moved, tau).unwrap());
        prop_assert!((a - b).abs() <= 1e-10 * a.max(1e-6));
    }

    #[test]
    fn current_and_velocity_do_not_depend_on_gauge(
        x in -3.0f64..3.0, y in -3.0f64..3.0, z in -3.0f64..3.0, t in 0.0f64..10.0, eta in -3.0f64..3.0
    ) {
        let p = [x, y, z];
        let a = GaugeGeometry::magnetic(eta, 1.0).vector_potential();
        let s0 = WavePacketSpec::magnetic_gaussian(0.0).evolved(t);
        let s1 = WavePacketSpec::magnetic_gaussian(eta).evolved(t);
        let (j0, j1) = (current(&s0, p).unwrap(), current_density(&s1, &a, p).unwrap());
        let (v0, v1) = (velocity(&s0, p).unwrap(), guiding_velocity(&s1, &a, p).unwrap());
        for k in 0..3 {
            prop_assert!((j0[k] - j1[k]).abs() < 1e-12);
            prop_assert!((v0[k] - v1[k]).abs() < 1e-10 * (1.0 + v0[k].abs()));
        }
    }
}
