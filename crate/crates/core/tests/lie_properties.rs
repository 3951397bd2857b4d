use bundleobs::actions::Handedness;
use bundleobs::actions::{check_action_laws, check_generator_equivariance, RigidAction, RotationAction, SlamAction};
use bundleobs::bundle::{check_cross_section, registered_sections};
use bundleobs::lie::{adjoint, bracket, exp, log, AlgebraElement, GroupElement, GroupKind};
use nalgebra::Vector3;
use proptest::prelude::*;

fn vec3(bound: f64) -> impl Strategy<Value = Vector3<f64>> {
    prop::array::uniform3(-bound..bound).prop_map(|[x, y, z]| Vector3::new(x, y, z))
}

/// Rotation vectors of norm at most `π − 0.1`.
fn rotvec() -> impl Strategy<Value = Vector3<f64>> {
    (vec3(1.0), 0.0..(std::f64::consts::PI - 0.1))
        .prop_filter_map("nonzero axis", |(v, a)| (v.norm() > 1e-3).then(|| v.normalize() * a))
}

fn se3() -> impl Strategy<Value = AlgebraElement<f64>> {
    (vec3(3.0), rotvec()).prop_map(|(l, w)| AlgebraElement::se3(l, w))
}

fn group() -> impl Strategy<Value = GroupElement<f64>> {
    se3().prop_map(|z| exp(&z))
}

proptest! {
    #[test]
    fn so3_log_inverts_exp(w in rotvec()) {
        let z = AlgebraElement::so3(w);
        prop_assert!((log(&exp(&z)).unwrap() - z).norm() < 1e-9);
    }

    #[test]
    fn se3_log_inverts_exp(z in se3()) {
        prop_assert!((log(&exp(&z)).unwrap() - z).norm() < 1e-9);
    }

    #[test]
    fn one_parameter_subgroups(z in se3(), s in -1.0..1.0f64, t in -1.0..1.0f64) {
        let lhs = exp(&z.scale(s + t));
        let rhs = &exp(&z.scale(s)) * &exp(&z.scale(t));
        prop_assert!(lhs.distance(&rhs) < 1e-9);
    }

    #[test]
    fn adjoint_is_conjugation(g in group(), z in se3()) {
        let lhs = exp(&adjoint(&g, &z).unwrap());
        let rhs = &(&g * &exp(&z)) * &g.inverse();
        prop_assert!(lhs.distance(&rhs) < 1e-9);
    }

    #[test]
    fn adjoint_preserves_brackets(g in group(), a in se3(), b in se3()) {
        let lhs = adjoint(&g, &bracket(&a, &b).unwrap()).unwrap();
        let rhs = bracket(&adjoint(&g, &a).unwrap(), &adjoint(&g, &b).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-8);
    }

    #[test]
    fn adjoint_is_a_homomorphism(g in group(), h in group(), z in se3()) {
        let lhs = adjoint(&(&g * &h), &z).unwrap();
        let rhs = adjoint(&g, &adjoint(&h, &z).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-9);
    }

    #[test]
    fn bracket_matches_matrix_commutator(a in se3(), b in se3()) {
        let c = bracket(&a, &b).unwrap();
        let commutator = a.hat4() * b.hat4() - b.hat4() * a.hat4();
        prop_assert!((c.hat4() - commutator).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn actions_satisfy_laws_and_generator_equivariance(seed in any::<u64>()) {
        let actions: Vec<Box<dyn bundleobs::actions::GroupAction<f64>>> = vec![
            Box::new(RotationAction::on_r3()),
            Box::new(RigidAction::new(Handedness::Left, 4)),
            Box::new(SlamAction::new(4)),
        ];
        for a in &actions {
            let (ident, comp) = check_action_laws(a.as_ref(), 10, seed).unwrap();
            prop_assert!(ident.max(comp) < 1e-10);
            prop_assert!(check_generator_equivariance(a.as_ref(), 10, seed).unwrap() < 1e-8);
        }
    }

    #[test]
    fn base_coordinates_are_orbit_invariant(seed in any::<u64>()) {
        for (_, sec) in registered_sections::<f64>(4) {
            let res = check_cross_section(sec.as_ref(), 10, seed).unwrap();
            prop_assert!(res.orbit_invariance < 1e-10, "{}: {:?}", sec.name(), res);
            prop_assert!(res.max() < 1e-10, "{}: {:?}", sec.name(), res);
        }
    }
}

#[test]
fn exp_of_zero_is_identity() {
    for kind in [GroupKind::So3, GroupKind::Se3] {
        assert_eq!(exp(&AlgebraElement::<f64>::zero(kind)), GroupElement::identity(kind));
    }
}
