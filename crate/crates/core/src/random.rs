//! Seeded sampling of group elements, algebra elements and points.
//!
//! All randomized checks in the crate draw from [`rng`], a ChaCha8 stream,
//! so the same seed reproduces the same samples on every platform.

use nalgebra::{Quaternion, UnitQuaternion, Vector3, Vector4};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::actions::{Point, PointKind, SlamState};
use crate::lie::{exp, AlgebraElement, GroupElement, GroupKind};
use crate::Real;

pub const DEFAULT_SEED: u64 = 42;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform<T: Real>(r: &mut SampleRng, half_width: f64) -> T {
    T::lit(r.random_range(-half_width..=half_width))
}

pub fn random_vector3<T: Real>(r: &mut SampleRng, half_width: f64) -> Vector3<T> {
    Vector3::new(uniform(r, half_width), uniform(r, half_width), uniform(r, half_width))
}

pub fn random_unit_vector<T: Real>(r: &mut SampleRng) -> Vector3<T> {
    loop {
        let v: Vector3<f64> = random_vector3(r, 1.0);
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            let u = v / n;
            return Vector3::new(T::lit(u.x), T::lit(u.y), T::lit(u.z));
        }
    }
}

/// Haar-uniform rotation (Shoemake's subgroup algorithm).
pub fn random_so3<T: Real>(r: &mut SampleRng) -> GroupElement<T> {
    let (u1, u2, u3): (f64, f64, f64) = (r.random(), r.random(), r.random());
    let tau = std::f64::consts::TAU;
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let q = Quaternion::new(
        b * (tau * u3).cos(),
        a * (tau * u2).sin(),
        a * (tau * u2).cos(),
        b * (tau * u3).sin(),
    );
    let m = UnitQuaternion::from_quaternion(q).to_rotation_matrix().into_inner();
    GroupElement::from_parts_unchecked(GroupKind::So3, m.map(T::lit), Vector3::zeros())
}

/// Uniform rotation with translation uniform in `[-t, t]³`.
pub fn random_se3<T: Real>(r: &mut SampleRng, translation_half_width: f64) -> GroupElement<T> {
    let rot = random_so3::<T>(r);
    let t = random_vector3(r, translation_half_width);
    GroupElement::from_parts_unchecked(GroupKind::Se3, *rot.rotation(), t)
}

pub fn random_group<T: Real>(r: &mut SampleRng, kind: GroupKind) -> GroupElement<T> {
    match kind {
        GroupKind::So3 => random_so3(r),
        GroupKind::Se3 => random_se3(r, 1.0),
    }
}

/// Coordinates uniform in `[-s, s]`.
pub fn random_algebra<T: Real>(r: &mut SampleRng, kind: GroupKind, half_width: f64) -> AlgebraElement<T> {
    let c: Vec<T> = (0..kind.dim()).map(|_| uniform(r, half_width)).collect();
    AlgebraElement::from_coords(&c).expect("length matches kind")
}

/// Rotation by exactly `angle` about a uniformly drawn axis.
pub fn random_rotation_with_angle<T: Real>(r: &mut SampleRng, angle: T) -> GroupElement<T> {
    let axis = random_unit_vector::<T>(r);
    exp(&AlgebraElement::so3(axis * angle))
}

pub fn random_landmark<T: Real>(r: &mut SampleRng, half_width: f64) -> Vector4<T> {
    random_vector3::<T>(r, half_width).push(T::one())
}

/// A point of the given kind with coordinates of order one.
pub fn random_point<T: Real>(r: &mut SampleRng, kind: PointKind) -> Point<T> {
    match kind {
        PointKind::R3 => loop {
            let v = random_vector3::<T>(r, 2.0);
            if v.norm() > T::lit(0.1) {
                return Point::R3(v);
            }
        },
        PointKind::S2 => Point::S2(random_unit_vector(r)),
        PointKind::Directions(n) => Point::Directions((0..n).map(|_| random_unit_vector(r)).collect()),
        PointKind::Group(kind) => Point::Group(random_group(r, kind)),
        PointKind::Landmarks(n) => Point::Landmarks((0..n).map(|_| random_landmark(r, 1.0)).collect()),
        PointKind::Slam(n) => {
            let pose = random_se3(r, 1.0);
            let landmarks = (0..n).map(|_| random_landmark(r, 2.0)).collect();
            Point::Slam(SlamState::from_homogeneous(pose, landmarks).expect("valid sample"))
        }
    }
}
