//! Worked systems: attitude from two inertial directions, kinematics on
//! `R³ \ {0}` split along the sphere bundle, and SLAM.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix4, Vector3, Vector4};

use crate::actions::{
    check_equivariance_output, check_equivariance_vf, GroupTranslation, Handedness, Point, PointKind, RigidAction,
    RotationAction, SlamAction, SlamState, TrivialAction,
};
use crate::bundle::{givens_section, reduce_system, BaseCoordinate, CrossSection, SphereSection};
use crate::integrate::{integrate_with, IntegratorConfig, Rates, Side, State};
use crate::lie::{project_to_group, skew, AlgebraElement, GroupElement, GroupKind, Metric};
use crate::observer::{Observed, ObserverProblem};
use crate::random::{random_algebra, random_landmark, random_vector3, rng, SampleRng};
use crate::{Error, Real, Result};

fn expect_directions<'a, T: Real>(p: &'a Point<T>, n: usize, what: &str) -> Result<&'a [Vector3<T>]> {
    match p {
        Point::Directions(d) if d.len() == n => Ok(d),
        other => Err(Error::PointKind {
            action: what.into(),
            got: other.kind().to_string(),
        }),
    }
}

fn expect_landmarks<'a, T: Real>(p: &'a Point<T>, what: &str) -> Result<&'a [Vector4<T>]> {
    match p {
        Point::Landmarks(l) => Ok(l),
        other => Err(Error::PointKind {
            action: what.into(),
            got: other.kind().to_string(),
        }),
    }
}

fn expect_so3<T: Real>(p: &Point<T>) -> Result<&GroupElement<T>> {
    match p {
        Point::Group(g) if g.kind() == GroupKind::So3 => Ok(g),
        other => Err(Error::PointKind {
            action: "attitude".into(),
            got: other.kind().to_string(),
        }),
    }
}

// ---------------------------------------------------------------------------
// Attitude

/// Inertial reference directions `(e₂, e₃)`.
pub fn attitude_reference<T: Real>() -> Point<T> {
    Point::Directions(vec![Vector3::y(), Vector3::z()])
}

/// `y = (Rᵀe₂, Rᵀe₃)`.
pub fn attitude_output<T: Real>(rotation: &GroupElement<T>) -> Result<Point<T>> {
    if rotation.kind() != GroupKind::So3 {
        return Err(Error::KindMismatch {
            expected: GroupKind::So3,
            got: rotation.kind(),
        });
    }
    let rt = rotation.rotation().transpose();
    Ok(Point::Directions(vec![rt * Vector3::y(), rt * Vector3::z()]))
}

/// `Ṙ = R Ω̂` in the ambient (column-major) layout.
pub fn attitude_vector_field<T: Real>(p: &Point<T>, omega: &Vector3<T>) -> Result<DVector<T>> {
    let r = expect_so3(p)?;
    let m = r.rotation() * skew(omega);
    Ok(DVector::from_column_slice(m.as_slice()))
}

/// Right translation `R ↦ R g`, under which the attitude system is equivariant.
pub fn attitude_state_action() -> GroupTranslation {
    GroupTranslation::new(GroupKind::So3, Handedness::Right)
}

/// Input action matching [`attitude_state_action`]: `Ω ↦ gᵀ Ω`.
pub fn attitude_input_action<T: Real>(g: &GroupElement<T>, omega: &Vector3<T>) -> Vector3<T> {
    g.rotation().transpose() * omega
}

/// `V^y(y, ỹ) = ‖y₂ − ỹ₂‖² + ‖y₃ − ỹ₃‖²`.
pub fn attitude_cost<T: Real>(y: &Point<T>, y_est: &Point<T>) -> Result<T> {
    let a = expect_directions(y, 2, "attitude-cost")?;
    let b = expect_directions(y_est, 2, "attitude-cost")?;
    Ok(a.iter()
        .zip(b)
        .map(|(u, v)| (u - v).norm_squared())
        .fold(T::zero(), |s, x| s + x))
}

/// `ζ_e = Σ_k −2 ê_k R̃ y_k`.
pub fn attitude_zeta_e<T: Real>(estimate: &GroupElement<T>, y: &Point<T>) -> Result<AlgebraElement<T>> {
    let d = expect_directions(y, 2, "attitude-gradient")?;
    let e = [Vector3::y(), Vector3::z()];
    let two = T::lit(2.0);
    let sum = e.iter().zip(d).fold(Vector3::zeros(), |acc, (ek, yk)| {
        acc - ek.cross(&(estimate.rotation() * yk)) * two
    });
    Ok(AlgebraElement::so3(sum))
}

/// Left observed attitude problem with the closed-form gradient registered.
pub fn attitude_problem<T: Real>() -> Result<ObserverProblem<T>> {
    let action = RotationAction::new(Handedness::Left, PointKind::Directions(2))?;
    Ok(ObserverProblem::new(
        Observed::Left,
        Arc::new(action),
        attitude_reference(),
        Arc::new(attitude_cost),
        Metric::default(),
    )?
    .with_gradient(Arc::new(attitude_zeta_e)))
}

/// Same design with the numeric gradient only.
pub fn attitude_problem_numeric<T: Real>() -> Result<ObserverProblem<T>> {
    let action = RotationAction::new(Handedness::Left, PointKind::Directions(2))?;
    ObserverProblem::new(
        Observed::Left,
        Arc::new(action),
        attitude_reference(),
        Arc::new(attitude_cost),
        Metric::default(),
    )
}

/// Body rate `(sin t, cos 2t, 0.5)`.
pub fn attitude_test_rate<T: Real>(t: T) -> AlgebraElement<T> {
    AlgebraElement::so3(Vector3::new(t.sin(), (t + t).cos(), T::lit(0.5)))
}

/// `(vector field residual, output residual)` of the attitude system.
pub fn attitude_equivariance<T: Real>(samples: usize, seed: u64) -> Result<(T, T)> {
    let state = attitude_state_action();
    let vf = check_equivariance_vf(
        attitude_vector_field,
        &state,
        attitude_input_action,
        |r: &mut SampleRng| random_vector3(r, 2.0),
        samples,
        seed,
    )?;
    let out_action = RotationAction::new(Handedness::Right, PointKind::Directions(2))?;
    let out = check_equivariance_output(
        |p: &Point<T>| attitude_output(expect_so3(p)?),
        &state,
        &out_action,
        samples,
        seed,
    )?;
    Ok((vf, out))
}

// ---------------------------------------------------------------------------
// Sphere bundle

/// Input of `q̇ = ω × q + a q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereInput<T: Real> {
    pub omega: Vector3<T>,
    pub radial: T,
}

pub fn sphere_vector_field<T: Real>(p: &Point<T>, u: &SphereInput<T>) -> Result<DVector<T>> {
    match p {
        Point::R3(q) => {
            let v = u.omega.cross(q) + q * u.radial;
            Ok(DVector::from_column_slice(v.as_slice()))
        }
        other => Err(Error::PointKind {
            action: "sphere-kinematics".into(),
            got: other.kind().to_string(),
        }),
    }
}

/// `(ω, a) ↦ (g ω, a)`.
pub fn sphere_input_action<T: Real>(g: &GroupElement<T>, u: &SphereInput<T>) -> SphereInput<T> {
    SphereInput {
        omega: g.rotation() * u.omega,
        radial: u.radial,
    }
}

/// Sampled record of [`sphere_demo`].
#[derive(Debug, Clone, PartialEq)]
pub struct SphereSample<T: Real> {
    pub t: T,
    /// Full state `q`.
    pub q: Vector3<T>,
    /// Base coordinate of the split system.
    pub radius: T,
    /// Fiber coordinate of the split system.
    pub frame: GroupElement<T>,
    /// `‖q − r R e₁‖`.
    pub reconstruction_error: T,
}

/// Integrates `q̇ = ω × q + a q` alongside its split `(ṙ, Ṙ)` along the
/// Givens section, the split driven at the section point with `ψ_{R⁻¹}u`.
pub fn sphere_demo<T: Real>(
    config: &IntegratorConfig<T>,
    q0: Vector3<T>,
    input: &dyn Fn(T) -> SphereInput<T>,
) -> Result<Vec<SphereSample<T>>> {
    let sec = SphereSection::new();
    let (r0, frame0) = givens_section(&q0)?;
    let mut vectors = DVector::zeros(4);
    vectors.rows_mut(0, 3).copy_from(&q0);
    vectors[3] = r0;
    let init = State::new(vec![(frame0, Side::Left)], vectors);
    let mut out = Vec::with_capacity(config.steps() + 1);
    integrate_with(
        |t, s| {
            let u = input(t);
            let q = Vector3::new(s.vectors[0], s.vectors[1], s.vectors[2]);
            let full = sphere_vector_field(&Point::R3(q), &u)?;
            let frame = &s.groups[0];
            let at_section = CrossSection::<T>::section(&sec, &BaseCoordinate::Radius(s.vectors[3]))?;
            let split = reduce_system(
                &sphere_vector_field,
                &sec,
                &at_section,
                &sphere_input_action(&frame.inverse(), &u),
            )?;
            let mut v = DVector::zeros(4);
            v.rows_mut(0, 3).copy_from(&full);
            v[3] = split.base_rate[0];
            Ok(Rates {
                groups: vec![split.fiber_rate],
                vectors: v,
            })
        },
        config,
        init,
        |t, s| {
            let q = Vector3::new(s.vectors[0], s.vectors[1], s.vectors[2]);
            let radius = s.vectors[3];
            let frame = s.groups[0].clone();
            let rebuilt = frame.rotation() * Vector3::x() * radius;
            out.push(SphereSample {
                t,
                q,
                radius,
                frame,
                reconstruction_error: (q - rebuilt).norm(),
            });
            Ok(())
        },
    )?;
    Ok(out)
}

/// Input used by the sphere demo: `ω = (cos t, 0.5, sin 2t)`, `a = 0.2 cos t`.
pub fn sphere_test_input<T: Real>(t: T) -> SphereInput<T> {
    SphereInput {
        omega: Vector3::new(t.cos(), T::lit(0.5), (t + t).sin()),
        radial: T::lit(0.2) * t.cos(),
    }
}

// ---------------------------------------------------------------------------
// SLAM

/// Body velocity `V` and body-frame landmark velocities `v̄ᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlamInput<T: Real> {
    pub velocity: AlgebraElement<T>,
    pub landmark_rates: Vec<Vector3<T>>,
}

impl<T: Real> SlamInput<T> {
    /// Static landmarks.
    pub fn rigid(velocity: AlgebraElement<T>, count: usize) -> Self {
        Self {
            velocity,
            landmark_rates: vec![Vector3::zeros(); count],
        }
    }

    pub fn random(r: &mut SampleRng, count: usize) -> Self {
        Self {
            velocity: random_algebra(r, GroupKind::Se3, 1.0),
            landmark_rates: (0..count).map(|_| random_vector3(r, 1.0)).collect(),
        }
    }
}

fn expect_slam<T: Real>(p: &Point<T>) -> Result<&SlamState<T>> {
    match p {
        Point::Slam(s) => Ok(s),
        other => Err(Error::PointKind {
            action: "slam".into(),
            got: other.kind().to_string(),
        }),
    }
}

/// `X(p, v) = (S V, S v̄₁, …, S v̄ₙ)`.
pub fn slam_vector_field<T: Real>(p: &Point<T>, u: &SlamInput<T>) -> Result<DVector<T>> {
    let s = expect_slam(p)?;
    if u.velocity.kind() != GroupKind::Se3 {
        return Err(Error::KindMismatch {
            expected: GroupKind::Se3,
            got: u.velocity.kind(),
        });
    }
    if u.landmark_rates.len() != s.len() {
        return Err(Error::SizeMismatch {
            left: s.len(),
            right: u.landmark_rates.len(),
        });
    }
    let pose = s.pose().to_homogeneous();
    let mut out = DVector::zeros(16 + 4 * s.len());
    out.rows_mut(0, 16)
        .copy_from_slice((pose * u.velocity.hat4()).as_slice());
    for (i, v) in u.landmark_rates.iter().enumerate() {
        out.fixed_rows_mut::<4>(16 + 4 * i)
            .copy_from(&(pose * v.push(T::zero())));
    }
    Ok(out)
}

/// Landmarks in the body frame, `y = (S⁻¹L̄₁, …)`.
pub fn slam_output<T: Real>(p: &Point<T>) -> Result<Point<T>> {
    Ok(Point::Landmarks(expect_slam(p)?.body_landmarks()))
}

/// `(S, S⁻¹L̄₁, …)`: the output augmented with the pose, injective on fibers.
pub fn slam_pose_output<T: Real>(p: &Point<T>) -> Result<Point<T>> {
    let s = expect_slam(p)?;
    Ok(Point::Slam(SlamState::from_homogeneous(
        s.pose().clone(),
        s.body_landmarks(),
    )?))
}

/// `(vector field residual, output residual)` of the SLAM system.
pub fn slam_equivariance<T: Real>(count: usize, samples: usize, seed: u64) -> Result<(T, T)> {
    let state = SlamAction::new(count);
    let vf = check_equivariance_vf(
        slam_vector_field,
        &state,
        crate::actions::identity_input,
        |r: &mut SampleRng| SlamInput::random(r, count),
        samples,
        seed,
    )?;
    let invariant = TrivialAction::new(GroupKind::Se3, PointKind::Landmarks(count), Handedness::Right);
    let out = check_equivariance_output(slam_output, &state, &invariant, samples, seed)?;
    Ok((vf, out))
}

/// `Σᵢ ‖l̄ᵢ − l̃ᵢ‖²`.
///
/// Invariant under a common rigid motion of both tuples, which is the
/// output action of [`slam_localization_problem`].
pub fn slam_landmark_cost<T: Real>(y: &Point<T>, y_est: &Point<T>) -> Result<T> {
    let a = expect_landmarks(y, "slam-cost")?;
    let b = expect_landmarks(y_est, "slam-cost")?;
    if a.len() != b.len() {
        return Err(Error::SizeMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b)
        .map(|(u, v)| (u - v).norm_squared())
        .fold(T::zero(), |s, x| s + x))
}

/// Left observed pose observer for a known map: `y = S⁻¹ L̄ᵢ`, cost
/// [`slam_landmark_cost`], numeric gradient.
pub fn slam_localization_problem<T: Real>(map: Vec<Vector4<T>>) -> Result<ObserverProblem<T>> {
    let n = map.len();
    ObserverProblem::new(
        Observed::Left,
        Arc::new(RigidAction::new(Handedness::Left, n)),
        Point::Landmarks(map),
        Arc::new(slam_landmark_cost),
        Metric::default(),
    )
}

/// Largest condition number accepted by [`slam_discrete_recover`].
pub const RECOVERY_CONDITION_LIMIT: f64 = 1e12;

/// Largest condition number of a landmark matrix drawn by [`sample_landmarks`].
pub const SAMPLING_CONDITION_LIMIT: f64 = 1e6;

/// The 4×N matrix of homogeneous landmark columns.
pub fn landmark_matrix<T: Real>(landmarks: &[Vector4<T>]) -> DMatrix<T> {
    DMatrix::from_iterator(4, landmarks.len(), landmarks.iter().flat_map(|l| l.iter().copied()))
}

fn condition<T: Real>(m: &DMatrix<T>) -> T {
    let sv = m.clone().svd(false, false).singular_values;
    let hi = sv.iter().copied().fold(T::zero(), T::max);
    let lo = sv.iter().copied().fold(T::max_value().unwrap(), T::min);
    if lo > T::zero() {
        hi / lo
    } else {
        T::max_value().unwrap()
    }
}

/// `S = M_k M_{k+1}ᵀ (M_{k+1} M_{k+1}ᵀ)⁻¹`, projected to SE(3).
///
/// Fails with a rank-deficiency error when `M_{k+1} M_{k+1}ᵀ` has condition
/// number at or above [`RECOVERY_CONDITION_LIMIT`], as happens for fewer than
/// four or coplanar landmarks.
pub fn slam_discrete_recover<T: Real>(m_k: &DMatrix<T>, m_next: &DMatrix<T>) -> Result<GroupElement<T>> {
    if m_k.nrows() != 4 || m_next.nrows() != 4 || m_k.ncols() != m_next.ncols() {
        return Err(Error::SizeMismatch {
            left: m_k.len(),
            right: m_next.len(),
        });
    }
    let gram = m_next * m_next.transpose();
    let cond = condition(&gram);
    if !(cond < T::lit(RECOVERY_CONDITION_LIMIT)) {
        return Err(Error::RankDeficiency {
            condition: cond.as_f64(),
        });
    }
    let inv = gram.try_inverse().ok_or(Error::RankDeficiency {
        condition: f64::INFINITY,
    })?;
    let s = m_k * m_next.transpose() * inv;
    project_to_group(&s, GroupKind::Se3)
}

/// `n` homogeneous landmarks in the cube `[0, 1]³`, redrawn until the
/// landmark matrix has condition number below [`SAMPLING_CONDITION_LIMIT`].
pub fn sample_landmarks<T: Real>(r: &mut SampleRng, n: usize) -> Result<Vec<Vector4<T>>> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "at least 4 landmarks are needed, got {n}"
        )));
    }
    let half = Vector3::repeat(T::lit(0.5));
    loop {
        let lms: Vec<Vector4<T>> = (0..n)
            .map(|_| {
                let l: Vector4<T> = random_landmark(r, 0.5);
                (l.xyz() + half).push(T::one())
            })
            .collect();
        if condition(&landmark_matrix(&lms)) < T::lit(SAMPLING_CONDITION_LIMIT) {
            return Ok(lms);
        }
    }
}

/// A noiseless discrete SLAM sequence: body poses `B_k` and the body-frame
/// landmark matrices `M_k = B_k⁻¹ L`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlamSequence<T: Real> {
    pub poses: Vec<GroupElement<T>>,
    pub landmarks: Vec<Vector4<T>>,
    pub observations: Vec<DMatrix<T>>,
}

impl<T: Real> SlamSequence<T> {
    /// Random walk of `steps + 1` poses with increments of size about `step`.
    pub fn synthetic(seed: u64, steps: usize, landmarks: usize, step: f64) -> Result<Self> {
        let mut r = rng(seed);
        let lms = sample_landmarks::<T>(&mut r, landmarks)?;
        let mut pose = crate::random::random_se3::<T>(&mut r, 1.0);
        let mut poses = vec![pose.clone()];
        for _ in 0..steps {
            pose = &pose * &crate::lie::exp(&random_algebra(&mut r, GroupKind::Se3, step));
            poses.push(pose.clone());
        }
        let l = landmark_matrix(&lms);
        let observations = poses
            .iter()
            .map(|b| DMatrix::from_column_slice(4, 4, b.inverse().to_homogeneous().as_slice()) * &l)
            .collect();
        Ok(Self {
            poses,
            landmarks: lms,
            observations,
        })
    }

    /// True relative motions `S^k = B_k⁻¹ B_{k+1}`.
    pub fn relative_poses(&self) -> Vec<GroupElement<T>> {
        self.poses.windows(2).map(|w| &w[0].inverse() * &w[1]).collect()
    }

    /// Relative motions recovered from consecutive observations.
    pub fn recover(&self) -> Result<Vec<GroupElement<T>>> {
        self.observations
            .windows(2)
            .map(|w| slam_discrete_recover(&w[0], &w[1]))
            .collect()
    }
}

/// `B_0 S^0 ⋯ S^{k−1}` for every `k`.
pub fn chain_poses<T: Real>(initial: &GroupElement<T>, relative: &[GroupElement<T>]) -> Vec<GroupElement<T>> {
    let mut out = Vec::with_capacity(relative.len() + 1);
    out.push(initial.clone());
    for s in relative {
        let next = out.last().expect("non-empty") * s;
        out.push(next);
    }
    out
}

/// Body velocity used by SLAM scenarios: `V = (0.3, 0.1 sin t, 0; 0.2 cos t, 0.1, 0.3)`.
pub fn slam_test_velocity<T: Real>(t: T) -> AlgebraElement<T> {
    AlgebraElement::se3(
        Vector3::new(T::lit(0.3), T::lit(0.1) * t.sin(), T::zero()),
        Vector3::new(T::lit(0.2) * t.cos(), T::lit(0.1), T::lit(0.3)),
    )
}

/// `d/dt S⁻¹` along `Ṡ = S V`, as a 4×4 matrix.
pub fn slam_inverse_pose_rate<T: Real>(pose: &GroupElement<T>, velocity: &AlgebraElement<T>) -> Matrix4<T> {
    -(velocity.hat4() * pose.inverse().to_homogeneous())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_point, random_se3, random_so3};

    #[test]
    fn attitude_cost_examples() {
        let id = GroupElement::<f64>::identity(GroupKind::So3);
        let y = attitude_output(&id).unwrap();
        assert_eq!(attitude_cost(&y, &y).unwrap(), 0.0);
        let half_turn = crate::lie::exp(&AlgebraElement::so3(Vector3::new(std::f64::consts::PI, 0.0, 0.0)));
        assert!((attitude_cost(&y, &attitude_output(&half_turn).unwrap()).unwrap() - 8.0).abs() < 1e-12);
        let mut r = rng(1);
        for _ in 0..20 {
            let (g, est) = (random_so3::<f64>(&mut r), random_so3(&mut r));
            let e = (&g * &est.inverse()).rotation().clone_owned();
            let direct =
                (Vector3::z() - e * Vector3::z()).norm_squared() + (Vector3::y() - e * Vector3::y()).norm_squared();
            let v = attitude_cost(&attitude_output(&g).unwrap(), &attitude_output(&est).unwrap()).unwrap();
            assert!((v - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn attitude_measurement_matches_output_action() {
        let prob = attitude_problem::<f64>().unwrap();
        let mut r = rng(2);
        for _ in 0..20 {
            let g = random_so3(&mut r);
            let a = attitude_output(&g).unwrap();
            assert!(a.distance(&prob.output_of(&g).unwrap()).unwrap() < 1e-12);
            let d = expect_directions(&a, 2, "test").unwrap();
            assert!((d[0].norm() - 1.0).abs() < 1e-12 && d[0].dot(&d[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn attitude_gradient_matches_numeric() {
        let prob = attitude_problem_numeric::<f64>().unwrap();
        let mut r = rng(3);
        let est: GroupElement<f64> = random_so3(&mut r);
        assert!(attitude_zeta_e(&est, &attitude_output(&est).unwrap()).unwrap().norm() < 1e-15);
        for _ in 0..100 {
            let (g, est) = (random_so3(&mut r), random_so3(&mut r));
            let y = attitude_output(&g).unwrap();
            let a = attitude_zeta_e(&est, &y).unwrap();
            let n = prob.zeta_e_numeric(&est, &y).unwrap();
            assert!((a - n).norm() < 1e-6);
        }
    }

    #[test]
    fn attitude_and_slam_are_equivariant() {
        let (vf, out) = attitude_equivariance::<f64>(100, 42).unwrap();
        assert!(vf <= 1e-12 && out <= 1e-12, "{vf} {out}");
        let (vf, out) = slam_equivariance::<f64>(4, 100, 42).unwrap();
        assert!(vf <= 1e-12 && out <= 1e-12, "{vf} {out}");
    }

    #[test]
    fn slam_vector_field_examples() {
        let mut r = rng(4);
        let p = random_point::<f64>(&mut r, PointKind::Slam(4));
        let zero = SlamInput::rigid(AlgebraElement::zero(GroupKind::Se3), 4);
        assert_eq!(slam_vector_field(&p, &zero).unwrap().norm(), 0.0);
        let wrong = SlamInput::rigid(AlgebraElement::zero(GroupKind::Se3), 3);
        assert!(slam_vector_field(&p, &wrong).is_err());
    }

    #[test]
    fn landmark_cost_examples() {
        let y: Point<f64> = Point::Landmarks(vec![Vector4::new(1.0, 2.0, 3.0, 1.0), Vector4::new(0.0, 0.0, 1.0, 1.0)]);
        assert_eq!(slam_landmark_cost(&y, &y).unwrap(), 0.0);
        let shifted = Point::Landmarks(vec![Vector4::new(2.0, 2.0, 3.0, 1.0), Vector4::new(0.0, 0.0, 1.0, 1.0)]);
        assert_eq!(slam_landmark_cost(&y, &shifted).unwrap(), 1.0);
        let short = Point::Landmarks(vec![Vector4::new(1.0, 2.0, 3.0, 1.0)]);
        assert!(matches!(
            slam_landmark_cost(&y, &short),
            Err(Error::SizeMismatch { .. })
        ));
        let mut r = rng(5);
        let a: Vec<Vector4<f64>> = (0..6).map(|_| random_landmark(&mut r, 2.0)).collect();
        let b: Vec<Vector4<f64>> = (0..6).map(|_| random_landmark(&mut r, 2.0)).collect();
        let mut brute = 0.0;
        for i in 0..6 {
            for j in 0..3 {
                brute += (a[i][j] - b[i][j]).powi(2);
            }
        }
        let v = slam_landmark_cost(&Point::Landmarks(a), &Point::Landmarks(b)).unwrap();
        assert!((v - brute).abs() < 1e-12);
    }

    #[test]
    fn discrete_recovery_examples() {
        let mut r = rng(6);
        let lms = sample_landmarks::<f64>(&mut r, 6).unwrap();
        let m = landmark_matrix(&lms);
        assert!(
            slam_discrete_recover(&m, &m)
                .unwrap()
                .distance(&GroupElement::identity(GroupKind::Se3))
                < 1e-12
        );
        let s = random_se3::<f64>(&mut r, 1.0);
        let m_k = DMatrix::from_column_slice(4, 4, s.to_homogeneous().as_slice()) * &m;
        assert!(slam_discrete_recover(&m_k, &m).unwrap().distance(&s) < 1e-9);

        let flat = landmark_matrix(&[
            Vector4::new(0.0, 0.0, 0.0, 1.0),
            Vector4::new(1.0, 0.0, 0.0, 1.0),
            Vector4::new(0.0, 1.0, 0.0, 1.0),
            Vector4::new(1.0, 1.0, 0.0, 1.0),
        ]);
        assert!(matches!(
            slam_discrete_recover(&flat, &flat),
            Err(Error::RankDeficiency { .. })
        ));
        let three = landmark_matrix(&lms[..3]);
        assert!(matches!(
            slam_discrete_recover(&three, &three),
            Err(Error::RankDeficiency { .. })
        ));
    }

    #[test]
    fn discrete_chain_reproduces_poses() {
        let seq = SlamSequence::<f64>::synthetic(7, 50, 6, 0.2).unwrap();
        let rec = seq.recover().unwrap();
        for (a, b) in rec.iter().zip(seq.relative_poses()) {
            assert!(a.distance(&b) < 1e-9);
        }
        let chained = chain_poses(&seq.poses[0], &rec);
        for (a, b) in chained.iter().zip(&seq.poses) {
            assert!(a.distance(b) < 1e-8);
        }
    }

    #[test]
    fn sampled_landmarks_are_well_conditioned() {
        let mut r = rng(8);
        let lms = sample_landmarks::<f64>(&mut r, 6).unwrap();
        assert!(lms
            .iter()
            .all(|l| l.w == 1.0 && l.xyz().iter().all(|x| (0.0..=1.0).contains(x))));
        assert!(condition(&landmark_matrix(&lms)) < SAMPLING_CONDITION_LIMIT);
        assert!(sample_landmarks::<f64>(&mut r, 3).is_err());
    }

    #[test]
    fn sphere_demo_reconstructs_the_full_state() {
        let cfg = IntegratorConfig::new(crate::integrate::Method::Rk4Cg, 1e-2, 2.0).unwrap();
        let run = sphere_demo::<f64>(&cfg, Vector3::new(0.3, -1.2, 0.8), &sphere_test_input).unwrap();
        for s in &run {
            assert!(s.reconstruction_error < 1e-8, "{s:?}");
            assert!((s.q.norm() - s.radius).abs() < 1e-8);
        }
    }

    #[test]
    fn localization_problem_is_nondegenerate() {
        let mut r = rng(9);
        let prob = slam_localization_problem(sample_landmarks::<f64>(&mut r, 6).unwrap()).unwrap();
        assert!(prob.hessian_probe().unwrap().iter().all(|d| *d > 1e-3));
        let g = random_se3(&mut r, 1.0);
        assert!(prob.zeta_e_numeric(&g, &prob.output_of(&g).unwrap()).unwrap().norm() < 1e-7);
    }
}
