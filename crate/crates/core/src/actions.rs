//! Group actions on state and output spaces.
//!
//! Points are embedded in a Euclidean ambient space (see [`Point::flatten`])
//! and tangent vectors are ambient vectors in the same layout. Every action
//! here is linear in that embedding, so its tangent map is the same linear
//! map applied to the tangent vector.

use nalgebra::{DMatrix, DVector, Matrix4, Vector3, Vector4};

use crate::lie::{adjoint, exp, AlgebraElement, GroupElement, GroupKind};
use crate::random::{random_algebra, random_group, random_point, rng, SampleRng};
use crate::{Error, Real, Result};

/// Finite-difference step for generators without a closed form.
pub const GENERATOR_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Handedness {
    /// `φ_g ∘ φ_h = φ_{gh}`
    Left,
    /// `φ_g ∘ φ_h = φ_{hg}`
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointKind {
    R3,
    S2,
    /// Product of `n` unit spheres.
    Directions(usize),
    Group(GroupKind),
    /// `n` homogeneous points of E³.
    Landmarks(usize),
    /// SE(3) pose together with `n` homogeneous landmarks.
    Slam(usize),
}

impl PointKind {
    /// Length of [`Point::flatten`] for points of this kind.
    pub fn ambient_dim(self) -> usize {
        match self {
            PointKind::R3 | PointKind::S2 => 3,
            PointKind::Directions(n) => 3 * n,
            PointKind::Group(k) => k.matrix_dim() * k.matrix_dim(),
            PointKind::Landmarks(n) => 4 * n,
            PointKind::Slam(n) => 16 + 4 * n,
        }
    }
}

impl std::fmt::Display for PointKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// SLAM configuration: body pose `S ∈ SE(3)` and inertial landmarks `L̄ᵢ = (Lᵢ; 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlamState<T: Real> {
    pose: GroupElement<T>,
    landmarks: Vec<Vector4<T>>,
}

impl<T: Real> SlamState<T> {
    pub fn new(pose: GroupElement<T>, landmarks: &[Vector3<T>]) -> Result<Self> {
        Self::from_homogeneous(pose, landmarks.iter().map(|l| l.push(T::one())).collect())
    }

    /// Landmarks must have last entry exactly one.
    pub fn from_homogeneous(pose: GroupElement<T>, landmarks: Vec<Vector4<T>>) -> Result<Self> {
        if pose.kind() != GroupKind::Se3 {
            return Err(Error::KindMismatch {
                expected: GroupKind::Se3,
                got: pose.kind(),
            });
        }
        if landmarks.iter().any(|l| l.w != T::one()) {
            return Err(Error::InvalidArgument(
                "homogeneous landmark must end in exactly 1".into(),
            ));
        }
        Ok(Self { pose, landmarks })
    }

    pub fn pose(&self) -> &GroupElement<T> {
        &self.pose
    }

    pub fn landmarks(&self) -> &[Vector4<T>] {
        &self.landmarks
    }

    pub fn len(&self) -> usize {
        self.landmarks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.landmarks.is_empty()
    }

    /// Landmarks seen from the body frame, `S⁻¹ L̄ᵢ`.
    pub fn body_landmarks(&self) -> Vec<Vector4<T>> {
        let inv = self.pose.inverse();
        self.landmarks.iter().map(|l| transform_homogeneous(&inv, l)).collect()
    }
}

/// `g · x̄` for a homogeneous point, keeping the last entry exactly one.
pub(crate) fn transform_homogeneous<T: Real>(g: &GroupElement<T>, x: &Vector4<T>) -> Vector4<T> {
    g.transform_point(&x.xyz()).push(x.w)
}

/// `g · ẋ` for a homogeneous tangent (last entry zero).
fn rotate_homogeneous<T: Real>(g: &GroupElement<T>, v: &Vector4<T>) -> Vector4<T> {
    let m = g.to_homogeneous();
    m * v
}

#[derive(Debug, Clone, PartialEq)]
pub enum Point<T: Real> {
    R3(Vector3<T>),
    S2(Vector3<T>),
    Directions(Vec<Vector3<T>>),
    Group(GroupElement<T>),
    Landmarks(Vec<Vector4<T>>),
    Slam(SlamState<T>),
}

impl<T: Real> Point<T> {
    /// Unit vector in the direction of `v`.
    pub fn s2(v: Vector3<T>) -> Result<Self> {
        let n = v.norm();
        if !(n > T::zero()) {
            return Err(Error::ExcludedOrigin { norm: n.as_f64() });
        }
        Ok(Point::S2(v / n))
    }

    pub fn kind(&self) -> PointKind {
        match self {
            Point::R3(_) => PointKind::R3,
            Point::S2(_) => PointKind::S2,
            Point::Directions(d) => PointKind::Directions(d.len()),
            Point::Group(g) => PointKind::Group(g.kind()),
            Point::Landmarks(l) => PointKind::Landmarks(l.len()),
            Point::Slam(s) => PointKind::Slam(s.len()),
        }
    }

    /// Ambient coordinates. Matrices are stored column-major; a SLAM state
    /// is its 4×4 pose followed by the homogeneous landmarks.
    pub fn flatten(&self) -> DVector<T> {
        let mut out = Vec::with_capacity(self.kind().ambient_dim());
        match self {
            Point::R3(v) | Point::S2(v) => out.extend(v.iter().copied()),
            Point::Directions(d) => d.iter().for_each(|v| out.extend(v.iter().copied())),
            Point::Group(g) => out.extend(g.matrix().iter().copied()),
            Point::Landmarks(l) => l.iter().for_each(|v| out.extend(v.iter().copied())),
            Point::Slam(s) => {
                out.extend(s.pose.to_homogeneous().iter().copied());
                s.landmarks.iter().for_each(|v| out.extend(v.iter().copied()));
            }
        }
        DVector::from_vec(out)
    }

    /// Euclidean distance of the ambient embeddings.
    pub fn distance(&self, other: &Self) -> Result<T> {
        if self.kind() != other.kind() {
            return Err(Error::PointKind {
                action: "distance".into(),
                got: other.kind().to_string(),
            });
        }
        Ok((self.flatten() - other.flatten()).norm())
    }

    /// Moves along a curve through `self` with initial velocity `v`, by `s`.
    ///
    /// Vector parts move linearly and are renormalised on spheres; group
    /// parts follow `g exp(s g⁻¹ v)`.
    pub fn retract(&self, v: &DVector<T>, s: T) -> Result<Self> {
        let dim = self.kind().ambient_dim();
        if v.len() != dim {
            return Err(Error::Dimension {
                expected: dim.to_string(),
                got: v.len(),
            });
        }
        let vec3 = |i: usize| Vector3::new(v[i], v[i + 1], v[i + 2]);
        Ok(match self {
            Point::R3(q) => Point::R3(q + vec3(0) * s),
            Point::S2(q) => Point::S2((q + vec3(0) * s).normalize()),
            Point::Directions(d) => Point::Directions(
                d.iter()
                    .enumerate()
                    .map(|(i, q)| (q + vec3(3 * i) * s).normalize())
                    .collect(),
            ),
            Point::Group(g) => Point::Group(retract_group(g, v.as_slice(), s)?),
            Point::Landmarks(l) => Point::Landmarks(
                l.iter()
                    .enumerate()
                    .map(|(i, x)| (x.xyz() + vec3(4 * i) * s).push(T::one()))
                    .collect(),
            ),
            Point::Slam(st) => {
                let pose = retract_group(&st.pose, &v.as_slice()[..16], s)?;
                let landmarks = st
                    .landmarks
                    .iter()
                    .enumerate()
                    .map(|(i, x)| (x.xyz() + vec3(16 + 4 * i) * s).push(T::one()))
                    .collect();
                Point::Slam(SlamState { pose, landmarks })
            }
        })
    }
}

fn retract_group<T: Real>(g: &GroupElement<T>, v: &[T], s: T) -> Result<GroupElement<T>> {
    let n = g.kind().matrix_dim();
    let tangent = DMatrix::from_column_slice(n, n, v);
    let body = g.inverse().matrix() * tangent;
    let xi = body_to_algebra(&body, g.kind());
    Ok(g * &exp(&xi.scale(s)))
}

/// Algebra element nearest to a body-frame tangent matrix (antisymmetric part of the rotation block).
pub(crate) fn body_to_algebra<T: Real>(m: &DMatrix<T>, kind: GroupKind) -> AlgebraElement<T> {
    let half = T::lit(0.5);
    let w = Vector3::new(
        (m[(2, 1)] - m[(1, 2)]) * half,
        (m[(0, 2)] - m[(2, 0)]) * half,
        (m[(1, 0)] - m[(0, 1)]) * half,
    );
    match kind {
        GroupKind::So3 => AlgebraElement::so3(w),
        GroupKind::Se3 => AlgebraElement::se3(Vector3::new(m[(0, 3)], m[(1, 3)], m[(2, 3)]), w),
    }
}

/// A smooth action of SO(3) or SE(3) on a space of [`Point`]s.
pub trait GroupAction<T: Real>: Send + Sync {
    fn name(&self) -> &str;
    fn handedness(&self) -> Handedness;
    fn group_kind(&self) -> GroupKind;
    fn point_kind(&self) -> PointKind;

    /// `φ_g(p)`.
    fn apply(&self, g: &GroupElement<T>, p: &Point<T>) -> Result<Point<T>>;

    /// Tangent map `T_pφ_g · v`.
    fn push_forward(&self, g: &GroupElement<T>, p: &Point<T>, v: &DVector<T>) -> Result<DVector<T>>;

    /// Infinitesimal generator `ζ_P(p) = d/dt φ_{exp(tζ)}(p)` at `t = 0`.
    ///
    /// The default is a central difference with step [`GENERATOR_STEP`].
    fn generator(&self, zeta: &AlgebraElement<T>, p: &Point<T>) -> Result<DVector<T>> {
        fd_generator(self, zeta, p)
    }

    fn check(&self, g: &GroupElement<T>, p: &Point<T>) -> Result<()> {
        if g.kind() != self.group_kind() {
            return Err(Error::KindMismatch {
                expected: self.group_kind(),
                got: g.kind(),
            });
        }
        if p.kind() != self.point_kind() {
            return Err(Error::PointKind {
                action: self.name().to_string(),
                got: p.kind().to_string(),
            });
        }
        Ok(())
    }
}

/// Central-difference generator, available to every action.
pub fn fd_generator<T: Real, A: GroupAction<T> + ?Sized>(
    action: &A,
    zeta: &AlgebraElement<T>,
    p: &Point<T>,
) -> Result<DVector<T>> {
    if zeta.kind() != action.group_kind() {
        return Err(Error::KindMismatch {
            expected: action.group_kind(),
            got: zeta.kind(),
        });
    }
    let h = T::lit(GENERATOR_STEP);
    let plus = action.apply(&exp(&zeta.scale(h)), p)?.flatten();
    let minus = action.apply(&exp(&zeta.scale(-h)), p)?.flatten();
    Ok((plus - minus) / (h + h))
}

fn dvec3<T: Real>(v: &DVector<T>, i: usize) -> Vector3<T> {
    Vector3::new(v[i], v[i + 1], v[i + 2])
}

fn dvec4<T: Real>(v: &DVector<T>, i: usize) -> Vector4<T> {
    Vector4::new(v[i], v[i + 1], v[i + 2], v[i + 3])
}

fn check_tangent<T: Real>(kind: PointKind, v: &DVector<T>) -> Result<()> {
    if v.len() != kind.ambient_dim() {
        return Err(Error::Dimension {
            expected: kind.ambient_dim().to_string(),
            got: v.len(),
        });
    }
    Ok(())
}

/// SO(3) rotating vectors: `x ↦ R x` (left) or `x ↦ Rᵀ x` (right).
///
/// Works on R³, S² or a tuple of directions, acting on every component.
#[derive(Debug, Clone)]
pub struct RotationAction {
    name: String,
    handedness: Handedness,
    point_kind: PointKind,
}

impl RotationAction {
    pub fn new(handedness: Handedness, point_kind: PointKind) -> Result<Self> {
        match point_kind {
            PointKind::R3 | PointKind::S2 | PointKind::Directions(_) => Ok(Self {
                name: format!("so3-rotate-{point_kind:?}-{handedness:?}").to_lowercase(),
                handedness,
                point_kind,
            }),
            other => Err(Error::PointKind {
                action: "rotation".into(),
                got: other.to_string(),
            }),
        }
    }

    /// The standard left action `q ↦ R q` on R³ \ {0}.
    pub fn on_r3() -> Self {
        Self::new(Handedness::Left, PointKind::R3).expect("valid kind")
    }

    pub fn on_s2() -> Self {
        Self::new(Handedness::Left, PointKind::S2).expect("valid kind")
    }

    fn matrix<T: Real>(&self, g: &GroupElement<T>) -> nalgebra::Matrix3<T> {
        match self.handedness {
            Handedness::Left => *g.rotation(),
            Handedness::Right => g.rotation().transpose(),
        }
    }
}

impl<T: Real> GroupAction<T> for RotationAction {
    fn name(&self) -> &str {
        &self.name
    }
    fn handedness(&self) -> Handedness {
        self.handedness
    }
    fn group_kind(&self) -> GroupKind {
        GroupKind::So3
    }
    fn point_kind(&self) -> PointKind {
        self.point_kind
    }

    fn apply(&self, g: &GroupElement<T>, p: &Point<T>) -> Result<Point<T>> {
        self.check(g, p)?;
        let r = self.matrix(g);
        Ok(match p {
            Point::R3(q) => Point::R3(r * q),
            // rotations preserve the norm; renormalising would only add rounding
            Point::S2(q) => Point::S2(r * q),
            Point::Directions(d) => Point::Directions(d.iter().map(|q| r * q).collect()),
            _ => unreachable!("kind checked"),
        })
    }

    fn push_forward(&self, g: &GroupElement<T>, p: &Point<T>, v: &DVector<T>) -> Result<DVector<T>> {
        self.check(g, p)?;
        check_tangent(self.point_kind, v)?;
        let r = self.matrix(g);
        let mut out = v.clone();
        for i in (0..v.len()).step_by(3) {
            out.fixed_rows_mut::<3>(i).copy_from(&(r * dvec3(v, i)));
        }
        Ok(out)
    }

    fn generator(&self, zeta: &AlgebraElement<T>, p: &Point<T>) -> Result<DVector<T>> {
        self.check(&GroupElement::identity(zeta.kind()), p)?;
        let w = match self.handedness {
            Handedness::Left => *zeta.angular(),
            Handedness::Right => -zeta.angular(),
        };
        let flat = p.flatten();
        let mut out = flat.clone();
        for i in (0..flat.len()).step_by(3) {
            out.fixed_rows_mut::<3>(i).copy_from(&w.cross(&dvec3(&flat, i)));
        }
        Ok(out)
    }
}

/// A group acting on itself by translation: `h ↦ g h` (left) or `h ↦ h g` (right).
#[derive(Debug, Clone)]
pub struct GroupTranslation {
    name: String,
    kind: GroupKind,
    handedness: Handedness,
}

impl GroupTranslation {
    pub fn new(kind: GroupKind, handedness: Handedness) -> Self {
        Self {
            name: format!("{kind:?}-translate-{handedness:?}").to_lowercase(),
            kind,
            handedness,
        }
    }
}

impl<T: Real> GroupAction<T> for GroupTranslation {
    fn name(&self) -> &str {
        &self.name
    }
    fn handedness(&self) -> Handedness {
        self.handedness
    }
    fn group_kind(&self) -> GroupKind {
        self.kind
    }
    fn point_kind(&self) -> PointKind {
        PointKind::Group(self.kind)
    }

    fn apply(&self, g: &GroupElement<T>, p: &Point<T>) -> Result<Point<T>> {
        self.check(g, p)?;
        let Point::Group(h) = p else {
            unreachable!("kind checked")
        };
        Ok(Point::Group(match self.handedness {
            Handedness::Left => g * h,
            Handedness::Right => h * g,
        }))
    }

    fn push_forward(&self, g: &GroupElement<T>, p: &Point<T>, v: &DVector<T>) -> Result<DVector<T>> {
        self.check(g, p)?;
        check_tangent::<T>(GroupAction::<T>::point_kind(self), v)?;
        let n = self.kind.matrix_dim();
        let tangent = DMatrix::from_column_slice(n, n, v.as_slice());
        let out = match self.handedness {
            Handedness::Left => g.matrix() * tangent,
            Handedness::Right => tangent * g.matrix(),
        };
        Ok(DVector::from_column_slice(out.as_slice()))
    }

    fn generator(&self, zeta: &AlgebraElement<T>, p: &Point<T>) -> Result<DVector<T>> {
        self.check(&GroupElement::identity(zeta.kind()), p)?;
        let Point::Group(h) = p else {
            unreachable!("kind checked")
        };
        let out = match self.handedness {
            Handedness::Left => zeta.hat() * h.matrix(),
            Handedness::Right => h.matrix() * zeta.hat(),
        };
        Ok(DVector::from_column_slice(out.as_slice()))
    }
}

/// SE(3) moving homogeneous points: `x̄ ↦ g x̄` (left) or `x̄ ↦ g⁻¹ x̄` (right).
#[derive(Debug, Clone)]
pub struct RigidAction {
    name: String,
    handedness: Handedness,
    count: usize,
}

impl RigidAction {
    pub fn new(handedness: Handedness, count: usize) -> Self {
        Self {
            name: format!("se3-move-landmarks-{handedness:?}").to_lowercase(),
            handedness,
            count,
        }
    }

    fn element<T: Real>(&self, g: &GroupElement<T>) -> GroupElement<T> {
        match self.handedness {
            Handedness::Left => g.clone(),
            Handedness::Right => g.inverse(),
        }
    }
}

impl<T: Real> GroupAction<T> for RigidAction {
    fn name(&self) -> &str {
        &self.name
    }
    fn handedness(&self) -> Handedness {
        self.handedness
    }
    fn group_kind(&self) -> GroupKind {
        GroupKind::Se3
    }
    fn point_kind(&self) -> PointKind {
        PointKind::Landmarks(self.count)
    }

    fn apply(&self, g: &GroupElement<T>, p: &Point<T>) -> Result<Point<T>> {
        self.check(g, p)?;
        let Point::Landmarks(l) = p else {
            unreachable!("kind checked")
        };
        let m = self.element(g);
        Ok(Point::Landmarks(
            l.iter().map(|x| transform_homogeneous(&m, x)).collect(),
        ))
    }

    fn push_forward(&self, g: &GroupElement<T>, p: &Point<T>, v: &DVector<T>) -> Result<DVector<T>> {
        self.check(g, p)?;
        check_tangent::<T>(GroupAction::<T>::point_kind(self), v)?;
        let m = self.element(g);
        let mut out = v.clone();
        for i in (0..v.len()).step_by(4) {
            out.fixed_rows_mut::<4>(i)
                .copy_from(&rotate_homogeneous(&m, &dvec4(v, i)));
        }
        Ok(out)
    }
}

/// The SLAM symmetry, a right action: `φ_g(S, L̄ᵢ) = (g⁻¹S, g⁻¹L̄ᵢ)`.
///
/// It is free. Its generator is `(−WS, −WL̄₁, …)`.
#[derive(Debug, Clone)]
pub struct SlamAction {
    count: usize,
}

impl SlamAction {
    pub fn new(count: usize) -> Self {
        Self { count }
    }
}

impl<T: Real> GroupAction<T> for SlamAction {
    fn name(&self) -> &str {
        "slam-right"
    }
    fn handedness(&self) -> Handedness {
        Handedness::Right
    }
    fn group_kind(&self) -> GroupKind {
        GroupKind::Se3
    }
    fn point_kind(&self) -> PointKind {
        PointKind::Slam(self.count)
    }

    fn apply(&self, g: &GroupElement<T>, p: &Point<T>) -> Result<Point<T>> {
        self.check(g, p)?;
        let Point::Slam(s) = p else {
            unreachable!("kind checked")
        };
        let inv = g.inverse();
        Ok(Point::Slam(SlamState {
            pose: &inv * &s.pose,
            landmarks: s.landmarks.iter().map(|l| transform_homogeneous(&inv, l)).collect(),
        }))
    }

    fn push_forward(&self, g: &GroupElement<T>, p: &Point<T>, v: &DVector<T>) -> Result<DVector<T>> {
        self.check(g, p)?;
        check_tangent::<T>(GroupAction::<T>::point_kind(self), v)?;
        left_multiply_slam_tangent(&g.inverse().to_homogeneous(), v, true)
    }

    fn generator(&self, zeta: &AlgebraElement<T>, p: &Point<T>) -> Result<DVector<T>> {
        self.check(&GroupElement::identity(zeta.kind()), p)?;
        let neg_w = -zeta.hat4();
        left_multiply_slam_tangent(&neg_w, &p.flatten(), true)
    }
}

/// Right action on the pose slot only: `(S, l̄ᵢ) ↦ (g⁻¹S, l̄ᵢ)`.
///
/// Used as the output action for a pose-augmented SLAM measurement whose
/// landmark part is already in the body frame.
#[derive(Debug, Clone)]
pub struct SlamPoseAction {
    count: usize,
}

impl SlamPoseAction {
    pub fn new(count: usize) -> Self {
        Self { count }
    }
}

impl<T: Real> GroupAction<T> for SlamPoseAction {
    fn name(&self) -> &str {
        "slam-pose-right"
    }
    fn handedness(&self) -> Handedness {
        Handedness::Right
    }
    fn group_kind(&self) -> GroupKind {
        GroupKind::Se3
    }
    fn point_kind(&self) -> PointKind {
        PointKind::Slam(self.count)
    }

    fn apply(&self, g: &GroupElement<T>, p: &Point<T>) -> Result<Point<T>> {
        self.check(g, p)?;
        let Point::Slam(s) = p else {
            unreachable!("kind checked")
        };
        Ok(Point::Slam(SlamState {
            pose: &g.inverse() * &s.pose,
            landmarks: s.landmarks.clone(),
        }))
    }

    fn push_forward(&self, g: &GroupElement<T>, p: &Point<T>, v: &DVector<T>) -> Result<DVector<T>> {
        self.check(g, p)?;
        check_tangent::<T>(GroupAction::<T>::point_kind(self), v)?;
        left_multiply_slam_tangent(&g.inverse().to_homogeneous(), v, false)
    }
}

/// Multiplies the pose block (and optionally each landmark block) of a SLAM-layout vector by `m`.
fn left_multiply_slam_tangent<T: Real>(m: &Matrix4<T>, v: &DVector<T>, landmarks: bool) -> Result<DVector<T>> {
    let mut out = v.clone();
    let pose = Matrix4::from_column_slice(&v.as_slice()[..16]);
    out.rows_mut(0, 16).copy_from_slice((m * pose).as_slice());
    for i in (16..v.len()).step_by(4) {
        let block = if landmarks { m * dvec4(v, i) } else { dvec4(v, i) };
        out.fixed_rows_mut::<4>(i).copy_from(&block);
    }
    Ok(out)
}

/// The identity action `φ_g(p) = p`.
#[derive(Debug, Clone)]
pub struct TrivialAction {
    name: String,
    kind: GroupKind,
    point_kind: PointKind,
    handedness: Handedness,
}

impl TrivialAction {
    pub fn new(kind: GroupKind, point_kind: PointKind, handedness: Handedness) -> Self {
        Self {
            name: format!("trivial-{point_kind:?}").to_lowercase(),
            kind,
            point_kind,
            handedness,
        }
    }
}

impl<T: Real> GroupAction<T> for TrivialAction {
    fn name(&self) -> &str {
        &self.name
    }
    fn handedness(&self) -> Handedness {
        self.handedness
    }
    fn group_kind(&self) -> GroupKind {
        self.kind
    }
    fn point_kind(&self) -> PointKind {
        self.point_kind
    }
    fn apply(&self, g: &GroupElement<T>, p: &Point<T>) -> Result<Point<T>> {
        self.check(g, p)?;
        Ok(p.clone())
    }
    fn push_forward(&self, g: &GroupElement<T>, p: &Point<T>, v: &DVector<T>) -> Result<DVector<T>> {
        self.check(g, p)?;
        check_tangent(self.point_kind, v)?;
        Ok(v.clone())
    }
    fn generator(&self, zeta: &AlgebraElement<T>, p: &Point<T>) -> Result<DVector<T>> {
        self.check(&GroupElement::identity(zeta.kind()), p)?;
        Ok(DVector::zeros(self.point_kind.ambient_dim()))
    }
}

/// `φ_g(p)` with the kinds checked.
pub fn act<T: Real>(a: &dyn GroupAction<T>, g: &GroupElement<T>, p: &Point<T>) -> Result<Point<T>> {
    a.apply(g, p)
}

pub fn infinitesimal_generator<T: Real>(
    a: &dyn GroupAction<T>,
    zeta: &AlgebraElement<T>,
    p: &Point<T>,
) -> Result<DVector<T>> {
    a.generator(zeta, p)
}

/// Identity input action `ψ_g(u) = u`.
pub fn identity_input<T: Real, U: Clone>(_: &GroupElement<T>, u: &U) -> U {
    u.clone()
}

fn require_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    Ok(())
}

/// Largest `‖T_pφ_g · X(p, u) − X(φ_g(p), ψ_g(u))‖` over random `(g, p, u)`.
pub fn check_equivariance_vf<T, U, F, Psi, S>(
    field: F,
    state_action: &dyn GroupAction<T>,
    input_action: Psi,
    mut sample_input: S,
    samples: usize,
    seed: u64,
) -> Result<T>
where
    T: Real,
    F: Fn(&Point<T>, &U) -> Result<DVector<T>>,
    Psi: Fn(&GroupElement<T>, &U) -> U,
    S: FnMut(&mut SampleRng) -> U,
{
    require_samples(samples)?;
    let mut r = rng(seed);
    let mut worst = T::zero();
    for _ in 0..samples {
        let g = random_group(&mut r, state_action.group_kind());
        let p = random_point(&mut r, state_action.point_kind());
        let u = sample_input(&mut r);
        let lhs = state_action.push_forward(&g, &p, &field(&p, &u)?)?;
        let rhs = field(&state_action.apply(&g, &p)?, &input_action(&g, &u))?;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// Largest `‖ϕ_g(H(p)) − H(φ_g(p))‖` over random `(g, p)`.
pub fn check_equivariance_output<T, H>(
    output: H,
    state_action: &dyn GroupAction<T>,
    output_action: &dyn GroupAction<T>,
    samples: usize,
    seed: u64,
) -> Result<T>
where
    T: Real,
    H: Fn(&Point<T>) -> Result<Point<T>>,
{
    require_samples(samples)?;
    let mut r = rng(seed);
    let mut worst = T::zero();
    for _ in 0..samples {
        let g = random_group(&mut r, state_action.group_kind());
        let p = random_point(&mut r, state_action.point_kind());
        let lhs = output_action.apply(&g, &output(&p)?)?;
        let rhs = output(&state_action.apply(&g, &p)?)?;
        worst = worst.max(lhs.distance(&rhs)?);
    }
    Ok(worst)
}

/// Largest violation of `T_pφ_g · ζ_P(p) = (Ad_g ζ)_P(φ_g(p))`
/// (left actions) or its `Ad_{g⁻¹}` counterpart (right actions).
pub fn check_generator_equivariance<T: Real>(action: &dyn GroupAction<T>, samples: usize, seed: u64) -> Result<T> {
    require_samples(samples)?;
    let mut r = rng(seed);
    let mut worst = T::zero();
    for _ in 0..samples {
        let g = random_group(&mut r, action.group_kind());
        let p = random_point(&mut r, action.point_kind());
        let zeta = random_algebra(&mut r, action.group_kind(), 1.0);
        let lhs = action.push_forward(&g, &p, &action.generator(&zeta, &p)?)?;
        let conj = match action.handedness() {
            Handedness::Left => adjoint(&g, &zeta)?,
            Handedness::Right => adjoint(&g.inverse(), &zeta)?,
        };
        let rhs = action.generator(&conj, &action.apply(&g, &p)?)?;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// `(identity residual, composition residual)` of the action laws on samples.
pub fn check_action_laws<T: Real>(action: &dyn GroupAction<T>, samples: usize, seed: u64) -> Result<(T, T)> {
    require_samples(samples)?;
    let mut r = rng(seed);
    let id = GroupElement::identity(action.group_kind());
    let (mut ident, mut comp) = (T::zero(), T::zero());
    for _ in 0..samples {
        let g = random_group(&mut r, action.group_kind());
        let h = random_group(&mut r, action.group_kind());
        let p = random_point(&mut r, action.point_kind());
        ident = ident.max(action.apply(&id, &p)?.distance(&p)?);
        let nested = action.apply(&g, &action.apply(&h, &p)?)?;
        let product = match action.handedness() {
            Handedness::Left => &g * &h,
            Handedness::Right => &h * &g,
        };
        comp = comp.max(nested.distance(&action.apply(&product, &p)?)?);
    }
    Ok((ident, comp))
}
