//! Cross-sections of `P → P/G` and the induced base/fiber split.
//!
//! A cross-section picks one point `σ([p])` on every orbit. Every state is
//! then a group displacement of its section point, `p = γ(p) · σ([p])`, and
//! equivariant vector fields split into a base rate (motion across orbits)
//! and a fiber rate (motion along the orbit).
//!
//! Fiber coordinates are always taken with respect to a left action. For a
//! right action `φ` the induced left action is `g · p = φ_{g⁻¹}(p)`, so
//! `p = φ_{γ(p)⁻¹}(σ([p]))` and `γ(φ_h p) = h⁻¹ γ(p)`.
//!
//! Both bundles shipped here admit global sections; the local-section case
//! is not modelled.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix4, Vector3, Vector4};

use crate::actions::{
    body_to_algebra, check_equivariance_output, GroupAction, GroupTranslation, Handedness, Point, PointKind,
    RotationAction, SlamAction, SlamPoseAction, SlamState,
};
use crate::lie::{log, AlgebraElement, GroupElement, GroupKind};
use crate::random::{random_group, random_point, rng};
use crate::{Error, Real, Result};

/// Norms at or below this are treated as the excluded origin of `R³ \ {0}`.
pub const ORIGIN_TOL: f64 = 1e-12;

/// Step of the finite-difference fallback in [`reduce_system`].
pub const SPLIT_STEP: f64 = 1e-6;

/// A point of the orbit space `P/G`.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseCoordinate<T: Real> {
    /// Orbit of `q ∈ R³ \ {0}` under rotations: `r = ‖q‖`.
    Radius(T),
    /// Orbit of a SLAM state: landmarks in the body frame, pose slot `I`.
    Landmarks(Vec<Vector4<T>>),
    /// Orbit identified by its section point.
    Point(Point<T>),
}

impl<T: Real> BaseCoordinate<T> {
    pub fn flatten(&self) -> DVector<T> {
        match self {
            BaseCoordinate::Radius(r) => DVector::from_element(1, *r),
            BaseCoordinate::Landmarks(l) => {
                DVector::from_iterator(4 * l.len(), l.iter().flat_map(|v| v.iter().copied()))
            }
            BaseCoordinate::Point(p) => p.flatten(),
        }
    }

    pub fn distance(&self, other: &Self) -> Result<T> {
        let (a, b) = (self.flatten(), other.flatten());
        if a.len() != b.len() || std::mem::discriminant(self) != std::mem::discriminant(other) {
            return Err(Error::SizeMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        Ok((a - b).norm())
    }
}

/// A state together with its base and fiber coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct BundlePoint<T: Real> {
    pub point: Point<T>,
    pub base: BaseCoordinate<T>,
    pub fiber: GroupElement<T>,
    pub section_name: String,
}

/// Velocity of a state split along a cross-section.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction<T: Real> {
    /// Ambient velocity of the section point `σ([p(t)])`.
    pub base_rate: DVector<T>,
    /// Body velocity `γ⁻¹ γ̇` of the fiber coordinate.
    pub fiber_rate: AlgebraElement<T>,
}

/// A global cross-section of the orbit space of [`CrossSection::action`].
pub trait CrossSection<T: Real>: Send + Sync {
    fn name(&self) -> &str;
    fn action(&self) -> &dyn GroupAction<T>;

    /// `π(p)`.
    fn base_of(&self, p: &Point<T>) -> Result<BaseCoordinate<T>>;

    /// `σ(b)`; satisfies `base_of(section(b)) = b`.
    fn section(&self, b: &BaseCoordinate<T>) -> Result<Point<T>>;

    /// Canonical representative `γ(p)` of the coset taking `σ([p])` to `p`.
    fn fiber_of(&self, p: &Point<T>) -> Result<GroupElement<T>>;

    /// Closed-form split of a tangent `v` at `p`, if the geometry has one.
    fn split(&self, _p: &Point<T>, _v: &DVector<T>) -> Option<Result<Reduction<T>>> {
        None
    }

    fn decompose(&self, p: &Point<T>) -> Result<BundlePoint<T>> {
        Ok(BundlePoint {
            point: p.clone(),
            base: self.base_of(p)?,
            fiber: self.fiber_of(p)?,
            section_name: self.name().to_string(),
        })
    }

    /// `γ · σ(b)` under the left action induced by [`CrossSection::action`].
    fn reconstruct(&self, b: &BaseCoordinate<T>, fiber: &GroupElement<T>) -> Result<Point<T>> {
        displace(self.action(), fiber, &self.section(b)?)
    }
}

/// Applies `g` through the left action induced by `action`.
pub fn displace<T: Real>(action: &dyn GroupAction<T>, g: &GroupElement<T>, p: &Point<T>) -> Result<Point<T>> {
    match action.handedness() {
        Handedness::Left => action.apply(g, p),
        Handedness::Right => action.apply(&g.inverse(), p),
    }
}

fn plane_rotation<T: Real>(a: T, b: T) -> (T, T) {
    let rho = a.hypot(b);
    if rho > T::zero() {
        (a / rho, b / rho)
    } else {
        (T::one(), T::zero())
    }
}

/// `(r, R)` with `q = r R e₁`, from two Givens rotations.
///
/// `R₂` zeroes the third component in the (2,3) plane, then `R₁` the second
/// in the (1,2) plane; `R = R₂ᵀ R₁ᵀ`. Rotations with a zero pivot are the
/// identity, so points already on the positive `e₁` axis map to `R = I`.
pub fn givens_section<T: Real>(q: &Vector3<T>) -> Result<(T, GroupElement<T>)> {
    let r = q.norm();
    if !(r > T::lit(ORIGIN_TOL)) {
        return Err(Error::ExcludedOrigin { norm: r.as_f64() });
    }
    let (z, o) = (T::zero(), T::one());
    let (c2, s2) = plane_rotation(q.y, q.z);
    let r2 = Matrix3::new(o, z, z, z, c2, s2, z, -s2, c2);
    let (c1, s1) = plane_rotation(q.x, q.y.hypot(q.z));
    let r1 = Matrix3::new(c1, s1, z, -s1, c1, z, z, z, o);
    let rot = r2.transpose() * r1.transpose();
    Ok((
        r,
        GroupElement::from_parts_unchecked(GroupKind::So3, rot, Vector3::zeros()),
    ))
}

/// Horizontal/vertical split of a velocity `v` at `q`.
///
/// Returns `hor = ṙ` and the body rate `ver ∈ span(e₂, e₃)` that moves the
/// Givens frame, so that `v = hor R e₁ + r R (ver × e₁)`.
pub fn sphere_split<T: Real>(q: &Vector3<T>, v: &Vector3<T>) -> Result<(T, Vector3<T>)> {
    let (r, rot) = givens_section(q)?;
    let w = rot.rotation().transpose() * v / r;
    Ok((w.x * r, Vector3::new(T::zero(), -w.z, w.y)))
}

/// Rotations acting on `R³ \ {0}`, sectioned along the positive `e₁` axis.
#[derive(Debug, Clone)]
pub struct SphereSection {
    action: RotationAction,
}

impl SphereSection {
    pub fn new() -> Self {
        Self {
            action: RotationAction::on_r3(),
        }
    }
}

impl Default for SphereSection {
    fn default() -> Self {
        Self::new()
    }
}

fn expect_r3<T: Real>(p: &Point<T>) -> Result<&Vector3<T>> {
    match p {
        Point::R3(q) => Ok(q),
        other => Err(Error::PointKind {
            action: "sphere-section".into(),
            got: other.kind().to_string(),
        }),
    }
}

fn expect_slam<'a, T: Real>(p: &'a Point<T>, name: &str) -> Result<&'a SlamState<T>> {
    match p {
        Point::Slam(s) => Ok(s),
        other => Err(Error::PointKind {
            action: name.into(),
            got: other.kind().to_string(),
        }),
    }
}

fn check_len<T: Real>(v: &DVector<T>, n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::Dimension {
            expected: n.to_string(),
            got: v.len(),
        });
    }
    Ok(())
}

impl<T: Real> CrossSection<T> for SphereSection {
    fn name(&self) -> &str {
        "sphere-givens"
    }
    fn action(&self) -> &dyn GroupAction<T> {
        &self.action
    }
    fn base_of(&self, p: &Point<T>) -> Result<BaseCoordinate<T>> {
        Ok(BaseCoordinate::Radius(givens_section(expect_r3(p)?)?.0))
    }
    fn section(&self, b: &BaseCoordinate<T>) -> Result<Point<T>> {
        match b {
            BaseCoordinate::Radius(r) if *r > T::lit(ORIGIN_TOL) => Ok(Point::R3(Vector3::x() * *r)),
            BaseCoordinate::Radius(r) => Err(Error::ExcludedOrigin { norm: r.as_f64() }),
            _ => Err(Error::InvalidArgument("sphere section expects a radius".into())),
        }
    }
    fn fiber_of(&self, p: &Point<T>) -> Result<GroupElement<T>> {
        Ok(givens_section(expect_r3(p)?)?.1)
    }
    fn split(&self, p: &Point<T>, v: &DVector<T>) -> Option<Result<Reduction<T>>> {
        Some((|| {
            check_len(v, 3)?;
            let (hor, ver) = sphere_split(expect_r3(p)?, &Vector3::new(v[0], v[1], v[2]))?;
            Ok(Reduction {
                base_rate: DVector::from_vec(vec![hor, T::zero(), T::zero()]),
                fiber_rate: AlgebraElement::so3(ver),
            })
        })())
    }
}

/// The SLAM bundle: section `(I, S⁻¹L̄₁, …)`, fiber `S`.
#[derive(Debug, Clone)]
pub struct SlamSection {
    action: SlamAction,
    count: usize,
}

impl SlamSection {
    pub fn new(count: usize) -> Self {
        Self {
            action: SlamAction::new(count),
            count,
        }
    }
}

fn slam_tangent_parts<T: Real>(v: &DVector<T>, count: usize) -> Result<(Matrix4<T>, Vec<Vector4<T>>)> {
    check_len(v, 16 + 4 * count)?;
    let pose = Matrix4::from_column_slice(&v.as_slice()[..16]);
    let lm = (0..count)
        .map(|i| Vector4::from_column_slice(&v.as_slice()[16 + 4 * i..20 + 4 * i]))
        .collect();
    Ok((pose, lm))
}

impl<T: Real> CrossSection<T> for SlamSection {
    fn name(&self) -> &str {
        "slam-body-frame"
    }
    fn action(&self) -> &dyn GroupAction<T> {
        &self.action
    }
    fn base_of(&self, p: &Point<T>) -> Result<BaseCoordinate<T>> {
        let s = expect_slam(p, "slam-section")?;
        check_len(&p.flatten(), 16 + 4 * self.count)?;
        Ok(BaseCoordinate::Landmarks(s.body_landmarks()))
    }
    fn section(&self, b: &BaseCoordinate<T>) -> Result<Point<T>> {
        match b {
            BaseCoordinate::Landmarks(l) if l.len() == self.count => Ok(Point::Slam(SlamState::from_homogeneous(
                GroupElement::identity(GroupKind::Se3),
                l.clone(),
            )?)),
            BaseCoordinate::Landmarks(l) => Err(Error::SizeMismatch {
                left: self.count,
                right: l.len(),
            }),
            _ => Err(Error::InvalidArgument(
                "slam section expects body-frame landmarks".into(),
            )),
        }
    }
    fn fiber_of(&self, p: &Point<T>) -> Result<GroupElement<T>> {
        Ok(expect_slam(p, "slam-section")?.pose().clone())
    }
    fn split(&self, p: &Point<T>, v: &DVector<T>) -> Option<Result<Reduction<T>>> {
        Some((|| {
            let s = expect_slam(p, "slam-section")?;
            let (pose_rate, lm_rates) = slam_tangent_parts(v, self.count)?;
            let inv = s.pose().inverse().to_homogeneous();
            let body = inv * pose_rate;
            let fiber_rate = body_to_algebra(&DMatrix::from_column_slice(4, 4, body.as_slice()), GroupKind::Se3);
            // d/dt (S⁻¹ L̄ᵢ) = −V S⁻¹ L̄ᵢ + S⁻¹ L̄̇ᵢ
            let mut base_rate = DVector::zeros(16 + 4 * self.count);
            let v_hat = fiber_rate.hat4();
            for (i, (l, ldot)) in s.body_landmarks().iter().zip(&lm_rates).enumerate() {
                let rate = -(v_hat * l) + inv * ldot;
                base_rate.fixed_rows_mut::<4>(16 + 4 * i).copy_from(&rate);
            }
            Ok(Reduction { base_rate, fiber_rate })
        })())
    }
}

/// Decomposes a SLAM state along [`SlamSection`].
pub fn slam_section<T: Real>(p: &Point<T>) -> Result<BundlePoint<T>> {
    let n = expect_slam(p, "slam-section")?.len();
    SlamSection::new(n).decompose(p)
}

/// Section of the pose-augmented SLAM output `(S, l̄ᵢ)` under
/// [`SlamPoseAction`]: section `(I, l̄ᵢ)`, fiber `S`.
#[derive(Debug, Clone)]
pub struct PoseSection {
    action: SlamPoseAction,
    count: usize,
}

impl PoseSection {
    pub fn new(count: usize) -> Self {
        Self {
            action: SlamPoseAction::new(count),
            count,
        }
    }
}

impl<T: Real> CrossSection<T> for PoseSection {
    fn name(&self) -> &str {
        "slam-pose"
    }
    fn action(&self) -> &dyn GroupAction<T> {
        &self.action
    }
    fn base_of(&self, p: &Point<T>) -> Result<BaseCoordinate<T>> {
        let s = expect_slam(p, "pose-section")?;
        Ok(BaseCoordinate::Landmarks(s.landmarks().to_vec()))
    }
    fn section(&self, b: &BaseCoordinate<T>) -> Result<Point<T>> {
        SlamSection::new(self.count).section(b)
    }
    fn fiber_of(&self, p: &Point<T>) -> Result<GroupElement<T>> {
        Ok(expect_slam(p, "pose-section")?.pose().clone())
    }
}

/// A group acting on itself by left translation: one orbit, section `I`, fiber `g`.
#[derive(Debug, Clone)]
pub struct GroupSection {
    action: GroupTranslation,
    kind: GroupKind,
}

impl GroupSection {
    pub fn new(kind: GroupKind) -> Self {
        Self {
            action: GroupTranslation::new(kind, Handedness::Left),
            kind,
        }
    }
}

impl<T: Real> CrossSection<T> for GroupSection {
    fn name(&self) -> &str {
        "group-identity"
    }
    fn action(&self) -> &dyn GroupAction<T> {
        &self.action
    }
    fn base_of(&self, p: &Point<T>) -> Result<BaseCoordinate<T>> {
        self.fiber_of(p)?;
        Ok(BaseCoordinate::Point(Point::Group(GroupElement::identity(self.kind))))
    }
    fn section(&self, b: &BaseCoordinate<T>) -> Result<Point<T>> {
        match b {
            BaseCoordinate::Point(p @ Point::Group(_)) => Ok(p.clone()),
            _ => Err(Error::InvalidArgument("group section expects a group point".into())),
        }
    }
    fn fiber_of(&self, p: &Point<T>) -> Result<GroupElement<T>> {
        match p {
            Point::Group(g) if g.kind() == self.kind => Ok(g.clone()),
            other => Err(Error::PointKind {
                action: "group-section".into(),
                got: other.kind().to_string(),
            }),
        }
    }
    fn split(&self, p: &Point<T>, v: &DVector<T>) -> Option<Result<Reduction<T>>> {
        Some((|| {
            let g = self.fiber_of(p)?;
            let n = self.kind.matrix_dim();
            check_len(v, n * n)?;
            let body = g.inverse().matrix() * DMatrix::from_column_slice(n, n, v.as_slice());
            Ok(Reduction {
                base_rate: DVector::zeros(n * n),
                fiber_rate: body_to_algebra(&body, self.kind),
            })
        })())
    }
}

/// Output map used to build an [`AssociatedSection`].
pub type OutputMap<T> = Box<dyn Fn(&Point<T>) -> Result<Point<T>> + Send + Sync>;

/// `σ_PY([p]) = O(p) ∩ H⁻¹(σ_Y([H(p)]))`, with `γ_PY(p) = γ_Y(H(p))`.
pub struct AssociatedSection<T: Real> {
    name: String,
    state_action: Box<dyn GroupAction<T>>,
    output: OutputMap<T>,
    output_section: Box<dyn CrossSection<T>>,
}

/// Samples used to certify an output map in [`associated_section_from_output`].
pub const ASSOCIATION_SAMPLES: usize = 100;

/// Builds the cross-section on `P` induced by an equivariant output `H`
/// and a section `σ_Y` of the output space.
///
/// `H` is checked on seeded samples to be equivariant (residual ≤ 1e-8) and
/// one-to-one on fibers: `H(g · p) = H(p)` must imply `g · p = p`.
pub fn associated_section_from_output<T: Real>(
    state_action: Box<dyn GroupAction<T>>,
    output: OutputMap<T>,
    output_section: Box<dyn CrossSection<T>>,
    seed: u64,
) -> Result<AssociatedSection<T>> {
    let out_action = output_section.action();
    if out_action.group_kind() != state_action.group_kind() {
        return Err(Error::KindMismatch {
            expected: state_action.group_kind(),
            got: out_action.group_kind(),
        });
    }
    if out_action.handedness() != state_action.handedness() {
        return Err(Error::InvalidArgument(
            "state and output actions differ in handedness".into(),
        ));
    }
    let mut r = rng(seed);
    for sample in 0..ASSOCIATION_SAMPLES {
        let p = random_point::<T>(&mut r, state_action.point_kind());
        let g = random_group(&mut r, state_action.group_kind());
        let moved = state_action.apply(&g, &p)?;
        let y = output(&p)?;
        let output_gap = output(&moved)?.distance(&y)?;
        let state_gap = moved.distance(&p)?;
        let scale = T::one() + y.flatten().norm();
        if output_gap <= T::lit(1e-9) * scale && state_gap > T::lit(1e-6) {
            return Err(Error::NotFiberInjective { sample });
        }
    }
    let residual = check_equivariance_output(&output, state_action.as_ref(), out_action, ASSOCIATION_SAMPLES, seed)?;
    if !(residual <= T::lit(1e-8)) {
        return Err(Error::NotEquivariant {
            residual: residual.as_f64(),
        });
    }
    Ok(AssociatedSection {
        name: format!("associated({})", output_section.name()),
        state_action,
        output,
        output_section,
    })
}

impl<T: Real> AssociatedSection<T> {
    /// `H(p)`.
    pub fn output(&self, p: &Point<T>) -> Result<Point<T>> {
        (self.output)(p)
    }
}

impl<T: Real> CrossSection<T> for AssociatedSection<T> {
    fn name(&self) -> &str {
        &self.name
    }
    fn action(&self) -> &dyn GroupAction<T> {
        self.state_action.as_ref()
    }
    fn base_of(&self, p: &Point<T>) -> Result<BaseCoordinate<T>> {
        let g = self.fiber_of(p)?;
        Ok(BaseCoordinate::Point(displace(self.action(), &g.inverse(), p)?))
    }
    fn section(&self, b: &BaseCoordinate<T>) -> Result<Point<T>> {
        match b {
            BaseCoordinate::Point(p) => Ok(p.clone()),
            _ => Err(Error::InvalidArgument(
                "associated section expects a section point".into(),
            )),
        }
    }
    fn fiber_of(&self, p: &Point<T>) -> Result<GroupElement<T>> {
        self.output_section.fiber_of(&(self.output)(p)?)
    }
}

/// Largest residuals of the cross-section laws over seeded samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionResiduals<T: Real> {
    /// `π(σ(b)) = b`.
    pub section_identity: T,
    /// `γ(p) · σ([p]) = p`.
    pub reconstruction: T,
    /// `π(g · p) = π(p)`.
    pub orbit_invariance: T,
    /// `γ(h · p) = h γ(p)` modulo isotropy, compared on the section point.
    pub fiber_equivariance: T,
}

impl<T: Real> SectionResiduals<T> {
    pub fn max(&self) -> T {
        self.section_identity
            .max(self.reconstruction)
            .max(self.orbit_invariance)
            .max(self.fiber_equivariance)
    }
}

pub fn check_cross_section<T: Real>(
    sec: &dyn CrossSection<T>,
    samples: usize,
    seed: u64,
) -> Result<SectionResiduals<T>> {
    if samples == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let action = sec.action();
    let mut r = rng(seed);
    let mut out = SectionResiduals {
        section_identity: T::zero(),
        reconstruction: T::zero(),
        orbit_invariance: T::zero(),
        fiber_equivariance: T::zero(),
    };
    for _ in 0..samples {
        let p = random_point::<T>(&mut r, action.point_kind());
        let h = random_group(&mut r, action.group_kind());
        let b = sec.base_of(&p)?;
        out.section_identity = out.section_identity.max(sec.base_of(&sec.section(&b)?)?.distance(&b)?);
        out.reconstruction = out
            .reconstruction
            .max(sec.reconstruct(&b, &sec.fiber_of(&p)?)?.distance(&p)?);
        let moved = displace(action, &h, &p)?;
        let moved_base = sec.base_of(&moved)?;
        out.orbit_invariance = out.orbit_invariance.max(moved_base.distance(&b)?);
        let expected = &h * &sec.fiber_of(&p)?;
        let lhs = sec.reconstruct(&moved_base, &sec.fiber_of(&moved)?)?;
        let rhs = sec.reconstruct(&moved_base, &expected)?;
        out.fiber_equivariance = out.fiber_equivariance.max(lhs.distance(&rhs)?);
    }
    Ok(out)
}

/// Splits the velocity `X(p, u)` into base and fiber rates.
///
/// Uses the section's closed form when it has one, else central
/// differences of `π` and `γ` along the curve `p.retract(X, s)`.
pub fn reduce_system<T, U, F>(field: &F, sec: &dyn CrossSection<T>, p: &Point<T>, u: &U) -> Result<Reduction<T>>
where
    T: Real,
    F: Fn(&Point<T>, &U) -> Result<DVector<T>>,
{
    let v = field(p, u)?;
    split_tangent(sec, p, &v)
}

/// Base/fiber split of a tangent vector `v` at `p`.
pub fn split_tangent<T: Real>(sec: &dyn CrossSection<T>, p: &Point<T>, v: &DVector<T>) -> Result<Reduction<T>> {
    if let Some(closed) = sec.split(p, v) {
        return closed;
    }
    let h = T::lit(SPLIT_STEP);
    let two_h = h + h;
    let plus = p.retract(v, h)?;
    let minus = p.retract(v, -h)?;
    let section_point = |q: &Point<T>| -> Result<DVector<T>> { Ok(sec.section(&sec.base_of(q)?)?.flatten()) };
    let base_rate = (section_point(&plus)? - section_point(&minus)?) / two_h;
    let g_inv = sec.fiber_of(p)?.inverse();
    let fp = log(&(&g_inv * &sec.fiber_of(&plus)?))?;
    let fm = log(&(&g_inv * &sec.fiber_of(&minus)?))?;
    Ok(Reduction {
        base_rate,
        fiber_rate: (fp - fm).scale(T::one() / two_h),
    })
}

/// An equivariant vector field paired with a cross-section, certified at construction.
pub struct ReducedSystem<'a, T: Real, U, F> {
    field: F,
    section: &'a dyn CrossSection<T>,
    residual: T,
    _input: std::marker::PhantomData<fn(&U)>,
}

/// Equivariance residual above which [`ReducedSystem::new`] refuses a field.
pub const REDUCTION_TOL: f64 = 1e-8;

impl<'a, T, U, F> ReducedSystem<'a, T, U, F>
where
    T: Real,
    F: Fn(&Point<T>, &U) -> Result<DVector<T>>,
{
    /// Checks `X` for equivariance on `samples` seeded draws before accepting it.
    pub fn new<Psi, S>(
        field: F,
        section: &'a dyn CrossSection<T>,
        input_action: Psi,
        sample_input: S,
        samples: usize,
        seed: u64,
    ) -> Result<Self>
    where
        Psi: Fn(&GroupElement<T>, &U) -> U,
        S: FnMut(&mut crate::random::SampleRng) -> U,
    {
        let residual =
            crate::actions::check_equivariance_vf(&field, section.action(), input_action, sample_input, samples, seed)?;
        if !(residual <= T::lit(REDUCTION_TOL)) {
            return Err(Error::NotEquivariant {
                residual: residual.as_f64(),
            });
        }
        Ok(Self {
            field,
            section,
            residual,
            _input: std::marker::PhantomData,
        })
    }

    pub fn residual(&self) -> T {
        self.residual
    }

    pub fn rates(&self, p: &Point<T>, u: &U) -> Result<Reduction<T>> {
        reduce_system(&self.field, self.section, p, u)
    }
}

/// Point kinds with a registered cross-section in this module.
pub fn registered_sections<T: Real>(landmarks: usize) -> Vec<(PointKind, Box<dyn CrossSection<T>>)> {
    vec![
        (PointKind::R3, Box::new(SphereSection::new())),
        (PointKind::Slam(landmarks), Box::new(SlamSection::new(landmarks))),
        (
            PointKind::Group(GroupKind::So3),
            Box::new(GroupSection::new(GroupKind::So3)),
        ),
        (
            PointKind::Group(GroupKind::Se3),
            Box::new(GroupSection::new(GroupKind::Se3)),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::skew;
    use crate::random::{random_se3, random_vector3};

    #[test]
    fn givens_examples() {
        let (r, rot) = givens_section(&Vector3::<f64>::new(5.0, 0.0, 0.0)).unwrap();
        assert_eq!(r, 5.0);
        assert_eq!(rot, GroupElement::identity(GroupKind::So3));
        let (r, rot) = givens_section(&Vector3::<f64>::new(3.0, 4.0, 0.0)).unwrap();
        assert!((r - 5.0).abs() < 1e-15);
        assert!((rot.rotation() * Vector3::x() - Vector3::new(0.6, 0.8, 0.0)).norm() < 1e-12);
        let (r, rot) = givens_section(&Vector3::<f64>::new(0.0, 0.0, -2.0)).unwrap();
        assert!((r - 2.0).abs() < 1e-15);
        assert!((rot.rotation() * Vector3::x() + Vector3::z()).norm() < 1e-12);
        assert!(matches!(
            givens_section(&Vector3::<f64>::zeros()),
            Err(Error::ExcludedOrigin { .. })
        ));
    }

    #[test]
    fn givens_reconstructs_random_points() {
        let mut r = rng(11);
        for _ in 0..1000 {
            let q: Vector3<f64> = random_vector3(&mut r, 3.0);
            let (rad, rot) = givens_section(&q).unwrap();
            assert!((q - rot.rotation() * Vector3::x() * rad).norm() <= 1e-12 * (1.0 + rad));
            assert!(rot.orthogonality_defect() <= 1e-12);
            assert!(rot.rotation().determinant() > 0.0);
        }
    }

    #[test]
    fn sphere_split_examples() {
        let q = Vector3::<f64>::new(1.0, 2.0, -0.5);
        let (hor, ver) = sphere_split(&q, &q.normalize()).unwrap();
        assert!((hor - 1.0).abs() < 1e-12 && ver.norm() < 1e-12);
        let (hor, ver) = sphere_split::<f64>(&Vector3::x(), &Vector3::y()).unwrap();
        assert!(hor.abs() < 1e-15);
        assert!((ver.cross(&Vector3::x()) - Vector3::y()).norm() < 1e-15);
        let mut r = rng(12);
        for _ in 0..100 {
            let q: Vector3<f64> = random_vector3(&mut r, 2.0);
            let v: Vector3<f64> = random_vector3(&mut r, 2.0);
            let (rad, rot) = givens_section(&q).unwrap();
            let (hor, ver) = sphere_split(&q, &v).unwrap();
            assert_eq!(ver.x, 0.0);
            let rebuilt = rot.rotation() * Vector3::x() * hor + rot.rotation() * skew(&ver) * Vector3::x() * rad;
            assert!((rebuilt - v).norm() < 1e-10);
        }
    }

    #[test]
    fn registered_sections_satisfy_laws() {
        for (_, sec) in registered_sections::<f64>(4) {
            let res = check_cross_section(sec.as_ref(), 100, 42).unwrap();
            assert!(res.section_identity <= 1e-12, "{}: {res:?}", sec.name());
            assert!(res.reconstruction <= 1e-10, "{}: {res:?}", sec.name());
            assert!(res.orbit_invariance <= 1e-10, "{}: {res:?}", sec.name());
            assert!(res.fiber_equivariance <= 1e-10, "{}: {res:?}", sec.name());
        }
    }

    #[test]
    fn slam_section_examples() {
        let mut r = rng(13);
        let lms: Vec<Vector3<f64>> = (0..4).map(|_| random_vector3(&mut r, 2.0)).collect();
        let p = Point::Slam(SlamState::new(GroupElement::identity(GroupKind::Se3), &lms).unwrap());
        let bp = slam_section(&p).unwrap();
        assert_eq!(bp.fiber, GroupElement::identity(GroupKind::Se3));
        assert!(SlamSection::new(4).section(&bp.base).unwrap().distance(&p).unwrap() < 1e-15);

        let p = Point::Slam(SlamState::new(random_se3(&mut r, 1.0), &lms).unwrap());
        let bp = slam_section(&p).unwrap();
        let sec = SlamSection::new(4);
        assert!(sec.reconstruct(&bp.base, &bp.fiber).unwrap().distance(&p).unwrap() < 1e-12);
        let g = random_se3(&mut r, 1.0);
        let moved = SlamAction::new(4).apply(&g, &p).unwrap();
        assert!(slam_section(&moved).unwrap().base.distance(&bp.base).unwrap() < 1e-12);
    }

    fn pose_augmented(p: &Point<f64>) -> Result<Point<f64>> {
        let s = expect_slam(p, "pose-augmented")?;
        Ok(Point::Slam(SlamState::from_homogeneous(
            s.pose().clone(),
            s.body_landmarks(),
        )?))
    }

    #[test]
    fn associated_section_reproduces_slam_section() {
        let assoc = associated_section_from_output::<f64>(
            Box::new(SlamAction::new(4)),
            Box::new(pose_augmented),
            Box::new(PoseSection::new(4)),
            7,
        )
        .unwrap();
        let sec = SlamSection::new(4);
        let mut r = rng(14);
        for _ in 0..100 {
            let p = random_point::<f64>(&mut r, PointKind::Slam(4));
            assert!(assoc.fiber_of(&p).unwrap().distance(&sec.fiber_of(&p).unwrap()) < 1e-12);
            let a = assoc.section(&assoc.base_of(&p).unwrap()).unwrap();
            let b = sec.section(&sec.base_of(&p).unwrap()).unwrap();
            assert!(a.distance(&b).unwrap() < 1e-12);
        }
        let res = check_cross_section(&assoc, 50, 3).unwrap();
        assert!(res.max() < 1e-10, "{res:?}");
    }

    #[test]
    fn associated_section_with_identity_output_is_output_section() {
        let assoc = associated_section_from_output::<f64>(
            Box::new(SlamPoseAction::new(3)),
            Box::new(|p: &Point<f64>| Ok(p.clone())),
            Box::new(PoseSection::new(3)),
            8,
        )
        .unwrap();
        let sec = PoseSection::new(3);
        let mut r = rng(15);
        for _ in 0..20 {
            let p = random_point::<f64>(&mut r, PointKind::Slam(3));
            assert_eq!(assoc.fiber_of(&p).unwrap(), sec.fiber_of(&p).unwrap());
            let a = assoc.section(&assoc.base_of(&p).unwrap()).unwrap();
            assert!(a.distance(&sec.section(&sec.base_of(&p).unwrap()).unwrap()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn associated_section_rejects_bad_outputs() {
        let constant = associated_section_from_output::<f64>(
            Box::new(GroupTranslation::new(GroupKind::So3, Handedness::Left)),
            Box::new(|_: &Point<f64>| Ok(Point::Group(GroupElement::identity(GroupKind::So3)))),
            Box::new(GroupSection::new(GroupKind::So3)),
            9,
        );
        assert!(matches!(constant, Err(Error::NotFiberInjective { sample: 0 })));
        // the bare landmark output is invariant, hence blind to the fiber
        let bare = associated_section_from_output::<f64>(
            Box::new(SlamAction::new(4)),
            Box::new(|p: &Point<f64>| {
                let s = expect_slam(p, "bare")?;
                Ok(Point::Slam(SlamState::from_homogeneous(
                    GroupElement::identity(GroupKind::Se3),
                    s.body_landmarks(),
                )?))
            }),
            Box::new(PoseSection::new(4)),
            9,
        );
        assert!(matches!(bare, Err(Error::NotFiberInjective { .. })));
    }

    #[test]
    fn generic_split_matches_closed_forms() {
        let mut r = rng(16);
        let slam = SlamSection::new(3);
        let assoc = associated_section_from_output::<f64>(
            Box::new(SlamAction::new(3)),
            Box::new(pose_augmented),
            Box::new(PoseSection::new(3)),
            10,
        )
        .unwrap();
        for _ in 0..20 {
            let p = random_point::<f64>(&mut r, PointKind::Slam(3));
            let v = DVector::from_iterator(28, (0..28).map(|_| random_vector3::<f64>(&mut r, 1.0).x));
            // keep the pose rate tangent to SE(3) and the landmark rates homogeneous
            let xi = crate::random::random_algebra::<f64>(&mut r, GroupKind::Se3, 1.0);
            let Point::Slam(s) = &p else { unreachable!() };
            let mut v = v;
            v.rows_mut(0, 16)
                .copy_from_slice((s.pose().to_homogeneous() * xi.hat4()).as_slice());
            for i in 0..3 {
                v[16 + 4 * i + 3] = 0.0;
            }
            let closed = split_tangent(&slam, &p, &v).unwrap();
            let numeric = split_tangent(&assoc, &p, &v).unwrap();
            assert!((closed.base_rate - numeric.base_rate).norm() < 1e-7);
            assert!((closed.fiber_rate.clone() - numeric.fiber_rate).norm() < 1e-7);
            assert!((closed.fiber_rate - xi).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_field_reduces_to_zero() {
        let sec = SphereSection::new();
        let rates = reduce_system(
            &|_: &Point<f64>, _: &()| Ok(DVector::zeros(3)),
            &sec,
            &Point::R3(Vector3::new(1.0, 2.0, 3.0)),
            &(),
        )
        .unwrap();
        assert_eq!(rates.base_rate.norm(), 0.0);
        assert_eq!(rates.fiber_rate.norm(), 0.0);
    }
}
