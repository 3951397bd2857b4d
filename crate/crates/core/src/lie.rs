//! SO(3) and SE(3) as matrix Lie groups.
//!
//! Group elements are stored as a rotation block plus a translation (zero for
//! SO(3)); the full matrix is available through [`GroupElement::matrix`].
//! Algebra coordinates are the rotation vector for so(3) and
//! `(linear, angular)` for se(3), so the se(3) hat matrix is
//!
//! ```text
//! | ω×  v |
//! | 0   0 |
//! ```

use nalgebra::{DMatrix, DVector, Matrix3, Matrix4, Vector3};
use std::ops::{Add, Mul, Neg, Sub};

use crate::{Error, Real, Result};

/// Series fallback below this rotation angle.
const SMALL_ANGLE: f64 = 1e-6;
/// `log` refuses angles closer than this to pi.
const PI_BAND: f64 = 1e-7;
/// Above `pi - NEAR_PI` the rotation axis is read from the symmetric part.
const NEAR_PI: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupKind {
    So3,
    Se3,
}

impl GroupKind {
    /// Dimension of the Lie algebra.
    pub fn dim(self) -> usize {
        match self {
            GroupKind::So3 => 3,
            GroupKind::Se3 => 6,
        }
    }

    /// Side length of the matrix representation.
    pub fn matrix_dim(self) -> usize {
        match self {
            GroupKind::So3 => 3,
            GroupKind::Se3 => 4,
        }
    }

    fn expect(self, got: GroupKind) -> Result<()> {
        if self == got {
            Ok(())
        } else {
            Err(Error::KindMismatch { expected: self, got })
        }
    }
}

/// Skew-symmetric matrix of `v`, so that `skew(v) * w == v.cross(w)`.
#[inline]
pub fn skew<T: Real>(v: &Vector3<T>) -> Matrix3<T> {
    let z = T::zero();
    Matrix3::new(z, -v.z, v.y, v.z, z, -v.x, -v.y, v.x, z)
}

/// Inverse of [`skew`]; reads the lower-triangular entries.
#[inline]
pub fn unskew<T: Real>(m: &Matrix3<T>) -> Vector3<T> {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// An element of SO(3) or SE(3).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement<T: Real> {
    kind: GroupKind,
    rotation: Matrix3<T>,
    translation: Vector3<T>,
}

impl<T: Real> GroupElement<T> {
    pub fn identity(kind: GroupKind) -> Self {
        Self {
            kind,
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Validated rotation.
    pub fn so3(rotation: Matrix3<T>) -> Result<Self> {
        check_rotation(&rotation)?;
        Ok(Self::from_parts_unchecked(GroupKind::So3, rotation, Vector3::zeros()))
    }

    /// Validated rigid transform `x ↦ R x + t`.
    pub fn se3(rotation: Matrix3<T>, translation: Vector3<T>) -> Result<Self> {
        check_rotation(&rotation)?;
        Ok(Self::from_parts_unchecked(GroupKind::Se3, rotation, translation))
    }

    /// Validated element from a 3×3 (SO3) or homogeneous 4×4 (SE3) matrix.
    pub fn from_matrix(m: &DMatrix<T>, kind: GroupKind) -> Result<Self> {
        let n = kind.matrix_dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension {
                expected: format!("{n}x{n}"),
                got: m.nrows() * m.ncols(),
            });
        }
        let rotation: Matrix3<T> = m.fixed_view::<3, 3>(0, 0).into_owned();
        match kind {
            GroupKind::So3 => Self::so3(rotation),
            GroupKind::Se3 => {
                let z = T::zero();
                if m[(3, 0)] != z || m[(3, 1)] != z || m[(3, 2)] != z || m[(3, 3)] != T::one() {
                    return Err(Error::NotInGroup(
                        "bottom row of a homogeneous matrix must be (0, 0, 0, 1)".into(),
                    ));
                }
                Self::se3(rotation, m.fixed_view::<3, 1>(0, 3).into_owned())
            }
        }
    }

    pub(crate) fn from_parts_unchecked(kind: GroupKind, rotation: Matrix3<T>, translation: Vector3<T>) -> Self {
        Self {
            kind,
            rotation,
            translation,
        }
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn rotation(&self) -> &Matrix3<T> {
        &self.rotation
    }

    /// Zero for SO(3).
    pub fn translation(&self) -> &Vector3<T> {
        &self.translation
    }

    /// Homogeneous 4×4 form; SO(3) elements are embedded with zero translation.
    pub fn to_homogeneous(&self) -> Matrix4<T> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// Matrix in the natural size for the kind (3×3 or 4×4).
    pub fn matrix(&self) -> DMatrix<T> {
        match self.kind {
            GroupKind::So3 => DMatrix::from_iterator(3, 3, self.rotation.iter().copied()),
            GroupKind::Se3 => {
                let h = self.to_homogeneous();
                DMatrix::from_iterator(4, 4, h.iter().copied())
            }
        }
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        let t = -(rt * self.translation);
        Self::from_parts_unchecked(self.kind, rt, t)
    }

    /// Group product `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.kind.expect(other.kind)?;
        Ok(self.compose_unchecked(other))
    }

    fn compose_unchecked(&self, other: &Self) -> Self {
        Self::from_parts_unchecked(
            self.kind,
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    /// Acts on a point of R³: `R x + t`.
    pub fn transform_point(&self, x: &Vector3<T>) -> Vector3<T> {
        self.rotation * x + self.translation
    }

    /// Rotation angle in `[0, pi]`.
    pub fn angle(&self) -> T {
        rotation_angle(&self.rotation)
    }

    /// `‖RᵀR − I‖_F`.
    pub fn orthogonality_defect(&self) -> T {
        (self.rotation.transpose() * self.rotation - Matrix3::identity()).norm()
    }

    /// Frobenius distance between the matrix forms.
    pub fn distance(&self, other: &Self) -> T {
        (self.to_homogeneous() - other.to_homogeneous()).norm()
    }
}

impl<T: Real> Mul for &GroupElement<T> {
    type Output = GroupElement<T>;

    /// Panics on a kind mismatch; use [`GroupElement::compose`] to get an error instead.
    fn mul(self, rhs: Self) -> GroupElement<T> {
        assert_eq!(self.kind, rhs.kind, "group kind mismatch in product");
        self.compose_unchecked(rhs)
    }
}

impl<T: Real> Mul for GroupElement<T> {
    type Output = GroupElement<T>;
    fn mul(self, rhs: Self) -> GroupElement<T> {
        &self * &rhs
    }
}

fn check_rotation<T: Real>(r: &Matrix3<T>) -> Result<()> {
    let defect = (r.transpose() * r - Matrix3::identity()).norm();
    if !(defect <= T::membership_tol()) {
        return Err(Error::NotInGroup(format!(
            "‖RᵀR − I‖ = {:e} exceeds tolerance",
            defect.as_f64()
        )));
    }
    if !(r.determinant() > T::zero()) {
        return Err(Error::NotInGroup("rotation determinant is not positive".into()));
    }
    Ok(())
}

fn rotation_angle<T: Real>(r: &Matrix3<T>) -> T {
    let two = T::lit(2.0);
    let sin_part = unskew(&(r - r.transpose())).norm() / two;
    let cos_part = (r.trace() - T::one()) / two;
    sin_part.atan2(cos_part)
}

/// A Lie algebra element in coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement<T: Real> {
    kind: GroupKind,
    linear: Vector3<T>,
    angular: Vector3<T>,
}

impl<T: Real> AlgebraElement<T> {
    pub fn zero(kind: GroupKind) -> Self {
        Self {
            kind,
            linear: Vector3::zeros(),
            angular: Vector3::zeros(),
        }
    }

    pub fn so3(angular: Vector3<T>) -> Self {
        Self {
            kind: GroupKind::So3,
            linear: Vector3::zeros(),
            angular,
        }
    }

    pub fn se3(linear: Vector3<T>, angular: Vector3<T>) -> Self {
        Self {
            kind: GroupKind::Se3,
            linear,
            angular,
        }
    }

    /// Length 3 gives so(3), length 6 gives se(3) as `(linear, angular)`.
    pub fn from_coords(v: &[T]) -> Result<Self> {
        match v.len() {
            3 => Ok(Self::so3(Vector3::new(v[0], v[1], v[2]))),
            6 => Ok(Self::se3(
                Vector3::new(v[0], v[1], v[2]),
                Vector3::new(v[3], v[4], v[5]),
            )),
            n => Err(Error::Dimension {
                expected: "3 or 6".into(),
                got: n,
            }),
        }
    }

    /// Coordinates in the fixed basis of the kind.
    pub fn from_coords_of(kind: GroupKind, v: &[T]) -> Result<Self> {
        if v.len() != kind.dim() {
            return Err(Error::Dimension {
                expected: kind.dim().to_string(),
                got: v.len(),
            });
        }
        Self::from_coords(v)
    }

    /// The `i`-th basis element.
    pub fn basis(kind: GroupKind, i: usize) -> Self {
        let mut c = vec![T::zero(); kind.dim()];
        c[i] = T::one();
        Self::from_coords(&c).expect("basis index in range")
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    /// Zero for so(3).
    pub fn linear(&self) -> &Vector3<T> {
        &self.linear
    }

    pub fn angular(&self) -> &Vector3<T> {
        &self.angular
    }

    pub fn coords(&self) -> DVector<T> {
        match self.kind {
            GroupKind::So3 => DVector::from_column_slice(self.angular.as_slice()),
            GroupKind::Se3 => DVector::from_iterator(6, self.linear.iter().chain(self.angular.iter()).copied()),
        }
    }

    /// Matrix form (3×3 antisymmetric, or the 4×4 twist matrix).
    pub fn hat(&self) -> DMatrix<T> {
        let h = self.hat4();
        match self.kind {
            GroupKind::So3 => DMatrix::from_iterator(3, 3, h.fixed_view::<3, 3>(0, 0).iter().copied()),
            GroupKind::Se3 => DMatrix::from_iterator(4, 4, h.iter().copied()),
        }
    }

    /// 4×4 form with so(3) embedded in the rotation block.
    pub fn hat4(&self) -> Matrix4<T> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&skew(&self.angular));
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.linear);
        m
    }

    /// Euclidean norm of the coordinates.
    pub fn norm(&self) -> T {
        (self.linear.norm_squared() + self.angular.norm_squared()).sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            kind: self.kind,
            linear: self.linear * s,
            angular: self.angular * s,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.linear.iter().chain(self.angular.iter()).all(|x| x.is_finite())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.kind.expect(other.kind)?;
        Ok(Self {
            kind: self.kind,
            linear: self.linear + other.linear,
            angular: self.angular + other.angular,
        })
    }
}

impl<T: Real> Add for AlgebraElement<T> {
    type Output = Self;
    /// Panics on a kind mismatch.
    fn add(self, rhs: Self) -> Self {
        self.checked_add(&rhs).expect("algebra kind mismatch in sum")
    }
}

impl<T: Real> Sub for AlgebraElement<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Real> Neg for AlgebraElement<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

/// Coordinates to algebra element; the length picks the kind.
pub fn hat<T: Real>(v: &[T]) -> Result<AlgebraElement<T>> {
    AlgebraElement::from_coords(v)
}

/// Reads an algebra element back from its 3×3 or 4×4 matrix form.
pub fn vee<T: Real>(m: &DMatrix<T>) -> Result<AlgebraElement<T>> {
    match (m.nrows(), m.ncols()) {
        (3, 3) => Ok(AlgebraElement::so3(Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)]))),
        (4, 4) => Ok(AlgebraElement::se3(
            Vector3::new(m[(0, 3)], m[(1, 3)], m[(2, 3)]),
            Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)]),
        )),
        (r, c) => Err(Error::Dimension {
            expected: "3x3 or 4x4".into(),
            got: r * c,
        }),
    }
}

/// Coefficients `(sin θ/θ, (1 − cos θ)/θ², (θ − sin θ)/θ³)` with series near zero.
fn exp_coefficients<T: Real>(theta: T) -> (T, T, T) {
    let t2 = theta * theta;
    if theta < T::lit(SMALL_ANGLE) {
        let t4 = t2 * t2;
        (
            T::one() - t2 / T::lit(6.0) + t4 / T::lit(120.0),
            T::lit(0.5) - t2 / T::lit(24.0) + t4 / T::lit(720.0),
            T::one() / T::lit(6.0) - t2 / T::lit(120.0) + t4 / T::lit(5040.0),
        )
    } else {
        let half_sin = (theta / T::lit(2.0)).sin();
        (
            theta.sin() / theta,
            T::lit(2.0) * half_sin * half_sin / t2,
            (theta - theta.sin()) / (t2 * theta),
        )
    }
}

/// The exponential map.
pub fn exp<T: Real>(z: &AlgebraElement<T>) -> GroupElement<T> {
    let w = z.angular();
    let theta = w.norm();
    let (a, b, c) = exp_coefficients(theta);
    let k = skew(w);
    let k2 = k * k;
    let rotation = Matrix3::identity() + k * a + k2 * b;
    match z.kind() {
        GroupKind::So3 => GroupElement::from_parts_unchecked(GroupKind::So3, rotation, Vector3::zeros()),
        GroupKind::Se3 => {
            let v = Matrix3::identity() + k * b + k2 * c;
            GroupElement::from_parts_unchecked(GroupKind::Se3, rotation, v * z.linear())
        }
    }
}

fn so3_log<T: Real>(r: &Matrix3<T>) -> Result<Vector3<T>> {
    let two = T::lit(2.0);
    let axis_part = unskew(&(r - r.transpose()));
    let sin_theta = axis_part.norm() / two;
    let cos_theta = (r.trace() - T::one()) / two;
    let theta = sin_theta.atan2(cos_theta);
    let pi = T::pi();
    if pi - theta < T::lit(PI_BAND) {
        return Err(Error::BranchAmbiguity { angle: theta.as_f64() });
    }
    if theta < T::lit(SMALL_ANGLE) {
        let t2 = theta * theta;
        let f = T::lit(0.5) * (T::one() + t2 / T::lit(6.0) + T::lit(7.0) * t2 * t2 / T::lit(360.0));
        return Ok(axis_part * f);
    }
    if pi - theta < T::lit(NEAR_PI) {
        // (R + Rᵀ)/2 − cos θ I = (1 − cos θ) a aᵀ
        let sym = (r + r.transpose()) / two - Matrix3::identity() * cos_theta;
        let scale = T::one() - cos_theta;
        let mut best = 0;
        for i in 1..3 {
            if sym[(i, i)] > sym[(best, best)] {
                best = i;
            }
        }
        let col: Vector3<T> = sym.column(best).into_owned() / scale;
        let mut axis = col / col.norm();
        if axis.dot(&axis_part) < T::zero() {
            axis = -axis;
        }
        return Ok(axis * theta);
    }
    Ok(axis_part * (theta / (two * sin_theta)))
}

/// The principal logarithm.
///
/// Rotations within `1e-7` of a half-turn are rejected with
/// [`Error::BranchAmbiguity`]: the axis sign is undetermined there.
pub fn log<T: Real>(g: &GroupElement<T>) -> Result<AlgebraElement<T>> {
    let w = so3_log(g.rotation())?;
    match g.kind() {
        GroupKind::So3 => Ok(AlgebraElement::so3(w)),
        GroupKind::Se3 => {
            let theta = w.norm();
            let k = skew(&w);
            let d = if theta < T::lit(SMALL_ANGLE) {
                let t2 = theta * theta;
                T::one() / T::lit(12.0) + t2 / T::lit(720.0) + t2 * t2 / T::lit(30240.0)
            } else {
                let (a, b, _) = exp_coefficients(theta);
                (T::one() - a / (T::lit(2.0) * b)) / (theta * theta)
            };
            let v_inv = Matrix3::identity() - k * T::lit(0.5) + k * k * d;
            Ok(AlgebraElement::se3(v_inv * g.translation(), w))
        }
    }
}

/// `Ad_g ζ`, the algebra element whose matrix is `g ζ̂ g⁻¹`.
pub fn adjoint<T: Real>(g: &GroupElement<T>, z: &AlgebraElement<T>) -> Result<AlgebraElement<T>> {
    g.kind().expect(z.kind())?;
    let conj = g.to_homogeneous() * z.hat4() * g.inverse().to_homogeneous();
    let angular = unskew(&conj.fixed_view::<3, 3>(0, 0).into_owned());
    Ok(match z.kind() {
        GroupKind::So3 => AlgebraElement::so3(angular),
        GroupKind::Se3 => AlgebraElement::se3(conj.fixed_view::<3, 1>(0, 3).into_owned(), angular),
    })
}

/// Matrix commutator `[ζ, η] = ζ̂η̂ − η̂ζ̂`.
pub fn bracket<T: Real>(a: &AlgebraElement<T>, b: &AlgebraElement<T>) -> Result<AlgebraElement<T>> {
    a.kind().expect(b.kind())?;
    let (x, y) = (a.hat4(), b.hat4());
    let c = x * y - y * x;
    let angular = unskew(&c.fixed_view::<3, 3>(0, 0).into_owned());
    Ok(match a.kind() {
        GroupKind::So3 => AlgebraElement::so3(angular),
        GroupKind::Se3 => AlgebraElement::se3(c.fixed_view::<3, 1>(0, 3).into_owned(), angular),
    })
}

/// Inner product on the algebra: the coordinate dot product times `scale`.
///
/// For so(3) this is a multiple of the trace form and hence Ad-invariant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metric<T: Real> {
    scale: T,
}

impl<T: Real> Default for Metric<T> {
    fn default() -> Self {
        Self { scale: T::one() }
    }
}

impl<T: Real> Metric<T> {
    pub fn bi_invariant(scale: T) -> Result<Self> {
        if !(scale > T::zero()) || !scale.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "metric scale must be positive, got {}",
                scale
            )));
        }
        Ok(Self { scale })
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn inner(&self, a: &AlgebraElement<T>, b: &AlgebraElement<T>) -> Result<T> {
        a.kind().expect(b.kind())?;
        Ok((a.linear().dot(b.linear()) + a.angular().dot(b.angular())) * self.scale)
    }

    /// Element `ζ` with `⟨⟨ζ, ·⟩⟩` equal to the covector with coordinates `c`.
    pub fn dual(&self, kind: GroupKind, c: &[T]) -> Result<AlgebraElement<T>> {
        let inv = T::one() / self.scale;
        let scaled: Vec<T> = c.iter().map(|&x| x * inv).collect();
        AlgebraElement::from_coords_of(kind, &scaled)
    }
}

/// Nearest group element to a matrix that has drifted off the group.
///
/// The rotation block is replaced by its orthogonal polar factor. A block
/// whose determinant is not positive is rejected: its polar factor is a
/// reflection, so the input is far from the group.
pub fn project_to_group<T: Real>(m: &DMatrix<T>, kind: GroupKind) -> Result<GroupElement<T>> {
    let n = kind.matrix_dim();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::Dimension {
            expected: format!("{n}x{n}"),
            got: m.nrows() * m.ncols(),
        });
    }
    let block: Matrix3<T> = m.fixed_view::<3, 3>(0, 0).into_owned();
    let rotation = orthonormalize(&block)?;
    let translation = match kind {
        GroupKind::So3 => Vector3::zeros(),
        GroupKind::Se3 => m.fixed_view::<3, 1>(0, 3).into_owned(),
    };
    Ok(GroupElement::from_parts_unchecked(kind, rotation, translation))
}

pub(crate) fn orthonormalize<T: Real>(block: &Matrix3<T>) -> Result<Matrix3<T>> {
    let det = block.determinant();
    if !(det > T::zero()) {
        return Err(Error::ProjectionFailure { det: det.as_f64() });
    }
    let svd = block.svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::ProjectionFailure { det: det.as_f64() }),
    };
    let mut r = u * vt;
    if r.determinant() < T::zero() {
        let mut u = u;
        let mut col = u.column_mut(2);
        col.neg_mut();
        r = u * vt;
    }
    Ok(r)
}
