//! Quaternion and rigid-transform algebra.
//!
//! Quaternions are stored scalar-last, `q = [q1, q2, q3, q4]` with `q4` the
//! scalar part, and multiply with the Hamilton convention. That layout is used
//! everywhere in the crate; nothing converts to a scalar-first form.
//!
//! A [`RotoTranslation`] `(R, t)` maps a point expressed in frame `A` into
//! frame `B` as `p_B = R p_A + t`.

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use thiserror::Error;

/// Tolerance for algebraic identities on values produced inside the crate.
pub const ALGEBRA_TOL: f64 = 1e-9;
/// Tolerance used to validate matrices handed in from outside.
pub const INPUT_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("matrix is not a proper rotation (orthogonality error {orthogonality:.3e}, det {det:.6})")]
    InvalidRotation { orthogonality: f64, det: f64 },
    #[error("value {value} outside the valid range [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },
    #[error("cannot normalize a zero-length quaternion")]
    ZeroQuaternion,
}

/// Unit quaternion, scalar component last.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion {
    coords: Vector4<f64>,
}

impl UnitQuaternion {
    pub fn identity() -> Self {
        Self {
            coords: Vector4::new(0.0, 0.0, 0.0, 1.0),
        }
    }

    /// Normalizes `(q1, q2, q3, q4)`; fails only on a zero vector.
    pub fn new(q1: f64, q2: f64, q3: f64, q4: f64) -> Result<Self, GeomError> {
        Self::from_vector(Vector4::new(q1, q2, q3, q4))
    }

    pub fn from_vector(v: Vector4<f64>) -> Result<Self, GeomError> {
        let n = v.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(GeomError::ZeroQuaternion);
        }
        Ok(Self { coords: v / n })
    }

    /// Rotation of `angle` radians about `axis` (need not be normalized).
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let n = axis.norm();
        if n == 0.0 {
            return Self::identity();
        }
        let (s, c) = (0.5 * angle).sin_cos();
        let v = axis / n * s;
        Self {
            coords: Vector4::new(v.x, v.y, v.z, c),
        }
    }

    pub fn coords(&self) -> &Vector4<f64> {
        &self.coords
    }

    pub fn scalar(&self) -> f64 {
        self.coords[3]
    }

    pub fn inverse(&self) -> Self {
        let q = &self.coords;
        Self {
            coords: Vector4::new(-q[0], -q[1], -q[2], q[3]),
        }
    }

    /// Picks the representative with `q4 >= 0`; when `q4` vanishes the first
    /// nonzero component is made positive.
    pub fn canonical(&self) -> Self {
        const TIE: f64 = 1e-12;
        let q = self.coords;
        let flip = if q[3].abs() > TIE {
            q[3] < 0.0
        } else {
            q.iter()
                .take(3)
                .find(|c| c.abs() > TIE)
                .is_some_and(|c| *c < 0.0)
        };
        if flip {
            Self { coords: -q }
        } else {
            *self
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        quat_product(self, other)
    }

    pub fn to_rotation(&self) -> Rotation {
        let [x, y, z, w] = [self.coords[0], self.coords[1], self.coords[2], self.coords[3]];
        let (xx, yy, zz) = (x * x, y * y, z * z);
        let (xy, xz, yz) = (x * y, x * z, y * z);
        let (wx, wy, wz) = (w * x, w * y, w * z);
        Rotation(Matrix3::new(
            1.0 - 2.0 * (yy + zz),
            2.0 * (xy - wz),
            2.0 * (xz + wy),
            2.0 * (xy + wz),
            1.0 - 2.0 * (xx + zz),
            2.0 * (yz - wx),
            2.0 * (xz - wy),
            2.0 * (yz + wx),
            1.0 - 2.0 * (xx + yy),
        ))
    }

    /// Rotates `v` by this quaternion.
    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.to_rotation().apply(v)
    }
}

/// Left-multiplication matrix: `Ω1(a) b = a ∘ b`.
pub fn omega1(q: &Vector4<f64>) -> Matrix4<f64> {
    let (q1, q2, q3, q4) = (q[0], q[1], q[2], q[3]);
    Matrix4::new(
        q4, -q3, q2, q1, //
        q3, q4, -q1, q2, //
        -q2, q1, q4, q3, //
        -q1, -q2, -q3, q4,
    )
}

/// Right-multiplication matrix: `Ω2(b) a = a ∘ b`.
pub fn omega2(q: &Vector4<f64>) -> Matrix4<f64> {
    let (q1, q2, q3, q4) = (q[0], q[1], q[2], q[3]);
    Matrix4::new(
        q4, q3, -q2, q1, //
        -q3, q4, q1, q2, //
        q2, -q1, q4, q3, //
        -q1, -q2, -q3, q4,
    )
}

/// Appends a zero scalar part to a 3-vector.
pub fn pure(v: &Vector3<f64>) -> Vector4<f64> {
    Vector4::new(v.x, v.y, v.z, 0.0)
}

pub fn quat_product(qa: &UnitQuaternion, qb: &UnitQuaternion) -> UnitQuaternion {
    let c = omega1(&qa.coords) * qb.coords;
    debug_assert!(
        (c - omega2(&qb.coords) * qa.coords).norm() < ALGEBRA_TOL,
        "Ω1(qa)qb and Ω2(qb)qa disagree"
    );
    UnitQuaternion {
        coords: c / c.norm(),
    }
}

/// Proper rotation matrix. Construct through [`Rotation::from_matrix`] for
/// external data; internal constructors keep the invariant by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Matrix3<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Validates `m^T m = I` and `det m = +1` within [`INPUT_TOL`].
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self, GeomError> {
        let orthogonality = (m.transpose() * m - Matrix3::identity()).norm();
        let det = m.determinant();
        if !(orthogonality <= INPUT_TOL) || !((det - 1.0).abs() <= INPUT_TOL) {
            return Err(GeomError::InvalidRotation { orthogonality, det });
        }
        Ok(Self(m))
    }

    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        UnitQuaternion::from_axis_angle(axis, angle).to_rotation()
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    /// `self · other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        Self(self.0 * other.0)
    }

    /// Shepperd's method, canonicalized to `q4 >= 0`.
    pub fn to_quaternion(&self) -> UnitQuaternion {
        let m = &self.0;
        let trace = m.trace();
        let v = if trace > m[(0, 0)] && trace > m[(1, 1)] && trace > m[(2, 2)] {
            let s = 2.0 * (1.0 + trace).sqrt();
            Vector4::new(
                (m[(2, 1)] - m[(1, 2)]) / s,
                (m[(0, 2)] - m[(2, 0)]) / s,
                (m[(1, 0)] - m[(0, 1)]) / s,
                0.25 * s,
            )
        } else if m[(0, 0)] >= m[(1, 1)] && m[(0, 0)] >= m[(2, 2)] {
            let s = 2.0 * (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt();
            Vector4::new(
                0.25 * s,
                (m[(0, 1)] + m[(1, 0)]) / s,
                (m[(0, 2)] + m[(2, 0)]) / s,
                (m[(2, 1)] - m[(1, 2)]) / s,
            )
        } else if m[(1, 1)] >= m[(2, 2)] {
            let s = 2.0 * (1.0 + m[(1, 1)] - m[(0, 0)] - m[(2, 2)]).sqrt();
            Vector4::new(
                (m[(0, 1)] + m[(1, 0)]) / s,
                0.25 * s,
                (m[(1, 2)] + m[(2, 1)]) / s,
                (m[(0, 2)] - m[(2, 0)]) / s,
            )
        } else {
            let s = 2.0 * (1.0 + m[(2, 2)] - m[(0, 0)] - m[(1, 1)]).sqrt();
            Vector4::new(
                (m[(0, 2)] + m[(2, 0)]) / s,
                (m[(1, 2)] + m[(2, 1)]) / s,
                0.25 * s,
                (m[(1, 0)] - m[(0, 1)]) / s,
            )
        };
        UnitQuaternion {
            coords: v / v.norm(),
        }
        .canonical()
    }

    /// `‖self − other‖_F`.
    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        (self.0 - other.0).norm()
    }

    /// Geodesic angle between two rotations from the trace of `R1 R2^T`.
    pub fn angle_to(&self, other: &Self) -> f64 {
        let c = (((self.0 * other.0.transpose()).trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
        c.acos()
    }
}

pub fn quat_to_rotation(q: &UnitQuaternion) -> Rotation {
    q.to_rotation()
}

/// Converts a raw matrix, rejecting anything that is not a rotation within
/// [`INPUT_TOL`].
pub fn rotation_to_quat(m: &Matrix3<f64>) -> Result<UnitQuaternion, GeomError> {
    Ok(Rotation::from_matrix(*m)?.to_quaternion())
}

/// Largest possible Frobenius distance between two rotations (θ = π).
pub const MAX_ROTATION_FROBENIUS: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Angle θ with `cos θ = 1 − f²/4`.
pub fn frobenius_to_angle(f: f64) -> Result<f64, GeomError> {
    if !(0.0..=MAX_ROTATION_FROBENIUS + ALGEBRA_TOL).contains(&f) {
        return Err(GeomError::OutOfRange {
            value: f,
            min: 0.0,
            max: MAX_ROTATION_FROBENIUS,
        });
    }
    // 2 asin(f / 2√2) is the same relation but keeps precision near zero.
    Ok(2.0 * (f / MAX_ROTATION_FROBENIUS).min(1.0).asin())
}

/// Frobenius distance of two rotations that differ by `theta` radians.
pub fn angle_to_frobenius(theta: f64) -> Result<f64, GeomError> {
    let pi = std::f64::consts::PI;
    if !(0.0..=pi + ALGEBRA_TOL).contains(&theta) {
        return Err(GeomError::OutOfRange {
            value: theta,
            min: 0.0,
            max: pi,
        });
    }
    Ok(MAX_ROTATION_FROBENIUS * (0.5 * theta.min(pi)).sin())
}

/// Rigid transform `p_B = R p_A + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotoTranslation {
    pub rotation: Rotation,
    pub translation: Vector3<f64>,
}

impl Default for RotoTranslation {
    fn default() -> Self {
        Self::identity()
    }
}

impl RotoTranslation {
    pub fn new(rotation: Rotation, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(Rotation::identity(), Vector3::zeros())
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Self::new(Rotation::identity(), t)
    }

    /// `(R^T, −R^T t)`.
    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self::new(rt, -(rt.apply(&self.translation)))
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self::new(
            self.rotation.compose(&other.rotation),
            self.rotation.apply(&other.translation) + self.translation,
        )
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.apply(p) + self.translation
    }
}

pub fn invert(t: &RotoTranslation) -> RotoTranslation {
    t.inverse()
}

pub fn transform_point(t: &RotoTranslation, p: &Vector3<f64>) -> Vector3<f64> {
    t.transform_point(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    /// Rodrigues' formula, independent of the quaternion path.
    fn rodrigues(axis: &Vector3<f64>, angle: f64) -> Matrix3<f64> {
        let k = axis.normalize();
        let kx = Matrix3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
        Matrix3::identity() + kx * angle.sin() + kx * kx * (1.0 - angle.cos())
    }

    fn arb_axis() -> impl Strategy<Value = Vector3<f64>> {
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
            .prop_filter("nonzero", |(x, y, z)| x * x + y * y + z * z > 1e-3)
            .prop_map(|(x, y, z)| Vector3::new(x, y, z))
    }

    fn arb_quat() -> impl Strategy<Value = UnitQuaternion> {
        (arb_axis(), 0.0..PI).prop_map(|(a, t)| UnitQuaternion::from_axis_angle(&a, t))
    }

    fn arb_pose() -> impl Strategy<Value = RotoTranslation> {
        (arb_quat(), -5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64)
            .prop_map(|(q, x, y, z)| RotoTranslation::new(q.to_rotation(), Vector3::new(x, y, z)))
    }

    #[test]
    fn identity_omegas() {
        let q = UnitQuaternion::identity();
        assert_eq!(omega1(q.coords()), Matrix4::identity());
        assert_eq!(omega2(q.coords()), Matrix4::identity());
        assert_eq!(q.to_rotation().matrix(), &Matrix3::identity());
    }

    #[test]
    fn omega1_entries_match_layout() {
        let v = Vector4::new(0.3, -1.2, 2.5, 0.7);
        let m = omega1(&v);
        assert_eq!(m.row(0).transpose(), Vector4::new(0.7, -2.5, -1.2, 0.3));
        assert_eq!(m.row(1).transpose(), Vector4::new(2.5, 0.7, -0.3, -1.2));
        assert_eq!(m.row(2).transpose(), Vector4::new(1.2, 0.3, 0.7, 2.5));
        assert_eq!(m.row(3).transpose(), Vector4::new(-0.3, 1.2, -2.5, 0.7));
        let m2 = omega2(&v);
        assert_eq!(m2.row(0).transpose(), Vector4::new(0.7, 2.5, 1.2, 0.3));
        assert_eq!(m2.row(2).transpose(), Vector4::new(-1.2, -0.3, 0.7, 2.5));
    }

    #[test]
    fn quarter_turn_about_z() {
        let s = FRAC_1_SQRT_2;
        let q = UnitQuaternion::new(0.0, 0.0, s, s).unwrap();
        let r = q.to_rotation();
        let oracle = rodrigues(&Vector3::z(), PI / 2.0);
        assert_relative_eq!(r.matrix()[(0, 1)], -1.0, epsilon = 1e-12);
        assert_relative_eq!(r.matrix()[(1, 0)], 1.0, epsilon = 1e-12);
        assert!((r.matrix() - oracle).norm() < 1e-12);
    }

    #[test]
    fn product_with_identity_and_inverse() {
        let q = UnitQuaternion::from_axis_angle(&Vector3::new(1.0, 2.0, -0.5), 1.1);
        let id = UnitQuaternion::identity();
        assert!((quat_product(&id, &q).coords() - q.coords()).norm() < 1e-12);
        let e = quat_product(&q, &q.inverse());
        assert!((e.coords() - Vector4::new(0.0, 0.0, 0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn frobenius_angle_anchor() {
        let f = angle_to_frobenius(5f64.to_radians()).unwrap();
        assert!((f - 0.123).abs() < 5e-4, "f = {f}");
        let f2 = angle_to_frobenius(2f64.to_radians()).unwrap();
        assert!((f2 - 0.0493).abs() < 1e-4, "f2 = {f2}");
        assert_eq!(angle_to_frobenius(0.0).unwrap(), 0.0);
        assert_eq!(frobenius_to_angle(0.0).unwrap(), 0.0);
    }

    #[test]
    fn frobenius_range_errors() {
        assert!(matches!(
            frobenius_to_angle(3.0),
            Err(GeomError::OutOfRange { .. })
        ));
        assert!(frobenius_to_angle(MAX_ROTATION_FROBENIUS + 1e-10).is_ok());
        assert!(frobenius_to_angle(-0.1).is_err());
        assert!(angle_to_frobenius(4.0).is_err());
    }

    #[test]
    fn frobenius_to_angle_strictly_increasing() {
        let mut prev = -1.0;
        for i in 0..=1000 {
            let f = MAX_ROTATION_FROBENIUS * i as f64 / 1000.0;
            let a = frobenius_to_angle(f).unwrap();
            assert!(a > prev);
            prev = a;
        }
    }

    #[test]
    fn invalid_rotation_rejected() {
        let mut m = Matrix3::identity();
        m[(0, 1)] = 1e-3;
        assert!(matches!(
            rotation_to_quat(&m),
            Err(GeomError::InvalidRotation { .. })
        ));
        let reflection = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(rotation_to_quat(&reflection).is_err());
    }

    #[test]
    fn canonical_tie_break() {
        let q = UnitQuaternion::new(0.0, -1.0, 0.0, 0.0).unwrap().canonical();
        assert_eq!(q.coords(), &Vector4::new(0.0, 1.0, 0.0, 0.0));
        let q = UnitQuaternion::new(0.1, 0.2, 0.3, -0.9).unwrap().canonical();
        assert!(q.scalar() > 0.0);
    }

    #[test]
    fn pure_translation_inverse() {
        let t = RotoTranslation::from_translation(Vector3::new(1.0, -2.0, 3.0));
        assert_eq!(t.inverse().translation, Vector3::new(-1.0, 2.0, -3.0));
        assert_eq!(t.inverse().rotation, Rotation::identity());
        let id = RotoTranslation::identity();
        assert_eq!(id.inverse(), id);
        let p = Vector3::new(0.5, 0.25, -1.0);
        assert_eq!(id.transform_point(&p), p);
        assert_eq!(t.transform_point(&p), p + t.translation);
    }

    proptest! {
        #[test]
        fn product_matches_matrix_product(qa in arb_quat(), qb in arb_quat()) {
            let lhs = quat_product(&qa, &qb).to_rotation();
            let rhs = qa.to_rotation().compose(&qb.to_rotation());
            prop_assert!((lhs.matrix() - rhs.matrix()).norm() < 1e-12);
        }

        #[test]
        fn quaternion_matches_rodrigues(axis in arb_axis(), angle in 0.0..PI) {
            let r = UnitQuaternion::from_axis_angle(&axis, angle).to_rotation();
            prop_assert!((r.matrix() - rodrigues(&axis, angle)).norm() < 1e-12);
        }

        #[test]
        fn omega_properties(q in arb_quat(), a in arb_axis()) {
            let o1 = omega1(q.coords());
            let o2 = omega2(q.coords());
            prop_assert!((o1.transpose() * o1 - Matrix4::identity()).norm() < 1e-9);
            prop_assert!((o2.transpose() * o2 - Matrix4::identity()).norm() < 1e-9);
            let qi = q.inverse();
            prop_assert!((omega1(qi.coords()) - o1.transpose()).norm() < 1e-12);
            prop_assert!((omega2(qi.coords()) - o2.transpose()).norm() < 1e-12);
            // q ∘ ā ∘ q⁻¹ = Ω2ᵀ(q) Ω1(q) ā
            let rotated = o2.transpose() * o1 * pure(&a);
            let ra = q.to_rotation().apply(&a);
            prop_assert!((rotated.xyz() - ra).norm() < 1e-12);
            prop_assert!(rotated[3].abs() < 1e-12);
        }

        #[test]
        fn rotation_round_trip(q in arb_quat()) {
            let r = q.to_rotation();
            prop_assert!((r.matrix().transpose() * r.matrix() - Matrix3::identity()).norm() < 1e-9);
            prop_assert!((r.matrix().determinant() - 1.0).abs() < 1e-9);
            let back = r.to_quaternion();
            prop_assert!(back.scalar() >= 0.0);
            let c = q.canonical();
            prop_assert!((back.coords() - c.coords()).norm() < 1e-9
                || (back.coords() + c.coords()).norm() < 1e-9);
            prop_assert!((back.to_rotation().matrix() - r.matrix()).norm() < 1e-9);
        }

        #[test]
        fn frobenius_matches_geodesic(qa in arb_quat(), qb in arb_quat()) {
            let (ra, rb) = (qa.to_rotation(), qb.to_rotation());
            let f = ra.frobenius_distance(&rb);
            let theta = ra.angle_to(&rb);
            prop_assert!((angle_to_frobenius(theta).unwrap() - f).abs() < 1e-9);
        }

        #[test]
        fn frobenius_angle_inverse(theta in 0.0..PI) {
            let f = angle_to_frobenius(theta).unwrap();
            prop_assert!((frobenius_to_angle(f).unwrap() - theta).abs() < 1e-9);
        }

        #[test]
        fn inverse_composes_to_identity(t in arb_pose(), p in arb_axis()) {
            let e = t.inverse().compose(&t);
            prop_assert!((e.rotation.matrix() - Matrix3::identity()).norm() < 1e-9);
            prop_assert!(e.translation.norm() < 1e-9);
            let e2 = t.compose(&t.inverse());
            prop_assert!(e2.translation.norm() < 1e-9);
            prop_assert!((t.inverse().translation + t.rotation.transpose().apply(&t.translation)).norm() < 1e-12);
            let back = t.inverse().transform_point(&t.transform_point(&p));
            prop_assert!((back - p).norm() < 1e-9);
        }

        #[test]
        fn transform_is_isometry(t in arb_pose(), p in arb_axis(), q in arb_axis()) {
            let d0 = (p - q).norm();
            let d1 = (t.transform_point(&p) - t.transform_point(&q)).norm();
            prop_assert!((d0 - d1).abs() < 1e-9);
        }
    }
}
