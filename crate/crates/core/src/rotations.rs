//! Parametrizations of SU(2) and SO(3) and the covering map between them.
//!
//! Conventions: `e_a = σ_a/(2i)`, `u(k̄) = exp(k^a e_a) = cos(k/2) I − i sin(k/2) n̄·σ̄`,
//! so a quaternion stores `ξ⁰ = cos(k/2)`, `ξ^a = sin(k/2) n^a`. Quaternion products are
//! Hamilton products and `project_so3` is the usual active right-handed rotation.

use std::f64::consts::TAU;
use std::ops::{Mul, Neg};

use nalgebra::{Matrix2, Matrix3, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Threshold on |1 − ¼ϰ̄₁·ϰ̄₂| below which Gibbs composition is singular.
pub const GIBBS_TOL: f64 = 1e-12;
/// Tolerance on sin ϑ below which Euler angles are treated as gimbal-locked.
pub const GIMBAL_TOL: f64 = 1e-10;

/// sin(k/2)/k, with its series near 0.
pub fn sinc_half(k: f64) -> f64 {
    if k.abs() < 1e-4 {
        let k2 = k * k;
        0.5 - k2 / 48.0 + k2 * k2 / 3840.0
    } else {
        (0.5 * k).sin() / k
    }
}

/// sin(k)/k, with its series near 0.
pub fn sinc(k: f64) -> f64 {
    if k.abs() < 1e-4 {
        let k2 = k * k;
        1.0 - k2 / 6.0 + k2 * k2 / 120.0
    } else {
        k.sin() / k
    }
}

/// (1 − cos k)/k².
pub fn versine_over_k2(k: f64) -> f64 {
    let s = sinc_half(k);
    2.0 * s * s
}

/// Cross-product matrix: `skew(k)·x = k × x`. Equals `k^a E_a`.
pub fn skew(k: &Vec3) -> Mat3 {
    Mat3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0)
}

/// SU(2) element as a unit quaternion (ξ⁰, ξ¹, ξ², ξ³).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitQuaternion {
    pub xi0: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub xi3: f64,
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion {
        xi0: 1.0,
        xi1: 0.0,
        xi2: 0.0,
        xi3: 0.0,
    };

    /// Normalizes the given components. Panics on a zero 4-vector.
    pub fn new(xi0: f64, xi1: f64, xi2: f64, xi3: f64) -> Self {
        let n = (xi0 * xi0 + xi1 * xi1 + xi2 * xi2 + xi3 * xi3).sqrt();
        assert!(
            n > 0.0 && n.is_finite(),
            "quaternion must be nonzero and finite"
        );
        UnitQuaternion {
            xi0: xi0 / n,
            xi1: xi1 / n,
            xi2: xi2 / n,
            xi3: xi3 / n,
        }
    }

    pub fn try_new(c: [f64; 4]) -> Result<Self> {
        let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidInput {
                reason: "quaternion must be nonzero and finite".into(),
            });
        }
        Ok(Self::new(c[0], c[1], c[2], c[3]))
    }

    pub fn from_scalar_vector(s: f64, v: Vec3) -> Self {
        Self::new(s, v.x, v.y, v.z)
    }

    pub fn vector(&self) -> Vec3 {
        Vec3::new(self.xi1, self.xi2, self.xi3)
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.xi0, self.xi1, self.xi2, self.xi3]
    }

    pub fn norm(&self) -> f64 {
        self.to_array().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Inverse element (the conjugate quaternion).
    pub fn inverse(&self) -> Self {
        UnitQuaternion {
            xi0: self.xi0,
            xi1: -self.xi1,
            xi2: -self.xi2,
            xi3: -self.xi3,
        }
    }

    pub fn dot(&self, o: &Self) -> f64 {
        self.xi0 * o.xi0 + self.xi1 * o.xi1 + self.xi2 * o.xi2 + self.xi3 * o.xi3
    }

    /// Max componentwise distance.
    pub fn distance(&self, o: &Self) -> f64 {
        let a = self.to_array();
        let b = o.to_array();
        (0..4).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
    }

    /// The 2×2 SU(2) matrix ξ⁰I − iξ^aσ_a.
    pub fn to_matrix(&self) -> Matrix2<Complex64> {
        let c = |re, im| Complex64::new(re, im);
        Matrix2::new(
            c(self.xi0, -self.xi3),
            c(-self.xi2, -self.xi1),
            c(self.xi2, -self.xi1),
            c(self.xi0, self.xi3),
        )
    }

    /// Haar-uniform random element.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let c: [f64; 4] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-6 {
                return Self::new(c[0], c[1], c[2], c[3]);
            }
        }
    }
}

impl Mul for UnitQuaternion {
    type Output = UnitQuaternion;
    fn mul(self, b: UnitQuaternion) -> UnitQuaternion {
        let a = self;
        UnitQuaternion::new(
            a.xi0 * b.xi0 - a.xi1 * b.xi1 - a.xi2 * b.xi2 - a.xi3 * b.xi3,
            a.xi0 * b.xi1 + a.xi1 * b.xi0 + a.xi2 * b.xi3 - a.xi3 * b.xi2,
            a.xi0 * b.xi2 - a.xi1 * b.xi3 + a.xi2 * b.xi0 + a.xi3 * b.xi1,
            a.xi0 * b.xi3 + a.xi1 * b.xi2 - a.xi2 * b.xi1 + a.xi3 * b.xi0,
        )
    }
}

impl Neg for UnitQuaternion {
    type Output = UnitQuaternion;
    fn neg(self) -> UnitQuaternion {
        UnitQuaternion {
            xi0: -self.xi0,
            xi1: -self.xi1,
            xi2: -self.xi2,
            xi3: -self.xi3,
        }
    }
}

/// Canonical coordinates of the first kind.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationVector(pub Vec3);

impl RotationVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        RotationVector(Vec3::new(x, y, z))
    }

    pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Self {
        RotationVector(axis.normalize() * angle)
    }

    pub fn angle(&self) -> f64 {
        self.0.norm()
    }

    /// Unit axis, or `None` at k = 0.
    pub fn axis(&self) -> Option<Vec3> {
        let k = self.angle();
        if k > 0.0 {
            Some(self.0 / k)
        } else {
            None
        }
    }
}

/// Vector of final rotation ϰ̄ = (2/k) tan(k/2) k̄.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsVector(pub Vec3);

impl GibbsVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        GibbsVector(Vec3::new(x, y, z))
    }
}

/// z–y–z Euler angles: u = u(0,0,φ) u(0,ϑ,0) u(0,0,ψ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

/// Result of inverting the Euler chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerInverse {
    pub angles: EulerAngles,
    /// sin ϑ below the gimbal tolerance; ψ was set to 0.
    pub gimbal: bool,
}

/// Proper orthogonal 3×3 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationMatrix(pub Mat3);

impl RotationMatrix {
    pub fn apply(&self, x: &Vec3) -> Vec3 {
        self.0 * x
    }

    /// max |RᵀR − I| and |det R − 1|.
    pub fn orthogonality_defect(&self) -> f64 {
        let d = (self.0.transpose() * self.0 - Mat3::identity()).abs().max();
        d.max((self.0.determinant() - 1.0).abs())
    }
}

impl Mul for RotationMatrix {
    type Output = RotationMatrix;
    fn mul(self, o: RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0 * o.0)
    }
}

/// Logarithm on the principal branch |k̄| ∈ [0, 2π].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SU2Log {
    pub vector: RotationVector,
    /// Set at ±identity, where the axis is conventional (0,0,1).
    pub axis_undefined: bool,
}

impl SU2Log {
    pub fn require_axis(self) -> Result<RotationVector> {
        if self.axis_undefined {
            Err(Error::AxisUndefined {
                what: format!("|k| = {}", self.vector.angle()),
            })
        } else {
            Ok(self.vector)
        }
    }
}

pub fn exp_su2(k: &RotationVector) -> UnitQuaternion {
    let kk = k.angle();
    UnitQuaternion::from_scalar_vector((0.5 * kk).cos(), k.0 * sinc_half(kk))
}

pub fn log_su2(q: &UnitQuaternion) -> SU2Log {
    let v = q.vector();
    let s = v.norm();
    if s <= 1e-15 {
        let angle = if q.xi0 > 0.0 { 0.0 } else { TAU };
        return SU2Log {
            vector: RotationVector::new(0.0, 0.0, angle),
            axis_undefined: true,
        };
    }
    let angle = 2.0 * s.atan2(q.xi0);
    SU2Log {
        vector: RotationVector(v * (angle / s)),
        axis_undefined: false,
    }
}

pub fn project_so3(q: &UnitQuaternion) -> RotationMatrix {
    let (w, x, y, z) = (q.xi0, q.xi1, q.xi2, q.xi3);
    RotationMatrix(Mat3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    ))
}

pub fn rotmat_from_vector(k: &RotationVector) -> RotationMatrix {
    let kk = k.angle();
    let v = &k.0;
    RotationMatrix(
        Mat3::identity() * kk.cos() + v * v.transpose() * versine_over_k2(kk) + skew(v) * sinc(kk),
    )
}

/// x + k×x + (1/2!) k×(k×x) + … with `terms` cross-product terms.
pub fn rodrigues_series(k: &RotationVector, x: &Vec3, terms: usize) -> Vec3 {
    let mut term = *x;
    let mut sum = *x;
    for n in 1..=terms.max(1) {
        term = k.0.cross(&term) / n as f64;
        sum += term;
    }
    sum
}

pub fn gibbs_from_rotvec(k: &RotationVector) -> Result<GibbsVector> {
    let kk = k.angle();
    let c = (0.5 * kk).cos();
    if c.abs() < GIBBS_TOL {
        return Err(Error::GibbsSingularity { denominator: c });
    }
    Ok(GibbsVector(k.0 * (2.0 * sinc_half(kk) / c)))
}

/// Inverse of [`gibbs_from_rotvec`]; returns |k̄| ∈ [0, π).
pub fn rotvec_from_gibbs(g: &GibbsVector) -> RotationVector {
    let q = quaternion_from_gibbs(g);
    log_su2(&q).vector
}

pub fn quaternion_from_gibbs(g: &GibbsVector) -> UnitQuaternion {
    UnitQuaternion::from_scalar_vector(1.0, g.0 * 0.5)
}

pub fn gibbs_from_quaternion(q: &UnitQuaternion) -> Result<GibbsVector> {
    if q.xi0.abs() < GIBBS_TOL {
        return Err(Error::GibbsSingularity { denominator: q.xi0 });
    }
    Ok(GibbsVector(q.vector() * (2.0 / q.xi0)))
}

/// ϰ̄ of R[ϰ̄₁]R[ϰ̄₂].
pub fn gibbs_compose(k1: &GibbsVector, k2: &GibbsVector) -> Result<GibbsVector> {
    let den = 1.0 - 0.25 * k1.0.dot(&k2.0);
    if den.abs() < GIBBS_TOL {
        return Err(Error::GibbsSingularity { denominator: den });
    }
    Ok(GibbsVector((k1.0 + k2.0 + k1.0.cross(&k2.0) * 0.5) / den))
}

pub fn gibbs_apply(k: &GibbsVector, x: &Vec3) -> Vec3 {
    let kv = &k.0;
    x + kv.cross(&(x + kv.cross(x) * 0.5)) / (1.0 + 0.25 * kv.norm_squared())
}

fn about_z(angle: f64) -> UnitQuaternion {
    UnitQuaternion::new((0.5 * angle).cos(), 0.0, 0.0, (0.5 * angle).sin())
}

fn about_y(angle: f64) -> UnitQuaternion {
    UnitQuaternion::new((0.5 * angle).cos(), 0.0, (0.5 * angle).sin(), 0.0)
}

fn about_x(angle: f64) -> UnitQuaternion {
    UnitQuaternion::new((0.5 * angle).cos(), (0.5 * angle).sin(), 0.0, 0.0)
}

pub fn euler_to_quaternion(e: &EulerAngles) -> UnitQuaternion {
    about_z(e.phi) * about_y(e.theta) * about_z(e.psi)
}

/// Principal window φ ∈ [0,4π), ϑ ∈ [0,π], ψ ∈ [0,2π).
pub fn quaternion_to_euler(q: &UnitQuaternion) -> EulerInverse {
    let c = (q.xi0 * q.xi0 + q.xi3 * q.xi3).sqrt();
    let s = (q.xi1 * q.xi1 + q.xi2 * q.xi2).sqrt();
    let theta = 2.0 * s.atan2(c);
    let gimbal = theta.sin().abs() < GIMBAL_TOL;
    let (phi, psi) = if gimbal {
        if c >= s {
            (2.0 * q.xi3.atan2(q.xi0), 0.0)
        } else {
            (2.0 * (-q.xi1).atan2(q.xi2), 0.0)
        }
    } else {
        let sum = q.xi3.atan2(q.xi0);
        let diff = (-q.xi1).atan2(q.xi2);
        (sum + diff, sum - diff)
    };
    // shifting φ and ψ together by 2π leaves u unchanged
    let n = (psi / TAU).floor();
    let psi = psi - n * TAU;
    let phi = (phi - n * TAU).rem_euclid(2.0 * TAU);
    EulerInverse {
        angles: EulerAngles { phi, theta, psi },
        gimbal,
    }
}

pub fn canonical2_to_quaternion(alpha: f64, beta: f64, gamma: f64) -> UnitQuaternion {
    about_x(alpha) * about_y(beta) * about_z(gamma)
}

/// Inverse of [`canonical2_to_quaternion`] with β ∈ [−π/2, π/2], α ∈ (−π, 3π], γ ∈ (−π, π].
pub fn quaternion_to_canonical2(q: &UnitQuaternion) -> ((f64, f64, f64), bool) {
    let r = project_so3(q).0;
    let sb = r[(0, 2)].clamp(-1.0, 1.0);
    let beta = sb.asin();
    let gimbal = beta.cos().abs() < GIMBAL_TOL;
    let (alpha, gamma) = if gimbal {
        ((r[(2, 1)]).atan2(r[(1, 1)]), 0.0)
    } else {
        ((-r[(1, 2)]).atan2(r[(2, 2)]), (-r[(0, 1)]).atan2(r[(0, 0)]))
    };
    let back = canonical2_to_quaternion(alpha, beta, gamma);
    let alpha = if back.dot(q) < 0.0 {
        alpha + TAU
    } else {
        alpha
    };
    ((alpha, beta, gamma), gimbal)
}

/// u·v·u⁻¹.
pub fn conjugate(u: &UnitQuaternion, v: &UnitQuaternion) -> UnitQuaternion {
    *u * *v * u.inverse()
}

/// Wraps an angle into [0, 2π].
pub fn wrap_angle(k: f64) -> f64 {
    k.rem_euclid(TAU)
}
