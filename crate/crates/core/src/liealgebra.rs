//! Bases of su(2)/so(3), the Killing form, invariant vector fields and Cartan forms
//! in canonical coordinates, and classical kinematic quantities.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rotations::{
    exp_su2, log_su2, project_so3, sinc, skew, versine_over_k2, Mat3, RotationVector,
    UnitQuaternion, Vec3,
};

/// Guard radius around k ∈ {0, 2π}.
pub const CHART_GUARD: f64 = 1e-6;

/// ε_abc for indices in 0..3.
pub fn levi_civita(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

#[derive(Clone, Debug)]
pub struct AlgebraBasis {
    pub pauli: [Matrix2<Complex64>; 3],
    /// e_a = σ_a/(2i).
    pub e: [Matrix2<Complex64>; 3],
    /// (E_a)^b_c = −ε_abc.
    pub big_e: [Mat3; 3],
}

impl AlgebraBasis {
    pub fn new() -> Self {
        let z = Complex64::new(0.0, 0.0);
        let o = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let pauli = [
            Matrix2::new(z, o, o, z),
            Matrix2::new(z, -i, i, z),
            Matrix2::new(o, z, z, -o),
        ];
        let e = pauli.map(|s| s.map(|x| x / (2.0 * i)));
        let big_e = [0, 1, 2].map(|a| Mat3::from_fn(|b, c| -levi_civita(a, b, c)));
        AlgebraBasis { pauli, e, big_e }
    }
}

impl Default for AlgebraBasis {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KillingMetric {
    pub gamma: Mat3,
    pub big_gamma: Mat3,
}

impl KillingMetric {
    /// γ_ab = tr(ad E_a · ad E_b), computed from the commutators of the E_a.
    pub fn from_trace_form() -> Self {
        let basis = AlgebraBasis::new();
        let ad = |a: usize| {
            Mat3::from_fn(|c, b| {
                let comm = basis.big_e[a] * basis.big_e[b] - basis.big_e[b] * basis.big_e[a];
                // coefficient of E_c: E_c has (E_c)_{xy} = −ε_cxy, so read it off an entry
                let (x, y) = match c {
                    0 => (1, 2),
                    1 => (2, 0),
                    _ => (0, 1),
                };
                -comm[(x, y)]
            })
        };
        let gamma = Mat3::from_fn(|a, b| (ad(a) * ad(b)).trace());
        KillingMetric {
            gamma,
            big_gamma: -gamma / 2.0,
        }
    }
}

/// Which invariant vector field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Field {
    /// Left translations: 𝓛_a f(u) = d/dt f(exp(t e_a) u).
    L,
    /// Right translations: 𝓡_a f(u) = d/dt f(u exp(t e_a)).
    R,
    /// 𝓐 = 𝓛 − 𝓡.
    A,
}

/// Field components `l[(i,a)] = 𝓛^i_a` and form components `lform[(a,i)] = 𝓛^a_i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldComponents {
    pub l: Mat3,
    pub r: Mat3,
    pub a: Mat3,
    pub lform: Mat3,
    pub rform: Mat3,
}

impl FieldComponents {
    pub fn field(&self, which: Field) -> &Mat3 {
        match which {
            Field::L => &self.l,
            Field::R => &self.r,
            Field::A => &self.a,
        }
    }
}

/// (k/2) ctg(k/2).
fn alpha(k: f64) -> f64 {
    if k < 1e-3 {
        let k2 = k * k;
        1.0 - k2 / 12.0 - k2 * k2 / 720.0
    } else {
        0.5 * k / (0.5 * k).tan()
    }
}

/// d/dk of (k/2) ctg(k/2).
fn alpha_prime(k: f64) -> f64 {
    if k < 1e-3 {
        -k / 6.0 - k * k * k / 180.0
    } else {
        let s = (0.5 * k).sin();
        0.5 / (0.5 * k).tan() - 0.25 * k / (s * s)
    }
}

/// (1 − (k/2)ctg(k/2))/k.
fn one_minus_alpha_over_k(k: f64) -> f64 {
    if k < 1e-3 {
        k / 12.0 + k * k * k / 720.0
    } else {
        (1.0 - alpha(k)) / k
    }
}

fn check_chart(k: f64) -> Result<()> {
    if !k.is_finite() || k >= std::f64::consts::TAU - CHART_GUARD {
        return Err(Error::ChartSingular {
            chart: "canonical coordinates",
            k,
        });
    }
    Ok(())
}

fn radial_projector(k: &Vec3) -> Mat3 {
    let kk = k.norm();
    if kk > 0.0 {
        let n = k / kk;
        n * n.transpose()
    } else {
        Mat3::zeros()
    }
}

pub fn field_components(k: &RotationVector) -> Result<FieldComponents> {
    let kk = k.angle();
    check_chart(kk)?;
    let p = radial_projector(&k.0);
    let al = alpha(kk);
    let sym = Mat3::identity() * al + p * (1.0 - al);
    let half = skew(&k.0) * 0.5;
    let l = sym - half;
    let r = sym + half;
    let sc = sinc(kk);
    let fsym = Mat3::identity() * sc + p * (1.0 - sc);
    let ftw = skew(&k.0) * versine_over_k2(kk);
    Ok(FieldComponents {
        l,
        r,
        a: l - r,
        lform: fsym + ftw,
        rform: fsym - ftw,
    })
}

/// `d[c][(i,a)] = ∂_c X^i_a` for X = 𝓛 or 𝓡 (for 𝓐 the derivative is −ε_ica... i.e. constant).
pub fn field_derivatives(which: Field, k: &RotationVector) -> Result<[Mat3; 3]> {
    let kk = k.angle();
    check_chart(kk)?;
    let sign = match which {
        Field::L => 1.0,
        Field::R => -1.0,
        Field::A => 0.0,
    };
    let mut out = [Mat3::zeros(); 3];
    if which == Field::A {
        // A^i_a = ε_abi k^b
        for (c, m) in out.iter_mut().enumerate() {
            *m = Mat3::from_fn(|i, a| levi_civita(a, c, i));
        }
        return Ok(out);
    }
    let ap = alpha_prime(kk);
    let q = one_minus_alpha_over_k(kk);
    let n = if kk > 0.0 { k.0 / kk } else { Vec3::zeros() };
    let d = |x: usize, y: usize| if x == y { 1.0 } else { 0.0 };
    for (c, m) in out.iter_mut().enumerate() {
        *m = Mat3::from_fn(|i, a| {
            ap * n[c] * (d(i, a) - n[i] * n[a])
                + q * (d(c, i) * n[a] + n[i] * d(c, a) - 2.0 * n[i] * n[a] * n[c])
                + sign * 0.5 * levi_civita(i, a, c)
        });
    }
    Ok(out)
}

/// Default finite-difference step.
pub fn default_step(k: &RotationVector) -> f64 {
    1e-5 * k.angle().max(1.0)
}

/// Central-difference X_a f at k̄, using the closed-form field components.
pub fn apply_generator(
    which: Field,
    a: usize,
    f: &dyn Fn(&UnitQuaternion) -> Complex64,
    k: &RotationVector,
    h: f64,
) -> Result<Complex64> {
    let comps = field_components(k)?;
    let x = comps.field(which);
    let mut acc = Complex64::new(0.0, 0.0);
    for c in 0..3 {
        let coef = x[(c, a)];
        if coef == 0.0 {
            continue;
        }
        let mut kp = k.0;
        kp[c] += h;
        let mut km = k.0;
        km[c] -= h;
        let g = (f(&exp_su2(&RotationVector(kp))) - f(&exp_su2(&RotationVector(km)))) / (2.0 * h);
        acc += g * coef;
    }
    Ok(acc)
}

/// One Richardson step on [`apply_generator`]: (4 D(h/2) − D(h))/3.
pub fn apply_generator_richardson(
    which: Field,
    a: usize,
    f: &dyn Fn(&UnitQuaternion) -> Complex64,
    k: &RotationVector,
    h: f64,
) -> Result<Complex64> {
    let coarse = apply_generator(which, a, f, k, h)?;
    let fine = apply_generator(which, a, f, k, 0.5 * h)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

/// Σ_a X_a X_a f by nested central differences.
pub fn apply_casimir(
    which: Field,
    f: &dyn Fn(&UnitQuaternion) -> Complex64,
    k: &RotationVector,
    h: f64,
) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..3 {
        let inner = |u: &UnitQuaternion| {
            apply_generator(which, a, f, &log_su2(u).vector, h)
                .unwrap_or(Complex64::new(f64::NAN, 0.0))
        };
        acc += apply_generator(which, a, &inner, k, h)?;
    }
    Ok(acc)
}

/// max_{a,i} |𝓛^a_i − R(u)^a_b 𝓡^b_i|.
pub fn left_right_relation_check(u: &UnitQuaternion) -> Result<f64> {
    let k = log_su2(u).vector;
    let comps = field_components(&k)?;
    let r = project_so3(u).0;
    Ok((comps.lform - r * comps.rform).abs().max())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KinematicsSample {
    pub k: RotationVector,
    pub kdot: Vec3,
    pub p: Vec3,
}

/// (ω, ω̂): spatial and co-moving angular velocity.
pub fn angular_velocities(s: &KinematicsSample) -> Result<(Vec3, Vec3)> {
    let comps = field_components(&s.k)?;
    Ok((comps.lform * s.kdot, comps.rform * s.kdot))
}

/// (S, Ŝ, Δ).
pub fn classical_momentum_maps(s: &KinematicsSample) -> Result<(Vec3, Vec3, Vec3)> {
    let comps = field_components(&s.k)?;
    let sp = comps.l.transpose() * s.p;
    let sh = comps.r.transpose() * s.p;
    Ok((sp, sh, sp - sh))
}

/// The three momentum maps as phase-space functions with their gradients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentumMap {
    S,
    SHat,
    Delta,
}

/// Value and (∂/∂k, ∂/∂p) of a component of a momentum map.
fn momentum_map_jet(
    which: MomentumMap,
    a: usize,
    k: &RotationVector,
    p: &Vec3,
) -> Result<(f64, Vec3, Vec3)> {
    let (field, sign) = match which {
        MomentumMap::S => (Field::L, 1.0),
        MomentumMap::SHat => (Field::R, 1.0),
        MomentumMap::Delta => (Field::A, 1.0),
    };
    let comps = field_components(k)?;
    let x = comps.field(field);
    let d = field_derivatives(field, k)?;
    let value = sign * (0..3).map(|j| p[j] * x[(j, a)]).sum::<f64>();
    let dk = Vec3::from_fn(|c, _| sign * (0..3).map(|j| p[j] * d[c][(j, a)]).sum::<f64>());
    let dp = Vec3::from_fn(|j, _| sign * x[(j, a)]);
    Ok((value, dk, dp))
}

/// Canonical Poisson bracket {F_a, G_b} in (k̄, p̄) with analytic derivatives.
pub fn momentum_bracket(
    f: MomentumMap,
    a: usize,
    g: MomentumMap,
    b: usize,
    k: &RotationVector,
    p: &Vec3,
) -> Result<f64> {
    let (_, fk, fp) = momentum_map_jet(f, a, k, p)?;
    let (_, gk, gp) = momentum_map_jet(g, b, k, p)?;
    Ok(fk.dot(&gp) - fp.dot(&gk))
}

/// Value of a momentum-map component.
pub fn momentum_map(which: MomentumMap, a: usize, k: &RotationVector, p: &Vec3) -> Result<f64> {
    Ok(momentum_map_jet(which, a, k, p)?.0)
}

/// Largest deviation from {S,S}=εS, {Ŝ,Ŝ}=−εŜ, {S,Ŝ}=0, {Δ,S}=εS, {Δ,Ŝ}=εŜ, {Δ,Δ}=εΔ.
pub fn momentum_bracket_residual(k: &RotationVector, p: &Vec3) -> Result<f64> {
    use MomentumMap::*;
    let val = |m, c| momentum_map(m, c, k, p);
    let mut worst: f64 = 0.0;
    let table: [(MomentumMap, MomentumMap, Option<(MomentumMap, f64)>); 6] = [
        (S, S, Some((S, 1.0))),
        (SHat, SHat, Some((SHat, -1.0))),
        (S, SHat, None),
        (Delta, S, Some((S, 1.0))),
        (Delta, SHat, Some((SHat, 1.0))),
        (Delta, Delta, Some((Delta, 1.0))),
    ];
    for (f, g, rhs) in table {
        for a in 0..3 {
            for b in 0..3 {
                let lhs = momentum_bracket(f, a, g, b, k, p)?;
                let mut expect = 0.0;
                if let Some((m, s)) = rhs {
                    for c in 0..3 {
                        let e = levi_civita(a, b, c);
                        if e != 0.0 {
                            expect += s * e * val(m, c)?;
                        }
                    }
                }
                worst = worst.max((lhs - expect).abs());
            }
        }
    }
    Ok(worst)
}
