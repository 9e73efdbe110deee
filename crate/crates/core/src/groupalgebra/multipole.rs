use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::GridFunction;
use crate::error::{Error, Result};
use crate::haar::QuadratureGrid;
use crate::irreps::{wigner_d, SpinLabel};
use crate::rotations::{log_su2, UnitQuaternion, Vec3};

/// Orthonormal spherical harmonic with Condon–Shortley phase.
pub fn spherical_harmonic(l: usize, m: i64, theta: f64, phi: f64) -> Complex64 {
    let am = m.unsigned_abs() as usize;
    if am > l {
        return Complex64::new(0.0, 0.0);
    }
    let x = theta.cos();
    let s = theta.sin();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for i in 1..=am {
        pmm *= -s * ((2 * i + 1) as f64 / (2 * i) as f64).sqrt();
    }
    let p = if l == am {
        pmm
    } else {
        let mut p0 = pmm;
        let mut p1 = x * ((2 * am + 3) as f64).sqrt() * pmm;
        for ll in (am + 2)..=l {
            let (lf, mf) = (ll as f64, am as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            let p2 = a * (x * p1 - b * p0);
            p0 = p1;
            p1 = p2;
        }
        p1
    };
    let y = Complex64::from_polar(p, am as f64 * phi);
    if m >= 0 {
        y
    } else if am % 2 == 0 {
        y.conj()
    } else {
        -y.conj()
    }
}

pub fn spherical_harmonic_dir(l: usize, m: i64, n: &Vec3) -> Complex64 {
    let r = n.norm();
    if r == 0.0 {
        return spherical_harmonic(l, m, 0.0, 0.0);
    }
    spherical_harmonic(l, m, (n.z / r).clamp(-1.0, 1.0).acos(), n.y.atan2(n.x))
}

/// Gegenbauer polynomial C⁽λ⁾_n(x); zero for n < 0.
pub fn gegenbauer(n: i64, lambda: f64, x: f64) -> f64 {
    if n < 0 {
        return 0.0;
    }
    let mut c0 = 1.0;
    if n == 0 {
        return c0;
    }
    let mut c1 = 2.0 * lambda * x;
    for k in 2..=n {
        let kf = k as f64;
        let c2 = (2.0 * x * (kf + lambda - 1.0) * c1 - (kf + 2.0 * lambda - 2.0) * c0) / kf;
        c0 = c1;
        c1 = c2;
    }
    c1
}

/// Radial factor f_jl of the multipole basis, generated from ε(j) by the recurrence
/// f_{j,l+1} = (d/dk − (l/2) ctg(k/2)) f_jl. Closed form:
/// f_jl = (2j+1)(−1)^l l! sin^l(k/2) C⁽ˡ⁺¹⁾_{2j−l}(cos(k/2)).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub j: SpinLabel,
    pub l: usize,
    amplitude: f64,
}

pub fn radial_profile(j: SpinLabel, l: usize) -> Result<RadialProfile> {
    if l > j.two_j as usize {
        return Err(Error::RankOutOfRange {
            l,
            max: j.two_j as usize,
        });
    }
    let fact: f64 = (1..=l).map(|i| i as f64).product();
    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
    Ok(RadialProfile {
        j,
        l,
        amplitude: j.dim() as f64 * sign * fact,
    })
}

impl RadialProfile {
    fn parts(&self, k: f64) -> (f64, f64, f64, f64, f64) {
        let n = self.j.two_j as i64 - self.l as i64;
        let lam = self.l as f64 + 1.0;
        let (s, c) = (0.5 * k).sin_cos();
        let g = gegenbauer(n, lam, c);
        let g1 = 2.0 * lam * gegenbauer(n - 1, lam + 1.0, c);
        let g2 = 4.0 * lam * (lam + 1.0) * gegenbauer(n - 2, lam + 2.0, c);
        (s, c, g, g1, g2)
    }

    pub fn value(&self, k: f64) -> f64 {
        let (s, _, g, _, _) = self.parts(k);
        self.amplitude * s.powi(self.l as i32) * g
    }

    pub fn derivative(&self, k: f64) -> f64 {
        let (s, c, g, g1, _) = self.parts(k);
        let l = self.l as i32;
        let lf = self.l as f64;
        let first = if l == 0 {
            0.0
        } else {
            0.5 * lf * s.powi(l - 1) * c * g
        };
        self.amplitude * (first - 0.5 * s.powi(l + 1) * g1)
    }

    pub fn second_derivative(&self, k: f64) -> f64 {
        let (s, c, g, g1, g2) = self.parts(k);
        let l = self.l as i32;
        let lf = self.l as f64;
        let mut v = -0.25 * lf * s.powi(l) * g - 0.25 * (2.0 * lf + 1.0) * s.powi(l) * c * g1
            + 0.25 * s.powi(l + 2) * g2;
        if l >= 2 {
            v += 0.25 * lf * (lf - 1.0) * s.powi(l - 2) * c * c * g;
        }
        self.amplitude * v
    }

    /// f'' + ctg(k/2) f' + (j(j+1) − l(l+1)/(4 sin²(k/2))) f.
    pub fn ode_residual(&self, k: f64) -> f64 {
        let jj = self.j.j();
        let lf = self.l as f64;
        let s = (0.5 * k).sin();
        self.second_derivative(k)
            + self.derivative(k) / (0.5 * k).tan()
            + (jj * (jj + 1.0) - lf * (lf + 1.0) / (4.0 * s * s)) * self.value(k)
    }

    /// max |residual| / max |f| over `samples` points of [a, b].
    pub fn max_relative_residual(&self, a: f64, b: f64, samples: usize) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..samples {
            let k = a + (b - a) * i as f64 / (samples - 1).max(1) as f64;
            worst = worst.max(self.ode_residual(k).abs());
            scale = scale.max(self.value(k).abs());
        }
        worst / scale.max(1e-300)
    }
}

/// Q{j}_lm(u) = f_jl(k) Y_lm(n̄).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultipoleQ {
    pub profile: RadialProfile,
    pub m: i64,
}

pub fn multipole_q(j: SpinLabel, l: usize, m: i64) -> Result<MultipoleQ> {
    let profile = radial_profile(j, l)?;
    if m.unsigned_abs() as usize > l {
        return Err(Error::LabelOutOfRange {
            what: format!("m = {m} for l = {l}"),
        });
    }
    Ok(MultipoleQ { profile, m })
}

impl MultipoleQ {
    pub fn l(&self) -> usize {
        self.profile.l
    }

    pub fn eval(&self, u: &UnitQuaternion) -> Complex64 {
        let kv = log_su2(u).vector;
        let k = kv.angle();
        let f = self.profile.value(k);
        if f == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        spherical_harmonic_dir(self.l(), self.m, &kv.0) * f
    }

    pub fn to_grid_function(&self, grid: Arc<QuadratureGrid>) -> GridFunction {
        let q = *self;
        GridFunction::from_fn(grid, move |u| q.eval(u))
    }
}

/// All Q{j}_lm in (l, m) order.
pub fn multipole_family(j: SpinLabel) -> Vec<MultipoleQ> {
    let mut out = Vec::new();
    for l in 0..=j.two_j as usize {
        for m in -(l as i64)..=(l as i64) {
            out.push(multipole_q(j, l, m).expect("in range"));
        }
    }
    out
}

/// Gram matrix ∫ conj(Q_a) Q_b dμ over the family.
pub fn multipole_gram(j: SpinLabel, grid: &QuadratureGrid) -> DMatrix<Complex64> {
    let fam = multipole_family(j);
    let n = fam.len();
    let mut g = DMatrix::<Complex64>::zeros(n, n);
    let mut v = nalgebra::DVector::<Complex64>::zeros(n);
    for node in &grid.nodes {
        for (i, q) in fam.iter().enumerate() {
            v[i] = q.eval(&node.q);
        }
        g.ger(
            Complex64::new(node.weight, 0.0),
            &v.conjugate(),
            &v,
            Complex64::new(1.0, 0.0),
        );
    }
    g
}

/// Number of singular values above `rel_tol` times the largest.
pub fn numerical_rank(m: &DMatrix<Complex64>, rel_tol: f64) -> usize {
    let sv = m.clone().singular_values();
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|s| **s > rel_tol * top).count()
}

/// Number of linearly independent Q{j}_lm on the grid.
pub fn independent_multipole_count(j: SpinLabel, grid: &QuadratureGrid) -> usize {
    numerical_rank(&multipole_gram(j, grid), 1e-9)
}

/// max_m |Q_lm(g u g⁻¹) − Σ_n Q_ln(u) D(l)_nm(g⁻¹)|, where D(l) is indexed by standard labels.
pub fn transformation_law_residual(
    j: SpinLabel,
    l: usize,
    g: &UnitQuaternion,
    u: &UnitQuaternion,
) -> Result<f64> {
    let w = wigner_d(SpinLabel::new(2 * l as u32), g).matrix;
    let li = l as i64;
    let conj_u = *g * *u * g.inverse();
    let mut worst: f64 = 0.0;
    for m in -li..=li {
        let lhs = multipole_q(j, l, m)?.eval(&conj_u);
        let mut rhs = Complex64::new(0.0, 0.0);
        for n in -li..=li {
            let d = w[((li - m) as usize, (li - n) as usize)].conj();
            rhs += multipole_q(j, l, n)?.eval(u) * d;
        }
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}
