//! Lie–Poisson structure on the coalgebra ℝ³ ∋ σ̄ and transport of densities.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CasimirForm;
use crate::error::{Error, Result};
use crate::irreps::SpinLabel;
use crate::rotations::Vec3;

/// Scalar function on the coalgebra.
pub trait CoalgebraField: Send + Sync {
    fn value(&self, s: &Vec3) -> f64;

    /// Central differences unless overridden.
    fn gradient(&self, s: &Vec3) -> Vec3 {
        let h = 1e-5 * s.norm().max(1.0);
        let mut g = Vec3::zeros();
        for i in 0..3 {
            let mut p = *s;
            let mut m = *s;
            p[i] += h;
            m[i] -= h;
            g[i] = (self.value(&p) - self.value(&m)) / (2.0 * h);
        }
        g
    }
}

/// σ_i.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Coordinate(pub usize);

impl CoalgebraField for Coordinate {
    fn value(&self, s: &Vec3) -> f64 {
        s[self.0]
    }
    fn gradient(&self, _: &Vec3) -> Vec3 {
        let mut g = Vec3::zeros();
        g[self.0] = 1.0;
        g
    }
}

/// σ² = σ̄·σ̄.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CasimirSquare;

impl CoalgebraField for CasimirSquare {
    fn value(&self, s: &Vec3) -> f64 {
        s.norm_squared()
    }
    fn gradient(&self, s: &Vec3) -> Vec3 {
        s * 2.0
    }
}

/// σ = |σ̄|.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SigmaNorm;

impl CoalgebraField for SigmaNorm {
    fn value(&self, s: &Vec3) -> f64 {
        s.norm()
    }
    fn gradient(&self, s: &Vec3) -> Vec3 {
        s / s.norm()
    }
}

/// φ = atan2(σ₂, σ₁).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Azimuth;

impl CoalgebraField for Azimuth {
    fn value(&self, s: &Vec3) -> f64 {
        s.y.atan2(s.x)
    }
    fn gradient(&self, s: &Vec3) -> Vec3 {
        let r2 = s.x * s.x + s.y * s.y;
        Vec3::new(-s.y / r2, s.x / r2, 0.0)
    }
}

/// H = Σ σ_a²/(2I_a).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TopHamiltonian {
    pub inertia: [f64; 3],
}

impl CoalgebraField for TopHamiltonian {
    fn value(&self, s: &Vec3) -> f64 {
        (0..3).map(|a| s[a] * s[a] / (2.0 * self.inertia[a])).sum()
    }
    fn gradient(&self, s: &Vec3) -> Vec3 {
        Vec3::new(
            s.x / self.inertia[0],
            s.y / self.inertia[1],
            s.z / self.inertia[2],
        )
    }
}

/// amplitude · exp(−|σ̄ − c|²/(2w²)).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianBlob {
    pub center: Vec3,
    pub width: f64,
    pub amplitude: f64,
}

impl CoalgebraField for GaussianBlob {
    fn value(&self, s: &Vec3) -> f64 {
        self.amplitude * (-(s - self.center).norm_squared() / (2.0 * self.width * self.width)).exp()
    }
    fn gradient(&self, s: &Vec3) -> Vec3 {
        (self.center - s) * (self.value(s) / (self.width * self.width))
    }
}

/// Closure-backed field with finite-difference gradient.
pub struct FnField<F: Fn(&Vec3) -> f64 + Send + Sync>(pub F);

impl<F: Fn(&Vec3) -> f64 + Send + Sync> CoalgebraField for FnField<F> {
    fn value(&self, s: &Vec3) -> f64 {
        (self.0)(s)
    }
}

/// {A, B}(σ̄) = σ_k ε^k_ij ∂_iA ∂_jB.
pub fn lie_poisson_bracket(a: &dyn CoalgebraField, b: &dyn CoalgebraField, s: &Vec3) -> f64 {
    s.dot(&a.gradient(s).cross(&b.gradient(s)))
}

/// max_ij |{σ_i, σ_j} − ε_ijk σ_k|.
pub fn coordinate_bracket_residual(s: &Vec3) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let expect: f64 = (0..3)
                .map(|k| crate::liealgebra::levi_civita(i, j, k) * s[k])
                .sum();
            worst =
                worst.max((lie_poisson_bracket(&Coordinate(i), &Coordinate(j), s) - expect).abs());
        }
    }
    worst
}

/// |{A,{B,C}} + {B,{C,A}} + {C,{A,B}}| with the inner brackets differentiated numerically.
pub fn jacobi_residual(
    a: &dyn CoalgebraField,
    b: &dyn CoalgebraField,
    c: &dyn CoalgebraField,
    s: &Vec3,
) -> f64 {
    let bc = FnField(|x: &Vec3| lie_poisson_bracket(b, c, x));
    let ca = FnField(|x: &Vec3| lie_poisson_bracket(c, a, x));
    let ab = FnField(|x: &Vec3| lie_poisson_bracket(a, b, x));
    (lie_poisson_bracket(a, &bc, s)
        + lie_poisson_bracket(b, &ca, s)
        + lie_poisson_bracket(c, &ab, s))
    .abs()
}

/// Darboux chart (σ, σ₃, φ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DarbouxPoint {
    pub sigma: f64,
    pub sigma3: f64,
    pub phi: f64,
}

pub fn to_darboux(s: &Vec3) -> Result<DarbouxPoint> {
    let rho = s.x.hypot(s.y);
    if rho <= 1e-12 * s.norm().max(1.0) {
        return Err(Error::ChartSingular {
            chart: "darboux",
            k: s.norm(),
        });
    }
    Ok(DarbouxPoint {
        sigma: s.norm(),
        sigma3: s.z,
        phi: s.y.atan2(s.x),
    })
}

pub fn from_darboux(d: &DarbouxPoint) -> Result<Vec3> {
    if d.sigma < d.sigma3.abs() {
        return Err(Error::InvalidInput {
            reason: "sigma < |sigma3|".into(),
        });
    }
    let rho = (d.sigma * d.sigma - d.sigma3 * d.sigma3).sqrt();
    Ok(Vec3::new(rho * d.phi.cos(), rho * d.phi.sin(), d.sigma3))
}

/// [{φ, σ₃} − 1, {σ, φ}, {σ, σ₃}] at an off-axis point.
pub fn darboux_residuals(s: &Vec3) -> Result<[f64; 3]> {
    to_darboux(s)?;
    Ok([
        lie_poisson_bracket(&Azimuth, &Coordinate(2), s) - 1.0,
        lie_poisson_bracket(&SigmaNorm, &Azimuth, s),
        lie_poisson_bracket(&SigmaNorm, &Coordinate(2), s),
    ])
}

/// {σ₃, f} + ∂f/∂φ at fixed (σ, σ₃); the bracket equals −∂f/∂φ.
pub fn sigma3_azimuth_residual(f: &dyn CoalgebraField, s: &Vec3) -> Result<f64> {
    let d = to_darboux(s)?;
    let h = 1e-5;
    let at = |phi: f64| from_darboux(&DarbouxPoint { phi, ..d }).map(|x| f.value(&x));
    let dphi = (at(d.phi + h)? - at(d.phi - h)?) / (2.0 * h);
    Ok(lie_poisson_bracket(&Coordinate(2), f, s) + dphi)
}

/// Uniform Cartesian sample of the cube [−L, L]³ (cell centres).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoalgebraGrid {
    pub n: usize,
    pub half_width: f64,
}

impl CoalgebraGrid {
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn points(&self) -> Vec<Vec3> {
        let h = self.spacing();
        let c = |i: usize| -self.half_width + (i as f64 + 0.5) * h;
        let mut out = Vec::with_capacity(self.n.pow(3));
        for i in 0..self.n {
            for j in 0..self.n {
                for k in 0..self.n {
                    out.push(Vec3::new(c(i), c(j), c(k)));
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub energy: f64,
    pub casimir: f64,
    pub norm: f64,
    /// max over nodes of |σ²(foot) − σ²(node)| / max(1, σ²(node)).
    pub pointwise_casimir_drift: f64,
    /// max over nodes of |H(foot) − H(node)| / max(1, |H(node)|).
    pub pointwise_energy_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evolution {
    pub grid: CoalgebraGrid,
    pub dt: f64,
    pub snapshots: Vec<Snapshot>,
    /// ϱ(σ̄, t_final) on the grid points.
    pub density: Vec<f64>,
}

impl Evolution {
    /// Largest relative change of ∫Hϱ over the trajectory.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.snapshots[0].energy;
        self.snapshots
            .iter()
            .map(|s| (s.energy - e0).abs())
            .fold(0.0, f64::max)
            / e0.abs().max(1e-300)
    }

    pub fn casimir_drift(&self) -> f64 {
        let c0 = self.snapshots[0].casimir;
        self.snapshots
            .iter()
            .map(|s| (s.casimir - c0).abs())
            .fold(0.0, f64::max)
            / c0.abs().max(1e-300)
    }

    pub fn norm_drift(&self) -> f64 {
        let n0 = self.snapshots[0].norm;
        self.snapshots
            .iter()
            .map(|s| (s.norm - n0).abs())
            .fold(0.0, f64::max)
            / n0.abs().max(1e-300)
    }

    pub fn max_pointwise_casimir_drift(&self) -> f64 {
        self.snapshots
            .iter()
            .map(|s| s.pointwise_casimir_drift)
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,energy,casimir,norm\n");
        for s in &self.snapshots {
            out.push_str(&format!(
                "{:.12e},{:.17e},{:.17e},{:.17e}\n",
                s.t, s.energy, s.casimir, s.norm
            ));
        }
        out
    }
}

/// Hamiltonian vector field σ̇ = {σ̄, H} = ∇H × σ̄.
pub fn hamiltonian_velocity(h: &dyn CoalgebraField, s: &Vec3) -> Vec3 {
    h.gradient(s).cross(s)
}

fn rk4_step(h: &dyn CoalgebraField, y: &Vec3, dt: f64) -> Vec3 {
    let f = |x: &Vec3| hamiltonian_velocity(h, x);
    let k1 = f(y);
    let k2 = f(&(y + k1 * (0.5 * dt)));
    let k3 = f(&(y + k2 * (0.5 * dt)));
    let k4 = f(&(y + k3 * dt));
    y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// Solves ∂ϱ/∂t = {H, ϱ} by following characteristics backwards with RK4:
/// ϱ(σ̄, t) = ϱ₀(Φ₋ₜ σ̄).
pub fn evolve_density(
    h: &dyn CoalgebraField,
    rho0: &dyn CoalgebraField,
    grid: CoalgebraGrid,
    dt: f64,
    steps: usize,
    record_every: usize,
) -> Result<Evolution> {
    if !(dt.is_finite() && dt > 0.0) || grid.n == 0 || !(grid.half_width > 0.0) {
        return Err(Error::InvalidInput {
            reason: "need dt > 0 and a non-empty grid".into(),
        });
    }
    let points = grid.points();
    let speed = points
        .iter()
        .map(|p| hamiltonian_velocity(h, p).norm())
        .fold(0.0, f64::max);
    if speed * dt > grid.spacing() {
        return Err(Error::StepUnstable {
            courant: speed * dt,
            spacing: grid.spacing(),
        });
    }
    let every = record_every.max(1);
    let dv = grid.cell_volume();
    let h_nodes: Vec<f64> = points.iter().map(|p| h.value(p)).collect();
    let c_nodes: Vec<f64> = points.iter().map(|p| p.norm_squared()).collect();
    let mut feet = points.clone();
    let snapshot = |t: f64, feet: &[Vec3]| {
        let rho: Vec<f64> = feet.par_iter().map(|y| rho0.value(y)).collect();
        let mut s = Snapshot {
            t,
            energy: 0.0,
            casimir: 0.0,
            norm: 0.0,
            pointwise_casimir_drift: 0.0,
            pointwise_energy_drift: 0.0,
        };
        for i in 0..feet.len() {
            s.energy += h_nodes[i] * rho[i] * dv;
            s.casimir += c_nodes[i] * rho[i] * dv;
            s.norm += rho[i] * dv;
            s.pointwise_casimir_drift = s
                .pointwise_casimir_drift
                .max((feet[i].norm_squared() - c_nodes[i]).abs() / c_nodes[i].max(1.0));
            s.pointwise_energy_drift = s
                .pointwise_energy_drift
                .max((h.value(&feet[i]) - h_nodes[i]).abs() / h_nodes[i].abs().max(1.0));
        }
        (s, rho)
    };
    let (s0, mut rho) = snapshot(0.0, &feet);
    let mut snapshots = vec![s0];
    for step in 1..=steps {
        feet.par_iter_mut().for_each(|y| *y = rk4_step(h, y, -dt));
        if step % every == 0 || step == steps {
            let (s, r) = snapshot(step as f64 * dt, &feet);
            snapshots.push(s);
            rho = r;
        }
    }
    Ok(Evolution {
        grid,
        dt,
        snapshots,
        density: rho,
    })
}

/// How the orbit normalization N(j) is fixed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitNormalization {
    /// N = 8π²ħ³(2j+1), from ε(j)_mn(0) = (2j+1)δ_mn.
    #[default]
    Derived,
    /// N = 16π²ħ⁴(j+½)².
    Printed,
}

/// ε̂(j)_mn = N δ(σ² − ħ²λ) δ(σ₃ − ħ(m+n)/2) e^{i(m−n)φ}, kept symbolic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitState {
    pub j: SpinLabel,
    pub m: f64,
    pub n: f64,
    pub hbar: f64,
    pub radius: CasimirForm,
    pub normalization: OrbitNormalization,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitResiduals {
    /// |σ² − ħ²j(j+1)| on the support.
    pub casimir: f64,
    /// Multiplier of σ₃ε̂ + ½ iħ{σ₃, ε̂} minus mħ.
    pub sum_relation: f64,
    /// Multiplier of σ₃ε̂ − ½ iħ{σ₃, ε̂} minus nħ.
    pub difference_relation: f64,
    /// Multiplier of iħ{σ₃, ε̂} minus (m−n)ħ.
    pub bracket_relation: f64,
    /// max over φ of |iħ{σ₃, ε̂} − (m−n)ħε̂| with a central difference in φ.
    pub bracket_relation_fd: f64,
    /// ε(j)_mn(0) − (2j+1)δ_mn.
    pub normalization: f64,
}

pub fn orbit_state(
    j: SpinLabel,
    m: f64,
    n: f64,
    hbar: f64,
    radius: CasimirForm,
) -> Result<OrbitState> {
    j.index_of(m)?;
    j.index_of(n)?;
    if !(hbar > 0.0) {
        return Err(Error::InvalidInput {
            reason: "hbar must be positive".into(),
        });
    }
    Ok(OrbitState {
        j,
        m,
        n,
        hbar,
        radius,
        normalization: OrbitNormalization::Derived,
    })
}

impl OrbitState {
    pub fn support_radius(&self) -> f64 {
        self.hbar * self.radius.value(self.j.j()).sqrt()
    }

    pub fn sigma3_level(&self) -> f64 {
        0.5 * self.hbar * (self.m + self.n)
    }

    pub fn winding(&self) -> f64 {
        self.m - self.n
    }

    pub fn normalization_factor(&self) -> f64 {
        let jj = self.j.j();
        match self.normalization {
            OrbitNormalization::Derived => 8.0 * PI * PI * self.hbar.powi(3) * (2.0 * jj + 1.0),
            OrbitNormalization::Printed => 16.0 * PI * PI * self.hbar.powi(4) * (jj + 0.5).powi(2),
        }
    }

    /// Angular factor e^{i(m−n)φ} on the support.
    pub fn profile(&self, phi: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.winding() * phi)
    }

    /// (2πħ)⁻³ ∫ ε̂ d³σ: the δ(σ²−R²) shell contributes ½ per unit ρdρ, φ is integrated by the trapezoid rule.
    pub fn value_at_origin(&self) -> Complex64 {
        let n = 64;
        let phi_int: Complex64 = (0..n)
            .map(|i| self.profile(TAU * i as f64 / n as f64))
            .sum::<Complex64>()
            * (TAU / n as f64);
        phi_int * (0.5 * self.normalization_factor() / (TAU * self.hbar).powi(3))
    }

    pub fn eigencheck(&self) -> OrbitResiduals {
        let hb = self.hbar;
        let jj = self.j.j();
        let r = self.support_radius();
        let i = Complex64::new(0.0, 1.0);
        let s3 = self.sigma3_level();
        let w = self.winding();
        let mut out = OrbitResiduals {
            casimir: (r * r - hb * hb * jj * (jj + 1.0)).abs(),
            sum_relation: 0.0,
            difference_relation: 0.0,
            bracket_relation: 0.0,
            bracket_relation_fd: 0.0,
            normalization: 0.0,
        };
        // ε̂ is an eigenfunction of f ↦ iħ{σ₃, f} with multiplier iħ·(−i(m−n)).
        let mu = i * hb * (-(i * w));
        out.sum_relation = (mu * 0.5 + s3 - self.m * hb).norm();
        out.difference_relation = (-(mu * 0.5) + s3 - self.n * hb).norm();
        out.bracket_relation = (mu - w * hb).norm();
        let h = 1e-5;
        for k in 0..16 {
            let phi = TAU * k as f64 / 16.0 + 0.1;
            let e = self.profile(phi);
            let bracket_fd = -(self.profile(phi + h) - self.profile(phi - h)) / (2.0 * h);
            out.bracket_relation_fd = out
                .bracket_relation_fd
                .max((i * hb * bracket_fd - e * (w * hb)).norm());
        }
        let expect = if self.m == self.n {
            2.0 * jj + 1.0
        } else {
            0.0
        };
        out.normalization = (self.value_at_origin() - expect).norm();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vec3() -> impl Strategy<Value = Vec3> {
        (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b, c)| Vec3::new(a, b, c))
    }

    #[test]
    fn coordinate_brackets() {
        let s = Vec3::new(0.3, -1.2, 0.7);
        assert!(coordinate_bracket_residual(&s) < 1e-15);
        assert_eq!(lie_poisson_bracket(&Coordinate(0), &Coordinate(1), &s), s.z);
    }

    #[test]
    fn darboux_chart() {
        let s = Vec3::new(0.4, 0.9, -0.3);
        for r in darboux_residuals(&s).unwrap() {
            assert!(r.abs() < 1e-12);
        }
        let d = to_darboux(&s).unwrap();
        assert!((from_darboux(&d).unwrap() - s).norm() < 1e-15);
        assert!(matches!(
            to_darboux(&Vec3::new(0.0, 0.0, 1.0)),
            Err(Error::ChartSingular { .. })
        ));
    }

    #[test]
    fn sigma3_generates_rotations_in_phi() {
        let f = FnField(|x: &Vec3| (x.x * x.y + 0.3 * x.z).sin() + x.x.powi(3));
        for s in [Vec3::new(0.4, 0.9, -0.3), Vec3::new(-1.1, 0.2, 0.8)] {
            assert!(sigma3_azimuth_residual(&f, &s).unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn casimir_is_central() {
        let h = TopHamiltonian {
            inertia: [1.0, 2.0, 3.0],
        };
        let s = Vec3::new(0.5, -0.4, 1.3);
        assert!(lie_poisson_bracket(&CasimirSquare, &h, &s).abs() < 1e-15);
        assert!(lie_poisson_bracket(&CasimirSquare, &Coordinate(1), &s).abs() < 1e-15);
    }

    #[test]
    fn fd_gradient_default() {
        let g = GaussianBlob {
            center: Vec3::new(0.2, 0.1, -0.3),
            width: 0.7,
            amplitude: 1.5,
        };
        let f = FnField(|x: &Vec3| g.value(x));
        let s = Vec3::new(0.4, -0.2, 0.1);
        assert!((f.gradient(&s) - g.gradient(&s)).norm() < 1e-9);
    }

    proptest! {
        #[test]
        fn bracket_antisymmetric_and_jacobi(s in vec3()) {
            let h = TopHamiltonian { inertia: [1.0, 2.0, 3.0] };
            let g = GaussianBlob { center: Vec3::new(0.2, 0.1, -0.3), width: 1.3, amplitude: 1.0 };
            prop_assert!((lie_poisson_bracket(&h, &g, &s) + lie_poisson_bracket(&g, &h, &s)).abs() < 1e-12);
            prop_assert!(coordinate_bracket_residual(&s) < 1e-12);
            prop_assert!(jacobi_residual(&Coordinate(0), &Coordinate(1), &Coordinate(2), &s) < 1e-8);
            prop_assert!(jacobi_residual(&Coordinate(2), &Coordinate(0), &h, &s) < 1e-8);
        }

        #[test]
        fn leibniz_rule(s in vec3()) {
            let a = TopHamiltonian { inertia: [1.0, 2.0, 3.0] };
            let b = Coordinate(0);
            let c = GaussianBlob { center: Vec3::new(0.2, 0.1, -0.3), width: 1.3, amplitude: 1.0 };
            let bc = FnField(|x: &Vec3| b.value(x) * c.value(x));
            let lhs = lie_poisson_bracket(&a, &bc, &s);
            let rhs = lie_poisson_bracket(&a, &b, &s) * c.value(&s) + b.value(&s) * lie_poisson_bracket(&a, &c, &s);
            prop_assert!((lhs - rhs).abs() < 1e-7 * (1.0 + rhs.abs()));
        }
    }

    fn blob() -> GaussianBlob {
        GaussianBlob {
            center: Vec3::new(1.0, 0.5, 0.8),
            width: 0.3,
            amplitude: 1.0,
        }
    }

    #[test]
    fn spherical_top_is_stationary() {
        let h = FnField(|x: &Vec3| x.norm_squared() / 4.0);
        let grid = CoalgebraGrid {
            n: 12,
            half_width: 2.5,
        };
        let ev = evolve_density(&h, &blob(), grid, 1e-2, 50, 50).unwrap();
        let rho0: Vec<f64> = grid.points().iter().map(|p| blob().value(p)).collect();
        let diff = ev
            .density
            .iter()
            .zip(&rho0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-9);
    }

    #[test]
    fn sigma3_rotates_rigidly() {
        let grid = CoalgebraGrid {
            n: 10,
            half_width: 2.5,
        };
        let t: f64 = 0.5;
        let ev = evolve_density(&Coordinate(2), &blob(), grid, 1e-2, 50, 10).unwrap();
        for (p, v) in grid.points().iter().zip(&ev.density) {
            let (c, s) = (t.cos(), t.sin());
            let back = Vec3::new(c * p.x + s * p.y, -s * p.x + c * p.y, p.z);
            assert!((v - blob().value(&back)).abs() < 1e-9);
            if let Ok(d) = to_darboux(p) {
                let shifted = from_darboux(&DarbouxPoint {
                    phi: d.phi - t,
                    ..d
                })
                .unwrap();
                assert!((v - blob().value(&shifted)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn asymmetric_top_conservation() {
        let h = TopHamiltonian {
            inertia: [1.0, 2.0, 3.0],
        };
        let grid = CoalgebraGrid {
            n: 32,
            half_width: 2.8,
        };
        let ev = evolve_density(&h, &blob(), grid, 1e-3, 1000, 100).unwrap();
        assert!(ev.max_pointwise_casimir_drift() < 1e-6);
        assert!(ev.energy_drift() < 1e-6, "{}", ev.energy_drift());
        assert!(ev.casimir_drift() < 1e-6);
        assert!(ev.norm_drift() < 1e-6);
        assert!(ev.to_csv().lines().count() == ev.snapshots.len() + 1);
    }

    #[test]
    fn unstable_step_rejected() {
        let h = TopHamiltonian {
            inertia: [0.1, 0.2, 0.3],
        };
        let grid = CoalgebraGrid {
            n: 40,
            half_width: 3.0,
        };
        assert!(matches!(
            evolve_density(&h, &blob(), grid, 0.5, 1, 1),
            Err(Error::StepUnstable { .. })
        ));
    }

    #[test]
    fn orbit_states() {
        let j = SpinLabel::new(3);
        let st = orbit_state(j, 0.5, 0.5, 1.0, CasimirForm::JJPlus1).unwrap();
        assert_eq!(st.winding(), 0.0);
        assert!((st.support_radius() - (1.5f64 * 2.5).sqrt()).abs() < 1e-15);
        assert!(st.profile(1.3).im == 0.0);
        let r = st.eigencheck();
        assert!(r.casimir < 1e-14 && r.normalization < 1e-12, "{r:?}");
        let half = orbit_state(j, 0.5, 0.5, 1.0, CasimirForm::HalfShifted).unwrap();
        assert!((half.support_radius() - 2.0).abs() < 1e-15);
        assert!((half.eigencheck().casimir - 0.25).abs() < 1e-14);
        for (m, n) in [(1.5, -0.5), (-1.5, 1.5), (0.5, -0.5)] {
            let st = orbit_state(j, m, n, 0.7, CasimirForm::JJPlus1).unwrap();
            let r = st.eigencheck();
            assert_eq!(r.bracket_relation, 0.0);
            assert!(r.sum_relation < 1e-14 && r.difference_relation < 1e-14);
            assert!(r.bracket_relation_fd < 1e-8);
            assert!(r.normalization < 1e-12);
            assert!((st.sigma3_level() - 0.35 * (m + n)).abs() < 1e-15);
        }
        assert!(matches!(
            orbit_state(j, 2.5, 0.5, 1.0, CasimirForm::JJPlus1),
            Err(Error::LabelOutOfRange { .. })
        ));
    }

    #[test]
    fn printed_normalization_differs() {
        let j = SpinLabel::new(4);
        let mut st = orbit_state(j, 1.0, 1.0, 1.0, CasimirForm::HalfShifted).unwrap();
        st.normalization = OrbitNormalization::Printed;
        let v = st.value_at_origin().re;
        assert!((v / 5.0 - 2.5).abs() < 1e-12);
    }
}
