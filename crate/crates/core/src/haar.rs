//! Killing metric on the group, Haar densities in the paper's charts, and the
//! tensor-product quadrature grid used for integration over SU(2) or SO(3).

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liealgebra::CHART_GUARD;
use crate::quadrature::{gauss_legendre, gauss_legendre_on};
use crate::rotations::{
    exp_su2, sinc_half, EulerAngles, GibbsVector, Mat3, RotationVector, UnitQuaternion, Vec3,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricAtPoint {
    pub g: Mat3,
    pub ginv: Mat3,
    pub sqrtdet: f64,
}

/// 4 sin²(k/2)/k².
pub fn transverse_factor(k: f64) -> f64 {
    let s = sinc_half(k);
    4.0 * s * s
}

fn split_metric(k: &Vec3, radial: f64, transverse: f64) -> Mat3 {
    let kk = k.norm();
    if kk == 0.0 {
        return Mat3::identity() * transverse;
    }
    let n = k / kk;
    let p = n * n.transpose();
    p * radial + (Mat3::identity() - p) * transverse
}

/// Metric of ds² = dk² + 4 sin²(k/2) dΩ² in Cartesian k̄ components.
pub fn metric_at(k: &RotationVector) -> Result<MetricAtPoint> {
    let kk = k.angle();
    if !kk.is_finite() || kk >= TAU - CHART_GUARD {
        return Err(Error::ChartSingular {
            chart: "canonical coordinates",
            k: kk,
        });
    }
    let t = transverse_factor(kk);
    Ok(MetricAtPoint {
        g: split_metric(&k.0, 1.0, t),
        ginv: split_metric(&k.0, 1.0, 1.0 / t),
        sqrtdet: t,
    })
}

/// Metric of Eq. (3.48) in (ϑ, φ, ψ) order.
pub fn euler_metric(e: &EulerAngles) -> Result<MetricAtPoint> {
    let s = e.theta.sin();
    if s.abs() < 1e-10 {
        return Err(Error::ChartSingular {
            chart: "Euler angles",
            k: e.theta,
        });
    }
    let c = e.theta.cos();
    let g = Mat3::new(1.0, 0.0, 0.0, 0.0, 1.0, c, 0.0, c, 1.0);
    let ginv = Mat3::new(
        1.0,
        0.0,
        0.0,
        0.0,
        1.0 / (s * s),
        -c / (s * s),
        0.0,
        -c / (s * s),
        1.0 / (s * s),
    );
    Ok(MetricAtPoint {
        g,
        ginv,
        sqrtdet: s.abs(),
    })
}

/// α = φ + ψ, β = φ − ψ (Eq. 3.50): returns (α, ϑ, β).
pub fn euler_to_sum_difference(e: &EulerAngles) -> (f64, f64, f64) {
    (e.phi + e.psi, e.theta, e.phi - e.psi)
}

pub fn sum_difference_to_euler(alpha: f64, theta: f64, beta: f64) -> EulerAngles {
    EulerAngles {
        phi: 0.5 * (alpha + beta),
        theta,
        psi: 0.5 * (alpha - beta),
    }
}

/// ρ̄ = a tan(k/4) n̄.
pub fn conformal_coords(k: &RotationVector, a: f64) -> Result<Vec3> {
    let kk = k.angle();
    if kk >= TAU - CHART_GUARD {
        return Err(Error::ChartSingular {
            chart: "conformal coordinates",
            k: kk,
        });
    }
    if kk == 0.0 {
        return Ok(Vec3::zeros());
    }
    Ok(k.0 * (a * (0.25 * kk).tan() / kk))
}

pub fn rotvec_from_conformal(rho: &Vec3, a: f64) -> RotationVector {
    let r = rho.norm();
    if r == 0.0 {
        return RotationVector(Vec3::zeros());
    }
    RotationVector(rho * (4.0 * (r / a).atan() / r))
}

/// 16a²/(a²+ρ²)².
pub fn conformal_factor(rho: f64, a: f64) -> f64 {
    let d = a * a + rho * rho;
    16.0 * a * a / (d * d)
}

/// Metric of Eq. (3.56) in Cartesian ϰ̄ components.
pub fn projective_metric(kappa: &GibbsVector) -> MetricAtPoint {
    let k2 = kappa.0.norm_squared();
    let t = 4.0 / (4.0 + k2);
    let radial = t * t;
    MetricAtPoint {
        g: split_metric(&kappa.0, radial, t),
        ginv: split_metric(&kappa.0, 1.0 / radial, 1.0 / t),
        sqrtdet: radial * t,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    SU2,
    SO3,
}

impl GroupKind {
    /// Unnormalized volume 16π² or 8π².
    pub fn volume(self) -> f64 {
        match self {
            GroupKind::SU2 => 16.0 * PI * PI,
            GroupKind::SO3 => 8.0 * PI * PI,
        }
    }

    pub fn k_max(self) -> f64 {
        match self {
            GroupKind::SU2 => TAU,
            GroupKind::SO3 => PI,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridNode {
    pub k: f64,
    pub theta: f64,
    pub phi: f64,
    pub weight: f64,
    pub q: UnitQuaternion,
}

/// Tensor-product Haar quadrature: Gauss–Legendre in k and cos θ, trapezoid in φ.
#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    pub group: GroupKind,
    pub resolution: (usize, usize, usize),
    pub nodes: Vec<GridNode>,
    /// Ascending k nodes.
    pub k_nodes: Vec<f64>,
    /// Ascending cos θ nodes.
    pub cos_theta_nodes: Vec<f64>,
    /// Quadrature estimate of the unnormalized volume ∫ 4 sin²(k/2) sinθ dk dθ dφ.
    pub raw_volume: f64,
}

impl PartialEq for QuadratureGrid {
    fn eq(&self, o: &Self) -> bool {
        self.group == o.group && self.resolution == o.resolution
    }
}

fn cart(k: f64, theta: f64, phi: f64) -> Vec3 {
    Vec3::new(
        k * theta.sin() * phi.cos(),
        k * theta.sin() * phi.sin(),
        k * theta.cos(),
    )
}

pub fn build_grid(
    n_k: usize,
    n_theta: usize,
    n_phi: usize,
    group: GroupKind,
) -> Result<QuadratureGrid> {
    if n_k < 2 || n_theta < 2 || n_phi < 2 {
        return Err(Error::InvalidInput {
            reason: format!("grid sizes must be >= 2, got {n_k}x{n_theta}x{n_phi}"),
        });
    }
    let (ks, wk) = gauss_legendre_on(n_k, 0.0, group.k_max());
    let (cs, wc) = gauss_legendre(n_theta);
    let dphi = TAU / n_phi as f64;
    let mut nodes = Vec::with_capacity(n_k * n_theta * n_phi);
    let mut raw_volume = 0.0;
    for (k, wk) in ks.iter().zip(&wk) {
        let radial = 4.0 * (0.5 * k).sin().powi(2) * wk;
        for (c, wc) in cs.iter().zip(&wc) {
            let theta = c.acos();
            for ip in 0..n_phi {
                let phi = ip as f64 * dphi;
                let w = radial * wc * dphi;
                raw_volume += w;
                nodes.push(GridNode {
                    k: *k,
                    theta,
                    phi,
                    weight: w,
                    q: exp_su2(&RotationVector(cart(*k, theta, phi))),
                });
            }
        }
    }
    for n in &mut nodes {
        n.weight /= raw_volume;
    }
    Ok(QuadratureGrid {
        group,
        resolution: (n_k, n_theta, n_phi),
        nodes,
        k_nodes: ks,
        cos_theta_nodes: cs,
        raw_volume,
    })
}

/// Default library grid 48×32×64 on SU(2).
pub fn default_grid() -> QuadratureGrid {
    build_grid(48, 32, 64, GroupKind::SU2).expect("valid default")
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index(&self, ik: usize, it: usize, ip: usize) -> usize {
        let (_, nt, np) = self.resolution;
        (ik * nt + it) * np + ip
    }

    pub fn unindex(&self, i: usize) -> (usize, usize, usize) {
        let (_, nt, np) = self.resolution;
        (i / (nt * np), (i / np) % nt, i % np)
    }

    /// Node holding u⁻¹ for node i (needs an even φ count).
    pub fn inverse_index(&self, i: usize) -> Option<usize> {
        let (_, nt, np) = self.resolution;
        if np % 2 != 0 {
            return None;
        }
        let (ik, it, ip) = self.unindex(i);
        Some(self.index(ik, nt - 1 - it, (ip + np / 2) % np))
    }

    pub fn check_same(&self, o: &QuadratureGrid) -> Result<()> {
        if self == o {
            Ok(())
        } else {
            Err(Error::ResolutionMismatch {
                left: self.resolution,
                right: o.resolution,
            })
        }
    }

    pub fn weight_sum(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }

    /// Quadrature estimate of the unnormalized group volume.
    pub fn unnormalized_volume(&self) -> f64 {
        self.raw_volume
    }

    pub fn integrate<F: Fn(&UnitQuaternion) -> Complex64>(&self, f: F) -> Complex64 {
        self.nodes.iter().map(|n| f(&n.q) * n.weight).sum()
    }

    pub fn integrate_values(&self, values: &[Complex64]) -> Result<Complex64> {
        if values.len() != self.len() {
            return Err(Error::InvalidInput {
                reason: format!("{} values for {} nodes", values.len(), self.len()),
            });
        }
        Ok(self
            .nodes
            .iter()
            .zip(values)
            .map(|(n, v)| v * n.weight)
            .sum())
    }

    pub fn to_csv(&self) -> String {
        let (a, b, c) = self.resolution;
        let mut s = format!(
            "# group={:?} resolution={a},{b},{c}\nk,theta,phi,weight\n",
            self.group
        );
        for n in &self.nodes {
            let _ = writeln!(
                s,
                "{:.17e},{:.17e},{:.17e},{:.17e}",
                n.k, n.theta, n.phi, n.weight
            );
        }
        s
    }

    /// Rebuilds a grid from [`QuadratureGrid::to_csv`] output and checks the nodes match.
    pub fn from_csv(text: &str) -> Result<QuadratureGrid> {
        let bad = |r: &str| Error::InvalidInput {
            reason: format!("grid csv: {r}"),
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty"))?;
        let group = if header.contains("group=SU2") {
            GroupKind::SU2
        } else if header.contains("group=SO3") {
            GroupKind::SO3
        } else {
            return Err(bad("missing group"));
        };
        let res = header
            .split("resolution=")
            .nth(1)
            .ok_or_else(|| bad("missing resolution"))?;
        let dims: Vec<usize> = res
            .trim()
            .split(',')
            .map(|t| t.parse().map_err(|_| bad("resolution")))
            .collect::<Result<_>>()?;
        if dims.len() != 3 {
            return Err(bad("resolution"));
        }
        let grid = build_grid(dims[0], dims[1], dims[2], group)?;
        if lines.next().map(str::trim) != Some("k,theta,phi,weight") {
            return Err(bad("column header"));
        }
        let mut count = 0;
        for (line, node) in lines.zip(&grid.nodes) {
            let v: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| bad("number")))
                .collect::<Result<_>>()?;
            if v.len() != 4 {
                return Err(bad("row width"));
            }
            let d = (v[0] - node.k).abs()
                + (v[1] - node.theta).abs()
                + (v[2] - node.phi).abs()
                + (v[3] - node.weight).abs();
            if d > 1e-12 {
                return Err(bad("nodes do not match the stated resolution"));
            }
            count += 1;
        }
        if count != grid.len() {
            return Err(bad("row count"));
        }
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotations::{euler_to_quaternion, gibbs_from_rotvec, log_su2, rotvec_from_gibbs};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_k(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> RotationVector {
        let n = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        RotationVector(n.normalize() * rng.gen_range(lo..hi))
    }

    // Jacobian of a chart map by central differences
    fn jacobian(f: &dyn Fn(&Vec3) -> Vec3, x: &Vec3) -> Mat3 {
        let h = 1e-6;
        Mat3::from_fn(|i, j| {
            let mut xp = *x;
            xp[j] += h;
            let mut xm = *x;
            xm[j] -= h;
            (f(&xp)[i] - f(&xm)[i]) / (2.0 * h)
        })
    }

    #[test]
    fn metric_examples() {
        let m = metric_at(&RotationVector::new(1e-9, 0.0, 0.0)).unwrap();
        assert!((m.g - Mat3::identity()).abs().max() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let k = random_k(&mut rng, 0.01, 6.2);
            let m = metric_at(&k).unwrap();
            let kk = k.angle();
            let s = (0.5 * kk).sin();
            let det = 16.0 * s.powi(4) / kk.powi(4);
            assert!((m.g.determinant() - det).abs() < 1e-12 * det.max(1.0));
            assert!((m.g * m.ginv - Mat3::identity()).abs().max() < 1e-10);
            assert!((m.sqrtdet - 4.0 * s * s / (kk * kk)).abs() < 1e-12);
            let mut ev: Vec<f64> = m.g.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            let t = 4.0 * s * s / (kk * kk);
            let mut want = [1.0, t, t];
            want.sort_by(f64::total_cmp);
            for (a, b) in ev.iter().zip(want) {
                assert!((a - b).abs() < 1e-10);
            }
        }
        assert!(matches!(
            metric_at(&RotationVector::new(TAU, 0.0, 0.0)),
            Err(Error::ChartSingular { .. })
        ));
    }

    #[test]
    fn euler_metric_and_pullback() {
        let m = euler_metric(&EulerAngles {
            phi: 0.3,
            theta: PI / 2.0,
            psi: 1.0,
        })
        .unwrap();
        assert!((m.g - Mat3::identity()).abs().max() < 1e-15);
        assert!(euler_metric(&EulerAngles {
            phi: 0.0,
            theta: 0.0,
            psi: 0.0
        })
        .is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut checked = 0;
        while checked < 100 {
            let e = EulerAngles {
                phi: rng.gen_range(0.0..4.0 * PI),
                theta: rng.gen_range(0.1..3.0),
                psi: rng.gen_range(0.0..TAU),
            };
            let chart = |x: &Vec3| {
                log_su2(&euler_to_quaternion(&EulerAngles {
                    theta: x[0],
                    phi: x[1],
                    psi: x[2],
                }))
                .vector
                .0
            };
            let x = Vec3::new(e.theta, e.phi, e.psi);
            let k = RotationVector(chart(&x));
            if k.angle() > 6.0 || k.angle() < 0.1 {
                continue;
            }
            let j = jacobian(&chart, &x);
            let pulled = j.transpose() * metric_at(&k).unwrap().g * j;
            let m = euler_metric(&e).unwrap();
            assert!((pulled - m.g).abs().max() < 1e-8);
            assert!((m.sqrtdet - e.theta.sin()).abs() < 1e-15);
            assert!((m.g * m.ginv - Mat3::identity()).abs().max() < 1e-10);
            checked += 1;
        }
    }

    #[test]
    fn sum_difference_round_trip() {
        let e = EulerAngles {
            phi: 2.1,
            theta: 0.4,
            psi: 5.0,
        };
        let (a, t, b) = euler_to_sum_difference(&e);
        let back = sum_difference_to_euler(a, t, b);
        assert!(
            (back.phi - e.phi).abs() < 1e-15
                && (back.psi - e.psi).abs() < 1e-15
                && back.theta == e.theta
        );
    }

    #[test]
    fn conformal_examples() {
        assert_eq!(
            conformal_coords(&RotationVector::new(0.0, 0.0, 0.0), 1.0).unwrap(),
            Vec3::zeros()
        );
        let r = conformal_coords(&RotationVector::new(0.0, PI, 0.0), PI).unwrap();
        assert!((r.norm() - PI).abs() < 1e-14);
        assert_eq!(conformal_factor(0.0, 1.0), 16.0);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let a = rng.gen_range(0.5..3.0);
            let k = random_k(&mut rng, 0.05, 6.0);
            let rho = conformal_coords(&k, a).unwrap();
            assert!((rotvec_from_conformal(&rho, a).0 - k.0).norm() < 1e-12);
            let j = jacobian(
                &|x: &Vec3| conformal_coords(&RotationVector(*x), a).unwrap(),
                &k.0,
            );
            let pulled = j.transpose() * j * conformal_factor(rho.norm(), a);
            assert!((pulled - metric_at(&k).unwrap().g).abs().max() < 1e-8);
        }
        assert!(conformal_coords(&RotationVector::new(TAU, 0.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn projective_examples() {
        let m = projective_metric(&GibbsVector::new(0.0, 0.0, 0.0));
        assert_eq!(m.g, Mat3::identity());
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let k = random_k(&mut rng, 0.05, 3.0);
            let kappa = gibbs_from_rotvec(&k).unwrap();
            let j = jacobian(&|x: &Vec3| rotvec_from_gibbs(&GibbsVector(*x)).0, &kappa.0);
            let pulled = j.transpose() * metric_at(&k).unwrap().g * j;
            assert!((pulled - projective_metric(&kappa).g).abs().max() < 1e-8);
        }
        let far = projective_metric(&GibbsVector::new(0.0, 0.0, 1e4));
        assert!(far.g[(0, 0)] < 1e-7 && far.g[(2, 2)] < 1e-14);
    }

    #[test]
    fn grid_examples() {
        for (n, group) in [
            (2, GroupKind::SU2),
            (5, GroupKind::SO3),
            (12, GroupKind::SU2),
        ] {
            let g = build_grid(n, n, 2 * n, group).unwrap();
            assert!((g.weight_sum() - 1.0).abs() < 1e-12);
            assert!(g.nodes.iter().all(|n| n.weight > 0.0));
            assert!((g.integrate(|_| Complex64::new(1.0, 0.0)).re - 1.0).abs() < 1e-12);
        }
        let g = build_grid(64, 48, 96, GroupKind::SU2).unwrap();
        assert!((g.unnormalized_volume() / (16.0 * PI * PI) - 1.0).abs() < 1e-8);
        let g = build_grid(64, 48, 96, GroupKind::SO3).unwrap();
        assert!((g.unnormalized_volume() / (8.0 * PI * PI) - 1.0).abs() < 1e-8);
        assert!(build_grid(1, 4, 4, GroupKind::SU2).is_err());
    }

    #[test]
    fn inverse_lookup() {
        let g = build_grid(6, 5, 8, GroupKind::SU2).unwrap();
        for i in 0..g.len() {
            let j = g.inverse_index(i).unwrap();
            assert!(g.nodes[j].q.distance(&g.nodes[i].q.inverse()) < 1e-14);
        }
        assert!(build_grid(6, 5, 7, GroupKind::SU2)
            .unwrap()
            .inverse_index(0)
            .is_none());
    }

    #[test]
    fn csv_round_trip() {
        let g = build_grid(4, 3, 6, GroupKind::SO3).unwrap();
        let text = g.to_csv();
        let back = QuadratureGrid::from_csv(&text).unwrap();
        assert_eq!(back, g);
        assert!(
            QuadratureGrid::from_csv(&text.replace("resolution=4,3,6", "resolution=4,3,5"))
                .is_err()
        );
    }

    #[test]
    fn su2_polynomials_integrate_exactly() {
        // ∫ (ξ⁰)² dμ = 1/4 and ∫ (ξ⁰)⁴ dμ = 1/8 for Haar on S³
        let g = build_grid(16, 8, 8, GroupKind::SU2).unwrap();
        let m2 = g.integrate(|q| Complex64::new(q.xi0 * q.xi0, 0.0)).re;
        let m4 = g.integrate(|q| Complex64::new(q.xi0.powi(4), 0.0)).re;
        let z2 = g
            .integrate(|q| Complex64::new(q.xi3 * q.xi3 * q.xi1 * q.xi1, 0.0))
            .re;
        assert!((m2 - 0.25).abs() < 1e-12);
        assert!((m4 - 0.125).abs() < 1e-12);
        assert!((z2 - 1.0 / 24.0).abs() < 1e-12);
    }
}
