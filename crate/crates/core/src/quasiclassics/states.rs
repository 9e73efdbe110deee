//! Band-limited superpositions ϱ = Σ P(j)_lm Q{j}_lm and the truncated-algebra convolution.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groupalgebra::generic_directions;
use crate::groupalgebra::{convolve_at, GridFunction};
use crate::groupalgebra::{radial_profile, spherical_harmonic_dir};
use crate::haar::{build_grid, GroupKind, QuadratureGrid};
use crate::irreps::SpinLabel;
use crate::rotations::{exp_su2, log_su2, RotationVector, UnitQuaternion, Vec3};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Which j values a window admits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    #[default]
    Both,
    Integer,
    HalfInteger,
}

/// j ∈ [j̄ − Δj/2, j̄ + Δj/2] with Gaussian weights truncated at 4σ (σ = Δj/8).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JWindow {
    pub j_bar: f64,
    pub delta_j: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowThresholds {
    /// Minimum j̄/Δj.
    pub min_ratio: f64,
    /// Minimum Δj.
    pub min_width: f64,
}

impl Default for WindowThresholds {
    fn default() -> Self {
        WindowThresholds {
            min_ratio: 2.0,
            min_width: 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowFlags {
    pub scale_separated: bool,
    pub wide: bool,
}

impl JWindow {
    pub fn new(j_bar: f64, delta_j: f64) -> Result<Self> {
        let w = JWindow { j_bar, delta_j };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.j_bar.is_finite() && self.delta_j.is_finite()) {
            return Err(Error::WindowInvalid {
                reason: "non-finite window".into(),
            });
        }
        if self.delta_j < 1.0 {
            return Err(Error::WindowInvalid {
                reason: format!("delta_j = {} < 1", self.delta_j),
            });
        }
        if self.j_bar <= 0.5 * self.delta_j {
            return Err(Error::WindowInvalid {
                reason: format!(
                    "j_bar = {} must exceed delta_j/2 = {}",
                    self.j_bar,
                    0.5 * self.delta_j
                ),
            });
        }
        Ok(())
    }

    pub fn flags(&self, t: &WindowThresholds) -> WindowFlags {
        WindowFlags {
            scale_separated: self.j_bar >= t.min_ratio * self.delta_j,
            wide: self.delta_j >= t.min_width,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.delta_j / 8.0
    }

    pub fn weight(&self, j: f64) -> f64 {
        let d = j - self.j_bar;
        if d.abs() > 0.5 * self.delta_j + 1e-12 {
            return 0.0;
        }
        (-0.5 * (d / self.sigma()).powi(2)).exp()
    }

    pub fn labels(&self, parity: Parity) -> Vec<SpinLabel> {
        let lo = (2.0 * (self.j_bar - 0.5 * self.delta_j) - 1e-9)
            .ceil()
            .max(0.0) as u32;
        let hi = (2.0 * (self.j_bar + 0.5 * self.delta_j) + 1e-9).floor() as u32;
        (lo..=hi)
            .filter(|t| match parity {
                Parity::Both => true,
                Parity::Integer => t % 2 == 0,
                Parity::HalfInteger => t % 2 == 1,
            })
            .map(SpinLabel::new)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiTerm {
    pub j: SpinLabel,
    pub l: usize,
    pub m: i64,
    pub weight: Complex64,
}

/// Finite superposition of multipoles Q{j}_lm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiState {
    pub window: Option<JWindow>,
    pub terms: Vec<QuasiTerm>,
}

impl QuasiState {
    /// P(j)_lm = w(j) c_lm over a Gaussian window.
    pub fn gaussian(
        window: JWindow,
        parity: Parity,
        components: &[(usize, i64, Complex64)],
    ) -> Result<Self> {
        window.validate()?;
        let labels = window.labels(parity);
        if labels.is_empty() {
            return Err(Error::WindowInvalid {
                reason: "window contains no admissible j".into(),
            });
        }
        let mut terms = Vec::new();
        for j in &labels {
            let w = window.weight(j.j());
            for &(l, m, c) in components {
                radial_profile(*j, l)?;
                if m.unsigned_abs() as usize > l {
                    return Err(Error::LabelOutOfRange {
                        what: format!("m = {m} for l = {l}"),
                    });
                }
                terms.push(QuasiTerm {
                    j: *j,
                    l,
                    m,
                    weight: c * w,
                });
            }
        }
        Ok(QuasiState {
            window: Some(window),
            terms,
        })
    }

    pub fn from_terms(terms: Vec<QuasiTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidInput {
                reason: "empty superposition".into(),
            });
        }
        for t in &terms {
            radial_profile(t.j, t.l)?;
            if t.m.unsigned_abs() as usize > t.l {
                return Err(Error::LabelOutOfRange {
                    what: format!("m = {} for l = {}", t.m, t.l),
                });
            }
        }
        Ok(QuasiState {
            window: None,
            terms,
        })
    }

    pub fn j_min(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.j.j())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn j_max(&self) -> f64 {
        self.terms.iter().map(|t| t.j.j()).fold(0.0, f64::max)
    }

    pub fn is_central(&self) -> bool {
        self.terms.iter().all(|t| t.l == 0 || t.weight == ZERO)
    }

    pub fn evaluator(&self) -> QuasiEvaluator {
        QuasiEvaluator::new(self)
    }
}

/// Cubic Hermite table of a complex radial function on [0, 2π].
#[derive(Clone, Debug)]
struct RadialTable {
    h: f64,
    f: Vec<Complex64>,
    df: Vec<Complex64>,
}

impl RadialTable {
    fn eval(&self, r: f64) -> Complex64 {
        let n = self.f.len() - 1;
        let x = (r / self.h).clamp(0.0, n as f64);
        let i = (x.floor() as usize).min(n - 1);
        let t = x - i as f64;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        self.f[i] * h00
            + self.df[i] * (h10 * self.h)
            + self.f[i + 1] * h01
            + self.df[i + 1] * (h11 * self.h)
    }
}

/// Tabulated evaluator for a quasi-state, both on the group and on the ball |x| ≤ 2π of ℝ³.
#[derive(Clone, Debug)]
pub struct QuasiEvaluator {
    channels: Vec<(usize, i64, RadialTable)>,
}

impl QuasiEvaluator {
    fn new(q: &QuasiState) -> Self {
        let mut keys: Vec<(usize, i64)> = q.terms.iter().map(|t| (t.l, t.m)).collect();
        keys.sort();
        keys.dedup();
        let n = (256 * (2.0 * q.j_max() + 1.0) as usize).max(2048);
        let h = TAU / n as f64;
        let channels = keys
            .into_iter()
            .map(|(l, m)| {
                let parts: Vec<_> = q
                    .terms
                    .iter()
                    .filter(|t| t.l == l && t.m == m)
                    .map(|t| (radial_profile(t.j, t.l).expect("validated"), t.weight))
                    .collect();
                let mut f = vec![ZERO; n + 1];
                let mut df = vec![ZERO; n + 1];
                for i in 0..=n {
                    let r = i as f64 * h;
                    for (p, w) in &parts {
                        f[i] += w * p.value(r);
                        df[i] += w * p.derivative(r);
                    }
                }
                (l, m, RadialTable { h, f, df })
            })
            .collect();
        QuasiEvaluator { channels }
    }

    /// Value at the point x of the ball; zero outside it.
    pub fn eval_flat(&self, x: &Vec3) -> Complex64 {
        let r = x.norm();
        if r > TAU {
            return ZERO;
        }
        self.channels
            .iter()
            .map(|(l, m, t)| t.eval(r) * spherical_harmonic_dir(*l, *m, x))
            .sum()
    }

    pub fn eval(&self, u: &UnitQuaternion) -> Complex64 {
        self.eval_flat(&log_su2(u).vector.0)
    }

    /// (a × x)·∇ϱ at x, computed as i (a·L) acting on the harmonics.
    pub fn rotational_derivative(&self, x: &Vec3, a: &Vec3) -> Complex64 {
        let r = x.norm();
        if r > TAU {
            return ZERO;
        }
        let i = Complex64::new(0.0, 1.0);
        let minus = Complex64::new(a.x, -a.y) * 0.5;
        let plus = Complex64::new(a.x, a.y) * 0.5;
        self.channels
            .iter()
            .map(|(l, m, t)| {
                let (lf, mf) = (*l as f64, *m as f64);
                let mut y = spherical_harmonic_dir(*l, *m, x) * (a.z * mf);
                if *m < *l as i64 {
                    y += minus
                        * ((lf - mf) * (lf + mf + 1.0)).sqrt()
                        * spherical_harmonic_dir(*l, m + 1, x);
                }
                if *m > -(*l as i64) {
                    y += plus
                        * ((lf + mf) * (lf - mf + 1.0)).sqrt()
                        * spherical_harmonic_dir(*l, m - 1, x);
                }
                i * y * t.eval(r)
            })
            .sum()
    }
}

/// ϱ as a grid function carrying its exact evaluator.
pub fn quasistate_synthesize(q: &QuasiState, grid: Arc<QuadratureGrid>) -> GridFunction {
    let ev = Arc::new(q.evaluator());
    GridFunction::from_evaluator(grid, Arc::new(move |u: &UnitQuaternion| ev.eval(u)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakDiagnostics {
    pub near_zero: f64,
    pub near_two_pi: f64,
    pub ratio: f64,
    pub value_at_zero: f64,
    pub value_at_two_pi: f64,
}

/// max |ϱ| over k ∈ [2π − width, 2π] against max |ϱ| over k ∈ [0, width].
pub fn peak_diagnostics(q: &QuasiState, width: f64) -> PeakDiagnostics {
    let ev = q.evaluator();
    let dirs = generic_directions(6);
    let samples = 200;
    let (mut a, mut b) = (0.0f64, 0.0f64);
    for d in &dirs {
        for i in 0..=samples {
            let k = width * i as f64 / samples as f64;
            a = a.max(ev.eval_flat(&(d * k)).norm());
            b = b.max(ev.eval_flat(&(d * (TAU - k))).norm());
        }
    }
    PeakDiagnostics {
        near_zero: a,
        near_two_pi: b,
        ratio: b / a.max(1e-300),
        value_at_zero: ev.eval_flat(&(dirs[0] * 0.0)).re,
        value_at_two_pi: ev.eval_flat(&(dirs[0] * TAU)).re,
    }
}

/// Haar grid fine enough for products of states with j ≤ j_max.
pub fn truncation_grid(j_max: f64) -> Result<QuadratureGrid> {
    let n = (2.0 * j_max).ceil() as usize;
    build_grid(
        (2 * n + 16).max(32),
        (n + 12).max(24),
        (2 * n + 16).max(32),
        GroupKind::SU2,
    )
}

/// `count` rotation vectors in generic directions with |k| spread over (0, radius].
pub fn truncation_points(count: usize, radius: f64) -> Vec<RotationVector> {
    generic_directions(count)
        .into_iter()
        .enumerate()
        .map(|(i, d)| RotationVector(d * (radius * (i + 1) as f64 / count as f64)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub j0: f64,
    pub su2: Vec<Complex64>,
    pub flat: Vec<Complex64>,
    pub first_order: Vec<Complex64>,
    pub zeroth_error: f64,
    pub first_error: f64,
}

fn check_su2(grid: &QuadratureGrid) -> Result<()> {
    if grid.group != GroupKind::SU2 {
        return Err(Error::InvalidInput {
            reason: "truncated convolution needs an SU(2) grid".into(),
        });
    }
    Ok(())
}

/// Flat measure d³l/16π² on the grid nodes read as points of ℝ³.
fn flat_nodes(grid: &QuadratureGrid) -> Vec<(Vec3, f64)> {
    grid.nodes
        .iter()
        .map(|n| {
            let s = (0.5 * n.k).sin();
            let dir = Vec3::new(
                n.theta.sin() * n.phi.cos(),
                n.theta.sin() * n.phi.sin(),
                n.theta.cos(),
            );
            (dir * n.k, n.weight * n.k * n.k / (4.0 * s * s))
        })
        .collect()
}

/// ∫ A(l) B(k − l) d³l/16π² over the ball.
pub fn flat_convolution(
    a: &QuasiState,
    b: &QuasiState,
    grid: &QuadratureGrid,
    points: &[RotationVector],
) -> Result<Vec<Complex64>> {
    check_su2(grid)?;
    let (ea, eb) = (a.evaluator(), b.evaluator());
    let nodes = flat_nodes(grid);
    let av: Vec<Complex64> = nodes.iter().map(|(l, _)| ea.eval_flat(l)).collect();
    Ok(points
        .par_iter()
        .map(|k| {
            nodes
                .iter()
                .zip(&av)
                .map(|((l, w), a)| a * eb.eval_flat(&(k.0 - l)) * *w)
                .sum()
        })
        .collect())
}

/// −½ ∫ A(l) (l × k)·∇B(k − l) d³l/16π².
pub fn first_order_term(
    a: &QuasiState,
    b: &QuasiState,
    grid: &QuadratureGrid,
    points: &[RotationVector],
) -> Result<Vec<Complex64>> {
    check_su2(grid)?;
    let (ea, eb) = (a.evaluator(), b.evaluator());
    let nodes = flat_nodes(grid);
    let av: Vec<Complex64> = nodes.iter().map(|(l, _)| ea.eval_flat(l)).collect();
    Ok(points
        .par_iter()
        .map(|k| {
            let s: Complex64 = nodes
                .iter()
                .zip(&av)
                .map(|((l, w), a)| a * eb.rotational_derivative(&(k.0 - l), l) * *w)
                .sum();
            s * -0.5
        })
        .collect())
}

/// Compares A ∗ B on SU(2) with the flat convolution and its first-order correction.
pub fn truncated_convolution_compare(
    a: &QuasiState,
    b: &QuasiState,
    grid: Arc<QuadratureGrid>,
    points: &[RotationVector],
) -> Result<TruncationReport> {
    check_su2(&grid)?;
    for w in [a.window, b.window].into_iter().flatten() {
        w.validate()?;
    }
    let ga = quasistate_synthesize(a, grid.clone());
    let gb = quasistate_synthesize(b, grid.clone());
    let qs: Vec<UnitQuaternion> = points.iter().map(exp_su2).collect();
    let su2 = convolve_at(&ga, &gb, &qs)?;
    let flat = flat_convolution(a, b, &grid, points)?;
    let first_order = first_order_term(a, b, &grid, points)?;
    let scale = su2.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let zeroth_error = su2
        .iter()
        .zip(&flat)
        .map(|(s, f)| (s - f).norm())
        .fold(0.0, f64::max)
        / scale;
    let first_error = su2
        .iter()
        .zip(flat.iter().zip(&first_order))
        .map(|(s, (f, c))| (s - f - c).norm())
        .fold(0.0, f64::max)
        / scale;
    Ok(TruncationReport {
        j0: a.j_min().min(b.j_min()),
        su2,
        flat,
        first_order,
        zeroth_error,
        first_error,
    })
}

/// Standard test pair over the window (j̄, j̄/2): A with an axial dipole, B with a transverse one.
pub fn standard_pair(j_bar: f64, dipole: f64) -> Result<(QuasiState, QuasiState)> {
    let w = JWindow::new(j_bar, 0.5 * j_bar)?;
    let one = Complex64::new(1.0, 0.0);
    let mut acomps = vec![(0, 0, one)];
    if dipole != 0.0 {
        acomps.push((1, 0, Complex64::new(dipole, 0.0)));
    }
    let a = QuasiState::gaussian(w, Parity::Both, &acomps)?;
    let mut comps = vec![(0, 0, one)];
    if dipole != 0.0 {
        comps.push((1, 1, Complex64::new(dipole, 0.0)));
        comps.push((1, -1, Complex64::new(-dipole, 0.0)));
    }
    let b = QuasiState::gaussian(w, Parity::Both, &comps)?;
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irreps::idempotent;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn window_validation() {
        assert!(matches!(
            JWindow::new(10.0, 0.5),
            Err(Error::WindowInvalid { .. })
        ));
        assert!(matches!(
            JWindow::new(1.0, 4.0),
            Err(Error::WindowInvalid { .. })
        ));
        let w = JWindow::new(12.0, 4.0).unwrap();
        assert_eq!(
            w.flags(&WindowThresholds::default()),
            WindowFlags {
                scale_separated: true,
                wide: true
            }
        );
        let w2 = JWindow::new(3.0, 4.0).unwrap();
        assert!(!w2.flags(&WindowThresholds::default()).scale_separated);
        let labels = w.labels(Parity::Both);
        assert_eq!(labels.first().unwrap().j(), 10.0);
        assert_eq!(labels.last().unwrap().j(), 14.0);
        assert_eq!(labels.len(), 9);
        assert!(w.labels(Parity::Integer).iter().all(|j| j.is_integer()));
        assert!(w
            .labels(Parity::HalfInteger)
            .iter()
            .all(|j| !j.is_integer()));
        assert!((w.weight(12.0) - 1.0).abs() < 1e-15);
        assert!((w.weight(14.0) - (-8.0f64).exp()).abs() < 1e-15);
        assert_eq!(w.weight(14.5), 0.0);
    }

    #[test]
    fn single_term_is_idempotent() {
        let j = SpinLabel::new(5);
        let q = QuasiState::from_terms(vec![QuasiTerm {
            j,
            l: 0,
            m: 0,
            weight: Complex64::new(2.0, 0.0),
        }])
        .unwrap();
        let ev = q.evaluator();
        let y00 = spherical_harmonic_dir(0, 0, &Vec3::z());
        for k in [0.0, 0.3, 1.7, 4.0, 6.2] {
            let v = ev.eval_flat(&(Vec3::new(0.3, -0.2, 0.9).normalize() * k));
            let e = 2.0 * y00 * idempotent(j, k);
            assert!((v - e).norm() < 1e-8 * 36.0, "{k} {v} {e}");
        }
    }

    #[test]
    fn evaluator_matches_multipoles() {
        use crate::groupalgebra::multipole_q;
        let j = SpinLabel::new(6);
        let terms = vec![
            QuasiTerm {
                j,
                l: 2,
                m: 1,
                weight: Complex64::new(0.5, -1.0),
            },
            QuasiTerm {
                j,
                l: 1,
                m: -1,
                weight: one(),
            },
        ];
        let q = QuasiState::from_terms(terms).unwrap();
        let ev = q.evaluator();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        for _ in 0..20 {
            let u = UnitQuaternion::random(&mut rng);
            let e = multipole_q(j, 2, 1).unwrap().eval(&u) * Complex64::new(0.5, -1.0)
                + multipole_q(j, 1, -1).unwrap().eval(&u);
            assert!((ev.eval(&u) - e).norm() < 1e-8);
        }
    }

    #[test]
    fn rotational_derivative_matches_fd() {
        let w = JWindow::new(4.0, 2.0).unwrap();
        let q = QuasiState::gaussian(
            w,
            Parity::Both,
            &[(1, 0, one()), (2, -1, Complex64::new(0.3, 0.4))],
        )
        .unwrap();
        let ev = q.evaluator();
        let x = Vec3::new(0.4, -0.7, 0.5);
        let a = Vec3::new(0.2, 0.9, -0.3);
        let h = 1e-5;
        let rot = |t: f64| {
            let r = crate::rotations::rotmat_from_vector(&RotationVector(a * t));
            r.apply(&x)
        };
        let fd = (ev.eval_flat(&rot(h)) - ev.eval_flat(&rot(-h))) / (2.0 * h);
        let an = ev.rotational_derivative(&x, &a);
        assert!((fd - an).norm() < 1e-5 * an.norm().max(1.0), "{fd} {an}");
        let c = QuasiState::gaussian(w, Parity::Both, &[(0, 0, one())]).unwrap();
        assert_eq!(c.evaluator().rotational_derivative(&x, &a), ZERO);
    }

    #[test]
    fn two_pi_peak_cancellation() {
        let w = JWindow::new(12.0, 4.0).unwrap();
        let q = QuasiState::gaussian(w, Parity::Both, &[(0, 0, one())]).unwrap();
        let d = peak_diagnostics(&q, 0.5);
        assert!(d.ratio < 0.1, "{d:?}");
        let mut prev = f64::INFINITY;
        for dj in [2.0, 4.0, 8.0] {
            let q = QuasiState::gaussian(
                JWindow::new(16.0, dj).unwrap(),
                Parity::Both,
                &[(0, 0, one())],
            )
            .unwrap();
            let r = peak_diagnostics(&q, 0.5).ratio;
            assert!(r < prev, "{dj} {r}");
            prev = r;
        }
    }

    #[test]
    fn parity_windows_have_opposite_peaks() {
        let w = JWindow::new(12.0, 4.0).unwrap();
        let qi = QuasiState::gaussian(w, Parity::Integer, &[(0, 0, one())]).unwrap();
        let qh = QuasiState::gaussian(w, Parity::HalfInteger, &[(0, 0, one())]).unwrap();
        let (di, dh) = (peak_diagnostics(&qi, 0.5), peak_diagnostics(&qh, 0.5));
        assert!(di.value_at_two_pi > 0.0 && dh.value_at_two_pi < 0.0);
        assert!(di.value_at_zero > 0.0 && dh.value_at_zero > 0.0);
        assert!(di.ratio > 0.5 && dh.ratio > 0.5);
    }

    #[test]
    fn rank_errors_propagate() {
        let w = JWindow::new(2.0, 2.0).unwrap();
        assert!(matches!(
            QuasiState::gaussian(w, Parity::Both, &[(3, 0, one())]),
            Err(Error::RankOutOfRange { .. })
        ));
    }

    #[test]
    fn central_first_order_vanishes() {
        let (_, b) = standard_pair(4.0, 0.5).unwrap();
        let a = QuasiState::gaussian(
            JWindow::new(4.0, 2.0).unwrap(),
            Parity::Both,
            &[(0, 0, one())],
        )
        .unwrap();
        let grid = truncation_grid(a.j_max()).unwrap();
        let pts = truncation_points(4, 0.8);
        let cab = first_order_term(&a, &b, &grid, &pts).unwrap();
        let flat = flat_convolution(&a, &b, &grid, &pts).unwrap();
        let scale = flat.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for c in &cab {
            assert!(c.norm() < 1e-4 * scale, "{c} {scale}");
        }
    }

    #[test]
    fn first_order_is_antisymmetric() {
        let w = JWindow::new(4.0, 2.0).unwrap();
        let a = QuasiState::gaussian(
            w,
            Parity::Both,
            &[(0, 0, one()), (1, 0, Complex64::new(0.7, 0.0))],
        )
        .unwrap();
        let b = QuasiState::gaussian(
            w,
            Parity::Both,
            &[
                (0, 0, one()),
                (1, 1, Complex64::new(0.5, 0.0)),
                (1, -1, Complex64::new(-0.5, 0.0)),
            ],
        )
        .unwrap();
        let grid = truncation_grid(a.j_max()).unwrap();
        let pts = truncation_points(3, 0.6);
        let cab = first_order_term(&a, &b, &grid, &pts).unwrap();
        let cba = first_order_term(&b, &a, &grid, &pts).unwrap();
        let scale = cab.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(scale > 0.0);
        for (x, y) in cab.iter().zip(&cba) {
            assert!((x + y).norm() < 1e-3 * scale, "{x} {y}");
        }
    }
}
