//! Large-j asymptotics: two-peak characters, Dirac sequences, flat idempotents,
//! truncated convolution and Lie–Poisson dynamics on the coalgebra.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groupalgebra::radial_profile;
use crate::irreps::{idempotent_closed_form, SpinLabel};
use crate::quadrature::{gauss_legendre_on, integrate_adaptive};

pub mod poisson;
pub mod states;

pub use poisson::*;
pub use states::*;

/// Which value stands in for the Casimir j(j+1).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CasimirForm {
    JJPlus1,
    #[default]
    HalfShifted,
    JSquared,
}

impl CasimirForm {
    pub fn value(self, j: f64) -> f64 {
        match self {
            CasimirForm::JJPlus1 => j * (j + 1.0),
            CasimirForm::HalfShifted => (j + 0.5) * (j + 0.5),
            CasimirForm::JSquared => j * j,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Near0,
    Near2Pi,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticCharacter {
    pub j: SpinLabel,
    pub branch: Branch,
}

impl AsymptoticCharacter {
    pub fn eval(&self, k: f64) -> f64 {
        epsilon_asymptotic(self.j, k, self.branch)
    }
}

fn sin_over_half(n: f64, t: f64) -> f64 {
    if t == 0.0 {
        n
    } else {
        (0.5 * n * t).sin() / (0.5 * t)
    }
}

/// ₀ε(j), ₂πε(j) or their sum.
///
/// The 2π branch is (2j+1) sin((2j+1)k/2)/((2π−k)/2); its value at 2π is (−1)^{2j}(2j+1)².
pub fn epsilon_asymptotic(j: SpinLabel, k: f64, branch: Branch) -> f64 {
    let n = j.dim() as f64;
    let near0 = || n * sin_over_half(n, k);
    let near2pi = || {
        let t = TAU - k;
        if t == 0.0 {
            let sign = if j.two_j % 2 == 0 { 1.0 } else { -1.0 };
            sign * n * n
        } else {
            n * (0.5 * n * k).sin() / (0.5 * t)
        }
    };
    match branch {
        Branch::Near0 => near0(),
        Branch::Near2Pi => near2pi(),
        Branch::Both => near0() + near2pi(),
    }
}

/// C^∞ bump on (a, b), equal to 1 at the midpoint.
pub fn smooth_bump(k: f64, a: f64, b: f64) -> f64 {
    if k <= a || k >= b {
        return 0.0;
    }
    let t = (k - a) / (b - a);
    (4.0 - 1.0 / (t * (1.0 - t))).exp()
}

fn inv_sin_minus_flat(k: f64) -> f64 {
    // 1/sin(k/2) − 2/k − 2/(2π−k)
    let near0 = if k < 1e-3 {
        k / 12.0 + 7.0 * k.powi(3) / 2880.0
    } else {
        1.0 / (0.5 * k).sin() - 2.0 / k
    };
    near0 - 2.0 / (TAU - k)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticErrors {
    /// |∫ w (ε − ₀ε − ₂πε) dk|.
    pub mean_value: f64,
    /// ∫ w |ε − ₀ε − ₂πε| dk / (2j+1).
    pub l1_per_dim: f64,
}

/// Distance between ε(j) and the two-peak form on [a, b] ⊂ (0, 2π), weighted by a smooth bump.
pub fn asymptotic_character_errors(j: SpinLabel, a: f64, b: f64) -> Result<AsymptoticErrors> {
    if !(0.0 < a && a < b && b < TAU) {
        return Err(Error::InvalidInput {
            reason: format!("interval [{a}, {b}] not inside (0, 2pi)"),
        });
    }
    let n = j.dim() as f64;
    let diff = move |k: f64| n * (0.5 * n * k).sin() * inv_sin_minus_flat(k);
    let mean = integrate_adaptive(&|k| smooth_bump(k, a, b) * diff(k), a, b, 1e-14 * n, 1e-12)?;
    let l1 = integrate_adaptive(
        &|k| smooth_bump(k, a, b) * diff(k).abs(),
        a,
        b,
        1e-10 * n,
        1e-8,
    )?;
    Ok(AsymptoticErrors {
        mean_value: mean.abs(),
        l1_per_dim: l1 / n,
    })
}

/// Maximum of |ε(j) − (₀ε + ₂πε)| relative to max |ε(j)| on a uniform sample of [a, b].
pub fn asymptotic_sup_deviation(j: SpinLabel, a: f64, b: f64, samples: usize) -> f64 {
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..samples {
        let k = a + (b - a) * i as f64 / (samples - 1).max(1) as f64;
        let e = idempotent_closed_form(j, k);
        worst = worst.max((e - epsilon_asymptotic(j, k, Branch::Both)).abs());
        scale = scale.max(e.abs());
    }
    worst / scale.max(1e-300)
}

/// sin(nk/2)/(k/2), equal to n at k = 0.
pub fn dirac_kernel(n: f64, k: f64) -> f64 {
    sin_over_half(n, k)
}

/// ∫₀^a f(k) sin(nk/2)/(k/2) dk; tends to π f(0).
pub fn dirac_sequence_integral(f: &dyn Fn(f64) -> f64, n: u32, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::InvalidInput {
            reason: "upper limit must be positive".into(),
        });
    }
    let nf = n as f64;
    integrate_adaptive(&|k| f(k) * dirac_kernel(nf, k), 0.0, a, 1e-12, 1e-12)
}

/// ∫₀^a f(k) sin((2j+1)k/2) (1/sin(k/2) − 2/k) dk.
pub fn riemann_lebesgue_integral(f: &dyn Fn(f64) -> f64, j: SpinLabel, a: f64) -> Result<f64> {
    if !(a > 0.0 && a < TAU) {
        return Err(Error::InvalidInput {
            reason: "upper limit must lie in (0, 2pi)".into(),
        });
    }
    let n = j.dim() as f64;
    let h = |k: f64| {
        if k < 1e-3 {
            k / 12.0 + 7.0 * k.powi(3) / 2880.0
        } else {
            1.0 / (0.5 * k).sin() - 2.0 / k
        }
    };
    integrate_adaptive(&|k| f(k) * (0.5 * n * k).sin() * h(k), 0.0, a, 1e-13, 1e-12)
}

/// Sine integral Si(x).
pub fn sine_integral(x: f64) -> f64 {
    let t = x.abs();
    if t == 0.0 {
        return 0.0;
    }
    let si = if t < 2.0 {
        let mut sum = 0.0;
        let mut term = t;
        let mut k = 0;
        loop {
            let add = term / (2 * k + 1) as f64;
            sum += add;
            if add.abs() <= 1e-17 * sum.abs() {
                break;
            }
            k += 1;
            term *= -t * t / ((2 * k) as f64 * (2 * k + 1) as f64);
        }
        sum
    } else {
        // Lentz continued fraction for E1(it).
        use num_complex::Complex64 as C;
        let mut b = C::new(1.0, t);
        let mut c = C::new(1.0 / f64::MIN_POSITIVE, 0.0);
        let mut d = C::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 1..1000 {
            let a = -((i * i) as f64);
            b += C::new(2.0, 0.0);
            d = C::new(1.0, 0.0) / (d * a + b);
            c = b + C::new(a, 0.0) / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < 1e-16 {
                break;
            }
        }
        h *= C::new(t.cos(), -t.sin());
        0.5 * PI + h.im
    };
    if x < 0.0 {
        -si
    } else {
        si
    }
}

/// (2j+1) sin((2j+1)ω/2)/(ω/2) for continuous j.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalIdempotent {
    pub j: f64,
}

impl ClassicalIdempotent {
    pub fn eval(&self, omega: f64) -> f64 {
        let n = 2.0 * self.j + 1.0;
        n * sin_over_half(n, omega)
    }
}

/// ∫_{−1/2}^{J} ε_class(j)(ω) dj / 8π² by Gauss–Legendre in j.
pub fn classical_delta_kernel(j_max: f64, omega: f64, nodes: usize) -> f64 {
    let (x, w) = gauss_legendre_on(nodes, -0.5, j_max);
    x.iter()
        .zip(&w)
        .map(|(j, wj)| wj * ClassicalIdempotent { j: *j }.eval(omega))
        .sum::<f64>()
        / (8.0 * PI * PI)
}

/// Closed form of the j-integral above.
pub fn classical_delta_kernel_exact(j_max: f64, omega: f64) -> f64 {
    let z = 2.0 * j_max + 1.0;
    let x = 0.5 * z * omega;
    let inner = if x < 1e-3 {
        z.powi(3) / 6.0 * (1.0 - x * x / 10.0)
    } else {
        4.0 * (x.sin() - x * x.cos()) / omega.powi(3)
    };
    inner / (8.0 * PI * PI)
}

/// ∫ f(|ω̄|) K_J(|ω̄|) d³ω̄ over |ω̄| ≤ r_max; tends to f(0).
pub fn classical_delta_reconstruction(
    j_max: f64,
    f: &dyn Fn(f64) -> f64,
    r_max: f64,
) -> Result<f64> {
    if !(j_max > -0.5 && r_max > 0.0) {
        return Err(Error::InvalidInput {
            reason: "need J > -1/2 and r_max > 0".into(),
        });
    }
    let nodes = 32 + ((j_max + 1.0) * r_max).ceil() as usize;
    integrate_adaptive(
        &|w| 4.0 * PI * w * w * f(w) * classical_delta_kernel(j_max, w, nodes),
        0.0,
        r_max,
        1e-12,
        1e-10,
    )
}

/// Σ_p (a_p sin κk + b_p cos κk) k^{−p}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatProfile {
    pub j: SpinLabel,
    pub l: usize,
    pub form: CasimirForm,
    pub kappa: f64,
    pub sin_coef: Vec<f64>,
    pub cos_coef: Vec<f64>,
}

impl FlatProfile {
    fn apply(&self, n: f64) -> FlatProfile {
        let len = self.sin_coef.len() + 1;
        let mut a = vec![0.0; len];
        let mut b = vec![0.0; len];
        for p in 0..self.sin_coef.len() {
            let (ap, bp) = (self.sin_coef[p], self.cos_coef[p]);
            let pf = p as f64;
            b[p] += self.kappa * ap;
            a[p + 1] -= (pf + n) * ap;
            a[p] -= self.kappa * bp;
            b[p + 1] -= (pf + n) * bp;
        }
        FlatProfile {
            sin_coef: a,
            cos_coef: b,
            ..self.clone()
        }
    }

    pub fn derivative(&self) -> FlatProfile {
        self.apply(0.0)
    }

    fn symbolic(&self, k: f64) -> f64 {
        let (s, c) = (self.kappa * k).sin_cos();
        let inv = 1.0 / k;
        let mut pw = 1.0;
        let mut acc = 0.0;
        for p in 0..self.sin_coef.len() {
            acc += (self.sin_coef[p] * s + self.cos_coef[p] * c) * pw;
            pw *= inv;
        }
        acc
    }

    /// f, f', f''. Equals 2(2j+1)κ(−κ)^l j_l(κk); the Bessel series is used near the origin.
    pub fn derivatives(&self, k: f64) -> (f64, f64, f64) {
        let x = self.kappa * k;
        if x >= self.l as f64 + 2.0 {
            let d1 = self.derivative();
            return (
                self.symbolic(k),
                d1.symbolic(k),
                d1.derivative().symbolic(k),
            );
        }
        let amp = 2.0 * self.j.dim() as f64 * self.kappa * (-self.kappa).powi(self.l as i32);
        let (v, d, dd) = spherical_bessel_series(self.l, x);
        (
            amp * v,
            amp * self.kappa * d,
            amp * self.kappa * self.kappa * dd,
        )
    }

    pub fn value(&self, k: f64) -> f64 {
        self.derivatives(k).0
    }

    /// f'' + (2/k) f' + (λ − l(l+1)/k²) f relative to the largest term.
    pub fn ode_residual(&self, k: f64) -> f64 {
        let lf = self.l as f64;
        let lam = self.kappa * self.kappa;
        let (f, f1, f2) = self.derivatives(k);
        let terms = [f2, 2.0 * f1 / k, lam * f, -lf * (lf + 1.0) * f / (k * k)];
        let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        terms.iter().sum::<f64>().abs() / scale.max(1e-300)
    }
}

/// j_l(x) and its first two derivatives from the power series.
pub fn spherical_bessel_series(l: usize, x: f64) -> (f64, f64, f64) {
    let mut c = 1.0 / (1..=l).map(|i| (2 * i + 1) as f64).product::<f64>();
    let (mut v, mut d, mut dd) = (0.0, 0.0, 0.0);
    for n in 0..200 {
        let p = (l + 2 * n) as i32;
        let tv = c * x.powi(p);
        v += tv;
        if p >= 1 {
            d += c * p as f64 * x.powi(p - 1);
        }
        if p >= 2 {
            dd += c * (p * (p - 1)) as f64 * x.powi(p - 2);
        }
        if n > 0 && tv.abs() < 1e-18 * v.abs() && x * x < (2 * n) as f64 {
            break;
        }
        c *= -0.5 / ((n + 1) as f64 * (2 * l + 2 * n + 3) as f64);
    }
    (v, d, dd)
}

/// ₀f_jl = Π_{n<l} (d/dk − n/k) ₀ε(j), with κ² taken from `form`.
pub fn flat_radial_profile(j: SpinLabel, l: usize, form: CasimirForm) -> Result<FlatProfile> {
    if l > j.two_j as usize {
        return Err(Error::RankOutOfRange {
            l,
            max: j.two_j as usize,
        });
    }
    let mut p = FlatProfile {
        j,
        l: 0,
        form,
        kappa: form.value(j.j()).sqrt(),
        sin_coef: vec![0.0, 2.0 * j.dim() as f64],
        cos_coef: vec![0.0, 0.0],
    };
    for n in 0..l {
        p = p.apply(n as f64);
        p.l = n + 1;
    }
    Ok(p)
}

/// ₀f_jl(k) + ₂πf_jl(k), where ₂πf_jl(k) = (−1)^{2j+l} ₀f_jl(2π−k).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPeakProfile {
    pub flat: FlatProfile,
}

impl TwoPeakProfile {
    pub fn near0(&self, k: f64) -> f64 {
        self.flat.value(k)
    }

    pub fn near2pi(&self, k: f64) -> f64 {
        let sign = if (self.flat.j.two_j as usize + self.flat.l) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        sign * self.flat.value(TAU - k)
    }

    pub fn value(&self, k: f64) -> f64 {
        self.near0(k) + self.near2pi(k)
    }
}

pub fn two_peak_profile(j: SpinLabel, l: usize, form: CasimirForm) -> Result<TwoPeakProfile> {
    Ok(TwoPeakProfile {
        flat: flat_radial_profile(j, l, form)?,
    })
}

/// |∫ w (f_jl − two-peak) dk| / ∫ w |f_jl| dk for a Gaussian w centred at `center` (cut at 8 widths).
pub fn two_peak_deviation(j: SpinLabel, l: usize, center: f64, width: f64) -> Result<f64> {
    let (a, b) = (center - 8.0 * width, center + 8.0 * width);
    if !(width > 0.0 && 0.0 < a && b < TAU) {
        return Err(Error::InvalidInput {
            reason: format!("window [{a}, {b}] not inside (0, 2pi)"),
        });
    }
    let exact = radial_profile(j, l)?;
    let approx = two_peak_profile(j, l, CasimirForm::HalfShifted)?;
    let w = |k: f64| (-0.5 * ((k - center) / width).powi(2)).exp();
    let den = integrate_adaptive(&|k| w(k) * exact.value(k).abs(), a, b, 1e-300, 1e-8)?;
    let num = integrate_adaptive(
        &|k| w(k) * (exact.value(k) - approx.value(k)),
        a,
        b,
        1e-14 * den,
        1e-10,
    )?;
    Ok(num.abs() / den.max(1e-300))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irreps::character;

    fn sl(two_j: u32) -> SpinLabel {
        SpinLabel::new(two_j)
    }

    #[test]
    fn peak_values() {
        for tj in 0..=20 {
            let j = sl(tj);
            let n = j.dim() as f64;
            assert!((epsilon_asymptotic(j, 0.0, Branch::Near0) - n * n).abs() < 1e-10);
            let sign = if tj % 2 == 0 { 1.0 } else { -1.0 };
            assert!((epsilon_asymptotic(j, TAU, Branch::Near2Pi) - sign * n * n).abs() < 1e-10);
            let t = 1e-7;
            assert!(
                (epsilon_asymptotic(j, TAU - t, Branch::Near2Pi) - sign * n * n).abs()
                    < 1e-6 * n * n
            );
        }
    }

    #[test]
    fn two_peaks_match_exact_near_ends() {
        for tj in [10u32, 21, 40] {
            let j = sl(tj);
            for k in [1e-3, 0.01, TAU - 0.01, TAU - 1e-3] {
                let e = idempotent_closed_form(j, k);
                let a = epsilon_asymptotic(j, k, Branch::Both);
                assert!((e - a).abs() < 1e-2 * e.abs().max(1.0), "{tj} {k} {e} {a}");
            }
        }
    }

    #[test]
    fn mean_value_error_decreases() {
        let mut prev = f64::INFINITY;
        for j in [5u32, 10, 20, 40] {
            let e = asymptotic_character_errors(sl(2 * j), 0.2, 5.0).unwrap();
            assert!(e.mean_value < prev, "j={j} {e:?}");
            prev = e.mean_value;
        }
    }

    #[test]
    fn pointwise_l1_does_not_decay() {
        let a = asymptotic_character_errors(sl(10), 0.2, 5.0)
            .unwrap()
            .l1_per_dim;
        let b = asymptotic_character_errors(sl(80), 0.2, 5.0)
            .unwrap()
            .l1_per_dim;
        assert!((a - b).abs() < 0.05 * a);
    }

    #[test]
    fn sine_integral_values() {
        assert_eq!(sine_integral(0.0), 0.0);
        assert!((sine_integral(1.0) - 0.946_083_070_367_183).abs() < 1e-14);
        assert!((sine_integral(5.0) - 1.549_931_244_944_674).abs() < 1e-13);
        assert!((sine_integral(-2.5) + 1.778_520_173_443_827).abs() < 1e-13);
        assert!((sine_integral(1e4) - 0.5 * PI).abs() < 1e-4);
        for x in [0.5, 1.9, 2.1, 7.0, 30.0] {
            let q = integrate_adaptive(
                &|t| if t == 0.0 { 1.0 } else { t.sin() / t },
                0.0,
                x,
                1e-15,
                1e-14,
            )
            .unwrap();
            assert!((q - sine_integral(x)).abs() < 1e-12, "{x}");
        }
    }

    #[test]
    fn dirac_sequence_unit_function() {
        for n in [50u32, 100, 200, 400] {
            let v = dirac_sequence_integral(&|_| 1.0, n, PI).unwrap();
            assert!(
                (v - 2.0 * sine_integral(n as f64 * PI / 2.0)).abs() < 1e-9,
                "{n}"
            );
        }
        let v = dirac_sequence_integral(&|_| 1.0, 200, PI).unwrap();
        assert!((v - PI).abs() < 0.02);
        let v = dirac_sequence_integral(&|k: f64| k.cos(), 200, PI).unwrap();
        assert!((v - PI).abs() < 0.05);
    }

    #[test]
    fn dirac_sequence_converges_monotonically() {
        let fs: [&dyn Fn(f64) -> f64; 3] = [&|_| 1.0, &|k: f64| k.cos(), &|k: f64| (-k).exp()];
        for f in fs {
            let mut prev = f64::INFINITY;
            for n in [50u32, 100, 200, 400] {
                let e = (dirac_sequence_integral(f, n, PI).unwrap() - PI * f(0.0)).abs();
                assert!(e < prev);
                prev = e;
            }
        }
    }

    #[test]
    fn riemann_lebesgue_decay() {
        let fs: [&dyn Fn(f64) -> f64; 3] = [&|_| 1.0, &|k: f64| k.cos(), &|k: f64| (-k).exp()];
        for f in fs {
            let mut prev = f64::INFINITY;
            for j in [5u32, 10, 20, 40] {
                let v = riemann_lebesgue_integral(f, sl(2 * j), PI).unwrap().abs();
                assert!(v < prev, "j={j} {v}");
                prev = v;
            }
        }
    }

    #[test]
    fn classical_idempotent_limit() {
        for j in [0.0, 0.5, 3.7, 12.0] {
            let e = ClassicalIdempotent { j };
            let n = 2.0 * j + 1.0;
            assert!((e.eval(0.0) - n * n).abs() < 1e-12);
            assert!((e.eval(1e-9) - n * n).abs() < 1e-6);
        }
    }

    #[test]
    fn delta_kernel_matches_closed_form() {
        for (jm, w) in [(10.0, 0.3), (40.0, 1.7), (25.0, 1e-4), (5.0, 2.2)] {
            let a = classical_delta_kernel(jm, w, 32 + ((jm + 1.0) * 3.0) as usize);
            let b = classical_delta_kernel_exact(jm, w);
            assert!((a - b).abs() < 1e-10 * b.abs().max(1.0), "{jm} {w} {a} {b}");
        }
    }

    #[test]
    fn delta_reconstruction_gaussian() {
        let s = 0.25;
        let f = move |w: f64| (-w * w / (2.0 * s * s)).exp();
        let mut prev = f64::INFINITY;
        for jm in [10.0, 20.0, 30.0, 40.0] {
            let v = classical_delta_reconstruction(jm, &f, 10.0 * s).unwrap();
            let e = (v - 1.0).abs();
            assert!(e < prev, "{jm} {v}");
            prev = e;
        }
        assert!(prev < 0.05);
    }

    #[test]
    fn delta_reconstruction_off_origin() {
        let f = |w: f64| (-(w - 1.5).powi(2) / (2.0 * 0.04)).exp();
        let v = classical_delta_reconstruction(40.0, &f, 3.0).unwrap();
        let mass =
            integrate_adaptive(&|w| 4.0 * PI * w * w * f(w), 0.0, 3.0, 1e-12, 1e-10).unwrap();
        assert!(v.abs() < 1e-3 * mass, "{v} {mass}");
    }

    #[test]
    fn flat_profile_low_ranks() {
        let j = sl(7);
        let p0 = flat_radial_profile(j, 0, CasimirForm::HalfShifted).unwrap();
        let p1 = flat_radial_profile(j, 1, CasimirForm::HalfShifted).unwrap();
        for k in [0.05, 0.7, 2.0, 4.5] {
            assert!((p0.value(k) - epsilon_asymptotic(j, k, Branch::Near0)).abs() < 1e-12 * 64.0);
            let h = 1e-5;
            let d = (p0.value(k + h) - p0.value(k - h)) / (2.0 * h);
            assert!((p1.value(k) - d).abs() < 1e-6 * d.abs().max(1.0));
        }
        assert!((p0.value(0.0) - 64.0).abs() < 1e-12);
    }

    #[test]
    fn flat_ode_residuals() {
        for form in [
            CasimirForm::JJPlus1,
            CasimirForm::HalfShifted,
            CasimirForm::JSquared,
        ] {
            for tj in 1..=8u32 {
                for l in 0..=tj as usize {
                    let p = flat_radial_profile(sl(tj), l, form).unwrap();
                    for i in 0..50 {
                        let k = 0.1 + (TAU - 0.2) * i as f64 / 49.0;
                        assert!(p.ode_residual(k) < 1e-8, "{form:?} {tj} {l} {k}");
                    }
                }
            }
        }
        assert!(matches!(
            flat_radial_profile(sl(2), 3, CasimirForm::HalfShifted),
            Err(Error::RankOutOfRange { .. })
        ));
    }

    #[test]
    fn flat_matches_exact_near_identity() {
        for l in 0..4usize {
            let mut prev = f64::INFINITY;
            for tj in [20u32, 40, 80] {
                let exact = radial_profile(sl(tj), l).unwrap();
                let flat = flat_radial_profile(sl(tj), l, CasimirForm::HalfShifted).unwrap();
                let d = (flat.value(0.02) / exact.value(0.02) - 1.0).abs();
                assert!(d < prev && d < 0.05, "{tj} {l} {d}");
                prev = d;
            }
        }
    }

    #[test]
    fn two_pi_branch_near_peak() {
        for tj in [40u32, 41] {
            let n = (tj + 1) as f64;
            for l in 0..3usize {
                let p = two_peak_profile(sl(tj), l, CasimirForm::HalfShifted).unwrap();
                let exact = radial_profile(sl(tj), l).unwrap();
                let k = TAU - 2.0 / n;
                let (a, b) = (p.near2pi(k), exact.value(k));
                assert!((a / b - 1.0).abs() < 0.01, "{tj} {l} {a} {b}");
                assert!(p.value(k) * b > 0.0);
            }
        }
    }

    #[test]
    fn two_peak_deviation_shrinks() {
        for l in 0..4usize {
            let d: Vec<f64> = [10u32, 20, 40]
                .iter()
                .map(|j| two_peak_deviation(sl(2 * j), l, 2.0, 0.15).unwrap())
                .collect();
            assert!(d[0] > d[1] && d[1] > d[2] && d[2] < 1e-6, "l={l} {d:?}");
        }
        assert!(two_peak_deviation(sl(4), 0, 0.5, 0.15).is_err());
    }

    #[test]
    fn casimir_forms() {
        assert_eq!(CasimirForm::JJPlus1.value(2.0), 6.0);
        assert_eq!(CasimirForm::HalfShifted.value(2.0), 6.25);
        assert_eq!(CasimirForm::JSquared.value(2.0), 4.0);
        assert_eq!(character(sl(0), 1.0), 1.0);
    }
}
