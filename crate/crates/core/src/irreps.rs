//! Spin matrices, Wigner D-matrices, characters, idempotents and the symmetric-top spectrum.
//!
//! `SpinMatrices` are the standard angular-momentum matrices (Condon–Shortley phases,
//! basis ordered m = j, j−1, …, −j), so `S(½) = (ħ/2)σ` and `[S_a,S_b] = iħε_ab^c S_c`.
//! The representation is `D(j)(u(k̄)) = exp((i/ħ) k^a G_a)` with `G_a = −S_a`; in this basis
//! `G_3 = ħ·Diag(−j,…,j)`, so row index r carries the label m = r − j and
//! `𝐒₃ D_mk = mħ D_mk`, `𝐒̂₃ D_mk = kħ D_mk`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::QuadratureGrid;
use crate::liealgebra::{apply_casimir, apply_generator, Field};
use crate::rotations::{log_su2, RotationVector, UnitQuaternion};

pub type CMatrix = DMatrix<Complex64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SpinLabel {
    pub two_j: u32,
}

impl SpinLabel {
    pub fn new(two_j: u32) -> Self {
        SpinLabel { two_j }
    }

    pub fn from_j(j: f64) -> Result<Self> {
        let t = 2.0 * j;
        if !(t >= 0.0) || (t - t.round()).abs() > 1e-9 || t > 1e6 {
            return Err(Error::LabelOutOfRange {
                what: format!("j = {j} is not a non-negative half-integer"),
            });
        }
        Ok(SpinLabel {
            two_j: t.round() as u32,
        })
    }

    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    pub fn is_integer(&self) -> bool {
        self.two_j % 2 == 0
    }

    /// Labels −j, −j+1, …, j.
    pub fn labels(&self) -> Vec<f64> {
        (0..self.dim()).map(|r| r as f64 - self.j()).collect()
    }

    /// Row index of label m (m = r − j).
    pub fn index_of(&self, m: f64) -> Result<usize> {
        let r = m + self.j();
        if (r - r.round()).abs() > 1e-9 || r < -1e-9 || r.round() as usize >= self.dim() {
            return Err(Error::LabelOutOfRange {
                what: format!("m = {m} for j = {}", self.j()),
            });
        }
        Ok(r.round() as usize)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinMatrices {
    pub j: SpinLabel,
    pub s: [CMatrix; 3],
    pub hbar: f64,
}

pub fn spin_matrices(j: SpinLabel, hbar: f64) -> SpinMatrices {
    let n = j.dim();
    let jj = j.j();
    let m_of = |r: usize| jj - r as f64;
    let mut sp = CMatrix::zeros(n, n);
    for r in 1..n {
        let m = m_of(r);
        sp[(r - 1, r)] = Complex64::new(hbar * (jj * (jj + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let sm = sp.adjoint();
    let half = Complex64::new(0.5, 0.0);
    let s1 = (&sp + &sm) * half;
    let s2 = (&sp - &sm) * Complex64::new(0.0, -0.5);
    let s3 = CMatrix::from_fn(n, n, |a, b| {
        if a == b {
            Complex64::new(hbar * m_of(a), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    SpinMatrices {
        j,
        s: [s1, s2, s3],
        hbar,
    }
}

impl SpinMatrices {
    /// Generators G_a = −S_a of the representation D.
    pub fn generators(&self) -> [CMatrix; 3] {
        [-&self.s[0], -&self.s[1], -&self.s[2]]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WignerD {
    pub j: SpinLabel,
    pub matrix: CMatrix,
}

impl WignerD {
    /// Element D_mk with labels m, k ∈ {−j, …, j}.
    pub fn get(&self, m: f64, k: f64) -> Result<Complex64> {
        Ok(self.matrix[(self.j.index_of(m)?, self.j.index_of(k)?)])
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }
}

/// exp(−i K) for Hermitian K via eigendecomposition.
fn exp_minus_i_hermitian(k: CMatrix) -> CMatrix {
    let n = k.nrows();
    let eig = k.symmetric_eigen();
    let v = eig.eigenvectors;
    let phases = CMatrix::from_fn(n, n, |a, b| {
        if a == b {
            Complex64::from_polar(1.0, -eig.eigenvalues[a])
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    &v * phases * v.adjoint()
}

pub fn wigner_d_from_vector(j: SpinLabel, k: &RotationVector) -> WignerD {
    let s = spin_matrices(j, 1.0);
    let kk = &s.s[0] * Complex64::new(k.0.x, 0.0)
        + &s.s[1] * Complex64::new(k.0.y, 0.0)
        + &s.s[2] * Complex64::new(k.0.z, 0.0);
    WignerD {
        j,
        matrix: exp_minus_i_hermitian(kk),
    }
}

pub fn wigner_d(j: SpinLabel, u: &UnitQuaternion) -> WignerD {
    if j.two_j == 0 {
        return WignerD {
            j,
            matrix: CMatrix::identity(1, 1),
        };
    }
    wigner_d_from_vector(j, &log_su2(u).vector)
}

/// χ(j)(k) = sin((2j+1)k/2)/sin(k/2), evaluated as Σ_m cos(mk).
pub fn character(j: SpinLabel, k: f64) -> f64 {
    let jj = j.j();
    (0..j.dim()).map(|r| ((r as f64 - jj) * k).cos()).sum()
}

/// dχ(j)/dk.
pub fn character_derivative(j: SpinLabel, k: f64) -> f64 {
    let jj = j.j();
    (0..j.dim())
        .map(|r| {
            let m = r as f64 - jj;
            -m * (m * k).sin()
        })
        .sum()
}

/// d²χ(j)/dk².
pub fn character_second_derivative(j: SpinLabel, k: f64) -> f64 {
    let jj = j.j();
    (0..j.dim())
        .map(|r| {
            let m = r as f64 - jj;
            -m * m * (m * k).cos()
        })
        .sum()
}

/// ε(j)(k) = (2j+1) χ(j)(k).
pub fn idempotent(j: SpinLabel, k: f64) -> f64 {
    j.dim() as f64 * character(j, k)
}

/// Closed form (2j+1) sin((2j+1)k/2)/sin(k/2), with limits at sin(k/2) = 0.
pub fn idempotent_closed_form(j: SpinLabel, k: f64) -> f64 {
    let n = j.dim() as f64;
    let s = (0.5 * k).sin();
    if s.abs() < 1e-12 {
        let sign = if ((k / std::f64::consts::TAU).round() as i64 * j.two_j as i64) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        return sign * n * n;
    }
    n * (0.5 * n * k).sin() / s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopLevel {
    pub energy: f64,
    pub degeneracy: usize,
    /// |k| values contributing to the level.
    pub abs_k: Vec<f64>,
}

/// Symmetric-top levels E = ħ²j(j+1)/(2I) + (1/(2K) − 1/(2I))ħ²k², merged by energy.
pub fn top_spectrum(
    j: SpinLabel,
    inertia_i: f64,
    inertia_k: f64,
    hbar: f64,
) -> Result<Vec<TopLevel>> {
    if !(inertia_i > 0.0 && inertia_k > 0.0 && hbar > 0.0) {
        return Err(Error::InvalidInput {
            reason: "moments of inertia and hbar must be positive".into(),
        });
    }
    let jj = j.j();
    let n = j.dim();
    let mut levels: Vec<TopLevel> = Vec::new();
    let mut abs_k: Vec<f64> = (0..n).map(|r| (r as f64 - jj).abs()).collect();
    abs_k.sort_by(f64::total_cmp);
    abs_k.dedup();
    for k in abs_k {
        let e = hbar
            * hbar
            * (jj * (jj + 1.0) / (2.0 * inertia_i) + (0.5 / inertia_k - 0.5 / inertia_i) * k * k);
        let deg = if k == 0.0 { n } else { 2 * n };
        match levels
            .iter_mut()
            .find(|l| (l.energy - e).abs() <= 1e-12 * e.abs().max(1.0))
        {
            Some(l) => {
                l.degeneracy += deg;
                l.abs_k.push(k);
            }
            None => levels.push(TopLevel {
                energy: e,
                degeneracy: deg,
                abs_k: vec![k],
            }),
        }
    }
    levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(levels)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenResiduals {
    pub casimir: f64,
    pub s3: f64,
    pub s3_hat: f64,
}

/// Applies 𝐒², 𝐒₃, 𝐒̂₃ by finite differences to D(j)_mk and compares with ħ²j(j+1), mħ, kħ.
pub fn eigencheck_d(
    j: SpinLabel,
    m: f64,
    k: f64,
    points: &[RotationVector],
    h: f64,
    hbar: f64,
) -> Result<EigenResiduals> {
    let (r, c) = (j.index_of(m)?, j.index_of(k)?);
    let f = move |u: &UnitQuaternion| wigner_d(j, u).matrix[(r, c)];
    let minus_i_hbar = Complex64::new(0.0, -hbar);
    let jj = j.j();
    let mut res = EigenResiduals {
        casimir: 0.0,
        s3: 0.0,
        s3_hat: 0.0,
    };
    for p in points {
        let value = f(&crate::rotations::exp_su2(p));
        let cas = apply_casimir(Field::L, &f, p, h)? * (-hbar * hbar);
        let s3 = apply_generator(Field::L, 2, &f, p, h)? * minus_i_hbar;
        let s3h = apply_generator(Field::R, 2, &f, p, h)? * minus_i_hbar;
        res.casimir = res
            .casimir
            .max((cas - value * hbar * hbar * jj * (jj + 1.0)).norm());
        res.s3 = res.s3.max((s3 - value * m * hbar).norm());
        res.s3_hat = res.s3_hat.max((s3h - value * k * hbar).norm());
    }
    Ok(res)
}

/// 𝐒² on a class function through its radial form −ħ²(f'' + ctg(k/2) f'), by central differences.
pub fn radial_casimir_fd(f: &dyn Fn(f64) -> f64, k: f64, h: f64, hbar: f64) -> f64 {
    let d1 = (f(k + h) - f(k - h)) / (2.0 * h);
    let d2 = (f(k + h) - 2.0 * f(k) + f(k - h)) / (h * h);
    -hbar * hbar * (d2 + d1 / (0.5 * k).tan())
}

/// Labels (j, m, n) in the order used by [`peter_weyl_gram`].
pub fn gram_labels(two_j_max: u32) -> Vec<(SpinLabel, usize, usize)> {
    let mut out = Vec::new();
    for t in 0..=two_j_max {
        let j = SpinLabel::new(t);
        for a in 0..j.dim() {
            for b in 0..j.dim() {
                out.push((j, a, b));
            }
        }
    }
    out
}

/// G = ∫ D(j)_mn conj(D(j')_m'n') dμ over all j, j' ≤ j_max.
pub fn peter_weyl_gram(two_j_max: u32, grid: &QuadratureGrid) -> CMatrix {
    let labels = gram_labels(two_j_max);
    let n = labels.len();
    let mut gram = CMatrix::zeros(n, n);
    let mut v = nalgebra::DVector::<Complex64>::zeros(n);
    for node in &grid.nodes {
        let mut idx = 0;
        for t in 0..=two_j_max {
            let d = wigner_d(SpinLabel::new(t), &node.q);
            for a in 0..d.matrix.nrows() {
                for b in 0..d.matrix.ncols() {
                    v[idx] = d.matrix[(a, b)];
                    idx += 1;
                }
            }
        }
        gram.ger(
            Complex64::new(node.weight, 0.0),
            &v,
            &v.conjugate(),
            Complex64::new(1.0, 0.0),
        );
    }
    gram
}

/// (max |diag − 1/(2j+1)|, max |off-diagonal|) of a Gram matrix.
pub fn gram_deviation(gram: &CMatrix, two_j_max: u32) -> (f64, f64) {
    let labels = gram_labels(two_j_max);
    let mut diag: f64 = 0.0;
    let mut off: f64 = 0.0;
    for (a, la) in labels.iter().enumerate() {
        for b in 0..labels.len() {
            if a == b {
                diag =
                    diag.max((gram[(a, b)] - Complex64::new(1.0 / la.0.dim() as f64, 0.0)).norm());
            } else {
                off = off.max(gram[(a, b)].norm());
            }
        }
    }
    (diag, off)
}
