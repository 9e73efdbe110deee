use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{fourier_coefficient, multipole_family, GridFunction};
use crate::error::{Error, Result};
use crate::haar::QuadratureGrid;
use crate::irreps::{spin_matrices, wigner_d, CMatrix, SpinLabel};
use crate::rotations::{UnitQuaternion, Vec3};

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Flat index of a rank-l tensor component (base 3, first index most significant).
pub fn flat_index(idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, a| acc * 3 + a)
}

pub fn unflat_index(mut i: usize, l: usize) -> Vec<usize> {
    let mut out = vec![0; l];
    for p in (0..l).rev() {
        out[p] = i % 3;
        i /= 3;
    }
    out
}

fn permutations(l: usize) -> Vec<Vec<usize>> {
    if l == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(l - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, l - 1);
            out.push(q);
        }
    }
    out
}

/// Full symmetrization of a rank-l tensor.
pub fn symmetrize(l: usize, x: &[Complex64]) -> Vec<Complex64> {
    let perms = permutations(l);
    let n = perms.len() as f64;
    (0..x.len())
        .map(|i| {
            let idx = unflat_index(i, l);
            let s: Complex64 = perms
                .iter()
                .map(|p| {
                    let q: Vec<usize> = p.iter().map(|k| idx[*k]).collect();
                    x[flat_index(&q)]
                })
                .sum();
            s / n
        })
        .collect()
}

/// Contraction of the first two indices.
pub fn trace_first_pair(l: usize, x: &[Complex64]) -> Vec<Complex64> {
    assert!(l >= 2);
    let m = 3usize.pow(l as u32 - 2);
    (0..m)
        .map(|r| (0..3).map(|a| x[(a * 3 + a) * m + r]).sum())
        .collect()
}

/// Sym(δ ⊗ z) for symmetric z of rank l − 2.
fn sym_delta(l: usize, z: &[Complex64]) -> Vec<Complex64> {
    let pairs: Vec<(usize, usize)> = (0..l)
        .flat_map(|p| ((p + 1)..l).map(move |q| (p, q)))
        .collect();
    let np = pairs.len() as f64;
    (0..3usize.pow(l as u32))
        .map(|i| {
            let idx = unflat_index(i, l);
            let mut acc = zero();
            for (p, q) in &pairs {
                if idx[*p] == idx[*q] {
                    let rest: Vec<usize> = idx
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| k != p && k != q)
                        .map(|(_, a)| *a)
                        .collect();
                    acc += z[flat_index(&rest)];
                }
            }
            acc / np
        })
        .collect()
}

/// Pseudo-inverse of z ↦ tr(Sym(δ ⊗ Sym z)) on rank l − 2.
fn trace_system(l: usize) -> DMatrix<f64> {
    let m = 3usize.pow(l as u32 - 2);
    let mut a = DMatrix::<f64>::zeros(m, m);
    for c in 0..m {
        let mut e = vec![zero(); m];
        e[c] = Complex64::new(1.0, 0.0);
        let col = trace_first_pair(l, &sym_delta(l, &symmetrize(l - 2, &e)));
        for r in 0..m {
            a[(r, c)] = col[r].re;
        }
    }
    a.pseudo_inverse(1e-12).expect("svd")
}

/// Traceless part of a symmetric tensor: X − Sym(δ ⊗ Z) with Z solving the trace equations.
pub struct TracelessProjector {
    l: usize,
    pinv: Option<DMatrix<f64>>,
}

impl TracelessProjector {
    pub fn new(l: usize) -> Self {
        TracelessProjector {
            l,
            pinv: if l >= 2 { Some(trace_system(l)) } else { None },
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let Some(p) = &self.pinv else {
            return x.to_vec();
        };
        let t = trace_first_pair(self.l, x);
        let z: Vec<Complex64> = (0..p.nrows())
            .map(|r| (0..p.ncols()).map(|c| t[c] * p[(r, c)]).sum())
            .collect();
        let d = sym_delta(self.l, &z);
        x.iter().zip(&d).map(|(a, b)| a - b).collect()
    }
}

/// Symmetric traceless real tensor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracelessTensor {
    pub l: usize,
    pub components: Vec<f64>,
}

impl TracelessTensor {
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.components[flat_index(idx)]
    }

    /// Largest |contraction| over index pairs.
    pub fn trace_defect(&self) -> f64 {
        if self.l < 2 {
            return 0.0;
        }
        let x: Vec<Complex64> = self
            .components
            .iter()
            .map(|v| Complex64::new(*v, 0.0))
            .collect();
        trace_first_pair(self.l, &x)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn symmetry_defect(&self) -> f64 {
        let x: Vec<Complex64> = self
            .components
            .iter()
            .map(|v| Complex64::new(*v, 0.0))
            .collect();
        symmetrize(self.l, &x)
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Traceless part of n ⊗ … ⊗ n (l factors).
pub fn traceless_tensor(l: usize, n: &Vec3) -> TracelessTensor {
    let x: Vec<Complex64> = (0..3usize.pow(l as u32))
        .map(|i| Complex64::new(unflat_index(i, l).iter().map(|a| n[*a]).product(), 0.0))
        .collect();
    let y = TracelessProjector::new(l).apply(&x);
    TracelessTensor {
        l,
        components: y.iter().map(|z| z.re).collect(),
    }
}

/// Number of linearly independent components, by rank of the span of the traceless family.
pub fn independent_components(l: usize) -> usize {
    let dirs = generic_directions(2 * l + 3);
    let m = DMatrix::<f64>::from_fn(3usize.pow(l as u32), dirs.len(), |r, c| {
        traceless_tensor(l, &dirs[c]).components[r]
    });
    let sv = m.singular_values();
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|s| **s > 1e-10 * top).count()
}

/// Deterministic pseudo-random unit vectors (fixed seed).
pub fn generic_directions(count: usize) -> Vec<Vec3> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    (0..count)
        .map(|_| UnitQuaternion::random(&mut rng).vector().normalize())
        .collect()
}

/// ⁰S(j,l): traceless part of the symmetrized products S(j)_(a₁ ⋯ S(j)_a_l), with S(j) the
/// generators of D(j) (so that 𝐒_a D(j) = S(j)_a D(j)).
#[derive(Clone, Debug, PartialEq)]
pub struct SpinTensor {
    pub j: SpinLabel,
    pub l: usize,
    pub matrices: Vec<CMatrix>,
}

pub fn spin_tensor(j: SpinLabel, l: usize, hbar: f64) -> Result<SpinTensor> {
    if l > j.two_j as usize {
        return Err(Error::RankOutOfRange {
            l,
            max: j.two_j as usize,
        });
    }
    let g = spin_matrices(j, hbar).generators();
    let n = j.dim();
    let total = 3usize.pow(l as u32);
    let products: Vec<CMatrix> = (0..total)
        .map(|i| {
            unflat_index(i, l)
                .iter()
                .fold(CMatrix::identity(n, n), |acc, a| acc * &g[*a])
        })
        .collect();
    let proj = TracelessProjector::new(l);
    let mut out = vec![CMatrix::zeros(n, n); total];
    for r in 0..n {
        for c in 0..n {
            let x: Vec<Complex64> = products.iter().map(|p| p[(r, c)]).collect();
            let y = proj.apply(&symmetrize(l, &x));
            for (i, v) in y.into_iter().enumerate() {
                out[i][(r, c)] = v;
            }
        }
    }
    Ok(SpinTensor {
        j,
        l,
        matrices: out,
    })
}

impl SpinTensor {
    pub fn get(&self, idx: &[usize]) -> &CMatrix {
        &self.matrices[flat_index(idx)]
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.matrices
            .iter()
            .map(|m| {
                (m - m.adjoint())
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    pub fn trace_defect(&self) -> f64 {
        if self.l < 2 {
            return 0.0;
        }
        let n = self.j.dim();
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let x: Vec<Complex64> = self.matrices.iter().map(|m| m[(r, c)]).collect();
                worst = trace_first_pair(self.l, &x)
                    .iter()
                    .map(|z| z.norm())
                    .fold(worst, f64::max);
            }
        }
        worst
    }

    /// Σ P^{a…} ⁰S_{a…}.
    pub fn contract(&self, p: &[Complex64]) -> CMatrix {
        let n = self.j.dim();
        self.matrices
            .iter()
            .zip(p)
            .fold(CMatrix::zeros(n, n), |acc, (m, c)| acc + m * *c)
    }
}

/// T(j,l)_{a…}(u) = (2j+1) Tr(⁰S(j,l)_{a…} D(j)(u)).
pub fn t_function(
    j: SpinLabel,
    l: usize,
    indices: &[usize],
    hbar: f64,
) -> Result<impl Fn(&UnitQuaternion) -> Complex64 + Send + Sync + Clone> {
    if indices.len() != l || indices.iter().any(|a| *a > 2) {
        return Err(Error::InvalidInput {
            reason: format!("need {l} tensor indices in 0..3"),
        });
    }
    let st = spin_tensor(j, l, hbar)?;
    let m = Arc::new(st.get(indices).clone());
    Ok(move |u: &UnitQuaternion| (&*m * wigner_d(j, u).matrix).trace() * j.dim() as f64)
}

pub fn t_grid_function(
    grid: Arc<QuadratureGrid>,
    j: SpinLabel,
    l: usize,
    indices: &[usize],
    hbar: f64,
) -> Result<GridFunction> {
    Ok(GridFunction::from_fn(
        grid,
        t_function(j, l, indices, hbar)?,
    ))
}

/// Coefficients P(l) (full component arrays, l = 0..2j) of F = Σ_l P(l)^{a…} T(j,l)_{a…}.
#[derive(Clone, Debug, PartialEq)]
pub struct TExpansion {
    pub j: SpinLabel,
    pub tensors: Vec<Vec<Complex64>>,
    /// Relative L² distance of F from M(j).
    pub ideal_residual: f64,
}

/// Relative L² distance between F and its Peter–Weyl reconstruction in M(j), plus F̂(j).
pub fn ideal_residual(f: &GridFunction, j: SpinLabel) -> (f64, CMatrix) {
    let fhat = fourier_coefficient(f, j);
    let mut num = 0.0;
    let mut den = 0.0;
    for (node, v) in f.grid.nodes.iter().zip(&f.values) {
        let r = (&fhat * wigner_d(j, &node.q).matrix).trace() * j.dim() as f64;
        num += (v - r).norm_sqr() * node.weight;
        den += v.norm_sqr() * node.weight;
    }
    ((num / den.max(1e-300)).sqrt(), fhat)
}

pub fn expand_in_t(f: &GridFunction, j: SpinLabel, hbar: f64, tol: f64) -> Result<TExpansion> {
    let (res, fhat) = ideal_residual(f, j);
    if res > tol {
        return Err(Error::NotInIdeal {
            j: j.j(),
            residual: res,
            tol,
        });
    }
    let n = j.dim();
    let mut columns: Vec<(usize, Vec<f64>, CMatrix)> = Vec::new();
    let mut spin = Vec::new();
    for l in 0..=j.two_j as usize {
        let st = spin_tensor(j, l, hbar)?;
        for d in generic_directions(2 * l + 1) {
            let b = traceless_tensor(l, &d);
            let bc: Vec<Complex64> = b
                .components
                .iter()
                .map(|v| Complex64::new(*v, 0.0))
                .collect();
            columns.push((l, b.components.clone(), st.contract(&bc)));
        }
        spin.push(st);
    }
    let rows = n * n;
    let a = DMatrix::<Complex64>::from_fn(rows, columns.len(), |r, c| columns[c].2[(r / n, r % n)]);
    let rhs = DVector::<Complex64>::from_fn(rows, |r, _| fhat[(r / n, r % n)]);
    let sol = a
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::InvalidInput {
            reason: e.to_string(),
        })?;
    let mut tensors: Vec<Vec<Complex64>> = (0..=j.two_j as usize)
        .map(|l| vec![zero(); 3usize.pow(l as u32)])
        .collect();
    for (c, (l, comps, _)) in columns.iter().enumerate() {
        for (i, v) in comps.iter().enumerate() {
            tensors[*l][i] += sol[c] * *v;
        }
    }
    Ok(TExpansion {
        j,
        tensors,
        ideal_residual: res,
    })
}

/// F̂ = Σ_l P(l)·⁰S(j,l); F(u) = (2j+1) Tr(F̂ D(j)(u)).
pub fn synthesize_t(
    j: SpinLabel,
    tensors: &[Vec<Complex64>],
    hbar: f64,
) -> Result<impl Fn(&UnitQuaternion) -> Complex64 + Send + Sync + Clone> {
    if tensors.len() > j.dim() {
        return Err(Error::RankOutOfRange {
            l: tensors.len() - 1,
            max: j.two_j as usize,
        });
    }
    let n = j.dim();
    let mut fhat = CMatrix::zeros(n, n);
    for (l, p) in tensors.iter().enumerate() {
        if p.len() != 3usize.pow(l as u32) {
            return Err(Error::InvalidInput {
                reason: format!("rank-{l} tensor needs {} components", 3usize.pow(l as u32)),
            });
        }
        let st = spin_tensor(j, l, hbar)?;
        let pc: Vec<Complex64> = TracelessProjector::new(l).apply(&symmetrize(l, p));
        fhat += st.contract(&pc);
    }
    let fhat = Arc::new(fhat);
    Ok(move |u: &UnitQuaternion| (&*fhat * wigner_d(j, u).matrix).trace() * n as f64)
}

/// Coefficients P_lm of F = Σ P_lm Q{j}_lm, in [`multipole_family`] order.
pub fn expand_in_q(f: &GridFunction, j: SpinLabel, tol: f64) -> Result<Vec<Complex64>> {
    let (res, _) = ideal_residual(f, j);
    if res > tol {
        return Err(Error::NotInIdeal {
            j: j.j(),
            residual: res,
            tol,
        });
    }
    let fam = multipole_family(j);
    let mut num = vec![zero(); fam.len()];
    let mut den = vec![0.0; fam.len()];
    for (node, v) in f.grid.nodes.iter().zip(&f.values) {
        for (i, q) in fam.iter().enumerate() {
            let qv = q.eval(&node.q);
            num[i] += qv.conj() * v * node.weight;
            den[i] += qv.norm_sqr() * node.weight;
        }
    }
    Ok(num.iter().zip(&den).map(|(a, b)| a / *b).collect())
}

pub fn synthesize_q(
    j: SpinLabel,
    coefficients: &[Complex64],
) -> Result<impl Fn(&UnitQuaternion) -> Complex64 + Send + Sync + Clone> {
    let fam = multipole_family(j);
    if coefficients.len() != fam.len() {
        return Err(Error::InvalidInput {
            reason: format!("expected {} coefficients", fam.len()),
        });
    }
    let c = coefficients.to_vec();
    Ok(move |u: &UnitQuaternion| fam.iter().zip(&c).map(|(q, p)| q.eval(u) * p).sum())
}

/// max |P_{l,−m} − (−1)^{l+m} conj P_lm|; zero exactly when Σ P_lm Q{j}_lm is Hermitian.
pub fn q_hermiticity_defect(j: SpinLabel, coefficients: &[Complex64]) -> f64 {
    let fam = multipole_family(j);
    let pos = |l: usize, m: i64| {
        fam.iter()
            .position(|q| q.l() == l && q.m == m)
            .expect("label")
    };
    let mut worst: f64 = 0.0;
    for (i, q) in fam.iter().enumerate() {
        let other = coefficients[pos(q.l(), -q.m)];
        let sign = if (q.l() as i64 + q.m).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        };
        worst = worst.max((other - coefficients[i].conj() * sign).norm());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupalgebra::{sigma_value, GridFunction};
    use crate::haar::{build_grid, GroupKind};
    use crate::irreps::idempotent;
    use crate::liealgebra::{apply_casimir, Field};
    use crate::rotations::{log_su2, RotationVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn traceless_examples() {
        let n = Vec3::new(0.0, 0.0, 1.0);
        let t1 = traceless_tensor(1, &n);
        assert_eq!(t1.components, vec![0.0, 0.0, 1.0]);
        let t2 = traceless_tensor(2, &n);
        let want = [
            -1.0 / 3.0,
            0.0,
            0.0,
            0.0,
            -1.0 / 3.0,
            0.0,
            0.0,
            0.0,
            2.0 / 3.0,
        ];
        for (a, b) in t2.components.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..20 {
            let n = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            )
            .normalize();
            for l in 0..=6 {
                let t = traceless_tensor(l, &n);
                assert!(t.trace_defect() < 1e-12 && t.symmetry_defect() < 1e-12);
            }
            let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
            let t3 = traceless_tensor(3, &n);
            let t4 = traceless_tensor(4, &n);
            for i in 0..81 {
                let ix = unflat_index(i, 4);
                let (a, b, cc, dd) = (ix[0], ix[1], ix[2], ix[3]);
                let want = n[a] * n[b] * n[cc] * n[dd]
                    - (n[a] * n[b] * d(cc, dd)
                        + n[a] * n[cc] * d(b, dd)
                        + n[a] * n[dd] * d(b, cc)
                        + n[b] * n[cc] * d(a, dd)
                        + n[b] * n[dd] * d(a, cc)
                        + n[cc] * n[dd] * d(a, b))
                        / 7.0
                    + (d(a, b) * d(cc, dd) + d(a, cc) * d(b, dd) + d(a, dd) * d(b, cc)) / 35.0;
                assert!((t4.components[i] - want).abs() < 1e-13);
                if i < 27 {
                    let ix = unflat_index(i, 3);
                    let (a, b, cc) = (ix[0], ix[1], ix[2]);
                    let want = n[a] * n[b] * n[cc]
                        - (n[a] * d(b, cc) + n[b] * d(cc, a) + n[cc] * d(a, b)) / 5.0;
                    assert!((t3.components[i] - want).abs() < 1e-13);
                }
            }
        }
        for l in 0..=5 {
            assert_eq!(independent_components(l), 2 * l + 1);
        }
    }

    #[test]
    fn spin_tensor_invariants() {
        for t in 0..=4u32 {
            let j = SpinLabel::new(t);
            for l in 0..=t as usize {
                let s = spin_tensor(j, l, 1.0).unwrap();
                assert!(s.hermiticity_defect() < 1e-12);
                assert!(s.trace_defect() < 1e-11);
            }
        }
        assert!(matches!(
            spin_tensor(SpinLabel::new(1), 2, 1.0),
            Err(Error::RankOutOfRange { .. })
        ));
    }

    #[test]
    fn t_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let j = SpinLabel::new(3);
        let t0 = t_function(j, 0, &[], 1.0).unwrap();
        for _ in 0..20 {
            let u = UnitQuaternion::random(&mut rng);
            let k = log_su2(&u).vector.angle();
            assert!((t0(&u) - c(idempotent(j, k))).norm() < 1e-10);
            for a in 0..3 {
                let t1 = t_function(j, 1, &[a], 1.0).unwrap();
                assert!((t1(&u) - sigma_value(j, a, 1.0, &u)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn t_rank_two_eigenfunction() {
        let j = SpinLabel::new(2);
        let f = t_function(j, 2, &[0, 2], 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..5 {
            let n = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let k = RotationVector::from_axis_angle(&n, rng.gen_range(0.5..5.5));
            let v = f(&crate::rotations::exp_su2(&k));
            let d2 = apply_casimir(Field::A, &f, &k, 1e-4).unwrap() * -1.0;
            assert!((d2 - v * 6.0).norm() < 1e-3);
            let s2 = apply_casimir(Field::L, &f, &k, 1e-4).unwrap() * -1.0;
            assert!((s2 - v * 2.0).norm() < 1e-3);
        }
    }

    #[test]
    fn expansions_round_trip() {
        let g = Arc::new(build_grid(24, 16, 32, GroupKind::SU2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        for t in 1..=3u32 {
            let j = SpinLabel::new(t);
            let mut tensors = Vec::new();
            for l in 0..=t as usize {
                let raw: Vec<Complex64> = (0..3usize.pow(l as u32))
                    .map(|_| c(rng.gen_range(-1.0..1.0)))
                    .collect();
                tensors.push(TracelessProjector::new(l).apply(&symmetrize(l, &raw)));
            }
            let f = GridFunction::from_fn(g.clone(), synthesize_t(j, &tensors, 1.0).unwrap());
            assert!(f.hermitian_defect().unwrap() < 1e-10);
            let e = expand_in_t(&f, j, 1.0, 1e-8).unwrap();
            for (a, b) in e.tensors.iter().zip(&tensors) {
                for (x, y) in a.iter().zip(b) {
                    assert!((x - y).norm() < 1e-6, "j={} {x} {y}", j.j());
                }
            }
            let p = expand_in_q(&f, j, 1e-8).unwrap();
            assert!(q_hermiticity_defect(j, &p) < 1e-8);
            let back = GridFunction::from_fn(g.clone(), synthesize_q(j, &p).unwrap());
            assert!(back.max_abs_diff(&f).unwrap() < 1e-6);
        }
        let j = SpinLabel::new(2);
        let eps = GridFunction::from_fn(g.clone(), move |u| {
            c(idempotent(j, log_su2(u).vector.angle()))
        });
        let e = expand_in_t(&eps, j, 1.0, 1e-8).unwrap();
        assert!((e.tensors[0][0] - c(1.0)).norm() < 1e-8);
        assert!(e.tensors[1..].iter().flatten().all(|z| z.norm() < 1e-8));
        let outside = GridFunction::from_fn(g.clone(), |u| c(u.xi0));
        assert!(matches!(
            expand_in_t(&outside, j, 1.0, 1e-6),
            Err(Error::NotInIdeal { .. })
        ));
    }

    #[test]
    fn complex_coefficients_break_hermiticity() {
        let g = Arc::new(build_grid(16, 12, 24, GroupKind::SU2).unwrap());
        let j = SpinLabel::new(2);
        let tensors = vec![
            vec![c(0.0)],
            vec![Complex64::new(0.0, 1.0), c(0.0), c(0.0)],
            vec![c(0.0); 9],
        ];
        let f = GridFunction::from_fn(g, synthesize_t(j, &tensors, 1.0).unwrap());
        assert!(f.hermitian_defect().unwrap() > 1e-2);
    }

    #[test]
    fn q_coefficients_for_hermitian_synthesis() {
        let g = Arc::new(build_grid(24, 16, 32, GroupKind::SU2).unwrap());
        let j = SpinLabel::new(2);
        let fam = multipole_family(j);
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let mut p = vec![c(0.0); fam.len()];
        for (i, q) in fam.iter().enumerate() {
            if q.m > 0 {
                let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                p[i] = v;
                let k = fam
                    .iter()
                    .position(|r| r.l() == q.l() && r.m == -q.m)
                    .unwrap();
                let sign = if (q.l() as i64 + q.m) % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                p[k] = v.conj() * sign;
            } else if q.m == 0 {
                p[i] = if q.l() % 2 == 0 {
                    c(rng.gen_range(-1.0..1.0))
                } else {
                    Complex64::new(0.0, rng.gen_range(-1.0..1.0))
                };
            }
        }
        assert!(q_hermiticity_defect(j, &p) < 1e-15);
        let f = GridFunction::from_fn(g, synthesize_q(j, &p).unwrap());
        assert!(f.hermitian_defect().unwrap() < 1e-10);
    }
}
