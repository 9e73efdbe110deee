//! Group algebra of SU(2) on a Haar grid: convolution, commutators, ideal projections,
//! the multipole basis and the T(j,l) tensor functions.

mod multipole;
mod tensors;

pub use multipole::*;
pub use tensors::*;

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::{GroupKind, QuadratureGrid};
use crate::irreps::{character_derivative, idempotent, wigner_d, CMatrix, SpinLabel};
use crate::rotations::{log_su2, UnitQuaternion};

pub type Evaluator = Arc<dyn Fn(&UnitQuaternion) -> Complex64 + Send + Sync>;

/// Off-node evaluation scheme for sampled functions (tensor-product Lagrange in k, θ, φ).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interpolation {
    Linear,
    #[default]
    Cubic,
}

impl Interpolation {
    fn order(self) -> usize {
        match self {
            Interpolation::Linear => 2,
            Interpolation::Cubic => 4,
        }
    }
}

#[derive(Debug)]
struct Tables {
    k: Vec<f64>,
    theta: Vec<f64>,
    dphi: f64,
}

/// Complex function on the nodes of a Haar grid, optionally carrying an exact evaluator.
#[derive(Clone)]
pub struct GridFunction {
    pub grid: Arc<QuadratureGrid>,
    pub values: Vec<Complex64>,
    pub interpolation: Interpolation,
    evaluator: Option<Evaluator>,
    tables: Arc<Tables>,
}

impl std::fmt::Debug for GridFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridFunction")
            .field("resolution", &self.grid.resolution)
            .field("len", &self.values.len())
            .field("interpolation", &self.interpolation)
            .field("exact", &self.evaluator.is_some())
            .finish()
    }
}

fn tables(grid: &QuadratureGrid) -> Arc<Tables> {
    let mut theta: Vec<f64> = grid.cos_theta_nodes.iter().map(|c| c.acos()).collect();
    theta.reverse();
    Arc::new(Tables {
        k: grid.k_nodes.clone(),
        theta,
        dphi: std::f64::consts::TAU / grid.resolution.2 as f64,
    })
}

fn lagrange(nodes: &[f64], x: f64, p: usize) -> (usize, [f64; 4]) {
    let n = nodes.len();
    let p = p.min(n);
    let i = nodes.partition_point(|v| *v < x);
    let start = i.saturating_sub(p / 2).min(n - p);
    let mut w = [0.0; 4];
    for a in 0..p {
        let mut v = 1.0;
        for b in 0..p {
            if a != b {
                v *= (x - nodes[start + b]) / (nodes[start + a] - nodes[start + b]);
            }
        }
        w[a] = v;
    }
    (start, w)
}

/// (k, θ, φ) of a group element; SO(3) grids fold onto k ≤ π.
pub fn grid_coordinates(q: &UnitQuaternion, group: GroupKind) -> (f64, f64, f64) {
    let q = if group == GroupKind::SO3 && q.xi0 < 0.0 {
        -*q
    } else {
        *q
    };
    let s = (q.xi1 * q.xi1 + q.xi2 * q.xi2 + q.xi3 * q.xi3).sqrt();
    let k = 2.0 * s.atan2(q.xi0);
    if s < 1e-300 {
        return (k, 0.0, 0.0);
    }
    let theta = (q.xi3 / s).clamp(-1.0, 1.0).acos();
    let phi = q.xi2.atan2(q.xi1).rem_euclid(std::f64::consts::TAU);
    (k, theta, phi)
}

impl GridFunction {
    /// Samples f on the nodes and keeps f for exact off-node evaluation.
    pub fn from_fn<F>(grid: Arc<QuadratureGrid>, f: F) -> Self
    where
        F: Fn(&UnitQuaternion) -> Complex64 + Send + Sync + 'static,
    {
        let values = grid.nodes.iter().map(|n| f(&n.q)).collect();
        let t = tables(&grid);
        GridFunction {
            grid,
            values,
            interpolation: Interpolation::default(),
            evaluator: Some(Arc::new(f)),
            tables: t,
        }
    }

    pub fn from_evaluator(grid: Arc<QuadratureGrid>, f: Evaluator) -> Self {
        let values = grid.nodes.iter().map(|n| f(&n.q)).collect();
        let t = tables(&grid);
        GridFunction {
            grid,
            values,
            interpolation: Interpolation::default(),
            evaluator: Some(f),
            tables: t,
        }
    }

    pub fn from_values(grid: Arc<QuadratureGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput {
                reason: format!("{} values for {} nodes", values.len(), grid.len()),
            });
        }
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::InvalidInput {
                reason: "non-finite grid value".into(),
            });
        }
        let t = tables(&grid);
        Ok(GridFunction {
            grid,
            values,
            interpolation: Interpolation::default(),
            evaluator: None,
            tables: t,
        })
    }

    pub fn constant(grid: Arc<QuadratureGrid>, c: Complex64) -> Self {
        GridFunction::from_fn(grid, move |_| c)
    }

    /// Drops the exact evaluator; off-node values then come from interpolation.
    pub fn sampled(mut self) -> Self {
        self.evaluator = None;
        self
    }

    pub fn with_interpolation(mut self, i: Interpolation) -> Self {
        self.interpolation = i;
        self
    }

    pub fn is_exact(&self) -> bool {
        self.evaluator.is_some()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn eval(&self, q: &UnitQuaternion) -> Complex64 {
        match &self.evaluator {
            Some(f) => f(q),
            None => self.interpolate(q),
        }
    }

    pub fn interpolate(&self, q: &UnitQuaternion) -> Complex64 {
        let (k, theta, phi) = grid_coordinates(q, self.grid.group);
        let p = self.interpolation.order();
        let t = &*self.tables;
        let (_, nt, np) = self.grid.resolution;
        let (k0, wk) = lagrange(&t.k, k, p);
        let (t0, wt) = lagrange(&t.theta, theta, p);
        let x = phi / t.dphi;
        let i0 = x.floor();
        let frac = x - i0;
        let offsets: &[f64] = if p == 2 {
            &[0.0, 1.0]
        } else {
            &[-1.0, 0.0, 1.0, 2.0]
        };
        let mut wp = [0.0; 4];
        for (a, oa) in offsets.iter().enumerate() {
            let mut v = 1.0;
            for (b, ob) in offsets.iter().enumerate() {
                if a != b {
                    v *= (frac - ob) / (oa - ob);
                }
            }
            wp[a] = v;
        }
        let pk = p.min(t.k.len());
        let pt = p.min(t.theta.len());
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..pk {
            let ik = k0 + a;
            for b in 0..pt {
                let it = nt - 1 - (t0 + b);
                let wab = wk[a] * wt[b];
                let row = (ik * nt + it) * np;
                for (c, oc) in offsets.iter().enumerate() {
                    let ip = (i0 as i64 + *oc as i64).rem_euclid(np as i64) as usize;
                    acc += self.values[row + ip] * (wab * wp[c]);
                }
            }
        }
        acc
    }

    pub fn integrate(&self) -> Complex64 {
        self.grid
            .nodes
            .iter()
            .zip(&self.values)
            .map(|(n, v)| v * n.weight)
            .sum()
    }

    /// Weighted L² norm.
    pub fn norm(&self) -> f64 {
        self.grid
            .nodes
            .iter()
            .zip(&self.values)
            .map(|(n, v)| v.norm_sqr() * n.weight)
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, o: &GridFunction) -> Result<f64> {
        self.grid.check_same(&o.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&o.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Nodewise a·self + b·other; an exact evaluator is kept when both sides have one.
    pub fn linear_combination(
        &self,
        a: Complex64,
        o: &GridFunction,
        b: Complex64,
    ) -> Result<GridFunction> {
        self.grid.check_same(&o.grid)?;
        let values = self
            .values
            .iter()
            .zip(&o.values)
            .map(|(x, y)| x * a + y * b)
            .collect();
        let evaluator: Option<Evaluator> = match (&self.evaluator, &o.evaluator) {
            (Some(f), Some(g)) => {
                let (f, g) = (f.clone(), g.clone());
                Some(Arc::new(move |q: &UnitQuaternion| f(q) * a + g(q) * b))
            }
            _ => None,
        };
        Ok(GridFunction {
            grid: self.grid.clone(),
            values,
            interpolation: self.interpolation,
            evaluator,
            tables: self.tables.clone(),
        })
    }

    pub fn scaled(&self, a: Complex64) -> GridFunction {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= a);
        out.evaluator = self
            .evaluator
            .clone()
            .map(|f| Arc::new(move |q: &UnitQuaternion| f(q) * a) as Evaluator);
        out
    }

    /// max |f(u) − conj f(u⁻¹)| over nodes; zero for Hermitian elements of the group algebra.
    pub fn hermitian_defect(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for i in 0..self.len() {
            let inv = self
                .grid
                .inverse_index(i)
                .ok_or_else(|| Error::InvalidInput {
                    reason: "odd φ count: grid not closed under inversion".into(),
                })?;
            worst = worst.max((self.values[i] - self.values[inv].conj()).norm());
        }
        Ok(worst)
    }

    /// CSV rows `index,re,im`.
    pub fn to_csv(&self) -> String {
        let (a, b, c) = self.grid.resolution;
        let mut s = format!(
            "# group={:?} resolution={a},{b},{c}\nindex,re,im\n",
            self.grid.group
        );
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(s, "{i},{:.17e},{:.17e}", v.re, v.im);
        }
        s
    }

    pub fn from_csv(grid: Arc<QuadratureGrid>, text: &str) -> Result<GridFunction> {
        let bad = |r: &str| Error::InvalidInput {
            reason: format!("grid function csv: {r}"),
        };
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        let mut seen = vec![false; grid.len()];
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("index") {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(bad("row width"));
            }
            let i: usize = f[0].trim().parse().map_err(|_| bad("index"))?;
            let re: f64 = f[1].trim().parse().map_err(|_| bad("number"))?;
            let im: f64 = f[2].trim().parse().map_err(|_| bad("number"))?;
            if i >= grid.len() {
                return Err(bad("index out of range"));
            }
            values[i] = Complex64::new(re, im);
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(bad("missing nodes"));
        }
        GridFunction::from_values(grid, values)
    }
}

/// (A∗B)(u) = Σ_v w_v A(v) B(v⁻¹u) at arbitrary points.
pub fn convolve_at(
    a: &GridFunction,
    b: &GridFunction,
    points: &[UnitQuaternion],
) -> Result<Vec<Complex64>> {
    a.grid.check_same(&b.grid)?;
    let nodes = &a.grid.nodes;
    let out = points
        .par_iter()
        .map(|u| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (n, av) in nodes.iter().zip(&a.values) {
                if *av == Complex64::new(0.0, 0.0) {
                    continue;
                }
                acc += av * b.eval(&(n.q.inverse() * *u)) * n.weight;
            }
            acc
        })
        .collect();
    Ok(out)
}

/// A∗B at the listed grid nodes.
pub fn convolve_nodes(
    a: &GridFunction,
    b: &GridFunction,
    indices: &[usize],
) -> Result<Vec<Complex64>> {
    if let Some(i) = indices.iter().find(|i| **i >= a.len()) {
        return Err(Error::InvalidInput {
            reason: format!("node index {i} out of range"),
        });
    }
    let pts: Vec<UnitQuaternion> = indices.iter().map(|i| a.grid.nodes[*i].q).collect();
    convolve_at(a, b, &pts)
}

/// A∗B on every node; O(N²).
pub fn convolve(a: &GridFunction, b: &GridFunction) -> Result<GridFunction> {
    let pts: Vec<UnitQuaternion> = a.grid.nodes.iter().map(|n| n.q).collect();
    let values = convolve_at(a, b, &pts)?;
    GridFunction::from_values(a.grid.clone(), values)
}

/// [A,B] = A∗B − B∗A at the listed points.
pub fn conv_commutator_at(
    a: &GridFunction,
    b: &GridFunction,
    points: &[UnitQuaternion],
) -> Result<Vec<Complex64>> {
    let ab = convolve_at(a, b, points)?;
    let ba = convolve_at(b, a, points)?;
    Ok(ab.iter().zip(&ba).map(|(x, y)| x - y).collect())
}

pub fn conv_commutator(a: &GridFunction, b: &GridFunction) -> Result<GridFunction> {
    let pts: Vec<UnitQuaternion> = a.grid.nodes.iter().map(|n| n.q).collect();
    let values = conv_commutator_at(a, b, &pts)?;
    GridFunction::from_values(a.grid.clone(), values)
}

/// Evenly spread node indices, deterministic.
pub fn node_subset(grid: &QuadratureGrid, count: usize) -> Vec<usize> {
    let n = grid.len();
    let count = count.clamp(1, n);
    let stride = n / count;
    (0..count)
        .map(|i| (i * stride + (i * 7919) % stride.max(1)) % n)
        .collect()
}

/// Peter–Weyl coefficient F̂(j)_ab = ∫ F(v) D(j)_ab(v⁻¹) dμ(v), so that the M(j) part of F is (2j+1) Tr(F̂ D(j)).
pub fn fourier_coefficient(f: &GridFunction, j: SpinLabel) -> CMatrix {
    let n = j.dim();
    let mut out = CMatrix::zeros(n, n);
    for (node, v) in f.grid.nodes.iter().zip(&f.values) {
        let d = wigner_d(j, &node.q).matrix;
        let wv = v * node.weight;
        for a in 0..n {
            for b in 0..n {
                out[(a, b)] += wv * d[(b, a)].conj();
            }
        }
    }
    out
}

/// (2j+1) Tr(F̂ D(j)(u)).
pub fn peter_weyl_synthesis(fhat: &CMatrix, j: SpinLabel, u: &UnitQuaternion) -> Complex64 {
    let d = wigner_d(j, u).matrix;
    (fhat * d).trace() * j.dim() as f64
}

/// F ∗ ε(j), evaluated through the Peter–Weyl coefficient of the same quadrature sum.
pub fn project_ideal(f: &GridFunction, j: SpinLabel) -> GridFunction {
    let fhat = Arc::new(fourier_coefficient(f, j));
    let fh = fhat.clone();
    let mut out = GridFunction::from_evaluator(
        f.grid.clone(),
        Arc::new(move |u: &UnitQuaternion| peter_weyl_synthesis(&fh, j, u)),
    );
    out.interpolation = f.interpolation;
    out
}

/// ε(j) as a grid function.
pub fn idempotent_function(grid: Arc<QuadratureGrid>, j: SpinLabel) -> GridFunction {
    GridFunction::from_fn(grid, move |u| {
        Complex64::new(idempotent(j, log_su2(u).vector.angle()), 0.0)
    })
}

/// Σ_{j ≤ J} ε(j), the Dirichlet-kernel approximation of δ.
pub fn dirichlet_kernel(grid: Arc<QuadratureGrid>, two_j_max: u32) -> GridFunction {
    GridFunction::from_fn(grid, move |u| {
        let k = log_su2(u).vector.angle();
        Complex64::new(
            (0..=two_j_max)
                .map(|t| idempotent(SpinLabel::new(t), k))
                .sum(),
            0.0,
        )
    })
}

/// Σ(j)_a(u) = (ħ/i)(2j+1) χ'(k) n_a.
pub fn sigma_value(j: SpinLabel, a: usize, hbar: f64, u: &UnitQuaternion) -> Complex64 {
    let kv = log_su2(u).vector;
    let k = kv.angle();
    if k < 1e-300 {
        return Complex64::new(0.0, 0.0);
    }
    let v = j.dim() as f64 * character_derivative(j, k) * kv.0[a] / k;
    Complex64::new(0.0, -hbar * v)
}

pub fn sigma_projection(
    grid: Arc<QuadratureGrid>,
    j: SpinLabel,
    a: usize,
    hbar: f64,
) -> Result<GridFunction> {
    if a > 2 {
        return Err(Error::InvalidInput {
            reason: format!("component {a} out of range 0..3"),
        });
    }
    Ok(GridFunction::from_fn(grid, move |u| {
        sigma_value(j, a, hbar, u)
    }))
}

/// ε(j)_mk = (2j+1) D(j)_mk as a grid function.
pub fn basis_element(
    grid: Arc<QuadratureGrid>,
    j: SpinLabel,
    m: f64,
    k: f64,
) -> Result<GridFunction> {
    let (r, c) = (j.index_of(m)?, j.index_of(k)?);
    Ok(GridFunction::from_fn(grid, move |u| {
        wigner_d(j, u).matrix[(r, c)] * j.dim() as f64
    }))
}
