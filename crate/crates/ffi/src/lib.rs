//! C ABI for `spinharm`.
//!
//! Every function returns an [`ShStatus`]; results are written through out-pointers. On failure
//! a message is kept per thread and can be read with [`sh_last_error_message`]. Heap objects are
//! opaque handles released with their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::Arc;

use num_complex::Complex64;
use spinharm::groupalgebra::{convolve_nodes, idempotent_function, GridFunction};
use spinharm::haar::{build_grid, GroupKind, QuadratureGrid};
use spinharm::irreps::{character, idempotent, wigner_d, SpinLabel};
use spinharm::quasiclassics::{
    evolve_density, CoalgebraGrid, Evolution, GaussianBlob, TopHamiltonian,
};
use spinharm::rotations::{
    exp_su2, gibbs_compose, log_su2, project_so3, GibbsVector, RotationVector, UnitQuaternion, Vec3,
};
use spinharm::Error;

/// Status codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    BufferTooSmall = 3,
    AxisUndefined = 4,
    GibbsSingularity = 5,
    ChartSingular = 6,
    ResolutionMismatch = 7,
    RankOutOfRange = 8,
    NotInIdeal = 9,
    QuadratureFailure = 10,
    StepUnstable = 11,
    LabelOutOfRange = 12,
    WindowInvalid = 13,
    Panic = 14,
}

impl From<&Error> for ShStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::AxisUndefined { .. } => ShStatus::AxisUndefined,
            Error::GibbsSingularity { .. } => ShStatus::GibbsSingularity,
            Error::ChartSingular { .. } => ShStatus::ChartSingular,
            Error::ResolutionMismatch { .. } => ShStatus::ResolutionMismatch,
            Error::RankOutOfRange { .. } => ShStatus::RankOutOfRange,
            Error::NotInIdeal { .. } => ShStatus::NotInIdeal,
            Error::QuadratureFailure { .. } => ShStatus::QuadratureFailure,
            Error::StepUnstable { .. } => ShStatus::StepUnstable,
            Error::LabelOutOfRange { .. } => ShStatus::LabelOutOfRange,
            Error::WindowInvalid { .. } => ShStatus::WindowInvalid,
            _ => ShStatus::InvalidInput,
        }
    }
}

/// Group selector for quadrature grids.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShGroup {
    Su2 = 0,
    So3 = 1,
}

/// One recorded time of a density evolution.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ShSnapshot {
    pub t: f64,
    pub energy: f64,
    pub casimir: f64,
    pub norm: f64,
    pub pointwise_casimir_drift: f64,
}

/// Opaque Haar quadrature grid.
pub struct ShGrid {
    grid: Arc<QuadratureGrid>,
}

/// Opaque sampled function on a grid.
pub struct ShGridFunction {
    f: GridFunction,
}

/// Opaque result of a density evolution.
pub struct ShEvolution {
    ev: Evolution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard<F: FnOnce() -> Result<(), (ShStatus, String)>>(f: F) -> ShStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ShStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside spinharm".into());
            ShStatus::Panic
        }
    }
}

fn lib(e: Error) -> (ShStatus, String) {
    (ShStatus::from(&e), e.to_string())
}

fn null(what: &str) -> (ShStatus, String) {
    (ShStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> (ShStatus, String) {
    (ShStatus::InvalidInput, msg.into())
}

unsafe fn read<const N: usize>(p: *const f64, what: &str) -> Result<[f64; N], (ShStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    let mut out = [0.0; N];
    out.copy_from_slice(slice::from_raw_parts(p, N));
    Ok(out)
}

unsafe fn write<const N: usize>(
    p: *mut f64,
    v: [f64; N],
    what: &str,
) -> Result<(), (ShStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    slice::from_raw_parts_mut(p, N).copy_from_slice(&v);
    Ok(())
}

fn quat(c: [f64; 4]) -> Result<UnitQuaternion, (ShStatus, String)> {
    UnitQuaternion::try_new(c).map_err(lib)
}

fn q_array(q: &UnitQuaternion) -> [f64; 4] {
    [q.xi0, q.xi1, q.xi2, q.xi3]
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the last error message of this thread into `buf` (NUL-terminated, truncated to `len`).
/// Returns the full message length excluding the terminator, or 0 if there is none.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn sh_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Unit quaternion (ξ⁰, ξ¹, ξ², ξ³) of the rotation vector `k`.
///
/// # Safety
/// `k` must point to 3 readable doubles and `out` to 4 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sh_quat_from_vector(k: *const f64, out: *mut f64) -> ShStatus {
    guard(|| {
        let k = read::<3>(k, "k")?;
        write(
            out,
            q_array(&exp_su2(&RotationVector::new(k[0], k[1], k[2]))),
            "out",
        )
    })
}

/// Rotation vector with |k| ∈ [0, 2π] of a quaternion (normalized on input).
///
/// # Safety
/// `q` must point to 4 readable doubles and `out` to 3 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sh_vector_from_quat(q: *const f64, out: *mut f64) -> ShStatus {
    guard(|| {
        let v = log_su2(&quat(read::<4>(q, "q")?)?).vector.0;
        write(out, [v.x, v.y, v.z], "out")
    })
}

/// Hamilton product a·b.
///
/// # Safety
/// `a` and `b` must point to 4 readable doubles each and `out` to 4 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sh_quat_multiply(a: *const f64, b: *const f64, out: *mut f64) -> ShStatus {
    guard(|| {
        let p = quat(read::<4>(a, "a")?)? * quat(read::<4>(b, "b")?)?;
        write(out, q_array(&p), "out")
    })
}

/// SO(3) image of a quaternion, row-major.
///
/// # Safety
/// `q` must point to 4 readable doubles and `out` to 9 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sh_project_so3(q: *const f64, out: *mut f64) -> ShStatus {
    guard(|| {
        let r = project_so3(&quat(read::<4>(q, "q")?)?).0;
        let mut m = [0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                m[3 * i + j] = r[(i, j)];
            }
        }
        write(out, m, "out")
    })
}

/// Gibbs vector of R[a]R[b]; fails with `SH_STATUS_GIBBS_SINGULARITY` for a π-rotation result.
///
/// # Safety
/// `a` and `b` must point to 3 readable doubles each and `out` to 3 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sh_gibbs_compose(a: *const f64, b: *const f64, out: *mut f64) -> ShStatus {
    guard(|| {
        let a = read::<3>(a, "a")?;
        let b = read::<3>(b, "b")?;
        let g = gibbs_compose(
            &GibbsVector::new(a[0], a[1], a[2]),
            &GibbsVector::new(b[0], b[1], b[2]),
        )
        .map_err(lib)?;
        write(out, [g.0.x, g.0.y, g.0.z], "out")
    })
}

/// Character χ(j)(k) and idempotent ε(j)(k) = (2j+1)χ(j)(k) for j = two_j/2.
///
/// # Safety
/// `chi` and `eps` must each be null or point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn sh_character(
    two_j: u32,
    k: f64,
    chi: *mut f64,
    eps: *mut f64,
) -> ShStatus {
    guard(|| {
        if !k.is_finite() {
            return Err(invalid("k must be finite"));
        }
        let j = SpinLabel::new(two_j);
        if !chi.is_null() {
            *chi = character(j, k);
        }
        if !eps.is_null() {
            *eps = idempotent(j, k);
        }
        Ok(())
    })
}

/// Wigner D matrix of spin two_j/2 at `q`, row-major with rows and columns in descending m.
/// Needs `len >= (two_j+1)^2`; otherwise returns `SH_STATUS_BUFFER_TOO_SMALL`.
///
/// # Safety
/// `q` must point to 4 readable doubles; `re` and `im` must each be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sh_wigner_d(
    two_j: u32,
    q: *const f64,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> ShStatus {
    guard(|| {
        let j = SpinLabel::new(two_j);
        let n = j.dim();
        if len < n * n {
            return Err((
                ShStatus::BufferTooSmall,
                format!("need {} entries, got {len}", n * n),
            ));
        }
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let d = wigner_d(j, &quat(read::<4>(q, "q")?)?).matrix;
        let (re, im) = (
            slice::from_raw_parts_mut(re, n * n),
            slice::from_raw_parts_mut(im, n * n),
        );
        for a in 0..n {
            for b in 0..n {
                re[a * n + b] = d[(a, b)].re;
                im[a * n + b] = d[(a, b)].im;
            }
        }
        Ok(())
    })
}

/// Builds an n_k × n_theta × n_phi Haar grid.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle to free with [`sh_grid_free`].
#[no_mangle]
pub unsafe extern "C" fn sh_grid_new(
    n_k: usize,
    n_theta: usize,
    n_phi: usize,
    group: ShGroup,
    out: *mut *mut ShGrid,
) -> ShStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let g = match group {
            ShGroup::Su2 => GroupKind::SU2,
            ShGroup::So3 => GroupKind::SO3,
        };
        let grid = build_grid(n_k, n_theta, n_phi, g).map_err(lib)?;
        *out = Box::into_raw(Box::new(ShGrid {
            grid: Arc::new(grid),
        }));
        Ok(())
    })
}

/// # Safety
/// `grid` must be null or a handle from [`sh_grid_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sh_grid_free(grid: *mut ShGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Node count and normalized weight sum.
///
/// # Safety
/// `grid` must be a live grid handle; `len` and `weight_sum` must each be null or writable.
#[no_mangle]
pub unsafe extern "C" fn sh_grid_info(
    grid: *const ShGrid,
    len: *mut usize,
    weight_sum: *mut f64,
) -> ShStatus {
    guard(|| {
        let g = grid.as_ref().ok_or_else(|| null("grid"))?;
        if !len.is_null() {
            *len = g.grid.len();
        }
        if !weight_sum.is_null() {
            *weight_sum = g.grid.weight_sum();
        }
        Ok(())
    })
}

/// ε(j) sampled on `grid`, j = two_j/2.
///
/// # Safety
/// `grid` must be a live grid handle and `out` a valid pointer; free the result with
/// [`sh_gridfn_free`]. The function keeps its own reference to the grid.
#[no_mangle]
pub unsafe extern "C" fn sh_gridfn_idempotent(
    grid: *const ShGrid,
    two_j: u32,
    out: *mut *mut ShGridFunction,
) -> ShStatus {
    guard(|| {
        let g = grid.as_ref().ok_or_else(|| null("grid"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let f = idempotent_function(g.grid.clone(), SpinLabel::new(two_j)).sampled();
        *out = Box::into_raw(Box::new(ShGridFunction { f }));
        Ok(())
    })
}

/// Function from node values.
///
/// # Safety
/// `grid` must be a live grid handle; `re` and `im` must be valid for `len` reads and `len`
/// must equal the node count; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sh_gridfn_from_values(
    grid: *const ShGrid,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut ShGridFunction,
) -> ShStatus {
    guard(|| {
        let g = grid.as_ref().ok_or_else(|| null("grid"))?;
        if re.is_null() || im.is_null() || out.is_null() {
            return Err(null("re/im/out"));
        }
        let (re, im) = (
            slice::from_raw_parts(re, len),
            slice::from_raw_parts(im, len),
        );
        let v: Vec<Complex64> = re
            .iter()
            .zip(im)
            .map(|(a, b)| Complex64::new(*a, *b))
            .collect();
        let f = GridFunction::from_values(g.grid.clone(), v).map_err(lib)?;
        *out = Box::into_raw(Box::new(ShGridFunction { f }));
        Ok(())
    })
}

/// # Safety
/// `f` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sh_gridfn_free(f: *mut ShGridFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// (a ∗ b) at the given node indices.
///
/// # Safety
/// `a` and `b` must be live function handles; `nodes` must be valid for `count` reads and
/// `re`, `im` for `count` writes.
#[no_mangle]
pub unsafe extern "C" fn sh_convolve_nodes(
    a: *const ShGridFunction,
    b: *const ShGridFunction,
    nodes: *const usize,
    count: usize,
    re: *mut f64,
    im: *mut f64,
) -> ShStatus {
    guard(|| {
        let (a, b) = (
            a.as_ref().ok_or_else(|| null("a"))?,
            b.as_ref().ok_or_else(|| null("b"))?,
        );
        if count == 0 {
            return Ok(());
        }
        if nodes.is_null() || re.is_null() || im.is_null() {
            return Err(null("nodes/re/im"));
        }
        let idx = slice::from_raw_parts(nodes, count);
        if let Some(bad) = idx.iter().find(|i| **i >= a.f.len()) {
            return Err(invalid(format!("node index {bad} out of range")));
        }
        let v = convolve_nodes(&a.f, &b.f, idx).map_err(lib)?;
        let (re, im) = (
            slice::from_raw_parts_mut(re, count),
            slice::from_raw_parts_mut(im, count),
        );
        for (i, z) in v.iter().enumerate() {
            re[i] = z.re;
            im[i] = z.im;
        }
        Ok(())
    })
}

/// Evolves a Gaussian density (centre, width) under H = Σ σ_a²/(2I_a) on an n³ grid of [−L, L]³.
///
/// # Safety
/// `inertia` and `center` must point to 3 readable doubles; `out` must be a valid pointer and the
/// result freed with [`sh_evolution_free`].
#[no_mangle]
pub unsafe extern "C" fn sh_poisson_evolve(
    inertia: *const f64,
    center: *const f64,
    width: f64,
    n: usize,
    half_width: f64,
    dt: f64,
    steps: usize,
    record_every: usize,
    out: *mut *mut ShEvolution,
) -> ShStatus {
    guard(|| {
        let i = read::<3>(inertia, "inertia")?;
        let c = read::<3>(center, "center")?;
        if out.is_null() {
            return Err(null("out"));
        }
        if i.iter().any(|x| !(*x > 0.0)) || !(width > 0.0) {
            return Err(invalid("inertia and width must be positive"));
        }
        let h = TopHamiltonian { inertia: i };
        let rho = GaussianBlob {
            center: Vec3::new(c[0], c[1], c[2]),
            width,
            amplitude: 1.0,
        };
        let ev = evolve_density(
            &h,
            &rho,
            CoalgebraGrid { n, half_width },
            dt,
            steps,
            record_every,
        )
        .map_err(lib)?;
        *out = Box::into_raw(Box::new(ShEvolution { ev }));
        Ok(())
    })
}

/// Number of recorded snapshots.
///
/// # Safety
/// `ev` must be a live evolution handle and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn sh_evolution_len(ev: *const ShEvolution, len: *mut usize) -> ShStatus {
    guard(|| {
        let e = ev.as_ref().ok_or_else(|| null("ev"))?;
        if len.is_null() {
            return Err(null("len"));
        }
        *len = e.ev.snapshots.len();
        Ok(())
    })
}

/// Snapshot `index` of an evolution.
///
/// # Safety
/// `ev` must be a live evolution handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sh_evolution_snapshot(
    ev: *const ShEvolution,
    index: usize,
    out: *mut ShSnapshot,
) -> ShStatus {
    guard(|| {
        let e = ev.as_ref().ok_or_else(|| null("ev"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s =
            e.ev.snapshots
                .get(index)
                .ok_or_else(|| invalid(format!("snapshot {index} out of range")))?;
        *out = ShSnapshot {
            t: s.t,
            energy: s.energy,
            casimir: s.casimir,
            norm: s.norm,
            pointwise_casimir_drift: s.pointwise_casimir_drift,
        };
        Ok(())
    })
}

/// # Safety
/// `ev` must be null or a handle from [`sh_poisson_evolve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sh_evolution_free(ev: *mut ShEvolution) {
    if !ev.is_null() {
        drop(Box::from_raw(ev));
    }
}
