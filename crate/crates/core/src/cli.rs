//! Command-line front end.
//!
//! Every subcommand produces one table. CSV output starts with `# key=value` metadata lines
//! followed by a header row; JSON output is `{schema_version, command, columns, rows, meta}`.
//! Failures print `{schema_version, error: {kind, module, message}}` on stderr and exit with
//! 1 (bad input) or 2 (numerical failure).

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::groupalgebra::{
    basis_element, convolve_nodes, idempotent_function, independent_multipole_count, node_subset,
    project_ideal, radial_profile, GridFunction, Interpolation,
};
use crate::haar::{build_grid, GroupKind, QuadratureGrid};
use crate::irreps::{
    gram_deviation, idempotent, peter_weyl_gram, top_spectrum, wigner_d, SpinLabel,
};
use crate::liealgebra::field_components;
use crate::quasiclassics::{
    asymptotic_character_errors, classical_delta_reconstruction, dirac_sequence_integral,
    epsilon_asymptotic, evolve_density, orbit_state, standard_pair, truncated_convolution_compare,
    truncation_grid, truncation_points, two_peak_deviation, Branch, CasimirForm, CoalgebraGrid,
    GaussianBlob, OrbitNormalization, TopHamiltonian,
};
use crate::rotations::{
    euler_to_quaternion, exp_su2, gibbs_compose, gibbs_from_quaternion, log_su2, project_so3,
    quaternion_from_gibbs, quaternion_to_euler, EulerAngles, GibbsVector, RotationVector,
    UnitQuaternion, Vec3,
};

pub const SCHEMA_VERSION: u32 = 1;
/// Environment variable overriding the default grid, as `NK,NTHETA,NPHI`.
pub const ENV_GRID: &str = "SPINHARM_GRID";
/// Environment variable overriding the default seed.
pub const ENV_SEED: &str = "SPINHARM_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CasimirArg {
    /// j(j+1)
    Jj1,
    /// (j+1/2)^2
    Half,
    /// j^2
    Jsq,
}

impl From<CasimirArg> for CasimirForm {
    fn from(c: CasimirArg) -> Self {
        match c {
            CasimirArg::Jj1 => CasimirForm::JJPlus1,
            CasimirArg::Half => CasimirForm::HalfShifted,
            CasimirArg::Jsq => CasimirForm::JSquared,
        }
    }
}

/// Resolved settings shared by all subcommands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub grid: (usize, usize, usize),
    pub tol: f64,
    pub hbar: f64,
    pub casimir: CasimirForm,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: (48, 32, 64),
            tol: 1e-10,
            hbar: 1.0,
            casimir: CasimirForm::HalfShifted,
            format: Format::Csv,
            out: None,
            seed: 20240601,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let (a, b, c) = self.grid;
        if a < 2 || b < 2 || c < 2 {
            return Err(Error::BadFlag {
                reason: format!("grid sizes must be >= 2, got {a}x{b}x{c}"),
            });
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::BadFlag {
                reason: format!("tol must be positive, got {}", self.tol),
            });
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::BadFlag {
                reason: format!("hbar must be positive, got {}", self.hbar),
            });
        }
        Ok(())
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |e: String| Error::BadFlag {
            reason: format!("{key}: {e}"),
        };
        match key {
            "grid" => self.grid = parse_grid(value).map_err(bad)?,
            "tol" => {
                self.tol = value
                    .parse()
                    .map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?
            }
            "hbar" => {
                self.hbar = value
                    .parse()
                    .map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?
            }
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|e: std::num::ParseIntError| bad(e.to_string()))?
            }
            "format" => self.format = Format::from_str(value, true).map_err(bad)?,
            "casimir" => self.casimir = CasimirArg::from_str(value, true).map_err(bad)?.into(),
            "out" => self.out = Some(PathBuf::from(value)),
            _ => {
                return Err(Error::BadFlag {
                    reason: format!("unknown config key `{key}`"),
                })
            }
        }
        Ok(())
    }

    /// Parses a `key=value` file; blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::BadFlag {
                reason: format!("config line {}: expected key=value", i + 1),
            })?;
            self.apply(k.trim(), v.trim())?;
        }
        Ok(())
    }

    fn grid_on(&self, group: GroupKind) -> Result<Arc<QuadratureGrid>> {
        let (a, b, c) = self.grid;
        Ok(Arc::new(build_grid(a, b, c, group)?))
    }
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize, usize), String> {
    let v: Vec<usize> = s
        .split([',', 'x'])
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("`{s}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match v.as_slice() {
        [a, b, c] => Ok((*a, *b, *c)),
        _ => Err(format!("`{s}`: expected three sizes NK,NTHETA,NPHI")),
    }
}

fn parse_floats(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}")))
        .collect()
}

fn parse_vec3(s: &str) -> std::result::Result<[f64; 3], String> {
    let v = parse_floats(s)?;
    v.try_into().map_err(|_| format!("`{s}`: expected x,y,z"))
}

fn parse_quat(s: &str) -> std::result::Result<[f64; 4], String> {
    let v = parse_floats(s)?;
    v.try_into()
        .map_err(|_| format!("`{s}`: expected xi0,xi1,xi2,xi3"))
}

#[derive(Parser, Debug)]
#[command(
    name = "spinharm",
    version,
    about = "Harmonic analysis on SU(2) and SO(3)"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized inputs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// key=value file (keys: grid, tol, hbar, seed, format, casimir, out).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    hbar: Option<f64>,
    /// Haar grid NK,NTHETA,NPHI (default 48,32,64 or $SPINHARM_GRID).
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<(usize, usize, usize)>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Stand-in for j(j+1) in flat limits.
    #[arg(long, global = true, value_enum)]
    casimir: Option<CasimirArg>,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
struct ElementArg {
    /// Rotation vector k·n.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    vector: Option<[f64; 3]>,
    /// Unit quaternion (normalized on input).
    #[arg(long, value_parser = parse_quat, allow_hyphen_values = true)]
    quat: Option<[f64; 4]>,
    /// Gibbs vector 2 tan(k/2) n.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    gibbs: Option<[f64; 3]>,
    /// z-y-z Euler angles phi,theta,psi.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    euler: Option<[f64; 3]>,
}

impl ElementArg {
    fn quaternion(&self) -> Result<UnitQuaternion> {
        if let Some(v) = self.vector {
            return Ok(exp_su2(&RotationVector::new(v[0], v[1], v[2])));
        }
        if let Some(q) = self.quat {
            return UnitQuaternion::try_new(q);
        }
        if let Some(g) = self.gibbs {
            return Ok(quaternion_from_gibbs(&GibbsVector::new(g[0], g[1], g[2])));
        }
        let e = self.euler.expect("clap group");
        Ok(euler_to_quaternion(&EulerAngles {
            phi: e[0],
            theta: e[1],
            psi: e[2],
        }))
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert one group element between parametrizations.
    ///
    /// Columns: form,c0,c1,c2,c3 (quaternion, vector, gibbs, euler + gimbal flag, matrix rows).
    Convert(ElementArg),
    /// Compose elements left to right; with --gibbs the Gibbs law is used directly.
    ///
    /// Columns: form,c0,c1,c2,c3 for the product.
    Compose {
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, conflicts_with_all = ["vector", "quat"])]
        gibbs: Vec<[f64; 3]>,
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, conflicts_with = "quat")]
        vector: Vec<[f64; 3]>,
        #[arg(long, value_parser = parse_quat, allow_hyphen_values = true)]
        quat: Vec<[f64; 4]>,
    },
    /// Wigner D matrix of spin j at one element.
    ///
    /// Columns: m,k,re,im.
    Dmatrix {
        #[arg(long)]
        j: f64,
        #[command(flatten)]
        element: ElementArg,
    },
    /// Idempotent eps(j)(k) with its two-peak asymptotic form on [0, 2pi].
    ///
    /// Columns: k,epsilon,asymptotic,near0,near2pi.
    Character {
        #[arg(long)]
        j: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Symmetric-top levels.
    ///
    /// Columns: energy,degeneracy,abs_k (semicolon separated).
    Spectrum {
        #[arg(long)]
        j: f64,
        #[arg(long = "I")]
        inertia_i: f64,
        #[arg(long = "K")]
        inertia_k: f64,
    },
    /// Haar quadrature checks on the configured grid.
    ///
    /// Columns: quantity,value,target,error.
    HaarCheck {
        #[arg(long, value_enum, default_value_t = GroupArg::Su2)]
        group: GroupArg,
        /// Largest 2j in the Peter-Weyl Gram matrix (SU(2) only).
        #[arg(long, default_value_t = 3)]
        two_j_max: u32,
    },
    /// eps(j1) * eps(j2) on a node subset, against delta(j1,j2) eps(j1).
    ///
    /// Columns: node,k,re,im,expected.
    Convolve {
        #[arg(long)]
        j1: f64,
        #[arg(long)]
        j2: f64,
        #[arg(long, default_value_t = 64)]
        points: usize,
        #[arg(long, value_enum, default_value_t = InterpArg::Cubic)]
        interp: InterpArg,
    },
    /// Radial profile f_jl and its ODE residual.
    ///
    /// Columns: k,f,ode_residual.
    Multipole {
        #[arg(long)]
        j: f64,
        #[arg(long)]
        l: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Also count independent Q{j}_lm on the configured grid.
        #[arg(long)]
        count: bool,
    },
    /// Project a seeded random band-limited function onto the ideal M(j).
    ///
    /// Columns: node,original,projected,expected (real parts), with errors in the metadata.
    Project {
        #[arg(long)]
        j: f64,
        /// Largest 2j in the random source.
        #[arg(long, default_value_t = 2)]
        two_j_max: u32,
        #[arg(long, default_value_t = 6)]
        terms: usize,
        #[arg(long, default_value_t = 32)]
        points: usize,
    },
    /// Asymptotic checks.
    ///
    /// dirac: n,f,integral,target,error. characters: j,mean_value,l1_per_dim.
    /// delta: J,value,target,error. two-peak: j,l,deviation. orbit: quantity,value.
    Asymptotics {
        #[arg(long, value_enum)]
        mode: AsymptoticMode,
        /// n values (dirac), j values (characters, two-peak) or J values (delta).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        l: usize,
        /// Orbit labels.
        #[arg(long, default_value_t = 1.0)]
        j: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        m: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        n: f64,
        #[arg(long, value_enum, default_value_t = NormArg::Derived)]
        normalization: NormArg,
    },
    /// Lie-Poisson evolution of a Gaussian density under a top Hamiltonian.
    ///
    /// Columns: t,energy,casimir,norm.
    PoissonEvolve {
        #[arg(long, value_parser = parse_vec3, default_value = "1,2,3")]
        inertia: [f64; 3],
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 2.8)]
        half_width: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 10)]
        record_every: usize,
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, default_value = "1,0.5,0.8")]
        center: [f64; 3],
        #[arg(long, default_value_t = 0.3)]
        width: f64,
    },
    /// SU(2) convolution of the standard pair against the flat convolution and its first-order correction.
    ///
    /// Columns: j_bar,j0,zeroth_error,first_error.
    TruncationCompare {
        #[arg(long, value_delimiter = ',', default_values_t = [8.0, 16.0])]
        j_bar: Vec<f64>,
        #[arg(long, default_value_t = 0.5)]
        dipole: f64,
        #[arg(long, default_value_t = 8)]
        points: usize,
        #[arg(long, default_value_t = 0.8)]
        radius: f64,
    },
    /// Invariant field and form components at a point.
    ///
    /// Columns: field,i,a,value.
    Fields {
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        vector: [f64; 3],
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GroupArg {
    Su2,
    So3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum InterpArg {
    Linear,
    Cubic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AsymptoticMode {
    Dirac,
    Characters,
    Delta,
    TwoPeak,
    Orbit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum NormArg {
    Derived,
    Printed,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Convert(_) => "convert",
            Command::Compose { .. } => "compose",
            Command::Dmatrix { .. } => "dmatrix",
            Command::Character { .. } => "character",
            Command::Spectrum { .. } => "spectrum",
            Command::HaarCheck { .. } => "haar-check",
            Command::Convolve { .. } => "convolve",
            Command::Multipole { .. } => "multipole",
            Command::Project { .. } => "project",
            Command::Asymptotics { .. } => "asymptotics",
            Command::PoissonEvolve { .. } => "poisson-evolve",
            Command::TruncationCompare { .. } => "truncation-compare",
            Command::Fields { .. } => "fields",
        }
    }

    fn module(&self) -> &'static str {
        match self {
            Command::Convert(_) | Command::Compose { .. } => "rotations",
            Command::Fields { .. } => "liealgebra",
            Command::HaarCheck { .. } => "haar",
            Command::Dmatrix { .. } | Command::Character { .. } | Command::Spectrum { .. } => {
                "irreps"
            }
            Command::Convolve { .. } | Command::Multipole { .. } | Command::Project { .. } => {
                "groupalgebra"
            }
            Command::Asymptotics { .. }
            | Command::PoissonEvolve { .. }
            | Command::TruncationCompare { .. } => "quasiclassics",
        }
    }
}

/// Output of one subcommand.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub schema_version: u32,
    pub command: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub meta: BTreeMap<String, Value>,
}

impl Table {
    fn new(command: &str, columns: &[&str]) -> Self {
        Table {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            meta: BTreeMap::new(),
        }
    }

    fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn meta(&mut self, key: &str, v: impl Into<Value>) {
        self.meta.insert(key.into(), v.into());
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# schema_version={}\n# command={}\n",
            self.schema_version, self.command
        );
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}={}\n", cell(v)));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.iter().map(cell).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes") + "\n"
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => {
            format!("\"{}\"", s.replace('"', "\"\""))
        }
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn num(x: f64) -> Value {
    json!(x)
}

fn spin(j: f64) -> Result<SpinLabel> {
    SpinLabel::from_j(j)
}

fn element_rows(t: &mut Table, q: &UnitQuaternion) {
    t.push(vec![
        "quaternion".into(),
        num(q.xi0),
        num(q.xi1),
        num(q.xi2),
        num(q.xi3),
    ]);
    let k = log_su2(q).vector.0;
    t.push(vec![
        "vector".into(),
        num(k.x),
        num(k.y),
        num(k.z),
        Value::Null,
    ]);
    match gibbs_from_quaternion(q) {
        Ok(g) => t.push(vec![
            "gibbs".into(),
            num(g.0.x),
            num(g.0.y),
            num(g.0.z),
            Value::Null,
        ]),
        Err(_) => t.push(vec![
            "gibbs".into(),
            Value::Null,
            Value::Null,
            Value::Null,
            Value::Null,
        ]),
    }
    let e = quaternion_to_euler(q);
    t.push(vec![
        "euler".into(),
        num(e.angles.phi),
        num(e.angles.theta),
        num(e.angles.psi),
        json!(e.gimbal),
    ]);
    let r = project_so3(q).0;
    for i in 0..3 {
        t.push(vec![
            format!("matrix_row{i}").into(),
            num(r[(i, 0)]),
            num(r[(i, 1)]),
            num(r[(i, 2)]),
            Value::Null,
        ]);
    }
}

const ELEMENT_COLUMNS: [&str; 5] = ["form", "c0", "c1", "c2", "c3"];

fn execute(cmd: &Command, cfg: &RunConfig) -> Result<Table> {
    let name = cmd.name();
    match cmd {
        Command::Convert(e) => {
            let mut t = Table::new(name, &ELEMENT_COLUMNS);
            element_rows(&mut t, &e.quaternion()?);
            Ok(t)
        }
        Command::Compose {
            gibbs,
            vector,
            quat,
        } => {
            let mut t = Table::new(name, &ELEMENT_COLUMNS);
            let q = if !gibbs.is_empty() {
                let gs: Vec<GibbsVector> = gibbs
                    .iter()
                    .map(|g| GibbsVector::new(g[0], g[1], g[2]))
                    .collect();
                let mut acc = gs[0];
                for g in &gs[1..] {
                    acc = gibbs_compose(&acc, g)?;
                }
                let oracle = gs
                    .iter()
                    .skip(1)
                    .fold(quaternion_from_gibbs(&gs[0]), |a, g| {
                        a * quaternion_from_gibbs(g)
                    });
                let qa = quaternion_from_gibbs(&acc);
                t.meta("law", "gibbs");
                t.meta("oracle_distance", qa.distance(&oracle));
                qa
            } else if !vector.is_empty() {
                vector.iter().fold(UnitQuaternion::IDENTITY, |a, v| {
                    a * exp_su2(&RotationVector::new(v[0], v[1], v[2]))
                })
            } else if !quat.is_empty() {
                let mut acc = UnitQuaternion::IDENTITY;
                for c in quat {
                    acc = acc * UnitQuaternion::try_new(*c)?;
                }
                acc
            } else {
                return Err(Error::BadFlag {
                    reason: "compose needs --gibbs, --vector or --quat".into(),
                });
            };
            element_rows(&mut t, &q);
            Ok(t)
        }
        Command::Dmatrix { j, element } => {
            let j = spin(*j)?;
            let d = wigner_d(j, &element.quaternion()?);
            let mut t = Table::new(name, &["m", "k", "re", "im"]);
            let labels = j.labels();
            for (a, m) in labels.iter().enumerate() {
                for (b, k) in labels.iter().enumerate() {
                    let z = d.matrix[(a, b)];
                    t.push(vec![num(*m), num(*k), num(z.re), num(z.im)]);
                }
            }
            let n = j.dim();
            let u = &d.matrix * d.matrix.adjoint() - nalgebra::DMatrix::<Complex64>::identity(n, n);
            t.meta("j", j.j());
            t.meta(
                "unitarity_defect",
                u.iter().map(|z| z.norm()).fold(0.0, f64::max),
            );
            Ok(t)
        }
        Command::Character { j, samples } => {
            let j = spin(*j)?;
            if *samples < 2 {
                return Err(Error::BadFlag {
                    reason: "samples must be >= 2".into(),
                });
            }
            let mut t = Table::new(name, &["k", "epsilon", "asymptotic", "near0", "near2pi"]);
            for i in 0..*samples {
                let k = TAU * i as f64 / (*samples - 1) as f64;
                t.push(vec![
                    num(k),
                    num(idempotent(j, k)),
                    num(epsilon_asymptotic(j, k, Branch::Both)),
                    num(epsilon_asymptotic(j, k, Branch::Near0)),
                    num(epsilon_asymptotic(j, k, Branch::Near2Pi)),
                ]);
            }
            t.meta("j", j.j());
            Ok(t)
        }
        Command::Spectrum {
            j,
            inertia_i,
            inertia_k,
        } => {
            let j = spin(*j)?;
            let levels = top_spectrum(j, *inertia_i, *inertia_k, cfg.hbar)?;
            let mut t = Table::new(name, &["energy", "degeneracy", "abs_k"]);
            for l in &levels {
                let ks: Vec<String> = l.abs_k.iter().map(|k| k.to_string()).collect();
                t.push(vec![
                    num(l.energy),
                    json!(l.degeneracy),
                    ks.join(";").into(),
                ]);
            }
            t.meta("j", j.j());
            t.meta("levels", levels.len());
            t.meta(
                "total_degeneracy",
                levels.iter().map(|l| l.degeneracy).sum::<usize>(),
            );
            Ok(t)
        }
        Command::HaarCheck { group, two_j_max } => {
            let g = match group {
                GroupArg::Su2 => GroupKind::SU2,
                GroupArg::So3 => GroupKind::SO3,
            };
            let grid = cfg.grid_on(g)?;
            let mut t = Table::new(name, &["quantity", "value", "target", "error"]);
            let ws = grid.weight_sum();
            t.push(vec![
                "normalized_volume".into(),
                num(ws),
                num(1.0),
                num((ws - 1.0).abs()),
            ]);
            let v = grid.unnormalized_volume();
            let target = g.volume();
            t.push(vec![
                "unnormalized_volume".into(),
                num(v),
                num(target),
                num((v - target).abs() / target),
            ]);
            if g == GroupKind::SU2 {
                let gram = peter_weyl_gram(*two_j_max, &grid);
                let (diag, off) = gram_deviation(&gram, *two_j_max);
                t.push(vec!["gram_diagonal".into(), num(diag), num(0.0), num(diag)]);
                t.push(vec![
                    "gram_off_diagonal".into(),
                    num(off),
                    num(0.0),
                    num(off),
                ]);
            }
            t.meta(
                "grid",
                format!("{}x{}x{}", cfg.grid.0, cfg.grid.1, cfg.grid.2),
            );
            Ok(t)
        }
        Command::Convolve {
            j1,
            j2,
            points,
            interp,
        } => {
            let (a, b) = (spin(*j1)?, spin(*j2)?);
            let grid = cfg.grid_on(GroupKind::SU2)?;
            let i = match interp {
                InterpArg::Linear => Interpolation::Linear,
                InterpArg::Cubic => Interpolation::Cubic,
            };
            let fa = idempotent_function(grid.clone(), a)
                .sampled()
                .with_interpolation(i);
            let fb = idempotent_function(grid.clone(), b)
                .sampled()
                .with_interpolation(i);
            let idx = node_subset(&grid, *points);
            let vals = convolve_nodes(&fa, &fb, &idx)?;
            let mut t = Table::new(name, &["node", "k", "re", "im", "expected"]);
            let mut worst: f64 = 0.0;
            for (n, z) in idx.iter().zip(&vals) {
                let k = grid.nodes[*n].k;
                let e = if a == b { idempotent(a, k) } else { 0.0 };
                worst = worst.max((z - e).norm());
                t.push(vec![json!(n), num(k), num(z.re), num(z.im), num(e)]);
            }
            t.meta("max_error", worst);
            Ok(t)
        }
        Command::Multipole {
            j,
            l,
            samples,
            count,
        } => {
            let j = spin(*j)?;
            let p = radial_profile(j, *l)?;
            if *samples < 2 {
                return Err(Error::BadFlag {
                    reason: "samples must be >= 2".into(),
                });
            }
            let mut t = Table::new(name, &["k", "f", "ode_residual"]);
            let (lo, hi) = (0.1, TAU - 0.1);
            for i in 0..*samples {
                let k = lo + (hi - lo) * i as f64 / (*samples - 1) as f64;
                t.push(vec![num(k), num(p.value(k)), num(p.ode_residual(k))]);
            }
            t.meta(
                "max_relative_residual",
                p.max_relative_residual(lo, hi, *samples),
            );
            if *count {
                let grid = cfg.grid_on(GroupKind::SU2)?;
                t.meta("independent_count", independent_multipole_count(j, &grid));
                t.meta("expected_count", j.dim() * j.dim());
            }
            Ok(t)
        }
        Command::Project {
            j,
            two_j_max,
            terms,
            points,
        } => {
            let target = spin(*j)?;
            let grid = cfg.grid_on(GroupKind::SU2)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut parts: Vec<(GridFunction, bool)> = Vec::new();
            for _ in 0..*terms {
                let s = SpinLabel::new(rng.gen_range(0..=*two_j_max));
                let labels = s.labels();
                let m = labels[rng.gen_range(0..labels.len())];
                let k = labels[rng.gen_range(0..labels.len())];
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                parts.push((basis_element(grid.clone(), s, m, k)?.scaled(c), s == target));
            }
            let zero = GridFunction::constant(grid.clone(), Complex64::new(0.0, 0.0));
            let mut f = zero.clone();
            let mut expected = zero;
            for (p, inside) in &parts {
                f = f.linear_combination(Complex64::new(1.0, 0.0), p, Complex64::new(1.0, 0.0))?;
                if *inside {
                    expected = expected.linear_combination(
                        Complex64::new(1.0, 0.0),
                        p,
                        Complex64::new(1.0, 0.0),
                    )?;
                }
            }
            let proj = project_ideal(&f, target);
            let idx = node_subset(&grid, *points);
            let mut t = Table::new(name, &["node", "original", "projected", "expected"]);
            let mut worst: f64 = 0.0;
            for n in idx {
                let q = grid.nodes[n].q;
                let (o, p, e) = (f.values[n], proj.eval(&q), expected.values[n]);
                worst = worst.max((p - e).norm());
                t.push(vec![json!(n), num(o.re), num(p.re), num(e.re)]);
            }
            t.meta("max_error", worst);
            t.meta("seed", cfg.seed);
            Ok(t)
        }
        Command::Asymptotics {
            mode,
            values,
            l,
            j,
            m,
            n,
            normalization,
        } => asymptotics(
            name,
            *mode,
            (!values.is_empty()).then_some(values.as_slice()),
            *l,
            (*j, *m, *n),
            *normalization,
            cfg,
        ),
        Command::PoissonEvolve {
            inertia,
            n,
            half_width,
            dt,
            steps,
            record_every,
            center,
            width,
        } => {
            let h = TopHamiltonian { inertia: *inertia };
            if inertia.iter().any(|x| !(*x > 0.0)) {
                return Err(Error::BadFlag {
                    reason: "inertia components must be positive".into(),
                });
            }
            let rho = GaussianBlob {
                center: Vec3::new(center[0], center[1], center[2]),
                width: *width,
                amplitude: 1.0,
            };
            let ev = evolve_density(
                &h,
                &rho,
                CoalgebraGrid {
                    n: *n,
                    half_width: *half_width,
                },
                *dt,
                *steps,
                *record_every,
            )?;
            let mut t = Table::new(name, &["t", "energy", "casimir", "norm"]);
            for s in &ev.snapshots {
                t.push(vec![num(s.t), num(s.energy), num(s.casimir), num(s.norm)]);
            }
            t.meta("energy_drift", ev.energy_drift());
            t.meta("casimir_drift", ev.casimir_drift());
            t.meta("norm_drift", ev.norm_drift());
            t.meta(
                "max_pointwise_casimir_drift",
                ev.max_pointwise_casimir_drift(),
            );
            Ok(t)
        }
        Command::TruncationCompare {
            j_bar,
            dipole,
            points,
            radius,
        } => {
            let pts = truncation_points(*points, *radius);
            let mut t = Table::new(name, &["j_bar", "j0", "zeroth_error", "first_error"]);
            for jb in j_bar {
                let (a, b) = standard_pair(*jb, *dipole)?;
                let grid = Arc::new(truncation_grid(a.j_max().max(b.j_max()))?);
                let r = truncated_convolution_compare(&a, &b, grid, &pts)?;
                t.push(vec![
                    num(*jb),
                    num(r.j0),
                    num(r.zeroth_error),
                    num(r.first_error),
                ]);
            }
            Ok(t)
        }
        Command::Fields { vector } => {
            let f = field_components(&RotationVector::new(vector[0], vector[1], vector[2]))?;
            let mut t = Table::new(name, &["field", "i", "a", "value"]);
            for (label, m) in [
                ("L", &f.l),
                ("R", &f.r),
                ("A", &f.a),
                ("Lform", &f.lform),
                ("Rform", &f.rform),
            ] {
                for i in 0..3 {
                    for a in 0..3 {
                        t.push(vec![label.into(), json!(i), json!(a), num(m[(i, a)])]);
                    }
                }
            }
            Ok(t)
        }
    }
}

fn asymptotics(
    name: &str,
    mode: AsymptoticMode,
    values: Option<&[f64]>,
    l: usize,
    (j, m, n): (f64, f64, f64),
    norm: NormArg,
    cfg: &RunConfig,
) -> Result<Table> {
    match mode {
        AsymptoticMode::Dirac => {
            let ns = values.unwrap_or(&[50.0, 100.0, 200.0, 400.0]);
            let tests: [(&str, fn(f64) -> f64); 3] = [
                ("gaussian", |k| (-k * k).exp()),
                ("cos", |k| k.cos() + 0.5),
                ("rational", |k| 1.0 / (1.0 + k * k)),
            ];
            let mut t = Table::new(name, &["n", "f", "integral", "target", "error"]);
            for (label, f) in tests {
                for nv in ns {
                    let i = dirac_sequence_integral(&f, positive_int(*nv)?, PI)?;
                    let target = PI * f(0.0);
                    t.push(vec![
                        num(*nv),
                        label.into(),
                        num(i),
                        num(target),
                        num((i - target).abs()),
                    ]);
                }
            }
            Ok(t)
        }
        AsymptoticMode::Characters => {
            let js = values.unwrap_or(&[5.0, 10.0, 20.0, 40.0]);
            let mut t = Table::new(name, &["j", "mean_value", "l1_per_dim"]);
            for jv in js {
                let e = asymptotic_character_errors(spin(*jv)?, 0.2, 5.0)?;
                t.push(vec![num(*jv), num(e.mean_value), num(e.l1_per_dim)]);
            }
            Ok(t)
        }
        AsymptoticMode::Delta => {
            let js = values.unwrap_or(&[10.0, 20.0, 30.0, 40.0]);
            let s = 0.25;
            let f = move |w: f64| (-w * w / (2.0 * s * s)).exp();
            let mut t = Table::new(name, &["J", "value", "target", "error"]);
            for jv in js {
                let v = classical_delta_reconstruction(*jv, &f, 8.0 * s)?;
                t.push(vec![num(*jv), num(v), num(1.0), num((v - 1.0).abs())]);
            }
            Ok(t)
        }
        AsymptoticMode::TwoPeak => {
            let js = values.unwrap_or(&[10.0, 20.0, 40.0]);
            let mut t = Table::new(name, &["j", "l", "deviation"]);
            for jv in js {
                t.push(vec![
                    num(*jv),
                    json!(l),
                    num(two_peak_deviation(spin(*jv)?, l, 2.0, 0.15)?),
                ]);
            }
            Ok(t)
        }
        AsymptoticMode::Orbit => {
            let mut o = orbit_state(spin(j)?, m, n, cfg.hbar, cfg.casimir)?;
            o.normalization = match norm {
                NormArg::Derived => OrbitNormalization::Derived,
                NormArg::Printed => OrbitNormalization::Printed,
            };
            let r = o.eigencheck();
            let mut t = Table::new(name, &["quantity", "value"]);
            for (k, v) in [
                ("support_radius", o.support_radius()),
                ("sigma3_level", o.sigma3_level()),
                ("normalization_factor", o.normalization_factor()),
                ("casimir_residual", r.casimir),
                ("sum_relation", r.sum_relation),
                ("difference_relation", r.difference_relation),
                ("bracket_relation", r.bracket_relation),
                ("bracket_relation_fd", r.bracket_relation_fd),
                ("normalization_residual", r.normalization),
            ] {
                t.push(vec![k.into(), num(v)]);
            }
            Ok(t)
        }
    }
}

fn positive_int(x: f64) -> Result<u32> {
    if x >= 1.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
        Ok(x as u32)
    } else {
        Err(Error::BadFlag {
            reason: format!("expected a positive integer, got {x}"),
        })
    }
}

fn resolve_config(g: &GlobalArgs, env: &dyn Fn(&str) -> Option<String>) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(v) = env(ENV_GRID) {
        cfg.apply("grid", &v)?;
    }
    if let Some(v) = env(ENV_SEED) {
        cfg.apply("seed", &v)?;
    }
    if let Some(p) = &g.config {
        let text = std::fs::read_to_string(p).map_err(|e| Error::Io {
            reason: format!("{}: {e}", p.display()),
        })?;
        cfg.apply_file(&text)?;
    }
    if let Some(v) = g.format {
        cfg.format = v;
    }
    if let Some(v) = &g.out {
        cfg.out = Some(v.clone());
    }
    if let Some(v) = g.seed {
        cfg.seed = v;
    }
    if let Some(v) = g.hbar {
        cfg.hbar = v;
    }
    if let Some(v) = g.grid {
        cfg.grid = v;
    }
    if let Some(v) = g.tol {
        cfg.tol = v;
    }
    if let Some(v) = g.casimir {
        cfg.casimir = v.into();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn error_payload(e: &Error, module: &str) -> String {
    json!({
        "schema_version": SCHEMA_VERSION,
        "error": { "kind": e.kind(), "module": module, "message": e.to_string() },
    })
    .to_string()
}

/// Exit code for an error: 2 for numerical failures, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        2
    } else {
        1
    }
}

fn write_output(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let io = |e: std::io::Error| Error::Io {
        reason: e.to_string(),
    };
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            reason: format!("{}: {e}", p.display()),
        }),
        None => out.write_all(text.as_bytes()).map_err(io),
    }
}

/// Runs the CLI with explicit streams and environment lookup.
pub fn run_with<I, T>(
    args: I,
    env: &dyn Fn(&str) -> Option<String>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::InvalidSubcommand => {
                    let what = e
                        .get(clap::error::ContextKind::InvalidSubcommand)
                        .map(|v| v.to_string())
                        .unwrap_or_default();
                    let er = Error::UnknownSubcommand { name: what };
                    let _ = writeln!(err, "{}", error_payload(&er, "cli"));
                    1
                }
                _ => {
                    let er = Error::BadFlag {
                        reason: e
                            .to_string()
                            .lines()
                            .next()
                            .unwrap_or("")
                            .trim_start_matches("error: ")
                            .to_string(),
                    };
                    let _ = writeln!(err, "{}", error_payload(&er, "cli"));
                    1
                }
            };
        }
    };
    let result = resolve_config(&cli.global, env)
        .map_err(|e| (e, "cli"))
        .and_then(|cfg| {
            execute(&cli.command, &cfg)
                .map(|t| (t, cfg))
                .map_err(|e| (e, cli.command.module()))
        })
        .and_then(|(t, cfg)| {
            let text = match cfg.format {
                Format::Csv => t.to_csv(),
                Format::Json => t.to_json(),
            };
            write_output(&text, cfg.out.as_deref(), out).map_err(|e| (e, "cli"))
        });
    match result {
        Ok(()) => 0,
        Err((e, module)) => {
            let _ = writeln!(err, "{}", error_payload(&e, module));
            exit_code(&e)
        }
    }
}

/// Runs the CLI against the process environment and standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env = |k: &str| std::env::var(k).ok();
    run_with(
        args,
        &env,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv: Vec<&str> = std::iter::once("spinharm")
            .chain(args.iter().copied())
            .collect();
        let code = run_with(argv, &|_| None, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("8,6,10"), Ok((8, 6, 10)));
        assert_eq!(parse_grid("8x6x10"), Ok((8, 6, 10)));
        assert!(parse_grid("8,6").is_err());
    }

    #[test]
    fn config_precedence() {
        let g = GlobalArgs {
            format: None,
            out: None,
            seed: Some(5),
            config: None,
            hbar: None,
            grid: None,
            tol: None,
            casimir: None,
        };
        let env = |k: &str| match k {
            ENV_GRID => Some("10,8,12".to_string()),
            ENV_SEED => Some("9".to_string()),
            _ => None,
        };
        let cfg = resolve_config(&g, &env).unwrap();
        assert_eq!(cfg.grid, (10, 8, 12));
        assert_eq!(cfg.seed, 5);
    }

    #[test]
    fn config_file_keys() {
        let mut c = RunConfig::default();
        c.apply_file("# comment\ngrid = 12,10,14\nhbar=0.5\nformat=json\ncasimir=jj1\n")
            .unwrap();
        assert_eq!(c.grid, (12, 10, 14));
        assert_eq!(c.hbar, 0.5);
        assert_eq!(c.format, Format::Json);
        assert_eq!(c.casimir, CasimirForm::JJPlus1);
        assert!(c.apply_file("nonsense").is_err());
        assert!(c.apply_file("colour=red").is_err());
        c.hbar = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn spectrum_spherical() {
        let (code, out, _) = call(&[
            "spectrum", "--j", "1", "--I", "1", "--K", "1", "--format", "json",
        ]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["rows"].as_array().unwrap().len(), 1);
        assert_eq!(v["rows"][0][1], json!(9));
        assert_eq!(v["schema_version"], json!(SCHEMA_VERSION));
    }

    #[test]
    fn gibbs_singular_exit_code() {
        let (code, out, err) = call(&["compose", "--gibbs", "0,0,2", "--gibbs", "0,0,2"]);
        assert_eq!(code, 2);
        assert!(out.is_empty());
        let v: Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["error"]["kind"], json!("GibbsSingularity"));
        assert_eq!(v["error"]["module"], json!("rotations"));
    }

    #[test]
    fn validation_exit_codes() {
        assert_eq!(call(&["frobnicate"]).0, 1);
        assert!(call(&["frobnicate"]).2.contains("UnknownSubcommand"));
        assert_eq!(call(&["character", "--j", "1.3"]).0, 1);
        assert!(call(&["character", "--j", "x"]).2.contains("BadFlag"));
        assert_eq!(call(&["convert"]).0, 1);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn character_csv() {
        let (code, out, _) = call(&["character", "--j", "3", "--samples", "5"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines[0], "k,epsilon,asymptotic,near0,near2pi");
        assert_eq!(lines.len(), 6);
        let first: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
        assert!((first[1] - 49.0).abs() < 1e-10);
    }

    #[test]
    fn convert_negative_components() {
        let (code, out, _) = call(&["convert", "--vector", "-0.3,0.2,-1.1"]);
        assert_eq!(code, 0);
        let row = out.lines().find(|l| l.starts_with("vector,")).unwrap();
        let v: Vec<f64> = row
            .split(',')
            .skip(1)
            .take(3)
            .map(|x| x.parse().unwrap())
            .collect();
        assert!((v[0] + 0.3).abs() < 1e-12 && (v[2] + 1.1).abs() < 1e-12);
    }
}
