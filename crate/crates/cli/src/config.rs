//! Experiment configuration: JSON parsing, per-command schema validation and
//! the typed parameter structs each command runs on.
//!
//! Validation walks the raw JSON against a static schema table so that every
//! error carries the dotted path of the offending value (`parameters.alpha`).
//! Only after validation succeeds is the object deserialized into the typed
//! structs below, whose serde defaults supply the optional fields.

use std::fmt;
use std::path::PathBuf;

use fracsl::forward::DriveSignal;
use fracsl::sl::{PotentialSpec, RobinPair};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Eigensolve,
    Forward,
    Kernel,
    WeylScan,
    Counting,
    RegionMap,
    Reconstruct,
    Distinguish,
    VerifyAll,
}

impl Command {
    pub const ALL: [&'static str; 9] = [
        "eigensolve",
        "forward",
        "kernel",
        "weyl-scan",
        "counting",
        "region-map",
        "reconstruct",
        "distinguish",
        "verify-all",
    ];

    pub fn as_str(self) -> &'static str {
        Self::ALL[self as usize]
    }

    pub fn parse(name: &str) -> Option<Self> {
        serde_json::from_value(Value::String(name.to_string())).ok()
    }

    fn schema(self) -> &'static [Field] {
        match self {
            Command::Eigensolve => EIGENSOLVE,
            Command::Forward => FORWARD,
            Command::Kernel => KERNEL,
            Command::WeylScan => WEYL_SCAN,
            Command::Counting => COUNTING,
            Command::RegionMap => REGION_MAP,
            Command::Reconstruct => RECONSTRUCT,
            Command::Distinguish => DISTINGUISH,
            Command::VerifyAll => VERIFY_ALL,
        }
    }
}

/// One validation failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemaError {
    /// Dotted location, e.g. `parameters.drive.t_end`; empty for the document root.
    pub path: String,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

#[derive(Clone, Copy)]
enum Bound {
    Open(f64),
    Closed(f64),
    None,
}

#[derive(Clone, Copy)]
enum Kind {
    Number(Bound, Bound),
    Integer(u64, u64),
    Bool,
    Text,
    Choice(&'static [&'static str]),
    Numbers { lo: Bound, hi: Bound, min_len: usize },
    Object(&'static [Field]),
    /// Object checked later against the command's own schema.
    AnyObject,
    /// Object whose `kind` member selects one of several field lists.
    Tagged(&'static [(&'static str, &'static [Field])]),
}

#[derive(Clone, Copy)]
struct Field {
    name: &'static str,
    kind: Kind,
    required: bool,
}

const fn req(name: &'static str, kind: Kind) -> Field {
    Field { name, kind, required: true }
}

const fn opt(name: &'static str, kind: Kind) -> Field {
    Field { name, kind, required: false }
}

const NONNEG: Kind = Kind::Number(Bound::Closed(0.0), Bound::None);
const POSITIVE: Kind = Kind::Number(Bound::Open(0.0), Bound::None);
const NONPOS: Kind = Kind::Number(Bound::None, Bound::Closed(0.0));
const ANY_NUMBER: Kind = Kind::Number(Bound::None, Bound::None);
const UNIT_CLOSED: Kind = Kind::Number(Bound::Closed(0.0), Bound::Closed(1.0));
const UNIT_OPEN: Kind = Kind::Number(Bound::Open(0.0), Bound::Open(1.0));
const ALPHA: Kind = Kind::Number(Bound::Open(0.0), Bound::Closed(1.0));
const GRID: Kind = Kind::Integer(16, 1 << 16);

const POTENTIAL: Kind = Kind::Tagged(&[
    ("zero", &[opt("grid", GRID)]),
    ("constant", &[req("value", NONPOS), opt("grid", GRID)]),
    (
        "polynomial",
        &[req("coeffs", Kind::Numbers { lo: Bound::None, hi: Bound::None, min_len: 1 }), opt("grid", GRID)],
    ),
    ("bump", &[req("amplitude", NONNEG), req("d", UNIT_OPEN), opt("offset", NONPOS), opt("grid", GRID)]),
    ("samples", &[req("values", Kind::Numbers { lo: Bound::None, hi: Bound::Closed(0.0), min_len: 2 })]),
]);

const STEPS: Kind = Kind::Integer(1, 1 << 20);

const DRIVE: Kind = Kind::Tagged(&[
    ("ramp", &[opt("t_end", POSITIVE), opt("steps", STEPS)]),
    ("sine", &[opt("t_end", POSITIVE), opt("steps", STEPS), req("omega", POSITIVE)]),
    ("saturating", &[opt("t_end", POSITIVE), opt("steps", STEPS), req("rate", POSITIVE)]),
    ("samples", &[req("t_end", POSITIVE), req("values", Kind::Numbers { lo: Bound::None, hi: Bound::None, min_len: 2 })]),
]);

const FD: Kind = Kind::Object(&[opt("nx", Kind::Integer(32, 1 << 14)), opt("nt", Kind::Integer(32, 1 << 16))]);

const CERTIFICATE: Kind = Kind::Object(&[req("a", NONNEG), req("b", ANY_NUMBER)]);

const EIGENSOLVE: &[Field] = &[
    opt("potential", POTENTIAL),
    opt("h", NONNEG),
    opt("big_h", NONNEG),
    opt("n_max", Kind::Integer(0, 4000)),
    opt("x0", UNIT_OPEN),
];

const FORWARD: &[Field] = &[
    req("alpha", ALPHA),
    opt("potential", POTENTIAL),
    opt("h", NONNEG),
    opt("big_h", NONNEG),
    opt("drive", DRIVE),
    opt("x_points", Kind::Numbers { lo: Bound::Closed(0.0), hi: Bound::Closed(1.0), min_len: 1 }),
    opt("method", Kind::Choice(&["spectral", "fd", "both"])),
    opt("n_modes", Kind::Integer(1, 2000)),
    opt("fd", FD),
    opt("t_steps", Kind::Integer(1, 1 << 16)),
    opt("cross_tolerance", POSITIVE),
];

const KERNEL: &[Field] = &[
    req("alpha", ALPHA),
    opt("potential", POTENTIAL),
    opt("h", NONNEG),
    opt("big_h", NONNEG),
    opt("x", UNIT_CLOSED),
    opt("n_modes", Kind::Integer(1, 2000)),
    opt("t_end", POSITIVE),
    opt("t_steps", Kind::Integer(1, 1 << 16)),
    opt("drive", DRIVE),
    opt("duhamel_tolerance", POSITIVE),
];

const WEYL_SCAN: &[Field] = &[
    opt("potential", POTENTIAL),
    opt("h", NONNEG),
    opt("x", Kind::Number(Bound::Open(0.0), Bound::Closed(1.0))),
    opt("direction", Kind::Choice(&["imaginary", "sector"])),
    opt("angle", Kind::Number(Bound::Open(0.0), Bound::Open(std::f64::consts::PI))),
    opt("magnitude_min", POSITIVE),
    opt("magnitude_max", POSITIVE),
    opt("count", Kind::Integer(3, 10_000)),
    opt("expected_exponent", ANY_NUMBER),
    opt("exponent_tolerance", POSITIVE),
];

const COUNTING: &[Field] = &[
    opt("potential", POTENTIAL),
    opt("h", NONNEG),
    opt("big_h", NONNEG),
    opt("n_max", Kind::Integer(20, 4000)),
    req("x0", UNIT_CLOSED),
    opt("tau", Kind::Number(Bound::Open(0.0), Bound::Open(1.0))),
    opt("s_points", Kind::Integer(4, 10_000)),
];

const REGION_MAP: &[Field] = &[opt("resolution", Kind::Integer(10, 2000)), opt("certificate", CERTIFICATE)];

const RECONSTRUCT: &[Field] = &[
    opt("basis_dim", Kind::Integer(1, 16)),
    opt("gamma", NONNEG),
    opt("noise_level", Kind::Number(Bound::Closed(0.0), Bound::Open(1.0))),
    opt("max_iter", Kind::Integer(1, 100_000)),
    opt("project_q", Kind::Bool),
    opt("rel_l2_threshold", POSITIVE),
    opt("h_threshold", POSITIVE),
];

const DISTINGUISH: &[Field] = &[
    opt("pairs", Kind::Integer(1, 1000)),
    opt("amplitude", POSITIVE),
    opt("floor_factor", POSITIVE),
];

const VERIFY_ALL: &[Field] = &[opt("n_max", Kind::Integer(50, 4000))];

const TOP: &[Field] = &[
    req("command", Kind::Choice(&Command::ALL)),
    req("parameters", Kind::AnyObject),
    opt("output_dir", Kind::Text),
    opt("seed", Kind::Integer(0, u64::MAX)),
];

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn describe(b: Bound, lower: bool) -> String {
    match (b, lower) {
        (Bound::Open(v), true) => format!("> {v}"),
        (Bound::Closed(v), true) => format!(">= {v}"),
        (Bound::Open(v), false) => format!("< {v}"),
        (Bound::Closed(v), false) => format!("<= {v}"),
        (Bound::None, _) => String::new(),
    }
}

fn in_bounds(v: f64, lo: Bound, hi: Bound) -> bool {
    let lo_ok = match lo {
        Bound::Open(b) => v > b,
        Bound::Closed(b) => v >= b,
        Bound::None => true,
    };
    let hi_ok = match hi {
        Bound::Open(b) => v < b,
        Bound::Closed(b) => v <= b,
        Bound::None => true,
    };
    lo_ok && hi_ok && v.is_finite()
}

fn range_message(v: f64, lo: Bound, hi: Bound) -> String {
    let parts: Vec<String> = [describe(lo, true), describe(hi, false)].into_iter().filter(|s| !s.is_empty()).collect();
    format!("value {v} out of range (must be {})", parts.join(" and "))
}

fn check_value(value: &Value, kind: Kind, path: &str, errors: &mut Vec<SchemaError>) {
    let mut fail = |message: String| errors.push(SchemaError { path: path.to_string(), message });
    match kind {
        Kind::Number(lo, hi) => match value.as_f64() {
            Some(v) if in_bounds(v, lo, hi) => {}
            Some(v) => fail(range_message(v, lo, hi)),
            None => fail("expected a number".into()),
        },
        Kind::Integer(lo, hi) => match value.as_u64() {
            Some(v) if (lo..=hi).contains(&v) => {}
            Some(v) => fail(format!("value {v} out of range (must be in {lo}..={hi})")),
            None => fail("expected a nonnegative integer".into()),
        },
        Kind::Bool => {
            if !value.is_boolean() {
                fail("expected true or false".into());
            }
        }
        Kind::Text => {
            if !value.is_string() {
                fail("expected a string".into());
            }
        }
        Kind::Choice(options) => match value.as_str() {
            Some(s) if options.contains(&s) => {}
            _ => fail(format!("expected one of {}", options.join(", "))),
        },
        Kind::Numbers { lo, hi, min_len } => match value.as_array() {
            Some(items) => {
                if items.len() < min_len {
                    fail(format!("expected at least {min_len} entries, found {}", items.len()));
                }
                for (i, item) in items.iter().enumerate() {
                    check_value(item, Kind::Number(lo, hi), &format!("{path}[{i}]"), errors);
                }
            }
            None => fail("expected an array of numbers".into()),
        },
        Kind::Object(fields) => check_object(value, fields, path, errors),
        Kind::AnyObject => {
            if !value.is_object() {
                fail("expected an object".into());
            }
        }
        Kind::Tagged(variants) => {
            let Some(obj) = value.as_object() else {
                fail("expected an object".into());
                return;
            };
            let names: Vec<&str> = variants.iter().map(|v| v.0).collect();
            let kind_path = join(path, "kind");
            match obj.get("kind").and_then(Value::as_str) {
                Some(tag) => match variants.iter().find(|v| v.0 == tag) {
                    Some((_, fields)) => {
                        let mut rest = obj.clone();
                        rest.remove("kind");
                        check_object(&Value::Object(rest), fields, path, errors);
                    }
                    None => errors.push(SchemaError {
                        path: kind_path,
                        message: format!("expected one of {}", names.join(", ")),
                    }),
                },
                None => errors.push(SchemaError {
                    path: kind_path,
                    message: format!("missing required key (one of {})", names.join(", ")),
                }),
            }
        }
    }
}

fn check_object(value: &Value, fields: &[Field], path: &str, errors: &mut Vec<SchemaError>) {
    let Some(obj) = value.as_object() else {
        errors.push(SchemaError { path: path.to_string(), message: "expected an object".into() });
        return;
    };
    for field in fields {
        let here = join(path, field.name);
        match obj.get(field.name) {
            Some(v) => check_value(v, field.kind, &here, errors),
            None if field.required => errors.push(SchemaError { path: here, message: "missing required key".into() }),
            None => {}
        }
    }
    for key in obj.keys() {
        if !fields.iter().any(|f| f.name == key) {
            errors.push(SchemaError { path: join(path, key), message: "unknown key".into() });
        }
    }
}

fn cross_checks(command: Command, params: &Value, errors: &mut Vec<SchemaError>) {
    let num = |key: &str| params.get(key).and_then(Value::as_f64);
    if command == Command::WeylScan {
        if let (Some(lo), Some(hi)) = (num("magnitude_min"), num("magnitude_max")) {
            if lo >= hi {
                errors.push(SchemaError {
                    path: "parameters.magnitude_max".into(),
                    message: format!("must exceed magnitude_min = {lo}"),
                });
            }
        }
    }
}

/// Schema errors of a configuration document; empty iff it is valid.
pub fn validate(config_text: &str) -> Vec<SchemaError> {
    let root: Value = match serde_json::from_str(config_text) {
        Ok(v) => v,
        Err(e) => return vec![SchemaError { path: String::new(), message: format!("invalid JSON: {e}") }],
    };
    let mut errors = Vec::new();
    check_object(&root, TOP, "", &mut errors);
    let command = root.get("command").and_then(Value::as_str).and_then(Command::parse);
    if let (Some(cmd), Some(params @ Value::Object(_))) = (command, root.get("parameters")) {
        check_object(params, cmd.schema(), "parameters", &mut errors);
        cross_checks(cmd, params, &mut errors);
    }
    errors
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialConfig {
    Zero {
        #[serde(default = "default_grid")]
        grid: usize,
    },
    Constant {
        value: f64,
        #[serde(default = "default_grid")]
        grid: usize,
    },
    /// `q(x) = sum_k coeffs[k] x^k`.
    Polynomial {
        coeffs: Vec<f64>,
        #[serde(default = "default_grid")]
        grid: usize,
    },
    /// `q(x) = -amplitude (1 - x/d)^2` on `[0, d)`, plus `offset` everywhere.
    Bump {
        amplitude: f64,
        d: f64,
        #[serde(default)]
        offset: f64,
        #[serde(default = "default_grid")]
        grid: usize,
    },
    Samples {
        values: Vec<f64>,
    },
}

fn default_grid() -> usize {
    512
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig::Zero { grid: default_grid() }
    }
}

impl PotentialConfig {
    pub fn build(&self) -> Result<PotentialSpec, fracsl::sl::SlError> {
        match self {
            PotentialConfig::Zero { grid } => Ok(PotentialSpec::zero(*grid)),
            PotentialConfig::Constant { value, grid } => PotentialSpec::constant(*grid, *value),
            PotentialConfig::Polynomial { coeffs, grid } => {
                PotentialSpec::from_fn(*grid, |x| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c))
            }
            PotentialConfig::Bump { amplitude, d, offset, grid } => PotentialSpec::from_fn(*grid, |x| {
                let bump = if x < *d { -amplitude * (1.0 - x / d).powi(2) } else { 0.0 };
                bump + offset
            }),
            PotentialConfig::Samples { values } => PotentialSpec::from_samples(values.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DriveConfig {
    /// `eta(t) = t`.
    Ramp {
        #[serde(default = "default_t_end")]
        t_end: f64,
        #[serde(default = "default_steps")]
        steps: usize,
    },
    /// `eta(t) = sin(omega t)`.
    Sine {
        #[serde(default = "default_t_end")]
        t_end: f64,
        #[serde(default = "default_steps")]
        steps: usize,
        omega: f64,
    },
    /// `eta(t) = 1 - exp(-rate t)`.
    Saturating {
        #[serde(default = "default_t_end")]
        t_end: f64,
        #[serde(default = "default_steps")]
        steps: usize,
        rate: f64,
    },
    /// Values on a uniform grid over `[0, t_end]`.
    Samples { t_end: f64, values: Vec<f64> },
}

fn default_t_end() -> f64 {
    1.0
}

fn default_steps() -> usize {
    200
}

impl Default for DriveConfig {
    fn default() -> Self {
        DriveConfig::Ramp { t_end: default_t_end(), steps: default_steps() }
    }
}

impl DriveConfig {
    pub fn build(&self) -> Result<DriveSignal, fracsl::forward::ForwardError> {
        match self {
            DriveConfig::Ramp { t_end, steps } => DriveSignal::uniform(*t_end, *steps, |t| t, "t"),
            DriveConfig::Sine { t_end, steps, omega } => {
                DriveSignal::uniform(*t_end, *steps, |t| (omega * t).sin(), format!("sin({omega} t)"))
            }
            DriveConfig::Saturating { t_end, steps, rate } => {
                DriveSignal::uniform(*t_end, *steps, |t| 1.0 - (-rate * t).exp(), format!("1 - exp(-{rate} t)"))
            }
            DriveConfig::Samples { t_end, values } => {
                let n = values.len() - 1;
                let grid = (0..=n).map(|k| t_end * k as f64 / n as f64).collect();
                DriveSignal::new(grid, values.clone(), "samples")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdConfig {
    #[serde(default = "default_nx")]
    pub nx: usize,
    #[serde(default = "default_nt")]
    pub nt: usize,
}

fn default_nx() -> usize {
    256
}

fn default_nt() -> usize {
    512
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { nx: default_nx(), nt: default_nt() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ForwardMethod {
    Spectral,
    Fd,
    #[default]
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Imaginary,
    Sector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigensolveParams {
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub h: f64,
    #[serde(default)]
    pub big_h: f64,
    #[serde(default = "twenty")]
    pub n_max: usize,
    pub x0: Option<f64>,
}

fn twenty() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardParams {
    pub alpha: f64,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub h: f64,
    #[serde(default)]
    pub big_h: f64,
    #[serde(default)]
    pub drive: DriveConfig,
    #[serde(default = "default_x_points")]
    pub x_points: Vec<f64>,
    #[serde(default)]
    pub method: ForwardMethod,
    #[serde(default = "default_modes")]
    pub n_modes: usize,
    #[serde(default)]
    pub fd: FdConfig,
    #[serde(default = "default_t_steps")]
    pub t_steps: usize,
    #[serde(default = "default_cross_tolerance")]
    pub cross_tolerance: f64,
}

fn default_x_points() -> Vec<f64> {
    vec![0.0, 0.5, 1.0]
}

fn default_modes() -> usize {
    64
}

fn default_t_steps() -> usize {
    64
}

fn default_cross_tolerance() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelParams {
    pub alpha: f64,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub h: f64,
    #[serde(default)]
    pub big_h: f64,
    #[serde(default = "half")]
    pub x: f64,
    #[serde(default = "default_modes")]
    pub n_modes: usize,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_t_steps")]
    pub t_steps: usize,
    /// When present, the Duhamel identity is checked against this drive.
    pub drive: Option<DriveConfig>,
    #[serde(default = "default_duhamel_tolerance")]
    pub duhamel_tolerance: f64,
}

fn half() -> f64 {
    0.5
}

fn default_duhamel_tolerance() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeylScanParams {
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub h: f64,
    #[serde(default = "half")]
    pub x: f64,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default = "quarter_pi")]
    pub angle: f64,
    #[serde(default = "default_magnitude_min")]
    pub magnitude_min: f64,
    #[serde(default = "default_magnitude_max")]
    pub magnitude_max: f64,
    #[serde(default = "default_scan_count")]
    pub count: usize,
    #[serde(default = "half")]
    pub expected_exponent: f64,
    #[serde(default = "default_exponent_tolerance")]
    pub exponent_tolerance: f64,
}

fn quarter_pi() -> f64 {
    std::f64::consts::FRAC_PI_4
}

fn default_magnitude_min() -> f64 {
    100.0
}

fn default_magnitude_max() -> f64 {
    1500.0
}

fn default_scan_count() -> usize {
    12
}

fn default_exponent_tolerance() -> f64 {
    0.02
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountingParams {
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub h: f64,
    #[serde(default)]
    pub big_h: f64,
    #[serde(default = "default_counting_modes")]
    pub n_max: usize,
    pub x0: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_s_points")]
    pub s_points: usize,
}

fn default_counting_modes() -> usize {
    200
}

fn default_tau() -> f64 {
    fracsl::uniqueness::DEFAULT_TAU
}

fn default_s_points() -> usize {
    40
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateConfig {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionMapParams {
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    pub certificate: Option<CertificateConfig>,
}

fn default_resolution() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructParams {
    #[serde(default = "default_basis")]
    pub basis_dim: usize,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub noise_level: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub project_q: bool,
    #[serde(default = "default_rel_l2_threshold")]
    pub rel_l2_threshold: f64,
    #[serde(default = "default_h_threshold")]
    pub h_threshold: f64,
}

fn default_basis() -> usize {
    8
}

fn default_gamma() -> f64 {
    1e-10
}

fn default_max_iter() -> usize {
    200
}

fn default_rel_l2_threshold() -> f64 {
    0.05
}

fn default_h_threshold() -> f64 {
    0.02
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistinguishParams {
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    /// Upper bound of the random bump coefficients.
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "ten")]
    pub floor_factor: f64,
}

fn default_pairs() -> usize {
    20
}

fn one() -> f64 {
    1.0
}

fn ten() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyAllParams {
    #[serde(default = "fifty")]
    pub n_max: usize,
}

fn fifty() -> usize {
    50
}

/// Typed parameters, one variant per command.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Parameters {
    Eigensolve(EigensolveParams),
    Forward(ForwardParams),
    Kernel(KernelParams),
    WeylScan(WeylScanParams),
    Counting(CountingParams),
    RegionMap(RegionMapParams),
    Reconstruct(ReconstructParams),
    Distinguish(DistinguishParams),
    VerifyAll(VerifyAllParams),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub parameters: Parameters,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
}

#[derive(Deserialize)]
struct RawConfig {
    command: Command,
    parameters: Value,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    seed: u64,
}

impl ExperimentConfig {
    /// Validates and parses a configuration document.
    pub fn parse(config_text: &str) -> Result<Self, Vec<SchemaError>> {
        let errors = validate(config_text);
        if !errors.is_empty() {
            return Err(errors);
        }
        let wrap = |e: serde_json::Error| vec![SchemaError { path: "parameters".into(), message: e.to_string() }];
        let raw: RawConfig = serde_json::from_str(config_text)
            .map_err(|e| vec![SchemaError { path: String::new(), message: e.to_string() }])?;
        let p = raw.parameters;
        let parameters = match raw.command {
            Command::Eigensolve => Parameters::Eigensolve(serde_json::from_value(p).map_err(wrap)?),
            Command::Forward => Parameters::Forward(serde_json::from_value(p).map_err(wrap)?),
            Command::Kernel => Parameters::Kernel(serde_json::from_value(p).map_err(wrap)?),
            Command::WeylScan => Parameters::WeylScan(serde_json::from_value(p).map_err(wrap)?),
            Command::Counting => Parameters::Counting(serde_json::from_value(p).map_err(wrap)?),
            Command::RegionMap => Parameters::RegionMap(serde_json::from_value(p).map_err(wrap)?),
            Command::Reconstruct => Parameters::Reconstruct(serde_json::from_value(p).map_err(wrap)?),
            Command::Distinguish => Parameters::Distinguish(serde_json::from_value(p).map_err(wrap)?),
            Command::VerifyAll => Parameters::VerifyAll(serde_json::from_value(p).map_err(wrap)?),
        };
        Ok(Self { command: raw.command, parameters, output_dir: raw.output_dir, seed: raw.seed })
    }

    /// Canonical JSON of the fully defaulted configuration, excluding the
    /// output directory so that moving a run does not change its hash.
    pub fn canonical_json(&self) -> String {
        #[derive(Serialize)]
        struct Canon<'a> {
            command: Command,
            parameters: &'a Parameters,
            seed: u64,
        }
        serde_json::to_string(&Canon { command: self.command, parameters: &self.parameters, seed: self.seed })
            .expect("configuration serializes")
    }
}

/// Robin pair from config values already range-checked by the schema.
pub(crate) fn robin(h: f64, big_h: f64) -> Result<RobinPair, fracsl::sl::SlError> {
    RobinPair::new(h, big_h)
}
