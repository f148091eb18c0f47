//! Scenario files for batch experiments.
//!
//! A scenario is a TOML document with a handful of sections:
//!
//! ```toml
//! experiment = "gain_profile"      # gain_profile | rates | energy_efficiency
//! output = "fig2a.csv"             # relative to the output directory
//! strategies = ["narrowband"]      # wideband | narrowband | upper_bound
//! distance = "exact"               # exact | fresnel (channel model)
//!
//! [panel]
//! n_x = 80
//! n_y = 80
//! element = "half_wavelength"      # or l_x = ..., l_y = ... in metres
//! indexing = "symmetric"           # symmetric | paper_literal
//!
//! [tx]                             # spherical: r, theta|theta_deg, phi|phi_deg
//! r = 1.0
//! theta_deg = 60.0
//! phi_deg = 36.0
//!
//! [rx]                             # or cartesian: x, y, z (metres)
//! x = 0.8
//! y = 5.0
//! z = 0.2
//!
//! [rf]
//! f_c_hz = 300e9
//! bandwidth_hz = 20e9
//! subcarriers = 128
//! p_t_dbm = 10.0
//! g_dbi = 20.0                     # or g_t_dbi and g_r_dbi
//! noise_density_dbm_hz = -174.0
//!
//! [absorption]                     # optional, defaults to model = "zero"
//! model = "constant"               # zero | constant | table
//! kappa_per_m = 0.01               # constant only
//! table = "kappa.csv"              # table only, relative to the scenario file
//!
//! [sweep]                          # optional
//! parameter = "rx.y"
//! start = 1.0
//! stop = 10.0
//! steps = 10
//!
//! [mimo]                           # energy_efficiency only
//! n_t = 100
//! n_r = 100
//! alpha = 2.0
//! p_ps_w = 0.042
//! p_pa_w = 0.060
//! ```
//!
//! [`validate_file`] reports every problem it finds; [`run_scenario`] refuses
//! to start unless validation is clean.

mod run;

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::beamfocus::Strategy;
use crate::channel::{AbsorptionModel, AbsorptionTable, RfConfig};
use crate::geometry::{CartesianPoint, DistanceMode, Indexing, SphericalPoint, SPEED_OF_LIGHT};

pub use run::{run_plan, run_scenario, Cell, RunError, RunOptions, RunOutcome, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

/// Sweepable parameters, `section.key`.
pub const SWEEP_PARAMETERS: &[&str] = &[
    "tx.r",
    "tx.theta",
    "tx.theta_deg",
    "tx.phi",
    "tx.phi_deg",
    "tx.x",
    "tx.y",
    "tx.z",
    "rx.r",
    "rx.theta",
    "rx.theta_deg",
    "rx.phi",
    "rx.phi_deg",
    "rx.x",
    "rx.y",
    "rx.z",
    "rf.f_c_hz",
    "rf.bandwidth_hz",
    "rf.p_t_dbm",
    "rf.noise_density_dbm_hz",
    "absorption.kappa_per_m",
    "mimo.alpha",
];

/// One problem found in a scenario file.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    /// 1-based line of the offending key, when it appears in the file.
    pub line: Option<usize>,
    /// Dotted key path, e.g. `panel.n_x`.
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

// Raw file layout. Everything is optional so that missing fields become
// diagnostics rather than parse failures.

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub experiment: Option<String>,
    pub output: Option<String>,
    pub strategies: Option<Vec<String>>,
    pub distance: Option<String>,
    pub panel: Option<PanelSection>,
    pub tx: Option<EndpointSection>,
    pub rx: Option<EndpointSection>,
    pub rf: Option<RfSection>,
    pub absorption: Option<AbsorptionSection>,
    pub sweep: Option<SweepSection>,
    pub mimo: Option<MimoSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelSection {
    pub n_x: Option<i64>,
    pub n_y: Option<i64>,
    pub element: Option<String>,
    pub l_x: Option<f64>,
    pub l_y: Option<f64>,
    pub indexing: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointSection {
    pub r: Option<f64>,
    pub theta: Option<f64>,
    pub theta_deg: Option<f64>,
    pub phi: Option<f64>,
    pub phi_deg: Option<f64>,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub z: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RfSection {
    pub f_c_hz: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    pub subcarriers: Option<i64>,
    pub p_t_dbm: Option<f64>,
    pub g_dbi: Option<f64>,
    pub g_t_dbi: Option<f64>,
    pub g_r_dbi: Option<f64>,
    pub noise_density_dbm_hz: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbsorptionSection {
    pub model: Option<String>,
    pub kappa_per_m: Option<f64>,
    pub table: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: Option<String>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub steps: Option<i64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MimoSection {
    pub n_t: Option<i64>,
    pub n_r: Option<i64>,
    pub alpha: Option<f64>,
    pub p_ps_w: Option<f64>,
    pub p_pa_w: Option<f64>,
}

// Resolved scenario.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    /// Per-subcarrier normalized gains: discrete exact, discrete Fresnel,
    /// holographic, and one column per strategy.
    GainProfile,
    /// Achievable rate per strategy.
    Rates,
    /// Direct MIMO vs surface-aided link at the break-even surface size.
    EnergyEfficiency,
}

impl Experiment {
    const NAMES: [(&'static str, Experiment); 3] = [
        ("gain_profile", Experiment::GainProfile),
        ("rates", Experiment::Rates),
        ("energy_efficiency", Experiment::EnergyEfficiency),
    ];

    pub fn name(&self) -> &'static str {
        Self::NAMES.iter().find(|(_, e)| e == self).map(|(n, _)| *n).unwrap_or("?")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElementSize {
    HalfWavelength,
    Fixed { l_x: f64, l_y: f64 },
}

impl ElementSize {
    pub fn dims(&self, f_c: f64) -> (f64, f64) {
        match *self {
            ElementSize::HalfWavelength => {
                let half = SPEED_OF_LIGHT / f_c / 2.0;
                (half, half)
            }
            ElementSize::Fixed { l_x, l_y } => (l_x, l_y),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelSpec {
    /// Absent when the experiment derives the element count.
    pub counts: Option<(usize, usize)>,
    pub element: ElementSize,
    pub indexing: Indexing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MimoSpec {
    pub n_t: usize,
    pub n_r: usize,
    pub alpha: f64,
    pub p_ps: f64,
    pub p_pa: f64,
}

/// A fully validated parameter set for one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub experiment: Experiment,
    pub strategies: Vec<Strategy>,
    pub distance: DistanceMode,
    pub panel: PanelSpec,
    pub tx: CartesianPoint,
    pub rx: CartesianPoint,
    pub rf: RfConfig,
    pub absorption: AbsorptionModel,
    pub mimo: Option<MimoSpec>,
}

impl Scenario {
    /// One-line description used when reporting numeric failures.
    pub fn summary(&self) -> String {
        let counts = match self.panel.counts {
            Some((nx, ny)) => format!("{nx}x{ny}"),
            None => "derived".into(),
        };
        format!(
            "experiment={} panel={} tx=({}, {}, {}) rx=({}, {}, {}) f_c={} B={} S={}",
            self.experiment.name(),
            counts,
            self.tx.x,
            self.tx.y,
            self.tx.z,
            self.rx.x,
            self.rx.y,
            self.rx.z,
            self.rf.f_c,
            self.rf.bandwidth,
            self.rf.subcarriers
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: Option<f64>,
    pub scenario: Scenario,
}

/// Everything needed to run a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub experiment: Experiment,
    pub output: PathBuf,
    pub strategies: Vec<Strategy>,
    pub sweep_parameter: Option<String>,
    pub points: Vec<SweepPoint>,
}

struct Collector<'a> {
    source: &'a str,
    diagnostics: Vec<Diagnostic>,
}

impl<'a> Collector<'a> {
    fn new(source: &'a str) -> Self {
        Self {
            source,
            diagnostics: Vec::new(),
        }
    }

    fn push(&mut self, field: &str, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic {
            line: locate(self.source, field),
            field: field.to_string(),
            message: message.into(),
        });
    }
}

/// Line holding `key` (or the `[section]` header when `key` is absent) of a
/// dotted `section.key` path, or the top-level key for undotted paths.
fn locate(source: &str, field: &str) -> Option<usize> {
    let (section, key) = match field.split_once('.') {
        Some((s, k)) => (Some(s), k),
        None => (None, field),
    };
    let mut current: Option<String> = None;
    let mut header_line = None;
    for (i, raw) in source.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.starts_with('[') {
            let name = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            if Some(name.as_str()) == section {
                header_line = Some(i + 1);
            }
            current = Some(name);
            continue;
        }
        let in_section = current.as_deref() == section;
        if in_section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    header_line
}

/// Parse the TOML layer only.
pub fn parse(source: &str) -> std::result::Result<ScenarioFile, Diagnostic> {
    toml::from_str(source).map_err(|e| {
        let line = e.span().map(|span| source[..span.start].matches('\n').count() + 1);
        Diagnostic {
            line,
            field: "syntax".into(),
            message: e.message().trim().to_string(),
        }
    })
}

fn require<T: Copy>(c: &mut Collector, field: &str, value: Option<T>) -> Option<T> {
    if value.is_none() {
        c.push(field, "missing required field");
    }
    value
}

fn positive(c: &mut Collector, field: &str, value: Option<f64>, unit: &str) -> Option<f64> {
    let v = require(c, field, value)?;
    if !(v.is_finite() && v > 0.0) {
        c.push(field, format!("must be a positive number of {unit}, got {v}"));
        return None;
    }
    Some(v)
}

fn finite(c: &mut Collector, field: &str, value: Option<f64>) -> Option<f64> {
    let v = require(c, field, value)?;
    if !v.is_finite() {
        c.push(field, format!("must be finite, got {v}"));
        return None;
    }
    Some(v)
}

fn angle(c: &mut Collector, section: &str, name: &str, rad: Option<f64>, deg: Option<f64>) -> Option<f64> {
    match (rad, deg) {
        (Some(_), Some(_)) => {
            c.push(
                &format!("{section}.{name}_deg"),
                format!("give either `{name}` (radians) or `{name}_deg`, not both"),
            );
            None
        }
        (Some(r), None) => finite(c, &format!("{section}.{name}"), Some(r)),
        (None, Some(d)) => finite(c, &format!("{section}.{name}_deg"), Some(d)).map(|d| d * PI / 180.0),
        (None, None) => {
            c.push(
                &format!("{section}.{name}"),
                format!("missing required field (`{name}` in radians or `{name}_deg`)"),
            );
            None
        }
    }
}

fn endpoint(c: &mut Collector, section: &str, raw: Option<&EndpointSection>) -> Option<CartesianPoint> {
    let Some(e) = raw else {
        c.push(section, "missing required section");
        return None;
    };
    let spherical = e.r.is_some() || e.theta.is_some() || e.theta_deg.is_some() || e.phi.is_some() || e.phi_deg.is_some();
    let cartesian = e.x.is_some() || e.y.is_some() || e.z.is_some();
    let point = match (spherical, cartesian) {
        (true, true) => {
            c.push(section, "mixes spherical (r, theta, phi) and cartesian (x, y, z) coordinates");
            return None;
        }
        (false, false) => {
            c.push(section, "needs either r/theta/phi or x/y/z");
            return None;
        }
        (true, false) => {
            let r = e.r;
            let r = match require(c, &format!("{section}.r"), r) {
                Some(r) if !(r.is_finite() && r > 0.0) => {
                    c.push(&format!("{section}.r"), format!("distance must be positive (metres), got {r}"));
                    None
                }
                other => other,
            };
            let theta = angle(c, section, "theta", e.theta, e.theta_deg);
            let phi = angle(c, section, "phi", e.phi, e.phi_deg);
            let (r, theta, phi) = (r?, theta?, phi?);
            if !(0.0..=PI).contains(&theta) {
                c.push(
                    &format!("{section}.theta"),
                    format!("polar angle must lie in [0, pi] (0 to 180 degrees), got {theta} rad"),
                );
                return None;
            }
            SphericalPoint { r, theta, phi }.to_cartesian()
        }
        (false, true) => {
            let x = finite(c, &format!("{section}.x"), e.x);
            let y = finite(c, &format!("{section}.y"), e.y);
            let z = finite(c, &format!("{section}.z"), e.z);
            CartesianPoint::new(x?, y?, z?)
        }
    };
    if !(point.z > 0.0) {
        c.push(
            section,
            format!("endpoint must lie in front of the surface (z > 0), got z = {}", point.z),
        );
        return None;
    }
    Some(point)
}

fn count(c: &mut Collector, field: &str, value: Option<i64>) -> Option<usize> {
    let v = require(c, field, value)?;
    if v < 1 {
        c.push(field, format!("must be a positive integer, got {v}"));
        return None;
    }
    Some(v as usize)
}

fn panel(c: &mut Collector, raw: Option<&PanelSection>, experiment: Option<Experiment>) -> Option<PanelSpec> {
    let Some(p) = raw else {
        c.push("panel", "missing required section");
        return None;
    };
    let derived = experiment == Some(Experiment::EnergyEfficiency);
    let mut counts_ok = true;
    let mut read_count = |c: &mut Collector, field: &str, value: Option<i64>| -> Option<usize> {
        if derived {
            if value.is_some() {
                c.push(
                    field,
                    "energy_efficiency experiments derive the element count from N*; remove this key",
                );
                counts_ok = false;
            }
            return None;
        }
        let v = require(c, field, value);
        match v {
            Some(v) if v < 2 || v % 2 != 0 => {
                c.push(field, format!("element count must be an even integer >= 2, got {v}"));
                counts_ok = false;
                None
            }
            None => {
                counts_ok = false;
                None
            }
            Some(v) => Some(v as usize),
        }
    };
    let n_x = read_count(c, "panel.n_x", p.n_x);
    let n_y = read_count(c, "panel.n_y", p.n_y);
    let element = match (p.element.as_deref(), p.l_x, p.l_y) {
        (Some("half_wavelength"), None, None) => Some(ElementSize::HalfWavelength),
        (Some("half_wavelength"), _, _) => {
            c.push("panel.element", "`half_wavelength` cannot be combined with l_x/l_y");
            None
        }
        (Some(other), _, _) => {
            c.push(
                "panel.element",
                format!("unknown element size `{other}` (expected `half_wavelength`, or give l_x and l_y)"),
            );
            None
        }
        (None, l_x, l_y) => {
            let l_x = positive(c, "panel.l_x", l_x, "metres");
            let l_y = positive(c, "panel.l_y", l_y, "metres");
            Some(ElementSize::Fixed { l_x: l_x?, l_y: l_y? })
        }
    };
    let indexing = match p.indexing.as_deref() {
        None | Some("symmetric") => Some(Indexing::Symmetric),
        Some("paper_literal") => Some(Indexing::PaperLiteral),
        Some(other) => {
            c.push(
                "panel.indexing",
                format!("unknown indexing `{other}` (expected `symmetric` or `paper_literal`)"),
            );
            None
        }
    };
    let counts = if derived { None } else { Some((n_x?, n_y?)) };
    if !counts_ok {
        return None;
    }
    Some(PanelSpec {
        counts,
        element: element?,
        indexing: indexing?,
    })
}

fn rf(c: &mut Collector, raw: Option<&RfSection>) -> Option<RfConfig> {
    let Some(r) = raw else {
        c.push("rf", "missing required section");
        return None;
    };
    let f_c = positive(c, "rf.f_c_hz", r.f_c_hz, "Hz");
    let bandwidth = positive(c, "rf.bandwidth_hz", r.bandwidth_hz, "Hz");
    let subcarriers = count(c, "rf.subcarriers", r.subcarriers);
    let p_t = finite(c, "rf.p_t_dbm", r.p_t_dbm);
    let (g_t, g_r) = match (r.g_dbi, r.g_t_dbi, r.g_r_dbi) {
        (Some(g), None, None) => (finite(c, "rf.g_dbi", Some(g)), finite(c, "rf.g_dbi", Some(g))),
        (Some(_), _, _) => {
            c.push("rf.g_dbi", "give either `g_dbi` or `g_t_dbi`/`g_r_dbi`, not both");
            (None, None)
        }
        (None, g_t, g_r) => (finite(c, "rf.g_t_dbi", g_t), finite(c, "rf.g_r_dbi", g_r)),
    };
    let noise = finite(c, "rf.noise_density_dbm_hz", r.noise_density_dbm_hz);
    let (f_c, bandwidth, subcarriers) = (f_c?, bandwidth?, subcarriers?);
    if f_c <= bandwidth / 2.0 {
        c.push(
            "rf.bandwidth_hz",
            format!("half the bandwidth ({} Hz) must stay below the carrier ({f_c} Hz)", bandwidth / 2.0),
        );
        return None;
    }
    match RfConfig::from_db(f_c, bandwidth, subcarriers, p_t?, g_t?, g_r?, noise?) {
        Ok(cfg) => Some(cfg),
        Err(e) => {
            c.push("rf", e.to_string());
            None
        }
    }
}

fn absorption(c: &mut Collector, raw: Option<&AbsorptionSection>, base_dir: &Path, cfg: Option<&RfConfig>) -> Option<AbsorptionModel> {
    let default = AbsorptionSection::default();
    let a = raw.unwrap_or(&default);
    match a.model.as_deref() {
        None | Some("zero") => {
            if a.kappa_per_m.is_some() || a.table.is_some() {
                c.push("absorption.model", "model `zero` takes no kappa_per_m or table");
                return None;
            }
            Some(AbsorptionModel::Zero)
        }
        Some("constant") => {
            if a.table.is_some() {
                c.push("absorption.table", "only valid with model = \"table\"");
            }
            let k = require(c, "absorption.kappa_per_m", a.kappa_per_m)?;
            match AbsorptionModel::constant(k) {
                Ok(m) => Some(m),
                Err(_) => {
                    c.push("absorption.kappa_per_m", format!("must be a non-negative number of 1/m, got {k}"));
                    None
                }
            }
        }
        Some("table") => {
            if a.kappa_per_m.is_some() {
                c.push("absorption.kappa_per_m", "only valid with model = \"constant\"");
            }
            let Some(rel) = a.table.as_deref() else {
                c.push("absorption.table", "missing required field");
                return None;
            };
            let path = base_dir.join(rel);
            let table = match AbsorptionTable::from_path(&path) {
                Ok(t) => t,
                Err(e) => {
                    c.push("absorption.table", e.to_string());
                    return None;
                }
            };
            if let Some(cfg) = cfg {
                let freqs = cfg.subcarrier_freqs();
                let lo = cfg.f_c + freqs[0];
                let hi = cfg.f_c + freqs[freqs.len() - 1];
                let (t_lo, t_hi) = table.range();
                if lo < t_lo || hi > t_hi {
                    c.push(
                        "absorption.table",
                        format!("table covers [{t_lo}, {t_hi}] Hz but the subcarriers span [{lo}, {hi}] Hz"),
                    );
                    return None;
                }
            }
            Some(AbsorptionModel::Table(table))
        }
        Some(other) => {
            c.push(
                "absorption.model",
                format!("unknown model `{other}` (expected zero, constant or table)"),
            );
            None
        }
    }
}

fn mimo(c: &mut Collector, raw: Option<&MimoSection>, experiment: Option<Experiment>) -> Option<Option<MimoSpec>> {
    let needed = experiment == Some(Experiment::EnergyEfficiency);
    match (raw, needed) {
        (None, false) => Some(None),
        (Some(_), false) => {
            c.push("mimo", "only used by energy_efficiency experiments");
            None
        }
        (None, true) => {
            c.push("mimo", "missing required section for energy_efficiency experiments");
            None
        }
        (Some(m), true) => {
            let n_t = count(c, "mimo.n_t", m.n_t);
            let n_r = count(c, "mimo.n_r", m.n_r);
            let alpha = positive(c, "mimo.alpha", m.alpha, "antennas per element ratio");
            let mut power = |field: &str, v: Option<f64>, default: f64| {
                let v = v.unwrap_or(default);
                if !(v.is_finite() && v >= 0.0) {
                    c.push(field, format!("must be a non-negative number of watts, got {v}"));
                    return None;
                }
                Some(v)
            };
            let p_ps = power("mimo.p_ps_w", m.p_ps_w, 42e-3);
            let p_pa = power("mimo.p_pa_w", m.p_pa_w, 60e-3);
            Some(Some(MimoSpec {
                n_t: n_t?,
                n_r: n_r?,
                alpha: alpha?,
                p_ps: p_ps?,
                p_pa: p_pa?,
            }))
        }
    }
}

fn experiment(c: &mut Collector, raw: Option<&str>) -> Option<Experiment> {
    let Some(name) = raw else {
        c.push("experiment", "missing required field");
        return None;
    };
    let found = Experiment::NAMES.iter().find(|(n, _)| *n == name).map(|(_, e)| *e);
    if found.is_none() {
        c.push(
            "experiment",
            format!("unknown experiment `{name}` (expected gain_profile, rates or energy_efficiency)"),
        );
    }
    found
}

fn strategies(c: &mut Collector, raw: Option<&[String]>) -> Option<Vec<Strategy>> {
    let Some(list) = raw else {
        c.push("strategies", "missing required field");
        return None;
    };
    if list.is_empty() {
        c.push("strategies", "must name at least one strategy");
        return None;
    }
    let mut out: Vec<Strategy> = Vec::new();
    let mut ok = true;
    for name in list {
        match name.parse::<Strategy>() {
            Ok(s) if out.contains(&s) => {
                c.push("strategies", format!("strategy `{name}` listed twice"));
                ok = false;
            }
            Ok(s) => out.push(s),
            Err(_) => {
                c.push(
                    "strategies",
                    format!("unknown strategy `{name}` (expected wideband, narrowband or upper_bound)"),
                );
                ok = false;
            }
        }
    }
    ok.then_some(out)
}

fn distance(c: &mut Collector, raw: Option<&str>) -> Option<DistanceMode> {
    match raw {
        None | Some("exact") => Some(DistanceMode::Exact),
        Some("fresnel") => Some(DistanceMode::Fresnel),
        Some(other) => {
            c.push("distance", format!("unknown distance model `{other}` (expected exact or fresnel)"));
            None
        }
    }
}

/// Everything in the file except the sweep section.
fn resolve_point(c: &mut Collector, raw: &ScenarioFile, base_dir: &Path) -> Option<Scenario> {
    let experiment = experiment(c, raw.experiment.as_deref());
    let strategies = strategies(c, raw.strategies.as_deref());
    let distance = distance(c, raw.distance.as_deref());
    let panel = panel(c, raw.panel.as_ref(), experiment);
    let tx = endpoint(c, "tx", raw.tx.as_ref());
    let rx = endpoint(c, "rx", raw.rx.as_ref());
    let rf = rf(c, raw.rf.as_ref());
    let absorption = absorption(c, raw.absorption.as_ref(), base_dir, rf.as_ref());
    let mimo = mimo(c, raw.mimo.as_ref(), experiment);
    if let (Some(tx), Some(rx)) = (tx, rx) {
        if tx.distance_to(&rx) == 0.0 {
            c.push("rx", "coincides with tx");
            return None;
        }
    }
    Some(Scenario {
        experiment: experiment?,
        strategies: strategies?,
        distance: distance?,
        panel: panel?,
        tx: tx?,
        rx: rx?,
        rf: rf?,
        absorption: absorption?,
        mimo: mimo?,
    })
}

fn set_parameter(raw: &mut ScenarioFile, parameter: &str, value: f64) {
    let Some((section, key)) = parameter.split_once('.') else {
        return;
    };
    match section {
        "tx" | "rx" => {
            let slot = if section == "tx" { &mut raw.tx } else { &mut raw.rx };
            let e = slot.get_or_insert_with(Default::default);
            let field = match key {
                "r" => &mut e.r,
                "theta" => &mut e.theta,
                "theta_deg" => &mut e.theta_deg,
                "phi" => &mut e.phi,
                "phi_deg" => &mut e.phi_deg,
                "x" => &mut e.x,
                "y" => &mut e.y,
                "z" => &mut e.z,
                _ => return,
            };
            *field = Some(value);
        }
        "rf" => {
            let r = raw.rf.get_or_insert_with(Default::default);
            let field = match key {
                "f_c_hz" => &mut r.f_c_hz,
                "bandwidth_hz" => &mut r.bandwidth_hz,
                "p_t_dbm" => &mut r.p_t_dbm,
                "noise_density_dbm_hz" => &mut r.noise_density_dbm_hz,
                _ => return,
            };
            *field = Some(value);
        }
        "absorption" if key == "kappa_per_m" => {
            raw.absorption.get_or_insert_with(Default::default).kappa_per_m = Some(value);
        }
        "mimo" if key == "alpha" => {
            raw.mimo.get_or_insert_with(Default::default).alpha = Some(value);
        }
        _ => {}
    }
}

/// Sweep parameter and its values, or `None` for a single-point scenario.
fn sweep(c: &mut Collector, raw: Option<&SweepSection>) -> Option<Option<(String, Vec<f64>)>> {
    let Some(s) = raw else {
        return Some(None);
    };
    let parameter = match require(c, "sweep.parameter", s.parameter.as_deref()) {
        Some(p) if SWEEP_PARAMETERS.contains(&p) => Some(p.to_string()),
        Some(p) => {
            c.push(
                "sweep.parameter",
                format!("cannot sweep `{p}`; sweepable: {}", SWEEP_PARAMETERS.join(", ")),
            );
            None
        }
        None => None,
    };
    let start = finite(c, "sweep.start", s.start);
    let stop = finite(c, "sweep.stop", s.stop);
    let steps = count(c, "sweep.steps", s.steps);
    let (parameter, start, stop, steps) = (parameter?, start?, stop?, steps?);
    if steps == 1 && start != stop {
        c.push("sweep.steps", "a single step needs start == stop");
        return None;
    }
    let values = (0..steps)
        .map(|i| {
            if i + 1 == steps {
                stop
            } else {
                start + (stop - start) * i as f64 / (steps - 1) as f64
            }
        })
        .collect();
    Some(Some((parameter, values)))
}

fn format_value(v: f64) -> String {
    format!("{v}")
}

/// Validate `source` and expand it into one scenario per sweep point.
pub fn plan_from_source(source: &str, base_dir: &Path) -> std::result::Result<Plan, Vec<Diagnostic>> {
    let raw = parse(source).map_err(|d| vec![d])?;
    let mut c = Collector::new(source);
    let output = match require(&mut c, "output", raw.output.as_deref()) {
        Some("") => {
            c.push("output", "must not be empty");
            None
        }
        other => other.map(PathBuf::from),
    };
    let swept = sweep(&mut c, raw.sweep.as_ref());
    let mut points = Vec::new();
    match swept.clone() {
        None => {
            // still report the remaining problems
            resolve_point(&mut c, &raw, base_dir);
        }
        Some(None) => {
            if let Some(scenario) = resolve_point(&mut c, &raw, base_dir) {
                points.push(SweepPoint { value: None, scenario });
            }
        }
        Some(Some((parameter, values))) => {
            let mut seen = BTreeSet::new();
            for value in values {
                let mut point_raw = raw.clone();
                set_parameter(&mut point_raw, &parameter, value);
                let mut pc = Collector::new(source);
                if let Some(scenario) = resolve_point(&mut pc, &point_raw, base_dir) {
                    points.push(SweepPoint {
                        value: Some(value),
                        scenario,
                    });
                }
                for mut d in pc.diagnostics {
                    if d.field.starts_with(parameter.as_str()) || d.field == parameter.split('.').next().unwrap_or("") {
                        d.message = format!("{} (at {parameter} = {})", d.message, format_value(value));
                        d.line = d.line.or_else(|| locate(source, "sweep.parameter"));
                    }
                    if seen.insert((d.field.clone(), d.message.clone())) {
                        c.diagnostics.push(d);
                    }
                }
            }
        }
    }
    if !c.diagnostics.is_empty() {
        let mut diags = c.diagnostics;
        diags.sort_by_key(|d| (d.line.unwrap_or(usize::MAX), d.field.clone()));
        return Err(diags);
    }
    let first = &points[0].scenario;
    Ok(Plan {
        experiment: first.experiment,
        strategies: first.strategies.clone(),
        output: output.expect("checked above"),
        sweep_parameter: swept.flatten().map(|(p, _)| p),
        points,
    })
}

fn read_source(path: &Path) -> std::result::Result<String, Diagnostic> {
    std::fs::read_to_string(path).map_err(|e| Diagnostic {
        line: None,
        field: "file".into(),
        message: format!("cannot read {}: {e}", path.display()),
    })
}

/// Load and validate a scenario file. Relative paths inside it resolve
/// against its directory.
pub fn plan_from_file(path: &Path) -> std::result::Result<Plan, Vec<Diagnostic>> {
    let source = read_source(path).map_err(|d| vec![d])?;
    let base_dir = path.parent().unwrap_or(Path::new("."));
    plan_from_source(&source, base_dir)
}

/// Every problem in the file; empty when it is ready to run.
pub fn validate_file(path: &Path) -> Vec<Diagnostic> {
    plan_from_file(path).err().unwrap_or_default()
}

/// [`validate_file`] for in-memory text.
pub fn validate_source(source: &str, base_dir: &Path) -> Vec<Diagnostic> {
    plan_from_source(source, base_dir).err().unwrap_or_default()
}
