//! Strict line-oriented scenario configs.
//!
//! Grammar: `[section]` headers and `key = value` lines; `#` starts a
//! comment; blank lines are ignored. Parsing is strict — unknown sections,
//! unknown keys, duplicate keys, and invariant violations are all errors
//! carrying the offending line or field. Every config can be re-serialized
//! to a canonical text that parses back to an equal config.

use std::collections::BTreeSet;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: unknown key '{key}' in [{section}]")]
    UnknownKey { line: usize, section: String, key: String },
    #[error("line {line}: duplicate key '{key}'")]
    DuplicateKey { line: usize, key: String },
    #[error("missing required section [{name}]")]
    MissingSection { name: String },
    #[error("missing required key '{key}' in [{section}]")]
    MissingKey { section: String, key: String },
    #[error("line {line}: bad value for '{key}': {msg}")]
    BadValue { line: usize, key: String, msg: String },
    #[error("invariant violation in field '{field}': {msg}")]
    Invariant { field: String, msg: String },
}

type Result<T> = std::result::Result<T, ConfigError>;

/// Integration method selector for simulate scenarios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MethodConfig {
    Rk4 { step: f64 },
    Rk45 { tol: f64 },
}

/// Hamiltonian selector plus its parameter block.
#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianConfig {
    FreeRelativistic,
    LinearDecay { lambda: f64 },
    TabulatedDecay { tau_knots: Vec<f64>, phi_values: Vec<f64> },
    WeakFieldUniform { phi: f64 },
}

impl HamiltonianConfig {
    pub fn name(&self) -> &'static str {
        match self {
            HamiltonianConfig::FreeRelativistic => "free_relativistic",
            HamiltonianConfig::LinearDecay { .. } => "linear_decay",
            HamiltonianConfig::TabulatedDecay { .. } => "tabulated_decay",
            HamiltonianConfig::WeakFieldUniform { .. } => "weak_field_uniform",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateConfig {
    pub hamiltonian: HamiltonianConfig,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub tau: f64,
    pub m: f64,
    pub t0: f64,
    pub t1: f64,
    pub method: MethodConfig,
    pub cadence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarycentricConfig {
    pub p1: f64,
    pub m1: f64,
    pub p2: f64,
    pub m2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoopElementConfig {
    Boost(f64),
    Wait(f64),
    Translate(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseLoopConfig {
    pub elements: Vec<LoopElementConfig>,
    pub masses: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCavityConfig {
    pub v: f64,
    pub theta: f64,
    pub t: f64,
}

/// Branch profile mini-syntax: `const V`, `piecewise V:DUR, V:DUR, ...`,
/// `tabulated T:V, T:V, ...`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileConfig {
    Const(f64),
    Piecewise(Vec<(f64, f64)>),
    Tabulated(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseInterfereConfig {
    pub t_span: f64,
    pub branch1: ProfileConfig,
    pub branch2: ProfileConfig,
    pub a1: f64,
    pub a2: f64,
    pub masses: Vec<f64>,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyGravConfig {
    pub g: f64,
    pub m_heavy: f64,
    pub b: f64,
    pub t: Option<f64>,
    pub v: Option<f64>,
    pub delta_b: f64,
    pub delta_px: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintySpectrometerConfig {
    pub e: f64,
    pub b_field: f64,
    pub slit: f64,
    pub v: f64,
    pub radius: f64,
    pub monte_carlo: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleLoopConfig {
    pub v: f64,
    pub wait: f64,
    pub mass: f64,
    pub sigma: f64,
    pub grid_points: usize,
    pub half_width: f64,
    pub steps_per_unit: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioKind {
    Simulate(SimulateConfig),
    Barycentric(BarycentricConfig),
    PhaseLoop(PhaseLoopConfig),
    PhaseCavity(PhaseCavityConfig),
    PhaseInterfere(PhaseInterfereConfig),
    UncertaintyGrav(UncertaintyGravConfig),
    UncertaintySpectrometer(UncertaintySpectrometerConfig),
    OracleLoop(OracleLoopConfig),
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Simulate(_) => "simulate",
            ScenarioKind::Barycentric(_) => "barycentric",
            ScenarioKind::PhaseLoop(_) => "phase-loop",
            ScenarioKind::PhaseCavity(_) => "phase-cavity",
            ScenarioKind::PhaseInterfere(_) => "phase-interfere",
            ScenarioKind::UncertaintyGrav(_) => "uncertainty-grav",
            ScenarioKind::UncertaintySpectrometer(_) => "uncertainty-spectrometer",
            ScenarioKind::OracleLoop(_) => "oracle-loop",
        }
    }

    fn section(&self) -> &'static str {
        kind_section(self.name()).expect("known kind")
    }
}

fn kind_section(kind: &str) -> Option<&'static str> {
    Some(match kind {
        "simulate" => "simulate",
        "barycentric" => "barycentric",
        "phase-loop" => "loop",
        "phase-cavity" => "cavity",
        "phase-interfere" => "interfere",
        "uncertainty-grav" => "grav",
        "uncertainty-spectrometer" => "spectrometer",
        "oracle-loop" => "oracle",
        _ => return None,
    })
}

/// Output file names, written under the run's output directory.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputSpec {
    pub report: Option<String>,
    pub csv: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub hbar: f64,
    pub output: OutputSpec,
    pub kind: ScenarioKind,
}

// ---------------------------------------------------------------------------
// lexing

struct RawSection {
    name: String,
    line: usize,
    entries: Vec<(usize, String, String)>,
}

fn lex(text: &str) -> Result<Vec<RawSection>> {
    let mut sections: Vec<RawSection> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line: line_no,
                msg: "unterminated section header".into(),
            })?;
            let name = name.trim();
            if name.is_empty() {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    msg: "empty section name".into(),
                });
            }
            sections.push(RawSection {
                name: name.to_string(),
                line: line_no,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: line_no,
            msg: format!("expected 'key = value', got '{line}'"),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                line: line_no,
                msg: "empty key".into(),
            });
        }
        let section = sections.last_mut().ok_or_else(|| ConfigError::Syntax {
            line: line_no,
            msg: "key before any [section]".into(),
        })?;
        section.entries.push((line_no, key, value));
    }
    Ok(sections)
}

// ---------------------------------------------------------------------------
// typed key access

struct KeyBag {
    section: String,
    entries: Vec<(usize, String, String)>,
    used: BTreeSet<usize>,
}

impl KeyBag {
    fn new(section: &RawSection) -> Result<Self> {
        // duplicate keys are errors except for the ordered 'element' list
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for (line, key, _) in &section.entries {
            if key != "element" && !seen.insert(key.as_str()) {
                return Err(ConfigError::DuplicateKey {
                    line: *line,
                    key: key.clone(),
                });
            }
        }
        Ok(KeyBag {
            section: section.name.clone(),
            entries: section.entries.clone(),
            used: BTreeSet::new(),
        })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        for (i, (line, k, v)) in self.entries.iter().enumerate() {
            if k == key && !self.used.contains(&i) {
                self.used.insert(i);
                return Some((*line, v.clone()));
            }
        }
        None
    }

    fn take_all(&mut self, key: &str) -> Vec<(usize, String)> {
        let mut out = Vec::new();
        for (i, (line, k, v)) in self.entries.iter().enumerate() {
            if k == key && !self.used.contains(&i) {
                self.used.insert(i);
                out.push((*line, v.clone()));
            }
        }
        out
    }

    fn f64(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => parse_f64(line, key, &v).map(Some),
        }
    }

    fn f64_required(&mut self, key: &str) -> Result<f64> {
        self.f64(key)?.ok_or_else(|| ConfigError::MissingKey {
            section: self.section.clone(),
            key: key.to_string(),
        })
    }

    fn usize_opt(&mut self, key: &str) -> Result<Option<usize>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<usize>().map(Some).map_err(|e| ConfigError::BadValue {
                line,
                key: key.to_string(),
                msg: e.to_string(),
            }),
        }
    }

    fn u64_opt(&mut self, key: &str) -> Result<Option<u64>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<u64>().map(Some).map_err(|e| ConfigError::BadValue {
                line,
                key: key.to_string(),
                msg: e.to_string(),
            }),
        }
    }

    fn string(&mut self, key: &str) -> Option<String> {
        self.take(key).map(|(_, v)| v)
    }

    fn f64_list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => {
                let mut out = Vec::new();
                for part in v.split(',') {
                    out.push(parse_f64(line, key, part.trim())?);
                }
                Ok(Some(out))
            }
        }
    }

    fn finish(self) -> Result<()> {
        for (i, (line, key, _)) in self.entries.iter().enumerate() {
            if !self.used.contains(&i) {
                return Err(ConfigError::UnknownKey {
                    line: *line,
                    section: self.section,
                    key: key.clone(),
                });
            }
        }
        Ok(())
    }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.parse().map_err(|e: std::num::ParseFloatError| ConfigError::BadValue {
        line,
        key: key.to_string(),
        msg: e.to_string(),
    })?;
    if !x.is_finite() {
        return Err(ConfigError::BadValue {
            line,
            key: key.to_string(),
            msg: format!("must be finite, got {x}"),
        });
    }
    Ok(x)
}

fn invariant(field: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invariant {
        field: field.to_string(),
        msg: msg.into(),
    }
}

fn check_speed(field: &str, v: f64) -> Result<()> {
    if !(v.abs() < 1.0) {
        return Err(invariant(field, format!("|v| must be < 1, got {v}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// per-kind parsing

fn parse_profile(line: usize, key: &str, field: &str, text: &str) -> Result<ProfileConfig> {
    let bad = |msg: String| ConfigError::BadValue {
        line,
        key: key.to_string(),
        msg,
    };
    let (tag, rest) = match text.split_once(char::is_whitespace) {
        Some((tag, rest)) => (tag, rest.trim()),
        None => (text.trim(), ""),
    };
    let parse_pairs = |rest: &str| -> Result<Vec<(f64, f64)>> {
        let mut pairs = Vec::new();
        for part in rest.split(',') {
            let part = part.trim();
            let (a, b) = part
                .split_once(':')
                .ok_or_else(|| bad(format!("expected 'A:B' pair, got '{part}'")))?;
            pairs.push((parse_f64(line, key, a.trim())?, parse_f64(line, key, b.trim())?));
        }
        Ok(pairs)
    };
    match tag {
        "const" => {
            let v = parse_f64(line, key, rest)?;
            check_speed(field, v)?;
            Ok(ProfileConfig::Const(v))
        }
        "piecewise" => {
            let pairs = parse_pairs(rest)?;
            if pairs.is_empty() {
                return Err(bad("piecewise needs at least one V:DURATION pair".into()));
            }
            for &(v, dur) in &pairs {
                check_speed(field, v)?;
                if !(dur >= 0.0) {
                    return Err(invariant(field, format!("duration must be >= 0, got {dur}")));
                }
            }
            Ok(ProfileConfig::Piecewise(pairs))
        }
        "tabulated" => {
            let pairs = parse_pairs(rest)?;
            if pairs.len() < 2 {
                return Err(bad("tabulated needs at least two T:V pairs".into()));
            }
            for &(_, v) in &pairs {
                check_speed(field, v)?;
            }
            Ok(ProfileConfig::Tabulated(pairs))
        }
        other => Err(bad(format!(
            "unknown profile '{other}' (expected const | piecewise | tabulated)"
        ))),
    }
}

fn profile_text(p: &ProfileConfig) -> String {
    let join = |pairs: &[(f64, f64)]| {
        pairs
            .iter()
            .map(|(a, b)| format!("{a}:{b}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    match p {
        ProfileConfig::Const(v) => format!("const {v}"),
        ProfileConfig::Piecewise(pairs) => format!("piecewise {}", join(pairs)),
        ProfileConfig::Tabulated(pairs) => format!("tabulated {}", join(pairs)),
    }
}

fn parse_simulate(section: &RawSection) -> Result<SimulateConfig> {
    let mut bag = KeyBag::new(section)?;
    let ham_name = bag.string("hamiltonian").ok_or_else(|| ConfigError::MissingKey {
        section: "simulate".into(),
        key: "hamiltonian".into(),
    })?;
    let hamiltonian = match ham_name.as_str() {
        "free_relativistic" => HamiltonianConfig::FreeRelativistic,
        "linear_decay" => HamiltonianConfig::LinearDecay {
            lambda: bag.f64_required("lambda")?,
        },
        "tabulated_decay" => {
            let tau_knots = bag.f64_list("tau_knots")?.ok_or_else(|| ConfigError::MissingKey {
                section: "simulate".into(),
                key: "tau_knots".into(),
            })?;
            let phi_values = bag.f64_list("phi_values")?.ok_or_else(|| ConfigError::MissingKey {
                section: "simulate".into(),
                key: "phi_values".into(),
            })?;
            HamiltonianConfig::TabulatedDecay { tau_knots, phi_values }
        }
        "weak_field_uniform" => {
            let phi = bag.f64_required("phi")?;
            if 2.0 * phi.abs() >= 1.0 {
                return Err(invariant("simulate.phi", format!("|2*phi| must be < 1, got phi = {phi}")));
            }
            HamiltonianConfig::WeakFieldUniform { phi }
        }
        other => {
            return Err(invariant(
                "simulate.hamiltonian",
                format!(
                    "unknown hamiltonian '{other}' (expected free_relativistic | linear_decay | \
                     tabulated_decay | weak_field_uniform)"
                ),
            ))
        }
    };

    let x = bag.f64_list("x")?.unwrap_or_else(|| vec![0.0]);
    let p = bag.f64_list("p")?.ok_or_else(|| ConfigError::MissingKey {
        section: "simulate".into(),
        key: "p".into(),
    })?;
    if x.len() != p.len() || x.is_empty() || x.len() > 3 {
        return Err(invariant(
            "simulate.x",
            format!("x and p need matching dimension 1-3, got {} and {}", x.len(), p.len()),
        ));
    }
    let m = bag.f64_required("m")?;
    if !(m >= 0.0) {
        return Err(invariant("simulate.m", format!("mass must be >= 0, got {m}")));
    }
    let tau = bag.f64("tau")?.unwrap_or(0.0);
    let t0 = bag.f64("t0")?.unwrap_or(0.0);
    let t1 = bag.f64_required("t1")?;
    if !(t1 >= t0) {
        return Err(invariant("simulate.t1", format!("t1 must be >= t0, got {t1} < {t0}")));
    }

    let method_name = bag.string("method").unwrap_or_else(|| "rk4".into());
    let method = match method_name.as_str() {
        "rk4" => {
            let step = bag.f64("step")?.unwrap_or(1e-3);
            if !(step > 0.0) {
                return Err(invariant("simulate.step", format!("step must be > 0, got {step}")));
            }
            MethodConfig::Rk4 { step }
        }
        "rk45" => {
            let tol = bag.f64("tol")?.unwrap_or(1e-10);
            if !(tol > 0.0) {
                return Err(invariant("simulate.tol", format!("tol must be > 0, got {tol}")));
            }
            MethodConfig::Rk45 { tol }
        }
        other => {
            return Err(invariant(
                "simulate.method",
                format!("unknown method '{other}' (expected rk4 | rk45)"),
            ))
        }
    };
    let cadence = bag.f64("cadence")?.unwrap_or(100.0);
    if !(cadence > 0.0) {
        return Err(invariant("simulate.cadence", format!("cadence must be > 0, got {cadence}")));
    }

    bag.finish()?;
    Ok(SimulateConfig {
        hamiltonian,
        x,
        p,
        tau,
        m,
        t0,
        t1,
        method,
        cadence,
    })
}

fn parse_barycentric(section: &RawSection) -> Result<BarycentricConfig> {
    let mut bag = KeyBag::new(section)?;
    let cfg = BarycentricConfig {
        p1: bag.f64_required("p1")?,
        m1: bag.f64_required("m1")?,
        p2: bag.f64_required("p2")?,
        m2: bag.f64_required("m2")?,
    };
    if !(cfg.m1 >= 0.0) || !(cfg.m2 >= 0.0) {
        return Err(invariant("barycentric.m1", "masses must be >= 0".to_string()));
    }
    bag.finish()?;
    Ok(cfg)
}

fn parse_loop(section: &RawSection) -> Result<PhaseLoopConfig> {
    let mut bag = KeyBag::new(section)?;
    let mut elements = Vec::new();
    for (line, text) in bag.take_all("element") {
        let (tag, rest) = text.split_once(char::is_whitespace).ok_or(ConfigError::BadValue {
            line,
            key: "element".into(),
            msg: format!("expected 'boost V' | 'wait T' | 'translate A', got '{text}'"),
        })?;
        let value = parse_f64(line, "element", rest.trim())?;
        elements.push(match tag {
            "boost" => {
                check_speed("loop.element", value)?;
                LoopElementConfig::Boost(value)
            }
            "wait" => LoopElementConfig::Wait(value),
            "translate" => LoopElementConfig::Translate(value),
            other => {
                return Err(ConfigError::BadValue {
                    line,
                    key: "element".into(),
                    msg: format!("unknown element '{other}'"),
                })
            }
        });
    }
    let masses = bag.f64_list("masses")?.ok_or_else(|| ConfigError::MissingKey {
        section: "loop".into(),
        key: "masses".into(),
    })?;
    if masses.is_empty() || masses.iter().any(|&m| !(m > 0.0)) {
        return Err(invariant("loop.masses", "need at least one positive mass".to_string()));
    }
    bag.finish()?;
    Ok(PhaseLoopConfig { elements, masses })
}

fn parse_cavity(section: &RawSection) -> Result<PhaseCavityConfig> {
    let mut bag = KeyBag::new(section)?;
    let cfg = PhaseCavityConfig {
        v: bag.f64_required("v")?,
        theta: bag.f64_required("theta")?,
        t: bag.f64("t")?.unwrap_or(1.0),
    };
    bag.finish()?;
    // delegate the invariants to the scenario constructor for uniform messages
    tauspace_core::phase::CavityScenario::new(cfg.v, cfg.theta, cfg.t)
        .map_err(|e| invariant("cavity.v/theta/t", e.to_string()))?;
    Ok(cfg)
}

fn parse_interfere(section: &RawSection) -> Result<PhaseInterfereConfig> {
    let mut bag = KeyBag::new(section)?;
    let t_span = bag.f64_required("t_span")?;
    if !(t_span > 0.0) {
        return Err(invariant("interfere.t_span", format!("t_span must be > 0, got {t_span}")));
    }
    let branch = |bag: &mut KeyBag, key: &str, field: &str| -> Result<ProfileConfig> {
        let (line, text) = bag.take(key).ok_or_else(|| ConfigError::MissingKey {
            section: "interfere".into(),
            key: key.to_string(),
        })?;
        parse_profile(line, key, field, &text)
    };
    let branch1 = branch(&mut bag, "branch1", "interfere.branch1")?;
    let branch2 = branch(&mut bag, "branch2", "interfere.branch2")?;
    let a1 = bag.f64("a1")?.unwrap_or(std::f64::consts::FRAC_1_SQRT_2);
    let a2 = bag.f64("a2")?.unwrap_or(std::f64::consts::FRAC_1_SQRT_2);
    if (a1 * a1 + a2 * a2 - 1.0).abs() > 1e-9 {
        return Err(invariant(
            "interfere.a1",
            format!("|a1|^2 + |a2|^2 must equal 1, got {}", a1 * a1 + a2 * a2),
        ));
    }
    let masses = match (bag.f64("mass")?, bag.f64_list("masses")?) {
        (Some(m), None) => vec![m],
        (None, Some(ms)) => ms,
        (None, None) => {
            return Err(ConfigError::MissingKey {
                section: "interfere".into(),
                key: "mass".into(),
            })
        }
        (Some(_), Some(_)) => {
            return Err(invariant("interfere.mass", "give either 'mass' or 'masses', not both".to_string()))
        }
    };
    if masses.is_empty() || masses.iter().any(|&m| !(m > 0.0)) {
        return Err(invariant("interfere.masses", "need at least one positive mass".to_string()));
    }
    let gamma = bag.f64("gamma")?.unwrap_or(0.0);
    if !(gamma >= 0.0) {
        return Err(invariant("interfere.gamma", format!("gamma must be >= 0, got {gamma}")));
    }
    bag.finish()?;
    Ok(PhaseInterfereConfig {
        t_span,
        branch1,
        branch2,
        a1,
        a2,
        masses,
        gamma,
    })
}

fn parse_grav(section: &RawSection) -> Result<UncertaintyGravConfig> {
    let mut bag = KeyBag::new(section)?;
    let cfg = UncertaintyGravConfig {
        g: bag.f64_required("g")?,
        m_heavy: bag.f64_required("m_heavy")?,
        b: bag.f64_required("b")?,
        t: bag.f64("t")?,
        v: bag.f64("v")?,
        delta_b: bag.f64_required("delta_b")?,
        delta_px: bag.f64_required("delta_px")?,
    };
    bag.finish()?;
    tauspace_core::uncertainty::GravScatterScenario::new(
        cfg.g, cfg.m_heavy, cfg.b, cfg.t, cfg.v, cfg.delta_b, cfg.delta_px,
    )
    .map_err(|e| invariant("grav", e.to_string()))?;
    Ok(cfg)
}

fn parse_spectrometer(section: &RawSection) -> Result<UncertaintySpectrometerConfig> {
    let mut bag = KeyBag::new(section)?;
    let cfg = UncertaintySpectrometerConfig {
        e: bag.f64_required("e")?,
        b_field: bag.f64_required("b_field")?,
        slit: bag.f64_required("slit")?,
        v: bag.f64_required("v")?,
        radius: bag.f64_required("radius")?,
        monte_carlo: bag.usize_opt("monte_carlo")?,
    };
    bag.finish()?;
    tauspace_core::uncertainty::SpectrometerScenario::new(cfg.e, cfg.b_field, cfg.slit, cfg.v, cfg.radius)
        .map_err(|e| invariant("spectrometer", e.to_string()))?;
    Ok(cfg)
}

fn parse_oracle(section: &RawSection) -> Result<OracleLoopConfig> {
    let mut bag = KeyBag::new(section)?;
    let cfg = OracleLoopConfig {
        v: bag.f64("v")?.unwrap_or(0.1),
        wait: bag.f64("wait")?.unwrap_or(1.0),
        mass: bag.f64("mass")?.unwrap_or(1.0),
        sigma: bag.f64("sigma")?.unwrap_or(1.0),
        grid_points: bag.usize_opt("grid_points")?.unwrap_or(4096),
        half_width: bag.f64("half_width")?.unwrap_or(50.0),
        steps_per_unit: bag.usize_opt("steps_per_unit")?.unwrap_or(32),
    };
    bag.finish()?;
    check_speed("oracle.v", cfg.v)?;
    if !(cfg.mass > 0.0) || !(cfg.sigma > 0.0) {
        return Err(invariant("oracle.mass", "mass and sigma must be positive".to_string()));
    }
    if !cfg.grid_points.is_power_of_two() || cfg.grid_points < 16 {
        return Err(invariant(
            "oracle.grid_points",
            format!("grid points must be a power of two >= 16, got {}", cfg.grid_points),
        ));
    }
    Ok(cfg)
}

// ---------------------------------------------------------------------------
// top-level parse / serialize

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let sections = lex(text)?;
    let scenario = sections
        .iter()
        .find(|s| s.name == "scenario")
        .ok_or(ConfigError::MissingSection { name: "scenario".into() })?;

    let mut bag = KeyBag::new(scenario)?;
    let kind_name = bag.string("kind").ok_or_else(|| ConfigError::MissingKey {
        section: "scenario".into(),
        key: "kind".into(),
    })?;
    let seed = bag.u64_opt("seed")?.unwrap_or(42);
    bag.finish()?;

    let kind_section_name = kind_section(&kind_name).ok_or_else(|| invariant(
        "scenario.kind",
        format!("unknown scenario kind '{kind_name}'"),
    ))?;

    let mut hbar = 1.0;
    let mut output = OutputSpec::default();
    let mut kind: Option<ScenarioKind> = None;
    for section in &sections {
        match section.name.as_str() {
            "scenario" => {}
            "units" => {
                let mut bag = KeyBag::new(section)?;
                hbar = bag.f64("hbar")?.unwrap_or(1.0);
                bag.finish()?;
                if !(hbar > 0.0) {
                    return Err(invariant("units.hbar", format!("hbar must be > 0, got {hbar}")));
                }
            }
            "output" => {
                let mut bag = KeyBag::new(section)?;
                output.report = bag.string("report");
                output.csv = bag.string("csv");
                bag.finish()?;
            }
            name if name == kind_section_name => {
                kind = Some(match kind_name.as_str() {
                    "simulate" => ScenarioKind::Simulate(parse_simulate(section)?),
                    "barycentric" => ScenarioKind::Barycentric(parse_barycentric(section)?),
                    "phase-loop" => ScenarioKind::PhaseLoop(parse_loop(section)?),
                    "phase-cavity" => ScenarioKind::PhaseCavity(parse_cavity(section)?),
                    "phase-interfere" => ScenarioKind::PhaseInterfere(parse_interfere(section)?),
                    "uncertainty-grav" => ScenarioKind::UncertaintyGrav(parse_grav(section)?),
                    "uncertainty-spectrometer" => {
                        ScenarioKind::UncertaintySpectrometer(parse_spectrometer(section)?)
                    }
                    "oracle-loop" => ScenarioKind::OracleLoop(parse_oracle(section)?),
                    _ => unreachable!("kind_section covered"),
                });
            }
            _ => {
                return Err(ConfigError::UnknownSection {
                    line: section.line,
                    name: section.name.clone(),
                })
            }
        }
    }

    let kind = kind.ok_or(ConfigError::MissingSection {
        name: kind_section_name.to_string(),
    })?;
    Ok(ScenarioConfig {
        seed,
        hbar,
        output,
        kind,
    })
}

/// Canonical serialization; `parse_config(serialize(c)) == c`.
pub fn serialize_config(c: &ScenarioConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[scenario]");
    let _ = writeln!(out, "kind = {}", c.kind.name());
    let _ = writeln!(out, "seed = {}", c.seed);
    let _ = writeln!(out, "\n[units]");
    let _ = writeln!(out, "hbar = {}", c.hbar);
    if c.output.report.is_some() || c.output.csv.is_some() {
        let _ = writeln!(out, "\n[output]");
        if let Some(r) = &c.output.report {
            let _ = writeln!(out, "report = {r}");
        }
        if let Some(csv) = &c.output.csv {
            let _ = writeln!(out, "csv = {csv}");
        }
    }
    let _ = writeln!(out, "\n[{}]", c.kind.section());
    let list = |values: &[f64]| {
        values
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    };
    match &c.kind {
        ScenarioKind::Simulate(s) => {
            let _ = writeln!(out, "hamiltonian = {}", s.hamiltonian.name());
            match &s.hamiltonian {
                HamiltonianConfig::FreeRelativistic => {}
                HamiltonianConfig::LinearDecay { lambda } => {
                    let _ = writeln!(out, "lambda = {lambda}");
                }
                HamiltonianConfig::TabulatedDecay { tau_knots, phi_values } => {
                    let _ = writeln!(out, "tau_knots = {}", list(tau_knots));
                    let _ = writeln!(out, "phi_values = {}", list(phi_values));
                }
                HamiltonianConfig::WeakFieldUniform { phi } => {
                    let _ = writeln!(out, "phi = {phi}");
                }
            }
            let _ = writeln!(out, "x = {}", list(&s.x));
            let _ = writeln!(out, "p = {}", list(&s.p));
            let _ = writeln!(out, "tau = {}", s.tau);
            let _ = writeln!(out, "m = {}", s.m);
            let _ = writeln!(out, "t0 = {}", s.t0);
            let _ = writeln!(out, "t1 = {}", s.t1);
            match s.method {
                MethodConfig::Rk4 { step } => {
                    let _ = writeln!(out, "method = rk4");
                    let _ = writeln!(out, "step = {step}");
                }
                MethodConfig::Rk45 { tol } => {
                    let _ = writeln!(out, "method = rk45");
                    let _ = writeln!(out, "tol = {tol}");
                }
            }
            let _ = writeln!(out, "cadence = {}", s.cadence);
        }
        ScenarioKind::Barycentric(b) => {
            let _ = writeln!(out, "p1 = {}", b.p1);
            let _ = writeln!(out, "m1 = {}", b.m1);
            let _ = writeln!(out, "p2 = {}", b.p2);
            let _ = writeln!(out, "m2 = {}", b.m2);
        }
        ScenarioKind::PhaseLoop(l) => {
            for e in &l.elements {
                match e {
                    LoopElementConfig::Boost(v) => {
                        let _ = writeln!(out, "element = boost {v}");
                    }
                    LoopElementConfig::Wait(t) => {
                        let _ = writeln!(out, "element = wait {t}");
                    }
                    LoopElementConfig::Translate(a) => {
                        let _ = writeln!(out, "element = translate {a}");
                    }
                }
            }
            let _ = writeln!(out, "masses = {}", list(&l.masses));
        }
        ScenarioKind::PhaseCavity(cav) => {
            let _ = writeln!(out, "v = {}", cav.v);
            let _ = writeln!(out, "theta = {}", cav.theta);
            let _ = writeln!(out, "t = {}", cav.t);
        }
        ScenarioKind::PhaseInterfere(i) => {
            let _ = writeln!(out, "t_span = {}", i.t_span);
            let _ = writeln!(out, "branch1 = {}", profile_text(&i.branch1));
            let _ = writeln!(out, "branch2 = {}", profile_text(&i.branch2));
            let _ = writeln!(out, "a1 = {}", i.a1);
            let _ = writeln!(out, "a2 = {}", i.a2);
            let _ = writeln!(out, "masses = {}", list(&i.masses));
            let _ = writeln!(out, "gamma = {}", i.gamma);
        }
        ScenarioKind::UncertaintyGrav(g) => {
            let _ = writeln!(out, "g = {}", g.g);
            let _ = writeln!(out, "m_heavy = {}", g.m_heavy);
            let _ = writeln!(out, "b = {}", g.b);
            if let Some(t) = g.t {
                let _ = writeln!(out, "t = {t}");
            }
            if let Some(v) = g.v {
                let _ = writeln!(out, "v = {v}");
            }
            let _ = writeln!(out, "delta_b = {}", g.delta_b);
            let _ = writeln!(out, "delta_px = {}", g.delta_px);
        }
        ScenarioKind::UncertaintySpectrometer(s) => {
            let _ = writeln!(out, "e = {}", s.e);
            let _ = writeln!(out, "b_field = {}", s.b_field);
            let _ = writeln!(out, "slit = {}", s.slit);
            let _ = writeln!(out, "v = {}", s.v);
            let _ = writeln!(out, "radius = {}", s.radius);
            if let Some(n) = s.monte_carlo {
                let _ = writeln!(out, "monte_carlo = {n}");
            }
        }
        ScenarioKind::OracleLoop(o) => {
            let _ = writeln!(out, "v = {}", o.v);
            let _ = writeln!(out, "wait = {}", o.wait);
            let _ = writeln!(out, "mass = {}", o.mass);
            let _ = writeln!(out, "sigma = {}", o.sigma);
            let _ = writeln!(out, "grid_points = {}", o.grid_points);
            let _ = writeln!(out, "half_width = {}", o.half_width);
            let _ = writeln!(out, "steps_per_unit = {}", o.steps_per_unit);
        }
    }
    out
}
