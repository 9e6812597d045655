//! Quantum-phase constructions: the twin-paradox phase m(t - τ)/ħ, the
//! mass-dependent phase picked up around closed loops of Galilean
//! transformations, the cavity proper-time ambiguity, and interferometer
//! branch phases with optional decay weighting.
//!
//! Conventions pinned here (and validated against the wave-packet oracle):
//!
//! * group elements (v, a, b) compose as
//!   (v, a, b) · (v', a', b') = (v + v', a + a' + v·b', b + b'),
//!   with elements applied left to right (earlier elements compose on the
//!   left);
//! * the phase increment for appending (v', a', b') to an accumulated
//!   (v, a, b) is m (v·a' + v²·b'/2) / ħ;
//! * amplitudes evolve as e^{-i m τ / ħ}; only relative phases are
//!   observable, so the overall sign is a convention.

use crate::error::{Error, Result};
use crate::interp::CubicHermite;
use crate::state::SpatialVec;
use std::f64::consts::TAU as TWO_PI;

/// One leg of a transformation loop: a boost, a spatial translation, or a
/// time translation (realized dynamically as free evolution).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoostLoopElement {
    Boost(f64),
    SpaceTranslate(f64),
    TimeTranslate(f64),
}

/// A Galilei group element in 1D: boost velocity v, spatial offset a,
/// time offset b.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    pub v: f64,
    pub a: f64,
    pub b: f64,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement { v: 0.0, a: 0.0, b: 0.0 };

    pub fn from_element(e: &BoostLoopElement) -> Self {
        match *e {
            BoostLoopElement::Boost(v) => GroupElement { v, a: 0.0, b: 0.0 },
            BoostLoopElement::SpaceTranslate(a) => GroupElement { v: 0.0, a, b: 0.0 },
            BoostLoopElement::TimeTranslate(b) => GroupElement { v: 0.0, a: 0.0, b },
        }
    }

    /// Group law (v,a,b)·(v',a',b') = (v+v', a+a'+v·b', b+b').
    pub fn compose(&self, rhs: &GroupElement) -> GroupElement {
        GroupElement {
            v: self.v + rhs.v,
            a: self.a + rhs.a + self.v * rhs.b,
            b: self.b + rhs.b,
        }
    }

    /// Mass-independent part of the phase increment for appending `rhs`:
    /// v·a' + v²·b'/2.
    pub fn cocycle_functional(&self, rhs: &GroupElement) -> f64 {
        self.v * rhs.a + 0.5 * self.v * self.v * rhs.b
    }
}

/// Wrap an accumulated phase into [0, 2π).
pub fn wrap_phase(unwrapped: f64) -> f64 {
    let w = unwrapped.rem_euclid(TWO_PI);
    if w == TWO_PI {
        0.0
    } else {
        w
    }
}

/// Phase of one mass component: accumulated (unwrapped) and interference-
/// relevant (wrapped to [0, 2π)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseEntry {
    pub mass: f64,
    pub unwrapped: f64,
    pub wrapped: f64,
}

impl PhaseEntry {
    fn new(mass: f64, unwrapped: f64) -> Self {
        PhaseEntry {
            mass,
            unwrapped,
            wrapped: wrap_phase(unwrapped),
        }
    }
}

/// Relative phase between two mass components of a superposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativePhase {
    pub mass_a: f64,
    pub mass_b: f64,
    pub unwrapped: f64,
    pub wrapped: f64,
}

/// Per-mass phases, pairwise relative phases, and an optional hypothesis
/// label for quantities whose physical status is left open.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhaseReport {
    pub entries: Vec<PhaseEntry>,
    pub relative: Vec<RelativePhase>,
    pub hypothesis: Option<String>,
}

impl PhaseReport {
    fn from_functional(masses: &[f64], functional: f64, hbar: f64) -> Self {
        let entries: Vec<PhaseEntry> = masses
            .iter()
            .map(|&m| PhaseEntry::new(m, m * functional / hbar))
            .collect();
        let mut relative = Vec::new();
        for i in 0..entries.len() {
            for j in i + 1..entries.len() {
                let delta = (entries[j].mass - entries[i].mass) * functional / hbar;
                relative.push(RelativePhase {
                    mass_a: entries[i].mass,
                    mass_b: entries[j].mass,
                    unwrapped: delta,
                    wrapped: wrap_phase(delta),
                });
            }
        }
        PhaseReport {
            entries,
            relative,
            hypothesis: None,
        }
    }
}

/// The phase m(t - τ)/ħ between a traveled amplitude and a stationary one.
/// Offsets with τ > t are allowed; clocks may be reset independently.
pub fn twin_phase(mass: f64, t: f64, tau: f64, hbar: f64) -> Result<f64> {
    if !(hbar > 0.0) {
        return Err(Error::Precondition(format!("hbar must be positive, got {hbar}")));
    }
    Ok(mass * (t - tau) / hbar)
}

/// Result of composing a transformation loop: the accumulated phases per
/// mass, the mass-independent loop functional, and the residual group
/// element (a pure translation; a residual boost is an error).
#[derive(Debug, Clone, PartialEq)]
pub struct LoopComposition {
    pub report: PhaseReport,
    /// Σ (v·a' + v²·b'/2) along the loop; each mass accumulates m·functional/ħ.
    pub functional: f64,
    pub residual: GroupElement,
}

/// Fold a sequence of loop elements, accumulating the central-extension
/// phase for each mass in `masses`.
///
/// The composed element must be the identity up to a residual spatial/time
/// translation (which a caller may close explicitly with further elements);
/// a residual boost leaves the frames inequivalent and is rejected.
pub fn compose_loop(
    elements: &[BoostLoopElement],
    masses: &[f64],
    hbar: f64,
) -> Result<LoopComposition> {
    if !(hbar > 0.0) {
        return Err(Error::Precondition(format!("hbar must be positive, got {hbar}")));
    }
    if masses.is_empty() {
        return Err(Error::Precondition("need at least one mass".into()));
    }
    let mut g = GroupElement::IDENTITY;
    let mut functional = 0.0;
    for e in elements {
        let ge = GroupElement::from_element(e);
        functional += g.cocycle_functional(&ge);
        g = g.compose(&ge);
    }
    if g.v.abs() > 1e-12 {
        return Err(Error::NonClosingLoop { v: g.v });
    }
    Ok(LoopComposition {
        report: PhaseReport::from_functional(masses, functional, hbar),
        functional,
        residual: g,
    })
}

/// A wave trapped in a cavity at angle θ between the incident wavevector
/// and the cavity axis: component waves move at speed v while the composite
/// pattern moves at v·cosθ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityScenario {
    pub v: f64,
    pub theta: f64,
    pub t: f64,
}

impl CavityScenario {
    pub fn new(v: f64, theta: f64, t: f64) -> Result<Self> {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::Precondition(format!("cavity wave speed needs 0 < v < 1, got {v}")));
        }
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(Error::Precondition(format!(
                "cavity angle needs 0 <= theta <= pi/2, got {theta}"
            )));
        }
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Precondition(format!("elapsed time must be >= 0, got {t}")));
        }
        Ok(CavityScenario { v, theta, t })
    }
}

/// The two proper-time hypotheses for a trapped wave. Which one a clock
/// would actually read is an open experimental question; this reports both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityProperTimes {
    /// √(1 - v²)·t — each component wave keeps its own clock ("momentum
    /// trumps velocity").
    pub component: f64,
    /// √(1 - v²cos²θ)·t — the composite pattern moves at v·cosθ.
    pub composite: f64,
    /// composite - component (nonnegative, zero only at θ = 0).
    pub difference: f64,
}

impl CavityProperTimes {
    pub const COMPONENT_LABEL: &'static str = "component-wave";
    pub const COMPOSITE_LABEL: &'static str = "composite-wave";
}

pub fn cavity_proper_times(s: &CavityScenario) -> CavityProperTimes {
    let cos = s.theta.cos();
    let component = (1.0 - s.v * s.v).sqrt() * s.t;
    let composite = (1.0 - s.v * s.v * cos * cos).sqrt() * s.t;
    CavityProperTimes {
        component,
        composite,
        difference: composite - component,
    }
}

/// The averaged wavevector of a mirror-reflected pair and the half-angle it
/// makes with either component; |k₃| = |k₁|·cosθ holds by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeWave {
    pub k3: SpatialVec,
    /// Angle between k₁ and the bisector direction of the pair.
    pub theta: f64,
    /// |k₃| - |k₁|cosθ, reported as a consistency check.
    pub magnitude_check: f64,
}

/// k₃ = (k₁ + k₂)/2 for a pair of equal-magnitude wavevectors.
pub fn composite_wavevector(k1: &SpatialVec, k2: &SpatialVec) -> Result<CompositeWave> {
    if k1.dim() != k2.dim() {
        return Err(Error::Precondition(format!(
            "wavevector dimensions differ: {} vs {}",
            k1.dim(),
            k2.dim()
        )));
    }
    let (n1, n2) = (k1.norm(), k2.norm());
    if (n1 - n2).abs() > 1e-9 * n1.max(n2).max(1.0) {
        return Err(Error::Precondition(format!(
            "|k1| = {n1} and |k2| = {n2} must match to 1e-9 (mirror-reflected pair)"
        )));
    }
    let k3 = k1.add(k2).scaled(0.5);
    let n3 = k3.norm();
    let theta = if n3 == 0.0 || n1 == 0.0 {
        std::f64::consts::FRAC_PI_2
    } else {
        (k1.dot(&k3) / (n1 * n3)).clamp(-1.0, 1.0).acos()
    };
    Ok(CompositeWave {
        k3,
        theta,
        magnitude_check: n3 - n1 * theta.cos(),
    })
}

/// A branch velocity history v(t) over a lab span.
#[derive(Debug, Clone, PartialEq)]
pub enum VelocityProfile {
    Constant(f64),
    /// (velocity, duration) segments covering the span in order.
    Piecewise(Vec<(f64, f64)>),
    /// Sampled v(tᵢ) on a strictly increasing grid over [0, T], interpolated
    /// with a C¹ cubic and integrated by refining Simpson quadrature.
    Tabulated { times: Vec<f64>, velocities: Vec<f64> },
}

impl VelocityProfile {
    fn check_speed(v: f64) -> Result<()> {
        if !(v.abs() < 1.0) {
            return Err(Error::Domain(format!("|v| must stay below 1, got {v}")));
        }
        Ok(())
    }
}

fn simpson<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64, intervals: usize) -> Result<f64> {
    debug_assert!(intervals >= 2 && intervals % 2 == 0);
    let h = (b - a) / intervals as f64;
    let mut acc = f(a)? + f(b)?;
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h)?;
    }
    Ok(acc * h / 3.0)
}

fn refining_simpson<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64) -> Result<f64> {
    let mut n = 64;
    let mut prev = simpson(f, a, b, n)?;
    loop {
        n *= 2;
        let cur = simpson(f, a, b, n)?;
        if (cur - prev).abs() <= 1e-12 * cur.abs().max(1.0) {
            return Ok(cur);
        }
        if n >= 1 << 20 {
            return Err(Error::Domain("quadrature did not converge".into()));
        }
        prev = cur;
    }
}

/// Proper time τ = ∫₀ᵀ √(1 - v(t)²) dt accumulated along one branch.
pub fn branch_proper_time(profile: &VelocityProfile, t_span: f64) -> Result<f64> {
    if !(t_span >= 0.0) || !t_span.is_finite() {
        return Err(Error::Precondition(format!("lab span must be >= 0, got {t_span}")));
    }
    match profile {
        VelocityProfile::Constant(v) => {
            VelocityProfile::check_speed(*v)?;
            Ok((1.0 - v * v).sqrt() * t_span)
        }
        VelocityProfile::Piecewise(segments) => {
            if segments.is_empty() {
                return Err(Error::Precondition("piecewise profile needs segments".into()));
            }
            let mut total_dur = 0.0;
            let mut tau = 0.0;
            for &(v, dur) in segments {
                VelocityProfile::check_speed(v)?;
                if !(dur >= 0.0) {
                    return Err(Error::Precondition(format!("segment duration must be >= 0, got {dur}")));
                }
                tau += (1.0 - v * v).sqrt() * dur;
                total_dur += dur;
            }
            if (total_dur - t_span).abs() > 1e-9 * t_span.max(1.0) {
                return Err(Error::Precondition(format!(
                    "segment durations sum to {total_dur}, expected lab span {t_span}"
                )));
            }
            Ok(tau)
        }
        VelocityProfile::Tabulated { times, velocities } => {
            for &v in velocities {
                VelocityProfile::check_speed(v)?;
            }
            let spline = CubicHermite::new(times.clone(), velocities.clone())?;
            if spline.min_x() != 0.0 || (spline.max_x() - t_span).abs() > 1e-9 * t_span.max(1.0) {
                return Err(Error::Precondition(format!(
                    "tabulated profile must cover [0, {t_span}], got [{}, {}]",
                    spline.min_x(),
                    spline.max_x()
                )));
            }
            let integrand = |t: f64| -> Result<f64> {
                let v = spline.eval(t.clamp(0.0, spline.max_x()))?;
                let arg = 1.0 - v * v;
                if arg <= 0.0 {
                    return Err(Error::Domain(format!("|v| reached 1 at t = {t}")));
                }
                Ok(arg.sqrt())
            };
            refining_simpson(&integrand, 0.0, t_span)
        }
    }
}

/// A two-branch interferometer: equal lab spans, velocity profiles per
/// branch, recombination amplitudes, one or more mass components, and an
/// optional decay width Γ.
///
/// Geometric path-length compensation is abstracted into the equal-lab-time
/// premise; the beam geometry itself is not modeled.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferometerScenario {
    pub t_span: f64,
    pub branch1: VelocityProfile,
    pub branch2: VelocityProfile,
    pub amplitude1: f64,
    pub amplitude2: f64,
    pub masses: Vec<f64>,
    pub gamma: f64,
}

impl InterferometerScenario {
    pub fn new(
        t_span: f64,
        branch1: VelocityProfile,
        branch2: VelocityProfile,
        amplitude1: f64,
        amplitude2: f64,
        masses: Vec<f64>,
        gamma: f64,
    ) -> Result<Self> {
        let norm = amplitude1 * amplitude1 + amplitude2 * amplitude2;
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Precondition(format!(
                "|a1|^2 + |a2|^2 must equal 1, got {norm}"
            )));
        }
        if masses.is_empty() || masses.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::Precondition("need at least one positive mass".into()));
        }
        if !(gamma >= 0.0) {
            return Err(Error::Precondition(format!("decay width must be >= 0, got {gamma}")));
        }
        Ok(InterferometerScenario {
            t_span,
            branch1,
            branch2,
            amplitude1,
            amplitude2,
            masses,
            gamma,
        })
    }
}

/// Interference outcome for one mass component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassInterference {
    pub mass: f64,
    /// |a₁e^{-imτ₁/ħ - Γτ₁/2} + a₂e^{-imτ₂/ħ - Γτ₂/2}|², normalized so the
    /// no-decay constructive case reads 1.
    pub intensity: f64,
    /// Survival-weighted fringe contrast 2A₁A₂/(A₁² + A₂²).
    pub visibility: f64,
    /// A₁² + A₂²: the probability that the (possibly decaying) particle
    /// reaches the detector at all.
    pub survival: f64,
}

/// Detector-side result: branch proper times, per-mass interference, and a
/// phase report. Mass components add incoherently with equal weight.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceResult {
    pub tau1: f64,
    pub tau2: f64,
    pub intensity: f64,
    pub components: Vec<MassInterference>,
    pub report: PhaseReport,
}

pub const PROPER_TIME_PHASE_HYPOTHESIS: &str = "model prediction under proper-time-phase hypothesis";

/// Recombine the two branches. Each branch contributes
/// aᵢ·e^{-i m τᵢ/ħ}·e^{-Γτᵢ/2}; whether branch amplitudes of an unstable
/// particle really interfere like this is experimentally open, so the
/// report is labeled as a hypothesis.
pub fn interference_intensity(s: &InterferometerScenario, hbar: f64) -> Result<InterferenceResult> {
    if !(hbar > 0.0) {
        return Err(Error::Precondition(format!("hbar must be positive, got {hbar}")));
    }
    let tau1 = branch_proper_time(&s.branch1, s.t_span)?;
    let tau2 = branch_proper_time(&s.branch2, s.t_span)?;
    let a1 = s.amplitude1.abs();
    let a2 = s.amplitude2.abs();
    let norm = (a1 + a2) * (a1 + a2);
    let big_a1 = a1 * (-s.gamma * tau1 / 2.0).exp();
    let big_a2 = a2 * (-s.gamma * tau2 / 2.0).exp();

    let mut components = Vec::with_capacity(s.masses.len());
    for &m in &s.masses {
        let phi1 = m * tau1 / hbar;
        let phi2 = m * tau2 / hbar;
        // |A1 e^{-i phi1} + A2 e^{-i phi2}|^2
        let re = big_a1 * phi1.cos() + big_a2 * phi2.cos();
        let im = big_a1 * phi1.sin() + big_a2 * phi2.sin();
        let intensity = (re * re + im * im) / norm;
        let denom = big_a1 * big_a1 + big_a2 * big_a2;
        let visibility = if denom > 0.0 { 2.0 * big_a1 * big_a2 / denom } else { 0.0 };
        components.push(MassInterference {
            mass: m,
            intensity,
            visibility,
            survival: denom,
        });
    }
    let intensity = components.iter().map(|c| c.intensity).sum::<f64>() / components.len() as f64;

    // branch-relative phase per mass: m (tau1 - tau2) / hbar
    let mut report = PhaseReport::from_functional(&s.masses, tau1 - tau2, hbar);
    report.hypothesis = Some(PROPER_TIME_PHASE_HYPOTHESIS.to_string());
    Ok(InterferenceResult {
        tau1,
        tau2,
        intensity,
        components,
        report,
    })
}
