//! Extended Hamiltonians H(x, p; τ, m) with analytic partials in all four
//! variables, plus a finite-difference audit that every shipped Hamiltonian
//! must pass.
//!
//! The extended equations of motion pair (x, p) as usual and (τ, m) as a
//! second conjugate pair:
//!
//! ```text
//!   ẋ = ∂H/∂p     ṗ = -∂H/∂x
//!   τ̇ = ∂H/∂m     ṁ = -∂H/∂τ
//! ```
//!
//! so a potential that depends on proper time drives mass change, and the
//! proper-time rate τ̇ = √(1 - v²) of a free particle comes out of the
//! dynamics instead of being imposed geometrically.

use crate::barycentric::TwoParticleState;
use crate::error::{Error, Result};
use crate::interp::CubicHermite;
use crate::state::{ExtendedState, SpatialVec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A named Hamiltonian over extended phase space, differentiable in
/// position, momentum, proper time, and mass.
pub trait Hamiltonian {
    fn name(&self) -> &'static str;

    fn eval(&self, s: &ExtendedState) -> Result<f64>;
    fn dh_dx(&self, s: &ExtendedState) -> Result<SpatialVec>;
    fn dh_dp(&self, s: &ExtendedState) -> Result<SpatialVec>;
    fn dh_dtau(&self, s: &ExtendedState) -> Result<f64>;
    fn dh_dm(&self, s: &ExtendedState) -> Result<f64>;

    /// Velocity ẋ = ∂H/∂p.
    fn velocity(&self, s: &ExtendedState) -> Result<SpatialVec> {
        self.dh_dp(s)
    }

    /// Proper-time rate τ̇ = ∂H/∂m.
    fn proper_time_rate(&self, s: &ExtendedState) -> Result<f64> {
        self.dh_dm(s)
    }

    /// True when τ(t) = τ₀ + √(1 - v²)(t - t₀) holds in closed form, so an
    /// integration audit can compare against it.
    fn free_tau_geometry(&self) -> bool {
        false
    }
}

fn free_energy(p: &SpatialVec, m: f64) -> Result<f64> {
    let e_sq = p.norm_sq() + m * m;
    if e_sq == 0.0 {
        return Err(Error::Domain(
            "free relativistic Hamiltonian is singular at p = 0, m = 0".into(),
        ));
    }
    Ok(e_sq.sqrt())
}

/// H = √(p² + m²): the free relativistic Hamiltonian, symmetric in p and m.
///
/// ∂H/∂p = p/H gives the velocity, ∂H/∂m = m/H = √(1 - v²) the clock rate.
#[derive(Debug, Clone, Copy, Default)]
pub struct FreeRelativistic;

pub fn free_relativistic() -> FreeRelativistic {
    FreeRelativistic
}

impl Hamiltonian for FreeRelativistic {
    fn name(&self) -> &'static str {
        "free_relativistic"
    }

    fn eval(&self, s: &ExtendedState) -> Result<f64> {
        free_energy(&s.p, s.m)
    }

    fn dh_dx(&self, s: &ExtendedState) -> Result<SpatialVec> {
        Ok(SpatialVec::zeros(s.dim()))
    }

    fn dh_dp(&self, s: &ExtendedState) -> Result<SpatialVec> {
        let e = free_energy(&s.p, s.m)?;
        Ok(s.p.scaled(1.0 / e))
    }

    fn dh_dtau(&self, _s: &ExtendedState) -> Result<f64> {
        Ok(0.0)
    }

    fn dh_dm(&self, s: &ExtendedState) -> Result<f64> {
        let e = free_energy(&s.p, s.m)?;
        Ok(s.m / e)
    }

    fn free_tau_geometry(&self) -> bool {
        true
    }
}

/// A potential φ(τ) whose slope drives mass change, ṁ = -φ'(τ).
///
/// The linear form has a closed-form solution (constant rest-frame mass
/// loss); the tabulated form interpolates with a C¹ cubic so the slope that
/// feeds the integrator is continuous.
#[derive(Debug, Clone, PartialEq)]
pub enum TauPotential {
    Linear { rate: f64 },
    Tabulated(CubicHermite),
}

impl TauPotential {
    pub fn linear(rate: f64) -> Self {
        TauPotential::Linear { rate }
    }

    pub fn tabulated(taus: Vec<f64>, phis: Vec<f64>) -> Result<Self> {
        Ok(TauPotential::Tabulated(CubicHermite::new(taus, phis)?))
    }

    pub fn value(&self, tau: f64) -> Result<f64> {
        match self {
            TauPotential::Linear { rate } => Ok(rate * tau),
            TauPotential::Tabulated(c) => c.eval(tau),
        }
    }

    pub fn slope(&self, tau: f64) -> Result<f64> {
        match self {
            TauPotential::Linear { rate } => Ok(*rate),
            TauPotential::Tabulated(c) => c.derivative(tau),
        }
    }
}

/// H = √(p² + m²) + φ(τ): a free particle with a proper-time potential,
/// the minimal classical model of a decaying mass.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeWithTauPotential {
    potential: TauPotential,
}

pub fn free_with_tau_potential(potential: TauPotential) -> FreeWithTauPotential {
    FreeWithTauPotential { potential }
}

impl FreeWithTauPotential {
    pub fn potential(&self) -> &TauPotential {
        &self.potential
    }
}

impl Hamiltonian for FreeWithTauPotential {
    fn name(&self) -> &'static str {
        match self.potential {
            TauPotential::Linear { .. } => "free_with_linear_tau_potential",
            TauPotential::Tabulated(_) => "free_with_tabulated_tau_potential",
        }
    }

    fn eval(&self, s: &ExtendedState) -> Result<f64> {
        Ok(free_energy(&s.p, s.m)? + self.potential.value(s.tau)?)
    }

    fn dh_dx(&self, s: &ExtendedState) -> Result<SpatialVec> {
        Ok(SpatialVec::zeros(s.dim()))
    }

    fn dh_dp(&self, s: &ExtendedState) -> Result<SpatialVec> {
        FreeRelativistic.dh_dp(s)
    }

    fn dh_dtau(&self, s: &ExtendedState) -> Result<f64> {
        self.potential.slope(s.tau)
    }

    fn dh_dm(&self, s: &ExtendedState) -> Result<f64> {
        FreeRelativistic.dh_dm(s)
    }
}

/// A weak gravitational potential entering through g₀₀ = 1 + 2φ.
/// Dimensionless, restricted to |2φ| < 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakFieldPotential {
    phi: f64,
}

impl WeakFieldPotential {
    pub fn uniform(phi: f64) -> Result<Self> {
        if !phi.is_finite() || 2.0 * phi.abs() >= 1.0 {
            return Err(Error::Precondition(format!(
                "weak-field potential needs |2*phi| < 1, got phi = {phi}"
            )));
        }
        Ok(WeakFieldPotential { phi })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Clock rate in a weak field: dτ/dt = √(1 + 2φ - v²).
///
/// A uniform shell of potential exerts no force yet resets this rate, which
/// is what makes τ̇ independently adjustable. The nonrelativistic expansion
/// is (1 - v²/2 + φ) dt.
pub fn weak_field_rate(v: f64, phi: f64) -> Result<f64> {
    let arg = 1.0 + 2.0 * phi - v * v;
    if arg <= 0.0 {
        return Err(Error::Domain(format!(
            "1 + 2*phi - v^2 = {arg} must be positive (phi = {phi}, v = {v})"
        )));
    }
    Ok(arg.sqrt())
}

/// H = √(1 + 2φ) · √(p² + m²): a free particle inside a uniform weak-field
/// shell. There is no force (∂H/∂x = 0) but the clock rate becomes
/// ∂H/∂m = √(1 + 2φ - v²) with v the coordinate velocity ∂H/∂p.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakFieldUniform {
    phi: f64,
    factor: f64,
}

impl WeakFieldUniform {
    pub fn new(potential: WeakFieldPotential) -> Self {
        let phi = potential.phi();
        WeakFieldUniform {
            phi,
            factor: (1.0 + 2.0 * phi).sqrt(),
        }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

impl Hamiltonian for WeakFieldUniform {
    fn name(&self) -> &'static str {
        "weak_field_uniform"
    }

    fn eval(&self, s: &ExtendedState) -> Result<f64> {
        Ok(self.factor * free_energy(&s.p, s.m)?)
    }

    fn dh_dx(&self, s: &ExtendedState) -> Result<SpatialVec> {
        Ok(SpatialVec::zeros(s.dim()))
    }

    fn dh_dp(&self, s: &ExtendedState) -> Result<SpatialVec> {
        Ok(FreeRelativistic.dh_dp(s)?.scaled(self.factor))
    }

    fn dh_dtau(&self, _s: &ExtendedState) -> Result<f64> {
        Ok(0.0)
    }

    fn dh_dm(&self, s: &ExtendedState) -> Result<f64> {
        Ok(self.factor * FreeRelativistic.dh_dm(s)?)
    }
}

/// H = √(p₁² + m₁²) + √(p₂² + m₂²): two free particles, 1D momenta.
///
/// The interesting derived quantities (total P, total E, invariant mass)
/// live in the barycentric module; this type supplies the energy surface
/// and its analytic partials.
#[derive(Debug, Clone, Copy, Default)]
pub struct TwoParticleFree;

pub fn two_particle_free() -> TwoParticleFree {
    TwoParticleFree
}

/// Gradient of the two-particle Hamiltonian in (p₁, m₁, p₂, m₂).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoParticlePartials {
    pub dp1: f64,
    pub dm1: f64,
    pub dp2: f64,
    pub dm2: f64,
}

impl TwoParticleFree {
    pub fn name(&self) -> &'static str {
        "two_particle_free"
    }

    pub fn eval(&self, s: &TwoParticleState) -> Result<f64> {
        let e1 = free_energy(&SpatialVec::scalar(s.p1), s.m1)?;
        let e2 = free_energy(&SpatialVec::scalar(s.p2), s.m2)?;
        Ok(e1 + e2)
    }

    pub fn total_momentum(&self, s: &TwoParticleState) -> f64 {
        s.p1 + s.p2
    }

    pub fn total_energy(&self, s: &TwoParticleState) -> Result<f64> {
        self.eval(s)
    }

    pub fn partials(&self, s: &TwoParticleState) -> Result<TwoParticlePartials> {
        let e1 = free_energy(&SpatialVec::scalar(s.p1), s.m1)?;
        let e2 = free_energy(&SpatialVec::scalar(s.p2), s.m2)?;
        Ok(TwoParticlePartials {
            dp1: s.p1 / e1,
            dm1: s.m1 / e1,
            dp2: s.p2 / e2,
            dm2: s.m2 / e2,
        })
    }
}

/// Outcome of a finite-difference audit of analytic partials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditReport {
    pub samples: usize,
    pub max_rel_err: f64,
}

fn central_diff(mut f: impl FnMut(f64) -> Result<f64>, x: f64, h: f64) -> Result<f64> {
    Ok((f(x + h)? - f(x - h)?) / (2.0 * h))
}

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0)
}

fn fd_step(coord: f64) -> f64 {
    1e-5 * coord.abs().max(1.0)
}

/// Check a Hamiltonian's analytic partials against central finite
/// differences at `samples` states drawn from `sampler`. Relative error is
/// measured against max(|analytic|, |numeric|, 1).
pub fn audit_partials(
    h: &dyn Hamiltonian,
    mut sampler: impl FnMut(&mut ChaCha8Rng) -> ExtendedState,
    samples: usize,
    seed: u64,
) -> Result<AuditReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_err: f64 = 0.0;
    for _ in 0..samples {
        let s = sampler(&mut rng);
        let dim = s.dim();

        let ax = h.dh_dx(&s)?;
        let ap = h.dh_dp(&s)?;
        for i in 0..dim {
            let fd = central_diff(
                |v| {
                    let mut q = s;
                    let mut comps = [0.0; 3];
                    comps[..dim].copy_from_slice(q.x.as_slice());
                    comps[i] = v;
                    q.x = SpatialVec::from_slice(&comps[..dim]);
                    h.eval(&q)
                },
                s.x[i],
                fd_step(s.x[i]),
            )?;
            max_err = max_err.max(rel_err(ax[i], fd));

            let fd = central_diff(
                |v| {
                    let mut q = s;
                    let mut comps = [0.0; 3];
                    comps[..dim].copy_from_slice(q.p.as_slice());
                    comps[i] = v;
                    q.p = SpatialVec::from_slice(&comps[..dim]);
                    h.eval(&q)
                },
                s.p[i],
                fd_step(s.p[i]),
            )?;
            max_err = max_err.max(rel_err(ap[i], fd));
        }

        let a_tau = h.dh_dtau(&s)?;
        let fd_tau = central_diff(
            |v| {
                let mut q = s;
                q.tau = v;
                h.eval(&q)
            },
            s.tau,
            fd_step(s.tau).min(0.05),
        )?;
        max_err = max_err.max(rel_err(a_tau, fd_tau));

        let a_m = h.dh_dm(&s)?;
        let fd_m = central_diff(
            |v| {
                let mut q = s;
                q.m = v;
                h.eval(&q)
            },
            s.m,
            (0.25 * s.m).min(fd_step(s.m)),
        )?;
        max_err = max_err.max(rel_err(a_m, fd_m));
    }
    Ok(AuditReport { samples, max_rel_err: max_err })
}

/// Same audit for the two-particle energy surface, over (p₁, m₁, p₂, m₂).
pub fn audit_two_particle_partials(
    h: &TwoParticleFree,
    mut sampler: impl FnMut(&mut ChaCha8Rng) -> TwoParticleState,
    samples: usize,
    seed: u64,
) -> Result<AuditReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_err: f64 = 0.0;
    for _ in 0..samples {
        let s = sampler(&mut rng);
        let a = h.partials(&s)?;
        let coords: [(f64, f64, fn(&TwoParticleState, f64) -> TwoParticleState); 4] = [
            (a.dp1, s.p1, |s, v| TwoParticleState { p1: v, ..*s }),
            (a.dm1, s.m1, |s, v| TwoParticleState { m1: v, ..*s }),
            (a.dp2, s.p2, |s, v| TwoParticleState { p2: v, ..*s }),
            (a.dm2, s.m2, |s, v| TwoParticleState { m2: v, ..*s }),
        ];
        for (analytic, coord, replace) in coords {
            let step = if coord == s.m1 || coord == s.m2 {
                (0.25 * coord).min(fd_step(coord))
            } else {
                fd_step(coord)
            };
            let fd = central_diff(|v| h.eval(&replace(&s, v)), coord, step)?;
            max_err = max_err.max(rel_err(analytic, fd));
        }
    }
    Ok(AuditReport { samples, max_rel_err: max_err })
}

/// Random non-singular extended state for audits: masses well away from
/// zero, momenta and positions O(1), τ within `tau_range`.
pub fn random_state(rng: &mut ChaCha8Rng, dim: usize, tau_range: (f64, f64)) -> ExtendedState {
    let mut comps = |lo: f64, hi: f64| {
        let mut c = [0.0; 3];
        for v in c.iter_mut().take(dim) {
            *v = rng.random_range(lo..hi);
        }
        SpatialVec::from_slice(&c[..dim])
    };
    let x = comps(-3.0, 3.0);
    let p = comps(-3.0, 3.0);
    let tau = rng.random_range(tau_range.0..tau_range.1);
    let m = rng.random_range(0.2..3.0);
    ExtendedState { t: 0.0, x, p, tau, m }
}

/// Random non-singular two-particle state for audits.
pub fn random_two_particle(rng: &mut ChaCha8Rng) -> TwoParticleState {
    TwoParticleState {
        p1: rng.random_range(-3.0..3.0),
        m1: rng.random_range(0.2..3.0),
        p2: rng.random_range(-3.0..3.0),
        m2: rng.random_range(0.2..3.0),
    }
}
