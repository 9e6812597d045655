//! Two-particle relativistic kinematics in 1D: Lorentz boosts, the
//! barycentric (zero-total-momentum) frame, and the invariant mass with its
//! nonrelativistic limit.
//!
//! The invariant mass M of a pair is the total energy in the barycentric
//! frame, M = √(m₁² + m₂² + 2(E₁E₂ - p₁p₂)), satisfying E = √(P² + M²) in
//! every frame. It contains the relative kinetic energy (and would contain
//! binding energy) but excludes the center-of-mass motion.

use crate::error::{Error, Result};

/// Two free particles with 1D momenta and nominal masses; energies are
/// derived as Eᵢ = √(pᵢ² + mᵢ²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoParticleState {
    pub p1: f64,
    pub m1: f64,
    pub p2: f64,
    pub m2: f64,
}

impl TwoParticleState {
    pub fn new(p1: f64, m1: f64, p2: f64, m2: f64) -> Result<Self> {
        if !(m1 >= 0.0) || !(m2 >= 0.0) {
            return Err(Error::Precondition(format!(
                "nominal masses must be nonnegative, got m1 = {m1}, m2 = {m2}"
            )));
        }
        Ok(TwoParticleState { p1, m1, p2, m2 })
    }

    pub fn e1(&self) -> f64 {
        (self.p1 * self.p1 + self.m1 * self.m1).sqrt()
    }

    pub fn e2(&self) -> f64 {
        (self.p2 * self.p2 + self.m2 * self.m2).sqrt()
    }

    pub fn total_energy(&self) -> f64 {
        self.e1() + self.e2()
    }

    pub fn total_momentum(&self) -> f64 {
        self.p1 + self.p2
    }
}

/// Result of boosting a total (E, P) pair with velocity V.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostResult {
    pub e_prime: f64,
    pub p_prime: f64,
    pub velocity: f64,
    pub gamma: f64,
}

/// Lorentz-boost total energy and momentum: P' = γ(P - VE), E' = γ(E - VP).
pub fn lorentz_boost(energy: f64, momentum: f64, velocity: f64) -> Result<BoostResult> {
    if !(velocity.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "boost velocity |V| must be < 1, got {velocity}"
        )));
    }
    let gamma = 1.0 / (1.0 - velocity * velocity).sqrt();
    Ok(BoostResult {
        e_prime: gamma * (energy - velocity * momentum),
        p_prime: gamma * (momentum - velocity * energy),
        velocity,
        gamma,
    })
}

/// Velocity V = P/E of the frame in which the pair's total momentum vanishes.
pub fn barycentric_velocity(s: &TwoParticleState) -> Result<f64> {
    let e = s.total_energy();
    if !(e > 0.0) {
        return Err(Error::Precondition("total energy must be positive".into()));
    }
    Ok(s.total_momentum() / e)
}

/// Invariant mass via the explicit two-particle formula,
/// M = √(m₁² + m₂² + 2(E₁E₂ - p₁p₂)).
///
/// This form avoids the catastrophic cancellation that E² - P² suffers at
/// small relative momentum; the equivalence of the two routes is a test.
pub fn invariant_mass(s: &TwoParticleState) -> f64 {
    let cross = s.e1() * s.e2() - s.p1 * s.p2;
    (s.m1 * s.m1 + s.m2 * s.m2 + 2.0 * cross).sqrt()
}

/// Nonrelativistic limit of the invariant mass: m₁ + m₂ + p²/2μ with the
/// reduced mass μ = m₁m₂/(m₁+m₂) and relative momentum p = μ(v₁ - v₂),
/// velocities taken as vᵢ = pᵢ/Eᵢ. Valid for |vᵢ| ≪ 1 (documented, not
/// enforced).
pub fn nr_limit_mass(s: &TwoParticleState) -> Result<f64> {
    let (e1, e2) = (s.e1(), s.e2());
    if !(e1 > 0.0 && e2 > 0.0) {
        return Err(Error::Precondition("per-particle energies must be positive".into()));
    }
    let msum = s.m1 + s.m2;
    if !(msum > 0.0) {
        return Err(Error::Precondition("m1 + m2 must be positive".into()));
    }
    let mu = s.m1 * s.m2 / msum;
    let v1 = s.p1 / e1;
    let v2 = s.p2 / e2;
    let p_rel = mu * (v1 - v2);
    Ok(msum + p_rel * p_rel / (2.0 * mu))
}

/// Boost both particles by V; nominal masses are frame-invariant so only
/// the momenta change.
pub fn boost_two_particle(s: &TwoParticleState, velocity: f64) -> Result<TwoParticleState> {
    let b1 = lorentz_boost(s.e1(), s.p1, velocity)?;
    let b2 = lorentz_boost(s.e2(), s.p2, velocity)?;
    Ok(TwoParticleState {
        p1: b1.p_prime,
        m1: s.m1,
        p2: b2.p_prime,
        m2: s.m2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_boost_is_identity() {
        let b = lorentz_boost(5.0, 4.0, 0.0).unwrap();
        assert_eq!((b.e_prime, b.p_prime, b.gamma), (5.0, 4.0, 1.0));
    }

    #[test]
    fn boost_345_lands_in_rest_frame() {
        // E = 5, P = 4 is a 3-4-5 mass shell; V = P/E = 0.8 kills the momentum.
        let b = lorentz_boost(5.0, 4.0, 0.8).unwrap();
        assert!(b.p_prime.abs() < 1e-12);
        assert_relative_eq!(b.e_prime, 3.0, max_relative = 1e-12);
        assert_relative_eq!(
            b.e_prime * b.e_prime - b.p_prime * b.p_prime,
            9.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn boost_rejects_superluminal() {
        assert!(lorentz_boost(1.0, 0.0, 1.0).is_err());
        assert!(lorentz_boost(1.0, 0.0, -1.2).is_err());
    }

    #[test]
    fn barycentric_velocity_examples() {
        let sym = TwoParticleState::new(1.0, 1.0, -1.0, 1.0).unwrap();
        assert_eq!(barycentric_velocity(&sym).unwrap(), 0.0);

        let mixed = TwoParticleState::new(4.0, 3.0, 0.0, 5.0).unwrap();
        assert_relative_eq!(barycentric_velocity(&mixed).unwrap(), 0.4, max_relative = 1e-15);

        // heavy spectator: V -> 0 as m2 grows
        let heavy = TwoParticleState::new(1.0, 1.0, 0.0, 1e6).unwrap();
        assert!(barycentric_velocity(&heavy).unwrap() < 2e-6);
    }

    #[test]
    fn invariant_mass_examples() {
        let rest = TwoParticleState::new(0.0, 1.5, 0.0, 2.5).unwrap();
        assert_eq!(invariant_mass(&rest), 4.0);

        let pair = TwoParticleState::new(1.0, 1.0, -1.0, 1.0).unwrap();
        assert_relative_eq!(invariant_mass(&pair), 8f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn invariant_mass_small_momentum_matches_nr_form() {
        let s = TwoParticleState::new(0.01, 1.0, -0.01, 1.0).unwrap();
        let m = invariant_mass(&s);
        assert!((m - 2.0001).abs() < 1e-7);
    }

    #[test]
    fn nr_mass_from_equal_and_opposite_velocities() {
        // v1 = -v2 = 0.01: mu = 1/2, p = mu * 0.02 = 0.01, M_nr = 2 + p^2/(2 mu)
        let v = 0.01f64;
        let p = v / (1.0 - v * v).sqrt();
        let s = TwoParticleState::new(p, 1.0, -p, 1.0).unwrap();
        assert_relative_eq!(nr_limit_mass(&s).unwrap(), 2.0001, max_relative = 1e-12);
    }

    #[test]
    fn nr_mass_no_relative_motion() {
        let s = TwoParticleState::new(0.0, 1.0, 0.0, 3.0).unwrap();
        assert_eq!(nr_limit_mass(&s).unwrap(), 4.0);
    }

    #[test]
    fn nr_error_scales_as_fourth_power() {
        // halving the relative momentum cuts |M_exact - M_NR| by ~16x
        let err = |q: f64| {
            let s = TwoParticleState::new(q, 1.0, -q, 1.0).unwrap();
            (invariant_mass(&s) - nr_limit_mass(&s).unwrap()).abs()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((ratio - 16.0).abs() < 0.5, "ratio {ratio}");
    }

    #[test]
    fn frame_invariance_and_com_exclusion() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let s = TwoParticleState::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(0.2..3.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(0.2..3.0),
            )
            .unwrap();
            let m = invariant_mass(&s);
            assert!(m >= s.m1 + s.m2 - 1e-12);

            let v = rng.random_range(-0.95..0.95);
            let boosted = boost_two_particle(&s, v).unwrap();
            assert_relative_eq!(invariant_mass(&boosted), m, max_relative = 1e-12);

            // boosting by V = P/E zeroes the total momentum
            let vstar = barycentric_velocity(&s).unwrap();
            let com = boost_two_particle(&s, vstar).unwrap();
            assert!(com.total_momentum().abs() < 1e-12);

            // E = sqrt(P^2 + M^2): no leftover center-of-mass energy
            let e = s.total_energy();
            let p = s.total_momentum();
            assert_relative_eq!(e, (p * p + m * m).sqrt(), max_relative = 1e-12);
        }
    }

    #[test]
    fn mass_equality_iff_no_relative_momentum() {
        let comoving = TwoParticleState::new(0.0, 1.0, 0.0, 2.0).unwrap();
        assert_eq!(invariant_mass(&comoving), 3.0);
        let moving = TwoParticleState::new(0.3, 1.0, -0.3, 2.0).unwrap();
        assert!(invariant_mass(&moving) > 3.0);
    }
}
