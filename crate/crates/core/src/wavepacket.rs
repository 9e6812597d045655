//! 1D free-particle wave-packet propagator: the independent numerical
//! oracle for the loop-phase and twin-phase claims.
//!
//! Evolution is nonrelativistic (kinetic Hamiltonian p²/2m) and spectral:
//! each step multiplies the momentum representation by
//! e^{-i ħ k² dt / (2m)}, which is exact for free motion, so the oracle
//! carries no integrator error. The mass-dependent loop phase is a
//! nonrelativistic phenomenon, so the oracle lives in the same limit.
//!
//! Loop realization convention (matching the cocycle pinned in the phase
//! module): boosts act as bare momentum kicks — [`apply_boost`] is invoked
//! with t = 0, each boost serving as its own phase epoch; time translations
//! are free propagation; spatial translations are exact momentum-space
//! phase shifts.

use crate::error::{Error, Result};
use crate::phase::{compose_loop, BoostLoopElement, LoopComposition};
use crate::report::fmt_f64;
use num_complex::Complex64;
use rustfft::FftPlanner;

const NORM_TOL: f64 = 1e-10;
const EDGE_TOL: f64 = 1e-8;

/// A complex amplitude sampled on a uniform grid over [x_min, x_max).
#[derive(Debug, Clone, PartialEq)]
pub struct PacketGrid {
    x_min: f64,
    x_max: f64,
    values: Vec<Complex64>,
}

/// A Gaussian packet: center x₀, mean momentum p₀, position width σ
/// (minimum-uncertainty, so the momentum width is ħ/2σ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpec {
    pub x0: f64,
    pub p0: f64,
    pub sigma: f64,
}

impl PacketGrid {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n() as f64
    }

    pub fn x_at(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    /// Wavenumber of FFT bin `i` (standard positive/negative ordering).
    pub fn k_at(&self, i: usize) -> f64 {
        let n = self.n();
        let j = if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
        std::f64::consts::TAU * j / (self.x_max - self.x_min)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx()
    }

    fn peak(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn check_norm(&self) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!("packet norm drifted to {n}")));
        }
        Ok(())
    }

    fn check_edges(&self) -> Result<()> {
        let peak = self.peak();
        let lo = self.values[0].norm();
        let hi = self.values[self.n() - 1].norm();
        if lo > EDGE_TOL * peak || hi > EDGE_TOL * peak {
            return Err(Error::WrapAround(format!(
                "edge amplitude {:.3e} of peak {:.3e}",
                lo.max(hi),
                peak
            )));
        }
        Ok(())
    }

    pub fn mean_position(&self) -> f64 {
        let dx = self.dx();
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let w = v.norm_sqr() * dx;
            num += w * self.x_at(i);
            den += w;
        }
        num / den
    }

    pub fn position_width(&self) -> f64 {
        let mean = self.mean_position();
        let dx = self.dx();
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let w = v.norm_sqr() * dx;
            let d = self.x_at(i) - mean;
            num += w * d * d;
            den += w;
        }
        (num / den).sqrt()
    }

    pub fn mean_momentum(&self, hbar: f64) -> f64 {
        let spec = self.spectrum();
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, v) in spec.iter().enumerate() {
            let w = v.norm_sqr();
            num += w * hbar * self.k_at(i);
            den += w;
        }
        num / den
    }

    pub fn momentum_width(&self, hbar: f64) -> f64 {
        let spec = self.spectrum();
        let mean = {
            let mut num = 0.0;
            let mut den = 0.0;
            for (i, v) in spec.iter().enumerate() {
                num += v.norm_sqr() * hbar * self.k_at(i);
                den += v.norm_sqr();
            }
            num / den
        };
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, v) in spec.iter().enumerate() {
            let w = v.norm_sqr();
            let d = hbar * self.k_at(i) - mean;
            num += w * d * d;
            den += w;
        }
        (num / den).sqrt()
    }

    fn spectrum(&self) -> Vec<Complex64> {
        let mut buf = self.values.clone();
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
        buf
    }

    /// Apply a multiplicative operator in momentum space.
    fn apply_in_k(&mut self, op: impl Fn(f64) -> Complex64) {
        let n = self.n();
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(n).process(&mut self.values);
        for i in 0..n {
            let factor = op(self.k_at(i));
            self.values[i] *= factor;
        }
        planner.plan_fft_inverse(n).process(&mut self.values);
        let scale = 1.0 / n as f64;
        for v in self.values.iter_mut() {
            *v *= scale;
        }
    }

    /// Snapshot columns (x, Re ψ, Im ψ, |ψ|²) at full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,re_psi,im_psi,prob_density\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_f64(self.x_at(i)),
                fmt_f64(v.re),
                fmt_f64(v.im),
                fmt_f64(v.norm_sqr())
            ));
        }
        out
    }
}

/// Build a normalized Gaussian packet on a power-of-two grid. The packet
/// must fit well inside the domain (x₀ ± 6σ) to keep the periodic edges
/// quiet.
pub fn make_gaussian(g: &GaussianSpec, x_min: f64, x_max: f64, n: usize, hbar: f64) -> Result<PacketGrid> {
    if !(g.sigma > 0.0) {
        return Err(Error::Precondition(format!("sigma must be positive, got {}", g.sigma)));
    }
    if !(hbar > 0.0) {
        return Err(Error::Precondition(format!("hbar must be positive, got {hbar}")));
    }
    if n < 16 || !n.is_power_of_two() {
        return Err(Error::Precondition(format!("grid size must be a power of two >= 16, got {n}")));
    }
    if !(x_max > x_min) {
        return Err(Error::Precondition(format!("empty domain [{x_min}, {x_max})")));
    }
    if g.x0 - 6.0 * g.sigma < x_min || g.x0 + 6.0 * g.sigma > x_max {
        return Err(Error::PacketDomain(format!(
            "x0 +- 6 sigma = [{}, {}] exceeds [{x_min}, {x_max})",
            g.x0 - 6.0 * g.sigma,
            g.x0 + 6.0 * g.sigma
        )));
    }
    let mut grid = PacketGrid {
        x_min,
        x_max,
        values: vec![Complex64::default(); n],
    };
    let amp = (std::f64::consts::TAU * g.sigma * g.sigma).powf(-0.25);
    for i in 0..n {
        let x = grid.x_at(i);
        let envelope = amp * (-(x - g.x0) * (x - g.x0) / (4.0 * g.sigma * g.sigma)).exp();
        grid.values[i] = Complex64::from_polar(envelope, g.p0 * x / hbar);
    }
    // kill the residual discretization error in the norm
    let norm = grid.norm().sqrt();
    for v in grid.values.iter_mut() {
        *v /= norm;
    }
    grid.check_edges()?;
    Ok(grid)
}

/// Evolve under H = p²/2m for `steps` steps of `dt` each. Exact per step in
/// momentum space; norm and edge quietness are re-checked after every step.
pub fn propagate_free(psi: &PacketGrid, m: f64, hbar: f64, dt: f64, steps: usize) -> Result<PacketGrid> {
    if !(m > 0.0) {
        return Err(Error::Precondition(format!("mass must be positive, got {m}")));
    }
    let mut out = psi.clone();
    if steps == 0 || dt == 0.0 {
        return Ok(out);
    }
    for _ in 0..steps {
        out.apply_in_k(|k| Complex64::from_polar(1.0, -hbar * k * k * dt / (2.0 * m)));
        out.check_norm()?;
        out.check_edges()?;
    }
    Ok(out)
}

/// Galilean boost as a phase multiplication: ψ ← e^{i m (v x - v² t / 2)/ħ} ψ.
///
/// The mean momentum shifts by m·v; the packet does not move. `t` is the
/// elapsed time since the boost's phase epoch — loop realizations pass 0,
/// making each boost its own epoch.
pub fn apply_boost(psi: &PacketGrid, v: f64, m: f64, t: f64, hbar: f64) -> Result<PacketGrid> {
    let mut out = psi.clone();
    let global = -m * v * v * t / (2.0 * hbar);
    for (i, val) in out.values.iter_mut().enumerate() {
        let x = psi.x_at(i);
        *val *= Complex64::from_polar(1.0, m * v * x / hbar + global);
    }
    // a kick shifts the spectrum; make sure it stayed inside the band
    let spec = out.spectrum();
    let peak = spec.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let n = out.n();
    let edge = spec[n / 2].norm().max(spec[n / 2 - 1].norm()).max(spec[n / 2 + 1].norm());
    if edge > EDGE_TOL * peak {
        return Err(Error::WrapAround("momentum spectrum reached the band edge".into()));
    }
    out.check_norm()?;
    Ok(out)
}

/// Exact spatial translation ψ(x) → ψ(x - a) via a momentum-space phase.
pub fn translate(psi: &PacketGrid, a: f64) -> Result<PacketGrid> {
    let mut out = psi.clone();
    out.apply_in_k(|k| Complex64::from_polar(1.0, -k * a));
    out.check_norm()?;
    out.check_edges()?;
    Ok(out)
}

/// arg⟨ψ_a|ψ_b⟩ for two packets on the same grid. Requires both normalized
/// and overlapping (|⟨a|b⟩| > 0.9): the relative phase of disjoint packets
/// is meaningless.
pub fn extract_relative_phase(psi_a: &PacketGrid, psi_b: &PacketGrid) -> Result<f64> {
    if psi_a.n() != psi_b.n() || psi_a.x_min != psi_b.x_min || psi_a.x_max != psi_b.x_max {
        return Err(Error::Precondition("packets live on different grids".into()));
    }
    psi_a.check_norm()?;
    psi_b.check_norm()?;
    let overlap: Complex64 = psi_a
        .values
        .iter()
        .zip(&psi_b.values)
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex64>()
        * psi_a.dx();
    if overlap.norm() <= 0.9 {
        return Err(Error::InsufficientOverlap {
            overlap: overlap.norm(),
            needed: 0.9,
        });
    }
    Ok(overlap.arg())
}

/// Outcome of running a loop both ways: algebraically through the cocycle
/// and numerically through the packet propagator.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopOracleReport {
    pub composition: LoopComposition,
    /// arg⟨ψ_looped|ψ_twin⟩ where the twin only traverses the loop's
    /// residual translation.
    pub oracle_phase: f64,
    /// Signed angular difference oracle - cocycle, wrapped to (-π, π].
    pub difference: f64,
    pub overlap: f64,
    /// The packet after traversing the loop, for snapshot output.
    pub looped_packet: PacketGrid,
}

/// Grid and stepping parameters for the oracle run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    pub packet: GaussianSpec,
    pub x_half_width: f64,
    pub n: usize,
    pub steps_per_unit_time: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        // domain +-50 sigma at 4096 points keeps the periodic edges ~1e-270
        OracleSettings {
            packet: GaussianSpec { x0: 0.0, p0: 0.0, sigma: 1.0 },
            x_half_width: 50.0,
            n: 4096,
            steps_per_unit_time: 32,
        }
    }
}

fn angle_difference(a: f64, b: f64) -> f64 {
    let d = (a - b + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
    if d == -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        d
    }
}

/// Realize a loop on a wave packet and compare the extracted phase with the
/// cocycle composition. The twin packet traverses only the loop's residual
/// translation, so the comparison isolates the loop phase.
pub fn run_loop_oracle(
    elements: &[BoostLoopElement],
    mass: f64,
    hbar: f64,
    settings: &OracleSettings,
) -> Result<LoopOracleReport> {
    let composition = compose_loop(elements, &[mass], hbar)?;
    let psi0 = make_gaussian(
        &settings.packet,
        -settings.x_half_width,
        settings.x_half_width,
        settings.n,
        hbar,
    )?;

    let mut looped = psi0.clone();
    for e in elements {
        looped = match *e {
            BoostLoopElement::Boost(v) => apply_boost(&looped, v, mass, 0.0, hbar)?,
            BoostLoopElement::SpaceTranslate(a) => translate(&looped, a)?,
            BoostLoopElement::TimeTranslate(b) => {
                let steps = ((b.abs() * settings.steps_per_unit_time as f64).ceil() as usize).max(1);
                propagate_free(&looped, mass, hbar, b / steps as f64, steps)?
            }
        };
    }

    let mut twin = psi0;
    if composition.residual.b != 0.0 {
        let b = composition.residual.b;
        let steps = ((b.abs() * settings.steps_per_unit_time as f64).ceil() as usize).max(1);
        twin = propagate_free(&twin, mass, hbar, b / steps as f64, steps)?;
    }
    if composition.residual.a != 0.0 {
        twin = translate(&twin, composition.residual.a)?;
    }

    let overlap = {
        let dot: Complex64 = looped
            .values()
            .iter()
            .zip(twin.values())
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * looped.dx();
        dot.norm()
    };
    let oracle_phase = extract_relative_phase(&looped, &twin)?;
    let cocycle = composition.report.entries[0].unwrapped;
    Ok(LoopOracleReport {
        difference: angle_difference(oracle_phase, cocycle),
        composition,
        oracle_phase,
        overlap,
        looped_packet: looped,
    })
}

/// The loop used throughout for validation: boost +v, wait T, boost -v,
/// translate back by -vT. Its cocycle phase is m v² T / (2ħ).
pub fn standard_loop(v: f64, t_wait: f64) -> Vec<BoostLoopElement> {
    vec![
        BoostLoopElement::Boost(v),
        BoostLoopElement::TimeTranslate(t_wait),
        BoostLoopElement::Boost(-v),
        BoostLoopElement::SpaceTranslate(-v * t_wait),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn default_packet() -> PacketGrid {
        make_gaussian(
            &GaussianSpec { x0: 0.0, p0: 0.0, sigma: 1.0 },
            -50.0,
            50.0,
            4096,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn gaussian_construction_invariants() {
        let psi = default_packet();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        assert!(psi.mean_position().abs() < 1e-8);
        assert!(psi.mean_momentum(1.0).abs() < 1e-8);
        assert_relative_eq!(psi.position_width(), 1.0, max_relative = 1e-8);
    }

    #[test]
    fn gaussian_momentum_width_is_minimum_uncertainty() {
        // hbar / (2 sigma) for several widths
        for &sigma in &[0.5, 1.0, 2.0] {
            let psi = make_gaussian(
                &GaussianSpec { x0: 0.0, p0: 0.0, sigma },
                -60.0,
                60.0,
                4096,
                1.0,
            )
            .unwrap();
            assert_relative_eq!(psi.momentum_width(1.0), 0.5 / sigma, max_relative = 1e-6);
        }
    }

    #[test]
    fn gaussian_with_momentum_has_expected_mean() {
        let psi = make_gaussian(
            &GaussianSpec { x0: 2.0, p0: 0.4, sigma: 1.5 },
            -50.0,
            50.0,
            4096,
            1.0,
        )
        .unwrap();
        assert_relative_eq!(psi.mean_position(), 2.0, epsilon = 1e-8);
        assert_relative_eq!(psi.mean_momentum(1.0), 0.4, epsilon = 1e-8);
    }

    #[test]
    fn packet_must_fit_domain() {
        let err = make_gaussian(
            &GaussianSpec { x0: 47.0, p0: 0.0, sigma: 1.0 },
            -50.0,
            50.0,
            4096,
            1.0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::PacketDomain(_)));
        assert!(make_gaussian(
            &GaussianSpec { x0: 0.0, p0: 0.0, sigma: 1.0 },
            -50.0,
            50.0,
            1000, // not a power of two
            1.0,
        )
        .is_err());
    }

    #[test]
    fn zero_steps_are_identity() {
        let psi = default_packet();
        let same = propagate_free(&psi, 1.0, 1.0, 0.0, 7).unwrap();
        assert_eq!(psi, same);
        let same = propagate_free(&psi, 1.0, 1.0, 0.1, 0).unwrap();
        assert_eq!(psi, same);
    }

    #[test]
    fn free_gaussian_spreads_analytically() {
        // sigma(t) = sigma0 sqrt(1 + (hbar t / 2 m sigma0^2)^2), center drifts at p0/m
        let (m, hbar, t) = (1.0, 1.0, 1.0);
        let psi = make_gaussian(
            &GaussianSpec { x0: -3.0, p0: 2.0, sigma: 1.0 },
            -60.0,
            60.0,
            8192,
            hbar,
        )
        .unwrap();
        let evolved = propagate_free(&psi, m, hbar, t / 64.0, 64).unwrap();
        let beta = hbar * t / (2.0 * m);
        assert_relative_eq!(evolved.position_width(), (1.0 + beta * beta).sqrt(), max_relative = 1e-6);
        assert_relative_eq!(evolved.mean_position(), -3.0 + 2.0 * t / m, epsilon = 1e-8);
        assert!((evolved.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pointwise_match_with_analytic_free_gaussian() {
        // psi(x, t) for x0 = p0 = 0:
        //   (2 pi s0^2)^{-1/4} (1 + i beta)^{-1/2} exp(-x^2 / (4 s0^2 (1 + i beta)))
        // with beta = hbar t / (2 m s0^2); independent closed form.
        let (m, hbar, t, s0) = (1.0, 1.0, 0.8, 1.0);
        let psi = default_packet();
        let evolved = propagate_free(&psi, m, hbar, t / 32.0, 32).unwrap();
        let beta = hbar * t / (2.0 * m * s0 * s0);
        let denom = Complex64::new(1.0, beta);
        let prefactor = Complex64::new((std::f64::consts::TAU * s0 * s0).powf(-0.25), 0.0)
            / denom.sqrt();
        let mut max_err: f64 = 0.0;
        for (i, v) in evolved.values().iter().enumerate() {
            let x = evolved.x_at(i);
            let analytic = prefactor * (Complex64::new(-x * x / (4.0 * s0 * s0), 0.0) / denom).exp();
            max_err = max_err.max((v - analytic).norm());
        }
        assert!(max_err < 1e-6, "max pointwise deviation {max_err}");
    }

    #[test]
    fn wrap_around_is_detected() {
        // a fast packet reaches the boundary well before t = 40
        let psi = make_gaussian(
            &GaussianSpec { x0: 0.0, p0: 4.0, sigma: 1.0 },
            -50.0,
            50.0,
            4096,
            1.0,
        )
        .unwrap();
        let err = propagate_free(&psi, 1.0, 1.0, 0.5, 80).unwrap_err();
        assert!(matches!(err, Error::WrapAround(_)), "got {err:?}");
    }

    #[test]
    fn boost_shifts_mean_momentum() {
        let psi = default_packet();
        let kicked = apply_boost(&psi, 0.3, 2.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(kicked.mean_momentum(1.0), 0.6, epsilon = 1e-8);
        assert_relative_eq!(kicked.mean_position(), 0.0, epsilon = 1e-8);
        // zero boost is the identity, any epoch
        let same = apply_boost(&psi, 0.0, 2.0, 3.0, 1.0).unwrap();
        assert_eq!(psi, same);
    }

    #[test]
    fn boost_and_inverse_boost_cancel() {
        // at a common epoch the two-element cocycle vanishes
        let psi = default_packet();
        let there = apply_boost(&psi, 0.2, 1.0, 0.0, 1.0).unwrap();
        let back = apply_boost(&there, -0.2, 1.0, 0.0, 1.0).unwrap();
        let phase = extract_relative_phase(&back, &psi).unwrap();
        assert!(phase.abs() < 1e-10, "residual phase {phase}");
    }

    #[test]
    fn translate_moves_packet_exactly() {
        let psi = default_packet();
        let moved = translate(&psi, 3.25).unwrap();
        assert_relative_eq!(moved.mean_position(), 3.25, epsilon = 1e-8);
    }

    #[test]
    fn relative_phase_of_global_phase_factor() {
        let psi = default_packet();
        let mut rotated = psi.clone();
        for v in rotated.values.iter_mut() {
            *v *= Complex64::from_polar(1.0, 0.3);
        }
        let phi = extract_relative_phase(&psi, &rotated).unwrap();
        assert_relative_eq!(phi, 0.3, epsilon = 1e-10);
        assert_eq!(extract_relative_phase(&psi, &psi).unwrap(), 0.0);
    }

    #[test]
    fn disjoint_packets_refuse_comparison() {
        let psi = default_packet();
        let far = translate(&psi, 20.0).unwrap();
        assert!(matches!(
            extract_relative_phase(&psi, &far),
            Err(Error::InsufficientOverlap { .. })
        ));
    }

    #[test]
    fn standard_loop_matches_cocycle() {
        let report = run_loop_oracle(&standard_loop(0.1, 1.0), 1.0, 1.0, &OracleSettings::default())
            .unwrap();
        assert_relative_eq!(
            report.composition.report.entries[0].unwrapped,
            0.005,
            max_relative = 1e-12
        );
        assert!(report.overlap > 0.99, "overlap {}", report.overlap);
        assert!(
            report.difference.abs() < 1e-3,
            "oracle {} vs cocycle 0.005",
            report.oracle_phase
        );
    }

    #[test]
    fn loop_phase_doubles_with_mass() {
        let settings = OracleSettings::default();
        let loop_elems = standard_loop(0.1, 1.0);
        let one = run_loop_oracle(&loop_elems, 1.0, 1.0, &settings).unwrap();
        let two = run_loop_oracle(&loop_elems, 2.0, 1.0, &settings).unwrap();
        assert!((two.oracle_phase - 2.0 * one.oracle_phase).abs() < 1e-3);
    }

    #[test]
    fn norm_survives_operation_chains() {
        let psi = default_packet();
        let a = apply_boost(&psi, 0.1, 1.0, 0.0, 1.0).unwrap();
        let b = propagate_free(&a, 1.0, 1.0, 0.05, 20).unwrap();
        let c = translate(&b, -0.1).unwrap();
        let d = apply_boost(&c, -0.1, 1.0, 0.0, 1.0).unwrap();
        assert!((d.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn snapshot_csv_has_header_and_rows() {
        let psi = make_gaussian(
            &GaussianSpec { x0: 0.0, p0: 0.0, sigma: 1.0 },
            -16.0,
            16.0,
            64,
            1.0,
        )
        .unwrap();
        let csv = psi.to_csv();
        assert!(csv.starts_with("x,re_psi,im_psi,prob_density\n"));
        assert_eq!(csv.lines().count(), 65);
    }
}
