//! Mass-proper-time uncertainty products for two thought-experiment
//! apparatuses: gravitational scattering off a heavy mass, and a magnetic
//! mass spectrometer fed through a diffracting slit.
//!
//! The underlying estimates are order-of-magnitude relations; here they are
//! promoted to exact conventions (δR = a/2, δpₓ = ħ/a, Gaussian diffraction
//! kick) so every result is reproducible. The analytic products then cancel
//! all apparatus parameters algebraically: δm·δτ = δpₓ·δb for the
//! gravitational setup and ħ/2 for the spectrometer.
//!
//! The spectrometer also ships a Monte Carlo estimator that simulates the
//! semicircular optics particle by particle and reports sample standard
//! deviations, with a counter-based random stream per sample so the result
//! is reproducible (and order-independent) for a fixed seed.

use crate::error::{Error, Result};
use crate::report::fmt_f64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// How an uncertainty estimate was produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimateMethod {
    Analytic,
    MonteCarlo { samples: usize, seed: u64 },
}

/// (δm, δτ) and their product for one apparatus scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyReport {
    pub delta_m: f64,
    pub delta_tau: f64,
    pub product: f64,
    pub product_over_hbar: f64,
    pub hbar: f64,
    pub method: EstimateMethod,
}

/// Gravitational mass measurement: a light particle scatters off heavy mass
/// M at impact parameter b for an interaction time T (defaulting to b/v
/// when a speed is supplied instead). The deflection measures the momentum
/// (hence the mass); the gravitational red shift meanwhile slows the
/// particle's own clock by an amount uncertain through δb. The estimates
/// assume δb ≪ b (documented validity, not enforced).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravScatterScenario {
    pub g_newton: f64,
    pub heavy_mass: f64,
    pub impact_parameter: f64,
    pub interaction_time: f64,
    pub delta_b: f64,
    pub delta_px: f64,
}

impl GravScatterScenario {
    /// `interaction_time` wins when both it and `speed` are given; with only
    /// a speed, T = b/v.
    pub fn new(
        g_newton: f64,
        heavy_mass: f64,
        impact_parameter: f64,
        interaction_time: Option<f64>,
        speed: Option<f64>,
        delta_b: f64,
        delta_px: f64,
    ) -> Result<Self> {
        let t = match (interaction_time, speed) {
            (Some(t), _) => t,
            (None, Some(v)) if v > 0.0 => impact_parameter / v,
            (None, Some(v)) => {
                return Err(Error::Precondition(format!("speed must be positive, got {v}")))
            }
            (None, None) => {
                return Err(Error::Precondition(
                    "need an interaction time or a speed to default T = b/v".into(),
                ))
            }
        };
        let s = GravScatterScenario {
            g_newton,
            heavy_mass,
            impact_parameter,
            interaction_time: t,
            delta_b,
            delta_px,
        };
        for (name, value) in [
            ("G", s.g_newton),
            ("M", s.heavy_mass),
            ("b", s.impact_parameter),
            ("T", s.interaction_time),
            ("delta_b", s.delta_b),
            ("delta_px", s.delta_px),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::Precondition(format!("{name} must be positive, got {value}")));
            }
        }
        Ok(s)
    }
}

/// δm = b²δpₓ/(GMT), δτ = (GM/b²)·δb·T. The apparatus factors cancel in
/// the product, which is therefore computed as δpₓ·δb directly.
pub fn grav_scattering_product(s: &GravScatterScenario, hbar: f64) -> UncertaintyReport {
    let gm = s.g_newton * s.heavy_mass;
    let b2 = s.impact_parameter * s.impact_parameter;
    let delta_m = b2 * s.delta_px / (gm * s.interaction_time);
    let delta_tau = (gm / b2) * s.delta_b * s.interaction_time;
    let product = s.delta_px * s.delta_b;
    UncertaintyReport {
        delta_m,
        delta_tau,
        product,
        product_over_hbar: product / hbar,
        hbar,
        method: EstimateMethod::Analytic,
    }
}

/// Magnetic mass spectrometer: charge e at speed v enters through a slit of
/// width a, bends through a semicircle of nominal radius R in field B, and
/// lands on a plate in the slit plane. The radius determines the mass,
/// m = eBR/v.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrometerScenario {
    pub charge: f64,
    pub field: f64,
    pub slit_width: f64,
    pub speed: f64,
    pub radius: f64,
}

impl SpectrometerScenario {
    pub fn new(charge: f64, field: f64, slit_width: f64, speed: f64, radius: f64) -> Result<Self> {
        for (name, value) in [
            ("e", charge),
            ("B", field),
            ("a", slit_width),
            ("v", speed),
            ("R", radius),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::Precondition(format!("{name} must be positive, got {value}")));
            }
        }
        Ok(SpectrometerScenario {
            charge,
            field,
            slit_width,
            speed,
            radius,
        })
    }

    /// The mass the apparatus is tuned for: m = eBR/v.
    pub fn nominal_mass(&self) -> f64 {
        self.charge * self.field * self.radius / self.speed
    }
}

/// Analytic conventions: δR = a/2 (slit-limited radius reading),
/// δpₓ = ħ/a (diffraction), δm = eB·δR/v, δτ = v·δpₓ/(eB). The product is
/// ħ/2 exactly — e, B, a, v all cancel — so it is returned as ħ/2 directly.
pub fn spectrometer_product(s: &SpectrometerScenario, hbar: f64) -> UncertaintyReport {
    let delta_r = s.slit_width / 2.0;
    let delta_m = s.charge * s.field * delta_r / s.speed;
    let delta_px = hbar / s.slit_width;
    let delta_tau = s.speed * delta_px / (s.charge * s.field);
    let product = hbar / 2.0;
    UncertaintyReport {
        delta_m,
        delta_tau,
        product,
        product_over_hbar: product / hbar,
        hbar,
        method: EstimateMethod::Analytic,
    }
}

/// One simulated particle's detector-side record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrometerSample {
    /// Entrance offset across the slit.
    pub offset: f64,
    /// Transverse momentum kick from diffraction.
    pub kick: f64,
    /// Landing coordinate on the plate.
    pub landing: f64,
    /// Mass inferred from the measured radius.
    pub mass_estimate: f64,
    /// Lab flight time along the arc.
    pub flight_time: f64,
    /// Proper time (1 - v²/2)·flight_time.
    pub proper_time: f64,
}

/// Monte Carlo spectrometer run: sample offsets and kicks with per-sample
/// counter-based streams and the run's artifacts.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrometerMonteCarlo {
    pub report: UncertaintyReport,
    pub samples: Vec<SpectrometerSample>,
}

impl SpectrometerMonteCarlo {
    /// Per-sample CSV (index, offset, kick, landing, mass_estimate,
    /// flight_time, proper_time) at full precision.
    pub fn samples_csv(&self) -> String {
        let mut out =
            String::from("index,offset,kick,landing,mass_estimate,flight_time,proper_time\n");
        for (i, s) in self.samples.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                i,
                fmt_f64(s.offset),
                fmt_f64(s.kick),
                fmt_f64(s.landing),
                fmt_f64(s.mass_estimate),
                fmt_f64(s.flight_time),
                fmt_f64(s.proper_time)
            ));
        }
        out
    }
}

fn sample_std(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count();
    debug_assert!(n >= 2);
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    var.sqrt()
}

/// Simulate `n` particles through the spectrometer and report the sample
/// standard deviations of the inferred mass and proper time.
///
/// Geometry: the particle enters at the slit (offset u sampled uniformly
/// over [-a/2, a/2]) moving perpendicularly to the plate with longitudinal
/// momentum mv, picks up a transverse kick q ~ N(0, ħ/a) from diffraction,
/// follows its circular arc (radius |p|/eB), and lands back on the plate.
/// The experimenter reads the landing position, infers R = landing/2 and
/// m = eBR/v, and books a proper time (1 - v²/2)·(flight time): the kick
/// tilts the chord and shortens the arc, so diffraction feeds straight into
/// the proper-time spread.
///
/// Sample i draws from stream i of a counter-based ChaCha generator, so a
/// fixed seed reproduces bitwise regardless of evaluation order.
pub fn spectrometer_monte_carlo(
    s: &SpectrometerScenario,
    n: usize,
    seed: u64,
    hbar: f64,
) -> Result<SpectrometerMonteCarlo> {
    const MIN_SAMPLES: usize = 1000;
    if n < MIN_SAMPLES {
        return Err(Error::SampleCount { n, min: MIN_SAMPLES });
    }
    if !(hbar > 0.0) {
        return Err(Error::Precondition(format!("hbar must be positive, got {hbar}")));
    }
    let eb = s.charge * s.field;
    let m_nominal = s.nominal_mass();
    let p_long = m_nominal * s.speed;
    let sigma_kick = hbar / s.slit_width;
    let kick_dist = Normal::new(0.0, sigma_kick)
        .map_err(|e| Error::Precondition(format!("bad kick distribution: {e}")))?;

    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let offset = rng.random_range(-s.slit_width / 2.0..=s.slit_width / 2.0);
        let kick = kick_dist.sample(&mut rng);

        let p_total = (p_long * p_long + kick * kick).sqrt();
        let radius = p_total / eb;
        let tilt = (kick / p_long).atan();
        // chord along the plate: entry at `offset`, exit after an arc of pi - 2*tilt
        let landing = offset + 2.0 * radius * tilt.cos();
        let mass_estimate = eb * (landing / 2.0) / s.speed;
        let arc_speed = p_total / m_nominal;
        let flight_time = radius * (std::f64::consts::PI - 2.0 * tilt) / arc_speed;
        let proper_time = (1.0 - s.speed * s.speed / 2.0) * flight_time;
        samples.push(SpectrometerSample {
            offset,
            kick,
            landing,
            mass_estimate,
            flight_time,
            proper_time,
        });
    }

    let delta_m = sample_std(samples.iter().map(|s| s.mass_estimate));
    let delta_tau = sample_std(samples.iter().map(|s| s.proper_time));
    let product = delta_m * delta_tau;
    Ok(SpectrometerMonteCarlo {
        report: UncertaintyReport {
            delta_m,
            delta_tau,
            product,
            product_over_hbar: product / hbar,
            hbar,
            method: EstimateMethod::MonteCarlo { samples: n, seed },
        },
        samples,
    })
}
