//! Scenario execution: build domain objects from a config, run, and emit
//! deterministic artifacts (structured-text report plus optional CSV).

use crate::config::{
    ConfigError, HamiltonianConfig, LoopElementConfig, MethodConfig, ProfileConfig,
    ScenarioConfig, ScenarioKind, SimulateConfig,
};
use std::path::{Path, PathBuf};
use tauspace_core::barycentric::{
    barycentric_velocity, boost_two_particle, invariant_mass, nr_limit_mass, TwoParticleState,
};
use tauspace_core::dynamics::{integrate, IntegratorConfig, Method};
use tauspace_core::hamiltonian::{
    free_relativistic, free_with_tau_potential, two_particle_free, Hamiltonian, TauPotential,
    WeakFieldPotential, WeakFieldUniform,
};
use tauspace_core::phase::{
    cavity_proper_times, compose_loop, interference_intensity, BoostLoopElement, CavityProperTimes,
    CavityScenario, InterferometerScenario, PhaseReport, VelocityProfile,
};
use tauspace_core::report::{fmt_f64, Report};
use tauspace_core::state::{ExtendedState, SpatialVec};
use tauspace_core::uncertainty::{
    grav_scattering_product, spectrometer_monte_carlo, spectrometer_product, EstimateMethod,
    GravScatterScenario, SpectrometerScenario, UncertaintyReport,
};
use tauspace_core::wavepacket::{run_loop_oracle, standard_loop, GaussianSpec, OracleSettings};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("runtime error: {0}")]
    Engine(#[from] tauspace_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for config problems, 3 for domain/runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Engine(_) | CliError::Io(_) => 3,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// A finished run: the report (also printed as the one-screen summary) and
/// any files written to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub report: Report,
    pub written: Vec<PathBuf>,
}

fn build_hamiltonian(cfg: &HamiltonianConfig) -> Result<Box<dyn Hamiltonian>> {
    Ok(match cfg {
        HamiltonianConfig::FreeRelativistic => Box::new(free_relativistic()),
        HamiltonianConfig::LinearDecay { lambda } => {
            Box::new(free_with_tau_potential(TauPotential::linear(*lambda)))
        }
        HamiltonianConfig::TabulatedDecay { tau_knots, phi_values } => Box::new(
            free_with_tau_potential(TauPotential::tabulated(tau_knots.clone(), phi_values.clone())?),
        ),
        HamiltonianConfig::WeakFieldUniform { phi } => {
            Box::new(WeakFieldUniform::new(WeakFieldPotential::uniform(*phi)?))
        }
    })
}

fn build_profile(cfg: &ProfileConfig) -> VelocityProfile {
    match cfg {
        ProfileConfig::Const(v) => VelocityProfile::Constant(*v),
        ProfileConfig::Piecewise(pairs) => VelocityProfile::Piecewise(pairs.clone()),
        ProfileConfig::Tabulated(pairs) => VelocityProfile::Tabulated {
            times: pairs.iter().map(|(t, _)| *t).collect(),
            velocities: pairs.iter().map(|(_, v)| *v).collect(),
        },
    }
}

fn build_loop_elements(elements: &[LoopElementConfig]) -> Vec<BoostLoopElement> {
    elements
        .iter()
        .map(|e| match e {
            LoopElementConfig::Boost(v) => BoostLoopElement::Boost(*v),
            LoopElementConfig::Wait(t) => BoostLoopElement::TimeTranslate(*t),
            LoopElementConfig::Translate(a) => BoostLoopElement::SpaceTranslate(*a),
        })
        .collect()
}

fn push_state(report: &mut Report, section: &str, s: &ExtendedState) {
    report.push_f64(section, "t", s.t);
    for (i, v) in s.x.as_slice().iter().enumerate() {
        report.push_f64(section, &format!("x{}", i + 1), *v);
    }
    for (i, v) in s.p.as_slice().iter().enumerate() {
        report.push_f64(section, &format!("p{}", i + 1), *v);
    }
    report.push_f64(section, "tau", s.tau);
    report.push_f64(section, "m", s.m);
}

fn push_phase_report(report: &mut Report, pr: &PhaseReport) {
    if let Some(h) = &pr.hypothesis {
        report.push_str("phases", "hypothesis", h);
    }
    for (i, e) in pr.entries.iter().enumerate() {
        let k = i + 1;
        report.push_f64("phases", &format!("mass_{k}"), e.mass);
        report.push_f64("phases", &format!("phase_unwrapped_{k}"), e.unwrapped);
        report.push_f64("phases", &format!("phase_wrapped_{k}"), e.wrapped);
    }
    for (i, r) in pr.relative.iter().enumerate() {
        let k = i + 1;
        report.push_str(
            "relative_phases",
            &format!("pair_{k}"),
            &format!("{} vs {}", fmt_f64(r.mass_a), fmt_f64(r.mass_b)),
        );
        report.push_f64("relative_phases", &format!("delta_unwrapped_{k}"), r.unwrapped);
        report.push_f64("relative_phases", &format!("delta_wrapped_{k}"), r.wrapped);
    }
}

fn push_uncertainty(report: &mut Report, section: &str, u: &UncertaintyReport) {
    match u.method {
        EstimateMethod::Analytic => {
            report.push_str(section, "method", "analytic");
        }
        EstimateMethod::MonteCarlo { samples, seed } => {
            report.push_str(section, "method", "monte-carlo");
            report.push_usize(section, "samples", samples);
            report.push_str(section, "seed", &seed.to_string());
        }
    }
    report.push_f64(section, "delta_m", u.delta_m);
    report.push_f64(section, "delta_tau", u.delta_tau);
    report.push_f64(section, "product", u.product);
    report.push_f64(section, "product_over_hbar", u.product_over_hbar);
    report.push_f64(section, "hbar", u.hbar);
}

fn simulate_state(s: &SimulateConfig) -> Result<ExtendedState> {
    Ok(ExtendedState::new(
        s.t0,
        SpatialVec::from_slice(&s.x),
        SpatialVec::from_slice(&s.p),
        s.tau,
        s.m,
    )?)
}

fn simulate_integrator(s: &SimulateConfig) -> Result<IntegratorConfig> {
    let method = match s.method {
        MethodConfig::Rk4 { step } => Method::Rk4 { step },
        MethodConfig::Rk45 { tol } => Method::Rk45 { tol },
    };
    Ok(IntegratorConfig::new(method, (s.t0, s.t1))?
        .with_cadence(s.cadence)
        .with_scenario(s.hamiltonian.name()))
}

/// Execute one scenario. CSV artifacts go to `out_dir` (or the current
/// directory) under the configured or default file names; the report file
/// is written only when configured or when `out_dir` is given.
pub fn run(config: &ScenarioConfig, out_dir: Option<&Path>) -> Result<RunArtifacts> {
    let hbar = config.hbar;
    let mut report = Report::new();
    report.push_str("run", "tool", "tauspace");
    report.push_str("run", "kind", config.kind.name());
    report.push_f64("run", "hbar", hbar);

    let mut csv: Option<(String, String)> = None; // (default name, contents)

    match &config.kind {
        ScenarioKind::Simulate(s) => {
            let h = build_hamiltonian(&s.hamiltonian)?;
            let state0 = simulate_state(s)?;
            let cfg = simulate_integrator(s)?;
            let (traj, audit) = integrate(h.as_ref(), &state0, &cfg)?;
            report.push_str("run", "hamiltonian", s.hamiltonian.name());
            report.push_str("run", "integrator", &traj.meta.integrator);
            report.push_f64("run", "step", traj.meta.step);
            report.push_usize("run", "samples", traj.len());
            push_state(&mut report, "initial", traj.first().expect("nonempty"));
            push_state(&mut report, "final", traj.last().expect("nonempty"));
            report.push_f64("final", "H", *traj.hamiltonian_values().last().expect("nonempty"));
            report.push_f64("audit", "max_rel_energy_drift", audit.max_rel_energy_drift);
            if let Some(res) = audit.max_proper_time_residual {
                report.push_f64("audit", "max_proper_time_residual", res);
            }
            report.push_str(
                "audit",
                "proper_time_bounded",
                if traj.proper_time_bounded() { "true" } else { "false" },
            );
            csv = Some(("trajectory.csv".into(), traj.to_csv()));
        }
        ScenarioKind::Barycentric(b) => {
            let s = TwoParticleState::new(b.p1, b.m1, b.p2, b.m2)?;
            let two = two_particle_free();
            let v = barycentric_velocity(&s)?;
            let m = invariant_mass(&s);
            let m_nr = nr_limit_mass(&s)?;
            let com = boost_two_particle(&s, v)?;
            report.push_f64("input", "p1", b.p1);
            report.push_f64("input", "m1", b.m1);
            report.push_f64("input", "p2", b.p2);
            report.push_f64("input", "m2", b.m2);
            report.push_f64("energies", "e1", s.e1());
            report.push_f64("energies", "e2", s.e2());
            report.push_f64("energies", "total_energy", two.total_energy(&s)?);
            report.push_f64("energies", "total_momentum", two.total_momentum(&s));
            report.push_f64("barycentric", "velocity", v);
            report.push_f64("barycentric", "gamma", 1.0 / (1.0 - v * v).sqrt());
            report.push_f64("barycentric", "residual_momentum", com.total_momentum());
            report.push_f64("mass", "invariant_mass", m);
            report.push_f64("mass", "nr_limit_mass", m_nr);
            report.push_f64("mass", "nr_minus_exact", m_nr - m);
        }
        ScenarioKind::PhaseLoop(l) => {
            let lc = compose_loop(&build_loop_elements(&l.elements), &l.masses, hbar)?;
            report.push_usize("loop", "elements", l.elements.len());
            report.push_f64("loop", "functional", lc.functional);
            report.push_f64("loop", "residual_translation", lc.residual.a);
            report.push_f64("loop", "residual_time", lc.residual.b);
            push_phase_report(&mut report, &lc.report);
        }
        ScenarioKind::PhaseCavity(c) => {
            let taus = cavity_proper_times(&CavityScenario::new(c.v, c.theta, c.t)?);
            report.push_f64("input", "v", c.v);
            report.push_f64("input", "theta", c.theta);
            report.push_f64("input", "t", c.t);
            report.push_str("proper_times", "component_label", CavityProperTimes::COMPONENT_LABEL);
            report.push_f64("proper_times", "tau_component", taus.component);
            report.push_str("proper_times", "composite_label", CavityProperTimes::COMPOSITE_LABEL);
            report.push_f64("proper_times", "tau_composite", taus.composite);
            report.push_f64("proper_times", "difference", taus.difference);
            report.push_str(
                "proper_times",
                "note",
                "which hypothesis a comoving clock follows is experimentally open",
            );
        }
        ScenarioKind::PhaseInterfere(i) => {
            let scenario = InterferometerScenario::new(
                i.t_span,
                build_profile(&i.branch1),
                build_profile(&i.branch2),
                i.a1,
                i.a2,
                i.masses.clone(),
                i.gamma,
            )?;
            let r = interference_intensity(&scenario, hbar)?;
            report.push_f64("branches", "tau1", r.tau1);
            report.push_f64("branches", "tau2", r.tau2);
            report.push_f64("branches", "delta_tau", r.tau1 - r.tau2);
            report.push_f64("detector", "intensity", r.intensity);
            for (k, c) in r.components.iter().enumerate() {
                let idx = k + 1;
                report.push_f64("detector", &format!("mass_{idx}"), c.mass);
                report.push_f64("detector", &format!("intensity_{idx}"), c.intensity);
                report.push_f64("detector", &format!("visibility_{idx}"), c.visibility);
                report.push_f64("detector", &format!("survival_{idx}"), c.survival);
            }
            push_phase_report(&mut report, &r.report);
        }
        ScenarioKind::UncertaintyGrav(g) => {
            let scenario =
                GravScatterScenario::new(g.g, g.m_heavy, g.b, g.t, g.v, g.delta_b, g.delta_px)?;
            report.push_f64("input", "g", scenario.g_newton);
            report.push_f64("input", "m_heavy", scenario.heavy_mass);
            report.push_f64("input", "b", scenario.impact_parameter);
            report.push_f64("input", "t", scenario.interaction_time);
            report.push_f64("input", "delta_b", scenario.delta_b);
            report.push_f64("input", "delta_px", scenario.delta_px);
            push_uncertainty(&mut report, "analytic", &grav_scattering_product(&scenario, hbar));
        }
        ScenarioKind::UncertaintySpectrometer(sp) => {
            let scenario =
                SpectrometerScenario::new(sp.e, sp.b_field, sp.slit, sp.v, sp.radius)?;
            report.push_f64("input", "e", scenario.charge);
            report.push_f64("input", "b_field", scenario.field);
            report.push_f64("input", "slit", scenario.slit_width);
            report.push_f64("input", "v", scenario.speed);
            report.push_f64("input", "radius", scenario.radius);
            report.push_f64("input", "nominal_mass", scenario.nominal_mass());
            push_uncertainty(&mut report, "analytic", &spectrometer_product(&scenario, hbar));
            if let Some(n) = sp.monte_carlo {
                let mc = spectrometer_monte_carlo(&scenario, n, config.seed, hbar)?;
                push_uncertainty(&mut report, "monte_carlo", &mc.report);
                csv = Some(("samples.csv".into(), mc.samples_csv()));
            }
        }
        ScenarioKind::OracleLoop(o) => {
            let settings = OracleSettings {
                packet: GaussianSpec { x0: 0.0, p0: 0.0, sigma: o.sigma },
                x_half_width: o.half_width,
                n: o.grid_points,
                steps_per_unit_time: o.steps_per_unit,
            };
            let r = run_loop_oracle(&standard_loop(o.v, o.wait), o.mass, hbar, &settings)?;
            report.push_f64("input", "v", o.v);
            report.push_f64("input", "wait", o.wait);
            report.push_f64("input", "mass", o.mass);
            report.push_f64("input", "sigma", o.sigma);
            report.push_usize("input", "grid_points", o.grid_points);
            report.push_f64("phases", "cocycle_phase", r.composition.report.entries[0].unwrapped);
            report.push_f64("phases", "oracle_phase", r.oracle_phase);
            report.push_f64("phases", "difference", r.difference);
            report.push_f64("phases", "overlap", r.overlap);
            csv = Some(("packet.csv".into(), r.looped_packet.to_csv()));
        }
    }

    let mut written = Vec::new();
    let base = out_dir.map(Path::to_path_buf);
    if let Some(dir) = &base {
        std::fs::create_dir_all(dir)?;
    }
    let resolve = |name: &str, base: &Option<PathBuf>| match base {
        Some(dir) => dir.join(name),
        None => PathBuf::from(name),
    };
    if let Some((default_name, contents)) = &csv {
        let target = config.output.csv.clone().or_else(|| {
            // write CSV under the default name when an output dir was given
            base.as_ref().map(|_| default_name.clone())
        });
        if let Some(name) = target {
            let path = resolve(&name, &base);
            std::fs::write(&path, contents)?;
            written.push(path);
        }
    }
    let report_target = config
        .output
        .report
        .clone()
        .or_else(|| base.as_ref().map(|_| "report.txt".to_string()));
    if let Some(name) = report_target {
        let path = resolve(&name, &base);
        std::fs::write(&path, report.render())?;
        written.push(path);
    }

    Ok(RunArtifacts { report, written })
}

// ---------------------------------------------------------------------------
// parameter sweeps

fn unknown_param(kind: &str, param: &str, supported: &str) -> CliError {
    CliError::Config(ConfigError::Invariant {
        field: format!("sweep.{param}"),
        msg: format!("'{param}' is not sweepable for kind {kind} (supported: {supported})"),
    })
}

/// Clone the config with the named parameter replaced by `value`.
fn with_param(config: &ScenarioConfig, param: &str, value: f64) -> Result<ScenarioConfig> {
    let mut out = config.clone();
    match &mut out.kind {
        ScenarioKind::Simulate(s) => match param {
            "p" => s.p = vec![value],
            "m" => s.m = value,
            "t1" => s.t1 = value,
            "step" => {
                s.method = MethodConfig::Rk4 { step: value };
            }
            _ => return Err(unknown_param("simulate", param, "p, m, t1, step")),
        },
        ScenarioKind::Barycentric(b) => match param {
            "p1" => b.p1 = value,
            "p2" => b.p2 = value,
            "m1" => b.m1 = value,
            "m2" => b.m2 = value,
            _ => return Err(unknown_param("barycentric", param, "p1, p2, m1, m2")),
        },
        ScenarioKind::PhaseCavity(c) => match param {
            "theta" => c.theta = value,
            "v" => c.v = value,
            "t" => c.t = value,
            _ => return Err(unknown_param("phase-cavity", param, "theta, v, t")),
        },
        ScenarioKind::PhaseInterfere(i) => match param {
            "gamma" => i.gamma = value,
            // delta_tau is a derived knob: branch 2 becomes the constant
            // profile with tau2 = tau1 - delta_tau over the same span
            "delta_tau" => {
                let tau1 = tauspace_core::phase::branch_proper_time(
                    &build_profile(&i.branch1),
                    i.t_span,
                )?;
                let tau2 = tau1 - value;
                if !(tau2 > 0.0 && tau2 <= i.t_span) {
                    return Err(CliError::Config(ConfigError::Invariant {
                        field: "sweep.delta_tau".into(),
                        msg: format!(
                            "delta_tau = {value} needs 0 < tau1 - delta_tau <= t_span \
                             (tau1 = {tau1}, t_span = {})",
                            i.t_span
                        ),
                    }));
                }
                let u = (1.0 - (tau2 / i.t_span).powi(2)).sqrt();
                i.branch2 = ProfileConfig::Const(u);
            }
            _ => return Err(unknown_param("phase-interfere", param, "gamma, delta_tau")),
        },
        ScenarioKind::UncertaintyGrav(g) => match param {
            "b" => g.b = value,
            "t" => g.t = Some(value),
            "delta_b" => g.delta_b = value,
            "delta_px" => g.delta_px = value,
            _ => return Err(unknown_param("uncertainty-grav", param, "b, t, delta_b, delta_px")),
        },
        ScenarioKind::UncertaintySpectrometer(sp) => match param {
            "slit" => sp.slit = value,
            "b_field" => sp.b_field = value,
            "v" => sp.v = value,
            "radius" => sp.radius = value,
            _ => {
                return Err(unknown_param(
                    "uncertainty-spectrometer",
                    param,
                    "slit, b_field, v, radius",
                ))
            }
        },
        ScenarioKind::PhaseLoop(_) | ScenarioKind::OracleLoop(_) => {
            return Err(unknown_param(config.kind.name(), param, "none"));
        }
    }
    Ok(out)
}

fn sweep_columns(kind: &ScenarioKind) -> Vec<&'static str> {
    match kind {
        ScenarioKind::Simulate(_) => vec!["final_x", "final_tau", "final_m", "energy_drift"],
        ScenarioKind::Barycentric(_) => vec![
            "velocity",
            "invariant_mass",
            "nr_limit_mass",
            "total_energy",
            "total_momentum",
        ],
        ScenarioKind::PhaseCavity(_) => vec!["tau_component", "tau_composite", "difference"],
        ScenarioKind::PhaseInterfere(_) => vec!["intensity", "visibility", "survival"],
        ScenarioKind::UncertaintyGrav(_) | ScenarioKind::UncertaintySpectrometer(_) => {
            vec!["delta_m", "delta_tau", "product"]
        }
        ScenarioKind::PhaseLoop(_) | ScenarioKind::OracleLoop(_) => vec![],
    }
}

fn sweep_row(config: &ScenarioConfig) -> Result<Vec<f64>> {
    let hbar = config.hbar;
    Ok(match &config.kind {
        ScenarioKind::Simulate(s) => {
            let h = build_hamiltonian(&s.hamiltonian)?;
            let (traj, audit) = integrate(h.as_ref(), &simulate_state(s)?, &simulate_integrator(s)?)?;
            let last = traj.last().expect("nonempty");
            vec![last.x[0], last.tau, last.m, audit.max_rel_energy_drift]
        }
        ScenarioKind::Barycentric(b) => {
            let s = TwoParticleState::new(b.p1, b.m1, b.p2, b.m2)?;
            vec![
                barycentric_velocity(&s)?,
                invariant_mass(&s),
                nr_limit_mass(&s)?,
                s.total_energy(),
                s.total_momentum(),
            ]
        }
        ScenarioKind::PhaseCavity(c) => {
            let taus = cavity_proper_times(&CavityScenario::new(c.v, c.theta, c.t)?);
            vec![taus.component, taus.composite, taus.difference]
        }
        ScenarioKind::PhaseInterfere(i) => {
            let scenario = InterferometerScenario::new(
                i.t_span,
                build_profile(&i.branch1),
                build_profile(&i.branch2),
                i.a1,
                i.a2,
                i.masses.clone(),
                i.gamma,
            )?;
            let r = interference_intensity(&scenario, hbar)?;
            vec![r.intensity, r.components[0].visibility, r.components[0].survival]
        }
        ScenarioKind::UncertaintyGrav(g) => {
            let scenario =
                GravScatterScenario::new(g.g, g.m_heavy, g.b, g.t, g.v, g.delta_b, g.delta_px)?;
            let u = grav_scattering_product(&scenario, hbar);
            vec![u.delta_m, u.delta_tau, u.product]
        }
        ScenarioKind::UncertaintySpectrometer(sp) => {
            // sweeps use the analytic estimator; Monte Carlo sweeps would be
            // deterministic too, just needlessly slow
            let scenario = SpectrometerScenario::new(sp.e, sp.b_field, sp.slit, sp.v, sp.radius)?;
            let u = spectrometer_product(&scenario, hbar);
            vec![u.delta_m, u.delta_tau, u.product]
        }
        ScenarioKind::PhaseLoop(_) | ScenarioKind::OracleLoop(_) => vec![],
    })
}

/// Sweep table: header plus one row per parameter value, rendered to CSV at
/// full precision.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub param: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<(f64, Vec<f64>)>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.param);
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (x, values) in &self.rows {
            out.push_str(&fmt_f64(*x));
            for v in values {
                out.push(',');
                out.push_str(&fmt_f64(*v));
            }
            out.push('\n');
        }
        out
    }
}

/// Run the scenario across `points` evenly spaced values of `param` in
/// [from, to], in deterministic parameter order.
pub fn sweep(
    config: &ScenarioConfig,
    param: &str,
    from: f64,
    to: f64,
    points: usize,
) -> Result<SweepTable> {
    if points == 0 {
        return Err(CliError::Config(ConfigError::Invariant {
            field: "sweep.points".into(),
            msg: "empty range: need at least one point".into(),
        }));
    }
    let columns = sweep_columns(&config.kind);
    if columns.is_empty() {
        return Err(unknown_param(config.kind.name(), param, "none"));
    }
    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        let x = if points == 1 {
            from
        } else {
            from + (to - from) * i as f64 / (points - 1) as f64
        };
        let point_config = with_param(config, param, x)?;
        rows.push((x, sweep_row(&point_config)?));
    }
    Ok(SweepTable {
        param: param.to_string(),
        columns,
        rows,
    })
}

/// Write a sweep table under the configured CSV name (default `sweep.csv`).
pub fn write_sweep(
    config: &ScenarioConfig,
    table: &SweepTable,
    out_dir: Option<&Path>,
) -> Result<Vec<PathBuf>> {
    let name = config.output.csv.clone().unwrap_or_else(|| "sweep.csv".to_string());
    let path = match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            dir.join(name)
        }
        None => PathBuf::from(name),
    };
    std::fs::write(&path, table.to_csv())?;
    Ok(vec![path])
}
