//! Extended phase-space state and trajectory containers.
//!
//! A point in extended phase space carries the usual pair (x, p) plus the
//! conjugate pair (τ, m): proper time and mass. Natural units with c = 1
//! throughout; ħ is a configurable scale carried by [`Units`].

use crate::error::{Error, Result};
use crate::report::fmt_f64;

/// Unit conventions. The speed of light is fixed at c = 1; ħ is a free scale
/// so phases can be quoted either in natural units or with an explicit ħ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    pub hbar: f64,
}

impl Units {
    pub fn new(hbar: f64) -> Result<Self> {
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::Precondition(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Units { hbar })
    }
}

impl Default for Units {
    fn default() -> Self {
        Units { hbar: 1.0 }
    }
}

/// A small fixed-capacity spatial vector; the dimension (1-3) is a
/// scenario-level constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialVec {
    comps: [f64; 3],
    dim: usize,
}

impl SpatialVec {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=3).contains(&dim), "spatial dimension must be 1-3");
        SpatialVec { comps: [0.0; 3], dim }
    }

    pub fn from_slice(comps: &[f64]) -> Self {
        assert!((1..=3).contains(&comps.len()), "spatial dimension must be 1-3");
        let mut v = SpatialVec::zeros(comps.len());
        v.comps[..comps.len()].copy_from_slice(comps);
        v
    }

    /// One-dimensional constructor; most scenarios live on a line.
    pub fn scalar(value: f64) -> Self {
        SpatialVec::from_slice(&[value])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.comps[..self.dim]
    }

    pub fn norm_sq(&self) -> f64 {
        self.as_slice().iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(&self, other: &SpatialVec) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = *self;
        for c in out.comps[..out.dim].iter_mut() {
            *c *= factor;
        }
        out
    }

    pub fn add(&self, other: &SpatialVec) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut out = *self;
        for (c, o) in out.comps[..out.dim].iter_mut().zip(other.as_slice()) {
            *c += o;
        }
        out
    }

    pub fn sub(&self, other: &SpatialVec) -> Self {
        self.add(&other.scaled(-1.0))
    }
}

impl std::ops::Index<usize> for SpatialVec {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

/// One particle's point in extended phase space: (t, x, p, τ, m).
///
/// States are plain values; every operation on them is a pure function.
/// The mass is required to be nonnegative. τ ≤ t is deliberately *not*
/// enforced per state: clocks may be reset independently, and the bound
/// only holds trajectory-wise for sub-luminal motion started at τ = t = 0
/// (see [`Trajectory::proper_time_bounded`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedState {
    pub t: f64,
    pub x: SpatialVec,
    pub p: SpatialVec,
    pub tau: f64,
    pub m: f64,
}

impl ExtendedState {
    pub fn new(t: f64, x: SpatialVec, p: SpatialVec, tau: f64, m: f64) -> Result<Self> {
        if x.dim() != p.dim() {
            return Err(Error::Precondition(format!(
                "position dimension {} != momentum dimension {}",
                x.dim(),
                p.dim()
            )));
        }
        if !(m >= 0.0) {
            return Err(Error::Precondition(format!("mass must be nonnegative, got {m}")));
        }
        Ok(ExtendedState { t, x, p, tau, m })
    }

    /// 1D state at lab time 0 with clock at 0; the common scenario opener.
    pub fn rest_1d(m: f64) -> Result<Self> {
        ExtendedState::new(0.0, SpatialVec::scalar(0.0), SpatialVec::scalar(0.0), 0.0, m)
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    /// Euler-advance by `dt` along a derivative; building block for the
    /// Runge-Kutta steppers.
    pub(crate) fn advanced(&self, d: &StateDeriv, dt: f64) -> ExtendedState {
        ExtendedState {
            t: self.t + dt,
            x: self.x.add(&d.x_dot.scaled(dt)),
            p: self.p.add(&d.p_dot.scaled(dt)),
            tau: self.tau + dt * d.tau_dot,
            m: self.m + dt * d.m_dot,
        }
    }
}

/// Time derivative of an extended state: (ẋ, ṗ, τ̇, ṁ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDeriv {
    pub x_dot: SpatialVec,
    pub p_dot: SpatialVec,
    pub tau_dot: f64,
    pub m_dot: f64,
}

impl StateDeriv {
    pub fn scaled(&self, factor: f64) -> Self {
        StateDeriv {
            x_dot: self.x_dot.scaled(factor),
            p_dot: self.p_dot.scaled(factor),
            tau_dot: self.tau_dot * factor,
            m_dot: self.m_dot * factor,
        }
    }

    pub fn add(&self, other: &StateDeriv) -> Self {
        StateDeriv {
            x_dot: self.x_dot.add(&other.x_dot),
            p_dot: self.p_dot.add(&other.p_dot),
            tau_dot: self.tau_dot + other.tau_dot,
            m_dot: self.m_dot + other.m_dot,
        }
    }
}

/// Provenance of a [`Trajectory`]: integrator name, step (or tolerance),
/// and a caller-chosen scenario id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryMeta {
    pub integrator: String,
    pub step: f64,
    pub scenario: String,
}

/// Time-ordered samples of one integration run plus the Hamiltonian value
/// at each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<ExtendedState>,
    hamiltonian_values: Vec<f64>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn new(meta: TrajectoryMeta) -> Self {
        Trajectory {
            samples: Vec::new(),
            hamiltonian_values: Vec::new(),
            meta,
        }
    }

    /// Append a sample. Samples must be strictly increasing in t.
    pub fn push(&mut self, s: ExtendedState, h_value: f64) -> Result<()> {
        if let Some(last) = self.samples.last() {
            if s.t <= last.t {
                return Err(Error::Precondition(format!(
                    "trajectory samples must be strictly increasing in t ({} after {})",
                    s.t, last.t
                )));
            }
            if s.dim() != last.dim() {
                return Err(Error::Precondition("sample dimension changed mid-trajectory".into()));
            }
        }
        self.samples.push(s);
        self.hamiltonian_values.push(h_value);
        Ok(())
    }

    pub fn samples(&self) -> &[ExtendedState] {
        &self.samples
    }

    pub fn hamiltonian_values(&self) -> &[f64] {
        &self.hamiltonian_values
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> Option<&ExtendedState> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&ExtendedState> {
        self.samples.last()
    }

    /// Largest |H(t) - H(0)| / |H(0)| over the run. Zero for empty runs.
    pub fn max_rel_energy_drift(&self) -> f64 {
        let h0 = match self.hamiltonian_values.first() {
            Some(&h) => h,
            None => return 0.0,
        };
        let scale = h0.abs().max(f64::MIN_POSITIVE);
        self.hamiltonian_values
            .iter()
            .map(|h| (h - h0).abs() / scale)
            .fold(0.0, f64::max)
    }

    /// Whether the elapsed proper time never exceeds the elapsed lab time.
    ///
    /// This is a diagnostic, not an enforced invariant: a positive uniform
    /// gravitational potential legitimately runs the comoving clock faster
    /// than the lab clock.
    pub fn proper_time_bounded(&self) -> bool {
        let (t0, tau0) = match self.samples.first() {
            Some(s) => (s.t, s.tau),
            None => return true,
        };
        self.samples
            .iter()
            .all(|s| s.tau - tau0 <= s.t - t0 + 1e-12)
    }

    /// Dense output: linear interpolation between the two bracketing samples.
    pub fn state_at(&self, t: f64) -> Option<ExtendedState> {
        let first = self.samples.first()?;
        let last = self.samples.last()?;
        if t < first.t || t > last.t {
            return None;
        }
        let idx = self.samples.partition_point(|s| s.t < t);
        if idx == 0 {
            return Some(*first);
        }
        let hi = self.samples.get(idx).unwrap_or(last);
        let lo = &self.samples[idx - 1];
        if hi.t == lo.t {
            return Some(*lo);
        }
        let w = (t - lo.t) / (hi.t - lo.t);
        let lerp_vec = |a: &SpatialVec, b: &SpatialVec| a.add(&b.sub(a).scaled(w));
        Some(ExtendedState {
            t,
            x: lerp_vec(&lo.x, &hi.x),
            p: lerp_vec(&lo.p, &hi.p),
            tau: lo.tau + w * (hi.tau - lo.tau),
            m: lo.m + w * (hi.m - lo.m),
        })
    }

    /// CSV header for this trajectory's dimension: `t,x,p,tau,m,H` in 1D,
    /// `t,x1..xd,p1..pd,tau,m,H` otherwise.
    pub fn csv_header(&self) -> String {
        let dim = self.samples.first().map_or(1, |s| s.dim());
        let mut cols = vec!["t".to_string()];
        if dim == 1 {
            cols.push("x".into());
            cols.push("p".into());
        } else {
            cols.extend((1..=dim).map(|i| format!("x{i}")));
            cols.extend((1..=dim).map(|i| format!("p{i}")));
        }
        cols.push("tau".into());
        cols.push("m".into());
        cols.push("H".into());
        cols.join(",")
    }

    /// Full-precision CSV rendering (17 significant digits per value).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.csv_header());
        out.push('\n');
        for (s, h) in self.samples.iter().zip(&self.hamiltonian_values) {
            let mut fields = vec![fmt_f64(s.t)];
            fields.extend(s.x.as_slice().iter().map(|&v| fmt_f64(v)));
            fields.extend(s.p.as_slice().iter().map(|&v| fmt_f64(v)));
            fields.push(fmt_f64(s.tau));
            fields.push(fmt_f64(s.m));
            fields.push(fmt_f64(*h));
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn units_reject_nonpositive_hbar() {
        assert!(Units::new(0.0).is_err());
        assert!(Units::new(-1.0).is_err());
        assert_eq!(Units::default().hbar, 1.0);
    }

    #[test]
    fn state_rejects_negative_mass_and_mixed_dims() {
        let x1 = SpatialVec::scalar(0.0);
        let p2 = SpatialVec::from_slice(&[0.0, 0.0]);
        assert!(ExtendedState::new(0.0, x1, p2, 0.0, 1.0).is_err());
        assert!(ExtendedState::new(0.0, x1, x1, 0.0, -0.5).is_err());
    }

    #[test]
    fn trajectory_requires_increasing_time() {
        let mut traj = Trajectory::new(TrajectoryMeta::default());
        let s = ExtendedState::rest_1d(1.0).unwrap();
        traj.push(s, 1.0).unwrap();
        assert!(traj.push(s, 1.0).is_err());
        let mut later = s;
        later.t = 0.5;
        traj.push(later, 1.0).unwrap();
        assert_eq!(traj.len(), 2);
    }

    #[test]
    fn csv_header_matches_dimension() {
        let mut traj = Trajectory::new(TrajectoryMeta::default());
        let x = SpatialVec::from_slice(&[0.0, 1.0]);
        traj.push(ExtendedState::new(0.0, x, x, 0.0, 1.0).unwrap(), 2.0)
            .unwrap();
        assert_eq!(traj.csv_header(), "t,x1,x2,p1,p2,tau,m,H");
    }

    #[test]
    fn dense_output_interpolates_linearly() {
        let mut traj = Trajectory::new(TrajectoryMeta::default());
        let mut s = ExtendedState::rest_1d(1.0).unwrap();
        traj.push(s, 1.0).unwrap();
        s.t = 1.0;
        s.x = SpatialVec::scalar(2.0);
        s.tau = 0.5;
        traj.push(s, 1.0).unwrap();
        let mid = traj.state_at(0.5).unwrap();
        assert_eq!(mid.x[0], 1.0);
        assert_eq!(mid.tau, 0.25);
        assert!(traj.state_at(2.0).is_none());
    }
}
