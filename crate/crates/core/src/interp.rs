//! C¹ piecewise-cubic Hermite interpolation on a strictly increasing grid.
//!
//! Interior slopes are centered three-point differences, end slopes are
//! one-sided secants. The derivative is continuous across knots, which
//! matters when an interpolated potential feeds an equation of motion.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CubicHermite {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl CubicHermite {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(Error::Precondition(format!(
                "need at least 2 knots with matching values, got {} xs / {} ys",
                xs.len(),
                ys.len()
            )));
        }
        if xs.iter().any(|v| !v.is_finite()) || ys.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("knots must be finite".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Precondition("knot grid must be strictly increasing".into()));
        }
        let n = xs.len();
        let mut slopes = vec![0.0; n];
        slopes[0] = (ys[1] - ys[0]) / (xs[1] - xs[0]);
        slopes[n - 1] = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
        for i in 1..n - 1 {
            slopes[i] = (ys[i + 1] - ys[i - 1]) / (xs[i + 1] - xs[i - 1]);
        }
        Ok(CubicHermite { xs, ys, slopes })
    }

    pub fn min_x(&self) -> f64 {
        self.xs[0]
    }

    pub fn max_x(&self) -> f64 {
        *self.xs.last().expect("nonempty grid")
    }

    fn locate(&self, x: f64) -> Result<usize> {
        if !(x >= self.min_x() && x <= self.max_x()) {
            return Err(Error::TauOutOfRange {
                tau: x,
                min: self.min_x(),
                max: self.max_x(),
            });
        }
        // partition_point gives the first knot > x; clamp to the last interval.
        let idx = self.xs.partition_point(|&k| k <= x);
        Ok(idx.clamp(1, self.xs.len() - 1) - 1)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let i = self.locate(x)?;
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Ok(h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1])
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        let i = self.locate(x)?;
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        Ok(d00 * self.ys[i] + d10 * self.slopes[i] + d01 * self.ys[i + 1] + d11 * self.slopes[i + 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_knots_exactly() {
        let c = CubicHermite::new(vec![0.0, 1.0, 3.0], vec![1.0, 2.0, 0.0]).unwrap();
        assert_eq!(c.eval(0.0).unwrap(), 1.0);
        assert_eq!(c.eval(1.0).unwrap(), 2.0);
        assert_eq!(c.eval(3.0).unwrap(), 0.0);
    }

    #[test]
    fn is_exact_on_straight_lines() {
        let xs: Vec<f64> = (0..6).map(|i| i as f64 * 0.7).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let c = CubicHermite::new(xs, ys).unwrap();
        for k in 0..40 {
            let x = 3.5 * k as f64 / 40.0;
            assert!((c.eval(x).unwrap() - (3.0 * x - 1.0)).abs() < 1e-12);
            assert!((c.derivative(x).unwrap() - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_is_continuous_at_knots() {
        let xs = vec![0.0, 0.5, 1.2, 2.0, 3.1];
        let ys = vec![0.0, 0.3, 0.1, 0.9, 0.4];
        let c = CubicHermite::new(xs.clone(), ys).unwrap();
        for &knot in &xs[1..xs.len() - 1] {
            let eps = 1e-9;
            let left = c.derivative(knot - eps).unwrap();
            let right = c.derivative(knot + eps).unwrap();
            assert!((left - right).abs() < 1e-6, "kink at {knot}: {left} vs {right}");
        }
    }

    #[test]
    fn rejects_bad_grids_and_out_of_range() {
        assert!(CubicHermite::new(vec![0.0], vec![1.0]).is_err());
        assert!(CubicHermite::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        let c = CubicHermite::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert!(matches!(c.eval(1.5), Err(Error::TauOutOfRange { .. })));
        assert!(c.eval(-0.1).is_err());
    }
}
