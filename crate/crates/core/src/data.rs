//! Two mirrored Gaussian clusters in the plane.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::Rng;

use crate::math;
use crate::rng::{normal_pair, seeded};
use crate::svm::Dataset;
use crate::{Error, Result};

/// How the cluster scale `r` sets the per-axis spread.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Spread {
    /// Per-axis variance `r`, i.e. standard deviation `sqrt(r)`.
    #[default]
    Variance,
    /// Per-axis standard deviation `r`.
    StdDev,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClusterSpec {
    pub r: f64,
    pub theta_seed: u64,
    pub point_seed: u64,
    pub n_red: usize,
    pub n_blue: usize,
    pub spread: Spread,
}

impl ClusterSpec {
    pub fn new(r: f64, n_red: usize, n_blue: usize, theta_seed: u64, point_seed: u64) -> Self {
        Self {
            r,
            theta_seed,
            point_seed,
            n_red,
            n_blue,
            spread: Spread::Variance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidParameter("cluster radius must be positive"));
        }
        if self.n_red == 0 || self.n_blue == 0 {
            return Err(Error::InvalidParameter("cluster counts must be at least 1"));
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        match self.spread {
            Spread::Variance => math::sqrt(self.r),
            Spread::StdDev => self.r,
        }
    }

    /// The angle `Θ` drawn from `theta_seed`.
    pub fn theta(&self) -> f64 {
        seeded(self.theta_seed, 0).random::<f64>() * TAU
    }

    /// Center of the red cluster; the blue one sits at its negation.
    pub fn red_center(&self) -> (f64, f64) {
        let t = self.theta();
        (self.r * math::cos(t), self.r * math::sin(t))
    }
}

/// Red points (label `+1`) first, then blue points (label `-1`).
pub fn generate(spec: &ClusterSpec) -> Result<Dataset> {
    spec.validate()?;
    let (cx, cy) = spec.red_center();
    let sigma = spec.sigma();
    let mut rng = seeded(spec.point_seed, 1);
    let total = spec.n_red + spec.n_blue;
    let mut points = Vec::with_capacity(total);
    let mut labels = Vec::with_capacity(total);
    for k in 0..total {
        let (sign, label) = if k < spec.n_red { (1.0, 1) } else { (-1.0, -1) };
        let (gx, gy) = normal_pair(&mut rng);
        points.push(alloc::vec![sign * cx + sigma * gx, sign * cy + sigma * gy]);
        labels.push(label);
    }
    Dataset::new(points, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_two_points() {
        let spec = ClusterSpec::new(2.0, 1, 1, 7, 8);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert_eq!(a.labels(), &[1, -1]);
        let c = generate(&ClusterSpec::new(2.0, 1, 1, 7, 9)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sixty_three_points() {
        let d = generate(&ClusterSpec::new(2.0, 31, 32, 1, 2)).unwrap();
        assert_eq!(d.len(), 63);
        assert_eq!(d.labels().iter().filter(|&&l| l == 1).count(), 31);
        assert!(d.validate_for_training().is_ok());
    }

    fn centroid(d: &Dataset, label: i8) -> (f64, f64, usize) {
        let mut s = (0.0, 0.0, 0);
        for (p, &l) in d.points().iter().zip(d.labels()) {
            if l == label {
                s.0 += p[0];
                s.1 += p[1];
                s.2 += 1;
            }
        }
        (s.0 / s.2 as f64, s.1 / s.2 as f64, s.2)
    }

    #[test]
    fn centroids_converge() {
        let n = 10_000;
        for spread in [Spread::Variance, Spread::StdDev] {
            let spec = ClusterSpec {
                spread,
                ..ClusterSpec::new(2.0, n, n, 3, 4)
            };
            let d = generate(&spec).unwrap();
            let (cx, cy) = spec.red_center();
            let tol = 3.0 * spec.sigma() / (n as f64).sqrt();
            let (rx, ry, _) = centroid(&d, 1);
            let (bx, by, _) = centroid(&d, -1);
            assert!((rx - cx).abs() < tol && (ry - cy).abs() < tol);
            assert!((bx + cx).abs() < tol && (by + cy).abs() < tol);
        }
    }

    #[test]
    fn sample_variance_matches_spread() {
        let n = 20_000;
        let spec = ClusterSpec::new(2.0, n, 1, 5, 6);
        let d = generate(&spec).unwrap();
        let (cx, _, _) = centroid(&d, 1);
        let var: f64 = d.points()[..n].iter().map(|p| (p[0] - cx).powi(2)).sum::<f64>() / n as f64;
        assert!((var - 2.0).abs() < 0.1, "{var}");
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(generate(&ClusterSpec::new(0.0, 1, 1, 0, 0)).is_err());
        assert!(generate(&ClusterSpec::new(1.0, 0, 1, 0, 0)).is_err());
    }
}
