//! Seeded construction and test point sets.

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The generator used for every random draw in the crate.
pub type SeedRng = ChaCha8Rng;

/// A generator for `seed`, positioned on its own `stream`.
///
/// ChaCha is counter based, so `(seed, stream)` pairs give independent
/// sequences that do not depend on the order in which they are created.
pub fn seeded_rng(seed: u64, stream: u64) -> SeedRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Axis-aligned box `[low_i, high_i]` per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds(Vec<(f64, f64)>);

impl Bounds {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidDomain("bounds need at least one dimension".into()));
        }
        for (i, &(lo, hi)) in intervals.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
                return Err(Error::InvalidDomain(format!(
                    "dimension {i}: [{lo}, {hi}] is empty or not finite"
                )));
            }
        }
        Ok(Bounds(intervals))
    }

    /// `[0, 1]^dim`.
    pub fn unit(dim: usize) -> Self {
        assert!(dim >= 1);
        Bounds(vec![(0.0, 1.0); dim])
    }

    /// The tightest box containing every point.
    pub fn enclosing(points: &[DVector<f64>]) -> Result<Self> {
        let first = points.first().ok_or(Error::Empty("points"))?;
        let mut b: Vec<(f64, f64)> = first.iter().map(|&v| (v, v)).collect();
        for p in points {
            for (iv, &v) in b.iter_mut().zip(p.iter()) {
                iv.0 = iv.0.min(v);
                iv.1 = iv.1.max(v);
            }
        }
        Bounds::new(b)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.0
    }

    pub fn widths(&self) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.0.iter().map(|(lo, hi)| hi - lo))
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        x.len() == self.dim() && self.0.iter().zip(x.iter()).all(|(&(lo, hi), &v)| lo <= v && v <= hi)
    }
}

/// A set of points inside a box.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub bounds: Bounds,
    pub points: Vec<DVector<f64>>,
}

impl SampleSet {
    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Plain Latin hypercube design with `p` points.
///
/// Each dimension is cut into `p` equal strata; a fresh random permutation
/// assigns strata to points and each coordinate is placed uniformly inside
/// its stratum. No space-filling criterion is applied.
pub fn latin_hypercube<R: Rng + ?Sized>(p: usize, bounds: &Bounds, rng: &mut R) -> Result<SampleSet> {
    if p == 0 {
        return Err(Error::InvalidArgument("latin hypercube needs p >= 1".into()));
    }
    let dim = bounds.dim();
    let mut points = vec![DVector::zeros(dim); p];
    let mut strata: Vec<usize> = (0..p).collect();
    for (d, &(lo, hi)) in bounds.intervals().iter().enumerate() {
        strata.shuffle(rng);
        let width = (hi - lo) / p as f64;
        for (point, &s) in points.iter_mut().zip(&strata) {
            let u: f64 = rng.random();
            // clamp guards the top stratum against rounding past `hi`
            point[d] = (lo + (s as f64 + u) * width).min(hi);
        }
    }
    Ok(SampleSet { bounds: bounds.clone(), points })
}

/// `n` independent uniform points in `bounds`.
pub fn uniform_cloud<R: Rng + ?Sized>(n: usize, bounds: &Bounds, rng: &mut R) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("uniform cloud needs n >= 1".into()));
    }
    let dim = bounds.dim();
    let points = (0..n)
        .map(|_| {
            DVector::from_iterator(
                dim,
                bounds.intervals().iter().map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()),
            )
        })
        .collect();
    Ok(SampleSet { bounds: bounds.clone(), points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use proptest::prelude::*;

    fn stratum_counts(set: &SampleSet, d: usize) -> Vec<usize> {
        let p = set.len();
        let (lo, hi) = set.bounds.intervals()[d];
        let mut counts = vec![0; p];
        for x in &set.points {
            let k = (((x[d] - lo) / (hi - lo)) * p as f64).floor() as usize;
            counts[k.min(p - 1)] += 1;
        }
        counts
    }

    #[test]
    fn four_points_one_dim() {
        let mut rng = seeded_rng(1, 0);
        let set = latin_hypercube(4, &Bounds::unit(1), &mut rng).unwrap();
        assert_eq!(stratum_counts(&set, 0), vec![1, 1, 1, 1]);
    }

    #[test]
    fn single_point_in_bounds() {
        let b = Bounds::new(vec![(-2.0, 3.0), (10.0, 11.0), (0.0, 0.5)]).unwrap();
        let set = latin_hypercube(1, &b, &mut seeded_rng(9, 0)).unwrap();
        assert_eq!(set.len(), 1);
        assert!(b.contains(&set.points[0]));
    }

    #[test]
    fn fifty_by_eight_audit() {
        let b = Bounds::new(vec![(-1.0, 2.0); 8]).unwrap();
        let set = latin_hypercube(50, &b, &mut seeded_rng(1234, 0)).unwrap();
        for d in 0..8 {
            assert!(stratum_counts(&set, d).iter().all(|&c| c == 1), "dimension {d}");
        }
    }

    #[test]
    fn degenerate_bounds_rejected() {
        assert!(matches!(Bounds::new(vec![(1.0, 1.0)]), Err(Error::InvalidDomain(_))));
        assert!(matches!(Bounds::new(vec![(2.0, 1.0)]), Err(Error::InvalidDomain(_))));
        assert!(Bounds::new(vec![]).is_err());
    }

    #[test]
    fn empty_cloud_rejected() {
        assert!(uniform_cloud(0, &Bounds::unit(2), &mut seeded_rng(0, 0)).is_err());
        assert!(latin_hypercube(0, &Bounds::unit(2), &mut seeded_rng(0, 0)).is_err());
    }

    #[test]
    fn large_cloud_mean_is_midpoint() {
        let n = 100_000;
        let b = Bounds::new(vec![(0.0, 1.0), (-4.0, 2.0)]).unwrap();
        let set = uniform_cloud(n, &b, &mut seeded_rng(77, 3)).unwrap();
        for (d, &(lo, hi)) in b.intervals().iter().enumerate() {
            let mean = set.points.iter().map(|x| x[d]).sum::<f64>() / n as f64;
            // standard error of a uniform mean: (hi - lo) / sqrt(12 n)
            let sigma = (hi - lo) / (12.0 * n as f64).sqrt();
            assert!((mean - 0.5 * (lo + hi)).abs() < 3.0 * sigma, "dimension {d}");
        }
    }

    #[test]
    fn high_dim_cloud_within_bounds() {
        let b = Bounds::new(vec![(-0.5, 0.25); 16]).unwrap();
        let set = uniform_cloud(1000, &b, &mut seeded_rng(5, 0)).unwrap();
        assert!(set.points.iter().all(|x| b.contains(x)));
    }

    #[test]
    fn streams_are_independent_of_creation_order() {
        let a: Vec<u64> = { let mut r = seeded_rng(42, 7); (0..4).map(|_| r.random()).collect() };
        let _ = seeded_rng(42, 3).random::<u64>();
        let b: Vec<u64> = { let mut r = seeded_rng(42, 7); (0..4).map(|_| r.random()).collect() };
        assert_eq!(a, b);
        let c: Vec<u64> = { let mut r = seeded_rng(42, 8); (0..4).map(|_| r.random()).collect() };
        assert_ne!(a, c);
    }

    proptest! {
        #[test]
        fn lhs_is_stratified_and_reproducible(seed in any::<u64>(), p in 1usize..40, dim in 1usize..6) {
            let b = Bounds::new((0..dim).map(|d| (d as f64, 2.0 * d as f64 + 1.0)).collect()).unwrap();
            let s1 = latin_hypercube(p, &b, &mut seeded_rng(seed, 0)).unwrap();
            let s2 = latin_hypercube(p, &b, &mut seeded_rng(seed, 0)).unwrap();
            prop_assert_eq!(&s1, &s2);
            for d in 0..dim {
                prop_assert!(stratum_counts(&s1, d).iter().all(|&c| c == 1));
            }
            prop_assert!(s1.points.iter().all(|x| b.contains(x)));
        }
    }
}
