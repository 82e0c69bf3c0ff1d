use serde::Serialize;

use crate::error::{Error, Result};

/// Band around the light cone treated as lightlike.
pub const LIGHTLIKE_BAND: f64 = 1e-12;

/// A point of 1+1-D Minkowski space, `c = 1` cell per step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpacetimePoint {
    pub x: f64,
    pub t: f64,
}

impl SpacetimePoint {
    pub fn new(x: f64, t: f64) -> Result<Self> {
        if !x.is_finite() || !t.is_finite() {
            return Err(Error::NonFinite("spacetime point"));
        }
        Ok(Self { x, t })
    }

    /// `Δt² − Δx²` towards `other`.
    pub fn interval(&self, other: &SpacetimePoint) -> f64 {
        let dt = other.t - self.t;
        let dx = other.x - self.x;
        dt * dt - dx * dx
    }

    /// True when `other` lies in or on the future light cone of `self`.
    pub fn causally_precedes(&self, other: &SpacetimePoint) -> bool {
        other.t > self.t && classify_interval(self, other) != IntervalKind::Spacelike
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalKind {
    Timelike,
    Spacelike,
    Lightlike,
}

pub fn classify_interval(p: &SpacetimePoint, q: &SpacetimePoint) -> IntervalKind {
    let s = p.interval(q);
    if s.abs() < LIGHTLIKE_BAND {
        IntervalKind::Lightlike
    } else if s > 0.0 {
        IntervalKind::Timelike
    } else {
        IntervalKind::Spacelike
    }
}

/// `x′ = γ(x − vt)`, `t′ = γ(t − vx)`.
pub fn boost(p: &SpacetimePoint, v: f64) -> Result<SpacetimePoint> {
    if !v.is_finite() || v.abs() >= 1.0 {
        return Err(Error::SuperluminalBoost(v.abs()));
    }
    let g = 1.0 / (1.0 - v * v).sqrt();
    Ok(SpacetimePoint {
        x: g * (p.x - v * p.t),
        t: g * (p.t - v * p.x),
    })
}

/// A surface `t = τ(x)`, piecewise linear between knots sorted by `x`,
/// extended flat beyond the outermost knots.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hypersurface {
    knots: Vec<(f64, f64)>,
}

impl Hypersurface {
    /// Accepts any finite knots with distinct `x`; see [`Hypersurface::spacelike`]
    /// for the validating constructor.
    pub fn new(mut knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Empty("hypersurface knots"));
        }
        if knots.iter().any(|(x, t)| !x.is_finite() || !t.is_finite()) {
            return Err(Error::NonFinite("hypersurface knot"));
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        if knots.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidGeometry("two knots share one x".into()));
        }
        Ok(Self { knots })
    }

    pub fn spacelike(knots: Vec<(f64, f64)>) -> Result<Self> {
        let s = Self::new(knots)?;
        if let Some(slope) = s.max_abs_slope().filter(|m| *m >= 1.0) {
            return Err(Error::InvalidGeometry(format!(
                "piece with slope {slope} is not spacelike"
            )));
        }
        Ok(s)
    }

    /// Constant-time surface.
    pub fn flat(t: f64) -> Self {
        Self {
            knots: vec![(0.0, t)],
        }
    }

    /// `t = t0 + slope·x`, the simultaneity line of a moving frame.
    pub fn line(t0: f64, slope: f64, x_min: f64, x_max: f64) -> Result<Self> {
        Self::spacelike(vec![(x_min, t0 + slope * x_min), (x_max, t0 + slope * x_max)])
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn tau(&self, x: f64) -> f64 {
        let k = &self.knots;
        if x <= k[0].0 {
            return k[0].1;
        }
        if x >= k[k.len() - 1].0 {
            return k[k.len() - 1].1;
        }
        let i = k.partition_point(|p| p.0 <= x);
        let (x0, t0) = k[i - 1];
        let (x1, t1) = k[i];
        t0 + (t1 - t0) * (x - x0) / (x1 - x0)
    }

    pub fn point(&self, x: f64) -> SpacetimePoint {
        SpacetimePoint { x, t: self.tau(x) }
    }

    /// Largest `|dτ/dx|` over the pieces; `None` for a single knot.
    pub fn max_abs_slope(&self) -> Option<f64> {
        self.knots
            .windows(2)
            .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
            .reduce(f64::max)
    }

    pub fn is_spacelike(&self) -> bool {
        self.max_abs_slope().is_none_or(|m| m < 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(x: f64, t: f64) -> SpacetimePoint {
        SpacetimePoint::new(x, t).unwrap()
    }

    #[test]
    fn interval_classes() {
        assert_eq!(classify_interval(&p(0.0, 0.0), &p(5.0, 0.0)), IntervalKind::Spacelike);
        assert_eq!(classify_interval(&p(0.0, 0.0), &p(0.0, 5.0)), IntervalKind::Timelike);
        assert_eq!(classify_interval(&p(0.0, 0.0), &p(3.0, 3.0)), IntervalKind::Lightlike);
        assert!(p(0.0, 0.0).causally_precedes(&p(3.0, 3.0)));
        assert!(!p(0.0, 3.0).causally_precedes(&p(0.0, 0.0)));
    }

    #[test]
    fn boost_basics() {
        let q = p(3.0, -7.0);
        assert_eq!(boost(&q, 0.0).unwrap(), q);
        assert!(matches!(boost(&q, 1.0), Err(Error::SuperluminalBoost(_))));
        assert!(boost(&q, -1.5).is_err());
        // interval is invariant up to rounding
        let b = boost(&q, 0.6).unwrap();
        let o = boost(&p(0.0, 0.0), 0.6).unwrap();
        assert!((o.interval(&b) - p(0.0, 0.0).interval(&q)).abs() < 1e-12);
    }

    #[test]
    fn boost_preserves_classes_and_timelike_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        for _ in 0..1000 {
            let a = p(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
            let b = p(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
            for v in [0.6, 0.9, -0.9] {
                let (a2, b2) = (boost(&a, v).unwrap(), boost(&b, v).unwrap());
                let k = classify_interval(&a, &b);
                assert_eq!(k, classify_interval(&a2, &b2));
                if k == IntervalKind::Timelike {
                    assert_eq!(a.t < b.t, a2.t < b2.t);
                    checked += 1;
                }
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn surfaces() {
        let s = Hypersurface::spacelike(vec![(0.0, 1.0), (4.0, 3.0), (-2.0, 0.0)]).unwrap();
        assert_eq!(s.knots()[0], (-2.0, 0.0));
        assert_eq!(s.tau(2.0), 2.0);
        assert_eq!(s.tau(-10.0), 0.0);
        assert_eq!(s.tau(10.0), 3.0);
        assert_eq!(s.max_abs_slope(), Some(0.5));
        assert!(Hypersurface::spacelike(vec![(0.0, 0.0), (1.0, 1.0)]).is_err());
        let loose = Hypersurface::new(vec![(0.0, 0.0), (1.0, 2.0)]).unwrap();
        assert!(!loose.is_spacelike());
        assert!(Hypersurface::flat(4.0).is_spacelike());
        assert!(Hypersurface::new(vec![(1.0, 0.0), (1.0, 2.0)]).is_err());
    }
}
