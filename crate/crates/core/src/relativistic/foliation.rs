use serde::Serialize;

use super::geometry::Hypersurface;

/// Time-ordered, named spacelike surfaces.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Foliation {
    pub surfaces: Vec<(String, Hypersurface)>,
}

impl Foliation {
    pub fn new(surfaces: Vec<(String, Hypersurface)>) -> Self {
        Self { surfaces }
    }

    /// Flat surfaces `t = v` named `t0, t1, …`.
    pub fn flat(times: &[f64]) -> Self {
        Self::new(
            times
                .iter()
                .enumerate()
                .map(|(i, &t)| (format!("t{i}"), Hypersurface::flat(t)))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }

    pub fn surface(&self, name: &str) -> Option<&Hypersurface> {
        self.surfaces.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeViolation {
    pub surface: String,
    pub slope: f64,
}

/// `τ_lower(x) ≥ τ_upper(x)` at a breakpoint.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderingViolation {
    pub lower: String,
    pub upper: String,
    pub x: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FoliationReport {
    pub valid: bool,
    pub slope_violations: Vec<SlopeViolation>,
    pub ordering_violations: Vec<OrderingViolation>,
}

/// Checks every piece is spacelike and consecutive surfaces are strictly
/// ordered. The difference of two piecewise-linear surfaces is linear
/// between the union of their breakpoints and constant beyond it, so
/// checking the breakpoints is exhaustive.
pub fn validate_foliation(f: &Foliation) -> FoliationReport {
    let slope_violations: Vec<SlopeViolation> = f
        .surfaces
        .iter()
        .filter_map(|(n, s)| {
            s.max_abs_slope().filter(|m| *m >= 1.0).map(|slope| SlopeViolation {
                surface: n.clone(),
                slope,
            })
        })
        .collect();
    let mut ordering_violations = Vec::new();
    for w in f.surfaces.windows(2) {
        let (ln, lo) = (&w[0].0, &w[0].1);
        let (un, up) = (&w[1].0, &w[1].1);
        let mut xs: Vec<f64> = lo.knots().iter().chain(up.knots()).map(|k| k.0).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        for x in xs {
            let gap = up.tau(x) - lo.tau(x);
            if gap <= 0.0 {
                ordering_violations.push(OrderingViolation {
                    lower: ln.clone(),
                    upper: un.clone(),
                    x,
                    gap,
                });
            }
        }
    }
    FoliationReport {
        valid: slope_violations.is_empty() && ordering_violations.is_empty(),
        slope_violations,
        ordering_violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_surfaces_are_valid() {
        assert!(validate_foliation(&Foliation::flat(&[1.0, 2.0, 3.0])).valid);
    }

    #[test]
    fn boosted_lines_cross_rest_frame_surface() {
        // t = 10 + x/2 and t = 12 + x/2 cross t = 11 at x = 2 and x = −2
        let f = Foliation::new(vec![
            ("a".into(), Hypersurface::line(10.0, 0.5, -20.0, 20.0).unwrap()),
            ("b".into(), Hypersurface::flat(11.0)),
            ("c".into(), Hypersurface::line(12.0, 0.5, -20.0, 20.0).unwrap()),
        ]);
        let r = validate_foliation(&f);
        assert!(!r.valid);
        assert!(r.slope_violations.is_empty());
        assert!(r.ordering_violations.iter().any(|v| v.lower == "a" && v.x > 2.0));
        assert!(r.ordering_violations.iter().any(|v| v.lower == "b" && v.x < -2.0));
    }

    #[test]
    fn interleaved_piecewise_surfaces() {
        // rest-frame pieces on the left, boosted pieces (slope 1/2) on the right
        let s1 = Hypersurface::spacelike(vec![(-30.0, 10.0), (0.0, 10.0), (20.0, 20.0)]).unwrap();
        let s2 = Hypersurface::spacelike(vec![(-30.0, 12.0), (0.0, 12.0), (20.0, 22.0)]).unwrap();
        let s3 = Hypersurface::spacelike(vec![(-30.0, 30.0), (10.0, 30.0), (20.0, 30.0)]).unwrap();
        let f = Foliation::new(vec![("1".into(), s1), ("2".into(), s2), ("3".into(), s3)]);
        assert!(validate_foliation(&f).valid);
        let steep = Hypersurface::new(vec![(0.0, 0.0), (1.0, 5.0)]).unwrap();
        let g = Foliation::new(vec![("s".into(), steep)]);
        let r = validate_foliation(&g);
        assert_eq!(r.slope_violations.len(), 1);
        assert_eq!(r.slope_violations[0].slope, 5.0);
    }
}
