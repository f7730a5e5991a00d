use std::fmt;

use crate::error::{Error, Result};
use crate::point::Point;

/// Relative slack used when testing membership of computed points.
pub(crate) const MEMBERSHIP_TOL: f64 = 1e-12;

/// A nonempty closed convex subset of `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    Singleton(Point),
    /// Componentwise bounds; infinite bounds are allowed.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// `{x : <normal, x> <= offset}`
    Halfspace { normal: Point, offset: f64 },
    Ball { center: Point, radius: f64 },
}

impl ConvexSet {
    pub fn singleton(p: Point) -> Self {
        ConvexSet::Singleton(p)
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::invalid(
                "hi",
                format!("bounds must be nonempty and equal length ({} vs {})", lo.len(), hi.len()),
            ));
        }
        for (i, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if l.is_nan() || h.is_nan() || l > h || *l == f64::INFINITY || *h == f64::NEG_INFINITY {
                return Err(Error::invalid("lo", format!("empty interval [{l}, {h}] at coordinate {i}")));
            }
        }
        Ok(ConvexSet::Box { lo, hi })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        ConvexSet::boxed(vec![lo], vec![hi])
    }

    /// The whole space `R^d`, as an unbounded box.
    pub fn whole(dim: usize) -> Self {
        ConvexSet::Box {
            lo: vec![f64::NEG_INFINITY; dim],
            hi: vec![f64::INFINITY; dim],
        }
    }

    pub fn halfspace(normal: Point, offset: f64) -> Result<Self> {
        if normal.norm_sq() == 0.0 {
            return Err(Error::invalid("normal", "halfspace normal must be nonzero"));
        }
        if !offset.is_finite() {
            return Err(Error::invalid("offset", "must be finite"));
        }
        Ok(ConvexSet::Halfspace { normal, offset })
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::invalid("radius", format!("must be finite and >= 0, got {radius}")));
        }
        Ok(ConvexSet::Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Singleton(p) => p.dim(),
            ConvexSet::Box { lo, .. } => lo.len(),
            ConvexSet::Halfspace { normal, .. } => normal.dim(),
            ConvexSet::Ball { center, .. } => center.dim(),
        }
    }

    fn check_dim(&self, z: &Point) -> Result<()> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: z.dim(),
            });
        }
        Ok(())
    }

    /// Membership up to a small relative slack.
    pub fn contains(&self, x: &Point) -> bool {
        if x.dim() != self.dim() {
            return false;
        }
        let tol = MEMBERSHIP_TOL;
        match self {
            ConvexSet::Singleton(p) => x.distance(p) <= tol * (1.0 + p.norm()),
            ConvexSet::Box { lo, hi } => x.coords().iter().zip(lo.iter().zip(hi)).all(|(&v, (&l, &h))| {
                v >= l - tol * (1.0 + l.abs()) && v <= h + tol * (1.0 + h.abs())
            }),
            ConvexSet::Halfspace { normal, offset } => {
                normal.dot(x) <= offset + tol * (1.0 + offset.abs() + normal.norm() * x.norm())
            }
            ConvexSet::Ball { center, radius } => x.distance(center) <= radius + tol * (1.0 + radius),
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, z: &Point) -> Result<Point> {
        self.check_dim(z)?;
        Ok(match self {
            ConvexSet::Singleton(p) => p.clone(),
            ConvexSet::Box { lo, hi } => {
                let coords = z
                    .coords()
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(&v, (&l, &h))| v.clamp(l, h))
                    .collect();
                Point::new(coords)?
            }
            ConvexSet::Halfspace { normal, offset } => {
                let excess = normal.dot(z) - offset;
                if excess <= 0.0 {
                    z.clone()
                } else {
                    z.axpy(-excess / normal.norm_sq(), normal)
                }
            }
            ConvexSet::Ball { center, radius } => {
                let d = z.sub(center);
                let dist = d.norm();
                if dist <= *radius {
                    z.clone()
                } else {
                    center.axpy(radius / dist, &d)
                }
            }
        })
    }

    pub fn distance(&self, z: &Point) -> Result<f64> {
        Ok(self.project(z)?.distance(z))
    }
}

/// Free-function form of [`ConvexSet::project`].
pub fn project(set: &ConvexSet, z: &Point) -> Result<Point> {
    set.project(z)
}

impl fmt::Display for ConvexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvexSet::Singleton(p) => write!(f, "{{{p}}}"),
            ConvexSet::Box { lo, hi } => {
                let parts: Vec<String> = lo.iter().zip(hi).map(|(l, h)| format!("[{l}, {h}]")).collect();
                write!(f, "{}", parts.join(" x "))
            }
            ConvexSet::Halfspace { normal, offset } => write!(f, "{{x : <{normal}, x> <= {offset}}}"),
            ConvexSet::Ball { center, radius } => write!(f, "ball({center}, {radius})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton_projection() {
        let c = ConvexSet::singleton(Point::scalar(0.0));
        assert_eq!(c.project(&Point::scalar(4.25)).unwrap(), Point::scalar(0.0));
    }

    #[test]
    fn box_clamps() {
        let c = ConvexSet::interval(1.0, 2.0).unwrap();
        assert_eq!(c.project(&Point::scalar(0.3)).unwrap(), Point::scalar(1.0));
        assert_eq!(c.project(&Point::scalar(1.5)).unwrap(), Point::scalar(1.5));
    }

    #[test]
    fn halfspace_projection() {
        let c = ConvexSet::halfspace(Point::new(vec![1.0, 0.0]).unwrap(), 1.0).unwrap();
        let p = c.project(&Point::new(vec![3.0, 2.0]).unwrap()).unwrap();
        assert_eq!(p.coords(), &[1.0, 2.0]);
    }

    #[test]
    fn ball_projection() {
        let c = ConvexSet::ball(Point::zeros(2), 1.0).unwrap();
        let p = c.project(&Point::new(vec![3.0, 4.0]).unwrap()).unwrap();
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn invalid_sets_rejected() {
        assert!(ConvexSet::interval(2.0, 1.0).is_err());
        assert!(ConvexSet::halfspace(Point::zeros(2), 0.0).is_err());
        assert!(ConvexSet::ball(Point::zeros(1), -1.0).is_err());
        assert!(ConvexSet::whole(1).contains(&Point::scalar(1e300)));
    }

    #[test]
    fn dimension_checked() {
        let c = ConvexSet::interval(0.0, 1.0).unwrap();
        assert!(c.project(&Point::zeros(2)).is_err());
    }
}
