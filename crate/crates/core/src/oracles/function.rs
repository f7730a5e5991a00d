use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::set::ConvexSet;
use super::SelectionStrategy;
use crate::error::{Error, Result};
use crate::point::Point;

/// Catalog of proper convex lower semicontinuous functions with closed-form
/// epsilon-subdifferentials and, where available, resolvents.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexFunctionOracle {
    /// `f(t) = -sqrt(t)` for `t >= 0`, `+inf` otherwise (one-dimensional).
    NegSqrt,
    /// `f(x) = 1/2 ||x - center||^2`
    Quadratic { center: Point },
    /// `f(x) = ||x||_1`; `|t|` in one dimension.
    Abs,
    /// Indicator of a closed convex set: `0` on the set, `+inf` elsewhere.
    Indicator(ConvexSet),
    /// `f(x) = <g, x>`
    Linear { g: Point },
}

/// Exact subdifferential `df(x)` in a form that supports intersection.
#[derive(Debug, Clone, PartialEq)]
pub enum Subdifferential {
    Empty,
    /// Product of closed intervals, one per coordinate (infinite ends allowed).
    Intervals(Vec<(f64, f64)>),
    /// The ray `{t * dir : t >= 0}`.
    Ray(Point),
}

impl ConvexFunctionOracle {
    pub fn quadratic(center: Point) -> Self {
        ConvexFunctionOracle::Quadratic { center }
    }

    pub fn indicator(set: ConvexSet) -> Self {
        ConvexFunctionOracle::Indicator(set)
    }

    pub fn linear(g: Point) -> Self {
        ConvexFunctionOracle::Linear { g }
    }

    /// Fixed dimension of the oracle, `None` when any dimension is accepted.
    pub fn dim(&self) -> Option<usize> {
        match self {
            ConvexFunctionOracle::NegSqrt => Some(1),
            ConvexFunctionOracle::Quadratic { center } => Some(center.dim()),
            ConvexFunctionOracle::Abs => None,
            ConvexFunctionOracle::Indicator(set) => Some(set.dim()),
            ConvexFunctionOracle::Linear { g } => Some(g.dim()),
        }
    }

    pub(crate) fn check_dim(&self, x: &Point) -> Result<()> {
        match self.dim() {
            Some(d) if d != x.dim() => Err(Error::DimensionMismatch {
                expected: d,
                found: x.dim(),
            }),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    pub fn eval(&self, x: &Point) -> Result<f64> {
        self.check_dim(x)?;
        Ok(match self {
            ConvexFunctionOracle::NegSqrt => {
                if x[0] >= 0.0 {
                    -x[0].sqrt()
                } else {
                    f64::INFINITY
                }
            }
            ConvexFunctionOracle::Quadratic { center } => 0.5 * x.sub(center).norm_sq(),
            ConvexFunctionOracle::Abs => x.coords().iter().map(|v| v.abs()).sum(),
            ConvexFunctionOracle::Indicator(set) => {
                if set.contains(x) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ConvexFunctionOracle::Linear { g } => g.dot(x),
        })
    }

    pub fn in_domain(&self, x: &Point) -> bool {
        self.eval(x).is_ok_and(|v| v < f64::INFINITY)
    }

    pub(crate) fn require_domain(&self, x: &Point) -> Result<()> {
        if !self.in_domain(x) {
            self.check_dim(x)?;
            return Err(Error::Domain {
                oracle: self.name(),
                x: x.clone(),
            });
        }
        Ok(())
    }

    pub fn has_resolvent(&self) -> bool {
        !matches!(self, ConvexFunctionOracle::NegSqrt)
    }

    /// `(I + lambda df)^-1 (z)`.
    pub fn resolvent(&self, lambda: f64, z: &Point) -> Result<Point> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid("lambda", format!("must be finite and positive, got {lambda}")));
        }
        self.check_dim(z)?;
        match self {
            ConvexFunctionOracle::Indicator(set) => set.project(z),
            ConvexFunctionOracle::Quadratic { center } => {
                Ok(z.axpy(lambda, center).scale(1.0 / (1.0 + lambda)))
            }
            ConvexFunctionOracle::Abs => Ok(z.map(|v| v.signum() * (v.abs() - lambda).max(0.0))),
            ConvexFunctionOracle::Linear { g } => Ok(z.axpy(-lambda, g)),
            ConvexFunctionOracle::NegSqrt => Err(Error::UnsupportedResolvent(self.name())),
        }
    }

    /// Closed-form exact subdifferential at a point of the domain.
    pub fn subdifferential(&self, x: &Point) -> Result<Subdifferential> {
        self.require_domain(x)?;
        let point = |p: Point| Subdifferential::Intervals(p.coords().iter().map(|&v| (v, v)).collect());
        Ok(match self {
            ConvexFunctionOracle::NegSqrt => {
                if x[0] > 0.0 {
                    point(Point::scalar(-0.5 / x[0].sqrt()))
                } else {
                    Subdifferential::Empty
                }
            }
            ConvexFunctionOracle::Quadratic { center } => point(x.sub(center)),
            ConvexFunctionOracle::Linear { g } => point(g.clone()),
            ConvexFunctionOracle::Abs => Subdifferential::Intervals(
                x.coords()
                    .iter()
                    .map(|&v| if v == 0.0 { (-1.0, 1.0) } else { (v.signum(), v.signum()) })
                    .collect(),
            ),
            ConvexFunctionOracle::Indicator(set) => normal_cone(set, x),
        })
    }
}

fn normal_cone(set: &ConvexSet, x: &Point) -> Subdifferential {
    match set {
        ConvexSet::Singleton(p) => Subdifferential::Intervals(vec![(f64::NEG_INFINITY, f64::INFINITY); p.dim()]),
        ConvexSet::Box { lo, hi } => Subdifferential::Intervals(
            x.coords()
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(&v, (&l, &h))| {
                    let at_lo = v <= l;
                    let at_hi = v >= h;
                    match (at_lo, at_hi) {
                        (true, true) => (f64::NEG_INFINITY, f64::INFINITY),
                        (true, false) => (f64::NEG_INFINITY, 0.0),
                        (false, true) => (0.0, f64::INFINITY),
                        (false, false) => (0.0, 0.0),
                    }
                })
                .collect(),
        ),
        ConvexSet::Halfspace { normal, offset } => {
            if normal.dot(x) >= *offset {
                Subdifferential::Ray(normal.clone())
            } else {
                Subdifferential::Intervals(vec![(0.0, 0.0); normal.dim()])
            }
        }
        ConvexSet::Ball { center, radius } => {
            let d = x.sub(center);
            if d.norm() >= *radius {
                Subdifferential::Ray(d)
            } else {
                Subdifferential::Intervals(vec![(0.0, 0.0); center.dim()])
            }
        }
    }
}

impl fmt::Display for ConvexFunctionOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvexFunctionOracle::NegSqrt => write!(f, "neg_sqrt"),
            ConvexFunctionOracle::Quadratic { center } => write!(f, "quadratic(a={center})"),
            ConvexFunctionOracle::Abs => write!(f, "abs"),
            ConvexFunctionOracle::Indicator(set) => write!(f, "indicator({set})"),
            ConvexFunctionOracle::Linear { g } => write!(f, "linear(g={g})"),
        }
    }
}

/// Selects an element of the epsilon-subdifferential of `oracle` at `x`.
///
/// `MinNorm` returns the minimum-norm exact subgradient when `df(x)` is
/// nonempty and the minimum-norm epsilon-subgradient otherwise. `Boundary`
/// returns the largest-norm point of the set when it is bounded, and its
/// finite endpoint otherwise. `Random` draws an element deterministically from
/// the seed.
pub fn eps_subgradient(
    oracle: &ConvexFunctionOracle,
    x: &Point,
    eps: f64,
    strategy: SelectionStrategy,
) -> Result<Point> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::invalid("eps", format!("must be finite and >= 0, got {eps}")));
    }
    oracle.require_domain(x)?;
    let mut rng = match strategy {
        SelectionStrategy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    match oracle {
        ConvexFunctionOracle::Quadratic { center } => {
            let g = x.sub(center);
            let radius = (2.0 * eps).sqrt();
            Ok(match strategy {
                SelectionStrategy::MinNorm => g,
                SelectionStrategy::Boundary => {
                    if radius == 0.0 {
                        return Ok(g);
                    }
                    let norm = g.norm();
                    let dir = if norm > 0.0 {
                        g.scale(1.0 / norm)
                    } else {
                        let mut e = vec![0.0; g.dim()];
                        e[0] = 1.0;
                        Point::new(e)?
                    };
                    g.axpy(radius, &dir)
                }
                SelectionStrategy::Random { .. } => {
                    let e = unit_ball_sample(rng.as_mut().expect("seeded"), g.dim());
                    g.axpy(radius, &e)
                }
            })
        }
        ConvexFunctionOracle::NegSqrt => neg_sqrt_selection(x[0], eps, strategy, rng.as_mut()).map(Point::scalar),
        ConvexFunctionOracle::Abs => {
            let exact = x.map(|v| if v == 0.0 { 0.0 } else { v.signum() });
            Ok(match strategy {
                SelectionStrategy::MinNorm => exact,
                SelectionStrategy::Boundary => x.map(|v| if v < 0.0 { -1.0 } else { 1.0 }),
                SelectionStrategy::Random { .. } => {
                    let rng = rng.as_mut().expect("seeded");
                    let w = Point::new((0..x.dim()).map(|_| rng.gen_range(-1.0..=1.0)).collect())?;
                    // The defect ||x||_1 - <u, x> is affine in u and vanishes at `exact`.
                    let defect = x.coords().iter().map(|v| v.abs()).sum::<f64>() - w.dot(x);
                    let cap = if defect > eps { eps / defect } else { 1.0 };
                    let theta = rng.gen::<f64>() * cap;
                    exact.zip_with(&w, |a, b| a + theta * (b - a))
                }
            })
        }
        ConvexFunctionOracle::Linear { g } => Ok(g.clone()),
        ConvexFunctionOracle::Indicator(set) => indicator_selection(oracle, set, x, eps, strategy, rng.as_mut()),
    }
}

/// For `x > 0` the set is `{-s : 1/(4s) + s x <= eps + sqrt(x)}`, an interval
/// `[-s_hi, -s_lo]` around the gradient `-1/(2 sqrt x)`. At `x = 0` it is
/// `(-inf, -1/(4 eps)]`.
fn neg_sqrt_selection(
    x: f64,
    eps: f64,
    strategy: SelectionStrategy,
    rng: Option<&mut ChaCha8Rng>,
) -> Result<f64> {
    if x == 0.0 {
        if eps == 0.0 {
            return Err(Error::EmptySubdifferential { x: Point::scalar(x) });
        }
        let end = -1.0 / (4.0 * eps);
        return Ok(match strategy {
            SelectionStrategy::MinNorm | SelectionStrategy::Boundary => end,
            SelectionStrategy::Random { .. } => end * (1.0 + rng.expect("seeded").gen::<f64>()),
        });
    }
    let root = x.sqrt();
    let gradient = -0.5 / root;
    if eps == 0.0 {
        return Ok(gradient);
    }
    let (s_lo, s_hi) = neg_sqrt_slope_bounds(x, eps);
    Ok(match strategy {
        SelectionStrategy::MinNorm => gradient,
        SelectionStrategy::Boundary => -s_lo,
        SelectionStrategy::Random { .. } => -(s_lo + rng.expect("seeded").gen::<f64>() * (s_hi - s_lo)),
    })
}

/// Roots of `x s^2 - (eps + sqrt x) s + 1/4 = 0`.
pub(crate) fn neg_sqrt_slope_bounds(x: f64, eps: f64) -> (f64, f64) {
    let b = eps + x.sqrt();
    let disc = eps * (eps + 2.0 * x.sqrt());
    let s_hi = (b + disc.sqrt()) / (2.0 * x);
    // Product of the roots is 1/(4x); avoids cancellation in the small root.
    let s_lo = 0.25 / (x * s_hi);
    (s_lo, s_hi)
}

fn indicator_selection(
    oracle: &ConvexFunctionOracle,
    set: &ConvexSet,
    x: &Point,
    eps: f64,
    strategy: SelectionStrategy,
    rng: Option<&mut ChaCha8Rng>,
) -> Result<Point> {
    let dim = set.dim();
    if strategy == SelectionStrategy::MinNorm {
        // 0 lies in every normal cone, hence in every eps-enlargement of it.
        return Ok(Point::zeros(dim));
    }
    let no_boundary = || Error::NoBoundaryPoint {
        oracle: oracle.name(),
        x: x.clone(),
    };
    match set {
        ConvexSet::Singleton(_) => match strategy {
            SelectionStrategy::Random { .. } => {
                let rng = rng.expect("seeded");
                Point::new((0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect())
            }
            _ => Err(no_boundary()),
        },
        ConvexSet::Box { lo, hi } if dim == 1 => {
            let (x0, l, h) = (x[0], lo[0], hi[0]);
            // sup over [l, h] of u (y - x) <= eps
            let u_lo = if x0 > l { -eps / (x0 - l) } else { f64::NEG_INFINITY };
            let u_hi = if h > x0 { eps / (h - x0) } else { f64::INFINITY };
            match strategy {
                SelectionStrategy::Boundary => {
                    let best = [u_lo, u_hi]
                        .into_iter()
                        .filter(|u| u.is_finite())
                        .max_by(|a, b| a.abs().total_cmp(&b.abs()));
                    best.map(Point::scalar).ok_or_else(no_boundary)
                }
                _ => {
                    let (a, b) = (u_lo.max(-1.0), u_hi.min(1.0));
                    Ok(Point::scalar(a + rng.expect("seeded").gen::<f64>() * (b - a)))
                }
            }
        }
        ConvexSet::Halfspace { normal, offset } => {
            // Only multiples t * normal with t in [0, eps / slack] qualify.
            let slack = (offset - normal.dot(x)).max(0.0);
            let t_max = if slack > 0.0 { eps / slack } else { f64::INFINITY };
            let t = match strategy {
                SelectionStrategy::Boundary => {
                    if t_max.is_finite() {
                        t_max
                    } else {
                        0.0
                    }
                }
                _ => rng.expect("seeded").gen::<f64>() * t_max.min(1.0 / normal.norm()),
            };
            Ok(normal.scale(t))
        }
        _ => Err(Error::UnsupportedSubdifferential {
            oracle: oracle.name(),
            reason: "closed form available only for singletons, one-dimensional boxes and halfspaces"
                .to_string(),
        }),
    }
}

/// Uniform sample from the closed unit ball of `R^dim`.
fn unit_ball_sample(rng: &mut ChaCha8Rng, dim: usize) -> Point {
    let gaussian: Vec<f64> = (0..dim)
        .map(|_| {
            // Box-Muller
            let u1: f64 = 1.0 - rng.gen::<f64>();
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        })
        .collect();
    let g = Point::new(gaussian).expect("finite samples");
    let norm = g.norm();
    let radius = rng.gen::<f64>().powf(1.0 / dim as f64);
    if norm == 0.0 {
        return Point::zeros(dim);
    }
    g.scale(radius / norm)
}

/// Free-function form of [`ConvexFunctionOracle::resolvent`].
pub fn resolvent(oracle: &ConvexFunctionOracle, lambda: f64, z: &Point) -> Result<Point> {
    oracle.resolvent(lambda, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: SelectionStrategy = SelectionStrategy::MinNorm;
    const BND: SelectionStrategy = SelectionStrategy::Boundary;

    #[test]
    fn neg_sqrt_at_zero_boundary() {
        let u = eps_subgradient(&ConvexFunctionOracle::NegSqrt, &Point::scalar(0.0), 0.25, BND).unwrap();
        assert_eq!(u, Point::scalar(-1.0));
    }

    #[test]
    fn neg_sqrt_empty_exact_subdifferential() {
        let err = eps_subgradient(&ConvexFunctionOracle::NegSqrt, &Point::scalar(0.0), 0.0, MIN).unwrap_err();
        assert_eq!(err.to_string(), "exact subdifferential empty at x=0");
    }

    #[test]
    fn neg_sqrt_positive_point() {
        let f = ConvexFunctionOracle::NegSqrt;
        let u = eps_subgradient(&f, &Point::scalar(4.0), 1.0, MIN).unwrap();
        assert_eq!(u, Point::scalar(-0.25));
        // s_lo = (3 - sqrt 5) / 8
        let b = eps_subgradient(&f, &Point::scalar(4.0), 1.0, BND).unwrap();
        assert!((b[0] + (3.0 - 5f64.sqrt()) / 8.0).abs() < 1e-15);
        assert!(matches!(
            eps_subgradient(&f, &Point::scalar(-1.0), 1.0, MIN),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn quadratic_selections() {
        let f = ConvexFunctionOracle::quadratic(Point::scalar(0.0));
        assert_eq!(eps_subgradient(&f, &Point::scalar(3.0), 0.0, MIN).unwrap(), Point::scalar(3.0));
        assert_eq!(eps_subgradient(&f, &Point::scalar(3.0), 2.0, BND).unwrap(), Point::scalar(5.0));
    }

    #[test]
    fn abs_selections() {
        let x = Point::scalar(0.0);
        assert_eq!(eps_subgradient(&ConvexFunctionOracle::Abs, &x, 0.0, MIN).unwrap(), Point::scalar(0.0));
        assert_eq!(eps_subgradient(&ConvexFunctionOracle::Abs, &x, 0.0, BND).unwrap(), Point::scalar(1.0));
    }

    #[test]
    fn indicator_selections() {
        let single = ConvexFunctionOracle::indicator(ConvexSet::singleton(Point::scalar(0.0)));
        let x = Point::scalar(0.0);
        assert_eq!(eps_subgradient(&single, &x, 1.0, MIN).unwrap(), Point::scalar(0.0));
        assert!(matches!(
            eps_subgradient(&single, &x, 1.0, BND),
            Err(Error::NoBoundaryPoint { .. })
        ));
        let boxed = ConvexFunctionOracle::indicator(ConvexSet::interval(1.0, 2.0).unwrap());
        // u in [-0.5/0.5, 0.5/0.5]
        let u = eps_subgradient(&boxed, &Point::scalar(1.5), 0.5, BND).unwrap();
        assert_eq!(u[0].abs(), 1.0);
        let half = ConvexFunctionOracle::indicator(ConvexSet::halfspace(Point::scalar(2.0), 1.0).unwrap());
        assert_eq!(eps_subgradient(&half, &Point::scalar(0.0), 0.5, BND).unwrap(), Point::scalar(1.0));
        let ball = ConvexFunctionOracle::indicator(ConvexSet::ball(Point::zeros(2), 1.0).unwrap());
        assert!(matches!(
            eps_subgradient(&ball, &Point::zeros(2), 0.5, BND),
            Err(Error::UnsupportedSubdifferential { .. })
        ));
        assert!(matches!(
            eps_subgradient(&boxed, &Point::scalar(3.0), 0.5, MIN),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn random_is_reproducible() {
        let f = ConvexFunctionOracle::quadratic(Point::zeros(3));
        let x = Point::new(vec![1.0, -2.0, 0.5]).unwrap();
        let s = SelectionStrategy::Random { seed: 42 };
        assert_eq!(eps_subgradient(&f, &x, 0.7, s).unwrap(), eps_subgradient(&f, &x, 0.7, s).unwrap());
    }

    #[test]
    fn resolvents() {
        let single = ConvexFunctionOracle::indicator(ConvexSet::singleton(Point::scalar(0.0)));
        assert_eq!(resolvent(&single, 1.0, &Point::scalar(4.25)).unwrap(), Point::scalar(0.0));
        let quad = ConvexFunctionOracle::quadratic(Point::scalar(0.0));
        assert_eq!(resolvent(&quad, 1.0, &Point::scalar(4.0)).unwrap(), Point::scalar(2.0));
        assert_eq!(
            resolvent(&ConvexFunctionOracle::Abs, 0.5, &Point::scalar(0.2)).unwrap(),
            Point::scalar(0.0)
        );
        let lin = ConvexFunctionOracle::linear(Point::scalar(2.0));
        assert_eq!(resolvent(&lin, 0.5, &Point::scalar(0.0)).unwrap(), Point::scalar(-1.0));
        assert!(matches!(
            resolvent(&ConvexFunctionOracle::NegSqrt, 1.0, &Point::scalar(1.0)),
            Err(Error::UnsupportedResolvent(_))
        ));
        assert!(resolvent(&quad, 0.0, &Point::scalar(1.0)).is_err());
    }

    #[test]
    fn exact_subdifferentials() {
        let half = ConvexFunctionOracle::indicator(ConvexSet::halfspace(Point::scalar(1.0), 1.0).unwrap());
        assert_eq!(
            half.subdifferential(&Point::scalar(1.0)).unwrap(),
            Subdifferential::Ray(Point::scalar(1.0))
        );
        assert_eq!(
            ConvexFunctionOracle::NegSqrt.subdifferential(&Point::scalar(0.0)).unwrap(),
            Subdifferential::Empty
        );
        let boxed = ConvexFunctionOracle::indicator(ConvexSet::interval(1.0, 2.0).unwrap());
        assert_eq!(
            boxed.subdifferential(&Point::scalar(1.0)).unwrap(),
            Subdifferential::Intervals(vec![(f64::NEG_INFINITY, 0.0)])
        );
    }
}
