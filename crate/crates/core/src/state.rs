//! Iteration state and the running weighted average
//! `xbar_n = (1/sigma_n) * sum_{k=1..n} lambda_k x_k`, with `sigma_n = sum_{k=1..n} lambda_k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationState {
    /// Index of the current iterate `x_n`.
    pub n: usize,
    pub x: Point,
    /// Running step length `sigma_n`; zero before the first averaged point.
    pub sigma: f64,
    /// Neumaier compensation term for `sigma`.
    sigma_comp: f64,
    /// Running weighted average. Equals `x_0` while `sigma == 0`: the starting
    /// point never enters the average.
    pub xbar: Point,
    pub last_u: Option<Point>,
}

impl IterationState {
    pub fn new(x0: Point) -> Self {
        IterationState {
            n: 0,
            xbar: x0.clone(),
            x: x0,
            sigma: 0.0,
            sigma_comp: 0.0,
            last_u: None,
        }
    }

    /// Compensated step length.
    pub fn step_length(&self) -> f64 {
        self.sigma + self.sigma_comp
    }
}

/// Appends `x_next` with weight `lambda_next` to the running average and
/// advances the index.
pub fn average_update(state: &IterationState, x_next: Point, lambda_next: f64) -> Result<IterationState> {
    if !(lambda_next.is_finite() && lambda_next > 0.0) {
        return Err(Error::invalid(
            "lambda_next",
            format!("must be finite and positive, got {lambda_next}"),
        ));
    }
    state.x.check_dim(&x_next)?;

    let (sigma, sigma_comp) = neumaier_add(state.sigma, state.sigma_comp, lambda_next);
    let total = sigma + sigma_comp;
    let xbar = if state.sigma == 0.0 {
        x_next.clone()
    } else {
        let w = lambda_next / total;
        state.xbar.zip_with(&x_next, |b, x| b + w * (x - b))
    };

    Ok(IterationState {
        n: state.n + 1,
        x: x_next,
        sigma,
        sigma_comp,
        xbar,
        last_u: state.last_u.clone(),
    })
}

fn neumaier_add(sum: f64, comp: f64, value: f64) -> (f64, f64) {
    let t = sum + value;
    let c = if sum.abs() >= value.abs() {
        (sum - t) + value
    } else {
        (value - t) + sum
    };
    (t, comp + c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn accumulate(points: &[f64], weights: &[f64]) -> IterationState {
        let mut s = IterationState::new(Point::scalar(100.0));
        for (&x, &w) in points.iter().zip(weights) {
            s = average_update(&s, Point::scalar(x), w).unwrap();
        }
        s
    }

    #[test]
    fn uniform_weights_give_mean() {
        let s = accumulate(&[0.0, 3.0, 6.0], &[1.0, 1.0, 1.0]);
        assert_eq!(s.xbar.coords(), &[3.0]);
        assert_eq!(s.n, 3);
        assert_eq!(s.sigma, 3.0);
    }

    #[test]
    fn weighted_pair() {
        let s = accumulate(&[0.0, 3.0], &[1.0, 0.5]);
        assert!((s.xbar[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_point_is_its_own_average() {
        let s = accumulate(&[5.0], &[0.3]);
        assert_eq!(s.xbar.coords(), &[5.0]);
    }

    #[test]
    fn rejects_bad_weight_and_dimension() {
        let s = IterationState::new(Point::scalar(0.0));
        assert!(average_update(&s, Point::scalar(1.0), 0.0).is_err());
        assert!(matches!(
            average_update(&s, Point::zeros(2), 1.0),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn compensated_sigma_tracks_harmonic_sum() {
        let mut s = IterationState::new(Point::scalar(0.0));
        let mut reference = 0.0f64;
        // Summed smallest-first as the reference.
        for k in (1..=200_000).rev() {
            reference += 1.0 / k as f64;
        }
        for k in 1..=200_000 {
            s = average_update(&s, Point::scalar(0.0), 1.0 / k as f64).unwrap();
        }
        assert!((s.step_length() - reference).abs() < 1e-13);
    }
}
