//! Probe-point grids for the brute-force checkers.

use crate::point::Point;

/// `count` evenly spaced one-dimensional points on `[a, b]`, endpoints included.
pub fn linspace(a: f64, b: f64, count: usize) -> Vec<Point> {
    linspace_values(a, b, count).into_iter().map(Point::scalar).collect()
}

/// `count` geometrically spaced one-dimensional points on `[a, b]`, `0 < a < b`.
pub fn geomspace(a: f64, b: f64, count: usize) -> Vec<Point> {
    assert!(a > 0.0 && b > a, "geomspace needs 0 < a < b");
    linspace_values(a.ln(), b.ln(), count)
        .into_iter()
        .map(|t| Point::scalar(t.exp()))
        .collect()
}

/// Cartesian lattice over the box `[lo, hi]` with `per_axis` points per axis.
pub fn lattice(lo: &[f64], hi: &[f64], per_axis: usize) -> Vec<Point> {
    assert_eq!(lo.len(), hi.len());
    let axes: Vec<Vec<f64>> = lo
        .iter()
        .zip(hi)
        .map(|(&l, &h)| linspace_values(l, h, per_axis))
        .collect();
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in &axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(|c| Point::new(c).expect("finite lattice")).collect()
}

fn linspace_values(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let step = (b - a) / (count - 1) as f64;
            (0..count)
                .map(|i| if i + 1 == count { b } else { a + step * i as f64 })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let l = linspace(-1.0, 1.0, 5);
        assert_eq!(l.len(), 5);
        assert_eq!(l[2], Point::scalar(0.0));
        assert_eq!(l[4], Point::scalar(1.0));
        let g = geomspace(1e-3, 1e3, 7);
        assert!((g[3][0] - 1.0).abs() < 1e-12);
        let lat = lattice(&[0.0, 0.0], &[1.0, 2.0], 3);
        assert_eq!(lat.len(), 9);
        assert_eq!(lat[8].coords(), &[1.0, 2.0]);
    }
}
