//! Small geometry helpers over `nalgebra` points.

use nalgebra::Vector3;

pub type Point = Vector3<f64>;

/// Arithmetic mean of a non-empty point set.
pub fn centroid<'a, I>(points: I) -> Option<Point>
where
    I: IntoIterator<Item = &'a Point>,
{
    let mut sum = Point::zeros();
    let mut n = 0usize;
    for p in points {
        sum += p;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

/// Minimum Euclidean distance over all point pairs. `None` if either set is empty.
pub fn min_pair_distance(a: &[Point], b: &[Point]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for p in a {
        for q in b {
            let d = (p - q).norm();
            best = Some(best.map_or(d, |cur| cur.min(d)));
        }
    }
    best
}
