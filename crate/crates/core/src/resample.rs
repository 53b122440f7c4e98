//! Resampling an arbitrary polyline into an equal-edge curve.

use alloc::vec::Vec;

use crate::math;
use crate::polyline::DiscreteCurve;
use crate::{Error, Result, Vec2};

/// Relative edge spread required of the resampled curve.
pub const RESAMPLE_EDGE_TOL: f64 = 1e-10;

/// Resample `points` into `n` vertices with equal chord lengths.
///
/// The first and last output points are the input endpoints. Vertices lie on
/// the input polyline, in order. The common chord is found by shooting: march
/// from the start with a trial chord, each time jumping to the first point of
/// the polyline at that distance, and bisect the chord until the last vertex
/// lands on the input endpoint.
pub fn resample_equal_arclength(points: &[Vec2], n: usize) -> Result<DiscreteCurve> {
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let mut path: Vec<Vec2> = Vec::with_capacity(points.len());
    for &p in points {
        if !p.is_finite() {
            return Err(Error::NonFinite);
        }
        if path.last() != Some(&p) {
            path.push(p);
        }
    }
    if path.len() < 2 {
        return Err(Error::ZeroLengthInput);
    }
    let total: f64 = path.windows(2).map(|w| w[0].dist(w[1])).sum();
    if total <= 0.0 {
        return Err(Error::ZeroLengthInput);
    }
    let start = path[0];
    let end = path[path.len() - 1];
    if n == 2 {
        return DiscreteCurve::validate(alloc::vec![start, end]);
    }

    let segments = n - 1;
    let mut lo = 0.0;
    let mut hi = total / segments as f64;
    let mut best: Option<Vec<Vec2>> = None;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match march(&path, mid, segments) {
            Some(pts) => {
                lo = mid;
                best = Some(pts);
            }
            None => hi = mid,
        }
    }
    let shot = best.map(|mut pts| {
        pts[segments] = end;
        let chord = total_chord(&pts) / segments as f64;
        DiscreteCurve::from_parts(pts, chord)
    });
    let curve = match shot {
        Some(c) if c.edge_spread() < RESAMPLE_EDGE_TOL => c,
        _ => close_headings(&path, total, segments)?,
    };
    let spread = curve.edge_spread();
    if spread >= RESAMPLE_EDGE_TOL {
        return Err(Error::ResampleFailed { spread });
    }
    if curve.gap() == 0.0 {
        return Err(Error::DegenerateGap);
    }
    Ok(curve)
}

fn total_chord(pts: &[Vec2]) -> f64 {
    pts.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Fallback for paths with sharp turns, where the chord march jumps across
/// corners and no shot lands on the end. Takes the headings of an equal
/// arclength sample and rescales and rotates the equal-edge chain built from
/// them so that it ends exactly on the input endpoint.
fn close_headings(path: &[Vec2], total: f64, segments: usize) -> Result<DiscreteCurve> {
    let start = path[0];
    let end = path[path.len() - 1];
    let samples = arclength_samples(path, total, segments);
    let dirs: Vec<Vec2> = samples
        .windows(2)
        .map(|w| (w[1] - w[0]).normalized().ok_or(Error::ZeroLengthInput))
        .collect::<Result<_>>()?;
    let sum = dirs.iter().fold(Vec2::ZERO, |acc, &d| acc + d);
    let target = end - start;
    let (sum_len, target_len) = (sum.norm(), target.norm());
    if sum_len == 0.0 || target_len == 0.0 {
        return Err(Error::DegenerateGap);
    }
    let edge_len = target_len / sum_len;
    let turn = target.angle() - sum.angle();
    let (s, c) = math::sin_cos(turn);
    let mut pts = Vec::with_capacity(segments + 1);
    let mut p = start;
    pts.push(p);
    for d in &dirs {
        p += Vec2::new(c * d.x - s * d.y, s * d.x + c * d.y) * edge_len;
        pts.push(p);
    }
    pts[segments] = end;
    Ok(DiscreteCurve::from_parts(pts, edge_len))
}

/// Points at equal arclength spacing along `path`, endpoints included.
fn arclength_samples(path: &[Vec2], total: f64, segments: usize) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(segments + 1);
    out.push(path[0]);
    let step = total / segments as f64;
    let mut seg = 0usize;
    let mut walked = 0.0;
    for k in 1..segments {
        let target = step * k as f64;
        loop {
            let len = path[seg].dist(path[seg + 1]);
            if walked + len >= target || seg + 2 == path.len() {
                let u = ((target - walked) / len).clamp(0.0, 1.0);
                out.push(path[seg] + (path[seg + 1] - path[seg]) * u);
                break;
            }
            walked += len;
            seg += 1;
        }
    }
    out.push(path[path.len() - 1]);
    out
}

/// March `segments` chords of length `c` along `path`. Returns the vertices
/// if the walk stays on the path, `None` if it runs off the end.
fn march(path: &[Vec2], c: f64, segments: usize) -> Option<Vec<Vec2>> {
    let mut out = Vec::with_capacity(segments + 1);
    let mut seg = 0usize;
    let mut u = 0.0f64;
    let mut p = path[0];
    out.push(p);
    let c2 = c * c;
    for _ in 0..segments {
        loop {
            if seg + 1 >= path.len() {
                return None;
            }
            let a = path[seg];
            let d = path[seg + 1] - a;
            let ap = a - p;
            let qa = d.norm_sq();
            let qb = d.dot(ap);
            let qc = ap.norm_sq() - c2;
            let disc = qb * qb - qa * qc;
            if disc >= 0.0 {
                let root = (-qb + math::sqrt(disc)) / qa;
                if root >= u && root <= 1.0 {
                    u = root;
                    p = a + d * root;
                    out.push(p);
                    break;
                }
            }
            seg += 1;
            u = 0.0;
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;

    fn dense_sine(m: usize) -> Vec<Vec2> {
        (0..=m)
            .map(|i| {
                let x = -PI + 2.0 * PI * i as f64 / m as f64;
                Vec2::new(x, x.sin())
            })
            .collect()
    }

    #[test]
    fn straight_input() {
        let c =
            resample_equal_arclength(&[Vec2::ZERO, Vec2::new(2.0, 0.0), Vec2::new(3.0, 0.0)], 4)
                .unwrap();
        for (i, p) in c.points().iter().enumerate() {
            assert!((p.x - i as f64).abs() < 1e-12 && p.y.abs() < 1e-15);
        }
        assert!((c.edge_len() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_points_are_endpoints() {
        let input = [Vec2::ZERO, Vec2::new(1.0, 1.0), Vec2::new(2.0, 0.0)];
        let c = resample_equal_arclength(&input, 2).unwrap();
        assert_eq!(c.points(), &[input[0], input[2]]);
    }

    #[test]
    fn zero_length_input() {
        assert_eq!(
            resample_equal_arclength(&[Vec2::ZERO, Vec2::ZERO], 5),
            Err(Error::ZeroLengthInput)
        );
    }

    #[test]
    fn sine_graph() {
        let input = dense_sine(20_000);
        let c = resample_equal_arclength(&input, 81).unwrap();
        assert_eq!(c.len(), 81);
        assert_eq!(c.points()[0], input[0]);
        assert_eq!(c.points()[80], *input.last().unwrap());
        assert!(c.edge_spread() < 1e-10);

        // Arclength oracle: dense piecewise-linear quadrature of the graph.
        let arclength: f64 = dense_sine(400_000)
            .windows(2)
            .map(|w| w[0].dist(w[1]))
            .sum();
        let rel = (arclength - c.total_length()) / arclength;
        // Chords cut corners by about kappa^2 l^2 / 24.
        assert!(rel > 0.0 && rel < 1e-3, "{rel}");
    }

    #[test]
    fn gentle_arc_keeps_arclength() {
        // Radius 50 arc; chord/arc mismatch is (l/R)^2 / 24.
        let r = 50.0;
        let input: Vec<Vec2> = (0..=2000)
            .map(|i| {
                let a = 0.1 * i as f64 / 2000.0;
                Vec2::new(r * a.sin(), r * (1.0 - a.cos()))
            })
            .collect();
        let arclength: f64 = input.windows(2).map(|w| w[0].dist(w[1])).sum();
        for n in [50, 64, 101] {
            let c = resample_equal_arclength(&input, n).unwrap();
            assert_eq!(c.points()[0], input[0]);
            assert_eq!(c.points()[n - 1], input[2000]);
            assert!(((c.total_length() - arclength) / arclength).abs() < 1e-6);
        }
    }

    #[test]
    fn zigzag_resamples() {
        let input = vec![
            Vec2::ZERO,
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(0.0, -1.0),
        ];
        let c = resample_equal_arclength(&input, 40).unwrap();
        assert!(c.edge_spread() < RESAMPLE_EDGE_TOL);
        assert_eq!(c.points()[39], input[3]);
    }
}
