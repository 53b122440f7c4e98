//! Residuals of the limiting evolution equations, the finite-difference
//! gradient oracle, and shape measurements used by the experiments.
//!
//! Derivatives along the curve are differences in the unit parameter chart
//! `s = (i-1)/(N-1)`; the length factors follow from `|g_s| = L`.

use alloc::vec::Vec;

use crate::energy::{objective, objective_gradient, EnergyParams};
use crate::flow::{coupling_residual, l2_norm, velocity, Trajectory};
use crate::math;
use crate::polyline::{DiscreteCurve, ReducedCoords};
use crate::{Error, Result, Vec2};

/// All residuals for step `n -> n+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub step_index: usize,
    pub interior_l2: f64,
    pub interior_max: f64,
    pub boundary_start: Vec2,
    pub boundary_end: Vec2,
    /// `(|kappa_2|, |kappa_{N-1}|)`, the discrete stand-in for zero
    /// curvature at the ends.
    pub kappa_boundary: (f64, f64),
    pub coupling_l2: f64,
    pub coupling_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteriorResidual {
    /// Values at vertices `3 .. N-2`.
    pub per_vertex: Vec<f64>,
    pub l2: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryResidual {
    pub start: Vec2,
    pub end: Vec2,
    pub kappa_boundary: (f64, f64),
}

/// Largest relative difference between the analytic objective gradient and
/// central differences, Richardson-extrapolated from steps `s` and `s / 2`.
///
/// Steps are `h` for headings, `h * l` for the edge length and
/// `h * max(1, |b|)` for the base point. A component whose magnitude (in
/// either route) is below `1e-8` is compared in absolute terms instead.
/// Returns infinity if the objective cannot be evaluated.
pub fn fd_gradient_check(
    rc: &ReducedCoords,
    prev: &DiscreteCurve,
    params: &EnergyParams,
    h: f64,
) -> f64 {
    let Ok(analytic) = objective_gradient(rc, prev, params) else {
        return f64::INFINITY;
    };
    let base = rc.to_vec();
    let mut worst = 0.0f64;
    for (j, a) in analytic.iter().enumerate() {
        let step = match j {
            0 | 1 => h * math::abs(base[j]).max(1.0),
            2 => h * base[2],
            _ => h,
        };
        let eval = |delta: f64| {
            let mut v = base.clone();
            v[j] += delta;
            objective(&ReducedCoords::from_slice(&v), prev, params)
        };
        let central = |s: f64| match (eval(s), eval(-s)) {
            (Ok(fp), Ok(fm)) => Some((fp - fm) / (2.0 * s)),
            _ => None,
        };
        let (Some(coarse), Some(fine)) = (central(step), central(0.5 * step)) else {
            return f64::INFINITY;
        };
        let fd = (4.0 * fine - coarse) / 3.0;
        let mag = math::abs(*a).max(math::abs(fd));
        let err = if mag < 1e-8 {
            math::abs(a - fd)
        } else {
            math::abs(a - fd) / mag
        };
        worst = worst.max(err);
    }
    worst
}

/// Normal-velocity residual
/// `V_perp - kappa + eps (kappa_ss / L^2 + kappa^3 / 2)` at vertices
/// `3 .. N-2` of the later curve of step `n -> n+1`.
pub fn interior_residual(
    traj: &Trajectory,
    n: usize,
    params: &EnergyParams,
) -> Result<InteriorResidual> {
    let vel = velocity(traj, n)?;
    let cur = traj.snapshot(n + 1).ok_or(Error::IndexOutOfRange {
        index: n,
        len: traj.n_steps(),
    })?;
    let np = cur.len();
    if np < 5 {
        return Err(Error::TooFewPoints { needed: 5, got: np });
    }
    let k = cur.curvature()?;
    let m = (np - 1) as f64;
    let len = cur.total_length();
    let eps = params.epsilon;
    // k[j] is the curvature at vertex j + 1 (0-based)
    let per_vertex: Vec<f64> = (2..np - 2)
        .map(|i| {
            let kc = k[i - 1];
            let kss = (k[i] - 2.0 * kc + k[i - 2]) * m * m;
            vel.normal[i] - kc + eps * (kss / (len * len) + 0.5 * kc * kc * kc)
        })
        .collect();
    let max = per_vertex.iter().fold(0.0f64, |a, r| a.max(math::abs(*r)));
    let l2 = l2_norm(&per_vertex, 1.0 / m);
    Ok(InteriorResidual {
        per_vertex,
        l2,
        max,
    })
}

/// Endpoint velocity residuals
///
/// ```text
/// V(0) - [ -(g(1) - g(0)) / |g(1) - g(0)|^2 + t(0) - eps k_sigma(0) n(0) ]
/// V(1) - [  (g(1) - g(0)) / |g(1) - g(0)|^2 - t(1) + eps k_sigma(1) n(1) ]
/// ```
///
/// with `t`, `n` the end edge tangent and normal and `k_sigma` extrapolated
/// to the endpoint by a one-sided quadratic through the three nearest
/// interior curvatures.
pub fn boundary_residual(
    traj: &Trajectory,
    n: usize,
    params: &EnergyParams,
) -> Result<BoundaryResidual> {
    let vel = velocity(traj, n)?;
    let cur = traj.snapshot(n + 1).ok_or(Error::IndexOutOfRange {
        index: n,
        len: traj.n_steps(),
    })?;
    let np = cur.len();
    if np < 5 {
        return Err(Error::TooFewPoints { needed: 5, got: np });
    }
    let k = cur.curvature()?;
    let nk = k.len();
    let len = cur.total_length();
    let m = (np - 1) as f64;
    // interior vertices sit at s = h, 2h, 3h from each end
    let ks_start = (-2.5 * k[0] + 4.0 * k[1] - 1.5 * k[2]) * m;
    let ks_end = -(-2.5 * k[nk - 1] + 4.0 * k[nk - 2] - 1.5 * k[nk - 3]) * m;
    let k_sigma_start = ks_start / len;
    let k_sigma_end = ks_end / len;

    let x = cur.points();
    let chord = x[np - 1] - x[0];
    let coulomb = chord * (1.0 / chord.norm_sq());
    let t = cur.tangents();
    let t0 = t[0];
    let t1 = t[np - 2];
    let eps = params.epsilon;
    let rhs_start = -coulomb + t0 - t0.rot90() * (eps * k_sigma_start);
    let rhs_end = coulomb - t1 + t1.rot90() * (eps * k_sigma_end);
    Ok(BoundaryResidual {
        start: vel.velocity[0] - rhs_start,
        end: vel.velocity[np - 1] - rhs_end,
        kappa_boundary: (math::abs(k[0]), math::abs(k[nk - 1])),
    })
}

/// Interior, boundary and coupling residuals for step `n -> n+1`.
pub fn residual_report(
    traj: &Trajectory,
    n: usize,
    params: &EnergyParams,
) -> Result<ResidualReport> {
    let interior = interior_residual(traj, n, params)?;
    let boundary = boundary_residual(traj, n, params)?;
    let coupling = coupling_residual(traj, n)?;
    Ok(ResidualReport {
        step_index: n,
        interior_l2: interior.l2,
        interior_max: interior.max,
        boundary_start: boundary.start,
        boundary_end: boundary.end,
        kappa_boundary: boundary.kappa_boundary,
        coupling_l2: coupling.l2,
        coupling_max: coupling.max,
    })
}

const TOUCH_TOL: f64 = 1e-12;

/// Orientation sign of `c` relative to the directed line `a -> b`, with
/// near-collinear configurations reported as 0.
fn orient(a: Vec2, b: Vec2, c: Vec2) -> i8 {
    let u = b - a;
    let v = c - a;
    let det = u.cross(v);
    let scale = u.norm() * v.norm();
    if math::abs(det) <= TOUCH_TOL * scale {
        0
    } else if det > 0.0 {
        1
    } else {
        -1
    }
}

fn properly_cross(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0 && o3 * o4 < 0
}

/// Edge index pairs `(i, j)`, `i + 1 < j`, that cross properly.
pub fn crossing_pairs(curve: &DiscreteCurve) -> Vec<(usize, usize)> {
    let x = curve.points();
    let ne = x.len().saturating_sub(1);
    let mut out = Vec::new();
    for i in 0..ne {
        for j in i + 2..ne {
            if properly_cross(x[i], x[i + 1], x[j], x[j + 1]) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Number of properly crossing pairs of non-adjacent edges. Touching or
/// collinear contacts do not count.
pub fn self_intersections(curve: &DiscreteCurve) -> usize {
    crossing_pairs(curve).len()
}

/// Largest vertex distance inside the first loop, i.e. among the vertices
/// strictly between the two edges of the first crossing. `None` without a
/// crossing.
pub fn loop_diameter(curve: &DiscreteCurve) -> Option<f64> {
    let &(i, j) = crossing_pairs(curve).first()?;
    let pts = &curve.points()[i + 1..=j];
    let mut best = 0.0f64;
    for (a, p) in pts.iter().enumerate() {
        for q in &pts[a + 1..] {
            best = best.max(p.dist(*q));
        }
    }
    Some(best)
}

/// Largest distance from a vertex to the segment joining the endpoints.
pub fn chord_deviation(curve: &DiscreteCurve) -> f64 {
    let x = curve.points();
    let a = x[0];
    let b = x[x.len() - 1];
    let ab = b - a;
    let len2 = ab.norm_sq();
    x.iter()
        .map(|&p| {
            let t = if len2 > 0.0 {
                ((p - a).dot(ab) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            p.dist(a + ab * t)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{run_flow, FlowConfig};
    use crate::resample::resample_equal_arclength;
    use crate::scenario::{make_scenario, Scenario};
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Brute-force oracle: solve the 2x2 system for every non-adjacent pair.
    fn brute_force_crossings(x: &[Vec2]) -> usize {
        let ne = x.len() - 1;
        let mut count = 0;
        for i in 0..ne {
            for j in i + 2..ne {
                let (p, r) = (x[i], x[i + 1] - x[i]);
                let (q, s) = (x[j], x[j + 1] - x[j]);
                let den = r.cross(s);
                if den.abs() < 1e-15 {
                    continue;
                }
                let t = (q - p).cross(s) / den;
                let u = (q - p).cross(r) / den;
                if t > 1e-9 && t < 1.0 - 1e-9 && u > 1e-9 && u < 1.0 - 1e-9 {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn straight_has_no_crossing() {
        let c = DiscreteCurve::straight(Vec2::ZERO, Vec2::new(1.0, 0.0), 10).unwrap();
        assert_eq!(self_intersections(&c), 0);
        assert_eq!(loop_diameter(&c), None);
        assert!(chord_deviation(&c) < 1e-15);
    }

    #[test]
    fn zigzag_crosses() {
        let input = [
            Vec2::ZERO,
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(0.0, -1.0),
        ];
        let c = resample_equal_arclength(&input, 40).unwrap();
        let count = self_intersections(&c);
        assert!(count >= 1);
        assert_eq!(count, brute_force_crossings(c.points()));
    }

    #[test]
    fn gamma_crosses_once_by_both_routes() {
        let c = make_scenario(&Scenario::gamma(120)).unwrap();
        assert_eq!(self_intersections(&c), 1);
        assert_eq!(brute_force_crossings(c.points()), 1);
        let d = loop_diameter(&c).unwrap();
        // crossing at height 0.7, loop bottom at -0.35
        assert!(d > 0.95 && d <= 1.05, "{d}");
    }

    #[test]
    fn crossing_count_matches_oracle_on_random_walks() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(4..40);
            let mut h = 0.0f64;
            let hs: Vec<f64> = (0..n - 1)
                .map(|_| {
                    h += rng.gen_range(-2.0..2.0);
                    h
                })
                .collect();
            let c = ReducedCoords::new(Vec2::ZERO, 1.0, hs).to_curve();
            assert_eq!(self_intersections(&c), brute_force_crossings(c.points()));
        }
    }

    #[test]
    fn touching_is_not_a_crossing() {
        // Vertex (1,0) of the last edge touches edge 0 exactly.
        let c = DiscreteCurve::validate(vec![
            Vec2::ZERO,
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(1.0, 2.0),
            Vec2::new(1.0, 0.0),
        ]);
        // edges are unequal; build the predicate check directly instead
        assert!(c.is_err());
        assert!(!properly_cross(
            Vec2::ZERO,
            Vec2::new(2.0, 0.0),
            Vec2::new(1.0, 2.0),
            Vec2::new(1.0, 0.0)
        ));
        assert!(properly_cross(
            Vec2::ZERO,
            Vec2::new(2.0, 0.0),
            Vec2::new(1.0, 2.0),
            Vec2::new(1.0, -1.0)
        ));
    }

    #[test]
    fn fd_check_examples() {
        let seg = DiscreteCurve::straight(Vec2::ZERO, Vec2::new(1.0, 0.0), 6).unwrap();
        let p = EnergyParams::new(0.1, 0.1).unwrap();
        assert!(fd_gradient_check(&seg.to_reduced().unwrap(), &seg, &p, 1e-6) < 1e-7);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for eps in [0.1, 0.0] {
            let prev = make_scenario(&Scenario::sinus(15)).unwrap();
            let mut rc = prev.to_reduced().unwrap();
            rc.headings
                .iter_mut()
                .for_each(|h| *h += rng.gen_range(-0.2..0.2));
            rc.edge_len *= 0.9;
            let p = EnergyParams::new(eps, 0.2).unwrap();
            let err = fd_gradient_check(&rc, &prev, &p, 1e-6);
            assert!(err < 1e-6, "eps={eps}: {err}");
        }
    }

    #[test]
    fn residuals_vanish_for_resting_segment() {
        let seg = DiscreteCurve::straight(Vec2::ZERO, Vec2::new(1.0, 0.0), 11).unwrap();
        let p = EnergyParams::new(0.01, 0.05).unwrap();
        let traj = run_flow(&seg, &FlowConfig::new(p)).unwrap();
        let r = residual_report(&traj, 0, &p).unwrap();
        assert!(r.interior_max < 1e-6);
        assert!(r.boundary_start.norm() < 1e-6, "{:?}", r.boundary_start);
        assert!(r.boundary_end.norm() < 1e-6);
        assert!(r.coupling_max < 1e-6);
        assert_eq!(r.kappa_boundary, (0.0, 0.0));
    }

    #[test]
    fn residuals_on_shrinking_segment() {
        let seg = DiscreteCurve::straight(Vec2::ZERO, Vec2::new(2.0, 0.0), 21).unwrap();
        let p = EnergyParams::new(0.01, 0.05).unwrap();
        let traj = run_flow(&seg, &FlowConfig::new(p).with_steps(1)).unwrap();
        let r = residual_report(&traj, 0, &p).unwrap();
        assert!(r.interior_max < 1e-8);
        assert!(r.coupling_max < 1e-8);
        assert!(r.boundary_start.norm() < 0.1, "{:?}", r.boundary_start);
        assert!(r.boundary_end.norm() < 0.1);
    }

    #[test]
    fn too_few_points() {
        let seg = DiscreteCurve::straight(Vec2::ZERO, Vec2::new(2.0, 0.0), 4).unwrap();
        let p = EnergyParams::new(0.01, 0.05).unwrap();
        let traj = run_flow(&seg, &FlowConfig::new(p).with_steps(1)).unwrap();
        assert!(matches!(
            interior_residual(&traj, 0, &p),
            Err(Error::TooFewPoints { .. })
        ));
    }

    #[test]
    fn chord_deviation_of_sinus() {
        let c = make_scenario(&Scenario::sinus(81)).unwrap();
        assert!((chord_deviation(&c) - 1.0).abs() < 1e-3);
    }
}
