//! Discrete energy, dissipation and the per-step objective.
//!
//! The length term is the polygonal length `(N-1) l`. The first normal sum in
//! the dissipation is weighted by the previous edge length and the second by
//! the current one, which keeps `D` symmetric in its arguments.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::polyline::{DiscreteCurve, ReducedCoords, CUSP_TOL};
use crate::{Error, Result, Vec2};

/// Bending weight and time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    pub epsilon: f64,
    pub tau: f64,
}

impl EnergyParams {
    /// Checks `epsilon >= 0` and `tau > 0`. A zero bending weight is accepted
    /// for diagnostics; the flow itself is meant for `epsilon > 0`.
    pub fn new(epsilon: f64, tau: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::BadParameters(alloc::format!(
                "epsilon must be non-negative, got {epsilon}"
            )));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::BadParameters(alloc::format!(
                "tau must be positive, got {tau}"
            )));
        }
        if tau > 1.0 {
            log::warn!("time step {tau} is above 1");
        }
        Ok(EnergyParams { epsilon, tau })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub length_term: f64,
    pub bending_term: f64,
    pub coulomb_term: f64,
    pub total: f64,
}

/// `E = (N-1) l + (eps l / 2) sum kappa_i^2 - log |x_1 - x_N|`.
pub fn energy(curve: &DiscreteCurve, params: &EnergyParams) -> Result<EnergyBreakdown> {
    let gap = curve.gap();
    if !(gap > 0.0) {
        return Err(Error::DegenerateGap);
    }
    let l = curve.edge_len();
    let length_term = curve.total_length();
    let bending_term = if curve.len() >= 3 && params.epsilon != 0.0 {
        let k = curve.curvature()?;
        0.5 * params.epsilon * l * k.iter().map(|k| k * k).sum::<f64>()
    } else if curve.len() >= 3 {
        // still reject cusps
        curve.curvature()?;
        0.0
    } else {
        0.0
    };
    let coulomb_term = -math::ln(gap);
    Ok(EnergyBreakdown {
        length_term,
        bending_term,
        coulomb_term,
        total: length_term + bending_term + coulomb_term,
    })
}

/// Symmetrized dissipation between `curve` and `prev` (not divided by tau).
///
/// ```text
/// D = (l~/4) sum_e q(n~_e) + (l/4) sum_e q(n_e)
///   + |x_1 - x~_1|^2 / 2 + |x_N - x~_N|^2 / 2
/// q(n_e) = (<x_e - x~_e, n_e>^2 + <x_{e+1} - x~_{e+1}, n_e>^2) / 2
/// ```
///
/// Each edge integrates the squared normal displacement with the trapezoid
/// rule over its two end points, so reversing both curves leaves `D` unchanged.
pub fn dissipation(curve: &DiscreteCurve, prev: &DiscreteCurve) -> Result<f64> {
    if curve.len() != prev.len() {
        return Err(Error::MismatchedN {
            left: curve.len(),
            right: prev.len(),
        });
    }
    let x = curve.points();
    let xp = prev.points();
    let n = x.len();
    let mut prev_sum = 0.0;
    let mut cur_sum = 0.0;
    for e in 0..n - 1 {
        let nu_prev = edge_normal(xp, e);
        let nu_cur = edge_normal(x, e);
        for d in [x[e] - xp[e], x[e + 1] - xp[e + 1]] {
            prev_sum += sq(d.dot(nu_prev));
            cur_sum += sq(d.dot(nu_cur));
        }
    }
    Ok(0.125 * prev.edge_len() * prev_sum
        + 0.125 * curve.edge_len() * cur_sum
        + 0.5 * (x[0] - xp[0]).norm_sq()
        + 0.5 * (x[n - 1] - xp[n - 1]).norm_sq())
}

#[inline]
fn sq(v: f64) -> f64 {
    v * v
}

fn edge_normal(x: &[Vec2], e: usize) -> Vec2 {
    (x[e + 1] - x[e]).normalized().unwrap_or(Vec2::ZERO).rot90()
}

/// `F(rc) = E(curve(rc)) + D(curve(rc), prev) / tau`.
pub fn objective(rc: &ReducedCoords, prev: &DiscreteCurve, params: &EnergyParams) -> Result<f64> {
    StepObjective::new(prev, *params).value_rc(rc)
}

/// Analytic gradient of [`objective`] in the flat layout
/// `[base_x, base_y, l, h_1, ..., h_{N-1}]`.
pub fn objective_gradient(
    rc: &ReducedCoords,
    prev: &DiscreteCurve,
    params: &EnergyParams,
) -> Result<Vec<f64>> {
    let obj = StepObjective::new(prev, *params);
    let mut g = vec![0.0; rc.dim()];
    obj.gradient(&rc.to_vec(), &mut g)?;
    Ok(g)
}

/// The step objective with the previous curve's frame cached.
#[derive(Debug, Clone)]
pub(crate) struct StepObjective<'a> {
    prev: &'a DiscreteCurve,
    prev_normals: Vec<Vec2>,
    params: EnergyParams,
}

impl<'a> StepObjective<'a> {
    pub(crate) fn new(prev: &'a DiscreteCurve, params: EnergyParams) -> Self {
        let prev_normals = prev.frame().normals;
        StepObjective {
            prev,
            prev_normals,
            params,
        }
    }

    fn check_len(&self, n_points: usize) -> Result<()> {
        if n_points != self.prev.len() {
            return Err(Error::MismatchedN {
                left: n_points,
                right: self.prev.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn value_rc(&self, rc: &ReducedCoords) -> Result<f64> {
        self.check_len(rc.n_points())?;
        let curve = rc.to_curve();
        self.value_curve(&curve)
    }

    pub(crate) fn value_curve(&self, curve: &DiscreteCurve) -> Result<f64> {
        let e = energy(curve, &self.params)?;
        let d = dissipation(curve, self.prev)?;
        Ok(e.total + d / self.params.tau)
    }

    pub(crate) fn value(&self, v: &[f64]) -> Result<f64> {
        self.value_rc(&ReducedCoords::from_slice(v))
    }

    /// Writes the gradient at flat coordinates `v` into `grad`.
    pub(crate) fn gradient(&self, v: &[f64], grad: &mut [f64]) -> Result<()> {
        let n = v.len() - 2;
        self.check_len(n)?;
        let edges = n - 1;
        let l = v[2];
        let headings = &v[3..];
        let inv_tau = 1.0 / self.params.tau;
        let eps = self.params.epsilon;

        let u: Vec<Vec2> = headings.iter().map(|&h| Vec2::from_angle(h)).collect();
        let mut x = Vec::with_capacity(n);
        let mut p = Vec2::new(v[0], v[1]);
        x.push(p);
        for ue in &u {
            p += *ue * l;
            x.push(p);
        }

        grad.iter_mut().for_each(|g| *g = 0.0);
        let (gh_head, gh) = grad.split_at_mut(3);
        let mut g_l = 0.0;

        // Length.
        g_l += edges as f64;

        // Bending: (2 eps / l) sum tan^2(phi_k / 2), phi_k = h_k - h_{k-1}.
        if eps != 0.0 {
            let mut sum_t2 = 0.0;
            for k in 1..edges {
                let s = u[k - 1].cross(u[k]);
                let c = 1.0 + u[k - 1].dot(u[k]);
                if c < CUSP_TOL {
                    return Err(Error::CuspAngle { vertex: k });
                }
                let t = s / c;
                sum_t2 += t * t;
                let d_phi = 4.0 * eps * t / (l * c);
                gh[k] += d_phi;
                gh[k - 1] -= d_phi;
            }
            g_l -= 2.0 * eps * sum_t2 / (l * l);
        }

        // Point forces.
        let mut gp = vec![Vec2::ZERO; n];
        let gvec = x[n - 1] - x[0];
        let gap2 = gvec.norm_sq();
        if !(gap2 > 0.0) {
            return Err(Error::DegenerateGap);
        }
        gp[n - 1] -= gvec * (1.0 / gap2);
        gp[0] += gvec * (1.0 / gap2);

        let xp = self.prev.points();
        let lp = self.prev.edge_len();
        for e in 0..edges {
            let np = self.prev_normals[e];
            let nu = u[e].rot90();
            for i in [e, e + 1] {
                let d = x[i] - xp[i];
                let a = d.dot(np);
                let b = d.dot(nu);
                gp[i] += np * (0.25 * lp * a * inv_tau) + nu * (0.25 * l * b * inv_tau);
                g_l += 0.125 * b * b * inv_tau;
                // d nu / d h = -u
                gh[e] -= 0.25 * l * b * d.dot(u[e]) * inv_tau;
            }
        }
        gp[0] += (x[0] - xp[0]) * inv_tau;
        gp[n - 1] += (x[n - 1] - xp[n - 1]) * inv_tau;

        // Chain rule through x_i = base + l sum_{e<i} u_e.
        let mut suffix = Vec2::ZERO;
        for e in (0..edges).rev() {
            suffix += gp[e + 1];
            g_l += suffix.dot(u[e]);
            gh[e] += l * suffix.dot(u[e].rot90());
        }
        suffix += gp[0];
        gh_head[0] = suffix.x;
        gh_head[1] = suffix.y;
        gh_head[2] = g_l;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyline::measures;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn params(eps: f64, tau: f64) -> EnergyParams {
        EnergyParams::new(eps, tau).unwrap()
    }

    fn seg(len: f64, n: usize) -> DiscreteCurve {
        DiscreteCurve::straight(Vec2::ZERO, Vec2::new(len, 0.0), n).unwrap()
    }

    #[test]
    fn energy_examples() {
        for n in [2, 3, 11, 50] {
            let e = energy(&seg(1.0, n), &params(0.3, 0.1)).unwrap();
            assert!((e.total - 1.0).abs() < 1e-14);
        }
        let e = energy(&seg(2.0, 3), &params(0.01, 0.1)).unwrap();
        assert!((e.total - (2.0 - 2f64.ln())).abs() < 1e-14);
        assert!((e.total - 1.3069).abs() < 1e-4);

        let l = DiscreteCurve::validate(alloc::vec![
            Vec2::ZERO,
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0)
        ])
        .unwrap();
        let e = energy(&l, &params(0.1, 0.1)).unwrap();
        let want = 2.0 + 0.05 * 4.0 - 2f64.sqrt().ln();
        assert!((e.total - want).abs() < 1e-13);
        assert!((e.total - 1.85343).abs() < 1e-5);
        assert_eq!(e.total, e.length_term + e.bending_term + e.coulomb_term);
    }

    #[test]
    fn degenerate_gap() {
        let c = DiscreteCurve::from_parts(alloc::vec![Vec2::ZERO, Vec2::ZERO], 0.0);
        assert_eq!(energy(&c, &params(0.1, 0.1)), Err(Error::DegenerateGap));
    }

    #[test]
    fn bad_params() {
        assert!(EnergyParams::new(-1.0, 0.1).is_err());
        assert!(EnergyParams::new(0.1, 0.0).is_err());
        assert!(EnergyParams::new(0.1, f64::NAN).is_err());
    }

    #[test]
    fn dissipation_examples() {
        let a = seg(1.0, 2);
        assert_eq!(dissipation(&a, &a).unwrap(), 0.0);
        let b = a.map_isometry(|p| p + Vec2::new(0.0, 0.1));
        assert!((dissipation(&b, &a).unwrap() - 0.015).abs() < 1e-15);
        assert!(matches!(
            dissipation(&seg(1.0, 3), &a),
            Err(Error::MismatchedN { .. })
        ));
    }

    #[test]
    fn objective_examples() {
        let prev = seg(1.0, 2);
        let p = params(0.01, 0.25);
        let at_prev = objective(&prev.to_reduced().unwrap(), &prev, &p).unwrap();
        assert_eq!(at_prev, energy(&prev, &p).unwrap().total);

        let cand = prev.map_isometry(|q| q + Vec2::new(0.0, 0.1));
        let f = objective(&cand.to_reduced().unwrap(), &prev, &p).unwrap();
        assert!((f - 1.06).abs() < 1e-14);
    }

    #[test]
    fn gradient_vanishes_at_unit_segment() {
        for n in [2, 5, 21] {
            let prev = seg(1.0, n);
            let g =
                objective_gradient(&prev.to_reduced().unwrap(), &prev, &params(0.1, 0.05)).unwrap();
            let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(gmax < 1e-10, "n={n}: {gmax}");
        }
    }

    /// Central-difference directional derivative of the objective.
    fn fd_directional(
        rc: &ReducedCoords,
        dir: &[f64],
        prev: &DiscreteCurve,
        p: &EnergyParams,
    ) -> f64 {
        let h = 1e-5;
        let v = rc.to_vec();
        let plus: Vec<f64> = v.iter().zip(dir).map(|(a, d)| a + h * d).collect();
        let minus: Vec<f64> = v.iter().zip(dir).map(|(a, d)| a - h * d).collect();
        let fp = objective(&ReducedCoords::from_slice(&plus), prev, p).unwrap();
        let fm = objective(&ReducedCoords::from_slice(&minus), prev, p).unwrap();
        (fp - fm) / (2.0 * h)
    }

    #[test]
    fn rotation_direction_sees_only_coulomb_and_dissipation() {
        // Rotating every heading together keeps length and bending flat.
        let prev = seg(1.5, 9);
        let rc = prev.to_reduced().unwrap();
        let p = params(0.1, 0.2);
        let mut dir = alloc::vec![0.0; rc.dim()];
        dir[3..].iter_mut().for_each(|d| *d = 1.0);
        let g = objective_gradient(&rc, &prev, &p).unwrap();
        let analytic: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();

        // Oracle: directional derivative of the Coulomb + dissipation part only.
        let h = 1e-5;
        let part = |s: f64| {
            let mut r = rc.clone();
            r.headings.iter_mut().for_each(|x| *x += s);
            let c = r.to_curve();
            -c.gap().ln() + dissipation(&c, &prev).unwrap() / p.tau
        };
        let oracle = (part(h) - part(-h)) / (2.0 * h);
        assert!((analytic - oracle).abs() < 1e-8, "{analytic} vs {oracle}");
        assert!((analytic - fd_directional(&rc, &dir, &prev, &p)).abs() < 1e-8);
    }

    fn arb_pair() -> impl Strategy<Value = (DiscreteCurve, DiscreteCurve)> {
        let one = |n: usize| {
            (
                -2.0..2.0f64,
                -2.0..2.0f64,
                0.05..0.5f64,
                -PI..PI,
                proptest::collection::vec(-1.2..1.2f64, n - 2),
            )
                .prop_map(|(bx, by, l, h0, turns)| {
                    let mut h = h0;
                    let mut hs = alloc::vec![h];
                    for t in turns {
                        h += t;
                        hs.push(h);
                    }
                    ReducedCoords::new(Vec2::new(bx, by), l, hs).to_curve()
                })
        };
        (3usize..25).prop_flat_map(move |n| (one(n), one(n)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn dissipation_is_symmetric((a, b) in arb_pair()) {
            let dab = dissipation(&a, &b).unwrap();
            let dba = dissipation(&b, &a).unwrap();
            prop_assert!((dab - dba).abs() <= 1e-12 * dab.abs().max(1e-300));
            prop_assert_eq!(dissipation(&a, &a).unwrap(), 0.0);
        }

        #[test]
        fn objective_is_nonnegative((a, b) in arb_pair(), eps in 0.0..1.0f64, tau in 0.01..1.0f64) {
            prop_assume!(a.gap() > 1e-9);
            let p = params(eps, tau);
            let f = objective(&a.to_reduced().unwrap(), &b, &p).unwrap();
            prop_assert!(f >= 0.0);
            // E >= L - log L >= 1
            prop_assert!(energy(&a, &p).unwrap().total >= 1.0 - 1e-12);
        }

        #[test]
        fn energy_rigid_and_reversal_invariance((a, b) in arb_pair(), ang in -PI..PI, tx in -3.0..3.0f64) {
            prop_assume!(a.gap() > 1e-6);
            let p = params(0.1, 0.1);
            let e = energy(&a, &p).unwrap().total;
            let (s, c) = ang.sin_cos();
            let rot = |q: Vec2| Vec2::new(c * q.x - s * q.y + tx, s * q.x + c * q.y - tx);
            let moved = a.map_isometry(rot);
            prop_assert!((energy(&moved, &p).unwrap().total - e).abs() < 1e-10 * (1.0 + e.abs()));
            prop_assert!((energy(&a.reversed(), &p).unwrap().total - e).abs() < 1e-12 * (1.0 + e.abs()));
            prop_assert!((energy(&a.mirrored(), &p).unwrap().total - e).abs() < 1e-12 * (1.0 + e.abs()));

            let d = dissipation(&a, &b).unwrap();
            let dm = dissipation(&moved, &b.map_isometry(rot)).unwrap();
            prop_assert!((d - dm).abs() < 1e-10 * (1.0 + d));
            let dr = dissipation(&a.reversed(), &b.reversed()).unwrap();
            prop_assert!((d - dr).abs() < 1e-12 * (1.0 + d));
            let dmir = dissipation(&a.mirrored(), &b.mirrored()).unwrap();
            prop_assert!((d - dmir).abs() < 1e-12 * (1.0 + d));
            let m = measures(&a);
            prop_assert!(m.gap <= m.total_length * (1.0 + 1e-12));
        }
    }
}
