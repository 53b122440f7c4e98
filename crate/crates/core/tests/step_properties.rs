use std::f64::consts::PI;

use elastica_core::{
    assert_cone_condition, dissipation, energy, minimize_step, resample_equal_arclength, run_flow,
    DiscreteCurve, EnergyParams, FlowConfig, ReducedCoords, SolverOptions, Vec2,
};
use proptest::prelude::*;

fn gentle_curve() -> impl Strategy<Value = DiscreteCurve> {
    (6usize..25, 0.8..2.5f64, -PI..PI, -1.0..1.0f64, -1.0..1.0f64).prop_flat_map(
        |(n, len, h0, bx, by)| {
            prop::collection::vec(-0.35..0.35f64, n - 2).prop_map(move |turns| {
                let mut h = h0;
                let mut headings = vec![h];
                for t in &turns {
                    h += t;
                    headings.push(h);
                }
                ReducedCoords::new(Vec2::new(bx, by), len / (n - 1) as f64, headings).to_curve()
            })
        },
    )
}

fn params() -> impl Strategy<Value = EnergyParams> {
    (0.0..0.2f64, 0.01..0.3f64).prop_map(|(e, t)| EnergyParams::new(e, t).unwrap())
}

fn max_dist(a: &DiscreteCurve, b: &DiscreteCurve) -> f64 {
    a.points()
        .iter()
        .zip(b.points())
        .map(|(p, q)| p.dist(*q))
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_does_not_increase_objective(prev in gentle_curve(), p in params()) {
        let out = minimize_step(&prev, &p, &SolverOptions::default()).unwrap();
        let e0 = energy(&prev, &p).unwrap().total;
        let e1 = energy(&out.curve, &p).unwrap().total;
        let f1 = e1 + dissipation(&out.curve, &prev).unwrap() / p.tau;
        let slack = 1e-12 * (1.0 + e0.abs());
        prop_assert!(f1 <= e0 + slack, "F {f1} > E0 {e0}");
        prop_assert!(e1 <= e0 + slack);
        prop_assert!(out.curve.edge_spread() < 1e-10);
        prop_assert!(assert_cone_condition(&out.curve, &prev));
        prop_assert_eq!(out.curve.len(), prev.len());
    }

    #[test]
    fn step_commutes_with_isometries(prev in gentle_curve(), p in params(), ang in -PI..PI, tx in -2.0..2.0f64) {
        let opts = SolverOptions::default();
        let next = minimize_step(&prev, &p, &opts).unwrap().curve;
        let (s, c) = ang.sin_cos();
        let motion = |q: Vec2| Vec2::new(c * q.x - s * q.y + tx, s * q.x + c * q.y);
        let moved = minimize_step(&prev.map_isometry(motion), &p, &opts).unwrap().curve;
        prop_assert!(max_dist(&moved, &next.map_isometry(motion)) < 1e-6);
        let reversed = minimize_step(&prev.reversed(), &p, &opts).unwrap().curve;
        prop_assert!(max_dist(&reversed, &next.reversed()) < 1e-6);
    }

    #[test]
    fn resampling_gives_equal_edges(curve in gentle_curve(), n in 3usize..60) {
        let pts = curve.points();
        let out = resample_equal_arclength(pts, n).unwrap();
        prop_assert_eq!(out.len(), n);
        prop_assert_eq!(out.points()[0], pts[0]);
        prop_assert_eq!(out.points()[n - 1], pts[pts.len() - 1]);
        prop_assert!(out.edge_spread() < 1e-6);
        prop_assert!(out.total_length() <= curve.total_length() * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn short_flow_respects_bounds(initial in gentle_curve(), p in params()) {
        let cfg = FlowConfig::new(p).with_steps(10);
        let traj = run_flow(&initial, &cfg).unwrap();
        let e0 = energy(&initial, &p).unwrap().total;
        for w in traj.records.windows(2) {
            prop_assert!(w[1].energy <= w[0].energy + 1e-10 * (1.0 + e0.abs()));
        }
        for s in &traj.snapshots {
            let len = s.curve.total_length();
            prop_assert!(s.curve.gap() <= len * (1.0 + 1e-12));
            prop_assert!(len <= 2.0 * (e0 + 1.0));
        }
    }
}
