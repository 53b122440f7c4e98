//! The minimizing-movement iteration and its time interpolants.

use alloc::format;
use alloc::vec::Vec;

use crate::energy::{dissipation, energy, EnergyParams};
use crate::math;
use crate::minimize::{assert_cone_condition, minimize_step, SolverOptions, StepReport};
use crate::polyline::DiscreteCurve;
use crate::{BoundKind, Error, Result, Vec2};

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub params: EnergyParams,
    /// Stop after this many steps.
    pub n_steps: Option<usize>,
    /// Stop once the largest vertex speed falls below this.
    pub stop_tol: Option<f64>,
    pub solver: SolverOptions,
    /// Keep every k-th curve (the first and last are always kept).
    pub snapshot_every: usize,
    /// Fail instead of warning when a step solve hits its iteration cap.
    pub require_converged: bool,
}

impl FlowConfig {
    pub fn new(params: EnergyParams) -> Self {
        FlowConfig {
            params,
            n_steps: None,
            stop_tol: Some(1e-7),
            solver: SolverOptions::default(),
            snapshot_every: 1,
            require_converged: false,
        }
    }

    pub fn with_steps(mut self, n: usize) -> Self {
        self.n_steps = Some(n);
        self
    }

    pub fn with_stop_tol(mut self, tol: Option<f64>) -> Self {
        self.stop_tol = tol;
        self
    }

    fn check(&self) -> Result<()> {
        if self.n_steps.is_none() && self.stop_tol.is_none() {
            return Err(Error::BadParameters(
                "either a step count or a stopping velocity is required".into(),
            ));
        }
        if let Some(t) = self.stop_tol {
            if !(t > 0.0) {
                return Err(Error::BadParameters(format!(
                    "stop_tol must be positive, got {t}"
                )));
            }
        }
        if self.snapshot_every == 0 {
            return Err(Error::BadParameters(
                "snapshot_every must be at least 1".into(),
            ));
        }
        self.solver.check()
    }
}

/// A recorded curve at time `step * tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub curve: DiscreteCurve,
}

/// Per-step scalars. Step 0 describes the initial curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub energy: f64,
    pub length: f64,
    pub gap: f64,
    pub bending: f64,
    /// `D(x_n, x_{n-1}) / tau`; zero at step 0.
    pub dissipation_over_tau: f64,
    /// Largest vertex speed over the step; zero at step 0.
    pub max_speed: f64,
    pub report: Option<StepReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: EnergyParams,
    pub snapshots: Vec<Snapshot>,
    pub records: Vec<StepRecord>,
}

impl Trajectory {
    pub fn tau(&self) -> f64 {
        self.params.tau
    }

    /// Number of completed steps.
    pub fn n_steps(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn initial_energy(&self) -> f64 {
        self.records[0].energy
    }

    pub fn snapshot(&self, step: usize) -> Option<&DiscreteCurve> {
        self.snapshots
            .binary_search_by_key(&step, |s| s.step)
            .ok()
            .map(|i| &self.snapshots[i].curve)
    }

    pub fn final_curve(&self) -> &DiscreteCurve {
        &self.snapshots[self.snapshots.len() - 1].curve
    }

    /// `sum_n D(x_{n+1}, x_n) / tau`.
    pub fn total_dissipation(&self) -> f64 {
        self.records.iter().map(|r| r.dissipation_over_tau).sum()
    }

    fn step_index(&self, t: f64) -> (usize, usize, f64) {
        let u = (t / self.tau()).max(0.0);
        let lo = libm::floor(u);
        let hi = libm::ceil(u);
        (lo as usize, hi as usize, u - lo)
    }

    /// Piecewise-constant interpolant: the curve of step `ceil(t / tau)`.
    pub fn curve_at(&self, t: f64) -> Option<&DiscreteCurve> {
        self.snapshot(self.step_index(t).1)
    }

    /// Piecewise-affine interpolant in time of the vertex positions.
    pub fn affine_at(&self, t: f64) -> Option<Vec<Vec2>> {
        let (lo, hi, w) = self.step_index(t);
        let a = self.snapshot(lo)?;
        let b = self.snapshot(hi)?;
        Some(
            a.points()
                .iter()
                .zip(b.points())
                .map(|(p, q)| *p * (1.0 - w) + *q * w)
                .collect(),
        )
    }

    /// Piecewise-constant length `L(ceil(t / tau))`.
    pub fn length_at(&self, t: f64) -> Option<f64> {
        self.records.get(self.step_index(t).1).map(|r| r.length)
    }

    /// Piecewise-affine length.
    pub fn length_affine_at(&self, t: f64) -> Option<f64> {
        let (lo, hi, w) = self.step_index(t);
        let a = self.records.get(lo)?.length;
        let b = self.records.get(hi)?.length;
        Some(a * (1.0 - w) + b * w)
    }
}

fn violation(step: usize, kind: BoundKind, detail: alloc::string::String) -> Error {
    log::error!("step {step}: {kind} violated: {detail}");
    Error::BoundViolation { step, kind, detail }
}

/// Run the scheme from `initial` until the step budget or the velocity
/// threshold is hit. Every step is checked against the energy chain
/// `E(next) <= F(next, prev) <= E(prev)`, the gap floor, the triangle
/// inequality, the length and curvature bounds derived from `E(x_0)`, and
/// the cone condition on edge tangents.
pub fn run_flow(initial: &DiscreteCurve, cfg: &FlowConfig) -> Result<Trajectory> {
    cfg.check()?;
    let params = cfg.params;
    let tau = params.tau;
    let e0 = energy(initial, &params)?;
    if !(initial.gap() > cfg.solver.gap_floor) {
        return Err(Error::DegenerateGap);
    }
    let tol = 1e-10 * (1.0 + math::abs(e0.total));
    let n_edges = (initial.len() - 1) as f64;

    let mut records = alloc::vec![StepRecord {
        step: 0,
        time: 0.0,
        energy: e0.total,
        length: initial.total_length(),
        gap: initial.gap(),
        bending: e0.bending_term,
        dissipation_over_tau: 0.0,
        max_speed: 0.0,
        report: None,
    }];
    let mut snapshots = alloc::vec![Snapshot {
        step: 0,
        time: 0.0,
        curve: initial.clone(),
    }];

    let mut prev = initial.clone();
    let mut e_prev = e0.total;
    let mut step = 0usize;
    loop {
        if cfg.n_steps.is_some_and(|k| step >= k) {
            break;
        }
        let outcome = minimize_step(&prev, &params, &cfg.solver)?;
        let outcome = if cfg.require_converged {
            outcome.require_converged()?
        } else {
            if !outcome.report.converged {
                log::warn!(
                    "step {}: solver stopped at |g| = {:e} after {} iterations",
                    step + 1,
                    outcome.report.final_grad_norm,
                    outcome.report.iterations
                );
            }
            outcome
        };
        step += 1;
        let next = outcome.curve;
        let e = energy(&next, &params)?;
        let d = dissipation(&next, &prev)? / tau;
        let f = e.total + d;
        let gap = next.gap();
        let length = next.total_length();

        if !(e.total <= f + tol && f <= e_prev + tol) {
            return Err(violation(
                step,
                BoundKind::EnergyIncrease,
                format!("E_next = {}, F = {f}, E_prev = {e_prev}", e.total),
            ));
        }
        if !(gap > cfg.solver.gap_floor) {
            return Err(violation(
                step,
                BoundKind::GapFloor,
                format!("gap = {gap:e}"),
            ));
        }
        if gap > length * (1.0 + 1e-12) {
            return Err(violation(
                step,
                BoundKind::TriangleInequality,
                format!("gap = {gap}, length = {length}"),
            ));
        }
        if length > 2.0 * (e0.total + 1.0) {
            return Err(violation(
                step,
                BoundKind::LengthBound,
                format!("length = {length}, E_0 = {}", e0.total),
            ));
        }
        if e.bending_term > e0.total + tol {
            return Err(violation(
                step,
                BoundKind::CurvatureBound,
                format!("bending = {}, E_0 = {}", e.bending_term, e0.total),
            ));
        }
        if !assert_cone_condition(&next, &prev) {
            return Err(violation(
                step,
                BoundKind::Cone,
                format!("an edge turned past a right angle (tau = {tau})"),
            ));
        }
        log::debug!("step {step}: E = {}, gap = {gap}", e.total);

        let max_speed = next
            .points()
            .iter()
            .zip(prev.points())
            .map(|(a, b)| a.dist(*b))
            .fold(0.0f64, f64::max)
            / tau;
        let time = step as f64 * tau;
        records.push(StepRecord {
            step,
            time,
            energy: e.total,
            length,
            gap,
            bending: e.bending_term,
            dissipation_over_tau: d,
            max_speed,
            report: Some(outcome.report),
        });
        let done =
            cfg.n_steps.is_some_and(|k| step >= k) || cfg.stop_tol.is_some_and(|v| max_speed < v);
        if step.is_multiple_of(cfg.snapshot_every) || done {
            snapshots.push(Snapshot {
                step,
                time,
                curve: next.clone(),
            });
        }
        debug_assert!(length <= n_edges * next.edge_len() * (1.0 + 1e-12));
        prev = next;
        e_prev = e.total;
        if done {
            break;
        }
    }
    Ok(Trajectory {
        params,
        snapshots,
        records,
    })
}

/// Difference-quotient velocity over one step and its split into
/// tangential and normal parts.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub step: usize,
    /// `(x_i^{n+1} - x_i^n) / tau`.
    pub velocity: Vec<Vec2>,
    /// Unit vertex tangents of the later curve: normalized sum of the two
    /// adjacent edge tangents inside, the edge tangent at the ends.
    pub vertex_tangents: Vec<Vec2>,
    pub tangential: Vec<f64>,
    pub normal: Vec<f64>,
}

pub(crate) fn vertex_tangents(curve: &DiscreteCurve) -> Vec<Vec2> {
    let t = curve.tangents();
    let n = curve.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                t[0]
            } else if i == n - 1 {
                t[n - 2]
            } else {
                (t[i - 1] + t[i]).normalized().unwrap_or(t[i])
            }
        })
        .collect()
}

fn pair(traj: &Trajectory, n: usize) -> Result<(&DiscreteCurve, &DiscreteCurve)> {
    let err = Error::IndexOutOfRange {
        index: n,
        len: traj.n_steps(),
    };
    let a = traj.snapshot(n).ok_or(err.clone())?;
    let b = traj.snapshot(n + 1).ok_or(err)?;
    Ok((a, b))
}

/// Velocity over step `n -> n+1`; both curves must have been recorded.
pub fn velocity(traj: &Trajectory, n: usize) -> Result<VelocityField> {
    let (a, b) = pair(traj, n)?;
    let inv_tau = 1.0 / traj.tau();
    let velocity: Vec<Vec2> = b
        .points()
        .iter()
        .zip(a.points())
        .map(|(p, q)| (*p - *q) * inv_tau)
        .collect();
    let vertex_tangents = vertex_tangents(b);
    let tangential = velocity
        .iter()
        .zip(&vertex_tangents)
        .map(|(v, t)| v.dot(*t))
        .collect();
    let normal = velocity
        .iter()
        .zip(&vertex_tangents)
        .map(|(v, t)| v.dot(t.rot90()))
        .collect();
    Ok(VelocityField {
        step: n,
        velocity,
        vertex_tangents,
        tangential,
        normal,
    })
}

/// Residual of the tangential/normal coupling identity at interior vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingResidual {
    /// Values at vertices `2 .. N-1`.
    pub per_vertex: Vec<f64>,
    pub max: f64,
    pub l2: f64,
}

/// Trapezoid L2 norm in the unit parameter chart with spacing `h`.
pub(crate) fn l2_norm(values: &[f64], h: f64) -> f64 {
    let m = values.len();
    if m == 0 {
        return 0.0;
    }
    if m == 1 {
        return math::abs(values[0]) * math::sqrt(h);
    }
    let inner: f64 = values.iter().map(|v| v * v).sum::<f64>()
        - 0.5 * (values[0] * values[0] + values[m - 1] * values[m - 1]);
    math::sqrt(inner * h)
}

/// Discrete evaluation of
///
/// ```text
/// <V, g~_s + g_s>_s - (L~ + L) dL/dt - <V, L~^2 k~ n~ + L^2 k n>
/// ```
///
/// over step `n -> n+1`, with `g` the later curve, derivatives taken as
/// differences in the unit chart `s = (i-1)/(N-1)`, and `dL/dt` the slope of
/// the affine length interpolant.
pub fn coupling_residual(traj: &Trajectory, n: usize) -> Result<CouplingResidual> {
    let (old, cur) = pair(traj, n)?;
    let np = cur.len();
    if np < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: np });
    }
    let m = (np - 1) as f64;
    let h = 1.0 / m;
    let tau = traj.tau();
    let vel = velocity(traj, n)?;
    let v = &vel.velocity;

    let x = cur.points();
    let xo = old.points();
    let mu: Vec<Vec2> = (0..np - 1)
        .map(|e| ((x[e + 1] - x[e]) + (xo[e + 1] - xo[e])) * m)
        .collect();
    let f: Vec<f64> = (0..np)
        .map(|i| {
            let mu_v = if i == 0 {
                mu[0]
            } else if i == np - 1 {
                mu[np - 2]
            } else {
                (mu[i - 1] + mu[i]) * 0.5
            };
            v[i].dot(mu_v)
        })
        .collect();

    let len = cur.total_length();
    let len_old = old.total_length();
    let length_term = (len_old + len) * (len - len_old) / tau;
    let k = cur.curvature()?;
    let ko = old.curvature()?;
    let nrm: Vec<Vec2> = vertex_tangents(cur).iter().map(|t| t.rot90()).collect();
    let nrm_old: Vec<Vec2> = vertex_tangents(old).iter().map(|t| t.rot90()).collect();

    let per_vertex: Vec<f64> = (1..np - 1)
        .map(|i| {
            let ds = (f[i + 1] - f[i - 1]) / (2.0 * h);
            let bend =
                nrm_old[i] * (len_old * len_old * ko[i - 1]) + nrm[i] * (len * len * k[i - 1]);
            ds - length_term - v[i].dot(bend)
        })
        .collect();
    let max = per_vertex.iter().fold(0.0f64, |a, r| a.max(math::abs(*r)));
    let l2 = l2_norm(&per_vertex, h);
    Ok(CouplingResidual {
        per_vertex,
        max,
        l2,
    })
}
