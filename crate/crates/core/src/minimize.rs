//! One implicit time step: minimize `E(x) + D(x, prev) / tau`.
//!
//! The search runs in reduced coordinates with a limited-memory BFGS
//! direction and a backtracking line search. Trial points whose endpoint gap
//! drops below `gap_floor`, whose edge length is not positive, or which
//! contain an anti-parallel cusp are rejected by shrinking the step.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::energy::{EnergyParams, StepObjective};
use crate::math;
use crate::polyline::{DiscreteCurve, ReducedCoords};
use crate::{Error, Result, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop when the gradient max-norm is at most this.
    pub grad_tol: f64,
    pub max_iters: usize,
    /// Backtracking factor in `(0, 1)`.
    pub ls_shrink: f64,
    /// Armijo sufficient-decrease constant.
    pub ls_c1: f64,
    /// Number of stored correction pairs.
    pub memory: usize,
    /// Smallest admissible endpoint gap for trial points.
    pub gap_floor: f64,
    /// Backtracking steps before the line search gives up.
    pub max_halvings: usize,
    /// Largest heading change (radians) allowed in one trial step.
    pub max_turn: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            grad_tol: 1e-9,
            max_iters: 2000,
            ls_shrink: 0.5,
            ls_c1: 1e-4,
            memory: 10,
            gap_floor: 1e-8,
            max_halvings: 60,
            max_turn: 0.5,
        }
    }
}

impl SolverOptions {
    pub fn check(&self) -> Result<()> {
        let ok = self.grad_tol > 0.0
            && self.max_iters > 0
            && self.ls_shrink > 0.0
            && self.ls_shrink < 1.0
            && self.ls_c1 > 0.0
            && self.ls_c1 < 1.0
            && self.memory > 0
            && self.gap_floor > 0.0
            && self.max_halvings > 0
            && self.max_turn > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::BadParameters(alloc::format!(
                "invalid solver options {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub f_initial: f64,
    /// At most `f_initial`, except that a stationary point may sit above it
    /// by objective roundoff, `1e-14 (1 + |f_initial|)`.
    pub f_final: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub curve: DiscreteCurve,
    pub report: StepReport,
}

impl StepOutcome {
    /// Turn a non-converged outcome into [`Error::NotConverged`].
    pub fn require_converged(self) -> Result<Self> {
        if self.report.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                iterations: self.report.iterations,
                grad_norm: self.report.final_grad_norm,
            })
        }
    }
}

/// `true` iff every edge tangent of `next` makes a non-obtuse angle with the
/// matching edge tangent of `prev`.
pub fn assert_cone_condition(next: &DiscreteCurve, prev: &DiscreteCurve) -> bool {
    if next.len() != prev.len() {
        return false;
    }
    next.tangents()
        .iter()
        .zip(prev.tangents())
        .all(|(a, b)| a.dot(b) >= 0.0)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(math::abs(*v)))
}

/// Fixed initial inverse Hessian of the two-loop recursion: the Cholesky
/// factor of the objective Hessian at the warm start, shifted until positive
/// definite. The Hessian comes from central differences of the analytic
/// gradient.
struct Preconditioner {
    chol: Cholesky<f64, Dyn>,
}

impl Preconditioner {
    fn build(obj: &Evaluator<'_>, x: &[f64]) -> Option<Self> {
        let dim = x.len();
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        let mut probe = x.to_vec();
        let mut gp = vec![0.0; dim];
        let mut gm = vec![0.0; dim];
        for j in 0..dim {
            let step = match j {
                0 | 1 => 1e-6 * math::abs(x[j]).max(1.0),
                2 => 1e-6 * x[2],
                _ => 1e-6,
            };
            probe[j] = x[j] + step;
            obj.gradient(&probe, &mut gp).ok()?;
            probe[j] = x[j] - step;
            obj.gradient(&probe, &mut gm).ok()?;
            probe[j] = x[j];
            for i in 0..dim {
                h[(i, j)] = (gp[i] - gm[i]) / (2.0 * step);
            }
        }
        let h = (&h + h.transpose()) * 0.5;
        if h.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let scale = (0..dim).fold(0.0f64, |m, i| m.max(math::abs(h[(i, i)])));
        let mut shift = 0.0;
        for _ in 0..40 {
            let mut shifted = h.clone();
            for i in 0..dim {
                shifted[(i, i)] += shift;
            }
            if let Some(chol) = shifted.cholesky() {
                return Some(Preconditioner { chol });
            }
            shift = if shift == 0.0 {
                1e-10 * scale.max(1e-300)
            } else {
                shift * 10.0
            };
        }
        None
    }

    fn apply(&self, q: &mut [f64]) {
        let mut v = DVector::from_column_slice(q);
        self.chol.solve_mut(&mut v);
        q.copy_from_slice(v.as_slice());
    }
}

struct History {
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
    cap: usize,
    precond: Option<Preconditioner>,
}

impl History {
    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        let sy = dot(&s, &y);
        // skip pairs without positive curvature
        if !(sy > 1e-16 * math::sqrt(dot(&s, &s) * dot(&y, &y))) {
            return;
        }
        if self.pairs.len() == self.cap {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy));
    }

    /// Two-loop recursion: `-H g`.
    fn direction(&self, g: &[f64]) -> Vec<f64> {
        let mut q = g.to_vec();
        let mut alphas = vec![0.0; self.pairs.len()];
        for (k, (s, y, rho)) in self.pairs.iter().enumerate().rev() {
            let a = rho * dot(s, &q);
            alphas[k] = a;
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        }
        if let Some(p) = &self.precond {
            p.apply(&mut q);
        } else if let Some((s, y, _)) = self.pairs.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|qi| *qi *= gamma);
        }
        for (k, (s, y, rho)) in self.pairs.iter().enumerate() {
            let b = rho * dot(y, &q);
            q.iter_mut()
                .zip(s)
                .for_each(|(qi, si)| *qi += (alphas[k] - b) * si);
        }
        q.iter_mut().for_each(|qi| *qi = -*qi);
        q
    }
}

/// The step objective in a chart anchored at the midpoint of the endpoints:
/// `(anchor, l, headings)` with `x_1 = anchor - (l/2) sum_k u(h_k)`.
/// Mirror images and reversals of a curve act linearly on this chart, so
/// iterates of a symmetric problem keep the symmetry of their start.
struct Evaluator<'a> {
    obj: StepObjective<'a>,
    gap_floor: f64,
}

fn heading_sum(v: &[f64]) -> Vec2 {
    v[3..]
        .iter()
        .fold(Vec2::ZERO, |acc, &h| acc + Vec2::from_angle(h))
}

/// Base-point chart to anchored chart.
fn to_anchored(v: &[f64]) -> Vec<f64> {
    let mid = heading_sum(v) * (0.5 * v[2]);
    let mut a = v.to_vec();
    a[0] += mid.x;
    a[1] += mid.y;
    a
}

fn from_anchored(a: &[f64]) -> Vec<f64> {
    let mid = heading_sum(a) * (0.5 * a[2]);
    let mut v = a.to_vec();
    v[0] -= mid.x;
    v[1] -= mid.y;
    v
}

impl Evaluator<'_> {
    /// Objective value, or `None` outside the open feasible set.
    fn value(&self, a: &[f64]) -> Option<f64> {
        if !(a[2] > 0.0) || a.iter().any(|x| !x.is_finite()) {
            return None;
        }
        let curve = ReducedCoords::from_slice(&from_anchored(a)).to_curve();
        if !(curve.gap() > self.gap_floor) {
            return None;
        }
        match self.obj.value_curve(&curve) {
            Ok(f) if f.is_finite() => Some(f),
            _ => None,
        }
    }

    fn objective(&self, a: &[f64]) -> Result<f64> {
        self.obj.value(&from_anchored(a))
    }

    fn gradient(&self, a: &[f64], g: &mut [f64]) -> Result<()> {
        self.obj.gradient(&from_anchored(a), g)?;
        let force = Vec2::new(g[0], g[1]);
        let half_l = 0.5 * a[2];
        g[2] -= 0.5 * force.dot(heading_sum(a));
        for (gk, &h) in g[3..].iter_mut().zip(&a[3..]) {
            *gk -= half_l * force.dot(Vec2::from_angle(h).rot90());
        }
        Ok(())
    }
}

/// Minimize the step objective starting from `prev`.
///
/// Returns the minimizer with `converged = false` if `max_iters` is reached;
/// use [`StepOutcome::require_converged`] to treat that as an error.
pub fn minimize_step(
    prev: &DiscreteCurve,
    params: &EnergyParams,
    opts: &SolverOptions,
) -> Result<StepOutcome> {
    opts.check()?;
    let start = to_anchored(&prev.to_reduced()?.to_vec());
    let eval = Evaluator {
        obj: StepObjective::new(prev, *params),
        gap_floor: opts.gap_floor,
    };
    let dim = start.len();

    let mut x = start.clone();
    let f_initial = match eval.value(&x) {
        Some(f) => f,
        None => eval.objective(&x).and(Err(Error::DegenerateGap))?,
    };
    let mut f = f_initial;
    let mut g = vec![0.0; dim];
    eval.gradient(&x, &mut g)?;
    let mut gnorm = max_abs(&g);

    let mut hist = History {
        pairs: VecDeque::with_capacity(opts.memory),
        cap: opts.memory,
        precond: None,
    };
    if gnorm > opts.grad_tol {
        hist.precond = Preconditioner::build(&eval, &x);
    }
    let mut iterations = 0;
    let mut g_trial = vec![0.0; dim];
    let mut trial = vec![0.0; dim];
    // roundoff allowance for the approximate Armijo test
    let noise = |f: f64| 1e-14 * (1.0 + math::abs(f));

    while gnorm > opts.grad_tol && iterations < opts.max_iters {
        let mut d = hist.direction(&g);
        let mut gd = dot(&g, &d);
        if !(gd < 0.0) {
            hist.pairs.clear();
            d = hist.direction(&g);
            gd = dot(&g, &d);
        }
        if !(gd < 0.0) {
            hist.precond = None;
            d = hist.direction(&g);
            gd = dot(&g, &d);
        }

        let mut accepted = false;
        for _ in 0..3 {
            let mut alpha = 1.0f64;
            let turn = max_abs(&d[3..]);
            if turn * alpha > opts.max_turn {
                alpha = opts.max_turn / turn;
            }
            if math::abs(d[2]) * alpha > 0.5 * x[2] {
                alpha = 0.5 * x[2] / math::abs(d[2]);
            }
            for _ in 0..=opts.max_halvings {
                trial
                    .iter_mut()
                    .zip(x.iter().zip(&d))
                    .for_each(|(t, (xi, di))| *t = xi + alpha * di);
                if let Some(ft) = eval.value(&trial) {
                    let armijo = ft <= f + opts.ls_c1 * alpha * gd && ft < f;
                    let near = !armijo && ft <= f + noise(f);
                    if armijo || near {
                        eval.gradient(&trial, &mut g_trial)?;
                        let slope = dot(&g_trial, &d);
                        // Approximate Wolfe: accept a roundoff-level change
                        // when the slope shows the step did not overshoot.
                        if armijo || slope <= (2.0 * opts.ls_c1 - 1.0) * gd {
                            let s: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
                            let y: Vec<f64> = g_trial.iter().zip(&g).map(|(a, b)| a - b).collect();
                            hist.push(s, y);
                            core::mem::swap(&mut x, &mut trial);
                            core::mem::swap(&mut g, &mut g_trial);
                            f = ft;
                            accepted = true;
                            break;
                        }
                    }
                }
                alpha *= opts.ls_shrink;
            }
            if accepted || (hist.pairs.is_empty() && hist.precond.is_none()) {
                break;
            }
            // retry with a fresh memory, then along steepest descent
            if hist.pairs.is_empty() {
                hist.precond = None;
            }
            hist.pairs.clear();
            d = hist.direction(&g);
            gd = dot(&g, &d);
        }
        iterations += 1;
        if !accepted {
            return Err(Error::LineSearchFailure {
                iteration: iterations,
            });
        }
        gnorm = max_abs(&g);
    }

    let stationary = gnorm <= opts.grad_tol;
    if f > f_initial && !(stationary && f <= f_initial + noise(f_initial)) {
        // only roundoff-level moves were taken; keep the starting point
        x = start;
        f = f_initial;
        eval.gradient(&x, &mut g)?;
        gnorm = max_abs(&g);
    }
    let curve = ReducedCoords::from_slice(&from_anchored(&x)).to_curve();
    Ok(StepOutcome {
        curve,
        report: StepReport {
            iterations,
            final_grad_norm: gnorm,
            f_initial,
            f_final: f,
            converged: gnorm <= opts.grad_tol,
        },
    })
}
