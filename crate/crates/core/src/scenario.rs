//! Initial curves for the built-in experiments and their parameter presets.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math;
use crate::polyline::DiscreteCurve;
use crate::resample::resample_equal_arclength;
use crate::{Error, Result, Vec2};

/// Vertices of the dense polylines fed to the resampler.
const DENSE: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    /// Straight segment from the origin along the x-axis.
    Segment { length: f64, n: usize },
    /// Graph of `amplitude * sin(x)` for `x` in `[-half_width, half_width]`.
    Sinus {
        amplitude: f64,
        half_width: f64,
        n: usize,
    },
    /// Tail, loop, tail: two straight tails cross once above a circular
    /// loop they are tangent to.
    Gamma {
        radius: f64,
        /// Height of the crossing above the loop centre; must exceed `radius`.
        crossing_height: f64,
        left_tail: f64,
        right_tail: f64,
        n: usize,
    },
    /// Arbitrary input polyline, resampled.
    Polyline { points: Vec<Vec2>, n: usize },
}

impl Scenario {
    pub fn segment(length: f64, n: usize) -> Self {
        Scenario::Segment { length, n }
    }

    pub fn sinus(n: usize) -> Self {
        Scenario::Sinus {
            amplitude: 1.0,
            half_width: PI,
            n,
        }
    }

    pub fn gamma(n: usize) -> Self {
        Scenario::Gamma {
            radius: 0.35,
            crossing_height: 0.7,
            left_tail: 1.0,
            right_tail: 1.0,
            n,
        }
    }

    /// The gamma shape with its left tail halved.
    pub fn asym_gamma(n: usize) -> Self {
        Scenario::Gamma {
            radius: 0.35,
            crossing_height: 0.7,
            left_tail: 0.5,
            right_tail: 1.0,
            n,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Scenario::Segment { n, .. }
            | Scenario::Sinus { n, .. }
            | Scenario::Gamma { n, .. }
            | Scenario::Polyline { n, .. } => *n,
        }
    }

    pub fn with_n(mut self, new_n: usize) -> Self {
        match &mut self {
            Scenario::Segment { n, .. }
            | Scenario::Sinus { n, .. }
            | Scenario::Gamma { n, .. }
            | Scenario::Polyline { n, .. } => *n = new_n,
        }
        self
    }

    pub fn id(&self) -> &'static str {
        match self {
            Scenario::Segment { .. } => "segment",
            Scenario::Sinus { .. } => "sinus",
            Scenario::Gamma {
                left_tail,
                right_tail,
                ..
            } if left_tail == right_tail => "gamma",
            Scenario::Gamma { .. } => "asym_gamma",
            Scenario::Polyline { .. } => "file",
        }
    }
}

fn bad(msg: &str) -> Error {
    Error::BadParameters(String::from(msg))
}

/// Build the initial curve for a scenario.
pub fn make_scenario(sc: &Scenario) -> Result<DiscreteCurve> {
    let n = sc.n();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    match sc {
        Scenario::Segment { length, .. } => {
            if !(*length > 0.0 && length.is_finite()) {
                return Err(bad("segment length must be positive"));
            }
            DiscreteCurve::straight(Vec2::ZERO, Vec2::new(*length, 0.0), n)
        }
        Scenario::Sinus {
            amplitude,
            half_width,
            ..
        } => {
            if !(*half_width > 0.0 && amplitude.is_finite() && half_width.is_finite()) {
                return Err(bad("sinus needs a positive half width"));
            }
            let mut dense: Vec<Vec2> = (0..=DENSE)
                .map(|i| {
                    let x = -half_width + 2.0 * half_width * i as f64 / DENSE as f64;
                    Vec2::new(x, amplitude * math::sin(x))
                })
                .collect();
            // endpoints exactly on the axis when the interval is a multiple of pi
            dense[0].x = -half_width;
            dense[DENSE].x = *half_width;
            if math::abs(dense[0].y) < 1e-12 {
                dense[0].y = 0.0;
            }
            if math::abs(dense[DENSE].y) < 1e-12 {
                dense[DENSE].y = 0.0;
            }
            resample_equal_arclength(&dense, n)
        }
        Scenario::Gamma {
            radius,
            crossing_height,
            left_tail,
            right_tail,
            ..
        } => {
            let (r, d) = (*radius, *crossing_height);
            if !(r > 0.0 && d > r && *left_tail >= 0.0 && *right_tail >= 0.0) {
                return Err(bad(
                    "gamma needs radius > 0, crossing height > radius, tails >= 0",
                ));
            }
            resample_equal_arclength(&gamma_polyline(r, d, *left_tail, *right_tail), n)
        }
        Scenario::Polyline { points, .. } => resample_equal_arclength(points, n),
    }
}

/// Dense tail-loop-tail polyline. The loop is centred at the origin; the
/// tails cross at `(0, d)` and touch the circle at angle `acos(r/d)` from the
/// vertical. The curve runs from the upper-left endpoint down through the
/// crossing, clockwise around the bottom of the loop, and back up through the
/// crossing to the upper-right endpoint.
fn gamma_polyline(r: f64, d: f64, left_tail: f64, right_tail: f64) -> Vec<Vec2> {
    let phi = libm::acos(r / d);
    let cross = Vec2::new(0.0, d);
    let t_right = Vec2::new(r * math::sin(phi), r * math::cos(phi));
    let t_left = Vec2::new(-t_right.x, t_right.y);
    let dir_in = (t_right - cross).normalized().unwrap_or(Vec2::ZERO);
    let dir_out = (cross - t_left).normalized().unwrap_or(Vec2::ZERO);
    let start = cross - dir_in * left_tail;
    let end = cross + dir_out * right_tail;

    let mut pts = Vec::with_capacity(DENSE + 4);
    pts.push(start);
    pts.push(cross);
    let sweep = 2.0 * PI - 2.0 * phi;
    for i in 0..=DENSE {
        let psi = phi + sweep * i as f64 / DENSE as f64;
        pts.push(Vec2::new(r * math::sin(psi), r * math::cos(psi)));
    }
    pts.push(cross);
    pts.push(end);
    pts
}

/// A named parameter set for one of the built-in experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub scenario: Scenario,
    pub epsilon: f64,
    pub tau: f64,
    pub stop_tol: f64,
}

impl Preset {
    pub fn all() -> Vec<Preset> {
        alloc::vec![
            Preset {
                name: "segment",
                scenario: Scenario::segment(2.0, 51),
                epsilon: 0.01,
                tau: 0.05,
                stop_tol: 1e-7,
            },
            Preset {
                name: "sinus",
                scenario: Scenario::sinus(81),
                epsilon: 0.01,
                tau: 0.25,
                stop_tol: 1e-6,
            },
            Preset {
                name: "gamma",
                scenario: Scenario::gamma(120),
                epsilon: 0.1,
                tau: 0.0125,
                stop_tol: 1e-6,
            },
            Preset {
                name: "gamma_eps0.01",
                scenario: Scenario::gamma(120),
                epsilon: 0.01,
                tau: 0.0125,
                stop_tol: 1e-6,
            },
            Preset {
                name: "asym_gamma",
                scenario: Scenario::asym_gamma(120),
                epsilon: 0.1,
                tau: 0.01,
                stop_tol: 1e-6,
            },
        ]
    }

    pub fn by_name(name: &str) -> Option<Preset> {
        Preset::all().into_iter().find(|p| p.name == name)
    }
}
