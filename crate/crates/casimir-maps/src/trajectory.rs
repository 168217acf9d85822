//! Periodic mirror motions a(t) with exact derivatives up to third order.
//!
//! Two families are provided. The `Sine` family is 1-periodic,
//!
//! ```text
//! a(t) = α/2 + (β/2π) sin(2πt + γ sin²(4πt)),
//! ```
//!
//! and drives all parameter-space sweeps. The `SmoothedStart` family keeps
//! both mirrors at rest for t ≤ 0 and switches the same oscillation on
//! through the factor (1 − exp(−t⁴)), whose derivatives up to order three
//! vanish at t = 0; that keeps the Moore-equation solution C³ across the
//! start of the motion, which the Schwarzian-derivative machinery requires.
//!
//! Physical validity demands a(t) > 0 (the cavity never collapses) and
//! |a'(t)| < 1 (the mirror stays subluminal). The circle-map construction
//! additionally needs a(t) < 1/2 so the advance map steps by less than one
//! period; that is enforced when the map is built, not here.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::jet::Jet3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryFamily {
    Sine,
    SmoothedStart,
}

impl fmt::Display for TrajectoryFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrajectoryFamily::Sine => write!(f, "sine"),
            TrajectoryFamily::SmoothedStart => write!(f, "smoothed_start"),
        }
    }
}

impl FromStr for TrajectoryFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "sine" => Ok(TrajectoryFamily::Sine),
            "smoothed_start" | "smoothedstart" => Ok(TrajectoryFamily::SmoothedStart),
            other => Err(format!("unknown trajectory family `{other}`")),
        }
    }
}

/// Dimensionless mirror-motion parameters: mean length α, oscillation
/// amplitude β, anharmonicity γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryParams {
    pub family: TrajectoryFamily,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl TrajectoryParams {
    pub fn new(family: TrajectoryFamily, alpha: f64, beta: f64, gamma: f64) -> Self {
        TrajectoryParams {
            family,
            alpha,
            beta,
            gamma,
        }
    }

    /// Checks the constructor guards, naming the violated inequality.
    ///
    /// `|β|(1+2|γ|) < 1` is a sufficient condition for subluminal motion;
    /// a grid scan (`MirrorTrajectory::validate`) is the authoritative check
    /// when the guard is too conservative.
    pub fn check(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.beta.is_finite() && self.gamma.is_finite()) {
            return Err(Error::ConstraintViolation(
                "alpha, beta, gamma must be finite".into(),
            ));
        }
        if self.alpha <= 0.0 {
            return Err(Error::ConstraintViolation(format!(
                "alpha > 0 violated (alpha = {})",
                self.alpha
            )));
        }
        if self.alpha / 2.0 <= self.beta.abs() / (2.0 * PI) {
            return Err(Error::ConstraintViolation(format!(
                "alpha/2 > |beta|/(2 pi) violated (alpha/2 = {}, |beta|/(2 pi) = {})",
                self.alpha / 2.0,
                self.beta.abs() / (2.0 * PI)
            )));
        }
        if self.beta.abs() * (1.0 + 2.0 * self.gamma.abs()) >= 1.0 {
            return Err(Error::ConstraintViolation(format!(
                "|beta| (1 + 2 |gamma|) < 1 violated (got {})",
                self.beta.abs() * (1.0 + 2.0 * self.gamma.abs())
            )));
        }
        Ok(())
    }
}

/// Extrema of the motion over its domain, widened outward so they are safe
/// to use as root-finder brackets.
#[derive(Debug, Clone, Copy)]
pub struct TrajectoryBounds {
    pub a_min: f64,
    pub a_max: f64,
    pub max_speed: f64,
}

/// A mirror world line x = a(t). Immutable after construction, so it can be
/// shared freely across parallel sweeps.
#[derive(Debug, Clone)]
pub struct MirrorTrajectory {
    params: TrajectoryParams,
    bounds: TrajectoryBounds,
}

/// Grid density for the bounds scan; candidate extrema are polished by
/// golden-section search afterwards.
const BOUNDS_GRID: usize = 4096;
const BOUNDS_TOL: f64 = 1e-12;
/// Outward widening applied to scanned bounds.
const BOUNDS_PAD: f64 = 1e-9;

impl MirrorTrajectory {
    /// Builds a trajectory, rejecting parameters that fail the family guards.
    pub fn new(params: TrajectoryParams) -> Result<Self> {
        params.check()?;
        Ok(Self::new_unchecked(params))
    }

    /// Builds a trajectory without the parameter guards. Intended for
    /// validation sweeps that probe deliberately out-of-range parameters;
    /// `validate` remains meaningful on the result.
    pub fn new_unchecked(params: TrajectoryParams) -> Self {
        let bounds = scan_bounds(&params);
        MirrorTrajectory { params, bounds }
    }

    pub fn sine(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        Self::new(TrajectoryParams::new(
            TrajectoryFamily::Sine,
            alpha,
            beta,
            gamma,
        ))
    }

    pub fn smoothed_start(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        Self::new(TrajectoryParams::new(
            TrajectoryFamily::SmoothedStart,
            alpha,
            beta,
            gamma,
        ))
    }

    pub fn params(&self) -> &TrajectoryParams {
        &self.params
    }

    pub fn family(&self) -> TrajectoryFamily {
        self.params.family
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha
    }

    /// True when a(t+1) = a(t) for all t.
    pub fn is_periodic(&self) -> bool {
        self.params.family == TrajectoryFamily::Sine
    }

    pub fn bounds(&self) -> &TrajectoryBounds {
        &self.bounds
    }

    /// a(t) and its first three derivatives.
    pub fn eval(&self, t: f64) -> Jet3 {
        eval_jet(&self.params, t)
    }

    pub fn position(&self, t: f64) -> f64 {
        self.eval(t).value
    }

    pub fn velocity(&self, t: f64) -> f64 {
        self.eval(t).d1
    }

    /// Doppler factor D(t) = (1 - a'(t)) / (1 + a'(t)) at a reflection off
    /// the moving mirror at time t. Greater than one when the mirror moves
    /// inward (a' < 0), which is when packets gain energy.
    pub fn doppler(&self, t: f64) -> f64 {
        let v = self.velocity(t);
        (1.0 - v) / (1.0 + v)
    }

    /// Dense grid scan (with local refinement near extrema) of the physical
    /// constraints. Failures are report fields, not errors, so invalid
    /// parameter regions can be mapped.
    pub fn validate(&self, n_grid: usize) -> ValidationReport {
        let n = n_grid.max(1000);
        let (lo, hi) = match self.params.family {
            TrajectoryFamily::Sine => (0.0, 1.0),
            // rest, switch-on transient, and one fully developed period
            TrajectoryFamily::SmoothedStart => (-1.0, 4.0),
        };
        let mut a_min = f64::INFINITY;
        let mut a_max = f64::NEG_INFINITY;
        let mut max_speed: f64 = 0.0;
        let step = (hi - lo) / n as f64;
        for i in 0..=n {
            let t = lo + i as f64 * step;
            let j = self.eval(t);
            a_min = a_min.min(j.value);
            a_max = a_max.max(j.value);
            max_speed = max_speed.max(j.d1.abs());
        }
        // refine near the grid extrema
        let pos = |t: f64| self.eval(t).value;
        let speed = |t: f64| self.eval(t).d1.abs();
        a_min = a_min.min(refine_extrema(&pos, lo, hi, n, false));
        a_max = a_max.max(refine_extrema(&pos, lo, hi, n, true));
        max_speed = max_speed.max(refine_extrema(&speed, lo, hi, n, true));

        let periodicity_residual = if self.is_periodic() {
            let mut r: f64 = 0.0;
            for i in 0..n {
                let t = i as f64 / n as f64;
                r = r.max((self.position(t + 1.0) - self.position(t)).abs());
            }
            Some(r)
        } else {
            None
        };

        ValidationReport {
            a_min,
            a_max,
            max_speed,
            positive_ok: a_min > 0.0,
            subluminal_ok: max_speed < 1.0,
            short_cavity_ok: a_max < 0.5,
            periodic_ok: periodicity_residual.map_or(true, |r| r < 1e-12),
            periodicity_residual,
        }
    }
}

/// Outcome of the grid-scan validation of a trajectory.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub a_min: f64,
    pub a_max: f64,
    pub max_speed: f64,
    /// a(t) > 0 everywhere.
    pub positive_ok: bool,
    /// |a'(t)| < 1 everywhere.
    pub subluminal_ok: bool,
    /// a(t) < 1/2 everywhere (invertible circle map).
    pub short_cavity_ok: bool,
    pub periodic_ok: bool,
    /// max |a(t+1) - a(t)| for the periodic family.
    pub periodicity_residual: Option<f64>,
}

impl ValidationReport {
    pub fn all_ok(&self) -> bool {
        self.positive_ok && self.subluminal_ok && self.short_cavity_ok && self.periodic_ok
    }

    /// Names the first failed check, if any.
    pub fn first_failure(&self) -> Option<&'static str> {
        if !self.positive_ok {
            Some("a(t) > 0")
        } else if !self.subluminal_ok {
            Some("|a'(t)| < 1")
        } else if !self.short_cavity_ok {
            Some("a(t) < 1/2")
        } else if !self.periodic_ok {
            Some("a(t+1) = a(t)")
        } else {
            None
        }
    }
}

/// Jet of the phase 2πt + γ sin²(4πt).
fn phase_jet(gamma: f64, t: f64) -> Jet3 {
    let two_pi = 2.0 * PI;
    let s8 = (8.0 * PI * t).sin();
    let c8 = (8.0 * PI * t).cos();
    let s4 = (4.0 * PI * t).sin();
    Jet3::new(
        two_pi * t + gamma * s4 * s4,
        two_pi + 4.0 * PI * gamma * s8,
        32.0 * PI * PI * gamma * c8,
        -256.0 * PI.powi(3) * gamma * s8,
    )
}

/// Jet of sin(φ(t)) for the family phase φ.
fn oscillation_jet(gamma: f64, t: f64) -> Jet3 {
    let phi = phase_jet(gamma, t);
    let s = Jet3::new(phi.value.sin(), phi.value.cos(), -phi.value.sin(), -phi.value.cos());
    s.compose(&phi)
}

/// Jet of the switch-on factor 1 - exp(-t^4), t > 0.
fn switch_jet(t: f64) -> Jet3 {
    let t2 = t * t;
    let t3 = t2 * t;
    let e = (-t2 * t2).exp();
    Jet3::new(
        1.0 - e,
        4.0 * t3 * e,
        (12.0 * t2 - 16.0 * t3 * t3) * e,
        (24.0 * t - 144.0 * t2 * t3 + 64.0 * t3 * t3 * t3) * e,
    )
}

/// Leibniz product of two jets at the same base point.
fn product(u: &Jet3, v: &Jet3) -> Jet3 {
    Jet3::new(
        u.value * v.value,
        u.d1 * v.value + u.value * v.d1,
        u.d2 * v.value + 2.0 * u.d1 * v.d1 + u.value * v.d2,
        u.d3 * v.value + 3.0 * u.d2 * v.d1 + 3.0 * u.d1 * v.d2 + u.value * v.d3,
    )
}

fn eval_jet(params: &TrajectoryParams, t: f64) -> Jet3 {
    let half_alpha = params.alpha / 2.0;
    let c = params.beta / (2.0 * PI);
    match params.family {
        TrajectoryFamily::Sine => {
            let g = oscillation_jet(params.gamma, t);
            Jet3::new(half_alpha + c * g.value, c * g.d1, c * g.d2, c * g.d3)
        }
        TrajectoryFamily::SmoothedStart => {
            if t <= 0.0 {
                Jet3::constant(half_alpha)
            } else {
                let sg = product(&switch_jet(t), &oscillation_jet(params.gamma, t));
                Jet3::new(half_alpha + c * sg.value, c * sg.d1, c * sg.d2, c * sg.d3)
            }
        }
    }
}

fn scan_bounds(params: &TrajectoryParams) -> TrajectoryBounds {
    let (lo, hi) = match params.family {
        TrajectoryFamily::Sine => (0.0, 1.0),
        TrajectoryFamily::SmoothedStart => (-1.0, 4.0),
    };
    let n = BOUNDS_GRID;
    let pos = |t: f64| eval_jet(params, t).value;
    let speed = |t: f64| eval_jet(params, t).d1.abs();
    let mut a_min = f64::INFINITY;
    let mut a_max = f64::NEG_INFINITY;
    let mut max_speed: f64 = 0.0;
    for i in 0..=n {
        let t = lo + (hi - lo) * i as f64 / n as f64;
        a_min = a_min.min(pos(t));
        a_max = a_max.max(pos(t));
        max_speed = max_speed.max(speed(t));
    }
    a_min = a_min.min(refine_extrema(&pos, lo, hi, n, false)) - BOUNDS_PAD;
    a_max = a_max.max(refine_extrema(&pos, lo, hi, n, true)) + BOUNDS_PAD;
    max_speed = max_speed.max(refine_extrema(&speed, lo, hi, n, true)) + BOUNDS_PAD;
    TrajectoryBounds {
        a_min,
        a_max,
        max_speed,
    }
}

/// Scans f on a grid and polishes each local extremum by golden-section
/// search; returns the best value found (max if `maximize`, else min).
fn refine_extrema(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, n: usize, maximize: bool) -> f64 {
    let step = (hi - lo) / n as f64;
    let value = |t: f64| if maximize { f(t) } else { -f(t) };
    let mut best = f64::NEG_INFINITY;
    let mut prev = value(lo);
    let mut cur = value(lo + step);
    for i in 1..n {
        let next = value(lo + (i + 1) as f64 * step);
        if cur >= prev && cur >= next {
            let x = golden_max(&value, lo + (i - 1) as f64 * step, lo + (i + 1) as f64 * step);
            best = best.max(value(x));
        }
        prev = cur;
        cur = next;
    }
    best = best.max(value(lo)).max(value(hi));
    if maximize {
        best
    } else {
        -best
    }
}

fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = 0.618_033_988_749_894_9;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > BOUNDS_TOL {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
