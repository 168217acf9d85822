//! The time-advance map of the bouncing light ray and its circle-map
//! dynamics.
//!
//! A characteristic reflected off the stationary mirror at time t hits the
//! moving mirror at Θ(t), where Θ = (Id − a)⁻¹, and returns to the stationary
//! mirror at
//!
//! ```text
//! F = (Id + a) ∘ (Id − a)⁻¹.
//! ```
//!
//! For 1-periodic motion with a < 1/2 the lift property F(t+1) = F(t) + 1
//! holds and F projects to a smooth invertible circle map. Everything about
//! the long-time field follows from the iterates of F: the rotation number
//! classifies resonances, attracting periodic orbits seed wave packets, and
//! F'(t) = 1/D(Θ(t)) ties the map derivative to the Doppler factor at the
//! moving-mirror reflection.

use crate::error::{Error, Result};
use crate::jet::Jet3;
use crate::solve::{newton_bisection, SolveOptions};
use crate::trajectory::MirrorTrajectory;

/// Largest orbit period probed by the rational-locking machinery. Tongues
/// shrink fast with q; beyond this, double precision cannot resolve locking.
pub const Q_MAX: i64 = 64;

/// Width of the parabolic band in the multiplier classification.
pub const STABILITY_TOL: f64 = 1e-6;

/// Residual threshold for snapping a rotation-number estimate to p/q.
pub const SNAP_TOL: f64 = 1e-9;

/// A lift of an orientation-preserving circle map: strictly increasing, with
/// F(t) - t bounded in (0, 1).
pub trait AdvanceMap: Sync {
    /// F(t).
    fn advance(&self, t: f64) -> Result<f64>;

    /// F⁻¹(t).
    fn inverse_advance(&self, t: f64) -> Result<f64>;

    /// F(t) with derivatives up to order three.
    fn advance_jet(&self, t: f64) -> Result<Jet3>;

    /// F', F'' or F''' at t.
    fn derivative(&self, t: f64, order: usize) -> Result<f64> {
        let jet = self.advance_jet(t)?;
        Ok(match order {
            1 => jet.d1,
            2 => jet.d2,
            3 => jet.d3,
            _ => panic!("map derivative order must be 1, 2 or 3"),
        })
    }

    /// Schwarzian derivative S_F(t) = F'''/F' - (3/2)(F''/F')².
    fn schwarzian(&self, t: f64) -> Result<f64> {
        Ok(self.advance_jet(t)?.schwarzian())
    }
}

/// The time-advance map F built from a mirror trajectory.
///
/// Immutable and cheap to clone; all queries are pure, so one map can be
/// shared across parallel sweeps.
#[derive(Debug, Clone)]
pub struct TimeAdvanceMap {
    traj: MirrorTrajectory,
    newton_tol: f64,
    max_newton_iters: usize,
    bracket_pad: f64,
}

impl TimeAdvanceMap {
    /// Wraps a trajectory, rejecting cavities that are too long for the
    /// circle-map construction (a(t) must stay below 1/2) or that fail the
    /// physical constraints.
    pub fn new(traj: MirrorTrajectory) -> Result<Self> {
        let b = *traj.bounds();
        if b.a_min <= 0.0 {
            return Err(Error::ConstraintViolation(format!(
                "a(t) > 0 violated (min a = {})",
                b.a_min
            )));
        }
        if b.max_speed >= 1.0 {
            return Err(Error::ConstraintViolation(format!(
                "|a'(t)| < 1 violated (max |a'| = {})",
                b.max_speed
            )));
        }
        if b.a_max >= 0.5 {
            return Err(Error::ConstraintViolation(format!(
                "a(t) < 1/2 violated (max a = {}); the advance map would not project to a circle map",
                b.a_max
            )));
        }
        Ok(TimeAdvanceMap {
            traj,
            newton_tol: 1e-13,
            max_newton_iters: 100,
            bracket_pad: 1e-6,
        })
    }

    pub fn trajectory(&self) -> &MirrorTrajectory {
        &self.traj
    }

    pub fn newton_tol(&self) -> f64 {
        self.newton_tol
    }

    /// The same map for the 1-periodic (`Sine`) version of the trajectory.
    /// Orbit searches on a switched-on motion run here: the two maps agree to
    /// machine precision for t beyond the switch-on transient.
    pub fn periodic_companion(&self) -> Result<TimeAdvanceMap> {
        let p = *self.traj.params();
        TimeAdvanceMap::new(MirrorTrajectory::sine(p.alpha, p.beta, p.gamma)?)
    }

    /// Θ(t) = (Id − a)⁻¹(t): the moving-mirror reflection following a
    /// stationary-mirror reflection at t. Solved by guarded Newton; |a'| < 1
    /// makes the residual derivative positive, so the solve cannot fail.
    pub fn theta(&self, t: f64) -> Result<f64> {
        let b = self.traj.bounds();
        let tol = self.newton_tol * (1.0 + t.abs());
        newton_bisection(
            |u| {
                let a = self.traj.eval(u);
                Ok((u - a.value - t, 1.0 - a.d1))
            },
            t + b.a_min - self.bracket_pad,
            t + b.a_max + self.bracket_pad,
            &SolveOptions {
                tol,
                max_iters: self.max_newton_iters,
                context: "theta",
            },
        )
    }

    /// (Id + a)⁻¹(t): the moving-mirror reflection preceding a
    /// stationary-mirror reflection at t.
    pub fn theta_prev(&self, t: f64) -> Result<f64> {
        let b = self.traj.bounds();
        let tol = self.newton_tol * (1.0 + t.abs());
        newton_bisection(
            |u| {
                let a = self.traj.eval(u);
                Ok((u + a.value - t, 1.0 + a.d1))
            },
            t - b.a_max - self.bracket_pad,
            t - b.a_min + self.bracket_pad,
            &SolveOptions {
                tol,
                max_iters: self.max_newton_iters,
                context: "theta_prev",
            },
        )
    }

    /// Jet of Θ at t, from Θ' = 1/(1 − a'∘Θ) and its exact derivatives.
    pub fn theta_jet(&self, t: f64) -> Result<Jet3> {
        let u = self.theta(t)?;
        let a = self.traj.eval(u);
        let w = 1.0 - a.d1;
        Ok(Jet3::new(
            u,
            1.0 / w,
            a.d2 / w.powi(3),
            (a.d3 * w + 3.0 * a.d2 * a.d2) / w.powi(5),
        ))
    }
}

impl AdvanceMap for TimeAdvanceMap {
    fn advance(&self, t: f64) -> Result<f64> {
        let u = self.theta(t)?;
        Ok(u + self.traj.position(u))
    }

    fn inverse_advance(&self, t: f64) -> Result<f64> {
        let u = self.theta_prev(t)?;
        Ok(u - self.traj.position(u))
    }

    fn advance_jet(&self, t: f64) -> Result<Jet3> {
        let theta = self.theta_jet(t)?;
        let a = self.traj.eval(theta.value);
        let id_plus_a = Jet3::new(theta.value + a.value, 1.0 + a.d1, a.d2, a.d3);
        Ok(id_plus_a.compose(&theta))
    }
}

/// Rigid rotation lift R_σ(t) = t + σ; the simplest circle map and the test
/// fixture every estimator is calibrated against.
#[derive(Debug, Clone, Copy)]
pub struct RigidRotation {
    pub sigma: f64,
}

impl RigidRotation {
    pub fn new(sigma: f64) -> Self {
        RigidRotation { sigma }
    }
}

impl AdvanceMap for RigidRotation {
    fn advance(&self, t: f64) -> Result<f64> {
        Ok(t + self.sigma)
    }

    fn inverse_advance(&self, t: f64) -> Result<f64> {
        Ok(t - self.sigma)
    }

    fn advance_jet(&self, t: f64) -> Result<Jet3> {
        Ok(Jet3::new(t + self.sigma, 1.0, 0.0, 0.0))
    }
}

/// Forward orbit F(t), ..., Fⁿ(t) with the chain-rule products (Fᵏ)'(t).
#[derive(Debug, Clone)]
pub struct OrbitSample {
    pub start: f64,
    /// F(t), F²(t), ..., Fⁿ(t).
    pub times: Vec<f64>,
    /// (F¹)'(t), (F²)'(t), ..., (Fⁿ)'(t).
    pub derivative_products: Vec<f64>,
}

impl OrbitSample {
    /// (Fⁿ)'(t); 1 for the empty orbit.
    pub fn total_derivative(&self) -> f64 {
        self.derivative_products.last().copied().unwrap_or(1.0)
    }
}

/// Iterates the map n times, accumulating derivative products.
pub fn iterate<M: AdvanceMap + ?Sized>(map: &M, t: f64, n: usize) -> Result<OrbitSample> {
    let mut times = Vec::with_capacity(n);
    let mut derivative_products = Vec::with_capacity(n);
    let mut x = t;
    let mut product = 1.0;
    for _ in 0..n {
        let jet = map.advance_jet(x)?;
        product *= jet.d1;
        x = jet.value;
        times.push(x);
        derivative_products.push(product);
    }
    Ok(OrbitSample {
        start: t,
        times,
        derivative_products,
    })
}

/// Jet of Fⁿ at t by chain-rule composition along the orbit.
pub fn iterate_jet<M: AdvanceMap + ?Sized>(map: &M, t: f64, n: usize) -> Result<Jet3> {
    let mut jet = Jet3::identity(t);
    for _ in 0..n {
        jet = map.advance_jet(jet.value)?.compose(&jet);
    }
    Ok(jet)
}

/// S_{Fⁿ}(t) assembled by the cocycle sum
/// Σₖ S_F(Fᵏ(t)) [(Fᵏ)'(t)]², k = 0..n-1.
pub fn iterated_schwarzian<M: AdvanceMap + ?Sized>(map: &M, t: f64, n: usize) -> Result<f64> {
    let mut sum = 0.0;
    let mut x = t;
    let mut product = 1.0;
    for _ in 0..n {
        let jet = map.advance_jet(x)?;
        sum += jet.schwarzian() * product * product;
        product *= jet.d1;
        x = jet.value;
    }
    Ok(sum)
}

/// A rational rotation number p/q in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Rotation-number estimate from orbit averaging.
///
/// `(Fⁿ(t) - t - nτ)` is uniformly bounded by 1 for circle-map lifts, so the
/// plain average carries the a-priori bound 1/n. When the orbit is detected
/// to converge onto a periodic cycle the estimate is snapped to the exact
/// rational and `error_bound` becomes the periodicity residual at a polished
/// orbit point.
#[derive(Debug, Clone)]
pub struct RotationNumberEstimate {
    pub value: f64,
    pub n_iters: usize,
    pub error_bound: f64,
    pub start_point: f64,
    pub locked: Option<Rational>,
}

/// How often the averaging loop pauses to try a rational snap.
const SNAP_CHECK_EVERY: usize = 64;

/// Estimates τ(F) = lim (Fⁿ(t₀) - t₀)/n.
pub fn rotation_number<M: AdvanceMap + ?Sized>(
    map: &M,
    t0: f64,
    n_max: usize,
    snap_tol: f64,
) -> Result<RotationNumberEstimate> {
    assert!(n_max >= 100, "rotation number needs at least 100 iterates");
    let mut t = t0;
    for n in 1..=n_max {
        t = map.advance(t)?;
        if n % SNAP_CHECK_EVERY == 0 || n == n_max {
            let estimate = (t - t0) / n as f64;
            for r in convergents(estimate, Q_MAX) {
                if r.num < 0 || r.num >= r.den {
                    continue;
                }
                if let Some((_, residual)) = polish_periodic_point(map, t, r, snap_tol)? {
                    return Ok(RotationNumberEstimate {
                        value: r.value(),
                        n_iters: n,
                        error_bound: residual,
                        start_point: t0,
                        locked: Some(r),
                    });
                }
            }
        }
    }
    Ok(RotationNumberEstimate {
        value: (t - t0) / n_max as f64,
        n_iters: n_max,
        error_bound: 1.0 / n_max as f64,
        start_point: t0,
        locked: None,
    })
}

/// Continued-fraction convergents p/q of x with q <= q_max.
fn convergents(x: f64, q_max: i64) -> Vec<Rational> {
    let mut out = Vec::new();
    let (mut h0, mut h1) = (1i64, x.floor() as i64);
    let (mut k0, mut k1) = (0i64, 1i64);
    let mut frac = x - x.floor();
    out.push(Rational { num: h1, den: k1 });
    for _ in 0..32 {
        if frac.abs() < 1e-15 {
            break;
        }
        let inv = 1.0 / frac;
        let a = inv.floor();
        frac = inv - a;
        let a = a as i64;
        let h2 = a.saturating_mul(h1).saturating_add(h0);
        let k2 = a.saturating_mul(k1).saturating_add(k0);
        if k2 > q_max {
            break;
        }
        out.push(Rational { num: h2, den: k2 });
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
    }
    out
}

/// Newton-polishes g(t) = F^q(t) - t - p near `t_near` and accepts the point
/// as q-periodic when the residual beats `snap_tol`.
fn polish_periodic_point<M: AdvanceMap + ?Sized>(
    map: &M,
    t_near: f64,
    r: Rational,
    snap_tol: f64,
) -> Result<Option<(f64, f64)>> {
    let q = r.den as usize;
    let p = r.num as f64;
    let mut x = t_near;
    let mut best = (x, f64::INFINITY);
    for _ in 0..30 {
        let jet = iterate_jet(map, x, q)?;
        let g = jet.value - x - p;
        if g.abs() < best.1 {
            best = (x, g.abs());
        }
        if g.abs() <= snap_tol * 1e-3 {
            break;
        }
        let dg = jet.d1 - 1.0;
        if dg.abs() < 1e-14 {
            break;
        }
        let step = (g / dg).clamp(-0.25, 0.25);
        x -= step;
    }
    Ok(if best.1 <= snap_tol {
        Some(best)
    } else {
        None
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Attracting,
    Repelling,
    Parabolic,
}

/// A q-periodic orbit of the circle map: F^q(t_j) = t_j + p.
#[derive(Debug, Clone)]
pub struct PeriodicOrbit {
    pub p: i64,
    pub q: i64,
    /// The q orbit points in [0, 1), ordered by iteration: points[j+1] is the
    /// circle projection of F(points[j]).
    pub points: Vec<f64>,
    /// (F^q)'(points[0]).
    pub multiplier: f64,
    pub stability: Stability,
    /// Cumulative Doppler factor over one locked cycle, 1/multiplier.
    pub cumulative_doppler: f64,
}

impl PeriodicOrbit {
    fn from_point<M: AdvanceMap + ?Sized>(map: &M, t0: f64, p: i64, q: i64) -> Result<Self> {
        let mut points = Vec::with_capacity(q as usize);
        let mut x = t0.rem_euclid(1.0);
        let start = x;
        for _ in 0..q {
            points.push(x.rem_euclid(1.0));
            x = map.advance(x)?;
        }
        let multiplier = iterate_jet(map, start, q as usize)?.d1;
        let stability = classify(multiplier);
        Ok(PeriodicOrbit {
            p,
            q,
            points,
            multiplier,
            stability,
            cumulative_doppler: 1.0 / multiplier,
        })
    }
}

fn classify(multiplier: f64) -> Stability {
    if (multiplier - 1.0).abs() <= STABILITY_TOL {
        Stability::Parabolic
    } else if multiplier < 1.0 {
        Stability::Attracting
    } else {
        Stability::Repelling
    }
}

/// Outcome of a periodic-orbit search for fixed p/q.
#[derive(Debug, Clone)]
pub struct OrbitSearch {
    pub attracting: Option<PeriodicOrbit>,
    pub repelling: Option<PeriodicOrbit>,
    /// Isolated roots with multiplier within `STABILITY_TOL` of one
    /// (tongue-boundary degeneracies). Reported, never an error.
    pub parabolic: Vec<PeriodicOrbit>,
    /// True when g = F^q - Id - p vanishes on the whole grid (rigid rotation
    /// by p/q: every point is parabolic-periodic).
    pub parabolic_continuum: bool,
}

impl OrbitSearch {
    pub fn found_any(&self) -> bool {
        self.attracting.is_some()
            || self.repelling.is_some()
            || !self.parabolic.is_empty()
            || self.parabolic_continuum
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Locates the q-periodic orbits with F^q = Id + p on [0, 1) by a sign-change
/// scan of g(t) = F^q(t) - t - p followed by guarded-Newton polish, and
/// classifies each root by its multiplier. Meaningful for periodic lifts.
pub fn find_periodic_orbit<M: AdvanceMap + ?Sized>(
    map: &M,
    p: i64,
    q: i64,
) -> Result<OrbitSearch> {
    if q < 1 || gcd(p, q) != 1 {
        return Err(Error::ConstraintViolation(format!(
            "p/q must be in lowest terms with q >= 1 (got {p}/{q})"
        )));
    }
    let n = (64 * q).max(1024) as usize;
    let g = |t: f64| -> Result<(f64, f64)> {
        let jet = iterate_jet(map, t, q as usize)?;
        Ok((jet.value - t - p as f64, jet.d1 - 1.0))
    };

    let mut values = Vec::with_capacity(n + 1);
    for i in 0..=n {
        values.push(g(i as f64 / n as f64)?.0);
    }
    if values.iter().all(|v| v.abs() < 1e-12) {
        let representative = PeriodicOrbit::from_point(map, 0.0, p, q)?;
        return Ok(OrbitSearch {
            attracting: None,
            repelling: None,
            parabolic: vec![representative],
            parabolic_continuum: true,
        });
    }

    let mut attracting = None;
    let mut repelling = None;
    let mut parabolic = Vec::new();
    for i in 0..n {
        let (lo, hi) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
        let (glo, ghi) = (values[i], values[i + 1]);
        if glo == 0.0 || glo * ghi < 0.0 {
            let root = if glo == 0.0 {
                lo
            } else {
                newton_bisection(
                    g,
                    lo,
                    hi,
                    &SolveOptions {
                        tol: 1e-13,
                        max_iters: 100,
                        context: "periodic orbit polish",
                    },
                )?
            };
            let orbit = PeriodicOrbit::from_point(map, root, p, q)?;
            match orbit.stability {
                Stability::Attracting => {
                    if attracting.is_none() {
                        attracting = Some(orbit);
                    }
                }
                Stability::Repelling => {
                    if repelling.is_none() {
                        repelling = Some(orbit);
                    }
                }
                Stability::Parabolic => parabolic.push(orbit),
            }
        }
    }
    Ok(OrbitSearch {
        attracting,
        repelling,
        parabolic,
        parabolic_continuum: false,
    })
}

/// Reconstructs the mirror position from the map alone through
/// a = ½(F − Id) ∘ [½(F + Id)]⁻¹.
pub fn recover_trajectory<M: AdvanceMap + ?Sized>(map: &M, t: f64) -> Result<f64> {
    // ½(F + Id) advances by a ∈ (0, 1/2), so the preimage lies in [t-1/2, t]
    let x = newton_bisection(
        |x| {
            let jet = map.advance_jet(x)?;
            Ok((0.5 * (jet.value + x) - t, 0.5 * (jet.d1 + 1.0)))
        },
        t - 0.5 - 1e-6,
        t + 1e-6,
        &SolveOptions {
            tol: 1e-13 * (1.0 + t.abs()),
            max_iters: 100,
            context: "trajectory recovery",
        },
    )?;
    Ok(0.5 * (map.advance(x)? - x))
}
