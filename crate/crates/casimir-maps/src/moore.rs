//! Moore's functional equation Σ∘F = Σ + σ and its lazy pullback solution.
//!
//! For a motion that is stationary before t = 0 (the `SmoothedStart` family)
//! the solution is seeded linearly on one advance step of the prehistory,
//! Σ(t) = (σ/α)t on [−α, 0), and extended everywhere by the functional
//! equation itself: a query t is pulled back with F⁻¹ until it lands in the
//! seed, and every pullback adds σ. No grid is ever stored — under phase
//! locking Σ develops a staircase whose steep parts are exponentially
//! narrow, which uniform grids cannot resolve, while the pullback is exact
//! at any point.
//!
//! Derivatives follow from differentiating Σ(Fⁿ(s)) = (σ/α)s + nσ through
//! the chain rule, so Σ', Σ'' and Σ''' inherit the analytic jets of the map.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::circlemap::{
    iterate_jet, rotation_number, AdvanceMap, PeriodicOrbit, Rational, RotationNumberEstimate,
    TimeAdvanceMap, SNAP_TOL,
};
use crate::error::{Error, Result};
use crate::jet::Jet3;
use crate::trajectory::TrajectoryFamily;

/// Default cap on inverse iterations per query. Each pullback retreats by at
/// least 2·min a(t), so this covers queries out to t of order 10^5.
pub const DEFAULT_PULLBACK_LIMIT: usize = 1_000_000;

/// Iteration budget used when the rotation number must be computed here.
const ROTATION_ITERS: usize = 20_000;

/// Lazy solution of Σ∘F = Σ + σ with derivatives to order three.
#[derive(Debug, Clone)]
pub struct SigmaSolution {
    map: TimeAdvanceMap,
    sigma: f64,
    locked: Option<Rational>,
    /// Start of the linear seed interval [seed_start, seed_start + α); always
    /// inside the stationary prehistory.
    seed_start: f64,
    seed_slope: f64,
    pullback_limit: usize,
}

impl SigmaSolution {
    /// Builds the solution, measuring the rotation number σ of the map first
    /// (snapped to p/q when the map is locked).
    pub fn build(map: TimeAdvanceMap) -> Result<Self> {
        let rotation = rotation_number(&map, 0.0, ROTATION_ITERS, SNAP_TOL)?;
        Self::with_rotation(map, &rotation)
    }

    /// Builds the solution from an already-computed rotation number.
    pub fn with_rotation(map: TimeAdvanceMap, rotation: &RotationNumberEstimate) -> Result<Self> {
        Self::with_seed_start(map, rotation, None)
    }

    /// Full constructor: `seed_t_bar` places the seed interval
    /// [t̄, t̄ + α) anywhere in the stationary prehistory (t̄ + α ≤ 0);
    /// the default is t̄ = −α, which fixes Σ(0) = 0.
    pub fn with_seed_start(
        map: TimeAdvanceMap,
        rotation: &RotationNumberEstimate,
        seed_t_bar: Option<f64>,
    ) -> Result<Self> {
        if map.trajectory().family() != TrajectoryFamily::SmoothedStart {
            return Err(Error::ConstraintViolation(
                "Moore-equation seeding needs a stationary prehistory (smoothed_start family)"
                    .into(),
            ));
        }
        let alpha = map.trajectory().alpha();
        let seed_start = seed_t_bar.unwrap_or(-alpha);
        if seed_start + alpha > 0.0 {
            return Err(Error::ConstraintViolation(format!(
                "seed interval [{}, {}) must lie in the prehistory t <= 0",
                seed_start,
                seed_start + alpha
            )));
        }
        let sigma = rotation.value;
        Ok(SigmaSolution {
            map,
            sigma,
            locked: rotation.locked,
            seed_start,
            seed_slope: sigma / alpha,
            pullback_limit: DEFAULT_PULLBACK_LIMIT,
        })
    }

    pub fn pullback_limit(mut self, limit: usize) -> Self {
        self.pullback_limit = limit;
        self
    }

    pub fn map(&self) -> &TimeAdvanceMap {
        &self.map
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// The exact rational σ = p/q when the map is phase locked.
    pub fn locked(&self) -> Option<Rational> {
        self.locked
    }

    pub fn seed_interval(&self) -> (f64, f64) {
        let alpha = self.map.trajectory().alpha();
        (self.seed_start, self.seed_start + alpha)
    }

    /// Pulls t back into the seed interval, returning the preimage and the
    /// number of inverse steps.
    pub fn pullback(&self, t: f64) -> Result<(f64, usize)> {
        if t < self.seed_start {
            return Err(Error::ConstraintViolation(format!(
                "sigma evaluation at t = {t} below the seed interval"
            )));
        }
        let (_, seed_end) = self.seed_interval();
        let mut s = t;
        let mut n = 0usize;
        while s >= seed_end {
            if n >= self.pullback_limit {
                return Err(Error::PullbackOverflow {
                    t,
                    limit: self.pullback_limit,
                });
            }
            s = self.map.inverse_advance(s)?;
            n += 1;
        }
        // in the prehistory the advance step is exactly α, so a preimage can
        // undershoot the seed start only by roundoff
        Ok((s.max(self.seed_start), n))
    }

    /// Σ(t).
    pub fn value(&self, t: f64) -> Result<f64> {
        let (s, n) = self.pullback(t)?;
        Ok(self.seed_slope * s + n as f64 * self.sigma)
    }

    /// Σ(t) and its first three derivatives.
    ///
    /// Differentiating Σ(Fⁿ(s)) = (σ/α)s + nσ with respect to the seed
    /// preimage s gives Σ' = (σ/α)/(Fⁿ)' and, iterating the chain rule,
    /// the second and third derivatives through the jet of Fⁿ at s.
    pub fn jet(&self, t: f64) -> Result<Jet3> {
        let (s, n) = self.pullback(t)?;
        let g = iterate_jet(&self.map, s, n)?;
        let value = self.seed_slope * s + n as f64 * self.sigma;
        let d1 = self.seed_slope / g.d1;
        let d2 = -d1 * g.d2 / (g.d1 * g.d1);
        let d3 = -(3.0 * d2 * g.d1 * g.d2 + d1 * g.d3) / g.d1.powi(3);
        Ok(Jet3::new(value, d1, d2, d3))
    }

    /// Σ, Σ', Σ'' or Σ''' at t.
    pub fn eval(&self, t: f64, order: usize) -> Result<f64> {
        if order == 0 {
            return self.value(t);
        }
        let jet = self.jet(t)?;
        Ok(match order {
            1 => jet.d1,
            2 => jet.d2,
            3 => jet.d3,
            _ => panic!("sigma derivative order must be 0..=3"),
        })
    }

    /// Rescaled snapshot Σ_n(t) = Σ(t + np) − np sampled on one period
    /// [t₁, t₁ + p) anchored at the supplied periodic orbit (conventionally
    /// the repelling one, whose endpoint is fixed by Σ(t₁ + np) = Σ(t₁) + np).
    ///
    /// The anchor phase is lifted beyond the switch-on transient
    /// (t₁ = orbit phase + 3): the switched-on map has no exact periodic
    /// point inside the transient, while past it the motion is periodic to
    /// machine precision and the endpoint identity holds exactly.
    pub fn snapshot(&self, n: usize, n_grid: usize, orbit: &PeriodicOrbit) -> Result<SigmaSnapshot> {
        let base = orbit.points[0] + SNAPSHOT_BASE_LIFT;
        let p = orbit.p as f64;
        let shift = n as f64 * p;
        let grid: Vec<f64> = (0..n_grid)
            .map(|i| base + p * i as f64 / n_grid as f64)
            .collect();
        let values = grid
            .par_iter()
            .map(|&t| self.value(t + shift).map(|v| v - shift))
            .collect::<Result<Vec<f64>>>()?;
        Ok(SigmaSnapshot {
            n,
            base,
            p: orbit.p,
            grid,
            values,
        })
    }

    /// Mode function A_k(t,x) = e^{−2πik Σ(t−x)/σ} − e^{−2πik Σ(t+x)/σ},
    /// k = 1, 2, 3, ...; vanishes on both mirrors by the functional equation.
    pub fn mode_function(&self, k: u32, t: f64, x: f64) -> Result<Complex64> {
        if k == 0 {
            return Err(Error::ConstraintViolation(
                "mode index k must be >= 1".into(),
            ));
        }
        if !(0.0..=self.map.trajectory().position(t)).contains(&x) {
            return Err(Error::DomainError { t, x });
        }
        let phase = |s: f64| -> Result<Complex64> {
            let arg = -2.0 * std::f64::consts::PI * k as f64 * self.value(s)? / self.sigma;
            Ok(Complex64::new(0.0, arg).exp())
        };
        Ok(phase(t - x)? - phase(t + x)?)
    }
}

/// One rescaled Σ_n profile over a locked period.
#[derive(Debug, Clone)]
pub struct SigmaSnapshot {
    pub n: usize,
    /// Left end t₁ of the sampling interval [t₁, t₁ + p).
    pub base: f64,
    pub p: i64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circlemap::find_periodic_orbit;
    use crate::numdiff;
    use crate::trajectory::MirrorTrajectory;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fig_sigma() -> SigmaSolution {
        let map =
            TimeAdvanceMap::new(MirrorTrajectory::smoothed_start(0.34, 0.2, 0.3).unwrap()).unwrap();
        SigmaSolution::build(map).unwrap()
    }

    fn static_sigma(alpha: f64) -> SigmaSolution {
        let map = TimeAdvanceMap::new(MirrorTrajectory::smoothed_start(alpha, 0.0, 0.0).unwrap())
            .unwrap();
        SigmaSolution::build(map).unwrap()
    }

    #[test]
    fn sigma_is_locked_to_one_third_at_figure_parameters() {
        let s = fig_sigma();
        assert_eq!(s.sigma(), 1.0 / 3.0);
        assert_eq!(s.locked(), Some(Rational { num: 1, den: 3 }));
    }

    #[test]
    fn seed_interval_is_linear_with_zero_pullbacks() {
        let s = fig_sigma();
        for &t in &[-0.34, -0.2, -0.01] {
            let (preimage, n) = s.pullback(t).unwrap();
            assert_eq!(n, 0);
            assert_eq!(preimage, t);
            assert!((s.value(t).unwrap() - s.sigma() / 0.34 * t).abs() < 1e-15);
            let jet = s.jet(t).unwrap();
            assert_eq!(jet.d1, s.sigma() / 0.34);
            assert_eq!((jet.d2, jet.d3), (0.0, 0.0));
        }
    }

    #[test]
    fn static_mirror_solution_is_globally_linear() {
        let s = static_sigma(0.4);
        let slope = s.sigma() / 0.4;
        for &t in &[-0.3, 0.0, 1.7, 9.47] {
            assert!((s.value(t).unwrap() - slope * t).abs() < 1e-11);
        }
    }

    #[test]
    fn functional_equation_residual_is_tiny() {
        let s = fig_sigma();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let t: f64 = rng.gen_range(0.0..30.0);
            let lhs = s.value(s.map().advance(t).unwrap()).unwrap();
            let rhs = s.value(t).unwrap() + s.sigma();
            worst = worst.max((lhs - rhs).abs());
        }
        assert!(worst < 1e-10, "worst residual {worst:e}");
    }

    #[test]
    fn sigma_is_strictly_increasing() {
        let s = fig_sigma();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..1000 {
            let t: f64 = rng.gen_range(-0.3..20.0);
            assert!(s.jet(t).unwrap().d1 > 0.0);
        }
        for _ in 0..200 {
            let t1: f64 = rng.gen_range(-0.3..20.0);
            let t2: f64 = rng.gen_range(-0.3..20.0);
            let (t1, t2) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            if t2 - t1 > 1e-12 {
                assert!(s.value(t2).unwrap() > s.value(t1).unwrap());
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let s = fig_sigma();
        for &t in &[0.21, 1.47, 3.9] {
            let jet = s.jet(t).unwrap();
            let d1 = numdiff::central_d1(|u| s.value(u).unwrap(), t, 1e-3);
            let d2 = numdiff::central_d1(|u| s.jet(u).unwrap().d1, t, 1e-3);
            let d3 = numdiff::central_d1(|u| s.jet(u).unwrap().d2, t, 1e-3);
            assert!((jet.d1 - d1).abs() / jet.d1.abs().max(1.0) < 1e-6);
            assert!((jet.d2 - d2).abs() / jet.d2.abs().max(1.0) < 1e-6);
            assert!((jet.d3 - d3).abs() / jet.d3.abs().max(1.0) < 1e-6);
        }
    }

    #[test]
    fn seed_position_does_not_change_the_solution() {
        let map =
            TimeAdvanceMap::new(MirrorTrajectory::smoothed_start(0.34, 0.2, 0.3).unwrap()).unwrap();
        let rotation = rotation_number(&map, 0.0, 20_000, SNAP_TOL).unwrap();
        let near = SigmaSolution::with_seed_start(map.clone(), &rotation, None).unwrap();
        let far = SigmaSolution::with_seed_start(map, &rotation, Some(-0.68)).unwrap();
        for &t in &[-0.1, 0.33, 2.6, 7.1] {
            let (a, b) = (near.value(t).unwrap(), far.value(t).unwrap());
            assert!((a - b).abs() < 1e-11, "t = {t}: {a} vs {b}");
        }
    }

    #[test]
    fn solution_is_c3_across_the_switch_on() {
        let s = fig_sigma();
        // one-sided stencils touching only t < 0 resp. t > 0
        let h = 1e-3;
        for order in 1..=3usize {
            let left = numdiff::central(order, |u| s.value(u - 5.0 * h).unwrap(), 0.0, h);
            let right = numdiff::central(order, |u| s.value(u + 5.0 * h).unwrap(), 0.0, h);
            assert!(
                (left - right).abs() / left.abs().max(1.0) < 1e-6,
                "order {order}: {left} vs {right}"
            );
        }
    }

    #[test]
    fn snapshot_endpoint_identity_holds() {
        let s = fig_sigma();
        let orbit = find_periodic_orbit(&s.map().periodic_companion().unwrap(), 1, 3)
            .unwrap()
            .repelling
            .unwrap();
        for n in [1usize, 5, 9] {
            let base = orbit.points[0];
            let np = n as f64;
            let lhs = s.value(base + np).unwrap();
            let rhs = s.value(base).unwrap() + np;
            assert!((lhs - rhs).abs() < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn snapshots_develop_q_steep_parts_at_attracting_times() {
        let s = fig_sigma();
        let companion = s.map().periodic_companion().unwrap();
        let search = find_periodic_orbit(&companion, 1, 3).unwrap();
        let attracting = search.attracting.unwrap();
        let repelling = search.repelling.unwrap();
        // slope at the attracting times grows like the cumulative Doppler
        // factor; at the repelling times it collapses
        let dq = attracting.cumulative_doppler;
        for n in [9usize, 13] {
            for &ta in &attracting.points {
                let here = s.jet(ta + n as f64).unwrap().d1;
                let there = s.jet(ta + (n + 3) as f64).unwrap().d1;
                let ratio = there / here;
                assert!(
                    (ratio / dq.powi(3) - 1.0).abs() < 0.1,
                    "slope growth ratio {ratio} vs Dq^3 {}",
                    dq.powi(3)
                );
            }
        }
        let steep = s.jet(attracting.points[0] + 9.0).unwrap().d1;
        let flat = s.jet(repelling.points[0] + 9.0).unwrap().d1;
        assert!(steep / flat > 1e2, "steep {steep}, flat {flat}");
    }

    #[test]
    fn snapshot_samples_one_period() {
        let s = fig_sigma();
        let orbit = find_periodic_orbit(&s.map().periodic_companion().unwrap(), 1, 3)
            .unwrap()
            .repelling
            .unwrap();
        let snap = s.snapshot(5, 64, &orbit).unwrap();
        assert_eq!(snap.grid.len(), 64);
        let lo = s.value(orbit.points[0]).unwrap();
        for &v in &snap.values {
            assert!(v >= lo - 1e-9 && v < lo + 1.0 + 1e-9);
        }
    }

    #[test]
    fn mode_function_vanishes_on_both_mirrors() {
        let s = fig_sigma();
        for &t in &[0.5, 2.25, 6.0] {
            let at_left = s.mode_function(1, t, 0.0).unwrap();
            assert_eq!(at_left.norm(), 0.0);
            let a = s.map().trajectory().position(t);
            let at_right = s.mode_function(2, t, a).unwrap();
            assert!(at_right.norm() < 1e-9, "k=2 at mirror: {}", at_right.norm());
        }
    }

    #[test]
    fn static_mode_function_is_a_standing_wave() {
        let s = static_sigma(0.34);
        // linear Σ gives A_k = e^{−2πikt/α} 2i sin(2πkx/α)
        let t = 1.3;
        let x = 0.085; // α/4
        let a1 = s.mode_function(1, t, x).unwrap();
        assert!((a1.norm() - 2.0).abs() < 1e-10);
        let a2 = s.mode_function(2, t, x).unwrap();
        assert!(a2.norm() < 1e-10);
    }

    #[test]
    fn mode_function_outside_cavity_is_domain_error() {
        let s = fig_sigma();
        assert!(matches!(
            s.mode_function(1, 1.0, 0.9),
            Err(Error::DomainError { .. })
        ));
    }

    #[test]
    fn pullback_budget_is_enforced() {
        let map =
            TimeAdvanceMap::new(MirrorTrajectory::smoothed_start(0.34, 0.2, 0.3).unwrap()).unwrap();
        let rotation = rotation_number(&map, 0.0, 20_000, SNAP_TOL).unwrap();
        let s = SigmaSolution::with_rotation(map, &rotation)
            .unwrap()
            .pullback_limit(10);
        assert!(matches!(s.value(20.0), Err(Error::PullbackOverflow { .. })));
    }

    #[test]
    fn sine_family_is_rejected() {
        let map = TimeAdvanceMap::new(MirrorTrajectory::sine(0.34, 0.2, 0.3).unwrap()).unwrap();
        assert!(SigmaSolution::build(map).is_err());
    }
}
