//! Third-order jets: a value together with its first three derivatives.
//!
//! Everything downstream of the mirror trajectory (time-advance map,
//! Moore-equation solution, Schwarzian derivatives) needs derivatives up to
//! order three, and the Schwarzian amplifies derivative noise quadratically,
//! so all derivatives in this crate are propagated analytically through
//! chain-rule composition of jets rather than by numerical differentiation.

/// Value and first three derivatives of a scalar function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Jet3 {
    pub const fn new(value: f64, d1: f64, d2: f64, d3: f64) -> Self {
        Jet3 { value, d1, d2, d3 }
    }

    /// Jet of a constant.
    pub const fn constant(value: f64) -> Self {
        Jet3::new(value, 0.0, 0.0, 0.0)
    }

    /// Jet of the identity at `t`.
    pub const fn identity(t: f64) -> Self {
        Jet3::new(t, 1.0, 0.0, 0.0)
    }

    /// Jet of `g ∘ h` at the base point of `h`.
    ///
    /// `self` must be the jet of `g` evaluated at `h.value`. Faà di Bruno up
    /// to order three.
    pub fn compose(&self, h: &Jet3) -> Jet3 {
        let g = self;
        Jet3 {
            value: g.value,
            d1: g.d1 * h.d1,
            d2: g.d2 * h.d1 * h.d1 + g.d1 * h.d2,
            d3: g.d3 * h.d1.powi(3) + 3.0 * g.d2 * h.d1 * h.d2 + g.d1 * h.d3,
        }
    }

    /// Schwarzian derivative `d3/d1 - (3/2)(d2/d1)^2` read off the jet.
    pub fn schwarzian(&self) -> f64 {
        let r = self.d2 / self.d1;
        self.d3 / self.d1 - 1.5 * r * r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic_jet(t: f64) -> Jet3 {
        // g(t) = t^3 + 2t
        Jet3::new(t * t * t + 2.0 * t, 3.0 * t * t + 2.0, 6.0 * t, 6.0)
    }

    fn sin_jet(t: f64) -> Jet3 {
        Jet3::new(t.sin(), t.cos(), -t.sin(), -t.cos())
    }

    #[test]
    fn compose_matches_hand_expansion() {
        let t = 0.7;
        let h = sin_jet(t);
        let g = cubic_jet(h.value);
        let c = g.compose(&h);

        // (g∘h)(t) = sin^3 t + 2 sin t, differentiated by hand
        let (s, co) = (t.sin(), t.cos());
        let d1 = (3.0 * s * s + 2.0) * co;
        let d2 = 6.0 * s * co * co - (3.0 * s * s + 2.0) * s;
        let d3 = 6.0 * co.powi(3) - 12.0 * s * s * co - 6.0 * s * s * co - (3.0 * s * s + 2.0) * co;
        assert!((c.value - (s * s * s + 2.0 * s)).abs() < 1e-14);
        assert!((c.d1 - d1).abs() < 1e-13);
        assert!((c.d2 - d2).abs() < 1e-13);
        assert!((c.d3 - d3).abs() < 1e-13);
    }

    #[test]
    fn schwarzian_of_moebius_vanishes() {
        // m(t) = (2t+1)/(t+3); S_m = 0 identically
        for &t in &[0.3, 1.0, 2.5, 7.0] {
            let d = t + 3.0;
            let m = Jet3::new(
                (2.0 * t + 1.0) / d,
                5.0 / (d * d),
                -10.0 / d.powi(3),
                30.0 / d.powi(4),
            );
            assert!(m.schwarzian().abs() < 1e-10, "S_m = {}", m.schwarzian());
        }
    }

    #[test]
    fn schwarzian_composition_rule() {
        // S_{g∘h}(t) = S_g(h(t)) h'(t)^2 + S_h(t)
        let t = 0.4;
        let h = sin_jet(t);
        let g = cubic_jet(h.value);
        let c = g.compose(&h);
        let rhs = g.schwarzian() * h.d1 * h.d1 + h.schwarzian();
        assert!((c.schwarzian() - rhs).abs() < 1e-12);
    }
}
