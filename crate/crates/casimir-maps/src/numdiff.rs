//! High-order central finite differences.
//!
//! These are test oracles: every analytic derivative in the crate is checked
//! against them, and they must never be used on the implementation side of
//! those checks.

/// 8th-order central estimate of f'(x).
pub fn central_d1<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let fd = |k: f64| f(x + k * h) - f(x - k * h);
    (0.8 * fd(1.0) - 0.2 * fd(2.0) + (4.0 / 105.0) * fd(3.0) - (1.0 / 280.0) * fd(4.0)) / h
}

/// 8th-order central estimate of f''(x).
pub fn central_d2<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let fs = |k: f64| f(x + k * h) + f(x - k * h);
    ((-205.0 / 72.0) * f(x) + 1.6 * fs(1.0) - 0.2 * fs(2.0) + (8.0 / 315.0) * fs(3.0)
        - (1.0 / 560.0) * fs(4.0))
        / (h * h)
}

/// 6th-order central estimate of f'''(x).
pub fn central_d3<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let fd = |k: f64| f(x + k * h) - f(x - k * h);
    (-(61.0 / 30.0) * fd(1.0) + (169.0 / 120.0) * fd(2.0) - 0.3 * fd(3.0)
        + (7.0 / 240.0) * fd(4.0))
        / (h * h * h)
}

/// Central estimate of the k-th derivative, k = 1..3.
pub fn central(order: usize, f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    match order {
        1 => central_d1(f, x, h),
        2 => central_d2(f, x, h),
        3 => central_d3(f, x, h),
        _ => panic!("finite-difference order must be 1, 2 or 3"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_are_exact_enough_on_sin() {
        let f = |x: f64| (2.3 * x).sin();
        let x = 0.37_f64;
        let d1 = 2.3 * (2.3 * x).cos();
        let d2 = -2.3f64.powi(2) * (2.3 * x).sin();
        let d3 = -2.3f64.powi(3) * (2.3 * x).cos();
        assert!((central_d1(f, x, 1e-2) - d1).abs() < 1e-12);
        assert!((central_d2(f, x, 1e-2) - d2).abs() < 1e-10);
        assert!((central_d3(f, x, 1e-2) - d3).abs() < 1e-9);
    }

    #[test]
    fn stencils_kill_low_degree_polynomials() {
        // degree-7 polynomial: d1 and d2 stencils are exact, d3 is exact to 6th order
        let f = |x: f64| x.powi(7) - 3.0 * x.powi(4) + x;
        let x = 1.1_f64;
        let d1 = 7.0 * x.powi(6) - 12.0 * x.powi(3) + 1.0;
        let d2 = 42.0 * x.powi(5) - 36.0 * x * x;
        let d3 = 210.0 * x.powi(4) - 72.0 * x;
        assert!((central_d1(f, x, 1e-2) - d1).abs() / d1.abs() < 1e-12);
        assert!((central_d2(f, x, 1e-2) - d2).abs() / d2.abs() < 1e-10);
        assert!((central_d3(f, x, 2e-2) - d3).abs() / d3.abs() < 1e-9);
    }
}
