//! Guarded scalar root finding: Newton iteration inside a maintained bracket,
//! falling back to bisection whenever a Newton step leaves the bracket or
//! stalls. Globally convergent for continuous `f` with a sign change.

use crate::error::{Error, Result};

pub struct SolveOptions {
    /// Absolute tolerance on the residual |f(x)|.
    pub tol: f64,
    pub max_iters: usize,
    /// Label used in convergence-failure reports.
    pub context: &'static str,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-13,
            max_iters: 100,
            context: "root solve",
        }
    }
}

/// Finds the root of `f` in `[lo, hi]` given `f_and_deriv` returning
/// `(f(x), f'(x))`. The bracket must satisfy `f(lo) <= 0 <= f(hi)` or the
/// reverse; it is kept valid throughout, so every Newton step that escapes it
/// is replaced by a bisection step.
pub fn newton_bisection<F>(
    mut f_and_deriv: F,
    lo: f64,
    hi: f64,
    options: &SolveOptions,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let (mut lo, mut hi) = (lo, hi);
    let (flo, _) = f_and_deriv(lo)?;
    let (fhi, _) = f_and_deriv(hi)?;
    if flo.abs() <= options.tol {
        return Ok(lo);
    }
    if fhi.abs() <= options.tol {
        return Ok(hi);
    }
    if flo * fhi > 0.0 {
        return Err(Error::ConvergenceFailure {
            context: options.context,
            residual: flo.abs().min(fhi.abs()),
        });
    }
    let increasing = flo < 0.0;

    let mut x = 0.5 * (lo + hi);
    let mut best = f64::INFINITY;
    for _ in 0..options.max_iters {
        let (fx, dfx) = f_and_deriv(x)?;
        if fx.abs() <= options.tol {
            return Ok(x);
        }
        best = best.min(fx.abs());

        // shrink the bracket around the root
        if (fx < 0.0) == increasing {
            lo = x;
        } else {
            hi = x;
        }

        let newton = x - fx / dfx;
        x = if dfx != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * x.abs().max(1.0) {
            return Ok(x);
        }
    }
    Err(Error::ConvergenceFailure {
        context: options.context,
        residual: best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_simple_root() {
        let f = |x: f64| Ok((x * x - 2.0, 2.0 * x));
        let r = newton_bisection(f, 0.0, 2.0, &SolveOptions::default()).unwrap();
        assert!((r - 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn survives_bad_newton_steps() {
        // derivative vanishes at the midpoint starting guess
        let f = |x: f64| Ok((x.powi(3) - 0.25, 3.0 * x * x));
        let r = newton_bisection(f, -1.0, 1.0, &SolveOptions::default()).unwrap();
        assert!((r - 0.25_f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bracket_without_sign_change() {
        let f = |x: f64| Ok((x * x + 1.0, 2.0 * x));
        assert!(newton_bisection(f, -1.0, 1.0, &SolveOptions::default()).is_err());
    }
}
