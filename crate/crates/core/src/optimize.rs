//! One-dimensional minimisation.

use crate::error::{require, Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a minimum of a unimodal `f` on `[lo, hi]`.
/// Stops when the bracket is narrower than `tol`; returns `(x, f(x))`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    require(lo < hi, "lo", lo, "must be below hi")?;
    require(tol > 0.0, "tol", tol, "must be positive")?;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    // the bracket shrinks by 0.618 per step, so 400 steps cover any f64 range
    for _ in 0..400 {
        if b - a <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)))
}

/// Bracket used for revision intervals, in years.
pub const DT_BRACKET: (f64, f64) = (1e-10, 1.0);

/// Minimise `f(dt)` over [`DT_BRACKET`] by golden section in `ln dt`.
/// A minimiser within a few tolerances of either edge is reported as
/// [`Error::MinimizerAtBoundary`].
pub fn minimize_over_dt<F: FnMut(f64) -> f64>(mut f: F) -> Result<f64> {
    let (lo, hi) = (DT_BRACKET.0.ln(), DT_BRACKET.1.ln());
    let tol = 1e-10;
    let (x, _) = golden_section(|x| f(x.exp()), lo, hi, tol)?;
    if x - lo < 1e3 * tol || hi - x < 1e3 * tol {
        return Err(Error::MinimizerAtBoundary { dt: x.exp() });
    }
    Ok(x.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola() {
        let (x, fx) = golden_section(|x| (x - 0.3).powi(2) + 1.0, -2.0, 5.0, 1e-12).unwrap();
        // comparisons of a flat quadratic resolve x only to about √ε
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-15);
    }

    #[test]
    fn power_law_balance() {
        // a·dt^{-1/2} + b·dt is smallest at (a / 2b)^{2/3}
        let dt = minimize_over_dt(|dt| 1.0 / dt.sqrt() + dt).unwrap();
        assert!((dt / 0.5f64.powf(2.0 / 3.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn edge_minimiser_is_reported() {
        assert!(matches!(
            minimize_over_dt(|dt| dt),
            Err(Error::MinimizerAtBoundary { .. })
        ));
        assert!(matches!(
            minimize_over_dt(|dt| -dt),
            Err(Error::MinimizerAtBoundary { .. })
        ));
    }
}
