//! Element quadrature rules and a scalar adaptive Simpson integrator.

use crate::error::{Error, Result};

/// A rule on the reference element: barycentric basis values at each point
/// and the weights as fractions of the element measure.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceRule {
    pub basis: &'static [[f64; 3]],
    pub weights: &'static [f64],
}

const G: f64 = 0.211_324_865_405_187_1; // (1 - 1/√3) / 2

/// Two-point Gauss–Legendre on a segment, exact for cubics.
pub const GAUSS_SEGMENT_2: ReferenceRule = ReferenceRule {
    basis: &[[1.0 - G, G, 0.0], [G, 1.0 - G, 0.0]],
    weights: &[0.5, 0.5],
};

/// Three interior points per triangle, exact for quadratics.
pub const GAUSS_TRIANGLE_3: ReferenceRule = ReferenceRule {
    basis: &[
        [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
        [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
        [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
    ],
    weights: &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
};

/// Adaptive Simpson quadrature of `f` over `[a, b]` (`a > b` integrates backward).
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let value = simpson_step(&f, a, b, fa, fm, fb, whole, tol, max_depth)
        .ok_or(Error::Integration { a, b })?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Integration { a, b })
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Option<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return None;
    }
    if delta.abs() <= 15.0 * tol {
        return Some(left + right + delta / 15.0);
    }
    if depth == 0 {
        return None;
    }
    Some(
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?,
    )
}
