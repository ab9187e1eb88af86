use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::quadrature::adaptive_simpson;
use crate::model::{PRIMITIVE_MAX_DEPTH, PRIMITIVE_TOL};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const BRACKET_LIMIT: f64 = 1e12;
const H_TOL: f64 = 1e-12;

/// The nonlocal coefficient `K : [0, ∞) → R` with its primitive `K̃(t) = ∫₀ᵗ K`.
#[derive(Clone)]
pub struct KirchhoffLaw {
    name: String,
    k: ScalarFn,
    primitive: Option<ScalarFn>,
    derivative: Option<ScalarFn>,
    alpha: f64,
    monotone: bool,
}

impl fmt::Debug for KirchhoffLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KirchhoffLaw")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .field("monotone", &self.monotone)
            .field("closed_primitive", &self.primitive.is_some())
            .finish()
    }
}

impl KirchhoffLaw {
    /// A law from an evaluator only; `K̃` falls back to quadrature and `K′` to finite differences.
    pub fn new(name: impl Into<String>, k: impl Fn(f64) -> f64 + Send + Sync + 'static, alpha: f64) -> Self {
        KirchhoffLaw { name: name.into(), k: Arc::new(k), primitive: None, derivative: None, alpha, monotone: false }
    }

    pub fn with_primitive(mut self, p: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.primitive = Some(Arc::new(p));
        self
    }

    pub fn with_derivative(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(d));
        self
    }

    /// Declare `t ↦ t K(t²)` strictly increasing and onto `[0, ∞)`.
    pub fn with_monotone(mut self, monotone: bool) -> Self {
        self.monotone = monotone;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    /// `K(t) = a + b t`, `K̃(t) = a t + b t²/2`.
    pub fn affine(a: f64, b: f64) -> Self {
        let alpha = if b > 0.0 { 2.0 } else { 1.0 };
        KirchhoffLaw::new(format!("affine({a},{b})"), move |t| a + b * t, alpha)
            .with_primitive(move |t| a * t + 0.5 * b * t * t)
            .with_derivative(move |_| b)
            .with_monotone(a > 0.0 && b >= 0.0)
    }

    /// `K ≡ γ`.
    pub fn constant(gamma: f64) -> Self {
        let mut law = KirchhoffLaw::affine(gamma, 0.0);
        law.name = format!("constant({gamma})");
        law
    }

    /// `K(t) = e^{-t}`; violates positivity of `inf K` and the monotonicity of `t K(t²)`.
    pub fn exp_decay() -> Self {
        KirchhoffLaw::new("exp_decay", |t: f64| (-t).exp(), 1.0)
            .with_primitive(|t: f64| -(-t).exp_m1())
            .with_derivative(|t: f64| -(-t).exp())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn has_closed_primitive(&self) -> bool {
        self.primitive.is_some()
    }

    pub fn k(&self, t: f64) -> f64 {
        (self.k)(t)
    }

    /// `K′(t)`: closed form, else central difference with step `1e-6 (1 + t)`.
    pub fn dk(&self, t: f64) -> f64 {
        match &self.derivative {
            Some(d) => d(t),
            None => {
                let h = 1e-6 * (1.0 + t.abs());
                let lo = (t - h).max(0.0);
                ((self.k)(t + h) - (self.k)(lo)) / (t + h - lo)
            }
        }
    }

    /// `K̃(t) = ∫₀ᵗ K(s) ds` for `t ≥ 0`.
    pub fn tilde_k(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("K̃ needs t >= 0, got {t}")));
        }
        match &self.primitive {
            Some(p) => Ok(p(t)),
            None => self.tilde_k_quadrature(t),
        }
    }

    /// Quadrature route for `K̃`, bypassing any closed form.
    pub fn tilde_k_quadrature(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("K̃ needs t >= 0, got {t}")));
        }
        let k = self.k.clone();
        adaptive_simpson(move |s| k(s), 0.0, t, PRIMITIVE_TOL, PRIMITIVE_MAX_DEPTH)
    }

    /// `s ↦ t K(t²)`.
    pub fn forward_h(&self, t: f64) -> f64 {
        t * self.k(t * t)
    }

    /// The left inverse `h` with `h(t K(t²)) = t`: the unique `t ≥ 0` with `t K(t²) = s`.
    pub fn solve_h(&self, s: f64) -> Result<f64> {
        if !self.monotone {
            return Err(Error::UnsupportedLaw(self.name.clone()));
        }
        if !(s >= 0.0) {
            return Err(Error::Domain(format!("h needs s >= 0, got {s}")));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        let g = |t: f64| self.forward_h(t) - s;
        let mut hi = 1.0;
        while g(hi) < 0.0 {
            hi *= 2.0;
            if hi > BRACKET_LIMIT {
                return Err(Error::NoRoot { target: s, limit: BRACKET_LIMIT });
            }
        }
        let mut lo = 0.0;
        let tol = H_TOL * (1.0 + s);
        let mut t = 0.5 * (lo + hi);
        for _ in 0..400 {
            let gt = g(t);
            if gt.abs() <= tol {
                return Ok(t);
            }
            if gt < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            // Newton polish, falling back to bisection when it leaves the bracket
            let slope = self.k(t * t) + 2.0 * t * t * self.dk(t * t);
            let newton = t - gt / slope;
            t = if slope > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        if g(t).abs() <= tol {
            Ok(t)
        } else {
            // bracket collapsed to adjacent floats; the closer end is the best representable root
            let best = if g(lo).abs() < g(hi).abs() { lo } else { hi };
            if g(best).abs() <= 4.0 * f64::EPSILON * (1.0 + s) {
                Ok(best)
            } else {
                Err(Error::NoRoot { target: s, limit: hi })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_primitive() {
        let law = KirchhoffLaw::affine(1.0, 2.0);
        assert_eq!(law.tilde_k(3.0).unwrap(), 12.0);
        assert_eq!(law.tilde_k(0.0).unwrap(), 0.0);
        assert_eq!(KirchhoffLaw::constant(5.0).tilde_k(4.0).unwrap(), 20.0);
    }

    #[test]
    fn negative_argument_rejected() {
        assert!(matches!(KirchhoffLaw::affine(1.0, 1.0).tilde_k(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn quadrature_fallback_matches() {
        let law = KirchhoffLaw::new("wavy", |t: f64| 2.0 + t.sin(), 1.0);
        let exact = |t: f64| 2.0 * t + 1.0 - t.cos();
        for t in [0.0, 0.5, 3.0, 100.0] {
            let v = law.tilde_k(t).unwrap();
            assert!((v - exact(t)).abs() <= 1e-9 * (1.0 + exact(t)), "{t}: {v}");
        }
    }

    #[test]
    fn solve_h_examples() {
        assert!((KirchhoffLaw::constant(1.0).solve_h(3.7).unwrap() - 3.7).abs() < 1e-12);
        assert!((KirchhoffLaw::affine(1.0, 1.0).solve_h(2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((KirchhoffLaw::affine(2.0, 3.0).solve_h(5.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(KirchhoffLaw::affine(2.0, 3.0).solve_h(0.0).unwrap(), 0.0);
    }

    #[test]
    fn solve_h_requires_monotone_flag() {
        assert!(matches!(KirchhoffLaw::exp_decay().solve_h(0.1), Err(Error::UnsupportedLaw(_))));
    }

    #[test]
    fn solve_h_reports_missing_root() {
        // t K(t²) = t / (1 + t²) never exceeds 1/2
        let law = KirchhoffLaw::new("bounded", |t: f64| 1.0 / (1.0 + t), 1.0).with_monotone(true);
        assert!(matches!(law.solve_h(10.0), Err(Error::NoRoot { .. })));
    }

    #[test]
    fn finite_difference_derivative_fallback() {
        let law = KirchhoffLaw::new("cubic", |t: f64| 1.0 + t * t * t, 3.0);
        assert!((law.dk(2.0) - 12.0).abs() < 1e-6);
        assert!((law.dk(0.0) - 0.0).abs() < 1e-6);
    }
}
