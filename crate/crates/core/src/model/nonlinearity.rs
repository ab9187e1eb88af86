use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::fem::quadrature::adaptive_simpson;
use crate::fem::Point;
use crate::model::{PRIMITIVE_MAX_DEPTH, PRIMITIVE_TOL};

pub type FieldFn = Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>;

/// A Carathéodory nonlinearity `f(x, t)` with primitive `F(x, t) = ∫₀ᵗ f(x, s) ds`.
#[derive(Clone)]
pub struct Nonlinearity {
    name: String,
    f: FieldFn,
    primitive: Option<FieldFn>,
    dfdt: Option<FieldFn>,
    q: f64,
    x_dependent: bool,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("name", &self.name)
            .field("q", &self.q)
            .field("x_dependent", &self.x_dependent)
            .field("closed_primitive", &self.primitive.is_some())
            .finish()
    }
}

impl Nonlinearity {
    pub fn new(name: impl Into<String>, f: impl Fn(Point, f64) -> f64 + Send + Sync + 'static, q: f64) -> Self {
        Nonlinearity { name: name.into(), f: Arc::new(f), primitive: None, dfdt: None, q, x_dependent: true }
    }

    /// Convenience for `f(x, t) = w(t)`.
    pub fn autonomous(name: impl Into<String>, w: impl Fn(f64) -> f64 + Send + Sync + 'static, q: f64) -> Self {
        let mut nl = Nonlinearity::new(name, move |_, t| w(t), q);
        nl.x_dependent = false;
        nl
    }

    pub fn with_primitive(mut self, p: impl Fn(Point, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.primitive = Some(Arc::new(p));
        self
    }

    pub fn with_dfdt(mut self, d: impl Fn(Point, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.dfdt = Some(Arc::new(d));
        self
    }

    pub fn with_x_dependent(mut self, x_dependent: bool) -> Self {
        self.x_dependent = x_dependent;
        self
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = q;
        self
    }

    /// `c · f`, with primitive and derivative scaled alike.
    pub fn scaled(&self, c: f64) -> Self {
        if c == 1.0 {
            return self.clone();
        }
        let f = self.f.clone();
        let mut out = Nonlinearity {
            name: format!("{}*{c}", self.name),
            f: Arc::new(move |x, t| c * f(x, t)),
            primitive: None,
            dfdt: None,
            q: self.q,
            x_dependent: self.x_dependent,
        };
        if let Some(p) = self.primitive.clone() {
            out.primitive = Some(Arc::new(move |x, t| c * p(x, t)));
        }
        if let Some(d) = self.dfdt.clone() {
            out.dfdt = Some(Arc::new(move |x, t| c * d(x, t)));
        }
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn is_x_dependent(&self) -> bool {
        self.x_dependent
    }

    pub fn has_closed_primitive(&self) -> bool {
        self.primitive.is_some()
    }

    pub fn f(&self, x: Point, t: f64) -> f64 {
        (self.f)(x, t)
    }

    /// `∂f/∂t`: closed form, else central difference with step `1e-6 (1 + |t|)`.
    pub fn dfdt(&self, x: Point, t: f64) -> f64 {
        match &self.dfdt {
            Some(d) => d(x, t),
            None => {
                let h = 1e-6 * (1.0 + t.abs());
                ((self.f)(x, t + h) - (self.f)(x, t - h)) / (2.0 * h)
            }
        }
    }

    /// `F(x, t) = ∫₀ᵗ f(x, s) ds`; for `t < 0` the integral runs backward.
    pub fn primitive(&self, x: Point, t: f64) -> Result<f64> {
        match &self.primitive {
            Some(p) => Ok(p(x, t)),
            None => self.primitive_quadrature(x, t),
        }
    }

    /// Quadrature route for `F`, bypassing any closed form.
    pub fn primitive_quadrature(&self, x: Point, t: f64) -> Result<f64> {
        let f = self.f.clone();
        adaptive_simpson(move |s| f(x, s), 0.0, t, PRIMITIVE_TOL, PRIMITIVE_MAX_DEPTH)
    }
}
