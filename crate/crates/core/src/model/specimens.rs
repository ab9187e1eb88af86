//! Named laws and nonlinearities used by the tests, the CLI and the C API.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{KirchhoffLaw, Nonlinearity};

pub const LAW_SPECIMENS: &[&str] = &["affine", "constant", "exp_decay"];
pub const NONLINEARITY_SPECIMENS: &[&str] = &["bump", "linear", "sine", "sine_forcing", "zero"];

/// Look up a law by kind; `affine` takes `[a, b]`, `constant` takes `[gamma]`.
pub fn law_specimen(kind: &str, params: &[f64]) -> Result<KirchhoffLaw> {
    let want = |n: usize| {
        if params.len() == n {
            Ok(())
        } else {
            Err(Error::Config(format!("law `{kind}` takes {n} parameter(s), got {}", params.len())))
        }
    };
    match kind {
        "affine" => want(2).map(|_| KirchhoffLaw::affine(params[0], params[1])),
        "constant" => want(1).map(|_| KirchhoffLaw::constant(params[0])),
        "exp_decay" => want(0).map(|_| KirchhoffLaw::exp_decay()),
        other => Err(Error::Config(format!("unknown law `{other}` (known: {})", LAW_SPECIMENS.join(", ")))),
    }
}

pub fn nonlinearity_specimen(name: &str) -> Result<Nonlinearity> {
    match name {
        "bump" => Ok(bump()),
        "linear" => Ok(linear()),
        "sine" => Ok(sine()),
        "sine_forcing" => Ok(sine_forcing()),
        "zero" => Ok(zero()),
        other => Err(Error::Config(format!(
            "unknown nonlinearity `{other}` (known: {})",
            NONLINEARITY_SPECIMENS.join(", ")
        ))),
    }
}

/// Non-negative, non-zero, C¹ bump supported on `[1, 2]`:
/// `f(t) = 4 [(t-1)(2-t)]²`, peak `f(3/2) = 1/4`, `F(2) = 2/15`.
pub fn bump() -> Nonlinearity {
    fn f(t: f64) -> f64 {
        if t <= 1.0 || t >= 2.0 {
            0.0
        } else {
            let p = (t - 1.0) * (2.0 - t);
            4.0 * p * p
        }
    }
    fn primitive(t: f64) -> f64 {
        let s = (t - 1.0).clamp(0.0, 1.0);
        4.0 * s * s * s * (1.0 / 3.0 - 0.5 * s + 0.2 * s * s)
    }
    fn dfdt(t: f64) -> f64 {
        if t <= 1.0 || t >= 2.0 {
            0.0
        } else {
            8.0 * (t - 1.0) * (2.0 - t) * (3.0 - 2.0 * t)
        }
    }
    Nonlinearity::autonomous("bump", f, 1.0).with_primitive(|_, t| primitive(t)).with_dfdt(|_, t| dfdt(t))
}

/// `f(t) = t`, `F(t) = t²/2`.
pub fn linear() -> Nonlinearity {
    Nonlinearity::autonomous("linear", |t| t, 1.0).with_primitive(|_, t| 0.5 * t * t).with_dfdt(|_, _| 1.0)
}

/// `g(t) = sin t`, `G(t) = 1 - cos t`.
pub fn sine() -> Nonlinearity {
    Nonlinearity::autonomous("sine", f64::sin, 1.0)
        .with_primitive(|_, t| 2.0 * (0.5 * t).sin().powi(2))
        .with_dfdt(|_, t| t.cos())
}

/// `f(x, t) = sin(π x)` (independent of `t`), `F(x, t) = sin(π x) t`.
pub fn sine_forcing() -> Nonlinearity {
    Nonlinearity::new("sine_forcing", |x, _| (PI * x[0]).sin(), 0.5)
        .with_primitive(|x, t| (PI * x[0]).sin() * t)
        .with_dfdt(|_, _| 0.0)
}

pub fn zero() -> Nonlinearity {
    Nonlinearity::autonomous("zero", |_| 0.0, 1.0).with_primitive(|_, _| 0.0).with_dfdt(|_, _| 0.0)
}

#[derive(Debug, Clone)]
pub struct Specimen {
    pub name: &'static str,
    pub law: KirchhoffLaw,
    pub nonlinearity: Nonlinearity,
}

/// Law/nonlinearity pairs: the affine-law bump problem, the eigenvalue and
/// linear-forcing oracles, and negative controls.
pub fn specimen_library() -> Vec<Specimen> {
    vec![
        Specimen { name: "affine-bump", law: KirchhoffLaw::affine(1.0, 1.0), nonlinearity: bump() },
        Specimen { name: "constant-linear", law: KirchhoffLaw::constant(1.0), nonlinearity: linear() },
        Specimen { name: "constant-forcing", law: KirchhoffLaw::constant(1.0), nonlinearity: sine_forcing() },
        Specimen { name: "exp-decay-bump", law: KirchhoffLaw::exp_decay(), nonlinearity: bump() },
        Specimen { name: "affine-linear", law: KirchhoffLaw::affine(1.0, 1.0), nonlinearity: linear() },
    ]
}
