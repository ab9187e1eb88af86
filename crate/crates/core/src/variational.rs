//! Energies and their H¹₀ gradients.
//!
//! With `X = H¹₀` identified with its dual through the stiffness inner product,
//!
//! ```text
//! Φ(u) = ½ K̃(‖u‖²)      Φ′(u) = K(‖u‖²) u
//! J(u) = ∫ F(x, u)      J′(u) = A⁻¹ b(u),  bᵢ = ∫ f(x, u) φᵢ
//! Ψ(u) = ∫ G(x, u)      Ψ′(u) = A⁻¹ c(u)
//! ```
//!
//! and `T(v) = h(‖v‖)/‖v‖ · v` inverts `Φ′`. A discrete weak solution is a zero of
//! `R(u) = Φ′(u) − λ J′(u) − μ Ψ′(u)`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fem::{AssembledOperators, FeFunction};
use crate::model::{KirchhoffLaw, Nonlinearity};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub phi: f64,
    pub j: f64,
    pub psi: f64,
    pub lambda: f64,
    pub mu: f64,
    /// `phi − λ j − μ psi`.
    pub total: f64,
    /// `‖u‖` in H¹₀.
    pub norm: f64,
}

impl EnergyBreakdown {
    pub fn total_at(&self, lambda: f64, mu: f64) -> f64 {
        self.phi - lambda * self.j - mu * self.psi
    }
}

/// `Φ(u) = ½ K̃(‖u‖²)`.
pub fn phi(ops: &AssembledOperators, law: &KirchhoffLaw, u: &[f64]) -> Result<f64> {
    let t = ops.h1_inner(u, u)?.max(0.0);
    Ok(0.5 * law.tilde_k(t)?)
}

/// Riesz representative of `Φ′(u)`: `K(‖u‖²) u`.
pub fn grad_phi(ops: &AssembledOperators, law: &KirchhoffLaw, u: &[f64]) -> Result<FeFunction> {
    let t = ops.h1_inner(u, u)?.max(0.0);
    Ok(FeFunction::new(u.to_vec()).scaled(law.k(t)))
}

/// `J(u) = ∫ F(x, u_h(x)) dx` by element Gauss quadrature.
pub fn j_functional(ops: &AssembledOperators, nl: &Nonlinearity, u: &[f64]) -> Result<f64> {
    ops.integrate_composed(u, |x, t| nl.primitive(x, t))
}

/// Load vector `bᵢ = ∫ f(x, u_h) φᵢ`, i.e. `J′(u)` as a functional.
pub fn load(ops: &AssembledOperators, nl: &Nonlinearity, u: &[f64]) -> Result<Vec<f64>> {
    ops.load_vector(u, |x, t| Ok(nl.f(x, t)))
}

/// Riesz representative of `J′(u)`; `⟨grad_j(u), v⟩ = ∫ f(x, u_h) v_h` for every discrete `v`.
pub fn grad_j(ops: &AssembledOperators, nl: &Nonlinearity, u: &[f64]) -> Result<FeFunction> {
    ops.riesz_solve(&load(ops, nl, u)?)
}

/// `Ψ(u) = ∫ G(x, u_h)` for the perturbation `g`.
pub fn psi_functional(ops: &AssembledOperators, g: &Nonlinearity, u: &[f64]) -> Result<f64> {
    j_functional(ops, g, u)
}

pub fn grad_psi(ops: &AssembledOperators, g: &Nonlinearity, u: &[f64]) -> Result<FeFunction> {
    grad_j(ops, g, u)
}

/// `T(v) = h(‖v‖)/‖v‖ · v`, `T(0) = 0`.
pub fn inverse_t(ops: &AssembledOperators, law: &KirchhoffLaw, v: &[f64]) -> Result<FeFunction> {
    let norm = ops.h1_norm(v)?;
    if norm == 0.0 {
        // still validate that the law supports h
        law.solve_h(0.0)?;
        return Ok(FeFunction::zeros(v.len()));
    }
    let h = law.solve_h(norm)?;
    Ok(FeFunction::new(v.to_vec()).scaled(h / norm))
}

/// Everything defining one instance `Φ′(u) = λ J′(u) + μ Ψ′(u)`.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub ops: &'a AssembledOperators,
    pub law: &'a KirchhoffLaw,
    pub f: &'a Nonlinearity,
    pub g: Option<&'a Nonlinearity>,
    pub lambda: f64,
    pub mu: f64,
}

impl<'a> Problem<'a> {
    pub fn new(ops: &'a AssembledOperators, law: &'a KirchhoffLaw, f: &'a Nonlinearity) -> Self {
        Problem { ops, law, f, g: None, lambda: 0.0, mu: 0.0 }
    }

    pub fn with_perturbation(mut self, g: &'a Nonlinearity) -> Self {
        self.g = Some(g);
        self
    }

    pub fn with_params(mut self, lambda: f64, mu: f64) -> Self {
        self.lambda = lambda;
        self.mu = mu;
        self
    }

    pub fn dofs(&self) -> usize {
        self.ops.num_dofs()
    }

    /// `λ b(u) + μ c(u)`: the right-hand side functional.
    pub fn rhs_load(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut r = vec![0.0; u.len()];
        if self.lambda != 0.0 {
            for (ri, bi) in r.iter_mut().zip(load(self.ops, self.f, u)?) {
                *ri += self.lambda * bi;
            }
        }
        if let (Some(g), true) = (self.g, self.mu != 0.0) {
            for (ri, ci) in r.iter_mut().zip(load(self.ops, g, u)?) {
                *ri += self.mu * ci;
            }
        }
        Ok(r)
    }

    /// Coefficient-space system `G(u) = K(‖u‖²) A u − λ b(u) − μ c(u)`.
    pub fn system(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.ops.check_len(u)?;
        let au = self.ops.stiffness().mul_vec(u);
        let k = self.law.k(crate::fem::linalg::dot(u, &au).max(0.0));
        let rhs = self.rhs_load(u)?;
        Ok(au.iter().zip(rhs).map(|(a, r)| k * a - r).collect())
    }

    pub fn energy(&self, u: &[f64]) -> Result<EnergyBreakdown> {
        let phi = phi(self.ops, self.law, u)?;
        let j = j_functional(self.ops, self.f, u)?;
        let psi = match self.g {
            Some(g) => psi_functional(self.ops, g, u)?,
            None => 0.0,
        };
        let norm = self.ops.h1_norm(u)?;
        let total = phi - self.lambda * j - self.mu * psi;
        Ok(EnergyBreakdown { phi, j, psi, lambda: self.lambda, mu: self.mu, total, norm })
    }

    /// `R(u) = A⁻¹ G(u)` and `‖R(u)‖`.
    pub fn residual(&self, u: &[f64]) -> Result<(FeFunction, f64)> {
        let r = self.ops.riesz_solve(&self.system(u)?)?;
        let norm = self.ops.h1_norm(&r)?;
        Ok((r, norm))
    }
}

/// `R(u) = grad_phi(u) − λ grad_j(u) − μ grad_psi(u)` with its H¹₀ norm.
pub fn residual(
    ops: &AssembledOperators,
    law: &KirchhoffLaw,
    f: &Nonlinearity,
    g: Option<&Nonlinearity>,
    lambda: f64,
    mu: f64,
    u: &[f64],
) -> Result<(FeFunction, f64)> {
    let mut p = Problem::new(ops, law, f).with_params(lambda, mu);
    p.g = g;
    p.residual(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble, build_interval_mesh};
    use crate::model::nonlinearity_specimen;

    #[test]
    fn phi_examples() {
        let ops = assemble(&build_interval_mesh(2, 1.0).unwrap()).unwrap();
        assert_eq!(phi(&ops, &KirchhoffLaw::affine(1.0, 1.0), &[0.0]).unwrap(), 0.0);
        // ‖hat‖² = 4, K̃(4) = 4 + 8
        assert!((phi(&ops, &KirchhoffLaw::affine(1.0, 1.0), &[1.0]).unwrap() - 6.0).abs() < 1e-13);
        assert!((phi(&ops, &KirchhoffLaw::constant(1.0), &[0.5]).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn j_of_hat_with_linear_f() {
        // ∫ hat² / 2 = 1/6; P1 squared is integrated exactly by 2-point Gauss
        let ops = assemble(&build_interval_mesh(2, 1.0).unwrap()).unwrap();
        let j = j_functional(&ops, &nonlinearity_specimen("linear").unwrap(), &[1.0]).unwrap();
        assert!((j - 1.0 / 6.0).abs() < 2e-3);
        assert_eq!(j_functional(&ops, &nonlinearity_specimen("linear").unwrap(), &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn forcing_gradient_independent_of_u() {
        let ops = assemble(&build_interval_mesh(8, 1.0).unwrap()).unwrap();
        let f = nonlinearity_specimen("sine_forcing").unwrap();
        let a = grad_j(&ops, &f, &[0.0; 7]).unwrap();
        let b = grad_j(&ops, &f, &[1.0, -2.0, 3.0, 0.1, 0.0, 4.0, 1.0]).unwrap();
        assert_eq!(a, b);
        let z = grad_j(&ops, &nonlinearity_specimen("zero").unwrap(), &[1.0; 7]).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn inverse_t_basics() {
        let ops = assemble(&build_interval_mesh(8, 1.0).unwrap()).unwrap();
        let v = [0.3, -0.2, 0.5, 1.0, 0.0, 0.1, -0.4];
        let id = inverse_t(&ops, &KirchhoffLaw::constant(1.0), &v).unwrap();
        for (a, b) in id.iter().zip(&v) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(inverse_t(&ops, &KirchhoffLaw::affine(1.0, 1.0), &[0.0; 7]).unwrap().is_zero());
        assert!(inverse_t(&ops, &KirchhoffLaw::exp_decay(), &v).is_err());
    }

    #[test]
    fn residual_at_rest_and_without_forcing() {
        let ops = assemble(&build_interval_mesh(8, 1.0).unwrap()).unwrap();
        let law = KirchhoffLaw::affine(1.0, 1.0);
        let f = nonlinearity_specimen("bump").unwrap();
        let (_, r0) = residual(&ops, &law, &f, None, 0.0, 0.0, &[0.0; 7]).unwrap();
        assert_eq!(r0, 0.0);
        let u = [0.1, 0.4, 0.2, -0.3, 0.5, 0.0, 0.2];
        let (_, r) = residual(&ops, &law, &f, None, 0.0, 0.0, &u).unwrap();
        let n = ops.h1_norm(&u).unwrap();
        assert!((r - law.k(n * n) * n).abs() < 1e-12 * r);
    }
}
