use crate::error::{Error, Result};
use crate::fem::linalg::{dot, BandCholesky, CsrMatrix};
use crate::fem::mesh::{Mesh, Point};
use crate::fem::quadrature::{ReferenceRule, GAUSS_SEGMENT_2, GAUSS_TRIANGLE_3};
use crate::fem::FeFunction;

const RIESZ_TOL: f64 = 1e-12;

/// Precomputed geometry and quadrature of one element.
#[derive(Debug, Clone)]
pub struct ElementTable {
    /// Interior index of each local node (`None` on the boundary).
    pub dofs: Vec<Option<usize>>,
    pub measure: f64,
    /// Constant gradient of each local hat function.
    pub grads: Vec<Point>,
    /// Physical quadrature points and absolute weights.
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

/// Stiffness and mass operators on the interior nodes plus everything needed to
/// integrate composed nonlinear integrands. Immutable after [`assemble`].
#[derive(Debug, Clone)]
pub struct AssembledOperators {
    mesh: Mesh,
    stiffness: CsrMatrix,
    mass: CsrMatrix,
    full_mass_total: f64,
    rule: ReferenceRule,
    elements: Vec<ElementTable>,
    factor: BandCholesky,
}

pub fn assemble(mesh: &Mesh) -> Result<AssembledOperators> {
    let rule = if mesh.dimension() == 1 { GAUSS_SEGMENT_2 } else { GAUSS_TRIANGLE_3 };
    let k = mesh.nodes_per_cell();
    let coords = mesh.coords();
    let mut elements = Vec::with_capacity(mesh.num_cells());
    let mut a_trip = Vec::new();
    let mut m_trip = Vec::new();
    let mut full_mass_total = 0.0;
    for e in 0..mesh.num_cells() {
        let cell = mesh.cell(e);
        let measure = mesh.signed_measure(e);
        if !(measure > 0.0) || !measure.is_finite() {
            return Err(Error::Assembly { element: e, measure });
        }
        let grads = local_gradients(mesh, cell, measure);
        let points: Vec<Point> = rule
            .basis
            .iter()
            .map(|lam| {
                let mut p = [0.0; 2];
                for a in 0..k {
                    p[0] += lam[a] * coords[cell[a]][0];
                    p[1] += lam[a] * coords[cell[a]][1];
                }
                p
            })
            .collect();
        let weights: Vec<f64> = rule.weights.iter().map(|w| w * measure).collect();
        let dofs: Vec<Option<usize>> = cell.iter().map(|&n| mesh.interior_index(n)).collect();
        for a in 0..k {
            for b in 0..k {
                let mab: f64 = rule.basis.iter().zip(&weights).map(|(lam, w)| w * lam[a] * lam[b]).sum();
                full_mass_total += mab;
                if let (Some(i), Some(j)) = (dofs[a], dofs[b]) {
                    let kab = measure * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                    a_trip.push((i, j, kab));
                    m_trip.push((i, j, mab));
                }
            }
        }
        elements.push(ElementTable { dofs, measure, grads, points, weights });
    }
    let n = mesh.num_interior();
    let stiffness = CsrMatrix::from_triplets(n, a_trip);
    let mass = CsrMatrix::from_triplets(n, m_trip);
    let factor = BandCholesky::factor(&stiffness)?;
    Ok(AssembledOperators { mesh: mesh.clone(), stiffness, mass, full_mass_total, rule, elements, factor })
}

fn local_gradients(mesh: &Mesh, cell: &[usize], measure: f64) -> Vec<Point> {
    let c = mesh.coords();
    if mesh.dimension() == 1 {
        vec![[-1.0 / measure, 0.0], [1.0 / measure, 0.0]]
    } else {
        // ∇λ_a = rot90(opposite edge) / (2|T|)
        (0..3)
            .map(|a| {
                let (p, q) = (c[cell[(a + 1) % 3]], c[cell[(a + 2) % 3]]);
                [(p[1] - q[1]) / (2.0 * measure), (q[0] - p[0]) / (2.0 * measure)]
            })
            .collect()
    }
}

impl AssembledOperators {
    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    /// Sum of all entries of the mass matrix over every node (boundary included); equals `|Ω|`.
    pub fn full_mass_total(&self) -> f64 {
        self.full_mass_total
    }

    pub fn rule(&self) -> ReferenceRule {
        self.rule
    }

    pub fn elements(&self) -> &[ElementTable] {
        &self.elements
    }

    pub fn num_dofs(&self) -> usize {
        self.stiffness.dim()
    }

    pub fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() == self.num_dofs() {
            Ok(())
        } else {
            Err(Error::Shape { expected: self.num_dofs(), got: u.len() })
        }
    }

    /// `⟨u, v⟩ = ∫ ∇u·∇v = uᵀ A v`.
    pub fn h1_inner(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        self.check_len(u)?;
        self.check_len(v)?;
        Ok(self.stiffness.bilinear(u, v))
    }

    /// `‖u‖ = (∫ |∇u|²)^{1/2}`.
    pub fn h1_norm(&self, u: &[f64]) -> Result<f64> {
        Ok(self.h1_inner(u, u)?.max(0.0).sqrt())
    }

    pub fn h1_distance(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        self.check_len(u)?;
        self.check_len(v)?;
        let d: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
        self.h1_norm(&d)
    }

    /// Solve `A w = rhs`, i.e. the H¹₀ Riesz representative of the functional `rhs`.
    pub fn riesz_solve(&self, rhs: &[f64]) -> Result<FeFunction> {
        self.check_len(rhs)?;
        let mut w = self.factor.solve(rhs);
        for _ in 0..2 {
            let r: Vec<f64> = self.stiffness.mul_vec(&w).iter().zip(rhs).map(|(aw, b)| b - aw).collect();
            let scale = self.stiffness.max_abs() * inf_norm(&w) + inf_norm(rhs);
            let rel = if scale > 0.0 { inf_norm(&r) / scale } else { 0.0 };
            if !rel.is_finite() {
                break;
            }
            if rel <= RIESZ_TOL {
                return Ok(FeFunction::new(w));
            }
            let dw = self.factor.solve(&r);
            w.iter_mut().zip(dw).for_each(|(a, d)| *a += d);
        }
        Err(Error::LinearSolve("stiffness solve did not reach relative residual 1e-12".into()))
    }

    /// Values of `u_h` at the quadrature points of element `e`.
    pub fn values_at_points(&self, u: &[f64], e: usize) -> impl Iterator<Item = f64> + '_ {
        let el = &self.elements[e];
        let nodal: Vec<f64> = el.dofs.iter().map(|d| d.map_or(0.0, |i| u[i])).collect();
        self.rule.basis.iter().map(move |lam| nodal.iter().zip(lam).map(|(v, l)| v * l).sum())
    }

    /// `∫_Ω integrand(x, u_h(x)) dx` by element quadrature.
    pub fn integrate_composed(&self, u: &[f64], mut integrand: impl FnMut(Point, f64) -> Result<f64>) -> Result<f64> {
        self.check_len(u)?;
        let mut total = 0.0;
        for (e, el) in self.elements.iter().enumerate() {
            for ((x, w), uq) in el.points.iter().zip(&el.weights).zip(self.values_at_points(u, e)) {
                total += w * integrand(*x, uq)?;
            }
        }
        Ok(total)
    }

    /// Load vector `bᵢ = ∫_Ω f(x, u_h(x)) φᵢ(x) dx`.
    pub fn load_vector(&self, u: &[f64], mut f: impl FnMut(Point, f64) -> Result<f64>) -> Result<Vec<f64>> {
        self.check_len(u)?;
        let mut b = vec![0.0; self.num_dofs()];
        for (e, el) in self.elements.iter().enumerate() {
            for (q, ((x, w), uq)) in el.points.iter().zip(&el.weights).zip(self.values_at_points(u, e)).enumerate() {
                let fq = w * f(*x, uq)?;
                for (a, dof) in el.dofs.iter().enumerate() {
                    if let Some(i) = dof {
                        b[*i] += fq * self.rule.basis[q][a];
                    }
                }
            }
        }
        Ok(b)
    }

    /// Weighted mass matrix `∫_Ω c(x, u_h(x)) φᵢ φⱼ dx`, the derivative of [`Self::load_vector`].
    pub fn weighted_mass(&self, u: &[f64], mut c: impl FnMut(Point, f64) -> Result<f64>) -> Result<CsrMatrix> {
        self.check_len(u)?;
        let mut trip = Vec::with_capacity(self.mass.nnz());
        for (e, el) in self.elements.iter().enumerate() {
            let cq: Vec<f64> = el
                .points
                .iter()
                .zip(&el.weights)
                .zip(self.values_at_points(u, e))
                .map(|((x, w), uq)| Ok(w * c(*x, uq)?))
                .collect::<Result<_>>()?;
            for (a, da) in el.dofs.iter().enumerate() {
                for (b, db) in el.dofs.iter().enumerate() {
                    if let (Some(i), Some(j)) = (da, db) {
                        let v: f64 = cq.iter().zip(self.rule.basis).map(|(c, lam)| c * lam[a] * lam[b]).sum();
                        trip.push((*i, *j, v));
                    }
                }
            }
        }
        Ok(CsrMatrix::from_triplets(self.num_dofs(), trip))
    }

    /// Riesz-weighted Euclidean dot product helper: `⟨A⁻¹ g, A⁻¹ g⟩_A = gᵀ A⁻¹ g`.
    pub fn dual_norm(&self, g: &[f64]) -> Result<f64> {
        let w = self.riesz_solve(g)?;
        Ok(dot(g, &w).max(0.0).sqrt())
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{build_interval_mesh, build_rect_mesh};

    #[test]
    fn two_cell_interval_operators() {
        let ops = assemble(&build_interval_mesh(2, 1.0).unwrap()).unwrap();
        assert!((ops.stiffness().get(0, 0) - 4.0).abs() < 1e-14);
        assert!((ops.mass().get(0, 0) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn four_cell_interval_tridiagonal() {
        let ops = assemble(&build_interval_mesh(4, 1.0).unwrap()).unwrap();
        let a = ops.stiffness();
        for i in 0..3 {
            assert!((a.get(i, i) - 8.0).abs() < 1e-13);
            if i + 1 < 3 {
                assert!((a.get(i, i + 1) + 4.0).abs() < 1e-13);
            }
        }
        assert_eq!(a.get(0, 2), 0.0);
    }

    #[test]
    fn symmetric_and_mass_total() {
        for mesh in [build_interval_mesh(17, 2.5).unwrap(), build_rect_mesh(7, 5, 1.0, 2.0).unwrap()] {
            let ops = assemble(&mesh).unwrap();
            assert!(ops.stiffness().symmetry_defect() <= 1e-14 * ops.stiffness().max_abs());
            assert!(ops.mass().symmetry_defect() <= 1e-14 * ops.mass().max_abs());
            let area = mesh.domain_measure();
            assert!((ops.full_mass_total() - area).abs() <= 1e-12 * area);
        }
    }

    #[test]
    fn h1_norm_of_hat() {
        let ops = assemble(&build_interval_mesh(2, 1.0).unwrap()).unwrap();
        assert!((ops.h1_norm(&[1.0]).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(ops.h1_norm(&[0.0]).unwrap(), 0.0);
        assert!(matches!(ops.h1_norm(&[1.0, 2.0]), Err(Error::Shape { expected: 1, got: 2 })));
    }

    #[test]
    fn riesz_solve_examples() {
        let ops = assemble(&build_interval_mesh(2, 1.0).unwrap()).unwrap();
        assert!((ops.riesz_solve(&[1.0]).unwrap()[0] - 0.25).abs() < 1e-15);
        assert!(ops.riesz_solve(&[0.0]).unwrap().is_zero());
    }

    #[test]
    fn rect_stiffness_is_five_point_laplacian() {
        // the diagonal-split P1 stiffness on a square grid equals the 5-point stencil
        let ops = assemble(&build_rect_mesh(4, 4, 1.0, 1.0).unwrap()).unwrap();
        let a = ops.stiffness();
        assert!((a.get(4, 4) - 4.0).abs() < 1e-13);
        assert!((a.get(4, 5) + 1.0).abs() < 1e-13);
        assert!((a.get(4, 1) + 1.0).abs() < 1e-13);
        assert!(a.get(4, 8).abs() < 1e-13);
    }

    #[test]
    fn assembly_is_deterministic() {
        let mesh = build_rect_mesh(6, 6, 1.0, 1.0).unwrap();
        let (a, b) = (assemble(&mesh).unwrap(), assemble(&mesh).unwrap());
        assert_eq!(a.stiffness(), b.stiffness());
        assert_eq!(a.mass(), b.mass());
    }
}
