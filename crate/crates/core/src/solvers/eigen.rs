//! Lowest discrete Dirichlet eigenpairs `A w = ν M w` by subspace iteration.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fem::{AssembledOperators, FeFunction};

const MAX_SWEEPS: usize = 2000;
const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct EigenPairs {
    /// Ascending.
    pub values: Vec<f64>,
    /// `M`-orthonormal, largest-magnitude entry positive.
    pub vectors: Vec<FeFunction>,
    pub sweeps: usize,
    pub converged: bool,
}

/// The `count` smallest eigenpairs of the stiffness/mass pencil.
pub fn dirichlet_eigenpairs(ops: &AssembledOperators, count: usize) -> Result<EigenPairs> {
    let n = ops.num_dofs();
    let k = count.min(n);
    if k == 0 {
        return Ok(EigenPairs { values: vec![], vectors: vec![], sweeps: 0, converged: true });
    }
    let p = (2 * k).max(k + 4).min(n);
    let a = ops.stiffness();
    let m = ops.mass();

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_e16e);
    let mut x: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
    let mut theta = vec![0.0; p];
    let mut sweeps = 0;
    let mut converged = false;

    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let y: Vec<Vec<f64>> = x.iter().map(|xj| ops.riesz_solve(&m.mul_vec(xj)).map(FeFunction::into_inner)).collect::<Result<_>>()?;
        let ay: Vec<Vec<f64>> = y.iter().map(|v| a.mul_vec(v)).collect();
        let my: Vec<Vec<f64>> = y.iter().map(|v| m.mul_vec(v)).collect();
        let ar = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&y[i], &ay[j]) + dot(&y[j], &ay[i])));
        let mr = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&y[i], &my[j]) + dot(&y[j], &my[i])));
        let chol = mr
            .cholesky()
            .ok_or_else(|| Error::LinearSolve("subspace basis lost rank in Rayleigh-Ritz".into()))?;
        let l = chol.l();
        let linv = l
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::LinearSolve("singular Rayleigh-Ritz mass".into()))?;
        let c = &linv * &ar * linv.transpose();
        let c = (&c + c.transpose()) * 0.5;
        let eig = SymmetricEigen::new(c);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let v = linv.transpose() * &eig.eigenvectors;
        for (slot, &col) in order.iter().enumerate() {
            theta[slot] = eig.eigenvalues[col];
            let coeffs: DVector<f64> = v.column(col).into();
            let mut xj = vec![0.0; n];
            for (yi, ci) in y.iter().zip(coeffs.iter()) {
                for (t, s) in xj.iter_mut().zip(yi) {
                    *t += ci * s;
                }
            }
            x[slot] = xj;
        }
        let worst = (0..k)
            .map(|j| {
                let ax = a.mul_vec(&x[j]);
                let mx = m.mul_vec(&x[j]);
                let r = ax.iter().zip(&mx).fold(0.0f64, |acc, (p, q)| acc.max((p - theta[j] * q).abs()));
                let scale = theta[j] * mx.iter().fold(0.0f64, |acc, q| acc.max(q.abs()));
                if scale > 0.0 {
                    r / scale
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0f64, f64::max);
        if worst <= RESIDUAL_TOL {
            converged = true;
            break;
        }
    }

    let vectors = x
        .into_iter()
        .take(k)
        .map(|mut v| {
            let (imax, _) = v
                .iter()
                .enumerate()
                .fold((0, 0.0f64), |(bi, bv), (i, x)| if x.abs() > bv { (i, x.abs()) } else { (bi, bv) });
            if v[imax] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            FeFunction::new(v)
        })
        .collect();
    Ok(EigenPairs { values: theta[..k].to_vec(), vectors, sweeps, converged })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    crate::fem::linalg::dot(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble, build_interval_mesh, build_rect_mesh};
    use std::f64::consts::PI;

    #[test]
    fn interval_matches_closed_form() {
        // P1 consistent-mass eigenvalues on a uniform grid:
        // ν_k = (6/h²)(1 − cos kπh)/(2 + cos kπh)
        let n = 40;
        let h = 1.0 / n as f64;
        let ops = assemble(&build_interval_mesh(n, 1.0).unwrap()).unwrap();
        let pairs = dirichlet_eigenpairs(&ops, 5).unwrap();
        assert!(pairs.converged);
        for (k, nu) in pairs.values.iter().enumerate() {
            let c = ((k + 1) as f64 * PI * h).cos();
            let exact = 6.0 / (h * h) * (1.0 - c) / (2.0 + c);
            assert!((nu - exact).abs() < 1e-10 * exact, "{k}: {nu} vs {exact}");
        }
        let v = &pairs.vectors[0];
        assert!((ops.mass().bilinear(v, v) - 1.0).abs() < 1e-12);
        assert!(v.iter().all(|x| *x > 0.0));
    }

    #[test]
    fn square_first_eigenvalue() {
        let ops = assemble(&build_rect_mesh(16, 16, 1.0, 1.0).unwrap()).unwrap();
        let pairs = dirichlet_eigenpairs(&ops, 3).unwrap();
        assert!(pairs.converged);
        assert!((pairs.values[0] / (2.0 * PI * PI) - 1.0).abs() < 0.03);
        // the second eigenvalue of the square is double
        assert!((pairs.values[1] - pairs.values[2]).abs() < 1e-2 * pairs.values[1]);
    }

    #[test]
    fn tiny_space() {
        let ops = assemble(&build_interval_mesh(2, 1.0).unwrap()).unwrap();
        let pairs = dirichlet_eigenpairs(&ops, 5).unwrap();
        assert_eq!(pairs.values.len(), 1);
        // 4 w = ν (1/3) w
        assert!((pairs.values[0] - 12.0).abs() < 1e-12);
    }
}
