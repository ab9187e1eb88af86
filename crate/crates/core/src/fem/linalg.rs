//! Sparse storage and banded direct factorizations.
//!
//! Interior nodes on the uniform meshes are numbered row by row, so every
//! operator assembled here has half-bandwidth 1 (intervals) or `nx` (rectangles).
//! Both factorizations below work on that band.

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Compressed sparse row matrix (square).
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Duplicates are summed in insertion order, so identical input gives bit-identical output.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            assert!(i < n && j < n, "triplet ({i}, {j}) outside {n}x{n}");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n, row_ptr, col_idx, values }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.mul_vec(y))
    }

    /// Largest `|i - j|` over stored entries.
    pub fn half_bandwidth(&self) -> usize {
        (0..self.n).flat_map(|i| self.row(i).map(move |(j, _)| i.abs_diff(j))).max().unwrap_or(0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A_ij - A_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn scaled(&self, c: f64) -> CsrMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// `self * alpha + other * beta`, assuming both share a sparsity pattern superset.
    pub fn linear_combination(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> CsrMatrix {
        assert_eq!(self.n, other.n);
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.n {
            triplets.extend(self.row(i).map(|(j, v)| (i, j, alpha * v)));
            triplets.extend(other.row(i).map(|(j, v)| (i, j, beta * v)));
        }
        CsrMatrix::from_triplets(self.n, triplets)
    }
}

/// Banded Cholesky `A = L Lᵀ` for symmetric positive definite `A`.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    /// Row `i` holds `L[i][i-bw ..= i]`.
    lower: Vec<f64>,
}

impl BandCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.dim();
        let bw = a.half_bandwidth();
        let w = bw + 1;
        let mut lower = vec![0.0; n * w];
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    lower[i * w + (j + bw - i)] = v;
                }
            }
        }
        let idx = |i: usize, j: usize| i * w + (j + bw - i);
        for i in 0..n {
            let first = i.saturating_sub(bw);
            for j in first..=i {
                let kstart = first.max(j.saturating_sub(bw));
                let mut s = lower[idx(i, j)];
                for k in kstart..j {
                    s -= lower[idx(i, k)] * lower[idx(j, k)];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::LinearSolve(format!("matrix not positive definite at pivot {i} ({s:e})")));
                    }
                    lower[idx(i, i)] = s.sqrt();
                } else {
                    lower[idx(i, j)] = s / lower[idx(j, j)];
                }
            }
        }
        Ok(BandCholesky { n, bw, lower })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        let l = |i: usize, j: usize| self.lower[i * w + (j + bw - i)];
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(bw)..i {
                s -= l(i, k) * y[k];
            }
            y[i] = s / l(i, i);
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= l(k, i) * y[k];
            }
            y[i] = s / l(i, i);
        }
        y
    }
}

#[derive(Debug, Clone)]
struct BandRow {
    start: usize,
    vals: Vec<f64>,
}

impl BandRow {
    fn get(&self, c: usize) -> f64 {
        if c < self.start {
            0.0
        } else {
            self.vals.get(c - self.start).copied().unwrap_or(0.0)
        }
    }

    fn end(&self) -> usize {
        self.start + self.vals.len()
    }
}

/// Banded LU with partial pivoting, `P A = L U`, for general (possibly indefinite) `A`.
#[derive(Debug, Clone)]
pub struct BandLu {
    rows: Vec<BandRow>,
    pivots: Vec<usize>,
}

impl BandLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.dim();
        let bw = a.half_bandwidth();
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        let mut rows: Vec<BandRow> = (0..n)
            .map(|i| {
                let start = i.saturating_sub(bw);
                let end = (i + bw + 1).min(n);
                let mut vals = vec![0.0; end - start];
                for (j, v) in a.row(i) {
                    vals[j - start] = v;
                }
                BandRow { start, vals }
            })
            .collect();
        let mut pivots = Vec::with_capacity(n);
        for k in 0..n {
            let last = (k + bw).min(n - 1);
            let p = (k..=last)
                .max_by(|&r, &s| rows[r].get(k).abs().total_cmp(&rows[s].get(k).abs()).then(s.cmp(&r)))
                .unwrap();
            let piv = rows[p].get(k);
            if !(piv.abs() > 1e-14 * scale) || !piv.is_finite() {
                return Err(Error::LinearSolve(format!("singular pivot at column {k} ({piv:e})")));
            }
            rows.swap(k, p);
            pivots.push(p);
            let pivot_row = rows[k].clone();
            for row in rows.iter_mut().take(last + 1).skip(k + 1) {
                let v = row.get(k);
                if v == 0.0 {
                    continue;
                }
                let m = v / piv;
                if pivot_row.end() > row.end() {
                    let new_len = pivot_row.end() - row.start;
                    row.vals.resize(new_len, 0.0);
                }
                row.vals[k - row.start] = m;
                for c in k + 1..pivot_row.end() {
                    row.vals[c - row.start] -= m * pivot_row.get(c);
                }
            }
        }
        Ok(BandLu { rows, pivots })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.rows.len();
        assert_eq!(rhs.len(), n);
        let mut y = rhs.to_vec();
        for (k, &p) in self.pivots.iter().enumerate() {
            y.swap(k, p);
        }
        for r in 0..n {
            let row = &self.rows[r];
            let mut s = y[r];
            for c in row.start..r {
                s -= row.vals[c - row.start] * y[c];
            }
            y[r] = s;
        }
        for r in (0..n).rev() {
            let row = &self.rows[r];
            let mut s = y[r];
            for c in r + 1..row.end() {
                s -= row.vals[c - row.start] * y[c];
            }
            y[r] = s / row.get(r);
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize, d: f64, o: f64) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, d));
            if i + 1 < n {
                t.push((i, i + 1, o));
                t.push((i + 1, i, o));
            }
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 1, 2.0), (0, 0, 3.0)]);
        assert_eq!(a.get(0, 0), 4.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn cholesky_solves_spd() {
        let a = tridiag(7, 2.0, -1.0);
        let x: Vec<f64> = (0..7).map(|i| (i as f64).sin()).collect();
        let b = a.mul_vec(&x);
        let sol = BandCholesky::factor(&a).unwrap().solve(&b);
        for (s, e) in sol.iter().zip(&x) {
            assert!((s - e).abs() < 1e-13);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        assert!(BandCholesky::factor(&tridiag(4, 1.0, -2.0)).is_err());
    }

    #[test]
    fn lu_solves_indefinite_with_pivoting() {
        // zero diagonal forces row exchanges
        let a = tridiag(6, 0.0, 1.0);
        let x = vec![1.0, -2.0, 3.0, 0.5, -1.5, 2.5];
        let sol = BandLu::factor(&a).unwrap().solve(&a.mul_vec(&x));
        for (s, e) in sol.iter().zip(&x) {
            assert!((s - e).abs() < 1e-12, "{sol:?}");
        }
    }

    #[test]
    fn lu_random_band_residual() {
        // deterministic pseudo-random band matrix with weak diagonal
        let n: usize = 40;
        let bw: usize = 4;
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut t = Vec::new();
        for i in 0..n {
            for j in i.saturating_sub(bw)..(i + bw + 1).min(n) {
                t.push((i, j, next()));
            }
        }
        let a = CsrMatrix::from_triplets(n, t);
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).cos()).collect();
        let x = BandLu::factor(&a).unwrap().solve(&b);
        let r = a.mul_vec(&x);
        let err = r.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "residual {err}");
    }

    #[test]
    fn lu_detects_singular() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(BandLu::factor(&a).is_err());
    }
}
