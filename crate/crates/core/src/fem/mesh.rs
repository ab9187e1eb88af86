use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical coordinates; 1D meshes keep `y = 0`.
pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshShape {
    Interval { n_cells: usize, length: f64 },
    Rectangle { nx: usize, ny: usize, lx: f64, ly: f64 },
}

/// Uniform simplicial mesh of an interval `(0, L)` or rectangle `(0, lx) × (0, ly)`.
#[derive(Debug, Clone)]
pub struct Mesh {
    shape: MeshShape,
    coords: Vec<Point>,
    /// `dim + 1` node indices per cell, triangles counter-clockwise.
    connectivity: Vec<usize>,
    boundary: Vec<bool>,
    interior_index: Vec<Option<usize>>,
    interior_nodes: Vec<usize>,
}

/// Uniform partition of `(0, length)` into `n_cells` segments.
pub fn build_interval_mesh(n_cells: usize, length: f64) -> Result<Mesh> {
    if n_cells < 2 {
        return Err(Error::InvalidMesh(format!("interval needs at least 2 cells, got {n_cells}")));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidMesh(format!("interval length must be positive, got {length}")));
    }
    let h = length / n_cells as f64;
    let coords = (0..=n_cells).map(|i| [i as f64 * h, 0.0]).collect::<Vec<_>>();
    let connectivity = (0..n_cells).flat_map(|i| [i, i + 1]).collect();
    let boundary = (0..=n_cells).map(|i| i == 0 || i == n_cells).collect();
    Mesh::from_parts(MeshShape::Interval { n_cells, length }, coords, connectivity, boundary)
}

/// Uniform `nx × ny` grid, each cell split along its `(0,0)-(1,1)` diagonal.
pub fn build_rect_mesh(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Mesh> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidMesh(format!("rectangle needs at least 2x2 cells, got {nx}x{ny}")));
    }
    if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
        return Err(Error::InvalidMesh(format!("rectangle sides must be positive, got {lx}x{ly}")));
    }
    let (hx, hy) = (lx / nx as f64, ly / ny as f64);
    let node = |i: usize, j: usize| j * (nx + 1) + i;
    let mut coords = Vec::with_capacity((nx + 1) * (ny + 1));
    let mut boundary = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            coords.push([i as f64 * hx, j as f64 * hy]);
            boundary.push(i == 0 || j == 0 || i == nx || j == ny);
        }
    }
    let mut connectivity = Vec::with_capacity(6 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (n00, n10, n01, n11) = (node(i, j), node(i + 1, j), node(i, j + 1), node(i + 1, j + 1));
            connectivity.extend_from_slice(&[n00, n10, n11]);
            connectivity.extend_from_slice(&[n00, n11, n01]);
        }
    }
    Mesh::from_parts(MeshShape::Rectangle { nx, ny, lx, ly }, coords, connectivity, boundary)
}

impl Mesh {
    fn from_parts(
        shape: MeshShape,
        coords: Vec<Point>,
        connectivity: Vec<usize>,
        boundary: Vec<bool>,
    ) -> Result<Self> {
        let mut interior_index = vec![None; coords.len()];
        let mut interior_nodes = Vec::new();
        for (node, &on_boundary) in boundary.iter().enumerate() {
            if !on_boundary {
                interior_index[node] = Some(interior_nodes.len());
                interior_nodes.push(node);
            }
        }
        let mesh = Mesh { shape, coords, connectivity, boundary, interior_index, interior_nodes };
        for e in 0..mesh.num_cells() {
            let measure = mesh.signed_measure(e);
            if !(measure > 0.0) {
                return Err(Error::InvalidMesh(format!("cell {e} has non-positive measure {measure:e}")));
            }
        }
        Ok(mesh)
    }

    pub fn shape(&self) -> MeshShape {
        self.shape
    }

    pub fn dimension(&self) -> usize {
        match self.shape {
            MeshShape::Interval { .. } => 1,
            MeshShape::Rectangle { .. } => 2,
        }
    }

    pub fn nodes_per_cell(&self) -> usize {
        self.dimension() + 1
    }

    pub fn num_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn num_cells(&self) -> usize {
        self.connectivity.len() / self.nodes_per_cell()
    }

    pub fn num_interior(&self) -> usize {
        self.interior_nodes.len()
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    pub fn cell(&self, e: usize) -> &[usize] {
        let k = self.nodes_per_cell();
        &self.connectivity[e * k..(e + 1) * k]
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary[node]
    }

    pub fn interior_index(&self, node: usize) -> Option<usize> {
        self.interior_index[node]
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior_nodes
    }

    /// `|Ω|` of the meshed domain.
    pub fn domain_measure(&self) -> f64 {
        match self.shape {
            MeshShape::Interval { length, .. } => length,
            MeshShape::Rectangle { lx, ly, .. } => lx * ly,
        }
    }

    /// Extent of the domain along each axis (`ly = 0` in 1D).
    pub fn extent(&self) -> [f64; 2] {
        match self.shape {
            MeshShape::Interval { length, .. } => [length, 0.0],
            MeshShape::Rectangle { lx, ly, .. } => [lx, ly],
        }
    }

    /// Length (1D) or signed area (2D) of cell `e`.
    pub fn signed_measure(&self, e: usize) -> f64 {
        let c = self.cell(e);
        match self.dimension() {
            1 => self.coords[c[1]][0] - self.coords[c[0]][0],
            _ => {
                let [a, b, d] = [self.coords[c[0]], self.coords[c[1]], self.coords[c[2]]];
                0.5 * ((b[0] - a[0]) * (d[1] - a[1]) - (d[0] - a[0]) * (b[1] - a[1]))
            }
        }
    }

    /// Short identifier used in reports, e.g. `interval-64x1` or `rect-16x16x1x1`.
    pub fn id(&self) -> String {
        match self.shape {
            MeshShape::Interval { n_cells, length } => format!("interval-{n_cells}x{length}"),
            MeshShape::Rectangle { nx, ny, lx, ly } => format!("rect-{nx}x{ny}x{lx}x{ly}"),
        }
    }

    /// Scatter interior coefficients into a full nodal vector with zero boundary values.
    pub fn expand(&self, interior: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.num_nodes()];
        for (k, &node) in self.interior_nodes.iter().enumerate() {
            full[node] = interior[k];
        }
        full
    }

    /// Nodal interpolant of `func` restricted to the interior nodes.
    pub fn interpolate(&self, func: impl Fn(Point) -> f64) -> Vec<f64> {
        self.interior_nodes.iter().map(|&n| func(self.coords[n])).collect()
    }

    /// Value at `p` of the P1 function with interior coefficients `u`; zero outside the domain.
    pub fn evaluate(&self, u: &[f64], p: Point) -> f64 {
        let full = |node: usize| self.interior_index[node].map_or(0.0, |k| u[k]);
        // local cell index and offset, clamped so the far edge belongs to the last cell
        let locate = |x: f64, len: f64, n: usize| {
            let s = x / len * n as f64;
            let i = (s.floor().max(0.0) as usize).min(n - 1);
            (i, s - i as f64)
        };
        match self.shape {
            MeshShape::Interval { n_cells, length } => {
                if !(0.0..=length).contains(&p[0]) {
                    return 0.0;
                }
                let (i, xi) = locate(p[0], length, n_cells);
                (1.0 - xi) * full(i) + xi * full(i + 1)
            }
            MeshShape::Rectangle { nx, ny, lx, ly } => {
                if !(0.0..=lx).contains(&p[0]) || !(0.0..=ly).contains(&p[1]) {
                    return 0.0;
                }
                let (i, xi) = locate(p[0], lx, nx);
                let (j, eta) = locate(p[1], ly, ny);
                let node = |a: usize, b: usize| full((j + b) * (nx + 1) + i + a);
                let (u00, u10, u01, u11) = (node(0, 0), node(1, 0), node(0, 1), node(1, 1));
                if xi >= eta {
                    u00 + xi * (u10 - u00) + eta * (u11 - u10)
                } else {
                    u00 + eta * (u01 - u00) + xi * (u11 - u01)
                }
            }
        }
    }

    /// Interior coefficients on `self` of a P1 function given on a coarser nested mesh.
    pub fn prolongate_from(&self, coarse: &Mesh, u: &[f64]) -> Vec<f64> {
        self.interpolate(|p| coarse.evaluate(u, p))
    }

    /// Maximum spacing of the uniform grid.
    pub fn mesh_size(&self) -> f64 {
        match self.shape {
            MeshShape::Interval { n_cells, length } => length / n_cells as f64,
            MeshShape::Rectangle { nx, ny, lx, ly } => (lx / nx as f64).max(ly / ny as f64),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prolongation_reproduces_coarse_function() {
        let coarse = build_rect_mesh(4, 3, 2.0, 1.5).unwrap();
        let fine = build_rect_mesh(8, 6, 2.0, 1.5).unwrap();
        let u = coarse.interpolate(|p| p[0] * (2.0 - p[0]) * p[1] * (1.5 - p[1]) + 0.1 * p[0] * p[1]);
        let v = fine.prolongate_from(&coarse, &u);
        for (k, &n) in coarse.interior_nodes().iter().enumerate() {
            let p = coarse.coords()[n];
            let kf = fine.interior_nodes().iter().position(|&m| fine.coords()[m] == p).unwrap();
            assert!((v[kf] - u[k]).abs() < 1e-14);
        }
        // linear along the fine midpoint between two coarse nodes
        let mid = [0.75, 0.5];
        let kf = fine.interior_nodes().iter().position(|&m| fine.coords()[m] == mid).unwrap();
        assert!((v[kf] - coarse.evaluate(&u, mid)).abs() < 1e-15);
        let c1 = build_interval_mesh(4, 1.0).unwrap();
        let f1 = build_interval_mesh(8, 1.0).unwrap();
        assert_eq!(f1.prolongate_from(&c1, &[1.0, 2.0, 1.0]), vec![0.5, 1.0, 1.5, 2.0, 1.5, 1.0, 0.5]);
    }

    #[test]
    fn interval_two_cells() {
        let mesh = build_interval_mesh(2, 1.0).unwrap();
        let xs: Vec<f64> = mesh.coords().iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![0.0, 0.5, 1.0]);
        assert_eq!(mesh.num_interior(), 1);
        assert!(mesh.is_boundary(0) && mesh.is_boundary(2) && !mesh.is_boundary(1));
    }

    #[test]
    fn interval_four_cells_interior() {
        let mesh = build_interval_mesh(4, 1.0).unwrap();
        let xs: Vec<f64> = mesh.interior_nodes().iter().map(|&n| mesh.coords()[n][0]).collect();
        assert_eq!(xs, vec![0.25, 0.5, 0.75]);
    }

    #[test]
    fn too_few_cells_rejected() {
        assert!(matches!(build_interval_mesh(1, 1.0), Err(Error::InvalidMesh(_))));
        assert!(matches!(build_rect_mesh(2, 1, 1.0, 1.0), Err(Error::InvalidMesh(_))));
        assert!(matches!(build_interval_mesh(4, 0.0), Err(Error::InvalidMesh(_))));
    }

    #[test]
    fn rect_counts() {
        let mesh = build_rect_mesh(2, 2, 1.0, 1.0).unwrap();
        assert_eq!(mesh.num_cells(), 8);
        assert_eq!(mesh.num_interior(), 1);
        assert_eq!(mesh.coords()[mesh.interior_nodes()[0]], [0.5, 0.5]);
        assert_eq!(build_rect_mesh(3, 3, 1.0, 1.0).unwrap().num_interior(), 4);
    }

    #[test]
    fn rect_orientation_and_boundary_flags() {
        let mesh = build_rect_mesh(5, 3, 2.0, 1.5).unwrap();
        for e in 0..mesh.num_cells() {
            assert!(mesh.signed_measure(e) > 0.0);
        }
        for (n, p) in mesh.coords().iter().enumerate() {
            let on_edge = p[0] == 0.0 || p[1] == 0.0 || p[0] == 2.0 || (p[1] - 1.5).abs() < 1e-15;
            assert_eq!(mesh.is_boundary(n), on_edge);
        }
        let mut seen: Vec<usize> = mesh.interior_nodes().iter().map(|&n| mesh.interior_index(n).unwrap()).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..mesh.num_interior()).collect::<Vec<_>>());
    }
}
