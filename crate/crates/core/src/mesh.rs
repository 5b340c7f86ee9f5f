//! Simplicial meshes of box domains and piecewise-linear discrete functions.
//!
//! Boxes are split into 2 triangles per square or 6 tetrahedra per cube
//! (Kuhn triangulation) with a deterministic vertex and cell ordering, so
//! meshes built from the same parameters are identical.

use std::io::{Read, Write};
use std::sync::Arc;

use crate::quadrature::{simplex_rule, SimplexRule};
use crate::scalar::Real;
use crate::{Error, Result};

/// Axis-aligned box `[0, e_1] x ... x [0, e_dim]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain<T> {
    pub extents: Vec<T>,
}

impl<T: Real> BoxDomain<T> {
    pub fn new(extents: Vec<T>) -> Result<Self> {
        if extents.is_empty() || extents.len() > 3 {
            return Err(Error::param("extents", "dimension must be 1..=3"));
        }
        if extents.iter().any(|e| *e <= T::zero()) {
            return Err(Error::param("extents", "every extent must be positive"));
        }
        Ok(BoxDomain { extents })
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn volume(&self) -> T {
        self.extents.iter().fold(T::one(), |v, e| v * *e)
    }

    pub fn contains(&self, x: &[T]) -> bool {
        let slack = T::cst(1e-12);
        x.len() == self.dim()
            && x.iter().zip(&self.extents).all(|(xi, ei)| {
                *xi >= -slack * *ei - T::min_positive_value()
                    && *xi <= *ei * (T::one() + slack)
            })
    }
}

/// Conforming simplicial mesh of a box with a quadrature rule shared by all
/// cells and precomputed cell geometry.
#[derive(Debug, Clone)]
pub struct Mesh<T> {
    dim: usize,
    divisions: Vec<usize>,
    extents: Vec<T>,
    vertices: Vec<T>,
    cells: Vec<usize>,
    volume: T,
    cell_measures: Vec<T>,
    /// Gradients of the dim+1 hat functions per cell, laid out
    /// `[cell][vertex][axis]`.
    cell_grads: Vec<T>,
    rule: SimplexRule<T>,
}

/// Default quadrature exactness; instances raise it as their nonlinearities
/// require.
pub const BASE_QUADRATURE_DEGREE: usize = 4;

/// Structured triangulation of a box domain.
pub fn build_box_mesh<T: Real>(
    dim: usize,
    divisions: &[usize],
    extents: &[T],
) -> Result<Mesh<T>> {
    if dim != 2 && dim != 3 {
        return Err(Error::param("dim", "must be 2 or 3"));
    }
    if divisions.len() != dim || extents.len() != dim {
        return Err(Error::param(
            "divisions",
            "divisions and extents must have length dim",
        ));
    }
    if divisions.contains(&0) {
        return Err(Error::param("divisions", "must be at least 1 per axis"));
    }
    if extents.iter().any(|e| *e <= T::zero()) {
        return Err(Error::param("extents", "must be positive"));
    }

    let npts: Vec<usize> = divisions.iter().map(|&d| d + 1).collect();
    let h: Vec<T> = divisions
        .iter()
        .zip(extents)
        .map(|(&d, &e)| e / T::of_usize(d))
        .collect();

    let mut vertices = Vec::new();
    if dim == 2 {
        for j in 0..npts[1] {
            for i in 0..npts[0] {
                vertices.push(h[0] * T::of_usize(i));
                vertices.push(h[1] * T::of_usize(j));
            }
        }
    } else {
        for k in 0..npts[2] {
            for j in 0..npts[1] {
                for i in 0..npts[0] {
                    vertices.push(h[0] * T::of_usize(i));
                    vertices.push(h[1] * T::of_usize(j));
                    vertices.push(h[2] * T::of_usize(k));
                }
            }
        }
    }

    let mut cells = Vec::new();
    if dim == 2 {
        let vid = |i: usize, j: usize| j * npts[0] + i;
        for j in 0..divisions[1] {
            for i in 0..divisions[0] {
                let (a, b, c, d) = (
                    vid(i, j),
                    vid(i + 1, j),
                    vid(i + 1, j + 1),
                    vid(i, j + 1),
                );
                cells.extend_from_slice(&[a, b, c]);
                cells.extend_from_slice(&[a, c, d]);
            }
        }
    } else {
        let vid = |i: usize, j: usize, k: usize| (k * npts[1] + j) * npts[0] + i;
        // Kuhn split: walk from the low corner to the high corner along each
        // axis permutation; all six tets share the main diagonal, which makes
        // the decomposition conforming across cubes.
        const PERMS: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        for k in 0..divisions[2] {
            for j in 0..divisions[1] {
                for i in 0..divisions[0] {
                    for perm in PERMS {
                        let mut corner = [i, j, k];
                        let mut tet = [vid(corner[0], corner[1], corner[2]), 0, 0, 0];
                        for (step, &axis) in perm.iter().enumerate() {
                            corner[axis] += 1;
                            tet[step + 1] = vid(corner[0], corner[1], corner[2]);
                        }
                        cells.extend_from_slice(&tet);
                    }
                }
            }
        }
    }

    let rule = simplex_rule(dim, BASE_QUADRATURE_DEGREE);
    let mut mesh = Mesh {
        dim,
        divisions: divisions.to_vec(),
        extents: extents.to_vec(),
        vertices,
        cells,
        volume: T::zero(),
        cell_measures: Vec::new(),
        cell_grads: Vec::new(),
        rule,
    };
    mesh.compute_geometry()?;
    Ok(mesh)
}

impl<T: Real> Mesh<T> {
    fn compute_geometry(&mut self) -> Result<()> {
        let nc = self.num_cells();
        let dim = self.dim;
        let nvpc = dim + 1;
        self.cell_measures = vec![T::zero(); nc];
        self.cell_grads = vec![T::zero(); nc * nvpc * dim];
        let mut volume = T::zero();
        for c in 0..nc {
            let cell = &self.cells[c * nvpc..(c + 1) * nvpc];
            let v0 = self.vertex(cell[0]).to_vec();
            // Edge matrix columns v_a - v_0.
            let mut e = [[T::zero(); 3]; 3];
            for a in 1..nvpc {
                let va = self.vertex(cell[a]);
                for d in 0..dim {
                    e[d][a - 1] = va[d] - v0[d];
                }
            }
            let det = if dim == 2 {
                e[0][0] * e[1][1] - e[0][1] * e[1][0]
            } else {
                e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1])
                    - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
                    + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0])
            };
            if det == T::zero() {
                return Err(Error::param("mesh", "degenerate cell"));
            }
            let measure = det.abs() / T::of_usize(if dim == 2 { 2 } else { 6 });
            self.cell_measures[c] = measure;
            volume += measure;

            // Rows of E^{-T} are the gradients of the barycentric coordinates
            // lambda_1..lambda_dim; lambda_0 closes the partition of unity.
            let inv = if dim == 2 {
                let inv_det = T::one() / det;
                [
                    [e[1][1] * inv_det, -e[0][1] * inv_det, T::zero()],
                    [-e[1][0] * inv_det, e[0][0] * inv_det, T::zero()],
                    [T::zero(), T::zero(), T::zero()],
                ]
            } else {
                let inv_det = T::one() / det;
                let cof = |r1: usize, c1: usize, r2: usize, c2: usize| {
                    e[r1][c1] * e[r2][c2] - e[r1][c2] * e[r2][c1]
                };
                [
                    [
                        cof(1, 1, 2, 2) * inv_det,
                        -cof(0, 1, 2, 2) * inv_det,
                        cof(0, 1, 1, 2) * inv_det,
                    ],
                    [
                        -cof(1, 0, 2, 2) * inv_det,
                        cof(0, 0, 2, 2) * inv_det,
                        -cof(0, 0, 1, 2) * inv_det,
                    ],
                    [
                        cof(1, 0, 2, 1) * inv_det,
                        -cof(0, 0, 2, 1) * inv_det,
                        cof(0, 0, 1, 1) * inv_det,
                    ],
                ]
            };
            let base = c * nvpc * dim;
            for a in 1..nvpc {
                for d in 0..dim {
                    let g = inv[a - 1][d];
                    self.cell_grads[base + a * dim + d] = g;
                    self.cell_grads[base + d] -= g;
                }
            }
        }
        self.volume = volume;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn divisions(&self) -> &[usize] {
        &self.divisions
    }

    pub fn extents(&self) -> &[T] {
        &self.extents
    }

    pub fn domain(&self) -> BoxDomain<T> {
        BoxDomain {
            extents: self.extents.clone(),
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len() / self.dim
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn volume(&self) -> T {
        self.volume
    }

    pub fn vertex(&self, i: usize) -> &[T] {
        &self.vertices[i * self.dim..(i + 1) * self.dim]
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let nvpc = self.dim + 1;
        &self.cells[c * nvpc..(c + 1) * nvpc]
    }

    pub fn cell_measure(&self, c: usize) -> T {
        self.cell_measures[c]
    }

    /// Gradient of hat function `a` on cell `c`.
    pub fn hat_gradient(&self, c: usize, a: usize) -> &[T] {
        let nvpc = self.dim + 1;
        let base = (c * nvpc + a) * self.dim;
        &self.cell_grads[base..base + self.dim]
    }

    pub fn quadrature(&self) -> &SimplexRule<T> {
        &self.rule
    }

    /// Replace the quadrature rule with one exact at least to `degree`.
    pub fn ensure_quadrature_degree(&mut self, degree: usize) {
        if self.rule.degree < degree {
            self.rule = simplex_rule(self.dim, degree);
        }
    }

    /// Barycentric coordinates of quadrature point `q` (length dim+1).
    pub fn quadrature_bary(&self, q: usize) -> Vec<T> {
        let p = self.rule.point(q);
        let mut bary = Vec::with_capacity(self.dim + 1);
        let mut rest = T::one();
        for &c in p {
            rest -= c;
        }
        bary.push(rest);
        bary.extend_from_slice(p);
        bary
    }

    /// Locate the cell containing `x`, returning `(cell, barycentric)`.
    pub fn locate(&self, x: &[T]) -> Option<(usize, Vec<T>)> {
        if x.len() != self.dim || !self.domain().contains(x) {
            return None;
        }
        let mut cube = Vec::with_capacity(self.dim);
        for d in 0..self.dim {
            let h = self.extents[d] / T::of_usize(self.divisions[d]);
            let idx = (x[d] / h).floor().to_usize().unwrap_or(0);
            cube.push(idx.min(self.divisions[d] - 1));
        }
        let cells_per_block = if self.dim == 2 { 2 } else { 6 };
        let block = if self.dim == 2 {
            cube[1] * self.divisions[0] + cube[0]
        } else {
            (cube[2] * self.divisions[1] + cube[1]) * self.divisions[0] + cube[0]
        };
        let tol = -T::cst(1e-12);
        let mut best: Option<(usize, Vec<T>, T)> = None;
        for c in block * cells_per_block..(block + 1) * cells_per_block {
            let bary = self.barycentric_in_cell(c, x);
            let min = bary.iter().fold(T::infinity(), |m, b| m.min(*b));
            if min >= tol {
                return Some((c, bary));
            }
            if best.as_ref().is_none_or(|(_, _, m)| min > *m) {
                best = Some((c, bary, min));
            }
        }
        // Rounding can push a point just outside every candidate simplex;
        // fall back to the closest one.
        best.map(|(c, bary, _)| (c, bary))
    }

    fn barycentric_in_cell(&self, c: usize, x: &[T]) -> Vec<T> {
        let nvpc = self.dim + 1;
        let cell = self.cell(c);
        let v0 = self.vertex(cell[0]);
        let mut bary = vec![T::zero(); nvpc];
        let mut rest = T::one();
        for a in 1..nvpc {
            let g = self.hat_gradient(c, a);
            let mut lam = T::zero();
            for d in 0..self.dim {
                lam += g[d] * (x[d] - v0[d]);
            }
            bary[a] = lam;
            rest -= lam;
        }
        bary[0] = rest;
        bary
    }

    /// Vertex-to-vertex adjacency (including self), rows sorted.
    pub fn vertex_adjacency(&self) -> Vec<Vec<usize>> {
        let nv = self.num_vertices();
        let nvpc = self.dim + 1;
        let mut adj: Vec<Vec<usize>> = (0..nv).map(|i| vec![i]).collect();
        for c in 0..self.num_cells() {
            let cell = &self.cells[c * nvpc..(c + 1) * nvpc];
            for &a in cell {
                for &b in cell {
                    if a != b {
                        adj[a].push(b);
                    }
                }
            }
        }
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
        }
        adj
    }
}

/// Nodal coefficient vector of a continuous piecewise-linear function.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFunction<T> {
    values: Vec<T>,
}

impl<T: Real> DiscreteFunction<T> {
    pub fn new(values: Vec<T>) -> Self {
        DiscreteFunction { values }
    }

    pub fn zeros(mesh: &Mesh<T>) -> Self {
        DiscreteFunction {
            values: vec![T::zero(); mesh.num_vertices()],
        }
    }

    pub fn constant(mesh: &Mesh<T>, s: T) -> Self {
        DiscreteFunction {
            values: vec![s; mesh.num_vertices()],
        }
    }

    pub fn from_fn(mesh: &Mesh<T>, f: impl Fn(&[T]) -> T) -> Self {
        DiscreteFunction {
            values: (0..mesh.num_vertices()).map(|i| f(mesh.vertex(i))).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn sup_diff(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    pub fn axpy(&mut self, t: T, dir: &[T]) {
        for (v, d) in self.values.iter_mut().zip(dir) {
            *v += t * *d;
        }
    }

    /// Value at quadrature point given barycentric coordinates on a cell.
    pub fn value_in_cell(&self, mesh: &Mesh<T>, c: usize, bary: &[T]) -> T {
        mesh.cell(c)
            .iter()
            .zip(bary)
            .map(|(&v, &l)| self.values[v] * l)
            .sum()
    }
}

/// Binary layout: all integers are little-endian u64, all reals
/// little-endian f64.
///
/// `dim, divisions[dim], extents[dim], count, values[count]`
pub fn write_binary<T: Real, W: Write>(
    mesh: &Mesh<T>,
    u: &DiscreteFunction<T>,
    w: &mut W,
) -> std::io::Result<()> {
    let put_u64 = |w: &mut W, v: u64| w.write_all(&v.to_le_bytes());
    let put_f64 = |w: &mut W, v: T| w.write_all(&v.as_f64().to_le_bytes());
    put_u64(w, mesh.dim() as u64)?;
    for &d in mesh.divisions() {
        put_u64(w, d as u64)?;
    }
    for &e in mesh.extents() {
        put_f64(w, e)?;
    }
    put_u64(w, u.len() as u64)?;
    for &v in u.values() {
        put_f64(w, v)?;
    }
    Ok(())
}

/// Header of a serialized discrete function.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionHeader {
    pub dim: usize,
    pub divisions: Vec<usize>,
    pub extents: Vec<f64>,
}

pub fn read_binary<R: Read>(r: &mut R) -> std::io::Result<(FunctionHeader, Vec<f64>)> {
    let get_u64 = |r: &mut R| -> std::io::Result<u64> {
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)?;
        Ok(u64::from_le_bytes(buf))
    };
    let dim = get_u64(r)? as usize;
    if dim == 0 || dim > 3 {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            "bad dimension in header",
        ));
    }
    let mut divisions = Vec::with_capacity(dim);
    for _ in 0..dim {
        divisions.push(get_u64(r)? as usize);
    }
    let get_f64 = |r: &mut R| -> std::io::Result<f64> {
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)?;
        Ok(f64::from_le_bytes(buf))
    };
    let mut extents = Vec::with_capacity(dim);
    for _ in 0..dim {
        extents.push(get_f64(r)?);
    }
    let count = {
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)?;
        u64::from_le_bytes(buf) as usize
    };
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        values.push(get_f64(r)?);
    }
    Ok((
        FunctionHeader {
            dim,
            divisions,
            extents,
        },
        values,
    ))
}

/// CSV export with columns `x,y[,z],u`, one row per vertex.
pub fn write_csv<T: Real, W: Write>(
    mesh: &Mesh<T>,
    u: &DiscreteFunction<T>,
    w: &mut W,
) -> std::io::Result<()> {
    let mut header: Vec<&str> = vec!["x", "y", "z"][..mesh.dim()].to_vec();
    header.push("u");
    writeln!(w, "{}", header.join(","))?;
    for i in 0..mesh.num_vertices() {
        let coords = mesh
            .vertex(i)
            .iter()
            .map(|c| format!("{:.17e}", c.as_f64()))
            .collect::<Vec<_>>()
            .join(",");
        writeln!(w, "{},{:.17e}", coords, u.values()[i].as_f64())?;
    }
    Ok(())
}

pub type SharedMesh<T> = Arc<Mesh<T>>;

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn unit_square_single_division() {
        let mesh = build_box_mesh::<f64>(2, &[1, 1], &[1.0, 1.0]).unwrap();
        assert_eq!(mesh.num_vertices(), 4);
        assert_eq!(mesh.num_cells(), 2);
        assert!((mesh.volume() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn square_counts_match_formula() {
        let mesh = build_box_mesh::<f64>(2, &[32, 32], &[1.0, 1.0]).unwrap();
        assert_eq!(mesh.num_vertices(), 33 * 33);
        assert_eq!(mesh.num_cells(), 2 * 32 * 32);
        assert!((mesh.volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cube_counts_match_formula() {
        let mesh = build_box_mesh::<f64>(3, &[4, 4, 4], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(mesh.num_vertices(), 125);
        assert_eq!(mesh.num_cells(), 384);
        assert!((mesh.volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn anisotropic_volume() {
        let mesh = build_box_mesh::<f64>(2, &[3, 5], &[2.0, 0.5]).unwrap();
        assert!((mesh.volume() - 1.0).abs() < 1e-14);
        let mesh = build_box_mesh::<f64>(3, &[2, 3, 4], &[1.0, 2.0, 3.0]).unwrap();
        assert!((mesh.volume() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn zero_extent_rejected() {
        assert!(build_box_mesh::<f64>(2, &[1, 1], &[1.0, 0.0]).is_err());
        assert!(build_box_mesh::<f64>(2, &[0, 1], &[1.0, 1.0]).is_err());
        assert!(build_box_mesh::<f64>(4, &[1, 1, 1, 1], &[1.0; 4]).is_err());
    }

    fn face_counts<T: Real>(mesh: &Mesh<T>) -> HashMap<Vec<usize>, usize> {
        let nvpc = mesh.dim() + 1;
        let mut faces: HashMap<Vec<usize>, usize> = HashMap::new();
        for c in 0..mesh.num_cells() {
            let cell = mesh.cell(c);
            for skip in 0..nvpc {
                let mut face: Vec<usize> = (0..nvpc)
                    .filter(|&a| a != skip)
                    .map(|a| cell[a])
                    .collect();
                face.sort_unstable();
                *faces.entry(face).or_insert(0) += 1;
            }
        }
        faces
    }

    #[test]
    fn meshes_are_conforming() {
        for mesh in [
            build_box_mesh::<f64>(2, &[3, 4], &[1.0, 2.0]).unwrap(),
            build_box_mesh::<f64>(2, &[1, 1], &[1.0, 1.0]).unwrap(),
        ] {
            for (_, count) in face_counts(&mesh) {
                assert!(count == 1 || count == 2);
            }
        }
        let mesh = build_box_mesh::<f64>(3, &[2, 2, 3], &[1.0, 1.0, 1.0]).unwrap();
        let faces = face_counts(&mesh);
        for count in faces.values() {
            assert!(*count == 1 || *count == 2);
        }
        // A conforming boundary has every boundary face counted once; the
        // total boundary area of triangle faces equals the box surface.
        let boundary: usize = faces.values().filter(|&&c| c == 1).count();
        assert!(boundary > 0);
    }

    #[test]
    fn hat_gradients_sum_to_zero_and_reproduce_linears() {
        let mesh = build_box_mesh::<f64>(3, &[2, 2, 2], &[1.0, 1.5, 0.5]).unwrap();
        for c in 0..mesh.num_cells() {
            for d in 0..3 {
                let sum: f64 = (0..4).map(|a| mesh.hat_gradient(c, a)[d]).sum();
                assert!(sum.abs() < 1e-12);
            }
            // nabla(sum_a x_a^{(d)} lambda_a) = e_d
            for d in 0..3 {
                for dd in 0..3 {
                    let g: f64 = (0..4)
                        .map(|a| mesh.vertex(mesh.cell(c)[a])[d] * mesh.hat_gradient(c, a)[dd])
                        .sum();
                    let want = if d == dd { 1.0 } else { 0.0 };
                    assert!((g - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn locate_finds_cells() {
        let mesh = build_box_mesh::<f64>(2, &[4, 4], &[1.0, 1.0]).unwrap();
        for &pt in &[[0.1, 0.2], [0.99, 0.01], [0.5, 0.5], [1.0, 1.0], [0.0, 0.0]] {
            let (c, bary) = mesh.locate(&pt).expect("point inside");
            assert!(c < mesh.num_cells());
            let x: f64 = (0..3)
                .map(|a| mesh.vertex(mesh.cell(c)[a])[0] * bary[a])
                .sum();
            let y: f64 = (0..3)
                .map(|a| mesh.vertex(mesh.cell(c)[a])[1] * bary[a])
                .sum();
            assert!((x - pt[0]).abs() < 1e-12 && (y - pt[1]).abs() < 1e-12);
        }
        assert!(mesh.locate(&[1.5, 0.5]).is_none());
    }

    #[test]
    fn binary_roundtrip() {
        let mesh = build_box_mesh::<f64>(2, &[2, 3], &[1.0, 2.0]).unwrap();
        let u = DiscreteFunction::from_fn(&mesh, |x| x[0] + 10.0 * x[1]);
        let mut buf = Vec::new();
        write_binary(&mesh, &u, &mut buf).unwrap();
        let (header, values) = read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(header.dim, 2);
        assert_eq!(header.divisions, vec![2, 3]);
        assert_eq!(header.extents, vec![1.0, 2.0]);
        assert_eq!(values, u.values());
    }

    #[test]
    fn csv_has_expected_shape() {
        let mesh = build_box_mesh::<f64>(2, &[1, 1], &[1.0, 1.0]).unwrap();
        let u = DiscreteFunction::constant(&mesh, 2.0);
        let mut buf = Vec::new();
        write_csv(&mesh, &u, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,y,u");
        assert_eq!(lines.len(), 1 + 4);
    }
}
