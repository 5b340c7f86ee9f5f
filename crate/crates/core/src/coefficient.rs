//! Spatial coefficient fields on box domains with cached bounds and integral.

use std::sync::Arc;

use crate::mesh::{BoxDomain, Mesh};
use crate::scalar::Real;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub enum FieldKind<T> {
    Constant(T),
    Affine { base: T, slope: Vec<T> },
    Sampled { mesh: Arc<Mesh<T>>, values: Vec<T> },
}

/// Coefficient on a box domain with queryable pointwise values and exact
/// (constant/affine) or piecewise-linear (sampled) bounds and integral.
///
/// For sampled fields the cached infimum/supremum range over nodal values,
/// which approximates the essential bounds of the underlying function.
#[derive(Debug, Clone)]
pub struct CoefficientField<T> {
    kind: FieldKind<T>,
    extents: Vec<T>,
    bounds: (T, T),
    integral: T,
}

impl<T: Real> CoefficientField<T> {
    pub fn constant(value: T, domain: &BoxDomain<T>) -> Self {
        CoefficientField {
            kind: FieldKind::Constant(value),
            extents: domain.extents.clone(),
            bounds: (value, value),
            integral: value * domain.volume(),
        }
    }

    /// `base + slope . x` on the box; bounds and integral are closed forms.
    pub fn affine(base: T, slope: Vec<T>, domain: &BoxDomain<T>) -> Result<Self> {
        if slope.len() != domain.dim() {
            return Err(Error::param("slope", "length must equal domain dimension"));
        }
        let mut lo = base;
        let mut hi = base;
        let mut mean = base;
        for (s, e) in slope.iter().zip(&domain.extents) {
            let delta = *s * *e;
            lo += delta.min(T::zero());
            hi += delta.max(T::zero());
            mean += delta * T::cst(0.5);
        }
        Ok(CoefficientField {
            kind: FieldKind::Affine {
                base,
                slope,
            },
            extents: domain.extents.clone(),
            bounds: (lo, hi),
            integral: mean * domain.volume(),
        })
    }

    /// Nodal values on a mesh, interpolated piecewise-linearly.
    pub fn sampled(mesh: Arc<Mesh<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != mesh.num_vertices() {
            return Err(Error::param(
                "sampled",
                format!(
                    "got {} nodal values for a mesh with {} vertices",
                    values.len(),
                    mesh.num_vertices()
                ),
            ));
        }
        let lo = values.iter().fold(T::infinity(), |m, v| m.min(*v));
        let hi = values.iter().fold(T::neg_infinity(), |m, v| m.max(*v));
        // Exact integral of the piecewise-linear interpolant: cell measure
        // times the vertex average.
        let nvpc = mesh.dim() + 1;
        let mut integral = T::zero();
        for c in 0..mesh.num_cells() {
            let mean: T = mesh.cell(c).iter().map(|&v| values[v]).sum::<T>()
                / T::of_usize(nvpc);
            integral += mesh.cell_measure(c) * mean;
        }
        let extents = mesh.extents().to_vec();
        Ok(CoefficientField {
            kind: FieldKind::Sampled { mesh, values },
            extents,
            bounds: (lo, hi),
            integral,
        })
    }

    pub fn kind(&self) -> &FieldKind<T> {
        &self.kind
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, FieldKind::Constant(_))
    }

    pub fn domain(&self) -> BoxDomain<T> {
        BoxDomain {
            extents: self.extents.clone(),
        }
    }

    pub fn inf(&self) -> T {
        self.bounds.0
    }

    pub fn sup(&self) -> T {
        self.bounds.1
    }

    pub fn integral(&self) -> T {
        self.integral
    }

    pub fn abs_sup(&self) -> T {
        self.bounds.0.abs().max(self.bounds.1.abs())
    }

    /// Pointwise value; errors when `x` lies outside the bounding box.
    pub fn value(&self, x: &[T]) -> Result<T> {
        if !self.domain().contains(x) {
            return Err(Error::OutsideDomain);
        }
        Ok(match &self.kind {
            FieldKind::Constant(v) => *v,
            FieldKind::Affine { base, slope } => {
                let mut v = *base;
                for (s, xi) in slope.iter().zip(x) {
                    v += *s * *xi;
                }
                v
            }
            FieldKind::Sampled { mesh, values } => {
                let (c, bary) = mesh.locate(x).ok_or(Error::OutsideDomain)?;
                mesh.cell(c)
                    .iter()
                    .zip(&bary)
                    .map(|(&v, &l)| values[v] * l)
                    .sum()
            }
        })
    }

    /// Value at a known cell and barycentric position with physical point
    /// `x`; assembly's hot path, skips the containment check.
    pub fn value_in_cell(&self, mesh: &Mesh<T>, c: usize, bary: &[T], x: &[T]) -> T {
        match &self.kind {
            FieldKind::Constant(v) => *v,
            FieldKind::Affine { base, slope } => {
                let mut v = *base;
                for (s, xi) in slope.iter().zip(x) {
                    v += *s * *xi;
                }
                v
            }
            FieldKind::Sampled { values, .. } => mesh
                .cell(c)
                .iter()
                .zip(bary)
                .map(|(&v, &l)| values[v] * l)
                .sum(),
        }
    }

    /// Check the requirements for the coercivity weight: `inf > 0`.
    pub fn require_alpha_role(&self) -> Result<()> {
        if self.inf() <= T::zero() {
            return Err(Error::param("alpha", "requires a strictly positive infimum"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_box_mesh;

    fn unit_square() -> BoxDomain<f64> {
        BoxDomain::new(vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn constant_field_caches() {
        let f = CoefficientField::constant(3.0, &BoxDomain::new(vec![2.0, 1.0]).unwrap());
        assert_eq!(f.inf(), 3.0);
        assert_eq!(f.sup(), 3.0);
        assert_eq!(f.integral(), 6.0);
        assert_eq!(f.value(&[1.0, 0.5]).unwrap(), 3.0);
    }

    #[test]
    fn affine_field_closed_forms() {
        // 1 + 0.5 x1 on the unit square.
        let f = CoefficientField::affine(1.0, vec![0.5, 0.0], &unit_square()).unwrap();
        assert_eq!(f.inf(), 1.0);
        assert_eq!(f.sup(), 1.5);
        assert_eq!(f.integral(), 1.25);
        assert_eq!(f.value(&[1.0, 0.0]).unwrap(), 1.5);

        // Negative slope flips which corner attains the bound.
        let f = CoefficientField::affine(2.0, vec![-1.0, 0.5], &unit_square()).unwrap();
        assert_eq!(f.inf(), 1.0);
        assert_eq!(f.sup(), 2.5);
        assert!((f.integral() - 1.75).abs() < 1e-15);
    }

    #[test]
    fn out_of_domain_value_errors() {
        let f = CoefficientField::constant(1.0, &unit_square());
        assert!(matches!(
            f.value(&[1.5, 0.0]),
            Err(crate::Error::OutsideDomain)
        ));
    }

    #[test]
    fn sampled_field_matches_linear_interpolant() {
        let mesh = Arc::new(build_box_mesh::<f64>(2, &[4, 4], &[1.0, 1.0]).unwrap());
        let values: Vec<f64> = (0..mesh.num_vertices())
            .map(|i| {
                let v = mesh.vertex(i);
                1.0 + 0.5 * v[0]
            })
            .collect();
        let f = CoefficientField::sampled(mesh, values).unwrap();
        assert_eq!(f.inf(), 1.0);
        assert_eq!(f.sup(), 1.5);
        assert!((f.integral() - 1.25).abs() < 1e-14);
        assert!((f.value(&[0.3, 0.7]).unwrap() - 1.15).abs() < 1e-13);
    }

    #[test]
    fn sampled_length_mismatch_rejected() {
        let mesh = Arc::new(build_box_mesh::<f64>(2, &[2, 2], &[1.0, 1.0]).unwrap());
        assert!(CoefficientField::sampled(mesh, vec![1.0; 3]).is_err());
    }

    #[test]
    fn alpha_role_requires_positive_inf() {
        let ok = CoefficientField::constant(0.5, &unit_square());
        assert!(ok.require_alpha_role().is_ok());
        let bad = CoefficientField::affine(0.5, vec![-1.0, 0.0], &unit_square()).unwrap();
        assert!(bad.require_alpha_role().is_err());
    }
}
