//! Finite-element discretization: energies, weak-form residual, Jacobian,
//! and the weighted Sobolev norm.
//!
//! Everything is assembled from one quadrature loop family with the same
//! rule, so the residual is the exact gradient of the discrete energy and
//! the Jacobian is its exact Hessian; finite-difference checks in the
//! oracle module certify both. For `p < 2` the gradient degeneracy at
//! `nabla u = 0` is regularized by `eps`, with the energy adjusted
//! consistently so the gradient identity survives.

use std::sync::Arc;

use crate::coefficient::{CoefficientField, FieldKind};
use crate::linalg::CsrMatrix;
use crate::mesh::{DiscreteFunction, Mesh, BASE_QUADRATURE_DEGREE};
use crate::nonlinearity::NonlinearitySpec;
use crate::scalar::Real;
use crate::{Error, Result};

/// Which nonlinearity a `j_energy` call refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Forcing {
    F,
    G,
}

/// Default regularization for `p < 2`.
pub const DEFAULT_EPS_SUBQUADRATIC: f64 = 1e-8;

/// One discretized problem: mesh, coercivity weight, exponent,
/// nonlinearities and their multipliers.
#[derive(Debug, Clone)]
pub struct ProblemInstance<T> {
    mesh: Arc<Mesh<T>>,
    alpha: CoefficientField<T>,
    p: T,
    f: NonlinearitySpec<T>,
    g: Option<NonlinearitySpec<T>>,
    lambda: T,
    mu: T,
    eps: T,
    pattern: Vec<Vec<usize>>,
    /// Hat-function values per quadrature point, `[q][vertex]`.
    bary: Vec<Vec<T>>,
    /// Rule weights rescaled so that `w * cell_measure` is the physical
    /// quadrature weight.
    scaled_w: Vec<T>,
    /// Coefficient values per `(cell, quadrature point)`.
    alpha_q: Vec<T>,
    f_spatial_q: Vec<T>,
    g_spatial_q: Option<Vec<T>>,
    /// At `p = 2` the norm part of the energy is the quadratic form
    /// `(stiffness + weighted mass)/2`; cached for fast norm and
    /// deflation-distance evaluation.
    quadratic_phi: Option<CsrMatrix<T>>,
}

impl<T: Real> ProblemInstance<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mut mesh: Mesh<T>,
        alpha: CoefficientField<T>,
        p: T,
        f: NonlinearitySpec<T>,
        g: Option<NonlinearitySpec<T>>,
        lambda: T,
        mu: T,
        eps: Option<T>,
    ) -> Result<Self> {
        let dim = mesh.dim();
        if p <= T::one() || p > T::of_usize(dim) {
            return Err(Error::param("p", "requires 1 < p <= dim"));
        }
        if lambda < T::zero() {
            return Err(Error::param("lambda", "must be nonnegative"));
        }
        if mu < T::zero() {
            return Err(Error::param("mu", "must be nonnegative"));
        }
        alpha.require_alpha_role()?;
        let two = T::cst(2.0);
        let eps = eps.unwrap_or(if p < two {
            T::cst(DEFAULT_EPS_SUBQUADRATIC)
        } else {
            T::zero()
        });
        if eps < T::zero() {
            return Err(Error::param("eps", "must be nonnegative"));
        }
        if eps == T::zero() && p < two {
            return Err(Error::param("eps", "p < 2 requires a positive eps"));
        }
        check_sampled_compatible(&alpha, &mesh)?;
        check_sampled_compatible(f.spatial(), &mesh)?;
        if let Some(g) = &g {
            check_sampled_compatible(g.spatial(), &mesh)?;
        }

        // Quadrature exact for the composed integrands: F along linear u has
        // cell degree q+1, plus one for an affine spatial factor.
        let q_f = f.growth_exponent().ceil().as_f64() as usize;
        let q_g = g
            .as_ref()
            .map(|g| g.growth_exponent().ceil().as_f64() as usize)
            .unwrap_or(0);
        mesh.ensure_quadrature_degree(BASE_QUADRATURE_DEGREE.max(q_f + 2).max(q_g + 2));

        let pattern = mesh.vertex_adjacency();
        let rule = mesh.quadrature().clone();
        let nq = rule.len();
        let bary: Vec<Vec<T>> = (0..nq).map(|q| mesh.quadrature_bary(q)).collect();
        let dfact = T::of_usize(if dim == 2 { 2 } else { 6 });
        let scaled_w: Vec<T> = rule.weights.iter().map(|&w| w * dfact).collect();

        let nc = mesh.num_cells();
        let nvpc = dim + 1;
        let mut alpha_q = vec![T::zero(); nc * nq];
        let mut f_spatial_q = vec![T::zero(); nc * nq];
        let mut g_spatial_q = g.as_ref().map(|_| vec![T::zero(); nc * nq]);
        let mut x = vec![T::zero(); dim];
        for c in 0..nc {
            let cell = mesh.cell(c).to_vec();
            for q in 0..nq {
                for d in 0..dim {
                    x[d] = T::zero();
                }
                for (a, &v) in cell.iter().enumerate().take(nvpc) {
                    let vx = mesh.vertex(v);
                    for d in 0..dim {
                        x[d] += bary[q][a] * vx[d];
                    }
                }
                alpha_q[c * nq + q] = alpha.value_in_cell(&mesh, c, &bary[q], &x);
                f_spatial_q[c * nq + q] = f.spatial().value_in_cell(&mesh, c, &bary[q], &x);
                if let (Some(gq), Some(g)) = (g_spatial_q.as_mut(), g.as_ref()) {
                    gq[c * nq + q] = g.spatial().value_in_cell(&mesh, c, &bary[q], &x);
                }
            }
        }

        let mut inst = ProblemInstance {
            mesh: Arc::new(mesh),
            alpha,
            p,
            f,
            g,
            lambda,
            mu,
            eps,
            pattern,
            bary,
            scaled_w,
            alpha_q,
            f_spatial_q,
            g_spatial_q,
            quadratic_phi: None,
        };
        if p == two {
            inst.quadratic_phi = Some(inst.assemble_quadratic_phi());
        }
        Ok(inst)
    }

    /// `stiffness + alpha-weighted mass`, the Hessian of `phi` at `p = 2`.
    fn assemble_quadratic_phi(&self) -> CsrMatrix<T> {
        let dim = self.mesh.dim();
        let nq = self.num_qp();
        let nvpc = dim + 1;
        let mut a = CsrMatrix::from_pattern(&self.pattern);
        let mut local = [[T::zero(); 4]; 4];
        for c in 0..self.mesh.num_cells() {
            let measure = self.mesh.cell_measure(c);
            let cell = self.mesh.cell(c);
            for i in 0..nvpc {
                let gi = self.mesh.hat_gradient(c, i);
                for j in 0..nvpc {
                    let gj = self.mesh.hat_gradient(c, j);
                    let gg = gi
                        .iter()
                        .zip(gj)
                        .fold(T::zero(), |acc, (x, y)| acc + *x * *y);
                    local[i][j] = measure * gg;
                }
            }
            for q in 0..nq {
                let w = self.scaled_w[q] * measure * self.alpha_q[c * nq + q];
                let bary = &self.bary[q];
                for i in 0..nvpc {
                    let wi = w * bary[i];
                    for j in 0..nvpc {
                        local[i][j] += wi * bary[j];
                    }
                }
            }
            for (i, &vi) in cell.iter().enumerate() {
                for (j, &vj) in cell.iter().enumerate() {
                    a.add(vi, vj, local[i][j]);
                }
            }
        }
        a
    }

    pub fn mesh(&self) -> &Mesh<T> {
        &self.mesh
    }

    pub fn shared_mesh(&self) -> Arc<Mesh<T>> {
        Arc::clone(&self.mesh)
    }

    pub fn alpha(&self) -> &CoefficientField<T> {
        &self.alpha
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn f(&self) -> &NonlinearitySpec<T> {
        &self.f
    }

    pub fn g(&self) -> Option<&NonlinearitySpec<T>> {
        self.g.as_ref()
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn with_lambda(&self, lambda: T) -> Self {
        let mut inst = self.clone();
        inst.lambda = lambda;
        inst
    }

    pub fn with_mu(&self, mu: T) -> Self {
        let mut inst = self.clone();
        inst.mu = mu;
        inst
    }

    fn num_qp(&self) -> usize {
        self.scaled_w.len()
    }

    fn cell_gradient(&self, c: usize, u: &[T], out: &mut [T]) {
        let dim = self.mesh.dim();
        let cell = self.mesh.cell(c);
        for d in 0..dim {
            out[d] = T::zero();
        }
        for (a, &v) in cell.iter().enumerate() {
            let g = self.mesh.hat_gradient(c, a);
            for d in 0..dim {
                out[d] += u[v] * g[d];
            }
        }
    }

    /// `(1/p) (int (eps^2+|grad u|^2)^{p/2} - eps^p  +  int alpha
    /// ((eps^2+u^2)^{p/2} - eps^p))`; reduces to the plain energy at
    /// `eps = 0` and keeps `phi(0) = 0` otherwise.
    pub fn phi_energy(&self, u: &DiscreteFunction<T>) -> T {
        self.check_len(u);
        if let Some(a) = &self.quadratic_phi {
            let au = a.matvec(u.values());
            let dot = u
                .values()
                .iter()
                .zip(&au)
                .fold(T::zero(), |acc, (x, y)| acc + *x * *y);
            return dot * T::cst(0.5);
        }
        let dim = self.mesh.dim();
        let nq = self.num_qp();
        let p = self.p;
        let half_p = p * T::cst(0.5);
        let eps_p = if self.eps == T::zero() {
            T::zero()
        } else {
            self.eps.powf(p)
        };
        let mut grad = vec![T::zero(); dim];
        let mut total = T::zero();
        for c in 0..self.mesh.num_cells() {
            let measure = self.mesh.cell_measure(c);
            self.cell_gradient(c, u.values(), &mut grad);
            let s2 = self.eps * self.eps
                + grad.iter().fold(T::zero(), |acc, g| acc + *g * *g);
            total += measure * (s2.powf(half_p) - eps_p) / p;
            let cell = self.mesh.cell(c);
            for q in 0..nq {
                let w = self.scaled_w[q] * measure;
                let uq: T = cell
                    .iter()
                    .zip(&self.bary[q])
                    .map(|(&v, &l)| u.values()[v] * l)
                    .sum();
                let su = self.eps * self.eps + uq * uq;
                total += w * self.alpha_q[c * nq + q] * (su.powf(half_p) - eps_p) / p;
            }
        }
        total
    }

    /// `int F(x, u(x)) dx` for the requested nonlinearity.
    pub fn j_energy(&self, u: &DiscreteFunction<T>, which: Forcing) -> T {
        self.check_len(u);
        let (spec, spatial_q) = match which {
            Forcing::F => (&self.f, &self.f_spatial_q),
            Forcing::G => (
                self.g.as_ref().expect("instance has no second nonlinearity"),
                self.g_spatial_q
                    .as_ref()
                    .expect("instance has no second nonlinearity"),
            ),
        };
        let nq = self.num_qp();
        let mut total = T::zero();
        for c in 0..self.mesh.num_cells() {
            let measure = self.mesh.cell_measure(c);
            let cell = self.mesh.cell(c);
            for q in 0..nq {
                let uq: T = cell
                    .iter()
                    .zip(&self.bary[q])
                    .map(|(&v, &l)| u.values()[v] * l)
                    .sum();
                let shape_f = spec
                    .shape_antiderivative(uq)
                    .expect("antiderivative quadrature failed during assembly");
                total += self.scaled_w[q] * measure * spatial_q[c * nq + q] * shape_f;
            }
        }
        total
    }

    /// `phi - lambda J_f - mu J_g`: the functional whose critical points are
    /// the discrete weak solutions.
    pub fn total_energy(&self, u: &DiscreteFunction<T>) -> T {
        let mut e = self.phi_energy(u) - self.lambda * self.j_energy(u, Forcing::F);
        if self.g.is_some() && self.mu != T::zero() {
            e -= self.mu * self.j_energy(u, Forcing::G);
        }
        e
    }

    /// Weak-form residual: component `i` tests the equation against hat
    /// function `i`. Exactly the gradient of [`Self::total_energy`].
    pub fn residual(&self, u: &DiscreteFunction<T>) -> Vec<T> {
        self.assemble_gradient(u, self.lambda, self.mu)
    }

    /// Gradient of `phi` alone (used by deflation distances).
    pub fn grad_phi(&self, u: &DiscreteFunction<T>) -> Vec<T> {
        if let Some(a) = &self.quadratic_phi {
            return a.matvec(u.values());
        }
        self.assemble_gradient(u, T::zero(), T::zero())
    }

    fn assemble_gradient(&self, u: &DiscreteFunction<T>, lambda: T, mu: T) -> Vec<T> {
        self.check_len(u);
        let dim = self.mesh.dim();
        let nq = self.num_qp();
        let p = self.p;
        let quadratic = p == T::cst(2.0);
        let ex = (p - T::cst(2.0)) * T::cst(0.5);
        let mut grad = vec![T::zero(); dim];
        let mut r = vec![T::zero(); self.mesh.num_vertices()];
        let use_g = self.g.is_some() && mu != T::zero();
        for c in 0..self.mesh.num_cells() {
            let measure = self.mesh.cell_measure(c);
            let cell = self.mesh.cell(c);
            self.cell_gradient(c, u.values(), &mut grad);
            let s2 = self.eps * self.eps
                + grad.iter().fold(T::zero(), |acc, g| acc + *g * *g);
            let c1 = if quadratic {
                T::one()
            } else if s2 == T::zero() {
                T::zero()
            } else {
                s2.powf(ex)
            };
            for (a, &v) in cell.iter().enumerate() {
                let ga = self.mesh.hat_gradient(c, a);
                let dot = grad
                    .iter()
                    .zip(ga)
                    .fold(T::zero(), |acc, (g, h)| acc + *g * *h);
                r[v] += measure * c1 * dot;
            }
            for q in 0..nq {
                let w = self.scaled_w[q] * measure;
                let uq: T = cell
                    .iter()
                    .zip(&self.bary[q])
                    .map(|(&v, &l)| u.values()[v] * l)
                    .sum();
                let su = self.eps * self.eps + uq * uq;
                let gm = if quadratic {
                    uq
                } else if su == T::zero() {
                    T::zero()
                } else {
                    su.powf(ex) * uq
                };
                let mut density = self.alpha_q[c * nq + q] * gm;
                if lambda != T::zero() {
                    density -= lambda
                        * self.f_spatial_q[c * nq + q]
                        * self.f.shape_value(uq);
                }
                if use_g {
                    let g = self.g.as_ref().unwrap();
                    let gq = self.g_spatial_q.as_ref().unwrap();
                    density -= mu * gq[c * nq + q] * g.shape_value(uq);
                }
                for (a, &v) in cell.iter().enumerate() {
                    r[v] += w * density * self.bary[q][a];
                }
            }
        }
        r
    }

    /// Exact derivative of the residual with respect to the nodal values.
    /// Symmetric with vertex-adjacency sparsity.
    pub fn jacobian(&self, u: &DiscreteFunction<T>) -> CsrMatrix<T> {
        self.check_len(u);
        let dim = self.mesh.dim();
        let nq = self.num_qp();
        let p = self.p;
        let two = T::cst(2.0);
        let quadratic = p == two;
        let ex1 = (p - two) * T::cst(0.5);
        let ex2 = (p - T::cst(4.0)) * T::cst(0.5);
        let mut grad = vec![T::zero(); dim];
        let mut j = CsrMatrix::from_pattern(&self.pattern);
        let use_g = self.g.is_some() && self.mu != T::zero();
        let nvpc = dim + 1;
        let mut local = [[T::zero(); 4]; 4];
        for c in 0..self.mesh.num_cells() {
            let measure = self.mesh.cell_measure(c);
            let cell = self.mesh.cell(c);
            self.cell_gradient(c, u.values(), &mut grad);
            let s2 = self.eps * self.eps
                + grad.iter().fold(T::zero(), |acc, g| acc + *g * *g);
            let c1 = if quadratic {
                T::one()
            } else if s2 == T::zero() {
                T::zero()
            } else {
                s2.powf(ex1)
            };
            let c2 = if s2 == T::zero() || quadratic {
                T::zero()
            } else {
                (p - two) * s2.powf(ex2)
            };
            for a in 0..nvpc {
                let ga = self.mesh.hat_gradient(c, a);
                let dot_a = grad
                    .iter()
                    .zip(ga)
                    .fold(T::zero(), |acc, (g, h)| acc + *g * *h);
                for b in 0..nvpc {
                    let gb = self.mesh.hat_gradient(c, b);
                    let gg = ga
                        .iter()
                        .zip(gb)
                        .fold(T::zero(), |acc, (x, y)| acc + *x * *y);
                    let dot_b = grad
                        .iter()
                        .zip(gb)
                        .fold(T::zero(), |acc, (g, h)| acc + *g * *h);
                    local[a][b] = measure * (c1 * gg + c2 * dot_a * dot_b);
                }
            }
            for q in 0..nq {
                let w = self.scaled_w[q] * measure;
                let bary = &self.bary[q];
                let uq: T = cell
                    .iter()
                    .zip(bary)
                    .map(|(&v, &l)| u.values()[v] * l)
                    .sum();
                let su = self.eps * self.eps + uq * uq;
                // d/du of (eps^2+u^2)^{(p-2)/2} u; identically 1 at p = 2.
                let hm = if quadratic {
                    T::one()
                } else if su == T::zero() {
                    T::zero()
                } else {
                    su.powf(ex2) * (su + (p - two) * uq * uq)
                };
                let mut density = self.alpha_q[c * nq + q] * hm;
                if self.lambda != T::zero() {
                    density -= self.lambda
                        * self.f_spatial_q[c * nq + q]
                        * self.f.shape_derivative(uq);
                }
                if use_g {
                    let g = self.g.as_ref().unwrap();
                    let gq = self.g_spatial_q.as_ref().unwrap();
                    density -= self.mu * gq[c * nq + q] * g.shape_derivative(uq);
                }
                let wd = w * density;
                for a in 0..nvpc {
                    let wa = wd * bary[a];
                    for b in 0..nvpc {
                        local[a][b] += wa * bary[b];
                    }
                }
            }
            for (a, &va) in cell.iter().enumerate() {
                for (b, &vb) in cell.iter().enumerate() {
                    j.add(va, vb, local[a][b]);
                }
            }
        }
        j
    }

    /// Weighted Sobolev norm `(p phi(u))^{1/p}`; zero only at `u = 0`.
    pub fn wnorm(&self, u: &DiscreteFunction<T>) -> T {
        let e = self.p * self.phi_energy(u);
        e.max(T::zero()).powf(T::one() / self.p)
    }

    /// Norm of the difference of two nodal vectors.
    pub fn wnorm_diff(&self, a: &DiscreteFunction<T>, b: &DiscreteFunction<T>) -> T {
        let diff = DiscreteFunction::new(
            a.values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| *x - *y)
                .collect(),
        );
        self.wnorm(&diff)
    }

    fn check_len(&self, u: &DiscreteFunction<T>) {
        assert_eq!(
            u.len(),
            self.mesh.num_vertices(),
            "discrete function does not live on the instance mesh"
        );
    }
}

fn check_sampled_compatible<T: Real>(
    field: &CoefficientField<T>,
    mesh: &Mesh<T>,
) -> Result<()> {
    if let FieldKind::Sampled {
        mesh: field_mesh, ..
    } = field.kind()
    {
        let same = field_mesh.dim() == mesh.dim()
            && field_mesh.divisions() == mesh.divisions()
            && field_mesh.extents() == mesh.extents();
        if !same {
            return Err(Error::param(
                "sampled field",
                "nodal values live on a different mesh than the instance",
            ));
        }
    }
    Ok(())
}
