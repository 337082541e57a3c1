//! Piecewise-linear Galerkin discretization of quasilinear Dirichlet problems,
//! solved by damped Newton iteration.
//!
//! The equation `Σ a_ij(∇u) ∂ᵢ∂ⱼu = 0` is written in flux form
//! `div F(∇u) = 0` with `∂Fᵢ/∂pⱼ = a_ij`, so the Newton Jacobian is the
//! stiffness matrix of `a_ij` at the current gradient.

use std::fmt;
use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMat};
use faer::{Mat, Side};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{LoopTag, MeshedDomain};
use crate::profile::BoundaryProfile;
use crate::Point;

/// User-supplied flux `F(p)` together with its Jacobian `a_ij(p)`.
pub trait Flux: Send + Sync + fmt::Debug {
    fn flux(&self, p: Point) -> Point;
    fn jacobian(&self, p: Point) -> [[f64; 2]; 2];
}

#[derive(Debug, Clone)]
pub enum CoefficientField {
    Laplace,
    MinimalSurface,
    Custom(Arc<dyn Flux>),
}

impl CoefficientField {
    pub fn name(&self) -> &'static str {
        match self {
            CoefficientField::Laplace => "laplace",
            CoefficientField::MinimalSurface => "minimal_surface",
            CoefficientField::Custom(_) => "custom_flux",
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, CoefficientField::Laplace)
    }

    pub fn flux(&self, p: Point) -> Point {
        match self {
            CoefficientField::Laplace => p,
            CoefficientField::MinimalSurface => {
                let w = (1.0 + p[0] * p[0] + p[1] * p[1]).sqrt();
                [p[0] / w, p[1] / w]
            }
            CoefficientField::Custom(f) => f.flux(p),
        }
    }

    pub fn jacobian(&self, p: Point) -> [[f64; 2]; 2] {
        match self {
            CoefficientField::Laplace => [[1.0, 0.0], [0.0, 1.0]],
            CoefficientField::MinimalSurface => {
                let q = 1.0 + p[0] * p[0] + p[1] * p[1];
                let s = q.powf(-0.5);
                [
                    [s * (1.0 - p[0] * p[0] / q), -s * p[0] * p[1] / q],
                    [-s * p[1] * p[0] / q, s * (1.0 - p[1] * p[1] / q)],
                ]
            }
            CoefficientField::Custom(f) => f.jacobian(p),
        }
    }
}

/// Eigenvalues of a symmetric 2×2 matrix, ascending.
fn sym_eigen(a: [[f64; 2]; 2]) -> (f64, f64) {
    let m = 0.5 * (a[0][0] + a[1][1]);
    let d = (0.25 * (a[0][0] - a[1][1]).powi(2) + a[0][1] * a[0][1]).sqrt();
    (m - d, m + d)
}

fn check_elliptic(a: [[f64; 2]; 2], sample: Point) -> Result<(f64, f64)> {
    let scale = a[0][0].abs().max(a[1][1].abs()).max(a[0][1].abs()).max(a[1][0].abs());
    if !(scale.is_finite()) || (a[0][1] - a[1][0]).abs() > 1e-12 * scale.max(1e-300) {
        return Err(Error::EllipticityFailure { sample, detail: format!("non-symmetric Jacobian {a:?}") });
    }
    let (lo, hi) = sym_eigen(a);
    if !(lo > 0.0) {
        return Err(Error::EllipticityFailure { sample, detail: format!("eigenvalues ({lo}, {hi}) not positive") });
    }
    Ok((lo, hi))
}

/// Smallest and largest eigenvalue of `a_ij` over the samples, and their ratio.
pub fn ellipticity_check(coeff: &CoefficientField, samples: &[Point]) -> Result<(f64, f64, f64)> {
    if samples.is_empty() {
        return Err(Error::Config("ellipticity check needs at least one gradient sample".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &p in samples {
        let (a, b) = check_elliptic(coeff.jacobian(p), p)?;
        lo = lo.min(a);
        hi = hi.max(b);
    }
    Ok((lo, hi, hi / lo))
}

/// Boundary values: `ψ` on the outer circle, `H` on the inner one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletData {
    pub outer_profile: BoundaryProfile,
    pub inner_constant: Option<f64>,
}

impl DirichletData {
    pub fn disk(psi: BoundaryProfile) -> Self {
        DirichletData { outer_profile: psi, inner_constant: None }
    }

    pub fn annulus(psi: BoundaryProfile, h: f64) -> Self {
        DirichletData { outer_profile: psi, inner_constant: Some(h) }
    }

    pub fn validate(&self, mesh: &MeshedDomain) -> Result<()> {
        let loops = mesh.boundary_loops().len();
        match (loops, self.inner_constant) {
            (1, None) | (2, Some(_)) => Ok(()),
            (1, Some(_)) => Err(Error::DataMismatch("inner constant given for a simply connected domain".into())),
            (2, None) => Err(Error::DataMismatch("annulus needs an inner boundary constant".into())),
            _ => Err(Error::DataMismatch(format!("unsupported number of boundary loops: {loops}"))),
        }
    }

    /// Prescribed value at a boundary vertex.
    pub fn boundary_value(&self, mesh: &MeshedDomain, v: usize) -> Option<f64> {
        match mesh.boundary_tag(v)? {
            LoopTag::Outer => Some(self.outer_profile.eval(mesh.boundary_param(v)?)),
            LoopTag::Inner => self.inner_constant,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub min_step: f64,
    pub parallel: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol: 1e-10, max_iter: 50, min_step: 2f64.powi(-20), parallel: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonReport {
    pub iters: usize,
    pub residual: f64,
    #[serde(skip)]
    pub history: Vec<f64>,
}

/// Nodal P1 field on a mesh with its per-triangle gradients and a recovered
/// continuous nodal gradient.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    mesh: Arc<MeshedDomain>,
    coefficient: CoefficientField,
    data: Option<DirichletData>,
    nodal_values: Vec<f64>,
    gradients: Vec<Point>,
    recovered: Vec<Point>,
    newton: NewtonReport,
}

/// JSON form of a solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionExport {
    pub nodal_values: Vec<f64>,
    pub newton: NewtonReport,
}

impl DiscreteSolution {
    /// Wraps nodal values that did not come from a solve (interpolated fields).
    pub fn from_nodal(mesh: Arc<MeshedDomain>, values: Vec<f64>, coefficient: CoefficientField) -> Result<Self> {
        if values.len() != mesh.vertices().len() {
            return Err(Error::DataMismatch(format!(
                "{} nodal values for {} vertices",
                values.len(),
                mesh.vertices().len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::DataMismatch("non-finite nodal value".into()));
        }
        let gradients = triangle_gradients(&mesh, &values);
        let recovered = recover_gradients(&mesh, &gradients);
        Ok(DiscreteSolution {
            mesh,
            coefficient,
            data: None,
            nodal_values: values,
            gradients,
            recovered,
            newton: NewtonReport { iters: 0, residual: 0.0, history: Vec::new() },
        })
    }

    /// Interpolates a function at the mesh vertices.
    pub fn interpolate(
        mesh: Arc<MeshedDomain>,
        f: impl Fn(Point) -> f64,
        coefficient: CoefficientField,
    ) -> Result<Self> {
        let values = mesh.vertices().iter().map(|&p| f(p)).collect();
        Self::from_nodal(mesh, values, coefficient)
    }

    pub fn mesh(&self) -> &MeshedDomain {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<MeshedDomain> {
        &self.mesh
    }

    pub fn coefficient(&self) -> &CoefficientField {
        &self.coefficient
    }

    pub fn data(&self) -> Option<&DirichletData> {
        self.data.as_ref()
    }

    pub fn nodal_values(&self) -> &[f64] {
        &self.nodal_values
    }

    pub fn triangle_gradient(&self, t: usize) -> Point {
        self.gradients[t]
    }

    pub fn triangle_gradients(&self) -> &[Point] {
        &self.gradients
    }

    /// Area-weighted average of the gradients of the triangles around `v`.
    pub fn nodal_gradient(&self, v: usize) -> Point {
        self.recovered[v]
    }

    pub fn newton(&self) -> &NewtonReport {
        &self.newton
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.nodal_values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
    }

    /// Piecewise-linear value at a point of the mesh.
    pub fn value_at(&self, p: Point) -> Option<f64> {
        let (t, w) = self.mesh.locate(p)?;
        let tri = self.mesh.triangles()[t];
        Some((0..3).map(|k| w[k] * self.nodal_values[tri[k]]).sum())
    }

    /// Linear interpolation of the recovered nodal gradient.
    pub fn recovered_gradient_at(&self, p: Point) -> Option<Point> {
        let (t, w) = self.mesh.locate(p)?;
        Some(self.recovered_gradient_in(t, w))
    }

    pub fn recovered_gradient_in(&self, t: usize, w: [f64; 3]) -> Point {
        let tri = self.mesh.triangles()[t];
        let mut g = [0.0; 2];
        for k in 0..3 {
            let r = self.recovered[tri[k]];
            g[0] += w[k] * r[0];
            g[1] += w[k] * r[1];
        }
        g
    }

    pub fn to_export(&self) -> SolutionExport {
        SolutionExport { nodal_values: self.nodal_values.clone(), newton: self.newton.clone() }
    }
}

/// Gradients of the three barycentric basis functions of a triangle, and its area.
fn basis_gradients(a: Point, b: Point, c: Point) -> ([Point; 3], f64) {
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let area = 0.5 * det;
    let g = [
        [(b[1] - c[1]) / det, (c[0] - b[0]) / det],
        [(c[1] - a[1]) / det, (a[0] - c[0]) / det],
        [(a[1] - b[1]) / det, (b[0] - a[0]) / det],
    ];
    (g, area)
}

fn triangle_basis(mesh: &MeshedDomain, t: usize) -> ([Point; 3], f64) {
    let [i, j, k] = mesh.triangles()[t];
    let v = mesh.vertices();
    basis_gradients(v[i], v[j], v[k])
}

fn triangle_gradients(mesh: &MeshedDomain, u: &[f64]) -> Vec<Point> {
    (0..mesh.triangles().len())
        .map(|t| {
            let (g, _) = triangle_basis(mesh, t);
            let tri = mesh.triangles()[t];
            let mut out = [0.0; 2];
            for k in 0..3 {
                out[0] += u[tri[k]] * g[k][0];
                out[1] += u[tri[k]] * g[k][1];
            }
            out
        })
        .collect()
}

fn recover_gradients(mesh: &MeshedDomain, grads: &[Point]) -> Vec<Point> {
    (0..mesh.vertices().len())
        .map(|v| {
            let mut acc = [0.0; 2];
            let mut w = 0.0;
            for &t in mesh.vertex_triangles(v) {
                let a = mesh.triangle_area(t);
                acc[0] += a * grads[t][0];
                acc[1] += a * grads[t][1];
                w += a;
            }
            [acc[0] / w, acc[1] / w]
        })
        .collect()
}

/// Per-element contributions: residual entries and the 3×3 Jacobian block.
struct ElementTerms {
    residual: [f64; 3],
    jacobian: [[f64; 3]; 3],
}

fn element_terms(mesh: &MeshedDomain, coeff: &CoefficientField, u: &[f64], t: usize) -> Result<ElementTerms> {
    let (g, area) = triangle_basis(mesh, t);
    let tri = mesh.triangles()[t];
    let mut p = [0.0; 2];
    for k in 0..3 {
        p[0] += u[tri[k]] * g[k][0];
        p[1] += u[tri[k]] * g[k][1];
    }
    let f = coeff.flux(p);
    let a = coeff.jacobian(p);
    check_elliptic(a, mesh.centroid(t))?;
    let mut residual = [0.0; 3];
    let mut jacobian = [[0.0; 3]; 3];
    for i in 0..3 {
        residual[i] = area * (f[0] * g[i][0] + f[1] * g[i][1]);
        for j in 0..3 {
            let ag = [a[0][0] * g[j][0] + a[0][1] * g[j][1], a[1][0] * g[j][0] + a[1][1] * g[j][1]];
            jacobian[i][j] = area * (g[i][0] * ag[0] + g[i][1] * ag[1]);
        }
    }
    Ok(ElementTerms { residual, jacobian })
}

fn residual_only(mesh: &MeshedDomain, coeff: &CoefficientField, u: &[f64], t: usize) -> [f64; 3] {
    let (g, area) = triangle_basis(mesh, t);
    let tri = mesh.triangles()[t];
    let mut p = [0.0; 2];
    for k in 0..3 {
        p[0] += u[tri[k]] * g[k][0];
        p[1] += u[tri[k]] * g[k][1];
    }
    let f = coeff.flux(p);
    [0, 1, 2].map(|i| area * (f[0] * g[i][0] + f[1] * g[i][1]))
}

/// Interior-DOF numbering and the CSC pattern of the reduced Jacobian.
struct System {
    dof: Vec<usize>,
    n: usize,
    symbolic: SymbolicSparseColMat<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
}

const NO_DOF: usize = usize::MAX;

impl System {
    fn new(mesh: &MeshedDomain) -> Result<Self> {
        let nv = mesh.vertices().len();
        let mut dof = vec![NO_DOF; nv];
        let mut n = 0;
        for v in 0..nv {
            if !mesh.is_boundary(v) {
                dof[v] = n;
                n += 1;
            }
        }
        let mut col_ptr = vec![0usize];
        let mut row_idx = Vec::new();
        for v in 0..nv {
            if dof[v] == NO_DOF {
                continue;
            }
            let mut rows: Vec<usize> = std::iter::once(dof[v])
                .chain(mesh.vertex_neighbors(v).iter().map(|&w| dof[w]).filter(|&d| d != NO_DOF))
                .collect();
            rows.sort_unstable();
            row_idx.extend(rows);
            col_ptr.push(row_idx.len());
        }
        let symbolic = SymbolicSparseColMat::new_checked(n, n, col_ptr.clone(), None, row_idx.clone());
        Ok(System { dof, n, symbolic, col_ptr, row_idx })
    }

    fn slot(&self, row: usize, col: usize) -> usize {
        let lo = self.col_ptr[col];
        let hi = self.col_ptr[col + 1];
        lo + self.row_idx[lo..hi].binary_search(&row).expect("entry in sparsity pattern")
    }
}

fn element_results<T: Send>(n: usize, parallel: bool, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// Interior residual vector (in DOF numbering) at `u`.
fn interior_residual(
    mesh: &MeshedDomain,
    coeff: &CoefficientField,
    sys: &System,
    u: &[f64],
    parallel: bool,
) -> Vec<f64> {
    let terms = element_results(mesh.triangles().len(), parallel, |t| residual_only(mesh, coeff, u, t));
    let mut r = vec![0.0; sys.n];
    for (t, res) in terms.iter().enumerate() {
        for (k, &v) in mesh.triangles()[t].iter().enumerate() {
            let d = sys.dof[v];
            if d != NO_DOF {
                r[d] += res[k];
            }
        }
    }
    r
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Euclidean norm of the assembled nonlinear residual, boundary rows measuring
/// the mismatch with the Dirichlet data.
pub fn residual_norm(sol: &DiscreteSolution) -> Result<f64> {
    let mesh = sol.mesh();
    let sys = System::new(mesh)?;
    let r = interior_residual(mesh, &sol.coefficient, &sys, &sol.nodal_values, false);
    let mut sq = r.iter().map(|x| x * x).sum::<f64>();
    if let Some(data) = &sol.data {
        for v in 0..mesh.vertices().len() {
            if let Some(g) = data.boundary_value(mesh, v) {
                sq += (sol.nodal_values[v] - g).powi(2);
            }
        }
    }
    Ok(sq.sqrt())
}

/// Newton iterate state shared by the linear and nonlinear solves.
struct Newton<'a> {
    mesh: &'a MeshedDomain,
    coeff: &'a CoefficientField,
    sys: System,
    symbolic_llt: Option<SymbolicLlt<usize>>,
    parallel: bool,
}

impl<'a> Newton<'a> {
    /// Assembles the reduced Jacobian and residual at `u`.
    fn assemble(&self, u: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mesh = self.mesh;
        let terms = element_results(mesh.triangles().len(), self.parallel, |t| element_terms(mesh, self.coeff, u, t));
        let mut vals = vec![0.0; self.sys.row_idx.len()];
        let mut r = vec![0.0; self.sys.n];
        for (t, term) in terms.into_iter().enumerate() {
            let term = term?;
            let tri = mesh.triangles()[t];
            for i in 0..3 {
                let di = self.sys.dof[tri[i]];
                if di == NO_DOF {
                    continue;
                }
                r[di] += term.residual[i];
                for j in 0..3 {
                    let dj = self.sys.dof[tri[j]];
                    if dj != NO_DOF {
                        vals[self.sys.slot(di, dj)] += term.jacobian[i][j];
                    }
                }
            }
        }
        Ok((vals, r))
    }

    /// Solves `J δ = −r`.
    fn step(&mut self, vals: &[f64], r: &[f64]) -> Result<Vec<f64>> {
        let n = self.sys.n;
        if n == 0 {
            return Ok(Vec::new());
        }
        let mat = SparseColMatRef::new(self.sys.symbolic.as_ref(), vals);
        let symbolic = match &self.symbolic_llt {
            Some(s) => s.clone(),
            None => {
                let s = SymbolicLlt::try_new(self.sys.symbolic.as_ref(), Side::Lower)
                    .map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
                self.symbolic_llt = Some(s.clone());
                s
            }
        };
        let llt =
            Llt::try_new_with_symbolic(symbolic, mat, Side::Lower).map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
        let mut rhs = Mat::<f64>::from_fn(n, 1, |i, _| -r[i]);
        llt.solve_in_place(rhs.as_mut());
        Ok((0..n).map(|i| rhs[(i, 0)]).collect())
    }
}

/// Solves the Dirichlet problem on `mesh`.
pub fn solve(
    mesh: Arc<MeshedDomain>,
    coeff: &CoefficientField,
    data: &DirichletData,
    opts: &NewtonOptions,
) -> Result<DiscreteSolution> {
    data.validate(&mesh)?;
    if !data.outer_profile.is_finite() || data.inner_constant.is_some_and(|h| !h.is_finite()) {
        return Err(Error::DataMismatch("non-finite boundary data".into()));
    }
    let nv = mesh.vertices().len();
    let mut u = vec![0.0; nv];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (v, slot) in u.iter_mut().enumerate() {
        if let Some(g) = data.boundary_value(&mesh, v) {
            *slot = g;
            lo = lo.min(g);
            hi = hi.max(g);
        }
    }

    let sys = System::new(&mesh)?;
    let dof = sys.dof.clone();
    let laplace = CoefficientField::Laplace;

    // harmonic lift of the data as the starting iterate
    let mut lift = Newton { mesh: &mesh, coeff: &laplace, sys, symbolic_llt: None, parallel: opts.parallel };
    let (vals, r) = lift.assemble(&u)?;
    let delta = lift.step(&vals, &r)?;
    apply(&mut u, &dof, &delta, 1.0);
    let Newton { sys, symbolic_llt, .. } = lift;

    let mut history = Vec::new();
    let mut iters = 1;
    let residual;
    if coeff.is_linear() {
        let r = interior_residual(&mesh, coeff, &sys, &u, opts.parallel);
        residual = norm(&r);
        history.push(residual);
    } else {
        let mut newton = Newton { mesh: &mesh, coeff, sys, symbolic_llt, parallel: opts.parallel };
        let mut zero_interior = u.clone();
        for (v, &d) in dof.iter().enumerate() {
            if d != NO_DOF {
                zero_interior[v] = 0.0;
            }
        }
        let reference = norm(&interior_residual(&mesh, coeff, &newton.sys, &zero_interior, opts.parallel));
        let target = opts.tol * reference.min(1.0);
        iters = 0;
        let (mut vals, mut r) = newton.assemble(&u)?;
        let mut rn = norm(&r);
        history.push(rn);
        loop {
            if rn <= target {
                break;
            }
            if iters >= opts.max_iter {
                return Err(Error::ConvergenceFailure { iterations: iters, history });
            }
            let delta = newton.step(&vals, &r)?;
            iters += 1;
            let mut lambda = 1.0;
            let accepted = loop {
                let mut trial = u.clone();
                apply(&mut trial, &dof, &delta, lambda);
                let tr = norm(&interior_residual(&mesh, coeff, &newton.sys, &trial, opts.parallel));
                if tr < rn {
                    break Some(trial);
                }
                lambda *= 0.5;
                if lambda < opts.min_step {
                    break None;
                }
            };
            let Some(trial) = accepted else {
                // roundoff floor: a full step that no longer changes anything is converged
                let scale = u.iter().fold(1.0f64, |m, x| m.max(x.abs()));
                if delta.iter().all(|d| d.abs() <= 1e-12 * scale) {
                    break;
                }
                return Err(Error::ConvergenceFailure { iterations: iters, history });
            };
            u = trial;
            (vals, r) = newton.assemble(&u)?;
            rn = norm(&r);
            history.push(rn);
        }
        residual = rn;
    }

    let tol = 1e-8 * (hi - lo) + 1e-12 * lo.abs().max(hi.abs()).max(1.0);
    for (v, &x) in u.iter().enumerate() {
        if x < lo - tol || x > hi + tol {
            return Err(Error::MaximumPrinciple { vertex: v, value: x, lo, hi });
        }
    }

    let gradients = triangle_gradients(&mesh, &u);
    let recovered = recover_gradients(&mesh, &gradients);
    Ok(DiscreteSolution {
        mesh,
        coefficient: coeff.clone(),
        data: Some(data.clone()),
        nodal_values: u,
        gradients,
        recovered,
        newton: NewtonReport { iters, residual, history },
    })
}

fn apply(u: &mut [f64], dof: &[usize], delta: &[f64], lambda: f64) {
    for (v, &d) in dof.iter().enumerate() {
        if d != NO_DOF {
            u[v] += lambda * delta[d];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_annulus_mesh, build_disk_mesh};
    use crate::oracle::{annulus_harmonic, disk_harmonic};

    fn disk(h: f64) -> Arc<MeshedDomain> {
        Arc::new(build_disk_mesh(1.0, h).unwrap())
    }

    fn max_error(sol: &DiscreteSolution, f: impl Fn(Point) -> f64) -> f64 {
        sol.mesh().vertices().iter().zip(sol.nodal_values()).map(|(&p, &u)| (u - f(p)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn ellipticity_examples() {
        let (lo, hi, ratio) = ellipticity_check(&CoefficientField::Laplace, &[[0.3, 4.0]]).unwrap();
        assert_eq!((lo, hi, ratio), (1.0, 1.0, 1.0));
        let (lo, hi, _) = ellipticity_check(&CoefficientField::MinimalSurface, &[[0.0, 0.0]]).unwrap();
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
        let (lo, hi, _) = ellipticity_check(&CoefficientField::MinimalSurface, &[[1.0, 0.0]]).unwrap();
        assert!((lo - 0.5f64.sqrt() * 0.5).abs() < 1e-9);
        assert!((hi - 0.5f64.sqrt()).abs() < 1e-9);
        assert!(ellipticity_check(&CoefficientField::Laplace, &[]).is_err());
    }

    #[derive(Debug)]
    struct Skewed;
    impl Flux for Skewed {
        fn flux(&self, p: Point) -> Point {
            p
        }
        fn jacobian(&self, _: Point) -> [[f64; 2]; 2] {
            [[1.0, 0.5], [0.0, 1.0]]
        }
    }

    #[derive(Debug)]
    struct Indefinite;
    impl Flux for Indefinite {
        fn flux(&self, p: Point) -> Point {
            [p[0], -p[1]]
        }
        fn jacobian(&self, _: Point) -> [[f64; 2]; 2] {
            [[1.0, 0.0], [0.0, -1.0]]
        }
    }

    #[test]
    fn ellipticity_failures_name_the_sample() {
        let e = ellipticity_check(&CoefficientField::Custom(Arc::new(Skewed)), &[[0.0, 0.0], [2.0, 1.0]]);
        assert!(matches!(e, Err(Error::EllipticityFailure { sample, .. }) if sample == [0.0, 0.0]));
        let e = ellipticity_check(&CoefficientField::Custom(Arc::new(Indefinite)), &[[0.5, 0.5]]);
        assert!(matches!(e, Err(Error::EllipticityFailure { .. })));
        let data = DirichletData::disk(BoundaryProfile::cosine_mode(1, 1.0));
        let e = solve(disk(0.2), &CoefficientField::Custom(Arc::new(Indefinite)), &data, &NewtonOptions::default());
        assert!(matches!(e, Err(Error::EllipticityFailure { .. })));
    }

    #[test]
    fn laplace_linear_data_is_exact() {
        let data = DirichletData::disk(BoundaryProfile::cosine_mode(1, 1.0));
        let sol = solve(disk(0.05), &CoefficientField::Laplace, &data, &NewtonOptions::default()).unwrap();
        assert!(max_error(&sol, |p| p[0]) < 0.01);
        assert!(residual_norm(&sol).unwrap() <= 1e-10);
    }

    #[test]
    fn laplace_second_order_against_oracle() {
        let psi = BoundaryProfile::cosine_mode(3, 1.0);
        let rep = disk_harmonic(1.0, &psi);
        let errs: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| {
                let sol = solve(
                    disk(h),
                    &CoefficientField::Laplace,
                    &DirichletData::disk(psi.clone()),
                    &NewtonOptions::default(),
                )
                .unwrap();
                max_error(&sol, |p| rep.value(p))
            })
            .collect();
        assert!(errs[0] / errs[1] >= 3.0, "{errs:?}");
        assert!(errs[1] / errs[2] >= 3.0, "{errs:?}");
    }

    #[test]
    fn annulus_against_oracle() {
        let psi = BoundaryProfile::new(vec![2.0, 0.0, 1.0], vec![]);
        let rep = annulus_harmonic(1.0, 3.0, 0.0, &psi).unwrap();
        let mut errs = Vec::new();
        for h in [0.2, 0.1] {
            let mesh = Arc::new(build_annulus_mesh(1.0, 3.0, h).unwrap());
            let sol = solve(
                mesh,
                &CoefficientField::Laplace,
                &DirichletData::annulus(psi.clone(), 0.0),
                &NewtonOptions::default(),
            )
            .unwrap();
            errs.push(max_error(&sol, |p| rep.value(p)));
        }
        assert!(errs[1] < 0.01 && errs[0] / errs[1] >= 3.0, "{errs:?}");
    }

    #[test]
    fn minimal_surface_reproduces_affine_data() {
        // restriction of 0.3x + 0.1y to the unit circle
        let psi = BoundaryProfile::new(vec![0.0, 0.3], vec![0.1]);
        for h in [0.2, 0.1] {
            let data = DirichletData::disk(psi.clone());
            let sol = solve(disk(h), &CoefficientField::MinimalSurface, &data, &NewtonOptions::default()).unwrap();
            assert!(max_error(&sol, |p| 0.3 * p[0] + 0.1 * p[1]) <= 1e-9);
            assert!(residual_norm(&sol).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn minimal_surface_converges_and_obeys_max_principle() {
        let psi = BoundaryProfile::new(vec![0.0, 0.0, 0.2], vec![0.0, 0.3]);
        let sol =
            solve(disk(0.05), &CoefficientField::MinimalSurface, &DirichletData::disk(psi), &NewtonOptions::default())
                .unwrap();
        assert!(sol.newton().iters >= 1 && sol.newton().iters < 20);
        assert!(residual_norm(&sol).unwrap() <= 1e-10);
        let (lo, hi) = sol.min_max();
        assert!(lo >= -0.37 && hi <= 0.37);
    }

    #[test]
    fn constant_shift_shifts_solution() {
        let psi = BoundaryProfile::new(vec![0.1, 0.4, 0.2], vec![0.3]);
        let mesh = disk(0.1);
        for coeff in [CoefficientField::Laplace, CoefficientField::MinimalSurface] {
            let a = solve(mesh.clone(), &coeff, &DirichletData::disk(psi.clone()), &NewtonOptions::default()).unwrap();
            let b =
                solve(mesh.clone(), &coeff, &DirichletData::disk(psi.shifted(2.5)), &NewtonOptions::default()).unwrap();
            for (x, y) in a.nodal_values().iter().zip(b.nodal_values()) {
                assert!((y - x - 2.5).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn boundary_values_are_exact() {
        let psi = BoundaryProfile::new(vec![2.0, 0.0, 1.0], vec![]);
        let mesh = Arc::new(build_annulus_mesh(1.0, 3.0, 0.2).unwrap());
        let data = DirichletData::annulus(psi, -0.5);
        let sol = solve(mesh.clone(), &CoefficientField::Laplace, &data, &NewtonOptions::default()).unwrap();
        for v in 0..mesh.vertices().len() {
            if let Some(g) = data.boundary_value(&mesh, v) {
                assert_eq!(sol.nodal_values()[v], g);
            }
        }
    }

    #[test]
    fn residual_of_zero_field_is_positive() {
        let mesh = disk(0.2);
        let data = DirichletData::disk(BoundaryProfile::cosine_mode(1, 1.0));
        let mut sol = solve(mesh.clone(), &CoefficientField::Laplace, &data, &NewtonOptions::default()).unwrap();
        sol.nodal_values.iter_mut().for_each(|x| *x = 0.0);
        assert!(residual_norm(&sol).unwrap() > 0.0);
    }

    #[test]
    fn data_must_match_topology() {
        let psi = BoundaryProfile::cosine_mode(1, 1.0);
        let e = solve(
            disk(0.2),
            &CoefficientField::Laplace,
            &DirichletData::annulus(psi.clone(), 0.0),
            &NewtonOptions::default(),
        );
        assert!(matches!(e, Err(Error::DataMismatch(_))));
        let mesh = Arc::new(build_annulus_mesh(1.0, 2.0, 0.2).unwrap());
        let e = solve(mesh, &CoefficientField::Laplace, &DirichletData::disk(psi), &NewtonOptions::default());
        assert!(matches!(e, Err(Error::DataMismatch(_))));
    }

    #[test]
    fn parallel_assembly_is_bitwise_identical() {
        let psi = BoundaryProfile::new(vec![0.0, 0.0, 0.2], vec![0.1]);
        let mesh = disk(0.05);
        let seq = solve(
            mesh.clone(),
            &CoefficientField::MinimalSurface,
            &DirichletData::disk(psi.clone()),
            &NewtonOptions::default(),
        )
        .unwrap();
        let par = solve(
            mesh,
            &CoefficientField::MinimalSurface,
            &DirichletData::disk(psi),
            &NewtonOptions { parallel: true, ..NewtonOptions::default() },
        )
        .unwrap();
        assert_eq!(seq.nodal_values(), par.nodal_values());
    }

    #[test]
    fn recovered_gradient_of_linear_field_is_exact() {
        let sol =
            DiscreteSolution::interpolate(disk(0.1), |p| 2.0 * p[0] - p[1] + 0.5, CoefficientField::Laplace).unwrap();
        for v in 0..sol.mesh().vertices().len() {
            let g = sol.nodal_gradient(v);
            assert!((g[0] - 2.0).abs() < 1e-12 && (g[1] + 1.0).abs() < 1e-12);
        }
        assert!((sol.value_at([0.31, -0.2]).unwrap() - (0.62 + 0.2 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn export_shape() {
        let sol = DiscreteSolution::interpolate(disk(0.5), |p| p[0], CoefficientField::Laplace).unwrap();
        let v = serde_json::to_value(sol.to_export()).unwrap();
        assert!(v["nodal_values"].is_array());
        assert_eq!(v["newton"]["iters"], 0);
        assert!(v["newton"]["residual"].is_number());
    }
}
