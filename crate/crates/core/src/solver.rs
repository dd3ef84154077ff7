//! Damped Newton solver for the coupled discrete system with Dirichlet data
//! for `u` and a chiral-bag condition for `ψ`, plus a conjugate-gradient
//! Poisson solver.
//!
//! Unknowns are stacked per inside node as `[u, Re ψ₀, Im ψ₀, Re ψ₁, Im ψ₁]`.
//! Interior nodes carry the five real rows of the system. A boundary node
//! carries `u = bc_u`, the two real rows of `⟨e_P, ψ − g⟩ = 0` where `e_P`
//! spans the range of `P = ½(I − iν·γ)`, and the two real rows of
//! `⟨e_Q, residual_ψ⟩ = 0` on the complementary line, with one-sided
//! differences in the Dirac operator.

use std::sync::Arc;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{check_same, residuals, CouplingField, ScalarField, SpinorField};
use crate::grid::Grid;
use crate::scalar::{pairwise_sum, Real};
use crate::spin2d::{axis_stencil, dirac_apply, CliffordRep, Laplace, Mat2, SpinorValue};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Sup-norm tolerance on the stacked residual.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub backtrack: f64,
    pub min_step: f64,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    /// Relative tolerance of linear sub-solves.
    pub linear_tolerance: f64,
    /// Cap applied to `u` inside exponentials while line searching.
    pub exp_clamp: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 30,
            backtrack: 0.5,
            min_step: 1e-8,
            armijo: 1e-4,
            linear_tolerance: 1e-12,
            exp_clamp: 50.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("solver tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::Config("backtracking factor must lie in (0, 1)".into()));
        }
        if !(self.min_step > 0.0 && self.min_step <= 1.0) {
            return Err(Error::Config("minimum step must lie in (0, 1]".into()));
        }
        if !(self.linear_tolerance > 0.0) {
            return Err(Error::Config("linear tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    DampingFloor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Sup norm of the stacked residual after each accepted iterate (entry 0 is the start).
    pub residual_history: Vec<f64>,
    pub step_history: Vec<f64>,
    /// Relative residual of each Newton linear solve.
    pub linear_residuals: Vec<f64>,
    pub converged: bool,
    pub termination: Termination,
    pub final_residual_u: f64,
    pub final_residual_psi: f64,
}

/// Solves `−Δu = rhs` on interior nodes with `u = bc` on boundary nodes by
/// conjugate gradients.
pub fn linear_poisson_solve<T: Real>(rhs: &ScalarField<T>, bc: &ScalarField<T>, tolerance: T) -> Result<ScalarField<T>> {
    check_same(rhs.grid(), bc.grid())?;
    if rhs.is_vanished() || bc.is_vanished() {
        return Err(Error::Argument("Poisson data must be finite".into()));
    }
    let grid = rhs.grid().clone();
    let interior = grid.interior_mask();
    let nx = grid.nx();
    let h2 = grid.h() * grid.h();
    let idx: Vec<usize> = (0..grid.len()).filter(|&k| interior[k]).collect();
    let mut pos = vec![usize::MAX; grid.len()];
    for (m, &k) in idx.iter().enumerate() {
        pos[k] = m;
    }
    // h²(−Δ) restricted to interior unknowns
    let apply = |x: &[T], out: &mut [T]| {
        for (m, &k) in idx.iter().enumerate() {
            let mut acc = T::lit(4.0) * x[m];
            for nb in [k - 1, k + 1, k - nx, k + nx] {
                if pos[nb] != usize::MAX {
                    acc = acc - x[pos[nb]];
                }
            }
            out[m] = acc;
        }
    };
    let mut b = vec![T::zero(); idx.len()];
    for (m, &k) in idx.iter().enumerate() {
        let mut acc = h2 * rhs.values()[k];
        for nb in [k - 1, k + 1, k - nx, k + nx] {
            if pos[nb] == usize::MAX {
                acc = acc + bc.values()[nb];
            }
        }
        b[m] = acc;
    }
    let dot = |a: &[T], c: &[T]| -> T {
        let t: Vec<T> = a.iter().zip(c).map(|(&x, &y)| x * y).collect();
        pairwise_sum(&t)
    };
    let n = idx.len();
    let mut x = vec![T::zero(); n];
    let mut r = b.clone();
    let mut p = r.clone();
    let mut ap = vec![T::zero(); n];
    let bnorm = dot(&b, &b).sqrt().max(T::min_positive_value());
    let mut rr = dot(&r, &r);
    let max_iter = 20 * n + 100;
    let mut converged = rr.sqrt() <= tolerance * bnorm;
    let mut it = 0;
    while !converged && it < max_iter {
        apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for m in 0..n {
            x[m] = x[m] + alpha * p[m];
            r[m] = r[m] - alpha * ap[m];
        }
        let rr_new = dot(&r, &r);
        if !rr_new.is_finite() {
            break;
        }
        converged = rr_new.sqrt() <= tolerance * bnorm;
        let beta = rr_new / rr;
        rr = rr_new;
        for m in 0..n {
            p[m] = r[m] + beta * p[m];
        }
        it += 1;
    }
    if !converged {
        return Err(Error::LinearSolve {
            message: format!("conjugate gradients stopped after {it} iterations"),
            residual: (rr.sqrt() / bnorm).as_f64(),
        });
    }
    let mut out = bc.values().to_vec();
    for (m, &k) in idx.iter().enumerate() {
        out[k] = x[m];
    }
    for (k, o) in out.iter_mut().enumerate() {
        if !grid.inside_mask()[k] {
            *o = T::zero();
        }
    }
    ScalarField::new(grid, out)
}

/// Directional derivative of `fields::residuals` at `(u, ψ)` along
/// `(δu, δψ)`, on interior nodes.
pub fn jacobian_matvec<T: Real>(
    u: &ScalarField<T>,
    psi: &SpinorField<T>,
    coupling: &CouplingField<T>,
    direction: (&ScalarField<T>, &SpinorField<T>),
) -> Result<(ScalarField<T>, SpinorField<T>)> {
    let (du, dpsi) = direction;
    check_same(u.grid(), psi.grid())?;
    check_same(u.grid(), du.grid())?;
    check_same(u.grid(), dpsi.grid())?;
    if u.is_vanished() {
        return Err(Error::Unsupported("linearization at a vanished scalar part".into()));
    }
    let grid = u.grid().clone();
    let lap = du.laplacian()?;
    let ddirac = dirac_apply(dpsi)?;
    let mut ou = vec![T::zero(); grid.len()];
    let mut opsi = SpinorField::zeros(grid.clone());
    let two = T::lit(2.0);
    for k in 0..grid.len() {
        if !grid.interior_mask()[k] {
            continue;
        }
        let e = u.exp_u(k);
        let p = psi.value(k);
        let dp = dpsi.value(k);
        let n2 = p.norm_sqr();
        let pair = p.real_dot(dp);
        let f = coupling.value(k);
        let d = du.values()[k];
        ou[k] = -lap.values()[k] - two * two * e * e * d + e * n2 * d + two * e * pair;
        let v = ddirac.value(k) + p.scale(e * d) + dp.scale(e + two * f * n2) + p.scale(two * two * f * pair);
        opsi.set(k, v);
    }
    Ok((ScalarField::new(grid, ou)?, opsi))
}

/// Unit vector spanning the range of a rank-one projector.
fn range_vector(p: &Mat2<f64>) -> [Complex<f64>; 2] {
    let c0 = p[0][0].norm_sqr() + p[1][0].norm_sqr();
    let c1 = p[0][1].norm_sqr() + p[1][1].norm_sqr();
    let col = if c0 >= c1 { 0 } else { 1 };
    let v = [p[0][col], p[1][col]];
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

/// Real 2×4 map `z ↦ (Re⟨e, z⟩, Im⟨e, z⟩)` on stacked spinor components.
fn pairing_rows(e: [Complex<f64>; 2]) -> [[f64; 4]; 2] {
    let mut m = [[0.0; 4]; 2];
    for j in 0..2 {
        let (a, b) = (e[j].re, e[j].im);
        m[0][2 * j] = a;
        m[0][2 * j + 1] = b;
        m[1][2 * j] = -b;
        m[1][2 * j + 1] = a;
    }
    m
}

/// Real 4×4 block of a complex 2×2 matrix acting on stacked components.
fn real_block(g: &Mat2<f64>) -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            let (a, b) = (g[i][j].re, g[i][j].im);
            m[2 * i][2 * j] = a;
            m[2 * i][2 * j + 1] = -b;
            m[2 * i + 1][2 * j] = b;
            m[2 * i + 1][2 * j + 1] = a;
        }
    }
    m
}

enum NodeKind {
    Interior,
    Boundary { ep: [[f64; 4]; 2], eq: [[f64; 4]; 2], g: [f64; 4], bc_u: f64 },
}

/// The discrete boundary value problem in `f64`.
struct System {
    grid: Arc<Grid<f64>>,
    /// Inside nodes in storage order.
    nodes: Vec<usize>,
    pos: Vec<usize>,
    kinds: Vec<NodeKind>,
    coupling: Vec<f64>,
    gamma: [[[f64; 4]; 4]; 2],
}

const NONE: usize = usize::MAX;

impl System {
    fn new<T: Real>(
        grid: &Grid<T>,
        coupling: &CouplingField<T>,
        bc_u: &ScalarField<T>,
        bc_psi: &SpinorField<T>,
    ) -> Result<Self> {
        let g64 = Arc::new(Grid::<f64>::from_descriptor(&to_f64_descriptor(grid))?);
        if g64.inside_mask() != grid.inside_mask() || g64.interior_mask() != grid.interior_mask() {
            return Err(Error::Unsupported("grid masks differ after conversion to double precision".into()));
        }
        let rep = CliffordRep::<f64>::standard();
        let mut pos = vec![NONE; grid.len()];
        let mut nodes = Vec::new();
        let mut kinds = Vec::new();
        for k in 0..grid.len() {
            if !grid.inside_mask()[k] {
                continue;
            }
            pos[k] = nodes.len();
            nodes.push(k);
            if grid.interior_mask()[k] {
                kinds.push(NodeKind::Interior);
            } else {
                let nu = g64.domain().outward_normal(g64.point(k));
                let p = rep.bag_projector([nu.x, nu.y]);
                let mut q = p;
                for (i, row) in q.iter_mut().enumerate() {
                    for (j, v) in row.iter_mut().enumerate() {
                        let id = if i == j { 1.0 } else { 0.0 };
                        *v = Complex::new(id, 0.0) - *v;
                    }
                }
                let gv = bc_psi.value(k).to_reals().map(|x| x.as_f64());
                kinds.push(NodeKind::Boundary {
                    ep: pairing_rows(range_vector(&p)),
                    eq: pairing_rows(range_vector(&q)),
                    g: gv,
                    bc_u: bc_u.values()[k].as_f64(),
                });
            }
        }
        let coupling = (0..grid.len()).map(|k| coupling.value(k).as_f64()).collect();
        Ok(Self { grid: g64, nodes, pos, kinds, coupling, gamma: [real_block(&rep.gamma1), real_block(&rep.gamma2)] })
    }

    fn unknowns(&self) -> usize {
        5 * self.nodes.len()
    }

    #[inline]
    fn exp(u: f64, clamp: Option<f64>) -> f64 {
        match clamp {
            Some(c) => u.min(c).exp(),
            None => u.exp(),
        }
    }

    /// `residual_ψ` (stacked reals) at storage slot `m` and its Jacobian rows as
    /// `(column, 4 coefficients)` pairs when requested.
    fn psi_rows(&self, x: &[f64], m: usize, clamp: Option<f64>, jac: Option<&mut Vec<(usize, [f64; 4])>>) -> [f64; 4] {
        let k = self.nodes[m];
        let valid = self.grid.inside_mask();
        let u = x[5 * m];
        let p = [x[5 * m + 1], x[5 * m + 2], x[5 * m + 3], x[5 * m + 4]];
        let e = Self::exp(u, clamp);
        let n2 = p.iter().map(|v| v * v).sum::<f64>();
        let f = self.coupling[k];
        let mut r = [0.0; 4];
        let mut entries = jac;
        for axis in 0..2 {
            let g = &self.gamma[axis];
            for (nb, c) in axis_stencil(&self.grid, k, axis, valid) {
                if c == 0.0 {
                    continue;
                }
                let mb = self.pos[nb];
                let q = &x[5 * mb + 1..5 * mb + 5];
                for (i, ri) in r.iter_mut().enumerate() {
                    *ri += c * (0..4).map(|j| g[i][j] * q[j]).sum::<f64>();
                }
                if let Some(list) = entries.as_deref_mut() {
                    for j in 0..4 {
                        list.push((5 * mb + 1 + j, std::array::from_fn(|i| c * g[i][j])));
                    }
                }
            }
        }
        let a = e + 2.0 * f * n2;
        for i in 0..4 {
            r[i] += a * p[i];
        }
        if let Some(list) = entries {
            list.push((5 * m, std::array::from_fn(|i| e * p[i])));
            for j in 0..4 {
                list.push((
                    5 * m + 1 + j,
                    std::array::from_fn(|i| if i == j { a } else { 0.0 } + 4.0 * f * p[i] * p[j]),
                ));
            }
        }
        r
    }

    fn residual(&self, x: &[f64], clamp: Option<f64>) -> Vec<f64> {
        let mut out = vec![0.0; self.unknowns()];
        self.fill(x, clamp, &mut out, None);
        out
    }

    fn fill(&self, x: &[f64], clamp: Option<f64>, out: &mut [f64], mut trip: Option<&mut Vec<Triplet<usize, usize, f64>>>) {
        let h2 = self.grid.h() * self.grid.h();
        let nx = self.grid.nx();
        let mut list = Vec::with_capacity(32);
        for (m, kind) in self.kinds.iter().enumerate() {
            let k = self.nodes[m];
            let row = 5 * m;
            list.clear();
            let want_jac = trip.is_some();
            let rpsi = self.psi_rows(x, m, clamp, if want_jac { Some(&mut list) } else { None });
            match kind {
                NodeKind::Interior => {
                    let u = x[row];
                    let e = Self::exp(u, clamp);
                    let p = &x[row + 1..row + 5];
                    let n2 = p.iter().map(|v| v * v).sum::<f64>();
                    let mut lap = -4.0 * u;
                    for nb in [k - 1, k + 1, k - nx, k + nx] {
                        lap += x[5 * self.pos[nb]];
                    }
                    out[row] = -lap / h2 - 2.0 * e * e + e * n2;
                    out[row + 1..row + 5].copy_from_slice(&rpsi);
                    if let Some(t) = trip.as_deref_mut() {
                        t.push(Triplet::new(row, row, 4.0 / h2 - 4.0 * e * e + e * n2));
                        for nb in [k - 1, k + 1, k - nx, k + nx] {
                            t.push(Triplet::new(row, 5 * self.pos[nb], -1.0 / h2));
                        }
                        for j in 0..4 {
                            t.push(Triplet::new(row, row + 1 + j, 2.0 * e * p[j]));
                        }
                        for &(col, vals) in &list {
                            for (i, &v) in vals.iter().enumerate() {
                                if v != 0.0 {
                                    t.push(Triplet::new(row + 1 + i, col, v));
                                }
                            }
                        }
                    }
                }
                NodeKind::Boundary { ep, eq, g, bc_u } => {
                    out[row] = x[row] - bc_u;
                    for (a, rowv) in ep.iter().enumerate() {
                        out[row + 1 + a] = (0..4).map(|j| rowv[j] * (x[row + 1 + j] - g[j])).sum();
                    }
                    for (a, rowv) in eq.iter().enumerate() {
                        out[row + 3 + a] = (0..4).map(|j| rowv[j] * rpsi[j]).sum();
                    }
                    if let Some(t) = trip.as_deref_mut() {
                        t.push(Triplet::new(row, row, 1.0));
                        for (a, rowv) in ep.iter().enumerate() {
                            for j in 0..4 {
                                if rowv[j] != 0.0 {
                                    t.push(Triplet::new(row + 1 + a, row + 1 + j, rowv[j]));
                                }
                            }
                        }
                        for &(col, vals) in &list {
                            for (a, rowv) in eq.iter().enumerate() {
                                let v: f64 = (0..4).map(|j| rowv[j] * vals[j]).sum();
                                if v != 0.0 {
                                    t.push(Triplet::new(row + 3 + a, col, v));
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    fn jacobian(&self, x: &[f64]) -> Result<SparseColMat<usize, f64>> {
        let n = self.unknowns();
        let mut out = vec![0.0; n];
        let mut trip = Vec::with_capacity(n * 12);
        self.fill(x, None, &mut out, Some(&mut trip));
        SparseColMat::try_new_from_triplets(n, n, &trip)
            .map_err(|e| Error::SingularJacobian { message: format!("assembly failed: {e:?}") })
    }

    fn block_norms(&self, r: &[f64]) -> (f64, f64) {
        let mut nu = 0.0f64;
        let mut np = 0.0f64;
        for m in 0..self.nodes.len() {
            nu = nu.max(r[5 * m].abs());
            for j in 1..5 {
                np = np.max(r[5 * m + j].abs());
            }
        }
        (nu, np)
    }
}

fn to_f64_descriptor<T: Real>(grid: &Grid<T>) -> crate::grid::GridDescriptor<f64> {
    let d = grid.descriptor();
    let json = serde_json::to_value(&d).expect("descriptor serializes");
    serde_json::from_value(json).expect("descriptor converts to f64")
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, &b| if b.is_nan() { f64::INFINITY } else { a.max(b.abs()) })
}

fn smallest_diagonal(j: &SparseColMat<usize, f64>) -> f64 {
    let mut best = f64::INFINITY;
    let cp = j.col_ptr();
    let ri = j.row_idx();
    let vals = j.val();
    for c in 0..j.ncols() {
        let d = (cp[c]..cp[c + 1]).find(|&p| ri[p] == c).map_or(0.0, |p| vals[p].abs());
        best = best.min(d);
    }
    best
}

/// Damped Newton on the stacked real system. Returns the converged fields, or
/// the best iterate with `converged = false`.
pub fn newton_solve<T: Real>(
    u0: &ScalarField<T>,
    psi0: &SpinorField<T>,
    coupling: &CouplingField<T>,
    bc_u: &ScalarField<T>,
    bc_psi: &SpinorField<T>,
    config: &SolverConfig,
) -> Result<(ScalarField<T>, SpinorField<T>, SolveReport)> {
    config.validate()?;
    if u0.is_vanished() {
        return Err(Error::Unsupported("Newton needs a non-vanished initial scalar part".into()));
    }
    let grid = u0.grid().clone();
    for g in [psi0.grid(), bc_u.grid(), bc_psi.grid()] {
        check_same(&grid, g)?;
    }
    if let CouplingField::Sampled { grid: g, .. } = coupling {
        check_same(&grid, g)?;
    }
    if bc_u.is_vanished() {
        return Err(Error::Argument("Dirichlet data for u must be finite".into()));
    }
    let sys = System::new(&grid, coupling, bc_u, bc_psi)?;
    let mut x = vec![0.0; sys.unknowns()];
    for (m, &k) in sys.nodes.iter().enumerate() {
        x[5 * m] = u0.values()[k].as_f64();
        let p = psi0.value(k).to_reals();
        for j in 0..4 {
            x[5 * m + 1 + j] = p[j].as_f64();
        }
    }
    let mut r = sys.residual(&x, None);
    let mut rn = sup(&r);
    let mut report = SolveReport {
        iterations: 0,
        residual_history: vec![rn],
        step_history: vec![],
        linear_residuals: vec![],
        converged: false,
        termination: Termination::MaxIterations,
        final_residual_u: 0.0,
        final_residual_psi: 0.0,
    };
    let clamp = Some(config.exp_clamp);
    loop {
        if rn <= config.tolerance {
            report.converged = true;
            report.termination = Termination::Converged;
            break;
        }
        if report.iterations >= config.max_iterations {
            break;
        }
        let jac = sys.jacobian(&x)?;
        let lu = jac.sp_lu().map_err(|e| Error::SingularJacobian {
            message: format!("sparse LU failed ({e:?}); smallest diagonal magnitude {:e}", smallest_diagonal(&jac)),
        })?;
        let rhs = Col::<f64>::from_fn(r.len(), |i| -r[i]);
        let dx = lu.solve(&rhs);
        let dxv: Vec<f64> = (0..dx.nrows()).map(|i| dx[i]).collect();
        if dxv.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularJacobian {
                message: format!("non-finite Newton step; smallest diagonal magnitude {:e}", smallest_diagonal(&jac)),
            });
        }
        let check = &jac * &dx;
        let lin_res = (0..r.len()).map(|i| (check[i] + r[i]).abs()).fold(0.0, f64::max) / rn;
        report.linear_residuals.push(lin_res);
        if lin_res > config.linear_tolerance.max(1e-6) {
            return Err(Error::LinearSolve { message: "Newton step inaccurate".into(), residual: lin_res });
        }
        let mut t = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = x.iter().zip(&dxv).map(|(a, b)| a + t * b).collect();
            let rt = sup(&sys.residual(&trial, clamp));
            if rt.is_finite() && rt <= (1.0 - config.armijo * t) * rn {
                break Some(trial);
            }
            t *= config.backtrack;
            if t < config.min_step {
                break None;
            }
        };
        let Some(next) = accepted else {
            report.termination = Termination::DampingFloor;
            break;
        };
        x = next;
        r = sys.residual(&x, None);
        rn = sup(&r);
        report.iterations += 1;
        report.step_history.push(t);
        report.residual_history.push(rn);
    }
    let (nu, np) = sys.block_norms(&r);
    report.final_residual_u = nu;
    report.final_residual_psi = np;
    let mut uv = vec![T::zero(); grid.len()];
    let mut psi = SpinorField::zeros(grid.clone());
    for (m, &k) in sys.nodes.iter().enumerate() {
        uv[k] = T::lit(x[5 * m]);
        psi.set(k, SpinorValue::from_reals(std::array::from_fn(|j| T::lit(x[5 * m + 1 + j]))));
    }
    Ok((ScalarField::new(grid, uv)?, psi, report))
}

/// Sup norm of the stacked boundary value residual (all rows), for reporting.
pub fn system_residual<T: Real>(
    u: &ScalarField<T>,
    psi: &SpinorField<T>,
    coupling: &CouplingField<T>,
    bc_u: &ScalarField<T>,
    bc_psi: &SpinorField<T>,
) -> Result<f64> {
    let sys = System::new(u.grid(), coupling, bc_u, bc_psi)?;
    let mut x = vec![0.0; sys.unknowns()];
    for (m, &k) in sys.nodes.iter().enumerate() {
        x[5 * m] = u.values()[k].as_f64();
        let p = psi.value(k).to_reals();
        for j in 0..4 {
            x[5 * m + 1 + j] = p[j].as_f64();
        }
    }
    Ok(sup(&sys.residual(&x, None)))
}

/// `‖P ψ − P g‖∞` over boundary nodes for the chiral-bag projector.
pub fn bag_defect<T: Real>(psi: &SpinorField<T>, g: &SpinorField<T>) -> Result<T> {
    check_same(psi.grid(), g.grid())?;
    let grid = psi.grid();
    let rep = CliffordRep::<T>::standard();
    let mut worst = T::zero();
    for k in 0..grid.len() {
        if !grid.boundary_mask()[k] {
            continue;
        }
        let nu = grid.domain().outward_normal(grid.point(k));
        let p = rep.bag_projector([nu.x, nu.y]);
        let d = crate::spin2d::mat_apply(&p, psi.value(k) - g.value(k));
        worst = worst.max(d.norm());
    }
    Ok(worst)
}

/// Interior sup norms `(‖residual_u‖∞, ‖residual_ψ‖∞)`.
pub fn interior_residual_norms<T: Real>(u: &ScalarField<T>, psi: &SpinorField<T>, coupling: &CouplingField<T>) -> Result<(T, T)> {
    let r = residuals(u, psi, coupling)?;
    Ok((r.sup_u().unwrap_or(T::zero()), r.sup_psi()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Domain, Point};

    fn disk(h: f64) -> Arc<Grid<f64>> {
        Arc::new(make_grid(Domain::disk(Point::origin(), 1.0), h).unwrap())
    }

    #[test]
    fn poisson_recovers_quadratic() {
        let g = disk(1.0 / 32.0);
        let rhs = ScalarField::constant(g.clone(), -4.0);
        let bc = ScalarField::from_fn(g.clone(), |p| p.norm_sqr());
        let u = linear_poisson_solve(&rhs, &bc, 1e-12).unwrap();
        for k in 0..g.len() {
            if g.inside_mask()[k] {
                assert!((u.values()[k] - g.point(k).norm_sqr()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn assembled_jacobian_matches_differences() {
        let g = disk(1.0 / 10.0);
        let coupling = CouplingField::sampled(g.clone(), |p| 0.3 + 0.1 * p.x, |_| Point::new(0.1, 0.0));
        let u = ScalarField::from_fn(g.clone(), |p| 0.2 * p.x - 0.1 * p.y * p.y);
        let psi = SpinorField::from_fn(g.clone(), |p| {
            SpinorValue::new(Complex::new(0.3 + p.y, 0.1), Complex::new(-0.2, 0.4 * p.x))
        });
        let bc_psi = SpinorField::from_fn(g.clone(), |p| SpinorValue::new(Complex::new(p.x, 0.0), Complex::new(0.0, p.y)));
        let sys = System::new(&g, &coupling, &u, &bc_psi).unwrap();
        let n = sys.unknowns();
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let m = i / 5;
                let k = sys.nodes[m];
                if i % 5 == 0 { u.values()[k] } else { psi.comps()[i % 5 - 1][k] }
            })
            .collect();
        let jac = sys.jacobian(&x).unwrap();
        let d: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 / 13.0 - 0.5).collect();
        let dc = Col::<f64>::from_fn(n, |i| d[i]);
        let jd = &jac * &dc;
        let eps = 1e-6;
        let xp: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + eps * b).collect();
        let xm: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a - eps * b).collect();
        let (rp, rm) = (sys.residual(&xp, None), sys.residual(&xm, None));
        let scale = sup(&(0..n).map(|i| jd[i]).collect::<Vec<_>>());
        for i in 0..n {
            let fd = (rp[i] - rm[i]) / (2.0 * eps);
            assert!((fd - jd[i]).abs() < 1e-6 * scale, "row {i}: {fd} vs {}", jd[i]);
        }
    }

    #[test]
    fn bad_config_is_rejected() {
        let c = SolverConfig { backtrack: 1.0, ..SolverConfig::default() };
        assert!(c.validate().is_err());
        let c = SolverConfig { max_iterations: 0, ..SolverConfig::default() };
        assert!(c.validate().is_err());
    }
}
