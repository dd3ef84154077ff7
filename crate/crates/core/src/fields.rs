//! Scalar and spinor field containers, the energy `E`, the action `L` and the
//! residuals of the Euler–Lagrange system
//!
//! ```text
//! −Δu = 2e^{2u} − e^u|ψ|²
//!  Dψ = −e^u ψ − 2F|ψ|²ψ
//! ```
//!
//! on flat charts.

use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Domain, Grid, Point};
use crate::scalar::{pairwise_sum, Real};
use crate::spin2d::{dirac_apply, five_point, SpinorValue};

/// Sampled log-density `u`. A vanished field represents `u ≡ −∞`
/// (`e^u ≡ 0` exactly).
#[derive(Clone, Debug)]
pub struct ScalarField<T> {
    grid: Arc<Grid<T>>,
    values: Vec<T>,
    vanished: bool,
}

impl<T: Real> ScalarField<T> {
    pub fn new(grid: Arc<Grid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Argument(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        Ok(Self { grid, values, vanished: false })
    }

    pub fn from_fn(grid: Arc<Grid<T>>, f: impl Fn(Point<T>) -> T) -> Self {
        let values = (0..grid.len()).map(|k| f(grid.point(k))).collect();
        Self { grid, values, vanished: false }
    }

    pub fn constant(grid: Arc<Grid<T>>, c: T) -> Self {
        let values = vec![c; grid.len()];
        Self { grid, values, vanished: false }
    }

    pub fn zeros(grid: Arc<Grid<T>>) -> Self {
        Self::constant(grid, T::zero())
    }

    /// `u ≡ −∞`.
    pub fn vanished(grid: Arc<Grid<T>>) -> Self {
        let values = vec![T::zero(); grid.len()];
        Self { grid, values, vanished: true }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn is_vanished(&self) -> bool {
        self.vanished
    }

    #[inline]
    pub fn exp_u(&self, k: usize) -> T {
        if self.vanished {
            T::zero()
        } else {
            self.values[k].exp()
        }
    }

    /// `e^{2u}` per node (zero when vanished).
    pub fn e2u(&self) -> Vec<T> {
        (0..self.values.len())
            .map(|k| {
                let e = self.exp_u(k);
                e * e
            })
            .collect()
    }

    pub fn integrate(&self, region: &crate::grid::Region<T>) -> Result<T> {
        if self.vanished {
            return Err(Error::Unsupported("integrating the values of a vanished field".into()));
        }
        self.grid.integrate(&self.values, region)
    }
}

/// Sampled two-component spinor, stored as four real arrays
/// `(Re ψ₀, Im ψ₀, Re ψ₁, Im ψ₁)`.
#[derive(Clone, Debug)]
pub struct SpinorField<T> {
    grid: Arc<Grid<T>>,
    comps: [Vec<T>; 4],
}

impl<T: Real> SpinorField<T> {
    pub fn zeros(grid: Arc<Grid<T>>) -> Self {
        let n = grid.len();
        Self { grid, comps: std::array::from_fn(|_| vec![T::zero(); n]) }
    }

    pub fn from_fn(grid: Arc<Grid<T>>, f: impl Fn(Point<T>) -> SpinorValue<T>) -> Self {
        let mut out = Self::zeros(grid);
        for k in 0..out.grid.len() {
            let v = f(out.grid.point(k));
            out.set(k, v);
        }
        out
    }

    pub fn from_comps(grid: Arc<Grid<T>>, comps: [Vec<T>; 4]) -> Result<Self> {
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::Argument("spinor component length mismatch".into()));
        }
        Ok(Self { grid, comps })
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn comps(&self) -> &[Vec<T>; 4] {
        &self.comps
    }

    pub fn comps_mut(&mut self) -> &mut [Vec<T>; 4] {
        &mut self.comps
    }

    #[inline]
    pub fn value(&self, k: usize) -> SpinorValue<T> {
        SpinorValue::from_reals([self.comps[0][k], self.comps[1][k], self.comps[2][k], self.comps[3][k]])
    }

    #[inline]
    pub fn set(&mut self, k: usize, v: SpinorValue<T>) {
        let r = v.to_reals();
        for (c, x) in self.comps.iter_mut().zip(r) {
            c[k] = x;
        }
    }

    #[inline]
    pub fn norm_sqr_at(&self, k: usize) -> T {
        self.comps.iter().fold(T::zero(), |a, c| a + c[k] * c[k])
    }

    /// `|ψ|²` per node.
    pub fn norm_sqr(&self) -> Vec<T> {
        (0..self.grid.len()).map(|k| self.norm_sqr_at(k)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|&x| x == T::zero()))
    }

    /// Multiplies every value by the unit phase `e^{iθ}`.
    pub fn with_phase(&self, theta: T) -> Self {
        let ph = Complex::new(theta.cos(), theta.sin());
        let mut out = self.clone();
        for k in 0..self.grid.len() {
            out.set(k, self.value(k).scale_c(ph));
        }
        out
    }
}

/// The coupling `F`: either a constant `μ` or sampled values with an analytic gradient.
#[derive(Clone, Debug)]
pub enum CouplingField<T> {
    Constant(T),
    Sampled { grid: Arc<Grid<T>>, values: Vec<T>, grad_x: Vec<T>, grad_y: Vec<T> },
}

impl<T: Real> CouplingField<T> {
    pub fn constant(mu: T) -> Self {
        CouplingField::Constant(mu)
    }

    pub fn sampled(grid: Arc<Grid<T>>, f: impl Fn(Point<T>) -> T, grad: impl Fn(Point<T>) -> Point<T>) -> Self {
        let n = grid.len();
        let mut values = Vec::with_capacity(n);
        let mut grad_x = Vec::with_capacity(n);
        let mut grad_y = Vec::with_capacity(n);
        for k in 0..n {
            let p = grid.point(k);
            values.push(f(p));
            let g = grad(p);
            grad_x.push(g.x);
            grad_y.push(g.y);
        }
        CouplingField::Sampled { grid, values, grad_x, grad_y }
    }

    #[inline]
    pub fn value(&self, k: usize) -> T {
        match self {
            CouplingField::Constant(mu) => *mu,
            CouplingField::Sampled { values, .. } => values[k],
        }
    }

    #[inline]
    pub fn grad(&self, k: usize) -> Point<T> {
        match self {
            CouplingField::Constant(_) => Point::origin(),
            CouplingField::Sampled { grad_x, grad_y, .. } => Point::new(grad_x[k], grad_y[k]),
        }
    }

    fn check_grid(&self, grid: &Arc<Grid<T>>) -> Result<()> {
        match self {
            CouplingField::Constant(_) => Ok(()),
            CouplingField::Sampled { grid: g, .. } => check_same(g, grid),
        }
    }
}

pub(crate) fn check_same<T: Real>(a: &Arc<Grid<T>>, b: &Arc<Grid<T>>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a.same_as(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// The two parts of `E(u, ψ; Ω)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyParts<T> {
    pub e2u: T,
    pub psi4: T,
}

impl<T: Real> EnergyParts<T> {
    pub fn total(&self) -> T {
        self.e2u + self.psi4
    }
}

/// `∫_Ω e^{2u}` and `∫_Ω |ψ|⁴` separately.
pub fn energy_parts<T: Real>(u: &ScalarField<T>, psi: &SpinorField<T>, region: &Domain<T>) -> Result<EnergyParts<T>> {
    check_same(u.grid(), psi.grid())?;
    let grid = u.grid();
    let w = grid.region_weights(region)?;
    let e2u: Vec<T> = if u.is_vanished() {
        Vec::new()
    } else {
        w.iter()
            .map(|&(k, wk)| {
                let e = u.exp_u(k);
                wk * e * e
            })
            .collect()
    };
    let psi4: Vec<T> = w
        .iter()
        .map(|&(k, wk)| {
            let n = psi.norm_sqr_at(k);
            wk * n * n
        })
        .collect();
    Ok(EnergyParts { e2u: pairwise_sum(&e2u), psi4: pairwise_sum(&psi4) })
}

/// `E(u, ψ; Ω) = ∫_Ω (e^{2u} + |ψ|⁴)`.
pub fn energy<T: Real>(u: &ScalarField<T>, psi: &SpinorField<T>, region: &Domain<T>) -> Result<T> {
    energy_parts(u, psi, region).map(|e| e.total())
}

/// Edge-based `|∇u|²` at node `k`: half the sum of squared differences to the
/// four neighbors, so that `∑ h² · ½|∇u|²` has gradient `−h² Δ₅u`.
fn edge_grad_sqr<T: Real>(grid: &Grid<T>, v: &[T], k: usize) -> T {
    let (i, j) = grid.ij(k);
    let nx = grid.nx();
    let mut acc = T::zero();
    let mut add = |nb: usize| {
        let d = v[nb] - v[k];
        acc = acc + d * d;
    };
    if i > 0 {
        add(k - 1);
    }
    if i + 1 < nx {
        add(k + 1);
    }
    if j > 0 {
        add(k - nx);
    }
    if j + 1 < grid.ny() {
        add(k + nx);
    }
    acc / (T::lit(2.0) * grid.h() * grid.h())
}

/// The action on a flat chart,
/// `∫_Ω ½|∇u|² + Re⟨(D + e^u)ψ, ψ⟩ + F|ψ|⁴ − e^{2u}`.
pub fn action<T: Real>(
    u: &ScalarField<T>,
    psi: &SpinorField<T>,
    coupling: &CouplingField<T>,
    region: &Domain<T>,
) -> Result<T> {
    if u.is_vanished() {
        return Err(Error::Unsupported("the action needs a non-vanished scalar part".into()));
    }
    check_same(u.grid(), psi.grid())?;
    coupling.check_grid(u.grid())?;
    let grid = u.grid();
    let w = grid.region_weights(region)?;
    let dpsi = dirac_apply(psi)?;
    let terms: Vec<T> = w
        .iter()
        .map(|&(k, wk)| {
            let eu = u.exp_u(k);
            let p = psi.value(k);
            let n2 = p.norm_sqr();
            let density = T::lit(0.5) * edge_grad_sqr(grid, u.values(), k) + dpsi.value(k).real_dot(p) + eu * n2
                + coupling.value(k) * n2 * n2
                - eu * eu;
            wk * density
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Residuals of the system on interior nodes (zero elsewhere).
#[derive(Clone, Debug)]
pub struct Residuals<T> {
    /// `−Δu − 2e^{2u} + e^u|ψ|²`; `None` when `u` is vanished.
    pub u: Option<ScalarField<T>>,
    /// `Dψ + e^uψ + 2F|ψ|²ψ`.
    pub psi: SpinorField<T>,
}

impl<T: Real> Residuals<T> {
    pub fn sup_u(&self) -> Option<T> {
        self.u.as_ref().map(|r| {
            let g = r.grid();
            crate::scalar::sup_norm_masked(r.values(), g.interior_mask())
        })
    }

    pub fn sup_psi(&self) -> T {
        let g = self.psi.grid();
        (0..g.len())
            .filter(|&k| g.interior_mask()[k])
            .fold(T::zero(), |a, k| a.max(self.psi.value(k).norm()))
    }
}

pub fn residuals<T: Real>(u: &ScalarField<T>, psi: &SpinorField<T>, coupling: &CouplingField<T>) -> Result<Residuals<T>> {
    check_same(u.grid(), psi.grid())?;
    coupling.check_grid(u.grid())?;
    let grid = u.grid().clone();
    let interior = grid.interior_mask();
    let dpsi = dirac_apply(psi)?;
    let mut rpsi = SpinorField::zeros(grid.clone());
    let mut ru = if u.is_vanished() { None } else { Some(vec![T::zero(); grid.len()]) };
    let two = T::lit(2.0);
    for k in 0..grid.len() {
        if !interior[k] {
            continue;
        }
        let eu = u.exp_u(k);
        let p = psi.value(k);
        let n2 = p.norm_sqr();
        if let Some(r) = ru.as_mut() {
            r[k] = -five_point(&grid, u.values(), k) - two * eu * eu + eu * n2;
        }
        let f = coupling.value(k);
        rpsi.set(k, dpsi.value(k) + p.scale(eu + two * f * n2));
    }
    Ok(Residuals { u: ru.map(|r| ScalarField::new(grid.clone(), r)).transpose()?, psi: rpsi })
}

/// Compares a central difference of the action along `direction` with the
/// discrete pairing `∫ r_u δu + 2 Re⟨r_ψ, δψ⟩`. Returns `(difference, pairing)`.
pub fn variational_check<T: Real>(
    u: &ScalarField<T>,
    psi: &SpinorField<T>,
    coupling: &CouplingField<T>,
    direction: (&ScalarField<T>, &SpinorField<T>),
    step: T,
) -> Result<(T, T)> {
    if !(step > T::zero()) {
        return Err(Error::Argument(format!("step must be positive, got {step}")));
    }
    if u.is_vanished() {
        return Err(Error::Unsupported("variational check needs a non-vanished scalar part".into()));
    }
    let (du, dpsi) = direction;
    check_same(u.grid(), du.grid())?;
    check_same(u.grid(), dpsi.grid())?;
    let grid = u.grid().clone();
    let region = *grid.domain();
    let shifted = |s: T| -> Result<T> {
        let mut uu = u.clone();
        for (a, b) in uu.values_mut().iter_mut().zip(du.values()) {
            *a = *a + s * *b;
        }
        let mut pp = psi.clone();
        for r in 0..4 {
            for (a, b) in pp.comps_mut()[r].iter_mut().zip(&dpsi.comps()[r]) {
                *a = *a + s * *b;
            }
        }
        action(&uu, &pp, coupling, &region)
    };
    let fd = (shifted(step)? - shifted(-step)?) / (step + step);
    let res = residuals(u, psi, coupling)?;
    let ru = res.u.as_ref().expect("non-vanished");
    let w = grid.weights();
    let two = T::lit(2.0);
    let terms: Vec<T> = (0..grid.len())
        .filter(|&k| w[k] > T::zero())
        .map(|k| w[k] * (ru.values()[k] * du.values()[k] + two * res.psi.value(k).real_dot(dpsi.value(k))))
        .collect();
    Ok((fd, pairwise_sum(&terms)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn disk(h: f64) -> Arc<Grid<f64>> {
        Arc::new(make_grid(Domain::disk(Point::origin(), 1.0), h).unwrap())
    }

    #[test]
    fn vanished_and_zero_has_no_energy() {
        let g = disk(1.0 / 32.0);
        let e = energy(&ScalarField::vanished(g.clone()), &SpinorField::zeros(g.clone()), g.domain()).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn action_trivial_values() {
        let g = disk(1.0 / 64.0);
        let pi = std::f64::consts::PI;
        let u = ScalarField::zeros(g.clone());
        let a = action(&u, &SpinorField::zeros(g.clone()), &CouplingField::constant(0.0), g.domain()).unwrap();
        assert!((a + pi).abs() < 1e-9);
        let one = SpinorValue::new(Complex::new(1.0, 0.0), Complex::new(0.0, 0.0));
        let psi = SpinorField::from_fn(g.clone(), |_| one);
        let a = action(&u, &psi, &CouplingField::constant(0.0), g.domain()).unwrap();
        assert!(a.abs() < 1e-9);
    }

    #[test]
    fn action_rejects_vanished() {
        let g = disk(1.0 / 16.0);
        let r = action(&ScalarField::vanished(g.clone()), &SpinorField::zeros(g.clone()), &CouplingField::constant(0.0), g.domain());
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn trivial_residuals() {
        let g = disk(1.0 / 16.0);
        let r = residuals(&ScalarField::zeros(g.clone()), &SpinorField::zeros(g.clone()), &CouplingField::constant(0.3)).unwrap();
        let ru = r.u.unwrap();
        for k in 0..g.len() {
            if g.interior_mask()[k] {
                assert_eq!(ru.values()[k], -2.0);
                assert_eq!(r.psi.value(k).norm(), 0.0);
            }
        }
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = disk(1.0 / 16.0);
        let b = disk(1.0 / 32.0);
        let r = residuals(&ScalarField::zeros(a), &SpinorField::zeros(b.clone()), &CouplingField::constant(0.0));
        assert!(matches!(r, Err(Error::GridMismatch)));
    }

    #[test]
    fn zero_direction_gives_zero_pair() {
        let g = disk(1.0 / 16.0);
        let u = ScalarField::from_fn(g.clone(), |p| 0.3 * p.x);
        let psi = SpinorField::zeros(g.clone());
        let (a, b) = variational_check(
            &u,
            &psi,
            &CouplingField::constant(0.0),
            (&ScalarField::zeros(g.clone()), &SpinorField::zeros(g.clone())),
            1e-4,
        )
        .unwrap();
        assert_eq!((a, b), (0.0, 0.0));
        assert!(variational_check(&u, &psi, &CouplingField::constant(0.0), (&u, &psi), 0.0).is_err());
    }
}
