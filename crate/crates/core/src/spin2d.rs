//! Two-dimensional Clifford algebra and the discrete Dirac and Laplace
//! operators on flat charts.
//!
//! The default representation is `γ₁ = iσ₁`, `γ₂ = iσ₂`. Both matrices are
//! skew-Hermitian and satisfy `γᵢγⱼ + γⱼγᵢ = −2δᵢⱼ I`, so `D = γ₁∂₁ + γ₂∂₂`
//! is formally self-adjoint and `D² = −Δ` on the flat plane.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{ScalarField, SpinorField};
use crate::grid::Grid;
use crate::scalar::Real;

pub type Mat2<T> = [[Complex<T>; 2]; 2];

/// A two-component complex spinor value.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct SpinorValue<T> {
    pub c: [Complex<T>; 2],
}

impl<T: Real> SpinorValue<T> {
    pub fn new(a: Complex<T>, b: Complex<T>) -> Self {
        Self { c: [a, b] }
    }

    pub fn zero() -> Self {
        Self::new(Complex::new(T::zero(), T::zero()), Complex::new(T::zero(), T::zero()))
    }

    pub fn from_reals(r: [T; 4]) -> Self {
        Self::new(Complex::new(r[0], r[1]), Complex::new(r[2], r[3]))
    }

    pub fn to_reals(self) -> [T; 4] {
        [self.c[0].re, self.c[0].im, self.c[1].re, self.c[1].im]
    }

    pub fn norm_sqr(self) -> T {
        self.c[0].norm_sqr() + self.c[1].norm_sqr()
    }

    pub fn norm(self) -> T {
        self.norm_sqr().sqrt()
    }

    /// Hermitian pairing `⟨a, b⟩ = conj(a)·b`.
    pub fn dot(self, other: Self) -> Complex<T> {
        self.c[0].conj() * other.c[0] + self.c[1].conj() * other.c[1]
    }

    /// `Re⟨a, b⟩`, the real inner product used throughout.
    pub fn real_dot(self, other: Self) -> T {
        self.dot(other).re
    }

    pub fn scale(self, s: T) -> Self {
        Self::new(self.c[0] * s, self.c[1] * s)
    }

    pub fn scale_c(self, s: Complex<T>) -> Self {
        Self::new(self.c[0] * s, self.c[1] * s)
    }
}

impl<T: Real> std::ops::Add for SpinorValue<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.c[0] + o.c[0], self.c[1] + o.c[1])
    }
}

impl<T: Real> std::ops::Sub for SpinorValue<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.c[0] - o.c[0], self.c[1] - o.c[1])
    }
}

fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

pub fn mat_apply<T: Real>(m: &Mat2<T>, s: SpinorValue<T>) -> SpinorValue<T> {
    SpinorValue::new(m[0][0] * s.c[0] + m[0][1] * s.c[1], m[1][0] * s.c[0] + m[1][1] * s.c[1])
}

fn mat_mul<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    let mut out = [[Complex::new(T::zero(), T::zero()); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// A representation of the planar Clifford algebra on `ℂ²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CliffordRep<T> {
    pub gamma1: Mat2<T>,
    pub gamma2: Mat2<T>,
}

impl<T: Real> Default for CliffordRep<T> {
    fn default() -> Self {
        Self::standard()
    }
}

impl<T: Real> CliffordRep<T> {
    /// `γ₁ = iσ₁`, `γ₂ = iσ₂`.
    pub fn standard() -> Self {
        let z = c(0.0, 0.0);
        Self {
            gamma1: [[z, c(0.0, 1.0)], [c(0.0, 1.0), z]],
            gamma2: [[z, c(1.0, 0.0)], [c(-1.0, 0.0), z]],
        }
    }

    /// Representation obtained by conjugating with a unitary `U`: `γᵢ ↦ U γᵢ U†`.
    pub fn conjugated(&self, u: &Mat2<T>) -> Self {
        let mut udag = *u;
        for (i, row) in udag.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = u[j][i].conj();
            }
        }
        Self {
            gamma1: mat_mul(&mat_mul(u, &self.gamma1), &udag),
            gamma2: mat_mul(&mat_mul(u, &self.gamma2), &udag),
        }
    }

    pub fn gamma(&self, axis: usize) -> &Mat2<T> {
        if axis == 0 {
            &self.gamma1
        } else {
            &self.gamma2
        }
    }

    /// Largest entrywise defect of the Clifford relations and of skew-Hermiticity.
    pub fn relation_defect(&self) -> T {
        let gs = [&self.gamma1, &self.gamma2];
        let mut worst = T::zero();
        for (a, ga) in gs.iter().enumerate() {
            for (b, gb) in gs.iter().enumerate() {
                let ab = mat_mul(ga, gb);
                let ba = mat_mul(gb, ga);
                for i in 0..2 {
                    for j in 0..2 {
                        let want = if a == b && i == j { T::lit(-2.0) } else { T::zero() };
                        let v = ab[i][j] + ba[i][j] - Complex::new(want, T::zero());
                        worst = worst.max(v.norm());
                    }
                }
            }
            for i in 0..2 {
                for j in 0..2 {
                    worst = worst.max((ga[i][j] + ga[j][i].conj()).norm());
                }
            }
        }
        worst
    }

    /// Clifford multiplication `(v₁γ₁ + v₂γ₂)·s`.
    pub fn mul(&self, v: [T; 2], s: SpinorValue<T>) -> SpinorValue<T> {
        mat_apply(&self.gamma1, s).scale(v[0]) + mat_apply(&self.gamma2, s).scale(v[1])
    }

    /// Chiral-bag projector `½(I − i ν·γ)` for a unit normal `ν`.
    pub fn bag_projector(&self, normal: [T; 2]) -> Mat2<T> {
        let half = T::lit(0.5);
        let i = Complex::new(T::zero(), T::one());
        let mut p = [[Complex::new(T::zero(), T::zero()); 2]; 2];
        for (r, row) in p.iter_mut().enumerate() {
            for (col, v) in row.iter_mut().enumerate() {
                let nu = self.gamma1[r][col] * normal[0] + self.gamma2[r][col] * normal[1];
                let id = if r == col { Complex::new(T::one(), T::zero()) } else { Complex::new(T::zero(), T::zero()) };
                *v = (id - i * nu) * half;
            }
        }
        p
    }

    /// Applies `D = γ₁∂₁ + γ₂∂₂` with second-order differences.
    pub fn dirac(&self, psi: &SpinorField<T>) -> Result<SpinorField<T>> {
        let grid = psi.grid().clone();
        check_stencil_grid(&grid)?;
        let mut out = SpinorField::zeros(grid.clone());
        let comps = psi.comps();
        let inside = grid.inside_mask();
        for k in 0..grid.len() {
            if !inside[k] {
                continue;
            }
            let mut d = [[T::zero(); 4]; 2];
            for (axis, da) in d.iter_mut().enumerate() {
                for (r, v) in comps.iter().enumerate() {
                    da[r] = axis_derivative(&grid, v, k, axis, inside);
                }
            }
            let dx = SpinorValue::from_reals(d[0]);
            let dy = SpinorValue::from_reals(d[1]);
            let val = mat_apply(&self.gamma1, dx) + mat_apply(&self.gamma2, dy);
            out.set(k, val);
        }
        Ok(out)
    }
}

/// `clifford_mul` in the default representation.
pub fn clifford_mul<T: Real>(v: [T; 2], s: SpinorValue<T>) -> SpinorValue<T> {
    CliffordRep::standard().mul(v, s)
}

/// `D ψ` in the default representation, valid on interior nodes; boundary
/// nodes use one-sided second-order differences.
pub fn dirac_apply<T: Real>(psi: &SpinorField<T>) -> Result<SpinorField<T>> {
    CliffordRep::standard().dirac(psi)
}

pub(crate) fn check_stencil_grid<T: Real>(grid: &Grid<T>) -> Result<()> {
    if grid.nx() < 5 || grid.ny() < 5 {
        return Err(Error::Config("stencil operators need at least 5 nodes per axis".into()));
    }
    Ok(())
}

/// Stencil of the derivative along `axis` at node `k`: centered when both
/// neighbors are valid, otherwise one-sided second order, falling back to
/// first order when only one neighbor is available. Returns `(node, coefficient)`
/// pairs; unused slots have coefficient zero.
pub(crate) fn axis_stencil<T: Real>(grid: &Grid<T>, k: usize, axis: usize, valid: &[bool]) -> [(usize, T); 3] {
    let (i, j) = grid.ij(k);
    let (pos, n, stride) = if axis == 0 { (i, grid.nx(), 1) } else { (j, grid.ny(), grid.nx()) };
    let ok = |off: i64| -> bool {
        let p = pos as i64 + off;
        p >= 0 && p < n as i64 && valid[(k as i64 + off * stride as i64) as usize]
    };
    let at = |off: i64| (k as i64 + off * stride as i64) as usize;
    let h = grid.h();
    let two_h = h + h;
    let z = T::zero();
    if ok(1) && ok(-1) {
        [(at(1), two_h.recip()), (at(-1), -two_h.recip()), (k, z)]
    } else if ok(1) && ok(2) {
        [(k, T::lit(-3.0) / two_h), (at(1), T::lit(4.0) / two_h), (at(2), -two_h.recip())]
    } else if ok(-1) && ok(-2) {
        [(k, T::lit(3.0) / two_h), (at(-1), T::lit(-4.0) / two_h), (at(-2), two_h.recip())]
    } else if ok(1) {
        [(at(1), h.recip()), (k, -h.recip()), (k, z)]
    } else if ok(-1) {
        [(k, h.recip()), (at(-1), -h.recip()), (k, z)]
    } else {
        [(k, z), (k, z), (k, z)]
    }
}

#[inline]
pub(crate) fn axis_derivative<T: Real>(grid: &Grid<T>, v: &[T], k: usize, axis: usize, valid: &[bool]) -> T {
    axis_stencil(grid, k, axis, valid).iter().fold(T::zero(), |a, &(n, c)| a + c * v[n])
}

/// 5-point Laplacian at interior node `k`.
#[inline]
pub(crate) fn five_point<T: Real>(grid: &Grid<T>, v: &[T], k: usize) -> T {
    let nx = grid.nx();
    let h2 = grid.h() * grid.h();
    (v[k - 1] + v[k + 1] + v[k - nx] + v[k + nx] - T::lit(4.0) * v[k]) / h2
}

/// Fields the 5-point Laplacian acts on.
pub trait Laplace: Sized {
    fn laplacian(&self) -> Result<Self>;
}

impl<T: Real> Laplace for ScalarField<T> {
    fn laplacian(&self) -> Result<Self> {
        if self.is_vanished() {
            return Err(Error::Unsupported("Laplacian of a vanished scalar field".into()));
        }
        let grid = self.grid().clone();
        check_stencil_grid(&grid)?;
        let v = self.values();
        let mut out = vec![T::zero(); grid.len()];
        for (k, o) in out.iter_mut().enumerate() {
            if grid.interior_mask()[k] {
                *o = five_point(&grid, v, k);
            }
        }
        ScalarField::new(grid, out)
    }
}

impl<T: Real> Laplace for SpinorField<T> {
    fn laplacian(&self) -> Result<Self> {
        let grid = self.grid().clone();
        check_stencil_grid(&grid)?;
        let mut out = SpinorField::zeros(grid.clone());
        for r in 0..4 {
            let v = &self.comps()[r];
            let o = &mut out.comps_mut()[r];
            for k in 0..grid.len() {
                if grid.interior_mask()[k] {
                    o[k] = five_point(&grid, v, k);
                }
            }
        }
        Ok(out)
    }
}

/// 5-point Laplacian of a scalar or spinor field, valid on interior nodes (zero elsewhere).
pub fn laplacian_apply<F: Laplace>(f: &F) -> Result<F> {
    f.laplacian()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Domain, Point};
    use std::sync::Arc;

    #[test]
    fn standard_rep_relations_are_exact() {
        assert_eq!(CliffordRep::<f64>::standard().relation_defect(), 0.0);
    }

    #[test]
    fn e1_times_up_spinor() {
        let s = SpinorValue::new(c(1.0, 0.0), c(0.0, 0.0));
        let out = clifford_mul([1.0, 0.0], s);
        assert_eq!(out, SpinorValue::new(c(0.0, 0.0), c(0.0, 1.0)));
    }

    #[test]
    fn bag_projector_is_idempotent() {
        let rep = CliffordRep::<f64>::standard();
        let t: f64 = 0.7;
        let p = rep.bag_projector([t.cos(), t.sin()]);
        let p2 = mat_mul(&p, &p);
        for i in 0..2 {
            for j in 0..2 {
                assert!((p2[i][j] - p[i][j]).norm() < 1e-15);
            }
        }
        // rank one: trace 1
        assert!((p[0][0] + p[1][1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn laplacian_exact_on_quadratics() {
        let g = Arc::new(make_grid(Domain::disk(Point::origin(), 1.0f64), 1.0 / 32.0).unwrap());
        let u = ScalarField::from_fn(g.clone(), |p| p.norm_sqr());
        let lap = laplacian_apply(&u).unwrap();
        for k in 0..g.len() {
            if g.interior_mask()[k] {
                assert!((lap.values()[k] - 4.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dirac_of_constant_is_zero() {
        let g = Arc::new(make_grid(Domain::rectangle(0.0, 1.0, 0.0, 1.0), 1.0 / 16.0).unwrap());
        let psi = SpinorField::from_fn(g.clone(), |_| SpinorValue::new(c(0.3, -1.0), c(2.0, 0.5)));
        let d = dirac_apply(&psi).unwrap();
        for k in 0..g.len() {
            assert!(d.value(k).norm() < 1e-12);
        }
    }
}
