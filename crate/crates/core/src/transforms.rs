//! Conformal transforms: blow-up rescaling, Kelvin inversion and stereographic
//! pullback to the round sphere.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{check_same, ScalarField, SpinorField};
use crate::grid::{Grid, Point};
use crate::scalar::{pairwise_sum, Real};

/// Samples `x ↦ src(map(x))` on the target grid. `weight` returns the additive
/// shift for `u` and the multiplicative factor for `ψ` at each target point.
fn pull<T: Real>(
    u: &ScalarField<T>,
    psi: &SpinorField<T>,
    target: &Arc<Grid<T>>,
    map: impl Fn(Point<T>) -> Point<T>,
    weight: impl Fn(Point<T>) -> (T, T),
) -> Result<(ScalarField<T>, SpinorField<T>)> {
    check_same(u.grid(), psi.grid())?;
    let src = u.grid();
    let valid = src.inside_mask();
    let mut uv = vec![T::zero(); target.len()];
    let mut pv: [Vec<T>; 4] = std::array::from_fn(|_| vec![T::zero(); target.len()]);
    for k in 0..target.len() {
        if !target.inside_mask()[k] {
            continue;
        }
        let x = target.point(k);
        let y = map(x);
        let (shift, factor) = weight(x);
        if !u.is_vanished() {
            uv[k] = src.interpolate(u.values(), y, valid)? + shift;
        }
        for (r, comp) in pv.iter_mut().enumerate() {
            comp[k] = src.interpolate(&psi.comps()[r], y, valid)? * factor;
        }
    }
    let us = if u.is_vanished() { ScalarField::vanished(target.clone()) } else { ScalarField::new(target.clone(), uv)? };
    Ok((us, SpinorField::from_comps(target.clone(), pv)?))
}

/// `ũ(x) = u(λx + x₀) + ln λ`, `ψ̃(x) = λ^{1/2} ψ(λx + x₀)` on `target`.
pub fn rescale<T: Real>(
    u: &ScalarField<T>,
    psi: &SpinorField<T>,
    x0: Point<T>,
    lam: T,
    target: &Arc<Grid<T>>,
) -> Result<(ScalarField<T>, SpinorField<T>)> {
    if !(lam > T::zero()) {
        return Err(Error::Argument(format!("rescaling factor must be positive, got {lam}")));
    }
    let (shift, factor) = (lam.ln(), lam.sqrt());
    pull(u, psi, target, |x| x.scale(lam) + x0, |_| (shift, factor))
}

/// `u₁(x) = u(x/|x|²) − 2 ln|x|`, `ψ₁(x) = |x|^{−1} ψ(x/|x|²)` on a target
/// grid whose domain avoids the origin.
pub fn kelvin<T: Real>(
    u: &ScalarField<T>,
    psi: &SpinorField<T>,
    target: &Arc<Grid<T>>,
) -> Result<(ScalarField<T>, SpinorField<T>)> {
    if target.domain().contains(Point::origin()) {
        return Err(Error::Argument("Kelvin target must exclude the origin".into()));
    }
    pull(
        u,
        psi,
        target,
        |x| x.scale(x.norm_sqr().recip()),
        |x| {
            let r = x.norm();
            (-T::lit(2.0) * r.ln(), r.recip())
        },
    )
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pnm1 = if n == 0 { 0.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Product quadrature on the sphere cap `θ ∈ [θ_min, π]`: Gauss–Legendre in
/// `cos θ` times the uniform rule in `φ`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SphereSample<T> {
    pub theta: Vec<T>,
    pub phi: Vec<T>,
    /// `1/(1 − cos θ)`.
    pub lambda_conf: Vec<T>,
    /// `sin θ dθ dφ` weights.
    pub weights: Vec<T>,
    pub theta_min: T,
}

impl<T: Real> SphereSample<T> {
    pub fn new(n_theta: usize, n_phi: usize, theta_min: T) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(Error::Argument("sphere sample counts must be positive".into()));
        }
        if !(theta_min > T::zero()) || !(theta_min < T::PI()) {
            return Err(Error::Argument(format!("theta_min must lie in (0, π), got {theta_min}")));
        }
        let c_max = theta_min.as_f64().cos();
        let half = 0.5 * (c_max + 1.0);
        let mid = 0.5 * (c_max - 1.0);
        let dphi = std::f64::consts::TAU / n_phi as f64;
        let mut s = SphereSample { theta: vec![], phi: vec![], lambda_conf: vec![], weights: vec![], theta_min };
        for (x, w) in gauss_legendre(n_theta) {
            let c = mid + half * x;
            let theta = c.acos();
            for j in 0..n_phi {
                s.theta.push(T::lit(theta));
                s.phi.push(T::lit(dphi * j as f64));
                s.lambda_conf.push(T::lit(1.0 / (1.0 - c)));
                s.weights.push(T::lit(w * half * dphi));
            }
        }
        Ok(s)
    }

    /// Largest planar radius `cot(θ_min/2)` reached by the samples.
    pub fn planar_radius(&self) -> T {
        (self.theta_min / T::lit(2.0)).tan().recip()
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

/// Stereographic projection from the north pole, `f(θ, φ) = (sin θ cos φ, sin θ sin φ)/(1 − cos θ)`.
pub fn stereographic<T: Real>(theta: T, phi: T) -> Point<T> {
    let d = T::one() - theta.cos();
    Point::new(theta.sin() * phi.cos() / d, theta.sin() * phi.sin() / d)
}

/// Sphere fields `v = u∘f + ln λ` and `|φ| = λ^{1/2}|ψ∘f|` with their energies.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpherePullback<T> {
    /// `None` when `u` is vanished.
    pub v: Option<Vec<T>>,
    pub phi_norm: Vec<T>,
    pub e2v_integral: T,
    pub phi4_integral: T,
    /// `sup |v|` over the band `θ ∈ [θ_min, θ_min + band]` closest to the pole.
    pub pole_sup: Option<T>,
}

pub fn stereographic_pullback<T: Real>(
    u: &ScalarField<T>,
    psi: &SpinorField<T>,
    sphere: &SphereSample<T>,
    pole_band: T,
) -> Result<SpherePullback<T>> {
    check_same(u.grid(), psi.grid())?;
    let grid = u.grid();
    let valid = grid.inside_mask();
    let n2 = psi.norm_sqr();
    let mut v = Vec::with_capacity(sphere.len());
    let mut phi_norm = Vec::with_capacity(sphere.len());
    let mut e2v = Vec::with_capacity(sphere.len());
    let mut phi4 = Vec::with_capacity(sphere.len());
    let mut pole_sup: Option<T> = None;
    for k in 0..sphere.len() {
        let x = stereographic(sphere.theta[k], sphere.phi[k]);
        let lam = sphere.lambda_conf[k];
        let w = sphere.weights[k];
        let p2 = grid.interpolate(&n2, x, valid).map_err(|_| {
            Error::Domain(format!("sphere sample at θ = {} maps outside the planar grid", sphere.theta[k]))
        })?;
        let p2 = p2.max(T::zero());
        phi_norm.push((lam * p2).sqrt());
        phi4.push(w * lam * lam * p2 * p2);
        if !u.is_vanished() {
            let vk = grid.interpolate(u.values(), x, valid)? + lam.ln();
            e2v.push(w * (vk + vk).exp());
            if sphere.theta[k] <= sphere.theta_min + pole_band {
                pole_sup = Some(pole_sup.map_or(vk.abs(), |s| s.max(vk.abs())));
            }
            v.push(vk);
        }
    }
    Ok(SpherePullback {
        v: if u.is_vanished() { None } else { Some(v) },
        phi_norm,
        e2v_integral: pairwise_sum(&e2v),
        phi4_integral: pairwise_sum(&phi4),
        pole_sup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let q = gauss_legendre(8);
        let s: f64 = q.iter().map(|&(x, w)| w * x.powi(6)).sum();
        assert!((s - 2.0 / 7.0).abs() < 1e-14);
        let s: f64 = q.iter().map(|&(_, w)| w).sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn full_sphere_area() {
        let s = SphereSample::<f64>::new(32, 16, 1e-9).unwrap();
        let a: f64 = s.weights.iter().sum();
        assert!((a - 4.0 * std::f64::consts::PI).abs() < 1e-6);
    }

    #[test]
    fn stereographic_radius() {
        let t = 1.0f64;
        let p = stereographic(t, 0.3);
        assert!((p.norm() - (t / 2.0).tan().recip()).abs() < 1e-14);
    }
}
