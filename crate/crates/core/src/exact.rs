//! Closed-form solutions used as oracles: Liouville bubbles, conical
//! singular bubbles and Killing-spinor Yamabe bubbles, with their energies.

use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{ScalarField, SpinorField};
use crate::grid::{Domain, Grid, Point};
use crate::scalar::Real;
use crate::spin2d::{CliffordRep, SpinorValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BubbleKind {
    Liouville,
    Conical,
    Yamabe,
}

/// Orientation of the Clifford factor in the Yamabe bubble: `(1 − λy·)` or `(1 + λy·)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum YamabeSign {
    #[serde(rename = "-", alias = "minus")]
    Minus,
    #[serde(rename = "+", alias = "plus")]
    Plus,
}

impl YamabeSign {
    fn factor<T: Real>(self) -> T {
        match self {
            YamabeSign::Minus => -T::one(),
            YamabeSign::Plus => T::one(),
        }
    }
}

fn default_phi0<T: Real>() -> SpinorValue<T> {
    SpinorValue::new(Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()))
}

/// Parameters of one catalog solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BubbleParams<T> {
    pub kind: BubbleKind,
    pub lambda: T,
    pub center: Point<T>,
    #[serde(default)]
    pub beta: T,
    #[serde(default)]
    pub mu: T,
    #[serde(default = "default_phi0")]
    pub phi0: SpinorValue<T>,
    /// `None` resolves the orientation with a residual probe.
    #[serde(default)]
    pub sign: Option<YamabeSign>,
}

impl<T: Real> BubbleParams<T> {
    pub fn liouville(lambda: T, center: Point<T>) -> Self {
        Self { kind: BubbleKind::Liouville, lambda, center, beta: T::zero(), mu: T::zero(), phi0: default_phi0(), sign: None }
    }

    pub fn conical(beta: T, lambda: T) -> Self {
        Self { kind: BubbleKind::Conical, beta, ..Self::liouville(lambda, Point::origin()) }
    }

    pub fn yamabe(lambda: T, mu: T, center: Point<T>) -> Self {
        Self { kind: BubbleKind::Yamabe, mu, ..Self::liouville(lambda, center) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > T::zero()) || !self.lambda.is_finite() {
            return Err(Error::Argument(format!("bubble scale must be positive, got {}", self.lambda)));
        }
        match self.kind {
            BubbleKind::Conical if !(self.beta > -T::one()) => {
                Err(Error::Argument(format!("cone order must exceed -1, got {}", self.beta)))
            }
            BubbleKind::Yamabe if self.mu == T::zero() || !self.mu.is_finite() => {
                Err(Error::Argument("Yamabe bubbles need a nonzero coupling".into()))
            }
            BubbleKind::Yamabe if (self.phi0.norm() - T::one()).abs() > T::lit(1e-6) => {
                Err(Error::Argument(format!("seed spinor must have unit norm, got {}", self.phi0.norm())))
            }
            _ => Ok(()),
        }
    }

    /// Amplitude `s = |2μ|^{−1/2}` of a Yamabe bubble.
    pub fn amplitude(&self) -> T {
        yamabe_amplitude(self.mu)
    }
}

pub fn yamabe_amplitude<T: Real>(mu: T) -> T {
    (T::lit(2.0) * mu.abs()).sqrt().recip()
}

/// `ln(√2 λ / (1 + λ²|x − c|²))`.
pub fn liouville_u<T: Real>(lambda: T, center: Point<T>, p: Point<T>) -> T {
    (T::SQRT_2() * lambda).ln() - (T::one() + lambda * lambda * (p - center).norm_sqr()).ln()
}

/// `ln(√2 (1+β) λ |x|^β / (1 + λ²|x|^{2(1+β)}))` about `center`.
pub fn conical_u<T: Real>(beta: T, lambda: T, center: Point<T>, p: Point<T>) -> T {
    let r = (p - center).norm();
    let one = T::one();
    (T::SQRT_2() * (one + beta) * lambda).ln() + beta * r.ln()
        - (one + lambda * lambda * r.powf(T::lit(2.0) * (one + beta))).ln()
}

/// `s √(2λ)/(1 + λ²|y|²) · (φ₀ ± λ y·φ₀)` with `y = x − c`.
pub fn yamabe_value<T: Real>(
    rep: &CliffordRep<T>,
    lambda: T,
    mu: T,
    phi0: SpinorValue<T>,
    sign: YamabeSign,
    center: Point<T>,
    p: Point<T>,
) -> SpinorValue<T> {
    let y = p - center;
    let amp = yamabe_amplitude(mu) * (T::lit(2.0) * lambda).sqrt() / (T::one() + lambda * lambda * y.norm_sqr());
    let cliff = rep.mul([y.x, y.y], phi0).scale(lambda * sign.factor());
    (phi0 + cliff).scale(amp)
}

pub fn liouville_bubble<T: Real>(lambda: T, center: Point<T>, grid: Arc<Grid<T>>) -> Result<(ScalarField<T>, SpinorField<T>)> {
    BubbleParams::liouville(lambda, center).validate()?;
    let u = ScalarField::from_fn(grid.clone(), |p| liouville_u(lambda, center, p));
    Ok((u, SpinorField::zeros(grid)))
}

/// Conical profile about `center`. The value at `center` itself is not finite
/// for `β ≠ 0`; callers evaluate on annuli or use singular quadrature.
pub fn conical_bubble<T: Real>(beta: T, lambda: T, center: Point<T>, grid: Arc<Grid<T>>) -> Result<ScalarField<T>> {
    BubbleParams::conical(beta, lambda).validate()?;
    Ok(ScalarField::from_fn(grid, |p| conical_u(beta, lambda, center, p)))
}

/// Spinorial Yamabe bubble solving `Dψ = −2μ|ψ|²ψ`; the scalar part is vanished.
pub fn yamabe_bubble<T: Real>(
    lambda: T,
    mu: T,
    phi0: SpinorValue<T>,
    sign: Option<YamabeSign>,
    center: Point<T>,
    grid: Arc<Grid<T>>,
) -> Result<(ScalarField<T>, SpinorField<T>)> {
    yamabe_bubble_with(&CliffordRep::standard(), lambda, mu, phi0, sign, center, grid)
}

pub fn yamabe_bubble_with<T: Real>(
    rep: &CliffordRep<T>,
    lambda: T,
    mu: T,
    phi0: SpinorValue<T>,
    sign: Option<YamabeSign>,
    center: Point<T>,
    grid: Arc<Grid<T>>,
) -> Result<(ScalarField<T>, SpinorField<T>)> {
    BubbleParams { phi0, sign, ..BubbleParams::yamabe(lambda, mu, center) }.validate()?;
    let sign = match sign {
        Some(s) => s,
        None => probe_yamabe_sign(rep, mu)?,
    };
    let psi = SpinorField::from_fn(grid.clone(), |p| yamabe_value(rep, lambda, mu, phi0, sign, center, p));
    Ok((ScalarField::vanished(grid), psi))
}

/// Picks the orientation whose bubble satisfies `Dψ + 2μ|ψ|²ψ = 0` at five
/// probe points, using fourth-order differences of the closed form in `f64`.
pub fn probe_yamabe_sign<T: Real>(rep: &CliffordRep<T>, mu: T) -> Result<YamabeSign> {
    if mu == T::zero() {
        return Err(Error::Argument("Yamabe bubbles need a nonzero coupling".into()));
    }
    let rep64 = CliffordRep::<f64> {
        gamma1: rep.gamma1.map(|r| r.map(|z| Complex::new(z.re.as_f64(), z.im.as_f64()))),
        gamma2: rep.gamma2.map(|r| r.map(|z| Complex::new(z.re.as_f64(), z.im.as_f64()))),
    };
    let mu = mu.as_f64();
    let phi0 = default_phi0::<f64>();
    let probes = [(0.0, 0.0), (0.3, -0.2), (-0.7, 0.4), (1.1, 0.9), (-0.5, -1.3)];
    let defect = |sign: YamabeSign| -> f64 {
        let f = |x: f64, y: f64| yamabe_value(&rep64, 1.0, mu, phi0, sign, Point::origin(), Point::new(x, y));
        let e = 1e-3;
        let d = |g: &dyn Fn(f64) -> SpinorValue<f64>| -> SpinorValue<f64> {
            (g(-2.0 * e) - g(2.0 * e) + (g(e) - g(-e)).scale(8.0)).scale(1.0 / (12.0 * e))
        };
        probes
            .iter()
            .map(|&(x, y)| {
                let dx = d(&|t| f(x + t, y));
                let dy = d(&|t| f(x, y + t));
                let dpsi = crate::spin2d::mat_apply(&rep64.gamma1, dx) + crate::spin2d::mat_apply(&rep64.gamma2, dy);
                let psi = f(x, y);
                (dpsi + psi.scale(2.0 * mu * psi.norm_sqr())).norm() / psi.norm().max(1e-300)
            })
            .fold(0.0, f64::max)
    };
    let (dm, dp) = (defect(YamabeSign::Minus), defect(YamabeSign::Plus));
    let tol = 1e-6;
    match (dm < tol, dp < tol) {
        (true, false) => Ok(YamabeSign::Minus),
        (false, true) => Ok(YamabeSign::Plus),
        _ => Err(Error::Unsupported(format!(
            "no Yamabe orientation solves the equation in this representation (defects {dm:e}, {dp:e})"
        ))),
    }
}

/// Closed-form energies of a catalog bubble.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BubbleEnergy<T> {
    /// `∫ 2e^{2u} − e^u|ψ|²`.
    pub mass: T,
    pub e2u_energy: T,
    pub psi4_energy: T,
}

/// Integration region for [`bubble_energy`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnergyRegion<T> {
    EntirePlane,
    Area(Domain<T>),
}

/// Fraction `λ²R²/(1 + λ²R²)` (with `R^{2+2β}` for conical bubbles) of the
/// entire-plane energy contained in `B_R(center)`.
fn ball_fraction<T: Real>(p: &BubbleParams<T>, radius: T) -> T {
    let s = match p.kind {
        BubbleKind::Conical => p.lambda * p.lambda * radius.powf(T::lit(2.0) * (T::one() + p.beta)),
        _ => p.lambda * p.lambda * radius * radius,
    };
    if s.is_infinite() {
        T::one()
    } else {
        s / (T::one() + s)
    }
}

fn plane_energy<T: Real>(p: &BubbleParams<T>) -> BubbleEnergy<T> {
    let pi = T::PI();
    let two = T::lit(2.0);
    match p.kind {
        BubbleKind::Liouville => BubbleEnergy { mass: two * two * pi, e2u_energy: two * pi, psi4_energy: T::zero() },
        BubbleKind::Conical => {
            let f = T::one() + p.beta;
            BubbleEnergy { mass: two * two * pi * f, e2u_energy: two * pi * f, psi4_energy: T::zero() }
        }
        BubbleKind::Yamabe => {
            let s = p.amplitude();
            BubbleEnergy { mass: T::zero(), e2u_energy: T::zero(), psi4_energy: two * two * pi * s.powi(4) }
        }
    }
}

/// Closed-form `{mass, ∫e^{2u}, ∫|ψ|⁴}` over the plane, a disk centered at
/// the bubble, or an annulus centered at the bubble.
pub fn bubble_energy<T: Real>(params: &BubbleParams<T>, region: &EnergyRegion<T>) -> Result<BubbleEnergy<T>> {
    params.validate()?;
    let full = plane_energy(params);
    let frac = match region {
        EnergyRegion::EntirePlane => T::one(),
        EnergyRegion::Area(d) => {
            let tol = T::lit(1e-12) * (T::one() + d.min_dimension());
            if (d.center() - params.center).norm() > tol {
                return Err(Error::Unsupported("closed-form energies need a region centered at the bubble".into()));
            }
            match *d {
                Domain::Disk { radius, .. } => ball_fraction(params, radius),
                Domain::Annulus { inner, outer, .. } => ball_fraction(params, outer) - ball_fraction(params, inner),
                Domain::Rectangle { .. } => {
                    return Err(Error::Unsupported("closed-form energies over rectangles".into()));
                }
            }
        }
    };
    Ok(BubbleEnergy { mass: full.mass * frac, e2u_energy: full.e2u_energy * frac, psi4_energy: full.psi4_energy * frac })
}

/// `g(s) = 1/(1+s²) − 1/(1+4s²)`: the share of a Liouville bubble's `e^{2u}`
/// energy (in units of `2π`) on the annulus `B_{2t}∖B_t` with `s = λt`.
pub fn neck_share<T: Real>(s: T) -> T {
    let one = T::one();
    one / (one + s * s) - one / (one + T::lit(4.0) * s * s)
}
