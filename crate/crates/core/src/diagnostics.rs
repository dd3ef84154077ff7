//! Blow-up diagnostics: Pohozaev constants, local masses, the radial slope
//! identity, logarithmic fits, singularity typing, Brezis–Merle
//! classification and neck scans.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{check_same, energy_parts, CouplingField, ScalarField, SpinorField};
use crate::grid::{dyadic_annuli, Domain, Grid, Point, SingularCenter};
use crate::scalar::{pairwise_sum, Real};
use crate::spin2d::{axis_derivative, CliffordRep, SpinorValue};

/// A sampled family `(uₙ, ψₙ)` indexed by position.
pub type Family<T> = [(ScalarField<T>, SpinorField<T>)];

fn gradient<T: Real>(grid: &Grid<T>, v: &[T]) -> [Vec<T>; 2] {
    let valid = grid.inside_mask();
    std::array::from_fn(|axis| {
        (0..grid.len())
            .map(|k| if valid[k] { axis_derivative(grid, v, k, axis, valid) } else { T::zero() })
            .collect()
    })
}

fn check_ball<T: Real>(grid: &Grid<T>, center: Point<T>, radius: T) -> Result<()> {
    if !(radius > T::zero()) {
        return Err(Error::Argument(format!("radius must be positive, got {radius}")));
    }
    let margin = grid.h() * T::lit(2.0);
    if !grid.domain().contains_domain(&Domain::disk(center, radius + margin)) {
        return Err(Error::Domain(format!("ball of radius {radius} too close to the grid boundary")));
    }
    Ok(())
}

fn coupling_at<T: Real>(coupling: &CouplingField<T>, grid: &Grid<T>, p: Point<T>) -> Result<T> {
    match coupling {
        CouplingField::Constant(mu) => Ok(*mu),
        CouplingField::Sampled { values, .. } => grid.interpolate(values, p, grid.inside_mask()),
    }
}

/// Pohozaev constant on `B_R(center)`:
///
/// ```text
/// C = R∮(|∂_ν u|² − ½|∇u|²) − ∫_{B_R}(2e^{2u} − e^u|ψ|² − |ψ|⁴ x·∇F)
///     + R∮(e^{2u} + F|ψ|⁴) − ∮ Re⟨x·ψ, ∂_ν ψ⟩
/// ```
///
/// with `x` measured from `center`.
pub fn pohozaev_constant<T: Real>(
    u: &ScalarField<T>,
    psi: &SpinorField<T>,
    coupling: &CouplingField<T>,
    center: Point<T>,
    radius: T,
) -> Result<T> {
    pohozaev_constant_with(u, psi, coupling, center, radius, None)
}

/// As [`pohozaev_constant`]; `singular_exponent = Some(s)` declares that the
/// area integrand grows like `|x − center|^{−s}` and switches to singular quadrature.
pub fn pohozaev_constant_with<T: Real>(
    u: &ScalarField<T>,
    psi: &SpinorField<T>,
    coupling: &CouplingField<T>,
    center: Point<T>,
    radius: T,
    singular_exponent: Option<T>,
) -> Result<T> {
    check_same(u.grid(), psi.grid())?;
    let grid = u.grid().clone();
    check_ball(&grid, center, radius)?;
    let valid = grid.inside_mask();
    let rep = CliffordRep::<T>::standard();
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let gu = if u.is_vanished() { None } else { Some(gradient(&grid, u.values())) };
    let gp: [[Vec<T>; 2]; 4] = std::array::from_fn(|r| gradient(&grid, &psi.comps()[r]));

    let mut flux = Vec::new();
    let mut potential = Vec::new();
    let mut spin = Vec::new();
    for (p, nu, w) in grid.circle_samples(center, radius) {
        let interp = |v: &[T]| grid.interpolate(v, p, valid);
        let s = SpinorValue::from_reals([
            interp(&psi.comps()[0])?,
            interp(&psi.comps()[1])?,
            interp(&psi.comps()[2])?,
            interp(&psi.comps()[3])?,
        ]);
        let n2 = s.norm_sqr();
        let f = coupling_at(coupling, &grid, p)?;
        let mut e2u = T::zero();
        if let Some(g) = &gu {
            let (ux, uy) = (interp(&g[0])?, interp(&g[1])?);
            let dn = ux * nu.x + uy * nu.y;
            flux.push(w * (dn * dn - half * (ux * ux + uy * uy)));
            let uv = interp(u.values())?;
            e2u = (uv + uv).exp();
        }
        potential.push(w * (e2u + f * n2 * n2));
        let mut dn = [T::zero(); 4];
        for (r, d) in dn.iter_mut().enumerate() {
            *d = interp(&gp[r][0])? * nu.x + interp(&gp[r][1])? * nu.y;
        }
        let xpsi = rep.mul([nu.x * radius, nu.y * radius], s);
        spin.push(w * xpsi.real_dot(SpinorValue::from_reals(dn)));
    }

    let area_values: Vec<T> = (0..grid.len())
        .map(|k| {
            if !valid[k] {
                return T::zero();
            }
            let e = u.exp_u(k);
            let n2 = psi.norm_sqr_at(k);
            let x = grid.point(k) - center;
            two * e * e - e * n2 - n2 * n2 * x.dot(coupling.grad(k))
        })
        .collect();
    let disk = Domain::disk(center, radius);
    let area = match singular_exponent {
        Some(s) => grid.integrate_singular(&area_values, &disk, &SingularCenter { center, exponent: s })?,
        None => grid.integrate(&area_values, &crate::grid::Region::Area(disk))?,
    };
    Ok(radius * pairwise_sum(&flux) - area + radius * pairwise_sum(&potential) - pairwise_sum(&spin))
}

/// `m = ∫_{B_δ(center)} (2e^{2u} − e^u|ψ|²)`; zero for vanished `u`.
pub fn local_mass<T: Real>(u: &ScalarField<T>, psi: &SpinorField<T>, center: Point<T>, delta: T) -> Result<T> {
    check_same(u.grid(), psi.grid())?;
    let grid = u.grid();
    let disk = Domain::disk(center, delta);
    let w = grid.region_weights(&disk)?;
    if u.is_vanished() {
        return Ok(T::zero());
    }
    let two = T::lit(2.0);
    let terms: Vec<T> = w
        .iter()
        .map(|&(k, wk)| {
            let e = u.exp_u(k);
            wk * (two * e * e - e * psi.norm_sqr_at(k))
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Circle average `ū(r) = (1/2πr)∮_{∂B_r} u`.
pub fn circle_mean<T: Real>(u: &ScalarField<T>, center: Point<T>, r: T) -> Result<T> {
    if u.is_vanished() {
        return Err(Error::Unsupported("circle mean of a vanished field".into()));
    }
    let g = u.grid();
    Ok(g.circle_integral(u.values(), center, r, g.inside_mask())? / (T::TAU() * r))
}

/// `(r (ū(r+h) − ū(r−h))/2h, −local_mass(center, r)/2π)`.
pub fn radial_slope_identity<T: Real>(u: &ScalarField<T>, psi: &SpinorField<T>, center: Point<T>, r: T) -> Result<(T, T)> {
    let h = u.grid().h();
    if !(r > h + h) {
        return Err(Error::Argument(format!("radius {r} must exceed two grid spacings")));
    }
    let lhs = r * (circle_mean(u, center, r + h)? - circle_mean(u, center, r - h)?) / (h + h);
    let rhs = -local_mass(u, psi, center, r)? / T::TAU();
    Ok((lhs, rhs))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogFit<T> {
    pub coefficient: T,
    pub offset: T,
    /// Root-mean-square misfit.
    pub residual: T,
    pub nodes: usize,
}

impl<T: Real> LogFit<T> {
    /// `−2πc`.
    pub fn implied_mass(&self) -> T {
        -T::TAU() * self.coefficient
    }
}

/// Least-squares fit `u ≈ c ln|x − center| + offset` over nodes with
/// `inner ≤ |x − center| ≤ outer`.
pub fn log_coefficient_fit<T: Real>(u: &ScalarField<T>, center: Point<T>, inner: T, outer: T) -> Result<LogFit<T>> {
    if u.is_vanished() {
        return Err(Error::Unsupported("log fit of a vanished field".into()));
    }
    if !(inner > T::zero() && inner < outer) {
        return Err(Error::Argument(format!("need 0 < inner < outer, got {inner}, {outer}")));
    }
    let grid = u.grid();
    if !grid.domain().contains_domain(&Domain::annulus(center, inner, outer)) {
        return Err(Error::Domain("fit annulus leaves the grid".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 0..grid.len() {
        if !grid.inside_mask()[k] {
            continue;
        }
        let r = (grid.point(k) - center).norm();
        if r >= inner && r <= outer {
            xs.push(r.ln().as_f64());
            ys.push(u.values()[k].as_f64());
        }
    }
    let n = xs.len();
    if n < 16 {
        return Err(Error::Argument(format!("degenerate annulus: {n} nodes")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Argument("degenerate annulus: constant radius".into()));
    }
    let c = sxy / sxx;
    let b = my - c * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - c * x - b).powi(2)).sum();
    Ok(LogFit { coefficient: T::lit(c), offset: T::lit(b), residual: T::lit((rss / nf).sqrt()), nodes: n })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SingularityType {
    First,
    Second,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    /// `aₙ = max u − 2 ln(1 + max|ψ|)`; `None` stands for `−∞` (vanished `u`).
    pub a_n: Vec<Option<f64>>,
    pub tail_min: Option<f64>,
    pub classification: SingularityType,
    pub threshold: f64,
    pub tail_len: usize,
}

pub const DEFAULT_SINGULARITY_THRESHOLD: f64 = 10.0;
pub const TAIL_LEN: usize = 3;

fn probe_nodes<T: Real>(grid: &Grid<T>, probe: &Domain<T>) -> Vec<usize> {
    (0..grid.len()).filter(|&k| grid.inside_mask()[k] && probe.contains(grid.point(k))).collect()
}

/// `aₙ` over the probe region for one member.
pub fn singularity_statistic<T: Real>(u: &ScalarField<T>, psi: &SpinorField<T>, probe: &Domain<T>) -> Result<Option<f64>> {
    check_same(u.grid(), psi.grid())?;
    let nodes = probe_nodes(u.grid(), probe);
    if nodes.is_empty() {
        return Err(Error::Domain("probe region contains no grid nodes".into()));
    }
    if u.is_vanished() {
        return Ok(None);
    }
    let umax = nodes.iter().map(|&k| u.values()[k].as_f64()).fold(f64::NEG_INFINITY, f64::max);
    let pmax = nodes.iter().map(|&k| psi.value(k).norm().as_f64()).fold(0.0, f64::max);
    Ok(Some(umax - 2.0 * pmax.ln_1p()))
}

/// First type iff the minimum of `aₙ` over the last three members is `≥ −threshold`.
pub fn classify_singularity<T: Real>(family: &Family<T>, probe: &Domain<T>, threshold: f64) -> Result<SingularityReport> {
    if family.is_empty() {
        return Err(Error::Argument("empty family".into()));
    }
    if family.len() < TAIL_LEN {
        return Err(Error::Argument(format!("need at least {TAIL_LEN} family members, got {}", family.len())));
    }
    let a_n = crate::parallel::par_map(family, |(u, psi)| singularity_statistic(u, psi, probe)).into_iter().collect::<Result<Vec<_>>>()?;
    let tail = &a_n[a_n.len() - TAIL_LEN..];
    let tail_min = tail.iter().try_fold(f64::INFINITY, |m, a| a.map(|v| m.min(v)));
    let classification = match tail_min {
        Some(m) if m >= -threshold => SingularityType::First,
        _ => SingularityType::Second,
    };
    Ok(SingularityReport { a_n, tail_min, classification, threshold, tail_len: TAIL_LEN })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeckAnnulus {
    pub t: f64,
    pub e2u: f64,
    pub psi4: f64,
    pub energy: f64,
    /// `max_{∂B_t}(u + ln|x − center|)`; `None` for vanished `u`.
    pub fast_decay: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeckScan {
    pub annuli: Vec<NeckAnnulus>,
    pub sup: f64,
}

/// Energies on the dyadic annuli `B_{2t}∖B_t` between `r_min` and `r_max`.
pub fn neck_scan<T: Real>(u: &ScalarField<T>, psi: &SpinorField<T>, center: Point<T>, r_min: T, r_max: T) -> Result<NeckScan> {
    check_same(u.grid(), psi.grid())?;
    let grid = u.grid();
    let mut annuli = Vec::new();
    for a in dyadic_annuli(center, r_min, r_max)? {
        let parts = energy_parts(u, psi, &a.domain())?;
        let fast_decay = if u.is_vanished() {
            None
        } else {
            let mut best = f64::NEG_INFINITY;
            for (p, _, _) in grid.circle_samples(center, a.inner) {
                let v = grid.interpolate(u.values(), p, grid.inside_mask())?;
                best = best.max((v + a.inner.ln()).as_f64());
            }
            Some(best)
        };
        annuli.push(NeckAnnulus {
            t: a.inner.as_f64(),
            e2u: parts.e2u.as_f64(),
            psi4: parts.psi4.as_f64(),
            energy: parts.total().as_f64(),
            fast_decay,
        });
    }
    let sup = annuli.iter().map(|a| a.energy).fold(0.0, f64::max);
    Ok(NeckScan { annuli, sup })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BMCase {
    /// Locally bounded, no concentration.
    A,
    /// Uniform divergence to `−∞`, no concentration.
    B,
    /// Concentration on a finite set.
    C,
    /// No concentration yet unbounded above: outside the hypotheses.
    Undetermined,
}

impl BMCase {
    pub fn label(self) -> &'static str {
        match self {
            BMCase::A => "a",
            BMCase::B => "b",
            BMCase::C => "c",
            BMCase::Undetermined => "undetermined",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Bounded,
    Divergent,
    Growing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaPoint {
    pub x: f64,
    pub y: f64,
    /// Energy of the last member on each tested ball radius.
    pub energies: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BMClassification {
    pub case: BMCase,
    pub sigma: Vec<SigmaPoint>,
    pub radii: Vec<f64>,
    pub epsilon1: f64,
    /// `max uₙ` over nodes away from Σ (`None` = `−∞`).
    pub off_sigma_max: Vec<Option<f64>>,
    /// `max |ψₙ|` over nodes away from Σ.
    pub off_sigma_psi_max: Vec<f64>,
    pub off_sigma_trend: Trend,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BMOptions {
    pub epsilon1: f64,
    /// Level below which a strictly decreasing tail counts as divergence to `−∞`.
    pub divergence_level: f64,
}

impl Default for BMOptions {
    fn default() -> Self {
        Self { epsilon1: 0.1, divergence_level: -20.0 }
    }
}

/// Node offsets `(di, dj)` within `radius` of a node.
fn disk_offsets<T: Real>(grid: &Grid<T>, radius: T) -> Vec<(i64, i64)> {
    let m = (radius / grid.h()).floor().to_i64().unwrap_or(0);
    let r2 = (radius / grid.h()).as_f64().powi(2) * (1.0 + 1e-12);
    let mut out = Vec::new();
    for dj in -m..=m {
        for di in -m..=m {
            if ((di * di + dj * dj) as f64) <= r2 {
                out.push((di, dj));
            }
        }
    }
    out
}

fn ball_sum<T: Real>(grid: &Grid<T>, mass: &[f64], k: usize, offsets: &[(i64, i64)]) -> f64 {
    let (i, j) = grid.ij(k);
    let (nx, ny) = (grid.nx() as i64, grid.ny() as i64);
    let mut acc = 0.0;
    for &(di, dj) in offsets {
        let (a, b) = (i as i64 + di, j as i64 + dj);
        if a >= 0 && b >= 0 && a < nx && b < ny {
            acc += mass[(b * nx + a) as usize];
        }
    }
    acc
}

fn node_masses<T: Real>(u: &ScalarField<T>, psi: &SpinorField<T>) -> Vec<f64> {
    let w = u.grid().weights();
    (0..w.len())
        .map(|k| {
            if w[k] == T::zero() {
                return 0.0;
            }
            let e = u.exp_u(k).as_f64();
            let n2 = psi.norm_sqr_at(k).as_f64();
            w[k].as_f64() * (e * e + n2 * n2)
        })
        .collect()
}

fn tail_trend(values: &[f64], level: f64) -> bool {
    let tail = &values[values.len() - TAIL_LEN..];
    tail.windows(2).all(|w| w[1] < w[0]) && tail[TAIL_LEN - 1] < level
}

/// Brezis–Merle trichotomy over a family on a common grid.
pub fn brezis_merle_classify<T: Real>(family: &Family<T>, options: &BMOptions) -> Result<BMClassification> {
    if family.len() < TAIL_LEN {
        return Err(Error::Argument(format!("need at least {TAIL_LEN} family members, got {}", family.len())));
    }
    let grid: Arc<Grid<T>> = family[0].0.grid().clone();
    for (u, psi) in family {
        check_same(&grid, u.grid())?;
        check_same(&grid, psi.grid())?;
    }
    let h = grid.h();
    let r0 = h * T::lit(4.0);
    let mut radii = vec![r0];
    let r_top = grid.domain().min_dimension() / T::lit(8.0);
    while radii[radii.len() - 1] * T::lit(2.0) <= r_top {
        let next = radii[radii.len() - 1] * T::lit(2.0);
        radii.push(next);
    }
    let offsets: Vec<Vec<(i64, i64)>> = radii.iter().map(|&r| disk_offsets(&grid, r)).collect();
    let tail = &family[family.len() - TAIL_LEN..];
    let masses: Vec<Vec<f64>> = crate::parallel::par_map(tail, |(u, psi)| node_masses(u, psi));

    // infimum over the tail and over radii; balls grow with r so the
    // smallest radius decides
    let inside = grid.inside_mask();
    let mut in_sigma = vec![false; grid.len()];
    for k in 0..grid.len() {
        if !inside[k] {
            continue;
        }
        let inf = masses.iter().map(|m| ball_sum(&grid, m, k, &offsets[0])).fold(f64::INFINITY, f64::min);
        in_sigma[k] = inf >= options.epsilon1;
    }

    let link = disk_offsets(&grid, r0 * T::lit(2.0));
    let last = &masses[TAIL_LEN - 1];
    let mut seen = vec![false; grid.len()];
    let mut sigma = Vec::new();
    let mut sigma_nodes = Vec::new();
    for start in 0..grid.len() {
        if !in_sigma[start] || seen[start] {
            continue;
        }
        // mass-weighted centroid of the cluster, snapped to the grid
        let (mut wsum, mut cx, mut cy) = (0.0, 0.0, 0.0);
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(k) = queue.pop_front() {
            let p = grid.point(k);
            wsum += last[k];
            cx += last[k] * p.x.as_f64();
            cy += last[k] * p.y.as_f64();
            let (i, j) = grid.ij(k);
            for &(di, dj) in &link {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                if a < 0 || b < 0 || a >= grid.nx() as i64 || b >= grid.ny() as i64 {
                    continue;
                }
                let n = grid.index(a as usize, b as usize);
                if in_sigma[n] && !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
        let rep = if wsum > 0.0 { grid.nearest_node(Point::new(T::lit(cx / wsum), T::lit(cy / wsum))) } else { start };
        let p = grid.point(rep);
        sigma_nodes.push(rep);
        sigma.push(SigmaPoint {
            x: p.x.as_f64(),
            y: p.y.as_f64(),
            energies: offsets.iter().map(|o| ball_sum(&grid, last, rep, o)).collect(),
        });
    }

    let exclusion = radii[radii.len() - 1];
    let off: Vec<usize> = (0..grid.len())
        .filter(|&k| inside[k] && sigma_nodes.iter().all(|&s| (grid.point(k) - grid.point(s)).norm() > exclusion))
        .collect();
    let stats: Vec<(Option<f64>, f64)> = crate::parallel::par_map(family, |(u, psi)| {
        let umax = if u.is_vanished() {
            None
        } else {
            Some(off.iter().map(|&k| u.values()[k].as_f64()).fold(f64::NEG_INFINITY, f64::max))
        };
        let pmax = off.iter().map(|&k| psi.value(k).norm().as_f64()).fold(0.0, f64::max);
        (umax, pmax)
    });
    let off_sigma_max: Vec<Option<f64>> = stats.iter().map(|s| s.0).collect();
    let off_sigma_psi_max: Vec<f64> = stats.iter().map(|s| s.1).collect();
    let as_num: Vec<f64> = off_sigma_max.iter().map(|v| v.unwrap_or(f64::NEG_INFINITY)).collect();
    let tail_vals = &as_num[as_num.len() - TAIL_LEN..];
    let off_sigma_trend = if tail_vals.iter().all(|v| *v == f64::NEG_INFINITY) || tail_trend(&as_num, options.divergence_level) {
        Trend::Divergent
    } else if tail_trend(&as_num.iter().map(|v| -v).collect::<Vec<_>>(), options.divergence_level) {
        Trend::Growing
    } else {
        Trend::Bounded
    };
    let case = if !sigma.is_empty() {
        BMCase::C
    } else {
        match off_sigma_trend {
            Trend::Bounded => BMCase::A,
            Trend::Divergent => BMCase::B,
            Trend::Growing => BMCase::Undetermined,
        }
    };
    Ok(BMClassification {
        case,
        sigma,
        radii: radii.iter().map(|r| r.as_f64()).collect(),
        epsilon1: options.epsilon1,
        off_sigma_max,
        off_sigma_psi_max,
        off_sigma_trend,
    })
}

/// One row of a family diagnostics table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub index: i64,
    pub mass: f64,
    pub pohozaev: f64,
    pub neck_sup: f64,
    /// `None` stands for `−∞`.
    pub a_n: Option<f64>,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub rows: Vec<DiagnosticsRow>,
    pub singularity: SingularityReport,
    pub brezis_merle: BMClassification,
}

/// Parameters of [`family_report`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReportProbe<T> {
    pub center: Point<T>,
    /// Radius for local masses and Pohozaev constants.
    pub delta: T,
    pub neck_r_min: T,
    pub neck_r_max: T,
    pub threshold: f64,
    pub bm: BMOptions,
}

/// Per-index masses, Pohozaev constants, neck sups and `aₙ`, plus the
/// family-level singularity and Brezis–Merle labels.
pub fn family_report<T: Real>(
    family: &Family<T>,
    indices: &[i64],
    coupling: &CouplingField<T>,
    probe: &ReportProbe<T>,
) -> Result<DiagnosticsReport> {
    if family.len() != indices.len() {
        return Err(Error::Argument("family and index list differ in length".into()));
    }
    let disk = Domain::disk(probe.center, probe.delta);
    let singularity = classify_singularity(family, &disk, probe.threshold)?;
    let brezis_merle = brezis_merle_classify(family, &probe.bm)?;
    let per = crate::parallel::par_map(family, |(u, psi)| -> Result<(f64, f64, f64)> {
        let m = local_mass(u, psi, probe.center, probe.delta)?.as_f64();
        let c = pohozaev_constant(u, psi, coupling, probe.center, probe.delta)?.as_f64();
        let n = neck_scan(u, psi, probe.center, probe.neck_r_min, probe.neck_r_max)?.sup;
        Ok((m, c, n))
    });
    let mut rows = Vec::new();
    for (i, r) in per.into_iter().enumerate() {
        let (mass, pohozaev, neck_sup) = r?;
        rows.push(DiagnosticsRow {
            index: indices[i],
            mass,
            pohozaev,
            neck_sup,
            a_n: singularity.a_n[i],
            label: format!(
                "{}/{}",
                match singularity.classification {
                    SingularityType::First => "first",
                    SingularityType::Second => "second",
                },
                brezis_merle.case.label()
            ),
        });
    }
    Ok(DiagnosticsReport { rows, singularity, brezis_merle })
}
