use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use clap::Args;
use serde_json::json;
use superl_core::blowup_lab::{energy_identity_audit, generate_family_on, quantization_audit, FamilySpec};
use superl_core::diagnostics::{
    brezis_merle_classify, classify_singularity, family_report, local_mass, neck_scan, pohozaev_constant, BMOptions,
    ReportProbe, DEFAULT_SINGULARITY_THRESHOLD,
};
use superl_core::exact::{
    bubble_energy, conical_bubble, liouville_bubble, liouville_u, yamabe_bubble, BubbleParams, EnergyRegion,
};
use superl_core::fields::{energy_parts, residuals, CouplingField, ScalarField, SpinorField};
use superl_core::grid::{make_grid, Domain, Grid, Point};
use superl_core::solver::{newton_solve, SolverConfig};
use superl_core::spin2d::SpinorValue;

use crate::output::Output;
use crate::plot::{line_chart, Series};
use crate::settings::Settings;
use crate::{CliError, Common};

type Run = Result<u8, CliError>;

macro_rules! choice {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq)]
        pub enum $name { $($variant),+ }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok(Self::$variant),)+
                    _ => Err(format!("expected one of: {}", [$($text),+].join(", "))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $text),+ })
            }
        }
    };
}

choice!(Case { Liouville => "liouville", Conical => "conical", Yamabe => "yamabe" });
choice!(SolveCase { Liouville => "liouville", Constant => "constant" });
choice!(Canned { A => "a", B => "b", C => "c" });

fn usage(m: impl Into<String>) -> CliError {
    CliError::Usage(m.into())
}

fn grid(domain: Domain<f64>, h: f64) -> Result<Arc<Grid<f64>>, CliError> {
    Ok(Arc::new(make_grid(domain, h)?))
}

fn unit_phi() -> SpinorValue<f64> {
    SpinorValue::from_reals([1.0, 0.0, 0.0, 0.0])
}

fn print_json(v: &serde_json::Value) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| CliError::Compute(e.to_string()))
}

/// Values along the positive x-axis through `center`.
fn radial_profile(grid: &Grid<f64>, values: impl Fn(usize) -> f64, center: Point<f64>) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = (0..grid.len())
        .filter(|&k| grid.inside_mask()[k])
        .filter_map(|k| {
            let p = grid.point(k);
            let d = p - center;
            (d.y.abs() < 0.5 * grid.h() && d.x >= 0.0).then(|| (d.x, values(k)))
        })
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts
}

fn load_family(s: &mut Settings, flag: Option<PathBuf>) -> Result<FamilySpec, CliError> {
    let path = s.get_opt("family", flag.map(|p| p.display().to_string()))?.ok_or_else(|| usage("--family is required"))?;
    let text = std::fs::read_to_string(&path).map_err(|e| usage(format!("cannot read family {path}: {e}")))?;
    Ok(FamilySpec::from_json(&text)?)
}

fn index_range(s: &mut Settings, spec: &mut FamilySpec, n_min: Option<i64>, n_max: Option<i64>) -> Result<(), CliError> {
    let lo = s.get("n-min", n_min, spec.n_range[0])?;
    let hi = s.get("n-max", n_max, spec.n_range[1])?;
    if lo > hi {
        return Err(usage(format!("empty index range {lo}..={hi}")));
    }
    spec.n_range = [lo, hi];
    Ok(())
}

#[derive(Args)]
pub struct VerifyExact {
    #[command(flatten)]
    common: Common,
    /// liouville, conical or yamabe
    #[arg(long)]
    case: Option<Case>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Cone order (conical case)
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Yamabe coupling F = mu
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    /// Disk radius
    #[arg(long)]
    radius: Option<f64>,
    /// Inner radius of the annulus used for conical bubbles
    #[arg(long)]
    inner: Option<f64>,
}

pub fn verify_exact(a: VerifyExact) -> Run {
    let mut s = Settings::load(a.common.config.as_deref())?;
    let case = s.get("case", a.case, Case::Liouville)?;
    let lambda = s.get("lambda", a.lambda, 1.0)?;
    let h = s.get("h", a.h, 1.0 / 128.0)?;
    let radius = s.get("radius", a.radius, 1.0)?;
    let (beta, mu, inner) = match case {
        Case::Conical => (s.get("beta", a.beta, 0.5)?, 0.0, s.get("inner", a.inner, 0.1)?),
        Case::Yamabe => (0.0, s.get("mu", a.mu, -0.5)?, 0.0),
        Case::Liouville => (0.0, 0.0, 0.0),
    };
    s.finish()?;
    let mut out = Output::new(a.common.out, a.common.plot)?;
    let c = Point::origin();
    let domain = match case {
        Case::Conical => Domain::annulus(c, inner, radius),
        _ => Domain::disk(c, radius),
    };
    let g = grid(domain, h)?;
    let (u, psi, params) = match case {
        Case::Liouville => {
            let (u, psi) = liouville_bubble(lambda, c, g.clone())?;
            (u, psi, BubbleParams::liouville(lambda, c))
        }
        Case::Conical => {
            let u = conical_bubble(beta, lambda, c, g.clone())?;
            (u, SpinorField::zeros(g.clone()), BubbleParams::conical(beta, lambda))
        }
        Case::Yamabe => {
            let (u, psi) = yamabe_bubble(lambda, mu, unit_phi(), None, c, g.clone())?;
            (u, psi, BubbleParams::yamabe(lambda, mu, c))
        }
    };
    let coupling = CouplingField::constant(mu);
    let r = residuals(&u, &psi, &coupling)?;
    let parts = energy_parts(&u, &psi, &domain)?;
    let exact = bubble_energy(&params, &EnergyRegion::Area(domain))?;
    let in_b1 = case != Case::Conical && radius >= 1.0;
    let mass_b1 = if in_b1 { Some(local_mass(&u, &psi, c, 1.0)?) } else { None };
    let exact_b1 = if in_b1 { Some(bubble_energy(&params, &EnergyRegion::Area(Domain::disk(c, 1.0)))?.mass) } else { None };
    let residual_inf = r.sup_u().unwrap_or(0.0).max(r.sup_psi());
    let value = json!({
        "case": case.to_string(),
        "lambda": lambda,
        "h": h,
        "nodes": g.inside_count(),
        "residual_inf": residual_inf,
        "residual_u_inf": r.sup_u(),
        "residual_psi_inf": r.sup_psi(),
        "mass_B1": mass_b1,
        "exact_mass_B1": exact_b1,
        "e2u": parts.e2u,
        "exact_e2u": exact.e2u_energy,
        "psi4": parts.psi4,
        "exact_psi4": exact.psi4_energy,
    });
    let text = print_json(&value)?;
    print!("{text}");
    out.text("verify.json", &text)?;
    out.plot("profile.svg", || {
        let (label, pts) = if u.is_vanished() {
            ("|psi|", radial_profile(&g, |k| psi.value(k).norm(), c))
        } else {
            ("u", radial_profile(&g, |k| u.values()[k], c))
        };
        line_chart(&format!("{case} bubble, lambda = {lambda}"), "r", label, &[Series { name: label, points: pts }], false)
    })?;
    out.manifest("verify-exact", s.resolved(), Some(&g.descriptor()))?;
    Ok(0)
}

#[derive(Args)]
pub struct Solve {
    #[command(flatten)]
    common: Common,
    /// liouville (boundary data and start from the exact bubble) or constant (u = bc on the boundary)
    #[arg(long)]
    case: Option<SolveCase>,
    /// Start from a stored state; its boundary values become the boundary data
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Coupling F = mu
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    /// Relative size of the initial perturbation (liouville case)
    #[arg(long)]
    perturb: Option<f64>,
    /// Boundary value of u (constant case)
    #[arg(long, allow_hyphen_values = true)]
    bc: Option<f64>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
}

pub fn solve(a: Solve) -> Run {
    let mut s = Settings::load(a.common.config.as_deref())?;
    let input = s.get_opt("input", a.input.map(|p| p.display().to_string()))?;
    let mu = s.get("mu", a.mu, 0.0)?;
    let defaults = SolverConfig::default();
    let config = SolverConfig {
        tolerance: s.get("tolerance", a.tolerance, defaults.tolerance)?,
        max_iterations: s.get("max-iterations", a.max_iterations, defaults.max_iterations)?,
        ..defaults
    };
    let coupling = CouplingField::constant(mu);
    let c = Point::origin();
    let mut exact: Option<ScalarField<f64>> = None;
    let (u0, psi0, bc_u, bc_psi) = if let Some(path) = &input {
        s.finish()?;
        let (u, psi) = superl_core::io::load_state(std::path::Path::new(path))?;
        (u.clone(), psi.clone(), u, psi)
    } else {
        let case = s.get("case", a.case, SolveCase::Liouville)?;
        let h = s.get("h", a.h, 1.0 / 64.0)?;
        let radius = s.get("radius", a.radius, 1.0)?;
        let g = grid(Domain::disk(c, radius), h)?;
        match case {
            SolveCase::Liouville => {
                let lambda = s.get("lambda", a.lambda, 0.5)?;
                let perturb = s.get("perturb", a.perturb, 0.01)?;
                s.finish()?;
                let (ue, zero) = liouville_bubble(lambda, c, g.clone())?;
                let scale = ue.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let r2 = (0.8 * radius).powi(2);
                let bump = move |p: Point<f64>| if p.norm_sqr() < r2 { (1.0 - p.norm_sqr() / r2).powi(3) } else { 0.0 };
                let u0 = ScalarField::from_fn(g.clone(), |p| liouville_u(lambda, c, p) + perturb * scale * bump(p));
                let psi0 = SpinorField::from_fn(g.clone(), |p| SpinorValue::from_reals([perturb * bump(p), 0.0, 0.0, -perturb * bump(p)]));
                exact = Some(ue.clone());
                (u0, psi0, ue, zero)
            }
            SolveCase::Constant => {
                let bc = s.get("bc", a.bc, -5.0)?;
                s.finish()?;
                let u = ScalarField::constant(g.clone(), bc);
                let z = SpinorField::zeros(g.clone());
                (u.clone(), z.clone(), u, z)
            }
        }
    };
    let mut out = Output::new(a.common.out, a.common.plot)?;
    let (u, psi, report) = newton_solve(&u0, &psi0, &coupling, &bc_u, &bc_psi, &config)?;
    let g = u.grid().clone();
    let sup_error = exact.as_ref().map(|e| {
        (0..g.len())
            .filter(|&k| g.inside_mask()[k])
            .map(|k| (u.values()[k] - e.values()[k]).abs().max(psi.value(k).norm()))
            .fold(0.0, f64::max)
    });
    let u_max = (0..g.len()).filter(|&k| g.inside_mask()[k]).map(|k| u.values()[k]).fold(f64::NEG_INFINITY, f64::max);
    let value = json!({
        "converged": report.converged,
        "termination": report.termination,
        "iterations": report.iterations,
        "residual_history": report.residual_history,
        "step_history": report.step_history,
        "linear_residuals": report.linear_residuals,
        "final_residual_u": report.final_residual_u,
        "final_residual_psi": report.final_residual_psi,
        "sup_error": sup_error,
        "u_max": u_max,
    });
    let text = print_json(&value)?;
    print!("{text}");
    out.text("solve.json", &text)?;
    out.state("solution", &u, &psi)?;
    out.plot("residuals.svg", || {
        let pts = report.residual_history.iter().enumerate().map(|(i, r)| (i as f64, r.log10())).collect();
        line_chart("Newton residual", "iteration", "log10 sup residual", &[Series { name: "residual", points: pts }], false)
    })?;
    out.manifest("solve", s.resolved(), Some(&g.descriptor()))?;
    Ok(if report.converged { 0 } else { 1 })
}

#[derive(Args)]
pub struct Pohozaev {
    #[command(flatten)]
    common: Common,
    /// liouville, conical or yamabe (ignored with --input)
    #[arg(long)]
    case: Option<Case>,
    /// Stored state to evaluate instead of a closed form
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    /// Comma-separated radii
    #[arg(long)]
    radii: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    center_x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    center_y: Option<f64>,
}

pub fn pohozaev(a: Pohozaev) -> Run {
    let mut s = Settings::load(a.common.config.as_deref())?;
    let radii = s.get_list("radii", a.radii, &[0.25, 0.5, 0.75])?;
    let center = Point::new(s.get("center-x", a.center_x, 0.0)?, s.get("center-y", a.center_y, 0.0)?);
    let input = s.get_opt("input", a.input.map(|p| p.display().to_string()))?;
    let (u, psi, mu) = if let Some(path) = input {
        let mu = s.get("mu", a.mu, 0.0)?;
        s.finish()?;
        let (u, psi) = superl_core::io::load_state(std::path::Path::new(&path))?;
        (u, psi, mu)
    } else {
        let case = s.get("case", a.case, Case::Conical)?;
        let lambda = s.get("lambda", a.lambda, 1.0)?;
        let h = s.get("h", a.h, 1.0 / 256.0)?;
        let radius = s.get("radius", a.radius, 1.0)?;
        let g = grid(Domain::disk(Point::origin(), radius), h)?;
        match case {
            Case::Liouville => {
                s.finish()?;
                let (u, psi) = liouville_bubble(lambda, center, g)?;
                (u, psi, 0.0)
            }
            Case::Conical => {
                let beta = s.get("beta", a.beta, 0.5)?;
                s.finish()?;
                (conical_bubble(beta, lambda, center, g.clone())?, SpinorField::zeros(g), 0.0)
            }
            Case::Yamabe => {
                let mu = s.get("mu", a.mu, -0.5)?;
                s.finish()?;
                let (u, psi) = yamabe_bubble(lambda, mu, unit_phi(), None, center, g)?;
                (u, psi, mu)
            }
        }
    };
    let mut out = Output::new(a.common.out, a.common.plot)?;
    let coupling = CouplingField::constant(mu);
    let mut csv = String::from("radius,C\n");
    let mut pts = Vec::new();
    for &r in &radii {
        let value = pohozaev_constant(&u, &psi, &coupling, center, r)?;
        csv.push_str(&format!("{r},{value:.12e}\n"));
        pts.push((r, value));
    }
    print!("{csv}");
    out.text("pohozaev.csv", &csv)?;
    out.plot("pohozaev.svg", || line_chart("Pohozaev constant", "R", "C", &[Series { name: "C(R)", points: pts }], false))?;
    out.manifest("pohozaev", s.resolved(), Some(&u.grid().descriptor()))?;
    Ok(0)
}

#[derive(Args)]
pub struct Blowup {
    #[command(flatten)]
    common: Common,
    /// Family specification (JSON)
    #[arg(long, value_name = "FILE")]
    family: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    n_min: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    n_max: Option<i64>,
    /// Decreasing comma-separated radii for the blow-up value audit
    #[arg(long)]
    deltas: Option<String>,
}

pub fn blowup(a: Blowup) -> Run {
    let mut s = Settings::load(a.common.config.as_deref())?;
    let mut spec = load_family(&mut s, a.family)?;
    index_range(&mut s, &mut spec, a.n_min, a.n_max)?;
    let deltas = s.get_opt("deltas", a.deltas)?;
    s.finish()?;
    let deltas: Option<Vec<f64>> = deltas
        .map(|d| d.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| usage(format!("deltas: {e}")))).collect())
        .transpose()?;
    let mut out = Output::new(a.common.out, a.common.plot)?;
    let report = energy_identity_audit(&spec, None)?;
    let csv = report.to_csv();
    print!("{csv}");
    out.text("audit.csv", &csv)?;
    out.json("audit.json", &report)?;
    if let Some(d) = deltas {
        let q = quantization_audit(&spec, spec.blowup_point(), &d)?;
        out.json("quantization.json", &q)?;
    }
    out.plot("mass.svg", || {
        let pts = report.rows.iter().map(|r| (r.n as f64, r.mass)).collect();
        let four_pi = report.rows.iter().map(|r| (r.n as f64, 4.0 * PI)).collect();
        line_chart("Mass versus index", "n", "mass", &[Series { name: "mass", points: pts }, Series { name: "4 pi", points: four_pi }], false)
    })?;
    out.plot("defects.svg", || {
        let e = report.rows.iter().map(|r| (r.n as f64, r.defect_e2u.abs().log10())).collect();
        let p = report.rows.iter().map(|r| (r.n as f64, r.defect_psi4.abs().log10())).collect();
        line_chart("Energy defects", "n", "log10 |defect|", &[Series { name: "e2u", points: e }, Series { name: "psi4", points: p }], false)
    })?;
    out.manifest("blowup", s.resolved(), Some(&spec.grid()?.descriptor()))?;
    Ok(0)
}

type Members = (Vec<(ScalarField<f64>, SpinorField<f64>)>, Vec<i64>, Arc<Grid<f64>>, Point<f64>);

fn canned(which: Canned, h: Option<f64>) -> Result<Members, CliError> {
    let c = Point::origin();
    let g = grid(Domain::disk(c, 1.0), h.unwrap_or(if which == Canned::C { 1.0 / 128.0 } else { 1.0 / 64.0 }))?;
    let z = SpinorField::zeros(g.clone());
    let indices: Vec<i64> = match which {
        Canned::A => (1..=6).collect(),
        Canned::B => (1..=25).collect(),
        Canned::C => (30..=38).collect(),
    };
    let fam = indices
        .iter()
        .map(|&n| {
            let u = match which {
                Canned::A => ScalarField::from_fn(g.clone(), |p| 0.01 * (n as f64 * p.x).sin()),
                Canned::B => ScalarField::constant(g.clone(), -(n as f64)),
                Canned::C => {
                    let lambda = 2f64.powi(n as i32);
                    ScalarField::from_fn(g.clone(), |p| liouville_u(lambda, c, p))
                }
            };
            (u, z.clone())
        })
        .collect();
    Ok((fam, indices, g, c))
}

fn family_members(spec: &FamilySpec) -> Result<Members, CliError> {
    let g = spec.grid()?;
    let indices = spec.indices();
    let mut fam = Vec::with_capacity(indices.len());
    for &n in &indices {
        let m = generate_family_on(spec, &g, n)?;
        fam.push((m.u, m.psi));
    }
    Ok((fam, indices, g, spec.blowup_point()))
}

#[derive(Args)]
pub struct Classify {
    #[command(flatten)]
    common: Common,
    /// Family specification (JSON)
    #[arg(long, value_name = "FILE")]
    family: Option<PathBuf>,
    /// Built-in family: a (bounded), b (u_n = -n), c (concentrating Liouville bubbles)
    #[arg(long)]
    canned: Option<Canned>,
    /// Grid spacing of a canned family
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    epsilon1: Option<f64>,
    /// Threshold on the tail minimum of a_n
    #[arg(long)]
    threshold: Option<f64>,
    /// Radius of the probe disk around the blow-up point
    #[arg(long)]
    probe_radius: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    n_min: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    n_max: Option<i64>,
}

pub fn classify(a: Classify) -> Run {
    let mut s = Settings::load(a.common.config.as_deref())?;
    let which = s.get_opt("canned", a.canned)?;
    let (fam, indices, g, center) = match which {
        Some(w) => {
            let h = s.get_opt("h", a.h)?;
            canned(w, h)?
        }
        None => {
            let mut spec = load_family(&mut s, a.family)?;
            index_range(&mut s, &mut spec, a.n_min, a.n_max)?;
            family_members(&spec)?
        }
    };
    let defaults = BMOptions::default();
    let options = BMOptions { epsilon1: s.get("epsilon1", a.epsilon1, defaults.epsilon1)?, ..defaults };
    let threshold = s.get("threshold", a.threshold, DEFAULT_SINGULARITY_THRESHOLD)?;
    let probe_radius = s.get("probe-radius", a.probe_radius, 0.25)?;
    s.finish()?;
    let mut out = Output::new(a.common.out, a.common.plot)?;
    let bm = brezis_merle_classify(&fam, &options)?;
    let sing = classify_singularity(&fam, &Domain::disk(center, probe_radius), threshold)?;
    let value = json!({
        "indices": indices,
        "brezis_merle": bm,
        "singularity": sing,
    });
    let text = print_json(&value)?;
    print!("{text}");
    out.text("classify.json", &text)?;
    out.plot("off_sigma.svg", || {
        let pts = indices.iter().zip(&bm.off_sigma_max).filter_map(|(&n, v)| v.map(|v| (n as f64, v))).collect();
        line_chart("Maximum of u away from the blow-up set", "n", "max u", &[Series { name: "max u", points: pts }], false)
    })?;
    out.manifest("classify", s.resolved(), Some(&g.descriptor()))?;
    Ok(0)
}

#[derive(Args)]
pub struct Report {
    #[command(flatten)]
    common: Common,
    /// Family specification (JSON)
    #[arg(long, value_name = "FILE")]
    family: Option<PathBuf>,
    /// Radius for local masses and Pohozaev constants
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    neck_r_min: Option<f64>,
    #[arg(long)]
    neck_r_max: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    epsilon1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    n_min: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    n_max: Option<i64>,
}

pub fn report(a: Report) -> Run {
    let mut s = Settings::load(a.common.config.as_deref())?;
    let mut spec = load_family(&mut s, a.family)?;
    index_range(&mut s, &mut spec, a.n_min, a.n_max)?;
    let delta = s.get("delta", a.delta, 0.25)?;
    let probe = ReportProbe {
        center: spec.blowup_point(),
        delta,
        neck_r_min: s.get("neck-r-min", a.neck_r_min, 4.0 * spec.h)?,
        neck_r_max: s.get("neck-r-max", a.neck_r_max, delta)?,
        threshold: s.get("threshold", a.threshold, DEFAULT_SINGULARITY_THRESHOLD)?,
        bm: BMOptions { epsilon1: s.get("epsilon1", a.epsilon1, BMOptions::default().epsilon1)?, ..BMOptions::default() },
    };
    s.finish()?;
    let mut out = Output::new(a.common.out, a.common.plot)?;
    let (fam, indices, g, _) = family_members(&spec)?;
    let rep = family_report(&fam, &indices, &spec.coupling(), &probe)?;
    let mut csv = String::from("index,mass,pohozaev,neck_sup,a_n,label\n");
    for r in &rep.rows {
        let a_n = r.a_n.map_or("-inf".to_string(), |v| format!("{v:.12e}"));
        csv.push_str(&format!("{},{:.12e},{:.12e},{:.12e},{a_n},{}\n", r.index, r.mass, r.pohozaev, r.neck_sup, r.label));
    }
    print!("{csv}");
    out.text("report.csv", &csv)?;
    out.json("report.json", &rep)?;
    if out.plots() {
        let (u, psi) = &fam[fam.len() - 1];
        let scan = neck_scan(u, psi, probe.center, probe.neck_r_min, probe.neck_r_max)?;
        out.plot("neck.svg", || {
            let pts = scan.annuli.iter().map(|a| (a.t, a.energy)).collect();
            line_chart("Neck energies of the last member", "t", "energy on B_2t minus B_t", &[Series { name: "energy", points: pts }], true)
        })?;
        out.plot("mass.svg", || {
            let pts = rep.rows.iter().map(|r| (r.index as f64, r.mass)).collect();
            line_chart("Local mass", "n", "mass", &[Series { name: "mass", points: pts }], false)
        })?;
    }
    out.manifest("report", s.resolved(), Some(&g.descriptor()))?;
    Ok(0)
}
