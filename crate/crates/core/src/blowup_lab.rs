//! Synthetic blow-up families assembled from catalog bubbles, and the
//! energy-identity, quantization and census audits run over them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{local_mass, neck_scan};
use crate::error::{Error, Result};
use crate::exact::{bubble_energy, conical_u, liouville_u, yamabe_value, BubbleKind, BubbleParams, EnergyRegion, YamabeSign};
use crate::fields::{energy_parts, CouplingField, ScalarField, SpinorField};
use crate::grid::{make_grid, Domain, Grid, Point};
use crate::scalar::pairwise_sum;
use crate::spin2d::{CliffordRep, SpinorValue};

/// One bubble of a family with the schedule `λₙ = λ₀·growthⁿ` and center
/// `cₙ = center·center_decayⁿ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BubbleTemplate {
    pub kind: BubbleKind,
    pub lambda0: f64,
    pub growth: f64,
    #[serde(default)]
    pub center: Point<f64>,
    #[serde(default = "one")]
    pub center_decay: f64,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub sign: Option<YamabeSign>,
    #[serde(default)]
    pub phi0: Option<SpinorValue<f64>>,
}

fn one() -> f64 {
    1.0
}

impl BubbleTemplate {
    pub fn params(&self, n: i64) -> BubbleParams<f64> {
        let mut p = BubbleParams::liouville(self.scale(n), self.center_at(n));
        p.kind = self.kind;
        p.beta = self.beta.unwrap_or(0.0);
        p.mu = self.mu.unwrap_or(0.0);
        if let Some(phi) = self.phi0 {
            p.phi0 = phi;
        }
        p.sign = self.sign;
        p
    }

    pub fn scale(&self, n: i64) -> f64 {
        self.lambda0 * self.growth.powi(n as i32)
    }

    pub fn center_at(&self, n: i64) -> Point<f64> {
        self.center.scale(self.center_decay.powi(n as i32))
    }

    fn is_function_kind(&self) -> bool {
        matches!(self.kind, BubbleKind::Liouville | BubbleKind::Conical)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub bubbles: Vec<BubbleTemplate>,
    pub domain: Domain<f64>,
    pub h: f64,
    /// Inclusive index range.
    pub n_range: [i64; 2],
    /// Constant level of `u` added (as `e^{u} += e^{background}`) when present.
    #[serde(default)]
    pub background: Option<f64>,
    /// Ceiling on the coupling residual `∫ e^u|ψ|²` above which an index is flagged.
    #[serde(default)]
    pub residual_ceiling: Option<f64>,
}

impl FamilySpec {
    pub fn from_json(s: &str) -> Result<Self> {
        let spec: FamilySpec = serde_json::from_str(s).map_err(|e| Error::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn indices(&self) -> Vec<i64> {
        (self.n_range[0]..=self.n_range[1]).collect()
    }

    pub fn grid(&self) -> Result<Arc<Grid<f64>>> {
        Ok(Arc::new(make_grid(self.domain, self.h)?))
    }

    /// Blow-up point: the limit of the first template's centers.
    pub fn blowup_point(&self) -> Point<f64> {
        let b = &self.bubbles[0];
        if b.center_decay < 1.0 {
            Point::origin()
        } else {
            b.center
        }
    }

    /// Coupling `F ≡ μ` of the first Yamabe bubble (zero without one).
    pub fn coupling(&self) -> CouplingField<f64> {
        let mu = self.bubbles.iter().find(|b| b.kind == BubbleKind::Yamabe).and_then(|b| b.mu).unwrap_or(0.0);
        CouplingField::constant(mu)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bubbles.is_empty() {
            return Err(Error::Spec("a family needs at least one bubble".into()));
        }
        self.domain.validate()?;
        if !(self.h > 0.0) {
            return Err(Error::Spec("grid spacing must be positive".into()));
        }
        if self.n_range[0] > self.n_range[1] {
            return Err(Error::Spec(format!("empty index range {:?}", self.n_range)));
        }
        for b in &self.bubbles {
            if !(b.growth > 0.0) || b.growth == 1.0 || !b.growth.is_finite() {
                return Err(Error::Spec(format!("scale schedule must be strictly monotone, growth {}", b.growth)));
            }
            if !(b.center_decay > 0.0 && b.center_decay <= 1.0) {
                return Err(Error::Spec(format!("center_decay must lie in (0, 1], got {}", b.center_decay)));
            }
            match b.kind {
                BubbleKind::Yamabe if b.mu.is_none() => return Err(Error::Spec("Yamabe bubbles need mu".into())),
                BubbleKind::Conical if b.beta.is_none() => return Err(Error::Spec("conical bubbles need beta".into())),
                _ => {}
            }
            for n in self.indices() {
                b.params(n).validate().map_err(|e| Error::Spec(e.to_string()))?;
            }
        }
        for (i, a) in self.bubbles.iter().enumerate() {
            for b in &self.bubbles[i + 1..] {
                let same_point = (a.center - b.center).norm() < 1e-12 && a.center_decay == b.center_decay;
                if same_point && a.is_function_kind() && b.is_function_kind() {
                    return Err(Error::Spec("two super-Liouville bubbles at one blow-up point".into()));
                }
                if same_point && a.kind == b.kind {
                    for n in self.indices() {
                        let r = a.scale(n) / b.scale(n);
                        if r < 16.0 && r > 1.0 / 16.0 {
                            return Err(Error::Spec(format!("overlapping {:?} bubbles at comparable scales (n = {n})", a.kind)));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// One assembled family member with its coupling diagnostics.
#[derive(Clone, Debug)]
pub struct Member {
    pub n: i64,
    pub u: ScalarField<f64>,
    pub psi: SpinorField<f64>,
    /// `∫_Ω e^u|ψ|²`: the term ignored when superposing exact pieces.
    pub cross_term: f64,
}

/// Assembles member `n` on `grid`: `e^u` is the sum of the `e^{u_i}` of the
/// function bubbles (plus background), `ψ` the sum of the Yamabe spinors.
pub fn generate_family_on(spec: &FamilySpec, grid: &Arc<Grid<f64>>, n: i64) -> Result<Member> {
    if n < spec.n_range[0] || n > spec.n_range[1] {
        return Err(Error::Argument(format!("index {n} outside {:?}", spec.n_range)));
    }
    let rep = CliffordRep::<f64>::standard();
    let mut logs: Vec<Box<dyn Fn(Point<f64>) -> f64>> = Vec::new();
    let mut spinors = Vec::new();
    for b in &spec.bubbles {
        let p = b.params(n);
        match b.kind {
            BubbleKind::Liouville => logs.push(Box::new(move |x| liouville_u(p.lambda, p.center, x))),
            BubbleKind::Conical => logs.push(Box::new(move |x| conical_u(p.beta, p.lambda, p.center, x))),
            BubbleKind::Yamabe => {
                let sign = match p.sign {
                    Some(s) => s,
                    None => crate::exact::probe_yamabe_sign(&rep, p.mu)?,
                };
                spinors.push((p, sign));
            }
        }
    }
    if let Some(bg) = spec.background {
        logs.push(Box::new(move |_| bg));
    }
    let u = if logs.is_empty() {
        ScalarField::vanished(grid.clone())
    } else {
        ScalarField::from_fn(grid.clone(), |x| {
            let vals: Vec<f64> = logs.iter().map(|f| f(x)).collect();
            let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if m == f64::NEG_INFINITY {
                m
            } else {
                m + vals.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
            }
        })
    };
    let psi = SpinorField::from_fn(grid.clone(), |x| {
        spinors.iter().fold(SpinorValue::zero(), |acc, (p, s)| acc + yamabe_value(&rep, p.lambda, p.mu, p.phi0, *s, p.center, x))
    });
    let cross_term = if u.is_vanished() {
        0.0
    } else {
        let w = grid.weights();
        let terms: Vec<f64> = (0..grid.len()).filter(|&k| w[k] > 0.0).map(|k| w[k] * u.exp_u(k) * psi.norm_sqr_at(k)).collect();
        pairwise_sum(&terms)
    };
    Ok(Member { n, u, psi, cross_term })
}

pub fn generate_family(spec: &FamilySpec, n: i64) -> Result<Member> {
    spec.validate()?;
    generate_family_on(spec, &spec.grid()?, n)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub super_liouville: usize,
    pub yamabe: usize,
}

impl Census {
    pub fn label(&self) -> String {
        format!("{}L+{}Y", self.super_liouville, self.yamabe)
    }
}

/// Radius, in units of the bubble scale, of the ball used to detect a bubble.
pub const CENSUS_K: f64 = 8.0;

/// Counts bubbles present in the sampled fields: a template counts when the
/// measured energy on `B_{K/λ}(c)` reaches half of its closed form there.
pub fn census(spec: &FamilySpec, member: &Member) -> Result<Census> {
    let grid = member.u.grid();
    let mut out = Census::default();
    for b in &spec.bubbles {
        let p = b.params(member.n);
        let r = (CENSUS_K / p.lambda).max(2.0 * grid.h()).min(reach_from(grid, p.center));
        if r <= 0.0 {
            continue;
        }
        let ball = Domain::disk(p.center, r);
        let measured = energy_parts(&member.u, &member.psi, &ball)?;
        let expected = bubble_energy(&p, &EnergyRegion::Area(ball))?;
        match b.kind {
            BubbleKind::Liouville | BubbleKind::Conical => {
                if measured.e2u >= 0.5 * expected.e2u_energy {
                    out.super_liouville += 1;
                }
            }
            BubbleKind::Yamabe => {
                if measured.psi4 >= 0.5 * expected.psi4_energy {
                    out.yamabe += 1;
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub n: i64,
    pub scales: Vec<f64>,
    pub total_e2u: f64,
    pub total_psi4: f64,
    /// Closed-form entire-plane accounts.
    pub account_e2u: f64,
    pub account_psi4: f64,
    /// Closed-form accounts truncated to the domain (entire-plane value when no closed form applies).
    pub truncated_e2u: f64,
    pub truncated_psi4: f64,
    /// `total − entire-plane account`.
    pub defect_e2u: f64,
    pub defect_psi4: f64,
    /// `total − truncated account`.
    pub neck_e2u: f64,
    pub neck_psi4: f64,
    /// `entire-plane account − truncated account`.
    pub tail_e2u: f64,
    pub tail_psi4: f64,
    /// `∫_Ω (2e^{2u} − e^u|ψ|²)`.
    pub mass: f64,
    pub neck_sup: f64,
    pub cross_term: f64,
    pub within_ceiling: bool,
    pub census: Census,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub rows: Vec<AuditRow>,
}

impl AuditReport {
    pub const CSV_HEADER: &'static str = "n,mass,neck_sup,defect_psi4,defect_e2u,label";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:.12e},{:.12e},{:.12e},{:.12e},{}\n",
                r.n,
                r.mass,
                r.neck_sup,
                r.defect_psi4,
                r.defect_e2u,
                r.census.label()
            ));
        }
        s
    }
}

/// Closed-form neck-scan radius factor: the scan starts at `NECK_K/λ_max`.
pub const NECK_K: f64 = 10.0;

fn audit_row(spec: &FamilySpec, grid: &Arc<Grid<f64>>, n: i64) -> Result<AuditRow> {
    let member = generate_family_on(spec, grid, n)?;
    let parts = energy_parts(&member.u, &member.psi, grid.domain())?;
    let (mut acc_e, mut acc_p, mut tr_e, mut tr_p) = (0.0, 0.0, 0.0, 0.0);
    for b in &spec.bubbles {
        let p = b.params(n);
        let full = bubble_energy(&p, &EnergyRegion::EntirePlane)?;
        let trunc = bubble_energy(&p, &EnergyRegion::Area(*grid.domain())).unwrap_or(full);
        acc_e += full.e2u_energy;
        acc_p += full.psi4_energy;
        tr_e += trunc.e2u_energy;
        tr_p += trunc.psi4_energy;
    }
    let bp = spec.blowup_point();
    let mass = local_mass_on_domain(&member)?;
    let lam_max = spec.bubbles.iter().map(|b| b.scale(n)).fold(0.0, f64::max);
    let reach = reach_from(grid, bp);
    let r_min = NECK_K / lam_max;
    let neck_sup = if reach > 0.0 && r_min * 2.0 <= reach {
        neck_scan(&member.u, &member.psi, bp, r_min, reach)?.sup
    } else {
        0.0
    };
    let census = census(spec, &member)?;
    Ok(AuditRow {
        n,
        scales: spec.bubbles.iter().map(|b| b.scale(n)).collect(),
        total_e2u: parts.e2u,
        total_psi4: parts.psi4,
        account_e2u: acc_e,
        account_psi4: acc_p,
        truncated_e2u: tr_e,
        truncated_psi4: tr_p,
        defect_e2u: parts.e2u - acc_e,
        defect_psi4: parts.psi4 - acc_p,
        neck_e2u: parts.e2u - tr_e,
        neck_psi4: parts.psi4 - tr_p,
        tail_e2u: acc_e - tr_e,
        tail_psi4: acc_p - tr_p,
        mass,
        neck_sup,
        cross_term: member.cross_term,
        within_ceiling: spec.residual_ceiling.is_none_or(|c| member.cross_term <= c),
        census,
    })
}

fn local_mass_on_domain(member: &Member) -> Result<f64> {
    let grid = member.u.grid();
    if member.u.is_vanished() {
        return Ok(0.0);
    }
    let w = grid.weights();
    let terms: Vec<f64> = (0..grid.len())
        .filter(|&k| w[k] > 0.0)
        .map(|k| {
            let e = member.u.exp_u(k);
            w[k] * (2.0 * e * e - e * member.psi.norm_sqr_at(k))
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Largest radius of a ball about `p` that stays two cells inside the domain.
fn reach_from(grid: &Grid<f64>, p: Point<f64>) -> f64 {
    let margin = 2.0 * grid.h();
    let r = match *grid.domain() {
        Domain::Disk { center, radius } => radius - (p - center).norm(),
        Domain::Annulus { .. } => 0.0,
        Domain::Rectangle { center, width, height } => {
            (0.5 * width - (p.x - center.x).abs()).min(0.5 * height - (p.y - center.y).abs())
        }
    };
    r - margin
}

/// Energy-identity audit over the inclusive range `n_range` (clamped to the spec).
pub fn energy_identity_audit(spec: &FamilySpec, n_range: Option<[i64; 2]>) -> Result<AuditReport> {
    spec.validate()?;
    let grid = spec.grid()?;
    let [a, b] = n_range.unwrap_or(spec.n_range);
    let idx: Vec<i64> = (a.max(spec.n_range[0])..=b.min(spec.n_range[1])).collect();
    if idx.is_empty() {
        return Err(Error::Argument("audit range does not meet the family index range".into()));
    }
    let rows = crate::parallel::par_map(&idx, |&n| audit_row(spec, &grid, n)).into_iter().collect::<Result<Vec<_>>>()?;
    Ok(AuditReport { rows })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassValue {
    Zero,
    FourPi,
    Neither,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantizationEntry {
    pub delta: f64,
    pub n: i64,
    pub mass: f64,
    pub cross_term_in_ball: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantizationReport {
    pub entries: Vec<QuantizationEntry>,
    pub limit: f64,
    pub value: MassValue,
    pub relative_tolerance: f64,
    pub zero_tolerance: f64,
}

/// `m(p)` as the iterated limit: for every `δ` of the (decreasing) schedule the
/// largest index is used; the last entry is the reported limit.
pub fn quantization_audit(spec: &FamilySpec, center: Point<f64>, delta_schedule: &[f64]) -> Result<QuantizationReport> {
    spec.validate()?;
    if delta_schedule.is_empty() {
        return Err(Error::Argument("empty delta schedule".into()));
    }
    if delta_schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Argument("delta schedule must decrease".into()));
    }
    let grid = spec.grid()?;
    let n = spec.n_range[1];
    let member = generate_family_on(spec, &grid, n)?;
    let mut entries = Vec::new();
    for &delta in delta_schedule {
        let mass = local_mass(&member.u, &member.psi, center, delta)?;
        let w = grid.region_weights(&Domain::disk(center, delta))?;
        let cross = if member.u.is_vanished() {
            0.0
        } else {
            pairwise_sum(&w.iter().map(|&(k, wk)| wk * member.u.exp_u(k) * member.psi.norm_sqr_at(k)).collect::<Vec<_>>())
        };
        entries.push(QuantizationEntry { delta, n, mass, cross_term_in_ball: cross });
    }
    let limit = entries[entries.len() - 1].mass;
    let (rel, zero) = (0.01, 1e-6);
    let four_pi = 4.0 * std::f64::consts::PI;
    let value = if (limit - four_pi).abs() <= rel * four_pi {
        MassValue::FourPi
    } else if limit.abs() < zero {
        MassValue::Zero
    } else {
        MassValue::Neither
    };
    Ok(QuantizationReport { entries, limit, value, relative_tolerance: rel, zero_tolerance: zero })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn liouville_spec() -> FamilySpec {
        FamilySpec::from_json(
            r#"{"bubbles":[{"kind":"liouville","lambda0":1,"growth":2}],
                "domain":{"kind":"disk","center":{"x":0,"y":0},"radius":1},
                "h":0.015625,"n_range":[0,5]}"#,
        )
        .unwrap()
    }

    #[test]
    fn single_liouville_member_is_the_bubble() {
        let spec = liouville_spec();
        let grid = spec.grid().unwrap();
        let m = generate_family_on(&spec, &grid, 5).unwrap();
        let (u, _) = crate::exact::liouville_bubble(32.0, Point::origin(), grid.clone()).unwrap();
        assert_eq!(m.u.values(), u.values());
        assert!(m.psi.is_zero());
        assert!(generate_family_on(&spec, &grid, 6).is_err());
    }

    #[test]
    fn duplicate_liouville_is_a_spec_error() {
        let mut spec = liouville_spec();
        spec.bubbles.push(spec.bubbles[0]);
        assert!(matches!(spec.validate(), Err(Error::Spec(_))));
    }

    #[test]
    fn csv_header() {
        let r = AuditReport { rows: vec![] };
        assert_eq!(r.to_csv(), "n,mass,neck_sup,defect_psi4,defect_e2u,label\n");
    }
}
