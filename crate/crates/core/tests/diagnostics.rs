use std::f64::consts::PI;
use std::sync::Arc;

use superl_core::diagnostics::{
    brezis_merle_classify, classify_singularity, family_report, local_mass, log_coefficient_fit, neck_scan,
    pohozaev_constant, radial_slope_identity, BMCase, BMOptions, ReportProbe, SingularityType,
};
use superl_core::exact::{liouville_bubble, liouville_u, neck_share, yamabe_bubble};
use superl_core::fields::{CouplingField, ScalarField, SpinorField};
use superl_core::grid::{make_grid, Domain, Grid, Point};
use superl_core::spin2d::SpinorValue;

fn disk(h: f64) -> Arc<Grid<f64>> {
    Arc::new(make_grid(Domain::disk(Point::origin(), 1.0), h).unwrap())
}

const O: Point<f64> = Point { x: 0.0, y: 0.0 };

#[test]
fn local_mass_examples() {
    let g = disk(1.0 / 256.0);
    let (u, psi) = liouville_bubble(100.0, O, g.clone()).unwrap();
    let m = local_mass(&u, &psi, O, 1.0).unwrap();
    assert!((m - 4.0 * PI * 1e4 / 10001.0).abs() < 1e-3, "{m}");
    let (v, phi) = yamabe_bubble(4.0, -0.5, SpinorValue::from_reals([1.0, 0.0, 0.0, 0.0]), None, O, g.clone()).unwrap();
    assert_eq!(local_mass(&v, &phi, O, 0.5).unwrap(), 0.0);
    let zero = ScalarField::zeros(g.clone());
    assert!((local_mass(&zero, &SpinorField::zeros(g), O, 1.0).unwrap() - 2.0 * PI).abs() < 1e-10);
}

#[test]
fn radial_slope_identity_examples() {
    let g = disk(1.0 / 256.0);
    let z = SpinorField::zeros(g.clone());
    let (l, r) = radial_slope_identity(&ScalarField::constant(g.clone(), -10.0), &z, O, 0.5).unwrap();
    assert!(l.abs() < 1e-6 && r.abs() < 1e-6);

    // a puncture carries flux that the area integral cannot see
    let lnr = ScalarField::from_fn(g.clone(), |p| p.norm().ln() - 10.0);
    let (l, r) = radial_slope_identity(&lnr, &z, O, 0.5).unwrap();
    assert!((l - 1.0).abs() < 1e-3 && r.abs() < 1e-6, "{l} {r}");

    let (u, psi) = liouville_bubble(2.0, O, g.clone()).unwrap();
    let (l, r) = radial_slope_identity(&u, &psi, O, 0.5).unwrap();
    assert!((l + 1.0).abs() < 0.02 && (r + 1.0).abs() < 0.02, "{l} {r}");
    assert!(radial_slope_identity(&u, &psi, O, g.h()).is_err());
}

#[test]
fn log_fit_of_a_concentrated_bubble() {
    let g = disk(1.0 / 128.0);
    let (u, _) = liouville_bubble(100.0, O, g).unwrap();
    let fit = log_coefficient_fit(&u, O, 0.5, 1.0).unwrap();
    assert!((fit.coefficient + 2.0).abs() < 1e-3, "{}", fit.coefficient);
    assert!((fit.implied_mass() - 4.0 * PI).abs() < 0.01 * 4.0 * PI);
    assert!((fit.offset - (2f64.sqrt() / 100.0).ln()).abs() < 1e-3);
}

#[test]
fn neck_scan_matches_the_closed_form() {
    let g = disk(1.0 / 256.0);
    let lambda = 100.0;
    let (u, psi) = liouville_bubble(lambda, O, g).unwrap();
    let scan = neck_scan(&u, &psi, O, 10.0 / lambda, 1.0).unwrap();
    assert_eq!(scan.annuli.len(), 3);
    for a in &scan.annuli {
        let want = 2.0 * PI * neck_share(lambda * a.t);
        assert!((a.e2u - want).abs() < 0.01 * want, "t = {}: {} vs {want}", a.t, a.e2u);
        assert_eq!(a.psi4, 0.0);
    }
    assert!(scan.annuli.windows(2).all(|w| w[1].energy < w[0].energy));
    assert!((scan.sup - 2.0 * PI * neck_share(10.0)).abs() < 1e-3);
    for a in &scan.annuli {
        let want = (2f64.sqrt() * lambda * a.t / (1.0 + (lambda * a.t).powi(2))).ln();
        assert!((a.fast_decay.unwrap() - want).abs() < 1e-3);
    }
}

#[test]
fn singularity_types() {
    let g = disk(1.0 / 64.0);
    let probe = Domain::disk(O, 0.5);
    let z = SpinorField::zeros(g.clone());
    let bubbles: Vec<_> = (0..6).map(|n| (liouville_bubble(2f64.powi(n), O, g.clone()).unwrap().0, z.clone())).collect();
    let r = classify_singularity(&bubbles, &probe, 10.0).unwrap();
    assert_eq!(r.classification, SingularityType::First);
    assert!((r.a_n[5].unwrap() - (2f64.sqrt() * 32.0).ln()).abs() < 1e-12);

    let phi = SpinorValue::from_reals([1.0, 0.0, 0.0, 0.0]);
    let spinors: Vec<_> = (0..4).map(|n| yamabe_bubble(2f64.powi(n), -0.5, phi, None, O, g.clone()).unwrap()).collect();
    let r = classify_singularity(&spinors, &probe, 10.0).unwrap();
    assert_eq!(r.classification, SingularityType::Second);
    assert!(r.a_n.iter().all(Option::is_none));

    let mixed: Vec<_> = (1..=15)
        .map(|n| {
            let n = n as f64;
            (ScalarField::constant(g.clone(), n), SpinorField::from_fn(g.clone(), |_| SpinorValue::from_reals([n.exp(), 0.0, 0.0, 0.0])))
        })
        .collect();
    let r = classify_singularity(&mixed, &probe, 10.0).unwrap();
    assert_eq!(r.classification, SingularityType::Second);
}

#[test]
fn brezis_merle_threshold_sensitivity() {
    let g = disk(1.0 / 64.0);
    let z = SpinorField::zeros(g.clone());
    // a fixed smooth bubble never drops below epsilon1 near its center
    let fam: Vec<_> = (0..3).map(|_| (ScalarField::from_fn(g.clone(), |p| liouville_u(4.0, O, p)), z.clone())).collect();
    let low = brezis_merle_classify(&fam, &BMOptions { epsilon1: 0.1, ..BMOptions::default() }).unwrap();
    assert_eq!(low.case, BMCase::C);
    let high = brezis_merle_classify(&fam, &BMOptions { epsilon1: 100.0, ..BMOptions::default() }).unwrap();
    assert_eq!(high.case, BMCase::A);
    assert!(brezis_merle_classify(&fam[..2], &BMOptions::default()).is_err());
}

#[test]
fn pohozaev_near_the_boundary_is_rejected() {
    let g = disk(1.0 / 64.0);
    let (u, psi) = liouville_bubble(1.0, O, g).unwrap();
    assert!(pohozaev_constant(&u, &psi, &CouplingField::constant(0.0), O, 0.999).is_err());
}

#[test]
fn family_report_rows() {
    let g = disk(1.0 / 128.0);
    let z = SpinorField::zeros(g.clone());
    let fam: Vec<_> = (2..6).map(|n| (liouville_bubble(2f64.powi(n), O, g.clone()).unwrap().0, z.clone())).collect();
    let probe = ReportProbe { center: O, delta: 0.5, neck_r_min: 0.05, neck_r_max: 0.5, threshold: 10.0, bm: BMOptions::default() };
    let rep = family_report(&fam, &[2, 3, 4, 5], &CouplingField::constant(0.0), &probe).unwrap();
    assert_eq!(rep.rows.len(), 4);
    assert!(rep.rows.iter().all(|r| r.pohozaev.abs() < 1e-2 && r.label == "first/c"));
    assert!(rep.rows.windows(2).all(|w| w[1].mass > w[0].mass));
    assert!(family_report(&fam, &[1], &CouplingField::constant(0.0), &probe).is_err());
}
