//! Worked values for the public API, checked against reference numbers
//! computed independently with 40-digit arithmetic.

use gkb_core::verify::{sweep_symmetry, write_csv, SweepConfig};
use gkb_core::{
    dual_roundtrip, extremal_sup_pair, inf_reverse_kl, kl, parse_gaussian, parse_pair, pair_to_json,
    sup_reverse_kl, triangle_bound, Error, Gaussian,
};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn one_dimensional_kl() {
    let g1 = Gaussian::diagonal(&[0.0], &[1.0]).unwrap();
    let g2 = Gaussian::diagonal(&[1.0], &[1.0]).unwrap();
    assert!((kl(&g1, &g2).unwrap() - 0.5).abs() < 1e-15);
    let g3 = Gaussian::diagonal(&[0.0], &[std::f64::consts::E]).unwrap();
    let expected = 0.5 * (std::f64::consts::E - 2.0);
    assert!((kl(&g3, &g1).unwrap() - expected).abs() < 1e-14);
}

#[test]
fn bound_reference_values() {
    assert!(rel(sup_reverse_kl(0.5).unwrap().value, 1.731_994_809_417_365_3) < 1e-12);
    assert!(rel(sup_reverse_kl(1e-4).unwrap().value, 1.013_467_831_375_341_7e-4) < 1e-10);
    assert!(rel(inf_reverse_kl(1.0).unwrap().value, 0.363_602_589_927_976_2) < 1e-12);
    assert!(rel(triangle_bound(0.1, 0.2).unwrap().value, 3.260_148_463_319_837) < 1e-12);
    assert!(rel(triangle_bound(1e-4, 1e-4).unwrap().value, 8.148_586_027_545_067e-4) < 1e-10);
    assert!(rel(dual_roundtrip(3.0).unwrap(), 3.0) < 1e-12);
    assert!(triangle_bound(0.1, 0.2).unwrap().strict);
    assert!(matches!(inf_reverse_kl(0.0), Err(Error::Domain { .. })));
}

#[test]
fn json_round_trip_and_errors() {
    let pair = extremal_sup_pair(0.5, 3).unwrap();
    let (g1, g2) = parse_pair(&pair.to_json()).unwrap();
    assert_eq!((g1.clone(), g2.clone()), (pair.g1.clone(), pair.g2.clone()));
    assert_eq!(parse_pair(&pair_to_json(&g1, &g2)).unwrap().0, g1);

    let asymmetric = r#"{"mean": [0, 0], "cov": [[1, 0.5], [0.4, 1]]}"#;
    assert!(matches!(parse_gaussian(asymmetric), Err(Error::Parse(m)) if m.contains("symmetr")));
    let indefinite = r#"{"mean": [0, 0], "cov": [[1, 2], [2, 1]]}"#;
    assert!(matches!(parse_gaussian(indefinite), Err(Error::Parse(m)) if m.contains("positive")));
    let ragged = r#"{"mean": [0, 0], "cov": [[1, 0], [0]]}"#;
    assert!(parse_gaussian(ragged).is_err());
    assert!(parse_gaussian(r#"{"mean": [0], "cov": [[1]], "extra": 1}"#).is_err());
}

#[test]
fn sweep_reports_are_reproducible_as_csv() {
    let cfg = SweepConfig::default().with_trials(10).with_seed(42);
    let render = || {
        let report = sweep_symmetry(&[0.5], &[2], &cfg).unwrap();
        let mut buf = Vec::new();
        write_csv(&report, &mut buf).unwrap();
        buf
    };
    let a = render();
    assert_eq!(a, render());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("master_seed,suite,cell,trial,dim,"));
    assert_eq!(text.lines().count(), 12);
}
