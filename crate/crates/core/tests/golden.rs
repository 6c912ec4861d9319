//! Regression against frozen outputs in `tests/golden/`.

use serde_json::Value;

use dilute1d::ed_oracle::OracleSettings;
use dilute1d::lieb_liniger::solve_at_lambda;
use dilute1d::validator::{validate, EnvelopeConstants, Symmetry, SymmetryMap};
use dilute1d::Potential;

fn load(name: &str) -> Value {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    serde_json::from_str(&text).unwrap()
}

/// Numbers agree to `rel`; everything else must match exactly.
fn assert_close(expected: &Value, actual: &Value, rel: f64, at: &str) {
    match (expected, actual) {
        (Value::Number(a), Value::Number(b)) => {
            let (a, b) = (a.as_f64().unwrap(), b.as_f64().unwrap());
            assert!(
                (a - b).abs() <= rel * a.abs().max(1e-300),
                "{at}: {a} vs {b}"
            );
        }
        (Value::Object(a), Value::Object(b)) => {
            assert_eq!(a.len(), b.len(), "{at}: key sets differ");
            for (k, v) in a {
                let w = b.get(k).unwrap_or_else(|| panic!("{at}.{k} missing"));
                assert_close(v, w, rel, &format!("{at}.{k}"));
            }
        }
        (Value::Array(a), Value::Array(b)) => {
            assert_eq!(a.len(), b.len(), "{at}: lengths differ");
            for (i, (v, w)) in a.iter().zip(b).enumerate() {
                assert_close(v, w, rel, &format!("{at}[{i}]"));
            }
        }
        (a, b) => assert_eq!(a, b, "{at}"),
    }
}

#[test]
fn lieb_liniger_at_unit_lambda() {
    let golden = load("ll_lambda1_n400.json");
    let s = solve_at_lambda(1.0, 400).unwrap();
    let e = golden["e"].as_f64().unwrap();
    let gamma = golden["gamma"].as_f64().unwrap();
    assert!((s.e - e).abs() < 1e-14, "{} vs {e}", s.e);
    assert!((s.gamma - gamma).abs() < 1e-14, "{} vs {gamma}", s.gamma);
}

#[test]
fn delta_gas_report_for_two_particles() {
    let golden = load("validate_n2_l40_c5.json");
    let report = validate(
        2,
        40.0,
        &Potential::free(),
        SymmetryMap::new(Symmetry::Bose, 5.0),
        EnvelopeConstants::default(),
        Some(OracleSettings::default()),
    )
    .unwrap();
    let actual = serde_json::to_value(&report).unwrap();
    assert_close(&golden, &actual, 1e-9, "report");
    assert!((report.outcome.scattering_length.unwrap() + 0.4).abs() < 1e-14);
}
