use std::collections::BTreeMap;

use momentlab::potentials::{parse_family, Family};
use momentlab::report::{input_hash, Check, TheoremRef, VerificationReport};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, Just(0.0), Just(f64::MIN_POSITIVE), Just(1e300)]
}

proptest! {
    #[test]
    fn reports_round_trip(
        values in prop::collection::btree_map("[a-z_]{1,8}", finite(), 0..6),
        params in prop::collection::btree_map("[a-z-]{1,8}", "[ -~]{0,12}", 0..6),
        tolerance in finite(),
        passed: bool,
        runtime in 0.0..1e4f64,
    ) {
        let mut check = Check::new("generated", TheoremRef::GapFormula, tolerance, passed);
        for (k, v) in &values {
            check = check.with(k, *v);
        }
        let mut report = VerificationReport::new("spectrum", params.clone());
        report.push(check);
        report.runtime_seconds = runtime;
        let back = VerificationReport::from_json(&report.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back, &report);
        prop_assert_eq!(back.input_hash, input_hash("spectrum", &params));
    }

    #[test]
    fn non_finite_values_never_pass(v in prop_oneof![Just(f64::NAN), Just(f64::INFINITY), Just(f64::NEG_INFINITY)]) {
        let check = Check::new("x", TheoremRef::SumRule, 1.0, true).with("value", v);
        prop_assert!(!check.passed);
        prop_assert!(check.values.is_empty());
        let json = serde_json::to_string(&check).unwrap();
        prop_assert!(serde_json::from_str::<Check>(&json).is_ok());
    }

    #[test]
    fn parsed_parameters_are_exact(g in 1e-3..1e3f64, a in 1e-3..1e3f64, b in 1e-3..1e3f64) {
        prop_assert_eq!(parse_family(&format!("sech2:g={g}")).unwrap(), Family::SechSquaredWell { depth: g });
        prop_assert_eq!(
            parse_family(&format!("square:half_width={b},depth={a}")).unwrap(),
            Family::SquareWell { depth: a, half_width: b }
        );
        prop_assert_eq!(
            parse_family(&format!("gauss:depth={a},width={b}")).unwrap(),
            Family::GaussianWell { depth: a, width: b }
        );
        prop_assert_eq!(parse_family(&format!("harmonic:w2={a}")).unwrap(), Family::HarmonicWell { stiffness: a });
    }

    #[test]
    fn unknown_keys_are_rejected(key in "[a-z]{1,6}") {
        prop_assume!(key != "g");
        let text = format!("sech2:{key}=1");
        prop_assert!(parse_family(&text).is_err());
    }
}

#[test]
fn empty_parameter_maps_hash_the_command_only() {
    assert_ne!(input_hash("spectrum", &BTreeMap::new()), input_hash("moments", &BTreeMap::new()));
}
