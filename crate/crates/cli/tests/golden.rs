//! Compares every problem file under tests/golden with its `.expected`
//! transcript. `VARINV_BLESS=1` rewrites the transcripts.

mod common;

use std::fs;

#[test]
fn golden_transcripts() {
    let bless = std::env::var_os("VARINV_BLESS").is_some();
    let mut mismatches = Vec::new();
    for case in common::cases() {
        let actual = common::run_case(&case);
        let path = common::expected_path(&case);
        if bless {
            fs::write(&path, &actual).expect("write transcript");
            continue;
        }
        let expected = fs::read_to_string(&path).unwrap_or_default();
        if expected != actual {
            mismatches.push(format!("{}:\n--- expected\n{expected}--- actual\n{actual}", case.display()));
        }
    }
    assert!(mismatches.is_empty(), "{}", mismatches.join("\n"));
}

#[test]
fn exit_codes_follow_the_outcome() {
    let code = |name: &str| {
        let out = common::run_case(&common::golden_dir().join(format!("{name}.prob")));
        out.lines().next().unwrap().to_string()
    };
    assert_eq!(code("el_exp_ratio"), "exit: 0");
    assert_eq!(code("helmholtz_negative"), "exit: 2");
    assert_eq!(code("solve_m1_failure"), "exit: 2");
    assert_eq!(code("solve_no_closed_form"), "exit: 3");
    assert_eq!(code("parse_error"), "exit: 4");
    assert_eq!(code("shape_error"), "exit: 4");
    assert_eq!(code("asymmetric_data"), "exit: 4");
}
