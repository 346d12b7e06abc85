use std::ffi::{CStr, CString};
use std::ptr;

use qbnf_ffi::*;

fn last_error() -> String {
    let p = qbnf_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn config_path(name: &str) -> CString {
    let p = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/").to_owned() + name;
    CString::new(p).unwrap()
}

#[test]
fn special_functions() {
    let mut v = 0.0;
    assert_eq!(unsafe { qbnf_gamma(5.0, &mut v) }, QbnfStatus::Ok);
    assert!((v - 24.0).abs() < 1e-12);
    assert_eq!(unsafe { qbnf_beta(2.0, 3.0, &mut v) }, QbnfStatus::Ok);
    assert!((v - 1.0 / 12.0).abs() < 1e-15);
    assert_eq!(unsafe { qbnf_gamma(-1.0, &mut v) }, QbnfStatus::Domain);
    assert!(!last_error().is_empty());
    assert_eq!(
        unsafe { qbnf_gamma(1.0, ptr::null_mut()) },
        QbnfStatus::NullPointer
    );
}

#[test]
fn delta_handles_and_divisor_scan() {
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(qbnf_delta_polynomial(1.0, 2.0, &mut d), QbnfStatus::Ok);
        let mut v = 0.0;
        assert_eq!(qbnf_delta_eval(d, 3.0, &mut v), QbnfStatus::Ok);
        assert!((v - 4.0).abs() < 1e-14);

        let mut arg = 0.0;
        assert_eq!(
            qbnf_delta_gamma_sup(d, 2.0, 1.0, &mut v, &mut arg),
            QbnfStatus::Ok
        );
        assert!(v > 1.0 && arg > 0.0);

        let omega = [1.0, (1.0 + 5f64.sqrt()) / 2.0];
        let mut kmax = 0.0;
        let mut k = [0i64; 2];
        assert_eq!(
            qbnf_scan_divisors(omega.as_ptr(), 2, d, 10, 1e-3, &mut kmax, k.as_mut_ptr()),
            QbnfStatus::Ok
        );
        assert!(kmax > 0.0 && k != [0, 0]);

        let res = [1.0, 1.0];
        assert_eq!(
            qbnf_scan_divisors(res.as_ptr(), 2, d, 4, 1e-3, &mut kmax, k.as_mut_ptr()),
            QbnfStatus::Resonant
        );
        assert!(last_error().contains("(1,-1)"));

        let mut bad = ptr::null_mut();
        assert_eq!(
            qbnf_delta_sub_exponential(-1.0, 2.0, &mut bad),
            QbnfStatus::Configuration
        );
        assert!(bad.is_null());
        qbnf_delta_free(d);
    }
}

#[test]
fn run_and_serialize_report() {
    unsafe {
        let mut cfg = ptr::null_mut();
        let path = config_path("golden_t1.toml");
        assert_eq!(
            qbnf_config_parse_file(path.as_ptr(), &mut cfg),
            QbnfStatus::Ok
        );
        let mut rep = ptr::null_mut();
        assert_eq!(qbnf_run(cfg, 1e-10, false, &mut rep), QbnfStatus::Ok);
        assert!(qbnf_report_success(rep));
        let mut json = ptr::null_mut();
        assert_eq!(qbnf_report_to_json(rep, &mut json), QbnfStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap();
        assert!(text.contains("\"schema_version\""));
        qbnf_string_free(json);
        qbnf_report_free(rep);
        qbnf_config_free(cfg);

        let junk = CString::new("dimension = \"two\"").unwrap();
        assert_eq!(
            qbnf_config_parse(junk.as_ptr(), &mut cfg),
            QbnfStatus::Configuration
        );
    }
}

#[test]
fn symbol_json_and_composition() {
    let json = r#"{"n":1,"h_order":1,"fourier_radius":1,"taylor_degree":1,"base_action":[0.0],"t_value":0.0,
        "records":[{"j":0,"k":[0],"gamma":[1],"re":1.0,"im":0.0},{"j":0,"k":[1],"gamma":[0],"re":1.0,"im":0.0}]}"#;
    let text = CString::new(json).unwrap();
    unsafe {
        let mut s = ptr::null_mut();
        let status = qbnf_symbol_from_json(text.as_ptr(), &mut s);
        assert_eq!(status, QbnfStatus::Ok, "{}", last_error());
        let mut c = ptr::null_mut();
        let mut clipped = -1.0;
        assert_eq!(
            qbnf_symbol_compose(s, s, &mut c, &mut clipped),
            QbnfStatus::Ok
        );
        assert!(clipped >= 0.0);
        let mut out = ptr::null_mut();
        assert_eq!(qbnf_symbol_to_json(c, &mut out), QbnfStatus::Ok);
        assert!(CStr::from_ptr(out).to_str().unwrap().contains("records"));
        qbnf_string_free(out);
        qbnf_symbol_free(c);
        qbnf_symbol_free(s);
    }
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/qbnf.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 20);
    for name in exports {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
    let v = unsafe { CStr::from_ptr(qbnf_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
