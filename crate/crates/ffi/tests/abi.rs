use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use tdta_ffi::*;

fn fixture(name: &str) -> CString {
    let p = format!("{}/../core/fixtures/{}.tdt", env!("CARGO_MANIFEST_DIR"), name);
    CString::new(std::fs::read_to_string(p).unwrap()).unwrap()
}

fn parse(name: &str) -> *mut TdtaTransducer {
    let mut h = ptr::null_mut();
    let src = fixture(name);
    assert_eq!(unsafe { tdta_parse_transducer(src.as_ptr(), &mut h) }, TdtaStatus::Ok);
    assert!(!h.is_null());
    h
}

fn take(s: *mut c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { tdta_string_free(s) };
    out
}

fn last_error() -> String {
    let p = tdta_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn eval(h: *const TdtaTransducer, tree: &str) -> (TdtaStatus, Option<String>) {
    let tree = CString::new(tree).unwrap();
    let mut out = ptr::null_mut();
    let s = unsafe { tdta_eval(h, tree.as_ptr(), &mut out) };
    (s, (!out.is_null()).then(|| take(out)))
}

#[test]
fn parse_eval_print_round_trip() {
    let h = parse("intro");
    assert_eq!(eval(h, "f(f(a,b),a)"), (TdtaStatus::Ok, Some("f(f(b,b),a)".into())));
    assert_eq!(eval(h, "f(b,a)").0, TdtaStatus::Undefined);
    assert!(last_error().contains("undefined"));
    assert_eq!(eval(h, "f(a,").0, TdtaStatus::ParseError);

    let mut text = ptr::null_mut();
    assert_eq!(unsafe { tdta_transducer_print(h, &mut text) }, TdtaStatus::Ok);
    let text = CString::new(take(text)).unwrap();
    let mut again = ptr::null_mut();
    assert_eq!(unsafe { tdta_parse_transducer(text.as_ptr(), &mut again) }, TdtaStatus::Ok);
    let mut eq = -1;
    assert_eq!(unsafe { tdta_equivalent(h, again, &mut eq, ptr::null_mut()) }, TdtaStatus::Ok);
    assert_eq!(eq, 1);
    unsafe {
        tdta_transducer_free(again);
        tdta_transducer_free(h);
    }
}

#[test]
fn constructions_preserve_the_translation() {
    let h = parse("one");
    let mut e = ptr::null_mut();
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { tdta_earliest(h, TdtaMode::Linear, &mut e) }, TdtaStatus::Ok);
    assert_eq!(unsafe { tdta_canonicalize(e, &mut c) }, TdtaStatus::Ok);
    let mut eq = 0;
    assert_eq!(unsafe { tdta_equivalent(h, c, &mut eq, ptr::null_mut()) }, TdtaStatus::Ok);
    assert_eq!(eq, 1);

    let g = parse("need2");
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { tdta_remove_inspection(g, TdtaMode::Uc, &mut r) }, TdtaStatus::Ok);
    assert_eq!(unsafe { tdta_equivalent(g, r, &mut eq, ptr::null_mut()) }, TdtaStatus::Ok);
    assert_eq!(eq, 1);
    unsafe {
        for x in [h, e, c, g, r] {
            tdta_transducer_free(x);
        }
    }
}

#[test]
fn negative_verdicts_carry_reason_and_stage() {
    let h = parse("conclusion");
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { tdta_remove_lookahead(h, TdtaMode::Uc, &mut out) }, TdtaStatus::NegativeVerdict);
    assert!(out.is_null());
    let msg = last_error();
    assert!(msg.contains("hypothesis-H") && msg.contains("construction"), "{}", msg);
    unsafe { tdta_transducer_free(h) };
}

#[test]
fn inequivalence_reports_a_witness() {
    let a = parse("intro");
    let src = fixture("intro").into_string().unwrap().replace("f(f(b,b),qid(x2))", "f(f(a,b),qid(x2))");
    let src = CString::new(src).unwrap();
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { tdta_parse_transducer(src.as_ptr(), &mut b) }, TdtaStatus::Ok);
    let mut eq = -1;
    let mut w = ptr::null_mut();
    assert_eq!(unsafe { tdta_equivalent(a, b, &mut eq, &mut w) }, TdtaStatus::Ok);
    assert_eq!(eq, 0);
    if !w.is_null() {
        let w = take(w);
        assert_ne!(eval(a, &w), eval(b, &w));
    }
    unsafe {
        tdta_transducer_free(a);
        tdta_transducer_free(b);
    }
}

#[test]
fn bad_arguments_are_reported() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { tdta_parse_transducer(ptr::null(), &mut h) }, TdtaStatus::NullArg);
    let bad = CString::new("alphabet s { f/2 ").unwrap();
    assert_eq!(unsafe { tdta_parse_transducer(bad.as_ptr(), &mut h) }, TdtaStatus::ParseError);
    assert!(h.is_null());
    assert!(last_error().contains("parse error"));
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { tdta_canonicalize(ptr::null(), &mut out) }, TdtaStatus::NullArg);
    let mut eq = 0;
    assert_eq!(unsafe { tdta_equivalent(ptr::null(), ptr::null(), &mut eq, ptr::null_mut()) }, TdtaStatus::NullArg);
    unsafe {
        tdta_transducer_free(ptr::null_mut());
        tdta_string_free(ptr::null_mut());
    }
}

fn header() -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/tdta.h")).unwrap()
}

#[test]
fn header_declares_every_export() {
    let h = header();
    let src = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|l| l.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 10);
    for f in exports {
        assert!(h.contains(&format!("{}(", f)), "{} missing from header", f);
    }
    assert!(h.contains("typedef struct TdtaTransducer TdtaTransducer;"));
}

fn static_lib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let dir = exe.parent()?.parent()?;
    let lib = dir.join("libtdta_ffi.a");
    lib.exists().then_some(lib)
}

const C_SMOKE: &str = r#"
#include <stdio.h>
#include <string.h>
#include "tdta.h"

static const char *SRC =
  "alphabet s { f/2 a/0 b/0 }\n"
  "automaton B over s { states h; accept h; h <- f(h,h); h <- a; h <- b; }\n"
  "transducer Sw over B { state q : h; axiom h = q(x1);\n"
  "  rule q(f(x1:h,x2:h)) -> f(q(x2),q(x1)); rule q(a) -> a; rule q(b) -> b; }\n";

int main(void) {
  TdtaTransducer *t = NULL;
  if (tdta_parse_transducer(SRC, &t) != TDTA_STATUS_OK) { printf("parse: %s\n", tdta_last_error_message()); return 1; }
  char *out = NULL;
  if (tdta_eval(t, "f(a,f(a,b))", &out) != TDTA_STATUS_OK) return 2;
  int ok = strcmp(out, "f(f(b,a),a)") == 0;
  tdta_string_free(out);
  TdtaTransducer *c = NULL;
  if (tdta_canonicalize(t, &c) != TDTA_STATUS_OK) return 3;
  int32_t eq = 0;
  if (tdta_equivalent(t, c, &eq, NULL) != TDTA_STATUS_OK || eq != 1) return 4;
  tdta_transducer_free(c);
  tdta_transducer_free(t);
  puts(ok ? "ok" : "mismatch");
  return ok ? 0 : 5;
}
"#;

#[test]
fn c_program_links_against_the_static_library() {
    let (Some(lib), true) = (static_lib(), Command::new("cc").arg("--version").output().is_ok()) else {
        eprintln!("skipped: no C compiler or static library");
        return;
    };
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let c = dir.join("smoke.c");
    let bin = dir.join("smoke");
    std::fs::write(&c, C_SMOKE).unwrap();
    let inc = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let st = Command::new("cc")
        .arg(&c)
        .arg("-I")
        .arg(&inc)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
