use std::ffi::{CStr, CString};
use std::ptr;

use spatial_asp_ffi::*;

fn last_error() -> String {
    let p = sasp_last_error();
    assert!(!p.is_null(), "expected an error message");
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn parse(text: &str) -> *mut SaspProgram {
    let c = CString::new(text).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { sasp_program_parse(c.as_ptr(), &mut p) },
        SaspStatus::Ok
    );
    p
}

fn solve_status(text: &str) -> SaspStatus {
    let p = parse(text);
    let mut m = ptr::null_mut();
    let s = unsafe { sasp_solve(p, 0, 0, &mut m) };
    unsafe {
        sasp_model_free(m);
        sasp_program_free(p);
    }
    s
}

#[test]
fn solve_and_read_model() {
    let p = parse("a. b :- a.");
    assert_eq!(unsafe { sasp_program_rule_count(p) }, 2);
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { sasp_solve(p, 0, 0, &mut m) }, SaspStatus::Ok);
    assert!(sasp_last_error().is_null());
    unsafe {
        assert_eq!(sasp_model_len(m), 2);
        let atoms: Vec<&str> = (0..2)
            .map(|i| CStr::from_ptr(sasp_model_atom(m, i)).to_str().unwrap())
            .collect();
        assert_eq!(atoms, ["a", "b"]);
        assert!(sasp_model_atom(m, 2).is_null());
        sasp_model_free(m);
        sasp_program_free(p);
    }
}

#[test]
fn stepgame_answers_through_the_abi() {
    let p = parse("is(a,left,b). is(b,left,c). query(a,c).");
    let mut m = ptr::null_mut();
    let pred = CString::new("answer").unwrap();
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(
            sasp_program_add_knowledge(p, SaspDataset::Stepgame),
            SaspStatus::Ok
        );
        assert_eq!(sasp_solve(p, 3, 0, &mut m), SaspStatus::Ok);
        assert_eq!(
            sasp_model_answers(m, pred.as_ptr(), &mut out),
            SaspStatus::Ok
        );
        assert_eq!(CStr::from_ptr(out).to_str().unwrap(), "(left)");
        sasp_string_free(out);
        sasp_model_free(m);
        sasp_program_free(p);
    }
}

#[test]
fn error_codes() {
    let c = CString::new("is(a left b).").unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { sasp_program_parse(c.as_ptr(), &mut p) },
        SaspStatus::Parse
    );
    assert!(p.is_null());
    assert!(last_error().starts_with("PARSE: "));

    assert_eq!(solve_status("p(X) :- not q(X)."), SaspStatus::Unsafe);
    assert!(last_error().contains("unsafe variable 'X'"));
    assert_eq!(
        solve_status("p :- not q. q :- not p."),
        SaspStatus::Unstratifiable
    );
    assert_eq!(solve_status("a. :- a."), SaspStatus::Unsat);
    assert_eq!(
        last_error(),
        "UNSAT: integrity constraint ':- a.' is violated @ 1:4"
    );
}

#[test]
fn ground_ceiling_code() {
    let mut text = String::new();
    for i in 0..60 {
        text.push_str(&format!("n({i}).\n"));
    }
    text.push_str("t(X,Y,Z) :- n(X), n(Y), n(Z).\n");
    let p = parse(&text);
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { sasp_solve(p, 0, 1000, &mut m) },
        SaspStatus::Ground
    );
    assert!(last_error().starts_with("GROUND: instantiation count exceeds ceiling 1000"));
    unsafe { sasp_program_free(p) };
}

#[test]
fn misuse_is_reported() {
    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { sasp_program_parse(ptr::null(), &mut p) },
        SaspStatus::NullArgument
    );
    assert_eq!(last_error(), "text is null");
    let bad = [0xffu8, 0xfe, 0];
    assert_eq!(
        unsafe { sasp_program_parse(bad.as_ptr().cast(), &mut p) },
        SaspStatus::InvalidUtf8
    );
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { sasp_solve(ptr::null(), 0, 0, &mut m) },
        SaspStatus::NullArgument
    );
    unsafe {
        assert_eq!(sasp_model_len(ptr::null()), 0);
        sasp_model_free(ptr::null_mut());
        sasp_program_free(ptr::null_mut());
        sasp_string_free(ptr::null_mut());
    }
}

#[test]
fn normalization_and_knowledge() {
    let tok = CString::new("north-east").unwrap();
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(
            sasp_normalize_answer(tok.as_ptr(), SaspDataset::Stepgame, &mut out),
            SaspStatus::Ok
        );
        assert_eq!(CStr::from_ptr(out).to_str().unwrap(), "top-right");
        sasp_string_free(out);
        let k = CStr::from_ptr(sasp_knowledge_text(SaspDataset::Sparqa))
            .to_str()
            .unwrap();
        assert!(k.contains("inverse(left,right)."));
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/spatial_asp.h");
    let src = include_str!("../src/lib.rs");
    let mut count = 0;
    for line in src.lines() {
        if let Some(rest) = line.split("extern \"C\" fn ").nth(1) {
            let name = rest.split('(').next().unwrap();
            assert!(
                header.contains(&format!("{name}(")),
                "{name} missing from header"
            );
            count += 1;
        }
    }
    assert_eq!(count, 13);
    assert!(header.contains("SASP_STATUS_UNSTRATIFIABLE = 4"));
    assert!(header.contains("typedef struct SaspProgram SaspProgram;"));
}
