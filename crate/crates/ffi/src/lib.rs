//! C ABI for the spatial-asp engine.
//!
//! Objects cross the boundary as opaque handles that the caller releases with
//! the matching `*_free` function. Fallible calls return a [`SaspStatus`]; on
//! failure the message is available from [`sasp_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::OnceLock;

use spatial_asp::asp::{
    extract_answers, format_tuple, parse_program, run_program, AspError, FailureKind,
    GroundOptions, Program, SolverOutcome, StableModel, DEFAULT_DOMAIN_BOUND,
    DEFAULT_GROUND_CEILING,
};
use spatial_asp::spatial::{knowledge_program, knowledge_text, normalize_answer, Dataset};

/// Result codes. Positive values are program failures, negative values are
/// misuse of the API.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaspStatus {
    Ok = 0,
    Parse = 1,
    Unsafe = 2,
    Ground = 3,
    Unstratifiable = 4,
    Unsat = 5,
    NullArgument = -1,
    InvalidUtf8 = -2,
    Panic = -3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaspDataset {
    Stepgame = 0,
    Sparqa = 1,
}

impl From<SaspDataset> for Dataset {
    fn from(d: SaspDataset) -> Self {
        match d {
            SaspDataset::Stepgame => Dataset::StepGame,
            SaspDataset::Sparqa => Dataset::SparQA,
        }
    }
}

/// A parsed program.
pub struct SaspProgram {
    inner: Program,
}

/// The stable model of a solved program.
pub struct SaspModel {
    inner: StableModel,
    atoms: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &AspError) -> SaspStatus {
    match e.kind() {
        FailureKind::Parse => SaspStatus::Parse,
        FailureKind::UnsafeVariable => SaspStatus::Unsafe,
        FailureKind::Ground => SaspStatus::Ground,
        FailureKind::Unstratifiable => SaspStatus::Unstratifiable,
        FailureKind::Unsatisfiable => SaspStatus::Unsat,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (SaspStatus, String)>) -> SaspStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SaspStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside spatial-asp");
            SaspStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (SaspStatus, String)> {
    if p.is_null() {
        return Err((SaspStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        (
            SaspStatus::InvalidUtf8,
            format!("{what} is not valid UTF-8"),
        )
    })
}

fn null_check<T>(p: *const T, what: &str) -> Result<(), (SaspStatus, String)> {
    if p.is_null() {
        Err((SaspStatus::NullArgument, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn model_handle(m: StableModel) -> *mut SaspModel {
    let atoms = m
        .atoms
        .iter()
        .map(|a| CString::new(a.to_string()).expect("atoms contain no NUL"))
        .collect();
    Box::into_raw(Box::new(SaspModel { inner: m, atoms }))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sasp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses `text` into a new program handle stored in `*out`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sasp_program_parse(
    text: *const c_char,
    out: *mut *mut SaspProgram,
) -> SaspStatus {
    guard(|| {
        null_check(out, "out")?;
        let text = read_str(text, "text")?;
        let p = parse_program(text).map_err(|e| (SaspStatus::Parse, e.to_string()))?;
        *out = Box::into_raw(Box::new(SaspProgram { inner: p }));
        Ok(())
    })
}

/// Appends the bundled knowledge program for `dataset`.
///
/// # Safety
/// `program` must be a live handle from [`sasp_program_parse`].
#[no_mangle]
pub unsafe extern "C" fn sasp_program_add_knowledge(
    program: *mut SaspProgram,
    dataset: SaspDataset,
) -> SaspStatus {
    guard(|| {
        null_check(program, "program")?;
        (*program).inner.extend(knowledge_program(dataset.into()));
        Ok(())
    })
}

/// Number of rules in the program.
///
/// # Safety
/// `program` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sasp_program_rule_count(program: *const SaspProgram) -> usize {
    program.as_ref().map_or(0, |p| p.inner.rules.len())
}

/// # Safety
/// `program` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sasp_program_free(program: *mut SaspProgram) {
    if !program.is_null() {
        drop(Box::from_raw(program));
    }
}

/// Checks safety, grounds and solves. A `domain_bound` or `ceiling` of 0
/// selects the default. On success `*out` receives a model handle.
///
/// # Safety
/// `program` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sasp_solve(
    program: *const SaspProgram,
    domain_bound: i64,
    ceiling: u64,
    out: *mut *mut SaspModel,
) -> SaspStatus {
    guard(|| {
        null_check(program, "program")?;
        null_check(out, "out")?;
        let opts = GroundOptions {
            domain_bound: if domain_bound > 0 {
                domain_bound
            } else {
                DEFAULT_DOMAIN_BOUND
            },
            ceiling: if ceiling > 0 {
                ceiling
            } else {
                DEFAULT_GROUND_CEILING
            },
        };
        match run_program(&(*program).inner, &opts) {
            SolverOutcome::Model(m) => {
                *out = model_handle(m);
                Ok(())
            }
            SolverOutcome::Failed(e) => Err((status_of(&e), e.to_string())),
        }
    })
}

/// Number of atoms in the model.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sasp_model_len(model: *const SaspModel) -> usize {
    model.as_ref().map_or(0, |m| m.atoms.len())
}

/// Atom `index` in sorted order, or null when out of range. The string is
/// owned by the model.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sasp_model_atom(model: *const SaspModel, index: usize) -> *const c_char {
    model
        .as_ref()
        .and_then(|m| m.atoms.get(index))
        .map_or(ptr::null(), |c| c.as_ptr())
}

/// Argument tuples of `predicate` atoms, one `(a,b)` per line, in a new
/// string released with [`sasp_string_free`].
///
/// # Safety
/// `model` must be a live handle, `predicate` a NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sasp_model_answers(
    model: *const SaspModel,
    predicate: *const c_char,
    out: *mut *mut c_char,
) -> SaspStatus {
    guard(|| {
        null_check(model, "model")?;
        null_check(out, "out")?;
        let pred = read_str(predicate, "predicate")?;
        let lines: Vec<String> = extract_answers(&(*model).inner, pred)
            .iter()
            .map(format_tuple)
            .collect();
        *out = CString::new(lines.join("\n")).expect("no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sasp_model_free(model: *mut SaspModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Canonical answer label for `token`, or `<unknown>`, in a new string.
///
/// # Safety
/// `token` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sasp_normalize_answer(
    token: *const c_char,
    dataset: SaspDataset,
    out: *mut *mut c_char,
) -> SaspStatus {
    guard(|| {
        null_check(out, "out")?;
        let token = read_str(token, "token")?;
        let label = normalize_answer(token, dataset.into()).into_label();
        *out = CString::new(label).expect("no NUL").into_raw();
        Ok(())
    })
}

/// Source of the bundled knowledge program; static, never freed.
#[no_mangle]
pub extern "C" fn sasp_knowledge_text(dataset: SaspDataset) -> *const c_char {
    static STEPGAME: OnceLock<CString> = OnceLock::new();
    static SPARQA: OnceLock<CString> = OnceLock::new();
    let cell = match dataset {
        SaspDataset::Stepgame => &STEPGAME,
        SaspDataset::Sparqa => &SPARQA,
    };
    cell.get_or_init(|| CString::new(knowledge_text(dataset.into())).expect("no NUL"))
        .as_ptr()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sasp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
