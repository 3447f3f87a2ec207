//! C ABI over `topcorr`.
//!
//! Every call returns a [`TopcorrStatus`]. On failure the message is kept per
//! thread and read with [`topcorr_last_error`]. Handles are opaque and owned
//! by the caller, who releases them with the matching `_free` function.
//! Strings returned through out-parameters are released with
//! [`topcorr_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use topcorr::cover::{build_admissible_cover, decide_local_conjugacy_discrete, DiscreteVerdict};
use topcorr::equiv::{full_equivalence, verify_unitary, Equivalence};
use topcorr::error::ErrorCategory;
use topcorr::graph::TopGraph;
use topcorr::io;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopcorrStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Malformed input or an unreadable file.
    Schema = 3,
    /// Valid input on which the operation is not defined.
    Precondition = 4,
    /// A search ran out of budget.
    Budget = 5,
    Panic = 6,
}

/// A validated topological graph.
pub struct TopcorrGraph {
    inner: Arc<TopGraph>,
}

/// A unitary equivalence `X(E) → X(F)` built from a certificate.
pub struct TopcorrEquivalence {
    inner: Equivalence,
}

/// Residuals of a seeded verification run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TopcorrReport {
    pub samples: usize,
    pub seed: u64,
    pub isometry: f64,
    pub left_module: f64,
    pub right_module: f64,
    pub continuity: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(TopcorrStatus, String);

impl From<topcorr::Error> for Failure {
    fn from(e: topcorr::Error) -> Self {
        let status = match e.category() {
            ErrorCategory::Schema => TopcorrStatus::Schema,
            ErrorCategory::Precondition => TopcorrStatus::Precondition,
            ErrorCategory::Budget => TopcorrStatus::Budget,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TopcorrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            TopcorrStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            TopcorrStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(TopcorrStatus::NullArgument, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(TopcorrStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON has no interior nul").into_raw()
}

fn parse_json(s: &str) -> Result<serde_json::Value, Failure> {
    serde_json::from_str(s).map_err(|e| Failure(TopcorrStatus::Schema, format!("invalid JSON: {e}")))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn topcorr_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` is null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn topcorr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates a graph document.
///
/// # Safety
/// `json` is a nul-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn topcorr_graph_from_json(json: *const c_char, out: *mut *mut TopcorrGraph) -> TopcorrStatus {
    guard(|| {
        let doc = parse_json(text(json, "json")?)?;
        let g = io::graph_from_json(&doc)?;
        put(out, Box::into_raw(Box::new(TopcorrGraph { inner: Arc::new(g) })), "out")
    })
}

/// Reads and validates a graph file.
///
/// # Safety
/// `path` is a nul-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn topcorr_graph_read(path: *const c_char, out: *mut *mut TopcorrGraph) -> TopcorrStatus {
    guard(|| {
        let g = io::read_graph(std::path::Path::new(text(path, "path")?))?;
        put(out, Box::into_raw(Box::new(TopcorrGraph { inner: Arc::new(g) })), "out")
    })
}

/// # Safety
/// `g` is null or a handle from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn topcorr_graph_free(g: *mut TopcorrGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Canonical JSON of the graph.
///
/// # Safety
/// `g` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn topcorr_graph_to_json(g: *const TopcorrGraph, out: *mut *mut c_char) -> TopcorrStatus {
    guard(|| {
        let g = handle(g, "graph")?;
        put(out, owned_string(io::to_canonical_string(&io::graph_to_json(&g.inner))), "out")
    })
}

/// Vertex and segment counts of `E⁰` and `E¹`.
///
/// # Safety
/// `g` is a live handle; the out-pointers are writable.
#[no_mangle]
pub unsafe extern "C" fn topcorr_graph_sizes(
    g: *const TopcorrGraph,
    base_vertices: *mut usize,
    base_segments: *mut usize,
    edge_vertices: *mut usize,
    edge_segments: *mut usize,
) -> TopcorrStatus {
    guard(|| {
        let g = &handle(g, "graph")?.inner;
        put(base_vertices, g.base().vertex_count(), "base_vertices")?;
        put(base_segments, g.base().segment_count(), "base_segments")?;
        put(edge_vertices, g.edges().vertex_count(), "edge_vertices")?;
        put(edge_segments, g.edges().segment_count(), "edge_segments")
    })
}

/// `|E¹_v|` at a vertex id or `seg@t`.
///
/// # Safety
/// `g` is a live handle; `point` is a nul-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn topcorr_fiber_dimension(
    g: *const TopcorrGraph,
    point: *const c_char,
    out: *mut usize,
) -> TopcorrStatus {
    guard(|| {
        let g = &handle(g, "graph")?.inner;
        let v = io::parse_point(g.base(), text(point, "point")?)?;
        put(out, g.loops_at(&v)?.n(), "out")
    })
}

/// Decides local conjugacy of two discrete graphs. On a positive verdict the
/// certificate JSON is written to `certificate` (if non-null); otherwise it
/// receives null.
///
/// # Safety
/// `e` and `f` are live handles; `conjugate` is writable; `certificate` is
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn topcorr_decide_discrete(
    e: *const TopcorrGraph,
    f: *const TopcorrGraph,
    conjugate: *mut bool,
    certificate: *mut *mut c_char,
) -> TopcorrStatus {
    guard(|| {
        let (e, f) = (&handle(e, "e")?.inner, &handle(f, "f")?.inner);
        let (yes, cert) = match decide_local_conjugacy_discrete(e, f)? {
            DiscreteVerdict::Conjugate(c) => (true, owned_string(io::to_canonical_string(&io::certificate_to_json(&c)))),
            DiscreteVerdict::NotConjugate(_) => (false, ptr::null_mut()),
        };
        put(conjugate, yes, "conjugate")?;
        if !certificate.is_null() {
            certificate.write(cert);
        } else if !cert.is_null() {
            topcorr_string_free(cert);
        }
        Ok(())
    })
}

/// Builds the admissible cover and the unitary equivalence for a certificate.
///
/// # Safety
/// `e` and `f` are live handles; `certificate_json` is a nul-terminated
/// string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn topcorr_equivalence_new(
    e: *const TopcorrGraph,
    f: *const TopcorrGraph,
    certificate_json: *const c_char,
    out: *mut *mut TopcorrEquivalence,
) -> TopcorrStatus {
    guard(|| {
        let (e, f) = (&handle(e, "e")?.inner, &handle(f, "f")?.inner);
        let doc = parse_json(text(certificate_json, "certificate_json")?)?;
        let cert = io::certificate_from_json(&doc, e, f)?;
        let cover = build_admissible_cover(e, f, &cert)?;
        let eq = full_equivalence(e, f, &cover)?;
        put(out, Box::into_raw(Box::new(TopcorrEquivalence { inner: eq })), "out")
    })
}

/// # Safety
/// `eq` is null or a handle from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn topcorr_equivalence_free(eq: *mut TopcorrEquivalence) {
    if !eq.is_null() {
        drop(Box::from_raw(eq));
    }
}

/// Number of flip unitaries in the composition.
///
/// # Safety
/// `eq` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn topcorr_equivalence_flips(eq: *const TopcorrEquivalence, out: *mut usize) -> TopcorrStatus {
    guard(|| put(out, handle(eq, "equivalence")?.inner.unitary.flips(), "out"))
}

/// Seeded residual check of isometry, bimodule compatibility and continuity.
///
/// # Safety
/// `eq` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn topcorr_equivalence_verify(
    eq: *const TopcorrEquivalence,
    samples: usize,
    seed: u64,
    out: *mut TopcorrReport,
) -> TopcorrStatus {
    guard(|| {
        let r = verify_unitary(&handle(eq, "equivalence")?.inner.unitary, samples, seed)?;
        put(
            out,
            TopcorrReport {
                samples: r.samples,
                seed: r.seed,
                isometry: r.isometry,
                left_module: r.left_module,
                right_module: r.right_module,
                continuity: r.continuity,
            },
            "out",
        )
    })
}
