//! C ABI over the `markoff` crate.
//!
//! Graphs are opaque handles created by [`markoff_graph_new`] and released
//! with [`markoff_graph_free`]. Fallible calls return a [`MarkoffStatus`]
//! and write results through out-pointers; [`markoff_last_error`] gives a
//! readable description of the most recent failure on the calling thread.
//! Vertex coordinates are passed as three `uint64_t` values and reduced
//! mod p.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use markoff::field::FieldError;
use markoff::graph::{GraphError, GraphOptions};
use markoff::surface::SurfaceError;
use markoff::{chen_verdict, MarkoffTriple, Prime, VertexIndex};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkoffStatus {
    Ok = 0,
    NullPointer = 1,
    NotPrime = 2,
    NotAVertex = 3,
    /// p exceeds the dense-graph size guard.
    TooLarge = 4,
    /// The output buffer is too small; the required length was written.
    BufferTooSmall = 5,
    /// The two vertices lie in different components.
    Unreachable = 6,
    PathTooLong = 7,
    OutOfRange = 8,
    /// A Rust panic was caught at the boundary.
    Panic = 9,
}

/// Opaque graph handle.
pub struct MarkoffGraph {
    inner: markoff::MarkoffGraph,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(MarkoffStatus, String);

impl Failure {
    fn new(status: MarkoffStatus, message: impl ToString) -> Self {
        Failure(status, message.to_string())
    }
}

impl From<SurfaceError> for Failure {
    fn from(e: SurfaceError) -> Self {
        let status = match &e {
            SurfaceError::NotAVertex { .. } | SurfaceError::InvalidVertex { .. } => {
                MarkoffStatus::NotAVertex
            }
            SurfaceError::TooLarge { .. } => MarkoffStatus::TooLarge,
            SurfaceError::Field(FieldError::NotPrime(_)) => MarkoffStatus::NotPrime,
            _ => MarkoffStatus::OutOfRange,
        };
        Failure::new(status, e)
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Surface(s) => s.into(),
            GraphError::PathTooLong { .. } => Failure::new(MarkoffStatus::PathTooLong, e),
            GraphError::Penner(_) => Failure::new(MarkoffStatus::OutOfRange, e),
        }
    }
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
}

/// Runs `f`, recording failures and turning panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MarkoffStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            MarkoffStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal error: {message}"));
            MarkoffStatus::Panic
        }
    }
}

fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    // SAFETY: callers pass either NULL or a valid, writable pointer.
    unsafe { p.as_mut() }
        .ok_or_else(|| Failure::new(MarkoffStatus::NullPointer, "null output pointer"))
}

fn graph_ref<'a>(g: *const MarkoffGraph) -> Result<&'a markoff::MarkoffGraph, Failure> {
    // SAFETY: callers pass either NULL or a live handle from markoff_graph_new.
    unsafe { g.as_ref() }
        .map(|g| &g.inner)
        .ok_or_else(|| Failure::new(MarkoffStatus::NullPointer, "null graph handle"))
}

fn read_triple(coords: *const u64) -> Result<[u64; 3], Failure> {
    if coords.is_null() {
        return Err(Failure::new(
            MarkoffStatus::NullPointer,
            "null coordinate pointer",
        ));
    }
    // SAFETY: the caller provides three readable values.
    Ok(unsafe { [*coords, *coords.add(1), *coords.add(2)] })
}

fn vertex(g: &markoff::MarkoffGraph, coords: *const u64) -> Result<VertexIndex, Failure> {
    let x = MarkoffTriple::new(g.prime(), read_triple(coords)?)?;
    Ok(x.encode()?)
}

fn prime(p: u64) -> Result<Prime, Failure> {
    Prime::new(p).map_err(|e| Failure::new(MarkoffStatus::NotPrime, e))
}

fn copy_out<T: Copy>(
    items: &[T],
    buf: *mut T,
    cap: usize,
    written: *mut usize,
) -> Result<(), Failure> {
    let written = out_ref(written)?;
    *written = items.len();
    if items.len() > cap {
        return Err(Failure::new(
            MarkoffStatus::BufferTooSmall,
            format!("buffer holds {cap}, need {}", items.len()),
        ));
    }
    if !items.is_empty() {
        if buf.is_null() {
            return Err(Failure::new(
                MarkoffStatus::NullPointer,
                "null output buffer",
            ));
        }
        // SAFETY: buf has room for cap >= items.len() elements.
        unsafe { ptr::copy_nonoverlapping(items.as_ptr(), buf, items.len()) };
    }
    Ok(())
}

/// Deterministic primality test for any 64-bit value.
#[no_mangle]
pub extern "C" fn markoff_is_prime(n: u64) -> bool {
    markoff::is_prime(n)
}

/// Whether the prime `p` divides `size`.
///
/// # Safety
/// `out` must be NULL or point to writable storage for a `bool`.
#[no_mangle]
pub unsafe extern "C" fn markoff_chen_verdict(size: u64, p: u64, out: *mut bool) -> MarkoffStatus {
    guard(|| {
        let p = prime(p)?;
        *out_ref(out)? = chen_verdict(size, p);
        Ok(())
    })
}

/// Builds the Markoff graph mod `p`. With `penner_checks`, the Penner
/// identities are evaluated as well (p > 3 only).
///
/// # Safety
/// `out` must be NULL or point to writable storage for a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn markoff_graph_new(
    p: u64,
    penner_checks: bool,
    out: *mut *mut MarkoffGraph,
) -> MarkoffStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        let inner = markoff::MarkoffGraph::build_with(prime(p)?, GraphOptions { penner_checks })?;
        *out = Box::into_raw(Box::new(MarkoffGraph { inner }));
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `graph` must be NULL or a handle from [`markoff_graph_new`] that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn markoff_graph_free(graph: *mut MarkoffGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// The prime, or 0 for a NULL handle.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn markoff_graph_prime(graph: *const MarkoffGraph) -> u64 {
    graph_ref(graph).map_or(0, |g| g.prime().get())
}

/// Number of vertices, or 0 for a NULL handle.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn markoff_graph_vertex_count(graph: *const MarkoffGraph) -> u64 {
    graph_ref(graph).map_or(0, |g| g.vertex_count() as u64)
}

/// Number of connected components, or 0 for a NULL handle.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn markoff_graph_component_count(graph: *const MarkoffGraph) -> u64 {
    graph_ref(graph).map_or(0, |g| g.components().len() as u64)
}

/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn markoff_graph_is_connected(graph: *const MarkoffGraph) -> bool {
    graph_ref(graph).is_ok_and(|g| g.is_connected())
}

/// Every component size is divisible by p.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn markoff_graph_chen_ok_all(graph: *const MarkoffGraph) -> bool {
    graph_ref(graph).is_ok_and(|g| g.chen_ok_all())
}

/// Writes 1 if every Penner identity held, 0 if one failed, and -1 when
/// they were not evaluated.
///
/// # Safety
/// `graph` must be NULL or a live handle; `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn markoff_graph_penner_ok(
    graph: *const MarkoffGraph,
    out: *mut i32,
) -> MarkoffStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        *out_ref(out)? = g.penner_report().map_or(-1, |r| r.all_ok() as i32);
        Ok(())
    })
}

/// Component sizes, largest first. `*written` receives the number of
/// components even when the buffer is too small.
///
/// # Safety
/// `buf` must have room for `cap` values; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn markoff_graph_component_sizes(
    graph: *const MarkoffGraph,
    buf: *mut u64,
    cap: usize,
    written: *mut usize,
) -> MarkoffStatus {
    guard(|| copy_out(&graph_ref(graph)?.component_sizes(), buf, cap, written))
}

/// Coordinates of the vertex at dense position `index` (ascending code
/// order), written to `out[0..3]`.
///
/// # Safety
/// `out` must have room for three values.
#[no_mangle]
pub unsafe extern "C" fn markoff_graph_vertex_at(
    graph: *const MarkoffGraph,
    index: u64,
    out: *mut u64,
) -> MarkoffStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        if index >= g.vertex_count() as u64 {
            return Err(Failure::new(
                MarkoffStatus::OutOfRange,
                format!(
                    "index {index} out of range for {} vertices",
                    g.vertex_count()
                ),
            ));
        }
        if out.is_null() {
            return Err(Failure::new(
                MarkoffStatus::NullPointer,
                "null output pointer",
            ));
        }
        let x = g.vertices().triple(index as u32).residues();
        ptr::copy_nonoverlapping(x.as_ptr(), out, 3);
        Ok(())
    })
}

/// Index of the component containing `coords`; components are numbered by
/// their smallest vertex code.
///
/// # Safety
/// `coords` must point to three values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn markoff_graph_component_of(
    graph: *const MarkoffGraph,
    coords: *const u64,
    out: *mut u64,
) -> MarkoffStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        let v = vertex(g, coords)?;
        *out_ref(out)? = g.component_of(v)? as u64;
        Ok(())
    })
}

/// A shortest move sequence (moves numbered 1 to 3) from `from` to `to`,
/// lexicographically smallest among shortest ones. Returns
/// `MARKOFF_STATUS_UNREACHABLE` across components.
///
/// # Safety
/// `from` and `to` must point to three values each; `moves` must have room
/// for `cap` bytes; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn markoff_graph_path(
    graph: *const MarkoffGraph,
    from: *const u64,
    to: *const u64,
    moves: *mut u8,
    cap: usize,
    written: *mut usize,
) -> MarkoffStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        let (a, b) = (vertex(g, from)?, vertex(g, to)?);
        let Some(path) = g.bfs_path(a, b)? else {
            *out_ref(written)? = 0;
            return Err(Failure::new(
                MarkoffStatus::Unreachable,
                "vertices lie in different components",
            ));
        };
        let numbers: Vec<u8> = path.moves().iter().map(|m| m.number()).collect();
        copy_out(&numbers, moves, cap, written)
    })
}

/// Lifts `coords` to an integer Markoff triple by replaying a path from
/// (1, 1, 1). On success `*out` receives a string `"a1,a2,a3"` in decimal,
/// to be released with [`markoff_string_free`].
///
/// # Safety
/// `coords` must point to three values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn markoff_graph_lift(
    graph: *const MarkoffGraph,
    coords: *const u64,
    max_moves: usize,
    out: *mut *mut c_char,
) -> MarkoffStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        let g = graph_ref(graph)?;
        let v = vertex(g, coords)?;
        let Some(lift) = g.lift_to_integers(v, max_moves)? else {
            return Err(Failure::new(
                MarkoffStatus::Unreachable,
                "vertex is not connected to (1, 1, 1)",
            ));
        };
        let [a, b, c] = lift.triple.coords();
        *out = CString::new(format!("{a},{b},{c}"))
            .expect("digits only")
            .into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn markoff_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn markoff_status_message(status: MarkoffStatus) -> *const c_char {
    let text: &'static CStr = match status {
        MarkoffStatus::Ok => c"ok",
        MarkoffStatus::NullPointer => c"null pointer argument",
        MarkoffStatus::NotPrime => c"modulus is not prime",
        MarkoffStatus::NotAVertex => c"triple is not a vertex",
        MarkoffStatus::TooLarge => c"prime exceeds the graph size guard",
        MarkoffStatus::BufferTooSmall => c"output buffer too small",
        MarkoffStatus::Unreachable => c"vertices are in different components",
        MarkoffStatus::PathTooLong => c"path exceeds the move limit",
        MarkoffStatus::OutOfRange => c"argument out of range",
        MarkoffStatus::Panic => c"internal error",
    };
    text.as_ptr()
}

/// Description of the last failure on this thread, or "" after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn markoff_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}
