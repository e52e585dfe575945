//! C ABI for the harmonic influence library.
//!
//! Handles are opaque pointers created and freed here; every fallible call
//! returns a [`HiStatus`] and stores a message retrievable through
//! [`hi_last_error_message`] on failure. Output buffers are caller
//! allocated. The generated header lives at `include/harmonic_influence.h`.

use harmonic_influence::dynamic::{apply_change, TopologyChange};
use harmonic_influence::exact::{exact_influence_all, solve_dirichlet};
use harmonic_influence::io::{load_edge_list, load_graph};
use harmonic_influence::mpa::{
    estimate, estimate_all, mpa_init, mpa_run, mpa_step, MessageState, StopReason, StoppingConfig,
};
use harmonic_influence::{Error, NodeId, WeightedFieldGraph};
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::ptr;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HiStatus {
    HiOk = 0,
    HiNullPointer = 1,
    HiInvalidArgument = 2,
    HiInvalidGraph = 3,
    HiIoError = 4,
    HiSolveError = 5,
    HiKeyMismatch = 6,
    HiBufferTooSmall = 7,
}

/// One undirected edge; node 0 is the field node.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HiEdge {
    pub u: u32,
    pub v: u32,
    pub weight: f64,
}

/// Result summary of a message-passing run.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HiRunSummary {
    pub stop_round: u64,
    /// 0 = stopped on tolerance, 1 = hit the round cap.
    pub stop_reason: i32,
    pub w_convergence_round: u64,
    pub h_convergence_round: u64,
    pub max_w_increase: f64,
}

/// Opaque graph handle.
pub struct HiGraph(WeightedFieldGraph);

/// Opaque message-state handle.
pub struct HiMessageState(MessageState);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg.into());
}

fn fail(e: &Error) -> HiStatus {
    set_error(e.to_string());
    match e {
        Error::SolveFailure(_) | Error::NotAFixedPoint(_) => HiStatus::HiSolveError,
        Error::KeyMismatch => HiStatus::HiKeyMismatch,
        Error::Io(_) | Error::File { .. } | Error::Parse { .. } | Error::EmptyGraph(_) => {
            HiStatus::HiIoError
        }
        Error::FieldAsLeader
        | Error::NonPositiveScale(_)
        | Error::UnknownNode(_)
        | Error::InvalidConfig(_) => HiStatus::HiInvalidArgument,
        _ => HiStatus::HiInvalidGraph,
    }
}

fn null_fail(what: &str) -> HiStatus {
    set_error(format!("{what} is null"));
    HiStatus::HiNullPointer
}

/// Length in bytes of the last error message on this thread.
#[no_mangle]
pub extern "C" fn hi_last_error_length() -> usize {
    LAST_ERROR.with(|slot| slot.borrow().len())
}

/// Copies the last error message (NUL terminated) into `buf`.
///
/// # Safety
/// `buf` must point to at least `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hi_last_error_message(buf: *mut c_char, len: usize) -> HiStatus {
    if buf.is_null() {
        return HiStatus::HiNullPointer;
    }
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        if msg.len() + 1 > len {
            return HiStatus::HiBufferTooSmall;
        }
        unsafe {
            ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, msg.len());
            *buf.add(msg.len()) = 0;
        }
        HiStatus::HiOk
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Builds a validated graph over nodes {0 (field), 1, ..., n}.
///
/// # Safety
/// `edges` must point to `n_edges` readable elements and `out` must be a
/// valid location for a pointer.
#[no_mangle]
pub unsafe extern "C" fn hi_graph_build(
    n: u32,
    edges: *const HiEdge,
    n_edges: usize,
    out: *mut *mut HiGraph,
) -> HiStatus {
    if out.is_null() {
        return null_fail("out");
    }
    if edges.is_null() && n_edges > 0 {
        return null_fail("edges");
    }
    let slice = if n_edges == 0 {
        &[]
    } else {
        unsafe { std::slice::from_raw_parts(edges, n_edges) }
    };
    match WeightedFieldGraph::build(n, slice.iter().map(|e| (e.u, e.v, e.weight))) {
        Ok(g) => {
            unsafe { *out = Box::into_raw(Box::new(HiGraph(g))) };
            HiStatus::HiOk
        }
        Err(e) => fail(&e),
    }
}

unsafe fn read_path<'a>(path: *const c_char) -> Result<&'a str, HiStatus> {
    if path.is_null() {
        return Err(null_fail("path"));
    }
    unsafe { CStr::from_ptr(path) }.to_str().map_err(|_| {
        set_error("path is not valid UTF-8");
        HiStatus::HiInvalidArgument
    })
}

/// Loads a SNAP-style `u v` edge list, attaching the field node to every
/// node at `field_weight`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid location.
#[no_mangle]
pub unsafe extern "C" fn hi_graph_load_edge_list(
    path: *const c_char,
    field_weight: f64,
    out: *mut *mut HiGraph,
) -> HiStatus {
    if out.is_null() {
        return null_fail("out");
    }
    let path = match unsafe { read_path(path) } {
        Ok(p) => p,
        Err(status) => return status,
    };
    match load_edge_list(path, field_weight) {
        Ok(loaded) => {
            unsafe { *out = Box::into_raw(Box::new(HiGraph(loaded.graph))) };
            HiStatus::HiOk
        }
        Err(e) => fail(&e),
    }
}

/// Loads a weighted graph file in the save format (`n` header, `i j w`).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid location.
#[no_mangle]
pub unsafe extern "C" fn hi_graph_load_file(
    path: *const c_char,
    out: *mut *mut HiGraph,
) -> HiStatus {
    if out.is_null() {
        return null_fail("out");
    }
    let path = match unsafe { read_path(path) } {
        Ok(p) => p,
        Err(status) => return status,
    };
    match load_graph(path) {
        Ok(g) => {
            unsafe { *out = Box::into_raw(Box::new(HiGraph(g))) };
            HiStatus::HiOk
        }
        Err(e) => fail(&e),
    }
}

/// Number of non-field nodes, or 0 for a null handle.
///
/// # Safety
/// `g` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn hi_graph_node_count(g: *const HiGraph) -> u32 {
    if g.is_null() {
        return 0;
    }
    unsafe { &*g }.0.n()
}

/// Number of undirected edges, field edges included.
///
/// # Safety
/// `g` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn hi_graph_edge_count(g: *const HiGraph) -> usize {
    if g.is_null() {
        return 0;
    }
    unsafe { &*g }.0.edge_count()
}

/// Frees a graph handle; null is allowed.
///
/// # Safety
/// `g` must have come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hi_graph_free(g: *mut HiGraph) {
    if !g.is_null() {
        drop(unsafe { Box::from_raw(g) });
    }
}

/// Exact influence of one leader.
///
/// # Safety
/// `g` must be a live handle, `out` a valid location.
#[no_mangle]
pub unsafe extern "C" fn hi_exact_influence(
    g: *const HiGraph,
    leader: u32,
    out: *mut f64,
) -> HiStatus {
    if g.is_null() {
        return null_fail("graph");
    }
    if out.is_null() {
        return null_fail("out");
    }
    match solve_dirichlet(&unsafe { &*g }.0, NodeId(leader)) {
        Ok(sol) => {
            unsafe { *out = sol.influence };
            HiStatus::HiOk
        }
        Err(e) => fail(&e),
    }
}

/// Exact influence of every leader, written to `out[0..n]` where index k
/// holds the influence of node k + 1.
///
/// # Safety
/// `out` must point to at least `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hi_exact_influence_all(
    g: *const HiGraph,
    out: *mut f64,
    len: usize,
) -> HiStatus {
    if g.is_null() {
        return null_fail("graph");
    }
    if out.is_null() {
        return null_fail("out");
    }
    let graph = &unsafe { &*g }.0;
    if len < graph.n() as usize {
        set_error(format!(
            "output buffer holds {len} values, need {}",
            graph.n()
        ));
        return HiStatus::HiBufferTooSmall;
    }
    match exact_influence_all(graph) {
        Ok(profile) => {
            unsafe {
                ptr::copy_nonoverlapping(profile.values().as_ptr(), out, profile.values().len())
            };
            HiStatus::HiOk
        }
        Err(e) => fail(&e),
    }
}

/// Fresh message state with the standard initialization.
///
/// # Safety
/// `g` must be a live handle, `out` a valid location.
#[no_mangle]
pub unsafe extern "C" fn hi_mpa_init(g: *const HiGraph, out: *mut *mut HiMessageState) -> HiStatus {
    if g.is_null() {
        return null_fail("graph");
    }
    if out.is_null() {
        return null_fail("out");
    }
    let state = mpa_init(&unsafe { &*g }.0);
    unsafe { *out = Box::into_raw(Box::new(HiMessageState(state))) };
    HiStatus::HiOk
}

/// Advances the state by one synchronous round, in place.
///
/// # Safety
/// Both handles must be live and belong together.
#[no_mangle]
pub unsafe extern "C" fn hi_mpa_step(g: *const HiGraph, s: *mut HiMessageState) -> HiStatus {
    if g.is_null() {
        return null_fail("graph");
    }
    if s.is_null() {
        return null_fail("state");
    }
    let state = unsafe { &mut *s };
    match mpa_step(&unsafe { &*g }.0, &state.0) {
        Ok(next) => {
            state.0 = next;
            HiStatus::HiOk
        }
        Err(e) => fail(&e),
    }
}

/// Runs until both stopping criteria hold or `max_rounds` rounds passed,
/// updating the state in place and filling `summary` when non-null.
///
/// # Safety
/// `g` and `s` must be live handles; `summary` may be null.
#[no_mangle]
pub unsafe extern "C" fn hi_mpa_run(
    g: *const HiGraph,
    s: *mut HiMessageState,
    eps_w: f64,
    eps_h: f64,
    max_rounds: u64,
    summary: *mut HiRunSummary,
) -> HiStatus {
    if g.is_null() {
        return null_fail("graph");
    }
    if s.is_null() {
        return null_fail("state");
    }
    let cfg = StoppingConfig {
        eps_w,
        eps_h,
        max_rounds,
    };
    let state = unsafe { &mut *s };
    match mpa_run(&unsafe { &*g }.0, state.0.clone(), &cfg) {
        Ok((final_state, trace)) => {
            state.0 = final_state;
            if !summary.is_null() {
                unsafe {
                    *summary = HiRunSummary {
                        stop_round: trace.stop_round,
                        stop_reason: match trace.stop_reason {
                            StopReason::Tolerance => 0,
                            StopReason::MaxRounds => 1,
                        },
                        w_convergence_round: trace.w_convergence_round,
                        h_convergence_round: trace.h_convergence_round,
                        max_w_increase: trace.max_w_increase,
                    };
                }
            }
            HiStatus::HiOk
        }
        Err(e) => fail(&e),
    }
}

/// Round counter of a state, or 0 for a null handle.
///
/// # Safety
/// `s` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hi_state_round(s: *const HiMessageState) -> u64 {
    if s.is_null() {
        return 0;
    }
    unsafe { &*s }.0.t()
}

/// Influence estimate of one leader on the current messages.
///
/// # Safety
/// Handles must be live; `out` must be a valid location.
#[no_mangle]
pub unsafe extern "C" fn hi_estimate(
    g: *const HiGraph,
    s: *const HiMessageState,
    leader: u32,
    out: *mut f64,
) -> HiStatus {
    if g.is_null() {
        return null_fail("graph");
    }
    if s.is_null() {
        return null_fail("state");
    }
    if out.is_null() {
        return null_fail("out");
    }
    match estimate(&unsafe { &*g }.0, &unsafe { &*s }.0, NodeId(leader)) {
        Ok(v) => {
            unsafe { *out = v };
            HiStatus::HiOk
        }
        Err(e) => fail(&e),
    }
}

/// Influence estimates of all leaders, written as in
/// [`hi_exact_influence_all`].
///
/// # Safety
/// `out` must point to at least `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hi_estimate_all(
    g: *const HiGraph,
    s: *const HiMessageState,
    out: *mut f64,
    len: usize,
) -> HiStatus {
    if g.is_null() {
        return null_fail("graph");
    }
    if s.is_null() {
        return null_fail("state");
    }
    if out.is_null() {
        return null_fail("out");
    }
    let graph = &unsafe { &*g }.0;
    if len < graph.n() as usize {
        set_error(format!(
            "output buffer holds {len} values, need {}",
            graph.n()
        ));
        return HiStatus::HiBufferTooSmall;
    }
    match estimate_all(graph, &unsafe { &*s }.0) {
        Ok(profile) => {
            unsafe {
                ptr::copy_nonoverlapping(profile.values().as_ptr(), out, profile.values().len())
            };
            HiStatus::HiOk
        }
        Err(e) => fail(&e),
    }
}

/// Rekeys a state onto a new graph: surviving edges keep their messages,
/// removed edges are dropped, new edges start from (1, 1) with null field
/// messages. Writes a fresh handle to `out`.
///
/// # Safety
/// All handles must be live; `out` must be a valid location.
#[no_mangle]
pub unsafe extern "C" fn hi_apply_change(
    old_graph: *const HiGraph,
    s: *const HiMessageState,
    new_graph: *const HiGraph,
    out: *mut *mut HiMessageState,
) -> HiStatus {
    if old_graph.is_null() || new_graph.is_null() {
        return null_fail("graph");
    }
    if s.is_null() {
        return null_fail("state");
    }
    if out.is_null() {
        return null_fail("out");
    }
    let old_g = &unsafe { &*old_graph }.0;
    let new_g = &unsafe { &*new_graph }.0;
    let state = &unsafe { &*s }.0;
    let chg = TopologyChange::between(old_g, new_g.clone(), state.t());
    match apply_change(old_g, state, &chg) {
        Ok(next) => {
            unsafe { *out = Box::into_raw(Box::new(HiMessageState(next))) };
            HiStatus::HiOk
        }
        Err(e) => fail(&e),
    }
}

/// Frees a state handle; null is allowed.
///
/// # Safety
/// `s` must have come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hi_state_free(s: *mut HiMessageState) {
    if !s.is_null() {
        drop(unsafe { Box::from_raw(s) });
    }
}
