//! C ABI for torsmink.
//!
//! Objects cross the boundary as opaque handles created by `tm_*_new` or a
//! solver call and released by the matching `tm_*_free`. Every fallible
//! function returns a [`TmStatus`]; on failure the message is kept per thread
//! and read with [`tm_last_error_message`]. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use torsmink::geometry::{hausdorff_distance, wulff_shape, ConvexPolygon, DiscreteMeasure, SupportVector, Vec2};
use torsmink::solver::{solve_normalized, solve_original, SolveConfig, SolveReport};
use torsmink::torsion::{torsion_data, DEFAULT_MESH_H};
use torsmink::Error;

/// Result of every fallible call. `TM_STATUS_OK` is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    HemisphereViolation = 3,
    EmptyInterior = 4,
    Unbounded = 5,
    DegenerateGeometry = 6,
    SolverDiverged = 7,
    IdentityMismatch = 8,
    PCritical = 9,
    MaxItersExceeded = 10,
    MissingFacet = 11,
    OriginOnBoundary = 12,
    BufferTooSmall = 13,
    Panic = 14,
}

impl From<&Error> for TmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::HemisphereViolation { .. } => TmStatus::HemisphereViolation,
            Error::EmptyInterior => TmStatus::EmptyInterior,
            Error::Unbounded => TmStatus::Unbounded,
            Error::DegenerateGeometry(_) => TmStatus::DegenerateGeometry,
            Error::SolverDiverged { .. } => TmStatus::SolverDiverged,
            Error::IdentityMismatch { .. } => TmStatus::IdentityMismatch,
            Error::PCritical => TmStatus::PCritical,
            Error::MaxItersExceeded { .. } => TmStatus::MaxItersExceeded,
            Error::MissingFacet { .. } => TmStatus::MissingFacet,
            Error::OriginOnBoundary { .. } => TmStatus::OriginOnBoundary,
            _ => TmStatus::InvalidInput,
        }
    }
}

/// A discrete measure on the unit circle.
pub struct TmMeasure(DiscreteMeasure);

/// A convex polygon.
pub struct TmPolygon(ConvexPolygon);

/// The outcome of a solve.
pub struct TmSolveReport(SolveReport);

/// Solver settings; start from [`tm_solve_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TmSolveOptions {
    pub mesh_h: f64,
    pub tol_residual: f64,
    pub max_iters: usize,
    pub seed: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: TmStatus, msg: &str) -> TmStatus {
    set_last_error(msg);
    status
}

fn fail_with(e: &Error) -> TmStatus {
    fail(TmStatus::from(e), &e.to_string())
}

/// Runs `f`, turning a panic into `TM_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> TmStatus) -> TmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(TmStatus::Panic, &format!("internal panic: {msg}"))
        }
    }
}

/// # Safety
/// `data` must be null or point to `len` readable values.
unsafe fn input<'a, T>(data: *const T, len: usize) -> Option<&'a [T]> {
    if len == 0 {
        Some(&[])
    } else if data.is_null() {
        None
    } else {
        Some(slice::from_raw_parts(data, len))
    }
}

fn give<T>(out: *mut *mut T, value: T) -> TmStatus {
    // SAFETY: callers check `out` for null before computing `value`.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    TmStatus::Ok
}

/// Length in bytes of the calling thread's last error message, without the
/// terminating NUL; zero when there is none.
#[no_mangle]
pub extern "C" fn tm_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |c| c.as_bytes().len()))
}

/// Copies the last error message, NUL-terminated, into `buf`.
///
/// Returns the number of bytes written excluding the NUL, or -1 when `buf`
/// is null or shorter than `tm_last_error_length() + 1`.
///
/// # Safety
/// `buf` must be valid for `len` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn tm_last_error_message(buf: *mut c_char, len: usize) -> c_int {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&[][..], |c| c.as_bytes());
        if buf.is_null() || len < bytes.len() + 1 {
            return -1;
        }
        ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, bytes.len());
        *buf.add(bytes.len()) = 0;
        bytes.len() as c_int
    })
}

/// Builds a measure from atom angles (radians) and positive weights.
///
/// # Safety
/// `angles` and `weights` must each hold `count` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tm_measure_new(
    angles: *const f64,
    weights: *const f64,
    count: usize,
    out: *mut *mut TmMeasure,
) -> TmStatus {
    guard(|| {
        let (Some(a), Some(w)) = (input(angles, count), input(weights, count)) else {
            return fail(TmStatus::NullPointer, "angles or weights is null");
        };
        if out.is_null() {
            return fail(TmStatus::NullPointer, "out is null");
        }
        match DiscreteMeasure::from_angles(a, w) {
            Ok(m) => give(out, TmMeasure(m)),
            Err(e) => fail_with(&e),
        }
    })
}

/// Number of atoms after near-duplicate normals were merged.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tm_measure_len(m: *const TmMeasure) -> usize {
    m.as_ref().map_or(0, |m| m.0.len())
}

/// # Safety
/// `m` must be null or a handle from `tm_measure_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tm_measure_free(m: *mut TmMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Builds a convex polygon from `count` vertices stored as `x0, y0, x1, y1, …`.
///
/// # Safety
/// `xy` must hold `2 * count` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tm_polygon_new(xy: *const f64, count: usize, out: *mut *mut TmPolygon) -> TmStatus {
    guard(|| {
        let Some(xy) = input(xy, 2 * count) else {
            return fail(TmStatus::NullPointer, "xy is null");
        };
        if out.is_null() {
            return fail(TmStatus::NullPointer, "out is null");
        }
        let points: Vec<Vec2> = xy.chunks_exact(2).map(|c| Vec2::new(c[0], c[1])).collect();
        match ConvexPolygon::from_vertices(&points) {
            Ok(p) => give(out, TmPolygon(p)),
            Err(e) => fail_with(&e),
        }
    })
}

/// Number of vertices, in counter-clockwise order.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tm_polygon_vertex_count(p: *const TmPolygon) -> usize {
    p.as_ref().map_or(0, |p| p.0.len())
}

/// Writes the vertices as `x0, y0, …` into `xy`, which holds `capacity` values.
///
/// # Safety
/// `p` must be a live handle and `xy` valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn tm_polygon_vertices(p: *const TmPolygon, xy: *mut f64, capacity: usize) -> TmStatus {
    guard(|| {
        let Some(p) = p.as_ref() else {
            return fail(TmStatus::NullPointer, "polygon is null");
        };
        let needed = 2 * p.0.len();
        if xy.is_null() || capacity < needed {
            return fail(TmStatus::BufferTooSmall, &format!("need room for {needed} values"));
        }
        let out = slice::from_raw_parts_mut(xy, needed);
        for (c, v) in out.chunks_exact_mut(2).zip(p.0.vertices()) {
            c[0] = v.x;
            c[1] = v.y;
        }
        TmStatus::Ok
    })
}

/// # Safety
/// `p` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tm_polygon_free(p: *mut TmPolygon) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// `∩_i {x : x·ξ_i ≤ supports_i}` over the atoms of `m`.
///
/// # Safety
/// `supports` must hold `tm_measure_len(m)` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tm_wulff_shape(
    m: *const TmMeasure,
    supports: *const f64,
    count: usize,
    out: *mut *mut TmPolygon,
) -> TmStatus {
    guard(|| {
        let (Some(m), Some(y)) = (m.as_ref(), input(supports, count)) else {
            return fail(TmStatus::NullPointer, "measure or supports is null");
        };
        if out.is_null() {
            return fail(TmStatus::NullPointer, "out is null");
        }
        if count != m.0.len() {
            return fail(TmStatus::InvalidInput, &format!("{count} supports for {} atoms", m.0.len()));
        }
        match SupportVector::new(y.to_vec()).and_then(|y| wulff_shape(m.0.normals(), &y)) {
            Ok(p) => give(out, TmPolygon(p)),
            Err(e) => fail_with(&e),
        }
    })
}

/// Torsional rigidity at element size `mesh_h`.
///
/// # Safety
/// `p` must be a live handle and `rigidity` writable.
#[no_mangle]
pub unsafe extern "C" fn tm_rigidity(p: *const TmPolygon, mesh_h: f64, rigidity: *mut f64) -> TmStatus {
    guard(|| {
        let Some(p) = p.as_ref() else {
            return fail(TmStatus::NullPointer, "polygon is null");
        };
        if rigidity.is_null() {
            return fail(TmStatus::NullPointer, "rigidity is null");
        }
        match torsion_data(&p.0, mesh_h) {
            Ok(d) => {
                *rigidity = d.rigidity;
                TmStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Per-facet torsion measures, one per vertex-ordered facet; facet `k` runs
/// from vertex `k` to vertex `k + 1`.
///
/// # Safety
/// `p` must be a live handle and `measures` valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn tm_facet_measures(p: *const TmPolygon, mesh_h: f64, measures: *mut f64, capacity: usize) -> TmStatus {
    guard(|| {
        let Some(p) = p.as_ref() else {
            return fail(TmStatus::NullPointer, "polygon is null");
        };
        if measures.is_null() || capacity < p.0.len() {
            return fail(TmStatus::BufferTooSmall, &format!("need room for {} values", p.0.len()));
        }
        match torsion_data(&p.0, mesh_h) {
            Ok(d) => {
                slice::from_raw_parts_mut(measures, d.facet_measures.len()).copy_from_slice(&d.facet_measures);
                TmStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Exact Hausdorff distance between two polygons.
///
/// # Safety
/// Both handles must be live and `distance` writable.
#[no_mangle]
pub unsafe extern "C" fn tm_hausdorff(a: *const TmPolygon, b: *const TmPolygon, distance: *mut f64) -> TmStatus {
    guard(|| {
        let (Some(a), Some(b)) = (a.as_ref(), b.as_ref()) else {
            return fail(TmStatus::NullPointer, "polygon is null");
        };
        if distance.is_null() {
            return fail(TmStatus::NullPointer, "distance is null");
        }
        *distance = hausdorff_distance(&a.0, &b.0).distance;
        TmStatus::Ok
    })
}

#[no_mangle]
pub extern "C" fn tm_solve_options_default() -> TmSolveOptions {
    let cfg = SolveConfig::new(2.0);
    TmSolveOptions {
        mesh_h: DEFAULT_MESH_H,
        tol_residual: cfg.tol_residual,
        max_iters: cfg.max_iters,
        seed: cfg.seed,
    }
}

/// Solves the original problem, or the normalized one when `normalized` is
/// nonzero. `options` may be null for the defaults.
///
/// # Safety
/// `m` must be a live handle, `options` null or readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tm_solve(
    m: *const TmMeasure,
    p: f64,
    normalized: c_int,
    options: *const TmSolveOptions,
    out: *mut *mut TmSolveReport,
) -> TmStatus {
    guard(|| {
        let Some(m) = m.as_ref() else {
            return fail(TmStatus::NullPointer, "measure is null");
        };
        if out.is_null() {
            return fail(TmStatus::NullPointer, "out is null");
        }
        let o = options.as_ref().copied().unwrap_or_else(|| tm_solve_options_default());
        let cfg = SolveConfig {
            mesh_h: o.mesh_h,
            tol_residual: o.tol_residual,
            max_iters: o.max_iters,
            seed: o.seed,
            ..SolveConfig::new(p)
        };
        let solved = if normalized != 0 { solve_normalized(&m.0, &cfg) } else { solve_original(&m.0, &cfg) };
        match solved {
            Ok(r) => give(out, TmSolveReport(r)),
            Err(e) => fail_with(&e),
        }
    })
}

/// Optimality residual of the returned solution.
///
/// # Safety
/// `r` must be null or a live handle; null gives NaN.
#[no_mangle]
pub unsafe extern "C" fn tm_report_residual(r: *const TmSolveReport) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.residual)
}

/// Rigidity of the normalized solution.
///
/// # Safety
/// `r` must be null or a live handle; null gives NaN.
#[no_mangle]
pub unsafe extern "C" fn tm_report_rigidity(r: *const TmSolveReport) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.t_value)
}

/// Descent steps taken.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tm_report_iterations(r: *const TmSolveReport) -> usize {
    r.as_ref().map_or(0, |r| r.0.iterations.len().saturating_sub(1))
}

/// A new polygon handle holding the solution: the original-problem body when
/// `original` is nonzero and it exists, otherwise the normalized body.
///
/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tm_report_solution(r: *const TmSolveReport, original: c_int, out: *mut *mut TmPolygon) -> TmStatus {
    guard(|| {
        let Some(r) = r.as_ref() else {
            return fail(TmStatus::NullPointer, "report is null");
        };
        if out.is_null() {
            return fail(TmStatus::NullPointer, "out is null");
        }
        let body = match (&r.0.original_solution, original != 0) {
            (Some(b), true) => b,
            (None, true) => return fail(TmStatus::PCritical, "report has no original-problem solution"),
            (_, false) => &r.0.normalized_solution,
        };
        give(out, TmPolygon(body.clone()))
    })
}

/// The full report as a NUL-terminated JSON string; release with [`tm_string_free`].
///
/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tm_report_to_json(r: *const TmSolveReport, out: *mut *mut c_char) -> TmStatus {
    guard(|| {
        let Some(r) = r.as_ref() else {
            return fail(TmStatus::NullPointer, "report is null");
        };
        if out.is_null() {
            return fail(TmStatus::NullPointer, "out is null");
        }
        match serde_json::to_string(&r.0) {
            Ok(s) => {
                *out = CString::new(s).expect("JSON has no NUL").into_raw();
                TmStatus::Ok
            }
            Err(e) => fail(TmStatus::InvalidInput, &e.to_string()),
        }
    })
}

/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tm_report_free(r: *mut TmSolveReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
