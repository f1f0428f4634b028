use std::ffi::{c_char, CStr};
use std::ptr;

use torsmink_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; tm_last_error_length() + 1];
    let n = unsafe { tm_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n >= 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn axes() -> *mut TmMeasure {
    let angles = [0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI, 1.5 * std::f64::consts::PI];
    let weights = [1.0; 4];
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { tm_measure_new(angles.as_ptr(), weights.as_ptr(), 4, &mut m) }, TmStatus::Ok);
    m
}

#[test]
fn square_round_trip_through_handles() {
    let xy = [-1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0, 1.0];
    let mut sq = ptr::null_mut();
    unsafe {
        assert_eq!(tm_polygon_new(xy.as_ptr(), 4, &mut sq), TmStatus::Ok);
        assert_eq!(tm_polygon_vertex_count(sq), 4);
        let mut out = [0.0; 8];
        assert_eq!(tm_polygon_vertices(sq, out.as_mut_ptr(), 8), TmStatus::Ok);
        assert_eq!(tm_polygon_vertices(sq, out.as_mut_ptr(), 7), TmStatus::BufferTooSmall);
        let mut t = 0.0;
        assert_eq!(tm_rigidity(sq, 0.05, &mut t), TmStatus::Ok);
        assert!((t / 2.2492322434638026 - 1.0).abs() < 5e-3, "T = {t}");
        let mut mu = [0.0; 4];
        assert_eq!(tm_facet_measures(sq, 0.05, mu.as_mut_ptr(), 4), TmStatus::Ok);
        // Unit supports: Σ μ_i = 4T.
        assert!((mu.iter().sum::<f64>() / (4.0 * t) - 1.0).abs() < 1e-2);
        let mut d = 1.0;
        assert_eq!(tm_hausdorff(sq, sq, &mut d), TmStatus::Ok);
        assert_eq!(d, 0.0);
        tm_polygon_free(sq);
    }
}

#[test]
fn wulff_and_solve() {
    let m = axes();
    unsafe {
        assert_eq!(tm_measure_len(m), 4);
        let y = [1.0, 2.0, 1.0, 2.0];
        let mut rect = ptr::null_mut();
        assert_eq!(tm_wulff_shape(m, y.as_ptr(), 4, &mut rect), TmStatus::Ok);
        assert_eq!(tm_polygon_vertex_count(rect), 4);
        assert_eq!(tm_wulff_shape(m, y.as_ptr(), 3, &mut rect), TmStatus::InvalidInput);

        let mut report = ptr::null_mut();
        assert_eq!(tm_solve(m, 2.0, 0, ptr::null(), &mut report), TmStatus::Ok);
        assert!(tm_report_residual(report) < 1e-2);
        let mut body = ptr::null_mut();
        assert_eq!(tm_report_solution(report, 1, &mut body), TmStatus::Ok);
        let mut xy = [0.0; 8];
        assert_eq!(tm_polygon_vertices(body, xy.as_mut_ptr(), 8), TmStatus::Ok);
        assert!(xy.iter().all(|v| (v.abs() - 0.66683).abs() < 7e-3), "{xy:?}");

        let mut json = ptr::null_mut();
        assert_eq!(tm_report_to_json(report, &mut json), TmStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap();
        assert!(text.contains("\"normalized_solution\""));
        tm_string_free(json);
        tm_polygon_free(body);
        tm_polygon_free(rect);
        tm_report_free(report);
        tm_measure_free(m);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let m = axes();
    unsafe {
        let mut report = ptr::null_mut();
        assert_eq!(tm_solve(m, 4.0, 0, ptr::null(), &mut report), TmStatus::PCritical);
        assert!(report.is_null());
        assert!(last_error().contains("p equals n+2"));

        let angles = [0.0, 0.5, 1.0];
        let weights = [1.0; 3];
        let mut bad = ptr::null_mut();
        assert_eq!(tm_measure_new(angles.as_ptr(), weights.as_ptr(), 3, &mut bad), TmStatus::HemisphereViolation);
        assert_eq!(tm_measure_new(ptr::null(), weights.as_ptr(), 3, &mut bad), TmStatus::NullPointer);
        assert!(last_error().contains("null"));

        let mut opts = tm_solve_options_default();
        assert_eq!(opts.max_iters, 500);
        opts.mesh_h = -1.0;
        assert_eq!(tm_solve(m, 2.0, 1, &opts, &mut report), TmStatus::InvalidInput);

        // Too short a buffer is refused, not truncated.
        let mut tiny = [0 as c_char; 2];
        assert_eq!(tm_last_error_message(tiny.as_mut_ptr(), 2), -1);

        tm_measure_free(m);
        tm_measure_free(ptr::null_mut());
        tm_polygon_free(ptr::null_mut());
        tm_report_free(ptr::null_mut());
        tm_string_free(ptr::null_mut());
    }
}
