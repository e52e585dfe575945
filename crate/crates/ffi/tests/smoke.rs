//! Exercises the C ABI from Rust, the way a foreign caller would.

use harmonic_influence_ffi::*;
use std::ffi::CString;
use std::ptr;

fn build_path_graph() -> *mut HiGraph {
    let edges = [
        HiEdge {
            u: 0,
            v: 1,
            weight: 1.0,
        },
        HiEdge {
            u: 1,
            v: 2,
            weight: 1.0,
        },
    ];
    let mut g: *mut HiGraph = ptr::null_mut();
    let status = unsafe { hi_graph_build(2, edges.as_ptr(), edges.len(), &mut g) };
    assert_eq!(status, HiStatus::HiOk);
    assert!(!g.is_null());
    g
}

fn last_error() -> String {
    let len = hi_last_error_length() + 1;
    let mut buf = vec![0i8; len.max(1)];
    let status = unsafe { hi_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(status, HiStatus::HiOk);
    unsafe { std::ffi::CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn exact_values_through_the_abi() {
    let g = build_path_graph();
    unsafe {
        assert_eq!(hi_graph_node_count(g), 2);
        assert_eq!(hi_graph_edge_count(g), 2);
        let mut h = 0.0f64;
        assert_eq!(hi_exact_influence(g, 1, &mut h), HiStatus::HiOk);
        assert_eq!(h, 2.0);
        assert_eq!(hi_exact_influence(g, 2, &mut h), HiStatus::HiOk);
        assert_eq!(h, 1.5);
        let mut all = [0.0f64; 2];
        assert_eq!(
            hi_exact_influence_all(g, all.as_mut_ptr(), all.len()),
            HiStatus::HiOk
        );
        assert_eq!(all, [2.0, 1.5]);
        hi_graph_free(g);
    }
}

#[test]
fn message_passing_run_matches_exact_on_path() {
    let g = build_path_graph();
    unsafe {
        let mut s: *mut HiMessageState = ptr::null_mut();
        assert_eq!(hi_mpa_init(g, &mut s), HiStatus::HiOk);
        let mut summary = HiRunSummary {
            stop_round: 0,
            stop_reason: -1,
            w_convergence_round: 0,
            h_convergence_round: 0,
            max_w_increase: 0.0,
        };
        assert_eq!(
            hi_mpa_run(g, s, 1e-10, 1e-9, 200_000, &mut summary),
            HiStatus::HiOk
        );
        assert_eq!(summary.stop_round, 2);
        assert_eq!(summary.stop_reason, 0);
        assert_eq!(hi_state_round(s), 2);
        let mut est = [0.0f64; 2];
        assert_eq!(
            hi_estimate_all(g, s, est.as_mut_ptr(), est.len()),
            HiStatus::HiOk
        );
        assert_eq!(est, [2.0, 1.5]);
        let mut one = 0.0f64;
        assert_eq!(hi_estimate(g, s, 2, &mut one), HiStatus::HiOk);
        assert_eq!(one, 1.5);
        hi_state_free(s);
        hi_graph_free(g);
    }
}

#[test]
fn stepping_by_hand_reaches_the_fixed_point() {
    let g = build_path_graph();
    unsafe {
        let mut s: *mut HiMessageState = ptr::null_mut();
        assert_eq!(hi_mpa_init(g, &mut s), HiStatus::HiOk);
        assert_eq!(hi_mpa_step(g, s), HiStatus::HiOk);
        let mut est = 0.0f64;
        assert_eq!(hi_estimate(g, s, 2, &mut est), HiStatus::HiOk);
        assert_eq!(est, 1.5);
        assert_eq!(hi_state_round(s), 1);
        hi_state_free(s);
        hi_graph_free(g);
    }
}

#[test]
fn topology_change_keeps_surviving_messages() {
    let g = build_path_graph();
    let edges = [
        HiEdge {
            u: 0,
            v: 1,
            weight: 1.0,
        },
        HiEdge {
            u: 1,
            v: 2,
            weight: 1.0,
        },
        HiEdge {
            u: 0,
            v: 2,
            weight: 1.0,
        },
    ];
    unsafe {
        let mut bigger: *mut HiGraph = ptr::null_mut();
        assert_eq!(
            hi_graph_build(2, edges.as_ptr(), edges.len(), &mut bigger),
            HiStatus::HiOk
        );
        let mut s: *mut HiMessageState = ptr::null_mut();
        assert_eq!(hi_mpa_init(g, &mut s), HiStatus::HiOk);
        assert_eq!(
            hi_mpa_run(g, s, 1e-10, 1e-9, 200_000, ptr::null_mut()),
            HiStatus::HiOk
        );
        let mut carried: *mut HiMessageState = ptr::null_mut();
        assert_eq!(hi_apply_change(g, s, bigger, &mut carried), HiStatus::HiOk);
        assert_eq!(hi_state_round(carried), hi_state_round(s));
        // continuing on the new graph works
        assert_eq!(
            hi_mpa_run(bigger, carried, 1e-10, 1e-9, 200_000, ptr::null_mut()),
            HiStatus::HiOk
        );
        let mut est = [0.0f64; 2];
        assert_eq!(
            hi_estimate_all(bigger, carried, est.as_mut_ptr(), 2),
            HiStatus::HiOk
        );
        // triangle with field edges on both nodes: both leaders reach 1.5
        assert!((est[0] - 1.5).abs() < 1e-9);
        assert!((est[1] - 1.5).abs() < 1e-9);
        hi_state_free(carried);
        hi_state_free(s);
        hi_graph_free(bigger);
        hi_graph_free(g);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut g: *mut HiGraph = ptr::null_mut();
        // negative weight
        let bad = [HiEdge {
            u: 0,
            v: 1,
            weight: -1.0,
        }];
        assert_eq!(
            hi_graph_build(1, bad.as_ptr(), 1, &mut g),
            HiStatus::HiInvalidGraph
        );
        assert!(last_error().contains("non-positive weight"));

        // disconnected
        let lonely = [HiEdge {
            u: 1,
            v: 2,
            weight: 1.0,
        }];
        assert_eq!(
            hi_graph_build(2, lonely.as_ptr(), 1, &mut g),
            HiStatus::HiInvalidGraph
        );
        assert!(last_error().contains("disconnected"));

        // null pointers
        assert_eq!(
            hi_graph_build(1, ptr::null(), 1, &mut g),
            HiStatus::HiNullPointer
        );
        assert_eq!(
            hi_exact_influence(ptr::null(), 1, &mut 0.0),
            HiStatus::HiNullPointer
        );

        // field as leader
        let g = build_path_graph();
        let mut h = 0.0;
        assert_eq!(
            hi_exact_influence(g, 0, &mut h),
            HiStatus::HiInvalidArgument
        );
        assert!(last_error().contains("field"));

        // undersized buffer
        let mut small = [0.0f64; 1];
        assert_eq!(
            hi_exact_influence_all(g, small.as_mut_ptr(), 1),
            HiStatus::HiBufferTooSmall
        );

        // io error
        let missing = CString::new("definitely_missing_file.txt").unwrap();
        let mut sink: *mut HiGraph = ptr::null_mut();
        assert_eq!(
            hi_graph_load_file(missing.as_ptr(), &mut sink),
            HiStatus::HiIoError
        );
        hi_graph_free(g);
    }
}

#[test]
fn load_edge_list_through_the_abi() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("edges.txt");
    std::fs::write(&path, "# comment\n1 2\n2 3\n").unwrap();
    let c_path = CString::new(path.to_str().unwrap()).unwrap();
    unsafe {
        let mut g: *mut HiGraph = ptr::null_mut();
        assert_eq!(
            hi_graph_load_edge_list(c_path.as_ptr(), 0.040, &mut g),
            HiStatus::HiOk
        );
        assert_eq!(hi_graph_node_count(g), 3);
        assert_eq!(hi_graph_edge_count(g), 5);
        hi_graph_free(g);
    }
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { std::ffi::CStr::from_ptr(hi_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn generated_header_covers_the_surface() {
    let header = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/include/harmonic_influence.h"
    ))
    .expect("header generated at build time");
    for symbol in [
        "hi_graph_build",
        "hi_graph_load_edge_list",
        "hi_graph_free",
        "hi_exact_influence_all",
        "hi_mpa_init",
        "hi_mpa_run",
        "hi_estimate_all",
        "hi_apply_change",
        "hi_state_free",
        "hi_last_error_message",
        "typedef struct HiGraph HiGraph",
        "typedef struct HiMessageState HiMessageState",
        "HI_OK",
    ] {
        assert!(header.contains(symbol), "header is missing `{symbol}`");
    }
}
