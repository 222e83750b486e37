use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use uavtrack::harness::TrackerConfig;
use uavtrack::simulator::{presets, render_sequence, Renderer, Scenario};
use uavtrack::tracker::Tracker;
use uavtrack_ffi::*;

fn last_error() -> String {
    let p = ut_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(ut_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn config_parse_accepts_good_text_and_reports_bad_text() {
    let good = CString::new("zmncc_threshold = 0.8\n").unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { ut_config_parse(good.as_ptr(), &mut cfg) }, UtStatus::Ok);
    assert!(!cfg.is_null());
    unsafe { ut_config_free(cfg) };

    let bad = CString::new("zmncc_threshold = 1.5\n").unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { ut_config_parse(bad.as_ptr(), &mut cfg) }, UtStatus::InvalidConfig);
    assert!(cfg.is_null());
    assert!(last_error().contains("zmncc_threshold"), "{}", last_error());

    let junk = CString::new("no equals sign\n").unwrap();
    assert_eq!(unsafe { ut_config_parse(junk.as_ptr(), &mut cfg) }, UtStatus::Parse);
    assert_eq!(unsafe { ut_config_parse(ptr::null(), &mut cfg) }, UtStatus::NullPointer);
    assert_eq!(unsafe { ut_config_parse(good.as_ptr(), ptr::null_mut()) }, UtStatus::NullPointer);

    // Null handles are ignored.
    unsafe {
        ut_config_free(ptr::null_mut());
        ut_tracker_free(ptr::null_mut());
    }
}

#[test]
fn roi_outside_the_frame_is_out_of_bounds() {
    let pixels = vec![100u8; 64 * 48];
    let mut t = ptr::null_mut();
    let s = unsafe { ut_tracker_new(ptr::null(), pixels.as_ptr(), 64, 48, 60, 40, 10, 10, &mut t) };
    assert_eq!(s, UtStatus::OutOfBounds);
    assert!(t.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn flat_roi_is_rejected() {
    let pixels = vec![100u8; 64 * 48];
    let mut t = ptr::null_mut();
    let s = unsafe { ut_tracker_new(ptr::null(), pixels.as_ptr(), 64, 48, 10, 10, 12, 12, &mut t) };
    assert_eq!(s, UtStatus::NonDiscriminativeTemplate);
}

#[test]
fn tracker_matches_the_native_pipeline() {
    let scenario = Scenario { frames: 40, ..presets::benign() };
    let (frames, _) = render_sequence(&scenario).unwrap();
    let roi = Renderer::new(&scenario).unwrap().initial_roi((0.0, 0.0));
    let (w, h) = (frames[0].width(), frames[0].height());

    let cfg = ut_config_default();
    let first = frames[0].to_u8();
    let mut t = ptr::null_mut();
    let s = unsafe {
        ut_tracker_new(cfg, first.as_ptr(), w, h, roi.x, roi.y, roi.width, roi.height, &mut t)
    };
    assert_eq!(s, UtStatus::Ok, "{}", last_error());
    unsafe { ut_config_free(cfg) };

    let mut native = Tracker::new(&frames[0], roi, &TrackerConfig::default(), false).unwrap();
    let mut detected = 0;
    for f in &frames {
        let px = f.to_u8();
        let mut r = UtFrameResult::default();
        assert_eq!(unsafe { ut_tracker_process(t, px.as_ptr(), w, h, f.timestamp, &mut r) }, UtStatus::Ok);
        let n = native.process(f).unwrap();
        assert_eq!(r.frame_index, n.frame_index);
        assert_eq!(r.templates_evaluated as usize, n.templates_evaluated);
        assert_eq!((r.win_x0, r.win_y0), (n.window.rect.x, n.window.rect.y));
        assert_eq!((r.pan_counts, r.tilt_counts), n.counts);
        match n.detection {
            Some(d) => {
                detected += 1;
                assert_eq!(r.detected, 1);
                assert_eq!((r.x, r.y, r.score), (d.position.0, d.position.1, d.score));
                assert_eq!(r.template_index, d.template_index as i32);
            }
            None => {
                assert_eq!(r.detected, 0);
                assert_eq!(r.template_index, -1);
            }
        }
    }
    assert!(detected >= 38);

    // Time must move forward.
    let px = frames[0].to_u8();
    let mut r = UtFrameResult::default();
    let s = unsafe { ut_tracker_process(t, px.as_ptr(), w, h, frames[39].timestamp, &mut r) };
    assert_eq!(s, UtStatus::InvalidTimestep);

    let s = unsafe { ut_tracker_process(t, px.as_ptr(), w + 1, h, 100.0, &mut r) };
    assert_eq!(s, UtStatus::DimensionMismatch);
    let s = unsafe { ut_tracker_process(t, ptr::null(), w, h, 100.0, &mut r) };
    assert_eq!(s, UtStatus::NullPointer);
    let s = unsafe { ut_tracker_process(ptr::null_mut(), px.as_ptr(), w, h, 100.0, &mut r) };
    assert_eq!(s, UtStatus::NullPointer);
    unsafe { ut_tracker_free(t) };
}

#[test]
fn zmncc_of_a_region_with_itself_is_one() {
    let (iw, ih) = (9usize, 7usize);
    let image: Vec<f64> = (0..iw * ih).map(|i| ((i * 37) % 251) as f64).collect();
    let (tw, th, u, v) = (4usize, 3usize, 2usize, 3usize);
    let template: Vec<f64> = (0..th)
        .flat_map(|y| (0..tw).map(move |x| (x, y)))
        .map(|(x, y)| image[(v + y) * iw + u + x])
        .collect();
    let mut out = 0.0;
    let s = unsafe { ut_zmncc(image.as_ptr(), iw, ih, template.as_ptr(), tw, th, u, v, &mut out) };
    assert_eq!(s, UtStatus::Ok);
    assert!((out - 1.0).abs() < 1e-12);

    let s = unsafe { ut_zmncc(image.as_ptr(), iw, ih, template.as_ptr(), tw, th, 7, 0, &mut out) };
    assert_eq!(s, UtStatus::OutOfBounds);

    let flat = vec![5.0; tw * th];
    let s = unsafe { ut_zmncc(image.as_ptr(), iw, ih, flat.as_ptr(), tw, th, 0, 0, &mut out) };
    assert_eq!(s, UtStatus::NonDiscriminativeTemplate);
}

#[test]
fn generated_header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/uavtrack.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["ut_tracker_new", "ut_tracker_process", "ut_zmncc", "UT_STATUS_OK", "UtFrameResult"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"uavtrack.h\"\nint main(void) { UtFrameResult r; UtTracker *t = 0; \
         return (int)ut_tracker_process(t, 0, 0, 0, 0.0, &r) == UT_STATUS_NULL_POINTER ? 0 : 1; }\n",
    )
    .unwrap();
    let Ok(o) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .output()
    else {
        eprintln!("no C compiler; header syntax not checked");
        return;
    };
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}
