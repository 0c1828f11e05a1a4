use slopelab_demo::{tate_scan_report, two_gon_report, voronoi_report};

#[test]
fn two_gon_explorer() {
    let v = two_gon_report(4, 1, "1/2", "3").unwrap();
    assert_eq!(v["invariants"]["slope"]["exact"], "24/7");
    assert_eq!(v["jump"]["exact"], "24/7");
    let curve = v["curve"].as_array().unwrap();
    assert_eq!(curve.len(), 47);
    // slope is 4 h (g-h-1) L s (1-s): symmetric in s
    for k in 0..curve.len() {
        let (a, b) = (curve[k][1].as_f64().unwrap(), curve[curve.len() - 1 - k][1].as_f64().unwrap());
        assert!((a - b).abs() < 1e-12);
    }
    let mid = curve[23][1].as_f64().unwrap();
    assert!((mid - 8.0 * 3.5 * 0.25).abs() < 1e-12);
}

#[test]
fn two_gon_unstable_has_no_jump() {
    let v = two_gon_report(3, 0, "1", "1").unwrap();
    assert!(v["jump"].is_null());
    assert_eq!(v["invariants"]["slope"]["exact"], "0");
}

#[test]
fn two_gon_rejects_bad_input() {
    assert!(two_gon_report(1, 0, "1", "1").is_err());
    assert!(two_gon_report(3, 3, "1", "1").is_err());
    assert!(two_gon_report(3, 1, "-1", "1").is_err());
    assert!(two_gon_report(3, 1, "x", "1").is_err());
}

#[test]
fn voronoi_cells() {
    let hex = voronoi_report("2", "1", "2").unwrap();
    assert_eq!(hex["vertices"].as_array().unwrap().len(), 6);
    assert_eq!(hex["moment"]["exact"], "5/18");
    assert_eq!(hex["volume"]["exact"], "1");
    let square = voronoi_report("1", "0", "1").unwrap();
    assert_eq!(square["vertices"].as_array().unwrap().len(), 4);
    assert_eq!(square["moment"]["exact"], "1/6");
    assert!(voronoi_report("1", "2", "1").is_err());
}

#[test]
fn tate_scan_converges() {
    let v = tate_scan_report(4, 20_000, 3).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    let (limit, target) = (v["limit"]["value"].as_f64().unwrap(), v["target"].as_f64().unwrap());
    assert!((limit - target).abs() < 1e-2);
    assert!(tate_scan_report(1, 20_000, 3).is_err());
}
