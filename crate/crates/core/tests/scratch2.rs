// Temporary diagnostics for tune performance.
use circleconj::maps::{rotation_number_opts, CircleMap, MapError, Precision, RotationOptions};

#[test]
#[ignore]
fn trace_tune_cost() {
    let golden = 0.6180339887498949f64;
    let k = 0.5;
    let tol = 1e-10;
    let halfwidth = k / (2.0 * std::f64::consts::PI) + 1e-9;
    let mut lo = golden - halfwidth;
    let mut hi = golden + halfwidth;
    let mut probes = 0usize;
    for it in 0..250 {
        if hi - lo < (tol * 0.1_f64).max(5e-16) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let precision = if hi - lo < 1e-5 { Precision::Extended } else { Precision::Standard };
        let t0 = std::time::Instant::now();
        // replicate probe via public API (no cycle hints available publicly)
        let map = CircleMap::sine(mid, k).unwrap().with_precision(precision);
        let mut budget = 400_000u64;
        let v;
        let mut attempts = 0;
        loop {
            attempts += 1;
            match rotation_number_opts(&map, 0.0, 50, RotationOptions { max_iter: budget, resolve: tol * 0.25, min_depth: 1, exclude_target: Some(golden) }) {
                Ok(an) => { v = an.rho_est - golden; break; }
                Err(MapError::PeriodicOrbitDetected { period }) => {
                    let r = (map.lift_iterate(0.0, period)) / period as f64;
                    v = (r * period as f64).round() / period as f64 - golden;
                    break;
                }
                Err(_) => {
                    if budget >= 12_000_000 {
                        v = circleconj::maps::birkhoff_rotation_number(&map, 0.0, 200_000) - golden;
                        break;
                    }
                    budget *= 5;
                }
            }
        }
        probes += 1;
        eprintln!("it {it} width={:.2e} {:?} attempts={attempts} v={v:+.2e} took {:?}", hi - lo, precision, t0.elapsed());
        if v <= 0.0 { lo = mid } else { hi = mid }
    }
    eprintln!("total probes: {probes}");
}
