// Temporary: measure affine Dist-1 conditioning.
#[test]
#[ignore]
fn affine_dist_error() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut worst_slope_route: f64 = 0.0;
    for _ in 0..10_000 {
        let a = 0.2 + rng.gen::<f64>() * 3.0;
        let b = rng.gen::<f64>() * 2.0 - 1.0;
        let f = |x: f64| a * x + b;
        let c = rng.gen::<f64>();
        let span = 0.05 + 0.25 * rng.gen::<f64>();
        let mut xs: Vec<f64> = (0..4).map(|_| c + span * (rng.gen::<f64>() - 0.5)).collect();
        xs.sort_by(f64::total_cmp);
        let (x1, x2, x3, x4) = (xs[0], xs[2], xs[1], xs[3]);
        // raw cross-ratio route
        let cr = |p: f64, q: f64, r: f64, s: f64| ((p - q) * (r - s)) / ((q - r) * (s - p));
        let dist = cr(f(x1), f(x2), f(x3), f(x4)) / cr(x1, x2, x3, x4);
        worst = worst.max((dist - 1.0).abs());
        // slope-product route
        let s12 = (f(x1) - f(x2)) / (x1 - x2);
        let s34 = (f(x3) - f(x4)) / (x3 - x4);
        let s23 = (f(x2) - f(x3)) / (x2 - x3);
        let s41 = (f(x4) - f(x1)) / (x4 - x1);
        let dist2 = (s12 * s34) / (s23 * s41);
        worst_slope_route = worst_slope_route.max((dist2 - 1.0).abs());
    }
    eprintln!("raw-Cr route worst |Dist-1| = {worst:.3e} ({:.1} ulps)", worst / 2.2e-16);
    eprintln!("slope route worst |Dist-1| = {worst_slope_route:.3e} ({:.1} ulps)", worst_slope_route / 2.2e-16);
}
