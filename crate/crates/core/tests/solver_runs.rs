use ddlab::lab::commands::compacton_deviations;
use ddlab::spectral::{richardson, run_simulation, RunConfig};

fn h2sq(lambda: f64, n: usize) -> f64 {
    h2sq_dt(lambda, n, 1e-3)
}

fn h2sq_dt(lambda: f64, n: usize, dt: f64) -> f64 {
    let cfg = RunConfig { n_modes: n, dt, ..RunConfig::new(lambda) };
    run_simulation(&cfg).unwrap().series.last().unwrap().h2dot.powi(2)
}

#[test]
fn resolved_runs_are_grid_independent() {
    let coarse = h2sq(0.2, 512);
    let fine = h2sq(0.2, 8192);
    assert!(((coarse - fine) / fine).abs() <= 5e-10, "{coarse} vs {fine}");
}

#[test]
fn full_run_conserves_mass() {
    let cfg = RunConfig { n_modes: 2048, ..RunConfig::new(1.0) };
    let res = run_simulation(&cfg).unwrap();
    let m0 = res.series.rows[0].mass;
    assert!((m0 - 0.886226925453).abs() <= 5e-12);
    assert_eq!(res.series.rows.len(), 6);
    for row in &res.series.rows {
        assert!(((row.mass - m0) / m0).abs() <= 1e-8, "t={}", row.t);
    }
    assert_eq!(res.snapshots.len(), 6);
}

#[test]
fn runs_are_reproducible() {
    let cfg = RunConfig { n_modes: 256, ..RunConfig::new(0.4) };
    let a = run_simulation(&cfg).unwrap().series.to_csv();
    let b = run_simulation(&cfg).unwrap().series.to_csv();
    assert_eq!(a, b);
}

#[test]
fn heavy_regularization_spoils_the_traveling_wave() {
    let base = RunConfig {
        n_modes: 512,
        dt: 1e-3,
        ..RunConfig::new(0.5)
    };
    let light = compacton_deviations(&RunConfig { delta: 1e-8, ..base.clone() }, 0.0).unwrap();
    let heavy = compacton_deviations(&RunConfig { delta: 1e-2, ..base }, 0.0).unwrap();
    assert!(light[0].1 <= 1e-14, "t=0 deviation {:e}", light[0].1);
    let (l, h) = (light.last().unwrap().1, heavy.last().unwrap().1);
    assert!(l <= 1e-2 && h > l, "light {l:e}, heavy {h:e}");
}

#[test]
fn small_lambda_extrapolation() {
    let coarse = h2sq_dt(0.1, 2048, 2e-3);
    let fine = h2sq_dt(0.1, 2048, 1e-3);
    let est = richardson(coarse, fine, 2, 2.0).unwrap();
    assert!((est - 15278.0).abs() <= 1e-3 * 15278.0, "{est}");
}
