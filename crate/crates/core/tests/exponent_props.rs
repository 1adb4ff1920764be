use hecke_lab::config::RunConfig;
use hecke_lab::exponent::{self, CoverageExperiment};
use proptest::prelude::*;

fn fit_json(cfg: &RunConfig) -> String {
    let x0 = cfg.x0.resolve(cfg.n).unwrap();
    let mut exp = CoverageExperiment::new(x0, cfg.n, cfg.p, cfg.sampler(), cfg.limits(), cfg.k_max).unwrap();
    let grid = exponent::sweep(&mut exp, &cfg.epsilons, cfg.target).unwrap();
    serde_json::to_string(&exponent::fit_kappa(cfg.n, cfg.p, &cfg.x0.to_string(), grid).unwrap()).unwrap()
}

#[test]
fn fits_are_reproducible() {
    let mut cfg = RunConfig::preset("kappa-n2-p3").unwrap();
    cfg.samples = 400;
    cfg.epsilons.truncate(3);
    assert_eq!(fit_json(&cfg), fit_json(&cfg));
}

#[test]
fn small_n2_grid_is_near_one() {
    let mut cfg = RunConfig::preset("kappa-n2-p3").unwrap();
    cfg.samples = 500;
    let fit: serde_json::Value = serde_json::from_str(&fit_json(&cfg)).unwrap();
    let kappa = fit["kappa_hat"].as_f64().unwrap();
    assert!((0.75..=1.3).contains(&kappa), "kappa_hat = {kappa}");
}

proptest! {
    #[test]
    fn rescaling_epsilon_keeps_the_slope(scale in 0.01..100.0f64, c in 0.5..3.0f64) {
        let eps: Vec<f64> = (1..=8).map(|j| 2f64.powi(-j)).collect();
        let scaled: Vec<f64> = eps.iter().map(|e| e * scale).collect();
        let a = exponent::fit_kappa(3, 2, "s", exponent::synthetic_grid(3, 2, c, &eps)).unwrap();
        // the heights stay those of the unscaled grid
        let mut grid = exponent::synthetic_grid(3, 2, c, &eps);
        for (g, e) in grid.iter_mut().zip(&scaled) {
            g.epsilon = *e;
            g.abscissa = exponent::abscissa(3, 2, *e);
        }
        let b = exponent::fit_kappa(3, 2, "s", grid).unwrap();
        prop_assert!((a.kappa_hat - b.kappa_hat).abs() <= 1e-9);
        prop_assert!((a.slope_stderr - b.slope_stderr).abs() <= 1e-9);
    }
}
