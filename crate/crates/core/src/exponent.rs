//! Minimal admissible heights over an epsilon grid and the fitted exponent.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::covering::{self, CoverIndex, OrbitCloud, SamplerConfig};
use crate::error::{Error, Result};
use crate::hecke_enum::Limits;
use crate::symspace::{self, SymPoint};

/// `(n + 2) / (2n)`, the factor relating height to `log_p(1/epsilon)`.
pub fn normalization(n: usize) -> f64 {
    (n as f64 + 2.0) / (2.0 * n as f64)
}

/// Regression abscissa `(n + 2)/(2n) * log_p(1/epsilon)`.
pub fn abscissa(n: usize, p: u64, epsilon: f64) -> f64 {
    normalization(n) * (1.0 / epsilon).ln() / (p as f64).ln()
}

/// Counting lower bound `d / (n(n-1)) * log_p(1/epsilon)` for the height
/// needed to cover a fixed fraction of the space with balls of radius epsilon.
pub fn heuristic_lower_bound(n: usize, p: u64, epsilon: f64) -> f64 {
    symspace::dimension(n) as f64 / (n * (n - 1)) as f64 * (1.0 / epsilon).ln() / (p as f64).ln()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum KSearch {
    Determined { k: u32, fraction: f64 },
    /// The scan hit `k_max` or the resource cap first.
    Undetermined { last_k: Option<u32>, last_fraction: Option<f64>, reason: String },
}

impl KSearch {
    pub fn k(&self) -> Option<u32> {
        match self {
            Self::Determined { k, .. } => Some(*k),
            Self::Undetermined { .. } => None,
        }
    }
}

/// Sampled points plus a cache of orbit clouds, so a grid sweep generates
/// each height's cloud once and evaluates every epsilon on the same samples.
pub struct CoverageExperiment {
    pub n: usize,
    pub p: u64,
    pub x0: SymPoint,
    pub sampler: SamplerConfig,
    pub limits: Limits,
    pub k_max: u32,
    samples: Vec<SymPoint>,
    clouds: BTreeMap<u32, OrbitCloud>,
}

impl CoverageExperiment {
    pub fn new(x0: SymPoint, n: usize, p: u64, sampler: SamplerConfig, limits: Limits, k_max: u32) -> Result<Self> {
        let samples = covering::sample_region(n, &sampler.region, sampler.samples, sampler.seed)?;
        Ok(Self { n, p, x0, sampler, limits, k_max, samples, clouds: BTreeMap::new() })
    }

    pub fn samples(&self) -> &[SymPoint] {
        &self.samples
    }

    pub fn cloud(&mut self, k: u32) -> Result<&OrbitCloud> {
        if !self.clouds.contains_key(&k) {
            let cloud = covering::orbit_points(&self.x0, self.n, self.p, k, &self.limits)?;
            self.clouds.insert(k, cloud);
        }
        Ok(&self.clouds[&k])
    }

    /// Coverage fraction at height `k` and radius `epsilon`.
    pub fn fraction(&mut self, k: u32, epsilon: f64) -> Result<f64> {
        let radius = self.sampler.radius(epsilon);
        let cloud = self.cloud(k)?;
        let index = CoverIndex::new(cloud, radius)?;
        let flags = covering::admissible_flags(&index, &self.samples, radius)?;
        if flags.is_empty() {
            return Ok(0.0);
        }
        Ok(flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64)
    }

    /// Smallest `k >= start` whose coverage reaches `target`.
    pub fn scan_from(&mut self, epsilon: f64, target: f64, start: u32) -> Result<KSearch> {
        if !(target > 0.0 && target < 1.0) {
            return Err(Error::InvalidArgument(format!("target {target} must lie in (0, 1)")));
        }
        if !(epsilon > 0.0) {
            return Err(Error::InvalidArgument("epsilon must be positive".into()));
        }
        let (mut last_k, mut last_fraction) = (None, None);
        for k in start..=self.k_max {
            let f = match self.fraction(k, epsilon) {
                Ok(f) => f,
                Err(Error::CapExceeded { requested, cap }) => {
                    return Ok(KSearch::Undetermined {
                        last_k,
                        last_fraction,
                        reason: format!("height {k} needs {requested} representatives, over the cap of {cap}"),
                    })
                }
                Err(e) => return Err(e),
            };
            if f >= target {
                return Ok(KSearch::Determined { k, fraction: f });
            }
            (last_k, last_fraction) = (Some(k), Some(f));
        }
        Ok(KSearch::Undetermined { last_k, last_fraction, reason: format!("no height up to k_max = {} reached the target", self.k_max) })
    }

    /// The scan starts at `max(0, ceil(bound) - 1)` for the counting bound.
    pub fn min_k_for_coverage(&mut self, epsilon: f64, target: f64) -> Result<KSearch> {
        let start = (heuristic_lower_bound(self.n, self.p, epsilon).ceil() - 1.0).max(0.0) as u32;
        self.scan_from(epsilon, target, start)
    }
}

/// One epsilon of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub epsilon: f64,
    pub abscissa: f64,
    pub coverage_target: f64,
    pub k_min: Option<u32>,
    pub achieved_fraction: Option<f64>,
    pub search: KSearch,
    /// Smallest height reaching coverage 1/2, scanned from zero.
    pub k_half: Option<u32>,
    pub heuristic_bound: f64,
    /// `k_half >= heuristic_bound - 1`.
    pub heuristic_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub n: usize,
    pub p: u64,
    pub x0: String,
    pub grid: Vec<GridPoint>,
    pub determined: usize,
    pub kappa_hat: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    pub normalization: f64,
}

/// Least-squares line `y = a + b x`; returns `(b, stderr(b), a)`.
pub fn least_squares(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 3 {
        return Err(Error::DegenerateGrid(format!("{} determined points, at least 3 are needed", points.len())));
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 1e-24) {
        return Err(Error::DegenerateGrid("all abscissae coincide".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (sse / (m - 2.0) / sxx).sqrt();
    Ok((slope, stderr, intercept))
}

/// Fits `k_min` against `(n + 2)/(2n) log_p(1/epsilon)` with a free
/// intercept, using the determined grid points.
pub fn fit_kappa(n: usize, p: u64, x0: &str, grid: Vec<GridPoint>) -> Result<ExponentFit> {
    let eps: Vec<f64> = grid.iter().map(|g| g.epsilon).collect();
    if eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::DegenerateGrid("epsilon grid must be strictly decreasing".into()));
    }
    let pts: Vec<(f64, f64)> = grid.iter().filter_map(|g| g.k_min.map(|k| (g.abscissa, k as f64))).collect();
    let (kappa_hat, slope_stderr, intercept) = least_squares(&pts)?;
    Ok(ExponentFit {
        n,
        p,
        x0: x0.to_string(),
        determined: pts.len(),
        grid,
        kappa_hat,
        slope_stderr,
        intercept,
        normalization: normalization(n),
    })
}

/// Sorts and validates an epsilon grid (positive, distinct, descending).
pub fn prepare_grid(epsilons: &[f64]) -> Result<Vec<f64>> {
    if epsilons.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidArgument("epsilon values must be positive and finite".into()));
    }
    let mut eps = epsilons.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    if eps.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DegenerateGrid("repeated epsilon values".into()));
    }
    Ok(eps)
}

/// Runs the minimal-height search and the heuristic check at every epsilon.
pub fn sweep(exp: &mut CoverageExperiment, epsilons: &[f64], target: f64) -> Result<Vec<GridPoint>> {
    let eps = prepare_grid(epsilons)?;
    let mut out = Vec::with_capacity(eps.len());
    for &e in &eps {
        let search = exp.min_k_for_coverage(e, target)?;
        let half = exp.scan_from(e, 0.5, 0)?;
        let bound = heuristic_lower_bound(exp.n, exp.p, e);
        let heuristic_ok = match half.k() {
            Some(k) => k as f64 >= bound - 1.0,
            // not reached by k_max, so the true value exceeds k_max
            None => (exp.k_max + 1) as f64 >= bound - 1.0,
        };
        let (k_min, achieved_fraction) = match &search {
            KSearch::Determined { k, fraction } => (Some(*k), Some(*fraction)),
            KSearch::Undetermined { last_fraction, .. } => (None, *last_fraction),
        };
        out.push(GridPoint {
            epsilon: e,
            abscissa: abscissa(exp.n, exp.p, e),
            coverage_target: target,
            k_min,
            achieved_fraction,
            search,
            k_half: half.k(),
            heuristic_bound: bound,
            heuristic_ok,
        });
    }
    Ok(out)
}

/// Grid whose heights follow `round(c * (n+2)/(2n) * log_p(1/epsilon))`,
/// for checking the regression on its own model.
pub fn synthetic_grid(n: usize, p: u64, c: f64, epsilons: &[f64]) -> Vec<GridPoint> {
    epsilons
        .iter()
        .map(|&e| {
            let x = abscissa(n, p, e);
            let k = (c * x).round().max(0.0) as u32;
            GridPoint {
                epsilon: e,
                abscissa: x,
                coverage_target: 0.9,
                k_min: Some(k),
                achieved_fraction: None,
                search: KSearch::Determined { k, fraction: f64::NAN },
                k_half: None,
                heuristic_bound: heuristic_lower_bound(n, p, e),
                heuristic_ok: true,
            }
        })
        .collect()
}

/// Two-column CSV of the determined points: abscissa and `k_min`.
pub fn fit_csv(fit: &ExponentFit) -> String {
    let mut out = String::from("abscissa,k_min\n");
    for g in &fit.grid {
        if let Some(k) = g.k_min {
            out.push_str(&format!("{:.16e},{k}\n", g.abscissa));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::{Basepoint, Region};

    fn powers(p: f64, js: std::ops::RangeInclusive<i32>) -> Vec<f64> {
        js.map(|j| p.powi(-j)).collect()
    }

    #[test]
    fn synthetic_recovery() {
        for (n, p) in [(2usize, 3u64), (3, 2), (4, 2)] {
            for c in [1.0, 2.0] {
                let grid = synthetic_grid(n, p, c, &powers(p as f64, 1..=10));
                let fit = fit_kappa(n, p, "synthetic", grid).unwrap();
                assert!((fit.kappa_hat - c).abs() <= 0.1, "n={n} c={c} {}", fit.kappa_hat);
            }
        }
    }

    #[test]
    fn scale_changes_only_the_intercept() {
        let eps = powers(2.0, 1..=8);
        let grid = synthetic_grid(3, 2, 1.0, &eps);
        let a = fit_kappa(3, 2, "s", grid.clone()).unwrap();
        let shifted: Vec<GridPoint> = grid
            .into_iter()
            .map(|mut g| {
                g.epsilon *= 0.37;
                g.abscissa = abscissa(3, 2, g.epsilon);
                g
            })
            .collect();
        let b = fit_kappa(3, 2, "s", shifted).unwrap();
        assert!((a.kappa_hat - b.kappa_hat).abs() < 1e-12);
        assert!((a.intercept - b.intercept).abs() > 0.5);
    }

    #[test]
    fn degenerate_grids_are_rejected() {
        let g = synthetic_grid(2, 3, 1.0, &[0.1, 0.1, 0.1]);
        assert!(matches!(fit_kappa(2, 3, "s", g), Err(Error::DegenerateGrid(_))));
        let g = synthetic_grid(2, 3, 1.0, &[0.1, 0.01]);
        assert!(matches!(fit_kappa(2, 3, "s", g), Err(Error::DegenerateGrid(_))));
        assert!(prepare_grid(&[0.1, 0.1]).is_err());
        assert_eq!(prepare_grid(&[0.01, 0.1]).unwrap(), vec![0.1, 0.01]);
    }

    #[test]
    fn normalization_values() {
        assert_eq!(normalization(2), 1.0);
        assert!((normalization(3) - 5.0 / 6.0).abs() < 1e-15);
        assert!((heuristic_lower_bound(3, 2, 0.25) - 5.0 / 6.0 * 2.0).abs() < 1e-12);
    }

    fn experiment(samples: u64, k_max: u32) -> CoverageExperiment {
        let sampler = SamplerConfig { region: Region::StandardDomain { y_max: 2.0 }, samples, seed: 4, metric_scale: 1.0 };
        let x0 = Basepoint::Random { seed: 1 }.resolve(2).unwrap();
        CoverageExperiment::new(x0, 2, 3, sampler, Limits::default(), k_max).unwrap()
    }

    #[test]
    fn large_epsilon_needs_no_height() {
        let mut exp = experiment(200, 3);
        assert_eq!(exp.min_k_for_coverage(5.0, 0.9).unwrap().k(), Some(0));
    }

    #[test]
    fn scans_are_monotone_in_the_target() {
        let mut exp = experiment(400, 4);
        let eps = 3f64.powi(-2);
        let lo = exp.scan_from(eps, 0.5, 0).unwrap().k().unwrap();
        let hi = exp.scan_from(eps, 0.95, 0).unwrap().k().unwrap();
        assert!(lo <= hi);
    }

    #[test]
    fn caps_give_undetermined_results() {
        let sampler = SamplerConfig { region: Region::StandardDomain { y_max: 2.0 }, samples: 100, seed: 0, metric_scale: 1.0 };
        let x0 = Basepoint::Random { seed: 1 }.resolve(2).unwrap();
        let mut exp = CoverageExperiment::new(x0, 2, 3, sampler, Limits { max_reps: 200 }, 6).unwrap();
        match exp.scan_from(1e-3, 0.9, 0).unwrap() {
            KSearch::Undetermined { last_k, last_fraction, .. } => {
                assert_eq!(last_k, Some(2));
                assert!(last_fraction.unwrap() < 0.9);
            }
            other => panic!("{other:?}"),
        }
    }
}
