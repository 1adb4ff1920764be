//! Hecke orbit clouds in `SL_n(Z) \ H^n` and Monte Carlo coverage.

use std::collections::HashMap;
use std::fmt::Write as _;

use kiddo::{ImmutableKdTree, SquaredEuclidean};
use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hecke_enum::{self, Limits};
use crate::rng::{self, Domain};
use crate::symspace::{self, NeighborSet, SymPoint};

pub const DEDUPE_TOLERANCE: f64 = 1e-8;
/// `1 / (delta - 1/4)` for the LLL parameter in use.
const LLL_ALPHA: f64 = 1.0 / (symspace::LLL_DELTA - 0.25);

/// Where the orbit is based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Basepoint {
    Identity,
    Random { seed: u64 },
    Values { values: Vec<f64> },
}

impl Basepoint {
    /// Parses `identity`, `random:<seed>` or `values:a,b,c,...` (row-major).
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "identity" {
            return Ok(Self::Identity);
        }
        if let Some(rest) = s.strip_prefix("random:") {
            let seed = rest.trim().parse().map_err(|_| Error::Parse(format!("bad basepoint seed {rest:?}")))?;
            return Ok(Self::Random { seed });
        }
        if let Some(rest) = s.strip_prefix("values:") {
            let values = rest
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad basepoint entry {v:?}"))))
                .collect::<Result<Vec<_>>>()?;
            return Ok(Self::Values { values });
        }
        Err(Error::Parse(format!("unknown basepoint {s:?}; expected identity, random:<seed> or values:...")))
    }

    pub fn resolve(&self, n: usize) -> Result<SymPoint> {
        match self {
            Self::Identity => Ok(SymPoint::identity(n)),
            Self::Random { seed } => {
                let g = symspace::random_sl(n, &mut rng::stream(*seed, Domain::Basepoint, n as u64));
                SymPoint::from_group(&g)
            }
            Self::Values { values } => SymPoint::from_row_major(n, values),
        }
    }
}

impl std::fmt::Display for Basepoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Identity => write!(f, "identity"),
            Self::Random { seed } => write!(f, "random:{seed}"),
            Self::Values { values } => {
                let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                write!(f, "values:{}", parts.join(","))
            }
        }
    }
}

/// Reduced, deduplicated images `SL_n(Z) gamma x0` for `gamma` running over
/// `R(1) \ R(p^{nk})`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitCloud {
    pub n: usize,
    pub p: u64,
    pub k: u32,
    pub basepoint: SymPoint,
    pub points: Vec<SymPoint>,
    pub dedupe_tolerance: f64,
}

/// Reduces `gamma x0` accurately: the reducer found on the floating-point
/// image is folded into `W = gamma^T U` and the image recomputed from the
/// integer matrix `W`.
fn reduced_image(gamma: &[i64], x0: &SymPoint, p: u64, l: u32) -> Result<SymPoint> {
    let n = x0.n();
    let first = symspace::reduce(&symspace::act_int(gamma, x0)?)?;
    let mut w = vec![0i64; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0i64;
            for m in 0..n {
                let t = gamma[m * n + i]
                    .checked_mul(first.reducer[m * n + j])
                    .ok_or_else(|| Error::InvalidArgument("orbit representative overflows i64".into()))?;
                acc = acc.checked_add(t).ok_or_else(|| Error::InvalidArgument("orbit representative overflows i64".into()))?;
            }
            w[i * n + j] = acc;
        }
    }
    let scale = (p as f64).powf(-2.0 * l as f64 / n as f64);
    let y = x0.unimodular_conjugate(&w).matrix() * scale;
    Ok(symspace::reduce(&SymPoint::normalized(y)?)?.point)
}

pub fn orbit_points(x0: &SymPoint, n: usize, p: u64, k: u32, limits: &Limits) -> Result<OrbitCloud> {
    if x0.n() != n {
        return Err(Error::Dimension(format!("basepoint has rank {}, expected {n}", x0.n())));
    }
    let l = k.checked_mul(n as u32).ok_or_else(|| Error::InvalidArgument("level overflows".into()))?;
    let mut reps: Vec<i64> = Vec::new();
    hecke_enum::visit_orbit_reps(n, p, l, limits, |g| reps.extend_from_slice(g))?;
    let images: Vec<SymPoint> = reps
        .par_chunks(n * n)
        .map(|g| reduced_image(g, x0, p, l))
        .collect::<Result<_>>()?;
    let points = dedupe(images, DEDUPE_TOLERANCE);
    Ok(OrbitCloud { n, p, k, basepoint: x0.clone(), points, dedupe_tolerance: DEDUPE_TOLERANCE })
}

fn entries_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0))
}

/// Drops every point that matches an earlier kept point entrywise within
/// `tol * max(1, |v|)`, preserving the order of the survivors.
pub fn dedupe(points: Vec<SymPoint>, tol: f64) -> Vec<SymPoint> {
    let rows: Vec<Vec<f64>> = points.iter().map(|p| p.row_major()).collect();
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| rows[a][0].total_cmp(&rows[b][0]).then(a.cmp(&b)));
    let keys: Vec<f64> = order.iter().map(|&i| rows[i][0]).collect();
    let mut kept = vec![false; rows.len()];
    for i in 0..rows.len() {
        let key = rows[i][0];
        let slack = tol * key.abs().max(1.0) * 2.0;
        let lo = keys.partition_point(|&v| v < key - slack);
        let dup = order[lo..]
            .iter()
            .zip(&keys[lo..])
            .take_while(|(_, &v)| v <= key + slack)
            .any(|(&j, _)| j < i && kept[j] && entries_close(&rows[i], &rows[j], tol));
        kept[i] = !dup;
    }
    points.into_iter().zip(kept).filter_map(|(p, k)| k.then_some(p)).collect()
}

/// Uniform grid over exponential coordinates. Cell side equals the largest
/// radius it will be queried with, so a query only visits adjacent cells.
#[derive(Clone, Debug)]
pub struct GridIndex {
    cell: f64,
    cells: HashMap<u64, Vec<u32>>,
}

fn mix(mut h: u64, v: i64) -> u64 {
    h ^= (v as u64).wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
    h.wrapping_mul(0xff51_afd7_ed55_8ccd)
}

/// Cell keys are hashed; a collision only adds candidates.
fn cell_hash(cell: impl Iterator<Item = i64>) -> u64 {
    cell.fold(0xcbf2_9ce4_8422_2325, mix)
}

impl GridIndex {
    fn new(coords: &[Vec<f64>], cell: f64) -> Self {
        let mut cells: HashMap<u64, Vec<u32>> = HashMap::new();
        for (i, c) in coords.iter().enumerate() {
            let key = c.iter().map(|v| (v / cell).floor() as i64);
            cells.entry(cell_hash(key)).or_default().push(i as u32);
        }
        Self { cell, cells }
    }

    fn candidates(&self, q: &[f64], mut f: impl FnMut(u32) -> Result<bool>) -> Result<bool> {
        let base: Vec<i64> = q.iter().map(|v| (v / self.cell).floor() as i64).collect();
        let d = base.len();
        let mut offset = vec![-1i64; d];
        loop {
            if let Some(ids) = self.cells.get(&cell_hash(base.iter().zip(&offset).map(|(b, o)| b + o))) {
                for &id in ids {
                    if f(id)? {
                        return Ok(true);
                    }
                }
            }
            let mut pos = 0;
            loop {
                if pos == d {
                    return Ok(false);
                }
                offset[pos] += 1;
                if offset[pos] <= 1 {
                    break;
                }
                offset[pos] = -1;
                pos += 1;
            }
        }
    }
}

fn build_tree<const K: usize>(coords: &[Vec<f64>]) -> Result<ImmutableKdTree<f64, K>> {
    let arr: Vec<[f64; K]> = coords.iter().map(|c| std::array::from_fn(|i| c[i])).collect();
    ImmutableKdTree::new_from_slice(&arr).map_err(|e| Error::InvalidArgument(format!("k-d tree construction failed: {e:?}")))
}

fn tree_candidates<const K: usize>(
    tree: &ImmutableKdTree<f64, K>,
    q: &[f64],
    radius: f64,
    mut f: impl FnMut(u32) -> Result<bool>,
) -> Result<bool> {
    let q: [f64; K] = std::array::from_fn(|i| q[i]);
    let mut ids: Vec<u32> =
        tree.query(&q).within::<SquaredEuclidean<f64>>(radius * radius).unsorted().execute().iter().map(|r| r.item).collect();
    ids.sort_unstable();
    for id in ids {
        if f(id)? {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Debug)]
enum Partition {
    Grid(GridIndex),
    Tree5(ImmutableKdTree<f64, 5>),
    Tree9(ImmutableKdTree<f64, 9>),
    Tree14(ImmutableKdTree<f64, 14>),
}

/// Spatial index over exponential coordinates of reduced points: a uniform
/// grid for `n = 2` and a k-d tree for `n = 3, 4, 5`. Euclidean distance in
/// these coordinates never exceeds the invariant distance, so both filters
/// only discard points that are genuinely too far.
#[derive(Debug)]
pub struct ExpIndex {
    n: usize,
    max_radius: f64,
    points: Vec<Vec<f64>>,
    partition: Partition,
}

impl ExpIndex {
    pub fn new(points: &[SymPoint], max_radius: f64) -> Result<Self> {
        if !(max_radius > 0.0) {
            return Err(Error::InvalidArgument("index radius must be positive".into()));
        }
        let n = points.first().map_or(2, SymPoint::n);
        let coords: Vec<Vec<f64>> = points.par_iter().map(SymPoint::exp_coordinates).collect();
        let partition = match n {
            _ if points.is_empty() || n == 2 || n > 5 => Partition::Grid(GridIndex::new(&coords, max_radius)),
            3 => Partition::Tree5(build_tree(&coords)?),
            4 => Partition::Tree9(build_tree(&coords)?),
            _ => Partition::Tree14(build_tree(&coords)?),
        };
        let points = points.iter().map(SymPoint::row_major).collect();
        Ok(Self { n, max_radius, points, partition })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Whether some indexed point lies within `radius` of `y`.
    pub fn any_within(&self, y: &SymPoint, radius: f64) -> Result<bool> {
        if radius > self.max_radius {
            return Err(Error::InvalidArgument("query radius exceeds the index radius".into()));
        }
        let q = y.exp_coordinates();
        let yr = y.row_major();
        let check = |id: u32| -> Result<bool> { Ok(symspace::distance_raw(self.n, &yr, &self.points[id as usize])? <= radius) };
        match &self.partition {
            Partition::Grid(g) => g.candidates(&q, check),
            Partition::Tree5(t) => tree_candidates(t, &q, radius, check),
            Partition::Tree9(t) => tree_candidates(t, &q, radius, check),
            Partition::Tree14(t) => tree_candidates(t, &q, radius, check),
        }
    }
}

/// Orbit cloud, spatial index and neighbor set prepared for admissibility
/// queries at radius `radius` (trace-metric units).
#[derive(Debug)]
pub struct CoverIndex {
    pub n: usize,
    pub radius: f64,
    pub orbit_size: usize,
    index: ExpIndex,
    neighbors: NeighborSet,
}

impl CoverIndex {
    pub fn new(cloud: &OrbitCloud, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!("radius {radius} must be positive")));
        }
        Ok(Self {
            n: cloud.n,
            radius,
            orbit_size: cloud.points.len(),
            index: ExpIndex::new(&cloud.points, radius)?,
            neighbors: NeighborSet::standard(cloud.n),
        })
    }

    /// `min_point dist_in_X(x, point) <= radius`. Lifts `V^T x V` of the
    /// reduced sample are only tried when their diagonal could match an
    /// LLL-reduced point within the radius, entry by entry and as a product.
    pub fn admits(&self, x: &SymPoint) -> Result<bool> {
        self.admits_within(x, self.radius)
    }

    /// As [`CoverIndex::admits`] with a smaller radius.
    pub fn admits_within(&self, x: &SymPoint, radius: f64) -> Result<bool> {
        if radius > self.radius {
            return Err(Error::InvalidArgument("query radius exceeds the index radius".into()));
        }
        let xr = symspace::reduce(x)?.point;
        let n = self.n;
        let xm = xr.matrix();
        let slack = (2.0 * radius).exp() * LLL_ALPHA.powi(n as i32 - 1) * (1.0 + 1e-9);
        let mut caps = vec![0.0; n];
        let mut running = 0.0f64;
        for i in 0..n {
            running = running.max(xm[(i, i)]);
            caps[i] = slack * running;
        }
        // an LLL-reduced point o has prod_i o_ii <= alpha^{n(n-1)/2}
        let product_cap = (n as f64 * radius).exp() * LLL_ALPHA.powi((n * (n - 1) / 2) as i32) * (1.0 + 1e-9);
        'lifts: for v in self.neighbors.matrices() {
            let mut product = 1.0;
            for (i, cap) in caps.iter().enumerate() {
                let mut q = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        q += v[a * n + i] as f64 * xm[(a, b)] * v[b * n + i] as f64;
                    }
                }
                product *= q;
                if q > *cap {
                    continue 'lifts;
                }
            }
            if product > product_cap {
                continue;
            }
            if self.index.any_within(&xr.unimodular_conjugate(v), radius)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Direct admissibility test: builds the orbit cloud and checks whether
/// `x` lies within `epsilon` of it in the quotient.
pub fn is_admissible(x: &SymPoint, x0: &SymPoint, epsilon: f64, k: u32, n: usize, p: u64, limits: &Limits) -> Result<bool> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let cloud = orbit_points(x0, n, p, k, limits)?;
    CoverIndex::new(&cloud, epsilon)?.admits(x)
}

/// Compact region of the quotient to sample from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Region {
    /// `n = 2`: `|x| <= 1/2, |z| >= 1, y <= y_max`.
    StandardDomain { y_max: f64 },
    /// `g = N A`, with `|N_ij| <= x_bound` and `log(a_i / a_{i+1})` in
    /// `[t_min, t_max]`; sampled from Haar measure and then reduced.
    IwasawaBox { x_bound: f64, t_min: f64, t_max: f64 },
}

impl Region {
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            Self::StandardDomain { y_max } => {
                if n != 2 {
                    return Err(Error::InvalidArgument("the standard domain region needs n = 2".into()));
                }
                if !(y_max > 1.0) || !y_max.is_finite() {
                    return Err(Error::InvalidArgument(format!("region with y_max = {y_max} is empty or unbounded")));
                }
            }
            Self::IwasawaBox { x_bound, t_min, t_max } => {
                if !(x_bound > 0.0 && t_max > t_min) || !x_bound.is_finite() || !t_max.is_finite() || !t_min.is_finite() {
                    return Err(Error::InvalidArgument("Iwasawa box is empty or unbounded".into()));
                }
            }
        }
        Ok(())
    }
}

fn sample_standard_domain<R: Rng>(y_max: f64, rng: &mut R) -> SymPoint {
    // dx dy / y^2 on y in [sqrt(3)/2, y_max], then rejection to |z| >= 1
    let inv_lo = 2.0 / 3f64.sqrt();
    let inv_hi = 1.0 / y_max;
    loop {
        let x = rng.gen::<f64>() - 0.5;
        let u: f64 = rng.gen();
        let y = 1.0 / (inv_lo - u * (inv_lo - inv_hi));
        if x * x + y * y >= 1.0 {
            return SymPoint::from_half_plane(x, y).expect("y > 0");
        }
    }
}

/// Truncated exponential `e^{-rate t}` on `[lo, hi]` by inversion.
fn truncated_exponential<R: Rng>(rate: f64, lo: f64, hi: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    let span = hi - lo;
    // t = lo - ln(1 - u (1 - e^{-rate span})) / rate
    lo - (-u * (-(rate * span)).exp_m1()).ln_1p() / rate
}

fn sample_iwasawa<R: Rng>(n: usize, x_bound: f64, t_min: f64, t_max: f64, rng: &mut R) -> Result<SymPoint> {
    let mut g = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in i + 1..n {
            g[(i, j)] = x_bound * (2.0 * rng.gen::<f64>() - 1.0);
        }
    }
    let t: Vec<f64> = (1..n).map(|k| truncated_exponential((k * (n - k)) as f64, t_min, t_max, rng)).collect();
    // s_k - s_{k+1} = t_k and sum s = 0
    let last = -t.iter().enumerate().map(|(j, tj)| (j + 1) as f64 * tj).sum::<f64>() / n as f64;
    let mut s = vec![last; n];
    for k in (0..n - 1).rev() {
        s[k] = s[k + 1] + t[k];
    }
    for (j, sj) in s.iter().enumerate() {
        let a = sj.exp();
        for i in 0..n {
            g[(i, j)] *= a;
        }
    }
    SymPoint::normalized(&g * g.transpose())
}

/// `count` reduced points from the invariant measure restricted to `region`.
pub fn sample_region(n: usize, region: &Region, count: u64, seed: u64) -> Result<Vec<SymPoint>> {
    region.validate(n)?;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, Domain::RegionSample, i);
            let x = match *region {
                Region::StandardDomain { y_max } => sample_standard_domain(y_max, &mut rng),
                Region::IwasawaBox { x_bound, t_min, t_max } => sample_iwasawa(n, x_bound, t_min, t_max, &mut rng)?,
            };
            Ok(symspace::reduce(&x)?.point)
        })
        .collect()
}

/// Sampling parameters shared by coverage runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub region: Region,
    pub samples: u64,
    pub seed: u64,
    /// Distances are `metric_scale` times the trace-form distance.
    pub metric_scale: f64,
}

impl SamplerConfig {
    /// Radius in trace-form units corresponding to `epsilon`.
    pub fn radius(&self, epsilon: f64) -> f64 {
        epsilon / self.metric_scale
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub n: usize,
    pub p: u64,
    pub k: u32,
    pub epsilon: f64,
    pub region: Region,
    pub samples: u64,
    pub covered: u64,
    pub fraction: f64,
    pub stderr: f64,
    pub seed: u64,
    pub orbit_size: usize,
    /// Quotient distances are upper bounds, so `fraction` can only be an
    /// undercount.
    pub distance: String,
}

pub fn binomial_stderr(fraction: f64, samples: u64) -> f64 {
    if samples == 0 {
        return 0.0;
    }
    (fraction * (1.0 - fraction) / samples as f64).sqrt()
}

/// Admissibility flags for pre-drawn samples, in sample order.
pub fn admissible_flags(index: &CoverIndex, samples: &[SymPoint], radius: f64) -> Result<Vec<bool>> {
    samples.par_iter().map(|x| index.admits_within(x, radius)).collect()
}

/// Coverage fraction of a prepared index over pre-drawn samples.
pub fn coverage_of_samples(
    index: &CoverIndex,
    samples: &[SymPoint],
    cloud: &OrbitCloud,
    epsilon: f64,
    sampler: &SamplerConfig,
) -> Result<CoverageReport> {
    let radius = sampler.radius(epsilon);
    let flags = admissible_flags(index, samples, radius)?;
    let covered = flags.iter().filter(|&&f| f).count() as u64;
    let count = samples.len() as u64;
    let fraction = if count == 0 { 0.0 } else { covered as f64 / count as f64 };
    Ok(CoverageReport {
        n: cloud.n,
        p: cloud.p,
        k: cloud.k,
        epsilon,
        region: sampler.region.clone(),
        samples: count,
        covered,
        fraction,
        stderr: binomial_stderr(fraction, count),
        seed: sampler.seed,
        orbit_size: cloud.points.len(),
        distance: "quotient distance upper bound over the short unimodular neighbor set".into(),
    })
}

pub fn coverage(
    x0: &SymPoint,
    n: usize,
    p: u64,
    k: u32,
    epsilon: f64,
    sampler: &SamplerConfig,
    limits: &Limits,
) -> Result<CoverageReport> {
    let cloud = orbit_points(x0, n, p, k, limits)?;
    let index = CoverIndex::new(&cloud, sampler.radius(epsilon))?;
    let samples = sample_region(n, &sampler.region, sampler.samples, sampler.seed)?;
    coverage_of_samples(&index, &samples, &cloud, epsilon, sampler)
}

/// One reduced point per row: `index,y_00,y_01,...` (row-major, 17
/// significant digits), plus `x,y` half-plane columns when `n = 2`.
pub fn orbit_csv(cloud: &OrbitCloud) -> String {
    let n = cloud.n;
    let mut out = String::from("index");
    for i in 0..n {
        for j in 0..n {
            let _ = write!(out, ",y_{i}{j}");
        }
    }
    if n == 2 {
        out.push_str(",x,y");
    }
    out.push('\n');
    for (idx, pt) in cloud.points.iter().enumerate() {
        let _ = write!(out, "{idx}");
        for v in pt.row_major() {
            let _ = write!(out, ",{v:.16e}");
        }
        if let Some((x, y)) = pt.to_half_plane() {
            let _ = write!(out, ",{x:.16e},{y:.16e}");
        }
        out.push('\n');
    }
    out
}

/// Half-plane picture of an `n = 2` cloud: a disc of trace radius `radius`
/// (hyperbolic radius `radius / sqrt 2`) around every orbit point, and the
/// outline of the fundamental domain, for `y <= y_view`.
pub fn render_svg(cloud: &OrbitCloud, radius: f64, y_view: f64) -> Result<String> {
    if cloud.n != 2 {
        return Err(Error::InvalidArgument("the half-plane figure needs n = 2".into()));
    }
    let (width, height) = (600.0, 600.0 * (y_view + 0.05) / 1.2);
    let sx = |x: f64| (x + 0.6) / 1.2 * width;
    let sy = |y: f64| height - y / (y_view + 0.05) * height;
    let scale = width / 1.2;
    let rh = radius / std::f64::consts::SQRT_2;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.3} {height:.3}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r##"<g fill="#3b6ea8" fill-opacity="0.35" stroke="none">"##);
    for pt in &cloud.points {
        let (x, y) = pt.to_half_plane().expect("n = 2");
        let (cy, r) = (y * rh.cosh(), y * rh.sinh());
        if cy - r > y_view + 0.05 {
            continue;
        }
        let _ = writeln!(out, r#"<circle cx="{:.4}" cy="{:.4}" r="{:.4}"/>"#, sx(x), sy(cy), (r * scale).max(0.2));
    }
    out.push_str("</g>\n");
    // domain outline: two vertical edges and the unit arc between them
    let foot = 3f64.sqrt() / 2.0;
    let _ = writeln!(
        out,
        r#"<path d="M {:.4} {:.4} L {:.4} {:.4} A {:.4} {:.4} 0 0 1 {:.4} {:.4} L {:.4} {:.4}" fill="none" stroke="black" stroke-width="1.5"/>"#,
        sx(-0.5),
        sy(y_view),
        sx(-0.5),
        sy(foot),
        scale,
        scale,
        sx(0.5),
        sy(foot),
        sx(0.5),
        sy(y_view)
    );
    out.push_str("</svg>\n");
    Ok(out)
}
