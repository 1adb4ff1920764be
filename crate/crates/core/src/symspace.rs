//! The symmetric space `SL_n(R)/SO_n(R)` as determinant-one positive-definite
//! symmetric matrices `Y = g g^T`.
//!
//! Distances use the trace form `<A, B> = tr(Y^-1 A Y^-1 B)`, so
//! `d(X, Y) = sqrt(sum log^2 lambda_i)` over the eigenvalues of `X^-1 Y`.
//! For `n = 2` the point `Y = (1/y) [[x^2 + y^2, x], [x, 1]]` corresponds to
//! `z = x + iy` in the upper half-plane and `d = sqrt(2) * d_hyp`.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_linalg::RatMatrix;
use crate::rng::{self, Domain};

pub const DET_TOLERANCE: f64 = 1e-9;
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;
pub const REDUCTION_STEP_CAP: usize = 10_000;
pub const LLL_DELTA: f64 = 0.99;
/// Slack for deciding that a reduced `n = 2` point lies on the domain boundary.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// Dimension `(n + 2)(n - 1) / 2` of the symmetric space.
pub fn dimension(n: usize) -> usize {
    (n + 2) * (n - 1) / 2
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymPoint {
    y: DMatrix<f64>,
}

impl SymPoint {
    /// Validates symmetry, positive definiteness and `|det Y - 1| <= 1e-9`.
    pub fn new(y: DMatrix<f64>) -> Result<Self> {
        let n = y.nrows();
        if n < 2 || y.ncols() != n {
            return Err(Error::Dimension(format!("expected a square matrix of size >= 2, got {}x{}", n, y.ncols())));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        let scale = y.amax().max(1.0);
        if (&y - y.transpose()).amax() > SYMMETRY_TOLERANCE * scale {
            return Err(Error::InvalidArgument("matrix is not symmetric".into()));
        }
        let y = symmetrize(y);
        if y.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        let det = y.determinant();
        if (det - 1.0).abs() > DET_TOLERANCE {
            return Err(Error::InvalidArgument(format!("determinant {det} is not 1")));
        }
        Ok(Self { y })
    }

    /// Symmetrizes `y` and rescales it to determinant one.
    pub fn normalized(y: DMatrix<f64>) -> Result<Self> {
        let n = y.nrows();
        if n < 2 || y.ncols() != n {
            return Err(Error::Dimension("expected a square matrix of size >= 2".into()));
        }
        let y = symmetrize(y);
        let chol = y.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
        let log_det: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        if !log_det.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        // the Cholesky log-determinant stays accurate where LU determinants
        // of ill-conditioned cusp points do not, so no recheck here
        Ok(Self { y: y * (-log_det / n as f64).exp() })
    }

    pub fn identity(n: usize) -> Self {
        Self { y: DMatrix::identity(n, n) }
    }

    /// `Y = g g^T` for `|det g| = 1` (within `1e-9`), renormalized to `det Y = 1`.
    pub fn from_group(g: &DMatrix<f64>) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::Dimension("group element must be square".into()));
        }
        let det = g.determinant();
        if (det.abs() - 1.0).abs() > DET_TOLERANCE {
            return Err(Error::Singular);
        }
        Self::normalized(g * g.transpose())
    }

    /// Builds a point from row-major entries.
    pub fn from_row_major(n: usize, values: &[f64]) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::Dimension(format!("expected {} entries, got {}", n * n, values.len())));
        }
        Self::new(DMatrix::from_row_slice(n, n, values))
    }

    /// `z = x + iy` to `Y = (1/y) [[x^2 + y^2, x], [x, 1]]`.
    pub fn from_half_plane(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidArgument(format!("({x}, {y}) is not in the upper half-plane")));
        }
        Ok(Self { y: half_plane_matrix(x, y) })
    }

    /// Inverse of [`SymPoint::from_half_plane`]; `None` unless `n = 2`.
    pub fn to_half_plane(&self) -> Option<(f64, f64)> {
        (self.n() == 2).then(|| {
            let c = self.y[(1, 1)];
            (self.y[(0, 1)] / c, 1.0 / c)
        })
    }

    pub fn n(&self) -> usize {
        self.y.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn row_major(&self) -> Vec<f64> {
        // symmetric, so column-major storage is also row-major
        self.y.as_slice().to_vec()
    }

    /// `log Y` as a traceless symmetric matrix.
    pub fn log(&self) -> DMatrix<f64> {
        let eig = SymmetricEigen::new(self.y.clone());
        let logs = eig.eigenvalues.map(f64::ln);
        &eig.eigenvectors * DMatrix::from_diagonal(&logs) * eig.eigenvectors.transpose()
    }

    /// Coordinates of `log Y` in an orthonormal basis of the traceless
    /// symmetric matrices for the Frobenius form. Since the space has
    /// non-positive curvature, Euclidean distance between these vectors never
    /// exceeds [`distance`].
    pub fn exp_coordinates(&self) -> Vec<f64> {
        traceless_coordinates(&self.log())
    }

    /// `exp(H)` for a traceless symmetric `H`.
    pub fn exp_of(h: &DMatrix<f64>) -> Result<Self> {
        let eig = SymmetricEigen::new(symmetrize(h.clone()));
        let exps = eig.eigenvalues.map(f64::exp);
        Self::normalized(&eig.eigenvectors * DMatrix::from_diagonal(&exps) * eig.eigenvectors.transpose())
    }

    /// `U^T Y U` for an integer matrix `U` (row-major) of determinant `+-1`.
    pub fn unimodular_conjugate(&self, u: &[i64]) -> Self {
        let n = self.n();
        let um = DMatrix::from_row_slice(n, n, &u.iter().map(|&v| v as f64).collect::<Vec<_>>());
        Self { y: symmetrize(um.transpose() * &self.y * um) }
    }
}

impl Serialize for SymPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.row_major().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        let n = (v.len() as f64).sqrt().round() as usize;
        SymPoint::from_row_major(n, &v).map_err(serde::de::Error::custom)
    }
}

fn symmetrize(y: DMatrix<f64>) -> DMatrix<f64> {
    (&y + y.transpose()) * 0.5
}

fn half_plane_matrix(x: f64, y: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[(x * x + y * y) / y, x / y, x / y, 1.0 / y])
}

/// Orthonormal coordinates of a traceless symmetric matrix: a Helmert basis
/// on the diagonal, then `sqrt(2) H_ij` for `i < j`.
pub fn traceless_coordinates(h: &DMatrix<f64>) -> Vec<f64> {
    let n = h.nrows();
    let mut out = Vec::with_capacity(dimension(n));
    for k in 1..n {
        let norm = ((k * (k + 1)) as f64).sqrt();
        let head: f64 = (0..k).map(|i| h[(i, i)]).sum();
        out.push((head - k as f64 * h[(k, k)]) / norm);
    }
    for i in 0..n {
        for j in i + 1..n {
            out.push(std::f64::consts::SQRT_2 * h[(i, j)]);
        }
    }
    out
}

/// Inverse of [`traceless_coordinates`].
pub fn from_traceless_coordinates(n: usize, coords: &[f64]) -> Result<DMatrix<f64>> {
    if coords.len() != dimension(n) {
        return Err(Error::Dimension(format!("expected {} coordinates", dimension(n))));
    }
    let mut h = DMatrix::zeros(n, n);
    for k in 1..n {
        let c = coords[k - 1] / ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            h[(i, i)] += c;
        }
        h[(k, k)] -= k as f64 * c;
    }
    let mut idx = n - 1;
    for i in 0..n {
        for j in i + 1..n {
            let v = coords[idx] / std::f64::consts::SQRT_2;
            h[(i, j)] = v;
            h[(j, i)] = v;
            idx += 1;
        }
    }
    Ok(h)
}

fn check_same_rank(x: &SymPoint, y: &SymPoint) -> Result<()> {
    if x.n() != y.n() {
        return Err(Error::Dimension(format!("points of rank {} and {}", x.n(), y.n())));
    }
    Ok(())
}

/// Invariant distance `sqrt(sum_i log^2 lambda_i)` over the eigenvalues of
/// `X^-1 Y`, computed by Cholesky whitening.
pub fn distance(x: &SymPoint, y: &SymPoint) -> Result<f64> {
    check_same_rank(x, y)?;
    distance_raw(x.n(), x.y.as_slice(), y.y.as_slice())
}

/// [`distance`] on raw symmetric buffers.
pub fn distance_raw(n: usize, x: &[f64], y: &[f64]) -> Result<f64> {
    if n == 2 {
        return distance_2x2(x, y);
    }
    let xm = DMatrix::from_column_slice(n, n, x);
    let ym = DMatrix::from_column_slice(n, n, y);
    let chol = xm.cholesky().ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let a = l.solve_lower_triangular(&ym).ok_or(Error::NotPositiveDefinite)?;
    let m = l.solve_lower_triangular(&a.transpose()).ok_or(Error::NotPositiveDefinite)?;
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut acc = 0.0;
    for &lam in eig.eigenvalues.iter() {
        if !(lam > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        acc += lam.ln().powi(2);
    }
    Ok(acc.sqrt())
}

fn distance_2x2(x: &[f64], y: &[f64]) -> Result<f64> {
    // Cholesky of X, then the closed-form eigenvalues of L^-1 Y L^-T
    let (x00, x01, x11) = (x[0], x[2], x[3]);
    if !(x00 > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let l00 = x00.sqrt();
    let l10 = x01 / l00;
    let s = x11 - l10 * l10;
    if !(s > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let l11 = s.sqrt();
    let (y00, y01, y11) = (y[0], y[2], y[3]);
    let m00 = y00 / (l00 * l00);
    let m01 = (y01 - l10 * y00 / l00) / (l00 * l11);
    let m11 = (y11 - 2.0 * l10 * y01 / l00 + l10 * l10 * y00 / (l00 * l00)) / (l11 * l11);
    let mean = 0.5 * (m00 + m11);
    let r = (0.25 * (m00 - m11).powi(2) + m01 * m01).sqrt();
    let hi = mean + r;
    let lo = mean - r;
    if !(lo > 0.0) {
        // eigenvalue product is det Y / det X; recover the small one from it
        let det_ratio = (y00 * y11 - y01 * y01) / (x00 * x11 - x01 * x01);
        if !(det_ratio > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let lo = det_ratio / hi;
        return Ok((hi.ln().powi(2) + lo.ln().powi(2)).sqrt());
    }
    // ln_1p keeps precision when both eigenvalues are close to one
    let (a, b) = ((mean - 1.0 + r).ln_1p(), (mean - 1.0 - r).ln_1p());
    Ok((a * a + b * b).sqrt())
}

/// `gamma X gamma^T` rescaled to determinant one. Any nonsingular real
/// `gamma` is accepted; it acts through its image in `PGL_n(R)`.
pub fn act(gamma: &DMatrix<f64>, x: &SymPoint) -> Result<SymPoint> {
    if gamma.nrows() != x.n() || gamma.ncols() != x.n() {
        return Err(Error::Dimension("group element and point differ in rank".into()));
    }
    let det = gamma.determinant();
    if !det.is_finite() || det.abs() < 1e-300 {
        return Err(Error::Singular);
    }
    let scale = det.abs().powf(-2.0 / x.n() as f64);
    SymPoint::normalized(gamma * &x.y * gamma.transpose() * scale)
}

/// [`act`] for an integer matrix given row-major.
pub fn act_int(gamma: &[i64], x: &SymPoint) -> Result<SymPoint> {
    let n = x.n();
    let g = DMatrix::from_row_slice(n, n, &gamma.iter().map(|&v| v as f64).collect::<Vec<_>>());
    act(&g, x)
}

/// [`act`] for a rational matrix.
pub fn act_rational(gamma: &RatMatrix, x: &SymPoint) -> Result<SymPoint> {
    use num_traits::ToPrimitive;
    let n = gamma.n();
    let vals: Vec<f64> = gamma
        .entries()
        .iter()
        .map(|q| q.to_f64().ok_or_else(|| Error::InvalidArgument("entry out of range".into())))
        .collect::<Result<_>>()?;
    act(&DMatrix::from_row_slice(n, n, &vals), x)
}

/// A point together with the integer matrix `U` of determinant one such
/// that `U^T Y_original U = Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedPoint {
    pub point: SymPoint,
    /// Row-major.
    pub reducer: Vec<i64>,
}

/// Reduces `x` toward a fundamental domain of `SL_n(Z)`. For `n = 2` this is
/// Gauss reduction into `|Re z| <= 1/2, |z| >= 1`, with the left edge and the
/// left half of the arc chosen on the boundary. For `n >= 3` it is LLL
/// reduction of `Y` as a Gram matrix, followed by a sign normalization making
/// the superdiagonal non-negative where the determinant allows it.
pub fn reduce(x: &SymPoint) -> Result<ReducedPoint> {
    if x.n() == 2 {
        reduce_2(x)
    } else {
        reduce_lll(x)
    }
}

fn conj(y: &DMatrix<f64>, u: &[i64]) -> DMatrix<f64> {
    let n = y.nrows();
    let um = DMatrix::from_row_slice(n, n, &u.iter().map(|&v| v as f64).collect::<Vec<_>>());
    symmetrize(um.transpose() * y * um)
}

fn stalled<T>(steps: usize) -> Result<T> {
    Err(Error::ReductionStalled(steps))
}

fn reduce_2(x: &SymPoint) -> Result<ReducedPoint> {
    // columns e0, e1 of u; the translation e0 -= m e1 shifts x by -m and
    // (e0, e1) -> (e1, -e0) is z -> -1/z
    let mut u = [1i64, 0, 0, 1];
    let y0 = &x.y;
    let (mut a, mut b, mut c) = (y0[(0, 0)], y0[(0, 1)], y0[(1, 1)]);
    let mut steps = 0usize;
    let translate = |u: &mut [i64; 4], m: i64| -> Option<()> {
        u[0] = u[0].checked_sub(m.checked_mul(u[1])?)?;
        u[2] = u[2].checked_sub(m.checked_mul(u[3])?)?;
        Some(())
    };
    let invert = |u: &mut [i64; 4]| {
        *u = [u[1], -u[0], u[3], -u[2]];
    };
    loop {
        steps += 1;
        if steps > REDUCTION_STEP_CAP {
            return stalled(steps);
        }
        let m = (b / c).round();
        if m != 0.0 {
            if m.abs() > 1e15 || translate(&mut u, m as i64).is_none() {
                return stalled(steps);
            }
            let g = conj(y0, &u);
            (a, b, c) = (g[(0, 0)], g[(0, 1)], g[(1, 1)]);
        }
        if a < c * (1.0 - 4.0 * f64::EPSILON) {
            invert(&mut u);
            let g = conj(y0, &u);
            (a, b, c) = (g[(0, 0)], g[(0, 1)], g[(1, 1)]);
            continue;
        }
        break;
    }
    // boundary identifications: x = 1/2 ~ x = -1/2, and z ~ -1/z on |z| = 1
    let mut zx = b / c;
    if zx > 0.5 - BOUNDARY_TOLERANCE {
        translate(&mut u, 1).ok_or(Error::ReductionStalled(steps))?;
        let g = conj(y0, &u);
        (a, b, c) = (g[(0, 0)], g[(0, 1)], g[(1, 1)]);
        zx = b / c;
    }
    if (a - c).abs() <= BOUNDARY_TOLERANCE * c && zx > BOUNDARY_TOLERANCE {
        invert(&mut u);
        let g = conj(y0, &u);
        (b, c) = (g[(0, 1)], g[(1, 1)]);
        zx = b / c;
    }
    let point = SymPoint { y: half_plane_matrix(zx, 1.0 / c) };
    Ok(ReducedPoint { point, reducer: u.to_vec() })
}

/// Gram-Schmidt data from a Gram matrix: `(mu, |b*_i|^2)`.
fn gram_schmidt(g: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let n = g.nrows();
    let mut mu = DMatrix::zeros(n, n);
    let mut bstar = vec![0.0; n];
    for i in 0..n {
        for j in 0..i {
            let mut v = g[(i, j)];
            for k in 0..j {
                v -= mu[(j, k)] * mu[(i, k)] * bstar[k];
            }
            mu[(i, j)] = v / bstar[j];
        }
        let mut v = g[(i, i)];
        for k in 0..i {
            v -= mu[(i, k)] * mu[(i, k)] * bstar[k];
        }
        bstar[i] = v;
    }
    (mu, bstar)
}

fn column_axpy(u: &mut [i64], n: usize, target: usize, source: usize, q: i64) -> Option<()> {
    for r in 0..n {
        let v = q.checked_mul(u[r * n + source])?;
        u[r * n + target] = u[r * n + target].checked_sub(v)?;
    }
    Some(())
}

fn reduce_lll(x: &SymPoint) -> Result<ReducedPoint> {
    let n = x.n();
    let mut u = vec![0i64; n * n];
    for i in 0..n {
        u[i * n + i] = 1;
    }
    let mut g = x.y.clone();
    let mut k = 1usize;
    let mut steps = 0usize;
    while k < n {
        steps += 1;
        if steps > REDUCTION_STEP_CAP {
            return stalled(steps);
        }
        for j in (0..k).rev() {
            let (mu, _) = gram_schmidt(&g);
            let q = mu[(k, j)].round();
            if q != 0.0 {
                if q.abs() > 1e15 || column_axpy(&mut u, n, k, j, q as i64).is_none() {
                    return stalled(steps);
                }
                g = conj(&x.y, &u);
            }
        }
        let (mu, bstar) = gram_schmidt(&g);
        let m = mu[(k, k - 1)];
        if bstar[k] >= (LLL_DELTA - m * m) * bstar[k - 1] {
            k += 1;
        } else {
            for r in 0..n {
                u.swap(r * n + k, r * n + k - 1);
            }
            g = conj(&x.y, &u);
            k = (k - 1).max(1);
        }
    }
    // column signs making the superdiagonal non-negative; for even n a
    // determinant fix costs the sign of the first superdiagonal entry, and
    // the overall sign is fixed by the last column since -I acts trivially
    let mut signs = vec![1i64; n];
    for i in 1..n {
        signs[i] = if g[(i - 1, i)] < 0.0 { -signs[i - 1] } else { signs[i - 1] };
    }
    let flips = signs.iter().filter(|&&s| s < 0).count();
    if (int_det(&u, n) < 0) != (flips % 2 == 1) {
        if n % 2 == 1 {
            signs.iter_mut().for_each(|s| *s = -*s);
        } else {
            signs[0] = -signs[0];
        }
    }
    if n.is_multiple_of(2) && signs[n - 1] < 0 {
        signs.iter_mut().for_each(|s| *s = -*s);
    }
    if signs.iter().any(|&s| s < 0) {
        for r in 0..n {
            for c in 0..n {
                u[r * n + c] *= signs[c];
            }
        }
        g = conj(&x.y, &u);
    }
    Ok(ReducedPoint { point: SymPoint::normalized(g)?, reducer: u })
}

/// Determinant of a small integer matrix by cofactor expansion (exact in
/// `i128` for the entry sizes met here).
pub fn int_det(u: &[i64], n: usize) -> i128 {
    fn rec(m: &[i128], n: usize) -> i128 {
        if n == 1 {
            return m[0];
        }
        let mut acc = 0i128;
        for c in 0..n {
            if m[c] == 0 {
                continue;
            }
            let minor: Vec<i128> = (1..n)
                .flat_map(|r| (0..n).filter(move |&cc| cc != c).map(move |cc| (r, cc)))
                .map(|(r, cc)| m[r * n + cc])
                .collect();
            let term = m[c] * rec(&minor, n - 1);
            acc += if c % 2 == 0 { term } else { -term };
        }
        acc
    }
    rec(&u.iter().map(|&v| v as i128).collect::<Vec<_>>(), n)
}

/// Short unimodular matrices used to compare reduced representatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborSet {
    n: usize,
    mats: Vec<Vec<i64>>,
}

impl NeighborSet {
    /// For `n <= 3`: every determinant-one matrix with entries in
    /// `{-1, 0, 1}`. For larger `n`: signed permutations times `I +- E_ij`.
    /// Closed under inversion, taken modulo `+-1` when `n` is even, and
    /// listed with the identity first.
    pub fn standard(n: usize) -> Self {
        let mut set: BTreeSet<Vec<i64>> = BTreeSet::new();
        if n <= 3 {
            let total = 3usize.pow((n * n) as u32);
            let mut m = vec![0i64; n * n];
            for code in 0..total {
                let mut c = code;
                for v in m.iter_mut() {
                    *v = (c % 3) as i64 - 1;
                    c /= 3;
                }
                if int_det(&m, n) == 1 {
                    set.insert(canonical_sign(&m, n));
                }
            }
        } else {
            for perm in signed_permutations(n) {
                if int_det(&perm, n) != 1 {
                    continue;
                }
                set.insert(canonical_sign(&perm, n));
                for i in 0..n {
                    for j in 0..n {
                        if i == j {
                            continue;
                        }
                        for s in [-1i64, 1] {
                            let mut e = vec![0i64; n * n];
                            for d in 0..n {
                                e[d * n + d] = 1;
                            }
                            e[i * n + j] = s;
                            set.insert(canonical_sign(&int_mul(&perm, &e, n), n));
                        }
                    }
                }
            }
        }
        let inverses: Vec<Vec<i64>> = set.iter().map(|m| canonical_sign(&int_inverse(m, n), n)).collect();
        set.extend(inverses);
        let mut id = vec![0i64; n * n];
        for d in 0..n {
            id[d * n + d] = 1;
        }
        set.remove(&id);
        let mut mats = vec![id];
        mats.extend(set);
        Self { n, mats }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrices(&self) -> &[Vec<i64>] {
        &self.mats
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }
}

fn canonical_sign(m: &[i64], n: usize) -> Vec<i64> {
    if n % 2 == 1 {
        return m.to_vec();
    }
    let first = m.iter().find(|&&v| v != 0).copied().unwrap_or(1);
    if first < 0 {
        m.iter().map(|v| -v).collect()
    } else {
        m.to_vec()
    }
}

/// Inverse of a determinant-one integer matrix via cofactors.
fn int_inverse(m: &[i64], n: usize) -> Vec<i64> {
    let mut inv = vec![0i64; n * n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<i64> = (0..n)
                .filter(|&r| r != j)
                .flat_map(|r| (0..n).filter(move |&c| c != i).map(move |c| (r, c)))
                .map(|(r, c)| m[r * n + c])
                .collect();
            let cof = if n == 1 { 1 } else { int_det(&minor, n - 1) as i64 };
            inv[i * n + j] = if (i + j) % 2 == 0 { cof } else { -cof };
        }
    }
    inv
}

fn int_mul(a: &[i64], b: &[i64], n: usize) -> Vec<i64> {
    let mut out = vec![0i64; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik != 0 {
                for j in 0..n {
                    out[i * n + j] += aik * b[k * n + j];
                }
            }
        }
    }
    out
}

fn signed_permutations(n: usize) -> Vec<Vec<i64>> {
    fn perms(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == items.len() {
            out.push(items.clone());
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            perms(items, k + 1, out);
            items.swap(k, i);
        }
    }
    let mut ps = Vec::new();
    perms(&mut (0..n).collect(), 0, &mut ps);
    let mut out = Vec::new();
    for p in ps {
        for signs in 0..(1u32 << n) {
            let mut m = vec![0i64; n * n];
            for (r, &c) in p.iter().enumerate() {
                m[r * n + c] = if signs >> r & 1 == 1 { -1 } else { 1 };
            }
            out.push(m);
        }
    }
    out
}

/// Upper bound for the distance in `SL_n(Z) \ H^n`:
/// `min_U d(X_red, U^T Y_red U)` over `U` in the standard neighbor set.
pub fn dist_in_x(x: &SymPoint, y: &SymPoint) -> Result<f64> {
    check_same_rank(x, y)?;
    dist_in_x_with(x, y, &NeighborSet::standard(x.n()))
}

pub fn dist_in_x_with(x: &SymPoint, y: &SymPoint, neighbors: &NeighborSet) -> Result<f64> {
    check_same_rank(x, y)?;
    let xr = reduce(x)?.point;
    let yr = reduce(y)?.point;
    let mut best = f64::INFINITY;
    for u in neighbors.matrices() {
        let lifted = yr.unimodular_conjugate(u);
        best = best.min(distance(&xr, &lifted)?);
    }
    Ok(best)
}

/// A random element of `SL_n(R)`: `Q R` with `Q` Haar-random orthogonal of
/// determinant one and `R` upper triangular with log-normal diagonal.
pub fn random_sl<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let gauss = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = gauss.qr();
    let (mut q, r0) = (qr.q(), qr.r());
    for j in 0..n {
        if r0[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    let mut r = DMatrix::zeros(n, n);
    for i in 0..n {
        r[(i, i)] = (0.5 * rng.sample::<f64, _>(StandardNormal)).exp();
        for j in i + 1..n {
            r[(i, j)] = rng.sample::<f64, _>(StandardNormal);
        }
    }
    let det: f64 = r.diagonal().iter().product();
    q * r * det.powf(-1.0 / n as f64)
}

/// Monte Carlo estimate of the Riemannian volume of a ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub n: usize,
    pub epsilon: f64,
    pub samples: u64,
    pub value: f64,
    pub stderr: f64,
}

/// Exact ball volume for `n = 2`: `8 pi sinh^2(eps / (2 sqrt 2))`.
pub fn ball_volume_exact_2(epsilon: f64) -> f64 {
    8.0 * PI * (epsilon / (2.0 * std::f64::consts::SQRT_2)).sinh().powi(2)
}

/// Density of the volume form in exponential coordinates at `I`:
/// `prod_{i<j} sinh(t) / t` with `t = (h_i - h_j) / 2` over eigenvalues `h`.
pub fn exp_jacobian(h: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(h.clone()).eigenvalues;
    let n = eig.len();
    let mut j = 1.0;
    for a in 0..n {
        for b in a + 1..n {
            let t = 0.5 * (eig[a] - eig[b]).abs();
            if t > 1e-12 {
                j *= t.sinh() / t;
            }
        }
    }
    j
}

/// Volume of `{Y : d(I, Y) <= epsilon}`. For `n = 2` the radius is sampled
/// uniformly with the polar density `2 sqrt(2) pi sinh(r / sqrt 2)`; for
/// `n >= 3` exponential coordinates are sampled uniformly in a cube,
/// rejected outside the ball and weighted by [`exp_jacobian`].
pub fn ball_volume_estimate(n: usize, epsilon: f64, samples: u64, seed: u64) -> Result<VolumeEstimate> {
    if n < 2 {
        return Err(Error::InvalidArgument("n must be at least 2".into()));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} outside [0, 1]")));
    }
    if samples < 1000 {
        return Err(Error::InvalidArgument("at least 1000 samples are required".into()));
    }
    if epsilon == 0.0 {
        return Ok(VolumeEstimate { n, epsilon, samples, value: 0.0, stderr: 0.0 });
    }
    if n == 2 {
        ball_volume_polar_2(epsilon, samples, seed)
    } else {
        ball_volume_cube(n, epsilon, samples, seed)
    }
}

fn ball_volume_polar_2(epsilon: f64, samples: u64, seed: u64) -> Result<VolumeEstimate> {
    let weights: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let r = epsilon * rng::stream(seed, Domain::BallVolume, i).gen::<f64>();
            epsilon * 2.0 * std::f64::consts::SQRT_2 * PI * (r / std::f64::consts::SQRT_2).sinh()
        })
        .collect();
    Ok(summarize(2, epsilon, &weights))
}

/// Cube-rejection estimator; valid for every `n >= 2`.
pub fn ball_volume_cube(n: usize, epsilon: f64, samples: u64, seed: u64) -> Result<VolumeEstimate> {
    let d = dimension(n);
    let cube = (2.0 * epsilon).powi(d as i32);
    let weights: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, Domain::BallVolume, i);
            let coords: Vec<f64> = (0..d).map(|_| epsilon * (2.0 * rng.gen::<f64>() - 1.0)).collect();
            if coords.iter().map(|c| c * c).sum::<f64>() > epsilon * epsilon {
                return 0.0;
            }
            let h = from_traceless_coordinates(n, &coords).expect("dimension matches");
            cube * exp_jacobian(&h)
        })
        .collect();
    Ok(summarize(n, epsilon, &weights))
}

fn summarize(n: usize, epsilon: f64, weights: &[f64]) -> VolumeEstimate {
    let m = weights.len() as f64;
    let mean = weights.iter().sum::<f64>() / m;
    let var = weights.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (m - 1.0);
    VolumeEstimate { n, epsilon, samples: weights.len() as u64, value: mean, stderr: (var / m).sqrt() }
}

/// Least-squares slope of `log V` against `log epsilon`.
pub fn log_log_slope(estimates: &[VolumeEstimate]) -> f64 {
    let pts: Vec<(f64, f64)> = estimates.iter().map(|e| (e.epsilon.ln(), e.value.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
