//! Exact integer matrix algebra: determinants, column-style Hermite normal
//! form and Smith normal form over `BigInt`.
//!
//! Everything here is fraction-free. Matrices are small (n <= 5 in practice)
//! so the code favours clarity over asymptotics.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// A square matrix of arbitrary-precision integers, stored row-major.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct IntMatrix {
    n: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(n: usize, entries: Vec<BigInt>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension("matrix dimension must be at least 1".into()));
        }
        if entries.len() != n * n {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        Ok(Self { n, entries })
    }

    pub fn from_i64(n: usize, entries: &[i64]) -> Result<Self> {
        Self::new(n, entries.iter().map(|&e| BigInt::from(e)).collect())
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("rows must form a square matrix".into()));
        }
        Self::from_i64(n, &rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![BigInt::one(); n])
    }

    pub fn diagonal(diag: &[BigInt]) -> Self {
        let n = diag.len();
        let mut entries = vec![BigInt::zero(); n * n];
        for (i, d) in diag.iter().enumerate() {
            entries[i * n + i] = d.clone();
        }
        Self { n, entries }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: BigInt) {
        self.entries[i * self.n + j] = value;
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(self.get(j, i).clone());
            }
        }
        Self { n, entries }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension(format!("{} vs {}", self.n, other.n)));
        }
        let n = self.n;
        let mut entries = vec![BigInt::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] += a * other.get(k, j);
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j).is_zero()))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        use num_traits::ToPrimitive;
        self.entries.iter().map(|e| e.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// Entries as `i64`, or `None` if any entry overflows.
    pub fn to_i64(&self) -> Option<Vec<i64>> {
        use num_traits::ToPrimitive;
        self.entries.iter().map(|e| e.to_i64()).collect()
    }

    fn swap_columns(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.n {
            self.entries.swap(r * self.n + a, r * self.n + b);
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.n {
            self.entries.swap(a * self.n + c, b * self.n + c);
        }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.n {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Elementary divisors `d[0] | d[1] | ... | d[n-1]`, all positive.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DivisorChain {
    d: Vec<BigInt>,
}

impl DivisorChain {
    pub fn new(d: Vec<BigInt>) -> Result<Self> {
        if d.iter().any(|x| !x.is_positive()) {
            return Err(Error::InvalidArgument("elementary divisors must be positive".into()));
        }
        if d.windows(2).any(|w| !(&w[1] % &w[0]).is_zero()) {
            return Err(Error::InvalidArgument("divisors do not form a chain".into()));
        }
        Ok(Self { d })
    }

    pub fn divisors(&self) -> &[BigInt] {
        &self.d
    }

    pub fn product(&self) -> BigInt {
        self.d.iter().product()
    }
}

/// Exact determinant by Bareiss fraction-free elimination.
pub fn det(m: &IntMatrix) -> BigInt {
    let n = m.n;
    let mut a = m.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n.saturating_sub(1) {
        if a.get(k, k).is_zero() {
            match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                Some(i) => {
                    a.swap_rows(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                a.set(i, j, v);
            }
        }
        prev = a.get(k, k).clone();
    }
    sign * a.get(n - 1, n - 1)
}

/// Column-style Hermite normal form.
///
/// Returns the unique upper-triangular `H = M * U` (U unimodular) with
/// positive diagonal `d_i` and `0 <= H[i][j] < d_i` for `j > i`. Two
/// nonsingular matrices have the same column lattice iff their forms agree.
pub fn hnf_column(m: &IntMatrix) -> Result<IntMatrix> {
    let n = m.n;
    let mut h = m.clone();

    for i in (0..n).rev() {
        for j in 0..i {
            if h.get(i, j).is_zero() {
                continue;
            }
            let a = h.get(i, i).clone();
            let b = h.get(i, j).clone();
            let eg = a.extended_gcd(&b);
            let (g, x, y) = (eg.gcd, eg.x, eg.y);
            let (bg, ag) = (&b / &g, &a / &g);
            // [col_i, col_j] <- [col_i, col_j] * [[x, -b/g], [y, a/g]]  (det 1)
            for r in 0..=i {
                let ci = h.get(r, i).clone();
                let cj = h.get(r, j).clone();
                h.set(r, i, &x * &ci + &y * &cj);
                h.set(r, j, &ag * &cj - &bg * &ci);
            }
        }
        if h.get(i, i).is_zero() {
            return Err(Error::Singular);
        }
        if h.get(i, i).is_negative() {
            for r in 0..=i {
                let v = -h.get(r, i);
                h.set(r, i, v);
            }
        }
    }

    for i in (0..n).rev() {
        let d = h.get(i, i).clone();
        for j in i + 1..n {
            let q = h.get(i, j).div_floor(&d);
            if q.is_zero() {
                continue;
            }
            for r in 0..=i {
                let v = h.get(r, j) - &q * h.get(r, i);
                h.set(r, j, v);
            }
        }
    }
    Ok(h)
}

/// Smith normal form: the elementary divisors of a nonsingular matrix.
pub fn snf(m: &IntMatrix) -> Result<DivisorChain> {
    let n = m.n;
    let mut a = m.clone();
    for t in 0..n {
        loop {
            // pivot: nonzero entry of least magnitude in the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    let v = a.get(i, j);
                    if v.is_zero() {
                        continue;
                    }
                    if best.is_none_or(|(bi, bj)| v.abs() < a.get(bi, bj).abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let (pi, pj) = best.ok_or(Error::Singular)?;
            a.swap_rows(t, pi);
            a.swap_columns(t, pj);
            let piv = a.get(t, t).clone();

            let mut dirty = false;
            for i in t + 1..n {
                let q = a.get(i, t).div_floor(&piv);
                if !q.is_zero() {
                    for c in t..n {
                        let v = a.get(i, c) - &q * a.get(t, c);
                        a.set(i, c, v);
                    }
                }
                dirty |= !a.get(i, t).is_zero();
            }
            for j in t + 1..n {
                let q = a.get(t, j).div_floor(&piv);
                if !q.is_zero() {
                    for r in t..n {
                        let v = a.get(r, j) - &q * a.get(r, t);
                        a.set(r, j, v);
                    }
                }
                dirty |= !a.get(t, j).is_zero();
            }
            if dirty {
                continue;
            }
            // divisibility of the trailing block by the pivot
            let offender = (t + 1..n)
                .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                .find(|&(i, j)| !(a.get(i, j) % &piv).is_zero());
            match offender {
                Some((i, _)) => {
                    for c in t..n {
                        let v = a.get(t, c) + a.get(i, c);
                        a.set(t, c, v);
                    }
                }
                None => break,
            }
        }
    }
    DivisorChain::new((0..n).map(|i| a.get(i, i).abs()).collect())
}

/// A square matrix of rationals, used for elements of `SL_n(Z[1/p])`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatMatrix {
    n: usize,
    entries: Vec<BigRational>,
}

impl RatMatrix {
    pub fn new(n: usize, entries: Vec<BigRational>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::Dimension(format!("need {} entries", n * n)));
        }
        Ok(Self { n, entries })
    }

    /// Entries given as `(numerator, denominator)` pairs, row-major.
    pub fn from_fractions(n: usize, fracs: &[(i64, i64)]) -> Result<Self> {
        let mut entries = Vec::with_capacity(fracs.len());
        for &(num, den) in fracs {
            if den == 0 {
                return Err(Error::InvalidArgument("zero denominator".into()));
            }
            entries.push(BigRational::new(num.into(), den.into()));
        }
        Self::new(n, entries)
    }

    pub fn from_int(m: &IntMatrix) -> Self {
        Self {
            n: m.n,
            entries: m.entries.iter().map(|e| BigRational::from_integer(e.clone())).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        Self { n: self.n, entries: self.entries.iter().map(|e| e * factor).collect() }
    }

    /// Determinant by Gaussian elimination over Q.
    pub fn det(&self) -> BigRational {
        let n = self.n;
        let mut a = self.entries.clone();
        let mut acc = BigRational::one();
        for k in 0..n {
            let Some(pr) = (k..n).find(|&r| !a[r * n + k].is_zero()) else {
                return BigRational::zero();
            };
            if pr != k {
                for c in 0..n {
                    a.swap(pr * n + c, k * n + c);
                }
                acc = -acc;
            }
            let piv = a[k * n + k].clone();
            acc *= &piv;
            for r in k + 1..n {
                let f = &a[r * n + k] / &piv;
                if f.is_zero() {
                    continue;
                }
                for c in k..n {
                    let v = &a[k * n + c] * &f;
                    a[r * n + c] -= v;
                }
            }
        }
        acc
    }
}
