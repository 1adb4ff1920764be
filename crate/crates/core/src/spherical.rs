//! Characters of the diagonal torus, p-adic spherical functions and the
//! spherical transform of the normalized Hecke indicator `h_{p^l}`.
//!
//! For a left-`K`-invariant `h` the transform against `eta_mu` folds into a
//! plain character sum, `int h(g) chi_{mu+rho}(a(g)) dg`, where `a(g)` is
//! the Iwasawa `A`-part. On a column-HNF representative that is just its
//! diagonal, so every transform here is a finite sum over coset
//! representatives. No c-function is involved.

use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hecke_enum::{self, Limits, Partition};

/// Tolerance for the `sum mu_i = 0` normalization.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// A Langlands parameter `mu` in the complexified coroot space.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralParam {
    mu: Vec<Complex64>,
    normalized: bool,
}

impl SpectralParam {
    pub fn new(mu: Vec<Complex64>) -> Self {
        let normalized = mu.iter().sum::<Complex64>().norm() < NORMALIZATION_TOL;
        Self { mu, normalized }
    }

    pub fn from_real(mu: &[f64]) -> Self {
        Self::new(mu.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Parses entries such as `"0.3+2j"`, `"-1.5"`, `"2i"` or `"-0.3-2j"`.
    pub fn parse(items: &[&str]) -> Result<Self> {
        items.iter().map(|s| parse_complex(s)).collect::<Result<Vec<_>>>().map(Self::new)
    }

    pub fn mu(&self) -> &[Complex64] {
        &self.mu
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `max_i |Re mu_i|`; zero exactly for tempered parameters.
    pub fn theta(&self) -> f64 {
        self.mu.iter().map(|z| z.re.abs()).fold(0.0, f64::max)
    }

    pub fn is_dominant(&self) -> bool {
        self.mu.windows(2).all(|w| w[0].re >= w[1].re)
    }

    /// The Weyl conjugate with non-increasing real parts (stable sort).
    pub fn sort_to_dominant(&self) -> Self {
        let mut mu = self.mu.clone();
        mu.sort_by(|a, b| b.re.total_cmp(&a.re));
        Self { mu, normalized: self.normalized }
    }

    /// Applies a coordinate permutation: entry `i` becomes `mu[perm[i]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self { mu: perm.iter().map(|&i| self.mu[i]).collect(), normalized: self.normalized }
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.mu.iter().map(|z| format_complex(*z)).collect()
    }

    fn shifted(&self, shift: &[f64]) -> Vec<Complex64> {
        self.mu.iter().zip(shift).map(|(m, s)| m + s).collect()
    }
}

pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("cannot parse complex number {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    let imag_suffix = t.ends_with('j') || t.ends_with('i');
    if !imag_suffix {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    }
    let body = &t[..t.len() - 1];
    // split at the last sign that is not part of an exponent or leading
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let parse_im = |x: &str| -> Result<f64> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(Complex64::new(re, parse_im(&body[k..])?))
        }
        None => Ok(Complex64::new(0.0, parse_im(body)?)),
    }
}

pub fn format_complex(z: Complex64) -> String {
    if z.im < 0.0 || (z.im == 0.0 && z.im.is_sign_negative()) {
        format!("{}-{}j", z.re, -z.im)
    } else {
        format!("{}+{}j", z.re, z.im)
    }
}

/// Half-sum of positive roots, `((n-1)/2, (n-3)/2, ..., -(n-1)/2)`, held as
/// twice its value so it stays integral.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rho {
    twice: Vec<i64>,
}

impl Rho {
    pub fn new(n: usize) -> Self {
        let n = n as i64;
        Self { twice: (0..n).map(|i| n - 1 - 2 * i).collect() }
    }

    pub fn twice(&self) -> &[i64] {
        &self.twice
    }

    pub fn components(&self) -> Vec<f64> {
        self.twice.iter().map(|&t| t as f64 / 2.0).collect()
    }

    pub fn as_param(&self) -> SpectralParam {
        SpectralParam::from_real(&self.components())
    }

    pub fn negated(&self) -> SpectralParam {
        SpectralParam::from_real(&self.components().iter().map(|x| -x).collect::<Vec<_>>())
    }
}

/// Exponent (in base `p`) of `chi_mu(diag(p^{v_1}, ..., p^{v_n}))`, i.e.
/// `-sum v_i mu_i` since `|p^v|_p = p^{-v}`.
fn chi_exponent(mu: &[Complex64], vals: &[u32]) -> Complex64 {
    mu.iter().zip(vals).map(|(m, &v)| -(v as f64) * m).sum()
}

/// `chi_mu(a) = prod_i |a_i|_p^{mu_i}` at `a = diag(p^{v_1}, ..., p^{v_n})`.
pub fn chi(mu: &SpectralParam, diag_valuations: &[u32], p: u64) -> Result<Complex64> {
    if mu.n() != diag_valuations.len() {
        return Err(Error::Dimension("parameter and torus element differ in rank".into()));
    }
    Ok((chi_exponent(mu.mu(), diag_valuations) * (p as f64).ln()).exp())
}

fn check_rank(n: usize, mu: &SpectralParam) -> Result<()> {
    if mu.n() != n {
        return Err(Error::Dimension(format!("expected {n} coordinates, got {}", mu.n())));
    }
    Ok(())
}

/// Sum over diagonal shapes of `multiplicity * p^{extra} * chi_{mu+rho}`,
/// each term exponentiated once from its accumulated log.
fn character_sum(n: usize, p: u64, l: u32, mu: &SpectralParam, log_extra: f64) -> Result<Complex64> {
    let ln_p = (p as f64).ln();
    let shifted = mu.shifted(&Rho::new(n).components());
    let mut acc = Complex64::new(0.0, 0.0);
    for (vals, _) in hecke_enum::diagonal_shapes(n, p, l)? {
        // the shape multiplicity is p^{sum v_i (n-1-i)}
        let mult_exp: u64 = vals.iter().enumerate().map(|(i, &v)| v as u64 * (n - 1 - i) as u64).sum();
        let log_term = (chi_exponent(&shifted, &vals) + mult_exp as f64) * ln_p + log_extra;
        acc += log_term.exp();
    }
    Ok(acc)
}

/// `h~_{p^l}(mu) = N^{-1} sum_b chi_{mu+rho}(a(b))` over the `N` left-coset
/// representatives `b` of `M(p^l)`.
pub fn spherical_transform_h(n: usize, p: u64, l: u32, mu: &SpectralParam) -> Result<Complex64> {
    check_rank(n, mu)?;
    let count = hecke_enum::coset_count(n, p, l)?;
    let log_count = big_ln(&count);
    character_sum(n, p, l, mu, -log_count)
}

/// The same transform, summed literally over the enumerated representatives.
pub fn spherical_transform_h_enumerated(
    n: usize,
    p: u64,
    l: u32,
    mu: &SpectralParam,
    limits: &Limits,
) -> Result<Complex64> {
    check_rank(n, mu)?;
    let shifted = SpectralParam::new(mu.shifted(&Rho::new(n).components()));
    let mut acc = Complex64::new(0.0, 0.0);
    let mut count = 0u64;
    hecke_enum::visit_cosets(n, p, l, limits, |vals, _| {
        acc += chi(&shifted, vals, p).expect("rank checked");
        count += 1;
    })?;
    Ok(acc / count as f64)
}

/// `lambda_mu(p^l) = h~_{p^l}(mu) * m(M(p^l)) * p^{-l(n-1)/2}` with
/// `m(K) = 1`, so that `m(M(p^l))` is the coset count.
pub fn hecke_eigenvalue_lambda(n: usize, p: u64, l: u32, mu: &SpectralParam) -> Result<Complex64> {
    check_rank(n, mu)?;
    let log_norm = -(l as f64) * (n as f64 - 1.0) / 2.0 * (p as f64).ln();
    character_sum(n, p, l, mu, log_norm)
}

/// Satake parameters `alpha_i = p^{-mu_i}`. This is the convention under
/// which the coset-sum eigenvalue equals `h_l(alpha)`.
pub fn satake_parameters(p: u64, mu: &SpectralParam) -> Vec<Complex64> {
    let ln_p = (p as f64).ln();
    mu.mu().iter().map(|m| (-m * ln_p).exp()).collect()
}

/// Complete homogeneous symmetric polynomial `h_l(alpha_1, ..., alpha_n)`
/// evaluated by summing one monomial per multiset of size `l`.
pub fn complete_homogeneous(alpha: &[Complex64], l: u32) -> Complex64 {
    fn rec(alpha: &[Complex64], start: usize, left: u32, prod: Complex64, acc: &mut Complex64) {
        if left == 0 {
            *acc += prod;
            return;
        }
        for i in start..alpha.len() {
            rec(alpha, i, left - 1, prod * alpha[i], acc);
        }
    }
    let mut acc = Complex64::new(0.0, 0.0);
    rec(alpha, 0, l, Complex64::new(1.0, 0.0), &mut acc);
    acc
}

/// Independent evaluation of `lambda_mu(p^l)` from the Satake parameters.
pub fn symmetric_oracle(n: usize, p: u64, l: u32, mu: &SpectralParam) -> Result<Complex64> {
    check_rank(n, mu)?;
    Ok(complete_homogeneous(&satake_parameters(p, mu), l))
}

fn big_ln(x: &num_bigint::BigUint) -> f64 {
    // ln of a possibly huge integer via its top bits
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("finite");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `eta_mu(diag(p^{l_1}, ..., p^{l_n}))`: the average of `chi_{mu+rho}(a(b))`
/// over the left cosets `b` of the single double coset labelled by `partition`.
pub fn spherical_function(
    n: usize,
    p: u64,
    partition: &Partition,
    mu: &SpectralParam,
    limits: &Limits,
) -> Result<Complex64> {
    check_rank(n, mu)?;
    if partition.parts().len() != n {
        return Err(Error::Dimension(format!("partition {partition} has the wrong length")));
    }
    let shifted = SpectralParam::new(mu.shifted(&Rho::new(n).components()));
    let l = partition.weight();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut count = 0u64;
    for rep in hecke_enum::enumerate_cosets(n, p, l, limits)? {
        if &hecke_enum::partition_of(&rep) == partition {
            acc += chi(&shifted, &rep.diag_valuations, p)?;
            count += 1;
        }
    }
    Ok(acc / count as f64)
}

/// Outcome of comparing `|eta_mu(a)|` against `chi_{-rho(1-delta)+Re mu}(a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaBoundReport {
    pub partition: Partition,
    pub eta_abs: f64,
    pub bound: f64,
    pub ratio: f64,
    pub constant: f64,
    pub pass: bool,
}

/// Ratio `|eta_mu(a)| / chi_{-rho(1-delta) + Re mu}(a)` at the torus element
/// labelled by `partition`. `mu` must be dominant; use
/// [`SpectralParam::sort_to_dominant`] first.
pub fn check_eta_bound(
    n: usize,
    p: u64,
    partition: &Partition,
    mu: &SpectralParam,
    delta: f64,
    constant: f64,
    limits: &Limits,
) -> Result<EtaBoundReport> {
    check_rank(n, mu)?;
    if !mu.is_dominant() {
        return Err(Error::NotDominant);
    }
    let eta = spherical_function(n, p, partition, mu, limits)?;
    let rho = Rho::new(n).components();
    let weight: Vec<Complex64> = mu
        .mu()
        .iter()
        .zip(&rho)
        .map(|(m, r)| Complex64::new(-(1.0 - delta) * r + m.re, 0.0))
        .collect();
    let bound = (chi_exponent(&weight, partition.parts()).re * (p as f64).ln()).exp();
    let ratio = eta.norm() / bound;
    Ok(EtaBoundReport {
        partition: partition.clone(),
        eta_abs: eta.norm(),
        bound,
        ratio,
        constant,
        pass: ratio <= constant,
    })
}

/// Runs [`check_eta_bound`] over every partition of weight `0..=max_l`.
pub fn sweep_eta_bound(
    n: usize,
    p: u64,
    max_l: u32,
    mu: &SpectralParam,
    delta: f64,
    constant: f64,
    limits: &Limits,
) -> Result<Vec<EtaBoundReport>> {
    let mut out = Vec::new();
    for l in 0..=max_l {
        for q in Partition::all_of_weight(n, l) {
            out.push(check_eta_bound(n, p, &q, mu, delta, constant, limits)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

/// Evaluation bundle returned by the command-line surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphericalEval {
    pub n: usize,
    pub p: u64,
    pub l: u32,
    pub mu: Vec<String>,
    pub h_tilde: ComplexValue,
    pub lambda: ComplexValue,
    pub theta: f64,
    pub oracle: ComplexValue,
    pub oracle_delta: f64,
}

pub fn evaluate(n: usize, p: u64, l: u32, mu: &SpectralParam) -> Result<SphericalEval> {
    let h = spherical_transform_h(n, p, l, mu)?;
    let lambda = hecke_eigenvalue_lambda(n, p, l, mu)?;
    let oracle = symmetric_oracle(n, p, l, mu)?;
    Ok(SphericalEval {
        n,
        p,
        l,
        mu: mu.to_strings(),
        h_tilde: h.into(),
        lambda: lambda.into(),
        theta: mu.theta(),
        oracle: oracle.into(),
        oracle_delta: relative_delta(lambda, oracle),
    })
}

pub fn relative_delta(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// `C(l + n - 1, n - 1)`, the number of monomials of degree `l` in `n` variables.
pub fn monomial_count(n: usize, l: u32) -> f64 {
    let (top, k) = (l as u64 + n as u64 - 1, n as u64 - 1);
    (0..k).fold(1.0, |acc, i| acc * (top - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    fn lim() -> Limits {
        Limits::default()
    }

    #[test]
    fn theta_examples() {
        let t = 1.7;
        assert_eq!(SpectralParam::new(vec![c(0.0, t), c(0.0, -t)]).theta(), 0.0);
        assert_eq!(Rho::new(2).negated().theta(), 0.5);
        let mu = SpectralParam::new(vec![c(0.3, 2.0), c(-0.3, -2.0)]);
        assert!((mu.theta() - 0.3).abs() < 1e-15);
        assert!(mu.is_normalized());
    }

    #[test]
    fn rho_is_antisymmetric() {
        for n in 2..6 {
            let r = Rho::new(n).components();
            assert_eq!(r.iter().sum::<f64>(), 0.0);
            let mut rev = r.clone();
            rev.reverse();
            assert!(r.iter().zip(&rev).all(|(a, b)| *a == -b));
        }
        assert_eq!(Rho::new(3).components(), vec![1.0, 0.0, -1.0]);
    }

    #[test]
    fn chi_examples() {
        let p = 3;
        let mu = SpectralParam::new(vec![c(0.2, 1.0), c(-0.2, -1.0)]);
        assert!(close(chi(&mu, &[0, 0], p).unwrap(), c(1.0, 0.0), TOL));
        let two_rho = SpectralParam::from_real(&[1.0, -1.0]);
        assert!(close(chi(&two_rho, &[0, 1], p).unwrap(), c(3.0, 0.0), TOL));
        let s = c(0.4, 0.9);
        let mu = SpectralParam::new(vec![s, -s]);
        let expect = (-s * 3f64.ln()).exp();
        assert!(close(chi(&mu, &[1, 0], p).unwrap(), expect, TOL));
    }

    #[test]
    fn parsing() {
        assert_eq!(parse_complex("0.3+2j").unwrap(), c(0.3, 2.0));
        assert_eq!(parse_complex("-0.3-2j").unwrap(), c(-0.3, -2.0));
        assert_eq!(parse_complex("1.5").unwrap(), c(1.5, 0.0));
        assert_eq!(parse_complex("2i").unwrap(), c(0.0, 2.0));
        assert_eq!(parse_complex("-j").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("1e-3+1e-2j").unwrap(), c(1e-3, 1e-2));
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("").is_err());
        let z = c(-0.25, -3.5);
        assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
    }

    #[test]
    fn transform_at_minus_rho_is_one() {
        for n in 2..=4 {
            for p in [2, 3, 5] {
                for l in 0..=4 {
                    let h = spherical_transform_h(n, p, l, &Rho::new(n).negated()).unwrap();
                    assert!((h - c(1.0, 0.0)).norm() < TOL, "n={n} p={p} l={l}: {h}");
                }
            }
        }
    }

    #[test]
    fn transform_n2_l1_closed_form() {
        // 4-term coset sum at p = 3: (3 p^{-(s+1/2)} + p^{s+1/2}) / 4
        let p = 3u64;
        for s in [c(0.0, 0.7), c(0.35, -1.2), c(-0.8, 0.0)] {
            let mu = SpectralParam::new(vec![s, -s]);
            let pf = p as f64;
            let hand = (3.0 * (-(s + 0.5) * pf.ln()).exp() + ((s + 0.5) * pf.ln()).exp()) / 4.0;
            let closed = pf.sqrt() * ((s * pf.ln()).exp() + (-s * pf.ln()).exp()) / (pf + 1.0);
            let h = spherical_transform_h(2, p, 1, &mu).unwrap();
            assert!(close(h, hand, TOL) && close(h, closed, TOL));
            let lam = hecke_eigenvalue_lambda(2, p, 1, &mu).unwrap();
            assert!(close(lam, (s * pf.ln()).exp() + (-s * pf.ln()).exp(), TOL));
        }
    }

    #[test]
    fn trivial_level() {
        let mu = SpectralParam::new(vec![c(0.3, 1.0), c(0.1, 0.0), c(-0.4, -1.0)]);
        assert!(close(spherical_transform_h(3, 2, 0, &mu).unwrap(), c(1.0, 0.0), TOL));
        assert!(close(hecke_eigenvalue_lambda(3, 2, 0, &mu).unwrap(), c(1.0, 0.0), TOL));
        assert!(close(symmetric_oracle(3, 2, 0, &mu).unwrap(), c(1.0, 0.0), TOL));
    }

    #[test]
    fn lambda_at_minus_rho() {
        for p in [2u64, 3, 5] {
            let lam = hecke_eigenvalue_lambda(2, p, 1, &Rho::new(2).negated()).unwrap();
            let pf = p as f64;
            assert!(close(lam, c((pf + 1.0) / pf.sqrt(), 0.0), TOL));
        }
    }

    #[test]
    fn oracle_examples() {
        let p = 2u64;
        let s = c(0.3, 0.5);
        let mu = SpectralParam::new(vec![s, -s]);
        let e = |z: Complex64| (z * (p as f64).ln()).exp();
        let h2 = symmetric_oracle(2, p, 2, &mu).unwrap();
        assert!(close(h2, e(2.0 * s) + 1.0 + e(-2.0 * s), TOL));
        let mu3 = SpectralParam::new(vec![c(0.1, 0.2), c(0.4, -1.0), c(-0.2, 0.3)]);
        let h1 = symmetric_oracle(3, p, 1, &mu3).unwrap();
        let expect: Complex64 = mu3.mu().iter().map(|m| e(-*m)).sum();
        assert!(close(h1, expect, TOL));
    }

    #[test]
    fn enumerated_sum_matches_grouped_sum() {
        let mu = SpectralParam::new(vec![c(0.2, 0.3), c(-0.5, 1.1), c(0.3, -1.4)]);
        for (p, l) in [(2u64, 3u32), (3, 2)] {
            let a = spherical_transform_h(3, p, l, &mu).unwrap();
            let b = spherical_transform_h_enumerated(3, p, l, &mu, &lim()).unwrap();
            assert!(close(a, b, 1e-12));
        }
    }

    #[test]
    fn opposite_satake_convention_is_rejected() {
        // alpha_i = p^{+mu_i} agrees for n = 2 only by the symmetry mu -> -mu
        let mu = SpectralParam::from_real(&[0.6, -0.1, -0.5]);
        let lam = hecke_eigenvalue_lambda(3, 2, 2, &mu).unwrap();
        let flipped: Vec<Complex64> =
            mu.mu().iter().map(|m| (m * 2f64.ln()).exp()).collect();
        let wrong = complete_homogeneous(&flipped, 2);
        assert!(relative_delta(lam, wrong) > 1e-3);
        assert!(relative_delta(lam, symmetric_oracle(3, 2, 2, &mu).unwrap()) < 1e-12);
    }

    #[test]
    fn spherical_function_examples() {
        let zero = SpectralParam::from_real(&[0.0, 0.0]);
        for p in [2u64, 3, 5] {
            let pf = p as f64;
            let eta = spherical_function(2, p, &Partition::new(vec![0, 1]).unwrap(), &zero, &lim())
                .unwrap();
            assert!(close(eta, c(2.0 * pf.sqrt() / (pf + 1.0), 0.0), TOL));
            let at_id = spherical_function(2, p, &Partition::new(vec![0, 0]).unwrap(), &zero, &lim())
                .unwrap();
            assert!(close(at_id, c(1.0, 0.0), TOL));
        }
        for n in 2..=3 {
            for q in Partition::all_of_weight(n, 3) {
                let eta = spherical_function(n, 2, &q, &Rho::new(n).negated(), &lim()).unwrap();
                assert!(close(eta, c(1.0, 0.0), TOL), "{q}");
            }
        }
    }

    #[test]
    fn eta_bound_checks() {
        let tempered = SpectralParam::new(vec![c(0.0, 0.8), c(0.0, -0.8)]).sort_to_dominant();
        for p in [2u64, 3, 5] {
            let r = check_eta_bound(2, p, &Partition::new(vec![0, 1]).unwrap(), &tempered, 0.1, 3.0, &lim())
                .unwrap();
            assert!(r.pass && r.ratio <= 3.0, "{r:?}");
        }
        let r = check_eta_bound(2, 2, &Partition::new(vec![0, 0]).unwrap(), &tempered, 0.1, 3.0, &lim())
            .unwrap();
        assert!((r.ratio - 1.0).abs() < TOL);

        let rho = Rho::new(3).as_param();
        let sweep = sweep_eta_bound(3, 2, 3, &rho, 0.1, 1e6, &lim()).unwrap();
        assert!(sweep.iter().all(|r| r.ratio.is_finite()));

        let not_dominant = Rho::new(2).negated();
        assert_eq!(
            check_eta_bound(2, 2, &Partition::new(vec![0, 1]).unwrap(), &not_dominant, 0.1, 3.0, &lim()),
            Err(Error::NotDominant)
        );
    }

    #[test]
    fn partition_decomposition_of_the_transform() {
        let mu = SpectralParam::new(vec![c(0.3, 0.2), c(0.0, -0.7), c(-0.3, 0.5)]);
        for (n, p, l, mu) in [
            (2usize, 3u64, 3u32, SpectralParam::new(vec![c(0.1, 0.4), c(-0.1, -0.4)])),
            (3, 2, 3, mu),
        ] {
            let total = hecke_enum::coset_count(n, p, l).unwrap().to_f64().unwrap();
            let mut acc = c(0.0, 0.0);
            for (q, size) in hecke_enum::partition_buckets(n, p, l, &lim()).unwrap() {
                if size == 0 {
                    continue;
                }
                acc += spherical_function(n, p, &q, &mu, &lim()).unwrap() * (size as f64 / total);
            }
            assert!(close(acc, spherical_transform_h(n, p, l, &mu).unwrap(), 1e-12));
        }
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(monomial_count(2, 3), 4.0);
        assert_eq!(monomial_count(3, 2), 6.0);
        assert_eq!(monomial_count(4, 0), 1.0);
    }

    #[test]
    fn dominance_helper() {
        let mu = SpectralParam::from_real(&[-0.5, 0.2, 0.3]);
        assert!(!mu.is_dominant());
        let d = mu.sort_to_dominant();
        assert!(d.is_dominant());
        assert_eq!(d.mu()[0].re, 0.3);
    }

    #[test]
    fn evaluation_bundle() {
        let mu = SpectralParam::parse(&["0.3+2j", "-0.3-2j"]).unwrap();
        let ev = evaluate(2, 3, 2, &mu).unwrap();
        assert!(ev.oracle_delta < 1e-9);
        assert!((ev.theta - 0.3).abs() < 1e-15);
        assert_eq!(ev.mu, vec!["0.3+2j".to_string(), "-0.3-2j".to_string()]);
    }
}
