use hecke_lab::hecke_enum::{self, Limits, Partition};
use hecke_lab::spherical::{self, Rho, SpectralParam};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use proptest::prelude::*;

/// Normalized parameter from free coordinates: subtract the mean so the sum is zero.
fn param(re: &[f64], im: &[f64]) -> SpectralParam {
    let n = re.len() as f64;
    let (mr, mi) = (re.iter().sum::<f64>() / n, im.iter().sum::<f64>() / n);
    SpectralParam::new(re.iter().zip(im).map(|(r, i)| Complex64::new(r - mr, i - mi)).collect())
}

fn tempered(n: usize) -> impl Strategy<Value = SpectralParam> {
    prop::collection::vec(-3.0..3.0f64, n).prop_map(move |im| param(&vec![0.0; n], &im))
}

fn general(n: usize) -> impl Strategy<Value = SpectralParam> {
    (prop::collection::vec(-1.0..1.0f64, n), prop::collection::vec(-3.0..3.0f64, n)).prop_map(|(re, im)| param(&re, &im))
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weyl_invariance((n, mu) in (2usize..=4).prop_flat_map(|n| (Just(n), general(n))),
                       l in 0u32..=3, p in prop::sample::select(vec![2u64, 3]), seed in any::<u64>()) {
        let h = spherical::spherical_transform_h(n, p, l, &mu).unwrap();
        // a pseudo-random permutation from the seed
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let hw = spherical::spherical_transform_h(n, p, l, &mu.permuted(&perm)).unwrap();
        prop_assert!(close(hw, h, 1e-9), "{h} vs {hw}");
    }

    #[test]
    fn oracle_equivalence(n in 2usize..=4, l in 0u32..=3, p in prop::sample::select(vec![2u64, 3]),
                          re in prop::collection::vec(-1.0..1.0f64, 4), im in prop::collection::vec(-3.0..3.0f64, 4),
                          is_tempered in any::<bool>()) {
        let re = if is_tempered { vec![0.0; n] } else { re[..n].to_vec() };
        let mu = param(&re, &im[..n]);
        let lambda = spherical::hecke_eigenvalue_lambda(n, p, l, &mu).unwrap();
        let oracle = spherical::symmetric_oracle(n, p, l, &mu).unwrap();
        prop_assert!(spherical::relative_delta(lambda, oracle) <= 1e-9);
    }

    #[test]
    fn tempered_contraction((n, mu) in (2usize..=4).prop_flat_map(|n| (Just(n), tempered(n))),
                            l in 0u32..=4, p in prop::sample::select(vec![2u64, 3, 5])) {
        let h = spherical::spherical_transform_h(n, p, l, &mu).unwrap();
        prop_assert!(h.norm() <= 1.0 + 1e-12, "|h| = {}", h.norm());
        let lambda = spherical::hecke_eigenvalue_lambda(n, p, l, &mu).unwrap();
        prop_assert!(lambda.norm() <= spherical::monomial_count(n, l) * (1.0 + 1e-12));
    }

    #[test]
    fn eigenvalue_bound((n, mu) in (2usize..=3).prop_flat_map(|n| (Just(n), general(n))),
                        l in 0u32..=4, p in prop::sample::select(vec![2u64, 3])) {
        let lambda = spherical::hecke_eigenvalue_lambda(n, p, l, &mu).unwrap();
        let bound = spherical::monomial_count(n, l) * (p as f64).powf(l as f64 * mu.theta());
        prop_assert!(lambda.norm() <= bound * (1.0 + 1e-12), "{} > {bound}", lambda.norm());
    }
}

#[test]
fn transform_at_minus_rho() {
    for n in 2..=4 {
        let minus_rho = Rho::new(n).negated();
        for p in [2, 3, 5] {
            for l in 0..=3 {
                let h = spherical::spherical_transform_h(n, p, l, &minus_rho).unwrap();
                assert!((h - 1.0).norm() <= 1e-12, "n={n} p={p} l={l}: {h}");
            }
        }
    }
}

#[test]
fn partition_decomposition() {
    let limits = Limits::default();
    let mu = param(&[0.2, -0.1, -0.1], &[1.0, 0.3, -1.3]);
    for l in 0..=3 {
        let total = hecke_enum::coset_count(3, 2, l).unwrap().to_f64().unwrap();
        let mut acc = Complex64::new(0.0, 0.0);
        for q in Partition::all_of_weight(3, l) {
            let size = hecke_enum::double_coset_size(3, 2, &q, &limits).unwrap() as f64;
            acc += spherical::spherical_function(3, 2, &q, &mu, &limits).unwrap() * (size / total);
        }
        let h = spherical::spherical_transform_h(3, 2, l, &mu).unwrap();
        assert!(close(acc, h, 1e-10), "l={l}: {acc} vs {h}");
    }
}
