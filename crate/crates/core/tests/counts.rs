use cover_census::asymptotics::{log_natural, uvl_estimate};
use cover_census::cover_counts::{
    binomial_transform_u, full_table, line_transform, restricted_proper_sequence, stirling_transform,
};
use cover_census::exact_kernel::{bell, binomial, binomial_big, factorial, Natural, Rational};
use cover_census::series::EgfSeries;
use num_bigint::BigInt;
use num_traits::{One, Zero};

fn nat(s: &str) -> Natural {
    s.parse().unwrap()
}

// Exhaustive enumeration of all 2-covers of [n] and of their line graphs.
const ENUMERATED: [[u64; 5]; 8] = [
    [1, 1, 1, 1, 1],
    [1, 0, 1, 0, 1],
    [3, 1, 2, 1, 2],
    [16, 8, 9, 5, 8],
    [139, 80, 70, 43, 60],
    [1750, 1088, 794, 518, 729],
    [29388, 19232, 12055, 8186, 11600],
    [624889, 424400, 233238, 163356, 228443],
];

#[test]
fn table_matches_enumeration() {
    let table = full_table(10).unwrap();
    for (n, e) in ENUMERATED.iter().enumerate() {
        let r = table.row(n).unwrap();
        let got = [&r.s, &r.t, &r.u, &r.v, &r.l];
        for (g, &x) in got.iter().zip(e) {
            assert_eq!(**g, Natural::from(x), "n={n}");
        }
        assert_eq!(r.bell2n, bell(2 * n));
    }
    let r = table.row(10).unwrap();
    assert_eq!(r.s, nat("18353177160"));
    assert_eq!(r.t, nat("13386003873"));
    assert_eq!(r.u, nat("5350854707"));
    assert_eq!(r.v, nat("3985947805"));
}

#[test]
fn larger_frozen_values() {
    let table = full_table(20).unwrap();
    let r = table.row(16).unwrap();
    assert_eq!(r.s, nat("589356399302126773920"));
    assert_eq!(r.t, nat("462595509951068027741"));
    assert_eq!(r.u, nat("116818375064650241036"));
    assert_eq!(r.v, nat("92917890994442697487"));
    assert_eq!(r.l, nat("116439900807678600276"));
    let r = table.row(20).unwrap();
    assert_eq!(r.v, nat("5445981419109179732299426866"));
    assert_eq!(r.l, nat("6655808080842271861365560117"));
}

fn subfactorials(n: usize) -> Vec<BigInt> {
    let mut d = vec![BigInt::one(), BigInt::zero()];
    for r in 2..=n {
        let next = (r as i64 - 1) * (&d[r - 1] + &d[r - 2]);
        d.push(next);
    }
    d.truncate(n + 1);
    d
}

// Independent route: inclusion-exclusion over simple graphs on m labelled
// vertices with p edges, then removal of isolated vertices and loops.
fn v_by_graph_counts(max_n: usize) -> Vec<Natural> {
    let sub = subfactorials(2 * max_n);
    let w: Vec<BigInt> = (0..=max_n)
        .map(|p| {
            (0..=2 * p)
                .map(|m| {
                    let edges = binomial_big(&binomial(m, 2), p);
                    BigInt::from(edges * binomial(2 * p, m)) * &sub[2 * p - m]
                })
                .sum()
        })
        .collect();
    (0..=max_n)
        .map(|n| {
            let mut total = Rational::zero();
            for k in 0..=n {
                let num = BigInt::from(factorial(n)) * &w[n - k];
                let den = BigInt::from(factorial(k) * factorial(2 * (n - k))) << k;
                let term = Rational::new(num, den);
                if k % 2 == 0 {
                    total += term;
                } else {
                    total -= term;
                }
            }
            assert!(total.is_integer(), "n={n}");
            total.to_integer().to_biguint().expect("nonnegative")
        })
        .collect()
}

#[test]
fn restricted_proper_matches_graph_counting() {
    let n = 40;
    assert_eq!(restricted_proper_sequence(n).unwrap(), v_by_graph_counts(n));
}

#[test]
fn transforms_on_known_input() {
    let v: Vec<Natural> = [1u64, 0, 1, 5, 43].iter().map(|&x| x.into()).collect();
    let u = binomial_transform_u(&v);
    assert_eq!(u, [1u64, 1, 2, 9, 70].iter().map(|&x| x.into()).collect::<Vec<Natural>>());
    let t = stirling_transform(&v);
    assert_eq!(t, [1u64, 0, 1, 8, 80].iter().map(|&x| x.into()).collect::<Vec<Natural>>());
    let s = stirling_transform(&u);
    assert_eq!(s, [1u64, 1, 3, 16, 139].iter().map(|&x| x.into()).collect::<Vec<Natural>>());
    let ones = vec![Natural::one(); 8];
    let bells: Vec<Natural> = (0..8).map(bell).collect();
    assert_eq!(stirling_transform(&ones), bells);
}

#[test]
fn line_graphs_need_every_whitney_term() {
    let v = restricted_proper_sequence(7).unwrap();
    let series = EgfSeries::from_naturals(&v);
    let l = line_transform(&series).unwrap();
    let expected: Vec<Natural> = ENUMERATED.iter().map(|e| e[4].into()).collect();
    assert_eq!(l, expected);
    // Dropping everything but the triangle/claw term already fails at n = 4.
    let u = binomial_transform_u(&v);
    let triangle_only = EgfSeries::from_coeffs(&[
        Rational::zero(),
        Rational::zero(),
        Rational::zero(),
        Rational::new((-1).into(), 6.into()),
        Rational::zero(),
    ])
    .exp()
    .unwrap()
    .mul(&EgfSeries::from_naturals(&u[..5]))
    .unwrap();
    assert_eq!(triangle_only.egf_naturals().unwrap()[4], Natural::from(66u8));
}

#[test]
fn shared_estimator_ratios_approach_each_other() {
    let table = full_table(128).unwrap();
    let ratio = |x: &Natural, n: usize| {
        (log_natural(x) - uvl_estimate(n, log_natural(&bell(2 * n))).unwrap()).exp()
    };
    let mut previous_uv = f64::INFINITY;
    for n in [16usize, 32, 64, 128] {
        let r = table.row(n).unwrap();
        let (ru, rv, rl) = (ratio(&r.u, n), ratio(&r.v, n), ratio(&r.l, n));
        assert!((rl / ru - 1.0).abs() < 0.01, "n={n} u={ru} l={rl}");
        let uv = ru / rv;
        assert!(uv > 1.0 && uv < previous_uv, "n={n} u/v={uv}");
        previous_uv = uv;
    }
    // u_n / v_n = sum_k C(n,k) v_{n-k} / v_n only tends to 1 slowly.
    assert!(previous_uv < 1.1);
}
