//! Shared integer machinery behind the rational series types.
//!
//! A coefficient `c` at index `k` (or `(n, m)`) is stored as an integer
//! numerator over `k! * den` (or `n! m! * den`), with one denominator per
//! series. Under that scaling a Cauchy product becomes a binomial convolution
//! of integers, so no gcd is taken inside the hot loops.

use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::exact_kernel::Rational;

fn pascal_cache() -> &'static RwLock<Arc<Vec<Vec<BigInt>>>> {
    static CACHE: OnceLock<RwLock<Arc<Vec<Vec<BigInt>>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(Arc::new(vec![vec![BigInt::one()]])))
}

fn factorial_cache() -> &'static RwLock<Arc<Vec<BigInt>>> {
    static CACHE: OnceLock<RwLock<Arc<Vec<BigInt>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(Arc::new(vec![BigInt::one()])))
}

/// Pascal rows `0..=n` (at least), shared across calls.
pub(crate) fn pascal(n: usize) -> Arc<Vec<Vec<BigInt>>> {
    {
        let rows = pascal_cache().read().unwrap();
        if rows.len() > n {
            return Arc::clone(&rows);
        }
    }
    let mut guard = pascal_cache().write().unwrap();
    if guard.len() <= n {
        let mut rows: Vec<Vec<BigInt>> = guard.as_ref().clone();
        while rows.len() <= n {
            let prev = &rows[rows.len() - 1];
            let mut row = Vec::with_capacity(prev.len() + 1);
            row.push(BigInt::one());
            for k in 1..prev.len() {
                row.push(&prev[k - 1] + &prev[k]);
            }
            row.push(BigInt::one());
            rows.push(row);
        }
        *guard = Arc::new(rows);
    }
    Arc::clone(&guard)
}

/// `0!..=n!` (at least), shared across calls.
pub(crate) fn factorials(n: usize) -> Arc<Vec<BigInt>> {
    {
        let f = factorial_cache().read().unwrap();
        if f.len() > n {
            return Arc::clone(&f);
        }
    }
    let mut guard = factorial_cache().write().unwrap();
    if guard.len() <= n {
        let mut f: Vec<BigInt> = guard.as_ref().clone();
        while f.len() <= n {
            let k = f.len();
            let v = &f[k - 1] * k;
            f.push(v);
        }
        *guard = Arc::new(f);
    }
    Arc::clone(&guard)
}

/// Divides numerators and denominator by their common gcd.
pub(crate) fn normalize(nums: &mut [BigInt], den: &mut BigUint) {
    if nums.iter().all(Zero::is_zero) {
        *den = BigUint::one();
        return;
    }
    let mut g = den.clone();
    for num in nums.iter() {
        if g.is_one() {
            return;
        }
        if !num.is_zero() {
            g = g.gcd(num.magnitude());
        }
    }
    if g.is_one() {
        return;
    }
    let g = BigInt::from_biguint(Sign::Plus, g);
    for num in nums.iter_mut() {
        if !num.is_zero() {
            *num = &*num / &g;
        }
    }
    *den = &*den / g.magnitude();
}

/// Integer numerators for rationals `values[i] * weights[i]` over a common denominator.
pub(crate) fn scale_rationals<'a, I>(values: I) -> (Vec<BigInt>, BigUint)
where
    I: IntoIterator<Item = (&'a Rational, &'a BigInt)>,
{
    let scaled: Vec<Rational> = values
        .into_iter()
        .map(|(v, w)| v * Rational::from_integer(w.clone()))
        .collect();
    let mut den = BigUint::one();
    for v in &scaled {
        let d = v.denom().magnitude();
        if !d.is_one() {
            den = den.lcm(d);
        }
    }
    let den_int = BigInt::from_biguint(Sign::Plus, den.clone());
    let nums = scaled
        .iter()
        .map(|v| v.numer() * (&den_int / v.denom()))
        .collect();
    (nums, den)
}

/// Rewrites two numerator vectors over their least common denominator.
pub(crate) fn common_denominator(
    a: &[BigInt],
    da: &BigUint,
    b: &[BigInt],
    db: &BigUint,
) -> (Vec<BigInt>, Vec<BigInt>, BigUint) {
    if da == db {
        return (a.to_vec(), b.to_vec(), da.clone());
    }
    let den = da.lcm(db);
    let fa = BigInt::from_biguint(Sign::Plus, &den / da);
    let fb = BigInt::from_biguint(Sign::Plus, &den / db);
    (
        a.iter().map(|x| x * &fa).collect(),
        b.iter().map(|x| x * &fb).collect(),
        den,
    )
}

pub(crate) fn to_rational(num: &BigInt, den: &BigUint, scale: &BigInt) -> Rational {
    let d = BigInt::from_biguint(Sign::Plus, den.clone()) * scale;
    Rational::new(num.clone(), d)
}

pub(crate) fn pow_big(base: &BigUint, e: usize) -> BigUint {
    num_traits::pow(base.clone(), e)
}
