use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, Zero};

use super::scaled::{self, factorials, normalize, pascal};
use super::{EgfSeries, SeriesError};
use crate::exact_kernel::Rational;

/// Truncated bivariate series `sum c_{n,m} x^n y^m` for `n <= N`, `m <= M`.
///
/// Stored x-degree major: `c_{n,m} = nums[n * (M + 1) + m] / (n! m! den)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BivariateSeries {
    nx: usize,
    ny: usize,
    nums: Vec<BigInt>,
    den: BigUint,
}

impl BivariateSeries {
    fn from_parts(nx: usize, ny: usize, mut nums: Vec<BigInt>, mut den: BigUint) -> Self {
        debug_assert_eq!(nums.len(), (nx + 1) * (ny + 1));
        normalize(&mut nums, &mut den);
        BivariateSeries { nx, ny, nums, den }
    }

    #[inline]
    fn idx(&self, n: usize, m: usize) -> usize {
        n * (self.ny + 1) + m
    }

    pub fn zero(nx: usize, ny: usize) -> Self {
        BivariateSeries {
            nx,
            ny,
            nums: vec![BigInt::zero(); (nx + 1) * (ny + 1)],
            den: BigUint::one(),
        }
    }

    pub fn one(nx: usize, ny: usize) -> Self {
        Self::monomial(nx, ny, 0, 0, &Rational::one())
    }

    /// `c * x^n * y^m` (zero if the monomial lies beyond the truncation).
    pub fn monomial(nx: usize, ny: usize, n: usize, m: usize, c: &Rational) -> Self {
        let mut s = Self::zero(nx, ny);
        if n <= nx && m <= ny {
            let f = factorials(n.max(m));
            let i = s.idx(n, m);
            s.nums[i] = c.numer() * &f[n] * &f[m];
            s.den = c.denom().magnitude().clone();
        }
        s
    }

    /// Series from ordinary coefficients; `rows[n][m]` is the coefficient of `x^n y^m`.
    pub fn from_coeffs(rows: &[Vec<Rational>]) -> Self {
        let nx = rows.len().checked_sub(1).expect("at least one row");
        let ny = rows[0].len().checked_sub(1).expect("at least one column");
        assert!(rows.iter().all(|r| r.len() == ny + 1), "ragged coefficient grid");
        let f = factorials(nx.max(ny));
        let weights: Vec<BigInt> = (0..=nx)
            .flat_map(|n| (0..=ny).map(move |m| (n, m)))
            .map(|(n, m)| &f[n] * &f[m])
            .collect();
        let flat: Vec<&Rational> = rows.iter().flatten().collect();
        let (nums, den) = scaled::scale_rationals(flat.into_iter().zip(weights.iter()));
        Self::from_parts(nx, ny, nums, den)
    }

    /// Series whose coefficients are `values[n][m] / (n! m!)`, given row-major.
    pub fn from_egf_grid(nx: usize, ny: usize, values: Vec<BigInt>) -> Self {
        assert_eq!(values.len(), (nx + 1) * (ny + 1), "grid size");
        Self::from_parts(nx, ny, values, BigUint::one())
    }

    /// Embeds a univariate series in `x` (y-degree 0).
    pub fn from_x_series(s: &EgfSeries, ny: usize) -> Self {
        let nx = s.truncation_degree();
        let rows: Vec<Vec<Rational>> = s
            .coeffs()
            .into_iter()
            .map(|c| {
                let mut row = vec![Rational::zero(); ny + 1];
                row[0] = c;
                row
            })
            .collect();
        debug_assert_eq!(rows.len(), nx + 1);
        Self::from_coeffs(&rows)
    }

    pub fn truncation(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn coeff(&self, n: usize, m: usize) -> Rational {
        if n > self.nx || m > self.ny {
            return Rational::zero();
        }
        let f = factorials(n.max(m));
        scaled::to_rational(&self.nums[self.idx(n, m)], &self.den, &(&f[n] * &f[m]))
    }

    /// `n! * c_{n,m}`: the x-exponential coefficient at `(n, m)`.
    pub fn x_egf_coefficient(&self, n: usize, m: usize) -> Result<Rational, SeriesError> {
        if n > self.nx || m > self.ny {
            return Err(SeriesError::IndexOutOfRange {
                index: if n > self.nx { n } else { m },
                degree: if n > self.nx { self.nx } else { self.ny },
            });
        }
        let f = factorials(m);
        Ok(scaled::to_rational(&self.nums[self.idx(n, m)], &self.den, &f[m]))
    }

    /// `n! * sum_m c_{n,m}`: the x-exponential coefficient of the series at `y = 1`,
    /// summed over every stored y-degree.
    pub fn x_egf_row_sum(&self, n: usize) -> Result<Rational, SeriesError> {
        if n > self.nx {
            return Err(SeriesError::IndexOutOfRange {
                index: n,
                degree: self.nx,
            });
        }
        let f = factorials(self.ny);
        let top = &f[self.ny];
        let mut acc = BigInt::zero();
        for m in 0..=self.ny {
            let num = &self.nums[self.idx(n, m)];
            if !num.is_zero() {
                acc += num * (top / &f[m]);
            }
        }
        Ok(scaled::to_rational(&acc, &self.den, top))
    }

    pub fn is_zero(&self) -> bool {
        self.nums.iter().all(Zero::is_zero)
    }

    fn nnz(&self) -> usize {
        self.nums.iter().filter(|x| !x.is_zero()).count()
    }

    fn check_shape(&self, other: &Self) -> Result<(), SeriesError> {
        if self.truncation() != other.truncation() {
            return Err(SeriesError::DegreeMismatch {
                left: self.truncation(),
                right: other.truncation(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_shape(other)?;
        let (a, b, den) = scaled::common_denominator(&self.nums, &self.den, &other.nums, &other.den);
        let nums = a.into_iter().zip(b).map(|(x, y)| x + y).collect();
        Ok(Self::from_parts(self.nx, self.ny, nums, den))
    }

    pub fn neg(&self) -> Self {
        BivariateSeries {
            nx: self.nx,
            ny: self.ny,
            nums: self.nums.iter().map(|x| -x).collect(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let nums = self.nums.iter().map(|x| x * c.numer()).collect();
        Self::from_parts(self.nx, self.ny, nums, &self.den * c.denom().magnitude())
    }

    /// Cauchy product truncated in both degrees.
    ///
    /// The loop runs over the nonzero terms of the sparser factor, so products
    /// with a short factor such as `exp(-y)` cost `O(nnz * N * M)`.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_shape(other)?;
        let (nx, ny) = (self.nx, self.ny);
        let (sparse, dense) = if self.nnz() <= other.nnz() {
            (self, other)
        } else {
            (other, self)
        };
        let binom = pascal(nx.max(ny));
        let mut out = vec![BigInt::zero(); (nx + 1) * (ny + 1)];
        for i in 0..=nx {
            for j in 0..=ny {
                let a = &sparse.nums[sparse.idx(i, j)];
                if a.is_zero() {
                    continue;
                }
                let unit = a.magnitude().is_one();
                let negative = a.is_negative();
                for n in i..=nx {
                    let bx = &binom[n][i];
                    for m in j..=ny {
                        let b = &dense.nums[dense.idx(n - i, m - j)];
                        if b.is_zero() {
                            continue;
                        }
                        let mut term = if j == 0 || j == m {
                            b.clone()
                        } else {
                            b * &binom[m][j]
                        };
                        if i != 0 && i != n {
                            term *= bx;
                        }
                        let slot = &mut out[n * (ny + 1) + m];
                        match (unit, negative) {
                            (true, false) => *slot += term,
                            (true, true) => *slot -= term,
                            _ => *slot += term * a,
                        }
                    }
                }
            }
        }
        Ok(Self::from_parts(nx, ny, out, &self.den * &other.den))
    }

    /// `exp(self)`; requires a zero constant term.
    ///
    /// The pure-`x` part is exponentiated as a univariate series; the rest uses
    /// the y-derivative relation `(exp f)_y = f_y exp f`.
    pub fn exp(&self) -> Result<Self, SeriesError> {
        if !self.nums[0].is_zero() {
            return Err(SeriesError::NonzeroConstantTerm);
        }
        let (nx, ny) = (self.nx, self.ny);
        let column: Vec<Rational> = (0..=nx).map(|n| self.coeff(n, 0)).collect();
        let x_part = EgfSeries::from_coeffs(&column);

        // Nonzero terms with y-degree >= 1, as (i, j, A_ij) where c_ij = A_ij / (i! j! d).
        let terms: Vec<(usize, usize, &BigInt)> = (0..=nx)
            .flat_map(|i| (1..=ny).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, &self.nums[self.idx(i, j)]))
            .filter(|(_, _, a)| !a.is_zero())
            .collect();
        let d = BigInt::from_biguint(Sign::Plus, self.den.clone());
        let mut dpow = vec![BigInt::one()];
        for j in 1..=ny {
            let v = &dpow[j - 1] * &d;
            dpow.push(v);
        }
        let binom = pascal(nx.max(ny));
        // F[n][m] = d^m * (doubly exponential coefficient of exp(rest)), integral.
        let mut f = vec![BigInt::zero(); (nx + 1) * (ny + 1)];
        f[0] = BigInt::one();
        for m in 0..ny {
            for n in 0..=nx {
                let mut acc = BigInt::zero();
                for &(i, j1, a) in &terms {
                    let j = j1 - 1;
                    if i > n || j > m {
                        continue;
                    }
                    let prev = &f[(n - i) * (ny + 1) + (m - j)];
                    if prev.is_zero() {
                        continue;
                    }
                    let mut term = a * prev;
                    if j > 0 {
                        term *= &dpow[j];
                        if j < m {
                            term *= &binom[m][j];
                        }
                    }
                    if i != 0 && i != n {
                        term *= &binom[n][i];
                    }
                    acc += term;
                }
                f[n * (ny + 1) + m + 1] = acc;
            }
        }
        for n in 0..=nx {
            for m in 0..=ny {
                let slot = &mut f[n * (ny + 1) + m];
                if !slot.is_zero() {
                    *slot *= &dpow[ny - m];
                }
            }
        }
        let rest = Self::from_parts(nx, ny, f, scaled::pow_big(&self.den, ny));
        if x_part.is_zero() {
            return Ok(rest);
        }
        Self::from_x_series(&x_part.exp()?, ny).mul(&rest)
    }
}

impl fmt::Debug for BivariateSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for n in 0..=self.nx {
            let row: Vec<String> = (0..=self.ny).map(|m| self.coeff(n, m).to_string()).collect();
            list.entry(&row);
        }
        list.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn grid(rows: &[&[(i64, i64)]]) -> BivariateSeries {
        let rows: Vec<Vec<Rational>> = rows
            .iter()
            .map(|r| r.iter().map(|&(n, d)| q(n, d)).collect())
            .collect();
        BivariateSeries::from_coeffs(&rows)
    }

    #[test]
    fn mul_truncates_both_degrees() {
        // (1 + x + y) * (1 - x + 2y) at (1, 1) -> 1 + 3y + 0x + xy (x^2, y^2 dropped)
        let a = grid(&[&[(1, 1), (1, 1)], &[(1, 1), (0, 1)]]);
        let b = grid(&[&[(1, 1), (2, 1)], &[(-1, 1), (0, 1)]]);
        let c = a.mul(&b).unwrap();
        assert_eq!(c, grid(&[&[(1, 1), (3, 1)], &[(0, 1), (1, 1)]]));
    }

    #[test]
    fn mul_matches_naive_convolution() {
        let a = grid(&[
            &[(1, 2), (0, 1), (3, 1)],
            &[(-1, 3), (2, 5), (0, 1)],
            &[(0, 1), (1, 7), (1, 1)],
        ]);
        let b = grid(&[
            &[(2, 1), (1, 4), (0, 1)],
            &[(0, 1), (-3, 2), (1, 1)],
            &[(5, 6), (0, 1), (-1, 9)],
        ]);
        let c = a.mul(&b).unwrap();
        for n in 0..=2 {
            for m in 0..=2 {
                let mut want = Rational::zero();
                for i in 0..=n {
                    for j in 0..=m {
                        want += a.coeff(i, j) * b.coeff(n - i, m - j);
                    }
                }
                assert_eq!(c.coeff(n, m), want, "({n},{m})");
            }
        }
    }

    #[test]
    fn exp_of_mixed_argument() {
        // exp(x + y) = sum x^n y^m / (n! m!)
        let a = grid(&[&[(0, 1), (1, 1), (0, 1)], &[(1, 1), (0, 1), (0, 1)], &[(0, 1), (0, 1), (0, 1)]]);
        let e = a.exp().unwrap();
        for n in 0..=2usize {
            for m in 0..=2usize {
                let f = crate::exact_kernel::factorial(n) * crate::exact_kernel::factorial(m);
                let want = Rational::new(1.into(), BigInt::from_biguint(Sign::Plus, f));
                assert_eq!(e.coeff(n, m), want);
            }
        }
        assert_eq!(
            BivariateSeries::one(2, 2).exp().unwrap_err(),
            SeriesError::NonzeroConstantTerm
        );
    }

    #[test]
    fn exp_inverse_product_is_one() {
        let a = grid(&[
            &[(0, 1), (-1, 1), (1, 3), (0, 1)],
            &[(2, 1), (0, 1), (-1, 2), (1, 5)],
            &[(1, 7), (3, 1), (0, 1), (0, 1)],
        ]);
        let p = a.exp().unwrap().mul(&a.neg().exp().unwrap()).unwrap();
        assert_eq!(p, BivariateSeries::one(2, 3));
    }

    #[test]
    fn row_sums_and_extraction() {
        let a = grid(&[&[(1, 1), (0, 1)], &[(1, 2), (3, 4)]]);
        assert_eq!(a.x_egf_row_sum(1).unwrap(), q(5, 4));
        assert_eq!(a.x_egf_coefficient(1, 1).unwrap(), q(3, 4));
        assert!(a.x_egf_row_sum(2).is_err());
        assert!(a.x_egf_coefficient(0, 2).is_err());
    }
}
