use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};

use super::scaled::{self, factorials, normalize, pascal};
use super::SeriesError;
use crate::exact_kernel::{Natural, Rational};

/// Truncated power series `c_0 + c_1 x + ... + c_N x^N` with exact rational
/// coefficients. The represented sequence is `a_k = c_k * k!`.
///
/// Internally `c_k = nums[k] / (k! * den)` with `den` minimal, so two equal
/// series always have identical storage.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EgfSeries {
    nums: Vec<BigInt>,
    den: BigUint,
}

impl EgfSeries {
    fn from_parts(mut nums: Vec<BigInt>, mut den: BigUint) -> Self {
        normalize(&mut nums, &mut den);
        EgfSeries { nums, den }
    }

    pub fn zero(degree: usize) -> Self {
        EgfSeries {
            nums: vec![BigInt::zero(); degree + 1],
            den: BigUint::one(),
        }
    }

    pub fn constant(degree: usize, c: &Rational) -> Self {
        let mut s = Self::zero(degree);
        s.nums[0] = c.numer().clone();
        s.den = c.denom().magnitude().clone();
        s
    }

    pub fn one(degree: usize) -> Self {
        Self::constant(degree, &Rational::one())
    }

    /// The series `x` (zero when `degree == 0`).
    pub fn x(degree: usize) -> Self {
        let mut s = Self::zero(degree);
        if degree >= 1 {
            s.nums[1] = BigInt::one();
        }
        s
    }

    /// `e^x` truncated at `degree`.
    pub fn exp_x(degree: usize) -> Self {
        EgfSeries {
            nums: vec![BigInt::one(); degree + 1],
            den: BigUint::one(),
        }
    }

    /// `e^x - 1` truncated at `degree`.
    pub fn exp_x_minus_one(degree: usize) -> Self {
        let mut s = Self::exp_x(degree);
        s.nums[0] = BigInt::zero();
        s
    }

    /// Series with ordinary coefficients `c_0..=c_N`.
    pub fn from_coeffs(coeffs: &[Rational]) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least the constant term");
        let f = factorials(coeffs.len() - 1);
        let (nums, den) = scaled::scale_rationals(coeffs.iter().zip(f.iter()));
        Self::from_parts(nums, den)
    }

    /// EGF of the integer sequence `a_0..=a_N`, i.e. `sum a_k x^k / k!`.
    pub fn from_egf_values(values: &[BigInt]) -> Self {
        assert!(!values.is_empty(), "a series needs at least the constant term");
        EgfSeries {
            nums: values.to_vec(),
            den: BigUint::one(),
        }
    }

    pub fn from_naturals(values: &[Natural]) -> Self {
        let ints: Vec<BigInt> = values
            .iter()
            .map(|v| BigInt::from_biguint(Sign::Plus, v.clone()))
            .collect();
        Self::from_egf_values(&ints)
    }

    pub fn truncation_degree(&self) -> usize {
        self.nums.len() - 1
    }

    /// Ordinary coefficient `c_k`; zero above the truncation degree.
    pub fn coeff(&self, k: usize) -> Rational {
        match self.nums.get(k) {
            Some(num) => scaled::to_rational(num, &self.den, &factorials(k)[k]),
            None => Rational::zero(),
        }
    }

    pub fn coeffs(&self) -> Vec<Rational> {
        let f = factorials(self.truncation_degree());
        self.nums
            .iter()
            .zip(f.iter())
            .map(|(num, fk)| scaled::to_rational(num, &self.den, fk))
            .collect()
    }

    /// The sequence term `a_n = c_n * n!`.
    pub fn egf_coefficient(&self, n: usize) -> Result<Rational, SeriesError> {
        let num = self.nums.get(n).ok_or(SeriesError::IndexOutOfRange {
            index: n,
            degree: self.truncation_degree(),
        })?;
        Ok(scaled::to_rational(num, &self.den, &BigInt::one()))
    }

    /// All sequence terms `a_0..=a_N` if they are integers.
    pub fn egf_integers(&self) -> Option<Vec<BigInt>> {
        if self.den.is_one() {
            Some(self.nums.clone())
        } else {
            None
        }
    }

    /// Sequence terms as naturals; `None` if any term is negative or fractional.
    pub fn egf_naturals(&self) -> Option<Vec<Natural>> {
        self.egf_integers()?
            .into_iter()
            .map(|v| v.to_biguint())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.nums.iter().all(Zero::is_zero)
    }

    fn check_degree(&self, other: &Self) -> Result<(), SeriesError> {
        if self.truncation_degree() != other.truncation_degree() {
            return Err(SeriesError::DegreeMismatch {
                left: (self.truncation_degree(), 0),
                right: (other.truncation_degree(), 0),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_degree(other)?;
        let (a, b, den) = scaled::common_denominator(&self.nums, &self.den, &other.nums, &other.den);
        let nums = a.into_iter().zip(b).map(|(x, y)| x + y).collect();
        Ok(Self::from_parts(nums, den))
    }

    pub fn neg(&self) -> Self {
        EgfSeries {
            nums: self.nums.iter().map(|x| -x).collect(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let nums = self.nums.iter().map(|x| x * c.numer()).collect();
        Self::from_parts(nums, &self.den * c.denom().magnitude())
    }

    /// Cauchy product truncated at the common degree.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_degree(other)?;
        let n = self.truncation_degree();
        let nnz = |s: &Self| s.nums.iter().filter(|x| !x.is_zero()).count();
        let (sparse, dense) = if nnz(self) <= nnz(other) {
            (self, other)
        } else {
            (other, self)
        };
        let binom = pascal(n);
        let mut out = vec![BigInt::zero(); n + 1];
        for (i, ai) in sparse.nums.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for k in i..=n {
                let bk = &dense.nums[k - i];
                if bk.is_zero() {
                    continue;
                }
                let mut term = ai * bk;
                if i != 0 && i != k {
                    term *= &binom[k][i];
                }
                out[k] += term;
            }
        }
        Ok(Self::from_parts(out, &self.den * &other.den))
    }

    /// `exp(self)`; requires a zero constant term.
    pub fn exp(&self) -> Result<Self, SeriesError> {
        if !self.nums[0].is_zero() {
            return Err(SeriesError::NonzeroConstantTerm);
        }
        let n = self.truncation_degree();
        let d = BigInt::from_biguint(Sign::Plus, self.den.clone());
        let binom = pascal(n);
        let mut dpow = Vec::with_capacity(n + 1);
        dpow.push(BigInt::one());
        for i in 1..=n {
            let v = &dpow[i - 1] * &d;
            dpow.push(v);
        }
        // EGF form of f' = a' f. With a = A / d, F_k = d^k * (k-th EGF term of f)
        // stays integral: F_{k+1} = sum_i C(k,i) A_{i+1} d^i F_{k-i}.
        let mut big_f: Vec<BigInt> = Vec::with_capacity(n + 1);
        big_f.push(BigInt::one());
        for k in 0..n {
            let mut acc = BigInt::zero();
            for i in 0..=k {
                let a = &self.nums[i + 1];
                if a.is_zero() || big_f[k - i].is_zero() {
                    continue;
                }
                let mut term = a * &big_f[k - i];
                if i > 0 {
                    term *= &dpow[i];
                    if i < k {
                        term *= &binom[k][i];
                    }
                }
                acc += term;
            }
            big_f.push(acc);
        }
        let nums = big_f
            .into_iter()
            .enumerate()
            .map(|(k, fk)| fk * &dpow[n - k])
            .collect();
        let den = scaled::pow_big(&self.den, n);
        Ok(Self::from_parts(nums, den))
    }

    /// `self(inner(x))` by Horner's rule; `inner` must have zero constant term.
    pub fn compose(&self, inner: &Self) -> Result<Self, SeriesError> {
        self.check_degree(inner)?;
        if !inner.nums[0].is_zero() {
            return Err(SeriesError::NonzeroConstantTerm);
        }
        let n = self.truncation_degree();
        let coeffs = self.coeffs();
        let mut acc = Self::constant(n, &coeffs[n]);
        for c in coeffs[..n].iter().rev() {
            acc = acc.mul(inner)?.add(&Self::constant(n, c))?;
        }
        Ok(acc)
    }
}

impl fmt::Debug for EgfSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs().iter().map(|c| c.to_string())).finish()
    }
}

impl fmt::Display for EgfSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})x")?,
                _ => write!(f, "({c})x^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
