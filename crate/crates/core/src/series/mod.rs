//! Exact truncated power series over the rationals, univariate and bivariate.

mod bivariate;
mod scaled;
mod univariate;

use thiserror::Error;

pub use bivariate::BivariateSeries;
pub use univariate::EgfSeries;

use crate::exact_kernel::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("truncation degrees differ: {left:?} vs {right:?}")]
    DegreeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("argument has a nonzero constant term")]
    NonzeroConstantTerm,
    #[error("index {index} exceeds truncation degree {degree}")]
    IndexOutOfRange { index: usize, degree: usize },
}

/// Operations shared by [`EgfSeries`] and [`BivariateSeries`].
pub trait TruncatedSeries: Sized {
    fn series_mul(&self, other: &Self) -> Result<Self, SeriesError>;
    fn series_exp(&self) -> Result<Self, SeriesError>;
}

impl TruncatedSeries for EgfSeries {
    fn series_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.mul(other)
    }
    fn series_exp(&self) -> Result<Self, SeriesError> {
        self.exp()
    }
}

impl TruncatedSeries for BivariateSeries {
    fn series_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.mul(other)
    }
    fn series_exp(&self) -> Result<Self, SeriesError> {
        self.exp()
    }
}

pub fn series_mul<S: TruncatedSeries>(a: &S, b: &S) -> Result<S, SeriesError> {
    a.series_mul(b)
}

pub fn series_exp<S: TruncatedSeries>(a: &S) -> Result<S, SeriesError> {
    a.series_exp()
}

pub fn series_compose(outer: &EgfSeries, inner: &EgfSeries) -> Result<EgfSeries, SeriesError> {
    outer.compose(inner)
}

pub fn egf_coefficient(a: &EgfSeries, n: usize) -> Result<Rational, SeriesError> {
    a.egf_coefficient(n)
}
