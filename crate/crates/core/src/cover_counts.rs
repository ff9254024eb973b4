//! Exact values of the five 2-cover sequences via generating functions.
//!
//! `v_n` (restricted proper covers) comes from the bivariate generating
//! function
//!
//! ```text
//! A(x, y) = exp(-y - x y^2 / 2) * sum_m y^m / m! * (1 + x)^C(m, 2)
//! ```
//!
//! where `y` marks blocks. `u`, `t`, `s` follow by binomial and Stirling
//! transforms and `l` by the line-graph correction. Every identity that has a
//! second route is recomputed and compared.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exact_kernel::{bell, pascal_rows, stirling2_row, Natural, Rational};
use crate::series::{BivariateSeries, EgfSeries, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverCountError {
    #[error("identity {identity} fails at coefficient {index}: {left} != {right}")]
    IdentityMismatch {
        identity: &'static str,
        index: usize,
        left: String,
        right: String,
    },
    #[error("coefficient {index} of {what} is not a nonnegative integer: {value}")]
    NotNatural {
        what: &'static str,
        index: usize,
        value: String,
    },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceRow {
    pub n: usize,
    pub s: Natural,
    pub t: Natural,
    pub u: Natural,
    pub v: Natural,
    pub l: Natural,
    pub bell2n: Natural,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceTable {
    pub max_n: usize,
    pub rows: Vec<SequenceRow>,
}

impl SequenceTable {
    pub fn row(&self, n: usize) -> Option<&SequenceRow> {
        self.rows.get(n)
    }
}

/// Builds `A(x, y)` truncated at x-degree `max_n` and y-degree `2 * max_n`.
///
/// The y-truncation is exact: each element of `[n]` lies in exactly two
/// nonempty blocks, so a 2-cover of `[n]` has at most `2n` blocks and every
/// coefficient `[x^n y^m] A` with `n <= max_n` and `m > 2 * max_n` is zero.
///
/// The prefactor is applied as `exp(-x y^2 / 2) * (exp(-y) * G)`; both
/// exponentials are very sparse, which keeps each product near `O(N M^2)`
/// instead of the dense `O(N^2 M^2)`.
pub fn restricted_proper_series(max_n: usize) -> Result<BivariateSeries, CoverCountError> {
    let nx = max_n;
    let ny = 2 * max_n;

    // G(x, y) = sum_m y^m/m! (1+x)^C(m,2): its doubly exponential numerator
    // n! m! [x^n y^m] G is the falling factorial (C(m,2))_n.
    let mut grid = vec![BigInt::zero(); (nx + 1) * (ny + 1)];
    for m in 0..=ny {
        let pairs = BigInt::from(m * m.saturating_sub(1) / 2);
        let mut falling = BigInt::one();
        for n in 0..=nx {
            if falling.is_zero() {
                break;
            }
            grid[n * (ny + 1) + m] = falling.clone();
            falling *= &pairs - n;
        }
    }
    let g = BivariateSeries::from_egf_grid(nx, ny, grid);

    let minus_one = -Rational::one();
    let minus_half = Rational::new((-1).into(), 2.into());
    let exp_minus_y = BivariateSeries::monomial(nx, ny, 0, 1, &minus_one).exp()?;
    let exp_minus_xy2 = BivariateSeries::monomial(nx, ny, 1, 2, &minus_half).exp()?;
    let a = exp_minus_xy2.mul(&exp_minus_y.mul(&g)?)?;

    for n in 0..=nx {
        for m in 0..=ny {
            let c = a.x_egf_coefficient(n, m)?;
            let ok = c.is_integer() && c >= Rational::zero() && (m <= 2 * n || c.is_zero());
            if !ok {
                return Err(CoverCountError::NotNatural {
                    what: "A(x,y)",
                    index: n,
                    value: format!("a[{n},{m}] = {c}"),
                });
            }
        }
    }
    Ok(a)
}

/// `v_0..=v_max_n`: restricted proper 2-covers, `v_n = n! sum_m [x^n y^m] A`.
pub fn restricted_proper_sequence(max_n: usize) -> Result<Vec<Natural>, CoverCountError> {
    let a = restricted_proper_series(max_n)?;
    (0..=max_n)
        .map(|n| rational_to_natural(&a.x_egf_row_sum(n)?, "v", n))
        .collect()
}

/// `u_n = sum_k C(n,k) v_k`.
pub fn binomial_transform_u(v: &[Natural]) -> Vec<Natural> {
    if v.is_empty() {
        return Vec::new();
    }
    let rows = pascal_rows(v.len() - 1);
    (0..v.len())
        .map(|n| (0..=n).map(|k| &rows[n][k] * &v[k]).sum())
        .collect()
}

/// `out_n = sum_{k=1..n} S(n,k) base_k`, with `out_0 = base_0`.
pub fn stirling_transform(base: &[Natural]) -> Vec<Natural> {
    (0..base.len())
        .map(|n| {
            if n == 0 {
                return base[0].clone();
            }
            let row = stirling2_row(n);
            (1..=n).map(|k| &row[k] * &base[k]).sum()
        })
        .collect()
}

/// `c(x)` in `L(x) = exp(-c(x)) U(x)`.
///
/// Each term is the over-count of labelled line graphs contributed by a
/// connected root whose line graph has automorphisms not induced by the root:
/// the triangle/star pair (`x^3/3!`), `K_{1,3}+e` (`6 x^4/4!`), `K_4 - e`
/// (`15 x^5/5!`) and `K_4` (`15 x^6/6!`). For every other connected root the
/// edge-labelled root and its labelled line graph determine each other.
fn whitney_correction(degree: usize) -> EgfSeries {
    let mut coeffs = vec![Rational::zero(); degree + 1];
    for (k, num, den) in [(3, 1, 6), (4, 1, 4), (5, 1, 8), (6, 1, 48)] {
        if k <= degree {
            coeffs[k] = Rational::new(BigInt::from(num), BigInt::from(den));
        }
    }
    EgfSeries::from_coeffs(&coeffs)
}

/// Labelled line graph counts `l_0..=l_N` from `V(x)`.
///
/// Primary route `exp(x - c(x)) V(x)`; the second route `exp(-c(x)) U(x)`,
/// with `U` from the binomial transform of `v`, must agree coefficientwise.
pub fn line_transform(v_series: &EgfSeries) -> Result<Vec<Natural>, CoverCountError> {
    let degree = v_series.truncation_degree();
    let c = whitney_correction(degree);
    let x = EgfSeries::x(degree);

    let from_v = x.sub(&c)?.exp()?.mul(v_series)?;

    let v = series_naturals(v_series, "V")?;
    let u = binomial_transform_u(&v);
    let from_u = c.neg().exp()?.mul(&EgfSeries::from_naturals(&u))?;

    compare_series("L from V vs L from U", &from_v, &from_u)?;
    series_naturals(&from_v, "L")
}

/// Computes every sequence up to `max_n` and checks the generating-function
/// identities `U = V e^x`, `S = U(e^x - 1)`, `T = V(e^x - 1)` and `S = T B`.
pub fn full_table(max_n: usize) -> Result<SequenceTable, CoverCountError> {
    let v = restricted_proper_sequence(max_n)?;
    let u = binomial_transform_u(&v);
    let t = stirling_transform(&v);
    let s = stirling_transform(&u);

    let v_series = EgfSeries::from_naturals(&v);
    let u_series = EgfSeries::from_naturals(&u);
    let t_series = EgfSeries::from_naturals(&t);
    let s_series = EgfSeries::from_naturals(&s);
    let l = line_transform(&v_series)?;

    let exp_x = EgfSeries::exp_x(max_n);
    let exp_x_minus_one = EgfSeries::exp_x_minus_one(max_n);
    let bell_series = exp_x_minus_one.exp()?;

    compare_series("U = V e^x", &u_series, &v_series.mul(&exp_x)?)?;
    compare_series("S = U(e^x - 1)", &s_series, &u_series.compose(&exp_x_minus_one)?)?;
    compare_series("T = V(e^x - 1)", &t_series, &v_series.compose(&exp_x_minus_one)?)?;
    compare_series("S = T B", &s_series, &t_series.mul(&bell_series)?)?;

    let rows = (0..=max_n)
        .map(|n| SequenceRow {
            n,
            s: s[n].clone(),
            t: t[n].clone(),
            u: u[n].clone(),
            v: v[n].clone(),
            l: l[n].clone(),
            bell2n: bell(2 * n),
        })
        .collect();
    Ok(SequenceTable { max_n, rows })
}

fn rational_to_natural(q: &Rational, what: &'static str, index: usize) -> Result<Natural, CoverCountError> {
    if q.is_integer() {
        if let Some(v) = q.numer().to_biguint() {
            return Ok(v);
        }
    }
    Err(CoverCountError::NotNatural {
        what,
        index,
        value: q.to_string(),
    })
}

fn series_naturals(s: &EgfSeries, what: &'static str) -> Result<Vec<Natural>, CoverCountError> {
    (0..=s.truncation_degree())
        .map(|n| rational_to_natural(&s.egf_coefficient(n)?, what, n))
        .collect()
}

fn compare_series(identity: &'static str, left: &EgfSeries, right: &EgfSeries) -> Result<(), CoverCountError> {
    if left == right {
        return Ok(());
    }
    for n in 0..=left.truncation_degree() {
        let (a, b) = (left.egf_coefficient(n)?, right.egf_coefficient(n)?);
        if a != b {
            return Err(CoverCountError::IdentityMismatch {
                identity,
                index: n,
                left: a.to_string(),
                right: b.to_string(),
            });
        }
    }
    unreachable!("unequal series with equal coefficients")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nats(xs: &[u64]) -> Vec<Natural> {
        xs.iter().map(|&x| Natural::from(x)).collect()
    }

    #[test]
    fn restricted_proper_small() {
        assert_eq!(restricted_proper_sequence(3).unwrap(), nats(&[1, 0, 1, 5]));
        assert_eq!(restricted_proper_sequence(0).unwrap(), nats(&[1]));
    }

    #[test]
    fn block_count_distribution_at_two() {
        let a = restricted_proper_series(2).unwrap();
        for m in 0..=4 {
            let want = if m == 3 { Rational::one() } else { Rational::zero() };
            assert_eq!(a.x_egf_coefficient(2, m).unwrap(), want, "m={m}");
        }
    }

    #[test]
    fn transforms() {
        assert_eq!(binomial_transform_u(&nats(&[1, 0, 1])), nats(&[1, 1, 2]));
        assert_eq!(binomial_transform_u(&nats(&[1])), nats(&[1]));
        assert_eq!(binomial_transform_u(&nats(&[1, 0, 1, 5]))[3], Natural::from(9u32));
        assert_eq!(stirling_transform(&nats(&[1, 1, 2, 9])), nats(&[1, 1, 3, 16]));
        assert_eq!(stirling_transform(&nats(&[1, 0, 1, 5])), nats(&[1, 0, 1, 8]));
        assert_eq!(stirling_transform(&nats(&[1, 0, 0, 0])), nats(&[1, 0, 0, 0]));
    }

    #[test]
    fn line_counts_small() {
        let v = EgfSeries::from_naturals(&nats(&[1, 0, 1, 5]));
        assert_eq!(line_transform(&v).unwrap(), nats(&[1, 1, 2, 8]));
    }

    #[test]
    fn table_rows() {
        let t = full_table(3).unwrap();
        let got: Vec<[u64; 5]> = t.rows[1..]
            .iter()
            .map(|r| {
                [&r.s, &r.t, &r.u, &r.v, &r.l].map(|x| u64::try_from(x).unwrap())
            })
            .collect();
        assert_eq!(got, vec![[1, 0, 1, 0, 1], [3, 1, 2, 1, 2], [16, 8, 9, 5, 8]]);
        assert_eq!(t.rows[3].bell2n, Natural::from(203u32));

        let t0 = full_table(0).unwrap();
        assert_eq!(t0.rows.len(), 1);
        let r = &t0.rows[0];
        assert!([&r.s, &r.t, &r.u, &r.v, &r.l, &r.bell2n].iter().all(|x| x.is_one()));

        assert_eq!(full_table(5).unwrap().rows[5].bell2n, Natural::from(115975u32));
    }

    #[test]
    fn mismatch_names_first_bad_coefficient() {
        let a = EgfSeries::from_naturals(&nats(&[1, 2, 3]));
        let b = EgfSeries::from_naturals(&nats(&[1, 2, 4]));
        let err = compare_series("test", &a, &b).unwrap_err();
        assert_eq!(
            err,
            CoverCountError::IdentityMismatch {
                identity: "test",
                index: 2,
                left: "3".into(),
                right: "4".into()
            }
        );
    }
}
