//! Floating-point asymptotics and the exact probabilities they approximate.
//!
//! Everything that can overflow is kept in log space. Exact naturals enter
//! through [`log_natural`], which reads the bit length and the leading 64 bits.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cover_counts::{full_table, CoverCountError, SequenceTable};
use crate::exact_kernel::{bell, binomial, falling_factorial, Natural, Rational, DEFAULT_BELL_CAP};

const RESIDUAL_TOL: f64 = 1e-12;
const MAX_HALLEY_STEPS: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymptoticsError {
    #[error("{what} requires {requirement}, got {value}")]
    Domain {
        what: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("Lambert W did not converge at t = {t} (residual {residual:e})")]
    NotConverged { t: f64, residual: f64 },
    #[error(transparent)]
    Counts(#[from] CoverCountError),
}

/// A solved value of `w e^w = t` on the principal branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WValue {
    pub t: f64,
    pub w: f64,
    /// `|w e^w - t| / t`
    pub residual: f64,
}

fn w_residual(w: f64, t: f64) -> f64 {
    (w * w.exp() - t).abs() / t
}

/// Principal branch of Lambert W for `t > 0`, by Halley iteration.
pub fn lambert_w(t: f64) -> Result<WValue, AsymptoticsError> {
    if t.is_nan() || t <= 0.0 || t.is_infinite() {
        return Err(AsymptoticsError::Domain {
            what: "lambert_w",
            requirement: "finite t > 0",
            value: t,
        });
    }
    let mut w = if t >= std::f64::consts::E {
        let l = t.ln();
        l - l.ln()
    } else {
        t
    };
    let mut residual = w_residual(w, t);
    for _ in 0..MAX_HALLEY_STEPS {
        if residual <= RESIDUAL_TOL {
            return Ok(WValue { t, w, residual });
        }
        let ew = w.exp();
        let f = w * ew - t;
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        let next = w_residual(w, t);
        // Converged to the last bit without reaching the tolerance.
        if step == 0.0 && next >= residual {
            break;
        }
        residual = next;
    }
    if residual <= RESIDUAL_TOL {
        Ok(WValue { t, w, residual })
    } else {
        Err(AsymptoticsError::NotConverged { t, residual })
    }
}

/// `log t - log log t + log log t / log t`, defined for `t > e`.
pub fn lambert_w_expansion(t: f64) -> Result<f64, AsymptoticsError> {
    if t.is_nan() || t <= std::f64::consts::E {
        return Err(AsymptoticsError::Domain {
            what: "lambert_w_expansion",
            requirement: "t > e",
            value: t,
        });
    }
    let l = t.ln();
    let ll = l.ln();
    Ok(l - ll + ll / l)
}

/// Natural logarithm of an arbitrary natural (`-inf` for zero).
pub fn log_natural(x: &Natural) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.to_u64().map_or(f64::NEG_INFINITY, |v| (v as f64).ln());
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("64 leading bits fit");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Moser-Wyman expansion of `log B_n`, for `n >= 10`.
pub fn log_bell_mw(n: usize) -> Result<f64, AsymptoticsError> {
    if n < 10 {
        return Err(AsymptoticsError::Domain {
            what: "log_bell_mw",
            requirement: "n >= 10",
            value: n as f64,
        });
    }
    let w = lambert_w(n as f64)?.w;
    let w1 = 1.0 + w;
    let (w2, w3, w4) = (w * w, w * w * w, w * w * w * w);
    let head = w.exp() * (w2 - w + 1.0) - 0.5 * w1.ln() - 1.0;
    let c1 = w * (2.0 * w2 + 7.0 * w + 10.0) / (24.0 * w1.powi(3));
    let c2 = w * (2.0 * w4 + 12.0 * w3 + 29.0 * w2 + 40.0 * w + 36.0) / (48.0 * w1.powi(6));
    Ok(head - c1 * (-w).exp() - c2 * (-2.0 * w).exp())
}

fn require_n(what: &'static str, n: usize, min: usize) -> Result<(), AsymptoticsError> {
    if n < min {
        return Err(AsymptoticsError::Domain {
            what,
            requirement: if min == 1 { "n >= 1" } else { "n >= 2" },
            value: n as f64,
        });
    }
    Ok(())
}

/// Log of the estimate shared by `s_n` and `t_n`.
pub fn st_estimate(n: usize, log_b2n: f64) -> Result<f64, AsymptoticsError> {
    require_n("st_estimate", n, 2)?;
    let nf = n as f64;
    Ok(log_b2n - nf * std::f64::consts::LN_2 + 0.5 * (nf.ln() / (2.0 * nf)).ln())
}

/// Log of the estimate shared by `u_n`, `v_n` and `l_n`.
pub fn uvl_estimate(n: usize, log_b2n: f64) -> Result<f64, AsymptoticsError> {
    require_n("uvl_estimate", n, 2)?;
    let nf = n as f64;
    let half = 0.5 * (2.0 * nf / nf.ln()).ln();
    Ok(log_b2n - nf * std::f64::consts::LN_2 - 0.5 * nf.ln() - half * half)
}

/// Nearest integer to `2n / W(2n)`, ties rounded up.
pub fn saddle_m0(n: usize) -> Result<usize, AsymptoticsError> {
    require_n("saddle_m0", n, 1)?;
    let t = 2.0 * n as f64;
    let ratio = t / lambert_w(t)?.w;
    Ok((ratio + 0.5).floor() as usize)
}

/// Log of the saddle-point form of `v_n`.
pub fn saddle_form_uvl(n: usize, log_b2n: f64) -> Result<f64, AsymptoticsError> {
    let m0 = saddle_m0(n)? as f64;
    let nf = n as f64;
    Ok(log_b2n - nf * std::f64::consts::LN_2 - nf / m0 - (nf / m0).powi(2))
}

fn big(x: Natural) -> BigInt {
    BigInt::from(x)
}

/// `E (X)_r = (n)_r B_{2n-r} / B_{2n}` for a uniform partition of `[2n]`.
pub fn moment_e_x_r(n: usize, r: usize) -> Rational {
    if r > n {
        return Rational::zero();
    }
    Rational::new(
        big(falling_factorial(n, r) * bell(2 * n - r)),
        big(bell(2 * n)),
    )
}

/// `|E_{1,n}|` by inclusion-exclusion: `sum_r (-1)^r C(n,r) B_{2n-r}`.
pub fn e1_count(n: usize) -> BigInt {
    (0..=n)
        .map(|r| {
            let term = big(binomial(n, r) * bell(2 * n - r));
            if r % 2 == 0 {
                term
            } else {
                -term
            }
        })
        .sum()
}

/// `P(X = 0)` exactly.
pub fn p_x0_exact(n: usize) -> Rational {
    Rational::new(e1_count(n), big(bell(2 * n)))
}

/// `P(X = 0) / sqrt(log n / 2n)`.
pub fn e1_asymptotic_ratio(n: usize) -> Result<f64, AsymptoticsError> {
    require_n("e1_asymptotic_ratio", n, 2)?;
    let nf = n as f64;
    let p = rational_to_f64(&p_x0_exact(n));
    Ok(p / (nf.ln() / (2.0 * nf)).sqrt())
}

/// Upper bound `sum_{k=1..n} C(n,k) 2^k B_{2n-2k} / B_{2n}` on `P(Y > 0)`.
pub fn collision_bound(n: usize) -> Rational {
    let num: Natural = (1..=n)
        .map(|k| (binomial(n, k) << k) * bell(2 * n - 2 * k))
        .sum();
    Rational::new(big(num), big(bell(2 * n)))
}

/// `sum_{m=0..2n} m^{2n} / m!`, the head of Dobinski's series for `e B_{2n}`.
pub fn truncated_dobinski(n: usize) -> Rational {
    let k = 2 * n;
    let mut total = Rational::zero();
    let mut fact = BigInt::one();
    for m in 0..=k {
        if m > 0 {
            fact *= m;
        }
        let power = num_traits::pow(BigInt::from(m), k);
        total += Rational::new(power, fact.clone());
    }
    total
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BellSource {
    Exact,
    MoserWyman,
}

impl BellSource {
    pub fn as_str(self) -> &'static str {
        match self {
            BellSource::Exact => "exact",
            BellSource::MoserWyman => "moser-wyman",
        }
    }
}

/// Exact sequence values at one `n`, in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogCounts {
    pub s: f64,
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticRow {
    pub n: usize,
    pub bell_source: BellSource,
    pub log_bell2n: f64,
    /// Present when the exact sequences were computed up to this `n`.
    pub exact: Option<LogCounts>,
    pub est_st: f64,
    pub est_uvl: f64,
    pub saddle_uvl: f64,
    pub m0: usize,
    pub ratio_s: Option<f64>,
    pub ratio_t: Option<f64>,
    pub ratio_u: Option<f64>,
    pub ratio_v: Option<f64>,
    pub ratio_l: Option<f64>,
    /// `v_n` over the saddle form.
    pub ratio_v_saddle: Option<f64>,
    /// Saddle form over the `u, v, l` estimate.
    pub ratio_saddle_uvl: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TrendStatus {
    Pass,
    Warn,
}

/// Whether `|ratio - 1|` shrinks between the first exact row with
/// `n >= TREND_START` (or the first exact row when there is none) and the last.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendCheck {
    pub ratio: &'static str,
    pub n_first: usize,
    pub n_last: usize,
    pub deviation_first: f64,
    pub deviation_last: f64,
    pub status: TrendStatus,
}

pub const TREND_START: usize = 16;

pub const REPORT_HEADER: &str = "ratios converge to 1 only at rate O(log log n / log n); \
     the report checks trends, not tight tolerances";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub header: &'static str,
    pub rows: Vec<AsymptoticRow>,
    pub trends: Vec<TrendCheck>,
}

/// Reports for `n` on the grid `4, 8, 16, ...` up to `max_n` (plus `max_n` itself).
pub fn report_grid(max_n: usize) -> Vec<usize> {
    let mut grid = Vec::new();
    let mut n = 4;
    while n <= max_n {
        grid.push(n);
        n *= 2;
    }
    if max_n >= 2 && grid.last() != Some(&max_n) {
        grid.push(max_n);
    }
    grid
}

fn log_bell_2n(n: usize) -> Result<(f64, BellSource), AsymptoticsError> {
    if 2 * n <= DEFAULT_BELL_CAP {
        Ok((log_natural(&bell(2 * n)), BellSource::Exact))
    } else {
        Ok((log_bell_mw(2 * n)?, BellSource::MoserWyman))
    }
}

/// Builds the convergence report on [`report_grid`]; exact sequences are
/// computed for rows with `n <= exact_limit`.
pub fn asymptotic_report(max_n: usize, exact_limit: usize) -> Result<AsymptoticReport, AsymptoticsError> {
    let grid = report_grid(max_n);
    let exact_top = grid.iter().copied().filter(|&n| n <= exact_limit).max();
    let table = match exact_top {
        Some(top) => Some(full_table(top)?),
        None => None,
    };
    let rows = grid
        .iter()
        .map(|&n| report_row(n, table.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    let trends = trend_checks(&rows);
    Ok(AsymptoticReport {
        header: REPORT_HEADER,
        rows,
        trends,
    })
}

fn report_row(n: usize, table: Option<&SequenceTable>) -> Result<AsymptoticRow, AsymptoticsError> {
    let (log_bell2n, bell_source) = log_bell_2n(n)?;
    let est_st = st_estimate(n, log_bell2n)?;
    let est_uvl = uvl_estimate(n, log_bell2n)?;
    let saddle_uvl = saddle_form_uvl(n, log_bell2n)?;
    let exact = table.and_then(|t| t.row(n)).map(|r| LogCounts {
        s: log_natural(&r.s),
        t: log_natural(&r.t),
        u: log_natural(&r.u),
        v: log_natural(&r.v),
        l: log_natural(&r.l),
    });
    let ratio = |pick: fn(&LogCounts) -> f64, est: f64| exact.as_ref().map(|e| (pick(e) - est).exp());
    Ok(AsymptoticRow {
        n,
        bell_source,
        log_bell2n,
        exact,
        est_st,
        est_uvl,
        saddle_uvl,
        m0: saddle_m0(n)?,
        ratio_s: ratio(|e| e.s, est_st),
        ratio_t: ratio(|e| e.t, est_st),
        ratio_u: ratio(|e| e.u, est_uvl),
        ratio_v: ratio(|e| e.v, est_uvl),
        ratio_l: ratio(|e| e.l, est_uvl),
        ratio_v_saddle: ratio(|e| e.v, saddle_uvl),
        ratio_saddle_uvl: (saddle_uvl - est_uvl).exp(),
    })
}

type RatioPick = fn(&AsymptoticRow) -> Option<f64>;

fn trend_checks(rows: &[AsymptoticRow]) -> Vec<TrendCheck> {
    let exact_rows: Vec<&AsymptoticRow> = rows.iter().filter(|r| r.exact.is_some()).collect();
    let start = exact_rows
        .iter()
        .find(|r| r.n >= TREND_START)
        .or(exact_rows.first());
    let (Some(first), Some(last)) = (start, exact_rows.last()) else {
        return Vec::new();
    };
    if first.n == last.n {
        return Vec::new();
    }
    let pickers: [(&'static str, RatioPick); 5] = [
        ("ratio_s", |r| r.ratio_s),
        ("ratio_t", |r| r.ratio_t),
        ("ratio_u", |r| r.ratio_u),
        ("ratio_v", |r| r.ratio_v),
        ("ratio_l", |r| r.ratio_l),
    ];
    pickers
        .iter()
        .filter_map(|&(name, pick)| {
            let a = (pick(first)? - 1.0).abs();
            let b = (pick(last)? - 1.0).abs();
            Some(TrendCheck {
                ratio: name,
                n_first: first.n,
                n_last: last.n,
                deviation_first: a,
                deviation_last: b,
                status: if b < a { TrendStatus::Pass } else { TrendStatus::Warn },
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn q(a: i64, b: i64) -> Rational {
        Rational::new(a.into(), b.into())
    }

    #[test]
    fn lambert_w_values() {
        assert!((lambert_w(E).unwrap().w - 1.0).abs() < 1e-12);
        assert!((lambert_w(2.0 * E * E).unwrap().w - 2.0).abs() < 1e-12);
        assert!((lambert_w(1.0).unwrap().w - 0.567_143_290_4).abs() < 1e-9);
        for t in [1e-300, 1e-6, 0.5, 1.0, 2.0, E, 10.0, 1e6, 1e12, 1e300] {
            let w = lambert_w(t).unwrap();
            assert!(w.residual <= 1e-12, "t={t} residual={}", w.residual);
        }
        assert!(lambert_w(0.0).is_err());
        assert!(lambert_w(-1.0).is_err());
        assert!(lambert_w(f64::NAN).is_err());
    }

    #[test]
    fn lambert_expansion_gap_shrinks() {
        let gap = |t: f64| {
            let w = lambert_w(t).unwrap().w;
            (lambert_w_expansion(t).unwrap() - w).abs() / w
        };
        assert!(gap(1e6) < 0.02);
        assert!(gap(1e12) < 0.005);
        let gaps: Vec<f64> = [1e3, 1e6, 1e9, 1e12].iter().map(|&t| gap(t)).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert!(lambert_w_expansion(E).is_err());
    }

    #[test]
    fn log_natural_accuracy() {
        assert_eq!(log_natural(&Natural::from(1u8)), 0.0);
        assert_eq!(log_natural(&Natural::zero()), f64::NEG_INFINITY);
        let big = Natural::from(3u8).pow(500u32);
        let expected = 500.0 * 3f64.ln();
        assert!((log_natural(&big) - expected).abs() / expected < 1e-14);
    }

    #[test]
    fn moser_wyman_accuracy() {
        for (n, tol) in [(100, 1e-3), (1000, 1e-6)] {
            let err = (log_bell_mw(n).unwrap() - log_natural(&bell(n))).abs();
            assert!(err < tol, "n={n} err={err}");
        }
        let err = |n: usize| (log_bell_mw(n).unwrap() - log_natural(&bell(n))).abs();
        assert!(err(500) < err(50));
        assert!(log_bell_mw(9).is_err());
    }

    #[test]
    fn estimators() {
        let lb6 = 203f64.ln();
        let est = st_estimate(3, lb6).unwrap().exp();
        assert!((est - 10.86).abs() < 0.01, "{est}");
        assert!((8.0 / est - 0.74).abs() < 0.01);
        for n in [10usize, 100, 1000] {
            let nf = n as f64;
            let a = (-0.5 * (2.0 * nf / nf.ln()).ln()).exp();
            let b = (nf.ln() / (2.0 * nf)).sqrt();
            assert!((a - b).abs() <= 4.0 * f64::EPSILON * b);
        }
        for n in 3..200 {
            let lb = log_natural(&bell(2 * n));
            assert!(uvl_estimate(n, lb).unwrap() < st_estimate(n, lb).unwrap());
        }
        assert!(uvl_estimate(3, lb6).unwrap().exp() > 0.0);
        assert!(st_estimate(1, 0.0).is_err());
    }

    #[test]
    fn saddle_point() {
        assert_eq!(saddle_m0(100).unwrap(), 51);
        assert_eq!(saddle_m0(1).unwrap(), 2);
        let m: Vec<usize> = (1..=1000).map(|n| saddle_m0(n).unwrap()).collect();
        assert!(m.windows(2).all(|w| w[0] <= w[1]));
        assert!(saddle_form_uvl(1, 2f64.ln()).unwrap().is_finite());

        let lb = log_natural(&bell(256));
        let r = (saddle_form_uvl(128, lb).unwrap() - uvl_estimate(128, lb).unwrap()).exp();
        assert!(r > 0.5 && r < 2.0, "{r}");
        let gap = |n: usize| {
            let lb = log_bell_mw(2 * n).unwrap();
            (saddle_form_uvl(n, lb).unwrap() - uvl_estimate(n, lb).unwrap()).abs()
        };
        assert!(gap(1024) < gap(64));
    }

    #[test]
    fn moments() {
        assert_eq!(moment_e_x_r(2, 1), q(2, 3));
        assert_eq!(moment_e_x_r(2, 2), q(4, 15));
        assert_eq!(moment_e_x_r(7, 0), Rational::one());
        assert_eq!(moment_e_x_r(2, 3), Rational::zero());
    }

    #[test]
    fn p_x0() {
        assert_eq!(p_x0_exact(1), q(1, 2));
        assert_eq!(p_x0_exact(2), q(7, 15));
        assert_eq!(e1_count(0), BigInt::one());
        let expected = [1u64, 1, 7, 87, 1657, 43833];
        for (n, &e) in expected.iter().enumerate() {
            assert_eq!(e1_count(n), BigInt::from(e));
        }
        assert!((e1_asymptotic_ratio(2).unwrap() - 1.121).abs() < 1e-3);
        let dev = |n: usize| (e1_asymptotic_ratio(n).unwrap() - 1.0).abs();
        for n in [4, 16, 64, 256] {
            let r = e1_asymptotic_ratio(n).unwrap();
            assert!(r.is_finite() && r > 0.0);
        }
        assert!(dev(256) < dev(16));
    }

    #[test]
    fn collision_bound_small() {
        // n = 2: C(2,1) 2 B_2 + C(2,2) 4 B_0 = 12 over B_4 = 15
        assert_eq!(collision_bound(2), q(12, 15));
        assert_eq!(collision_bound(0), Rational::zero());
    }

    #[test]
    fn dobinski_head() {
        let e = E;
        let mut prev = 0.0;
        for n in 1..=8 {
            let head = rational_to_f64(&truncated_dobinski(n));
            let full = e * bell(2 * n).to_f64().unwrap();
            let r = head / full;
            assert!(r < 1.0 && r > prev, "n={n} r={r}");
            prev = r;
        }
    }

    #[test]
    fn grid() {
        assert_eq!(report_grid(4), vec![4]);
        assert_eq!(report_grid(20), vec![4, 8, 16, 20]);
        assert_eq!(report_grid(3), vec![3]);
        assert!(report_grid(1).is_empty());
    }

    #[test]
    fn small_report() {
        let report = asymptotic_report(32, 32).unwrap();
        assert_eq!(report.rows.len(), 4);
        for row in &report.rows {
            assert_eq!(row.bell_source, BellSource::Exact);
            for r in [row.ratio_s, row.ratio_t, row.ratio_u, row.ratio_v, row.ratio_l] {
                assert!(r.unwrap() > 0.0);
            }
        }
        assert_eq!(report.trends.len(), 5);
        assert!(report.trends.iter().all(|t| (t.n_first, t.n_last) == (16, 32)));
        // Below the trend window the first exact row is used.
        let early = asymptotic_report(8, 8).unwrap();
        assert!(early.trends.iter().all(|t| (t.n_first, t.n_last) == (4, 8)));
        let beyond = asymptotic_report(1024, 0).unwrap();
        let last = beyond.rows.last().unwrap();
        assert_eq!(last.bell_source, BellSource::MoserWyman);
        assert!(last.exact.is_none() && last.ratio_t.is_none());
        assert!(beyond.trends.is_empty());
    }
}
