//! Exhaustive ground truth for small `n`.
//!
//! Every set partition of `[2n]` is visited. A partition that separates each
//! `j` from `j + n` (the event `E1`) projects through `psi` to a 2-cover of
//! `[n]`; collecting the distinct images counts every cover type directly,
//! and the sizes of the preimages verify the fiber formula `2^(n - rho)`.

mod cover;
mod partition;

use std::collections::{HashMap, HashSet};

use thiserror::Error;

pub use cover::{line_graph_of, LabeledGraph, TwoCover};
pub use partition::{enumerate_partitions, psi, PartitionIter, SetPartition};

use crate::exact_kernel::{falling_factorial, Natural};
use cover::line_graph_of_masks;
use partition::psi_mask;

/// Largest `n` the oracle accepts by default (`B_12` partitions of `[12]`).
pub const DEFAULT_ORACLE_LIMIT: usize = 6;
/// Cap used when slow mode is requested.
pub const SLOW_ORACLE_LIMIT: usize = 7;
/// Environment variable overriding the oracle cap.
pub const ORACLE_LIMIT_ENV: &str = "COVER_CENSUS_ORACLE_LIMIT";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("n = {n} exceeds the oracle limit {limit}")]
    OverLimit { n: usize, limit: usize },
    #[error("invalid restricted growth string: label {label} at position {position}")]
    InvalidRgs { position: usize, label: u32 },
    #[error("not a set partition: {0}")]
    NotAPartition(String),
    #[error("not a 2-cover: {0}")]
    NotACover(String),
    #[error("not a simple graph: {0}")]
    NotAGraph(String),
    #[error("cover {0} is not restricted; its root is a multigraph")]
    NotRestricted(String),
    #[error("partition has ground size {got}, expected {expected}")]
    WrongGroundSize { got: usize, expected: usize },
    #[error("identity violated at n = {n}: {identity} ({detail})")]
    IdentityViolation {
        n: usize,
        identity: &'static str,
        detail: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    pub limit: usize,
    pub workers: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            limit: DEFAULT_ORACLE_LIMIT,
            workers: 1,
        }
    }
}

impl OracleConfig {
    /// Default config with the cap taken from `COVER_CENSUS_ORACLE_LIMIT` when set.
    pub fn from_env() -> Self {
        let limit = std::env::var(ORACLE_LIMIT_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_ORACLE_LIMIT);
        OracleConfig { limit, workers: 1 }
    }

    pub fn check(&self, n: usize) -> Result<(), OracleError> {
        if n > self.limit || 2 * n > 64 {
            return Err(OracleError::OverLimit { n, limit: self.limit });
        }
        Ok(())
    }
}

/// Classification of one partition of `[2n]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    /// `j` and `j + n` lie in different blocks for every `j`.
    pub in_e1: bool,
    /// All `psi` images are distinct (`z == 0`).
    pub in_e2: bool,
    /// Number of unordered block pairs with equal `psi` image.
    pub z: usize,
    /// Number of `j` sharing a block with `j + n`.
    pub x: usize,
    /// `phi(p)`, defined exactly when `in_e1`.
    pub cover: Option<TwoCover>,
}

pub fn classify(p: &SetPartition, n: usize) -> Result<Classification, OracleError> {
    if p.ground_size() != 2 * n {
        return Err(OracleError::WrongGroundSize {
            got: p.ground_size(),
            expected: 2 * n,
        });
    }
    let rgs = p.rgs();
    let x = (0..n).filter(|&j| rgs[j] == rgs[j + n]).count();
    let mut images: Vec<u64> = p.block_masks().into_iter().map(|m| psi_mask(m, n)).collect();
    images.sort_unstable();
    let z = equal_pairs(&images);
    let in_e1 = x == 0;
    Ok(Classification {
        in_e1,
        in_e2: z == 0,
        z,
        x,
        cover: in_e1.then(|| TwoCover::from_masks(n, &images)),
    })
}

fn equal_pairs(sorted: &[u64]) -> usize {
    let mut total = 0;
    let mut run = 1;
    for i in 1..=sorted.len() {
        if i < sorted.len() && sorted[i] == sorted[i - 1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total
}

/// Raw tallies from one pass over the partitions of `[2n]`.
#[derive(Debug, Clone, Default)]
struct Tally {
    x_hist: Vec<u64>,
    e1: u64,
    e2: u64,
    c: u64,
    d_hist: Vec<u64>,
    // canonical (sorted) psi-image masks -> preimage count within E1
    fibers: HashMap<Vec<u64>, u64>,
}

impl Tally {
    fn new(n: usize) -> Self {
        Tally {
            x_hist: vec![0; n + 1],
            d_hist: vec![0; n + 1],
            ..Default::default()
        }
    }

    fn merge(&mut self, other: Tally) {
        for (a, b) in self.x_hist.iter_mut().zip(other.x_hist) {
            *a += b;
        }
        for (a, b) in self.d_hist.iter_mut().zip(other.d_hist) {
            *a += b;
        }
        self.e1 += other.e1;
        self.e2 += other.e2;
        self.c += other.c;
        for (k, v) in other.fibers {
            *self.fibers.entry(k).or_insert(0) += v;
        }
    }
}

struct Walker {
    n: usize,
    total: usize,
    labels: Vec<u32>,
    masks: Vec<u64>,
    scratch: Vec<u64>,
    tally: Tally,
}

impl Walker {
    fn leaf(&mut self) {
        let n = self.n;
        let x = (0..n)
            .filter(|&j| self.labels[j] == self.labels[j + n])
            .count();
        self.tally.x_hist[x] += 1;
        self.scratch.clear();
        self.scratch.extend(self.masks.iter().map(|&m| psi_mask(m, n)));
        self.scratch.sort_unstable();
        let z = equal_pairs(&self.scratch);
        if z == 0 {
            self.tally.e2 += 1;
        }
        if x == 0 {
            self.tally.e1 += 1;
            if z == 0 {
                self.tally.c += 1;
            }
            // z <= n inside E1: each equal pair consumes two copies of some element.
            self.tally.d_hist[z] += 1;
            match self.tally.fibers.get_mut(self.scratch.as_slice()) {
                Some(count) => *count += 1,
                None => {
                    self.tally.fibers.insert(self.scratch.clone(), 1);
                }
            }
        }
    }

    fn descend(&mut self, i: usize) {
        if i == self.total {
            self.leaf();
            return;
        }
        let blocks = self.masks.len();
        for label in 0..=blocks {
            if label == blocks {
                self.masks.push(0);
            }
            self.masks[label] |= 1 << i;
            self.labels[i] = label as u32;
            self.descend(i + 1);
            self.masks[label] &= !(1 << i);
            if label == blocks {
                self.masks.pop();
            }
        }
    }
}

fn run_tally(n: usize, workers: usize) -> Tally {
    let total = 2 * n;
    let walker = |prefixes: Vec<SetPartition>| {
        let mut w = Walker {
            n,
            total,
            labels: vec![0; total],
            masks: Vec::new(),
            scratch: Vec::new(),
            tally: Tally::new(n),
        };
        for prefix in prefixes {
            w.masks = prefix.block_masks();
            w.labels[..prefix.ground_size()].copy_from_slice(prefix.rgs());
            w.descend(prefix.ground_size());
        }
        w.tally
    };
    // Split on the labels of the first few elements; the union of the subtrees
    // is every partition, whatever the worker count.
    let depth = total.min(4);
    let prefixes: Vec<SetPartition> = enumerate_partitions(depth).collect();
    let workers = workers.max(1).min(prefixes.len());
    if workers == 1 {
        return walker(prefixes);
    }
    let mut shares: Vec<Vec<SetPartition>> = vec![Vec::new(); workers];
    for (i, p) in prefixes.into_iter().enumerate() {
        shares[i % workers].push(p);
    }
    let tallies: Vec<Tally> = std::thread::scope(|scope| {
        let handles: Vec<_> = shares
            .into_iter()
            .map(|share| scope.spawn(move || walker(share)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("oracle worker panicked")).collect()
    });
    let mut acc = Tally::new(n);
    for t in tallies {
        acc.merge(t);
    }
    acc
}

/// Cardinalities gathered by the oracle at one `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleCounts {
    pub n: usize,
    /// `B_{2n}`: partitions visited.
    pub partitions: u64,
    pub s: u64,
    pub t: u64,
    pub u: u64,
    pub v: u64,
    pub e1: u64,
    pub e2: u64,
    pub c: u64,
    /// `|D_{rho,n}|` for `rho = 0..=n`.
    pub d_histogram: Vec<u64>,
    /// `sum over partitions of (X)_r` for `r = 0..=n`.
    pub x_falling_moments: Vec<Natural>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberEntry {
    pub cover: TwoCover,
    pub rho: usize,
    pub fiber_size: u64,
    pub expected: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberReport {
    pub n: usize,
    pub entries: Vec<FiberEntry>,
    /// Every proper cover has a preimage in `C_n` and `C_n` maps only to proper covers.
    pub proper_onto: bool,
}

impl FiberReport {
    pub fn mismatches(&self) -> impl Iterator<Item = &FiberEntry> {
        self.entries.iter().filter(|e| e.fiber_size != e.expected)
    }

    pub fn passed(&self) -> bool {
        self.proper_onto && self.mismatches().next().is_none()
    }

    pub fn fiber_of(&self, cover: &TwoCover) -> Option<u64> {
        self.entries
            .iter()
            .find(|e| &e.cover == cover)
            .map(|e| e.fiber_size)
    }
}

/// One exhaustive pass at `n`, from which every oracle quantity is derived.
#[derive(Debug, Clone)]
pub struct OracleSurvey {
    n: usize,
    tally: Tally,
}

impl OracleSurvey {
    pub fn run(n: usize, cfg: &OracleConfig) -> Result<Self, OracleError> {
        cfg.check(n)?;
        Ok(OracleSurvey {
            n,
            tally: run_tally(n, cfg.workers),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn flags(&self, masks: &[u64]) -> (bool, bool) {
        let proper = masks.windows(2).all(|w| w[0] != w[1]);
        let restricted = masks
            .iter()
            .enumerate()
            .all(|(i, a)| masks[i + 1..].iter().all(|b| (a & b).count_ones() < 2));
        (proper, restricted)
    }

    /// Counts without any identity check.
    pub fn raw_counts(&self) -> OracleCounts {
        let n = self.n;
        let tally = &self.tally;
        let (mut s, mut t, mut u, mut v) = (0, 0, 0, 0);
        for key in tally.fibers.keys() {
            let (proper, restricted) = self.flags(key);
            s += 1;
            t += proper as u64;
            u += restricted as u64;
            v += (proper && restricted) as u64;
        }
        let x_falling_moments = (0..=n)
            .map(|r| {
                tally
                    .x_hist
                    .iter()
                    .enumerate()
                    .map(|(x, &count)| falling_factorial(x, r) * count)
                    .sum()
            })
            .collect();
        OracleCounts {
            n,
            partitions: tally.x_hist.iter().sum(),
            s,
            t,
            u,
            v,
            e1: tally.e1,
            e2: tally.e2,
            c: tally.c,
            d_histogram: tally.d_hist.clone(),
            x_falling_moments,
        }
    }

    /// Counts, with [`identity_checks`] enforced.
    pub fn counts(&self) -> Result<OracleCounts, OracleError> {
        let counts = self.raw_counts();
        match identity_checks(&counts).into_iter().find(|c| !c.passed) {
            Some(failed) => Err(OracleError::IdentityViolation {
                n: self.n,
                identity: failed.identity,
                detail: failed.detail,
            }),
            None => Ok(counts),
        }
    }

    /// Preimage sizes of every cover under `phi`.
    pub fn fiber_report(&self) -> FiberReport {
        let n = self.n;
        let mut entries: Vec<FiberEntry> = self
            .tally
            .fibers
            .iter()
            .map(|(key, &size)| {
                let rho = equal_pairs(key);
                FiberEntry {
                    cover: TwoCover::from_masks(n, key),
                    rho,
                    fiber_size: size,
                    expected: 1u64 << (n - rho),
                }
            })
            .collect();
        entries.sort_by(|a, b| a.cover.cmp(&b.cover));
        // C_n is E1 with z = 0, i.e. exactly the fibers of the proper images; onto
        // means those preimages add up to |C_n| and each proper image was hit.
        let proper_total: u64 = entries
            .iter()
            .filter(|e| e.cover.is_proper())
            .map(|e| e.fiber_size)
            .sum();
        let proper_hit = entries
            .iter()
            .filter(|e| e.cover.is_proper())
            .all(|e| e.fiber_size > 0 && e.rho == 0);
        FiberReport {
            n,
            entries,
            proper_onto: proper_hit && proper_total == self.tally.c,
        }
    }

    /// Distinct labelled line graphs of the restricted covers.
    pub fn line_count(&self) -> u64 {
        let mut seen: HashSet<LabeledGraph> = HashSet::new();
        for key in self.tally.fibers.keys() {
            if self.flags(key).1 {
                seen.insert(line_graph_of_masks(self.n, key));
            }
        }
        seen.len() as u64
    }

    /// Every distinct 2-cover of `[n]`, canonical and sorted.
    pub fn covers(&self) -> Vec<TwoCover> {
        let mut out: Vec<TwoCover> = self
            .tally
            .fibers
            .keys()
            .map(|k| TwoCover::from_masks(self.n, k))
            .collect();
        out.sort();
        out
    }
}

/// Outcome of one exact identity check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityCheck {
    pub identity: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// `t 2^n = |C_n|`, `s 2^n = sum_rho |D_rho| 2^rho` and `|D_0| = |C_n|`.
pub fn identity_checks(counts: &OracleCounts) -> Vec<IdentityCheck> {
    let two_n = Natural::from(1u8) << counts.n;
    let lhs_t = Natural::from(counts.t) * &two_n;
    let lhs_s = Natural::from(counts.s) * &two_n;
    let weighted: Natural = counts
        .d_histogram
        .iter()
        .enumerate()
        .map(|(rho, &d)| Natural::from(d) << rho)
        .sum();
    vec![
        IdentityCheck {
            identity: "t_n 2^n = |C_n|",
            passed: lhs_t == Natural::from(counts.c),
            detail: format!("{lhs_t} vs {}", counts.c),
        },
        IdentityCheck {
            identity: "s_n 2^n = sum_rho |D_rho,n| 2^rho",
            passed: lhs_s == weighted,
            detail: format!("{lhs_s} vs {weighted}"),
        },
        IdentityCheck {
            identity: "|D_0,n| = |C_n|",
            passed: counts.d_histogram.first() == Some(&counts.c),
            detail: format!("{} vs {}", counts.d_histogram.first().copied().unwrap_or(0), counts.c),
        },
    ]
}

pub fn oracle_counts(n: usize, cfg: &OracleConfig) -> Result<OracleCounts, OracleError> {
    OracleSurvey::run(n, cfg)?.counts()
}

pub fn fiber_check(n: usize, cfg: &OracleConfig) -> Result<FiberReport, OracleError> {
    Ok(OracleSurvey::run(n, cfg)?.fiber_report())
}

pub fn oracle_line_count(n: usize, cfg: &OracleConfig) -> Result<u64, OracleError> {
    Ok(OracleSurvey::run(n, cfg)?.line_count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(n2: usize, blocks: &[&[usize]]) -> SetPartition {
        SetPartition::from_blocks(n2, &blocks.iter().map(|b| b.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn cover(n: usize, blocks: &[&[usize]]) -> TwoCover {
        TwoCover::new(n, blocks.iter().map(|b| b.to_vec()).collect()).unwrap()
    }

    #[test]
    fn classify_examples() {
        let c = classify(&part(4, &[&[1, 4], &[2, 3]]), 2).unwrap();
        assert!(c.in_e1 && !c.in_e2);
        assert_eq!(c.z, 1);
        assert_eq!(c.cover.unwrap(), cover(2, &[&[1, 2], &[1, 2]]));

        let c = classify(&part(4, &[&[1], &[2, 3], &[4]]), 2).unwrap();
        assert!(c.in_e1 && c.in_e2);
        let cv = c.cover.unwrap();
        assert_eq!(cv, cover(2, &[&[1], &[1, 2], &[2]]));
        assert!(cv.is_proper() && cv.is_restricted());

        let c = classify(&part(4, &[&[1, 3], &[2], &[4]]), 2).unwrap();
        assert!(!c.in_e1);
        assert!(c.cover.is_none());

        assert!(matches!(
            classify(&part(3, &[&[1, 2, 3]]), 2),
            Err(OracleError::WrongGroundSize { got: 3, expected: 4 })
        ));
    }

    #[test]
    fn counts_small() {
        let cfg = OracleConfig::default();
        let c2 = oracle_counts(2, &cfg).unwrap();
        assert_eq!((c2.s, c2.t, c2.u, c2.v), (3, 1, 2, 1));
        assert_eq!((c2.e1, c2.c), (7, 4));
        assert_eq!(c2.d_histogram, vec![4, 2, 1]);

        let c1 = oracle_counts(1, &cfg).unwrap();
        assert_eq!((c1.s, c1.t, c1.u, c1.v), (1, 0, 1, 0));

        let c0 = oracle_counts(0, &cfg).unwrap();
        assert_eq!((c0.s, c0.t, c0.u, c0.v, c0.e1, c0.e2, c0.c), (1, 1, 1, 1, 1, 1, 1));
    }

    #[test]
    fn fibers_at_two() {
        let report = fiber_check(2, &OracleConfig::default()).unwrap();
        assert!(report.passed());
        assert_eq!(report.fiber_of(&cover(2, &[&[1], &[1, 2], &[2]])), Some(4));
        assert_eq!(report.fiber_of(&cover(2, &[&[1, 2], &[1, 2]])), Some(2));
        assert_eq!(report.fiber_of(&cover(2, &[&[1], &[1], &[2], &[2]])), Some(1));
    }

    #[test]
    fn line_counts() {
        let cfg = OracleConfig::default();
        assert_eq!(oracle_line_count(1, &cfg).unwrap(), 1);
        assert_eq!(oracle_line_count(2, &cfg).unwrap(), 2);
        assert_eq!(oracle_line_count(3, &cfg).unwrap(), 8);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let one = OracleSurvey::run(4, &OracleConfig { limit: 6, workers: 1 }).unwrap();
        let three = OracleSurvey::run(4, &OracleConfig { limit: 6, workers: 3 }).unwrap();
        assert_eq!(one.counts().unwrap(), three.counts().unwrap());
        assert_eq!(one.fiber_report(), three.fiber_report());
    }

    #[test]
    fn walker_agrees_with_classify() {
        let n = 3;
        let survey = OracleSurvey::run(n, &OracleConfig::default()).unwrap();
        let mut e1 = 0;
        let mut covers = HashSet::new();
        for p in enumerate_partitions(2 * n) {
            let c = classify(&p, n).unwrap();
            if c.in_e1 {
                e1 += 1;
                covers.insert(c.cover.unwrap());
            }
        }
        let counts = survey.counts().unwrap();
        assert_eq!(counts.e1, e1);
        let mut covers: Vec<_> = covers.into_iter().collect();
        covers.sort();
        assert_eq!(covers, survey.covers());
    }

    #[test]
    fn limit_is_enforced() {
        let cfg = OracleConfig { limit: 3, workers: 1 };
        assert_eq!(
            oracle_counts(4, &cfg).unwrap_err(),
            OracleError::OverLimit { n: 4, limit: 3 }
        );
    }
}
