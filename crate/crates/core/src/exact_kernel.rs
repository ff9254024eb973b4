//! Arbitrary-precision combinatorial primitives.
//!
//! Bell and Stirling numbers are memoized in tables that grow on demand and
//! are shared by every caller in the process. Bell numbers are tabulated up to
//! a configurable cap ([`DEFAULT_BELL_CAP`]); indices above the cap are still
//! answered exactly, but recomputed on each call instead of being stored.

use std::sync::{OnceLock, RwLock};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Nonnegative arbitrary-precision integer.
pub type Natural = BigUint;

/// Exact rational number, always in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Largest Bell index stored by the shared table.
pub const DEFAULT_BELL_CAP: usize = 1024;

/// Memoized Bell numbers computed with the Bell triangle.
#[derive(Debug, Clone)]
pub struct BellTable {
    cap: usize,
    values: Vec<Natural>,
    // Last completed row of the triangle; row k starts with B_k and ends with B_{k+1}.
    row: Vec<Natural>,
}

impl BellTable {
    pub fn with_cap(cap: usize) -> Self {
        BellTable {
            cap,
            values: vec![Natural::one()],
            row: vec![Natural::one()],
        }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Number of stored values (indices `0..len()` are available without work).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, n: usize) -> Option<&Natural> {
        self.values.get(n)
    }

    /// Extends the table to cover index `n`, clamped to the cap.
    pub fn grow_to(&mut self, n: usize) {
        let target = n.min(self.cap);
        while self.values.len() <= target {
            let next = next_triangle_row(&self.row);
            self.values.push(next[0].clone());
            self.row = next;
        }
    }

    pub fn bell(&mut self, n: usize) -> Natural {
        self.grow_to(n);
        match self.values.get(n) {
            Some(b) => b.clone(),
            None => {
                // Above the cap: continue the triangle without storing it.
                let mut row = self.row.clone();
                for _ in self.values.len()..=n {
                    row = next_triangle_row(&row);
                }
                row.swap_remove(0)
            }
        }
    }
}

fn next_triangle_row(prev: &[Natural]) -> Vec<Natural> {
    let mut next = Vec::with_capacity(prev.len() + 1);
    next.push(prev[prev.len() - 1].clone());
    for above in prev {
        let v = &next[next.len() - 1] + above;
        next.push(v);
    }
    next
}

#[derive(Debug, Default)]
struct StirlingTable {
    rows: Vec<Vec<Natural>>,
}

impl StirlingTable {
    fn grow_to(&mut self, n: usize) {
        if self.rows.is_empty() {
            self.rows.push(vec![Natural::one()]);
        }
        while self.rows.len() <= n {
            let prev = &self.rows[self.rows.len() - 1];
            let m = prev.len();
            let mut row = vec![Natural::zero(); m + 1];
            for k in 1..=m {
                let mut v = prev[k - 1].clone();
                if k < m {
                    v += &prev[k] * k;
                }
                row[k] = v;
            }
            self.rows.push(row);
        }
    }
}

fn shared_bell() -> &'static RwLock<BellTable> {
    static TABLE: OnceLock<RwLock<BellTable>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(BellTable::with_cap(DEFAULT_BELL_CAP)))
}

fn shared_stirling() -> &'static RwLock<StirlingTable> {
    static TABLE: OnceLock<RwLock<StirlingTable>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(StirlingTable::default()))
}

/// The `n`th Bell number: the number of set partitions of an `n`-element set.
pub fn bell(n: usize) -> Natural {
    if let Some(b) = shared_bell().read().unwrap().get(n) {
        return b.clone();
    }
    shared_bell().write().unwrap().bell(n)
}

/// Bell numbers `B_0..=B_n` in one call.
pub fn bell_numbers(n: usize) -> Vec<Natural> {
    {
        let table = shared_bell().read().unwrap();
        if table.len() > n {
            return (0..=n).map(|k| table.get(k).unwrap().clone()).collect();
        }
    }
    let mut table = shared_bell().write().unwrap();
    table.grow_to(n);
    (0..=n).map(|k| table.bell(k)).collect()
}

/// Stirling number of the second kind `S(n, k)`.
pub fn stirling2(n: usize, k: usize) -> Natural {
    if k > n {
        return Natural::zero();
    }
    {
        let table = shared_stirling().read().unwrap();
        if let Some(row) = table.rows.get(n) {
            return row[k].clone();
        }
    }
    let mut table = shared_stirling().write().unwrap();
    table.grow_to(n);
    table.rows[n][k].clone()
}

/// Row `S(n, 0..=n)` of the Stirling triangle.
pub fn stirling2_row(n: usize) -> Vec<Natural> {
    {
        let table = shared_stirling().read().unwrap();
        if let Some(row) = table.rows.get(n) {
            return row.clone();
        }
    }
    let mut table = shared_stirling().write().unwrap();
    table.grow_to(n);
    table.rows[n].clone()
}

pub fn binomial(n: usize, k: usize) -> Natural {
    if k > n {
        return Natural::zero();
    }
    let k = k.min(n - k);
    let mut acc = Natural::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `C(n, k)` for a possibly huge upper index, used for `C(C(m,2), k)`.
pub fn binomial_big(n: &Natural, k: usize) -> Natural {
    if *n < Natural::from(k) {
        return Natural::zero();
    }
    let mut acc = Natural::one();
    for i in 0..k {
        acc *= n - Natural::from(i);
        acc /= i + 1;
    }
    acc
}

/// Rows `0..=n` of Pascal's triangle.
pub fn pascal_rows(n: usize) -> Vec<Vec<Natural>> {
    let mut rows: Vec<Vec<Natural>> = Vec::with_capacity(n + 1);
    rows.push(vec![Natural::one()]);
    for m in 1..=n {
        let prev = &rows[m - 1];
        let mut row = Vec::with_capacity(m + 1);
        row.push(Natural::one());
        for k in 1..m {
            row.push(&prev[k - 1] + &prev[k]);
        }
        row.push(Natural::one());
        rows.push(row);
    }
    rows
}

/// `n (n-1) ... (n-r+1)`; 1 for `r = 0` and 0 for `r > n`.
pub fn falling_factorial(n: usize, r: usize) -> Natural {
    if r > n {
        return Natural::zero();
    }
    ((n - r + 1)..=n).fold(Natural::one(), |acc, f| acc * f)
}

pub fn factorial(n: usize) -> Natural {
    falling_factorial(n, n)
}

/// `0!, 1!, ..., n!`.
pub fn factorials(n: usize) -> Vec<Natural> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(Natural::one());
    for k in 1..=n {
        let v = &out[k - 1] * k;
        out.push(v);
    }
    out
}
