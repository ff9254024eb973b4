use std::fmt;

use super::OracleError;

/// A set partition of `[N]` as a restricted growth string: `rgs[i]` is the
/// block label of element `i + 1`, `rgs[0] = 0` and each label is at most one
/// more than every label before it.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    rgs: Vec<u32>,
}

impl SetPartition {
    pub fn from_rgs(rgs: Vec<u32>) -> Result<Self, OracleError> {
        let mut next = 0u32;
        for (i, &label) in rgs.iter().enumerate() {
            if label > next {
                return Err(OracleError::InvalidRgs { position: i, label });
            }
            if label == next {
                next += 1;
            }
        }
        Ok(SetPartition { rgs })
    }

    /// Builds the partition from blocks of 1-based elements.
    pub fn from_blocks(ground_size: usize, blocks: &[Vec<usize>]) -> Result<Self, OracleError> {
        let mut owner: Vec<Option<usize>> = vec![None; ground_size];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(OracleError::NotAPartition("empty block".into()));
            }
            for &e in block {
                if e == 0 || e > ground_size {
                    return Err(OracleError::NotAPartition(format!("element {e} outside [{ground_size}]")));
                }
                if owner[e - 1].replace(b).is_some() {
                    return Err(OracleError::NotAPartition(format!("element {e} repeated")));
                }
            }
        }
        let mut relabel: Vec<Option<u32>> = vec![None; blocks.len()];
        let mut next = 0;
        let mut rgs = Vec::with_capacity(ground_size);
        for (e, o) in owner.into_iter().enumerate() {
            let b = o.ok_or_else(|| OracleError::NotAPartition(format!("element {} uncovered", e + 1)))?;
            let label = *relabel[b].get_or_insert_with(|| {
                next += 1;
                next - 1
            });
            rgs.push(label);
        }
        Ok(SetPartition { rgs })
    }

    pub fn ground_size(&self) -> usize {
        self.rgs.len()
    }

    pub fn rgs(&self) -> &[u32] {
        &self.rgs
    }

    pub fn num_blocks(&self) -> usize {
        self.rgs.iter().max().map_or(0, |&m| m as usize + 1)
    }

    /// Blocks as sorted lists of 1-based elements, ordered by smallest element.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.num_blocks()];
        for (i, &label) in self.rgs.iter().enumerate() {
            blocks[label as usize].push(i + 1);
        }
        blocks
    }

    /// Blocks as bitmasks over 0-based elements.
    pub fn block_masks(&self) -> Vec<u64> {
        let mut masks = vec![0u64; self.num_blocks()];
        for (i, &label) in self.rgs.iter().enumerate() {
            masks[label as usize] |= 1 << i;
        }
        masks
    }
}

impl fmt::Debug for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SetPartition{:?}", self.blocks())
    }
}

/// Every partition of `[n]` exactly once, in lexicographic RGS order.
pub fn enumerate_partitions(n: usize) -> PartitionIter {
    PartitionIter {
        rgs: vec![0; n],
        // prefix_max[i] = max(rgs[0..=i])
        prefix_max: vec![0; n],
        done: false,
    }
}

#[derive(Debug, Clone)]
pub struct PartitionIter {
    rgs: Vec<u32>,
    prefix_max: Vec<u32>,
    done: bool,
}

impl Iterator for PartitionIter {
    type Item = SetPartition;

    fn next(&mut self) -> Option<SetPartition> {
        if self.done {
            return None;
        }
        let current = SetPartition { rgs: self.rgs.clone() };
        let n = self.rgs.len();
        // Advance: rightmost position whose label can still grow.
        let mut i = n;
        loop {
            if i <= 1 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.rgs[i] <= self.prefix_max[i - 1] {
                self.rgs[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.rgs[i]);
                for j in i + 1..n {
                    self.rgs[j] = 0;
                    self.prefix_max[j] = self.prefix_max[i];
                }
                break;
            }
        }
        Some(current)
    }
}

/// `psi(S) = { j : j in S or j + n in S }` for a block of 1-based elements of `[2n]`.
pub fn psi(block: &[usize], n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = block.iter().map(|&e| if e > n { e - n } else { e }).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// `psi` on bitmasks over 0-based elements of `[2n]`.
#[inline]
pub(crate) fn psi_mask(mask: u64, n: usize) -> u64 {
    let low = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    (mask | (mask >> n)) & low
}
