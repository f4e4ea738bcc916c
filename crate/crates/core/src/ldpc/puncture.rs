use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Punctured codeword positions; only parity positions are ever punctured.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PunctureMask {
    pub n_code: usize,
    pub k_info: usize,
    /// Sorted codeword indices.
    pub positions: Vec<usize>,
}

impl PunctureMask {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Per-position flags over the codeword.
    pub fn flags(&self) -> Vec<bool> {
        let mut f = vec![false; self.n_code];
        for &p in &self.positions {
            f[p] = true;
        }
        f
    }

    /// Codeword indices that are transmitted, in order.
    pub fn transmitted(&self) -> Vec<usize> {
        let f = self.flags();
        (0..self.n_code).filter(|&i| !f[i]).collect()
    }
}

/// `⌈(n - k) / m⌉`; `None` for `m = 0`.
pub fn puncture_period(n_code: usize, k_info: usize, m: usize) -> Option<usize> {
    (m > 0).then(|| (n_code - k_info).div_ceil(m))
}

/// Punctures `m` parity positions starting at the first parity bit and
/// stepping by the period. When the pattern runs past the parity field it
/// wraps around and moves to the next free position.
pub fn puncture_mask(n_code: usize, k_info: usize, m: usize) -> Result<PunctureMask> {
    if k_info >= n_code {
        return Err(Error::InvalidParameter(format!("k = {k_info} leaves no parity bits in n = {n_code}")));
    }
    let r = n_code - k_info;
    if m > r {
        return Err(Error::InvalidParameter(format!("cannot puncture {m} of {r} parity bits")));
    }
    let mut taken = vec![false; r];
    if let Some(period) = puncture_period(n_code, k_info, m) {
        for i in 0..m {
            let mut p = (i * period) % r;
            while taken[p] {
                p = (p + 1) % r;
            }
            taken[p] = true;
        }
    }
    let positions = (0..r).filter(|&p| taken[p]).map(|p| k_info + p).collect();
    Ok(PunctureMask { n_code, k_info, positions })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periods_and_positions() {
        assert!(puncture_mask(512, 256, 0).unwrap().is_empty());
        let m16 = puncture_mask(512, 256, 16).unwrap();
        assert_eq!(puncture_period(512, 256, 16), Some(16));
        assert_eq!(m16.positions, (0..16).map(|i| 256 + 16 * i).collect::<Vec<_>>());
        assert_eq!(puncture_period(512, 256, 24), Some(11));
        let m24 = puncture_mask(512, 256, 24).unwrap();
        assert_eq!(m24.positions, (0..24).map(|i| 256 + 11 * i).collect::<Vec<_>>());
    }

    #[test]
    fn wrapping_pattern_keeps_the_count() {
        for m in [48, 64, 100, 200, 256] {
            let mask = puncture_mask(512, 256, m).unwrap();
            assert_eq!(mask.len(), m);
            assert!(mask.positions.iter().all(|&p| (256..512).contains(&p)));
            assert_eq!(mask.transmitted().len(), 512 - m);
        }
        assert!(puncture_mask(512, 256, 257).is_err());
    }
}
