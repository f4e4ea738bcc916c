use crate::{Error, Result};

/// Sparse binary matrix with both row and column adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_adj: Vec<Vec<usize>>,
    col_adj: Vec<Vec<usize>>,
}

impl SparseMatrix {
    /// Builds the matrix from the column adjacency lists.
    pub fn from_columns(rows: usize, columns: Vec<Vec<usize>>) -> Result<Self> {
        let cols = columns.len();
        let mut row_adj = vec![Vec::new(); rows];
        let mut col_adj = columns;
        for (j, col) in col_adj.iter_mut().enumerate() {
            col.sort_unstable();
            if col.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParameter(format!("column {j} holds a repeated entry")));
            }
            for &i in col.iter() {
                if i >= rows {
                    return Err(Error::InvalidParameter(format!("row index {i} out of range in column {j}")));
                }
                row_adj[i].push(j);
            }
        }
        Ok(Self { rows, cols, row_adj, col_adj })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.row_adj[i]
    }

    pub fn col(&self, j: usize) -> &[usize] {
        &self.col_adj[j]
    }

    pub fn edges(&self) -> usize {
        self.col_adj.iter().map(Vec::len).sum()
    }

    pub fn column_degrees(&self) -> Vec<usize> {
        self.col_adj.iter().map(Vec::len).collect()
    }

    pub fn row_degrees(&self) -> Vec<usize> {
        self.row_adj.iter().map(Vec::len).collect()
    }

    /// `H·x` over GF(2), one bit per row.
    pub fn syndrome(&self, x: &[u8]) -> Vec<u8> {
        self.row_adj.iter().map(|r| r.iter().fold(0u8, |acc, &j| acc ^ (x[j] & 1))).collect()
    }

    pub fn is_codeword(&self, x: &[u8]) -> bool {
        x.len() == self.cols && self.row_adj.iter().all(|r| r.iter().fold(0u8, |acc, &j| acc ^ (x[j] & 1)) == 0)
    }
}

/// Bit row over GF(2) packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq)]
struct BitRow(Vec<u64>);

impl BitRow {
    fn zeros(bits: usize) -> Self {
        Self(vec![0; bits.div_ceil(64)])
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn flip(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }

    fn xor_assign(&mut self, other: &BitRow) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    fn dot(&self, other: &BitRow) -> u8 {
        (self.0.iter().zip(&other.0).map(|(a, b)| (a & b).count_ones()).sum::<u32>() & 1) as u8
    }
}

/// Systematic binary LDPC code with codeword layout `[info | parity]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdpcCode {
    h: SparseMatrix,
    k_info: usize,
    /// Row `i` gives parity bit `i` as a GF(2) combination of info bits.
    parity_map: Vec<BitRow>,
    /// Seed the construction ran with.
    pub seed: u64,
}

impl LdpcCode {
    /// Wraps `H = [A | B]` with `n - k` rows. Fails when `B` is singular.
    pub fn new(h: SparseMatrix, k_info: usize, seed: u64) -> Result<Self> {
        let n = h.cols();
        if k_info == 0 || k_info >= n || h.rows() != n - k_info {
            return Err(Error::InvalidParameter(format!(
                "H must have n - k rows: n = {n}, k = {k_info}, rows = {}",
                h.rows()
            )));
        }
        let r = n - k_info;
        // reduce [B | A] to [I | B^-1 A]
        let mut rows: Vec<(BitRow, BitRow)> = (0..r)
            .map(|i| {
                let (mut b, mut a) = (BitRow::zeros(r), BitRow::zeros(k_info));
                for &j in h.row(i) {
                    if j < k_info {
                        a.flip(j);
                    } else {
                        b.flip(j - k_info);
                    }
                }
                (b, a)
            })
            .collect();
        for c in 0..r {
            let pivot = (c..r)
                .find(|&i| rows[i].0.get(c))
                .ok_or_else(|| Error::InvalidParameter("parity part of H is singular".into()))?;
            rows.swap(c, pivot);
            let (pb, pa) = rows[c].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != c && row.0.get(c) {
                    row.0.xor_assign(&pb);
                    row.1.xor_assign(&pa);
                }
            }
        }
        Ok(Self { h, k_info, parity_map: rows.into_iter().map(|r| r.1).collect(), seed })
    }

    pub fn n_code(&self) -> usize {
        self.h.cols()
    }

    pub fn k_info(&self) -> usize {
        self.k_info
    }

    pub fn parity_check(&self) -> &SparseMatrix {
        &self.h
    }

    /// Systematic encoding `[u | B^-1 A u]`.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k_info {
            return Err(Error::InvalidParameter(format!("expected {} info bits, got {}", self.k_info, info.len())));
        }
        let mut u = BitRow::zeros(self.k_info);
        for (i, &b) in info.iter().enumerate() {
            if b & 1 == 1 {
                u.flip(i);
            }
        }
        let mut x = Vec::with_capacity(self.n_code());
        x.extend(info.iter().map(|b| b & 1));
        x.extend(self.parity_map.iter().map(|row| row.dot(&u)));
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hamming() -> SparseMatrix {
        // [7,4] Hamming code with an identity parity part
        let cols = vec![vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 1, 2], vec![0], vec![1], vec![2]];
        SparseMatrix::from_columns(3, cols).unwrap()
    }

    #[test]
    fn hamming_encoding() {
        let code = LdpcCode::new(hamming(), 4, 0).unwrap();
        for w in 0..16u8 {
            let info: Vec<u8> = (0..4).map(|i| (w >> i) & 1).collect();
            let x = code.encode(&info).unwrap();
            assert!(code.parity_check().is_codeword(&x));
            assert_eq!(&x[..4], &info[..]);
        }
    }

    #[test]
    fn singular_parity_part_is_rejected() {
        let cols = vec![vec![0], vec![0, 1], vec![0, 1]];
        let h = SparseMatrix::from_columns(2, cols).unwrap();
        assert!(LdpcCode::new(h, 1, 0).is_err());
    }

    #[test]
    fn adjacency_is_consistent() {
        let h = hamming();
        assert_eq!(h.edges(), 12);
        assert_eq!(h.row_degrees(), vec![4, 4, 4]);
        assert!(SparseMatrix::from_columns(2, vec![vec![0, 0]]).is_err());
        assert!(SparseMatrix::from_columns(2, vec![vec![3]]).is_err());
    }
}
