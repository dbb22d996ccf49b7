//! Exact linear algebra over the two-element field.
//!
//! `BitMatrix` packs rows into machine words; elimination XORs whole words.
//! Large chain complexes go through the sparse cancellation reducer in
//! `reduce`, which removes invertible differential entries pairwise until
//! the differential is zero.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("not a complex: d.d != 0 between degrees {0} and {1}")]
    NotAComplex(usize, usize),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
}

/// Dense GF(2) matrix with bit-packed rows.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

impl std::fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows.min(16) {
            let row: String = (0..self.cols.min(64))
                .map(|j| if self.get(i, j) { '1' } else { '.' })
                .collect();
            writeln!(f, "  {row}")?;
        }
        Ok(())
    }
}

impl BitMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64).max(1);
        BitMatrix {
            rows,
            cols,
            words_per_row,
            data: vec![0; rows * words_per_row],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, entries: &[(usize, usize)]) -> Self {
        let mut m = Self::zero(rows, cols);
        for &(i, j) in entries {
            m.set(i, j, true);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.words_per_row + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        let w = &mut self.data[i * self.words_per_row + j / 64];
        if v {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    pub fn flip(&mut self, i: usize, j: usize) {
        self.data[i * self.words_per_row + j / 64] ^= 1 << (j % 64);
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        let w = self.words_per_row;
        let (s, d) = (src * w, dst * w);
        for k in 0..w {
            let v = self.data[s + k];
            self.data[d + k] ^= v;
        }
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    t.set(j, i, true);
                }
            }
        }
        t
    }

    pub fn mul(&self, rhs: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, rhs.rows, "mul dimension mismatch");
        let mut out = BitMatrix::zero(self.rows, rhs.cols);
        let w = rhs.words_per_row;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    let (s, d) = (j * w, i * w);
                    for k in 0..w {
                        let v = rhs.data[s + k];
                        out.data[d + k] ^= v;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &BitMatrix) -> BitMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a ^= b;
        }
        out
    }

    /// Rank by row elimination.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..m.cols {
            let pivot = (rank..m.rows).find(|&i| m.get(i, col));
            let Some(p) = pivot else { continue };
            m.data.swap_chunks(rank, p, m.words_per_row);
            for i in 0..m.rows {
                if i != rank && m.get(i, col) {
                    m.xor_row_into(rank, i);
                }
            }
            rank += 1;
            if rank == m.rows {
                break;
            }
        }
        rank
    }

    /// Solves `self * x = b` for one solution, if any. `b` has one column
    /// per right-hand side.
    pub fn solve(&self, b: &BitMatrix) -> Option<BitMatrix> {
        assert_eq!(self.rows, b.rows, "solve dimension mismatch");
        // Eliminate on the augmented matrix [self | b].
        let mut aug = BitMatrix::zero(self.rows, self.cols + b.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    aug.set(i, j, true);
                }
            }
            for j in 0..b.cols {
                if b.get(i, j) {
                    aug.set(i, self.cols + j, true);
                }
            }
        }
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..self.cols {
            let Some(p) = (r..aug.rows).find(|&i| aug.get(i, col)) else {
                continue;
            };
            aug.data.swap_chunks(r, p, aug.words_per_row);
            for i in 0..aug.rows {
                if i != r && aug.get(i, col) {
                    aug.xor_row_into(r, i);
                }
            }
            pivots.push(col);
            r += 1;
            if r == aug.rows {
                break;
            }
        }
        // Inconsistent if a zero-row has a nonzero rhs.
        for i in r..aug.rows {
            for j in 0..b.cols {
                if aug.get(i, self.cols + j) {
                    return None;
                }
            }
        }
        let mut x = BitMatrix::zero(self.cols, b.cols);
        for (row, &col) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                if aug.get(row, self.cols + j) {
                    x.set(col, j, true);
                }
            }
        }
        Some(x)
    }

    /// Basis of the right kernel, one row per basis vector.
    pub fn kernel_basis(&self) -> BitMatrix {
        let mut m = self.clone();
        let mut pivot_col_of_row = Vec::new();
        let mut r = 0;
        for col in 0..m.cols {
            let Some(p) = (r..m.rows).find(|&i| m.get(i, col)) else {
                continue;
            };
            m.data.swap_chunks(r, p, m.words_per_row);
            for i in 0..m.rows {
                if i != r && m.get(i, col) {
                    m.xor_row_into(r, i);
                }
            }
            pivot_col_of_row.push(col);
            r += 1;
            if r == m.rows {
                break;
            }
        }
        let pivot_set: std::collections::HashSet<usize> =
            pivot_col_of_row.iter().copied().collect();
        let free: Vec<usize> = (0..m.cols).filter(|c| !pivot_set.contains(c)).collect();
        let mut basis = BitMatrix::zero(free.len(), m.cols);
        for (bi, &fc) in free.iter().enumerate() {
            basis.set(bi, fc, true);
            for (row, &pc) in pivot_col_of_row.iter().enumerate() {
                if m.get(row, fc) {
                    basis.set(bi, pc, true);
                }
            }
        }
        basis
    }
}

trait SwapChunks {
    fn swap_chunks(&mut self, a: usize, b: usize, len: usize);
}

impl SwapChunks for Vec<u64> {
    fn swap_chunks(&mut self, a: usize, b: usize, len: usize) {
        if a == b {
            return;
        }
        for k in 0..len {
            self.swap(a * len + k, b * len + k);
        }
    }
}

/// Homology ranks of a complex `C_0 -> C_1 -> ... -> C_m` given as boundary
/// maps `d_k: C_k -> C_{k+1}` (matrix rows index the source).
///
/// Verifies `d_{k+1} d_k = 0` before computing
/// `dim ker d_k - rank d_{k-1}` per degree.
pub fn homology_ranks(dims: &[usize], maps: &[BitMatrix]) -> Result<Vec<usize>, Gf2Error> {
    assert_eq!(maps.len() + 1, dims.len(), "need one map per adjacent pair");
    for (k, m) in maps.iter().enumerate() {
        if m.rows() != dims[k] || m.cols() != dims[k + 1] {
            return Err(Gf2Error::DimMismatch(format!(
                "map {k} is {}x{}, expected {}x{}",
                m.rows(),
                m.cols(),
                dims[k],
                dims[k + 1]
            )));
        }
    }
    for k in 0..maps.len().saturating_sub(1) {
        if !maps[k].mul(&maps[k + 1]).is_zero() {
            return Err(Gf2Error::NotAComplex(k, k + 1));
        }
    }
    let ranks: Vec<usize> = maps.iter().map(|m| m.rank()).collect();
    let mut out = Vec::with_capacity(dims.len());
    for k in 0..dims.len() {
        let r_out = if k < maps.len() { ranks[k] } else { 0 };
        let r_in = if k > 0 { ranks[k - 1] } else { 0 };
        out.push(dims[k] - r_out - r_in);
    }
    Ok(out)
}

pub mod reduce {
    //! Cancellation-based reduction of a sparse GF(2) chain complex.
    //!
    //! Any nonzero differential entry is invertible over GF(2); cancelling
    //! the pair (x, y) with y in d(x) replaces d by
    //! d'(a) = d(a) + d(x) whenever y in d(a), then deletes x and y. Over a
    //! field, repeating until no entries remain leaves the homology as the
    //! surviving generators.

    /// Sparse complex: per generator a sorted target list one degree up.
    pub struct SparseComplex {
        pub degree: Vec<u32>,
        fwd: Vec<Vec<u32>>,
        bwd: Vec<Vec<u32>>,
        alive: Vec<bool>,
    }

    impl SparseComplex {
        pub fn new(degree: Vec<u32>, fwd: Vec<Vec<u32>>) -> Self {
            let n = degree.len();
            let mut bwd = vec![Vec::new(); n];
            for (src, targets) in fwd.iter().enumerate() {
                for &t in targets {
                    bwd[t as usize].push(src as u32);
                }
            }
            SparseComplex {
                degree,
                fwd,
                bwd,
                alive: vec![true; n],
            }
        }

        fn toggle(v: &mut Vec<u32>, x: u32) {
            match v.binary_search(&x) {
                Ok(i) => {
                    v.remove(i);
                }
                Err(i) => v.insert(i, x),
            }
        }

        /// Cancels the differential entry from `x` to `y`. Entries into `x`
        /// and out of `y` are forced by d.d = 0 and simply drop; sources of
        /// `y` pick up a copy of d(x).
        fn cancel(&mut self, x: u32, y: u32) {
            let row = std::mem::take(&mut self.fwd[x as usize]);
            let col = std::mem::take(&mut self.bwd[y as usize]);
            let into_x = std::mem::take(&mut self.bwd[x as usize]);
            let out_of_y = std::mem::take(&mut self.fwd[y as usize]);
            self.alive[x as usize] = false;
            self.alive[y as usize] = false;
            for &s in &into_x {
                let f = &mut self.fwd[s as usize];
                if let Ok(i) = f.binary_search(&x) {
                    f.remove(i);
                }
            }
            for &t in &out_of_y {
                let b = &mut self.bwd[t as usize];
                if let Ok(i) = b.binary_search(&y) {
                    b.remove(i);
                }
            }
            for &t in &row {
                if t != y {
                    let b = &mut self.bwd[t as usize];
                    if let Ok(i) = b.binary_search(&x) {
                        b.remove(i);
                    }
                }
            }
            for &s in &col {
                if s != x {
                    let f = &mut self.fwd[s as usize];
                    if let Ok(i) = f.binary_search(&y) {
                        f.remove(i);
                    }
                }
            }
            for &s in &col {
                if s == x {
                    continue;
                }
                for &t in &row {
                    if t == y {
                        continue;
                    }
                    Self::toggle(&mut self.fwd[s as usize], t);
                    Self::toggle(&mut self.bwd[t as usize], s);
                }
            }
        }

        /// Reduces until the differential is empty; returns surviving
        /// generator counts per degree.
        pub fn homology_ranks(mut self) -> Vec<usize> {
            let n = self.degree.len();
            // Pivot queue keyed by fill estimate; start with the cheapest.
            let mut queue: std::collections::BinaryHeap<std::cmp::Reverse<(usize, u32)>> =
                (0..n as u32)
                    .filter(|&i| !self.fwd[i as usize].is_empty())
                    .map(|i| std::cmp::Reverse((self.fwd[i as usize].len(), i)))
                    .collect();
            while let Some(std::cmp::Reverse((cost, x))) = queue.pop() {
                let xi = x as usize;
                if !self.alive[xi] || self.fwd[xi].is_empty() {
                    continue;
                }
                if self.fwd[xi].len() != cost {
                    queue.push(std::cmp::Reverse((self.fwd[xi].len(), x)));
                    continue;
                }
                // Choose the target with the sparsest column.
                let y = *self
                    .fwd[xi]
                    .iter()
                    .min_by_key(|&&t| self.bwd[t as usize].len())
                    .unwrap();
                let touched: Vec<u32> = self.bwd[y as usize]
                    .iter()
                    .copied()
                    .filter(|&s| s != x)
                    .collect();
                self.cancel(x, y);
                for s in touched {
                    if self.alive[s as usize] && !self.fwd[s as usize].is_empty() {
                        queue.push(std::cmp::Reverse((self.fwd[s as usize].len(), s)));
                    }
                }
            }
            let max_deg = self.degree.iter().copied().max().unwrap_or(0) as usize;
            let mut ranks = vec![0usize; max_deg + 1];
            for i in 0..n {
                if self.alive[i] {
                    ranks[self.degree[i] as usize] += 1;
                }
            }
            ranks
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_identity() {
        assert_eq!(BitMatrix::identity(3).rank(), 3);
    }

    #[test]
    fn rank_zero() {
        assert_eq!(BitMatrix::zero(4, 7).rank(), 0);
    }

    #[test]
    fn rank_equal_rows() {
        let m = BitMatrix::from_rows(2, 2, &[(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn rank_transpose_invariant() {
        let m = BitMatrix::from_rows(3, 5, &[(0, 0), (0, 4), (1, 2), (2, 0), (2, 2), (2, 4)]);
        assert_eq!(m.rank(), m.transpose().rank());
    }

    #[test]
    fn homology_zero_differentials() {
        let dims = [2, 4, 2];
        let maps = [BitMatrix::zero(2, 4), BitMatrix::zero(4, 2)];
        assert_eq!(homology_ranks(&dims, &maps).unwrap(), vec![2, 4, 2]);
    }

    #[test]
    fn homology_identity_map() {
        let dims = [2, 2];
        let maps = [BitMatrix::identity(2)];
        assert_eq!(homology_ranks(&dims, &maps).unwrap(), vec![0, 0]);
    }

    #[test]
    fn homology_single_group() {
        // Complex of the crossing-free unknot: one group of rank 2.
        assert_eq!(homology_ranks(&[2], &[]).unwrap(), vec![2]);
    }

    #[test]
    fn not_a_complex_detected() {
        let d0 = BitMatrix::identity(2);
        let d1 = BitMatrix::identity(2);
        assert_eq!(
            homology_ranks(&[2, 2, 2], &[d0, d1]),
            Err(Gf2Error::NotAComplex(0, 1))
        );
    }

    #[test]
    fn solve_and_kernel() {
        let m = BitMatrix::from_rows(3, 3, &[(0, 0), (0, 1), (1, 1), (1, 2), (2, 0), (2, 2)]);
        // m is singular: rows sum to zero.
        assert_eq!(m.rank(), 2);
        let k = m.transpose().kernel_basis();
        assert_eq!(k.rows(), 1);
        let b = BitMatrix::zero(3, 1);
        assert!(m.solve(&b).is_some());
    }

    #[test]
    fn sparse_reduction_matches_dense() {
        let degree = vec![0, 0, 1, 1, 1, 2];
        let fwd: Vec<Vec<u32>> =
            vec![vec![2, 3], vec![2, 4], vec![5], vec![5], vec![5], vec![]];
        let ranks = reduce::SparseComplex::new(degree, fwd).homology_ranks();
        let d0 = BitMatrix::from_rows(2, 3, &[(0, 0), (0, 1), (1, 0), (1, 2)]);
        let d1 = BitMatrix::from_rows(3, 1, &[(0, 0), (1, 0), (2, 0)]);
        let dense = homology_ranks(&[2, 3, 1], &[d0, d1]).unwrap();
        // Surviving generators per degree, padded to the dense length.
        let mut padded = ranks.clone();
        padded.resize(dense.len(), 0);
        assert_eq!(padded, dense);
    }
}
