//! Compressed sparse row storage for symmetric matrices.

/// Accumulates `(row, col, value)` triplets; duplicates are summed in
/// insertion order when converted to [`SparseSymmetric`].
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        TripletBuilder {
            n,
            entries: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n && col < self.n);
        self.entries.push((row, col, value));
    }

    /// Add a dense local matrix `local` scattered to `dofs`, mirroring the
    /// upper triangle so that the stored pattern is exactly symmetric.
    pub fn add_symmetric_block(&mut self, dofs: &[usize], local: &[Vec<f64>]) {
        for a in 0..dofs.len() {
            for b in a..dofs.len() {
                let v = local[a][b];
                if v == 0.0 {
                    continue;
                }
                self.add(dofs[a], dofs[b], v);
                if a != b {
                    self.add(dofs[b], dofs[a], v);
                }
            }
        }
    }

    pub fn append(&mut self, other: TripletBuilder) {
        assert_eq!(self.n, other.n);
        self.entries.extend(other.entries);
    }

    pub fn build(mut self) -> SparseSymmetric {
        // stable sort keeps insertion order among duplicates, so (i, j) and
        // (j, i) sums are formed in the same order
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseSymmetric {
            n: self.n,
            row_ptr,
            cols,
            values,
        }
    }
}

/// Square sparse matrix in CSR form storing both triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseSymmetric {
    pub fn identity(n: usize) -> Self {
        SparseSymmetric {
            n,
            row_ptr: (0..=n).collect(),
            cols: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(a: &[Vec<f64>]) -> Self {
        let mut b = TripletBuilder::new(a.len());
        for (i, row) in a.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    b.add(i, j, v);
                }
            }
        }
        b.build()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.n)
            .map(|i| x[i] * self.row(i).map(|(j, v)| v * y[j]).sum::<f64>())
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `D^{-1/2} A D^{-1/2}` with `D = diag(A)`; requires a positive diagonal.
    pub fn jacobi_scaled(&self) -> Self {
        let d: Vec<f64> = self.diagonal().iter().map(|v| 1.0 / v.sqrt()).collect();
        let mut out = self.clone();
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.values[k] *= d[i] * d[self.cols[k]];
            }
        }
        out
    }

    /// Exact (bitwise) symmetry of stored values and pattern.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| {
            self.row(i).all(|(j, v)| {
                let r = self.row_ptr[j]..self.row_ptr[j + 1];
                match self.cols[r.clone()].binary_search(&i) {
                    Ok(k) => self.values[r.start + k].to_bits() == v.to_bits(),
                    Err(_) => false,
                }
            })
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        a
    }

    /// Entry-wise sum with `other` (same dimension).
    pub fn add(&self, other: &SparseSymmetric) -> SparseSymmetric {
        assert_eq!(self.n, other.n);
        let mut b = TripletBuilder::new(self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                b.add(i, j, v);
            }
        }
        for i in 0..other.n {
            for (j, v) in other.row(i) {
                b.add(i, j, v);
            }
        }
        b.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let mut b = TripletBuilder::new(2);
        b.add(0, 0, 1.0);
        b.add(0, 1, 2.0);
        b.add(0, 0, 3.0);
        b.add(1, 0, 2.0);
        let m = b.build();
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 0), 4.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert!(m.is_symmetric());
        assert_eq!(m.mul_vec(&[1.0, 1.0]), vec![6.0, 2.0]);
    }

    #[test]
    fn symmetric_block() {
        let mut b = TripletBuilder::new(3);
        let local = vec![vec![2.0, -1.0], vec![-1.0, 2.0]];
        b.add_symmetric_block(&[0, 2], &local);
        b.add_symmetric_block(&[2, 1], &local);
        let m = b.build();
        assert!(m.is_symmetric());
        assert_eq!(m.get(2, 2), 4.0);
        assert_eq!(m.get(0, 2), -1.0);
    }
}
