//! Compressed sparse row matrices.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    /// Sorted column indices within each row.
    pub col: Vec<u32>,
    pub val: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate (row, col, value) triplets.
    pub fn from_triplets(n: usize, mut t: Vec<(u32, u32, f64)>) -> Result<Self> {
        if t.iter().any(|&(i, j, _)| i as usize >= n || j as usize >= n) {
            return Err(Error::InvalidArgument("triplet index out of range".into()));
        }
        t.sort_unstable_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col = Vec::with_capacity(t.len());
        let mut val: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(u32, u32)> = None;
        for (i, j, v) in t {
            if last == Some((i, j)) {
                *val.last_mut().expect("nonempty") += v;
            } else {
                col.push(j);
                val.push(v);
                row_ptr[i as usize + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self { n, row_ptr, col, val })
    }

    /// Zero-valued matrix with the given sorted, deduplicated column pattern per row.
    pub fn from_pattern(pattern: Vec<Vec<u32>>) -> Self {
        let n = pattern.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut col = Vec::new();
        for r in pattern {
            col.extend(r);
            row_ptr.push(col.len());
        }
        let nnz = col.len();
        Self {
            n,
            row_ptr,
            col,
            val: vec![0.0; nnz],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col: (0..n as u32).collect(),
            val: vec![1.0; n],
        }
    }

    pub fn nnz(&self) -> usize {
        self.col.len()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col[r.clone()], &self.val[r])
    }

    fn position(&self, i: usize, j: u32) -> Option<usize> {
        let (c, _) = self.row(i);
        c.binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j as u32).map_or(0.0, |k| self.val[k])
    }

    /// Adds into an existing pattern entry.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .position(i, j as u32)
            .expect("entry present in the sparsity pattern");
        self.val[k] += v;
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.val[k] * x[self.col[k] as usize];
            }
            *yi = s;
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// xᵀ·A·x.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let y = self.mul(x);
        x.iter().zip(&y).map(|(a, b)| a * b).sum()
    }

    /// Largest |A_ij − A_ji| relative to the largest |A_ij|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                scale = scale.max(a.abs());
                worst = worst.max((a - self.get(j as usize, i)).abs());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// P·A·Pᵀ where `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut inv = vec![0u32; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new as u32;
        }
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        row_ptr.push(0);
        let mut col = Vec::with_capacity(self.nnz());
        let mut val = Vec::with_capacity(self.nnz());
        let mut tmp: Vec<(u32, f64)> = Vec::new();
        for &old in perm {
            let (c, v) = self.row(old);
            tmp.clear();
            tmp.extend(c.iter().zip(v).map(|(&j, &a)| (inv[j as usize], a)));
            tmp.sort_unstable_by_key(|e| e.0);
            for &(j, a) in &tmp {
                col.push(j);
                val.push(a);
            }
            row_ptr.push(col.len());
        }
        Self {
            n: self.n,
            row_ptr,
            col,
            val,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_and_permute() {
        let m =
            CsrMatrix::from_triplets(3, vec![(0, 0, 1.0), (0, 0, 1.0), (1, 2, 3.0), (2, 1, 3.0), (2, 2, 5.0)]).unwrap();
        assert_eq!(m.get(0, 0), 2.0);
        assert_eq!(m.get(1, 2), 3.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.asymmetry(), 0.0);
        let p = m.permuted(&[2, 0, 1]);
        assert_eq!(p.get(0, 0), 5.0);
        assert_eq!(p.get(0, 2), 3.0);
        assert_eq!(p.get(1, 1), 2.0);
        assert_eq!(m.mul(&[1.0, 1.0, 1.0]), vec![2.0, 3.0, 8.0]);
    }
}
