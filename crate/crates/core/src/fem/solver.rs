//! Preconditioned conjugate gradients with incomplete Cholesky on a reverse Cuthill-McKee ordering.

use std::collections::VecDeque;

use super::csr::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// ‖b − A·x‖ / ‖b‖ recomputed from the returned solution.
    pub relative_residual: f64,
}

/// Reverse Cuthill-McKee ordering; `perm[new] = old`.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n;
    let degree: Vec<usize> = (0..n).map(|i| a.row_ptr[i + 1] - a.row_ptr[i]).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    let bfs = |start: usize, visited: &mut [bool], out: &mut Vec<usize>| {
        let mut q = VecDeque::new();
        visited[start] = true;
        q.push_back(start);
        let mut nb = Vec::new();
        while let Some(v) = q.pop_front() {
            out.push(v);
            nb.clear();
            let (c, _) = a.row(v);
            nb.extend(c.iter().map(|&j| j as usize).filter(|&j| !visited[j]));
            nb.sort_by_key(|&j| (degree[j], j));
            for &j in &nb {
                if !visited[j] {
                    visited[j] = true;
                    q.push_back(j);
                }
            }
        }
    };
    for &s in &by_degree {
        if visited[s] {
            continue;
        }
        // move towards a pseudo-peripheral node: last vertex of a BFS from `s`
        let mut probe_seen = visited.clone();
        let mut probe = Vec::new();
        bfs(s, &mut probe_seen, &mut probe);
        let far = *probe.last().unwrap_or(&s);
        bfs(far, &mut visited, &mut order);
    }
    order.reverse();
    order
}

/// Lower-triangular incomplete Cholesky factor on the matrix pattern.
struct Ic0 {
    l: CsrMatrix,
    diag_pos: Vec<usize>,
}

impl Ic0 {
    fn factor(a: &CsrMatrix, shift: f64) -> Option<Self> {
        let n = a.n;
        let mut pattern = Vec::with_capacity(n);
        for i in 0..n {
            let (c, _) = a.row(i);
            pattern.push(c.iter().copied().filter(|&j| j as usize <= i).collect::<Vec<u32>>());
        }
        let mut l = CsrMatrix::from_pattern(pattern);
        for i in 0..n {
            let (c, v) = a.row(i);
            for (&j, &x) in c.iter().zip(v) {
                if j as usize <= i {
                    l.add(i, j as usize, if j as usize == i { x * (1.0 + shift) } else { x });
                }
            }
        }
        let mut diag_pos = vec![0usize; n];
        for i in 0..n {
            let start = l.row_ptr[i];
            let end = l.row_ptr[i + 1];
            if end == start || l.col[end - 1] as usize != i {
                return None;
            }
            for kk in start..end - 1 {
                let k = l.col[kk] as usize;
                // L[i,k] -= Σ_{j<k} L[i,j]·L[k,j]
                let mut s = 0.0;
                let (mut p, mut q) = (start, l.row_ptr[k]);
                let qend = l.row_ptr[k + 1] - 1;
                while p < kk && q < qend {
                    let (cp, cq) = (l.col[p], l.col[q]);
                    if cp == cq {
                        s += l.val[p] * l.val[q];
                        p += 1;
                        q += 1;
                    } else if cp < cq {
                        p += 1;
                    } else {
                        q += 1;
                    }
                }
                l.val[kk] = (l.val[kk] - s) / l.val[diag_pos[k]];
            }
            let mut s = 0.0;
            for kk in start..end - 1 {
                s += l.val[kk] * l.val[kk];
            }
            let d = l.val[end - 1] - s;
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            l.val[end - 1] = d.sqrt();
            diag_pos[i] = end - 1;
        }
        Some(Self { l, diag_pos })
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = self.l.n;
        for i in 0..n {
            let mut s = r[i];
            for k in self.l.row_ptr[i]..self.diag_pos[i] {
                s -= self.l.val[k] * z[self.l.col[k] as usize];
            }
            z[i] = s / self.l.val[self.diag_pos[i]];
        }
        for i in (0..n).rev() {
            let zi = z[i] / self.l.val[self.diag_pos[i]];
            z[i] = zi;
            for k in self.l.row_ptr[i]..self.diag_pos[i] {
                z[self.l.col[k] as usize] -= self.l.val[k] * zi;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// r = b − A·x with compensated row sums, so the residual stays accurate when the row terms
/// are much larger than the result.
fn true_residual(a: &CsrMatrix, b: &[f64], x: &[f64], r: &mut [f64]) {
    for (i, ri) in r.iter_mut().enumerate() {
        let (cols, vals) = a.row(i);
        let mut sum = b[i];
        let mut err = 0.0;
        for (&c, &v) in cols.iter().zip(vals) {
            let p = -v * x[c as usize];
            let e = v.mul_add(-x[c as usize], -p);
            let t = sum + p;
            let z = t - sum;
            err += (sum - (t - z)) + (p - z) + e;
            sum = t;
        }
        *ri = sum + err;
    }
}

/// Solves the symmetric positive-definite system A·x = b to ‖b − A·x‖ ≤ `rel_tol`·‖b‖.
pub fn solve_spd(a: &CsrMatrix, b: &[f64], rel_tol: f64) -> Result<(Vec<f64>, SolveStats)> {
    if !(rel_tol > 0.0 && rel_tol <= 1e-3) {
        return Err(Error::InvalidArgument(format!(
            "relative tolerance {rel_tol} outside (0, 1e-3]"
        )));
    }
    if b.len() != a.n {
        return Err(Error::InvalidArgument("right-hand side length mismatch".into()));
    }
    let n = a.n;
    let bn = norm(b);
    if n == 0 || bn == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    for i in 0..n {
        let d = a.get(i, i);
        if !(d > 0.0) {
            return Err(if d == 0.0 {
                Error::Singular(format!("row {i} has no diagonal stiffness"))
            } else {
                Error::Indefinite(d)
            });
        }
    }
    let perm = rcm_ordering(a);
    let pa = a.permuted(&perm);
    let pb: Vec<f64> = perm.iter().map(|&o| b[o]).collect();
    let mut shift = 0.0;
    let pre = loop {
        if let Some(f) = Ic0::factor(&pa, shift) {
            break f;
        }
        shift = if shift == 0.0 { 1e-3 } else { shift * 4.0 };
        if shift > 10.0 {
            return Err(Error::Indefinite(shift));
        }
    };
    let max_iter = 20_000.max(4 * n).min(200_000);
    let mut x = vec![0.0; n];
    let mut r = pb.clone();
    let mut z = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut iterations = 0;
    for _restart in 0..4 {
        pre.apply(&r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let target = rel_tol * bn;
        while norm(&r) > 0.5 * target && iterations < max_iter {
            pa.matvec(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(Error::Indefinite(pap));
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            pre.apply(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
            iterations += 1;
        }
        // replace the recurrence residual by the true one
        true_residual(&pa, &pb, &x, &mut r);
        let rel = norm(&r) / bn;
        if rel <= rel_tol {
            let mut out = vec![0.0; n];
            for (new, &old) in perm.iter().enumerate() {
                out[old] = x[new];
            }
            return Ok((
                out,
                SolveStats {
                    iterations,
                    relative_residual: rel,
                },
            ));
        }
        if iterations >= max_iter {
            return Err(Error::NotConverged {
                iterations,
                residual: rel,
            });
        }
    }
    Err(Error::NotConverged {
        iterations,
        residual: norm(&r) / bn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_rhs() {
        let a = CsrMatrix::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 7.0];
        let (x, s) = solve_spd(&a, &b, 1e-12).unwrap();
        assert_eq!(x, b);
        assert!(s.relative_residual <= 1e-12);
    }

    #[test]
    fn laplacian_1d() {
        let n = 200;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i as u32, i as u32, 2.0));
            if i + 1 < n {
                t.push((i as u32, i as u32 + 1, -1.0));
                t.push((i as u32 + 1, i as u32, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, t).unwrap();
        let b = vec![1.0; n];
        let (x, s) = solve_spd(&a, &b, 1e-10).unwrap();
        assert!(s.relative_residual <= 1e-10);
        // exact: x_i = (i+1)(n-i)/2
        for (i, xi) in x.iter().enumerate() {
            let e = (i as f64 + 1.0) * (n - i) as f64 / 2.0;
            assert!((xi - e).abs() < 1e-6 * e);
        }
    }

    #[test]
    fn rejects_indefinite_and_singular() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 1, -1.0)]).unwrap();
        assert!(matches!(solve_spd(&a, &[1.0, 1.0], 1e-8), Err(Error::Indefinite(_))));
        let z = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0)]).unwrap();
        assert!(matches!(solve_spd(&z, &[1.0, 1.0], 1e-8), Err(Error::Singular(_))));
        assert!(solve_spd(&a, &[1.0, 1.0], 0.1).is_err());
    }
}
