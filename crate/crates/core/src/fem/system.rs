use super::csr::CsrMatrix;
use super::solver::{solve_spd, SolveStats};
use super::{ConductorKey, FieldKind};
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Assembled system over all mesh nodes, with its constraints kept separate.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub kind: FieldKind,
    /// Unconstrained stiffness.
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Prescribed value per node.
    pub fixed: Vec<Option<f64>>,
    /// Node groups sharing a single unknown.
    pub ties: Vec<Vec<u32>>,
    /// Reluctivity or permittivity per element.
    pub coefficient: Vec<f64>,
    /// Current density per element (zero for electrostatics).
    pub source: Vec<f64>,
}

/// Maps nodes to reduced unknowns after eliminating fixed nodes and merging tied groups.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub index: Vec<Option<u32>>,
    pub n_free: usize,
}

impl LinearSystem {
    /// Ties `nodes` to one unknown.
    pub fn tie(&mut self, mut nodes: Vec<u32>) -> Result<()> {
        nodes.sort_unstable();
        nodes.dedup();
        if nodes.is_empty() {
            return Err(Error::EmptySelection("floating conductor has no nodes".into()));
        }
        if let Some(&n) = nodes.iter().find(|&&n| n as usize >= self.fixed.len()) {
            return Err(Error::InvalidArgument(format!("node {n} out of range")));
        }
        if nodes.iter().any(|&n| self.fixed[n as usize].is_some()) {
            return Err(Error::InvalidExcitation(
                "floating set overlaps a fixed potential".into(),
            ));
        }
        if self
            .ties
            .iter()
            .any(|g| g.iter().any(|n| nodes.binary_search(n).is_ok()))
        {
            return Err(Error::InvalidExcitation("floating sets overlap".into()));
        }
        self.ties.push(nodes);
        Ok(())
    }

    pub fn has_reference(&self) -> bool {
        self.fixed.iter().any(Option::is_some)
    }

    pub fn dof_map(&self) -> DofMap {
        let n = self.fixed.len();
        let mut index: Vec<Option<u32>> = vec![None; n];
        let mut group_of = vec![usize::MAX; n];
        for (g, nodes) in self.ties.iter().enumerate() {
            for &v in nodes {
                group_of[v as usize] = g;
            }
        }
        let mut group_index = vec![None; self.ties.len()];
        let mut next = 0u32;
        for v in 0..n {
            if self.fixed[v].is_some() {
                continue;
            }
            let g = group_of[v];
            if g == usize::MAX {
                index[v] = Some(next);
                next += 1;
            } else {
                let gi = *group_index[g].get_or_insert_with(|| {
                    next += 1;
                    next - 1
                });
                index[v] = Some(gi);
            }
        }
        DofMap {
            index,
            n_free: next as usize,
        }
    }

    /// Reduced matrix and right-hand side with fixed values moved to the right.
    pub fn reduce(&self, map: &DofMap) -> Result<(CsrMatrix, Vec<f64>)> {
        let mut rhs = vec![0.0; map.n_free];
        let mut t = Vec::with_capacity(self.matrix.nnz());
        for i in 0..self.matrix.n {
            let Some(ri) = map.index[i] else { continue };
            rhs[ri as usize] += self.rhs[i];
            let (cols, vals) = self.matrix.row(i);
            for (&j, &a) in cols.iter().zip(vals) {
                match (map.index[j as usize], self.fixed[j as usize]) {
                    (Some(rj), _) => t.push((ri, rj, a)),
                    (None, Some(g)) => rhs[ri as usize] -= a * g,
                    (None, None) => unreachable!("node neither free nor fixed"),
                }
            }
        }
        Ok((CsrMatrix::from_triplets(map.n_free, t)?, rhs))
    }

    /// Sums a node vector into reduced unknowns (fixed nodes dropped).
    pub fn reduce_vector(map: &DofMap, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; map.n_free];
        for (i, x) in v.iter().enumerate() {
            if let Some(r) = map.index[i] {
                out[r as usize] += x;
            }
        }
        out
    }

    pub fn expand(&self, map: &DofMap, x: &[f64]) -> Vec<f64> {
        (0..self.fixed.len())
            .map(|i| match (map.index[i], self.fixed[i]) {
                (Some(r), _) => x[r as usize],
                (None, Some(g)) => g,
                (None, None) => unreachable!("node neither free nor fixed"),
            })
            .collect()
    }

    /// Node values satisfying all constraints.
    pub fn solve(&self, rel_tol: f64) -> Result<(Vec<f64>, SolveStats)> {
        if !self.has_reference() {
            return Err(Error::Singular(
                "no Dirichlet node fixes the potential reference".into(),
            ));
        }
        let map = self.dof_map();
        let (k, f) = self.reduce(&map)?;
        let (x, stats) = solve_spd(&k, &f, rel_tol)?;
        Ok((self.expand(&map, &x), stats))
    }
}

/// Ties every node of the conductor `key` to one floating unknown.
pub fn apply_floating_conductor(mut system: LinearSystem, mesh: &Mesh, key: ConductorKey) -> Result<LinearSystem> {
    if system.kind != FieldKind::Electrostatic {
        return Err(Error::WrongKind("electrostatic system"));
    }
    let nodes = mesh.nodes_where(|t| key.matches(t));
    if nodes.is_empty() {
        return Err(Error::EmptySelection(format!("{key} is not in the mesh")));
    }
    system.tie(nodes)?;
    Ok(system)
}
