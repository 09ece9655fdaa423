use std::sync::Arc;

use super::assemble::{assemble, element_gradients, stiffness};
use super::nonlinear::NewtonReport;
use super::solver::SolveStats;
use super::ExcitationSpec;
use crate::error::{Error, Result};
use crate::geometry::{AnalysisPlane, RegionTag};
use crate::materials::MaterialCatalog;
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Magnetostatic,
    Electrostatic,
}

/// Nodal potentials of one solved problem with per-element derived fields.
#[derive(Debug, Clone)]
pub struct FieldSolution {
    pub mesh: Arc<Mesh>,
    pub excitation: ExcitationSpec,
    /// A_z (planar), r·A_φ (axisymmetric) or V per node.
    pub dof: Vec<f64>,
    /// Reluctivity or permittivity per element, as used in the final solve.
    pub coefficient: Vec<f64>,
    /// Current density per element.
    pub source: Vec<f64>,
    pub stats: SolveStats,
    pub newton: Option<NewtonReport>,
}

pub fn solve_linear(
    mesh: Arc<Mesh>,
    materials: &MaterialCatalog,
    excitation: &ExcitationSpec,
    rel_tol: f64,
) -> Result<FieldSolution> {
    let system = assemble(&mesh, materials, excitation)?;
    let (dof, stats) = system.solve(rel_tol)?;
    Ok(FieldSolution {
        mesh,
        excitation: excitation.clone(),
        dof,
        coefficient: system.coefficient,
        source: system.source,
        stats,
        newton: None,
    })
}

impl FieldSolution {
    pub fn kind(&self) -> FieldKind {
        self.excitation.kind()
    }

    /// Gradient of the nodal field on element `e`.
    pub fn gradient(&self, e: usize) -> [f64; 2] {
        let g = element_gradients(&self.mesh, e);
        let t = self.mesh.elements[e];
        let mut out = [0.0; 2];
        for i in 0..3 {
            let v = self.dof[t[i] as usize];
            out[0] += v * g.grad[i][0];
            out[1] += v * g.grad[i][1];
        }
        out
    }

    fn require(&self, kind: FieldKind) -> Result<()> {
        if self.kind() == kind {
            Ok(())
        } else {
            Err(Error::WrongKind(match kind {
                FieldKind::Magnetostatic => "magnetostatic solution",
                FieldKind::Electrostatic => "electrostatic solution",
            }))
        }
    }

    /// Flux density (T); (B_x, B_y) planar or (B_r, B_z) axisymmetric.
    pub fn b_field(&self, e: usize) -> Result<[f64; 2]> {
        self.require(FieldKind::Magnetostatic)?;
        let g = self.gradient(e);
        Ok(match self.mesh.plane {
            AnalysisPlane::Planar { .. } => [g[1], -g[0]],
            AnalysisPlane::Axisymmetric => {
                let r = self.mesh.centroid(e)[0];
                [-g[1] / r, g[0] / r]
            }
        })
    }

    /// Field strength (A/m).
    pub fn h_field(&self, e: usize) -> Result<[f64; 2]> {
        let b = self.b_field(e)?;
        Ok([self.coefficient[e] * b[0], self.coefficient[e] * b[1]])
    }

    /// Electric field (V/m).
    pub fn e_field(&self, e: usize) -> Result<[f64; 2]> {
        self.require(FieldKind::Electrostatic)?;
        let g = self.gradient(e);
        Ok([-g[0], -g[1]])
    }

    /// Displacement (C/m²).
    pub fn d_field(&self, e: usize) -> Result<[f64; 2]> {
        let f = self.e_field(e)?;
        Ok([self.coefficient[e] * f[0], self.coefficient[e] * f[1]])
    }

    /// |B| or |E| on element `e`.
    pub fn field_magnitude(&self, e: usize) -> f64 {
        let v = match self.kind() {
            FieldKind::Magnetostatic => self.b_field(e),
            FieldKind::Electrostatic => self.e_field(e),
        }
        .expect("kind checked");
        v[0].hypot(v[1])
    }

    /// |H| on element `e` (magnetostatic) or |E| (electrostatic).
    pub fn intensity_magnitude(&self, e: usize) -> f64 {
        match self.kind() {
            FieldKind::Magnetostatic => self.coefficient[e] * self.field_magnitude(e),
            FieldKind::Electrostatic => self.field_magnitude(e),
        }
    }

    /// ½·B·H or ½·E·D times the element measure (J).
    pub fn element_energy(&self, e: usize) -> f64 {
        let m = self.field_magnitude(e);
        0.5 * self.coefficient[e] * m * m * self.mesh.element_measure(e)
    }

    pub fn energy(&self) -> f64 {
        (0..self.mesh.elements.len()).map(|e| self.element_energy(e)).sum()
    }

    pub fn energy_where(&self, mut pred: impl FnMut(&RegionTag) -> bool) -> f64 {
        (0..self.mesh.elements.len())
            .filter(|&e| pred(&self.mesh.element_tag(e)))
            .map(|e| self.element_energy(e))
            .sum()
    }

    /// ½·dofᵀ·K·dof with the stiffness rebuilt from the stored coefficients.
    pub fn galerkin_energy(&self) -> f64 {
        let k = stiffness(&self.mesh, &self.coefficient, self.kind());
        0.5 * k.quadratic_form(&self.dof)
    }
}
