//! Linear triangle finite elements for 2D magnetostatics (planar A_z or axisymmetric r·A_φ)
//! and electrostatics, with a sparse SPD solver, floating conductors and Newton iteration on
//! sampled B-H curves.

mod assemble;
pub mod csr;
mod nonlinear;
mod solution;
pub mod solver;
mod system;

use std::fmt;

use crate::geometry::{RegionTag, Role};

pub use assemble::{assemble, assemble_electrostatic, assemble_magnetostatic, element_gradients, ElementGradients};
pub use csr::CsrMatrix;
pub use nonlinear::{solve_nonlinear_magnetostatic, NewtonReport};
pub use solution::{solve_linear, FieldKind, FieldSolution};
pub use solver::{rcm_ordering, solve_spd, SolveStats};
pub use system::{apply_floating_conductor, DofMap, LinearSystem};

/// Default relative tolerance for linear solves.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Condition imposed on the outer edge of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OuterBoundary {
    /// Homogeneous Dirichlet (A = 0 or V = 0).
    #[default]
    Dirichlet,
    /// Homogeneous Neumann.
    Natural,
}

/// How a turn's current is spread over its cross-section.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SkinModel {
    #[default]
    Uniform,
    /// Current confined to an outer annulus one skin depth thick (round turns only; other
    /// shapes and turns thinner than the depth stay uniform).
    Annulus { frequency: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MagneticExcitation {
    /// Current per turn of each winding role (A), indexed by [`Role::index`]. Return-side
    /// conductors carry the negative.
    pub winding_current: [f64; 2],
    /// Total current through each auxiliary electrode region (A).
    pub electrode_current: Vec<(u32, f64)>,
    pub skin: SkinModel,
    pub outer: OuterBoundary,
}

impl MagneticExcitation {
    /// Primary and secondary turn currents, uniform distribution, Dirichlet outer edge.
    pub fn windings(primary: f64, secondary: f64) -> Self {
        Self {
            winding_current: [primary, secondary],
            electrode_current: Vec::new(),
            skin: SkinModel::Uniform,
            outer: OuterBoundary::Dirichlet,
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        let mut s = self.clone();
        s.winding_current = [k * s.winding_current[0], k * s.winding_current[1]];
        for e in &mut s.electrode_current {
            e.1 *= k;
        }
        s
    }
}

/// A set of conductor regions that share one potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConductorKey {
    /// Every turn of one winding.
    Winding(Role),
    /// The core, treated as a conductor rather than a dielectric.
    Core,
    Electrode(u32),
}

impl ConductorKey {
    pub fn matches(&self, tag: &RegionTag) -> bool {
        match (self, tag) {
            (ConductorKey::Winding(r), RegionTag::Turn(t)) => t.role == *r,
            (ConductorKey::Core, RegionTag::Core) => true,
            (ConductorKey::Electrode(a), RegionTag::Electrode(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for ConductorKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConductorKey::Winding(r) => write!(f, "winding {}", r.symbol()),
            ConductorKey::Core => f.write_str("core"),
            ConductorKey::Electrode(k) => write!(f, "electrode {k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    Fixed(f64),
    /// Equipotential with zero net charge.
    Floating,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectricExcitation {
    pub conductors: Vec<(ConductorKey, Potential)>,
    pub outer: OuterBoundary,
}

impl ElectricExcitation {
    /// Drives `role` at `volts` and grounds the other winding; natural outer edge.
    pub fn winding_drive(role: Role, volts: f64) -> Self {
        Self {
            conductors: vec![
                (ConductorKey::Winding(role), Potential::Fixed(volts)),
                (ConductorKey::Winding(role.other()), Potential::Fixed(0.0)),
            ],
            outer: OuterBoundary::Natural,
        }
    }

    pub fn with(mut self, key: ConductorKey, p: Potential) -> Self {
        self.conductors.push((key, p));
        self
    }

    pub fn potential(&self, key: ConductorKey) -> Option<Potential> {
        self.conductors.iter().find(|c| c.0 == key).map(|c| c.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExcitationSpec {
    Magnetostatic(MagneticExcitation),
    Electrostatic(ElectricExcitation),
}

impl ExcitationSpec {
    pub fn kind(&self) -> FieldKind {
        match self {
            ExcitationSpec::Magnetostatic(_) => FieldKind::Magnetostatic,
            ExcitationSpec::Electrostatic(_) => FieldKind::Electrostatic,
        }
    }
}
