//! Parametric 2D transformer cross-sections: cores, windows, turn layout, insulation.

mod layout;
mod scenario;
mod shapes;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use layout::{layout_winding, Layout, Zone};
pub use scenario::{
    build_preset, build_preset_with_arrangement, preset_ids, CoreFamily, CorePreset, Placement, Rating, Scenario,
    WindingSpec, PRESETS,
};
pub use shapes::*;
pub use validate::{validate_geometry, validate_layout, Diagnostic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Primary,
    Secondary,
}

impl Role {
    pub fn other(self) -> Self {
        match self {
            Role::Primary => Role::Secondary,
            Role::Secondary => Role::Primary,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Role::Primary => 0,
            Role::Secondary => 1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Role::Primary => 'P',
            Role::Secondary => 'S',
        }
    }
}

/// Which leg of a turn a conductor cross-section belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    /// Current flows out of the plane for positive winding current.
    Go,
    Return,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TurnId {
    pub role: Role,
    /// Layer index within the winding, counted from the core.
    pub layer: u32,
    pub turn: u32,
    pub side: Side,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionTag {
    Core,
    Turn(TurnId),
    Insulation,
    Bobbin,
    Air,
    /// Auxiliary conductor (test fixtures).
    Electrode(u32),
}

impl RegionTag {
    /// Small integer used in exported files.
    pub fn code(&self) -> i32 {
        match self {
            RegionTag::Air => 0,
            RegionTag::Core => 1,
            RegionTag::Bobbin => 2,
            RegionTag::Insulation => 3,
            RegionTag::Turn(t) => match t.role {
                Role::Primary => 10,
                Role::Secondary => 20,
            },
            RegionTag::Electrode(k) => 100 + *k as i32,
        }
    }

    pub fn is_turn(&self) -> bool {
        matches!(self, RegionTag::Turn(_))
    }
}

impl fmt::Display for RegionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionTag::Core => write!(f, "core"),
            RegionTag::Insulation => write!(f, "insulation"),
            RegionTag::Bobbin => write!(f, "bobbin"),
            RegionTag::Air => write!(f, "air"),
            RegionTag::Electrode(k) => write!(f, "electrode{k}"),
            RegionTag::Turn(t) => write!(
                f,
                "{}{}.{}{}",
                t.role.symbol(),
                t.layer,
                t.turn,
                if t.side == Side::Go { "+" } else { "-" }
            ),
        }
    }
}

/// A tagged area: `shape` minus `holes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub shape: Shape,
    pub holes: Vec<Shape>,
    pub material: String,
    pub tag: RegionTag,
}

impl Region {
    pub fn new(shape: Shape, material: &str, tag: RegionTag) -> Self {
        Self {
            shape,
            holes: Vec::new(),
            material: material.to_string(),
            tag,
        }
    }

    pub fn with_holes(mut self, holes: Vec<Shape>) -> Self {
        self.holes = holes;
        self
    }

    /// Exact area (shape minus holes).
    pub fn area(&self) -> f64 {
        self.shape.area() - self.holes.iter().map(Shape::area).sum::<f64>()
    }
}

/// Ordered P/S layer tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Arrangement(Vec<Role>);

impl Arrangement {
    pub fn new(tokens: Vec<Role>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::InvalidArrangement("empty".into()));
        }
        Ok(Self(tokens))
    }

    /// All primary layers followed by all secondary layers.
    pub fn grouped(primary_layers: usize, secondary_layers: usize) -> Result<Self> {
        let mut t = vec![Role::Primary; primary_layers];
        t.extend(std::iter::repeat_n(Role::Secondary, secondary_layers));
        Self::new(t)
    }

    pub fn tokens(&self) -> &[Role] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// (primary layers, secondary layers).
    pub fn counts(&self) -> (usize, usize) {
        let p = self.0.iter().filter(|r| **r == Role::Primary).count();
        (p, self.0.len() - p)
    }

    pub fn swapped(&self) -> Self {
        Self(self.0.iter().map(|r| r.other()).collect())
    }

    pub fn reversed(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }

    /// True when each winding's layers are contiguous.
    pub fn is_grouped(&self) -> bool {
        self.0.windows(2).filter(|w| w[0] != w[1]).count() <= 1
    }
}

impl FromStr for Arrangement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut tokens = Vec::new();
        for c in s.chars() {
            match c.to_ascii_uppercase() {
                'P' => tokens.push(Role::Primary),
                'S' => tokens.push(Role::Secondary),
                '-' | ' ' | ',' => {}
                other => {
                    return Err(Error::InvalidArrangement(format!(
                        "unexpected character `{other}` in `{s}`"
                    )))
                }
            }
        }
        Self::new(tokens)
    }
}

impl fmt::Display for Arrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.0 {
            write!(f, "{}", r.symbol())?;
        }
        Ok(())
    }
}

/// How the 2D model maps to 3D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalysisPlane {
    /// Cartesian x-y section extruded over `depth` meters.
    Planar { depth: f64 },
    /// r-z half-plane revolved about r = 0 (x is r, y is z).
    Axisymmetric,
}
