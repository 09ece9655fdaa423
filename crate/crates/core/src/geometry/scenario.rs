//! Scenario description, built-in presets and the scenario file format.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AnalysisPlane, Arrangement, Role};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CoreFamily {
    Toroid,
    Uu,
    Ee,
}

/// Core family plus named dimensions in meters.
///
/// Toroid: `A` outer radius, `B` inner radius, `H` height. UU: `E` width, `F` height, `G` depth,
/// `K` limb thickness, `C`×`D` window. EE: `M` width, `N` height, `P` depth, `K` outer limb and
/// yoke thickness, `C`×`D` each window.
#[derive(Debug, Clone, PartialEq)]
pub struct CorePreset {
    pub family: CoreFamily,
    pub dims: BTreeMap<String, f64>,
}

impl CorePreset {
    pub fn new(family: CoreFamily, dims: &[(&str, f64)]) -> Self {
        Self {
            family,
            dims: dims.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    pub fn dim(&self, key: &str) -> Result<f64> {
        self.dims
            .get(key)
            .copied()
            .ok_or_else(|| Error::InvalidGeometry(format!("{:?} core is missing dimension {key}", self.family)))
    }

    fn required(&self) -> &'static [&'static str] {
        match self.family {
            CoreFamily::Toroid => &["A", "B", "H"],
            CoreFamily::Uu => &["C", "D", "K", "E", "F", "G"],
            CoreFamily::Ee => &["C", "D", "K", "M", "N", "P"],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for key in self.required() {
            let v = self.dim(key)?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidGeometry(format!(
                    "dimension {key} must be positive, got {v}"
                )));
            }
        }
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
        match self.family {
            CoreFamily::Toroid => {
                if self.dim("B")? >= self.dim("A")? {
                    return Err(Error::InvalidGeometry(
                        "toroid inner radius must be below outer radius".into(),
                    ));
                }
            }
            CoreFamily::Uu => {
                let (c, d, k) = (self.dim("C")?, self.dim("D")?, self.dim("K")?);
                if !close(self.dim("E")?, c + 2.0 * k) || !close(self.dim("F")?, d + 2.0 * k) {
                    return Err(Error::InvalidGeometry("UU core needs E = C + 2K and F = D + 2K".into()));
                }
            }
            CoreFamily::Ee => {
                let (c, d, k, m) = (self.dim("C")?, self.dim("D")?, self.dim("K")?, self.dim("M")?);
                if !close(self.dim("N")?, d + 2.0 * k) {
                    return Err(Error::InvalidGeometry("EE core needs N = D + 2K".into()));
                }
                if m - 2.0 * k - 2.0 * c <= 0.0 {
                    return Err(Error::InvalidGeometry("EE core has no room for a centre limb".into()));
                }
            }
        }
        Ok(())
    }

    pub fn depth(&self) -> Result<f64> {
        self.dim(match self.family {
            CoreFamily::Toroid => "H",
            CoreFamily::Uu => "G",
            CoreFamily::Ee => "P",
        })
    }

    /// Every preset family is modelled in its planar section.
    pub fn analysis_plane(&self) -> Result<AnalysisPlane> {
        Ok(AnalysisPlane::Planar { depth: self.depth()? })
    }

    /// Cross-section of the limb carrying the windings (m²).
    pub fn core_area(&self) -> Result<f64> {
        Ok(match self.family {
            CoreFamily::Toroid => (self.dim("A")? - self.dim("B")?) * self.dim("H")?,
            CoreFamily::Uu => self.dim("K")? * self.dim("G")?,
            CoreFamily::Ee => self.centre_limb_width()? * self.dim("P")?,
        })
    }

    pub fn centre_limb_width(&self) -> Result<f64> {
        Ok(self.dim("M")? - 2.0 * self.dim("K")? - 2.0 * self.dim("C")?)
    }

    /// Mean magnetic path length (m).
    pub fn mean_path_length(&self) -> Result<f64> {
        Ok(match self.family {
            CoreFamily::Toroid => PI * (self.dim("A")? + self.dim("B")?),
            CoreFamily::Uu => 2.0 * (self.dim("C")? + self.dim("K")?) + 2.0 * (self.dim("D")? + self.dim("K")?),
            CoreFamily::Ee => {
                let half_c = 0.5 * self.centre_limb_width()?;
                2.0 * (half_c + self.dim("C")? + 0.5 * self.dim("K")?) + 2.0 * (self.dim("D")? + self.dim("K")?)
            }
        })
    }

    /// Core volume (m³).
    pub fn volume(&self) -> Result<f64> {
        Ok(match self.family {
            CoreFamily::Toroid => {
                let (a, b) = (self.dim("A")?, self.dim("B")?);
                PI * (a * a - b * b) * self.dim("H")?
            }
            CoreFamily::Uu => (self.dim("E")? * self.dim("F")? - self.dim("C")? * self.dim("D")?) * self.dim("G")?,
            CoreFamily::Ee => {
                (self.dim("M")? * self.dim("N")? - 2.0 * self.dim("C")? * self.dim("D")?) * self.dim("P")?
            }
        })
    }

    /// Largest in-plane extent (m).
    pub fn largest_dimension(&self) -> Result<f64> {
        Ok(match self.family {
            CoreFamily::Toroid => 2.0 * self.dim("A")?,
            CoreFamily::Uu => self.dim("E")?.max(self.dim("F")?),
            CoreFamily::Ee => self.dim("M")?.max(self.dim("N")?),
        })
    }

    /// Window width and height available to the windings (m).
    pub fn window(&self) -> Result<(f64, f64)> {
        Ok(match self.family {
            CoreFamily::Toroid => {
                let b = self.dim("B")?;
                (b, self.dim("H")?)
            }
            _ => (self.dim("C")?, self.dim("D")?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingSpec {
    pub role: Role,
    pub turns: u32,
    pub layers: u32,
    /// m.
    pub wire_diameter: f64,
    /// Surface-to-surface spacing between bare conductors (m).
    pub turn_insulation: f64,
    /// Winding-to-core insulation thickness (m).
    pub bobbin_gap: f64,
}

impl WindingSpec {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.turns < self.layers {
            return Err(Error::InvalidGeometry(format!(
                "{:?} winding: {} turns cannot fill {} layers",
                self.role, self.turns, self.layers
            )));
        }
        if !(self.wire_diameter > 0.0) || !(self.turn_insulation >= 0.0) || !(self.bobbin_gap >= 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "{:?} winding has invalid spacing",
                self.role
            )));
        }
        Ok(())
    }

    /// Turns in layer `k`; when the layers cannot share the turns evenly the first layers take one extra.
    pub fn turns_in_layer(&self, k: u32) -> u32 {
        let base = self.turns / self.layers;
        base + u32::from(k < self.turns % self.layers)
    }

    pub fn wire_area(&self) -> f64 {
        0.25 * PI * self.wire_diameter * self.wire_diameter
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rating {
    /// V.
    pub voltage: f64,
    /// VA.
    pub power: f64,
    /// Hz.
    pub frequency: f64,
}

impl Rating {
    pub fn current(&self) -> f64 {
        self.power / self.voltage
    }
}

/// Where the two windings sit relative to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    /// One stack of layers around the same limb, ordered by the arrangement.
    Concentric,
    /// First half of the arrangement on one limb (toroid: one half of the ring), second half on the other.
    Split,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub core: CorePreset,
    pub core_material: String,
    /// Index 0 primary, index 1 secondary.
    pub windings: [WindingSpec; 2],
    pub arrangement: Arrangement,
    pub placement: Placement,
    pub insulation_material: String,
    pub bobbin_material: String,
    pub ambient_material: String,
    pub rated: Rating,
}

impl Scenario {
    pub fn winding(&self, role: Role) -> &WindingSpec {
        &self.windings[role.index()]
    }

    pub fn validate(&self) -> Result<()> {
        self.core.validate()?;
        if self.windings[0].role != Role::Primary || self.windings[1].role != Role::Secondary {
            return Err(Error::InvalidGeometry(
                "windings must be listed primary then secondary".into(),
            ));
        }
        for w in &self.windings {
            w.validate()?;
        }
        let (np, ns) = self.arrangement.counts();
        if np as u32 != self.windings[0].layers || ns as u32 != self.windings[1].layers {
            return Err(Error::InvalidArrangement(format!(
                "`{}` has {np} P and {ns} S tokens but the windings have {} and {} layers",
                self.arrangement, self.windings[0].layers, self.windings[1].layers
            )));
        }
        if self.placement == Placement::Split && !self.arrangement.len().is_multiple_of(2) {
            return Err(Error::InvalidArrangement(
                "split placement needs an even number of layer slots".into(),
            ));
        }
        for (name, v) in [
            ("voltage", self.rated.voltage),
            ("power", self.rated.power),
            ("frequency", self.rated.frequency),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("rated {name} must be positive")));
            }
        }
        Ok(())
    }

    /// Same scenario with P and S exchanged in both the arrangement and the winding data.
    pub fn swapped_roles(&self) -> Self {
        let mut s = self.clone();
        s.arrangement = self.arrangement.swapped();
        let mut p = self.windings[1];
        let mut q = self.windings[0];
        p.role = Role::Primary;
        q.role = Role::Secondary;
        s.windings = [p, q];
        s
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let f: ScenarioFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        f.into_scenario()
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(&ScenarioFile::from_scenario(self)).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub const AWG8_DIAMETER: f64 = 3.2639e-3;

/// The six built-in structures: id, description.
pub const PRESETS: [(&str, &str); 6] = [
    (
        "TOROID_3LAYER_CASE1",
        "toroid A=60 B=40 H=80 mm, 3-layer windings on opposite halves",
    ),
    (
        "TOROID_3LAYER_CASE2",
        "toroid A=70 B=30 H=40 mm, 3-layer windings on opposite halves",
    ),
    (
        "TOROID_1LAYER_CASE1",
        "toroid A=60 B=40 H=80 mm, single-layer secondary over primary",
    ),
    (
        "TOROID_1LAYER_CASE2",
        "toroid A=70 B=30 H=40 mm, single-layer secondary over primary",
    ),
    (
        "UU_4LAYER",
        "UU core, 4 primary layers on one limb and 4 secondary layers on the other",
    ),
    ("EE_4LAYER", "EE core, 8 concentric layers on the centre limb, PPPPSSSS"),
];

pub fn preset_ids() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.0).collect()
}

fn winding(role: Role, layers: u32) -> WindingSpec {
    WindingSpec {
        role,
        turns: 80,
        layers,
        wire_diameter: AWG8_DIAMETER,
        turn_insulation: 0.15e-3,
        bobbin_gap: 2e-3,
    }
}

/// Builds one of the six built-in structures.
pub fn build_preset(id: &str) -> Result<Scenario> {
    let (family, dims_mm, layers, arrangement, placement): (CoreFamily, &[(&str, f64)], u32, &str, Placement) = match id
    {
        "TOROID_3LAYER_CASE1" => (
            CoreFamily::Toroid,
            &[("A", 60.0), ("B", 40.0), ("H", 80.0)],
            3,
            "PPPSSS",
            Placement::Split,
        ),
        "TOROID_3LAYER_CASE2" => (
            CoreFamily::Toroid,
            &[("A", 70.0), ("B", 30.0), ("H", 40.0)],
            3,
            "PPPSSS",
            Placement::Split,
        ),
        "TOROID_1LAYER_CASE1" => (
            CoreFamily::Toroid,
            &[("A", 60.0), ("B", 40.0), ("H", 80.0)],
            1,
            "PS",
            Placement::Concentric,
        ),
        "TOROID_1LAYER_CASE2" => (
            CoreFamily::Toroid,
            &[("A", 70.0), ("B", 30.0), ("H", 40.0)],
            1,
            "PS",
            Placement::Concentric,
        ),
        "UU_4LAYER" => (
            CoreFamily::Uu,
            &[
                ("C", 40.0),
                ("D", 80.0),
                ("K", 20.0),
                ("E", 80.0),
                ("F", 120.0),
                ("G", 80.0),
            ],
            4,
            "PPPPSSSS",
            Placement::Split,
        ),
        "EE_4LAYER" => (
            CoreFamily::Ee,
            &[
                ("C", 40.0),
                ("D", 80.0),
                ("K", 20.0),
                ("M", 160.0),
                ("N", 120.0),
                ("P", 40.0),
            ],
            4,
            "PPPPSSSS",
            Placement::Concentric,
        ),
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    let s = Scenario {
        id: id.to_string(),
        core: CorePreset::new(
            family,
            &dims_mm.iter().map(|&(k, v)| (k, v / 1000.0)).collect::<Vec<_>>(),
        ),
        core_material: "iron_powder_mix08".into(),
        windings: [winding(Role::Primary, layers), winding(Role::Secondary, layers)],
        arrangement: arrangement.parse()?,
        placement,
        insulation_material: "silicon_varnish".into(),
        bobbin_material: "plastic_bobbin".into(),
        ambient_material: "air".into(),
        rated: Rating {
            voltage: 400.0,
            power: 8000.0,
            frequency: 10e3,
        },
    };
    s.validate()?;
    Ok(s)
}

/// Built-in structure with its layer order replaced; the id gains the arrangement as a suffix.
pub fn build_preset_with_arrangement(id: &str, arrangement: &str) -> Result<Scenario> {
    let mut s = build_preset(id)?;
    s.arrangement = arrangement.parse()?;
    s.id = format!("{id}_{}", s.arrangement);
    s.validate()?;
    Ok(s)
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    id: Option<String>,
    /// Starting point; every other field overrides it.
    preset: Option<String>,
    family: Option<CoreFamily>,
    dims_mm: Option<BTreeMap<String, f64>>,
    core_material: Option<String>,
    arrangement: Option<String>,
    placement: Option<Placement>,
    insulation_material: Option<String>,
    bobbin_material: Option<String>,
    ambient_material: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    winding: Vec<WindingFile>,
    rated: Option<RatingFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindingFile {
    role: Role,
    turns: Option<u32>,
    layers: Option<u32>,
    wire_diameter_mm: Option<f64>,
    turn_insulation_mm: Option<f64>,
    bobbin_gap_mm: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RatingFile {
    voltage_V: Option<f64>,
    power_VA: Option<f64>,
    frequency_kHz: Option<f64>,
}

impl ScenarioFile {
    fn into_scenario(self) -> Result<Scenario> {
        let missing = |what: &str| Error::Config(format!("scenario file without preset must set `{what}`"));
        let mut s = match &self.preset {
            Some(p) => build_preset(p)?,
            None => {
                let family = self.family.ok_or_else(|| missing("family"))?;
                let dims = self.dims_mm.clone().ok_or_else(|| missing("dims_mm"))?;
                let w = |role| WindingSpec {
                    role,
                    turns: 0,
                    layers: 0,
                    wire_diameter: 0.0,
                    turn_insulation: 0.0,
                    bobbin_gap: 0.0,
                };
                Scenario {
                    id: String::new(),
                    core: CorePreset {
                        family,
                        dims: dims.into_iter().map(|(k, v)| (k, v / 1000.0)).collect(),
                    },
                    core_material: self.core_material.clone().ok_or_else(|| missing("core_material"))?,
                    windings: [w(Role::Primary), w(Role::Secondary)],
                    arrangement: self
                        .arrangement
                        .as_deref()
                        .ok_or_else(|| missing("arrangement"))?
                        .parse()?,
                    placement: self.placement.ok_or_else(|| missing("placement"))?,
                    insulation_material: "silicon_varnish".into(),
                    bobbin_material: "plastic_bobbin".into(),
                    ambient_material: "air".into(),
                    rated: Rating {
                        voltage: 0.0,
                        power: 0.0,
                        frequency: 0.0,
                    },
                }
            }
        };
        if let Some(id) = self.id {
            s.id = id;
        }
        if s.id.is_empty() {
            return Err(missing("id"));
        }
        if let Some(f) = self.family {
            s.core.family = f;
        }
        if let Some(d) = self.dims_mm {
            for (k, v) in d {
                s.core.dims.insert(k, v / 1000.0);
            }
        }
        if let Some(m) = self.core_material {
            s.core_material = m;
        }
        if let Some(a) = self.arrangement {
            s.arrangement = a.parse()?;
        }
        if let Some(p) = self.placement {
            s.placement = p;
        }
        if let Some(m) = self.insulation_material {
            s.insulation_material = m;
        }
        if let Some(m) = self.bobbin_material {
            s.bobbin_material = m;
        }
        if let Some(m) = self.ambient_material {
            s.ambient_material = m;
        }
        for w in self.winding {
            let t = &mut s.windings[w.role.index()];
            if let Some(v) = w.turns {
                t.turns = v;
            }
            if let Some(v) = w.layers {
                t.layers = v;
            }
            if let Some(v) = w.wire_diameter_mm {
                t.wire_diameter = v / 1000.0;
            }
            if let Some(v) = w.turn_insulation_mm {
                t.turn_insulation = v / 1000.0;
            }
            if let Some(v) = w.bobbin_gap_mm {
                t.bobbin_gap = v / 1000.0;
            }
        }
        if let Some(r) = self.rated {
            if let Some(v) = r.voltage_V {
                s.rated.voltage = v;
            }
            if let Some(v) = r.power_VA {
                s.rated.power = v;
            }
            if let Some(v) = r.frequency_kHz {
                s.rated.frequency = v * 1e3;
            }
        }
        s.validate()?;
        Ok(s)
    }

    fn from_scenario(s: &Scenario) -> Self {
        let w = |w: &WindingSpec| WindingFile {
            role: w.role,
            turns: Some(w.turns),
            layers: Some(w.layers),
            wire_diameter_mm: Some(w.wire_diameter * 1000.0),
            turn_insulation_mm: Some(w.turn_insulation * 1000.0),
            bobbin_gap_mm: Some(w.bobbin_gap * 1000.0),
        };
        Self {
            id: Some(s.id.clone()),
            preset: None,
            family: Some(s.core.family),
            dims_mm: Some(s.core.dims.iter().map(|(k, v)| (k.clone(), v * 1000.0)).collect()),
            core_material: Some(s.core_material.clone()),
            arrangement: Some(s.arrangement.to_string()),
            placement: Some(s.placement),
            insulation_material: Some(s.insulation_material.clone()),
            bobbin_material: Some(s.bobbin_material.clone()),
            ambient_material: Some(s.ambient_material.clone()),
            winding: s.windings.iter().map(w).collect(),
            rated: Some(RatingFile {
                voltage_V: Some(s.rated.voltage),
                power_VA: Some(s.rated.power),
                frequency_kHz: Some(s.rated.frequency / 1000.0),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_tables() {
        let t = build_preset("TOROID_3LAYER_CASE1").unwrap();
        assert_eq!(t.core.dim("A").unwrap(), 60e-3);
        assert_eq!(t.core.dim("B").unwrap(), 40e-3);
        assert_eq!(t.core.dim("H").unwrap(), 80e-3);
        let t = build_preset("TOROID_1LAYER_CASE2").unwrap();
        assert_eq!(t.core.dim("A").unwrap(), 70e-3);
        assert_eq!(t.core.dim("B").unwrap(), 30e-3);
        assert_eq!(t.core.dim("H").unwrap(), 40e-3);
        assert_eq!(t.windings[0].layers, 1);
        let e = build_preset("EE_4LAYER").unwrap();
        assert_eq!(e.arrangement.to_string(), "PPPPSSSS");
        assert_eq!(e.core.dim("P").unwrap(), 40e-3);
        for id in preset_ids() {
            let s = build_preset(id).unwrap();
            let a = s.core.core_area().unwrap();
            assert!((a - 1600e-6).abs() < 1e-12, "{id}: {a}");
            assert_eq!(s.windings[0].turns, 80);
            assert_eq!(s.windings[1].turns, 80);
            assert_eq!(s.rated.current(), 20.0);
            assert_eq!(s.rated.frequency, 1e4);
        }
        assert!(matches!(build_preset("XX"), Err(Error::UnknownPreset(_))));
        assert!(build_preset_with_arrangement("EE_4LAYER", "PPPSSSSS").is_err());
        assert!(build_preset_with_arrangement("EE_4LAYER", "PSPSPSPS").is_ok());
    }

    #[test]
    fn uneven_layers() {
        let w = winding(Role::Primary, 3);
        let t: Vec<u32> = (0..3).map(|k| w.turns_in_layer(k)).collect();
        assert_eq!(t, vec![27, 27, 26]);
    }

    #[test]
    fn scenario_file_round_trip() {
        for id in preset_ids() {
            let s = build_preset(id).unwrap();
            let text = s.to_toml_string().unwrap();
            let back = Scenario::from_toml_str(&text).unwrap();
            assert_eq!(back.arrangement, s.arrangement);
            assert_eq!(back.core.family, s.core.family);
            for (k, v) in &s.core.dims {
                assert!((back.core.dims[k] - v).abs() < 1e-15);
            }
        }
        let text = "preset = 'EE_4LAYER'\nid = 'ee_air'\ninsulation_material = 'air'\n[[winding]]\nrole = 'primary'\nturn_insulation_mm = 1.0\n";
        let s = Scenario::from_toml_str(text).unwrap();
        assert_eq!(s.id, "ee_air");
        assert_eq!(s.windings[0].turn_insulation, 1e-3);
        assert!(Scenario::from_toml_str("id='x'").is_err());
    }
}
