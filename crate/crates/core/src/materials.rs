//! Magnetic, dielectric, loss and strength data for cores, conductors and insulators.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vacuum permeability in H/m.
pub const MU0: f64 = 4.0e-7 * PI;
/// Vacuum permittivity in F/m.
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Annealed copper resistivity at 20 °C in ohm·m.
pub const COPPER_RESISTIVITY: f64 = 1.724e-8;

/// Sampled, saturating B-H curve (H in A/m, B in tesla) with odd extension to negative H.
#[derive(Debug, Clone, PartialEq)]
pub struct BHCurve {
    h: Vec<f64>,
    b: Vec<f64>,
}

impl BHCurve {
    /// Validates the samples: they must start at exactly (0, 0), increase strictly in H,
    /// never decrease in B, and once the incremental slope starts to fall it may not rise again.
    pub fn new(samples: &[(f64, f64)]) -> Result<Self> {
        let Some(&(h0, b0)) = samples.first() else {
            return Err(Error::InvalidCurve("no samples".into()));
        };
        if h0 != 0.0 || b0 != 0.0 {
            return Err(Error::InvalidCurve(format!(
                "first sample must be (0, 0), got ({h0}, {b0})"
            )));
        }
        if samples.iter().any(|&(h, b)| !h.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidCurve("non-finite sample".into()));
        }
        let mut past_knee = false;
        let mut prev_slope = f64::NAN;
        for (i, w) in samples.windows(2).enumerate() {
            let (ha, ba) = w[0];
            let (hb, bb) = w[1];
            if hb <= ha {
                return Err(Error::InvalidCurve(format!(
                    "H not strictly increasing at sample {}",
                    i + 1
                )));
            }
            if bb < ba {
                return Err(Error::InvalidCurve(format!("B decreases at sample {}", i + 1)));
            }
            let slope = (bb - ba) / (hb - ha);
            if i > 0 {
                let tol = 1e-9 * prev_slope.abs().max(slope.abs());
                if slope < prev_slope - tol {
                    past_knee = true;
                } else if past_knee && slope > prev_slope + tol {
                    return Err(Error::InvalidCurve(format!(
                        "slope rises again after saturation onset at sample {}",
                        i + 1
                    )));
                }
            }
            prev_slope = slope;
        }
        Ok(Self {
            h: samples.iter().map(|s| s.0).collect(),
            b: samples.iter().map(|s| s.1).collect(),
        })
    }

    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.h.iter().copied().zip(self.b.iter().copied()).collect()
    }

    /// B(H): piecewise-linear inside the samples, slope µ0 beyond the last one, odd in H.
    pub fn b_of_h(&self, h: f64) -> f64 {
        if h < 0.0 {
            return -self.b_of_h(-h);
        }
        let n = self.h.len();
        let last = n - 1;
        if h >= self.h[last] {
            return self.b[last] + MU0 * (h - self.h[last]);
        }
        let i = self.h.partition_point(|&x| x <= h) - 1;
        let t = (h - self.h[i]) / (self.h[i + 1] - self.h[i]);
        self.b[i] + t * (self.b[i + 1] - self.b[i])
    }

    /// H(B) and dH/dB for B ≥ 0 (inverse of [`b_of_h`](Self::b_of_h)).
    pub fn h_of_b(&self, b: f64) -> (f64, f64) {
        let b = b.abs();
        let last = self.h.len() - 1;
        if b >= self.b[last] {
            return (self.h[last] + (b - self.b[last]) / MU0, 1.0 / MU0);
        }
        let i = self.b.partition_point(|&x| x <= b) - 1;
        let db = self.b[i + 1] - self.b[i];
        let slope = (self.h[i + 1] - self.h[i]) / db;
        (self.h[i] + (b - self.b[i]) * slope, slope)
    }

    /// Small-signal relative permeability from the first nonzero sample.
    pub fn mu_r_initial(&self) -> Result<f64> {
        if self.h.len() < 2 {
            return Err(Error::InvalidCurve(
                "initial permeability needs at least two samples".into(),
            ));
        }
        Ok(self.b[1] / self.h[1] / MU0)
    }
}

/// Free function form of [`BHCurve::b_of_h`].
pub fn bh_lookup(curve: &BHCurve, h: f64) -> f64 {
    curve.b_of_h(h)
}

/// Free function form of [`BHCurve::mu_r_initial`].
pub fn mu_r_initial(curve: &BHCurve) -> Result<f64> {
    curve.mu_r_initial()
}

/// Fit constants of the iron-powder core-loss formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl LossConstants {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let k = Self { a, b, c, d };
        k.validate()?;
        Ok(k)
    }

    /// Constants published for iron powder Mix-08.
    pub fn mix08() -> Self {
        Self {
            a: 0.01235,
            b: 0.8202,
            c: 1.4694,
            d: 3.85e-7,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c), ("d", self.d)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "loss constant {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Core loss density in W/kg for peak flux density `b` (T), frequency `f` (Hz) and duty cycle `duty`.
///
/// Hysteresis part `f·B³·1e9 / (a + 681·b·B^0.7 + 2.512e6·c·B^1.35)`, eddy part
/// `100·d·f²·B²·(1/D + 1/(1−D))/4`.
pub fn core_loss_density(k: &LossConstants, b: f64, f: f64, duty: f64) -> Result<f64> {
    k.validate()?;
    if !(duty > 0.0 && duty < 1.0) {
        return Err(Error::InvalidArgument(format!("duty cycle {duty} outside (0, 1)")));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::InvalidArgument(format!("flux density {b} must be positive")));
    }
    if !(f > 0.0 && f.is_finite()) {
        return Err(Error::InvalidArgument(format!("frequency {f} must be positive")));
    }
    let hyst = f * b.powi(3) * 1e9 / (k.a + 681.0 * k.b * b.powf(0.7) + 2.512e6 * k.c * b.powf(1.35));
    let eddy = 100.0 * k.d * f * f * b * b * (1.0 / duty + 1.0 / (1.0 - duty)) * 0.25;
    Ok(hyst + eddy)
}

/// Magnetic model of a material.
#[derive(Debug, Clone, PartialEq)]
pub enum Permeability {
    Constant(f64),
    Curve(BHCurve),
}

impl Permeability {
    /// Relative permeability used by linear solves.
    pub fn mu_r_linear(&self) -> Result<f64> {
        match self {
            Permeability::Constant(mu) => Ok(*mu),
            Permeability::Curve(c) => c.mu_r_initial(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub name: String,
    pub permeability: Permeability,
    pub epsilon_r: f64,
    /// ohm·m; `f64::INFINITY` for ideal insulators.
    pub resistivity: f64,
    /// V/m.
    pub dielectric_strength: Option<f64>,
    pub loss_constants: Option<LossConstants>,
    /// kg/m³.
    pub mass_density: Option<f64>,
}

/// Materials below this resistivity (ohm·m) count as conductors for capacitance extraction.
pub const CONDUCTIVE_RESISTIVITY_LIMIT: f64 = 1.0;

impl Material {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::InvalidMaterial {
            name: self.name.clone(),
            reason,
        };
        if self.name.is_empty() {
            return Err(bad("empty name".into()));
        }
        let mu = self.permeability.mu_r_linear().map_err(|e| bad(e.to_string()))?;
        if !(mu >= 1.0 && mu.is_finite()) {
            return Err(bad(format!("relative permeability {mu} below 1")));
        }
        if !(self.epsilon_r >= 1.0 && self.epsilon_r.is_finite()) {
            return Err(bad(format!("relative permittivity {} below 1", self.epsilon_r)));
        }
        if !(self.resistivity > 0.0) {
            return Err(bad(format!("resistivity {} must be positive", self.resistivity)));
        }
        if let Some(s) = self.dielectric_strength {
            if !(s > 0.0 && s.is_finite()) {
                return Err(bad(format!("dielectric strength {s} must be positive")));
            }
        }
        if let Some(k) = &self.loss_constants {
            k.validate().map_err(|e| bad(e.to_string()))?;
        }
        if let Some(rho) = self.mass_density {
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(bad(format!("mass density {rho} must be positive")));
            }
        }
        Ok(())
    }

    pub fn insulator(name: &str, epsilon_r: f64, strength: f64) -> Self {
        Self {
            name: name.into(),
            permeability: Permeability::Constant(1.0),
            epsilon_r,
            resistivity: f64::INFINITY,
            dielectric_strength: Some(strength),
            loss_constants: None,
            mass_density: None,
        }
    }

    pub fn magnetic(name: &str, mu_r: f64) -> Self {
        Self {
            name: name.into(),
            permeability: Permeability::Constant(mu_r),
            epsilon_r: 1.0,
            resistivity: 1e-2,
            dielectric_strength: None,
            loss_constants: None,
            mass_density: None,
        }
    }

    pub fn is_conductive(&self) -> bool {
        self.resistivity < CONDUCTIVE_RESISTIVITY_LIMIT
    }

    /// Total loss in W for a core of the given volume (m³); needs a mass density.
    pub fn core_loss_watts(&self, b: f64, f: f64, duty: f64, volume: f64) -> Result<f64> {
        let k = self.loss_constants.as_ref().ok_or_else(|| Error::InvalidMaterial {
            name: self.name.clone(),
            reason: "no loss constants".into(),
        })?;
        let rho = self.mass_density.ok_or_else(|| Error::InvalidMaterial {
            name: self.name.clone(),
            reason: "no mass density".into(),
        })?;
        Ok(core_loss_density(k, b, f, duty)? * rho * volume)
    }
}

/// Stand-in iron-powder curve: B = µ0·H + Ms·(2/π)·atan(π·µ0·(µi−1)·H / (2·Ms)),
/// µi = 75, Ms = 1.3 T, sampled on a fixed H grid.
pub fn iron_powder_standin_curve() -> BHCurve {
    const MU_I: f64 = 75.0;
    const MS: f64 = 1.3;
    const GRID: [f64; 15] = [
        0.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1e3, 2e3, 5e3, 1e4, 2e4, 5e4, 1e5, 2e5,
    ];
    let samples: Vec<(f64, f64)> = GRID
        .iter()
        .map(|&h| {
            let b = MU0 * h + MS * (2.0 / PI) * (PI * MU0 * (MU_I - 1.0) * h / (2.0 * MS)).atan();
            (h, b)
        })
        .collect();
    BHCurve::new(&samples).expect("stand-in curve is valid")
}

/// Named collection of materials with a TOML on-disk form.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MaterialCatalog {
    materials: BTreeMap<String, Material>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CatalogFile {
    #[serde(default)]
    material: Vec<MaterialRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialRecord {
    name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bh_curve: Option<Vec<[f64; 2]>>,
    epsilon_r: f64,
    resistivity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    dielectric_strength: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    loss_constants: Option<LossConstants>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mass_density: Option<f64>,
}

impl MaterialRecord {
    fn into_material(self) -> Result<Material> {
        let permeability = match (self.mu_r, self.bh_curve) {
            (Some(mu), None) => Permeability::Constant(mu),
            (None, Some(curve)) => {
                let s: Vec<(f64, f64)> = curve.iter().map(|p| (p[0], p[1])).collect();
                Permeability::Curve(BHCurve::new(&s)?)
            }
            _ => {
                return Err(Error::InvalidMaterial {
                    name: self.name,
                    reason: "exactly one of mu_r or bh_curve is required".into(),
                })
            }
        };
        let m = Material {
            name: self.name,
            permeability,
            epsilon_r: self.epsilon_r,
            resistivity: self.resistivity,
            dielectric_strength: self.dielectric_strength,
            loss_constants: self.loss_constants,
            mass_density: self.mass_density,
        };
        m.validate()?;
        Ok(m)
    }

    fn from_material(m: &Material) -> Self {
        let (mu_r, bh_curve) = match &m.permeability {
            Permeability::Constant(mu) => (Some(*mu), None),
            Permeability::Curve(c) => (None, Some(c.samples().iter().map(|&(h, b)| [h, b]).collect())),
        };
        Self {
            name: m.name.clone(),
            mu_r,
            bh_curve,
            epsilon_r: m.epsilon_r,
            resistivity: m.resistivity,
            dielectric_strength: m.dielectric_strength,
            loss_constants: m.loss_constants,
            mass_density: m.mass_density,
        }
    }
}

impl MaterialCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Air, copper, silicon varnish, plastic bobbin, iron powder (stand-in curve) and NiZn ferrite.
    pub fn builtin() -> Self {
        let mut c = Self::new();
        let entries = [
            Material::insulator("air", 1.0, 3e6),
            Material::insulator("silicon_varnish", 3.1, 120e6),
            Material::insulator("plastic_bobbin", 2.2, 25e6),
            Material {
                name: "copper".into(),
                permeability: Permeability::Constant(1.0),
                epsilon_r: 1.0,
                resistivity: COPPER_RESISTIVITY,
                dielectric_strength: None,
                loss_constants: None,
                mass_density: Some(8960.0),
            },
            Material {
                name: "iron_powder_mix08".into(),
                permeability: Permeability::Curve(iron_powder_standin_curve()),
                epsilon_r: 1.0,
                resistivity: 1e-2,
                dielectric_strength: None,
                loss_constants: Some(LossConstants::mix08()),
                mass_density: Some(7000.0),
            },
            Material {
                name: "ferrite_nizn".into(),
                permeability: Permeability::Constant(800.0),
                epsilon_r: 12.0,
                resistivity: 1e3,
                dielectric_strength: None,
                loss_constants: None,
                mass_density: Some(5000.0),
            },
        ];
        for m in entries {
            c.insert(m).expect("builtin materials are valid");
        }
        c
    }

    pub fn insert(&mut self, m: Material) -> Result<()> {
        m.validate()?;
        self.materials.insert(m.name.clone(), m);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Material> {
        self.materials
            .get(name)
            .ok_or_else(|| Error::UnknownMaterial(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.materials.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.materials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.materials.is_empty()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: CatalogFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut c = Self::new();
        for rec in file.material {
            if c.materials.contains_key(&rec.name) {
                return Err(Error::InvalidMaterial {
                    name: rec.name,
                    reason: "duplicate name".into(),
                });
            }
            c.insert(rec.into_material()?)?;
        }
        Ok(c)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        let file = CatalogFile {
            material: self.materials.values().map(MaterialRecord::from_material).collect(),
        };
        toml::to_string(&file).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Adds every material from `other`, replacing same-named entries.
    pub fn merge(&mut self, other: MaterialCatalog) {
        self.materials.extend(other.materials);
    }
}
