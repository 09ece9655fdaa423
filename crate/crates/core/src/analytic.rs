//! Closed-form design formulas and oracles: MMF diagrams, slot leakage, plate and coaxial
//! capacitance, Dowell AC resistance and area-product sizing.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Arrangement, Role};
use crate::materials::{EPS0, MU0};

/// Inputs of the area-product sizing rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignSpec {
    /// VA.
    pub p_apparent: f64,
    pub k_f: f64,
    pub k_u: f64,
    /// T.
    pub b_m: f64,
    /// A/m².
    pub j: f64,
    /// Hz.
    pub f: f64,
}

impl Default for DesignSpec {
    /// Square-wave handbook defaults at 8 kVA and 10 kHz. `b_m` is the flux density that gives
    /// 80 turns at 400 V on a 1600 mm² core.
    fn default() -> Self {
        Self {
            p_apparent: 8000.0,
            k_f: 4.0,
            k_u: 0.4,
            b_m: implied_flux_density(400.0, 4.0, 80.0, 1600e-6, 1e4),
            j: 3e6,
            f: 1e4,
        }
    }
}

impl DesignSpec {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("p_apparent", self.p_apparent),
            ("k_f", self.k_f),
            ("k_u", self.k_u),
            ("b_m", self.b_m),
            ("j", self.j),
            ("f", self.f),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.k_u > 1.0 {
            return Err(Error::InvalidArgument(format!("k_u {} exceeds 1", self.k_u)));
        }
        Ok(())
    }
}

/// Area product in m⁴: `P / (K_f·K_u·B_m·J·f)`.
pub fn area_product(spec: &DesignSpec) -> Result<f64> {
    spec.validate()?;
    Ok(spec.p_apparent / (spec.k_f * spec.k_u * spec.b_m * spec.j * spec.f))
}

/// Turns required for `voltage` on a core of cross-section `a_core` (m²), unrounded.
pub fn turns_for_core(voltage: f64, k_f: f64, b_m: f64, a_core: f64, f: f64) -> Result<f64> {
    for (name, v) in [
        ("voltage", voltage),
        ("k_f", k_f),
        ("b_m", b_m),
        ("a_core", a_core),
        ("f", f),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(voltage / (k_f * b_m * a_core * f))
}

/// Flux density implied by a chosen turn count: the turns formula solved for B_m.
pub fn implied_flux_density(voltage: f64, k_f: f64, turns: f64, a_core: f64, f: f64) -> f64 {
    voltage / (k_f * turns * a_core * f)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sizing {
    /// m⁴.
    pub a_p: f64,
    /// Rounded up to a whole turn.
    pub turns: u32,
    pub turns_exact: f64,
}

pub fn area_product_sizing(spec: &DesignSpec, voltage: f64, a_core: f64) -> Result<Sizing> {
    let a_p = area_product(spec)?;
    let turns_exact = turns_for_core(voltage, spec.k_f, spec.b_m, a_core, spec.f)?;
    // guard against 80.000000000001 rounding up to 81
    let turns = (turns_exact * (1.0 - 1e-12)).ceil() as u32;
    Ok(Sizing {
        a_p,
        turns,
        turns_exact,
    })
}

/// Piecewise-linear ampere-turn staircase across a layered winding.
#[derive(Debug, Clone, PartialEq)]
pub struct MmfDiagram {
    pub arrangement: Arrangement,
    /// Signed ampere-turns contributed by each layer, in slot order.
    pub layer_ampere_turns: Vec<f64>,
    /// (position fraction, MMF) at the layer boundaries, equal layer widths.
    pub profile: Vec<(f64, f64)>,
    pub peak: f64,
}

impl MmfDiagram {
    /// MMF at each layer boundary (n + 1 values).
    pub fn boundary_values(&self) -> Vec<f64> {
        self.profile.iter().map(|p| p.1).collect()
    }

    /// ∫ MMF² dx with layer thickness `t` and inter-layer gaps (one per adjacent pair).
    pub fn squared_integral(&self, t: f64, gaps: &[f64]) -> Result<f64> {
        let n = self.layer_ampere_turns.len();
        if gaps.len() + 1 != n {
            return Err(Error::InvalidArgument(format!(
                "{} gaps given for {} layers",
                gaps.len(),
                n
            )));
        }
        let m = self.boundary_values();
        let mut sum = 0.0;
        for k in 0..n {
            let (a, b) = (m[k], m[k + 1]);
            sum += t * (a * a + a * b + b * b) / 3.0;
            if k + 1 < n {
                sum += gaps[k] * b * b;
            }
        }
        Ok(sum)
    }
}

/// Running-sum MMF staircase: +N·I across a P layer, −N·I across an S layer.
pub fn mmf_diagram(arrangement: &Arrangement, turns_per_layer: f64, current: f64) -> Result<MmfDiagram> {
    let (np, ns) = arrangement.counts();
    if np != ns {
        return Err(Error::InvalidArrangement(format!(
            "unbalanced: {np} primary vs {ns} secondary layers with equal turns per layer"
        )));
    }
    let n = arrangement.len();
    let step = turns_per_layer * current;
    let layer_ampere_turns: Vec<f64> = arrangement
        .tokens()
        .iter()
        .map(|r| match r {
            Role::Primary => step,
            Role::Secondary => -step,
        })
        .collect();
    let mut profile = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    profile.push((0.0, 0.0));
    for (k, at) in layer_ampere_turns.iter().enumerate() {
        acc += at;
        profile.push(((k + 1) as f64 / n as f64, acc));
    }
    let peak = profile.iter().fold(0.0f64, |p, q| p.max(q.1.abs()));
    Ok(MmfDiagram {
        arrangement: arrangement.clone(),
        layer_ampere_turns,
        profile,
        peak,
    })
}

/// Leakage inductance (H) of a 1D slot: `µ0·MLT/h · ∫MMF² dx / I²`, where `diagram` carries the
/// excitation current `current`.
pub fn slot_leakage(
    window_height: f64,
    window_breadth: f64,
    mean_turn_length: f64,
    diagram: &MmfDiagram,
    current: f64,
    layer_thickness: f64,
    gap_thicknesses: &[f64],
) -> Result<f64> {
    if !(window_height > 0.0) {
        return Err(Error::InvalidArgument("window height must be positive".into()));
    }
    if !(current != 0.0 && current.is_finite()) {
        return Err(Error::InvalidArgument("current must be nonzero".into()));
    }
    if layer_thickness < 0.0 || gap_thicknesses.iter().any(|g| *g < 0.0) {
        return Err(Error::InvalidArgument("negative thickness".into()));
    }
    let stack = layer_thickness * diagram.layer_ampere_turns.len() as f64 + gap_thicknesses.iter().sum::<f64>();
    if stack > window_breadth * (1.0 + 1e-12) {
        return Err(Error::DoesNotFit {
            what: "slot layer stack".into(),
            required: stack,
            available: window_breadth,
        });
    }
    let integral = diagram.squared_integral(layer_thickness, gap_thicknesses)?;
    Ok(MU0 * mean_turn_length / window_height * integral / (current * current))
}

/// ∫MMF² of `arrangement` relative to the grouped arrangement with the same layer counts.
pub fn interleaving_factor(arrangement: &Arrangement) -> Result<f64> {
    let d = mmf_diagram(arrangement, 1.0, 1.0)?;
    let (np, ns) = arrangement.counts();
    let grouped = Arrangement::grouped(np, ns)?;
    let g = mmf_diagram(&grouped, 1.0, 1.0)?;
    let gaps = vec![0.0; arrangement.len() - 1];
    Ok(d.squared_integral(1.0, &gaps)? / g.squared_integral(1.0, &gaps)?)
}

/// ε0·εr·A/g.
pub fn plate_capacitance(area: f64, gap: f64, epsilon_r: f64) -> Result<f64> {
    if !(area > 0.0 && gap > 0.0 && epsilon_r > 0.0) {
        return Err(Error::InvalidArgument("plate inputs must be positive".into()));
    }
    Ok(EPS0 * epsilon_r * area / gap)
}

/// Series dielectric stack of (gap, εr) layers between plates of `area`.
pub fn series_plate_capacitance(area: f64, layers: &[(f64, f64)]) -> Result<f64> {
    if layers.is_empty() {
        return Err(Error::InvalidArgument("empty layer stack".into()));
    }
    let mut inv = 0.0;
    for &(g, er) in layers {
        inv += 1.0 / plate_capacitance(area, g, er)?;
    }
    Ok(1.0 / inv)
}

/// 2π·ε0·εr·ℓ / ln(r_outer/r_inner).
pub fn coax_capacitance(r_inner: f64, r_outer: f64, length: f64, epsilon_r: f64) -> Result<f64> {
    if !(r_inner > 0.0 && r_outer > r_inner && length > 0.0 && epsilon_r > 0.0) {
        return Err(Error::InvalidArgument(
            "coax needs 0 < r_inner < r_outer and positive length".into(),
        ));
    }
    Ok(2.0 * PI * EPS0 * epsilon_r * length / (r_outer / r_inner).ln())
}

/// Skin depth √(ρ/(π·f·µ0)).
pub fn skin_depth(resistivity: f64, f: f64) -> f64 {
    (resistivity / (PI * f * MU0)).sqrt()
}

/// Normalized layer thickness Δ = t·√(π·f·µ0·η/ρ).
pub fn dowell_delta(thickness: f64, porosity: f64, f: f64, resistivity: f64) -> f64 {
    thickness * (PI * f * MU0 * porosity / resistivity).sqrt()
}

/// Δ·(sinh2Δ + sin2Δ)/(cosh2Δ − cos2Δ).
fn dowell_skin_term(d: f64) -> f64 {
    if d <= 1.0 {
        let (s, sn) = (d.sinh(), d.sin());
        d * ((2.0 * d).sinh() + (2.0 * d).sin()) / (2.0 * (s * s + sn * sn))
    } else {
        let c = (2.0 * d).cosh();
        d * ((2.0 * d).tanh() + (2.0 * d).sin() / c) / (1.0 - (2.0 * d).cos() / c)
    }
}

/// (sinhΔ − sinΔ)/(coshΔ + cosΔ).
fn dowell_proximity_ratio(d: f64) -> f64 {
    if d <= 1.0 {
        // sinh x − sin x = 2·Σ x^(4k+3)/(4k+3)!
        let x2 = d * d;
        let x4 = x2 * x2;
        let mut term = d * x2 / 6.0;
        let mut sum = 0.0;
        let mut k = 0u32;
        while term > sum * 1e-18 && k < 12 {
            sum += term;
            let n = 4 * k + 3;
            term *= x4 / f64::from((n + 1) * (n + 2) * (n + 3) * (n + 4));
            k += 1;
        }
        2.0 * sum / (d.cosh() + d.cos())
    } else {
        let c = d.cosh();
        (d.tanh() - d.sin() / c) / (1.0 + d.cos() / c)
    }
}

/// R_AC/R_DC factor of Dowell's layered-winding model for normalized thickness `delta` and
/// `m` layers per MMF portion.
pub fn dowell_factor(delta: f64, m: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("Δ must be positive, got {delta}")));
    }
    if !(m >= 1.0) {
        return Err(Error::InvalidArgument(format!("layers per portion {m} below 1")));
    }
    let prox = if m == 1.0 {
        0.0
    } else {
        2.0 * (m * m - 1.0) / 3.0 * delta * dowell_proximity_ratio(delta)
    };
    Ok(dowell_skin_term(delta) + prox)
}

/// R_AC/R_DC of a single layer whose outer-surface MMF is `m` times its own ampere-turns:
/// Δ·[ς₁ + 2(m² − m)·ς₂]. Averaging over layers 1..m gives [`dowell_factor`].
pub fn dowell_layer_factor(delta: f64, m: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("Δ must be positive, got {delta}")));
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidArgument(format!("MMF ratio {m} must be positive")));
    }
    Ok(dowell_skin_term(delta) + 2.0 * (m * m - m) * delta * dowell_proximity_ratio(delta))
}

/// Dowell AC resistance in ohms.
pub fn dowell_ac_resistance(
    r_dc: f64,
    layers_per_portion: f64,
    wire_equiv_thickness: f64,
    porosity: f64,
    f: f64,
    resistivity: f64,
) -> Result<f64> {
    for (name, v) in [
        ("R_dc", r_dc),
        ("thickness", wire_equiv_thickness),
        ("porosity", porosity),
        ("f", f),
        ("resistivity", resistivity),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    let delta = dowell_delta(wire_equiv_thickness, porosity, f, resistivity);
    Ok(r_dc * dowell_factor(delta, layers_per_portion)?)
}
