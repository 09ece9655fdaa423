//! Post-processing of field solutions: energies, lumped inductance and capacitance by the
//! energy method, MMF line integrals, peak fields, dielectric margins and Dowell AC resistance.

mod mmf;
mod resistance;

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{
    solve_linear, ConductorKey, ElectricExcitation, ExcitationSpec, FieldKind, FieldSolution, MagneticExcitation,
    OuterBoundary, Potential, SkinModel, DEFAULT_REL_TOL,
};
use crate::geometry::{layout_winding, AnalysisPlane, Layout, Point, RegionTag, Role, Scenario, Side};
use crate::materials::MaterialCatalog;
use crate::mesh::{refine, triangulate, vtk::write_vtk, Mesh};

pub use mmf::{mmf_profile, window_mmf, ElementLocator, MmfProfile};
pub use resistance::{ac_resistance, AcResistance};

/// Default applied voltage for the dielectric check (V).
pub const DEFAULT_TEST_VOLTAGE: f64 = 10e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    /// Target element size near the windings (m).
    pub h: f64,
    /// Size growth per unit distance away from the windings.
    pub grading: f64,
    /// Uniform refinements applied after triangulation.
    pub refinements: u32,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self {
            h: 1e-3,
            grading: 1.3,
            refinements: 0,
        }
    }
}

/// A meshed scenario shared by every solve run on it.
#[derive(Debug, Clone)]
pub struct Study {
    pub scenario: Scenario,
    pub materials: MaterialCatalog,
    pub layout: Layout,
    pub mesh: Arc<Mesh>,
    pub rel_tol: f64,
}

impl Study {
    pub fn new(scenario: &Scenario, materials: &MaterialCatalog, opts: MeshOptions) -> Result<Self> {
        scenario.validate()?;
        for name in [
            &scenario.core_material,
            &scenario.insulation_material,
            &scenario.bobbin_material,
            &scenario.ambient_material,
        ] {
            materials.get(name)?;
        }
        let layout = layout_winding(scenario)?;
        let mut mesh = triangulate(&layout, opts.h, opts.grading)?;
        for _ in 0..opts.refinements {
            mesh = refine(&mesh);
        }
        Ok(Self {
            scenario: scenario.clone(),
            materials: materials.clone(),
            layout,
            mesh: Arc::new(mesh),
            rel_tol: DEFAULT_REL_TOL,
        })
    }

    /// The same study on a uniformly refined mesh.
    pub fn refined(&self) -> Self {
        Self {
            mesh: Arc::new(refine(&self.mesh)),
            ..self.clone()
        }
    }

    pub fn solve(&self, excitation: &ExcitationSpec) -> Result<FieldSolution> {
        solve_linear(self.mesh.clone(), &self.materials, excitation, self.rel_tol)
    }

    /// Elements whose centroid lies in a field zone of the layout (all elements if none).
    pub fn in_field_zone(&self, e: usize) -> bool {
        let zones = &self.layout.field_zones;
        zones.is_empty() || {
            let c = self.mesh.centroid(e);
            zones.iter().any(|z| z.contains(c))
        }
    }

    /// Per-turn currents for a primary current `i_p` with the secondary ampere-turns balancing it.
    pub fn balanced_currents(&self, i_p: f64) -> [f64; 2] {
        let np = f64::from(self.scenario.winding(Role::Primary).turns);
        let ns = f64::from(self.scenario.winding(Role::Secondary).turns);
        let mut c = [0.0; 2];
        c[Role::Primary.index()] = i_p;
        c[Role::Secondary.index()] = -i_p * np / ns;
        c
    }
}

fn require(sol: &FieldSolution, kind: FieldKind) -> Result<()> {
    if sol.kind() == kind {
        Ok(())
    } else {
        Err(Error::WrongKind(match kind {
            FieldKind::Magnetostatic => "magnetostatic solution",
            FieldKind::Electrostatic => "electrostatic solution",
        }))
    }
}

/// ½∫B·H dV over the whole domain (J).
pub fn magnetic_energy(sol: &FieldSolution) -> Result<f64> {
    require(sol, FieldKind::Magnetostatic)?;
    Ok(sol.energy())
}

/// ½∫D·E dV over the whole domain (J).
pub fn electric_energy(sol: &FieldSolution) -> Result<f64> {
    require(sol, FieldKind::Electrostatic)?;
    Ok(sol.energy())
}

/// Flux linkage of `role` (Wb-turns) from the mean potential over each of its turn regions.
pub fn flux_linkage(sol: &FieldSolution, role: Role) -> Result<f64> {
    require(sol, FieldKind::Magnetostatic)?;
    let m = &sol.mesh;
    let mut integral = vec![0.0; m.regions.len()];
    let mut area = vec![0.0; m.regions.len()];
    for (e, t) in m.elements.iter().enumerate() {
        let r = m.element_region[e] as usize;
        if !matches!(m.regions[r].tag, RegionTag::Turn(id) if id.role == role) {
            continue;
        }
        let a = m.element_area(e);
        let mean = (sol.dof[t[0] as usize] + sol.dof[t[1] as usize] + sol.dof[t[2] as usize]) / 3.0;
        integral[r] += a * mean;
        area[r] += a;
    }
    let scale = match m.plane {
        AnalysisPlane::Planar { depth } => depth,
        AnalysisPlane::Axisymmetric => 2.0 * std::f64::consts::PI,
    };
    let mut total = 0.0;
    for (r, info) in m.regions.iter().enumerate() {
        if let RegionTag::Turn(id) = info.tag {
            if id.role == role && area[r] > 0.0 {
                let sign = if id.side == Side::Go { 1.0 } else { -1.0 };
                total += sign * integral[r] / area[r];
            }
        }
    }
    Ok(scale * total)
}

/// Largest per-element field magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakField {
    /// |H| (A/m) or |E| (V/m).
    pub value: f64,
    pub element: usize,
    pub location: Point,
}

/// Peak |H| (magnetostatic) or |E| (electrostatic) over elements accepted by `filter`; ties
/// resolve to the lowest element index.
pub fn peak_field(sol: &FieldSolution, mut filter: impl FnMut(usize) -> bool) -> Result<PeakField> {
    let mut best: Option<PeakField> = None;
    for e in 0..sol.mesh.elements.len() {
        if !filter(e) {
            continue;
        }
        let v = sol.intensity_magnitude(e);
        if best.is_none_or(|b| v > b.value) {
            best = Some(PeakField {
                value: v,
                element: e,
                location: sol.mesh.centroid(e),
            });
        }
    }
    best.ok_or_else(|| Error::EmptySelection("no element matches the peak-field filter".into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeakageResult {
    /// Primary-referred (H).
    pub leakage_inductance: f64,
    /// Open-circuit primary inductance (H).
    pub magnetizing_inductance: f64,
    /// Short-circuit field energy, stored as ½·L·I² (J).
    pub magnetic_energy: f64,
    /// Peak |H| over the winding window.
    pub peak_h: PeakField,
    /// Primary current (A).
    pub current: f64,
}

/// Short-circuit solve at rated current with balanced ampere-turns: L = 2E/I².
pub fn leakage_inductance(study: &Study, skin: SkinModel) -> Result<LeakageResult> {
    let (l, peak, current) = short_circuit(study, skin)?;
    let l_mag = magnetizing_inductance(study)?;
    Ok(LeakageResult {
        leakage_inductance: l,
        magnetizing_inductance: l_mag,
        magnetic_energy: 0.5 * l * current * current,
        peak_h: peak,
        current,
    })
}

/// Rated primary current with the secondary ampere-turns balancing it.
pub fn balanced_excitation(study: &Study, skin: SkinModel) -> MagneticExcitation {
    MagneticExcitation {
        winding_current: study.balanced_currents(study.scenario.rated.current()),
        electrode_current: Vec::new(),
        skin,
        outer: OuterBoundary::Dirichlet,
    }
}

/// Leakage inductance and window peak |H| without the open-circuit solve.
pub fn short_circuit(study: &Study, skin: SkinModel) -> Result<(f64, PeakField, f64)> {
    let i = study.scenario.rated.current();
    let exc = balanced_excitation(study, skin);
    let sol = study.solve(&ExcitationSpec::Magnetostatic(exc))?;
    let e = magnetic_energy(&sol)?;
    let peak = peak_field(&sol, |el| study.in_field_zone(el))?;
    Ok((2.0 * e / (i * i), peak, i))
}

/// Primary at rated current, secondary open: L = 2E/I².
pub fn magnetizing_inductance(study: &Study) -> Result<f64> {
    let i = study.scenario.rated.current();
    let mut c = [0.0; 2];
    c[Role::Primary.index()] = i;
    let sol = study.solve(&ExcitationSpec::Magnetostatic(MagneticExcitation::windings(c[0], c[1])))?;
    Ok(2.0 * magnetic_energy(&sol)? / (i * i))
}

/// How the core takes part in the capacitance solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CoreModel {
    /// Conductive, unconnected: one equipotential with zero net charge.
    #[default]
    FloatingConductor,
    /// Insulating body with the core material's permittivity.
    Dielectric,
    /// Conductive and held at 0 V.
    Grounded,
}

impl fmt::Display for CoreModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoreModel::FloatingConductor => "FLOATING",
            CoreModel::Dielectric => "DIELECTRIC",
            CoreModel::Grounded => "GROUNDED",
        })
    }
}

impl FromStr for CoreModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "FLOATING" | "FLOATING_CONDUCTOR" => Ok(CoreModel::FloatingConductor),
            "DIELECTRIC" => Ok(CoreModel::Dielectric),
            "GROUNDED" => Ok(CoreModel::Grounded),
            _ => Err(Error::Parse(format!("unknown core model `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacitanceResult {
    /// Primary-to-secondary capacitance (F).
    pub capacitance: f64,
    /// Stored as ½·C·V² (J).
    pub electric_energy: f64,
    pub applied_voltage: f64,
    pub core_model: CoreModel,
}

fn core_entry(model: CoreModel) -> Option<(ConductorKey, Potential)> {
    match model {
        CoreModel::FloatingConductor => Some((ConductorKey::Core, Potential::Floating)),
        CoreModel::Dielectric => None,
        CoreModel::Grounded => Some((ConductorKey::Core, Potential::Fixed(0.0))),
    }
}

/// 1 V on the primary, secondary at 0 V: C = 2E/V².
pub fn winding_capacitance(study: &Study, core_model: CoreModel) -> Result<CapacitanceResult> {
    winding_capacitance_driven(study, core_model, Role::Primary, 1.0)
}

/// `volts` on `driven`, the other winding at 0 V.
pub fn winding_capacitance_driven(
    study: &Study,
    core_model: CoreModel,
    driven: Role,
    volts: f64,
) -> Result<CapacitanceResult> {
    if !(volts != 0.0 && volts.is_finite()) {
        return Err(Error::InvalidArgument("applied voltage must be nonzero".into()));
    }
    let mut exc = ElectricExcitation::winding_drive(driven, volts);
    if let Some((k, p)) = core_entry(core_model) {
        exc = exc.with(k, p);
    }
    let sol = study.solve(&ExcitationSpec::Electrostatic(exc))?;
    let c = 2.0 * electric_energy(&sol)? / (volts * volts);
    Ok(CapacitanceResult {
        capacitance: c,
        electric_energy: 0.5 * c * volts * volts,
        applied_voltage: volts,
        core_model,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialMargin {
    pub material: String,
    /// Peak |E| (V/m) over the material's insulating regions.
    pub peak_e: f64,
    pub location: Point,
    pub element: usize,
    /// V/m.
    pub dielectric_strength: f64,
    /// strength / peak; above 1 passes.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DielectricMarginReport {
    pub test_voltage: f64,
    /// One entry per insulating material present, in order of first appearance.
    pub materials: Vec<MaterialMargin>,
}

impl DielectricMarginReport {
    pub fn passes(&self) -> bool {
        self.materials.iter().all(|m| m.margin > 1.0)
    }

    pub fn peak_e(&self) -> f64 {
        self.materials.iter().fold(0.0, |a, m| a.max(m.peak_e))
    }

    pub fn worst(&self) -> Option<&MaterialMargin> {
        self.materials.iter().min_by(|a, b| a.margin.total_cmp(&b.margin))
    }
}

fn is_insulating(tag: &RegionTag) -> bool {
    matches!(tag, RegionTag::Insulation | RegionTag::Bobbin | RegionTag::Air)
}

/// Primary at `test_voltage`, secondary and core grounded.
pub fn dielectric_field(study: &Study, test_voltage: f64) -> Result<FieldSolution> {
    if !(test_voltage > 0.0 && test_voltage.is_finite()) {
        return Err(Error::InvalidArgument("test voltage must be positive".into()));
    }
    let mut exc = ElectricExcitation::winding_drive(Role::Primary, test_voltage);
    if study.mesh.regions.iter().any(|r| r.tag == RegionTag::Core) {
        exc = exc.with(ConductorKey::Core, Potential::Fixed(0.0));
    }
    study.solve(&ExcitationSpec::Electrostatic(exc))
}

/// Peak |E| per insulating material under the [`dielectric_field`] test.
pub fn dielectric_margin(study: &Study, test_voltage: f64) -> Result<DielectricMarginReport> {
    let sol = dielectric_field(study, test_voltage)?;
    margins_from(&sol, &study.materials, test_voltage)
}

/// Per-material margins of an electrostatic solution.
pub fn margins_from(
    sol: &FieldSolution,
    materials: &MaterialCatalog,
    test_voltage: f64,
) -> Result<DielectricMarginReport> {
    require(sol, FieldKind::Electrostatic)?;
    let m = &sol.mesh;
    let mut names: Vec<String> = Vec::new();
    for r in &m.regions {
        if is_insulating(&r.tag) && !names.contains(&r.material) {
            names.push(r.material.clone());
        }
    }
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        let mat = materials.get(&name)?;
        let strength = mat
            .dielectric_strength
            .filter(|s| *s > 0.0)
            .ok_or_else(|| Error::InvalidMaterial {
                name: name.clone(),
                reason: "insulating region material has no dielectric strength".into(),
            })?;
        let peak = peak_field(sol, |e| {
            let info = &m.regions[m.element_region[e] as usize];
            is_insulating(&info.tag) && info.material == name
        })?;
        out.push(MaterialMargin {
            material: name,
            peak_e: peak.value,
            location: peak.location,
            element: peak.element,
            dielectric_strength: strength,
            margin: strength / peak.value,
        });
    }
    Ok(DielectricMarginReport {
        test_voltage,
        materials: out,
    })
}

/// Writes the solution as legacy VTK: nodal potential plus |B|, |H| (or |E|) per element.
pub fn write_field_vtk<W: Write>(sol: &FieldSolution, title: &str, out: &mut W) -> Result<()> {
    let n = sol.mesh.elements.len();
    match sol.kind() {
        FieldKind::Magnetostatic => {
            let b: Vec<f64> = (0..n).map(|e| sol.field_magnitude(e)).collect();
            let h: Vec<f64> = (0..n).map(|e| sol.intensity_magnitude(e)).collect();
            let name = match sol.mesh.plane {
                AnalysisPlane::Planar { .. } => "Az",
                AnalysisPlane::Axisymmetric => "rAphi",
            };
            write_vtk(
                &sol.mesh,
                title,
                &[(name, &sol.dof)],
                &[("B_mag", &b), ("H_mag", &h)],
                out,
            )
        }
        FieldKind::Electrostatic => {
            let e: Vec<f64> = (0..n).map(|e| sol.field_magnitude(e)).collect();
            write_vtk(&sol.mesh, title, &[("V", &sol.dof)], &[("E_mag", &e)], out)
        }
    }
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionReport {
    pub scenario: String,
    pub magnetizing_inductance: f64,
    pub leakage_inductance: f64,
    pub ac_resistance: f64,
    pub capacitance: f64,
    pub core_model: CoreModel,
    pub peak_h: f64,
    pub peak_e: f64,
    pub pass_dielectric: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    pub core_model: CoreModel,
    pub test_voltage: f64,
    pub skin: SkinModel,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            core_model: CoreModel::FloatingConductor,
            test_voltage: DEFAULT_TEST_VOLTAGE,
            skin: SkinModel::Uniform,
        }
    }
}

/// Runs every extraction on one study.
pub fn extract_report(study: &Study, opts: &ReportOptions) -> Result<ExtractionReport> {
    let leak = leakage_inductance(study, opts.skin)?;
    let cap = winding_capacitance(study, opts.core_model)?;
    let margins = dielectric_margin(study, opts.test_voltage)?;
    let r_ac = ac_resistance(&study.scenario, study.scenario.rated.frequency)?;
    Ok(ExtractionReport {
        scenario: study.scenario.id.clone(),
        magnetizing_inductance: leak.magnetizing_inductance,
        leakage_inductance: leak.leakage_inductance,
        ac_resistance: r_ac.total,
        capacitance: cap.capacitance,
        core_model: opts.core_model,
        peak_h: leak.peak_h.value,
        peak_e: margins.peak_e(),
        pass_dielectric: margins.passes(),
    })
}
