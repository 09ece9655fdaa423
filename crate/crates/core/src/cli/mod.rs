//! Batch runner behind the `xfmr-fem` binary: run configuration, per-scenario studies,
//! report files and exit status.

mod report;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

pub use report::{
    compare_reports, format_number, read_report, write_comparison, write_convergence, write_report, ComparisonRow,
    ConvergenceRow, ReportRow, CONVERGENCE_HEADER, NUMERIC_COLUMNS, REPORT_HEADER,
};

use crate::error::{Error, Result};
use crate::extraction::{
    ac_resistance, dielectric_margin, magnetizing_inductance, short_circuit, winding_capacitance, write_field_vtk,
    CoreModel, MeshOptions, Study, DEFAULT_TEST_VOLTAGE,
};
use crate::fem::{
    solve_linear, solve_nonlinear_magnetostatic, ExcitationSpec, MagneticExcitation, SkinModel, DEFAULT_REL_TOL,
};
use crate::geometry::{build_preset, build_preset_with_arrangement, preset_ids, Scenario};
use crate::materials::{MaterialCatalog, Permeability};

/// Exit status of a clean run.
pub const EXIT_OK: i32 = 0;
/// Exit status when any study errored.
pub const EXIT_ERROR: i32 = 1;
/// Exit status when every study ran but a dielectric margin failed.
pub const EXIT_DIELECTRIC: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum StudyKind {
    Leakage,
    Magnetizing,
    Capacitance,
    Dielectric,
    Fluxmap,
}

/// Where a scenario comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    Preset(String),
    /// Preset with its layer order replaced, written `ID:ARRANGEMENT`.
    Interleaved(String, String),
    File(PathBuf),
}

impl ScenarioSource {
    /// Preset ids (optionally `ID:ARRANGEMENT`) win over paths; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Self {
        let (head, tail) = text.split_once(':').unwrap_or((text, ""));
        if preset_ids().contains(&head) {
            if tail.is_empty() {
                return ScenarioSource::Preset(head.into());
            }
            return ScenarioSource::Interleaved(head.into(), tail.into());
        }
        let p = Path::new(text);
        ScenarioSource::File(if p.is_absolute() { p.into() } else { base.join(p) })
    }

    pub fn load(&self) -> Result<Scenario> {
        match self {
            ScenarioSource::Preset(id) => build_preset(id),
            ScenarioSource::Interleaved(id, arr) => build_preset_with_arrangement(id, arr),
            ScenarioSource::File(p) => Scenario::load(p),
        }
    }

    /// Name used in messages before the scenario is loaded.
    pub fn label(&self) -> String {
        match self {
            ScenarioSource::Preset(id) => id.clone(),
            ScenarioSource::Interleaved(id, arr) => format!("{id}:{arr}"),
            ScenarioSource::File(p) => p.display().to_string(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct ConfigFile {
    scenarios: Vec<String>,
    studies: Vec<StudyKind>,
    h_target_mm: Option<f64>,
    grading: Option<f64>,
    refinement_levels: Option<u32>,
    core_models: Option<Vec<String>>,
    skin_effect: Option<bool>,
    test_voltage_kV: Option<f64>,
    output_dir: Option<PathBuf>,
    materials: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenarios: Vec<ScenarioSource>,
    /// Sorted, no duplicates.
    pub studies: Vec<StudyKind>,
    /// Target element size near the windings (m).
    pub h_target: f64,
    pub grading: f64,
    /// Mesh levels per scenario: the base mesh plus `refinement_levels − 1` uniform refinements.
    pub refinement_levels: u32,
    pub core_models: Vec<CoreModel>,
    pub skin_effect: bool,
    /// V.
    pub test_voltage: f64,
    pub output_dir: PathBuf,
    /// Extra material catalog merged over the built-in one.
    pub materials: Option<PathBuf>,
}

impl RunConfig {
    /// Parses a TOML run file; relative paths resolve against `base`.
    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self> {
        let f: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut studies = f.studies;
        studies.sort();
        studies.dedup();
        let core_models = match f.core_models {
            Some(v) => v.iter().map(|s| s.parse()).collect::<Result<Vec<CoreModel>>>()?,
            None => vec![CoreModel::FloatingConductor],
        };
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let cfg = Self {
            scenarios: f.scenarios.iter().map(|s| ScenarioSource::parse(s, base)).collect(),
            studies,
            h_target: f.h_target_mm.unwrap_or(1.0) * 1e-3,
            grading: f.grading.unwrap_or(1.3),
            refinement_levels: f.refinement_levels.unwrap_or(1),
            core_models,
            skin_effect: f.skin_effect.unwrap_or(false),
            test_voltage: f.test_voltage_kV.map_or(DEFAULT_TEST_VOLTAGE, |v| v * 1e3),
            output_dir: resolve(f.output_dir.unwrap_or_else(|| "out".into())),
            materials: f.materials.map(resolve),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(Error::Config("no scenarios listed".into()));
        }
        if self.studies.is_empty() {
            return Err(Error::Config("no studies listed".into()));
        }
        if self.refinement_levels < 1 {
            return Err(Error::Config("refinement_levels must be at least 1".into()));
        }
        if self.core_models.is_empty() {
            return Err(Error::Config("core_models is empty".into()));
        }
        if !(self.h_target > 0.0 && self.h_target.is_finite()) {
            return Err(Error::Config("h_target_mm must be positive".into()));
        }
        if !(self.grading >= 1.0 && self.grading.is_finite()) {
            return Err(Error::Config("grading must be at least 1".into()));
        }
        if !(self.test_voltage > 0.0 && self.test_voltage.is_finite()) {
            return Err(Error::Config("test_voltage_kV must be positive".into()));
        }
        Ok(())
    }

    fn has(&self, s: StudyKind) -> bool {
        self.studies.contains(&s)
    }

    pub fn catalog(&self) -> Result<MaterialCatalog> {
        let mut c = MaterialCatalog::builtin();
        if let Some(p) = &self.materials {
            c.merge(MaterialCatalog::load(p)?);
        }
        Ok(c)
    }
}

/// Results of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub rows: Vec<ReportRow>,
    pub convergence: Vec<ConvergenceRow>,
    /// Worst dielectric margin when the dielectric study failed: (material, margin).
    pub dielectric_failure: Option<(String, f64)>,
}

/// Everything a run produced, in scenario order.
#[derive(Debug)]
pub struct RunOutcome {
    pub results: Vec<(String, Result<ScenarioOutcome>)>,
}

impl RunOutcome {
    pub fn rows(&self) -> Vec<ReportRow> {
        self.results
            .iter()
            .filter_map(|(_, r)| r.as_ref().ok())
            .flat_map(|o| o.rows.iter().cloned())
            .collect()
    }

    pub fn convergence(&self) -> Vec<ConvergenceRow> {
        self.results
            .iter()
            .filter_map(|(_, r)| r.as_ref().ok())
            .flat_map(|o| o.convergence.iter().cloned())
            .collect()
    }

    pub fn errors(&self) -> impl Iterator<Item = (&str, &Error)> {
        self.results
            .iter()
            .filter_map(|(id, r)| r.as_ref().err().map(|e| (id.as_str(), e)))
    }

    pub fn dielectric_failures(&self) -> impl Iterator<Item = (&str, &(String, f64))> {
        self.results.iter().filter_map(|(id, r)| {
            r.as_ref()
                .ok()
                .and_then(|o| o.dielectric_failure.as_ref())
                .map(|f| (id.as_str(), f))
        })
    }

    pub fn exit_code(&self) -> i32 {
        if self.errors().next().is_some() {
            EXIT_ERROR
        } else if self.dielectric_failures().next().is_some() {
            EXIT_DIELECTRIC
        } else {
            EXIT_OK
        }
    }
}

struct Level {
    quantities: Vec<(String, f64)>,
}

fn record(levels: &[(usize, Level)], scenario: &str) -> Vec<ConvergenceRow> {
    let mut out = Vec::new();
    let Some(first) = levels.first() else {
        return out;
    };
    for (q, (name, _)) in first.1.quantities.iter().enumerate() {
        let mut prev = None;
        for (lvl, (elements, level)) in levels.iter().enumerate() {
            let v = level.quantities[q].1;
            out.push(ConvergenceRow {
                scenario: scenario.to_string(),
                level: lvl as u32,
                elements: *elements,
                quantity: name.clone(),
                value: v,
                delta: prev.map(|p| v - p),
            });
            prev = Some(v);
        }
    }
    out
}

/// Primary alone at rated current, nonlinear when the core has a B-H curve.
fn full_load_field(study: &Study) -> Result<crate::fem::FieldSolution> {
    let exc = MagneticExcitation::windings(study.scenario.rated.current(), 0.0);
    let core = study.materials.get(&study.scenario.core_material)?;
    if matches!(core.permeability, Permeability::Curve(_)) {
        solve_nonlinear_magnetostatic(study.mesh.clone(), &study.materials, &exc, 1e-8)
    } else {
        solve_linear(
            study.mesh.clone(),
            &study.materials,
            &ExcitationSpec::Magnetostatic(exc),
            study.rel_tol,
        )
    }
}

fn write_maps(study: &Study, cfg: &RunConfig, skin: SkinModel) -> Result<()> {
    let id = &study.scenario.id;
    let sc = crate::extraction::balanced_excitation(study, skin);
    let maps = [
        ("fullload", full_load_field(study)?),
        ("shortcircuit", study.solve(&ExcitationSpec::Magnetostatic(sc))?),
        (
            "dielectric",
            crate::extraction::dielectric_field(study, cfg.test_voltage)?,
        ),
    ];
    for (name, sol) in maps {
        let path = cfg.output_dir.join(format!("{id}_{name}.vtk"));
        let mut out = BufWriter::new(File::create(&path)?);
        write_field_vtk(&sol, &format!("{id} {name}"), &mut out)?;
    }
    Ok(())
}

/// Runs every configured study on one scenario at each refinement level; the report rows
/// carry the finest level.
pub fn run_scenario(source: &ScenarioSource, cfg: &RunConfig, catalog: &MaterialCatalog) -> Result<ScenarioOutcome> {
    let scenario = source.load()?;
    let id = scenario.id.clone();
    if id.contains(['\n', '\r']) {
        return Err(Error::Config(format!("scenario id {id:?} contains a line break")));
    }
    let skin = if cfg.skin_effect {
        SkinModel::Annulus {
            frequency: scenario.rated.frequency,
        }
    } else {
        SkinModel::Uniform
    };
    let opts = MeshOptions {
        h: cfg.h_target,
        grading: cfg.grading,
        refinements: 0,
    };
    let mut study = Study::new(&scenario, catalog, opts)?;
    let r_ac = ac_resistance(&scenario, scenario.rated.frequency)?.total;
    let mut levels = Vec::new();
    let mut rows = Vec::new();
    let mut dielectric_failure = None;
    for level in 0..cfg.refinement_levels {
        if level > 0 {
            study = study.refined();
        }
        let mut q = Vec::new();
        let mut l_mag = None;
        let mut leak = None;
        let mut caps = Vec::new();
        let mut diel = None;
        if cfg.has(StudyKind::Magnetizing) {
            let l = magnetizing_inductance(&study)? * 1e6;
            q.push(("L_mag_uH".to_string(), l));
            l_mag = Some(l);
        }
        if cfg.has(StudyKind::Leakage) {
            let (l, peak, _) = short_circuit(&study, skin)?;
            q.push(("L_leak_uH".to_string(), l * 1e6));
            q.push(("peak_H_A_per_m".to_string(), peak.value));
            leak = Some((l * 1e6, peak.value));
        }
        if cfg.has(StudyKind::Capacitance) {
            for &m in &cfg.core_models {
                let c = winding_capacitance(&study, m)?.capacitance * 1e12;
                q.push((format!("C_ps_pF[{m}]"), c));
                caps.push((m, c));
            }
        }
        if cfg.has(StudyKind::Dielectric) {
            let d = dielectric_margin(&study, cfg.test_voltage)?;
            q.push(("peak_E_V_per_m".to_string(), d.peak_e()));
            diel = Some((d.peak_e(), d.passes()));
            dielectric_failure = if d.passes() {
                None
            } else {
                d.worst().map(|w| (w.material.clone(), w.margin))
            };
        }
        levels.push((study.mesh.elements.len(), Level { quantities: q }));
        if level + 1 == cfg.refinement_levels {
            let base = ReportRow {
                scenario: id.clone(),
                l_mag_uh: l_mag,
                l_leak_uh: leak.map(|x| x.0),
                r_ac_mohm: Some(r_ac * 1e3),
                c_ps_pf: None,
                core_model: String::new(),
                peak_h: leak.map(|x| x.1),
                peak_e: diel.map(|x| x.0),
                pass_dielectric: diel.map(|x| x.1),
            };
            if caps.is_empty() {
                rows.push(base);
            } else {
                for (m, c) in caps {
                    rows.push(ReportRow {
                        c_ps_pf: Some(c),
                        core_model: m.to_string(),
                        ..base.clone()
                    });
                }
            }
        }
    }
    if cfg.has(StudyKind::Fluxmap) {
        write_maps(&study, cfg, skin)?;
    }
    Ok(ScenarioOutcome {
        rows,
        convergence: record(&levels, &id),
        dielectric_failure,
    })
}

/// Runs all scenarios (concurrently, results kept in configuration order) and writes
/// `report.csv`, `convergence.csv` and `provenance.toml` into the output directory.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let catalog = cfg.catalog()?;
    fs::create_dir_all(&cfg.output_dir)?;
    let results = cfg
        .scenarios
        .par_iter()
        .map(|s| (s.label(), run_scenario(s, cfg, &catalog)))
        .collect();
    let outcome = RunOutcome { results };
    write_report(
        &outcome.rows(),
        BufWriter::new(File::create(cfg.output_dir.join("report.csv"))?),
    )?;
    write_convergence(
        &outcome.convergence(),
        BufWriter::new(File::create(cfg.output_dir.join("convergence.csv"))?),
    )?;
    fs::write(cfg.output_dir.join("provenance.toml"), provenance(cfg))?;
    Ok(outcome)
}

fn provenance(cfg: &RunConfig) -> String {
    let models: Vec<String> = cfg.core_models.iter().map(|m| format!("\"{m}\"")).collect();
    format!(
        "tool = \"{} {}\"\nh_target_mm = {}\ngrading = {}\nrefinement_levels = {}\nsolver_rel_tol = {}\ncore_models = [{}]\nskin_effect = {}\ntest_voltage_kV = {}\n",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION"),
        format_number(cfg.h_target * 1e3),
        format_number(cfg.grading),
        cfg.refinement_levels,
        format_number(DEFAULT_REL_TOL),
        models.join(", "),
        cfg.skin_effect,
        format_number(cfg.test_voltage / 1e3),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_validation() {
        let base = Path::new("/tmp/x");
        let c = RunConfig::from_toml_str(
            "scenarios = [\"EE_4LAYER\", \"EE_4LAYER:PSPSPSPS\", \"a.toml\"]\nstudies = [\"LEAKAGE\"]\n",
            base,
        )
        .unwrap();
        assert_eq!(c.h_target, 1e-3);
        assert_eq!(c.refinement_levels, 1);
        assert_eq!(c.core_models, vec![CoreModel::FloatingConductor]);
        assert_eq!(c.scenarios[0], ScenarioSource::Preset("EE_4LAYER".into()));
        assert_eq!(
            c.scenarios[1],
            ScenarioSource::Interleaved("EE_4LAYER".into(), "PSPSPSPS".into())
        );
        assert_eq!(c.scenarios[2], ScenarioSource::File("/tmp/x/a.toml".into()));
        assert_eq!(c.output_dir, PathBuf::from("/tmp/x/out"));
        for bad in [
            "scenarios = [\"EE_4LAYER\"]\nstudies = []\n",
            "scenarios = []\nstudies = [\"LEAKAGE\"]\n",
            "scenarios = [\"EE_4LAYER\"]\nstudies = [\"LEAKAGE\"]\nrefinement_levels = 0\n",
            "scenarios = [\"EE_4LAYER\"]\nstudies = [\"LEAKAGE\"]\nh_target = 1.0\n",
            "scenarios = [\"EE_4LAYER\"]\nstudies = [\"NOISE\"]\n",
        ] {
            assert!(RunConfig::from_toml_str(bad, base).is_err(), "{bad}");
        }
    }

    #[test]
    fn convergence_rows_carry_deltas() {
        let levels = vec![
            (
                10,
                Level {
                    quantities: vec![("a".into(), 1.0), ("b".into(), 5.0)],
                },
            ),
            (
                40,
                Level {
                    quantities: vec![("a".into(), 1.5), ("b".into(), 4.0)],
                },
            ),
        ];
        let rows = record(&levels, "S");
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].delta, None);
        assert_eq!(rows[1].delta, Some(0.5));
        assert_eq!(rows[3].quantity, "b");
        assert_eq!(rows[3].delta, Some(-1.0));
    }
}
