//! C ABI over the xfmr-fem library.
//!
//! Objects cross the boundary as opaque handles created by `xf_*_new`-style functions and
//! released with the matching `xf_*_free`. Every fallible call returns an [`XfStatus`]; on
//! failure the message is kept per thread and read with [`xf_last_error_message`]. Results are
//! written through out-pointers only on success. Strings in are NUL-terminated UTF-8.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use xfmr_fem::analytic;
use xfmr_fem::extraction::{self, CoreModel, MeshOptions, Study};
use xfmr_fem::fem::SkinModel;
use xfmr_fem::geometry::{self, Role, Scenario};
use xfmr_fem::materials::{self, LossConstants, MaterialCatalog};
use xfmr_fem::mesh::write_vtk;
use xfmr_fem::Error;

/// Outcome of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XfStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Out-of-range number, unknown name or malformed input text.
    InvalidArgument = 3,
    /// The geometry is inconsistent or the windings do not fit.
    Geometry = 4,
    /// Mesh generation failed.
    Mesh = 5,
    /// The linear or nonlinear solve failed.
    Solver = 6,
    /// Reading or writing a file failed.
    Io = 7,
    /// A material record is invalid or missing.
    Material = 8,
    /// The library panicked; the handle arguments should be considered unusable.
    Panic = 9,
}

/// How the core enters the capacitance solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XfCoreModel {
    Floating = 0,
    Dielectric = 1,
    Grounded = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XfRole {
    Primary = 0,
    Secondary = 1,
}

/// Material catalog.
pub struct XfCatalog(MaterialCatalog);

/// Transformer scenario: core, windings, arrangement and rating.
pub struct XfScenario(Scenario);

/// A meshed scenario with its materials, ready for extraction.
pub struct XfStudy(Study);

/// Dielectric check summary.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XfDielectricResult {
    /// V/m over all insulating materials.
    pub peak_e: f64,
    /// Smallest strength/peak ratio.
    pub min_margin: f64,
    /// 1 when every margin exceeds 1.
    pub passes: c_int,
}

/// Leakage study summary.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XfLeakageResult {
    /// H, primary-referred.
    pub leakage_inductance: f64,
    /// A/m over the winding window.
    pub peak_h: f64,
    /// Primary current used (A).
    pub current: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> XfStatus {
    match e {
        Error::InvalidArgument(_)
        | Error::UnknownPreset(_)
        | Error::InvalidArrangement(_)
        | Error::InvalidExcitation(_)
        | Error::WrongKind(_)
        | Error::EmptySelection(_)
        | Error::PathOutsideDomain(..)
        | Error::Config(_)
        | Error::Parse(_) => XfStatus::InvalidArgument,
        Error::InvalidGeometry(_) | Error::DoesNotFit { .. } => XfStatus::Geometry,
        Error::Mesh(_) | Error::FeatureTooSmall { .. } => XfStatus::Mesh,
        Error::Singular(_) | Error::Indefinite(_) | Error::NotConverged { .. } | Error::NewtonDiverged(_) => {
            XfStatus::Solver
        }
        Error::Io(_) => XfStatus::Io,
        Error::InvalidCurve(_) | Error::InvalidMaterial { .. } | Error::UnknownMaterial(_) => XfStatus::Material,
    }
}

enum Fail {
    Null(&'static str),
    Utf8(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

type Res<T> = Result<T, Fail>;

/// Runs `body`, turning errors and panics into a status and the thread's last message.
fn guard(body: impl FnOnce() -> Res<()>) -> XfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            XfStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            XfStatus::NullPointer
        }
        Ok(Err(Fail::Utf8(what))) => {
            set_error(&format!("{what} is not valid UTF-8"));
            XfStatus::InvalidUtf8
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            XfStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Res<&'a str> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Utf8(what))
}

unsafe fn href<'a, T>(p: *const T, what: &'static str) -> Res<&'a T> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn put<T>(out: *mut T, v: T, what: &'static str) -> Res<()> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn check_out<T>(out: *mut T, what: &'static str) -> Res<()> {
    if out.is_null() {
        Err(Fail::Null(what))
    } else {
        Ok(())
    }
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn role(r: XfRole) -> Role {
    match r {
        XfRole::Primary => Role::Primary,
        XfRole::Secondary => Role::Secondary,
    }
}

fn core_model(m: XfCoreModel) -> CoreModel {
    match m {
        XfCoreModel::Floating => CoreModel::FloatingConductor,
        XfCoreModel::Dielectric => CoreModel::Dielectric,
        XfCoreModel::Grounded => CoreModel::Grounded,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn xf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a successful call. The pointer
/// stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn xf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Copies the last error message into `buf` (always NUL-terminated when `len > 0`) and
/// returns the buffer size the full message needs, terminator included.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn xf_last_error_copy(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len) - 1;
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Number of built-in presets.
#[no_mangle]
pub extern "C" fn xf_preset_count() -> usize {
    geometry::PRESETS.len()
}

/// Static NUL-terminated id of preset `index`, or null when out of range.
#[no_mangle]
pub extern "C" fn xf_preset_id(index: usize) -> *const c_char {
    const IDS: [&CStr; 6] = [
        c"TOROID_3LAYER_CASE1",
        c"TOROID_3LAYER_CASE2",
        c"TOROID_1LAYER_CASE1",
        c"TOROID_1LAYER_CASE2",
        c"UU_4LAYER",
        c"EE_4LAYER",
    ];
    IDS.get(index).map_or(ptr::null(), |s| s.as_ptr())
}

/// Built-in materials (air, varnish, bobbin plastic, copper, iron powder, ferrite).
///
/// # Safety
/// `out` must be a valid pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn xf_catalog_builtin(out: *mut *mut XfCatalog) -> XfStatus {
    guard(|| put(out, boxed(XfCatalog(MaterialCatalog::builtin())), "out"))
}

/// Built-in materials with the records of a TOML catalog merged over them.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xf_catalog_from_toml(toml: *const c_char, out: *mut *mut XfCatalog) -> XfStatus {
    guard(|| {
        let t = text(toml, "toml")?;
        check_out(out, "out")?;
        let mut c = MaterialCatalog::builtin();
        c.merge(MaterialCatalog::from_toml_str(t)?);
        put(out, boxed(XfCatalog(c)), "out")
    })
}

/// # Safety
/// `catalog` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn xf_catalog_free(catalog: *mut XfCatalog) {
    free(catalog)
}

/// Builds a preset scenario by id.
///
/// # Safety
/// `id` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xf_scenario_preset(id: *const c_char, out: *mut *mut XfScenario) -> XfStatus {
    guard(|| {
        let id = text(id, "id")?;
        check_out(out, "out")?;
        put(out, boxed(XfScenario(geometry::build_preset(id)?)), "out")
    })
}

/// Builds a preset with its layer order replaced, e.g. `"PSPSPSPS"`.
///
/// # Safety
/// `id` and `arrangement` must be NUL-terminated strings; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xf_scenario_preset_arranged(
    id: *const c_char,
    arrangement: *const c_char,
    out: *mut *mut XfScenario,
) -> XfStatus {
    guard(|| {
        let id = text(id, "id")?;
        let arr = text(arrangement, "arrangement")?;
        check_out(out, "out")?;
        put(
            out,
            boxed(XfScenario(geometry::build_preset_with_arrangement(id, arr)?)),
            "out",
        )
    })
}

/// Parses a scenario document.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xf_scenario_from_toml(toml: *const c_char, out: *mut *mut XfScenario) -> XfStatus {
    guard(|| {
        let t = text(toml, "toml")?;
        check_out(out, "out")?;
        put(out, boxed(XfScenario(Scenario::from_toml_str(t)?)), "out")
    })
}

/// Turn count of one winding.
///
/// # Safety
/// `scenario` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xf_scenario_turns(scenario: *const XfScenario, which: XfRole, out: *mut u32) -> XfStatus {
    guard(|| {
        let s = href(scenario, "scenario")?;
        put(out, s.0.winding(role(which)).turns, "out")
    })
}

/// Rated primary current, power over voltage (A).
///
/// # Safety
/// `scenario` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xf_scenario_rated_current(scenario: *const XfScenario, out: *mut f64) -> XfStatus {
    guard(|| {
        let s = href(scenario, "scenario")?;
        put(out, s.0.rated.current(), "out")
    })
}

/// Dowell AC resistance referred to the primary at `frequency` Hz (Ω).
///
/// # Safety
/// `scenario` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xf_scenario_ac_resistance(
    scenario: *const XfScenario,
    frequency: f64,
    out: *mut f64,
) -> XfStatus {
    guard(|| {
        let s = href(scenario, "scenario")?;
        check_out(out, "out")?;
        put(out, extraction::ac_resistance(&s.0, frequency)?.total, "out")
    })
}

/// # Safety
/// `scenario` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn xf_scenario_free(scenario: *mut XfScenario) {
    free(scenario)
}

/// Lays out and meshes `scenario` with target size `h` (m), size growth `grading` (≥ 1) and
/// `refinements` uniform refinements. The study keeps its own copies of both inputs.
///
/// # Safety
/// `scenario` and `catalog` must be live handles; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xf_study_new(
    scenario: *const XfScenario,
    catalog: *const XfCatalog,
    h: f64,
    grading: f64,
    refinements: u32,
    out: *mut *mut XfStudy,
) -> XfStatus {
    guard(|| {
        let s = href(scenario, "scenario")?;
        let c = href(catalog, "catalog")?;
        check_out(out, "out")?;
        let opts = MeshOptions {
            h,
            grading,
            refinements,
        };
        put(out, boxed(XfStudy(Study::new(&s.0, &c.0, opts)?)), "out")
    })
}

/// A new study on the uniformly refined mesh.
///
/// # Safety
/// `study` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xf_study_refined(study: *const XfStudy, out: *mut *mut XfStudy) -> XfStatus {
    guard(|| {
        let st = href(study, "study")?;
        put(out, boxed(XfStudy(st.0.refined())), "out")
    })
}

/// Node and element counts of the study mesh.
///
/// # Safety
/// `study` must be a live handle; `nodes` and `elements` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn xf_study_mesh_size(
    study: *const XfStudy,
    nodes: *mut usize,
    elements: *mut usize,
) -> XfStatus {
    guard(|| {
        let st = href(study, "study")?;
        check_out(nodes, "nodes")?;
        check_out(elements, "elements")?;
        put(nodes, st.0.mesh.nodes.len(), "nodes")?;
        put(elements, st.0.mesh.elements.len(), "elements")
    })
}

/// Writes the study mesh as legacy VTK with region codes.
///
/// # Safety
/// `study` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn xf_study_export_mesh(study: *const XfStudy, path: *const c_char) -> XfStatus {
    guard(|| {
        let st = href(study, "study")?;
        let p = text(path, "path")?;
        let mut w = BufWriter::new(File::create(p).map_err(Error::from)?);
        write_vtk(&st.0.mesh, &st.0.scenario.id, &[], &[], &mut w)?;
        w.flush().map_err(Error::from)?;
        Ok(())
    })
}

/// Primary at rated current, secondary open: L = 2E/I² (H).
///
/// # Safety
/// `study` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xf_magnetizing_inductance(study: *const XfStudy, out: *mut f64) -> XfStatus {
    guard(|| {
        let st = href(study, "study")?;
        check_out(out, "out")?;
        put(out, extraction::magnetizing_inductance(&st.0)?, "out")
    })
}

/// Short-circuit leakage at rated current. `skin_frequency` > 0 confines turn currents to one
/// skin depth at that frequency (Hz); 0 spreads them uniformly.
///
/// # Safety
/// `study` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xf_leakage_inductance(
    study: *const XfStudy,
    skin_frequency: f64,
    out: *mut XfLeakageResult,
) -> XfStatus {
    guard(|| {
        let st = href(study, "study")?;
        check_out(out, "out")?;
        let skin = if skin_frequency > 0.0 {
            SkinModel::Annulus {
                frequency: skin_frequency,
            }
        } else if skin_frequency == 0.0 {
            SkinModel::Uniform
        } else {
            return Err(Error::InvalidArgument(format!("skin frequency {skin_frequency} is negative")).into());
        };
        let (l, peak, current) = extraction::short_circuit(&st.0, skin)?;
        put(
            out,
            XfLeakageResult {
                leakage_inductance: l,
                peak_h: peak.value,
                current,
            },
            "out",
        )
    })
}

/// `volts` on `driven`, the other winding at 0 V: C = 2E/V² (F).
///
/// # Safety
/// `study` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xf_winding_capacitance(
    study: *const XfStudy,
    model: XfCoreModel,
    driven: XfRole,
    volts: f64,
    out: *mut f64,
) -> XfStatus {
    guard(|| {
        let st = href(study, "study")?;
        check_out(out, "out")?;
        let c = extraction::winding_capacitance_driven(&st.0, core_model(model), role(driven), volts)?;
        put(out, c.capacitance, "out")
    })
}

/// Primary at `test_voltage`, secondary and core grounded; margins per insulating material.
///
/// # Safety
/// `study` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xf_dielectric_margin(
    study: *const XfStudy,
    test_voltage: f64,
    out: *mut XfDielectricResult,
) -> XfStatus {
    guard(|| {
        let st = href(study, "study")?;
        check_out(out, "out")?;
        let r = extraction::dielectric_margin(&st.0, test_voltage)?;
        let min_margin = r.worst().map_or(f64::INFINITY, |m| m.margin);
        put(
            out,
            XfDielectricResult {
                peak_e: r.peak_e(),
                min_margin,
                passes: c_int::from(r.passes()),
            },
            "out",
        )
    })
}

/// # Safety
/// `study` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn xf_study_free(study: *mut XfStudy) {
    free(study)
}

/// Core loss density (W/kg) from the four fit constants, peak flux density `b` (T), frequency
/// `f` (Hz) and duty cycle in (0, 1).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xf_core_loss_density(
    a: f64,
    b_const: f64,
    c: f64,
    d: f64,
    b: f64,
    f: f64,
    duty: f64,
    out: *mut f64,
) -> XfStatus {
    guard(|| {
        check_out(out, "out")?;
        let k = LossConstants::new(a, b_const, c, d)?;
        put(out, materials::core_loss_density(&k, b, f, duty)?, "out")
    })
}

/// Dowell AC resistance (Ω) for `layers` layers per portion.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xf_dowell_ac_resistance(
    r_dc: f64,
    layers: f64,
    thickness: f64,
    porosity: f64,
    f: f64,
    resistivity: f64,
    out: *mut f64,
) -> XfStatus {
    guard(|| {
        check_out(out, "out")?;
        put(
            out,
            analytic::dowell_ac_resistance(r_dc, layers, thickness, porosity, f, resistivity)?,
            "out",
        )
    })
}
