use std::f64::consts::PI;
use std::sync::Arc;

use xfmr_fem::extraction::{
    ac_resistance, dielectric_margin, electric_energy, flux_linkage, magnetic_energy, magnetizing_inductance,
    margins_from, peak_field, short_circuit, winding_capacitance, winding_capacitance_driven, window_mmf, CoreModel,
    MeshOptions, Study,
};
use xfmr_fem::fem::{
    solve_linear, ConductorKey, ElectricExcitation, ExcitationSpec, FieldSolution, MagneticExcitation, OuterBoundary,
    Potential, SkinModel, SolveStats,
};
use xfmr_fem::fixtures::{coaxial_sheets, parallel_plates, slot, SlotSpec};
use xfmr_fem::geometry::{
    build_preset, build_preset_with_arrangement, AnalysisPlane, Arrangement, RegionTag, Role, Scenario, Shape,
};
use xfmr_fem::materials::{Material, MaterialCatalog, MU0};
use xfmr_fem::mesh::{triangulate, Mesh, RegionInfo};
use xfmr_fem::Error;

const TOL: f64 = 1e-10;
const PRESET_OPTS: MeshOptions = MeshOptions {
    h: 2e-3,
    grading: 1.3,
    refinements: 0,
};

fn catalog() -> MaterialCatalog {
    let mut c = MaterialCatalog::builtin();
    c.insert(Material::magnetic("mu75", 75.0)).unwrap();
    c.insert(Material::magnetic("mu150", 150.0)).unwrap();
    c.insert(Material::magnetic("mu1000", 1000.0)).unwrap();
    c.insert(Material::insulator("eps4", 4.0, 1e8)).unwrap();
    c
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn study(s: &Scenario) -> Study {
    Study::new(s, &catalog(), PRESET_OPTS).unwrap()
}

fn ee() -> Study {
    study(&build_preset("EE_4LAYER").unwrap())
}

fn solve(m: &Arc<Mesh>, exc: ExcitationSpec) -> FieldSolution {
    solve_linear(m.clone(), &catalog(), &exc, TOL).unwrap()
}

fn slot_spec(arr: &str, gap: f64) -> SlotSpec {
    SlotSpec {
        arrangement: arr.parse::<Arrangement>().unwrap(),
        window: [0.03, 0.06],
        strip: 0.002,
        gap,
        margin: 0.002,
        frame: 0.01,
        air: 0.02,
        depth: 0.1,
        core_material: "mu1000".into(),
        conductor_material: "copper".into(),
    }
}

#[test]
fn solenoid_energy_matches_closed_form() {
    // Opposed coaxial current sheets with natural ends behave as an infinitely long pair:
    // uniform B = µ0·I/ℓ in the gap, ramping linearly to zero across each sheet.
    let (a, b, s, len, outer, i) = (0.010, 0.020, 0.001, 0.010, 0.030, 50.0);
    let layout = coaxial_sheets(a, b, s, len, outer, "copper").unwrap();
    let m = Arc::new(triangulate(&layout, 2.5e-4, 1.3).unwrap());
    let exc = MagneticExcitation {
        winding_current: [0.0; 2],
        electrode_current: vec![(0, i), (1, -i)],
        skin: SkinModel::Uniform,
        outer: OuterBoundary::Natural,
    };
    let e = magnetic_energy(&solve(&m, ExcitationSpec::Magnetostatic(exc))).unwrap();
    let b0 = MU0 * i / len;
    let inner = (a - s) * s / 3.0 + s * s / 4.0;
    let outer_ramp = b * s / 3.0 + s * s / 12.0;
    let radial = (b * b - a * a) / 2.0 + inner + outer_ramp;
    let exact = b0 * b0 / (2.0 * MU0) * 2.0 * PI * len * radial;
    assert!(rel(e, exact) < 0.01, "{e} vs {exact}");
}

#[test]
fn uniform_field_single_element_energy() {
    // A = y on a triangle of area ½ and depth 2: B = 1 T over 1 m³.
    let info = RegionInfo {
        tag: RegionTag::Air,
        material: "air".into(),
        exact_area: 0.5,
        shape: Shape::rect(0.0, 0.0, 1.0, 1.0),
    };
    let mut mesh = Mesh {
        plane: AnalysisPlane::Planar { depth: 2.0 },
        nodes: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        elements: vec![[0, 1, 2]],
        element_region: vec![0],
        regions: vec![info],
        boundary_edges: Vec::new(),
    };
    mesh.compute_boundary_edges();
    let sol = FieldSolution {
        mesh: Arc::new(mesh),
        excitation: ExcitationSpec::Magnetostatic(MagneticExcitation::windings(0.0, 0.0)),
        dof: vec![0.0, 0.0, 1.0],
        coefficient: vec![1.0 / MU0],
        source: vec![0.0],
        stats: SolveStats {
            iterations: 0,
            relative_residual: 0.0,
        },
        newton: None,
    };
    let e = magnetic_energy(&sol).unwrap();
    assert!(rel(e, 1.0 / (2.0 * MU0)) < 1e-14, "{e}");
    assert!(rel(e, 3.9789e5) < 1e-4);
    // Every element ties on a uniform field; the lowest index wins.
    assert_eq!(peak_field(&sol, |_| true).unwrap().element, 0);
    assert!(matches!(peak_field(&sol, |_| false), Err(Error::EmptySelection(_))));
    assert!(matches!(electric_energy(&sol), Err(Error::WrongKind(_))));
}

#[test]
fn zero_excitation_stores_no_energy() {
    let m = Arc::new(triangulate(&slot(&slot_spec("PS", 0.002)).unwrap(), 4e-3, 1.3).unwrap());
    let sol = solve(
        &m,
        ExcitationSpec::Magnetostatic(MagneticExcitation::windings(0.0, 0.0)),
    );
    assert_eq!(magnetic_energy(&sol).unwrap(), 0.0);
}

#[test]
fn energy_and_flux_linkage_inductances_agree() {
    let st = ee();
    let i = st.scenario.rated.current();
    let sol = st
        .solve(&ExcitationSpec::Magnetostatic(MagneticExcitation::windings(i, 0.0)))
        .unwrap();
    let by_energy = 2.0 * magnetic_energy(&sol).unwrap() / (i * i);
    let by_linkage = flux_linkage(&sol, Role::Primary).unwrap() / i;
    assert!(rel(by_energy, by_linkage) < 0.005, "{by_energy} vs {by_linkage}");
    assert!(rel(magnetizing_inductance(&st).unwrap(), by_energy) < 1e-12);
}

#[test]
fn leakage_is_current_independent() {
    let base = build_preset("EE_4LAYER").unwrap();
    let mut doubled = base.clone();
    doubled.rated.power *= 2.0;
    let st = study(&base);
    let st2 = Study {
        scenario: doubled,
        ..st.clone()
    };
    let (l1, p1, i1) = short_circuit(&st, SkinModel::Uniform).unwrap();
    let (l2, p2, i2) = short_circuit(&st2, SkinModel::Uniform).unwrap();
    assert_eq!(i2, 2.0 * i1);
    assert!(rel(l2, l1) < 1e-6, "{l1} {l2}");
    assert!(rel(p2.value, 2.0 * p1.value) < 1e-6);
}

#[test]
fn leakage_falls_as_windings_close_up() {
    let cat = catalog();
    let mut last = f64::INFINITY;
    for gap in [0.008, 0.004, 0.002, 0.001] {
        let m = Arc::new(triangulate(&slot(&slot_spec("PS", gap)).unwrap(), 2e-3, 1.3).unwrap());
        let sol = solve_linear(
            m,
            &cat,
            &ExcitationSpec::Magnetostatic(MagneticExcitation::windings(10.0, -10.0)),
            TOL,
        )
        .unwrap();
        let l = 2.0 * magnetic_energy(&sol).unwrap() / 100.0;
        assert!(l < last, "gap {gap}: {l} not below {last}");
        last = l;
    }
}

#[test]
fn mmf_steps_by_strip_current_and_returns_to_zero() {
    let spec = slot_spec("PPSS", 0.002);
    let layout = slot(&spec).unwrap();
    let [lo, hi] = layout.window.unwrap();
    let m = Arc::new(triangulate(&layout, 1e-3, 1.3).unwrap());
    let i = 10.0;
    let sol = solve(&m, ExcitationSpec::Magnetostatic(MagneticExcitation::windings(i, -i)));

    let at = |x: f64| window_mmf(&sol, [[x - 1e-5, lo[1]], [x + 1e-5, hi[1]]], 2).unwrap()[0].1;
    let before = at(lo[0] + spec.margin / 2.0);
    let after = at(lo[0] + spec.margin + spec.strip + spec.gap / 2.0);
    assert!(rel(after - before, i) < 0.03, "step {}", after - before);

    let traverse = window_mmf(&sol, [lo, hi], 200).unwrap();
    let peak = traverse.iter().fold(0.0f64, |p, s| p.max(s.1.abs()));
    assert!(rel(peak, 2.0 * i) < 0.03, "peak {peak}");
    for end in [traverse[0].1, traverse[199].1] {
        assert!(end.abs() <= 0.03 * peak, "end {end} of peak {peak}");
    }
}

#[test]
fn capacitance_is_reciprocal() {
    let st = ee();
    for model in [CoreModel::FloatingConductor, CoreModel::Dielectric] {
        let p = winding_capacitance_driven(&st, model, Role::Primary, 1.0).unwrap();
        let s = winding_capacitance_driven(&st, model, Role::Secondary, 1.0).unwrap();
        assert!(
            rel(p.capacitance, s.capacitance) < 1e-8,
            "{model}: {} vs {}",
            p.capacitance,
            s.capacitance
        );
    }
}

#[test]
fn capacitance_energy_is_quadratic_in_voltage() {
    let st = ee();
    let one = winding_capacitance_driven(&st, CoreModel::Dielectric, Role::Primary, 1.0).unwrap();
    let two = winding_capacitance_driven(&st, CoreModel::Dielectric, Role::Primary, 2.0).unwrap();
    assert!(rel(two.electric_energy, 4.0 * one.electric_energy) < 1e-12);
    assert!(rel(two.capacitance, one.capacitance) < 1e-12);
    assert!(winding_capacitance_driven(&st, CoreModel::Dielectric, Role::Primary, 0.0).is_err());
}

#[test]
fn peak_field_sits_in_the_low_permittivity_gap() {
    // 1 mm air over 1 mm εr = 4 at 1 kV: E_air = V / (d_air + d_slab/4).
    let layout = parallel_plates(0.02, 0.1, 0.001, "copper", &[(0.001, "air"), (0.001, "eps4")]).unwrap();
    let m = Arc::new(triangulate(&layout, 2.5e-4, 1.3).unwrap());
    let exc = ElectricExcitation {
        conductors: vec![
            (ConductorKey::Electrode(0), Potential::Fixed(0.0)),
            (ConductorKey::Electrode(1), Potential::Fixed(1000.0)),
        ],
        outer: OuterBoundary::Natural,
    };
    let sol = solve(&m, ExcitationSpec::Electrostatic(exc));
    let peak = peak_field(&sol, |_| true).unwrap();
    let expected = 1000.0 / (0.001 + 0.001 / 4.0);
    assert!(rel(peak.value, expected) < 0.02, "{} vs {expected}", peak.value);
    assert_eq!(sol.mesh.element_material(peak.element), "air");
}

#[test]
fn air_gap_overstress_is_flagged() {
    let layout = parallel_plates(0.02, 0.1, 0.001, "copper", &[(0.001, "air")]).unwrap();
    let m = Arc::new(triangulate(&layout, 5e-4, 1.3).unwrap());
    let exc = ElectricExcitation {
        conductors: vec![
            (ConductorKey::Electrode(0), Potential::Fixed(0.0)),
            (ConductorKey::Electrode(1), Potential::Fixed(5000.0)),
        ],
        outer: OuterBoundary::Natural,
    };
    let report = margins_from(&solve(&m, ExcitationSpec::Electrostatic(exc)), &catalog(), 5000.0).unwrap();
    let air = report.worst().unwrap();
    assert_eq!(air.material, "air");
    assert!(rel(air.margin, 0.6) < 1e-9, "{}", air.margin);
    assert!(!report.passes());
}

#[test]
fn dielectric_margins_scale_with_test_voltage() {
    let st = ee();
    let a = dielectric_margin(&st, 10e3).unwrap();
    let b = dielectric_margin(&st, 20e3).unwrap();
    assert_eq!(a.materials.len(), b.materials.len());
    for (x, y) in a.materials.iter().zip(&b.materials) {
        assert_eq!(x.material, y.material);
        assert!(rel(y.peak_e, 2.0 * x.peak_e) < 1e-9);
        assert!(rel(y.margin, x.margin / 2.0) < 1e-9);
    }
    assert!(a.passes());
    assert!(dielectric_margin(&st, 0.0).is_err());
}

#[test]
fn ac_resistance_rises_from_dc() {
    let s = build_preset("EE_4LAYER").unwrap();
    let low = ac_resistance(&s, 1e-3).unwrap();
    for k in 0..2 {
        assert!(rel(low.ac[k], low.dc[k]) < 1e-9);
    }
    let mut last = 0.0;
    for f in [1e2, 1e3, 1e4, 1e5, 1e6] {
        let r = ac_resistance(&s, f).unwrap().total;
        assert!(r > last, "{f} Hz: {r}");
        last = r;
    }
    assert!(ac_resistance(&s, 0.0).is_err());
}

#[test]
fn interleaving_lowers_ac_resistance() {
    let grouped = ac_resistance(&build_preset("EE_4LAYER").unwrap(), 1e4).unwrap().total;
    let mixed = ac_resistance(&build_preset_with_arrangement("EE_4LAYER", "PSPSPSPS").unwrap(), 1e4)
        .unwrap()
        .total;
    assert!(grouped > mixed, "{grouped} vs {mixed}");
}

#[test]
fn doubling_core_permeability_less_than_doubles_inductance() {
    let mut s = build_preset("EE_4LAYER").unwrap();
    s.core_material = "mu75".into();
    let l1 = magnetizing_inductance(&study(&s)).unwrap();
    s.core_material = "mu150".into();
    let l2 = magnetizing_inductance(&study(&s)).unwrap();
    let gain = l2 / l1;
    assert!(gain > 1.0 && gain <= 2.0, "{gain}");
}

#[test]
fn floating_and_dielectric_cores_differ_for_split_windings() {
    let st = study(&build_preset("TOROID_3LAYER_CASE1").unwrap());
    let floating = winding_capacitance(&st, CoreModel::FloatingConductor)
        .unwrap()
        .capacitance;
    let dielectric = winding_capacitance(&st, CoreModel::Dielectric).unwrap().capacitance;
    assert!(floating > dielectric, "{floating} vs {dielectric}");
}
