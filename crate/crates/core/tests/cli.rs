use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use xfmr_fem::cli::{read_report, CONVERGENCE_HEADER, REPORT_HEADER};
use xfmr_fem::geometry::preset_ids;

/// Refinement level, element count, value, change from the previous level.
type LevelEntry = (u32, usize, f64, Option<f64>);

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_xfmr-fem"))
}

fn run_config(dir: &Path, name: &str, body: &str) -> Output {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    bin().arg("run").arg(&path).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn presets_lists_every_structure() {
    let o = bin().arg("presets").output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let ids: Vec<&str> = text.lines().map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(ids, preset_ids());
}

#[test]
fn run_then_compare_with_itself() {
    let dir = TempDir::new().unwrap();
    let o = run_config(
        dir.path(),
        "run.toml",
        r#"
scenarios = ["TOROID_1LAYER_CASE1", "EE_4LAYER:PSPSPSPS"]
studies = ["LEAKAGE", "MAGNETIZING", "CAPACITANCE"]
h_target_mm = 3.0
core_models = ["FLOATING", "DIELECTRIC"]
output_dir = "out"
"#,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = dir.path().join("out/report.csv");
    let text = fs::read_to_string(&report).unwrap();
    assert_eq!(text.lines().next().unwrap(), REPORT_HEADER.join(","));
    let rows = read_report(text.as_bytes()).unwrap();
    let keys: Vec<(&str, &str)> = rows
        .iter()
        .map(|r| (r.scenario.as_str(), r.core_model.as_str()))
        .collect();
    assert_eq!(
        keys,
        [
            ("TOROID_1LAYER_CASE1", "FLOATING"),
            ("TOROID_1LAYER_CASE1", "DIELECTRIC"),
            ("EE_4LAYER_PSPSPSPS", "FLOATING"),
            ("EE_4LAYER_PSPSPSPS", "DIELECTRIC"),
        ]
    );
    for r in &rows {
        assert!(r.l_leak_uh.unwrap() > 0.0 && r.l_mag_uh.unwrap() > r.l_leak_uh.unwrap());
        assert!(r.c_ps_pf.unwrap() > 0.0);
        assert!(r.peak_e.is_none() && r.pass_dielectric.is_none());
    }
    assert!(dir.path().join("out/convergence.csv").exists());
    assert!(fs::read_to_string(dir.path().join("out/provenance.toml"))
        .unwrap()
        .contains("h_target"));

    let cmp = bin().arg("compare").arg(&report).arg(&report).output().unwrap();
    assert!(cmp.status.success(), "{}", stderr(&cmp));
    let text = String::from_utf8(cmp.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let ratio_cols: Vec<usize> = (0..header.len()).filter(|&k| header[k].ends_with("_ratio")).collect();
    assert_eq!(ratio_cols.len(), 6);
    let mut checked = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        for &k in &ratio_cols {
            if !f[k].is_empty() {
                assert_eq!(f[k], "1", "{}", header[k]);
                checked += 1;
            }
        }
    }
    assert!(checked >= 4 * 4);
}

#[test]
fn compare_lists_missing_keys() {
    let dir = TempDir::new().unwrap();
    let header = REPORT_HEADER.join(",");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    fs::write(
        &a,
        format!("{header}\nX,1,2,3,4,FLOATING,5,6,true\nY,1,2,3,4,FLOATING,5,6,true\n"),
    )
    .unwrap();
    fs::write(
        &b,
        format!("{header}\nX,1,2,3,4,FLOATING,5,6,true\nZ,1,2,3,4,FLOATING,5,6,true\n"),
    )
    .unwrap();
    let o = bin().arg("compare").arg(&a).arg(&b).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr(&o);
    assert!(msg.contains("Y/FLOATING") && msg.contains("Z/FLOATING"), "{msg}");

    let o = bin().arg("compare").arg(&a).arg(&b).arg("--by-order").output().unwrap();
    assert!(o.status.success());

    fs::write(&b, "scenario,other\n").unwrap();
    let o = bin().arg("compare").arg(&a).arg(&b).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("header"));
}

#[test]
fn bad_configs_are_rejected_at_load() {
    let dir = TempDir::new().unwrap();
    for (body, needle) in [
        ("scenarios = [\"EE_4LAYER\"]\nstudies = []\n", "no studies"),
        ("scenarios = []\nstudies = [\"LEAKAGE\"]\n", "no scenarios"),
        (
            "scenarios = [\"EE_4LAYER\"]\nstudies = [\"LEAKAGE\"]\nrefinement_levels = 0\n",
            "refinement_levels",
        ),
        (
            "scenarios = [\"EE_4LAYER\"]\nstudies = [\"LEAKAGE\"]\nh_target = 1.0\n",
            "h_target",
        ),
        ("scenarios = [\"EE_4LAYER\"]\nstudies = [\"NOISE\"]\n", "NOISE"),
        (
            "scenarios = [\"EE_4LAYER\"]\nstudies = [\"CAPACITANCE\"]\ncore_models = [\"WET\"]\n",
            "WET",
        ),
    ] {
        let o = run_config(dir.path(), "bad.toml", body);
        assert_eq!(o.status.code(), Some(1), "{body}");
        assert!(stderr(&o).contains(needle), "{body}: {}", stderr(&o));
        assert!(!dir.path().join("out").exists());
    }
}

#[test]
fn failing_scenario_does_not_stop_the_batch() {
    let dir = TempDir::new().unwrap();
    let o = run_config(
        dir.path(),
        "run.toml",
        "scenarios = [\"missing.toml\", \"UU_4LAYER\"]\nstudies = [\"LEAKAGE\"]\nh_target_mm = 3.0\n",
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.toml"), "{}", stderr(&o));
    let rows = read_report(fs::File::open(dir.path().join("out/report.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].scenario, "UU_4LAYER");
}

#[test]
fn three_refinement_levels_give_three_entries_per_quantity() {
    let dir = TempDir::new().unwrap();
    let o = run_config(
        dir.path(),
        "conv.toml",
        "scenarios = [\"TOROID_1LAYER_CASE2\"]\nstudies = [\"LEAKAGE\", \"CAPACITANCE\"]\nh_target_mm = 4.0\nrefinement_levels = 3\n",
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("out/convergence.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CONVERGENCE_HEADER.join(","));
    let mut by_quantity: BTreeMap<String, Vec<LevelEntry>> = BTreeMap::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0], "TOROID_1LAYER_CASE2");
        by_quantity.entry(f[3].to_string()).or_default().push((
            f[1].parse().unwrap(),
            f[2].parse().unwrap(),
            f[4].parse().unwrap(),
            (!f[5].is_empty()).then(|| f[5].parse().unwrap()),
        ));
    }
    assert!(by_quantity.contains_key("L_leak_uH") && by_quantity.contains_key("C_ps_pF[FLOATING]"));
    for (q, entries) in &by_quantity {
        assert_eq!(entries.len(), 3, "{q}");
        assert_eq!(entries.iter().map(|e| e.0).collect::<Vec<_>>(), [0, 1, 2], "{q}");
        assert_eq!(entries[1].1, 4 * entries[0].1);
        assert_eq!(entries[2].1, 16 * entries[0].1);
        assert!(entries[0].3.is_none());
        let d1 = entries[1].3.unwrap();
        let d2 = entries[2].3.unwrap();
        assert_eq!(d1, entries[1].2 - entries[0].2);
        if q != "peak_H_A_per_m" {
            assert!(d2.abs() < d1.abs(), "{q}: deltas {d1} then {d2}");
        }
    }
}

#[test]
fn runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let body = "scenarios = [\"EE_4LAYER\", \"TOROID_3LAYER_CASE2\"]\nstudies = [\"LEAKAGE\", \"DIELECTRIC\"]\nh_target_mm = 3.0\n";
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("out{k}"));
        let path = dir.path().join("run.toml");
        fs::write(&path, body).unwrap();
        let o = bin().arg("run").arg(&path).arg("--out").arg(&out).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        outputs.push((
            fs::read(out.join("report.csv")).unwrap(),
            fs::read(out.join("convergence.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn fluxmap_writes_three_maps_per_scenario() {
    let dir = TempDir::new().unwrap();
    let o = run_config(
        dir.path(),
        "maps.toml",
        "scenarios = [\"UU_4LAYER\"]\nstudies = [\"FLUXMAP\"]\nh_target_mm = 4.0\noutput_dir = \"maps\"\n",
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for name in ["fullload", "shortcircuit", "dielectric"] {
        let text = fs::read_to_string(dir.path().join(format!("maps/UU_4LAYER_{name}.vtk"))).unwrap();
        assert!(text.starts_with("# vtk DataFile Version"), "{name}");
        assert!(text.contains("CELL_DATA"), "{name}");
    }
}

#[test]
fn export_mesh_writes_vtk() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("mesh.vtk");
    let o = bin()
        .args(["export-mesh", "TOROID_1LAYER_CASE1"])
        .arg(&out)
        .args(["--h-mm", "4"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# vtk DataFile Version"));
    assert!(text.contains("POINTS") && text.contains("CELL_TYPES"));

    let o = bin()
        .args(["export-mesh", "NO_SUCH_PRESET"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
