use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::csr::CsrMatrix;
use super::system::LinearSystem;
use super::{
    ConductorKey, ElectricExcitation, ExcitationSpec, FieldKind, MagneticExcitation, OuterBoundary, Potential,
    SkinModel,
};
use crate::analytic::skin_depth;
use crate::error::{Error, Result};
use crate::geometry::{AnalysisPlane, Point, RegionTag, Shape, Side};
use crate::materials::{MaterialCatalog, EPS0, MU0};
use crate::mesh::Mesh;

/// Shape-function gradients of one linear triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGradients {
    pub grad: [[f64; 2]; 3],
    pub area: f64,
}

pub fn element_gradients(mesh: &Mesh, e: usize) -> ElementGradients {
    let p = mesh.element_points(e);
    let area = mesh.element_area(e);
    let mut grad = [[0.0; 2]; 3];
    for i in 0..3 {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        grad[i] = [(p[j][1] - p[k][1]) / (2.0 * area), (p[k][0] - p[j][0]) / (2.0 * area)];
    }
    ElementGradients { grad, area }
}

/// Weight w with K_e = coefficient·w·∇φ_i·∇φ_j.
pub(crate) fn stiffness_weight(mesh: &Mesh, e: usize, kind: FieldKind) -> f64 {
    let a = mesh.element_area(e);
    match (mesh.plane, kind) {
        (AnalysisPlane::Planar { depth }, _) => depth * a,
        (AnalysisPlane::Axisymmetric, FieldKind::Magnetostatic) => 2.0 * PI * a / mesh.centroid(e)[0],
        (AnalysisPlane::Axisymmetric, FieldKind::Electrostatic) => 2.0 * PI * mesh.centroid(e)[0] * a,
    }
}

/// Coefficient-free element matrix.
pub(crate) fn element_matrix(mesh: &Mesh, e: usize, kind: FieldKind) -> [[f64; 3]; 3] {
    let g = element_gradients(mesh, e);
    let w = stiffness_weight(mesh, e, kind);
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = w * (g.grad[i][0] * g.grad[j][0] + g.grad[i][1] * g.grad[j][1]);
        }
    }
    k
}

pub(crate) fn check_elements(mesh: &Mesh) -> Result<()> {
    for e in 0..mesh.elements.len() {
        let a = mesh.element_area(e);
        let ok = a > 0.0
            && match mesh.plane {
                AnalysisPlane::Planar { depth } => depth > 0.0,
                AnalysisPlane::Axisymmetric => mesh.centroid(e)[0] > 0.0,
            };
        if !ok {
            let c = mesh.centroid(e);
            return Err(Error::InvalidGeometry(format!(
                "element {e} at ({:.6e}, {:.6e}) has zero or negative measure",
                c[0], c[1]
            )));
        }
    }
    Ok(())
}

/// Zero matrix over the node adjacency of the mesh.
pub(crate) fn pattern(mesh: &Mesh) -> CsrMatrix {
    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); mesh.nodes.len()];
    for t in &mesh.elements {
        for &a in t {
            rows[a as usize].extend_from_slice(t);
        }
    }
    for r in &mut rows {
        r.sort_unstable();
        r.dedup();
    }
    CsrMatrix::from_pattern(rows)
}

pub(crate) fn stiffness(mesh: &Mesh, coefficient: &[f64], kind: FieldKind) -> CsrMatrix {
    let mut k = pattern(mesh);
    for (e, t) in mesh.elements.iter().enumerate() {
        let ke = element_matrix(mesh, e, kind);
        for i in 0..3 {
            for j in 0..3 {
                k.add(t[i] as usize, t[j] as usize, coefficient[e] * ke[i][j]);
            }
        }
    }
    k
}

/// Linear reluctivity per element.
pub(crate) fn reluctivity(mesh: &Mesh, materials: &MaterialCatalog) -> Result<Vec<f64>> {
    let mut by_region = Vec::with_capacity(mesh.regions.len());
    for r in &mesh.regions {
        let mu_r = materials.get(&r.material)?.permeability.mu_r_linear()?;
        by_region.push(1.0 / (MU0 * mu_r));
    }
    Ok(mesh.element_region.iter().map(|&r| by_region[r as usize]).collect())
}

pub(crate) fn permittivity(mesh: &Mesh, materials: &MaterialCatalog) -> Result<Vec<f64>> {
    let mut by_region = Vec::with_capacity(mesh.regions.len());
    for r in &mesh.regions {
        by_region.push(EPS0 * materials.get(&r.material)?.epsilon_r);
    }
    Ok(mesh.element_region.iter().map(|&r| by_region[r as usize]).collect())
}

/// Centroids of the 16 sub-triangles from two levels of midpoint splitting.
fn sample_points(p: [Point; 3]) -> Vec<Point> {
    fn split(p: [Point; 3], depth: u32, out: &mut Vec<Point>) {
        if depth == 0 {
            out.push([(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0]);
            return;
        }
        let m = |a: Point, b: Point| [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
        let (m01, m12, m20) = (m(p[0], p[1]), m(p[1], p[2]), m(p[2], p[0]));
        split([p[0], m01, m20], depth - 1, out);
        split([m01, p[1], m12], depth - 1, out);
        split([m20, m12, p[2]], depth - 1, out);
        split([m01, m12, m20], depth - 1, out);
    }
    let mut out = Vec::with_capacity(16);
    split(p, 2, &mut out);
    out
}

/// Current density per element (A/m²).
pub(crate) fn current_density(mesh: &Mesh, materials: &MaterialCatalog, exc: &MagneticExcitation) -> Result<Vec<f64>> {
    for v in exc
        .winding_current
        .iter()
        .chain(exc.electrode_current.iter().map(|e| &e.1))
    {
        if !v.is_finite() {
            return Err(Error::InvalidExcitation("non-finite current".into()));
        }
    }
    let mut region_current = vec![0.0; mesh.regions.len()];
    let mut seen_electrodes = Vec::new();
    for (ri, r) in mesh.regions.iter().enumerate() {
        region_current[ri] = match r.tag {
            RegionTag::Turn(t) => {
                let i = exc.winding_current[t.role.index()];
                match t.side {
                    Side::Go => i,
                    Side::Return => -i,
                }
            }
            RegionTag::Electrode(k) => {
                seen_electrodes.push(k);
                exc.electrode_current.iter().filter(|e| e.0 == k).map(|e| e.1).sum()
            }
            _ => 0.0,
        };
    }
    for (k, _) in &exc.electrode_current {
        if !seen_electrodes.contains(k) {
            return Err(Error::InvalidExcitation(format!("electrode {k} is not in the mesh")));
        }
    }
    let mut weight = vec![0.0; mesh.elements.len()];
    let mut region_weighted_area = vec![0.0; mesh.regions.len()];
    for e in 0..mesh.elements.len() {
        let ri = mesh.element_region[e] as usize;
        if region_current[ri] == 0.0 {
            continue;
        }
        let info = &mesh.regions[ri];
        let mut w = 1.0;
        if let (SkinModel::Annulus { frequency }, Shape::Circle { center, radius }, true) =
            (exc.skin, &info.shape, info.tag.is_turn())
        {
            if !(frequency > 0.0) {
                return Err(Error::InvalidExcitation("skin model needs a positive frequency".into()));
            }
            let delta = skin_depth(materials.get(&info.material)?.resistivity, frequency);
            if delta < *radius {
                let inner = radius - delta;
                let pts = sample_points(mesh.element_points(e));
                let inside = pts
                    .iter()
                    .filter(|p| (p[0] - center[0]).hypot(p[1] - center[1]) >= inner)
                    .count();
                w = inside as f64 / pts.len() as f64;
            }
        }
        weight[e] = w;
        region_weighted_area[ri] += w * mesh.element_area(e);
    }
    // a mesh too coarse to resolve the annulus falls back to uniform density
    for ri in 0..mesh.regions.len() {
        if region_current[ri] != 0.0 && region_weighted_area[ri] <= 0.0 {
            for e in 0..mesh.elements.len() {
                if mesh.element_region[e] as usize == ri {
                    weight[e] = 1.0;
                    region_weighted_area[ri] += mesh.element_area(e);
                }
            }
        }
    }
    Ok((0..mesh.elements.len())
        .map(|e| {
            let ri = mesh.element_region[e] as usize;
            if region_current[ri] == 0.0 {
                0.0
            } else {
                region_current[ri] * weight[e] / region_weighted_area[ri]
            }
        })
        .collect())
}

fn axis_nodes(mesh: &Mesh) -> Vec<u32> {
    let extent = mesh.nodes.iter().fold(0.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs()));
    let tol = 1e-12 * extent.max(1e-300);
    (0..mesh.nodes.len() as u32)
        .filter(|&n| mesh.nodes[n as usize][0] <= tol)
        .collect()
}

pub fn assemble_magnetostatic(
    mesh: &Mesh,
    materials: &MaterialCatalog,
    exc: &MagneticExcitation,
) -> Result<LinearSystem> {
    assemble_magnetostatic_with(mesh, materials, exc, None)
}

/// Assembly with optional per-element reluctivity overriding the linear material values.
pub(crate) fn assemble_magnetostatic_with(
    mesh: &Mesh,
    materials: &MaterialCatalog,
    exc: &MagneticExcitation,
    nu: Option<Vec<f64>>,
) -> Result<LinearSystem> {
    check_elements(mesh)?;
    let nu = match nu {
        Some(v) => v,
        None => reluctivity(mesh, materials)?,
    };
    let source = current_density(mesh, materials, exc)?;
    let matrix = stiffness(mesh, &nu, FieldKind::Magnetostatic);
    let mut rhs = vec![0.0; mesh.nodes.len()];
    for (e, t) in mesh.elements.iter().enumerate() {
        if source[e] == 0.0 {
            continue;
        }
        let a = mesh.element_area(e);
        let w = match mesh.plane {
            AnalysisPlane::Planar { depth } => depth * a,
            AnalysisPlane::Axisymmetric => 2.0 * PI * a,
        };
        for &n in t {
            rhs[n as usize] += source[e] * w / 3.0;
        }
    }
    let mut fixed = vec![None; mesh.nodes.len()];
    if exc.outer == OuterBoundary::Dirichlet {
        for n in mesh.outer_nodes() {
            fixed[n as usize] = Some(0.0);
        }
    }
    if mesh.plane == AnalysisPlane::Axisymmetric {
        for n in axis_nodes(mesh) {
            fixed[n as usize] = Some(0.0);
        }
    }
    Ok(LinearSystem {
        kind: FieldKind::Magnetostatic,
        matrix,
        rhs,
        fixed,
        ties: Vec::new(),
        coefficient: nu,
        source,
    })
}

/// Node sets of every conductor present in the mesh, keyed for the given excitation.
fn conductor_nodes(mesh: &Mesh, exc: &ElectricExcitation) -> Result<BTreeMap<ConductorKey, Vec<u32>>> {
    let mut present: BTreeMap<ConductorKey, ()> = BTreeMap::new();
    for r in &mesh.regions {
        match r.tag {
            RegionTag::Turn(t) => {
                present.insert(ConductorKey::Winding(t.role), ());
            }
            RegionTag::Electrode(k) => {
                present.insert(ConductorKey::Electrode(k), ());
            }
            RegionTag::Core => {
                present.insert(ConductorKey::Core, ());
            }
            _ => {}
        }
    }
    let mut listed = BTreeMap::new();
    for (key, p) in &exc.conductors {
        if listed.insert(*key, *p).is_some() {
            return Err(Error::InvalidExcitation(format!("{key} assigned more than once")));
        }
        if !present.contains_key(key) {
            return Err(Error::InvalidExcitation(format!("{key} is not in the mesh")));
        }
        if let Potential::Fixed(v) = p {
            if !v.is_finite() {
                return Err(Error::InvalidExcitation(format!("{key} has a non-finite potential")));
            }
        }
    }
    for key in present.keys() {
        if *key != ConductorKey::Core && !listed.contains_key(key) {
            return Err(Error::InvalidExcitation(format!("{key} has no potential assignment")));
        }
    }
    let mut out = BTreeMap::new();
    for key in listed.keys() {
        out.insert(*key, mesh.nodes_where(|t| key.matches(t)));
    }
    Ok(out)
}

pub fn assemble_electrostatic(
    mesh: &Mesh,
    materials: &MaterialCatalog,
    exc: &ElectricExcitation,
) -> Result<LinearSystem> {
    check_elements(mesh)?;
    let eps = permittivity(mesh, materials)?;
    let matrix = stiffness(mesh, &eps, FieldKind::Electrostatic);
    let n = mesh.nodes.len();
    let mut system = LinearSystem {
        kind: FieldKind::Electrostatic,
        matrix,
        rhs: vec![0.0; n],
        fixed: vec![None; n],
        ties: Vec::new(),
        coefficient: eps,
        source: vec![0.0; mesh.elements.len()],
    };
    if exc.outer == OuterBoundary::Dirichlet {
        for v in mesh.outer_nodes() {
            system.fixed[v as usize] = Some(0.0);
        }
    }
    let sets = conductor_nodes(mesh, exc)?;
    let mut owner: Vec<Option<ConductorKey>> = vec![None; n];
    for (key, nodes) in &sets {
        for &v in nodes {
            if let Some(other) = owner[v as usize] {
                return Err(Error::InvalidExcitation(format!("{other} and {key} touch")));
            }
            owner[v as usize] = Some(*key);
        }
    }
    for (key, nodes) in &sets {
        if let Some(Potential::Fixed(v)) = exc.potential(*key) {
            for &node in nodes {
                system.fixed[node as usize] = Some(v);
            }
        }
    }
    for (key, nodes) in &sets {
        if exc.potential(*key) == Some(Potential::Floating) {
            system.tie(nodes.clone()).map_err(|e| match e {
                Error::InvalidExcitation(m) => Error::InvalidExcitation(format!("{key}: {m}")),
                other => other,
            })?;
        }
    }
    Ok(system)
}

pub fn assemble(mesh: &Mesh, materials: &MaterialCatalog, exc: &ExcitationSpec) -> Result<LinearSystem> {
    match exc {
        ExcitationSpec::Magnetostatic(m) => assemble_magnetostatic(mesh, materials, m),
        ExcitationSpec::Electrostatic(e) => assemble_electrostatic(mesh, materials, e),
    }
}
