use std::sync::Arc;

use super::assemble::{assemble_magnetostatic, element_matrix, pattern, stiffness};
use super::solution::{FieldKind, FieldSolution};
use super::solver::solve_spd;
use super::system::LinearSystem;
use super::{ExcitationSpec, MagneticExcitation, DEFAULT_REL_TOL};
use crate::error::{Error, Result};
use crate::materials::{BHCurve, MaterialCatalog, Permeability};
use crate::mesh::Mesh;

const MAX_NEWTON: usize = 50;
const MAX_HALVINGS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    /// Relative nonlinear residual before each iteration, ending with the accepted value.
    pub residual_history: Vec<f64>,
}

/// Reluctivity ν = H/B and dν/d(B²) at flux density `b`.
fn reluctivity_and_derivative(curve: &BHCurve, b: f64) -> (f64, f64) {
    let (h0, slope0) = curve.h_of_b(0.0);
    debug_assert_eq!(h0, 0.0);
    if b <= 1e-12 {
        return (slope0, 0.0);
    }
    let (h, dh) = curve.h_of_b(b);
    let nu = h / b;
    (nu, (dh - nu) / (2.0 * b * b))
}

/// Damped Newton iteration on element reluctivities taken from B-H curves.
pub fn solve_nonlinear_magnetostatic(
    mesh: Arc<Mesh>,
    materials: &MaterialCatalog,
    excitation: &MagneticExcitation,
    newton_tol: f64,
) -> Result<FieldSolution> {
    if !(newton_tol > 0.0 && newton_tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "Newton tolerance {newton_tol} outside (0, 1)"
        )));
    }
    let mut curves: Vec<Option<&BHCurve>> = Vec::with_capacity(mesh.regions.len());
    for r in &mesh.regions {
        curves.push(match &materials.get(&r.material)?.permeability {
            Permeability::Curve(c) => Some(c),
            Permeability::Constant(_) => None,
        });
    }
    if curves.iter().all(Option::is_none) {
        return Err(Error::InvalidArgument("no region carries a B-H curve".into()));
    }
    let base = assemble_magnetostatic(&mesh, materials, excitation)?;
    if !base.has_reference() {
        return Err(Error::Singular(
            "no Dirichlet node fixes the potential reference".into(),
        ));
    }
    let map = base.dof_map();
    let (k0, f_r) = base.reduce(&map)?;
    let f_norm = f_r.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (x0, mut stats) = solve_spd(&k0, &f_r, DEFAULT_REL_TOL)?;
    let mut a = base.expand(&map, &x0);
    let n_el = mesh.elements.len();
    let curve_of = |e: usize| curves[mesh.element_region[e] as usize];

    let update = |a: &[f64], nu: &mut Vec<f64>, dnu: &mut Vec<f64>| {
        for e in 0..n_el {
            let Some(c) = curve_of(e) else { continue };
            let g = element_matrix(&mesh, e, FieldKind::Magnetostatic);
            let t = mesh.elements[e];
            let ae = [a[t[0] as usize], a[t[1] as usize], a[t[2] as usize]];
            let mut q = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    q += ae[i] * g[i][j] * ae[j];
                }
            }
            let b = (q.max(0.0) / mesh.element_measure(e)).sqrt();
            let (v, dv) = reluctivity_and_derivative(c, b);
            nu[e] = v;
            dnu[e] = dv;
        }
    };
    let residual = |a: &[f64], nu: &[f64]| -> (Vec<f64>, f64) {
        let k = stiffness(&mesh, nu, FieldKind::Magnetostatic);
        let ka = k.mul(a);
        let r: Vec<f64> = ka.iter().zip(&base.rhs).map(|(x, f)| x - f).collect();
        let rr = LinearSystem::reduce_vector(&map, &r);
        let norm = rr.iter().map(|x| x * x).sum::<f64>().sqrt();
        (r, if f_norm > 0.0 { norm / f_norm } else { norm })
    };

    let mut nu = base.coefficient.clone();
    let mut dnu = vec![0.0; n_el];
    update(&a, &mut nu, &mut dnu);
    let (mut r, mut rel) = residual(&a, &nu);
    let mut history = vec![rel];
    let mut iterations = 0;
    while rel > newton_tol {
        if iterations == MAX_NEWTON {
            return Err(Error::NewtonDiverged(history));
        }
        iterations += 1;
        let mut jac = pattern(&mesh);
        for (e, t) in mesh.elements.iter().enumerate() {
            let g = element_matrix(&mesh, e, FieldKind::Magnetostatic);
            let mut ga = [0.0; 3];
            if dnu[e] != 0.0 {
                for i in 0..3 {
                    for j in 0..3 {
                        ga[i] += g[i][j] * a[t[j] as usize];
                    }
                }
            }
            let s = 2.0 * dnu[e] / mesh.element_measure(e);
            for i in 0..3 {
                for j in 0..3 {
                    jac.add(t[i] as usize, t[j] as usize, nu[e] * g[i][j] + s * ga[i] * ga[j]);
                }
            }
        }
        let step_system = LinearSystem {
            kind: FieldKind::Magnetostatic,
            matrix: jac,
            rhs: r.iter().map(|x| -x).collect(),
            fixed: base.fixed.iter().map(|f| f.map(|_| 0.0)).collect(),
            ties: Vec::new(),
            coefficient: Vec::new(),
            source: Vec::new(),
        };
        let (j_r, rhs_r) = step_system.reduce(&map)?;
        let (dx, s) = solve_spd(&j_r, &rhs_r, DEFAULT_REL_TOL)?;
        stats = s;
        let delta = step_system.expand(&map, &dx);
        let mut alpha = 1.0;
        let mut accepted = None;
        let mut fallback = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = a.iter().zip(&delta).map(|(x, d)| x + alpha * d).collect();
            let mut nu_t = nu.clone();
            let mut dnu_t = dnu.clone();
            update(&trial, &mut nu_t, &mut dnu_t);
            let (r_t, rel_t) = residual(&trial, &nu_t);
            if rel_t < rel {
                accepted = Some((trial, nu_t, dnu_t, r_t, rel_t));
                break;
            }
            fallback = Some((trial, nu_t, dnu_t, r_t, rel_t));
            alpha *= 0.5;
        }
        let (ta, tn, td, tr, trel) = accepted.or(fallback).expect("at least one trial");
        a = ta;
        nu = tn;
        dnu = td;
        r = tr;
        rel = trel;
        history.push(rel);
        if !rel.is_finite() {
            return Err(Error::NewtonDiverged(history));
        }
    }
    Ok(FieldSolution {
        mesh: mesh.clone(),
        excitation: ExcitationSpec::Magnetostatic(excitation.clone()),
        dof: a,
        coefficient: nu,
        source: base.source,
        stats,
        newton: Some(NewtonReport {
            iterations,
            residual_history: history,
        }),
    })
}
