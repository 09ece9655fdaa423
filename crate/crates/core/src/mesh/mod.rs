//! Conforming triangulation of tagged layouts, uniform refinement, quality statistics and
//! legacy VTK export.

mod triangulate;
pub mod vtk;

use std::collections::HashMap;

use crate::geometry::{AnalysisPlane, Point, RegionTag, Shape};

pub use triangulate::triangulate;
pub use vtk::write_vtk;

/// Region data carried by a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionInfo {
    pub tag: RegionTag,
    pub material: String,
    /// Area of the exact (unpolygonized) region.
    pub exact_area: f64,
    /// Exact outer shape.
    pub shape: Shape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeTag {
    Outer,
    ConductorSurface(RegionTag),
    CoreSurface,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub nodes: [u32; 2],
    pub tag: EdgeTag,
}

/// Linear triangle mesh. In axisymmetric meshes x is r and y is z.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub plane: AnalysisPlane,
    pub nodes: Vec<Point>,
    /// Counterclockwise node triples.
    pub elements: Vec<[u32; 3]>,
    /// Index into `regions` per element.
    pub element_region: Vec<u32>,
    pub regions: Vec<RegionInfo>,
    pub boundary_edges: Vec<BoundaryEdge>,
}

impl Mesh {
    pub fn element_points(&self, e: usize) -> [Point; 3] {
        let t = self.elements[e];
        [
            self.nodes[t[0] as usize],
            self.nodes[t[1] as usize],
            self.nodes[t[2] as usize],
        ]
    }

    /// Signed area, positive for counterclockwise.
    pub fn element_area(&self, e: usize) -> f64 {
        let [a, b, c] = self.element_points(e);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn centroid(&self, e: usize) -> Point {
        let [a, b, c] = self.element_points(e);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn element_tag(&self, e: usize) -> RegionTag {
        self.regions[self.element_region[e] as usize].tag
    }

    pub fn element_material(&self, e: usize) -> &str {
        &self.regions[self.element_region[e] as usize].material
    }

    /// Length of the longest edge.
    pub fn element_diameter(&self, e: usize) -> f64 {
        let [a, b, c] = self.element_points(e);
        let d = |p: Point, q: Point| (p[0] - q[0]).hypot(p[1] - q[1]);
        d(a, b).max(d(b, c)).max(d(c, a))
    }

    /// Area × depth (planar) or 2π·r̄·area (axisymmetric).
    pub fn element_measure(&self, e: usize) -> f64 {
        let a = self.element_area(e);
        match self.plane {
            AnalysisPlane::Planar { depth } => a * depth,
            AnalysisPlane::Axisymmetric => 2.0 * std::f64::consts::PI * self.centroid(e)[0] * a,
        }
    }

    /// Sorted, deduplicated nodes of every element whose tag satisfies `pred`.
    pub fn nodes_where(&self, mut pred: impl FnMut(&RegionTag) -> bool) -> Vec<u32> {
        let mut mark = vec![false; self.nodes.len()];
        for (e, t) in self.elements.iter().enumerate() {
            if pred(&self.element_tag(e)) {
                for &n in t {
                    mark[n as usize] = true;
                }
            }
        }
        (0..self.nodes.len() as u32).filter(|&n| mark[n as usize]).collect()
    }

    /// Summed element area per region index.
    pub fn region_areas(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.regions.len()];
        for e in 0..self.elements.len() {
            out[self.element_region[e] as usize] += self.element_area(e);
        }
        out
    }

    /// Element counts per region index.
    pub fn region_element_counts(&self) -> Vec<usize> {
        let mut out = vec![0; self.regions.len()];
        for &r in &self.element_region {
            out[r as usize] += 1;
        }
        out
    }

    /// Rebuilds boundary-edge tags from element adjacency.
    pub fn compute_boundary_edges(&mut self) {
        let mut map: HashMap<(u32, u32), (usize, Option<usize>)> = HashMap::new();
        let mut order = Vec::new();
        for (e, t) in self.elements.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                match map.get_mut(&key) {
                    Some(v) => v.1 = Some(e),
                    None => {
                        map.insert(key, (e, None));
                        order.push((key, [a, b]));
                    }
                }
            }
        }
        let mut out = Vec::new();
        for (key, nodes) in order {
            let (e0, e1) = map[&key];
            let tag = match e1 {
                None => Some(EdgeTag::Outer),
                Some(e1) => {
                    let (t0, t1) = (self.element_tag(e0), self.element_tag(e1));
                    let cond = |t: &RegionTag| matches!(t, RegionTag::Turn(_) | RegionTag::Electrode(_));
                    if t0 == t1 {
                        None
                    } else if cond(&t0) {
                        Some(EdgeTag::ConductorSurface(t0))
                    } else if cond(&t1) {
                        Some(EdgeTag::ConductorSurface(t1))
                    } else if t0 == RegionTag::Core || t1 == RegionTag::Core {
                        Some(EdgeTag::CoreSurface)
                    } else {
                        None
                    }
                }
            };
            if let Some(tag) = tag {
                out.push(BoundaryEdge { nodes, tag });
            }
        }
        self.boundary_edges = out;
    }

    /// Nodes on the outer boundary.
    pub fn outer_nodes(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self
            .boundary_edges
            .iter()
            .filter(|e| e.tag == EdgeTag::Outer)
            .flat_map(|e| e.nodes)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Uniform refinement: every triangle splits into four similar ones through its edge midpoints.
pub fn refine(mesh: &Mesh) -> Mesh {
    let mut nodes = mesh.nodes.clone();
    let mut mid: HashMap<(u32, u32), u32> = HashMap::new();
    let mut midpoint = |a: u32, b: u32, nodes: &mut Vec<Point>| -> u32 {
        let key = (a.min(b), a.max(b));
        *mid.entry(key).or_insert_with(|| {
            let (p, q) = (nodes[key.0 as usize], nodes[key.1 as usize]);
            nodes.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
            (nodes.len() - 1) as u32
        })
    };
    let mut elements = Vec::with_capacity(4 * mesh.elements.len());
    let mut element_region = Vec::with_capacity(4 * mesh.elements.len());
    for (e, &[a, b, c]) in mesh.elements.iter().enumerate() {
        let ab = midpoint(a, b, &mut nodes);
        let bc = midpoint(b, c, &mut nodes);
        let ca = midpoint(c, a, &mut nodes);
        elements.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        element_region.extend_from_slice(&[mesh.element_region[e]; 4]);
    }
    let mut boundary_edges = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for be in &mesh.boundary_edges {
        let [a, b] = be.nodes;
        let m = midpoint(a, b, &mut nodes);
        boundary_edges.push(BoundaryEdge {
            nodes: [a, m],
            tag: be.tag,
        });
        boundary_edges.push(BoundaryEdge {
            nodes: [m, b],
            tag: be.tag,
        });
    }
    Mesh {
        plane: mesh.plane,
        nodes,
        elements,
        element_region,
        regions: mesh.regions.clone(),
        boundary_edges,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshQuality {
    /// Degrees.
    pub min_angle: f64,
    /// Longest element edge per region index.
    pub max_diameter_per_region: Vec<f64>,
    pub element_count: usize,
    pub node_count: usize,
}

/// Smallest interior angle of a triangle in degrees.
pub fn triangle_min_angle(p: [Point; 3]) -> f64 {
    let mut best = f64::INFINITY;
    for k in 0..3 {
        let a = p[k];
        let b = p[(k + 1) % 3];
        let c = p[(k + 2) % 3];
        let u = [b[0] - a[0], b[1] - a[1]];
        let v = [c[0] - a[0], c[1] - a[1]];
        let cross = (u[0] * v[1] - u[1] * v[0]).abs();
        let dot = u[0] * v[0] + u[1] * v[1];
        best = best.min(cross.atan2(dot).to_degrees());
    }
    best
}

pub fn mesh_quality(mesh: &Mesh) -> MeshQuality {
    let mut min_angle = f64::INFINITY;
    let mut maxd = vec![0.0f64; mesh.regions.len()];
    for e in 0..mesh.elements.len() {
        min_angle = min_angle.min(triangle_min_angle(mesh.element_points(e)));
        let r = mesh.element_region[e] as usize;
        maxd[r] = maxd[r].max(mesh.element_diameter(e));
    }
    MeshQuality {
        min_angle,
        max_diameter_per_region: maxd,
        element_count: mesh.elements.len(),
        node_count: mesh.nodes.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(p: [Point; 3]) -> Mesh {
        let mut m = Mesh {
            plane: AnalysisPlane::Planar { depth: 1.0 },
            nodes: p.to_vec(),
            elements: vec![[0, 1, 2]],
            element_region: vec![0],
            regions: vec![RegionInfo {
                tag: RegionTag::Air,
                material: "air".into(),
                exact_area: 0.0,
                shape: Shape::Polygon(p.to_vec()),
            }],
            boundary_edges: Vec::new(),
        };
        m.compute_boundary_edges();
        m
    }

    #[test]
    fn quality_of_reference_triangles() {
        let s3 = 3f64.sqrt();
        let eq = single([[0.0, 0.0], [1.0, 0.0], [0.5, 0.5 * s3]]);
        assert!((mesh_quality(&eq).min_angle - 60.0).abs() < 1e-12);
        let right = single([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!((mesh_quality(&right).min_angle - 45.0).abs() < 1e-12);
        assert_eq!(right.boundary_edges.len(), 3);
    }

    #[test]
    fn refinement_counts_and_angles() {
        let m = single([[0.0, 0.0], [1.0, 0.0], [0.2, 0.7]]);
        let r1 = refine(&m);
        let r2 = refine(&r1);
        assert_eq!(r1.elements.len(), 4);
        assert_eq!(r2.elements.len(), 16);
        let q0 = mesh_quality(&m).min_angle;
        assert!((mesh_quality(&r2).min_angle - q0).abs() < 1e-9);
        for e in 0..r2.elements.len() {
            assert!(r2.element_area(e) > 0.0);
        }
        let total: f64 = (0..r2.elements.len()).map(|e| r2.element_area(e)).sum();
        assert!((total - m.element_area(0)).abs() < 1e-15);
        assert_eq!(r2.boundary_edges.len(), 12);
    }
}
