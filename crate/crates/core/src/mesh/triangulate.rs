//! Constrained Delaunay meshing with graded sizing and region tagging.

use std::collections::HashMap;

use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use super::{Mesh, RegionInfo};
use crate::error::{Error, Result};
use crate::geometry::{dist, point_in_polygon, point_segment_distance, points_bbox, Layout, Point, Zone};

type Cdt = ConstrainedDelaunayTriangulation<Point2<f64>>;

const MIN_ANGLE_DEG: f64 = 20.0;
const MAX_SIZING_ROUNDS: usize = 60;

struct PolyRegion {
    outer: Vec<Point>,
    outer_box: [Point; 2],
    holes: Vec<(Vec<Point>, [Point; 2])>,
}

fn in_box(p: Point, b: &[Point; 2]) -> bool {
    p[0] >= b[0][0] && p[0] <= b[1][0] && p[1] >= b[0][1] && p[1] <= b[1][1]
}

impl PolyRegion {
    fn contains(&self, p: Point) -> bool {
        in_box(p, &self.outer_box)
            && point_in_polygon(p, &self.outer)
            && !self.holes.iter().any(|(h, b)| in_box(p, b) && point_in_polygon(p, h))
    }
}

/// Uniform bucket grid over bounding boxes.
struct BoxGrid {
    lo: Point,
    cell: [f64; 2],
    n: usize,
    cells: Vec<Vec<u32>>,
}

impl BoxGrid {
    fn new(domain: [Point; 2], n: usize) -> Self {
        let cell = [
            (domain[1][0] - domain[0][0]) / n as f64,
            (domain[1][1] - domain[0][1]) / n as f64,
        ];
        Self {
            lo: domain[0],
            cell,
            n,
            cells: vec![Vec::new(); n * n],
        }
    }

    fn index(&self, v: f64, k: usize) -> usize {
        (((v - self.lo[k]) / self.cell[k]).floor().max(0.0) as usize).min(self.n - 1)
    }

    fn insert(&mut self, id: u32, b: [Point; 2]) {
        let (i0, i1) = (self.index(b[0][0], 0), self.index(b[1][0], 0));
        let (j0, j1) = (self.index(b[0][1], 1), self.index(b[1][1], 1));
        for j in j0..=j1 {
            for i in i0..=i1 {
                self.cells[j * self.n + i].push(id);
            }
        }
    }

    fn at(&self, p: Point) -> &[u32] {
        &self.cells[self.index(p[1], 1) * self.n + self.index(p[0], 0)]
    }

    /// Ids in all cells overlapping the square of half-width `r` around `p`.
    fn around(&self, p: Point, r: f64, out: &mut Vec<u32>) {
        out.clear();
        let (i0, i1) = (self.index(p[0] - r, 0), self.index(p[0] + r, 0));
        let (j0, j1) = (self.index(p[1] - r, 1), self.index(p[1] + r, 1));
        for j in j0..=j1 {
            for i in i0..=i1 {
                out.extend_from_slice(&self.cells[j * self.n + i]);
            }
        }
        out.sort_unstable();
        out.dedup();
    }
}

fn key(p: Point) -> (u64, u64) {
    // fold -0.0 into 0.0
    ((p[0] + 0.0).to_bits(), (p[1] + 0.0).to_bits())
}

/// Meshes `layout` with element size `h` inside its fine zones (everywhere when it has none),
/// growing by `grading − 1` per unit distance away from them.
pub fn triangulate(layout: &Layout, h: f64, grading: f64) -> Result<Mesh> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("mesh size {h} must be positive")));
    }
    if !(grading >= 1.0 && grading.is_finite()) {
        return Err(Error::InvalidArgument(format!("grading {grading} must be at least 1")));
    }
    let sag = (0.25 * h).min(layout.curve_tolerance);
    let domain = layout.domain;
    let extent = (domain[1][0] - domain[0][0]).max(domain[1][1] - domain[0][1]);

    let mut polys = Vec::with_capacity(layout.regions.len());
    for r in &layout.regions {
        let outer = r.shape.mesh_outline(sag);
        let outer_box = points_bbox(&outer);
        if outer_box[0][0] < domain[0][0] - 1e-12 * extent
            || outer_box[0][1] < domain[0][1] - 1e-12 * extent
            || outer_box[1][0] > domain[1][0] + 1e-12 * extent
            || outer_box[1][1] > domain[1][1] + 1e-12 * extent
        {
            return Err(Error::InvalidGeometry(format!(
                "region {} extends outside the domain",
                r.tag
            )));
        }
        let holes = r
            .holes
            .iter()
            .map(|h| {
                let o = h.mesh_outline(sag);
                let b = points_bbox(&o);
                (o, b)
            })
            .collect();
        polys.push(PolyRegion {
            outer,
            outer_box,
            holes,
        });
    }

    // planar straight-line graph
    let mut vid: HashMap<(u64, u64), usize> = HashMap::new();
    let mut verts: Vec<Point> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut edge_seen: HashMap<(usize, usize), ()> = HashMap::new();
    let mut add_loop = |lp: &[Point], verts: &mut Vec<Point>, edges: &mut Vec<(usize, usize)>| {
        let ids: Vec<usize> = lp
            .iter()
            .map(|&p| {
                *vid.entry(key(p)).or_insert_with(|| {
                    verts.push(p);
                    verts.len() - 1
                })
            })
            .collect();
        for k in 0..ids.len() {
            let (a, b) = (ids[k], ids[(k + 1) % ids.len()]);
            if a != b && edge_seen.insert((a.min(b), a.max(b)), ()).is_none() {
                edges.push((a, b));
            }
        }
    };
    let [lo, hi] = domain;
    add_loop(&[lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]], &mut verts, &mut edges);
    for p in &polys {
        add_loop(&p.outer, &mut verts, &mut edges);
        for (hl, _) in &p.holes {
            add_loop(hl, &mut verts, &mut edges);
        }
    }

    // segment index for feature checks and lattice seeding
    let grid_n = 256;
    let seg_grid = {
        let mut g = BoxGrid::new(domain, grid_n);
        for (i, &(a, b)) in edges.iter().enumerate() {
            g.insert(i as u32, points_bbox(&[verts[a], verts[b]]));
        }
        g
    };
    // split edges at vertices lying on them (T-junctions between adjacent regions)
    let tiny = 1e-9 * extent;
    let mut buf = Vec::new();
    let mut on_edge: Vec<Vec<(f64, usize)>> = vec![Vec::new(); edges.len()];
    for (vi, &p) in verts.iter().enumerate() {
        seg_grid.around(p, tiny, &mut buf);
        for &s in &buf {
            let (a, b) = edges[s as usize];
            if a == vi || b == vi {
                continue;
            }
            let (pa, pb) = (verts[a], verts[b]);
            let close = dist(p, pa).min(dist(p, pb));
            if close < tiny {
                return Err(Error::FeatureTooSmall {
                    feature: format!("two boundary vertices near ({:.6e}, {:.6e})", p[0], p[1]),
                    required_h: close,
                });
            }
            if point_segment_distance(p, pa, pb) < tiny {
                let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
                let t = ((p[0] - pa[0]) * dx + (p[1] - pa[1]) * dy) / (dx * dx + dy * dy);
                if t > 0.0 && t < 1.0 {
                    on_edge[s as usize].push((t, vi));
                }
            }
        }
    }
    let mut split_edges = Vec::with_capacity(edges.len());
    for (k, &(a, b)) in edges.iter().enumerate() {
        let mut mids = std::mem::take(&mut on_edge[k]);
        if mids.is_empty() {
            split_edges.push((a, b));
            continue;
        }
        mids.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut prev = a;
        for (_, v) in mids {
            split_edges.push((prev, v));
            prev = v;
        }
        split_edges.push((prev, b));
    }
    let mut seen = HashMap::new();
    split_edges.retain(|&(a, b)| a != b && seen.insert((a.min(b), a.max(b)), ()).is_none());
    let edges = split_edges;
    let mut seg_grid = BoxGrid::new(domain, grid_n);
    for (i, &(a, b)) in edges.iter().enumerate() {
        seg_grid.insert(i as u32, points_bbox(&[verts[a], verts[b]]));
    }

    let mut cdt = Cdt::new();
    let mut handles = Vec::with_capacity(verts.len());
    for p in &verts {
        handles.push(
            cdt.insert(Point2::new(p[0], p[1]))
                .map_err(|e| Error::Mesh(format!("{e:?}")))?,
        );
    }
    for &(a, b) in &edges {
        if handles[a] == handles[b] {
            continue;
        }
        if cdt.try_add_constraint(handles[a], handles[b]).is_empty() && !cdt.exists_constraint(handles[a], handles[b]) {
            let (p, q) = (verts[a], verts[b]);
            return Err(Error::Mesh(format!(
                "boundary segment ({:.6e}, {:.6e})-({:.6e}, {:.6e}) crosses another boundary",
                p[0], p[1], q[0], q[1]
            )));
        }
    }

    // fine-zone lattice
    let zones = &layout.fine_zones;
    let spacing = 0.8 * h;
    let mut seeds = Vec::new();
    for z in zones {
        let b = match z {
            Zone::Rect(b) => *b,
            Zone::Annulus { center, r_outer, .. } => [
                [center[0] - r_outer, center[1] - r_outer],
                [center[0] + r_outer, center[1] + r_outer],
            ],
        };
        let dy = spacing * 3f64.sqrt() / 2.0;
        let ny = ((b[1][1] - b[0][1]) / dy).floor() as i64;
        let nx = ((b[1][0] - b[0][0]) / spacing).floor() as i64;
        for j in 0..=ny {
            let y = b[0][1] + j as f64 * dy;
            let shift = if j % 2 == 1 { 0.5 * spacing } else { 0.0 };
            for i in 0..=nx {
                let x = b[0][0] + i as f64 * spacing + shift;
                let p = [x, y];
                if !z.contains(p) || !in_box(p, &domain) {
                    continue;
                }
                seg_grid.around(p, 0.4 * h, &mut buf);
                let near = buf.iter().any(|&s| {
                    let (a, c) = edges[s as usize];
                    point_segment_distance(p, verts[a], verts[c]) < 0.4 * h
                });
                if !near {
                    seeds.push(p);
                }
            }
        }
    }
    for p in seeds {
        cdt.insert(Point2::new(p[0], p[1]))
            .map_err(|e| Error::Mesh(format!("{e:?}")))?;
    }

    let size_at = |p: Point| -> f64 {
        if zones.is_empty() {
            return h;
        }
        let d = zones.iter().map(|z| z.distance(p)).fold(f64::INFINITY, f64::min);
        h + (grading - 1.0) * d
    };
    let params = || {
        RefinementParameters::<f64>::new()
            .with_angle_limit(AngleLimit::from_deg(MIN_ANGLE_DEG))
            .with_min_required_area(1e-8 * h * h)
            .with_max_additional_vertices(50_000_000)
    };
    let mut converged = false;
    for _ in 0..MAX_SIZING_ROUNDS {
        cdt.refine(params());
        let mut pending = Vec::new();
        for f in cdt.inner_faces() {
            let v = f.vertices();
            let p: [Point; 3] = std::array::from_fn(|k| {
                let q = v[k].position();
                [q.x, q.y]
            });
            let c = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
            let d = (0..3)
                .map(|k| {
                    let (a, b) = (p[k], p[(k + 1) % 3]);
                    (a[0] - b[0]).hypot(a[1] - b[1])
                })
                .fold(0.0, f64::max);
            if d > size_at(c) {
                pending.push(c);
            }
        }
        if pending.is_empty() {
            converged = true;
            break;
        }
        for c in pending {
            cdt.insert(Point2::new(c[0], c[1]))
                .map_err(|e| Error::Mesh(format!("{e:?}")))?;
        }
    }
    if !converged {
        return Err(Error::Mesh("size refinement did not converge".into()));
    }

    // extract
    let nodes: Vec<Point> = cdt
        .vertices()
        .map(|v| {
            let q = v.position();
            [q.x, q.y]
        })
        .collect();
    let mut region_grid = BoxGrid::new(domain, grid_n);
    for (i, p) in polys.iter().enumerate() {
        region_grid.insert(i as u32, p.outer_box);
    }
    let mut elements = Vec::with_capacity(cdt.num_inner_faces());
    let mut element_region = Vec::with_capacity(cdt.num_inner_faces());
    for f in cdt.inner_faces() {
        let v = f.vertices();
        let t = [
            v[0].fix().index() as u32,
            v[1].fix().index() as u32,
            v[2].fix().index() as u32,
        ];
        let p = [nodes[t[0] as usize], nodes[t[1] as usize], nodes[t[2] as usize]];
        let c = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
        let r = region_grid
            .at(c)
            .iter()
            .copied()
            .find(|&i| polys[i as usize].contains(c))
            .ok_or_else(|| Error::Mesh(format!("element at ({:.6e}, {:.6e}) lies in no region", c[0], c[1])))?;
        let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
        if !(area > 0.0) {
            return Err(Error::Mesh(format!(
                "degenerate element at ({:.6e}, {:.6e})",
                c[0], c[1]
            )));
        }
        elements.push(t);
        element_region.push(r);
    }
    let regions = layout
        .regions
        .iter()
        .map(|r| RegionInfo {
            tag: r.tag,
            material: r.material.clone(),
            exact_area: r.area(),
            shape: r.shape.clone(),
        })
        .collect();
    let mut mesh = Mesh {
        plane: layout.plane,
        nodes,
        elements,
        element_region,
        regions,
        boundary_edges: Vec::new(),
    };
    mesh.compute_boundary_edges();
    Ok(mesh)
}
