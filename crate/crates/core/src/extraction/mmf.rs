use crate::error::{Error, Result};
use crate::fem::{FieldKind, FieldSolution};
use crate::geometry::Point;
use crate::mesh::Mesh;

/// Uniform bucket grid over element bounding boxes.
#[derive(Debug, Clone)]
pub struct ElementLocator {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl ElementLocator {
    pub fn new(mesh: &Mesh) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &mesh.nodes {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let n = mesh.elements.len().max(1);
        let side = (n as f64).sqrt().ceil().clamp(1.0, 1024.0) as usize;
        let cell = ((hi[0] - lo[0]).max(hi[1] - lo[1]) / side as f64).max(f64::MIN_POSITIVE);
        let nx = (((hi[0] - lo[0]) / cell).ceil() as usize).max(1);
        let ny = (((hi[1] - lo[1]) / cell).ceil() as usize).max(1);
        let mut loc = Self {
            origin: lo,
            cell,
            nx,
            ny,
            buckets: vec![Vec::new(); nx * ny],
        };
        for e in 0..mesh.elements.len() {
            let p = mesh.element_points(e);
            let (i0, j0) = loc.cell_of([p[0][0].min(p[1][0]).min(p[2][0]), p[0][1].min(p[1][1]).min(p[2][1])]);
            let (i1, j1) = loc.cell_of([p[0][0].max(p[1][0]).max(p[2][0]), p[0][1].max(p[1][1]).max(p[2][1])]);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    loc.buckets[j * nx + i].push(e as u32);
                }
            }
        }
        loc
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let i = ((p[0] - self.origin[0]) / self.cell)
            .floor()
            .clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = ((p[1] - self.origin[1]) / self.cell)
            .floor()
            .clamp(0.0, (self.ny - 1) as f64) as usize;
        (i, j)
    }

    /// Candidate elements near the segment `a`→`b`, sorted and deduplicated.
    fn near_segment(&self, a: Point, b: Point) -> Vec<u32> {
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        let steps = ((len / (0.5 * self.cell)).ceil() as usize).max(1);
        let mut out = Vec::new();
        let mut seen_cells = std::collections::BTreeSet::new();
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let (ci, cj) = self.cell_of([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            for j in cj.saturating_sub(1)..=(cj + 1).min(self.ny - 1) {
                for i in ci.saturating_sub(1)..=(ci + 1).min(self.nx - 1) {
                    if seen_cells.insert((i, j)) {
                        out.extend_from_slice(&self.buckets[j * self.nx + i]);
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Parameter interval of the segment `p0 + t·d`, t ∈ [0, 1], inside a CCW triangle.
fn clip(tri: [Point; 3], p0: Point, d: Point) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for k in 0..3 {
        let a = tri[k];
        let b = tri[(k + 1) % 3];
        let e = [b[0] - a[0], b[1] - a[1]];
        let c0 = cross(e, [p0[0] - a[0], p0[1] - a[1]]);
        let c1 = cross(e, d);
        if c1 == 0.0 {
            if c0 < 0.0 {
                return None;
            }
        } else {
            let t = -c0 / c1;
            if c1 > 0.0 {
                lo = lo.max(t);
            } else {
                hi = hi.min(t);
            }
        }
    }
    (hi > lo).then_some((lo, hi))
}

/// Cumulative MMF along a polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct MmfProfile {
    pub path: Vec<Point>,
    /// (arc length from the start in m, ∫H·dl in ampere-turns) at every element crossing.
    pub samples: Vec<(f64, f64)>,
}

impl MmfProfile {
    pub fn end(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.1)
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.1.abs()))
    }
}

/// ∫H·dl along `path` with the per-element constant H.
pub fn mmf_profile(sol: &FieldSolution, path: &[Point]) -> Result<MmfProfile> {
    mmf_profile_with(sol, &ElementLocator::new(&sol.mesh), path)
}

pub fn mmf_profile_with(sol: &FieldSolution, locator: &ElementLocator, path: &[Point]) -> Result<MmfProfile> {
    if sol.kind() != FieldKind::Magnetostatic {
        return Err(Error::WrongKind("magnetostatic solution"));
    }
    if path.len() < 2 {
        return Err(Error::InvalidArgument("path needs at least two points".into()));
    }
    let mesh = &sol.mesh;
    let mut samples = vec![(0.0, 0.0)];
    let mut arc = 0.0;
    let mut mmf = 0.0;
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let d = [b[0] - a[0], b[1] - a[1]];
        let len = d[0].hypot(d[1]);
        if len == 0.0 {
            continue;
        }
        let mut pieces: Vec<(f64, f64, usize)> = locator
            .near_segment(a, b)
            .into_iter()
            .filter_map(|e| clip(mesh.element_points(e as usize), a, d).map(|(t0, t1)| (t0, t1, e as usize)))
            .collect();
        pieces.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.2.cmp(&y.2)));
        let mut reach = 0.0;
        for &(t0, t1, e) in &pieces {
            if t0 > reach + 1e-9 {
                let t = reach;
                return Err(Error::PathOutsideDomain(a[0] + t * d[0], a[1] + t * d[1]));
            }
            let (s0, s1) = (t0.max(reach), t1);
            if s1 <= s0 {
                continue;
            }
            let h = sol.h_field(e)?;
            mmf += (h[0] * d[0] + h[1] * d[1]) * (s1 - s0);
            reach = s1;
            samples.push((arc + s1 * len, mmf));
        }
        if reach < 1.0 - 1e-9 {
            return Err(Error::PathOutsideDomain(a[0] + reach * d[0], a[1] + reach * d[1]));
        }
        arc += len;
    }
    Ok(MmfProfile {
        path: path.to_vec(),
        samples,
    })
}

/// MMF across a window: for `n` evenly spaced abscissae, ∫H_y dy over the full window height.
pub fn window_mmf(sol: &FieldSolution, window: [Point; 2], n: usize) -> Result<Vec<(f64, f64)>> {
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two traverse positions".into()));
    }
    let loc = ElementLocator::new(&sol.mesh);
    let [lo, hi] = window;
    (0..n)
        .map(|k| {
            let x = lo[0] + (hi[0] - lo[0]) * (k as f64 + 0.5) / n as f64;
            let p = mmf_profile_with(sol, &loc, &[[x, lo[1]], [x, hi[1]]])?;
            Ok((x, p.end()))
        })
        .collect()
}
