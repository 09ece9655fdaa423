//! Geometry checks: overlapping turns, insulation spacing, clearance to the core.

use super::layout::{shape_segment_clearance, Layout};
use super::shapes::{dist, polygons_overlap, polyline_distance, Point, Shape};
use super::{Region, RegionTag};

#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    /// Interiors of two regions intersect.
    Overlap { a: RegionTag, b: RegionTag },
    /// Conductor surfaces closer than the turn insulation.
    Spacing {
        a: RegionTag,
        b: RegionTag,
        distance: f64,
        required: f64,
    },
    /// Turn closer to the core than the bobbin gap.
    CoreClearance {
        turn: RegionTag,
        distance: f64,
        required: f64,
    },
}

const REL: f64 = 1e-9;

fn fine_tol(shape: &Shape) -> f64 {
    let b = shape.bbox();
    1e-5 * (b[1][0] - b[0][0]).max(b[1][1] - b[0][1])
}

/// Homogenized neighbours in one band share edges by construction.
fn same_band(a: &Shape, b: &Shape) -> bool {
    matches!(
        (a, b),
        (
            Shape::AnnularSector { r_inner: ra, r_outer: sa, .. },
            Shape::AnnularSector { r_inner: rb, r_outer: sb, .. },
        ) if ra == rb && sa == sb
    )
}

fn turn_distance(a: &Shape, b: &Shape) -> (f64, bool) {
    if let (Shape::Circle { center: ca, radius: ra }, Shape::Circle { center: cb, radius: rb }) = (a, b) {
        let d = dist(*ca, *cb) - ra - rb;
        return (d, d < -REL * ra.max(*rb));
    }
    if let (
        Shape::AnnularSector {
            center: ca,
            r_inner: ia,
            r_outer: oa,
            theta0: a0,
            theta1: a1,
        },
        Shape::AnnularSector {
            center: cb,
            r_inner: ib,
            r_outer: ob,
            theta0: b0,
            theta1: b1,
        },
    ) = (a, b)
    {
        let touch = [-2.0 * std::f64::consts::PI, 0.0, 2.0 * std::f64::consts::PI]
            .iter()
            .any(|k| a0.max(b0 + k) <= a1.min(b1 + k));
        if ca == cb && touch {
            let d = (ia - ob).max(ib - oa);
            return (d, d < -REL * oa.max(*ob));
        }
    }
    let pa = a.outline(fine_tol(a));
    let pb = b.outline(fine_tol(b));
    if polygons_overlap(&pa, &pb) {
        return (0.0, true);
    }
    (polyline_distance(&pa, &pb), false)
}

/// Checks turn overlap, turn-to-turn spacing and turn-to-core clearance.
pub fn validate_geometry(regions: &[Region], turn_insulation: f64, bobbin_gap: f64) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut turns: Vec<(usize, [Point; 2])> = regions
        .iter()
        .enumerate()
        .filter(|(_, r)| r.tag.is_turn())
        .map(|(i, r)| (i, r.shape.bbox()))
        .collect();
    turns.sort_by(|x, y| x.1[0][0].total_cmp(&y.1[0][0]).then(x.0.cmp(&y.0)));
    let reach = turn_insulation.max(0.0);
    for i in 0..turns.len() {
        let (ia, ba) = turns[i];
        for &(ib, bb) in &turns[i + 1..] {
            if bb[0][0] > ba[1][0] + reach {
                break;
            }
            if bb[0][1] > ba[1][1] + reach || ba[0][1] > bb[1][1] + reach {
                continue;
            }
            let (ra, rb) = (&regions[ia], &regions[ib]);
            let (lo, hi) = if ia < ib { (ra, rb) } else { (rb, ra) };
            if same_band(&ra.shape, &rb.shape) {
                let pa = ra.shape.outline(fine_tol(&ra.shape));
                let pb = rb.shape.outline(fine_tol(&rb.shape));
                if sector_interiors_meet(&ra.shape, &rb.shape)
                    || (polygons_overlap(&pa, &pb) && !shares_edge(&ra.shape, &rb.shape))
                {
                    out.push(Diagnostic::Overlap { a: lo.tag, b: hi.tag });
                }
                continue;
            }
            let (d, overlap) = turn_distance(&ra.shape, &rb.shape);
            if overlap {
                out.push(Diagnostic::Overlap { a: lo.tag, b: hi.tag });
            } else if d < turn_insulation * (1.0 - REL) {
                out.push(Diagnostic::Spacing {
                    a: lo.tag,
                    b: hi.tag,
                    distance: d,
                    required: turn_insulation,
                });
            }
        }
    }
    let mut core_edges: Vec<(Point, Point)> = Vec::new();
    for r in regions.iter().filter(|r| r.tag == RegionTag::Core) {
        for sh in std::iter::once(&r.shape).chain(r.holes.iter()) {
            let o = sh.outline(fine_tol(sh));
            for k in 0..o.len() {
                core_edges.push((o[k], o[(k + 1) % o.len()]));
            }
        }
    }
    if !core_edges.is_empty() {
        for r in regions.iter().filter(|r| r.tag.is_turn()) {
            let tol = fine_tol(&r.shape);
            let d = core_edges
                .iter()
                .map(|(a, b)| shape_segment_clearance(&r.shape, *a, *b, tol))
                .fold(f64::INFINITY, f64::min);
            if d < bobbin_gap * (1.0 - REL) - 1e-12 {
                out.push(Diagnostic::CoreClearance {
                    turn: r.tag,
                    distance: d,
                    required: bobbin_gap,
                });
            }
        }
    }
    out
}

fn sector_interiors_meet(a: &Shape, b: &Shape) -> bool {
    if let (
        Shape::AnnularSector {
            theta0: a0, theta1: a1, ..
        },
        Shape::AnnularSector {
            theta0: b0, theta1: b1, ..
        },
    ) = (a, b)
    {
        let lo = a0.max(*b0);
        let hi = a1.min(*b1);
        return hi - lo > 1e-12;
    }
    false
}

fn shares_edge(a: &Shape, b: &Shape) -> bool {
    if let (
        Shape::AnnularSector {
            theta0: a0, theta1: a1, ..
        },
        Shape::AnnularSector {
            theta0: b0, theta1: b1, ..
        },
    ) = (a, b)
    {
        return a1 == b0 || b1 == a0;
    }
    false
}

/// [`validate_geometry`] with the layout's own spacing requirements.
pub fn validate_layout(layout: &Layout) -> Vec<Diagnostic> {
    validate_geometry(&layout.regions, layout.turn_insulation, layout.bobbin_gap)
}
