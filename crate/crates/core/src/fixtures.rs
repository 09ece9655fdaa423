//! Reference geometries whose fields have closed-form answers: layered plates, a coaxial line,
//! coaxial current sheets, a rectangular winding slot in a high-permeability frame and an
//! ideal toroid.

use crate::error::{Error, Result};
use crate::geometry::{AnalysisPlane, Arrangement, Layout, Region, RegionTag, Role, Shape, Side, TurnId, Zone};

/// One horizontal layer of a plate stack.
#[derive(Debug, Clone, PartialEq)]
pub struct Slab {
    pub thickness: f64,
    pub material: String,
    pub tag: RegionTag,
}

impl Slab {
    pub fn new(thickness: f64, material: &str, tag: RegionTag) -> Self {
        Self {
            thickness,
            material: material.into(),
            tag,
        }
    }
}

/// Planar stack of full-width slabs from y = 0 upward. The side walls lie on the domain edge,
/// so with a natural outer boundary the field is exactly one-dimensional.
pub fn slab_stack(width: f64, depth: f64, slabs: &[Slab]) -> Result<Layout> {
    if !(width > 0.0 && depth > 0.0) || slabs.iter().any(|s| !(s.thickness > 0.0)) {
        return Err(Error::InvalidGeometry("slab dimensions must be positive".into()));
    }
    let mut y = 0.0;
    let mut regions = Vec::with_capacity(slabs.len());
    for s in slabs {
        regions.push(Region::new(
            Shape::rect(0.0, y, width, y + s.thickness),
            &s.material,
            s.tag,
        ));
        y += s.thickness;
    }
    Ok(Layout::new(
        AnalysisPlane::Planar { depth },
        [[0.0, 0.0], [width, y]],
        regions,
    ))
}

/// Plates `Electrode(0)` (bottom) and `Electrode(1)` (top) around dielectric layers
/// `(thickness, material)` listed bottom to top.
pub fn parallel_plates(
    width: f64,
    depth: f64,
    plate: f64,
    plate_material: &str,
    layers: &[(f64, &str)],
) -> Result<Layout> {
    let mut slabs = vec![Slab::new(plate, plate_material, RegionTag::Electrode(0))];
    slabs.extend(layers.iter().map(|&(t, m)| Slab::new(t, m, RegionTag::Insulation)));
    slabs.push(Slab::new(plate, plate_material, RegionTag::Electrode(1)));
    slab_stack(width, depth, &slabs)
}

/// Axisymmetric coaxial line of length `length`: solid inner conductor `Electrode(0)` of
/// radius `a`, dielectric to radius `b`, outer shell `Electrode(1)` of thickness `wall`.
pub fn coax(a: f64, b: f64, wall: f64, length: f64, conductor: &str, dielectric: &str) -> Result<Layout> {
    if !(a > 0.0 && b > a && wall > 0.0 && length > 0.0) {
        return Err(Error::InvalidGeometry(
            "coax needs 0 < a < b, positive wall and length".into(),
        ));
    }
    let regions = vec![
        Region::new(Shape::rect(0.0, 0.0, a, length), conductor, RegionTag::Electrode(0)),
        Region::new(Shape::rect(a, 0.0, b, length), dielectric, RegionTag::Insulation),
        Region::new(
            Shape::rect(b, 0.0, b + wall, length),
            conductor,
            RegionTag::Electrode(1),
        ),
    ];
    Ok(Layout::new(
        AnalysisPlane::Axisymmetric,
        [[0.0, 0.0], [b + wall, length]],
        regions,
    ))
}

/// Axisymmetric pair of coaxial current sheets of length `length`: `Electrode(0)` occupies
/// r ∈ [a − sheet, a] and `Electrode(1)` occupies r ∈ [b, b + sheet], air elsewhere out to
/// `outer`. Equal and opposite azimuthal currents confine the field to the gap.
pub fn coaxial_sheets(a: f64, b: f64, sheet: f64, length: f64, outer: f64, conductor: &str) -> Result<Layout> {
    if !(sheet > 0.0 && a > sheet && b > a && outer > b + sheet && length > 0.0) {
        return Err(Error::InvalidGeometry(
            "coaxial sheets need sheet < a < b < outer".into(),
        ));
    }
    let regions = vec![
        Region::new(Shape::rect(0.0, 0.0, a - sheet, length), "air", RegionTag::Air),
        Region::new(
            Shape::rect(a - sheet, 0.0, a, length),
            conductor,
            RegionTag::Electrode(0),
        ),
        Region::new(Shape::rect(a, 0.0, b, length), "air", RegionTag::Air),
        Region::new(
            Shape::rect(b, 0.0, b + sheet, length),
            conductor,
            RegionTag::Electrode(1),
        ),
        Region::new(Shape::rect(b + sheet, 0.0, outer, length), "air", RegionTag::Air),
    ];
    Ok(Layout::new(
        AnalysisPlane::Axisymmetric,
        [[0.0, 0.0], [outer, length]],
        regions,
    ))
}

/// Rectangular slot description.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotSpec {
    pub arrangement: Arrangement,
    /// Window breadth (x) and height (y).
    pub window: [f64; 2],
    /// Foil strip thickness; every strip spans the full window height.
    pub strip: f64,
    /// Clearance between adjacent strips.
    pub gap: f64,
    /// Clearance between the first strip and the window wall.
    pub margin: f64,
    /// Frame limb thickness.
    pub frame: f64,
    /// Air around the frame.
    pub air: f64,
    /// Out-of-plane length.
    pub depth: f64,
    pub core_material: String,
    pub conductor_material: String,
}

impl SlotSpec {
    pub fn gaps(&self) -> Vec<f64> {
        vec![self.gap; self.arrangement.len().saturating_sub(1)]
    }
}

/// Foil strips (one turn each, `Side::Go`) inside the window of a rectangular frame core.
pub fn slot(spec: &SlotSpec) -> Result<Layout> {
    let [w, h] = spec.window;
    let n = spec.arrangement.len();
    let stack = spec.margin + n as f64 * spec.strip + n.saturating_sub(1) as f64 * spec.gap;
    if n == 0 || stack > w {
        return Err(Error::DoesNotFit {
            what: "slot strips".into(),
            required: stack,
            available: w,
        });
    }
    if !(spec.strip > 0.0 && spec.gap >= 0.0 && spec.margin >= 0.0 && spec.frame > 0.0 && spec.air > 0.0 && h > 0.0) {
        return Err(Error::InvalidGeometry("slot dimensions must be positive".into()));
    }
    let window = Shape::rect(0.0, 0.0, w, h);
    let outer = Shape::rect(-spec.frame, -spec.frame, w + spec.frame, h + spec.frame);
    let domain = [
        [-spec.frame - spec.air, -spec.frame - spec.air],
        [w + spec.frame + spec.air, h + spec.frame + spec.air],
    ];
    let mut regions = Vec::new();
    let mut strips = Vec::new();
    let mut layer_of = [0u32; 2];
    for (k, role) in spec.arrangement.tokens().iter().enumerate() {
        let x = spec.margin + k as f64 * (spec.strip + spec.gap);
        let s = Shape::rect(x, 0.0, x + spec.strip, h);
        let id = TurnId {
            role: *role,
            layer: layer_of[role.index()],
            turn: 0,
            side: Side::Go,
        };
        layer_of[role.index()] += 1;
        strips.push(s.clone());
        regions.push(Region::new(s, &spec.conductor_material, RegionTag::Turn(id)));
    }
    regions.push(Region::new(window.clone(), "air", RegionTag::Air).with_holes(strips));
    regions.push(Region::new(outer.clone(), &spec.core_material, RegionTag::Core).with_holes(vec![window]));
    regions.push(Region::new(Shape::Polygon(rect_points(domain)), "air", RegionTag::Air).with_holes(vec![outer]));
    let mut layout = Layout::new(AnalysisPlane::Planar { depth: spec.depth }, domain, regions);
    layout.fine_zones = vec![Zone::Rect([[0.0, 0.0], [w, h]])];
    layout.field_zones = layout.fine_zones.clone();
    layout.window = Some([[0.0, 0.0], [w, h]]);
    Ok(layout)
}

/// Planar top view of an ideal toroid: core annulus `inner`..`outer` between two thin copper
/// sheets, `Electrode(0)` inside the hole and `Electrode(1)` around the outside, each
/// `clearance` away from the core. Opposite sheet currents N·I and −N·I model N uniformly
/// spread turns.
#[allow(clippy::too_many_arguments)]
pub fn toroid_ring(
    inner: f64,
    outer: f64,
    depth: f64,
    sheet: f64,
    clearance: f64,
    air: f64,
    core_material: &str,
    conductor: &str,
) -> Result<Layout> {
    let r0 = inner - clearance - sheet;
    if !(r0 > 0.0 && outer > inner && sheet > 0.0 && clearance > 0.0 && air > 0.0 && depth > 0.0) {
        return Err(Error::InvalidGeometry(
            "toroid ring needs sheet + clearance < inner < outer".into(),
        ));
    }
    let o = [0.0, 0.0];
    let radii = [
        r0,
        inner - clearance,
        inner,
        outer,
        outer + clearance,
        outer + clearance + sheet,
    ];
    let fill = [
        ("air", RegionTag::Air),
        (conductor, RegionTag::Electrode(0)),
        ("air", RegionTag::Air),
        (core_material, RegionTag::Core),
        ("air", RegionTag::Air),
        (conductor, RegionTag::Electrode(1)),
    ];
    let mut regions = vec![Region::new(Shape::circle(o, r0), fill[0].0, fill[0].1)];
    for k in 1..radii.len() {
        regions.push(
            Region::new(Shape::circle(o, radii[k]), fill[k].0, fill[k].1)
                .with_holes(vec![Shape::circle(o, radii[k - 1])]),
        );
    }
    let r = radii[5] + air;
    let domain = [[-r, -r], [r, r]];
    regions.push(
        Region::new(Shape::Polygon(rect_points(domain)), "air", RegionTag::Air)
            .with_holes(vec![Shape::circle(o, radii[5])]),
    );
    Ok(Layout::new(AnalysisPlane::Planar { depth }, domain, regions))
}

fn rect_points(b: [[f64; 2]; 2]) -> Vec<[f64; 2]> {
    vec![b[0], [b[1][0], b[0][1]], b[1], [b[0][0], b[1][1]]]
}

/// Number of P and S strips, for building excitations.
pub fn strip_counts(spec: &SlotSpec) -> [usize; 2] {
    let (p, s) = spec.arrangement.counts();
    let mut out = [0; 2];
    out[Role::Primary.index()] = p;
    out[Role::Secondary.index()] = s;
    out
}
