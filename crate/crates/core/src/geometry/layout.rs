//! Turn-by-turn placement of the windings and the surrounding insulation, bobbin, core and air.

use std::f64::consts::PI;

use super::scenario::{CoreFamily, Placement, Scenario};
use super::shapes::{dist, point_segment_distance, Point, Shape};
use super::{AnalysisPlane, Region, RegionTag, Role, Side, TurnId};
use crate::error::{Error, Result};

/// Area where the mesh keeps its finest size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Zone {
    Rect([Point; 2]),
    Annulus { center: Point, r_inner: f64, r_outer: f64 },
}

impl Zone {
    /// Distance from `p` to the zone, zero inside.
    pub fn distance(&self, p: Point) -> f64 {
        match self {
            Zone::Rect([lo, hi]) => {
                let dx = (lo[0] - p[0]).max(p[0] - hi[0]).max(0.0);
                let dy = (lo[1] - p[1]).max(p[1] - hi[1]).max(0.0);
                dx.hypot(dy)
            }
            Zone::Annulus {
                center,
                r_inner,
                r_outer,
            } => {
                let r = dist(p, *center);
                (r_inner - r).max(r - r_outer).max(0.0)
            }
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.distance(p) == 0.0
    }
}

/// Complete tagged cross-section ready for meshing.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub plane: AnalysisPlane,
    /// Rectangular analysis domain `[min, max]`; every region lies inside it.
    pub domain: [Point; 2],
    pub regions: Vec<Region>,
    /// Where the mesh keeps size `h`; it grades away from these.
    pub fine_zones: Vec<Zone>,
    /// Where peak magnetic field is reported.
    pub field_zones: Vec<Zone>,
    /// Upper bound on chord sagitta for curved boundaries, beyond the mesh-size rule.
    pub curve_tolerance: f64,
    /// Winding window used for MMF traverses (planar cores only).
    pub window: Option<[Point; 2]>,
    /// Required turn-to-turn and turn-to-core spacings (m).
    pub turn_insulation: f64,
    pub bobbin_gap: f64,
}

impl Layout {
    /// Bare layout for hand-built fixtures: no zones, uniform sizing.
    pub fn new(plane: AnalysisPlane, domain: [Point; 2], regions: Vec<Region>) -> Self {
        Self {
            plane,
            domain,
            regions,
            fine_zones: Vec::new(),
            field_zones: Vec::new(),
            curve_tolerance: f64::INFINITY,
            window: None,
            turn_insulation: 0.0,
            bobbin_gap: 0.0,
        }
    }

    pub fn turn_regions(&self) -> impl Iterator<Item = (&Region, TurnId)> {
        self.regions.iter().filter_map(|r| match r.tag {
            RegionTag::Turn(t) => Some((r, t)),
            _ => None,
        })
    }

    /// Total conductor area of one winding on one side.
    pub fn copper_area(&self, role: Role, side: Side) -> f64 {
        self.turn_regions()
            .filter(|(_, t)| t.role == role && t.side == side)
            .map(|(r, _)| r.area())
            .sum()
    }
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    role: Role,
    layer: u32,
    turns: u32,
    d: f64,
}

struct Materials<'a> {
    insulation: &'a str,
    bobbin: &'a str,
    core: &'a str,
    ambient: &'a str,
}

fn slots(s: &Scenario, tokens: &[Role], first_layer: [u32; 2]) -> Vec<Slot> {
    let mut next = first_layer;
    tokens
        .iter()
        .map(|&role| {
            let w = s.winding(role);
            let layer = next[role.index()];
            next[role.index()] += 1;
            Slot {
                role,
                layer,
                turns: w.turns_in_layer(layer),
                d: w.wire_diameter,
            }
        })
        .collect()
}

fn layer_counts(tokens: &[Role]) -> [u32; 2] {
    let mut c = [0u32; 2];
    for r in tokens {
        c[r.index()] += 1;
    }
    c
}

/// Lays out the scenario's windings, insulation, bobbin, core and air box.
pub fn layout_winding(s: &Scenario) -> Result<Layout> {
    s.validate()?;
    let ins = s.windings[0].turn_insulation.max(s.windings[1].turn_insulation);
    let g_b = s.windings[0].bobbin_gap.max(s.windings[1].bobbin_gap);
    if ins <= 0.0 {
        return Err(Error::InvalidGeometry(
            "turn insulation must be positive to separate conductors".into(),
        ));
    }
    let mats = Materials {
        insulation: &s.insulation_material,
        bobbin: &s.bobbin_material,
        core: &s.core_material,
        ambient: &s.ambient_material,
    };
    let half = 2.5 * s.core.largest_dimension()?;
    let domain = [[-half, -half], [half, half]];
    let (mut layout, air_holes) = match s.core.family {
        CoreFamily::Ee => layout_ee(s, ins, g_b, &mats)?,
        CoreFamily::Uu => layout_uu(s, ins, g_b, &mats)?,
        CoreFamily::Toroid => layout_toroid(s, ins, g_b, &mats)?,
    };
    layout
        .regions
        .push(Region::new(Shape::rect(-half, -half, half, half), mats.ambient, RegionTag::Air).with_holes(air_holes));
    layout.domain = domain;
    layout.plane = s.core.analysis_plane()?;
    layout.turn_insulation = ins;
    layout.bobbin_gap = g_b;
    Ok(layout)
}

/// Output of one rectangular winding stack.
struct Stack {
    regions: Vec<Region>,
    /// Bobbin, flanges and insulation block together.
    envelope: [Point; 2],
}

/// Builds a stack of layers against the limb face `face_x`, growing in direction `dir` (±1),
/// spanning `-half_h..half_h` vertically.
fn rect_stack(
    face_x: f64,
    dir: f64,
    half_h: f64,
    slots: &[Slot],
    g_b: f64,
    ins: f64,
    side: Side,
    mats: &Materials,
) -> Result<Stack> {
    let width: f64 = ins + slots.iter().map(|s| s.d + ins).sum::<f64>();
    let x0 = face_x + dir * g_b;
    let x1 = x0 + dir * width;
    let avail_h = 2.0 * (half_h - g_b);
    let mut regions = Vec::new();
    let mut holes = Vec::new();
    let mut offset = ins;
    for sl in slots {
        let pitch = sl.d + ins;
        let need = sl.turns as f64 * pitch + ins;
        if need > avail_h * (1.0 + 1e-12) {
            return Err(Error::DoesNotFit {
                what: format!("{:?} layer {} height", sl.role, sl.layer),
                required: need,
                available: avail_h,
            });
        }
        let xc = x0 + dir * (offset + 0.5 * sl.d);
        for j in 0..sl.turns {
            let yc = (j as f64 - 0.5 * (sl.turns as f64 - 1.0)) * pitch;
            let c = Shape::circle([xc, yc], 0.5 * sl.d);
            holes.push(c.clone());
            regions.push(Region::new(
                c,
                "copper",
                RegionTag::Turn(TurnId {
                    role: sl.role,
                    layer: sl.layer,
                    turn: j,
                    side,
                }),
            ));
        }
        offset += pitch;
    }
    regions.push(Region::new(
        Shape::rect(face_x, -half_h, x0, half_h),
        mats.bobbin,
        RegionTag::Bobbin,
    ));
    regions.push(Region::new(
        Shape::rect(x0, half_h - g_b, x1, half_h),
        mats.bobbin,
        RegionTag::Bobbin,
    ));
    regions.push(Region::new(
        Shape::rect(x0, -half_h, x1, -half_h + g_b),
        mats.bobbin,
        RegionTag::Bobbin,
    ));
    regions.push(
        Region::new(
            Shape::rect(x0, -half_h + g_b, x1, half_h - g_b),
            mats.insulation,
            RegionTag::Insulation,
        )
        .with_holes(holes),
    );
    let (xa, xb) = (face_x.min(x1), face_x.max(x1));
    Ok(Stack {
        regions,
        envelope: [[xa, -half_h], [xb, half_h]],
    })
}

fn envelope_width(e: &[Point; 2]) -> f64 {
    e[1][0] - e[0][0]
}

fn rect_of(e: &[Point; 2]) -> Shape {
    Shape::rect(e[0][0], e[0][1], e[1][0], e[1][1])
}

fn mirror_regions(regions: &[Region], side: Side) -> Vec<Region> {
    regions
        .iter()
        .map(|r| Region {
            shape: r.shape.mirrored_x(),
            holes: r.holes.iter().map(Shape::mirrored_x).collect(),
            material: r.material.clone(),
            tag: match r.tag {
                RegionTag::Turn(t) => RegionTag::Turn(TurnId { side, ..t }),
                other => other,
            },
        })
        .collect()
}

fn expand(e: [Point; 2], m: f64) -> [Point; 2] {
    [[e[0][0] - m, e[0][1] - m], [e[1][0] + m, e[1][1] + m]]
}

fn max_wire(s: &Scenario) -> f64 {
    s.windings[0].wire_diameter.max(s.windings[1].wire_diameter)
}

fn layout_ee(s: &Scenario, ins: f64, g_b: f64, mats: &Materials) -> Result<(Layout, Vec<Shape>)> {
    let c = &s.core;
    let (cw, dh, m, n) = (c.dim("C")?, c.dim("D")?, c.dim("M")?, c.dim("N")?);
    let hc = 0.5 * c.centre_limb_width()?;
    let half_h = 0.5 * dh;
    if s.placement != Placement::Concentric {
        return Err(Error::InvalidGeometry(
            "EE cores support concentric placement only".into(),
        ));
    }
    let sl = slots(s, s.arrangement.tokens(), [0, 0]);
    let right = rect_stack(hc, 1.0, half_h, &sl, g_b, ins, Side::Go, mats)?;
    let used = envelope_width(&right.envelope) + g_b;
    if used > cw * (1.0 + 1e-12) {
        return Err(Error::DoesNotFit {
            what: "EE window width".into(),
            required: used,
            available: cw,
        });
    }
    let mut regions = right.regions.clone();
    regions.extend(mirror_regions(&right.regions, Side::Return));
    let xs = right.envelope[1][0];
    let window_air = Shape::rect(xs, -half_h, hc + cw, half_h);
    regions.push(Region::new(window_air.clone(), mats.ambient, RegionTag::Air));
    regions.push(Region::new(window_air.mirrored_x(), mats.ambient, RegionTag::Air));
    let outer = Shape::rect(-0.5 * m, -0.5 * n, 0.5 * m, 0.5 * n);
    let win_r = Shape::rect(hc, -half_h, hc + cw, half_h);
    regions.push(
        Region::new(outer.clone(), mats.core, RegionTag::Core).with_holes(vec![win_r.clone(), win_r.mirrored_x()]),
    );
    let mut layout = Layout::new(AnalysisPlane::Planar { depth: 0.0 }, [[0.0; 2]; 2], regions);
    let margin = 2.0 * max_wire(s);
    let wr = [[hc, -half_h], [hc + cw, half_h]];
    let wl = [[-hc - cw, -half_h], [-hc, half_h]];
    layout.fine_zones = vec![Zone::Rect(expand(wr, margin)), Zone::Rect(expand(wl, margin))];
    layout.field_zones = vec![Zone::Rect(wr), Zone::Rect(wl)];
    layout.window = Some(wr);
    Ok((layout, vec![outer]))
}

fn layout_uu(s: &Scenario, ins: f64, g_b: f64, mats: &Materials) -> Result<(Layout, Vec<Shape>)> {
    let c = &s.core;
    let (cw, dh, e, f) = (c.dim("C")?, c.dim("D")?, c.dim("E")?, c.dim("F")?);
    let half_h = 0.5 * dh;
    let tokens = s.arrangement.tokens();
    let mut regions = Vec::new();
    let mut outside_holes = Vec::new();
    let mut zones = Vec::new();
    let margin = 2.0 * max_wire(s);
    let window_lo;
    let window_hi;
    match s.placement {
        Placement::Split => {
            let k = tokens.len() / 2;
            let left = slots(s, &tokens[..k], [0, 0]);
            let right = slots(s, &tokens[k..], layer_counts(&tokens[..k]));
            let wl = rect_stack(-0.5 * cw, 1.0, half_h, &left, g_b, ins, Side::Go, mats)?;
            let wr = rect_stack(0.5 * cw, -1.0, half_h, &right, g_b, ins, Side::Go, mats)?;
            let used = envelope_width(&wl.envelope) + envelope_width(&wr.envelope);
            if used > cw * (1.0 + 1e-12) {
                return Err(Error::DoesNotFit {
                    what: "UU window width".into(),
                    required: used,
                    available: cw,
                });
            }
            let ol = rect_stack(-0.5 * e, -1.0, half_h, &left, g_b, ins, Side::Return, mats)?;
            let or = rect_stack(0.5 * e, 1.0, half_h, &right, g_b, ins, Side::Return, mats)?;
            window_lo = wl.envelope[1][0];
            window_hi = wr.envelope[0][0];
            for st in [&ol, &or] {
                outside_holes.push(rect_of(&st.envelope));
                zones.push(Zone::Rect(expand(st.envelope, margin)));
            }
            for st in [wl, wr, ol, or] {
                regions.extend(st.regions);
            }
        }
        Placement::Concentric => {
            let all = slots(s, tokens, [0, 0]);
            let w = rect_stack(-0.5 * cw, 1.0, half_h, &all, g_b, ins, Side::Go, mats)?;
            let used = envelope_width(&w.envelope) + g_b;
            if used > cw * (1.0 + 1e-12) {
                return Err(Error::DoesNotFit {
                    what: "UU window width".into(),
                    required: used,
                    available: cw,
                });
            }
            let o = rect_stack(-0.5 * e, -1.0, half_h, &all, g_b, ins, Side::Return, mats)?;
            window_lo = w.envelope[1][0];
            window_hi = 0.5 * cw;
            outside_holes.push(rect_of(&o.envelope));
            zones.push(Zone::Rect(expand(o.envelope, margin)));
            regions.extend(w.regions);
            regions.extend(o.regions);
        }
    }
    if window_hi > window_lo {
        regions.push(Region::new(
            Shape::rect(window_lo, -half_h, window_hi, half_h),
            mats.ambient,
            RegionTag::Air,
        ));
    }
    let outer = Shape::rect(-0.5 * e, -0.5 * f, 0.5 * e, 0.5 * f);
    let win = Shape::rect(-0.5 * cw, -half_h, 0.5 * cw, half_h);
    regions.push(Region::new(outer.clone(), mats.core, RegionTag::Core).with_holes(vec![win]));
    let wr = [[-0.5 * cw, -half_h], [0.5 * cw, half_h]];
    zones.push(Zone::Rect(expand(wr, margin)));
    let mut layout = Layout::new(AnalysisPlane::Planar { depth: 0.0 }, [[0.0; 2]; 2], regions);
    layout.field_zones = zones.clone();
    layout.field_zones.pop();
    layout.field_zones.push(Zone::Rect(wr));
    layout.fine_zones = zones;
    layout.window = Some(wr);
    outside_holes.insert(0, outer);
    Ok((layout, outside_holes))
}

/// Radii of one band of homogenized turns. Sub-sector areas equal the wire area.
struct Band {
    slot: Slot,
    r_inner: f64,
    r_outer: f64,
}

fn layout_toroid(s: &Scenario, ins: f64, g_b: f64, mats: &Materials) -> Result<(Layout, Vec<Shape>)> {
    let c = &s.core;
    let (a, b) = (c.dim("A")?, c.dim("B")?);
    let o = [0.0, 0.0];
    let tokens = s.arrangement.tokens();
    let d_max = max_wire(s);
    // (first token, token count, centre angle, angular span)
    let groups: Vec<(usize, usize, f64, f64)> = match s.placement {
        Placement::Concentric => vec![(0, tokens.len(), 0.0, 2.0 * PI)],
        Placement::Split => {
            let k = tokens.len() / 2;
            let sep = 4.0 * d_max / (b - g_b);
            let span = PI - sep;
            if span <= 0.0 {
                return Err(Error::DoesNotFit {
                    what: "toroid half circumference".into(),
                    required: 4.0 * d_max,
                    available: PI * (b - g_b),
                });
            }
            vec![(0, k, 0.0, span), (k, k, PI, span)]
        }
    };
    let mut regions = Vec::new();
    let mut hole_turns = Vec::new();
    let mut out_turns = Vec::new();
    let mut r_hole_min = f64::INFINITY;
    let mut r_out_max: f64 = 0.0;
    for &(first, count, centre, span) in &groups {
        let first_layers = layer_counts(&tokens[..first]);
        let sl = slots(s, &tokens[first..first + count], first_layers);
        let full = span >= 2.0 * PI;
        let theta0 = if full { 0.0 } else { centre - 0.5 * span };
        let mut hole_bands = Vec::new();
        let mut out_bands = Vec::new();
        let mut r_o = b - g_b - ins;
        let mut r_i = a + g_b + ins;
        for slot in &sl {
            let aw = s.winding(slot.role).wire_area();
            let extra = 2.0 * slot.turns as f64 * aw / span;
            let inner_sq = r_o * r_o - extra;
            if inner_sq <= 0.0 {
                return Err(Error::DoesNotFit {
                    what: format!("toroid hole, {:?} layer {}", slot.role, slot.layer),
                    required: extra.sqrt(),
                    available: r_o,
                });
            }
            let hi = inner_sq.sqrt();
            hole_bands.push(Band {
                slot: *slot,
                r_inner: hi,
                r_outer: r_o,
            });
            r_o = hi - ins;
            let oo = (r_i * r_i + extra).sqrt();
            out_bands.push(Band {
                slot: *slot,
                r_inner: r_i,
                r_outer: oo,
            });
            r_i = oo + ins;
        }
        if r_o <= d_max {
            return Err(Error::DoesNotFit {
                what: "toroid hole clearance".into(),
                required: b - g_b - r_o + d_max,
                available: b - g_b,
            });
        }
        r_hole_min = r_hole_min.min(r_o);
        r_out_max = r_out_max.max(r_i);
        for (bands, side, sink) in [
            (&hole_bands, Side::Go, &mut hole_turns),
            (&out_bands, Side::Return, &mut out_turns),
        ] {
            for band in bands {
                let n = band.slot.turns;
                let angles: Vec<f64> = (0..=n)
                    .map(|k| {
                        if k == n {
                            theta0 + span
                        } else {
                            theta0 + span * k as f64 / n as f64
                        }
                    })
                    .collect();
                for k in 0..n as usize {
                    let sh = Shape::AnnularSector {
                        center: o,
                        r_inner: band.r_inner,
                        r_outer: band.r_outer,
                        theta0: angles[k],
                        theta1: angles[k + 1],
                    };
                    sink.push(sh.clone());
                    regions.push(Region::new(
                        sh,
                        "copper",
                        RegionTag::Turn(TurnId {
                            role: band.slot.role,
                            layer: band.slot.layer,
                            turn: k as u32,
                            side,
                        }),
                    ));
                }
            }
        }
    }
    let circle = |r: f64| Shape::circle(o, r);
    let r_vi = r_hole_min;
    let r_vo = r_out_max;
    regions.push(Region::new(circle(a), mats.core, RegionTag::Core).with_holes(vec![circle(b)]));
    regions.push(Region::new(circle(b), mats.bobbin, RegionTag::Bobbin).with_holes(vec![circle(b - g_b)]));
    regions.push(Region::new(circle(a + g_b), mats.bobbin, RegionTag::Bobbin).with_holes(vec![circle(a)]));
    let mut h = vec![circle(r_vi)];
    h.extend(hole_turns);
    regions.push(Region::new(circle(b - g_b), mats.insulation, RegionTag::Insulation).with_holes(h));
    let mut h = vec![circle(a + g_b)];
    h.extend(out_turns);
    regions.push(Region::new(circle(r_vo), mats.insulation, RegionTag::Insulation).with_holes(h));
    regions.push(Region::new(circle(r_vi), mats.ambient, RegionTag::Air));
    let mut layout = Layout::new(AnalysisPlane::Planar { depth: 0.0 }, [[0.0; 2]; 2], regions);
    let margin = 2.0 * d_max;
    layout.fine_zones = vec![
        Zone::Annulus {
            center: o,
            r_inner: (r_vi - margin).max(0.0),
            r_outer: b,
        },
        Zone::Annulus {
            center: o,
            r_inner: a,
            r_outer: r_vo + margin,
        },
    ];
    layout.field_zones = vec![
        Zone::Annulus {
            center: o,
            r_inner: 0.0,
            r_outer: b,
        },
        Zone::Annulus {
            center: o,
            r_inner: a,
            r_outer: r_vo + margin,
        },
    ];
    layout.curve_tolerance = 0.25 * ins;
    Ok((layout, vec![circle(r_vo)]))
}

/// Distance from the boundary of a circle or polygon turn to a segment.
pub(super) fn shape_segment_clearance(shape: &Shape, a: Point, b: Point, tol: f64) -> f64 {
    match shape {
        Shape::Circle { center, radius } => point_segment_distance(*center, a, b) - radius,
        other => {
            let o = other.outline(tol);
            (0..o.len())
                .map(|i| super::shapes::segment_segment_distance(o[i], o[(i + 1) % o.len()], a, b))
                .fold(f64::INFINITY, f64::min)
        }
    }
}
