use std::f64::consts::PI;

use crate::analytic::{dowell_delta, dowell_layer_factor};
use crate::error::{Error, Result};
use crate::geometry::{CoreFamily, Placement, Role, Scenario};
use crate::materials::COPPER_RESISTIVITY;

#[derive(Debug, Clone, PartialEq)]
pub struct AcResistance {
    /// Per winding, indexed by [`Role::index`] (Ω).
    pub dc: [f64; 2],
    pub ac: [f64; 2],
    /// Primary plus secondary referred through (Np/Ns)² (Ω).
    pub total: f64,
}

/// Effective layer height the turns of one layer are spread over (m).
fn layer_height(s: &Scenario) -> Result<f64> {
    let c = &s.core;
    Ok(match c.family {
        CoreFamily::Uu | CoreFamily::Ee => c.dim("D")?,
        CoreFamily::Toroid => {
            let g_b = s.windings[0].bobbin_gap.max(s.windings[1].bobbin_gap);
            let r = c.dim("B")? - g_b;
            let d = s.windings[0].wire_diameter.max(s.windings[1].wire_diameter);
            match s.placement {
                Placement::Concentric => 2.0 * PI * r,
                Placement::Split => (PI - 4.0 * d / r) * r,
            }
        }
    })
}

/// Width of the limb the turns wrap (m).
fn limb_width(s: &Scenario) -> Result<f64> {
    let c = &s.core;
    Ok(match c.family {
        CoreFamily::Toroid => c.dim("A")? - c.dim("B")?,
        CoreFamily::Uu => c.dim("K")?,
        CoreFamily::Ee => c.centre_limb_width()?,
    })
}

/// Dowell AC resistance at `f`, applied layer by layer along the arrangement's MMF staircase
/// and referred to the primary.
pub fn ac_resistance(s: &Scenario, f: f64) -> Result<AcResistance> {
    if !(f > 0.0 && f.is_finite()) {
        return Err(Error::InvalidArgument(format!("frequency must be positive, got {f}")));
    }
    s.validate()?;
    let np = f64::from(s.winding(Role::Primary).turns);
    let ns = f64::from(s.winding(Role::Secondary).turns);
    let per_turn = |r: Role| if r == Role::Primary { 1.0 } else { -np / ns };
    let height = layer_height(s)?;
    let w = limb_width(s)?;
    let depth = s.core.depth()?;
    let tokens = s.arrangement.tokens();
    let split_at = match s.placement {
        Placement::Split => tokens.len() / 2,
        Placement::Concentric => tokens.len(),
    };
    let mut next_layer = [0u32; 2];
    let mut offset = 0.0;
    let mut mmf = 0.0;
    let mut dc = [0.0; 2];
    let mut ac = [0.0; 2];
    for (k, &role) in tokens.iter().enumerate() {
        let wdg = s.winding(role);
        if k == 0 || k == split_at {
            offset = wdg.bobbin_gap + wdg.turn_insulation;
        }
        let n = f64::from(wdg.turns_in_layer(next_layer[role.index()]));
        next_layer[role.index()] += 1;
        let d = wdg.wire_diameter;
        let centre = offset + 0.5 * d;
        offset += d + wdg.turn_insulation;
        let mlt = 2.0 * (w + depth) + 2.0 * PI * centre;
        let r_dc = COPPER_RESISTIVITY * n * mlt / wdg.wire_area();
        let step = n * per_turn(role);
        let (f_in, f_out) = (mmf, mmf + step);
        mmf = f_out;
        let m = f_in.abs().max(f_out.abs()) / step.abs();
        let porosity = (n * d / height).min(1.0);
        let t_eff = (PI / 4.0).sqrt() * d;
        let delta = dowell_delta(t_eff, porosity, f, COPPER_RESISTIVITY);
        dc[role.index()] += r_dc;
        ac[role.index()] += r_dc * dowell_layer_factor(delta, m)?;
    }
    let ratio = np / ns;
    Ok(AcResistance {
        dc,
        ac,
        total: ac[Role::Primary.index()] + ac[Role::Secondary.index()] * ratio * ratio,
    })
}
