use super::{
    BuildOptions, CrossSection, Domain, EdgeDetail, ElectrodeSegment, Role, TrapFamily,
    TrapParams,
};
use crate::error::{Error, Result};
use crate::math::{Rect, Vec2};
use std::f64::consts::SQRT_2;

use EdgeDetail::{Coarse, Fine};

fn p(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}

/// Builds the cross-section of `params.family()` and checks its invariants.
///
/// Gaps are cut symmetrically from both neighbours: by `gap/2` where two
/// electrodes meet along a line and by `gap/√2` along each leg where they
/// meet at a right-angle corner.
pub fn build_cross_section(params: &TrapParams, opts: &BuildOptions) -> Result<CrossSection> {
    for (name, value) in [
        ("gap", opts.gap),
        ("separation", opts.separation),
        ("extent_factor", opts.extent_factor),
    ] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositiveLength {
                name: name.into(),
                value,
            });
        }
    }
    let ctx = Ctx {
        hg: opts.gap / 2.0,
        cg: opts.gap / SQRT_2,
        x_ext: opts.extent_factor * opts.separation,
    };
    let family = params.family();
    let (segments, solids, seed) = match family {
        TrapFamily::SetSymmetric => set_symmetric(params, &ctx)?,
        TrapFamily::SetAntisymmetric => set_antisymmetric(params, &ctx)?,
        TrapFamily::SimpleTrenchSymmetric => simple_trench_symmetric(params, &ctx)?,
        TrapFamily::SimpleTrenchAntisymmetric => simple_trench_antisymmetric(params, &ctx)?,
        TrapFamily::StackedTrenchSymmetric => stacked_trench_symmetric(params, &ctx)?,
        TrapFamily::StackedTrenchAntisymmetric => stacked_trench_antisymmetric(params, &ctx)?,
        TrapFamily::WaferSymmetric => wafer(params, opts, true)?,
        TrapFamily::WaferAntisymmetric => wafer(params, opts, false)?,
    };
    let mut cs = CrossSection {
        family,
        segments,
        gap: opts.gap,
        extent: ctx.x_ext,
        domain: Domain {
            solids,
            substrate: family.has_substrate().then_some(0.0),
        },
        seed_region: seed,
    };
    for (id, role) in &opts.roles {
        let mut found = false;
        for s in cs.segments.iter_mut().filter(|s| &s.electrode_id == id) {
            s.role = *role;
            found = true;
        }
        if !found {
            return Err(Error::UnknownElectrode(id.clone()));
        }
    }
    cs.validate()?;
    Ok(cs)
}

struct Ctx {
    hg: f64,
    cg: f64,
    x_ext: f64,
}

type Built = (Vec<ElectrodeSegment>, Vec<Rect>, Rect);

fn require(cond: bool, what: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::SelfIntersectingGeometry(what.into()))
    }
}

/// Coplanar strips on y = 0 given as `(id, role, x_left, x_right)` nominal
/// intervals that tile the plane; gaps are cut at the shared boundaries.
fn strips(ctx: &Ctx, tiles: &[(&str, Role, f64, f64)]) -> Result<Vec<ElectrodeSegment>> {
    let mut out = Vec::new();
    for (i, (id, role, l, r)) in tiles.iter().enumerate() {
        let l = if i == 0 { *l } else { l + ctx.hg };
        let r = if i + 1 == tiles.len() { *r } else { r - ctx.hg };
        require(r > l, format!("strip `{id}` is narrower than the gap"))?;
        out.push(ElectrodeSegment::new(id, *role, vec![p(l, 0.0), p(r, 0.0)]));
    }
    Ok(out)
}

fn set_symmetric(params: &TrapParams, ctx: &Ctx) -> Result<Built> {
    let (a, b) = (params.get("a"), params.get("b"));
    let (x1, x2, xe) = (b / 2.0, b / 2.0 + a, ctx.x_ext);
    require(xe > x2 + ctx.hg, "extent does not clear the RF strips")?;
    let segments = strips(
        ctx,
        &[
            ("dc_left", Role::Dc, -xe, -x2),
            ("rf_left", Role::Rf, -x2, -x1),
            ("dc_center", Role::Dc, -x1, x1),
            ("rf_right", Role::Rf, x1, x2),
            ("dc_right", Role::Dc, x2, xe),
        ],
    )?;
    let h = (x1 * x2).sqrt();
    let seed = Rect::new(p(-0.75 * h, 0.4 * h), p(0.75 * h, 1.5 * h));
    Ok((segments, Vec::new(), seed))
}

fn set_antisymmetric(params: &TrapParams, ctx: &Ctx) -> Result<Built> {
    let phi = params.get("phi");
    let xe = ctx.x_ext;
    require(xe > phi + ctx.hg, "extent does not clear the inner strips")?;
    let segments = strips(
        ctx,
        &[
            ("dc_outer", Role::Dc, -xe, -phi),
            ("rf_inner", Role::Rf, -phi, 0.0),
            ("dc_inner", Role::Dc, 0.0, phi),
            ("rf_outer", Role::Rf, phi, xe),
        ],
    )?;
    let seed = Rect::new(p(-0.6 * phi, 0.4 * phi), p(0.6 * phi, 1.6 * phi));
    Ok((segments, Vec::new(), seed))
}

/// Right-hand trench wall with inner face at `xw`: the inner face from the
/// corner cut up to `height`, across the top, down the outer face and out
/// along the floor to the extent. Outer face and floor are coarse.
fn right_wall(ctx: &Ctx, id: &str, role: Role, xw: f64, alpha: f64, height: f64) -> ElectrodeSegment {
    let xo = xw + alpha;
    ElectrodeSegment::new(
        id,
        role,
        vec![
            p(xw, ctx.cg),
            p(xw, height),
            p(xo, height),
            p(xo, 0.0),
            p(ctx.x_ext, 0.0),
        ],
    )
    .with_detail(vec![Fine, Fine, Coarse, Coarse])
}

fn simple_trench_symmetric(params: &TrapParams, ctx: &Ctx) -> Result<Built> {
    let (c, d, beta, alpha) = (
        params.get("c"),
        params.get("d"),
        params.get("beta"),
        params.get("alpha"),
    );
    // c is the RF floor width, d the central DC width
    let xw = d / 2.0 + c;
    require(ctx.x_ext > xw + alpha + ctx.cg, "extent does not clear the walls")?;
    require(beta > ctx.cg, "wall is lower than the gap")?;
    let mut segments = strips(
        ctx,
        &[
            ("rf_left", Role::Rf, -xw, -d / 2.0),
            ("dc_center", Role::Dc, -d / 2.0, d / 2.0),
            ("rf_right", Role::Rf, d / 2.0, xw),
        ],
    )?;
    // the floor meets the walls at corners, not collinear neighbours
    segments[0].polyline[0].x += ctx.cg;
    segments[2].polyline[1].x -= ctx.cg;
    require(
        segments[0].polyline[1].x > segments[0].polyline[0].x,
        "RF strip is narrower than the gap",
    )?;
    let wall = right_wall(ctx, "dc_wall_right", Role::Dc, xw, alpha, beta);
    segments.push(wall.mirrored("dc_wall_left", Role::Dc));
    segments.push(wall);
    let solids = vec![
        Rect::new(p(xw, 0.0), p(xw + alpha, beta)),
        Rect::new(p(-xw - alpha, 0.0), p(-xw, beta)),
    ];
    let seed = Rect::new(p(-0.8 * xw, 0.05 * beta.min(2.0 * xw)), p(0.8 * xw, 0.9 * beta));
    Ok((segments, solids, seed))
}

fn simple_trench_antisymmetric(params: &TrapParams, ctx: &Ctx) -> Result<Built> {
    let (e, f, alpha) = (params.get("e"), params.get("f"), params.get("alpha"));
    require(ctx.x_ext > e + alpha + ctx.cg, "extent does not clear the walls")?;
    require(f > ctx.cg, "wall is lower than the gap")?;
    require(e > ctx.hg + ctx.cg, "floor electrode is narrower than the gap")?;
    let segments = vec![
        ElectrodeSegment::new("rf_floor", Role::Rf, vec![p(-e + ctx.cg, 0.0), p(-ctx.hg, 0.0)]),
        ElectrodeSegment::new("dc_floor", Role::Dc, vec![p(ctx.hg, 0.0), p(e - ctx.cg, 0.0)]),
        right_wall(ctx, "rf_wall", Role::Rf, e, alpha, f).mirrored("dc_wall", Role::Dc),
        right_wall(ctx, "rf_wall", Role::Rf, e, alpha, f),
    ];
    let solids = vec![
        Rect::new(p(e, 0.0), p(e + alpha, f)),
        Rect::new(p(-e - alpha, 0.0), p(-e, f)),
    ];
    let seed = Rect::new(p(-0.8 * e, 0.05 * e), p(0.8 * e, (0.9 * f).max(2.0 * e)));
    Ok((segments, solids, seed))
}

/// Ground plane outside a pair of walls, from the outer corner cut to the extent.
fn outer_floor(ctx: &Ctx, id: &str, xo: f64) -> ElectrodeSegment {
    ElectrodeSegment::new(id, Role::Ground, vec![p(xo + ctx.cg, 0.0), p(ctx.x_ext, 0.0)])
        .with_detail(vec![Coarse])
}

/// Upper electrode of a stacked wall: inner face from `y0` to the top, the top
/// face, and the whole outer face down to the corner cut at the substrate.
fn wall_cap(ctx: &Ctx, id: &str, role: Role, xw: f64, alpha: f64, y0: f64, top: f64) -> ElectrodeSegment {
    let xo = xw + alpha;
    ElectrodeSegment::new(
        id,
        role,
        vec![p(xw, y0), p(xw, top), p(xo, top), p(xo, ctx.cg)],
    )
    .with_detail(vec![Fine, Fine, Coarse])
}

fn stacked_trench_symmetric(params: &TrapParams, ctx: &Ctx) -> Result<Built> {
    let (g, h, eps, mu, alpha) = (
        params.get("g"),
        params.get("h"),
        params.get("epsilon"),
        params.get("mu"),
        params.get("alpha"),
    );
    let xw = mu / 2.0;
    let xo = xw + alpha;
    require(ctx.x_ext > xo + 2.0 * ctx.cg, "extent does not clear the walls")?;
    require(h > ctx.hg, "RF electrode starts inside the gap")?;
    require(g > 2.0 * ctx.hg, "RF electrode is shorter than the gap")?;
    require(eps > h + g + ctx.hg, "wall is not taller than the RF electrode")?;
    let ground = ElectrodeSegment::new(
        "gnd_trench",
        Role::Ground,
        vec![
            p(-xw, h - ctx.hg),
            p(-xw, 0.0),
            p(xw, 0.0),
            p(xw, h - ctx.hg),
        ],
    );
    let rf = ElectrodeSegment::new(
        "rf_right",
        Role::Rf,
        vec![p(xw, h + ctx.hg), p(xw, h + g - ctx.hg)],
    );
    let cap = wall_cap(ctx, "dc_right", Role::Dc, xw, alpha, h + g + ctx.hg, eps);
    let floor = outer_floor(ctx, "gnd_right", xo);
    let segments = vec![
        ground,
        floor.mirrored("gnd_left", Role::Ground),
        rf.mirrored("rf_left", Role::Rf),
        cap.mirrored("dc_left", Role::Dc),
        rf,
        cap,
        floor,
    ];
    let solids = vec![
        Rect::new(p(xw, 0.0), p(xo, eps)),
        Rect::new(p(-xo, 0.0), p(-xw, eps)),
    ];
    let seed = Rect::new(p(-0.8 * xw, 0.05 * eps), p(0.8 * xw, 0.95 * eps));
    Ok((segments, solids, seed))
}

fn stacked_trench_antisymmetric(params: &TrapParams, ctx: &Ctx) -> Result<Built> {
    let (i, j, xi, alpha) = (
        params.get("i"),
        params.get("j"),
        params.get("xi"),
        params.get("alpha"),
    );
    let xw = i / 2.0;
    let xo = xw + alpha;
    require(ctx.x_ext > xo + 2.0 * ctx.cg, "extent does not clear the walls")?;
    require(j > ctx.hg, "bottom electrode is shorter than the gap")?;
    require(xi > j + ctx.hg, "wall is not taller than the bottom electrode")?;
    require(xw > ctx.cg, "trench is narrower than the gap")?;
    // each bottom electrode wraps from the trench centre across half the floor
    let bottom = ElectrodeSegment::new(
        "dc_bottom",
        Role::Dc,
        vec![p(ctx.hg, 0.0), p(xw, 0.0), p(xw, j - ctx.hg)],
    );
    let cap = wall_cap(ctx, "rf_top", Role::Rf, xw, alpha, j + ctx.hg, xi);
    let outer = outer_floor(ctx, "gnd_right", xo);
    let segments = vec![
        outer.mirrored("gnd_left", Role::Ground),
        bottom.mirrored("rf_bottom", Role::Rf),
        cap.mirrored("dc_top", Role::Dc),
        bottom,
        cap,
        outer,
    ];
    let solids = vec![
        Rect::new(p(xw, 0.0), p(xo, xi)),
        Rect::new(p(-xo, 0.0), p(-xw, xi)),
    ];
    let seed = Rect::new(p(-0.8 * xw, 0.05 * xi), p(0.8 * xw, 0.95 * xi));
    Ok((segments, solids, seed))
}

/// Two-layer wafer stack centred on the origin. The slot half-width is chosen
/// so the nearest electrode corner is `opts.separation` from the centre.
///
/// Antisymmetric: each slab is one electrode, RF on the top-left/bottom-right
/// diagonal. Symmetric: the slot-facing vertical face of every slab is RF and
/// its remaining three faces are DC.
fn wafer(params: &TrapParams, opts: &BuildOptions, symmetric: bool) -> Result<Built> {
    let (k, lambda, tau) = (params.get("k"), params.get("lambda"), params.get("tau"));
    let cg = opts.gap / SQRT_2;
    // k is the distance from the ion plane to the inner face of each wafer
    let y0 = k;
    let y1 = y0 + lambda;
    let corner_y = if symmetric { y0 + cg } else { y0 };
    let s = opts.separation;
    require(s > corner_y, "wafer spacing exceeds the separation")?;
    let w = (s * s - corner_y * corner_y).sqrt();
    if symmetric {
        require(lambda > 2.0 * cg, "wafer is thinner than the gap")?;
    }

    // electrodes of the top-right slab; the others are mirror images
    let top_right: Vec<ElectrodeSegment> = if symmetric {
        vec![
            ElectrodeSegment::new("rf_top_right", Role::Rf, vec![p(w, y0 + cg), p(w, y1 - cg)]),
            ElectrodeSegment::new(
                "dc_top_right",
                Role::Dc,
                vec![p(w + cg, y1), p(w + tau, y1), p(w + tau, y0), p(w + cg, y0)],
            ),
        ]
    } else {
        vec![ElectrodeSegment::new(
            "dc_top_right",
            Role::Dc,
            vec![p(w, y0), p(w, y1), p(w + tau, y1), p(w + tau, y0), p(w, y0)],
        )]
    };
    let mut segments = Vec::new();
    for (pos, sx, sy) in [
        ("top_left", -1.0, 1.0),
        ("bottom_left", -1.0, -1.0),
        ("top_right", 1.0, 1.0),
        ("bottom_right", 1.0, -1.0),
    ] {
        for s in &top_right {
            let role = if !symmetric && sx * sy < 0.0 {
                match s.role {
                    Role::Rf => Role::Dc,
                    _ => Role::Rf,
                }
            } else {
                s.role
            };
            let stem = if role == Role::Rf { "rf" } else { "dc" };
            segments.push(ElectrodeSegment {
                electrode_id: format!("{stem}_{pos}"),
                role,
                polyline: s.polyline.iter().map(|q| p(sx * q.x, sy * q.y)).collect(),
                detail: s.detail.clone(),
            });
        }
    }
    let slab = Rect::new(p(w, y0), p(w + tau, y1));
    let solids = vec![
        slab,
        slab.mirror_x(),
        Rect::new(p(w, -y1), p(w + tau, -y0)),
        Rect::new(p(-w - tau, -y1), p(-w, -y0)),
    ];
    let half = 0.5 * w;
    let seed = Rect::new(p(-half, -half), p(half, half));
    Ok((segments, solids, seed))
}
