//! Drawing a tiling graph snapshot.
//!
//! The witness `(α, ℓ)` is solved exactly; coordinates are only computed in
//! floating point at the very end, to place points in the SVG.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt::Write as _;

use pentile::exactmath::Rational;
use pentile::search::{CaseContext, Certificate, CertificateOptions, SearchError};
use pentile::tiling::{AngleLabel, FaceKind, Snapshot, TilingGraph};
use num_traits::ToPrimitive;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error(transparent)]
    Case(#[from] SearchError),
    #[error("no pentagon satisfies the snapshot's length program")]
    InfeasibleSnapshot,
    #[error("could not find a pentagon for the snapshot within the certificate budget")]
    NoWitness,
}

/// One placed tile, corners listed along the face cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct PlacedTile {
    pub face: usize,
    pub mirrored: bool,
    /// `(vertex, corner label, position)`.
    pub corners: Vec<(usize, u8, [f64; 2])>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderModel {
    pub alpha: [f64; 5],
    pub lengths: [f64; 5],
    pub positions: Vec<Option<[f64; 2]>>,
    pub tiles: Vec<PlacedTile>,
    /// Largest disagreement between two routes to the same vertex.
    pub max_mismatch: f64,
}

/// Exact witness for a snapshot: angles from the case polytope and lengths
/// satisfying its program and the closure equations.
pub fn witness(snap: &Snapshot) -> Result<(Vec<Rational>, Vec<f64>), RenderError> {
    let ctx = CaseContext::for_case(snap.case)?;
    let opts = CertificateOptions { max_depth: 6, max_boxes: 64, max_candidates: 64 };
    match ctx.certificate(&snap.lengths, &opts) {
        Certificate::Feasible { alpha, lengths } => Ok((alpha, lengths.iter().map(|l| l.to_f64()).collect())),
        Certificate::InfeasibleCertified => Err(RenderError::InfeasibleSnapshot),
        Certificate::Unknown => Err(RenderError::NoWitness),
    }
}

pub fn model(snap: &Snapshot) -> Result<RenderModel, RenderError> {
    let (alpha, lengths) = witness(snap)?;
    let alpha: Vec<f64> = alpha.iter().map(|a| a.to_f64().unwrap_or(f64::NAN)).collect();
    Ok(layout(&snap.graph, &alpha.try_into().unwrap(), &lengths.try_into().unwrap()))
}

fn angle_value(a: AngleLabel, alpha: &[f64; 5]) -> Option<f64> {
    match a {
        AngleLabel::Corner(i) => Some(alpha[i as usize - 1] * PI),
        AngleLabel::Empty => Some(0.0),
        AngleLabel::Pi => Some(PI),
        AngleLabel::Unknown => None,
    }
}

/// Places every vertex reachable from vertex 0 by walking known angles.
/// Vertex 0 sits at the origin with its first outgoing edge along the x axis.
pub fn layout(g: &TilingGraph, alpha: &[f64; 5], lengths: &[f64; 5]) -> RenderModel {
    let n = g.halves().iter().map(|h| h.origin).max().map_or(0, |m| m + 1);
    let mut positions: Vec<Option<[f64; 2]>> = vec![None; n];
    let mut directions: Vec<Option<f64>> = vec![None; g.halves().len()];
    let mut max_mismatch = 0.0f64;
    let mut queue = VecDeque::new();
    if let Some(v0) = g.vertex_ids().next() {
        positions[v0] = Some([0.0, 0.0]);
        directions[g.outgoing(v0)[0]] = Some(0.0);
        queue.push_back(v0);
    }
    while let Some(v) = queue.pop_front() {
        let out = g.outgoing(v);
        let k = out.len();
        let Some(start) = out.iter().position(|&h| directions[h].is_some()) else { continue };
        // Counter-clockwise from the known edge, crossing each known angle.
        for step in 0..k {
            let h = out[(start + step) % k];
            let next = out[(start + step + 1) % k];
            let (Some(d), Some(a)) = (directions[h], angle_value(g.half(h).angle, alpha)) else { break };
            directions[next].get_or_insert(d + a);
        }
        // And clockwise, for edges beyond an unknown angle.
        for step in 0..k {
            let h = out[(start + k - step) % k];
            let prev = out[(start + 2 * k - step - 1) % k];
            let (Some(d), Some(a)) = (directions[h], angle_value(g.half(prev).angle, alpha)) else { break };
            directions[prev].get_or_insert(d - a);
        }
        let p = positions[v].expect("queued vertices are placed");
        for &h in &out {
            let Some(d) = directions[h] else { continue };
            let len = lengths[g.half(h).label as usize - 1];
            let q = [p[0] + len * d.cos(), p[1] + len * d.sin()];
            let twin = g.half(h).twin;
            let w = g.half(twin).origin;
            directions[twin].get_or_insert(d + PI);
            match positions[w] {
                Some(old) => max_mismatch = max_mismatch.max((old[0] - q[0]).hypot(old[1] - q[1])),
                None => {
                    positions[w] = Some(q);
                    queue.push_back(w);
                }
            }
        }
    }
    let tiles = g
        .faces()
        .iter()
        .enumerate()
        .filter_map(|(f, face)| {
            let FaceKind::Normal { mirrored } = face.kind else { return None };
            let corners = g
                .face_cycle(f)
                .iter()
                .map(|&h| {
                    let e = g.half(h);
                    let label = match e.angle {
                        AngleLabel::Corner(i) => i,
                        _ => 0,
                    };
                    positions[e.origin].map(|p| (e.origin, label, p))
                })
                .collect::<Option<Vec<_>>>()?;
            Some(PlacedTile { face: f, mirrored, corners })
        })
        .collect();
    RenderModel { alpha: *alpha, lengths: *lengths, positions, tiles, max_mismatch }
}

/// Pairs of tiles whose interiors overlap by more than `tol`, found with
/// separating axes (tiles are convex).
pub fn overlapping_tiles(m: &RenderModel, tol: f64) -> Vec<(usize, usize)> {
    let poly = |t: &PlacedTile| t.corners.iter().map(|c| c.2).collect::<Vec<_>>();
    let separated = |a: &[[f64; 2]], b: &[[f64; 2]]| {
        [a, b].iter().any(|p| {
            (0..p.len()).any(|i| {
                let (u, v) = (p[i], p[(i + 1) % p.len()]);
                let axis = [v[1] - u[1], u[0] - v[0]];
                let norm = axis[0].hypot(axis[1]);
                if norm == 0.0 {
                    return false;
                }
                let proj = |q: &[f64; 2]| (q[0] * axis[0] + q[1] * axis[1]) / norm;
                let (amin, amax) = a.iter().map(proj).fold((f64::MAX, f64::MIN), |(lo, hi), x| (lo.min(x), hi.max(x)));
                let (bmin, bmax) = b.iter().map(proj).fold((f64::MAX, f64::MIN), |(lo, hi), x| (lo.min(x), hi.max(x)));
                amax <= bmin + tol || bmax <= amin + tol
            })
        })
    };
    let polys: Vec<Vec<[f64; 2]>> = m.tiles.iter().map(poly).collect();
    let mut out = Vec::new();
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            if !separated(&polys[i], &polys[j]) {
                out.push((m.tiles[i].face, m.tiles[j].face));
            }
        }
    }
    out
}

/// SVG with one polygon per tile, corner labels, and an arrow from corner 1
/// to corner 2 of the first tile.
pub fn svg(m: &RenderModel, scale: f64) -> String {
    let pts: Vec<[f64; 2]> = m.tiles.iter().flat_map(|t| t.corners.iter().map(|c| c.2)).collect();
    let (mut x0, mut y0, mut x1, mut y1) = (0.0f64, 0.0f64, 1.0f64, 1.0f64);
    if !pts.is_empty() {
        x0 = pts.iter().map(|p| p[0]).fold(f64::MAX, f64::min);
        x1 = pts.iter().map(|p| p[0]).fold(f64::MIN, f64::max);
        y0 = pts.iter().map(|p| p[1]).fold(f64::MAX, f64::min);
        y1 = pts.iter().map(|p| p[1]).fold(f64::MIN, f64::max);
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-9);
    let (w, h) = ((x1 - x0 + 2.0 * pad) * scale, (y1 - y0 + 2.0 * pad) * scale);
    // y grows downwards in SVG.
    let tx = |p: [f64; 2]| ((p[0] - x0 + pad) * scale, (y1 + pad - p[1]) * scale);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.3}" height="{h:.3}" viewBox="0 0 {w:.3} {h:.3}">"#
    );
    let _ = writeln!(
        out,
        r#"<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" markerHeight="6" orient="auto"><path d="M0,0 L10,5 L0,10 z"/></marker></defs>"#
    );
    for (k, t) in m.tiles.iter().enumerate() {
        let points: Vec<String> = t
            .corners
            .iter()
            .map(|c| {
                let (x, y) = tx(c.2);
                format!("{x:.9},{y:.9}")
            })
            .collect();
        let (fill, width) = if k == 0 { ("#f2d9a0", 2.5) } else if t.mirrored { ("#cfe0f0", 1.0) } else { ("#e4f0cf", 1.0) };
        let _ = writeln!(
            out,
            r#"<polygon class="tile" data-face="{}" points="{}" fill="{fill}" stroke="black" stroke-width="{width}"/>"#,
            t.face,
            points.join(" ")
        );
        let cx = t.corners.iter().map(|c| c.2[0]).sum::<f64>() / t.corners.len() as f64;
        let cy = t.corners.iter().map(|c| c.2[1]).sum::<f64>() / t.corners.len() as f64;
        for c in &t.corners {
            let p = [c.2[0] + 0.18 * (cx - c.2[0]), c.2[1] + 0.18 * (cy - c.2[1])];
            let (x, y) = tx(p);
            let _ = writeln!(
                out,
                r#"<text x="{x:.3}" y="{y:.3}" font-size="{:.1}" text-anchor="middle" dominant-baseline="middle">{}</text>"#,
                (0.06 * scale).max(6.0),
                c.1
            );
        }
    }
    if let Some(t) = m.tiles.first() {
        let find = |label: u8| t.corners.iter().find(|c| c.1 == label).map(|c| c.2);
        if let (Some(a), Some(b)) = (find(1), find(2)) {
            let ((ax, ay), (bx, by)) = (tx(a), tx(b));
            let _ = writeln!(
                out,
                r#"<line class="s1s2" x1="{ax:.3}" y1="{ay:.3}" x2="{bx:.3}" y2="{by:.3}" stroke="crimson" stroke-width="2" marker-end="url(#arrow)"/>"#
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
