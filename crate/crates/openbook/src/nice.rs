//! Diagram refinement by finger moves.
//!
//! Disc counting is combinatorial only on *nice* diagrams: away from the
//! basepoints and the page boundary, every complementary region must be a
//! bigon or a square.  Identity monodromies produce nice diagrams outright,
//! but twisted monodromies leave a handful of six-cornered interior regions.
//! This module removes them with finger moves: a segment of an image arc on
//! the boundary of such a region is pushed across the region and onward
//! through a chain of interior squares until its tip rests in an exempt
//! region.  The push splits the six-cornered region into two squares, turns
//! every traversed square into three, and leaves one new bigon at the tip;
//! the exempt regions behind the base and around the tip absorb the rest.
//! The move is an isotopy of one image arc supported away from both
//! basepoints, so the homology downstream is unchanged while the diagram
//! becomes nice.
//!
//! The pushed arc has no straight-line realization in the chord model, so
//! the move is performed directly on the cell complex: new crossing vertices
//! are spliced into the crossed cut-arc edges, the pushed edge is replaced by
//! the detour, the local rotation orders are rebuilt, and the faces are
//! retraced.  Winding levels of the new intersection points are computed
//! exactly from the gate geometry of the unrefined complex, so the Alexander
//! grading of every new generator is the true one.

use std::collections::{HashMap, HashSet};

use num_traits::{Signed, Zero};

use crate::complex::{
    rebuild_cell_complex, CellComplex, CellEdge, DirEdge, EdgeCurve, Vertex, VertexKind,
};
use crate::diagram::{gate_segment, DiagramPoint, PageDiagram, PointRole};
use crate::surface::{cross2, rat, PlanePoint, Rat};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Niceness
// ---------------------------------------------------------------------------

/// Faces exempt from the niceness requirement: the two basepoint faces and
/// every face touching the page boundary.  Discs are barred from these faces,
/// so their shapes never enter the differential.
pub(crate) fn exempt_faces(complex: &CellComplex) -> Vec<bool> {
    let mut exempt = vec![false; complex.face_count()];
    exempt[complex.z_face()] = true;
    exempt[complex.w_face()] = true;
    for (f, face) in complex.faces().iter().enumerate() {
        if face.touches_boundary {
            exempt[f] = true;
        }
    }
    exempt
}

/// Non-exempt faces that are neither bigons nor squares.
fn bad_faces(complex: &CellComplex, exempt: &[bool]) -> Vec<usize> {
    (0..complex.face_count())
        .filter(|&f| !exempt[f] && !matches!(complex.corners(f), 2 | 4))
        .collect()
}

/// Check that every non-exempt face is a bigon or a square.
pub(crate) fn check_nice(complex: &CellComplex) -> Result<()> {
    let exempt = exempt_faces(complex);
    let bad = bad_faces(complex, &exempt);
    if bad.is_empty() {
        return Ok(());
    }
    let worst = bad.iter().map(|&f| complex.corners(f)).max().unwrap_or(0);
    Err(Error::internal(format!(
        "{} interior region(s) are neither bigons nor squares (worst has {worst} corners)",
        bad.len()
    )))
}

// ---------------------------------------------------------------------------
// Gate stretches
// ---------------------------------------------------------------------------

/// One stretch of the gate inside a single face, oriented toward `z`:
/// it runs from the level-change vertex `vs` to the deeper one `vd`.
struct GatePiece {
    vs: usize,
    vd: usize,
}

/// Exact plane position of a vertex, read off any incident edge.
fn vertex_position(complex: &CellComplex, v: usize) -> Result<PlanePoint> {
    for h in complex.rotation(v) {
        if let Some(p) = complex.edges()[h.edge].endpoint_position(v) {
            return Ok(p.clone());
        }
    }
    Err(Error::internal("vertex without a plane position"))
}

/// The face containing direction `dir` at a degree-two vertex.
fn face_toward(complex: &CellComplex, v: usize, dir: &PlanePoint) -> Result<usize> {
    let rot = complex.rotation(v);
    if rot.len() != 2 {
        return Err(Error::internal("gate crossing at a branching vertex"));
    }
    for &h in rot {
        let d = complex.edges()[h.edge]
            .leaving_direction(v)
            .ok_or_else(|| Error::internal("missing tangent at a gate crossing"))?;
        let c = cross2(&d.x, &d.y, &dir.x, &dir.y);
        if c.is_zero() {
            return Err(Error::internal("gate runs along an image arc"));
        }
        if c.is_positive() {
            return complex
                .face_of(h)
                .ok_or_else(|| Error::internal("gate stretch along the outer boundary"));
        }
    }
    Err(Error::internal("no sector contains the gate direction"))
}

/// The faces the gate passes through between consecutive crossings.
///
/// The complex subdivides every image arc at its gate crossings, so the gate
/// meets the one-skeleton only at level-change vertices; between consecutive
/// crossings (ordered along the gate) it stays inside one face, which is
/// found from the rotation at the shallower vertex and cross-checked at the
/// deeper one.  The two end stretches — boundary foot to first crossing, and
/// last crossing to `z` — are not recorded: the first lies in the `w` face
/// and the second ends at `z` inside the `z` face, and neither face can be
/// entered by a finger route, which travels through cut-arc edges only.
fn gate_pieces(diagram: &PageDiagram) -> Result<HashMap<usize, Vec<GatePiece>>> {
    let complex = diagram.complex();
    let (foot, z) = gate_segment(diagram.surface());
    let g = PlanePoint {
        x: z.x.clone() - foot.x.clone(),
        y: z.y.clone() - foot.y.clone(),
    };
    let mut items: Vec<(Rat, usize)> = Vec::new();
    for (v, vert) in complex.vertices().iter().enumerate() {
        if !matches!(vert.kind, VertexKind::LevelChange { .. }) {
            continue;
        }
        let pos = vertex_position(complex, v)?;
        let d = PlanePoint {
            x: pos.x.clone() - foot.x.clone(),
            y: pos.y.clone() - foot.y.clone(),
        };
        if !cross2(&g.x, &g.y, &d.x, &d.y).is_zero() {
            return Err(Error::internal("a level-change vertex is off the gate"));
        }
        let along = g.x.clone() * d.x.clone() + g.y.clone() * d.y.clone();
        items.push((along, v));
    }
    items.sort_by(|a, b| a.0.cmp(&b.0));
    let len2 = g.x.clone() * g.x.clone() + g.y.clone() * g.y.clone();
    if let (Some(first), Some(last)) = (items.first(), items.last()) {
        if !first.0.is_positive() || last.0 >= len2 {
            return Err(Error::internal("gate crossing outside the gate stretch"));
        }
    }
    let back = PlanePoint {
        x: -g.x.clone(),
        y: -g.y.clone(),
    };
    let mut by_face: HashMap<usize, Vec<GatePiece>> = HashMap::new();
    for pair in items.windows(2) {
        let (vs, vd) = (pair[0].1, pair[1].1);
        let after = face_toward(complex, vs, &g)?;
        let before = face_toward(complex, vd, &back)?;
        if after != before {
            return Err(Error::internal("gate stretch does not stay inside one face"));
        }
        by_face.entry(after).or_default().push(GatePiece { vs, vd });
    }
    Ok(by_face)
}

// ---------------------------------------------------------------------------
// Face sides and the route search
// ---------------------------------------------------------------------------

/// Decomposition of an interior face walk into maximal same-curve sides.
/// Sides alternate between cut-arc and image-arc segments around the face;
/// each entry lists the walk positions of the side's edges, in walk order.
struct FaceSides {
    sides: Vec<(bool, Vec<usize>)>,
}

fn face_sides(complex: &CellComplex, face: usize) -> Result<FaceSides> {
    let walk = &complex.face(face).walk;
    let fam = |h: &DirEdge| -> Result<bool> {
        match complex.edges()[h.edge].curve {
            EdgeCurve::Alpha(_) => Ok(true),
            EdgeCurve::Beta(_) => Ok(false),
            EdgeCurve::Boundary => {
                Err(Error::internal("side decomposition of a boundary face"))
            }
        }
    };
    let n = walk.len();
    let mut corners = Vec::new();
    for i in 0..n {
        if fam(&walk[i])? != fam(&walk[(i + 1) % n])? {
            corners.push(i);
        }
    }
    if corners.is_empty() {
        return Err(Error::internal("interior face without corners"));
    }
    let m = corners.len();
    let mut sides = Vec::with_capacity(m);
    for s in 0..m {
        let mut idxs = Vec::new();
        let mut i = (corners[s] + 1) % n;
        loop {
            idxs.push(i);
            if i == corners[(s + 1) % m] {
                break;
            }
            i = (i + 1) % n;
        }
        sides.push((fam(&walk[idxs[0]])?, idxs));
    }
    Ok(FaceSides { sides })
}

/// Depth-first continuation of a finger route.  The last entry of `crossed`
/// is a side of the face just exited; the route crosses into the face on the
/// other side.  An exempt landing face ends the route.  A non-exempt face
/// must be a square not seen before; the route then leaves through one of
/// the edges of its other cut-arc side, trying edges that land in an exempt
/// face first.  Each continuation accrues the winding change across the
/// face; branches that would push the strand's level outside `{0, 1}` — the
/// range the grading bookkeeping supports — are discarded as inadmissible.
fn march(
    complex: &CellComplex,
    exempt: &[bool],
    pieces: &HashMap<usize, Vec<GatePiece>>,
    seen: &mut HashSet<usize>,
    crossed: &mut Vec<DirEdge>,
    levels: &mut Vec<u8>,
    level: i32,
) -> Result<bool> {
    let cur = *crossed.last().expect("empty finger route");
    let next = match complex.face_of(cur.twin()) {
        Some(f) => f,
        None => return Ok(false),
    };
    if exempt[next] {
        return Ok(true);
    }
    if seen.contains(&next) || complex.corners(next) != 4 {
        return Ok(false);
    }
    let sides = face_sides(complex, next)?;
    let walk = &complex.face(next).walk;
    let twin = cur.twin();
    let mut entry_side = None;
    for (s, (_, idxs)) in sides.sides.iter().enumerate() {
        if idxs.iter().any(|&i| walk[i] == twin) {
            entry_side = Some(s);
            break;
        }
    }
    let entry_side = entry_side.ok_or_else(|| Error::internal("finger route lost its entry"))?;
    if !sides.sides[entry_side].0 {
        return Err(Error::internal("finger route entered through an image-arc side"));
    }
    let mut exit_side = None;
    for (s, (alpha, _)) in sides.sides.iter().enumerate() {
        if *alpha && s != entry_side {
            if exit_side.is_some() {
                return Err(Error::internal("square with more than two cut-arc sides"));
            }
            exit_side = Some(s);
        }
    }
    let exit_side = match exit_side {
        Some(s) => s,
        None => return Ok(false),
    };
    let mut order: Vec<usize> = sides.sides[exit_side].1.clone();
    order.sort_by_key(|&i| match complex.face_of(walk[i].twin()) {
        Some(f) if exempt[f] => 0usize,
        _ => 1,
    });
    seen.insert(next);
    for &i in &order {
        let out = level + winding_step(complex, pieces, next, twin, walk[i])?;
        if !(0..=1).contains(&out) {
            continue;
        }
        crossed.push(walk[i]);
        levels.push(out as u8);
        if march(complex, exempt, pieces, seen, crossed, levels, out)? {
            return Ok(true);
        }
        crossed.pop();
        levels.pop();
    }
    seen.remove(&next);
    Ok(false)
}

// ---------------------------------------------------------------------------
// Winding bookkeeping
// ---------------------------------------------------------------------------

/// Signed winding change of a route through `face` from side `entry` to side
/// `exit`, counting its crossings with the gate stretches inside the face.
///
/// A stretch separates the face into two parts; the walk positions strictly
/// after the passage of `vs` up to the passage of `vd` form the part on the
/// right of the stretch (the walk runs counterclockwise).  The route crosses
/// the stretch exactly when entry and exit sit in different parts, and
/// crossing from left to right raises the level by one — the same convention
/// as the gate marks, which count a crossing as `+1` when its direction has
/// the gate direction on its left.
fn winding_step(
    complex: &CellComplex,
    pieces: &HashMap<usize, Vec<GatePiece>>,
    face: usize,
    entry: DirEdge,
    exit: DirEdge,
) -> Result<i32> {
    let list = match pieces.get(&face) {
        Some(l) => l,
        None => return Ok(0),
    };
    let walk = &complex.face(face).walk;
    let n = walk.len();
    let pos_of = |h: DirEdge| -> Result<usize> {
        let mut found = None;
        for (i, x) in walk.iter().enumerate() {
            if *x == h {
                if found.is_some() {
                    return Err(Error::internal("edge side repeated on a face walk"));
                }
                found = Some(i);
            }
        }
        found.ok_or_else(|| Error::internal("route side missing from its face walk"))
    };
    let passage_of = |v: usize| -> Result<usize> {
        let mut found = None;
        for (i, x) in walk.iter().enumerate() {
            if complex.head(*x) == v {
                if found.is_some() {
                    return Err(Error::internal("gate crossing passed twice by one face"));
                }
                found = Some(i);
            }
        }
        found.ok_or_else(|| Error::internal("gate crossing missing from its face walk"))
    };
    let pe = pos_of(entry)?;
    let px = pos_of(exit)?;
    let mut delta = 0i32;
    for piece in list {
        let is = passage_of(piece.vs)?;
        let id = passage_of(piece.vd)?;
        let dist = |from: usize, to: usize| (to + n - from) % n;
        let span = dist((is + 1) % n, id);
        let in_right = |p: usize| dist((is + 1) % n, p) <= span;
        match (in_right(pe), in_right(px)) {
            (false, true) => delta += 1,
            (true, false) => delta -= 1,
            _ => {}
        }
    }
    Ok(delta)
}

// ---------------------------------------------------------------------------
// Planning
// ---------------------------------------------------------------------------

/// Everything needed to perform one finger move, computed before any edit.
struct FingerPlan {
    /// Index of the pushed image arc.
    beta: usize,
    /// Edge id of the replaced image-arc edge.
    base: usize,
    /// Its endpoints; the outgoing strand leaves `w1`, the returning strand
    /// rejoins at `w2`.
    w1: usize,
    w2: usize,
    /// Crossed cut-arc edges in push order, each as the side of the face
    /// being exited.
    crossed: Vec<DirEdge>,
    /// Winding level of the pair of new intersection points on `crossed[i]`.
    levels: Vec<u8>,
}

/// Plan the finger move that removes the six-cornered region `d_face`.
///
/// The base is an image-arc edge of the region whose far side is exempt (the
/// strip opened by the push merges into that face).  The first crossed edge
/// lies on the cut-arc side opposite the base side — the only choice that
/// splits a six-cornered region into two squares.  Among all admissible
/// routes the shortest is taken, ties broken by walk order.
fn plan_finger(
    complex: &CellComplex,
    exempt: &[bool],
    pieces: &HashMap<usize, Vec<GatePiece>>,
    d_face: usize,
) -> Result<FingerPlan> {
    let corners = complex.corners(d_face);
    if corners != 6 {
        return Err(Error::unsupported(format!(
            "diagram refinement handles six-cornered regions; found one with {corners} corners"
        )));
    }
    let sides = face_sides(complex, d_face)?;
    if sides.sides.len() != 6 {
        return Err(Error::internal("corner and side counts disagree"));
    }
    let walk = &complex.face(d_face).walk;
    let mut best: Option<(usize, Vec<DirEdge>, Vec<u8>, DirEdge)> = None;
    for s in 0..6 {
        let (is_alpha, bidxs) = &sides.sides[s];
        if *is_alpha {
            continue;
        }
        let se = (s + 3) % 6;
        if !sides.sides[se].0 {
            return Err(Error::internal("opposite sides of a six-cornered region agree"));
        }
        for &bp in bidxs {
            let h_b = walk[bp];
            let behind = match complex.face_of(h_b.twin()) {
                Some(f) => f,
                None => continue,
            };
            if !exempt[behind] {
                continue;
            }
            let base_level = complex.edges()[h_b.edge]
                .level
                .ok_or_else(|| Error::internal("pushed edge without a winding level"))?;
            for &ep in &sides.sides[se].1 {
                let first = i32::from(base_level)
                    + winding_step(complex, pieces, d_face, h_b, walk[ep])?;
                if !(0..=1).contains(&first) {
                    continue;
                }
                let mut seen = HashSet::from([d_face]);
                let mut crossed = vec![walk[ep]];
                let mut levels = vec![first as u8];
                if march(complex, exempt, pieces, &mut seen, &mut crossed, &mut levels, first)? {
                    let better = match &best {
                        None => true,
                        Some((bk, _, _, _)) => crossed.len() < *bk,
                    };
                    if better {
                        best = Some((crossed.len(), crossed, levels, h_b));
                    }
                }
            }
        }
    }
    let (_, crossed, levels, h_b) = best.ok_or_else(|| {
        Error::internal("no admissible finger route out of a six-cornered region")
    })?;
    let base = h_b.edge;
    let e = &complex.edges()[base];
    let (w1, w2) = if h_b.forward {
        (e.from, e.to)
    } else {
        (e.to, e.from)
    };
    let beta = match e.curve {
        EdgeCurve::Beta(j) => j,
        _ => return Err(Error::internal("finger base is not an image-arc edge")),
    };
    Ok(FingerPlan {
        beta,
        base,
        w1,
        w2,
        crossed,
        levels,
    })
}

// ---------------------------------------------------------------------------
// Surgery
// ---------------------------------------------------------------------------

/// Mutable working copy of the complex and the point table during surgery.
struct Surgeon {
    vertices: Vec<Vertex>,
    edges: Vec<CellEdge>,
    rotations: Vec<Vec<DirEdge>>,
    points: Vec<DiagramPoint>,
}

impl Surgeon {
    fn replace_entry(&mut self, v: usize, old: DirEdge, new: DirEdge) -> Result<()> {
        let rot = &mut self.rotations[v];
        let i = rot
            .iter()
            .position(|x| *x == old)
            .ok_or_else(|| Error::internal("rotation entry to replace is missing"))?;
        rot[i] = new;
        Ok(())
    }

    /// A new transverse crossing of `α_alpha` and `β_beta` at winding level
    /// `level`.  The chord coordinates are marked synthetic — the point was
    /// created by an isotopy and lies on no chord of the original model.
    fn new_crossing(&mut self, alpha: usize, beta: usize, level: u8) -> usize {
        let point = self.points.len();
        self.points.push(DiagramPoint {
            alpha,
            beta,
            role: PointRole::Interior,
            level,
            alpha_chord: 0,
            alpha_t: rat(-1, 1),
            beta_chord: 0,
            beta_t: rat(-1, 1),
        });
        let v = self.vertices.len();
        self.vertices.push(Vertex {
            kind: VertexKind::Crossing { point },
        });
        self.rotations.push(Vec::new());
        v
    }

    fn push_edge(&mut self, curve: EdgeCurve, from: usize, to: usize, level: Option<u8>) -> usize {
        let id = self.edges.len();
        self.edges.push(CellEdge::combinatorial(curve, from, to, level));
        id
    }

    /// Perform one planned finger move.
    ///
    /// Each crossed cut-arc edge is subdivided into three by the two strand
    /// crossings; the pushed image-arc edge becomes the first leg of the
    /// outgoing strand, followed by legs between consecutive crossings, the
    /// tip leg, and the returning strand back to `w2`.  The rotation at each
    /// new crossing is fixed by the crossing direction: the outgoing strand
    /// is the wall on the left of the push direction, so `P_i` (outgoing)
    /// sits closer to the far end of the crossed edge exactly when that edge
    /// is traversed forwards by the exited face's walk.
    fn apply(&mut self, plan: &FingerPlan) -> Result<()> {
        let k = plan.crossed.len();
        if k == 0 {
            return Err(Error::internal("finger move without crossings"));
        }
        let mut pv = Vec::with_capacity(k);
        let mut qv = Vec::with_capacity(k);
        for (i, h) in plan.crossed.iter().enumerate() {
            let alpha = match self.edges[h.edge].curve {
                EdgeCurve::Alpha(a) => a,
                _ => return Err(Error::internal("finger crossed a non-cut-arc edge")),
            };
            pv.push(self.new_crossing(alpha, plan.beta, plan.levels[i]));
            qv.push(self.new_crossing(alpha, plan.beta, plan.levels[i]));
        }
        // Subdivide the crossed edges; the first third keeps the original id
        // and with it the rotation entry at the near endpoint.
        let mut mids = Vec::with_capacity(k);
        let mut lasts = Vec::with_capacity(k);
        for (i, h) in plan.crossed.iter().enumerate() {
            let (to, curve) = {
                let e = &self.edges[h.edge];
                (e.to, e.curve)
            };
            let (first, second) = if h.forward { (qv[i], pv[i]) } else { (pv[i], qv[i]) };
            self.edges[h.edge].to = first;
            self.edges[h.edge].clear_geometry();
            let em = self.push_edge(curve, first, second, None);
            let eb = self.push_edge(curve, second, to, None);
            self.replace_entry(
                to,
                DirEdge { edge: h.edge, forward: false },
                DirEdge { edge: eb, forward: false },
            )?;
            mids.push(em);
            lasts.push(eb);
        }
        // The pushed edge becomes the outgoing strand's first leg.
        let (old_from, old_to, base_level, beta_curve) = {
            let e = &self.edges[plan.base];
            (e.from, e.to, e.level, e.curve)
        };
        match beta_curve {
            EdgeCurve::Beta(j) if j == plan.beta => {}
            _ => return Err(Error::internal("finger base is not on the pushed arc")),
        }
        if !(old_from == plan.w1 && old_to == plan.w2)
            && !(old_from == plan.w2 && old_to == plan.w1)
        {
            return Err(Error::internal("finger base endpoints disagree with the plan"));
        }
        self.edges[plan.base].from = plan.w1;
        self.edges[plan.base].to = pv[0];
        self.edges[plan.base].clear_geometry();
        let mut outs = vec![plan.base];
        for i in 1..k {
            outs.push(self.push_edge(beta_curve, pv[i - 1], pv[i], Some(plan.levels[i - 1])));
        }
        let tip = self.push_edge(beta_curve, pv[k - 1], qv[k - 1], Some(plan.levels[k - 1]));
        let mut backs = vec![usize::MAX; k];
        for i in (1..k).rev() {
            backs[i] = self.push_edge(beta_curve, qv[i], qv[i - 1], Some(plan.levels[i - 1]));
        }
        backs[0] = self.push_edge(beta_curve, qv[0], plan.w2, base_level);
        if old_from != plan.w1 {
            // the strand now leaves w1 through the forward side of the
            // reused id
            self.replace_entry(
                plan.w1,
                DirEdge { edge: plan.base, forward: false },
                DirEdge { edge: plan.base, forward: true },
            )?;
        }
        let w2_old = DirEdge {
            edge: plan.base,
            forward: old_from == plan.w2,
        };
        self.replace_entry(plan.w2, w2_old, DirEdge { edge: backs[0], forward: false })?;
        // Rotations at the new crossings.
        for i in 0..k {
            let h = plan.crossed[i];
            let (p_to_u, p_to_v, q_to_u, q_to_v) = if h.forward {
                // order along the crossed edge: near end, Q, P, far end
                (
                    DirEdge { edge: mids[i], forward: false },
                    DirEdge { edge: lasts[i], forward: true },
                    DirEdge { edge: h.edge, forward: false },
                    DirEdge { edge: mids[i], forward: true },
                )
            } else {
                // order along the crossed edge: near end, P, Q, far end
                (
                    DirEdge { edge: h.edge, forward: false },
                    DirEdge { edge: mids[i], forward: true },
                    DirEdge { edge: mids[i], forward: false },
                    DirEdge { edge: lasts[i], forward: true },
                )
            };
            let p_to_prev = DirEdge { edge: outs[i], forward: false };
            let p_to_next = if i + 1 < k {
                DirEdge { edge: outs[i + 1], forward: true }
            } else {
                DirEdge { edge: tip, forward: true }
            };
            let q_to_tip = if i + 1 < k {
                DirEdge { edge: backs[i + 1], forward: false }
            } else {
                DirEdge { edge: tip, forward: false }
            };
            let q_to_w2 = DirEdge { edge: backs[i], forward: true };
            if h.forward {
                self.rotations[pv[i]] = vec![p_to_v, p_to_prev, p_to_u, p_to_next];
                self.rotations[qv[i]] = vec![q_to_v, q_to_w2, q_to_u, q_to_tip];
            } else {
                self.rotations[pv[i]] = vec![p_to_v, p_to_next, p_to_u, p_to_prev];
                self.rotations[qv[i]] = vec![q_to_v, q_to_tip, q_to_u, q_to_w2];
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

/// A diagram refined to niceness: the extended point table, the rebuilt cell
/// complex, and the number of finger moves applied.
pub(crate) struct RefinedDiagram {
    pub points: Vec<DiagramPoint>,
    pub complex: CellComplex,
    pub fingers: usize,
}

/// Refine a diagram until every interior region is a bigon or a square.
///
/// Returns `None` when the diagram is already nice.  Otherwise each
/// offending region is removed by one finger move.  All moves are planned on
/// the original complex — whose exact geometry fixes the winding levels of
/// the new intersection points — checked for independence, applied together,
/// and the result is revalidated structurally and for niceness.
pub(crate) fn refine_to_nice(diagram: &PageDiagram) -> Result<Option<RefinedDiagram>> {
    let complex = diagram.complex();
    let exempt = exempt_faces(complex);
    let bad = bad_faces(complex, &exempt);
    if bad.is_empty() {
        return Ok(None);
    }
    let pieces = gate_pieces(diagram)?;
    let mut plans = Vec::with_capacity(bad.len());
    for &f in &bad {
        plans.push(plan_finger(complex, &exempt, &pieces, f)?);
    }
    let mut touched: HashSet<usize> = HashSet::new();
    for plan in &plans {
        if !touched.insert(plan.base) {
            return Err(Error::internal("finger moves interfere on a pushed edge"));
        }
        for h in &plan.crossed {
            if !touched.insert(h.edge) {
                return Err(Error::internal("finger moves interfere on a crossed edge"));
            }
        }
    }
    // Basepoint faces are tracked through the rebuild by marker sides that
    // no move touches; the bites taken out of exempt faces stay clear of the
    // basepoints, which sit deep in the face remainders.
    let marker = |face: usize| -> Result<DirEdge> {
        complex
            .face(face)
            .walk
            .iter()
            .copied()
            .find(|h| !touched.contains(&h.edge))
            .ok_or_else(|| Error::internal("no surviving marker side for a basepoint face"))
    };
    let z_marker = marker(complex.z_face())?;
    let w_marker = marker(complex.w_face())?;
    let mut surgeon = Surgeon {
        vertices: complex.vertices().to_vec(),
        edges: complex.edges().to_vec(),
        rotations: (0..complex.vertex_count())
            .map(|v| complex.rotation(v).to_vec())
            .collect(),
        points: diagram.points().to_vec(),
    };
    for plan in &plans {
        surgeon.apply(plan)?;
    }
    let refined = rebuild_cell_complex(
        complex.genus(),
        surgeon.vertices,
        surgeon.edges,
        surgeon.rotations,
        z_marker,
        w_marker,
    )?;
    check_nice(&refined)?;
    Ok(Some(RefinedDiagram {
        points: surgeon.points,
        complex: refined,
        fingers: plans.len(),
    }))
}
