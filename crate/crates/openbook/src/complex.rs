//! The cell complex of a page diagram.
//!
//! The union of the `α`-arcs, the `β`-arcs and the boundary circle cuts the
//! page into cells.  This module records that decomposition exactly:
//!
//! * **vertices** — transverse crossings, shared arc endpoints on the
//!   boundary, boundary corner points of the polygon model, and two kinds of
//!   degree-two marker: *portals*, where a curve passes through a glued cut
//!   side of the polygon, and *level changes*, where a `β`-arc crosses the
//!   gate and its winding level about the basepoint `z` steps up or down;
//! * **edges** — maximal curve segments between consecutive vertices, each
//!   `β`-edge labelled with its constant level, plus boundary segments;
//! * **faces** — complementary regions, traced from the rotation system
//!   (the counterclockwise order of edge ends around each vertex) so that
//!   every face keeps the surface on its left.
//!
//! The faces containing the two basepoints are identified by exact ray
//! casting and recorded as `z_face` and `w_face`.  Consistency is enforced
//! structurally: vertex degrees, the Euler count `V − E + F = 1 − 2g`,
//! connectivity, and a clean partition of the admissible edge sides into
//! faces.  Holomorphic-disc counting downstream only ever reads this
//! combinatorial record; the rational geometry is used once, here, to build
//! it.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::diagram::{DiagramPoint, GateMark, PointRole};
use crate::surface::{
    circle_point, cross2, rat, segment_intersection, CurveKind, CurvePath, PlanePoint, Rat,
    Surface,
};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Cells
// ---------------------------------------------------------------------------

/// What a vertex of the complex is.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VertexKind {
    /// Transverse crossing of an `α`-arc and a `β`-arc; `point` indexes the
    /// diagram's intersection points.
    Crossing { point: usize },
    /// Shared boundary endpoint of `α_j` and `β_j` (a `c` or `c′` point).
    Endpoint { point: usize },
    /// Passage of `β_beta` through a glued cut side (exit number `exit`).
    /// Degree two; joins the two polygon copies of one surface point.
    Portal { beta: usize, exit: usize },
    /// Gate crossing of `β_beta`: the winding level about `z` changes by
    /// `mark` when travelling through this vertex.
    LevelChange { beta: usize, mark: i8 },
    /// Corner point of the polygon on the boundary circle, labelled by its
    /// boundary rank.
    BoundaryCorner { rank: u32 },
}

#[derive(Clone, Debug)]
pub struct Vertex {
    pub kind: VertexKind,
}

/// Which curve an edge is a segment of.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum EdgeCurve {
    Alpha(usize),
    Beta(usize),
    Boundary,
}

/// One edge of the complex: a curve or boundary segment from `from` to `to`.
/// `β`-edges carry their winding level about `z`.
#[derive(Clone, Debug)]
pub struct CellEdge {
    pub curve: EdgeCurve,
    pub from: usize,
    pub to: usize,
    pub level: Option<u8>,
    /// Exact plane endpoints of straight (curve) segments; `None` for
    /// boundary segments at corner ends.
    pub(crate) p_from: Option<PlanePoint>,
    pub(crate) p_to: Option<PlanePoint>,
    /// Direction of the edge leaving `from`, respectively leaving `to`
    /// (pointing back along the edge).  Present wherever the incident vertex
    /// needs a rotation (degree above two).
    tan_from: Option<PlanePoint>,
    tan_to: Option<PlanePoint>,
}

impl CellEdge {
    /// A purely combinatorial edge with no plane geometry attached.  Used by
    /// the diagram refinement, which modifies the complex by isotopy moves
    /// that have no canonical straight-line realization.
    pub(crate) fn combinatorial(
        curve: EdgeCurve,
        from: usize,
        to: usize,
        level: Option<u8>,
    ) -> CellEdge {
        CellEdge {
            curve,
            from,
            to,
            level,
            p_from: None,
            p_to: None,
            tan_from: None,
            tan_to: None,
        }
    }

    /// Forget the plane geometry of this edge.  Called on edges whose
    /// endpoints were moved by a combinatorial isotopy.
    pub(crate) fn clear_geometry(&mut self) {
        self.p_from = None;
        self.p_to = None;
        self.tan_from = None;
        self.tan_to = None;
    }

    /// Leaving direction at an endpoint vertex, if geometry is attached.
    pub(crate) fn leaving_direction(&self, v: usize) -> Option<&PlanePoint> {
        if self.from == v {
            self.tan_from.as_ref()
        } else if self.to == v {
            self.tan_to.as_ref()
        } else {
            None
        }
    }

    /// Exact plane position of an endpoint vertex, if geometry is attached.
    pub(crate) fn endpoint_position(&self, v: usize) -> Option<&PlanePoint> {
        if self.from == v {
            self.p_from.as_ref()
        } else if self.to == v {
            self.p_to.as_ref()
        } else {
            None
        }
    }
}

/// A side of an edge: `forward` travels `from → to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DirEdge {
    pub edge: usize,
    pub forward: bool,
}

impl DirEdge {
    pub fn twin(self) -> DirEdge {
        DirEdge { edge: self.edge, forward: !self.forward }
    }
}

/// One face: the cyclic walk of edge sides keeping the face on the left.
#[derive(Clone, Debug)]
pub struct CellFace {
    pub walk: Vec<DirEdge>,
    pub touches_boundary: bool,
}

/// The full cell decomposition of a page diagram.
#[derive(Clone, Debug)]
pub struct CellComplex {
    vertices: Vec<Vertex>,
    edges: Vec<CellEdge>,
    /// Outgoing edge sides around each vertex in counterclockwise order.
    rotations: Vec<Vec<DirEdge>>,
    faces: Vec<CellFace>,
    /// `face_of[edge][direction]`, indexed by `forward as usize`; `usize::MAX`
    /// for the one inadmissible side of each boundary edge.
    face_of: Vec<[usize; 2]>,
    z_face: usize,
    w_face: usize,
    genus: u32,
}

impl CellComplex {
    pub fn genus(&self) -> u32 {
        self.genus
    }
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
    pub fn face_count(&self) -> usize {
        self.faces.len()
    }
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }
    pub fn edges(&self) -> &[CellEdge] {
        &self.edges
    }
    pub fn faces(&self) -> &[CellFace] {
        &self.faces
    }
    pub fn face(&self, id: usize) -> &CellFace {
        &self.faces[id]
    }
    pub fn z_face(&self) -> usize {
        self.z_face
    }
    pub fn w_face(&self) -> usize {
        self.w_face
    }

    /// Face on the given side of an edge.  The outward side of a boundary
    /// edge has no face and returns `None`.
    pub fn face_of(&self, h: DirEdge) -> Option<usize> {
        let f = self.face_of[h.edge][usize::from(h.forward)];
        (f != usize::MAX).then_some(f)
    }

    /// Outgoing edge sides around a vertex in counterclockwise order.  The
    /// sector between an outgoing side `h` and its counterclockwise successor
    /// is the face on the left of `h`, i.e. `face_of(h)`.
    pub fn rotation(&self, v: usize) -> &[DirEdge] {
        &self.rotations[v]
    }

    /// Head vertex of an edge side.
    pub fn head(&self, h: DirEdge) -> usize {
        let e = &self.edges[h.edge];
        if h.forward {
            e.to
        } else {
            e.from
        }
    }

    /// Tail vertex of an edge side.
    pub fn tail(&self, h: DirEdge) -> usize {
        self.head(h.twin())
    }

    /// Number of corners of a face: vertices where its walk switches between
    /// an `α`-edge and a `β`-edge.
    pub fn corners(&self, face: usize) -> usize {
        self.corner_vertices(face).len()
    }

    /// The corner vertices of a face, in walk order.
    pub fn corner_vertices(&self, face: usize) -> Vec<usize> {
        let walk = &self.faces[face].walk;
        let mut out = Vec::new();
        for (i, h) in walk.iter().enumerate() {
            let next = &walk[(i + 1) % walk.len()];
            let a = self.edges[h.edge].curve;
            let b = self.edges[next.edge].curve;
            let is_corner = matches!(
                (a, b),
                (EdgeCurve::Alpha(_), EdgeCurve::Beta(_)) | (EdgeCurve::Beta(_), EdgeCurve::Alpha(_))
            );
            if is_corner {
                out.push(self.head(*h));
            }
        }
        out
    }

    /// Structural invariants: degrees, Euler count, connectivity, the face
    /// partition, and corner parity away from the boundary.
    pub(crate) fn check_consistency(&self) -> Result<()> {
        // Degrees determined by vertex kind.
        let mut degree = vec![0usize; self.vertices.len()];
        for e in &self.edges {
            if e.from == e.to {
                return Err(Error::internal("cell complex contains a loop edge"));
            }
            degree[e.from] += 1;
            degree[e.to] += 1;
        }
        for (v, vert) in self.vertices.iter().enumerate() {
            let want = match vert.kind {
                VertexKind::Crossing { .. } | VertexKind::Endpoint { .. } => 4,
                VertexKind::Portal { .. }
                | VertexKind::LevelChange { .. }
                | VertexKind::BoundaryCorner { .. } => 2,
            };
            if degree[v] != want {
                return Err(Error::internal(format!(
                    "vertex {v} has degree {} but its kind requires {want}",
                    degree[v]
                )));
            }
            if self.rotations[v].len() != want {
                return Err(Error::internal("rotation size disagrees with vertex degree"));
            }
        }
        // Euler count of a connected genus-g surface with one boundary circle.
        let euler = self.vertices.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64;
        if euler != 1 - 2 * i64::from(self.genus) {
            return Err(Error::internal(format!(
                "Euler count {euler} differs from {}",
                1 - 2 * i64::from(self.genus)
            )));
        }
        // Connectivity of the 1-skeleton.
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            let a = find(&mut parent, e.from);
            let b = find(&mut parent, e.to);
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        for v in 0..self.vertices.len() {
            if find(&mut parent, v) != root {
                return Err(Error::internal("cell complex is not connected"));
            }
        }
        // Faces partition the admissible edge sides and close up under the
        // rotation rule.
        let mut seen = vec![[false; 2]; self.edges.len()];
        for (fid, face) in self.faces.iter().enumerate() {
            if face.walk.is_empty() {
                return Err(Error::internal("empty face walk"));
            }
            for (i, h) in face.walk.iter().enumerate() {
                let slot = &mut seen[h.edge][usize::from(h.forward)];
                if *slot {
                    return Err(Error::internal("edge side appears in two face walks"));
                }
                *slot = true;
                if self.face_of[h.edge][usize::from(h.forward)] != fid {
                    return Err(Error::internal("face index disagrees with face walk"));
                }
                let next = next_side(&self.edges, &self.rotations, *h)?;
                if next != face.walk[(i + 1) % face.walk.len()] {
                    return Err(Error::internal("face walk breaks the rotation rule"));
                }
            }
            let touches = face
                .walk
                .iter()
                .any(|h| matches!(self.edges[h.edge].curve, EdgeCurve::Boundary));
            if touches != face.touches_boundary {
                return Err(Error::internal("stale boundary flag on a face"));
            }
            if !touches && self.corners(fid) % 2 != 0 {
                return Err(Error::internal("interior face with odd corner count"));
            }
        }
        for (e, edge) in self.edges.iter().enumerate() {
            for fwd in [false, true] {
                let admissible = fwd || !matches!(edge.curve, EdgeCurve::Boundary);
                if admissible != seen[e][usize::from(fwd)] {
                    return Err(Error::internal(
                        "admissible edge sides are not exactly the traced ones",
                    ));
                }
            }
        }
        if self.z_face == self.w_face {
            return Err(Error::internal("basepoints z and w share a face"));
        }
        if !self.faces[self.w_face].touches_boundary {
            return Err(Error::internal("the w basepoint must sit in a boundary face"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let vertices: Vec<Value> = self
            .vertices
            .iter()
            .map(|v| match &v.kind {
                VertexKind::Crossing { point } => json!({"kind": "crossing", "point": point}),
                VertexKind::Endpoint { point } => json!({"kind": "endpoint", "point": point}),
                VertexKind::Portal { beta, exit } => {
                    json!({"kind": "portal", "beta": beta, "exit": exit})
                }
                VertexKind::LevelChange { beta, mark } => {
                    json!({"kind": "level_change", "beta": beta, "mark": mark})
                }
                VertexKind::BoundaryCorner { rank } => {
                    json!({"kind": "boundary_corner", "rank": rank})
                }
            })
            .collect();
        let edges: Vec<Value> = self
            .edges
            .iter()
            .map(|e| {
                let curve = match e.curve {
                    EdgeCurve::Alpha(i) => json!({"alpha": i}),
                    EdgeCurve::Beta(j) => json!({"beta": j}),
                    EdgeCurve::Boundary => json!("boundary"),
                };
                json!({"curve": curve, "from": e.from, "to": e.to, "level": e.level})
            })
            .collect();
        let faces: Vec<Value> = self
            .faces
            .iter()
            .enumerate()
            .map(|(fid, f)| {
                let walk: Vec<Value> = f
                    .walk
                    .iter()
                    .map(|h| json!([h.edge, if h.forward { "+" } else { "-" }]))
                    .collect();
                json!({
                    "walk": walk,
                    "corners": self.corners(fid),
                    "touches_boundary": f.touches_boundary,
                })
            })
            .collect();
        json!({
            "vertices": vertices,
            "edges": edges,
            "faces": faces,
            "z_face": self.z_face,
            "w_face": self.w_face,
            "euler": 1 - 2 * i64::from(self.genus),
        })
    }
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

fn pp_sub(a: &PlanePoint, b: &PlanePoint) -> PlanePoint {
    PlanePoint {
        x: a.x.clone() - b.x.clone(),
        y: a.y.clone() - b.y.clone(),
    }
}

fn pp_lerp(a: &PlanePoint, b: &PlanePoint, t: &Rat) -> PlanePoint {
    PlanePoint {
        x: a.x.clone() + t.clone() * (b.x.clone() - a.x.clone()),
        y: a.y.clone() + t.clone() * (b.y.clone() - a.y.clone()),
    }
}

/// Counterclockwise boundary tangent at a point of the unit circle.
fn ccw_tangent(p: &PlanePoint) -> PlanePoint {
    PlanePoint {
        x: -p.y.clone(),
        y: p.x.clone(),
    }
}

fn neg(p: &PlanePoint) -> PlanePoint {
    PlanePoint {
        x: -p.x.clone(),
        y: -p.y.clone(),
    }
}

/// Strict counterclockwise comparison of direction vectors, starting from the
/// positive `x`-axis.  Equal directions are rejected beforehand.
fn angle_half(d: &PlanePoint) -> u8 {
    if d.y.is_positive() || (d.y.is_zero() && d.x.is_positive()) {
        0
    } else {
        1
    }
}

/// A straight edge between two stations of a chord walk.
struct Station {
    t: Rat,
    vertex: usize,
    level_step: i8,
}

/// Build the cell complex of a page diagram.  `points` must be the diagram's
/// intersection points and `marks` the per-arc gate crossings, exactly as
/// produced by the diagram builder.
pub(crate) fn build_cell_complex(
    surface: &Surface,
    alphas: &[CurvePath],
    betas: &[CurvePath],
    marks: &[Vec<GateMark>],
    points: &[DiagramPoint],
) -> Result<CellComplex> {
    let genus = surface.genus();
    let n = surface.side_count();
    let mut vertices: Vec<Vertex> = Vec::new();
    let mut edges: Vec<CellEdge> = Vec::new();

    // -- vertices -----------------------------------------------------------
    let mut v_of_point = vec![usize::MAX; points.len()];
    for (id, p) in points.iter().enumerate() {
        let kind = match p.role {
            PointRole::D | PointRole::Interior => VertexKind::Crossing { point: id },
            PointRole::C | PointRole::CPrime => VertexKind::Endpoint { point: id },
        };
        v_of_point[id] = vertices.len();
        vertices.push(Vertex { kind });
    }
    let mut portal: Vec<Vec<usize>> = Vec::new();
    for (j, beta) in betas.iter().enumerate() {
        let mut row = Vec::new();
        for exit in 0..beta.exits.len() {
            row.push(vertices.len());
            vertices.push(Vertex {
                kind: VertexKind::Portal { beta: j, exit },
            });
        }
        portal.push(row);
    }
    let mut gate_vertex: Vec<Vec<usize>> = Vec::new();
    for (j, ms) in marks.iter().enumerate() {
        let mut row = Vec::new();
        for m in ms {
            row.push(vertices.len());
            vertices.push(Vertex {
                kind: VertexKind::LevelChange { beta: j, mark: m.mark },
            });
        }
        gate_vertex.push(row);
    }
    let mut junction = vec![usize::MAX; (4 * genus + 1) as usize];
    for rank in 1..=4 * genus {
        junction[rank as usize] = vertices.len();
        vertices.push(Vertex {
            kind: VertexKind::BoundaryCorner { rank },
        });
    }

    let mut push_segment = |curve: EdgeCurve,
                            from: usize,
                            to: usize,
                            level: Option<u8>,
                            pa: PlanePoint,
                            pb: PlanePoint|
     -> Result<()> {
        if from == to {
            return Err(Error::internal("degenerate curve segment"));
        }
        let d = pp_sub(&pb, &pa);
        if d.x.is_zero() && d.y.is_zero() {
            return Err(Error::internal("zero-length curve segment"));
        }
        edges.push(CellEdge {
            curve,
            from,
            to,
            level,
            tan_from: Some(d.clone()),
            tan_to: Some(neg(&d)),
            p_from: Some(pa),
            p_to: Some(pb),
        });
        Ok(())
    };

    // -- α edges ------------------------------------------------------------
    for (i, alpha) in alphas.iter().enumerate() {
        if alpha.chord_count() != 1 {
            return Err(Error::internal("cut arcs must be single chords"));
        }
        let (a, b) = alpha.chord(0);
        let pa = circle_point(&a.theta(), n);
        let pb = circle_point(&b.theta(), n);
        let mut stations: Vec<(Rat, usize)> = Vec::new();
        for (id, p) in points.iter().enumerate() {
            if p.alpha == i {
                if p.alpha_chord != 0 {
                    return Err(Error::internal("intersection point off the cut-arc chord"));
                }
                stations.push((p.alpha_t.clone(), v_of_point[id]));
            }
        }
        stations.sort_by(|u, v| u.0.cmp(&v.0));
        if stations.first().map(|s| s.0.clone()) != Some(Rat::zero())
            || stations.last().map(|s| s.0.clone()) != Some(Rat::one())
        {
            return Err(Error::internal("cut arc is missing its endpoint stations"));
        }
        for w in stations.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::internal("coincident stations on a cut arc"));
            }
            push_segment(
                EdgeCurve::Alpha(i),
                w[0].1,
                w[1].1,
                None,
                pp_lerp(&pa, &pb, &w[0].0),
                pp_lerp(&pa, &pb, &w[1].0),
            )?;
        }
    }

    // -- β edges ------------------------------------------------------------
    for (j, beta) in betas.iter().enumerate() {
        let chords = beta.chords();
        let mut stations: Vec<Vec<Station>> = (0..chords.len()).map(|_| Vec::new()).collect();
        for (id, p) in points.iter().enumerate() {
            if p.beta == j {
                stations[p.beta_chord].push(Station {
                    t: p.beta_t.clone(),
                    vertex: v_of_point[id],
                    level_step: 0,
                });
            }
        }
        for (mi, m) in marks[j].iter().enumerate() {
            stations[m.chord].push(Station {
                t: m.t.clone(),
                vertex: gate_vertex[j][mi],
                level_step: m.mark,
            });
        }
        for (exit, &v) in portal[j].iter().enumerate() {
            stations[exit].push(Station {
                t: Rat::one(),
                vertex: v,
                level_step: 0,
            });
            stations[exit + 1].push(Station {
                t: Rat::zero(),
                vertex: v,
                level_step: 0,
            });
        }
        let mut level = 0i32;
        for (c, list) in stations.iter_mut().enumerate() {
            list.sort_by(|u, v| u.t.cmp(&v.t));
            if list.first().map(|s| s.t.clone()) != Some(Rat::zero())
                || list.last().map(|s| s.t.clone()) != Some(Rat::one())
            {
                return Err(Error::internal("image arc chord is missing its end stations"));
            }
            let (a, b) = &chords[c];
            let pa = circle_point(&a.theta(), n);
            let pb = circle_point(&b.theta(), n);
            for idx in 1..list.len() {
                if list[idx - 1].t == list[idx].t {
                    return Err(Error::internal("coincident stations on an image arc"));
                }
                push_segment(
                    EdgeCurve::Beta(j),
                    list[idx - 1].vertex,
                    list[idx].vertex,
                    Some(level as u8),
                    pp_lerp(&pa, &pb, &list[idx - 1].t),
                    pp_lerp(&pa, &pb, &list[idx].t),
                )?;
                level += i32::from(list[idx].level_step);
                if !(0..=1).contains(&level) {
                    return Err(Error::internal("image arc level left {0,1}"));
                }
            }
        }
        if level != 0 {
            return Err(Error::internal("image arc level does not return to zero"));
        }
    }

    // -- boundary edges -----------------------------------------------------
    let mut side_anchors: Vec<Vec<(Rat, usize)>> = vec![Vec::new(); n as usize];
    for (id, p) in points.iter().enumerate() {
        let anchor = match p.role {
            PointRole::C => match &alphas[p.alpha].kind {
                CurveKind::Arc { start, .. } => start.clone(),
                CurveKind::Closed => return Err(Error::internal("cut arcs must be arcs")),
            },
            PointRole::CPrime => match &alphas[p.alpha].kind {
                CurveKind::Arc { end, .. } => end.clone(),
                CurveKind::Closed => return Err(Error::internal("cut arcs must be arcs")),
            },
            _ => continue,
        };
        side_anchors[anchor.side as usize].push((anchor.pos, v_of_point[id]));
    }
    let cycle = surface.delta_cycle().to_vec();
    let walk_rank = |i: usize| -> u32 {
        if i == 0 {
            4 * genus
        } else {
            i as u32
        }
    };
    let mut delta_star_edge = usize::MAX;
    for (i, &side) in cycle.iter().enumerate() {
        let start_rank = walk_rank(i);
        let end_rank = walk_rank((i + 1) % cycle.len());
        // The polygon corner data must agree with the walk ranks.
        if surface.class_rank(surface.corner_class(side)) != start_rank
            || surface.class_rank(surface.corner_class((side + 1) % n)) != end_rank
        {
            return Err(Error::internal("boundary walk disagrees with corner ranks"));
        }
        let mut st: Vec<(Rat, usize, bool)> = Vec::new();
        st.push((Rat::zero(), junction[start_rank as usize], false));
        let mut here = side_anchors[side as usize].clone();
        here.sort_by(|u, v| u.0.cmp(&v.0));
        for (pos, v) in here {
            if pos.is_zero() || pos == Rat::one() {
                return Err(Error::internal("anchor at a polygon corner"));
            }
            st.push((pos, v, true));
        }
        st.push((Rat::one(), junction[end_rank as usize], false));
        if side == n - 1 && st.len() != 2 {
            return Err(Error::internal("anchors are not allowed on the basepoint stretch"));
        }
        for w in st.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::internal("coincident boundary stations"));
            }
            let tangent = |pos: &Rat, outward_forward: bool| -> Option<PlanePoint> {
                let p = circle_point(
                    &(Rat::from(BigInt::from(side)) + pos.clone()),
                    n,
                );
                let t = ccw_tangent(&p);
                Some(if outward_forward { t } else { neg(&t) })
            };
            let (p_from, tan_from) = if w[0].2 {
                let p = circle_point(&(Rat::from(BigInt::from(side)) + w[0].0.clone()), n);
                (Some(p), tangent(&w[0].0, true))
            } else {
                (None, None)
            };
            let (p_to, tan_to) = if w[1].2 {
                let p = circle_point(&(Rat::from(BigInt::from(side)) + w[1].0.clone()), n);
                (Some(p), tangent(&w[1].0, false))
            } else {
                (None, None)
            };
            let id = edges.len();
            edges.push(CellEdge {
                curve: EdgeCurve::Boundary,
                from: w[0].1,
                to: w[1].1,
                level: None,
                p_from,
                p_to,
                tan_from,
                tan_to,
            });
            if side == n - 1 {
                delta_star_edge = id;
            }
        }
    }
    if delta_star_edge == usize::MAX {
        return Err(Error::internal("missing basepoint-stretch boundary edge"));
    }

    // -- rotation system ----------------------------------------------------
    let mut rotations: Vec<Vec<DirEdge>> = vec![Vec::new(); vertices.len()];
    let mut dirs: Vec<Vec<Option<PlanePoint>>> = vec![Vec::new(); vertices.len()];
    for (eid, e) in edges.iter().enumerate() {
        rotations[e.from].push(DirEdge { edge: eid, forward: true });
        dirs[e.from].push(e.tan_from.clone());
        rotations[e.to].push(DirEdge { edge: eid, forward: false });
        dirs[e.to].push(e.tan_to.clone());
    }
    for v in 0..vertices.len() {
        if rotations[v].len() <= 2 {
            continue;
        }
        let ds: Vec<PlanePoint> = dirs[v]
            .iter()
            .map(|d| {
                d.clone()
                    .ok_or_else(|| Error::internal("missing tangent at a branching vertex"))
            })
            .collect::<Result<Vec<_>>>()?;
        for a in 0..ds.len() {
            for b in (a + 1)..ds.len() {
                let c = cross2(&ds[a].x, &ds[a].y, &ds[b].x, &ds[b].y);
                let dot = ds[a].x.clone() * ds[b].x.clone() + ds[a].y.clone() * ds[b].y.clone();
                if c.is_zero() && dot.is_positive() {
                    return Err(Error::internal("two edges leave a vertex in the same direction"));
                }
            }
        }
        let mut order: Vec<usize> = (0..rotations[v].len()).collect();
        order.sort_by(|&a, &b| {
            let (da, db) = (&ds[a], &ds[b]);
            angle_half(da).cmp(&angle_half(db)).then_with(|| {
                let c = cross2(&da.x, &da.y, &db.x, &db.y);
                if c.is_positive() {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Greater
                }
            })
        });
        rotations[v] = order.iter().map(|&k| rotations[v][k]).collect();
    }

    // -- faces --------------------------------------------------------------
    let (faces, face_of) = trace_faces(&edges, &rotations)?;

    // -- basepoint faces ----------------------------------------------------
    let z_face = locate_basepoint_face(
        surface,
        &edges,
        &face_of,
        delta_star_edge,
        &crate::diagram::z_plane_point(surface),
    )?;
    let w_face = locate_basepoint_face(
        surface,
        &edges,
        &face_of,
        delta_star_edge,
        &crate::diagram::w_plane_point(surface),
    )?;

    let complex = CellComplex {
        vertices,
        edges,
        rotations,
        faces,
        face_of,
        z_face,
        w_face,
        genus,
    };
    complex.check_consistency()?;
    Ok(complex)
}

/// Reassemble a cell complex from an edited vertex/edge/rotation record.
///
/// Faces are retraced from the rotation system alone, so the caller only has
/// to keep the local rotation orders correct.  The basepoint faces cannot be
/// relocated by ray casting — edited complexes have no global geometry — so
/// they are identified by *marker* sides: `z_marker` and `w_marker` must be
/// edge sides whose left face contains `z`, respectively `w`.  All structural
/// invariants are re-checked.
pub(crate) fn rebuild_cell_complex(
    genus: u32,
    vertices: Vec<Vertex>,
    edges: Vec<CellEdge>,
    rotations: Vec<Vec<DirEdge>>,
    z_marker: DirEdge,
    w_marker: DirEdge,
) -> Result<CellComplex> {
    let (faces, face_of) = trace_faces(&edges, &rotations)?;
    let face_at = |h: DirEdge| -> Result<usize> {
        let f = face_of[h.edge][usize::from(h.forward)];
        if f == usize::MAX {
            return Err(Error::internal("basepoint marker side has no face"));
        }
        Ok(f)
    };
    let z_face = face_at(z_marker)?;
    let w_face = face_at(w_marker)?;
    let complex = CellComplex {
        vertices,
        edges,
        rotations,
        faces,
        face_of,
        z_face,
        w_face,
        genus,
    };
    complex.check_consistency()?;
    Ok(complex)
}

/// The edge side after `h` in the face keeping the surface on the left:
/// arriving at the head of `h`, take the outgoing side immediately before the
/// twin of `h` in counterclockwise order.
fn next_side(edges: &[CellEdge], rotations: &[Vec<DirEdge>], h: DirEdge) -> Result<DirEdge> {
    let e = &edges[h.edge];
    let head = if h.forward { e.to } else { e.from };
    let rot = &rotations[head];
    let idx = rot
        .iter()
        .position(|x| *x == h.twin())
        .ok_or_else(|| Error::internal("rotation does not contain an incident edge"))?;
    Ok(rot[(idx + rot.len() - 1) % rot.len()])
}

fn trace_faces(
    edges: &[CellEdge],
    rotations: &[Vec<DirEdge>],
) -> Result<(Vec<CellFace>, Vec<[usize; 2]>)> {
    let admissible =
        |h: DirEdge| -> bool { h.forward || !matches!(edges[h.edge].curve, EdgeCurve::Boundary) };
    let mut face_of = vec![[usize::MAX; 2]; edges.len()];
    let mut faces: Vec<CellFace> = Vec::new();
    for eid in 0..edges.len() {
        for forward in [true, false] {
            let start = DirEdge { edge: eid, forward };
            if !admissible(start) || face_of[eid][usize::from(forward)] != usize::MAX {
                continue;
            }
            let mut walk = Vec::new();
            let mut cur = start;
            loop {
                if face_of[cur.edge][usize::from(cur.forward)] != usize::MAX {
                    return Err(Error::internal("face trace re-entered a visited edge side"));
                }
                face_of[cur.edge][usize::from(cur.forward)] = faces.len();
                walk.push(cur);
                let next = next_side(edges, rotations, cur)?;
                if !admissible(next) {
                    return Err(Error::internal(
                        "face walk stepped onto the outward side of the boundary",
                    ));
                }
                if next == start {
                    break;
                }
                cur = next;
            }
            let touches_boundary = walk
                .iter()
                .any(|h| matches!(edges[h.edge].curve, EdgeCurve::Boundary));
            faces.push(CellFace { walk, touches_boundary });
        }
    }
    Ok((faces, face_of))
}

/// The face containing a basepoint, found by casting an exact segment from
/// the basepoint to a point on the basepoint boundary stretch.  The nearest
/// curve-edge hit decides the face by which side of that edge the basepoint
/// lies on; with no hits the segment reaches the boundary first and the
/// basepoint lives in the face against the stretch itself.
///
/// The cast target is *not* the gate foot: the level-change vertices lie on
/// the gate by construction, so a cast along the gate would thread exactly
/// through them.  Any cast that still passes through a vertex is rejected.
fn locate_basepoint_face(
    surface: &Surface,
    edges: &[CellEdge],
    face_of: &[[usize; 2]],
    delta_star_edge: usize,
    point: &PlanePoint,
) -> Result<usize> {
    let n = surface.side_count();
    let target = circle_point(&(Rat::from(BigInt::from(n - 1)) + rat(1, 3)), n);
    let ray = pp_sub(&target, point);
    let mut best: Option<(Rat, usize)> = None;
    for (eid, e) in edges.iter().enumerate() {
        if matches!(e.curve, EdgeCurve::Boundary) {
            continue;
        }
        let (pa, pb) = match (&e.p_from, &e.p_to) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::internal("curve edge without plane endpoints")),
        };
        // The basepoint itself must be clear of the edge.
        let d = pp_sub(pb, pa);
        let r = pp_sub(point, pa);
        if cross2(&d.x, &d.y, &r.x, &r.y).is_zero() {
            let dot = d.x.clone() * r.x.clone() + d.y.clone() * r.y.clone();
            let len2 = d.x.clone() * d.x.clone() + d.y.clone() * d.y.clone();
            if dot.is_positive() && dot < len2 {
                return Err(Error::internal("a basepoint lies on a curve edge"));
            }
        }
        // The cast segment must not thread through the edge's endpoints.
        for p in [pa, pb] {
            let v = pp_sub(p, point);
            if cross2(&ray.x, &ray.y, &v.x, &v.y).is_zero() {
                let dot = ray.x.clone() * v.x.clone() + ray.y.clone() * v.y.clone();
                let len2 = ray.x.clone() * ray.x.clone() + ray.y.clone() * ray.y.clone();
                if dot.is_positive() && dot < len2 {
                    return Err(Error::internal("basepoint cast passes through a vertex"));
                }
            }
        }
        if let Some((t, _)) = segment_intersection(point, &target, pa, pb) {
            match &best {
                Some((bt, _)) if *bt < t => {}
                _ => best = Some((t, eid)),
            }
        }
    }
    let face = match best {
        None => face_of[delta_star_edge][1],
        Some((_, eid)) => {
            let e = &edges[eid];
            let (pa, pb) = (e.p_from.as_ref().unwrap(), e.p_to.as_ref().unwrap());
            let d = pp_sub(pb, pa);
            let r = pp_sub(point, pa);
            let side = cross2(&d.x, &d.y, &r.x, &r.y);
            if side.is_zero() {
                return Err(Error::internal("degenerate basepoint side test"));
            }
            // The face on the left of the forward side is the forward face.
            face_of[eid][usize::from(side.is_positive())]
        }
    };
    if face == usize::MAX {
        return Err(Error::internal("basepoint located on a missing face"));
    }
    Ok(face)
}
