//! Doubly pointed page diagrams for open-book monodromies.
//!
//! A fibered knot is presented by a page `S` (genus `g`, one boundary circle)
//! and a monodromy `φ`.  The diagram model lives entirely on the page:
//!
//! * the `α`-system is a basis of disjoint properly embedded arcs
//!   `α_0, …, α_{2g−1}` cutting `S` into a disc;
//! * the `β`-system is the image system `β_j = φ(β̃_j)`, where the *seed*
//!   `β̃_j` is a pushoff of `α_j` supported near the boundary: it shares both
//!   endpoints with `α_j`, travels once around a collar of `∂S` at a shallow
//!   depth, turns inward, crosses the page body (meeting `α_j` once more
//!   transversally away from the collar), and returns along a deeper collar
//!   lap.  Seed and source arc cobound only collar material, so `β̃_j ≃ α_j`
//!   rel endpoints and the `β`-system presents exactly the monodromy `φ`.
//!
//! Two basepoints make the intersection theory knot-aware.  The basepoint `z`
//! sits in the collar between the shallow laps and the deep laps, on the
//! boundary stretch (`δ*`) that carries no arc endpoints; `w` sits between
//! the shallow laps and the boundary itself.  Each intersection point
//! `x ∈ α_i ∩ β_j` gets a *level* `ℓ(x) ∈ {0, 1}`: the winding number of the
//! initial segment of `β_j` (from its first endpoint up to `x`) around `z`.
//! Level 0 means the point is collar material, level 1 means page body.  A
//! *generator* in Alexander grading `A ∈ {−g, −g+1}` is a tuple of
//! intersection points, one on each `α`-arc, on pairwise distinct `β`-arcs,
//! with `A = −g + Σ ℓ`.
//!
//! The shared endpoints come in pairs `c_j` (first endpoints) and `c_j′`
//! (second endpoints).  The two are interchangeable collar artifacts of the
//! pushoff; the quotient identifying them is implemented by
//! [`quotient_canonicalize`], which rewrites any generator through `c_j′` to
//! the representative through `c_j`.
//!
//! Everything is carried out in exact rational arithmetic on the polygon
//! model of [`crate::surface`]; the combinatorial record of the resulting
//! curve arrangement (vertices, edges, faces, basepoint faces) is the
//! [`CellComplex`] built by [`crate::complex`].

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::complex::{build_cell_complex, CellComplex};
use crate::mapping::{resolve_curve, MonodromyWord};
use crate::surface::{
    arc_primary_side, circle_point, cross2, partner_side, rat, segment_intersection, CurveKind,
    CurvePath, PlanePoint, Rat, SidePoint, Surface,
};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Layout constants
// ---------------------------------------------------------------------------
//
// All collar traffic near the boundary stretch `δ*` is organised into lanes:
// a path at *depth* `λ` crosses the gap between the last and first cut sides
// on the chord from `(side n−2, 1−λ)` to `(side 0, λ)`.  Shallow laps use the
// strictly decreasing spiral depths `λS(rank)`, deep laps use the strictly
// increasing track depths `λT(rank)`, and the basepoints sit on the two
// separating depths:
//
//     0 < w_depth < λS(4g) < … < λS(1) < z_depth < λT(1) < … < λT(4g) < 1/8.
//
// Keeping every lane away from `1/8`, `1/2`, `7/8` (the coordinates of the
// standard twist curves and the boundary-parallel curve) means Dehn twists
// act on the diagram arcs without any generic-position renaming.

/// Shallow (spiral) lane depth for an endpoint rank `1..=4g`.
fn spiral_depth(genus: u32, rank: u32) -> Rat {
    debug_assert!((1..=4 * genus).contains(&rank));
    rat(
        i64::from(8 * genus + 2 - rank),
        256 * i64::from(4 * genus + 1),
    )
}

/// Deep (track) lane depth for an endpoint rank `1..=4g`.
fn track_depth(genus: u32, rank: u32) -> Rat {
    debug_assert!((1..=4 * genus).contains(&rank));
    rat(
        i64::from(4 * genus + 1 + rank),
        64 * i64::from(4 * genus + 1),
    )
}

/// Depth of the `z` basepoint: between every shallow and every deep lane.
pub(crate) fn z_depth() -> Rat {
    rat(3, 256)
}

/// Depth of the `w` basepoint: between the boundary and every lane.
pub(crate) fn w_depth() -> Rat {
    rat(1, 2048)
}

/// Midpoint of the virtual chord at the given depth across the `δ*` gap.
fn gap_chord_midpoint(surface: &Surface, depth: &Rat) -> PlanePoint {
    let n = surface.side_count();
    let p = circle_point(&SidePoint::new(n - 2, Rat::one() - depth.clone()).theta(), n);
    let q = circle_point(&SidePoint::new(0, depth.clone()).theta(), n);
    let half = rat(1, 2);
    PlanePoint {
        x: (p.x + q.x) * half.clone(),
        y: (p.y + q.y) * half,
    }
}

/// The plane position of the basepoint `z`.
pub(crate) fn z_plane_point(surface: &Surface) -> PlanePoint {
    gap_chord_midpoint(surface, &z_depth())
}

/// The plane position of the basepoint `w`.
pub(crate) fn w_plane_point(surface: &Surface) -> PlanePoint {
    gap_chord_midpoint(surface, &w_depth())
}

/// The *gate*: a segment from the midpoint of the `δ*` boundary side to `z`.
/// A path winds once around `z` relative to the boundary exactly when its
/// signed crossing count with the gate is one; levels of intersection points
/// are prefix sums of these signed crossings.
pub(crate) fn gate_segment(surface: &Surface) -> (PlanePoint, PlanePoint) {
    let n = surface.side_count();
    let mid = Rat::from_integer(BigInt::from(n - 1)) + rat(1, 2);
    (circle_point(&mid, n), z_plane_point(surface))
}

// ---------------------------------------------------------------------------
// The arc systems
// ---------------------------------------------------------------------------

/// Anchor positions used for arc endpoints on a boundary side.
fn anchor_low() -> Rat {
    rat(3, 8)
}
fn anchor_high() -> Rat {
    rat(5, 8)
}

/// The two boundary endpoints (anchors) of cut arc `arc`.
///
/// With `P` the primary cut side of the arc, the first endpoint sits on side
/// `P−1` at position 5/8 and the second on side `P+1` at position 3/8 — just
/// past, respectively just before, the corners the arc connects, so that the
/// boundary order of all `4g` anchors follows the corner ranks of the
/// boundary walk and no anchor lies on the `δ*` stretch reserved for the
/// basepoints.  Arc 0 is the exception: its first side `P−1` would be `δ*`
/// itself, so that endpoint slides past the gap onto the next boundary
/// stretch of the walk.
pub(crate) fn end_anchors(surface: &Surface, arc: u32) -> (SidePoint, SidePoint) {
    let n = surface.side_count();
    let p = arc_primary_side(arc);
    let start = if arc == 0 {
        SidePoint::new(surface.delta_cycle()[1], anchor_low())
    } else {
        SidePoint::new((p + n - 1) % n, anchor_high())
    };
    let end = SidePoint::new((p + 1) % n, anchor_low());
    (start, end)
}

/// Cut arc `α_arc`: the straight chord between its two anchors.
pub(crate) fn cut_arc(surface: &Surface, arc: u32) -> CurvePath {
    let (start, end) = end_anchors(surface, arc);
    CurvePath::arc(start, end, Vec::new())
}

/// First boundary-walk step at which a lap started from the given anchor
/// meets a cut side: the index of the anchor's side in the boundary walk,
/// plus one.
fn first_seam(surface: &Surface, anchor: &SidePoint) -> Result<u32> {
    let idx = surface
        .delta_cycle()
        .iter()
        .position(|&d| d == anchor.side)
        .ok_or_else(|| Error::internal("arc anchor does not lie on the boundary walk"))?;
    Ok(idx as u32 + 1)
}

/// The seed arc `β̃_arc`: the collar pushoff of `α_arc`.
///
/// Travel order: from the first anchor, spiral once around the collar at the
/// shallow depth of the first endpoint's rank (crossing the `δ*` gap once,
/// shallow — this is the `+1` winding mark); turn inward at the gap; run the
/// same lap backwards at the deep depth; cross the page body to the second
/// endpoint's first seam (this chord carries the transverse crossing with
/// `α_arc` away from the collar); complete the deep lap of the second
/// endpoint's rank, crossing the gap deep; turn back out to shallow depth;
/// and unwind to the second anchor (crossing the gap shallow in reverse — the
/// `−1` mark).  Net winding about `z` is zero, so the seed is isotopic to
/// `α_arc` rel endpoints, but every intersection point it acquires has a
/// definite level.
pub(crate) fn seed_beta(surface: &Surface, arc: u32) -> Result<CurvePath> {
    let genus = surface.genus();
    let n = surface.side_count();
    let last = 4 * genus;
    let (start, end) = end_anchors(surface, arc);
    let (rank_a, rank_b) = surface.arc_end_ranks(arc);
    let f_a = first_seam(surface, &start)?;
    let f_b = first_seam(surface, &end)?;
    let seam = |k: u32| -> u32 { (surface.delta_cycle()[(k - 1) as usize] + 1) % n };

    let ls_a = spiral_depth(genus, rank_a);
    let lt_a = track_depth(genus, rank_a);
    let ls_b = spiral_depth(genus, rank_b);
    let lt_b = track_depth(genus, rank_b);

    let mut exits: Vec<SidePoint> = Vec::new();
    // Shallow spiral lap of the first endpoint.
    for k in f_a..=last {
        exits.push(SidePoint::new(seam(k), ls_a.clone()));
    }
    exits.push(SidePoint::new(0, ls_a.clone()));
    // Turn into the deep track (a protected pocket at the gap).
    exits.push(SidePoint::new(partner_side(0), Rat::one() - lt_a.clone()));
    // Deep lap backwards.
    for k in (f_a..=last).rev() {
        exits.push(SidePoint::new(partner_side(seam(k)), Rat::one() - lt_a.clone()));
    }
    // Page body: cross to the second endpoint's seam at its deep depth.
    exits.push(SidePoint::new(seam(f_b), lt_b.clone()));
    // Finish the deep lap of the second endpoint.
    for k in (f_b + 1)..=last {
        exits.push(SidePoint::new(seam(k), lt_b.clone()));
    }
    exits.push(SidePoint::new(0, lt_b.clone()));
    // Turn back out to shallow depth (second protected pocket).
    exits.push(SidePoint::new(partner_side(0), Rat::one() - ls_b.clone()));
    // Unwind the shallow lap to the second anchor.
    for k in (f_b..=last).rev() {
        exits.push(SidePoint::new(partner_side(seam(k)), Rat::one() - ls_b.clone()));
    }
    Ok(CurvePath::arc(start, end, exits))
}

/// Apply a monodromy word to the whole family of seed arcs, keeping the
/// diagram pointed: every reduction is guarded by the gate (it must preserve
/// the net gate crossing number, so no strand slides across the basepoints),
/// and the arc endpoints must come back unchanged.  The family is twisted
/// jointly so the inserted annulus lanes nest coherently across arcs.
fn apply_word_pointed(
    surface: &Surface,
    word: &MonodromyWord,
    seeds: &[CurvePath],
) -> Result<Vec<CurvePath>> {
    let mut anchors = Vec::with_capacity(seeds.len());
    for seed in seeds {
        match &seed.kind {
            CurveKind::Arc { start, end } => anchors.push((start.clone(), end.clone())),
            CurveKind::Closed => return Err(Error::internal("diagram seeds must be arcs")),
        }
    }
    let gate = gate_segment(surface);
    let step = |cur: Vec<CurvePath>, l: &CurvePath, power: i64| -> Result<Vec<CurvePath>> {
        let next = surface.dehn_twist_family_guarded(l, &cur, power, Some(&gate))?;
        for (arc, (s0, e0)) in next.iter().zip(&anchors) {
            match &arc.kind {
                CurveKind::Arc { start, end } if start == s0 && end == e0 => {}
                _ => return Err(Error::internal("a twist moved a diagram arc endpoint")),
            }
            let residual = surface.self_crossing_count(arc);
            if residual != 0 {
                return Err(Error::internal(format!(
                    "a twisted diagram arc is not embedded ({residual} residual self-crossings, \
                     {} exits)",
                    arc.exits.len()
                )));
            }
        }
        Ok(next)
    };
    let mut cur = seeds.to_vec();
    for letter in word.letters().iter().rev() {
        let l = resolve_curve(surface, None, &letter.curve)?;
        cur = step(cur, &l, letter.power)?;
    }
    if word.boundary_twists() != 0 {
        let bp = surface.boundary_parallel_curve();
        let sign = word.boundary_twists().signum();
        for _ in 0..word.boundary_twists().unsigned_abs() {
            cur = step(cur, &bp, sign)?;
        }
    }
    Ok(cur)
}

// ---------------------------------------------------------------------------
// Winding marks and levels
// ---------------------------------------------------------------------------

/// A signed crossing of a `β`-arc with the gate, located along the arc.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct GateMark {
    /// Chord of the arc carrying the crossing.
    pub chord: usize,
    /// Parameter along that chord.
    pub t: Rat,
    /// `+1` where the level rises, `−1` where it falls.
    pub mark: i8,
}

/// Compute and validate the gate crossings of a diagram arc.
///
/// Validation encodes the collar geometry: every gate-crossing chord must be
/// a shallow pass across the `δ*` gap (both ends at depths above `z`), the
/// running level must stay in `{0, 1}`, and the net winding must vanish.
pub(crate) fn beta_marks(surface: &Surface, beta: &CurvePath) -> Result<Vec<GateMark>> {
    let n = surface.side_count();
    let (gate_a, gate_b) = gate_segment(surface);
    let gate_dir = PlanePoint {
        x: gate_b.x.clone() - gate_a.x.clone(),
        y: gate_b.y.clone() - gate_a.y.clone(),
    };
    let shallow_bound = z_depth();
    let quarter = rat(1, 4);
    let three_quarters = rat(3, 4);
    let gap_depth = |p: &SidePoint| -> Option<Rat> {
        if p.side == 0 && p.pos < quarter {
            Some(p.pos.clone())
        } else if p.side == n - 2 && p.pos > three_quarters {
            Some(Rat::one() - p.pos.clone())
        } else {
            None
        }
    };

    let mut out: Vec<GateMark> = Vec::new();
    for (i, (a, b)) in beta.chords().iter().enumerate() {
        let pa = circle_point(&a.theta(), n);
        let pb = circle_point(&b.theta(), n);
        if let Some((_, s)) = segment_intersection(&gate_a, &gate_b, &pa, &pb) {
            match (gap_depth(a), gap_depth(b)) {
                (Some(da), Some(db))
                    if da < shallow_bound && db < shallow_bound && a.side != b.side => {}
                _ => {
                    return Err(Error::internal(
                        "a gate-crossing chord is not a shallow pass across the basepoint gap",
                    ))
                }
            }
            let chord_dir = PlanePoint {
                x: pb.x - pa.x,
                y: pb.y - pa.y,
            };
            let c = cross2(&gate_dir.x, &gate_dir.y, &chord_dir.x, &chord_dir.y);
            if c.is_zero() {
                return Err(Error::internal("degenerate gate crossing"));
            }
            out.push(GateMark {
                chord: i,
                t: s,
                mark: if c.is_negative() { 1 } else { -1 },
            });
        }
    }
    out.sort_by(|u, v| (u.chord, &u.t).cmp(&(v.chord, &v.t)));
    let mut level = 0i32;
    for m in &out {
        level += i32::from(m.mark);
        if !(0..=1).contains(&level) {
            return Err(Error::internal(
                "arc level left {0,1}: basepoint winding out of range",
            ));
        }
    }
    if level != 0 {
        return Err(Error::internal("net basepoint winding of a diagram arc must vanish"));
    }
    Ok(out)
}

/// Level of a point of a `β`-arc: prefix sum of marks strictly before
/// `(chord, t)` in travel order.
pub(crate) fn level_before(marks: &[GateMark], chord: usize, t: &Rat) -> u8 {
    let mut level = 0i32;
    for m in marks {
        if m.chord < chord || (m.chord == chord && m.t < *t) {
            level += i32::from(m.mark);
        }
    }
    debug_assert!((0..=1).contains(&level));
    level as u8
}

// ---------------------------------------------------------------------------
// Intersection points
// ---------------------------------------------------------------------------

/// Role of an intersection point in the collar structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PointRole {
    /// Shared first endpoint of `α_j` and `β_j`.
    C,
    /// Shared second endpoint of `α_j` and `β_j` (identified with [`PointRole::C`]
    /// by the quotient).
    CPrime,
    /// Transverse collar crossing of `α_j` with its own pushoff (level 0 on
    /// the diagonal).
    D,
    /// Any other transverse crossing.
    Interior,
}

impl PointRole {
    pub fn as_str(self) -> &'static str {
        match self {
            PointRole::C => "c",
            PointRole::CPrime => "c_prime",
            PointRole::D => "d",
            PointRole::Interior => "interior",
        }
    }
}

/// One intersection point `α_i ∩ β_j` with its exact location on both arcs.
#[derive(Clone, Debug)]
pub struct DiagramPoint {
    pub alpha: usize,
    pub beta: usize,
    pub role: PointRole,
    /// Winding level about `z`; the Alexander grading of a generator is
    /// `−g + Σ level`.
    pub level: u8,
    pub alpha_chord: usize,
    pub alpha_t: Rat,
    pub beta_chord: usize,
    pub beta_t: Rat,
}

fn build_points(
    surface: &Surface,
    alphas: &[CurvePath],
    betas: &[CurvePath],
    marks: &[Vec<GateMark>],
) -> Result<Vec<DiagramPoint>> {
    let m = alphas.len();
    let mut points = Vec::new();
    for (i, alpha) in alphas.iter().enumerate() {
        for (j, beta) in betas.iter().enumerate() {
            let mut pair: Vec<DiagramPoint> = Vec::new();
            for x in surface.pair_crossings(alpha, beta) {
                let level = level_before(&marks[j], x.v_chord, &x.t_v);
                let role = if i == j && level == 0 {
                    PointRole::D
                } else {
                    PointRole::Interior
                };
                pair.push(DiagramPoint {
                    alpha: i,
                    beta: j,
                    role,
                    level,
                    alpha_chord: x.u_chord,
                    alpha_t: x.t_u,
                    beta_chord: x.v_chord,
                    beta_t: x.t_v,
                });
            }
            if i == j {
                pair.push(DiagramPoint {
                    alpha: i,
                    beta: j,
                    role: PointRole::C,
                    level: 0,
                    alpha_chord: 0,
                    alpha_t: Rat::zero(),
                    beta_chord: 0,
                    beta_t: Rat::zero(),
                });
                pair.push(DiagramPoint {
                    alpha: i,
                    beta: j,
                    role: PointRole::CPrime,
                    level: 0,
                    alpha_chord: alpha.chord_count() - 1,
                    alpha_t: Rat::one(),
                    beta_chord: beta.chord_count() - 1,
                    beta_t: Rat::one(),
                });
            }
            pair.sort_by(|p, q| (p.beta_chord, &p.beta_t).cmp(&(q.beta_chord, &q.beta_t)));
            for w in pair.windows(2) {
                if w[0].beta_chord == w[1].beta_chord && w[0].beta_t == w[1].beta_t {
                    return Err(Error::internal("coincident intersection points"));
                }
            }
            points.extend(pair);
        }
        let _ = m;
    }
    Ok(points)
}

// ---------------------------------------------------------------------------
// Generators and the endpoint quotient
// ---------------------------------------------------------------------------

/// A generator: one intersection point on each `α`-arc, on pairwise distinct
/// `β`-arcs, graded by `alexander = −g + Σ level`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Generator {
    /// `points[i]` indexes into [`PageDiagram::points`] and lies on `α_i`.
    pub points: Vec<usize>,
    pub alexander: i64,
}

impl Generator {
    /// The permutation `i ↦ β`-index of the point in slot `i`.
    pub fn permutation(&self, diagram: &PageDiagram) -> Vec<usize> {
        self.points.iter().map(|&p| diagram.points[p].beta).collect()
    }
}

/// All generators of the given Alexander grading, in a deterministic order.
///
/// Only the bottom two gradings `−g` and `−g+1` are supported; these are the
/// gradings in which the engine computes homology.
pub fn enumerate_generators(diagram: &PageDiagram, grading: i64) -> Result<Vec<Generator>> {
    enumerate_generators_over(
        diagram.genus(),
        diagram.alpha_arcs.len(),
        &diagram.points,
        grading,
    )
}

/// Generator enumeration over a bare point table.  This is the worker behind
/// [`enumerate_generators`]; it also serves refined diagrams, whose point
/// tables extend the original one by isotopy-created intersection points.
pub(crate) fn enumerate_generators_over(
    genus: u32,
    slots: usize,
    points: &[DiagramPoint],
    grading: i64,
) -> Result<Vec<Generator>> {
    let g = i64::from(genus);
    if grading != -g && grading != -g + 1 {
        return Err(Error::Unsupported(format!(
            "unsupported grading {grading}: supported Alexander gradings are {} and {}",
            -g,
            -g + 1
        )));
    }
    let budget = grading + g; // 0 or 1
    let mut by_alpha: Vec<Vec<usize>> = vec![Vec::new(); slots];
    for (id, p) in points.iter().enumerate() {
        by_alpha[p.alpha].push(id);
    }

    fn extend(
        points: &[DiagramPoint],
        by_alpha: &[Vec<usize>],
        slot: usize,
        used: u64,
        left: i64,
        partial: &mut Vec<usize>,
        grading: i64,
        out: &mut Vec<Generator>,
    ) {
        if slot == by_alpha.len() {
            if left == 0 {
                out.push(Generator {
                    points: partial.clone(),
                    alexander: grading,
                });
            }
            return;
        }
        for &id in &by_alpha[slot] {
            let p = &points[id];
            let bit = 1u64 << p.beta;
            if used & bit != 0 || i64::from(p.level) > left {
                continue;
            }
            partial.push(id);
            extend(
                points,
                by_alpha,
                slot + 1,
                used | bit,
                left - i64::from(p.level),
                partial,
                grading,
                out,
            );
            partial.pop();
        }
    }

    let mut out = Vec::new();
    let mut partial = Vec::new();
    extend(points, &by_alpha, 0, 0, budget, &mut partial, grading, &mut out);
    Ok(out)
}

/// Rewrite a generator to the canonical representative of its class under
/// the endpoint identification `c_j′ ∼ c_j`.  Idempotent; preserves the
/// grading and the underlying permutation.
pub fn quotient_canonicalize(diagram: &PageDiagram, x: &Generator) -> Generator {
    quotient_canonicalize_over(&diagram.points, &diagram.c_ids, x)
}

/// Endpoint-quotient canonicalization over a bare point table; worker behind
/// [`quotient_canonicalize`], shared with refined diagrams.
pub(crate) fn quotient_canonicalize_over(
    points: &[DiagramPoint],
    c_ids: &[usize],
    x: &Generator,
) -> Generator {
    let mut out = x.points.clone();
    for p in out.iter_mut() {
        let dp = &points[*p];
        if dp.role == PointRole::CPrime {
            *p = c_ids[dp.alpha];
        }
    }
    Generator {
        points: out,
        alexander: x.alexander,
    }
}

/// Whether a generator is the canonical representative of its class.
pub fn is_quotient_canonical(diagram: &PageDiagram, x: &Generator) -> bool {
    x.points
        .iter()
        .all(|&p| diagram.points[p].role != PointRole::CPrime)
}

// ---------------------------------------------------------------------------
// The diagram
// ---------------------------------------------------------------------------

/// Choice of `α`-basis for the diagram.
#[derive(Clone, Debug)]
pub enum Basis {
    /// The standard cut-arc basis.
    Standard,
    /// A basis compatible with a closed curve `L` (the first arc meets `L`
    /// once, the others not at all).
    Compatible(CurvePath),
    /// The compatible basis with its first arc perturbed around `L`.
    Perturbed(CurvePath),
}

impl Basis {
    fn label(&self) -> &'static str {
        match self {
            Basis::Standard => "standard",
            Basis::Compatible(_) => "compatible",
            Basis::Perturbed(_) => "perturbed",
        }
    }
}

/// A doubly pointed page diagram for one monodromy word.
#[derive(Clone, Debug)]
pub struct PageDiagram {
    surface: Surface,
    word: MonodromyWord,
    basis_label: String,
    alpha_arcs: Vec<CurvePath>,
    beta_arcs: Vec<CurvePath>,
    points: Vec<DiagramPoint>,
    c_ids: Vec<usize>,
    c_prime_ids: Vec<usize>,
    complex: CellComplex,
}

impl PageDiagram {
    pub fn genus(&self) -> u32 {
        self.surface.genus()
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    pub fn word(&self) -> &MonodromyWord {
        &self.word
    }

    pub fn basis_label(&self) -> &str {
        &self.basis_label
    }

    pub fn alpha_arcs(&self) -> &[CurvePath] {
        &self.alpha_arcs
    }

    pub fn beta_arcs(&self) -> &[CurvePath] {
        &self.beta_arcs
    }

    pub fn points(&self) -> &[DiagramPoint] {
        &self.points
    }

    pub fn complex(&self) -> &CellComplex {
        &self.complex
    }

    /// Index of the first shared endpoint `c_j`.
    pub fn c_point(&self, arc: usize) -> usize {
        self.c_ids[arc]
    }

    /// Index of the second shared endpoint `c_j′`.
    pub fn c_prime_point(&self, arc: usize) -> usize {
        self.c_prime_ids[arc]
    }

    /// Transverse intersection counts per `(α_i, β_j)` pair and level.
    pub fn transverse_census(&self) -> Vec<Vec<[usize; 2]>> {
        let m = self.alpha_arcs.len();
        let mut census = vec![vec![[0usize; 2]; m]; m];
        for p in &self.points {
            if matches!(p.role, PointRole::D | PointRole::Interior) {
                census[p.alpha][p.beta][p.level as usize] += 1;
            }
        }
        census
    }

    /// JSON record of the whole diagram, including the cell complex.
    pub fn to_json(&self) -> Value {
        let points: Vec<Value> = self
            .points
            .iter()
            .map(|p| {
                json!({
                    "alpha": p.alpha,
                    "beta": p.beta,
                    "role": p.role.as_str(),
                    "level": p.level,
                    "alpha_chord": p.alpha_chord,
                    "alpha_t": p.alpha_t.to_string(),
                    "beta_chord": p.beta_chord,
                    "beta_t": p.beta_t.to_string(),
                })
            })
            .collect();
        json!({
            "genus": self.genus(),
            "word": self.word.to_json(),
            "basis": self.basis_label,
            "alpha_arcs": self.alpha_arcs.iter().map(|c| c.to_json(self.genus())).collect::<Vec<_>>(),
            "beta_arcs": self.beta_arcs.iter().map(|c| c.to_json(self.genus())).collect::<Vec<_>>(),
            "points": points,
            "cell_complex": self.complex.to_json(),
        })
    }
}

/// Check that no two distinct arcs of the full system share an angular
/// coordinate (other than the designed shared endpoints), so every incidence
/// in the diagram is an honest transverse crossing.
fn check_coordinates_distinct(alphas: &[CurvePath], betas: &[CurvePath]) -> Result<()> {
    use std::collections::BTreeMap;
    // Label: (curve family 0=α/1=β, index).  Endpoint thetas are allowed to
    // coincide exactly for the pair (α_j, β_j).
    let mut exit_thetas: BTreeMap<Rat, (usize, usize)> = BTreeMap::new();
    let mut endpoint_thetas: BTreeMap<Rat, Vec<(usize, usize)>> = BTreeMap::new();
    for (family, curves) in [(0usize, alphas), (1usize, betas)] {
        for (idx, c) in curves.iter().enumerate() {
            for e in &c.exits {
                for theta in [e.theta(), e.glued().theta()] {
                    if let Some(prev) = exit_thetas.insert(theta, (family, idx)) {
                        if prev != (family, idx) {
                            return Err(Error::internal(
                                "two diagram arcs share a crossing coordinate",
                            ));
                        }
                    }
                }
            }
            if let CurveKind::Arc { start, end } = &c.kind {
                for p in [start, end] {
                    endpoint_thetas.entry(p.theta()).or_default().push((family, idx));
                }
            }
        }
    }
    for (theta, users) in &endpoint_thetas {
        if exit_thetas.contains_key(theta) {
            return Err(Error::internal(
                "an arc endpoint coincides with a crossing coordinate",
            ));
        }
        let ok = match users.as_slice() {
            [(0, i), (1, j)] | [(1, j), (0, i)] => i == j,
            _ => false,
        };
        if !ok {
            return Err(Error::internal(
                "arc endpoints collide beyond the designed shared anchors",
            ));
        }
    }
    Ok(())
}

/// Build the doubly pointed page diagram of a monodromy word.
pub fn build_page_diagram(genus: u32, word: &MonodromyWord, basis: &Basis) -> Result<PageDiagram> {
    if genus == 0 {
        return Err(Error::invalid("the page must have genus at least 1"));
    }
    if word.genus() != genus {
        return Err(Error::invalid(
            "monodromy word genus does not match the requested page",
        ));
    }
    if genus > 16 {
        return Err(Error::unsupported("page genus above 16 is not supported"));
    }
    match basis {
        Basis::Standard => {}
        Basis::Compatible(_) | Basis::Perturbed(_) => {
            return Err(Error::unsupported(
                "compatible and perturbed arc bases are not implemented yet",
            ));
        }
    }
    let surface = Surface::build(genus)?;
    let arcs = surface.arc_count();

    let alphas: Vec<CurvePath> = (0..arcs).map(|j| cut_arc(&surface, j)).collect();
    for i in 0..alphas.len() {
        for j in (i + 1)..alphas.len() {
            if !surface.pair_crossings(&alphas[i], &alphas[j]).is_empty() {
                return Err(Error::internal("cut arcs must be pairwise disjoint"));
            }
        }
    }

    let mut seeds = Vec::with_capacity(arcs as usize);
    for j in 0..arcs {
        let seed = seed_beta(&surface, j)?;
        if surface.self_crossing_count(&seed) != 0 {
            return Err(Error::internal("seed arc is not embedded"));
        }
        seeds.push(seed);
    }
    let betas = apply_word_pointed(&surface, word, &seeds)?;
    for i in 0..betas.len() {
        for j in (i + 1)..betas.len() {
            let crossings = surface.pair_crossings(&betas[i], &betas[j]);
            if !crossings.is_empty() {
                return Err(Error::internal(format!(
                    "image arcs must be pairwise disjoint (arcs {i} and {j} cross {} times)",
                    crossings.len()
                )));
            }
        }
    }
    check_coordinates_distinct(&alphas, &betas)?;

    let marks = betas
        .iter()
        .map(|b| beta_marks(&surface, b))
        .collect::<Result<Vec<_>>>()?;
    let points = build_points(&surface, &alphas, &betas, &marks)?;

    let mut c_ids = vec![usize::MAX; arcs as usize];
    let mut c_prime_ids = vec![usize::MAX; arcs as usize];
    for (id, p) in points.iter().enumerate() {
        match p.role {
            PointRole::C => c_ids[p.alpha] = id,
            PointRole::CPrime => c_prime_ids[p.alpha] = id,
            _ => {}
        }
    }
    if c_ids.iter().chain(c_prime_ids.iter()).any(|&x| x == usize::MAX) {
        return Err(Error::internal("missing shared endpoint records"));
    }

    let complex = build_cell_complex(&surface, &alphas, &betas, &marks, &points)?;

    Ok(PageDiagram {
        surface,
        word: word.clone(),
        basis_label: basis.label().to_string(),
        alpha_arcs: alphas,
        beta_arcs: betas,
        points,
        c_ids,
        c_prime_ids,
        complex,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(side: u32, pos: Rat) -> SidePoint {
        SidePoint::new(side, pos)
    }

    /// Expected transverse crossing counts from the endpoint ranks: the
    /// seed of `α_j` meets `α_i` once near the collar for every pair of ranks
    /// `(p, q) ∈ ranks(α_i) × ranks(α_j)` with `p > q`, twice per lap depth,
    /// plus once on the diagonal for the body crossing.
    fn expected_census(surface: &Surface) -> Vec<Vec<[usize; 2]>> {
        let m = surface.arc_count() as usize;
        let mut census = vec![vec![[0usize; 2]; m]; m];
        for i in 0..m {
            for j in 0..m {
                let (pa, pb) = surface.arc_end_ranks(i as u32);
                let (qa, qb) = surface.arc_end_ranks(j as u32);
                let mut x = 0usize;
                for p in [pa, pb] {
                    for q in [qa, qb] {
                        if p > q {
                            x += 1;
                        }
                    }
                }
                census[i][j][0] = x;
                census[i][j][1] = x + usize::from(i == j);
            }
        }
        census
    }

    #[test]
    fn lane_depths_are_separated() {
        for genus in 1..=4u32 {
            let z = z_depth();
            let w = w_depth();
            let mut prev_s: Option<Rat> = None;
            let mut prev_t: Option<Rat> = None;
            for rank in 1..=4 * genus {
                let s = spiral_depth(genus, rank);
                let t = track_depth(genus, rank);
                assert!(w < s, "w below every spiral lane");
                assert!(s < z, "spiral lanes below z");
                assert!(z < t, "z below every track lane");
                assert!(t < rat(1, 8), "track lanes below the twist-curve band");
                if let Some(p) = prev_s.take() {
                    assert!(s < p, "spiral depths strictly decreasing in rank");
                }
                if let Some(p) = prev_t.take() {
                    assert!(t > p, "track depths strictly increasing in rank");
                }
                prev_s = Some(s);
                prev_t = Some(t);
            }
        }
    }

    #[test]
    fn anchors_follow_boundary_ranks() {
        for genus in 1..=3u32 {
            let surface = Surface::build(genus).unwrap();
            let n = surface.side_count();
            let mut seen = std::collections::BTreeSet::new();
            let mut by_rank: Vec<Option<SidePoint>> = vec![None; (4 * genus + 1) as usize];
            for arc in 0..surface.arc_count() {
                let (start, end) = end_anchors(&surface, arc);
                let (ra, rb) = surface.arc_end_ranks(arc);
                for (anchor, rank) in [(start, ra), (end, rb)] {
                    assert_ne!(anchor.side, n - 1, "no anchors on the basepoint stretch");
                    assert!(surface.delta_cycle().contains(&anchor.side));
                    assert!(seen.insert(anchor.theta()), "anchors pairwise distinct");
                    by_rank[rank as usize] = Some(anchor);
                }
            }
            // Walk order along the boundary equals rank order.
            let mut walk: Vec<(usize, Rat)> = Vec::new();
            for (idx, &side) in surface.delta_cycle().iter().enumerate() {
                let mut here: Vec<&SidePoint> = by_rank
                    .iter()
                    .flatten()
                    .filter(|a| a.side == side)
                    .collect();
                here.sort_by_key(|a| a.pos.clone());
                for a in here {
                    walk.push((idx, a.pos.clone()));
                }
            }
            assert_eq!(walk.len(), (4 * genus) as usize);
            let ranks_in_walk: Vec<u32> = {
                let mut v = Vec::new();
                for (idx, pos) in &walk {
                    let side = surface.delta_cycle()[*idx];
                    let rank = by_rank
                        .iter()
                        .position(|a| {
                            a.as_ref()
                                .is_some_and(|a| a.side == side && a.pos == *pos)
                        })
                        .unwrap() as u32;
                    v.push(rank);
                }
                v
            };
            assert_eq!(
                ranks_in_walk,
                (1..=4 * genus).collect::<Vec<_>>(),
                "boundary walk meets anchors in rank order"
            );
        }
    }

    #[test]
    fn seed_exits_genus_one_are_the_frozen_lists() {
        let surface = Surface::build(1).unwrap();
        let ls1 = spiral_depth(1, 1);
        let ls2 = spiral_depth(1, 2);
        let ls3 = spiral_depth(1, 3);
        let ls4 = spiral_depth(1, 4);
        let lt1 = track_depth(1, 1);
        let lt2 = track_depth(1, 2);
        let lt3 = track_depth(1, 3);
        let lt4 = track_depth(1, 4);
        let one = Rat::one();

        let b0 = seed_beta(&surface, 0).unwrap();
        assert_eq!(
            b0.kind,
            CurveKind::Arc {
                start: sp(5, rat(3, 8)),
                end: sp(1, rat(3, 8))
            }
        );
        assert_eq!(
            b0.exits,
            vec![
                sp(6, ls1.clone()),
                sp(4, ls1.clone()),
                sp(2, ls1.clone()),
                sp(0, ls1.clone()),
                sp(4, one.clone() - lt1.clone()),
                sp(6, one.clone() - lt1.clone()),
                sp(0, one.clone() - lt1.clone()),
                sp(2, one.clone() - lt1.clone()),
                sp(2, lt3.clone()),
                sp(0, lt3.clone()),
                sp(4, one.clone() - ls3.clone()),
                sp(6, one.clone() - ls3.clone()),
            ]
        );

        let b1 = seed_beta(&surface, 1).unwrap();
        assert_eq!(
            b1.kind,
            CurveKind::Arc {
                start: sp(1, rat(5, 8)),
                end: sp(3, rat(3, 8))
            }
        );
        assert_eq!(
            b1.exits,
            vec![
                sp(2, ls4.clone()),
                sp(0, ls4.clone()),
                sp(4, one.clone() - lt4.clone()),
                sp(6, one.clone() - lt4.clone()),
                sp(4, lt2.clone()),
                sp(2, lt2.clone()),
                sp(0, lt2.clone()),
                sp(4, one.clone() - ls2.clone()),
                sp(6, one.clone() - ls2.clone()),
                sp(0, one.clone() - ls2.clone()),
            ]
        );
    }

    #[test]
    fn seeds_are_stable_under_guarded_reduction() {
        for genus in [1u32, 2] {
            let surface = Surface::build(genus).unwrap();
            for arc in 0..surface.arc_count() {
                let seed = seed_beta(&surface, arc).unwrap();
                assert_eq!(surface.self_crossing_count(&seed), 0);
                // With the gate guarding the collar pockets the seed is
                // already reduced.
                let gate = gate_segment(&surface);
                let kept = surface.remove_returns_guarded(&seed, Some(&gate));
                assert_eq!(kept, seed);
                // Without the guard the pockets collapse: the guard is load-bearing.
                let collapsed = surface.remove_returns(&seed);
                assert_ne!(collapsed, seed);
            }
        }
    }

    #[test]
    fn seed_marks_are_one_up_one_down() {
        for genus in [1u32, 2] {
            let surface = Surface::build(genus).unwrap();
            for arc in 0..surface.arc_count() {
                let seed = seed_beta(&surface, arc).unwrap();
                let marks = beta_marks(&surface, &seed).unwrap();
                assert_eq!(marks.len(), 2, "genus {genus} arc {arc}");
                assert_eq!(marks[0].mark, 1);
                assert_eq!(marks[1].mark, -1);
            }
        }
    }

    #[test]
    fn identity_census_matches_rank_formula() {
        for genus in [1u32, 2] {
            let word = MonodromyWord::identity(genus);
            let d = build_page_diagram(genus, &word, &Basis::Standard).unwrap();
            let census = expected_census(d.surface());
            assert_eq!(d.transverse_census(), census, "genus {genus}");
        }
    }

    #[test]
    fn identity_census_genus_one_frozen() {
        let word = MonodromyWord::identity(1);
        let d = build_page_diagram(1, &word, &Basis::Standard).unwrap();
        let census = d.transverse_census();
        let expected = vec![
            vec![[1, 2], [1, 1]],
            vec![[3, 3], [1, 2]],
        ];
        assert_eq!(census, expected);
        // Exactly one collar crossing `d` per diagonal pair.
        for arc in 0..2usize {
            let ds: Vec<_> = d
                .points()
                .iter()
                .filter(|p| p.alpha == arc && p.beta == arc && p.role == PointRole::D)
                .collect();
            assert_eq!(ds.len(), 1);
        }
    }

    #[test]
    fn identity_generator_counts_are_frozen() {
        let cases = [
            (1u32, -1i64, 12usize, 7usize),
            (1, 0, 18, 14),
            (2, -2, 144, 49),
            (2, -1, 432, 196),
        ];
        for (genus, grading, full, canonical) in cases {
            let word = MonodromyWord::identity(genus);
            let d = build_page_diagram(genus, &word, &Basis::Standard).unwrap();
            let gens = enumerate_generators(&d, grading).unwrap();
            assert_eq!(gens.len(), full, "genus {genus} grading {grading} full");
            let canon: std::collections::BTreeSet<_> = gens
                .iter()
                .map(|x| quotient_canonicalize(&d, x).points)
                .collect();
            assert_eq!(
                canon.len(),
                canonical,
                "genus {genus} grading {grading} canonical"
            );
            for x in &gens {
                let y = quotient_canonicalize(&d, x);
                assert!(is_quotient_canonical(&d, &y));
                assert_eq!(quotient_canonicalize(&d, &y), y, "idempotent");
                assert_eq!(y.alexander, x.alexander);
                assert_eq!(y.permutation(&d), x.permutation(&d));
            }
        }
    }

    #[test]
    fn identity_cell_complex_stats_are_frozen() {
        let word = MonodromyWord::identity(1);
        let d = build_page_diagram(1, &word, &Basis::Standard).unwrap();
        let c = d.complex();
        assert_eq!(c.vertex_count(), 48);
        assert_eq!(c.edge_count(), 66);
        assert_eq!(c.face_count(), 17);
        assert_ne!(c.z_face(), c.w_face());
        assert!(c.face(c.w_face()).touches_boundary);
    }

    #[test]
    fn unsupported_gradings_error() {
        let word = MonodromyWord::identity(1);
        let d = build_page_diagram(1, &word, &Basis::Standard).unwrap();
        for grading in [-2i64, 1, 5] {
            let err = enumerate_generators(&d, grading).unwrap_err();
            assert!(matches!(err, Error::Unsupported(_)), "{grading}: {err}");
        }
    }

    #[test]
    fn twisted_words_build_and_validate() {
        // Positive trefoil, figure-eight, and a longer mixed word.
        let cases = [
            (1u32, "a1+ b1+", 0i64),
            (1, "a1+ b1-", 0),
            (1, "a1+ b1+ a1+ b1+", 0),
            (1, "a1+ b1-", 1),
            (2, "a1+ b2-", 0),
        ];
        for (genus, text, bt) in cases {
            let word = MonodromyWord::parse(genus, text, bt).unwrap();
            let d = build_page_diagram(genus, &word, &Basis::Standard)
                .unwrap_or_else(|e| panic!("genus {genus} word [{text}] bt {bt}: {e}"));
            // The moved arcs still share only their anchors with the sources.
            for (j, beta) in d.beta_arcs().iter().enumerate() {
                let (start, end) = end_anchors(d.surface(), j as u32);
                assert_eq!(
                    beta.kind,
                    CurveKind::Arc { start, end },
                    "{text} arc {j} endpoints"
                );
            }
            // Bottom-grading generators exist.
            let gens = enumerate_generators(&d, -i64::from(genus)).unwrap();
            assert!(!gens.is_empty(), "{text}: empty bottom grading");
        }
    }


    #[test]
    fn build_rejects_bad_input() {
        let word = MonodromyWord::identity(1);
        assert!(matches!(
            build_page_diagram(0, &word, &Basis::Standard),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            build_page_diagram(2, &word, &Basis::Standard),
            Err(Error::InvalidInput(_))
        ));
        let surface = Surface::build(1).unwrap();
        let l = surface.curve_a(0);
        assert!(matches!(
            build_page_diagram(1, &word, &Basis::Compatible(l)),
            Err(Error::Unsupported(_))
        ));
    }
}
