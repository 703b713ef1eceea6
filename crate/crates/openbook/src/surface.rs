//! Compact surfaces with one boundary component, presented as a glued polygon,
//! and isotopy-aware simple curves and arcs on them.
//!
//! A genus-`g` surface with one boundary circle is realized as a `8g`-gon with
//! side identifications.  For each handle `h` the eight consecutive sides are
//!
//! ```text
//!   X_h, δ, Y_h, δ, X̄_h, δ, Ȳ_h, δ
//! ```
//!
//! where `X_h` is glued to `X̄_h` and `Y_h` to `Ȳ_h` (each with a direction
//! reversal), and the `δ` sides assemble into the single boundary circle.  The
//! glued images of the `X`/`Y` side pairs form `2g` disjoint properly embedded
//! arcs (the *cut system*); cutting along them recovers the polygon.  This cut
//! system is the fixed reference cell decomposition of the surface: curves are
//! stored by their crossing pattern with it.
//!
//! A curve or arc is a cyclic (or linear) list of *exit points*: the points, in
//! travel order, where it crosses the cut arcs.  Between consecutive exits the
//! curve is a chord of the polygon.  All positions are exact rationals, so
//! crossing tests, crossing orders along a chord, and face geometry are decided
//! by integer arithmetic only — no floating point anywhere.
//!
//! The module provides:
//! * construction of the surface combinatorics (side gluing, boundary vertex
//!   ranks, the distinguished boundary gap used by diagram builders);
//! * standard curves `a_h`, `b_h` and the boundary-parallel curve;
//! * geometric intersection numbers via monotone simplification (removal of
//!   cut-arc returns and of innermost bigons), with certified termination;
//! * Dehn twists along simple closed curves, by splicing a parallel copy of
//!   the twisting curve at each crossing with the correct handedness;
//! * integral homology classes and the intersection pairing.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Exact rational scalar used for all positions.
pub type Rat = BigRational;

/// Convenience constructor for a rational from an integer pair.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Winding gate for pointed reductions: a fixed segment from a marked
/// interior point to the boundary, in plane coordinates.  Every reduction
/// move is an isotopy across a disc; the disc contains the marked point
/// exactly when the move changes the path's net signed crossing number with
/// the gate.  Guarded reductions therefore accept only moves that preserve
/// that net, which keeps the path in its isotopy class rel the marked point.
pub(crate) type WindingGate = (PlanePoint, PlanePoint);

// ---------------------------------------------------------------------------
// Static polygon combinatorics (independent of a Surface instance)
// ---------------------------------------------------------------------------

/// Number of polygon sides for genus `g`.
pub fn side_count(genus: u32) -> u32 {
    8 * genus
}

/// Whether a side index is a boundary (`δ`) side.  Odd-indexed sides are
/// boundary pieces; even-indexed sides are cut-arc copies.
pub fn side_is_boundary(side: u32) -> bool {
    side % 2 == 1
}

/// The glued partner of an even (cut-arc) side.
///
/// Within each block of eight sides, side `0` pairs with side `4` and side `2`
/// with side `6`.
pub fn partner_side(side: u32) -> u32 {
    debug_assert!(!side_is_boundary(side));
    let r = side % 8;
    match r {
        0 | 2 => side + 4,
        4 | 6 => side - 4,
        _ => unreachable!(),
    }
}

/// The cut-arc index (`0..2g`) of an even side.
pub fn arc_index_of_side(side: u32) -> u32 {
    debug_assert!(!side_is_boundary(side));
    let h = side / 8;
    match side % 8 {
        0 | 4 => 2 * h,
        2 | 6 => 2 * h + 1,
        _ => unreachable!(),
    }
}

/// The lower-indexed ("primary") copy of a cut arc.
pub fn arc_primary_side(arc: u32) -> u32 {
    let h = arc / 2;
    if arc % 2 == 0 {
        8 * h
    } else {
        8 * h + 2
    }
}

/// The higher-indexed ("secondary") copy of a cut arc.
pub fn arc_secondary_side(arc: u32) -> u32 {
    arc_primary_side(arc) + 4
}

// ---------------------------------------------------------------------------
// Points
// ---------------------------------------------------------------------------

/// A point on the polygon boundary: a side index plus a position in `(0, 1)`
/// along that side (in the polygon's counterclockwise direction).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SidePoint {
    pub side: u32,
    pub pos: Rat,
}

impl SidePoint {
    pub fn new(side: u32, pos: Rat) -> Self {
        SidePoint { side, pos }
    }

    /// The same surface point seen on the partner side copy.  Only valid for
    /// cut-arc (even) sides.
    pub fn glued(&self) -> SidePoint {
        SidePoint {
            side: partner_side(self.side),
            pos: Rat::one() - self.pos.clone(),
        }
    }

    /// Angular coordinate `θ = side + pos` around the polygon, in `[0, 8g)`.
    pub fn theta(&self) -> Rat {
        Rat::from(BigInt::from(self.side)) + self.pos.clone()
    }
}

/// A point of the plane with rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct PlanePoint {
    pub x: Rat,
    pub y: Rat,
}

/// Embed an angular coordinate on the polygon boundary into the rational unit
/// circle, monotonically in `θ`.
///
/// With `τ = θ − 4g` ranging over `[−4g, 4g)`, the point
/// `((1−τ²)/(1+τ²), 2τ/(1+τ²))` traverses a proper sub-arc of the unit circle
/// in order of `τ`.  Cyclic order of boundary points therefore agrees with the
/// linear order of `θ`, all points are concyclic (so chords intersect like
/// circle chords), and every coordinate stays rational.
pub(crate) fn circle_point(theta: &Rat, sides: u32) -> PlanePoint {
    let half = Rat::from(BigInt::from(sides / 2));
    let tau = theta.clone() - half;
    let t2 = tau.clone() * tau.clone();
    let denom = Rat::one() + t2.clone();
    PlanePoint {
        x: (Rat::one() - t2) / denom.clone(),
        y: (Rat::from(BigInt::from(2)) * tau) / denom,
    }
}

pub(crate) fn cross2(ax: &Rat, ay: &Rat, bx: &Rat, by: &Rat) -> Rat {
    ax.clone() * by.clone() - ay.clone() * bx.clone()
}

/// Intersection of two open segments `p1→p2` and `p3→p4`.
///
/// Returns the parameters `(t, s)` with `p = p1 + t(p2−p1) = p3 + s(p4−p3)`
/// when the segments cross transversally in their interiors; `None` otherwise.
pub(crate) fn segment_intersection(
    p1: &PlanePoint,
    p2: &PlanePoint,
    p3: &PlanePoint,
    p4: &PlanePoint,
) -> Option<(Rat, Rat)> {
    let rx = p2.x.clone() - p1.x.clone();
    let ry = p2.y.clone() - p1.y.clone();
    let sx = p4.x.clone() - p3.x.clone();
    let sy = p4.y.clone() - p3.y.clone();
    let denom = cross2(&rx, &ry, &sx, &sy);
    if denom.is_zero() {
        return None;
    }
    let qpx = p3.x.clone() - p1.x.clone();
    let qpy = p3.y.clone() - p1.y.clone();
    let t = cross2(&qpx, &qpy, &sx, &sy) / denom.clone();
    let s = cross2(&qpx, &qpy, &rx, &ry) / denom;
    if t > Rat::zero() && t < Rat::one() && s > Rat::zero() && s < Rat::one() {
        Some((t, s))
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Curves
// ---------------------------------------------------------------------------

/// Whether a path is a closed curve in the interior or a properly embedded arc
/// with endpoints on the boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CurveKind {
    Closed,
    /// Endpoints lie on boundary (`δ`) sides.
    Arc { start: SidePoint, end: SidePoint },
}

/// A curve or arc on the surface, stored by its crossings with the cut system.
///
/// `exits[i]` is the point where the path leaves the polygon for the `i`-th
/// time (crossing a cut-arc side); it re-enters at `exits[i].glued()`.  For a
/// closed curve the list is cyclic.  For an arc, travel starts at `start`,
/// crosses the listed exits in order, and finishes at `end`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurvePath {
    pub kind: CurveKind,
    pub exits: Vec<SidePoint>,
}

impl CurvePath {
    pub fn closed(exits: Vec<SidePoint>) -> Self {
        CurvePath { kind: CurveKind::Closed, exits }
    }

    pub fn arc(start: SidePoint, end: SidePoint, exits: Vec<SidePoint>) -> Self {
        CurvePath { kind: CurveKind::Arc { start, end }, exits }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self.kind, CurveKind::Closed)
    }

    /// Number of chords the path decomposes into inside the polygon.
    pub fn chord_count(&self) -> usize {
        match self.kind {
            CurveKind::Closed => self.exits.len(),
            CurveKind::Arc { .. } => self.exits.len() + 1,
        }
    }

    /// The `i`-th chord as a directed pair (entry point, exit point).
    pub fn chord(&self, i: usize) -> (SidePoint, SidePoint) {
        match &self.kind {
            CurveKind::Closed => {
                let n = self.exits.len();
                debug_assert!(n > 0);
                let prev = &self.exits[(i + n - 1) % n];
                (prev.glued(), self.exits[i % n].clone())
            }
            CurveKind::Arc { start, end } => {
                let n = self.exits.len();
                let entry = if i == 0 { start.clone() } else { self.exits[i - 1].glued() };
                let exit = if i == n { end.clone() } else { self.exits[i].clone() };
                (entry, exit)
            }
        }
    }

    /// All chords in travel order.
    pub fn chords(&self) -> Vec<(SidePoint, SidePoint)> {
        (0..self.chord_count()).map(|i| self.chord(i)).collect()
    }

    /// Crossing counts with each cut arc (the normal-coordinate vector).
    pub fn arc_coordinates(&self, genus: u32) -> Vec<u64> {
        let mut counts = vec![0u64; (2 * genus) as usize];
        for e in &self.exits {
            counts[arc_index_of_side(e.side) as usize] += 1;
        }
        counts
    }

    /// Offset every stored position by `eta` (used to put a pair of paths in
    /// generic position when they share exact coordinates).
    fn offset_all(&self, eta: &Rat) -> CurvePath {
        let shift = |p: &SidePoint| SidePoint::new(p.side, p.pos.clone() + eta.clone());
        let kind = match &self.kind {
            CurveKind::Closed => CurveKind::Closed,
            CurveKind::Arc { start, end } => CurveKind::Arc { start: shift(start), end: shift(end) },
        };
        CurvePath { kind, exits: self.exits.iter().map(shift).collect() }
    }
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CurvePathRepr {
    kind: String,
    /// Normal coordinates: crossing counts with the reference cut system.
    coordinates: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    endpoints: Option<[String; 2]>,
    /// Exact crossing data: `(side, position)` pairs in travel order.  The
    /// count vector above does not determine the path in a one-cell
    /// decomposition, so the full pattern is carried alongside it.
    exits: Vec<(u32, String)>,
}

fn rat_to_string(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn rat_from_string(s: &str) -> Result<Rat> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let numer: BigInt = n
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("bad rational numerator `{n}`")))?;
    let denom: BigInt = d
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("bad rational denominator `{d}`")))?;
    if denom.is_zero() {
        return Err(Error::invalid("zero denominator in rational"));
    }
    Ok(Rat::new(numer, denom))
}

impl CurvePath {
    /// Serialize to the interchange JSON form.
    pub fn to_json(&self, genus: u32) -> serde_json::Value {
        let endpoints = match &self.kind {
            CurveKind::Closed => None,
            CurveKind::Arc { start, end } => {
                Some([rat_to_string(&start.theta()), rat_to_string(&end.theta())])
            }
        };
        let repr = CurvePathRepr {
            kind: if self.is_closed() { "closed".into() } else { "arc".into() },
            coordinates: self.arc_coordinates(genus),
            endpoints,
            exits: self
                .exits
                .iter()
                .map(|e| (e.side, rat_to_string(&e.pos)))
                .collect(),
        };
        serde_json::to_value(repr).expect("curve serialization cannot fail")
    }

    /// Deserialize from the interchange JSON form.
    pub fn from_json(value: &serde_json::Value, genus: u32) -> Result<CurvePath> {
        let repr: CurvePathRepr = serde_json::from_value(value.clone())
            .map_err(|e| Error::invalid(format!("bad curve JSON: {e}")))?;
        let sides = side_count(genus);
        let mut exits = Vec::with_capacity(repr.exits.len());
        for (side, pos) in &repr.exits {
            if *side >= sides || side_is_boundary(*side) {
                return Err(Error::invalid(format!("exit on invalid side {side}")));
            }
            let pos = rat_from_string(pos)?;
            if pos <= Rat::zero() || pos >= Rat::one() {
                return Err(Error::invalid("exit position outside (0,1)"));
            }
            exits.push(SidePoint::new(*side, pos));
        }
        let kind = match (repr.kind.as_str(), &repr.endpoints) {
            ("closed", None) => CurveKind::Closed,
            ("arc", Some([s, e])) => {
                let parse_endpoint = |raw: &str| -> Result<SidePoint> {
                    let theta = rat_from_string(raw)?;
                    if theta < Rat::zero() || theta >= Rat::from(BigInt::from(sides)) {
                        return Err(Error::invalid("endpoint angle out of range"));
                    }
                    let side_int = theta.floor().to_integer();
                    let side: u32 = side_int
                        .clone()
                        .try_into()
                        .map_err(|_| Error::invalid("endpoint angle out of range"))?;
                    if !side_is_boundary(side) {
                        return Err(Error::invalid("arc endpoint must lie on a boundary side"));
                    }
                    Ok(SidePoint::new(side, theta - Rat::from(side_int)))
                };
                CurveKind::Arc { start: parse_endpoint(s)?, end: parse_endpoint(e)? }
            }
            ("closed", Some(_)) => return Err(Error::invalid("closed curve with endpoints")),
            ("arc", None) => return Err(Error::invalid("arc without endpoints")),
            (k, _) => return Err(Error::invalid(format!("unknown curve kind `{k}`"))),
        };
        let curve = CurvePath { kind, exits };
        let expect = curve.arc_coordinates(genus);
        if !repr.coordinates.is_empty() && repr.coordinates != expect {
            return Err(Error::invalid(
                "normal-coordinate vector inconsistent with exit list",
            ));
        }
        Ok(curve)
    }
}

// ---------------------------------------------------------------------------
// Surface
// ---------------------------------------------------------------------------

/// A genus-`g ≥ 1` surface with one boundary circle, with the polygon gluing
/// combinatorics precomputed.
#[derive(Clone, Debug)]
pub struct Surface {
    genus: u32,
    /// Corner `i` (the polygon vertex at the start of side `i`) belongs to
    /// surface vertex class `corner_class[i]`.
    corner_class: Vec<u32>,
    /// Boundary (`δ`) sides in the order they are traversed along the single
    /// boundary circle, starting with the distinguished gap side.
    delta_cycle: Vec<u32>,
    /// Boundary vertex rank (1-based) of each vertex class.
    class_rank: Vec<u32>,
    /// Vertex class at each boundary rank (index `rank − 1`).
    rank_class: Vec<u32>,
}

impl Surface {
    /// Build the surface for the given genus.  Genus zero (a disc) carries no
    /// essential curves and is rejected.
    pub fn build(genus: u32) -> Result<Surface> {
        if genus == 0 {
            return Err(Error::invalid(
                "genus must be at least 1 (a disc page supports no interesting monodromy)",
            ));
        }
        let n = side_count(genus);
        // Union of corner identifications: the start corner of each even side
        // is glued to the end corner of its partner.
        let mut repr: Vec<u32> = (0..n).collect();
        fn find(repr: &mut Vec<u32>, mut i: u32) -> u32 {
            while repr[i as usize] != i {
                let up = repr[repr[i as usize] as usize];
                repr[i as usize] = up;
                i = up;
            }
            i
        }
        for s in (0..n).step_by(2) {
            let a = find(&mut repr, s);
            let b = find(&mut repr, (partner_side(s) + 1) % n);
            repr[a as usize] = b;
        }
        let mut class_ids: BTreeMap<u32, u32> = BTreeMap::new();
        let mut corner_class = vec![0u32; n as usize];
        for c in 0..n {
            let r = find(&mut repr, c);
            let next = class_ids.len() as u32;
            let id = *class_ids.entry(r).or_insert(next);
            corner_class[c as usize] = id;
        }
        let class_count = class_ids.len() as u32;
        if class_count != 4 * genus {
            return Err(Error::internal(format!(
                "expected {} boundary vertices, found {}",
                4 * genus,
                class_count
            )));
        }
        // Walk the boundary circle.  After traversing δ side `d` (from corner
        // `d` to corner `d+1`), the next δ side is the one starting at a corner
        // glued to `d+1`, namely `partner(d+1) + 1`.
        let start = n - 1;
        let mut delta_cycle = Vec::with_capacity((4 * genus) as usize);
        let mut d = start;
        loop {
            delta_cycle.push(d);
            d = (partner_side((d + 1) % n) + 1) % n;
            if d == start {
                break;
            }
        }
        if delta_cycle.len() != (4 * genus) as usize {
            return Err(Error::internal(
                "boundary is not a single circle under the side gluing",
            ));
        }
        let mut class_rank = vec![0u32; class_count as usize];
        let mut rank_class = Vec::with_capacity(class_count as usize);
        for (idx, d) in delta_cycle.iter().enumerate() {
            let arrive = corner_class[((d + 1) % n) as usize];
            class_rank[arrive as usize] = idx as u32 + 1;
            rank_class.push(arrive);
        }
        Ok(Surface { genus, corner_class, delta_cycle, class_rank, rank_class })
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn side_count(&self) -> u32 {
        side_count(self.genus)
    }

    pub fn arc_count(&self) -> u32 {
        2 * self.genus
    }

    /// The distinguished boundary side: the gap where diagram builders place
    /// the second basepoint.  It is the δ side ending at corner `0`.
    pub fn delta_star(&self) -> u32 {
        self.side_count() - 1
    }

    /// δ sides in boundary order, starting with `delta_star`.
    pub fn delta_cycle(&self) -> &[u32] {
        &self.delta_cycle
    }

    /// Surface vertex class of a polygon corner.
    pub fn corner_class(&self, corner: u32) -> u32 {
        self.corner_class[corner as usize]
    }

    /// Boundary rank (1-based, in boundary order from the distinguished gap)
    /// of a vertex class.
    pub fn class_rank(&self, class: u32) -> u32 {
        self.class_rank[class as usize]
    }

    /// Vertex class at the given boundary rank (1-based).
    pub fn rank_class(&self, rank: u32) -> u32 {
        self.rank_class[(rank - 1) as usize]
    }

    /// Boundary ranks of the two endpoints of a cut arc, as (rank at the
    /// primary side's start corner, rank at its end corner).
    pub fn arc_end_ranks(&self, arc: u32) -> (u32, u32) {
        let s = arc_primary_side(arc);
        let n = self.side_count();
        let r1 = self.class_rank(self.corner_class(s));
        let r2 = self.class_rank(self.corner_class((s + 1) % n));
        (r1, r2)
    }

    // -- standard curves ----------------------------------------------------

    /// The standard curve `a_{h+1}`: crosses the handle's `X` arc once.
    pub fn curve_a(&self, h: u32) -> CurvePath {
        assert!(h < self.genus);
        CurvePath::closed(vec![SidePoint::new(8 * h, rat(1, 2))])
    }

    /// The standard curve `b_{h+1}`: crosses the handle's `Y` arc once.
    pub fn curve_b(&self, h: u32) -> CurvePath {
        assert!(h < self.genus);
        CurvePath::closed(vec![SidePoint::new(8 * h + 2, rat(1, 2))])
    }

    /// Look up a standard curve by name: `a1..ag`, `b1..bg`.
    pub fn named_curve(&self, name: &str) -> Result<CurvePath> {
        if name.len() < 2 || !name.is_ascii() {
            return Err(Error::invalid(format!("unknown curve name `{name}`")));
        }
        let (family, index) = name.split_at(1);
        let idx: u32 = index
            .parse()
            .map_err(|_| Error::invalid(format!("unknown curve name `{name}`")))?;
        if idx == 0 || idx > self.genus {
            return Err(Error::invalid(format!(
                "curve `{name}` does not exist at genus {}",
                self.genus
            )));
        }
        match family {
            "a" => Ok(self.curve_a(idx - 1)),
            "b" => Ok(self.curve_b(idx - 1)),
            _ => Err(Error::invalid(format!("unknown curve name `{name}`"))),
        }
    }

    /// Names of all standard curves at this genus.
    pub fn curve_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for i in 1..=self.genus {
            names.push(format!("a{i}"));
            names.push(format!("b{i}"));
        }
        names
    }

    /// A curve parallel to the boundary: rounds every boundary vertex once,
    /// crossing each even side near its start corner.
    pub fn boundary_parallel_curve(&self) -> CurvePath {
        let n = self.side_count();
        let exits = self
            .delta_cycle
            .iter()
            .map(|d| SidePoint::new((d + 1) % n, rat(1, 8)))
            .collect();
        CurvePath::closed(exits)
    }

    /// A properly embedded arc parallel to a cut arc, pushed off toward the
    /// primary side copy.  Its single chord runs from the δ side before the
    /// primary copy (at `pos_before`) to the δ side after it (at `pos_after`).
    pub fn cut_arc_pushoff(&self, arc: u32, pos_before: Rat, pos_after: Rat) -> CurvePath {
        let s = arc_primary_side(arc);
        let n = self.side_count();
        let before = (s + n - 1) % n;
        let after = (s + 1) % n;
        CurvePath::arc(
            SidePoint::new(before, pos_before),
            SidePoint::new(after, pos_after),
            Vec::new(),
        )
    }

    // -- homology -----------------------------------------------------------

    /// Integral homology class: signed crossing counts with the cut arcs
    /// (positive when exiting through the primary copy).
    pub fn homology_class(&self, c: &CurvePath) -> Vec<i64> {
        let mut class = vec![0i64; self.arc_count() as usize];
        for e in &c.exits {
            let a = arc_index_of_side(e.side) as usize;
            if e.side == arc_primary_side(a as u32) {
                class[a] += 1;
            } else {
                class[a] -= 1;
            }
        }
        class
    }

    /// The algebraic intersection pairing of two homology classes, normalized
    /// so that `⟨[a_h], [b_h]⟩ = +1`.
    pub fn homology_pairing(&self, u: &[i64], v: &[i64]) -> i64 {
        let mut total = 0;
        for h in 0..self.genus as usize {
            total += u[2 * h] * v[2 * h + 1] - u[2 * h + 1] * v[2 * h];
        }
        total
    }

    // -- crossings ----------------------------------------------------------

    fn check_valid(&self, c: &CurvePath) -> Result<()> {
        let n = self.side_count();
        for e in &c.exits {
            if e.side >= n || side_is_boundary(e.side) {
                return Err(Error::invalid(format!("exit on invalid side {}", e.side)));
            }
            if e.pos <= Rat::zero() || e.pos >= Rat::one() {
                return Err(Error::invalid("exit position outside (0,1)"));
            }
        }
        match &c.kind {
            CurveKind::Closed => Ok(()),
            CurveKind::Arc { start, end } => {
                for p in [start, end] {
                    if p.side >= n || !side_is_boundary(p.side) {
                        return Err(Error::invalid(
                            "arc endpoint must lie on a boundary side",
                        ));
                    }
                    if p.pos <= Rat::zero() || p.pos >= Rat::one() {
                        return Err(Error::invalid("endpoint position outside (0,1)"));
                    }
                }
                Ok(())
            }
        }
    }

    fn plane_chords(&self, c: &CurvePath) -> Vec<(PlanePoint, PlanePoint)> {
        let sides = self.side_count();
        c.chords()
            .iter()
            .map(|(p, q)| {
                (circle_point(&p.theta(), sides), circle_point(&q.theta(), sides))
            })
            .collect()
    }

    /// All transverse crossings between two distinct paths, with exact
    /// parameters along both chords.
    pub(crate) fn pair_crossings(&self, u: &CurvePath, v: &CurvePath) -> Vec<PairCrossing> {
        let uc = self.plane_chords(u);
        let vc = self.plane_chords(v);
        let mut out = Vec::new();
        for (i, (a, b)) in uc.iter().enumerate() {
            for (j, (c, d)) in vc.iter().enumerate() {
                if let Some((t, s)) = segment_intersection(a, b, c, d) {
                    let sign = {
                        let det = cross2(
                            &(b.x.clone() - a.x.clone()),
                            &(b.y.clone() - a.y.clone()),
                            &(d.x.clone() - c.x.clone()),
                            &(d.y.clone() - c.y.clone()),
                        );
                        if det.is_positive() {
                            1
                        } else {
                            -1
                        }
                    };
                    out.push(PairCrossing { u_chord: i, v_chord: j, t_u: t, t_v: s, sign });
                }
            }
        }
        out
    }

    /// Self-crossings of a single path (unordered chord pairs).
    pub(crate) fn self_crossings(&self, u: &CurvePath) -> Vec<PairCrossing> {
        let uc = self.plane_chords(u);
        let mut out = Vec::new();
        for i in 0..uc.len() {
            for j in (i + 1)..uc.len() {
                let (a, b) = &uc[i];
                let (c, d) = &uc[j];
                if let Some((t, s)) = segment_intersection(a, b, c, d) {
                    out.push(PairCrossing { u_chord: i, v_chord: j, t_u: t, t_v: s, sign: 0 });
                }
            }
        }
        out
    }

    /// Number of transverse self-crossings of the stored representative.
    pub fn self_crossing_count(&self, u: &CurvePath) -> usize {
        self.self_crossings(u).len()
    }

    // -- generic position ---------------------------------------------------

    /// Least positive gap between consecutive values in the sorted multiset of
    /// all angular coordinates touched by the given paths, with the side
    /// boundaries (integer angles) included as virtual marks.
    fn min_theta_gap(&self, curves: &[&CurvePath]) -> Rat {
        let mut thetas: Vec<Rat> = (0..self.side_count())
            .map(|s| Rat::from(BigInt::from(s)))
            .collect();
        for c in curves {
            for e in &c.exits {
                thetas.push(e.theta());
                thetas.push(e.glued().theta());
            }
            if let CurveKind::Arc { start, end } = &c.kind {
                thetas.push(start.theta());
                thetas.push(end.theta());
            }
        }
        thetas.sort();
        let mut best: Option<Rat> = None;
        for w in thetas.windows(2) {
            let gap = w[1].clone() - w[0].clone();
            if gap.is_positive() && best.as_ref().map_or(true, |b| gap < *b) {
                best = Some(gap);
            }
        }
        best.unwrap_or_else(Rat::one)
    }

    /// Whether two paths share any exact angular coordinate.
    fn shares_coordinates(&self, u: &CurvePath, v: &CurvePath) -> bool {
        let mut set = std::collections::BTreeSet::new();
        for e in &u.exits {
            set.insert(e.theta());
            set.insert(e.glued().theta());
        }
        if let CurveKind::Arc { start, end } = &u.kind {
            set.insert(start.theta());
            set.insert(end.theta());
        }
        let check = |t: Rat| set.contains(&t);
        for e in &v.exits {
            if check(e.theta()) || check(e.glued().theta()) {
                return true;
            }
        }
        if let CurveKind::Arc { start, end } = &v.kind {
            if check(start.theta()) || check(end.theta()) {
                return true;
            }
        }
        false
    }

    /// Perturb `v` if it shares exact coordinates with `u`, so that the pair
    /// is in generic position.  The perturbation is a small uniform position
    /// shift — an isotopy, so intersection counts after reduction are
    /// unaffected.
    fn make_generic(&self, u: &CurvePath, v: &CurvePath) -> CurvePath {
        if !self.shares_coordinates(u, v) {
            return v.clone();
        }
        let gap = self.min_theta_gap(&[u, v]);
        let eta = gap / Rat::from(BigInt::from(4));
        v.offset_all(&eta)
    }

    // -- reduction: cut-arc returns -----------------------------------------

    /// Remove all *returns*: consecutive exits through the two copies of the
    /// same cut arc.  Such a pair cuts off a disc against the arc, so deleting
    /// both crossings is a homotopy of the path.  Iterates to a fixed point.
    pub fn remove_returns(&self, c: &CurvePath) -> CurvePath {
        self.remove_returns_guarded(c, None)
    }

    /// Like [`Self::remove_returns`], but guarded by a winding gate.  Removing
    /// a return both erases the disc against the cut arc and straightens the
    /// neighbouring chords, so the swept region can reach far from the pair
    /// itself; the removal is an isotopy of the marked surface exactly when
    /// the net gate crossing number of the path is unchanged.  Pairs whose
    /// removal would change it are kept.
    pub(crate) fn remove_returns_guarded(
        &self,
        c: &CurvePath,
        gate: Option<&WindingGate>,
    ) -> CurvePath {
        let mut cur = c.clone();
        let target_net = gate.map(|g| self.gate_crossing_net(&cur, g));
        loop {
            let n = cur.exits.len();
            if n < 2 {
                // A closed curve with a single exit cannot return; an arc with
                // fewer than two exits cannot either.
                break;
            }
            let limit = if cur.is_closed() { n } else { n - 1 };
            let mut removed = None;
            for i in 0..limit {
                let j = (i + 1) % n;
                if cur.exits[j].side != partner_side(cur.exits[i].side) {
                    continue;
                }
                let mut exits = cur.exits.clone();
                if j > i {
                    exits.remove(j);
                    exits.remove(i);
                } else {
                    // wrapped pair (closed curve): j == 0, i == n-1
                    exits.remove(i);
                    exits.remove(j);
                }
                let candidate = CurvePath { kind: cur.kind.clone(), exits };
                if let (Some(g), Some(net)) = (gate, target_net.as_ref()) {
                    if self.gate_crossing_net(&candidate, g) != *net {
                        continue;
                    }
                }
                removed = Some(candidate);
                break;
            }
            match removed {
                None => break,
                Some(next) => cur = next,
            }
        }
        cur
    }

    /// Net signed crossing number of a path with a gate segment.  The sign
    /// convention (orientation of gate direction against chord direction) is
    /// fixed but arbitrary; guarded reductions only ever compare nets of a
    /// path with nets of its candidate replacements.
    fn gate_crossing_net(&self, c: &CurvePath, gate: &WindingGate) -> i64 {
        let n = self.side_count();
        let (ga, gb) = gate;
        let gdx = gb.x.clone() - ga.x.clone();
        let gdy = gb.y.clone() - ga.y.clone();
        let mut net = 0i64;
        for (a, b) in c.chords() {
            let pa = circle_point(&a.theta(), n);
            let pb = circle_point(&b.theta(), n);
            // `segment_intersection` rejects parallel segments, so the cross
            // product below is nonzero whenever a crossing is reported.
            if segment_intersection(ga, gb, &pa, &pb).is_some() {
                let cdx = pb.x - pa.x;
                let cdy = pb.y - pa.y;
                let orient = cross2(&gdx, &gdy, &cdx, &cdy);
                net += if orient.is_negative() { 1 } else { -1 };
            }
        }
        net
    }

    // -- reduction: bigons ---------------------------------------------------

    /// Reduce the pair `(u, v)` to minimal position by removing innermost
    /// bigons, always rerouting `u`.  Both paths must already be return-free.
    /// Returns the reduced `u` and the final crossing count.
    fn reduce_pair(&self, u: &CurvePath, v: &CurvePath) -> Result<(CurvePath, usize)> {
        let mut cur = u.clone();
        let budget = 4 * (self.pair_crossings(&cur, v).len() + cur.exits.len() + v.exits.len()) + 64;
        for _ in 0..budget {
            cur = self.remove_returns(&cur);
            let crossings = self.pair_crossings(&cur, v);
            match self.find_pair_bigon(&cur, v, &crossings) {
                None => return Ok((cur, crossings.len())),
                Some(bigon) => {
                    cur = self.remove_pair_bigon(&cur, v, &bigon, crossings.len())?;
                }
            }
        }
        Err(Error::internal("bigon reduction exceeded its move budget"))
    }

    /// Locate an innermost bigon between `u` and `v`: a pair of crossings
    /// adjacent along both paths whose connecting subpaths cross the same cut
    /// arcs in the same order.
    fn find_pair_bigon(
        &self,
        u: &CurvePath,
        v: &CurvePath,
        crossings: &[PairCrossing],
    ) -> Option<Bigon> {
        if crossings.len() < 2 {
            return None;
        }
        let mut by_u: Vec<usize> = (0..crossings.len()).collect();
        by_u.sort_by(|&a, &b| {
            (crossings[a].u_chord, &crossings[a].t_u).cmp(&(crossings[b].u_chord, &crossings[b].t_u))
        });
        let mut by_v: Vec<usize> = (0..crossings.len()).collect();
        by_v.sort_by(|&a, &b| {
            (crossings[a].v_chord, &crossings[a].t_v).cmp(&(crossings[b].v_chord, &crossings[b].t_v))
        });
        let m = crossings.len();
        let mut v_pos = vec![0usize; m];
        for (slot, &ci) in by_v.iter().enumerate() {
            v_pos[ci] = slot;
        }
        let u_adjacent_limit = if u.is_closed() { m } else { m - 1 };
        for k in 0..u_adjacent_limit {
            let p = by_u[k];
            let q = by_u[(k + 1) % m];
            // Adjacency along v: consecutive slots (cyclically for closed v).
            let sp = v_pos[p];
            let sq = v_pos[q];
            let v_forward_pq = if v.is_closed() {
                (sp + 1) % m == sq
            } else {
                sp + 1 == sq
            };
            let v_forward_qp = if v.is_closed() {
                (sq + 1) % m == sp
            } else {
                sq + 1 == sp
            };
            if !v_forward_pq && !v_forward_qp {
                continue;
            }
            let cp = &crossings[p];
            let cq = &crossings[q];
            // Exits of u strictly between P and Q (forward).
            let u_exits =
                match self.subpath_exit_indices(u, cp.u_chord, cq.u_chord, &cp.t_u, &cq.t_u) {
                    Some(e) => e,
                    None => continue,
                };
            // Points of v between P and Q, aligned to the P→Q direction.
            let v_points: Vec<SidePoint> = if v_forward_pq {
                match self.subpath_points_forward(v, cp.v_chord, cq.v_chord, &cp.t_v, &cq.t_v) {
                    Some(pts) => pts,
                    None => continue,
                }
            } else {
                match self.subpath_points_forward(v, cq.v_chord, cp.v_chord, &cq.t_v, &cp.t_v) {
                    Some(back) => back.into_iter().rev().map(|p| p.glued()).collect(),
                    None => continue,
                }
            };
            if u_exits.len() != v_points.len() {
                continue;
            }
            let sides_match = u_exits
                .iter()
                .zip(v_points.iter())
                .all(|(&ei, vp)| u.exits[ei].side == vp.side);
            if sides_match {
                return Some(Bigon { u_exit_range: u_exits, v_points });
            }
        }
        None
    }

    /// Exit indices of `u` strictly between two crossing sites (forward).
    /// Returns `None` when the forward direction is not realizable (arc ends
    /// in between), which cannot occur for adjacent crossings.
    #[allow(clippy::too_many_arguments)]
    fn subpath_exit_indices(
        &self,
        u: &CurvePath,
        chord_p: usize,
        chord_q: usize,
        t_p: &Rat,
        t_q: &Rat,
    ) -> Option<Vec<usize>> {
        let n_chords = u.chord_count();
        let n_exits = u.exits.len();
        if chord_p == chord_q && t_p < t_q {
            return Some(Vec::new());
        }
        let mut exits = Vec::new();
        let mut c = chord_p;
        loop {
            // exit closing chord c:
            let e = if u.is_closed() { c % n_exits } else { c };
            if !u.is_closed() && e >= n_exits {
                return None; // ran off the end of the arc
            }
            exits.push(e);
            c = (c + 1) % n_chords;
            if c == chord_q {
                break;
            }
            if exits.len() > n_chords {
                return None;
            }
        }
        Some(exits)
    }

    /// Points where the subpath of `v` from crossing P to crossing Q (forward
    /// direction) exits the polygon.
    fn subpath_points_forward(
        &self,
        v: &CurvePath,
        chord_p: usize,
        chord_q: usize,
        t_p: &Rat,
        t_q: &Rat,
    ) -> Option<Vec<SidePoint>> {
        Some(
            self.subpath_exit_indices(v, chord_p, chord_q, t_p, t_q)?
                .into_iter()
                .map(|i| v.exits[i].clone())
                .collect(),
        )
    }

    /// Remove a located bigon by rerouting `u` along `v`'s side of the disc.
    fn remove_pair_bigon(
        &self,
        u: &CurvePath,
        v: &CurvePath,
        bigon: &Bigon,
        old_count: usize,
    ) -> Result<CurvePath> {
        let gap = self.min_theta_gap(&[u, v]);
        let eta = gap / Rat::from(BigInt::from(4));
        for sign in [1i64, -1] {
            let offset = if sign > 0 { eta.clone() } else { -eta.clone() };
            let hug: Vec<SidePoint> = bigon
                .v_points
                .iter()
                .map(|p| SidePoint::new(p.side, p.pos.clone() + offset.clone()))
                .collect();
            let candidate = replace_exit_range(u, &bigon.u_exit_range, &hug);
            if candidate.is_none() {
                continue;
            }
            let candidate = self.remove_returns(&candidate.unwrap());
            if self.check_valid(&candidate).is_err() {
                continue;
            }
            let new_count = self.pair_crossings(&candidate, v).len();
            if new_count + 2 <= old_count && (old_count - new_count) % 2 == 0 {
                return Ok(candidate);
            }
        }
        Err(Error::internal("failed to remove a detected bigon"))
    }

    /// Reduce self-crossings of a single path by removing innermost bigons
    /// between its own strands, with an optional winding gate threaded through
    /// every internal return-removal pass and checked against every reroute.
    /// Returns the reduced path; under a gate, bigons whose disc contains the
    /// marked point are left in place rather than removed.
    fn reduce_self_guarded(
        &self,
        u: &CurvePath,
        gate: Option<&WindingGate>,
    ) -> Result<CurvePath> {
        let mut cur = self.remove_returns_guarded(u, gate);
        let target_net = gate.map(|g| self.gate_crossing_net(&cur, g));
        let budget = 4 * (self.self_crossings(&cur).len() + cur.exits.len()) + 16;
        for _ in 0..budget {
            let crossings = self.self_crossings(&cur);
            if crossings.is_empty() {
                return Ok(cur);
            }
            let old = crossings.len();
            let bigons = self.find_self_bigons(&cur, &crossings);
            if bigons.is_empty() {
                return Ok(cur);
            }
            let gap = self.min_theta_gap(&[&cur]);
            let eta = gap / Rat::from(BigInt::from(4));
            let mut next = None;
            'search: for bigon in &bigons {
                for sign in [1i64, -1] {
                    let offset = if sign > 0 { eta.clone() } else { -eta.clone() };
                    let hug: Vec<SidePoint> = bigon
                        .v_points
                        .iter()
                        .map(|p| SidePoint::new(p.side, p.pos.clone() + offset.clone()))
                        .collect();
                    let candidate = match replace_exit_range(&cur, &bigon.u_exit_range, &hug) {
                        Some(c) => c,
                        None => continue,
                    };
                    let candidate = self.remove_returns_guarded(&candidate, gate);
                    if self.check_valid(&candidate).is_err()
                        || self.self_crossings(&candidate).len() + 2 > old
                    {
                        continue;
                    }
                    if let (Some(g), Some(net)) = (gate, target_net.as_ref()) {
                        if self.gate_crossing_net(&candidate, g) != *net {
                            continue;
                        }
                    }
                    next = Some(candidate);
                    break 'search;
                }
            }
            match next {
                Some(c) => cur = c,
                None if gate.is_some() => return Ok(cur),
                None => return Err(Error::internal("failed to remove a detected self-bigon")),
            }
        }
        Err(Error::internal("self-bigon reduction exceeded its move budget"))
    }

    /// Locate innermost bigons between strands of the same path, in travel
    /// order of their first crossing.
    fn find_self_bigons(&self, u: &CurvePath, crossings: &[PairCrossing]) -> Vec<Bigon> {
        let mut out = Vec::new();
        if crossings.is_empty() {
            return out;
        }
        // Occurrence list: each crossing appears at both of its chords.
        #[derive(Clone)]
        struct Occ {
            crossing: usize,
            chord: usize,
            t: Rat,
        }
        let mut occs: Vec<Occ> = Vec::with_capacity(2 * crossings.len());
        for (ci, c) in crossings.iter().enumerate() {
            occs.push(Occ { crossing: ci, chord: c.u_chord, t: c.t_u.clone() });
            occs.push(Occ { crossing: ci, chord: c.v_chord, t: c.t_v.clone() });
        }
        occs.sort_by(|a, b| (a.chord, &a.t).cmp(&(b.chord, &b.t)));
        let m = occs.len();
        let slot_of = |crossing: usize, chord: usize| -> usize {
            occs.iter()
                .position(|o| o.crossing == crossing && o.chord == chord)
                .expect("occurrence present")
        };
        let limit = if u.is_closed() { m } else { m - 1 };
        for k in 0..limit {
            let x = &occs[k];
            let y = &occs[(k + 1) % m];
            if x.crossing == y.crossing {
                continue;
            }
            let cx = &crossings[x.crossing];
            let cy = &crossings[y.crossing];
            // Other occurrences of the same two crossings.
            let ox_chord = if x.chord == cx.u_chord { cx.v_chord } else { cx.u_chord };
            let oy_chord = if y.chord == cy.u_chord { cy.v_chord } else { cy.u_chord };
            let sx = slot_of(x.crossing, ox_chord);
            let sy = slot_of(y.crossing, oy_chord);
            let adj_forward = if u.is_closed() { (sx + 1) % m == sy } else { sx + 1 == sy };
            let adj_backward = if u.is_closed() { (sy + 1) % m == sx } else { sy + 1 == sx };
            if !adj_forward && !adj_backward {
                continue;
            }
            let t_of = |crossing: &PairCrossing, chord: usize| -> Rat {
                if chord == crossing.u_chord {
                    crossing.t_u.clone()
                } else {
                    crossing.t_v.clone()
                }
            };
            let strand1 = match self.subpath_exit_indices(u, x.chord, y.chord, &x.t, &y.t) {
                Some(e) => e,
                None => continue,
            };
            let strand2_pts: Vec<SidePoint> = if adj_forward {
                match self.subpath_points_forward(
                    u,
                    ox_chord,
                    oy_chord,
                    &t_of(cx, ox_chord),
                    &t_of(cy, oy_chord),
                ) {
                    Some(pts) => pts,
                    None => continue,
                }
            } else {
                match self.subpath_points_forward(
                    u,
                    oy_chord,
                    ox_chord,
                    &t_of(cy, oy_chord),
                    &t_of(cx, ox_chord),
                ) {
                    Some(back) => back.into_iter().rev().map(|p| p.glued()).collect(),
                    None => continue,
                }
            };
            if strand1.len() != strand2_pts.len() {
                continue;
            }
            // The two strands must be disjoint exit ranges.
            let strand2_indices =
                self.subpath_exit_indices(u, ox_chord, oy_chord, &Rat::zero(), &Rat::one());
            if let Some(idx2) = &strand2_indices {
                if strand1.iter().any(|i| idx2.contains(i)) && adj_forward {
                    continue;
                }
            }
            let sides_match = strand1
                .iter()
                .zip(strand2_pts.iter())
                .all(|(&ei, vp)| u.exits[ei].side == vp.side);
            if sides_match {
                out.push(Bigon { u_exit_range: strand1, v_points: strand2_pts });
            }
        }
        out
    }

    // -- public reduction API ------------------------------------------------

    /// Canonical reduced representative of a path: return-free and with no
    /// self-bigons.  Homotopy class (rel endpoints for arcs) is preserved.
    pub fn reduce(&self, c: &CurvePath) -> Result<CurvePath> {
        self.reduce_guarded(c, None)
    }

    /// [`Self::reduce`] with an optional winding gate.  Guarded callers keep
    /// every move inside the isotopy class rel the marked point, so the
    /// result is reduced only up to isotopy of the marked surface.
    pub(crate) fn reduce_guarded(
        &self,
        c: &CurvePath,
        gate: Option<&WindingGate>,
    ) -> Result<CurvePath> {
        self.check_valid(c)?;
        let cur = self.remove_returns_guarded(c, gate);
        self.reduce_self_guarded(&cur, gate)
    }

    /// Geometric intersection number of two paths: the minimal transverse
    /// crossing count over their isotopy classes.
    pub fn geometric_intersection(&self, u: &CurvePath, v: &CurvePath) -> Result<usize> {
        self.check_valid(u)?;
        self.check_valid(v)?;
        let u = self.reduce(u)?;
        let v0 = self.reduce(v)?;
        let v = self.make_generic(&u, &v0);
        let (_, count) = self.reduce_pair(&u, &v)?;
        Ok(count)
    }

    /// Isotope the pair into minimal position.  Returns representatives that
    /// realize the geometric intersection number, with canonical coordinates.
    pub fn minimal_position(&self, u: &CurvePath, v: &CurvePath) -> Result<(CurvePath, CurvePath)> {
        self.check_valid(u)?;
        self.check_valid(v)?;
        let u = self.reduce(u)?;
        let v0 = self.reduce(v)?;
        let v = self.make_generic(&u, &v0);
        let (u, _) = self.reduce_pair(&u, &v)?;
        let mut pair = [u, v];
        self.renormalize(&mut pair)?;
        let [u, v] = pair;
        Ok((u, v))
    }

    // -- renormalization ----------------------------------------------------

    /// Rewrite all positions of a family of paths to canonical small-height
    /// rationals, preserving every crossing order.  Points are re-spaced
    /// rank-by-rank along each cut arc (and each boundary side), which leaves
    /// all interleavings — hence all intersection patterns — unchanged.
    pub fn renormalize(&self, curves: &mut [CurvePath]) -> Result<()> {
        // Collect (arc, arc-coordinate) for every exit.  The arc coordinate of
        // an exit through the primary copy at position `t` is `t`; through the
        // secondary copy it is `1 − t`.
        #[derive(PartialEq, Eq, PartialOrd, Ord)]
        struct Key {
            coord: Rat,
            curve: usize,
            index: usize,
        }
        let arc_total = self.arc_count();
        let mut per_arc: Vec<Vec<Key>> = (0..arc_total).map(|_| Vec::new()).collect();
        let mut per_delta: BTreeMap<u32, Vec<Key>> = BTreeMap::new();
        for (ci, c) in curves.iter().enumerate() {
            self.check_valid(c)?;
            for (ei, e) in c.exits.iter().enumerate() {
                let a = arc_index_of_side(e.side);
                let coord = if e.side == arc_primary_side(a) {
                    e.pos.clone()
                } else {
                    Rat::one() - e.pos.clone()
                };
                per_arc[a as usize].push(Key { coord, curve: ci, index: ei });
            }
            if let CurveKind::Arc { start, end } = &c.kind {
                per_delta
                    .entry(start.side)
                    .or_default()
                    .push(Key { coord: start.pos.clone(), curve: ci, index: usize::MAX });
                per_delta
                    .entry(end.side)
                    .or_default()
                    .push(Key { coord: end.pos.clone(), curve: ci, index: usize::MAX - 1 });
            }
        }
        let assign = |keys: &mut Vec<Key>, curves: &mut [CurvePath], on_arc: Option<u32>| -> Result<()> {
            keys.sort();
            for w in keys.windows(2) {
                if w[0].coord == w[1].coord {
                    return Err(Error::internal(
                        "coincident transversal coordinates during renormalization",
                    ));
                }
            }
            let m = keys.len() as i64;
            for (rank, key) in keys.iter().enumerate() {
                let new_coord = rat(rank as i64 + 1, m + 1);
                let c = &mut curves[key.curve];
                match key.index {
                    usize::MAX => {
                        if let CurveKind::Arc { start, .. } = &mut c.kind {
                            start.pos = new_coord;
                        }
                    }
                    i if i == usize::MAX - 1 => {
                        if let CurveKind::Arc { end, .. } = &mut c.kind {
                            end.pos = new_coord;
                        }
                    }
                    ei => {
                        let side = c.exits[ei].side;
                        let arc = on_arc.expect("exit key implies arc");
                        c.exits[ei].pos = if side == arc_primary_side(arc) {
                            new_coord
                        } else {
                            Rat::one() - new_coord
                        };
                    }
                }
            }
            Ok(())
        };
        for a in 0..arc_total {
            let mut keys = std::mem::take(&mut per_arc[a as usize]);
            assign(&mut keys, curves, Some(a))?;
        }
        for (_, mut keys) in per_delta {
            assign(&mut keys, curves, None)?;
        }
        Ok(())
    }

    // -- Dehn twists ---------------------------------------------------------

    /// Image of `c` under the Dehn twist along the simple closed curve `l`,
    /// with `power = ±1` selecting the handedness.  The positive twist is the
    /// one whose action on homology is the transvection
    /// `[c] ↦ [c] + ⟨[l],[c]⟩·[l]` (with `⟨[a₁],[b₁]⟩ = +1`).
    pub fn dehn_twist(&self, l: &CurvePath, c: &CurvePath, power: i64) -> Result<CurvePath> {
        self.dehn_twist_guarded(l, c, power, None)
    }

    /// [`Self::dehn_twist`] with an optional winding gate guarding every
    /// reduction of the *twisted* path (the twisting curve itself is always
    /// reduced freely).  Basepoint-aware callers use this so the twist acts on
    /// the isotopy class in the marked surface.
    pub(crate) fn dehn_twist_guarded(
        &self,
        l: &CurvePath,
        c: &CurvePath,
        power: i64,
        gate: Option<&WindingGate>,
    ) -> Result<CurvePath> {
        let mut out = self.dehn_twist_family_guarded(l, std::slice::from_ref(c), power, gate)?;
        Ok(out.pop().expect("family twist returns one path per input"))
    }

    /// Twist a whole family of paths along `l` in one pass.
    ///
    /// Twisting the members independently is not safe: each inserted parallel
    /// copy of `l` lives on its own offset lane inside the twisting annulus,
    /// and two strands that enter the annulus next to each other must also
    /// travel next to each other inside it.  The lane offsets are therefore
    /// assigned globally, nested by the position at which each strand crosses
    /// `l` (with the nesting direction flipping with the twist handedness).
    /// Per-member assignment would interleave lanes arbitrarily and create
    /// crossings between members that are disjoint in the surface.
    pub(crate) fn dehn_twist_family_guarded(
        &self,
        l: &CurvePath,
        cs: &[CurvePath],
        power: i64,
        gate: Option<&WindingGate>,
    ) -> Result<Vec<CurvePath>> {
        if power != 1 && power != -1 {
            return Err(Error::invalid("twist power must be ±1; compose for higher powers"));
        }
        if !l.is_closed() {
            return Err(Error::invalid("can only twist along a closed curve"));
        }
        self.check_valid(l)?;
        let l = self.reduce(l)?;
        if l.exits.is_empty() {
            return Err(Error::invalid("cannot twist along an inessential curve"));
        }
        if !self.self_crossings(&l).is_empty() {
            return Err(Error::invalid("twisting curve must be embedded"));
        }
        let mut gens: Vec<CurvePath> = Vec::with_capacity(cs.len());
        for c in cs {
            self.check_valid(c)?;
            let c_red = self.reduce_guarded(c, gate)?;
            gens.push(self.make_generic(&l, &c_red));
        }
        let crossings_per: Vec<Vec<PairCrossing>> =
            gens.iter().map(|g| self.pair_crossings(g, &l)).collect();
        // All crossings of the family with `l`, in travel order along `l`.
        let mut order: Vec<(usize, usize)> = Vec::new();
        for (ai, xs) in crossings_per.iter().enumerate() {
            for xi in 0..xs.len() {
                order.push((ai, xi));
            }
        }
        order.sort_by(|&(ai, xi), &(bi, yi)| {
            let x = &crossings_per[ai][xi];
            let y = &crossings_per[bi][yi];
            (x.v_chord, &x.t_v).cmp(&(y.v_chord, &y.t_v))
        });
        let total = order.len() as i64;
        if total == 0 {
            return Ok(gens);
        }
        let mut participants: Vec<&CurvePath> = gens.iter().collect();
        participants.push(&l);
        let gap = self.min_theta_gap(&participants);
        // Nested lane offsets: strictly monotone in the travel position along
        // `l`, decreasing for a positive twist and increasing for a negative
        // one.  (The direction is calibrated by the same curve-tracing oracle
        // as `TWIST_CHIRALITY`; a uniform wrong direction would put every
        // pair of annulus strands in crossing position.)
        let mut eta_for: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
        for (rank, key) in order.iter().enumerate() {
            let level = if power > 0 { total - rank as i64 } else { rank as i64 + 1 };
            let eta = gap.clone() * Rat::new(BigInt::from(level), BigInt::from(2 * (total + 1)));
            eta_for.insert(*key, eta);
        }
        let n_l = l.exits.len();
        let mut out: Vec<CurvePath> = Vec::with_capacity(gens.len());
        for (ai, c_gen) in gens.iter().enumerate() {
            let crossings = &crossings_per[ai];
            if crossings.is_empty() {
                out.push(c_gen.clone());
                continue;
            }
            // Group crossings by the chord of `c` they lie on, ordered along it.
            let mut by_chord: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (xi, x) in crossings.iter().enumerate() {
                by_chord.entry(x.u_chord).or_default().push(xi);
            }
            for list in by_chord.values_mut() {
                list.sort_by(|&a, &b| crossings[a].t_u.cmp(&crossings[b].t_u));
            }
            let mut new_exits: Vec<SidePoint> = Vec::new();
            let n_chords = c_gen.chord_count();
            for chord_i in 0..n_chords {
                if let Some(list) = by_chord.get(&chord_i) {
                    for &xi in list {
                        let x = &crossings[xi];
                        let eta = &eta_for[&(ai, xi)];
                        // Parallel copy of `l` at offset eta.
                        let copy: Vec<SidePoint> = l
                            .exits
                            .iter()
                            .map(|e| SidePoint::new(e.side, e.pos.clone() + eta.clone()))
                            .collect();
                        // Direction of the inserted loop: the twist handedness
                        // times the local crossing sign (so that every strand
                        // wraps the annulus coherently).
                        let dir = power * i64::from(x.sign) * TWIST_CHIRALITY;
                        let j = x.v_chord;
                        if dir > 0 {
                            for k in 0..n_l {
                                new_exits.push(copy[(j + k) % n_l].clone());
                            }
                        } else {
                            for k in 0..n_l {
                                let idx = (j + n_l - 1 - k) % n_l;
                                new_exits.push(copy[idx].glued());
                            }
                        }
                    }
                }
                // Close the chord with c's own exit (except the final arc chord).
                match &c_gen.kind {
                    CurveKind::Closed => new_exits.push(c_gen.exits[chord_i].clone()),
                    CurveKind::Arc { .. } => {
                        if chord_i < c_gen.exits.len() {
                            new_exits.push(c_gen.exits[chord_i].clone());
                        }
                    }
                }
            }
            let twisted = CurvePath { kind: c_gen.kind.clone(), exits: new_exits };
            out.push(self.reduce_guarded(&twisted, gate)?);
        }
        Ok(out)
    }
}

/// Calibration of the positive-twist traversal direction against the
/// homological transvection convention.  Fixed once by the curve-tracing
/// oracle (`[τ⁺_{a₁}(b₁)] = [a₁] + [b₁]`).
const TWIST_CHIRALITY: i64 = -1;

/// A transverse crossing between chords of two paths (or two strands of one).
#[derive(Clone, Debug)]
pub(crate) struct PairCrossing {
    pub u_chord: usize,
    pub v_chord: usize,
    pub t_u: Rat,
    pub t_v: Rat,
    /// Orientation sign of (u-direction, v-direction); 0 when unused.
    pub sign: i8,
}

/// A located bigon: the exit indices of the strand to reroute, and the points
/// of the other strand to hug.
struct Bigon {
    u_exit_range: Vec<usize>,
    v_points: Vec<SidePoint>,
}

/// Replace the exits at `range` (in travel order, possibly wrapping for a
/// closed curve) with the given replacement points.  Returns `None` when the
/// range is not expressible (defensive; cannot occur for located bigons).
fn replace_exit_range(u: &CurvePath, range: &[usize], replacement: &[SidePoint]) -> Option<CurvePath> {
    let n = u.exits.len();
    if range.iter().any(|&i| i >= n) {
        return None;
    }
    if range.is_empty() {
        return Some(u.clone());
    }
    // Check the range is consecutive in travel order.
    for w in range.windows(2) {
        if (w[0] + 1) % n != w[1] {
            return None;
        }
    }
    let mut exits = Vec::with_capacity(n - range.len() + replacement.len());
    let start = range[0];
    // Walk from just after the range's end back around to its start,
    // collecting the untouched exits, then append the replacement at the
    // range's position.  Rebuild in travel order starting at index 0.
    let in_range = |i: usize| range.contains(&i);
    let mut i = 0usize;
    while i < n {
        if in_range(i) {
            if i == start {
                exits.extend(replacement.iter().cloned());
            }
            i += 1;
            continue;
        }
        exits.push(u.exits[i].clone());
        i += 1;
    }
    // A wrapped range with start > 0 inserts the replacement at the wrong
    // place when the range crosses index 0; handle by rotating: the curve is
    // closed in that case, so any rotation is equivalent.
    if u.is_closed() && range.windows(2).any(|w| w[1] < w[0]) {
        // Rebuild: untouched exits in travel order starting after the range,
        // then replacement appended (cyclic order preserved).
        let end = *range.last().unwrap();
        let mut rot = Vec::with_capacity(exits.capacity());
        let mut j = (end + 1) % n;
        while j != start {
            rot.push(u.exits[j].clone());
            j = (j + 1) % n;
        }
        rot.extend(replacement.iter().cloned());
        return Some(CurvePath { kind: u.kind.clone(), exits: rot });
    }
    Some(CurvePath { kind: u.kind.clone(), exits })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(genus: u32) -> Surface {
        Surface::build(genus).unwrap()
    }

    #[test]
    fn rejects_genus_zero() {
        assert!(matches!(Surface::build(0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn genus_one_combinatorics() {
        let s = t(1);
        assert_eq!(s.side_count(), 8);
        assert_eq!(s.delta_star(), 7);
        // Vertex classes pair corners {0,5},{1,4},{2,7},{3,6}.
        assert_eq!(s.corner_class(0), s.corner_class(5));
        assert_eq!(s.corner_class(1), s.corner_class(4));
        assert_eq!(s.corner_class(2), s.corner_class(7));
        assert_eq!(s.corner_class(3), s.corner_class(6));
        assert_eq!(s.delta_cycle(), &[7, 5, 3, 1]);
        // Boundary ranks: corner 0's vertex is rank 1, then 2,3,4 in order.
        assert_eq!(s.class_rank(s.corner_class(0)), 1);
        assert_eq!(s.class_rank(s.corner_class(6)), 2);
        assert_eq!(s.class_rank(s.corner_class(1)), 3);
        assert_eq!(s.class_rank(s.corner_class(2)), 4);
        assert_eq!(s.arc_end_ranks(0), (1, 3));
        assert_eq!(s.arc_end_ranks(1), (4, 2));
    }

    #[test]
    fn genus_two_combinatorics() {
        let s = t(2);
        assert_eq!(s.side_count(), 16);
        assert_eq!(s.delta_cycle().len(), 8);
        assert_eq!(s.delta_cycle(), &[15, 5, 3, 1, 7, 13, 11, 9]);
        assert_eq!(s.arc_end_ranks(0), (1, 3));
        assert_eq!(s.arc_end_ranks(1), (4, 2));
        assert_eq!(s.arc_end_ranks(2), (5, 7));
        assert_eq!(s.arc_end_ranks(3), (8, 6));
    }

    #[test]
    fn standard_curves_cross_once() {
        for g in [1u32, 2, 3] {
            let s = t(g);
            for h in 0..g {
                let a = s.curve_a(h);
                let b = s.curve_b(h);
                assert_eq!(s.geometric_intersection(&a, &b).unwrap(), 1);
                for k in 0..g {
                    if k != h {
                        assert_eq!(s.geometric_intersection(&a, &s.curve_b(k)).unwrap(), 0);
                        assert_eq!(s.geometric_intersection(&a, &s.curve_a(k)).unwrap(), 0);
                    }
                }
            }
        }
    }

    #[test]
    fn self_intersection_of_simple_curves_is_zero() {
        let s = t(1);
        let a = s.curve_a(0);
        assert_eq!(s.geometric_intersection(&a, &a).unwrap(), 0);
        let b = s.curve_b(0);
        assert_eq!(s.geometric_intersection(&b, &b).unwrap(), 0);
    }

    #[test]
    fn boundary_parallel_is_disjoint_from_standard_curves() {
        for g in [1u32, 2] {
            let s = t(g);
            let bp = s.boundary_parallel_curve();
            assert!(s.homology_class(&bp).iter().all(|&x| x == 0));
            for name in s.curve_names() {
                let c = s.named_curve(&name).unwrap();
                assert_eq!(s.geometric_intersection(&bp, &c).unwrap(), 0);
            }
        }
    }

    #[test]
    fn returns_are_removed() {
        let s = t(1);
        // A curve that crosses arc 0 and immediately returns: trivial circle.
        let c = CurvePath::closed(vec![
            SidePoint::new(0, rat(1, 3)),
            SidePoint::new(4, rat(1, 3)),
        ]);
        let r = s.remove_returns(&c);
        assert!(r.exits.is_empty());
    }

    #[test]
    fn twist_calibration_matches_transvection() {
        let s = t(1);
        let a = s.curve_a(0);
        let b = s.curve_b(0);
        // Positive twist along a applied to b: class must become [a] + [b].
        let tb = s.dehn_twist(&a, &b, 1).unwrap();
        assert_eq!(s.homology_class(&tb), vec![1, 1]);
        // Negative twist: [b] − [a].
        let tbn = s.dehn_twist(&a, &b, -1).unwrap();
        assert_eq!(s.homology_class(&tbn), vec![-1, 1]);
        // Positive twist along b applied to a: [a] − [b] under the
        // transvection with ⟨[a],[b]⟩ = +1.
        let ta = s.dehn_twist(&b, &a, 1).unwrap();
        assert_eq!(s.homology_class(&ta), vec![1, -1]);
    }

    #[test]
    fn twist_of_disjoint_curve_is_identity() {
        let s = t(2);
        let a1 = s.curve_a(0);
        let a2 = s.curve_a(1);
        let out = s.dehn_twist(&a1, &a2, 1).unwrap();
        assert_eq!(s.geometric_intersection(&out, &a2).unwrap(), 0);
        assert_eq!(s.homology_class(&out), s.homology_class(&a2));
    }

    #[test]
    fn twist_of_curve_along_itself_is_identity() {
        let s = t(1);
        let a = s.curve_a(0);
        let out = s.dehn_twist(&a, &a, 1).unwrap();
        assert_eq!(s.geometric_intersection(&out, &s.curve_b(0)).unwrap(), 1);
        assert_eq!(s.homology_class(&out), vec![1, 0]);
    }

    #[test]
    fn basic_twist_intersections() {
        let s = t(1);
        let a = s.curve_a(0);
        let b = s.curve_b(0);
        let tb = s.dehn_twist(&a, &b, 1).unwrap();
        assert_eq!(s.geometric_intersection(&tb, &b).unwrap(), 1);
        assert_eq!(s.geometric_intersection(&tb, &a).unwrap(), 1);
        assert_eq!(s.self_crossing_count(&tb), 0);
    }

    #[test]
    fn twist_square_formula() {
        let s = t(1);
        let a = s.curve_a(0);
        // L with i(L, a) = 2: apply τ_b twice to a … class (1, −2).
        let b = s.curve_b(0);
        let mut l = a.clone();
        for _ in 0..2 {
            l = s.dehn_twist(&b, &l, 1).unwrap();
        }
        assert_eq!(s.homology_class(&l), vec![1, -2]);
        assert_eq!(s.geometric_intersection(&l, &a).unwrap(), 2);
        // τ_L(a) meets a in i(L,a)² = 4 points.
        let ta = s.dehn_twist(&l, &a, 1).unwrap();
        assert_eq!(s.geometric_intersection(&ta, &a).unwrap(), 4);
    }

    #[test]
    fn minimal_position_is_idempotent() {
        let s = t(1);
        let a = s.curve_a(0);
        let b = s.curve_b(0);
        let (u1, v1) = s.minimal_position(&a, &b).unwrap();
        let (u2, v2) = s.minimal_position(&u1, &v1).unwrap();
        assert_eq!(u1, u2);
        assert_eq!(v1, v2);
    }

    #[test]
    fn serde_round_trip() {
        let s = t(2);
        let c = s.dehn_twist(&s.curve_a(0), &s.curve_b(0), 1).unwrap();
        let json = c.to_json(2);
        let back = CurvePath::from_json(&json, 2).unwrap();
        assert_eq!(c, back);
        let arc = s.cut_arc_pushoff(0, rat(3, 4), rat(1, 4));
        let json = arc.to_json(2);
        let back = CurvePath::from_json(&json, 2).unwrap();
        assert_eq!(arc, back);
    }

    #[test]
    fn pushoff_arcs_are_valid_and_disjoint_from_partner_curve() {
        let s = t(1);
        let p0 = s.cut_arc_pushoff(0, rat(3, 4), rat(1, 4));
        // a1 crosses the cut arc once, hence also its parallel pushoff.
        let a = s.curve_a(0);
        assert_eq!(s.geometric_intersection(&p0, &a).unwrap(), 1);
        // b1 is disjoint from arc 0's pushoff.
        let b = s.curve_b(0);
        assert_eq!(s.geometric_intersection(&p0, &b).unwrap(), 0);
    }
}
