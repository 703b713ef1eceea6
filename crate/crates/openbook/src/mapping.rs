//! Monodromy words and their invariants.
//!
//! A monodromy is presented as a word in Dehn twists along named curves on a
//! one-boundary surface, together with a signed count of full boundary-parallel
//! twists.  This module applies words to curves and arcs, computes the induced
//! action on the first homology of the closed-up surface, and — at genus one —
//! produces the exact Nielsen–Thurston classification with the canonical
//! rotation angle `θ_c` and the fractional Dehn twist coefficient `t_c`.
//!
//! Conventions (fixed once, validated by curve-tracing oracles):
//! * Letters act **right-to-left**: the rightmost letter is applied first.
//! * A positive twist along `l` acts on homology by the transvection
//!   `[c] ↦ [c] + ⟨[l],[c]⟩·[l]`, so at genus one `τ_{a1}` has matrix
//!   `[[1,1],[0,1]]` and `τ_{b1}` has matrix `[[1,0],[-1,1]]` in the ordered
//!   basis `([a1],[b1])`.
//! * `θ_c` and `t_c` are kept as exact rationals measured in full turns, so the
//!   defining relation reads `t_c = θ_c + k` with `k` the integer winding of
//!   the collar isotopy.  Boundary twists shift `t_c` by exactly their count.

use std::collections::BTreeMap;


use num_traits::{FromPrimitive, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::surface::{CurvePath, Rat, Surface};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Words
// ---------------------------------------------------------------------------

/// One twist in a monodromy word: the name of a curve and an exponent `±1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Letter {
    pub curve: String,
    pub power: i64,
}

impl Letter {
    pub fn new(curve: impl Into<String>, power: i64) -> Self {
        Letter { curve: curve.into(), power }
    }
}

/// A mapping class presented as an ordered list of Dehn twists plus a signed
/// count of full boundary-parallel twists.  The empty word with zero boundary
/// twists is the identity class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonodromyWord {
    genus: u32,
    letters: Vec<Letter>,
    boundary_twists: i64,
}

/// Curves usable as twist letters beyond the standard `a_i`/`b_i` families,
/// keyed by name.  Registered curves must be closed, embedded, essential and
/// nonseparating; this is checked at resolution time.
pub type CurveRegistry = BTreeMap<String, CurvePath>;

impl MonodromyWord {
    /// The identity word at the given genus.
    pub fn identity(genus: u32) -> Self {
        MonodromyWord { genus, letters: Vec::new(), boundary_twists: 0 }
    }

    /// Build a word from letters, expanding any letter with `|power| > 1`
    /// into that many copies of the `±1` letter.
    pub fn new(genus: u32, letters: Vec<Letter>, boundary_twists: i64) -> Result<Self> {
        if genus == 0 {
            return Err(Error::invalid("genus must be positive"));
        }
        let mut expanded = Vec::new();
        for l in letters {
            if l.power == 0 {
                return Err(Error::invalid(format!(
                    "letter `{}` has zero exponent",
                    l.curve
                )));
            }
            if l.curve.is_empty() {
                return Err(Error::invalid("letter with empty curve name"));
            }
            let sign = l.power.signum();
            for _ in 0..l.power.unsigned_abs() {
                expanded.push(Letter::new(l.curve.clone(), sign));
            }
        }
        Ok(MonodromyWord { genus, letters: expanded, boundary_twists })
    }

    /// Parse the compact text syntax: whitespace-separated tokens of the form
    /// `a1+`, `b2-`, `a1` (implicit `+`).  A bare family letter such as `a+`
    /// abbreviates index 1 (`a1+`).
    pub fn parse(genus: u32, text: &str, boundary_twists: i64) -> Result<Self> {
        let mut letters = Vec::new();
        for token in text.split_whitespace() {
            let (name_part, power) = match token.strip_suffix('+') {
                Some(rest) => (rest, 1),
                None => match token.strip_suffix('-') {
                    Some(rest) => (rest, -1),
                    None => (token, 1),
                },
            };
            if name_part.is_empty() {
                return Err(Error::invalid(format!("malformed twist token `{token}`")));
            }
            let name = if name_part.len() == 1 && name_part.chars().all(|ch| ch.is_ascii_alphabetic())
            {
                format!("{name_part}1")
            } else {
                name_part.to_string()
            };
            letters.push(Letter::new(name, power));
        }
        MonodromyWord::new(genus, letters, boundary_twists)
    }

    /// Accept any of the JSON shapes used by the service layer for the word
    /// field: a string in the compact syntax, an array of such tokens, or an
    /// array of `{"curve": ..., "power": ...}` objects.
    pub fn from_json_word(genus: u32, word: &Value, boundary_twists: i64) -> Result<Self> {
        match word {
            Value::String(s) => MonodromyWord::parse(genus, s, boundary_twists),
            Value::Array(items) => {
                let mut letters = Vec::new();
                for item in items {
                    match item {
                        Value::String(tok) => {
                            let sub = MonodromyWord::parse(genus, tok, 0)?;
                            letters.extend(sub.letters);
                        }
                        Value::Object(_) => {
                            let letter: Letter = serde_json::from_value(item.clone())
                                .map_err(|e| Error::invalid(format!("bad letter object: {e}")))?;
                            letters.push(letter);
                        }
                        other => {
                            return Err(Error::invalid(format!(
                                "word entries must be strings or objects, got {other}"
                            )))
                        }
                    }
                }
                MonodromyWord::new(genus, letters, boundary_twists)
            }
            other => Err(Error::invalid(format!(
                "word must be a string or array, got {other}"
            ))),
        }
    }

    /// Full JSON form: `{"genus": g, "letters": [...], "boundary_twists": k}`.
    pub fn to_json(&self) -> Value {
        json!({
            "genus": self.genus,
            "letters": self.letters,
            "boundary_twists": self.boundary_twists,
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let genus = value
            .get("genus")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::invalid("word JSON missing positive `genus`"))?;
        let boundary_twists = value
            .get("boundary_twists")
            .map(|v| {
                v.as_i64()
                    .ok_or_else(|| Error::invalid("`boundary_twists` must be an integer"))
            })
            .transpose()?
            .unwrap_or(0);
        let letters = value
            .get("letters")
            .cloned()
            .unwrap_or_else(|| Value::Array(Vec::new()));
        MonodromyWord::from_json_word(genus as u32, &letters, boundary_twists)
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn boundary_twists(&self) -> i64 {
        self.boundary_twists
    }

    /// Sum of the letter exponents (boundary twists not included).
    pub fn exponent_sum(&self) -> i64 {
        self.letters.iter().map(|l| l.power).sum()
    }

    /// Concatenation `self · other` (self's letters first; the composite acts
    /// by `other` first because letters act right-to-left).
    pub fn concat(&self, other: &MonodromyWord) -> Result<Self> {
        if self.genus != other.genus {
            return Err(Error::invalid("cannot concatenate words of different genus"));
        }
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        Ok(MonodromyWord {
            genus: self.genus,
            letters,
            boundary_twists: self.boundary_twists + other.boundary_twists,
        })
    }

    /// The inverse word: letters reversed with exponents negated.
    pub fn inverse(&self) -> Self {
        let letters = self
            .letters
            .iter()
            .rev()
            .map(|l| Letter::new(l.curve.clone(), -l.power))
            .collect();
        MonodromyWord {
            genus: self.genus,
            letters,
            boundary_twists: -self.boundary_twists,
        }
    }

    /// The `n`-th power of the word (negative `n` uses the inverse).
    pub fn power(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut letters = Vec::new();
        for _ in 0..n.unsigned_abs() {
            letters.extend(base.letters.iter().cloned());
        }
        MonodromyWord {
            genus: self.genus,
            letters,
            boundary_twists: base.boundary_twists * n.abs(),
        }
    }

    /// Freely reduce the letter sequence by cancelling adjacent
    /// mutually-inverse twists.  Boundary twists are untouched.
    pub fn freely_reduced(&self) -> Self {
        let mut stack: Vec<Letter> = Vec::new();
        for l in &self.letters {
            if let Some(top) = stack.last() {
                if top.curve == l.curve && top.power + l.power == 0 {
                    stack.pop();
                    continue;
                }
            }
            stack.push(l.clone());
        }
        MonodromyWord {
            genus: self.genus,
            letters: stack,
            boundary_twists: self.boundary_twists,
        }
    }

    /// True when the word is syntactically recognizable as the identity
    /// mapping class: letters freely reduce to nothing and there are no
    /// boundary twists.
    pub fn is_recognized_identity(&self) -> bool {
        self.boundary_twists == 0 && self.freely_reduced().letters.is_empty()
    }
}

/// Resolve a letter name to a concrete curve: user registry first, then the
/// standard `a_i`/`b_i` families.  Registered curves must be closed, embedded,
/// essential and nonseparating.
pub fn resolve_curve(
    surface: &Surface,
    registry: Option<&CurveRegistry>,
    name: &str,
) -> Result<CurvePath> {
    if let Some(reg) = registry {
        if let Some(path) = reg.get(name) {
            if !path.is_closed() {
                return Err(Error::invalid(format!(
                    "registered curve `{name}` must be closed"
                )));
            }
            let reduced = surface.reduce(path)?;
            if reduced.exits.is_empty() {
                return Err(Error::invalid(format!(
                    "registered curve `{name}` is inessential"
                )));
            }
            if !surface.self_crossings(&reduced).is_empty() {
                return Err(Error::invalid(format!(
                    "registered curve `{name}` must be embedded"
                )));
            }
            if surface.homology_class(&reduced).iter().all(|&x| x == 0) {
                return Err(Error::invalid(format!(
                    "registered curve `{name}` is separating; twist letters must be nonseparating"
                )));
            }
            return Ok(reduced);
        }
    }
    surface.named_curve(name)
}

// ---------------------------------------------------------------------------
// Action on curves and arcs
// ---------------------------------------------------------------------------

/// Apply a monodromy word to a curve or properly embedded arc.  Letters act
/// right-to-left.  Boundary twists act trivially on closed curves (a
/// boundary-parallel twist is isotopic to the identity away from the
/// boundary) and wind arc endpoints around the boundary.
pub fn apply_word(
    surface: &Surface,
    word: &MonodromyWord,
    registry: Option<&CurveRegistry>,
    c: &CurvePath,
) -> Result<CurvePath> {
    if word.genus != surface.genus() {
        return Err(Error::invalid("word genus does not match surface"));
    }
    let mut current = surface.reduce(c)?;
    for letter in word.letters.iter().rev() {
        let l = resolve_curve(surface, registry, &letter.curve)?;
        current = surface.dehn_twist(&l, &current, letter.power)?;
    }
    if !current.is_closed() && word.boundary_twists != 0 {
        let bp = surface.boundary_parallel_curve();
        let sign = word.boundary_twists.signum();
        for _ in 0..word.boundary_twists.unsigned_abs() {
            current = surface.dehn_twist(&bp, &current, sign)?;
        }
    }
    let mut single = [current];
    surface.renormalize(&mut single)?;
    let [current] = single;
    Ok(current)
}

// ---------------------------------------------------------------------------
// Integer matrices and the homology action
// ---------------------------------------------------------------------------

/// A small square integer matrix (row-major, `i128` entries so long twist
/// words cannot overflow).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    n: usize,
    entries: Vec<i128>,
}

impl IntMatrix {
    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        IntMatrix { n, entries }
    }

    pub fn from_rows(rows: &[Vec<i128>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("matrix rows must form a square"));
        }
        Ok(IntMatrix { n, entries: rows.concat() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i128 {
        self.entries[i * self.n + j]
    }

    fn set(&mut self, i: usize, j: usize, v: i128) {
        self.entries[i * self.n + j] = v;
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut out = IntMatrix { n, entries: vec![0; n * n] };
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[i128]) -> Vec<i128> {
        assert_eq!(self.n, v.len(), "dimension mismatch");
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        IntMatrix {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> IntMatrix {
        let mut out = IntMatrix::identity(self.n);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn trace(&self) -> i128 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn is_identity(&self) -> bool {
        *self == IntMatrix::identity(self.n)
    }

    pub fn is_minus_identity(&self) -> bool {
        self.entries
            == IntMatrix::identity(self.n)
                .entries
                .iter()
                .map(|x| -x)
                .collect::<Vec<_>>()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> i128 {
        let n = self.n;
        if n == 0 {
            return 1;
        }
        let mut m = self.entries.clone();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if m[k * n + k] == 0 {
                let swap = (k + 1..n).find(|&r| m[r * n + k] != 0);
                match swap {
                    Some(r) => {
                        for j in 0..n {
                            m.swap(k * n + j, r * n + j);
                        }
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    m[i * n + j] =
                        (m[i * n + j] * m[k * n + k] - m[i * n + k] * m[k * n + j]) / prev;
                }
                m[i * n + k] = 0;
            }
            prev = m[k * n + k];
        }
        sign * m[n * n - 1]
    }

    /// JSON form as an array of arrays of integers.
    pub fn to_json(&self) -> Value {
        let rows: Vec<Vec<i64>> = (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| {
                        self.get(i, j)
                            .try_into()
                            .expect("matrix entry exceeds 64 bits")
                    })
                    .collect()
            })
            .collect();
        json!(rows)
    }
}

/// The transvection on first homology induced by a `power`-signed twist along
/// a curve of class `v`: `x ↦ x + power·⟨v,x⟩·v` with the pairing
/// `⟨u,w⟩ = Σ_h (u_{2h} w_{2h+1} − u_{2h+1} w_{2h})`.
pub fn transvection(genus: u32, class: &[i64], power: i64) -> IntMatrix {
    let n = 2 * genus as usize;
    assert_eq!(class.len(), n, "class length must be 2·genus");
    // J v, where J is the block-diagonal symplectic form: ⟨v,x⟩ = (Jᵗv)·x,
    // with (Jᵗv)_{2h} = −v_{2h+1} and (Jᵗv)_{2h+1} = v_{2h}.
    let mut jv = vec![0i128; n];
    for h in 0..genus as usize {
        jv[2 * h] = -(class[2 * h + 1] as i128);
        jv[2 * h + 1] = class[2 * h] as i128;
    }
    let mut m = IntMatrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            let add = (power as i128) * (class[i] as i128) * jv[j];
            m.set(i, j, m.get(i, j) + add);
        }
    }
    m
}

/// The induced map on first homology of the closed-up surface: the product of
/// the letters' transvections **in letter order**, which matches right-to-left
/// application on curves.  Boundary twists act trivially (the
/// boundary-parallel class is zero).  Always has determinant 1.
pub fn homology_action(
    surface: &Surface,
    word: &MonodromyWord,
    registry: Option<&CurveRegistry>,
) -> Result<IntMatrix> {
    if word.genus != surface.genus() {
        return Err(Error::invalid("word genus does not match surface"));
    }
    let n = 2 * surface.genus() as usize;
    let mut m = IntMatrix::identity(n);
    let mut class_cache: BTreeMap<String, Vec<i64>> = BTreeMap::new();
    for letter in &word.letters {
        let class = match class_cache.get(&letter.curve) {
            Some(c) => c.clone(),
            None => {
                let path = resolve_curve(surface, registry, &letter.curve)?;
                let c = surface.homology_class(&surface.reduce(&path)?);
                class_cache.insert(letter.curve.clone(), c.clone());
                c
            }
        };
        m = m.mul(&transvection(surface.genus(), &class, letter.power));
    }
    Ok(m)
}

// ---------------------------------------------------------------------------
// Dedekind sums and the Rademacher function
// ---------------------------------------------------------------------------

fn sawtooth(num: i128, den: i128) -> Rat {
    // ((x)) = x − ⌊x⌋ − 1/2 for x ∉ ℤ, and 0 for x ∈ ℤ, evaluated at num/den.
    if num.rem_euclid(den) == 0 {
        return Rat::zero();
    }
    let frac = Rat::new(
        num.rem_euclid(den).into(),
        den.into(),
    );
    frac - Rat::new(1.into(), 2.into())
}

/// The Dedekind sum `s(h, k) = Σ_{i=1}^{k−1} ((i/k))((hi/k))` as an exact
/// rational; `k > 0`.
pub fn dedekind_sum(h: i128, k: i128) -> Rat {
    assert!(k > 0, "dedekind_sum needs k > 0");
    let h = h.rem_euclid(k);
    let mut total = Rat::zero();
    for i in 1..k {
        total += sawtooth(i, k) * sawtooth(h * i, k);
    }
    total
}

/// The Rademacher function `Φ` on `SL(2,ℤ)`.  For `c ≠ 0`:
/// `Φ(M) = (a+d)/c − 12·sign(c)·s(d,|c|) − 3·sign(c(a+d))`; for `c = 0`
/// (parabolic/central, `M = ±[[1,b],[0,1]]`) the classical value is `a·b`.
pub fn rademacher_phi(m: &IntMatrix) -> Result<Rat> {
    if m.dim() != 2 {
        return Err(Error::invalid("Rademacher function needs a 2×2 matrix"));
    }
    if m.det() != 1 {
        return Err(Error::invalid("Rademacher function needs determinant 1"));
    }
    let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    if c == 0 {
        return Ok(Rat::from_i128(a * b).expect("i128 to rational"));
    }
    let lead = Rat::new((a + d).into(), c.into());
    let sum_term = Rat::from_i128(12 * c.signum()).expect("i128 to rational")
        * dedekind_sum(d, c.abs());
    let sign_term = Rat::from_i128(3 * (c * (a + d)).signum()).expect("i128 to rational");
    Ok(lead - sum_term - sign_term)
}

// ---------------------------------------------------------------------------
// Nielsen–Thurston classification
// ---------------------------------------------------------------------------

/// The Nielsen–Thurston type of a mapping class.
#[derive(Debug, Clone, PartialEq)]
pub enum NtType {
    /// Finite-order canonical representative of the given order (order 1 means
    /// the free mapping class is trivial; the boundary winding may still be
    /// nonzero).
    Periodic { order: u32 },
    /// Fixes an essential multicurve; no canonical rotation data is assigned.
    Reducible,
    /// Pseudo-Anosov with the given dilatation.  `rotated` records whether the
    /// boundary prong set is rotated by a half turn (negative-trace case at
    /// genus one); the prong count at the boundary is 2.
    PseudoAnosov { dilatation: f64, rotated: bool, prongs: u32 },
}

/// Exact Nielsen–Thurston data for a monodromy word.  Angles are stored in
/// full turns: `theta_turns` is `θ_c / 2π` and the defining relation is
/// `t_c = theta_turns + winding` with `winding ∈ ℤ`.
#[derive(Debug, Clone, PartialEq)]
pub struct NtClassification {
    pub nt_type: NtType,
    /// Canonical rotation angle `θ_c` as a fraction of a full turn, in `[0,1)`.
    /// `None` for reducible classes, whose `θ_c` is undefined here.
    pub theta_turns: Option<Rat>,
    /// Fractional Dehn twist coefficient.  `None` for reducible classes.
    pub t_c: Option<Rat>,
    /// Integer winding `k` with `t_c = θ_c/2π + k`.  `None` for reducible.
    pub winding: Option<i64>,
    /// Trace of the homology action (diagnostic).
    pub trace: i128,
    /// The homology action itself.
    pub action: IntMatrix,
    pub genus: u32,
    pub boundary_twists: i64,
}

impl NtClassification {
    /// True exactly for the identity mapping class: trivial free class with
    /// zero fractional twist.
    pub fn is_identity_class(&self) -> bool {
        matches!(self.nt_type, NtType::Periodic { order: 1 })
            && self.t_c.as_ref().is_some_and(|t| t.is_zero())
    }

    /// The fractional Dehn twist coefficient, or a typed refusal for
    /// reducible classes.
    pub fn fractional_twist(&self) -> Result<&Rat> {
        self.t_c.as_ref().ok_or_else(|| {
            Error::unsupported(
                "fractional Dehn twist coefficient undefined for reducible classes here",
            )
        })
    }

    pub fn to_json(&self) -> Value {
        let mut obj = serde_json::Map::new();
        match &self.nt_type {
            NtType::Periodic { order } => {
                obj.insert("type".into(), json!("periodic"));
                obj.insert("order".into(), json!(order));
            }
            NtType::Reducible => {
                obj.insert("type".into(), json!("reducible"));
            }
            NtType::PseudoAnosov { dilatation, rotated, prongs } => {
                obj.insert("type".into(), json!("pseudo_anosov"));
                obj.insert("dilatation".into(), json!(dilatation));
                obj.insert(
                    "boundary_rotation".into(),
                    json!(if *rotated { "rotated" } else { "unrotated" }),
                );
                obj.insert("prongs".into(), json!(prongs));
            }
        }
        if let Some(theta) = &self.theta_turns {
            obj.insert("theta_c_turns".into(), json!(theta.to_string()));
        }
        if let Some(t) = &self.t_c {
            obj.insert("t_c".into(), json!(t.to_string()));
        }
        if let Some(k) = self.winding {
            obj.insert("winding".into(), json!(k));
        }
        obj.insert("trace".into(), json!(self.trace as i64));
        obj.insert("homology_action".into(), self.action.to_json());
        obj.insert("genus".into(), json!(self.genus));
        obj.insert("boundary_twists".into(), json!(self.boundary_twists));
        Value::Object(obj)
    }
}

/// Data for a user-registered periodic presentation at genus ≥ 2: the order
/// of the finite-order model, its rotation angle in turns, and the integer
/// winding of the presentation itself (before extra boundary twists).
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicRegistration {
    pub order: u32,
    pub theta_turns: Rat,
    pub winding: i64,
}

fn rat_floor_i64(x: &Rat) -> i64 {
    x.floor().to_integer().to_i64().expect("winding fits i64")
}

/// Exact genus-one classification from the homology action; at genus ≥ 2 only
/// recognized identities (and explicitly registered periodic presentations via
/// [`classify_with_registration`]) are supported.
pub fn classify(word: &MonodromyWord) -> Result<NtClassification> {
    classify_with(word, None, None)
}

/// [`classify`] with a curve registry for non-standard twist letters.
pub fn classify_with(
    word: &MonodromyWord,
    registry: Option<&CurveRegistry>,
    periodic: Option<&PeriodicRegistration>,
) -> Result<NtClassification> {
    let surface = Surface::build(word.genus)?;
    let action = homology_action(&surface, word, registry)?;
    let trace = action.trace();
    let genus = word.genus;
    let k_phi = word.boundary_twists;

    if genus == 1 {
        return classify_genus_one(word, action, trace);
    }

    // Higher genus: exact answers only for recognized identities or
    // registered periodic presentations.
    if word.freely_reduced().letters.is_empty() {
        let t = Rat::from_i128(k_phi as i128).expect("integer to rational");
        return Ok(NtClassification {
            nt_type: NtType::Periodic { order: 1 },
            theta_turns: Some(Rat::zero()),
            t_c: Some(t),
            winding: Some(k_phi),
            trace,
            action,
            genus,
            boundary_twists: k_phi,
        });
    }
    if let Some(reg) = periodic {
        if reg.order == 0 {
            return Err(Error::invalid("registered periodic order must be positive"));
        }
        let t = &reg.theta_turns
            + Rat::from_i128((reg.winding + k_phi) as i128).expect("integer to rational");
        let theta = &t - t.floor();
        let winding = rat_floor_i64(&t);
        return Ok(NtClassification {
            nt_type: NtType::Periodic { order: reg.order },
            theta_turns: Some(theta),
            t_c: Some(t),
            winding: Some(winding),
            trace,
            action,
            genus,
            boundary_twists: k_phi,
        });
    }
    Err(Error::unsupported(format!(
        "genus {genus} word is not a recognized identity or registered periodic presentation; \
         exact Nielsen–Thurston classification is only available at genus 1"
    )))
}

/// The complete set of registered periodic presentations is empty by default;
/// this registry exists so callers with externally certified finite-order
/// words can still obtain exact rotation data.
pub fn classify_with_registration(
    word: &MonodromyWord,
    registration: &PeriodicRegistration,
) -> Result<NtClassification> {
    classify_with(word, None, Some(registration))
}

fn classify_genus_one(
    word: &MonodromyWord,
    action: IntMatrix,
    trace: i128,
) -> Result<NtClassification> {
    let genus = word.genus;
    let k_phi = word.boundary_twists;
    let e = word.exponent_sum();
    let twelve = Rat::from_i128(12).expect("integer to rational");

    let periodic = trace.abs() < 2 || action.is_identity() || action.is_minus_identity();
    if periodic {
        let order = (1..=12u32)
            .find(|&d| action.pow(d).is_identity())
            .ok_or_else(|| Error::internal("elliptic SL(2,ℤ) element of order > 12"))?;
        // t_c = e(w)/12 + k_φ for finite-order genus-one classes.
        let t = Rat::from_i128(e as i128).expect("integer to rational") / &twelve
            + Rat::from_i128(k_phi as i128).expect("integer to rational");
        let theta = &t - t.floor();
        let winding = rat_floor_i64(&t);
        // Rotation-number consistency: the rotation angle of the finite-order
        // model must have denominator exactly the order.
        let denom = theta.denom().to_u32().ok_or_else(|| {
            Error::internal("rotation denominator overflow")
        })?;
        let effective = if theta.is_zero() { 1 } else { denom };
        if effective != order {
            return Err(Error::internal(format!(
                "periodic consistency failure: matrix order {order}, rotation {theta}"
            )));
        }
        return Ok(NtClassification {
            nt_type: NtType::Periodic { order },
            theta_turns: Some(theta),
            t_c: Some(t),
            winding: Some(winding),
            trace,
            action,
            genus,
            boundary_twists: k_phi,
        });
    }

    if trace.abs() == 2 {
        // Parabolic but not ±identity: reducible; θ_c is undefined here.
        return Ok(NtClassification {
            nt_type: NtType::Reducible,
            theta_turns: None,
            t_c: None,
            winding: None,
            trace,
            action,
            genus,
            boundary_twists: k_phi,
        });
    }

    // |trace| > 2: pseudo-Anosov.  Dilatation is the spectral radius; the
    // boundary prong pair is preserved exactly when both eigenvalues are
    // positive (trace > 2) and rotated by a half turn when both are negative.
    let tr_f = trace as f64;
    let dilatation = (tr_f.abs() + (tr_f * tr_f - 4.0).sqrt()) / 2.0;
    let rotated = trace < -2;
    let phi = rademacher_phi(&action)?;
    // t_c = (e(w) − Φ(M))/12 + k_φ for pseudo-Anosov genus-one classes.
    let t = (Rat::from_i128(e as i128).expect("integer to rational") - phi) / &twelve
        + Rat::from_i128(k_phi as i128).expect("integer to rational");
    let theta = if rotated {
        Rat::new(1.into(), 2.into())
    } else {
        Rat::zero()
    };
    let k = &t - &theta;
    if !k.is_integer() {
        return Err(Error::internal(format!(
            "pseudo-Anosov fractional twist {t} is not an integer offset of {theta}"
        )));
    }
    let winding = k.to_integer().to_i64().ok_or_else(|| {
        Error::internal("winding overflow")
    })?;
    Ok(NtClassification {
        nt_type: NtType::PseudoAnosov { dilatation, rotated, prongs: 2 },
        theta_turns: Some(theta),
        t_c: Some(t),
        winding: Some(winding),
        trace,
        action,
        genus,
        boundary_twists: k_phi,
    })
}

/// Convenience: the dilatation of a genus-one pseudo-Anosov word.
pub fn dilatation(word: &MonodromyWord) -> Result<f64> {
    match classify(word)?.nt_type {
        NtType::PseudoAnosov { dilatation, .. } => Ok(dilatation),
        _ => Err(Error::invalid("word is not pseudo-Anosov")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn word(text: &str) -> MonodromyWord {
        MonodromyWord::parse(1, text, 0).unwrap()
    }

    fn rows(m: &IntMatrix) -> Vec<Vec<i128>> {
        (0..m.dim())
            .map(|i| (0..m.dim()).map(|j| m.get(i, j)).collect())
            .collect()
    }

    fn action(w: &MonodromyWord) -> IntMatrix {
        let s = Surface::build(w.genus()).unwrap();
        homology_action(&s, w, None).unwrap()
    }

    #[test]
    fn standard_transvections() {
        assert_eq!(rows(&transvection(1, &[1, 0], 1)), vec![vec![1, 1], vec![0, 1]]);
        assert_eq!(rows(&transvection(1, &[0, 1], 1)), vec![vec![1, 0], vec![-1, 1]]);
        assert_eq!(rows(&transvection(1, &[1, 0], -1)), vec![vec![1, -1], vec![0, 1]]);
        assert_eq!(rows(&transvection(1, &[0, 1], -1)), vec![vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn frozen_traces() {
        assert_eq!(action(&word("a+ b+")).trace(), 1);
        assert_eq!(action(&word("a+ b-")).trace(), 3);
        assert_eq!(rows(&action(&word("a+ b-"))), vec![vec![2, 1], vec![1, 1]]);
    }

    #[test]
    fn morphism_and_determinant() {
        let w1 = word("a+ b- a+");
        let w2 = word("b+ b+ a-");
        let lhs = action(&w1.concat(&w2).unwrap());
        let rhs = action(&w1).mul(&action(&w2));
        assert_eq!(lhs, rhs);
        assert_eq!(action(&w1).det(), 1);
        assert_eq!(action(&w2).det(), 1);
        assert!(action(&w1.concat(&w1.inverse()).unwrap()).is_identity());
    }

    #[test]
    fn parse_and_json_round_trip() {
        let w = MonodromyWord::parse(2, "a1+ b2- a2", 3).unwrap();
        assert_eq!(
            w.letters(),
            &[Letter::new("a1", 1), Letter::new("b2", -1), Letter::new("a2", 1)]
        );
        assert_eq!(w.boundary_twists(), 3);
        let back = MonodromyWord::from_json(&w.to_json()).unwrap();
        assert_eq!(back, w);

        let from_objects = MonodromyWord::from_json_word(
            1,
            &serde_json::json!([{"curve": "a1", "power": 2}, {"curve": "b1", "power": -1}]),
            0,
        )
        .unwrap();
        assert_eq!(
            from_objects.letters(),
            &[
                Letter::new("a1", 1),
                Letter::new("a1", 1),
                Letter::new("b1", -1)
            ]
        );

        let shorthand = MonodromyWord::from_json_word(1, &serde_json::json!(["a+", "b-"]), 0).unwrap();
        assert_eq!(shorthand.letters(), word("a+ b-").letters());
    }

    #[test]
    fn dedekind_sum_small_values() {
        // s(1,k) = (k−1)(k−2)/(12k).
        assert_eq!(dedekind_sum(1, 1), Rat::zero());
        assert_eq!(dedekind_sum(1, 2), Rat::zero());
        assert_eq!(dedekind_sum(1, 3), Rat::new(1.into(), 18.into()));
        assert_eq!(dedekind_sum(1, 5), Rat::new(1.into(), 5.into()));
        // s(−h,k) = −s(h,k).
        assert_eq!(dedekind_sum(-2, 7), -dedekind_sum(2, 7));
        // s(2,3): computed by hand.
        assert_eq!(dedekind_sum(2, 3), Rat::new((-1).into(), 18.into()));
    }

    #[test]
    fn rademacher_frozen_values() {
        let fig8 = action(&word("a+ b-"));
        assert_eq!(rademacher_phi(&fig8).unwrap(), Rat::zero());
        let sq = fig8.mul(&fig8);
        assert_eq!(rows(&sq), vec![vec![5, 3], vec![3, 2]]);
        assert_eq!(rademacher_phi(&sq).unwrap(), Rat::zero());
    }

    #[test]
    fn classify_identity() {
        let c = classify(&MonodromyWord::identity(1)).unwrap();
        assert_eq!(c.nt_type, NtType::Periodic { order: 1 });
        assert_eq!(c.theta_turns, Some(Rat::zero()));
        assert_eq!(c.t_c, Some(Rat::zero()));
        assert!(c.is_identity_class());
    }

    #[test]
    fn classify_periodic_frozen() {
        let c = classify(&word("a+ b+")).unwrap();
        assert_eq!(c.nt_type, NtType::Periodic { order: 6 });
        assert_eq!(c.t_c, Some(Rat::new(1.into(), 6.into())));
        assert_eq!(c.theta_turns, Some(Rat::new(1.into(), 6.into())));
        assert_eq!(c.winding, Some(0));

        let inv = classify(&word("a+ b+").inverse()).unwrap();
        assert_eq!(inv.nt_type, NtType::Periodic { order: 6 });
        assert_eq!(inv.t_c, Some(Rat::new((-1).into(), 6.into())));
        assert_eq!(inv.theta_turns, Some(Rat::new(5.into(), 6.into())));
        assert_eq!(inv.winding, Some(-1));

        let c4 = classify(&word("a+ b+ a+")).unwrap();
        assert_eq!(c4.nt_type, NtType::Periodic { order: 4 });
        assert_eq!(c4.t_c, Some(Rat::new(1.into(), 4.into())));

        let c2 = classify(&word("a+ b+").power(3)).unwrap();
        assert_eq!(c2.nt_type, NtType::Periodic { order: 2 });
        assert_eq!(c2.t_c, Some(Rat::new(1.into(), 2.into())));

        // (ab)^6 is the full boundary twist: trivial free class, t_c = 1.
        let full = classify(&word("a+ b+").power(6)).unwrap();
        assert_eq!(full.nt_type, NtType::Periodic { order: 1 });
        assert_eq!(full.t_c, Some(Rat::one()));
        assert_eq!(full.theta_turns, Some(Rat::zero()));
        assert_eq!(full.winding, Some(1));
        assert!(!full.is_identity_class());

        // The same class presented as a pure boundary twist.
        let tau = classify(&MonodromyWord::new(1, vec![], 1).unwrap()).unwrap();
        assert_eq!(tau.nt_type, NtType::Periodic { order: 1 });
        assert_eq!(tau.t_c, Some(Rat::one()));
        assert!(!tau.is_identity_class());
    }

    #[test]
    fn classify_pseudo_anosov_frozen() {
        let c = classify(&word("a+ b-")).unwrap();
        match c.nt_type {
            NtType::PseudoAnosov { dilatation, rotated, prongs } => {
                let golden = (3.0 + 5.0f64.sqrt()) / 2.0;
                assert!((dilatation - golden).abs() < 1e-12);
                assert!(!rotated);
                assert_eq!(prongs, 2);
            }
            other => panic!("expected pseudo-Anosov, got {other:?}"),
        }
        assert_eq!(c.t_c, Some(Rat::zero()));
        assert_eq!(c.theta_turns, Some(Rat::zero()));

        // Rotated example: a^5 b has trace −3 and half-integer twist.
        let neg = classify(&word("a+ a+ a+ a+ a+ b+")).unwrap();
        match neg.nt_type {
            NtType::PseudoAnosov { rotated, .. } => assert!(rotated),
            other => panic!("expected pseudo-Anosov, got {other:?}"),
        }
        assert_eq!(neg.trace, -3);
        assert_eq!(neg.t_c, Some(Rat::new(1.into(), 2.into())));
        assert_eq!(neg.theta_turns, Some(Rat::new(1.into(), 2.into())));
        assert_eq!(neg.winding, Some(0));
    }

    #[test]
    fn classify_reducible() {
        let c = classify(&word("a+ a+ b+ b+")).unwrap();
        assert_eq!(c.nt_type, NtType::Reducible);
        assert_eq!(c.trace, -2);
        assert!(c.t_c.is_none());
        assert!(matches!(
            c.fractional_twist(),
            Err(Error::Unsupported(_))
        ));

        // A single twist is parabolic (trace 2, not the identity): reducible.
        let single = classify(&word("a+")).unwrap();
        assert_eq!(single.nt_type, NtType::Reducible);
        assert_eq!(single.trace, 2);
    }

    #[test]
    fn classify_higher_genus() {
        let id2 = classify(&MonodromyWord::identity(2)).unwrap();
        assert_eq!(id2.nt_type, NtType::Periodic { order: 1 });
        assert!(id2.is_identity_class());

        let cancelling = MonodromyWord::parse(2, "a1+ b2+ b2- a1-", 0).unwrap();
        assert!(classify(&cancelling).unwrap().is_identity_class());

        let hard = MonodromyWord::parse(2, "a1+ b1+", 0).unwrap();
        assert!(matches!(classify(&hard), Err(Error::Unsupported(_))));

        let registered = classify_with_registration(
            &hard,
            &PeriodicRegistration {
                order: 10,
                theta_turns: Rat::new(1.into(), 10.into()),
                winding: 0,
            },
        )
        .unwrap();
        assert_eq!(registered.nt_type, NtType::Periodic { order: 10 });
        assert_eq!(registered.t_c, Some(Rat::new(1.into(), 10.into())));
    }

    #[test]
    fn boundary_twists_shift_t_c() {
        let base = word("a+ b+");
        let shifted = MonodromyWord::new(1, base.letters().to_vec(), 2).unwrap();
        let c = classify(&shifted).unwrap();
        assert_eq!(
            c.t_c,
            Some(Rat::new(1.into(), 6.into()) + Rat::from_i128(2).unwrap())
        );
        assert_eq!(c.theta_turns, Some(Rat::new(1.into(), 6.into())));
        assert_eq!(c.winding, Some(2));
    }

    #[test]
    fn apply_word_examples() {
        let s = Surface::build(1).unwrap();
        let a1 = s.named_curve("a1").unwrap();
        let b1 = s.named_curve("b1").unwrap();

        // Identity word fixes everything.
        let id = MonodromyWord::identity(1);
        let img = apply_word(&s, &id, None, &b1).unwrap();
        assert_eq!(s.geometric_intersection(&img, &a1).unwrap(), 1);
        assert_eq!(s.geometric_intersection(&img, &b1).unwrap(), 0);

        // A twist fixes its own core.
        let ta = MonodromyWord::parse(1, "a+", 0).unwrap();
        let core = apply_word(&s, &ta, None, &a1).unwrap();
        assert_eq!(s.geometric_intersection(&core, &a1).unwrap(), 0);
        assert_eq!(s.homology_class(&core), s.homology_class(&a1));

        // τ_{a1}(b1) meets both a1 and b1 once.
        let img = apply_word(&s, &ta, None, &b1).unwrap();
        assert_eq!(s.geometric_intersection(&img, &b1).unwrap(), 1);
        assert_eq!(s.geometric_intersection(&img, &a1).unwrap(), 1);
    }

    #[test]
    fn boundary_twists_trivial_on_closed_curves() {
        let s = Surface::build(1).unwrap();
        let b1 = s.named_curve("b1").unwrap();
        let w = MonodromyWord::new(1, vec![Letter::new("a1", 1)], 3).unwrap();
        let with = apply_word(&s, &w, None, &b1).unwrap();
        let without = apply_word(
            &s,
            &MonodromyWord::new(1, vec![Letter::new("a1", 1)], 0).unwrap(),
            None,
            &b1,
        )
        .unwrap();
        for probe in ["a1", "b1"] {
            let p = s.named_curve(probe).unwrap();
            assert_eq!(
                s.geometric_intersection(&with, &p).unwrap(),
                s.geometric_intersection(&without, &p).unwrap()
            );
        }
    }

    #[test]
    fn boundary_twist_winds_arcs() {
        let s = Surface::build(1).unwrap();
        let arc = s.cut_arc_pushoff(0, crate::surface::rat(3, 4), crate::surface::rat(1, 4));

        let w = MonodromyWord::new(1, vec![], 1).unwrap();
        let wound = apply_word(&s, &w, None, &arc).unwrap();
        assert!(!wound.is_closed());
        // A boundary twist is a homeomorphism fixing every closed curve up to
        // isotopy, so closed probes cannot see it.
        for probe in [s.named_curve("a1").unwrap(), s.named_curve("b1").unwrap(), s.boundary_parallel_curve()] {
            assert_eq!(
                s.geometric_intersection(&wound, &probe).unwrap(),
                s.geometric_intersection(&arc, &probe).unwrap()
            );
        }
        // Only the arc-vs-arc count (rel endpoints) detects the winding, and
        // it grows strictly with the twist count.
        let once = s.geometric_intersection(&wound, &arc).unwrap();
        assert!(once > 0, "one boundary twist must move the arc off itself");
        let w2 = MonodromyWord::new(1, vec![], 2).unwrap();
        let wound2 = apply_word(&s, &w2, None, &arc).unwrap();
        let twice = s.geometric_intersection(&wound2, &arc).unwrap();
        assert!(twice > once, "winding must accumulate: {once} vs {twice}");
    }

    #[test]
    fn registry_resolution() {
        let s = Surface::build(1).unwrap();
        let mut reg = CurveRegistry::new();
        reg.insert("L".into(), s.named_curve("b1").unwrap());
        let w = MonodromyWord::new(1, vec![Letter::new("L", 1)], 0).unwrap();
        let m = homology_action(&s, &w, Some(&reg)).unwrap();
        assert_eq!(rows(&m), vec![vec![1, 0], vec![-1, 1]]);

        let missing = MonodromyWord::new(1, vec![Letter::new("Q", 1)], 0).unwrap();
        assert!(homology_action(&s, &missing, None).is_err());
    }

    #[test]
    fn det_bareiss() {
        let m = IntMatrix::from_rows(&[
            vec![2, 0, 1, 3],
            vec![1, 1, 0, 2],
            vec![0, 4, 1, 1],
            vec![3, 1, 2, 0],
        ])
        .unwrap();
        // Laplace expansion by hand: 2·12 + 1·(−22) − 3·10 = −28.
        assert_eq!(m.det(), -28);
        assert_eq!(IntMatrix::identity(5).det(), 1);
    }
}
