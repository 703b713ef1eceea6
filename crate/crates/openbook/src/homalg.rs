//! Linear algebra over the two-element field, chain complexes, mapping
//! cones, and exact-triangle verification.
//!
//! Everything downstream (diagram differentials, rank computations, the
//! triangle cross-checks) reduces to ranks of matrices over GF(2). Rows are
//! bit-packed for the sizes that actually occur; very wide matrices fall
//! back to a sparse row representation.

use crate::{Error, Result};

/// Column-count threshold above which matrices switch from bit-packed dense
/// rows to sparse rows.
const DENSE_COL_LIMIT: usize = 4096;

/// A matrix over the two-element field.
///
/// Dense variant: each row is a sequence of 64-bit words. Sparse variant:
/// each row is a sorted list of set column indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatF2 {
    Dense {
        nrows: usize,
        ncols: usize,
        /// `nrows * words_per_row` words, row-major.
        bits: Vec<u64>,
    },
    Sparse {
        nrows: usize,
        ncols: usize,
        /// Per row, the sorted set columns.
        cols: Vec<Vec<u32>>,
    },
}

fn words_for(ncols: usize) -> usize {
    ncols.div_ceil(64)
}

impl MatF2 {
    /// The all-zero `nrows x ncols` matrix, dense or sparse by width.
    pub fn zero(nrows: usize, ncols: usize) -> Self {
        if ncols <= DENSE_COL_LIMIT {
            MatF2::Dense {
                nrows,
                ncols,
                bits: vec![0; nrows * words_for(ncols)],
            }
        } else {
            MatF2::Sparse {
                nrows,
                ncols,
                cols: vec![Vec::new(); nrows],
            }
        }
    }

    /// The `n x n` identity.
    pub fn identity(n: usize) -> Self {
        let mut m = MatF2::zero(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Build from a list of set entries.
    pub fn from_entries(nrows: usize, ncols: usize, entries: &[(usize, usize)]) -> Result<Self> {
        let mut m = MatF2::zero(nrows, ncols);
        for &(r, c) in entries {
            if r >= nrows || c >= ncols {
                return Err(Error::invalid(format!(
                    "matrix entry ({r},{c}) outside {nrows}x{ncols}"
                )));
            }
            m.set(r, c, true);
        }
        Ok(m)
    }

    pub fn nrows(&self) -> usize {
        match self {
            MatF2::Dense { nrows, .. } | MatF2::Sparse { nrows, .. } => *nrows,
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            MatF2::Dense { ncols, .. } | MatF2::Sparse { ncols, .. } => *ncols,
        }
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        match self {
            MatF2::Dense { ncols, bits, .. } => {
                let w = words_for(*ncols);
                bits[r * w + c / 64] >> (c % 64) & 1 == 1
            }
            MatF2::Sparse { cols, .. } => cols[r].binary_search(&(c as u32)).is_ok(),
        }
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        match self {
            MatF2::Dense { ncols, bits, .. } => {
                let w = words_for(*ncols);
                let word = &mut bits[r * w + c / 64];
                if value {
                    *word |= 1 << (c % 64);
                } else {
                    *word &= !(1 << (c % 64));
                }
            }
            MatF2::Sparse { cols, .. } => {
                let row = &mut cols[r];
                match row.binary_search(&(c as u32)) {
                    Ok(i) => {
                        if !value {
                            row.remove(i);
                        }
                    }
                    Err(i) => {
                        if value {
                            row.insert(i, c as u32);
                        }
                    }
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            MatF2::Dense { bits, .. } => bits.iter().all(|&w| w == 0),
            MatF2::Sparse { cols, .. } => cols.iter().all(|r| r.is_empty()),
        }
    }

    /// Set columns of one row.
    pub fn row_support(&self, r: usize) -> Vec<usize> {
        match self {
            MatF2::Dense { ncols, bits, .. } => {
                let w = words_for(*ncols);
                let mut out = Vec::new();
                for (wi, &word) in bits[r * w..(r + 1) * w].iter().enumerate() {
                    let mut word = word;
                    while word != 0 {
                        let b = word.trailing_zeros() as usize;
                        out.push(wi * 64 + b);
                        word &= word - 1;
                    }
                }
                out
            }
            MatF2::Sparse { cols, .. } => cols[r].iter().map(|&c| c as usize).collect(),
        }
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        match self {
            MatF2::Dense { ncols, bits, .. } => {
                let w = words_for(*ncols);
                let (a, b) = (src * w, dst * w);
                for k in 0..w {
                    let v = bits[a + k];
                    bits[b + k] ^= v;
                }
            }
            MatF2::Sparse { cols, .. } => {
                let merged = xor_sorted(&cols[src], &cols[dst]);
                cols[dst] = merged;
            }
        }
    }

    /// Matrix rank by Gaussian elimination (on a scratch copy).
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let (nrows, ncols) = (m.nrows(), m.ncols());
        let mut rank = 0;
        let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
        for r in 0..nrows {
            // Reduce row r against existing pivots until it is zero or
            // contributes a new pivot.
            loop {
                let lead = match m.row_support(r).first().copied() {
                    Some(c) => c,
                    None => break,
                };
                match pivot_of_col[lead] {
                    Some(p) => m.xor_row_into(p, r),
                    None => {
                        pivot_of_col[lead] = Some(r);
                        rank += 1;
                        break;
                    }
                }
            }
        }
        rank
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &MatF2) -> Result<MatF2> {
        if self.ncols() != rhs.nrows() {
            return Err(Error::invalid(format!(
                "matrix product shape mismatch: {}x{} * {}x{}",
                self.nrows(),
                self.ncols(),
                rhs.nrows(),
                rhs.ncols()
            )));
        }
        let mut out = MatF2::zero(self.nrows(), rhs.ncols());
        for r in 0..self.nrows() {
            for c in self.row_support(r) {
                // out.row(r) ^= rhs.row(c)
                for cc in rhs.row_support(c) {
                    let v = out.get(r, cc);
                    out.set(r, cc, !v);
                }
            }
        }
        Ok(out)
    }

    /// Entrywise sum (XOR).
    pub fn add(&self, rhs: &MatF2) -> Result<MatF2> {
        if self.nrows() != rhs.nrows() || self.ncols() != rhs.ncols() {
            return Err(Error::invalid("matrix sum shape mismatch".to_string()));
        }
        let mut out = self.clone();
        for r in 0..rhs.nrows() {
            for c in rhs.row_support(r) {
                let v = out.get(r, c);
                out.set(r, c, !v);
            }
        }
        Ok(out)
    }

    /// Row-major bit-string rows, the JSON interchange form.
    pub fn to_bit_strings(&self) -> Vec<String> {
        (0..self.nrows())
            .map(|r| {
                let mut s = vec![b'0'; self.ncols()];
                for c in self.row_support(r) {
                    s[c] = b'1';
                }
                String::from_utf8(s).expect("ascii")
            })
            .collect()
    }
}

fn xor_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// A finite chain complex over the two-element field.
///
/// `dims[k]` is the dimension of the k-th chain group; `boundary_maps[k]`
/// sends the (k+1)-st group to the k-th (so there are `dims.len() - 1` of
/// them). Consecutive boundary maps compose to zero.
#[derive(Debug, Clone)]
pub struct ComplexF2 {
    dims: Vec<usize>,
    boundary_maps: Vec<MatF2>,
}

impl ComplexF2 {
    /// Validate shapes and `∂∘∂ = 0`, then construct.
    pub fn new(dims: Vec<usize>, boundary_maps: Vec<MatF2>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::invalid("complex needs at least one chain group"));
        }
        if boundary_maps.len() + 1 != dims.len() {
            return Err(Error::invalid(format!(
                "expected {} boundary maps for {} chain groups, got {}",
                dims.len() - 1,
                dims.len(),
                boundary_maps.len()
            )));
        }
        for (k, d) in boundary_maps.iter().enumerate() {
            if d.nrows() != dims[k] || d.ncols() != dims[k + 1] {
                return Err(Error::invalid(format!(
                    "boundary map {} has shape {}x{}, expected {}x{}",
                    k,
                    d.nrows(),
                    d.ncols(),
                    dims[k],
                    dims[k + 1]
                )));
            }
        }
        for k in 0..boundary_maps.len().saturating_sub(1) {
            let dd = boundary_maps[k].mul(&boundary_maps[k + 1])?;
            if !dd.is_zero() {
                return Err(Error::invalid(format!(
                    "boundary maps {k} and {} do not compose to zero",
                    k + 1
                )));
            }
        }
        Ok(ComplexF2 {
            dims,
            boundary_maps,
        })
    }

    /// A complex concentrated in one spot with zero differential everywhere.
    pub fn with_zero_differentials(dims: Vec<usize>) -> Result<Self> {
        let maps = (0..dims.len().saturating_sub(1))
            .map(|k| MatF2::zero(dims[k], dims[k + 1]))
            .collect();
        ComplexF2::new(dims, maps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn boundary_map(&self, k: usize) -> Option<&MatF2> {
        self.boundary_maps.get(k)
    }

    /// Homology rank at every position: `dim ker ∂_in − rank ∂_out`.
    pub fn homology_ranks(&self) -> Vec<usize> {
        let n = self.dims.len();
        let ranks: Vec<usize> = self.boundary_maps.iter().map(MatF2::rank).collect();
        (0..n)
            .map(|k| {
                // ∂ out of position k is boundary_maps[k-1]; into k is [k].
                let rank_out = if k == 0 { 0 } else { ranks[k - 1] };
                let rank_in = if k < ranks.len() { ranks[k] } else { 0 };
                self.dims[k] - rank_out - rank_in
            })
            .collect()
    }

    /// True when every homology rank vanishes.
    pub fn is_acyclic(&self) -> bool {
        self.homology_ranks().iter().all(|&r| r == 0)
    }
}

/// A degree-preserving chain map between complexes of equal length:
/// `pieces[k]` maps the k-th group of the source to the k-th of the target.
#[derive(Debug, Clone)]
pub struct ChainMap {
    pub pieces: Vec<MatF2>,
}

impl ChainMap {
    /// The zero map between two complexes.
    pub fn zero(source: &ComplexF2, target: &ComplexF2) -> Self {
        let pieces = source
            .dims()
            .iter()
            .zip(target.dims())
            .map(|(&s, &t)| MatF2::zero(t, s))
            .collect();
        ChainMap { pieces }
    }

    fn validate(&self, source: &ComplexF2, target: &ComplexF2, name: &str) -> Result<()> {
        if self.pieces.len() != source.dims().len() || source.dims().len() != target.dims().len() {
            return Err(Error::invalid(format!(
                "chain map {name}: piece count mismatch"
            )));
        }
        for (k, piece) in self.pieces.iter().enumerate() {
            if piece.nrows() != target.dims()[k] || piece.ncols() != source.dims()[k] {
                return Err(Error::invalid(format!(
                    "chain map {name}: piece {k} has shape {}x{}, expected {}x{}",
                    piece.nrows(),
                    piece.ncols(),
                    target.dims()[k],
                    source.dims()[k]
                )));
            }
        }
        // Commute with the differentials: target∂ ∘ f = f ∘ source∂.
        for k in 0..self.pieces.len() - 1 {
            let lhs = target.boundary_maps[k].mul(&self.pieces[k + 1])?;
            let rhs = self.pieces[k].mul(&source.boundary_maps[k])?;
            if lhs.add(&rhs)?.is_zero() {
                continue;
            }
            return Err(Error::invalid(format!(
                "chain map {name}: does not commute with boundaries at position {k}"
            )));
        }
        Ok(())
    }
}

/// The iterated mapping cone of two composable chain maps and a
/// nullhomotopy of their composite.
///
/// Inputs: chain maps `f: A → B` and `g: B → C` and a homotopy
/// `h: A_k → C_{k+1}` with `g∘f = ∂h + h∂`. Output: the total complex
/// with k-th group `A_{k-2} ⊕ B_{k-1} ⊕ C_k` and differential
///
/// ```text
/// ⎡∂ 0 0⎤
/// ⎢f ∂ 0⎥
/// ⎣h g ∂⎦
/// ```
///
/// Acyclicity of this complex is equivalent to the three homologies
/// forming an exact triangle.
pub fn iterated_cone(
    a: &ComplexF2,
    b: &ComplexF2,
    c: &ComplexF2,
    f: &ChainMap,
    g: &ChainMap,
    h: &[MatF2],
) -> Result<ComplexF2> {
    let n = a.dims().len();
    if b.dims().len() != n || c.dims().len() != n {
        return Err(Error::invalid(
            "iterated cone requires three complexes of equal length",
        ));
    }
    f.validate(a, b, "f")?;
    g.validate(b, c, "g")?;
    if h.len() != n {
        return Err(Error::invalid("homotopy needs one piece per position"));
    }
    for (k, piece) in h.iter().enumerate() {
        let target_rows = if k + 1 < n { c.dims()[k + 1] } else { 0 };
        if piece.nrows() != target_rows || piece.ncols() != a.dims()[k] {
            return Err(Error::invalid(format!(
                "homotopy piece {k} has shape {}x{}, expected {}x{}",
                piece.nrows(),
                piece.ncols(),
                target_rows,
                a.dims()[k]
            )));
        }
    }
    // Homotopy identity g∘f + ∂h + h∂ = 0 at each position.
    for k in 0..n {
        let gf = g.pieces[k].mul(&f.pieces[k])?;
        let mut total = gf;
        if k + 1 < n {
            // ∂_C ∘ h_k : A_k → C_k
            total = total.add(&c.boundary_maps[k].mul(&h[k])?)?;
        }
        if k > 0 {
            // h_{k-1} ∘ ∂_A : A_k → C_k
            total = total.add(&h[k - 1].mul(&a.boundary_maps[k - 1])?)?;
        }
        if !total.is_zero() {
            return Err(Error::invalid(format!(
                "homotopy identity g∘f = ∂h + h∂ fails at position {k}"
            )));
        }
    }

    // Total complex X_k = A_{k-2} ⊕ B_{k-1} ⊕ C_k for k = 0..n+2.
    let dim_a = |k: isize| -> usize {
        if (0..n as isize).contains(&k) {
            a.dims()[k as usize]
        } else {
            0
        }
    };
    let dim_b = |k: isize| -> usize {
        if (0..n as isize).contains(&k) {
            b.dims()[k as usize]
        } else {
            0
        }
    };
    let dim_c = |k: isize| -> usize {
        if (0..n as isize).contains(&k) {
            c.dims()[k as usize]
        } else {
            0
        }
    };
    let total_len = n + 2;
    let dims: Vec<usize> = (0..total_len as isize)
        .map(|k| dim_a(k - 2) + dim_b(k - 1) + dim_c(k))
        .collect();
    let mut maps = Vec::new();
    for k in 1..total_len as isize {
        // Source blocks at X_k, target blocks at X_{k-1}.
        let (sa, sb, sc) = (dim_a(k - 2), dim_b(k - 1), dim_c(k));
        let (ta, tb, tc) = (dim_a(k - 3), dim_b(k - 2), dim_c(k - 1));
        let mut m = MatF2::zero(ta + tb + tc, sa + sb + sc);
        let mut blit = |mat: Option<&MatF2>, row0: usize, col0: usize| {
            if let Some(mat) = mat {
                for r in 0..mat.nrows() {
                    for c in mat.row_support(r) {
                        m.set(row0 + r, col0 + c, true);
                    }
                }
            }
        };
        // ∂_A block: A_{k-2} → A_{k-3}.
        if k - 2 >= 1 && (k - 2) < n as isize {
            blit(Some(&a.boundary_maps[(k - 3) as usize]), 0, 0);
        }
        // f block: A_{k-2} → B_{k-2}.
        if (0..n as isize).contains(&(k - 2)) {
            blit(Some(&f.pieces[(k - 2) as usize]), ta, 0);
        }
        // ∂_B block: B_{k-1} → B_{k-2}.
        if k - 1 >= 1 && (k - 1) < n as isize {
            blit(Some(&b.boundary_maps[(k - 2) as usize]), ta, sa);
        }
        // h block: A_{k-2} → C_{k-1}.
        if (0..n as isize).contains(&(k - 2)) && (0..n as isize).contains(&(k - 1)) {
            blit(Some(&h[(k - 2) as usize]), ta + tb, 0);
        }
        // g block: B_{k-1} → C_{k-1}.
        if (0..n as isize).contains(&(k - 1)) {
            blit(Some(&g.pieces[(k - 1) as usize]), ta + tb, sa);
        }
        // ∂_C block: C_k → C_{k-1}.
        if k >= 1 && k < n as isize {
            blit(Some(&c.boundary_maps[(k - 1) as usize]), ta + tb, sa + sb);
        }
        maps.push(m);
    }
    // `ComplexF2::new` re-checks ∂² = 0 on the assembled total complex.
    ComplexF2::new(dims, maps).map_err(|e| match e {
        Error::InvalidInput(msg) => Error::internal(format!("iterated cone not a complex: {msg}")),
        other => other,
    })
}

/// Dimension data (and optionally maps) of a candidate exact triangle
/// `A → B → C → A`.
#[derive(Debug, Clone, Default)]
pub struct TriangleData {
    pub dim_a: usize,
    pub dim_b: usize,
    pub dim_c: usize,
    /// Optional `f: A → B` (a `dim_b x dim_a` matrix).
    pub map_f: Option<MatF2>,
    /// Optional `g: B → C`.
    pub map_g: Option<MatF2>,
    /// Optional connecting map `d: C → A`.
    pub map_d: Option<MatF2>,
}

/// Outcome of an exact-triangle check, with every failed condition listed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangleVerdict {
    pub pass: bool,
    pub failures: Vec<String>,
}

/// Verify the necessary conditions for `A → B → C → A` to be exact.
///
/// From dimensions alone: the total dimension is even and each corner is at
/// most the sum of the other two. When maps are supplied: consecutive
/// composites vanish and the rank equalities `rk f + rk g = dim B` (and
/// cyclically) hold, which together are equivalent to exactness.
pub fn check_exact_triangle(t: &TriangleData) -> Result<TriangleVerdict> {
    let mut failures = Vec::new();
    let (da, db, dc) = (t.dim_a, t.dim_b, t.dim_c);
    if (da + db + dc) % 2 != 0 {
        failures.push(format!("odd total dimension {da}+{db}+{dc}"));
    }
    for (name, x, y, z) in [("A", da, db, dc), ("B", db, dc, da), ("C", dc, da, db)] {
        if x > y + z {
            failures.push(format!("corner {name} too large: {x} > {y} + {z}"));
        }
    }

    for (name, m, rows, cols) in [
        ("f", &t.map_f, db, da),
        ("g", &t.map_g, dc, db),
        ("d", &t.map_d, da, dc),
    ] {
        if let Some(m) = m {
            if m.nrows() != rows || m.ncols() != cols {
                return Err(Error::invalid(format!(
                    "triangle map {name} has shape {}x{}, expected {rows}x{cols}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
    }

    let mut check_corner = |name: &str,
                            incoming: &Option<MatF2>,
                            outgoing: &Option<MatF2>,
                            dim_here: usize|
     -> Result<()> {
        if let (Some(inc), Some(out)) = (incoming, outgoing) {
            if !out.mul(inc)?.is_zero() {
                failures.push(format!("composite through {name} is nonzero"));
            } else if inc.rank() + out.rank() != dim_here {
                failures.push(format!(
                    "not exact at {name}: rank in {} + rank out {} ≠ dim {}",
                    inc.rank(),
                    out.rank(),
                    dim_here
                ));
            }
        }
        Ok(())
    };
    check_corner("B", &t.map_f, &t.map_g, db)?;
    check_corner("C", &t.map_g, &t.map_d, dc)?;
    check_corner("A", &t.map_d, &t.map_f, da)?;

    Ok(TriangleVerdict {
        pass: failures.is_empty(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_identity_and_zero() {
        assert_eq!(MatF2::identity(5).rank(), 5);
        assert_eq!(MatF2::zero(3, 7).rank(), 0);
    }

    #[test]
    fn rank_of_dependent_rows() {
        // Rows: e1, e2, e1+e2 → rank 2.
        let m = MatF2::from_entries(3, 2, &[(0, 0), (1, 1), (2, 0), (2, 1)]).unwrap();
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn sparse_path_used_for_wide_matrices() {
        let m = MatF2::zero(2, DENSE_COL_LIMIT + 1);
        assert!(matches!(m, MatF2::Sparse { .. }));
        let mut m = m;
        m.set(0, 4096, true);
        m.set(1, 4096, true);
        m.set(1, 7, true);
        assert_eq!(m.rank(), 2);
        assert_eq!(m.row_support(1), vec![7, 4096]);
    }

    #[test]
    fn zero_differential_homology_is_dims() {
        let c = ComplexF2::with_zero_differentials(vec![2, 3, 4]).unwrap();
        assert_eq!(c.homology_ranks(), vec![2, 3, 4]);
    }

    #[test]
    fn identity_differential_kills_everything() {
        let c = ComplexF2::new(vec![4, 4], vec![MatF2::identity(4)]).unwrap();
        assert_eq!(c.homology_ranks(), vec![0, 0]);
    }

    #[test]
    fn nonsquaring_boundary_rejected() {
        // d1 = d2 = identity: composite is identity ≠ 0.
        let err = ComplexF2::new(
            vec![2, 2, 2],
            vec![MatF2::identity(2), MatF2::identity(2)],
        );
        assert!(err.is_err());
    }

    #[test]
    fn triangle_parity_obstruction() {
        let v = check_exact_triangle(&TriangleData {
            dim_a: 1,
            dim_b: 1,
            dim_c: 1,
            ..Default::default()
        })
        .unwrap();
        assert!(!v.pass);
        assert!(v.failures.iter().any(|f| f.contains("odd")));
    }

    #[test]
    fn triangle_zero_k_k_passes() {
        for k in 0..6 {
            let v = check_exact_triangle(&TriangleData {
                dim_a: 0,
                dim_b: k,
                dim_c: k,
                ..Default::default()
            })
            .unwrap();
            assert!(v.pass, "(0,{k},{k}) should pass");
        }
    }

    #[test]
    fn triangle_inequality_obstruction() {
        let v = check_exact_triangle(&TriangleData {
            dim_a: 4,
            dim_b: 1,
            dim_c: 1,
            ..Default::default()
        })
        .unwrap();
        assert!(!v.pass);
        assert!(v.failures.iter().any(|f| f.contains("corner A")));
    }

    #[test]
    fn cone_with_iso_f_has_homology_of_c_shifted() {
        // A = B = F² in one spot, f = id, g = 0, h = 0, C = F³.
        let a = ComplexF2::with_zero_differentials(vec![2]).unwrap();
        let b = a.clone();
        let c = ComplexF2::with_zero_differentials(vec![3]).unwrap();
        let f = ChainMap {
            pieces: vec![MatF2::identity(2)],
        };
        let g = ChainMap::zero(&b, &c);
        let h = vec![MatF2::zero(0, 2)];
        let cone = iterated_cone(&a, &b, &c, &f, &g, &h).unwrap();
        assert_eq!(cone.homology_ranks(), vec![3, 0, 0]);
    }

    #[test]
    fn cone_with_zero_maps_is_direct_sum() {
        let a = ComplexF2::with_zero_differentials(vec![1]).unwrap();
        let b = ComplexF2::with_zero_differentials(vec![2]).unwrap();
        let c = ComplexF2::with_zero_differentials(vec![3]).unwrap();
        let f = ChainMap::zero(&a, &b);
        let g = ChainMap::zero(&b, &c);
        let h = vec![MatF2::zero(0, 1)];
        let cone = iterated_cone(&a, &b, &c, &f, &g, &h).unwrap();
        assert_eq!(cone.homology_ranks(), vec![3, 2, 1]);
    }

    #[test]
    fn cone_rejects_bad_homotopy() {
        // f = id, g = id, h = 0: g∘f = id ≠ ∂h + h∂ = 0.
        let a = ComplexF2::with_zero_differentials(vec![1]).unwrap();
        let f = ChainMap {
            pieces: vec![MatF2::identity(1)],
        };
        let g = f.clone();
        let h = vec![MatF2::zero(0, 1)];
        assert!(iterated_cone(&a, &a, &a, &f, &g, &h).is_err());
    }
}
