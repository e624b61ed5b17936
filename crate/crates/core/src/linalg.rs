//! Exact dense linear algebra over GF(q): matrices, row reduction, canonical
//! subspace representatives, subspace iteration.
//!
//! Matrices act on column vectors, so the columns of a matrix are the images
//! of the basis vectors. A [`Subspace`] stores its basis as the rows of a
//! reduced-row-echelon matrix with strictly increasing pivot columns; two
//! subspaces are equal as point sets iff their stored bases are identical,
//! which is what makes them usable as orbit keys.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Error, Result};
use crate::gf::{FieldElem, FieldSpec, FieldSpecDef};

#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
    spec: Arc<FieldSpec>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} over {:?}", self.rows, self.cols, self.spec)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|c| self.spec.fmt_elem(self[(r, c)]))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = FieldElem;
    fn index(&self, (r, c): (usize, usize)) -> &FieldElem {
        &self.data[r * self.cols + c]
    }
}

impl Mat {
    pub fn zero(spec: Arc<FieldSpec>, rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            data: vec![FieldElem::ZERO; rows * cols],
            spec,
        }
    }

    pub fn identity(spec: Arc<FieldSpec>, n: usize) -> Mat {
        let mut m = Mat::zero(spec, n, n);
        for i in 0..n {
            m.set(i, i, FieldElem::ONE);
        }
        m
    }

    pub fn from_fn(
        spec: Arc<FieldSpec>,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> FieldElem,
    ) -> Mat {
        let mut m = Mat::zero(spec, rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    /// Build from integer entries reduced mod p (row-major).
    pub fn from_int_rows(spec: Arc<FieldSpec>, entries: &[Vec<i64>]) -> Result<Mat> {
        let rows = entries.len();
        if rows == 0 {
            return usage("matrix needs at least one row");
        }
        let cols = entries[0].len();
        if entries.iter().any(|r| r.len() != cols) {
            return usage("ragged matrix rows");
        }
        Ok(Mat::from_fn(spec.clone(), rows, cols, |r, c| {
            spec.fe(entries[r][c])
        }))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElem) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn check_same_spec(&self, other: &Mat) -> Result<()> {
        if *self.spec != *other.spec {
            return usage("mismatched field specs");
        }
        Ok(())
    }

    pub fn mul(&self, other: &Mat) -> Result<Mat> {
        self.check_same_spec(other)?;
        if self.cols != other.rows {
            return usage(format!(
                "dimension mismatch: {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        let f = &self.spec;
        let mut out = Mat::zero(self.spec.clone(), self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let v = f.add(out[(r, c)], f.mul(a, other[(k, c)]));
                    out.set(r, c, v);
                }
            }
        }
        Ok(out)
    }

    /// Matrix times column vector.
    pub fn mul_vec(&self, v: &[FieldElem]) -> Result<Vec<FieldElem>> {
        if v.len() != self.cols {
            return usage("vector length mismatch");
        }
        let f = &self.spec;
        let mut out = vec![FieldElem::ZERO; self.rows];
        for (c, &x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for r in 0..self.rows {
                out[r] = f.add(out[r], f.mul(self[(r, c)], x));
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.spec.clone(), self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn add(&self, other: &Mat) -> Result<Mat> {
        self.check_same_spec(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return usage("dimension mismatch in add");
        }
        let f = &self.spec;
        Ok(Mat::from_fn(self.spec.clone(), self.rows, self.cols, |r, c| {
            f.add(self[(r, c)], other[(r, c)])
        }))
    }

    pub fn scale(&self, s: FieldElem) -> Mat {
        let f = &self.spec;
        Mat::from_fn(self.spec.clone(), self.rows, self.cols, |r, c| {
            f.mul(self[(r, c)], s)
        })
    }

    pub fn det(&self) -> Result<FieldElem> {
        if self.rows != self.cols {
            return usage("determinant of non-square matrix");
        }
        let f = &self.spec;
        let n = self.rows;
        let mut m = self.data.clone();
        let mut det = FieldElem::ONE;
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[r * n + col].is_zero());
            let Some(pr) = pivot else {
                return Ok(FieldElem::ZERO);
            };
            if pr != col {
                for c in 0..n {
                    m.swap(pr * n + c, col * n + c);
                }
                det = f.neg(det);
            }
            let pv = m[col * n + col];
            det = f.mul(det, pv);
            let pinv = f.inv(pv)?;
            for r in col + 1..n {
                let factor = f.mul(m[r * n + col], pinv);
                if factor.is_zero() {
                    continue;
                }
                for c in col..n {
                    let sub = f.mul(factor, m[col * n + c]);
                    m[r * n + c] = f.sub(m[r * n + c], sub);
                }
            }
        }
        Ok(det)
    }

    pub fn is_invertible(&self) -> bool {
        matches!(self.det(), Ok(d) if !d.is_zero())
    }

    pub fn inverse(&self) -> Result<Mat> {
        if self.rows != self.cols {
            return usage("inverse of non-square matrix");
        }
        let f = self.spec.clone();
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Mat::identity(f.clone(), n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_zero());
            let Some(pr) = pivot else {
                return domain("matrix is singular");
            };
            if pr != col {
                for c in 0..n {
                    let (x, y) = (a[(pr, c)], a[(col, c)]);
                    a.set(pr, c, y);
                    a.set(col, c, x);
                    let (x, y) = (inv[(pr, c)], inv[(col, c)]);
                    inv.set(pr, c, y);
                    inv.set(col, c, x);
                }
            }
            let pinv = f.inv(a[(col, col)])?;
            for c in 0..n {
                a.set(col, c, f.mul(a[(col, c)], pinv));
                inv.set(col, c, f.mul(inv[(col, c)], pinv));
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let factor = a[(r, col)];
                for c in 0..n {
                    let s = f.mul(factor, a[(col, c)]);
                    a.set(r, c, f.sub(a[(r, c)], s));
                    let s = f.mul(factor, inv[(col, c)]);
                    inv.set(r, c, f.sub(inv[(r, c)], s));
                }
            }
        }
        Ok(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|r| {
                (0..self.cols).all(|c| {
                    if r == c {
                        self[(r, c)] == FieldElem::ONE
                    } else {
                        self[(r, c)].is_zero()
                    }
                })
            })
    }
}

/// In-place reduced row echelon form on raw rows; returns pivot columns.
/// Zero rows are dropped.
pub(crate) fn rref_rows(spec: &FieldSpec, rows: &mut Vec<Vec<FieldElem>>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = vec![];
    let mut rank = 0usize;
    for col in 0..ncols {
        let pivot = (rank..rows.len()).find(|&r| !rows[r][col].is_zero());
        let Some(pr) = pivot else { continue };
        rows.swap(rank, pr);
        let pinv = spec.inv(rows[rank][col]).expect("pivot nonzero");
        for c in col..ncols {
            rows[rank][c] = spec.mul(rows[rank][c], pinv);
        }
        for r in 0..rows.len() {
            if r == rank || rows[r][col].is_zero() {
                continue;
            }
            let factor = rows[r][col];
            for c in col..ncols {
                let s = spec.mul(factor, rows[rank][c]);
                rows[r][c] = spec.sub(rows[r][c], s);
            }
        }
        pivots.push(col);
        rank += 1;
    }
    rows.truncate(rank);
    pivots
}

/// A canonical k-dimensional subspace of GF(q)^n. Always in RREF.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    n: usize,
    k: usize,
    basis: Vec<FieldElem>, // k*n row-major
    pivots: Vec<usize>,
    spec: Arc<FieldSpec>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace k={} of GF({})^{} ", self.k, self.spec.order(), self.n)?;
        let rows: Vec<String> = (0..self.k)
            .map(|r| {
                let row: Vec<String> = self.basis_row(r).iter().map(|e| self.spec.fmt_elem(*e)).collect();
                format!("({})", row.join(","))
            })
            .collect();
        write!(f, "{}", rows.join(" "))
    }
}

/// JSON form: `{n, k, q, basis: [[..]]}` with canonical packed entry values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubspaceDef {
    pub n: usize,
    pub k: usize,
    pub q: u64,
    pub basis: Vec<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSpecDef>,
}

impl Subspace {
    /// Canonical RREF span of the given vectors. Fails on a zero span.
    pub fn canonicalize(spec: Arc<FieldSpec>, n: usize, vectors: &[Vec<FieldElem>]) -> Result<Subspace> {
        if vectors.is_empty() {
            return domain("empty generating set");
        }
        if vectors.iter().any(|v| v.len() != n) {
            return usage("vector length mismatch");
        }
        let mut rows: Vec<Vec<FieldElem>> = vectors.to_vec();
        let pivots = rref_rows(&spec, &mut rows);
        if rows.is_empty() {
            return domain("zero span has no subspace representative (k >= 1 required)");
        }
        let k = rows.len();
        let mut basis = Vec::with_capacity(k * n);
        for r in rows {
            basis.extend(r);
        }
        Ok(Subspace {
            n,
            k,
            basis,
            pivots,
            spec,
        })
    }

    pub fn from_int_rows(spec: Arc<FieldSpec>, n: usize, rows: &[Vec<i64>]) -> Result<Subspace> {
        let vecs: Vec<Vec<FieldElem>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| spec.fe(x)).collect())
            .collect();
        Subspace::canonicalize(spec, n, &vecs)
    }

    pub(crate) fn from_rref_rows(
        spec: Arc<FieldSpec>,
        n: usize,
        rows: Vec<Vec<FieldElem>>,
        pivots: Vec<usize>,
    ) -> Subspace {
        let k = rows.len();
        let mut basis = Vec::with_capacity(k * n);
        for r in rows {
            basis.extend(r);
        }
        Subspace {
            n,
            k,
            basis,
            pivots,
            spec,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }
    pub fn dim(&self) -> usize {
        self.k
    }
    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn basis_row(&self, r: usize) -> &[FieldElem] {
        &self.basis[r * self.n..(r + 1) * self.n]
    }

    pub fn basis_rows(&self) -> impl Iterator<Item = &[FieldElem]> {
        (0..self.k).map(move |r| self.basis_row(r))
    }

    /// All q^k vectors of the subspace (including zero).
    pub fn all_vectors(&self) -> Vec<Vec<FieldElem>> {
        let f = &self.spec;
        let q = f.order() as u64;
        let mut out = vec![];
        let total = q.pow(self.k as u32);
        for idx in 0..total {
            let mut v = vec![FieldElem::ZERO; self.n];
            let mut rem = idx;
            for r in 0..self.k {
                let c = f.elem((rem % q) as u32).unwrap();
                rem /= q;
                if !c.is_zero() {
                    for (j, &b) in self.basis_row(r).iter().enumerate() {
                        v[j] = f.add(v[j], f.mul(c, b));
                    }
                }
            }
            out.push(v);
        }
        out
    }

    /// Bits needed per packed entry.
    pub fn bits_per_entry(q: u32) -> u32 {
        32 - (q - 1).leading_zeros()
    }

    /// Packed RREF bytes: rows packed independently, entries little-endian in
    /// bit order, each row padded to a whole byte. This byte string is the
    /// canonical hashable key and the record format of key dumps.
    pub fn packed_key(&self) -> Vec<u8> {
        let bits = Self::bits_per_entry(self.spec.order());
        let row_bytes = (self.n as u32 * bits).div_ceil(8) as usize;
        let mut out = vec![0u8; row_bytes * self.k];
        for r in 0..self.k {
            let base = r * row_bytes * 8;
            for (c, &e) in self.basis_row(r).iter().enumerate() {
                let off = base + c * bits as usize;
                let mut v = e.0 as u32;
                for b in 0..bits as usize {
                    if v & 1 == 1 {
                        out[(off + b) / 8] |= 1 << ((off + b) % 8);
                    }
                    v >>= 1;
                }
            }
        }
        out
    }

    pub fn def(&self) -> SubspaceDef {
        SubspaceDef {
            n: self.n,
            k: self.k,
            q: self.spec.order() as u64,
            basis: (0..self.k)
                .map(|r| self.basis_row(r).iter().map(|e| e.0 as u32).collect())
                .collect(),
            field: Some(self.spec.def()),
        }
    }

    pub fn from_def(def: &SubspaceDef) -> Result<Subspace> {
        let spec = match &def.field {
            Some(fd) => FieldSpec::from_def(fd)?,
            None => FieldSpec::for_order(def.q)?,
        };
        if spec.order() as u64 != def.q {
            return usage("field order disagrees with q");
        }
        let vecs: Result<Vec<Vec<FieldElem>>> = def
            .basis
            .iter()
            .map(|row| row.iter().map(|&v| spec.elem(v)).collect())
            .collect();
        Subspace::canonicalize(spec, def.n, &vecs?)
    }
}

/// Image of a subspace under an invertible matrix, in canonical form.
/// Satisfies `act(g, act(h, s)) = act(g·h, s)`.
pub fn act(g: &Mat, s: &Subspace) -> Result<Subspace> {
    if g.rows() != g.cols() || g.rows() != s.ambient_dim() {
        return usage("matrix/subspace dimension mismatch");
    }
    if **g.spec() != **s.spec() {
        return usage("mismatched field specs");
    }
    if !g.is_invertible() {
        return domain("group action requires an invertible matrix");
    }
    let imgs: Result<Vec<Vec<FieldElem>>> = s.basis_rows().map(|row| g.mul_vec(row)).collect();
    Subspace::canonicalize(g.spec().clone(), s.ambient_dim(), &imgs?)
}

/// Free (non-pivot, non-forced-zero) cell positions for an RREF matrix with
/// the given pivot columns: row i is free at columns > pivots[i] that are not
/// pivot columns.
pub(crate) fn free_cells(n: usize, pivots: &[usize]) -> Vec<Vec<usize>> {
    pivots
        .iter()
        .map(|&p| {
            (p + 1..n)
                .filter(|c| !pivots.contains(c))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Streams every k-dimensional subspace of GF(q)^n exactly once.
///
/// Order: pivot-column combinations ascend lexicographically, and for a fixed
/// pivot set the free entries ascend in row-major digit order. This is the
/// canonical enumeration order used for orbit representatives.
pub struct SubspaceEnumerator {
    spec: Arc<FieldSpec>,
    n: usize,
    k: usize,
    pivots: Vec<usize>,
    free: Vec<Vec<usize>>,
    /// flattened free-cell digit odometer, None before first yield of combo
    digits: Option<Vec<u16>>,
    /// restrict the stream to the starting pivot block (for sharding)
    single_block: bool,
    done: bool,
}

pub fn enumerate_k_subspaces(n: usize, k: usize, spec: Arc<FieldSpec>) -> Result<SubspaceEnumerator> {
    if k < 1 || k > n {
        return usage(format!("need 1 <= k <= n, got k={k}, n={n}"));
    }
    let pivots: Vec<usize> = (0..k).collect();
    let free = free_cells(n, &pivots);
    Ok(SubspaceEnumerator {
        spec,
        n,
        k,
        pivots,
        free,
        digits: None,
        single_block: false,
        done: false,
    })
}

/// The sub-stream of one pivot block, for parallel sharding: streams exactly
/// the subspaces whose pivot columns are `pivots`. The full enumeration is
/// the disjoint union of these blocks over all k-combinations.
pub fn enumerate_pivot_block(
    n: usize,
    spec: Arc<FieldSpec>,
    pivots: Vec<usize>,
) -> Result<SubspaceEnumerator> {
    let k = pivots.len();
    if k < 1 || k > n || pivots.iter().any(|&p| p >= n) {
        return usage("pivot columns must be distinct and within 0..n");
    }
    if pivots.windows(2).any(|w| w[0] >= w[1]) {
        return usage("pivot columns must be strictly increasing");
    }
    let free = free_cells(n, &pivots);
    Ok(SubspaceEnumerator {
        spec,
        n,
        k,
        pivots,
        free,
        digits: None,
        single_block: true,
        done: false,
    })
}

impl SubspaceEnumerator {
    fn advance_pivots(&mut self) -> bool {
        // next k-combination of 0..n in lexicographic order
        let n = self.n;
        let k = self.k;
        let p = &mut self.pivots;
        let mut i = k;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if p[i] < n - (k - i) {
                p[i] += 1;
                for j in i + 1..k {
                    p[j] = p[j - 1] + 1;
                }
                self.free = free_cells(n, p);
                return true;
            }
        }
    }

    fn build_current(&self) -> Subspace {
        let digits = self.digits.as_ref().unwrap();
        let mut rows = Vec::with_capacity(self.k);
        let mut di = 0;
        for r in 0..self.k {
            let mut row = vec![FieldElem::ZERO; self.n];
            row[self.pivots[r]] = FieldElem::ONE;
            for &c in &self.free[r] {
                row[c] = FieldElem(digits[di]);
                di += 1;
            }
            rows.push(row);
        }
        Subspace::from_rref_rows(self.spec.clone(), self.n, rows, self.pivots.clone())
    }
}

impl Iterator for SubspaceEnumerator {
    type Item = Subspace;

    fn next(&mut self) -> Option<Subspace> {
        if self.done {
            return None;
        }
        let q = self.spec.order() as u16;
        match &mut self.digits {
            None => {
                let total: usize = self.free.iter().map(|f| f.len()).sum();
                self.digits = Some(vec![0u16; total]);
            }
            Some(digits) => {
                // increment odometer, last digit fastest
                let mut i = digits.len();
                loop {
                    if i == 0 {
                        if self.single_block || !self.advance_pivots() {
                            self.done = true;
                            return None;
                        }
                        let total: usize = self.free.iter().map(|f| f.len()).sum();
                        self.digits = Some(vec![0u16; total]);
                        break;
                    }
                    i -= 1;
                    if digits[i] + 1 < q {
                        digits[i] += 1;
                        for d in digits[i + 1..].iter_mut() {
                            *d = 0;
                        }
                        break;
                    }
                }
            }
        }
        Some(self.build_current())
    }
}

impl From<Error> for std::io::Error {
    fn from(e: Error) -> Self {
        std::io::Error::new(std::io::ErrorKind::Other, e.to_string())
    }
}
