//! Bilinear/quadratic form machinery: singularity tests, totally singular
//! subspace iteration, Witt index, closed-form counting and dimension
//! formulas, and empirical invariant-form detection.
//!
//! A [`QuadSpace`] stores the Gram matrix of the polarization together with
//! the quadratic values on basis vectors. The two are kept consistent by the
//! single rule `gram[i][i] = 2*quad[i]`, which in odd characteristic pins
//! `quad` to the diagonal and in characteristic 2 forces the Gram diagonal
//! to vanish (the polarization of a quadratic form is alternating there).

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Result};
use crate::gf::{FieldElem, FieldSpec};
use crate::linalg::{free_cells, Mat, Subspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormKind {
    Symplectic,
    Orthogonal,
}

/// A hyperbolic basis extracted from a quadratic space: pairs (e_i, f_i)
/// with (e_i, f_j) = delta_ij, Q(e_i) = Q(f_i) = 0, all pairs orthogonal,
/// plus a basis of the anisotropic complement.
#[derive(Debug, Clone)]
pub struct HyperbolicBasis {
    pub pairs: Vec<(Vec<FieldElem>, Vec<FieldElem>)>,
    pub defect: Vec<Vec<FieldElem>>,
}

/// A nondegenerate symplectic or quadratic space over GF(q).
#[derive(Clone)]
pub struct QuadSpace {
    n: usize,
    kind: FormKind,
    gram: Mat,
    quad: Vec<FieldElem>,
    witt: usize,
    hyperbolic: HyperbolicBasis,
    spec: Arc<FieldSpec>,
}

impl std::fmt::Debug for QuadSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "QuadSpace {:?} n={} witt={} over {:?}",
            self.kind, self.n, self.witt, self.spec
        )
    }
}

impl QuadSpace {
    /// Symplectic space from an alternating Gram matrix.
    pub fn symplectic(gram: Mat) -> Result<QuadSpace> {
        let spec = gram.spec().clone();
        let n = gram.rows();
        if gram.cols() != n {
            return usage("Gram matrix must be square");
        }
        for i in 0..n {
            if !gram[(i, i)].is_zero() {
                return domain("symplectic Gram must have zero diagonal");
            }
            for j in 0..n {
                if gram[(i, j)] != spec.neg(gram[(j, i)]) {
                    return domain("symplectic Gram must be alternating");
                }
            }
        }
        if gram.det()?.is_zero() {
            return domain("degenerate form rejected");
        }
        if n % 2 != 0 {
            return domain("symplectic spaces have even dimension");
        }
        let mut qs = QuadSpace {
            n,
            kind: FormKind::Symplectic,
            gram,
            quad: vec![FieldElem::ZERO; n],
            witt: n / 2,
            hyperbolic: HyperbolicBasis {
                pairs: vec![],
                defect: vec![],
            },
            spec,
        };
        let (pairs, defect) = qs.extract_hyperbolic()?;
        debug_assert_eq!(pairs.len(), n / 2);
        debug_assert!(defect.is_empty());
        qs.hyperbolic = HyperbolicBasis { pairs, defect };
        Ok(qs)
    }

    /// Orthogonal space from a symmetric Gram matrix and the quadratic values
    /// on basis vectors, subject to `gram[i][i] = 2*quad[i]`.
    pub fn orthogonal(gram: Mat, quad: Vec<FieldElem>) -> Result<QuadSpace> {
        let spec = gram.spec().clone();
        let n = gram.rows();
        if gram.cols() != n || quad.len() != n {
            return usage("Gram/quad dimension mismatch");
        }
        let two = spec.fe(2);
        for i in 0..n {
            if gram[(i, i)] != spec.mul(two, quad[i]) {
                return domain("gram diagonal must equal 2*Q(basis)");
            }
            for j in 0..n {
                if gram[(i, j)] != gram[(j, i)] {
                    return domain("orthogonal Gram must be symmetric");
                }
            }
        }
        if gram.det()?.is_zero() {
            return domain("degenerate form rejected");
        }
        let mut qs = QuadSpace {
            n,
            kind: FormKind::Orthogonal,
            gram,
            quad,
            witt: 0,
            hyperbolic: HyperbolicBasis {
                pairs: vec![],
                defect: vec![],
            },
            spec,
        };
        let (pairs, defect) = qs.extract_hyperbolic()?;
        qs.witt = pairs.len();
        qs.hyperbolic = HyperbolicBasis { pairs, defect };
        Ok(qs)
    }

    /// Orthogonal space in odd characteristic, quadratic values taken from
    /// the Gram diagonal.
    pub fn orthogonal_from_gram(gram: Mat) -> Result<QuadSpace> {
        let spec = gram.spec().clone();
        if spec.characteristic() == 2 {
            return usage("char-2 orthogonal spaces need explicit quadratic values");
        }
        let inv2 = spec.inv(spec.fe(2))?;
        let quad: Vec<FieldElem> = (0..gram.rows()).map(|i| spec.mul(gram[(i, i)], inv2)).collect();
        QuadSpace::orthogonal(gram, quad)
    }

    /// Hyperbolic orthogonal space of dimension 2m with pairs (i, m+i)... the
    /// basis is ordered e_1..e_m, f_1..f_m.
    pub fn hyperbolic(spec: Arc<FieldSpec>, m: usize) -> Result<QuadSpace> {
        let n = 2 * m;
        let mut gram = Mat::zero(spec.clone(), n, n);
        for i in 0..m {
            gram.set(i, m + i, FieldElem::ONE);
            gram.set(m + i, i, FieldElem::ONE);
        }
        QuadSpace::orthogonal(gram, vec![FieldElem::ZERO; n])
    }

    /// Standard symplectic space of dimension 2m, pairs (i, m+i).
    pub fn symplectic_standard(spec: Arc<FieldSpec>, m: usize) -> Result<QuadSpace> {
        let n = 2 * m;
        let mut gram = Mat::zero(spec.clone(), n, n);
        for i in 0..m {
            gram.set(i, m + i, FieldElem::ONE);
            gram.set(m + i, i, spec.neg(FieldElem::ONE));
        }
        QuadSpace::symplectic(gram)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn kind(&self) -> FormKind {
        self.kind
    }
    pub fn gram(&self) -> &Mat {
        &self.gram
    }
    pub fn quad_values(&self) -> &[FieldElem] {
        &self.quad
    }
    pub fn witt_index(&self) -> usize {
        self.witt
    }

    /// The hyperbolic basis found by greedy pair extraction; its pair count
    /// is the Witt index.
    pub fn hyperbolic_basis(&self) -> &HyperbolicBasis {
        &self.hyperbolic
    }
    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }

    /// Bilinear form value (u, v).
    pub fn form(&self, u: &[FieldElem], v: &[FieldElem]) -> FieldElem {
        let f = &self.spec;
        let mut acc = FieldElem::ZERO;
        for i in 0..self.n {
            if u[i].is_zero() {
                continue;
            }
            let mut row = FieldElem::ZERO;
            for j in 0..self.n {
                if !v[j].is_zero() {
                    row = f.add(row, f.mul(self.gram[(i, j)], v[j]));
                }
            }
            acc = f.add(acc, f.mul(u[i], row));
        }
        acc
    }

    /// Quadratic form value Q(v) (orthogonal); for symplectic spaces this is
    /// identically zero, matching "every vector is singular".
    pub fn q_value(&self, v: &[FieldElem]) -> FieldElem {
        if self.kind == FormKind::Symplectic {
            return FieldElem::ZERO;
        }
        let f = &self.spec;
        let mut acc = FieldElem::ZERO;
        for i in 0..self.n {
            if v[i].is_zero() {
                continue;
            }
            acc = f.add(acc, f.mul(f.mul(v[i], v[i]), self.quad[i]));
            for j in i + 1..self.n {
                if !v[j].is_zero() {
                    acc = f.add(acc, f.mul(f.mul(v[i], v[j]), self.gram[(i, j)]));
                }
            }
        }
        acc
    }

    pub fn is_singular_vec(&self, v: &[FieldElem]) -> bool {
        match self.kind {
            FormKind::Symplectic => true,
            FormKind::Orthogonal => self.q_value(v).is_zero(),
        }
    }

    /// Totally singular test from the basis alone: Q vanishes on basis
    /// vectors and the form vanishes on basis pairs. (Q(u+v)-Q(u)-Q(v)=(u,v)
    /// extends this to the whole subspace in every characteristic.)
    pub fn is_totally_singular(&self, s: &Subspace) -> bool {
        assert_eq!(s.ambient_dim(), self.n, "ambient dimension mismatch");
        let k = s.dim();
        for i in 0..k {
            if !self.is_singular_vec(s.basis_row(i)) {
                return false;
            }
            for j in i + 1..k {
                if !self.form(s.basis_row(i), s.basis_row(j)).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Greedy hyperbolic-pair extraction. Searches low-support vectors first.
    fn extract_hyperbolic(&self) -> Result<(Vec<(Vec<FieldElem>, Vec<FieldElem>)>, Vec<Vec<FieldElem>>)> {
        let f = &self.spec;
        let n = self.n;
        // complement: rows spanning the current orthogonal complement
        let mut complement: Vec<Vec<FieldElem>> = (0..n)
            .map(|i| {
                let mut v = vec![FieldElem::ZERO; n];
                v[i] = FieldElem::ONE;
                v
            })
            .collect();
        let mut pairs: Vec<(Vec<FieldElem>, Vec<FieldElem>)> = vec![];
        loop {
            let d = complement.len();
            if d == 0 {
                break;
            }
            let Some(v) = self.find_singular_in_span(&complement)? else {
                break;
            };
            // partner with (v, w) != 0
            let w0 = complement
                .iter()
                .find(|w| !self.form(&v, w).is_zero())
                .cloned();
            let Some(w0) = w0 else {
                return domain("radical vector in supposedly nondegenerate space");
            };
            // normalize (v, w') = 1 then make w' singular: w'' = w' - Q(w')*v
            let c = f.inv(self.form(&v, &w0))?;
            let mut w: Vec<FieldElem> = w0.iter().map(|&x| f.mul(x, c)).collect();
            let qw = self.q_value(&w);
            if !qw.is_zero() {
                for i in 0..n {
                    w[i] = f.sub(w[i], f.mul(qw, v[i]));
                }
            }
            debug_assert!(self.q_value(&w).is_zero());
            debug_assert_eq!(self.form(&v, &w), FieldElem::ONE);
            // restrict complement to vectors orthogonal to v and w
            let mut next = vec![];
            // Gaussian elimination on the two linear conditions over the span
            let mut conds: Vec<Vec<FieldElem>> = vec![];
            for cond_vec in [&v, &w] {
                let row: Vec<FieldElem> = complement
                    .iter()
                    .map(|b| self.form(b, cond_vec))
                    .collect();
                conds.push(row);
            }
            let piv = crate::linalg::rref_rows(f, &mut conds);
            let mut coeff_basis: Vec<Vec<FieldElem>> = vec![];
            for free_col in 0..d {
                if piv.contains(&free_col) {
                    continue;
                }
                let mut coef = vec![FieldElem::ZERO; d];
                coef[free_col] = FieldElem::ONE;
                for (ci, &pc) in piv.iter().enumerate() {
                    coef[pc] = f.neg(conds[ci][free_col]);
                }
                coeff_basis.push(coef);
            }
            for coef in coeff_basis {
                let mut vec = vec![FieldElem::ZERO; n];
                for (bi, &c) in coef.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    for j in 0..n {
                        vec[j] = f.add(vec[j], f.mul(c, complement[bi][j]));
                    }
                }
                next.push(vec);
            }
            pairs.push((v, w));
            complement = next;
        }
        Ok((pairs, complement))
    }

    fn find_singular_in_span(&self, basis: &[Vec<FieldElem>]) -> Result<Option<Vec<FieldElem>>> {
        let f = &self.spec;
        let d = basis.len();
        let q = f.order() as u64;
        // cheap pass: single basis vectors, then pairs
        for b in basis {
            if self.q_value(b).is_zero() {
                return Ok(Some(b.clone()));
            }
        }
        for i in 0..d {
            for j in i + 1..d {
                for lam in f.elements().skip(1) {
                    let v: Vec<FieldElem> = (0..self.n)
                        .map(|t| f.add(basis[i][t], f.mul(lam, basis[j][t])))
                        .collect();
                    if self.q_value(&v).is_zero() {
                        return Ok(Some(v));
                    }
                }
            }
        }
        let total = q.checked_pow(d as u32);
        match total {
            Some(t) if t <= 1 << 24 => {}
            _ => {
                return domain(format!(
                    "singular-vector search space q^{d} too large for Witt-index extraction"
                ))
            }
        }
        let total = total.unwrap();
        for idx in 1..total {
            let mut rem = idx;
            let mut v = vec![FieldElem::ZERO; self.n];
            for b in basis {
                let c = f.elem((rem % q) as u32).unwrap();
                rem /= q;
                if c.is_zero() {
                    continue;
                }
                for t in 0..self.n {
                    v[t] = f.add(v[t], f.mul(c, b[t]));
                }
            }
            if self.q_value(&v).is_zero() {
                return Ok(Some(v));
            }
        }
        Ok(None)
    }

    /// Visit every totally singular k-subspace exactly once, in the canonical
    /// enumeration order, pruning as soon as a completed row fails the
    /// singular/orthogonality tests.
    pub fn for_each_ts_kspace(&self, k: usize, mut f: impl FnMut(&Subspace)) {
        if k == 0 || k > self.n {
            return;
        }
        let mut pivots: Vec<usize> = (0..k).collect();
        loop {
            let free = free_cells(self.n, &pivots);
            let mut rows: Vec<Vec<FieldElem>> = Vec::with_capacity(k);
            self.ts_rows_rec(k, &pivots, &free, &mut rows, &mut f);
            // advance pivot combination
            let n = self.n;
            let mut i = k;
            let advanced = loop {
                if i == 0 {
                    break false;
                }
                i -= 1;
                if pivots[i] < n - (k - i) {
                    pivots[i] += 1;
                    for j in i + 1..k {
                        pivots[j] = pivots[j - 1] + 1;
                    }
                    break true;
                }
            };
            if !advanced {
                break;
            }
        }
    }

    fn ts_rows_rec(
        &self,
        k: usize,
        pivots: &[usize],
        free: &[Vec<usize>],
        rows: &mut Vec<Vec<FieldElem>>,
        visit: &mut impl FnMut(&Subspace),
    ) {
        let r = rows.len();
        if r == k {
            let s = Subspace::from_rref_rows(self.spec.clone(), self.n, rows.clone(), pivots.to_vec());
            visit(&s);
            return;
        }
        let f = &self.spec;
        let q = f.order() as u64;
        let cells = &free[r];
        let combos = (q as u128).pow(cells.len() as u32);
        let mut row = vec![FieldElem::ZERO; self.n];
        row[pivots[r]] = FieldElem::ONE;
        let mut digits = vec![0u32; cells.len()];
        let mut first = true;
        loop {
            if !first {
                // odometer, last cell fastest
                let mut i = cells.len();
                let mut carried = true;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    if digits[i] + 1 < q as u32 {
                        digits[i] += 1;
                        for d in digits[i + 1..].iter_mut() {
                            *d = 0;
                        }
                        carried = false;
                        break;
                    }
                }
                if carried {
                    return;
                }
            }
            first = false;
            for (di, &c) in cells.iter().enumerate() {
                row[c] = FieldElem(digits[di] as u16);
            }
            if self.is_singular_vec(&row)
                && rows.iter().all(|prev| self.form(prev, &row).is_zero())
            {
                rows.push(row.clone());
                self.ts_rows_rec(k, pivots, free, rows, visit);
                rows.pop();
            }
            if combos == 1 {
                return;
            }
        }
    }

    /// Collects the totally singular k-subspaces (small spaces only).
    pub fn ts_kspaces(&self, k: usize) -> Vec<Subspace> {
        let mut out = vec![];
        self.for_each_ts_kspace(k, |s| out.push(s.clone()));
        out
    }
}

/// Gaussian binomial [m choose k]_q: the number of k-subspaces of GF(q)^m.
pub fn gaussian_binomial(m: u64, k: u64, q: u64) -> BigUint {
    if k > m {
        return BigUint::zero();
    }
    let q = BigUint::from(q);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= q.pow(m as u32) - q.pow(i as u32);
        den *= q.pow(k as u32) - q.pow(i as u32);
    }
    debug_assert!((&num % &den).is_zero());
    num / den
}

/// Exact count of totally singular k-spaces.
///
/// Symplectic (n = 2m): `prod_{i=0}^{k-1} (q^{2m-2i}-1)/(q^{i+1}-1)`.
/// Orthogonal with Witt index m: `[m choose k]_q * prod_{i=0}^{k-1} (q^{n-m-i-1}+1)`.
pub fn count_ts(kind: FormKind, n: u64, m: u64, k: u64, q: u64) -> Result<BigUint> {
    if q < 2 {
        return usage("q must be a prime power >= 2");
    }
    match kind {
        FormKind::Symplectic => {
            if n != 2 * m {
                return domain(format!("symplectic space needs n = 2m, got n={n}, m={m}"));
            }
            if k > m {
                return Ok(BigUint::zero());
            }
            let qb = BigUint::from(q);
            let mut num = BigUint::one();
            let mut den = BigUint::one();
            for i in 0..k {
                num *= qb.pow((2 * m - 2 * i) as u32) - 1u32;
                den *= qb.pow((i + 1) as u32) - 1u32;
            }
            if !(&num % &den).is_zero() {
                return Err(crate::error::Error::Internal("count_ts division".into()));
            }
            Ok(num / den)
        }
        FormKind::Orthogonal => {
            if !(2 * m <= n && n <= 2 * m + 2) {
                return domain(format!(
                    "orthogonal space of dimension {n} cannot have Witt index {m}"
                ));
            }
            if k > m {
                return Ok(BigUint::zero());
            }
            let qb = BigUint::from(q);
            let mut prod = gaussian_binomial(m, k, q);
            for i in 0..k {
                prod *= qb.pow((n - m - i - 1) as u32) + 1u32;
            }
            Ok(prod)
        }
    }
}

/// Dimension of the variety of totally singular k-spaces:
/// `kn + (k-3k^2)/2` symplectic, `kn - (k+3k^2)/2` orthogonal.
pub fn dim_ts_variety(kind: FormKind, n: i64, k: i64) -> i64 {
    match kind {
        FormKind::Symplectic => k * n + (k - 3 * k * k) / 2,
        FormKind::Orthogonal => k * n - (k + 3 * k * k) / 2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectedKind {
    Symmetric,
    Alternating,
}

/// Outcome of the invariant-form solve `g^T B g = B` over a generator set.
#[derive(Debug, Clone)]
pub enum FormDetection {
    None,
    Ambiguous { dim: usize },
    Found { kind: DetectedKind, gram: Mat },
}

/// Solves for bilinear forms invariant under every generator. The solution
/// space is computed exactly; a 1-dimensional space is normalized so its
/// first nonzero entry (row-major) is 1 and classified as symmetric or
/// alternating (zero diagonal wins in characteristic 2).
pub fn detect_invariant_form(generators: &[Mat]) -> Result<FormDetection> {
    if generators.is_empty() {
        return usage("need at least one generator");
    }
    let spec = generators[0].spec().clone();
    let n = generators[0].rows();
    for g in generators {
        if g.rows() != n || g.cols() != n {
            return usage("generators must share one dimension");
        }
        if **g.spec() != *spec {
            return usage("generators must share one field");
        }
        if !g.is_invertible() {
            return domain("generators must be invertible");
        }
    }
    let f = &spec;
    let nn = n * n;
    // solution basis, each a flattened B
    let mut basis: Vec<Vec<FieldElem>> = (0..nn)
        .map(|i| {
            let mut v = vec![FieldElem::ZERO; nn];
            v[i] = FieldElem::ONE;
            v
        })
        .collect();
    for g in generators {
        if basis.is_empty() {
            break;
        }
        // constraint on coefficients alpha: sum_m alpha_m (g^T B_m g - B_m) = 0
        let images: Vec<Vec<FieldElem>> = basis
            .iter()
            .map(|b| {
                let bm = Mat::from_fn(spec.clone(), n, n, |r, c| b[r * n + c]);
                let gt_b_g = g.transpose().mul(&bm).unwrap().mul(g).unwrap();
                let mut v = vec![FieldElem::ZERO; nn];
                for r in 0..n {
                    for c in 0..n {
                        v[r * n + c] = f.sub(gt_b_g[(r, c)], bm[(r, c)]);
                    }
                }
                v
            })
            .collect();
        // nullspace of the nn x d matrix whose columns are the images
        let d = basis.len();
        let mut rows: Vec<Vec<FieldElem>> = (0..nn)
            .map(|r| (0..d).map(|c| images[c][r]).collect())
            .collect();
        rows.retain(|r| r.iter().any(|x| !x.is_zero()));
        let piv = crate::linalg::rref_rows(f, &mut rows);
        let mut new_basis = vec![];
        for free_col in 0..d {
            if piv.contains(&free_col) {
                continue;
            }
            let mut coef = vec![FieldElem::ZERO; d];
            coef[free_col] = FieldElem::ONE;
            for (ri, &pc) in piv.iter().enumerate() {
                coef[pc] = f.neg(rows[ri][free_col]);
            }
            let mut b = vec![FieldElem::ZERO; nn];
            for (m, &c) in coef.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for t in 0..nn {
                    b[t] = f.add(b[t], f.mul(c, basis[m][t]));
                }
            }
            new_basis.push(b);
        }
        basis = new_basis;
    }
    match basis.len() {
        0 => Ok(FormDetection::None),
        1 => {
            let b = &basis[0];
            let lead = b.iter().find(|x| !x.is_zero()).copied().unwrap();
            let scale = f.inv(lead)?;
            let gram = Mat::from_fn(spec.clone(), n, n, |r, c| f.mul(b[r * n + c], scale));
            // verify invariance exactly
            for g in generators {
                let lhs = g.transpose().mul(&gram)?.mul(g)?;
                if lhs != gram {
                    return Err(crate::error::Error::Internal(
                        "solved form not invariant".into(),
                    ));
                }
            }
            let symmetric = (0..n).all(|r| (0..n).all(|c| gram[(r, c)] == gram[(c, r)]));
            let zero_diag = (0..n).all(|i| gram[(i, i)].is_zero());
            let skew = (0..n).all(|r| (0..n).all(|c| gram[(r, c)] == f.neg(gram[(c, r)])));
            let kind = if skew && zero_diag {
                DetectedKind::Alternating
            } else if symmetric {
                DetectedKind::Symmetric
            } else {
                return Err(crate::error::Error::Internal(
                    "1-dimensional solution neither symmetric nor alternating".into(),
                ));
            };
            Ok(FormDetection::Found { kind, gram })
        }
        dim => Ok(FormDetection::Ambiguous { dim }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    fn gf(q: u64) -> Arc<FieldSpec> {
        FieldSpec::for_order(q).unwrap()
    }

    #[test]
    fn count_symplectic_examples() {
        assert_eq!(
            count_ts(FormKind::Symplectic, 4, 2, 2, 5).unwrap(),
            BigUint::from(156u32)
        );
        // every vector is isotropic in Sp4(2): 15 lines
        assert_eq!(
            count_ts(FormKind::Symplectic, 4, 2, 1, 2).unwrap(),
            BigUint::from(15u32)
        );
    }

    #[test]
    fn count_orthogonal_examples() {
        assert_eq!(
            count_ts(FormKind::Orthogonal, 16, 8, 2, 2).unwrap(),
            BigUint::from(90_516_075u64)
        );
        assert_eq!(
            count_ts(FormKind::Orthogonal, 4, 2, 2, 3).unwrap(),
            BigUint::from(8u32)
        );
        assert_eq!(
            count_ts(FormKind::Orthogonal, 7, 3, 2, 3).unwrap(),
            BigUint::from(3640u32)
        );
    }

    #[test]
    fn count_rejects_inconsistent_shape() {
        assert!(count_ts(FormKind::Symplectic, 5, 2, 1, 3).is_err());
        assert!(count_ts(FormKind::Orthogonal, 9, 2, 1, 3).is_err());
    }

    #[test]
    fn dimension_formula_spot_values() {
        assert_eq!(dim_ts_variety(FormKind::Orthogonal, 14, 2), 21);
        assert_eq!(dim_ts_variety(FormKind::Orthogonal, 26, 2), 45);
        assert_eq!(dim_ts_variety(FormKind::Symplectic, 2, 1), 1);
    }

    #[test]
    fn hyperbolic_plane_basics() {
        let qs = QuadSpace::hyperbolic(gf(3), 2).unwrap();
        assert_eq!(qs.witt_index(), 2);
        let f = qs.spec().clone();
        let e1 = Subspace::from_int_rows(f.clone(), 4, &[vec![1, 0, 0, 0]]).unwrap();
        let span_e = Subspace::from_int_rows(f.clone(), 4, &[vec![1, 0, 0, 0], vec![0, 1, 0, 0]]).unwrap();
        let e1f1 = Subspace::from_int_rows(f, 4, &[vec![1, 0, 0, 0], vec![0, 0, 1, 0]]).unwrap();
        assert!(qs.is_totally_singular(&e1));
        assert!(qs.is_totally_singular(&span_e));
        assert!(!qs.is_totally_singular(&e1f1));
    }

    #[test]
    fn hyperbolic_basis_relations() {
        // (e_i, f_j) = delta_ij, everything singular, defect anisotropic
        for q in [2u64, 3] {
            for (n, m) in [(4usize, 2usize), (6, 2), (7, 3), (5, 2)] {
                let Some(space) = orthogonal_space(q, n, m) else { continue };
                let hb = space.hyperbolic_basis();
                assert_eq!(hb.pairs.len(), m);
                for (i, (e, f)) in hb.pairs.iter().enumerate() {
                    assert!(space.q_value(e).is_zero());
                    assert!(space.q_value(f).is_zero());
                    for (j, (e2, f2)) in hb.pairs.iter().enumerate() {
                        let d = if i == j { FieldElem::ONE } else { FieldElem::ZERO };
                        assert_eq!(space.form(e, f2), d);
                        assert_eq!(space.form(e, e2), FieldElem::ZERO);
                        assert_eq!(space.form(f, f2), FieldElem::ZERO);
                    }
                    for dvec in &hb.defect {
                        assert_eq!(space.form(e, dvec), FieldElem::ZERO);
                        assert_eq!(space.form(f, dvec), FieldElem::ZERO);
                    }
                }
                assert_eq!(hb.defect.len(), n - 2 * m);
            }
        }
    }

    #[test]
    fn o4_plus_gf3_has_eight_ts_planes() {
        let qs = QuadSpace::hyperbolic(gf(3), 2).unwrap();
        assert_eq!(qs.ts_kspaces(2).len(), 8);
    }

    fn aniso2(spec: &Arc<FieldSpec>) -> (Vec<Vec<FieldElem>>, Vec<FieldElem>) {
        // anisotropic 2-dim part: x^2+xy+y^2 (q=2), x^2+y^2 (q=3)
        let f = spec;
        if f.characteristic() == 2 {
            let gram = vec![
                vec![FieldElem::ZERO, FieldElem::ONE],
                vec![FieldElem::ONE, FieldElem::ZERO],
            ];
            (gram, vec![FieldElem::ONE, FieldElem::ONE])
        } else {
            let two = f.fe(2);
            (
                vec![vec![two, FieldElem::ZERO], vec![FieldElem::ZERO, two]],
                vec![FieldElem::ONE, FieldElem::ONE],
            )
        }
    }

    /// O(n) space of each Witt type buildable at this q, for the oracle test.
    fn orthogonal_space(q: u64, n: usize, m: usize) -> Option<QuadSpace> {
        let spec = gf(q);
        let defect = n - 2 * m;
        if defect == 1 && q % 2 == 0 {
            return None; // polar form degenerate in char 2
        }
        let mut gram = Mat::zero(spec.clone(), n, n);
        let mut quad = vec![FieldElem::ZERO; n];
        for i in 0..m {
            gram.set(i, m + i, FieldElem::ONE);
            gram.set(m + i, i, FieldElem::ONE);
        }
        match defect {
            0 => {}
            1 => {
                // single anisotropic vector with Q = 1
                let two = spec.fe(2);
                gram.set(n - 1, n - 1, two);
                quad[n - 1] = FieldElem::ONE;
            }
            2 => {
                let (g2, q2) = aniso2(&spec);
                for a in 0..2 {
                    for b in 0..2 {
                        gram.set(n - 2 + a, n - 2 + b, g2[a][b]);
                    }
                    quad[n - 2 + a] = q2[a];
                }
            }
            _ => return None,
        }
        Some(QuadSpace::orthogonal(gram, quad).unwrap())
    }

    #[test]
    fn brute_force_count_oracle_equivalence() {
        // count_ts vs streamed enumeration across all constructible spaces
        for q in [2u64, 3] {
            for n in 2..=8usize {
                for m in 1..=n / 2 {
                    for kind in [FormKind::Symplectic, FormKind::Orthogonal] {
                        let space = match kind {
                            FormKind::Symplectic => {
                                if n != 2 * m {
                                    continue;
                                }
                                Some(QuadSpace::symplectic_standard(gf(q), m).unwrap())
                            }
                            FormKind::Orthogonal => {
                                if n < 2 * m || n > 2 * m + 2 {
                                    continue;
                                }
                                orthogonal_space(q, n, m)
                            }
                        };
                        let Some(space) = space else { continue };
                        assert_eq!(space.witt_index(), m, "witt q={q} n={n} m={m} {kind:?}");
                        for k in 1..=3.min(m) {
                            let mut cnt = 0u64;
                            space.for_each_ts_kspace(k, |_| cnt += 1);
                            let expected =
                                count_ts(kind, n as u64, m as u64, k as u64, q).unwrap();
                            assert_eq!(
                                BigUint::from(cnt),
                                expected,
                                "q={q} n={n} m={m} k={k} {kind:?}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn totally_singular_iff_every_vector_singular() {
        for q in [2u64, 3] {
            let space = orthogonal_space(q, 6, 3).unwrap();
            let f = space.spec().clone();
            let mut checked = 0;
            for s in crate::linalg::enumerate_k_subspaces(6, 2, f).unwrap() {
                let by_basis = space.is_totally_singular(&s);
                let by_vectors = s.all_vectors().iter().all(|v| space.is_singular_vec(v));
                assert_eq!(by_basis, by_vectors);
                checked += 1;
            }
            assert!(checked > 100);
        }
    }

    #[test]
    fn ts_stream_agrees_with_filtered_enumeration() {
        let space = orthogonal_space(3, 5, 2).unwrap();
        let f = space.spec().clone();
        let filtered: Vec<_> = crate::linalg::enumerate_k_subspaces(5, 2, f)
            .unwrap()
            .filter(|s| space.is_totally_singular(s))
            .map(|s| s.packed_key())
            .collect();
        let streamed: Vec<_> = space.ts_kspaces(2).iter().map(|s| s.packed_key()).collect();
        assert_eq!(filtered, streamed, "same spaces in the same order");
    }

    #[test]
    fn degenerate_gram_rejected() {
        let spec = gf(3);
        let gram = Mat::zero(spec.clone(), 2, 2);
        assert!(QuadSpace::orthogonal(gram, vec![FieldElem::ZERO; 2]).is_err());
    }

    #[test]
    fn polarization_identity_exhaustive_small() {
        for q in [2u64, 3] {
            let space = orthogonal_space(q, 4, 1).unwrap();
            let f = space.spec().clone();
            let n = 4;
            let total = (q as u32).pow(n as u32);
            for a in 0..total.min(1 << 10) {
                for b in 0..total.min(1 << 10) {
                    let dec = |mut x: u32| {
                        let mut v = vec![FieldElem::ZERO; n];
                        for t in v.iter_mut() {
                            *t = f.elem(x % q as u32).unwrap();
                            x /= q as u32;
                        }
                        v
                    };
                    let u = dec(a);
                    let v = dec(b);
                    let sum: Vec<FieldElem> =
                        (0..n).map(|i| f.add(u[i], v[i])).collect();
                    let lhs = f.sub(
                        f.sub(space.q_value(&sum), space.q_value(&u)),
                        space.q_value(&v),
                    );
                    assert_eq!(lhs, space.form(&u, &v));
                }
            }
        }
    }
}
