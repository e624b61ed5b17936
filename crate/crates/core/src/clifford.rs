//! Clifford algebra of a 10-dimensional hyperbolic quadratic space over
//! GF(q), the 16-dimensional half-spin module, spinor purity classification,
//! and the spin apparatus for the rank-4 restriction.
//!
//! Basis conventions: the ambient space V10 has basis e_1..e_5, f_1..f_5
//! stored at indices 1..10 (so e_{5+i} = f_i), with Q(e_i) = 0 and
//! (e_i, e_j) = 1 iff |i - j| = 5. Algebra monomials are sorted products of
//! generators, stored as 10-bit masks; multiplication normal-orders with
//! uv + vu = (u, v) and v^2 = Q(v). The half-spin module is C_L∩C+ with
//! basis e_S for the even subsets S of {1..5}: one subset of degree 0, ten
//! of degree 2, five of degree 4, in lexicographic order within each degree.
//! On that module e_i acts as a creation operator and f_i as contraction.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::casemods::CaseModule;
use crate::error::{domain, usage, Error, Result};
use crate::gf::{FieldElem, FieldSpec};
use crate::lietype::{Family, GroupSpec};
use crate::linalg::{Mat, Subspace};
use crate::quadspace::{detect_invariant_form, DetectedKind, FormDetection, QuadSpace};

pub const V10_DIM: usize = 10;
pub const SPINOR_DIM: usize = 16;

/// Spinor basis subsets as 5-bit masks (bit i-1 for index i), ordered by
/// degree then lexicographically: {}, {1,2}, {1,3}, ..., {4,5}, {1,2,3,4},
/// ..., {2,3,4,5}.
pub const SPINOR_BASIS: [u16; 16] = [
    0b00000, 0b00011, 0b00101, 0b01001, 0b10001, 0b00110, 0b01010, 0b10010, 0b01100, 0b10100,
    0b11000, 0b01111, 0b10111, 0b11011, 0b11101, 0b11110,
];

/// Index of a 5-bit subset mask in `SPINOR_BASIS`, or None for odd subsets.
pub fn spinor_index(mask: u16) -> Option<usize> {
    SPINOR_BASIS.iter().position(|&m| m == mask)
}

/// Sparse element of the Clifford algebra C(V10, Q): sorted index subsets
/// (10-bit masks) with nonzero coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct CliffordElem {
    terms: BTreeMap<u16, FieldElem>,
    spec: Arc<FieldSpec>,
}

impl std::fmt::Debug for CliffordElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&m, &c)| {
                let gens: Vec<String> = (0..10)
                    .filter(|b| m >> b & 1 == 1)
                    .map(|b| {
                        if b < 5 {
                            format!("e{}", b + 1)
                        } else {
                            format!("f{}", b - 4)
                        }
                    })
                    .collect();
                if gens.is_empty() {
                    self.spec.fmt_elem(c)
                } else if c == FieldElem::ONE {
                    gens.join("")
                } else {
                    format!("{}*{}", self.spec.fmt_elem(c), gens.join(""))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// (e_a, e_b) for basis indices as bit positions 0..9.
fn pairing(a: u8, b: u8) -> bool {
    a.abs_diff(b) == 5
}

impl CliffordElem {
    pub fn zero(spec: Arc<FieldSpec>) -> CliffordElem {
        CliffordElem {
            terms: BTreeMap::new(),
            spec,
        }
    }

    pub fn one(spec: Arc<FieldSpec>) -> CliffordElem {
        Self::monomial(spec, 0, FieldElem::ONE)
    }

    /// Basis generator e_i (i in 1..=10; 6..=10 are the f's).
    pub fn generator(spec: Arc<FieldSpec>, i: usize) -> CliffordElem {
        assert!((1..=10).contains(&i));
        Self::monomial(spec, 1 << (i - 1), FieldElem::ONE)
    }

    /// Sorted monomial e_S with the given coefficient.
    pub fn monomial(spec: Arc<FieldSpec>, mask: u16, c: FieldElem) -> CliffordElem {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(mask, c);
        }
        CliffordElem { terms, spec }
    }

    pub fn from_terms(spec: Arc<FieldSpec>, list: &[(u16, FieldElem)]) -> CliffordElem {
        let mut out = Self::zero(spec);
        for &(m, c) in list {
            out.add_term(m, c);
        }
        out
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }

    pub fn terms(&self) -> impl Iterator<Item = (u16, FieldElem)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn coeff(&self, mask: u16) -> FieldElem {
        self.terms.get(&mask).copied().unwrap_or(FieldElem::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, mask: u16, c: FieldElem) {
        if c.is_zero() {
            return;
        }
        let f = self.spec.clone();
        let e = self.terms.entry(mask).or_insert(FieldElem::ZERO);
        *e = f.add(*e, c);
        if e.is_zero() {
            self.terms.remove(&mask);
        }
    }

    pub fn add(&self, other: &CliffordElem) -> CliffordElem {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m, c);
        }
        out
    }

    pub fn scale(&self, s: FieldElem) -> CliffordElem {
        let f = &self.spec;
        let mut out = Self::zero(self.spec.clone());
        for (m, c) in self.terms() {
            out.add_term(m, f.mul(c, s));
        }
        out
    }

    /// Multiply a sorted monomial by one generator on the right,
    /// normal-ordering with e_h e_g = -e_g e_h + (e_h, e_g) and e_g^2 = 0.
    fn push_generator(spec: &FieldSpec, out: &mut Vec<(u16, FieldElem)>, mask: u16, c: FieldElem, g: u8) {
        let above = mask >> (g + 1);
        if above == 0 {
            // g is largest: either contracts with nothing or squares to zero
            if mask >> g & 1 == 0 {
                out.push((mask | 1 << g, c));
            }
            return;
        }
        let h = 15 - (mask as u16).leading_zeros() as u8; // highest set bit
        let rest = mask & !(1 << h);
        if pairing(h, g) {
            // contraction term: e_rest * (e_h e_g) -> e_rest * 1
            out.push((rest, c));
        }
        // reorder term: -(e_rest e_g) e_h
        let mut inner = vec![];
        Self::push_generator(spec, &mut inner, rest, spec.neg(c), g);
        for (m, cc) in inner {
            debug_assert!(m >> h & 1 == 0);
            out.push((m | 1 << h, cc));
        }
    }

    pub fn mul(&self, other: &CliffordElem) -> CliffordElem {
        assert_eq!(*self.spec, *other.spec, "mismatched field specs");
        let f = &self.spec;
        let mut out = Self::zero(self.spec.clone());
        for (ma, ca) in self.terms() {
            for (mb, cb) in other.terms() {
                // multiply e_ma by the generators of mb in ascending order
                let mut current: Vec<(u16, FieldElem)> = vec![(ma, f.mul(ca, cb))];
                for g in 0..10u8 {
                    if mb >> g & 1 == 0 {
                        continue;
                    }
                    let mut next = vec![];
                    for &(m, c) in &current {
                        Self::push_generator(f, &mut next, m, c, g);
                    }
                    current = next;
                }
                for (m, c) in current {
                    out.add_term(m, c);
                }
            }
        }
        out
    }

    /// The reversal anti-automorphism (products written backwards, then
    /// normal-ordered; paired indices contract, so this is not just a sign).
    pub fn reverse(&self) -> CliffordElem {
        let f = &self.spec;
        let mut out = Self::zero(self.spec.clone());
        for (m, c) in self.terms() {
            let mut current: Vec<(u16, FieldElem)> = vec![(0, c)];
            for g in (0..10u8).rev() {
                if m >> g & 1 == 0 {
                    continue;
                }
                let mut next = vec![];
                for &(mask, coef) in &current {
                    Self::push_generator(f, &mut next, mask, coef, g);
                }
                current = next;
            }
            for (mask, coef) in current {
                out.add_term(mask, coef);
            }
        }
        out
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 0)
    }
}

pub fn clifford_mul(a: &CliffordElem, b: &CliffordElem) -> CliffordElem {
    a.mul(b)
}

/// A half-spin vector: 16 coefficients over the even subsets of {1..5}.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Spinor {
    pub coords: [FieldElem; SPINOR_DIM],
}

impl Spinor {
    pub fn zero() -> Spinor {
        Spinor {
            coords: [FieldElem::ZERO; SPINOR_DIM],
        }
    }

    pub fn unit(idx: usize) -> Spinor {
        let mut s = Spinor::zero();
        s.coords[idx] = FieldElem::ONE;
        s
    }

    pub fn from_terms(list: &[(u16, FieldElem)]) -> Spinor {
        let mut s = Spinor::zero();
        for &(mask, c) in list {
            s.coords[spinor_index(mask).expect("even subset")] = c;
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// Coefficients of the degree-d homogeneous component.
    pub fn component(&self, d: u32) -> impl Iterator<Item = (u16, FieldElem)> + '_ {
        SPINOR_BASIS
            .iter()
            .enumerate()
            .filter(move |(_, m)| m.count_ones() == d)
            .map(|(i, &m)| (m, self.coords[i]))
            .filter(|(_, c)| !c.is_zero())
    }

    pub fn to_vec(&self) -> Vec<FieldElem> {
        self.coords.to_vec()
    }

    pub fn from_slice(v: &[FieldElem]) -> Spinor {
        let mut s = Spinor::zero();
        s.coords.copy_from_slice(v);
        s
    }
}

/// Applies one algebra generator to a C_L vector in the Fock model:
/// creation for e_i (i <= 5), contraction for f_i. Input/output are dense
/// coefficient maps over all 32 subsets of {1..5}.
fn apply_generator(spec: &FieldSpec, gen_bit: u8, x: &[FieldElem; 32], out: &mut [FieldElem; 32]) {
    out.fill(FieldElem::ZERO);
    if gen_bit < 5 {
        let i = gen_bit;
        for (mask, &c) in x.iter().enumerate() {
            if c.is_zero() || mask >> i & 1 == 1 {
                continue;
            }
            let below = (mask & ((1usize << i) - 1)).count_ones();
            let t = mask | 1 << i;
            out[t] = if below % 2 == 1 { spec.neg(c) } else { c };
        }
    } else {
        let i = gen_bit - 5;
        for (mask, &c) in x.iter().enumerate() {
            if c.is_zero() || mask >> i & 1 == 0 {
                continue;
            }
            let below = (mask & ((1usize << i) - 1)).count_ones();
            let t = mask & !(1 << i);
            out[t] = if below % 2 == 1 { spec.neg(c) } else { c };
        }
    }
}

fn apply_monomial(spec: &FieldSpec, mono: u16, x: &[FieldElem; 32]) -> [FieldElem; 32] {
    // e_S = e_{s1}...e_{sm} ascending acts right-to-left
    let mut cur = *x;
    let mut tmp = [FieldElem::ZERO; 32];
    for g in (0..10u8).rev() {
        if mono >> g & 1 == 1 {
            apply_generator(spec, g, &cur, &mut tmp);
            std::mem::swap(&mut cur, &mut tmp);
        }
    }
    cur
}

/// The half-spin action: the unique y in C_L with s·x·e_M = y·e_M. Errors if
/// the result leaves the even part (which signals s outside the even
/// Clifford group).
pub fn spin_action(s: &CliffordElem, x: &Spinor) -> Result<Spinor> {
    let spec = s.spec();
    let mut dense = [FieldElem::ZERO; 32];
    for (i, &c) in x.coords.iter().enumerate() {
        dense[SPINOR_BASIS[i] as usize] = c;
    }
    let mut acc = [FieldElem::ZERO; 32];
    for (mono, c) in s.terms() {
        let img = apply_monomial(spec, mono, &dense);
        for (m, v) in img.into_iter().enumerate() {
            if !v.is_zero() {
                acc[m] = spec.add(acc[m], spec.mul(v, c));
            }
        }
    }
    let mut out = Spinor::zero();
    for (m, &v) in acc.iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        match spinor_index(m as u16) {
            Some(i) => out.coords[i] = v,
            None => {
                return Err(Error::Internal(
                    "spin action left the even part; element is not in the even Clifford group"
                        .into(),
                ))
            }
        }
    }
    Ok(out)
}

/// 16x16 matrix of the half-spin action of s (columns are images).
pub fn spin_matrix(s: &CliffordElem) -> Result<Mat> {
    let spec = s.spec().clone();
    let mut m = Mat::zero(spec, SPINOR_DIM, SPINOR_DIM);
    for j in 0..SPINOR_DIM {
        let img = spin_action(s, &Spinor::unit(j))?;
        for (i, &c) in img.coords.iter().enumerate() {
            m.set(i, j, c);
        }
    }
    Ok(m)
}

/// The hyperbolic quadratic space (V10, Q): pairs (e_i, f_i).
pub fn v10_quadspace(spec: Arc<FieldSpec>) -> QuadSpace {
    QuadSpace::hyperbolic(spec, 5).expect("standard hyperbolic space")
}

/// Eichler/Siegel map of 1 + t·e_i e_j on V10 for singular orthogonal basis
/// vectors e_i, e_j: v -> v + t(v, e_j)e_i - t(v, e_i)e_j.
pub fn vector_rep(spec: Arc<FieldSpec>, i: usize, j: usize, t: FieldElem) -> Result<Mat> {
    if !(1..=10).contains(&i) || !(1..=10).contains(&j) || i == j {
        return usage("vector_rep needs two distinct indices in 1..=10");
    }
    if i.abs_diff(j) == 5 {
        return domain("vector_rep requires an orthogonal (non-paired) index pair");
    }
    let f = spec.clone();
    let mut u1 = vec![FieldElem::ZERO; V10_DIM];
    u1[i - 1] = FieldElem::ONE;
    let mut u2 = vec![FieldElem::ZERO; V10_DIM];
    u2[j - 1] = FieldElem::ONE;
    Ok(eichler_map(&f, &u1, &u2, t, FieldElem::ZERO))
}

/// General conjugation action of 1 + t·u·w on V10, for Q(u) = 0, (u, w) = 0:
/// v -> v + t(v,w)u - t(u,v)w - t^2 (u,v) Q(w) u.
pub(crate) fn eichler_map(
    spec: &Arc<FieldSpec>,
    u: &[FieldElem],
    w: &[FieldElem],
    t: FieldElem,
    q_w: FieldElem,
) -> Mat {
    let f = spec.clone();
    let qs = v10_quadspace(spec.clone());
    debug_assert!(qs.q_value(u).is_zero());
    debug_assert!(qs.form(u, w).is_zero());
    debug_assert_eq!(qs.q_value(w), q_w);
    Mat::from_fn(f.clone(), V10_DIM, V10_DIM, |r, c| {
        let mut basis = vec![FieldElem::ZERO; V10_DIM];
        basis[c] = FieldElem::ONE;
        let vw = qs.form(&basis, w);
        let uv = qs.form(u, &basis);
        let mut val = if r == c { FieldElem::ONE } else { FieldElem::ZERO };
        val = f.add(val, f.mul(f.mul(t, vw), u[r]));
        val = f.sub(val, f.mul(f.mul(t, uv), w[r]));
        let t2 = f.mul(t, t);
        val = f.sub(val, f.mul(f.mul(f.mul(t2, uv), q_w), u[r]));
        val
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinorClass {
    /// the orbit of the spinor 1 (pure spinors)
    White,
    /// the other orbit, with representative 1 + e1e2e3e4
    Grey,
}

impl SpinorClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpinorClass::White => "white",
            SpinorClass::Grey => "grey",
        }
    }
}

/// Classifies a nonzero spinor by the three-step reduction:
/// 1. make the degree-0 part nonzero by acting with 1 + f_i f_j (two stages
///    when both the degree-0 and degree-2 parts vanish), picking the
///    lexicographically first usable index pair;
/// 2. scale to x^(0) = 1 and clear the degree-2 part with
///    prod (1 - a_{ij} e_i e_j);
/// 3. White iff the result has degree 0.
pub fn classify_spinor(spec: &Arc<FieldSpec>, x: &Spinor) -> Result<SpinorClass> {
    if x.is_zero() {
        return domain("cannot classify the zero spinor");
    }
    let f = spec;
    let mut x = x.clone();
    let hit = |x: &Spinor, mask: u16| -> Result<Spinor> {
        // act with 1 + f_i f_j for {i,j} = mask (i < j): e_{i+5} e_{j+5}
        let i = mask.trailing_zeros() as u16;
        let j = 15 - mask.leading_zeros() as u16;
        let s = CliffordElem::from_terms(
            spec.clone(),
            &[(0, FieldElem::ONE), (1 << (i + 5) | 1 << (j + 5), FieldElem::ONE)],
        );
        spin_action(&s, x)
    };
    if x.coords[0].is_zero() {
        let deg2: Vec<(u16, FieldElem)> = x.component(2).collect();
        if let Some(&(m, _)) = deg2.first() {
            x = hit(&x, m)?;
        } else {
            let deg4: Vec<(u16, FieldElem)> = x.component(4).collect();
            let Some(&(m4, _)) = deg4.first() else {
                return Err(Error::Internal("nonzero spinor with no component".into()));
            };
            // knock the 4-part down to degree 2 using its two lowest indices
            let lo = m4 & m4.wrapping_neg();
            let rest = m4 & !lo;
            let lo2 = rest & rest.wrapping_neg();
            x = hit(&x, lo | lo2)?;
            let deg2: Vec<(u16, FieldElem)> = x.component(2).collect();
            let Some(&(m, _)) = deg2.first() else {
                return Err(Error::Internal("degree-2 part did not appear".into()));
            };
            x = hit(&x, m)?;
        }
    }
    let x0 = x.coords[0];
    if x0.is_zero() {
        return Err(Error::Internal("degree-0 part still zero".into()));
    }
    let x = {
        let inv = f.inv(x0)?;
        Spinor::from_slice(&x.to_vec().iter().map(|&c| f.mul(c, inv)).collect::<Vec<_>>())
    };
    let mut y = x.clone();
    for (m, a) in x.component(2) {
        let s = CliffordElem::from_terms(
            spec.clone(),
            &[(0, FieldElem::ONE), (m, f.neg(a))],
        );
        y = spin_action(&s, &y)?;
    }
    debug_assert!(y.component(2).next().is_none());
    if y.component(4).next().is_none() {
        Ok(SpinorClass::White)
    } else {
        Ok(SpinorClass::Grey)
    }
}

/// Spin matrices of all one-parameter root elements x_{i,j}(t) = 1 + t e_i e_j
/// of the full rank-5 group, t over a GF(p)-basis.
pub fn d5_spin_generators(spec: &Arc<FieldSpec>) -> Result<Vec<Mat>> {
    let mut gens = vec![];
    for i in 1..=10usize {
        for j in i + 1..=10 {
            if j - i == 5 {
                continue;
            }
            for &t in &spec.power_basis() {
                let s = CliffordElem::from_terms(
                    spec.clone(),
                    &[(0, FieldElem::ONE), (1 << (i - 1) | 1 << (j - 1), t)],
                );
                gens.push(spin_matrix(&s)?);
            }
        }
    }
    Ok(gens)
}

/// Clifford elements (not matrices) of the root elements, for algebra-level
/// cross-checks.
pub fn d5_root_element(spec: &Arc<FieldSpec>, i: usize, j: usize, t: FieldElem) -> CliffordElem {
    CliffordElem::from_terms(
        spec.clone(),
        &[(0, FieldElem::ONE), (1 << (i - 1) | 1 << (j - 1), t)],
    )
}

/// Spin matrices of elements of the full group that move e4 + f4 (used to
/// hop between finite suborbits inside one algebraic orbit): the root
/// elements with exactly one index in {4, 9}.
pub fn d5_escape_generators(spec: &Arc<FieldSpec>) -> Result<Vec<Mat>> {
    let mut gens = vec![];
    let others = [1usize, 2, 3, 5, 6, 7, 8, 10];
    for &a in &[4usize, 9] {
        for &i in &others {
            if i.abs_diff(a) == 5 {
                continue;
            }
            let (lo, hi) = (i.min(a), i.max(a));
            let s = CliffordElem::from_terms(
                spec.clone(),
                &[(0, FieldElem::ONE), (1 << (lo - 1) | 1 << (hi - 1), FieldElem::ONE)],
            );
            gens.push(spin_matrix(&s)?);
        }
    }
    Ok(gens)
}

/// The declared hyperbolic pairs of the spin form: (1, e1e2e3e5), complement
/// pairs of 2-subsets of {1,2,3,5}, and (e_i e_4, complement·e_4).
fn spin_form_pairs() -> Vec<(usize, usize)> {
    let full: u16 = 0b10111; // {1,2,3,5}
    let mut pairs = vec![(spinor_index(0).unwrap(), spinor_index(full).unwrap())];
    let two_subsets: Vec<u16> = (0..5)
        .flat_map(|a| (a + 1..5).map(move |b| (1u16 << a) | (1 << b)))
        .filter(|m| m & 0b01000 == 0)
        .collect();
    let mut seen = std::collections::HashSet::new();
    for &m in &two_subsets {
        let c = full & !m;
        if seen.contains(&m) || seen.contains(&c) {
            continue;
        }
        seen.insert(m);
        seen.insert(c);
        pairs.push((spinor_index(m).unwrap(), spinor_index(c).unwrap()));
    }
    for i in [0u16, 1, 2, 4] {
        let a = (1 << i) | 0b01000;
        let b = (full & !(1 << i)) | 0b01000;
        pairs.push((spinor_index(a).unwrap(), spinor_index(b).unwrap()));
    }
    pairs
}

/// The 16-dimensional spin module as a case module: the subgroup of the
/// rank-5 spin group fixing e4 + f4, acting on half-spinors, together with
/// its invariant quadratic space.
///
/// Generators: (a) all x_{i,j}(t) = 1 + t e_i e_j with both indices avoiding
/// {4, 9}; (b) the mixed elements 1 + t·u·(e4 - f4) for u over the eight
/// basis vectors orthogonal to e4 + f4 with index outside {4, 9}. (At p = 2
/// e4 - f4 = e4 + f4; in odd characteristic the difference is what fixes
/// e4 + f4.) The spinor form is the all-ones pairing on the declared
/// hyperbolic pairs when that is invariant, and otherwise the solved
/// invariant form normalized at the (1, e1e2e3e5) entry; either way generator
/// invariance is verified exactly.
pub fn spin16_module(q: u64) -> Result<CaseModule> {
    let spec = FieldSpec::for_order(q)?;
    let f = spec.clone();
    let basis_t = f.power_basis();
    let mut generators = vec![];
    let allowed = [1usize, 2, 3, 5, 6, 7, 8, 10];
    // (a) root elements avoiding the pair (4, 9)
    for (ai, &i) in allowed.iter().enumerate() {
        for &j in &allowed[ai + 1..] {
            if j.abs_diff(i) == 5 {
                continue;
            }
            for &t in &basis_t {
                let s = d5_root_element(&spec, i, j, t);
                generators.push(spin_matrix(&s)?);
            }
        }
    }
    // (b) mixed elements 1 + t u e4 - t u f4
    for &u in &allowed {
        for &t in &basis_t {
            let ue4: u16 = 1 << (u - 1) | 1 << 3;
            let uf4: u16 = 1 << (u - 1) | 1 << 8;
            // u e_j as a sorted monomial carries a sign when u > j
            let s_e4 = if u < 4 { t } else { f.neg(t) };
            let s_f4 = if u < 9 { t } else { f.neg(t) };
            let s = CliffordElem::from_terms(
                spec.clone(),
                &[
                    (0, FieldElem::ONE),
                    (ue4, s_e4),
                    (uf4, f.neg(s_f4)),
                ],
            );
            generators.push(spin_matrix(&s)?);
        }
    }

    // spin form: all-ones pairing if invariant, else the solved form
    let pairs = spin_form_pairs();
    let mut gram = Mat::zero(spec.clone(), SPINOR_DIM, SPINOR_DIM);
    for &(a, b) in &pairs {
        gram.set(a, b, FieldElem::ONE);
        gram.set(b, a, FieldElem::ONE);
    }
    let invariant = generators.iter().all(|g| {
        g.transpose()
            .mul(&gram)
            .and_then(|m| Ok(m.mul(g)? == gram))
            .unwrap_or(false)
    });
    if !invariant {
        match detect_invariant_form(&generators)? {
            FormDetection::Found {
                kind: DetectedKind::Symmetric,
                gram: solved,
            } => {
                let (a0, b0) = pairs[0];
                let c = solved[(a0, b0)];
                if c.is_zero() {
                    return Err(Error::Internal("spin form misses the (1, e1e2e3e5) pair".into()));
                }
                let scale = f.inv(c)?;
                let solved = solved.scale(scale);
                // support must be exactly the declared pairs
                for r in 0..SPINOR_DIM {
                    for cidx in 0..SPINOR_DIM {
                        let declared = pairs
                            .iter()
                            .any(|&(a, b)| (a, b) == (r, cidx) || (b, a) == (r, cidx));
                        if solved[(r, cidx)].is_zero() == declared {
                            return Err(Error::Internal(
                                "spin form support differs from the declared pairs".into(),
                            ));
                        }
                    }
                }
                gram = solved;
            }
            other => {
                return Err(Error::Internal(format!(
                    "unexpected invariant-form solve for the spin module: {other:?}"
                )))
            }
        }
    }
    let space = QuadSpace::orthogonal(gram, vec![FieldElem::ZERO; SPINOR_DIM])?;
    let center_kernel_order = if q % 2 == 0 { 1 } else { 2 };
    CaseModule::assemble(
        "spin16",
        spec,
        generators,
        space,
        vec![GroupSpec::new(Family::B, 4)],
        center_kernel_order,
    )
}

/// Subspace of the spin module spanned by spinors given as term lists.
pub fn spinor_span(spec: &Arc<FieldSpec>, spinors: &[Spinor]) -> Result<Subspace> {
    let rows: Vec<Vec<FieldElem>> = spinors.iter().map(|s| s.to_vec()).collect();
    Subspace::canonicalize(spec.clone(), SPINOR_DIM, &rows)
}

/// The bundled orbit representatives of the spin apparatus: the six
/// 2-spaces representing the rank-5 group's orbits, and the full rank-4
/// restriction rows with their stabilizer descriptors. Construction
/// verifies that every representative is totally singular for the spin
/// form.
pub struct SpinTables {
    /// (orbit number, representative) of the ambient group's orbits
    pub d5_reps: Vec<(u32, Subspace)>,
    /// the fixed-vector subgroup's rows (with stabilizer descriptors)
    pub b4_rows: crate::lietype::OrbitTable,
}

pub fn spin_tables(module: &CaseModule) -> Result<SpinTables> {
    if module.name != "spin16" {
        return usage("spin_tables expects the spin16 module");
    }
    let table = crate::lietype::bundled_table("b4")?;
    let mut d5_reps = vec![];
    let mut seen = std::collections::HashSet::new();
    for row in &table.rows {
        let (Some(d5), Some(rep)) = (row.d5_orbit, &row.rep) else {
            continue;
        };
        if !seen.insert(d5) {
            continue;
        }
        let s = module.subspace(rep)?;
        if !module.space.is_totally_singular(&s) {
            return Err(Error::Internal(format!(
                "bundled representative of orbit {d5} is not totally singular"
            )));
        }
        d5_reps.push((d5, s));
    }
    Ok(SpinTables {
        d5_reps,
        b4_rows: table,
    })
}

/// Number of white points (1-spaces of pure spinors) in a 2-space of the
/// spin module. A class function of the full rank-5 group, so it separates
/// its orbits on 2-spaces.
pub fn white_point_count(spec: &Arc<FieldSpec>, s: &Subspace) -> Result<usize> {
    if s.ambient_dim() != SPINOR_DIM || s.dim() != 2 {
        return usage("white_point_count expects a 2-space of the spin module");
    }
    let f = spec;
    let u = s.basis_row(0).to_vec();
    let v = s.basis_row(1).to_vec();
    let mut count = 0;
    let mut points: Vec<Vec<FieldElem>> = vec![v.clone()];
    for lam in f.elements() {
        let w: Vec<FieldElem> = (0..SPINOR_DIM)
            .map(|i| f.add(u[i], f.mul(lam, v[i])))
            .collect();
        points.push(w);
    }
    for p in points {
        if classify_spinor(spec, &Spinor::from_slice(&p))? == SpinorClass::White {
            count += 1;
        }
    }
    Ok(count)
}
