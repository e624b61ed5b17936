//! Constructs each explicit module as a set of generator matrices over GF(q)
//! plus its invariant quadratic space, exposing a uniform [`CaseModule`] to
//! the orbit engine.
//!
//! Generating sets follow one rule: standard Chevalley-style root elements
//! with the parameter ranging over a GF(p)-basis of GF(q) (plus a torus
//! generator where convenient). That is enough to generate the finite
//! group's image, which is all the orbit machinery needs.

use std::sync::Arc;

use crate::error::{domain, usage, Result};
use crate::gf::{prime_power, FieldElem, FieldSpec};
use crate::lietype::{Family, GroupSpec};
use crate::linalg::{Mat, Subspace};
use crate::quadspace::{detect_invariant_form, DetectedKind, FormDetection, QuadSpace};

/// A finite matrix group together with the quadratic space it preserves.
#[derive(Clone)]
pub struct CaseModule {
    pub name: String,
    pub dim: usize,
    pub spec: Arc<FieldSpec>,
    pub generators: Vec<Mat>,
    pub space: QuadSpace,
    pub group: Vec<GroupSpec>,
    /// order of the scalar part of the image acting trivially on subspaces
    pub center_kernel_order: u64,
}

impl std::fmt::Debug for CaseModule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "CaseModule {} dim={} gens={} over {:?}",
            self.name,
            self.dim,
            self.generators.len(),
            self.spec
        )
    }
}

impl CaseModule {
    /// Validates and assembles a case: every generator must be invertible
    /// and preserve both the bilinear form and the quadratic form (checked
    /// exhaustively on basis vectors and basis pairs, which pins Q∘g = Q).
    pub(crate) fn assemble(
        name: &str,
        spec: Arc<FieldSpec>,
        generators: Vec<Mat>,
        space: QuadSpace,
        group: Vec<GroupSpec>,
        center_kernel_order: u64,
    ) -> Result<CaseModule> {
        let n = space.n();
        let f = &spec;
        for (gi, g) in generators.iter().enumerate() {
            if g.rows() != n || g.cols() != n {
                return usage(format!("{name}: generator {gi} has wrong shape"));
            }
            if !g.is_invertible() {
                return domain(format!("{name}: generator {gi} is singular"));
            }
            // g^T B g = B
            let gt_b_g = g.transpose().mul(space.gram())?.mul(g)?;
            if gt_b_g != *space.gram() {
                return domain(format!("{name}: generator {gi} moves the bilinear form"));
            }
            // Q(g b_i) = Q(b_i) and Q(g(b_i + b_j)) = Q(b_i + b_j)
            let cols: Vec<Vec<FieldElem>> = (0..n)
                .map(|c| {
                    let mut v = vec![FieldElem::ZERO; n];
                    v[c] = FieldElem::ONE;
                    g.mul_vec(&v).unwrap()
                })
                .collect();
            for i in 0..n {
                let mut bi = vec![FieldElem::ZERO; n];
                bi[i] = FieldElem::ONE;
                if space.q_value(&cols[i]) != space.q_value(&bi) {
                    return domain(format!("{name}: generator {gi} moves Q on basis {i}"));
                }
                for j in i + 1..n {
                    let sum: Vec<FieldElem> =
                        (0..n).map(|t| f.add(cols[i][t], cols[j][t])).collect();
                    let mut bij = vec![FieldElem::ZERO; n];
                    bij[i] = FieldElem::ONE;
                    bij[j] = FieldElem::ONE;
                    if space.q_value(&sum) != space.q_value(&bij) {
                        return domain(format!(
                            "{name}: generator {gi} moves Q on basis pair ({i},{j})"
                        ));
                    }
                }
            }
        }
        Ok(CaseModule {
            name: name.to_string(),
            dim: n,
            spec,
            generators,
            space,
            group,
            center_kernel_order,
        })
    }

    /// Subspace from integer coordinate rows in this module.
    pub fn subspace(&self, rows: &[Vec<i64>]) -> Result<Subspace> {
        Subspace::from_int_rows(self.spec.clone(), self.dim, rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseName {
    A1Twisted,
    A1Sym3,
    A1Sym4,
    A2Adjoint,
    C3Lambda2,
    A1Cubed,
    Spin16,
}

impl CaseName {
    pub const ALL: [CaseName; 7] = [
        CaseName::A1Twisted,
        CaseName::A1Sym3,
        CaseName::A1Sym4,
        CaseName::A2Adjoint,
        CaseName::C3Lambda2,
        CaseName::A1Cubed,
        CaseName::Spin16,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CaseName::A1Twisted => "a1-twisted",
            CaseName::A1Sym3 => "a1-sym3",
            CaseName::A1Sym4 => "a1-sym4",
            CaseName::A2Adjoint => "a2-adjoint",
            CaseName::C3Lambda2 => "c3-lambda2",
            CaseName::A1Cubed => "a1cubed",
            CaseName::Spin16 => "spin16",
        }
    }

    pub fn parse(s: &str) -> Result<CaseName> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| {
                crate::error::Error::Usage(format!(
                    "unknown case '{s}' (have: {})",
                    Self::ALL.map(|c| c.as_str()).join(", ")
                ))
            })
    }
}

/// Builds the named case at the given field size, enforcing each case's
/// characteristic constraint.
pub fn build_case(name: CaseName, q: u64) -> Result<CaseModule> {
    match name {
        CaseName::A1Twisted => a1_twisted(q),
        CaseName::A1Sym3 => a1_sym(3, q),
        CaseName::A1Sym4 => a1_sym(4, q),
        CaseName::A2Adjoint => a2_adjoint(q),
        CaseName::C3Lambda2 => c3_lambda2(q),
        CaseName::A1Cubed => a1cubed_v8(q),
        CaseName::Spin16 => crate::clifford::spin16_module(q),
    }
}

fn require_char(q: u64, p: u16, what: &str) -> Result<(Arc<FieldSpec>, u32)> {
    let (pp, e) = prime_power(q)?;
    if pp != p {
        return usage(format!("{what} needs q a power of {p}, got {q}"));
    }
    Ok((FieldSpec::for_order(q)?, e))
}

/// sl2 generators x(t) = [[1,t],[0,1]], y(t) = [[1,0],[t,1]] for t over a
/// GF(p)-basis, plus the torus element diag(g, 1/g).
fn sl2_generators(spec: &Arc<FieldSpec>) -> Vec<Mat> {
    let f = spec;
    let mut gens = vec![];
    for &t in &f.power_basis() {
        gens.push(Mat::from_fn(spec.clone(), 2, 2, |r, c| match (r, c) {
            (0, 0) | (1, 1) => FieldElem::ONE,
            (0, 1) => t,
            _ => FieldElem::ZERO,
        }));
        gens.push(Mat::from_fn(spec.clone(), 2, 2, |r, c| match (r, c) {
            (0, 0) | (1, 1) => FieldElem::ONE,
            (1, 0) => t,
            _ => FieldElem::ZERO,
        }));
    }
    if f.order() > 3 {
        let g = f.primitive();
        let ginv = f.inv(g).unwrap();
        gens.push(Mat::from_fn(spec.clone(), 2, 2, |r, c| match (r, c) {
            (0, 0) => g,
            (1, 1) => ginv,
            _ => FieldElem::ZERO,
        }));
    }
    gens
}

/// The 4-dimensional twisted tensor module: 2x2 matrices with the action
/// v -> g^T v g^phi (phi the p-power Frobenius) and Q(v) = det v.
/// Coordinates (v11, v12, v21, v22).
pub fn a1_twisted(q: u64) -> Result<CaseModule> {
    let (spec, _) = require_char(q, 3, "a1-twisted")?;
    let f = spec.clone();
    let rep = |g: &Mat| -> Result<Mat> {
        // column j of the 4x4 matrix = coordinates of g^T E_j g^phi
        let mut out = Mat::zero(spec.clone(), 4, 4);
        for (j, (a, b)) in [(0usize, 0usize), (0, 1), (1, 0), (1, 1)].iter().enumerate() {
            // g^T E_ab g^phi has (r,c) entry g[a][r] * frob(g[b][c])
            for (i, (r, c)) in [(0usize, 0usize), (0, 1), (1, 0), (1, 1)].iter().enumerate() {
                let val = f.mul(g[(*a, *r)], f.frobenius(g[(*b, *c)], 1));
                out.set(i, j, val);
            }
        }
        Ok(out)
    };
    let generators: Result<Vec<Mat>> = sl2_generators(&spec).iter().map(rep).collect();
    // Gram of the polarization of det: (E11, E22) = 1, (E12, E21) = -1
    let mut gram = Mat::zero(spec.clone(), 4, 4);
    gram.set(0, 3, FieldElem::ONE);
    gram.set(3, 0, FieldElem::ONE);
    gram.set(1, 2, f.fe(-1));
    gram.set(2, 1, f.fe(-1));
    let space = QuadSpace::orthogonal(gram, vec![FieldElem::ZERO; 4])?;
    CaseModule::assemble(
        "a1-twisted",
        spec,
        generators?,
        space,
        vec![GroupSpec::new(Family::A, 1)],
        2,
    )
}

/// Symmetric-power modules of sl2 on binary forms: basis
/// e^n, e^(n-1)f, ..., f^n. Requires characteristic >= 5; n in {3, 4}.
/// The invariant form comes out of the solver: alternating for n = 3,
/// symmetric for n = 4.
pub fn a1_sym(n: usize, q: u64) -> Result<CaseModule> {
    if !(n == 3 || n == 4) {
        return usage("a1-sym supports n = 3 or 4");
    }
    let (p, _) = prime_power(q)?;
    if p < 5 {
        return usage(format!("a1-sym{n} needs characteristic >= 5, got q={q}"));
    }
    let spec = FieldSpec::for_order(q)?;
    let f = spec.clone();
    let dim = n + 1;
    let binom = |n: usize, k: usize| -> u64 {
        let mut r = 1u64;
        for i in 0..k {
            r = r * (n - i) as u64 / (i + 1) as u64;
        }
        r
    };
    let rep = |g: &Mat| -> Mat {
        // e -> a e + c f, f -> b e + d f; column i = image of e^(n-i) f^i
        let (a, b, c, d) = (g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]);
        let mut out = Mat::zero(spec.clone(), dim, dim);
        for i in 0..dim {
            // (a e + c f)^(n-i) (b e + d f)^i
            for s in 0..=(n - i) {
                for t in 0..=i {
                    let e_deg = s + t;
                    let coeff_int = binom(n - i, s) * binom(i, t);
                    let mut coef = f.fe(coeff_int as i64);
                    coef = f.mul(coef, f.pow(a, s as u64));
                    coef = f.mul(coef, f.pow(c, (n - i - s) as u64));
                    coef = f.mul(coef, f.pow(b, t as u64));
                    coef = f.mul(coef, f.pow(d, (i - t) as u64));
                    let row = n - e_deg; // basis index with e-degree e_deg
                    out.set(row, i, f.add(out[(row, i)], coef));
                }
            }
        }
        out
    };
    let generators: Vec<Mat> = sl2_generators(&spec).iter().map(rep).collect();
    let space = match detect_invariant_form(&generators)? {
        FormDetection::Found { kind, gram } => match kind {
            DetectedKind::Alternating => QuadSpace::symplectic(gram)?,
            DetectedKind::Symmetric => QuadSpace::orthogonal_from_gram(gram)?,
        },
        other => {
            return Err(crate::error::Error::Internal(format!(
                "a1-sym{n}: invariant form detection gave {other:?}"
            )))
        }
    };
    CaseModule::assemble(
        &format!("a1-sym{n}"),
        spec,
        generators,
        space,
        vec![GroupSpec::new(Family::A, 1)],
        2,
    )
}

/// The 7-dimensional module of sl3 in characteristic 3: trace-zero 3x3
/// matrices modulo scalars, conjugation action. Basis order
/// (e_a1, e_a2, e_a3, e_-a1, e_-a2, e_-a3, h_a1) realized as
/// (E12, E23, E13, E21, E32, E31, diag(1,-1,0)).
pub fn a2_adjoint(q: u64) -> Result<CaseModule> {
    let (spec, _) = require_char(q, 3, "a2-adjoint")?;
    let f = spec.clone();
    let lifts: [[[i64; 3]; 3]; 7] = [
        [[0, 1, 0], [0, 0, 0], [0, 0, 0]],
        [[0, 0, 0], [0, 0, 1], [0, 0, 0]],
        [[0, 0, 1], [0, 0, 0], [0, 0, 0]],
        [[0, 0, 0], [1, 0, 0], [0, 0, 0]],
        [[0, 0, 0], [0, 0, 0], [0, 1, 0]],
        [[0, 0, 0], [0, 0, 0], [1, 0, 0]],
        [[1, 0, 0], [0, -1, 0], [0, 0, 0]],
    ];
    let lift_mats: Vec<Mat> = lifts
        .iter()
        .map(|rows| {
            Mat::from_int_rows(spec.clone(), &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
                .unwrap()
        })
        .collect();
    let project = |x: &Mat| -> Vec<FieldElem> {
        // coords: off-diagonals direct; h-coefficient = d0 - d2 (valid mod
        // the scalar line since trace = 0 in char 3)
        vec![
            x[(0, 1)],
            x[(1, 2)],
            x[(0, 2)],
            x[(1, 0)],
            x[(2, 1)],
            x[(2, 0)],
            f.sub(x[(0, 0)], x[(2, 2)]),
        ]
    };
    let rep = |g: &Mat| -> Result<Mat> {
        let ginv = g.inverse()?;
        let mut out = Mat::zero(spec.clone(), 7, 7);
        for (j, m) in lift_mats.iter().enumerate() {
            let img = g.mul(m)?.mul(&ginv)?;
            for (i, c) in project(&img).into_iter().enumerate() {
                out.set(i, j, c);
            }
        }
        Ok(out)
    };
    let mut sl3_gens: Vec<Mat> = vec![];
    for &t in &f.power_basis() {
        for (r, c) in [(0usize, 1usize), (1, 0), (1, 2), (2, 1)] {
            let mut m = Mat::identity(spec.clone(), 3);
            m.set(r, c, t);
            sl3_gens.push(m);
        }
    }
    if f.order() > 3 {
        let g = f.primitive();
        let gi = f.inv(g).unwrap();
        for diag in [[g, gi, FieldElem::ONE], [FieldElem::ONE, g, gi]] {
            let mut m = Mat::zero(spec.clone(), 3, 3);
            for (i, &d) in diag.iter().enumerate() {
                m.set(i, i, d);
            }
            sl3_gens.push(m);
        }
    }
    let generators: Result<Vec<Mat>> = sl3_gens.iter().map(rep).collect();
    // (e_ai, e_aj) = 1 iff |i-j| = 3; (h, h) = -1
    let mut gram = Mat::zero(spec.clone(), 7, 7);
    for i in 0..3 {
        gram.set(i, i + 3, FieldElem::ONE);
        gram.set(i + 3, i, FieldElem::ONE);
    }
    gram.set(6, 6, f.fe(-1));
    let space = QuadSpace::orthogonal_from_gram(gram)?;
    CaseModule::assemble(
        "a2-adjoint",
        spec,
        generators?,
        space,
        vec![GroupSpec::new(Family::A, 2)],
        1,
    )
}

/// The printed 7x7 matrices of the root elements and torus, for
/// cross-validation against the conjugation model.
#[rustfmt::skip]
pub fn a2_printed_matrix(spec: &Arc<FieldSpec>, which: &str, t: FieldElem) -> Result<Mat> {
    let f = spec;
    let t2 = f.mul(t, t);
    let nt = f.neg(t);
    let nt2 = f.neg(t2);
    let o = FieldElem::ONE;
    let z = FieldElem::ZERO;
    let rows: [[FieldElem; 7]; 7] = match which {
        "x_a1" => [
            [o, z, z, nt2, z, z, t],
            [z, o, z, z, z, z, z],
            [z, t, o, z, z, z, z],
            [z, z, z, o, z, z, z],
            [z, z, z, z, o, nt, z],
            [z, z, z, z, z, o, z],
            [z, z, z, t, z, z, o],
        ],
        "x_a2" => [
            [o, z, z, z, z, z, z],
            [z, o, z, z, nt2, z, t],
            [nt, z, o, z, z, z, z],
            [z, z, z, o, z, t, z],
            [z, z, z, z, o, z, z],
            [z, z, z, z, z, o, z],
            [z, z, z, z, t, z, o],
        ],
        "x_a3" => [
            [o, z, z, z, t, z, z],
            [z, o, z, nt, z, z, z],
            [z, z, o, z, z, nt2, nt],
            [z, z, z, o, z, z, z],
            [z, z, z, z, o, z, z],
            [z, z, z, z, z, o, z],
            [z, z, z, z, z, nt, o],
        ],
        "x_ma1" => [
            [o, z, z, z, z, z, z],
            [z, o, t, z, z, z, z],
            [z, z, o, z, z, z, z],
            [nt2, z, z, o, z, z, nt],
            [z, z, z, z, o, z, z],
            [z, z, z, z, nt, o, z],
            [nt, z, z, z, z, z, o],
        ],
        "x_ma2" => [
            [o, z, nt, z, z, z, z],
            [z, o, z, z, z, z, z],
            [z, z, o, z, z, z, z],
            [z, z, z, o, z, z, z],
            [z, nt2, z, z, o, z, nt],
            [z, z, z, t, z, o, z],
            [z, nt, z, z, z, z, o],
        ],
        "x_ma3" => [
            [o, z, z, z, z, z, z],
            [z, o, z, z, z, z, z],
            [z, z, o, z, z, z, z],
            [z, nt, z, o, z, z, z],
            [t, z, z, z, o, z, z],
            [z, z, nt2, z, z, o, t],
            [z, z, t, z, z, z, o],
        ],
        "h_a1" => {
            let k = t;
            let k2 = f.mul(k, k);
            let ki = f.inv(k)?;
            let ki2 = f.mul(ki, ki);
            let d = [k2, ki, k, ki2, k, ki, o];
            let mut rows = [[z; 7]; 7];
            for i in 0..7 { rows[i][i] = d[i]; }
            rows
        }
        "h_a2" => {
            let k = t;
            let k2 = f.mul(k, k);
            let ki = f.inv(k)?;
            let ki2 = f.mul(ki, ki);
            let d = [ki, k2, k, k, ki2, ki, o];
            let mut rows = [[z; 7]; 7];
            for i in 0..7 { rows[i][i] = d[i]; }
            rows
        }
        _ => return usage(format!("unknown printed matrix '{which}'")),
    };
    Ok(Mat::from_fn(spec.clone(), 7, 7, |r, c| rows[r][c]))
}

/// The conjugation-model matrix of a root element or torus element in the
/// 7-dimensional module, for comparison with the printed form.
pub fn a2_model_matrix(spec: &Arc<FieldSpec>, which: &str, t: FieldElem) -> Result<Mat> {
    let f = spec;
    let mut g = Mat::identity(spec.clone(), 3);
    match which {
        "x_a1" => g.set(0, 1, t),
        "x_a2" => g.set(1, 2, t),
        "x_a3" => g.set(0, 2, t),
        "x_ma1" => g.set(1, 0, t),
        "x_ma2" => g.set(2, 1, t),
        "x_ma3" => g.set(2, 0, t),
        "h_a1" => {
            g.set(0, 0, t);
            g.set(1, 1, f.inv(t)?);
        }
        "h_a2" => {
            g.set(1, 1, t);
            g.set(2, 2, f.inv(t)?);
        }
        _ => return usage(format!("unknown element '{which}'")),
    }
    // reuse the projection from a2_adjoint by rebuilding the small pieces
    let lifts: [[[i64; 3]; 3]; 7] = [
        [[0, 1, 0], [0, 0, 0], [0, 0, 0]],
        [[0, 0, 0], [0, 0, 1], [0, 0, 0]],
        [[0, 0, 1], [0, 0, 0], [0, 0, 0]],
        [[0, 0, 0], [1, 0, 0], [0, 0, 0]],
        [[0, 0, 0], [0, 0, 0], [0, 1, 0]],
        [[0, 0, 0], [0, 0, 0], [1, 0, 0]],
        [[1, 0, 0], [0, -1, 0], [0, 0, 0]],
    ];
    let ginv = g.inverse()?;
    let mut out = Mat::zero(spec.clone(), 7, 7);
    for (j, rows) in lifts.iter().enumerate() {
        let m =
            Mat::from_int_rows(spec.clone(), &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())?;
        let img = g.mul(&m)?.mul(&ginv)?;
        let coords = [
            img[(0, 1)],
            img[(1, 2)],
            img[(0, 2)],
            img[(1, 0)],
            img[(2, 1)],
            img[(2, 0)],
            f.sub(img[(0, 0)], img[(2, 2)]),
        ];
        for (i, c) in coords.into_iter().enumerate() {
            out.set(i, j, c);
        }
    }
    Ok(out)
}

/// Structure constants N_ij for the ordered roots a1..a6
/// (a4 = -a1, a5 = -a2, a6 = -a3), matching the fixed sign choice.
pub const A2_STRUCTURE_CONSTANTS: [[i64; 6]; 6] = [
    [0, 1, 0, 0, 0, -1],
    [-1, 0, 0, 0, 0, 1],
    [0, 0, 0, -1, 1, 0],
    [0, 0, 1, 0, -1, 0],
    [0, 0, -1, 1, 0, 0],
    [1, -1, 0, 0, 0, 0],
];

/// The 13-dimensional wedge-square module of sp6 in characteristic 3.
///
/// The natural 6-space has ordered basis (e1, e2, e3, f3, f2, f1) with
/// hyperbolic pairs (e_i, f_i). The 13 basis vectors are the listed wedges
/// v1..v13 (v7 = e1^f1 - e2^f2) modulo the invariant vector
/// z = e1^f1 + e2^f2 + e3^f3, and
/// Q(sum a_i v_i) = sum_{i=1..7} a_i a_{14-i}.
pub fn c3_lambda2(q: u64) -> Result<CaseModule> {
    let (spec, _) = require_char(q, 3, "c3-lambda2")?;
    let f = spec.clone();
    // V6 index layout: 0..5 = e1,e2,e3,f3,f2,f1
    const E1: usize = 0;
    const E2: usize = 1;
    const E3: usize = 2;
    const F3: usize = 3;
    const F2: usize = 4;
    const F1: usize = 5;
    // v-basis as wedge pairs (a, b) with sign: v = sign * x_a ^ x_b (a < b)
    let v_basis: [(usize, usize, i64); 13] = [
        (E1, E2, 1),
        (E1, E3, 1),
        (E2, E3, 1),
        (E1, F3, 1),
        (E2, F3, 1),
        (E1, F2, 1),
        (E1, F1, 1), // v7 diagonal part handled separately
        (E2, F1, 1),
        (E3, F2, 1),
        (E3, F1, 1),
        (F3, F2, -1), // f2 ^ f3
        (F3, F1, -1), // f1 ^ f3
        (F2, F1, -1), // f1 ^ f2
    ];
    let pair_index = |a: usize, b: usize| -> usize {
        // index into a 15-long wedge coordinate vector, pairs (a<b) lex
        debug_assert!(a < b);
        let mut idx = 0;
        for x in 0..6 {
            for y in x + 1..6 {
                if (x, y) == (a, b) {
                    return idx;
                }
                idx += 1;
            }
        }
        unreachable!()
    };
    let diag = [
        pair_index(E1, F1),
        pair_index(E2, F2),
        pair_index(E3, F3),
    ];
    // lift of v_i into wedge coordinates
    let lift = |i: usize| -> Vec<FieldElem> {
        let mut w = vec![FieldElem::ZERO; 15];
        if i == 6 {
            // v7 = e1^f1 - e2^f2
            w[diag[0]] = FieldElem::ONE;
            w[diag[1]] = f.fe(-1);
        } else {
            let (a, b, s) = v_basis[i];
            w[pair_index(a, b)] = f.fe(s);
        }
        w
    };
    // project a wedge vector in V14 back to v-coordinates mod z
    let project = |w: &[FieldElem]| -> Result<Vec<FieldElem>> {
        let mut out = vec![FieldElem::ZERO; 13];
        for (i, &(a, b, s)) in v_basis.iter().enumerate() {
            if i == 6 {
                continue;
            }
            out[i] = f.mul(w[pair_index(a, b)], f.fe(s));
        }
        let d0 = w[diag[0]];
        let d1 = w[diag[1]];
        let d2 = w[diag[2]];
        // d = c*(1,-1,0) + lambda*(1,1,1): c = d0 - d2, consistency needs
        // d0 + d1 + d2 = 0 (mod 3), i.e. membership in V14
        if !f.add(f.add(d0, d1), d2).is_zero() {
            return Err(crate::error::Error::Internal(
                "image left the 14-dimensional submodule".into(),
            ));
        }
        out[6] = f.sub(d0, d2);
        Ok(out)
    };
    // Sp6 root elements on V6 (column convention), t over a GF(p)-basis
    let mut sp6_gens: Vec<Mat> = vec![];
    for &t in &f.power_basis() {
        let nt = f.neg(t);
        let data: [&[(usize, usize, FieldElem)]; 6] = [
            &[(E1, E2, t), (F2, F1, nt)], // x_a1: e2 -> e2 + t e1, f1 -> f1 - t f2
            &[(E2, E3, t), (F3, F2, nt)], // x_a2
            &[(E3, F3, t)],               // x_a3 (long)
            &[(E2, E1, t), (F1, F2, nt)], // x_-a1
            &[(E3, E2, t), (F2, F3, nt)], // x_-a2
            &[(F3, E3, t)],               // x_-a3
        ];
        for entries in data {
            let mut m = Mat::identity(spec.clone(), 6);
            for &(r, c, v) in entries.iter() {
                m.set(r, c, v);
            }
            sp6_gens.push(m);
        }
    }
    // wedge-square action, restricted and projected
    let wedge_rep = |g: &Mat| -> Result<Mat> {
        let wedge_of = |u: &[FieldElem], v: &[FieldElem]| -> Vec<FieldElem> {
            let mut w = vec![FieldElem::ZERO; 15];
            let mut idx = 0;
            for x in 0..6 {
                for y in x + 1..6 {
                    w[idx] = f.sub(f.mul(u[x], v[y]), f.mul(u[y], v[x]));
                    idx += 1;
                }
            }
            w
        };
        let act_wedge = |w: &[FieldElem]| -> Result<Vec<FieldElem>> {
            let mut out = vec![FieldElem::ZERO; 15];
            let mut idx = 0;
            for x in 0..6 {
                for y in x + 1..6 {
                    if !w[idx].is_zero() {
                        let mut u = vec![FieldElem::ZERO; 6];
                        u[x] = FieldElem::ONE;
                        let mut v = vec![FieldElem::ZERO; 6];
                        v[y] = FieldElem::ONE;
                        let gu = g.mul_vec(&u)?;
                        let gv = g.mul_vec(&v)?;
                        let img = wedge_of(&gu, &gv);
                        for t in 0..15 {
                            out[t] = f.add(out[t], f.mul(w[idx], img[t]));
                        }
                    }
                    idx += 1;
                }
            }
            Ok(out)
        };
        // invariant-vector check before quotienting
        let mut z = vec![FieldElem::ZERO; 15];
        z[diag[0]] = FieldElem::ONE;
        z[diag[1]] = FieldElem::ONE;
        z[diag[2]] = FieldElem::ONE;
        if act_wedge(&z)? != z {
            return Err(crate::error::Error::Internal(
                "generator does not fix the invariant wedge vector".into(),
            ));
        }
        let mut out = Mat::zero(spec.clone(), 13, 13);
        for j in 0..13 {
            let img = act_wedge(&lift(j))?;
            for (i, c) in project(&img)?.into_iter().enumerate() {
                out.set(i, j, c);
            }
        }
        Ok(out)
    };
    let generators: Result<Vec<Mat>> = sp6_gens.iter().map(wedge_rep).collect();
    // Q(sum a_i v_i) = sum_{i=1..7} a_i a_{14-i}
    let mut gram = Mat::zero(spec.clone(), 13, 13);
    for i in 0..6 {
        gram.set(i, 12 - i, FieldElem::ONE);
        gram.set(12 - i, i, FieldElem::ONE);
    }
    gram.set(6, 6, f.fe(2));
    let mut quad = vec![FieldElem::ZERO; 13];
    quad[6] = FieldElem::ONE;
    let space = QuadSpace::orthogonal(gram, quad)?;
    CaseModule::assemble(
        "c3-lambda2",
        spec,
        generators?,
        space,
        vec![GroupSpec::new(Family::C, 3)],
        2,
    )
}

/// The 8-dimensional triple tensor module of three copies of sl2 in
/// characteristic 2, basis in lexicographic order, with
/// Q(sum a_i v_i) = sum_{i=1..4} a_i a_{9-i}.
pub fn a1cubed_v8(q: u64) -> Result<CaseModule> {
    let (spec, _) = require_char(q, 2, "a1cubed")?;
    let f = spec.clone();
    let sl2 = sl2_generators(&spec);
    let mut generators = vec![];
    for slot in 0..3 {
        for g in &sl2 {
            // g in the given tensor slot, identity elsewhere
            let m = Mat::from_fn(spec.clone(), 8, 8, |r, c| {
                let (rb, cb) = (
                    [(r >> 2) & 1, (r >> 1) & 1, r & 1],
                    [(c >> 2) & 1, (c >> 1) & 1, c & 1],
                );
                let mut val = FieldElem::ONE;
                for s in 0..3 {
                    let factor = if s == slot {
                        g[(rb[s], cb[s])]
                    } else if rb[s] == cb[s] {
                        FieldElem::ONE
                    } else {
                        FieldElem::ZERO
                    };
                    val = f.mul(val, factor);
                }
                val
            });
            generators.push(m);
        }
    }
    let mut gram = Mat::zero(spec.clone(), 8, 8);
    for i in 0..4 {
        gram.set(i, 7 - i, FieldElem::ONE);
        gram.set(7 - i, i, FieldElem::ONE);
    }
    let space = QuadSpace::orthogonal(gram, vec![FieldElem::ZERO; 8])?;
    CaseModule::assemble(
        "a1cubed",
        spec,
        generators,
        space,
        vec![
            GroupSpec::new(Family::A, 1),
            GroupSpec::new(Family::A, 1),
            GroupSpec::new(Family::A, 1),
        ],
        1,
    )
}

/// The one-parameter family of totally singular 2-spaces in the triple
/// tensor module: W2(theta) = < v1+v2+v3+v4+v6+v7,
/// theta v1 + (theta+1) v2 + theta v3 + v5 > for theta outside {0, 1}.
pub fn w2_theta(module: &CaseModule, theta: FieldElem) -> Result<Subspace> {
    if module.name != "a1cubed" {
        return usage("w2_theta belongs to the a1cubed module");
    }
    let f = &module.spec;
    if theta.is_zero() || theta == FieldElem::ONE {
        return domain("theta must avoid 0 and 1");
    }
    let mut u1 = vec![FieldElem::ZERO; 8];
    for i in [0usize, 1, 2, 3, 5, 6] {
        u1[i] = FieldElem::ONE;
    }
    let mut u2 = vec![FieldElem::ZERO; 8];
    u2[0] = theta;
    u2[1] = f.add(theta, FieldElem::ONE);
    u2[2] = theta;
    u2[4] = FieldElem::ONE;
    Subspace::canonicalize(module.spec.clone(), 8, &[u1, u2])
}

/// The three-parameter upper unipotent subgroup of the triple tensor case:
/// the module matrix of (x(alpha), x(beta), x(gamma)).
pub fn a1cubed_unipotent(
    module: &CaseModule,
    alpha: FieldElem,
    beta: FieldElem,
    gamma: FieldElem,
) -> Result<Mat> {
    if module.name != "a1cubed" {
        return usage("a1cubed_unipotent belongs to the a1cubed module");
    }
    let spec = module.spec.clone();
    let f = &module.spec;
    let params = [alpha, beta, gamma];
    let m = Mat::from_fn(spec, 8, 8, |r, c| {
        let rb = [(r >> 2) & 1, (r >> 1) & 1, r & 1];
        let cb = [(c >> 2) & 1, (c >> 1) & 1, c & 1];
        let mut val = FieldElem::ONE;
        for s in 0..3 {
            // x(t) = [[1, t], [0, 1]] entries
            let factor = match (rb[s], cb[s]) {
                (0, 0) | (1, 1) => FieldElem::ONE,
                (0, 1) => params[s],
                (1, 0) => FieldElem::ZERO,
                _ => unreachable!(),
            };
            val = f.mul(val, factor);
        }
        val
    });
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::act;

    #[test]
    fn a1_twisted_q_values() {
        let m = a1_twisted(3).unwrap();
        // Q(identity 2x2 matrix) = det I = 1
        let f = &m.spec;
        let id = [f.fe(1), f.fe(0), f.fe(0), f.fe(1)];
        assert_eq!(m.space.q_value(&id), f.fe(1));
        // Q(E12) = 0
        let e12 = [f.fe(0), f.fe(1), f.fe(0), f.fe(0)];
        assert!(m.space.q_value(&e12).is_zero());
        assert_eq!(m.space.witt_index(), 2);
    }

    #[test]
    fn a1_twisted_q9_builds_and_preserves() {
        // constructor-level validation covers preservation exactly
        let m = a1_twisted(9).unwrap();
        // 2 basis elements x {x(t), y(t)} + torus
        assert_eq!(m.generators.len(), 5);
    }

    #[test]
    fn a1_twisted_rejects_wrong_characteristic() {
        assert!(a1_twisted(4).is_err());
        assert!(a1_twisted(5).is_err());
    }

    #[test]
    fn a1_sym_form_kinds() {
        use crate::quadspace::FormKind;
        let m3 = a1_sym(3, 5).unwrap();
        assert_eq!(m3.space.kind(), FormKind::Symplectic);
        let m4 = a1_sym(4, 5).unwrap();
        assert_eq!(m4.space.kind(), FormKind::Orthogonal);
        assert!(a1_sym(3, 9).is_err());
        assert!(a1_sym(3, 4).is_err());
    }

    #[test]
    fn a1_sym3_unipotent_fixes_highest_weight() {
        // x(t) fixes e^3 (the first basis vector)
        let m = a1_sym(3, 5).unwrap();
        let f = &m.spec;
        // x(1)-image generator is the first in the list
        let x1 = &m.generators[0];
        let mut e3 = vec![FieldElem::ZERO; 4];
        e3[0] = FieldElem::ONE;
        assert_eq!(x1.mul_vec(&e3).unwrap(), e3);
        let _ = f;
    }

    #[test]
    fn a2_model_matches_printed_matrices() {
        for q in [3u64, 9] {
            let spec = FieldSpec::for_order(q).unwrap();
            for which in ["x_a1", "x_a2", "x_a3", "x_ma1", "x_ma2", "x_ma3"] {
                for t in spec.elements() {
                    let printed = a2_printed_matrix(&spec, which, t).unwrap();
                    let model = a2_model_matrix(&spec, which, t).unwrap();
                    assert_eq!(printed, model, "{which} at t={} q={q}", t.0);
                }
            }
            for which in ["h_a1", "h_a2"] {
                for t in spec.elements().skip(1) {
                    let printed = a2_printed_matrix(&spec, which, t).unwrap();
                    let model = a2_model_matrix(&spec, which, t).unwrap();
                    assert_eq!(printed, model, "{which} at k={} q={q}", t.0);
                }
            }
        }
    }

    #[test]
    fn a2_root_action_examples() {
        let spec = FieldSpec::for_order(3).unwrap();
        let t = spec.fe(1);
        let x = a2_model_matrix(&spec, "x_a1", t).unwrap();
        // x_a1(t) e_a2 = e_a2 + t e_a3
        let mut ea2 = vec![FieldElem::ZERO; 7];
        ea2[1] = FieldElem::ONE;
        let img = x.mul_vec(&ea2).unwrap();
        let mut expected = ea2.clone();
        expected[2] = t;
        assert_eq!(img, expected);
        // x_a1(t) h = h + t e_a1
        let mut h = vec![FieldElem::ZERO; 7];
        h[6] = FieldElem::ONE;
        let img = x.mul_vec(&h).unwrap();
        let mut expected = h.clone();
        expected[0] = t;
        assert_eq!(img, expected);
    }

    #[test]
    fn a2_structure_constants_match() {
        // [m_i, m_j] = N_ij m_(i+j) whenever a_i + a_j is a root
        let spec = FieldSpec::for_order(3).unwrap();
        let f = &spec;
        let lifts: [[[i64; 3]; 3]; 6] = [
            [[0, 1, 0], [0, 0, 0], [0, 0, 0]],
            [[0, 0, 0], [0, 0, 1], [0, 0, 0]],
            [[0, 0, 1], [0, 0, 0], [0, 0, 0]],
            [[0, 0, 0], [1, 0, 0], [0, 0, 0]],
            [[0, 0, 0], [0, 0, 0], [0, 1, 0]],
            [[0, 0, 0], [0, 0, 0], [1, 0, 0]],
        ];
        // root vectors as (coeff of a1, coeff of a2)
        let roots: [(i64, i64); 6] = [(1, 0), (0, 1), (1, 1), (-1, 0), (0, -1), (-1, -1)];
        let mats: Vec<Mat> = lifts
            .iter()
            .map(|r| {
                Mat::from_int_rows(spec.clone(), &r.iter().map(|x| x.to_vec()).collect::<Vec<_>>())
                    .unwrap()
            })
            .collect();
        for i in 0..6 {
            for j in 0..6 {
                let sum = (roots[i].0 + roots[j].0, roots[i].1 + roots[j].1);
                let Some(k) = roots.iter().position(|&r| r == sum) else {
                    continue;
                };
                let bracket = mats[i]
                    .mul(&mats[j])
                    .unwrap()
                    .add(&mats[j].mul(&mats[i]).unwrap().scale(f.fe(-1)))
                    .unwrap();
                let expected = mats[k].scale(f.fe(A2_STRUCTURE_CONSTANTS[i][j]));
                assert_eq!(bracket, expected, "N_{}{}", i + 1, j + 1);
            }
        }
    }

    #[test]
    fn c3_module_basics() {
        let m = c3_lambda2(3).unwrap();
        assert_eq!(m.dim, 13);
        assert_eq!(m.space.witt_index(), 6);
        let f = &m.spec;
        // v1 singular, Q(v7) = 1
        let mut v1 = vec![FieldElem::ZERO; 13];
        v1[0] = FieldElem::ONE;
        assert!(m.space.q_value(&v1).is_zero());
        let mut v7 = vec![FieldElem::ZERO; 13];
        v7[6] = FieldElem::ONE;
        assert_eq!(m.space.q_value(&v7), f.fe(1));
    }

    #[test]
    fn c3_bundled_reps_are_totally_singular() {
        let m = c3_lambda2(3).unwrap();
        let table = crate::lietype::bundled_table("c3").unwrap();
        for row in &table.rows {
            if let Some(rep) = &row.rep {
                let s = m.subspace(rep).unwrap();
                assert!(m.space.is_totally_singular(&s), "row {}", row.label);
            }
        }
    }

    #[test]
    fn a2_bundled_reps_are_totally_singular() {
        let m = a2_adjoint(3).unwrap();
        let table = crate::lietype::bundled_table("a2").unwrap();
        for row in &table.rows {
            let s = m.subspace(row.rep.as_ref().unwrap()).unwrap();
            assert!(m.space.is_totally_singular(&s), "row {}", row.label);
        }
    }

    #[test]
    fn w2_theta_family() {
        let m = a1cubed_v8(4).unwrap();
        let f = &m.spec;
        for theta in f.elements().skip(2) {
            let w = w2_theta(&m, theta).unwrap();
            assert_eq!(w.dim(), 2);
            assert!(m.space.is_totally_singular(&w));
        }
        assert!(w2_theta(&m, FieldElem::ZERO).is_err());
        assert!(w2_theta(&m, FieldElem::ONE).is_err());
    }

    #[test]
    fn a1cubed_unipotent_action_table() {
        // the upper unipotent triple acts on the basis as expected:
        // v5 -> alpha v1 + v5 for (alpha, 0, 0)
        let m = a1cubed_v8(4).unwrap();
        let f = &m.spec;
        let alpha = f.primitive();
        let u = a1cubed_unipotent(&m, alpha, FieldElem::ZERO, FieldElem::ZERO).unwrap();
        let mut v5 = vec![FieldElem::ZERO; 8];
        v5[4] = FieldElem::ONE;
        let img = u.mul_vec(&v5).unwrap();
        let mut expected = v5.clone();
        expected[0] = alpha;
        assert_eq!(img, expected);
    }

    #[test]
    fn subspace_action_respects_case_form() {
        // act by a generator, stay totally singular
        let m = a2_adjoint(3).unwrap();
        let s = m.subspace(&[vec![0, 0, 1, 0, 0, 0, 0], vec![0, 1, 0, 0, 0, 0, 0]]).unwrap();
        assert!(m.space.is_totally_singular(&s));
        for g in &m.generators {
            let img = act(g, &s).unwrap();
            assert!(m.space.is_totally_singular(&img));
        }
    }
}
