//! Exact orders of finite groups of Lie type, symbolic stabilizer
//! descriptors, orbit-index arithmetic, table sum-identity verification, and
//! dense-orbit bound screening.
//!
//! All identity checks run in big-integer arithmetic; nothing here touches
//! floating point.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Error, Result};
use crate::quadspace::{count_ts, FormKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    G2,
    F4,
    E7,
}

/// A simple factor of Lie type. `twisted` marks the unitary forms
/// (e.g. twisted A2 = SU3); only type A supports it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub family: Family,
    pub rank: u32,
    #[serde(default)]
    pub twisted: bool,
}

impl GroupSpec {
    pub const fn new(family: Family, rank: u32) -> GroupSpec {
        GroupSpec {
            family,
            rank,
            twisted: false,
        }
    }

    pub const fn twisted(family: Family, rank: u32) -> GroupSpec {
        GroupSpec {
            family,
            rank,
            twisted: true,
        }
    }
}

/// Exact order of the (simply connected) finite group of Lie type.
///
/// A_n: q^(n(n+1)/2) prod_{i=2}^{n+1} (q^i - 1), twisted replaces -1 by
/// -(-1)^i. B_n/C_n: q^(n^2) prod (q^(2i) - 1). D_n: q^(n(n-1)) (q^n - 1)
/// prod_{i<n} (q^(2i) - 1). G2, F4, E7 per their degree sets.
pub fn group_order(spec: &GroupSpec, q: u64) -> Result<BigUint> {
    if q < 2 {
        return usage("q must be a prime power >= 2");
    }
    let qb = BigUint::from(q);
    let r = spec.rank;
    if spec.twisted && spec.family != Family::A {
        return domain("twisted forms supported for type A only");
    }
    let order = match spec.family {
        Family::A => {
            if r < 1 {
                return domain("rank must be >= 1");
            }
            let mut o = qb.pow(r * (r + 1) / 2);
            for i in 2..=r + 1 {
                let t = qb.pow(i);
                if spec.twisted && i % 2 == 1 {
                    o *= t + 1u32;
                } else {
                    o *= t - 1u32;
                }
            }
            o
        }
        Family::B | Family::C => {
            if r < 1 {
                return domain("rank must be >= 1");
            }
            let mut o = qb.pow(r * r);
            for i in 1..=r {
                o *= qb.pow(2 * i) - 1u32;
            }
            o
        }
        Family::D => {
            if r < 2 {
                return domain("rank must be >= 2");
            }
            let mut o = qb.pow(r * (r - 1)) * (qb.pow(r) - 1u32);
            for i in 1..r {
                o *= qb.pow(2 * i) - 1u32;
            }
            o
        }
        Family::G2 => qb.pow(6) * (qb.pow(2) - 1u32) * (qb.pow(6) - 1u32),
        Family::F4 => {
            qb.pow(24)
                * (qb.pow(2) - 1u32)
                * (qb.pow(6) - 1u32)
                * (qb.pow(8) - 1u32)
                * (qb.pow(12) - 1u32)
        }
        Family::E7 => {
            let mut o = qb.pow(63);
            for d in [2u32, 6, 8, 10, 12, 14, 18] {
                o *= qb.pow(d) - 1u32;
            }
            o
        }
    };
    Ok(order)
}

/// Order of a direct product of simple factors.
pub fn product_order(specs: &[GroupSpec], q: u64) -> Result<BigUint> {
    let mut o = BigUint::one();
    for s in specs {
        o *= group_order(s, q)?;
    }
    Ok(o)
}

/// Symbolic stabilizer structure evaluating to an exact order at any q:
/// `q^a * prod |factor(q)| * (q-1)^s * (q+1)^t * component_order`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilizerDescriptor {
    #[serde(rename = "q_exp")]
    pub unipotent_exp: u32,
    #[serde(default)]
    pub factors: Vec<GroupSpec>,
    #[serde(rename = "q_minus", default)]
    pub split_tori: u32,
    #[serde(rename = "q_plus", default)]
    pub twisted_tori: u32,
    #[serde(rename = "component", default = "one_u32")]
    pub component_order: u32,
}

fn one_u32() -> u32 {
    1
}

impl StabilizerDescriptor {
    pub fn order(&self, q: u64) -> Result<BigUint> {
        let qb = BigUint::from(q);
        let mut o = qb.pow(self.unipotent_exp);
        for f in &self.factors {
            o *= group_order(f, q)?;
        }
        o *= (qb.clone() - 1u32).pow(self.split_tori);
        o *= (qb + 1u32).pow(self.twisted_tori);
        o *= BigUint::from(self.component_order);
        Ok(o)
    }
}

/// The ambient polar space of an orbit table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceParams {
    pub kind: FormKind,
    pub n: u64,
    pub m: u64,
    pub k: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitRow {
    pub label: String,
    #[serde(flatten)]
    pub stab: StabilizerDescriptor,
    /// Representative subspace basis in module coordinates, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rep: Option<Vec<Vec<i64>>>,
    /// Containing orbit of the larger group, for restriction experiments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d5_orbit: Option<u32>,
}

/// Orbit table: ambient group, polar space, and one stabilizer descriptor per
/// finite orbit. The defining invariant is the sum identity
/// `sum_rows |G(q)| / |stab(q)| = count_ts(space, q)` for valid q.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitTable {
    pub name: String,
    /// characteristic the table's module construction lives in
    pub characteristic: u16,
    pub group: Vec<GroupSpec>,
    pub space: SpaceParams,
    pub rows: Vec<OrbitRow>,
}

pub const TABLE_NAMES: [&str; 4] = ["a2", "c3", "f4", "b4"];

/// Bundled table data. The a2/c3/f4 tables live at characteristic 3, b4 at 2.
/// (For the a2 space the orbit sizes sum to (1+q)(1+q^2)(1+q^2+q^4); a
/// variant closed form with an extra leading factor q is wrong and not used.)
pub fn bundled_table(name: &str) -> Result<OrbitTable> {
    let raw = match name {
        "a2" => include_str!("../tables/a2.json"),
        "c3" => include_str!("../tables/c3.json"),
        "f4" => include_str!("../tables/f4.json"),
        "b4" => include_str!("../tables/b4.json"),
        _ => return usage(format!("unknown table '{name}' (have: {TABLE_NAMES:?})")),
    };
    serde_json::from_str(raw).map_err(|e| Error::Internal(format!("bundled table {name}: {e}")))
}

pub fn load_table(path: &std::path::Path) -> Result<OrbitTable> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&raw).map_err(|e| Error::Usage(format!("bad table file: {e}")))
}

#[derive(Debug, Clone, Serialize)]
pub struct RowReport {
    pub label: String,
    pub order: String,
    pub index: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SumReport {
    pub table: String,
    pub q: u64,
    pub lhs: String,
    pub rhs: String,
    pub pass: bool,
    pub rows: Vec<RowReport>,
}

impl SumReport {
    pub fn lhs_int(&self) -> BigUint {
        self.lhs.parse().unwrap()
    }
    pub fn rhs_int(&self) -> BigUint {
        self.rhs.parse().unwrap()
    }
}

/// Checks `sum of stabilizer indices = totally singular space count` exactly.
/// `q` must be a power of the table's characteristic.
pub fn verify_sum_identity(table: &OrbitTable, q: u64) -> Result<SumReport> {
    let (p, _) = crate::gf::prime_power(q)?;
    if p != table.characteristic {
        return usage(format!(
            "table '{}' lives in characteristic {}, got q={q}",
            table.name, table.characteristic
        ));
    }
    let g = product_order(&table.group, q)?;
    let mut lhs = BigUint::zero();
    let mut rows = vec![];
    for row in &table.rows {
        let order = row.stab.order(q)?;
        let (index, rem) = g.div_rem(&order);
        if !rem.is_zero() {
            return Err(Error::Internal(format!(
                "stabilizer order of row {} does not divide the group order at q={q}",
                row.label
            )));
        }
        lhs += &index;
        rows.push(RowReport {
            label: row.label.clone(),
            order: order.to_string(),
            index: index.to_string(),
        });
    }
    let rhs = count_ts(table.space.kind, table.space.n, table.space.m, table.space.k, q)?;
    Ok(SumReport {
        table: table.name.clone(),
        q,
        pass: lhs == rhs,
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        rows,
    })
}

/// Dense-orbit screening flags for a candidate (dim G, dim V, k):
///  - `pass_k_spaces`: dim V <= dim G / k + (3k+1)/2  (exact rational test)
///  - `pass_k_bound`:  k^2 - k <= 2 dim G
///  - `pass_super`:    dim V <= dim G + 2, asserted only when dim G >= 5
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundsReport {
    pub pass_k_spaces: bool,
    pub pass_k_bound: bool,
    pub pass_super: Option<bool>,
}

impl BoundsReport {
    pub fn all_pass(&self) -> bool {
        self.pass_k_spaces && self.pass_k_bound && self.pass_super.unwrap_or(true)
    }
}

pub fn screen_bounds(dim_g: u64, dim_v: u64, k: u64) -> BoundsReport {
    // dim V <= dim G/k + (3k+1)/2  <=>  2k dim V <= 2 dim G + k(3k+1)
    let pass_k_spaces = 2 * k * dim_v <= 2 * dim_g + k * (3 * k + 1);
    let pass_k_bound = k * k - k <= 2 * dim_g;
    let pass_super = if dim_g >= 5 {
        Some(dim_v <= dim_g + 2)
    } else {
        None
    };
    BoundsReport {
        pass_k_spaces,
        pass_k_bound,
        pass_super,
    }
}

/// Largest k with k^2 - k <= 2 dim G, by exact integer check around the
/// radical. max_k(14) = 5 (k = 6 gives 30 > 28); max_k(3) = 3; max_k(1) = 2.
pub fn max_k(dim_g: u64) -> u64 {
    let mut k = ((1.0 + ((1 + 8 * dim_g) as f64).sqrt()) / 2.0).floor() as u64;
    while k * k - k > 2 * dim_g {
        k -= 1;
    }
    while (k + 1) * (k + 1) - (k + 1) <= 2 * dim_g {
        k += 1;
    }
    k
}

/// A screening-candidate row: group, its dimension, module dimension, and
/// the k values to screen.
#[derive(Debug, Clone, Serialize)]
pub struct CandidateRow {
    pub group: &'static str,
    pub dim_g: u64,
    pub module: &'static str,
    pub dim_v: u64,
    pub ks: &'static [u64],
    pub p: &'static str,
}

/// The bundled candidate list for k >= 2 screening. Group dimensions are the
/// root-count values: dim = rank + #roots.
pub fn candidate_rows() -> Vec<CandidateRow> {
    vec![
        CandidateRow { group: "A1", dim_g: 3, module: "l1+p^i l1", dim_v: 4, ks: &[2], p: "any" },
        CandidateRow { group: "A1", dim_g: 3, module: "3l1", dim_v: 4, ks: &[2], p: "!=2,3" },
        CandidateRow { group: "A1", dim_g: 3, module: "4l1", dim_v: 5, ks: &[2], p: "!=2,3" },
        CandidateRow { group: "A2", dim_g: 8, module: "l1+l2", dim_v: 7, ks: &[2, 3], p: "3" },
        CandidateRow { group: "A2", dim_g: 8, module: "l1+l2", dim_v: 8, ks: &[4], p: "!=3" },
        CandidateRow { group: "A5", dim_g: 35, module: "l3", dim_v: 20, ks: &[2], p: "any" },
        CandidateRow { group: "B2", dim_g: 10, module: "2l1", dim_v: 10, ks: &[5], p: "any" },
        CandidateRow { group: "B3", dim_g: 21, module: "l3", dim_v: 8, ks: &[4], p: "any" },
        CandidateRow { group: "B4", dim_g: 36, module: "l4", dim_v: 16, ks: &[2, 3, 7, 8], p: "any" },
        CandidateRow { group: "C3", dim_g: 21, module: "l2", dim_v: 13, ks: &[2], p: "3" },
        CandidateRow { group: "C3", dim_g: 21, module: "l2", dim_v: 14, ks: &[2, 7], p: "!=3" },
        CandidateRow { group: "D6", dim_g: 66, module: "l6", dim_v: 32, ks: &[2], p: "any" },
        CandidateRow { group: "G2", dim_g: 14, module: "l1", dim_v: 7, ks: &[3], p: "!=2" },
        CandidateRow { group: "F4", dim_g: 52, module: "l4", dim_v: 25, ks: &[2], p: "3" },
        CandidateRow { group: "F4", dim_g: 52, module: "l4", dim_v: 26, ks: &[2], p: "!=3" },
        CandidateRow { group: "E7", dim_g: 133, module: "l7", dim_v: 56, ks: &[2], p: "any" },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_examples() {
        assert_eq!(
            group_order(&GroupSpec::new(Family::A, 2), 3).unwrap(),
            BigUint::from(5616u32)
        );
        assert_eq!(
            group_order(&GroupSpec::new(Family::C, 3), 3).unwrap(),
            BigUint::from(9_170_703_360u64)
        );
        assert_eq!(
            group_order(&GroupSpec::twisted(Family::A, 2), 2).unwrap(),
            BigUint::from(216u32)
        );
        assert_eq!(
            group_order(&GroupSpec::new(Family::B, 4), 2).unwrap(),
            BigUint::from(47_377_612_800u64)
        );
        assert_eq!(
            group_order(&GroupSpec::new(Family::D, 5), 2).unwrap(),
            BigUint::from(23_499_295_948_800u64)
        );
        assert_eq!(
            group_order(&GroupSpec::new(Family::G2, 0), 2).unwrap(),
            BigUint::from(12096u32)
        );
    }

    #[test]
    fn bundled_tables_parse() {
        for name in TABLE_NAMES {
            let t = bundled_table(name).unwrap();
            assert!(!t.rows.is_empty(), "{name}");
        }
    }

    #[test]
    fn sum_identities_pass() {
        let cases: [(&str, &[u64]); 4] = [
            ("a2", &[3, 9, 27]),
            ("c3", &[3, 9]),
            ("f4", &[3, 9]),
            ("b4", &[2, 4]),
        ];
        for (name, qs) in cases {
            let t = bundled_table(name).unwrap();
            for &q in qs {
                let r = verify_sum_identity(&t, q).unwrap();
                assert!(r.pass, "{name} q={q}: lhs={} rhs={}", r.lhs, r.rhs);
            }
        }
    }

    #[test]
    fn a2_indices_at_q3() {
        let t = bundled_table("a2").unwrap();
        let r = verify_sum_identity(&t, 3).unwrap();
        let mut sizes: Vec<u64> = r.rows.iter().map(|x| x.index.parse().unwrap()).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(sizes, vec![1872, 936, 468, 234, 104, 13, 13]);
        assert_eq!(r.lhs, "3640");
    }

    #[test]
    fn wrong_characteristic_rejected() {
        let t = bundled_table("a2").unwrap();
        assert!(verify_sum_identity(&t, 4).is_err());
        assert!(verify_sum_identity(&t, 6).is_err());
    }

    #[test]
    fn descriptor_orders_divide_group_orders() {
        // indices are integers for q in {2,3,4,5,8,9} over all bundled tables
        for name in TABLE_NAMES {
            let t = bundled_table(name).unwrap();
            for q in [2u64, 3, 4, 5, 8, 9] {
                let g = product_order(&t.group, q).unwrap();
                for row in &t.rows {
                    let o = row.stab.order(q).unwrap();
                    assert!(
                        (&g % &o).is_zero(),
                        "{name} row {} at q={q}",
                        row.label
                    );
                }
            }
        }
    }

    #[test]
    fn screening_bounds() {
        // A5 candidate: 20 <= 35/2 + 3.5
        assert!(screen_bounds(35, 20, 2).pass_k_spaces);
        // boundary case with equality at dim G = 3
        let b = screen_bounds(3, 4, 2);
        assert!(b.pass_k_spaces && b.pass_k_bound);
        assert!(b.pass_super.is_none(), "super bound only asserted for dim G >= 5");
        // every bundled candidate row passes
        for row in candidate_rows() {
            for &k in row.ks {
                let r = screen_bounds(row.dim_g, row.dim_v, k);
                assert!(r.all_pass(), "{} dimV={} k={k}", row.group, row.dim_v);
            }
        }
    }

    #[test]
    fn max_k_values() {
        assert_eq!(max_k(14), 5);
        assert_eq!(max_k(3), 3);
        assert_eq!(max_k(1), 2);
        for d in 1..200u64 {
            let k = max_k(d);
            assert!(k * k - k <= 2 * d);
            assert!((k + 1) * (k + 1) - (k + 1) > 2 * d);
        }
    }
}
