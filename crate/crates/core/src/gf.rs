//! Exact arithmetic in small finite fields GF(p^k), p^k <= 2^16.
//!
//! Elements are stored as canonical `u16` values: the base-p digit expansion
//! of the coefficient vector of the representative polynomial, so the value
//! of `c0 + c1 x + ... + c_{k-1} x^{k-1}` is `sum c_i p^i`. This makes
//! representations bit-identical across runs, which downstream orbit keys
//! rely on.
//!
//! Multiplication goes through exp/log tables for a fixed primitive element;
//! addition is digitwise (XOR when p = 2). The default modulus for (p, k) is
//! the first monic polynomial `x^k + c_{k-1} x^{k-1} + ... + c_0` (non-leading
//! coefficients enumerated by ascending packed value) that is irreducible
//! over GF(p) and has `x` as a multiplicative generator, so the tables are
//! reproducible without bundling data.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Result};

/// A field element in canonical packed form. Only meaningful relative to a
/// [`FieldSpec`]; all arithmetic lives on the spec.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Debug)]
pub struct FieldElem(pub u16);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Serialized form of a field spec: `{p, k, modulus: [c0..ck]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldSpecDef {
    pub p: u16,
    pub k: u32,
    pub modulus: Vec<u16>,
}

/// Immutable description of GF(p^k) together with its arithmetic tables.
pub struct FieldSpec {
    p: u16,
    k: u32,
    q: u32,
    modulus: Vec<u16>,
    /// generator powers, doubled length so index sums need no reduction
    exp: Vec<u16>,
    /// discrete logs, log[0] unused
    log: Vec<u16>,
    generator: u16,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus == other.modulus
    }
}
impl Eq for FieldSpec {}

impl std::hash::Hash for FieldSpec {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.p.hash(state);
        self.k.hash(state);
        self.modulus.hash(state);
    }
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.p, self.k)
    }
}

fn is_prime(p: u16) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p as u32 {
        if p as u32 % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Dense polynomials over GF(p), lowest degree first, used only during
/// spec construction.
mod poly {
    pub fn trim(c: &mut Vec<u16>) {
        while c.last() == Some(&0) {
            c.pop();
        }
    }

    pub fn rem(a: &[u16], m: &[u16], p: u16) -> Vec<u16> {
        let mut r: Vec<u16> = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let lead_inv = inv_mod(m[dm], p);
        while r.len() > dm {
            let d = r.len() - 1;
            let c = (r[d] as u32 * lead_inv as u32 % p as u32) as u16;
            for i in 0..=dm {
                let idx = d - dm + i;
                let sub = (c as u32 * m[i] as u32) % p as u32;
                r[idx] = ((r[idx] as u32 + p as u32 - sub as u32 % p as u32) % p as u32) as u16;
            }
            trim(&mut r);
            if r.is_empty() {
                break;
            }
        }
        r
    }

    pub fn mulmod(a: &[u16], b: &[u16], m: &[u16], p: u16) -> Vec<u16> {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut prod = vec![0u32; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u32 * y as u32) % p as u32;
            }
        }
        let prod: Vec<u16> = prod.into_iter().map(|v| v as u16).collect();
        rem(&prod, m, p)
    }

    pub fn powmod(base: &[u16], mut e: u64, m: &[u16], p: u16) -> Vec<u16> {
        let mut result = vec![1u16];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                result = mulmod(&result, &b, m, p);
            }
            b = mulmod(&b, &b, m, p);
            e >>= 1;
        }
        result
    }

    pub fn sub(a: &[u16], b: &[u16], p: u16) -> Vec<u16> {
        let n = a.len().max(b.len());
        let mut r = vec![0u16; n];
        for i in 0..n {
            let x = *a.get(i).unwrap_or(&0) as u32;
            let y = *b.get(i).unwrap_or(&0) as u32;
            r[i] = ((x + p as u32 - y) % p as u32) as u16;
        }
        trim(&mut r);
        r
    }

    pub fn gcd(a: &[u16], b: &[u16], p: u16) -> Vec<u16> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            let r = rem(&a, &pad_monic(&b, p), p);
            a = b;
            b = r;
        }
        a
    }

    /// scale to monic so `rem` can use it as a modulus
    fn pad_monic(c: &[u16], p: u16) -> Vec<u16> {
        let mut v = c.to_vec();
        let inv = inv_mod(*v.last().unwrap(), p);
        for x in v.iter_mut() {
            *x = (*x as u32 * inv as u32 % p as u32) as u16;
        }
        v
    }

    pub fn inv_mod(a: u16, p: u16) -> u16 {
        // p prime, a != 0
        pow_mod(a, p as u32 - 2, p)
    }

    pub fn pow_mod(a: u16, mut e: u32, p: u16) -> u16 {
        let mut r = 1u32;
        let mut b = a as u32 % p as u32;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p as u32;
            }
            b = b * b % p as u32;
            e >>= 1;
        }
        r as u16
    }
}

fn prime_divisors(mut n: u32) -> Vec<u32> {
    let mut out = vec![];
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn is_irreducible(modulus: &[u16], p: u16, k: u32) -> bool {
    // Rabin: x^(p^k) == x mod f, and gcd(x^(p^(k/l)) - x, f) = 1 for primes l | k
    let x = vec![0u16, 1];
    let pk = (p as u64).pow(k);
    let xpk = poly::powmod(&x, pk, modulus, p);
    if poly::sub(&xpk, &x, p) != Vec::<u16>::new() {
        return false;
    }
    for l in prime_divisors(k) {
        let e = (p as u64).pow(k / l);
        let xe = poly::powmod(&x, e, modulus, p);
        let diff = poly::sub(&xe, &x, p);
        let g = poly::gcd(modulus, &diff, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

impl FieldSpec {
    /// GF(p^k) with the deterministic default modulus.
    pub fn new(p: u16, k: u32) -> Result<Arc<FieldSpec>> {
        Self::check_params(p, k)?;
        if k == 1 {
            // modulus x + c0 with -c0 the least primitive root
            let g = Self::least_primitive_root(p);
            return Self::with_modulus(p, 1, &[(p - g) % p, 1]);
        }
        let q = (p as u64).pow(k);
        for packed in 0..q {
            let mut coeffs: Vec<u16> = Vec::with_capacity(k as usize + 1);
            let mut v = packed;
            for _ in 0..k {
                coeffs.push((v % p as u64) as u16);
                v /= p as u64;
            }
            coeffs.push(1);
            if !is_irreducible(&coeffs, p, k) {
                continue;
            }
            if let Ok(spec) = Self::build(p, k, coeffs.clone()) {
                if spec.generator == p {
                    // x itself generates the multiplicative group
                    return Ok(spec);
                }
            }
        }
        domain(format!("no usable modulus found for GF({p}^{k})"))
    }

    /// GF(p^k) with an explicit monic irreducible modulus `[c0..ck]`.
    pub fn with_modulus(p: u16, k: u32, modulus: &[u16]) -> Result<Arc<FieldSpec>> {
        Self::check_params(p, k)?;
        if modulus.len() != k as usize + 1 {
            return usage(format!("modulus must have {} coefficients", k + 1));
        }
        if modulus[k as usize] != 1 {
            return usage("modulus must be monic");
        }
        if modulus.iter().any(|&c| c >= p) {
            return usage("modulus coefficients must be reduced mod p");
        }
        if k > 1 && !is_irreducible(modulus, p, k) {
            return domain(format!("modulus is reducible over GF({p})"));
        }
        Self::build(p, k, modulus.to_vec())
    }

    /// GF(q) for q a prime power, default modulus.
    pub fn for_order(q: u64) -> Result<Arc<FieldSpec>> {
        let (p, k) = prime_power(q)?;
        Self::new(p, k)
    }

    fn check_params(p: u16, k: u32) -> Result<()> {
        if !is_prime(p) {
            return domain(format!("{p} is not prime"));
        }
        if k < 1 {
            return domain("extension degree must be >= 1");
        }
        let q = (p as u64).checked_pow(k);
        match q {
            Some(q) if q <= 1 << 16 => Ok(()),
            _ => domain(format!("p^k = {p}^{k} exceeds 2^16")),
        }
    }

    fn least_primitive_root(p: u16) -> u16 {
        if p == 2 {
            return 1;
        }
        let divisors = prime_divisors(p as u32 - 1);
        'outer: for g in 2..p {
            for &d in &divisors {
                if poly::pow_mod(g, (p as u32 - 1) / d, p) == 1 {
                    continue 'outer;
                }
            }
            return g;
        }
        unreachable!("every prime has a primitive root")
    }

    fn build(p: u16, k: u32, modulus: Vec<u16>) -> Result<Arc<FieldSpec>> {
        let q = (p as u64).pow(k) as u32;
        let mut spec = FieldSpec {
            p,
            k,
            q,
            modulus,
            exp: vec![],
            log: vec![],
            generator: 0,
        };
        let generator = spec.find_generator()?;
        spec.generator = generator;
        let mut exp = Vec::with_capacity(2 * (q as usize - 1));
        let mut log = vec![0u16; q as usize];
        let mut cur = 1u16;
        for i in 0..(q - 1) as usize {
            exp.push(cur);
            log[cur as usize] = i as u16;
            cur = spec.mul_raw(cur, generator);
        }
        if cur != 1 {
            return domain("generator order mismatch; modulus not irreducible?");
        }
        exp.extend_from_within(0..(q as usize - 1));
        spec.exp = exp;
        spec.log = log;
        Ok(Arc::new(spec))
    }

    /// schoolbook polynomial multiplication mod the modulus, value domain
    fn mul_raw(&self, a: u16, b: u16) -> u16 {
        let p = self.p as u32;
        let k = self.k as usize;
        let da = self.digits(a);
        let db = self.digits(b);
        let mut prod = [0u32; 32];
        for i in 0..k {
            if da[i] == 0 {
                continue;
            }
            for j in 0..k {
                prod[i + j] = (prod[i + j] + da[i] as u32 * db[j] as u32) % p;
            }
        }
        // reduce degrees >= k using x^k = -(c0 + .. + c_{k-1}x^{k-1})
        for d in (k..2 * k - 1).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for i in 0..k {
                let m = self.modulus[i] as u32;
                if m != 0 {
                    let idx = d - k + i;
                    prod[idx] = (prod[idx] + p * p - c * m % p) % p;
                }
            }
        }
        let mut digs = [0u16; 16];
        for i in 0..k {
            digs[i] = prod[i] as u16;
        }
        self.from_digits(&digs[..k])
    }

    fn find_generator(&self) -> Result<u16> {
        let divisors = prime_divisors(self.q - 1);
        'outer: for cand in 1..self.q as u64 {
            let cand = cand as u16;
            for &d in &divisors {
                if self.pow_raw(cand, ((self.q - 1) / d) as u64) == 1 {
                    continue 'outer;
                }
            }
            return Ok(cand);
        }
        domain("no multiplicative generator found")
    }

    fn pow_raw(&self, a: u16, mut e: u64) -> u16 {
        let mut r = 1u16;
        let mut b = a;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul_raw(r, b);
            }
            b = self.mul_raw(b, b);
            e >>= 1;
        }
        r
    }

    fn digits(&self, v: u16) -> [u16; 16] {
        let mut d = [0u16; 16];
        let mut v = v as u32;
        for i in 0..self.k as usize {
            d[i] = (v % self.p as u32) as u16;
            v /= self.p as u32;
        }
        d
    }

    fn from_digits(&self, d: &[u16]) -> u16 {
        let mut v = 0u32;
        for &x in d.iter().rev() {
            v = v * self.p as u32 + x as u32;
        }
        v as u16
    }

    pub fn p(&self) -> u16 {
        self.p
    }
    pub fn degree(&self) -> u32 {
        self.k
    }
    pub fn order(&self) -> u32 {
        self.q
    }
    pub fn characteristic(&self) -> u16 {
        self.p
    }
    pub fn modulus(&self) -> &[u16] {
        &self.modulus
    }
    /// A fixed multiplicative generator.
    pub fn primitive(&self) -> FieldElem {
        FieldElem(self.generator)
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem(0)
    }
    pub fn one(&self) -> FieldElem {
        FieldElem(1)
    }

    /// Element from an integer: reduces mod p into the prime subfield
    /// (negative values allowed).
    pub fn fe(&self, n: i64) -> FieldElem {
        let p = self.p as i64;
        FieldElem(n.rem_euclid(p) as u16)
    }

    /// Element from its canonical packed value.
    pub fn elem(&self, v: u32) -> Result<FieldElem> {
        if v < self.q {
            Ok(FieldElem(v as u16))
        } else {
            usage(format!("value {v} out of range for {self:?}"))
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> {
        (0..self.q).map(|v| FieldElem(v as u16))
    }

    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if self.p == 2 {
            return FieldElem(a.0 ^ b.0);
        }
        if self.k == 1 {
            return FieldElem(((a.0 as u32 + b.0 as u32) % self.p as u32) as u16);
        }
        let da = self.digits(a.0);
        let db = self.digits(b.0);
        let mut out = [0u16; 16];
        for i in 0..self.k as usize {
            out[i] = ((da[i] as u32 + db[i] as u32) % self.p as u32) as u16;
        }
        FieldElem(self.from_digits(&out[..self.k as usize]))
    }

    pub fn neg(&self, a: FieldElem) -> FieldElem {
        if self.p == 2 {
            return a;
        }
        if self.k == 1 {
            return FieldElem(((self.p as u32 - a.0 as u32) % self.p as u32) as u16);
        }
        let da = self.digits(a.0);
        let mut out = [0u16; 16];
        for i in 0..self.k as usize {
            out[i] = ((self.p as u32 - da[i] as u32) % self.p as u32) as u16;
        }
        FieldElem(self.from_digits(&out[..self.k as usize]))
    }

    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a.0 == 0 || b.0 == 0 {
            return FieldElem(0);
        }
        let i = self.log[a.0 as usize] as usize + self.log[b.0 as usize] as usize;
        FieldElem(self.exp[i])
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a.0 == 0 {
            return domain("inverse of zero");
        }
        let l = self.log[a.0 as usize] as usize;
        let i = (self.q as usize - 1 - l) % (self.q as usize - 1);
        Ok(FieldElem(self.exp[i]))
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FieldElem, e: u64) -> FieldElem {
        if a.0 == 0 {
            return if e == 0 { FieldElem(1) } else { FieldElem(0) };
        }
        let l = self.log[a.0 as usize] as u64;
        let i = (l % (self.q as u64 - 1)) * (e % (self.q as u64 - 1)) % (self.q as u64 - 1);
        FieldElem(self.exp[i as usize])
    }

    /// a^(p^i): the i-th Frobenius power. A field automorphism; the identity
    /// when i is a multiple of k.
    pub fn frobenius(&self, a: FieldElem, i: u32) -> FieldElem {
        if a.0 == 0 {
            return a;
        }
        let i = i % self.k;
        let pe = (self.p as u64).pow(i) % (self.q as u64 - 1);
        let l = self.log[a.0 as usize] as u64;
        FieldElem(self.exp[(l * pe % (self.q as u64 - 1)) as usize])
    }

    /// GF(p)-basis 1, x, x^2, ..., x^(k-1) of the extension.
    pub fn power_basis(&self) -> Vec<FieldElem> {
        (0..self.k)
            .map(|i| {
                let mut d = [0u16; 16];
                d[i as usize] = 1;
                FieldElem(self.from_digits(&d[..self.k as usize]))
            })
            .collect()
    }

    pub fn def(&self) -> FieldSpecDef {
        FieldSpecDef {
            p: self.p,
            k: self.k,
            modulus: self.modulus.clone(),
        }
    }

    pub fn from_def(def: &FieldSpecDef) -> Result<Arc<FieldSpec>> {
        FieldSpec::with_modulus(def.p, def.k, &def.modulus)
    }

    /// Polynomial display of an element, for diagnostics.
    pub fn fmt_elem(&self, a: FieldElem) -> String {
        if self.k == 1 || a.0 < self.p {
            return format!("{}", a.0);
        }
        let d = self.digits(a.0);
        let mut parts = vec![];
        for i in (0..self.k as usize).rev() {
            if d[i] == 0 {
                continue;
            }
            let t = match (i, d[i]) {
                (0, c) => format!("{c}"),
                (1, 1) => "x".to_string(),
                (1, c) => format!("{c}x"),
                (i, 1) => format!("x^{i}"),
                (i, c) => format!("{c}x^{i}"),
            };
            parts.push(t);
        }
        parts.join("+")
    }
}

/// Factor q as p^e with p prime.
pub fn prime_power(q: u64) -> Result<(u16, u32)> {
    if q < 2 {
        return usage(format!("{q} is not a prime power"));
    }
    let mut p = 2u64;
    while p * p <= q {
        if q % p == 0 {
            let mut e = 0u32;
            let mut v = q;
            while v % p == 0 {
                v /= p;
                e += 1;
            }
            if v != 1 {
                return usage(format!("{q} is not a prime power"));
            }
            return Ok((p as u16, e));
        }
        p += 1;
    }
    Ok((q as u16, 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf3_characteristic_arithmetic() {
        let f = FieldSpec::new(3, 1).unwrap();
        assert_eq!(f.add(f.fe(2), f.fe(2)), f.fe(1));
        assert_eq!(f.inv(f.fe(2)).unwrap(), f.fe(2));
    }

    #[test]
    fn gf5_inverse() {
        let f = FieldSpec::new(5, 1).unwrap();
        assert_eq!(f.inv(f.fe(3)).unwrap(), f.fe(2));
    }

    #[test]
    fn gf2_self_inverse_addition() {
        let f = FieldSpec::new(2, 1).unwrap();
        for a in f.elements() {
            assert_eq!(f.add(a, a), f.zero());
        }
    }

    #[test]
    fn gf4_polynomial_arithmetic() {
        // only irreducible quadratic over GF(2) is x^2+x+1
        let f = FieldSpec::new(2, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 1, 1]);
        let x = FieldElem(2);
        let x1 = FieldElem(3);
        assert_eq!(f.add(x, x1), f.one());
        // frobenius: x -> x^2 = x+1 under this modulus
        assert_eq!(f.frobenius(x, 1), x1);
    }

    #[test]
    fn gf9_inverses_and_frobenius_fixed_field() {
        let f = FieldSpec::new(3, 2).unwrap();
        let mut fixed = 0;
        for a in f.elements() {
            if !a.is_zero() {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
            }
            if f.frobenius(a, 1) == a {
                fixed += 1;
            }
        }
        assert_eq!(fixed, 3, "frobenius fixes exactly GF(3)");
    }

    #[test]
    fn gf3_frobenius_is_identity() {
        let f = FieldSpec::new(3, 1).unwrap();
        for a in f.elements() {
            assert_eq!(f.frobenius(a, 1), a);
        }
    }

    #[test]
    fn frobenius_composes_additively() {
        let f = FieldSpec::new(3, 4).unwrap();
        for a in f.elements().step_by(7) {
            for i in 0..4 {
                for j in 0..4 {
                    assert_eq!(f.frobenius(f.frobenius(a, i), j), f.frobenius(a, i + j));
                }
            }
        }
    }

    #[test]
    fn exhaustive_field_laws_small_orders() {
        // every field with p^k <= 2^8
        let mut specs = vec![];
        for p in 2u16..=251 {
            if !is_prime(p) {
                continue;
            }
            let mut k = 1;
            while (p as u64).pow(k) <= 256 {
                specs.push(FieldSpec::new(p, k).unwrap());
                k += 1;
            }
        }
        for f in specs {
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    assert_eq!(f.add(a, f.neg(a)), f.zero());
                    if !b.is_zero() {
                        let i = f.inv(b).unwrap();
                        assert_eq!(f.mul(b, i), f.one());
                        assert_eq!(f.mul(f.mul(a, b), i), a);
                    }
                }
            }
            // triples on a stride (full cube is too big for 251)
            let els: Vec<_> = f.elements().collect();
            let step = (els.len() / 16).max(1);
            for &a in els.iter().step_by(step) {
                for &b in els.iter().step_by(step) {
                    for &c in els.iter().step_by(step) {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(FieldSpec::new(4, 1).is_err());
        assert!(FieldSpec::new(2, 17).is_err());
        assert!(FieldSpec::with_modulus(3, 2, &[2, 0, 1]).is_err()); // x^2+2 = (x+1)(x+2)
        assert!(FieldSpec::with_modulus(3, 2, &[1, 2, 1]).is_err()); // (x+1)^2
        assert!(FieldSpec::with_modulus(3, 2, &[1, 0, 1]).is_ok()); // x^2+1 is irreducible mod 3
    }

    #[test]
    fn explicit_modulus_roundtrip() {
        let f = FieldSpec::with_modulus(3, 2, &[2, 1, 1]).unwrap();
        let def = f.def();
        let g = FieldSpec::from_def(&def).unwrap();
        assert_eq!(*f, *g);
    }
}
