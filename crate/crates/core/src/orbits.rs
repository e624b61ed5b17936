//! Canonical-form BFS orbit enumeration of finite matrix groups on
//! k-subspaces: orbit sizes, orbit partitions of totally singular
//! Grassmannians, membership testing, and the spin-module restriction
//! experiment.
//!
//! States are canonical RREF bases packed into u64 keys (row-major, entries
//! little-endian, ceil(log2 q) bits each); every in-scope case fits 56 bits.
//! The frontier expands in parallel into a concurrent key set; inserting is
//! the linearization point, so orbit sizes are exact for any thread count.
//! Since the acting group is finite, closing under the generator set alone
//! already closes under the generated group (no inverses needed).

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use dashmap::DashSet;
use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::casemods::CaseModule;
use crate::error::{domain, usage, Error, Result};
use crate::gf::{FieldElem, FieldSpec};
use crate::lietype::{product_order, OrbitTable};
use crate::linalg::{rref_rows, Mat, Subspace};
use crate::quadspace::QuadSpace;

#[derive(Debug, Clone)]
pub struct OrbitConfig {
    /// hard cap on stored keys; exceeding it aborts with a resource error
    pub max_keys: u64,
    /// worker threads for frontier expansion (1 = sequential)
    pub threads: usize,
    /// keep the key set in the outcome for membership queries
    pub retain_keys: bool,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        OrbitConfig {
            max_keys: 120_000_000,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            retain_keys: false,
        }
    }
}

impl OrbitConfig {
    pub fn with_memory_budget_mb(mb: u64) -> OrbitConfig {
        // conservative 16 bytes per stored key in the concurrent set
        OrbitConfig {
            max_keys: (mb * 1024 * 1024 / 16).max(1024),
            ..Default::default()
        }
    }
}

/// Packs k RREF rows of n entries into a u64 key.
#[derive(Debug, Clone, Copy)]
struct KeyCodec {
    n: usize,
    k: usize,
    bits: u32,
}

impl KeyCodec {
    fn new(n: usize, k: usize, q: u32) -> Result<KeyCodec> {
        let bits = Subspace::bits_per_entry(q);
        if (n * k) as u32 * bits > 64 {
            return usage(format!(
                "packed state needs {} bits (> 64); configuration unsupported",
                (n * k) as u32 * bits
            ));
        }
        Ok(KeyCodec { n, k, bits })
    }

    #[inline]
    fn pack_entries(&self, entries: &[u16]) -> u64 {
        let mut key = 0u64;
        for (i, &e) in entries.iter().enumerate() {
            key |= (e as u64) << (i as u32 * self.bits);
        }
        key
    }

    #[inline]
    fn unpack_entries(&self, key: u64, out: &mut [u16]) {
        let mask = (1u64 << self.bits) - 1;
        for (i, o) in out.iter_mut().enumerate() {
            *o = ((key >> (i as u32 * self.bits)) & mask) as u16;
        }
    }

    fn key_of(&self, s: &Subspace) -> u64 {
        let entries: Vec<u16> = s.basis_rows().flatten().map(|e| e.0).collect();
        self.pack_entries(&entries)
    }

    fn subspace_of(&self, spec: &Arc<FieldSpec>, key: u64) -> Subspace {
        let mut entries = vec![0u16; self.n * self.k];
        self.unpack_entries(key, &mut entries);
        let rows: Vec<Vec<FieldElem>> = (0..self.k)
            .map(|r| entries[r * self.n..(r + 1) * self.n].iter().map(|&v| FieldElem(v)).collect())
            .collect();
        Subspace::canonicalize(spec.clone(), self.n, &rows).expect("key encodes a valid subspace")
    }
}

enum CompiledGen {
    /// GF(2): column masks; image of v is the xor of columns at set bits
    Gf2 { cols: Vec<u64> },
    Scalar(Mat),
}

/// Reduced row echelon form of k bitmask rows over GF(2).
#[inline]
fn rref_gf2(rows: &mut [u64]) {
    let k = rows.len();
    let mut done = 0;
    while done < k {
        let mut best = usize::MAX;
        let mut best_piv = 65u32;
        for (i, &r) in rows.iter().enumerate().skip(done) {
            if r != 0 {
                let p = r.trailing_zeros();
                if p < best_piv {
                    best_piv = p;
                    best = i;
                }
            }
        }
        if best == usize::MAX {
            break;
        }
        rows.swap(done, best);
        let pivot_row = rows[done];
        for (i, r) in rows.iter_mut().enumerate() {
            if i != done && (*r >> best_piv) & 1 == 1 {
                *r ^= pivot_row;
            }
        }
        done += 1;
    }
}

struct Engine<'m> {
    module: &'m CaseModule,
    codec: KeyCodec,
    gens: Vec<CompiledGen>,
}

impl<'m> Engine<'m> {
    fn new(module: &'m CaseModule, k: usize) -> Result<Engine<'m>> {
        let n = module.dim;
        let q = module.spec.order();
        let codec = KeyCodec::new(n, k, q)?;
        let gens = module
            .generators
            .iter()
            .map(|g| {
                if q == 2 {
                    let cols: Vec<u64> = (0..n)
                        .map(|j| {
                            let mut col = 0u64;
                            for i in 0..n {
                                if g[(i, j)] == FieldElem::ONE {
                                    col |= 1 << i;
                                }
                            }
                            col
                        })
                        .collect();
                    CompiledGen::Gf2 { cols }
                } else {
                    CompiledGen::Scalar(g.clone())
                }
            })
            .collect();
        Ok(Engine {
            module,
            codec,
            gens,
        })
    }

    #[inline]
    fn apply(&self, gen: &CompiledGen, key: u64) -> u64 {
        let (n, k) = (self.codec.n, self.codec.k);
        match gen {
            CompiledGen::Gf2 { cols } => {
                let mask = (1u64 << n) - 1;
                let mut rows = [0u64; 8];
                for r in 0..k {
                    let v = (key >> (r * n)) & mask;
                    let mut img = 0u64;
                    let mut bits = v;
                    while bits != 0 {
                        let j = bits.trailing_zeros() as usize;
                        img ^= cols[j];
                        bits &= bits - 1;
                    }
                    rows[r] = img;
                }
                rref_gf2(&mut rows[..k]);
                let mut out = 0u64;
                for (r, &row) in rows[..k].iter().enumerate() {
                    out |= row << (r * n);
                }
                out
            }
            CompiledGen::Scalar(m) => {
                let f = &self.module.spec;
                let mut entries = vec![0u16; n * k];
                self.codec.unpack_entries(key, &mut entries);
                let mut rows: Vec<Vec<FieldElem>> = Vec::with_capacity(k);
                for r in 0..k {
                    let mut img = vec![FieldElem::ZERO; n];
                    for c in 0..n {
                        let v = entries[r * n + c];
                        if v != 0 {
                            let x = FieldElem(v);
                            for i in 0..n {
                                img[i] = f.add(img[i], f.mul(m[(i, c)], x));
                            }
                        }
                    }
                    rows.push(img);
                }
                rref_rows(f, &mut rows);
                debug_assert_eq!(rows.len(), k);
                let flat: Vec<u16> = rows.iter().flatten().map(|e| e.0).collect();
                self.codec.pack_entries(&flat)
            }
        }
    }

    /// Expands the orbit of `start` into `found` (which must already contain
    /// it). Returns the number of newly inserted keys + 1 and whether the
    /// optional target key was encountered.
    fn bfs(
        &self,
        found: &DashSet<u64>,
        start: u64,
        target: Option<u64>,
        cfg: &OrbitConfig,
    ) -> Result<(u64, bool)> {
        let hit = AtomicBool::new(target == Some(start));
        let mut frontier = vec![start];
        let mut size: u64 = 1;
        let hit_ref = &hit;
        let run = |frontier: &Vec<u64>| -> Vec<u64> {
            frontier
                .par_iter()
                .flat_map_iter(|&key| {
                    self.gens.iter().filter_map(move |g| {
                        let nk = self.apply(g, key);
                        if found.insert(nk) {
                            if target == Some(nk) {
                                hit_ref.store(true, Ordering::Relaxed);
                            }
                            Some(nk)
                        } else {
                            None
                        }
                    })
                })
                .collect()
        };
        while !frontier.is_empty() {
            let next = if cfg.threads <= 1 {
                let mut out = vec![];
                for &key in &frontier {
                    for g in &self.gens {
                        let nk = self.apply(g, key);
                        if found.insert(nk) {
                            if target == Some(nk) {
                                hit.store(true, Ordering::Relaxed);
                            }
                            out.push(nk);
                        }
                    }
                }
                out
            } else {
                run(&frontier)
            };
            size += next.len() as u64;
            if found.len() as u64 > cfg.max_keys {
                return Err(Error::Resource {
                    partial: found.len() as u64,
                    budget: cfg.max_keys,
                });
            }
            if hit.load(Ordering::Relaxed) {
                // membership answered; the caller does not need the full orbit
                return Ok((size, true));
            }
            frontier = next;
        }
        Ok((size, hit.load(Ordering::Relaxed)))
    }
}

/// Result of a single-orbit run.
#[derive(Debug)]
pub struct OrbitOutcome {
    pub size: u64,
    pub rep: Subspace,
    /// retained key set (when requested)
    pub keys: Option<DashSet<u64>>,
}

fn check_start(module: &CaseModule, s: &Subspace) -> Result<()> {
    if s.ambient_dim() != module.dim {
        return usage("start subspace has the wrong ambient dimension");
    }
    if !module.space.is_totally_singular(s) {
        return domain("start subspace is not totally singular");
    }
    Ok(())
}

/// Exact orbit size of `start` under the module's group.
pub fn orbit_of(module: &CaseModule, start: &Subspace, cfg: &OrbitConfig) -> Result<OrbitOutcome> {
    check_start(module, start)?;
    let engine = Engine::new(module, start.dim())?;
    let found = DashSet::new();
    let key = engine.codec.key_of(start);
    found.insert(key);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    let (size, _) = pool.install(|| engine.bfs(&found, key, None, cfg))?;
    Ok(OrbitOutcome {
        size,
        rep: start.clone(),
        keys: if cfg.retain_keys { Some(found) } else { None },
    })
}

/// Whether s2 lies in the orbit of s1 (BFS with early exit on hit).
pub fn same_orbit(
    module: &CaseModule,
    s1: &Subspace,
    s2: &Subspace,
    cfg: &OrbitConfig,
) -> Result<bool> {
    check_start(module, s1)?;
    check_start(module, s2)?;
    if s1.dim() != s2.dim() {
        return Ok(false);
    }
    let engine = Engine::new(module, s1.dim())?;
    let k1 = engine.codec.key_of(s1);
    let k2 = engine.codec.key_of(s2);
    if k1 == k2 {
        return Ok(true);
    }
    let found = DashSet::new();
    found.insert(k1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    let (_, hit) = pool.install(|| engine.bfs(&found, k1, Some(k2), cfg))?;
    Ok(hit)
}

/// An orbit partition: representatives (first-encountered in the canonical
/// stream order) with exact sizes.
#[derive(Debug)]
pub struct OrbitPartition {
    pub orbits: Vec<(Subspace, u64)>,
    pub total: BigUint,
}

impl OrbitPartition {
    pub fn sizes(&self) -> Vec<u64> {
        self.orbits.iter().map(|&(_, s)| s).collect()
    }

    pub fn sorted_sizes(&self) -> Vec<u64> {
        let mut v = self.sizes();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }
}

/// Partitions the full totally singular k-Grassmannian of the module's space
/// into orbits. Streams the Grassmannian in canonical order; every stream
/// element not yet visited seeds a BFS, so representatives are deterministic.
pub fn partition_ts_grassmannian(
    module: &CaseModule,
    k: usize,
    cfg: &OrbitConfig,
) -> Result<OrbitPartition> {
    let engine = Engine::new(module, k)?;
    let found: DashSet<u64> = DashSet::new();
    let mut orbits: Vec<(Subspace, u64)> = vec![];
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    let mut stream_error: Option<Error> = None;
    let spec = module.spec.clone();

    let mut handle_key = |key: u64, rep: &dyn Fn() -> Subspace| {
        if stream_error.is_some() || !found.insert(key) {
            return;
        }
        let rep = rep();
        match pool.install(|| engine.bfs(&found, key, None, cfg)) {
            Ok((size, _)) => orbits.push((rep, size)),
            Err(e) => stream_error = Some(e),
        }
    };

    if module.spec.order() == 2 && k == 2 && module.dim <= 16 {
        // 1-bit entries row-major: the streamed word is already the key
        stream_ts2_gf2(&module.space, |key| {
            handle_key(key, &|| engine.codec.subspace_of(&spec, key));
        });
    } else {
        module.space.for_each_ts_kspace(k, |s| {
            handle_key(engine.codec.key_of(s), &|| s.clone());
        });
    }
    if let Some(e) = stream_error {
        return Err(e);
    }
    let total = orbits.iter().fold(BigUint::zero(), |acc, (_, s)| acc + *s);
    Ok(OrbitPartition { orbits, total })
}

/// Bit-level stream of totally singular 2-spaces over GF(2) (n <= 16).
/// Pivot pairs ascend lexicographically; free bits count up naturally within
/// each pivot block (a fixed order, though not the row-major digit order of
/// the generic stream).
fn stream_ts2_gf2(space: &QuadSpace, mut visit: impl FnMut(u64)) {
    let n = space.n();
    debug_assert!(space.spec().order() == 2 && n <= 16);
    let size = 1usize << n;
    let mut singular = vec![false; size];
    let mut polar = vec![0u32; size];
    let f = space.spec().clone();
    for v in 0..size {
        let vec: Vec<FieldElem> = (0..n)
            .map(|i| if v >> i & 1 == 1 { FieldElem::ONE } else { FieldElem::ZERO })
            .collect();
        singular[v] = space.is_singular_vec(&vec);
        let mut mask = 0u32;
        for j in 0..n {
            let mut ej = vec![FieldElem::ZERO; n];
            ej[j] = FieldElem::ONE;
            if !space.form(&vec, &ej).is_zero() {
                mask |= 1 << j;
            }
        }
        polar[v] = mask;
    }
    let _ = f;
    for p1 in 0..n {
        for p2 in p1 + 1..n {
            let above = |p: usize| -> u32 { ((1u32 << n) - 1) & !((1 << (p + 1)) - 1) };
            let free1 = above(p1) & !(1 << p2);
            let free2 = above(p2);
            let mut s1 = 0u32;
            loop {
                let row1 = (1 << p1) | s1;
                if singular[row1 as usize] {
                    let b1 = polar[row1 as usize];
                    let mut s2 = 0u32;
                    loop {
                        let row2 = (1 << p2) | s2;
                        if singular[row2 as usize] && (row2 & b1).count_ones() % 2 == 0 {
                            visit(row1 as u64 | (row2 as u64) << n);
                        }
                        if s2 == free2 {
                            break;
                        }
                        s2 = (s2 | !free2).wrapping_add(1) & free2;
                    }
                }
                if s1 == free1 {
                    break;
                }
                s1 = (s1 | !free1).wrapping_add(1) & free1;
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuborbitReport {
    pub label: String,
    pub expected: String,
    pub actual: Option<String>,
    pub rep: Option<crate::linalg::SubspaceDef>,
    pub skipped: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RestrictReport {
    pub d5_orbit: u32,
    pub suborbits: Vec<SuborbitReport>,
    pub pass: bool,
}

/// Runs the restriction experiment for one orbit of the ambient rank-5
/// group: BFS from each bundled representative of the fixed-vector subgroup,
/// compare against the bundled stabilizer indices, and resolve split pairs
/// whose second representative is not bundled via [`search_split_partner`].
/// Rows whose expected size exceeds the key budget are reported as skipped.
pub fn restrict_d5_orbit(
    module: &CaseModule,
    table: &OrbitTable,
    d5_orbit: u32,
    cfg: &OrbitConfig,
) -> Result<RestrictReport> {
    if module.name != "spin16" {
        return usage("restrict_d5_orbit expects the spin16 module");
    }
    let q = module.spec.order() as u64;
    let group = product_order(&table.group, q)?;
    let rows: Vec<_> = table
        .rows
        .iter()
        .filter(|r| r.d5_orbit == Some(d5_orbit))
        .collect();
    if rows.is_empty() {
        return usage(format!("no bundled rows for orbit {d5_orbit}"));
    }
    let mut expected: Vec<(String, u64)> = vec![];
    for r in &rows {
        let idx = &group / r.stab.order(q)?;
        let idx: u64 = idx
            .try_into()
            .map_err(|_| Error::Internal("orbit size exceeds u64".into()))?;
        expected.push((r.label.clone(), idx));
    }
    let engine = Engine::new(module, 2)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;

    let mut reports: Vec<SuborbitReport> = vec![];
    let mut found_sets: Vec<DashSet<u64>> = vec![];
    let mut actual_sizes: Vec<Option<u64>> = vec![None; rows.len()];
    // first pass: rows with bundled representatives
    for (i, row) in rows.iter().enumerate() {
        let Some(rep) = &row.rep else { continue };
        if expected[i].1 > cfg.max_keys {
            continue;
        }
        let s = module.subspace(rep)?;
        check_start(module, &s)?;
        let key = engine.codec.key_of(&s);
        let found = DashSet::new();
        found.insert(key);
        let (size, _) = pool.install(|| engine.bfs(&found, key, None, cfg))?;
        actual_sizes[i] = Some(size);
        found_sets.push(found);
    }
    // second pass: search representatives for split partners. The finite
    // classes of the ambient group and of the fixed-vector subgroup can be
    // aligned, in which case no element of the ambient finite group maps one
    // subgroup class into the other; the search therefore scans the
    // canonical stream for a space with the sibling's white-point signature
    // that avoids every orbit already walked.
    for (i, row) in rows.iter().enumerate() {
        if row.rep.is_some() || expected[i].1 > cfg.max_keys {
            continue;
        }
        let sibling = rows
            .iter()
            .position(|r| r.rep.is_some() && r.d5_orbit == Some(d5_orbit));
        let Some(sib) = sibling else {
            return Err(Error::Internal(format!(
                "row {} has no sibling representative to search from",
                row.label
            )));
        };
        let base = module.subspace(rows[sib].rep.as_ref().unwrap())?;
        let rep = search_split_partner(module, &engine, &base, &found_sets)?;
        let key = engine.codec.key_of(&rep);
        let found = DashSet::new();
        found.insert(key);
        let (size, _) = pool.install(|| engine.bfs(&found, key, None, cfg))?;
        actual_sizes[i] = Some(size);
        found_sets.push(found);
        reports.push(SuborbitReport {
            label: row.label.clone(),
            expected: expected[i].1.to_string(),
            actual: Some(size.to_string()),
            rep: Some(rep.def()),
            skipped: false,
            pass: false, // filled below after multiset matching
        });
    }
    // assemble reports in row order with multiset size matching
    let mut final_reports = vec![];
    let mut remaining_actual: Vec<u64> = actual_sizes.iter().flatten().copied().collect();
    for (i, row) in rows.iter().enumerate() {
        let skipped = actual_sizes[i].is_none();
        let pass = match actual_sizes[i] {
            None => true, // skipped rows do not fail the experiment
            Some(_) => {
                // the computed sizes, as a multiset, must cover the expected
                // sizes of the attempted rows
                if let Some(pos) = remaining_actual.iter().position(|&a| a == expected[i].1) {
                    remaining_actual.swap_remove(pos);
                    true
                } else {
                    false
                }
            }
        };
        let rep_def = reports
            .iter()
            .find(|r| r.label == row.label)
            .and_then(|r| r.rep.clone())
            .or_else(|| {
                row.rep
                    .as_ref()
                    .map(|rep| module.subspace(rep).unwrap().def())
            });
        final_reports.push(SuborbitReport {
            label: row.label.clone(),
            expected: expected[i].1.to_string(),
            actual: actual_sizes[i].map(|s| s.to_string()),
            rep: rep_def,
            skipped,
            pass,
        });
    }
    let pass = final_reports.iter().all(|r| r.pass) && remaining_actual.is_empty();
    Ok(RestrictReport {
        d5_orbit,
        suborbits: final_reports,
        pass,
    })
}

/// Finds a representative of the missing finite class of a split orbit.
///
/// Stage 1 tries elements of the ambient group that move the fixed vector,
/// which works when the finite classes of the ambient group and the
/// subgroup are transverse. When they are aligned (as for the
/// <1, e1e2e3e4> orbit, whose twisted class has its two white points
/// conjugate over GF(q^2) instead of rational), stage 2 constructs
/// candidates directly: take a white spinor w over GF(q^2) from a seeded
/// word in the ambient generators, descend span{w, w^sigma} to GF(q), and
/// certify the candidate by its white-point count over GF(q^2) — the
/// finite shadow of the algebraic white-point invariant, which the
/// rational count does not see on twisted classes.
fn search_split_partner(
    module: &CaseModule,
    engine: &Engine<'_>,
    sibling: &Subspace,
    found_sets: &[DashSet<u64>],
) -> Result<Subspace> {
    let spec = &module.spec;
    let in_sets = |key: u64| found_sets.iter().any(|fs| fs.contains(&key));
    // stage 1: escape moves
    let escape = crate::clifford::d5_escape_generators(spec)?;
    for depth in 1..=2usize {
        let candidates: Vec<Subspace> = if depth == 1 {
            escape
                .iter()
                .filter_map(|g| crate::linalg::act(g, sibling).ok())
                .collect()
        } else {
            let mut v = vec![];
            for g in &escape {
                for h in &escape {
                    if let Ok(s) =
                        crate::linalg::act(g, sibling).and_then(|s| crate::linalg::act(h, &s))
                    {
                        v.push(s);
                    }
                }
            }
            v
        };
        for cand in candidates {
            if module.space.is_totally_singular(&cand)
                && !in_sets(engine.codec.key_of(&cand))
                && crate::clifford::white_point_count(spec, &cand)?
                    == crate::clifford::white_point_count(spec, sibling)?
            {
                return Ok(cand);
            }
        }
    }
    // stage 2: descent of conjugate white-point pairs from GF(q^2)
    if spec.degree() != 1 {
        return Err(Error::Internal(
            "split-partner descent implemented for prime fields only".into(),
        ));
    }
    let q = spec.order() as u64;
    let ext = crate::gf::FieldSpec::new(spec.p(), 2)?;
    let target = white_count_over_ext(&ext, q, sibling)?;
    // deterministic word generator (SplitMix64)
    let mut state: u64 = 0x9e3779b97f4a7c15;
    let mut next = move || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    };
    let pairs: Vec<(usize, usize)> = (1..=10usize)
        .flat_map(|i| (i + 1..=10).map(move |j| (i, j)))
        .filter(|(i, j)| j - i != 5)
        .collect();
    for _trial in 0..5000 {
        // w = (random word) · 1 over GF(q^2)
        let mut w = crate::clifford::Spinor::unit(0);
        for _ in 0..8 {
            let (i, j) = pairs[(next() % pairs.len() as u64) as usize];
            let t = ext.elem((1 + next() % (ext.order() as u64 - 1)) as u32)?;
            let g = crate::clifford::d5_root_element(&ext, i, j, t);
            w = crate::clifford::spin_action(&g, &w)?;
        }
        // conjugate pair and rational basis u1 = w + w^s, u2 = c w + c^s w^s
        let wc = frobenius_spinor(&ext, &w);
        let c = ext.primitive();
        let cc = ext.frobenius(c, 1);
        let mut u1 = vec![FieldElem::ZERO; 16];
        let mut u2 = vec![FieldElem::ZERO; 16];
        for idx in 0..16 {
            u1[idx] = ext.add(w.coords[idx], wc.coords[idx]);
            u2[idx] = ext.add(ext.mul(c, w.coords[idx]), ext.mul(cc, wc.coords[idx]));
        }
        // entries must be rational (fixed by frobenius)
        let rational = |v: &[FieldElem]| v.iter().all(|&x| ext.frobenius(x, 1) == x && (x.0 as u64) < q);
        if !rational(&u1) || !rational(&u2) {
            continue;
        }
        let rows: Vec<Vec<FieldElem>> = vec![
            u1.iter().map(|&x| FieldElem(x.0)).collect(),
            u2.iter().map(|&x| FieldElem(x.0)).collect(),
        ];
        let Ok(cand) = Subspace::canonicalize(spec.clone(), 16, &rows) else {
            continue;
        };
        if cand.dim() != 2 || !module.space.is_totally_singular(&cand) {
            continue;
        }
        if in_sets(engine.codec.key_of(&cand)) {
            continue;
        }
        if white_count_over_ext(&ext, q, &cand)? == target {
            return Ok(cand);
        }
    }
    Err(Error::Internal(
        "no representative with the sibling's extension-field white signature found".into(),
    ))
}

/// Coordinate-wise Frobenius on a spinor over an extension field (the spin
/// basis is rational, so this realizes the Frobenius of the rational
/// structure).
fn frobenius_spinor(
    ext: &std::sync::Arc<crate::gf::FieldSpec>,
    w: &crate::clifford::Spinor,
) -> crate::clifford::Spinor {
    let mut out = crate::clifford::Spinor::zero();
    for i in 0..16 {
        out.coords[i] = ext.frobenius(w.coords[i], 1);
    }
    out
}

/// White points of a rational 2-space counted over the quadratic extension:
/// a class function separating the ambient group's orbits even where the
/// rational white count degenerates on twisted classes.
fn white_count_over_ext(
    ext: &std::sync::Arc<crate::gf::FieldSpec>,
    q: u64,
    s: &Subspace,
) -> Result<usize> {
    // subfield values 0..q-1 embed identically (constant polynomials)
    let lift = |v: &[FieldElem]| -> Vec<FieldElem> { v.iter().map(|&x| FieldElem(x.0)).collect() };
    let u = lift(s.basis_row(0));
    let v = lift(s.basis_row(1));
    let mut count = 0;
    let mut points: Vec<Vec<FieldElem>> = vec![v.clone()];
    for lam in ext.elements() {
        points.push(
            (0..16)
                .map(|i| ext.add(u[i], ext.mul(lam, v[i])))
                .collect(),
        );
    }
    for p in points {
        if crate::clifford::classify_spinor(ext, &crate::clifford::Spinor::from_slice(&p))?
            == crate::clifford::SpinorClass::White
        {
            count += 1;
        }
    }
    let _ = q;
    Ok(count)
}

/// Writes a key dump: magic "TSOK", u32 n, u32 k, u32 q (little-endian),
/// then each key as packed RREF rows (each row padded to whole bytes).
pub fn dump_keys(
    path: &std::path::Path,
    module: &CaseModule,
    k: usize,
    keys: &DashSet<u64>,
) -> Result<()> {
    use std::io::Write;
    let n = module.dim;
    let q = module.spec.order();
    let bits = Subspace::bits_per_entry(q);
    let row_bytes = (n as u32 * bits).div_ceil(8) as usize;
    let codec = KeyCodec::new(n, k, q)?;
    let mut sorted: Vec<u64> = keys.iter().map(|r| *r).collect();
    sorted.sort_unstable();
    let file = std::fs::File::create(path).map_err(|e| Error::Usage(e.to_string()))?;
    let mut w = std::io::BufWriter::new(file);
    let hdr = |v: u32| v.to_le_bytes();
    w.write_all(b"TSOK").map_err(|e| Error::Internal(e.to_string()))?;
    for v in [n as u32, k as u32, q] {
        w.write_all(&hdr(v)).map_err(|e| Error::Internal(e.to_string()))?;
    }
    let mut entries = vec![0u16; n * k];
    for key in sorted {
        codec.unpack_entries(key, &mut entries);
        for r in 0..k {
            let mut row_buf = vec![0u8; row_bytes];
            for (c, &e) in entries[r * n..(r + 1) * n].iter().enumerate() {
                let off = c as u32 * bits;
                let mut v = e as u32;
                for b in 0..bits {
                    if v & 1 == 1 {
                        row_buf[((off + b) / 8) as usize] |= 1 << ((off + b) % 8);
                    }
                    v >>= 1;
                }
            }
            w.write_all(&row_buf).map_err(|e| Error::Internal(e.to_string()))?;
        }
    }
    Ok(())
}
