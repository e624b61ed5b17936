//! Command-line front end tying the library into reproducible verification
//! workflows with machine-readable JSON output.
//!
//! Exit codes: 0 when every verdict passes, 1 on a failed verdict or
//! internal error, 2 on usage errors (unknown case, bad q), 3 when a run
//! exceeds its memory budget.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use tsorbits_core::casemods::{build_case, w2_theta, CaseName};
use tsorbits_core::clifford;
use tsorbits_core::error::Error;
use tsorbits_core::gf::FieldElem;
use tsorbits_core::lietype;
use tsorbits_core::linalg::{Subspace, SubspaceDef};
use tsorbits_core::orbits::{self, OrbitConfig};
use tsorbits_core::quadspace::{count_ts, dim_ts_variety, detect_invariant_form, FormKind};

#[derive(Parser)]
#[command(
    name = "tsorbits",
    about = "Exact orbit enumeration on totally singular subspaces over small finite fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunOpts {
    /// worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// memory budget in MiB (default: env SO_MEMORY_BUDGET_MB or 2048)
    #[arg(long)]
    memory_budget_mb: Option<u64>,
}

impl RunOpts {
    fn config(&self) -> OrbitConfig {
        let mb = self
            .memory_budget_mb
            .or_else(|| {
                std::env::var("SO_MEMORY_BUDGET_MB")
                    .ok()
                    .and_then(|v| v.parse().ok())
            })
            .unwrap_or(2048);
        let mut cfg = OrbitConfig::with_memory_budget_mb(mb);
        if let Some(t) = self.threads {
            cfg.threads = t.max(1);
        }
        cfg
    }
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form count and variety dimension of totally singular k-spaces
    Count {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: u64,
        /// Witt index
        #[arg(long)]
        m: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        q: u64,
    },
    /// BFS orbit enumeration for a case module
    Enumerate {
        #[arg(long)]
        case: String,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        k: usize,
        /// start from this subspace (JSON file) instead of partitioning
        #[arg(long)]
        start: Option<PathBuf>,
        /// full sweep for the spin module (default runs per-orbit BFS from
        /// bundled representatives)
        #[arg(long)]
        heavy: bool,
        /// dump the orbit key set (single-orbit runs only)
        #[arg(long)]
        emit_keys: Option<PathBuf>,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Verify a bundled orbit table's sum identity at q
    VerifyTable {
        name: String,
        #[arg(long)]
        q: u64,
        /// load tables from this directory instead of the bundled data
        #[arg(long)]
        tables_dir: Option<PathBuf>,
    },
    /// Classify every nonzero half-spinor over GF(q)
    ClassifySpinors {
        #[arg(long)]
        q: u64,
        /// stream (spinor, class) rows to this CSV file
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Solve for the invariant bilinear form of a case's generators
    DetectForm {
        #[arg(long)]
        case: String,
        #[arg(long)]
        q: u64,
    },
    /// Screen the bundled candidate list against the dense-orbit bounds
    Screen {
        #[arg(long)]
        table1: bool,
    },
    /// The one-parameter family of totally singular 2-spaces in the triple
    /// tensor module: total singularity, pairwise orbit distinctness, and
    /// the unipotent stabilizer against its quadratic system
    DenseFamily {
        #[arg(long)]
        q: u64,
        #[command(flatten)]
        run: RunOpts,
    },
}

fn parse_kind(s: &str) -> Result<FormKind, Error> {
    match s {
        "orthogonal" => Ok(FormKind::Orthogonal),
        "symplectic" => Ok(FormKind::Symplectic),
        _ => Err(Error::Usage(format!(
            "kind must be 'orthogonal' or 'symplectic', got '{s}'"
        ))),
    }
}

fn gram_json(m: &tsorbits_core::linalg::Mat) -> Value {
    let rows: Vec<Vec<u32>> = (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| m[(r, c)].0 as u32).collect())
        .collect();
    json!(rows)
}

fn subspace_json(s: &Subspace) -> Value {
    serde_json::to_value(s.def()).unwrap()
}

fn run(cli: Cli) -> Result<(Value, Option<bool>), Error> {
    match cli.command {
        Command::Count { kind, n, m, k, q } => {
            let kind = parse_kind(&kind)?;
            let count = count_ts(kind, n, m, k, q)?;
            let dim = dim_ts_variety(kind, n as i64, k as i64);
            Ok((
                json!({
                    "count": count.to_string(),
                    "dim_variety": dim,
                }),
                None,
            ))
        }
        Command::Enumerate {
            case,
            q,
            k,
            start,
            heavy,
            emit_keys,
            run,
        } => {
            let name = CaseName::parse(&case)?;
            let module = build_case(name, q)?;
            let mut cfg = run.config();
            if let Some(path) = start {
                // single-orbit run from an explicit representative
                cfg.retain_keys = emit_keys.is_some();
                let raw = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Usage(format!("cannot read start file: {e}")))?;
                let def: SubspaceDef = serde_json::from_str(&raw)
                    .map_err(|e| Error::Usage(format!("bad subspace JSON: {e}")))?;
                let s = Subspace::from_def(&def)?;
                let out = orbits::orbit_of(&module, &s, &cfg)?;
                if let Some(path) = emit_keys {
                    orbits::dump_keys(&path, &module, k, out.keys.as_ref().unwrap())?;
                }
                return Ok((
                    json!({
                        "case": case, "q": q.to_string(), "k": k,
                        "orbit_size": out.size.to_string(),
                        "start": subspace_json(&s),
                    }),
                    None,
                ));
            }
            if emit_keys.is_some() {
                return Err(Error::Usage("--emit-keys requires --start (single-orbit runs)".into()));
            }
            if name == CaseName::Spin16 && !heavy {
                // per-orbit runs from the bundled representatives, capped at
                // 2M keys per orbit; --heavy does the full sweep
                cfg.max_keys = cfg.max_keys.min(2_000_000);
                let table = lietype::bundled_table("b4")?;
                let mut reports = vec![];
                let mut all_pass = true;
                let d5_orbits: Vec<u32> = {
                    let mut v: Vec<u32> =
                        table.rows.iter().filter_map(|r| r.d5_orbit).collect();
                    v.sort_unstable();
                    v.dedup();
                    v
                };
                for d5 in d5_orbits {
                    let r = orbits::restrict_d5_orbit(&module, &table, d5, &cfg)?;
                    all_pass &= r.pass;
                    reports.push(serde_json::to_value(&r).unwrap());
                }
                return Ok((
                    json!({
                        "case": case, "q": q.to_string(), "k": k,
                        "mode": "per-orbit",
                        "restrictions": reports,
                    }),
                    Some(all_pass),
                ));
            }
            let part = orbits::partition_ts_grassmannian(&module, k, &cfg)?;
            let expected = count_ts(
                module.space.kind(),
                module.dim as u64,
                module.space.witt_index() as u64,
                k as u64,
                q,
            )?;
            let pass = part.total == expected;
            let orbits_json: Vec<Value> = part
                .orbits
                .iter()
                .map(|(rep, size)| {
                    json!({ "size": size.to_string(), "rep": subspace_json(rep) })
                })
                .collect();
            Ok((
                json!({
                    "case": case, "q": q.to_string(), "k": k,
                    "orbit_count": part.orbits.len(),
                    "orbits": orbits_json,
                    "total": part.total.to_string(),
                    "expected_total": expected.to_string(),
                }),
                Some(pass),
            ))
        }
        Command::VerifyTable { name, q, tables_dir } => {
            let table = match tables_dir {
                Some(dir) => lietype::load_table(&dir.join(format!("{name}.json")))?,
                None => lietype::bundled_table(&name)?,
            };
            let report = lietype::verify_sum_identity(&table, q)?;
            let pass = report.pass;
            Ok((serde_json::to_value(&report).unwrap(), Some(pass)))
        }
        Command::ClassifySpinors { q, csv } => {
            let spec = tsorbits_core::gf::FieldSpec::for_order(q)?;
            let qe = spec.order() as u64;
            let total = qe.checked_pow(16).ok_or_else(|| {
                Error::Usage("spinor census limited to q with q^16 < 2^64".into())
            })?;
            if total > 1u64 << 32 {
                return Err(Error::Usage(format!(
                    "spinor census over GF({q}) would visit {total} spinors; not supported"
                )));
            }
            let mut writer: Option<std::io::BufWriter<std::fs::File>> = match csv {
                Some(p) => Some(std::io::BufWriter::new(
                    std::fs::File::create(p).map_err(|e| Error::Usage(e.to_string()))?,
                )),
                None => None,
            };
            use std::io::Write;
            if let Some(w) = writer.as_mut() {
                writeln!(w, "spinor,class").map_err(|e| Error::Internal(e.to_string()))?;
            }
            let mut white = 0u64;
            let mut grey = 0u64;
            for idx in 1..total {
                let mut coords = [FieldElem::ZERO; 16];
                let mut rem = idx;
                for c in coords.iter_mut() {
                    *c = spec.elem((rem % qe) as u32)?;
                    rem /= qe;
                }
                let x = clifford::Spinor { coords };
                let class = clifford::classify_spinor(&spec, &x)?;
                match class {
                    clifford::SpinorClass::White => white += 1,
                    clifford::SpinorClass::Grey => grey += 1,
                }
                if let Some(w) = writer.as_mut() {
                    let coord_str: Vec<String> =
                        coords.iter().map(|c| c.0.to_string()).collect();
                    writeln!(w, "{},{}", coord_str.join("-"), class.as_str())
                        .map_err(|e| Error::Internal(e.to_string()))?;
                }
            }
            // independent cross-check: the two orbit sizes as group-order
            // quotients of the rank-5 spin group
            use lietype::{group_order, Family, GroupSpec};
            let d5 = group_order(&GroupSpec::new(Family::D, 5), q)?;
            let qb = num_bigint::BigUint::from(q);
            let white_expect = &d5 / (qb.pow(10) * group_order(&GroupSpec::new(Family::A, 4), q)?);
            let grey_expect = &d5 / (qb.pow(8) * group_order(&GroupSpec::new(Family::C, 3), q)?);
            let pass = num_bigint::BigUint::from(white) == white_expect
                && num_bigint::BigUint::from(grey) == grey_expect;
            Ok((
                json!({
                    "q": q.to_string(),
                    "white": white.to_string(),
                    "grey": grey.to_string(),
                    "total": (white + grey).to_string(),
                    "white_expected": white_expect.to_string(),
                    "grey_expected": grey_expect.to_string(),
                }),
                Some(pass),
            ))
        }
        Command::DetectForm { case, q } => {
            let name = CaseName::parse(&case)?;
            let module = build_case(name, q)?;
            let det = detect_invariant_form(&module.generators)?;
            let value = match det {
                tsorbits_core::quadspace::FormDetection::None => json!({"kind": "none"}),
                tsorbits_core::quadspace::FormDetection::Ambiguous { dim } => {
                    json!({"kind": "ambiguous", "dim": dim})
                }
                tsorbits_core::quadspace::FormDetection::Found { kind, gram } => json!({
                    "kind": match kind {
                        tsorbits_core::quadspace::DetectedKind::Symmetric => "symmetric",
                        tsorbits_core::quadspace::DetectedKind::Alternating => "alternating",
                    },
                    "gram": gram_json(&gram),
                }),
            };
            Ok((json!({"case": case, "q": q.to_string(), "form": value}), None))
        }
        Command::Screen { table1 } => {
            if !table1 {
                return Err(Error::Usage("screen currently only supports --table1".into()));
            }
            let mut rows = vec![];
            let mut all = true;
            for row in lietype::candidate_rows() {
                for &k in row.ks {
                    let b = lietype::screen_bounds(row.dim_g, row.dim_v, k);
                    all &= b.all_pass();
                    rows.push(json!({
                        "group": row.group, "dim_g": row.dim_g,
                        "module": row.module, "dim_v": row.dim_v, "k": k,
                        "pass_k_spaces": b.pass_k_spaces,
                        "pass_k_bound": b.pass_k_bound,
                        "pass_super": b.pass_super,
                        "max_k": lietype::max_k(row.dim_g),
                    }));
                }
            }
            Ok((json!({ "rows": rows }), Some(all)))
        }
        Command::DenseFamily { q, run } => {
            let module = build_case(CaseName::A1Cubed, q)?;
            let f = module.spec.clone();
            let cfg = run.config();
            let thetas: Vec<FieldElem> = f
                .elements()
                .filter(|t| !t.is_zero() && *t != FieldElem::ONE)
                .collect();
            if thetas.is_empty() {
                return Err(Error::Usage("dense-family needs q >= 4".into()));
            }
            let mut family = vec![];
            let mut pass = true;
            for &theta in &thetas {
                let w = w2_theta(&module, theta)?;
                let ts = module.space.is_totally_singular(&w);
                pass &= ts;
                // brute-force unipotent stabilizer vs the quadratic system
                // (theta+1)gamma + theta beta + alpha = 0 and
                // alpha + beta + beta gamma + alpha gamma + alpha beta = 0
                let mut brute = vec![];
                let mut system = vec![];
                for a in f.elements() {
                    for b in f.elements() {
                        for c in f.elements() {
                            let u = tsorbits_core::casemods::a1cubed_unipotent(&module, a, b, c)?;
                            if tsorbits_core::linalg::act(&u, &w)? == w {
                                brute.push((a.0, b.0, c.0));
                            }
                            let tp1 = f.add(theta, FieldElem::ONE);
                            let e1 = f.add(f.add(f.mul(tp1, c), f.mul(theta, b)), a);
                            let e2 = f.add(
                                f.add(f.add(a, b), f.mul(b, c)),
                                f.add(f.mul(a, c), f.mul(a, b)),
                            );
                            if e1.is_zero() && e2.is_zero() {
                                system.push((a.0, b.0, c.0));
                            }
                        }
                    }
                }
                let stab_match = brute == system;
                pass &= stab_match;
                family.push(json!({
                    "theta": theta.0,
                    "totally_singular": ts,
                    "unipotent_stabilizer_size": brute.len(),
                    "stabilizer_matches_quadratic_system": stab_match,
                }));
            }
            // pairwise distinctness of orbits
            let mut distinct = true;
            for i in 0..thetas.len() {
                for j in i + 1..thetas.len() {
                    let wi = w2_theta(&module, thetas[i])?;
                    let wj = w2_theta(&module, thetas[j])?;
                    if orbits::same_orbit(&module, &wi, &wj, &cfg)? {
                        distinct = false;
                    }
                }
            }
            pass &= distinct;
            Ok((
                json!({
                    "q": q.to_string(),
                    "family": family,
                    "pairwise_distinct_orbits": distinct,
                }),
                Some(pass),
            ))
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(cli) {
        Ok((mut value, pass)) => {
            if let Value::Object(map) = &mut value {
                if let Some(p) = pass {
                    map.insert("pass".into(), json!(p));
                }
                map.insert("wall_ms".into(), json!(start.elapsed().as_millis() as u64));
            }
            println!("{}", serde_json::to_string_pretty(&value).unwrap());
            std::process::exit(if pass == Some(false) { 1 } else { 0 });
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Usage(_) | Error::Domain(_) => 2,
                Error::Resource { .. } => 3,
                Error::Internal(_) => 1,
            };
            std::process::exit(code);
        }
    }
}
