//! Acceptance suite: every criterion runs at its stated tolerance and
//! runtime budget and prints one PASS/FAIL line. The process exits non-zero
//! if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use finetti_core::algebra::verify::{verify_quotient, verify_vanishing_one, Outcome};
use finetti_core::algebra::{verify_coproduct, IdealCache, RelationSchema, SchemaName, Status};
use finetti_core::cumulants::{cumulants_from_moments, moments_from_cumulants, CumulantKind, CumulantTable, MomentFunctional};
use finetti_core::independence::{build_independent_moments, test_mixed_vanishing};
use finetti_core::partitions::{enumerate_partitions, words_of_length, words_up_to, FamilyTag, IndexWord};
use finetti_core::rational::{format_rational, int, ratio, zero};
use finetti_core::symmetry::{check_invariance_exact, check_invariance_mc, GroupFamily, GroupTag, McConfig};
use finetti_core::Rational;
use finetti_validation as oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn family(s: &str) -> FamilyTag {
    s.parse().expect("family tag")
}

fn random_rational(rng: &mut impl Rng) -> Rational {
    ratio(rng.random_range(-6..=6), rng.random_range(1..=5))
}

fn c1_partition_counts() -> Result<String, String> {
    let bell = [1u64, 2, 5, 15, 52, 203, 877, 4140];
    let catalan = [1u64, 2, 5, 14, 42, 132, 429, 1430];
    for k in 1..=8usize {
        let all = enumerate_partitions(k, family("p")).len();
        let nc = enumerate_partitions(k, family("nc")).len();
        let int_ = enumerate_partitions(k, family("i")).len();
        ensure(all as u64 == bell[k - 1] && all == oracle::count(k, "all", "any"), || format!("ALL({k}) = {all}"))?;
        ensure(nc as u64 == catalan[k - 1] && nc == oracle::count(k, "nc", "any"), || format!("NC({k}) = {nc}"))?;
        ensure(int_ == 1 << (k - 1) && int_ == oracle::count(k, "interval", "any"), || format!("I({k}) = {int_}"))?;
        // every enumerated partition passes the oracle's own membership test
        for (tag, lattice) in [("nc", "nc"), ("i", "interval")] {
            for p in enumerate_partitions(k, family(tag)) {
                let blocks = p.blocks().to_vec();
                let ok = match lattice {
                    "nc" => !oracle::has_crossing(&blocks),
                    _ => oracle::is_interval(&blocks),
                };
                ensure(ok, || format!("{p} wrongly listed in {tag}({k})"))?;
            }
        }
    }
    let pairs = [1u64, 3, 15, 105];
    for m in 1..=4usize {
        let p2 = enumerate_partitions(2 * m, family("p_2")).len();
        let i2 = enumerate_partitions(2 * m, family("i_2")).len();
        ensure(p2 as u64 == pairs[m - 1] && p2 == oracle::count(2 * m, "all", "eq2"), || format!("P_2({}) = {p2}", 2 * m))?;
        ensure(i2 == 1 && i2 == oracle::count(2 * m, "interval", "eq2"), || format!("I_2({}) = {i2}", 2 * m))?;
    }
    Ok("Bell, Catalan, 2^(k-1) and pairing counts match for k <= 8".into())
}

fn c2_round_trip() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checked = 0;
    for kind in CumulantKind::ALL {
        for t in 0..100usize {
            let n = 1 + t % 3;
            let k = 1 + (t / 3) % 6;
            let mut cum = CumulantTable::new(kind, n, k);
            for w in words_up_to(n, k) {
                cum.set(w, random_rational(&mut rng)).unwrap();
            }
            let back = cumulants_from_moments(&moments_from_cumulants(&cum), kind);
            ensure(back == cum, || format!("{kind} cumulants -> moments -> cumulants differs (n={n}, K={k})"))?;

            let mut mom = MomentFunctional::new(n, k);
            for w in words_up_to(n, k) {
                mom.set(w, random_rational(&mut rng)).unwrap();
            }
            let back = moments_from_cumulants(&cumulants_from_moments(&mom, kind));
            ensure(back == mom, || format!("{kind} moments -> cumulants -> moments differs (n={n}, K={k})"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} random tables per direction, exact equality"))
}

fn c3_central_laws() -> Result<String, String> {
    let expected: [(CumulantKind, [u64; 4], &str); 3] = [
        (CumulantKind::Free, [1, 2, 5, 14], "nc_2"),
        (CumulantKind::Classical, [1, 3, 15, 105], "p_2"),
        (CumulantKind::Boolean, [1, 1, 1, 1], "i_2"),
    ];
    for (kind, values, fam) in expected {
        let mut c = vec![zero(); 8];
        c[1] = int(1);
        let mom = moments_from_cumulants(&CumulantTable::single_variable(kind, &c));
        for m in 1..=4usize {
            let got = mom.get(&IndexWord::from(vec![1; 2 * m]));
            let pairings = enumerate_partitions(2 * m, family(fam)).len() as i64;
            ensure(got == int(values[m - 1] as i64) && got == int(pairings), || {
                format!("{kind} m{} = {}", 2 * m, format_rational(&got))
            })?;
            ensure(mom.get(&IndexWord::from(vec![1; 2 * m - 1])) == zero(), || format!("{kind} odd moment nonzero"))?;
        }
    }
    let cat: Vec<u64> = (1..=4).map(oracle::catalan).collect();
    let dfact: Vec<u64> = (1..=4).map(oracle::odd_double_factorial).collect();
    ensure(cat == [1, 2, 5, 14] && dfact == [1, 3, 15, 105], || "closed forms disagree".into())?;
    Ok("semicircle 1,2,5,14; Gaussian 1,3,15,105; Bernoulli 1,1,1,1".into())
}

fn c4_mixed_cumulants() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut detected = 0;
    for kind in CumulantKind::ALL {
        for k in 2..=6usize {
            let marginals: Vec<CumulantTable> = (0..2)
                .map(|_| {
                    let c: Vec<Rational> = (0..k).map(|_| random_rational(&mut rng)).collect();
                    CumulantTable::single_variable(kind, &c)
                })
                .collect();
            let mom = build_independent_moments(&marginals, kind).map_err(|e| e.to_string())?;
            let report = test_mixed_vanishing(&mom, kind, &zero());
            ensure(report.passed(), || format!("{kind} K={k}: {} nonzero mixed cumulants", report.offenders.len()))?;

            let mixed: Vec<IndexWord> = words_up_to(2, k).filter(IndexWord::is_mixed).collect();
            let target = mixed[rng.random_range(0..mixed.len())].clone();
            let mut bumped = mom.clone();
            bumped.set(target.clone(), mom.get(&target) + ratio(1, 1000)).unwrap();
            let report = test_mixed_vanishing(&bumped, kind, &zero());
            ensure(!report.passed(), || format!("{kind} K={k}: perturbing {target} went unnoticed"))?;
            detected += 1;
        }
    }
    Ok(format!("all mixed cumulants exactly 0; {detected}/{detected} perturbations detected"))
}

/// Kernel-dependent table with `μ` zero on words with an odd letter count
/// when `even_only`.
fn kernel_table(n: usize, k: usize, even_only: bool, rng: &mut impl Rng) -> MomentFunctional {
    let mut values = std::collections::HashMap::new();
    let mut mom = MomentFunctional::new(n, k);
    for w in oracle::words(n, k) {
        let odd = (1..=n).any(|x| w.iter().filter(|&&y| y == x).count() % 2 == 1);
        let v = if even_only && odd {
            zero()
        } else {
            values.entry(oracle::pattern(&w)).or_insert_with(|| random_rational(rng)).clone()
        };
        mom.set(IndexWord::from(w), v).unwrap();
    }
    mom
}

fn c5_exact_equivalences() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cases = 0;
    for n in 1..=3usize {
        for k in 1..=4usize {
            for (fam, even_only) in [(GroupFamily::Sym, false), (GroupFamily::Hyperoct, true)] {
                let base = kernel_table(n, k, even_only, &mut rng);
                let mut tables = vec![base.clone()];
                // single-word perturbations
                for w in words_up_to(n, k) {
                    let mut t = base.clone();
                    t.set(w.clone(), base.get(&w) + int(1)).unwrap();
                    tables.push(t);
                }
                // whole-pattern perturbations keep kernel dependence
                let mut patterns: Vec<Vec<usize>> = oracle::words(n, k).iter().map(|w| oracle::pattern(w)).collect();
                patterns.sort();
                patterns.dedup();
                for p in &patterns {
                    let mut t = base.clone();
                    for w in oracle::words(n, k).into_iter().filter(|w| &oracle::pattern(w) == p) {
                        let w = IndexWord::from(w);
                        t.set(w.clone(), base.get(&w) + int(2)).unwrap();
                    }
                    tables.push(t);
                }
                for t in &tables {
                    let expected = oracle::kernel_dependent(t, n, k)
                        && (fam == GroupFamily::Sym || oracle::odd_profile_vanishes(t, n, k));
                    let got = check_invariance_exact(t, GroupTag::new(fam, n), k).map_err(|e| e.to_string())?.passed;
                    ensure(got == expected, || format!("{fam} n={n} K={k}: check says {got}, oracle says {expected}"))?;
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} tables, verdicts agree with the kernel/odd-profile oracle"))
}

fn c6_monte_carlo_orth() -> Result<String, String> {
    let config = McConfig { samples: 10_000, seed: 6, tol: 1e-9 };
    let gauss = CumulantTable::single_variable(CumulantKind::Classical, &[int(0), int(1), int(0), int(0)]);
    let mom = build_independent_moments(&vec![gauss; 3], CumulantKind::Classical).map_err(|e| e.to_string())?;
    let r = check_invariance_mc(&mom, GroupTag::new(GroupFamily::Orth, 3), 4, &config).map_err(|e| e.to_string())?;
    ensure(r.passed, || format!("Gaussian failed at {:?}", r.failing_words()))?;

    let skew = CumulantTable::single_variable(CumulantKind::Classical, &[int(0), int(1), int(1)]);
    let mom = build_independent_moments(&vec![skew; 3], CumulantKind::Classical).map_err(|e| e.to_string())?;
    let r = check_invariance_mc(&mom, GroupTag::new(GroupFamily::Orth, 3), 3, &config).map_err(|e| e.to_string())?;
    ensure(!r.passed, || "third-cumulant table passed".into())?;
    Ok(format!(
        "Gaussian passes (n=3, K=4); c3=1 fails on {} words; 10^4 samples, seed 6",
        r.failing_words().len()
    ))
}

fn c7_coproduct() -> Result<String, String> {
    let cache = IdealCache::new();
    let mut lines = Vec::new();
    let runs = [
        (SchemaName::POrthogonal, 2, 5),
        (SchemaName::PCubic, 2, 5),
        (SchemaName::PBistochastic, 2, 5),
        (SchemaName::PPrime, 2, 5),
        (SchemaName::Magic, 2, 4),
        (SchemaName::Magic, 3, 4),
    ];
    for (name, n, d) in runs {
        let r = verify_coproduct(RelationSchema::new(name, n), d, &cache).map_err(|e| e.to_string())?;
        ensure(r.status() == Status::Pass && r.all_certificates_valid(), || {
            format!("{name} n={n}: {}/{} certified", r.certified(), r.outcomes.len())
        })?;
        lines.push(format!("{name}@{n}:{}", r.outcomes.len()));
    }
    Ok(format!("all relations certified [{}]", lines.join(" ")))
}

fn c8_vanishing() -> Result<String, String> {
    let n = 2;
    let mut summary = Vec::new();
    let mut failures = Vec::new();
    for tag in ["i_2", "i", "i_h", "i_b"] {
        let fam = family(tag);
        let schema = RelationSchema::new(finetti_core::algebra::schema_for_family(fam).unwrap(), n);
        let cache = IdealCache::new();
        let (mut total, mut ok, mut refuted) = (0, 0, 0);
        for k in 1..=4usize {
            for pi in enumerate_partitions(k, fam) {
                for j in words_of_length(n, k) {
                    let o = verify_vanishing_one(schema, fam, &pi, &j, k + 2, &cache).map_err(|e| e.to_string())?;
                    total += 1;
                    match &o.outcome {
                        Outcome::Certified(c) if c.verify() => ok += 1,
                        Outcome::Certified(_) => failures.push(format!("{tag} {}: certificate does not re-expand", o.label)),
                        Outcome::Refuted { representation, value } => {
                            refuted += 1;
                            if failures.len() < 3 {
                                failures.push(format!(
                                    "{tag} {} refuted by {representation} (entry {})",
                                    o.label,
                                    format_rational(value)
                                ));
                            }
                        }
                        Outcome::NotFound { max_degree } => {
                            failures.push(format!("{tag} {}: no certificate up to D={max_degree}", o.label))
                        }
                    }
                }
            }
        }
        summary.push(format!("{tag}: {ok}/{total}{}", if refuted > 0 { format!(" ({refuted} refuted)") } else { String::new() }));
    }
    let line = summary.join(", ");
    if failures.is_empty() {
        Ok(line)
    } else {
        Err(format!("{line}; e.g. {}", failures.join("; ")))
    }
}

fn c9_boolean_invariance() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let b: Vec<Rational> = (0..3).map(|_| random_rational(&mut rng)).collect();
    let marg = CumulantTable::single_variable(CumulantKind::Boolean, &b);
    let mom = build_independent_moments(&[marg.clone(), marg], CumulantKind::Boolean).map_err(|e| e.to_string())?;
    let cache = IdealCache::new();
    let r = finetti_core::symmetry::quantum_invariance_certificate(
        &mom,
        RelationSchema::new(SchemaName::PMagic, 2),
        3,
        5,
        &cache,
    )
    .map_err(|e| e.to_string())?;
    ensure(r.status() == Status::Pass && r.all_certificates_valid(), || {
        format!("{}/{} words certified", r.certified(), r.outcomes.len())
    })?;
    let shown: Vec<String> = b.iter().map(format_rational).collect();
    Ok(format!("{} words certified for boolean cumulants ({})", r.outcomes.len(), shown.join(", ")))
}

fn c10_quotient_chain() -> Result<String, String> {
    let cache = IdealCache::new();
    let mut verdicts = Vec::new();
    let mut failed = false;
    for n in [2usize, 3] {
        for (quotient, cover) in [(SchemaName::Magic, SchemaName::MagicPrime), (SchemaName::MagicPrime, SchemaName::Bistochastic)] {
            let r = verify_quotient(quotient, cover, n, 4, &cache).map_err(|e| e.to_string())?;
            let status = r.status();
            failed |= status != Status::Pass || !r.all_certificates_valid();
            let why = r
                .outcomes
                .iter()
                .find_map(|o| match &o.outcome {
                    Outcome::Refuted { representation, .. } => Some(format!(" [{} refuted by {representation}]", o.target)),
                    _ => None,
                })
                .unwrap_or_default();
            verdicts.push(format!("{quotient} ⊂ {cover} @n={n}: {status:?}{why}"));
        }
    }
    let line = verdicts.join("; ");
    if failed {
        Err(line)
    } else {
        Ok(line)
    }
}

fn main() {
    let criteria: [(u8, &str, Duration, Check); 10] = [
        (1, "partition counts", Duration::from_secs(5), c1_partition_counts),
        (2, "moment/cumulant round trip", Duration::from_secs(30), c2_round_trip),
        (3, "central-law moments", Duration::from_secs(5), c3_central_laws),
        (4, "mixed-cumulant vanishing", Duration::from_secs(30), c4_mixed_cumulants),
        (5, "exact invariance equivalences", Duration::from_secs(60), c5_exact_equivalences),
        (6, "Monte Carlo ORTH", Duration::from_secs(60), c6_monte_carlo_orth),
        (7, "coproduct closure", Duration::from_secs(300), c7_coproduct),
        (8, "vanishing identities", Duration::from_secs(600), c8_vanishing),
        (9, "boolean i.i.d. invariance", Duration::from_secs(300), c9_boolean_invariance),
        (10, "quotient chain", Duration::from_secs(300), c10_quotient_chain),
    ];
    let only: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (id, name, limit, check) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) if elapsed <= limit => (true, d),
            Ok(d) => (false, format!("{d}; over the {}s budget", limit.as_secs())),
            Err(d) => (false, d),
        };
        println!(
            "{} criterion {id:>2} {name} ({:.2}s/{}s): {detail}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
        if !ok {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("acceptance: {} failed: {failed:?}", failed.len());
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
