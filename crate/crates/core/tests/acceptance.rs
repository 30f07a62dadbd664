//! Acceptance suite. Each criterion prints one PASS/FAIL line.
//!
//! Criterion 8 (the full n = 4 permutation search) runs only with
//! `--ignored` / `--include-ignored` or `WALSHPERM_ACCEPT_N4=1`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use walshperm::combinatorics::{
    count_a, count_a_tilde, count_b, count_psi_pairs, decay_report, ratio8_nonincreasing, six_pow, three_pow,
    BoundStatus, DecaySet,
};
use walshperm::functions::{lp_norm_key_exact, KeyFunctionSpec, Variant};
use walshperm::orderings::{NamedOrdering, Ordering};
use walshperm::perturbation::{verify_perturbation_a, verify_perturbation_a_hat, verify_subset_example};
use walshperm::search::{
    canonical_class_count, exhaustive_max_b, pruned_search, SearchConfig, SearchReport,
};

// Oracles: direct transcriptions of the set definitions.

fn oracle_b(images: &[u32]) -> u64 {
    let size = images.len();
    let mut count = 0;
    for k in 0..size {
        for l in 0..size - k {
            if images[k] ^ images[l] == images[k + l] {
                count += 1;
            }
        }
    }
    count
}

/// Triples `(k,l,m)` in `lo + [size]` with `k+l-m` in the same block and
/// `s(k)^s(l)^s(m) = s(k+l-m)`.
fn oracle_a(images: &[u32], lo: usize, size: usize) -> u64 {
    let mut count = 0;
    for k in lo..lo + size {
        for l in lo..lo + size {
            for m in lo..lo + size {
                let j = (k + l) as i64 - m as i64;
                if j < lo as i64 || j >= (lo + size) as i64 {
                    continue;
                }
                if images[k] ^ images[l] ^ images[m] == images[j as usize] {
                    count += 1;
                }
            }
        }
    }
    count
}

fn oracle_psi(n: u32, psi: &[i64]) -> u64 {
    let size = 1usize << n;
    let mut count = 0;
    for x in 0..size {
        for y in 0..size {
            if psi[x ^ y] == (x + y) as i64 {
                count += 1;
            }
        }
    }
    count
}

fn criterion_1() -> String {
    for n in 0..=10 {
        let id = Ordering::identity(n).unwrap();
        let r = count_b(n, &id).unwrap();
        assert_eq!(r.count, three_pow(n), "n = {n}");
        if n <= 8 {
            assert_eq!(oracle_b(id.images()), r.count, "oracle n = {n}");
        }
    }
    "count_B(n, identity) = 3^n for n = 0..10".into()
}

fn criterion_2() -> String {
    let mut checked = 0;
    for n in 0..=6 {
        let size = 1usize << n;
        let identity: Vec<i64> = (0..size as i64).collect();
        assert_eq!(count_psi_pairs(n, &identity).unwrap().count, three_pow(n), "identity psi, n = {n}");
        let mut rng = ChaCha8Rng::seed_from_u64(0x5053_4900 + n as u64);
        for trial in 0..1000 {
            // values concentrated on the reachable sums [0, 2^{n+1}) so
            // that the bound is actually stressed
            let psi: Vec<i64> = (0..size).map(|_| rng.gen_range(-1..(2 * size as i64))).collect();
            let count = count_psi_pairs(n, &psi).unwrap().count;
            assert!(count <= three_pow(n), "n = {n}, trial {trial}: {count}");
            if trial < 20 {
                assert_eq!(count, oracle_psi(n, &psi));
            }
            checked += 1;
        }
    }
    format!("{checked} random psi maps within 3^n, identity psi attains 3^n")
}

fn criterion_3() -> String {
    let id1 = Ordering::identity(1).unwrap();
    assert_eq!(count_a(1, &id1, 0).unwrap().count, 6);
    assert_eq!(oracle_a(id1.images(), 0, 2), 6);
    let mut rng = ChaCha8Rng::seed_from_u64(0x4c49_4e00);
    let mut counted = 0;
    for n in 0..=7 {
        let mut family = vec![
            Ordering::identity(n).unwrap(),
            Ordering::named(NamedOrdering::OriginalWalsh, n).unwrap(),
            Ordering::named(NamedOrdering::Kronecker, n).unwrap(),
        ];
        for _ in 0..20 {
            family.push(Ordering::random_linear(n, &mut rng).unwrap());
        }
        for (i, sigma) in family.iter().enumerate() {
            let r = count_a(n, sigma, 0).unwrap();
            assert!(r.count <= six_pow(n), "n = {n}, ordering {i}: {}", r.count);
            let bound = r.bound.expect("linear orderings carry the proven bound");
            assert_eq!(bound.status, BoundStatus::Proven);
            assert!(bound.holds);
            if n <= 5 {
                assert_eq!(r.count, oracle_a(sigma.images(), 0, 1 << n), "oracle n = {n}, ordering {i}");
            }
            counted += 1;
        }
    }
    format!("{counted} linear counts within 6^n, count_A(1, identity) = 6")
}

fn criterion_4() -> String {
    let mut last = 0;
    for n in 0..=7 {
        let k = Ordering::named(NamedOrdering::Kaczmarz, n + 1).unwrap();
        let r = count_a_tilde(n, &k).unwrap();
        assert!(r.count <= six_pow(n), "n = {n}: {}", r.count);
        if n <= 5 {
            assert_eq!(r.count, oracle_a(k.images(), 1 << n, 1 << n), "oracle n = {n}");
        }
        last = r.count;
    }
    format!("Kaczmarz tail counts within 6^n for n = 0..7 (n = 7: {last} <= {})", six_pow(7))
}

fn criterion_5() -> String {
    let mut worst: f64 = 0.0;
    let mut worst_parseval: f64 = 0.0;
    for name in NamedOrdering::ALL {
        for variant in [Variant::Full, Variant::Tail] {
            for n in 0..=5 {
                let (exponent, lo) = match variant {
                    Variant::Full => (n, 0),
                    Variant::Tail => (n + 1, 1usize << n),
                };
                let sigma = Ordering::named(name, exponent).unwrap();
                let count = oracle_a(sigma.images(), lo, 1 << n);
                let library = match variant {
                    Variant::Full => count_a(n, &sigma, 0).unwrap().count,
                    Variant::Tail => count_a_tilde(n, &sigma).unwrap().count,
                };
                assert_eq!(library, count, "{name} {variant:?} n = {n}");
                let spec = KeyFunctionSpec::new(n, sigma, variant).unwrap();
                let l4 = lp_norm_key_exact(&spec, 4.0).unwrap();
                let rel = (l4.value.powi(4) - count as f64).abs() / count as f64;
                assert!(rel <= 1e-9, "{name} {variant:?} n = {n}: relative error {rel}");
                worst = worst.max(rel);
                let l2 = lp_norm_key_exact(&spec, 2.0).unwrap();
                let terms = (1u64 << n) as f64;
                let err = (l2.value.powi(2) - terms).abs();
                assert!(err <= 1e-12 * terms, "{name} {variant:?} n = {n}: Parseval error {err}");
                worst_parseval = worst_parseval.max(err / terms);
            }
        }
    }
    format!("4-norm vs count worst relative error {worst:.1e}, Parseval worst {worst_parseval:.1e}")
}

fn criterion_6() -> String {
    let n = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(0x494e_5600);
    for trial in 0..100 {
        let lambda = Ordering::random_linear(n, &mut rng).unwrap();
        let pi = Ordering::random(n, &mut rng).unwrap();
        let composed = Ordering::compose(&lambda, &pi).unwrap();
        let left = count_a(n, &composed, 0).unwrap().count;
        let right = count_a(n, &pi, 0).unwrap().count;
        assert_eq!(left, right, "trial {trial}");
        if trial < 10 {
            assert_eq!(oracle_a(composed.images(), 0, 16), oracle_a(pi.images(), 0, 16));
        }
    }
    "count_A(lambda o pi) = count_A(pi) on 100 random pairs at n = 4".into()
}

fn criterion_7() -> String {
    let mut timings = Vec::new();
    for n in 0..=3 {
        let start = Instant::now();
        let exhaustive = exhaustive_max_b(n).unwrap();
        let exhaustive_secs = start.elapsed().as_secs_f64();
        assert_eq!(exhaustive.max_count, three_pow(n), "exhaustive n = {n}");
        let identity = Ordering::identity(n).unwrap();
        assert!(exhaustive.maximizers.iter().any(|m| m == identity.images()), "identity is a maximizer, n = {n}");
        for m in &exhaustive.maximizers {
            assert_eq!(oracle_b(m), exhaustive.max_count);
        }

        let start = Instant::now();
        let cp = pruned_search(n, &SearchConfig::default(), None, |_| {}).unwrap();
        let report = SearchReport::from_checkpoint(&cp, start.elapsed().as_secs_f64());
        assert!(report.complete);
        assert_eq!(report.max_count, exhaustive.max_count, "pruned n = {n}");
        assert!(report.conjecture_holds);
        assert_eq!(oracle_b(&report.witness), report.max_count);
        timings.push(format!("n={n}: {exhaustive_secs:.3}s/{:.3}s", report.wall_seconds));
    }
    format!("max #B = 3^n for n <= 3 (27 at n = 3), pruned agrees [{}]", timings.join(", "))
}

fn criterion_8() -> String {
    let start = Instant::now();
    let cp = pruned_search(4, &SearchConfig::default(), None, |_| {}).unwrap();
    let report = SearchReport::from_checkpoint(&cp, start.elapsed().as_secs_f64());
    assert!(report.complete);
    assert_eq!(report.classes_covered, canonical_class_count(4));
    assert_eq!(report.max_count, 81);
    assert!(report.conjecture_holds);
    assert!(report.violations.is_empty());
    assert_eq!(oracle_b(&report.witness), 81);
    format!(
        "n = 4 search complete: max 81, {} classes, {} nodes, {:.1}s",
        report.classes_total, report.nodes_visited, report.wall_seconds
    )
}

fn criterion_9() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5045_5200);
    let mut pairs = 0;
    for (n, trials) in [(3u32, 50), (4, 10)] {
        for trial in 0..trials {
            let sigma = Ordering::random(n, &mut rng).unwrap();
            let pi = Ordering::random(n, &mut rng).unwrap();
            let xor = verify_perturbation_a(n, &sigma, &pi).unwrap();
            assert!(xor.inclusion_holds && xor.cardinality_holds, "xor flavor, n = {n}, trial {trial}");
            assert_eq!(xor.factor, 4 * xor.f_star + 1);
            let abs = verify_perturbation_a_hat(n, &sigma, &pi).unwrap();
            assert!(abs.inclusion_holds && abs.cardinality_holds, "abs flavor, n = {n}, trial {trial}");
            assert_eq!(abs.factor, 8 * abs.f_star + 1);
            pairs += 1;
        }
        let sigma = Ordering::random(n, &mut rng).unwrap();
        for report in [
            verify_perturbation_a(n, &sigma, &sigma).unwrap(),
            verify_perturbation_a_hat(n, &sigma, &sigma).unwrap(),
        ] {
            assert_eq!((report.f_star, report.factor), (0, 1));
            assert!(report.sets_equal && report.holds());
            assert_eq!(report.sigma_count, report.pi_count);
        }
    }
    format!("{pairs} random pairs pass both inclusions; sigma = pi gives factor 1 and equal sets")
}

fn criterion_10() -> String {
    let (n, m) = (6u32, 2usize);
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bits: Vec<u32> = Vec::new();
        while bits.len() < m {
            let b = rng.gen_range(0..n);
            if !bits.contains(&b) {
                bits.push(b);
            }
        }
        let report = verify_subset_example(n, &bits, seed).unwrap();
        let sigma = Ordering::subset_scramble(&bits, n, seed).unwrap();
        let count = oracle_a(sigma.images(), 0, 1 << n);
        assert_eq!(report.count_sigma, count, "seed {seed}");
        let chained = 4 * (1u64 << m) * six_pow(n);
        assert_eq!(report.chained_bound, chained);
        assert!(count <= chained, "seed {seed}, bits {bits:?}: {count}");
        assert!(report.holds(), "seed {seed}, bits {bits:?}");
        assert!(report.ratio8 <= report.ratio8_bound);
        worst = worst.max(count as f64 / chained as f64);
    }
    format!("20 seeds at n = 6, m = 2 within 4*2^m*6^n (largest ratio {worst:.3})")
}

fn criterion_11() -> String {
    let rows = decay_report(8, DecaySet::A, Ordering::identity).unwrap();
    let tail: Vec<_> = rows.into_iter().filter(|r| r.n >= 1).collect();
    assert!(ratio8_nonincreasing(&tail));
    for r in &tail {
        assert!(r.ratio8 <= 0.75f64.powi(r.n as i32) + 1e-15, "n = {}: {}", r.n, r.ratio8);
    }
    // n^2 (3/4)^n peaks near n = 7; past it the adjusted ratio falls
    let last = tail.last().unwrap();
    assert!(last.ratio8_logadj < tail[tail.len() - 2].ratio8_logadj);
    format!("identity ratio8 nonincreasing and <= (3/4)^n for n = 1..8 (n = 8: {:.4}, logadj {:.3})", last.ratio8, last.ratio8_logadj)
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let opt_in = args.iter().any(|a| a == "--ignored" || a == "--include-ignored")
        || std::env::var("WALSHPERM_ACCEPT_N4").is_ok_and(|v| !v.is_empty() && v != "0");
    if args.iter().any(|a| a == "--list") {
        return;
    }

    let criteria: [(u32, fn() -> String, bool); 11] = [
        (1, criterion_1, false),
        (2, criterion_2, false),
        (3, criterion_3, false),
        (4, criterion_4, false),
        (5, criterion_5, false),
        (6, criterion_6, false),
        (7, criterion_7, false),
        (8, criterion_8, true),
        (9, criterion_9, false),
        (10, criterion_10, false),
        (11, criterion_11, false),
    ];
    let mut failed = 0;
    for (id, check, optional) in criteria {
        if optional && !opt_in {
            println!("criterion {id:>2}: SKIP (opt-in: --ignored or WALSHPERM_ACCEPT_N4=1)");
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id:>2}: PASS {detail} ({secs:.2}s)"),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("criterion {id:>2}: FAIL {msg} ({secs:.2}s)");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion(s) failed");
        std::process::exit(1);
    }
    println!("acceptance: ok");
}
