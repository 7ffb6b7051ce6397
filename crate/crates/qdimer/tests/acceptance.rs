//! Acceptance suite: twelve criteria, one PASS/FAIL line each.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use qdimer::connection::{build_quantum_identity, DiagonalConnection};
use qdimer::density::{finite_patch_expected_loops, rho_honeycomb};
use qdimer::generators::{self, CiliationMode, Family, FamilySpec};
use qdimer::kasteleyn::{build_signs, verify_kasteleyn};
use qdimer::laurent::binom2;
use qdimer::multiweb::{count_edge_colorings, dimer_covers, enumerate_multiwebs, Multiweb};
use qdimer::qalgebra::{self, kdet_multiweb_symbolic, tr_alt, SymbolicConnection};
use qdimer::qtrace::{
    classical_trace, normalization_shift, partition_function, trace_full, traces, zq,
};
use qdimer::rteval::{self, evaluate, isotopy_suite, kink_factors, rt_trace};
use qdimer::stats::{
    expected_twist, local_variable_suite, loops, positive_version, snake_partition_functions,
    snake_slopes, twist, zigzag_partition_function,
};
use qdimer::{CiliatedPlanarGraph, QLaurent};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    id: u32,
    name: &'static str,
    failures: Vec<String>,
    elapsed: Duration,
    budget: Duration,
    note: String,
}

impl Outcome {
    fn passed(&self) -> bool {
        self.failures.is_empty() && self.elapsed <= self.budget
    }
}

fn run(
    id: u32,
    name: &'static str,
    budget_secs: u64,
    f: impl FnOnce(&mut Vec<String>) -> String,
) -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let note = f(&mut failures);
    Outcome {
        id,
        name,
        failures,
        elapsed: start.elapsed(),
        budget: Duration::from_secs(budget_secs),
        note,
    }
}

fn check(failures: &mut Vec<String>, ok: bool, what: impl FnOnce() -> String) {
    if !ok {
        failures.push(what());
    }
}

fn rat(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

/// Every generator family instance with at most `max_v` vertices.
fn families(max_v: usize) -> Vec<Family> {
    let mut out = Vec::new();
    for n in 1..=max_v / 2 {
        out.push(Family::Cycle { n });
    }
    for m in 1..=max_v / 2 {
        out.push(Family::Grid2xm { m });
        out.push(Family::Zigzag { m });
    }
    for w in 2..=max_v {
        for h in 2..=max_v {
            if w * h <= max_v && (w * h) % 2 == 0 {
                out.push(Family::SquareGrid { w, h });
            }
        }
    }
    for a in 1..=4 {
        for b in 1..=4 {
            out.push(Family::HoneycombPatch { a, b });
        }
    }
    out.into_iter()
        .filter(|f| {
            f.build()
                .map(|g| g.num_vertices() <= max_v)
                .unwrap_or(false)
        })
        .collect()
}

fn with_ciliation(f: &Family, mode: CiliationMode, rng: &mut ChaCha8Rng) -> CiliatedPlanarGraph {
    FamilySpec::new(f.clone(), mode)
        .build(rng)
        .expect("family builds")
}

fn criterion_1() -> Outcome {
    run(1, "cycle closed form", 1, |fail| {
        for big_n in 1..=6 {
            let g = generators::cycle(big_n);
            for n in 1..=5u32 {
                let phi = build_quantum_identity(&g, n).unwrap();
                let z = partition_function(&phi, &g, n).unwrap();
                let want: QLaurent = (1..=n as i64)
                    .map(|i| &QLaurent::one() + &QLaurent::qpow(n as i64 + 1 - 2 * i))
                    .product();
                check(fail, z == want, || format!("Z on cycle({big_n}), n={n}"));
                for m in enumerate_multiwebs(&g, n) {
                    let k = m.mult[generators::cycle_distinguished_edge(&g)];
                    let t = trace_full(&phi, &g, &m).unwrap().raw;
                    let want = QLaurent::qbinom(n, k)
                        .unwrap()
                        .scale_by_power(big_n as i64 * binom2(n) as i64, 1);
                    check(fail, t == want, || {
                        format!("tr on cycle({big_n}), n={n}, k={k}")
                    });
                }
            }
        }
        "N <= 6, n <= 5".into()
    })
}

fn criterion_2() -> Outcome {
    run(2, "bigon golden values", 1, |fail| {
        let g = generators::cycle(1);
        let pos = zq(&g, 2).unwrap();
        let mixed = g.rotate_cilium(0, true);
        let neg = zq(&mixed, 2).unwrap();
        check(fail, pos == "q^-1 + 2 + q".parse().unwrap(), || {
            format!("positive: {}", pos.to_pretty())
        });
        check(fail, !mixed.is_positive_ciliation(), || {
            "rotated cilium is still positive".into()
        });
        check(fail, neg == "-q^-1 + 2 - q".parse().unwrap(), || {
            format!("mixed: {}", neg.to_pretty())
        });
        format!("Z+ = {}, Z mixed = {}", pos.to_pretty(), neg.to_pretty())
    })
}

fn criterion_3() -> Outcome {
    run(3, "Kasteleyn theorem", 300, |fail| {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut cases = 0;
        for f in families(10) {
            let g = f.build().unwrap();
            for n in 1..=3u32 {
                let mut phis = vec![build_quantum_identity(&g, n).unwrap()];
                for _ in 0..20 {
                    phis.push(DiagonalConnection::random_monomial(
                        n,
                        g.num_edges(),
                        3,
                        &mut rng,
                    ));
                }
                for (i, phi) in phis.iter().enumerate() {
                    let v = verify_kasteleyn(phi, &g, n).unwrap();
                    cases += 1;
                    check(fail, v.matches && matches!(v.sign, Some(1 | -1)), || {
                        format!("{f}, n={n}, connection #{i}")
                    });
                }
            }
        }
        let g = generators::single_edge();
        for n in 1..=3u32 {
            let eps = build_signs(&g, n).unwrap();
            let phi = SymbolicConnection::generic(n, 1);
            let m = Multiweb { n, mult: vec![n] };
            let k = kdet_multiweb_symbolic(&phi, &g, &m, &eps).unwrap();
            let z = tr_alt(&phi, &g, &m).unwrap();
            let ok = k == z || k == z.scale(&QLaurent::constant(-1));
            check(fail, ok, || format!("symbolic single edge, n={n}"));
        }
        format!("{cases} numeric cases plus symbolic single edge n <= 3")
    })
}

fn criterion_4() -> Outcome {
    run(4, "symmetry, palindromicity, positivity", 600, |fail| {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut webs = 0;
        for f in families(10) {
            for mode in [CiliationMode::Positive, CiliationMode::Trivial] {
                let positive = mode == CiliationMode::Positive;
                let g = with_ciliation(&f, mode, &mut rng);
                for n in 1..=3u32 {
                    let phi = build_quantum_identity(&g, n).unwrap();
                    let alpha = Ratio::from_integer(normalization_shift(&g, n));
                    check(
                        fail,
                        alpha == Ratio::from_integer(g.n_half() as i64 * binom2(n) as i64),
                        || format!("{f}: shift"),
                    );
                    for (m, t) in traces(&phi, &g, n).unwrap() {
                        webs += 1;
                        let ok = !t.normalized.is_zero()
                            && t.normalized.is_symmetric()
                            && t.raw.palindromic_shift() == Some(alpha);
                        check(fail, ok, || {
                            format!("{f}, n={n}, m={:?}: not palindromic", m.mult)
                        });
                        if positive {
                            check(fail, t.raw.all_coeffs_nonnegative(), || {
                                format!("{f}, n={n}, m={:?}: negative coefficient", m.mult)
                            });
                        }
                    }
                }
            }
        }
        format!("{webs} traces")
    })
}

fn criterion_5() -> Outcome {
    run(5, "classical reduction", 600, |fail| {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for f in families(10) {
            let g = with_ciliation(&f, CiliationMode::Positive, &mut rng);
            let dimers = BigInt::from(dimer_covers(&g).len());
            for n in 1..=3u32 {
                let z1 = zq(&g, n).unwrap().eval_at_one();
                check(fail, z1 == dimers.pow(n), || {
                    format!("{f}, n={n}: Z1 = {z1}")
                });
                for m in enumerate_multiwebs(&g, n) {
                    let t = classical_trace(&g, &m);
                    check(
                        fail,
                        t == BigInt::from(count_edge_colorings(&g, &m)),
                        || format!("{f}, n={n}, m={:?}: classical trace {t}", m.mult),
                    );
                }
            }
        }
        "positive cilia, n <= 3".into()
    })
}

fn criterion_6() -> Outcome {
    run(6, "RT cross-validation", 120, |fail| {
        let mut webs = 0;
        let mut non_proper = 0;
        for f in families(8) {
            let g = f.build().unwrap();
            for n in 1..=3u32 {
                let phi = build_quantum_identity(&g, n).unwrap();
                for m in enumerate_multiwebs(&g, n) {
                    webs += 1;
                    if !m.is_proper() {
                        non_proper += 1;
                    }
                    let want = trace_full(&phi, &g, &m).unwrap().raw;
                    match rt_trace(&g, &m) {
                        Ok(got) => {
                            check(fail, got == want, || format!("{f}, n={n}, m={:?}", m.mult))
                        }
                        Err(e) => fail.push(format!("{f}, n={n}, m={:?}: {e}", m.mult)),
                    }
                }
            }
        }
        format!("{webs} multiwebs, {non_proper} non-proper")
    })
}

fn sampled_diagrams() -> Vec<rteval::WebDiagram> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut out = Vec::new();
    for i in 0..8 {
        let n = if i % 2 == 0 { 2 } else { 3 };
        let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
        let mut word = vec![sign, 2 * sign, sign];
        let extra = rng.gen_range(0..=2);
        for _ in 0..extra {
            let s = rng.gen_range(1..=2);
            word.insert(
                rng.gen_range(0..=word.len()),
                if rng.gen_bool(0.5) { s } else { -s },
            );
        }
        out.push(rteval::braid_closure(n, 3, &word));
    }
    out.push(rteval::braid_closure(2, 2, &[1, 1, -1]));
    let (g, m) = generators::small_three_web();
    out.push(rteval::from_multiweb(&g, &m).unwrap());
    out
}

fn criterion_7() -> Outcome {
    run(7, "RT invariance", 600, |fail| {
        for n in 1..=4u32 {
            let u = evaluate(&rteval::unknot(n)).unwrap();
            check(fail, u == QLaurent::qint(n), || {
                format!("unknot, n={n}: {}", u.to_pretty())
            });
            let (p, m) = kink_factors(n).unwrap();
            check(fail, (&p * &m).is_one(), || format!("kink product, n={n}"));
        }
        let (mut r2, mut r3) = (0, 0);
        let diagrams = sampled_diagrams();
        for (i, d) in diagrams.iter().enumerate() {
            let r = isotopy_suite(d).unwrap();
            r2 += r.r2_checked;
            r3 += r.r3_checked;
            for f in r.failures {
                fail.push(format!("diagram {i}: {f}"));
            }
            check(fail, r.kink_product_is_one, || {
                format!("diagram {i}: kink product")
            });
        }
        check(fail, r2 > 0 && r3 > 0, || {
            format!("only {r2} R2 and {r3} R3 moves exercised")
        });
        format!("{} diagrams, {r2} R2 and {r3} R3 moves", diagrams.len())
    })
}

fn criterion_8() -> Outcome {
    run(8, "twist identities", 600, |fail| {
        let g = generators::cycle(3);
        let m1 = enumerate_multiwebs(&g, 3)
            .into_iter()
            .find(|m| m.mult[0] == 1)
            .unwrap();
        let x = twist(&g, &m1).unwrap();
        check(fail, x == rat(8, 3), || format!("X3(m1) = {x}"));
        for big_n in 1..=6 {
            let g = generators::cycle(big_n);
            for n in 1..=5u32 {
                let e = expected_twist(&g, n).unwrap();
                let want = rat(n as i64 * n as i64 * n as i64 - n as i64, 12);
                check(
                    fail,
                    e.by_definition == want && e.by_log_derivative == want,
                    || format!("E(X) on cycle({big_n}), n={n}: {}", e.by_definition),
                );
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut webs = 0;
        let mut suites = 0;
        for f in families(10) {
            let g = f.build().unwrap();
            for m in enumerate_multiwebs(&g, 2) {
                webs += 1;
                let ok = twist(&g, &m).unwrap()
                    == BigRational::from_integer(loops(&g, &m).unwrap().into());
                check(fail, ok, || format!("{f}, m={:?}: X2 != L", m.mult));
            }
            let t = with_ciliation(&f, CiliationMode::Trivial, &mut rng);
            for n in 1..=3u32 {
                suites += 1;
                let r = local_variable_suite(&t, n).unwrap();
                check(fail, r.passed(), || {
                    format!(
                        "{f}, n={n}: Var(Y) = {}, E(X) = {}",
                        r.variance, r.expected_twist
                    )
                });
            }
        }
        format!("{webs} two-multiwebs, {suites} variance suites")
    })
}

fn criterion_9() -> Outcome {
    run(9, "snake graphs", 60, |fail| {
        let two = QLaurent::qint(2);
        let mut z = vec![QLaurent::one()];
        for m in 1..=8 {
            z.push(zq(&positive_version(&generators::grid2xm(m)).unwrap(), 2).unwrap());
        }
        check(
            fail,
            z[1].is_one() && z[2] == &QLaurent::constant(2) + &two,
            || "initial values".into(),
        );
        for m in 3..=8 {
            let rhs = &(&z[m - 1].scale(&BigInt::from(2)) + &(&two * &z[m - 2])) - &z[m - 3];
            check(fail, z[m] == rhs, || format!("recurrence at m={m}"));
        }
        check(fail, snake_partition_functions(8) == z, || {
            "recurrence table differs from enumeration".into()
        });
        for m in 1..=8usize {
            let zz = zq(&positive_version(&generators::zigzag(m)).unwrap(), 2).unwrap();
            let want = &QLaurent::constant(m as i64) + &two.scale(&BigInt::from(binom2(m as u32)));
            check(
                fail,
                zz == want && zigzag_partition_function(m as u64) == want,
                || format!("zigzag m={m}"),
            );
        }
        let s = snake_slopes(300);
        let (a, b) = s.relative_errors();
        check(fail, a < 5e-3, || {
            format!("natural slope {} vs {}", s.natural, s.natural_target)
        });
        check(fail, b < 5e-3, || {
            format!("uniform slope {} vs {}", s.uniform, s.uniform_target)
        });
        format!(
            "slopes {:.10} ({a:.1e}), {:.10} ({b:.1e})",
            s.natural, s.uniform
        )
    })
}

fn criterion_10() -> Outcome {
    run(10, "honeycomb density", 1800, |fail| {
        let r = rho_honeycomb(300).unwrap();
        let third = 1.0 / 3.0;
        check(fail, (r.rho * 27.0 - 1.0).abs() < 1e-4, || {
            format!("rho = {} (1/rho = {})", r.rho, 1.0 / r.rho)
        });
        check(fail, (r.b00 - third).abs() < 1e-9, || {
            format!("B00 = {}", r.b00)
        });
        check(fail, (r.b_m1_0 - third).abs() < 1e-9, || {
            format!("B-10 = {}", r.b_m1_0)
        });
        check(fail, r.recurrence_residual < 1e-9, || {
            format!("recurrence residual {}", r.recurrence_residual)
        });
        format!(
            "rho(300) = {:.12} = 1/{:.6}, residual {:.1e}, quadrature error {:.1e}",
            r.rho,
            1.0 / r.rho,
            r.recurrence_residual,
            r.quadrature_error
        )
    })
}

fn criterion_11() -> Outcome {
    run(11, "finite-patch cross-check", 1800, |fail| {
        let mut sizes = Vec::new();
        for (a, b) in [
            (1, 1),
            (2, 1),
            (3, 1),
            (2, 2),
            (3, 2),
            (4, 2),
            (3, 3),
            (5, 2),
            (4, 3),
            (9, 1),
            (6, 2),
        ] {
            let g = generators::honeycomb_patch(a, b).unwrap();
            if g.num_vertices() > 40 {
                continue;
            }
            let r = finite_patch_expected_loops(&g).unwrap();
            sizes.push(r.vertices);
            check(fail, r.passed(1e-10), || {
                format!(
                    "honeycomb {a}x{b}: enumeration {} vs pair correlation {}",
                    r.enumeration, r.pair_correlation
                )
            });
            check(fail, r.difference <= 1e-10, || {
                format!("honeycomb {a}x{b}: difference {}", r.difference)
            });
        }
        format!("patches with {sizes:?} vertices")
    })
}

fn criterion_12() -> Outcome {
    run(12, "qalgebra identities", 60, |fail| {
        let r = qalgebra::selftest().unwrap();
        for c in &r.checks {
            check(fail, c.passed, || c.name.clone());
        }
        format!("{} checks", r.checks.len())
    })
}

#[test]
fn acceptance() {
    let outcomes = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
        criterion_11(),
        criterion_12(),
    ];
    let mut red = Vec::new();
    for o in &outcomes {
        let verdict = if o.passed() { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion {:>2} {:<40} {:>9.3} s  {}",
            o.id,
            o.name,
            o.elapsed.as_secs_f64(),
            o.note
        );
        for f in o.failures.iter().take(5) {
            println!("     {f}");
        }
        if o.elapsed > o.budget {
            println!("     over budget of {} s", o.budget.as_secs());
        }
        if !o.passed() {
            red.push(o.id);
        }
    }
    let total: f64 = outcomes.iter().map(|o| o.elapsed.as_secs_f64()).sum();
    println!(
        "total {:.3} s, backend {}",
        total,
        if qdimer::par::is_parallel() {
            "parallel"
        } else {
            "sequential"
        }
    );
    assert!(red.is_empty(), "failed criteria: {red:?}");
}
