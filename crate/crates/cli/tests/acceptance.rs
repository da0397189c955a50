//! Acceptance criteria, one PASS/FAIL line each. Thresholds are fixed here
//! and are not tuned per run.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use clap::Parser;
use favres_cli::formats::{render, ReportDoc, ResolutionDoc};
use favres_cli::{exit, run, Cli};
use favres_core::complexes::{check_d_squared, compose, is_admissible, AdmissibleHom, Entry};
use favres_core::pseudo_rep::{
    check_pseudo_rep, evaluate_relations, substitute, trace_of_rep, universal_ring_relations,
    CheckOptions, FiniteGroup, Matrix, PseudoRep, Verdict,
};
use favres_core::resolution::{
    favorable_resolution, koszul_stratum_resolution, lower_dim_resolution, Bracket,
    ResolutionOptions,
};
use favres_core::snf::homology_over_zpm;
use favres_core::terms::is_favorable;
use favres_core::toy_model::{
    realize_bracket, realize_complex, realize_term, verify_exactness, verify_quasi_isomorphism,
    SweepMode, ToyComplex,
};
use favres_core::{ModMatrix, Params, Term, Weight, Zpm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Instant, limit: Duration) -> Result<Duration, String> {
    let e = t.elapsed();
    ensure(e < limit, || format!("took {e:.2?}, limit {limit:?}"))?;
    Ok(e)
}

// ---------------------------------------------------------------- 1, 2

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let pr = Params::new(3, 3, 1, 5).unwrap();
    let t = Term::new(&pr, Weight::new(vec![1, 1, 1], 1), vec![2, 0, 0]).unwrap();
    let b = koszul_stratum_resolution(&pr, &t, &[0, 2, 2]).map_err(|e| e.to_string())?;
    let tc = realize_bracket(&b).map_err(|e| e.to_string())?;
    let shape: Vec<usize> = tc.modules.iter().map(Vec::len).collect();
    ensure(shape == [1, 1, 2, 1], || format!("module counts {shape:?}"))?;
    let rep =
        verify_exactness(&tc, &[5, 5, 5], SweepMode::Exhaustive).map_err(|e| e.to_string())?;
    ensure(rep.is_exact(), || format!("failures {:?}", rep.failures))?;
    // every strand in the box, every position, by the homology kernel
    let mut positions = 0;
    for a in cube(&[5, 5, 5]) {
        let s = tc.strand(&a);
        for i in 0..s.members.len() {
            let h = s.homology(&tc.ring, i).map_err(|e| e.to_string())?;
            ensure(h.is_empty(), || format!("H at {a:?}, position {i}: {h:?}"))?;
            positions += 1;
        }
    }
    let e = within(t0, Duration::from_secs(5))?;
    Ok(format!(
        "{} strands, {positions} homology groups all zero, {e:.2?}",
        rep.strands_checked
    ))
}

fn criterion_2() -> Outcome {
    let t0 = Instant::now();
    let pr = Params::new(2, 3, 1, 5).unwrap();
    let t = Term::new(&pr, Weight::new(vec![1, 1, 1], 1), vec![2, 2, 0]).unwrap();
    let b = lower_dim_resolution(&pr, &t, 2).map_err(|e| e.to_string())?;
    let tc = realize_bracket(&b).map_err(|e| e.to_string())?;
    let shape: Vec<usize> = tc.modules.iter().map(Vec::len).collect();
    ensure(shape == [1, 1, 3, 3, 1], || {
        format!("module counts {shape:?}")
    })?;
    let rep =
        verify_exactness(&tc, &[7, 7, 7], SweepMode::Exhaustive).map_err(|e| e.to_string())?;
    ensure(rep.is_exact(), || format!("failures {:?}", rep.failures))?;
    let e = within(t0, Duration::from_secs(10))?;
    Ok(format!(
        "{} strands, 0 failures, {e:.2?}",
        rep.strands_checked
    ))
}

fn cube(bx: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &b in bx {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..b).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

// ---------------------------------------------------------------- 3

fn random_params(rng: &mut ChaCha8Rng) -> Params {
    Params::new(
        [2, 3][rng.gen_range(0..2)],
        rng.gen_range(1..=3),
        rng.gen_range(1..=2),
        5,
    )
    .unwrap()
}

fn random_weight(rng: &mut ChaCha8Rng, g: usize) -> Weight {
    let w = rng.gen_range(0..2);
    Weight::new((0..g).map(|_| w + 2 * rng.gen_range(-3..=3)).collect(), w)
}

fn random_orders(rng: &mut ChaCha8Rng, pr: &Params) -> Vec<u64> {
    (0..pr.g)
        .map(|_| {
            if rng.gen_bool(0.5) {
                0
            } else {
                pr.step() * rng.gen_range(1..=3)
            }
        })
        .collect()
}

fn quasi_iso(b: &Bracket) -> Result<(), String> {
    ensure(check_d_squared(&b.complex).is_empty(), || {
        "d² nonzero".into()
    })?;
    let tc = realize_complex(&b.complex).map_err(|e| e.to_string())?;
    let src = realize_term(&b.source);
    let in_map = [b.in_map()];
    let probe = favres_core::toy_model::augmented(tc.ring, &src, &in_map, &tc)
        .map_err(|e| e.to_string())?;
    let rep = verify_quasi_isomorphism(&src, &in_map, &tc, &probe.required_box(), SweepMode::Cells)
        .map_err(|e| e.to_string())?;
    ensure(rep.is_exact(), || {
        format!("{:?}: {:?}", b.source, rep.failures)
    })
}

fn criterion_3() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let per_kind = 200;
    for _ in 0..per_kind {
        let pr = random_params(&mut rng);
        let orders = random_orders(&mut rng, &pr);
        let n: Vec<u64> = orders
            .iter()
            .map(|&m| {
                if m == 0 {
                    pr.step() * rng.gen_range(1..=3)
                } else {
                    0
                }
            })
            .collect();
        let t = Term::new(&pr, random_weight(&mut rng, pr.g), orders).unwrap();
        let b = koszul_stratum_resolution(&pr, &t, &n).map_err(|e| e.to_string())?;
        quasi_iso(&b)?;
    }
    for _ in 0..per_kind {
        let pr = random_params(&mut rng);
        let t = Term::new(
            &pr,
            random_weight(&mut rng, pr.g),
            random_orders(&mut rng, &pr),
        )
        .unwrap();
        let b = lower_dim_resolution(&pr, &t, pr.step() * rng.gen_range(1..=3))
            .map_err(|e| e.to_string())?;
        quasi_iso(&b)?;
    }
    let e = within(t0, Duration::from_secs(300))?;
    Ok(format!(
        "{per_kind} stratum + {per_kind} lower brackets exact, {e:.2?}"
    ))
}

// ---------------------------------------------------------------- 4

/// Resolve, then check every term, d² and the quasi-isomorphism through the verify command.
fn end_to_end(pr: &Params, k: Vec<i64>, max_iterations: usize) -> Result<String, String> {
    let model = pr.model();
    let r = favorable_resolution(pr, &model, &Weight::new(k, 1), ResolutionOptions::default())
        .map_err(|e| e.to_string())?;
    let iters = r.metadata.iterations;
    ensure(iters <= max_iterations, || format!("{iters} iterations"))?;
    for t in r.complex.terms.iter().flatten() {
        ensure(is_favorable(pr, &model, t), || {
            format!("unfavorable term {t:?}")
        })?;
    }
    ensure(check_d_squared(&r.complex).is_empty(), || {
        "d² nonzero".into()
    })?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("resolution.json");
    std::fs::write(
        &path,
        favres_cli::formats::to_json(&ResolutionDoc::from(&r)),
    )
    .map_err(|e| e.to_string())?;
    let cli = Cli::parse_from([
        "favres",
        "verify",
        "--input",
        path.to_str().unwrap(),
        "--mode",
        "quasi-iso",
    ]);
    let out = run(&cli);
    ensure(out.code == exit::OK, || {
        format!("verify exited {}: {}", out.code, out.message)
    })?;
    let report: ReportDoc = serde_json::from_str(&out.json).map_err(|e| e.to_string())?;
    ensure(report.exact && report.failures.is_empty(), || {
        format!("{:?}", report.failures)
    })?;
    Ok(format!(
        "{} terms, {iters} iterations, {} strands",
        r.metadata.terms, report.strands_checked
    ))
}

fn criterion_4() -> Outcome {
    let mut notes = Vec::new();
    for threshold in [5, 11] {
        let t0 = Instant::now();
        let pr = Params::new(3, 2, 1, threshold).unwrap();
        let s = end_to_end(&pr, vec![1, 1], 3)?;
        let e = within(t0, Duration::from_secs(60))?;
        notes.push(format!("g=2 threshold {threshold}: {s}, {e:.2?}"));
    }
    for threshold in [5, 11] {
        let t0 = Instant::now();
        let pr = Params::new(2, 3, 1, threshold).unwrap();
        // one pass per dimension 3, 2, 1, 0: three dimension drops
        let s = end_to_end(&pr, vec![1, 1, 1], 4)?;
        let e = within(t0, Duration::from_secs(600))?;
        notes.push(format!("g=3 threshold {threshold}: {s}, {e:.2?}"));
    }
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------- 5

fn all_vectors(q: u64, n: usize) -> Vec<Vec<u64>> {
    cube(&vec![q as i64; n])
        .into_iter()
        .map(|v| v.into_iter().map(|x| x as u64).collect())
        .collect()
}

fn add(ring: &Zpm, a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(&x, &y)| ring.add(x, y)).collect()
}

/// The smallest set containing `start` and closed under adding each generator.
fn closure(ring: &Zpm, start: HashSet<Vec<u64>>, gens: &[Vec<u64>]) -> HashSet<Vec<u64>> {
    let mut seen = start;
    let mut frontier: Vec<Vec<u64>> = seen.iter().cloned().collect();
    while let Some(v) = frontier.pop() {
        for g in gens {
            let w = add(ring, &v, g);
            if seen.insert(w.clone()) {
                frontier.push(w);
            }
        }
    }
    seen
}

/// Elementary divisors of `ker d_out / im d_in` from the orders of `p^j H`.
/// With `H = ⊕ Z/p^{e_i}`, `log_p |p^j H| = Σ max(e_i - j, 0)`, so its second
/// difference in `j` counts the factors of each exponent.
fn oracle(ring: &Zpm, d_in: &ModMatrix, d_out: &ModMatrix) -> Vec<u32> {
    let n = d_out.cols();
    let q = ring.modulus();
    let kernel: Vec<Vec<u64>> = all_vectors(q, n)
        .into_iter()
        .filter(|v| d_out.apply(ring, v).iter().all(|&x| x == 0))
        .collect();
    let gens: Vec<Vec<u64>> = (0..d_in.cols())
        .map(|c| (0..n).map(|r| d_in.get(r, c)).collect())
        .collect();
    let image = closure(ring, HashSet::from([vec![0; n]]), &gens);
    let log_p = |x: usize| {
        let mut x = x as u64;
        let mut e = 0;
        while x > 1 {
            assert_eq!(x % ring.p(), 0, "subgroup order is a power of p");
            x /= ring.p();
            e += 1;
        }
        e as i64
    };
    let m = ring.m() as usize;
    let lens: Vec<i64> = (0..=m + 1)
        .map(|j| {
            if j > m {
                return 0;
            }
            let pj = ring.pow_p(j as u32);
            let scaled: HashSet<Vec<u64>> = kernel
                .iter()
                .map(|v| v.iter().map(|&x| ring.mul(x, pj)).collect())
                .collect();
            let sum = closure(ring, scaled, &gens);
            log_p(sum.len() / image.len())
        })
        .collect();
    let mut out = Vec::new();
    for e in 1..=m {
        // #{i : e_i >= e} - #{i : e_i >= e + 1}
        let count = (lens[e - 1] - lens[e]) - (lens[e] - lens[e + 1]);
        out.extend(std::iter::repeat_n(e as u32, count as usize));
    }
    out
}

fn criterion_5() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rings = [
        (2, 1),
        (2, 2),
        (2, 3),
        (3, 1),
        (3, 2),
        (5, 1),
        (5, 2),
        (7, 1),
        (11, 1),
    ];
    let mut torsion = 0;
    let cases = 500;
    for case in 0..cases {
        let (p, m) = rings[case % rings.len()];
        let ring = Zpm::new(p, m).unwrap();
        let q = ring.modulus();
        let max_n = (1..=6u32)
            .take_while(|&n| q.pow(n) <= 1_000_000)
            .last()
            .unwrap() as usize;
        let n = rng.gen_range(1..=max_n);
        let entry = |rng: &mut ChaCha8Rng| {
            let x = rng.gen_range(0..q);
            if rng.gen_bool(0.4) {
                ring.mul(x, ring.pow_p(rng.gen_range(1..=m)))
            } else {
                x
            }
        };
        let rows = rng.gen_range(0..=n);
        let d_out = ModMatrix::from_rows(
            &(0..rows)
                .map(|_| (0..n).map(|_| entry(&mut rng)).collect())
                .collect::<Vec<_>>(),
            n,
        );
        let kernel: Vec<Vec<u64>> = all_vectors(q, n)
            .into_iter()
            .filter(|v| d_out.apply(&ring, v).iter().all(|&x| x == 0))
            .collect();
        let a = rng.gen_range(0..=3);
        let cols: Vec<Vec<u64>> = (0..a)
            .map(|_| {
                let s = entry(&mut rng);
                kernel[rng.gen_range(0..kernel.len())]
                    .iter()
                    .map(|&x| ring.mul(x, s))
                    .collect()
            })
            .collect();
        let d_in = ModMatrix::from_rows(
            &(0..n)
                .map(|i| cols.iter().map(|c| c[i]).collect())
                .collect::<Vec<_>>(),
            a,
        );
        let got = homology_over_zpm(&ring, &d_in, &d_out).map_err(|e| e.to_string())?;
        let want = oracle(&ring, &d_in, &d_out);
        ensure(got == want, || {
            format!("case {case} over Z/{p}^{m}: got {got:?}, oracle {want:?}")
        })?;
        torsion += usize::from(got.iter().any(|&e| e < m));
    }
    ensure(torsion >= 20, || {
        format!("only {torsion} cases with proper torsion")
    })?;
    Ok(format!(
        "{cases} cases agree, {torsion} with proper torsion, {:.2?}",
        t0.elapsed()
    ))
}

// ---------------------------------------------------------------- 6, 7

fn mat_mul(ring: &Zpm, a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(0, |acc, k| ring.add(acc, ring.mul(a[i][k], b[k][j]))))
                .collect()
        })
        .collect()
}

fn mat_pow(ring: &Zpm, a: &Matrix, e: usize) -> Matrix {
    let n = a.len();
    let mut out: Matrix = (0..n)
        .map(|i| (0..n).map(|j| u64::from(i == j)).collect())
        .collect();
    for _ in 0..e {
        out = mat_mul(ring, &out, a);
    }
    out
}

fn lift(ring: &Zpm, rows: &[&[i64]]) -> Matrix {
    rows.iter()
        .map(|r| r.iter().map(|&x| ring.reduce(x)).collect())
        .collect()
}

/// Images of `r^i s^j` for the dihedral naming, or `g^i` for cyclic groups (`s = None`).
fn from_generators(ring: &Zpm, n: usize, r: &Matrix, s: Option<&Matrix>) -> Vec<Matrix> {
    let mut out: Vec<Matrix> = (0..n).map(|i| mat_pow(ring, r, i)).collect();
    if let Some(s) = s {
        out.extend((0..n).map(|i| mat_mul(ring, &mat_pow(ring, r, i), s)));
    }
    out
}

fn check(tau: &PseudoRep) -> Verdict {
    check_pseudo_rep(tau, &CheckOptions::default())
}

fn with_d(tau: &PseudoRep, d: usize) -> PseudoRep {
    PseudoRep { d, ..tau.clone() }
}

fn criterion_6() -> Outcome {
    let t0 = Instant::now();
    let groups = [
        (3, FiniteGroup::symmetric3().unwrap()),
        (4, FiniteGroup::dihedral(4).unwrap()),
    ];
    let mut checks = 0;
    for ring in [Zpm::new(5, 1).unwrap(), Zpm::new(3, 2).unwrap()] {
        for (n, g) in &groups {
            let (r, s): (&[&[i64]], &[&[i64]]) = if *n == 3 {
                (&[&[0, -1], &[1, -1]], &[&[0, 1], &[1, 0]])
            } else {
                (&[&[0, -1], &[1, 0]], &[&[1, 0], &[0, -1]])
            };
            let rho = from_generators(&ring, *n, &lift(&ring, r), Some(&lift(&ring, s)));
            let tau = trace_of_rep(g, ring, &rho).map_err(|e| e.to_string())?;
            let v = check(&tau);
            ensure(matches!(v, Verdict::Valid { sampled: false, .. }), || {
                format!(
                    "standard trace of order {} over Z/{}: {v:?}",
                    g.order(),
                    ring.modulus()
                )
            })?;
            let v1 = check(&with_d(&tau, 1));
            ensure(!v1.is_valid(), || {
                format!("standard trace valid at d=1: {v1:?}")
            })?;
            let two = PseudoRep {
                group: g.clone(),
                ring,
                values: vec![2; g.order()],
                d: 2,
            };
            let v = check(&two);
            ensure(v.is_valid(), || format!("constant 2: {v:?}"))?;
            checks += 3;
            // every one-dimensional character: r -> a, s -> b
            let units: Vec<u64> = (1..ring.modulus()).filter(|&x| ring.is_unit(x)).collect();
            for &a in &units {
                for &b in &units {
                    let Ok(chi) = trace_of_rep(
                        g,
                        ring,
                        &from_generators(&ring, *n, &vec![vec![a]], Some(&vec![vec![b]])),
                    ) else {
                        continue;
                    };
                    let v = check(&chi);
                    ensure(matches!(v, Verdict::Valid { sampled: false, .. }), || {
                        format!("character r->{a}, s->{b}: {v:?}")
                    })?;
                    checks += 1;
                }
            }
        }
    }
    let e = within(t0, Duration::from_secs(30))?;
    Ok(format!("{checks} exhaustive checks, {e:.2?}"))
}

fn all_matrices(ring: &Zpm) -> Vec<Matrix> {
    all_vectors(ring.modulus(), 4)
        .into_iter()
        .map(|v| vec![vec![v[0], v[1]], vec![v[2], v[3]]])
        .collect()
}

/// Traces of every two-dimensional representation of `Z/n` or of the
/// dihedral group of order `2n` over `ring`.
fn two_dim_traces(ring: &Zpm, g: &FiniteGroup, n: usize, dihedral: bool) -> BTreeSet<Vec<u64>> {
    let id = mat_pow(ring, &vec![vec![1, 0], vec![0, 1]], 0);
    let mats = all_matrices(ring);
    let rs: Vec<&Matrix> = mats.iter().filter(|a| mat_pow(ring, a, n) == id).collect();
    let mut out = BTreeSet::new();
    if !dihedral {
        for r in rs {
            out.insert(
                trace_of_rep(g, *ring, &from_generators(ring, n, r, None))
                    .unwrap()
                    .values,
            );
        }
        return out;
    }
    let ss: Vec<&Matrix> = mats.iter().filter(|a| mat_pow(ring, a, 2) == id).collect();
    for r in &rs {
        for s in &ss {
            // s r s = r^{-1}
            let srs = mat_mul(ring, &mat_mul(ring, s, r), s);
            if mat_mul(ring, &srs, r) == id {
                out.insert(
                    trace_of_rep(g, *ring, &from_generators(ring, n, r, Some(s)))
                        .unwrap()
                        .values,
                );
            }
        }
    }
    out
}

fn criterion_7() -> Outcome {
    let mut notes = Vec::new();
    let cases = [
        ("Z/2", FiniteGroup::cyclic(2).unwrap(), 2, false),
        ("Z/3", FiniteGroup::cyclic(3).unwrap(), 3, false),
        ("S3", FiniteGroup::symmetric3().unwrap(), 3, true),
    ];
    for (name, g, n, dihedral) in &cases {
        let rels = universal_ring_relations(g);
        let mut candidates = 0;
        for ring in [
            Zpm::new(5, 1).unwrap(),
            Zpm::new(7, 1).unwrap(),
            Zpm::new(3, 2).unwrap(),
        ] {
            for values in two_dim_traces(&ring, g, *n, *dihedral) {
                let res = evaluate_relations(&rels, &ring, &values);
                ensure(res.iter().all(|&x| x == 0), || {
                    format!(
                        "{name} over Z/{}: τ = {values:?} leaves {res:?}",
                        ring.modulus()
                    )
                })?;
                candidates += 1;
            }
        }
        notes.push(format!(
            "{name}: {} relations, {candidates} traces",
            rels.len()
        ));
    }
    let z2 = &cases[0].1;
    let sub = BTreeMap::from([(z2.identity, 2i64)]);
    let cubics: BTreeSet<String> = universal_ring_relations(z2)
        .iter()
        .filter(|r| r.kind == "cubic")
        .map(|r| render(&substitute(&r.poly, &sub), &z2.elements))
        .collect();
    ensure(cubics.contains("t_g^3 - 4*t_g"), || {
        format!("Z/2 cubics reduce to {cubics:?}")
    })?;
    notes.push("Z/2 cubic reduces to t_g^3 - 4*t_g".into());
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------- 8

/// `s -> t -> u` with random shifts and admissible target orders.
fn random_chain(rng: &mut ChaCha8Rng, pr: &Params) -> (AdmissibleHom, AdmissibleHom) {
    let step = pr.step();
    let ring = pr.ring();
    let s = Term::new(pr, random_weight(rng, pr.g), random_orders(rng, pr)).unwrap();
    let next = |src: &Term, rng: &mut ChaCha8Rng| {
        let shift: Vec<u64> = (0..pr.g).map(|_| step * rng.gen_range(0..=3)).collect();
        let orders: Vec<u64> = (0..pr.g)
            .map(|i| {
                let m = src.orders.0[i];
                if m > 0 {
                    step * rng.gen_range(1..=(m + shift[i]) / step)
                } else if rng.gen_bool(0.5) {
                    0
                } else {
                    step * rng.gen_range(1..=3)
                }
            })
            .collect();
        let weight = src.weight.shifted(&pr.weight_shift_of(&shift));
        AdmissibleHom {
            source: src.clone(),
            target: Term::new(pr, weight, orders).unwrap(),
            alpha: rng.gen_range(1..ring.modulus()),
            shift,
        }
    };
    let h = next(&s, rng);
    let f = next(&h.target, rng);
    (h, f)
}

fn single_map(pr: &Params, h: &AdmissibleHom) -> ToyComplex {
    let modules = vec![vec![realize_term(&h.source)], vec![realize_term(&h.target)]];
    let maps = vec![vec![Entry {
        row: 0,
        col: 0,
        alpha: h.alpha,
        shift: h.shift.clone(),
    }]];
    ToyComplex::new(pr.ring(), pr.g, 0, modules, maps).unwrap()
}

/// The coefficient sending `x^e` in the source to the target, zero when either side vanishes.
fn coefficient(tc: &ToyComplex, e: &[i64]) -> u64 {
    let a: Vec<i64> = tc.offsets[0][0].iter().zip(e).map(|(o, x)| o + x).collect();
    let s = tc.strand(&a);
    if s.members[0].is_empty() || s.members[1].is_empty() {
        0
    } else {
        s.matrices[0].get(0, 0)
    }
}

fn criterion_8() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cases = 1000;
    let mut nonzero = 0;
    for _ in 0..cases {
        let pr = random_params(&mut rng);
        let (h, f) = random_chain(&mut rng, &pr);
        let fh = compose(&pr, &f, &h).map_err(|e| e.to_string())?;
        let sum: Vec<u64> = h.shift.iter().zip(&f.shift).map(|(a, b)| a + b).collect();
        ensure(fh.shift == sum, || {
            format!("shifts {:?} + {:?} -> {:?}", h.shift, f.shift, fh.shift)
        })?;
        ensure(fh.alpha == pr.ring().mul(f.alpha, h.alpha), || {
            "coefficients do not multiply".into()
        })?;
        let (th, tf, tfh) = (
            single_map(&pr, &h),
            single_map(&pr, &f),
            single_map(&pr, &fh),
        );
        let bounds: Vec<i64> = h
            .source
            .orders
            .0
            .iter()
            .map(|&m| {
                if m > 0 {
                    m as i64
                } else {
                    4 * pr.step() as i64
                }
            })
            .collect();
        // monomials whose image under f∘h survives in the final target
        let hits: Option<Vec<i64>> = bounds
            .iter()
            .zip(&fh.target.orders.0)
            .zip(&fh.shift)
            .map(|((&b, &m), &r)| {
                let b = if m > 0 { b.min(m as i64 - r as i64) } else { b };
                (b > 0).then_some(b)
            })
            .collect();
        for k in 0..8 {
            let region = match &hits {
                Some(hits) if k % 2 == 0 => hits,
                _ => &bounds,
            };
            let e: Vec<i64> = region.iter().map(|&b| rng.gen_range(0..b)).collect();
            let mid: Vec<i64> = e.iter().zip(&h.shift).map(|(x, r)| x + *r as i64).collect();
            let lhs = pr.ring().mul(coefficient(&tf, &mid), coefficient(&th, &e));
            let rhs = coefficient(&tfh, &e);
            ensure(lhs == rhs, || format!("x^{e:?}: {lhs} != {rhs}"))?;
            nonzero += usize::from(rhs != 0);
        }
    }
    for _ in 0..cases {
        let pr = random_params(&mut rng);
        let (h, f) = random_chain(&mut rng, &pr);
        ensure(is_admissible(&pr, &h) && is_admissible(&pr, &f), || {
            "generator broke".into()
        })?;
        let fh = compose(&pr, &f, &h).map_err(|e| e.to_string())?;
        ensure(is_admissible(&pr, &fh), || {
            format!("{fh:?} is not admissible")
        })?;
    }
    ensure(nonzero > cases, || {
        format!("only {nonzero} nonzero realized coefficients")
    })?;
    Ok(format!(
        "{cases} additivity + {cases} closure cases, {nonzero} nonzero coefficients, {:.2?}",
        t0.elapsed()
    ))
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("favres.toml");
    std::fs::write(&cfg, "p = 2\ng = 3\nm = 1\ndelta_threshold = 5\n")
        .map_err(|e| e.to_string())?;
    let runs: Vec<Vec<u8>> = ["1", "4"]
        .iter()
        .map(|jobs| {
            let o = Command::new(env!("CARGO_BIN_EXE_favres"))
                .args([
                    "--config",
                    cfg.to_str().unwrap(),
                    "resolve",
                    "--k",
                    "1,1,1",
                    "--w",
                    "1",
                ])
                .env("FAVRES_JOBS", jobs)
                .output()
                .expect("binary runs");
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            o.stdout
        })
        .collect();
    ensure(!runs[0].is_empty() && runs[0] == runs[1], || {
        "outputs differ".into()
    })?;
    Ok(format!("{} identical bytes", runs[0].len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("stratum Koszul bracket exactness", criterion_1),
        ("lower Koszul bracket exactness", criterion_2),
        ("random brackets are quasi-isomorphisms", criterion_3),
        ("end-to-end favorable resolutions", criterion_4),
        ("homology kernel against oracle", criterion_5),
        ("pseudo-representation identities", criterion_6),
        ("universal ring relations", criterion_7),
        ("additivity and composition closure", criterion_8),
        ("deterministic resolve output", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let result =
            catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| Err(format!("panicked: {e:?}")));
        match result {
            Ok(note) => println!("PASS {} {name}: {note}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
