//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines show up in
//! `cargo test` output; the process fails if any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use girthforge::cycles::{poly_girth, sc_girth, Girth, PathGraph, PolyCycles};
use girthforge::optimizer::{
    build_cost_tables, crm_construct, min_lifting, select_spreading, Algorithm, ConstructParams,
    Cost, Descent, Problem, Template,
};
use girthforge::oracle::{exhaustive_cycle_count, graph_girth, verify_construction, TannerGraph};
use girthforge::simulate::{run_ber, StopRule, Transmit};
use girthforge::spreading::{spread, ScCode, SpreadingSpec};
use girthforge::{BivariatePolyMatrix, Monomial, Protomatrix, UnivariatePolyMatrix};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Random type-I bivariate matrix with at most `rows x cols` blocks.
fn random_bivariate(rng: &mut ChaCha8Rng, max_rows: usize, max_cols: usize, max_sx: u32, max_sy: u32) -> BivariatePolyMatrix {
    let rows = rng.random_range(1..=max_rows);
    let cols = rng.random_range(1..=max_cols);
    let sx = rng.random_range(2..=max_sx);
    let sy = rng.random_range(1..=max_sy);
    let mut h = BivariatePolyMatrix::new(rows, cols, sx, sy).unwrap();
    for i in 0..rows {
        for j in 0..cols {
            let roll: f64 = rng.random();
            let mult = if roll < 0.25 {
                0
            } else if roll < 0.85 || sy < 2 {
                1
            } else {
                2
            };
            for y in sample(rng, sy as usize, mult).iter() {
                h.insert(i, j, Monomial::new(rng.random_range(0..sx), y as u32))
                    .unwrap();
            }
        }
    }
    h
}

fn bivariate_example() -> BivariatePolyMatrix {
    BivariatePolyMatrix::from_terms_shared_y(
        2,
        3,
        10,
        3,
        [
            (0, 0, 2, 1),
            (0, 1, 5, 0),
            (0, 1, 7, 2),
            (1, 0, 1, 0),
            (1, 1, 8, 2),
            (1, 2, 3, 1),
            (1, 2, 8, 1),
        ],
    )
    .unwrap()
}

fn univariate_example() -> UnivariatePolyMatrix {
    let e = |v: &[u32]| v.to_vec();
    let z: Vec<u32> = Vec::new();
    let rows = vec![
        vec![z.clone(), z.clone(), e(&[2]), e(&[5]), e(&[7]), z.clone(), z.clone(), z.clone(), z.clone()],
        vec![e(&[2]), z.clone(), z.clone(), z.clone(), e(&[5]), e(&[7]), z.clone(), z.clone(), z.clone()],
        vec![z.clone(), e(&[2]), z.clone(), e(&[7]), z.clone(), e(&[5]), z.clone(), z.clone(), z.clone()],
        vec![e(&[1]), z.clone(), z.clone(), z.clone(), e(&[8]), z.clone(), z.clone(), z.clone(), e(&[3, 8])],
        vec![z.clone(), e(&[1]), z.clone(), z.clone(), z.clone(), e(&[8]), e(&[3, 8]), z.clone(), z.clone()],
        vec![z.clone(), z.clone(), e(&[1]), e(&[8]), z.clone(), z.clone(), z.clone(), e(&[3, 8]), z],
    ];
    UnivariatePolyMatrix::from_entries(10, &rows).unwrap()
}

fn c1_y_expansion() -> Outcome {
    let got = bivariate_example().y_expand();
    let want = univariate_example();
    ensure((got.rows(), got.cols()) == (6, 9), || format!("shape {}x{}", got.rows(), got.cols()))?;
    for i in 0..6 {
        for j in 0..9 {
            let mut a = got.entry(i, j).to_vec();
            a.sort_unstable();
            ensure(a == want.entry(i, j), || {
                format!("entry ({i},{j}): got {a:?}, want {:?}", want.entry(i, j))
            })?;
        }
    }
    ensure(got.x_expand() == want.x_expand(), || "binary expansions differ".into())?;
    Ok("54 entries match exactly".into())
}

fn c2_crm_shape() -> Outcome {
    let spec = SpreadingSpec::new(vec![
        Protomatrix::from_rows(&[vec![1, 1]]).unwrap(),
        Protomatrix::from_rows(&[vec![0, 1]]).unwrap(),
        Protomatrix::from_rows(&[vec![1, 1]]).unwrap(),
    ])
    .map_err(|e| e.to_string())?;
    let grid = Template::from_spec(&spec).crm(6);
    // Term ids 0..4 are a1..a5.
    let n = None;
    let a = |k: usize| Some(k - 1);
    let want: [[Option<usize>; 6]; 5] = [
        [a(1), a(2), n, n, n, n],
        [n, a(3), a(1), a(2), n, n],
        [a(4), a(5), n, a(3), a(1), a(2)],
        [n, n, a(4), a(5), n, a(3)],
        [n, n, n, n, a(4), a(5)],
    ];
    ensure((grid.rows(), grid.cols()) == (5, 6), || {
        format!("shape {}x{}", grid.rows(), grid.cols())
    })?;
    for (i, row) in want.iter().enumerate() {
        for (j, w) in row.iter().enumerate() {
            let cell = grid.cell(i, j);
            let got = match cell {
                [] => None,
                [t] => Some(*t),
                _ => return Err(format!("entry ({i},{j}) has {} terms", cell.len())),
            };
            ensure(got == *w, || format!("entry ({i},{j}): got {got:?}, want {w:?}"))?;
        }
    }
    Ok("5x6, structure matches".into())
}

fn c3_oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut instances, mut naive_exact, mut cycles_seen) = (0, 0, 0u64);
    while instances < 200 {
        let h = random_bivariate(&mut rng, 3, 6, 16, 4);
        let pcm = h.full_expand();
        let graph = TannerGraph::new(&pcm);
        if graph.edge_count() > girthforge::oracle::MAX_EXHAUSTIVE_EDGES {
            continue;
        }
        instances += 1;
        let pg = poly_girth(&h, 14);
        let gg = graph_girth(&pcm, 14);
        ensure(pg == gg, || format!("instance {instances}: poly girth {pg}, graph girth {gg}"))?;
        let exhaustive = exhaustive_cycle_count(&graph, 8).map_err(|e| e.to_string())?;
        let cycles = PolyCycles::new(&h);
        let lifted = cycles.lifted_cycle_counts(8);
        ensure(lifted == exhaustive, || {
            format!("instance {instances}: class-derived {lifted:?}, exhaustive {exhaustive:?}")
        })?;
        let k = u64::from(h.sx()) * u64::from(h.sy());
        let naive: BTreeMap<usize, u64> =
            cycles.count_cycles(8).into_iter().map(|(l, c)| (l, c * k)).collect();
        naive_exact += usize::from(naive == exhaustive);
        cycles_seen += exhaustive.values().sum::<u64>();
    }
    Ok(format!(
        "{instances} instances, girth and orbit-corrected counts agree ({cycles_seen} cycles); \
         plain classes x Sx*Sy exact on {naive_exact}/{instances}"
    ))
}

fn weight(g: usize, ell: usize) -> u64 {
    5u64.pow(((g.max(12) - 2 - ell) / 2) as u32)
}

fn c4_cost_tables() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut templates, mut entries) = (0, 0usize);
    while templates < 60 {
        let m = rng.random_range(1..=3);
        let n = rng.random_range(1..=4);
        let rows: Vec<Vec<u32>> = (0..m)
            .map(|_| (0..n).map(|_| rng.random_range(0..=2)).collect())
            .collect();
        let block = Protomatrix::from_rows(&rows).unwrap();
        let terms = block.edge_count();
        if terms == 0 || terms > 12 {
            continue;
        }
        let w = rng.random_range(1..=3);
        let spec = SpreadingSpec::random(&block, w, &mut rng);
        let g = [6, 8, 10][rng.random_range(0..3)];
        let sx = rng.random_range(2..=9);
        let sy = rng.random_range(block.max_entry().max(1)..=3);
        let use_crm = w > 1 || rng.random_bool(0.5);
        let (problem, grid, restrict) = if use_crm {
            let t = Template::from_spec(&spec);
            (Problem::crm(&spec, sx, sy, g), t.crm(g - 2), Some(n))
        } else {
            let t = Template::block(&block);
            (Problem::block(&block, sx, sy, g), t.components()[0].clone(), None)
        };
        templates += 1;
        let template = problem.template();
        let (x, y) = problem.random_assignment(&mut rng);
        let tables = build_cost_tables(&problem, &x, &y);
        let graph = PathGraph::from_grid(&grid);
        let paths: Vec<_> = (4..=g - 2)
            .step_by(2)
            .flat_map(|ell| {
                graph
                    .collect_closed_paths(ell, restrict)
                    .into_iter()
                    .map(move |p| (ell, p))
            })
            .collect();
        let term = |e: u32| *graph.term(&grid, e);
        let recount = |e: usize, xs: &[u32], ys: &[u32]| -> u64 {
            paths
                .iter()
                .filter(|(_, p)| p.alternating_sum(|ed| i64::from(term(ed) == e)) != 0)
                .filter(|(_, p)| {
                    p.alternating_sum(|ed| i64::from(xs[term(ed)])).rem_euclid(i64::from(sx)) == 0
                        && p.alternating_sum(|ed| i64::from(ys[term(ed)])).rem_euclid(i64::from(sy)) == 0
                })
                .map(|(ell, _)| weight(g, *ell))
                .sum()
        };
        for e in 0..template.term_count() {
            for s in 0..sx {
                let mut x2 = x.clone();
                x2[e] = s;
                let want = Cost::Finite(recount(e, &x2, &y));
                let got = tables.cost(girthforge::optimizer::Axis::X, e, s);
                ensure(got == want, || {
                    format!("template {templates}: x-table term {e} value {s}: {got:?} vs {want:?}")
                })?;
                entries += 1;
            }
            for s in 0..sy {
                let mut y2 = y.clone();
                y2[e] = s;
                let blocked = template.siblings(e).iter().any(|&o| y[o] == s);
                let want = if blocked {
                    Cost::Infeasible
                } else {
                    Cost::Finite(recount(e, &x, &y2))
                };
                let got = tables.cost(girthforge::optimizer::Axis::Y, e, s);
                ensure(got == want, || {
                    format!("template {templates}: y-table term {e} value {s}: {got:?} vs {want:?}")
                })?;
                entries += 1;
            }
        }
    }
    Ok(format!("{templates} templates, {entries} table entries match the recount"))
}

fn c5_termination() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut descents, mut steps) = (0, 0);
    for k in 0..40 {
        let block = Protomatrix::all_ones(rng.random_range(2..=3), rng.random_range(3..=6));
        let w = rng.random_range(1..=3);
        let spec = SpreadingSpec::random(&block, w, &mut rng);
        let g = [8, 10][k % 2];
        let problem = Problem::crm(&spec, rng.random_range(5..=20), 1, g);
        for _ in 0..10 {
            let (x, y) = problem.random_assignment(&mut rng);
            let mut d = Descent::new(&problem, x, y);
            let mut guard = 0;
            while let Some(step) = d.next_step() {
                let before = d.cost();
                d.apply(step);
                let recount = problem.total_cost(d.x(), d.y());
                ensure(recount == d.cost() && d.cost() < before, || {
                    format!("problem {k}: step {step:?} gave cost {recount}, predicted {}, before {before}", d.cost())
                })?;
                guard += 1;
                ensure(guard <= 100_000, || "descent did not halt".into())?;
            }
            ensure(d.trace().windows(2).all(|t| t[1] < t[0]), || "trace not strictly decreasing".into())?;
            descents += 1;
            steps += guard;
        }
    }
    Ok(format!("{descents} descents, {steps} steps, every step strictly decreasing and recount-exact"))
}

fn found(alg: Algorithm, spec: &SpreadingSpec, range: std::ops::RangeInclusive<u32>, sy: u32, g: usize, seed: u64) -> Result<(u32, ScCode), String> {
    let p = min_lifting(alg, spec, range.clone(), sy, g, 200, seed).map_err(|e| e.to_string())?;
    match (p.s_min, p.code) {
        (Some(s), Some(code)) => Ok((s, code)),
        _ => Err(format!("no success for Sx in {range:?}")),
    }
}

fn c6_sc_36() -> Outcome {
    let block = Protomatrix::all_ones(3, 6);
    let spec = select_spreading(&block, 2, 10, 64, 1);
    let (s3, code3) = found(Algorithm::Crm, &spec, 20..=30, 1, 10, 1)?;
    let r3 = verify_construction(&code3, 10, None).map_err(|e| e.to_string())?;
    let (s2, code2) = found(Algorithm::ConstructAndSpread, &spec, 36..=50, 1, 10, 1)?;
    let r2 = verify_construction(&code2, 10, None).map_err(|e| e.to_string())?;
    Ok(format!(
        "CRM-based Smin={s3} (reference 26, oracle girth {}); construct-and-spread Smin={s2} (reference 44, oracle girth {})",
        r3.girth, r2.girth
    ))
}

fn c7_sc_420() -> Outcome {
    let block = Protomatrix::all_ones(4, 20);
    let spec = select_spreading(&block, 3, 8, 64, 7);
    let (s, code) = found(Algorithm::Crm, &spec, 15..=25, 4, 8, 7)?;
    let r = verify_construction(&code, 8, None).map_err(|e| e.to_string())?;
    let crm_girth = graph_girth(&code.crm(6).full_expand(), 10);
    ensure(crm_girth.at_least(8), || format!("CRM expansion girth {crm_girth}"))?;
    Ok(format!(
        "Smin={s} (reference 19); oracle girth {} over {} batches, CRM expansion girth {crm_girth}",
        r.girth, r.batches
    ))
}

fn c8_monotone() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut raised = 0;
    for k in 0..120 {
        let h = random_bivariate(&mut rng, 3, 6, 12, 3);
        let w = rng.random_range(1..=4);
        let spec = SpreadingSpec::random(&h.protograph(), w, &mut rng);
        let comps = spread(&h, &spec.assignment()).map_err(|e| e.to_string())?;
        let code = ScCode::new(comps).map_err(|e| e.to_string())?;
        let block = graph_girth(&h.full_expand(), 16);
        let sc = graph_girth(&code.expand(w + 2), 16);
        ensure(sc.value() >= block.value(), || {
            format!("instance {k}: SC girth {sc} below block girth {block}")
        })?;
        raised += usize::from(sc.value() > block.value());
    }
    Ok(format!("120 instances, no violation ({raised} with strictly larger SC girth)"))
}

fn c9_ber() -> Outcome {
    let block = Protomatrix::all_ones(3, 6);
    let spec = select_spreading(&block, 2, 10, 64, 1);
    let params = |girth, seed| ConstructParams {
        sx: 30,
        sy: 1,
        girth,
        seed,
        budget: 200,
    };
    let g10 = crm_construct(&spec, &params(10, 1)).map_err(|e| e.to_string())?.code;
    verify_construction(&g10, 10, None).map_err(|e| e.to_string())?;
    let g6 = (0..50)
        .filter_map(|seed| crm_construct(&spec, &params(6, seed)).ok())
        .map(|c| c.code)
        .find(|c| sc_girth(c, 8) == Girth::Exact(6))
        .ok_or("no girth-6 code found")?;
    let stop = StopRule {
        min_frame_errors: 100,
        max_frames: 400_000,
    };
    let ebn0 = 2.0;
    let run = |c: &ScCode| run_ber(&c.expand(20), &[ebn0], stop, 50, Transmit::AllZero, 9)[0].clone();
    let (r6, r10) = (run(&g6), run(&g10));
    let line = format!(
        "Eb/N0 {ebn0} dB: girth 6 BER {:.3e} ({} frames), girth 10 BER {:.3e} ({} frames)",
        r6.ber, r6.frames, r10.ber, r10.frames
    );
    ensure(r10.ber < r6.ber && r6.frame_errors >= 100 && r10.frame_errors >= 100, || line.clone())?;
    Ok(line)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("bivariate y-expansion fidelity", c1_y_expansion),
        ("CRM dimensions", c2_crm_shape),
        ("oracle equivalence", c3_oracle_equivalence),
        ("cost-table correctness", c4_cost_tables),
        ("greedy termination", c5_termination),
        ("(3,6) w=2 g=10 minimum lifting", c6_sc_36),
        ("(4,20) w=3 g=8 minimum lifting", c7_sc_420),
        ("spreading monotonicity", c8_monotone),
        ("BER ordering girth 10 vs 6", c9_ber),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} [{secs:.1}s]", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} [{secs:.1}s]", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
