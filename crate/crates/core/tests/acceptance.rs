//! Acceptance criteria, one PASS/FAIL line each.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use fibermod_core::cerf::{classify_cobordism, trace_cerf, CobordismClass};
use fibermod_core::family::{
    cylinder_family, estimator_positions, hat_family, kde_family, wrinkled_cylinder_family,
    zigzag_family, EstimatorGrid, KernelKind, KernelSpec, PLFamily, WrinkleParams,
};
use fibermod_core::module3::{
    thin_decompose, BuildOptions, GridPoint, Indecomposability, ModuleContext,
};
use fibermod_core::rational::{format_rational, int, ratio};
use fibermod_core::stability::{check_interleaving_necessary, sup_distance};
use fibermod_core::{Field, Rational};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn show(a: &Rational, b: &Rational, c: &Rational) -> String {
    format!("({}, {}, {})", format_rational(a), format_rational(b), format_rational(c))
}

fn gf3() -> Field {
    Field::new(3).unwrap()
}

fn hat_h0(a: &Rational, b: &Rational, c: &Rational) -> usize {
    let one = int(1);
    let left = int(2) * a;
    let right = int(2) * (&one - b);
    let (lo, hi) = if left <= right { (left, right) } else { (right, left) };
    if *c >= one {
        1
    } else if hi <= *c {
        2
    } else if lo <= *c {
        1
    } else {
        0
    }
}

fn hat_grid() -> Outcome {
    let f = hat_family().refine_uniform(8).map_err(err)?;
    let p = f.prism().map_err(err)?;
    let mut points = 0;
    for field in [Field::GF2, gf3()] {
        let ctx = ModuleContext::new(&p, field);
        let g = ctx.grid();
        for k in 0..=8 {
            ensure(g.levels().contains(&ratio(k, 8)), || format!("level {k}/8 missing"))?;
        }
        ensure(g.levels().iter().any(|l| *l > int(1)), || "no level above 1".into())?;
        let mods = ctx.build_modules(2, BuildOptions::default());
        for x in g.points() {
            let (a, b, c) = (&g.times()[x.a], &g.times()[x.b], &g.levels()[x.c]);
            let want = hat_h0(a, b, c);
            ensure(mods[0].dim(&x) == want, || {
                format!("dim H0 at {} is {}, expected {want}", show(a, b, c), mods[0].dim(&x))
            })?;
            for m in &mods[1..] {
                ensure(m.dim(&x) == 0, || format!("H{} nonzero at {}", m.degree, show(a, b, c)))?;
            }
            points += 1;
        }
    }
    Ok(format!("{points} points over GF(2) and GF(3)"))
}

/// Height of the zigzag at the `k`-th eighth of a tooth: 0 at `i/n`, 1 at `(2i+1)/(2n)`.
fn zigzag_height(k: usize) -> Rational {
    let r = (k % 8) as i64;
    ratio(if r <= 4 { r } else { 8 - r }, 4)
}

/// Runs of consecutive samples on `[i/n, j/n]` lying in the sublevel set `≤ 1/2`.
fn zigzag_components(i: usize, j: usize) -> usize {
    let half = ratio(1, 2);
    let mut runs = 0;
    let mut inside = false;
    for k in 8 * i..=8 * j {
        let now = zigzag_height(k) <= half;
        if now && !inside {
            runs += 1;
        }
        inside = now;
    }
    runs
}

fn zigzag() -> Outcome {
    let mut checked = 0;
    for n in 1..=4usize {
        let p = zigzag_family(n).map_err(err)?.prism().map_err(err)?;
        let ctx = ModuleContext::new(&p, Field::GF2);
        let g = ctx.grid();
        let half = g.level_below(&ratio(1, 2)).ok_or("no level 1/2")?;
        ensure(g.levels()[half] == ratio(1, 2), || "level 1/2 not on grid".into())?;
        let one = g.level_below(&int(1)).ok_or("no level 1")?;
        let terminal = GridPoint::new(0, 2 * n, one);
        for i in 0..=n {
            for j in i..=n {
                let x = GridPoint::new(2 * i, 2 * j, half);
                let got = ctx.dim_at(&x, 0).map_err(err)?;
                let oracle = zigzag_components(i, j);
                ensure(oracle == j - i + 1, || format!("oracle gives {oracle} for n={n} ({i}, {j})"))?;
                ensure(got == oracle, || format!("n={n}: dim at ({i}/{n}, {j}/{n}, 1/2) is {got}, oracle {oracle}"))?;
                checked += 1;
            }
            let x = GridPoint::new(2 * i, 2 * i, half);
            let r = ctx.composite_rank(&x, &terminal, 0).map_err(err)?;
            ensure(r == 1, || format!("n={n}: rank from ({i}/{n}, {i}/{n}, 1/2) to top is {r}"))?;
        }
        let m = ctx.build_module(0, BuildOptions::default());
        let cert = ctx.check_indecomposable_sufficient(&m).map_err(err)?;
        ensure(cert == Indecomposability::Certified, || format!("n={n}: {cert:?}"))?;
    }
    Ok(format!("{checked} subdiagram points, n = 1..4 certified"))
}

fn cylinder() -> Outcome {
    let p = cylinder_family(8).map_err(err)?.prism().map_err(err)?;
    let ctx = ModuleContext::new(&p, Field::GF2);
    let mods = ctx.build_modules(1, BuildOptions::default());
    for x in ctx.grid().points() {
        let c = &ctx.grid().levels()[x.c];
        for (j, threshold) in [(0usize, int(-1)), (1, int(1))] {
            let want = usize::from(*c >= threshold);
            ensure(mods[j].dim(&x) == want, || {
                format!("beta{j} at level {} is {}", format_rational(c), mods[j].dim(&x))
            })?;
        }
    }
    for m in &mods {
        let n = thin_decompose(m).map_err(err)?.len();
        ensure(n == 1, || format!("degree {}: {n} summands", m.degree))?;
    }
    Ok("thresholds -1 and 1, one summand per degree".into())
}

fn wrinkle_h1(w: &WrinkleParams, a: &Rational, b: &Rational, c: &Rational) -> bool {
    let (half, quarter) = (ratio(1, 2), ratio(1, 4));
    if !(w.m <= *c && *c < w.n) {
        return false;
    }
    let r = &quarter * (&w.n - c) / (&w.n - &w.m);
    *a <= &half - &r && *b >= &half + &r
}

fn wrinkle_h0(w: &WrinkleParams, a: &Rational, b: &Rational, c: &Rational) -> bool {
    let (half, quarter) = (ratio(1, 2), ratio(1, 4));
    if w.l <= *c && *c < w.m {
        let r = &quarter * (c - &w.l) / (&w.m - &w.l);
        return *a <= &half + &r && *b >= &half - &r;
    }
    if w.m <= *c && *c < w.n {
        let r = &quarter * (&w.n - c) / (&w.n - &w.m);
        return &half - &r < *a && *b < &half + &r;
    }
    false
}

type Support = fn(&WrinkleParams, &Rational, &Rational, &Rational) -> bool;

fn wrinkled_cylinder() -> Outcome {
    let w = WrinkleParams::default();
    let build = BuildOptions { maps: true, ..BuildOptions::default() };
    let mut points = 0;
    for refine in [1, 8] {
        let f = wrinkled_cylinder_family(&w, 8).and_then(|f| f.refine_uniform(refine)).map_err(err)?;
        let p = f.prism().map_err(err)?;
        let ctx = ModuleContext::new(&p, Field::GF2);
        let g = ctx.grid();
        let top = g.levels().len() - 1;
        let formulas: [(usize, Support); 2] = [(0, wrinkle_h0), (1, wrinkle_h1)];
        for (j, expected) in formulas {
            let m = ctx.build_module(j, build);
            let summands = thin_decompose(&m).map_err(|e| format!("degree {j}: {e}"))?;
            ensure(summands.len() == 2, || format!("degree {j}: {} summands", summands.len()))?;
            let bounded: Vec<_> = summands.iter().filter(|s| s.is_bounded(top)).collect();
            ensure(bounded.len() == 1, || format!("degree {j}: {} bounded summands", bounded.len()))?;
            for x in g.points() {
                let (a, b, c) = (&g.times()[x.a], &g.times()[x.b], &g.levels()[x.c]);
                ensure(bounded[0].contains(&x) == expected(&w, a, b, c), || {
                    format!("1/{refine} grid, degree {j}: support differs at {}", show(a, b, c))
                })?;
                points += 1;
            }
        }
    }
    Ok(format!("{points} support points, 2 summands in degrees 0 and 1"))
}

fn stability() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let shifts = [ratio(1, 4), ratio(-1, 4), ratio(1, 8), ratio(-3, 8)];
    let mut reports = 0;
    for f in [hat_family(), zigzag_family(3).map_err(err)?, cylinder_family(8).map_err(err)?] {
        let pf = f.prism().map_err(err)?;
        let top = pf.dim().unwrap_or(0);
        let mut cases: Vec<(PLFamily, bool)> = shifts.iter().map(|d| (f.shifted(d), true)).collect();
        while cases.len() < 20 {
            let offsets: Vec<Vec<Rational>> = f
                .vertex_values
                .iter()
                .map(|row| row.iter().map(|_| ratio((rng.next_u32() % 9) as i64 - 4, 16)).collect())
                .collect();
            cases.push((f.perturbed(&offsets).map_err(err)?, false));
        }
        for (g, uniform) in cases {
            let pg = g.prism().map_err(err)?;
            let eps = sup_distance(&f, &g).map_err(err)?;
            let half = &eps / int(2);
            let mut fails_at_half = false;
            for j in 0..=top {
                for (x, y) in [(&pf, &pg), (&pg, &pf)] {
                    let at = |e: &Rational| check_interleaving_necessary(x, y, j, e, Field::GF2).map_err(err);
                    ensure(at(&eps)?.overall(), || {
                        format!("{}: fails at {} in degree {j}", f.label, format_rational(&eps))
                    })?;
                    if uniform {
                        fails_at_half |= !at(&half)?.overall();
                    }
                    reports += 1;
                }
            }
            ensure(!uniform || fails_at_half, || {
                format!("{}: shift by {} passes at half", f.label, format_rational(&eps))
            })?;
        }
    }
    Ok(format!("60 perturbations, {reports} reports"))
}

fn hat_class(a: &Rational, b: &Rational, c: &Rational) -> Option<CobordismClass> {
    let (half, one, two) = (ratio(1, 2), int(1), int(2));
    let g = |t: &Rational| &two * t.clone().min(&one - t);
    if *a < half && &two * a < *c && *c < g(b) {
        return Some(CobordismClass::LeftProduct);
    }
    if *b > half && &two * (&one - b) < *c && *c < g(a) {
        return Some(CobordismClass::RightProduct);
    }
    let lo = (&two * a).max(&two * (&one - b));
    if *a < half && half < *b && lo < *c && *c < one {
        return Some(CobordismClass::Mixed);
    }
    None
}

fn hat_cobordism() -> Outcome {
    let p = hat_family().prism().map_err(err)?;
    let d = trace_cerf(&p, Field::GF2).map_err(err)?;
    let mut counts = [0usize; 3];
    for i in 0..=8 {
        for j in i..=8 {
            for k in 0..=8 {
                let (a, b, c) = (ratio(i, 8), ratio(j, 8), ratio(k, 8));
                let Some(want) = hat_class(&a, &b, &c) else { continue };
                let got = classify_cobordism(&d, &a, &b, &c).class;
                ensure(got == want, || format!("{} is {}, expected {}", show(&a, &b, &c), got.name(), want.name()))?;
                counts[match want {
                    CobordismClass::LeftProduct => 0,
                    CobordismClass::RightProduct => 1,
                    _ => 2,
                }] += 1;
            }
        }
    }
    ensure(counts.iter().all(|&n| n > 0), || format!("empty region: {counts:?}"))?;
    Ok(format!("left {}, right {}, mixed {}", counts[0], counts[1], counts[2]))
}

fn homology_oracle() -> Outcome {
    let fields = common::fields();
    let down_sets = common::all_down_sets(5);
    ensure(down_sets.len() == 7581, || format!("{} down-sets", down_sets.len()))?;
    for complex in &down_sets {
        common::check(complex, &fields)?;
    }
    let random = common::random_complexes(200, 7);
    ensure(random.iter().all(|c| c.len() <= 12), || "random complex too large".into())?;
    for complex in &random {
        common::check(complex, &fields)?;
    }
    Ok(format!("{} down-sets and {} random complexes", down_sets.len(), random.len()))
}

fn euler() -> Outcome {
    let w = WrinkleParams::default();
    let mut families = vec![hat_family(), cylinder_family(8).map_err(err)?];
    for n in 1..=4 {
        families.push(zigzag_family(n).map_err(err)?);
    }
    families.push(wrinkled_cylinder_family(&w, 8).map_err(err)?);
    let mut slabs = 0;
    for f in &families {
        let p = f.prism().map_err(err)?;
        let top = p.dim().unwrap_or(0);
        let ctx = ModuleContext::new(&p, gf3());
        let report = ctx.betti_report(top).map_err(|e| format!("{}: {e}", f.label))?;
        let g = ctx.grid();
        for x in g.points() {
            let slab = p.slab_sublevel(x.a, x.b, &g.levels()[x.c]).map_err(err)?;
            let counted: i64 = slab
                .simplex_counts()
                .iter()
                .enumerate()
                .map(|(d, &n)| if d % 2 == 0 { n as i64 } else { -(n as i64) })
                .sum();
            let alternating: i64 = report
                .dims
                .iter()
                .enumerate()
                .map(|(j, a)| if j % 2 == 0 { *a.get(&x) as i64 } else { -(*a.get(&x) as i64) })
                .sum();
            ensure(*report.euler.get(&x) == counted && alternating == counted, || {
                format!("{} at {x:?}: chi {} vs count {counted}", f.label, report.euler.get(&x))
            })?;
            slabs += 1;
        }
    }
    Ok(format!("{slabs} slabs over {} examples", families.len()))
}

fn gaussian_maxima(samples: &[f64], alpha: f64, xs: &[f64]) -> usize {
    let density: Vec<f64> = xs
        .iter()
        .map(|x| samples.iter().map(|s| (-0.5 * ((x - s) / alpha).powi(2)).exp()).sum())
        .collect();
    (0..density.len())
        .filter(|&i| {
            let left = i == 0 || density[i - 1] < density[i];
            let right = i + 1 == density.len() || density[i + 1] < density[i];
            left && right
        })
        .count()
}

fn kde() -> Outcome {
    let samples = [-1.0, 1.0];
    let grid = EstimatorGrid { bandwidth: (0.2, 2.0), domain: None, t_res: 19, x_res: 81 };
    let f = kde_family(&samples, KernelSpec::new(KernelKind::Gaussian), &grid).map_err(err)?;
    let (alphas, xs) = estimator_positions(&grid, &samples).map_err(err)?;
    let p = f.prism().map_err(err)?;
    let ctx = ModuleContext::new(&p, Field::GF2);
    let g = ctx.grid();
    let mut comps = Vec::with_capacity(alphas.len());
    for a in 0..g.times().len() {
        let mut best = 0;
        for c in 0..g.levels().len() {
            best = best.max(ctx.dim_at(&GridPoint::new(a, a, c), 0).map_err(err)?);
        }
        comps.push(best);
    }
    for (k, (&n, &alpha)) in comps.iter().zip(&alphas).enumerate() {
        let oracle = gaussian_maxima(&samples, alpha, &xs);
        ensure(n == oracle, || format!("alpha_{k} = {alpha}: {n} components, {oracle} maxima"))?;
    }
    ensure(comps.first() == Some(&2) && comps.last() == Some(&1), || format!("counts {comps:?}"))?;
    let k = comps.iter().position(|&n| n == 1).ok_or("no merge")?;
    let fine: Vec<f64> = (0..=1800).map(|i| 0.2 + 0.001 * i as f64).collect();
    let split = fine.iter().rposition(|&a| gaussian_maxima(&samples, a, &xs) == 2).ok_or("never two modes")?;
    let (lo, hi) = (fine[split], fine[split + 1]);
    ensure(alphas[k - 1] < hi && lo < alphas[k], || {
        format!("merge in ({lo}, {hi}] not inside ({}, {}]", alphas[k - 1], alphas[k])
    })?;
    Ok(format!("merge between alpha {:.4} and {:.4}, scan {lo:.3}..{hi:.3}", alphas[k - 1], alphas[k]))
}

type Criterion = (&'static str, fn() -> Outcome, f64);

const CRITERIA: [Criterion; 9] = [
    ("hat grid", hat_grid, 5.0),
    ("zigzag", zigzag, 10.0),
    ("cylinder", cylinder, 10.0),
    ("wrinkled cylinder", wrinkled_cylinder, 30.0),
    ("stability", stability, 60.0),
    ("hat cobordism", hat_cobordism, 5.0),
    ("homology oracle", homology_oracle, 120.0),
    ("euler", euler, f64::INFINITY),
    ("kde", kde, 30.0),
];

fn main() -> ExitCode {
    let mut failed = 0;
    for (i, (name, run, budget)) in CRITERIA.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let seconds = start.elapsed().as_secs_f64();
        let outcome = match outcome {
            Ok(d) if seconds > *budget => Err(format!("{d}; over the {budget} s budget")),
            other => other,
        };
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failed += usize::from(outcome.is_err());
        println!("criterion {} {name}: {status} ({seconds:.2} s) {detail}", i + 1);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
