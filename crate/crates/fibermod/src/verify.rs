//! Built-in checks of the example families against their closed forms.

use std::time::Instant;

use fibermod_core::cerf::{classify_cobordism, trace_cerf, CobordismClass};
use fibermod_core::family::{
    cylinder_family, hat_family, wrinkled_cylinder_family, zigzag_family, PLFamily, WrinkleParams,
};
use fibermod_core::module3::{
    thin_decompose, BuildOptions, GridPoint, Indecomposability, ModuleContext,
};
use fibermod_core::rational::{format_rational, int, ratio};
use fibermod_core::stability::{check_interleaving_necessary, sup_distance};
use fibermod_core::{Field, Rational};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde_json::{json, Value};

use crate::examples::{bundled, example_family};

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub field: Field,
    /// Corrupts one expected value so the harness must report a failure.
    pub tamper: bool,
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

type CheckResult = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fmt_point(a: &Rational, b: &Rational, c: &Rational) -> String {
    format!(
        "({}, {}, {})",
        format_rational(a),
        format_rational(b),
        format_rational(c)
    )
}

/// `dim H_0` of the hat family in closed form.
pub fn hat_h0(a: &Rational, b: &Rational, c: &Rational) -> usize {
    let one = int(1);
    let two = int(2);
    let left = &two * a;
    let right = &two * (&one - b);
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

fn hat_grid(opts: &VerifyOptions) -> CheckResult {
    let fam = hat_family().refine_uniform(8).map_err(|e| e.to_string())?;
    let p = fam.prism().map_err(|e| e.to_string())?;
    let ctx = ModuleContext::new(&p, opts.field);
    let mods = ctx.build_modules(2, BuildOptions::default());
    let g = ctx.grid();
    let tampered = g.top();
    for x in g.points() {
        let (a, b, c) = (&g.times()[x.a], &g.times()[x.b], &g.levels()[x.c]);
        let mut expected = hat_h0(a, b, c);
        if opts.tamper && x == tampered {
            expected += 1;
        }
        ensure(mods[0].dim(&x) == expected, || {
            format!(
                "dim H0 at {} is {}, expected {expected}",
                fmt_point(a, b, c),
                mods[0].dim(&x)
            )
        })?;
        for (j, m) in mods.iter().enumerate().skip(1) {
            ensure(m.dim(&x) == 0, || format!("H{j} nonzero at {}", fmt_point(a, b, c)))?;
        }
    }
    Ok(format!("{} grid points", g.points().count()))
}

fn zigzag_subdiagram(opts: &VerifyOptions) -> CheckResult {
    for n in 1..=4usize {
        let p = zigzag_family(n)
            .and_then(|f| Ok(f.prism()?))
            .map_err(|e| e.to_string())?;
        let ctx = ModuleContext::new(&p, opts.field);
        let g = ctx.grid();
        let half = g.level_below(&ratio(1, 2)).ok_or("no level at 1/2")?;
        let one = g.level_below(&int(1)).ok_or("no level at 1")?;
        let terminal = GridPoint::new(0, 2 * n, one);
        for i in 0..=n {
            for j in i..=n {
                let x = GridPoint::new(2 * i, 2 * j, half);
                let d = ctx.dim_at(&x, 0).map_err(|e| e.to_string())?;
                ensure(d == j - i + 1, || format!("n={n}: dim at ({i}/{n}, {j}/{n}, 1/2) is {d}"))?;
            }
            let x = GridPoint::new(2 * i, 2 * i, half);
            let r = ctx.composite_rank(&x, &terminal, 0).map_err(|e| e.to_string())?;
            ensure(r == 1, || format!("n={n}: rank from ({i}/{n}, {i}/{n}, 1/2) to top is {r}"))?;
        }
        let m = ctx.build_module(0, BuildOptions::default());
        let cert = ctx.check_indecomposable_sufficient(&m).map_err(|e| e.to_string())?;
        ensure(cert == Indecomposability::Certified, || {
            format!("n={n}: indecomposability {cert:?}")
        })?;
    }
    Ok("n = 1..4 certified".into())
}

fn cylinder_thresholds(opts: &VerifyOptions) -> CheckResult {
    let p = cylinder_family(8)
        .and_then(|f| Ok(f.prism()?))
        .map_err(|e| e.to_string())?;
    let ctx = ModuleContext::new(&p, opts.field);
    let mods = ctx.build_modules(1, BuildOptions::default());
    for x in ctx.grid().points() {
        let c = &ctx.grid().levels()[x.c];
        for (j, threshold) in [(0usize, int(-1)), (1, int(1))] {
            let expected = usize::from(*c >= threshold);
            ensure(mods[j].dim(&x) == expected, || {
                format!("beta{j} at level {} is {}", format_rational(c), mods[j].dim(&x))
            })?;
        }
    }
    for m in &mods {
        let n = thin_decompose(m).map_err(|e| e.to_string())?.len();
        ensure(n == 1, || format!("degree {}: {n} summands", m.degree))?;
    }
    Ok("one summand per degree".into())
}

/// Bounded `H_1` support of the wrinkled cylinder.
pub fn wrinkle_h1(w: &WrinkleParams, a: &Rational, b: &Rational, c: &Rational) -> bool {
    let (half, quarter) = (ratio(1, 2), ratio(1, 4));
    if !(w.m <= *c && *c < w.n) {
        return false;
    }
    let r = &quarter * (&w.n - c) / (&w.n - &w.m);
    *a <= &half - &r && *b >= &half + &r
}

/// Bounded `H_0` support of the wrinkled cylinder.
pub fn wrinkle_h0(w: &WrinkleParams, a: &Rational, b: &Rational, c: &Rational) -> bool {
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

fn wrinkle_supports(opts: &VerifyOptions) -> CheckResult {
    let w = WrinkleParams::default();
    let p = wrinkled_cylinder_family(&w, 8)
        .and_then(|f| f.refine_uniform(8))
        .and_then(|f| Ok(f.prism()?))
        .map_err(|e| e.to_string())?;
    let ctx = ModuleContext::new(&p, opts.field);
    let g = ctx.grid();
    let top = g.levels().len() - 1;
    let build = BuildOptions {
        maps: true,
        ..BuildOptions::default()
    };
    let formulas: [(usize, Support); 2] =
        [(0, wrinkle_h0), (1, wrinkle_h1)];
    for (j, expected) in formulas {
        let m = ctx.build_module(j, build);
        let summands = thin_decompose(&m).map_err(|e| format!("degree {j}: {e}"))?;
        ensure(summands.len() == 2, || format!("degree {j}: {} summands", summands.len()))?;
        let bounded: Vec<_> = summands.iter().filter(|s| s.is_bounded(top)).collect();
        ensure(bounded.len() == 1, || format!("degree {j}: {} bounded summands", bounded.len()))?;
        for x in g.points() {
            let (a, b, c) = (&g.times()[x.a], &g.times()[x.b], &g.levels()[x.c]);
            ensure(bounded[0].contains(&x) == expected(&w, a, b, c), || {
                format!("degree {j}: support differs at {}", fmt_point(a, b, c))
            })?;
        }
    }
    Ok("2 summands in degrees 0 and 1".into())
}

fn random_offsets(f: &PLFamily, rng: &mut ChaCha8Rng) -> Vec<Vec<Rational>> {
    f.vertex_values
        .iter()
        .map(|row| {
            row.iter()
                .map(|_| ratio((rng.next_u32() % 9) as i64 - 4, 16))
                .collect()
        })
        .collect()
}

fn stability_suite(opts: &VerifyOptions) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let families = [
        hat_family(),
        zigzag_family(3).map_err(|e| e.to_string())?,
        cylinder_family(8).map_err(|e| e.to_string())?,
    ];
    let mut count = 0;
    for f in &families {
        let pf = f.prism().map_err(|e| e.to_string())?;
        let top = pf.dim().unwrap_or(0);
        let delta = ratio(1, 4);
        let mut cases = vec![(f.shifted(&delta), true)];
        for _ in 0..2 {
            let offsets = random_offsets(f, &mut rng);
            cases.push((f.perturbed(&offsets).map_err(|e| e.to_string())?, false));
        }
        for (g, uniform) in cases {
            let pg = g.prism().map_err(|e| e.to_string())?;
            let eps = sup_distance(f, &g).map_err(|e| e.to_string())?;
            let mut any_fail_half = false;
            for j in 0..=top {
                let run = |e: &Rational| {
                    check_interleaving_necessary(&pf, &pg, j, e, opts.field)
                        .map_err(|e| e.to_string())
                };
                ensure(run(&eps)?.overall(), || {
                    format!("{}: fails at epsilon {} in degree {j}", g.label, format_rational(&eps))
                })?;
                any_fail_half |= !run(&(&eps / int(2)))?.overall();
                count += 1;
            }
            ensure(!uniform || any_fail_half, || {
                format!("{}: passes at half the shift", g.label)
            })?;
        }
    }
    Ok(format!("{count} reports"))
}

/// Expected class of the hat strip `(a, b) × {c}`, where one is stated.
pub fn hat_expected_class(a: &Rational, b: &Rational, c: &Rational) -> Option<CobordismClass> {
    let (half, one, two) = (ratio(1, 2), int(1), int(2));
    let g = |t: &Rational| -> Rational {
        let s = &one - t;
        &two * if *t < s { t.clone() } else { s }
    };
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

fn hat_cobordism(_: &VerifyOptions) -> CheckResult {
    let p = hat_family().prism().map_err(|e| e.to_string())?;
    let d = trace_cerf(&p, Field::GF2).map_err(|e| e.to_string())?;
    let mut tested = 0;
    for i in 0..=8 {
        for j in i..=8 {
            for k in 0..=8 {
                let (a, b, c) = (ratio(i, 8), ratio(j, 8), ratio(k, 8));
                let Some(expected) = hat_expected_class(&a, &b, &c) else {
                    continue;
                };
                let got = classify_cobordism(&d, &a, &b, &c).class;
                ensure(got == expected, || {
                    format!("{} is {}, expected {}", fmt_point(&a, &b, &c), got.name(), expected.name())
                })?;
                tested += 1;
            }
        }
    }
    Ok(format!("{tested} strips"))
}

fn euler_consistency(opts: &VerifyOptions) -> CheckResult {
    for name in bundled() {
        let p = example_family(&name)
            .map_err(|e| e.to_string())?
            .prism()
            .map_err(|e| e.to_string())?;
        let ctx = ModuleContext::new(&p, opts.field);
        let top = p.dim().unwrap_or(0);
        ctx.betti_report(top).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok("all bundled examples".into())
}

type Check = fn(&VerifyOptions) -> CheckResult;

const CHECKS: [(&str, Check); 7] = [
    ("hat_grid", hat_grid),
    ("zigzag_subdiagram", zigzag_subdiagram),
    ("cylinder_thresholds", cylinder_thresholds),
    ("wrinkle_supports", wrinkle_supports),
    ("stability", stability_suite),
    ("hat_cobordism", hat_cobordism),
    ("euler", euler_consistency),
];

pub fn run_suite(opts: &VerifyOptions) -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|(name, check)| {
            let start = Instant::now();
            let result = check(opts);
            let seconds = start.elapsed().as_secs_f64();
            let (pass, detail) = match result {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckOutcome {
                name,
                pass,
                detail,
                seconds,
            }
        })
        .collect()
}

pub fn summary_json(opts: &VerifyOptions, outcomes: &[CheckOutcome]) -> Value {
    json!({
        "checks": outcomes.iter().map(|o| json!({
            "detail": o.detail,
            "name": o.name,
            "pass": o.pass,
        })).collect::<Vec<_>>(),
        "field": opts.field.characteristic(),
        "overall": outcomes.iter().all(|o| o.pass),
    })
}
