//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run everything with `cargo test --release -p perpetual-core --test
//! acceptance`, or pass criterion numbers after `--` to run a subset.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use perpetual_core::fock_optics::{
    coherent_expansion, dispersive_evolve, distill, distill_fidelity, distill_probability,
    measure_atom_pm, AtomFieldState, DispersivePhase, DEFAULT_N_MAX,
};
use perpetual_core::loss_detection::{
    enumerate_table, ErrorFlags, IncidentState, Outcome, OutcomePair,
};
use perpetual_core::montecarlo::{
    bootup_from_fraction, default_bias_grid, fit_bootup_scaling, measure_cycle_loss, run_trials,
    saturation_fraction, sweep_bias, SweepResult, DEFAULT_CADENCE,
};
use perpetual_core::network::per_cycle_loss;
use perpetual_core::{SimParams, SourcePhasing};

const SEED: u64 = 1;

struct Check {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Check {
    Check {
        pass,
        detail: detail.into(),
    }
}

#[derive(Default)]
struct Cache {
    staggered_sweep: Option<SweepResult>,
}

fn staggered_sweep(cache: &mut Cache) -> &SweepResult {
    cache.staggered_sweep.get_or_insert_with(|| {
        let base = SimParams::new(40, 32.0).unwrap().with_seed(SEED);
        sweep_bias(&base, &default_bias_grid(), 1000).unwrap()
    })
}

fn c1_oracle(_: &mut Cache) -> Check {
    let mut dp = 0.0f64;
    let mut df = 0.0f64;
    let mut df_full = 0.0f64;
    for a in [1e-4, 1e-3, 1e-2, 1e-1] {
        let full = distill(a, DEFAULT_N_MAX).unwrap();
        let (pp, pm) = distill_probability(a).unwrap();
        dp = dp
            .max((full.p_plus - pp).abs())
            .max((full.p_minus - pm).abs());
        // the projected state the closed form describes: terms up to |3>
        let low = coherent_expansion(a, 3).unwrap();
        let projected = measure_atom_pm(&dispersive_evolve(
            &AtomFieldState::prepare(&low),
            DispersivePhase::TUNED,
        ));
        let f = distill_fidelity(a).unwrap();
        df = df.max((projected.fidelity_minus.unwrap() - f).abs());
        df_full = df_full.max((full.fidelity_minus.unwrap() - f).abs());
    }
    verdict(
        dp <= 1e-12 && df <= 1e-10,
        format!(
            "max |dP| = {dp:.1e} (tol 1e-12), max |dF| = {df:.1e} (tol 1e-10); \
             full-series state differs from the closed form by up to {df_full:.1e}"
        ),
    )
}

fn c2_paper_infidelity(_: &mut Cache) -> Check {
    let a = 2e-3;
    let low = coherent_expansion(a, 3).unwrap();
    let projected = measure_atom_pm(&dispersive_evolve(
        &AtomFieldState::prepare(&low),
        DispersivePhase::TUNED,
    ));
    let eps = 1.0 - projected.fidelity_minus.unwrap();
    let eps_full = 1.0 - distill(a, DEFAULT_N_MAX).unwrap().fidelity_minus.unwrap();
    let rel = (eps - 6.7e-7).abs() / 6.7e-7;
    let rel_full = (eps_full - 6.7e-7).abs() / 6.7e-7;
    verdict(
        rel <= 0.02 && rel_full <= 0.02,
        format!(
            "1-F = {eps:.4e} ({:.2}% off 6.7e-7), full series {eps_full:.4e} ({:.2}%)",
            rel * 100.0,
            rel_full * 100.0
        ),
    )
}

/// (incident, m1 error, m2 error, loss after M1) by outcome pattern.
type Scenario = (u8, bool, bool, bool);
type Scenarios = BTreeMap<(u8, u8), BTreeSet<Scenario>>;

fn paper_table() -> Scenarios {
    // incident 0 = vac, 1 = |+>, 2 = |->
    let rows: [((u8, u8), [Scenario; 5]); 4] = [
        (
            (0, 0),
            [
                (0, false, false, false),
                (1, false, true, false),
                (2, true, false, false),
                (1, false, false, true),
                (2, true, false, true),
            ],
        ),
        (
            (0, 1),
            [
                (1, false, false, false),
                (2, true, true, false),
                (0, false, true, false),
                (1, false, true, true),
                (2, true, true, true),
            ],
        ),
        (
            (1, 0),
            [
                (2, false, false, false),
                (1, true, true, false),
                (0, true, false, false),
                (1, true, false, true),
                (2, false, false, true),
            ],
        ),
        (
            (1, 1),
            [
                (2, false, true, false),
                (1, true, false, false),
                (0, true, true, false),
                (1, true, true, true),
                (2, false, true, true),
            ],
        ),
    ];
    rows.into_iter()
        .map(|(k, v)| (k, v.into_iter().collect()))
        .collect()
}

fn c3_table(_: &mut Cache) -> Check {
    let code = |o: Outcome| (o == Outcome::Minus) as u8;
    let inc = |i: IncidentState| match i {
        IncidentState::Vacuum => 0,
        IncidentState::PlusPhoton => 1,
        IncidentState::MinusPhoton => 2,
    };
    let rows = enumerate_table();
    let mut got = Scenarios::new();
    for r in &rows {
        let f = r.flags;
        got.entry((code(r.outcomes.m1), code(r.outcomes.m2)))
            .or_default()
            .insert((inc(r.incident), f.m1_error, f.m2_error, f.loss_after_m1));
    }
    let per_group: Vec<usize> = got.values().map(BTreeSet::len).collect();
    // the zero-flag scenario leads each of the first three patterns
    let leaders_ok = OutcomePair::ALL[..3]
        .iter()
        .all(|p| rows.iter().find(|r| r.outcomes == *p).map(|r| r.flags) == Some(ErrorFlags::NONE));
    verdict(
        rows.len() == 20 && got == paper_table() && per_group == vec![5; 4] && leaders_ok,
        format!("{} rows, per pattern {per_group:?}, matches paper: {}, zero-flag leaders: {leaders_ok}", rows.len(), got == paper_table()),
    )
}

fn c4_cycle_loss(_: &mut Cache) -> Check {
    let p = SimParams::new(40, 1.0)
        .unwrap()
        .with_p_s(1.0)
        .unwrap()
        .with_p_loss(1e-3)
        .unwrap()
        .with_seed(SEED);
    let c = measure_cycle_loss(&p, 100_000).unwrap();
    let expected = per_cycle_loss(1e-3);
    let z = (c.rate() - expected) / c.std_error();
    verdict(
        c.cycles >= 100_000 && z.abs() < 3.0,
        format!(
            "{} losses in {} token-cycles: rate {:.6} vs {expected:.6} (z = {z:.2})",
            c.losses,
            c.cycles,
            c.rate()
        ),
    )
}

fn c5_saturation_bounds(_: &mut Cache) -> Check {
    let p = SimParams::new(40, 192.0).unwrap().with_seed(SEED);
    let trials = run_trials(&p, 1000, DEFAULT_CADENCE).unwrap();
    let cap = p.capacity();
    let late = p.t_max * 9 / 10;
    let over_cap = trials
        .iter()
        .any(|tr| tr.series.iter().any(|s| s.computational > cap));
    let all_reach = trials.iter().all(|tr| {
        tr.series
            .iter()
            .filter(|s| s.t >= late)
            .any(|s| s.computational == cap)
    });
    let n = trials.len() as f64;
    let mean_comp = trials
        .iter()
        .map(|tr| tr.last().computational as f64)
        .sum::<f64>()
        / n;
    let mean_total = trials.iter().map(|tr| tr.last().total as f64).sum::<f64>() / n;
    let target = 5.0 * p.n_lines as f64;
    let rel = (mean_total - target).abs() / target;
    verdict(
        !over_cap && all_reach && rel <= 0.10,
        format!(
            "every trial holds exactly {cap} computational photons in the late window: {all_reach}, \
             never above: {}; at t_max mean computational {mean_comp:.2}, mean total {mean_total:.1} \
             ({:.1}% off {target})",
            !over_cap,
            rel * 100.0
        ),
    )
}

fn c6_bias_threshold(cache: &mut Cache) -> Check {
    let sweep = staggered_sweep(cache);
    let level = 180.0;
    let b = sweep.crossing(level);
    let ci = sweep.crossing_interval(level);
    let means: Vec<String> = sweep
        .points
        .iter()
        .take(5)
        .map(|p| format!("{}:{:.1}", p.bias, p.mean))
        .collect();
    verdict(
        b.is_some_and(|b| (15.0..=45.0).contains(&b)),
        format!(
            "mean total crosses 180 at B = {b:.2?} (CI {ci:.2?}); B:mean {}",
            means.join(" ")
        ),
    )
}

fn c7_saturation_transition(_: &mut Cache) -> Check {
    let mut finals = Vec::new();
    let mut widths = Vec::new();
    for n in [8, 24, 56] {
        let p = SimParams::new(n, 32.0).unwrap().with_seed(SEED);
        let f = saturation_fraction(&p, 3000, DEFAULT_CADENCE).unwrap();
        let last = f.points.last().unwrap().mean;
        let reach = |level: f64| {
            f.points
                .iter()
                .find(|q| q.mean >= level * last)
                .map(|q| q.t)
        };
        let width = reach(0.9).zip(reach(0.1)).map(|(hi, lo)| hi - lo);
        finals.push((n, f.points[0].mean, last));
        widths.push((n, width, bootup_from_fraction(&f).ok()));
    }
    let (_, _, f8) = finals[0];
    let (_, _, f56) = finals[2];
    let starts_empty = finals.iter().all(|&(_, f0, _)| f0 == 0.0);
    let sharp = widths[2].1.zip(widths[2].2).is_some_and(|(w, tb)| w < tb);
    verdict(
        f8 < 1.0 && f56 >= 0.99 && starts_empty && sharp,
        format!(
            "final fraction N=8 {f8:.4}, N=24 {:.4}, N=56 {f56:.4}; 10-90% rise width / boot-up {:?}",
            finals[1].2,
            widths.iter().map(|(n, w, tb)| format!("N={n}: {w:?}/{tb:?}")).collect::<Vec<_>>()
        ),
    )
}

fn c8_bootup_scaling(_: &mut Cache) -> Check {
    let mut points = Vec::new();
    for n in [8, 24, 40, 56, 72, 88] {
        let p = SimParams::new(n, 32.0).unwrap().with_seed(SEED);
        let f = saturation_fraction(&p, 1000, DEFAULT_CADENCE).unwrap();
        match bootup_from_fraction(&f) {
            Ok(t) => points.push((n, t)),
            Err(e) => return verdict(false, format!("N = {n}: {e}")),
        }
    }
    let fit = fit_bootup_scaling(&points).unwrap();
    verdict(
        fit.r_squared > 0.95 && (70.0..=130.0).contains(&fit.slope),
        format!(
            "points {points:?}; slope {:.2} steps/line (target 100 +-30%), intercept {:.1}, r^2 {:.4}",
            fit.slope, fit.intercept, fit.r_squared
        ),
    )
}

fn c9_properties(_: &mut Cache) -> Check {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(SEED);
    let mut failures = Vec::new();
    for i in 0..100 {
        let n = 2 * rng.gen_range(1..=24);
        let bias = rng.gen_range(0.5..200.0);
        let p_m = if rng.gen_bool(0.5) {
            0.0
        } else {
            rng.gen_range(0.0..0.1)
        };
        let phasing = if rng.gen_bool(0.5) {
            SourcePhasing::Staggered
        } else {
            SourcePhasing::InPhase
        };
        let mut p = SimParams::new(n, bias)
            .unwrap()
            .with_p_m(p_m)
            .unwrap()
            .with_phasing(phasing)
            .with_seed(rng.gen());
        if rng.gen_bool(0.5) {
            let p_s = rng.gen_range(0.05..1.0);
            p = p
                .with_p_loss(rng.gen_range(0.0..0.02))
                .unwrap()
                .with_p_s(p_s)
                .unwrap();
        }
        if let Err(e) = common::run_checked(&p, 1000) {
            failures.push(format!("config {i}: {e}"));
        }
        if common::trace(&p, 1000) != common::trace(&p, 1000) {
            failures.push(format!("config {i}: nondeterministic"));
        }
        if let Err(e) =
            common::check_lossless_fixpoint(n, rng.gen_range(0.05..1.0), rng.gen(), phasing, 1000)
        {
            failures.push(format!("config {i} lossless: {e}"));
        }
    }
    let detail = if failures.is_empty() {
        "100 random configs x 1000 steps: exclusivity, phase, conservation, recount, ghost lifetime, fixpoint, determinism".to_string()
    } else {
        format!("{} failures, first: {}", failures.len(), failures[0])
    };
    verdict(failures.is_empty(), detail)
}

fn c10_stagger(cache: &mut Cache) -> Check {
    let level = 180.0;
    let stag = staggered_sweep(cache).clone();
    let base = SimParams::new(40, 32.0)
        .unwrap()
        .with_seed(SEED)
        .with_phasing(SourcePhasing::InPhase);
    let inphase = sweep_bias(&base, &default_bias_grid(), 1000).unwrap();
    let (Some(bs), Some(bi), Some((lo, hi))) = (
        stag.crossing(level),
        inphase.crossing(level),
        stag.crossing_interval(level),
    ) else {
        return verdict(false, "a sweep never reaches 180");
    };
    let width = hi - lo;
    verdict(
        (bs - bi).abs() < width,
        format!("threshold staggered {bs:.2}, in phase {bi:.2}: shift {:.2} vs CI width {width:.2} [{lo:.2}, {hi:.2}]", (bs - bi).abs()),
    )
}

type Criterion = (u32, &'static str, fn(&mut Cache) -> Check);

const CRITERIA: [Criterion; 10] = [
    (1, "distillation oracle equivalence", c1_oracle),
    (2, "infidelity at p_s = 2e-3", c2_paper_infidelity),
    (3, "detection outcome table", c3_table),
    (4, "per-cycle loss", c4_cycle_loss),
    (5, "saturation bounds N=40 B=192", c5_saturation_bounds),
    (6, "bias threshold N=40", c6_bias_threshold),
    (
        7,
        "saturation-fraction transition",
        c7_saturation_transition,
    ),
    (8, "boot-up scaling", c8_bootup_scaling),
    (9, "network property suite", c9_properties),
    (10, "source-stagger insensitivity", c10_stagger),
];

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        for (id, name, _) in CRITERIA {
            println!("criterion_{id} ({name}): test");
        }
        return;
    }
    let selected: BTreeSet<u32> = args.iter().filter_map(|a| a.parse().ok()).collect();
    let mut cache = Cache::default();
    let mut failed = Vec::new();
    for (id, name, check) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let out = check(&mut cache);
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] {id:>2} {name}: {} ({:.1}s)",
            out.detail,
            start.elapsed().as_secs_f64()
        );
        if !out.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
