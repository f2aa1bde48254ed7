//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed:
//! `cargo test -p tachyon-bound --test acceptance`.

mod common;

use std::f64::consts::FRAC_PI_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::oracle;
use common::rel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tachyon_bound::bound::{default_beta_grid, eval_bound, BoundInputs, PreferredFrame};
use tachyon_bound::budget::{coherence_length, combine_quadrature};
use tachyon_bound::kinematics::{
    alpha_for_fraction, inaccessible_fraction, inaccessible_fraction_mc, is_accessible, perpendicularity_windows,
    MovingFrame,
};
use tachyon_bound::scan::{figure1, preset, PresetName};
use tachyon_bound::schedule::{build_split_days, build_standard, effective_dt, validate_campaign};
use tachyon_bound::sim::{
    bound_from_simulation, critical_tolerance_cos, simulate_campaign, DropReport, ExperimentConfig, SourceModel,
    TachyonHypothesis,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cmb_frame() -> MovingFrame {
    MovingFrame::from_preferred(&PreferredFrame::cmb(), 0.0).unwrap()
}

/// 1. `curve` on the red preset at the CMB frame.
fn cmb_bound() -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = tachyon_bound::cli::run(
        ["tachyon-bound", "curve", "--presets", "ego_red", "--beta", "1.3e-3"],
        &mut out,
        &mut err,
    );
    ensure(code == 0, || format!("exit code {code}: {}", String::from_utf8_lossy(&err)))?;
    let text = String::from_utf8(out).map_err(|e| e.to_string())?;
    let value: f64 = text
        .lines()
        .nth(1)
        .and_then(|l| l.split(',').nth(1))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| format!("unparsable output: {text}"))?;
    let reference = oracle::bound("1.83e-7", "0.492", "1.3e-3", "83.6", "7.29e-5");
    ensure(rel(value, reference) < 0.01, || format!("{value} vs oracle {reference}"))?;
    ensure(rel(value, 4.85e6) < 0.01, || format!("{value} is not 4.85e6 ± 1%"))?;
    Ok(format!("beta_t_max = {value:.6e}, oracle {reference:.6e}"))
}

/// 2. At β = 0 the bound is exactly 1/ρ.
fn beta_zero_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let frame = PreferredFrame::new(0.0, FRAC_PI_2).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let rho = 10f64.powf(rng.random_range(-12.0..-0.01));
        let dt = rng.random_range(0.0..1e6);
        let v = eval_bound(&BoundInputs::new(rho, dt).unwrap(), &frame).map_err(|e| e.to_string())?;
        worst = worst.max(rel(v, 1.0 / rho));
    }
    ensure(worst < 1e-12, || format!("worst relative error {worst:e}"))?;
    Ok(format!("1000 cases, worst relative error {worst:.1e}"))
}

/// 3. Coherence length and quadrature sum.
fn coherence() -> Outcome {
    let lc = coherence_length(813e-9, 40e-9).map_err(|e| e.to_string())?;
    ensure(rel(lc, 7.3e-6) < 0.01, || format!("L_c = {lc:e} not within 1% of 7.3 um"))?;
    ensure(format!("{:.2}", lc * 1e6) == "7.29", || format!("L_c = {lc:e}"))?;
    let oracle_lc = oracle::coherence_length("813e-9", "40e-9");
    ensure(rel(lc, oracle_lc) < 1e-12, || format!("{lc:e} vs oracle {oracle_lc:e}"))?;
    let q = combine_quadrature(&[215.0, 7.3]).map_err(|e| e.to_string())?;
    ensure(format!("{q:.2}") == "215.12", || format!("quadrature {q}"))?;
    Ok(format!("L_c = {:.4} um, sqrt(215^2 + 7.3^2) = {q:.4} um", lc * 1e6))
}

/// 4. Sky coverage of a rotating baseline.
fn coverage() -> Outcome {
    let f90 = inaccessible_fraction(FRAC_PI_2).map_err(|e| e.to_string())?;
    ensure(f90 == 0.0, || format!("alpha = 90deg gives {f90}"))?;
    let alpha = alpha_for_fraction(0.05).map_err(|e| e.to_string())?.to_degrees();
    ensure((alpha - 71.81).abs() <= 0.05, || format!("alpha = {alpha} deg"))?;
    let reference = oracle::alpha_for_fraction_deg("0.05");
    ensure((alpha - reference).abs() < 1e-10, || format!("{alpha} vs oracle {reference}"))?;
    let rad = alpha.to_radians();
    let mc = inaccessible_fraction_mc(rad, 1_000_000, 4).map_err(|e| e.to_string())?;
    let closed = inaccessible_fraction(rad).map_err(|e| e.to_string())?;
    let z = (mc.fraction - closed) / mc.stderr;
    ensure(z.abs() < 3.0, || format!("MC {} vs {closed} ({z:.2} sigma)", mc.fraction))?;
    Ok(format!(
        "alpha(5%) = {alpha:.4} deg, MC {:.5} ± {:.5} vs {closed:.5} ({z:+.2} sigma)",
        mc.fraction, mc.stderr
    ))
}

/// 5. Ordering of the three preset curves.
fn curve_ordering() -> Outcome {
    let presets: Vec<_> = PresetName::NAMED.iter().map(|n| preset(n.as_str()).unwrap()).collect();
    let grid = default_beta_grid();
    ensure(grid.len() == 200, || format!("grid has {} points", grid.len()))?;
    let curves = figure1(&presets, &grid).map_err(|e| e.to_string())?;
    let value = |c: usize, i: usize| curves[c].1.values[i].ok_or_else(|| format!("missing sample {i}"));
    let mut min_gap = f64::INFINITY;
    for (i, &beta) in grid.iter().enumerate() {
        let (red, green, blue) = (value(0, i)?, value(1, i)?, value(2, i)?);
        ensure(red >= green && red >= blue, || format!("ordering broken at beta = {beta:e}"))?;
        if beta >= 1e-4 {
            let gap = (red - green) / red;
            ensure(gap > 0.10, || format!("green only {gap:.3} below red at beta = {beta:e}"))?;
            min_gap = min_gap.min(gap);
        }
    }
    Ok(format!("red >= green, blue on 200 points; green >= {:.1}% below red for beta >= 1e-4", 100.0 * min_gap))
}

/// 6. Schedule arithmetic and campaign rules.
fn schedule_rules() -> Outcome {
    let green = preset("ego_green").unwrap();
    let red = preset("ego_red").unwrap();
    ensure(effective_dt(&green.schedule) == 200.0, || "standard dt != 200 s".into())?;
    ensure(effective_dt(&red.schedule) == 0.492, || "split dt != 0.492 s".into())?;
    ensure(build_split_days(3, 0.492).is_err(), || "3-day split accepted".into())?;
    let short = build_standard(20.0, 5.0).unwrap().with_total_span(2.0 * 3600.0);
    let report = validate_campaign(&short, &red.site, &cmb_frame().direction, red.rho).map_err(|e| e.to_string())?;
    let span = report.check("span_12h").ok_or("no span check")?;
    ensure(!span.passed && !report.passed(), || "2-hour campaign passed the 12-hour rule".into())?;
    Ok("dt 200 s / 0.492 s; 3 days rejected; 2 h campaign fails span rule".into())
}

/// 7. Quantum limit and no-signaling marginals with an infinitely fast signal.
fn quantum_limit() -> Outcome {
    let red = preset("ego_red").unwrap();
    let config = ExperimentConfig {
        site: red.site,
        delta_d: red.rho * red.site.d,
        horizon: None,
    };
    // One 8-setting cycle of 1 s per setting: 10⁵ pairs per CHSH correlator.
    let schedule = build_standard(1.0, 0.0).unwrap().with_total_span(8.0);
    let source = SourceModel {
        pair_rate: 5e4,
        visibility: 0.94,
    };
    let hyp = TachyonHypothesis::new(f64::INFINITY, cmb_frame()).unwrap();
    let tally = simulate_campaign(&config, &source, &hyp, &schedule, 7).map_err(|e| e.to_string())?;
    let est = tally.aggregate_estimate().map_err(|e| e.to_string())?;
    ensure(est.events.iter().all(|&n| n > 90_000), || format!("events per correlator {:?}", est.events))?;
    let target = 2.0 * 2f64.sqrt() * 0.94;
    ensure((est.s - target).abs() < 3.0 * est.stderr, || {
        format!("S = {} ± {} vs {target}", est.s, est.stderr)
    })?;
    let mut worst_z = 0.0f64;
    for c in tally.setting_totals() {
        let sigma = (0.25 / c.total() as f64).sqrt();
        for m in [c.marginal_a(), c.marginal_b()] {
            let z = (m.ok_or("empty setting")? - 0.5) / sigma;
            worst_z = worst_z.max(z.abs());
        }
    }
    ensure(worst_z < 3.0, || format!("marginal off by {worst_z:.2} sigma"))?;
    Ok(format!(
        "S = {:.4} ± {:.4} (target {target:.4}); worst marginal {worst_z:.2} sigma",
        est.s, est.stderr
    ))
}

/// 8. A signal slower than the bound shows up as drops inside the critical windows.
fn drop_detection() -> Outcome {
    let red = preset("ego_red").unwrap();
    let config = ExperimentConfig {
        site: red.site,
        delta_d: red.rho * red.site.d,
        horizon: None,
    };
    let frame = cmb_frame();
    ensure(is_accessible(&config.site, &frame.direction), || "CMB direction inaccessible".into())?;
    let beta_t = 3e6;
    let schedule = build_split_days(4, 0.492).unwrap().with_guard_bins(25);
    let source = SourceModel {
        pair_rate: 5e3,
        visibility: 0.94,
    };
    let hyp = TachyonHypothesis::new(beta_t, frame).unwrap();
    let tally = simulate_campaign(&config, &source, &hyp, &schedule, 8).map_err(|e| e.to_string())?;
    let series = tally.estimate_series();
    let report = DropReport::from_series(&series, 2.0).map_err(|e| e.to_string())?;
    ensure(report.dropped(), || "no drop detected".into())?;

    let tol = critical_tolerance_cos(config.rho(), frame.beta, beta_t).map_err(|e| e.to_string())?;
    let (first, last) = (tally.bins[0].0, tally.bins[tally.bins.len() - 1].1);
    let windows: Vec<_> = perpendicularity_windows(&config.site, &frame.direction, tol, last + 1.0)
        .map_err(|e| e.to_string())?
        .into_iter()
        .filter(|&(s, e)| e > first && s < last)
        .collect();
    ensure(!windows.is_empty(), || "no critical window near the plan".into())?;
    let w = schedule.window_per_day.si();
    let near = |(s, e): (f64, f64), slack: f64| windows.iter().any(|&(ws, we)| s < we + slack && e > ws - slack);
    for (&bin, &bounds) in report.bins.iter().zip(&report.bin_bounds) {
        ensure(near(bounds, w), || format!("drop bin {bin} at {bounds:?} is outside {windows:?}"))?;
    }
    // Where |b·û| < (reach − ρ)/β no jitter draw can outrun the signal, so
    // every pair is unlinked and those bins must drop.
    let reach = (1.0 - frame.beta * frame.beta).sqrt() / beta_t;
    let full = (reach - config.rho()) / frame.beta;
    ensure(full > 0.0, || "beta_t too fast for a fully unlinked core".into())?;
    let core = perpendicularity_windows(&config.site, &frame.direction, full, last + 1.0).map_err(|e| e.to_string())?;
    let mut core_bins = 0;
    for (bin, &(s, e)) in tally.bins.iter().enumerate() {
        if core.iter().any(|&(cs, ce)| s >= cs && e <= ce) {
            core_bins += 1;
            ensure(report.bins.contains(&bin), || format!("bin {bin} in the fully unlinked core did not drop"))?;
        }
    }
    ensure(core_bins > 0, || "no bin inside the fully unlinked core".into())?;
    let (ws, we) = windows[0];
    Ok(format!(
        "beta_t = {beta_t:e}: {} of {} bins dropped, all within the {:.2} s critical window; {core_bins} core bins all dropped",
        report.bins.len(),
        series.len(),
        we - ws
    ))
}

/// 9. Simulated campaign bound versus the closed form.
fn cross_validation() -> Outcome {
    let red = preset("ego_red").unwrap();
    let config = ExperimentConfig {
        site: red.site,
        delta_d: red.rho * red.site.d,
        horizon: None,
    };
    let frame = cmb_frame();
    let hyp = TachyonHypothesis::new(f64::INFINITY, frame).unwrap();
    let schedule = red.schedule.clone().with_guard_bins(2);
    let tally = simulate_campaign(&config, &SourceModel::default(), &hyp, &schedule, 9).map_err(|e| e.to_string())?;
    let report = DropReport::from_series(&tally.estimate_series(), 2.0).map_err(|e| e.to_string())?;
    ensure(!report.dropped(), || format!("unexpected drops {:?}", report.bins))?;
    let sim = bound_from_simulation(&config, &schedule, &frame, &report).map_err(|e| e.to_string())?;
    let closed = eval_bound(&red.inputs().unwrap(), &PreferredFrame::cmb()).map_err(|e| e.to_string())?;
    let gap = rel(sim.bound, closed);
    ensure(gap < 0.10, || format!("{} vs {closed} ({gap:.3})", sim.bound))?;
    Ok(format!("simulated {:.6e} vs closed form {closed:.6e} ({:.2e} relative)", sim.bound, gap))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("CMB bound reproduction", cmb_bound, Duration::from_secs(1)),
        ("beta = 0 identity", beta_zero_identity, Duration::from_secs(1)),
        ("coherence length and quadrature", coherence, Duration::from_secs(1)),
        ("coverage geometry", coverage, Duration::from_secs(5)),
        ("curve ordering", curve_ordering, Duration::from_secs(1)),
        ("schedule arithmetic", schedule_rules, Duration::from_secs(1)),
        ("simulator quantum limit", quantum_limit, Duration::from_secs(60)),
        ("simulator drop detection", drop_detection, Duration::from_secs(60)),
        ("simulation cross-validation", cross_validation, Duration::from_secs(120)),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= *budget {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}"))
            }
        });
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail} ({elapsed:.2?})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why} ({elapsed:.2?})", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
