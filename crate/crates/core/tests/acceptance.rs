//! Acceptance battery. Runs without the libtest harness so that every
//! criterion prints exactly one line; exits non-zero when any fails.

mod common;

use std::time::Instant;

use bmolab::constants::{heat_ball_constant_table, heat_ball_lower_bound, jn_constants, norm_ratio, polygamma_identity, random_jn_pairs, RayProbe};
use bmolab::domain::DomainSpec;
use bmolab::envelope::{solve_envelope, EnvelopeConfig, GridFunction};
use bmolab::interval::{ap_characteristic_interval, bmo_norm_interval, functional_average, power_weight_ap_interval, StepFunction};
use bmolab::profile::BoundaryProfile;
use bmolab::semigroup::{divergence_test, k_bmo_norm, KernelKind, ProbeSet, SpaceTimePoint, TestFunction, Transform};
use bmolab::stochastic::{verify_representation, verify_supermartingale, Candidate, Observable, SimConfig};
use bmolab::transfer::{check_transfer, random_bmo_cases, PhiFamily};
use bmolab::{BellmanPoint, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn column_max(g: &GridFunction, u: f64, samples: usize) -> f64 {
    let vmax = g.domain.v_max();
    (0..=samples).map(|k| g.eval_intrinsic(u, vmax * k as f64 / samples as f64)).fold(f64::NEG_INFINITY, f64::max)
}

fn exact_envelopes() -> Result<Outcome> {
    let d = DomainSpec::bmo(1.0)?;
    let mut worst = Vec::new();
    let mut pass = true;
    for (f, exact) in [
        (BoundaryProfile::square(), (|x: &BellmanPoint| x.x2) as fn(&BellmanPoint) -> f64),
        (BoundaryProfile::identity(), |x: &BellmanPoint| x.x1),
    ] {
        let t = Instant::now();
        let cfg = EnvelopeConfig::for_window((-1.0, 1.0), 2.0, 200, 200);
        let g = solve_envelope(&d, &f, &cfg)?.into_converged()?;
        let secs = t.elapsed().as_secs_f64();
        let mut err: f64 = 0.0;
        for i in g.columns_in(-1.0, 1.0) {
            for j in 0..g.nv {
                err = err.max((g.get(i, j) - exact(&g.point(i, j))).abs());
            }
        }
        pass &= err <= 1e-3 && secs <= 60.0;
        worst.push(format!("{}: max error {err:.2e} in {secs:.1} s", f.name()));
    }
    outcome(pass, format!("200x200, 17 directions; {}", worst.join("; ")))
}

fn exp_abs_bound() -> Result<Outcome> {
    let d = DomainSpec::bmo(0.5)?;
    let cfg = EnvelopeConfig::for_window((-0.5, 0.5), 3.0, 200, 100);
    let g = solve_envelope(&d, &BoundaryProfile::exp_abs(), &cfg)?.into_converged()?;
    let top = column_max(&g, 0.0, 400);
    let at = g.eval_intrinsic(0.0, 0.25);
    // the step function ±1/2 on the two halves of [0, 1] sits at (0, 1/4)
    let cert = functional_average(&StepFunction::halves(-0.5, 0.5), &BoundaryProfile::exp_abs())?;
    let pass = top <= 2.0 + 1e-2 && at >= 0.5f64.exp() - 1e-2 && at >= cert - 1e-2;
    outcome(pass, format!("max U(0,v) = {top:.6} (bound 2.01), U(0,1/4) = {at:.6}, certificate {cert:.6}"))
}

fn weak_type_bound() -> Result<Outcome> {
    let d = DomainSpec::bmo(1.0)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for lambda in [1.0, 2.0, 3.0] {
        let cfg = EnvelopeConfig::for_window((-1.0, 1.0), lambda + 3.0, 200, 100);
        let g = solve_envelope(&d, &BoundaryProfile::indicator(lambda)?, &cfg)?.into_converged()?;
        let top = column_max(&g, 0.0, 400);
        let bound = (1.0 - lambda).exp();
        pass &= top <= bound + 5e-3;
        parts.push(format!("λ={lambda}: {top:.5} vs {bound:.5}"));
    }
    outcome(pass, parts.join(", "))
}

fn polygamma() -> Result<Outcome> {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 1..=10 {
        let r = polygamma_identity(n)?;
        worst = worst.max((r.lhs - r.rhs).abs() / r.rhs.abs());
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(worst <= 1e-6 && secs <= 10.0, format!("n = 1..10, worst relative error {worst:.2e}, {secs:.2} s"))
}

fn heat_ball() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut inside = true;
    for n in [1, 2, 4, 8, 16] {
        for r in [0.5, 1.0, 2.0] {
            let rep = heat_ball_lower_bound(n, r)?;
            worst = worst.max((rep.lhs - rep.rhs).abs() / rep.rhs);
            inside &= rep.pass;
        }
    }
    let (rows, (argmin, min)) = heat_ball_constant_table(64);
    let pass = worst <= 1e-12 && inside && min > 0.0 && rows.iter().all(|r| r.1 >= min);
    outcome(pass, format!("worst relative mismatch {worst:.1e}; constant minimum {min:.6} at n = {argmin} over n = 1..64"))
}

fn representation() -> Result<Outcome> {
    let z0 = SpaceTimePoint::on_axis(1, 1.0)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, g, exact) in [
        (KernelKind::Heat, TestFunction::quadratic(1)?, 2.0),
        (KernelKind::Poisson, TestFunction::radial_step(1.0, 1.0, 0.0, 1)?, 0.5),
    ] {
        let r = verify_representation(&SimConfig::new(k, z0.clone(), 100_000, 0), &g)?;
        let e = r.estimate;
        let ok = r.pass && (e.mean - exact).abs() <= 3.0 * e.stderr && e.stderr <= 2e-2;
        pass &= ok;
        parts.push(format!("{k}: {:.5} ± {:.5} vs {exact}", e.mean, e.stderr));
    }
    outcome(pass, parts.join("; "))
}

fn supermartingale() -> Result<Outcome> {
    let z0 = SpaceTimePoint::on_axis(1, 1.0)?;
    let checkpoints: Vec<f64> = (0..10).map(|k| 0.2 * k as f64).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for k in KernelKind::ALL {
        let cfg = SimConfig::new(k, z0.clone(), 100_000, 0).with_checkpoints(checkpoints.clone());
        let phi = Observable::new(k, TestFunction::log_abs(1)?, 0.5)?;
        let var = Candidate::Closed(Box::new(|x: &BellmanPoint| x.x2 - x.x1 * x.x1));
        let r = verify_supermartingale(&cfg, &var, &phi)?;
        pass &= r.pass;
        let lin = Candidate::Closed(Box::new(|x: &BellmanPoint| x.x2));
        let l = verify_supermartingale(&cfg, &lin, &phi)?;
        let c0 = l.checkpoints[0];
        let drift = l
            .checkpoints
            .iter()
            .map(|c| (c.mean - c0.mean).abs() - 2.0 * (c.stderr + c0.stderr))
            .chain(std::iter::once((l.terminal.mean - c0.mean).abs() - 2.0 * (l.terminal.stderr + c0.stderr)))
            .fold(f64::NEG_INFINITY, f64::max);
        pass &= drift <= 0.0;
        parts.push(format!(
            "{k}: E U from {:.5} to {:.5}, worst excess {:.2e}, x2 drift excess {drift:.2e}",
            r.checkpoints[0].mean, r.terminal.mean, r.worst_excess
        ));
    }
    outcome(pass, parts.join("; "))
}

fn transference() -> Result<Outcome> {
    let d = DomainSpec::bmo(0.5)?;
    let profiles = [BoundaryProfile::square(), BoundaryProfile::indicator(1.0)?, BoundaryProfile::exp_abs()];
    let window = (-2.0, 2.0);
    let solve = |f: &BoundaryProfile, nu, nv| -> Result<GridFunction> {
        solve_envelope(&d, f, &EnvelopeConfig::for_window(window, 3.0, nu, nv))?.into_converged()
    };
    let fine: Vec<GridFunction> = profiles.iter().map(|f| solve(f, 201, 41)).collect::<Result<_>>()?;
    let coarse: Vec<GridFunction> = profiles.iter().map(|f| solve(f, 101, 21)).collect::<Result<_>>()?;
    let mut norms = std::collections::HashMap::new();
    for k in KernelKind::ALL {
        for n in [1, 2] {
            for fam in PhiFamily::ALL {
                norms.insert((k, n, fam), k_bmo_norm(k, &fam.build(n)?, &ProbeSet::default_for(n)?)?.value);
            }
        }
    }
    let cases = random_bmo_cases(100, 8, 0.45, 0.5, &profiles, &[1, 2], window, &|k, n, f| norms[&(k, n, f)])?;
    let mut violations = 0;
    let mut least = f64::INFINITY;
    for c in &cases {
        let r = check_transfer(&c.case, &fine[c.envelope], Some(&coarse[c.envelope]), c.base)?;
        if !r.pass {
            violations += 1;
        }
        least = least.min(r.margin);
    }
    outcome(violations == 0, format!("{} cases, {violations} violations, smallest margin {least:.3e}", cases.len()))
}

fn john_nirenberg() -> Result<Outcome> {
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for k in KernelKind::ALL {
        for n in [1, 2] {
            let probe = ProbeSet::default_for(n)?;
            for (i, fam) in PhiFamily::ALL.into_iter().enumerate() {
                let pairs = random_jn_pairs(n, 100, 6.0, 90 + 10 * n as u64 + i as u64);
                let r = jn_constants(k, &fam.build(n)?, 1.0, &pairs, &probe, std::f64::consts::E, 1.0)?;
                pass &= r.pass;
                worst = worst.max(r.worst_ratio);
                count += r.records.len();
            }
        }
    }
    outcome(pass, format!("{count} (z, λ) pairs, largest lhs/rhs {worst:.4}"))
}

fn sqrt_n_scaling() -> Result<Outcome> {
    let dims = [1, 2, 4, 8];
    let ratios = |probe: &dyn Fn() -> RayProbe| -> Result<Vec<f64>> {
        dims.iter()
            .map(|&n| Ok(norm_ratio(KernelKind::Heat, &TestFunction::log_abs(n)?, &probe())?.ratio / (n as f64).sqrt()))
            .collect()
    };
    let spread = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min);
    let centred = ratios(&RayProbe::scale_ray)?;
    let off = ratios(&RayProbe::default)?;
    let s = spread(&centred);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ");
    outcome(
        s < 2.0,
        format!(
            "ratio/√n on the scale ray [{}], spread {s:.3}; off-centre balls (info) [{}], spread {:.3}",
            fmt(&centred),
            fmt(&off),
            spread(&off)
        ),
    )
}

fn poisson_exclusion() -> Result<Outcome> {
    let w = TestFunction::power_weight(-1.8, 2)?;
    let z = SpaceTimePoint::on_axis(2, 1.0)?;
    let d = divergence_test(KernelKind::Poisson, &w, &Transform::power(-1.0), &z, 16.0, 3, 1.5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let mut finite = true;
    for k in 0..1000 {
        // half the intervals end at the singularity, the rest are arbitrary
        let (c, e) = if k % 2 == 0 {
            let e = rng.random_range(1e-6..1.0);
            if rng.random_bool(0.5) { (0.0, e) } else { (-e, 0.0) }
        } else {
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0);
            (a.min(b), a.max(b) + 1e-9)
        };
        let v = power_weight_ap_interval(0.9, 2.0, c, e);
        finite &= v.is_finite();
        worst = worst.max(v);
    }
    let ratios = d.ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", ");
    outcome(
        d.divergent && d.ratios.len() == 3 && finite,
        format!("doubling ratios [{ratios}] (threshold 1.5); max [w]_2 over 1000 intervals {worst:.4}"),
    )
}

fn interval_machinery() -> Result<Outcome> {
    let cells = 1000;
    let mut worst_b: f64 = 0.0;
    for s in common::grid_step_functions(100, cells, false, 11) {
        worst_b = worst_b.max((bmo_norm_interval(&s) - common::oracle_bmo(&s, cells)).abs());
    }
    let mut worst_a: f64 = 0.0;
    for s in common::grid_step_functions(100, cells, true, 12) {
        worst_a = worst_a.max((ap_characteristic_interval(&s, 2.0)? - common::oracle_ap(&s, 2.0, cells)).abs());
    }
    outcome(
        worst_b <= 1e-4 && worst_a <= 1e-4,
        format!("100 step functions each: BMO worst gap {worst_b:.2e}, [w]_2 worst gap {worst_a:.2e}"),
    )
}

fn main() {
    type Check = fn() -> Result<Outcome>;
    let battery: [(&str, Check); 12] = [
        ("exact envelope recovery", exact_envelopes),
        ("exponential envelope bound", exp_abs_bound),
        ("weak-type envelope bound", weak_type_bound),
        ("trigamma variance identity", polygamma),
        ("heat kernel on balls", heat_ball),
        ("exit-law representation", representation),
        ("supermartingale along paths", supermartingale),
        ("sampled transference", transference),
        ("John-Nirenberg with C = e, ε = 1", john_nirenberg),
        ("√n norm scaling", sqrt_n_scaling),
        ("Poisson excludes steep power weights", poisson_exclusion),
        ("interval class oracles", interval_machinery),
    ];
    let mut failed = 0;
    for (k, (name, run)) in battery.iter().enumerate() {
        let t = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "[{:>2}] {} {name}: {detail} ({:.1} s)",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of 12 passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
