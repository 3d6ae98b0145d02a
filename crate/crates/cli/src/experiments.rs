//! One runner per experiment kind.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use bmolab::constants::{
    heat_ball_constant_table, heat_ball_lower_bound, jn_constants, norm_ratio, polygamma_identity, random_jn_pairs,
    RayProbe,
};
use bmolab::domain::{BellmanPoint, DomainSpec};
use bmolab::envelope::{solve_envelope, ChordSet, EnvelopeConfig, GridFunction};
use bmolab::profile::ProfileKind;
use bmolab::semigroup::{
    ap_characteristic_k, extend, k_bmo_norm, KernelKind, ProbeSet, TestFunction, Transform,
};
use bmolab::stochastic::{verify_representation, verify_supermartingale, Candidate, Observable, SimConfig};
use bmolab::transfer::{ball_estimate_check, check_transfer, random_bmo_cases, PhiFamily, GRID_ALLOWANCE, SAFETY};
use serde_json::{json, Value};

use crate::config::*;
use crate::report::Record;

const QUADRATURE: &str = "adaptive Gauss-Kronrod 7/15, abs 1e-13, rel 1e-10";

pub struct Output {
    pub records: Vec<Record>,
    pub artifacts: Vec<String>,
}

pub struct Context<'a> {
    pub seed: u64,
    pub out_dir: &'a Path,
    pub output: &'a OutputPaths,
}

pub fn run(params: &Params, ctx: &Context) -> Output {
    let mut artifacts = Vec::new();
    let records = match params {
        Params::Envelope(p) => envelope(p, ctx, &mut artifacts),
        Params::Extend(p) => extension(p),
        Params::Norm(p) => norm(p),
        Params::Simulate(p) => simulate(p, ctx.seed),
        Params::Constants(p) => constants(p),
        Params::Jn(p) => jn(p, ctx.seed),
        Params::Transfer(p) => transfer(p, ctx.seed),
        Params::Ball(p) => ball(p),
    };
    Output { records, artifacts }
}

fn probe_set(p: &ProbeSpec, n: usize) -> bmolab::Result<ProbeSet> {
    match p {
        ProbeSpec::Default => ProbeSet::default_for(n),
        ProbeSpec::Ray { from, to } => Ok(ProbeSet::ray(n, *from..=*to)),
        ProbeSpec::Halton { count, half_width, t_range } => ProbeSet::halton(n, *count, *half_width, (t_range[0], t_range[1])),
    }
}

fn transform(t: &TransformSpec) -> Transform {
    match t {
        TransformSpec::Identity => Transform::identity(),
        TransformSpec::Square => Transform::square(),
        TransformSpec::Log => Transform::log(),
        TransformSpec::Power(q) => Transform::power(*q),
    }
}

const ENVELOPE: &str = "minimal locally concave function on the Bellman domain with the given boundary values";

fn solve(
    d: &DomainSpec,
    f: &bmolab::profile::BoundaryProfile,
    window: (f64, f64),
    margin: f64,
    grid: [usize; 2],
    tol: f64,
    directions: usize,
) -> bmolab::Result<(bmolab::envelope::EnvelopeSolution, BTreeMap<String, Value>)> {
    let mut cfg = EnvelopeConfig::for_window(window, margin, grid[0], grid[1]);
    cfg.tol = tol;
    cfg.chords = ChordSet::fan(directions);
    let sol = solve_envelope(d, f, &cfg)?;
    let mut prov = BTreeMap::new();
    prov.insert("grid".into(), json!(grid));
    prov.insert("u_range".into(), json!([cfg.u_range.0, cfg.u_range.1]));
    prov.insert("chord_directions".into(), json!(directions));
    prov.insert("samples_per_chord".into(), json!(cfg.chords.samples_per_chord));
    prov.insert("tol".into(), json!(tol));
    prov.insert("sweeps".into(), json!(sol.sweeps));
    Ok((sol, prov))
}

fn column_max(g: &GridFunction, u: f64) -> f64 {
    let vmax = g.v_max();
    (0..=400).map(|k| g.eval_intrinsic(u, vmax * k as f64 / 400.0)).fold(f64::NEG_INFINITY, f64::max)
}

fn envelope(p: &EnvelopeParams, ctx: &Context, artifacts: &mut Vec<String>) -> Vec<Record> {
    let mut run = || -> bmolab::Result<Vec<Record>> {
        let d = p.domain.validated()?;
        let f = p.f.build()?;
        let margin = p.margin.unwrap_or_else(|| EnvelopeConfig::default_margin(&d));
        let window = (p.window[0], p.window[1]);
        let (sol, prov) = solve(&d, &f, window, margin, p.grid, p.tol, p.directions)?;
        let mut out = vec![Record::new("solve", ENVELOPE)
            .value("converged", sol.converged)
            .value("max_delta", sol.max_delta)
            .value("clamped_endpoints", sol.clamped_endpoints)
            .with_provenance(&prov)
            .pass(sol.converged)];
        let g = &sol.grid;
        let mut checks = p.checks.clone();
        if checks.is_empty() {
            match f.kind() {
                ProfileKind::Identity => checks.push(EnvelopeCheck::Exact { expr: "x1".into(), tolerance: 1e-3 }),
                ProfileKind::Power { q } if q == 2.0 && matches!(d, DomainSpec::Bmo { .. }) => {
                    checks.push(EnvelopeCheck::Exact { expr: "x2".into(), tolerance: 1e-3 })
                }
                _ => {}
            }
        }
        for c in &checks {
            let r = match c {
                EnvelopeCheck::Exact { expr, tolerance } => {
                    let exact = |x: &BellmanPoint| if expr == "x1" { x.x1 } else { x.x2 };
                    let mut err: f64 = 0.0;
                    for i in g.columns_in(window.0, window.1) {
                        for j in 0..g.nv {
                            err = err.max((g.get(i, j) - exact(&g.point(i, j))).abs());
                        }
                    }
                    Record::new(format!("exact {expr}"), "the envelope of affine data in (x1, x2) is the data itself")
                        .value("max_error", err)
                        .value("tolerance", tolerance)
                        .pass(err <= *tolerance)
                }
                EnvelopeCheck::UpperBound { u, bound, tolerance } => {
                    let top = column_max(g, *u);
                    Record::new(format!("upper bound at u = {u}"), "upper bound for the envelope along a vertical line")
                        .value("max", top)
                        .value("bound", bound)
                        .value("tolerance", tolerance)
                        .pass(top <= bound + tolerance)
                }
                EnvelopeCheck::LowerBound { u, v, bound, tolerance } => {
                    let at = g.eval_intrinsic(*u, *v);
                    Record::new(format!("lower bound at ({u}, {v})"), "envelope dominates every attained average")
                        .value("value", at)
                        .value("bound", bound)
                        .value("tolerance", tolerance)
                        .pass(at >= bound - tolerance)
                }
            };
            out.push(r.with_provenance(&prov));
        }
        if let Some(name) = &ctx.output.grid_csv {
            let path = ctx.out_dir.join(name);
            std::fs::write(&path, g.to_csv()).map_err(|e| bmolab::Error::Parse(format!("{}: {e}", path.display())))?;
            artifacts.push(name.clone());
        }
        Ok(out)
    };
    run().unwrap_or_else(|e| vec![Record::failed("solve", ENVELOPE, e)])
}

const EXTEND: &str = "semigroup extension of boundary data by the heat or Poisson kernel";

fn extension(p: &ExtendParams) -> Vec<Record> {
    let tr = transform(&p.transform);
    p.points
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let item = format!("point {k}: y = {:?}, t = {}", z.y, z.t);
            match extend(p.kernel, &p.phi, &tr, z) {
                Err(e) => Record::failed(item, EXTEND, e),
                Ok(e) => {
                    let expected = p.expect.get(k).copied().flatten();
                    let pass = if p.divergent {
                        e.divergent
                    } else {
                        !e.divergent && expected.is_none_or(|x| (e.value - x).abs() <= p.tolerance + e.abs_err)
                    };
                    Record::new(item, EXTEND)
                        .value("value", e.value)
                        .value("abs_err", e.abs_err)
                        .value("divergent", e.divergent)
                        .value("expected", expected)
                        .value("diagnostic", e.diagnostic)
                        .prov("kernel", p.kernel)
                        .prov("quadrature", QUADRATURE)
                        .pass(pass)
                }
            }
        })
        .collect()
}

fn norm(p: &NormParams) -> Vec<Record> {
    let (anchor, item) = match p.measure {
        Measure::Bmo => ("semigroup BMO norm: supremum of the kernel variance", "bmo norm".to_string()),
        Measure::Ap(q) => ("semigroup Muckenhoupt characteristic", format!("A_p characteristic, p = {}", q.unwrap_or(f64::INFINITY))),
    };
    let run = || -> bmolab::Result<Record> {
        let probe = probe_set(&p.probe, p.phi.n)?;
        let s = match p.measure {
            Measure::Bmo => k_bmo_norm(p.kernel, &p.phi, &probe)?,
            Measure::Ap(q) => ap_characteristic_k(p.kernel, &p.phi, q.unwrap_or(f64::INFINITY), &probe)?,
        };
        let pass = if p.expect_unbounded {
            s.value.is_infinite()
        } else {
            s.value.is_finite() && p.max.is_none_or(|m| s.value <= m)
        };
        Ok(Record::new(item.clone(), anchor)
            .value("value", s.value)
            .value("finite", s.value.is_finite())
            .value("argmax", &s.argmax)
            .value("unbounded_ray", s.unbounded_ray)
            .value("diagnostic", &s.diagnostic)
            .prov("probe", &s.strategy)
            .prov("evaluated", s.evaluated)
            .prov("kernel", p.kernel)
            .prov("quadrature", QUADRATURE)
            .pass(pass))
    };
    vec![run().unwrap_or_else(|e| Record::failed(item.clone(), anchor, e))]
}

fn simulate(p: &SimulateParams, seed: u64) -> Vec<Record> {
    let mut cfg = SimConfig::new(p.kernel, p.z0.clone(), p.paths, seed);
    cfg.dt = p.dt;
    let prov = |r: Record, cfg: &SimConfig| {
        r.prov("paths", cfg.paths).prov("seed", cfg.seed).prov("dt", cfg.dt).prov("max_steps", cfg.max_steps).prov("stderr_cap", cfg.stderr_cap).prov("kernel", cfg.kernel)
    };
    match &p.check {
        SimCheck::Representation => {
            let anchor = "exit-law representation: the extension at z0 is the mean of g at the exit point";
            match verify_representation(&cfg, &p.g) {
                Err(e) => vec![Record::failed("representation", anchor, e)],
                Ok(r) => {
                    let e = r.estimate;
                    let ok_ref = p.reference.is_none_or(|x| (e.mean - x).abs() <= 3.0 * e.stderr);
                    vec![prov(
                        Record::new("representation", anchor)
                            .value("mean", e.mean)
                            .value("stderr", e.stderr)
                            .value("quadrature", r.reference)
                            .value("quadrature_err", r.reference_err)
                            .value("reference", p.reference)
                            .pass(r.pass && ok_ref),
                        &cfg,
                    )]
                }
            }
        }
        SimCheck::Supermartingale { u, scale, checkpoints } => {
            let anchor = "U of the space-time process is non-increasing in expectation";
            let cfg = cfg.with_checkpoints(checkpoints.clone());
            let run = || -> bmolab::Result<Record> {
                let phi = Observable::new(p.kernel, p.g.clone(), *scale)?;
                let cand = if u == "x2" {
                    Candidate::Closed(Box::new(|x: &BellmanPoint| x.x2))
                } else {
                    Candidate::Closed(Box::new(|x: &BellmanPoint| x.x2 - x.x1 * x.x1))
                };
                let r = verify_supermartingale(&cfg, &cand, &phi)?;
                let c0 = r.checkpoints[0];
                let drift = r
                    .checkpoints
                    .iter()
                    .map(|c| (c.mean - c0.mean).abs() - 2.0 * (c.stderr + c0.stderr))
                    .chain(std::iter::once((r.terminal.mean - c0.mean).abs() - 2.0 * (r.terminal.stderr + c0.stderr)))
                    .fold(f64::NEG_INFINITY, f64::max);
                let pass = r.pass && (u != "x2" || drift <= 0.0);
                Ok(prov(
                    Record::new(format!("supermartingale, U = {u}"), anchor)
                        .value("checkpoints", &r.checkpoints)
                        .value("terminal", r.terminal)
                        .value("worst_excess", r.worst_excess)
                        .value("drift_excess", drift)
                        .pass(pass),
                    &cfg,
                ))
            };
            vec![run().unwrap_or_else(|e| Record::failed(format!("supermartingale, U = {u}"), anchor, e))]
        }
    }
}

fn constants(p: &ConstantsParams) -> Vec<Record> {
    let dims = p.n.expand().unwrap_or_default();
    match p.check {
        ConstantsCheck::Polygamma => {
            let anchor = "polygamma identity: the heat variance of log|x| in closed form through the trigamma function";
            dims.iter()
                .map(|&n| match polygamma_identity(n) {
                    Err(e) => Record::failed(format!("n = {n}"), anchor, e),
                    Ok(r) => Record::new(format!("n = {n}"), anchor)
                        .value("quadrature", r.lhs)
                        .value("closed_form", r.rhs)
                        .value("relative_error", (r.lhs - r.rhs).abs() / r.rhs.abs())
                        .value("notes", r.notes)
                        .prov("quadrature", "nested adaptive Gauss-Kronrod 7/15, abs 1e-15, rel 1e-11")
                        .prov("tolerance", "relative 1e-6")
                        .pass(r.pass),
                })
                .collect()
        }
        ConstantsCheck::HeatBall => {
            let anchor = "heat kernel at t = r^2/(2n) bounded below on the ball of radius r";
            dims.iter()
                .flat_map(|&n| p.radii.iter().map(move |&r| (n, r)))
                .map(|(n, r)| match heat_ball_lower_bound(n, r) {
                    Err(e) => Record::failed(format!("n = {n}, r = {r}"), anchor, e),
                    Ok(d) => Record::new(format!("n = {n}, r = {r}"), anchor)
                        .value("kernel_at_r", d.lhs)
                        .value("closed_form", d.rhs)
                        .value("notes", d.notes)
                        .prov("tolerance", "relative 1e-12")
                        .pass(d.pass),
                })
                .collect()
        }
        ConstantsCheck::HeatBallConstant => {
            let anchor = "sqrt(n) (n/(2e))^(n/2) / Gamma(n/2+1) is bounded below uniformly in n";
            let n_max = dims.iter().copied().max().unwrap_or(1);
            let (rows, (argmin, min)) = heat_ball_constant_table(n_max);
            vec![Record::new(format!("n = 1..{n_max}"), anchor)
                .value("minimum", min)
                .value("argmin", argmin)
                .value("table", rows)
                .pass(min > 0.0)]
        }
        ConstantsCheck::NormRatio => {
            let anchor = "semigroup and ball BMO norms of log|x| compare like sqrt(n)";
            let k = p.kernel.unwrap_or(KernelKind::Heat);
            let mut scaled = Vec::new();
            let mut out: Vec<Record> = dims
                .iter()
                .map(|&n| {
                    let r = TestFunction::log_abs(n).and_then(|g| norm_ratio(k, &g, &RayProbe::scale_ray()));
                    match r {
                        Err(e) => Record::failed(format!("n = {n}"), anchor, e),
                        Ok(d) => {
                            let s = d.ratio / (n as f64).sqrt();
                            scaled.push(s);
                            Record::new(format!("n = {n}"), anchor)
                                .value("kernel_norm", d.lhs)
                                .value("ball_norm", d.rhs)
                                .value("ratio", d.ratio)
                                .value("ratio_over_sqrt_n", s)
                                .prov("probe", "centred balls B(0, 2^j) and kernel points (0, 2^j), j = -10..10")
                                .prov("kernel", k)
                                .pass(d.pass)
                        }
                    }
                })
                .collect();
            let spread = scaled.iter().cloned().fold(0.0, f64::max) / scaled.iter().cloned().fold(f64::INFINITY, f64::min);
            let limit = p.max_spread.unwrap_or(2.0);
            out.push(
                Record::new("spread of ratio/sqrt(n)", anchor)
                    .value("spread", spread)
                    .value("limit", limit)
                    .pass(scaled.len() == dims.len() && spread < limit),
            );
            out
        }
    }
}

fn jn(p: &JnParams, seed: u64) -> Vec<Record> {
    let anchor = "John-Nirenberg inequality for the semigroup BMO norm with explicit constants";
    let run = || -> bmolab::Result<Vec<Record>> {
        let phi = TestFunction::new(p.phi.clone(), p.n)?;
        let probe = probe_set(&p.probe, p.n)?;
        let pairs = random_jn_pairs(p.n, p.lambdas, p.lambda_max, seed);
        let r = jn_constants(p.kernel, &phi, p.scale, &pairs, &probe, p.c, p.eps)?;
        let mut out = vec![Record::new("semigroup norm", anchor)
            .value("norm", r.norm)
            .value("worst_ratio", r.worst_ratio)
            .prov("probe", &probe.strategy)
            .pass(r.norm.is_finite())];
        out.extend(r.records.iter().enumerate().map(|(k, x)| {
            Record::new(format!("pair {k}"), anchor)
                .value("y", &x.z.y)
                .value("t", x.z.t)
                .value("lambda", x.lambda)
                .value("lhs", x.lhs)
                .value("rhs", x.rhs)
                .prov("C", p.c)
                .prov("eps", p.eps)
                .prov("quadrature", QUADRATURE)
                .pass(x.pass)
        }));
        Ok(out)
    };
    run().unwrap_or_else(|e| vec![Record::failed("semigroup norm", anchor, e)])
}

fn transfer(p: &TransferParams, seed: u64) -> Vec<Record> {
    let anchor = "transference: f of the data extended to z is at most the Bellman envelope at the semigroup point";
    let run = || -> bmolab::Result<Vec<Record>> {
        let d = DomainSpec::bmo(p.mu)?;
        let profiles: Vec<_> = p.profiles.iter().map(|f| f.build()).collect::<bmolab::Result<_>>()?;
        let margin = p.margin.unwrap_or_else(|| EnvelopeConfig::default_margin(&d));
        let window = (p.window[0], p.window[1]);
        let coarse_grid = [p.grid[0].div_ceil(2), p.grid[1].div_ceil(2)];
        let mut fine = Vec::new();
        let mut coarse = Vec::new();
        for f in &profiles {
            fine.push(solve(&d, f, window, margin, p.grid, 1e-6, 17)?.0.into_converged()?);
            coarse.push(solve(&d, f, window, margin, coarse_grid, 1e-6, 17)?.0.into_converged()?);
        }
        let mut norms = HashMap::new();
        for k in KernelKind::ALL {
            for &n in &p.dims {
                let probe = ProbeSet::default_for(n)?;
                for fam in PhiFamily::ALL {
                    norms.insert((k, n, fam), k_bmo_norm(k, &fam.build(n)?, &probe)?.value);
                }
            }
        }
        let cases = random_bmo_cases(p.count, seed, p.mu_tilde, p.mu, &profiles, &p.dims, window, &|k, n, f| norms[&(k, n, f)])?;
        Ok(cases
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let item = format!("case {i}");
                match check_transfer(&c.case, &fine[c.envelope], Some(&coarse[c.envelope]), c.base) {
                    Err(e) => Record::failed(item, anchor, e),
                    Ok(r) => Record::new(item, anchor)
                        .value("case", &r.case)
                        .value("point", [r.point.x1, r.point.x2])
                        .value("lhs", r.lhs)
                        .value("envelope", r.rhs)
                        .value("allowance", r.allowance)
                        .value("margin", r.margin)
                        .value("norm", r.norm)
                        .value("in_slack_domain", r.in_slack_domain)
                        .prov("fine_grid", p.grid)
                        .prov("coarse_grid", coarse_grid)
                        .prov("grid_allowance", format!("{GRID_ALLOWANCE} + 2|U_N - U_N/2|"))
                        .prov("safety", SAFETY)
                        .prov("probe", "scale ray j = -10..10 plus 1000 Halton points")
                        .pass(r.pass),
                }
            })
            .collect())
    };
    run().unwrap_or_else(|e| vec![Record::failed("setup", anchor, e)])
}

fn ball(p: &BallParams) -> Vec<Record> {
    let anchor = "ball averages bounded through the semigroup Bellman bound with the sqrt(n)/kappa loss";
    let run = || -> bmolab::Result<Vec<Record>> {
        let phi = TestFunction::new(p.phi.clone(), p.n)?;
        let f = p.f.build()?;
        let balls: Vec<(f64, f64)> = p.balls.iter().map(|b| (b[0], b[1])).collect();
        let r = ball_estimate_check(&phi, &f, p.c_f, p.mu, p.c_star, &balls)?;
        Ok(r.rows
            .iter()
            .map(|b| {
                Record::new(format!("ball offset {}, radius {}", b.offset, b.radius), anchor)
                    .value("lhs", b.lhs)
                    .value("rhs", b.rhs)
                    .value("scale", r.scale)
                    .value("star_norm", r.star_norm)
                    .value("heat_norm", r.heat_norm)
                    .value("kappa", r.kappa)
                    .prov("quadrature", "adaptive Gauss-Kronrod 7/15 over radial shells")
                    .pass(b.pass)
            })
            .collect())
    };
    run().unwrap_or_else(|e| vec![Record::failed("setup", anchor, e)])
}
