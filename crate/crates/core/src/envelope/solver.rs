use rayon::prelude::*;

use super::chords::{ChordGeometry, ChordSet};
use super::grid::GridFunction;
use super::interp::{eval, Loc, Locator, TopPoint};
use crate::domain::{BellmanPoint, Boundary, DomainSpec};
use crate::error::{Error, Result};
use crate::profile::BoundaryProfile;

/// Interior starting values for the induction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Seed {
    /// Every interior node of column `i` gets `f(x1(u_i))`.
    ColumnValue,
    /// The convex minorant of `f` at `x1(u_i)`; never above the envelope.
    #[default]
    ConvexMinorant,
}

#[derive(Debug, Clone)]
pub struct EnvelopeConfig {
    pub nu: usize,
    pub nv: usize,
    pub u_range: (f64, f64),
    pub chords: ChordSet,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: Seed,
}

impl EnvelopeConfig {
    pub fn new(nu: usize, nv: usize, u_range: (f64, f64)) -> Self {
        EnvelopeConfig {
            nu,
            nv,
            u_range,
            chords: ChordSet::default(),
            tol: 1e-6,
            max_iter: 100_000,
            seed: Seed::default(),
        }
    }

    /// Grid covering `window` plus `margin` on both sides.
    pub fn for_window(window: (f64, f64), margin: f64, nu: usize, nv: usize) -> Self {
        Self::new(nu, nv, (window.0 - margin, window.1 + margin))
    }

    /// Default truncation margin: six strip widths.
    pub fn default_margin(domain: &DomainSpec) -> f64 {
        6.0 * domain.v_max().sqrt()
    }
}

/// Outcome of [`solve_envelope`].
#[derive(Debug, Clone)]
pub struct EnvelopeSolution {
    pub grid: GridFunction,
    pub sweeps: usize,
    pub max_delta: f64,
    pub converged: bool,
    /// Chord endpoints that fell outside the grid and were clamped.
    pub clamped_endpoints: usize,
}

impl EnvelopeSolution {
    pub fn into_converged(self) -> Result<GridFunction> {
        if self.converged {
            Ok(self.grid)
        } else {
            Err(Error::NonConvergence { iterations: self.sweeps, max_delta: self.max_delta })
        }
    }
}

pub fn boundary_init(
    domain: &DomainSpec,
    f: &BoundaryProfile,
    u_range: (f64, f64),
    nu: usize,
    nv: usize,
    seed: Seed,
) -> Result<GridFunction> {
    let mut g = GridFunction::new(*domain, u_range, nu, nv, vec![0.0; nu * nv])?;
    for i in 0..nu {
        let x1 = domain.u_to_x1(g.u(i));
        let b = f.eval(x1)?;
        let interior = match seed {
            Seed::ColumnValue => b,
            Seed::ConvexMinorant => f.convex_minorant(x1).min(b),
        };
        g.values[i] = b;
        for j in 1..nv {
            g.values[j * nu + i] = interior;
        }
    }
    g.profile = Some(f.clone());
    Ok(g)
}

/// Chord endpoints resolved to interpolation weights, reusable across sweeps.
#[derive(Debug, Clone)]
pub struct Sweeper {
    nu: usize,
    m: usize,
    offsets: Vec<usize>,
    /// Per chord `(s_minus, s_plus)`; sample `q` sits at fraction `q/m`.
    spans: Vec<(f64, f64)>,
    /// Per chord: `m` minus-side endpoints then `m` plus-side endpoints.
    endpoints: Vec<Loc>,
    tops: Vec<TopPoint>,
    pub clamped: usize,
}

impl Sweeper {
    pub fn new(g: &GridFunction, set: &ChordSet) -> Result<Self> {
        set.validate()?;
        let locator = Locator::new(g.domain, (g.u_min, g.u_max), g.nu, g.nv, g.profile.as_ref())?;
        let geo = ChordGeometry::build(&g.domain, (g.u_min, g.u_max), g.nu, g.nv, set);
        let m = set.samples_per_chord;
        let (nu, nv) = (g.nu, g.nv);
        struct Node {
            spans: Vec<(f64, f64)>,
            locs: Vec<Loc>,
            tops: Vec<TopPoint>,
            clamped: usize,
        }
        let per_node: Vec<Node> = (0..nu * nv)
            .into_par_iter()
            .map(|k| {
                let x = g.point(k % nu, k / nu);
                let chords = geo.node(k);
                let mut node = Node {
                    spans: Vec::with_capacity(chords.len()),
                    locs: Vec::with_capacity(chords.len() * 2 * m),
                    tops: Vec::new(),
                    clamped: 0,
                };
                for c in chords {
                    node.spans.push((c.s_minus, c.s_plus));
                    for (s_end, kind) in [(c.s_minus, c.minus_end), (c.s_plus, c.plus_end)] {
                        for q in 1..=m {
                            let s = s_end * (q as f64 / m as f64);
                            let y = BellmanPoint { x1: x.x1 + s * c.d[0], x2: x.x2 + s * c.d[1] };
                            if q == m && kind == Boundary::Lower {
                                if let Some(p) = &g.profile {
                                    node.locs.push(Loc::Exact(p.value(y.x1)));
                                    continue;
                                }
                            }
                            let (loc, cl) = locator.locate(&y, &mut node.tops);
                            node.clamped += cl as usize;
                            node.locs.push(loc);
                        }
                    }
                }
                node
            })
            .collect();
        let mut offsets = vec![0];
        let mut spans = Vec::new();
        let mut endpoints = Vec::new();
        let mut tops = Vec::new();
        let mut clamped = 0;
        for mut n in per_node {
            let base = tops.len() as u32;
            for l in &mut n.locs {
                if let Loc::Top { t, .. } = l {
                    *t += base;
                }
            }
            spans.extend(n.spans);
            endpoints.extend(n.locs);
            tops.extend(n.tops);
            offsets.push(spans.len());
            clamped += n.clamped;
        }
        Ok(Sweeper { nu, m, offsets, spans, endpoints, tops, clamped })
    }

    /// Largest chord interpolant through node `k`.
    #[inline]
    fn best(&self, values: &[f64], k: usize) -> f64 {
        let m = self.m;
        let (c0, c1) = (self.offsets[k], self.offsets[k + 1]);
        let mut best = f64::NEG_INFINITY;
        let mut ua = [0.0; 16];
        let mut ub = [0.0; 16];
        let frac = |q: usize| (q + 1) as f64 / m as f64;
        for c in c0..c1 {
            let (s_minus, s_plus) = self.spans[c];
            let eps = &self.endpoints[c * 2 * m..(c + 1) * 2 * m];
            for q in 0..m {
                ua[q] = eval(&eps[q], values, self.nu, &self.tops);
                ub[q] = eval(&eps[m + q], values, self.nu, &self.tops);
            }
            for (qa, &a) in ua[..m].iter().enumerate() {
                let sa = s_minus * frac(qa);
                for (qb, &b) in ub[..m].iter().enumerate() {
                    let sb = s_plus * frac(qb);
                    // x = (s_b·a − s_a·b)/(s_b − s_a)
                    let val = (sb * a - sa * b) / (sb - sa);
                    if val > best {
                        best = val;
                    }
                }
            }
        }
        best
    }
    /// One Jacobi sweep from `old` into `new`; returns the largest increase.
    pub fn sweep(&self, old: &[f64], new: &mut [f64]) -> f64 {
        let nu = self.nu;
        new.par_chunks_mut(nu)
            .enumerate()
            .map(|(j, row)| {
                let mut delta: f64 = 0.0;
                for (i, out) in row.iter_mut().enumerate() {
                    let k = j * nu + i;
                    let cur = old[k];
                    if j == 0 {
                        *out = cur;
                        continue;
                    }
                    let cand = self.best(old, k);
                    if cand > cur {
                        *out = cand;
                        delta = delta.max(cand - cur);
                    } else {
                        *out = cur;
                    }
                }
                delta
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Largest violation of the chord inequalities by `values`.
    pub fn deficiency(&self, values: &[f64]) -> f64 {
        let nu = self.nu;
        (nu..values.len())
            .into_par_iter()
            .map(|k| (self.best(values, k) - values[k]).max(0.0))
            .reduce(|| 0.0, f64::max)
    }
}

/// One chord-sup pass over `g`.
pub fn chord_sweep(g: &GridFunction, set: &ChordSet) -> Result<(GridFunction, f64)> {
    let sweeper = Sweeper::new(g, set)?;
    let mut out = g.clone();
    let delta = sweeper.sweep(&g.values, &mut out.values);
    Ok((out, delta))
}

/// Largest amount by which a chord interpolant exceeds the node value.
pub fn concavity_deficiency(g: &GridFunction, set: &ChordSet) -> Result<f64> {
    Ok(Sweeper::new(g, set)?.deficiency(&g.values))
}

/// Minimal locally concave majorant of the boundary data, by Bellman induction from below.
pub fn solve_envelope(domain: &DomainSpec, f: &BoundaryProfile, cfg: &EnvelopeConfig) -> Result<EnvelopeSolution> {
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {} must be positive", cfg.tol)));
    }
    let mut grid = boundary_init(domain, f, cfg.u_range, cfg.nu, cfg.nv, cfg.seed)?;
    let sweeper = Sweeper::new(&grid, &cfg.chords)?;
    let mut scratch = grid.values.clone();
    let mut sweeps = 0;
    let mut max_delta = f64::INFINITY;
    while sweeps < cfg.max_iter {
        max_delta = sweeper.sweep(&grid.values, &mut scratch);
        std::mem::swap(&mut grid.values, &mut scratch);
        sweeps += 1;
        if max_delta < cfg.tol {
            break;
        }
    }
    Ok(EnvelopeSolution {
        grid,
        sweeps,
        max_delta,
        converged: max_delta < cfg.tol,
        clamped_endpoints: sweeper.clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_init_examples() {
        let d = DomainSpec::bmo(1.0).unwrap();
        let g = boundary_init(&d, &BoundaryProfile::square(), (0.0, 2.0), 3, 3, Seed::ColumnValue).unwrap();
        assert_eq!(g.get(2, 0), 4.0);
        let ap = DomainSpec::ap(2.0, 2.0).unwrap();
        let u3 = 3f64.ln();
        let g = boundary_init(&ap, &BoundaryProfile::identity(), (0.0, u3), 2, 2, Seed::ColumnValue).unwrap();
        assert!((g.get(1, 0) - 3.0).abs() < 1e-14);
        let ind = BoundaryProfile::indicator(1.0).unwrap();
        let g = boundary_init(&d, &ind, (0.5, 1.5), 2, 2, Seed::ColumnValue).unwrap();
        assert_eq!(g.get(0, 0), 0.0);
        let bad = BoundaryProfile::custom("nan", |_| f64::NAN);
        assert!(boundary_init(&d, &bad, (0.0, 1.0), 2, 2, Seed::ColumnValue).is_err());
    }

    #[test]
    fn vertical_midpoint_toy() {
        let d = DomainSpec::bmo(1.0).unwrap();
        let mut g = GridFunction::new(d, (-1.0, 1.0), 3, 3, vec![0.0; 9]).unwrap();
        g.values[2 * 3 + 1] = 1.0;
        let (out, delta) = chord_sweep(&g, &ChordSet::default()).unwrap();
        assert!(out.get(1, 1) >= 0.5);
        assert!(delta >= 0.5);
    }

    #[test]
    fn linear_profile_is_a_fixed_point() {
        let d = DomainSpec::bmo(1.0).unwrap();
        let g = boundary_init(&d, &BoundaryProfile::identity(), (-3.0, 3.0), 31, 11, Seed::ColumnValue).unwrap();
        let (out, delta) = chord_sweep(&g, &ChordSet::default()).unwrap();
        assert!(delta < 1e-10, "{delta}");
        assert_eq!(out.values[..31], g.values[..31]);
    }

    #[test]
    fn constant_profile_stays_constant() {
        let d = DomainSpec::ainf(2.0).unwrap();
        let cfg = EnvelopeConfig::new(21, 9, (-1.0, 1.0));
        let sol = solve_envelope(&d, &BoundaryProfile::constant(0.7).unwrap(), &cfg).unwrap();
        assert!(sol.converged);
        assert!(sol.grid.values.iter().all(|&v| (v - 0.7).abs() < 1e-12));
    }

    #[test]
    fn nonpositive_tolerance_rejected() {
        let d = DomainSpec::bmo(1.0).unwrap();
        let mut cfg = EnvelopeConfig::new(5, 5, (-1.0, 1.0));
        cfg.tol = 0.0;
        assert!(solve_envelope(&d, &BoundaryProfile::square(), &cfg).is_err());
    }
}
