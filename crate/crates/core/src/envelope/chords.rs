use rayon::prelude::*;
use std::f64::consts::PI;

use crate::domain::{Boundary, DomainSpec};
use crate::error::{Error, Result};

/// Directions along which local concavity is enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct ChordSet {
    /// Unit vectors in `x` coordinates; `d` and `-d` are the same line.
    pub directions: Vec<[f64; 2]>,
    /// Cap on `|s|` along each direction.
    pub max_half_length: f64,
    /// Nested endpoint pairs per chord: pair `k` uses the fractions `k/m` of
    /// the two extents.
    pub samples_per_chord: usize,
    /// Add per-node tangents to the level curve and to the free boundary.
    pub tangents: bool,
}

impl Default for ChordSet {
    fn default() -> Self {
        ChordSet::fan(17)
    }
}

impl ChordSet {
    /// `count` equally spaced directions on the half-circle starting at the vertical.
    pub fn fan(count: usize) -> Self {
        let directions = (0..count)
            .map(|k| {
                let th = PI / 2.0 + PI * k as f64 / count as f64;
                [th.cos(), th.sin()]
            })
            .map(|d: [f64; 2]| if d[0].abs() < 1e-15 { [0.0, 1.0] } else { d })
            .collect();
        ChordSet { directions, max_half_length: f64::INFINITY, samples_per_chord: 3, tangents: true }
    }

    pub fn validate(&self) -> Result<()> {
        let vertical = self.directions.iter().any(|d| d[0] == 0.0 && d[1] != 0.0);
        if !vertical {
            return Err(Error::InvalidParameter("chord set lacks the vertical direction".into()));
        }
        if self.directions.len() < 9 {
            return Err(Error::InvalidParameter(format!("{} chord directions, need at least 9", self.directions.len())));
        }
        if self.samples_per_chord == 0 || self.samples_per_chord > 16 || !(self.max_half_length > 0.0) {
            return Err(Error::InvalidParameter("chord sampling parameters".into()));
        }
        // spanning: no gap on the projective half-circle wider than a right angle
        let mut angles: Vec<f64> = self.directions.iter().map(|d| d[1].atan2(d[0]).rem_euclid(PI)).collect();
        angles.sort_by(f64::total_cmp);
        let wrap = angles[0] + PI - angles[angles.len() - 1];
        let widest = angles.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max);
        if widest > PI / 2.0 {
            return Err(Error::InvalidParameter("chord directions do not span the half-circle".into()));
        }
        Ok(())
    }
}

/// A maximal chord through a grid node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chord {
    pub d: [f64; 2],
    pub s_minus: f64,
    pub s_plus: f64,
    pub minus_end: Boundary,
    pub plus_end: Boundary,
}

/// Chords of every interior node, computed once per grid shape.
#[derive(Debug, Clone)]
pub struct ChordGeometry {
    pub nu: usize,
    pub nv: usize,
    /// Offsets into `chords` per node, length `nu*nv + 1`.
    pub offsets: Vec<usize>,
    pub chords: Vec<Chord>,
}

impl ChordGeometry {
    pub fn build(domain: &DomainSpec, u_range: (f64, f64), nu: usize, nv: usize, set: &ChordSet) -> Self {
        let (u_min, u_max) = u_range;
        let v_max = domain.v_max();
        let node_u = |i: usize| {
            if i + 1 == nu {
                u_max
            } else {
                u_min + (u_max - u_min) * (i as f64 / (nu - 1) as f64)
            }
        };
        let per_node: Vec<Vec<Chord>> = (0..nu * nv)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k % nu, k / nu);
                if j == 0 {
                    return Vec::new();
                }
                let u = node_u(i);
                let v = v_max * (j as f64 / (nv - 1) as f64);
                let mut dirs = set.directions.clone();
                if set.tangents {
                    dirs.push(domain.level_tangent(u, v));
                    dirs.extend(domain.free_boundary_tangents(u, v));
                }
                dirs.into_iter()
                    .filter_map(|d| {
                        let n = d[0].hypot(d[1]);
                        let d = [d[0] / n, d[1] / n];
                        let e = domain.line_extent(u, v, d, u_min, u_max);
                        let (mut s_minus, mut minus_end) = (e.s_minus, e.minus_end);
                        let (mut s_plus, mut plus_end) = (e.s_plus, e.plus_end);
                        if -s_minus > set.max_half_length {
                            s_minus = -set.max_half_length;
                            minus_end = Boundary::Open;
                        }
                        if s_plus > set.max_half_length {
                            s_plus = set.max_half_length;
                            plus_end = Boundary::Open;
                        }
                        let scale = 1e-12 * (1.0 + u.abs());
                        if s_plus > scale && -s_minus > scale && s_plus.is_finite() && s_minus.is_finite() {
                            Some(Chord { d, s_minus, s_plus, minus_end, plus_end })
                        } else {
                            None
                        }
                    })
                    .collect()
            })
            .collect();
        let mut offsets = Vec::with_capacity(nu * nv + 1);
        let mut chords = Vec::new();
        offsets.push(0);
        for c in per_node {
            chords.extend(c);
            offsets.push(chords.len());
        }
        ChordGeometry { nu, nv, offsets, chords }
    }

    pub fn node(&self, k: usize) -> &[Chord] {
        &self.chords[self.offsets[k]..self.offsets[k + 1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_fan_is_valid() {
        let c = ChordSet::default();
        assert_eq!(c.directions.len(), 17);
        assert!(c.validate().is_ok());
        assert!(c.directions.contains(&[0.0, 1.0]));
    }

    #[test]
    fn degenerate_fans_rejected() {
        let mut c = ChordSet::fan(17);
        c.directions.retain(|d| d[0] != 0.0);
        assert!(c.validate().is_err());
        let narrow = ChordSet { directions: (0..10).map(|k| [0.01 * k as f64, 1.0]).collect(), ..ChordSet::fan(17) };
        assert!(narrow.validate().is_err());
    }

    #[test]
    fn every_interior_node_below_the_top_has_a_vertical_chord() {
        let d = DomainSpec::bmo(1.0).unwrap();
        let g = ChordGeometry::build(&d, (-2.0, 2.0), 9, 6, &ChordSet::default());
        for k in 9..9 * 5 {
            assert!(g.node(k).iter().any(|c| c.d[0] == 0.0), "node {k}");
        }
        assert!(g.node(3).is_empty());
    }
}
