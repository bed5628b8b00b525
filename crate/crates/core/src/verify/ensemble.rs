use rayon::prelude::*;

use crate::error::Result;
use crate::field::{packet_field, random_field, FieldProfile, ScalarField, VelocityGrid};

#[derive(Debug, Clone)]
pub struct Member {
    pub label: String,
    pub field: ScalarField,
}

/// Random band-limited fields plus deterministic probes. Every member is a
/// fixed continuous function sampled on the grid, so ensembles built on two
/// grids with the same seed are comparable.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub members: Vec<Member>,
    pub random_count: usize,
}

pub const PROBE_RADII: [f64; 4] = [1.0, 2.0, 3.0, 4.0];
const PACKET_WIDTH: f64 = 1.0;
const PACKET_WAVENUMBER: f64 = 1.5;

impl Ensemble {
    pub fn random(grid: VelocityGrid, seed: u64, size: usize, profile: FieldProfile) -> Result<Self> {
        let members = (0..size)
            .into_par_iter()
            .map(|i| {
                Ok(Member {
                    label: format!("random-{i}"),
                    field: random_field(grid, member_seed(seed, i), profile)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            members,
            random_count: size,
        })
    }

    /// Random members followed by the probes.
    pub fn with_probes(grid: VelocityGrid, seed: u64, size: usize, profile: FieldProfile) -> Result<Self> {
        let mut e = Self::random(grid, seed, size, profile)?;
        e.members.extend(probes(grid)?);
        Ok(e)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn fields(&self) -> impl Iterator<Item = &ScalarField> {
        self.members.iter().map(|m| &m.field)
    }

    /// `(i, i + 1 mod n)` for every member, then `(i, i)`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n).map(|i| (i, (i + 1) % n)).chain((0..n).map(|i| (i, i))).collect()
    }
}

fn member_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64 + 1)
}

/// Radial Gaussians and packets at several radii with radial and tangential
/// oscillation.
pub fn probes(grid: VelocityGrid) -> Result<Vec<Member>> {
    let mut out = vec![
        Member {
            label: "gaussian".into(),
            field: packet_field(grid, [0.0; 3], 1.0, [0.0; 3])?,
        },
        Member {
            label: "gaussian-wide".into(),
            field: packet_field(grid, [0.0; 3], 2.0, [0.0; 3])?,
        },
    ];
    let s = 1.0 / 3f64.sqrt();
    for &r in &PROBE_RADII {
        let c = [r * s, r * s, r * s];
        let k = PACKET_WAVENUMBER;
        out.push(Member {
            label: format!("packet-radial-{r}"),
            field: packet_field(grid, c, PACKET_WIDTH, [k * s, k * s, k * s])?,
        });
        let t = 1.0 / 2f64.sqrt();
        out.push(Member {
            label: format!("packet-tangential-{r}"),
            field: packet_field(grid, c, PACKET_WIDTH, [k * t, -k * t, 0.0])?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::inner_product;

    #[test]
    fn sizes_and_unit_norms() {
        let grid = VelocityGrid::new(8.0, 16).unwrap();
        let e = Ensemble::with_probes(grid, 7, 5, FieldProfile::default()).unwrap();
        assert_eq!(e.random_count, 5);
        assert_eq!(e.len(), 5 + 2 + 2 * PROBE_RADII.len());
        for f in e.fields() {
            assert!((inner_product(f, f).unwrap() - 1.0).abs() < 1e-12);
        }
        assert_eq!(e.pairs().len(), 2 * e.len());
    }

    #[test]
    fn seeds_differ_between_ensembles() {
        let grid = VelocityGrid::new(8.0, 16).unwrap();
        let a = Ensemble::random(grid, 1, 3, FieldProfile::default()).unwrap();
        let b = Ensemble::random(grid, 2, 3, FieldProfile::default()).unwrap();
        for (x, y) in a.fields().zip(b.fields()) {
            assert_ne!(x, y);
        }
    }
}
