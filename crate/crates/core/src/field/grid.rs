use crate::error::{LandauError, Result};

/// Cell-centered uniform cube `[-R, R]^3` with `N` nodes per axis.
///
/// Node `i` on each axis sits at `(i + 1/2 - N/2) h`, so no node coincides
/// with the origin and the node set is symmetric under `v -> -v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityGrid {
    half_width: f64,
    n: usize,
    h: f64,
}

impl VelocityGrid {
    pub const MIN_NODES: usize = 16;

    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(LandauError::InvalidGrid(format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        if n < Self::MIN_NODES || n % 2 != 0 {
            return Err(LandauError::InvalidGrid(format!(
                "N must be even and >= {}, got {n}",
                Self::MIN_NODES
            )));
        }
        let h = 2.0 * half_width / n as f64;
        // Re-derive R from h so that h * N == 2R holds exactly.
        let half_width = 0.5 * (h * n as f64);
        Ok(Self { half_width, n, h })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.h * self.h * self.h
    }

    /// Linear index, `ix` fastest.
    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (iz * self.n + iy) * self.n + ix
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx % n, (idx / n) % n, idx / (n * n)]
    }

    /// Stride of `axis` in the linear index.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.n,
            _ => self.n * self.n,
        }
    }

    /// Odd integer `2i + 1 - N`; the node coordinate is this times `h / 2`.
    #[inline]
    pub fn odd_coord(&self, i: usize) -> i64 {
        2 * i as i64 + 1 - self.n as i64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        0.5 * self.odd_coord(i) as f64 * self.h
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let [ix, iy, iz] = self.unravel(idx);
        [self.node(ix), self.node(iy), self.node(iz)]
    }

    /// Linear index of the periodic neighbour `idx + offset * e_axis`.
    #[inline]
    pub fn neighbor(&self, idx: usize, axis: usize, offset: isize) -> usize {
        let n = self.n as isize;
        let s = self.stride(axis);
        let i = ((idx / s) % self.n) as isize;
        let j = (i + offset).rem_euclid(n);
        (idx as isize + (j - i) * s as isize) as usize
    }

    /// True if the node lies in the outermost shell of cells.
    pub fn is_boundary(&self, idx: usize) -> bool {
        let last = self.n - 1;
        self.unravel(idx).iter().any(|&i| i == 0 || i == last)
    }
}

/// Japanese bracket `(1 + |v|^2)^{1/2}`.
#[inline]
pub fn bracket(v: [f64; 3]) -> f64 {
    (1.0 + v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[inline]
pub fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(VelocityGrid::new(8.0, 15).is_err());
        assert!(VelocityGrid::new(8.0, 17).is_err());
        assert!(VelocityGrid::new(8.0, 14).is_err());
        assert!(VelocityGrid::new(-1.0, 16).is_err());
        assert!(VelocityGrid::new(8.0, 16).is_ok());
    }

    #[test]
    fn spacing_is_exact() {
        for &(r, n) in &[(8.0, 16), (8.0, 24), (8.0, 32), (7.3, 22), (5.0, 48)] {
            let g = VelocityGrid::new(r, n).unwrap();
            assert_eq!(g.h() * n as f64, 2.0 * g.half_width());
        }
    }

    #[test]
    fn cell_centered_and_symmetric() {
        let g = VelocityGrid::new(8.0, 16).unwrap();
        for i in 0..16 {
            assert!(g.node(i) != 0.0);
            assert_eq!(g.node(i), -g.node(15 - i));
        }
        assert_eq!(g.node(0), -8.0 + 0.5);
    }

    #[test]
    fn index_round_trip_and_neighbors() {
        let g = VelocityGrid::new(8.0, 16).unwrap();
        let idx = g.index(3, 15, 0);
        assert_eq!(g.unravel(idx), [3, 15, 0]);
        assert_eq!(g.unravel(g.neighbor(idx, 1, 1)), [3, 0, 0]);
        assert_eq!(g.unravel(g.neighbor(idx, 2, -1)), [3, 15, 15]);
        assert_eq!(g.unravel(g.neighbor(idx, 0, 2)), [5, 15, 0]);
    }
}
