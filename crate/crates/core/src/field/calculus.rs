use rayon::prelude::*;

use super::{ScalarField, VectorField, VelocityGrid};

/// `out[i] = op(u[i], u[i + offset * e_axis])` with periodic wrap.
pub(crate) fn shift_map<F>(grid: &VelocityGrid, u: &[f64], axis: usize, offset: isize, op: F) -> Vec<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    (0..grid.len())
        .into_par_iter()
        .map(|i| op(u[i], u[grid.neighbor(i, axis, offset)]))
        .collect()
}

/// Second-order centered difference along `axis`, periodic.
pub fn centered_diff(grid: &VelocityGrid, u: &[f64], axis: usize) -> Vec<f64> {
    let inv = 0.5 / grid.h();
    (0..grid.len())
        .into_par_iter()
        .map(|i| (u[grid.neighbor(i, axis, 1)] - u[grid.neighbor(i, axis, -1)]) * inv)
        .collect()
}

/// `(u[i + e] - u[i]) / h`: difference onto the face `i + e/2`.
pub(crate) fn forward_diff(grid: &VelocityGrid, u: &[f64], axis: usize) -> Vec<f64> {
    let inv = 1.0 / grid.h();
    shift_map(grid, u, axis, 1, |c, n| (n - c) * inv)
}

/// Transpose of [`forward_diff`]: `(w[i - e] - w[i]) / h`.
pub(crate) fn forward_diff_adjoint(grid: &VelocityGrid, w: &[f64], axis: usize) -> Vec<f64> {
    let inv = 1.0 / grid.h();
    shift_map(grid, w, axis, -1, |c, p| (p - c) * inv)
}

/// Node-to-face average `(u[i] + u[i + e]) / 2`.
pub(crate) fn face_average(grid: &VelocityGrid, u: &[f64], axis: usize) -> Vec<f64> {
    shift_map(grid, u, axis, 1, |c, n| 0.5 * (c + n))
}

/// Transpose of [`face_average`]: `(w[i] + w[i - e]) / 2`.
pub(crate) fn face_average_adjoint(grid: &VelocityGrid, w: &[f64], axis: usize) -> Vec<f64> {
    shift_map(grid, w, axis, -1, |c, p| 0.5 * (c + p))
}

/// Centered-difference gradient with periodic wrap.
pub fn gradient(f: &ScalarField) -> VectorField {
    let g = *f.grid();
    let comps = std::array::from_fn(|d| centered_diff(&g, f.values(), d));
    VectorField::from_comps(g, comps).expect("component lengths match grid")
}

/// Splits `G` into its component along `v` and the remainder.
pub fn project_parallel(field: &VectorField) -> (VectorField, VectorField) {
    let grid = *field.grid();
    let n = grid.len();
    let mut par = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut perp = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        let v = grid.coords(i);
        let g = field.at(i);
        let vv = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        let s = (g[0] * v[0] + g[1] * v[1] + g[2] * v[2]) / vv;
        for d in 0..3 {
            par[d][i] = s * v[d];
            perp[d][i] = g[d] - par[d][i];
        }
    }
    (
        VectorField::from_comps(grid, par).expect("lengths"),
        VectorField::from_comps(grid, perp).expect("lengths"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: VelocityGrid) -> ScalarField {
        ScalarField::from_fn(grid, |v| (-0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp())
    }

    fn gradient_error(n: usize) -> f64 {
        let grid = VelocityGrid::new(8.0, n).unwrap();
        let f = gaussian(grid);
        let g = gradient(&f);
        let mut err: f64 = 0.0;
        for i in 0..grid.len() {
            let v = grid.coords(i);
            for d in 0..3 {
                err = err.max((g.comp(d)[i] + v[d] * f.values()[i]).abs());
            }
        }
        err
    }

    #[test]
    fn gaussian_gradient_second_order() {
        let e1 = gradient_error(32);
        let e2 = gradient_error(64);
        assert!(e1 < 0.1, "{e1}");
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn constant_has_zero_gradient() {
        let grid = VelocityGrid::new(8.0, 16).unwrap();
        let f = ScalarField::from_fn(grid, |_| 3.25);
        assert_eq!(gradient(&f).max_abs(), 0.0);
    }

    #[test]
    fn projection_examples() {
        let grid = VelocityGrid::new(5.0, 16).unwrap();
        // G = e_x is orthogonal to v on the z axis column; check generic nodes too.
        let radial = VectorField::from_fn(grid, |v| v);
        let (par, perp) = project_parallel(&radial);
        for i in 0..grid.len() {
            let v = grid.coords(i);
            for d in 0..3 {
                assert!((par.comp(d)[i] - v[d]).abs() < 1e-12);
                assert!(perp.comp(d)[i].abs() < 1e-12);
            }
        }
        let ex = VectorField::from_fn(grid, |_| [1.0, 0.0, 0.0]);
        let (par, perp) = project_parallel(&ex);
        for i in 0..grid.len() {
            let v = grid.coords(i);
            let p = par.at(i);
            let q = perp.at(i);
            // parallel is along v, perp orthogonal to v, sum recovers G
            let cross = [
                p[1] * v[2] - p[2] * v[1],
                p[2] * v[0] - p[0] * v[2],
                p[0] * v[1] - p[1] * v[0],
            ];
            let scale = crate::field::norm3(v);
            assert!(cross.iter().all(|c| c.abs() < 1e-12 * scale.max(1.0)));
            assert!((q[0] * v[0] + q[1] * v[1] + q[2] * v[2]).abs() < 1e-12 * scale.max(1.0));
            assert_eq!(p[0] + q[0], 1.0);
        }
    }

    #[test]
    fn projection_orthogonal_direction() {
        // v = (0, 0, 5) is not a node of a cell-centered grid; evaluate the
        // formula through a grid whose node lies at (0.5, 0.5, 4.5) instead
        // and check the explicitly orthogonal case G = (1, -1, 0).
        let grid = VelocityGrid::new(8.0, 16).unwrap();
        let idx = grid.index(8, 8, 12);
        let v = grid.coords(idx);
        assert_eq!(v, [0.5, 0.5, 4.5]);
        let g = VectorField::from_fn(grid, |_| [1.0, -1.0, 0.0]);
        let (par, perp) = project_parallel(&g);
        assert_eq!(par.at(idx), [0.0, 0.0, 0.0]);
        assert_eq!(perp.at(idx), [1.0, -1.0, 0.0]);
    }

    #[test]
    fn adjoint_pairs() {
        let grid = VelocityGrid::new(4.0, 16).unwrap();
        let u: Vec<f64> = (0..grid.len()).map(|i| ((i * 7919) % 113) as f64 / 113.0 - 0.5).collect();
        let w: Vec<f64> = (0..grid.len()).map(|i| ((i * 104729) % 97) as f64 / 97.0 - 0.5).collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        for axis in 0..3 {
            let lhs = dot(&forward_diff(&grid, &u, axis), &w);
            let rhs = dot(&u, &forward_diff_adjoint(&grid, &w, axis));
            assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
            let lhs = dot(&face_average(&grid, &u, axis), &w);
            let rhs = dot(&u, &face_average_adjoint(&grid, &w, axis));
            assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
            let lhs = dot(&centered_diff(&grid, &u, axis), &w);
            let rhs = -dot(&u, &centered_diff(&grid, &w, axis));
            assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
        }
    }
}
