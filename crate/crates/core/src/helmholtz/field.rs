//! Field maps on a rectangular lattice.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use super::arc::{ArcSolution, Proximity};
use crate::error::{Error, Result};
use crate::geometry::{tip_positions, Point, ResonatorGeometry};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::config("grid_h_cm", "must be positive"));
        }
        if !(x1 > x0 && y1 > y0) {
            return Err(Error::config("region", "empty grid region"));
        }
        let nx = ((x1 - x0) / h + 1e-9).floor() as usize + 1;
        let ny = ((y1 - y0) / h + 1e-9).floor() as usize + 1;
        Ok(Grid { x0, y0, h, nx, ny })
    }

    /// Grid over `[x0, x1] x [-y_half, y_half]` whose rows mirror exactly
    /// under `y -> -y`.
    pub fn symmetric(x0: f64, x1: f64, y_half: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::config("grid_h_cm", "must be positive"));
        }
        let half = (y_half / h).ceil() as usize;
        let nx = ((x1 - x0) / h + 1e-9).floor() as usize + 1;
        Ok(Grid {
            x0,
            y0: -(half as f64) * h,
            h,
            nx,
            ny: 2 * half + 1,
        })
    }

    /// Default map region: wall to just past the vertex, tips included.
    pub fn for_geometry(geom: &ResonatorGeometry, h: f64) -> Result<Self> {
        let (tip, _) = tip_positions(geom);
        Self::symmetric(0.0, geom.separation() + 2.0, tip.y + 2.0, h)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    pub fn y(&self, j: usize) -> f64 {
        // Symmetric grids need exact negation between mirrored rows.
        let from_top = self.ny - 1 - j;
        if from_top < j {
            -(self.y0 + from_top as f64 * self.h)
        } else {
            self.y0 + j as f64 * self.h
        }
    }

    pub fn point(&self, i: usize, j: usize) -> Point {
        Point::new(self.x(i), self.y(j))
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
}

/// Field of one solved state on a grid. `e2 = |psi|^2`, `h2 = |grad psi|^2 / k^2`.
#[derive(Debug, Clone)]
pub struct FieldMap {
    pub grid: Grid,
    pub k: f64,
    pub psi: Vec<Complex64>,
    pub e2: Vec<f64>,
    pub h2: Vec<f64>,
    /// Nodes not evaluated (arc exclusion band, the antenna itself, or a
    /// masked finite-difference neighbour).
    pub mask: Vec<bool>,
    /// Nodes evaluated with the oversampled near-arc quadrature.
    pub near_arc: usize,
}

fn eval(sol: &ArcSolution, p: Point) -> Result<Option<Complex64>> {
    if p.distance(sol.source) < 1e-9 || sol.proximity(p) == Proximity::Excluded {
        return Ok(None);
    }
    sol.field_at(p).map(Some)
}

/// Evaluates `psi` on `grid` plus a one-node halo for the derivatives.
pub fn field_grid(sol: &ArcSolution, grid: Grid) -> Result<FieldMap> {
    let (nx, ny, h) = (grid.nx, grid.ny, grid.h);
    let hx = nx + 2;
    let hy = ny + 2;
    let rows: Vec<Vec<Option<Complex64>>> = (0..hy)
        .into_par_iter()
        .map(|jj| {
            let y = if jj == 0 {
                grid.y(0) - h
            } else if jj == hy - 1 {
                grid.y(ny - 1) + h
            } else {
                grid.y(jj - 1)
            };
            (0..hx)
                .map(|ii| eval(sol, Point::new(grid.x0 + (ii as f64 - 1.0) * h, y)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let near_arc = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .filter(|&(i, j)| sol.proximity(grid.point(i, j)) == Proximity::Near)
        .count();

    let n = grid.len();
    let mut psi = vec![Complex64::new(0.0, 0.0); n];
    let mut e2 = vec![0.0; n];
    let mut h2 = vec![0.0; n];
    let mut mask = vec![false; n];
    let k2 = sol.k * sol.k;
    for j in 0..ny {
        for i in 0..nx {
            let idx = grid.index(i, j);
            let at = |di: isize, dj: isize| rows[(j as isize + 1 + dj) as usize][(i as isize + 1 + di) as usize];
            match (at(0, 0), at(-1, 0), at(1, 0), at(0, -1), at(0, 1)) {
                (Some(c), Some(w), Some(e), Some(s), Some(nn)) => {
                    psi[idx] = c;
                    e2[idx] = c.norm_sqr();
                    let dx = (e - w) / (2.0 * h);
                    let dy = (nn - s) / (2.0 * h);
                    h2[idx] = (dx.norm_sqr() + dy.norm_sqr()) / k2;
                }
                (c, ..) => {
                    psi[idx] = c.unwrap_or(Complex64::new(f64::NAN, f64::NAN));
                    e2[idx] = f64::NAN;
                    h2[idx] = f64::NAN;
                    mask[idx] = true;
                }
            }
        }
    }
    Ok(FieldMap {
        grid,
        k: sol.k,
        psi,
        e2,
        h2,
        mask,
        near_arc,
    })
}

/// Field quantities that can be written as matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    RePsi,
    ImPsi,
    E2,
    H2,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [Quantity::RePsi, Quantity::ImPsi, Quantity::E2, Quantity::H2];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::RePsi => "re_psi",
            Quantity::ImPsi => "im_psi",
            Quantity::E2 => "e2",
            Quantity::H2 => "h2",
        }
    }
}

impl FieldMap {
    pub fn value(&self, q: Quantity, idx: usize) -> f64 {
        if self.mask[idx] {
            return f64::NAN;
        }
        match q {
            Quantity::RePsi => self.psi[idx].re,
            Quantity::ImPsi => self.psi[idx].im,
            Quantity::E2 => self.e2[idx],
            Quantity::H2 => self.h2[idx],
        }
    }

    /// Plain-text matrix, one grid row per line from `y0` upwards; masked
    /// nodes are written as `nan`.
    pub fn matrix_text(&self, q: Quantity) -> String {
        let g = &self.grid;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# quantity = {}\n# x0 = {}\n# x1 = {}\n# y0 = {}\n# y1 = {}\n# h = {}\n# nx = {}\n# ny = {}",
            q.name(),
            g.x(0),
            g.x(g.nx - 1),
            g.y(0),
            g.y(g.ny - 1),
            g.h,
            g.nx,
            g.ny
        );
        write_rows(&mut s, g, |idx| self.value(q, idx));
        s
    }
}

pub fn write_rows(s: &mut String, g: &Grid, value: impl Fn(usize) -> f64) {
    for j in 0..g.ny {
        for i in 0..g.nx {
            if i > 0 {
                s.push(' ');
            }
            let v = value(g.index(i, j));
            if v.is_nan() {
                s.push_str("nan");
            } else {
                let _ = write!(s, "{v:.9e}");
            }
        }
        s.push('\n');
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_geometry;
    use crate::helmholtz::arc::solve_arc_density;

    #[test]
    fn symmetric_grid_rows_mirror_exactly() {
        let g = Grid::symmetric(0.0, 10.0, 7.3, 0.7).unwrap();
        for j in 0..g.ny {
            assert_eq!(g.y(j), -g.y(g.ny - 1 - j));
        }
        assert_eq!(g.y((g.ny - 1) / 2), 0.0);
    }

    #[test]
    fn map_is_mirror_symmetric_and_masked_near_arc() {
        let geom = build_geometry(30.5, 106.0, 33.0, 0.2).unwrap();
        let k = 2.0 * std::f64::consts::PI * 5.63 / 29.979_245_8;
        let sol = solve_arc_density(&geom, k, 200).unwrap();
        let grid = Grid::symmetric(0.0, 36.0, 27.0, 1.5).unwrap();
        let map = field_grid(&sol, grid).unwrap();
        let scale = map.e2.iter().filter(|v| v.is_finite()).fold(0.0f64, |a, v| a.max(v.sqrt()));
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let a = grid.index(i, j);
                let b = grid.index(i, grid.ny - 1 - j);
                assert_eq!(map.mask[a], map.mask[b]);
                if !map.mask[a] {
                    assert!((map.psi[a] - map.psi[b]).norm() <= 1e-8 * scale);
                }
            }
        }
        assert!(map.mask.iter().any(|&m| m));
        // The wall column carries zero field.
        for j in 0..grid.ny {
            let idx = grid.index(0, j);
            if !map.mask[idx] {
                assert_eq!(map.psi[idx], Complex64::new(0.0, 0.0));
            }
        }
        let text = map.matrix_text(Quantity::E2);
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), grid.ny);
    }
}
