//! Bead-perturbation frequency shift maps.

use std::f64::consts::PI;

use crate::geometry::Point;
use crate::helmholtz::{write_rows, FieldMap, Grid};

/// Contour threshold as a fraction of the most negative shift.
pub const CONTOUR_FRACTION: f64 = 0.2;

#[derive(Debug, Clone)]
pub struct ShiftMap {
    pub grid: Grid,
    /// Relative squared-frequency shift per node, `NaN` where masked.
    pub shift: Vec<f64>,
    /// Normalized intensities used for the shift.
    pub e2: Vec<f64>,
    pub h2: Vec<f64>,
    pub r0: f64,
    /// Nodes below `CONTOUR_FRACTION` of the most negative shift.
    pub contour: Vec<bool>,
}

/// `4 pi r0^3 (h2/2 - e2)` with intensities scaled so that `max e2 = 1`.
/// Nodes within `exclusion` cm of `source` are masked.
pub fn slater_shift_map(field: &FieldMap, r0: f64, source: Point, exclusion: f64) -> ShiftMap {
    let g = field.grid;
    let valid: Vec<bool> = (0..g.len())
        .map(|idx| {
            let (i, j) = (idx % g.nx, idx / g.nx);
            !field.mask[idx] && g.point(i, j).distance(source) > exclusion
        })
        .collect();
    let peak = field
        .e2
        .iter()
        .zip(&valid)
        .filter(|(_, &v)| v)
        .map(|(e, _)| *e)
        .fold(0.0, f64::max);
    let scale = if peak > 0.0 { 1.0 / peak } else { 1.0 };
    let pre = 4.0 * PI * r0.powi(3);
    let nan_unless = |v: f64, ok: bool| if ok { v } else { f64::NAN };
    let e2: Vec<f64> = field.e2.iter().zip(&valid).map(|(e, &v)| nan_unless(e * scale, v)).collect();
    let h2: Vec<f64> = field.h2.iter().zip(&valid).map(|(h, &v)| nan_unless(h * scale, v)).collect();
    let shift: Vec<f64> = e2.iter().zip(&h2).map(|(e, h)| pre * (0.5 * h - e)).collect();
    let most_negative = shift.iter().filter(|s| s.is_finite()).fold(0.0f64, |a, s| a.min(*s));
    let contour = shift
        .iter()
        .map(|s| most_negative < 0.0 && s.is_finite() && *s <= CONTOUR_FRACTION * most_negative)
        .collect();
    ShiftMap {
        grid: g,
        shift,
        e2,
        h2,
        r0,
        contour,
    }
}

impl ShiftMap {
    pub fn matrix_text(&self) -> String {
        let mut s = self.header("shift");
        write_rows(&mut s, &self.grid, |i| self.shift[i]);
        s
    }

    /// 1 for nodes on the thresholded negative contour, 0 elsewhere.
    pub fn contour_text(&self) -> String {
        let mut s = self.header("contour_mask");
        write_rows(&mut s, &self.grid, |i| if self.contour[i] { 1.0 } else { 0.0 });
        s
    }

    fn header(&self, q: &str) -> String {
        let g = &self.grid;
        format!(
            "# quantity = {q}\n# r0_cm = {}\n# x0 = {}\n# x1 = {}\n# y0 = {}\n# y1 = {}\n# h = {}\n# nx = {}\n# ny = {}\n",
            self.r0,
            g.x(0),
            g.x(g.nx - 1),
            g.y(0),
            g.y(g.ny - 1),
            g.h,
            g.nx,
            g.ny
        )
    }

    /// Indices of finite nodes, sorted by decreasing normalized `e2`.
    pub fn by_intensity(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.shift.len()).filter(|&i| self.shift[i].is_finite()).collect();
        v.sort_by(|&a, &b| self.e2[b].total_cmp(&self.e2[a]));
        v
    }
}
