//! Cylinder domain, exterior datum, discretization window, label fields and
//! connectivity analysis.
//!
//! The domain is the unit-radius cylinder `|x'| < 1` in `R^n` (n = 2 or 3,
//! vertical axis last). The discretization window is the box
//! `[-1,1]^{n-1} x [-H, H]` with `H = M + pad`, tiled exactly by cubic cells
//! of side `h`. A cell is *free* when its center lies in the cylinder and,
//! with the clamp band enabled, strictly between the slab faces `|x_n| < M`;
//! every other cell carries the label implied by the exterior datum.

pub mod dump;
pub mod shape;

use std::sync::Arc;

use thiserror::Error;

use crate::scalar::Scalar;
pub use shape::{bump_profile, classify_point, ray_intervals, Point, ShapeExpr};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("dimension must be 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("exponent s must lie in (0, 1), got {0}")]
    BadExponent(f64),
    #[error("slab half-width M must be positive, got {0}")]
    BadHalfWidth(f64),
    #[error("cell size h must be positive, got {0}")]
    BadCellSize(f64),
    #[error("vertical margin pad must be at least 1, got {0}")]
    BadPad(f64),
    #[error("truncation radius must be at least 3h, got {trunc} with h = {h}")]
    BadTruncation { trunc: f64, h: f64 },
    #[error("h = {h} does not tile the {what} extent {extent}")]
    NonTiling { h: f64, what: &'static str, extent: f64 },
    #[error("label field does not match this problem")]
    FieldMismatch,
    #[error("cell index {0} out of range")]
    BadCell(usize),
}

/// Axis-aligned discretization window.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<T: Scalar> {
    /// Ambient dimension, 2 or 3.
    pub n: usize,
    /// Cell side length.
    pub h: T,
    /// Vertical margin above/below the slab faces.
    pub pad: T,
    /// Half-height of the window, `H = M + pad`.
    pub half_height: T,
    /// Cells per horizontal axis (window spans `[-1, 1]`).
    pub nx: usize,
    /// Cells along the vertical axis (window spans `[-H, H]`).
    pub nz: usize,
}

impl<T: Scalar> GridSpec<T> {
    /// Number of cells in one horizontal layer.
    pub fn layer_len(&self) -> usize {
        if self.n == 2 {
            self.nx
        } else {
            self.nx * self.nx
        }
    }

    pub fn window_len(&self) -> usize {
        self.layer_len() * self.nz
    }

    /// Center of the lattice cell with the given integer coordinates. Valid
    /// for coordinates beyond the window as well.
    pub fn center(&self, c: LatticeCoord) -> Point<T> {
        let h = self.h;
        let mut p = [T::zero(); 3];
        p[0] = -T::one() + (T::of(c[0] as f64) + T::of(0.5)) * h;
        if self.n == 3 {
            p[1] = -T::one() + (T::of(c[1] as f64) + T::of(0.5)) * h;
        }
        p[self.n - 1] = -self.half_height + (T::of(c[2] as f64) + T::of(0.5)) * h;
        p
    }

    /// Vertical coordinate of the cell centers at level `iz`.
    pub fn level_center(&self, iz: i64) -> T {
        -self.half_height + (T::of(iz as f64) + T::of(0.5)) * self.h
    }

    /// Linear window index of an in-window coordinate, `None` outside.
    pub fn window_index(&self, c: LatticeCoord) -> Option<usize> {
        let nx = self.nx as i64;
        let nz = self.nz as i64;
        if c[0] < 0 || c[0] >= nx || c[2] < 0 || c[2] >= nz {
            return None;
        }
        if self.n == 3 && (c[1] < 0 || c[1] >= nx) {
            return None;
        }
        let layer = self.layer_len() as i64;
        Some((c[2] * layer + c[1] * nx + c[0]) as usize)
    }

    pub fn coord_of_window(&self, w: usize) -> LatticeCoord {
        let layer = self.layer_len();
        let iz = w / layer;
        let rem = w % layer;
        let (ix, iy) = if self.n == 2 {
            (rem, 0)
        } else {
            (rem % self.nx, rem / self.nx)
        };
        [ix as i64, iy as i64, iz as i64]
    }
}

/// Integer cell coordinates `(ix, iy, iz)`; `iy = 0` in dimension 2. May
/// address cells beyond the window.
pub type LatticeCoord = [i64; 3];

/// A fully validated problem instance.
#[derive(Debug, Clone)]
pub struct ProblemSpec<T: Scalar> {
    pub grid: GridSpec<T>,
    /// Fractional exponent in (0, 1).
    pub s: T,
    /// Slab half-width.
    pub m: T,
    /// Fix cells of the cylinder with `|x_n| >= M` to label 1.
    pub clamp_band: bool,
    /// Pairwise interactions are tabulated up to this distance; the remainder
    /// is closed against the exterior datum.
    pub trunc_radius: T,
    free_of_window: Vec<i32>,
    window_of_free: Vec<u32>,
}

/// Default truncation radius for a given slab half-width.
pub fn default_trunc_radius<T: Scalar>(m: T) -> T {
    let four = T::of(4.0);
    let two_m = T::of(2.0) * m;
    if two_m > four {
        two_m
    } else {
        four
    }
}

/// Validates parameters and enumerates free/fixed cells.
pub fn make_problem<T: Scalar>(
    n: usize,
    s: T,
    m: T,
    h: T,
    pad: T,
    clamp_band: bool,
    trunc_radius: T,
) -> Result<ProblemSpec<T>, GeometryError> {
    if n != 2 && n != 3 {
        return Err(GeometryError::BadDimension(n));
    }
    if !(s > T::zero() && s < T::one()) {
        return Err(GeometryError::BadExponent(s.f64()));
    }
    if !(m > T::zero()) {
        return Err(GeometryError::BadHalfWidth(m.f64()));
    }
    if !(h > T::zero()) {
        return Err(GeometryError::BadCellSize(h.f64()));
    }
    if !(pad >= T::one()) {
        return Err(GeometryError::BadPad(pad.f64()));
    }
    if trunc_radius < T::of(3.0) * h {
        return Err(GeometryError::BadTruncation {
            trunc: trunc_radius.f64(),
            h: h.f64(),
        });
    }
    let half_height = m + pad;
    let nx = tiling_count(h, T::of(2.0), "horizontal")?;
    let nz = tiling_count(h, T::of(2.0) * half_height, "vertical")?;
    let grid = GridSpec {
        n,
        h,
        pad,
        half_height,
        nx,
        nz,
    };

    let mut free_of_window = vec![-1i32; grid.window_len()];
    let mut window_of_free = Vec::new();
    for w in 0..grid.window_len() {
        let c = grid.coord_of_window(w);
        let p = grid.center(c);
        if !in_cylinder(&p, n) {
            continue;
        }
        if clamp_band && p[n - 1].abs() >= m {
            continue;
        }
        free_of_window[w] = window_of_free.len() as i32;
        window_of_free.push(w as u32);
    }
    Ok(ProblemSpec {
        grid,
        s,
        m,
        clamp_band,
        trunc_radius,
        free_of_window,
        window_of_free,
    })
}

fn tiling_count<T: Scalar>(h: T, extent: T, what: &'static str) -> Result<usize, GeometryError> {
    let ratio = (extent / h).f64();
    let count = ratio.round();
    if (ratio - count).abs() > 1e-9 * ratio.max(1.0) || count < 2.0 {
        return Err(GeometryError::NonTiling {
            h: h.f64(),
            what,
            extent: extent.f64(),
        });
    }
    Ok(count as usize)
}

fn in_cylinder<T: Scalar>(p: &Point<T>, n: usize) -> bool {
    let mut r2 = T::zero();
    for j in 0..n - 1 {
        r2 = r2 + p[j] * p[j];
    }
    r2 < T::one()
}

impl<T: Scalar> ProblemSpec<T> {
    pub fn num_free(&self) -> usize {
        self.window_of_free.len()
    }

    pub fn free_cells(&self) -> &[u32] {
        &self.window_of_free
    }

    /// Free index of a lattice coordinate, `None` for fixed cells.
    pub fn free_index(&self, c: LatticeCoord) -> Option<usize> {
        let w = self.grid.window_index(c)?;
        let f = self.free_of_window[w];
        if f >= 0 {
            Some(f as usize)
        } else {
            None
        }
    }

    pub fn coord_of_free(&self, f: usize) -> LatticeCoord {
        self.grid.coord_of_window(self.window_of_free[f] as usize)
    }

    /// The exterior datum: complement of the slab `|x_n| <= M`.
    pub fn exterior_datum(&self) -> ShapeExpr<T> {
        ShapeExpr::slab_complement(self.m, self.grid.n)
    }

    /// Label implied by the datum for a fixed (non-free) cell. On the clamp
    /// band and everywhere beyond the window this equals the datum label.
    pub fn implied_label(&self, c: LatticeCoord, exterior: &ShapeExpr<T>) -> bool {
        let p = self.grid.center(c);
        classify_point(exterior, &p, self.grid.n) == 1
    }

    /// Free index of the vertical mirror of free cell `f`. The free set is
    /// symmetric under `x_n -> -x_n`, so this is total.
    pub fn mirror_free(&self, f: usize) -> usize {
        let mut c = self.coord_of_free(f);
        c[2] = self.grid.nz as i64 - 1 - c[2];
        self.free_index(c)
            .expect("free set is symmetric under vertical reflection")
    }

    /// Offsets are tabulated for `|k|_inf <= kernel_extent()`.
    pub fn kernel_extent(&self) -> usize {
        ((self.trunc_radius / self.grid.h).f64() + 1e-9).floor() as usize
    }
}

/// Binary labels over the free cells plus the analytic exterior.
#[derive(Debug, Clone)]
pub struct LabelField<T: Scalar> {
    problem: Arc<ProblemSpec<T>>,
    exterior: ShapeExpr<T>,
    labels: Vec<bool>,
}

impl<T: Scalar> LabelField<T> {
    pub fn new(problem: Arc<ProblemSpec<T>>, labels: Vec<bool>) -> Result<Self, GeometryError> {
        if labels.len() != problem.num_free() {
            return Err(GeometryError::FieldMismatch);
        }
        let exterior = problem.exterior_datum();
        Ok(LabelField {
            problem,
            exterior,
            labels,
        })
    }

    /// All free cells labeled by the datum itself.
    pub fn from_datum(problem: Arc<ProblemSpec<T>>) -> Self {
        let exterior = problem.exterior_datum();
        let labels = (0..problem.num_free())
            .map(|f| problem.implied_label(problem.coord_of_free(f), &exterior))
            .collect();
        LabelField {
            problem,
            exterior,
            labels,
        }
    }

    pub fn constant(problem: Arc<ProblemSpec<T>>, value: bool) -> Self {
        let exterior = problem.exterior_datum();
        let labels = vec![value; problem.num_free()];
        LabelField {
            problem,
            exterior,
            labels,
        }
    }

    pub fn problem(&self) -> &Arc<ProblemSpec<T>> {
        &self.problem
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn set(&mut self, free_idx: usize, value: bool) {
        self.labels[free_idx] = value;
    }

    pub fn flip(&mut self, free_idx: usize) {
        self.labels[free_idx] = !self.labels[free_idx];
    }

    /// Label of any lattice cell: field value on free cells, implied datum
    /// label elsewhere (including beyond the window).
    pub fn label_at(&self, c: LatticeCoord) -> bool {
        match self.problem.free_index(c) {
            Some(f) => self.labels[f],
            None => self.problem.implied_label(c, &self.exterior),
        }
    }

    /// The field with labels reflected through `x_n = 0`.
    pub fn reflected_vertical(&self) -> Self {
        let mut out = self.clone();
        for f in 0..self.labels.len() {
            out.labels[self.problem.mirror_free(f)] = self.labels[f];
        }
        out
    }

    /// Labels over every window cell (free and fixed).
    pub fn window_raster(&self) -> Vec<bool> {
        (0..self.problem.grid.window_len())
            .map(|w| self.label_at(self.problem.grid.coord_of_window(w)))
            .collect()
    }
}

/// Connectivity summary of the labeled set inside the window.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentReport {
    pub num_components: usize,
    /// Per component: contains a cell in the top boundary row.
    pub touches_top: Vec<bool>,
    /// Per component: contains a cell in the bottom boundary row.
    pub touches_bottom: Vec<bool>,
    /// Every cylinder cell in the window is labeled 1.
    pub is_full_window: bool,
    /// The top and bottom exterior sets lie in one component, i.e. some
    /// component touches both boundary rows.
    pub exterior_linked: bool,
    /// Component id per window cell (`-1` on labeled-0 cells).
    pub component_of_window: Vec<i32>,
}

impl ComponentReport {
    pub fn component_of(&self, w: usize) -> Option<usize> {
        let c = self.component_of_window[w];
        if c >= 0 {
            Some(c as usize)
        } else {
            None
        }
    }
}

/// Face-adjacency components of the labeled-1 cells in the window, with the
/// exterior half-spaces `x_n > H` and `x_n < -H` attached through the top and
/// bottom boundary rows.
pub fn connected_components<T: Scalar>(field: &LabelField<T>) -> ComponentReport {
    let grid = &field.problem.grid;
    let raster = field.window_raster();
    let (num_components, component_of_window) =
        flood_fill_components(&raster, grid.n, grid.nx, grid.nz);

    let mut touches_top = vec![false; num_components];
    let mut touches_bottom = vec![false; num_components];
    let layer = grid.layer_len();
    for w in 0..raster.len() {
        let c = component_of_window[w];
        if c < 0 {
            continue;
        }
        let iz = w / layer;
        if iz == 0 {
            touches_bottom[c as usize] = true;
        }
        if iz == grid.nz - 1 {
            touches_top[c as usize] = true;
        }
    }
    let exterior_linked = (0..num_components).any(|c| touches_top[c] && touches_bottom[c]);

    let mut is_full_window = true;
    for w in 0..raster.len() {
        let p = grid.center(grid.coord_of_window(w));
        if in_cylinder(&p, grid.n) && !raster[w] {
            is_full_window = false;
            break;
        }
    }

    ComponentReport {
        num_components,
        touches_top,
        touches_bottom,
        is_full_window,
        exterior_linked,
        component_of_window,
    }
}

/// Flood fill of `true` cells under face adjacency on an `nx^(n-1) x nz` grid.
pub(crate) fn flood_fill_components(
    raster: &[bool],
    n: usize,
    nx: usize,
    nz: usize,
) -> (usize, Vec<i32>) {
    let layer = if n == 2 { nx } else { nx * nx };
    assert_eq!(raster.len(), layer * nz);
    let mut comp = vec![-1i32; raster.len()];
    let mut count = 0usize;
    let mut stack = Vec::new();
    for start in 0..raster.len() {
        if !raster[start] || comp[start] >= 0 {
            continue;
        }
        let id = count as i32;
        count += 1;
        comp[start] = id;
        stack.push(start);
        while let Some(w) = stack.pop() {
            let iz = w / layer;
            let rem = w % layer;
            let (ix, iy) = if n == 2 { (rem, 0) } else { (rem % nx, rem / nx) };
            let mut push = |c: Option<usize>| {
                if let Some(v) = c {
                    if raster[v] && comp[v] < 0 {
                        comp[v] = id;
                        stack.push(v);
                    }
                }
            };
            push((ix > 0).then(|| w - 1));
            push((ix + 1 < nx).then(|| w + 1));
            if n == 3 {
                push((iy > 0).then(|| w - nx));
                push((iy + 1 < nx).then(|| w + nx));
            }
            push((iz > 0).then(|| w - layer));
            push((iz + 1 < nz).then(|| w + layer));
        }
    }
    (count, comp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem_2d(s: f64, m: f64, h: f64, pad: f64, clamp: bool, trunc: f64) -> ProblemSpec<f64> {
        make_problem(2, s, m, h, pad, clamp, trunc).expect("valid problem")
    }

    #[test]
    fn free_cell_counts() {
        // 16 columns x 32 rows without clamping
        let p = problem_2d(0.5, 1.0, 0.125, 1.0, false, 2.0);
        assert_eq!(p.grid.nx, 16);
        assert_eq!(p.grid.nz, 32);
        assert_eq!(p.num_free(), 16 * 32);
        // clamped: only |x_n| < M
        let p = problem_2d(0.5, 1.0, 0.125, 1.0, true, 2.0);
        assert_eq!(p.num_free(), 16 * 16);
    }

    #[test]
    fn non_tiling_h_rejected() {
        let err = make_problem(2, 0.5, 1.0, 0.13, 1.0, false, 2.0).unwrap_err();
        assert!(matches!(err, GeometryError::NonTiling { .. }), "{err}");
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(make_problem(4, 0.5, 1.0, 0.125, 1.0, false, 2.0).is_err());
        assert!(make_problem(2, 1.0, 1.0, 0.125, 1.0, false, 2.0).is_err());
        assert!(make_problem(2, 0.5, -1.0, 0.125, 1.0, false, 2.0).is_err());
        assert!(make_problem(2, 0.5, 1.0, 0.125, 0.5, false, 2.0).is_err());
        assert!(make_problem(2, 0.5, 1.0, 0.125, 1.0, false, 0.25).is_err());
    }

    #[test]
    fn clamped_3d_free_band() {
        let p = make_problem(3, 0.3f64, 0.05, 0.05, 1.0, true, 1.0).expect("valid");
        assert_eq!(p.grid.nx, 40);
        assert_eq!(p.grid.nz, 42);
        assert!(p.num_free() > 0);
        for f in 0..p.num_free() {
            let c = p.coord_of_free(f);
            let x = p.grid.center(c);
            assert!(x[2].abs() < 0.05, "free cell at x_n = {}", x[2]);
            assert!(x[0] * x[0] + x[1] * x[1] < 1.0);
        }
    }

    #[test]
    fn datum_field_splits_by_slab() {
        let p = Arc::new(problem_2d(0.5, 1.0, 0.25, 1.0, false, 2.0));
        let field = LabelField::from_datum(p.clone());
        for f in 0..p.num_free() {
            let x = p.grid.center(p.coord_of_free(f));
            assert_eq!(field.labels()[f], x[1].abs() >= 1.0);
        }
    }

    #[test]
    fn full_window_single_component() {
        let p = Arc::new(problem_2d(0.5, 0.5, 0.25, 1.0, true, 2.0));
        let field = LabelField::constant(p, true);
        let rep = connected_components(&field);
        assert_eq!(rep.num_components, 1);
        assert!(rep.is_full_window);
        assert!(rep.exterior_linked);
    }

    #[test]
    fn datum_two_components() {
        let p = Arc::new(problem_2d(0.5, 1.0, 0.25, 1.0, true, 2.0));
        let field = LabelField::from_datum(p);
        let rep = connected_components(&field);
        assert_eq!(rep.num_components, 2);
        assert!(!rep.exterior_linked);
        let top = rep.touches_top.iter().filter(|&&t| t).count();
        let bottom = rep.touches_bottom.iter().filter(|&&t| t).count();
        assert_eq!((top, bottom), (1, 1));
    }

    #[test]
    fn checkerboard_components() {
        // 4x4 checkerboard under face adjacency: 8 isolated cells.
        let mut raster = vec![false; 16];
        for iz in 0..4 {
            for ix in 0..4 {
                if (ix + iz) % 2 == 0 {
                    raster[iz * 4 + ix] = true;
                }
            }
        }
        let (count, _) = flood_fill_components(&raster, 2, 4, 4);
        assert_eq!(count, 8);
    }

    #[test]
    fn reflection_invariance_of_report() {
        let p = Arc::new(problem_2d(0.5, 1.0, 0.25, 1.0, true, 2.0));
        let mut field = LabelField::from_datum(p.clone());
        // attach an asymmetric blob to the bottom face
        let c = p
            .free_index([3, 0, 4])
            .or_else(|| p.free_index([3, 0, 5]))
            .unwrap();
        field.set(c, true);
        let rep = connected_components(&field);
        let rep_reflected = connected_components(&field.reflected_vertical());
        assert_eq!(rep.num_components, rep_reflected.num_components);
        assert_eq!(rep.exterior_linked, rep_reflected.exterior_linked);
        let tops: usize = rep.touches_top.iter().filter(|&&t| t).count();
        let bots_r: usize = rep_reflected.touches_bottom.iter().filter(|&&t| t).count();
        assert_eq!(tops, bots_r);
    }

    #[test]
    fn merging_cells_never_increases_components() {
        let p = Arc::new(problem_2d(0.5, 1.0, 0.25, 1.0, true, 2.0));
        let mut field = LabelField::from_datum(p.clone());
        let before = connected_components(&field).num_components;
        // flip a free cell adjacent to the bottom band to 1
        let f = (0..p.num_free())
            .find(|&f| {
                let c = p.coord_of_free(f);
                field.label_at([c[0], c[1], c[2] - 1])
            })
            .unwrap();
        field.set(f, true);
        let after = connected_components(&field).num_components;
        assert!(after <= before);
    }

    #[test]
    fn mirror_free_involution() {
        let p = Arc::new(problem_2d(0.5, 1.0, 0.125, 1.0, true, 2.0));
        for f in 0..p.num_free() {
            assert_eq!(p.mirror_free(p.mirror_free(f)), f);
        }
    }
}
