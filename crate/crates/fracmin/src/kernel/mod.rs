//! Translation-invariant pairwise weights and analytic far-field tails for
//! the kernel `|x - y|^{-(n+s)}`.
//!
//! A table covers all integer offsets with `|k|_inf <= K` where
//! `K = floor(trunc_radius / h)`. For each cell, interactions beyond the cube
//! of half-side `(K + 1/2) h` centered on it are closed against the exterior
//! datum (slab complement with half-width `M`): the far region splits into
//! two vertical half-spaces (closed form via the tail formula, shifted) and a
//! lateral ring, integrated with exact per-ray radial integrals and angular
//! quadrature. Tails depend on a cell only through its vertical level.

pub mod cache;
pub mod quadrature;

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::ProblemSpec;
use crate::quad::{gamma, gauss_legendre};
use crate::scalar::Scalar;

pub use quadrature::{weight_unit, DEFAULT_WEIGHT_ORDER};

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("offset weights are undefined for the zero offset")]
    ZeroOffset,
    #[error("half-space tail requires a positive distance, got {0}")]
    NonPositiveDistance(f64),
    #[error("dimension must be 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("offset {0:?} outside the tabulated box (extent {1})")]
    OffsetOutOfRange([i64; 3], usize),
    #[error("non-finite weight at offset {0:?}")]
    BadWeight([i64; 3]),
    #[error("kernel cache: {0}")]
    Cache(String),
}

/// Closed form of the half-space tail `T(a) = (C_ns / s) a^{-s}`, the kernel
/// mass of `{z_n > a}` seen from the origin.
#[derive(Debug, Clone, Copy)]
pub struct TailFormula<T: Scalar> {
    /// `C_ns = pi^{(n-1)/2} Gamma((1+s)/2) / Gamma((n+s)/2)`.
    pub c_ns: T,
    s: T,
}

impl<T: Scalar> TailFormula<T> {
    pub fn new(n: usize, s: T) -> Result<Self, KernelError> {
        if n != 2 && n != 3 {
            return Err(KernelError::BadDimension(n));
        }
        let half = T::of(0.5);
        let pi = T::of(std::f64::consts::PI);
        let c_ns = pi.powf(T::of((n - 1) as f64) * half) * gamma((T::one() + s) * half)
            / gamma((T::of(n as f64) + s) * half);
        Ok(TailFormula { c_ns, s })
    }

    /// `T(a)` for `a > 0`.
    pub fn eval(&self, a: T) -> T {
        self.c_ns / self.s * a.powf(-self.s)
    }
}

/// Kernel mass of the half-space `{z_n > a}` from the origin.
pub fn halfspace_tail<T: Scalar>(a: T, n: usize, s: T) -> Result<T, KernelError> {
    if !(a > T::zero()) {
        return Err(KernelError::NonPositiveDistance(a.f64()));
    }
    Ok(TailFormula::new(n, s)?.eval(a))
}

/// Pairwise weight between cells of side `h` at offset `k` (zero rejected).
/// Scales exactly: `w(k; h) = h^{n-s} w(k; 1)`.
pub fn offset_weight<T: Scalar>(
    k: [i64; 3],
    n: usize,
    h: T,
    s: T,
    order: usize,
) -> Result<T, KernelError> {
    if k[..n.min(2)].iter().all(|&c| c == 0) && k[2] == 0 {
        return Err(KernelError::ZeroOffset);
    }
    Ok(quadrature::offset_weight(k, n, h, s, order))
}

/// Quadrature settings for the lateral-ring tail integrals.
#[derive(Debug, Clone, Copy)]
pub struct TailQuadOpts {
    /// Gauss order per axis over the source cell.
    pub cell_order: usize,
    /// Sub-panels per smooth arc of the angular integral.
    pub arc_panels: usize,
    /// Gauss order per angular sub-panel.
    pub arc_order: usize,
    /// Polar panels per half-range (dimension 3 only).
    pub polar_panels: usize,
}

impl Default for TailQuadOpts {
    fn default() -> Self {
        TailQuadOpts {
            cell_order: 5,
            arc_panels: 8,
            arc_order: 10,
            polar_panels: 6,
        }
    }
}

/// `int_a^b r^{-1-s} dr = (a^{-s} - b^{-s}) / s`; `b` may be infinite.
fn radial_mass<T: Scalar>(s: T, a: T, b: T) -> T {
    let bpow = if b.is_infinite() { T::zero() } else { b.powf(-s) };
    (a.powf(-s) - bpow) / s
}

/// Far-field unaries `(tail_in, tail_out)` for a cell at vertical center
/// `z_c`: kernel mass from the cell to the region beyond the concentric cube
/// of half-side `l`, split against the slab datum of half-width `m`.
/// `tail_in` is the mass landing in the datum complement (cost of label 1),
/// `tail_out` the mass landing in the datum (cost of label 0).
pub fn level_tails<T: Scalar>(
    n: usize,
    s: T,
    m: T,
    h: T,
    l: T,
    z_c: T,
    opts: &TailQuadOpts,
) -> (T, T) {
    let tf = TailFormula::new(n, s).expect("dimension validated upstream");
    let half_h = h / T::of(2.0);
    let hpow = h.powf(T::of((n - 1) as f64));

    // Vertical half-space parts: integrand depends on x_n only, and the
    // in/out split is an exact partition of the full half-space mass.
    let rule = gauss_legendre(8);
    let mut plane_in = T::zero();
    let mut plane_out = T::zero();
    for (&node, &wq) in rule.0.iter().zip(rule.1.iter()) {
        let xi = half_h * T::of(node);
        let wq = half_h * T::of(wq);
        let xn = z_c + xi;
        let a_t = z_c + l;
        let a_b = z_c - l;
        let mut mass_in = T::zero();
        let mut mass_out = T::zero();
        // above the cube
        if a_t >= m {
            mass_out = mass_out + tf.eval(a_t - xn);
        } else if a_t >= -m {
            mass_out = mass_out + tf.eval(m - xn);
            mass_in = mass_in + tf.eval(a_t - xn) - tf.eval(m - xn);
        } else {
            mass_out = mass_out + tf.eval(a_t - xn) - tf.eval(-m - xn) + tf.eval(m - xn);
            mass_in = mass_in + tf.eval(-m - xn) - tf.eval(m - xn);
        }
        // below the cube
        if a_b <= -m {
            mass_out = mass_out + tf.eval(xn - a_b);
        } else if a_b <= m {
            mass_out = mass_out + tf.eval(xn + m);
            mass_in = mass_in + tf.eval(xn - a_b) - tf.eval(xn + m);
        } else {
            mass_out = mass_out + tf.eval(xn + m) + tf.eval(xn - a_b) - tf.eval(xn - m);
            mass_in = mass_in + tf.eval(xn - m) - tf.eval(xn + m);
        }
        plane_in = plane_in + wq * mass_in;
        plane_out = plane_out + wq * mass_out;
    }
    plane_in = plane_in * hpow;
    plane_out = plane_out * hpow;

    let (ring_in, ring_out) = if n == 2 {
        cell_quad_2d(half_h, opts.cell_order, |xi0, xin| {
            ring_point_2d(s, m, l, xi0, xin, z_c, opts)
        })
    } else {
        cell_quad_3d(half_h, opts.cell_order.min(4), |xi| {
            ring_point_3d(s, m, l, xi, z_c, opts)
        })
    };

    (plane_in + ring_in, plane_out + ring_out)
}

fn cell_quad_2d<T: Scalar>(half_h: T, order: usize, mut f: impl FnMut(T, T) -> (T, T)) -> (T, T) {
    let rule = gauss_legendre(order);
    let mut a = T::zero();
    let mut b = T::zero();
    for (&x0, &w0) in rule.0.iter().zip(rule.1.iter()) {
        for (&x1, &w1) in rule.0.iter().zip(rule.1.iter()) {
            let w = half_h * T::of(w0) * half_h * T::of(w1);
            let (fa, fb) = f(half_h * T::of(x0), half_h * T::of(x1));
            a = a + w * fa;
            b = b + w * fb;
        }
    }
    (a, b)
}

fn cell_quad_3d<T: Scalar>(
    half_h: T,
    order: usize,
    mut f: impl FnMut([T; 3]) -> (T, T),
) -> (T, T) {
    let rule = gauss_legendre(order);
    let mut a = T::zero();
    let mut b = T::zero();
    for (&x0, &w0) in rule.0.iter().zip(rule.1.iter()) {
        for (&x1, &w1) in rule.0.iter().zip(rule.1.iter()) {
            for (&x2, &w2) in rule.0.iter().zip(rule.1.iter()) {
                let w = half_h * T::of(w0) * half_h * T::of(w1) * half_h * T::of(w2);
                let (fa, fb) = f([half_h * T::of(x0), half_h * T::of(x1), half_h * T::of(x2)]);
                a = a + w * fa;
                b = b + w * fb;
            }
        }
    }
    (a, b)
}

/// Arc boundaries for the angular quadrature around a point offset `(xi_h,
/// xi_v)` from the cube center: axis directions plus the four cube corners.
fn arc_splits<T: Scalar>(l: T, xi_h: T, xi_v: T) -> Vec<T> {
    let two_pi = T::of(std::f64::consts::TAU);
    let mut angles: Vec<T> = [0.0, 0.5, 1.0, 1.5]
        .iter()
        .map(|&k| T::of(k * std::f64::consts::PI))
        .collect();
    for sx in [-1.0, 1.0] {
        for sz in [-1.0, 1.0] {
            let dx = (T::of(sx) * l - xi_h).f64();
            let dz = (T::of(sz) * l - xi_v).f64();
            let mut a = T::of(dz.atan2(dx));
            if a < T::zero() {
                a = a + two_pi;
            }
            angles.push(a);
        }
    }
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    angles.dedup_by(|a, b| (*a - *b).abs() < T::of(1e-12));
    angles
}

/// Ring contribution of one ray with exact radial integration. Returns the
/// `(in, out)` pair; the split is an exact partition of the segment mass.
fn ring_ray<T: Scalar>(s: T, m: T, l: T, wh: T, wv: T, xi: (T, T), y0: T) -> (T, T) {
    let r_col = if wh == T::zero() {
        T::infinity()
    } else {
        let target = if wh > T::zero() { l } else { -l };
        (target - xi.0) / wh
    };
    let r_band = if wv == T::zero() {
        T::infinity()
    } else {
        let target = if wv > T::zero() { l } else { -l };
        (target - xi.1) / wv
    };
    if !(r_col < r_band) {
        return (T::zero(), T::zero());
    }
    let total = radial_mass(s, r_col, r_band);
    let inside_slab = if wv == T::zero() {
        if y0.abs() <= m {
            total
        } else {
            T::zero()
        }
    } else {
        let r1 = (-m - y0) / wv;
        let r2 = (m - y0) / wv;
        let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
        let lo = lo.max(r_col);
        let hi = hi.min(r_band);
        if hi > lo {
            radial_mass(s, lo, hi)
        } else {
            T::zero()
        }
    };
    (inside_slab, total - inside_slab)
}

fn ring_point_2d<T: Scalar>(
    s: T,
    m: T,
    l: T,
    xi0: T,
    xin: T,
    z_c: T,
    opts: &TailQuadOpts,
) -> (T, T) {
    let y0 = z_c + xin;
    let two_pi = T::of(std::f64::consts::TAU);
    let angles = arc_splits(l, xi0, xin);
    let rule = gauss_legendre(opts.arc_order);
    let mut mass_in = T::zero();
    let mut mass_out = T::zero();
    for i in 0..angles.len() {
        let a = angles[i];
        let b = if i + 1 < angles.len() {
            angles[i + 1]
        } else {
            angles[0] + two_pi
        };
        if !(b > a) {
            continue;
        }
        let width = (b - a) / T::of(opts.arc_panels as f64);
        for p in 0..opts.arc_panels {
            let half = width / T::of(2.0);
            let mid = a + width * T::of(p as f64) + half;
            for (&node, &wq) in rule.0.iter().zip(rule.1.iter()) {
                let theta = mid + half * T::of(node);
                let w = half * T::of(wq);
                let (ci, co) = ring_ray(s, m, l, theta.cos(), theta.sin(), (xi0, xin), y0);
                mass_in = mass_in + w * ci;
                mass_out = mass_out + w * co;
            }
        }
    }
    (mass_in, mass_out)
}

fn ring_point_3d<T: Scalar>(
    s: T,
    m: T,
    l: T,
    xi: [T; 3],
    z_c: T,
    opts: &TailQuadOpts,
) -> (T, T) {
    let y0 = z_c + xi[2];
    let two_pi = T::of(std::f64::consts::TAU);
    let angles = arc_splits(l, xi[0], xi[1]);
    let arc_rule = gauss_legendre(opts.arc_order.min(8));
    let polar_rule = gauss_legendre(8);
    let mut mass_in = T::zero();
    let mut mass_out = T::zero();
    for i in 0..angles.len() {
        let a = angles[i];
        let b = if i + 1 < angles.len() {
            angles[i + 1]
        } else {
            angles[0] + two_pi
        };
        if !(b > a) {
            continue;
        }
        let panels = 2usize;
        let width = (b - a) / T::of(panels as f64);
        for p in 0..panels {
            let half_phi = width / T::of(2.0);
            let mid_phi = a + width * T::of(p as f64) + half_phi;
            for (&node_phi, &w_phi) in arc_rule.0.iter().zip(arc_rule.1.iter()) {
                let phi = mid_phi + half_phi * T::of(node_phi);
                let wq_phi = half_phi * T::of(w_phi);
                let (cp, sp) = (phi.cos(), phi.sin());
                for half_range in 0..2 {
                    let (t_lo, t_hi) = if half_range == 0 {
                        (-T::one(), T::zero())
                    } else {
                        (T::zero(), T::one())
                    };
                    let pw = (t_hi - t_lo) / T::of(opts.polar_panels as f64);
                    for tp in 0..opts.polar_panels {
                        let half_t = pw / T::of(2.0);
                        let mid_t = t_lo + pw * T::of(tp as f64) + half_t;
                        for (&node_t, &w_t) in polar_rule.0.iter().zip(polar_rule.1.iter()) {
                            let t = mid_t + half_t * T::of(node_t);
                            let wq = wq_phi * half_t * T::of(w_t);
                            let rho = (T::one() - t * t).max(T::zero()).sqrt();
                            // exit from the square column: nearest face
                            let mut r_col = T::infinity();
                            for (dir, off) in [(rho * cp, xi[0]), (rho * sp, xi[1])] {
                                if dir != T::zero() {
                                    let target = if dir > T::zero() { l } else { -l };
                                    let r = (target - off) / dir;
                                    if r < r_col {
                                        r_col = r;
                                    }
                                }
                            }
                            let r_band = if t == T::zero() {
                                T::infinity()
                            } else {
                                let target = if t > T::zero() { l } else { -l };
                                (target - xi[2]) / t
                            };
                            if !(r_col < r_band) {
                                continue;
                            }
                            let total = radial_mass(s, r_col, r_band);
                            let inside = if t == T::zero() {
                                if y0.abs() <= m {
                                    total
                                } else {
                                    T::zero()
                                }
                            } else {
                                let r1 = (-m - y0) / t;
                                let r2 = (m - y0) / t;
                                let (ilo, ihi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
                                let ilo = ilo.max(r_col);
                                let ihi = ihi.min(r_band);
                                if ihi > ilo {
                                    radial_mass(s, ilo, ihi)
                                } else {
                                    T::zero()
                                }
                            };
                            mass_in = mass_in + wq * inside;
                            mass_out = mass_out + wq * (total - inside);
                        }
                    }
                }
            }
        }
    }
    (mass_in, mass_out)
}

/// Pairwise weights plus per-level tail unaries for one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable<T: Scalar> {
    pub n: usize,
    pub s: T,
    pub h: T,
    pub m: T,
    /// Window half-height (fixes the level centers the tails refer to).
    pub half_height: T,
    /// Tabulated offsets satisfy `|k|_inf <= extent`.
    pub extent: usize,
    pub nz: usize,
    pub(crate) weights: Vec<T>,
    /// `(tail_in, tail_out)` per vertical level.
    pub(crate) tails: Vec<(T, T)>,
}

impl<T: Scalar> KernelTable<T> {
    fn weight_index(&self, k: [i64; 3]) -> usize {
        let side = 2 * self.extent + 1;
        let kk = self.extent as i64;
        let mut idx = (k[0] + kk) as usize;
        if self.n == 3 {
            idx += side * (k[1] + kk) as usize;
            idx += side * side * (k[2] + kk) as usize;
        } else {
            idx += side * (k[2] + kk) as usize;
        }
        idx
    }

    /// Pairwise weight at offset `k`; requires `|k|_inf <= extent`, `k != 0`.
    pub fn weight(&self, k: [i64; 3]) -> T {
        self.weights[self.weight_index(k)]
    }

    pub fn try_weight(&self, k: [i64; 3]) -> Result<T, KernelError> {
        let kk = self.extent as i64;
        if k[0].abs() > kk || k[1].abs() > kk || k[2].abs() > kk {
            return Err(KernelError::OffsetOutOfRange(k, self.extent));
        }
        if k == [0, 0, 0] {
            return Err(KernelError::ZeroOffset);
        }
        Ok(self.weight(k))
    }

    /// `(tail_in, tail_out)` of any cell at vertical level `iz`.
    pub fn tails_at_level(&self, iz: usize) -> (T, T) {
        self.tails[iz]
    }

    /// `(tail_in, tail_out)` of a free cell.
    pub fn tails_of_free(&self, problem: &ProblemSpec<T>, f: usize) -> (T, T) {
        let c = problem.coord_of_free(f);
        self.tails[c[2] as usize]
    }

    /// Sum of all tabulated pairwise weights around one cell.
    pub fn weight_sum_around(&self) -> T {
        let kk = self.extent as i64;
        let mut acc = T::zero();
        for kx in -kk..=kk {
            for ky in if self.n == 3 { -kk..=kk } else { 0..=0 } {
                for kz in -kk..=kk {
                    if kx == 0 && ky == 0 && kz == 0 {
                        continue;
                    }
                    acc = acc + self.weight([kx, ky, kz]);
                }
            }
        }
        acc
    }
}

/// Builds the kernel table: all offsets within the truncation box plus
/// per-level tail unaries. Deterministic for fixed inputs.
pub fn build_kernel_table<T: Scalar>(
    problem: &ProblemSpec<T>,
) -> Result<KernelTable<T>, KernelError> {
    build_kernel_table_with(problem, DEFAULT_WEIGHT_ORDER, &TailQuadOpts::default())
}

pub fn build_kernel_table_with<T: Scalar>(
    problem: &ProblemSpec<T>,
    order: usize,
    tail_opts: &TailQuadOpts,
) -> Result<KernelTable<T>, KernelError> {
    let n = problem.grid.n;
    let s = problem.s;
    let h = problem.grid.h;
    let extent = problem.kernel_extent();
    let kk = extent as i64;
    let scale = h.powf(T::of(n as f64) - s);

    // canonical representatives: component magnitudes sorted descending
    let mut canon: Vec<[i64; 3]> = Vec::new();
    for a in 1..=kk {
        for b in 0..=a {
            if n == 2 {
                canon.push([a, b, 0]);
            } else {
                for c in 0..=b {
                    canon.push([a, b, c]);
                }
            }
        }
    }
    let computed: Vec<([i64; 3], T)> = canon
        .par_iter()
        .map(|&k| (k, scale * weight_unit(k, n, s, order)))
        .collect();
    let lookup: std::collections::HashMap<[i64; 3], T> = computed.into_iter().collect();

    let side = 2 * extent + 1;
    let len = if n == 2 { side * side } else { side * side * side };
    let mut weights = vec![T::zero(); len];
    for kx in -kk..=kk {
        for ky in if n == 3 { -kk..=kk } else { 0..=0 } {
            for kz in -kk..=kk {
                if kx == 0 && ky == 0 && kz == 0 {
                    continue;
                }
                let mut abs = if n == 3 {
                    [kx.abs(), ky.abs(), kz.abs()]
                } else {
                    [kx.abs(), kz.abs(), 0]
                };
                abs.sort_unstable_by(|a, b| b.cmp(a));
                let w = lookup[&abs];
                if !(w.is_finite() && w > T::zero()) {
                    return Err(KernelError::BadWeight([kx, ky, kz]));
                }
                let mut idx = (kx + kk) as usize;
                if n == 3 {
                    idx += side * (ky + kk) as usize;
                    idx += side * side * (kz + kk) as usize;
                } else {
                    idx += side * (kz + kk) as usize;
                }
                weights[idx] = w;
            }
        }
    }

    // tails per level; vertical mirror symmetry holds exactly by sharing
    let nz = problem.grid.nz;
    let l = (T::of(extent as f64) + T::of(0.5)) * h;
    let m = problem.m;
    let half = nz.div_ceil(2);
    let lower: Vec<(T, T)> = (0..half)
        .into_par_iter()
        .map(|iz| {
            let z_c = problem.grid.level_center(iz as i64);
            level_tails(n, s, m, h, l, z_c, tail_opts)
        })
        .collect();
    let mut tails = vec![(T::zero(), T::zero()); nz];
    for (iz, &pair) in lower.iter().enumerate() {
        tails[iz] = pair;
        tails[nz - 1 - iz] = pair;
    }

    Ok(KernelTable {
        n,
        s,
        h,
        m,
        half_height: problem.grid.half_height,
        extent,
        nz,
        weights,
        tails,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_problem;

    #[test]
    fn tail_scaling_identity() {
        for &s in &[0.1f64, 0.5, 0.9] {
            for &a in &[0.1, 1.0, 10.0] {
                for n in [2, 3] {
                    let t1 = halfspace_tail(a, n, s).unwrap();
                    let t2 = halfspace_tail(2.0 * a, n, s).unwrap();
                    let expect = 2f64.powf(-s);
                    assert!(
                        (t2 / t1 - expect).abs() < 1e-14,
                        "n={n} s={s} a={a}: {} vs {expect}",
                        t2 / t1
                    );
                }
            }
        }
    }

    #[test]
    fn tail_rejects_nonpositive() {
        assert!(halfspace_tail(0.0f64, 2, 0.5).is_err());
        assert!(halfspace_tail(-1.0f64, 2, 0.5).is_err());
    }

    #[test]
    fn tail_dominates_shifted_ball() {
        // T(2M) >= |B_M| (4M)^{-(n+s)} since B_M(3M e_n) sits in {z_n > 2M}
        // within distance 4M of the origin.
        for n in [2usize, 3] {
            for &s in &[0.3f64, 0.7] {
                for &m in &[0.5f64, 2.0, 16.0] {
                    let t = halfspace_tail(2.0 * m, n, s).unwrap();
                    let ball = crate::quad::unit_ball_volume::<f64>(n) * m.powi(n as i32);
                    let bound = ball * (4.0 * m).powf(-(n as f64 + s));
                    assert!(t >= bound, "n={n} s={s} m={m}: {t} < {bound}");
                }
            }
        }
    }

    #[test]
    fn offset_weight_rejects_zero() {
        assert!(offset_weight([0, 0, 0], 2, 1.0f64, 0.5, 12).is_err());
    }

    #[test]
    fn table_symmetries_exact() {
        let p = make_problem(2, 0.5f64, 1.0, 0.25, 1.0, true, 1.0).unwrap();
        let t = build_kernel_table(&p).unwrap();
        assert_eq!(t.weight([1, 0, 0]), t.weight([0, 0, -1]));
        assert_eq!(t.weight([2, 0, 1]), t.weight([-1, 0, 2]));
        assert_eq!(t.weight([3, 0, -2]), t.weight([2, 0, 3]));
    }

    #[test]
    fn table_monotone_decay() {
        let p = make_problem(2, 0.5f64, 1.0, 0.25, 1.0, true, 1.5).unwrap();
        let t = build_kernel_table(&p).unwrap();
        let kk = t.extent as i64;
        let norm = |k: [i64; 3]| ((k[0] * k[0] + k[2] * k[2]) as f64).sqrt();
        for kx1 in -kk..=kk {
            for kz1 in -kk..=kk {
                if kx1 == 0 && kz1 == 0 {
                    continue;
                }
                for (kx2, kz2) in [(1i64, 0i64), (1, 1), (2, 1)] {
                    let k1 = [kx1, 0, kz1];
                    let k2 = [kx2, 0, kz2];
                    if norm(k1) >= norm(k2) + 2f64.sqrt() {
                        assert!(
                            t.weight(k1) <= t.weight(k2),
                            "{k1:?} vs {k2:?}: {} > {}",
                            t.weight(k1),
                            t.weight(k2)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn rebuild_is_bit_identical() {
        let p = make_problem(2, 0.5f64, 0.5, 0.25, 1.0, true, 1.0).unwrap();
        let a = build_kernel_table(&p).unwrap();
        let b = build_kernel_table(&p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tails_mirror_symmetric_exactly() {
        let p = make_problem(2, 0.5f64, 1.0, 0.25, 1.0, true, 1.0).unwrap();
        let t = build_kernel_table(&p).unwrap();
        for iz in 0..t.nz {
            assert_eq!(t.tails_at_level(iz), t.tails_at_level(t.nz - 1 - iz));
        }
    }

    #[test]
    fn tail_partition_independent_of_datum() {
        // tail_in + tail_out must not depend on the slab half-width
        let opts = TailQuadOpts::default();
        let (i1, o1) = level_tails(2, 0.5f64, 0.7, 0.25, 1.125, 0.3, &opts);
        let (i2, o2) = level_tails(2, 0.5f64, 2.3, 0.25, 1.125, 0.3, &opts);
        let s1 = i1 + o1;
        let s2 = i2 + o2;
        assert!((s1 - s2).abs() <= 1e-12 * s1, "{s1} vs {s2}");
    }

    #[test]
    fn far_datum_tail_matches_two_halfspaces() {
        // cell at the origin with M far beyond the truncation cube:
        // tail_out -> cell mass against both half-spaces {|y_n| > M}
        let n = 2;
        let s = 0.5f64;
        let h = 0.25;
        let l = 1.125;
        let m = 50.0;
        let (tin, tout) = level_tails(n, s, m, h, l, 0.0, &TailQuadOpts::default());
        let tf = TailFormula::new(n, s).unwrap();
        // reference: 1-d integral over the cell of T(M - x) + T(M + x)
        let reference = crate::quad::gauss_1d(-h / 2.0, h / 2.0, 16, |x| {
            tf.eval(m - x) + tf.eval(m + x)
        }) * h;
        assert!(
            (tout - reference).abs() <= 1e-9 * reference,
            "{tout} vs {reference}"
        );
        assert!(tin > 0.0);
    }
}
