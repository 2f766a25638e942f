//! Cell-pair interaction weights for the kernel `|x - y|^{-(n+s)}`.
//!
//! The double integral over two unit cells reduces, in the difference
//! variable `z = x - y`, to an n-dimensional integral of
//! `V(z) |z|^{-(n+s)}` where `V` is the overlap volume, a product of triangle
//! functions centered at the offset. The domain splits at the kinks of `V`
//! into boxes on which `V` is a product of linear factors. Boxes with the
//! origin at a corner (touching cells) are integrated in polar/spherical
//! coordinates where the radial part is a closed form; the rest use tensor
//! Gauss rules. `V` vanishes at the origin for every nonzero offset, which
//! makes the radial closed form finite.

use crate::quad::{gauss_1d, gauss_legendre};
use crate::scalar::Scalar;

/// Base quadrature order for the weight integrals.
pub const DEFAULT_WEIGHT_ORDER: usize = 12;

/// Interaction weight between unit cells at integer offset `k` (cell size 1).
///
/// `order` controls the Gauss orders used away from the singular corner.
pub fn weight_unit<T: Scalar>(k: [i64; 3], n: usize, s: T, order: usize) -> T {
    debug_assert!(k[..n].iter().any(|&c| c != 0), "zero offset excluded");
    let mut total = T::zero();
    // 2^n boxes from splitting each axis interval [k_j - 1, k_j + 1] at k_j.
    let mut choice = vec![0u8; n];
    loop {
        total = total + box_integral(&choice, k, n, s, order);
        // advance the binary counter
        let mut axis = 0;
        loop {
            if axis == n {
                return total;
            }
            if choice[axis] == 0 {
                choice[axis] = 1;
                break;
            }
            choice[axis] = 0;
            axis += 1;
        }
    }
}

/// One smooth box: axis `j` spans `[k_j - 1, k_j]` (choice 0) or
/// `[k_j, k_j + 1]` (choice 1); on it `V_j(z) = a_j + b_j z_j`.
fn box_integral<T: Scalar>(choice: &[u8], k: [i64; 3], n: usize, s: T, order: usize) -> T {
    let mut lo = [T::zero(); 3];
    let mut hi = [T::zero(); 3];
    let mut lin_a = [T::zero(); 3];
    let mut lin_b = [T::zero(); 3];
    let mut corner = true;
    for j in 0..n {
        let kj = T::of(k[j] as f64);
        if choice[j] == 0 {
            lo[j] = kj - T::one();
            hi[j] = kj;
            // z <= k: V = 1 - (k - z)
            lin_a[j] = T::one() - kj;
            lin_b[j] = T::one();
        } else {
            lo[j] = kj;
            hi[j] = kj + T::one();
            // z >= k: V = 1 + k - z
            lin_a[j] = T::one() + kj;
            lin_b[j] = -T::one();
        }
        if !(lo[j] <= T::zero() && hi[j] >= T::zero()) {
            corner = false;
        }
    }
    if corner {
        corner_box(&lo, &hi, &lin_a, &lin_b, n, s, order)
    } else {
        gauss_box(&lo, &hi, &lin_a, &lin_b, n, s, order)
    }
}

/// Tensor Gauss on a box that keeps a positive distance from the origin.
fn gauss_box<T: Scalar>(
    lo: &[T; 3],
    hi: &[T; 3],
    lin_a: &[T; 3],
    lin_b: &[T; 3],
    n: usize,
    s: T,
    order: usize,
) -> T {
    // distance from the box to the origin picks the order
    let mut d2 = T::zero();
    for j in 0..n {
        let c = if T::zero() < lo[j] {
            lo[j]
        } else if T::zero() > hi[j] {
            hi[j]
        } else {
            T::zero()
        };
        d2 = d2 + c * c;
    }
    let dist = d2.sqrt().f64();
    let q = if dist >= 8.0 {
        order / 2
    } else if dist >= 3.0 {
        (order * 2) / 3
    } else {
        order + 2
    }
    .max(4);

    let rule = gauss_legendre(q);
    let expo = -(T::of(n as f64) + s) / T::of(2.0);
    let mut total = T::zero();
    let mut idx = vec![0usize; n];
    'outer: loop {
        let mut w = T::one();
        let mut z = [T::zero(); 3];
        for j in 0..n {
            let half = (hi[j] - lo[j]) / T::of(2.0);
            let mid = (hi[j] + lo[j]) / T::of(2.0);
            z[j] = mid + half * T::of(rule.0[idx[j]]);
            w = w * half * T::of(rule.1[idx[j]]);
        }
        let mut r2 = T::zero();
        let mut v = T::one();
        for j in 0..n {
            r2 = r2 + z[j] * z[j];
            v = v * (lin_a[j] + lin_b[j] * z[j]);
        }
        total = total + w * v * r2.powf(expo);
        for j in 0..n {
            idx[j] += 1;
            if idx[j] < q {
                continue 'outer;
            }
            idx[j] = 0;
        }
        break;
    }
    total
}

/// Box with the origin at one corner: polar/spherical integration with the
/// radial integral in closed form. `V(r w) = sum_d coef_d(w) r^d` has no
/// constant term, so each radial piece is `coef_d R^{d-s} / (d - s)`.
fn corner_box<T: Scalar>(
    lo: &[T; 3],
    hi: &[T; 3],
    lin_a: &[T; 3],
    lin_b: &[T; 3],
    n: usize,
    s: T,
    order: usize,
) -> T {
    // map to the positive orthant: zeta_j = d_j z_j in [0, c_j]
    let mut c = [T::zero(); 3];
    let mut p = [T::zero(); 3];
    let mut q = [T::zero(); 3];
    for j in 0..n {
        let flip = hi[j] <= T::zero();
        c[j] = hi[j] - lo[j];
        let d = if flip { -T::one() } else { T::one() };
        p[j] = lin_a[j];
        q[j] = lin_b[j] * d;
    }
    debug_assert!(
        p[..n].iter().any(|v| *v == T::zero()),
        "overlap volume must vanish at the origin for nonzero offsets"
    );

    let radial = |omega: &[T; 3]| -> T {
        // R(w) = min_j c_j / w_j over the active axes
        let mut r_exit = T::infinity();
        for j in 0..n {
            if omega[j] > T::zero() {
                let r = c[j] / omega[j];
                if r < r_exit {
                    r_exit = r;
                }
            }
        }
        // polynomial coefficients of V(r w) in r
        let mut coef = [T::zero(); 4];
        coef[0] = T::one();
        let mut deg = 0;
        for j in 0..n {
            let b = q[j] * omega[j];
            let mut next = [T::zero(); 4];
            for d in 0..=deg {
                next[d] = next[d] + coef[d] * p[j];
                next[d + 1] = next[d + 1] + coef[d] * b;
            }
            coef = next;
            deg += 1;
        }
        let mut acc = T::zero();
        let mut rpow = r_exit.powf(T::one() - s);
        for (d, &cd) in coef.iter().enumerate().take(n + 1).skip(1) {
            acc = acc + cd * rpow / (T::of(d as f64) - s);
            rpow = rpow * r_exit;
        }
        acc
    };

    let ang_order = (order * 2).max(16);
    if n == 2 {
        // split the quarter circle where the exit face switches
        let theta_star = T::of(c[1].f64().atan2(c[0].f64()));
        let half_pi = T::of(std::f64::consts::FRAC_PI_2);
        let mut total = T::zero();
        for (a, b) in [(T::zero(), theta_star), (theta_star, half_pi)] {
            total = total
                + gauss_1d(a, b, ang_order, |theta| {
                    let w = [theta.cos(), theta.sin(), T::zero()];
                    radial(&w)
                });
        }
        total
    } else {
        // Octant: azimuth split where the horizontal exit face switches; for
        // each azimuth the polar variable t = w_z splits in closed form where
        // the vertical face takes over from the horizontal ones.
        let phi_star = T::of(c[1].f64().atan2(c[0].f64()));
        let half_pi = T::of(std::f64::consts::FRAC_PI_2);
        let q_ang = (ang_order / 2).max(10);
        let mut total = T::zero();
        for (a, b) in [(T::zero(), phi_star), (phi_star, half_pi)] {
            total = total
                + gauss_1d(a, b, q_ang, |phi| {
                    let (cp, sp) = (phi.cos(), phi.sin());
                    // horizontal exit scale at unit horizontal radius
                    let mut a_h = T::infinity();
                    if cp > T::zero() {
                        a_h = a_h.min(c[0] / cp);
                    }
                    if sp > T::zero() {
                        a_h = a_h.min(c[1] / sp);
                    }
                    let t_star = c[2] / (c[2] * c[2] + a_h * a_h).sqrt();
                    let mut slice = T::zero();
                    for (t0, t1) in [(T::zero(), t_star), (t_star, T::one())] {
                        slice = slice
                            + gauss_1d(t0, t1, q_ang, |t| {
                                let rho = (T::one() - t * t).max(T::zero()).sqrt();
                                let w = [rho * cp, rho * sp, t];
                                radial(&w)
                            });
                    }
                    slice
                });
        }
        total
    }
}

/// Weight between grid cells of side `h` at offset `k`:
/// `w(k; h) = h^{n-s} w(k; 1)` exactly.
pub fn offset_weight<T: Scalar>(k: [i64; 3], n: usize, h: T, s: T, order: usize) -> T {
    h.powf(T::of(n as f64) - s) * weight_unit(k, n, s, order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_offset_close_to_midpoint_value() {
        // at distance 100 cells the midpoint rule is essentially exact
        let w = offset_weight([100, 0, 0], 2, 0.1f64, 0.5, DEFAULT_WEIGHT_ORDER);
        let midpoint = 0.1f64.powi(4) * 10.0f64.powf(-2.5);
        assert!(
            (w - midpoint).abs() / midpoint < 1e-2,
            "w = {w}, midpoint = {midpoint}"
        );
    }

    #[test]
    fn homogeneity_is_exact() {
        for k in [[1i64, 0, 0], [2, 1, 0], [5, 3, 0]] {
            let w1 = weight_unit(k, 2, 0.37f64, DEFAULT_WEIGHT_ORDER);
            let wh = offset_weight(k, 2, 0.125f64, 0.37, DEFAULT_WEIGHT_ORDER);
            let scale = 0.125f64.powf(2.0 - 0.37);
            assert_eq!(wh, scale * w1);
        }
    }

    #[test]
    fn symmetric_in_axis_exchange() {
        let a = weight_unit([3, 1, 0], 2, 0.5f64, DEFAULT_WEIGHT_ORDER);
        let b = weight_unit([1, 3, 0], 2, 0.5f64, DEFAULT_WEIGHT_ORDER);
        // not forced bitwise here (separate evaluations); must agree tightly
        assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
    }

    #[test]
    fn weights_positive_and_decaying() {
        let mut prev = f64::INFINITY;
        for d in 1..10i64 {
            let w = weight_unit([d, 0, 0], 2, 0.5f64, DEFAULT_WEIGHT_ORDER);
            assert!(w > 0.0 && w < prev, "d = {d}, w = {w}");
            prev = w;
        }
    }

    #[test]
    fn order_refinement_is_converged() {
        for k in [[1i64, 0, 0], [1, 1, 0], [2, 1, 0]] {
            let w12 = weight_unit(k, 2, 0.5f64, 12);
            let w20 = weight_unit(k, 2, 0.5f64, 20);
            assert!(
                (w12 - w20).abs() <= 1e-9 * w20,
                "offset {k:?}: {w12} vs {w20}"
            );
        }
        let w12 = weight_unit([1, 1, 1], 3, 0.5f64, 12);
        let w18 = weight_unit([1, 1, 1], 3, 0.5f64, 18);
        assert!((w12 - w18).abs() <= 1e-6 * w18, "{w12} vs {w18}");
    }
}
