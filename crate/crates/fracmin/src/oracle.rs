//! Independent numerical oracles.
//!
//! These deliberately avoid the evaluation paths used by the production code:
//! tails are checked by adaptive 1-d quadrature of the angular integrand,
//! near-field pair weights by an adaptive quadtree with certified corner
//! bounds, and the per-cell mass budget by a dense exit-radius integral.
//! Tests and the `verify` command compare the two routes.

use crate::kernel;
use crate::quad::gauss_legendre;

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(f, a, fa, m, fm, flm);
        let right = simpson(f, m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, fa, m, fm, flm, left, tol / 2.0, depth - 1)
                + rec(f, m, fm, b, fb, frm, right, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(f, a, fa, b, fb, fm);
    rec(f, a, fa, b, fb, fm, whole, tol, 48)
}

/// Half-space tail by angular quadrature: in polar coordinates the radial
/// part is exact and `T(a) = (a^{-s}/s) * A(n, s)` with an angular factor
/// integrated adaptively.
pub fn halfspace_tail_oracle(a: f64, n: usize, s: f64) -> f64 {
    assert!(a > 0.0 && (n == 2 || n == 3));
    match n {
        2 => {
            // directions with sin(theta) > 0 reach {z_2 > a}
            let ang = adaptive_simpson(&|t: f64| t.sin().powf(s), 0.0, std::f64::consts::PI, 1e-12);
            a.powf(-s) / s * ang
        }
        _ => {
            // polar angle from the vertical axis
            let ang = adaptive_simpson(
                &|t: f64| t.cos().powf(s) * t.sin(),
                0.0,
                std::f64::consts::FRAC_PI_2,
                1e-12,
            );
            2.0 * std::f64::consts::PI * a.powf(-s) / s * ang
        }
    }
}

/// Pair weight between unit cells at offset `k` in dimension 2 by adaptive
/// quadtree subdivision of the difference-variable integrand, with certified
/// bounds dropping the singular corner.
pub fn weight_unit_oracle_2d(k: [i64; 2], s: f64, tol: f64) -> f64 {
    assert!(k != [0, 0]);
    let mut total = 0.0;
    // split at the kinks of the overlap factor
    for cx in 0..2 {
        for cz in 0..2 {
            let (lo0, hi0, a0, b0) = axis_piece(k[0], cx);
            let (lo1, hi1, a1, b1) = axis_piece(k[1], cz);
            total += quadtree(
                [lo0, lo1],
                [hi0, hi1],
                [a0, a1],
                [b0, b1],
                s,
                tol / 4.0,
                60,
            );
        }
    }
    total
}

fn axis_piece(k: i64, choice: usize) -> (f64, f64, f64, f64) {
    let kf = k as f64;
    if choice == 0 {
        // z <= k: V = 1 - (k - z)
        (kf - 1.0, kf, 1.0 - kf, 1.0)
    } else {
        (kf, kf + 1.0, 1.0 + kf, -1.0)
    }
}

fn quadtree(lo: [f64; 2], hi: [f64; 2], a: [f64; 2], b: [f64; 2], s: f64, tol: f64, depth: usize) -> f64 {
    let corner = lo.iter().zip(hi.iter()).all(|(&l, &h)| l <= 0.0 && h >= 0.0);
    if corner {
        // certified bound: V <= prod of per-axis maxima, with vanishing
        // factors bounded by the coordinate itself
        let mut coef = 1.0;
        let mut vanish = 0;
        let mut eps: f64 = 0.0;
        for j in 0..2 {
            let at_lo = (a[j] + b[j] * lo[j]).abs();
            let at_hi = (a[j] + b[j] * hi[j]).abs();
            let fmax = at_lo.max(at_hi);
            let extent = hi[j].max(-lo[j]);
            eps = eps.max(extent);
            if a[j] == 0.0 {
                vanish += 1;
            } else {
                coef *= fmax;
            }
        }
        assert!(vanish >= 1, "overlap must vanish at the origin");
        let v = vanish as f64;
        let bound =
            coef * std::f64::consts::FRAC_PI_2 * eps.powf(v - s) * 2f64.sqrt().powf(v) / (v - s);
        if bound <= tol || depth == 0 {
            return 0.0;
        }
        return split4(lo, hi, a, b, s, tol, depth);
    }

    let coarse = tensor_gauss(lo, hi, a, b, s, 4);
    let fine = tensor_gauss(lo, hi, a, b, s, 8);
    if (fine - coarse).abs() <= tol || depth == 0 {
        fine
    } else {
        split4(lo, hi, a, b, s, tol, depth)
    }
}

fn split4(lo: [f64; 2], hi: [f64; 2], a: [f64; 2], b: [f64; 2], s: f64, tol: f64, depth: usize) -> f64 {
    let mid = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let mut acc = 0.0;
    for q in 0..4 {
        let l = [
            if q & 1 == 0 { lo[0] } else { mid[0] },
            if q & 2 == 0 { lo[1] } else { mid[1] },
        ];
        let h = [
            if q & 1 == 0 { mid[0] } else { hi[0] },
            if q & 2 == 0 { mid[1] } else { hi[1] },
        ];
        acc += quadtree(l, h, a, b, s, tol / 4.0, depth - 1);
    }
    acc
}

fn tensor_gauss(lo: [f64; 2], hi: [f64; 2], a: [f64; 2], b: [f64; 2], s: f64, order: usize) -> f64 {
    let rule = gauss_legendre(order);
    let mut acc = 0.0;
    for (&x0, &w0) in rule.0.iter().zip(rule.1.iter()) {
        let z0 = 0.5 * (lo[0] + hi[0]) + 0.5 * (hi[0] - lo[0]) * x0;
        for (&x1, &w1) in rule.0.iter().zip(rule.1.iter()) {
            let z1 = 0.5 * (lo[1] + hi[1]) + 0.5 * (hi[1] - lo[1]) * x1;
            let v = (a[0] + b[0] * z0) * (a[1] + b[1] * z1);
            let r2 = z0 * z0 + z1 * z1;
            acc += 0.25 * (hi[0] - lo[0]) * (hi[1] - lo[1]) * w0 * w1 * v * r2.powf(-(2.0 + s) / 2.0);
        }
    }
    acc
}

/// Total kernel mass from one cell of side `h` to everything outside itself,
/// by a dense exit-radius integral (the radial part is exact per ray).
pub fn cell_total_mass_oracle(n: usize, s: f64, h: f64) -> f64 {
    let half = h / 2.0;
    let exit = |xi: &[f64], w: &[f64]| -> f64 {
        let mut r = f64::INFINITY;
        for j in 0..n {
            if w[j] != 0.0 {
                let target = if w[j] > 0.0 { half } else { -half };
                r = r.min((target - xi[j]) / w[j]);
            }
        }
        r
    };
    let cell_rule = gauss_legendre(8);
    let mut total = 0.0;
    if n == 2 {
        let angles = 4096;
        for (&x0, &w0) in cell_rule.0.iter().zip(cell_rule.1.iter()) {
            for (&x1, &w1) in cell_rule.0.iter().zip(cell_rule.1.iter()) {
                let xi = [half * x0, half * x1];
                let wq = half * w0 * half * w1;
                let mut ang = 0.0;
                for i in 0..angles {
                    let theta = (i as f64 + 0.5) / angles as f64 * std::f64::consts::TAU;
                    let w = [theta.cos(), theta.sin()];
                    ang += exit(&xi, &w).powf(-s);
                }
                ang *= std::f64::consts::TAU / angles as f64;
                total += wq * ang / s;
            }
        }
    } else {
        let nt = 96;
        let np = 192;
        let cell_rule = gauss_legendre(6);
        for (&x0, &w0) in cell_rule.0.iter().zip(cell_rule.1.iter()) {
            for (&x1, &w1) in cell_rule.0.iter().zip(cell_rule.1.iter()) {
                for (&x2, &w2) in cell_rule.0.iter().zip(cell_rule.1.iter()) {
                    let xi = [half * x0, half * x1, half * x2];
                    let wq = half * w0 * half * w1 * half * w2;
                    let mut ang = 0.0;
                    for it in 0..nt {
                        let t = -1.0 + (it as f64 + 0.5) * 2.0 / nt as f64;
                        let rho = (1.0 - t * t).max(0.0).sqrt();
                        for ip in 0..np {
                            let phi = (ip as f64 + 0.5) / np as f64 * std::f64::consts::TAU;
                            let w = [rho * phi.cos(), rho * phi.sin(), t];
                            ang += exit(&xi, &w).powf(-s);
                        }
                    }
                    ang *= 2.0 / nt as f64 * std::f64::consts::TAU / np as f64;
                    total += wq * ang / s;
                }
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_problem;
    use crate::kernel::{build_kernel_table, halfspace_tail, weight_unit, DEFAULT_WEIGHT_ORDER};

    #[test]
    fn tail_closed_form_matches_oracle() {
        for n in [2usize, 3] {
            for &s in &[0.1f64, 0.5, 0.9] {
                for &a in &[0.1f64, 1.0, 10.0] {
                    let exact = halfspace_tail(a, n, s).unwrap();
                    let oracle = halfspace_tail_oracle(a, n, s);
                    let rel = (exact - oracle).abs() / oracle;
                    assert!(rel < 1e-8, "n={n} s={s} a={a}: rel = {rel:.2e}");
                }
            }
        }
    }

    #[test]
    fn adjacent_weight_matches_adaptive_oracle() {
        // face-adjacent unit cells, the singular case
        let w = weight_unit([1, 0, 0], 2, 0.5f64, DEFAULT_WEIGHT_ORDER);
        let oracle = weight_unit_oracle_2d([1, 0], 0.5, 1e-10);
        let rel = (w - oracle).abs() / oracle;
        assert!(rel < 1e-6, "w = {w}, oracle = {oracle}, rel = {rel:.2e}");
    }

    #[test]
    fn corner_weight_matches_adaptive_oracle() {
        let w = weight_unit([1, 1, 0], 2, 0.5f64, DEFAULT_WEIGHT_ORDER);
        let oracle = weight_unit_oracle_2d([1, 1], 0.5, 1e-10);
        let rel = (w - oracle).abs() / oracle;
        assert!(rel < 1e-6, "w = {w}, oracle = {oracle}, rel = {rel:.2e}");
    }

    #[test]
    fn near_weight_matches_oracle_other_exponents() {
        for &s in &[0.2f64, 0.8] {
            for k in [[1i64, 0], [2, 1], [3, 2]] {
                let w = weight_unit([k[0], k[1], 0], 2, s, DEFAULT_WEIGHT_ORDER);
                let oracle = weight_unit_oracle_2d(k, s, 1e-10);
                let rel = (w - oracle).abs() / oracle;
                assert!(rel < 1e-6, "k={k:?} s={s}: rel = {rel:.2e}");
            }
        }
    }

    #[test]
    fn sum_rule_2d() {
        // table weights + tails account for the full mass budget of a cell
        let p = make_problem(2, 0.5f64, 1.0, 0.25, 1.0, true, 1.0).unwrap();
        let t = build_kernel_table(&p).unwrap();
        let mid = p.grid.nz / 2;
        let (tin, tout) = t.tails_at_level(mid);
        let lhs = t.weight_sum_around() + tin + tout;
        let rhs = cell_total_mass_oracle(2, 0.5, 0.25);
        let rel = (lhs - rhs).abs() / rhs;
        assert!(rel < 1e-4, "lhs = {lhs}, rhs = {rhs}, rel = {rel:.2e}");
    }

    #[test]
    fn sum_rule_3d() {
        let p = make_problem(3, 0.4f64, 0.5, 0.25, 1.0, true, 0.75).unwrap();
        let t = build_kernel_table(&p).unwrap();
        let (tin, tout) = t.tails_at_level(p.grid.nz / 2);
        let lhs = t.weight_sum_around() + tin + tout;
        let rhs = cell_total_mass_oracle(3, 0.4, 0.25);
        let rel = (lhs - rhs).abs() / rhs;
        assert!(rel < 1e-3, "lhs = {lhs}, rhs = {rhs}, rel = {rel:.2e}");
    }

    #[test]
    fn datum_tail_example_matches_direct_quadrature() {
        // M far beyond the truncation cube: tail_out equals the cell mass
        // against both half-spaces, checked by adaptive 1-d quadrature
        let (h, l, m, s) = (0.25f64, 1.125, 40.0, 0.5);
        let (_, tout) = kernel::level_tails(2, s, m, h, l, 0.0, &kernel::TailQuadOpts::default());
        let tf = kernel::TailFormula::new(2, s).unwrap();
        let reference = h * adaptive_simpson(
            &|x: f64| tf.eval(m - x) + tf.eval(m + x),
            -h / 2.0,
            h / 2.0,
            1e-12,
        );
        let rel = (tout - reference).abs() / reference;
        assert!(rel < 1e-5, "tout = {tout}, ref = {reference}, rel = {rel:.2e}");
    }
}
