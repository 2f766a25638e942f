//! Shared quadrature and special-function primitives.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::scalar::Scalar;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
///
/// Computed once per order by Newton iteration on the Legendre recurrence and
/// cached process-wide.
pub fn gauss_legendre(order: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("gauss cache poisoned");
    map.entry(order)
        .or_insert_with(|| Arc::new(compute_gauss_legendre(order)))
        .clone()
}

fn compute_gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be positive");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Chebyshev initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative via recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Integrate `f` over `[a, b]` with a fixed-order Gauss–Legendre rule.
pub fn gauss_1d<T: Scalar>(a: T, b: T, order: usize, mut f: impl FnMut(T) -> T) -> T {
    let rule = gauss_legendre(order);
    let half = (b - a) / T::of(2.0);
    let mid = (a + b) / T::of(2.0);
    let mut acc = T::zero();
    for (&x, &w) in rule.0.iter().zip(rule.1.iter()) {
        acc = acc + T::of(w) * f(mid + half * T::of(x));
    }
    acc * half
}

/// Composite Gauss rule: `panels` equal sub-intervals of `[a, b]`.
pub fn gauss_1d_composite<T: Scalar>(
    a: T,
    b: T,
    order: usize,
    panels: usize,
    mut f: impl FnMut(T) -> T,
) -> T {
    let width = (b - a) / T::of(panels as f64);
    let mut acc = T::zero();
    for p in 0..panels {
        let lo = a + width * T::of(p as f64);
        acc = acc + gauss_1d(lo, lo + width, order, &mut f);
    }
    acc
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function by the Lanczos approximation (relative error ~1e-13 in f64).
pub fn gamma<T: Scalar>(x: T) -> T {
    let xf = x.f64();
    T::of(gamma_f64(xf))
}

fn gamma_f64(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma_f64(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = LANCZOS_COEF[0];
        let t = x + LANCZOS_G + 0.5;
        for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume<T: Scalar>(n: usize) -> T {
    let nf = n as f64;
    T::of(std::f64::consts::PI.powf(nf / 2.0) / gamma_f64(nf / 2.0 + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_exact_on_polynomials() {
        // order q integrates degree 2q-1 exactly
        let v = gauss_1d(0.0f64, 1.0, 4, |x| x.powi(7));
        assert!((v - 0.125).abs() < 1e-14, "got {v}");
    }

    #[test]
    fn gauss_composite_smooth() {
        let v = gauss_1d_composite(0.0f64, std::f64::consts::PI, 8, 4, |x| x.sin());
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_known_values() {
        assert!((gamma(0.5f64) - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert!((gamma(5.0f64) - 24.0).abs() < 1e-10);
        // Γ(x+1) = xΓ(x)
        let x = 0.73f64;
        assert!((gamma(x + 1.0) - x * gamma(x)).abs() < 1e-12);
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume::<f64>(2) - std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_ball_volume::<f64>(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
    }
}
