//! Analytic set descriptions (CSG over a few primitives) with point
//! classification and exact ray-membership intervals.
//!
//! Convention: points on a primitive's boundary classify as inside. This
//! removes measure-zero ambiguity and keeps membership total; it is
//! irrelevant to any integral computed from these sets.

use crate::scalar::Scalar;

/// A point in up to three dimensions. Coordinates `0..n-1` are the horizontal
/// axes, coordinate `n-1` is the vertical axis; unused entries stay zero.
pub type Point<T> = [T; 3];

/// Smooth cutoff profile used by [`ShapeExpr::BumpSubgraph`]: a quintic
/// smoothstep equal to 1 on `t <= 1/2` and 0 on `t >= 3/4`, C^2 in between.
pub fn bump_profile<T: Scalar>(t: T) -> T {
    let lo = T::of(0.5);
    let hi = T::of(0.75);
    if t <= lo {
        T::one()
    } else if t >= hi {
        T::zero()
    } else {
        let u = (t - lo) / (hi - lo);
        let u3 = u * u * u;
        T::one() - (T::of(10.0) * u3 - T::of(15.0) * u3 * u + T::of(6.0) * u3 * u * u)
    }
}

/// Recursive CSG expression over analytic primitives.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeExpr<T: Scalar> {
    /// `x_axis >= threshold` (above) or `x_axis <= threshold` (below).
    HalfSpace {
        axis: usize,
        threshold: T,
        above: bool,
    },
    /// Closed ball.
    Ball { center: Point<T>, radius: T },
    /// `lo <= x_axis <= hi`.
    Slab { axis: usize, lo: T, hi: T },
    /// Distance from the coordinate axis `axis` at most `radius`.
    Cylinder { axis: usize, radius: T },
    /// `x_n <= eta * phi(|x'|)` with the fixed quintic profile.
    BumpSubgraph { eta: T },
    Union(Box<ShapeExpr<T>>, Box<ShapeExpr<T>>),
    Intersection(Box<ShapeExpr<T>>, Box<ShapeExpr<T>>),
    Complement(Box<ShapeExpr<T>>),
}

impl<T: Scalar> ShapeExpr<T> {
    /// The exterior datum: complement of the horizontal slab `|x_n| <= m`.
    pub fn slab_complement(m: T, n: usize) -> Self {
        ShapeExpr::Union(
            Box::new(ShapeExpr::HalfSpace {
                axis: n - 1,
                threshold: m,
                above: true,
            }),
            Box::new(ShapeExpr::HalfSpace {
                axis: n - 1,
                threshold: -m,
                above: false,
            }),
        )
    }

    /// Lower half-space `x_n <= 0`.
    pub fn lower_half_space(n: usize) -> Self {
        ShapeExpr::HalfSpace {
            axis: n - 1,
            threshold: T::zero(),
            above: false,
        }
    }

    pub fn union(a: Self, b: Self) -> Self {
        ShapeExpr::Union(Box::new(a), Box::new(b))
    }

    pub fn complement(a: Self) -> Self {
        ShapeExpr::Complement(Box::new(a))
    }
}

/// Returns 1 iff `p` lies inside the set described by `shape` (`n` is the
/// ambient dimension).
pub fn classify_point<T: Scalar>(shape: &ShapeExpr<T>, p: &Point<T>, n: usize) -> u8 {
    if contains(shape, p, n) {
        1
    } else {
        0
    }
}

pub(crate) fn contains<T: Scalar>(shape: &ShapeExpr<T>, p: &Point<T>, n: usize) -> bool {
    match shape {
        ShapeExpr::HalfSpace {
            axis,
            threshold,
            above,
        } => {
            if *above {
                p[*axis] >= *threshold
            } else {
                p[*axis] <= *threshold
            }
        }
        ShapeExpr::Ball { center, radius } => {
            let mut d2 = T::zero();
            for j in 0..n {
                let d = p[j] - center[j];
                d2 = d2 + d * d;
            }
            d2 <= *radius * *radius
        }
        ShapeExpr::Slab { axis, lo, hi } => p[*axis] >= *lo && p[*axis] <= *hi,
        ShapeExpr::Cylinder { axis, radius } => {
            let mut d2 = T::zero();
            for j in 0..n {
                if j != *axis {
                    d2 = d2 + p[j] * p[j];
                }
            }
            d2 <= *radius * *radius
        }
        ShapeExpr::BumpSubgraph { eta } => {
            let mut r2 = T::zero();
            for j in 0..n - 1 {
                r2 = r2 + p[j] * p[j];
            }
            p[n - 1] <= *eta * bump_profile(r2.sqrt())
        }
        ShapeExpr::Union(a, b) => contains(a, p, n) || contains(b, p, n),
        ShapeExpr::Intersection(a, b) => contains(a, p, n) && contains(b, p, n),
        ShapeExpr::Complement(a) => !contains(a, p, n),
    }
}

/// Disjoint sorted list of open radial intervals `(lo, hi)` with `hi` possibly
/// infinite, describing where a ray lies inside a set.
pub type RadialIntervals<T> = Vec<(T, T)>;

/// Membership intervals of the ray `origin + r * dir`, `r > 0`, inside
/// `shape`. Exact for the closed-form primitives; the bump graph uses dense
/// scanning plus bisection and may miss tangential double roots.
pub fn ray_intervals<T: Scalar>(
    shape: &ShapeExpr<T>,
    origin: &Point<T>,
    dir: &Point<T>,
    n: usize,
) -> RadialIntervals<T> {
    let inf = T::infinity();
    match shape {
        ShapeExpr::HalfSpace {
            axis,
            threshold,
            above,
        } => {
            let x = origin[*axis];
            let w = dir[*axis];
            let inside_now = if *above { x >= *threshold } else { x <= *threshold };
            if w == T::zero() {
                return if inside_now { vec![(T::zero(), inf)] } else { vec![] };
            }
            let r = (*threshold - x) / w;
            // moving toward inside iff dir points the "above" way for above-halfspaces
            let entering = (*above && w > T::zero()) || (!*above && w < T::zero());
            if entering {
                if r <= T::zero() {
                    vec![(T::zero(), inf)]
                } else {
                    vec![(r, inf)]
                }
            } else if r <= T::zero() {
                vec![]
            } else {
                vec![(T::zero(), r)]
            }
        }
        ShapeExpr::Slab { axis, lo, hi } => {
            let a = ray_intervals(
                &ShapeExpr::HalfSpace {
                    axis: *axis,
                    threshold: *lo,
                    above: true,
                },
                origin,
                dir,
                n,
            );
            let b = ray_intervals(
                &ShapeExpr::HalfSpace {
                    axis: *axis,
                    threshold: *hi,
                    above: false,
                },
                origin,
                dir,
                n,
            );
            intersect_intervals(&a, &b)
        }
        ShapeExpr::Ball { center, radius } => {
            let mut b = T::zero();
            let mut c0 = T::zero();
            let mut a2 = T::zero();
            for j in 0..n {
                let d = origin[j] - center[j];
                b = b + dir[j] * d;
                c0 = c0 + d * d;
                a2 = a2 + dir[j] * dir[j];
            }
            quadratic_inside(a2, b, c0 - *radius * *radius)
        }
        ShapeExpr::Cylinder { axis, radius } => {
            let mut b = T::zero();
            let mut c0 = T::zero();
            let mut a2 = T::zero();
            for j in 0..n {
                if j != *axis {
                    b = b + dir[j] * origin[j];
                    c0 = c0 + origin[j] * origin[j];
                    a2 = a2 + dir[j] * dir[j];
                }
            }
            if a2 == T::zero() {
                // ray parallel to the axis
                return if c0 <= *radius * *radius {
                    vec![(T::zero(), inf)]
                } else {
                    vec![]
                };
            }
            quadratic_inside(a2, b, c0 - *radius * *radius)
        }
        ShapeExpr::BumpSubgraph { eta } => bump_ray_intervals(*eta, origin, dir, n),
        ShapeExpr::Union(a, b) => union_intervals(
            &ray_intervals(a, origin, dir, n),
            &ray_intervals(b, origin, dir, n),
        ),
        ShapeExpr::Intersection(a, b) => intersect_intervals(
            &ray_intervals(a, origin, dir, n),
            &ray_intervals(b, origin, dir, n),
        ),
        ShapeExpr::Complement(a) => complement_intervals(&ray_intervals(a, origin, dir, n)),
    }
}

/// Solutions of `a r^2 + 2 b r + c <= 0` intersected with `r > 0`.
fn quadratic_inside<T: Scalar>(a: T, b: T, c: T) -> RadialIntervals<T> {
    let disc = b * b - a * c;
    if disc <= T::zero() {
        return vec![];
    }
    let sq = disc.sqrt();
    let r0 = (-b - sq) / a;
    let r1 = (-b + sq) / a;
    let lo = r0.max(T::zero());
    if r1 <= lo {
        vec![]
    } else {
        vec![(lo, r1)]
    }
}

fn bump_ray_intervals<T: Scalar>(
    eta: T,
    origin: &Point<T>,
    dir: &Point<T>,
    n: usize,
) -> RadialIntervals<T> {
    let g = |r: T| -> T {
        let mut r2 = T::zero();
        for j in 0..n - 1 {
            let x = origin[j] + r * dir[j];
            r2 = r2 + x * x;
        }
        origin[n - 1] + r * dir[n - 1] - eta * bump_profile(r2.sqrt())
    };
    // Sign changes are confined to {x_n(r) in [0, eta]}; beyond the profile's
    // support radius 3/4 membership reduces to the half-space x_n <= 0.
    let wn = dir[n - 1];
    let xn = origin[n - 1];
    let mut windows: Vec<(T, T)> = Vec::new();
    if wn != T::zero() {
        let r0 = (T::zero() - xn) / wn;
        let r1 = (eta - xn) / wn;
        let (lo, hi) = if r0 < r1 { (r0, r1) } else { (r1, r0) };
        let lo = lo.max(T::zero());
        if hi > lo {
            windows.push((lo, hi));
        }
    } else if xn >= T::zero() && xn <= eta {
        // Horizontal ray at bump height: crossings only where |x'| <= 3/4.
        let mut b = T::zero();
        let mut c0 = T::zero();
        let mut a2 = T::zero();
        for j in 0..n - 1 {
            b = b + dir[j] * origin[j];
            c0 = c0 + origin[j] * origin[j];
            a2 = a2 + dir[j] * dir[j];
        }
        let supp = T::of(0.75);
        if a2 > T::zero() {
            for iv in quadratic_inside(a2, b, c0 - supp * supp) {
                windows.push(iv);
            }
        }
    }

    let mut roots: Vec<T> = Vec::new();
    for (lo, hi) in windows {
        // widen slightly so transitions at the window edge are caught
        let margin = T::of(1e-6) * (T::one() + hi.abs());
        let lo = (lo - margin).max(T::zero());
        let hi = hi + margin;
        let samples = 256;
        let step = (hi - lo) / T::of(samples as f64);
        if !(step > T::zero()) {
            continue;
        }
        let mut prev_r = lo;
        let mut prev_g = g(prev_r);
        for k in 1..=samples {
            let r = if k == samples { hi } else { lo + step * T::of(k as f64) };
            let cur = g(r);
            if (prev_g <= T::zero()) != (cur <= T::zero()) {
                roots.push(bisect_root(&g, prev_r, r));
            }
            prev_r = r;
            prev_g = cur;
        }
    }
    roots.retain(|&r| r > T::of(1e-14));
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= T::of(1e-13) * (T::one() + b.abs()));

    // membership just after r = 0
    let eps = T::of(1e-12);
    let start_inside = g(eps) <= T::zero();
    let inf = T::infinity();
    let mut result = Vec::new();
    let mut inside = start_inside;
    let mut open = if inside { Some(T::zero()) } else { None };
    for r in roots {
        if inside {
            result.push((open.take().unwrap(), r));
        } else {
            open = Some(r);
        }
        inside = !inside;
    }
    if let Some(lo) = open {
        result.push((lo, inf));
    }
    result
}

fn bisect_root<T: Scalar>(g: &impl Fn(T) -> T, mut lo: T, mut hi: T) -> T {
    let glo = g(lo);
    for _ in 0..80 {
        let mid = (lo + hi) / T::of(2.0);
        if mid == lo || mid == hi {
            break;
        }
        let gm = g(mid);
        if (gm <= T::zero()) == (glo <= T::zero()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / T::of(2.0)
}

pub fn union_intervals<T: Scalar>(
    a: &RadialIntervals<T>,
    b: &RadialIntervals<T>,
) -> RadialIntervals<T> {
    let mut all: Vec<(T, T)> = a.iter().chain(b.iter()).cloned().collect();
    all.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut out: RadialIntervals<T> = Vec::with_capacity(all.len());
    for iv in all {
        match out.last_mut() {
            Some(last) if iv.0 <= last.1 => {
                if iv.1 > last.1 {
                    last.1 = iv.1;
                }
            }
            _ => out.push(iv),
        }
    }
    out
}

pub fn complement_intervals<T: Scalar>(a: &RadialIntervals<T>) -> RadialIntervals<T> {
    let inf = T::infinity();
    let mut out = Vec::with_capacity(a.len() + 1);
    let mut cursor = T::zero();
    for &(lo, hi) in a {
        if lo > cursor {
            out.push((cursor, lo));
        }
        cursor = hi;
    }
    if cursor < inf {
        out.push((cursor, inf));
    }
    out
}

pub fn intersect_intervals<T: Scalar>(
    a: &RadialIntervals<T>,
    b: &RadialIntervals<T>,
) -> RadialIntervals<T> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let lo = if a[i].0 > b[j].0 { a[i].0 } else { b[j].0 };
        let hi = if a[i].1 < b[j].1 { a[i].1 } else { b[j].1 };
        if lo < hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> Point<f64> {
        [x, y, 0.0]
    }

    #[test]
    fn slab_complement_membership() {
        let e0 = ShapeExpr::slab_complement(1.0f64, 2);
        assert_eq!(classify_point(&e0, &pt(0.0, 1.5), 2), 1);
        assert_eq!(classify_point(&e0, &pt(0.5, 0.0), 2), 0);
        // boundary resolves inside
        assert_eq!(classify_point(&e0, &pt(0.3, 1.0), 2), 1);
    }

    #[test]
    fn bump_membership() {
        let f = ShapeExpr::BumpSubgraph { eta: 0.1f64 };
        // phi(0) = 1, so 0.05 < 0.1 is inside
        assert_eq!(classify_point(&f, &pt(0.0, 0.05), 2), 1);
        assert_eq!(classify_point(&f, &pt(0.0, 0.15), 2), 0);
        // outside the support the graph is x_n <= 0
        assert_eq!(classify_point(&f, &pt(0.9, 0.01), 2), 0);
        assert_eq!(classify_point(&f, &pt(0.9, -0.01), 2), 1);
    }

    #[test]
    fn profile_shape() {
        assert_eq!(bump_profile(0.4f64), 1.0);
        assert_eq!(bump_profile(0.8f64), 0.0);
        let mid = bump_profile(0.625f64);
        assert!((mid - 0.5).abs() < 1e-12, "smoothstep midpoint {mid}");
    }

    #[test]
    fn double_complement_is_identity() {
        let e0 = ShapeExpr::slab_complement(0.7f64, 2);
        let cc = ShapeExpr::complement(ShapeExpr::complement(e0.clone()));
        for &(x, y) in &[(0.0, 0.0), (0.0, 2.0), (0.5, -0.71), (0.2, 0.7)] {
            assert_eq!(
                classify_point(&e0, &pt(x, y), 2),
                classify_point(&cc, &pt(x, y), 2)
            );
        }
    }

    #[test]
    fn ball_ray_intervals() {
        let ball = ShapeExpr::Ball {
            center: pt(0.0, 0.0),
            radius: 1.0f64,
        };
        // from outside through the center
        let ivs = ray_intervals(&ball, &pt(-2.0, 0.0), &pt(1.0, 0.0), 2);
        assert_eq!(ivs.len(), 1);
        assert!((ivs[0].0 - 1.0).abs() < 1e-12 && (ivs[0].1 - 3.0).abs() < 1e-12);
        // from the boundary outward: empty or zero-length
        let ivs = ray_intervals(&ball, &pt(1.0, 0.0), &pt(1.0, 0.0), 2);
        assert!(ivs.is_empty());
    }

    #[test]
    fn slab_complement_ray_updown() {
        let e0 = ShapeExpr::slab_complement(1.0f64, 2);
        // straight up from the origin: inside E0 after r = 1
        let ivs = ray_intervals(&e0, &pt(0.0, 0.0), &pt(0.0, 1.0), 2);
        assert_eq!(ivs.len(), 1);
        assert!((ivs[0].0 - 1.0).abs() < 1e-12);
        assert!(ivs[0].1.is_infinite());
        // horizontal ray inside the slab: never inside
        let ivs = ray_intervals(&e0, &pt(0.0, 0.0), &pt(1.0, 0.0), 2);
        assert!(ivs.is_empty());
    }

    #[test]
    fn interval_algebra() {
        let a = vec![(0.0f64, 1.0), (2.0, 3.0)];
        let b = vec![(0.5f64, 2.5)];
        let u = union_intervals(&a, &b);
        assert_eq!(u, vec![(0.0, 3.0)]);
        let i = intersect_intervals(&a, &b);
        assert_eq!(i, vec![(0.5, 1.0), (2.0, 2.5)]);
        let c = complement_intervals(&a);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0], (1.0, 2.0));
        assert!((c[1].0 - 3.0).abs() < 1e-15 && c[1].1.is_infinite());
    }

    #[test]
    fn bump_ray_vertical() {
        let f = ShapeExpr::BumpSubgraph { eta: 0.1f64 };
        // straight down from above the bump center: enter at x_n = 0.1
        let ivs = ray_intervals(&f, &pt(0.0, 1.0), &pt(0.0, -1.0), 2);
        assert_eq!(ivs.len(), 1);
        assert!((ivs[0].0 - 0.9).abs() < 1e-9, "{:?}", ivs);
        assert!(ivs[0].1.is_infinite());
    }
}
