//! Adaptive quadrature and smooth-step helpers shared by the energy,
//! transport, and spin-wave modules. The 1D rule is adaptive Simpson with the
//! usual 15x error heuristic; 2D integrals iterate it. Logarithmic endpoint
//! singularities are integrable and handled by depth-limited refinement.

use crate::geom::Point2;
use crate::real::Real;

/// Adaptive Simpson on `[a, b]` with absolute tolerance `tol`.
pub fn integrate<R: Real, F: Fn(R) -> R>(f: F, a: R, b: R, tol: R) -> R {
    if a == b {
        return R::zero();
    }
    let fa = f(a);
    let fb = f(b);
    let m = (a + b) * R::of(0.5);
    let fm = f(m);
    simpson_step(&f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 48)
}

fn simpson<R: Real>(a: R, b: R, fa: R, fm: R, fb: R) -> R {
    (b - a) / R::of(6.0) * (fa + R::of(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<R: Real, F: Fn(R) -> R>(
    f: &F,
    a: R,
    b: R,
    fa: R,
    fm: R,
    fb: R,
    whole: R,
    tol: R,
    depth: u32,
) -> R {
    let m = (a + b) * R::of(0.5);
    let lm = (a + m) * R::of(0.5);
    let rm = (m + b) * R::of(0.5);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= R::of(15.0) * tol {
        left + right + delta / R::of(15.0)
    } else {
        let half = tol * R::of(0.5);
        simpson_step(f, a, m, fa, flm, fm, left, half, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, half, depth - 1)
    }
}

/// `integral of f over the disk D(center, radius)` by polar iteration.
pub fn integrate_disk<R: Real, F: Fn(Point2<R>) -> R>(
    f: F,
    center: Point2<R>,
    radius: R,
    tol: R,
) -> R {
    let angular_tol = tol / R::TAU();
    integrate(
        |theta: R| {
            let dir = Point2::new(theta.cos(), theta.sin());
            integrate(
                |r: R| f(center + dir.scale(r)) * r,
                R::zero(),
                radius,
                angular_tol / radius.max(R::one()),
            )
        },
        R::zero(),
        R::TAU(),
        tol,
    )
}

/// `integral of f over the annulus r_in <= |x - center| <= r_out`.
pub fn integrate_annulus<R: Real, F: Fn(Point2<R>) -> R>(
    f: F,
    center: Point2<R>,
    r_in: R,
    r_out: R,
    tol: R,
) -> R {
    let angular_tol = tol / R::TAU();
    integrate(
        |theta: R| {
            let dir = Point2::new(theta.cos(), theta.sin());
            integrate(
                |r: R| f(center + dir.scale(r)) * r,
                r_in,
                r_out,
                angular_tol / (r_out - r_in).max(R::one()),
            )
        },
        R::zero(),
        R::TAU(),
        tol,
    )
}

/// `integral of f over the axis-aligned rectangle [x0, x1] x [y0, y1]`.
pub fn integrate_rect<R: Real, F: Fn(Point2<R>) -> R>(
    f: F,
    lower: Point2<R>,
    upper: Point2<R>,
    tol: R,
) -> R {
    let width = upper.x - lower.x;
    integrate(
        |y: R| integrate(|x: R| f(Point2::new(x, y)), lower.x, upper.x, tol / width.max(R::one())),
        lower.y,
        upper.y,
        tol,
    )
}

/// Adaptive Simpson seeded with `panels` equal subintervals. Use this for
/// integrands supported on a small unknown part of `[a, b]`, which plain
/// adaptive Simpson can miss entirely when its first nodes all hit zeros.
pub fn integrate_panels<R: Real, F: Fn(R) -> R>(f: F, a: R, b: R, panels: usize, tol: R) -> R {
    let n = panels.max(1);
    let width = (b - a) / R::of(n as f64);
    let per = tol / R::of(n as f64);
    let mut total = R::zero();
    for i in 0..n {
        let lo = a + width * R::of(i as f64);
        let hi = if i + 1 == n { b } else { a + width * R::of((i + 1) as f64) };
        total += integrate(&f, lo, hi, per);
    }
    total
}

/// Cubic smooth step: 0 for `u <= 0`, 1 for `u >= 1`, C1, maximal slope 3/2.
pub fn smoothstep3<R: Real>(u: R) -> R {
    if u <= R::zero() {
        R::zero()
    } else if u >= R::one() {
        R::one()
    } else {
        u * u * (R::of(3.0) - R::of(2.0) * u)
    }
}

/// Second derivative of [`smoothstep5`] (the step is C2).
pub fn smoothstep5_second_deriv<R: Real>(u: R) -> R {
    if u <= R::zero() || u >= R::one() {
        R::zero()
    } else {
        R::of(60.0) * u * (R::of(2.0) * u - R::one()) * (u - R::one())
    }
}

/// C2 quintic smooth step: 0 for `u <= 0`, 1 for `u >= 1`.
pub fn smoothstep5<R: Real>(u: R) -> R {
    if u <= R::zero() {
        R::zero()
    } else if u >= R::one() {
        R::one()
    } else {
        u * u * u * (R::of(10.0) + u * (R::of(-15.0) + u * R::of(6.0)))
    }
}

/// Derivative of [`smoothstep5`].
pub fn smoothstep5_deriv<R: Real>(u: R) -> R {
    if u <= R::zero() || u >= R::one() {
        R::zero()
    } else {
        let v = u * (R::one() - u);
        R::of(30.0) * v * v
    }
}

/// C-infinity step: 0 for `u <= 0`, 1 for `u >= 1`, all derivatives vanishing
/// at both endpoints.
pub fn smoothstep_inf<R: Real>(u: R) -> R {
    if u <= R::zero() {
        R::zero()
    } else if u >= R::one() {
        R::one()
    } else {
        let a = bump(u);
        let b = bump(R::one() - u);
        a / (a + b)
    }
}

/// Derivative of [`smoothstep_inf`].
pub fn smoothstep_inf_deriv<R: Real>(u: R) -> R {
    if u <= R::zero() || u >= R::one() {
        return R::zero();
    }
    let a = bump(u);
    let b = bump(R::one() - u);
    let da = bump_deriv(u);
    let db = -bump_deriv(R::one() - u);
    let s = a + b;
    (da * b - a * db) / (s * s)
}

#[inline]
fn bump<R: Real>(u: R) -> R {
    (-u.recip()).exp()
}

#[inline]
fn bump_deriv<R: Real>(u: R) -> R {
    bump(u) / (u * u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_exact() {
        let v = integrate(|x: f64| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12);
        // antiderivative x^4/4 - x^2 + x
        let exact = (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 1.0 - 1.0);
        assert!((v - exact).abs() < 1e-10);
    }

    #[test]
    fn simpson_log_singularity() {
        // integral of -ln x over (0, 1] = 1.
        let v = integrate(|x: f64| -x.max(1e-300).ln(), 0.0, 1.0, 1e-10);
        assert!((v - 1.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn disk_area_and_moment() {
        let area = integrate_disk(|_p| 1.0_f64, Point2::new(1.0, -2.0), 1.5, 1e-10);
        assert!((area - std::f64::consts::PI * 2.25).abs() < 1e-8);
        let m = integrate_disk(|p: Point2<f64>| p.x, Point2::new(1.0, -2.0), 1.5, 1e-10);
        assert!((m - std::f64::consts::PI * 2.25).abs() < 1e-8);
    }

    #[test]
    fn rect_matches_product() {
        let v = integrate_rect(
            |p: Point2<f64>| (p.x * p.y).exp(),
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            1e-10,
        );
        // Row integral: int_0^1 (e^y - 1)/y dy.
        let exact = integrate(|y: f64| if y == 0.0 { 1.0 } else { (y.exp() - 1.0) / y }, 0.0, 1.0, 1e-12);
        assert!((v - exact).abs() < 1e-8);
    }

    #[test]
    fn steps_are_monotone_with_matching_derivatives() {
        for f in [smoothstep5 as fn(f64) -> f64, smoothstep_inf] {
            assert_eq!(f(-0.5), 0.0);
            assert_eq!(f(1.5), 1.0);
            let mut prev = 0.0;
            for i in 0..=100 {
                let v = f(i as f64 / 100.0);
                assert!(v >= prev - 1e-14);
                prev = v;
            }
        }
        for (f, df) in [
            (smoothstep5 as fn(f64) -> f64, smoothstep5_deriv as fn(f64) -> f64),
            (smoothstep_inf, smoothstep_inf_deriv),
        ] {
            for i in 1..20 {
                let u = i as f64 / 20.0;
                let h = 1e-6;
                let fd = (f(u + h) - f(u - h)) / (2.0 * h);
                assert!((fd - df(u)).abs() < 1e-7, "u={u} fd={fd} an={}", df(u));
            }
        }
    }
}
