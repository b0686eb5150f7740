//! Localized translations: a divergence-free vector field equal to a fixed
//! unit vector near the origin with O(eps) H^1 norm, the flow it generates
//! (which translates a disk while fixing the far field), the decomposition of
//! that flow into first-order and remainder parts, the averaging error of the
//! energy under opposite translations, and the anisotropy functionals.

use thiserror::Error;

use crate::energy::{interaction_energy, BackgroundMeasure, EnergyError, PointConfiguration};
use crate::geom::{DomainRegion, Point2};
use crate::quad::{integrate_panels, smoothstep_inf, smoothstep_inf_deriv};
use crate::real::Real;

#[derive(Debug, Error)]
pub enum SpinWaveError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

pub type SpinWaveResult<T> = Result<T, SpinWaveError>;

/// Parameters of the construction. The inner collar has width
/// `mollify_scale_inner` around radius 1 and the outer collar width
/// `mollify_scale_outer` around radius `e^(1/eps)`.
#[derive(Clone, Copy, Debug)]
pub struct SpinWaveParams<R: Real> {
    pub epsilon: R,
    pub ell: R,
    pub mollify_scale_inner: R,
    pub mollify_scale_outer: R,
}

/// Result of the parameter-window consistency check
/// `log l <= 1/eps` and `1/eps <= l^2 <= eps^-3`.
#[derive(Clone, Copy, Debug)]
pub struct ConsistencyReport<R: Real> {
    pub log_ell: R,
    pub inv_epsilon: R,
    pub ell_sq: R,
    pub inv_epsilon_cubed: R,
    pub ok: bool,
}

impl<R: Real> SpinWaveParams<R> {
    pub fn new(epsilon: R, ell: R) -> SpinWaveResult<Self> {
        if !(epsilon > R::zero() && epsilon < R::one()) {
            return Err(SpinWaveError::InvalidParameter(format!(
                "epsilon {epsilon} must lie in (0, 1)"
            )));
        }
        if !(ell > R::zero()) {
            return Err(SpinWaveError::InvalidParameter("ell must be > 0".into()));
        }
        let outer = epsilon.recip().exp() * R::of(0.5);
        Ok(SpinWaveParams {
            epsilon,
            ell,
            mollify_scale_inner: R::of(0.5),
            mollify_scale_outer: outer,
        })
    }

    /// `e^(1/eps)`, the outer scale of the construction.
    pub fn outer_radius(&self) -> R {
        self.epsilon.recip().exp()
    }

    /// Radius beyond which the rescaled field vanishes.
    pub fn support_radius(&self) -> R {
        self.ell * (self.outer_radius() + self.mollify_scale_outer)
    }

    pub fn consistency(&self) -> ConsistencyReport<R> {
        let log_ell = self.ell.ln();
        let inv_eps = self.epsilon.recip();
        let ell_sq = self.ell * self.ell;
        let inv_eps3 = inv_eps * inv_eps * inv_eps;
        ConsistencyReport {
            log_ell,
            inv_epsilon: inv_eps,
            ell_sq,
            inv_epsilon_cubed: inv_eps3,
            ok: log_ell <= inv_eps && inv_eps <= ell_sq && ell_sq <= inv_eps3,
        }
    }

    /// Radial profile `g_bar` of the mollified stream function
    /// `f_bar(x) = x_1 g_bar(|x|)` and its derivative: a C-infinity blend of
    /// `1 -> 1 - eps log r -> 0` across the two collars.
    fn profile(&self, rho: R) -> (R, R) {
        let eps = self.epsilon;
        let e_out = self.outer_radius();
        let a = self.mollify_scale_inner;
        let b = self.mollify_scale_outer;
        // Inner blend across [1 - a, 1 + a].
        let u1 = (rho - (R::one() - a)) / (R::of(2.0) * a);
        let w1 = smoothstep_inf(u1);
        let dw1 = smoothstep_inf_deriv(u1) / (R::of(2.0) * a);
        // Outer blend across [e^(1/eps) - b, e^(1/eps) + b].
        let u2 = (rho - (e_out - b)) / (R::of(2.0) * b);
        let w2 = smoothstep_inf(u2);
        let dw2 = smoothstep_inf_deriv(u2) / (R::of(2.0) * b);

        let logr = if rho > R::zero() { rho.ln() } else { R::zero() };
        let first = R::one() - eps * w1 * logr;
        let dfirst = if rho > R::zero() { -eps * (dw1 * logr + w1 / rho) } else { R::zero() };
        let g = first * (R::one() - w2);
        let dg = dfirst * (R::one() - w2) - first * dw2;
        (g, dg)
    }
}

/// The unscaled stream function before mollification: `x_1` in the unit disk,
/// `x_1 (1 - eps log|x|)` out to `e^(1/eps)`, then 0.
pub fn stream_function_raw<R: Real>(params: &SpinWaveParams<R>, x: Point2<R>) -> R {
    let rho = x.norm();
    if rho <= R::one() {
        x.x
    } else if rho <= params.outer_radius() {
        x.x * (R::one() - params.epsilon * rho.ln())
    } else {
        R::zero()
    }
}

/// The mollified stream function.
pub fn stream_function<R: Real>(params: &SpinWaveParams<R>, x: Point2<R>) -> R {
    x.x * params.profile(x.norm()).0
}

/// The spin wave `W = perp-grad of the mollified stream function`; equals
/// `(0, 1)` for `|x| <= 1 - mollify_scale_inner` and vanishes outside the
/// outer collar. Divergence-free everywhere by construction.
pub fn spin_wave<R: Real>(params: &SpinWaveParams<R>, x: Point2<R>) -> Point2<R> {
    let rho = x.norm();
    let (g, dg) = params.profile(rho);
    if rho <= R::zero() || dg == R::zero() {
        return Point2::new(R::zero(), g);
    }
    // f = x1 g(rho): grad f = (g + x1^2 g'/rho, x1 x2 g'/rho).
    let s = dg / rho;
    Point2::new(-x.x * x.y * s, g + x.x * x.x * s)
}

/// The rescaled field `W_l(x) = W(x / l)` that generates the flow.
pub fn spin_wave_scaled<R: Real>(params: &SpinWaveParams<R>, x: Point2<R>) -> Point2<R> {
    spin_wave(params, x.scale(params.ell.recip()))
}

/// Numeric divergence of the spin wave by central differences.
pub fn spin_wave_divergence<R: Real>(params: &SpinWaveParams<R>, x: Point2<R>, h: R) -> R {
    let two = R::of(2.0);
    let dx = spin_wave(params, Point2::new(x.x + h, x.y)).x
        - spin_wave(params, Point2::new(x.x - h, x.y)).x;
    let dy = spin_wave(params, Point2::new(x.x, x.y + h)).y
        - spin_wave(params, Point2::new(x.x, x.y - h)).y;
    (dx + dy) / (two * h)
}

/// H^1 budget report: the integral of the squared Jacobian norm of `W` and
/// its ratio to `eps` (expected bounded).
#[derive(Clone, Copy, Debug)]
pub struct H1Budget<R: Real> {
    pub value: R,
    pub ratio_to_epsilon: R,
}

/// `int over R^2 of ||DW||_F^2`, by polar quadrature (log-spaced panels in
/// the far region) with finite-difference Jacobians.
pub fn h1_budget<R: Real>(params: &SpinWaveParams<R>) -> H1Budget<R> {
    let jac_norm_sq = |p: Point2<R>| -> R {
        let h = R::of(1e-6) * p.norm().max(R::one());
        let two = R::of(2.0);
        let wxp = spin_wave(params, Point2::new(p.x + h, p.y));
        let wxm = spin_wave(params, Point2::new(p.x - h, p.y));
        let wyp = spin_wave(params, Point2::new(p.x, p.y + h));
        let wym = spin_wave(params, Point2::new(p.x, p.y - h));
        let d11 = (wxp.x - wxm.x) / (two * h);
        let d21 = (wxp.y - wxm.y) / (two * h);
        let d12 = (wyp.x - wym.x) / (two * h);
        let d22 = (wyp.y - wym.y) / (two * h);
        d11 * d11 + d12 * d12 + d21 * d21 + d22 * d22
    };
    let n_angles = 32;
    let ring = |rho: R| -> R {
        let mut s = R::zero();
        for k in 0..n_angles {
            let th = R::TAU() * R::of(k as f64 / n_angles as f64);
            s += jac_norm_sq(Point2::from_polar(rho, th));
        }
        s * R::TAU() / R::of(n_angles as f64)
    };
    let near = integrate_panels(|rho: R| ring(rho) * rho, R::zero(), R::of(2.0), 24, R::of(1e-8));
    let far_hi = params.outer_radius() + R::of(2.0) * params.mollify_scale_outer;
    let far = integrate_panels(
        |t: R| {
            let rho = t.exp();
            ring(rho) * rho * rho
        },
        R::of(2.0).ln(),
        far_hi.ln(),
        48,
        R::of(1e-8),
    );
    let value = near + far;
    H1Budget { value, ratio_to_epsilon: value / params.epsilon }
}

/// One RK4 step of the autonomous field.
fn rk4_step<R: Real>(params: &SpinWaveParams<R>, x: Point2<R>, h: R) -> Point2<R> {
    let half = R::of(0.5);
    let k1 = spin_wave_scaled(params, x);
    let k2 = spin_wave_scaled(params, x + k1.scale(h * half));
    let k3 = spin_wave_scaled(params, x + k2.scale(h * half));
    let k4 = spin_wave_scaled(params, x + k3.scale(h));
    x + (k1 + k2.scale(R::of(2.0)) + k3.scale(R::of(2.0)) + k4).scale(h / R::of(6.0))
}

/// Advance by `h` with a step-doubling error monitor; halves the step when
/// the Richardson estimate violates the per-step tolerance.
fn monitored_step<R: Real>(params: &SpinWaveParams<R>, x: Point2<R>, h: R, tol: R) -> Point2<R> {
    let half = h * R::of(0.5);
    let one = rk4_step(params, x, h);
    let two = rk4_step(params, rk4_step(params, x, half), half);
    if (one - two).norm() <= tol {
        two
    } else {
        let q = half * R::of(0.5);
        let mut y = x;
        for _ in 0..4 {
            y = rk4_step(params, y, q);
        }
        y
    }
}

/// The localized-translation flow `Phi_t(x)`: RK4 integration of
/// `x' = W(x/l)` with fixed step `l/2048`. Identity outside the support;
/// exact translation by `t u` for `|x| <= l/4`.
pub fn flow<R: Real>(params: &SpinWaveParams<R>, t: R, x: Point2<R>) -> SpinWaveResult<Point2<R>> {
    check_flow_time(params, t)?;
    if x.norm() >= params.support_radius() {
        return Ok(x);
    }
    let n_steps = 2048usize;
    let h_nominal = params.ell / R::of(n_steps as f64);
    let steps = (t.abs() / h_nominal).ceil().as_f64() as usize;
    if steps == 0 {
        return Ok(x);
    }
    let h = t / R::of(steps as f64);
    let tol = R::of(1e-10) * params.ell / R::of(steps as f64);
    let mut y = x;
    for _ in 0..steps {
        y = monitored_step(params, y, h, tol);
    }
    Ok(y)
}

fn check_flow_time<R: Real>(params: &SpinWaveParams<R>, t: R) -> SpinWaveResult<()> {
    if t.abs() > params.ell / R::of(10.0) {
        return Err(SpinWaveError::InvalidParameter(format!(
            "|t| = {} exceeds ell/10 = {}",
            t.abs(),
            params.ell / R::of(10.0)
        )));
    }
    Ok(())
}

/// Jacobian of the flow map by central differences of step `fd_h`.
pub fn flow_jacobian<R: Real>(
    params: &SpinWaveParams<R>,
    t: R,
    x: Point2<R>,
    fd_h: R,
) -> SpinWaveResult<[[R; 2]; 2]> {
    let two = R::of(2.0);
    let xp = flow(params, t, Point2::new(x.x + fd_h, x.y))?;
    let xm = flow(params, t, Point2::new(x.x - fd_h, x.y))?;
    let yp = flow(params, t, Point2::new(x.x, x.y + fd_h))?;
    let ym = flow(params, t, Point2::new(x.x, x.y - fd_h))?;
    Ok([
        [(xp.x - xm.x) / (two * fd_h), (yp.x - ym.x) / (two * fd_h)],
        [(xp.y - xm.y) / (two * fd_h), (yp.y - ym.y) / (two * fd_h)],
    ])
}

pub fn det2<R: Real>(m: &[[R; 2]; 2]) -> R {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// A recorded trajectory with finite-difference Jacobians along it.
#[derive(Clone, Debug)]
pub struct FlowTrajectory<R: Real> {
    pub times: Vec<R>,
    pub positions: Vec<Point2<R>>,
    pub jacobians: Vec<[[R; 2]; 2]>,
    pub max_det_error: R,
}

pub fn flow_trajectory<R: Real>(
    params: &SpinWaveParams<R>,
    t: R,
    x: Point2<R>,
    records: usize,
) -> SpinWaveResult<FlowTrajectory<R>> {
    check_flow_time(params, t)?;
    let records = records.max(1);
    let fd_h = R::of(1e-5) * params.ell;
    let mut times = Vec::with_capacity(records + 1);
    let mut positions = Vec::with_capacity(records + 1);
    let mut jacobians = Vec::with_capacity(records + 1);
    let mut max_det_error = R::zero();
    for k in 0..=records {
        let tk = t * R::of(k as f64 / records as f64);
        let pos = flow(params, tk, x)?;
        let jac = flow_jacobian(params, tk, x, fd_h)?;
        max_det_error = max_det_error.max((det2(&jac) - R::one()).abs());
        times.push(tk);
        positions.push(pos);
        jacobians.push(jac);
    }
    Ok(FlowTrajectory { times, positions, jacobians, max_det_error })
}

/// The two decompositions of the flow: `Phi_t(x) = x + psi_t(x)` and
/// `Phi_t(x) = x + t W_l(x) + gamma_t(x)`.
#[derive(Clone, Copy, Debug)]
pub struct FlowDecomposition<R: Real> {
    pub psi: Point2<R>,
    pub gamma: Point2<R>,
    /// `|psi| <= 2|t|`.
    pub psi_bound_ok: bool,
    /// `gamma = 0` whenever `|x| <= l/4`; reported for such inputs.
    pub gamma_vanishes_in_core: Option<bool>,
}

pub fn flow_decomposition<R: Real>(
    params: &SpinWaveParams<R>,
    t: R,
    x: Point2<R>,
) -> SpinWaveResult<FlowDecomposition<R>> {
    let moved = flow(params, t, x)?;
    let psi = moved - x;
    let gamma = psi - spin_wave_scaled(params, x).scale(t);
    let in_core = x.norm() <= params.ell * R::of(0.25);
    Ok(FlowDecomposition {
        psi,
        gamma,
        psi_bound_ok: psi.norm() <= R::of(2.0) * t.abs() * (R::one() + R::of(1e-9)),
        gamma_vanishes_in_core: if in_core {
            Some(gamma.norm() <= R::of(1e-9) * params.ell)
        } else {
            None
        },
    })
}

/// Averaging error of the energy under opposite localized translations:
/// `F(X, m) - (F(Phi_t X, m) + F(Phi_-t X, m)) / 2`.
pub fn averaging_error<R: Real>(
    params: &SpinWaveParams<R>,
    t: R,
    config: &PointConfiguration<R>,
    bg: &BackgroundMeasure<R>,
) -> SpinWaveResult<R> {
    check_flow_time(params, t)?;
    let base = interaction_energy(config, bg)?.total;
    let mut shifted = Vec::with_capacity(2);
    for sign in [R::one(), -R::one()] {
        let mapped = config
            .map_points(|p| flow(params, t * sign, p).expect("flow time already validated"))
            .map_err(|e| {
                SpinWaveError::Precondition(format!("transported points collided: {e}"))
            })?;
        shifted.push(interaction_energy(&mapped, bg)?.total);
    }
    Ok(base - (shifted[0] + shifted[1]) * R::of(0.5))
}

/// A vector field with an optional analytic divergence (finite differences
/// otherwise) and its support region.
pub struct VectorField<'a, R: Real> {
    pub eval: &'a (dyn Fn(Point2<R>) -> Point2<R> + Sync),
    pub divergence: Option<&'a (dyn Fn(Point2<R>) -> R + Sync)>,
    pub support: DomainRegion<R>,
}

impl<R: Real> VectorField<'_, R> {
    fn div_at(&self, p: Point2<R>) -> R {
        match self.divergence {
            Some(d) => d(p),
            None => {
                let h = R::of(1e-6);
                let two = R::of(2.0);
                let dx = (self.eval)(Point2::new(p.x + h, p.y)).x
                    - (self.eval)(Point2::new(p.x - h, p.y)).x;
                let dy = (self.eval)(Point2::new(p.x, p.y + h)).y
                    - (self.eval)(Point2::new(p.x, p.y - h)).y;
                (dx + dy) / (two * h)
            }
        }
    }
}

/// The anisotropy pair: the first-order energy change
/// `A1 = double-int over x != y of psi(x) . grad log|x-y| d(X-m)(x) d(X-m)(y)`
/// and `Ani = A1 - 1/4 int div(psi) dX`.
pub fn anisotropy<R: Real>(
    config: &PointConfiguration<R>,
    bg: &BackgroundMeasure<R>,
    psi: &VectorField<'_, R>,
) -> SpinWaveResult<(R, R)> {
    if let Some(arc) = bg.arc() {
        // The support must stay away from the singular arc.
        let (lo, hi) = psi.support.bounding_box();
        let c = arc.center;
        let mut min_d = R::infinity();
        let n = 64;
        for k in 0..n {
            let th = R::TAU() * R::of(k as f64 / n as f64);
            let p = c + Point2::from_polar(arc.radius, th);
            if p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && psi.support.contains(p)
            {
                min_d = R::zero();
            }
        }
        if min_d == R::zero() {
            return Err(SpinWaveError::Precondition(
                "psi support touches the singular arc component".into(),
            ));
        }
    }
    let pts = config.points();
    let psi_vals: Vec<Point2<R>> = pts.iter().map(|&p| (psi.eval)(p)).collect();

    // Point-point term, exact.
    let mut a1 = R::zero();
    for (i, &x) in pts.iter().enumerate() {
        if !psi.support.contains(x) && psi_vals[i] == Point2::zero() {
            continue;
        }
        let mut s = Point2::zero();
        for (j, &y) in pts.iter().enumerate() {
            if i == j {
                continue;
            }
            let v = x - y;
            s += v.scale(v.norm_sq().recip());
        }
        a1 += psi_vals[i].dot(s);
    }
    // Point-background cross term: int grad log|x-y| dm(y) = -grad P_m(x).
    for (i, &x) in pts.iter().enumerate() {
        a1 += psi_vals[i].dot(bg.potential_gradient(x));
    }
    // Background-point cross term: for each point charge y_j,
    // -int_supp psi(x) . (x - y_j)/|x - y_j|^2 dm(x), in polar around y_j
    // where the integrand is bounded.
    let reach = {
        let (lo, hi) = psi.support.bounding_box();
        let c = psi.support.center();
        (hi - lo).norm().max((c - lo).norm() * R::of(2.0))
    };
    for &y in pts {
        let term = integrate_panels(
            |r: R| {
                if r <= R::zero() {
                    return R::zero();
                }
                let mut ring = R::zero();
                let n = 48;
                for k in 0..n {
                    let th = R::TAU() * R::of(k as f64 / n as f64);
                    let x = y + Point2::from_polar(r, th);
                    if psi.support.contains(x) {
                        let w = (psi.eval)(x).dot(Point2::from_polar(R::one(), th));
                        ring += w * bg.density_at(x);
                    }
                }
                ring * R::TAU() / R::of(n as f64)
            },
            R::zero(),
            reach,
            24,
            R::of(1e-8),
        );
        a1 -= term;
    }
    // Background-background term: -int psi(x) . grad P_m(x) dm(x).
    let (lo, hi) = psi.support.bounding_box();
    let nx = 96;
    let mut bgbg = R::zero();
    let hx = (hi.x - lo.x) / R::of(nx as f64);
    let hy = (hi.y - lo.y) / R::of(nx as f64);
    for i in 0..nx {
        for j in 0..nx {
            let p = Point2::new(
                lo.x + hx * (R::of(i as f64) + R::of(0.5)),
                lo.y + hy * (R::of(j as f64) + R::of(0.5)),
            );
            if psi.support.contains(p) {
                bgbg += (psi.eval)(p).dot(bg.potential_gradient(p)) * bg.density_at(p);
            }
        }
    }
    a1 -= bgbg * hx * hy;

    // Ani = A1 - 1/4 sum div psi (x_i).
    let mut div_sum = R::zero();
    for &x in pts {
        if psi.support.contains(x) {
            div_sum += psi.div_at(x);
        }
    }
    Ok((a1, a1 - div_sum * R::of(0.25)))
}
