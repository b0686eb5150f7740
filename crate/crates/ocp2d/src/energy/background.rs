//! Neutralizing background measures: a uniform base density on a region,
//! an optional signed radial perturbation, an optional hole carrying zero
//! density, and an optional singular arc component on a circle. Potentials
//! for uniform disks are closed-form (Newton); radial pieces reduce to 1D
//! quadrature through the ring decomposition.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::geom::{DomainRegion, Point2};
use crate::quad::{integrate, integrate_rect};
use crate::real::Real;

use super::{EnergyError, EnergyResult};

/// Logarithmic potential of the uniform density-1 disk `D(0, radius)`:
/// `int_{D(0,R)} -log|x - y| dy`. Equals `-pi R^2 log|x|` outside the disk
/// (Newton's theorem) and `-pi R^2 log R + pi (R^2 - |x|^2)/2` inside.
pub fn uniform_disk_potential<R: Real>(radius: R, x: Point2<R>) -> R {
    let pi = R::PI();
    let r2 = radius * radius;
    let d2 = x.norm_sq();
    if d2 >= r2 {
        -pi * r2 * (d2.ln() * R::of(0.5))
    } else {
        -pi * r2 * radius.ln() + pi * (r2 - d2) * R::of(0.5)
    }
}

/// Gradient of [`uniform_disk_potential`] with respect to `x`.
pub fn uniform_disk_potential_gradient<R: Real>(radius: R, x: Point2<R>) -> Point2<R> {
    let pi = R::PI();
    let r2 = radius * radius;
    let d2 = x.norm_sq();
    if d2 >= r2 {
        x.scale(-pi * r2 / d2)
    } else {
        x.scale(-pi)
    }
}

/// Angular measure (in radians) of the circle `{c + s e^{i theta}}` lying
/// inside the disk `D(center, rho)`, where `d = |c - center|`.
pub fn circle_in_disk_angle<R: Real>(d: R, s: R, rho: R) -> R {
    if s + d <= rho {
        return R::TAU();
    }
    if (s - d).abs() >= rho {
        return R::zero();
    }
    let cosarg = (d * d + s * s - rho * rho) / (R::of(2.0) * d * s);
    R::of(2.0) * cosarg.min(R::one()).max(-R::one()).acos()
}

/// Signed radial density perturbation, supported on `[support.0, support.1]`
/// around the region center.
#[derive(Clone)]
pub struct RadialComponent<R: Real> {
    pub delta: Arc<dyn Fn(R) -> R + Send + Sync>,
    pub support: (R, R),
}

impl<R: Real> fmt::Debug for RadialComponent<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialComponent").field("support", &self.support).finish()
    }
}

/// Singular component carried by a circle, with linear density with respect
/// to arclength.
#[derive(Clone)]
pub struct ArcComponent<R: Real> {
    pub center: Point2<R>,
    pub radius: R,
    pub density: ArcDensity<R>,
}

#[derive(Clone)]
pub enum ArcDensity<R: Real> {
    Uniform(R),
    /// Angle-dependent density together with a stated upper bound.
    Varying { density: Arc<dyn Fn(R) -> R + Send + Sync>, bound: R },
}

impl<R: Real> fmt::Debug for ArcComponent<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ArcComponent")
            .field("center", &self.center)
            .field("radius", &self.radius)
            .finish()
    }
}

const QUAD_TOL: f64 = 1e-10;

/// A (possibly signed) background measure on a region.
#[derive(Clone, Debug)]
pub struct BackgroundMeasure<R: Real> {
    base_density: R,
    region: DomainRegion<R>,
    radial: Option<RadialComponent<R>>,
    hole: Option<DomainRegion<R>>,
    arc: Option<ArcComponent<R>>,
    self_energy: OnceLock<R>,
    mass: OnceLock<R>,
}

impl<R: Real> BackgroundMeasure<R> {
    /// Uniform density on a region.
    pub fn uniform(region: DomainRegion<R>, density: R) -> EnergyResult<Self> {
        if !(density >= R::zero()) || !density.is_finite() {
            return Err(EnergyError::InvalidParameter(format!(
                "base density {density} must be nonnegative"
            )));
        }
        Ok(BackgroundMeasure {
            base_density: density,
            region,
            radial: None,
            hole: None,
            arc: None,
            self_energy: OnceLock::new(),
            mass: OnceLock::new(),
        })
    }

    /// The zero measure on a region (useful for free point systems).
    pub fn zero(region: DomainRegion<R>) -> Self {
        Self::uniform(region, R::zero()).expect("zero density is valid")
    }

    /// Unit-density disk of radius `sqrt(n/pi)` centered at the origin: the
    /// neutralizing background of an `n`-point system in blown-up scale.
    pub fn neutralizing_disk(n: usize) -> Self {
        let radius = (R::of(n as f64) / R::PI()).sqrt();
        let region = DomainRegion::Disk { center: Point2::zero(), radius };
        Self::uniform(region, R::one()).expect("unit density is valid")
    }

    /// Add a signed radial perturbation of the density, centered at the
    /// region center. Requires a disk region.
    pub fn with_radial(mut self, radial: RadialComponent<R>) -> EnergyResult<Self> {
        if !matches!(self.region, DomainRegion::Disk { .. }) {
            return Err(EnergyError::InvalidParameter(
                "radial components require a disk region".into(),
            ));
        }
        if !(radial.support.0 >= R::zero() && radial.support.0 <= radial.support.1) {
            return Err(EnergyError::InvalidParameter("bad radial support".into()));
        }
        self.radial = Some(radial);
        self.reset_caches();
        Ok(self)
    }

    /// Punch a zero-density hole. The hole must be a disk (or an annulus
    /// concentric with the region) contained in the region; combined with a
    /// radial component it must additionally be concentric.
    pub fn with_hole(mut self, hole: DomainRegion<R>) -> EnergyResult<Self> {
        let c = self.region.center();
        match hole {
            DomainRegion::Disk { center, radius } => {
                if let DomainRegion::Disk { radius: big, .. } = self.region {
                    if center.dist(c) + radius > big * (R::one() + R::of(1e-12)) {
                        return Err(EnergyError::InvalidParameter(
                            "hole must be contained in the region".into(),
                        ));
                    }
                }
                if self.radial.is_some() && center.dist(c) > R::of(1e-12) * radius.max(R::one()) {
                    return Err(EnergyError::InvalidParameter(
                        "hole must be concentric when a radial component is present".into(),
                    ));
                }
            }
            DomainRegion::Annulus { center, r_out, .. } => {
                if center.dist(c) > R::of(1e-9) {
                    return Err(EnergyError::InvalidParameter(
                        "annular holes must be concentric with the region".into(),
                    ));
                }
                if let DomainRegion::Disk { radius: big, .. } = self.region {
                    if r_out > big * (R::one() + R::of(1e-12)) {
                        return Err(EnergyError::InvalidParameter(
                            "hole must be contained in the region".into(),
                        ));
                    }
                }
            }
            _ => {
                return Err(EnergyError::InvalidParameter(
                    "holes must be disks or concentric annuli".into(),
                ))
            }
        }
        self.hole = Some(hole);
        self.reset_caches();
        Ok(self)
    }

    /// Attach a singular arc component.
    pub fn with_arc(mut self, arc: ArcComponent<R>) -> EnergyResult<Self> {
        if !(arc.radius > R::zero()) {
            return Err(EnergyError::InvalidParameter("arc radius must be > 0".into()));
        }
        if let ArcDensity::Varying { density, bound } = &arc.density {
            let mut max = R::zero();
            for i in 0..256 {
                let th = R::TAU() * R::of(i as f64 / 256.0);
                max = max.max(density(th).abs());
            }
            if max > *bound * (R::one() + R::of(1e-9)) {
                return Err(EnergyError::InvalidParameter(
                    "arc density exceeds its stated bound".into(),
                ));
            }
        }
        self.arc = Some(arc);
        self.reset_caches();
        Ok(self)
    }

    /// Parametric equilibrium-style background for a subsystem disk of radius
    /// `t`: unit density on the disk, a zero-density annular band of width
    /// `kappa` along the boundary, and a singular arc on the boundary circle.
    /// With `arc_density = None` the arc mass is chosen so the total mass is
    /// `n_points`.
    pub fn subsystem_equilibrium(
        center: Point2<R>,
        t: R,
        n_points: usize,
        kappa: R,
        arc_density: Option<R>,
    ) -> EnergyResult<Self> {
        if !(kappa >= R::zero() && kappa < t) {
            return Err(EnergyError::InvalidParameter("need 0 <= kappa < t".into()));
        }
        let region = DomainRegion::Disk { center, radius: t };
        let mut bg = Self::uniform(region, R::one())?;
        if kappa > R::zero() {
            bg = bg.with_hole(DomainRegion::Annulus { center, r_in: t - kappa, r_out: t })?;
        }
        let lambda = match arc_density {
            Some(l) => l,
            None => {
                let continuous = bg.mass();
                (R::of(n_points as f64) - continuous) / (R::TAU() * t)
            }
        };
        if lambda < R::zero() {
            return Err(EnergyError::InvalidParameter(
                "requested arc density is negative; increase kappa or n_points".into(),
            ));
        }
        bg.with_arc(ArcComponent { center, radius: t, density: ArcDensity::Uniform(lambda) })
    }

    fn reset_caches(&mut self) {
        self.self_energy = OnceLock::new();
        self.mass = OnceLock::new();
    }

    pub fn region(&self) -> &DomainRegion<R> {
        &self.region
    }

    pub fn base_density(&self) -> R {
        self.base_density
    }

    pub fn hole(&self) -> Option<&DomainRegion<R>> {
        self.hole.as_ref()
    }

    pub fn arc(&self) -> Option<&ArcComponent<R>> {
        self.arc.as_ref()
    }

    pub fn radial(&self) -> Option<&RadialComponent<R>> {
        self.radial.as_ref()
    }

    pub fn is_plain_uniform(&self) -> bool {
        self.radial.is_none() && self.hole.is_none() && self.arc.is_none()
    }

    /// Absolutely continuous density at a point.
    pub fn density_at(&self, p: Point2<R>) -> R {
        if !self.region.contains(p) {
            return R::zero();
        }
        if let Some(h) = &self.hole {
            if h.contains(p) {
                return R::zero();
            }
        }
        let mut d = self.base_density;
        if let Some(rad) = &self.radial {
            let r = p.dist(self.region.center());
            if r >= rad.support.0 && r <= rad.support.1 {
                d += (rad.delta)(r);
            }
        }
        d
    }

    /// Total mass (may be any real for signed radial components).
    pub fn mass(&self) -> R {
        *self.mass.get_or_init(|| {
            let mut m = self.base_density * self.region.area();
            if let Some(h) = &self.hole {
                m -= self.base_density * h.area();
            }
            if let Some(rad) = &self.radial {
                let (a, b) = self.radial_bounds(rad);
                m += integrate(
                    |r: R| (rad.delta)(r) * R::TAU() * r,
                    a,
                    b,
                    R::of(QUAD_TOL),
                );
            }
            m += self.arc_mass();
            m
        })
    }

    fn arc_mass(&self) -> R {
        match &self.arc {
            None => R::zero(),
            Some(arc) => match &arc.density {
                ArcDensity::Uniform(l) => *l * R::TAU() * arc.radius,
                ArcDensity::Varying { density, .. } => {
                    let radius = arc.radius;
                    integrate(|th: R| density(th) * radius, R::zero(), R::TAU(), R::of(QUAD_TOL))
                }
            },
        }
    }

    /// Radial support clipped by a concentric hole, if any.
    fn radial_bounds(&self, rad: &RadialComponent<R>) -> (R, R) {
        let (mut a, mut b) = rad.support;
        if let Some(DomainRegion::Disk { radius, .. }) = self.hole {
            a = a.max(radius);
        }
        if let DomainRegion::Disk { radius, .. } = self.region {
            b = b.min(radius);
        }
        (a, b.max(a))
    }

    /// Mass inside a disk `D(q, rho)`. Exact for the uniform and arc parts,
    /// 1D quadrature for the radial part.
    pub fn mass_in_disk(&self, q: Point2<R>, rho: R) -> R {
        let mut m = match self.region {
            DomainRegion::Disk { center, radius } => {
                self.base_density * lens_area(center.dist(q), radius, rho)
            }
            _ => {
                let bb = self.region.bounding_box();
                self.base_density
                    * integrate_rect(
                        |p: Point2<R>| {
                            if self.region.contains(p) && p.dist(q) <= rho {
                                R::one()
                            } else {
                                R::zero()
                            }
                        },
                        bb.0,
                        bb.1,
                        R::of(1e-7),
                    )
            }
        };
        match self.hole {
            Some(DomainRegion::Disk { center, radius }) => {
                m -= self.base_density * lens_area(center.dist(q), radius, rho);
            }
            Some(DomainRegion::Annulus { center, r_in, r_out }) => {
                let d = center.dist(q);
                m -= self.base_density * (lens_area(d, r_out, rho) - lens_area(d, r_in, rho));
            }
            _ => {}
        }
        if let Some(rad) = &self.radial {
            let (a, b) = self.radial_bounds(rad);
            let d = self.region.center().dist(q);
            m += integrate(
                |r: R| (rad.delta)(r) * r * circle_in_disk_angle(d, r, rho),
                a,
                b,
                R::of(QUAD_TOL),
            );
        }
        if let Some(arc) = &self.arc {
            let d = arc.center.dist(q);
            let angle = circle_in_disk_angle(d, arc.radius, rho);
            match &arc.density {
                ArcDensity::Uniform(l) => m += *l * arc.radius * angle,
                ArcDensity::Varying { density, .. } => {
                    // Integrate the density over the angular window(s) inside the disk.
                    let radius = arc.radius;
                    let center = arc.center;
                    m += integrate(
                        |th: R| {
                            let p = center + Point2::from_polar(radius, th);
                            if p.dist(q) <= rho {
                                density(th) * radius
                            } else {
                                R::zero()
                            }
                        },
                        R::zero(),
                        R::TAU(),
                        R::of(QUAD_TOL),
                    );
                }
            }
        }
        m
    }

    /// Mass inside an arbitrary region: exact for disks, quadrature of the
    /// density (plus the arc overlap) otherwise.
    pub fn mass_in(&self, omega: &DomainRegion<R>) -> R {
        match *omega {
            DomainRegion::Disk { center, radius } => self.mass_in_disk(center, radius),
            DomainRegion::Annulus { center, r_in, r_out } => {
                self.mass_in_disk(center, r_out) - self.mass_in_disk(center, r_in)
            }
            _ => {
                let (lo, hi) = omega.bounding_box();
                let mut m = integrate_rect(
                    |p: Point2<R>| if omega.contains(p) { self.density_at(p) } else { R::zero() },
                    lo,
                    hi,
                    R::of(1e-8),
                );
                if let Some(arc) = &self.arc {
                    let radius = arc.radius;
                    let center = arc.center;
                    let line = |th: R| match &arc.density {
                        ArcDensity::Uniform(l) => *l,
                        ArcDensity::Varying { density, .. } => density(th),
                    };
                    m += integrate(
                        |th: R| {
                            let p = center + Point2::from_polar(radius, th);
                            if omega.contains(p) {
                                line(th) * radius
                            } else {
                                R::zero()
                            }
                        },
                        R::zero(),
                        R::TAU(),
                        R::of(1e-9),
                    );
                }
                m
            }
        }
    }

    /// Logarithmic potential `int -log|x - y| dm(y)`.
    pub fn potential(&self, x: Point2<R>) -> R {
        let mut v = match self.region {
            DomainRegion::Disk { center, radius } => {
                self.base_density * uniform_disk_potential(radius, x - center)
            }
            _ => {
                let bb = self.region.bounding_box();
                self.base_density
                    * integrate_rect(
                        |p: Point2<R>| {
                            if self.region.contains(p) {
                                -p.dist(x).max(R::of(1e-300)).ln()
                            } else {
                                R::zero()
                            }
                        },
                        bb.0,
                        bb.1,
                        R::of(1e-8),
                    )
            }
        };
        match self.hole {
            Some(DomainRegion::Disk { center, radius }) => {
                v -= self.base_density * uniform_disk_potential(radius, x - center);
            }
            Some(DomainRegion::Annulus { center, r_in, r_out }) => {
                v -= self.base_density
                    * (uniform_disk_potential(r_out, x - center)
                        - uniform_disk_potential(r_in, x - center));
            }
            _ => {}
        }
        if let Some(rad) = &self.radial {
            v += self.radial_potential(rad, x.dist(self.region.center()));
        }
        if let Some(arc) = &self.arc {
            v += arc_potential(arc, x);
        }
        v
    }

    /// Potential of a ring decomposition: rings of radius `s` contribute
    /// `-mass(s) * log(max(r, s))`.
    fn radial_potential(&self, rad: &RadialComponent<R>, r: R) -> R {
        let (a, b) = self.radial_bounds(rad);
        if b <= a {
            return R::zero();
        }
        let tau = R::TAU();
        let inner = integrate(
            |s: R| (rad.delta)(s) * s,
            a,
            r.min(b).max(a),
            R::of(QUAD_TOL),
        );
        let outer = integrate(
            |s: R| (rad.delta)(s) * s * s.ln(),
            r.min(b).max(a),
            b,
            R::of(QUAD_TOL),
        );
        -(tau) * (r.max(R::of(1e-300)).ln() * inner + outer)
    }

    /// Gradient of the potential.
    pub fn potential_gradient(&self, x: Point2<R>) -> Point2<R> {
        let mut g = match self.region {
            DomainRegion::Disk { center, radius } => {
                uniform_disk_potential_gradient(radius, x - center).scale(self.base_density)
            }
            _ => {
                // Central differences on the quadrature potential (slow path).
                let h = R::of(1e-5);
                let dx = (self.potential(Point2::new(x.x + h, x.y))
                    - self.potential(Point2::new(x.x - h, x.y)))
                    / (R::of(2.0) * h);
                let dy = (self.potential(Point2::new(x.x, x.y + h))
                    - self.potential(Point2::new(x.x, x.y - h)))
                    / (R::of(2.0) * h);
                return Point2::new(dx, dy);
            }
        };
        match self.hole {
            Some(DomainRegion::Disk { center, radius }) => {
                g -= uniform_disk_potential_gradient(radius, x - center).scale(self.base_density);
            }
            Some(DomainRegion::Annulus { center, r_in, r_out }) => {
                let d = uniform_disk_potential_gradient(r_out, x - center)
                    - uniform_disk_potential_gradient(r_in, x - center);
                g -= d.scale(self.base_density);
            }
            _ => {}
        }
        if let Some(rad) = &self.radial {
            let c = self.region.center();
            let v = x - c;
            let r = v.norm();
            let (a, b) = self.radial_bounds(rad);
            if r > a && r > R::zero() {
                let inside = integrate(
                    |s: R| (rad.delta)(s) * s * R::TAU(),
                    a,
                    r.min(b),
                    R::of(QUAD_TOL),
                );
                g += v.scale(-inside / (r * r));
            }
        }
        if let Some(arc) = &self.arc {
            g += arc_potential_gradient(arc, x);
        }
        g
    }

    /// Self energy `1/2 * double-int -log|x - y| dm(x) dm(y)` (cached).
    pub fn self_energy(&self) -> R {
        *self.self_energy.get_or_init(|| self.compute_self_energy())
    }

    fn compute_self_energy(&self) -> R {
        let half = R::of(0.5);
        // Uniform part (region minus hole) against itself.
        let mut e = self.uniform_self_energy();
        // Cross and self terms of the radial component.
        if let Some(rad) = &self.radial {
            let (a, b) = self.radial_bounds(rad);
            let c = self.region.center();
            // 2 * 1/2 * int h_uniform(ring) dm_rad  (uniform includes the hole).
            let uniform_pot = |r: R| {
                let x = c + Point2::new(r, R::zero());
                let mut v = match self.region {
                    DomainRegion::Disk { center, radius } => {
                        self.base_density * uniform_disk_potential(radius, x - center)
                    }
                    _ => unreachable!("radial requires disk region"),
                };
                match self.hole {
                    Some(DomainRegion::Disk { center, radius }) => {
                        v -= self.base_density * uniform_disk_potential(radius, x - center);
                    }
                    Some(DomainRegion::Annulus { center, r_in, r_out }) => {
                        v -= self.base_density
                            * (uniform_disk_potential(r_out, x - center)
                                - uniform_disk_potential(r_in, x - center));
                    }
                    _ => {}
                }
                v
            };
            e += integrate(
                |r: R| (rad.delta)(r) * R::TAU() * r * uniform_pot(r),
                a,
                b,
                R::of(QUAD_TOL),
            );
            // 1/2 * int h_rad dm_rad.
            e += half
                * integrate(
                    |r: R| (rad.delta)(r) * R::TAU() * r * self.radial_potential(rad, r),
                    a,
                    b,
                    R::of(QUAD_TOL),
                );
        }
        if let Some(arc) = &self.arc {
            // Cross term with the continuous part: int h_continuous over the arc.
            let continuous_pot = |p: Point2<R>| {
                let mut v = match self.region {
                    DomainRegion::Disk { center, radius } => {
                        self.base_density * uniform_disk_potential(radius, p - center)
                    }
                    _ => self.potential(p) - arc_potential(arc, p),
                };
                match self.hole {
                    Some(DomainRegion::Disk { center, radius }) => {
                        v -= self.base_density * uniform_disk_potential(radius, p - center);
                    }
                    Some(DomainRegion::Annulus { center, r_in, r_out }) => {
                        v -= self.base_density
                            * (uniform_disk_potential(r_out, p - center)
                                - uniform_disk_potential(r_in, p - center));
                    }
                    _ => {}
                }
                if let Some(rad) = &self.radial {
                    v += self.radial_potential(rad, p.dist(self.region.center()));
                }
                v
            };
            let radius = arc.radius;
            let center = arc.center;
            let line = |th: R| match &arc.density {
                ArcDensity::Uniform(l) => *l,
                ArcDensity::Varying { density, .. } => density(th),
            };
            e += integrate(
                |th: R| {
                    let p = center + Point2::from_polar(radius, th);
                    line(th) * radius * continuous_pot(p)
                },
                R::zero(),
                R::TAU(),
                R::of(QUAD_TOL),
            );
            // Arc self energy.
            match &arc.density {
                ArcDensity::Uniform(l) => {
                    let mass = *l * R::TAU() * radius;
                    // Uniform unit circle has logarithmic energy -log(radius).
                    e += half * mass * mass * (-radius.ln());
                }
                ArcDensity::Varying { density, .. } => {
                    let d2 = |th: R, ph: R| {
                        let x = center + Point2::from_polar(radius, th);
                        let y = center + Point2::from_polar(radius, ph);
                        x.dist(y).max(R::of(1e-300))
                    };
                    e += half
                        * integrate(
                            |th: R| {
                                integrate(
                                    |ph: R| {
                                        -density(th) * density(ph) * radius * radius
                                            * d2(th, ph).ln()
                                    },
                                    R::zero(),
                                    R::TAU(),
                                    R::of(1e-8),
                                )
                            },
                            R::zero(),
                            R::TAU(),
                            R::of(1e-8),
                        );
                }
            }
        }
        e
    }

    fn uniform_self_energy(&self) -> R {
        let rho = self.base_density;
        if rho == R::zero() {
            return R::zero();
        }
        let two = R::of(2.0);
        match self.region {
            DomainRegion::Disk { center, radius } => {
                // (region - hole)^2 = region^2 - 2 region*hole + hole^2.
                let mut e = rho * rho * disk_disk_self(radius);
                match self.hole {
                    Some(DomainRegion::Disk { center: hc, radius: hr }) => {
                        e -= two * rho * rho * disk_into_disk(radius, center, hr, hc);
                        e += rho * rho * disk_disk_self(hr);
                    }
                    Some(DomainRegion::Annulus { center: hc, r_in, r_out }) => {
                        let cross = disk_into_disk(radius, center, r_out, hc)
                            - disk_into_disk(radius, center, r_in, hc);
                        e -= two * rho * rho * cross;
                        let hole_self = disk_disk_self(r_out) + disk_disk_self(r_in)
                            - two * disk_into_disk(r_out, hc, r_in, hc);
                        e += rho * rho * hole_self;
                    }
                    _ => {}
                }
                e
            }
            _ => {
                // Quadrature fallback for non-disk regions (rare, test-scale).
                let bb = self.region.bounding_box();
                let half = R::of(0.5);
                half * rho
                    * integrate_rect(
                        |p: Point2<R>| {
                            if self.region.contains(p) {
                                rho * self.uniform_region_potential_quad(p)
                            } else {
                                R::zero()
                            }
                        },
                        bb.0,
                        bb.1,
                        R::of(1e-7),
                    )
            }
        }
    }

    fn uniform_region_potential_quad(&self, x: Point2<R>) -> R {
        let bb = self.region.bounding_box();
        integrate_rect(
            |p: Point2<R>| {
                if self.region.contains(p) {
                    -p.dist(x).max(R::of(1e-300)).ln()
                } else {
                    R::zero()
                }
            },
            bb.0,
            bb.1,
            R::of(1e-7),
        )
    }
}

/// `1/2 * double-int over D(0,R)^2 of -log|x-y|` for unit density:
/// `pi^2 R^4 (1/4 - log R) / 2` ... computed from the interior potential.
fn disk_disk_self<R: Real>(radius: R) -> R {
    let pi = R::PI();
    let r2 = radius * radius;
    // int_{D} h_D = -pi^2 R^4 log R + pi^2 R^4 / 4.
    let integral = -pi * pi * r2 * r2 * radius.ln() + pi * pi * r2 * r2 * R::of(0.25);
    integral * R::of(0.5)
}

/// `1/2 * double-int of -log|x-y|` between the uniform unit densities on
/// `D(c_big, r_big)` and `D(c_small, r_small)`, with the small disk contained
/// in the big one.
fn disk_into_disk<R: Real>(r_big: R, c_big: Point2<R>, r_small: R, c_small: Point2<R>) -> R {
    // Inside the big disk its potential is A - pi |x - c_big|^2 / 2 with
    // A = -pi R^2 log R + pi R^2 / 2, so the integral over the small disk is
    // analytic: int_{D(c,rho)} |x|^2 dx = pi rho^2 |c|^2 + pi rho^4 / 2.
    let pi = R::PI();
    let rb2 = r_big * r_big;
    let rs2 = r_small * r_small;
    let a = -pi * rb2 * r_big.ln() + pi * rb2 * R::of(0.5);
    let d2 = c_small.dist_sq(c_big);
    let second_moment = pi * rs2 * d2 + pi * rs2 * rs2 * R::of(0.5);
    let integral = pi * rs2 * a - pi * R::of(0.5) * second_moment;
    integral * R::of(0.5)
}

fn arc_potential<R: Real>(arc: &ArcComponent<R>, x: Point2<R>) -> R {
    match &arc.density {
        ArcDensity::Uniform(l) => {
            let mass = *l * R::TAU() * arc.radius;
            -mass * x.dist(arc.center).max(arc.radius).ln()
        }
        ArcDensity::Varying { density, .. } => {
            let radius = arc.radius;
            let center = arc.center;
            integrate(
                |th: R| {
                    let p = center + Point2::from_polar(radius, th);
                    -density(th) * radius * p.dist(x).max(R::of(1e-300)).ln()
                },
                R::zero(),
                R::TAU(),
                R::of(1e-9),
            )
        }
    }
}

fn arc_potential_gradient<R: Real>(arc: &ArcComponent<R>, x: Point2<R>) -> Point2<R> {
    match &arc.density {
        ArcDensity::Uniform(l) => {
            let mass = *l * R::TAU() * arc.radius;
            let v = x - arc.center;
            let d2 = v.norm_sq();
            if d2 <= arc.radius * arc.radius {
                Point2::zero()
            } else {
                v.scale(-mass / d2)
            }
        }
        ArcDensity::Varying { density, .. } => {
            let radius = arc.radius;
            let center = arc.center;
            let gx = integrate(
                |th: R| {
                    let p = center + Point2::from_polar(radius, th);
                    let v = x - p;
                    -density(th) * radius * v.x / v.norm_sq()
                },
                R::zero(),
                R::TAU(),
                R::of(1e-9),
            );
            let gy = integrate(
                |th: R| {
                    let p = center + Point2::from_polar(radius, th);
                    let v = x - p;
                    -density(th) * radius * v.y / v.norm_sq()
                },
                R::zero(),
                R::TAU(),
                R::of(1e-9),
            );
            Point2::new(gx, gy)
        }
    }
}

/// Area of the intersection of `D(c1, r1)` and `D(c2, r2)` with `d = |c1 - c2|`.
pub fn lens_area<R: Real>(d: R, r1: R, r2: R) -> R {
    if d >= r1 + r2 {
        return R::zero();
    }
    let rmin = r1.min(r2);
    let rmax = r1.max(r2);
    if d + rmin <= rmax {
        return R::PI() * rmin * rmin;
    }
    let two = R::of(2.0);
    let d2 = d * d;
    let a1 = ((d2 + r1 * r1 - r2 * r2) / (two * d * r1)).min(R::one()).max(-R::one()).acos();
    let a2 = ((d2 + r2 * r2 - r1 * r1) / (two * d * r2)).min(R::one()).max(-R::one()).acos();
    let tri = R::of(0.5)
        * ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).max(R::zero()).sqrt();
    r1 * r1 * a1 + r2 * r2 * a2 - tri
}
