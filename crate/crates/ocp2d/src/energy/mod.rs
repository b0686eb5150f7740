//! Energy functionals of the plasma: the logarithmic interaction energy of a
//! point configuration against a neutralizing background, nearest-neighbor
//! truncation vectors, truncated electric fields and electric energies, the
//! exact identity linking them, external potentials, and the subsystem
//! interaction decomposition.

mod background;
mod field;
mod subsystem;

pub use background::{
    circle_in_disk_angle, lens_area, uniform_disk_potential, uniform_disk_potential_gradient,
    ArcComponent, ArcDensity, BackgroundMeasure, RadialComponent,
};
pub use field::{electric_energy, energy_identity_check, truncated_field, IdentityReport};
pub use subsystem::{external_potential, subsystem_interaction, SubsystemInteraction};

use std::sync::Arc;

use thiserror::Error;

use crate::geom::{DomainRegion, Point2};
use crate::quad::{integrate, integrate_rect};
use crate::real::Real;

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point {index} lies outside the domain")]
    PointOutsideDomain { index: usize },
    #[error("coincident points {i} and {j}: the energy is +infinity")]
    CoincidentPoints { i: usize, j: usize },
    #[error("configuration point {index} touches the singular arc component")]
    SingularMeasureContact { index: usize },
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type EnergyResult<T> = Result<T, EnergyError>;

/// A finite set of distinct points together with its ambient domain.
#[derive(Clone, Debug)]
pub struct PointConfiguration<R: Real> {
    points: Vec<Point2<R>>,
    domain: DomainRegion<R>,
}

impl<R: Real> PointConfiguration<R> {
    /// Validates that every point lies in the (closed) domain and that no two
    /// points coincide.
    pub fn new(points: Vec<Point2<R>>, domain: DomainRegion<R>) -> EnergyResult<Self> {
        for (index, p) in points.iter().enumerate() {
            if !domain.contains(*p) {
                return Err(EnergyError::PointOutsideDomain { index });
            }
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i] == points[j] {
                    return Err(EnergyError::CoincidentPoints { i, j });
                }
            }
        }
        Ok(PointConfiguration { points, domain })
    }

    /// Constructor for callers that guarantee the invariants themselves
    /// (sampler output paths, where the O(N^2) duplicate scan per emitted
    /// sample would dominate).
    pub(crate) fn from_trusted(points: Vec<Point2<R>>, domain: DomainRegion<R>) -> Self {
        PointConfiguration { points, domain }
    }

    pub fn points(&self) -> &[Point2<R>] {
        &self.points
    }

    pub fn domain(&self) -> &DomainRegion<R> {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points in a region.
    pub fn count_in(&self, region: &DomainRegion<R>) -> usize {
        self.points.iter().filter(|p| region.contains(**p)).count()
    }

    /// Apply a map to every point, enlarging the domain to a disk that
    /// contains the image if necessary.
    pub fn map_points<F: Fn(Point2<R>) -> Point2<R>>(&self, f: F) -> EnergyResult<Self> {
        let points: Vec<_> = self.points.iter().map(|&p| f(p)).collect();
        let domain = enclosing_domain(&points, &self.domain);
        PointConfiguration::new(points, domain)
    }
}

/// The given domain if it contains all points, otherwise a disk around the
/// domain center large enough to hold them.
pub(crate) fn enclosing_domain<R: Real>(
    points: &[Point2<R>],
    base: &DomainRegion<R>,
) -> DomainRegion<R> {
    if points.iter().all(|&p| base.contains(p)) {
        return *base;
    }
    let c = base.center();
    let mut r = match *base {
        DomainRegion::Disk { radius, .. } => radius,
        _ => base.bounding_box().1.dist(c),
    };
    for &p in points {
        r = r.max(p.dist(c) * (R::one() + R::of(1e-12)));
    }
    DomainRegion::Disk { center: c, radius: r }
}

/// Per-point smearing radii.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncationVector<R: Real> {
    pub radii: Vec<R>,
}

impl<R: Real> TruncationVector<R> {
    pub fn uniform(n: usize, eta: R) -> Self {
        TruncationVector { radii: vec![eta; n] }
    }

    pub fn scaled(&self, s: R) -> Self {
        TruncationVector { radii: self.radii.iter().map(|&r| r * s).collect() }
    }
}

/// Nearest-neighbor truncation: `eta(x) = s/4 * min(min_{y != x} |x-y|, 1)`,
/// with the empty inner minimum (single point) taken as 1.
pub fn nn_truncation<R: Real>(config: &PointConfiguration<R>, s: R) -> TruncationVector<R> {
    let pts = config.points();
    let n = pts.len();
    let quarter = R::of(0.25);
    let mut radii = vec![R::one(); n];
    for i in 0..n {
        let mut best = R::infinity();
        for j in 0..n {
            if i != j {
                let d = pts[i].dist_sq(pts[j]);
                if d < best {
                    best = d;
                }
            }
        }
        let nn = if best.is_infinite() { R::one() } else { best.sqrt().min(R::one()) };
        radii[i] = s * quarter * nn;
    }
    TruncationVector { radii }
}

/// Decomposition of the interaction energy into its three terms.
#[derive(Clone, Copy, Debug)]
pub struct EnergyBreakdown<R: Real> {
    /// `sum_{i<j} -log|x_i - x_j|`.
    pub pair_sum: R,
    /// `-sum_i h_m(x_i)` where `h_m` is the background potential.
    pub point_background: R,
    /// `1/2 * double-int -log|x-y| dm dm`.
    pub background_self: R,
    pub total: R,
}

/// `sum over entries of -log(dist)` computed as logs of 16-way products of
/// squared distances (mathematically identical, much cheaper than one log per
/// pair).
pub(crate) fn neg_log_dist_sum<R: Real>(from: Point2<R>, pts: &[Point2<R>], skip: usize) -> R {
    let mut total = R::zero();
    let mut product = R::one();
    let mut in_batch = 0u32;
    for (j, &q) in pts.iter().enumerate() {
        if j == skip {
            continue;
        }
        let d2 = from.dist_sq(q);
        product = product * d2;
        in_batch += 1;
        if in_batch == 16 || product < R::of(1e-120) || product > R::of(1e120) {
            total += product.ln();
            product = R::one();
            in_batch = 0;
        }
    }
    if in_batch > 0 {
        total += product.ln();
    }
    // Each factor was a squared distance: -sum log d = -(1/2) sum log d^2.
    total * R::of(-0.5)
}

/// The logarithmic interaction energy
/// `F = 1/2 * double-int_{x != y} -log|x-y| d(X - m)(x) d(X - m)(y)`,
/// expanded into pair, point-background, and background-self terms.
pub fn interaction_energy<R: Real>(
    config: &PointConfiguration<R>,
    bg: &BackgroundMeasure<R>,
) -> EnergyResult<EnergyBreakdown<R>> {
    let pts = config.points();
    if let Some(arc) = bg.arc() {
        for (index, p) in pts.iter().enumerate() {
            let on_circle = (p.dist(arc.center) - arc.radius).abs();
            if on_circle < R::of(1e-12) * arc.radius.max(R::one()) {
                return Err(EnergyError::SingularMeasureContact { index });
            }
        }
    }
    let mut pair_sum = R::zero();
    for i in 0..pts.len() {
        pair_sum += neg_log_dist_sum(pts[i], &pts[i + 1..], usize::MAX);
    }
    let mut point_background = R::zero();
    for &p in pts {
        point_background -= bg.potential(p);
    }
    let background_self = bg.self_energy();
    Ok(EnergyBreakdown {
        pair_sum,
        point_background,
        background_self,
        total: pair_sum + point_background + background_self,
    })
}

/// A test function for linear statistics.
#[derive(Clone)]
pub enum Field<R: Real> {
    /// Radially symmetric profile around a center, vanishing beyond `support`.
    Radial { center: Point2<R>, profile: Arc<dyn Fn(R) -> R + Send + Sync>, support: R },
    /// General function supported in the axis-aligned box `(lower, upper)`.
    General {
        f: Arc<dyn Fn(Point2<R>) -> R + Send + Sync>,
        lower: Point2<R>,
        upper: Point2<R>,
    },
    /// Indicator of a region.
    Indicator(DomainRegion<R>),
}

impl<R: Real> Field<R> {
    pub fn eval(&self, p: Point2<R>) -> R {
        match self {
            Field::Radial { center, profile, support } => {
                let r = p.dist(*center);
                if r <= *support {
                    profile(r)
                } else {
                    R::zero()
                }
            }
            Field::General { f, lower, upper } => {
                if p.x >= lower.x && p.x <= upper.x && p.y >= lower.y && p.y <= upper.y {
                    f(p)
                } else {
                    R::zero()
                }
            }
            Field::Indicator(region) => {
                if region.contains(p) {
                    R::one()
                } else {
                    R::zero()
                }
            }
        }
    }

    /// `int phi dm` against a background measure.
    pub fn integral_against(&self, bg: &BackgroundMeasure<R>) -> R {
        match self {
            Field::Indicator(region) => match region {
                DomainRegion::Disk { center, radius } => bg.mass_in_disk(*center, *radius),
                DomainRegion::Annulus { center, r_in, r_out } => {
                    bg.mass_in_disk(*center, *r_out) - bg.mass_in_disk(*center, *r_in)
                }
                _ => self.integral_general(bg),
            },
            Field::Radial { center, profile, support } => {
                // Ring decomposition with exact circle/region overlap angles.
                let c = *center;
                let f = profile.clone();
                let angular_mass = |r: R| -> R {
                    // Average density over the circle of radius r around c.
                    let region_angle = match bg.region() {
                        DomainRegion::Disk { center: rc, radius } => {
                            circle_in_disk_angle(c.dist(*rc), r, *radius)
                        }
                        _ => return R::nan(), // fall through to 2D quadrature below
                    };
                    let hole_angle = match bg.hole() {
                        Some(DomainRegion::Disk { center: hc, radius }) => {
                            circle_in_disk_angle(c.dist(*hc), r, *radius)
                        }
                        Some(DomainRegion::Annulus { center: hc, r_in, r_out }) => {
                            circle_in_disk_angle(c.dist(*hc), r, *r_out)
                                - circle_in_disk_angle(c.dist(*hc), r, *r_in)
                        }
                        _ => R::zero(),
                    };
                    let mut lin = bg.base_density() * (region_angle - hole_angle);
                    if let Some(rad) = bg.radial() {
                        let d = c.dist(bg.region().center());
                        if d < R::of(1e-12) {
                            let rr = r;
                            if rr >= rad.support.0 && rr <= rad.support.1 {
                                lin += (rad.delta)(rr) * (region_angle - hole_angle);
                            }
                        } else {
                            return R::nan();
                        }
                    }
                    lin * r
                };
                let probe = angular_mass(*support * R::of(0.5));
                if probe.is_nan() {
                    return self.integral_general(bg);
                }
                // Radii beyond the measure's reach contribute nothing.
                let reach = match bg.region() {
                    DomainRegion::Disk { center: rc, radius } => c.dist(*rc) + *radius,
                    _ => *support,
                };
                let mut v = crate::quad::integrate_panels(
                    |r: R| f(r) * angular_mass(r),
                    R::zero(),
                    support.min(reach),
                    32,
                    R::of(1e-9),
                );
                if let Some(arc) = bg.arc() {
                    let radius = arc.radius;
                    let ac = arc.center;
                    match &arc.density {
                        ArcDensity::Uniform(l) => {
                            let lam = *l;
                            v += integrate(
                                |th: R| {
                                    let p = ac + Point2::from_polar(radius, th);
                                    lam * radius * self.eval(p)
                                },
                                R::zero(),
                                R::TAU(),
                                R::of(1e-9),
                            );
                        }
                        ArcDensity::Varying { density, .. } => {
                            let density = density.clone();
                            v += integrate(
                                |th: R| {
                                    let p = ac + Point2::from_polar(radius, th);
                                    density(th) * radius * self.eval(p)
                                },
                                R::zero(),
                                R::TAU(),
                                R::of(1e-9),
                            );
                        }
                    }
                }
                v
            }
            Field::General { .. } => self.integral_general(bg),
        }
    }

    fn integral_general(&self, bg: &BackgroundMeasure<R>) -> R {
        let (lo, hi) = match self {
            Field::General { lower, upper, .. } => (*lower, *upper),
            _ => bg.region().bounding_box(),
        };
        let (blo, bhi) = bg.region().bounding_box();
        let lo = Point2::new(lo.x.max(blo.x), lo.y.max(blo.y));
        let hi = Point2::new(hi.x.min(bhi.x), hi.y.min(bhi.y));
        let mut v = integrate_rect(
            |p: Point2<R>| self.eval(p) * bg.density_at(p),
            lo,
            hi,
            R::of(1e-8),
        );
        if let Some(arc) = bg.arc() {
            let radius = arc.radius;
            let ac = arc.center;
            let line = |th: R| match &arc.density {
                ArcDensity::Uniform(l) => *l,
                ArcDensity::Varying { density, .. } => density(th),
            };
            v += integrate(
                |th: R| {
                    let p = ac + Point2::from_polar(radius, th);
                    line(th) * radius * self.eval(p)
                },
                R::zero(),
                R::TAU(),
                R::of(1e-9),
            );
        }
        v
    }
}

/// Fluctuation of the linear statistic of `phi`:
/// `sum_i phi(x_i) - int phi dm`.
pub fn fluctuation<R: Real>(
    config: &PointConfiguration<R>,
    bg: &BackgroundMeasure<R>,
    phi: &Field<R>,
) -> R {
    let sum: R = config.points().iter().map(|&p| phi.eval(p)).sum();
    sum - phi.integral_against(bg)
}
