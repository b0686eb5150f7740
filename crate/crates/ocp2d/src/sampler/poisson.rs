//! Homogeneous Poisson point process on a region: the non-interacting
//! baseline whose number variance grows exactly like the area.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::energy::PointConfiguration;
use crate::geom::{DomainRegion, Point2};
use crate::real::Real;

use super::{SamplerError, SamplerResult};

/// Sample a Poisson process of the given intensity (points per unit area).
pub fn poisson_sample<R: Real>(
    intensity: R,
    region: DomainRegion<R>,
    seed: u64,
) -> SamplerResult<PointConfiguration<R>> {
    if !(intensity >= R::zero()) || !intensity.is_finite() {
        return Err(SamplerError::InvalidParameter(format!(
            "intensity {intensity} must be nonnegative"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = (intensity * region.area()).as_f64();
    let count = if mean == 0.0 {
        0
    } else {
        let pois = Poisson::new(mean)
            .map_err(|e| SamplerError::InvalidParameter(format!("bad Poisson mean: {e}")))?;
        pois.sample(&mut rng) as usize
    };
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        points.push(uniform_in_region(&region, &mut rng));
    }
    Ok(PointConfiguration::from_trusted(points, region))
}

/// Area-uniform draw by direct inversion (no rejection).
fn uniform_in_region<R: Real>(region: &DomainRegion<R>, rng: &mut ChaCha8Rng) -> Point2<R> {
    match *region {
        DomainRegion::Disk { center, radius } => {
            let r = radius * R::unit_uniform(rng).sqrt();
            let th = R::unit_uniform(rng) * R::TAU();
            center + Point2::from_polar(r, th)
        }
        DomainRegion::Square { center, side } => {
            let h = side * R::of(0.5);
            center + Point2::new(R::uniform(rng, -h, h), R::uniform(rng, -h, h))
        }
        DomainRegion::Annulus { center, r_in, r_out } => {
            let u = R::unit_uniform(rng);
            let r = (r_in * r_in + u * (r_out * r_out - r_in * r_in)).sqrt();
            let th = R::unit_uniform(rng) * R::TAU();
            center + Point2::from_polar(r, th)
        }
        DomainRegion::Box { center, r_in, r_out, angle_lo, angle_hi } => {
            let u = R::unit_uniform(rng);
            let r = (r_in * r_in + u * (r_out * r_out - r_in * r_in)).sqrt();
            let th = R::uniform(rng, angle_lo, angle_hi);
            center + Point2::from_polar(r, th)
        }
    }
}
