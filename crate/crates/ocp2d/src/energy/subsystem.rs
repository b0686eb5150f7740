//! Sub-system machinery: the harmonic external potential felt inside a family
//! of disks, and the decomposition of the inter-disk interaction into its
//! monopole (discrepancy product) approximation plus the conditional
//! independence error.

use crate::geom::{DomainRegion, Point2, WellSeparatedFamily};
use crate::real::Real;

use super::{
    neg_log_dist_sum, uniform_disk_potential, BackgroundMeasure, EnergyError, EnergyResult,
    PointConfiguration,
};

/// Logarithmic potential generated by the system outside the holes,
/// evaluated at a point `x` inside one of them:
/// `V(x) = sum_{y in Ext} -log|x-y| - [h_region(x) - sum_i h_hole_i(x)]`.
/// All background terms are Newton disk potentials, so `V` is harmonic in
/// each hole.
pub fn external_potential<R: Real>(
    exterior_points: &PointConfiguration<R>,
    exterior_bg: &BackgroundMeasure<R>,
    holes: &[DomainRegion<R>],
    x: Point2<R>,
) -> EnergyResult<R> {
    if !exterior_bg.is_plain_uniform() {
        return Err(EnergyError::InvalidParameter(
            "external potentials are defined for uniform backgrounds".into(),
        ));
    }
    let mut in_hole = false;
    for h in holes {
        match h {
            DomainRegion::Disk { .. } => {
                if h.contains(x) {
                    in_hole = true;
                }
            }
            _ => {
                return Err(EnergyError::InvalidParameter("holes must be disks".into()));
            }
        }
    }
    if !in_hole {
        return Err(EnergyError::Domain(
            "evaluation point must lie inside one of the holes".into(),
        ));
    }
    for (index, p) in exterior_points.points().iter().enumerate() {
        if holes.iter().any(|h| h.contains(*p)) {
            return Err(EnergyError::Domain(format!(
                "exterior point {index} lies inside a hole"
            )));
        }
    }

    let point_part = neg_log_dist_sum(x, exterior_points.points(), usize::MAX);

    let rho = exterior_bg.base_density();
    let mut bg_part = match *exterior_bg.region() {
        DomainRegion::Disk { center, radius } => rho * uniform_disk_potential(radius, x - center),
        _ => {
            return Err(EnergyError::InvalidParameter(
                "external potentials require a disk-shaped total region".into(),
            ))
        }
    };
    for h in holes {
        if let DomainRegion::Disk { center, radius } = *h {
            bg_part -= rho * uniform_disk_potential(radius, x - center);
        }
    }
    Ok(point_part - bg_part)
}

/// The split of the true inter-subsystem interaction into the monopole
/// approximation and the conditional-independence error.
#[derive(Clone, Debug)]
pub struct SubsystemInteraction<R: Real> {
    /// `Int = 1/2 sum_{i != j} double-int over Lambda_i x Lambda_j of
    /// -log|x-y| df df`.
    pub true_interaction: R,
    /// `1/2 sum_{i != j} -D_i D_j log|omega_i - omega_j|`.
    pub monopole_approximation: R,
    /// `|Int - monopole|`.
    pub conditional_independence_error: R,
    /// Discrepancy of the configuration in each disk.
    pub discrepancies: Vec<R>,
}

/// Compute the interaction decomposition for a family of disjoint disks
/// inside a uniform background. Point-point terms are exact sums; the
/// point-background and background-background terms are exact Newton disk
/// potentials because disjoint disks see each other as point masses.
pub fn subsystem_interaction<R: Real>(
    config: &PointConfiguration<R>,
    bg: &BackgroundMeasure<R>,
    family: &WellSeparatedFamily<R>,
) -> EnergyResult<SubsystemInteraction<R>> {
    if !bg.is_plain_uniform() {
        return Err(EnergyError::InvalidParameter(
            "subsystem interactions are computed for uniform backgrounds".into(),
        ));
    }
    let t = family.disk_radius;
    let n_disks = family.len();
    for i in 0..n_disks {
        for j in (i + 1)..n_disks {
            if !(family.pair_distances[i][j] > R::zero()) {
                return Err(EnergyError::Geometry(format!("disks {i} and {j} overlap")));
            }
        }
    }
    let region = bg.region();
    for (i, &c) in family.disk_centers.iter().enumerate() {
        if region.boundary_distance(c) < t {
            return Err(EnergyError::Geometry(format!(
                "disk {i} is not contained in the background region"
            )));
        }
    }

    let rho = bg.base_density();
    let disk_mass = rho * R::PI() * t * t;
    let pts = config.points();

    // Partition the points over the disks.
    let mut members: Vec<Vec<Point2<R>>> = vec![Vec::new(); n_disks];
    for &p in pts {
        for (i, &c) in family.disk_centers.iter().enumerate() {
            if p.dist_sq(c) <= t * t {
                members[i].push(p);
                break;
            }
        }
    }
    let discrepancies: Vec<R> =
        members.iter().map(|m| R::of(m.len() as f64) - disk_mass).collect();

    let mut true_interaction = R::zero();
    let mut monopole = R::zero();
    for i in 0..n_disks {
        for j in (i + 1)..n_disks {
            let ci = family.disk_centers[i];
            let cj = family.disk_centers[j];
            let log_cc = ci.dist(cj).ln();
            // Point-point.
            let mut pair = R::zero();
            for &p in &members[i] {
                pair += neg_log_dist_sum(p, &members[j], usize::MAX);
            }
            // Point-background: each point of Lambda_i sees the uniform disk
            // Lambda_j as a point mass at its center (Newton), and vice versa.
            let mut cross = R::zero();
            for &p in &members[i] {
                cross -= rho * uniform_disk_potential(t, p - cj);
            }
            for &q in &members[j] {
                cross -= rho * uniform_disk_potential(t, q - ci);
            }
            // Background-background.
            let bgbg = disk_mass * disk_mass * (-log_cc);
            true_interaction += pair + cross + bgbg;
            monopole += -discrepancies[i] * discrepancies[j] * log_cc;
        }
    }

    Ok(SubsystemInteraction {
        true_interaction,
        monopole_approximation: monopole,
        conditional_independence_error: (true_interaction - monopole).abs(),
        discrepancies,
    })
}
