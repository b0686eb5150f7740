//! Independent quadrature oracles for the energy module: the analytic disk
//! potentials and the assembled interaction energy are checked against
//! adaptive 2D quadrature of the defining integrals.

use ocp2d::energy::{
    electric_energy, interaction_energy, nn_truncation, uniform_disk_potential,
    BackgroundMeasure, PointConfiguration,
};
use ocp2d::geom::{DomainRegion, Point2};
use ocp2d::quad::integrate_disk;
use ocp2d::sampler::poisson_sample;

#[test]
fn disk_potential_agrees_with_2d_quadrature() {
    for (radius, x) in [
        (1.0, Point2::new(0.0, 0.0)),
        (1.0, Point2::new(0.4, 0.2)),
        (1.0, Point2::new(2.0, 0.0)),
        (2.5, Point2::new(1.0, -1.4)),
    ] {
        let oracle = integrate_disk(
            |y: Point2<f64>| -y.dist(x).max(1e-300).ln(),
            Point2::zero(),
            radius,
            1e-9,
        );
        let analytic = uniform_disk_potential(radius, x);
        assert!(
            (oracle - analytic).abs() < 1e-6 * analytic.abs().max(1.0),
            "radius {radius}, x {x:?}: {oracle} vs {analytic}"
        );
    }
}

#[test]
fn empty_config_energy_is_background_self_energy() {
    // F(empty, m) is the background self-interaction; oracle by nested disk
    // quadrature at modest tolerance.
    let radius = 1.0f64;
    let region = DomainRegion::disk(Point2::zero(), radius).unwrap();
    let bg = BackgroundMeasure::uniform(region, 1.0).unwrap();
    let cfg = PointConfiguration::new(vec![], region).unwrap();
    let e = interaction_energy(&cfg, &bg).unwrap();
    let oracle = 0.5
        * integrate_disk(
            |x: Point2<f64>| {
                integrate_disk(|y: Point2<f64>| -y.dist(x).max(1e-300).ln(), Point2::zero(), radius, 1e-7)
            },
            Point2::zero(),
            radius,
            1e-5,
        );
    assert!(
        (e.total - oracle).abs() < 1e-4 * oracle.abs().max(1.0),
        "{} vs {oracle}",
        e.total
    );
}

#[test]
fn random_config_energy_matches_quadrature_oracle() {
    // Five points on the unit-area disk: assemble F directly from the
    // defining double integral, expanding by hand with 2D quadrature for the
    // background terms.
    let radius = (1.0f64 / std::f64::consts::PI).sqrt();
    let region = DomainRegion::disk(Point2::zero(), radius).unwrap();
    let bg = BackgroundMeasure::uniform(region, 1.0).unwrap();
    let pts = vec![
        Point2::new(0.1, 0.05),
        Point2::new(-0.2, 0.1),
        Point2::new(0.25, -0.18),
        Point2::new(-0.05, -0.3),
        Point2::new(0.0, 0.31),
    ];
    let cfg = PointConfiguration::new(pts.clone(), region).unwrap();
    let e = interaction_energy(&cfg, &bg).unwrap();

    let mut pair = 0.0;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            pair += -pts[i].dist(pts[j]).ln();
        }
    }
    let mut cross = 0.0;
    for &p in &pts {
        cross -= integrate_disk(
            |y: Point2<f64>| -y.dist(p).max(1e-300).ln(),
            Point2::zero(),
            radius,
            1e-8,
        );
    }
    let self_term = 0.5
        * integrate_disk(
            |x: Point2<f64>| {
                integrate_disk(|y: Point2<f64>| -y.dist(x).max(1e-300).ln(), Point2::zero(), radius, 1e-7)
            },
            Point2::zero(),
            radius,
            1e-5,
        );
    let oracle = pair + cross + self_term;
    assert!(
        (e.total - oracle).abs() < 5e-4 * oracle.abs().max(1.0),
        "{} vs {oracle}",
        e.total
    );
}

#[test]
fn truncation_rescaling_matches_point_count() {
    // (Ener_s - Ener) / (2 pi) = -Pts log s, exact when no background mass
    // sits inside the smearing annuli (the other kernels are harmonic
    // gradients there, so the cross terms vanish by Green's identity); the
    // grid quadrature must reproduce it within 1% at h = 0.02.
    let domain = DomainRegion::disk(Point2::zero(), 2.0).unwrap();
    let sample = poisson_sample(1.0, domain, 3).unwrap();
    // Keep a minimum separation: tiny smearing radii turn the rim cells of
    // the quadrature into the dominant error.
    let mut pts: Vec<Point2<f64>> = Vec::new();
    for &p in sample.points() {
        if p.norm() < 1.6 && pts.iter().all(|q| q.dist(p) > 0.35) {
            pts.push(p);
        }
    }
    assert!(pts.len() >= 4, "need a few interior points");
    let cfg = PointConfiguration::new(pts, domain).unwrap();
    let bg = BackgroundMeasure::zero(domain);
    let full = nn_truncation(&cfg, 1.0);
    let s = 0.5;
    let halved = full.scaled(s);
    let omega = domain;
    let e_full = electric_energy(&cfg, &bg, &full, &omega, 0.02).unwrap();
    let e_half = electric_energy(&cfg, &bg, &halved, &omega, 0.02).unwrap();
    let per_point = (e_half - e_full) / std::f64::consts::TAU;
    let expect = -(cfg.len() as f64) * s.ln();
    assert!(
        (per_point - expect).abs() < 0.01 * expect,
        "quadrature {per_point} vs analytic {expect}"
    );
}

#[test]
fn truncation_rescaling_with_background_needs_smearing_correction() {
    // With a unit background the exact relation carries the smearing term:
    // Ener_s - Ener = -2 pi N log s - 2 pi^2 rho (1 - s^2) sum eta_i^2.
    let bg = BackgroundMeasure::<f64>::neutralizing_disk(12);
    let domain = *bg.region();
    let sample = poisson_sample(1.0, domain, 3).unwrap();
    let radius = match domain {
        DomainRegion::Disk { radius, .. } => radius,
        _ => unreachable!(),
    };
    let pts: Vec<Point2<f64>> =
        sample.points().iter().copied().filter(|p| p.norm() < radius - 0.3).collect();
    let cfg = PointConfiguration::new(pts, domain).unwrap();
    let full = nn_truncation(&cfg, 1.0);
    let s = 0.5f64;
    let halved = full.scaled(s);
    let e_full = electric_energy(&cfg, &bg, &full, &domain, 0.02).unwrap();
    let e_half = electric_energy(&cfg, &bg, &halved, &domain, 0.02).unwrap();
    let eta_sq: f64 = full.radii.iter().map(|&e| e * e).sum();
    let pi = std::f64::consts::PI;
    let expect = -std::f64::consts::TAU * cfg.len() as f64 * s.ln()
        - 2.0 * pi * pi * (1.0 - s * s) * eta_sq;
    assert!(
        (e_half - e_full - expect).abs() < 0.01 * expect.abs(),
        "{} vs {expect}",
        e_half - e_full
    );
}

#[test]
fn ginibre_variance_per_radius_is_roughly_constant() {
    // Var(Pts in D(0,R)) / R approximately constant for the beta = 2 oracle.
    use ocp2d::sampler::ginibre_sample;
    use ocp2d::stats::number_variance;
    let n = 500usize;
    let samples: Vec<_> = (0..80).map(|s| ginibre_sample(n, 9000 + s).unwrap()).collect();
    let radii = [3.0, 6.0];
    let curve = number_variance(&samples, Point2::zero(), &radii, 0.15).unwrap();
    let c0 = curve.variance[0] / radii[0];
    let c1 = curve.variance[1] / radii[1];
    let ratio = (c0 / c1).max(c1 / c0);
    assert!(ratio < 2.2, "Var/R ratio {ratio} ({c0} vs {c1})");
    // And dramatically sub-Poissonian.
    assert!(curve.variance[1] < 0.3 * std::f64::consts::PI * radii[1] * radii[1]);
}
