//! Exact beta = 2 oracle: eigenvalues of an iid complex Gaussian matrix,
//! rescaled so the limiting density is 1 on the disk of radius `sqrt(N/pi)`.
//!
//! Two routes produce the same eigenvalue law:
//! - dense: draw the N x N matrix and eigendecompose it;
//! - hessenberg: draw the Hessenberg form of that matrix directly. Each
//!   Householder step of the reduction maps the untouched block to fresh iid
//!   Gaussians, so the reduced matrix has iid CN(0,1) entries on and above
//!   the diagonal and independent `sqrt(Gamma(n-1-k, 1))` subdiagonals; only
//!   the O(n^3) reduction work is skipped, not the QR eigenvalue computation.
//!
//! The dense route is used up to `DENSE_LIMIT` points; above it the
//! Hessenberg route keeps large oracle runs tractable.

use faer::complex_native::c64;
use faer::dyn_stack::{GlobalPodBuffer, PodStack};
use faer::linalg::evd::hessenberg_cplx_evd::{multishift_qr, multishift_qr_req, EvdParams};
use faer::{Mat, Parallelism};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Gamma, StandardNormal};

use crate::energy::PointConfiguration;
use crate::geom::{DomainRegion, Point2};

use super::{SamplerError, SamplerResult};

const DENSE_LIMIT: usize = 512;

/// Sample the Ginibre ensemble with `n` eigenvalues in density-1 scaling.
pub fn ginibre_sample(n: usize, seed: u64) -> SamplerResult<PointConfiguration<f64>> {
    if n <= DENSE_LIMIT {
        ginibre_sample_dense(n, seed)
    } else {
        ginibre_sample_hessenberg(n, seed)
    }
}

/// Dense route: eigenvalues of the full iid complex Gaussian matrix.
pub fn ginibre_sample_dense(n: usize, seed: u64) -> SamplerResult<PointConfiguration<f64>> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = 0.5f64.sqrt();
    let m = Mat::<c64>::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64::new(re * s, im * s)
    });
    let ev = m.eigenvalues::<c64>();
    finish(n, ev)
}

/// Hessenberg route: draw the reduction of the dense matrix in distribution,
/// then run the multishift QR eigenvalue algorithm on it.
pub fn ginibre_sample_hessenberg(n: usize, seed: u64) -> SamplerResult<PointConfiguration<f64>> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..3 {
        let mut a = sample_hessenberg(n, &mut rng);
        let mut w = Mat::<c64>::zeros(n, 1);
        let params = EvdParams::default();
        let mut buf = GlobalPodBuffer::new(
            multishift_qr_req::<c64>(n, n, false, false, Parallelism::None, params)
                .map_err(|e| SamplerError::Numeric(format!("workspace sizing failed: {e:?}")))?,
        );
        let (err, _, _) = multishift_qr(
            false,
            a.as_mut(),
            None,
            w.as_mut().col_mut(0),
            0,
            n,
            f64::EPSILON,
            f64::MIN_POSITIVE,
            Parallelism::None,
            PodStack::new(&mut buf),
            params,
        );
        if err == 0 {
            let ev: Vec<c64> = (0..n).map(|i| w[(i, 0)]).collect();
            return finish(n, ev);
        }
        // Retry with a fresh stream; non-convergence is astronomically rare.
        let _ = attempt;
    }
    Err(SamplerError::Numeric("QR eigenvalue iteration failed to converge".into()))
}

fn check_n(n: usize) -> SamplerResult<()> {
    if n == 0 {
        return Err(SamplerError::InvalidParameter("n must be >= 1".into()));
    }
    Ok(())
}

fn sample_hessenberg(n: usize, rng: &mut ChaCha8Rng) -> Mat<c64> {
    let s = 0.5f64.sqrt();
    let mut m = Mat::<c64>::zeros(n, n);
    for i in 0..n {
        if i > 0 {
            // |v|^2 of a CN(0,1)^(n-i) vector is Gamma(n-i, 1).
            let g = Gamma::new((n - i) as f64, 1.0).expect("valid shape");
            let x: f64 = g.sample(rng);
            m[(i, i - 1)] = c64::new(x.sqrt(), 0.0);
        }
        for j in i..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            m[(i, j)] = c64::new(re * s, im * s);
        }
    }
    m
}

fn finish(n: usize, ev: Vec<c64>) -> SamplerResult<PointConfiguration<f64>> {
    if ev.len() != n || ev.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SamplerError::Numeric("eigendecomposition produced bad values".into()));
    }
    // Variance-1 entries spread eigenvalues over the disk of radius sqrt(n);
    // dividing by sqrt(pi) gives limiting density 1 on radius sqrt(n/pi).
    let scale = std::f64::consts::PI.sqrt().recip();
    let points: Vec<Point2<f64>> =
        ev.iter().map(|z| Point2::new(z.re * scale, z.im * scale)).collect();
    let nominal = (n as f64 / std::f64::consts::PI).sqrt();
    let mut radius = nominal;
    for p in &points {
        radius = radius.max(p.norm() * (1.0 + 1e-12));
    }
    let domain = DomainRegion::Disk { center: Point2::zero(), radius };
    Ok(PointConfiguration::new(points, domain)?)
}
