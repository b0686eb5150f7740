//! Discrepancy and number-variance estimation, hyperuniformity scaling fits,
//! discrepancy-cornering diagnostics, tail estimation, and the empirical
//! inequality audits (local laws, well-spread event, Wegner ratios, a priori
//! fluctuation bound).

use std::sync::Arc;

use thiserror::Error;

use crate::energy::{
    electric_energy, fluctuation, nn_truncation, BackgroundMeasure, EnergyError, Field,
    PointConfiguration,
};
use crate::geom::{DomainRegion, Point2};
use crate::quad::{integrate_panels, smoothstep5, smoothstep5_deriv};
use crate::real::Real;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

pub type StatsResult<T> = Result<T, StatsError>;

/// Discrepancy against the unit background: `Pts(X, Omega) - |Omega|`.
pub fn discrepancy<R: Real>(config: &PointConfiguration<R>, omega: &DomainRegion<R>) -> R {
    R::of(config.count_in(omega) as f64) - omega.area()
}

/// Discrepancy against a general background: `Pts(X, Omega) - m(Omega)`.
pub fn discrepancy_with<R: Real>(
    config: &PointConfiguration<R>,
    bg: &BackgroundMeasure<R>,
    omega: &DomainRegion<R>,
) -> R {
    let mass = match *omega {
        DomainRegion::Disk { center, radius } => bg.mass_in_disk(center, radius),
        DomainRegion::Annulus { center, r_in, r_out } => {
            bg.mass_in_disk(center, r_out) - bg.mass_in_disk(center, r_in)
        }
        _ => Field::Indicator(*omega).integral_against(bg),
    };
    R::of(config.count_in(omega) as f64) - mass
}

/// Number-variance curve over a family of disk radii.
#[derive(Clone, Debug)]
pub struct VarianceCurve<R: Real> {
    pub radii: Vec<R>,
    pub variance: Vec<R>,
    pub stderr: Vec<R>,
    pub ess: Vec<R>,
    pub n_samples: usize,
    pub center_policy: String,
    /// Whether `dist(D(center, R), boundary) >= delta sqrt(N)` held per radius.
    pub bulk_ok: Vec<bool>,
}

/// Unbiased sample variance of `Pts(X, D(center, R))` per radius, with
/// jackknife-over-blocks standard errors (block length from the integrated
/// autocorrelation time) and autocorrelation-aware effective sample sizes.
pub fn number_variance<R: Real>(
    samples: &[PointConfiguration<R>],
    center: Point2<R>,
    radii: &[R],
    bulk_delta: R,
) -> StatsResult<VarianceCurve<R>> {
    if samples.len() < 2 {
        return Err(StatsError::InvalidParameter("need at least 2 samples".into()));
    }
    for w in radii.windows(2) {
        if !(w[0] < w[1]) {
            return Err(StatsError::InvalidParameter("radii must be strictly increasing".into()));
        }
    }
    // Bulk condition relative to the first sample's domain.
    let domain = samples[0].domain();
    let (boundary_gap, n_scale) = match *domain {
        DomainRegion::Disk { center: dc, radius } => {
            let gap = radius - center.dist(dc);
            (gap, R::PI() * radius * radius)
        }
        _ => (R::infinity(), R::one()),
    };
    let margin = bulk_delta * n_scale.sqrt();
    let bulk_ok: Vec<bool> = radii.iter().map(|&r| boundary_gap - r >= margin).collect();

    // Counts per radius, using one sorted distance array per sample.
    let mut counts: Vec<Vec<R>> = vec![Vec::with_capacity(samples.len()); radii.len()];
    for s in samples {
        let mut d: Vec<R> = s.points().iter().map(|p| p.dist(center)).collect();
        d.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        for (i, &r) in radii.iter().enumerate() {
            let c = d.partition_point(|&x| x <= r);
            counts[i].push(R::of(c as f64));
        }
    }

    let mut variance = Vec::with_capacity(radii.len());
    let mut stderr = Vec::with_capacity(radii.len());
    let mut ess = Vec::with_capacity(radii.len());
    for series in &counts {
        let (var, se, neff) = variance_with_jackknife(series);
        variance.push(var);
        stderr.push(se);
        ess.push(neff);
    }
    Ok(VarianceCurve {
        radii: radii.to_vec(),
        variance,
        stderr,
        ess,
        n_samples: samples.len(),
        center_policy: format!("fixed center ({}, {})", center.x, center.y),
        bulk_ok,
    })
}

fn mean<R: Real>(x: &[R]) -> R {
    x.iter().copied().sum::<R>() / R::of(x.len() as f64)
}

/// Unbiased variance, jackknife-over-blocks stderr, effective sample size.
fn variance_with_jackknife<R: Real>(x: &[R]) -> (R, R, R) {
    let n = x.len();
    let m = mean(x);
    let mut ss = R::zero();
    for &v in x {
        ss += (v - m) * (v - m);
    }
    let var = ss / R::of((n - 1) as f64);

    let tau = integrated_autocorr_time(x);
    let neff = R::of(n as f64) / (R::of(2.0) * tau).max(R::one());

    // Block length ~ 2 tau, at least 1; at least 8 blocks.
    let block = (tau.as_f64() * 2.0).ceil().max(1.0) as usize;
    let n_blocks = (n / block).max(2).min(n);
    let block = n / n_blocks;
    let mut estimates = Vec::with_capacity(n_blocks);
    for b in 0..n_blocks {
        let lo = b * block;
        let hi = if b + 1 == n_blocks { n } else { lo + block };
        // Delete-one-block variance estimate.
        let kept: Vec<R> =
            x.iter().enumerate().filter(|(i, _)| *i < lo || *i >= hi).map(|(_, &v)| v).collect();
        if kept.len() < 2 {
            continue;
        }
        let mk = mean(&kept);
        let mut s = R::zero();
        for &v in &kept {
            s += (v - mk) * (v - mk);
        }
        estimates.push(s / R::of((kept.len() - 1) as f64));
    }
    let bn = estimates.len();
    let se = if bn < 2 {
        R::zero()
    } else {
        let me = mean(&estimates);
        let mut s = R::zero();
        for &e in &estimates {
            s += (e - me) * (e - me);
        }
        (s * R::of((bn - 1) as f64) / R::of(bn as f64)).sqrt()
    };
    (var, se, neff)
}

/// Integrated autocorrelation time `1/2 + sum rho_k`, truncated at the first
/// small or negative correlation.
pub fn integrated_autocorr_time<R: Real>(x: &[R]) -> R {
    let n = x.len();
    if n < 8 {
        return R::of(0.5);
    }
    let m = mean(x);
    let mut c0 = R::zero();
    for &v in x {
        c0 += (v - m) * (v - m);
    }
    if c0 == R::zero() {
        return R::of(0.5);
    }
    let mut tau = R::of(0.5);
    for k in 1..(n / 3) {
        let mut ck = R::zero();
        for i in 0..(n - k) {
            ck += (x[i] - m) * (x[i + k] - m);
        }
        let rho = ck / c0;
        if rho < R::of(0.05) {
            break;
        }
        tau += rho;
    }
    tau
}

/// Effective sample size of a scalar series.
pub fn effective_sample_size<R: Real>(x: &[R]) -> R {
    R::of(x.len() as f64) / (R::of(2.0) * integrated_autocorr_time(x)).max(R::one())
}

/// Power-law fit `Var ~ c R^gamma` by least squares in log-log coordinates.
#[derive(Clone, Copy, Debug)]
pub struct ScalingFit<R: Real> {
    pub gamma: R,
    pub amplitude: R,
    /// Root-mean-square log residual.
    pub residual: R,
    pub gamma_stderr: R,
}

pub fn scaling_fit<R: Real>(curve: &VarianceCurve<R>) -> StatsResult<ScalingFit<R>> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&r, &v) in curve.radii.iter().zip(&curve.variance) {
        if v > R::zero() {
            xs.push(r.ln());
            ys.push(v.ln());
        }
    }
    let n = xs.len();
    if n < 3 {
        return Err(StatsError::Fit(format!(
            "need at least 3 positive variance entries, have {n}"
        )));
    }
    let nx = R::of(n as f64);
    let mx = mean(&xs);
    let my = mean(&ys);
    let mut sxx = R::zero();
    let mut sxy = R::zero();
    for i in 0..n {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    let gamma = sxy / sxx;
    let intercept = my - gamma * mx;
    let mut ss_res = R::zero();
    for i in 0..n {
        let e = ys[i] - (intercept + gamma * xs[i]);
        ss_res += e * e;
    }
    let dof = R::of((n - 2).max(1) as f64);
    let gamma_stderr = (ss_res / dof / sxx).sqrt();
    Ok(ScalingFit {
        gamma,
        amplitude: intercept.exp(),
        residual: (ss_res / nx).sqrt(),
        gamma_stderr,
    })
}

/// The discrepancy profile `r -> Dis(X, D(center, r))` on a radius grid.
pub fn discrepancy_profile<R: Real>(
    config: &PointConfiguration<R>,
    center: Point2<R>,
    r_grid: &[R],
) -> StatsResult<Vec<(R, R)>> {
    for w in r_grid.windows(2) {
        if !(w[0] < w[1]) {
            return Err(StatsError::InvalidParameter("r_grid must be increasing".into()));
        }
    }
    let mut d: Vec<R> = config.points().iter().map(|p| p.dist(center)).collect();
    d.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    Ok(r_grid
        .iter()
        .map(|&r| {
            let c = d.partition_point(|&x| x <= r);
            (r, R::of(c as f64) - R::PI() * r * r)
        })
        .collect())
}

/// Output of the constructive annulus-capture search.
#[derive(Clone, Debug)]
pub struct AnnulusCapture<R: Real> {
    pub k: u64,
    pub annulus: DomainRegion<R>,
    pub captured: R,
}

/// Constructive search: if `|Dis(D_R)| >= eps R` while some radius
/// `r in [R-2L, R-L]` carries less than half of it, find the smallest grid
/// index `k` (radii `r_k = R - 2L + k L / R^2`) whose outer annulus captures
/// at least a quarter of it. Returns `None` when the discrepancy is spread
/// out (the complementary event).
pub fn annulus_capture<R: Real>(
    config: &PointConfiguration<R>,
    center: Point2<R>,
    big_r: R,
    l: R,
    eps: R,
) -> StatsResult<Option<AnnulusCapture<R>>> {
    if !(big_r > R::of(2.0) * l && l > R::zero() && eps > R::zero()) {
        return Err(StatsError::InvalidParameter(
            "need R > 2L and positive L, eps".into(),
        ));
    }
    let mut dists: Vec<R> = config.points().iter().map(|p| p.dist(center)).collect();
    dists.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let dis = |r: R| -> R {
        let c = dists.partition_point(|&x| x <= r);
        R::of(c as f64) - R::PI() * r * r
    };
    let total = dis(big_r);
    let target = eps * big_r;
    let lo = big_r - R::of(2.0) * l;
    let hi = big_r - l;
    let quarter = target * R::of(0.25);

    // Extremum of Dis over [lo, hi]: it drifts by -2 pi r dr between point
    // radii and jumps +1 at them, so scanning the endpoints and the values
    // just below each point radius is exact.
    let mut probes: Vec<R> = vec![hi];
    for &d in &dists {
        if d > lo && d <= hi {
            probes.push(d * (R::one() - R::of(1e-12)));
        }
    }

    if total >= target {
        let mut r_star: Option<R> = None;
        for &r in &probes {
            if dis(r) < target * R::of(0.5) {
                r_star = Some(match r_star {
                    Some(cur) => cur.min(r),
                    None => r,
                });
            }
        }
        let Some(r_star) = r_star else { return Ok(None) };
        let step = l / (big_r * big_r);
        let k_max = ((r_star - lo) / step).floor().as_f64() as u64;
        for k in 0..=k_max {
            let rk = lo + step * R::of(k as f64);
            let captured = total - dis(rk);
            if captured >= quarter {
                let annulus = DomainRegion::annulus(center, rk, big_r)
                    .map_err(|e| StatsError::InvalidParameter(e.to_string()))?;
                return Ok(Some(AnnulusCapture { k, annulus, captured }));
            }
        }
        Ok(None)
    } else if total <= -target {
        // Mirror case: a default of points; take r_k slightly larger than a
        // radius where the deficit is mild.
        let mut r_star: Option<R> = None;
        for &r in &probes {
            if dis(r) > -target * R::of(0.5) {
                r_star = Some(match r_star {
                    Some(cur) => cur.max(r),
                    None => r,
                });
            }
        }
        let Some(r_star) = r_star else { return Ok(None) };
        let step = l / (big_r * big_r);
        let k_min = ((r_star - lo) / step).ceil().as_f64() as u64;
        let k_max = ((hi - lo) / step).floor().as_f64() as u64;
        for k in k_min..=k_max {
            let rk = lo + step * R::of(k as f64);
            let captured = total - dis(rk);
            if captured <= -quarter {
                let annulus = DomainRegion::annulus(center, rk, big_r)
                    .map_err(|e| StatsError::InvalidParameter(e.to_string()))?;
                return Ok(Some(AnnulusCapture { k, annulus, captured }));
            }
        }
        Ok(None)
    } else {
        Ok(None)
    }
}

/// Empirical exceedance probabilities with Wilson confidence intervals.
#[derive(Clone, Debug)]
pub struct TailEstimate<R: Real> {
    pub thresholds: Vec<R>,
    pub exceed_prob: Vec<R>,
    pub wilson_ci: Vec<(R, R)>,
    pub n_samples: usize,
}

/// Wilson score interval at confidence `z` standard normal quantiles.
pub fn wilson_interval<R: Real>(successes: usize, n: usize, z: R) -> (R, R) {
    if n == 0 {
        return (R::zero(), R::one());
    }
    let nf = R::of(n as f64);
    let p = R::of(successes as f64) / nf;
    let z2 = z * z;
    let denom = R::one() + z2 / nf;
    let center = (p + z2 / (R::of(2.0) * nf)) / denom;
    let half = (z / denom) * (p * (R::one() - p) / nf + z2 / (R::of(4.0) * nf * nf)).sqrt();
    ((center - half).max(R::zero()), (center + half).min(R::one()))
}

/// Exceedance probabilities of `|Dis(X, Omega)|` over a family of samples.
pub fn tail_estimate<R: Real>(
    samples: &[PointConfiguration<R>],
    omega: &DomainRegion<R>,
    thresholds: &[R],
) -> StatsResult<TailEstimate<R>> {
    if samples.len() < 100 {
        return Err(StatsError::InvalidParameter("need at least 100 samples".into()));
    }
    let values: Vec<R> = samples.iter().map(|s| discrepancy(s, omega).abs()).collect();
    let n = values.len();
    let z = R::of(1.96);
    let mut exceed_prob = Vec::with_capacity(thresholds.len());
    let mut wilson_ci = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        let hits = values.iter().filter(|&&v| v >= t).count();
        exceed_prob.push(R::of(hits as f64 / n as f64));
        wilson_ci.push(wilson_interval(hits, n, z));
    }
    Ok(TailEstimate { thresholds: thresholds.to_vec(), exceed_prob, wilson_ci, n_samples: n })
}

/// One audited region of the local-law diagnostic.
#[derive(Clone, Debug)]
pub struct LocalLawRow<R: Real> {
    pub square: DomainRegion<R>,
    pub pts_exceed_freq: R,
    pub ener_exceed_freq: R,
    /// The reference tail `exp(-l^2 / C_beta)`.
    pub reference_tail: R,
    /// Empirical `E[exp(beta Dis^2 / (C_beta l^2))]`.
    pub discrepancy_moment: R,
}

/// Empirical frequencies of `{Pts > C l^2}` and `{Ener > C l^2}` per square,
/// compared against `exp(-l^2/C)` (a diagnostic, not a proof).
pub fn local_law_audit<R: Real>(
    samples: &[PointConfiguration<R>],
    bg: &BackgroundMeasure<R>,
    squares: &[DomainRegion<R>],
    c_beta: R,
    beta: R,
    grid_h: R,
) -> StatsResult<Vec<LocalLawRow<R>>> {
    let mut rows = Vec::with_capacity(squares.len());
    for sq in squares {
        let DomainRegion::Square { side, .. } = *sq else {
            return Err(StatsError::InvalidParameter("local laws audit squares only".into()));
        };
        let l2 = side * side;
        let bound = c_beta * l2;
        let mut pts_hits = 0usize;
        let mut ener_hits = 0usize;
        let mut moment = R::zero();
        for s in samples {
            let pts = R::of(s.count_in(sq) as f64);
            if pts > bound {
                pts_hits += 1;
            }
            let trunc = nn_truncation(s, R::one());
            let ener = electric_energy(s, bg, &trunc, sq, grid_h)?;
            if ener > bound {
                ener_hits += 1;
            }
            let dis = pts - bg.mass_in(sq);
            moment += (beta * dis * dis / (c_beta * l2)).exp();
        }
        let n = R::of(samples.len() as f64);
        rows.push(LocalLawRow {
            square: *sq,
            pts_exceed_freq: R::of(pts_hits as f64) / n,
            ener_exceed_freq: R::of(ener_hits as f64) / n,
            reference_tail: (-l2 / c_beta).exp(),
            discrepancy_moment: moment / n,
        });
    }
    Ok(rows)
}

/// One lattice square of the well-spread check.
#[derive(Clone, Debug)]
pub struct WellSpreadRow<R: Real> {
    pub center: Point2<R>,
    pub pts: R,
    pub ener: R,
    pub ok: bool,
}

/// The well-spread event: every lattice square `square(x, l)`,
/// `x in (l Z)^2 ∩ Omega`, carries at most `K l^2` points and `K l^2`
/// electric energy (nearest-neighbor truncation).
pub fn wellspread_check<R: Real>(
    config: &PointConfiguration<R>,
    omega: &DomainRegion<R>,
    l: R,
    k: R,
    bg: &BackgroundMeasure<R>,
    grid_h: R,
) -> StatsResult<(bool, Vec<WellSpreadRow<R>>)> {
    if !(l >= R::one()) {
        return Err(StatsError::InvalidParameter("need l >= 1".into()));
    }
    if !(k >= R::of(10.0)) {
        return Err(StatsError::InvalidParameter("need K >= 10".into()));
    }
    let bound = k * l * l;
    let trunc = nn_truncation(config, R::one());
    let (lo, hi) = omega.bounding_box();
    let i0 = (lo.x / l).floor().as_f64() as i64;
    let i1 = (hi.x / l).ceil().as_f64() as i64;
    let j0 = (lo.y / l).floor().as_f64() as i64;
    let j1 = (hi.y / l).ceil().as_f64() as i64;
    let mut rows = Vec::new();
    let mut all_ok = true;
    for i in i0..=i1 {
        for j in j0..=j1 {
            let x = Point2::new(l * R::of(i as f64), l * R::of(j as f64));
            if !omega.contains(x) {
                continue;
            }
            let square = DomainRegion::Square { center: x, side: l };
            let pts = R::of(config.count_in(&square) as f64);
            let ener = electric_energy(config, bg, &trunc, &square, grid_h)?;
            let ok = pts <= bound && ener <= bound;
            all_ok &= ok;
            rows.push(WellSpreadRow { center: x, pts, ener, ok });
        }
    }
    Ok((all_ok, rows))
}

/// Wegner-style occupancy ratios `P(Pts(D(x,r)) >= 1) / r^2` per probe disk.
#[derive(Clone, Debug)]
pub struct WegnerRow<R: Real> {
    pub disk: DomainRegion<R>,
    pub hits: usize,
    pub probability: R,
    pub wilson_ci: (R, R),
    /// `probability / r^2`; bounded ratios are the expected behavior.
    pub ratio: R,
}

pub fn wegner_audit<R: Real>(
    samples: &[PointConfiguration<R>],
    disks: &[DomainRegion<R>],
) -> StatsResult<(R, Vec<WegnerRow<R>>)> {
    let n = samples.len();
    if n == 0 {
        return Err(StatsError::InvalidParameter("need samples".into()));
    }
    let z = R::of(1.96);
    let mut rows = Vec::with_capacity(disks.len());
    let mut max_ratio = R::zero();
    for d in disks {
        let DomainRegion::Disk { radius, .. } = *d else {
            return Err(StatsError::InvalidParameter("wegner audit uses disks".into()));
        };
        let hits = samples.iter().filter(|s| s.count_in(d) >= 1).count();
        let p = R::of(hits as f64 / n as f64);
        let ratio = p / (radius * radius);
        max_ratio = max_ratio.max(ratio);
        rows.push(WegnerRow {
            disk: *d,
            hits,
            probability: p,
            wilson_ci: wilson_interval(hits, n, z),
            ratio,
        });
    }
    Ok((max_ratio, rows))
}

/// A radial C1 plateau cut-off: 1 on `[0, inner]`, quintic smoothstep down to
/// 0 at `outer`. The ingredients of the a priori fluctuation bound are all
/// analytic or 1D quadratures for it.
#[derive(Clone, Debug)]
pub struct LipschitzBump<R: Real> {
    pub center: Point2<R>,
    pub inner: R,
    pub outer: R,
    pub height: R,
}

impl<R: Real> LipschitzBump<R> {
    pub fn new(center: Point2<R>, inner: R, outer: R, height: R) -> StatsResult<Self> {
        if !(inner >= R::zero() && inner < outer && height > R::zero()) {
            return Err(StatsError::InvalidParameter("need 0 <= inner < outer, height > 0".into()));
        }
        Ok(LipschitzBump { center, inner, outer, height })
    }

    pub fn value(&self, r: R) -> R {
        self.height * smoothstep5((self.outer - r) / (self.outer - self.inner))
    }

    pub fn derivative(&self, r: R) -> R {
        -self.height * smoothstep5_deriv((self.outer - r) / (self.outer - self.inner))
            / (self.outer - self.inner)
    }

    pub fn as_field(&self) -> Field<R> {
        let this = self.clone();
        Field::Radial {
            center: self.center,
            profile: Arc::new(move |r| this.value(r)),
            support: self.outer,
        }
    }

    /// `int |grad phi|^2` over the plane (1D radial quadrature).
    pub fn gradient_l2_sq(&self) -> R {
        let this = self.clone();
        integrate_panels(
            |r: R| {
                let d = this.derivative(r);
                d * d * R::TAU() * r
            },
            self.inner,
            self.outer,
            16,
            R::of(1e-10),
        )
    }

    /// Sup of `|grad phi|`: the quintic smoothstep has maximal slope 15/8.
    pub fn lipschitz_constant(&self) -> R {
        self.height * R::of(15.0 / 8.0) / (self.outer - self.inner)
    }

    /// A domain containing the 1-neighborhood of `supp grad phi`.
    pub fn gradient_neighborhood(&self) -> DomainRegion<R> {
        let pad = R::one();
        if self.inner > pad {
            DomainRegion::Annulus {
                center: self.center,
                r_in: self.inner - pad,
                r_out: self.outer + pad,
            }
        } else {
            DomainRegion::Disk { center: self.center, radius: self.outer + pad }
        }
    }
}

/// One evaluation of the a priori fluctuation bound
/// `|Fluct[phi]| <= ||grad phi||_2 (int_Omega |E_r|^2)^(1/2) + |phi|_{1,Omega} Pts(X, Omega)`
/// with a quadrature safety margin on the right-hand side.
#[derive(Clone, Copy, Debug)]
pub struct AprioriRow<R: Real> {
    pub lhs: R,
    pub rhs: R,
    pub margin: R,
    pub pass: bool,
}

pub fn apriori_audit<R: Real>(
    config: &PointConfiguration<R>,
    bg: &BackgroundMeasure<R>,
    phi: &LipschitzBump<R>,
    grid_h: R,
    margin: R,
) -> StatsResult<AprioriRow<R>> {
    let omega = phi.gradient_neighborhood();
    let lhs = fluctuation(config, bg, &phi.as_field()).abs();
    let trunc = nn_truncation(config, R::one());
    let ener = electric_energy(config, bg, &trunc, &omega, grid_h)?;
    let pts = R::of(config.count_in(&omega) as f64);
    let rhs = phi.gradient_l2_sq().sqrt() * ener.max(R::zero()).sqrt()
        + phi.lipschitz_constant() * pts;
    let rhs_m = rhs * (R::one() + margin);
    Ok(AprioriRow { lhs, rhs: rhs_m, margin, pass: lhs <= rhs_m })
}
