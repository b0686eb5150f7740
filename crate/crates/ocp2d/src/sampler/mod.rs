//! Markov-chain samplers for the full plasma Gibbs measure and for
//! sub-systems with an external potential, plus the exact beta = 2 oracle
//! (Ginibre eigenvalues) and the Poisson baseline.

mod ginibre;
mod poisson;

pub use ginibre::{ginibre_sample, ginibre_sample_dense, ginibre_sample_hessenberg};
pub use poisson::poisson_sample;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{
    neg_log_dist_sum, uniform_disk_potential, BackgroundMeasure, EnergyError, PointConfiguration,
};
use crate::geom::{DomainRegion, Point2};
use crate::real::Real;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("degenerate target measure: {0}")]
    DegenerateMeasure(String),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

pub type SamplerResult<T> = Result<T, SamplerError>;

/// Parameters of a Metropolis run. The ambient domain of the full model is
/// the disk of radius `sqrt(N/pi)` (unit background density).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SamplerConfig<R: Real> {
    pub beta: R,
    pub n_points: usize,
    pub proposal_scale: R,
    /// Total sweeps, burn-in included.
    pub sweeps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
}

impl<R: Real> SamplerConfig<R> {
    pub fn validate(&self) -> SamplerResult<()> {
        if !(self.beta > R::zero()) {
            return Err(SamplerError::InvalidParameter("beta must be > 0".into()));
        }
        if self.n_points == 0 {
            return Err(SamplerError::InvalidParameter("n_points must be >= 1".into()));
        }
        if !(self.proposal_scale > R::zero()) {
            return Err(SamplerError::InvalidParameter("proposal_scale must be > 0".into()));
        }
        if self.sweeps < self.burn_in {
            return Err(SamplerError::InvalidParameter("sweeps must be >= burn_in".into()));
        }
        if self.thin == 0 {
            return Err(SamplerError::InvalidParameter("thin must be >= 1".into()));
        }
        Ok(())
    }

    /// Domain of the full model in blown-up units.
    pub fn full_model_domain(&self) -> DomainRegion<R> {
        let radius = (R::of(self.n_points as f64) / R::PI()).sqrt();
        DomainRegion::Disk { center: Point2::zero(), radius }
    }
}

/// The single-particle structure of the target density
/// `exp(-beta (pair energy + sum_i one_body(x_i)))` restricted to `domain`
/// (hard confinement: proposals leaving the domain are rejected).
pub struct ChainModel<'a, R: Real> {
    pub beta: R,
    pub domain: DomainRegion<R>,
    pub one_body: Box<dyn Fn(Point2<R>) -> R + Sync + 'a>,
}

impl<'a, R: Real> ChainModel<'a, R> {
    /// Full 2DOCP model: unit background on the disk of radius `sqrt(N/pi)`.
    pub fn full_model(beta: R, n_points: usize) -> Self {
        let bg = BackgroundMeasure::<R>::neutralizing_disk(n_points);
        let domain = *bg.region();
        ChainModel { beta, domain, one_body: Box::new(move |p| -bg.potential(p)) }
    }
}

/// How a sub-system chain receives the influence of the rest of the system.
pub enum SubsystemTarget<'a, R: Real> {
    /// Uniform unit background on the disk plus an external potential acting
    /// on each particle.
    ExternalPotential { vext: &'a (dyn Fn(Point2<R>) -> R + Sync) },
    /// Equilibrium form: a background measure plus an optional confinement
    /// term `n * zeta(x)` per particle.
    Background {
        bg: &'a BackgroundMeasure<R>,
        confinement: Option<&'a (dyn Fn(Point2<R>) -> R + Sync)>,
    },
}

/// Mutable state of one chain, with the running pair-potential cache.
pub struct ChainState<R: Real> {
    positions: Vec<Point2<R>>,
    /// `pair_sums[i] = sum_{j != i} -log|x_i - x_j|`.
    pair_sums: Vec<R>,
    pair_total: R,
    one_body_values: Vec<R>,
    one_body_total: R,
    pub accepted: u64,
    pub proposed: u64,
    pub sweep_index: u64,
    pub proposal_scale: R,
    rng: ChaCha8Rng,
}

impl<R: Real> ChainState<R> {
    /// Draw the initial positions uniformly in the domain.
    pub fn init<'a>(model: &ChainModel<'a, R>, cfg: &SamplerConfig<R>) -> SamplerResult<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let (lo, hi) = model.domain.bounding_box();
        let mut positions = Vec::with_capacity(cfg.n_points);
        while positions.len() < cfg.n_points {
            let p = Point2::new(
                R::uniform(&mut rng, lo.x, hi.x),
                R::uniform(&mut rng, lo.y, hi.y),
            );
            if model.domain.contains(p) {
                positions.push(p);
            }
        }
        let mut state = ChainState {
            positions,
            pair_sums: vec![R::zero(); cfg.n_points],
            pair_total: R::zero(),
            one_body_values: vec![R::zero(); cfg.n_points],
            one_body_total: R::zero(),
            accepted: 0,
            proposed: 0,
            sweep_index: 0,
            proposal_scale: cfg.proposal_scale,
            rng,
        };
        state.rebuild_cache(model);
        let probe = (model.one_body)(model.domain.center());
        if !probe.is_finite() {
            return Err(SamplerError::DegenerateMeasure(
                "one-body potential is not finite at the domain center".into(),
            ));
        }
        Ok(state)
    }

    pub fn positions(&self) -> &[Point2<R>] {
        &self.positions
    }

    /// Interaction energy relative to the target (up to the configuration
    /// independent background self-energy): pair + one-body totals.
    pub fn energy(&self) -> R {
        self.pair_total + self.one_body_total
    }

    pub fn acceptance_rate(&self) -> R {
        if self.proposed == 0 {
            R::zero()
        } else {
            R::of(self.accepted as f64 / self.proposed as f64)
        }
    }

    fn rebuild_cache(&mut self, model: &ChainModel<'_, R>) {
        let n = self.positions.len();
        let half = R::of(0.5);
        let mut total = R::zero();
        for i in 0..n {
            let s = neg_log_dist_sum(self.positions[i], &self.positions, i);
            self.pair_sums[i] = s;
            total += s;
        }
        self.pair_total = total * half;
        self.one_body_total = R::zero();
        for i in 0..n {
            let u = (model.one_body)(self.positions[i]);
            self.one_body_values[i] = u;
            self.one_body_total += u;
        }
    }

    /// Relative disagreement between the incremental cache and a full
    /// recomputation (the cache is then refreshed).
    pub fn cache_check(&mut self, model: &ChainModel<'_, R>) -> R {
        let before = self.pair_total;
        let one_before = self.one_body_total;
        self.rebuild_cache(model);
        let scale = self.pair_total.abs().max(R::one());
        ((before - self.pair_total).abs() + (one_before - self.one_body_total).abs()) / scale
    }

    /// One sweep: `N` single-particle Gaussian proposals with Metropolis
    /// acceptance `min(1, exp(-beta dF))`; moves leaving the domain are
    /// rejected outright (hard confinement).
    pub fn metropolis_sweep(&mut self, model: &ChainModel<'_, R>) {
        let n = self.positions.len();
        for i in 0..n {
            self.proposed += 1;
            let old = self.positions[i];
            let step = Point2::new(
                R::std_normal(&mut self.rng) * self.proposal_scale,
                R::std_normal(&mut self.rng) * self.proposal_scale,
            );
            let cand = old + step;
            if !model.domain.contains(cand) {
                continue;
            }
            let s_new = neg_log_dist_sum(cand, &self.positions, i);
            let u_new = (model.one_body)(cand);
            let d_pair = s_new - self.pair_sums[i];
            let d_one = u_new - self.one_body_values[i];
            let d_f = d_pair + d_one;
            let accept = d_f <= R::zero() || {
                let u: R = R::unit_uniform(&mut self.rng);
                u < (-model.beta * d_f).exp()
            };
            if !accept {
                continue;
            }
            self.accepted += 1;
            // Incremental cache update: O(N) per accepted move.
            for j in 0..n {
                if j == i {
                    continue;
                }
                let q = self.positions[j];
                let ratio = old.dist_sq(q) / cand.dist_sq(q);
                self.pair_sums[j] += ratio.ln() * R::of(0.5);
            }
            self.pair_sums[i] = s_new;
            self.pair_total += d_pair;
            self.one_body_total += d_one;
            self.one_body_values[i] = u_new;
            self.positions[i] = cand;
        }
        self.sweep_index += 1;
    }

    /// Multiplicative proposal-scale adjustment toward 30-50% acceptance,
    /// applied only during burn-in.
    fn tune(&mut self, window_accepted: u64, window_proposed: u64, max_scale: R) {
        if window_proposed == 0 {
            return;
        }
        let rate = window_accepted as f64 / window_proposed as f64;
        if rate < 0.30 {
            self.proposal_scale = self.proposal_scale * R::of(0.9);
        } else if rate > 0.50 {
            self.proposal_scale = (self.proposal_scale * R::of(1.1)).min(max_scale);
        }
    }

    pub fn snapshot(&self, domain: DomainRegion<R>) -> PointConfiguration<R> {
        PointConfiguration::from_trusted(self.positions.clone(), domain)
    }
}

/// Output of a chain run.
pub struct ChainRun<R: Real> {
    pub samples: Vec<PointConfiguration<R>>,
    /// Pair + one-body energy after every sweep.
    pub energy_trace: Vec<R>,
    pub acceptance_rate: R,
    pub final_proposal_scale: R,
    /// Geweke-style z-score comparing early and late energy means (reported,
    /// not enforced).
    pub geweke_z: R,
    pub cache_error: R,
}

const CACHE_CHECK_EVERY: u64 = 128;

/// Drive a chain for `cfg.sweeps` sweeps, tuning during burn-in and
/// recording every `cfg.thin`-th sweep after burn-in.
pub fn run_chain<R: Real>(
    model: &ChainModel<'_, R>,
    cfg: &SamplerConfig<R>,
) -> SamplerResult<ChainRun<R>> {
    let mut state = ChainState::init(model, cfg)?;
    run_chain_from(model, cfg, &mut state)
}

/// As [`run_chain`] but continuing from an existing state (used by resume).
pub fn run_chain_from<R: Real>(
    model: &ChainModel<'_, R>,
    cfg: &SamplerConfig<R>,
    state: &mut ChainState<R>,
) -> SamplerResult<ChainRun<R>> {
    Ok(run_chain_with_stop(model, cfg, state, || false)?.0)
}

/// Interruptible variant: polls `stop` once per sweep and returns early
/// (with `true`) when it fires, leaving the state checkpointable.
pub fn run_chain_with_stop<R: Real, F: Fn() -> bool>(
    model: &ChainModel<'_, R>,
    cfg: &SamplerConfig<R>,
    state: &mut ChainState<R>,
    stop: F,
) -> SamplerResult<(ChainRun<R>, bool)> {
    cfg.validate()?;
    let max_scale = match model.domain {
        DomainRegion::Disk { radius, .. } => radius,
        _ => model.domain.bounding_box().1.dist(model.domain.bounding_box().0),
    };
    let mut samples = Vec::new();
    let mut energy_trace = Vec::with_capacity(cfg.sweeps);
    let mut window_accepted = 0u64;
    let mut window_proposed = 0u64;
    let mut cache_error = R::zero();
    let mut interrupted = false;
    let start = state.sweep_index;
    for sweep in (start as usize)..cfg.sweeps {
        if stop() {
            interrupted = true;
            break;
        }
        let (a0, p0) = (state.accepted, state.proposed);
        state.metropolis_sweep(model);
        window_accepted += state.accepted - a0;
        window_proposed += state.proposed - p0;
        let in_burn_in = sweep < cfg.burn_in;
        if in_burn_in && (sweep + 1) % 50 == 0 {
            state.tune(window_accepted, window_proposed, max_scale);
            window_accepted = 0;
            window_proposed = 0;
        }
        energy_trace.push(state.energy());
        if state.sweep_index % CACHE_CHECK_EVERY == 0 {
            let err = state.cache_check(model);
            cache_error = cache_error.max(err);
            if err > R::of(1e-9) {
                return Err(SamplerError::Numeric(format!(
                    "pair cache diverged from recomputation: relative error {err}"
                )));
            }
        }
        if !in_burn_in && (sweep + 1 - cfg.burn_in) % cfg.thin == 0 {
            samples.push(state.snapshot(model.domain));
        }
    }
    let geweke_z = geweke_score(&energy_trace[cfg.burn_in.min(energy_trace.len())..]);
    Ok((
        ChainRun {
            samples,
            energy_trace,
            acceptance_rate: state.acceptance_rate(),
            final_proposal_scale: state.proposal_scale,
            geweke_z,
            cache_error,
        },
        interrupted,
    ))
}

/// Geweke mean-comparison: first 10% vs last 50% of the trace, variances by
/// batch means.
pub fn geweke_score<R: Real>(trace: &[R]) -> R {
    let n = trace.len();
    if n < 40 {
        return R::zero();
    }
    let a = &trace[..n / 10];
    let b = &trace[n / 2..];
    let (ma, va) = batch_mean_var(a);
    let (mb, vb) = batch_mean_var(b);
    let denom = (va + vb).sqrt();
    if denom == R::zero() {
        return R::zero();
    }
    (ma - mb) / denom
}

fn batch_mean_var<R: Real>(x: &[R]) -> (R, R) {
    let n = x.len();
    let mean = x.iter().copied().sum::<R>() / R::of(n as f64);
    let b = (n as f64).sqrt() as usize;
    let nb = n / b.max(1);
    if nb < 2 {
        return (mean, R::one());
    }
    let mut means = Vec::with_capacity(nb);
    for k in 0..nb {
        let chunk = &x[k * b..(k + 1) * b];
        means.push(chunk.iter().copied().sum::<R>() / R::of(b as f64));
    }
    let mut var = R::zero();
    for m in &means {
        var += (*m - mean) * (*m - mean);
    }
    // Variance of the overall mean via batch means.
    (mean, var / R::of((nb * (nb - 1)) as f64))
}

/// Metropolis chain for a sub-system of `n` points in the disk `lambda`.
pub fn sample_subsystem<R: Real>(
    n: usize,
    lambda: DomainRegion<R>,
    target: SubsystemTarget<'_, R>,
    cfg: &SamplerConfig<R>,
) -> SamplerResult<ChainRun<R>> {
    let DomainRegion::Disk { center, radius } = lambda else {
        return Err(SamplerError::InvalidParameter("subsystem domain must be a disk".into()));
    };
    if n == 0 {
        return Err(SamplerError::InvalidParameter("n must be >= 1".into()));
    }
    let mut cfg = *cfg;
    cfg.n_points = n;
    let model = match target {
        SubsystemTarget::ExternalPotential { vext } => {
            let probes = [
                center,
                center + Point2::new(radius * R::of(0.3), R::zero()),
                center + Point2::new(R::zero(), -radius * R::of(0.5)),
            ];
            if probes.iter().all(|&p| !vext(p).is_finite()) {
                return Err(SamplerError::DegenerateMeasure(
                    "external potential is infinite everywhere probed".into(),
                ));
            }
            ChainModel {
                beta: cfg.beta,
                domain: lambda,
                one_body: Box::new(move |p: Point2<R>| {
                    -uniform_disk_potential(radius, p - center) + vext(p)
                }),
            }
        }
        SubsystemTarget::Background { bg, confinement } => {
            let bg = bg.clone();
            let n_r = R::of(n as f64);
            ChainModel {
                beta: cfg.beta,
                domain: lambda,
                one_body: Box::new(move |p: Point2<R>| {
                    let mut u = -bg.potential(p);
                    if let Some(zeta) = confinement {
                        u += n_r * zeta(p);
                    }
                    u
                }),
            }
        }
    };
    run_chain(&model, &cfg)
}

/// Serializable checkpoint; resume is bit-deterministic because both the
/// incremental cache and the counter-based RNG position are stored exactly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Checkpoint<R: Real> {
    pub version: u32,
    pub sweep_index: u64,
    pub positions: Vec<(R, R)>,
    pub pair_sums: Vec<R>,
    pub one_body_values: Vec<R>,
    pub pair_total: R,
    pub one_body_total: R,
    pub accepted: u64,
    pub proposed: u64,
    pub proposal_scale: R,
    pub rng_seed: [u8; 32],
    pub rng_stream: u64,
    pub rng_word_pos_lo: u64,
    pub rng_word_pos_hi: u64,
    pub cache_digest: u64,
}

impl<R: Real> ChainState<R> {
    pub fn checkpoint(&self) -> Checkpoint<R> {
        let word_pos = self.rng.get_word_pos();
        let positions: Vec<(R, R)> = self.positions.iter().map(|p| (p.x, p.y)).collect();
        let mut cp = Checkpoint {
            version: 1,
            sweep_index: self.sweep_index,
            positions,
            pair_sums: self.pair_sums.clone(),
            one_body_values: self.one_body_values.clone(),
            pair_total: self.pair_total,
            one_body_total: self.one_body_total,
            accepted: self.accepted,
            proposed: self.proposed,
            proposal_scale: self.proposal_scale,
            rng_seed: self.rng.get_seed(),
            rng_stream: self.rng.get_stream(),
            rng_word_pos_lo: (word_pos & u128::from(u64::MAX)) as u64,
            rng_word_pos_hi: (word_pos >> 64) as u64,
            cache_digest: 0,
        };
        cp.cache_digest = cp.digest();
        cp
    }

    pub fn resume(cp: &Checkpoint<R>) -> SamplerResult<Self> {
        if cp.version != 1 {
            return Err(SamplerError::InvalidParameter(format!(
                "unsupported checkpoint version {}",
                cp.version
            )));
        }
        let expect = cp.digest();
        if expect != cp.cache_digest {
            return Err(SamplerError::Numeric(format!(
                "checkpoint digest mismatch: stored {:#x}, recomputed {expect:#x}",
                cp.cache_digest
            )));
        }
        let mut rng = ChaCha8Rng::from_seed(cp.rng_seed);
        rng.set_stream(cp.rng_stream);
        rng.set_word_pos(u128::from(cp.rng_word_pos_hi) << 64 | u128::from(cp.rng_word_pos_lo));
        Ok(ChainState {
            positions: cp.positions.iter().map(|&(x, y)| Point2::new(x, y)).collect(),
            pair_sums: cp.pair_sums.clone(),
            pair_total: cp.pair_total,
            one_body_values: cp.one_body_values.clone(),
            one_body_total: cp.one_body_total,
            accepted: cp.accepted,
            proposed: cp.proposed,
            sweep_index: cp.sweep_index,
            proposal_scale: cp.proposal_scale,
            rng,
        })
    }
}

impl<R: Real> Checkpoint<R> {
    /// FNV-1a over the bit patterns of the cached state.
    pub fn digest(&self) -> u64 {
        let mut h = 0xcbf2_9ce4_8422_2325u64;
        let mut eat = |bits: u64| {
            for byte in bits.to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        for &(x, y) in &self.positions {
            eat(x.as_f64().to_bits());
            eat(y.as_f64().to_bits());
        }
        for &s in &self.pair_sums {
            eat(s.as_f64().to_bits());
        }
        eat(self.sweep_index);
        eat(self.proposal_scale.as_f64().to_bits());
        h
    }
}
