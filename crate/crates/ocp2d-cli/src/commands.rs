//! Implementations of the subcommands: each builds its inputs from the
//! config, drives the library, and emits CSV/JSON artifacts plus result
//! records into a fresh run directory.

use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use ocp2d::energy::{
    electric_energy, energy_identity_check, nn_truncation, subsystem_interaction,
    BackgroundMeasure, PointConfiguration,
};
use ocp2d::geom::{DomainRegion, Point2, WellSeparatedFamily};
use ocp2d::sampler::{
    ginibre_sample, poisson_sample, run_chain_with_stop, ChainModel, ChainRun, ChainState,
    SamplerConfig,
};
use ocp2d::spinwave::{
    averaging_error, flow_decomposition, flow_jacobian, h1_budget, spin_wave_divergence, det2,
    SpinWaveParams,
};
use ocp2d::stats::{
    apriori_audit, local_law_audit, number_variance, scaling_fit, tail_estimate, wegner_audit,
    wellspread_check, LipschitzBump, VarianceCurve,
};
use ocp2d::transport::{
    displacement_derivative_sup, perturbed_background, pushforward_check, transport_energy_delta,
    PerturbedMeasureParams, RadialTestFunction,
};
use ocp2d::Config;

use crate::config::{sha256_hex, ExperimentConfig};
use crate::output::{fmt, RunContext, RunMeta};
use crate::CliError;

/// SplitMix64 step, used to derive per-sample seeds from a base seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn sampler_config(cfg: &ExperimentConfig, seed: u64) -> Result<SamplerConfig<f64>, CliError> {
    let model = cfg.require_model()?;
    let sampler = cfg.require_sampler()?;
    Ok(SamplerConfig {
        beta: model.beta,
        n_points: model.n_points,
        proposal_scale: sampler.proposal_scale,
        sweeps: sampler.sweeps,
        burn_in: sampler.burn_in,
        thin: sampler.thin,
        seed,
    })
}

struct ChainOutput {
    seed: u64,
    run: ChainRun<f64>,
    checkpoint: ocp2d::sampler::Checkpoint<f64>,
    interrupted: bool,
}

/// Fan the full-model chains out over a small worker pool and return them
/// sorted by seed (a deterministic ordered reduction).
fn run_full_model_chains(
    cfg: &ExperimentConfig,
    seeds: &[u64],
    threads: usize,
    stop: &AtomicBool,
) -> Result<Vec<ChainOutput>, CliError> {
    let results: Mutex<Vec<ChainOutput>> = Mutex::new(Vec::new());
    let error: Mutex<Option<CliError>> = Mutex::new(None);
    let workers = threads.max(1).min(seeds.len().max(1));
    std::thread::scope(|scope| {
        let chunk = seeds.len().div_ceil(workers);
        for part in seeds.chunks(chunk.max(1)) {
            let results = &results;
            let error = &error;
            scope.spawn(move || {
                for &seed in part {
                    let out = (|| -> Result<ChainOutput, CliError> {
                        let scfg = sampler_config(cfg, seed)?;
                        let model = ChainModel::full_model(scfg.beta, scfg.n_points);
                        let mut state = ChainState::init(&model, &scfg)
                            .map_err(|e| CliError::Numeric(e.to_string()))?;
                        let (run, interrupted) =
                            run_chain_with_stop(&model, &scfg, &mut state, || {
                                stop.load(Ordering::Relaxed)
                            })
                            .map_err(|e| CliError::Numeric(e.to_string()))?;
                        Ok(ChainOutput { seed, run, checkpoint: state.checkpoint(), interrupted })
                    })();
                    match out {
                        Ok(v) => results.lock().unwrap().push(v),
                        Err(e) => {
                            error.lock().unwrap().get_or_insert(e);
                            return;
                        }
                    }
                }
            });
        }
    });
    if let Some(e) = error.into_inner().unwrap() {
        return Err(e);
    }
    let mut out = results.into_inner().unwrap();
    out.sort_by_key(|c| c.seed);
    Ok(out)
}

fn emit_chain_artifacts(ctx: &RunContext, chains: &[ChainOutput]) -> Result<(), CliError> {
    for c in chains {
        let rows: Vec<Vec<String>> = c
            .run
            .energy_trace
            .iter()
            .enumerate()
            .map(|(i, e)| vec![i.to_string(), fmt(*e)])
            .collect();
        ctx.write_csv(&format!("energy_trace-{}.csv", c.seed), "sweep,energy", &rows)?;
        ctx.write_json(&format!("checkpoint-{}.json", c.seed), &c.checkpoint)?;
        if let Some(last) = c.run.samples.last() {
            let rows: Vec<Vec<String>> =
                last.points().iter().map(|p| vec![fmt(p.x), fmt(p.y)]).collect();
            ctx.write_csv(&format!("final_positions-{}.csv", c.seed), "x,y", &rows)?;
        }
    }
    Ok(())
}

fn variance_rows(curve: &VarianceCurve<f64>) -> Vec<Vec<String>> {
    (0..curve.radii.len())
        .map(|i| {
            vec![
                fmt(curve.radii[i]),
                fmt(curve.variance[i]),
                fmt(curve.stderr[i]),
                fmt(curve.ess[i]),
            ]
        })
        .collect()
}

pub fn cmd_sample(
    cfg: &ExperimentConfig,
    ctx: &mut RunContext,
    seeds: &[u64],
    threads: usize,
    stop: &AtomicBool,
) -> Result<(), CliError> {
    let chains = run_full_model_chains(cfg, seeds, threads, stop)?;
    emit_chain_artifacts(ctx, &chains)?;
    ctx.beta = Some(cfg.require_model()?.beta);
    for c in &chains {
        ctx.interrupted |= c.interrupted;
        ctx.record(&format!("acceptance_rate[{}]", c.seed), c.run.acceptance_rate, 0.0, "1");
        ctx.record(&format!("geweke_z[{}]", c.seed), c.run.geweke_z, 0.0, "1");
        ctx.record(&format!("cache_error[{}]", c.seed), c.run.cache_error, 0.0, "1");
    }
    Ok(())
}

fn pooled_mcmc_samples(
    cfg: &ExperimentConfig,
    ctx: &mut RunContext,
    seeds: &[u64],
    threads: usize,
    stop: &AtomicBool,
) -> Result<Vec<Config>, CliError> {
    let chains = run_full_model_chains(cfg, seeds, threads, stop)?;
    let mut samples = Vec::new();
    for c in &chains {
        ctx.interrupted |= c.interrupted;
        ctx.record(&format!("acceptance_rate[{}]", c.seed), c.run.acceptance_rate, 0.0, "1");
        samples.extend(c.run.samples.iter().cloned());
    }
    emit_chain_artifacts(ctx, &chains)?;
    if samples.len() < 2 {
        return Err(CliError::Numeric("chains produced fewer than 2 samples".into()));
    }
    Ok(samples)
}

pub fn cmd_variance(
    cfg: &ExperimentConfig,
    ctx: &mut RunContext,
    seeds: &[u64],
    threads: usize,
    stop: &AtomicBool,
) -> Result<(), CliError> {
    let stats = cfg.require_statistics()?.clone();
    if stats.radii.len() < 2 {
        return Err(CliError::Config("[statistics] radii needs at least 2 entries".into()));
    }
    let model = *cfg.require_model()?;
    let samples = pooled_mcmc_samples(cfg, ctx, seeds, threads, stop)?;
    let center = Point2::new(stats.center[0], stats.center[1]);
    let curve = number_variance(&samples, center, &stats.radii, model.bulk_delta)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    ctx.write_csv("variance.csv", "R,var,stderr,ess", &variance_rows(&curve))?;
    ctx.beta = Some(model.beta);
    match scaling_fit(&curve) {
        Ok(fit) => {
            ctx.record("gamma", fit.gamma, fit.gamma_stderr, "1");
            ctx.record("amplitude", fit.amplitude, 0.0, "1");
            ctx.record("fit_residual", fit.residual, 0.0, "1");
        }
        Err(e) => ctx.record_note(&format!("scaling fit unavailable: {e}")),
    }
    ctx.record("n_samples", curve.n_samples as f64, 0.0, "count");
    Ok(())
}

pub fn cmd_ginibre(
    cfg: &ExperimentConfig,
    ctx: &mut RunContext,
    seeds: &[u64],
    stop: &AtomicBool,
) -> Result<(), CliError> {
    let g = cfg
        .ginibre
        .ok_or_else(|| CliError::Config("missing [ginibre] section".into()))?;
    let stats = cfg.require_statistics()?.clone();
    if stats.radii.len() < 4 {
        return Err(CliError::Config("[statistics] radii needs at least 4 entries".into()));
    }
    let mut samples = Vec::with_capacity(seeds.len() * g.n_samples);
    for &seed in seeds {
        for i in 0..g.n_samples {
            if stop.load(Ordering::Relaxed) {
                ctx.interrupted = true;
                break;
            }
            samples.push(
                ginibre_sample(g.n_points, derive_seed(seed, i as u64))
                    .map_err(|e| CliError::Numeric(e.to_string()))?,
            );
        }
    }
    if samples.len() < 2 {
        return Err(CliError::Numeric("not enough samples before interruption".into()));
    }
    let bulk_delta = cfg.model.map_or(0.15, |m| m.bulk_delta);
    let center = Point2::new(stats.center[0], stats.center[1]);
    let curve = number_variance(&samples, center, &stats.radii, bulk_delta)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    ctx.write_csv("variance.csv", "R,var,stderr,ess", &variance_rows(&curve))?;
    ctx.beta = Some(2.0);
    let fit = scaling_fit(&curve).map_err(|e| CliError::Numeric(e.to_string()))?;
    ctx.record("gamma", fit.gamma, fit.gamma_stderr, "1");
    ctx.record("n_samples", samples.len() as f64, 0.0, "count");
    Ok(())
}

pub fn cmd_poisson(
    cfg: &ExperimentConfig,
    ctx: &mut RunContext,
    seeds: &[u64],
    stop: &AtomicBool,
) -> Result<(), CliError> {
    let p = cfg
        .poisson
        .clone()
        .ok_or_else(|| CliError::Config("missing [poisson] section".into()))?;
    let stats = cfg.require_statistics()?.clone();
    if stats.radii.len() < 3 {
        return Err(CliError::Config("[statistics] radii needs at least 3 entries".into()));
    }
    let mut samples = Vec::with_capacity(seeds.len() * p.n_samples);
    for &seed in seeds {
        for i in 0..p.n_samples {
            if stop.load(Ordering::Relaxed) {
                ctx.interrupted = true;
                break;
            }
            samples.push(
                poisson_sample(p.intensity, p.region, derive_seed(seed, i as u64))
                    .map_err(|e| CliError::Numeric(e.to_string()))?,
            );
        }
    }
    let center = Point2::new(stats.center[0], stats.center[1]);
    let curve = number_variance(&samples, center, &stats.radii, 0.0)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    ctx.write_csv("variance.csv", "R,var,stderr,ess", &variance_rows(&curve))?;
    let fit = scaling_fit(&curve).map_err(|e| CliError::Numeric(e.to_string()))?;
    ctx.record("gamma", fit.gamma, fit.gamma_stderr, "1");
    ctx.record("n_samples", samples.len() as f64, 0.0, "count");
    Ok(())
}

pub fn cmd_tails(
    cfg: &ExperimentConfig,
    ctx: &mut RunContext,
    seeds: &[u64],
    threads: usize,
    stop: &AtomicBool,
) -> Result<(), CliError> {
    let stats = cfg.require_statistics()?.clone();
    if stats.thresholds.is_empty() {
        return Err(CliError::Config("[statistics] thresholds must be nonempty".into()));
    }
    let model = *cfg.require_model()?;
    let samples = pooled_mcmc_samples(cfg, ctx, seeds, threads, stop)?;
    let region = match stats.tail_region {
        Some(r) => r,
        None => {
            let radius = stats
                .radii
                .last()
                .copied()
                .ok_or_else(|| CliError::Config("need tail_region or radii".into()))?;
            DomainRegion::disk(Point2::new(stats.center[0], stats.center[1]), radius)
                .map_err(|e| CliError::Config(e.to_string()))?
        }
    };
    let est = tail_estimate(&samples, &region, &stats.thresholds)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let rows: Vec<Vec<String>> = (0..est.thresholds.len())
        .map(|i| {
            vec![
                fmt(est.thresholds[i]),
                fmt(est.exceed_prob[i]),
                fmt(est.wilson_ci[i].0),
                fmt(est.wilson_ci[i].1),
            ]
        })
        .collect();
    ctx.write_csv("tails.csv", "threshold,p,lo,hi", &rows)?;
    ctx.beta = Some(model.beta);
    ctx.record("n_samples", est.n_samples as f64, 0.0, "count");
    Ok(())
}

pub fn cmd_errorci(
    cfg: &ExperimentConfig,
    ctx: &mut RunContext,
    seeds: &[u64],
) -> Result<(), CliError> {
    let section = cfg
        .errorci
        .clone()
        .ok_or_else(|| CliError::Config("missing [errorci] section".into()))?;
    if section.t_sweep.is_empty() {
        return Err(CliError::Config("[errorci] t_sweep must be nonempty".into()));
    }
    let mut rows = Vec::new();
    let mut fitted = Vec::new();
    for &t in &section.t_sweep {
        let mut max_ratio: f64 = 0.0;
        for (inst, &seed) in (0..section.n_instances).zip(seeds.iter().cycle()) {
            let rng_seed = derive_seed(seed, inst as u64);
            let instance = random_subsystem_instance(
                t,
                section.min_subsystems,
                section.max_subsystems,
                rng_seed,
                inst % 3 == 2,
            )?;
            let (config, bg, family) = instance;
            let s = subsystem_interaction(&config, &bg, &family)
                .map_err(|e| CliError::Numeric(e.to_string()))?;
            let sums =
                ocp2d::geom::distance_sums(&family).map_err(|e| CliError::Numeric(e.to_string()))?;
            let bound_shape = t.powi(5) * sums.total_inv;
            let ratio = s.conditional_independence_error / bound_shape;
            max_ratio = max_ratio.max(ratio);
            rows.push(vec![
                "errorci".to_string(),
                format!("T{t}-i{inst}"),
                fmt(s.conditional_independence_error),
                fmt(bound_shape),
                fmt(ratio),
                fmt(0.0),
                "true".to_string(),
            ]);
        }
        fitted.push((t, max_ratio));
        ctx.record(&format!("errorci_constant[T={t}]"), max_ratio, 0.0, "1");
    }
    ctx.write_csv(
        "energy_audits.csv",
        "check_name,instance_id,lhs,rhs,residual,tolerance,pass",
        &rows,
    )?;
    let ratios: Vec<f64> = fitted.iter().map(|&(_, c)| c).collect();
    let spread = ratios.iter().cloned().fold(0.0f64, f64::max)
        / ratios.iter().cloned().fold(f64::INFINITY, f64::min).max(1e-300);
    ctx.record("errorci_constant_spread", spread, 0.0, "1");
    Ok(())
}

/// A random well-separated instance: `k` disks of radius `t` spread around a
/// ring with separation at least 10T, each filled with a unit-density Poisson
/// cloud (with occasional deliberately crowded disks to exercise the
/// worst-case count bound).
pub fn random_subsystem_instance(
    t: f64,
    min_k: usize,
    max_k: usize,
    seed: u64,
    crowded: bool,
) -> Result<(Config, BackgroundMeasure<f64>, WellSeparatedFamily<f64>), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = min_k + (rng.gen::<u64>() as usize) % (max_k - min_k + 1);
    let ring = 14.0 * t * k as f64 / std::f64::consts::TAU * 2.0;
    let mut centers: Vec<Point2<f64>> = Vec::new();
    let mut guard = 0;
    while centers.len() < k {
        guard += 1;
        if guard > 10_000 {
            return Err(CliError::Numeric("could not place separated disks".into()));
        }
        let c = Point2::from_polar(
            ring * (0.6 + 0.4 * rng.gen::<f64>()),
            rng.gen::<f64>() * std::f64::consts::TAU,
        );
        if centers.iter().all(|&o| o.dist(c) >= 12.0 * t + 2.0 * t) {
            centers.push(c);
        }
    }
    let region_radius = 3.0 * ring + 20.0 * t;
    let region = DomainRegion::disk(Point2::zero(), region_radius)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let bg = BackgroundMeasure::uniform(region, 1.0).map_err(|e| CliError::Numeric(e.to_string()))?;
    let mut pts: Vec<Point2<f64>> = Vec::new();
    let cap = (10.0 * t * t) as usize;
    for (i, &c) in centers.iter().enumerate() {
        // Crowded instances exercise the worst case of the bound: every disk
        // is filled toward the 10 T^2 count cap, with the points piled into
        // an off-center sub-disk so discrepancies and dipoles carry the
        // maximal T powers.
        let (disk, lambda) = if crowded {
            let dir = Point2::from_polar(t * 0.5, 2.4 * i as f64);
            let sub = DomainRegion::disk(c + dir, t * 0.5)
                .map_err(|e| CliError::Numeric(e.to_string()))?;
            (sub, 9.0 * t * t / (std::f64::consts::PI * (t * 0.5) * (t * 0.5)))
        } else {
            (DomainRegion::disk(c, t).map_err(|e| CliError::Numeric(e.to_string()))?, 1.0)
        };
        for attempt in 0..64u64 {
            let cloud =
                poisson_sample(lambda, disk, derive_seed(seed, 1000 + i as u64 + 7919 * attempt))
                    .map_err(|e| CliError::Numeric(e.to_string()))?;
            if cloud.len() <= cap {
                pts.extend_from_slice(cloud.points());
                break;
            }
        }
    }
    let config =
        PointConfiguration::new(pts, region).map_err(|e| CliError::Numeric(e.to_string()))?;
    let family = WellSeparatedFamily::from_disk_centers(centers, t)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    Ok((config, bg, family))
}

#[derive(serde::Serialize)]
struct SpinwaveReport {
    divergence_max: f64,
    area_error_max: f64,
    psi_bound_violations: usize,
    h1_budget: f64,
    erravet_slope: f64,
}

pub fn cmd_spinwave_check(cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<(), CliError> {
    let s = cfg
        .spinwave_check
        .ok_or_else(|| CliError::Config("missing [spinwave_check] section".into()))?;
    let params =
        SpinWaveParams::new(s.epsilon, s.ell).map_err(|e| CliError::Config(e.to_string()))?;
    if params.support_radius() > 500.0 {
        return Err(CliError::Config(format!(
            "flow support radius {} is too large for a desk-scale check",
            params.support_radius()
        )));
    }
    let seed = ctx.seeds.first().copied().unwrap_or(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sup = params.outer_radius() * 2.0;
    let mut divergence_max: f64 = 0.0;
    for _ in 0..1000 {
        let x = Point2::from_polar(
            rng.gen::<f64>() * sup,
            rng.gen::<f64>() * std::f64::consts::TAU,
        );
        divergence_max =
            divergence_max.max(spin_wave_divergence(&params, x, 1e-4 * x.norm().max(1.0)).abs());
    }
    let mut area_error_max: f64 = 0.0;
    let mut psi_bound_violations = 0usize;
    for _ in 0..200 {
        let x = Point2::from_polar(
            rng.gen::<f64>() * params.support_radius() * 1.1,
            rng.gen::<f64>() * std::f64::consts::TAU,
        );
        let j = flow_jacobian(&params, s.t, x, 1e-5 * params.ell)
            .map_err(|e| CliError::Numeric(e.to_string()))?;
        area_error_max = area_error_max.max((det2(&j) - 1.0).abs());
        let d = flow_decomposition(&params, s.t, x)
            .map_err(|e| CliError::Numeric(e.to_string()))?;
        if !d.psi_bound_ok {
            psi_bound_violations += 1;
        }
    }
    let budget = h1_budget(&params);

    // Averaging-error scaling across a small t sweep on Poisson samples.
    let domain = DomainRegion::disk(Point2::zero(), params.support_radius() + 2.0)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let bg = BackgroundMeasure::uniform(domain, 1.0).map_err(|e| CliError::Numeric(e.to_string()))?;
    let ts = [0.05 * params.ell / 10.0, 0.1 * params.ell / 10.0, 0.2 * params.ell / 10.0];
    let mut meds: Vec<f64> = Vec::new();
    for &t in &ts {
        let mut vals = Vec::new();
        for i in 0..5 {
            let sample = poisson_sample(1.0, domain, derive_seed(seed, 40 + i))
                .map_err(|e| CliError::Numeric(e.to_string()))?;
            let cfg_pts = PointConfiguration::new(sample.points().to_vec(), domain)
                .map_err(|e| CliError::Numeric(e.to_string()))?;
            let e = averaging_error(&params, t, &cfg_pts, &bg)
                .map_err(|e| CliError::Numeric(e.to_string()))?;
            vals.push(e.abs());
        }
        vals.sort_by(f64::total_cmp);
        meds.push(vals[vals.len() / 2]);
    }
    let slope = (meds[2].max(1e-300) / meds[0].max(1e-300)).ln() / (ts[2] / ts[0]).ln();
    let report = SpinwaveReport {
        divergence_max,
        area_error_max,
        psi_bound_violations,
        h1_budget: budget.value,
        erravet_slope: slope,
    };
    ctx.write_json("spinwave_check.json", &report)?;
    ctx.record("divergence_max", report.divergence_max, 0.0, "1");
    ctx.record("area_error_max", report.area_error_max, 0.0, "1");
    ctx.record("h1_budget", report.h1_budget, 0.0, "1");
    ctx.record("erravet_slope", report.erravet_slope, 0.0, "1");
    Ok(())
}

#[derive(serde::Serialize)]
struct TransportReport {
    ks_stat: f64,
    psi1_fit: f64,
    mass_residual: f64,
    energy_delta_slope: f64,
}

pub fn cmd_transport_check(cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<(), CliError> {
    let s = cfg
        .transport_check
        .ok_or_else(|| CliError::Config("missing [transport_check] section".into()))?;
    let phi = RadialTestFunction::plateau(s.phi_inner, s.phi_outer, s.phi_height)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let params = PerturbedMeasureParams::new(s.s, s.beta, phi)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let seed = ctx.seeds.first().copied().unwrap_or(1);
    let push = pushforward_check(&params, s.n_samples, seed)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let psi1 = displacement_derivative_sup(&params)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let psi1_fit = psi1 / (s.s.abs().max(1e-300) * params.phi.norm2());
    let domain = DomainRegion::disk(Point2::zero(), s.phi_outer + 3.0)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let m0 = BackgroundMeasure::uniform(domain, 1.0).map_err(|e| CliError::Numeric(e.to_string()))?;
    let ms =
        perturbed_background(&params, domain).map_err(|e| CliError::Numeric(e.to_string()))?;
    let mass_residual = (ms.mass() - m0.mass()).abs();
    // Three-point slope of the energy delta in s around 0.
    let sample = poisson_sample(1.0, domain, derive_seed(seed, 7))
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let cloud = PointConfiguration::new(sample.points().to_vec(), domain)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let h = s.s.abs().min(params.s_cap() * 0.5).max(1e-3);
    let plus = PerturbedMeasureParams::new(h, s.beta, params.phi.clone())
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let minus = PerturbedMeasureParams::new(-h, s.beta, params.phi.clone())
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let dp = transport_energy_delta(&cloud, &plus).map_err(|e| CliError::Numeric(e.to_string()))?;
    let dm =
        transport_energy_delta(&cloud, &minus).map_err(|e| CliError::Numeric(e.to_string()))?;
    let report = TransportReport {
        ks_stat: push.ks_stat,
        psi1_fit,
        mass_residual,
        energy_delta_slope: (dp - dm) / (2.0 * h),
    };
    ctx.write_json("transport_check.json", &report)?;
    ctx.record("ks_stat", report.ks_stat, 0.0, "1");
    ctx.record("ks_threshold", push.threshold, 0.0, "1");
    ctx.record("psi1_fit", report.psi1_fit, 0.0, "1");
    ctx.record("mass_residual", report.mass_residual, 0.0, "1");
    ctx.record("energy_delta_slope", report.energy_delta_slope, 0.0, "1");
    if !push.pass {
        return Err(CliError::AuditFailure(format!(
            "pushforward KS {} over threshold {}",
            push.ks_stat, push.threshold
        )));
    }
    Ok(())
}

pub fn cmd_audit(
    cfg: &ExperimentConfig,
    ctx: &mut RunContext,
    seeds: &[u64],
) -> Result<(), CliError> {
    let a = cfg
        .audit
        .clone()
        .ok_or_else(|| CliError::Config("missing [audit] section".into()))?;
    let model = *cfg.require_model()?;
    let seed = seeds.first().copied().unwrap_or(1);

    // Samples of the audited ensemble.
    let mut samples: Vec<Config> = Vec::with_capacity(a.n_samples);
    let bg = BackgroundMeasure::neutralizing_disk(model.n_points);
    let domain = *bg.region();
    for i in 0..a.n_samples {
        let s = derive_seed(seed, i as u64);
        let sample = match a.source.as_str() {
            "poisson" => poisson_sample(1.0, domain, s)
                .map_err(|e| CliError::Numeric(e.to_string()))?,
            "ginibre" => ginibre_sample(model.n_points, s)
                .map_err(|e| CliError::Numeric(e.to_string()))?,
            other => {
                return Err(CliError::Config(format!("unknown audit source {other:?}")));
            }
        };
        samples.push(sample);
    }

    let mut audit_rows: Vec<Vec<String>> = Vec::new();
    let mut energy_rows: Vec<Vec<String>> = Vec::new();
    let mut failed = 0usize;

    // A priori fluctuation bound over every sample.
    let radius = match domain {
        DomainRegion::Disk { radius, .. } => radius,
        _ => unreachable!(),
    };
    let bump = LipschitzBump::new(Point2::zero(), radius * 0.25, radius * 0.6, 1.0)
        .map_err(|e| CliError::Config(e.to_string()))?;
    for (i, s) in samples.iter().enumerate() {
        let s_bg = BackgroundMeasure::uniform(*s.domain(), 1.0)
            .map_err(|e| CliError::Numeric(e.to_string()))?;
        let row = apriori_audit(s, &s_bg, &bump, a.grid_h, 0.02)
            .map_err(|e| CliError::Numeric(e.to_string()))?;
        if !row.pass {
            failed += 1;
        }
        audit_rows.push(vec![
            "apriori".into(),
            format!("sample{i}"),
            fmt(row.lhs),
            fmt(row.rhs),
            row.pass.to_string(),
        ]);
    }

    // Well-spread event on the bulk of each of the first few samples.
    let bulk = DomainRegion::disk(Point2::zero(), radius * 0.55)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    for (i, s) in samples.iter().take(5).enumerate() {
        let s_bg = BackgroundMeasure::uniform(*s.domain(), 1.0)
            .map_err(|e| CliError::Numeric(e.to_string()))?;
        let (ok, _) = wellspread_check(s, &bulk, a.wellspread_ell, a.wellspread_k, &s_bg, a.grid_h)
            .map_err(|e| CliError::Numeric(e.to_string()))?;
        audit_rows.push(vec![
            "wellspread".into(),
            format!("sample{i}"),
            fmt(if ok { 1.0 } else { 0.0 }),
            fmt(1.0),
            ok.to_string(),
        ]);
    }

    // Local laws and Wegner ratios.
    let squares = [
        DomainRegion::square(Point2::zero(), a.square_side)
            .map_err(|e| CliError::Numeric(e.to_string()))?,
        DomainRegion::square(Point2::new(radius * 0.3, 0.0), a.square_side)
            .map_err(|e| CliError::Numeric(e.to_string()))?,
    ];
    let rows = local_law_audit(&samples, &bg, &squares, a.c_beta, model.beta, a.grid_h)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    for (i, r) in rows.iter().enumerate() {
        audit_rows.push(vec![
            "local_law_pts".into(),
            format!("square{i}"),
            fmt(r.pts_exceed_freq),
            fmt(r.reference_tail),
            (r.pts_exceed_freq <= r.reference_tail + 0.05).to_string(),
        ]);
        audit_rows.push(vec![
            "local_law_ener".into(),
            format!("square{i}"),
            fmt(r.ener_exceed_freq),
            fmt(r.reference_tail),
            (r.ener_exceed_freq <= r.reference_tail + 0.05).to_string(),
        ]);
        ctx.record(&format!("discrepancy_moment[{i}]"), r.discrepancy_moment, 0.0, "1");
    }
    let disks = [
        DomainRegion::disk(Point2::new(0.5, 0.5), 0.1).map_err(|e| CliError::Numeric(e.to_string()))?,
        DomainRegion::disk(Point2::new(-1.0, 0.2), 0.2)
            .map_err(|e| CliError::Numeric(e.to_string()))?,
        DomainRegion::disk(Point2::new(0.7, -1.1), 0.4)
            .map_err(|e| CliError::Numeric(e.to_string()))?,
    ];
    let (max_ratio, wrows) =
        wegner_audit(&samples, &disks).map_err(|e| CliError::Numeric(e.to_string()))?;
    for (i, r) in wrows.iter().enumerate() {
        audit_rows.push(vec![
            "wegner".into(),
            format!("disk{i}"),
            fmt(r.ratio),
            fmt(max_ratio),
            "true".into(),
        ]);
    }

    // Energy identity and truncation-rescaling checks on a fresh small system.
    let small_bg = BackgroundMeasure::neutralizing_disk(8);
    let small_domain = *small_bg.region();
    let small_r = match small_domain {
        DomainRegion::Disk { radius, .. } => radius,
        _ => unreachable!(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 999));
    let mut pts = Vec::new();
    while pts.len() < 8 {
        let p = Point2::new(
            (rng.gen::<f64>() * 2.0 - 1.0) * small_r,
            (rng.gen::<f64>() * 2.0 - 1.0) * small_r,
        );
        if p.norm() < small_r - 0.3 && pts.iter().all(|q: &Point2<f64>| q.dist(p) > 0.05) {
            pts.push(p);
        }
    }
    let small = PointConfiguration::new(pts, small_domain)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let trunc = nn_truncation(&small, 1.0);
    let rep = energy_identity_check(&small, &small_bg, &trunc, 0.02)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let identity_ok = rep.relative_residual <= 1e-3;
    if !identity_ok {
        failed += 1;
    }
    energy_rows.push(vec![
        "energy_identity".into(),
        "small8".into(),
        fmt(rep.energy),
        fmt(rep.energy - rep.residual),
        fmt(rep.residual),
        fmt(1e-3),
        identity_ok.to_string(),
    ]);
    let free_bg = BackgroundMeasure::zero(small_domain);
    let full_t = nn_truncation(&small, 1.0);
    let e_full = electric_energy(&small, &free_bg, &full_t, &small_domain, 0.02)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let e_half = electric_energy(&small, &free_bg, &full_t.scaled(0.5), &small_domain, 0.02)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let per_point = (e_half - e_full) / std::f64::consts::TAU;
    let expect = -(small.len() as f64) * 0.5f64.ln();
    let rescale_ok = (per_point - expect).abs() <= 0.01 * expect;
    if !rescale_ok {
        failed += 1;
    }
    energy_rows.push(vec![
        "truncation_rescaling".into(),
        "small8".into(),
        fmt(per_point),
        fmt(expect),
        fmt(per_point - expect),
        fmt(0.01 * expect),
        rescale_ok.to_string(),
    ]);

    ctx.write_csv("audits.csv", "check,region_id,value,bound,pass", &audit_rows)?;
    ctx.write_csv(
        "energy_audits.csv",
        "check_name,instance_id,lhs,rhs,residual,tolerance,pass",
        &energy_rows,
    )?;
    ctx.record("apriori_failures", failed as f64, 0.0, "count");
    if failed > 0 {
        return Err(CliError::AuditFailure(format!("{failed} audited inequalities failed")));
    }
    Ok(())
}

pub fn cmd_report(cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<(), CliError> {
    let section = cfg
        .report
        .clone()
        .ok_or_else(|| CliError::Config("missing [report] section".into()))?;
    let mut rows: Vec<Vec<String>> = Vec::new();
    for input in &section.inputs {
        let dir = Path::new(input);
        let meta_bytes = std::fs::read(dir.join("run_meta.json"))
            .map_err(|e| CliError::Config(format!("cannot read {input}/run_meta.json: {e}")))?;
        let meta: RunMeta = serde_json::from_slice(&meta_bytes)
            .map_err(|e| CliError::Config(format!("bad run_meta in {input}: {e}")))?;
        // Integrity: the stored digest must match the stored config + seeds.
        let config_bytes = std::fs::read(dir.join("config.echo.toml"))
            .map_err(|e| CliError::Config(format!("cannot read {input}/config.echo.toml: {e}")))?;
        let recomputed = crate::config::config_digest(&config_bytes, &meta.command, &meta.seeds);
        if recomputed != meta.config_digest {
            return Err(CliError::Config(format!(
                "config digest mismatch in {input}: stored {}, recomputed {recomputed}",
                meta.config_digest
            )));
        }
        let curve = read_variance_csv(&dir.join("variance.csv"))?;
        let fit = scaling_fit(&curve).map_err(|e| CliError::Numeric(e.to_string()))?;
        rows.push(vec![
            meta.beta.map_or("poisson".into(), fmt),
            fmt(fit.gamma),
            fmt(fit.gamma_stderr),
            fmt(fit.amplitude),
            fmt(fit.residual),
            curve.n_samples.to_string(),
            meta.run_id.clone(),
        ]);
    }
    rows.sort();
    ctx.write_csv(
        "summary.csv",
        "beta,gamma,gamma_stderr,amplitude,fit_residual,n_samples,run_id",
        &rows,
    )?;
    ctx.record("inputs", section.inputs.len() as f64, 0.0, "count");
    Ok(())
}

fn read_variance_csv(path: &Path) -> Result<VarianceCurve<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut radii = Vec::new();
    let mut variance = Vec::new();
    let mut stderr = Vec::new();
    let mut ess = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != "R,var,stderr,ess" {
                return Err(CliError::Config(format!("unexpected header in {}", path.display())));
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(CliError::Config(format!("bad row in {}", path.display())));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| CliError::Config(format!("bad float {s:?}: {e}")))
        };
        radii.push(parse(fields[0])?);
        variance.push(parse(fields[1])?);
        stderr.push(parse(fields[2])?);
        ess.push(parse(fields[3])?);
    }
    let n = radii.len();
    Ok(VarianceCurve {
        radii,
        variance,
        stderr,
        ess,
        n_samples: n,
        center_policy: "from csv".into(),
        bulk_ok: vec![true; n],
    })
}

/// Hash of all report inputs (consumed files), used as the input hash of a
/// report run.
pub fn report_input_hash(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let mut material = Vec::new();
    if let Some(r) = &cfg.report {
        for input in &r.inputs {
            for name in ["run_meta.json", "variance.csv"] {
                if let Ok(bytes) = std::fs::read(Path::new(input).join(name)) {
                    material.extend_from_slice(&bytes);
                }
            }
        }
    }
    Ok(sha256_hex(&material))
}

impl RunContext {
    pub fn record_note(&mut self, note: &str) {
        let mut out = std::io::stderr();
        use std::io::Write;
        let _ = writeln!(out, "note: {note}");
    }
}
