use ocp2d::geom::{DomainRegion, Point2};
use ocp2d::sampler::*;
use ocp2d::stats::*;
use std::time::Instant;

fn main() {
    // Ginibre N=500 oracle Var(R=6).
    let t0 = Instant::now();
    let samples: Vec<_> = (0..400).map(|i| ginibre_sample(500, 100 + i).unwrap()).collect();
    let omega = DomainRegion::disk(Point2::zero(), 6.0).unwrap();
    let counts: Vec<f64> = samples.iter().map(|s| s.count_in(&omega) as f64).collect();
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (counts.len() - 1) as f64;
    println!("ginibre N=500: mean={mean:.2} var={var:.3} ({:?})", t0.elapsed());

    // Long beta=2 chain: window variances to see equilibration.
    let t0 = Instant::now();
    let cfg = SamplerConfig { beta: 2.0, n_points: 500, proposal_scale: 0.45, sweeps: 120_000, burn_in: 20_000, thin: 10, seed: 43 };
    let model = ChainModel::full_model(cfg.beta, cfg.n_points);
    let run = run_chain(&model, &cfg).unwrap();
    println!("120k sweeps in {:?}", t0.elapsed());
    let counts: Vec<f64> = run.samples.iter().map(|s| s.count_in(&omega) as f64).collect();
    let k = counts.len() / 4;
    for w in 0..4 {
        let part = &counts[w * k..(w + 1) * k];
        let m = part.iter().sum::<f64>() / part.len() as f64;
        let v = part.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (part.len() - 1) as f64;
        println!("window {w}: mean={m:.2} var={v:.3}");
    }
    let tau = integrated_autocorr_time(&counts);
    println!("overall tau(thin=10)={tau:.2} ess={:.0}", effective_sample_size(&counts));
}
