//! Seeded Monte Carlo estimators of outage and DBPSK BER.
//!
//! Trials are split into fixed-size batches. Batch `i` draws from a ChaCha8
//! stream `i` under the configured seed and batch results are reduced in
//! index order, so estimates do not depend on the number of workers.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::channel::{sample_fso_snr, sample_rf_snr, LinkParams, SnrDistribution};
use crate::composition::{af_adaptive_snr, af_fixed_snr, GainMode, Topology};
use crate::error::{invalid, Error, Result};
use crate::stats::{mean_interval, wilson_interval};

pub const MIN_TRIALS: u64 = 1_000;
pub const BATCH_SIZE: u64 = 1 << 14;

/// How a simulated chain turns into bit errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BerModel {
    /// Average of ½e^{-γ_min} over the weakest stage of each chain.
    MinSnrEquivalent,
    /// Independent DBPSK decisions on every DF stage, errors XOR-ed.
    CascadeXor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimLevel {
    Snr,
    Signal,
}

/// Adaptive-gain first-segment SNR used per trial. Fixed gain always uses
/// γ₁γ₂/(γ₂ + C).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combiner {
    /// γ₁γ₂/(γ₁ + γ₂ + 1).
    Exact,
    /// min(γ₁, γ₂).
    MinApprox,
}

impl fmt::Display for BerModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BerModel::MinSnrEquivalent => "min-snr",
            BerModel::CascadeXor => "cascade-xor",
        })
    }
}

impl FromStr for BerModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "min-snr" | "min_snr" | "minsnrequivalent" => Ok(BerModel::MinSnrEquivalent),
            "cascade-xor" | "cascade_xor" | "cascadexor" => Ok(BerModel::CascadeXor),
            other => Err(invalid("ber_model", format!("unknown BER model '{other}'"))),
        }
    }
}

impl fmt::Display for SimLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimLevel::Snr => "snr",
            SimLevel::Signal => "signal",
        })
    }
}

impl FromStr for SimLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "snr" => Ok(SimLevel::Snr),
            "signal" => Ok(SimLevel::Signal),
            other => Err(invalid("level", format!("unknown simulation level '{other}'"))),
        }
    }
}

impl fmt::Display for Combiner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Combiner::Exact => "exact",
            Combiner::MinApprox => "min",
        })
    }
}

impl FromStr for Combiner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(Combiner::Exact),
            "min" | "min-approx" => Ok(Combiner::MinApprox),
            other => Err(invalid("combiner", format!("unknown combiner '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Trials for outage, transmitted bits for BER.
    pub trials: u64,
    pub seed: u64,
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
    pub ber_model: BerModel,
    pub level: SimLevel,
    pub combiner: Combiner,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            trials: 1_000_000,
            seed: 42,
            workers: 0,
            ber_model: BerModel::MinSnrEquivalent,
            level: SimLevel::Snr,
            combiner: Combiner::Exact,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < MIN_TRIALS {
            return Err(invalid("trials", format!("must be at least {MIN_TRIALS}, got {}", self.trials)));
        }
        Ok(())
    }
}

/// Estimate with its 95% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricEstimate {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: u64,
    pub method: &'static str,
}

impl MetricEstimate {
    fn proportion(hits: u64, n: u64, method: &'static str) -> Self {
        let (lo, hi) = wilson_interval(hits, n);
        let mean = hits as f64 / n as f64;
        Self {
            mean,
            ci_low: lo.min(mean),
            ci_high: hi.max(mean),
            n,
            method,
        }
    }

    fn sample_mean(sum: f64, sum_sq: f64, n: u64, method: &'static str) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let var = if n > 1 { (sum_sq - sum * mean) / (nf - 1.0) } else { 0.0 };
        let (lo, hi) = mean_interval(mean, var, n);
        Self {
            mean,
            ci_low: lo,
            ci_high: hi,
            n,
            method,
        }
    }

    /// Standard error implied by the interval.
    pub fn std_error(&self) -> f64 {
        (self.ci_high - self.ci_low) / (2.0 * crate::stats::Z95)
    }
}

/// Per-batch accumulator; summed in batch order.
#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    count: u64,
    sum: f64,
    sum_sq: f64,
}

impl Tally {
    fn add(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(self, other: Tally) -> Tally {
        Tally {
            count: self.count + other.count,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }
}

/// Runs `trial` `cfg.trials` times over batched streams and merges the tallies.
fn run_batches<F>(cfg: &SimConfig, trial: F) -> Result<Tally>
where
    F: Fn(&mut ChaCha8Rng, &mut Tally) + Sync,
{
    cfg.validate()?;
    let batches = cfg.trials.div_ceil(BATCH_SIZE);
    let one = |b: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(b);
        let len = BATCH_SIZE.min(cfg.trials - b * BATCH_SIZE);
        let mut t = Tally::default();
        for _ in 0..len {
            trial(&mut rng, &mut t);
        }
        t
    };
    let run = || (0..batches).into_par_iter().map(one).collect::<Vec<_>>();
    let parts = if cfg.workers == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| invalid("workers", e.to_string()))?
            .install(run)
    };
    Ok(parts.into_iter().fold(Tally::default(), Tally::merge))
}

fn best_user<R: Rng + ?Sized>(n: u32, gamma_bar: f64, rng: &mut R) -> f64 {
    (0..n).map(|_| sample_rf_snr(gamma_bar, rng)).fold(0.0, f64::max)
}

/// SNR at the second relay for one trial.
fn first_segment_snr<R: Rng + ?Sized>(topology: &Topology, params: &LinkParams, combiner: Combiner, rng: &mut R) -> f64 {
    let g1 = best_user(topology.n_users, params.gamma_bar_rf, rng);
    let g2 = sample_fso_snr(params, rng);
    match (topology.first_segment_mode, combiner) {
        (GainMode::AdaptiveGain, Combiner::Exact) => af_adaptive_snr(g1, g2),
        (GainMode::AdaptiveGain, Combiner::MinApprox) => g1.min(g2),
        (GainMode::FixedGain, _) => af_fixed_snr(g1, g2, params.c_gain),
    }
}

/// Selected SNR of one hybrid hop: the better of an FSO and an RF draw.
fn hybrid_hop_snr<R: Rng + ?Sized>(params: &LinkParams, rng: &mut R) -> f64 {
    sample_fso_snr(params, rng).max(sample_rf_snr(params.gamma_bar_rf, rng))
}

/// Stage SNRs of one chain: the second-relay input, then each hybrid hop.
pub fn sample_chain<R: Rng + ?Sized>(
    topology: &Topology,
    params: &LinkParams,
    combiner: Combiner,
    rng: &mut R,
    stages: &mut Vec<f64>,
) {
    stages.clear();
    stages.push(first_segment_snr(topology, params, combiner, rng));
    for _ in 0..topology.hybrid_hops() {
        stages.push(hybrid_hop_snr(params, rng));
    }
}

/// Weakest-stage SNR of `count` chains, for distribution checks.
pub fn sample_chain_minimum(
    topology: &Topology,
    params: &LinkParams,
    combiner: Combiner,
    seed: u64,
    count: usize,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stages = Vec::new();
    (0..count)
        .map(|_| {
            sample_chain(topology, params, combiner, &mut rng, &mut stages);
            stages.iter().copied().fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn check(topology: &Topology, params: &LinkParams, cfg: &SimConfig) -> Result<()> {
    topology.validate()?;
    params.validate()?;
    cfg.validate()
}

/// Fraction of chains with some stage SNR below γ_th, Wilson interval.
pub fn simulate_outage(topology: &Topology, params: &LinkParams, cfg: &SimConfig) -> Result<MetricEstimate> {
    check(topology, params, cfg)?;
    let th = params.gamma_th;
    let tally = run_batches(cfg, |rng, t| {
        let mut out = first_segment_snr(topology, params, cfg.combiner, rng) < th;
        for _ in 0..topology.hybrid_hops() {
            // keep the draw count fixed per trial
            out |= hybrid_hop_snr(params, rng) < th;
        }
        t.count += out as u64;
    })?;
    Ok(MetricEstimate::proportion(tally.count, cfg.trials, "mc-outage"))
}

/// BER at the level selected in `cfg`.
pub fn simulate_ber(topology: &Topology, params: &LinkParams, cfg: &SimConfig) -> Result<MetricEstimate> {
    match cfg.level {
        SimLevel::Snr => simulate_ber_snr_level(topology, params, cfg),
        SimLevel::Signal => simulate_ber_signal_level(topology, params, cfg),
    }
}

/// SNR-level BER with the conditional DBPSK error ½e^{-γ}.
pub fn simulate_ber_snr_level(topology: &Topology, params: &LinkParams, cfg: &SimConfig) -> Result<MetricEstimate> {
    check(topology, params, cfg)?;
    let hops = topology.hybrid_hops();
    match cfg.ber_model {
        BerModel::MinSnrEquivalent => {
            let tally = run_batches(cfg, |rng, t| {
                let mut g = first_segment_snr(topology, params, cfg.combiner, rng);
                for _ in 0..hops {
                    g = g.min(hybrid_hop_snr(params, rng));
                }
                t.add(0.5 * (-g).exp());
            })?;
            Ok(MetricEstimate::sample_mean(tally.sum, tally.sum_sq, cfg.trials, "mc-ber-min-snr"))
        }
        BerModel::CascadeXor => {
            let tally = run_batches(cfg, |rng, t| {
                let g = first_segment_snr(topology, params, cfg.combiner, rng);
                let mut flip = rng.gen::<f64>() < 0.5 * (-g).exp();
                for _ in 0..hops {
                    let g = hybrid_hop_snr(params, rng);
                    flip ^= rng.gen::<f64>() < 0.5 * (-g).exp();
                }
                t.count += flip as u64;
            })?;
            Ok(MetricEstimate::proportion(tally.count, cfg.trials, "mc-ber-cascade-xor"))
        }
    }
}

fn cn<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Differential decision on two received symbols: true when a phase flip
/// is detected.
fn detect(prev: Complex64, cur: Complex64) -> bool {
    (cur * prev.conj()).re < 0.0
}

/// Sends the symbol pair [1, ±1] over gain `h` with unit CN noise and
/// returns the detected bit.
fn dbpsk_hop<R: Rng + ?Sized>(bit: bool, h: Complex64, rng: &mut R) -> bool {
    let s1 = if bit { -1.0 } else { 1.0 };
    let y0 = h + cn(rng);
    let y1 = h * s1 + cn(rng);
    detect(y0, y1)
}

/// Signal-level BER. Each bit is a differentially encoded symbol pair over
/// a channel held for both symbols. The first segment selects the strongest
/// user and amplifies with G² = 1/(|h₁|²+1) (adaptive) or 1/C (fixed) into
/// the FSO hop; every later relay detects, regenerates and forwards on the
/// stronger of its FSO and RF branches.
pub fn simulate_ber_signal_level(topology: &Topology, params: &LinkParams, cfg: &SimConfig) -> Result<MetricEstimate> {
    check(topology, params, cfg)?;
    let rf_amp = params.gamma_bar_rf.sqrt();
    let tally = run_batches(cfg, |rng, t| {
        let bit: bool = rng.gen();
        let mut h1 = Complex64::new(0.0, 0.0);
        for _ in 0..topology.n_users {
            let h = cn(rng) * rf_amp;
            if h.norm_sqr() > h1.norm_sqr() {
                h1 = h;
            }
        }
        let gain = match topology.first_segment_mode {
            GainMode::AdaptiveGain => (1.0 / (h1.norm_sqr() + 1.0)).sqrt(),
            GainMode::FixedGain => (1.0 / params.c_gain).sqrt(),
        };
        let a2 = sample_fso_snr(params, rng).sqrt();
        let s1 = if bit { -1.0 } else { 1.0 };
        let y0 = a2 * gain * (h1 + cn(rng)) + cn(rng);
        let y1 = a2 * gain * (h1 * s1 + cn(rng)) + cn(rng);
        let mut decided = detect(y0, y1);
        for _ in 0..topology.hybrid_hops() {
            let fso = Complex64::new(sample_fso_snr(params, rng).sqrt(), 0.0);
            let rf = cn(rng) * rf_amp;
            let h = if fso.norm_sqr() >= rf.norm_sqr() { fso } else { rf };
            decided = dbpsk_hop(decided, h, rng);
        }
        t.count += (decided != bit) as u64;
    })?;
    Ok(MetricEstimate::proportion(tally.count, cfg.trials, "mc-ber-signal"))
}

/// A single link: fixed-SNR AWGN or a fading law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SingleLink {
    Awgn(f64),
    Fading(SnrDistribution),
}

impl SingleLink {
    fn snr<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            SingleLink::Awgn(g) => *g,
            SingleLink::Fading(d) => d.sample(rng),
        }
    }
}

/// DBPSK BER of one link: ½e^{-γ} averaged at the SNR level, or symbol
/// pairs with CN noise at the signal level.
pub fn simulate_link_ber(link: &SingleLink, cfg: &SimConfig) -> Result<MetricEstimate> {
    match cfg.level {
        SimLevel::Snr => {
            let tally = run_batches(cfg, |rng, t| t.add(0.5 * (-link.snr(rng)).exp()))?;
            Ok(MetricEstimate::sample_mean(tally.sum, tally.sum_sq, cfg.trials, "mc-link-ber-snr"))
        }
        SimLevel::Signal => {
            let tally = run_batches(cfg, |rng, t| {
                let bit: bool = rng.gen();
                let g = link.snr(rng);
                let h = match link {
                    SingleLink::Fading(d) if d.kind == crate::channel::SnrKind::Rayleigh => {
                        // random phase; |h|² carries the sampled SNR
                        let phase = cn(rng);
                        phase / phase.norm() * g.sqrt()
                    }
                    _ => Complex64::new(g.sqrt(), 0.0),
                };
                t.count += (dbpsk_hop(bit, h, rng) != bit) as u64;
            })?;
            Ok(MetricEstimate::proportion(tally.count, cfg.trials, "mc-link-ber-signal"))
        }
    }
}
