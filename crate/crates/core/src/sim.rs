//! Monte Carlo sampling of killed walks in quadrant coordinates, compared
//! against the exact exit-time and harmonic-function results.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exit::{exit_position_moments, tau_moment_poly};
use crate::harmonic::construct_harmonic;
use crate::lx::killed_one_step;
use crate::scalar::{BigFloat, Scalar};
use crate::walk::{walk_moments, Walk};

type TF = BigFloat<256>;

const BLOCK: u64 = 4096;
const MIN_SURVIVORS: u64 = 100;
/// Dyadic points with fewer survivors than this are left out of the fit.
const FIT_SURVIVORS: u64 = 30;
const TAIL_START: u32 = 6;
pub const TAIL_BAND: f64 = 0.15;
pub const Z_LIMIT: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    TauMean,
    TauSecond,
    ExitPosition,
    Harmonicity,
    Tail,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Check::TauMean => "tau-mean",
            Check::TauSecond => "tau-second",
            Check::ExitPosition => "exit-position",
            Check::Harmonicity => "harmonicity",
            Check::Tail => "tail",
        })
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "tau-mean" => Check::TauMean,
            "tau-second" => Check::TauSecond,
            "exit-position" => Check::ExitPosition,
            "harmonicity" => Check::Harmonicity,
            "tail" => Check::Tail,
            other => return Err(Error::parse("check", format!("unknown check `{other}`"))),
        })
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub walk: Walk,
    pub start: (i64, i64),
    pub paths: u64,
    pub seed: u64,
    pub max_steps: u64,
    pub checks: BTreeSet<Check>,
}

impl SimConfig {
    pub fn new(walk: Walk, start: (i64, i64)) -> Self {
        SimConfig {
            walk,
            start,
            paths: 100_000,
            seed: 0,
            max_steps: 10_000_000,
            checks: [Check::TauMean].into_iter().collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.start.0 < 1 || self.start.1 < 1 {
            return Err(Error::StartNotInterior);
        }
        if self.paths == 0 || self.max_steps == 0 {
            return Err(Error::Precondition("paths and max_steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub estimate: f64,
    pub std_error: Option<f64>,
    pub target: f64,
    pub z: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// `(n, survivors past n, P̂(τ > n))` over the fitted dyadic `n`.
    pub points: Vec<(u64, u64, f64)>,
    pub slope: f64,
    pub target: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub start: (i64, i64),
    pub paths: u64,
    pub seed: u64,
    pub max_steps: u64,
    pub rho: f64,
    pub alpha: f64,
    pub p_alpha: f64,
    pub truncated: u64,
    pub checks: Vec<CheckReport>,
    pub tail: Option<TailFit>,
}

impl SimReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass) && self.tail.as_ref().map_or(true, |t| t.pass)
    }
}

/// Sum/sum-of-squares pair.
#[derive(Debug, Clone, Copy, Default)]
struct Moments2 {
    s: f64,
    s2: f64,
}

impl Moments2 {
    fn push(&mut self, v: f64) {
        self.s += v;
        self.s2 += v * v;
    }
    fn merge(self, o: Self) -> Self {
        Moments2 { s: self.s + o.s, s2: self.s2 + o.s2 }
    }
    /// Mean and standard error of the mean.
    fn stats(&self, n: u64) -> (f64, f64) {
        let nf = n as f64;
        let mean = self.s / nf;
        let var = if n > 1 { ((self.s2 - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
        (mean, (var / nf).sqrt())
    }
}

#[derive(Debug, Clone)]
struct Acc {
    done: u64,
    truncated: u64,
    tau: u128,
    tau2: u128,
    tau_done: u128,
    tau_done2: u128,
    /// `τ²` with truncated paths censored, as floats since `τ⁴` is needed.
    tau_sq: Moments2,
    exit1: Moments2,
    exit2: Moments2,
    first: Moments2,
    survivors: [u64; 64],
}

impl Default for Acc {
    fn default() -> Self {
        Acc {
            done: 0,
            truncated: 0,
            tau: 0,
            tau2: 0,
            tau_done: 0,
            tau_done2: 0,
            tau_sq: Moments2::default(),
            exit1: Moments2::default(),
            exit2: Moments2::default(),
            first: Moments2::default(),
            survivors: [0; 64],
        }
    }
}

impl Acc {
    fn merge(mut self, o: &Acc) -> Acc {
        self.done += o.done;
        self.truncated += o.truncated;
        self.tau += o.tau;
        self.tau2 += o.tau2;
        self.tau_done += o.tau_done;
        self.tau_done2 += o.tau_done2;
        self.tau_sq = self.tau_sq.merge(o.tau_sq);
        self.exit1 = self.exit1.merge(o.exit1);
        self.exit2 = self.exit2.merge(o.exit2);
        self.first = self.first.merge(o.first);
        for (a, b) in self.survivors.iter_mut().zip(o.survivors.iter()) {
            *a += b;
        }
        self
    }
}

/// Fixed-shape pairwise reduction, independent of the thread count.
fn pairwise(accs: &[Acc]) -> Acc {
    match accs.len() {
        0 => Acc::default(),
        1 => accs[0].clone(),
        n => pairwise(&accs[..n / 2]).merge(&pairwise(&accs[n / 2..])),
    }
}

/// Everything the hot loop needs, in plain floats and integers.
struct Kernel {
    steps: Vec<(i64, i64)>,
    dist: WeightedIndex<u64>,
    t: [f64; 3],
    /// Pulled-back harmonic polynomial for the first-step check.
    h: Option<Vec<(u32, u32, f64)>>,
}

fn eval_terms(terms: &[(u32, u32, f64)], y: (i64, i64)) -> f64 {
    terms.iter().map(|&(i, j, c)| c * (y.0 as f64).powi(i as i32) * (y.1 as f64).powi(j as i32)).sum()
}

fn sampler(w: &Walk) -> Result<(Vec<(i64, i64)>, WeightedIndex<u64>)> {
    let den = w.atoms().iter().fold(BigInt::from(1), |acc, a| acc.lcm(a.p.denom()));
    let weights = w
        .atoms()
        .iter()
        .map(|a| (a.p.numer() * (&den / a.p.denom())).to_u64())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Precondition("step probabilities have too large a common denominator".into()))?;
    let dist = WeightedIndex::new(weights).map_err(|e| Error::InvalidWalk(e.to_string()))?;
    Ok((w.atoms().iter().map(|a| a.dy).collect(), dist))
}

impl Kernel {
    fn run_block(&self, cfg: &SimConfig, block: u64) -> Acc {
        let mut acc = Acc::default();
        let lo = block * BLOCK;
        let hi = (lo + BLOCK).min(cfg.paths);
        for path in lo..hi {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(path);
            let mut y = cfg.start;
            let mut n = 0u64;
            let mut exited = false;
            while n < cfg.max_steps {
                let (d1, d2) = self.steps[self.dist.sample(&mut rng)];
                y = (y.0 + d1, y.1 + d2);
                n += 1;
                let out = y.0 <= 0 || y.1 <= 0;
                if n == 1 {
                    if let Some(h) = &self.h {
                        acc.first.push(if out { 0.0 } else { eval_terms(h, y) });
                    }
                }
                if out {
                    exited = true;
                    break;
                }
            }
            let tau = n as u128;
            acc.tau += tau;
            acc.tau2 += tau * tau;
            acc.tau_sq.push((tau * tau) as f64);
            for (k, s) in acc.survivors.iter_mut().enumerate() {
                let dyadic = 1u128 << k;
                if tau > dyadic || (!exited && dyadic <= tau) {
                    *s += 1;
                }
            }
            if exited {
                acc.done += 1;
                acc.tau_done += tau;
                acc.tau_done2 += tau * tau;
                let x1 = self.t[0] * y.0 as f64 + self.t[1] * y.1 as f64;
                let x2 = self.t[2] * y.1 as f64;
                acc.exit1.push(x1 * x1);
                acc.exit2.push(x2 * x2);
            } else {
                acc.truncated += 1;
            }
        }
        acc
    }
}

fn simulate(cfg: &SimConfig, h: Option<Vec<(u32, u32, f64)>>, t: [f64; 3]) -> Result<Acc> {
    let (steps, dist) = sampler(&cfg.walk)?;
    let kernel = Kernel { steps, dist, t, h };
    let blocks = cfg.paths.div_ceil(BLOCK);
    let accs: Vec<Acc> = (0..blocks).into_par_iter().map(|b| kernel.run_block(cfg, b)).collect();
    Ok(pairwise(&accs))
}

fn z_score(est: f64, se: f64, target: f64) -> f64 {
    let diff = est - target;
    if se > 0.0 {
        diff / se
    } else if diff.abs() <= 1e-12 * target.abs().max(1.0) {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

fn mc_check(name: &str, est: f64, se: f64, target: f64, note: Option<String>) -> CheckReport {
    let z = z_score(est, se, target);
    CheckReport { name: name.into(), estimate: est, std_error: Some(se), target, z: Some(z), pass: z.abs() <= Z_LIMIT, note }
}

fn int_stats(s: u128, s2: u128, n: u64) -> (f64, f64) {
    Moments2 { s: s as f64, s2: s2 as f64 }.stats(n)
}

fn fit_tail(acc: &Acc, paths: u64, max_steps: u64, p_alpha: f64) -> Result<TailFit> {
    let at_start = acc.survivors[TAIL_START as usize];
    if at_start < MIN_SURVIVORS || (1u64 << TAIL_START) > max_steps {
        return Err(Error::InsufficientSurvivors { survivors: at_start, needed: MIN_SURVIVORS });
    }
    let points: Vec<(u64, u64, f64)> = (TAIL_START..63)
        .map(|k| (1u64 << k, acc.survivors[k as usize]))
        .take_while(|&(n, s)| s >= FIT_SURVIVORS && n <= max_steps)
        .map(|(n, s)| (n, s, s as f64 / paths as f64))
        .collect();
    if points.len() < 2 {
        return Err(Error::InsufficientSurvivors { survivors: acc.survivors[TAIL_START as usize + 1], needed: FIT_SURVIVORS });
    }
    // Weighted by survivor count, the inverse Poisson variance of log P̂.
    let w: Vec<f64> = points.iter().map(|p| p.1 as f64).collect();
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.2.ln()).collect();
    let sw: f64 = w.iter().sum();
    let mx = w.iter().zip(&xs).map(|(w, x)| w * x).sum::<f64>() / sw;
    let my = w.iter().zip(&ys).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxy: f64 = (0..xs.len()).map(|i| w[i] * (xs[i] - mx) * (ys[i] - my)).sum();
    let sxx: f64 = (0..xs.len()).map(|i| w[i] * (xs[i] - mx) * (xs[i] - mx)).sum();
    let slope = sxy / sxx;
    let target = -p_alpha / 2.0;
    Ok(TailFit { points, slope, target, pass: (slope - target).abs() <= TAIL_BAND })
}

/// Runs the simulation once and evaluates every requested check.
pub fn sample_exit(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let order = cfg
        .checks
        .iter()
        .map(|c| match c {
            Check::TauMean => 2,
            Check::TauSecond => 4,
            _ => 2,
        })
        .max()
        .unwrap_or(2);
    let (tr0, _) = walk_moments::<TF>(&cfg.walk, 2)?;
    let m = tr0.cone.m;
    let order = if cfg.checks.contains(&Check::Harmonicity) { order.max(m.unwrap_or(0) as usize) } else { order };
    let (tr, mu) = walk_moments::<TF>(&cfg.walk, order)?;
    let cone = &tr.cone;
    let x = tr.apply(cfg.start);
    let t = [tr.t[0][0].to_f64(), tr.t[0][1].to_f64(), tr.t[1][1].to_f64()];

    let invalid = |e: Error| match e {
        Error::MomentNotFinite { .. } | Error::AngleOutOfRange(_) => Error::MomentCheckInvalid(e.to_string()),
        other => other,
    };
    let tau1 = if cfg.checks.contains(&Check::TauMean) {
        Some(tau_moment_poly(1, cone, &mu).map_err(invalid)?.g.eval(&x.0, &x.1).to_f64())
    } else {
        None
    };
    let tau2 = if cfg.checks.contains(&Check::TauSecond) {
        Some(tau_moment_poly(2, cone, &mu).map_err(invalid)?.g.eval(&x.0, &x.1).to_f64())
    } else {
        None
    };
    let exit2 = if cfg.checks.contains(&Check::ExitPosition) {
        let (a, b) = exit_position_moments(cone, (&x.0, &x.1)).and_then(|e| e.second()).map_err(invalid)?;
        Some((a.to_f64(), b.to_f64()))
    } else {
        None
    };
    let harmonic = if cfg.checks.contains(&Check::Harmonicity) {
        let m = m.ok_or_else(|| Error::MomentCheckInvalid("harmonicity needs alpha = pi/m".into()))?;
        let h = construct_harmonic(m, cone, &mu)?.h;
        let g = tr.pull_back(&h);
        let exact = killed_one_step(&g, &cfg.walk, cfg.start);
        let scale = g.max_abs_coeff() * ((cfg.start.0.max(cfg.start.1) + 1) as f64).powi(m as i32);
        let terms: Vec<(u32, u32, f64)> = g.terms().map(|(&(i, j), c)| (i, j, c.to_f64())).collect();
        Some((terms, g.eval(&TF::from_int(cfg.start.0), &TF::from_int(cfg.start.1)).to_f64(), exact.to_f64(), exact.is_negligible(scale)))
    } else {
        None
    };

    log::info!("simulating {} paths from {:?} (seed {})", cfg.paths, cfg.start, cfg.seed);
    let acc = simulate(cfg, harmonic.as_ref().map(|h| h.0.clone()), t)?;
    log::info!("{} paths truncated at {} steps", acc.truncated, cfg.max_steps);

    let mut checks = Vec::new();
    if let Some(target) = tau1 {
        let (cens, se) = int_stats(acc.tau, acc.tau2, cfg.paths);
        let done = if acc.done > 0 { int_stats(acc.tau_done, acc.tau_done2, acc.done).0 } else { cens };
        let (lo, hi) = (cens.min(done), cens.max(done));
        let pass = target >= lo - Z_LIMIT * se && target <= hi + Z_LIMIT * se;
        let note = (acc.truncated > 0).then(|| format!("bracket [{done}, {cens}] from {} truncated paths", acc.truncated));
        checks.push(CheckReport { name: "tau-mean".into(), estimate: cens, std_error: Some(se), target, z: Some(z_score(cens, se, target)), pass, note });
    }
    if let Some(target) = tau2 {
        let (est, se) = acc.tau_sq.stats(cfg.paths);
        checks.push(mc_check("tau-second", est, se, target, None));
    }
    if let Some((t1, t2)) = exit2 {
        let note = (acc.truncated > 0).then(|| format!("{} truncated paths excluded", acc.truncated));
        let (e1, s1) = acc.exit1.stats(acc.done.max(1));
        let (e2, s2) = acc.exit2.stats(acc.done.max(1));
        checks.push(mc_check("exit-position-1", e1, s1, t1, note.clone()));
        checks.push(mc_check("exit-position-2", e2, s2, t2, note));
    }
    if let Some((_, target, exact, exact_ok)) = harmonic {
        let (est, se) = acc.first.stats(cfg.paths);
        let mut r = mc_check("harmonicity", est, se, target, Some(format!("exact one-step residual {exact:e}")));
        r.pass &= exact_ok;
        checks.push(r);
    }
    let tail = if cfg.checks.contains(&Check::Tail) { Some(fit_tail(&acc, cfg.paths, cfg.max_steps, cone.p_alpha)?) } else { None };

    Ok(SimReport {
        start: cfg.start,
        paths: cfg.paths,
        seed: cfg.seed,
        max_steps: cfg.max_steps,
        rho: tr.rho,
        alpha: cone.alpha,
        p_alpha: cone.p_alpha,
        truncated: acc.truncated,
        checks,
        tail,
    })
}

/// Weighted least-squares slope of `log P̂(τ > n)` against `log n` over dyadic `n ≥ 64`.
pub fn tail_exponent(cfg: &SimConfig) -> Result<TailFit> {
    cfg.validate()?;
    let tr = crate::walk::build_transform::<TF>(&cfg.walk)?;
    let t = [tr.t[0][0].to_f64(), tr.t[0][1].to_f64(), tr.t[1][1].to_f64()];
    let acc = simulate(cfg, None, t)?;
    fit_tail(&acc, cfg.paths, cfg.max_steps, tr.cone.p_alpha)
}
