//! Reconstruction attack games.
//!
//! Three variants share one configuration type:
//!
//! - `rero`: the informed game. The adversary holds all but one record; the
//!   target is drawn from the prior and appended at the last position.
//! - `avg_dist_rero`: the distributional game scored against a uniformly
//!   drawn record of the sampled dataset.
//! - `bc_dist_rero`: the distributional game scored against the closest
//!   record of the sampled dataset.
//!
//! Success probabilities are computed exactly by enumerating latents and
//! outputs, or estimated by seeded Monte Carlo with Clopper-Pearson
//! intervals. Trials are independent and deterministic per `(seed, trial)`,
//! so estimates are bit-identical at any parallelism level.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{
    self, argmax_guess, empirical_draws, oblivious_guess, separation_adversary, success_balls,
    AdversaryContext, AdversaryKind, EmpiricalDraw,
};
use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::mechanism::{Mechanism, MechanismKind};
use crate::record::{Dataset, RecordId};
use crate::seed::{derive_rng, StreamDomain};
use crate::stats::clopper_pearson;
use crate::DEFAULT_ENUMERATION_CAP;

/// Which reconstruction game is played.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameVariant {
    Rero,
    AvgDistRero,
    BcDistRero,
}

impl GameVariant {
    pub fn name(&self) -> &'static str {
        match self {
            GameVariant::Rero => "rero",
            GameVariant::AvgDistRero => "avg_dist_rero",
            GameVariant::BcDistRero => "bc_dist_rero",
        }
    }

    pub fn is_distributional(&self) -> bool {
        !matches!(self, GameVariant::Rero)
    }
}

/// A fully specified game: prior, mechanism, adversary, loss, and (for the
/// informed variant) the fixed known records.
#[derive(Debug, Clone)]
pub struct GameConfig {
    variant: GameVariant,
    prior: Distribution,
    mechanism: Mechanism,
    adversary: AdversaryKind,
    loss: LossSpec,
    fixed_context: Option<Dataset>,
    enumeration_cap: u64,
}

impl GameConfig {
    pub fn new(
        variant: GameVariant,
        prior: Distribution,
        mechanism: Mechanism,
        adversary: AdversaryKind,
        loss: LossSpec,
        fixed_context: Option<Dataset>,
    ) -> Result<Self> {
        let cfg = Self {
            variant,
            prior,
            mechanism,
            adversary,
            loss,
            fixed_context,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.enumeration_cap = cap;
        self
    }

    /// The same game with a different adversary.
    pub fn with_adversary(&self, adversary: AdversaryKind) -> Result<Self> {
        let mut cfg = self.clone();
        cfg.adversary = adversary;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The same components in a different variant. The informed variant
    /// needs its known records, distributional variants must not have any.
    pub fn to_variant(&self, variant: GameVariant, fixed_context: Option<Dataset>) -> Result<Self> {
        let mut cfg = self.clone();
        cfg.variant = variant;
        cfg.fixed_context = fixed_context;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.prior.universe() != self.mechanism.universe() {
            return Err(Error::config(
                "prior and mechanism disagree on the universe",
            ));
        }
        self.loss.check_universe(self.prior.universe())?;
        match self.variant {
            GameVariant::Rero => {
                let ctx = self.fixed_context.as_ref().ok_or_else(|| {
                    Error::config("the informed game needs fixed_context with n - 1 records")
                })?;
                if ctx.len() + 1 != self.mechanism.n() {
                    return Err(Error::config(format!(
                        "fixed_context has {} records, expected n - 1 = {}",
                        ctx.len(),
                        self.mechanism.n() - 1
                    )));
                }
                for r in ctx.records() {
                    if !self.prior.universe().contains(*r) {
                        return Err(Error::config("fixed_context record outside the universe"));
                    }
                }
            }
            GameVariant::AvgDistRero | GameVariant::BcDistRero => {
                if self.fixed_context.is_some() {
                    return Err(Error::config(
                        "distributional games take no fixed_context; the adversary knows only the prior",
                    ));
                }
            }
        }
        match self.adversary {
            AdversaryKind::SeparationFixture => {
                if !matches!(self.mechanism.kind(), MechanismKind::Separation) {
                    return Err(Error::config(
                        "the separation fixture adversary only plays against the separation mechanism",
                    ));
                }
            }
            AdversaryKind::EmpiricalBayes { samples: 0 } => {
                return Err(Error::config("empirical_bayes needs samples >= 1"));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn variant(&self) -> GameVariant {
        self.variant
    }

    pub fn prior(&self) -> &Distribution {
        &self.prior
    }

    pub fn mechanism(&self) -> &Mechanism {
        &self.mechanism
    }

    pub fn adversary(&self) -> AdversaryKind {
        self.adversary
    }

    pub fn loss(&self) -> &LossSpec {
        &self.loss
    }

    pub fn fixed_context(&self) -> Option<&Dataset> {
        self.fixed_context.as_ref()
    }

    pub fn n(&self) -> usize {
        self.mechanism.n()
    }

    pub fn enumeration_cap(&self) -> u64 {
        self.enumeration_cap
    }

    fn adversary_context<'a>(&'a self, sample_seed: u64) -> AdversaryContext<'a> {
        AdversaryContext {
            prior: &self.prior,
            mechanism: &self.mechanism,
            loss: &self.loss,
            known_records: self.fixed_context.as_ref(),
            enumeration_cap: self.enumeration_cap,
            sample_seed,
        }
    }
}

/// One play of a game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub loss: f64,
    pub success: bool,
    pub guess: RecordId,
    /// Dense index of the observed mechanism output.
    pub output: u64,
    pub fell_back: bool,
}

/// The adversary of one run, with per-output guesses memoized so repeated
/// outputs are resolved once. Guesses are pure functions of the output, so
/// concurrent trials always agree.
struct CompiledAdversary<'a> {
    cfg: &'a GameConfig,
    balls: Vec<Vec<RecordId>>,
    strategy: Strategy,
    memo: Mutex<HashMap<u64, (RecordId, bool)>>,
    sample_seed: u64,
}

enum Strategy {
    Oblivious { guess: RecordId },
    Fixture,
    ExactBayes,
    Empirical { draws: Vec<EmpiricalDraw> },
}

impl<'a> CompiledAdversary<'a> {
    fn new(cfg: &'a GameConfig, sample_seed: u64) -> Result<Self> {
        let balls = success_balls(&cfg.loss, cfg.prior.universe())?;
        let strategy = match cfg.adversary {
            AdversaryKind::ObliviousBaseline => {
                let (guess, _) = oblivious_guess(&cfg.prior, &cfg.loss, cfg.variant, cfg.n())?;
                Strategy::Oblivious { guess }
            }
            AdversaryKind::SeparationFixture => Strategy::Fixture,
            AdversaryKind::ExactBayes => {
                // The posterior enumerates the latent space; refuse upfront
                // when that is out of cap.
                let latents = latent_count(cfg)?;
                if latents > cfg.enumeration_cap as u128 {
                    return Err(Error::CapExceeded {
                        needed: latents,
                        cap: cfg.enumeration_cap,
                    });
                }
                Strategy::ExactBayes
            }
            AdversaryKind::EmpiricalBayes { samples } => {
                let ctx = cfg.adversary_context(sample_seed);
                Strategy::Empirical {
                    draws: empirical_draws(&ctx, cfg.variant, samples)?,
                }
            }
        };
        Ok(Self {
            cfg,
            balls,
            strategy,
            memo: Mutex::new(HashMap::new()),
            sample_seed,
        })
    }

    fn guess(&self, theta: u64) -> Result<(RecordId, bool)> {
        match &self.strategy {
            Strategy::Oblivious { guess } => Ok((*guess, false)),
            Strategy::Fixture => {
                let symbol = self.cfg.mechanism.symbol(theta);
                Ok((
                    separation_adversary(self.cfg.prior.universe(), &symbol)?,
                    false,
                ))
            }
            Strategy::ExactBayes | Strategy::Empirical { .. } => {
                if let Some(hit) = self.memo.lock().unwrap().get(&theta) {
                    return Ok(*hit);
                }
                let resolved = self.resolve_posterior_guess(theta)?;
                self.memo.lock().unwrap().insert(theta, resolved);
                Ok(resolved)
            }
        }
    }

    fn resolve_posterior_guess(&self, theta: u64) -> Result<(RecordId, bool)> {
        let ctx = self.cfg.adversary_context(self.sample_seed);
        let g = match &self.strategy {
            Strategy::ExactBayes => {
                adversary::bayes_guess(AdversaryKind::ExactBayes, theta, &ctx, self.cfg.variant)?
            }
            Strategy::Empirical { draws } => {
                let s = adversary::score_weighted_latents(
                    draws.iter().map(|d| (&d.input, d.targets.as_slice(), 1.0)),
                    &self.cfg.mechanism,
                    &self.balls,
                    self.cfg.variant,
                    theta,
                );
                adversary::finish_posterior_guess(&s, &ctx, self.cfg.variant, self.cfg.n())?
            }
            _ => unreachable!("only posterior strategies are resolved"),
        };
        Ok((g.guess, g.fell_back))
    }
}

fn latent_count(cfg: &GameConfig) -> Result<u128> {
    let size = cfg.prior.universe().size() as u128;
    match cfg.variant {
        GameVariant::Rero => Ok(size),
        _ => size
            .checked_pow(cfg.n() as u32)
            .ok_or_else(|| Error::config("latent dataset space overflows")),
    }
}

fn trial_once(
    cfg: &GameConfig,
    adv: &CompiledAdversary<'_>,
    seed: u64,
    trial: u64,
) -> Result<TrialOutcome> {
    let universe = cfg.prior.universe();
    match cfg.variant {
        GameVariant::Rero => {
            let target = cfg.prior.sample_record(seed, trial);
            let x = cfg
                .fixed_context()
                .expect("validated")
                .with_appended(target);
            let mut mech_rng = derive_rng(seed, trial, StreamDomain::Mechanism);
            let theta = cfg.mechanism.sample_output_with(&x, &mut mech_rng);
            let (guess, fell_back) = adv.guess(theta)?;
            let loss = cfg.loss.loss(universe, target, guess)?;
            Ok(TrialOutcome {
                loss,
                success: loss <= cfg.loss.eta,
                guess,
                output: theta,
                fell_back,
            })
        }
        GameVariant::AvgDistRero | GameVariant::BcDistRero => {
            let x = cfg.prior.sample_dataset(cfg.n(), seed, trial);
            let mut mech_rng = derive_rng(seed, trial, StreamDomain::Mechanism);
            let theta = cfg.mechanism.sample_output_with(&x, &mut mech_rng);
            let (guess, fell_back) = adv.guess(theta)?;
            let loss = match cfg.variant {
                GameVariant::AvgDistRero => {
                    let mut idx_rng = derive_rng(seed, trial, StreamDomain::TargetIndex);
                    let i = idx_rng.random_range(0..cfg.n());
                    cfg.loss.loss(universe, x.get(i), guess)?
                }
                _ => {
                    let mut best = f64::INFINITY;
                    for r in x.records() {
                        best = best.min(cfg.loss.loss(universe, *r, guess)?);
                    }
                    best
                }
            };
            Ok(TrialOutcome {
                loss,
                success: loss <= cfg.loss.eta,
                guess,
                output: theta,
                fell_back,
            })
        }
    }
}

/// One play of the informed game: draw the target, run the mechanism on the
/// known records plus the target (appended last), ask the adversary.
pub fn run_rero_trial(cfg: &GameConfig, seed: u64, trial: u64) -> Result<TrialOutcome> {
    if cfg.variant != GameVariant::Rero {
        return Err(Error::config("run_rero_trial needs a rero-variant config"));
    }
    let adv = CompiledAdversary::new(cfg, seed)?;
    trial_once(cfg, &adv, seed, trial)
}

/// One play of a distributional game: draw the dataset, run the mechanism,
/// score the guess against a uniform record (average variant) or the
/// closest record (best-case variant).
pub fn run_distrero_trial(cfg: &GameConfig, seed: u64, trial: u64) -> Result<TrialOutcome> {
    if !cfg.variant.is_distributional() {
        return Err(Error::config(
            "run_distrero_trial needs a distributional config",
        ));
    }
    let adv = CompiledAdversary::new(cfg, seed)?;
    trial_once(cfg, &adv, seed, trial)
}

/// Options for the Monte Carlo estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions {
    pub trials: u64,
    pub seed: u64,
    pub threads: usize,
    /// Clopper-Pearson confidence level.
    pub ci_level: f64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            trials: 100_000,
            seed: 0,
            threads: 1,
            ci_level: 0.99,
        }
    }
}

/// Result of a Monte Carlo estimation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub gamma_hat: f64,
    pub successes: u64,
    pub trials: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_level: f64,
    pub seed: u64,
    /// Trials whose output forced the oblivious fallback.
    pub fallback_trials: u64,
}

/// Estimate the game's success probability over `trials` independent plays.
/// Bit-identical results for fixed `(config, trials, seed)` at any thread
/// count: every trial derives its own streams and the merge is a sum.
pub fn estimate_gamma(cfg: &GameConfig, opts: &EstimateOptions) -> Result<EstimationResult> {
    if opts.trials == 0 {
        return Err(Error::config("estimation needs at least one trial"));
    }
    let adv = CompiledAdversary::new(cfg, opts.seed)?;
    let threads = opts.threads.clamp(1, opts.trials as usize);

    let run_range = |lo: u64, hi: u64| -> Result<(u64, u64)> {
        let mut successes = 0u64;
        let mut fallbacks = 0u64;
        for t in lo..hi {
            let outcome = trial_once(cfg, &adv, opts.seed, t)?;
            if outcome.success {
                successes += 1;
            }
            if outcome.fell_back {
                fallbacks += 1;
            }
        }
        Ok((successes, fallbacks))
    };

    let (successes, fallbacks) = if threads == 1 {
        run_range(0, opts.trials)?
    } else {
        let chunk = opts.trials.div_ceil(threads as u64);
        let results: Vec<Result<(u64, u64)>> = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for w in 0..threads as u64 {
                let lo = w * chunk;
                let hi = ((w + 1) * chunk).min(opts.trials);
                let run = &run_range;
                handles.push(scope.spawn(move || run(lo, hi)));
            }
            handles
                .into_iter()
                .map(|h| h.join().expect("estimator worker panicked"))
                .collect()
        });
        let mut total = (0u64, 0u64);
        for r in results {
            let (s, f) = r?;
            total.0 += s;
            total.1 += f;
        }
        total
    };

    let gamma_hat = successes as f64 / opts.trials as f64;
    let (ci_low, ci_high) = clopper_pearson(successes, opts.trials, opts.ci_level)?;
    Ok(EstimationResult {
        gamma_hat,
        successes,
        trials: opts.trials,
        ci_low,
        ci_high,
        ci_level: opts.ci_level,
        seed: opts.seed,
        fallback_trials: fallbacks,
    })
}

/// Success probability conditioned on one output symbol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConditional {
    pub symbol: String,
    pub probability: f64,
    pub success_given_output: f64,
}

/// Exact evaluation result. `gamma` equals the probability-weighted sum of
/// the per-output conditional successes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactResult {
    pub gamma: f64,
    pub by_output: Vec<OutputConditional>,
}

/// Exact success probability by full enumeration of latents (the target or
/// dataset the prior can produce) and mechanism outputs. The average-target
/// variant averages over the target index analytically. Errors when the
/// state count `latents x alphabet` exceeds the cap, or for the empirical
/// adversary, whose guesses are not a deterministic function of the output.
pub fn exact_gamma(cfg: &GameConfig) -> Result<ExactResult> {
    if matches!(cfg.adversary, AdversaryKind::EmpiricalBayes { .. }) {
        return Err(Error::config(
            "exact evaluation needs a deterministic adversary; estimate empirical_bayes instead",
        ));
    }
    let size = cfg.prior.universe().size();
    let alphabet_len = cfg.mechanism.alphabet_len();
    let latents = latent_count(cfg)?;
    let states = latents
        .checked_mul(alphabet_len)
        .ok_or_else(|| Error::config("exact state space overflows"))?;
    if states > cfg.enumeration_cap as u128 {
        return Err(Error::CapExceeded {
            needed: states,
            cap: cfg.enumeration_cap,
        });
    }
    let alphabet = alphabet_len as usize;
    if alphabet.checked_mul(size).is_none_or(|m| m > 200_000_000) {
        return Err(Error::config(
            "exact evaluation would need too much score memory",
        ));
    }

    let balls = success_balls(&cfg.loss, cfg.prior.universe())?;
    let mut mass = vec![0.0f64; alphabet];
    let mut scores = vec![0.0f64; alphabet * size];
    let mut row = vec![0.0f64; alphabet];

    // Per-latent candidate multiplicities, stamp-reset between latents.
    let mut mult = vec![0.0f64; size];
    let mut mark = vec![0u64; size];
    let mut touched: Vec<usize> = Vec::with_capacity(size);
    let mut stamp = 0u64;

    let mut visit = |input: &Dataset, targets: &[RecordId], weight: f64| {
        if weight == 0.0 {
            return;
        }
        stamp += 1;
        touched.clear();
        for target in targets {
            for cand in &balls[target.index()] {
                let c = cand.index();
                if mark[c] != stamp {
                    mark[c] = stamp;
                    mult[c] = 0.0;
                    touched.push(c);
                }
                if cfg.variant == GameVariant::BcDistRero {
                    mult[c] = 1.0;
                } else {
                    mult[c] += 1.0;
                }
            }
        }
        cfg.mechanism.fill_output_row(input, &mut row);
        for (y, p) in row.iter().enumerate() {
            if *p == 0.0 {
                continue;
            }
            let w = weight * p;
            mass[y] += w;
            let base = y * size;
            for &c in &touched {
                scores[base + c] += w * mult[c];
            }
        }
    };

    match cfg.variant {
        GameVariant::Rero => {
            let known = cfg.fixed_context().expect("validated");
            for z in cfg.prior.universe().records() {
                let x = known.with_appended(z);
                visit(&x, &[z], cfg.prior.prob(z));
            }
        }
        GameVariant::AvgDistRero | GameVariant::BcDistRero => {
            for (x, w) in cfg.prior.enumerate_datasets(cfg.n(), cfg.enumeration_cap)? {
                let targets = x.records().to_vec();
                visit(&x, &targets, w);
            }
        }
    }

    let scale = if cfg.variant == GameVariant::AvgDistRero {
        cfg.n() as f64
    } else {
        1.0
    };
    let oblivious = match cfg.adversary {
        AdversaryKind::ObliviousBaseline => {
            Some(oblivious_guess(&cfg.prior, &cfg.loss, cfg.variant, cfg.n())?.0)
        }
        _ => None,
    };

    let mut gamma_numerator = 0.0;
    let mut by_output = Vec::new();
    for y in 0..alphabet {
        if mass[y] == 0.0 {
            continue;
        }
        let guess = match cfg.adversary {
            AdversaryKind::ExactBayes => argmax_guess(&scores[y * size..(y + 1) * size]),
            AdversaryKind::ObliviousBaseline => oblivious.expect("precomputed"),
            AdversaryKind::SeparationFixture => {
                separation_adversary(cfg.prior.universe(), &cfg.mechanism.symbol(y as u64))?
            }
            AdversaryKind::EmpiricalBayes { .. } => unreachable!("rejected above"),
        };
        let succ = scores[y * size + guess.index()];
        gamma_numerator += succ;
        by_output.push(OutputConditional {
            symbol: cfg.mechanism.symbol(y as u64).render(cfg.prior.universe()),
            probability: mass[y],
            success_given_output: succ / (mass[y] * scale),
        });
    }

    Ok(ExactResult {
        gamma: gamma_numerator / scale,
        by_output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::LossKind;
    use crate::record::RecordUniverse;

    fn uniform_bits(k: u32) -> Distribution {
        Distribution::uniform(RecordUniverse::bitstring(k).unwrap())
    }

    fn game(
        variant: GameVariant,
        prior: Distribution,
        kind: MechanismKind,
        adversary: AdversaryKind,
        n: usize,
        fixed_context: Option<Dataset>,
    ) -> GameConfig {
        let mech = Mechanism::new(kind, prior.universe().clone(), n).unwrap();
        GameConfig::new(
            variant,
            prior,
            mech,
            adversary,
            LossSpec::exact_match(),
            fixed_context,
        )
        .unwrap()
    }

    #[test]
    fn identity_rero_always_succeeds() {
        let cfg = game(
            GameVariant::Rero,
            uniform_bits(2),
            MechanismKind::Identity,
            AdversaryKind::ExactBayes,
            2,
            Some(Dataset::new(vec![RecordId(1)])),
        );
        for t in 0..50 {
            assert!(run_rero_trial(&cfg, 0, t).unwrap().success);
        }
        assert_eq!(exact_gamma(&cfg).unwrap().gamma, 1.0);
    }

    #[test]
    fn constant_rero_long_run_rate_is_the_baseline() {
        // Uniform over {0,1}^4: the oblivious rate is 1/16.
        let cfg = game(
            GameVariant::Rero,
            uniform_bits(4),
            MechanismKind::Constant,
            AdversaryKind::ExactBayes,
            3,
            Some(Dataset::new(vec![RecordId(0), RecordId(0)])),
        );
        let est = estimate_gamma(
            &cfg,
            &EstimateOptions {
                trials: 100_000,
                seed: 1,
                threads: 1,
                ci_level: 0.99,
            },
        )
        .unwrap();
        assert!(
            est.ci_low <= 1.0 / 16.0 && 1.0 / 16.0 <= est.ci_high,
            "{est:?}"
        );
        assert_eq!(exact_gamma(&cfg).unwrap().gamma, 1.0 / 16.0);
    }

    #[test]
    fn separation_rero_with_zero_context_always_succeeds() {
        let cfg = game(
            GameVariant::Rero,
            uniform_bits(3),
            MechanismKind::Separation,
            AdversaryKind::SeparationFixture,
            3,
            Some(Dataset::new(vec![RecordId(0), RecordId(0)])),
        );
        for t in 0..100 {
            assert!(run_rero_trial(&cfg, 7, t).unwrap().success);
        }
        assert_eq!(exact_gamma(&cfg).unwrap().gamma, 1.0);
    }

    #[test]
    fn constant_avg_gamma_equals_kappa_exactly() {
        let cfg = game(
            GameVariant::AvgDistRero,
            uniform_bits(2),
            MechanismKind::Constant,
            AdversaryKind::ExactBayes,
            2,
            None,
        );
        assert_eq!(exact_gamma(&cfg).unwrap().gamma, 0.25);
    }

    #[test]
    fn constant_bc_gamma_has_the_closed_form() {
        // Uniform over {0,1}^4, n = 3: 1 - (15/16)^3, cross-checked against
        // an independent enumeration oracle over datasets.
        let cfg = game(
            GameVariant::BcDistRero,
            uniform_bits(4),
            MechanismKind::Constant,
            AdversaryKind::ExactBayes,
            3,
            None,
        );
        let gamma = exact_gamma(&cfg).unwrap().gamma;
        assert_eq!(gamma, 0.176025390625);

        // Oracle: count ordered triples over {0..15} containing record 0.
        let mut hit = 0u64;
        for a in 0..16u32 {
            for b in 0..16u32 {
                for c in 0..16u32 {
                    if a == 0 || b == 0 || c == 0 {
                        hit += 1;
                    }
                }
            }
        }
        assert_eq!(gamma, hit as f64 / 4096.0);

        let est = estimate_gamma(
            &cfg,
            &EstimateOptions {
                trials: 100_000,
                seed: 3,
                threads: 1,
                ci_level: 0.999,
            },
        )
        .unwrap();
        assert!(est.ci_low <= gamma && gamma <= est.ci_high);
    }

    #[test]
    fn identity_bc_with_bayes_always_succeeds() {
        let cfg = game(
            GameVariant::BcDistRero,
            uniform_bits(2),
            MechanismKind::Identity,
            AdversaryKind::ExactBayes,
            2,
            None,
        );
        assert_eq!(exact_gamma(&cfg).unwrap().gamma, 1.0);
    }

    #[test]
    fn randomized_response_two_hypothesis_gamma() {
        // Size-2 universe, eps = ln 3, n = 1, average variant: 3/4.
        let cfg = game(
            GameVariant::AvgDistRero,
            uniform_bits(1),
            MechanismKind::RandomizedResponse {
                epsilon: 3.0f64.ln(),
            },
            AdversaryKind::ExactBayes,
            1,
            None,
        );
        let r = exact_gamma(&cfg).unwrap();
        assert!((r.gamma - 0.75).abs() < 1e-12);
        // Decomposition re-sums to gamma.
        let resum: f64 = r
            .by_output
            .iter()
            .map(|o| o.probability * o.success_given_output)
            .sum();
        assert!((resum - r.gamma).abs() < 1e-12);
    }

    #[test]
    fn zero_success_estimates() {
        // Point mass away from zero keeps the separation mechanism silent
        // and the fixture guesses the all-one record: never a match.
        let u = RecordUniverse::bitstring(2).unwrap();
        let prior = Distribution::point_mass(u.clone(), RecordId(1)).unwrap();
        let cfg = game(
            GameVariant::AvgDistRero,
            prior,
            MechanismKind::Separation,
            AdversaryKind::SeparationFixture,
            2,
            None,
        );
        let est = estimate_gamma(
            &cfg,
            &EstimateOptions {
                trials: 100,
                seed: 0,
                threads: 1,
                ci_level: 0.99,
            },
        )
        .unwrap();
        assert_eq!(est.successes, 0);
        assert_eq!(est.gamma_hat, 0.0);
        assert_eq!(est.ci_low, 0.0);
        assert!(est.ci_high > 0.0);
    }

    #[test]
    fn estimates_are_deterministic_and_thread_invariant() {
        let cfg = game(
            GameVariant::AvgDistRero,
            uniform_bits(2),
            MechanismKind::RandomizedResponse { epsilon: 1.0 },
            AdversaryKind::ExactBayes,
            2,
            None,
        );
        let base = EstimateOptions {
            trials: 20_000,
            seed: 42,
            threads: 1,
            ci_level: 0.99,
        };
        let a = estimate_gamma(&cfg, &base).unwrap();
        let b = estimate_gamma(&cfg, &base).unwrap();
        let c = estimate_gamma(&cfg, &EstimateOptions { threads: 8, ..base }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn gamma_is_monotone_in_eta() {
        let u = RecordUniverse::bitstring(2).unwrap();
        let prior = Distribution::uniform(u.clone());
        let mech =
            Mechanism::new(MechanismKind::RandomizedResponse { epsilon: 1.0 }, u, 2).unwrap();
        let mut last = 0.0;
        for eta in [0.0, 1.0, 2.0] {
            let cfg = GameConfig::new(
                GameVariant::AvgDistRero,
                prior.clone(),
                mech.clone(),
                AdversaryKind::ExactBayes,
                LossSpec::new(LossKind::Hamming, eta).unwrap(),
                None,
            )
            .unwrap();
            let gamma = exact_gamma(&cfg).unwrap().gamma;
            assert!(gamma >= last - 1e-12, "gamma dropped at eta {eta}");
            last = gamma;
        }
        assert!((last - 1.0).abs() < 1e-12);
    }

    #[test]
    fn avg_never_exceeds_bc() {
        for kind in [
            MechanismKind::Constant,
            MechanismKind::RandomizedResponse { epsilon: 0.5 },
            MechanismKind::NoisyHistogram { epsilon: 1.0 },
        ] {
            let avg = game(
                GameVariant::AvgDistRero,
                uniform_bits(2),
                kind.clone(),
                AdversaryKind::ExactBayes,
                2,
                None,
            );
            let bc = game(
                GameVariant::BcDistRero,
                uniform_bits(2),
                kind.clone(),
                AdversaryKind::ExactBayes,
                2,
                None,
            );
            let g_avg = exact_gamma(&avg).unwrap().gamma;
            let g_bc = exact_gamma(&bc).unwrap().gamma;
            assert!(g_avg <= g_bc + 1e-12, "{kind:?}: avg {g_avg} > bc {g_bc}");
        }
    }

    #[test]
    fn bayes_dominates_the_oblivious_baseline() {
        for kind in [
            MechanismKind::Constant,
            MechanismKind::Identity,
            MechanismKind::RandomizedResponse { epsilon: 1.0 },
            MechanismKind::NoisyHistogram { epsilon: 0.5 },
        ] {
            for variant in [GameVariant::AvgDistRero, GameVariant::BcDistRero] {
                let bayes = game(
                    variant,
                    uniform_bits(2),
                    kind.clone(),
                    AdversaryKind::ExactBayes,
                    2,
                    None,
                );
                let oblivious = bayes
                    .with_adversary(AdversaryKind::ObliviousBaseline)
                    .unwrap();
                let g_b = exact_gamma(&bayes).unwrap().gamma;
                let g_o = exact_gamma(&oblivious).unwrap().gamma;
                assert!(
                    g_b >= g_o - 1e-12,
                    "{kind:?} {variant:?}: bayes {g_b} < oblivious {g_o}"
                );
            }
        }
    }

    #[test]
    fn bayes_equals_baseline_on_the_constant_mechanism() {
        let avg = game(
            GameVariant::AvgDistRero,
            uniform_bits(3),
            MechanismKind::Constant,
            AdversaryKind::ExactBayes,
            2,
            None,
        );
        let (_, kappa) =
            oblivious_guess(avg.prior(), avg.loss(), GameVariant::AvgDistRero, 2).unwrap();
        assert_eq!(exact_gamma(&avg).unwrap().gamma, kappa);

        let bc = avg.to_variant(GameVariant::BcDistRero, None).unwrap();
        let (_, kappa_bar) =
            oblivious_guess(bc.prior(), bc.loss(), GameVariant::BcDistRero, 2).unwrap();
        assert_eq!(exact_gamma(&bc).unwrap().gamma, kappa_bar);
    }

    #[test]
    fn empirical_bayes_converges_to_exact_bayes() {
        let exact_cfg = game(
            GameVariant::AvgDistRero,
            uniform_bits(2),
            MechanismKind::RandomizedResponse { epsilon: 1.0 },
            AdversaryKind::ExactBayes,
            2,
            None,
        );
        let exact = exact_gamma(&exact_cfg).unwrap().gamma;
        let emp_cfg = exact_cfg
            .with_adversary(AdversaryKind::EmpiricalBayes { samples: 10_000 })
            .unwrap();
        let est = estimate_gamma(
            &emp_cfg,
            &EstimateOptions {
                trials: 50_000,
                seed: 5,
                threads: 4,
                ci_level: 0.99,
            },
        )
        .unwrap();
        assert!(
            (est.gamma_hat - exact).abs() <= 0.02,
            "empirical {} vs exact {exact}",
            est.gamma_hat
        );
    }

    #[test]
    fn fallback_trials_are_counted() {
        // A lopsided prior with one empirical draw: outputs revealing the
        // rare record have zero mass under the adversary's sample, forcing
        // the oblivious fallback on those trials.
        let u = RecordUniverse::bitstring(1).unwrap();
        let prior = Distribution::new(u.clone(), vec![0.9, 0.1]).unwrap();
        let mech = Mechanism::new(MechanismKind::Identity, u, 1).unwrap();
        let cfg = GameConfig::new(
            GameVariant::AvgDistRero,
            prior,
            mech,
            AdversaryKind::EmpiricalBayes { samples: 1 },
            LossSpec::exact_match(),
            None,
        )
        .unwrap();
        let est = estimate_gamma(
            &cfg,
            &EstimateOptions {
                trials: 2_000,
                seed: 0,
                threads: 1,
                ci_level: 0.99,
            },
        )
        .unwrap();
        // Whichever record the single draw hit, the other one's outputs
        // fall back, and they are counted per trial.
        assert!(est.fallback_trials >= 100, "{est:?}");
    }

    #[test]
    fn exact_mode_rejects_the_empirical_adversary() {
        let cfg = game(
            GameVariant::AvgDistRero,
            uniform_bits(1),
            MechanismKind::Constant,
            AdversaryKind::EmpiricalBayes { samples: 10 },
            1,
            None,
        );
        assert!(exact_gamma(&cfg).is_err());
    }

    #[test]
    fn exact_mode_respects_the_cap() {
        let cfg = game(
            GameVariant::AvgDistRero,
            uniform_bits(4),
            MechanismKind::RandomizedResponse { epsilon: 1.0 },
            AdversaryKind::ExactBayes,
            3,
            None,
        )
        .with_cap(1000);
        assert!(matches!(exact_gamma(&cfg), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn config_validation_catches_mismatches() {
        let prior = uniform_bits(2);
        let mech = Mechanism::new(MechanismKind::Constant, prior.universe().clone(), 2).unwrap();
        // Missing context for the informed game.
        assert!(GameConfig::new(
            GameVariant::Rero,
            prior.clone(),
            mech.clone(),
            AdversaryKind::ExactBayes,
            LossSpec::exact_match(),
            None,
        )
        .is_err());
        // Context in a distributional game.
        assert!(GameConfig::new(
            GameVariant::AvgDistRero,
            prior.clone(),
            mech.clone(),
            AdversaryKind::ExactBayes,
            LossSpec::exact_match(),
            Some(Dataset::new(vec![RecordId(0)])),
        )
        .is_err());
        // Fixture adversary against a non-separation mechanism.
        assert!(GameConfig::new(
            GameVariant::AvgDistRero,
            prior,
            mech,
            AdversaryKind::SeparationFixture,
            LossSpec::exact_match(),
            None,
        )
        .is_err());
    }

    #[test]
    fn trial_wrappers_check_the_variant() {
        let cfg = game(
            GameVariant::AvgDistRero,
            uniform_bits(1),
            MechanismKind::Constant,
            AdversaryKind::ExactBayes,
            1,
            None,
        );
        assert!(run_rero_trial(&cfg, 0, 0).is_err());
        assert!(run_distrero_trial(&cfg, 0, 0).is_ok());
    }
}
