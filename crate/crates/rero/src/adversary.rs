//! Reconstruction adversaries.
//!
//! Every strategy is a pure function of the observed output and the game
//! context. Ties always break toward the smallest record index so audits
//! are reproducible, and Bayes-optimal strategies maximize the thresholded
//! success probability `Pr[loss <= eta]`, not expected loss.

use serde::{Deserialize, Serialize};

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::game::GameVariant;
use crate::loss::LossSpec;
use crate::mechanism::{Mechanism, OutputSymbol};
use crate::record::{Dataset, RecordId, RecordUniverse};
use crate::seed::{derive_rng, StreamDomain};

/// The adversary library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdversaryKind {
    /// Ignores the output: the best fixed guess under the prior.
    ObliviousBaseline,
    /// Maximizes the exact posterior success probability given the output.
    ExactBayes,
    /// Replaces the exact posterior with importance counts over `samples`
    /// prior draws; same tie-break as the exact version.
    EmpiricalBayes { samples: u64 },
    /// The fixture for the separation mechanism: returns the output record
    /// when there is one, the all-one record on bottom.
    SeparationFixture,
}

impl AdversaryKind {
    pub fn name(&self) -> &'static str {
        match self {
            AdversaryKind::ObliviousBaseline => "oblivious_baseline",
            AdversaryKind::ExactBayes => "exact_bayes",
            AdversaryKind::EmpiricalBayes { .. } => "empirical_bayes",
            AdversaryKind::SeparationFixture => "separation_fixture",
        }
    }
}

/// Everything an adversary may condition on besides the observed output.
#[derive(Debug, Clone, Copy)]
pub struct AdversaryContext<'a> {
    pub prior: &'a Distribution,
    pub mechanism: &'a Mechanism,
    pub loss: &'a LossSpec,
    /// The `n - 1` known records of the informed game; absent in the
    /// distributional games.
    pub known_records: Option<&'a Dataset>,
    pub enumeration_cap: u64,
    /// Seed for the empirical adversary's own prior draws.
    pub sample_seed: u64,
}

/// A guess together with its conditional success probability given the
/// observed output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BayesGuess {
    pub guess: RecordId,
    pub posterior_success: f64,
    /// Set when the output had zero probability under every latent the
    /// adversary considered, forcing the oblivious fallback.
    pub fell_back: bool,
}

/// Baseline objective of the fixed guess `z0`: the success probability of
/// an adversary with no mechanism access. For the best-case game the guess
/// succeeds when any of the `n` i.i.d. records lands within `eta`.
pub fn oblivious_objective(
    prior: &Distribution,
    loss: &LossSpec,
    variant: GameVariant,
    n: usize,
    z0: RecordId,
) -> Result<f64> {
    let ball = loss.success_ball(prior.universe(), z0)?;
    let p: f64 = ball.iter().map(|r| prior.prob(*r)).sum();
    Ok(match variant {
        GameVariant::Rero | GameVariant::AvgDistRero => p,
        GameVariant::BcDistRero => {
            if n == 1 {
                p
            } else {
                1.0 - (1.0 - p).powi(n as i32)
            }
        }
    })
}

/// The best fixed guess and its baseline objective; ties break toward the
/// smallest record index.
pub fn oblivious_guess(
    prior: &Distribution,
    loss: &LossSpec,
    variant: GameVariant,
    n: usize,
) -> Result<(RecordId, f64)> {
    let mut best = RecordId(0);
    let mut best_value = f64::NEG_INFINITY;
    for z0 in prior.universe().records() {
        let value = oblivious_objective(prior, loss, variant, n, z0)?;
        if value > best_value {
            best = z0;
            best_value = value;
        }
    }
    Ok((best, best_value))
}

/// The separation fixture strategy.
pub fn separation_adversary(universe: &RecordUniverse, theta: &OutputSymbol) -> Result<RecordId> {
    match theta {
        OutputSymbol::Record(r) => Ok(*r),
        OutputSymbol::Bottom => universe.all_ones(),
        other => Err(Error::config(format!(
            "the separation adversary only understands record/bottom outputs, got {other:?}"
        ))),
    }
}

/// One prior draw of the empirical adversary: the mechanism input it
/// hypothesizes and the target records the guess is scored against.
#[derive(Debug, Clone)]
pub(crate) struct EmpiricalDraw {
    pub input: Dataset,
    pub targets: Vec<RecordId>,
}

pub(crate) fn empirical_draws(
    ctx: &AdversaryContext<'_>,
    variant: GameVariant,
    samples: u64,
) -> Result<Vec<EmpiricalDraw>> {
    if samples == 0 {
        return Err(Error::config("empirical_bayes needs samples >= 1"));
    }
    let n = ctx.mechanism.n();
    let mut rng = derive_rng(ctx.sample_seed, 0, StreamDomain::Adversary);
    let mut draws = Vec::with_capacity(samples as usize);
    for _ in 0..samples {
        let draw = match variant {
            GameVariant::Rero => {
                let known = ctx
                    .known_records
                    .ok_or_else(|| Error::config("informed game needs known records"))?;
                let z = ctx.prior.sample_record_with(&mut rng);
                EmpiricalDraw {
                    input: known.with_appended(z),
                    targets: vec![z],
                }
            }
            GameVariant::AvgDistRero | GameVariant::BcDistRero => {
                let x = ctx.prior.sample_dataset_with(n, &mut rng);
                let targets = x.records().to_vec();
                EmpiricalDraw { input: x, targets }
            }
        };
        draws.push(draw);
    }
    Ok(draws)
}

/// Per-candidate success mass and total mass over a set of weighted latent
/// hypotheses, given the observed output. For the average-target game the
/// scores count record hits and are interpreted against `mass * n`.
pub(crate) struct OutputScores {
    pub scores: Vec<f64>,
    pub mass: f64,
}

pub(crate) fn score_weighted_latents<'a>(
    latents: impl Iterator<Item = (&'a Dataset, &'a [RecordId], f64)>,
    mechanism: &Mechanism,
    balls: &[Vec<RecordId>],
    variant: GameVariant,
    theta: u64,
) -> OutputScores {
    let size = mechanism.universe().size();
    let mut scores = vec![0.0; size];
    let mut mass = 0.0;
    let mut mark = vec![0u64; size];
    let mut stamp = 0u64;
    for (input, targets, weight) in latents {
        if weight == 0.0 {
            continue;
        }
        let w = weight * mechanism.likelihood(input, theta);
        if w == 0.0 {
            continue;
        }
        mass += w;
        match variant {
            GameVariant::Rero | GameVariant::AvgDistRero => {
                for target in targets {
                    for cand in &balls[target.index()] {
                        scores[cand.index()] += w;
                    }
                }
            }
            GameVariant::BcDistRero => {
                stamp += 1;
                for target in targets {
                    for cand in &balls[target.index()] {
                        let c = cand.index();
                        if mark[c] != stamp {
                            mark[c] = stamp;
                            scores[c] += w;
                        }
                    }
                }
            }
        }
    }
    OutputScores { scores, mass }
}

fn exact_latent_scores(
    ctx: &AdversaryContext<'_>,
    variant: GameVariant,
    balls: &[Vec<RecordId>],
    theta: u64,
) -> Result<OutputScores> {
    let n = ctx.mechanism.n();
    match variant {
        GameVariant::Rero => {
            let known = ctx
                .known_records
                .ok_or_else(|| Error::config("informed game needs known records"))?;
            let mut items = Vec::with_capacity(ctx.prior.universe().size());
            for z in ctx.prior.universe().records() {
                items.push((known.with_appended(z), vec![z], ctx.prior.prob(z)));
            }
            Ok(score_weighted_latents(
                items.iter().map(|(x, t, w)| (x, t.as_slice(), *w)),
                ctx.mechanism,
                balls,
                variant,
                theta,
            ))
        }
        GameVariant::AvgDistRero | GameVariant::BcDistRero => {
            let mut items = Vec::new();
            for (x, w) in ctx.prior.enumerate_datasets(n, ctx.enumeration_cap)? {
                let targets = x.records().to_vec();
                items.push((x, targets, w));
            }
            Ok(score_weighted_latents(
                items.iter().map(|(x, t, w)| (x, t.as_slice(), *w)),
                ctx.mechanism,
                balls,
                variant,
                theta,
            ))
        }
    }
}

/// Smallest-index argmax over candidate scores.
pub(crate) fn argmax_guess(scores: &[f64]) -> RecordId {
    let mut best = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    for (i, s) in scores.iter().enumerate() {
        if *s > best_score {
            best = i;
            best_score = *s;
        }
    }
    RecordId(best as u32)
}

/// The guess of `kind` on output `theta`, with its conditional success
/// probability. Zero-posterior outputs fall back to the oblivious guess
/// rather than erroring, and the fallback is flagged.
pub fn bayes_guess(
    kind: AdversaryKind,
    theta: u64,
    ctx: &AdversaryContext<'_>,
    variant: GameVariant,
) -> Result<BayesGuess> {
    let universe = ctx.prior.universe();
    if universe != ctx.mechanism.universe() {
        return Err(Error::config(
            "prior and mechanism disagree on the universe",
        ));
    }
    let n = ctx.mechanism.n();
    match kind {
        AdversaryKind::SeparationFixture => {
            let symbol = ctx.mechanism.symbol(theta);
            let guess = separation_adversary(universe, &symbol)?;
            let balls = success_balls(ctx.loss, universe)?;
            let s = exact_latent_scores(ctx, variant, &balls, theta)?;
            let success = conditional_success(&s, guess, variant, n);
            Ok(BayesGuess {
                guess,
                posterior_success: success,
                fell_back: false,
            })
        }
        AdversaryKind::ObliviousBaseline => {
            let (guess, _) = oblivious_guess(ctx.prior, ctx.loss, variant, n)?;
            let balls = success_balls(ctx.loss, universe)?;
            let s = exact_latent_scores(ctx, variant, &balls, theta)?;
            let success = conditional_success(&s, guess, variant, n);
            Ok(BayesGuess {
                guess,
                posterior_success: success,
                fell_back: false,
            })
        }
        AdversaryKind::ExactBayes => {
            let balls = success_balls(ctx.loss, universe)?;
            let s = exact_latent_scores(ctx, variant, &balls, theta)?;
            finish_posterior_guess(&s, ctx, variant, n)
        }
        AdversaryKind::EmpiricalBayes { samples } => {
            let balls = success_balls(ctx.loss, universe)?;
            let draws = empirical_draws(ctx, variant, samples)?;
            let s = score_weighted_latents(
                draws.iter().map(|d| (&d.input, d.targets.as_slice(), 1.0)),
                ctx.mechanism,
                &balls,
                variant,
                theta,
            );
            finish_posterior_guess(&s, ctx, variant, n)
        }
    }
}

pub(crate) fn success_balls(
    loss: &LossSpec,
    universe: &RecordUniverse,
) -> Result<Vec<Vec<RecordId>>> {
    universe
        .records()
        .map(|z| loss.success_ball(universe, z))
        .collect()
}

fn conditional_success(s: &OutputScores, guess: RecordId, variant: GameVariant, n: usize) -> f64 {
    if s.mass == 0.0 {
        return 0.0;
    }
    let raw = s.scores[guess.index()] / s.mass;
    match variant {
        GameVariant::AvgDistRero => raw / n as f64,
        _ => raw,
    }
}

pub(crate) fn finish_posterior_guess(
    s: &OutputScores,
    ctx: &AdversaryContext<'_>,
    variant: GameVariant,
    n: usize,
) -> Result<BayesGuess> {
    if s.mass == 0.0 {
        let (guess, baseline) = oblivious_guess(ctx.prior, ctx.loss, variant, n)?;
        return Ok(BayesGuess {
            guess,
            posterior_success: baseline,
            fell_back: true,
        });
    }
    let guess = argmax_guess(&s.scores);
    Ok(BayesGuess {
        guess,
        posterior_success: conditional_success(s, guess, variant, n),
        fell_back: false,
    })
}
