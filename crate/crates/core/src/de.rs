//! Differential evolution (rand/1/bin) over flat parameter vectors.

use std::io::{self, Read, Write};

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::game::{rollout, GameVariant, Level, RewardScheme};
use crate::policy::{ParamVector, PolicyAgent, PolicySpec};
use crate::rng::{child_seed, rng_from_seed, SimRng};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DeParams {
    /// Differential weight.
    pub f: f32,
    /// Crossover rate.
    pub cr: f64,
    /// Trial coordinates are clamped to `[-bound, bound]` when set.
    pub bound: Option<f32>,
}

impl Default for DeParams {
    fn default() -> Self {
        DeParams {
            f: 0.5,
            cr: 0.9,
            bound: Some(5.0),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DeError {
    #[error("population size {0} is below the minimum of 4")]
    PopulationTooSmall(usize),
    #[error("sigma must be finite and non-negative, got {0}")]
    BadSigma(f64),
    #[error("budget of {n_games} games is smaller than the population ({pop_size})")]
    BudgetTooSmall { n_games: u64, pop_size: usize },
    #[error("corrupt population checkpoint: {0}")]
    Corrupt(&'static str),
}

/// Something DE can maximise.
pub trait Fitness: Sync {
    /// Score one vector. Every member evaluated in the same generation gets
    /// the same `seed`.
    fn evaluate(&self, x: &[f32], seed: u64) -> f64;

    /// Rollouts consumed by one call to [`Fitness::evaluate`].
    fn episodes_per_eval(&self) -> u32 {
        1
    }
}

impl<F: Fn(&[f32], u64) -> f64 + Sync> Fitness for F {
    fn evaluate(&self, x: &[f32], seed: u64) -> f64 {
        self(x, seed)
    }
}

/// Mean episode score of a policy on one level.
#[derive(Clone, Debug)]
pub struct GameFitness {
    pub level: Level,
    pub spec: PolicySpec,
    pub game_len: u32,
    pub scheme: RewardScheme,
    pub episodes_per_eval: u32,
}

impl GameFitness {
    pub fn new(level: Level, game_len: u32, scheme: RewardScheme) -> Self {
        let spec = PolicySpec::for_variant(level.variant(), level.width(), level.height());
        GameFitness {
            level,
            spec,
            game_len,
            scheme,
            episodes_per_eval: 1,
        }
    }

    pub fn variant(&self) -> GameVariant {
        self.level.variant()
    }

    /// Seed of episode `e` within an evaluation seeded with `seed`.
    pub fn episode_seed(seed: u64, e: u32) -> u64 {
        if e == 0 {
            seed
        } else {
            child_seed(seed, e as u64)
        }
    }
}

impl Fitness for GameFitness {
    fn evaluate(&self, x: &[f32], seed: u64) -> f64 {
        let mut total = 0.0;
        for e in 0..self.episodes_per_eval {
            let mut agent =
                PolicyAgent::from_slice(self.spec, x, self.variant()).expect("vector matches the level's spec");
            total += rollout(&self.level, &mut agent, self.game_len, self.scheme, Self::episode_seed(seed, e))
                .final_score;
        }
        total / self.episodes_per_eval as f64
    }

    fn episodes_per_eval(&self) -> u32 {
        self.episodes_per_eval
    }
}

/// Donor indices and crossover pattern for one trial vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialPlan {
    pub r: [usize; 3],
    /// Coordinate that always comes from the donor.
    pub forced: usize,
    /// Ascending coordinates that keep the target's value; every other
    /// coordinate comes from the donor.
    pub keep: Vec<u32>,
}

impl TrialPlan {
    /// Draw donors distinct from `i` and from each other, then the crossover
    /// pattern: each coordinate other than `forced` independently keeps the
    /// target value with probability `1 - cr`.
    pub fn draw<R: Rng + ?Sized>(rng: &mut R, i: usize, pop_size: usize, dim: usize, cr: f64) -> Self {
        let mut r = [0usize; 3];
        for k in 0..3 {
            loop {
                let c = rng.random_range(0..pop_size);
                if c != i && !r[..k].contains(&c) {
                    r[k] = c;
                    break;
                }
            }
        }
        let forced = rng.random_range(0..dim);
        let mut keep = Vec::new();
        if cr <= 0.0 {
            keep.extend((0..dim as u32).filter(|&j| j as usize != forced));
        } else if cr < 1.0 {
            // Coordinate j keeps the target when its 32-bit draw lands at or
            // above `cr * 2^32`; two draws per 64-bit word.
            let threshold = (cr * 4_294_967_296.0) as u64;
            let mut j = 0usize;
            while j < dim {
                let word = rng.next_u64();
                for half in [word & 0xFFFF_FFFF, word >> 32] {
                    if j < dim && half >= threshold && j != forced {
                        keep.push(j as u32);
                    }
                    j += 1;
                }
            }
        }
        TrialPlan { r, forced, keep }
    }

    /// Whether coordinate `j` takes the donor value.
    pub fn takes_donor(&self, j: usize) -> bool {
        self.keep.binary_search(&(j as u32)).is_err()
    }

    /// The trial for `target` under this plan.
    pub fn apply(&self, members: &[ParamVector], target: &[f32], params: &DeParams) -> ParamVector {
        let n = target.len();
        let [a, b, c] = self.r.map(|k| &members[k].as_slice()[..n]);
        let f = params.f;
        let mut out: Vec<f32> = a
            .iter()
            .zip(b)
            .zip(c)
            .map(|((&a, &b), &c)| a + f * (b - c))
            .collect();
        for &j in &self.keep {
            out[j as usize] = target[j as usize];
        }
        if let Some(bound) = params.bound {
            for v in &mut out {
                *v = v.clamp(-bound, bound);
            }
        }
        ParamVector::from_vec(out)
    }
}

#[derive(Clone, Debug)]
pub struct DePopulation {
    pub members: Vec<ParamVector>,
    /// Latest fitness of each member; meaningless while `evaluated` is false.
    pub fitness: Vec<f64>,
    /// False until the members have been scored against the current fitness
    /// function (fresh populations, inherited copies, re-seeded ones).
    pub evaluated: bool,
    pub generation: u64,
    /// Fitness evaluations consumed so far.
    pub evaluations: u64,
    pub params: DeParams,
    rng: SimRng,
}

impl PartialEq for DePopulation {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members
            && self.fitness.iter().map(|f| f.to_bits()).eq(other.fitness.iter().map(|f| f.to_bits()))
            && self.evaluated == other.evaluated
            && self.generation == other.generation
            && self.evaluations == other.evaluations
            && self.params == other.params
            && self.rng == other.rng
    }
}

/// Member 0 is `center`; the rest add independent `N(0, sigma^2)` noise to
/// every coordinate.
pub fn init_population<R: Rng + ?Sized>(
    center: &ParamVector,
    sigma: f64,
    pop_size: usize,
    rng: &mut R,
) -> Result<DePopulation, DeError> {
    if pop_size < 4 {
        return Err(DeError::PopulationTooSmall(pop_size));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(DeError::BadSigma(sigma));
    }
    let noise = Normal::new(0.0f64, sigma).expect("sigma checked above");
    let mut members = vec![center.clone()];
    for _ in 1..pop_size {
        let v = center
            .as_slice()
            .iter()
            .map(|&c| if sigma == 0.0 { c } else { c + noise.sample(rng) as f32 })
            .collect();
        members.push(ParamVector::from_vec(v));
    }
    Ok(DePopulation {
        members,
        fitness: vec![f64::NEG_INFINITY; pop_size],
        evaluated: false,
        generation: 0,
        evaluations: 0,
        params: DeParams::default(),
        rng: SimRng::seed_from_u64(rng.random()),
    })
}

impl DePopulation {
    pub fn pop_size(&self) -> usize {
        self.members.len()
    }

    pub fn dim(&self) -> usize {
        self.members[0].len()
    }

    /// Restart the internal stream from `seed`.
    pub fn reseed(&mut self, seed: u64) {
        self.rng = rng_from_seed(seed);
    }

    /// Forget fitness values, e.g. after the population moves to a new level.
    pub fn invalidate(&mut self) {
        self.evaluated = false;
        self.fitness.fill(f64::NEG_INFINITY);
    }

    /// Index of the best member; ties go to the lowest index.
    pub fn champion_index(&self) -> usize {
        let mut best = 0;
        for (i, &f) in self.fitness.iter().enumerate().skip(1) {
            if f > self.fitness[best] {
                best = i;
            }
        }
        best
    }

    pub fn champion(&self) -> (&ParamVector, f64) {
        let i = self.champion_index();
        (&self.members[i], self.fitness[i])
    }

    fn evaluate_all<F: Fitness + ?Sized>(&self, xs: &[ParamVector], fit: &F, seed: u64) -> Vec<f64> {
        xs.par_iter().map(|x| fit.evaluate(x.as_slice(), seed)).collect()
    }

    /// Score every member under `seed` if the fitness values are stale.
    pub fn ensure_evaluated<F: Fitness + ?Sized>(&mut self, fit: &F, seed: u64) {
        if !self.evaluated {
            self.fitness = self.evaluate_all(&self.members, fit, seed);
            self.evaluations += self.pop_size() as u64;
            self.evaluated = true;
        }
    }

    /// Draw one trial plan per member from the internal stream.
    pub fn draw_plans(&mut self) -> Vec<TrialPlan> {
        let (n, dim, cr) = (self.pop_size(), self.dim(), self.params.cr);
        (0..n).map(|i| TrialPlan::draw(&mut self.rng, i, n, dim, cr)).collect()
    }

    /// One generation under explicit plans. Trials replace their targets
    /// when they score at least as well.
    pub fn step_with_plans<F: Fitness + ?Sized>(&mut self, plans: &[TrialPlan], fit: &F, seed: u64) {
        self.ensure_evaluated(fit, seed);
        let trials: Vec<ParamVector> = plans
            .iter()
            .zip(&self.members)
            .map(|(plan, target)| plan.apply(&self.members, target.as_slice(), &self.params))
            .collect();
        let scores = self.evaluate_all(&trials, fit, seed);
        self.evaluations += trials.len() as u64;
        for (i, (trial, score)) in trials.into_iter().zip(scores).enumerate() {
            if score >= self.fitness[i] {
                self.members[i] = trial;
                self.fitness[i] = score;
            }
        }
        self.generation += 1;
    }

    /// One DE/rand/1/bin generation; all evaluations share `seed`.
    pub fn step_generation<F: Fitness + ?Sized>(&mut self, fit: &F, seed: u64) {
        let plans = self.draw_plans();
        self.step_with_plans(&plans, fit, seed);
    }

    /// `n_games / pop_size` generations. Generation `g` evaluates under
    /// `child_seed(base_seed, g)`; returns the number of generations run.
    pub fn optimize_step<F: Fitness + ?Sized>(&mut self, fit: &F, n_games: u64, base_seed: u64) -> Result<u64, DeError> {
        let n = self.pop_size();
        if n_games < n as u64 {
            return Err(DeError::BudgetTooSmall { n_games, pop_size: n });
        }
        let gens = n_games / n as u64;
        for g in 0..gens {
            self.step_generation(fit, child_seed(base_seed, g));
        }
        Ok(gens)
    }

    const MAGIC: [u8; 8] = *b"DEPOP\0\0\x01";

    /// Versioned little-endian blob: header, DE constants, RNG position,
    /// member matrix, fitness vector.
    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut b = Vec::with_capacity(64 + self.pop_size() * (self.dim() * 4 + 8));
        b.extend_from_slice(&Self::MAGIC);
        b.extend_from_slice(&(self.pop_size() as u32).to_le_bytes());
        b.extend_from_slice(&(self.dim() as u32).to_le_bytes());
        b.extend_from_slice(&self.generation.to_le_bytes());
        b.extend_from_slice(&self.evaluations.to_le_bytes());
        b.push(self.evaluated as u8);
        b.extend_from_slice(&self.params.f.to_le_bytes());
        b.extend_from_slice(&self.params.cr.to_le_bytes());
        b.extend_from_slice(&self.params.bound.unwrap_or(f32::NAN).to_le_bytes());
        b.extend_from_slice(&self.rng.get_seed());
        b.extend_from_slice(&self.rng.get_stream().to_le_bytes());
        b.extend_from_slice(&self.rng.get_word_pos().to_le_bytes());
        for m in &self.members {
            for v in m.as_slice() {
                b.extend_from_slice(&v.to_le_bytes());
            }
        }
        for f in &self.fitness {
            b.extend_from_slice(&f.to_le_bytes());
        }
        w.write_all(&b)
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, DeError> {
        let mut b = Vec::new();
        r.read_to_end(&mut b).map_err(|_| DeError::Corrupt("unreadable"))?;
        let mut cur = Cursor { b: &b, at: 0 };
        if cur.take(8)? != Self::MAGIC {
            return Err(DeError::Corrupt("bad magic or version"));
        }
        let n = u32::from_le_bytes(cur.array()?) as usize;
        let dim = u32::from_le_bytes(cur.array()?) as usize;
        let generation = u64::from_le_bytes(cur.array()?);
        let evaluations = u64::from_le_bytes(cur.array()?);
        let evaluated = cur.take(1)?[0] != 0;
        let f = f32::from_le_bytes(cur.array()?);
        let cr = f64::from_le_bytes(cur.array()?);
        let bound = f32::from_le_bytes(cur.array()?);
        let seed: [u8; 32] = cur.array()?;
        let stream = u64::from_le_bytes(cur.array()?);
        let word_pos = u128::from_le_bytes(cur.array()?);
        let mut rng = SimRng::from_seed(seed);
        rng.set_stream(stream);
        rng.set_word_pos(word_pos);
        if n < 4 || dim == 0 {
            return Err(DeError::Corrupt("bad shape"));
        }
        let mut members = Vec::with_capacity(n);
        for _ in 0..n {
            let raw = cur.take(dim * 4)?;
            members.push(ParamVector::from_vec(
                raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect(),
            ));
        }
        let fitness = (0..n)
            .map(|_| cur.array().map(f64::from_le_bytes))
            .collect::<Result<_, _>>()?;
        if cur.at != b.len() {
            return Err(DeError::Corrupt("trailing bytes"));
        }
        Ok(DePopulation {
            members,
            fitness,
            evaluated,
            generation,
            evaluations,
            params: DeParams {
                f,
                cr,
                bound: (!bound.is_nan()).then_some(bound),
            },
            rng,
        })
    }
}

struct Cursor<'a> {
    b: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DeError> {
        let s = self.b.get(self.at..self.at + n).ok_or(DeError::Corrupt("truncated"))?;
        self.at += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], DeError> {
        Ok(self.take(N)?.try_into().unwrap())
    }
}
