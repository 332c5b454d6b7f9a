//! Seeded Monte Carlo runs over the induced classical channels.
//!
//! Trials are split into fixed-size chunks. Chunk `k` draws from a ChaCha8
//! stream keyed by `(seed, k)`, so results do not depend on how many worker
//! threads rayon uses.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channels::{
    average_params, erasure_projector_state, induced_classical_channel, lift_entangled_output, superdense_indices,
    ChannelState, CondPmfTable, IdeParams, IdeTriple, TableMode,
};
use crate::error::{Error, Result};
use crate::numfmt::format_number;
use crate::qmath::{bell_state, ProbVec, PureStateVec};
use crate::regions::detection_bound;

/// Trials per RNG stream.
const CHUNK: u64 = 1 << 16;
/// Relative slack under which two weighted likelihoods count as tied.
const TIE_TOL: f64 = 1e-12;
/// Largest `d` accepted by [`quantum_measurement_sim`].
pub const QUANTUM_SIM_MAX_D: usize = 4;
/// Fewest trials accepted by [`empirical_channel_estimate`].
pub const MIN_CHANNEL_TRIALS: u64 = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub trials: u64,
    pub dim: usize,
    pub p_x: ProbVec,
    pub params: IdeParams,
}

impl SimConfig {
    pub fn new(params: IdeParams, dim: usize, p_x: ProbVec, trials: u64, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidParams("trials must be at least 1".into()));
        }
        check_dim(&params, dim)?;
        if p_x.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p_x.len() });
        }
        Ok(Self { seed, trials, dim, p_x, params })
    }
}

fn check_dim(params: &IdeParams, dim: usize) -> Result<()> {
    let d = params.d();
    if dim != d && dim != d * d {
        return Err(Error::InvalidParams(format!("signal dimension {dim} must be d = {d} or d^2 = {}", d * d)));
    }
    Ok(())
}

/// Detection statistics. `empirical_p1` is the rate of deciding state 2 when
/// the state was 1, `empirical_p2` the converse.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionReport {
    pub seed: u64,
    pub trials: u64,
    pub dim: usize,
    pub empirical_p1: f64,
    pub empirical_p2: f64,
    pub empirical_pd: f64,
    pub analytic_pd: f64,
    pub std_err: f64,
}

impl DetectionReport {
    pub const CSV_HEADER: &'static str = "seed,trials,D,empirical_p1,empirical_p2,empirical_pd,analytic_pd,std_err";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.seed,
            self.trials,
            self.dim,
            format_number(self.empirical_p1),
            format_number(self.empirical_p2),
            format_number(self.empirical_pd),
            format_number(self.analytic_pd),
            format_number(self.std_err),
        )
    }

    /// `|empirical - analytic|` in units of the standard error.
    pub fn z_score(&self) -> f64 {
        let gap = (self.empirical_pd - self.analytic_pd).abs();
        if gap <= 1e-12 {
            0.0
        } else if self.std_err > 0.0 {
            gap / self.std_err
        } else {
            f64::INFINITY
        }
    }
}

/// Per-state trial and error counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub trials: [u64; 2],
    pub errors: [u64; 2],
}

impl Tally {
    fn record(&mut self, truth: ChannelState, guess: ChannelState) {
        self.trials[truth.index()] += 1;
        if truth != guess {
            self.errors[truth.index()] += 1;
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for k in 0..2 {
            self.trials[k] += other.trials[k];
            self.errors[k] += other.errors[k];
        }
        self
    }

    /// Prior-weighted error with its delta-method standard error.
    pub fn report(&self, seed: u64, dim: usize, pi: [f64; 2], analytic_pd: f64) -> DetectionReport {
        let rate = |k: usize| {
            if self.trials[k] == 0 {
                0.0
            } else {
                self.errors[k] as f64 / self.trials[k] as f64
            }
        };
        let var = |k: usize| {
            if self.trials[k] == 0 {
                0.0
            } else {
                let p = rate(k);
                pi[k] * pi[k] * p * (1.0 - p) / self.trials[k] as f64
            }
        };
        let (p1, p2) = (rate(0), rate(1));
        DetectionReport {
            seed,
            trials: self.trials[0] + self.trials[1],
            dim,
            empirical_p1: p1,
            empirical_p2: p2,
            empirical_pd: pi[0] * p1 + pi[1] * p2,
            analytic_pd,
            std_err: (var(0) + var(1)).sqrt(),
        }
    }
}

/// MAP rule: state 1 iff `pi_1 P(y | 1) >= pi_2 P(y | 2)`, with
/// `P(y | s) = sum_x p_x(x) P(y | x, s)`.
pub fn map_detect(y: usize, table: &CondPmfTable, p_x: &ProbVec, pi: [f64; 2]) -> ChannelState {
    let w1 = pi[0] * table.output_given_state(p_x.values(), ChannelState::One)[y];
    let w2 = pi[1] * table.output_given_state(p_x.values(), ChannelState::Two)[y];
    decide(w1, w2)
}

fn decide(w1: f64, w2: f64) -> ChannelState {
    if w1 >= w2 - TIE_TOL * w1.max(w2) {
        ChannelState::One
    } else {
        ChannelState::Two
    }
}

/// [`map_detect`] evaluated once for every output symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct MapDetector {
    decisions: Vec<ChannelState>,
}

impl MapDetector {
    pub fn new(table: &CondPmfTable, p_x: &ProbVec, pi: [f64; 2]) -> Self {
        let out1 = table.output_given_state(p_x.values(), ChannelState::One);
        let out2 = table.output_given_state(p_x.values(), ChannelState::Two);
        let decisions = out1.iter().zip(&out2).map(|(a, b)| decide(pi[0] * a, pi[1] * b)).collect();
        Self { decisions }
    }

    pub fn decide(&self, y: usize) -> ChannelState {
        self.decisions[y]
    }
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Runs `per_chunk(rng, count)` over the trial range and folds the results.
fn run_chunks<T, F, M>(seed: u64, trials: u64, per_chunk: F, identity: T, merge: M) -> T
where
    T: Send + Clone,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
    M: Fn(T, T) -> T,
{
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<T> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let count = CHUNK.min(trials - k * CHUNK);
            per_chunk(&mut chunk_rng(seed, k), count)
        })
        .collect();
    parts.into_iter().fold(identity, merge)
}

/// Output symbol (`0` = erased) of one IDE use with input `x` (1-based).
fn sample_output<R: Rng>(rng: &mut R, t: IdeTriple, dim: usize, x: usize) -> usize {
    let u: f64 = rng.random();
    if u < t.alpha {
        x
    } else if u < t.alpha + t.beta {
        rng.random_range(1..=dim)
    } else {
        0
    }
}

fn state_sampler(params: &IdeParams) -> f64 {
    // Conditional errors are only observable for states that occur; when the
    // occupancy leaves a state out, draw states by the detection prior.
    let theta1 = params.theta(ChannelState::One);
    if theta1 > 0.0 && theta1 < 1.0 {
        theta1
    } else {
        params.pi(ChannelState::One)
    }
}

fn sample_state<R: Rng>(rng: &mut R, p_one: f64) -> ChannelState {
    if rng.random::<f64>() < p_one {
        ChannelState::One
    } else {
        ChannelState::Two
    }
}

fn symbol_sampler(p_x: &ProbVec) -> WeightedIndex<f64> {
    WeightedIndex::new(p_x.values()).expect("probability vector has positive mass")
}

/// Draws `(S, X, Y)` triples, applies the MAP detector and compares the
/// empirical error with the analytic bound.
pub fn run_detection_trials(cfg: &SimConfig) -> Result<DetectionReport> {
    let table = induced_classical_channel(&cfg.params, cfg.dim, TableMode::PerState)?;
    let pi = cfg.params.pi_weights();
    let detector = MapDetector::new(&table, &cfg.p_x, pi);
    let symbols = symbol_sampler(&cfg.p_x);
    let p_one = state_sampler(&cfg.params);
    let triples = [cfg.params.triple(ChannelState::One), cfg.params.triple(ChannelState::Two)];

    let tally = run_chunks(
        cfg.seed,
        cfg.trials,
        |rng, count| {
            let mut tally = Tally::default();
            for _ in 0..count {
                let s = sample_state(rng, p_one);
                let x = symbols.sample(rng) + 1;
                let y = sample_output(rng, triples[s.index()], cfg.dim, x);
                tally.record(s, detector.decide(y));
            }
            tally
        },
        Tally::default(),
        Tally::merge,
    );
    let analytic = detection_bound(cfg.dim, &cfg.params, &cfg.p_x)?;
    Ok(tally.report(cfg.seed, cfg.dim, pi, analytic))
}

/// Frequency estimate of `P(y | x, s)` from uniformly drawn `(x, s)`. Rows
/// that received no samples stay zero.
pub fn empirical_channel_estimate(params: &IdeParams, dim: usize, trials: u64, seed: u64) -> Result<CondPmfTable> {
    check_dim(params, dim)?;
    if trials < MIN_CHANNEL_TRIALS {
        return Err(Error::InvalidParams(format!("channel estimate needs at least {MIN_CHANNEL_TRIALS} trials")));
    }
    let triples = [params.triple(ChannelState::One), params.triple(ChannelState::Two)];
    let row_len = dim + 1;
    let cells = 2 * dim * row_len;
    let counts = run_chunks(
        seed,
        trials,
        |rng, count| {
            let mut counts = vec![0u64; cells];
            for _ in 0..count {
                let s = rng.random_range(0..2usize);
                let x = rng.random_range(1..=dim);
                let y = sample_output(rng, triples[s], dim, x);
                counts[(s * dim + x - 1) * row_len + y] += 1;
            }
            counts
        },
        vec![0u64; cells],
        add_counts,
    );
    let mut probs = vec![0.0; cells];
    for (row, out) in counts.chunks(row_len).zip(probs.chunks_mut(row_len)) {
        let total: u64 = row.iter().sum();
        if total > 0 {
            for (o, &c) in out.iter_mut().zip(row) {
                *o = c as f64 / total as f64;
            }
        }
    }
    Ok(CondPmfTable::from_rows(dim, TableMode::PerState, probs))
}

fn add_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    a
}

/// Plug-in mutual information (bits) between `X ~ p_x` and the output of the
/// prior-averaged channel, without bias correction.
pub fn empirical_mutual_information(params: &IdeParams, dim: usize, p_x: &ProbVec, trials: u64, seed: u64) -> Result<f64> {
    check_dim(params, dim)?;
    if p_x.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: p_x.len() });
    }
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be at least 1".into()));
    }
    let avg = average_params(params);
    let triple = IdeTriple::new(avg.alpha, avg.beta, avg.gamma);
    let symbols = symbol_sampler(p_x);
    let row_len = dim + 1;
    let joint = run_chunks(
        seed,
        trials,
        |rng, count| {
            let mut counts = vec![0u64; dim * row_len];
            for _ in 0..count {
                let x = symbols.sample(rng) + 1;
                let y = sample_output(rng, triple, dim, x);
                counts[(x - 1) * row_len + y] += 1;
            }
            counts
        },
        vec![0u64; dim * row_len],
        add_counts,
    );
    Ok(plug_in_mi(&joint, dim, row_len, trials))
}

fn plug_in_mi(joint: &[u64], rows: usize, cols: usize, total: u64) -> f64 {
    let n = total as f64;
    let row_sums: Vec<u64> = joint.chunks(cols).map(|r| r.iter().sum()).collect();
    let col_sums: Vec<u64> = (0..cols).map(|c| (0..rows).map(|r| joint[r * cols + c]).sum()).collect();
    let mut mi = 0.0;
    for r in 0..rows {
        for c in 0..cols {
            let k = joint[r * cols + c];
            if k == 0 {
                continue;
            }
            let k = k as f64;
            mi += k / n * (k * n / (row_sums[r] as f64 * col_sums[c] as f64)).log2();
        }
    }
    mi.max(0.0)
}

/// Born-rule outcome distribution of the Bell-basis measurement plus erasure
/// flag on the lifted state for symbol `x` (1-based, in `[d^2]`). Index `0`
/// is the erasure outcome.
pub fn quantum_measurement_sim(params: &IdeParams, d: usize, x: usize, s: ChannelState) -> Result<ProbVec> {
    if d > QUANTUM_SIM_MAX_D {
        return Err(Error::TooLarge { what: "density-matrix measurement", dim: d, limit: QUANTUM_SIM_MAX_D });
    }
    if params.d() != d {
        return Err(Error::DimensionMismatch { expected: params.d(), got: d });
    }
    let rho = lift_entangled_output(params, s, x)?;
    let dim = d * d;
    let mut probs = Vec::with_capacity(dim + 1);
    probs.push(rho.expectation(&erasure_projector_state(dim)));
    for y in 1..=dim {
        let (i, j) = superdense_indices(d, y);
        let mut amps = bell_state(d, i, j)?.amplitudes().to_vec();
        amps.push(num_complex::Complex64::new(0.0, 0.0));
        probs.push(rho.expectation(&PureStateVec::new(amps)?));
    }
    // Born weights of a PSD operator, up to rounding
    ProbVec::with_tolerance(probs.into_iter().map(|v| v.max(0.0)).collect(), 1e-9)
}

/// `M x T` matrix of 1-based symbols drawn i.i.d. from `p_x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codebook {
    pub m: usize,
    pub t: usize,
    pub seed: u64,
    entries: Vec<usize>,
}

impl Codebook {
    /// Symbol for message `w` in slot `t`, both 0-based.
    pub fn symbol(&self, w: usize, t: usize) -> usize {
        self.entries[w * self.t + t]
    }

    pub fn codeword(&self, w: usize) -> &[usize] {
        &self.entries[w * self.t..(w + 1) * self.t]
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }
}

pub fn sample_codebook(p_x: &ProbVec, m: usize, t: usize, seed: u64) -> Result<Codebook> {
    if m == 0 || t == 0 {
        return Err(Error::InvalidParams(format!("codebook size {m} x {t} must be at least 1 x 1")));
    }
    let symbols = symbol_sampler(p_x);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..m * t).map(|_| symbols.sample(&mut rng) + 1).collect();
    Ok(Codebook { m, t, seed, entries })
}

/// Detection statistics of a codebook-driven run, per slot and pooled.
#[derive(Clone, Debug, PartialEq)]
pub struct SlotReport {
    pub per_slot: Vec<Tally>,
    pub pooled: Tally,
}

/// Sends uniformly drawn codewords for `cfg.trials` blocks; every slot draws
/// its own channel state and is detected on its own.
pub fn run_codebook_detection(cfg: &SimConfig, codebook: &Codebook) -> Result<SlotReport> {
    let table = induced_classical_channel(&cfg.params, cfg.dim, TableMode::PerState)?;
    let detector = MapDetector::new(&table, &cfg.p_x, cfg.params.pi_weights());
    let p_one = state_sampler(&cfg.params);
    let triples = [cfg.params.triple(ChannelState::One), cfg.params.triple(ChannelState::Two)];
    let slots = codebook.t;
    if let Some(&bad) = codebook.entries.iter().find(|&&x| x == 0 || x > cfg.dim) {
        return Err(Error::IndexOutOfRange(format!("codebook symbol {bad} outside [1, {}]", cfg.dim)));
    }

    let per_slot = run_chunks(
        cfg.seed,
        cfg.trials,
        |rng, count| {
            let mut tallies = vec![Tally::default(); slots];
            for _ in 0..count {
                let w = rng.random_range(0..codebook.m);
                for (t, &x) in codebook.codeword(w).iter().enumerate() {
                    let s = sample_state(rng, p_one);
                    let y = sample_output(rng, triples[s.index()], cfg.dim, x);
                    tallies[t].record(s, detector.decide(y));
                }
            }
            tallies
        },
        vec![Tally::default(); slots],
        |a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect(),
    );
    let pooled = per_slot.iter().copied().fold(Tally::default(), Tally::merge);
    Ok(SlotReport { per_slot, pooled })
}

/// Block error rate of maximum-likelihood decoding over the prior-averaged
/// channel for a random `m x t` codebook. A small-scale demonstration only.
pub fn ml_decoding_error(params: &IdeParams, dim: usize, p_x: &ProbVec, m: usize, t: usize, blocks: u64, seed: u64) -> Result<f64> {
    check_dim(params, dim)?;
    let codebook = sample_codebook(p_x, m, t, seed)?;
    let table = induced_classical_channel(params, dim, TableMode::Marginal)?;
    let avg = average_params(params);
    let triple = IdeTriple::new(avg.alpha, avg.beta, avg.gamma);
    let stream_seed = seed.wrapping_add(1);
    let errors = run_chunks(
        stream_seed,
        blocks,
        |rng, count| {
            let mut errors = 0u64;
            let mut received = vec![0usize; t];
            for _ in 0..count {
                let w = rng.random_range(0..m);
                for (slot, &x) in codebook.codeword(w).iter().enumerate() {
                    received[slot] = sample_output(rng, triple, dim, x);
                }
                let score = |v: usize| -> f64 {
                    codebook
                        .codeword(v)
                        .iter()
                        .zip(&received)
                        .map(|(&x, &y)| table.get(y, x, ChannelState::One).ln())
                        .sum()
                };
                // ties go to the lowest index, which counts as an error unless it is w
                let best = (0..m).map(|v| (v, score(v))).fold((0, f64::NEG_INFINITY), |acc, cur| {
                    if cur.1 > acc.1 {
                        cur
                    } else {
                        acc
                    }
                });
                if best.0 != w {
                    errors += 1;
                }
            }
            errors
        },
        0,
        |a, b| a + b,
    );
    Ok(errors as f64 / blocks as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::qmath::xlog2x;
    use approx::assert_abs_diff_eq;

    fn ex1() -> IdeParams {
        presets::example1(0.05)
    }

    #[test]
    fn map_detect_examples() {
        let p = ex1();
        let table = induced_classical_channel(&p, 16, TableMode::PerState).unwrap();
        let e1 = ProbVec::unit(16, 0);
        let pi = p.pi_weights();
        assert_eq!(map_detect(1, &table, &e1, pi), ChannelState::One);
        assert_eq!(map_detect(7, &table, &e1, pi), ChannelState::Two);
        // uniform input makes both states produce the same output law
        let u = ProbVec::uniform(16);
        assert_eq!(map_detect(5, &table, &u, pi), ChannelState::One);
        assert_eq!(decide(0.25, 0.25), ChannelState::One);
        assert_eq!(decide(0.0, 0.0), ChannelState::One);
    }

    #[test]
    fn detector_table_matches_direct_rule() {
        let p = presets::example2(presets::EXAMPLE2_STATE2[1]);
        let table = induced_classical_channel(&p, 16, TableMode::PerState).unwrap();
        let px = ProbVec::new((1..=16).map(|k| k as f64 / 136.0).collect()).unwrap();
        let det = MapDetector::new(&table, &px, p.pi_weights());
        for y in 0..=16 {
            assert_eq!(det.decide(y), map_detect(y, &table, &px, p.pi_weights()));
        }
    }

    #[test]
    fn detection_trials_point_mass() {
        let cfg = SimConfig::new(ex1(), 16, ProbVec::unit(16, 0), 200_000, 11).unwrap();
        let r = run_detection_trials(&cfg).unwrap();
        assert_eq!(r.empirical_p1, 0.0);
        assert_abs_diff_eq!(r.analytic_pd, 1.0 / 32.0, epsilon = 1e-15);
        assert!(r.z_score() <= 4.0, "{r:?}");
        assert_eq!(r.trials, 200_000);
    }

    #[test]
    fn detection_trials_full_erasure() {
        let erase = IdeTriple::ERASE;
        let p = IdeParams::new(3, erase, erase, 0.4, 0.3).unwrap();
        let cfg = SimConfig::new(p, 3, ProbVec::uniform(3), 50_000, 2).unwrap();
        let r = run_detection_trials(&cfg).unwrap();
        // every output is the erasure flag and the detector always says 2
        assert_eq!(r.empirical_p1, 1.0);
        assert_eq!(r.empirical_p2, 0.0);
        assert_abs_diff_eq!(r.empirical_pd, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(r.analytic_pd, 0.3, epsilon = 1e-15);
    }

    #[test]
    fn detection_is_deterministic_and_thread_independent() {
        let cfg = SimConfig::new(ex1(), 16, ProbVec::uniform(16), 300_000, 7).unwrap();
        let a = run_detection_trials(&cfg).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(|| run_detection_trials(&cfg).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.csv_row(), b.csv_row());
    }

    #[test]
    fn sim_config_validation() {
        assert!(SimConfig::new(ex1(), 16, ProbVec::uniform(16), 0, 0).is_err());
        assert!(SimConfig::new(ex1(), 16, ProbVec::uniform(4), 10, 0).is_err());
        assert!(SimConfig::new(ex1(), 17, ProbVec::uniform(17), 10, 0).is_err());
        assert!(SimConfig::new(ex1(), 256, ProbVec::uniform(256), 10, 0).is_ok());
    }

    #[test]
    fn channel_estimate_degenerate_cases() {
        let id = IdeTriple::IDENTITY;
        let p = IdeParams::new(3, id, id, 0.5, 0.5).unwrap();
        let est = empirical_channel_estimate(&p, 3, 20_000, 1).unwrap();
        let exact = induced_classical_channel(&p, 3, TableMode::PerState).unwrap();
        assert_eq!(est.max_abs_diff(&exact), 0.0);

        let erase = IdeTriple::ERASE;
        let p = IdeParams::new(3, erase, erase, 0.5, 0.5).unwrap();
        let est = empirical_channel_estimate(&p, 9, 20_000, 1).unwrap();
        for s in ChannelState::BOTH {
            for x in 1..=9 {
                assert_eq!(est.get(0, x, s), 1.0);
            }
        }
        assert!(empirical_channel_estimate(&p, 3, 10, 1).is_err());
    }

    #[test]
    fn mutual_information_degenerate_cases() {
        let p = ex1();
        let mi = empirical_mutual_information(&p, 16, &ProbVec::unit(16, 3), 100_000, 5).unwrap();
        assert_abs_diff_eq!(mi, 0.0, epsilon = 1e-12);

        let id = IdeTriple::IDENTITY;
        let clean = IdeParams::new(4, id, id, 0.5, 0.5).unwrap();
        let mi = empirical_mutual_information(&clean, 4, &ProbVec::uniform(4), 200_000, 5).unwrap();
        assert_abs_diff_eq!(mi, 2.0, epsilon = 0.01);
    }

    #[test]
    fn plug_in_matches_hand_computation() {
        // joint [[2, 0], [1, 1]] over 4 samples
        let mi = plug_in_mi(&[2, 0, 1, 1], 2, 2, 4);
        let h = |p: &[f64]| -p.iter().map(|&v| xlog2x(v)).sum::<f64>();
        let oracle = h(&[0.5, 0.5]) + h(&[0.75, 0.25]) - h(&[0.5, 0.25, 0.25]);
        assert_abs_diff_eq!(mi, oracle, epsilon = 1e-15);
    }

    #[test]
    fn quantum_measurement_limits() {
        let id = IdeTriple::IDENTITY;
        let p = IdeParams::new(2, id, IdeTriple::ERASE, 0.5, 0.5).unwrap();
        for x in 1..=4 {
            let clean = quantum_measurement_sim(&p, 2, x, ChannelState::One).unwrap();
            assert_abs_diff_eq!(clean.values()[x], 1.0, epsilon = 1e-12);
            let erased = quantum_measurement_sim(&p, 2, x, ChannelState::Two).unwrap();
            assert_abs_diff_eq!(erased.values()[0], 1.0, epsilon = 1e-12);
        }
        let big = IdeParams::new(5, id, id, 0.5, 0.5).unwrap();
        assert!(matches!(quantum_measurement_sim(&big, 5, 1, ChannelState::One), Err(Error::TooLarge { .. })));
        assert!(quantum_measurement_sim(&p, 3, 1, ChannelState::One).is_err());
    }

    #[test]
    fn codebook_basics() {
        let cb = sample_codebook(&ProbVec::unit(5, 0), 4, 6, 3).unwrap();
        assert!(cb.entries().iter().all(|&x| x == 1));
        let a = sample_codebook(&ProbVec::uniform(5), 8, 8, 3).unwrap();
        let b = sample_codebook(&ProbVec::uniform(5), 8, 8, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.entries().iter().all(|&x| (1..=5).contains(&x)));
        assert_eq!(a.symbol(2, 3), a.codeword(2)[3]);
        assert!(sample_codebook(&ProbVec::uniform(5), 0, 8, 3).is_err());
    }

    #[test]
    fn codebook_detection_pools_slots() {
        let cfg = SimConfig::new(ex1(), 16, ProbVec::unit(16, 0), 20_000, 4).unwrap();
        let cb = sample_codebook(&cfg.p_x, 4, 5, 9).unwrap();
        let rep = run_codebook_detection(&cfg, &cb).unwrap();
        assert_eq!(rep.per_slot.len(), 5);
        let total: u64 = rep.per_slot.iter().map(|t| t.trials[0] + t.trials[1]).sum();
        assert_eq!(total, 100_000);
        assert_eq!(rep.pooled.trials[0] + rep.pooled.trials[1], 100_000);
    }

    #[test]
    fn ml_decoding_improves_with_length() {
        let id = IdeTriple::IDENTITY;
        let p = IdeParams::new(2, IdeTriple::new(0.7, 0.3, 0.0), id, 0.5, 0.5).unwrap();
        let short = ml_decoding_error(&p, 2, &ProbVec::uniform(2), 4, 2, 20_000, 1).unwrap();
        let long = ml_decoding_error(&p, 2, &ProbVec::uniform(2), 4, 16, 20_000, 1).unwrap();
        assert!(long < short, "{long} !< {short}");
    }
}
