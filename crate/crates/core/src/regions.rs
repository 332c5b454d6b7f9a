//! Rate / detection-error tradeoff regions.
//!
//! A region is the convex hull of `(P_e, R)` pairs generated by input
//! distributions `p` on `[D]`: the rate coordinate is the mutual information
//! of the prior-averaged classical channel and the error coordinate is the
//! MAP detection error of the per-state channels. Only distributions taking at
//! most two distinct values need to be swept, so [`frontier_r1`] works on the
//! `(n, p1, p2)` family and [`frontier_r2_bruteforce`] checks it against the
//! full simplex.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use crate::channels::{apply_ide, average_params, AvgParams, ChannelState, IdeParams, Selector};
use crate::error::{Error, Result};
use crate::numfmt::format_number;
use crate::qmath::{trace_norm, xlog2x, ComplexMatrix, DensityOperator, ProbVec, NORMALIZATION_TOL};

/// Default number of `p1` samples per `n`.
pub const DEFAULT_P1_SAMPLES: usize = 512;
/// Largest alphabet [`frontier_r2_bruteforce`] accepts.
pub const BRUTEFORCE_MAX_DIM: usize = 6;

/// Points whose error coordinates differ by less than this are merged.
const PE_MERGE_TOL: f64 = 1e-13;
/// Rate (bits) by which dropping nearly collinear hull vertices may lower the
/// frontier. Chords of a concave chain lie below it, so the thinned frontier
/// stays achievable.
pub const THIN_TOL: f64 = 1e-7;
/// Longest run of vertices a single chord may replace.
const THIN_MAX_RUN: usize = 1024;
/// A refinement sample is kept when it lifts the hull by more than this.
const REFINE_TOL: f64 = 1e-10;
/// Rates this close to the maximum count as reaching it.
const RATE_TIE_TOL: f64 = 1e-12;

/// Distribution on `[dim]` with mass `p1` on the first `n` symbols and `p2` on
/// the remaining `dim - n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoValueDist {
    pub dim: usize,
    pub n: usize,
    pub p1: f64,
    pub p2: f64,
}

impl TwoValueDist {
    /// Derives `p2` from the normalization constraint.
    pub fn new(dim: usize, n: usize, p1: f64) -> Result<Self> {
        if n == 0 || n > dim {
            return Err(Error::IndexOutOfRange(format!("n = {n} outside [1, {dim}]")));
        }
        if !(0.0..=1.0).contains(&p1) {
            return Err(Error::ProbVec(format!("p1 = {p1} outside [0, 1]")));
        }
        let p2 = if n == dim { 0.0 } else { (1.0 - n as f64 * p1) / (dim - n) as f64 };
        let dist = Self { dim, n, p1, p2 };
        if !(-NORMALIZATION_TOL..=1.0 + NORMALIZATION_TOL).contains(&p2) || (dist.total() - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::ProbVec(format!("(n, p1) = ({n}, {p1}) admits no valid p2")));
        }
        Ok(Self { p2: p2.clamp(0.0, 1.0), ..dist })
    }

    /// Feasible `p1` interval for a given `n`.
    pub fn p1_range(dim: usize, n: usize) -> (f64, f64) {
        let nf = n as f64;
        let lo = ((1.0 - (dim - n) as f64) / nf).max(0.0);
        let hi = (1.0 / nf).min(1.0);
        (lo, hi)
    }

    fn total(&self) -> f64 {
        self.n as f64 * self.p1 + (self.dim - self.n) as f64 * self.p2
    }

    pub fn to_prob_vec(&self) -> ProbVec {
        let mut v = vec![self.p1; self.n];
        v.resize(self.dim, self.p2);
        ProbVec::with_tolerance(v, 1e-9).expect("two-value distribution is normalized")
    }
}

/// An `(P_e, R)` pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatePoint {
    pub pe: f64,
    pub rate: f64,
}

/// Frontier vertex with the two-value distribution that generated it, when
/// there is one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrontierPoint {
    pub pe: f64,
    pub rate: f64,
    pub witness: Option<TwoValueDist>,
}

impl FrontierPoint {
    pub fn rate_point(&self) -> RatePoint {
        RatePoint { pe: self.pe, rate: self.rate }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrontierMeta {
    pub label: String,
    pub dim: Option<usize>,
    pub p1_samples: Option<usize>,
    pub params: Option<IdeParams>,
}

/// Upper-left boundary of a region: strictly increasing `pe`, increasing
/// `rate`, concave. The region extends flat to the right of the last point.
#[derive(Clone, Debug, PartialEq)]
pub struct Frontier {
    points: Vec<FrontierPoint>,
    pub meta: FrontierMeta,
}

impl Frontier {
    fn from_hull(hull: Vec<FrontierPoint>) -> Self {
        Self { points: thin_chain(hull, THIN_TOL), meta: FrontierMeta::default() }
    }

    pub fn points(&self) -> &[FrontierPoint] {
        &self.points
    }

    pub fn pe_min(&self) -> f64 {
        self.points[0].pe
    }

    /// Smallest error at which the maximum rate is reached.
    pub fn pe_star(&self) -> f64 {
        self.points[self.points.len() - 1].pe
    }

    pub fn r_max(&self) -> f64 {
        self.points[self.points.len() - 1].rate
    }

    /// Highest rate at error `pe`, or `None` when `pe` lies left of the region.
    pub fn rate_at(&self, pe: f64) -> Option<f64> {
        let first = &self.points[0];
        if pe < first.pe - PE_MERGE_TOL {
            return None;
        }
        let idx = self.points.partition_point(|p| p.pe <= pe);
        if idx == 0 {
            return Some(first.rate);
        }
        if idx == self.points.len() {
            return Some(self.r_max());
        }
        let (a, b) = (&self.points[idx - 1], &self.points[idx]);
        let t = (pe - a.pe) / (b.pe - a.pe);
        Some(a.rate + t * (b.rate - a.rate))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("pe,rate,n,p1,p2\n");
        for p in &self.points {
            let _ = write!(out, "{},{},", format_number(p.pe), format_number(p.rate));
            match p.witness {
                Some(w) => {
                    let _ = writeln!(out, "{},{},{}", w.n, format_number(w.p1), format_number(w.p2));
                }
                None => out.push_str(",,\n"),
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    fn with_meta(mut self, meta: FrontierMeta) -> Self {
        self.meta = meta;
        self
    }
}

/// Largest rate difference between two frontiers over `samples` evenly spaced
/// error values covering both, starting where both are defined.
pub fn max_rate_gap(a: &Frontier, b: &Frontier, samples: usize) -> f64 {
    let lo = a.pe_min().max(b.pe_min());
    let hi = a.pe_star().max(b.pe_star()).max(lo);
    let samples = samples.max(2);
    (0..samples)
        .map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64)
        .map(|pe| {
            let ra = a.rate_at(pe).unwrap_or(0.0);
            let rb = b.rate_at(pe).unwrap_or(0.0);
            (ra - rb).abs()
        })
        .fold(0.0, f64::max)
}

/// Closed-form anchors of a region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedForms {
    pub r_max: f64,
    pub pe_min: f64,
    pub pe_star: f64,
    /// Crossing point of the two weighted likelihood lines; absent when they
    /// are parallel.
    pub p_th: Option<f64>,
    pub no_tradeoff: bool,
}

/// Grid settings for [`frontier_r1`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridConfig {
    pub p1_samples: usize,
    /// Upper limit on adaptive refinement passes over the hull.
    pub refine_passes: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { p1_samples: DEFAULT_P1_SAMPLES, refine_passes: 48 }
    }
}

impl GridConfig {
    pub fn with_samples(p1_samples: usize) -> Self {
        Self { p1_samples, ..Self::default() }
    }
}

fn check_len(dim: usize, p: &ProbVec) -> Result<()> {
    if p.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
    }
    Ok(())
}

/// Constant part of the rate expression: `H(Y | X)` with the sign flipped,
/// excluding the erasure term that cancels.
fn rate_offset(dim: usize, avg: &AvgParams) -> f64 {
    let spread = avg.beta / dim as f64;
    xlog2x(avg.alpha + spread) + (dim - 1) as f64 * xlog2x(spread)
}

/// Mutual information (bits) of the averaged classical channel under input `p`.
pub fn rate_bound(dim: usize, avg: &AvgParams, p: &ProbVec) -> Result<f64> {
    check_len(dim, p)?;
    let spread = avg.beta / dim as f64;
    let out: f64 = p.values().iter().map(|&pi| xlog2x(avg.alpha * pi + spread)).sum();
    Ok(rate_offset(dim, avg) - out)
}

fn rate_two_value(dim: usize, avg: &AvgParams, n: usize, p1: f64, p2: f64) -> f64 {
    let spread = avg.beta / dim as f64;
    let out = n as f64 * xlog2x(avg.alpha * p1 + spread) + (dim - n) as f64 * xlog2x(avg.alpha * p2 + spread);
    rate_offset(dim, avg) - out
}

/// Weighted per-symbol likelihoods `f_s(p) = pi_s alpha_s p + pi_s beta_s / D`.
#[derive(Clone, Copy, Debug)]
struct Likelihoods {
    slope: [f64; 2],
    offset: [f64; 2],
    erasure_min: f64,
}

impl Likelihoods {
    fn new(dim: usize, params: &IdeParams) -> Self {
        let mut slope = [0.0; 2];
        let mut offset = [0.0; 2];
        for s in ChannelState::BOTH {
            let t = params.triple(s);
            let w = params.pi(s);
            slope[s.index()] = w * t.alpha;
            offset[s.index()] = w * t.beta / dim as f64;
        }
        let erasure_min = ChannelState::BOTH
            .iter()
            .map(|&s| params.pi(s) * params.triple(s).gamma)
            .fold(f64::INFINITY, f64::min);
        Self { slope, offset, erasure_min }
    }

    #[inline]
    fn f(&self, s: usize, p: f64) -> f64 {
        self.slope[s] * p + self.offset[s]
    }

    #[inline]
    fn min(&self, p: f64) -> f64 {
        self.f(0, p).min(self.f(1, p))
    }
}

/// MAP detection error lower bound under input `p`.
pub fn detection_bound(dim: usize, params: &IdeParams, p: &ProbVec) -> Result<f64> {
    check_len(dim, p)?;
    let lk = Likelihoods::new(dim, params);
    Ok(p.values().iter().map(|&pi| lk.min(pi)).sum::<f64>() + lk.erasure_min)
}

/// `F(p) = sum_i |f_1(p_i) - f_2(p_i)|`, the part of the detection bound that
/// depends on how `p` is spread.
pub fn discrimination_term(dim: usize, params: &IdeParams, p: &ProbVec) -> Result<f64> {
    check_len(dim, p)?;
    let lk = Likelihoods::new(dim, params);
    Ok(p.values().iter().map(|&pi| (lk.f(0, pi) - lk.f(1, pi)).abs()).sum())
}

fn detection_two_value(dim: usize, lk: &Likelihoods, n: usize, p1: f64, p2: f64) -> f64 {
    n as f64 * lk.min(p1) + (dim - n) as f64 * lk.min(p2) + lk.erasure_min
}

/// Maximum rate, minimum error, the error at which the maximum rate becomes
/// available, the likelihood-crossing threshold and whether the region has
/// no tradeoff at all.
pub fn closed_forms(dim: usize, params: &IdeParams) -> ClosedForms {
    let avg = average_params(params);
    let df = dim as f64;
    let kept = avg.alpha + avg.beta;
    let r_max = -df * xlog2x(kept / df) + rate_offset(dim, &avg);

    let t1 = params.triple(ChannelState::One);
    let t2 = params.triple(ChannelState::Two);
    let (w1, w2) = (params.pi(ChannelState::One), params.pi(ChannelState::Two));
    let erasure_min = (w1 * t1.gamma).min(w2 * t2.gamma);
    let pe_min = (w1 * (t1.alpha + t1.beta / df)).min(w2 * (t2.alpha + t2.beta / df))
        + (df - 1.0) / df * (w1 * t1.beta).min(w2 * t2.beta)
        + erasure_min;
    let pe_star = (w1 * (t1.alpha + t1.beta)).min(w2 * (t2.alpha + t2.beta)) + erasure_min;

    // The threshold expression is invariant under swapping the state labels,
    // so one evaluation covers both orderings of the slopes.
    let slope_gap = w1 * t1.alpha - w2 * t2.alpha;
    let (p_th, no_tradeoff) = if slope_gap.abs() <= f64::EPSILON * (w1 * t1.alpha).max(w2 * t2.alpha).max(1.0) {
        (None, true)
    } else {
        let th = (w2 * t2.beta - w1 * t1.beta) / (slope_gap * df);
        (Some(th), th <= 0.0 || th >= 1.0)
    };

    ClosedForms { r_max: r_max.max(0.0), pe_min, pe_star, p_th, no_tradeoff }
}

fn linspace(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    let count = count.max(2);
    (0..count).map(move |k| {
        if k == count - 1 {
            hi
        } else {
            lo + (hi - lo) * k as f64 / (count - 1) as f64
        }
    })
}

fn eval_two_value(dim: usize, avg: &AvgParams, lk: &Likelihoods, n: usize, p1: f64) -> FrontierPoint {
    let p2 = if n == dim { 0.0 } else { ((1.0 - n as f64 * p1) / (dim - n) as f64).clamp(0.0, 1.0) };
    FrontierPoint {
        pe: detection_two_value(dim, lk, n, p1, p2),
        rate: rate_two_value(dim, avg, n, p1, p2).max(0.0),
        witness: Some(TwoValueDist { dim, n, p1, p2 }),
    }
}

fn sweep_n(dim: usize, avg: &AvgParams, lk: &Likelihoods, n: usize, lo: f64, hi: f64, samples: usize) -> Vec<FrontierPoint> {
    if n == dim || hi - lo <= 0.0 {
        let p1 = if n == dim { 1.0 / dim as f64 } else { lo };
        return vec![eval_two_value(dim, avg, lk, n, p1)];
    }
    linspace(lo, hi, samples).map(|p1| eval_two_value(dim, avg, lk, n, p1)).collect()
}

/// Frontier of the region generated by two-valued input distributions on
/// `[dim]`: a grid sweep over every `n` and a `p1` grid, followed by an upper
/// convex hull and local refinement around its vertices.
pub fn frontier_r1(dim: usize, params: &IdeParams, grid: &GridConfig) -> Frontier {
    assert!(dim >= 1, "alphabet must be nonempty");
    let samples = grid.p1_samples.max(2);
    let avg = average_params(params);
    let lk = Likelihoods::new(dim, params);

    let points: Vec<FrontierPoint> = (1..=dim)
        .into_par_iter()
        .map(|n| {
            let (lo, hi) = TwoValueDist::p1_range(dim, n);
            sweep_n(dim, &avg, &lk, n, lo, hi, samples)
        })
        .flatten()
        .collect();
    let mut hull = hull_points(points);

    // Bisect same-n hull edges whose midpoint still lifts the hull, and probe
    // both sides of every vertex at offsets halving every pass.
    let coarse_step: Vec<f64> = (0..dim)
        .map(|n| {
            let (lo, hi) = TwoValueDist::p1_range(dim, n.max(1));
            (hi - lo) / (samples - 1) as f64
        })
        .collect();
    for pass in 0..grid.refine_passes {
        let scale = 0.5f64.powi(pass as i32 + 1);
        let extra: Vec<FrontierPoint> = hull
            .par_windows(2)
            .flat_map_iter(|edge| {
                let (a, b) = (&edge[0], &edge[1]);
                let mut found = Vec::new();
                let (Some(wa), Some(wb)) = (a.witness, b.witness) else {
                    return found;
                };
                let mut probe = |n: usize, p1: f64| {
                    let (lo, hi) = TwoValueDist::p1_range(dim, n);
                    let pt = eval_two_value(dim, &avg, &lk, n, p1.clamp(lo, hi));
                    if lifts_chain(&hull, &pt) {
                        found.push(pt);
                    }
                };
                if wa.n == wb.n && wa.n < dim {
                    probe(wa.n, 0.5 * (wa.p1 + wb.p1));
                }
                // merged duplicates can leave the two witnesses on different
                // branches of the same curve, so probe around both ends too
                for w in [wa, wb].into_iter().filter(|w| w.n < dim) {
                    let h = coarse_step[w.n] * scale;
                    probe(w.n, w.p1 - h);
                    probe(w.n, w.p1 + h);
                }
                found
            })
            .collect();
        if extra.is_empty() {
            break;
        }
        hull.extend(extra);
        hull = hull_points(hull);
    }

    Frontier::from_hull(hull).with_meta(FrontierMeta {
        label: format!("R1(D={dim})"),
        dim: Some(dim),
        p1_samples: Some(samples),
        params: Some(params.clone()),
    })
}

/// Whether `p` lies above the piecewise-linear chain by more than
/// [`REFINE_TOL`]. Points left of the chain always count.
fn lifts_chain(chain: &[FrontierPoint], p: &FrontierPoint) -> bool {
    let idx = chain.partition_point(|q| q.pe <= p.pe);
    let base = if idx == 0 {
        return true;
    } else if idx == chain.len() {
        chain[idx - 1].rate
    } else {
        let (a, b) = (&chain[idx - 1], &chain[idx]);
        a.rate + (p.pe - a.pe) / (b.pe - a.pe) * (b.rate - a.rate)
    };
    p.rate > base + REFINE_TOL
}

fn pair_score(rate: f64, pe: f64, slope: f64) -> f64 {
    rate - slope * pe
}

fn eval_general(dim: usize, avg: &AvgParams, lk: &Likelihoods, p: &[f64]) -> (f64, f64) {
    let spread = avg.beta / dim as f64;
    let out: f64 = p.iter().map(|&x| xlog2x(avg.alpha * x + spread)).sum();
    let rate = (rate_offset(dim, avg) - out).max(0.0);
    let pe = p.iter().map(|&x| lk.min(x)).sum::<f64>() + lk.erasure_min;
    (pe, rate)
}

fn dirichlet_sample(rng: &mut ChaCha8Rng, shape: f64, dim: usize) -> Vec<f64> {
    let gamma = Gamma::new(shape, 1.0).expect("positive shape");
    let mut v: Vec<f64> = (0..dim).map(|_| gamma.sample(rng)).collect();
    let total: f64 = v.iter().sum();
    if total <= 0.0 {
        let k = rng.random_range(0..dim);
        v.iter_mut().enumerate().for_each(|(i, x)| *x = if i == k { 1.0 } else { 0.0 });
    } else {
        v.iter_mut().for_each(|x| *x /= total);
    }
    v
}

/// Maximizes `rate - slope * pe` over the whole simplex by moving mass between
/// pairs of coordinates, halving the step when no move helps.
fn local_search(dim: usize, avg: &AvgParams, lk: &Likelihoods, start: &[f64], slope: f64, trail: &mut Vec<(f64, f64)>) {
    let mut p = start.to_vec();
    let (pe, rate) = eval_general(dim, avg, lk, &p);
    let mut best = pair_score(rate, pe, slope);
    let mut step: f64 = 0.25;
    while step > 1e-9 {
        let mut improved = false;
        for i in 0..dim {
            for j in 0..dim {
                if i == j || p[i] <= 0.0 {
                    continue;
                }
                let delta = step.min(p[i]);
                p[i] -= delta;
                p[j] += delta;
                let (pe, rate) = eval_general(dim, avg, lk, &p);
                let score = pair_score(rate, pe, slope);
                if score > best + 1e-15 {
                    best = score;
                    improved = true;
                    trail.push((pe, rate));
                } else {
                    p[i] += delta;
                    p[j] -= delta;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
}

/// Frontier of the region generated by arbitrary input distributions on
/// `[dim]`, estimated from random and structured samples of the simplex plus
/// a local search along supporting lines. Serves as an independent check of
/// [`frontier_r1`]; only small alphabets are accepted.
pub fn frontier_r2_bruteforce(dim: usize, params: &IdeParams, samples: usize, seed: u64) -> Result<Frontier> {
    if dim == 0 {
        return Err(Error::Empty("alphabet"));
    }
    if dim > BRUTEFORCE_MAX_DIM {
        return Err(Error::TooLarge { what: "brute-force region", dim, limit: BRUTEFORCE_MAX_DIM });
    }
    let avg = average_params(params);
    let lk = Likelihoods::new(dim, params);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut candidates: Vec<Vec<f64>> = Vec::new();
    // uniform over every nonempty subset, which includes all vertices
    for mask in 1u32..(1 << dim) {
        let k = mask.count_ones() as f64;
        candidates.push((0..dim).map(|i| if mask & (1 << i) != 0 { 1.0 / k } else { 0.0 }).collect());
    }
    if dim > 1 {
        const SHAPES: [f64; 4] = [1.0, 0.3, 3.0, 0.1];
        for k in 0..samples {
            candidates.push(dirichlet_sample(&mut rng, SHAPES[k % SHAPES.len()], dim));
        }
    }

    let mut pairs: Vec<(f64, f64)> = candidates.iter().map(|p| eval_general(dim, &avg, &lk, p)).collect();

    if dim > 1 {
        let coarse = hull_points(pairs.iter().map(|&(pe, rate)| FrontierPoint { pe, rate, witness: None }).collect());
        let mut slopes: Vec<f64> = coarse
            .windows(2)
            .map(|w| (w[1].rate - w[0].rate) / (w[1].pe - w[0].pe))
            .filter(|s| s.is_finite())
            .collect();
        slopes.extend((0..48).map(|k| 10f64.powf(-3.0 + 7.0 * k as f64 / 47.0)));
        slopes.push(0.0);
        let mut trail = Vec::new();
        for &slope in &slopes {
            let mut ranked: Vec<(f64, usize)> = pairs
                .iter()
                .enumerate()
                .map(|(i, &(pe, rate))| (pair_score(rate, pe, slope), i))
                .collect();
            ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
            for &(_, idx) in ranked.iter().take(3) {
                local_search(dim, &avg, &lk, &candidates[idx], slope, &mut trail);
            }
        }
        pairs.extend(trail);
    }

    let points = pairs.into_iter().map(|(pe, rate)| FrontierPoint { pe, rate, witness: None }).collect();
    Ok(Frontier::from_hull(hull_points(points)).with_meta(FrontierMeta {
        label: format!("R2-bruteforce(D={dim})"),
        dim: Some(dim),
        p1_samples: None,
        params: Some(params.clone()),
    }))
}

/// Upper-left convex boundary of a nonempty point set.
pub fn upper_convex_hull(points: &[RatePoint]) -> Result<Frontier> {
    if points.is_empty() {
        return Err(Error::Empty("point set"));
    }
    let pts = points.iter().map(|p| FrontierPoint { pe: p.pe, rate: p.rate, witness: None }).collect();
    Ok(Frontier::from_hull(hull_points(pts)))
}

/// Convex hull of the union of several regions. Each region also contributes
/// its flat extension at its maximum rate.
pub fn union_hull(frontiers: &[&Frontier]) -> Result<Frontier> {
    if frontiers.is_empty() {
        return Err(Error::Empty("frontier list"));
    }
    let far = frontiers.iter().map(|f| f.pe_star()).fold(f64::NEG_INFINITY, f64::max);
    let mut pts: Vec<FrontierPoint> = frontiers.iter().flat_map(|f| f.points.iter().copied()).collect();
    pts.extend(frontiers.iter().map(|f| FrontierPoint { pe: far, rate: f.r_max(), witness: None }));
    Ok(Frontier::from_hull(hull_points(pts)))
}

/// Region reachable with depolarized entanglement, time-shared with the
/// unentangled region.
pub fn unreliable_frontier(params: &IdeParams, alpha_tilde: f64, grid: &GridConfig) -> Result<Frontier> {
    let composed = crate::channels::compose_unreliable(params, alpha_tilde)?;
    let d = params.d();
    let entangled = frontier_r1(d * d, &composed, grid);
    let plain = frontier_r1(d, params, grid);
    Ok(union_hull(&[&entangled, &plain])?.with_meta(FrontierMeta {
        label: format!("unreliable(alpha_tilde={alpha_tilde})"),
        dim: Some(d * d),
        p1_samples: Some(grid.p1_samples),
        params: Some(composed),
    }))
}

/// Drops vertices of a concave chain that lie within `tol` (in rate) of the
/// chord joining the surrounding kept vertices. Endpoints are kept.
fn thin_chain(points: Vec<FrontierPoint>, tol: f64) -> Vec<FrontierPoint> {
    if points.len() <= 2 {
        return points;
    }
    let gap = |a: &FrontierPoint, b: &FrontierPoint, p: &FrontierPoint| {
        let t = (p.pe - a.pe) / (b.pe - a.pe);
        (p.rate - (a.rate + t * (b.rate - a.rate))).abs()
    };
    let last = points.len() - 1;
    let mut keep = vec![0];
    let mut anchor = 0;
    for i in 1..last {
        let next = &points[i + 1];
        let skippable = i - anchor < THIN_MAX_RUN && (anchor + 1..=i).all(|j| gap(&points[anchor], next, &points[j]) <= tol);
        if !skippable {
            keep.push(i);
            anchor = i;
        }
    }
    keep.push(last);
    keep.into_iter().map(|i| points[i]).collect()
}

fn cross(o: &FrontierPoint, a: &FrontierPoint, b: &FrontierPoint) -> f64 {
    (a.pe - o.pe) * (b.rate - o.rate) - (a.rate - o.rate) * (b.pe - o.pe)
}

/// Monotone-chain upper hull, truncated at the first maximum-rate vertex.
fn hull_points(mut pts: Vec<FrontierPoint>) -> Vec<FrontierPoint> {
    pts.retain(|p| p.pe.is_finite() && p.rate.is_finite());
    pts.sort_by(|a, b| a.pe.total_cmp(&b.pe).then_with(|| b.rate.total_cmp(&a.rate)));

    let mut merged: Vec<FrontierPoint> = Vec::with_capacity(pts.len());
    for p in pts {
        match merged.last_mut() {
            Some(last) if p.pe - last.pe <= PE_MERGE_TOL => {
                if p.rate > last.rate {
                    last.rate = p.rate;
                    last.witness = p.witness;
                }
            }
            _ => merged.push(p),
        }
    }

    let mut hull: Vec<FrontierPoint> = Vec::new();
    for p in merged {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], &p) >= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }

    // Rates next to the maximizer agree with it to rounding, so near-ties go
    // to the vertex with the largest error and the flat run before it is cut.
    let best = hull.iter().map(|p| p.rate).fold(f64::NEG_INFINITY, f64::max);
    let near = |p: &FrontierPoint| p.rate >= best - RATE_TIE_TOL;
    let top = hull.iter().rposition(near).unwrap_or(0);
    let first = hull.iter().position(near).unwrap_or(top);
    hull.truncate(top + 1);
    hull.drain(first..top);
    hull
}

/// Outer-bound point for a finite, uniformly weighted ensemble of input
/// states: a Holevo-type rate ceiling and a trace-distance error floor.
pub fn converse_outer_point(params: &IdeParams, ensemble: &[DensityOperator]) -> Result<RatePoint> {
    if ensemble.is_empty() {
        return Err(Error::Empty("ensemble"));
    }
    let d = params.d();
    if let Some(bad) = ensemble.iter().find(|s| s.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: bad.dim() });
    }
    let m = ensemble.len() as f64;
    let mut sum = ComplexMatrix::zeros(d, d);
    let mut conditional = 0.0;
    for sigma in ensemble {
        sum = &sum + sigma.matrix();
        conditional += apply_ide(params, Selector::Average, sigma)?.entropy();
    }
    let mean = DensityOperator::from_trusted(sum.scale(1.0 / m));
    let rate = apply_ide(params, Selector::Average, &mean)?.entropy() - conditional / m;

    let out1 = apply_ide(params, Selector::State(ChannelState::One), &mean)?;
    let out2 = apply_ide(params, Selector::State(ChannelState::Two), &mean)?;
    let diff = &out1.matrix().scale(params.pi(ChannelState::One)) - &out2.matrix().scale(params.pi(ChannelState::Two));
    let pe = 0.5 * (1.0 - trace_norm(&diff)?);
    Ok(RatePoint { pe: pe.clamp(0.0, 1.0), rate: rate.max(0.0) })
}

/// Draws a valid parameter set uniformly over the simplices; used by tests
/// and the equivalence check.
pub fn random_params<R: Rng>(rng: &mut R, d: usize) -> IdeParams {
    use crate::channels::IdeTriple;
    let mut triple = || {
        let a: f64 = rng.random();
        let b: f64 = rng.random();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        IdeTriple::new(lo, hi - lo, 1.0 - hi)
    };
    let s1 = triple();
    let s2 = triple();
    let theta1 = rng.random::<f64>();
    let pi1 = rng.random_range(0.05..0.95);
    IdeParams::new(d, s1, s2, theta1, pi1).expect("sampled parameters are valid")
}
