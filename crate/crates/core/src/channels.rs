//! Identity-depolarizing-erasure (IDE) channels.
//!
//! A state-`s` channel keeps its input with probability `alpha_s`, replaces it
//! by the maximally mixed state with probability `beta_s` and erases it with
//! probability `gamma_s`. The erasure flag lives in one extra output dimension,
//! stored last in matrix form and labelled `y = 0` in classical tables.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{bell_state, boxplus, ComplexMatrix, DensityOperator, PureStateVec, NORMALIZATION_TOL};

/// One `(alpha, beta, gamma)` triple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdeTriple {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl IdeTriple {
    pub const IDENTITY: Self = Self::new(1.0, 0.0, 0.0);
    pub const DEPOLARIZE: Self = Self::new(0.0, 1.0, 0.0);
    pub const ERASE: Self = Self::new(0.0, 0.0, 1.0);

    pub const fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    fn check(&self, label: &str) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParams(format!("{name}{label} = {v} is outside [0, 1]")));
            }
        }
        let sum = self.alpha + self.beta + self.gamma;
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidParams(format!(
                "alpha{label} + beta{label} + gamma{label} = {sum} (must equal 1)"
            )));
        }
        Ok(())
    }
}

/// Binary channel state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChannelState {
    One,
    Two,
}

impl ChannelState {
    pub const BOTH: [ChannelState; 2] = [ChannelState::One, ChannelState::Two];

    pub fn index(self) -> usize {
        match self {
            ChannelState::One => 0,
            ChannelState::Two => 1,
        }
    }

    pub fn label(self) -> u8 {
        self.index() as u8 + 1
    }
}

/// Which channel `apply_ide` should use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selector {
    State(ChannelState),
    Average,
}

/// Full parameterization of a two-state IDE channel.
#[derive(Clone, Debug, PartialEq)]
pub struct IdeParams {
    d: usize,
    states: [IdeTriple; 2],
    theta: [f64; 2],
    pi: [f64; 2],
}

impl IdeParams {
    /// `theta1` is the prior of state 1 and `pi1` its detection weight; the
    /// complements are derived.
    pub fn new(d: usize, state1: IdeTriple, state2: IdeTriple, theta1: f64, pi1: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParams(format!("d = {d} (must be at least 2)")));
        }
        state1.check("1")?;
        state2.check("2")?;
        if !theta1.is_finite() || !(0.0..=1.0).contains(&theta1) {
            return Err(Error::InvalidParams(format!("theta1 = {theta1} is outside [0, 1]")));
        }
        if !pi1.is_finite() || pi1 <= 0.0 || pi1 >= 1.0 {
            return Err(Error::InvalidParams(format!("pi1 = {pi1} is outside (0, 1)")));
        }
        Ok(Self {
            d,
            states: [state1, state2],
            theta: [theta1, 1.0 - theta1],
            pi: [pi1, 1.0 - pi1],
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn triple(&self, s: ChannelState) -> IdeTriple {
        self.states[s.index()]
    }

    pub fn theta(&self, s: ChannelState) -> f64 {
        self.theta[s.index()]
    }

    pub fn pi(&self, s: ChannelState) -> f64 {
        self.pi[s.index()]
    }

    pub fn pi_weights(&self) -> [f64; 2] {
        self.pi
    }

    pub fn with_d(&self, d: usize) -> Result<Self> {
        Self::new(d, self.states[0], self.states[1], self.theta[0], self.pi[0])
    }

    pub fn with_states(&self, state1: IdeTriple, state2: IdeTriple) -> Result<Self> {
        Self::new(self.d, state1, state2, self.theta[0], self.pi[0])
    }

    pub fn with_theta1(&self, theta1: f64) -> Result<Self> {
        Self::new(self.d, self.states[0], self.states[1], theta1, self.pi[0])
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        raw.resolve()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_config_str(&text)
    }

    pub fn to_config_string(&self) -> String {
        let raw = RawConfig::from(self);
        toml::to_string(&raw).expect("flat config always serializes")
    }
}

impl fmt::Display for IdeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b] = self.states;
        write!(
            f,
            "d={} s1=({}, {}, {}) s2=({}, {}, {}) theta1={} pi1={}",
            self.d, a.alpha, a.beta, a.gamma, b.alpha, b.beta, b.gamma, self.theta[0], self.pi[0]
        )
    }
}

/// On-disk key-value form of [`IdeParams`].
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    d: usize,
    alpha1: f64,
    beta1: f64,
    gamma1: f64,
    alpha2: f64,
    beta2: f64,
    gamma2: f64,
    theta1: f64,
    pi1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pi2: Option<f64>,
}

impl RawConfig {
    fn resolve(self) -> Result<IdeParams> {
        for (name, given, base) in [("theta", self.theta2, self.theta1), ("pi", self.pi2, self.pi1)] {
            if let Some(v) = given {
                if (v + base - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::InvalidParams(format!(
                        "{name}1 + {name}2 = {} (must equal 1)",
                        v + base
                    )));
                }
            }
        }
        IdeParams::new(
            self.d,
            IdeTriple::new(self.alpha1, self.beta1, self.gamma1),
            IdeTriple::new(self.alpha2, self.beta2, self.gamma2),
            self.theta1,
            self.pi1,
        )
    }
}

impl From<&IdeParams> for RawConfig {
    fn from(p: &IdeParams) -> Self {
        let [a, b] = p.states;
        Self {
            d: p.d,
            alpha1: a.alpha,
            beta1: a.beta,
            gamma1: a.gamma,
            alpha2: b.alpha,
            beta2: b.beta,
            gamma2: b.gamma,
            theta1: p.theta[0],
            pi1: p.pi[0],
            theta2: None,
            pi2: None,
        }
    }
}

/// Prior-averaged triple `(alpha_bar, beta_bar, gamma_bar)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AvgParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

pub fn average_params(p: &IdeParams) -> AvgParams {
    let [t1, t2] = p.theta;
    let [a, b] = p.states;
    AvgParams {
        alpha: t1 * a.alpha + t2 * b.alpha,
        beta: t1 * a.beta + t2 * b.beta,
        gamma: t1 * a.gamma + t2 * b.gamma,
    }
}

fn selected_triple(p: &IdeParams, sel: Selector) -> IdeTriple {
    match sel {
        Selector::State(s) => p.triple(s),
        Selector::Average => {
            let avg = average_params(p);
            IdeTriple::new(avg.alpha, avg.beta, avg.gamma)
        }
    }
}

fn erasure_flag(dim: usize) -> ComplexMatrix {
    let mut diag = vec![0.0; dim + 1];
    diag[dim] = 1.0;
    ComplexMatrix::from_real_diagonal(&diag)
}

/// `alpha * block ⊞ (beta/n) I_n ⊞ gamma |0><0|` for an `n x n` block.
fn ide_output(t: IdeTriple, block: &ComplexMatrix) -> DensityOperator {
    let n = block.rows();
    let kept = block.scale(t.alpha);
    let noise = ComplexMatrix::identity(n).scale(t.beta / n as f64);
    let erased = erasure_flag(n).scale(t.gamma);
    DensityOperator::from_trusted(boxplus(&boxplus(&kept, &noise), &erased))
}

/// Output of the state-`s` (or prior-averaged) channel, dimension `d + 1`.
pub fn apply_ide(p: &IdeParams, sel: Selector, rho: &DensityOperator) -> Result<DensityOperator> {
    if rho.dim() != p.d {
        return Err(Error::DimensionMismatch { expected: p.d, got: rho.dim() });
    }
    Ok(ide_output(selected_triple(p, sel), rho.matrix()))
}

/// Maps a 1-based superdense symbol `x` in `[d^2]` to its Pauli exponents.
pub fn superdense_indices(d: usize, x: usize) -> (usize, usize) {
    ((x - 1) / d, (x - 1) % d)
}

/// Joint state of the received qudit and the receiver's half of the Bell pair
/// after the sender encoded symbol `x` (1-based, in `[d^2]`) and the state-`s`
/// channel acted. Dimension `d^2 + 1`.
pub fn lift_entangled_output(p: &IdeParams, s: ChannelState, x: usize) -> Result<DensityOperator> {
    let d = p.d;
    if x == 0 || x > d * d {
        return Err(Error::IndexOutOfRange(format!("symbol {x} outside [1, {}]", d * d)));
    }
    let (i, j) = superdense_indices(d, x);
    let phi = bell_state(d, i, j)?;
    Ok(ide_output(p.triple(s), &ComplexMatrix::outer(&phi)))
}

/// Whether a table carries per-state rows or the prior-averaged channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableMode {
    PerState,
    Marginal,
}

/// Conditional pmf `P(y | x, s)` with `y` in `{0, 1, ..., D}` (`0` = erased),
/// `x` in `[D]` and `s` in `{1, 2}`. In marginal mode both state rows hold the
/// averaged channel.
#[derive(Clone, Debug, PartialEq)]
pub struct CondPmfTable {
    dim: usize,
    mode: TableMode,
    probs: Vec<f64>,
}

impl CondPmfTable {
    pub(crate) fn from_rows(dim: usize, mode: TableMode, probs: Vec<f64>) -> Self {
        assert_eq!(probs.len(), 2 * dim * (dim + 1));
        Self { dim, mode, probs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> TableMode {
        self.mode
    }

    fn offset(&self, x: usize, s: ChannelState) -> usize {
        assert!((1..=self.dim).contains(&x), "input symbol {x} outside [1, {}]", self.dim);
        (s.index() * self.dim + (x - 1)) * (self.dim + 1)
    }

    /// Row `P(. | x, s)` indexed by `y`.
    pub fn row(&self, x: usize, s: ChannelState) -> &[f64] {
        let o = self.offset(x, s);
        &self.probs[o..o + self.dim + 1]
    }

    pub fn get(&self, y: usize, x: usize, s: ChannelState) -> f64 {
        self.row(x, s)[y]
    }

    /// `P(y | s) = sum_x p_x(x) P(y | x, s)`
    pub fn output_given_state(&self, p_x: &[f64], s: ChannelState) -> Vec<f64> {
        assert_eq!(p_x.len(), self.dim);
        let mut out = vec![0.0; self.dim + 1];
        for (x, &w) in p_x.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (o, &v) in out.iter_mut().zip(self.row(x + 1, s)) {
                *o += w * v;
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Classical channel seen by the receiver after a computational-basis
/// (`dim = d`) or Bell-basis (`dim = d^2`) measurement.
pub fn induced_classical_channel(p: &IdeParams, dim: usize, mode: TableMode) -> Result<CondPmfTable> {
    if dim != p.d && dim != p.d * p.d {
        return Err(Error::InvalidParams(format!(
            "signal dimension {dim} must be d = {} or d^2 = {}",
            p.d,
            p.d * p.d
        )));
    }
    let row_len = dim + 1;
    let mut probs = vec![0.0; 2 * dim * row_len];
    for s in ChannelState::BOTH {
        let t = match mode {
            TableMode::PerState => p.triple(s),
            TableMode::Marginal => selected_triple(p, Selector::Average),
        };
        let spread = t.beta / dim as f64;
        for x in 1..=dim {
            let row = &mut probs[(s.index() * dim + x - 1) * row_len..][..row_len];
            row[0] = t.gamma;
            row[1..].fill(spread);
            row[x] = t.alpha + spread;
        }
    }
    Ok(CondPmfTable { dim, mode, probs })
}

/// Folds a depolarizing channel with retention `alpha_tilde` on the
/// receiver's entangled half into the IDE parameters.
pub fn compose_unreliable(p: &IdeParams, alpha_tilde: f64) -> Result<IdeParams> {
    if !alpha_tilde.is_finite() || !(0.0..=1.0).contains(&alpha_tilde) {
        return Err(Error::InvalidParams(format!("alpha_tilde = {alpha_tilde} is outside [0, 1]")));
    }
    let beta_tilde = 1.0 - alpha_tilde;
    let fold = |t: IdeTriple| IdeTriple::new(t.alpha * alpha_tilde, t.alpha * beta_tilde + t.beta, t.gamma);
    p.with_states(fold(p.states[0]), fold(p.states[1]))
}

/// Computational basis element `|k>` as a density operator on `C^d`, 1-based.
pub fn input_symbol_state(d: usize, x: usize) -> DensityOperator {
    DensityOperator::basis_projector(d, x - 1)
}

/// Erasure-flag projector on a `dim + 1` output space as a pure state.
pub fn erasure_projector_state(dim: usize) -> PureStateVec {
    PureStateVec::basis(dim + 1, dim)
}
