use serde::{Deserialize, Serialize};

use crate::error::{Result, TdError};
use crate::rng::SplitMix64;

const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    Fixed(usize),
    /// Uniform over the non-terminal states.
    Uniform,
}

/// Parameters a generated environment was built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub k: usize,
    pub b: usize,
    pub sigma: f64,
    pub gamma: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_actions: Option<usize>,
}

/// Markov reward process. Terminal states self-loop with reward 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mrp {
    transitions: Vec<Vec<f64>>,
    reward_means: Vec<Vec<f64>>,
    sigma: f64,
    gamma: f64,
    terminal_states: Vec<usize>,
    initial_state: InitialState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<GeneratorParams>,
}

impl Mrp {
    pub fn new(
        transitions: Vec<Vec<f64>>,
        reward_means: Vec<Vec<f64>>,
        sigma: f64,
        gamma: f64,
        mut terminal_states: Vec<usize>,
        initial_state: InitialState,
    ) -> Result<Self> {
        terminal_states.sort_unstable();
        terminal_states.dedup();
        let mrp = Mrp { transitions, reward_means, sigma, gamma, terminal_states, initial_state, generator: None };
        mrp.validate()?;
        Ok(mrp)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.transitions.len();
        if k == 0 {
            return Err(TdError::InvalidConfig("an MRP needs at least one state".into()));
        }
        if self.reward_means.len() != k {
            return Err(TdError::DimensionMismatch { expected: k, actual: self.reward_means.len() });
        }
        if !(self.sigma >= 0.0) {
            return Err(TdError::InvalidConfig(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(TdError::InvalidConfig(format!("gamma must lie in [0, 1], got {}", self.gamma)));
        }
        for (s, (row, rrow)) in self.transitions.iter().zip(&self.reward_means).enumerate() {
            if row.len() != k || rrow.len() != k {
                return Err(TdError::DimensionMismatch { expected: k, actual: row.len().max(rrow.len()) });
            }
            validate_row(row, &format!("state {s}"))?;
        }
        for &s in &self.terminal_states {
            if s >= k {
                return Err(TdError::InvalidConfig(format!("terminal state {s} out of range")));
            }
            if self.transitions[s][s] != 1.0 || self.reward_means[s][s] != 0.0 {
                return Err(TdError::InvalidConfig(format!("terminal state {s} must self-loop with reward 0")));
            }
        }
        match self.initial_state {
            InitialState::Fixed(s) if s >= k || self.is_terminal(s) => {
                Err(TdError::InvalidConfig(format!("initial state {s} is out of range or terminal")))
            }
            _ if self.terminal_states.len() == k => Err(TdError::InvalidConfig("every state is terminal".into())),
            _ => Ok(()),
        }
    }

    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn transitions(&self) -> &[Vec<f64>] {
        &self.transitions
    }

    pub fn reward_means(&self) -> &[Vec<f64>] {
        &self.reward_means
    }

    pub fn terminal_states(&self) -> &[usize] {
        &self.terminal_states
    }

    pub fn initial_state(&self) -> &InitialState {
        &self.initial_state
    }

    pub fn generator(&self) -> Option<&GeneratorParams> {
        self.generator.as_ref()
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminal_states.binary_search(&s).is_ok()
    }

    pub fn is_episodic(&self) -> bool {
        !self.terminal_states.is_empty()
    }

    pub fn non_terminal_states(&self) -> Vec<usize> {
        (0..self.num_states()).filter(|&s| !self.is_terminal(s)).collect()
    }

    /// `r̄[s] = Σ_{s'} P[s,s']·r_mean[s,s']`
    pub fn expected_rewards(&self) -> Vec<f64> {
        self.transitions
            .iter()
            .zip(&self.reward_means)
            .map(|(p, r)| p.iter().zip(r).map(|(p, r)| p * r).sum())
            .collect()
    }

    pub fn sample_initial(&self, rng: &mut SplitMix64) -> usize {
        match self.initial_state {
            InitialState::Fixed(s) => s,
            InitialState::Uniform => {
                let candidates = self.non_terminal_states();
                candidates[rng.below(candidates.len())]
            }
        }
    }

    /// Draws `(next, reward)` from `state`; reward is `N(r_mean[state,next], σ)`.
    pub fn sample_step(&self, state: usize, rng: &mut SplitMix64) -> Result<(usize, f64)> {
        if state >= self.num_states() {
            return Err(TdError::InvalidConfig(format!("state {state} out of range")));
        }
        if self.is_terminal(state) {
            return Err(TdError::TerminalState(state));
        }
        let next = sample_row(&self.transitions[state], rng);
        let noise = rng.normal();
        Ok((next, self.reward_means[state][next] + self.sigma * noise))
    }
}

/// Markov decision process; rows are indexed `[state][action][next]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mdp {
    transitions: Vec<Vec<Vec<f64>>>,
    reward_means: Vec<Vec<Vec<f64>>>,
    sigma: f64,
    gamma: f64,
    terminal_states: Vec<usize>,
    initial_state: InitialState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<GeneratorParams>,
}

impl Mdp {
    pub fn validate(&self) -> Result<()> {
        let k = self.transitions.len();
        if k == 0 || self.reward_means.len() != k {
            return Err(TdError::InvalidConfig("malformed MDP tables".into()));
        }
        let num_actions = self.num_actions();
        if num_actions == 0 {
            return Err(TdError::InvalidConfig("an MDP needs at least one action".into()));
        }
        for (s, (rows, rrows)) in self.transitions.iter().zip(&self.reward_means).enumerate() {
            if rows.len() != num_actions || rrows.len() != num_actions {
                return Err(TdError::DimensionMismatch { expected: num_actions, actual: rows.len() });
            }
            for (a, (row, rrow)) in rows.iter().zip(rrows).enumerate() {
                if row.len() != k || rrow.len() != k {
                    return Err(TdError::DimensionMismatch { expected: k, actual: row.len() });
                }
                validate_row(row, &format!("state {s}, action {a}"))?;
            }
        }
        if !(self.sigma >= 0.0) || !(0.0..=1.0).contains(&self.gamma) {
            return Err(TdError::InvalidConfig("sigma must be >= 0 and gamma in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn num_actions(&self) -> usize {
        self.transitions.first().map_or(0, Vec::len)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn transitions(&self) -> &[Vec<Vec<f64>>] {
        &self.transitions
    }

    pub fn reward_means(&self) -> &[Vec<Vec<f64>>] {
        &self.reward_means
    }

    pub fn generator(&self) -> Option<&GeneratorParams> {
        self.generator.as_ref()
    }

    pub fn terminal_states(&self) -> &[usize] {
        &self.terminal_states
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminal_states.binary_search(&s).is_ok()
    }

    pub fn is_episodic(&self) -> bool {
        !self.terminal_states.is_empty()
    }

    pub fn non_terminal_states(&self) -> Vec<usize> {
        (0..self.num_states()).filter(|&s| !self.is_terminal(s)).collect()
    }

    pub fn sample_initial(&self, rng: &mut SplitMix64) -> usize {
        match self.initial_state {
            InitialState::Fixed(s) => s,
            InitialState::Uniform => {
                let candidates = self.non_terminal_states();
                candidates[rng.below(candidates.len())]
            }
        }
    }

    pub fn sample_step(&self, state: usize, action: usize, rng: &mut SplitMix64) -> Result<(usize, f64)> {
        if action >= self.num_actions() {
            return Err(TdError::ActionOutOfRange { action, num_actions: self.num_actions() });
        }
        if self.is_terminal(state) {
            return Err(TdError::TerminalState(state));
        }
        let next = sample_row(&self.transitions[state][action], rng);
        let noise = rng.normal();
        Ok((next, self.reward_means[state][action][next] + self.sigma * noise))
    }
}

fn validate_row(row: &[f64], what: &str) -> Result<()> {
    if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(TdError::InvalidConfig(format!("{what}: probabilities must lie in [0, 1]")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        return Err(TdError::InvalidConfig(format!("{what}: transition row sums to {sum}")));
    }
    Ok(())
}

/// Inverse-CDF draw from a probability row; zero-probability entries are
/// never returned.
fn sample_row(row: &[f64], rng: &mut SplitMix64) -> usize {
    let u = rng.next_f64();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (j, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = j;
            if u < acc {
                return j;
            }
        }
    }
    // u landed in the rounding slack above the cumulative sum
    last_positive
}

/// One generated row: `b` distinct successors, probabilities from sorted
/// uniform cut points, standard-normal expected rewards on each successor.
fn generated_row(k: usize, b: usize, rng: &mut SplitMix64) -> (Vec<f64>, Vec<f64>) {
    let successors = rng.sample_distinct(k, b);
    let mut cuts: Vec<f64> = (0..b - 1).map(|_| rng.next_f64()).collect();
    cuts.sort_by(f64::total_cmp);
    let mut probs = Vec::with_capacity(b);
    let mut prev = 0.0;
    for &c in &cuts {
        probs.push(c - prev);
        prev = c;
    }
    probs.push(1.0 - prev);
    let mut row = vec![0.0; k];
    let mut rewards = vec![0.0; k];
    for (&s, &p) in successors.iter().zip(&probs) {
        row[s] = p;
    }
    for &s in &successors {
        rewards[s] = rng.normal();
    }
    repair_zero_probabilities(&mut row, &successors);
    (row, rewards)
}

/// Coincident cut points would leave a chosen successor with probability 0;
/// nudge such entries so each row keeps exactly `b` nonzeros.
fn repair_zero_probabilities(row: &mut [f64], successors: &[usize]) {
    let eps = f64::EPSILON;
    for &s in successors {
        if row[s] == 0.0 {
            let donor = *successors.iter().max_by(|&&a, &&b| row[a].total_cmp(&row[b])).unwrap();
            row[donor] -= eps;
            row[s] = eps;
        }
    }
}

fn check_generator_args(k: usize, b: usize, sigma: f64, gamma: f64) -> Result<()> {
    if k == 0 || b == 0 {
        return Err(TdError::InvalidConfig("k and b must be at least 1".into()));
    }
    if b > k {
        return Err(TdError::InvalidConfig(format!("branching factor exceeds states (b = {b} > k = {k})")));
    }
    if !(sigma >= 0.0) {
        return Err(TdError::InvalidConfig(format!("sigma must be >= 0, got {sigma}")));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(TdError::InvalidConfig(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    Ok(())
}

/// Random MRP `(k, b, σ)`: no terminal states, uniform initial state.
pub fn generate_mrp(k: usize, b: usize, sigma: f64, gamma: f64, seed: u64) -> Result<Mrp> {
    check_generator_args(k, b, sigma, gamma)?;
    let mut rng = SplitMix64::new(seed);
    let (transitions, reward_means) = (0..k).map(|_| generated_row(k, b, &mut rng)).unzip();
    let mut mrp = Mrp::new(transitions, reward_means, sigma, gamma, Vec::new(), InitialState::Uniform)?;
    mrp.generator = Some(GeneratorParams { k, b, sigma, gamma, seed, num_actions: None });
    Ok(mrp)
}

/// Random MDP: the MRP row construction repeated for every (state, action).
pub fn generate_mdp(k: usize, b: usize, num_actions: usize, sigma: f64, gamma: f64, seed: u64) -> Result<Mdp> {
    check_generator_args(k, b, sigma, gamma)?;
    if num_actions == 0 {
        return Err(TdError::InvalidConfig("an MDP needs at least one action".into()));
    }
    let mut rng = SplitMix64::new(seed);
    let mut transitions = Vec::with_capacity(k);
    let mut reward_means = Vec::with_capacity(k);
    for _ in 0..k {
        let (p, r): (Vec<_>, Vec<_>) = (0..num_actions).map(|_| generated_row(k, b, &mut rng)).unzip();
        transitions.push(p);
        reward_means.push(r);
    }
    let mdp = Mdp {
        transitions,
        reward_means,
        sigma,
        gamma,
        terminal_states: Vec::new(),
        initial_state: InitialState::Uniform,
        generator: Some(GeneratorParams { k, b, sigma, gamma, seed, num_actions: Some(num_actions) }),
    };
    mdp.validate()?;
    Ok(mdp)
}
