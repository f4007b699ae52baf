//! Contest primitives: move sequences, the lottery success function,
//! winner realization and monetary payoffs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Prize used in the laboratory sessions.
pub const LAB_PRIZE: f64 = 240.0;
/// Per-round endowment used in the laboratory sessions.
pub const LAB_ENDOWMENT: f64 = 240.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContestError {
    #[error("move sequence is empty")]
    EmptySequence,
    #[error("stage {stage} has non-positive player count {count}")]
    NonPositiveStageCount { stage: usize, count: i64 },
    #[error("cannot parse move sequence {0:?}")]
    Parse(String),
    #[error("investment {value} of player {player} is negative")]
    NegativeInvestment { player: usize, value: f64 },
    #[error("investment {value} of player {player} exceeds endowment {endowment}")]
    InvestmentExceedsEndowment {
        player: usize,
        value: f64,
        endowment: f64,
    },
    #[error("winner index {winner} out of range for {players} players")]
    WinnerOutOfRange { winner: usize, players: usize },
    #[error("prize must be positive and finite, got {0}")]
    InvalidPrize(f64),
    #[error("{name} must be nonnegative and finite, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("uniform draw {0} outside [0, 1)")]
    DrawOutOfRange(f64),
    #[error("profile has {got} investments, contest has {expected} players")]
    ProfileSize { expected: usize, got: usize },
}

/// Stage structure `(n_1, ..., n_T)`: `n_t` players invest simultaneously at
/// stage `t` after observing every earlier stage.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct MoveSequence {
    stages: Vec<usize>,
}

impl MoveSequence {
    pub fn new(stages: &[i64]) -> Result<Self, ContestError> {
        validate_sequence(stages)
    }

    /// Simultaneous contest with `n` players.
    pub fn simultaneous(n: usize) -> Self {
        assert!(n >= 1, "a contest needs at least one player");
        Self { stages: vec![n] }
    }

    pub fn stages(&self) -> &[usize] {
        &self.stages
    }

    /// Number of stages `T`.
    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Total number of players `n`.
    pub fn players(&self) -> usize {
        self.stages.iter().sum()
    }

    /// Players at stage `t` (1-based).
    pub fn stage_size(&self, stage: usize) -> usize {
        self.stages[stage - 1]
    }

    /// Stage (1-based) at which the given player index (0-based) moves.
    pub fn stage_of_player(&self, player: usize) -> usize {
        let mut seen = 0;
        for (t, &n_t) in self.stages.iter().enumerate() {
            seen += n_t;
            if player < seen {
                return t + 1;
            }
        }
        panic!("player {player} out of range for sequence {self}");
    }

    /// Index of the first player (0-based) moving at `stage` (1-based).
    pub fn first_player_of_stage(&self, stage: usize) -> usize {
        self.stages[..stage - 1].iter().sum()
    }

    /// Every sequence with `n` players, in lexicographic order of stages.
    pub fn all_with_players(n: usize) -> Vec<MoveSequence> {
        fn rec(rest: usize, prefix: &mut Vec<usize>, out: &mut Vec<MoveSequence>) {
            if rest == 0 {
                out.push(MoveSequence {
                    stages: prefix.clone(),
                });
                return;
            }
            for first in 1..=rest {
                prefix.push(first);
                rec(rest - first, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if n > 0 {
            rec(n, &mut Vec::new(), &mut out);
        }
        out
    }
}

impl fmt::Display for MoveSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.stages.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for MoveSequence {
    type Err = ContestError;

    /// Parses `"1,2"`, `"(1,2)"` or `"1 2"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let stages = trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|p| !p.is_empty())
            .map(|p| p.parse::<i64>().map_err(|_| ContestError::Parse(s.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        validate_sequence(&stages)
    }
}

impl TryFrom<Vec<i64>> for MoveSequence {
    type Error = ContestError;

    fn try_from(v: Vec<i64>) -> Result<Self, Self::Error> {
        validate_sequence(&v)
    }
}

impl From<MoveSequence> for Vec<i64> {
    fn from(seq: MoveSequence) -> Self {
        seq.stages.iter().map(|&n| n as i64).collect()
    }
}

pub fn validate_sequence(stages: &[i64]) -> Result<MoveSequence, ContestError> {
    if stages.is_empty() {
        return Err(ContestError::EmptySequence);
    }
    if let Some((i, &count)) = stages.iter().enumerate().find(|(_, &n)| n < 1) {
        return Err(ContestError::NonPositiveStageCount {
            stage: i + 1,
            count,
        });
    }
    Ok(MoveSequence {
        stages: stages.iter().map(|&n| n as usize).collect(),
    })
}

/// Game parameters. The joy-of-winning term `w` enters preferences only:
/// equilibrium computations use the effective prize `V + w`, while monetary
/// payoffs pay `V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContestSpec {
    pub sequence: MoveSequence,
    pub prize: f64,
    pub endowment: f64,
    #[serde(default)]
    pub joy_of_winning: f64,
}

impl ContestSpec {
    pub fn new(
        sequence: MoveSequence,
        prize: f64,
        endowment: f64,
        joy_of_winning: f64,
    ) -> Result<Self, ContestError> {
        let spec = Self {
            sequence,
            prize,
            endowment,
            joy_of_winning,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Lab configuration: `V = 240`, endowment 240, no joy of winning.
    pub fn lab(sequence: MoveSequence) -> Self {
        Self {
            sequence,
            prize: LAB_PRIZE,
            endowment: LAB_ENDOWMENT,
            joy_of_winning: 0.0,
        }
    }

    pub fn with_joy_of_winning(mut self, w: f64) -> Self {
        self.joy_of_winning = w;
        self
    }

    pub fn validate(&self) -> Result<(), ContestError> {
        if !(self.prize > 0.0 && self.prize.is_finite()) {
            return Err(ContestError::InvalidPrize(self.prize));
        }
        for (name, value) in [
            ("endowment", self.endowment),
            ("joy_of_winning", self.joy_of_winning),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ContestError::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    pub fn effective_prize(&self) -> f64 {
        self.prize + self.joy_of_winning
    }

    pub fn players(&self) -> usize {
        self.sequence.players()
    }
}

/// Investments ordered by player index; player `i` weakly precedes `j` for `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvestmentProfile {
    pub investments: Vec<f64>,
}

impl InvestmentProfile {
    pub fn new(investments: Vec<f64>) -> Self {
        Self { investments }
    }

    pub fn total(&self) -> f64 {
        self.investments.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.investments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.investments.is_empty()
    }
}

impl From<Vec<f64>> for InvestmentProfile {
    fn from(investments: Vec<f64>) -> Self {
        Self { investments }
    }
}

/// Lottery contest success function: `p_i = x_i / Σ x_j`, or `1/n` for every
/// player when nobody invests.
pub fn win_probabilities(profile: &InvestmentProfile) -> Result<Vec<f64>, ContestError> {
    let xs = &profile.investments;
    if let Some((player, &value)) = xs.iter().enumerate().find(|(_, &x)| x < 0.0 || x.is_nan()) {
        return Err(ContestError::NegativeInvestment { player, value });
    }
    let n = xs.len();
    let total: f64 = xs.iter().sum();
    if total > 0.0 {
        Ok(xs.iter().map(|x| x / total).collect())
    } else {
        Ok(vec![1.0 / n as f64; n])
    }
}

/// Player `i` wins iff `draw` lies in `[Σ_{j<i} p_j, Σ_{j≤i} p_j)`.
pub fn draw_winner(profile: &InvestmentProfile, draw: f64) -> Result<usize, ContestError> {
    if !(0.0..1.0).contains(&draw) {
        return Err(ContestError::DrawOutOfRange(draw));
    }
    let probs = win_probabilities(profile)?;
    let last = probs.len().saturating_sub(1);
    let mut upper = 0.0;
    for (i, p) in probs.iter().enumerate() {
        upper += p;
        if draw < upper {
            return Ok(i);
        }
    }
    // Cumulative rounding can leave the top edge a hair below 1; skip
    // trailing zero-probability players.
    Ok(probs
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(last))
}

/// Monetary payoffs: the winner receives `endowment + V − x_i`, everyone else
/// `endowment − x_i`.
pub fn round_payoffs(
    spec: &ContestSpec,
    profile: &InvestmentProfile,
    winner: usize,
) -> Result<Vec<f64>, ContestError> {
    let n = profile.len();
    if winner >= n {
        return Err(ContestError::WinnerOutOfRange { winner, players: n });
    }
    profile
        .investments
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if x < 0.0 {
                return Err(ContestError::NegativeInvestment {
                    player: i,
                    value: x,
                });
            }
            if x > spec.endowment {
                return Err(ContestError::InvestmentExceedsEndowment {
                    player: i,
                    value: x,
                    endowment: spec.endowment,
                });
            }
            let prize = if i == winner { spec.prize } else { 0.0 };
            Ok(spec.endowment + prize - x)
        })
        .collect()
}
