//! Subgame-perfect equilibria of sequential lottery contests.
//!
//! The aggregate equilibrium investment of a contest with unit prize is the
//! largest root in `[0, 1]` of `f_0`, where the inverse-best-response ladder is
//!
//! ```text
//! f_T(X)     = X
//! f_{t-1}(X) = f_t(X) − n_t · f_t'(X) · X · (1 − X)
//! ```
//!
//! and a stage-`t` player invests `(f_t(X) − f_{t-1}(X)) / n_t`. Every rung has
//! integer coefficients, so the ladder is built exactly and only converted to
//! `f64` for root finding. Results scale linearly with the effective prize
//! `V + w`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contest::{ContestError, ContestSpec, MoveSequence};

/// Grid resolution used to bracket sign changes of `f_0` on `[0, 1]`.
pub const ROOT_GRID_POINTS: usize = 10_000;
/// Bisection stops once the bracket is narrower than this.
pub const ROOT_TOLERANCE: f64 = 1e-13;
/// Largest per-player grid accepted by [`oracle_grid_spne`].
pub const MAX_ORACLE_GRID: usize = 481;
/// Largest contest accepted by [`oracle_grid_spne`].
pub const MAX_ORACLE_PLAYERS: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriumError {
    #[error("polynomial has no root in [0, 1]")]
    NoRootInUnitInterval,
    #[error("grid too large: {points} points per player, {players} players (limits {max_points}, {max_players})")]
    GridTooLarge {
        points: usize,
        players: usize,
        max_points: usize,
        max_players: usize,
    },
    #[error("grid step must be positive and finite, got {0}")]
    InvalidGridStep(f64),
    #[error("observed mean must be positive, got {0}")]
    NonPositiveMean(f64),
    #[error("joy of winning calibration needs at least two players, got {0}")]
    TooFewPlayers(usize),
    #[error(transparent)]
    Contest(#[from] ContestError),
}

/// Polynomial with exact integer coefficients, stored in ascending powers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    coefficients: Vec<BigInt>,
}

impl Polynomial {
    pub fn new(coefficients: Vec<BigInt>) -> Self {
        let mut p = Self { coefficients };
        p.trim();
        p
    }

    pub fn from_i64(coefficients: &[i64]) -> Self {
        Self::new(coefficients.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// The identity `X`.
    pub fn identity() -> Self {
        Self::from_i64(&[0, 1])
    }

    fn trim(&mut self) {
        while self.coefficients.last().is_some_and(|c| c.is_zero()) {
            self.coefficients.pop();
        }
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coefficients
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coefficients
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigInt::from(k))
                .collect(),
        )
    }

    /// Coefficients rounded to `f64`.
    pub fn to_f64_coefficients(&self) -> Vec<f64> {
        self.coefficients
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    /// Horner evaluation in `f64`.
    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.to_f64_coefficients(), x)
    }

    /// `self − n · self' · X · (1 − X)`: one rung down the ladder.
    fn step_down(&self, n: usize) -> Self {
        let d = self.derivative();
        let n = BigInt::from(n);
        let len = self.coefficients.len().max(d.coefficients.len() + 2);
        let mut out = vec![BigInt::zero(); len];
        for (k, c) in self.coefficients.iter().enumerate() {
            out[k] += c;
        }
        // f'(X)·(X − X²) = Σ d_k X^{k+1} − Σ d_k X^{k+2}
        for (k, c) in d.coefficients.iter().enumerate() {
            let scaled = c * &n;
            out[k + 1] -= &scaled;
            out[k + 2] += scaled;
        }
        Self::new(out)
    }
}

fn horner(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// The polynomials `f_0, ..., f_T` for a move sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursionLadder {
    pub sequence: MoveSequence,
    /// `polys[t]` is `f_t`.
    pub polys: Vec<Polynomial>,
}

impl RecursionLadder {
    pub fn f(&self, t: usize) -> &Polynomial {
        &self.polys[t]
    }

    pub fn f0(&self) -> &Polynomial {
        &self.polys[0]
    }
}

pub fn build_ladder(sequence: &MoveSequence) -> RecursionLadder {
    let stages = sequence.stages();
    let mut polys = vec![Polynomial::identity()];
    for &n_t in stages.iter().rev() {
        let next = polys.last().unwrap().step_down(n_t);
        polys.push(next);
    }
    polys.reverse();
    RecursionLadder {
        sequence: sequence.clone(),
        polys,
    }
}

/// Largest root of `f0` in `[0, 1]`, bracketed on a uniform grid and refined by
/// bisection. `X = 0` is returned only when no strictly positive root exists.
pub fn largest_root(f0: &Polynomial) -> Result<f64, EquilibriumError> {
    let coefficients = f0.to_f64_coefficients();
    let f = |x: f64| horner(&coefficients, x);
    let grid = |i: usize| i as f64 / ROOT_GRID_POINTS as f64;

    let mut hi = grid(ROOT_GRID_POINTS);
    let mut f_hi = f(hi);
    if f_hi == 0.0 {
        return Ok(hi);
    }
    for i in (0..ROOT_GRID_POINTS).rev() {
        let lo = grid(i);
        let f_lo = f(lo);
        if f_lo == 0.0 {
            if i > 0 {
                return Ok(lo);
            }
            break;
        }
        if f_lo.signum() != f_hi.signum() {
            return Ok(bisect(&f, lo, hi, f_lo));
        }
        hi = lo;
        f_hi = f_lo;
    }
    if f(0.0) == 0.0 {
        Ok(0.0)
    } else {
        Err(EquilibriumError::NoRootInUnitInterval)
    }
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let sign_lo = f_lo.signum();
    while hi - lo >= ROOT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Equilibrium path of a sequential contest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub sequence: MoveSequence,
    pub prize: f64,
    pub joy_of_winning: f64,
    /// Normalized aggregate `X` (unit prize).
    pub aggregate: f64,
    /// Individual investment per stage (unit prize).
    pub stage_investments: Vec<f64>,
    /// `aggregate · (V + w)`.
    pub scaled_aggregate: f64,
    /// `stage_investments · (V + w)`.
    pub scaled_stage_investments: Vec<f64>,
}

impl EquilibriumSolution {
    fn from_unit(
        spec: &ContestSpec,
        aggregate: f64,
        stage_investments: Vec<f64>,
    ) -> EquilibriumSolution {
        let scale = spec.effective_prize();
        EquilibriumSolution {
            sequence: spec.sequence.clone(),
            prize: spec.prize,
            joy_of_winning: spec.joy_of_winning,
            aggregate,
            scaled_aggregate: aggregate * scale,
            scaled_stage_investments: stage_investments.iter().map(|x| x * scale).collect(),
            stage_investments,
        }
    }

    pub fn effective_prize(&self) -> f64 {
        self.prize + self.joy_of_winning
    }

    /// Scaled investment of each player, in player order.
    pub fn player_investments(&self) -> Vec<f64> {
        self.sequence
            .stages()
            .iter()
            .zip(&self.scaled_stage_investments)
            .flat_map(|(&n_t, &x)| std::iter::repeat_n(x, n_t))
            .collect()
    }

    /// Scaled investment at `stage` (1-based).
    pub fn stage_investment(&self, stage: usize) -> f64 {
        self.scaled_stage_investments[stage - 1]
    }
}

/// Per-stage investments read off a ladder at aggregate `x`.
pub fn stage_investments_at(ladder: &RecursionLadder, x: f64) -> Vec<f64> {
    ladder
        .sequence
        .stages()
        .iter()
        .enumerate()
        .map(|(i, &n_t)| {
            let t = i + 1;
            let diff = ladder.f(t).eval(x) - ladder.f(t - 1).eval(x);
            (diff / n_t as f64).max(0.0)
        })
        .collect()
}

pub fn solve_spne(spec: &ContestSpec) -> Result<EquilibriumSolution, EquilibriumError> {
    spec.validate()?;
    let ladder = build_ladder(&spec.sequence);
    let aggregate = largest_root(ladder.f0())?;
    let stages = stage_investments_at(&ladder, aggregate);
    Ok(EquilibriumSolution::from_unit(spec, aggregate, stages))
}

/// Joy of winning implied by an observed mean individual investment in the
/// simultaneous `n`-player contest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JowCalibration {
    pub joy_of_winning: f64,
    /// Set when the observed mean lies below the risk-neutral prediction and
    /// the estimate was floored at zero.
    pub clamped: bool,
}

/// Inverts `x* = (n − 1)(V + w) / n²`.
pub fn calibrate_jow(
    observed_mean: f64,
    players: usize,
    prize: f64,
) -> Result<JowCalibration, EquilibriumError> {
    if !(observed_mean > 0.0 && observed_mean.is_finite()) {
        return Err(EquilibriumError::NonPositiveMean(observed_mean));
    }
    if players < 2 {
        return Err(EquilibriumError::TooFewPlayers(players));
    }
    let n = players as f64;
    let w = n * n * observed_mean / (n - 1.0) - prize;
    if w < 0.0 {
        log::warn!(
            "observed mean {observed_mean} is below the equilibrium level; joy of winning floored at 0"
        );
        Ok(JowCalibration {
            joy_of_winning: 0.0,
            clamped: true,
        })
    } else {
        Ok(JowCalibration {
            joy_of_winning: w,
            clamped: false,
        })
    }
}

/// Backward induction on a discretized strategy space `{0, step, 2·step, ...,
/// endowment}`.
///
/// Later movers condition on the sum of earlier investments. Within a stage the
/// movers play a pure grid Nash equilibrium; when several exist the one with
/// the smallest stage total is used, then the lexicographically smallest.
/// Best-response ties go to the smaller investment. Stage investments in the
/// result are within-stage means (grid equilibria need not be symmetric).
///
/// An independent check on [`solve_spne`] for contests with at most three
/// players.
pub fn oracle_grid_spne(
    spec: &ContestSpec,
    grid_step: f64,
) -> Result<EquilibriumSolution, EquilibriumError> {
    spec.validate()?;
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(EquilibriumError::InvalidGridStep(grid_step));
    }
    let points = (spec.endowment / grid_step + 1e-9).floor() as usize + 1;
    let players = spec.players();
    if points > MAX_ORACLE_GRID || players > MAX_ORACLE_PLAYERS {
        return Err(EquilibriumError::GridTooLarge {
            points,
            players,
            max_points: MAX_ORACLE_GRID,
            max_players: MAX_ORACLE_PLAYERS,
        });
    }
    let mut solver = GridSolver {
        stages: spec.sequence.stages().to_vec(),
        players,
        points,
        step: grid_step,
        prize: spec.effective_prize(),
        memo: HashMap::new(),
    };
    let path = solver.outcome(0, 0);
    let scale = spec.effective_prize();
    let mut offset = 0;
    let mut stage_investments = Vec::with_capacity(spec.sequence.len());
    for &n_t in spec.sequence.stages() {
        let sum: usize = path[offset..offset + n_t].iter().sum();
        stage_investments.push(sum as f64 * grid_step / n_t as f64 / scale);
        offset += n_t;
    }
    let aggregate = path.iter().sum::<usize>() as f64 * grid_step / scale;
    Ok(EquilibriumSolution::from_unit(
        spec,
        aggregate,
        stage_investments,
    ))
}

struct GridSolver {
    stages: Vec<usize>,
    players: usize,
    points: usize,
    step: f64,
    prize: f64,
    /// (stage, grid index of prior investment sum) → grid indices of every
    /// remaining player's investment, in player order.
    memo: HashMap<(usize, usize), Vec<usize>>,
}

/// Payoffs of one mover against every possible sum of its stage-mates.
struct ResponseTable {
    /// `values[o][d]`: payoff of investing `d` when stage-mates invest `o`.
    values: Vec<Vec<f64>>,
    best: Vec<f64>,
}

impl ResponseTable {
    fn is_best(&self, others: usize, own: usize) -> bool {
        self.values[others][own] >= self.best[others] - tie_tolerance(self.best[others])
    }

    fn smallest_best(&self, others: usize) -> usize {
        (0..self.values[others].len())
            .find(|&d| self.is_best(others, d))
            .expect("nonempty grid")
    }
}

impl GridSolver {
    fn outcome(&mut self, stage: usize, prior: usize) -> Vec<usize> {
        if stage == self.stages.len() {
            return Vec::new();
        }
        if let Some(path) = self.memo.get(&(stage, prior)) {
            return path.clone();
        }
        let movers = self.stages[stage];
        let table = self.response_table(stage, prior, movers - 1);
        let chosen = match movers {
            1 => vec![table.smallest_best(0)],
            2 => self.pair_equilibrium(&table),
            _ => self.triple_equilibrium(&table),
        };
        let stage_total: usize = chosen.iter().sum();
        let mut path = chosen;
        path.extend(self.outcome(stage + 1, prior + stage_total));
        self.memo.insert((stage, prior), path.clone());
        path
    }

    fn response_table(&mut self, stage: usize, prior: usize, others: usize) -> ResponseTable {
        let max_others = others * (self.points - 1);
        let values: Vec<Vec<f64>> = (0..=max_others)
            .map(|o| {
                (0..self.points)
                    .map(|d| self.payoff(stage, prior + o, d))
                    .collect()
            })
            .collect();
        let best = values
            .iter()
            .map(|row| row.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
            .collect();
        ResponseTable { values, best }
    }

    fn pair_equilibrium(&self, table: &ResponseTable) -> Vec<usize> {
        let mut found: Option<Vec<usize>> = None;
        for a in 0..self.points {
            for b in a..self.points {
                if table.is_best(b, a) && table.is_best(a, b) {
                    keep_better(&mut found, vec![a, b]);
                }
            }
        }
        found.unwrap_or_else(|| self.no_pure_equilibrium(table, 2))
    }

    fn triple_equilibrium(&self, table: &ResponseTable) -> Vec<usize> {
        let mut found: Option<Vec<usize>> = None;
        for a in 0..self.points {
            for b in a..self.points {
                for c in b..self.points {
                    if table.is_best(b + c, a) && table.is_best(a + c, b) && table.is_best(a + b, c) {
                        keep_better(&mut found, vec![a, b, c]);
                    }
                }
            }
        }
        found.unwrap_or_else(|| self.no_pure_equilibrium(table, 3))
    }

    /// Symmetric profile with the smallest unilateral gain from deviating.
    fn no_pure_equilibrium(&self, table: &ResponseTable, movers: usize) -> Vec<usize> {
        log::debug!("no pure grid equilibrium among {movers} simultaneous movers; using min-regret profile");
        let x = (0..self.points)
            .min_by(|&x, &y| {
                let gain = |z: usize| table.best[(movers - 1) * z] - table.values[(movers - 1) * z][z];
                gain(x).total_cmp(&gain(y))
            })
            .unwrap();
        vec![x; movers]
    }

    /// Expected payoff of investing grid index `own` when every other
    /// investment at this and earlier stages sums to `base`.
    fn payoff(&mut self, stage: usize, base: usize, own: usize) -> f64 {
        let before_later = base + own;
        let later: usize = self.outcome(stage + 1, before_later).iter().sum();
        let total = before_later + later;
        let p = if total == 0 {
            1.0 / self.players as f64
        } else {
            own as f64 / total as f64
        };
        self.prize * p - own as f64 * self.step
    }
}

fn keep_better(found: &mut Option<Vec<usize>>, candidate: Vec<usize>) {
    let key = |v: &Vec<usize>| (v.iter().sum::<usize>(), v.clone());
    if found.as_ref().is_none_or(|f| key(&candidate) < key(f)) {
        *found = Some(candidate);
    }
}

fn tie_tolerance(value: f64) -> f64 {
    1e-9 * value.abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contest::ContestSpec;
    use proptest::prelude::*;

    fn seq(stages: &[i64]) -> MoveSequence {
        MoveSequence::new(stages).unwrap()
    }

    fn lab(stages: &[i64]) -> ContestSpec {
        ContestSpec::lab(seq(stages))
    }

    #[test]
    fn ladder_examples() {
        let ladder = build_ladder(&seq(&[3]));
        assert_eq!(ladder.f0(), &Polynomial::from_i64(&[0, -2, 3]));
        assert_eq!(ladder.f(1), &Polynomial::identity());

        let ladder = build_ladder(&seq(&[1, 1, 1]));
        assert_eq!(ladder.f0(), &Polynomial::from_i64(&[0, 0, 1, -6, 6]));

        let ladder = build_ladder(&seq(&[1]));
        assert_eq!(ladder.f0(), &Polynomial::from_i64(&[0, 0, 1]));

        // (1,2) and (2,1) share f_0 = X²(4X − 3).
        let a = build_ladder(&seq(&[1, 2]));
        let b = build_ladder(&seq(&[2, 1]));
        assert_eq!(a.f0(), &Polynomial::from_i64(&[0, 0, -3, 4]));
        assert_eq!(a.f0(), b.f0());
    }

    #[test]
    fn ladder_degrees_grow_by_one() {
        for n in 1..=6 {
            for s in MoveSequence::all_with_players(n) {
                let ladder = build_ladder(&s);
                assert_eq!(ladder.polys.len(), s.len() + 1);
                for t in 1..ladder.polys.len() {
                    assert_eq!(ladder.f(t - 1).degree(), ladder.f(t).degree() + 1);
                }
                assert_eq!(ladder.f0().degree(), s.len() + 1);
            }
        }
    }

    #[test]
    fn roots() {
        let r = largest_root(build_ladder(&seq(&[3])).f0()).unwrap();
        assert!((r - 2.0 / 3.0).abs() < 1e-12);
        let r = largest_root(build_ladder(&seq(&[1, 1, 1])).f0()).unwrap();
        assert!((r - (3.0 + 3f64.sqrt()) / 6.0).abs() < 1e-12);
        assert_eq!(largest_root(&Polynomial::from_i64(&[0, 0, 1])).unwrap(), 0.0);
        assert_eq!(
            largest_root(&Polynomial::from_i64(&[1, 0, 1])),
            Err(EquilibriumError::NoRootInUnitInterval)
        );
    }

    #[test]
    fn table_one_values() {
        let s = solve_spne(&lab(&[3])).unwrap();
        assert!((s.scaled_aggregate - 160.0).abs() < 1e-9);
        assert!((s.stage_investment(1) - 160.0 / 3.0).abs() < 1e-9);

        let s = solve_spne(&lab(&[1, 2])).unwrap();
        assert!((s.scaled_aggregate - 180.0).abs() < 1e-9);
        assert!((s.stage_investment(1) - 90.0).abs() < 1e-9);
        assert!((s.stage_investment(2) - 45.0).abs() < 1e-9);

        let s = solve_spne(&lab(&[2, 1])).unwrap();
        assert_eq!(s.player_investments().len(), 3);
        assert!((s.stage_investment(1) - 67.5).abs() < 1e-9);
        assert!((s.stage_investment(2) - 45.0).abs() < 1e-9);

        let s = solve_spne(&lab(&[1, 1, 1])).unwrap();
        assert!((s.scaled_aggregate - 189.282).abs() < 1e-3);
        assert!((s.stage_investment(1) - 86.188_02).abs() < 1e-4);
    }

    #[test]
    fn joy_of_winning_scales_the_prize() {
        let s = solve_spne(&lab(&[1, 2]).with_joy_of_winning(119.73)).unwrap();
        assert!((s.stage_investment(1) - 134.898_75).abs() < 1e-9);
        assert!((s.stage_investment(2) - 67.449_375).abs() < 1e-9);
        assert!((s.scaled_aggregate - 269.7975).abs() < 1e-9);
    }

    #[test]
    fn single_player_invests_nothing() {
        let s = solve_spne(&lab(&[1])).unwrap();
        assert_eq!(s.aggregate, 0.0);
        assert_eq!(s.scaled_stage_investments, vec![0.0]);
    }

    #[test]
    fn calibration() {
        let c = calibrate_jow(79.94, 3, 240.0).unwrap();
        assert!((c.joy_of_winning - 119.73).abs() < 1e-9);
        assert!(!c.clamped);
        let c = calibrate_jow(2.0 * 240.0 / 9.0, 3, 240.0).unwrap();
        assert!(c.joy_of_winning.abs() < 1e-9);
        let c = calibrate_jow(90.0, 3, 240.0).unwrap();
        assert!((c.joy_of_winning - 165.0).abs() < 1e-9);
        let c = calibrate_jow(40.0, 3, 240.0).unwrap();
        assert_eq!(c, JowCalibration { joy_of_winning: 0.0, clamped: true });
        assert_eq!(
            calibrate_jow(0.0, 3, 240.0),
            Err(EquilibriumError::NonPositiveMean(0.0))
        );
        assert_eq!(
            calibrate_jow(10.0, 1, 240.0),
            Err(EquilibriumError::TooFewPlayers(1))
        );
    }

    #[test]
    fn oracle_examples() {
        let s = oracle_grid_spne(&lab(&[1, 2]), 1.0).unwrap();
        assert!((s.stage_investment(1) - 90.0).abs() <= 1.0, "{s:?}");
        assert!((s.stage_investment(2) - 45.0).abs() <= 1.0, "{s:?}");

        let s = oracle_grid_spne(&lab(&[3]), 1.0).unwrap();
        let x = s.stage_investment(1);
        assert!(x == 53.0 || x == 54.0, "{x}");

        let s = oracle_grid_spne(&lab(&[1, 1]), 1.0).unwrap();
        assert!((s.stage_investment(1) - 60.0).abs() <= 1.0, "{s:?}");
        assert!((s.stage_investment(2) - 60.0).abs() <= 1.0, "{s:?}");
    }

    #[test]
    fn oracle_limits() {
        assert!(matches!(
            oracle_grid_spne(&lab(&[4]), 1.0),
            Err(EquilibriumError::GridTooLarge { players: 4, .. })
        ));
        assert!(matches!(
            oracle_grid_spne(&lab(&[1, 2]), 0.25),
            Err(EquilibriumError::GridTooLarge { points: 961, .. })
        ));
        assert!(oracle_grid_spne(&lab(&[1, 2]), 0.5).is_ok());
        assert!(oracle_grid_spne(&lab(&[1, 2]), 0.0).is_err());
    }

    #[test]
    fn two_player_neutrality() {
        let a = solve_spne(&lab(&[1, 1])).unwrap();
        let b = solve_spne(&lab(&[2])).unwrap();
        assert!((a.aggregate - b.aggregate).abs() < 1e-12);
        assert!((a.scaled_aggregate - 120.0).abs() < 1e-9);
    }

    fn any_sequence() -> impl Strategy<Value = MoveSequence> {
        prop::collection::vec(1i64..=3, 1..=4).prop_map(|v| MoveSequence::new(&v).unwrap())
    }

    proptest! {
        #[test]
        fn stage_investments_telescope(s in any_sequence()) {
            let sol = solve_spne(&ContestSpec::lab(s.clone())).unwrap();
            let total: f64 = sol
                .stage_investments
                .iter()
                .zip(s.stages())
                .map(|(x, &n)| x * n as f64)
                .sum();
            prop_assert!((total - sol.aggregate).abs() < 1e-10);
            prop_assert!(sol.stage_investments.iter().all(|&x| x >= 0.0));
            if s.players() >= 2 {
                prop_assert!(sol.aggregate > 0.0 && sol.aggregate < 1.0);
            }
        }

        #[test]
        fn ladder_root_is_a_root(s in any_sequence()) {
            let ladder = build_ladder(&s);
            let x = largest_root(ladder.f0()).unwrap();
            let d = ladder.f0().derivative().eval(x).abs().max(1.0);
            prop_assert!(ladder.f0().eval(x).abs() <= 1e-9 * d);
        }
    }
}
