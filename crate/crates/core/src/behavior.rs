//! Behavioral agents: empirical linear-quadratic responses for later movers and
//! optimal preemption by first movers who anticipate those responses.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contest::{ContestSpec, MoveSequence};
use crate::equilibrium::{solve_spne, EquilibriumError};

/// Bundled response-function presets, keyed by treatment.
pub const BUNDLED_PRESETS: &str = include_str!("../presets/response_models.toml");

/// Scan resolution for the preemption solvers before local refinement.
const SCAN_STEP: f64 = 0.1;
const GOLDEN_TOLERANCE: f64 = 1e-7;
const BISECTION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BehaviorError {
    #[error("{name} = {value} outside [0, {endowment}]")]
    InputOutOfRange {
        name: &'static str,
        value: f64,
        endowment: f64,
    },
    #[error("model has second-mover terms but no m2 was supplied")]
    MissingSecondObservation,
    #[error("preemption is defined for (1,2), (2,1) and (1,1,1), not {0}")]
    UnsupportedTreatment(String),
    #[error("response set lacks the {0} model")]
    MissingModel(&'static str),
    #[error("first-order condition has no root in [0, {0}]")]
    NoInteriorSolution(f64),
    #[error("stage {stage} expects {expected} observed investments, got {got}")]
    RoleObservationMismatch {
        stage: usize,
        expected: usize,
        got: usize,
    },
    #[error("stage {stage} out of range for {sequence}")]
    StageOutOfRange { stage: usize, sequence: String },
    #[error("invalid response presets: {0}")]
    Presets(String),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
}

/// `r = β₀ + β₁m₁ + γ₁m₁² [+ β₂m₂ + γ₂m₂²] + u`, with `u ~ N(0, noise_sd²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseModel {
    pub beta0: f64,
    #[serde(default)]
    pub beta1: f64,
    #[serde(default)]
    pub gamma1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma2: Option<f64>,
    #[serde(default)]
    pub noise_sd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observed {
    M1,
    M2,
}

impl ResponseModel {
    pub fn second_mover(beta0: f64, beta1: f64, gamma1: f64) -> Self {
        Self {
            beta0,
            beta1,
            gamma1,
            beta2: None,
            gamma2: None,
            noise_sd: 0.0,
        }
    }

    pub fn third_mover(beta0: f64, beta1: f64, gamma1: f64, beta2: f64, gamma2: f64) -> Self {
        Self {
            beta2: Some(beta2),
            gamma2: Some(gamma2),
            ..Self::second_mover(beta0, beta1, gamma1)
        }
    }

    pub fn with_noise(mut self, noise_sd: f64) -> Self {
        self.noise_sd = noise_sd;
        self
    }

    pub fn uses_m2(&self) -> bool {
        self.beta2.is_some() || self.gamma2.is_some()
    }

    /// Noise-free polynomial value, unclamped.
    pub fn mean_response(&self, m1: f64, m2: Option<f64>) -> f64 {
        let mut r = self.beta0 + self.beta1 * m1 + self.gamma1 * m1 * m1;
        if let Some(m2) = m2 {
            r += self.beta2.unwrap_or(0.0) * m2 + self.gamma2.unwrap_or(0.0) * m2 * m2;
        }
        r
    }

    /// Derivative of the mean response with respect to `m1`.
    pub fn slope_m1(&self, m1: f64) -> f64 {
        self.beta1 + 2.0 * self.gamma1 * m1
    }

    fn coefficients(&self, which: Observed) -> (f64, f64) {
        match which {
            Observed::M1 => (self.beta1, self.gamma1),
            Observed::M2 => (self.beta2.unwrap_or(0.0), self.gamma2.unwrap_or(0.0)),
        }
    }
}

/// Evaluates a response, adds `noise_sd · standard_normal` and clamps to
/// `[0, endowment]`.
pub fn eval_response(
    model: &ResponseModel,
    m1: f64,
    m2: Option<f64>,
    standard_normal: f64,
    endowment: f64,
) -> Result<f64, BehaviorError> {
    check_range("m1", m1, endowment)?;
    if let Some(m2) = m2 {
        check_range("m2", m2, endowment)?;
    } else if model.uses_m2() {
        return Err(BehaviorError::MissingSecondObservation);
    }
    let r = model.mean_response(m1, m2) + model.noise_sd * standard_normal;
    Ok(r.clamp(0.0, endowment))
}

fn check_range(name: &'static str, value: f64, endowment: f64) -> Result<(), BehaviorError> {
    if (0.0..=endowment).contains(&value) {
        Ok(())
    } else {
        Err(BehaviorError::InputOutOfRange {
            name,
            value,
            endowment,
        })
    }
}

/// Vertex `−β/(2γ)` of a concave response, if it lies strictly inside
/// `(0, endowment)`.
pub fn turning_point(model: &ResponseModel, which: Observed, endowment: f64) -> Option<f64> {
    let (beta, gamma) = model.coefficients(which);
    if gamma >= 0.0 {
        return None;
    }
    let vertex = -beta / (2.0 * gamma);
    (vertex > 0.0 && vertex < endowment).then_some(vertex)
}

/// Later movers' responses for one treatment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseSet {
    /// Second-stage response to the (average) first-stage investment.
    pub r2: ResponseModel,
    /// Third-stage response, for three-stage treatments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r3: Option<ResponseModel>,
}

impl ResponseSet {
    /// Model used by a responder at `stage` (1-based).
    pub fn for_stage(&self, stage: usize) -> Option<&ResponseModel> {
        match stage {
            2 => Some(&self.r2),
            3 => self.r3.as_ref(),
            _ => None,
        }
    }
}

/// Named response sets loaded from a TOML document with one table per
/// treatment:
///
/// ```toml
/// ["1,2".r2]
/// beta0 = 62.72
/// beta1 = 0.091
/// gamma1 = 0.000096
/// ```
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResponsePresets {
    sets: BTreeMap<String, ResponseSet>,
}

impl ResponsePresets {
    pub fn bundled() -> Self {
        Self::from_toml_str(BUNDLED_PRESETS).expect("bundled presets parse")
    }

    pub fn from_toml_str(s: &str) -> Result<Self, BehaviorError> {
        let raw: BTreeMap<String, ResponseSet> =
            toml::from_str(s).map_err(|e| BehaviorError::Presets(e.to_string()))?;
        let mut sets = BTreeMap::new();
        for (key, set) in raw {
            let seq: MoveSequence = key
                .parse()
                .map_err(|_| BehaviorError::Presets(format!("bad treatment key {key:?}")))?;
            sets.insert(seq.to_string(), set);
        }
        Ok(Self { sets })
    }

    pub fn for_treatment(&self, treatment: &MoveSequence) -> Option<&ResponseSet> {
        self.sets.get(&treatment.to_string())
    }

    pub fn insert(&mut self, treatment: &MoveSequence, set: ResponseSet) {
        self.sets.insert(treatment.to_string(), set);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Preemption {
    pub investment: f64,
    /// Set when the optimum sits on `0` or the endowment rather than at an
    /// interior critical point.
    pub at_boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Treatment {
    LeaderTwoFollowers,
    TwoLeadersFollower,
    ThreeStages,
}

fn classify(sequence: &MoveSequence) -> Result<Treatment, BehaviorError> {
    match sequence.stages() {
        [1, 2] => Ok(Treatment::LeaderTwoFollowers),
        [2, 1] => Ok(Treatment::TwoLeadersFollower),
        [1, 1, 1] => Ok(Treatment::ThreeStages),
        _ => Err(BehaviorError::UnsupportedTreatment(sequence.to_string())),
    }
}

/// Expected payoff (effective prize) of a lone first mover investing `x`
/// against noise-free responses, for (1,2) and (1,1,1).
pub fn leader_objective(
    spec: &ContestSpec,
    models: &ResponseSet,
    x: f64,
) -> Result<f64, BehaviorError> {
    let prize = spec.effective_prize();
    let cap = spec.endowment;
    let respond = |m: &ResponseModel, m1: f64, m2: Option<f64>| m.mean_response(m1, m2).clamp(0.0, cap);
    let others = match classify(&spec.sequence)? {
        Treatment::LeaderTwoFollowers => 2.0 * respond(&models.r2, x, None),
        Treatment::ThreeStages => {
            let r3 = models.r3.as_ref().ok_or(BehaviorError::MissingModel("r3"))?;
            let second = respond(&models.r2, x, None);
            second + respond(r3, x, Some(second))
        }
        Treatment::TwoLeadersFollower => {
            return Err(BehaviorError::UnsupportedTreatment(spec.sequence.to_string()))
        }
    };
    let total = x + others;
    let p = if total > 0.0 {
        x / total
    } else {
        1.0 / spec.players() as f64
    };
    Ok(prize * p - x)
}

/// Residual of the symmetric first-order condition for the two first movers
/// in (2,1): `(V+w)(x + R(x) − (x/2)R'(x)) − (2x + R(x))²`.
pub fn two_leader_foc(spec: &ContestSpec, model: &ResponseModel, x: f64) -> f64 {
    let r = model.mean_response(x, None);
    let slope = model.slope_m1(x);
    spec.effective_prize() * (x + r - 0.5 * x * slope) - (2.0 * x + r).powi(2)
}

/// Optimal first-mover investment on `[0, endowment]` given noise-free
/// later-mover responses. (1,2) and (1,1,1) maximize the expected payoff;
/// (2,1) solves the symmetric first-order condition of the two leaders, whose
/// follower reacts to their average investment.
pub fn optimal_first_mover(
    spec: &ContestSpec,
    models: &ResponseSet,
) -> Result<Preemption, BehaviorError> {
    spec.validate().map_err(EquilibriumError::from)?;
    let cap = spec.endowment;
    match classify(&spec.sequence)? {
        Treatment::TwoLeadersFollower => {
            let g = |x: f64| two_leader_foc(spec, &models.r2, x);
            let steps = (cap / SCAN_STEP).ceil() as usize;
            let mut lo = 0.0;
            let mut g_lo = g(lo);
            if g_lo == 0.0 {
                return Ok(Preemption {
                    investment: 0.0,
                    at_boundary: true,
                });
            }
            for i in 1..=steps {
                let hi = (i as f64 * SCAN_STEP).min(cap);
                let g_hi = g(hi);
                if g_hi == 0.0 || g_hi.signum() != g_lo.signum() {
                    let x = if g_hi == 0.0 { hi } else { bisect(&g, lo, hi) };
                    return Ok(Preemption {
                        investment: x,
                        at_boundary: x <= 0.0 || x >= cap,
                    });
                }
                lo = hi;
                g_lo = g_hi;
            }
            Err(BehaviorError::NoInteriorSolution(cap))
        }
        _ => {
            // Validate the model set once so the closure below cannot fail.
            leader_objective(spec, models, 0.0)?;
            let f = |x: f64| leader_objective(spec, models, x).expect("validated");
            let x = maximize_on_interval(&f, 0.0, cap);
            Ok(Preemption {
                investment: x,
                at_boundary: x <= GOLDEN_TOLERANCE || x >= cap - GOLDEN_TOLERANCE,
            })
        }
    }
}

/// First-mover optimum of the effective-prize problem, expressed in
/// monetary-prize units: prize and responses shrink by `V / (V + w)`, and by
/// homogeneity of the lottery objective so does the optimum.
pub fn rescaled_first_mover(
    spec: &ContestSpec,
    models: &ResponseSet,
) -> Result<Preemption, BehaviorError> {
    let p = optimal_first_mover(spec, models)?;
    Ok(Preemption {
        investment: p.investment * spec.prize / spec.effective_prize(),
        ..p
    })
}

/// Coarse scan followed by golden-section refinement around the best point.
fn maximize_on_interval(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let steps = ((hi - lo) / SCAN_STEP).ceil().max(1.0) as usize;
    let point = |i: usize| (lo + i as f64 * SCAN_STEP).min(hi);
    let best = (0..=steps)
        .max_by(|&a, &b| f(point(a)).total_cmp(&f(point(b))).then(b.cmp(&a)))
        .unwrap();
    let a = point(best.saturating_sub(1));
    let b = point((best + 1).min(steps));
    let x = golden_section_max(f, a, b);
    // Golden section never evaluates the bracket ends; keep them if better.
    [a, x, b]
        .into_iter()
        .max_by(|&u, &v| f(u).total_cmp(&f(v)))
        .unwrap()
}

fn golden_section_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > GOLDEN_TOLERANCE {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn bisect(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let sign_lo = g(lo).signum();
    while hi - lo > BISECTION_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return mid;
        }
        if g_mid.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// How an agent chooses its investment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BehaviorPolicy {
    /// Risk-neutral equilibrium investment for the agent's stage, prize `V`.
    Spne,
    /// Equilibrium investment with effective prize `V + w`.
    JowSpne { joy_of_winning: f64 },
    EmpiricalResponder { model: ResponseModel },
    /// Matches the mean observed investment; `fallback` when nothing is observed.
    Imitator { fallback: f64 },
    OptimizingLeader {
        models: ResponseSet,
        joy_of_winning: f64,
    },
    Fixed { investment: f64 },
}

/// First- and second-stage means seen by a stage-`stage` mover, the `m1`/`m2`
/// convention of the response models (with two first movers, `m1` is their
/// average).
pub fn observed_means(
    sequence: &MoveSequence,
    stage: usize,
    observed: &[f64],
) -> (Option<f64>, Option<f64>) {
    let mean_of = |s: usize| {
        let start = sequence.first_player_of_stage(s);
        let n = sequence.stage_size(s);
        observed
            .get(start..start + n)
            .map(|xs| xs.iter().sum::<f64>() / n as f64)
    };
    let m1 = if stage >= 2 { mean_of(1) } else { None };
    let m2 = if stage >= 3 { mean_of(2) } else { None };
    (m1, m2)
}

/// A policy bound to a contest and stage, with equilibrium-type actions
/// precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    sequence: MoveSequence,
    stage: usize,
    endowment: f64,
    action: Action,
}

#[derive(Debug, Clone, PartialEq)]
enum Action {
    Constant(f64),
    Respond(ResponseModel),
    Imitate(f64),
}

impl BehaviorPolicy {
    pub fn prepare(&self, spec: &ContestSpec, stage: usize) -> Result<Agent, BehaviorError> {
        if stage == 0 || stage > spec.sequence.len() {
            return Err(BehaviorError::StageOutOfRange {
                stage,
                sequence: spec.sequence.to_string(),
            });
        }
        let action = match self {
            BehaviorPolicy::Spne => {
                let sol = solve_spne(&spec.clone().with_joy_of_winning(0.0))?;
                Action::Constant(sol.stage_investment(stage))
            }
            BehaviorPolicy::JowSpne { joy_of_winning } => {
                let sol = solve_spne(&spec.clone().with_joy_of_winning(*joy_of_winning))?;
                Action::Constant(sol.stage_investment(stage))
            }
            BehaviorPolicy::EmpiricalResponder { model } => Action::Respond(model.clone()),
            BehaviorPolicy::Imitator { fallback } => Action::Imitate(*fallback),
            BehaviorPolicy::OptimizingLeader {
                models,
                joy_of_winning,
            } => {
                let spec = spec.clone().with_joy_of_winning(*joy_of_winning);
                Action::Constant(optimal_first_mover(&spec, models)?.investment)
            }
            BehaviorPolicy::Fixed { investment } => Action::Constant(*investment),
        };
        Ok(Agent {
            sequence: spec.sequence.clone(),
            stage,
            endowment: spec.endowment,
            action,
        })
    }

    /// One-shot [`Agent::act`]; simulations should prepare agents once.
    pub fn act(
        &self,
        spec: &ContestSpec,
        stage: usize,
        observed: &[f64],
        standard_normal: f64,
    ) -> Result<f64, BehaviorError> {
        self.prepare(spec, stage)?.act(observed, standard_normal)
    }
}

impl Agent {
    pub fn stage(&self) -> usize {
        self.stage
    }

    /// Investment given everything revealed before this stage (player order)
    /// and a standard normal draw for response noise.
    pub fn act(&self, observed: &[f64], standard_normal: f64) -> Result<f64, BehaviorError> {
        let expected = self.sequence.first_player_of_stage(self.stage);
        if observed.len() != expected {
            return Err(BehaviorError::RoleObservationMismatch {
                stage: self.stage,
                expected,
                got: observed.len(),
            });
        }
        let cap = self.endowment;
        let x = match &self.action {
            Action::Constant(x) => *x,
            Action::Respond(model) => match observed_means(&self.sequence, self.stage, observed) {
                (Some(m1), m2) => {
                    let m2 = if model.uses_m2() { m2 } else { None };
                    eval_response(model, m1, m2, standard_normal, cap)?
                }
                // Nothing observed yet: intercept plus noise.
                (None, _) => model.beta0 + model.noise_sd * standard_normal,
            },
            Action::Imitate(fallback) => {
                if observed.is_empty() {
                    *fallback
                } else {
                    observed.iter().sum::<f64>() / observed.len() as f64
                }
            }
        };
        Ok(x.clamp(0.0, cap))
    }
}
