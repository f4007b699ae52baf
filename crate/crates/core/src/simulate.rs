//! Laboratory protocol replay with programmatic agents.
//!
//! Each matching group holds three subjects per player slot, with roles fixed
//! for the whole session. Every round the group is split uniformly at random
//! into three role-complete contests. Stages move in order, and each mover sees
//! every investment from strictly earlier stages. A winner is drawn from the
//! lottery success function and payoffs are booked.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::{observed_means, Agent, BehaviorError, BehaviorPolicy};
use crate::contest::{
    draw_winner, round_payoffs, ContestError, ContestSpec, InvestmentProfile, MoveSequence,
};

/// Contests formed from one matching group each round.
pub const CONTESTS_PER_GROUP: usize = 3;
pub const DEFAULT_ROUNDS: usize = 25;
pub const LOG_SCHEMA: u32 = 1;

pub const CSV_HEADER: [&str; 11] = [
    "group",
    "round",
    "triad",
    "subject",
    "stage",
    "slot",
    "m1",
    "m2",
    "investment",
    "won",
    "payoff",
];

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error("bad group composition: {0}")]
    BadGroupComposition(String),
    #[error(transparent)]
    Behavior(#[from] BehaviorError),
    #[error(transparent)]
    Contest(#[from] ContestError),
    #[error("I/O failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed log {path}: {message}")]
    Format { path: String, message: String },
}

impl SimulateError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        SimulateError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    fn format(path: &Path, message: impl Into<String>) -> Self {
        SimulateError::Format {
            path: path.display().to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    /// Contest parameters; `spec.sequence` is the treatment.
    pub spec: ContestSpec,
    pub groups: usize,
    pub rounds: usize,
    /// One policy per player slot, or a single policy used for every slot.
    pub policies: Vec<BehaviorPolicy>,
    #[serde(default)]
    pub integer_rounding: bool,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl SessionConfig {
    pub fn new(spec: ContestSpec, groups: usize, policies: Vec<BehaviorPolicy>, seed: u64) -> Self {
        Self {
            spec,
            groups,
            rounds: DEFAULT_ROUNDS,
            policies,
            integer_rounding: false,
            seed,
            label: None,
        }
    }

    pub fn treatment(&self) -> &MoveSequence {
        &self.spec.sequence
    }

    /// Subjects per matching group.
    pub fn group_size(&self) -> usize {
        CONTESTS_PER_GROUP * self.spec.players()
    }

    fn validate(&self) -> Result<(), SimulateError> {
        self.spec.validate()?;
        let n = self.spec.players();
        if self.groups == 0 {
            return Err(SimulateError::BadGroupComposition("no matching groups".into()));
        }
        if self.rounds == 0 {
            return Err(SimulateError::BadGroupComposition("no rounds".into()));
        }
        if self.policies.len() != n && self.policies.len() != 1 {
            return Err(SimulateError::BadGroupComposition(format!(
                "{} policies for {} player slots",
                self.policies.len(),
                n
            )));
        }
        Ok(())
    }

    /// Agents per player slot.
    fn agents(&self) -> Result<Vec<Agent>, SimulateError> {
        let seq = &self.spec.sequence;
        (0..seq.players())
            .map(|slot| {
                let policy = self.policies.get(slot).unwrap_or(&self.policies[0]);
                Ok(policy.prepare(&self.spec, seq.stage_of_player(slot))?)
            })
            .collect()
    }
}

/// One subject's decision in one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub group: usize,
    pub round: usize,
    pub triad: usize,
    /// Subject id, unique within the session.
    pub subject: usize,
    /// Stage (1-based) at which the subject moves.
    pub stage: usize,
    /// Position within the stage (1-based).
    pub slot: usize,
    /// Investments from strictly earlier stages of the same contest, in
    /// player order.
    pub observed: Vec<f64>,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub investment: f64,
    pub won: bool,
    pub payoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub schema: u32,
    pub treatment: MoveSequence,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<ContestSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub records: Vec<RoundRecord>,
}

impl SessionLog {
    pub fn groups(&self) -> usize {
        let mut ids: Vec<usize> = self.records.iter().map(|r| r.group).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }

    pub fn rounds(&self) -> usize {
        self.records.iter().map(|r| r.round).max().unwrap_or(0)
    }

    /// Records grouped by `(group, round, triad)`, each in player order.
    pub fn contests(&self) -> BTreeMap<(usize, usize, usize), Vec<&RoundRecord>> {
        let mut out: BTreeMap<_, Vec<&RoundRecord>> = BTreeMap::new();
        for r in &self.records {
            out.entry((r.group, r.round, r.triad)).or_default().push(r);
        }
        for rows in out.values_mut() {
            rows.sort_by_key(|r| (r.stage, r.slot));
        }
        out
    }
}

/// Outcome of one contest.
#[derive(Debug, Clone, PartialEq)]
pub struct ContestOutcome {
    pub investments: Vec<f64>,
    pub observed: Vec<Vec<f64>>,
    pub winner: usize,
    pub payoffs: Vec<f64>,
}

/// Plays one contest: one agent per player slot, stages in order, every mover
/// seeing all strictly earlier investments. Draws one standard normal per
/// player (in player order) and then one uniform for the winner.
pub fn play_round<R: Rng + ?Sized>(
    spec: &ContestSpec,
    agents: &[Agent],
    integer_rounding: bool,
    rng: &mut R,
) -> Result<ContestOutcome, SimulateError> {
    let seq = &spec.sequence;
    if agents.len() != seq.players() {
        return Err(SimulateError::BadGroupComposition(format!(
            "{} agents for {} players",
            agents.len(),
            seq.players()
        )));
    }
    let draws: Vec<f64> = (0..agents.len()).map(|_| rng.sample(StandardNormal)).collect();
    let mut investments = Vec::with_capacity(agents.len());
    let mut observed = Vec::with_capacity(agents.len());
    for stage in 1..=seq.len() {
        let start = seq.first_player_of_stage(stage);
        let revealed = investments.clone();
        for player in start..start + seq.stage_size(stage) {
            let mut x = agents[player].act(&revealed, draws[player])?;
            if integer_rounding {
                x = x.round_ties_even();
            }
            investments.push(x.clamp(0.0, spec.endowment));
            observed.push(revealed.clone());
        }
    }
    let profile = InvestmentProfile::new(investments);
    let winner = draw_winner(&profile, rng.gen::<f64>())?;
    let payoffs = round_payoffs(spec, &profile, winner)?;
    Ok(ContestOutcome {
        investments: profile.investments,
        observed,
        winner,
        payoffs,
    })
}

fn group_rng(seed: u64, group: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(group as u64);
    rng
}

/// SplitMix64 finalizer, used to derive replication seeds.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run_session(config: &SessionConfig) -> Result<SessionLog, SimulateError> {
    config.validate()?;
    let agents = config.agents()?;
    let shards: Vec<Vec<RoundRecord>> = (0..config.groups)
        .into_par_iter()
        .map(|g| run_group(config, &agents, g))
        .collect::<Result<_, _>>()?;
    Ok(SessionLog {
        schema: LOG_SCHEMA,
        treatment: config.treatment().clone(),
        spec: Some(config.spec.clone()),
        seed: Some(config.seed),
        label: config.label.clone(),
        records: shards.into_iter().flatten().collect(),
    })
}

fn run_group(
    config: &SessionConfig,
    agents: &[Agent],
    group: usize,
) -> Result<Vec<RoundRecord>, SimulateError> {
    let seq = config.treatment();
    let n = seq.players();
    let mut rng = group_rng(config.seed, group);
    let mut records = Vec::with_capacity(config.rounds * config.group_size());
    // Subjects `slot * 3 .. slot * 3 + 3` hold player slot `slot` all session.
    let mut members: Vec<Vec<usize>> = (0..n)
        .map(|slot| (0..CONTESTS_PER_GROUP).map(|k| slot * CONTESTS_PER_GROUP + k).collect())
        .collect();
    for round in 1..=config.rounds {
        for slot_members in members.iter_mut() {
            slot_members.shuffle(&mut rng);
        }
        for triad in 0..CONTESTS_PER_GROUP {
            let outcome = play_round(&config.spec, agents, config.integer_rounding, &mut rng)?;
            for (player, slot_members) in members.iter().enumerate() {
                let stage = seq.stage_of_player(player);
                let observed = outcome.observed[player].clone();
                let (m1, m2) = observed_means(seq, stage, &observed);
                records.push(RoundRecord {
                    group: group + 1,
                    round,
                    triad: triad + 1,
                    subject: group * config.group_size() + slot_members[triad] + 1,
                    stage,
                    slot: player - seq.first_player_of_stage(stage) + 1,
                    observed,
                    m1,
                    m2,
                    investment: outcome.investments[player],
                    won: outcome.winner == player,
                    payoff: outcome.payoffs[player],
                });
            }
        }
    }
    Ok(records)
}

/// Every config run `replications` times. Replication `r` of a config uses
/// seed `derive_seed(config.seed, r)`. Output is config-major.
pub fn run_batch(
    configs: &[SessionConfig],
    replications: usize,
) -> Result<Vec<SessionLog>, SimulateError> {
    let jobs: Vec<SessionConfig> = configs
        .iter()
        .flat_map(|c| {
            (0..replications as u64).map(move |r| SessionConfig {
                seed: derive_seed(c.seed, r),
                ..c.clone()
            })
        })
        .collect();
    jobs.par_iter().map(run_session).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogFormat {
    Csv,
    Json,
}

impl std::str::FromStr for LogFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(LogFormat::Csv),
            "json" => Ok(LogFormat::Json),
            other => Err(format!("unknown format {other:?} (csv or json)")),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    group: usize,
    round: usize,
    triad: usize,
    subject: usize,
    stage: usize,
    slot: usize,
    m1: Option<f64>,
    m2: Option<f64>,
    investment: f64,
    won: u8,
    payoff: f64,
}

pub fn log_to_csv(log: &SessionLog) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &log.records {
        w.serialize(CsvRow {
            group: r.group,
            round: r.round,
            triad: r.triad,
            subject: r.subject,
            stage: r.stage,
            slot: r.slot,
            m1: r.m1,
            m2: r.m2,
            investment: r.investment,
            won: r.won as u8,
            payoff: r.payoff,
        })
        .expect("in-memory csv write");
    }
    if log.records.is_empty() {
        w.write_record(CSV_HEADER).expect("in-memory csv write");
    }
    w.into_inner().expect("in-memory csv flush")
}

pub fn log_to_json(log: &SessionLog) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(log).expect("log serializes");
    out.push(b'\n');
    out
}

/// Writes `bytes` to a temporary file beside `path` and renames it into place,
/// so a failed run never leaves a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), SimulateError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| SimulateError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| SimulateError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| SimulateError::io(path, e))?;
    tmp.persist(path)
        .map_err(|e| SimulateError::io(path, e.error))?;
    Ok(())
}

pub fn export_log(log: &SessionLog, format: LogFormat, path: &Path) -> Result<(), SimulateError> {
    let bytes = match format {
        LogFormat::Csv => log_to_csv(log),
        LogFormat::Json => log_to_json(log),
    };
    write_atomic(path, &bytes)
}

/// Reads a log written by [`export_log`]; the format follows the extension
/// (`.json`, anything else is CSV). CSV logs carry no treatment column, so the
/// move sequence is inferred from the stage layout of the contests.
pub fn import_log(path: &Path) -> Result<SessionLog, SimulateError> {
    let bytes = fs::read(path).map_err(|e| SimulateError::io(path, e))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        let log: SessionLog = serde_json::from_slice(&bytes)
            .map_err(|e| SimulateError::format(path, e.to_string()))?;
        if log.schema != LOG_SCHEMA {
            return Err(SimulateError::format(
                path,
                format!("unsupported schema {}", log.schema),
            ));
        }
        Ok(log)
    } else {
        csv_to_log(&bytes).map_err(|m| SimulateError::format(path, m))
    }
}

pub fn csv_to_log(bytes: &[u8]) -> Result<SessionLog, String> {
    let mut reader = csv::Reader::from_reader(bytes);
    let header = reader.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()));
    }
    let rows: Vec<CsvRow> = reader
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let mut contests: BTreeMap<(usize, usize, usize), Vec<CsvRow>> = BTreeMap::new();
    for row in rows {
        contests
            .entry((row.group, row.round, row.triad))
            .or_default()
            .push(row);
    }
    let mut treatment: Option<MoveSequence> = None;
    let mut records = Vec::new();
    for (key, mut rows) in contests {
        rows.sort_by_key(|r| (r.stage, r.slot));
        let stages = rows.last().map_or(0, |r| r.stage);
        let counts: Vec<i64> = (1..=stages)
            .map(|s| rows.iter().filter(|r| r.stage == s).count() as i64)
            .collect();
        let seq = MoveSequence::new(&counts)
            .map_err(|e| format!("contest {key:?} has stage layout {counts:?}: {e}"))?;
        match &treatment {
            None => treatment = Some(seq.clone()),
            Some(t) if *t != seq => {
                return Err(format!("contest {key:?} has layout {seq}, expected {t}"))
            }
            Some(_) => {}
        }
        let investments: Vec<f64> = rows.iter().map(|r| r.investment).collect();
        for r in rows {
            let observed = investments[..seq.first_player_of_stage(r.stage)].to_vec();
            records.push(RoundRecord {
                group: r.group,
                round: r.round,
                triad: r.triad,
                subject: r.subject,
                stage: r.stage,
                slot: r.slot,
                observed,
                m1: r.m1,
                m2: r.m2,
                investment: r.investment,
                won: r.won != 0,
                payoff: r.payoff,
            });
        }
    }
    let treatment = treatment.ok_or_else(|| "log has no records".to_string())?;
    records.sort_by_key(|r| (r.group, r.round, r.triad, r.stage, r.slot));
    Ok(SessionLog {
        schema: LOG_SCHEMA,
        treatment,
        spec: None,
        seed: None,
        label: None,
        records,
    })
}
