// Agents in one contest: an optimizing leader, noisy empirical responders,
// and what each sees and wins.

use std::error::Error;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use seqcontest::behavior::{BehaviorPolicy, ResponsePresets};
use seqcontest::contest::{win_probabilities, ContestSpec, InvestmentProfile};
use seqcontest::simulate::play_round;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let spec = ContestSpec::lab("1,2".parse()?);
    let models = ResponsePresets::bundled()
        .for_treatment(&spec.sequence)
        .cloned()
        .ok_or("missing preset")?;
    let leader = BehaviorPolicy::OptimizingLeader {
        models: models.clone(),
        joy_of_winning: 119.73,
    };
    let follower = BehaviorPolicy::EmpiricalResponder {
        model: models.r2.clone().with_noise(25.0),
    };
    let agents = [
        leader.prepare(&spec, 1)?,
        follower.prepare(&spec, 2)?,
        follower.prepare(&spec, 2)?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for round in 1..=5 {
        let outcome = play_round(&spec, &agents, true, &mut rng)?;
        let p = win_probabilities(&InvestmentProfile::new(outcome.investments.clone()))?;
        println!(
            "round {round}: investments {:?}, win chances {:?}, winner {}, payoffs {:?}",
            outcome.investments,
            p.iter().map(|q| (q * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            outcome.winner + 1,
            outcome.payoffs
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("agents example");
}
