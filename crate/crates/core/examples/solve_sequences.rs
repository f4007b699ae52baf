// Equilibrium investments for every move sequence of three players, and the
// polynomial ladder behind one of them.

use std::error::Error;

use seqcontest::contest::{ContestSpec, MoveSequence};
use seqcontest::equilibrium::{build_ladder, solve_spne};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    println!("{:<10} {:>9} per-stage investment", "sequence", "X");
    for seq in MoveSequence::all_with_players(3) {
        let eq = solve_spne(&ContestSpec::lab(seq.clone()))?;
        let stages: Vec<String> = eq
            .scaled_stage_investments
            .iter()
            .map(|x| format!("{x:.3}"))
            .collect();
        println!("{:<10} {:>9.3} {}", seq.to_string(), eq.scaled_aggregate, stages.join(" / "));
    }

    let seq: MoveSequence = "1,1,1".parse()?;
    let ladder = build_ladder(&seq);
    for t in (0..=seq.len()).rev() {
        println!("f_{t} coefficients: {:?}", ladder.f(t).coefficients());
    }

    // Longer sequences work the same way.
    let long: MoveSequence = "1,1,1,1,1,1,1,1".parse()?;
    let eq = solve_spne(&ContestSpec::new(long.clone(), 240.0, 240.0, 0.0)?)?;
    println!("{long}: X = {:.3}, first mover {:.3}", eq.scaled_aggregate, eq.scaled_stage_investments[0]);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("solve example");
}
