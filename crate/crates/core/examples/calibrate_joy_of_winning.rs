// Backs out the joy of winning from the mean investment in the simultaneous
// contest and re-solves the sequential treatments with it.

use std::error::Error;

use seqcontest::contest::{ContestSpec, MoveSequence};
use seqcontest::equilibrium::{calibrate_jow, solve_spne};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cal = calibrate_jow(79.94, 3, 240.0)?;
    println!("w = {:.2} (clamped: {})", cal.joy_of_winning, cal.clamped);

    for s in ["3", "1,2", "2,1", "1,1,1"] {
        let seq: MoveSequence = s.parse()?;
        let plain = solve_spne(&ContestSpec::lab(seq.clone()))?;
        let spec = ContestSpec::lab(seq.clone()).with_joy_of_winning(cal.joy_of_winning);
        let adjusted = solve_spne(&spec)?;
        println!(
            "{:<8} X = {:>7.2} without, {:>7.2} with joy of winning; players {:?}",
            seq.to_string(),
            plain.scaled_aggregate,
            adjusted.scaled_aggregate,
            adjusted
                .player_investments()
                .iter()
                .map(|x| (x * 100.0).round() / 100.0)
                .collect::<Vec<_>>()
        );
    }

    // Means below the risk-neutral prediction cannot be explained by a
    // positive joy of winning.
    let low = calibrate_jow(40.0, 3, 240.0)?;
    println!("mean 40 -> w = {} (clamped: {})", low.joy_of_winning, low.clamped);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("calibration example");
}
