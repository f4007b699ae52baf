// Brute-force backward induction on an investment grid, next to the
// analytic solution it is meant to check.

use std::error::Error;

use seqcontest::contest::ContestSpec;
use seqcontest::equilibrium::{oracle_grid_spne, solve_spne};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for s in ["1,1", "3", "1,2", "2,1", "1,1,1"] {
        let spec = ContestSpec::lab(s.parse()?);
        let exact = solve_spne(&spec)?;
        let grid = oracle_grid_spne(&spec, 1.0)?;
        println!(
            "({s:<5}) analytic {:?}\n        grid     {:?}",
            round2(&exact.scaled_stage_investments),
            round2(&grid.scaled_stage_investments)
        );
    }
    // The discrete game is its own game: in (1,1,1) the leader exploits the
    // jumps in the later movers' grid best responses.
    let coarse = ContestSpec::lab("1,1,1".parse()?);
    let half = oracle_grid_spne(&coarse, 0.5)?;
    println!("(1,1,1) at step 0.5: {:?}", round2(&half.scaled_stage_investments));
    Ok(())
}

fn round2(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 100.0).round() / 100.0).collect()
}

#[allow(dead_code)]
fn main() {
    run_example().expect("oracle example");
}
