// How much should a first mover invest against the estimated response
// functions of later movers?

use std::error::Error;

use seqcontest::behavior::{
    optimal_first_mover, rescaled_first_mover, turning_point, Observed, ResponsePresets,
};
use seqcontest::contest::ContestSpec;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let presets = ResponsePresets::bundled();
    for s in ["1,2", "2,1", "1,1,1"] {
        let seq = s.parse()?;
        let models = presets.for_treatment(&seq).ok_or("missing preset")?;
        let with_w = ContestSpec::lab(seq.clone()).with_joy_of_winning(119.73);
        let best = optimal_first_mover(&with_w, models)?;
        let rescaled = rescaled_first_mover(&with_w, models)?;
        let plain = optimal_first_mover(&ContestSpec::lab(seq), models)?;
        println!(
            "({s:<5}) w = 119.73: {:.2}   rescaled to V: {:.2}   w = 0: {:.2}",
            best.investment, rescaled.investment, plain.investment
        );
        if let Some(tp) = turning_point(&models.r2, Observed::M1, 240.0) {
            println!("        second movers' response turns at {tp:.1}");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("preemption example");
}
