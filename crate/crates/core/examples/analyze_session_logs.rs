// Summary table, round trends and the ordered-treatment test on simulated
// behavioral sessions.

use std::error::Error;

use seqcontest::config::load_config;
use seqcontest::simulate::run_batch;
use seqcontest::stats::{
    jonckheere_terpstra, render_summary_table, treatment_summary, trend_by_round, TrendTarget,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (config, _) = load_config("behavioral_all_treatments")?;
    let logs = run_batch(&config.sessions(None, None)?, 1)?;

    let summaries = logs
        .iter()
        .map(|log| treatment_summary(log, Some(5)))
        .collect::<Result<Vec<_>, _>>()?;
    print!("{}", render_summary_table(&summaries));

    for log in &logs {
        let fit = trend_by_round(log, TrendTarget::Aggregate)?;
        let wald = fit.wald(1, 0.0);
        println!(
            "{:<8} aggregate trend {:+.3} per round (se {:.3}, p {:.3})",
            log.treatment.to_string(),
            fit.coefficients[1],
            wald.se,
            wald.p_value
        );
    }

    let groups: Vec<Vec<f64>> = logs
        .iter()
        .map(seqcontest::cli::group_mean_aggregates)
        .collect();
    let jt = jonckheere_terpstra(&groups)?;
    println!("Jonckheere-Terpstra J = {}, z = {:.3}, p = {:.4}", jt.statistic, jt.z, jt.p_value);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("analysis example");
}
