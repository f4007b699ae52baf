// Runs the bundled behavioral config and writes one CSV log per treatment.

use std::error::Error;

use seqcontest::config::load_config;
use seqcontest::simulate::{export_log, run_batch, LogFormat};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (config, _) = load_config("behavioral_all_treatments")?;
    let sessions = config.sessions(None, Some(42))?;
    let logs = run_batch(&sessions, 1)?;
    let dir = tempfile::tempdir()?;
    for log in &logs {
        let name = format!("{}.csv", log.label.as_deref().unwrap_or("session"));
        let path = dir.path().join(&name);
        export_log(log, LogFormat::Csv, &path)?;
        let contests = log.contests().len();
        let mean = log.records.iter().map(|r| r.investment).sum::<f64>() / log.records.len() as f64;
        println!(
            "{name:<16} {} groups x {} rounds: {} records, {} contests, mean investment {mean:.2}",
            log.groups(),
            log.rounds(),
            log.records.len(),
            contests
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("simulation example");
}
