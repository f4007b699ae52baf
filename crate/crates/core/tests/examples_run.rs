macro_rules! example {
    ($module:ident, $file:literal) => {
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(solve_sequences, "solve_sequences.rs");
example!(calibrate_joy_of_winning, "calibrate_joy_of_winning.rs");
example!(grid_oracle, "grid_oracle.rs");
example!(first_mover_preemption, "first_mover_preemption.rs");
example!(behavioral_agents, "behavioral_agents.rs");
example!(simulate_lab_sessions, "simulate_lab_sessions.rs");
example!(analyze_session_logs, "analyze_session_logs.rs");

#[test]
fn examples_run() {
    solve_sequences::run_example().unwrap();
    calibrate_joy_of_winning::run_example().unwrap();
    grid_oracle::run_example().unwrap();
    first_mover_preemption::run_example().unwrap();
    behavioral_agents::run_example().unwrap();
    simulate_lab_sessions::run_example().unwrap();
    analyze_session_logs::run_example().unwrap();
}
