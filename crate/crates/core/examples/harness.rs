//! Running a named experiment from a TOML configuration.
//!
//! ```text
//! cargo run --release --example harness
//! ```

use brickwall::harness::{run_experiment, write_reports, Config, ExperimentId, ExperimentSpec, Format};

const CONFIG: &str = r#"
master_seed = 12
replicas = 50000
n_grid = [100, 1000]

[[laws]]
atoms = [[1, 2, "1/2"], [2, 1, "1/2"]]

[[laws]]
bgw = { offspring = [[0, "1/2"], [2, "1/2"]] }
"#;

fn main() -> brickwall::Result<()> {
    let config = Config::parse(CONFIG)?;
    let mut reports = Vec::new();
    for id in [ExperimentId::Martingale, ExperimentId::SqrtDrift] {
        let spec = ExperimentSpec::from_config(id, &config)?;
        let report = run_experiment(&spec)?;
        eprintln!("{}: {}", id, if report.passed() { "pass" } else { "fail" });
        reports.push(report);
    }
    write_reports(&reports, Format::Csv, std::io::stdout().lock())
}
