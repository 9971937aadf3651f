//! Driving the command-line layer from a JSON experiment document.

use moving_targets::cli::{resolve, run, ExperimentConfig, Output};

fn main() {
    let doc = r#"{"seed": 11, "command": {"hit": {"chain": "biased-cycle(6,3/4)", "target": "0", "start": 3, "runs": 20000}}}"#;
    let config: ExperimentConfig = serde_json::from_str(doc).expect("valid config");
    let config = resolve(config).expect("complete config");
    match run(&config).expect("runs") {
        Output::Report(report) => {
            for v in &report.body.verdicts {
                println!("{:?} {}: {} {} {}", v.outcome, v.name, v.lhs.as_deref().unwrap_or(""), v.relation.as_deref().unwrap_or(""), v.rhs.as_deref().unwrap_or(""));
            }
            println!("exit code {}", report.exit_code());
        }
        Output::Text(text) => print!("{text}"),
    }
}
