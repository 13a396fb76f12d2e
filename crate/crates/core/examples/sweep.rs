//! Growth slopes v(b_k)/k over a grid of maps, as produced by the `sweep` command.

use charp_linearize::cli::{cmd_sweep, Job, RunOptions};

fn main() {
    let job = Job::parse(
        r#"{
            "p": 2,
            "degree": 256,
            "checkpoints": [32, 64, 128, 256],
            "grid": { "lambdas": ["1+T", "1+T^3"], "maps": [{"2": "1"}, {"3": "1"}, {"2": "1", "5": "T"}] }
        }"#,
    )
    .expect("valid job");
    print!("{}", cmd_sweep(&job, &RunOptions::default()).expect("sweep runs"));
}
