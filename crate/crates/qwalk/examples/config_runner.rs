//! A scenario described in TOML, run into a directory of CSV files.

use qwalk::scenario::{parse_config, run_scenario};

const CONFIG: &str = r#"
name = "gentle_well"
steps = 120

[lattice]
sites = 128
scale = 100

[engine]
kind = "modified"
first = { theta1 = "0.5*arccos(0.8 + 0.1*cos(pi*x))", rate1 = 0.0 }
second = { theta1 = "-arccos(0.8 + 0.1*cos(pi*x))", rate1 = 0.04 }

[initial]
coin = [[0.7071067811865476, 0], [0, 0.7071067811865476]]
positions = [{ offset = 0, re = 1 }]

[output]
heatmap = true
entropy = true

[coefficients]
x_min = -0.5
x_max = 0.5
count = 11
t = 0.0
"#;

fn main() -> qwalk::Result<()> {
    let scenario = parse_config(CONFIG)?;
    let out = std::env::temp_dir().join("qwalk_gentle_well");
    let report = run_scenario(&scenario, &out)?;
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    for (k, v) in &report.manifest {
        println!("  {k} = {v}");
    }
    Ok(())
}
