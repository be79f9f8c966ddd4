use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qwalk::coin::CoinAngles;
use qwalk::curved::reference_scenario;
use qwalk::neutrino::{PmnsParams, WalkCalibration, FLAVOURS};
use qwalk::scenario::{
    builtin_scenario, list_scenarios, parse_config, run_scenario, two_particle_demo, CoefficientJob, Job, NeutrinoJob, Scenario,
    SpectrumJob,
};
use qwalk::spectral::WalkParams;
use qwalk::state::Lattice;
use qwalk::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "qwalk", version, about = "Discrete-time quantum walk scenarios written to CSV")]
struct Cli {
    /// Output directory (default: out/<scenario name>)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the number of time steps
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Assert that the run uses no random numbers
    #[arg(long, global = true)]
    seedless: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Family {
    Dqw,
    Ssdqw,
    Dca,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a TOML config file or a built-in scenario name
    Simulate { config: String },
    /// Closed-form H_k over the momentum grid of a homogeneous walk
    Spectrum {
        #[arg(long, value_enum, default_value = "ssdqw")]
        family: Family,
        /// First rotation angle (DQW angle, or theta^1_1 for SS-DQW)
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        theta1: f64,
        /// Second rotation angle (theta^1_2 for SS-DQW, mixing angle for DCA)
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4, allow_negative_numbers = true)]
        theta2: f64,
        #[arg(long, default_value_t = 64)]
        sites: usize,
        #[arg(long, default_value_t = 64.0)]
        scale: f64,
    },
    /// Three-flavour oscillation from the six-dimensional coin walk
    Neutrino {
        #[arg(long, default_value = "e")]
        flavour: String,
    },
    /// Effective-Hamiltonian coefficients of a curved-spacetime schedule
    CurvedCoeffs {
        #[arg(long, default_value = "static")]
        scenario: String,
        #[arg(long, default_value_t = -0.3, allow_negative_numbers = true)]
        x_min: f64,
        #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
        x_max: f64,
        #[arg(long, default_value_t = 61)]
        count: usize,
        #[arg(long, default_value_t = 0.5)]
        t: f64,
        /// Also write coefficients extracted from the step stencil
        #[arg(long)]
        numeric: bool,
    },
    /// Two interacting walkers on a small lattice
    TwoParticle {
        #[arg(long, default_value_t = 24)]
        sites: usize,
    },
    /// Print the built-in scenario names
    ListScenarios,
}

fn command_line() -> String {
    std::env::args().skip(1).collect::<Vec<_>>().join(" ")
}

fn build(cli: &Cli) -> Result<Option<Scenario>> {
    let scenario = match &cli.command {
        Command::ListScenarios => {
            for name in list_scenarios() {
                println!("{name}");
            }
            return Ok(None);
        }
        Command::Simulate { config } => {
            let path = Path::new(config);
            if path.is_file() {
                let text = std::fs::read_to_string(path)?;
                parse_config(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            } else {
                builtin_scenario(config)?
            }
        }
        Command::Spectrum { family, theta1, theta2, sites, scale } => {
            let params = match family {
                Family::Dqw => WalkParams::Dqw(CoinAngles::rotation(*theta1)),
                Family::Ssdqw => WalkParams::ssdqw(*theta1, *theta2),
                Family::Dca => WalkParams::dca_from_angle(*theta2),
            };
            let job = SpectrumJob { params, lattice: Lattice::with_scale(*sites, *scale)? };
            Scenario::new("spectrum", command_line(), vec![Job::Spectrum(job)])
        }
        Command::Neutrino { flavour } => {
            let alpha = FLAVOURS
                .iter()
                .position(|f| f == flavour)
                .ok_or_else(|| Error::Config(format!("unknown flavour '{flavour}', expected e, mu or tau")))?;
            let calibration = WalkCalibration::reference();
            let steps = calibration.steps_short;
            let job = NeutrinoJob { calibration, pmns: PmnsParams::default(), alpha, steps };
            Scenario::new("neutrino", command_line(), vec![Job::Neutrino(job)])
        }
        Command::CurvedCoeffs { scenario, x_min, x_max, count, t, numeric } => {
            if *count == 0 || x_max < x_min {
                return Err(Error::Config("need --count >= 1 and --x-max >= --x-min".into()));
            }
            let p = reference_scenario(scenario)?;
            let step = if *count > 1 { (x_max - x_min) / (*count - 1) as f64 } else { 0.0 };
            let xs = (0..*count).map(|i| x_min + step * i as f64).collect();
            let job = CoefficientJob { schedule: p.schedule, xs, t: *t, h: 1e-3, numeric_probe: numeric.then_some(1e-5) };
            Scenario::new("curved_coeffs", command_line(), vec![Job::Coefficients(job)])
        }
        Command::TwoParticle { sites } => {
            let (job, _) = two_particle_demo(*sites, 20)?;
            Scenario::new("two_particle", command_line(), vec![Job::TwoParticle(job)])
        }
    };
    Ok(Some(match cli.steps {
        Some(n) => scenario.with_steps(n),
        None => scenario,
    }))
}

fn run(cli: &Cli) -> Result<()> {
    if cli.seedless {
        log::info!("--seedless: the pipeline draws no random numbers");
    }
    let Some(scenario) = build(cli)? else { return Ok(()) };
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out").join(&scenario.name));
    let report = run_scenario(&scenario, &out)?;
    for f in &report.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
