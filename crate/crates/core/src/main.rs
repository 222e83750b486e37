use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use uavtrack::harness::{
    cmd_benchmark, cmd_simulate, cmd_track, parse_roi, parse_size, SimulateOptions, TrackOptions, TrackerConfig,
    BENCHMARK_MIN_FRAMES, CONFIG_ENV, EXIT_INPUT,
};
use uavtrack::imaging::Rect;
use uavtrack::simulator::Scenario;
use uavtrack::Result;

#[derive(Parser)]
#[command(name = "uavtrack", version, about = "Rotation-invariant template tracking with a simulated gimbal")]
struct Cli {
    /// Tracker configuration file (key = value). Defaults are used when
    /// neither this nor the environment variable is set.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track a target through a directory of PGM frames.
    Track {
        sequence: PathBuf,
        /// Template selection in the first frame.
        #[arg(long, value_parser = parse_roi, value_name = "X,Y,W,H")]
        roi: Rect,
        /// Track log CSV; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Gimbal command CSV.
        #[arg(long)]
        motor_log: Option<PathBuf>,
        /// Write annotated frames into this directory.
        #[arg(long, value_name = "DIR")]
        dump_frames: Option<PathBuf>,
    },
    /// Run a scenario file through the closed loop.
    Simulate {
        scenario: PathBuf,
        /// Also write the rendered frames as a PGM sequence.
        #[arg(long, value_name = "DIR")]
        export: Option<PathBuf>,
        /// Report CSV; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure tracking frame rate on 640x480 frames for each patch size.
    Benchmark {
        #[arg(long, value_delimiter = ',', value_parser = parse_size, value_name = "WxH,...",
              default_value = "27x28,20x22,38x30,30x33")]
        sizes: Vec<(usize, usize)>,
        #[arg(long, default_value_t = BENCHMARK_MIN_FRAMES)]
        frames: usize,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
}

fn load_config(path: Option<&Path>) -> Result<TrackerConfig> {
    match path {
        Some(p) => TrackerConfig::load(p),
        None => Ok(TrackerConfig::default()),
    }
}

fn print(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
    let _ = out.flush();
}

fn run(cli: Cli) -> Result<i32> {
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Track {
            sequence,
            roi,
            out,
            motor_log,
            dump_frames,
        } => {
            let print_csv = out.is_none();
            let res = cmd_track(&TrackOptions {
                sequence,
                roi,
                config,
                out,
                motor_log,
                dump_frames,
            })?;
            if print_csv {
                print(&res.csv);
            }
            Ok(res.exit_code)
        }
        Command::Simulate { scenario, export, out } => {
            let scenario = Scenario::load(&scenario)?;
            let print_csv = out.is_none();
            let res = cmd_simulate(&SimulateOptions {
                scenario,
                config,
                export,
                out,
            })?;
            if print_csv {
                print(&res.csv);
            }
            let r = &res.report;
            eprintln!(
                "frames {}  detection rate {:.1}%  false positives {}  longest miss run {}",
                r.len(),
                r.detection_rate() * 100.0,
                r.false_positives(),
                r.longest_miss_run()
            );
            Ok(res.exit_code)
        }
        Command::Benchmark { sizes, frames, repeats } => {
            let res = cmd_benchmark(&config, &sizes, frames, repeats)?;
            print(&res.table());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
