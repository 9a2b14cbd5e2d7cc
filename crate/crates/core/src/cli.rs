//! Command-line front end. Every command writes CSV (to `--out` or stdout)
//! and a short summary to stdout.
//!
//! Exit codes: 0 success, 1 failed verification or runtime failure, 2 bad
//! input.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::channels::ChannelKind;
use crate::error::{Error, Result};
use crate::experiments::{
    dephasing_curve, ppt_sweep, random_branch_stats, retrieval_threshold, structural_checks, yield_curve,
    Classification, Conditioning, RandomParams, DEFAULT_MAX_STEPS, DEFAULT_TARGET,
};
use crate::protocol::{ProtocolConfig, VPlacement};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "wdistill",
    version,
    about = "W-state distillation by complementary stabilizer measurements"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the basis, stabilizer and measurement invariants.
    Verify,
    /// Distillation curve for dephased W states, simulated and closed form.
    Curve {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Steps and yield needed to reach the target fidelity.
    Yield {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = DEFAULT_TARGET)]
        target: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Retrieval threshold of a noise family, by bisection.
    Threshold {
        #[arg(long, value_parser = parse_channel)]
        channel: ChannelKind,
        #[arg(long, default_value_t = 1e-3)]
        resolution: f64,
        #[command(flatten)]
        protocol: ProtocolArgs,
    },
    /// Smallest partial-transpose eigenvalue per party across a noise family.
    Ppt {
        #[arg(long, value_parser = parse_channel)]
        channel: ChannelKind,
        /// Defaults to the smallest fidelity the family reaches.
        #[arg(long)]
        start: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        stop: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Branch statistics for random inputs in a fidelity window.
    Random {
        #[arg(long = "f", default_value_t = 0.70)]
        f_target: f64,
        #[arg(long, default_value_t = 0.01)]
        window: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: usize,
        #[arg(long, default_value_t = DEFAULT_TARGET)]
        target: f64,
        /// `admixture` or `rejection`.
        #[arg(long, default_value = "admixture", value_parser = parse_conditioning)]
        conditioning: Conditioning,
        #[command(flatten)]
        protocol: ProtocolArgs,
        /// Prefix of the two output files, `<out>_counts.csv` and `<out>_steps.csv`.
        #[arg(long, default_value = "branches")]
        out: PathBuf,
    },
}

#[derive(Args, Debug, Clone, Copy)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.34)]
    pub start: f64,
    #[arg(long, default_value_t = 1.0)]
    pub stop: f64,
    #[arg(long, default_value_t = 67)]
    pub points: usize,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct ProtocolArgs {
    #[arg(long, default_value = "per-party", value_parser = parse_placement)]
    pub v_placement: VPlacement,
}

impl ProtocolArgs {
    fn config(self) -> ProtocolConfig {
        ProtocolConfig {
            v_placement: self.v_placement,
            ..ProtocolConfig::default()
        }
    }
}

fn parse_channel(s: &str) -> std::result::Result<ChannelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_placement(s: &str) -> std::result::Result<VPlacement, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_conditioning(s: &str) -> std::result::Result<Conditioning, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// `points` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::Input(format!(
            "bad grid: start {start}, stop {stop}, points {points}"
        )));
    }
    if points == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| if i == points - 1 { stop } else { start + step * i as f64 })
        .collect())
}

/// Formats like C's `%.12g`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (11 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn emit(out: Option<&Path>, csv: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, csv),
        None => std::io::stdout().write_all(csv.as_bytes()),
    }
}

enum Failure {
    Input(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Input(_) | Error::Sampling { .. } => Failure::Input(e.to_string()),
            Error::DegenerateOutcome(_) => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(format!("write failed: {e}"))
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            EXIT_INPUT
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            EXIT_FAILURE
        }
    }
}

fn execute(command: Command) -> std::result::Result<i32, Failure> {
    match command {
        Command::Verify => {
            let checks = structural_checks();
            for c in &checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                println!("{tag} {} (worst deviation {:.3e})", c.name, c.worst);
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{} of {} checks passed", checks.len() - failed, checks.len());
            Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::Curve { grid, out } => {
            let points = dephasing_curve(&linspace(grid.start, grid.stop, grid.points)?)?;
            let mut csv = String::from("F,F_prime_sim,F_prime_formula,p_success\n");
            for p in &points {
                let row = [p.fidelity, p.simulated, p.closed_form, p.p_success].map(fmt_num);
                writeln!(csv, "{}", row.join(",")).unwrap();
            }
            emit(out.as_deref(), &csv)?;
            if out.is_some() {
                let worst = points
                    .iter()
                    .map(|p| (p.simulated - p.closed_form).abs())
                    .fold(0.0, f64::max);
                println!("{} points, largest simulated/closed-form gap {worst:.3e}", points.len());
            }
            Ok(EXIT_OK)
        }
        Command::Yield { grid, target, out } => {
            let points = yield_curve(&linspace(grid.start, grid.stop, grid.points)?, target)?;
            let mut csv = String::from("F,steps,yield\n");
            for p in &points {
                writeln!(csv, "{},{},{}", fmt_num(p.fidelity), p.steps, fmt_num(p.yield_value)).unwrap();
            }
            emit(out.as_deref(), &csv)?;
            if out.is_some() {
                let most = points.iter().map(|p| p.steps).max().unwrap_or(0);
                println!("{} points, up to {most} steps to reach F >= {target}", points.len());
            }
            Ok(EXIT_OK)
        }
        Command::Threshold {
            channel,
            resolution,
            protocol,
        } => {
            let t = retrieval_threshold(channel, resolution, &protocol.config())?;
            println!(
                "channel={} v_placement={} threshold={} bracket=[{},{}] width={}",
                channel,
                protocol.v_placement,
                fmt_num(t.f_threshold),
                fmt_num(t.bracket.0),
                fmt_num(t.bracket.1),
                fmt_num(t.bracket_width)
            );
            Ok(EXIT_OK)
        }
        Command::Ppt {
            channel,
            start,
            stop,
            points,
            out,
        } => {
            let start = start.unwrap_or_else(|| channel.min_fidelity());
            let rows = ppt_sweep(channel, &linspace(start, stop, points)?)?;
            let mut csv = String::from("F,min_eig_A,min_eig_B,min_eig_C\n");
            for r in &rows {
                let [a, b, c] = r.min_eigenvalue.map(fmt_num);
                writeln!(csv, "{},{a},{b},{c}", fmt_num(r.fidelity)).unwrap();
            }
            emit(out.as_deref(), &csv)?;
            Ok(EXIT_OK)
        }
        Command::Random {
            f_target,
            window,
            samples,
            seed,
            max_steps,
            target,
            conditioning,
            protocol,
            out,
        } => {
            let params = RandomParams {
                max_steps,
                target_f: target,
                conditioning,
                config: protocol.config(),
                ..RandomParams::new(f_target, window, samples, seed)
            };
            let stats = random_branch_stats(&params)?;
            let mut counts = String::from("branch,count,fraction\n");
            let mut steps = String::from("branch,step,mean_F,std_F\n");
            for c in Classification::ALL {
                writeln!(counts, "{c},{},{}", stats.count(c), fmt_num(stats.fraction(c))).unwrap();
                for s in stats.series(c) {
                    writeln!(steps, "{c},{},{},{}", s.step, fmt_num(s.mean), fmt_num(s.std)).unwrap();
                }
            }
            let counts_path = suffixed(&out, "_counts.csv");
            let steps_path = suffixed(&out, "_steps.csv");
            std::fs::write(&counts_path, counts)?;
            std::fs::write(&steps_path, steps)?;
            let summary: Vec<String> = Classification::ALL
                .iter()
                .map(|&c| format!("{c} {}", stats.count(c)))
                .collect();
            println!(
                "{} samples at F = {f_target} +/- {window}: {}; wrote {} and {}",
                stats.n_samples,
                summary.join(", "),
                counts_path.display(),
                steps_path.display()
            );
            Ok(EXIT_OK)
        }
    }
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(25.0 / 81.0), "0.308641975309");
        assert_eq!(fmt_num(-2.5e-7), "-2.5e-07");
        assert_eq!(fmt_num(1.5e-4), "0.00015");
        assert_eq!(fmt_num(123456789012345.0), "1.23456789012e+14");
        assert_eq!(fmt_num(0.99999999999999), "1");
    }

    #[test]
    fn grid_endpoints_are_exact() {
        let g = linspace(0.34, 1.0, 67).unwrap();
        assert_eq!(g.len(), 67);
        assert_eq!((g[0], g[66]), (0.34, 1.0));
        assert!((g[1] - 0.35).abs() < 1e-15);
        assert_eq!(linspace(0.5, 0.9, 1).unwrap(), vec![0.5]);
        assert!(linspace(0.5, 0.4, 3).is_err());
        assert!(linspace(0.5, 0.6, 0).is_err());
    }

    #[test]
    fn prefix_suffix() {
        assert_eq!(
            suffixed(Path::new("out/run"), "_counts.csv"),
            PathBuf::from("out/run_counts.csv")
        );
    }

    #[test]
    fn malformed_arguments_are_rejected() {
        assert!(Cli::try_parse_from(["wdistill", "curve", "--points", "x"]).is_err());
        assert!(Cli::try_parse_from(["wdistill", "bogus"]).is_err());
        assert!(Cli::try_parse_from(["wdistill", "threshold", "--channel", "amplitude"]).is_err());
        assert!(Cli::try_parse_from(["wdistill", "random", "--v-placement", "per-copy"]).is_ok());
    }
}
