use clap::{Args, Parser, Subcommand};
use qtd_core::scenarios::{self, ConfigOverrides, ScenarioConfig, ScenarioName};
use qtd_core::selftest::{run_selftest, SelftestOptions};
use qtd_core::{dilation_report, extrema_phi_pi, optimize_gamma_q, Error, FreeDim, Objective, OptimizeRequest};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_SELFTEST: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "qtd", version, about = "Quantum time dilation and emission signatures of moving atoms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the time-dilation factors of a packet pair.
    Dilation(ParamArgs),
    /// Extrema of the quantum factor over θ at φ = π, analytic and numeric.
    Extrema(ParamArgs),
    /// Run a named scenario and write its CSV and JSON files.
    Scenario {
        name: String,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Run every oracle suite.
    Selftest {
        /// Add this times the natural scale of each quantity before comparing.
        #[arg(long, default_value_t = 0.0)]
        perturb: f64,
        #[arg(long, default_value_t = SelftestOptions::default().cases)]
        cases: usize,
        #[arg(long, default_value_t = SelftestOptions::default().seed)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Debug, Default)]
struct ParamArgs {
    /// Mixing angle; accepts expressions such as `pi/4`.
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Relative phase; accepts expressions such as `pi`.
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    phi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    u1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    u2: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    line_ratio: Option<f64>,
    /// JSON file with any of the flag names (underscored) as keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    json: bool,
}

/// A number, or `[k][*]pi[/n]`.
fn parse_angle(s: &str) -> Result<f64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    if let Ok(x) = t.parse::<f64>() {
        return Ok(x);
    }
    let bad = || format!("'{s}' is not a number or an expression like pi/4, 3pi/8, 0.5*pi");
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().map_err(|_| bad())?),
        None => (t.as_str(), 1.0),
    };
    let coeff = num.strip_suffix("pi").ok_or_else(bad)?;
    let coeff = coeff.strip_suffix('*').unwrap_or(coeff);
    let k = match coeff {
        "" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(k * std::f64::consts::PI / den)
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_numeric() { EXIT_NUMERIC } else { EXIT_USAGE },
            message: e.to_string(),
        }
    }
}

fn usage(message: String) -> Failure {
    Failure { code: EXIT_USAGE, message }
}

impl ParamArgs {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            theta: self.theta,
            phi: self.phi,
            u1: self.u1,
            u2: self.u2,
            delta: self.delta,
            epsilon: self.epsilon,
            line_ratio: self.line_ratio,
            grid: self.grid,
            out: self.out.as_ref().map(|p| p.display().to_string()),
            json: self.json.then_some(true),
            ..Default::default()
        }
    }

    /// Config file overridden by flags.
    fn merged(&self) -> Result<ConfigOverrides, Failure> {
        let file = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| usage(format!("reading {}: {e}", p.display())))?;
                ConfigOverrides::from_json(&text)?
            }
            None => ConfigOverrides::default(),
        };
        Ok(file.merged_with(&self.overrides()))
    }

    /// Resolved configuration; `default` names the scenario used when
    /// neither flags nor the file name one.
    fn resolve(&self, name: Option<&str>, default: ScenarioName) -> Result<(ScenarioConfig, ConfigOverrides), Failure> {
        let mut o = self.merged()?;
        if let Some(n) = name {
            o.scenario = Some(n.to_string());
        }
        if o.scenario.is_none() {
            o.scenario = Some(default.as_str().to_string());
        }
        let cfg = ScenarioConfig::resolve(&o)?;
        Ok((cfg, o))
    }
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON value serializes"));
}

fn cmd_dilation(p: &ParamArgs) -> Result<(), Failure> {
    let (cfg, o) = p.resolve(None, ScenarioName::Fig1a)?;
    let spec = cfg.packets;
    let report = dilation_report(&spec)?;
    if o.json.unwrap_or(false) {
        print_json(&json!({"packets": spec, "report": report, "version": qtd_core::VERSION}));
    } else {
        println!("theta            {}", spec.theta);
        println!("phi              {}", spec.phi);
        println!("u1, u2, delta    {}, {}, {}", spec.u1, spec.u2, spec.delta);
        println!("gamma_c_inv      {:.16e}", report.gamma_c_inv);
        println!("gamma_c_inv (2nd moment) {:.16e}", report.gamma_c_inv_second_moment);
        println!("gamma_q_inv      {:.16e}", report.gamma_q_inv);
        println!("delta_q          {:.16e}", report.delta_q);
        println!("mean clock rate  {:.16e}", report.mean_clock_rate);
    }
    Ok(())
}

fn cmd_extrema(p: &ParamArgs) -> Result<(), Failure> {
    let (cfg, o) = p.resolve(None, ScenarioName::Fig1c)?;
    let analytic = extrema_phi_pi(&cfg.packets)?;
    if let Some(w) = &analytic.warning {
        eprintln!("warning: {w}");
    }
    let spec = qtd_core::PacketPairSpec { phi: std::f64::consts::PI, ..cfg.packets };
    let numeric: Vec<_> = [Objective::Maximize, Objective::Minimize]
        .into_iter()
        .map(|obj| optimize_gamma_q(&OptimizeRequest::new(spec, vec![FreeDim::Theta], obj)))
        .collect::<Result<_, _>>()?;
    if o.json.unwrap_or(false) {
        print_json(&json!({"analytic": analytic, "numeric": numeric, "version": qtd_core::VERSION}));
    } else {
        for (label, a, n) in [("max", &analytic.extrema[0], &numeric[0]), ("min", &analytic.extrema[1], &numeric[1])] {
            println!("{label}  analytic theta {:.12} value {:.12e}", a.theta_star, a.value);
            println!("{label}  numeric  theta {:.12} value {:.12e}", n.theta_star, n.value);
        }
    }
    Ok(())
}

fn cmd_scenario(name: &str, p: &ParamArgs) -> Result<(), Failure> {
    let parsed: ScenarioName = name.parse()?;
    let (cfg, o) = p.resolve(Some(parsed.as_str()), parsed)?;
    for w in cfg.atom.warnings() {
        eprintln!("warning: {w}");
    }
    let run = scenarios::run(&cfg)?;
    let dir = PathBuf::from(o.out.clone().unwrap_or_else(|| "out".into()));
    let paths = scenarios::write_run(&dir, &run, &cfg)?;
    if o.json.unwrap_or(false) {
        let files: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
        print_json(&json!({"scenario": parsed, "files": files, "summary": run.summary}));
    } else {
        for path in &paths {
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn cmd_selftest(perturb: f64, cases: usize, seed: u64, as_json: bool) -> Result<(), Failure> {
    let report = run_selftest(&SelftestOptions { perturb, seed, cases });
    if as_json {
        print_json(&serde_json::to_value(&report).expect("report serializes"));
    } else {
        for c in &report.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            println!("{status}  {}/{}  cases={} worst_ratio={:.3e}", c.suite, c.name, c.cases, c.worst_ratio);
            if let Some(d) = &c.detail {
                println!("      {d}");
            }
        }
    }
    if report.passed {
        Ok(())
    } else {
        let names: Vec<String> = report.failures().iter().map(|c| format!("{}/{}", c.suite, c.name)).collect();
        Err(Failure {
            code: EXIT_SELFTEST,
            message: format!("failing checks: {}", names.join(", ")),
        })
    }
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("QTD_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| usage(format!("QTD_THREADS = '{v}' must be a positive integer")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| match &cli.command {
        Command::Dilation(p) => cmd_dilation(p),
        Command::Extrema(p) => cmd_extrema(p),
        Command::Scenario { name, params } => cmd_scenario(name, params),
        Command::Selftest { perturb, cases, seed, json } => cmd_selftest(*perturb, *cases, *seed, *json),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert_eq!(parse_angle("pi/4").unwrap(), PI / 4.0);
        assert_eq!(parse_angle("3pi/8").unwrap(), 3.0 * PI / 8.0);
        assert_eq!(parse_angle("0.5*pi").unwrap(), 0.5 * PI);
        assert_eq!(parse_angle("PI").unwrap(), PI);
        assert!(parse_angle("tau").is_err());
    }
}
