//! Command-line surface: argument parsing, config-file merging and command
//! dispatch. The binary only maps the outcome to a process exit code.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiments::{
    asym_table, error_bounds_table, fbl_table, linear_grid, partition_table, theta_channels, Scheme,
};
use crate::params::{presets, ChannelParams, ImportanceVector};
use crate::quadrature::QuadratureSpec;
use crate::report::Table;
use crate::validate::{run_all, ValidateOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;
pub const EXIT_IO: i32 = 1;

/// Exit status for an error raised while running a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Argument(_) | Error::Domain(_) => EXIT_USAGE,
        Error::Resource(_) => EXIT_RESOURCE,
        Error::Io(_) => EXIT_IO,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "uep",
    version,
    about = "Power and time splits for layered transmission over Rayleigh fading"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error-probability bounds against the fraction of capacity.
    ErrorBounds(Options),
    /// Asymptotic power-split and time-split optima over a theta sweep.
    Asym(Options),
    /// Finite-blocklength optima over a theta sweep.
    Fbl(Options),
    /// Time-split optima as blocks are merged pairwise, over a sigma2 sweep.
    Partition(Options),
    /// Run the solver self-checks.
    Validate(Options),
}

impl Command {
    fn options(&self) -> &Options {
        match self {
            Command::ErrorBounds(o)
            | Command::Asym(o)
            | Command::Fbl(o)
            | Command::Partition(o)
            | Command::Validate(o) => o,
        }
    }
}

/// Flags shared by every command. Each one can also be given as `key=value`
/// in a `--config` file; flags take precedence.
#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Flat `key=value` file with the same keys as the long flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Per-layer rate in bits per channel use.
    #[arg(long = "R")]
    pub rate: Option<String>,
    /// Single theta value (implies P = 1).
    #[arg(long)]
    pub theta: Option<String>,
    #[arg(long = "theta-min")]
    pub theta_min: Option<String>,
    #[arg(long = "theta-max")]
    pub theta_max: Option<String>,
    #[arg(long = "theta-step")]
    pub theta_step: Option<String>,
    /// Transmit power, used together with --sigma2.
    #[arg(long = "P")]
    pub power: Option<String>,
    /// Mean channel power gain.
    #[arg(long)]
    pub sigma2: Option<String>,
    #[arg(long = "sigma2-min")]
    pub sigma2_min: Option<String>,
    #[arg(long = "sigma2-max")]
    pub sigma2_max: Option<String>,
    #[arg(long = "sigma2-step")]
    pub sigma2_step: Option<String>,
    /// Importance vector as a comma list, summing to one.
    #[arg(long)]
    pub d: Option<String>,
    /// Named importance vector: fig2, fig3 or fig9.
    #[arg(long)]
    pub preset: Option<String>,
    /// Blocklength.
    #[arg(long)]
    pub n: Option<String>,
    /// Expectation rule: gl:ORDER, cl:PANELS:ORDER or mc:SAMPLES:SEED.
    #[arg(long)]
    pub quad: Option<String>,
    /// pds, ora or both.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Mean SNR for error-bounds.
    #[arg(long)]
    pub rho: Option<String>,
    /// Number of rate fractions for error-bounds.
    #[arg(long)]
    pub points: Option<String>,
    /// Seed of the random validation instances.
    #[arg(long)]
    pub seed: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    pub threads: Option<String>,
    /// Coarser default grids and fewer validation instances.
    #[arg(long)]
    pub quick: bool,
    /// Loosen the multiplier tolerance to 0.1 (validate only).
    #[arg(long = "inject-fault")]
    pub inject_fault: bool,
}

const KEYS: &[&str] = &[
    "R",
    "theta",
    "theta-min",
    "theta-max",
    "theta-step",
    "P",
    "sigma2",
    "sigma2-min",
    "sigma2-max",
    "sigma2-step",
    "d",
    "preset",
    "n",
    "quad",
    "scheme",
    "rho",
    "points",
    "seed",
    "out",
    "threads",
    "quick",
    "inject-fault",
];

/// Parses a flat `key=value` file. Blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("config line {} has no `=`", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(Error::Config(format!(
                "unknown config key `{k}` on line {}",
                i + 1
            )));
        }
        map.insert(k.to_string(), v.to_string());
    }
    Ok(map)
}

/// Config-file values overlaid with flag values.
#[derive(Debug, Clone, Default)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    pub fn resolve(opts: &Options) -> Result<Self> {
        let mut map = match &opts.config {
            Some(path) => parse_config(&std::fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("cannot read config {}: {e}", path.display()))
            })?)?,
            None => BTreeMap::new(),
        };
        let flags = [
            ("R", &opts.rate),
            ("theta", &opts.theta),
            ("theta-min", &opts.theta_min),
            ("theta-max", &opts.theta_max),
            ("theta-step", &opts.theta_step),
            ("P", &opts.power),
            ("sigma2", &opts.sigma2),
            ("sigma2-min", &opts.sigma2_min),
            ("sigma2-max", &opts.sigma2_max),
            ("sigma2-step", &opts.sigma2_step),
            ("d", &opts.d),
            ("preset", &opts.preset),
            ("n", &opts.n),
            ("quad", &opts.quad),
            ("scheme", &opts.scheme),
            ("rho", &opts.rho),
            ("points", &opts.points),
            ("seed", &opts.seed),
            ("threads", &opts.threads),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                map.insert(k.to_string(), v.clone());
            }
        }
        if let Some(out) = &opts.out {
            map.insert("out".into(), out.display().to_string());
        }
        if opts.quick {
            map.insert("quick".into(), "true".into());
        }
        if opts.inject_fault {
            map.insert("inject-fault".into(), "true".into());
        }
        Ok(Settings(map))
    }

    pub fn has(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.0
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Config(format!("cannot parse {key} = `{v}`")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        self.get_or(key, false)
    }
}

/// Named importance vectors accepted by `--preset`.
pub fn preset(name: &str) -> Result<ImportanceVector> {
    match name {
        "fig2" | "four-layer" => Ok(presets::four_layer()),
        "fig3" | "eight-layer" => Ok(presets::eight_layer()),
        "fig9" | "sixteen-layer" => Ok(presets::sixteen_layer()),
        _ => Err(Error::Config(format!("unknown preset `{name}`"))),
    }
}

fn importance(s: &Settings, default: &str) -> Result<ImportanceVector> {
    match (s.get::<String>("d")?, s.get::<String>("preset")?) {
        (Some(_), Some(_)) => Err(Error::Config("give either d or preset, not both".into())),
        (Some(list), None) => {
            let d = list
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Config(format!("cannot parse d = `{list}`")))?;
            ImportanceVector::new(d).map_err(|e| Error::Config(e.to_string()))
        }
        (None, Some(name)) => preset(&name),
        (None, None) => preset(default),
    }
}

/// Channel points: one `(P, sigma2)` pair, one `theta`, or a `theta` grid.
fn channels(s: &Settings, rate: f64) -> Result<Vec<ChannelParams>> {
    let theta_keys = ["theta", "theta-min", "theta-max", "theta-step"];
    let has_theta = theta_keys.iter().any(|k| s.has(k));
    if s.has("sigma2") {
        if has_theta {
            return Err(Error::Config(
                "give either sigma2 (with P) or theta, not both".into(),
            ));
        }
        let ch = ChannelParams::new(rate, s.get_or("P", 1.0)?, s.get_or("sigma2", 0.0)?);
        return Ok(vec![ch.map_err(|e| Error::Config(e.to_string()))?]);
    }
    if s.has("P") && s.get::<f64>("P")? != Some(1.0) {
        return Err(Error::Config(
            "theta parameterization fixes P = 1; give sigma2 to change P".into(),
        ));
    }
    let thetas = match s.get::<f64>("theta")? {
        Some(t) => {
            if theta_keys[1..].iter().any(|k| s.has(k)) {
                return Err(Error::Config("give either theta or a theta range".into()));
            }
            vec![t]
        }
        None => {
            let step = if s.flag("quick")? { 0.05 } else { 0.01 };
            linear_grid(
                s.get_or("theta-min", 0.01)?,
                s.get_or("theta-max", 0.99)?,
                s.get_or("theta-step", step)?,
            )?
        }
    };
    theta_channels(rate, &thetas).map_err(|e| Error::Config(e.to_string()))
}

fn quadrature(s: &Settings) -> Result<QuadratureSpec> {
    match s.get::<String>("quad")? {
        Some(q) => q.parse(),
        None => Ok(QuadratureSpec::default()),
    }
}

fn blocklength(s: &Settings) -> Result<Option<u64>> {
    match s.get::<u64>("n")? {
        Some(0) => Err(Error::Config("n must be at least 1".into())),
        n => Ok(n),
    }
}

/// Output of one command invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub code: i32,
    /// Written here instead of stdout when set.
    pub out: Option<PathBuf>,
}

fn table_outcome(table: Table, s: &Settings) -> Result<Outcome> {
    Ok(Outcome {
        text: table.to_csv(),
        code: EXIT_OK,
        out: s.get("out")?,
    })
}

fn cmd_error_bounds(s: &Settings) -> Result<Outcome> {
    let n = blocklength(s)?.unwrap_or(10_000);
    let table = error_bounds_table(n as f64, s.get_or("rho", 3.0)?, s.get_or("points", 100)?)?
        .with_meta("command", "error-bounds");
    table_outcome(table, s)
}

fn cmd_asym(s: &Settings) -> Result<Outcome> {
    let rate = s.get_or("R", 0.1)?;
    let d = importance(s, "fig2")?;
    let scheme: Scheme = s
        .get::<String>("scheme")?
        .map_or(Ok(Scheme::Both), |v| v.parse())?;
    table_outcome(asym_table(&channels(s, rate)?, &d, scheme)?, s)
}

fn cmd_fbl(s: &Settings) -> Result<Outcome> {
    let rate = s.get_or("R", 0.1)?;
    let d = importance(s, "fig2")?;
    let n = blocklength(s)?.ok_or_else(|| Error::Config("fbl needs n".into()))?;
    let quad = quadrature(s)?;
    let table = fbl_table(&channels(s, rate)?, &d, n, &quad.rule()?)?.with_meta("quad", quad);
    table_outcome(table, s)
}

fn cmd_partition(s: &Settings) -> Result<Outcome> {
    let rate = s.get_or("R", 0.1)?;
    let power = s.get_or("P", 1.0)?;
    let d = importance(s, "fig9")?;
    let sigma2s = match s.get::<f64>("sigma2")? {
        Some(v) => vec![v],
        None => linear_grid(
            s.get_or("sigma2-min", 0.5)?,
            s.get_or("sigma2-max", 20.0)?,
            s.get_or("sigma2-step", if s.flag("quick")? { 2.5 } else { 0.5 })?,
        )?,
    };
    if sigma2s.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Config("sigma2 values must be positive".into()));
    }
    let quad = quadrature(s)?;
    let rule = quad.rule()?;
    let n = blocklength(s)?;
    let mut table = partition_table(rate, power, &sigma2s, &d, n.map(|n| (n, &rule)))?;
    if n.is_some() {
        table.push_meta("quad", quad);
    }
    table_outcome(table, s)
}

fn cmd_validate(s: &Settings) -> Result<Outcome> {
    let mut opts = ValidateOptions {
        quick: s.flag("quick")?,
        quadrature: quadrature(s)?,
        ..Default::default()
    };
    opts.seed = s.get_or("seed", opts.seed)?;
    if s.flag("inject-fault")? {
        opts.solver.lambda_tol = 0.1;
    }
    let reports = run_all(&opts)?;
    let mut text = String::new();
    for r in &reports {
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        text.push_str(&format!("{verdict} {}: {}\n", r.name, r.detail));
    }
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.name)
        .collect();
    let code = if failed.is_empty() {
        text.push_str("all suites passed\n");
        EXIT_OK
    } else {
        text.push_str(&format!("failing suites: {}\n", failed.join(", ")));
        EXIT_VALIDATION
    };
    Ok(Outcome {
        text,
        code,
        out: s.get("out")?,
    })
}

/// Resolves settings and runs the command on a pool of `threads` workers.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let s = Settings::resolve(cli.command.options())?;
    let threads: usize = s.get_or("threads", 0)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Resource(format!("cannot start {threads} worker threads: {e}")))?;
    pool.install(|| match &cli.command {
        Command::ErrorBounds(_) => cmd_error_bounds(&s),
        Command::Asym(_) => cmd_asym(&s),
        Command::Fbl(_) => cmd_fbl(&s),
        Command::Partition(_) => cmd_partition(&s),
        Command::Validate(_) => cmd_validate(&s),
    })
}

/// Writes the outcome to its file or to `stdout`.
pub fn emit(outcome: &Outcome, stdout: &mut dyn Write) -> Result<()> {
    match &outcome.out {
        Some(path) => std::fs::write(path, &outcome.text)?,
        None => stdout.write_all(outcome.text.as_bytes())?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Result<Outcome> {
        let mut full = vec!["uep"];
        full.extend_from_slice(args);
        run(&Cli::try_parse_from(full).expect("parses"))
    }

    #[test]
    fn config_parsing() {
        let m = parse_config("# comment\nR = 0.2\n\ntheta-step=0.05\n").unwrap();
        assert_eq!(m["R"], "0.2");
        assert_eq!(m["theta-step"], "0.05");
        assert!(matches!(parse_config("bogus=1"), Err(Error::Config(_))));
        assert!(matches!(parse_config("R 0.2"), Err(Error::Config(_))));
    }

    #[test]
    fn flags_override_the_config_file() {
        let dir = std::env::temp_dir().join(format!("uep-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        std::fs::write(&path, "R=0.3\ntheta=0.2\nscheme=pds\n").unwrap();
        let cfg = path.to_str().unwrap();
        let a = run_args(&["asym", "--config", cfg]).unwrap();
        assert!(a.text.contains("# R=0.3\n"));
        let b = run_args(&["asym", "--config", cfg, "--R", "0.1"]).unwrap();
        assert!(b.text.contains("# R=0.1\n") && b.text.contains("# scheme=pds\n"));
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn usage_errors() {
        for args in [
            &["asym", "--theta", "0.2", "--sigma2", "1"][..],
            &["asym", "--P", "2"],
            &["asym", "--d", "0.3,0.7"],
            &["asym", "--d", "0.6,0.3"],
            &["asym", "--preset", "fig2", "--d", "0.6,0.4"],
            &["asym", "--theta-step=-1"],
            &["fbl", "--theta", "0.2"],
            &["partition", "--d", "0.5,0.3,0.2"],
            &["fbl", "--n", "100", "--quad", "xx:1"],
        ] {
            let code = run_args(args).map(|_| ()).map_err(|e| exit_code(&e));
            assert_eq!(code, Err(EXIT_USAGE), "{args:?}");
        }
        assert!(Cli::try_parse_from(["uep", "asym", "--nope"]).is_err());
    }

    #[test]
    fn sigma2_parameterization_records_both() {
        let o = run_args(&["asym", "--P", "2", "--sigma2", "0.5", "--R", "0.5"]).unwrap();
        let theta = 0.5f64.exp2() - 1.0;
        assert!(o.text.contains("# P=2\n# sigma2=0.5\n"), "{}", o.text);
        let row = o.text.lines().last().unwrap();
        assert!(row.starts_with(&crate::report::format_number(theta)));
    }

    #[test]
    fn output_is_identical_across_thread_counts() {
        let a = run_args(&["asym", "--theta-step", "0.1", "--threads", "1"]).unwrap();
        let b = run_args(&["asym", "--theta-step", "0.1", "--threads", "3"]).unwrap();
        assert_eq!(a.text, b.text);
        let lines: Vec<&str> = a.text.lines().collect();
        let first = lines.iter().position(|l| l.starts_with("theta,")).unwrap();
        let thetas: Vec<f64> = lines[first + 1..]
            .iter()
            .map(|l| l.split(',').next().unwrap().parse().unwrap())
            .collect();
        assert_eq!(thetas.len(), 10);
        assert!(thetas.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn validate_reports_a_fault() {
        let o = run_args(&["validate", "--quick", "--inject-fault"]).unwrap();
        assert_eq!(o.code, EXIT_VALIDATION);
        assert!(o.text.contains("FAIL kkt"), "{}", o.text);
        let last = o.text.lines().last().unwrap();
        assert!(last.starts_with("failing suites:") && last.contains("kkt"));
    }
}
