//! Command-line front end: argument and config-file handling, data loading
//! and the subcommands behind the `ordinal-risk` binary.

pub mod load;
pub mod report;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::data::{
    estimate_gaussian_with, project, Breakpoints, CovarianceEstimator, Dataset, GaussianEstimates, Norm, RiskSpec,
};
use crate::empirical::{cross_validate, empirical_interval_risk, simulate_gaussian_pair, CvConfig, CvMethod, CvReport};
use crate::error::{Error, Result};
use crate::logistic::{fit_lr, LogisticFit};
use crate::org::{fit_org, OrgFit, PenaltyConfig, SolverConfig};
use crate::risk::{assess, feasibility_bounds, left_ray_risk, solve_breakpoints, BreakpointFit, SequentialOutcome};
use crate::special::ToleranceConfig;

pub use load::{
    load_csv, load_csv_reader, load_wdbc, parse_features, DropReport, FeatureSpec, LoadConfig, Transform, WDBC_CSV,
    WDBC_FEATURES,
};
use report::{num, yes_no, Table};

#[derive(Debug, Parser)]
#[command(
    name = "ordinal-risk",
    version,
    about = "Ordinal risk-group classification with interval risk targets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub opts: GlobalOpts,
}

/// Options shared by every subcommand. Unset flags fall back to the config
/// file, then to the defaults (the bundled WDBC data).
#[derive(Debug, Default, Clone, Args)]
pub struct GlobalOpts {
    /// TOML file with any of the long option names as keys (snake_case).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// CSV input; the bundled WDBC data when omitted.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true)]
    pub label_col: Option<String>,
    /// Label token mapped to class 1.
    #[arg(long, global = true)]
    pub positive: Option<String>,
    /// Comma list of `column[:identity|log]` and `intercept`.
    #[arg(long, global = true)]
    pub features: Option<String>,
    #[arg(long, global = true)]
    pub delimiter: Option<char>,
    /// Target risk levels, comma separated and strictly increasing.
    #[arg(long, global = true)]
    pub r: Option<String>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// euclidean, squared or max.
    #[arg(long, global = true)]
    pub norm: Option<String>,
    /// marginal or pooled.
    #[arg(long, global = true)]
    pub covariance: Option<String>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true)]
    pub starts: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub min_gap: Option<f64>,
    #[arg(long, global = true)]
    pub holdout: Option<f64>,
    #[arg(long, global = true)]
    pub repeats: Option<usize>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Text,
    Json,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Logistic regression with its breakpoints and interval risks.
    FitLr,
    /// Constrained, penalized fit meeting the risk targets.
    FitOrg,
    /// Breakpoints for given coefficients (default: the logistic fit).
    Breakpoints(BetaArgs),
    /// Boundary conditions necessary for zero deviation.
    Feasibility(FeasibilityArgs),
    /// Repeated holdout validation of observed group rates.
    Crossval(CrossvalArgs),
    /// CSV curves of left-ray risk and per-class score samples.
    FigureData(FigureArgs),
    /// Simulated scores from the fitted Gaussian pair against closed-form risks.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct BetaArgs {
    /// Coefficients, comma separated, in feature order.
    #[arg(long)]
    pub beta: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct FeasibilityArgs {
    #[arg(long)]
    pub beta: Option<String>,
    /// Breakpoints to check instead of the fitted ones.
    #[arg(long)]
    pub tau: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct CrossvalArgs {
    #[arg(long, value_enum, default_value = "both")]
    pub method: MethodChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    Lr,
    Org,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub mu0: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub mu1: f64,
    #[arg(long, default_value_t = 0.2)]
    pub p: f64,
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    /// Also fit the constrained model and emit its scores.
    #[arg(long)]
    pub with_org: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub label_col: Option<String>,
    pub positive: Option<String>,
    pub features: Option<String>,
    pub delimiter: Option<char>,
    pub r: Option<RValue>,
    pub epsilon: Option<f64>,
    pub norm: Option<String>,
    pub covariance: Option<String>,
    pub gamma: Option<f64>,
    pub starts: Option<usize>,
    pub seed: Option<u64>,
    pub min_gap: Option<f64>,
    pub holdout: Option<f64>,
    pub repeats: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RValue {
    List(Vec<f64>),
    Text(String),
}

/// Effective settings of a run, echoed into every result file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub label_col: String,
    pub positive: String,
    pub features: String,
    pub delimiter: char,
    pub r: Vec<f64>,
    pub epsilon: f64,
    pub norm: Norm,
    pub covariance: CovarianceEstimator,
    pub gamma: f64,
    /// `None` selects 200 for fitting and 6 per repeat for cross-validation.
    pub starts: Option<usize>,
    pub seed: u64,
    pub min_gap: f64,
    pub holdout: f64,
    pub repeats: usize,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
}

pub const DEFAULT_STARTS: usize = 200;
pub const DEFAULT_CV_STARTS: usize = 6;

impl RunConfig {
    pub fn resolve(opts: &GlobalOpts) -> Result<Self> {
        let file = match &opts.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| Error::InvalidInput(format!("config {}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let r = match (&opts.r, &file.r) {
            (Some(s), _) | (None, Some(RValue::Text(s))) => parse_list(s, "r")?,
            (None, Some(RValue::List(v))) => v.clone(),
            (None, None) => vec![0.1, 0.5, 0.9],
        };
        let norm = opts
            .norm
            .clone()
            .or(file.norm)
            .map(|s| s.parse())
            .transpose()?
            .unwrap_or_default();
        let covariance = opts
            .covariance
            .clone()
            .or(file.covariance)
            .map(|s| s.parse())
            .transpose()?
            .unwrap_or(CovarianceEstimator::Marginal);
        let cfg = Self {
            input: opts.input.clone().or(file.input),
            label_col: opts
                .label_col
                .clone()
                .or(file.label_col)
                .unwrap_or_else(|| "diagnosis".into()),
            positive: opts.positive.clone().or(file.positive).unwrap_or_else(|| "M".into()),
            features: opts
                .features
                .clone()
                .or(file.features)
                .unwrap_or_else(|| WDBC_FEATURES.into()),
            delimiter: opts.delimiter.or(file.delimiter).unwrap_or(','),
            r,
            epsilon: opts.epsilon.or(file.epsilon).unwrap_or(1e-7),
            norm,
            covariance,
            gamma: opts.gamma.or(file.gamma).unwrap_or(10.0),
            starts: opts.starts.or(file.starts),
            seed: opts.seed.or(file.seed).unwrap_or(0),
            min_gap: opts.min_gap.or(file.min_gap).unwrap_or(1e-4),
            holdout: opts.holdout.or(file.holdout).unwrap_or(0.1),
            repeats: opts.repeats.or(file.repeats).unwrap_or(500),
            out_dir: opts
                .out_dir
                .clone()
                .or(file.out_dir)
                .unwrap_or_else(|| PathBuf::from("out")),
            format: opts.format.or(file.format).unwrap_or(OutputFormat::Both),
        };
        cfg.spec()?;
        if !cfg.delimiter.is_ascii() {
            return Err(Error::InvalidInput(format!(
                "delimiter '{}' is not ASCII",
                cfg.delimiter
            )));
        }
        Ok(cfg)
    }

    pub fn spec(&self) -> Result<RiskSpec> {
        RiskSpec::new(self.r.clone(), self.epsilon, self.norm)
    }

    pub fn load_config(&self) -> Result<LoadConfig> {
        Ok(LoadConfig {
            label_col: self.label_col.clone(),
            positive: self.positive.clone(),
            features: parse_features(&self.features)?,
            delimiter: self.delimiter as u8,
        })
    }

    pub fn solver(&self, starts: usize) -> SolverConfig {
        SolverConfig {
            n_starts: starts,
            seed: self.seed,
            epsilon: self.epsilon,
            min_gap: self.min_gap,
            covariance: self.covariance,
            ..SolverConfig::default()
        }
    }

    pub fn penalty(&self) -> Result<PenaltyConfig> {
        PenaltyConfig::new(self.gamma)
    }
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("cannot parse '{t}' in --{what}")))
        })
        .collect()
}

/// Everything a command produces.
#[derive(Debug, Default)]
pub struct Output {
    pub report: String,
    pub result: serde_json::Value,
    pub csv: Vec<(String, String)>,
}

impl Output {
    /// Writes `report.txt`, `result.json` and the CSV files into `dir`.
    pub fn write(&self, dir: &Path, format: OutputFormat) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let put = |name: &str, text: &str| -> Result<()> {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        };
        if format != OutputFormat::Json {
            put("report.txt", &self.report)?;
        }
        if format != OutputFormat::Text {
            let mut json = serde_json::to_string_pretty(&self.result).map_err(|e| Error::Io(e.to_string()))?;
            json.push('\n');
            put("result.json", &json)?;
        }
        for (name, text) in &self.csv {
            put(name, text)?;
        }
        Ok(())
    }
}

/// Runs a parsed command line, writes its files and returns the output.
pub fn run(cli: &Cli) -> Result<Output> {
    let cfg = RunConfig::resolve(&cli.opts)?;
    let out = execute(&cli.command, &cfg)?;
    out.write(&cfg.out_dir, cfg.format)?;
    Ok(out)
}

pub fn execute(command: &Command, cfg: &RunConfig) -> Result<Output> {
    match command {
        Command::FitLr => fit_lr_cmd(cfg),
        Command::FitOrg => fit_org_cmd(cfg),
        Command::Breakpoints(a) => breakpoints_cmd(cfg, a),
        Command::Feasibility(a) => feasibility_cmd(cfg, a),
        Command::Crossval(a) => crossval_cmd(cfg, a),
        Command::FigureData(a) => figure_cmd(cfg, a),
        Command::Simulate(a) => simulate_cmd(cfg, a),
    }
}

struct Loaded {
    data: Dataset,
    drops: DropReport,
    est: GaussianEstimates,
}

fn load(cfg: &RunConfig) -> Result<Loaded> {
    let lc = cfg.load_config()?;
    let (data, drops) = match &cfg.input {
        Some(path) => load_csv(path, &lc)?,
        None => load_csv_reader(WDBC_CSV.as_bytes(), &lc)?,
    };
    log::info!("{drops}");
    let est = estimate_gaussian_with(&data, cfg.covariance)?;
    Ok(Loaded { data, drops, est })
}

fn lr_fit(data: &Dataset) -> Result<LogisticFit> {
    fit_lr(data, &ToleranceConfig::new(1e-9, 0.0, 200)?)
}

fn inner_tol() -> ToleranceConfig {
    SolverConfig::default().inner
}

fn beta_or_lr(beta: &Option<String>, loaded: &Loaded) -> Result<(Vec<f64>, Option<LogisticFit>)> {
    match beta {
        Some(s) => {
            let b = parse_list(s, "beta")?;
            if b.len() != loaded.data.n_features() {
                return Err(Error::DimensionMismatch {
                    expected: loaded.data.n_features(),
                    got: b.len(),
                });
            }
            Ok((b, None))
        }
        None => {
            let fit = lr_fit(&loaded.data)?;
            Ok((fit.beta.clone(), Some(fit)))
        }
    }
}

fn header(cfg: &RunConfig, loaded: &Loaded) -> String {
    let source = cfg
        .input
        .as_ref()
        .map_or_else(|| "bundled WDBC".to_string(), |p| p.display().to_string());
    format!(
        "data: {source}; {}\nrisk levels r = ({}), epsilon = {:e}, norm = {:?}, covariance = {:?}\n\n",
        loaded.drops,
        cfg.r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "),
        cfg.epsilon,
        cfg.norm,
        cfg.covariance
    )
}

/// One model column of the coefficient/breakpoint table.
struct Column {
    name: String,
    beta: Vec<f64>,
    log_likelihood: f64,
    fit: BreakpointFit,
    min_gap: f64,
}

impl Column {
    fn degenerate(&self) -> bool {
        self.fit.breakpoints.min_gap().is_some_and(|g| g < self.min_gap)
    }

    fn squared_ird(&self, r: &[f64]) -> f64 {
        self.fit
            .assessment
            .risks
            .iter()
            .zip(r)
            .map(|(a, b)| (a - b).powi(2))
            .sum()
    }
}

fn model_table(names: &[String], cols: &[Column], cfg: &RunConfig) -> String {
    let heads: Vec<&str> = cols.iter().map(|c| c.name.as_str()).collect();
    let mut t = Table::new(&heads);
    for (j, name) in names.iter().enumerate() {
        t.row(name.clone(), cols.iter().map(|c| num(c.beta[j])).collect());
    }
    t.row("log-likelihood", cols.iter().map(|c| num(c.log_likelihood)).collect());
    let k = cfg.r.len() - 1;
    for i in 0..k {
        t.row(
            format!("tau_{}", i + 1),
            cols.iter().map(|c| num(c.fit.breakpoints.tau()[i])).collect(),
        );
    }
    for i in 0..=k {
        t.row(
            format!("P(Y=1 | group {}) [r = {}]", i + 1, cfg.r[i]),
            cols.iter().map(|c| num(c.fit.assessment.risks[i])).collect(),
        );
    }
    t.row(
        format!("IRD ({})", format!("{:?}", cfg.norm).to_lowercase()),
        cols.iter().map(|c| num(c.fit.assessment.ird)).collect(),
    );
    t.row(
        "IRD (squared euclidean)",
        cols.iter().map(|c| num(c.squared_ird(&cfg.r))).collect(),
    );
    t.row(
        "min interior gap",
        cols.iter()
            .map(|c| c.fit.breakpoints.min_gap().map_or("-".into(), num))
            .collect(),
    );
    t.row(
        "feasible",
        cols.iter().map(|c| yes_no(c.fit.assessment.feasible)).collect(),
    );
    t.row("degenerate", cols.iter().map(|c| yes_no(c.degenerate())).collect());
    t.render()
}

fn column_json(c: &Column, r: &[f64]) -> serde_json::Value {
    json!({
        "beta": c.beta,
        "log_likelihood": c.log_likelihood,
        "tau": c.fit.breakpoints.tau(),
        "tau_probability": c.fit.breakpoints.to_probability(),
        "risks": c.fit.assessment.risks,
        "odds": c.fit.assessment.odds,
        "ird": c.fit.assessment.ird,
        "ird_squared": c.squared_ird(r),
        "feasible": c.fit.assessment.feasible,
        "degenerate": c.degenerate(),
        "min_gap": c.fit.breakpoints.min_gap(),
        "sequential": c.fit.sequential,
    })
}

fn lr_column(loaded: &Loaded, cfg: &RunConfig, fit: &LogisticFit) -> Result<Column> {
    let spec = cfg.spec()?;
    let g = project(&loaded.est, &fit.beta)?;
    Ok(Column {
        name: "LR".into(),
        beta: fit.beta.clone(),
        log_likelihood: fit.log_likelihood,
        fit: solve_breakpoints(&g, &spec, &inner_tol())?,
        min_gap: cfg.min_gap,
    })
}

fn fit_lr_cmd(cfg: &RunConfig) -> Result<Output> {
    let loaded = load(cfg)?;
    let fit = lr_fit(&loaded.data)?;
    let col = lr_column(&loaded, cfg, &fit)?;
    let mut report = header(cfg, &loaded);
    report.push_str(&model_table(
        loaded.data.feature_names(),
        std::slice::from_ref(&col),
        cfg,
    ));
    if fit.separation {
        report.push_str("\nwarning: the data look separable; coefficients are the last Newton iterate\n");
    }
    let result = json!({
        "command": "fit-lr",
        "config": cfg,
        "data": loaded.drops,
        "feature_names": loaded.data.feature_names(),
        "converged": fit.converged,
        "separation": fit.separation,
        "iterations": fit.iterations,
        "lr": column_json(&col, &cfg.r),
    });
    Ok(Output {
        report,
        result,
        csv: Vec::new(),
    })
}

fn org_column(fit: &OrgFit, loaded: &Loaded, cfg: &RunConfig) -> Result<Column> {
    let g = project(&loaded.est, &fit.best.beta)?;
    let bp = solve_breakpoints(&g, &cfg.spec()?, &inner_tol())?;
    Ok(Column {
        name: "ORG".into(),
        beta: fit.best.beta.clone(),
        log_likelihood: fit.best.log_likelihood,
        fit: bp,
        min_gap: cfg.min_gap,
    })
}

fn fit_org_cmd(cfg: &RunConfig) -> Result<Output> {
    let loaded = load(cfg)?;
    let spec = cfg.spec()?;
    let solver = cfg.solver(cfg.starts.unwrap_or(DEFAULT_STARTS));
    let fit = fit_org(&loaded.data, &spec, &cfg.penalty()?, &solver)?;
    let lr = lr_column(&loaded, cfg, &fit.lr)?;
    let org = org_column(&fit, &loaded, cfg)?;
    let mut report = header(cfg, &loaded);
    report.push_str(&format!(
        "gamma = {}, starts = {}, seed = {}, min_gap = {}\n\n",
        cfg.gamma, solver.n_starts, cfg.seed, cfg.min_gap
    ));
    report.push_str(&model_table(loaded.data.feature_names(), &[lr, org], cfg));
    let best = &fit.best;
    report.push_str(&format!(
        "\npenalty {} (objective {}), best start {}, {} of {} starts feasible and non-degenerate\n",
        num(best.penalty_value),
        num(best.objective),
        best.start_index,
        fit.starts.iter().filter(|s| s.feasible && !s.degenerate).count(),
        fit.starts.len()
    ));
    if !best.feasible {
        report.push_str("no start reached the deviation tolerance; the reported solution is the closest found\n");
    }
    let lr_col = lr_column(&loaded, cfg, &fit.lr)?;
    let org_col = org_column(&fit, &loaded, cfg)?;
    let result = json!({
        "command": "fit-org",
        "config": cfg,
        "data": loaded.drops,
        "feature_names": loaded.data.feature_names(),
        "lr": column_json(&lr_col, &cfg.r),
        "org": column_json(&org_col, &cfg.r),
        "solution": best,
        "starts": fit.starts,
    });
    Ok(Output {
        report,
        result,
        csv: Vec::new(),
    })
}

fn breakpoints_cmd(cfg: &RunConfig, a: &BetaArgs) -> Result<Output> {
    let loaded = load(cfg)?;
    let spec = cfg.spec()?;
    let (beta, lr) = beta_or_lr(&a.beta, &loaded)?;
    let g = project(&loaded.est, &beta)?;
    let fit = solve_breakpoints(&g, &spec, &inner_tol())?;
    let col = Column {
        name: if lr.is_some() { "LR".into() } else { "given".into() },
        log_likelihood: crate::logistic::log_likelihood(&beta, &loaded.data)?,
        beta,
        fit,
        min_gap: cfg.min_gap,
    };
    let mut report = header(cfg, &loaded);
    report.push_str(&format!(
        "projected score: mu0 = {}, mu1 = {}, sigma = {}, p = {}\n\n",
        num(g.mu0),
        num(g.mu1),
        num(g.sigma),
        num(g.p)
    ));
    report.push_str(&model_table(
        loaded.data.feature_names(),
        std::slice::from_ref(&col),
        cfg,
    ));
    match &col.fit.sequential {
        SequentialOutcome::Matched { residual, .. } => report.push_str(&format!(
            "\nsequential matching succeeded; last-group residual {}\n",
            num(*residual)
        )),
        SequentialOutcome::Infeasible(step) => report.push_str(&format!("\nsequential matching stopped: {step}\n")),
    }
    let result = json!({
        "command": "breakpoints",
        "config": cfg,
        "projection": g,
        "model": column_json(&col, &cfg.r),
    });
    Ok(Output {
        report,
        result,
        csv: Vec::new(),
    })
}

fn feasibility_cmd(cfg: &RunConfig, a: &FeasibilityArgs) -> Result<Output> {
    let loaded = load(cfg)?;
    let spec = cfg.spec()?;
    let (beta, _) = beta_or_lr(&a.beta, &loaded)?;
    let g = project(&loaded.est, &beta)?;
    let tau = match &a.tau {
        Some(s) => Breakpoints::new(parse_list(s, "tau")?)?,
        None => solve_breakpoints(&g, &spec, &inner_tol())?.breakpoints,
    };
    let rep = feasibility_bounds(&g, &tau, &spec);
    let assessment = assess(&g, &tau, &spec)?;
    let mut t = Table::new(&["boundary", "posterior", "r_i", "LR", "LR bound", "holds"]);
    for c in &rep.checks {
        t.row(
            format!("interval {}", c.interval),
            vec![
                num(c.boundary),
                num(c.lhs),
                num(c.rhs),
                num(c.lr_lhs),
                num(c.lr_rhs),
                yes_no(c.satisfied),
            ],
        );
    }
    let mut report = header(cfg, &loaded);
    report.push_str(&t.render());
    report.push_str(&format!(
        "\nnecessary conditions {}; IRD at these breakpoints {} ({})\n",
        if rep.all_satisfied() { "hold" } else { "fail" },
        num(assessment.ird),
        if assessment.feasible { "feasible" } else { "infeasible" }
    ));
    let result = json!({
        "command": "feasibility",
        "config": cfg,
        "beta": beta,
        "tau": tau.tau(),
        "report": rep,
        "assessment": assessment,
    });
    Ok(Output {
        report,
        result,
        csv: Vec::new(),
    })
}

fn cv_lines(rep: &CvReport) -> Vec<String> {
    let rates = rep
        .pooled
        .rates
        .iter()
        .map(|r| r.map_or("-".into(), |v| format!("{:.4}%", 100.0 * v)))
        .collect::<Vec<_>>()
        .join(", ");
    vec![
        format!("pooled rates ({rates})"),
        format!(
            "pooled IRD {} (squared {})",
            num(rep.pooled_ird_euclidean),
            num(rep.pooled_ird_squared)
        ),
        format!(
            "per-repeat squared IRD mean {} sd {}; failed repeats {}; empty groups {}",
            rep.ird_squared.map_or("-".into(), |s| num(s.mean)),
            rep.ird_squared.map_or("-".into(), |s| num(s.std)),
            rep.failed,
            rep.empty_groups
        ),
    ]
}

fn crossval_cmd(cfg: &RunConfig, a: &CrossvalArgs) -> Result<Output> {
    let loaded = load(cfg)?;
    let spec = cfg.spec()?;
    let cv = CvConfig {
        holdout: cfg.holdout,
        repeats: cfg.repeats,
        seed: cfg.seed,
        ..CvConfig::default()
    };
    let solver = cfg.solver(cfg.starts.unwrap_or(DEFAULT_CV_STARTS));
    let methods: &[CvMethod] = match a.method {
        MethodChoice::Lr => &[CvMethod::Lr],
        MethodChoice::Org => &[CvMethod::Org],
        MethodChoice::Both => &[CvMethod::Lr, CvMethod::Org],
    };
    let mut report = header(cfg, &loaded);
    report.push_str(&format!(
        "holdout {}, repeats {}, seed {}, ORG starts per repeat {}\n",
        cv.holdout, cv.repeats, cv.seed, solver.n_starts
    ));
    let mut results = serde_json::Map::new();
    let mut csv = String::from("method,repeat,failure,ird_squared,ird_euclidean,empty_groups\n");
    for &m in methods {
        let rep = cross_validate(&loaded.data, &spec, m, &cfg.penalty()?, &solver, &cv)?;
        let name = match m {
            CvMethod::Lr => "lr",
            CvMethod::Org => "org",
        };
        report.push_str(&format!("\n{}\n", name.to_uppercase()));
        for l in cv_lines(&rep) {
            report.push_str(&format!("  {l}\n"));
        }
        for r in &rep.records {
            csv.push_str(&format!(
                "{name},{},{},{},{},{}\n",
                r.repeat,
                r.failure.as_deref().unwrap_or("").replace(',', ";"),
                r.ird_squared.map_or(String::new(), |v| v.to_string()),
                r.ird_euclidean.map_or(String::new(), |v| v.to_string()),
                r.empty_groups
            ));
        }
        results.insert(
            name.into(),
            serde_json::to_value(&rep).map_err(|e| Error::Io(e.to_string()))?,
        );
    }
    let result = json!({
        "command": "crossval",
        "config": cfg,
        "results": results,
    });
    Ok(Output {
        report,
        result,
        csv: vec![("crossval_repeats.csv".into(), csv)],
    })
}

/// `((sigma1, sigma0), [(x, Q(x))])`.
pub type Curve = ((f64, f64), Vec<(f64, f64)>);

/// Left-ray risk curves for the three variance settings.
pub fn left_ray_curves(mu0: f64, mu1: f64, p: f64, x_min: f64, x_max: f64, step: f64) -> Result<Vec<Curve>> {
    if !(step > 0.0) || !(x_max > x_min) {
        return Err(Error::InvalidInput(
            "curve grid needs x_min < x_max and step > 0".into(),
        ));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidInput(format!("prior must lie in (0, 1), got {p}")));
    }
    let n = ((x_max - x_min) / step).round() as usize;
    Ok([(4.0, 1.0), (2.0, 2.0), (1.0, 4.0)]
        .into_iter()
        .map(|(s1, s0)| {
            let pts = (0..=n)
                .map(|i| {
                    let x = x_min + i as f64 * step;
                    (x, left_ray_risk(mu0, s0, mu1, s1, p, x))
                })
                .collect();
            ((s1, s0), pts)
        })
        .collect())
}

fn scores_csv(data: &Dataset, beta: &[f64]) -> Result<String> {
    let mut s = String::from("score,label\n");
    for (v, y) in data.scores(beta)?.iter().zip(data.labels()) {
        s.push_str(&format!("{v},{y}\n"));
    }
    Ok(s)
}

fn tau_csv(tau: &Breakpoints) -> String {
    let mut s = String::from("index,tau\n");
    for (i, t) in tau.tau().iter().enumerate() {
        s.push_str(&format!("{},{t}\n", i + 1));
    }
    s
}

fn figure_cmd(cfg: &RunConfig, a: &FigureArgs) -> Result<Output> {
    let curves = left_ray_curves(a.mu0, a.mu1, a.p, a.x_min, a.x_max, a.step)?;
    let mut csv = Vec::new();
    let mut report = format!(
        "left-ray risk Q(x) = P(Y=1 | score <= x), mu0 = {}, mu1 = {}, p = {}\n\n",
        a.mu0, a.mu1, a.p
    );
    let mut t = Table::new(&["Q(-4)", "Q(0)", "Q(4)", "monotone"]);
    let mut summary = Vec::new();
    for ((s1, s0), pts) in &curves {
        let name = format!("left_ray_sigma1_{s1}_sigma0_{s0}.csv");
        let mut body = String::from("x,q\n");
        for (x, q) in pts {
            body.push_str(&format!("{x},{q}\n"));
        }
        let monotone = pts.windows(2).all(|w| w[1].1 >= w[0].1);
        let q = |x: f64| left_ray_risk(a.mu0, *s0, a.mu1, *s1, a.p, x);
        t.row(
            format!("sigma1 = {s1}, sigma0 = {s0}"),
            vec![num(q(-4.0)), num(q(0.0)), num(q(4.0)), yes_no(monotone)],
        );
        summary.push(json!({"sigma1": s1, "sigma0": s0, "file": name, "monotone": monotone}));
        csv.push((name, body));
    }
    report.push_str(&t.render());

    let loaded = load(cfg)?;
    let spec = cfg.spec()?;
    let lr = lr_fit(&loaded.data)?;
    let lr_tau = solve_breakpoints(&project(&loaded.est, &lr.beta)?, &spec, &inner_tol())?.breakpoints;
    csv.push(("scores_lr.csv".into(), scores_csv(&loaded.data, &lr.beta)?));
    csv.push(("tau_lr.csv".into(), tau_csv(&lr_tau)));
    let mut models = json!({"lr": {"beta": lr.beta, "tau": lr_tau.tau()}});
    if a.with_org {
        let fit = fit_org(
            &loaded.data,
            &spec,
            &cfg.penalty()?,
            &cfg.solver(cfg.starts.unwrap_or(DEFAULT_STARTS)),
        )?;
        csv.push(("scores_org.csv".into(), scores_csv(&loaded.data, &fit.best.beta)?));
        csv.push(("tau_org.csv".into(), tau_csv(&fit.best.tau)));
        models["org"] = json!({"beta": fit.best.beta, "tau": fit.best.tau.tau()});
    }
    report.push_str(&format!(
        "\nscore samples written for {} model(s); breakpoints in tau_*.csv\n",
        if a.with_org { 2 } else { 1 }
    ));
    let result = json!({
        "command": "figure-data",
        "config": cfg,
        "curves": summary,
        "models": models,
        "files": csv.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
    });
    Ok(Output { report, result, csv })
}

fn simulate_cmd(cfg: &RunConfig, a: &SimulateArgs) -> Result<Output> {
    if a.n == 0 {
        return Err(Error::InvalidInput("--n must be at least 1".into()));
    }
    let loaded = load(cfg)?;
    let spec = cfg.spec()?;
    let (beta, _) = beta_or_lr(&a.beta, &loaded)?;
    let g = project(&loaded.est, &beta)?;
    let fit = solve_breakpoints(&g, &spec, &inner_tol())?;
    let (scores, labels) = simulate_gaussian_pair(&g, a.n, cfg.seed);
    let emp = empirical_interval_risk(&scores, &labels, &fit.breakpoints)?;
    let mut t = Table::new(&["closed form", "simulated", "count", "z"]);
    for i in 0..spec.groups() {
        let r = fit.assessment.risks[i];
        let n = emp.counts[i];
        let (rate, z) = match emp.rates[i] {
            Some(v) if n > 0 && r > 0.0 && r < 1.0 => (num(v), num((v - r) / (r * (1.0 - r) / n as f64).sqrt())),
            Some(v) => (num(v), "-".into()),
            None => ("-".into(), "-".into()),
        };
        t.row(format!("group {}", i + 1), vec![num(r), rate, n.to_string(), z]);
    }
    let mut report = format!(
        "{} draws from the projected Gaussian pair (mu0 = {}, mu1 = {}, sigma = {}, p = {}), seed {}\n\n",
        a.n,
        num(g.mu0),
        num(g.mu1),
        num(g.sigma),
        num(g.p),
        cfg.seed
    );
    report.push_str(&t.render());
    let mut body = String::from("score,label\n");
    for (s, y) in scores.iter().zip(&labels) {
        body.push_str(&format!("{s},{y}\n"));
    }
    let result = json!({
        "command": "simulate",
        "config": cfg,
        "projection": g,
        "tau": fit.breakpoints.tau(),
        "closed_form": fit.assessment.risks,
        "simulated": emp,
    });
    Ok(Output {
        report,
        result,
        csv: vec![("simulated.csv".into(), body)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("ordinal-risk").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn defaults_and_precedence() {
        let cli = parse(&["fit-lr"]);
        let cfg = RunConfig::resolve(&cli.opts).unwrap();
        assert_eq!(cfg.r, vec![0.1, 0.5, 0.9]);
        assert_eq!(cfg.covariance, CovarianceEstimator::Marginal);
        assert_eq!(cfg.positive, "M");

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "r = [0.2, 0.5, 0.8]\ngamma = 3.0\nseed = 9\n").unwrap();
        let p = path.to_str().unwrap();
        let cfg = RunConfig::resolve(&parse(&["fit-org", "--config", p, "--seed", "4"]).opts).unwrap();
        assert_eq!(cfg.r, vec![0.2, 0.5, 0.8]);
        assert_eq!(cfg.gamma, 3.0);
        assert_eq!(cfg.seed, 4);

        std::fs::write(&path, "unknown_key = 1\n").unwrap();
        assert!(RunConfig::resolve(&parse(&["fit-lr", "--config", p]).opts).is_err());
    }

    #[test]
    fn invalid_risk_levels_rejected() {
        assert!(RunConfig::resolve(&parse(&["fit-lr", "--r", "0.5,0.2"]).opts).is_err());
        assert!(RunConfig::resolve(&parse(&["fit-lr", "--r", "0.1,x"]).opts).is_err());
        assert!(RunConfig::resolve(&parse(&["fit-lr", "--epsilon", "0"]).opts).is_err());
    }

    #[test]
    fn figure_curves() {
        let c = left_ray_curves(-1.0, 1.0, 0.2, -10.0, 10.0, 0.05).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c[0].1.len(), 401);
        assert!(c[1].1.windows(2).all(|w| w[1].1 >= w[0].1));
        assert!(!c[0].1.windows(2).all(|w| w[1].1 >= w[0].1));
        assert!(left_ray_curves(0.0, 1.0, 0.2, 1.0, 0.0, 0.1).is_err());
    }
}
