//! Command-line interface. Exit status: 0 on success, 1 on a domain error,
//! 2 on a usage error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use dlc_core::analysis::{mp_mt_analysis, shadow_lifting_check, Method, MpMtConfig, TautologySuite};
use dlc_core::dsl::{lower, parse_constraint, push_negation, Leaf, LeafResolver, LowerError, Term};
use dlc_core::gradcheck::gradcheck;
use dlc_core::graph::{Graph, NodeId};
use dlc_core::relax::Relaxation;
use dlc_core::train::constraint::similarity_triples;
use dlc_core::train::{
    pgd_attack, train_with, BlobSpec, ConstraintConfig, ConstraintEval, ConstraintKind, Dataset, EpochRecord,
    TrainConfig, TrainObserver,
};
use dlc_core::{LogicConfig, LogicKind};

use crate::data::{load_dataset, Source};
use crate::error::{Error, Result};
use crate::{checkpoint, config, metrics, report, table};

#[derive(Debug, Parser)]
#[command(name = "dlc", version, about = "Differentiable logics: consistency, derivative analysis, gradient checks and constraint-guided training")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Consistency of the tautology suite under fuzzy logics
    Consistency(ConsistencyArgs),
    /// Shadow-lifting or implication-derivative analysis
    Analyze(AnalyzeArgs),
    /// Finite-difference check of operators and constraint losses
    Gradcheck(GradcheckArgs),
    /// Evaluate a formula under one logic
    Eval(EvalArgs),
    /// Search for a constraint counterexample around one input
    Attack(AttackArgs),
    /// Train a classifier with a constraint
    Train(TrainArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Text,
    Records,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Reference,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnalyzeMode {
    ShadowLifting,
    Implication,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstraintArg {
    Robustness,
    Groups,
    ClassSimilarity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataArg {
    Blobs,
    Csv,
    Idx,
}

fn logic_parser() -> impl TypedValueParser<Value = LogicKind> {
    PossibleValuesParser::new(LogicKind::ALL.map(LogicKind::name)).map(|s| s.parse::<LogicKind>().expect("listed name"))
}

fn fuzzy_list_parser() -> impl TypedValueParser<Value = String> {
    let mut names = vec!["all"];
    names.extend(LogicKind::FUZZY.map(LogicKind::name));
    PossibleValuesParser::new(names)
}

/// Operator parameters shared by every logic.
#[derive(Debug, Clone, Args)]
pub struct LogicParams {
    /// DL2 `!=` penalty constant [default: 1]
    #[arg(long)]
    pub xi: Option<f64>,
    /// Sigmoidal implication steepness [default: 9]
    #[arg(long)]
    pub steepness: Option<f64>,
    /// Yager exponent [default: 2]
    #[arg(long)]
    pub yager_p: Option<f64>,
}

impl LogicParams {
    fn apply(&self, mut cfg: LogicConfig) -> LogicConfig {
        if let Some(v) = self.xi {
            cfg.xi = v;
        }
        if let Some(v) = self.steepness {
            cfg.s = v;
        }
        if let Some(v) = self.yager_p {
            cfg.p = v;
        }
        cfg
    }

    fn config(&self, kind: LogicKind) -> Result<LogicConfig> {
        let cfg = self.apply(LogicConfig::new(kind));
        cfg.validate().map_err(|e| Error::Invalid(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct ConsistencyArgs {
    /// Comma-separated fuzzy logics, or `all`
    #[arg(long, alias = "logic", value_delimiter = ',', default_value = "all", value_parser = fuzzy_list_parser())]
    pub logics: Vec<String>,
    #[command(flatten)]
    pub params: LogicParams,
    #[arg(long, value_enum, default_value_t = MethodArg::Quadrature)]
    pub method: MethodArg,
    /// Points per axis (quadrature) or samples (monte-carlo) [default: 200 or 100000]
    #[arg(long)]
    pub budget: Option<usize>,
    /// `reference` has the published transposition row with a disjunctive
    /// premise; `classical` replaces it with a classical tautology
    #[arg(long, value_enum, default_value_t = SuiteArg::Reference)]
    pub suite: SuiteArg,
    /// Seed for monte-carlo sampling
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the table here instead of to stdout; error estimates go to
    /// `<stem>.errors.csv` beside it
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(value_enum)]
    pub mode: AnalyzeMode,
    /// Logic to analyse; every logic when omitted
    #[arg(long, value_parser = logic_parser())]
    pub logic: Option<LogicKind>,
    #[command(flatten)]
    pub params: LogicParams,
    /// Number of ρ samples for shadow-lifting
    #[arg(long, default_value_t = 100)]
    pub rho_samples: usize,
    /// Grid spacing for the implication analysis
    #[arg(long, default_value_t = 0.005)]
    pub spacing: f64,
    /// Gradient threshold for the Modus Ponens / Tollens rule
    #[arg(long, default_value_t = 0.05)]
    pub tau: f64,
    /// Also write every implication grid point as CSV
    #[arg(long)]
    pub grid_out: Option<PathBuf>,
    /// Write the output here instead of to stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    /// Logic to check; every logic when omitted
    #[arg(long, value_parser = logic_parser())]
    pub logic: Option<LogicKind>,
    #[command(flatten)]
    pub params: LogicParams,
    /// Operator sample points per check
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// Seed for the sample points and test networks
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the output here instead of to stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_parser = logic_parser())]
    pub logic: LogicKind,
    #[command(flatten)]
    pub params: LogicParams,
    /// Formula, optionally with a `forall_ball(ε):` prefix (ignored here)
    #[arg(long)]
    pub formula: String,
    /// Values as NAME=VALUE, e.g. `P=0.3` or `N(xadv)[0]=0.8`; repeatable
    #[arg(long, value_delimiter = ',')]
    pub assign: Vec<String>,
    /// Write the output here instead of to stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct ConstraintArgs {
    /// Standard constraint [default: robustness]
    #[arg(long, value_enum, conflicts_with = "formula_file")]
    pub constraint: Option<ConstraintArg>,
    /// Custom constraint in the formula language
    #[arg(long)]
    pub formula_file: Option<PathBuf>,
    /// Counterexample ball radius [default: 0.1]
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Constraint threshold [default: 0.05]
    #[arg(long)]
    pub delta: Option<f64>,
    /// Class groups as `0,1;2` [default: classes split in two halves]
    #[arg(long)]
    pub groups: Option<String>,
    /// Class triples as `0,1,2;1,0,2` [default: from class centroids]
    #[arg(long)]
    pub triples: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct PgdArgs {
    /// PGD steps [default: 20]
    #[arg(long)]
    pub steps: Option<usize>,
    /// PGD step size [default: epsilon / 8]
    #[arg(long)]
    pub step_size: Option<f64>,
    /// PGD restarts [default: 1]
    #[arg(long)]
    pub restarts: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    /// Model checkpoint written by `train --checkpoint`
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Clean input as comma-separated values in [0, 1]
    #[arg(long, value_delimiter = ',', required = true)]
    pub input: Vec<f64>,
    #[arg(long, value_parser = logic_parser(), default_value = "dl2")]
    pub logic: LogicKind,
    #[command(flatten)]
    pub params: LogicParams,
    #[command(flatten)]
    pub constraint: ConstraintArgs,
    #[command(flatten)]
    pub pgd: PgdArgs,
    /// Seed for random starts
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the output here instead of to stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// TOML file with training settings; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Logic of the constraint loss [default: dl2]
    #[arg(long, value_parser = logic_parser())]
    pub logic: Option<LogicKind>,
    #[command(flatten)]
    pub params: LogicParams,
    #[command(flatten)]
    pub constraint: ConstraintArgs,
    #[command(flatten)]
    pub pgd: PgdArgs,
    /// [default: 30]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// [default: 32]
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// [default: 0.1]
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Hidden layer widths, comma-separated [default: 32]
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    /// GradNorm asymmetry [default: 0.1]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// GradNorm weight learning rate [default: 0.025]
    #[arg(long)]
    pub weight_lr: Option<f64>,
    /// Initial constraint weight [default: 1]
    #[arg(long)]
    pub lambda_c: Option<f64>,
    /// Keep the loss weights fixed
    #[arg(long)]
    pub no_gradnorm: bool,
    /// Cross-entropy only: no constraint loss and no attacks in training
    #[arg(long)]
    pub baseline: bool,
    /// Stop when GradNorm drives the constraint weight to its floor
    #[arg(long)]
    pub early_stop: bool,
    #[arg(long, value_enum, default_value_t = DataArg::Blobs)]
    pub data: DataArg,
    /// Number of classes [default: 3 for blobs, else largest label + 1]
    #[arg(long)]
    pub classes: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub blob_dim: usize,
    #[arg(long, default_value_t = 0.1)]
    pub blob_spread: f64,
    #[arg(long, default_value_t = 200)]
    pub train_per_class: usize,
    #[arg(long, default_value_t = 100)]
    pub test_per_class: usize,
    /// Seed of the blob generator [default: the training seed]
    #[arg(long)]
    pub data_seed: Option<u64>,
    /// Training set CSV (`label,f0,f1,…`)
    #[arg(long)]
    pub train_csv: Option<PathBuf>,
    /// Test set CSV
    #[arg(long)]
    pub test_csv: Option<PathBuf>,
    /// Training images, IDX
    #[arg(long)]
    pub train_images: Option<PathBuf>,
    /// Training labels, IDX
    #[arg(long)]
    pub train_labels: Option<PathBuf>,
    /// Test images, IDX
    #[arg(long)]
    pub test_images: Option<PathBuf>,
    /// Test labels, IDX
    #[arg(long)]
    pub test_labels: Option<PathBuf>,
    /// Write the trained model here
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Training seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Metrics file
    /// Write the output here instead of to stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

fn check_out(path: Option<&Path>) -> Result<()> {
    if let Some(p) = path {
        let parent = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !parent.is_dir() {
            return Err(Error::Usage(format!("--out: directory {} does not exist", parent.display())));
        }
    }
    Ok(())
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(Error::io(p)),
        None => stdout.write_all(text.as_bytes()).map_err(Error::io("<stdout>")),
    }
}

fn companion(out: &Path) -> PathBuf {
    let stem = out.file_stem().map_or("consistency".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.errors.csv"))
}

fn consistency(a: &ConsistencyArgs, stdout: &mut dyn Write) -> Result<()> {
    check_out(a.out.as_deref())?;
    let kinds: Vec<LogicKind> = if a.logics.iter().any(|l| l == "all") {
        LogicKind::FUZZY.to_vec()
    } else {
        a.logics.iter().map(|l| l.parse().expect("validated by the parser")).collect()
    };
    let logics = kinds.iter().map(|k| a.params.config(*k)).collect::<Result<Vec<_>>>()?;
    let suite = match a.suite {
        SuiteArg::Reference => TautologySuite::reference(),
        SuiteArg::Classical => TautologySuite::classical(),
    };
    let (method, budget) = match a.method {
        MethodArg::Quadrature => (Method::Quadrature, a.budget.unwrap_or(200)),
        MethodArg::MonteCarlo => (Method::MonteCarlo { seed: a.seed }, a.budget.unwrap_or(100_000)),
    };
    let r = table::consistency_table(&logics, &suite, method, budget, table::threads())?;
    let text = match a.format {
        Format::Csv => table::values_csv(&r, &suite),
        Format::Text => table::text(&r, &suite),
        Format::Records => table::records(&r),
    };
    emit(a.out.as_deref(), &text, stdout)?;
    if let Some(out) = &a.out {
        let path = companion(out);
        fs::write(&path, table::errors_csv(&r, &suite)).map_err(Error::io(path))?;
    }
    Ok(())
}

fn kinds(logic: Option<LogicKind>) -> Vec<LogicKind> {
    logic.map_or(LogicKind::ALL.to_vec(), |k| vec![k])
}

fn analyze(a: &AnalyzeArgs, stdout: &mut dyn Write) -> Result<()> {
    check_out(a.out.as_deref())?;
    check_out(a.grid_out.as_deref())?;
    let logics = kinds(a.logic).into_iter().map(|k| a.params.config(k)).collect::<Result<Vec<_>>>()?;
    let text = match a.mode {
        AnalyzeMode::ShadowLifting => {
            let rs = logics.iter().map(|l| shadow_lifting_check(l, a.rho_samples)).collect::<std::result::Result<Vec<_>, _>>()?;
            match a.format {
                Format::Csv => report::shadow_csv(&rs),
                Format::Text => report::shadow_text(&rs),
                Format::Records => report::shadow_records(&rs),
            }
        }
        AnalyzeMode::Implication => {
            if !(a.spacing > 0.0 && a.spacing < 0.5) {
                return Err(Error::Invalid("--spacing must lie in (0, 0.5)".into()));
            }
            let cfg = MpMtConfig { spacing: a.spacing, tau: a.tau, ..MpMtConfig::default() };
            let rs = logics.iter().map(|l| mp_mt_analysis(l, &cfg)).collect::<std::result::Result<Vec<_>, _>>()?;
            if let Some(p) = &a.grid_out {
                fs::write(p, report::implication_grid_csv(&rs)).map_err(Error::io(p))?;
            }
            match a.format {
                Format::Csv => report::implication_csv(&rs),
                Format::Text => report::implication_text(&rs),
                Format::Records => report::implication_records(&rs),
            }
        }
    };
    emit(a.out.as_deref(), &text, stdout)
}

fn gradcheck_cmd(a: &GradcheckArgs, stdout: &mut dyn Write) -> Result<()> {
    check_out(a.out.as_deref())?;
    if a.points == 0 {
        return Err(Error::Invalid("--points must be positive".into()));
    }
    let mut rs = Vec::new();
    for k in kinds(a.logic) {
        rs.push(gradcheck(a.params.config(k)?, a.points, a.seed)?);
    }
    let text = match a.format {
        Format::Csv => report::gradcheck_csv(&rs),
        Format::Text => report::gradcheck_text(&rs),
        Format::Records => report::gradcheck_records(&rs),
    };
    emit(a.out.as_deref(), &text, stdout)?;
    match rs.iter().flat_map(|r| r.checks.iter().map(move |c| (r, c))).find(|(_, c)| !c.passed()) {
        Some((r, c)) => Err(Error::Invalid(format!(
            "{} {}: relative error {:.3e} exceeds {:.0e}",
            r.logic.kind, c.name, c.max_error, c.tolerance
        ))),
        None => Ok(()),
    }
}

fn squash(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

fn leaf_text(leaf: &Leaf) -> String {
    use dlc_core::dsl::{GroupRef, Index};
    let t = match leaf {
        Leaf::Input(w, i) => Term::Input(*w, Index::Lit(*i)),
        Leaf::NetOut(w, k) => Term::NetOut(*w, Index::Lit(*k)),
        Leaf::Group(w, g) => Term::GroupProb(*w, GroupRef::Name(g.clone())),
        Leaf::InfNormDiff => Term::InfNormDiff,
    };
    squash(&t.to_string())
}

/// Binds leaves and propositional variables to constants by name.
struct Assignments(Vec<(String, f64)>);

impl Assignments {
    fn get(&self, key: &str) -> Option<f64> {
        self.0.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }
}

impl LeafResolver for Assignments {
    fn leaf(&mut self, g: &mut Graph, leaf: &Leaf) -> std::result::Result<NodeId, LowerError> {
        let v = self.get(&leaf_text(leaf)).ok_or_else(|| LowerError::Unbound(leaf.clone()))?;
        Ok(g.constant(v))
    }

    fn prop(&mut self, g: &mut Graph, name: &str) -> std::result::Result<NodeId, LowerError> {
        let v = self.get(name).ok_or_else(|| LowerError::UnboundProp(name.into()))?;
        Ok(g.constant(v))
    }
}

fn eval_cmd(a: &EvalArgs, stdout: &mut dyn Write) -> Result<()> {
    check_out(a.out.as_deref())?;
    let logic = a.params.config(a.logic)?;
    let mut values = Vec::new();
    for pair in &a.assign {
        let (k, v) = pair.split_once('=').ok_or_else(|| Error::Usage(format!("--assign: `{pair}` is not NAME=VALUE")))?;
        let v: f64 = v.trim().parse().map_err(|_| Error::Usage(format!("--assign: `{v}` is not a number")))?;
        values.push((squash(k), v));
    }
    let c = parse_constraint(&a.formula)?;
    let rx = Relaxation::new(logic).map_err(|e| Error::Invalid(e.to_string()))?;
    let f = if rx.is_fuzzy() { c.formula.clone() } else { push_negation(&c.formula)? };
    let mut g = Graph::new();
    let truth = lower(&f, &rx, &mut g, &mut Assignments(values))?;
    let loss = rx.loss(&mut g, truth);
    let loss_value = g.eval(loss, &[]).map_err(LowerError::Graph)?;
    let truth_value = g.value(truth);
    let text = match a.format {
        Format::Text => format!("{truth_value}\n"),
        Format::Records => format!("logic={} truth={truth_value} loss={loss_value}\n", a.logic),
        Format::Csv => format!("logic,truth,loss\n{},{truth_value},{loss_value}\n", a.logic),
    };
    emit(a.out.as_deref(), &text, stdout)
}

fn parse_lists(s: &str, flag: &str) -> Result<Vec<Vec<usize>>> {
    s.split(';')
        .map(|part| {
            part.split(',')
                .map(|v| v.trim().parse::<usize>().map_err(|_| Error::Usage(format!("{flag}: `{v}` is not a class index"))))
                .collect()
        })
        .collect()
}

/// Constraint settings from flags, on top of `base`.
fn constraint_config(a: &ConstraintArgs, base: &ConstraintConfig, data: Option<&Dataset>, classes: usize) -> Result<ConstraintConfig> {
    let mut c = base.clone();
    if let Some(p) = &a.formula_file {
        c.kind = ConstraintKind::Custom;
        c.formula = Some(fs::read_to_string(p).map_err(Error::io(p))?.trim().to_string());
    }
    if let Some(k) = a.constraint {
        c.kind = match k {
            ConstraintArg::Robustness => ConstraintKind::Robustness,
            ConstraintArg::Groups => ConstraintKind::Groups,
            ConstraintArg::ClassSimilarity => ConstraintKind::ClassSimilarity,
        };
    }
    if let Some(v) = a.epsilon {
        c.epsilon = v;
    }
    if let Some(v) = a.delta {
        c.delta = v;
    }
    if let Some(g) = &a.groups {
        c.groups = parse_lists(g, "--groups")?;
    }
    if let Some(t) = &a.triples {
        c.triples = parse_lists(t, "--triples")?
            .into_iter()
            .map(|v| <[usize; 3]>::try_from(v).map_err(|_| Error::Usage("--triples: each triple needs three classes".into())))
            .collect::<Result<_>>()?;
    }
    if c.kind == ConstraintKind::Groups && c.groups.is_empty() {
        let half = classes.div_ceil(2);
        c.groups = vec![(0..half).collect(), (half..classes).collect()];
    }
    if c.kind == ConstraintKind::ClassSimilarity && c.triples.is_empty() {
        if let Some(d) = data {
            c.triples = similarity_triples(&d.centroids());
        }
    }
    Ok(c)
}

fn apply_pgd(a: &PgdArgs, cfg: &mut dlc_core::train::PgdConfig) {
    if let Some(v) = a.steps {
        cfg.steps = v;
    }
    if a.step_size.is_some() {
        cfg.step_size = a.step_size;
    }
    if let Some(v) = a.restarts {
        cfg.restarts = v;
    }
}

fn attack(a: &AttackArgs, stdout: &mut dyn Write) -> Result<()> {
    check_out(a.out.as_deref())?;
    let model = checkpoint::load(&a.checkpoint)?;
    if a.input.len() != model.input_dim() {
        return Err(Error::Invalid(format!("--input has {} values, the model expects {}", a.input.len(), model.input_dim())));
    }
    if a.input.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Invalid("--input values must lie in [0, 1]".into()));
    }
    let classes = model.classes();
    let cc = constraint_config(&a.constraint, &ConstraintConfig::default(), None, classes)?;
    let c = cc.build(classes)?;
    let mut eval = ConstraintEval::new(&c, a.params.config(a.logic)?, &cc.group_table(), classes, model.input_dim())?;
    let mut pgd = dlc_core::train::PgdConfig::default();
    apply_pgd(&a.pgd, &mut pgd);
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(a.seed);
    let r = pgd_attack(&model, &a.input, &mut eval, &pgd, &mut rng, |_| ())?;
    let xs: Vec<String> = r.x.iter().map(|v| v.to_string()).collect();
    let text = match a.format {
        Format::Text => format!(
            "counterexample: [{}]\nloss: {} -> {}\nsatisfied: {}\n",
            xs.join(", "),
            r.initial.loss,
            r.best.loss,
            r.best.satisfied
        ),
        Format::Records => format!(
            "x={} initial_loss={} loss={} margin={} satisfied={}\n",
            xs.join(","),
            r.initial.loss,
            r.best.loss,
            r.best.margin,
            r.best.satisfied
        ),
        Format::Csv => format!("x,initial_loss,loss,margin,satisfied\n\"{}\",{},{},{},{}\n", xs.join(","), r.initial.loss, r.best.loss, r.best.margin, r.best.satisfied),
    };
    emit(a.out.as_deref(), &text, stdout)
}

fn data_source(a: &TrainArgs, seed: u64) -> Result<Source> {
    let need = |p: &Option<PathBuf>, flag: &str| p.clone().ok_or_else(|| Error::Usage(format!("--data {:?} needs {flag}", a.data)));
    Ok(match a.data {
        DataArg::Blobs => Source::Blobs(BlobSpec {
            classes: a.classes.unwrap_or(3),
            dim: a.blob_dim,
            train_per_class: a.train_per_class,
            test_per_class: a.test_per_class,
            spread: a.blob_spread,
            seed: a.data_seed.unwrap_or(seed),
        }),
        DataArg::Csv => Source::Csv { train: need(&a.train_csv, "--train-csv")?, test: need(&a.test_csv, "--test-csv")? },
        DataArg::Idx => Source::Idx {
            train_images: need(&a.train_images, "--train-images")?,
            train_labels: need(&a.train_labels, "--train-labels")?,
            test_images: need(&a.test_images, "--test-images")?,
            test_labels: need(&a.test_labels, "--test-labels")?,
        },
    })
}

/// The effective training configuration: file, then flags.
pub fn train_config(a: &TrainArgs, train_set: Option<&Dataset>, classes: usize) -> Result<TrainConfig> {
    let mut cfg = match &a.config {
        Some(p) => config::load(p)?,
        None => TrainConfig::default(),
    };
    if let Some(k) = a.logic {
        cfg.logic = LogicConfig::new(k);
    }
    cfg.logic = a.params.apply(cfg.logic);
    cfg.constraint = constraint_config(&a.constraint, &cfg.constraint, train_set, classes)?;
    apply_pgd(&a.pgd, &mut cfg.pgd);
    macro_rules! set {
        ($field:expr, $flag:expr) => {
            if let Some(v) = $flag.clone() {
                $field = v;
            }
        };
    }
    set!(cfg.epochs, a.epochs);
    set!(cfg.batch_size, a.batch_size);
    set!(cfg.learning_rate, a.learning_rate);
    set!(cfg.hidden, a.hidden);
    set!(cfg.gradnorm.alpha, a.alpha);
    set!(cfg.gradnorm.weight_lr, a.weight_lr);
    set!(cfg.gradnorm.lambda_c, a.lambda_c);
    set!(cfg.seed, a.seed);
    if a.no_gradnorm {
        cfg.gradnorm.enabled = false;
    }
    if a.early_stop {
        cfg.early_stop = true;
    }
    if a.baseline {
        cfg = cfg.baseline();
    }
    Ok(cfg)
}

struct Clock {
    start: Instant,
}

impl TrainObserver for Clock {
    fn seconds(&mut self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    fn epoch(&mut self, _record: &EpochRecord) {}
}

fn train_cmd(a: &TrainArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    check_out(a.out.as_deref())?;
    check_out(a.checkpoint.as_deref())?;
    let seed = match (&a.seed, &a.config) {
        (Some(s), _) => *s,
        (None, Some(p)) => config::load(p)?.seed,
        (None, None) => 0,
    };
    let (train_set, test_set) = load_dataset(&data_source(a, seed)?, a.classes)?;
    let cfg = train_config(a, Some(&train_set), train_set.classes)?;
    let mut clock = Clock { start: Instant::now() };
    let run = train_with(&cfg, &train_set, &test_set, &mut clock)?;
    let text = match a.format {
        Format::Csv => metrics::to_csv(&run.history),
        Format::Text => metrics::to_text(&run.history),
        Format::Records => metrics::to_records(&run.history),
    };
    emit(a.out.as_deref(), &text, stdout)?;
    if let Some(p) = &a.checkpoint {
        checkpoint::save(p, &run.model)?;
    }
    let _ = writeln!(
        stderr,
        "{} epochs, {} constraint, {} logic, {:.1}s",
        run.history.records.len(),
        cfg.constraint.kind,
        cfg.logic.kind,
        clock.seconds()
    );
    match run.stop {
        Some(dlc_core::train::Stop::Diverged { epoch }) => {
            Err(Error::Invalid(format!("training diverged in epoch {epoch}; partial metrics written")))
        }
        Some(dlc_core::train::Stop::Stuck { epoch }) => {
            let _ = writeln!(stderr, "stopped after epoch {epoch}: constraint weight reached its floor");
            Ok(())
        }
        None => Ok(()),
    }
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Consistency(_) => "consistency",
        Command::Analyze(_) => "analyze",
        Command::Gradcheck(_) => "gradcheck",
        Command::Eval(_) => "eval",
        Command::Attack(_) => "attack",
        Command::Train(_) => "train",
    }
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Consistency(a) => consistency(a, stdout),
        Command::Analyze(a) => analyze(a, stdout),
        Command::Gradcheck(a) => gradcheck_cmd(a, stdout),
        Command::Eval(a) => eval_cmd(a, stdout),
        Command::Attack(a) => attack(a, stdout),
        Command::Train(a) => train_cmd(a, stdout, stderr),
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                return 2;
            }
            let _ = stdout.write_all(text.as_bytes());
            return 0;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(Error::Usage(m)) => {
            let mut cmd = Cli::command();
            cmd.build();
            let usage = cmd
                .find_subcommand_mut(subcommand_name(&cli.command))
                .map(|c| c.render_usage().to_string())
                .unwrap_or_default();
            let _ = writeln!(stderr, "error: {m}\n\n{usage}");
            2
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}
