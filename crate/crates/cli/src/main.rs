use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use plurigauss::coding::truncate;
use plurigauss::fitting::{fit_unit_sill_model, FittedModel};
use plurigauss::forward::averaged_indicator_variogram;
use plurigauss::io;
use plurigauss::random_fields::simulate_independent_grfs;
use plurigauss::study::{run_study, SiteLayout, StudyConfig, StudyKind};
use plurigauss::{
    build_pair_groups, empirical_indicator_variograms, empirical_underlying_variogram, CategoricalField,
    Correlation, CovarianceKind, CovarianceModel, LagSpec, SiteSet, Track,
};

#[derive(Parser)]
#[command(name = "plurigauss", version, about = "Plurigaussian simulation and pairwise-likelihood variography")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate independent standardized Gaussian fields at a set of sites.
    Simulate(SimulateArgs),
    /// Assign categories to simulated fields with a coding rule.
    Truncate(TruncateArgs),
    /// Empirical simple and cross variograms of the category indicators.
    VarioIndicator(VarioIndicatorArgs),
    /// Pairwise-likelihood variograms of the hidden fields.
    VarioPgs(VarioPgsArgs),
    /// Indicator variograms implied by fitted covariance models.
    VarioModel(VarioModelArgs),
    /// Fit a unit-sill covariance model to one variogram track.
    Fit(FitArgs),
    /// Run a Monte-Carlo study and write summary.csv.
    McStudy(McStudyArgs),
}

#[derive(Args)]
struct LagArgs {
    /// JSON lag specification.
    #[arg(long, conflicts_with_all = ["n_lags", "lag_width"])]
    lags: Option<PathBuf>,
    /// Number of regularly spaced lags (with --lag-width).
    #[arg(long, requires = "lag_width")]
    n_lags: Option<usize>,
    #[arg(long, requires = "n_lags")]
    lag_width: Option<f64>,
    /// Distance tolerance; defaults to half the lag spacing.
    #[arg(long, requires = "n_lags")]
    tolerance: Option<f64>,
}

impl LagArgs {
    fn spec(&self) -> Result<LagSpec> {
        match (&self.lags, self.n_lags, self.lag_width) {
            (Some(path), _, _) => Ok(serde_json::from_reader(open(path)?)
                .with_context(|| format!("invalid lag specification {}", path.display()))?),
            (None, Some(n), Some(w)) => Ok(LagSpec::regular(n, w, self.tolerance)?),
            _ => bail!("give --lags or both --n-lags and --lag-width"),
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Sites CSV (columns x1..xd).
    #[arg(long, conflicts_with_all = ["grid", "uniform"])]
    sites: Option<PathBuf>,
    /// Regular 1-D grid with this many nodes.
    #[arg(long, conflicts_with = "uniform")]
    grid: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    mesh: f64,
    /// This many uniform sites on a square (see --side).
    #[arg(long)]
    uniform: Option<usize>,
    #[arg(long, default_value_t = 200.0)]
    side: f64,
    /// Covariance of one field as `kind:range`; repeat for several fields.
    #[arg(long = "model", required = true, value_parser = parse_model)]
    models: Vec<CovarianceModel>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV (columns x1..xd, y1..yq).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TruncateArgs {
    /// Realization CSV from `simulate`.
    #[arg(long)]
    grf: PathBuf,
    /// JSON coding rule.
    #[arg(long)]
    coding: PathBuf,
    /// Output CSV (columns x1..xd, category).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VarioIndicatorArgs {
    #[arg(long)]
    categories: PathBuf,
    /// Number of categories; defaults to the largest label present.
    #[arg(long)]
    n_categories: Option<usize>,
    #[command(flatten)]
    lags: LagArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VarioPgsArgs {
    #[arg(long)]
    categories: PathBuf,
    #[arg(long)]
    coding: PathBuf,
    #[command(flatten)]
    lags: LagArgs,
    /// Per-lag estimator output CSV.
    #[arg(long)]
    out: PathBuf,
    /// Also write the `grf_r` variogram tracks to this CSV.
    #[arg(long)]
    tracks: Option<PathBuf>,
}

#[derive(Args)]
struct VarioModelArgs {
    /// Fitted model JSON of each field, in field order.
    #[arg(long = "model", required = true)]
    models: Vec<PathBuf>,
    #[arg(long)]
    coding: PathBuf,
    /// Sites CSV; any CSV with x1..xd columns works.
    #[arg(long)]
    sites: PathBuf,
    #[command(flatten)]
    lags: LagArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Variogram CSV (columns track, lag, estimate, npairs).
    #[arg(long)]
    variogram: PathBuf,
    /// Track label, e.g. grf_1.
    #[arg(long, default_value = "grf_1")]
    track: String,
    #[arg(long, value_parser = parse_kind)]
    kind: CovarianceKind,
    /// Output JSON; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct McStudyArgs {
    /// Study kind: mono-c1-constant, mono-c1-varying, mono-c2-constant,
    /// mono-c2-varying or bigaussian.
    #[arg(long, value_parser = parse_study_kind, required_unless_present = "config")]
    kind: Option<StudyKind>,
    /// Study configuration JSON; command-line flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    sims: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; RAYON_NUM_THREADS applies when absent.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory for summary.csv and config.json.
    #[arg(long)]
    out: PathBuf,
}

fn parse_model(s: &str) -> Result<CovarianceModel, String> {
    let (kind, range) = s
        .split_once(':')
        .ok_or_else(|| format!("expected kind:range, got `{s}`"))?;
    let kind = parse_kind(kind)?;
    let range: f64 = range.parse().map_err(|_| format!("range `{range}` is not a number"))?;
    CovarianceModel::unit(kind, range).map_err(|e| e.to_string())
}

fn parse_kind(s: &str) -> Result<CovarianceKind, String> {
    s.parse().map_err(|e: plurigauss::Error| e.to_string())
}

fn parse_study_kind(s: &str) -> Result<StudyKind, String> {
    s.parse().map_err(|e: plurigauss::Error| e.to_string())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("cannot open {}", path.display()))?,
    ))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

fn read_field(path: &Path, n_categories: Option<usize>) -> Result<(SiteSet, CategoricalField)> {
    let (sites, labels) = io::read_categories(open(path)?).with_context(|| format!("reading {}", path.display()))?;
    let k = n_categories.unwrap_or_else(|| labels.iter().max().map_or(1, |m| m + 1));
    Ok((sites, CategoricalField::new(k, labels)?))
}

fn load_coding(path: &Path) -> Result<plurigauss::CodingFunction> {
    io::load_coding(path).with_context(|| format!("coding rule {}", path.display()))
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let sites = match (&a.sites, a.grid, a.uniform) {
        (Some(path), _, _) => io::read_sites(open(path)?).with_context(|| format!("reading {}", path.display()))?,
        (None, Some(n), _) => SiteSet::regular_grid_1d(n, a.mesh)?,
        (None, None, Some(n)) => SiteSet::uniform_square(n, a.side, a.seed)?,
        _ => bail!("give one of --sites, --grid or --uniform"),
    };
    let y = simulate_independent_grfs(&sites, &a.models, a.seed)?;
    io::write_grf(create(&a.out)?, &sites, &y)?;
    Ok(())
}

fn truncate_cmd(a: TruncateArgs) -> Result<()> {
    let (sites, y) = io::read_grf(open(&a.grf)?).with_context(|| format!("reading {}", a.grf.display()))?;
    let coding = load_coding(&a.coding)?;
    let f = truncate(&y, &coding)?;
    io::write_categories(create(&a.out)?, &sites, f.labels())?;
    Ok(())
}

fn vario_indicator(a: VarioIndicatorArgs) -> Result<()> {
    let (sites, f) = read_field(&a.categories, a.n_categories)?;
    let groups = build_pair_groups(&sites, &a.lags.spec()?)?;
    let v = empirical_indicator_variograms(&f, &groups)?;
    io::write_variograms(create(&a.out)?, v.tracks())?;
    Ok(())
}

fn vario_pgs(a: VarioPgsArgs) -> Result<()> {
    let coding = load_coding(&a.coding)?;
    let (sites, f) = read_field(&a.categories, Some(coding.n_categories()))?;
    let groups = build_pair_groups(&sites, &a.lags.spec()?)?;
    let v = empirical_underlying_variogram(&f, &coding, &groups)?;
    io::write_pl_results(create(&a.out)?, &v)?;
    if let Some(path) = &a.tracks {
        io::write_variograms(create(path)?, &v.tracks())?;
    }
    Ok(())
}

fn vario_model(a: VarioModelArgs) -> Result<()> {
    let coding = load_coding(&a.coding)?;
    if a.models.len() != coding.n_fields() {
        bail!(
            "invalid configuration for `model`: {} models given for {} fields",
            a.models.len(),
            coding.n_fields()
        );
    }
    let models = a
        .models
        .iter()
        .map(|p| {
            let fitted: FittedModel = serde_json::from_reader(open(p)?).with_context(|| format!("reading {}", p.display()))?;
            Ok(fitted.model()?)
        })
        .collect::<Result<Vec<_>>>()?;
    let sites = io::read_sites(open(&a.sites)?).with_context(|| format!("reading {}", a.sites.display()))?;
    let groups = build_pair_groups(&sites, &a.lags.spec()?)?;
    let rho = groups
        .lags()
        .iter()
        .map(|&h| {
            models
                .iter()
                .map(|m| Ok(Correlation::new(m.eval(h)? / m.sill())?))
                .collect::<Result<Vec<_>>>()
                .map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    let v = averaged_indicator_variogram(&coding, &rho, &groups)?;
    io::write_variograms(create(&a.out)?, v.tracks())?;
    Ok(())
}

fn fit(a: FitArgs) -> Result<()> {
    let track: Track = a.track.parse()?;
    let tracks = io::read_variograms(open(&a.variogram)?).with_context(|| format!("reading {}", a.variogram.display()))?;
    let v = tracks
        .into_iter()
        .find(|v| v.track == track)
        .ok_or_else(|| anyhow!("invalid configuration for `track`: `{}` not found in {}", a.track, a.variogram.display()))?;
    let fitted = fit_unit_sill_model(&v, a.kind)?;
    if fitted.at_lower_bound {
        eprintln!("warning: range at the lower search bound; the track shows no spatial structure");
    }
    let json = serde_json::to_string_pretty(&fitted)?;
    match &a.out {
        Some(path) => fs::write(path, json + "\n").with_context(|| format!("cannot write {}", path.display()))?,
        None => writeln!(std::io::stdout().lock(), "{json}")?,
    }
    Ok(())
}

fn mc_study(a: McStudyArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(path) => {
            let cfg: StudyConfig = serde_json::from_reader(open(path)?).with_context(|| format!("invalid study configuration {}", path.display()))?;
            if a.kind.is_some_and(|k| k != cfg.kind) {
                bail!("invalid configuration for `kind`: --kind disagrees with {}", path.display());
            }
            cfg
        }
        None => StudyConfig::new(a.kind.expect("clap requires --kind without --config")),
    };
    if let Some(n) = a.sims {
        cfg.n_sims = n;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if a.threads.is_some() {
        cfg.threads = a.threads;
    }
    cfg.validate()?;
    if let SiteLayout::UniformSquare { side, .. } = cfg.layout {
        eprintln!("note: uniform sites on a square of side {side}");
    }
    fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    let summary = run_study(&cfg)?;
    io::write_summary(create(&a.out.join("summary.csv"))?, &summary)?;
    fs::write(a.out.join("config.json"), serde_json::to_string_pretty(&cfg)? + "\n")?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(a) => simulate(a),
        Command::Truncate(a) => truncate_cmd(a),
        Command::VarioIndicator(a) => vario_indicator(a),
        Command::VarioPgs(a) => vario_pgs(a),
        Command::VarioModel(a) => vario_model(a),
        Command::Fit(a) => fit(a),
        Command::McStudy(a) => mc_study(a),
    }
}
