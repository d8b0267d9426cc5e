//! `kslant`: generate fixtures, analyze curves, export plot data.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kslant::pipeline::{
    analyze_full, exit, exit_code, export_plotdata, resolve_const_tol, run_batch, write_fixture, AnalysisConfig,
    ApparatusSource, InputSource, OutputFormat, CONST_TOL_ENV, DEFAULT_K,
};
use kslant::zoo::{Family, ZooSpec};
use kslant::Error;

#[derive(Parser)]
#[command(
    name = "kslant",
    version,
    about = "Frenet apparatus, indicatrices and k-slant classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a fixture as a points CSV plus a `<stem>.truth.json` sidecar.
    Generate(GenerateArgs),
    /// Analyze a points file or fixture and write the JSON report.
    Analyze(AnalyzeArgs),
    /// Write plot-ready CSV files `<stem>_<quantity>.csv`.
    ExportPlotdata(ExportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyName {
    CircularHelix,
    GeneralHelix,
    Salkowski,
    AntiSalkowski,
    ConstantPrecession,
    PlaneCircle,
    DesignedKSlant,
}

#[derive(Args)]
struct FamilyArgs {
    family: FamilyName,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    /// Target level of a designed fixture.
    #[arg(long)]
    k: Option<usize>,
    /// Arc-length span as `from:to`.
    #[arg(long, allow_hyphen_values = true)]
    span: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Points file to write; defaults to `<family>.csv`.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InputArgs {
    /// Points CSV with header `s,x,y,z`.
    points: Option<PathBuf>,
    /// Fixture spec as JSON instead of a points file.
    #[arg(long, conflicts_with = "points")]
    spec: Option<PathBuf>,
    /// Truth sidecar to compare a points file against.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// For a fixture spec, differentiate its positions instead of using its apparatus.
    #[arg(long)]
    from_positions: bool,
    /// Highest level of the hierarchy.
    #[arg(long = "levels", short = 'K', default_value_t = DEFAULT_K)]
    levels: usize,
    /// Constancy threshold; overrides the environment default.
    #[arg(long)]
    const_tol: Option<f64>,
    /// Add the closed-form versus oracle block.
    #[arg(long)]
    verify_lemmas: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Report file; stdout when absent. With `--batch`, the output directory.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Analyze every `*.csv` in a directory.
    #[arg(long, conflicts_with_all = ["points", "spec"])]
    batch: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output directory.
    #[arg(long, default_value = ".")]
    dir: PathBuf,
    /// File name prefix.
    #[arg(long, default_value = "out")]
    stem: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn need(v: Option<f64>, flag: &str, family: &str) -> Result<f64, Error> {
    v.ok_or_else(|| Error::InvalidSpec(format!("{family} needs --{flag}")))
}

fn parse_span(s: &str) -> Result<(f64, f64), Error> {
    let bad = || Error::InvalidSpec(format!("span {s:?} is not of the form from:to"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

impl FamilyArgs {
    fn spec(&self) -> Result<ZooSpec, Error> {
        let name = self.family.to_possible_value().unwrap().get_name().to_string();
        let n = name.as_str();
        let family = match self.family {
            FamilyName::CircularHelix => Family::CircularHelix {
                a: need(self.a, "a", n)?,
                b: need(self.b, "b", n)?,
            },
            FamilyName::GeneralHelix => Family::GeneralHelix {
                phi: need(self.phi, "phi", n)?,
            },
            FamilyName::Salkowski => Family::Salkowski {
                c: need(self.c, "c", n)?,
            },
            FamilyName::AntiSalkowski => Family::AntiSalkowski {
                c: need(self.c, "c", n)?,
            },
            FamilyName::ConstantPrecession => Family::ConstantPrecession {
                mu: need(self.mu, "mu", n)?,
                m: need(self.m, "m", n)?,
            },
            FamilyName::PlaneCircle => Family::PlaneCircle {
                r: need(self.r, "r", n)?,
            },
            FamilyName::DesignedKSlant => Family::DesignedKSlant {
                k: self.k.ok_or_else(|| Error::InvalidSpec(format!("{n} needs --k")))?,
                c: need(self.c, "c", n)?,
            },
        };
        let mut spec = ZooSpec::new(family);
        if let Some(s) = &self.span {
            let (a, b) = parse_span(s)?;
            spec = spec.with_span(a, b);
        }
        if let Some(n) = self.samples {
            spec = spec.with_samples(n);
        }
        spec.resolve()?;
        Ok(spec)
    }
}

fn read_spec(path: &Path) -> Result<ZooSpec, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

impl InputArgs {
    fn config(&self, points_required: bool) -> Result<AnalysisConfig, Error> {
        let input = match (&self.points, &self.spec) {
            (Some(p), None) => InputSource::Points(p.clone()),
            (None, Some(s)) => InputSource::Zoo(read_spec(s)?),
            _ if !points_required => InputSource::Points(PathBuf::new()),
            _ => return Err(Error::InvalidSpec("give a points file or --spec".into())),
        };
        let mut config = AnalysisConfig::new(input);
        config.k = self.levels;
        config.verify_lemmas = self.verify_lemmas;
        config.truth = self.truth.clone();
        if self.from_positions {
            config.apparatus = ApparatusSource::Positions;
        }
        let env = std::env::var(CONST_TOL_ENV).ok();
        config.tolerances.const_tol = resolve_const_tol(self.const_tol, env.as_deref())?;
        config.validate()?;
        Ok(config)
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn generate(args: &GenerateArgs) -> Result<i32, Error> {
    let spec = args.family.spec()?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", spec.family.name())));
    let (z, side) = write_fixture(&spec, &out)?;
    for note in &z.notes {
        eprintln!("note: {note}");
    }
    eprintln!(
        "wrote {} ({} samples) and {}",
        out.display(),
        z.curve.len(),
        side.display()
    );
    Ok(exit::SUCCESS)
}

fn analyze(args: &AnalyzeArgs) -> Result<i32, Error> {
    let mut config = args.input.config(args.batch.is_none())?;
    config.format = match args.format {
        Format::Json => OutputFormat::Json,
        Format::Csv => OutputFormat::Csv,
    };
    if let Some(dir) = &args.batch {
        let out = args.out.clone().unwrap_or_else(|| dir.clone());
        let entries = run_batch(dir, &out, &config)?;
        let mut summary = serde_json::to_string_pretty(&entries).expect("summary serializes");
        summary.push('\n');
        std::fs::write(out.join("summary.json"), &summary).map_err(|e| Error::Io(e.to_string()))?;
        print!("{summary}");
        let worst = entries.iter().map(|e| e.exit_code).max().unwrap_or(exit::SUCCESS);
        return Ok(worst);
    }
    let analysis = analyze_full(&config)?;
    write_or_print(args.out.as_deref(), &analysis.report.render())?;
    Ok(analysis.report.exit_code())
}

fn export(args: &ExportArgs) -> Result<i32, Error> {
    let config = args.input.config(true)?;
    let analysis = analyze_full(&config)?;
    for path in export_plotdata(&analysis, &args.dir, &args.stem)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(analysis.report.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::INPUT_ERROR
            } else {
                exit::SUCCESS
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Analyze(a) => analyze(a),
        Command::ExportPlotdata(a) => export(a),
    };
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
