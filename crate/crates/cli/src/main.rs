//! `cone`: command-line front end for the homcone library.
//!
//! Exit codes: 0 success, 1 validation failure, 2 domain error, 3 I/O or parse error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use homcone::dual::dualize;
use homcone::montecarlo::{check_moments, sample, SampleBatch};
use homcone::power::{big_delta, small_delta};
use homcone::structure::{read_cone_spec, write_cone_spec};
use homcone::validation::run_all;
use homcone::wishart::{self, gindikin, Side};
use homcone::{graph_to_structure, preset, BlockStructure, ConeError, Graph, ShapeVector, SymElement};
use nalgebra::DMatrix;

#[derive(Parser)]
#[command(name = "cone", version, about = "Wishart families on homogeneous cones")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    /// `δ_s` on the dual cone.
    #[value(name = "delta")]
    Small,
    /// `Δ_s` on the cone.
    #[value(name = "Delta")]
    Big,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    P,
    Q,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::P => Side::P,
            SideArg::Q => Side::Q,
        }
    }
}

#[derive(clap::Args)]
struct Common {
    /// Cone spec JSON file, or `preset:NAME` (sym(n), vinberg, dual_vinberg, lorentz(k)).
    #[arg(long)]
    spec: String,
    /// Shape parameter, comma-separated.
    #[arg(long = "s", allow_hyphen_values = true)]
    shape: Option<String>,
    /// Point as a JSON array of rows.
    #[arg(long)]
    point: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Check conditions V1–V3 of a cone spec.
    Validate { spec: String },
    /// Build a cone spec from a graph file.
    FromGraph {
        graph: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate a generalized power function.
    Power {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        which: Which,
    },
    /// Mean of the Wishart family at a parameter (`--side Q`: θ in P_V; `--side P`: ξ in Q_V).
    Mean {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "q")]
        side: SideArg,
    },
    /// Parameter of the Wishart family with a given mean.
    Invmean {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "q")]
        side: SideArg,
    },
    /// Lauritzen completion: the y in P_V with π(y^{-1}) = m.
    Lauritzen {
        #[command(flatten)]
        common: Common,
    },
    /// Variance function at a mean, as a matrix in z_basis coordinates or applied to a direction.
    Variance {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        side: SideArg,
        /// Direction (JSON array of rows) to apply the operator to.
        #[arg(long)]
        apply: Option<PathBuf>,
    },
    /// Classify a shape parameter in the Gindikin set.
    Gindikin {
        #[arg(long)]
        spec: String,
        #[arg(long = "s", allow_hyphen_values = true)]
        shape: String,
        #[arg(long, value_enum)]
        side: SideArg,
    },
    /// Matrix realization of the dual cone.
    Dualize {
        spec: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Draw a Wishart sample batch with shape (k/2)·n.
    Sample {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        theta: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long = "n")]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare a sample batch with the closed-form mean and variance.
    CheckMoments {
        batch: PathBuf,
        #[arg(long)]
        spec: String,
        #[arg(long)]
        theta: PathBuf,
        /// Also compare the Laplace transform at this point of Z_V.
        #[arg(long)]
        laplace: Option<PathBuf>,
    },
    /// Run the counterexample fixtures.
    Fixtures {
        #[arg(long)]
        json: bool,
    },
}

enum Failure {
    Validation(String),
    Domain(String),
    Input(String),
}

impl From<ConeError> for Failure {
    fn from(e: ConeError) -> Self {
        match e {
            ConeError::Io(_) | ConeError::Parse(_) | ConeError::DimensionMismatch(_) | ConeError::StructureMismatch(_) => {
                Failure::Input(e.to_string())
            }
            _ => Failure::Domain(e.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> CmdResult {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_spec(spec: &str) -> Result<BlockStructure, Failure> {
    match spec.strip_prefix("preset:") {
        Some(name) => Ok(preset(name)?),
        None => Ok(read_cone_spec(&read_text(Path::new(spec))?)?),
    }
}

fn load_point(path: &Path, s: &BlockStructure) -> Result<SymElement, Failure> {
    let rows: Vec<Vec<f64>> =
        serde_json::from_str(&read_text(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let x = SymElement::from_rows(&rows)?;
    if x.n() != s.total_size() {
        return Err(Failure::Input(format!(
            "{}: expected a {n}x{n} matrix",
            path.display(),
            n = s.total_size()
        )));
    }
    s.ensure_in_z(&x)?;
    Ok(s.project(&x)?)
}

fn load_shape(text: Option<&str>, s: &BlockStructure) -> Result<ShapeVector, Failure> {
    let text = text.ok_or_else(|| Failure::Input("--s is required".into()))?;
    let shape = ShapeVector::parse(text)?;
    if shape.len() != s.rank() {
        return Err(Failure::Input(format!("--s needs {} components", s.rank())));
    }
    Ok(shape)
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn matrix_json(m: &DMatrix<f64>) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| {
            let r: Vec<String> = m.row(i).iter().map(|&v| num(v)).collect();
            format!("  [{}]", r.join(", "))
        })
        .collect();
    format!("[\n{}\n]\n", rows.join(",\n"))
}

fn run(cmd: Command) -> CmdResult {
    match cmd {
        Command::Validate { spec } => {
            let s = match load_spec(&spec) {
                Err(Failure::Domain(msg)) => return Err(Failure::Validation(msg)),
                other => other?,
            };
            let report = s.validate();
            println!("{report}");
            if !report.passed() {
                return Err(Failure::Validation("structure violates V1-V3".into()));
            }
        }
        Command::FromGraph { graph, output } => {
            let g = Graph::parse(&read_text(&graph)?)?;
            let real = graph_to_structure(&g)?;
            let order: Vec<String> = real.order.iter().map(|v| (v + 1).to_string()).collect();
            eprintln!("vertex order: {}", order.join(" "));
            write_out(output.as_deref(), &(write_cone_spec(&real.structure) + "\n"))?;
        }
        Command::Power { common, which } => {
            let s = load_spec(&common.spec)?;
            let shape = load_shape(common.shape.as_deref(), &s)?;
            let x = load_point(&common.point, &s)?;
            let v = match which {
                Which::Big => big_delta(&s, &shape, &x)?,
                Which::Small => small_delta(&s, &shape, &x)?,
            };
            println!("{}", num(v));
        }
        Command::Mean { common, side } => {
            let s = load_spec(&common.spec)?;
            let shape = load_shape(common.shape.as_deref(), &s)?;
            let x = load_point(&common.point, &s)?;
            let m = match side {
                SideArg::Q => wishart::mean_q(&s, &shape, &x)?,
                SideArg::P => wishart::mean_p(&s, &shape, &x)?,
            };
            print!("{}", matrix_json(m.matrix()));
        }
        Command::Invmean { common, side } => {
            let s = load_spec(&common.spec)?;
            let shape = load_shape(common.shape.as_deref(), &s)?;
            let x = load_point(&common.point, &s)?;
            let t = match side {
                SideArg::Q => wishart::inverse_mean_q(&s, &shape, &x)?,
                SideArg::P => wishart::inverse_mean_p(&s, &shape, &x)?,
            };
            print!("{}", matrix_json(t.matrix()));
        }
        Command::Lauritzen { common } => {
            let s = load_spec(&common.spec)?;
            let m = load_point(&common.point, &s)?;
            print!("{}", matrix_json(wishart::lauritzen(&s, &m)?.matrix()));
        }
        Command::Variance { common, side, apply } => {
            let s = load_spec(&common.spec)?;
            let shape = load_shape(common.shape.as_deref(), &s)?;
            let m = load_point(&common.point, &s)?;
            let op = match side {
                SideArg::Q => wishart::variance_q(&s, &shape, &m)?,
                SideArg::P => wishart::variance_p(&s, &shape, &m)?,
            };
            match apply {
                Some(dir) => {
                    let y = load_point(&dir, &s)?;
                    print!("{}", matrix_json(op.apply(&s, &y)?.matrix()));
                }
                None => print!("{}", matrix_json(op.matrix())),
            }
        }
        Command::Gindikin { spec, shape, side } => {
            let s = load_spec(&spec)?;
            let shape = load_shape(Some(&shape), &s)?;
            let class = gindikin(&s, side.into(), &shape)?;
            match class.epsilon {
                Some(eps) => {
                    let e: Vec<String> = eps.iter().map(|v| v.to_string()).collect();
                    println!("{}", e.join(","));
                }
                None => println!("not-in-set"),
            }
        }
        Command::Dualize { spec, output } => {
            let s = load_spec(&spec)?;
            let real = dualize(&s)?;
            write_out(output.as_deref(), &(real.to_bundle().to_json() + "\n"))?;
        }
        Command::Sample {
            spec,
            theta,
            k,
            count,
            seed,
            output,
        } => {
            let s = load_spec(&spec)?;
            let theta = load_point(&theta, &s)?;
            let batch = sample(&s, &theta, k, count, seed)?;
            write_out(output.as_deref(), &batch.to_text())?;
        }
        Command::CheckMoments {
            batch,
            spec,
            theta,
            laplace,
        } => {
            let s = load_spec(&spec)?;
            let theta = load_point(&theta, &s)?;
            let batch = SampleBatch::from_text(&read_text(&batch)?, &s, &theta)?;
            let tp = laplace.map(|p| load_point(&p, &s)).transpose()?;
            let report = check_moments(&batch, tp.as_ref())?;
            println!("{report}");
            if !report.passed() {
                return Err(Failure::Validation("moments disagree with the closed forms".into()));
            }
        }
        Command::Fixtures { json } => {
            let reports = run_all();
            if json {
                println!("{}", serde_json::to_string_pretty(&reports).expect("reports serialize"));
            } else {
                for r in &reports {
                    println!("{r}");
                }
            }
            if reports.iter().any(|r| !r.passed) {
                return Err(Failure::Validation("fixture failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("cone: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("cone: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("cone: {msg}");
            ExitCode::from(3)
        }
    }
}
