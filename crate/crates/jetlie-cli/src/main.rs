//! `jetlie`: prolongation, determining systems, symmetry algebras and
//! local Lie transformation manifolds from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use jetlie::algebra::Rat;
use jetlie::prolong::closed::Reading;
use jetlie::symfields::Family;
use jetlie_cli::run::{run, Command, JobError, JobSpec};

#[derive(Parser, Debug)]
#[command(name = "jetlie", version, about = "Exact symmetry computations for PDE systems and series manifolds")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ReadingArg {
    Display,
    Prose,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Prolongation coefficients of the symbolic field on the system's base.
    Prolong {
        file: PathBuf,
        /// Highest jet order (defaults to the system order).
        #[arg(long)]
        kappa: Option<usize>,
    },
    /// Determining equations and integrability residues.
    Determine { file: PathBuf },
    /// Polynomial-ansatz basis of the infinitesimal symmetry algebra.
    Solve {
        file: PathBuf,
        #[arg(long)]
        degree: u32,
    },
    /// Compares tabulated closed-form prolongation formulas with the recursion.
    VerifyClosedForms {
        #[arg(long)]
        kappa: usize,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, value_enum, default_value_t = ReadingArg::Display)]
        reading: ReadingArg,
    },
    /// Bracket closure of a tabulated generator family.
    Closure(FamilyArgs),
    /// Checks that finite flows of a family map sample solutions to solutions.
    FiniteCheck {
        #[command(flatten)]
        fam: FamilyArgs,
        /// Flow parameters (exact rationals).
        #[arg(long = "s", num_args = 1.., allow_hyphen_values = true, default_values_t = default_params())]
        s: Vec<String>,
    },
    /// Series manifold analyses.
    Manifold {
        #[command(subcommand)]
        cmd: ManifoldCmd,
    },
    /// Numerical prolongation-order and dimension bounds.
    Bound(BoundArgs),
}

fn default_params() -> Vec<String> {
    vec!["1".into(), "-1".into(), "1/2".into()]
}

#[derive(Args, Debug)]
struct FamilyArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    kappa: usize,
}

#[derive(Subcommand, Debug)]
enum ManifoldCmd {
    /// Solvability, degeneracy, covering and the associated system.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        kmax: Option<usize>,
    },
}

#[derive(Args, Debug)]
struct BoundArgs {
    /// Report the symmetry-dimension bound of the homogeneous system instead.
    #[arg(long)]
    theorem1: bool,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    m: u64,
    #[arg(long, required_unless_present = "theorem1")]
    p: Option<u64>,
    #[arg(long, required_unless_present = "theorem1")]
    l0: Option<u64>,
    #[arg(long = "l0star", required_unless_present = "theorem1")]
    l0_star: Option<u64>,
    #[arg(long, required_unless_present = "theorem1")]
    mu0: Option<u64>,
    #[arg(long, required_if_eq("theorem1", "true"))]
    kappa: Option<usize>,
}

fn read(path: &PathBuf) -> Result<String, JobError> {
    std::fs::read_to_string(path)
        .map_err(|e| JobError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn family(a: &FamilyArgs) -> Result<(Family, usize, usize, usize), JobError> {
    Ok((a.family.parse()?, a.n, a.m, a.kappa))
}

fn job(cmd: Cmd) -> Result<JobSpec, JobError> {
    let (source, command) = match cmd {
        Cmd::Prolong { file, kappa } => (Some(read(&file)?), Command::Prolong { kappa }),
        Cmd::Determine { file } => (Some(read(&file)?), Command::Determine),
        Cmd::Solve { file, degree } => (Some(read(&file)?), Command::Solve { degree }),
        Cmd::VerifyClosedForms { kappa, n, m, reading } => {
            let reading = match reading {
                ReadingArg::Display => Reading::Display,
                ReadingArg::Prose => Reading::Prose,
            };
            (None, Command::VerifyClosedForms { kappa, n, m, reading })
        }
        Cmd::Closure(a) => {
            let (family, n, m, kappa) = family(&a)?;
            (None, Command::Closure { family, n, m, kappa })
        }
        Cmd::FiniteCheck { fam, s } => {
            let (family, n, m, kappa) = family(&fam)?;
            let params = s
                .iter()
                .map(|t| t.parse::<Rat>())
                .collect::<Result<Vec<_>, _>>()?;
            (None, Command::FiniteCheck { family, n, m, kappa, params })
        }
        Cmd::Manifold {
            cmd: ManifoldCmd::Analyze { file, kmax },
        } => (Some(read(&file)?), Command::ManifoldAnalyze { kmax }),
        Cmd::Bound(b) => {
            if b.theorem1 {
                let kappa = b.kappa.ok_or_else(|| JobError::Usage("--theorem1 needs --kappa".into()))?;
                (
                    None,
                    Command::Theorem1 {
                        n: b.n as usize,
                        m: b.m as usize,
                        kappa,
                    },
                )
            } else {
                let need = |v: Option<u64>, name: &str| {
                    v.ok_or_else(|| JobError::Usage(format!("bound needs --{name}")))
                };
                (
                    None,
                    Command::Bound {
                        n: b.n,
                        m: b.m,
                        p: need(b.p, "p")?,
                        l0: need(b.l0, "l0")?,
                        l0_star: need(b.l0_star, "l0star")?,
                        mu0: need(b.mu0, "mu0")?,
                    },
                )
            }
        }
    };
    JobSpec::new(source, command)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = job(cli.cmd).and_then(|j| run(&j));
    match outcome {
        Ok(o) => {
            match cli.format {
                Format::Text => print!("{}", o.text),
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&o.json).expect("report serializes")
                ),
            }
            ExitCode::from(o.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
