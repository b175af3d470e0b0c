use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use siegel_core::cusps::{line_stabilizer, plane_stabilizer, tits_counts, IsotropicLine, IsotropicPlane};
use siegel_core::exact::{is_symplectic, rint, standard_j, RationalMatrix};
use siegel_core::groups::{
    congruence_pattern_holds, coset_reps_psl2, dual_quotient_action, is_member, lambda_matrix, to_integral, to_rational,
    Coords, Flavor, GroupSpec, SiegelPoint,
};
use siegel_core::invariants::{
    boundary_positivity, discrepancy_ok, invariant_table, k_decomposition, kc_diagonal_curve, mu, verify_prop22,
    DiscrepancyCheck,
};
use siegel_core::real::{Backend, DoubleDouble, Real};
use siegel_core::theta::{default_eps_ladder, f0, igusa_delta10, theta_constant, vanishing_order_diagonal, ThetaChar};
use siegel_core::verify::{theta_tolerance, verify_all, DEFAULT_PRECISION_DIGITS, DEFAULT_SEED};
use siegel_core::voronoi::{
    ambient_determinant, basic_determinant, is_basic, lattice_smoothness, principal_cone, smoothness_report,
    Sym2Lattice,
};
use siegel_core::{Error, Result};

const USAGE_EXIT: u8 = 64;

/// Verification toolkit for paramodular groups, Igusa's cusp form, Shioda
/// surfaces and genus 2 Voronoi cones.
#[derive(Parser, Debug)]
#[command(name = "siegel", version)]
struct Cli {
    /// Seed for every sampled object.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Significant digits for the numerical evaluators (up to 15 uses f64).
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION_DIGITS)]
    precision_digits: u32,
    /// Absolute tolerance for series evaluation; derived from the precision
    /// when absent.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the output to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Emit JSON (the default).
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    #[command(subcommand)]
    Groups(GroupsCmd),
    #[command(subcommand)]
    Cusps(CuspsCmd),
    #[command(subcommand)]
    Theta(ThetaCmd),
    #[command(subcommand)]
    Invariants(InvariantsCmd),
    #[command(subcommand)]
    Voronoi(VoronoiCmd),
    /// Run every acceptance check and emit the verification report.
    Verify,
}

#[derive(Subcommand, Debug)]
enum GroupsCmd {
    /// Membership of a 4x4 matrix in the selected group.
    Member {
        #[arg(long, default_value_t = 1)]
        d: i64,
        #[arg(long, default_value_t = 1)]
        n: i64,
        #[arg(long, default_value = "plain")]
        flavor: String,
        #[arg(long, default_value = "rational")]
        coords: String,
        /// JSON matrix file (or inline JSON).
        #[arg(long)]
        matrix: String,
    },
    /// Coset representatives indexed by SL(2, Z/d) / {+-1}.
    Cosets {
        #[arg(long)]
        d: i64,
    },
}

#[derive(Subcommand, Debug)]
enum CuspsCmd {
    /// Stabilizer lattice of an isotropic line or plane.
    Stab {
        #[arg(long)]
        d: i64,
        #[arg(long, default_value_t = 1)]
        n: i64,
        #[arg(long, default_value = "plain")]
        flavor: String,
        /// JSON 4-vector file (or inline JSON).
        #[arg(long, conflicts_with = "plane", required_unless_present = "plane")]
        line: Option<String>,
        /// JSON pair of 4-vectors (or inline JSON).
        #[arg(long)]
        plane: Option<String>,
    },
    /// Boundary component counts for an odd prime.
    Counts {
        #[arg(long)]
        p: i64,
    },
}

#[derive(Subcommand, Debug)]
enum ThetaCmd {
    /// One theta constant.
    Eval {
        /// `diag-i`, a JSON file or inline JSON `[[re,im],[re,im],[re,im]]`.
        #[arg(long)]
        tau: String,
        /// Characteristic `a1,a2,b1,b2` with entries in {0,1}.
        #[arg(long, default_value = "0,0,0,0")]
        char: String,
    },
    /// Igusa's weight 10 cusp form.
    Delta10 {
        #[arg(long)]
        tau: String,
    },
    /// The symmetrized form for level d.
    F0 {
        #[arg(long)]
        tau: String,
        #[arg(long)]
        d: i64,
    },
    /// Vanishing order of the cusp form at the diagonal point `diag(tau1, tau3)`.
    Order {
        #[arg(long)]
        tau: String,
    },
}

#[derive(Subcommand, Debug)]
enum InvariantsCmd {
    /// Cusp numbers, genera and degrees.
    Table {
        #[arg(long, default_value_t = 3)]
        k_min: i64,
        #[arg(long, default_value_t = 60)]
        k_max: i64,
        /// CSV instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Normal bundle degree checks.
    Prop22 {
        #[arg(long)]
        n: i64,
        #[arg(long)]
        p: i64,
    },
    /// Sign of K.C on the diagonal curve.
    Ample {
        #[arg(long)]
        n: i64,
    },
    /// Canonical class decomposition and discrepancy verdicts.
    Claims {
        #[arg(long)]
        n: i64,
        #[arg(long)]
        d: i64,
    },
}

#[derive(Subcommand, Debug)]
enum VoronoiCmd {
    /// Smoothness report over the plane types for an odd prime.
    Smooth {
        #[arg(long)]
        p: i64,
        #[arg(long)]
        n: i64,
    },
    /// Basicness of the principal cone against a lattice of symmetric forms.
    Basic {
        /// JSON 3x3 matrix whose columns are `(a, b, c)` basis vectors.
        #[arg(long)]
        lattice: String,
    },
}

enum Output {
    Json(Value),
    Text(String),
}

fn read_input(arg: &str) -> Result<String> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('[') || trimmed.starts_with('{') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(Path::new(arg)).map_err(|e| Error::Parse(format!("cannot read {arg}: {e}")))
}

fn parse_json<T: serde::de::DeserializeOwned>(arg: &str) -> Result<T> {
    serde_json::from_str(&read_input(arg)?).map_err(|e| Error::Parse(e.to_string()))
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Internal(e.to_string()))
}

fn parse_tau(arg: &str) -> Result<SiegelPoint> {
    if arg == "diag-i" {
        return Ok(SiegelPoint::diag_i());
    }
    parse_json(arg)
}

fn parse_char(s: &str) -> Result<ThetaChar> {
    let v: Vec<u8> = s
        .split(',')
        .map(|x| x.trim().parse::<u8>().map_err(|_| Error::Parse(format!("bad characteristic {s:?}"))))
        .collect::<Result<_>>()?;
    if v.len() != 4 {
        return Err(Error::Parse("characteristic needs four entries".into()));
    }
    ThetaChar::new([v[0], v[1]], [v[2], v[3]])
}

struct Numeric {
    digits: u32,
    tol: Option<f64>,
}

impl Numeric {
    fn tol<T: Real>(&self) -> Result<f64> {
        match self.tol {
            Some(t) if !(t > 0.0) => Err(Error::Precondition("tol must be positive".into())),
            Some(t) => Ok(t),
            None => Ok(theta_tolerance::<T>(self.digits)),
        }
    }
}

fn theta_on<T: Real>(cmd: &ThetaCmd, num: &Numeric) -> Result<Value> {
    let tol = num.tol::<T>()?;
    match cmd {
        ThetaCmd::Eval { tau, char } => {
            let t = parse_tau(tau)?.to_backend::<T>();
            to_json(&theta_constant(parse_char(char)?, &t, tol)?.to_result())
        }
        ThetaCmd::Delta10 { tau } => to_json(&igusa_delta10(&parse_tau(tau)?.to_backend::<T>(), tol)?.to_result()),
        ThetaCmd::F0 { tau, d } => to_json(&f0(&parse_tau(tau)?.to_backend::<T>(), *d, tol)?.to_result()),
        ThetaCmd::Order { tau } => {
            let t = parse_tau(tau)?.to_backend::<T>();
            to_json(&vanishing_order_diagonal(t.tau1, t.tau3, &default_eps_ladder(), tol)?)
        }
    }
}

fn groups(cmd: GroupsCmd) -> Result<Value> {
    match cmd {
        GroupsCmd::Member { d, n, flavor, coords, matrix } => {
            let coords = Coords::parse(&coords)?;
            let spec = GroupSpec::new(d, n, Flavor::parse(&flavor)?, coords)?;
            let m: RationalMatrix = parse_json(&matrix)?;
            if m.rows() != 4 || m.cols() != 4 {
                return Err(Error::DimensionMismatch(format!("expected a 4x4 matrix, got {}x{}", m.rows(), m.cols())));
            }
            let (rational, integral) = match coords {
                Coords::Rational => {
                    if !is_symplectic(&m, &standard_j(2))? {
                        return Err(Error::Precondition("matrix is not symplectic for J".into()));
                    }
                    (m.clone(), to_integral(&m, d)?)
                }
                Coords::Integral => {
                    if !is_symplectic(&m.transpose(), &lambda_matrix(d))? {
                        return Err(Error::Precondition("matrix does not preserve Lambda_d".into()));
                    }
                    (to_rational(&m, d)?, m.clone())
                }
            };
            let dual = if integral.is_integral() { Some(dual_quotient_action(&integral, d)?.matrix) } else { None };
            Ok(json!({
                "member": is_member(&m, &spec)?,
                "pattern": congruence_pattern_holds(&rational, d),
                "dual_action": dual,
            }))
        }
        GroupsCmd::Cosets { d } => {
            let reps = coset_reps_psl2(d)?;
            let mut out = Vec::new();
            for r in &reps {
                let class = dual_quotient_action(&to_integral(r, d)?, d)?.psl_class();
                out.push(json!({ "class": class, "matrix": to_json(r)? }));
            }
            Ok(Value::Array(out))
        }
    }
}

fn cusps(cmd: CuspsCmd) -> Result<Value> {
    match cmd {
        CuspsCmd::Stab { d, n, flavor, line, plane } => {
            let spec = GroupSpec::rational(d, n, Flavor::parse(&flavor)?);
            match (line, plane) {
                (Some(l), None) => to_json(&line_stabilizer(&IsotropicLine::new(parse_json(&l)?)?, &spec)?),
                (None, Some(h)) => {
                    let [v, w]: [[i64; 4]; 2] = parse_json(&h)?;
                    to_json(&plane_stabilizer(&IsotropicPlane::new(v, w)?, &spec)?)
                }
                _ => Err(Error::Precondition("give exactly one of --line and --plane".into())),
            }
        }
        CuspsCmd::Counts { p } => to_json(&tits_counts(p)?),
    }
}

fn invariants(cmd: InvariantsCmd) -> Result<Output> {
    Ok(match cmd {
        InvariantsCmd::Table { k_min, k_max, csv } => {
            let rows = invariant_table(k_min, k_max)?;
            if csv {
                let mut s = String::from("k,t,genus,deg_l\n");
                for r in rows {
                    s.push_str(&format!("{},{},{},{}\n", r.k, r.t, r.genus, r.deg_l));
                }
                Output::Text(s)
            } else {
                Output::Json(to_json(&rows)?)
            }
        }
        InvariantsCmd::Prop22 { n, p } => Output::Json(to_json(&verify_prop22(n, p)?)?),
        InvariantsCmd::Ample { n } => {
            let kc = kc_diagonal_curve(n)?;
            let boundary = boundary_positivity(n)?;
            Output::Json(json!({ "kc": kc.to_string(), "ample_boundary": boundary > rint(0) }))
        }
        InvariantsCmd::Claims { n, d } => {
            let k = k_decomposition(n, d)?;
            let m = mu(d)?;
            Output::Json(json!({
                "n": n,
                "d": d,
                "mu": m,
                "k_decomposition": to_json(&k)?,
                "exceptional_coefficient": m * (3 * n - 10),
                "discrepancy_ok": discrepancy_ok(&DiscrepancyCheck::new(n, d))?,
            }))
        }
    })
}

fn voronoi(cmd: VoronoiCmd) -> Result<Value> {
    match cmd {
        VoronoiCmd::Smooth { p, n } => to_json(&smoothness_report(p, n)?),
        VoronoiCmd::Basic { lattice } => {
            let m: RationalMatrix = parse_json(&lattice)?;
            let lattice = Sym2Lattice::from_columns(&m)?;
            let cone = principal_cone();
            let (cones, all_basic) = lattice_smoothness(&lattice)?;
            Ok(json!({
                "basic": is_basic(&cone, &lattice)?,
                "determinant": basic_determinant(&cone, &lattice)?.to_string(),
                "ambient_determinant": ambient_determinant(&cone, &lattice)?.to_string(),
                "translates": cones.len(),
                "translates_basic": all_basic,
            }))
        }
    }
}

fn run(cli: Cli) -> Result<Output> {
    let num = Numeric { digits: cli.precision_digits, tol: cli.tol };
    Ok(match cli.command {
        Command::Groups(c) => Output::Json(groups(c)?),
        Command::Cusps(c) => Output::Json(cusps(c)?),
        Command::Theta(c) => Output::Json(match Backend::for_digits(num.digits) {
            Backend::Double => theta_on::<f64>(&c, &num)?,
            Backend::DoubleDouble => theta_on::<DoubleDouble>(&c, &num)?,
        }),
        Command::Invariants(c) => invariants(c)?,
        Command::Voronoi(c) => Output::Json(voronoi(c)?),
        Command::Verify => Output::Json(to_json(&verify_all(cli.seed, cli.precision_digits))?),
    })
}

fn emit(text: &str, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{}", text.trim_end()) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r,
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(USAGE_EXIT),
            };
        }
    };
    let out = cli.out.clone();
    let (text, code) = match run(cli) {
        Ok(Output::Json(v)) => (serde_json::to_string_pretty(&v).unwrap_or_default(), 0),
        Ok(Output::Text(s)) => (s, 0),
        Err(e) => {
            let v = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            (serde_json::to_string_pretty(&v).unwrap_or_default(), e.exit_code())
        }
    };
    if let Err(e) = emit(&text, out.as_deref()) {
        eprintln!("cannot write output: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code as u8)
}
