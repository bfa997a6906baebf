use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gperiod_core::cm::{class_number, class_number_scan, heegner_scan, scan_csv};
use gperiod_core::family::{classify_coordinates, FamilySpec};
use gperiod_core::gfunctions::{family_radius, radius, Place, RadiusReport};
use gperiod_core::heights::{default_epsilons, galois_orbit_bound_report, siegel_table, OrbitConfig};
use gperiod_core::numerics::{ComplexBall, FieldElem, Precision};
use gperiod_core::periods::{connection_constants, legendre_periods, periods_on_chart, BallMat};
use gperiod_core::picard_fuchs::{all_normalized_solutions, gauss_manin, normalized_solution};
use gperiod_core::relations::{
    build_relation, cm_adapted_factorization, family_series, locate_cm_fibers, rescaled_basis, trivial_relation_numeric_check, trivial_relation_series_check,
    RelationError, RelationOptions,
};
use rug::Rational;
use serde_json::json;

#[derive(Parser)]
#[command(name = "gperiod", version, about = "G-function series, periods and CM relations for Legendre families")]
struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true, env = "GPERIOD_PREC", default_value_t = 256)]
    prec: u32,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FamilyArg {
    /// `default` or a path to a family JSON file.
    #[arg(long, default_value = "default")]
    family: String,
}

impl FamilyArg {
    fn load(&self) -> Result<FamilySpec, CliError> {
        if self.family == "default" {
            return Ok(FamilySpec::default_family());
        }
        FamilySpec::load(&PathBuf::from(&self.family)).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Fixture {
    /// Every basis form multiplied by 2.
    ScaledBasis,
    /// The two cycles of every period matrix exchanged.
    SwappedCycles,
}

#[derive(Subcommand)]
enum Command {
    /// Exact coefficients of the normalized solution of one coordinate.
    Series {
        #[command(flatten)]
        family: FamilyArg,
        /// One-based coordinate index.
        #[arg(long)]
        coord: usize,
        /// Highest power of x printed.
        #[arg(long, default_value_t = 50)]
        order: usize,
    },
    /// Checks the determinant relations exactly and numerically.
    TrivialCheck {
        #[command(flatten)]
        family: FamilyArg,
        #[arg(long, default_value_t = 50)]
        order: usize,
        /// λ values for the numeric check; 50 points in (0, 1) by default.
        #[arg(long = "numeric-at")]
        numeric_at: Vec<String>,
        #[arg(long, value_enum)]
        fixture: Option<Fixture>,
    },
    /// Relation certificate at a CM fiber.
    Relation {
        #[command(flatten)]
        family: FamilyArg,
        /// The point x(s), e.g. `5/2 - 2*sqrt(2)`; the nearest located CM fiber if omitted.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        #[arg(long, default_value_t = 50)]
        check_order: usize,
    },
    /// Period matrices at λ, or on the chart of a family coordinate at x.
    Periods {
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        #[command(flatten)]
        family: FamilyArg,
        #[arg(long)]
        coord: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long, default_value_t = 200)]
        order: usize,
    },
    /// Class numbers and scans of imaginary quadratic discriminants.
    Cm {
        #[arg(long, allow_hyphen_values = true, group = "what")]
        class_number: Option<i64>,
        #[arg(long, group = "what")]
        scan: Option<i64>,
        #[arg(long, group = "what")]
        heegner: Option<i64>,
    },
    /// Table of h(D)/|D|^(1/2 − ε).
    Siegel {
        #[arg(long, default_value_t = 1000)]
        max: i64,
        /// Repeatable; defaults to 0.05, 0.1, 0.25, 0.45.
        #[arg(long)]
        eps: Vec<String>,
        /// Print the per-ε minima instead of the rows.
        #[arg(long)]
        summary: bool,
    },
    /// Archimedean and p-adic radius estimates of the family's G-series.
    Radii {
        #[command(flatten)]
        family: FamilyArg,
        #[arg(long, default_value_t = 200)]
        order: usize,
        /// Primes for the p-adic radii.
        #[arg(long, value_delimiter = ',', default_value = "2,3,5,7")]
        primes: Vec<u32>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Certificate(String),
    Unimplemented(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Certificate(_) => 2,
            CliError::Unimplemented(_) => 3,
        }
    }
}

impl From<RelationError> for CliError {
    fn from(e: RelationError) -> Self {
        match e {
            RelationError::NotImplementedCase(_) => CliError::Unimplemented(e.to_string()),
            _ => CliError::Certificate(e.to_string()),
        }
    }
}

fn cert<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Certificate(e.to_string())
}

/// `p/q`, an integer, or a terminating decimal.
fn parse_rational(s: &str) -> Result<Rational, CliError> {
    let bad = || CliError::Usage(format!("not a rational number: `{s}`"));
    if let Ok(q) = s.parse::<Rational>() {
        return Ok(q);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').ok_or_else(bad)?;
    if !(int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())) || frac.is_empty() {
        return Err(bad());
    }
    let num: Rational = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let q = num / Rational::from(rug::Integer::from(rug::Integer::u_pow_u(10, frac.len() as u32)));
    Ok(if neg { -q } else { q })
}

fn ball_mat_json(m: &BallMat) -> serde_json::Value {
    json!(m.iter().map(|r| r.iter().map(|b| b.to_json(30)).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn precision(bits: u32) -> Result<Precision, CliError> {
    Precision::new(bits).map_err(|e| CliError::Usage(e.to_string()))
}

/// Writes to stdout, treating a closed pipe as the reader's choice.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn print_json(v: &serde_json::Value) {
    emit(&format!("{}\n", serde_json::to_string_pretty(v).expect("serializable")));
}

fn run(cli: Cli) -> Result<(), CliError> {
    let prec = precision(cli.prec)?;
    match cli.command {
        Command::Series { family, coord, order } => {
            let spec = family.load()?;
            if coord == 0 || coord > spec.n {
                return Err(CliError::Usage(format!("coordinate {coord} out of range 1..={}", spec.n)));
            }
            let g = gauss_manin(&spec, coord - 1).map_err(cert)?;
            let y = normalized_solution(&g, order + 1).map_err(cert)?;
            let entries: Vec<Vec<Vec<String>>> =
                y.entries.iter().map(|r| r.iter().map(|s| s.coeffs().iter().map(|c| c.to_string()).collect()).collect()).collect();
            let residue: Vec<Vec<String>> = y.residue.iter().map(|r| r.iter().map(|c| c.to_string()).collect()).collect();
            print_json(&json!({
                "coordinate": coord,
                "g": spec.coords[coord - 1].source,
                "singular": g.is_singular(),
                "order": order,
                "residue": residue,
                "entries": entries,
            }));
        }
        Command::TrivialCheck { family, order, numeric_at, fixture } => {
            let spec = family.load()?;
            let mut ys = all_normalized_solutions(&spec, order).map_err(cert)?;
            if let Some(Fixture::ScaledBasis) = fixture {
                ys = ys.iter().map(|y| rescaled_basis(y, &Rational::from(2))).collect();
            }
            let exact = trivial_relation_series_check(&ys, order)?;
            emit(&format!("PASS exact: det Y - 1 = 0 mod x^{order} for coordinates {:?}\n", exact.checked));
            let lambdas: Vec<Rational> = if numeric_at.is_empty() {
                (1..=50).map(|k| Rational::from((k, 51))).collect()
            } else {
                numeric_at.iter().map(|s| parse_rational(s)).collect::<Result<_, _>>()?
            };
            let mut ps = Vec::with_capacity(lambdas.len());
            for l in &lambdas {
                let p = legendre_periods(&ComplexBall::from_rational(l, prec), prec).map_err(cert)?;
                ps.push(if let Some(Fixture::SwappedCycles) = fixture { p.swapped_cycles() } else { p });
            }
            let numeric = trivial_relation_numeric_check(&ps)?;
            emit(&format!("PASS numeric: det P - 1/(2 pi i) contains 0 at {} points\n", lambdas.len()));
            for (l, r) in lambdas.iter().zip(&numeric.residuals).take(if numeric_at.is_empty() { 0 } else { usize::MAX }) {
                let (re, im) = r.mid_strings(6);
                emit(&format!("  lambda = {l}: residual mid = ({re}, {im}), rad = {}\n", r.rad_string()));
            }
            emit(&format!("max |residual| <= {:e}\n", numeric.max_radius));
        }
        Command::Relation { family, point, check_order } => {
            let spec = family.load()?;
            let t = match point {
                Some(p) => FieldElem::parse(&p).map_err(|e| CliError::Usage(e.to_string()))?,
                None => locate_cm_fibers(&spec, 0.5, prec)?
                    .into_iter()
                    .next()
                    .map(|f| f.t)
                    .ok_or_else(|| CliError::Certificate("no CM fiber located with |x| < 1/2".into()))?,
            };
            let opts = RelationOptions { prec, check_order, ..Default::default() };
            let out = build_relation(&spec, &t, opts)?;
            let mut v = out.to_json();
            v["orbit_report"] = match galois_orbit_bound_report(&out, &out.certificates, &OrbitConfig::default(), prec) {
                Ok(r) => r.to_json(),
                Err(e) => json!({ "error": e.to_string() }),
            };
            print_json(&v);
            if !out.certificates.iter().all(|c| c.residual.contains_zero()) || out.polynomial.degree > out.degree_bound() {
                return Err(CliError::Certificate("relation certificate failed".into()));
            }
        }
        Command::Periods { lambda, family, coord, x, order } => match (lambda, coord) {
            (Some(l), None) => {
                let l = parse_rational(&l)?;
                let p = legendre_periods(&ComplexBall::from_rational(&l, prec), prec).map_err(cert)?;
                print_json(&json!({
                    "lambda": l.to_string(),
                    "periods": ball_mat_json(&p.entries),
                    "det_minus_legendre": p.legendre_residual().map_err(cert)?.to_json(30),
                }));
            }
            (None, Some(k)) => {
                let spec = family.load()?;
                if k == 0 || k > spec.n {
                    return Err(CliError::Usage(format!("coordinate {k} out of range 1..={}", spec.n)));
                }
                let x0 = parse_rational(x.as_deref().unwrap_or("1/64"))?;
                let g = gauss_manin(&spec, k - 1).map_err(cert)?;
                let y = normalized_solution(&g, order).map_err(cert)?;
                let xb = ComplexBall::from_rational(&x0, prec);
                let p = periods_on_chart(&g, &xb, prec).map_err(cert)?;
                let c = connection_constants(&y, &xb, &p, y.monodromy().as_ref(), prec).map_err(cert)?;
                let adapted = match g.class.cm_discriminant {
                    Some(_) => {
                        let f = cm_adapted_factorization(&spec, k - 1, &x0, order, prec).map_err(cert)?;
                        Some(json!({
                            "basis": f.basis.to_json(),
                            "pi": ball_mat_json(&f.pi),
                            "pi_from_series": ball_mat_json(&f.pi_from_series),
                            "varpi_product": f.product.to_json(30),
                            "factorization_residual_bound": format!("{:e}", f.factorization_residual),
                            "off_diagonal_bound": format!("{:e}", f.off_diagonal),
                        }))
                    }
                    None => None,
                };
                print_json(&json!({
                    "coordinate": k,
                    "x": x0.to_string(),
                    "periods": ball_mat_json(&p.entries),
                    "connection": ball_mat_json(&c.pi),
                    "cm_form": c.cm_form.as_ref().map(|v| v.to_json(30)),
                    "off_diagonal_bound": format!("{:e}", c.off_diagonal_max()),
                    "cm_adapted": adapted,
                }));
            }
            _ => return Err(CliError::Usage("give exactly one of --lambda or --coord".into())),
        },
        Command::Cm { class_number: d, scan, heegner } => match (d, scan, heegner) {
            (Some(d), None, None) => {
                let o = class_number(d).map_err(|e| CliError::Usage(e.to_string()))?;
                let forms: Vec<[i64; 3]> = o.forms.iter().map(|f| [f.a, f.b, f.c]).collect();
                print_json(&json!({ "D": d, "h": o.h, "forms": forms }));
            }
            (None, Some(m), None) => {
                let mut rows = class_number_scan(m);
                rows.sort_by_key(|r| -r.d);
                emit(&scan_csv(&rows));
            }
            (None, None, Some(m)) => {
                let mut ds = heegner_scan(m, false);
                ds.sort_by_key(|d| -d);
                print_json(&json!({ "max_abs_D": m, "heegner": ds }));
            }
            _ => return Err(CliError::Usage("give one of --class-number, --scan, --heegner".into())),
        },
        Command::Siegel { max, eps, summary } => {
            if max < 4 {
                return Err(CliError::Usage("--max must be at least 4".into()));
            }
            let eps = if eps.is_empty() { default_epsilons() } else { eps.iter().map(|e| parse_rational(e)).collect::<Result<_, _>>()? };
            let t = siegel_table(max, &eps, prec).map_err(|e| CliError::Usage(e.to_string()))?;
            emit(&if summary { t.summary_csv() } else { t.to_csv() });
        }
        Command::Radii { family, order, primes } => {
            let spec = family.load()?;
            let series = family_series(&spec, order)?;
            let mut places = vec![Place::Archimedean];
            places.extend(primes.iter().map(|&p| Place::Prime(p)));
            let classes = classify_coordinates(&spec, prec);
            let mut out = Vec::new();
            for place in places {
                let reports: Vec<RadiusReport> = series.iter().map(|s| radius(s, place)).collect::<Result<_, _>>().map_err(cert)?;
                let fam = family_radius(&reports, place);
                out.push(json!({
                    "place": place.to_string(),
                    "series": reports.iter().map(|r| json!({
                        "label": [r.label.0, r.label.1, r.label.2],
                        "estimate": r.estimate.to_string(),
                        "method": format!("{:?}", r.method),
                        "terms": r.terms,
                    })).collect::<Vec<_>>(),
                    "family_min": fam.as_ref().map(|f| f.min.to_string()),
                    "family_max": fam.as_ref().map(|f| f.max.to_string()),
                }));
            }
            let kinds: Vec<String> = classes.iter().map(|c| format!("{:?}", c.kind)).collect();
            print_json(&json!({ "order": order, "coordinate_kinds": kinds, "places": out }));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = match &e {
                CliError::Usage(m) => format!("usage error: {m}"),
                CliError::Certificate(m) => format!("FAIL: {m}"),
                CliError::Unimplemented(m) => format!("unimplemented: {m}"),
            };
            eprintln!("{msg}");
            ExitCode::from(e.code())
        }
    }
}
