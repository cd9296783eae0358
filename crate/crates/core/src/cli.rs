//! The `torfan` command line.
//!
//! Exit codes: 0 for an affirmative verdict, 1 for a negative one, 2 for
//! usage, parse and I/O errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use num_traits::Signed;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cone::Cone;
use crate::fan::{has_semigroup_structure, Fan, FanError, SemigroupDiagnostics};
use crate::io::{self, FanFile, InputError, Report};
use crate::lattice::N;
use crate::monoid::{hilbert_basis, AffineMonoid};
use crate::reconstruct::{reconstruct_fan, ChartError, ReconstructError};
use crate::variety::{
    build_atlas, face_localization_certificate, refute_localization, separatedness_certificate, VarietyError,
    DEFAULT_SEARCH_CEILING,
};

pub const CEILING_VAR: &str = "TORFAN_SEARCH_CEILING";

#[derive(Parser, Debug)]
#[command(name = "torfan", version, about = "Exact computations with toric fans, charts and their certificates")]
struct Cli {
    /// Print the full JSON report instead of a summary
    #[arg(long, global = true)]
    json: bool,

    /// Do not add missing faces to the cones of a fan file
    #[arg(long, global = true)]
    no_auto_close: bool,

    /// Seed echoed into the report; every command is deterministic
    #[arg(long, global = true, allow_negative_numbers = true)]
    seed: Option<i64>,

    /// Output file: the fan file for `reconstruct`, the JSON report otherwise
    #[arg(short = 'o', global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the fan axioms for a fan file
    ValidateFan { fan: PathBuf },
    /// Decide whether the toric variety of a fan is a toric semigroup
    HasSemigroup { fan: PathBuf },
    /// Recover the fan of an atlas file
    Reconstruct { atlas: PathBuf },
    /// Dual cone
    Dual {
        /// Cone file or inline generators such as "1,0;1,2"
        #[arg(allow_hyphen_values = true)]
        cone: String,
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Hilbert basis of the monoid of the dual cone
    Hilbert {
        #[arg(allow_hyphen_values = true)]
        cone: String,
        #[arg(long)]
        rank: Option<usize>,
    },
    /// All faces with witnesses
    Faces {
        #[arg(allow_hyphen_values = true)]
        cone: String,
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Whether the affine chart of a cone has a zero element
    HasZero {
        #[arg(allow_hyphen_values = true)]
        cone: String,
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Whether a one-parameter subgroup extends to the chart, and its limit
    OneParam {
        #[arg(allow_hyphen_values = true)]
        cone: String,
        /// Lattice vector such as "1,0"
        #[arg(allow_hyphen_values = true)]
        vector: String,
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Separatedness certificate for the variety of a fan
    Separatedness { fan: PathBuf },
    /// Localization certificate for a face tau of sigma
    FaceCert {
        #[arg(allow_hyphen_values = true)]
        sigma: String,
        #[arg(allow_hyphen_values = true)]
        tau: String,
        #[arg(long)]
        rank: Option<usize>,
        /// Coordinate bound for the search when tau is not a face
        #[arg(long, default_value_t = 3)]
        bound: u32,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::ValidateFan { .. } => "validate-fan",
            Command::HasSemigroup { .. } => "has-semigroup",
            Command::Reconstruct { .. } => "reconstruct",
            Command::Dual { .. } => "dual",
            Command::Hilbert { .. } => "hilbert",
            Command::Faces { .. } => "faces",
            Command::HasZero { .. } => "has-zero",
            Command::OneParam { .. } => "one-param",
            Command::Separatedness { .. } => "separatedness",
            Command::FaceCert { .. } => "face-cert",
        }
    }
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(msg: String) -> Self {
        Outcome {
            code: 2,
            stdout: String::new(),
            stderr: msg,
        }
    }
}

struct Answer {
    verdict: String,
    affirmative: bool,
    certificates: Value,
    diagnostics: Value,
    text: Vec<String>,
    fan_file: Option<FanFile>,
}

impl Answer {
    fn new(verdict: impl Into<String>, affirmative: bool) -> Self {
        Answer {
            verdict: verdict.into(),
            affirmative,
            certificates: Value::Null,
            diagnostics: Value::Null,
            text: Vec::new(),
            fan_file: None,
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report data serializes")
}

fn search_ceiling() -> Result<u64, InputError> {
    match std::env::var(CEILING_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| InputError::Invalid(format!("{CEILING_VAR} must be a nonnegative integer, got {s:?}"))),
        Err(_) => Ok(DEFAULT_SEARCH_CEILING),
    }
}

fn fan_error_value(e: &FanError) -> Value {
    let detail = match e {
        FanError::Empty => json!({ "kind": "empty" }),
        FanError::RankMismatch { cone, expected, found } => {
            json!({ "kind": "rank_mismatch", "cone": cone, "expected": expected, "found": found })
        }
        FanError::NotStronglyConvex(c) => json!({ "kind": "not_strongly_convex", "cone": c }),
        FanError::Condition1Violation { cone, missing_face } => {
            json!({ "kind": "missing_face", "cone": cone, "missing_face": missing_face })
        }
        FanError::Condition2Violation {
            first,
            second,
            intersection,
        } => json!({ "kind": "bad_intersection", "cones": [first, second], "intersection": intersection }),
    };
    let mut detail = detail;
    detail["message"] = Value::String(e.to_string());
    detail
}

fn load_fan(path: &Path, no_auto_close: bool) -> Result<Result<Fan, FanError>, InputError> {
    io::read_fan_file(path)?.to_fan(no_auto_close)
}

fn invalid_fan(e: FanError) -> Answer {
    let mut a = Answer::new("invalid fan", false);
    a.text.push(e.to_string());
    a.diagnostics = fan_error_value(&e);
    a
}

fn cmd_validate_fan(path: &Path, no_auto_close: bool) -> Result<Answer, InputError> {
    Ok(match load_fan(path, no_auto_close)? {
        Ok(fan) => {
            let mut a = Answer::new("valid fan", true);
            a.text.push(format!("{} cones, rank {}", fan.cones().len(), fan.rank()));
            for c in fan.maximal_cones() {
                a.text.push(format!("maximal {c}"));
            }
            a.certificates = json!({ "fan": FanFile::from_fan(&fan) });
            a
        }
        Err(e) => invalid_fan(e),
    })
}

fn cmd_has_semigroup(path: &Path, no_auto_close: bool) -> Result<Answer, InputError> {
    let fan = match load_fan(path, no_auto_close)? {
        Ok(f) => f,
        Err(e) => return Ok(invalid_fan(e)),
    };
    let d = has_semigroup_structure(&fan);
    let mut a = if d.verdict {
        Answer::new("toric semigroup", true)
    } else {
        Answer::new("no toric semigroup structure", false)
    };
    if let Some(c) = &d.generating_cone {
        a.text.push(format!("generated by {c}"));
        a.certificates = json!({ "generating_cone": c });
    }
    if let Some(diag) = &d.diagnostics {
        a.text.push(diag.to_string());
        a.diagnostics = match diag {
            SemigroupDiagnostics::TwoNondegenerateCones(x, y) => json!({
                "kind": "two_nondegenerate_cones",
                "message": "two nondegenerate cones",
                "cones": [x, y],
            }),
            SemigroupDiagnostics::AdditionNotClosed(w) => json!({
                "kind": "addition_not_closed",
                "message": diag.to_string(),
                "v": w.v,
                "w": w.w,
                "sum": w.sum,
            }),
        };
    }
    Ok(a)
}

fn reconstruct_error_value(e: &ReconstructError) -> Value {
    let mut v = match e {
        ReconstructError::NonSeparated(i, j, overlap, meet) => json!({
            "kind": "non_separated",
            "charts": [i, j],
            "overlap": overlap,
            "intersection": meet,
        }),
        ReconstructError::Chart {
            chart,
            source: ChartError::NotNormal { witness },
        } => json!({ "kind": "not_normal", "chart": chart, "witness": witness }),
        ReconstructError::Chart {
            chart,
            source: ChartError::TorusNotDense,
        } => json!({ "kind": "torus_not_dense", "chart": chart }),
        ReconstructError::FaceCertificateMissing(i, j) => {
            json!({ "kind": "face_certificate_missing", "charts": [i, j] })
        }
        ReconstructError::InvalidFan(f) => json!({ "kind": "invalid_fan", "fan_error": fan_error_value(f) }),
        _ => json!({ "kind": "invalid_atlas" }),
    };
    v["message"] = Value::String(e.to_string());
    v
}

fn cmd_reconstruct(path: &Path) -> Result<Answer, InputError> {
    let atlas = io::read_atlas_file(path)?;
    Ok(match reconstruct_fan(&atlas) {
        Ok(r) => {
            let mut a = Answer::new("reconstructed fan", true);
            let file = FanFile::from_fan(&r.fan);
            for (id, c) in &r.cone_per_chart {
                a.text.push(format!("chart {id}: {c}"));
            }
            a.text.push(format!("fan with {} cones", r.fan.cones().len()));
            let charts: Vec<Value> = r
                .cone_per_chart
                .iter()
                .map(|(id, c)| json!({ "id": id, "cone": c }))
                .collect();
            a.certificates = json!({
                "fan": file,
                "cone_per_chart": charts,
                "face_certificates": r.certificates,
                "separated": r.separated,
                "normal": r.normal,
                "round_trip_verified": r.round_trip_verified,
            });
            a.fan_file = Some(file);
            a
        }
        Err(e) => {
            let verdict = match &e {
                ReconstructError::NonSeparated(..) => "not separated",
                ReconstructError::Chart {
                    source: ChartError::NotNormal { .. },
                    ..
                } => "not normal",
                _ => "not reconstructible",
            };
            let mut a = Answer::new(verdict, false);
            a.text.push(e.to_string());
            a.diagnostics = reconstruct_error_value(&e);
            a
        }
    })
}

fn chart_monoid(cone: &Cone<N>) -> Result<AffineMonoid, InputError> {
    AffineMonoid::new(cone).map_err(|_| InputError::Invalid(format!("{cone} is not strongly convex, so it has no chart")))
}

fn cmd_dual(cone: Cone<N>) -> Answer {
    let d = cone.dual();
    let mut a = Answer::new("dual cone", true);
    a.text.push(format!("{d}"));
    a.certificates = json!({ "cone": cone, "dual": d });
    a
}

fn cmd_hilbert(cone: Cone<N>) -> Answer {
    let hb = hilbert_basis(&cone.dual());
    let mut a = Answer::new("hilbert basis", true);
    for h in &hb.pointed {
        a.text.push(format!("{h}"));
    }
    for u in &hb.units {
        a.text.push(format!("{u} (unit)"));
    }
    a.certificates = json!({ "cone": cone, "hilbert": hb.pointed, "units": hb.units });
    a
}

fn cmd_faces(cone: Cone<N>) -> Answer {
    let faces = cone.faces();
    let mut a = Answer::new(format!("{} faces", faces.len()), true);
    let list: Vec<Value> = faces
        .iter()
        .map(|f| {
            a.text.push(format!("dim {}: {} witness {}", f.cone.dim(), f.cone, f.witness));
            json!({ "dim": f.cone.dim(), "cone": f.cone, "witness": f.witness })
        })
        .collect();
    a.certificates = json!({ "cone": cone, "faces": list });
    a
}

fn cmd_has_zero(cone: Cone<N>) -> Result<Answer, InputError> {
    let m = chart_monoid(&cone)?;
    Ok(match m.has_zero() {
        Some(p) => {
            let mut a = Answer::new("zero point exists", true);
            a.text.push("the point sending 0 to 1 and every other character to 0".into());
            a.certificates = json!({ "zero_point": { "support": p.support(), "values": [] } });
            a
        }
        None => {
            let explanation = "none: the monoid contains nonzero units, which are invertible and cannot be sent to 0; \
                               a zero point exists exactly when the cone spans the whole space";
            let mut a = Answer::new("no zero point", false);
            a.text.push(explanation.into());
            a.diagnostics = json!({
                "kind": "units",
                "units": m.lineality_gens(),
                "explanation": explanation,
            });
            a
        }
    })
}

fn cmd_one_param(cone: Cone<N>, vector: &str) -> Result<Answer, InputError> {
    let v = io::parse_vector_arg(vector, cone.rank())?;
    let m = chart_monoid(&cone)?;
    Ok(match m.one_param_limit(&v) {
        Ok(p) => {
            let mut a = Answer::new("extends", true);
            a.text.push(format!("limit supported on {}", p.support()));
            a.certificates = json!({
                "vector": v,
                "limit": { "support": p.support(), "support_basis": p.support_basis(), "values_all_one": true },
            });
            a
        }
        Err(_) => {
            let blocker = m.generators().into_iter().find(|u| u.pair(&v).is_negative());
            let mut a = Answer::new("does not extend", false);
            if let Some(u) = &blocker {
                a.text.push(format!("character {u} pairs negatively with {v}"));
            }
            a.diagnostics = json!({ "kind": "negative_pairing", "vector": v, "character": blocker });
            a
        }
    })
}

fn cmd_separatedness(path: &Path, no_auto_close: bool) -> Result<Answer, InputError> {
    let ceiling = search_ceiling()?;
    let fan = match load_fan(path, no_auto_close)? {
        Ok(f) => f,
        Err(e) => return Ok(invalid_fan(e)),
    };
    let atlas = build_atlas(&fan);
    Ok(match separatedness_certificate(&atlas, ceiling) {
        Ok(cert) => {
            let mut a = Answer::new("separated", true);
            let count: usize = cert.pairs.iter().map(|p| p.decompositions.len()).sum();
            a.text.push(format!("{} chart pairs, {count} decompositions", cert.pairs.len()));
            a.certificates = to_value(&cert);
            a
        }
        Err(e) => {
            let mut a = Answer::new("certificate search exhausted", false);
            a.text.push(e.to_string());
            let mut d = match &e {
                VarietyError::CertificateSearchExhausted {
                    sigma,
                    tau,
                    target,
                    ceiling,
                } => json!({ "kind": "search_exhausted", "cones": [sigma, tau], "target": target, "ceiling": ceiling }),
                _ => json!({ "kind": "error" }),
            };
            d["message"] = Value::String(e.to_string());
            a.diagnostics = d;
            a
        }
    })
}

fn cmd_face_cert(sigma: Cone<N>, tau: Cone<N>, bound: u32) -> Result<Answer, InputError> {
    let m = chart_monoid(&sigma)?;
    Ok(match face_localization_certificate(&m, &tau) {
        Some(cert) => {
            let mut a = Answer::new("face", true);
            a.text.push(format!("f = {}", cert.f));
            for c in &cert.covers {
                a.text.push(format!("{} = {} - {}·f", c.target, c.s, c.m));
            }
            a.certificates = to_value(&cert);
            a
        }
        None => {
            let refuted = refute_localization(&m, &tau, bound);
            let mut a = Answer::new("not a face", false);
            a.text.push(format!("{tau} is not a face of {sigma}"));
            a.diagnostics = json!({
                "kind": "not_a_face",
                "contained": sigma.contains_cone(&tau),
                "search_bound": bound,
                "no_localizing_element_found": refuted,
            });
            a
        }
    })
}

fn dispatch(cli: &Cli) -> Result<Answer, InputError> {
    let nac = cli.no_auto_close;
    match &cli.command {
        Command::ValidateFan { fan } => cmd_validate_fan(fan, nac),
        Command::HasSemigroup { fan } => cmd_has_semigroup(fan, nac),
        Command::Reconstruct { atlas } => cmd_reconstruct(atlas),
        Command::Dual { cone, rank } => Ok(cmd_dual(io::parse_cone_arg(cone, *rank)?)),
        Command::Hilbert { cone, rank } => Ok(cmd_hilbert(io::parse_cone_arg(cone, *rank)?)),
        Command::Faces { cone, rank } => Ok(cmd_faces(io::parse_cone_arg(cone, *rank)?)),
        Command::HasZero { cone, rank } => cmd_has_zero(io::parse_cone_arg(cone, *rank)?),
        Command::OneParam { cone, vector, rank } => cmd_one_param(io::parse_cone_arg(cone, *rank)?, vector),
        Command::Separatedness { fan } => cmd_separatedness(fan, nac),
        Command::FaceCert {
            sigma,
            tau,
            rank,
            bound,
        } => {
            let s = io::parse_cone_arg(sigma, *rank)?;
            let t = io::parse_cone_arg(tau, Some(s.rank()))?;
            cmd_face_cert(s, t, *bound)
        }
    }
}

fn write_json<T: Serialize>(path: &Path, x: &T) -> Result<(), String> {
    let text = serde_json::to_string_pretty(x).expect("serializable");
    fs::write(path, text + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Runs one command. `args` includes the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let rendered = e.render().to_string();
            return if code == 0 {
                Outcome {
                    code,
                    stdout: rendered,
                    stderr: String::new(),
                }
            } else {
                Outcome::usage(rendered)
            };
        }
    };
    let start = Instant::now();
    let answer = match dispatch(&cli) {
        Ok(a) => a,
        Err(e) => return Outcome::usage(format!("error: {e}\n")),
    };
    let timing_us = u64::try_from(start.elapsed().as_micros()).unwrap_or(u64::MAX);
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let report = Report {
        command: cli.command.name().to_string(),
        input: json!({ "args": echo }),
        verdict: answer.verdict.clone(),
        affirmative: answer.affirmative,
        certificates: answer.certificates,
        diagnostics: answer.diagnostics,
        seed: cli.seed,
        timing_us,
    };
    if let Some(path) = &cli.output {
        let written = match (&cli.command, &answer.fan_file) {
            (Command::Reconstruct { .. }, Some(f)) => write_json(path, f),
            (Command::Reconstruct { .. }, None) => Ok(()),
            _ => write_json(path, &report),
        };
        if let Err(msg) = written {
            return Outcome::usage(format!("error: {msg}\n"));
        }
    }
    let stdout = if cli.json {
        serde_json::to_string_pretty(&report).expect("serializable") + "\n"
    } else {
        let mut s = format!("{}: {}\n", report.command, report.verdict);
        for line in &answer.text {
            s.push_str("  ");
            s.push_str(line);
            s.push('\n');
        }
        if let Some(seed) = cli.seed {
            s.push_str(&format!("  seed {seed}\n"));
        }
        s
    };
    Outcome {
        code: if answer.affirmative { 0 } else { 1 },
        stdout,
        stderr: String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Outcome {
        run(std::iter::once("torfan").chain(args.iter().copied()))
    }

    #[test]
    fn query_commands() {
        let out = run_args(&["dual", "1,0;0,1"]);
        assert_eq!(out.code, 0);
        assert!(out.stdout.contains("cone{(0,1), (1,0)}"));

        let out = run_args(&["--json", "hilbert", "1,0;1,2"]);
        assert_eq!(out.code, 0);
        let r: Report = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(r.certificates["hilbert"].as_array().unwrap().len(), 3);

        let out = run_args(&["has-zero", "1,0"]);
        assert_eq!(out.code, 1);
        assert!(out.stdout.contains("none"));
        assert_eq!(run_args(&["has-zero", "1,0;0,1"]).code, 0);

        assert_eq!(run_args(&["one-param", "1,0;0,1", "2,3"]).code, 0);
        assert_eq!(run_args(&["one-param", "1,0;0,1", "-1,3"]).code, 1);
        assert_eq!(run_args(&["faces", "1,0;0,1"]).stdout.lines().count(), 5);
        assert_eq!(run_args(&["face-cert", "1,0;0,1", "1,0"]).code, 0);
        assert_eq!(run_args(&["face-cert", "1,0;0,1", "1,1"]).code, 1);
        assert_eq!(run_args(&["dual", "-1,0;0,1"]).code, 0);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_args(&["frobnicate"]).code, 2);
        assert_eq!(run_args(&["dual"]).code, 2);
        assert_eq!(run_args(&["dual", "1,x"]).code, 2);
        assert_eq!(run_args(&["has-zero", "1,0;-1,0"]).code, 2);
        assert_eq!(run_args(&["validate-fan", "/nonexistent/fan.json"]).code, 2);
        assert_eq!(run_args(&["--help"]).code, 0);
    }

    #[test]
    fn seed_is_echoed() {
        let out = run_args(&["--json", "--seed", "-7", "dual", "1,0"]);
        let r: Report = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(r.seed, Some(-7));
    }
}
