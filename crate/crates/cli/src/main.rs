//! Command line interface for the realization toolkit.
//!
//! Machine-readable JSON reports go to stdout, human-readable summaries to
//! stderr. Exit codes: 0 success/feasible/pass, 1 fail/infeasible,
//! 2 undecided, 3 input error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use fincor::cones::{
    cprp_certificate, polyhedral_obstruction_scan, CertificateStatus, MappingConeSpec, SDRCone,
};
use fincor::encode::{ComplexMatJson, RealMatJson};
use fincor::feasibility::{FeasibilityOutcome, SolverConfig, Start};
use fincor::learning::{empirical_table, sample_trajectories, spectral_realization, WordTable};
use fincor::linalg::{CMat, RVec};
use fincor::operators::CPRealization;
use fincor::process::QuasiRealization;
use fincor::quotient::{equivalence_isomorphism, quotient_realization};
use fincor::reduction::{reduce_to_realization, verify_cp_realization, ReductionConfig};
use fincor::catalog::{self, FixtureParams};

/// Realization toolkit for stationary finite-alphabet processes.
#[derive(Parser)]
#[command(name = "fincor", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Numerical tolerance (env: FINCOR_TOL).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Iteration budget for the feasibility engine (env: FINCOR_MAX_ITER).
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Random seed (env: FINCOR_SEED).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EngineArgs {
    /// Stall threshold for infeasibility detection.
    #[arg(long)]
    tol_stall: Option<f64>,
    /// Sliding-window length of the stall test.
    #[arg(long)]
    stall_window: Option<usize>,
    /// JSON file with engine settings (max_iter, tol_feas, tol_stall,
    /// stall_window, stall_rel_change); explicit flags take precedence.
    #[arg(long)]
    engine_config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate word probabilities of a quasi-realization.
    Eval {
        #[arg(long)]
        realization: PathBuf,
        /// Word to evaluate (empty string for the empty word).
        #[arg(long, conflicts_with = "length")]
        word: Option<String>,
        /// Evaluate all words of this length instead.
        #[arg(long)]
        length: Option<usize>,
    },
    /// Compute the quotient (minimal) realization.
    Quotient {
        #[arg(long)]
        realization: PathBuf,
        /// Write the quotient realization JSON here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decide equivalence of two quasi-realizations.
    Equiv {
        #[arg(long)]
        realization: PathBuf,
        #[arg(long)]
        realization2: PathBuf,
    },
    /// Verify an instrument realization (complete positivity, unitality,
    /// stationarity).
    VerifyCp {
        #[arg(long)]
        cp: PathBuf,
    },
    /// Reduce witness maps with a PSD pair to a proper realization.
    Reduce {
        #[arg(long)]
        cp: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Include the reduction trace in the report.
        #[arg(long)]
        trace: bool,
    },
    /// SDR cone membership (optionally at an extension level).
    Cone {
        /// Cone JSON: {"n":..,"W":[..],"L":[..]}.
        #[arg(long)]
        cone: PathBuf,
        /// Target vector, comma separated.
        #[arg(long)]
        vector: String,
        /// Extension level (default 1 = the cone itself).
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Mapping-cone membership of a quotient map target.
    Mapcone {
        /// Specification JSON: {"n":..,"W":[..],"Wt":[..],"L":[..]?}.
        #[arg(long)]
        spec: PathBuf,
        /// Target matrix JSON (nested rows).
        #[arg(long)]
        map: PathBuf,
        /// Use the decomposable (positivity evidence) relaxation.
        #[arg(long)]
        decomposable: bool,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Full realizability certificate and reduction to an instrument.
    Cprp {
        #[arg(long)]
        realization: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        /// Write the reduced instrument realization here on success.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Directory for the raw witnesses (per-symbol Choi matrices and
        /// the cone/dual preimages); paths are listed in the report.
        #[arg(long)]
        witness_dir: Option<PathBuf>,
        /// Include the reduction trace in the report.
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Spectral reconstruction from a word table or trajectories.
    Learn {
        #[arg(long, conflicts_with = "trajectories")]
        table: Option<PathBuf>,
        /// Newline-delimited symbol strings.
        #[arg(long, requires = "alphabet")]
        trajectories: Option<PathBuf>,
        /// Comma-separated alphabet for trajectory input.
        #[arg(long)]
        alphabet: Option<String>,
        /// Table depth for trajectory input.
        #[arg(long, default_value_t = 5)]
        max_length: usize,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sample trajectories from an instrument realization.
    Sample {
        #[arg(long)]
        cp: PathBuf,
        #[arg(long, default_value_t = 100)]
        length: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Ray-growth diagnostic against small stable polyhedral cones.
    Obstruction {
        #[arg(long)]
        realization: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_length: usize,
    },
    /// Dump a built-in example model.
    Examples {
        /// One of: quasi, qubit, two-qubit, direct-sum, direct-sum-alt,
        /// cone-direct, cone-spin-flip, spec-two-qubit, spec-qubit-full,
        /// tridiagonal.
        #[arg(long)]
        name: String,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        /// Matrix size for the tridiagonal family.
        #[arg(long, default_value_t = 4)]
        m: usize,
        /// Generator permutation for the tridiagonal family
        /// (comma separated, e.g. "0,2,1"), or "identity"/"reversal".
        #[arg(long, default_value = "identity")]
        perm: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            println!("{}", json!({"error": err.to_string()}));
            ExitCode::from(3)
        }
    }
}

fn env_f64(name: &str) -> Option<f64> {
    std::env::var(name).ok().and_then(|v| v.parse().ok())
}

fn env_usize(name: &str) -> Option<usize> {
    std::env::var(name).ok().and_then(|v| v.parse().ok())
}

fn env_u64(name: &str) -> Option<u64> {
    std::env::var(name).ok().and_then(|v| v.parse().ok())
}

struct Settings {
    tol: f64,
    seed: u64,
}

fn read_text(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_output(path: &Option<PathBuf>, text: &str) -> Result<(), String> {
    if let Some(path) = path {
        fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(())
}

fn emit(report: &Value, summary: &str) {
    println!("{}", serde_json::to_string_pretty(report).expect("report json"));
    eprintln!("{summary}");
}

fn outcome_json(out: &FeasibilityOutcome) -> Value {
    match out {
        FeasibilityOutcome::Feasible {
            iterations,
            residual,
            ..
        } => json!({"status": "feasible", "iterations": iterations, "residual": residual}),
        FeasibilityOutcome::Infeasible {
            gap,
            iterations,
            window,
        } => json!({"status": "infeasible", "gap": gap, "iterations": iterations, "window": window}),
        FeasibilityOutcome::Undecided {
            iterations,
            last_gap,
            ..
        } => json!({"status": "undecided", "iterations": iterations, "last_gap": last_gap}),
    }
}

fn outcome_exit(out: &FeasibilityOutcome) -> ExitCode {
    match out {
        FeasibilityOutcome::Feasible { .. } => ExitCode::SUCCESS,
        FeasibilityOutcome::Infeasible { .. } => ExitCode::from(1),
        FeasibilityOutcome::Undecided { .. } => ExitCode::from(2),
    }
}

fn parse_vector(text: &str) -> Result<RVec, String> {
    let vals: Result<Vec<f64>, _> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect();
    vals.map(RVec::from_vec)
        .map_err(|e| format!("vector parse: {e}"))
}

fn load_cone(path: &Path) -> Result<SDRCone, String> {
    let text = read_text(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let n = v["n"].as_u64().ok_or("cone json needs n")? as usize;
    let w = load_cmat_list(&v["W"])?;
    let l = match v.get("L") {
        Some(lv) if !lv.is_null() => {
            let rm: RealMatJson =
                serde_json::from_value(lv.clone()).map_err(|e| e.to_string())?;
            rm.to_mat().map_err(|e| e.to_string())?
        }
        _ => return Err("cone json needs L".into()),
    };
    SDRCone::new(n, w, l).map_err(|e| e.to_string())
}

fn load_cmat_list(v: &Value) -> Result<Vec<CMat>, String> {
    let arr = v.as_array().ok_or("expected an array of complex matrices")?;
    arr.iter()
        .map(|m| {
            let cm: ComplexMatJson =
                serde_json::from_value(m.clone()).map_err(|e| e.to_string())?;
            cm.to_mat().map_err(|e| e.to_string())
        })
        .collect()
}

fn load_spec(path: &Path) -> Result<MappingConeSpec, String> {
    let text = read_text(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let n = v["n"].as_u64().ok_or("spec json needs n")? as usize;
    let w = load_cmat_list(&v["W"])?;
    let wt = load_cmat_list(&v["Wt"])?;
    match v.get("L") {
        Some(lv) if !lv.is_null() => {
            let rm: RealMatJson =
                serde_json::from_value(lv.clone()).map_err(|e| e.to_string())?;
            let l = rm.to_mat().map_err(|e| e.to_string())?;
            MappingConeSpec::with_l(n, w, wt, l).map_err(|e| e.to_string())
        }
        _ => MappingConeSpec::new(n, w, wt).map_err(|e| e.to_string()),
    }
}

fn spec_to_json(spec: &MappingConeSpec) -> Value {
    json!({
        "n": spec.n,
        "W": spec.w.iter().map(ComplexMatJson::from_mat).collect::<Vec<_>>(),
        "Wt": spec.wt.iter().map(ComplexMatJson::from_mat).collect::<Vec<_>>(),
        "L": RealMatJson::from_mat(&spec.l),
    })
}

fn cone_to_json(cone: &SDRCone) -> Value {
    json!({
        "n": cone.n,
        "W": cone.w_basis.iter().map(ComplexMatJson::from_mat).collect::<Vec<_>>(),
        "L": RealMatJson::from_mat(&cone.l),
    })
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let tol_opt = cli.tol.or_else(|| env_f64("FINCOR_TOL"));
    let max_iter_opt = cli.max_iter.or_else(|| env_usize("FINCOR_MAX_ITER"));
    let settings = Settings {
        tol: tol_opt.unwrap_or(1e-9),
        seed: cli.seed.or_else(|| env_u64("FINCOR_SEED")).unwrap_or(7),
    };
    let engine_config = |e: &EngineArgs| -> Result<SolverConfig, String> {
        let mut base: SolverConfig = match &e.engine_config {
            Some(path) => serde_json::from_str(&read_text(path)?)
                .map_err(|err| format!("{}: {err}", path.display()))?,
            None => SolverConfig::default(),
        };
        if let Some(m) = max_iter_opt {
            base.max_iter = m;
        }
        if let Some(t) = tol_opt {
            base.tol_feas = t.max(1e-12);
        }
        if let Some(t) = e.tol_stall {
            base.tol_stall = t;
        }
        if let Some(w) = e.stall_window {
            base.stall_window = w;
        }
        Ok(base)
    };

    match cli.command {
        Command::Eval {
            realization,
            word,
            length,
        } => {
            let r = QuasiRealization::from_json_str(&read_text(&realization)?)
                .map_err(|e| e.to_string())?;
            if let Some(len) = length {
                let table: Vec<Value> = r
                    .batch_probabilities(len)
                    .into_iter()
                    .map(|(w, p)| json!({"word": r.alphabet().format_word(&w), "p": p}))
                    .collect();
                emit(
                    &json!({"length": len, "probabilities": table, "seed": settings.seed}),
                    &format!("evaluated {} words of length {len}", table.len()),
                );
            } else {
                let text = word.unwrap_or_default();
                let w = r.alphabet().parse_word(&text).map_err(|e| e.to_string())?;
                let p = r.word_probability(&w).map_err(|e| e.to_string())?;
                emit(
                    &json!({"word": text, "probability": p, "seed": settings.seed}),
                    &format!("p({text:?}) = {p:.12}"),
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Quotient {
            realization,
            output,
        } => {
            let r = QuasiRealization::from_json_str(&read_text(&realization)?)
                .map_err(|e| e.to_string())?;
            let q = quotient_realization(&r, settings.tol).map_err(|e| e.to_string())?;
            let report = serde_json::to_value(q.to_json(&r)).map_err(|e| e.to_string())?;
            write_output(&output, &q.quotient.to_json_string())?;
            emit(
                &report,
                &format!(
                    "quotient dimension {} (accessible {}, observable {}, kernel {})",
                    q.quotient.dim(),
                    q.accessible_dim,
                    q.observable_dim,
                    q.kernel_dim
                ),
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Equiv {
            realization,
            realization2,
        } => {
            let r1 = QuasiRealization::from_json_str(&read_text(&realization)?)
                .map_err(|e| e.to_string())?;
            let r2 = QuasiRealization::from_json_str(&read_text(&realization2)?)
                .map_err(|e| e.to_string())?;
            let iso = equivalence_isomorphism(&r1, &r2, settings.tol.max(1e-8))
                .map_err(|e| e.to_string())?;
            let report = json!({
                "equivalent": iso.found,
                "quotient_dims": [iso.quotient_dims.0, iso.quotient_dims.1],
                "residuals": iso.residuals.as_ref().map(|r| json!({
                    "pi": r.pi, "tau": r.tau, "maps": r.maps,
                })),
                "reason": iso.reason,
                "seed": settings.seed,
            });
            emit(
                &report,
                if iso.found {
                    "equivalent: quotients are isomorphic"
                } else {
                    "not equivalent"
                },
            );
            Ok(if iso.found {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::VerifyCp { cp } => {
            let q = CPRealization::from_json_str(&read_text(&cp)?).map_err(|e| e.to_string())?;
            let report = verify_cp_realization(&q, settings.tol.max(1e-9));
            let passed = report.passed();
            let value = serde_json::to_value(&report).map_err(|e| e.to_string())?;
            emit(
                &value,
                if passed {
                    "instrument realization verified"
                } else {
                    "verification failed"
                },
            );
            Ok(if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Reduce { cp, output, trace } => {
            let q = CPRealization::from_json_str(&read_text(&cp)?).map_err(|e| e.to_string())?;
            let cfg = ReductionConfig {
                tol: settings.tol,
                ..ReductionConfig::default()
            };
            let (real, tr) = reduce_to_realization(&q.instrument, &q.rho, &q.identity, &cfg)
                .map_err(|e| e.to_string())?;
            write_output(&output, &real.to_json_string())?;
            let mut report = json!({
                "hilbert_dim": real.n(),
                "sieve_steps": tr.sieve_count(),
                "seed": settings.seed,
            });
            if trace {
                report["trace"] = serde_json::to_value(&tr).map_err(|e| e.to_string())?;
            }
            emit(
                &report,
                &format!("reduced to a realization on dimension {}", real.n()),
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Cone {
            cone,
            vector,
            level,
            engine,
        } => {
            let c = load_cone(&cone)?;
            let x = parse_vector(&vector)?;
            let config = engine_config(&engine)?;
            let out = if level <= 1 {
                c.membership(&x, &config, Start::Default)
            } else {
                c.extension_membership(level, &x, &config, Start::Default)
            }
            .map_err(|e| e.to_string())?;
            let report = json!({
                "level": level,
                "outcome": outcome_json(&out),
                "seed": settings.seed,
            });
            emit(&report, &format!("cone membership: {}", out.status_word()));
            Ok(outcome_exit(&out))
        }
        Command::Mapcone {
            spec,
            map,
            decomposable,
            engine,
        } => {
            let s = load_spec(&spec)?;
            let rm: RealMatJson = serde_json::from_str(&read_text(&map)?)
                .map_err(|e| e.to_string())?;
            let d = rm.to_mat().map_err(|e| e.to_string())?;
            let config = engine_config(&engine)?;
            let start = s.order_unit_start(&d, &config).unwrap_or(Start::Default);
            let out = if decomposable {
                s.decomposable_membership(&d, &config, start)
            } else {
                s.mapping_cone_membership(&d, &config, start)
            }
            .map_err(|e| e.to_string())?;
            let report = json!({
                "decomposable": decomposable,
                "outcome": outcome_json(&out),
                "seed": settings.seed,
            });
            emit(
                &report,
                &format!("mapping-cone membership: {}", out.status_word()),
            );
            Ok(outcome_exit(&out))
        }
        Command::Cprp {
            realization,
            spec,
            output,
            witness_dir,
            trace,
            engine,
        } => {
            let r = QuasiRealization::from_json_str(&read_text(&realization)?)
                .map_err(|e| e.to_string())?;
            let s = load_spec(&spec)?;
            let config = engine_config(&engine)?;
            let reduction = ReductionConfig {
                tol: settings.tol,
                ..ReductionConfig::default()
            };
            let report = cprp_certificate(&r, &s, &config, &reduction)
                .map_err(|e| e.to_string())?;
            let mut witness_paths = serde_json::Map::new();
            if let Some(dir) = &witness_dir {
                fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
                let mut save = |name: &str, m: &CMat| -> Result<(), String> {
                    let path = dir.join(format!("{name}.json"));
                    let text = serde_json::to_string_pretty(&ComplexMatJson::from_mat(m))
                        .expect("witness json");
                    fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
                    witness_paths.insert(name.into(), json!(path.display().to_string()));
                    Ok(())
                };
                for (sym, out) in &report.symbol_outcomes {
                    if let Some(w) = out.witness() {
                        save(&format!("choi_{sym}"), w)?;
                    }
                }
                if let Some(w) = report.tau_outcome.as_ref().and_then(|o| o.witness()) {
                    save("identity_preimage", w)?;
                }
                if let Some(w) = report.pi_outcome.as_ref().and_then(|o| o.witness()) {
                    save("state_preimage", w)?;
                }
            }
            let mut value = json!({
                "status": serde_json::to_value(&report.status).map_err(|e| e.to_string())?,
                "symbols": report
                    .symbol_outcomes
                    .iter()
                    .map(|(s, o)| json!({"symbol": s, "outcome": outcome_json(o)}))
                    .collect::<Vec<_>>(),
                "tau": report.tau_outcome.as_ref().map(outcome_json),
                "pi": report.pi_outcome.as_ref().map(outcome_json),
                "max_probability_deviation": report.max_probability_deviation,
                "witnesses": witness_paths,
                "seed": settings.seed,
            });
            if trace {
                if let Some(tr) = &report.trace {
                    value["trace"] = serde_json::to_value(tr).map_err(|e| e.to_string())?;
                }
            }
            if let Some(real) = &report.realization {
                value["hilbert_dim"] = json!(real.n());
                write_output(&output, &real.to_json_string())?;
            }
            let (summary, code) = match &report.status {
                CertificateStatus::Passed => (
                    "certificate passed; instrument realization produced".to_string(),
                    ExitCode::SUCCESS,
                ),
                CertificateStatus::Failed { condition } => {
                    (format!("certificate failed: {condition}"), ExitCode::from(1))
                }
                CertificateStatus::Undecided { condition } => {
                    (format!("certificate undecided: {condition}"), ExitCode::from(2))
                }
            };
            emit(&value, &summary);
            Ok(code)
        }
        Command::Learn {
            table,
            trajectories,
            alphabet,
            max_length,
            rank,
            output,
        } => {
            let table = if let Some(path) = table {
                WordTable::from_json_str(&read_text(&path)?).map_err(|e| e.to_string())?
            } else if let Some(path) = trajectories {
                let alphabet = fincor::process::Alphabet::new(
                    alphabet
                        .ok_or("trajectory input needs --alphabet")?
                        .split(',')
                        .map(str::to_string),
                )
                .map_err(|e| e.to_string())?;
                let mut words = Vec::new();
                for line in read_text(&path)?.lines() {
                    let line = line.trim();
                    if !line.is_empty() {
                        words.push(alphabet.parse_word(line).map_err(|e| e.to_string())?);
                    }
                }
                empirical_table(&words, &alphabet, max_length).map_err(|e| e.to_string())?
            } else {
                return Err("learn needs --table or --trajectories".into());
            };
            let (rec, diag) =
                spectral_realization(&table, rank, settings.tol).map_err(|e| e.to_string())?;
            write_output(&output, &rec.to_json_string())?;
            let report = json!({
                "rank": diag.rank,
                "singular_values": diag.singular_values,
                "gap_warning": diag.gap_warning,
                "dim": rec.dim(),
                "seed": settings.seed,
            });
            emit(
                &report,
                &format!("reconstructed a dimension-{} realization", rec.dim()),
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Sample {
            cp,
            length,
            count,
            output,
        } => {
            let q = CPRealization::from_json_str(&read_text(&cp)?).map_err(|e| e.to_string())?;
            let words = sample_trajectories(&q, length, count, settings.seed)
                .map_err(|e| e.to_string())?;
            let lines: Vec<String> = words
                .iter()
                .map(|w| q.alphabet().format_word(w))
                .collect();
            if let Some(path) = &output {
                fs::write(path, lines.join("\n") + "\n")
                    .map_err(|e| format!("{}: {e}", path.display()))?;
            }
            emit(
                &json!({"count": count, "length": length, "seed": settings.seed,
                        "trajectories": if output.is_none() { Some(&lines) } else { None }}),
                &format!("sampled {count} trajectories of length {length}"),
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Obstruction {
            realization,
            max_length,
        } => {
            let r = QuasiRealization::from_json_str(&read_text(&realization)?)
                .map_err(|e| e.to_string())?;
            let report = polyhedral_obstruction_scan(&r, max_length, settings.tol.max(1e-8));
            let value = serde_json::to_value(&report).map_err(|e| e.to_string())?;
            emit(
                &value,
                if report.growing {
                    "distinct rays grow with word length: evidence against a small polyhedral cone"
                } else {
                    "ray count saturates"
                },
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Examples {
            name,
            gamma,
            theta,
            m,
            perm,
            output,
        } => {
            let params = FixtureParams::new(gamma, theta);
            let (text, summary): (String, String) = match name.as_str() {
                "quasi" => (
                    catalog::monitored_qubit_quasi(&params).to_json_string(),
                    "monitored-qubit quasi-realization".into(),
                ),
                "qubit" => (
                    catalog::monitored_qubit_instrument(&params).to_json_string(),
                    "qubit presentation (not CP for gamma < 1)".into(),
                ),
                "two-qubit" => (
                    catalog::two_qubit_cp(&params).realization.to_json_string(),
                    "two-qubit instrument realization".into(),
                ),
                "direct-sum" => (
                    catalog::direct_sum_cp(&params).realization.to_json_string(),
                    "direct-sum instrument realization".into(),
                ),
                "direct-sum-alt" => (
                    catalog::direct_sum_cp(&params).alternative.to_json_string(),
                    "alternative direct-sum maps".into(),
                ),
                "cone-direct" => (
                    serde_json::to_string_pretty(&cone_to_json(&catalog::psd_cone_direct()))
                        .expect("cone json"),
                    "qubit PSD cone, direct representation".into(),
                ),
                "cone-spin-flip" => (
                    serde_json::to_string_pretty(&cone_to_json(&catalog::psd_cone_spin_flip()))
                        .expect("cone json"),
                    "qubit PSD cone, spin-flip pair representation".into(),
                ),
                "spec-two-qubit" => (
                    serde_json::to_string_pretty(&spec_to_json(&catalog::two_qubit_cp(&params).spec))
                        .expect("spec json"),
                    "two-qubit mapping-cone specification".into(),
                ),
                "spec-qubit-full" => (
                    serde_json::to_string_pretty(&spec_to_json(&catalog::qubit_full_spec()))
                        .expect("spec json"),
                    "full qubit mapping-cone specification".into(),
                ),
                "tridiagonal" => {
                    let perm_vec: Vec<usize> = match perm.as_str() {
                        "identity" => catalog::generator_identity(m),
                        "reversal" => catalog::generator_reversal(m),
                        "swap-tail" => catalog::generator_swap_tail(m),
                        other => other
                            .split(',')
                            .map(|t| t.trim().parse::<usize>())
                            .collect::<Result<_, _>>()
                            .map_err(|e| format!("permutation parse: {e}"))?,
                    };
                    let (spec, d) =
                        catalog::tridiagonal_lifting(m, &perm_vec).map_err(|e| e.to_string())?;
                    let v = json!({
                        "spec": spec_to_json(&spec),
                        "target": RealMatJson::from_mat(&d),
                    });
                    (
                        serde_json::to_string_pretty(&v).expect("tridiagonal json"),
                        format!("tridiagonal lifting problem, m = {m}"),
                    )
                }
                other => return Err(format!("unknown example {other:?}")),
            };
            match &output {
                Some(path) => {
                    fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display()))?;
                    emit(
                        &json!({"written": path.display().to_string(), "seed": settings.seed}),
                        &summary,
                    );
                }
                None => {
                    println!("{text}");
                    eprintln!("{summary}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
