//! Command-line front end for the VRF library: key management, evaluation
//! and verification, the size/time benchmark table, and the beacon and
//! proof-of-stake simulators.
//!
//! Conventions shared by every subcommand:
//! - exit codes: 0 = success/accept, 1 = cryptographic reject, 2 = usage or
//!   I/O error (clap itself exits 2 on bad flags);
//! - `--seed` falls back to the `PQVRF_SEED` env var, then the `seed` key of
//!   `--config`, then OS entropy — an entropy-drawn seed is echoed to
//!   stderr so the run can be reproduced;
//! - `--config` names a TOML `key = value` file supplying defaults for
//!   scalar flags (paths stay flag-only); explicit flags always win;
//! - `--threads` caps the proving thread pool.

use clap::{Args, Parser, Subcommand};
use pqvrf::beacon::{self, BeaconConfig, Behavior};
use pqvrf::pos::{self, PosConfig, Strategy};
use pqvrf::vrf::{
    vrf_eval, vrf_gen, vrf_verify, VrfEvaluation, VrfPublicKey, VrfRejectReason, VrfSecretKey,
};
use pqvrf::zkboo::{Mode, VerifyError};
use rand::RngCore;
use std::hint::black_box;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "pqvrf",
    version,
    about = "Post-quantum VRF from symmetric primitives: keys, proofs, benchmarks, beacon and PoS simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a keypair and write it as two JSON files
    Keygen(KeygenArgs),
    /// Evaluate the VRF on a message and write the proof-carrying output
    Eval(EvalArgs),
    /// Verify an evaluation file against a public key and message
    Verify(VerifyArgs),
    /// Proof size / wall-time table over proof modes and round counts
    Bench(BenchArgs),
    /// Threshold-VRF random beacon: chained rounds with byzantine nodes
    Beacon(BeaconArgs),
    /// VRF-lottery proof-of-stake simulation with an adversary
    Pos(PosArgs),
}

#[derive(Args)]
struct Common {
    /// RNG seed (fallback: PQVRF_SEED env, config `seed`, OS entropy)
    #[arg(long, global = false)]
    seed: Option<u64>,
    /// TOML key = value file supplying defaults for scalar flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cap the proving thread pool
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct KeygenArgs {
    #[command(flatten)]
    common: Common,
    /// Public key output path
    #[arg(long, default_value = "pk.json")]
    pk: PathBuf,
    /// Secret key output path (written with mode 0600)
    #[arg(long, default_value = "sk.json")]
    sk: PathBuf,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct MessageArg {
    /// Message as a UTF-8 string
    #[arg(long)]
    message: Option<String>,
    /// Read the message bytes from a file
    #[arg(long)]
    message_file: Option<PathBuf>,
}

impl MessageArg {
    fn bytes(&self) -> Result<Vec<u8>, CliError> {
        match (&self.message, &self.message_file) {
            (Some(s), None) => Ok(s.clone().into_bytes()),
            (None, Some(path)) => read_file(path, "message"),
            _ => Err(usage("pass exactly one of --message / --message-file")),
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    /// Secret key file
    #[arg(long, default_value = "sk.json")]
    sk: PathBuf,
    #[command(flatten)]
    msg: MessageArg,
    /// Evaluation output path
    #[arg(long, default_value = "eval.bin")]
    out: PathBuf,
    /// Proof repetitions t; soundness error is (2/3)^t
    #[arg(long)]
    rounds: Option<u32>,
    /// Proof mode
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Public key file
    #[arg(long, default_value = "pk.json")]
    pk: PathBuf,
    #[command(flatten)]
    msg: MessageArg,
    /// Evaluation file to check
    #[arg(long, default_value = "eval.bin")]
    proof: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    /// Round counts to sweep, comma separated
    #[arg(long, value_delimiter = ',', default_value = "20,40,60,80,100")]
    rounds: Vec<u32>,
    /// Which proof modes to bench
    #[arg(long, value_enum, default_value = "both")]
    mode: BenchModeArg,
    /// Timing repetitions per row (sizes are exact regardless)
    #[arg(long)]
    reps: Option<u32>,
    /// CSV output path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional JSON summary path
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct BeaconArgs {
    #[command(flatten)]
    common: Common,
    /// Committee size
    #[arg(long)]
    n: Option<u32>,
    /// Threshold parameter: t + 1 valid partials finalize a round
    #[arg(long)]
    t: Option<u32>,
    /// Declared fault budget (default: size of the byzantine set)
    #[arg(long)]
    f: Option<u32>,
    /// Rounds to emit
    #[arg(long)]
    rounds: Option<u32>,
    /// Byzantine assignment, e.g. "2:silent,5:corrupt-value,6:equivocate"
    #[arg(long)]
    byzantine: Option<String>,
    /// Enforce the classical sizing n >= 3f + 1 with t = f
    #[arg(long)]
    bft: bool,
    /// Genesis value as 64 hex chars (default: derived from the seed)
    #[arg(long)]
    genesis: Option<String>,
    /// Transcript output path (JSON lines)
    #[arg(long, default_value = "beacon.jsonl")]
    out: PathBuf,
    /// Optional JSON summary path (the summary always prints to stdout)
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct PosArgs {
    #[command(flatten)]
    common: Common,
    /// Number of stakeholders
    #[arg(long)]
    nodes: Option<u32>,
    /// Stake units per stakeholder
    #[arg(long)]
    stake: Option<u64>,
    /// Adversarial stake fraction; rounded to whole nodes
    #[arg(long, conflicts_with = "adversaries")]
    alpha: Option<f64>,
    /// Number of adversarial nodes (alternative to --alpha)
    #[arg(long)]
    adversaries: Option<u32>,
    /// Slots to simulate
    #[arg(long)]
    slots: Option<u32>,
    /// Network delay bound in slots
    #[arg(long)]
    delta: Option<u32>,
    /// Expected leaders per slot (lottery calibration)
    #[arg(long)]
    rate: Option<f64>,
    /// Adversary strategy
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    /// Attach + verify a full proof on every k-th block (0 = never)
    #[arg(long)]
    proof_every: Option<u32>,
    /// Proof repetitions for the sampled proofs
    #[arg(long)]
    proof_rounds: Option<u32>,
    /// Growth metric window in slots
    #[arg(long)]
    growth_window: Option<u32>,
    /// Quality metric window in blocks
    #[arg(long)]
    quality_window: Option<u32>,
    /// Per-slot CSV output path
    #[arg(long, default_value = "pos.csv")]
    out_csv: PathBuf,
    /// Optional JSON summary path (the summary always prints to stdout)
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, clap::ValueEnum)]
enum ModeArg {
    Zkboo,
    Zkbpp,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Zkboo => Mode::ZkBoo,
            ModeArg::Zkbpp => Mode::ZkBpp,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, clap::ValueEnum)]
enum BenchModeArg {
    Zkboo,
    Zkbpp,
    Both,
}

impl BenchModeArg {
    fn modes(self) -> Vec<Mode> {
        match self {
            BenchModeArg::Zkboo => vec![Mode::ZkBoo],
            BenchModeArg::Zkbpp => vec![Mode::ZkBpp],
            BenchModeArg::Both => vec![Mode::ZkBoo, Mode::ZkBpp],
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, clap::ValueEnum)]
enum StrategyArg {
    Honest,
    Withhold,
    GrindLite,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Honest => Strategy::Honest,
            StrategyArg::Withhold => Strategy::Withhold,
            StrategyArg::GrindLite => Strategy::GrindLite,
        }
    }
}

/// One failure kind per exit code above 0.
#[derive(Debug)]
enum CliError {
    /// Cryptographic reject: exit 1, verdict on stdout.
    Reject(String),
    /// Anything else the user must fix: exit 2, message on stderr.
    Usage(String),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Reject(reason)) => {
            println!("reject: {reason}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Keygen(a) => cmd_keygen(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Beacon(a) => cmd_beacon(a),
        Command::Pos(a) => cmd_pos(a),
    }
}

// ---------------------------------------------------------------- settings

/// Parsed `--config` file: a flat TOML table of flag defaults.
struct Settings(toml::Table);

impl Settings {
    fn load(path: Option<&Path>) -> Result<Settings, CliError> {
        let Some(path) = path else {
            return Ok(Settings(toml::Table::new()));
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config file {}: {e}", path.display())))?;
        let table = text
            .parse::<toml::Table>()
            .map_err(|e| usage(format!("config file {}: {e}", path.display())))?;
        Ok(Settings(table))
    }

    fn u64_key(&self, key: &str) -> Result<Option<u64>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(other) => Err(usage(format!(
                "config key `{key}`: expected a non-negative integer, got {other}"
            ))),
        }
    }

    fn u32_key(&self, key: &str) -> Result<Option<u32>, CliError> {
        match self.u64_key(key)? {
            None => Ok(None),
            Some(v) => u32::try_from(v)
                .map(Some)
                .map_err(|_| usage(format!("config key `{key}`: {v} does not fit in 32 bits"))),
        }
    }

    fn f64_key(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(x)) => Ok(Some(*x)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(other) => Err(usage(format!(
                "config key `{key}`: expected a number, got {other}"
            ))),
        }
    }

    fn str_key(&self, key: &str) -> Result<Option<&str>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s)),
            Some(other) => Err(usage(format!(
                "config key `{key}`: expected a string, got {other}"
            ))),
        }
    }
}

/// Flag > PQVRF_SEED env > config `seed` > OS entropy (echoed to stderr).
fn resolve_seed(flag: Option<u64>, settings: &Settings) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Ok(text) = std::env::var("PQVRF_SEED") {
        return text
            .trim()
            .parse()
            .map_err(|_| usage(format!("PQVRF_SEED must be an unsigned integer, got `{text}`")));
    }
    if let Some(s) = settings.u64_key("seed")? {
        return Ok(s);
    }
    let drawn = rand::rngs::OsRng.next_u64();
    eprintln!("seed: {drawn} (OS entropy; rerun with --seed {drawn} to reproduce)");
    Ok(drawn)
}

fn apply_threads(flag: Option<usize>, settings: &Settings) -> Result<(), CliError> {
    let cap = match flag {
        Some(n) => Some(n),
        None => settings
            .u64_key("threads")?
            .map(|v| v as usize),
    };
    if let Some(n) = cap {
        if n == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        // Ignore "already initialized": the cap can only be set once per
        // process, and a second attempt with the same value is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

// -------------------------------------------------------------- file utils

fn read_file(path: &Path, what: &str) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| usage(format!("cannot read {what} file {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8], what: &str) -> Result<(), CliError> {
    std::fs::write(path, bytes)
        .map_err(|e| usage(format!("cannot write {what} file {}: {e}", path.display())))
}

fn load_secret(path: &Path) -> Result<VrfSecretKey, CliError> {
    let text = read_file(path, "secret key")?;
    let text = String::from_utf8(text)
        .map_err(|_| usage(format!("secret key file {}: not UTF-8", path.display())))?;
    VrfSecretKey::from_json(&text)
        .map_err(|e| usage(format!("secret key file {}: {e}", path.display())))
}

fn load_public(path: &Path) -> Result<VrfPublicKey, CliError> {
    let text = read_file(path, "public key")?;
    let text = String::from_utf8(text)
        .map_err(|_| usage(format!("public key file {}: not UTF-8", path.display())))?;
    VrfPublicKey::from_json(&text)
        .map_err(|e| usage(format!("public key file {}: {e}", path.display())))
}

fn parse_hex32(text: &str, what: &str) -> Result<[u8; 32], CliError> {
    hex::decode(text.trim())
        .ok()
        .and_then(|v| <[u8; 32]>::try_from(v).ok())
        .ok_or_else(|| usage(format!("{what} must be 64 hex characters")))
}

// ------------------------------------------------------------- subcommands

fn cmd_keygen(args: KeygenArgs) -> Result<(), CliError> {
    let settings = Settings::load(args.common.config.as_deref())?;
    apply_threads(args.common.threads, &settings)?;
    let seed = resolve_seed(args.common.seed, &settings)?;

    let kp = vrf_gen(seed);
    write_file(&args.pk, kp.public.to_json().as_bytes(), "public key")?;
    write_file(&args.sk, kp.secret.to_json().as_bytes(), "secret key")?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(&args.sk, std::fs::Permissions::from_mode(0o600))
            .map_err(|e| usage(format!("cannot restrict {}: {e}", args.sk.display())))?;
    }
    eprintln!(
        "wrote {} (public) and {} (secret, mode 0600)",
        args.pk.display(),
        args.sk.display()
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let settings = Settings::load(args.common.config.as_deref())?;
    apply_threads(args.common.threads, &settings)?;
    let seed = resolve_seed(args.common.seed, &settings)?;
    let rounds = match args.rounds {
        Some(r) => r,
        None => settings
            .u32_key("rounds")?
            .unwrap_or(pqvrf::RECOMMENDED_ROUNDS),
    };
    if rounds == 0 {
        return Err(usage("--rounds must be at least 1"));
    }
    let mode = resolve_mode(args.mode, &settings)?.unwrap_or(Mode::ZkBpp);

    let secret = load_secret(&args.sk)?;
    let message = args.msg.bytes()?;
    let eval = vrf_eval(&secret, &message, rounds, mode, seed)
        .map_err(|e| usage(format!("evaluation failed: {e}")))?;
    write_file(&args.out, &eval.serialize(), "evaluation")?;
    println!("beta: {}", hex::encode(eval.beta));
    eprintln!(
        "wrote {} ({} rounds, {})",
        args.out.display(),
        rounds,
        mode_name(mode)
    );
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let settings = Settings::load(args.common.config.as_deref())?;
    apply_threads(args.common.threads, &settings)?;

    let public = load_public(&args.pk)?;
    let message = args.msg.bytes()?;
    let bytes = read_file(&args.proof, "evaluation")?;
    let eval = VrfEvaluation::deserialize(&bytes)
        .map_err(|e| CliError::Reject(format!("malformed evaluation: {e}")))?;
    match vrf_verify(&public, &message, &eval) {
        Ok(()) => {
            println!("accept");
            println!("beta: {}", hex::encode(eval.beta));
            Ok(())
        }
        Err(reason) => Err(CliError::Reject(reject_reason(&reason))),
    }
}

/// Human-stable reject strings. A proof bound to a different `(k, h)` pair
/// surfaces as "h-mismatch": the hashed message point the verifier rebuilt
/// does not match the one the proof commits to.
fn reject_reason(reason: &VrfRejectReason) -> String {
    match reason {
        VrfRejectReason::Proof(VerifyError::Structure(s)) if s.contains("bound to different") => {
            "h-mismatch".into()
        }
        other => other.to_string(),
    }
}

fn resolve_mode(flag: Option<ModeArg>, settings: &Settings) -> Result<Option<Mode>, CliError> {
    if let Some(m) = flag {
        return Ok(Some(m.into()));
    }
    match settings.str_key("mode")? {
        None => Ok(None),
        Some("zkboo") => Ok(Some(Mode::ZkBoo)),
        Some("zkbpp") => Ok(Some(Mode::ZkBpp)),
        Some(other) => Err(usage(format!(
            "config key `mode`: expected zkboo or zkbpp, got {other}"
        ))),
    }
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::ZkBoo => "zkboo",
        Mode::ZkBpp => "zkbpp",
    }
}

// ------------------------------------------------------------------- bench

struct BenchRow {
    mode: Mode,
    rounds: u32,
    op: &'static str,
    bytes: u64,
    avg_ms: f64,
    reps: u32,
}

fn time_avg_ms(reps: u32, mut body: impl FnMut()) -> f64 {
    let start = Instant::now();
    for _ in 0..reps {
        body();
    }
    start.elapsed().as_secs_f64() * 1000.0 / f64::from(reps.max(1))
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let settings = Settings::load(args.common.config.as_deref())?;
    apply_threads(args.common.threads, &settings)?;
    let seed = resolve_seed(args.common.seed, &settings)?;
    let reps = match args.reps {
        Some(r) => r,
        None => settings.u32_key("reps")?.unwrap_or(10),
    };
    if args.rounds.is_empty() || args.rounds.contains(&0) {
        return Err(usage("--rounds needs a non-empty list of positive round counts"));
    }
    if reps == 0 {
        return Err(usage("--reps must be at least 1"));
    }

    let message = b"pqvrf bench message";
    let kp = vrf_gen(seed);
    let mut rows: Vec<BenchRow> = Vec::new();
    for mode in args.mode.modes() {
        for &t in &args.rounds {
            // Size columns are exact and deterministic for the seed; time
            // columns are wall-clock averages and never part of any gate.
            let keygen_ms = time_avg_ms(reps, || {
                black_box(vrf_gen(black_box(seed)));
            });
            rows.push(BenchRow {
                mode,
                rounds: t,
                op: "keygen",
                bytes: 32,
                avg_ms: keygen_ms,
                reps,
            });

            let eval_ms = time_avg_ms(reps, || {
                black_box(pqvrf::vrf::eval_beta_fast(&kp.secret, message));
            });
            rows.push(BenchRow {
                mode,
                rounds: t,
                op: "eval",
                bytes: 32,
                avg_ms: eval_ms,
                reps,
            });

            let eval = vrf_eval(&kp.secret, message, t, mode, seed)
                .map_err(|e| usage(format!("bench proving failed: {e}")))?;
            let proof_bytes = eval.serialize();
            let proof_ms = time_avg_ms(reps, || {
                black_box(vrf_eval(&kp.secret, message, t, mode, seed).expect("bench prove"));
            });
            rows.push(BenchRow {
                mode,
                rounds: t,
                op: "proof",
                bytes: proof_bytes.len() as u64,
                avg_ms: proof_ms,
                reps,
            });

            let verify_ms = time_avg_ms(reps, || {
                vrf_verify(&kp.public, message, &eval).expect("bench proof verifies");
            });
            rows.push(BenchRow {
                mode,
                rounds: t,
                op: "verify",
                bytes: 0,
                avg_ms: verify_ms,
                reps,
            });
        }
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["schema", "mode", "rounds", "op", "bytes", "avg_ms", "reps"])
        .map_err(|e| usage(format!("csv: {e}")))?;
    for row in &rows {
        w.write_record([
            "bench-v1",
            mode_name(row.mode),
            &row.rounds.to_string(),
            row.op,
            &row.bytes.to_string(),
            &format!("{:.4}", row.avg_ms),
            &row.reps.to_string(),
        ])
        .map_err(|e| usage(format!("csv: {e}")))?;
    }
    let csv_bytes = w
        .into_inner()
        .map_err(|e| usage(format!("csv: {e}")))?;
    match &args.out {
        Some(path) => write_file(path, &csv_bytes, "benchmark csv")?,
        None => print!("{}", String::from_utf8_lossy(&csv_bytes)),
    }

    if let Some(path) = &args.json {
        let rows_json: Vec<serde_json::Value> = rows
            .iter()
            .map(|r| {
                serde_json::json!({
                    "mode": mode_name(r.mode),
                    "rounds": r.rounds,
                    "op": r.op,
                    "bytes": r.bytes,
                    "avg_ms": r.avg_ms,
                    "reps": r.reps,
                })
            })
            .collect();
        let summary = serde_json::json!({
            "schema": "bench-v1",
            "seed": seed,
            "reps": reps,
            "rows": rows_json,
        });
        write_file(
            path,
            serde_json::to_string_pretty(&summary)
                .expect("summary serializes")
                .as_bytes(),
            "benchmark summary",
        )?;
    }
    Ok(())
}

// ------------------------------------------------------------------ beacon

fn parse_byzantine(text: &str) -> Result<Vec<(u32, Behavior)>, CliError> {
    let mut out = Vec::new();
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (node, behavior) = part
            .split_once(':')
            .ok_or_else(|| usage(format!("byzantine entry `{part}`: expected node:behavior")))?;
        let node: u32 = node
            .trim()
            .parse()
            .map_err(|_| usage(format!("byzantine entry `{part}`: bad node index")))?;
        let behavior = match behavior.trim() {
            "honest" => Behavior::Honest,
            "silent" => Behavior::Silent,
            "corrupt-value" => Behavior::CorruptValue,
            "equivocate" => Behavior::Equivocate,
            other => {
                return Err(usage(format!(
                    "byzantine entry `{part}`: unknown behavior `{other}` \
                     (want silent, corrupt-value, or equivocate)"
                )))
            }
        };
        out.push((node, behavior));
    }
    Ok(out)
}

fn cmd_beacon(args: BeaconArgs) -> Result<(), CliError> {
    let settings = Settings::load(args.common.config.as_deref())?;
    apply_threads(args.common.threads, &settings)?;
    let seed = resolve_seed(args.common.seed, &settings)?;

    let n = match args.n {
        Some(v) => v,
        None => settings.u32_key("n")?.ok_or_else(|| usage("--n is required"))?,
    };
    let t_thr = match args.t {
        Some(v) => v,
        None => settings.u32_key("t")?.ok_or_else(|| usage("--t is required"))?,
    };
    let rounds = match args.rounds {
        Some(v) => v,
        None => settings.u32_key("rounds")?.unwrap_or(10),
    };
    let byzantine = match &args.byzantine {
        Some(text) => parse_byzantine(text)?,
        None => match settings.str_key("byzantine")? {
            Some(text) => parse_byzantine(text)?,
            None => Vec::new(),
        },
    };
    let f = match args.f {
        Some(v) => v,
        None => settings
            .u32_key("f")?
            .unwrap_or(byzantine.len() as u32),
    };
    let genesis = match &args.genesis {
        Some(text) => parse_hex32(text, "--genesis")?,
        None => beacon::genesis_from_seed(seed),
    };

    let config = BeaconConfig {
        n,
        t_thr,
        f,
        rounds,
        seed,
        genesis,
        byzantine,
        bft_sizing: args.bft,
    };
    let run = beacon::run_beacon(&config).map_err(|e| usage(e.to_string()))?;
    beacon::verify_chain(&run)
        .map_err(|e| CliError::Reject(format!("transcript failed self-verification: {e}")))?;

    write_file(&args.out, run.to_jsonl().as_bytes(), "beacon transcript")?;

    let finalized = run
        .records
        .iter()
        .filter(|r| r.status == beacon::RoundStatus::Finalized)
        .count();
    let mut fault_counts = std::collections::BTreeMap::new();
    for rec in &run.records {
        for (_, fault) in &rec.faults {
            let name = match fault {
                beacon::Fault::Silent => "silent",
                beacon::Fault::InvalidProof => "invalid-proof",
                beacon::Fault::Equivocation => "equivocation",
            };
            *fault_counts.entry(name).or_insert(0u64) += 1;
        }
    }
    let summary = serde_json::json!({
        "schema": "beacon-v1",
        "n": n,
        "t": t_thr,
        "f": f,
        "rounds": rounds,
        "seed": seed,
        "finalized": finalized,
        "failed": run.records.len() - finalized,
        "fault_events": fault_counts,
        "transcript": args.out.display().to_string(),
    });
    let summary_text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    println!("{summary_text}");
    if let Some(path) = &args.summary {
        write_file(path, summary_text.as_bytes(), "beacon summary")?;
    }
    Ok(())
}

// --------------------------------------------------------------------- pos

fn cmd_pos(args: PosArgs) -> Result<(), CliError> {
    let settings = Settings::load(args.common.config.as_deref())?;
    apply_threads(args.common.threads, &settings)?;
    let seed = resolve_seed(args.common.seed, &settings)?;

    let nodes = match args.nodes {
        Some(v) => v,
        None => settings.u32_key("nodes")?.unwrap_or(20),
    };
    let stake = match args.stake {
        Some(v) => v,
        None => settings.u64_key("stake")?.unwrap_or(10),
    };
    let alpha_flag = match args.alpha {
        Some(v) => Some(v),
        None => settings.f64_key("alpha")?,
    };
    let adversaries = match (args.adversaries, alpha_flag) {
        (Some(k), _) => k,
        (None, Some(alpha)) => {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(usage(format!("--alpha must be in [0, 1], got {alpha}")));
            }
            (alpha * f64::from(nodes)).round() as u32
        }
        (None, None) => 0,
    };
    if adversaries > nodes {
        return Err(usage(format!(
            "{adversaries} adversaries exceed {nodes} nodes"
        )));
    }
    let slots = match args.slots {
        Some(v) => v,
        None => settings.u32_key("slots")?.unwrap_or(200),
    };
    let delta = match args.delta {
        Some(v) => v,
        None => settings.u32_key("delta")?.unwrap_or(1),
    };
    let rate = match args.rate {
        Some(v) => v,
        None => settings.f64_key("rate")?.unwrap_or(1.0),
    };
    let strategy: Strategy = match args.strategy {
        Some(s) => s.into(),
        None => match settings.str_key("strategy")? {
            Some(text) => text
                .parse()
                .map_err(|e| usage(format!("config key `strategy`: {e}")))?,
            None => {
                if adversaries > 0 {
                    Strategy::Withhold
                } else {
                    Strategy::Honest
                }
            }
        },
    };
    let proof_every = match args.proof_every {
        Some(v) => v,
        None => settings.u32_key("proof-every")?.unwrap_or(25),
    };
    let proof_rounds = match args.proof_rounds {
        Some(v) => v,
        None => settings.u32_key("proof-rounds")?.unwrap_or(2),
    };
    let growth_window = match args.growth_window {
        Some(v) => v,
        None => settings.u32_key("growth-window")?.unwrap_or(100),
    };
    let quality_window = match args.quality_window {
        Some(v) => v,
        None => settings.u32_key("quality-window")?.unwrap_or(50),
    };

    let mut config = PosConfig::uniform(
        nodes, stake, adversaries, slots, delta, rate, strategy, seed,
    );
    config.proof_every = proof_every;
    config.proof_rounds = proof_rounds;
    let alpha = config.alpha();
    if alpha >= 0.5 {
        eprintln!(
            "warning: honest-majority assumption violated (alpha = {alpha:.2}); proceeding"
        );
    }

    let transcript = pos::run_pos(&config).map_err(|e| usage(e.to_string()))?;
    let holders = pos::make_holders(&config);
    pos::verify_transcript(&transcript, &holders)
        .map_err(|e| CliError::Reject(format!("transcript failed self-verification: {e}")))?;
    let metrics = pos::measure_metrics(&transcript, growth_window, quality_window as usize);

    write_file(
        &args.out_csv,
        pos::transcript_csv(&transcript).as_bytes(),
        "per-slot csv",
    )?;
    let summary_text = pos::summary_json(&transcript, &metrics);
    println!("{summary_text}");
    if let Some(path) = &args.summary {
        write_file(path, summary_text.as_bytes(), "summary")?;
    }
    Ok(())
}
