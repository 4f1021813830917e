//! Random beacon driven by the threshold VRF.
//!
//! A committee of `n` nodes runs one distributed key generation and then
//! emits one 32-byte output per round; any `t_thr + 1` valid partials
//! finalize a round. Round messages are hash-chained: round 1 hashes the
//! caller-supplied genesis seed, later rounds hash the last *finalized*
//! output and the round number, so an output cannot be computed before its
//! predecessor exists and the whole history is verifiable from the
//! transcript alone. A round with fewer than `t_thr + 1` valid partials is
//! recorded as failed, not an error, and the chain continues from the last
//! finalized output.
//!
//! Unbiasability comes for free from threshold determinism: the group value
//! for a message is fixed by the key, so no combiner choice, withheld
//! partial, or reordering can steer a finalized output. Unpredictability is
//! the threshold bound — [`check_unpredictability`] replays a corrupt
//! coalition against the transcript and confirms that `t_thr` shares plus
//! all public data reproduce nothing, while `t_thr + 1` reproduce
//! everything.
//!
//! Byzantine behaviours modelled per node: staying silent, sending a
//! corrupted partial (the sigma proof filters it), and equivocating —
//! sending different partials to different peers, of which at most one
//! verifies, so finalization is unaffected but the node is flagged.

use crate::dvrf::{
    self, combine, output_hash, partial_eval, verify_partial, Dealing, DvrfError, DvrfParams,
    PartialEval,
};
use crate::hashing::TAG_ROUND;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum BeaconError {
    #[error("threshold violated: need t_thr + 1 <= n, got t_thr = {t_thr}, n = {n}")]
    BadThreshold { n: u32, t_thr: u32 },
    #[error("{0} byzantine assignments exceed the declared fault budget f = {1}")]
    TooManyByzantine(usize, u32),
    #[error("byzantine assignment names node {0} outside 1..=n")]
    BadNodeIndex(u32),
    #[error("BFT sizing violated: need n >= 3f + 1, got n = {n}, f = {f}")]
    BftSizing { n: u32, f: u32 },
    #[error("BFT sizing pins the threshold to t_thr = f, got t_thr = {t_thr}, f = {f}")]
    BftThreshold { t_thr: u32, f: u32 },
    #[error(transparent)]
    Dvrf(#[from] DvrfError),
    #[error("transcript malformed: {0}")]
    Transcript(String),
    #[error("round {round}: {check} check failed")]
    ChainCheck { round: u32, check: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Behavior {
    Honest,
    Silent,
    CorruptValue,
    Equivocate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeaconConfig {
    pub n: u32,
    /// `t_thr + 1` valid partials finalize a round; `t_thr` reveal nothing.
    pub t_thr: u32,
    /// Declared fault budget; the byzantine set may not exceed it.
    pub f: u32,
    pub rounds: u32,
    /// Seeds the distributed key generation.
    pub seed: u64,
    /// Genesis value `sd_0` the first round message hashes.
    pub genesis: [u8; 32],
    pub byzantine: Vec<(u32, Behavior)>,
    /// Request the classical sizing `n >= 3f + 1` with `t_thr = f`.
    pub bft_sizing: bool,
}

impl BeaconConfig {
    /// Honest run: empty byzantine set, zero fault budget, derived genesis.
    pub fn honest(n: u32, t_thr: u32, rounds: u32, seed: u64) -> BeaconConfig {
        BeaconConfig {
            n,
            t_thr,
            f: 0,
            rounds,
            seed,
            genesis: genesis_from_seed(seed),
            byzantine: Vec::new(),
            bft_sizing: false,
        }
    }

    /// Partials needed to finalize a round.
    pub fn threshold(&self) -> u32 {
        self.t_thr + 1
    }

    fn validate(&self) -> Result<(), BeaconError> {
        if self.threshold() > self.n {
            return Err(BeaconError::BadThreshold {
                n: self.n,
                t_thr: self.t_thr,
            });
        }
        if self.byzantine.len() > self.f as usize {
            return Err(BeaconError::TooManyByzantine(self.byzantine.len(), self.f));
        }
        for &(j, _) in &self.byzantine {
            if j == 0 || j > self.n {
                return Err(BeaconError::BadNodeIndex(j));
            }
        }
        if self.bft_sizing {
            if self.n < 3 * self.f + 1 {
                return Err(BeaconError::BftSizing {
                    n: self.n,
                    f: self.f,
                });
            }
            if self.t_thr != self.f {
                return Err(BeaconError::BftThreshold {
                    t_thr: self.t_thr,
                    f: self.f,
                });
            }
        }
        Ok(())
    }
}

/// Why a node's contribution to a round was rejected or flagged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    Silent,
    InvalidProof,
    Equivocation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundStatus {
    Finalized,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u32,
    /// Hex of the 32-byte chained round message.
    pub message: String,
    pub status: RoundStatus,
    /// Hex of the combined group value; finalized rounds only.
    pub y: Option<String>,
    /// Hex of the 32-byte beacon output; finalized rounds only.
    pub output: Option<String>,
    /// Nodes whose partials entered the combination, ascending.
    pub contributors: Vec<u32>,
    /// Flagged nodes with the observed fault.
    pub faults: Vec<(u32, Fault)>,
}

/// A complete beacon execution: parameters, public verification keys, and
/// one record per round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeaconRun {
    pub config: BeaconConfig,
    pub vvks: Vec<BigUint>,
    pub records: Vec<RoundRecord>,
}

/// Key material from the distributed key generation. Shares are secret;
/// they never enter a [`BeaconRun`] transcript.
pub struct BeaconKeys {
    pub params: DvrfParams,
    pub shares: Vec<BigUint>,
    pub vvks: Vec<BigUint>,
}

/// Default genesis derivation for callers without an external `sd_0`.
pub fn genesis_from_seed(seed: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update([TAG_ROUND]);
    h.update(b"genesis");
    h.update(seed.to_le_bytes());
    h.finalize().into()
}

/// Chained round message `H(prev || r)`: `prev` is the genesis seed for
/// round 1 and the last finalized output afterwards.
pub fn round_message(prev: &[u8; 32], round: u32) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update([TAG_ROUND]);
    h.update(prev);
    h.update(u64::from(round).to_le_bytes());
    h.finalize().into()
}

/// Runs the seeded distributed key generation for a config.
pub fn beacon_keys(config: &BeaconConfig) -> Result<BeaconKeys, BeaconError> {
    config.validate()?;
    let params = DvrfParams::standard(config.n, config.threshold())?;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(config.seed);
    let dealings: Vec<Dealing> = (1..=config.n)
        .map(|i| dvrf::deal(&params, i, &mut rng))
        .collect::<Result<_, _>>()?;
    let shares: Vec<BigUint> = (1..=config.n)
        .map(|j| dvrf::aggregate_share(&params, &dealings, j))
        .collect::<Result<_, _>>()?;
    let vvks = dvrf::verification_keys(&params, &dealings)?;
    Ok(BeaconKeys {
        params,
        shares,
        vvks,
    })
}

fn behavior_of(config: &BeaconConfig, node: u32) -> Behavior {
    config
        .byzantine
        .iter()
        .find(|(j, _)| *j == node)
        .map(|&(_, b)| b)
        .unwrap_or(Behavior::Honest)
}

/// Runs the full beacon: one DKG, then `rounds` chained evaluations.
/// Starved rounds are recorded as [`RoundStatus::Failed`] and the chain
/// continues from the last finalized output.
pub fn run_beacon(config: &BeaconConfig) -> Result<BeaconRun, BeaconError> {
    let keys = beacon_keys(config)?;
    let params = &keys.params;

    let mut records = Vec::with_capacity(config.rounds as usize);
    let mut prev = config.genesis;
    for round in 1..=config.rounds {
        let message = round_message(&prev, round);
        let mut valid: Vec<PartialEval> = Vec::new();
        let mut faults: Vec<(u32, Fault)> = Vec::new();

        for node in 1..=config.n {
            let share = &keys.shares[(node - 1) as usize];
            let vvk = &keys.vvks[(node - 1) as usize];
            match behavior_of(config, node) {
                Behavior::Silent => faults.push((node, Fault::Silent)),
                Behavior::Honest => {
                    let p = partial_eval(params, node, share, &message)?;
                    debug_assert!(verify_partial(params, vvk, &message, &p).is_ok());
                    valid.push(p);
                }
                Behavior::CorruptValue => {
                    let mut p = partial_eval(params, node, share, &message)?;
                    p.value = (&p.value + 1u32) % &params.q;
                    match verify_partial(params, vvk, &message, &p) {
                        Ok(()) => valid.push(p),
                        Err(_) => faults.push((node, Fault::InvalidProof)),
                    }
                }
                Behavior::Equivocate => {
                    // Different partials to different peers; the public
                    // board keeps at most the one that verifies.
                    let good = partial_eval(params, node, share, &message)?;
                    let mut bad = good.clone();
                    bad.value = (&bad.value + 1u32) % &params.q;
                    let mut kept = 0u32;
                    for p in [bad, good] {
                        if verify_partial(params, vvk, &message, &p).is_ok() {
                            if kept == 0 {
                                valid.push(p);
                            }
                            kept += 1;
                        }
                    }
                    debug_assert!(kept <= 1, "conflicting partials cannot both verify");
                    faults.push((node, Fault::Equivocation));
                }
            }
        }

        let need = config.threshold() as usize;
        if valid.len() < need {
            records.push(RoundRecord {
                round,
                message: hex::encode(message),
                status: RoundStatus::Failed,
                y: None,
                output: None,
                contributors: Vec::new(),
                faults,
            });
            continue;
        }
        // Deterministic combination: lowest node indices first.
        valid.sort_by_key(|p| p.node);
        let chosen: Vec<PartialEval> = valid.into_iter().take(need).collect();
        let y = combine(params, &chosen)?;
        let output = output_hash(&y);

        records.push(RoundRecord {
            round,
            message: hex::encode(message),
            status: RoundStatus::Finalized,
            y: Some(y.to_str_radix(16)),
            output: Some(hex::encode(output)),
            contributors: chosen.iter().map(|p| p.node).collect(),
            faults,
        });
        prev = output;
    }

    Ok(BeaconRun {
        config: config.clone(),
        vvks: keys.vvks,
        records,
    })
}

/// Verifies a finished run from public data only: the hash chain, every
/// finalized round's group value against the verification keys, and the
/// output hashes. The group value is forced by the keys: with λ the
/// Lagrange coefficients of the contributor set, `Σ λ_j·vvk_j = x·R`, so
/// `y·R == (Σ λ_j vvk_j)·u` pins `y` to the unique threshold output.
pub fn verify_chain(run: &BeaconRun) -> Result<(), BeaconError> {
    run.config.validate()?;
    let params = DvrfParams::standard(run.config.n, run.config.threshold())?;
    if run.vvks.len() != run.config.n as usize {
        return Err(BeaconError::Transcript("verification key count".into()));
    }
    let r = dvrf::base_r(&params.q);
    let mut prev = run.config.genesis;
    let mut expected_round = 1u32;
    for rec in &run.records {
        if rec.round != expected_round {
            return Err(BeaconError::Transcript(format!(
                "round numbering jumps at {}",
                rec.round
            )));
        }
        expected_round += 1;
        let message = round_message(&prev, rec.round);
        if hex::encode(message) != rec.message {
            return Err(BeaconError::ChainCheck {
                round: rec.round,
                check: "message",
            });
        }
        match rec.status {
            RoundStatus::Failed => {
                if rec.y.is_some() || rec.output.is_some() || !rec.contributors.is_empty() {
                    return Err(BeaconError::Transcript(format!(
                        "round {}: failed round carries results",
                        rec.round
                    )));
                }
                continue;
            }
            RoundStatus::Finalized => {}
        }
        let y_hex = rec.y.as_ref().ok_or_else(|| {
            BeaconError::Transcript(format!("round {}: missing group value", rec.round))
        })?;
        let out_hex = rec.output.as_ref().ok_or_else(|| {
            BeaconError::Transcript(format!("round {}: missing output", rec.round))
        })?;
        let y = BigUint::parse_bytes(y_hex.as_bytes(), 16)
            .ok_or_else(|| BeaconError::Transcript(format!("round {}: bad y", rec.round)))?;
        if rec.contributors.len() != run.config.threshold() as usize {
            return Err(BeaconError::Transcript(format!(
                "round {}: contributor count",
                rec.round
            )));
        }
        let u = dvrf::message_point(&params, &message);
        let mut xr = BigUint::from(0u32);
        for &j in &rec.contributors {
            if j == 0 || j > run.config.n {
                return Err(BeaconError::Transcript(format!(
                    "round {}: contributor {j} out of range",
                    rec.round
                )));
            }
            let lambda = dvrf::lagrange_at_zero(&params.q, &rec.contributors, j);
            xr = (xr + lambda * &run.vvks[(j - 1) as usize]) % &params.q;
        }
        if (&y * &r) % &params.q != (&xr * &u) % &params.q {
            return Err(BeaconError::ChainCheck {
                round: rec.round,
                check: "group value",
            });
        }
        let output = output_hash(&y);
        if &hex::encode(output) != out_hex {
            return Err(BeaconError::ChainCheck {
                round: rec.round,
                check: "output hash",
            });
        }
        prev = output;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PredictabilityReport {
    /// Finalized rounds the coalition reproduced from public data + its own
    /// shares.
    pub predictable: u32,
    pub finalized: u32,
}

/// Coalition replay: can `coalition` (node ids) recompute every finalized
/// output from the public transcript and its own key shares? With at most
/// `t_thr` members the answer must be no round at all; with `t_thr + 1` it
/// is every round — the threshold is tight.
pub fn check_unpredictability(
    keys: &BeaconKeys,
    run: &BeaconRun,
    coalition: &[u32],
) -> PredictabilityReport {
    let params = &keys.params;
    let mut prev = run.config.genesis;
    let mut predictable = 0u32;
    let mut finalized = 0u32;
    for rec in &run.records {
        if rec.status != RoundStatus::Finalized {
            continue;
        }
        finalized += 1;
        let message = round_message(&prev, rec.round);
        let partials: Vec<PartialEval> = coalition
            .iter()
            .filter_map(|&j| partial_eval(params, j, &keys.shares[(j - 1) as usize], &message).ok())
            .collect();
        if let Ok(y) = combine(params, &partials) {
            if Some(hex::encode(output_hash(&y))) == rec.output {
                predictable += 1;
            }
        }
        let out = rec.output.as_ref().expect("finalized round has an output");
        prev = hex::decode(out)
            .expect("hex")
            .try_into()
            .expect("32 bytes");
    }
    PredictabilityReport {
        predictable,
        finalized,
    }
}

#[derive(Serialize, Deserialize)]
struct TranscriptHeader {
    version: u32,
    n: u32,
    t_thr: u32,
    f: u32,
    rounds: u32,
    seed: u64,
    genesis: String,
    byzantine: Vec<(u32, Behavior)>,
    bft_sizing: bool,
    vvks: Vec<String>,
}

impl BeaconRun {
    /// Serializes as JSON lines: a header line, then one line per round.
    pub fn to_jsonl(&self) -> String {
        let header = TranscriptHeader {
            version: 1,
            n: self.config.n,
            t_thr: self.config.t_thr,
            f: self.config.f,
            rounds: self.config.rounds,
            seed: self.config.seed,
            genesis: hex::encode(self.config.genesis),
            byzantine: self.config.byzantine.clone(),
            bft_sizing: self.config.bft_sizing,
            vvks: self.vvks.iter().map(|v| v.to_str_radix(16)).collect(),
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for rec in &self.records {
            out.push_str(&serde_json::to_string(rec).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<BeaconRun, BeaconError> {
        let mut lines = text.lines();
        let header_line = lines
            .next()
            .ok_or_else(|| BeaconError::Transcript("empty transcript".into()))?;
        let header: TranscriptHeader = serde_json::from_str(header_line)
            .map_err(|e| BeaconError::Transcript(format!("header: {e}")))?;
        if header.version != 1 {
            return Err(BeaconError::Transcript(format!(
                "unsupported version {}",
                header.version
            )));
        }
        let genesis: [u8; 32] = hex::decode(&header.genesis)
            .ok()
            .and_then(|v| v.try_into().ok())
            .ok_or_else(|| BeaconError::Transcript("bad genesis hex".into()))?;
        let vvks = header
            .vvks
            .iter()
            .map(|s| {
                BigUint::parse_bytes(s.as_bytes(), 16)
                    .ok_or_else(|| BeaconError::Transcript("bad verification key hex".into()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut records = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: RoundRecord = serde_json::from_str(line)
                .map_err(|e| BeaconError::Transcript(format!("line {}: {e}", i + 2)))?;
            records.push(rec);
        }
        Ok(BeaconRun {
            config: BeaconConfig {
                n: header.n,
                t_thr: header.t_thr,
                f: header.f,
                rounds: header.rounds,
                seed: header.seed,
                genesis,
                byzantine: header.byzantine,
                bft_sizing: header.bft_sizing,
            },
            vvks,
            records,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn faulty_config() -> BeaconConfig {
        BeaconConfig {
            byzantine: vec![(2, Behavior::Silent), (5, Behavior::CorruptValue)],
            f: 2,
            ..BeaconConfig::honest(7, 2, 20, 42)
        }
    }

    #[test]
    fn config_validation_names_the_violated_inequality() {
        let mut bad = BeaconConfig::honest(3, 3, 1, 0);
        assert_eq!(
            run_beacon(&bad).unwrap_err(),
            BeaconError::BadThreshold { n: 3, t_thr: 3 }
        );
        bad = BeaconConfig::honest(7, 1, 1, 0);
        bad.byzantine = vec![(1, Behavior::Silent), (2, Behavior::Silent)];
        bad.f = 1;
        assert_eq!(
            run_beacon(&bad).unwrap_err(),
            BeaconError::TooManyByzantine(2, 1)
        );
        bad = BeaconConfig::honest(6, 2, 1, 0);
        bad.f = 2;
        bad.bft_sizing = true;
        assert_eq!(
            run_beacon(&bad).unwrap_err(),
            BeaconError::BftSizing { n: 6, f: 2 }
        );
        bad = BeaconConfig::honest(7, 1, 1, 0);
        bad.f = 2;
        bad.bft_sizing = true;
        assert_eq!(
            run_beacon(&bad).unwrap_err(),
            BeaconError::BftThreshold { t_thr: 1, f: 2 }
        );
        bad = BeaconConfig::honest(7, 2, 1, 0);
        bad.byzantine = vec![(8, Behavior::Silent)];
        bad.f = 1;
        assert_eq!(run_beacon(&bad).unwrap_err(), BeaconError::BadNodeIndex(8));
        // The classical sizing itself is accepted: n = 7, f = 2, t_thr = f.
        let mut ok = BeaconConfig::honest(7, 2, 2, 0);
        ok.f = 2;
        ok.bft_sizing = true;
        assert!(run_beacon(&ok).is_ok());
    }

    #[test]
    fn runs_with_faults_finalize_and_verify() {
        let run = run_beacon(&faulty_config()).unwrap();
        assert_eq!(run.records.len(), 20);
        for rec in &run.records {
            assert_eq!(rec.status, RoundStatus::Finalized);
            assert_eq!(rec.contributors.len(), 3);
            assert!(!rec.contributors.contains(&2));
            assert!(!rec.contributors.contains(&5));
            assert!(rec.faults.contains(&(2, Fault::Silent)));
            assert!(rec.faults.contains(&(5, Fault::InvalidProof)));
        }
        verify_chain(&run).unwrap();
    }

    #[test]
    fn availability_with_all_spare_nodes_silent() {
        // f = n − (t_thr + 1) silent nodes still finalize every round.
        let mut cfg = BeaconConfig::honest(7, 2, 10, 3);
        cfg.byzantine = (1..=4).map(|j| (j, Behavior::Silent)).collect();
        cfg.f = 4;
        let run = run_beacon(&cfg).unwrap();
        assert!(run
            .records
            .iter()
            .all(|r| r.status == RoundStatus::Finalized));
        verify_chain(&run).unwrap();
    }

    #[test]
    fn starved_rounds_fail_and_stay_verifiable() {
        // n − t_thr silent nodes leave only t_thr valid partials: every
        // round fails, the chain still checks out, and every message keeps
        // hashing the genesis value since nothing ever finalized.
        let mut cfg = BeaconConfig::honest(7, 2, 5, 4);
        cfg.byzantine = (1..=5).map(|j| (j, Behavior::Silent)).collect();
        cfg.f = 5;
        let run = run_beacon(&cfg).unwrap();
        assert!(run.records.iter().all(|r| r.status == RoundStatus::Failed));
        verify_chain(&run).unwrap();
        assert_eq!(
            run.records[4].message,
            hex::encode(round_message(&cfg.genesis, 5))
        );
    }

    #[test]
    fn outputs_chain_and_differ() {
        let run = run_beacon(&faulty_config()).unwrap();
        let outputs: std::collections::BTreeSet<&String> = run
            .records
            .iter()
            .filter_map(|r| r.output.as_ref())
            .collect();
        assert_eq!(outputs.len(), run.records.len(), "outputs must be distinct");
        let out3: [u8; 32] = hex::decode(run.records[2].output.as_ref().unwrap())
            .unwrap()
            .try_into()
            .unwrap();
        assert_eq!(run.records[3].message, hex::encode(round_message(&out3, 4)));
    }

    #[test]
    fn determinism_and_seed_sensitivity() {
        let a = run_beacon(&faulty_config()).unwrap();
        let b = run_beacon(&faulty_config()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_jsonl(), b.to_jsonl());
        let mut other = faulty_config();
        other.seed = 43;
        other.genesis = genesis_from_seed(43);
        let c = run_beacon(&other).unwrap();
        assert_ne!(a.records[0].output, c.records[0].output);
    }

    #[test]
    fn corrupt_partials_never_bias_finalized_outputs() {
        // Paired rerun: same seed with and without corrupt-value nodes.
        // Contributor sets may differ; finalized group values cannot.
        let with_corrupt = run_beacon(&BeaconConfig {
            byzantine: vec![(1, Behavior::CorruptValue), (3, Behavior::CorruptValue)],
            f: 2,
            ..BeaconConfig::honest(7, 2, 15, 77)
        })
        .unwrap();
        let honest_only = run_beacon(&BeaconConfig::honest(7, 2, 15, 77)).unwrap();
        for (a, b) in with_corrupt.records.iter().zip(&honest_only.records) {
            assert_eq!(a.y, b.y);
            assert_eq!(a.output, b.output);
        }
        assert_ne!(
            with_corrupt.records[0].contributors,
            honest_only.records[0].contributors
        );
    }

    #[test]
    fn equivocator_contributes_at_most_one_partial_and_is_flagged() {
        let cfg = BeaconConfig {
            byzantine: vec![(1, Behavior::Equivocate)],
            f: 1,
            ..BeaconConfig::honest(7, 2, 5, 9)
        };
        let run = run_beacon(&cfg).unwrap();
        let honest = run_beacon(&BeaconConfig::honest(7, 2, 5, 9)).unwrap();
        for (rec, href) in run.records.iter().zip(&honest.records) {
            assert_eq!(rec.status, RoundStatus::Finalized);
            assert!(rec.faults.contains(&(1, Fault::Equivocation)));
            // Its one verifying partial is usable, so finalization matches
            // the honest run exactly.
            assert_eq!(rec.contributors.iter().filter(|&&j| j == 1).count(), 1);
            assert_eq!(rec.output, href.output);
        }
        verify_chain(&run).unwrap();
    }

    #[test]
    fn coalition_replay_confirms_the_threshold_is_tight() {
        let cfg = faulty_config();
        let keys = beacon_keys(&cfg).unwrap();
        let run = run_beacon(&cfg).unwrap();

        let none = check_unpredictability(&keys, &run, &[]);
        assert_eq!((none.predictable, none.finalized), (0, 20));

        let at_threshold = check_unpredictability(&keys, &run, &[1, 3]);
        assert_eq!(at_threshold.predictable, 0, "t_thr shares predict nothing");

        let over = check_unpredictability(&keys, &run, &[1, 3, 6]);
        assert_eq!(over.predictable, 20, "t_thr + 1 shares predict everything");
    }

    #[test]
    fn transcript_roundtrip_and_tamper_detection() {
        let run = run_beacon(&faulty_config()).unwrap();
        let text = run.to_jsonl();
        let back = BeaconRun::from_jsonl(&text).unwrap();
        assert_eq!(back, run);
        verify_chain(&back).unwrap();

        // A mutated historical output breaks the chain at its own round.
        let mut evil = back.clone();
        let mut out = hex::decode(evil.records[7].output.as_ref().unwrap()).unwrap();
        out[0] ^= 1;
        evil.records[7].output = Some(hex::encode(out));
        assert_eq!(
            verify_chain(&evil),
            Err(BeaconError::ChainCheck {
                round: 8,
                check: "output hash"
            })
        );

        // Even a consistently re-hashed forgery fails: the group value is
        // pinned by the verification keys.
        let mut evil = back.clone();
        let y = BigUint::parse_bytes(evil.records[3].y.as_ref().unwrap().as_bytes(), 16).unwrap();
        let forged = y + 1u32;
        evil.records[3].y = Some(forged.to_str_radix(16));
        evil.records[3].output = Some(hex::encode(output_hash(&forged)));
        assert_eq!(
            verify_chain(&evil),
            Err(BeaconError::ChainCheck {
                round: 4,
                check: "group value"
            })
        );

        assert!(BeaconRun::from_jsonl("").is_err());
        assert!(BeaconRun::from_jsonl("not json\n").is_err());
    }
}
