//! VRF-lottery proof-of-stake simulator.
//!
//! Each slot, every stakeholder evaluates its VRF over the chain tip and is
//! a leader iff `β < stake · T` (β read as a 256-bit integer, the bound
//! saturating at 2²⁵⁶−1). Leaders extend their longest known chain; blocks
//! propagate with a bounded delay; forks resolve by longest chain with ties
//! broken toward the lexicographically smaller tip hash. The transcript
//! records every block and every honest node's tip per slot, from which the
//! chain-growth, chain-quality and common-prefix metrics are measured.
//!
//! The eligibility message hashes the parent block's **VRF output** rather
//! than the parent's block hash. The block hash commits to the payload, so
//! hashing it would let a leader regrind its payload to steer who wins the
//! next slot; the VRF output is fixed before the payload is chosen, which
//! makes eligibility payload-regrind-proof by construction (the grind-lite
//! adversary exercises exactly this).
//!
//! Simulation is a deterministic lock-step loop: a block created in slot `t`
//! reaches other nodes at the start of slot `t + max(Δ, 1)` — a block can
//! never be used in its creation slot, so Δ=0 and Δ=1 coincide.

use crate::vrf::{
    eval_beta_fast, vrf_eval, vrf_gen_from_rng, vrf_verify, VrfEvaluation, VrfKeypair,
};
use crate::zkboo::Mode;
use num_bigint::BigUint;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PosError {
    #[error("bad simulation config: {0}")]
    BadConfig(String),
    #[error("block {index}: {reason}")]
    BadBlock { index: u32, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Adversarial nodes follow the protocol (their blocks still count as
    /// adversarial for the quality metric).
    Honest,
    /// Adversarial nodes mine privately and release the fork once it is
    /// strictly longer than every honest view.
    Withhold,
    /// Adversarial nodes regrind payloads before publishing; eligibility is
    /// unaffected by construction.
    GrindLite,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Honest => "honest",
            Strategy::Withhold => "withhold",
            Strategy::GrindLite => "grind-lite",
        })
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "honest" => Ok(Strategy::Honest),
            "withhold" => Ok(Strategy::Withhold),
            "grind-lite" | "grindlite" => Ok(Strategy::GrindLite),
            other => Err(format!("unknown strategy {other:?}")),
        }
    }
}

pub struct StakeHolder {
    pub id: u32,
    pub stake: u64,
    pub keys: VrfKeypair,
    pub adversarial: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosConfig {
    /// Stake of node `i` at index `i`.
    pub stakes: Vec<u64>,
    /// Ids of adversarial nodes.
    pub adversarial: Vec<u32>,
    pub slots: u32,
    /// Network delay bound Δ in slots.
    pub delta: u32,
    /// Expected number of leaders per slot; the target T is calibrated so
    /// that Σ stakeᵢ·T / 2²⁵⁶ equals this rate.
    pub leaders_per_slot: f64,
    pub strategy: Strategy,
    pub seed: u64,
    /// Attach and verify a full VRF proof on every k-th block (0 = never).
    pub proof_every: u32,
    pub proof_rounds: u32,
    pub proof_mode: Mode,
}

impl PosConfig {
    /// Equal stakes, the first `adversaries` ids adversarial, proofs off.
    pub fn uniform(
        n: u32,
        stake_each: u64,
        adversaries: u32,
        slots: u32,
        delta: u32,
        leaders_per_slot: f64,
        strategy: Strategy,
        seed: u64,
    ) -> PosConfig {
        PosConfig {
            stakes: vec![stake_each; n as usize],
            adversarial: (0..adversaries).collect(),
            slots,
            delta,
            leaders_per_slot,
            strategy,
            seed,
            proof_every: 0,
            proof_rounds: 2,
            proof_mode: Mode::ZkBpp,
        }
    }

    pub fn total_stake(&self) -> u64 {
        self.stakes.iter().sum()
    }

    /// Adversarial stake ratio α.
    pub fn alpha(&self) -> f64 {
        let adv: u64 = self
            .adversarial
            .iter()
            .map(|&i| self.stakes[i as usize])
            .sum();
        adv as f64 / self.total_stake() as f64
    }

    fn validate(&self) -> Result<(), PosError> {
        if self.stakes.is_empty() || self.total_stake() == 0 {
            return Err(PosError::BadConfig("total stake must be positive".into()));
        }
        if self.slots == 0 {
            return Err(PosError::BadConfig("need at least one slot".into()));
        }
        if !(self.leaders_per_slot > 0.0) {
            return Err(PosError::BadConfig("leader rate must be positive".into()));
        }
        for &a in &self.adversarial {
            if a as usize >= self.stakes.len() {
                return Err(PosError::BadConfig(format!("adversarial id {a} out of range")));
            }
        }
        Ok(())
    }
}

/// Target T such that eligibility probability summed over all stake equals
/// `leaders_per_slot`. Per-node probability becomes rate·stakeᵢ/Σstake.
pub fn target_for_rate(total_stake: u64, leaders_per_slot: f64) -> BigUint {
    // rate·2²⁵⁶/total with the rate carried at 32 fractional bits.
    let fixed = (leaders_per_slot * (1u64 << 32) as f64).round() as u128;
    (BigUint::from(fixed) << (256 - 32)) / total_stake
}

/// Threshold with `P[β < threshold] = p` for a uniform 256-bit β.
pub fn probability_threshold(p: f64) -> BigUint {
    if p <= 0.0 {
        return BigUint::default();
    }
    if p >= 1.0 {
        return BigUint::one() << 256;
    }
    BigUint::from((p * (1u64 << 62) as f64).round() as u64) << 194
}

/// The PoS inequality: β < stake·T, saturating — β is always below 2²⁵⁶, so
/// any bound at or past 2²⁵⁶ accepts everything and zero stake never wins.
pub fn eligible_value(beta: &[u8; 32], stake: u64, target: &BigUint) -> bool {
    BigUint::from_bytes_be(beta) < BigUint::from(stake) * target
}

/// Message the leadership VRF is evaluated over: the chain tip's randomness
/// and the slot number.
pub fn eligibility_message(parent_beta: &[u8; 32], slot: u32) -> Vec<u8> {
    let mut m = Vec::with_capacity(11 + 32 + 8);
    m.extend_from_slice(b"pos/elig/v1");
    m.extend_from_slice(parent_beta);
    m.extend_from_slice(&u64::from(slot).to_le_bytes());
    m
}

/// Evaluates the node's lottery for `slot` on the chain whose tip carries
/// `tip_beta`. Returns the verdict and the VRF output backing it.
pub fn eligible(
    node: &StakeHolder,
    slot: u32,
    tip_beta: &[u8; 32],
    target: &BigUint,
) -> (bool, [u8; 32]) {
    let beta = eval_beta_fast(&node.keys.secret, &eligibility_message(tip_beta, slot));
    (eligible_value(&beta, node.stake, target), beta)
}

/// Committee self-selection: every stake unit rolls its own VRF and joins
/// with probability `p`. Returns selected units per node id; the committee
/// size is the sum, distributed Binomial(Σ stake, p).
pub fn select_committee(
    holders: &[StakeHolder],
    slot: u32,
    seed: u64,
    p: f64,
) -> BTreeMap<u32, u64> {
    let bound = probability_threshold(p);
    let mut committee = BTreeMap::new();
    for h in holders {
        let mut units = 0u64;
        for unit in 0..h.stake {
            let mut m = Vec::with_capacity(16 + 8 + 8 + 8);
            m.extend_from_slice(b"pos/committee/v1");
            m.extend_from_slice(&seed.to_le_bytes());
            m.extend_from_slice(&u64::from(slot).to_le_bytes());
            m.extend_from_slice(&unit.to_le_bytes());
            let beta = eval_beta_fast(&h.keys.secret, &m);
            if BigUint::from_bytes_be(&beta) < bound {
                units += 1;
            }
        }
        if units > 0 {
            committee.insert(h.id, units);
        }
    }
    committee
}

/// Derives the stakeholder set for a config; key material is drawn from one
/// seeded stream in id order, so it is reproducible.
pub fn make_holders(config: &PosConfig) -> Vec<StakeHolder> {
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    config
        .stakes
        .iter()
        .enumerate()
        .map(|(i, &stake)| StakeHolder {
            id: i as u32,
            stake,
            keys: vrf_gen_from_rng(&mut rng),
            adversarial: config.adversarial.contains(&(i as u32)),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    /// Arena index of the parent; the genesis block points at itself.
    pub parent: u32,
    pub slot: u32,
    /// Creator id; `u32::MAX` for genesis.
    pub creator: u32,
    pub depth: u32,
    /// VRF output establishing the creator's eligibility.
    pub beta: [u8; 32],
    pub payload: [u8; 32],
    pub hash: [u8; 32],
    /// Serialized full VRF evaluation, attached on the proof subsample.
    pub proof: Option<Vec<u8>>,
}

pub fn block_hash(parent_hash: &[u8; 32], slot: u32, creator: u32, beta: &[u8; 32], payload: &[u8; 32]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"pos/block/v1");
    h.update(parent_hash);
    h.update(u64::from(slot).to_le_bytes());
    h.update(creator.to_le_bytes());
    h.update(beta);
    h.update(payload);
    h.finalize().into()
}

fn payload_digest(creator: u32, slot: u32, parent_hash: &[u8; 32], candidate: u8) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"pos/payload/v1");
    h.update(creator.to_le_bytes());
    h.update(u64::from(slot).to_le_bytes());
    h.update(parent_hash);
    h.update([candidate]);
    h.finalize().into()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotRecord {
    pub slot: u32,
    /// Node ids that won the lottery this slot, ascending.
    pub leaders: Vec<u32>,
    /// Arena indices of blocks created this slot.
    pub created: Vec<u32>,
    /// Arena indices of withheld blocks released this slot.
    pub released: Vec<u32>,
    /// Tip arena index per honest node (honest-list order) at slot end.
    pub tips: Vec<u32>,
}

/// Complete record of a run; everything metrics need and nothing secret.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosTranscript {
    pub stakes: Vec<u64>,
    pub adversarial: Vec<bool>,
    pub slots: u32,
    pub delta: u32,
    pub target: BigUint,
    pub strategy: Strategy,
    pub seed: u64,
    pub blocks: Vec<Block>,
    pub per_slot: Vec<SlotRecord>,
    /// Tip per honest node after the final delivery flush.
    pub final_tips: Vec<u32>,
    pub eligibility_events: u64,
    pub adv_eligibility_events: u64,
    pub proofs_checked: u32,
}

impl PosTranscript {
    pub fn honest_ids(&self) -> Vec<u32> {
        (0..self.adversarial.len() as u32)
            .filter(|&i| !self.adversarial[i as usize])
            .collect()
    }
}

fn genesis_block(seed: u64) -> Block {
    let mut h = Sha256::new();
    h.update(b"pos/genesis/v1");
    h.update(seed.to_le_bytes());
    let hash: [u8; 32] = h.finalize().into();
    let mut h = Sha256::new();
    h.update(b"pos/genesis-beta/v1");
    h.update(seed.to_le_bytes());
    let beta: [u8; 32] = h.finalize().into();
    Block {
        parent: 0,
        slot: 0,
        creator: u32::MAX,
        depth: 0,
        beta,
        payload: [0u8; 32],
        hash,
        proof: None,
    }
}

/// True if block `a` beats `b` under the fork-choice rule.
fn better(arena: &[Block], a: u32, b: u32) -> bool {
    let (ba, bb) = (&arena[a as usize], &arena[b as usize]);
    ba.depth > bb.depth || (ba.depth == bb.depth && ba.hash < bb.hash)
}

fn consider(arena: &[Block], tip: &mut u32, candidate: u32) {
    if better(arena, candidate, *tip) {
        *tip = candidate;
    }
}

/// Runs the lottery for every slot and returns the transcript.
pub fn run_pos(config: &PosConfig) -> Result<PosTranscript, PosError> {
    config.validate()?;
    let holders = make_holders(config);
    let target = target_for_rate(config.total_stake(), config.leaders_per_slot);
    let n = holders.len();
    let honest: Vec<usize> = (0..n).filter(|&i| !holders[i].adversarial).collect();
    let lag = config.delta.max(1);

    let mut arena = vec![genesis_block(config.seed)];
    let mut broadcast = vec![true];
    // Per-node view tip (delivered blocks only).
    let mut tips = vec![0u32; n];
    // The withholding adversary's rushing view over all blocks.
    let mut adv_tip = 0u32;
    let mut queue: Vec<Vec<u32>> = vec![Vec::new(); (config.slots + lag + 2) as usize];
    let mut per_slot = Vec::with_capacity(config.slots as usize);
    let mut eligibility_events = 0u64;
    let mut adv_eligibility_events = 0u64;
    let mut proofs_checked = 0u32;

    for slot in 1..=config.slots {
        for &idx in &queue[slot as usize] {
            for tip in tips.iter_mut() {
                consider(&arena, tip, idx);
            }
        }

        // Elections against start-of-slot views; all same-slot leaders fork
        // off their own tips. The adversary's tip is snapshotted so its
        // nodes cannot chain onto each other within one slot.
        let adv_parent = adv_tip;
        let mut leaders = Vec::new();
        let mut created = Vec::new();
        for (i, holder) in holders.iter().enumerate() {
            let withholding = holder.adversarial && config.strategy == Strategy::Withhold;
            let parent = if withholding { adv_parent } else { tips[i] };
            let parent_beta = arena[parent as usize].beta;
            let (won, beta) = eligible(holder, slot, &parent_beta, &target);
            if !won {
                continue;
            }
            eligibility_events += 1;
            if holder.adversarial {
                adv_eligibility_events += 1;
            }
            leaders.push(holder.id);

            let parent_hash = arena[parent as usize].hash;
            let payload = if holder.adversarial && config.strategy == Strategy::GrindLite {
                // Try several payloads, keep the one whose block hash is
                // smallest: the best possible tie-break grind. Eligibility
                // ignores the payload, so this buys nothing there.
                (0..8u8)
                    .map(|c| payload_digest(holder.id, slot, &parent_hash, c))
                    .min_by_key(|p| block_hash(&parent_hash, slot, holder.id, &beta, p))
                    .unwrap()
            } else {
                payload_digest(holder.id, slot, &parent_hash, 0)
            };
            let hash = block_hash(&parent_hash, slot, holder.id, &beta, &payload);
            let mut block = Block {
                parent,
                slot,
                creator: holder.id,
                depth: arena[parent as usize].depth + 1,
                beta,
                payload,
                hash,
                proof: None,
            };

            let idx = arena.len() as u32;
            if config.proof_every > 0 && idx % config.proof_every == 0 {
                let message = eligibility_message(&parent_beta, slot);
                let eval = vrf_eval(
                    &holder.keys.secret,
                    &message,
                    config.proof_rounds,
                    config.proof_mode,
                    config.seed.wrapping_add(u64::from(idx)),
                )
                .map_err(|e| PosError::BadBlock { index: idx, reason: e.to_string() })?;
                assert_eq!(eval.beta, beta, "fast path and proof path must agree");
                vrf_verify(&holder.keys.public, &message, &eval)
                    .map_err(|e| PosError::BadBlock { index: idx, reason: e.to_string() })?;
                block.proof = Some(eval.serialize());
                proofs_checked += 1;
            }

            arena.push(block);
            created.push(idx);
            if withholding {
                broadcast.push(false);
            } else {
                broadcast.push(true);
                consider(&arena, &mut tips[i], idx);
                queue[(slot + lag) as usize].push(idx);
            }
            consider(&arena, &mut adv_tip, idx);
        }

        // Release the private fork once it beats every honest view.
        let mut released = Vec::new();
        if config.strategy == Strategy::Withhold && !broadcast[adv_tip as usize] {
            let best_honest = honest
                .iter()
                .map(|&i| arena[tips[i] as usize].depth)
                .max()
                .unwrap_or(0);
            if arena[adv_tip as usize].depth > best_honest {
                let mut cursor = adv_tip;
                while !broadcast[cursor as usize] {
                    broadcast[cursor as usize] = true;
                    released.push(cursor);
                    queue[(slot + lag) as usize].push(cursor);
                    cursor = arena[cursor as usize].parent;
                }
                released.reverse();
            }
        }

        per_slot.push(SlotRecord {
            slot,
            leaders,
            created,
            released,
            tips: honest.iter().map(|&i| tips[i]).collect(),
        });
    }

    // Flush in-flight deliveries so final views reflect everything that was
    // actually broadcast. Unreleased private blocks stay hidden.
    for pending in queue.iter().skip(config.slots as usize + 1) {
        for &idx in pending {
            for tip in tips.iter_mut() {
                consider(&arena, tip, idx);
            }
        }
    }

    Ok(PosTranscript {
        stakes: config.stakes.clone(),
        adversarial: (0..n as u32).map(|i| config.adversarial.contains(&i)).collect(),
        slots: config.slots,
        delta: config.delta,
        target,
        strategy: config.strategy,
        seed: config.seed,
        blocks: arena,
        per_slot,
        final_tips: honest.iter().map(|&i| tips[i]).collect(),
        eligibility_events,
        adv_eligibility_events,
        proofs_checked,
    })
}

/// Re-checks the transcript against the key material: parent links, depths,
/// block hashes, every β against the creator's key and the eligibility
/// inequality, and any attached proofs under `vrf_verify`. This is the
/// "anyone can re-check every block" property — an adversary cannot place a
/// block in a slot its key did not win.
pub fn verify_transcript(t: &PosTranscript, holders: &[StakeHolder]) -> Result<(), PosError> {
    let bad = |index: u32, reason: &str| PosError::BadBlock { index, reason: reason.into() };
    if t.blocks.is_empty() || t.blocks[0] != genesis_block(t.seed) {
        return Err(bad(0, "genesis mismatch"));
    }
    for (i, b) in t.blocks.iter().enumerate().skip(1) {
        let i = i as u32;
        let parent = t
            .blocks
            .get(b.parent as usize)
            .filter(|_| b.parent < i)
            .ok_or_else(|| bad(i, "dangling parent"))?;
        if parent.slot >= b.slot {
            return Err(bad(i, "slot does not advance"));
        }
        if b.depth != parent.depth + 1 {
            return Err(bad(i, "depth mismatch"));
        }
        let holder = holders
            .iter()
            .find(|h| h.id == b.creator)
            .ok_or_else(|| bad(i, "unknown creator"))?;
        let message = eligibility_message(&parent.beta, b.slot);
        if eval_beta_fast(&holder.keys.secret, &message) != b.beta {
            return Err(bad(i, "vrf output mismatch"));
        }
        if !eligible_value(&b.beta, holder.stake, &t.target) {
            return Err(bad(i, "creator not eligible"));
        }
        if block_hash(&parent.hash, b.slot, b.creator, &b.beta, &b.payload) != b.hash {
            return Err(bad(i, "block hash mismatch"));
        }
        if let Some(proof) = &b.proof {
            let eval = VrfEvaluation::deserialize(proof)
                .map_err(|e| bad(i, &format!("proof decode: {e}")))?;
            if eval.beta != b.beta {
                return Err(bad(i, "proof output mismatch"));
            }
            vrf_verify(&holder.keys.public, &message, &eval)
                .map_err(|e| bad(i, &format!("proof rejected: {e}")))?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimMetrics {
    /// Length of the shortest honest final chain (genesis excluded).
    pub final_len_min: u32,
    /// Depth gained by the least-advanced honest view per window of slots.
    pub growth_windows: Vec<u32>,
    /// Adversarial creator fraction on the final chain.
    pub adv_fraction_final: f64,
    /// Worst adversarial fraction over any sliding block window.
    pub adv_fraction_max_window: f64,
    /// Smallest k making every sampled pair of honest views prefix-ordered
    /// after truncating k blocks.
    pub common_prefix_k: u32,
    /// Worst same-slot divergence depth between honest views.
    pub max_divergence: u32,
    pub eligibility_events: u64,
    pub adv_eligibility_events: u64,
    pub proofs_checked: u32,
}

fn chain_indices(arena: &[Block], tip: u32) -> Vec<u32> {
    let mut chain = Vec::with_capacity(arena[tip as usize].depth as usize + 1);
    let mut cursor = tip;
    loop {
        chain.push(cursor);
        if cursor == 0 {
            break;
        }
        cursor = arena[cursor as usize].parent;
    }
    chain.reverse();
    chain
}

/// Divergence of tips `a`, `b`: blocks either chain carries past their last
/// common ancestor.
fn divergence(arena: &[Block], mut a: u32, mut b: u32) -> u32 {
    let (da, db) = (arena[a as usize].depth, arena[b as usize].depth);
    while arena[a as usize].depth > arena[b as usize].depth {
        a = arena[a as usize].parent;
    }
    while arena[b as usize].depth > arena[a as usize].depth {
        b = arena[b as usize].parent;
    }
    while a != b {
        a = arena[a as usize].parent;
        b = arena[b as usize].parent;
    }
    da.max(db) - arena[a as usize].depth
}

/// Blocks of the chain at `tip` that are not on the `final_chain` (given as
/// an index set): the depth a later view rolled back past this snapshot.
fn rollback_depth(arena: &[Block], tip: u32, final_set: &HashSet<u32>) -> u32 {
    let mut cursor = tip;
    let mut k = 0;
    while !final_set.contains(&cursor) {
        cursor = arena[cursor as usize].parent;
        k += 1;
    }
    k
}

/// Measures growth / quality / common prefix from a finished transcript.
/// `growth_window` is in slots, `quality_window` in blocks. Sampled view
/// pairs for the common prefix are all same-slot honest pairs plus every
/// snapshot against every final view.
pub fn measure_metrics(
    t: &PosTranscript,
    growth_window: u32,
    quality_window: usize,
) -> SimMetrics {
    let arena = &t.blocks;
    let final_len_min = t
        .final_tips
        .iter()
        .map(|&tip| arena[tip as usize].depth)
        .min()
        .unwrap_or(0);

    // Growth: depth of the least-advanced honest view at each window edge.
    let min_depth_at = |rec: &SlotRecord| {
        rec.tips
            .iter()
            .map(|&tip| arena[tip as usize].depth)
            .min()
            .unwrap_or(0)
    };
    let mut growth_windows = Vec::new();
    if growth_window > 0 {
        let mut last = 0u32;
        for chunk in t.per_slot.chunks(growth_window as usize) {
            let end = chunk.last().map(min_depth_at).unwrap_or(last);
            growth_windows.push(end.saturating_sub(last));
            last = end;
        }
    }

    // Quality over each distinct final chain.
    let final_tips: std::collections::BTreeSet<u32> = t.final_tips.iter().copied().collect();
    let mut adv_fraction_final = 0f64;
    let mut adv_fraction_max_window = 0f64;
    for &tip in &final_tips {
        let chain = chain_indices(arena, tip);
        let body = &chain[1..]; // skip genesis
        if body.is_empty() {
            continue;
        }
        let adv_flags: Vec<bool> = body
            .iter()
            .map(|&i| t.adversarial[arena[i as usize].creator as usize])
            .collect();
        let total_frac =
            adv_flags.iter().filter(|&&a| a).count() as f64 / adv_flags.len() as f64;
        adv_fraction_final = adv_fraction_final.max(total_frac);
        let w = quality_window.min(adv_flags.len()).max(1);
        let mut in_window = adv_flags[..w].iter().filter(|&&a| a).count();
        let mut worst = in_window;
        for i in w..adv_flags.len() {
            in_window += adv_flags[i] as usize;
            in_window -= adv_flags[i - w] as usize;
            worst = worst.max(in_window);
        }
        adv_fraction_max_window = adv_fraction_max_window.max(worst as f64 / w as f64);
    }

    // Common prefix: same-slot pairwise divergence, plus each snapshot's
    // rollback relative to every final view.
    let final_sets: Vec<HashSet<u32>> = final_tips
        .iter()
        .map(|&tip| chain_indices(arena, tip).into_iter().collect())
        .collect();
    let mut max_divergence = 0u32;
    let mut common_prefix_k = 0u32;
    for rec in &t.per_slot {
        let distinct: std::collections::BTreeSet<u32> = rec.tips.iter().copied().collect();
        let distinct: Vec<u32> = distinct.into_iter().collect();
        for (ai, &a) in distinct.iter().enumerate() {
            for &b in &distinct[ai + 1..] {
                max_divergence = max_divergence.max(divergence(arena, a, b));
            }
            for set in &final_sets {
                common_prefix_k = common_prefix_k.max(rollback_depth(arena, a, set));
            }
        }
    }
    common_prefix_k = common_prefix_k.max(max_divergence);

    SimMetrics {
        final_len_min,
        growth_windows,
        adv_fraction_final,
        adv_fraction_max_window,
        common_prefix_k,
        max_divergence,
        eligibility_events: t.eligibility_events,
        adv_eligibility_events: t.adv_eligibility_events,
        proofs_checked: t.proofs_checked,
    }
}

/// Per-slot CSV: leadership, block flow, and the spread of honest views.
pub fn transcript_csv(t: &PosTranscript) -> String {
    let arena = &t.blocks;
    let mut out = String::from("slot,leaders,created,released,min_depth,max_depth,distinct_tips\n");
    for rec in &t.per_slot {
        let depths: Vec<u32> = rec.tips.iter().map(|&x| arena[x as usize].depth).collect();
        let distinct: std::collections::BTreeSet<u32> = rec.tips.iter().copied().collect();
        let leaders: Vec<String> = rec.leaders.iter().map(|l| l.to_string()).collect();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            rec.slot,
            leaders.join(";"),
            rec.created.len(),
            rec.released.len(),
            depths.iter().min().unwrap_or(&0),
            depths.iter().max().unwrap_or(&0),
            distinct.len(),
        ));
    }
    out
}

/// JSON summary of the run parameters and measured metrics.
pub fn summary_json(t: &PosTranscript, metrics: &SimMetrics) -> String {
    let value = serde_json::json!({
        "nodes": t.stakes.len(),
        "total_stake": t.stakes.iter().sum::<u64>(),
        "adversarial_nodes": t.adversarial.iter().filter(|&&a| a).count(),
        "slots": t.slots,
        "delta": t.delta,
        "strategy": t.strategy,
        "seed": t.seed,
        "target": t.target.to_string(),
        "blocks": t.blocks.len() - 1,
        "metrics": metrics,
    });
    serde_json::to_string_pretty(&value).expect("summary serializes")
}
