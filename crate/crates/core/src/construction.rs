//! The randomized Cantor construction with embedded progressions.
//!
//! Each level is refined block by block. A single base block `B` of `t`
//! digits in `[0, N)` is drawn so that all its cyclic rotations have small
//! exponential sums, every atom of the current level gets a random rotation
//! of it, and atoms on the structured path get the progression patched in.
//! The positive-probability steps are replaced by sample, verify and retry.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dft::{mul_mod, unit_root, weighted_dft};
use crate::error::{Error, Result};
use crate::level::{check_nesting, LevelSet};
use crate::params::ConstructionParams;

/// How a family of inequalities indexed by frequency was checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerificationMode {
    /// Every residue `k` modulo the period.
    Exhaustive,
    /// A declared deterministic sample of residues.
    Sampled,
    /// The inequality holds for every `k` without computation.
    Trivial,
}

/// Residues `k` modulo `period` on which a periodic inequality is checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrequencySet {
    Exhaustive { period: u64 },
    Sampled { period: u64, ks: Vec<u64> },
}

const SAMPLE_DENSE_PREFIX: u64 = 1 << 16;
const SAMPLE_RANDOM_COUNT: usize = 4096;

impl FrequencySet {
    /// Exhaustive when `period <= budget`. Otherwise all `k < 2^16`, all
    /// multiples `m N^i` below the period, and a seeded uniform sample.
    pub fn for_period(period: u64, budget: u64, n: u64, seed: u64) -> Self {
        if period <= budget {
            return FrequencySet::Exhaustive { period };
        }
        let mut ks: Vec<u64> = (0..SAMPLE_DENSE_PREFIX.min(period)).collect();
        let mut power = n;
        while power < period {
            ks.extend((1..n).map(|m| m * power).take_while(|&k| k < period));
            power = power.saturating_mul(n);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ks.extend((0..SAMPLE_RANDOM_COUNT).map(|_| rng.gen_range(0..period)));
        ks.sort_unstable();
        ks.dedup();
        FrequencySet::Sampled { period, ks }
    }

    pub fn mode(&self) -> VerificationMode {
        match self {
            FrequencySet::Exhaustive { .. } => VerificationMode::Exhaustive,
            FrequencySet::Sampled { .. } => VerificationMode::Sampled,
        }
    }

    pub fn period(&self) -> u64 {
        match self {
            FrequencySet::Exhaustive { period } | FrequencySet::Sampled { period, .. } => *period,
        }
    }

    pub fn len(&self) -> u64 {
        match self {
            FrequencySet::Exhaustive { period } => *period,
            FrequencySet::Sampled { ks, .. } => ks.len() as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn frequency_seed(seed: u64, level: usize, salt: u64) -> u64 {
    seed ^ salt ^ (level as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseBlock {
    /// `t` distinct digits in `[0, N)`.
    pub members: Vec<u64>,
    pub eta: f64,
    pub verified_k_count: u64,
    pub mode: VerificationMode,
    /// Largest discrepancy over all rotations and checked `k`, divided by `eta`.
    pub worst_ratio: f64,
    pub retries: usize,
}

/// `{(x + y) mod N : y in members}`, sorted.
pub fn rotate(members: &[u64], x: u64, n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = members.iter().map(|&y| (x + y) % n).collect();
    out.sort_unstable();
    out
}

/// Arithmetic progression `{offset + i gap : 0 <= i < sqrt(t)}`.
pub fn make_progression(params: &ConstructionParams) -> Result<Vec<u64>> {
    make_progression_raw(params.ap_offset, params.ap_gap, params.sqrt_t, params.n)
}

pub fn make_progression_raw(offset: u64, gap: u64, len: u64, modulus: u64) -> Result<Vec<u64>> {
    let err = Error::ProgressionOutOfRange {
        offset,
        gap,
        len,
        modulus,
    };
    if len == 0 {
        return Ok(Vec::new());
    }
    match (len - 1).checked_mul(gap).and_then(|v| v.checked_add(offset)) {
        Some(last) if last < modulus => Ok((0..len).map(|i| offset + i * gap).collect()),
        _ => Err(err),
    }
}

/// The progression topped up with the smallest missing digits to size `t`.
pub fn progression_with_fillers(progression: &[u64], t: u64, n: u64) -> Vec<u64> {
    let mut out = progression.to_vec();
    let mut candidate = 0;
    while (out.len() as u64) < t && candidate < n {
        if !progression.contains(&candidate) {
            out.push(candidate);
        }
        candidate += 1;
    }
    out.sort_unstable();
    out
}

/// Worst value of `|S_{B_x}(k)/t - S_{[N]}(k)/N|` over all rotations `x` and
/// the given residues `k`, with its witness `(k, x)`. Exponential sums are
/// taken at period `N^(j+1)`.
pub fn block_discrepancy(
    members: &[u64],
    params: &ConstructionParams,
    freqs: &FrequencySet,
) -> Result<(f64, u64, u64)> {
    let n = params.n;
    let t = params.t as f64;
    let period = freqs.period();
    let per_rotation: Vec<Result<(f64, u64)>> = (0..n)
        .into_par_iter()
        .map(|x| {
            let rotated = rotate(members, x, n);
            match freqs {
                FrequencySet::Exhaustive { .. } => {
                    let mut weights = vec![-1.0 / n as f64; n as usize];
                    for &m in &rotated {
                        weights[m as usize] += 1.0 / t;
                    }
                    let table =
                        weighted_dft(period, weights.into_iter().enumerate().map(|(m, w)| (m as u64, w)))?;
                    Ok(arg_max_norm(table.iter().copied()))
                }
                FrequencySet::Sampled { ks, .. } => Ok(ks
                    .iter()
                    .map(|&k| {
                        let roots: Vec<Complex64> =
                            (0..n).map(|m| unit_root(mul_mod(m, k as i64, period), period)).collect();
                        let full: Complex64 = roots.iter().sum();
                        let block: Complex64 = rotated.iter().map(|&m| roots[m as usize]).sum();
                        ((block / t - full / n as f64).norm(), k)
                    })
                    .fold((f64::NEG_INFINITY, 0), max_pair)),
            }
        })
        .collect();
    let mut worst = (f64::NEG_INFINITY, 0, 0);
    for (x, res) in per_rotation.into_iter().enumerate() {
        let (v, k) = res?;
        if v > worst.0 {
            worst = (v, k, x as u64);
        }
    }
    Ok(worst)
}

fn arg_max_norm(values: impl Iterator<Item = Complex64>) -> (f64, u64) {
    values
        .enumerate()
        .map(|(k, z)| (z.norm(), k as u64))
        .fold((f64::NEG_INFINITY, 0), max_pair)
}

fn max_pair(acc: (f64, u64), item: (f64, u64)) -> (f64, u64) {
    if item.0 > acc.0 {
        item
    } else {
        acc
    }
}

/// Draws the base block for refining level `j` into level `j + 1`.
pub fn build_base_block<R: Rng>(
    params: &ConstructionParams,
    j: usize,
    rng: &mut R,
) -> Result<BaseBlock> {
    if j == 0 {
        return Err(Error::InvalidParams(
            "base blocks are only drawn for j >= 1; level 1 is fixed".into(),
        ));
    }
    let eta = params.eta(j);
    let n = params.n;
    let t = params.t;
    if eta >= 2.0 {
        let progression = make_progression(params)?;
        return Ok(BaseBlock {
            members: progression_with_fillers(&progression, t, n),
            eta,
            verified_k_count: 0,
            mode: VerificationMode::Trivial,
            worst_ratio: 0.0,
            retries: 0,
        });
    }

    let freqs = FrequencySet::for_period(
        params.scale(j + 1),
        params.k_budget,
        n,
        frequency_seed(params.seed, j, 0xB10C),
    );
    let p = t as f64 / n as f64;
    let mut worst_seen = (f64::NEG_INFINITY, 0, 0);
    for attempt in 0..=params.max_retries {
        let mut members: Vec<u64> = (0..n).filter(|_| rng.gen_bool(p)).collect();
        let (first, k, x) = block_discrepancy(&members, params, &freqs)?;
        if first > eta / 2.0 {
            if first > worst_seen.0 {
                worst_seen = (first, k, x);
            }
            continue;
        }
        fix_cardinality(&mut members, t, n);
        let (second, k, x) = block_discrepancy(&members, params, &freqs)?;
        if second > eta {
            return Err(Error::Invariant {
                name: "base-block-discrepancy",
                level: j + 1,
                detail: format!(
                    "after the cardinality fix the discrepancy {second:.6e} exceeds eta = {eta:.6e} at k = {k}, x = {x}"
                ),
            });
        }
        return Ok(BaseBlock {
            members,
            eta,
            verified_k_count: freqs.len(),
            mode: freqs.mode(),
            worst_ratio: second / eta,
            retries: attempt,
        });
    }
    Err(Error::RetriesExhausted {
        level: j + 1,
        stage: "base block",
        attempts: params.max_retries + 1,
        worst: worst_seen.0,
        witness: format!("k = {}, x = {}", worst_seen.1, worst_seen.2),
    })
}

/// Drops the largest members or adds the smallest absent digits until the
/// block has exactly `t` elements.
fn fix_cardinality(members: &mut Vec<u64>, t: u64, n: u64) {
    let t = t as usize;
    if members.len() > t {
        members.truncate(t);
        return;
    }
    let mut candidate = 0;
    while members.len() < t && candidate < n {
        if members.binary_search(&candidate).is_err() {
            let pos = members.partition_point(|&m| m < candidate);
            members.insert(pos, candidate);
        }
        candidate += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationAssignment {
    pub j: usize,
    /// `x(a)` for the atoms of level `j`, in atom order.
    pub rotations: Vec<u64>,
    pub lambda: f64,
    /// Thresholds for `ell = 1..=j`; index `ell - 1`.
    pub lambda_ell: Vec<f64>,
    pub retries_used: usize,
    pub mode: VerificationMode,
    pub checked_k_count: u64,
    /// Largest checked value of the full normalized sum divided by `lambda`.
    pub worst_ratio: f64,
    /// Same for each restricted sum, divided by `lambda_ell`.
    pub worst_ratio_ell: Vec<f64>,
}

/// Number of leading base-`N` digits of a level-`j` atom that lie in the
/// progression. An atom lies in `F_ell` iff its depth is at least `ell`.
pub fn structured_depth(v: u64, j: usize, n: u64, in_progression: &[bool]) -> usize {
    let mut depth = 0;
    let mut scale = n.pow(j as u32);
    while depth < j {
        scale /= n;
        let digit = (v / scale) % n;
        if !in_progression[digit as usize] {
            break;
        }
        depth += 1;
    }
    depth
}

fn progression_mask(progression: &[u64], n: u64) -> Vec<bool> {
    let mut mask = vec![false; n as usize];
    for &m in progression {
        mask[m as usize] = true;
    }
    mask
}

/// Worst normalized rotation sums for a fixed assignment:
/// `max_k |t^-j sum_{A_j} chi_a(k)| / lambda_j` and, per `ell`,
/// `max_k |t^(-j + ell/2) sum_{F_ell cap A_j} chi_a(k)| / lambda_{j,ell}`.
/// Witness frequencies are returned alongside.
pub fn rotation_sums(
    params: &ConstructionParams,
    level: &LevelSet,
    block: &[u64],
    rotations: &[u64],
    depths: &[usize],
    freqs: &FrequencySet,
) -> Result<Vec<(f64, u64)>> {
    let j = level.j;
    let n = params.n;
    let t = params.t as f64;
    let period = freqs.period();
    // Entry 0 is the full sum, entry ell the F_ell-restricted one.
    let norms: Vec<f64> = (0..=j)
        .map(|ell| {
            let scale = t.powf(-(j as f64) + ell as f64 / 2.0);
            let threshold = if ell == 0 {
                params.lambda(j)
            } else {
                params.lambda_ell(j, ell)
            };
            scale / threshold
        })
        .collect();

    match freqs {
        FrequencySet::Exhaustive { .. } => (0..=j)
            .into_par_iter()
            .map(|ell| {
                let entries = level
                    .atoms
                    .iter()
                    .zip(rotations)
                    .zip(depths)
                    .filter(|(_, &d)| d >= ell)
                    .flat_map(|((&v, &x), _)| {
                        let rotated = rotate(block, x, n);
                        (0..n).map(move |m| {
                            let w = if rotated.binary_search(&m).is_ok() { 1.0 / t } else { 0.0 };
                            (v * n + m, w - 1.0 / n as f64)
                        })
                    });
                let table = weighted_dft(period, entries)?;
                let (v, k) = arg_max_norm(table.into_iter());
                Ok((v * norms[ell], k))
            })
            .collect(),
        FrequencySet::Sampled { ks, .. } => {
            let per_k: Vec<Vec<f64>> = ks
                .par_iter()
                .map(|&k| {
                    let roots: Vec<Complex64> =
                        (0..n).map(|m| unit_root(mul_mod(m, k as i64, period), period)).collect();
                    let full: Complex64 = roots.iter().sum::<Complex64>() / n as f64;
                    let diffs: Vec<Complex64> = (0..n)
                        .map(|x| {
                            let s: Complex64 =
                                block.iter().map(|&y| roots[((x + y) % n) as usize]).sum();
                            s / t - full
                        })
                        .collect();
                    let mut by_depth = vec![Complex64::new(0.0, 0.0); j + 1];
                    for ((&v, &x), &d) in level.atoms.iter().zip(rotations).zip(depths) {
                        let phase = unit_root(mul_mod(v * n, k as i64, period), period);
                        by_depth[d] += phase * diffs[x as usize];
                    }
                    // Suffix sums: F_ell collects every depth >= ell.
                    let mut acc = Complex64::new(0.0, 0.0);
                    let mut out = vec![0.0; j + 1];
                    for ell in (0..=j).rev() {
                        acc += by_depth[ell];
                        out[ell] = acc.norm() * norms[ell];
                    }
                    out
                })
                .collect();
            Ok((0..=j)
                .map(|ell| {
                    per_k
                        .iter()
                        .zip(ks)
                        .map(|(row, &k)| (row[ell], k))
                        .fold((f64::NEG_INFINITY, 0), max_pair)
                })
                .collect())
        }
    }
}

/// Draws rotations `x(a)` until every checked rotation sum stays strictly
/// below its threshold.
pub fn choose_rotations<R: Rng>(
    params: &ConstructionParams,
    level: &LevelSet,
    block: &BaseBlock,
    progression: &[u64],
    rng: &mut R,
) -> Result<RotationAssignment> {
    let j = level.j;
    let n = params.n;
    let mask = progression_mask(progression, n);
    let depths: Vec<usize> = level
        .atoms
        .iter()
        .map(|&v| structured_depth(v, j, n, &mask))
        .collect();
    let freqs = FrequencySet::for_period(
        params.scale(j + 1),
        params.k_budget,
        n,
        frequency_seed(params.seed, j, 0x0207),
    );
    let mut worst_seen = (f64::NEG_INFINITY, 0, 0);
    for attempt in 0..=params.max_retries {
        let rotations: Vec<u64> = level.atoms.iter().map(|_| rng.gen_range(0..n)).collect();
        let sums = rotation_sums(params, level, &block.members, &rotations, &depths, &freqs)?;
        if let Some((ell, &(v, k))) = sums
            .iter()
            .enumerate()
            .filter(|(_, (v, _))| *v >= 1.0)
            .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        {
            if v > worst_seen.0 {
                worst_seen = (v, k, ell);
            }
            continue;
        }
        return Ok(RotationAssignment {
            j,
            rotations,
            lambda: params.lambda(j),
            lambda_ell: (1..=j).map(|ell| params.lambda_ell(j, ell)).collect(),
            retries_used: attempt,
            mode: freqs.mode(),
            checked_k_count: freqs.len(),
            worst_ratio: sums[0].0,
            worst_ratio_ell: sums[1..].iter().map(|s| s.0).collect(),
        });
    }
    Err(Error::RetriesExhausted {
        level: j + 1,
        stage: "rotation choice",
        attempts: params.max_retries + 1,
        worst: worst_seen.0,
        witness: format!("k = {}, ell = {}", worst_seen.1, worst_seen.2),
    })
}

/// Adjoins the progression to a rotated block and removes as many of the
/// block's largest non-progression digits as were added.
pub fn patch_structured(block_x: &[u64], progression: &[u64], t: u64) -> Result<Vec<u64>> {
    let added = progression
        .iter()
        .filter(|m| block_x.binary_search(m).is_err())
        .count();
    let mut removable: Vec<u64> = block_x
        .iter()
        .copied()
        .filter(|m| !progression.contains(m))
        .collect();
    if removable.len() < added {
        return Err(Error::Invariant {
            name: "patch-cardinality",
            level: 0,
            detail: format!(
                "cannot remove {added} digits from a block with {} non-progression digits",
                removable.len()
            ),
        });
    }
    removable.truncate(removable.len() - added);
    let mut out = removable;
    out.extend_from_slice(progression);
    out.sort_unstable();
    out.dedup();
    if out.len() as u64 != t {
        return Err(Error::Invariant {
            name: "patch-cardinality",
            level: 0,
            detail: format!("patched block has {} digits, expected {t}", out.len()),
        });
    }
    Ok(out)
}

/// Per-level record of what was drawn and how it was checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelAudit {
    /// The level produced by this step.
    pub level: usize,
    pub block_mode: Option<VerificationMode>,
    pub eta: Option<f64>,
    pub block_retries: usize,
    pub block_worst_ratio: Option<f64>,
    pub block_checked_k: u64,
    pub rotation_mode: Option<VerificationMode>,
    pub rotation_retries: usize,
    pub rotation_checked_k: u64,
    pub lambda_worst_ratio: Option<f64>,
    pub lambda_ell_worst_ratio: Vec<f64>,
}

impl LevelAudit {
    pub fn total_retries(&self) -> usize {
        self.block_retries + self.rotation_retries
    }
}

/// Everything produced when refining one level.
#[derive(Debug, Clone)]
pub struct LevelStep {
    pub level: LevelSet,
    pub block: Option<BaseBlock>,
    pub rotations: Option<RotationAssignment>,
    pub audit: LevelAudit,
}

/// Refines `levels[j]` into level `j + 1`.
pub fn build_level<R: Rng>(
    params: &ConstructionParams,
    levels: &[LevelSet],
    progression: &[u64],
    j: usize,
    rng: &mut R,
) -> Result<LevelStep> {
    let current = levels.get(j).ok_or(Error::MissingLevel(j))?;
    let n = params.n;
    let t = params.t;

    let mut structured = Vec::with_capacity(current.structured.len() * progression.len());
    for &a in &current.structured {
        structured.extend(progression.iter().map(|&m| a * n + m));
    }

    let (atoms, block, rotations) = if j == 0 {
        let digits = progression_with_fillers(progression, t, n);
        (digits, None, None)
    } else {
        let block = build_base_block(params, j, rng)?;
        let rot = choose_rotations(params, current, &block, progression, rng)?;
        let mut atoms = Vec::with_capacity(current.atoms.len() * t as usize);
        for (&a, &x) in current.atoms.iter().zip(&rot.rotations) {
            let mut digits = rotate(&block.members, x, n);
            if current.is_structured(a) {
                digits = patch_structured(&digits, progression, t).map_err(|e| match e {
                    Error::Invariant { name, detail, .. } => Error::Invariant {
                        name,
                        level: j + 1,
                        detail,
                    },
                    other => other,
                })?;
            }
            atoms.extend(digits.into_iter().map(|m| a * n + m));
        }
        (atoms, Some(block), Some(rot))
    };

    let level = LevelSet {
        j: j + 1,
        atoms,
        structured,
    };
    level.check_shape(params)?;
    check_nesting(current, &level, progression, params)?;

    let audit = LevelAudit {
        level: j + 1,
        block_mode: block.as_ref().map(|b| b.mode),
        eta: block.as_ref().map(|b| b.eta),
        block_retries: block.as_ref().map_or(0, |b| b.retries),
        block_worst_ratio: block.as_ref().map(|b| b.worst_ratio),
        block_checked_k: block.as_ref().map_or(0, |b| b.verified_k_count),
        rotation_mode: rotations.as_ref().map(|r| r.mode),
        rotation_retries: rotations.as_ref().map_or(0, |r| r.retries_used),
        rotation_checked_k: rotations.as_ref().map_or(0, |r| r.checked_k_count),
        lambda_worst_ratio: rotations.as_ref().map(|r| r.worst_ratio),
        lambda_ell_worst_ratio: rotations
            .as_ref()
            .map(|r| r.worst_ratio_ell.clone())
            .unwrap_or_default(),
    };
    Ok(LevelStep {
        level,
        block,
        rotations,
        audit,
    })
}

#[derive(Debug, Clone)]
pub struct Construction {
    pub params: ConstructionParams,
    pub progression: Vec<u64>,
    pub levels: Vec<LevelSet>,
    /// `blocks[j]` refined level `j`; `None` for `j = 0` and for loaded runs.
    pub blocks: Vec<Option<BaseBlock>>,
    pub rotations: Vec<Option<RotationAssignment>>,
    pub audit: Vec<LevelAudit>,
}

pub fn build_construction(params: &ConstructionParams) -> Result<Construction> {
    params.validate()?;
    let progression = make_progression(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut levels = vec![LevelSet::root()];
    let mut blocks = Vec::new();
    let mut rotations = Vec::new();
    let mut audit = Vec::new();
    for j in 0..params.j_max {
        let step = build_level(params, &levels, &progression, j, &mut rng)?;
        levels.push(step.level);
        blocks.push(step.block);
        rotations.push(step.rotations);
        audit.push(step.audit);
    }
    Ok(Construction {
        params: params.clone(),
        progression,
        levels,
        blocks,
        rotations,
        audit,
    })
}

impl Construction {
    /// Wraps levels read back from disk. The progression is recovered from
    /// the structured atoms of level 1.
    pub fn from_levels(params: ConstructionParams, levels: Vec<LevelSet>) -> Result<Self> {
        let progression = levels
            .get(1)
            .map(|l| l.structured.clone())
            .ok_or(Error::MissingLevel(1))?;
        let construction = Construction {
            params,
            progression,
            levels,
            blocks: Vec::new(),
            rotations: Vec::new(),
            audit: Vec::new(),
        };
        construction.check_invariants()?;
        Ok(construction)
    }

    pub fn j_max(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, j: usize) -> Result<&LevelSet> {
        self.levels.get(j).ok_or(Error::MissingLevel(j))
    }

    /// Shape of every level and nesting of every consecutive pair.
    pub fn check_invariants(&self) -> Result<()> {
        if self.levels.first() != Some(&LevelSet::root()) {
            return Err(Error::Invariant {
                name: "root",
                level: 0,
                detail: "level 0 must be {0} with structured {0}".into(),
            });
        }
        for (j, level) in self.levels.iter().enumerate() {
            if level.j != j {
                return Err(Error::Invariant {
                    name: "level-index",
                    level: j,
                    detail: format!("file claims level {}", level.j),
                });
            }
            level.check_shape(&self.params)?;
        }
        for pair in self.levels.windows(2) {
            check_nesting(&pair[0], &pair[1], &self.progression, &self.params)?;
        }
        Ok(())
    }

    /// Level-`j` atoms lying in `F_ell`: those whose level-`ell` ancestor is
    /// structured. These are the integers `N^j (F_ell cap A_j)`.
    pub fn restricted_atoms(&self, j: usize, ell: usize) -> Result<Vec<u64>> {
        if ell > j {
            return Err(Error::LevelOrder { ell, j });
        }
        let level = self.level(j)?;
        let anchor = self.level(ell)?;
        let divisor = self.params.scale(j - ell);
        Ok(level
            .atoms
            .iter()
            .copied()
            .filter(|&v| anchor.is_structured(v / divisor))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_params, ParamOverrides};

    fn desk(j_max: usize, seed: u64) -> ConstructionParams {
        derive_params(
            4,
            2,
            1,
            &ParamOverrides {
                j_max: Some(j_max),
                seed: Some(seed),
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn progression_examples() {
        assert_eq!(make_progression_raw(0, 15, 2, 16).unwrap(), vec![0, 15]);
        assert!(matches!(
            make_progression_raw(0, 16, 2, 16),
            Err(Error::ProgressionOutOfRange { .. })
        ));
        let p = make_progression_raw(0, 585, 8, 4096).unwrap();
        assert_eq!(p, vec![0, 585, 1170, 1755, 2340, 2925, 3510, 4095]);
        assert_eq!(4095 / 7, 585);
    }

    #[test]
    fn patch_examples() {
        assert_eq!(patch_structured(&[0, 1, 2, 3], &[0, 15], 4).unwrap(), vec![0, 1, 2, 15]);
        assert_eq!(patch_structured(&[0, 5, 9, 15], &[0, 15], 4).unwrap(), vec![0, 5, 9, 15]);
        assert_eq!(patch_structured(&[1, 2, 3, 4], &[0, 2, 4, 6], 4).unwrap(), vec![0, 2, 4, 6]);
        assert_eq!(patch_structured(&[3, 7], &[0, 15], 2).unwrap(), vec![0, 15]);
    }

    #[test]
    fn trivial_block_for_desk() {
        let p = desk(4, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let block = build_base_block(&p, 1, &mut rng).unwrap();
        assert_eq!(block.mode, VerificationMode::Trivial);
        assert!(block.eta >= 2.0);
        assert!((block.eta - (48.0 * 32768f64.ln()).sqrt()).abs() < 1e-9);
        assert_eq!(block.members, vec![0, 1, 2, 15]);
    }

    #[test]
    fn zero_frequency_discrepancy_vanishes_at_full_size() {
        let p = desk(2, 0);
        let freqs = FrequencySet::Sampled {
            period: 256,
            ks: vec![0],
        };
        let (worst, _, _) = block_discrepancy(&[0, 3, 7, 12], &p, &freqs).unwrap();
        assert!(worst < 1e-12);
    }

    #[test]
    fn level_one_and_two() {
        let c = build_construction(&desk(2, 7)).unwrap();
        assert_eq!(c.levels[1].atoms, vec![0, 1, 2, 15]);
        assert_eq!(c.levels[1].structured, vec![0, 15]);
        assert_eq!(c.levels[2].atoms.len(), 16);
        assert_eq!(c.levels[2].structured.len(), 4);
        for &v in &c.levels[2].atoms {
            assert!(c.levels[1].contains(v / 16));
        }
    }

    #[test]
    fn j_max_zero_style_root() {
        assert_eq!(LevelSet::root().atoms, vec![0]);
    }

    #[test]
    fn trivial_runs_never_retry() {
        let c = build_construction(&desk(4, 7)).unwrap();
        assert!(c.audit.iter().all(|a| a.total_retries() == 0));
        assert!(c.audit[1..]
            .iter()
            .all(|a| a.block_mode == Some(VerificationMode::Trivial)));
    }

    #[test]
    fn restricted_atom_counts() {
        let c = build_construction(&desk(4, 3)).unwrap();
        for j in 0..=4 {
            for ell in 0..=j {
                let r = c.restricted_atoms(j, ell).unwrap();
                // t^(ell/2) t^(j - ell)
                assert_eq!(r.len() as u64, 2u64.pow(ell as u32) * 4u64.pow((j - ell) as u32));
            }
        }
        assert!(matches!(c.restricted_atoms(1, 2), Err(Error::LevelOrder { .. })));
    }

    #[test]
    fn structured_depth_counts_leading_digits() {
        let mask = progression_mask(&[0, 15], 16);
        assert_eq!(structured_depth(0, 3, 16, &mask), 3);
        assert_eq!(structured_depth(15 * 256 + 1, 3, 16, &mask), 2);
        assert_eq!(structured_depth(15 * 256 + 16, 3, 16, &mask), 1);
        assert_eq!(structured_depth(256, 3, 16, &mask), 0);
    }

    #[test]
    fn sampled_frequency_set_is_declared() {
        let f = FrequencySet::for_period(1 << 24, 1 << 20, 16, 5);
        assert_eq!(f.mode(), VerificationMode::Sampled);
        if let FrequencySet::Sampled { ks, .. } = &f {
            assert!(ks.contains(&65535) && ks.contains(&(15 << 20)) && ks.contains(&(1 << 16)));
            assert!(ks.windows(2).all(|w| w[0] < w[1]));
        }
        assert_eq!(f, FrequencySet::for_period(1 << 24, 1 << 20, 16, 5));
    }
}
