//! Finite very-weak-Bernoulli machinery for two-track Z-processes:
//! conditional future distributions per past window cell, the d-bar
//! closeness conditions in pooled and pairwise form, the three-part
//! entropy criterion, and the skew-product / trajectory plumbing.
//!
//! A sample carries a base track (P-symbols) and a fiber track
//! (Lambda-symbols); the pair at one time step is the R-symbol. Window
//! cells are encoded in mixed radix, so all conditioning is integer
//! bucketing over one pass of the sample.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::empirical::BlockDistribution;
use crate::entropy::{delta_for_eps, entropy_raw};
use crate::error::{Error, Result};
use crate::lattice::{GroupPoint, Shape};
use crate::metrics::dbar;
use crate::rng::substream;
use crate::symbolic::{Alphabet, Configuration, Symbol};

/// A finite trajectory of the skew product: aligned base and fiber symbol
/// tracks.
#[derive(Clone, Debug)]
pub struct TwoTrackSample {
    p_track: Vec<Symbol>,
    r_track: Vec<Symbol>,
    p_alphabet: Alphabet,
    r_alphabet: Alphabet,
}

impl TwoTrackSample {
    pub fn new(
        p_track: Vec<Symbol>,
        r_track: Vec<Symbol>,
        p_alphabet: Alphabet,
        r_alphabet: Alphabet,
    ) -> Result<Self> {
        if p_track.len() != r_track.len() {
            return Err(Error::DegenerateSample(format!(
                "track lengths differ: {} vs {}",
                p_track.len(),
                r_track.len()
            )));
        }
        if p_track.is_empty() {
            return Err(Error::DegenerateSample("empty sample".into()));
        }
        if p_track.iter().any(|&s| !p_alphabet.contains(s))
            || r_track.iter().any(|&s| !r_alphabet.contains(s))
        {
            return Err(Error::DegenerateSample("symbol outside alphabet".into()));
        }
        Ok(TwoTrackSample { p_track, r_track, p_alphabet, r_alphabet })
    }

    pub fn len(&self) -> usize {
        self.p_track.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_track.is_empty()
    }

    pub fn p_track(&self) -> &[Symbol] {
        &self.p_track
    }

    pub fn r_track(&self) -> &[Symbol] {
        &self.r_track
    }

    pub fn p_alphabet(&self) -> Alphabet {
        self.p_alphabet
    }

    pub fn r_alphabet(&self) -> Alphabet {
        self.r_alphabet
    }

    /// The paired symbol `p * |Lambda| + r` at one time step.
    pub fn pair_code(&self, t: usize) -> u64 {
        self.p_track[t] as u64 * self.r_alphabet.size() as u64 + self.r_track[t] as u64
    }

    pub fn pair_base(&self) -> u64 {
        self.p_alphabet.size() as u64 * self.r_alphabet.size() as u64
    }

    /// Two-column CSV with a `p,r` header.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 4 + 4);
        out.push_str("p,r\n");
        for t in 0..self.len() {
            out.push_str(&format!("{},{}\n", self.p_track[t], self.r_track[t]));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut p = Vec::new();
        let mut r = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with(|c: char| c.is_alphabetic())) {
                continue;
            }
            let mut parts = line.split(',');
            let (a, b) = (parts.next(), parts.next());
            match (a, b) {
                (Some(a), Some(b)) => {
                    let pa: Symbol = a.trim().parse().map_err(|e| {
                        Error::DegenerateSample(format!("line {}: {e}", lineno + 1))
                    })?;
                    let rb: Symbol = b.trim().parse().map_err(|e| {
                        Error::DegenerateSample(format!("line {}: {e}", lineno + 1))
                    })?;
                    p.push(pa);
                    r.push(rb);
                }
                _ => {
                    return Err(Error::DegenerateSample(format!(
                        "line {}: expected two comma-separated symbols",
                        lineno + 1
                    )))
                }
            }
        }
        let p_alpha = Alphabet::new((p.iter().copied().max().unwrap_or(0) + 1).max(2))?;
        let r_alpha = Alphabet::new((r.iter().copied().max().unwrap_or(0) + 1).max(2))?;
        TwoTrackSample::new(p, r, p_alpha, r_alpha)
    }
}

/// Two independent i.i.d. binary tracks.
pub fn iid_two_track(len: usize, p_one_base: f64, p_one_fiber: f64, seed: u64) -> TwoTrackSample {
    use rand::Rng;
    let mut rng = substream(seed, 0x2217);
    let p_track = (0..len).map(|_| u32::from(rng.gen::<f64>() < p_one_base)).collect();
    let r_track = (0..len).map(|_| u32::from(rng.gen::<f64>() < p_one_fiber)).collect();
    TwoTrackSample::new(p_track, r_track, Alphabet::BINARY, Alphabet::BINARY).unwrap()
}

/// Long-memory regime switch: the fiber track is a concatenation of
/// segments, each i.i.d. Bernoulli with success probability `p_low` or
/// `p_high` (segment regimes chosen equiprobably); the base track is
/// independent i.i.d. fair binary.
pub fn regime_switch_two_track(
    len: usize,
    segment_len: usize,
    p_low: f64,
    p_high: f64,
    seed: u64,
) -> TwoTrackSample {
    use rand::Rng;
    let mut rng = substream(seed, 0x2218);
    let p_track: Vec<Symbol> = (0..len).map(|_| rng.gen_range(0..2u32)).collect();
    let mut r_track = Vec::with_capacity(len);
    while r_track.len() < len {
        let p = if rng.gen::<bool>() { p_high } else { p_low };
        for _ in 0..segment_len.min(len - r_track.len()) {
            r_track.push(u32::from(rng.gen::<f64>() < p));
        }
    }
    TwoTrackSample::new(p_track, r_track, Alphabet::BINARY, Alphabet::BINARY).unwrap()
}

/// Conditional future distribution of one past cell.
#[derive(Clone, Debug)]
pub struct CellFutures {
    pub count: u64,
    pub dist: BlockDistribution,
}

/// Conditional future distributions per `(A, B)` past cell for one `(k, N)`
/// pair, plus the pooled futures per `B` cell.
pub struct FuturesTable {
    pub k: usize,
    pub n_steps: usize,
    pub pair_base: u64,
    pub total_windows: u64,
    pub min_count: u64,
    /// Kept cells: visit count at least `min_count`.
    pub cells: BTreeMap<(u64, u64), CellFutures>,
    /// Number of observed cells excluded for low counts, and their mass.
    pub low_mass_cells: usize,
    pub excluded_mass: f64,
    /// Pooled future distributions per `B` cell over all windows.
    pub pooled_by_b: BTreeMap<u64, CellFutures>,
}

impl FuturesTable {
    pub fn kept_mass(&self) -> f64 {
        1.0 - self.excluded_mass
    }

    pub fn cell_mass(&self, cell: &(u64, u64)) -> f64 {
        self.cells
            .get(cell)
            .map(|c| c.count as f64 / self.total_windows as f64)
            .unwrap_or(0.0)
    }
}

fn future_key(codes: u64, base: u64, n: usize) -> Vec<Symbol> {
    let mut key = Vec::with_capacity(n);
    let mut c = codes;
    for _ in 0..n {
        key.push((c % base) as Symbol);
        c /= base;
    }
    key
}

fn dist_from_counts(
    counts: &BTreeMap<u64, u64>,
    total: u64,
    base: u64,
    n: usize,
) -> BlockDistribution {
    let domain = Shape::interval(n as i64).unwrap();
    BlockDistribution::from_weights(
        domain,
        counts
            .iter()
            .map(|(&code, &c)| (future_key(code, base, n), c as f64 / total as f64)),
    )
    .unwrap()
}

/// Empirical conditional future distributions per past cell: `A` ranges
/// over R-windows `[-k, -1]`, `B` over P-windows `[-k, k]`, futures over
/// R-windows `[0, N-1]`. Cells with fewer than `min_count` visits are
/// excluded (candidates for the complement of the good family).
pub fn estimate_conditional_futures(
    s: &TwoTrackSample,
    k: usize,
    n_steps: usize,
    min_count: u64,
) -> Result<FuturesTable> {
    if n_steps == 0 {
        return Err(Error::Invalid("future window must have at least one step".into()));
    }
    if min_count == 0 {
        return Err(Error::Invalid("min_count must be at least 1".into()));
    }
    let t_len = s.len();
    if t_len < 10 * (2 * k + n_steps) {
        return Err(Error::DegenerateSample(format!(
            "sample of length {t_len} too short for k={k}, N={n_steps}"
        )));
    }
    let pair_base = s.pair_base();
    let p_base = s.p_alphabet.size() as u64;
    // Codes must fit in u64.
    let bits = |base: u64, len: usize| (base as f64).log2() * len as f64;
    if bits(pair_base, k.max(n_steps)) > 62.0 || bits(p_base, 2 * k + 1) > 62.0 {
        return Err(Error::Invalid("window too large to encode".into()));
    }

    let first = k;
    let last = t_len - n_steps.max(k + 1);
    if first > last {
        return Err(Error::DegenerateSample("no complete windows".into()));
    }

    let mut counts: BTreeMap<(u64, u64), BTreeMap<u64, u64>> = BTreeMap::new();
    let mut pooled: BTreeMap<u64, BTreeMap<u64, u64>> = BTreeMap::new();
    for t in first..=last {
        let mut a_code = 0u64;
        for i in (t - k)..t {
            a_code = a_code * pair_base + s.pair_code(i);
        }
        let mut b_code = 0u64;
        for i in (t - k)..=(t + k) {
            b_code = b_code * p_base + s.p_track[i] as u64;
        }
        let mut f_code = 0u64;
        // Little-endian so decoding yields time order.
        for i in (t..t + n_steps).rev() {
            f_code = f_code * pair_base + s.pair_code(i);
        }
        *counts.entry((a_code, b_code)).or_default().entry(f_code).or_insert(0) += 1;
        *pooled.entry(b_code).or_default().entry(f_code).or_insert(0) += 1;
    }

    let total_windows = (last - first + 1) as u64;
    let mut cells = BTreeMap::new();
    let mut low_mass_cells = 0usize;
    let mut excluded = 0u64;
    for (cell, fut) in counts {
        let count: u64 = fut.values().sum();
        if count < min_count {
            low_mass_cells += 1;
            excluded += count;
            continue;
        }
        cells.insert(
            cell,
            CellFutures { count, dist: dist_from_counts(&fut, count, pair_base, n_steps) },
        );
    }
    let pooled_by_b = pooled
        .into_iter()
        .map(|(b, fut)| {
            let count: u64 = fut.values().sum();
            (b, CellFutures { count, dist: dist_from_counts(&fut, count, pair_base, n_steps) })
        })
        .collect();
    Ok(FuturesTable {
        k,
        n_steps,
        pair_base,
        total_windows,
        min_count,
        cells,
        low_mass_cells,
        excluded_mass: excluded as f64 / total_windows as f64,
        pooled_by_b,
    })
}

/// Which closeness condition to check.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VwbVariant {
    /// Each cell's future close to the pooled future of its base cell.
    Pooled,
    /// Pairwise closeness (at twice epsilon) among cells sharing a base
    /// cell.
    Pairwise,
}

#[derive(Clone, Debug, Serialize)]
pub struct VwbCheckReport {
    pub variant: VwbVariant,
    pub pass: bool,
    pub family: Vec<(u64, u64)>,
    pub family_mass: f64,
    /// Worst d-bar among kept cells (pooled variant) or surviving pairs
    /// (pairwise variant).
    pub worst_dbar: f64,
    /// True when at most one cell was measured, so the check carries no
    /// information.
    pub vacuous: bool,
}

/// All pairwise d-bar values among kept cells sharing a base cell.
fn pairwise_dbars(
    futures: &FuturesTable,
) -> Vec<((u64, u64), (u64, u64), f64)> {
    let mut by_b: BTreeMap<u64, Vec<(&(u64, u64), &CellFutures)>> = BTreeMap::new();
    for (cell, fut) in &futures.cells {
        by_b.entry(cell.1).or_default().push((cell, fut));
    }
    let groups: Vec<_> = by_b.into_values().collect();
    groups
        .par_iter()
        .flat_map(|group| {
            let mut out = Vec::new();
            for i in 0..group.len() {
                for j in (i + 1)..group.len() {
                    let (value, _) = dbar(&group[i].1.dist, &group[j].1.dist)
                        .expect("empirical futures share a domain");
                    out.push((*group[i].0, *group[j].0, value));
                }
            }
            out
        })
        .collect()
}

/// Checks the chosen closeness condition and assembles the good family.
///
/// Pooled: the family holds the kept cells whose conditional future is
/// within `eps` of the pooled future of their base cell. Pairwise: kept
/// cells are greedily pruned until all pairs sharing a base cell are
/// within `2 eps`; the survivors form the family. Either way the check
/// passes when the family carries mass above `1 - eps`.
pub fn vwb_condition_check(
    futures: &FuturesTable,
    eps: f64,
    variant: VwbVariant,
) -> Result<VwbCheckReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidEpsilon(eps));
    }
    if futures.cells.is_empty() {
        return Err(Error::DegenerateSample("no cells above min_count".into()));
    }
    let vacuous = futures.cells.len() <= 1;
    match variant {
        VwbVariant::Pooled => {
            let mut family = Vec::new();
            let mut family_mass = 0.0;
            let mut worst: f64 = 0.0;
            let values: Vec<((u64, u64), f64, f64)> = futures
                .cells
                .par_iter()
                .map(|(cell, fut)| {
                    let pooled = &futures.pooled_by_b[&cell.1];
                    let (value, _) = dbar(&fut.dist, &pooled.dist)
                        .expect("empirical futures share a domain");
                    (*cell, value, fut.count as f64 / futures.total_windows as f64)
                })
                .collect();
            for (cell, value, mass) in values {
                worst = worst.max(value);
                if value < eps {
                    family.push(cell);
                    family_mass += mass;
                }
            }
            Ok(VwbCheckReport {
                variant,
                pass: family_mass > 1.0 - eps,
                family,
                family_mass,
                worst_dbar: worst,
                vacuous,
            })
        }
        VwbVariant::Pairwise => {
            let pairs = pairwise_dbars(futures);
            // Greedy pruning: drop the lighter cell of the worst violating
            // pair until all surviving pairs are within 2 eps.
            let mut dropped: std::collections::BTreeSet<(u64, u64)> = Default::default();
            loop {
                let worst_pair = pairs
                    .iter()
                    .filter(|(a, b, _)| !dropped.contains(a) && !dropped.contains(b))
                    .max_by(|x, y| x.2.partial_cmp(&y.2).unwrap());
                match worst_pair {
                    Some(&(a, b, v)) if v >= 2.0 * eps => {
                        let ca = futures.cells[&a].count;
                        let cb = futures.cells[&b].count;
                        dropped.insert(if ca <= cb { a } else { b });
                    }
                    _ => break,
                }
            }
            let worst = pairs
                .iter()
                .filter(|(a, b, _)| !dropped.contains(a) && !dropped.contains(b))
                .map(|&(_, _, v)| v)
                .fold(0.0f64, f64::max);
            let family: Vec<(u64, u64)> = futures
                .cells
                .keys()
                .filter(|c| !dropped.contains(c))
                .copied()
                .collect();
            let family_mass: f64 = family.iter().map(|c| futures.cell_mass(c)).sum();
            Ok(VwbCheckReport {
                variant,
                pass: family_mass > 1.0 - eps,
                family,
                family_mass,
                worst_dbar: worst,
                vacuous,
            })
        }
    }
}

/// The base-cell reduction of a good family: keep the base cells where
/// the family's conditional mass is at least `1 - sqrt(eps)`, then keep
/// the family cells over those base cells.
#[derive(Clone, Debug, Serialize)]
pub struct OverTransformReport {
    pub b_family: Vec<u64>,
    pub b_family_mass: f64,
    pub g0: Vec<(u64, u64)>,
    pub g0_mass: f64,
    /// `1 - 2 sqrt(eps)`: the guaranteed mass when the input family has
    /// mass above `1 - eps`.
    pub bound_mass: f64,
    pub pass_mass: bool,
    /// Worst d-bar between a kept cell's future and its pooled base
    /// future, against the bound `sqrt(eps) + 2 eps`.
    pub worst_pooled_dbar: f64,
    pub bound_pooled: f64,
    pub pass_pooled: bool,
}

pub fn lemma_over_transform(
    futures: &FuturesTable,
    family: &[(u64, u64)],
    eps: f64,
) -> Result<OverTransformReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidEpsilon(eps));
    }
    let sqrt_eps = eps.sqrt();
    // Family mass per base cell, conditioned on the base cell.
    let mut family_by_b: BTreeMap<u64, u64> = BTreeMap::new();
    for cell in family {
        let count = futures
            .cells
            .get(cell)
            .map(|c| c.count)
            .ok_or_else(|| Error::Invalid("family cell not in the table".into()))?;
        *family_by_b.entry(cell.1).or_insert(0) += count;
    }
    let mut b_family = Vec::new();
    let mut b_mass = 0.0;
    for (&b, pooled) in &futures.pooled_by_b {
        let good = family_by_b.get(&b).copied().unwrap_or(0);
        if good as f64 / pooled.count as f64 >= 1.0 - sqrt_eps {
            b_family.push(b);
            b_mass += pooled.count as f64 / futures.total_windows as f64;
        }
    }
    let g0: Vec<(u64, u64)> = family
        .iter()
        .filter(|cell| b_family.binary_search(&cell.1).is_ok())
        .copied()
        .collect();
    let g0_mass: f64 = g0.iter().map(|c| futures.cell_mass(c)).sum();

    let worst_pooled = g0
        .par_iter()
        .map(|cell| {
            let fut = &futures.cells[cell];
            let pooled = &futures.pooled_by_b[&cell.1];
            dbar(&fut.dist, &pooled.dist).expect("shared domain").0
        })
        .reduce(|| 0.0, f64::max);

    let bound_mass = 1.0 - 2.0 * sqrt_eps;
    let bound_pooled = sqrt_eps + 2.0 * eps;
    Ok(OverTransformReport {
        b_family,
        b_family_mass: b_mass,
        g0_mass,
        g0,
        bound_mass,
        pass_mass: g0_mass > bound_mass,
        worst_pooled_dbar: worst_pooled,
        bound_pooled,
        pass_pooled: worst_pooled < bound_pooled,
    })
}

/// Outcome of the three-part finite criterion.
#[derive(Clone, Debug, Serialize)]
pub struct L5Report {
    pub cc: bool,
    pub dd: bool,
    pub ee: bool,
    pub kept_mass: f64,
    pub excluded_mass: f64,
    pub kept_cells: usize,
    pub low_mass_cells: usize,
    pub worst_dd_dbar: f64,
    pub conditional_entropy: f64,
    pub threshold: f64,
    pub delta: f64,
    pub n_windows: u64,
    pub vacuous: bool,
}

impl L5Report {
    pub fn all_pass(&self) -> bool {
        self.cc && self.dd && self.ee
    }
}

/// The finite criterion at `(eps, N, k0)` with target conditional entropy
/// rate `c` (nats per step): (cc) the kept cells carry mass above
/// `1 - eps`; (dd) all pairs of kept cells sharing a base cell have
/// conditional futures within `eps` in d-bar; (ee) the conditional entropy
/// of the future window given the past cell stays below
/// `N c + delta(eps, |R|^N)`.
pub fn l5_criterion(
    s: &TwoTrackSample,
    eps: f64,
    n_steps: usize,
    k0: usize,
    min_count: u64,
    c: f64,
) -> Result<L5Report> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidEpsilon(eps));
    }
    let futures = estimate_conditional_futures(s, k0, n_steps, min_count)?;
    let kept_mass = futures.kept_mass();
    let cc = kept_mass > 1.0 - eps;

    let pairs = pairwise_dbars(&futures);
    let worst_dd = pairs.iter().map(|&(_, _, v)| v).fold(0.0f64, f64::max);
    let dd = worst_dd < eps;

    // Conditional entropy H(future | past cell) from the window counts.
    let total = futures.total_windows as f64;
    let (h_joint, h_given) = {
        // Rebuilding joint masses from kept + pooled data would lose the
        // excluded cells, so recount over all windows.
        let t_len = s.len();
        let pair_base = s.pair_base();
        let p_base = s.p_alphabet().size() as u64;
        let first = k0;
        let last = t_len - n_steps.max(k0 + 1);
        let mut joint: BTreeMap<(u64, u64, u64), u64> = BTreeMap::new();
        let mut given: BTreeMap<(u64, u64), u64> = BTreeMap::new();
        for t in first..=last {
            let mut a_code = 0u64;
            for i in (t - k0)..t {
                a_code = a_code * pair_base + s.pair_code(i);
            }
            let mut b_code = 0u64;
            for i in (t - k0)..=(t + k0) {
                b_code = b_code * p_base + s.p_track()[i] as u64;
            }
            let mut f_code = 0u64;
            for i in (t..t + n_steps).rev() {
                f_code = f_code * pair_base + s.pair_code(i);
            }
            *joint.entry((a_code, b_code, f_code)).or_insert(0) += 1;
            *given.entry((a_code, b_code)).or_insert(0) += 1;
        }
        (
            entropy_raw(joint.values().map(|&c| c as f64 / total)),
            entropy_raw(given.values().map(|&c| c as f64 / total)),
        )
    };
    let cond_entropy = (h_joint - h_given).max(0.0);
    let cell_count = (futures.pair_base as u128)
        .checked_pow(n_steps as u32)
        .map(|v| v.min(usize::MAX as u128) as usize)
        .unwrap_or(usize::MAX);
    let delta = delta_for_eps(eps, cell_count.max(2))?;
    let threshold = n_steps as f64 * c + delta;
    let ee = cond_entropy < threshold;

    Ok(L5Report {
        cc,
        dd,
        ee,
        kept_mass,
        excluded_mass: futures.excluded_mass,
        kept_cells: futures.cells.len(),
        low_mass_cells: futures.low_mass_cells,
        worst_dd_dbar: worst_dd,
        conditional_entropy: cond_entropy,
        threshold,
        delta,
        n_windows: futures.total_windows,
        vacuous: futures.cells.len() <= 1,
    })
}

/// The group-valued increments `n -> g_{T^n x}` along a trajectory window
/// `[lo, hi)`.
#[derive(Clone, Debug)]
pub struct GAssignment {
    lo: i64,
    increments: Vec<GroupPoint>,
}

impl GAssignment {
    pub fn new(lo: i64, increments: Vec<GroupPoint>) -> Self {
        GAssignment { lo, increments }
    }

    /// Window `[lo, hi)` of indices with a defined increment.
    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.lo + self.increments.len() as i64)
    }

    pub fn increment_at(&self, idx: i64) -> Result<GroupPoint> {
        let (lo, hi) = self.window();
        if idx < lo || idx >= hi {
            return Err(Error::WindowExceeded { lo, hi, idx });
        }
        Ok(self.increments[(idx - lo) as usize])
    }
}

/// The accumulated displacement: `theta(0) = e`, for `n >= 1` the sum of
/// the increments at `0..n` (later increments composing after earlier
/// ones), for `n <= -1` minus the sum of the increments at `n..0`.
pub fn theta_trajectory(g: &GAssignment, n: i64) -> Result<GroupPoint> {
    let mut acc = GroupPoint::ORIGIN;
    if n >= 1 {
        for idx in 0..n {
            acc = acc + g.increment_at(idx)?;
        }
    } else {
        for idx in n..0 {
            acc = acc - g.increment_at(idx)?;
        }
    }
    Ok(acc)
}

/// All collisions `theta(n1) == theta(n2)` with `n1 < n2` over the full
/// range of evaluable times. An assignment arising from a genuine orbit
/// equivalence has none.
pub fn theta_collisions(g: &GAssignment) -> Result<Vec<(i64, i64)>> {
    let (lo, hi) = g.window();
    let n_lo = lo.min(0);
    let n_hi = hi.max(0);
    let mut seen: std::collections::HashMap<GroupPoint, i64> = Default::default();
    let mut collisions = Vec::new();
    for n in n_lo..=n_hi {
        let p = theta_trajectory(g, n)?;
        if let Some(&prev) = seen.get(&p) {
            collisions.push((prev, n));
        } else {
            seen.insert(p, n);
        }
    }
    Ok(collisions)
}

/// One step of the skew product on the fiber coordinate: shifts the
/// configuration by the base increment. Errs when the origin would leave
/// the shifted region (the finite-window caveat).
pub fn skew_step(w: &Configuration, g_x: GroupPoint) -> Result<Configuration> {
    if !w.region().contains(g_x) {
        return Err(Error::RegionEscape(1));
    }
    Ok(w.shift(g_x))
}

/// Iterates the skew product along an assignment without materializing
/// shifted configurations: tracks the accumulated displacement and reads
/// the fiber symbol at the moving origin.
pub struct SkewOrbit<'a> {
    assignment: &'a GAssignment,
    omega: &'a Configuration,
    time: i64,
    offset: GroupPoint,
}

impl<'a> SkewOrbit<'a> {
    pub fn new(assignment: &'a GAssignment, omega: &'a Configuration) -> Result<Self> {
        if !omega.region().contains(GroupPoint::ORIGIN) {
            return Err(Error::RegionEscape(0));
        }
        Ok(SkewOrbit { assignment, omega, time: 0, offset: GroupPoint::ORIGIN })
    }

    pub fn time(&self) -> i64 {
        self.time
    }

    /// The accumulated displacement `theta(time)`.
    pub fn offset(&self) -> GroupPoint {
        self.offset
    }

    /// Fiber symbol at the moving origin.
    pub fn read(&self) -> Symbol {
        self.omega.value_at(self.offset).expect("offset stays in region")
    }

    pub fn step(&mut self) -> Result<()> {
        let g = self.assignment.increment_at(self.time)?;
        let next = self.offset + g;
        if !self.omega.region().contains(next) {
            return Err(Error::RegionEscape(self.time + 1));
        }
        self.offset = next;
        self.time += 1;
        Ok(())
    }
}
