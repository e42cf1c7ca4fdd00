//! Shannon entropy, plug-in block entropy rates, conditional entropy on
//! joint cell tables, the conditional epsilon-independence test, and the
//! delta(epsilon) calibration it pairs with.
//!
//! Natural logarithms throughout; display bases are a CLI concern.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::empirical::{BlockDistribution, PROB_TOL};
use crate::error::{Error, Result};
use crate::lattice::folner_box;
use crate::symbolic::Configuration;

/// `-sum p ln p` with `0 ln 0 = 0`. No normalization checks.
pub fn entropy_raw<I: IntoIterator<Item = f64>>(masses: I) -> f64 {
    masses
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

/// Shannon entropy of a probability vector, in nats.
pub fn shannon(masses: &[f64]) -> Result<f64> {
    if masses.iter().any(|&p| !p.is_finite() || p < 0.0) {
        return Err(Error::InvalidDistribution("negative or non-finite mass".into()));
    }
    let total: f64 = masses.iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::NotProbability(total));
    }
    Ok(entropy_raw(masses.iter().copied()))
}

/// Shannon entropy of a probability block distribution.
pub fn shannon_of(dist: &BlockDistribution) -> Result<f64> {
    dist.ensure_probability()?;
    Ok(entropy_raw(dist.iter().map(|(_, m)| m)))
}

/// A sparse joint distribution over the cells of up to three finite
/// partitions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JointCellTable {
    axis_sizes: Vec<usize>,
    masses: BTreeMap<Vec<usize>, f64>,
    total: f64,
}

impl JointCellTable {
    pub fn new(
        axis_sizes: Vec<usize>,
        entries: impl IntoIterator<Item = (Vec<usize>, f64)>,
    ) -> Result<Self> {
        if axis_sizes.is_empty() || axis_sizes.len() > 3 {
            return Err(Error::EmptyAxes);
        }
        if axis_sizes.iter().any(|&s| s == 0) {
            return Err(Error::Invalid("axis of size zero".into()));
        }
        let mut masses: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        let mut total = 0.0;
        for (cell, mass) in entries {
            if cell.len() != axis_sizes.len()
                || cell.iter().zip(&axis_sizes).any(|(&c, &s)| c >= s)
            {
                return Err(Error::Invalid(format!("cell {cell:?} outside the table")));
            }
            if !mass.is_finite() || mass < 0.0 {
                return Err(Error::InvalidDistribution(format!("bad mass {mass}")));
            }
            if mass > 0.0 {
                *masses.entry(cell).or_insert(0.0) += mass;
                total += mass;
            }
        }
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::NotProbability(total));
        }
        Ok(JointCellTable { axis_sizes, masses, total })
    }

    /// Normalizes raw counts into a table.
    pub fn from_counts(
        axis_sizes: Vec<usize>,
        counts: impl IntoIterator<Item = (Vec<usize>, u64)>,
    ) -> Result<Self> {
        let gathered: Vec<(Vec<usize>, u64)> = counts.into_iter().collect();
        let total: u64 = gathered.iter().map(|(_, c)| c).sum();
        if total == 0 {
            return Err(Error::DegenerateTable(0.0));
        }
        Self::new(
            axis_sizes,
            gathered
                .into_iter()
                .map(|(cell, c)| (cell, c as f64 / total as f64)),
        )
    }

    pub fn axis_count(&self) -> usize {
        self.axis_sizes.len()
    }

    pub fn axis_sizes(&self) -> &[usize] {
        &self.axis_sizes
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.masses.iter().map(|(c, &m)| (c.as_slice(), m))
    }

    fn check_axes(&self, axes: &[usize]) -> Result<()> {
        for &a in axes {
            if a >= self.axis_sizes.len() {
                return Err(Error::InvalidAxis(a, self.axis_sizes.len()));
            }
        }
        Ok(())
    }

    /// Marginal over the given axes (in the given order).
    pub fn marginal(&self, axes: &[usize]) -> Result<BTreeMap<Vec<usize>, f64>> {
        self.check_axes(axes)?;
        let mut out: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (cell, &mass) in &self.masses {
            let key: Vec<usize> = axes.iter().map(|&a| cell[a]).collect();
            *out.entry(key).or_insert(0.0) += mass;
        }
        Ok(out)
    }

    /// Entropy of the marginal over `axes` (the full joint if all axes).
    pub fn entropy_of(&self, axes: &[usize]) -> Result<f64> {
        Ok(entropy_raw(self.marginal(axes)?.into_values()))
    }
}

/// `H(target | join of given) = H(target, given) - H(given)`.
pub fn conditional_entropy(
    table: &JointCellTable,
    target_axis: usize,
    given_axes: &[usize],
) -> Result<f64> {
    table.check_axes(&[target_axis])?;
    table.check_axes(given_axes)?;
    if given_axes.contains(&target_axis) {
        return Err(Error::Invalid("target axis listed among the given axes".into()));
    }
    let mut joint_axes = vec![target_axis];
    joint_axes.extend_from_slice(given_axes);
    let h_joint = table.entropy_of(&joint_axes)?;
    let h_given = if given_axes.is_empty() {
        0.0
    } else {
        table.entropy_of(given_axes)?
    };
    Ok((h_joint - h_given).max(0.0))
}

/// Result of the conditional epsilon-independence test.
#[derive(Clone, Debug, Serialize)]
pub struct EpsIndependenceReport {
    pub pass: bool,
    /// Cells `(c1, c2)` of positive mass passing the dist test.
    pub family: Vec<(usize, usize)>,
    pub family_mass: f64,
    pub max_dist_in_family: f64,
    pub max_dist_overall: f64,
}

/// Conditional epsilon-independence of axis 0 from axis 2 given axis 1:
/// the cells `C1 /\ C2` where `dist(R0 | C1 /\ C2, R0 | C1) < eps` must
/// carry mass above `1 - eps`.
pub fn eps_independence_test(
    table: &JointCellTable,
    eps: f64,
) -> Result<EpsIndependenceReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidEpsilon(eps));
    }
    if table.axis_count() != 3 {
        return Err(Error::Invalid(format!(
            "independence test needs a 3-axis table, got {}",
            table.axis_count()
        )));
    }
    if table.total <= 0.0 {
        return Err(Error::DegenerateTable(table.total));
    }
    let r0 = table.axis_sizes[0];

    // Conditional distributions of axis 0 given c1 and given (c1, c2).
    let mut given_c1: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut c1_mass: BTreeMap<usize, f64> = BTreeMap::new();
    let mut given_c1c2: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    let mut c1c2_mass: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (cell, mass) in table.iter() {
        let (c0, c1, c2) = (cell[0], cell[1], cell[2]);
        given_c1.entry(c1).or_insert_with(|| vec![0.0; r0])[c0] += mass;
        *c1_mass.entry(c1).or_insert(0.0) += mass;
        given_c1c2.entry((c1, c2)).or_insert_with(|| vec![0.0; r0])[c0] += mass;
        *c1c2_mass.entry((c1, c2)).or_insert(0.0) += mass;
    }

    let mut family = Vec::new();
    let mut family_mass = 0.0;
    let mut max_in_family: f64 = 0.0;
    let mut max_overall: f64 = 0.0;
    for ((c1, c2), masses) in &given_c1c2 {
        let pair_mass = c1c2_mass[&(*c1, *c2)];
        if pair_mass <= 0.0 {
            continue;
        }
        let base_mass = c1_mass[c1];
        let base = &given_c1[c1];
        let dist: f64 = masses
            .iter()
            .zip(base)
            .map(|(&num, &den)| (num / pair_mass - den / base_mass).abs())
            .sum();
        max_overall = max_overall.max(dist);
        if dist < eps {
            family.push((*c1, *c2));
            family_mass += pair_mass;
            max_in_family = max_in_family.max(dist);
        }
    }
    Ok(EpsIndependenceReport {
        pass: family_mass > 1.0 - eps,
        family,
        family_mass,
        max_dist_in_family: max_in_family,
        max_dist_overall: max_overall,
    })
}

/// The entropy-gap threshold paired with the epsilon-independence test:
/// if `H(R0 | R1 v R2) > H(R0 | R1) - delta` then the test passes at
/// `eps`. The value `eps^4 / 2` follows from Pinsker's inequality plus a
/// Markov bound and needs no dependence on the cell count; the count stays
/// in the signature to mirror the criterion it calibrates.
pub fn delta_for_eps(eps: f64, cell_count: usize) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidEpsilon(eps));
    }
    if cell_count < 2 {
        return Err(Error::Invalid(format!("cell count {cell_count} below 2")));
    }
    Ok(eps.powi(4) / 2.0)
}

/// One row of a block-entropy-rate scan.
#[derive(Clone, Debug, Serialize)]
pub struct RateEntry {
    pub n: i64,
    /// Window cell count `|F_n|`.
    pub window_cells: usize,
    /// Plug-in (or Miller-Madow) window entropy in nats.
    pub window_entropy: f64,
    /// Entropy per cell: `window_entropy / window_cells`.
    pub rate: f64,
    pub positions: usize,
    pub support: usize,
    /// Asymptotic standard error of the rate estimate.
    pub standard_error: f64,
}

/// Plug-in entropy of the `F_n`-window empirical distribution, per cell.
/// Requires at least `min_positions` windows (default caller: 100).
pub fn entropy_rate_at(
    w: &Configuration,
    n: i64,
    miller_madow: bool,
    min_positions: usize,
) -> Result<RateEntry> {
    let k = folner_box(w.region().dim(), n)?;
    let dist = crate::empirical::emp_config_normalized(w, &k)?;
    let positions = {
        // positions = total count; emp_config_normalized guarantees > 0
        let raw = crate::empirical::emp_config(w, &k)?;
        (raw.total() * w.region().len() as f64).round() as usize
    };
    if positions < min_positions {
        return Err(Error::InsufficientPositions { got: positions, need: min_positions });
    }
    let mut h = entropy_raw(dist.iter().map(|(_, m)| m));
    // Variance of the plug-in estimate (delta method): sum p ln^2 p - H^2.
    let var: f64 =
        dist.iter().map(|(_, m)| m * m.ln() * m.ln()).sum::<f64>() - h * h;
    let support = dist.support_len();
    if miller_madow {
        h += (support.saturating_sub(1)) as f64 / (2.0 * positions as f64);
    }
    let cells = k.len();
    Ok(RateEntry {
        n,
        window_cells: cells,
        window_entropy: h,
        rate: h / cells as f64,
        positions,
        support,
        standard_error: (var.max(0.0) / positions as f64).sqrt() / cells as f64,
    })
}

/// Entropy-rate scan over a list of window sides.
pub fn block_entropy_rate(
    w: &Configuration,
    box_sides: &[i64],
    miller_madow: bool,
) -> Result<Vec<RateEntry>> {
    box_sides
        .iter()
        .map(|&n| entropy_rate_at(w, n, miller_madow, 100))
        .collect()
}
