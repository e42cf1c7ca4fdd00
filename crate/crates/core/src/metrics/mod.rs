//! Distances between partitions and block distributions: the permutation
//! distance d1 (assignment solving), the l1 distance `dist`, Hamming
//! distance on blocks, and the coupling distance d-bar via exact optimal
//! transport. Also the Dobrushin maximal coupling.
//!
//! d-bar is computed on explicit sparse supports with integer-scaled
//! masses (common denominator 2^40) and integer Hamming-numerator costs,
//! so the flow optimum is exact; the value is descaled at the end.

pub mod assignment;
pub mod flow;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::empirical::BlockDistribution;
use crate::error::{Error, Result};
use crate::lattice::Shape;
use crate::symbolic::{Block, Symbol};

/// Common denominator for mass scaling in the exact transport solver.
pub const MASS_DENOM: u64 = 1 << 40;

/// Cap on `|support(P)| * |support(Q)|` for the flow solver.
pub const SUPPORT_CAP: usize = 1_000_000;


/// Two measurable partitions of equal cardinality with their joint cell
/// masses: `joint[i][j] = mu(P_i /\ P'_j)`. The marginals are stated
/// explicitly and validated against the joint row/column sums.
#[derive(Clone, Debug, Serialize)]
pub struct FinitePartitionMeasure {
    pub p_masses: Vec<f64>,
    pub q_masses: Vec<f64>,
    pub joint: Vec<Vec<f64>>,
}

impl FinitePartitionMeasure {
    pub fn new(p_masses: Vec<f64>, q_masses: Vec<f64>, joint: Vec<Vec<f64>>) -> Result<Self> {
        let n = p_masses.len();
        if q_masses.len() != n || joint.len() != n || joint.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("partition tables must be square".into()));
        }
        if joint.iter().flatten().any(|&m| !m.is_finite() || m < 0.0) {
            return Err(Error::Invalid("negative joint mass".into()));
        }
        let pm = FinitePartitionMeasure { p_masses, q_masses, joint };
        let gap = pm.marginal_gap();
        if gap > 1e-12 {
            return Err(Error::MarginalMismatch(gap));
        }
        Ok(pm)
    }

    /// Derives the marginals from the joint matrix (always consistent).
    pub fn from_joint(joint: Vec<Vec<f64>>) -> Result<Self> {
        let n = joint.len();
        if joint.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("joint matrix must be square".into()));
        }
        if joint.iter().flatten().any(|&m| !m.is_finite() || m < 0.0) {
            return Err(Error::Invalid("negative joint mass".into()));
        }
        let p_masses: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
        let q_masses: Vec<f64> =
            (0..n).map(|j| joint.iter().map(|r| r[j]).sum()).collect();
        Ok(FinitePartitionMeasure { p_masses, q_masses, joint })
    }

    fn marginal_gap(&self) -> f64 {
        let n = self.p_masses.len();
        let mut gap: f64 = 0.0;
        for i in 0..n {
            let row: f64 = self.joint[i].iter().sum();
            gap = gap.max((row - self.p_masses[i]).abs());
        }
        for j in 0..n {
            let col: f64 = self.joint.iter().map(|r| r[j]).sum();
            gap = gap.max((col - self.q_masses[j]).abs());
        }
        gap
    }

    pub fn cardinality(&self) -> usize {
        self.p_masses.len()
    }

    /// `mu(P_i triangle P'_j) = mu(P_i) + mu(P'_j) - 2 mu(P_i /\ P'_j)`.
    pub fn symmetric_difference(&self, i: usize, j: usize) -> f64 {
        self.p_masses[i] + self.q_masses[j] - 2.0 * self.joint[i][j]
    }
}

/// `d1 = min over cell pairings of the total symmetric-difference mass`,
/// solved exactly as an assignment problem.
pub fn partition_d1(pm: &FinitePartitionMeasure) -> f64 {
    let n = pm.cardinality();
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| pm.symmetric_difference(i, j)).collect())
        .collect();
    let (_, total) = assignment::solve_min(&cost);
    total
}

/// `dist(P, P') = sum over blocks of |P(a) - P'(a)|` (twice total
/// variation). Both inputs must be probability distributions on the same
/// domain.
pub fn tv_dist(p: &BlockDistribution, q: &BlockDistribution) -> Result<f64> {
    if p.domain() != q.domain() {
        return Err(Error::DomainMismatch);
    }
    p.ensure_probability()?;
    q.ensure_probability()?;
    Ok(p.l1_distance(q))
}

/// Hamming distance: the fraction of cells where the blocks disagree.
/// Domains must coincide exactly.
pub fn hamming(a: &Block, b: &Block) -> Result<f64> {
    if a.domain() != b.domain() {
        return Err(Error::DomainMismatch);
    }
    if a.domain().is_empty() {
        return Err(Error::EmptyShape);
    }
    Ok(hamming_numerator(a.values(), b.values()) as f64 / a.domain().len() as f64)
}

fn hamming_numerator(a: &[Symbol], b: &[Symbol]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// A sparse coupling of two block distributions over a shared domain.
#[derive(Clone, Debug)]
pub struct Coupling {
    domain: Shape,
    entries: Vec<(Vec<Symbol>, Vec<Symbol>, f64)>,
}

impl Coupling {
    pub fn domain(&self) -> &Shape {
        &self.domain
    }

    pub fn entries(&self) -> &[(Vec<Symbol>, Vec<Symbol>, f64)] {
        &self.entries
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|(_, _, m)| m).sum()
    }

    /// Expected Hamming distance under the coupling.
    pub fn expected_hamming(&self) -> f64 {
        let cells = self.domain.len() as f64;
        self.entries
            .iter()
            .map(|(a, b, m)| m * hamming_numerator(a, b) as f64 / cells)
            .sum()
    }

    /// Mass placed off the diagonal.
    pub fn off_diagonal_mass(&self) -> f64 {
        self.entries
            .iter()
            .filter(|(a, b, _)| a != b)
            .map(|(_, _, m)| m)
            .sum()
    }

    pub fn left_marginal(&self) -> BlockDistribution {
        let entries = self
            .entries
            .iter()
            .map(|(a, _, m)| (a.clone(), *m))
            .collect::<Vec<_>>();
        BlockDistribution::from_weights(self.domain.clone(), entries).unwrap()
    }

    pub fn right_marginal(&self) -> BlockDistribution {
        let entries = self
            .entries
            .iter()
            .map(|(_, b, m)| (b.clone(), *m))
            .collect::<Vec<_>>();
        BlockDistribution::from_weights(self.domain.clone(), entries).unwrap()
    }

    /// Largest deviation of the coupling marginals from the given pair.
    pub fn marginal_gap(&self, p: &BlockDistribution, q: &BlockDistribution) -> f64 {
        self.left_marginal()
            .sup_distance(p)
            .max(self.right_marginal().sup_distance(q))
    }
}

// Couplings serialize as a sequence of (block, block, mass) triples.
impl Serialize for Coupling {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let fmt = |k: &[Symbol]| {
            k.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
        };
        let mut seq = serializer.serialize_seq(Some(self.entries.len()))?;
        for (a, b, m) in &self.entries {
            seq.serialize_element(&(fmt(a), fmt(b), *m))?;
        }
        seq.end()
    }
}

fn check_dbar_inputs(p: &BlockDistribution, q: &BlockDistribution) -> Result<()> {
    if p.domain() != q.domain() {
        return Err(Error::DomainMismatch);
    }
    if p.domain().is_empty() {
        return Err(Error::EmptyShape);
    }
    p.ensure_probability()?;
    q.ensure_probability()?;
    Ok(())
}

/// d-bar between block distributions: the minimum expected Hamming
/// distance over couplings, solved exactly by min-cost flow on the
/// support-product graph. Returns the value and an optimal coupling.
pub fn dbar(p: &BlockDistribution, q: &BlockDistribution) -> Result<(f64, Coupling)> {
    check_dbar_inputs(p, q)?;
    let product = p.support_len() * q.support_len();
    if product > SUPPORT_CAP {
        return Err(Error::SupportCapExceeded(product, SUPPORT_CAP));
    }

    let p_keys: Vec<&[Symbol]> = p.iter().map(|(k, _)| k).collect();
    let q_keys: Vec<&[Symbol]> = q.iter().map(|(k, _)| k).collect();
    let supplies = flow::scale_masses(&p.iter().map(|(_, m)| m).collect::<Vec<_>>(), MASS_DENOM);
    let demands = flow::scale_masses(&q.iter().map(|(_, m)| m).collect::<Vec<_>>(), MASS_DENOM);

    let (flows, cost) = flow::transport(&supplies, &demands, |i, j| {
        hamming_numerator(p_keys[i], q_keys[j]) as i64
    });

    let cells = p.domain().len() as f64;
    let value = cost as f64 / (MASS_DENOM as f64 * cells);
    let entries = flows
        .into_iter()
        .map(|(i, j, f)| {
            (
                p_keys[i].to_vec(),
                q_keys[j].to_vec(),
                f as f64 / MASS_DENOM as f64,
            )
        })
        .collect();
    Ok((value, Coupling { domain: p.domain().clone(), entries }))
}

/// The Dobrushin maximal coupling: `min(P(a), Q(a))` on the diagonal, the
/// excess masses paired off deterministically. Its off-diagonal mass is
/// exactly `dist(P, Q) / 2`, certifying `dbar <= dist / 2`.
pub fn maximal_coupling(p: &BlockDistribution, q: &BlockDistribution) -> Result<Coupling> {
    check_dbar_inputs(p, q)?;
    let mut entries: Vec<(Vec<Symbol>, Vec<Symbol>, f64)> = Vec::new();
    let mut surplus: Vec<(Vec<Symbol>, f64)> = Vec::new();
    let mut deficit: Vec<(Vec<Symbol>, f64)> = Vec::new();
    for (k, pm) in p.iter() {
        let qm = q.mass(k);
        let diag = pm.min(qm);
        if diag > 0.0 {
            entries.push((k.to_vec(), k.to_vec(), diag));
        }
        if pm > qm {
            surplus.push((k.to_vec(), pm - qm));
        }
    }
    for (k, qm) in q.iter() {
        let pm = p.mass(k);
        if qm > pm {
            deficit.push((k.to_vec(), qm - pm));
        }
    }
    // Pair off the excesses in lexicographic order.
    let (mut i, mut j) = (0, 0);
    let mut carry_s = surplus.first().map(|x| x.1).unwrap_or(0.0);
    let mut carry_d = deficit.first().map(|x| x.1).unwrap_or(0.0);
    while i < surplus.len() && j < deficit.len() {
        let m = carry_s.min(carry_d);
        if m > 0.0 {
            entries.push((surplus[i].0.clone(), deficit[j].0.clone(), m));
        }
        carry_s -= m;
        carry_d -= m;
        if carry_s <= f64::EPSILON {
            i += 1;
            carry_s = surplus.get(i).map(|x| x.1).unwrap_or(0.0);
        }
        if carry_d <= f64::EPSILON {
            j += 1;
            carry_d = deficit.get(j).map(|x| x.1).unwrap_or(0.0);
        }
    }
    Ok(Coupling { domain: p.domain().clone(), entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirical::BlockDistribution;
    use crate::lattice::Shape;
    use rand::Rng;

    fn dist_on(domain_len: i64, entries: Vec<(Vec<Symbol>, f64)>) -> BlockDistribution {
        BlockDistribution::from_weights(Shape::interval(domain_len).unwrap(), entries).unwrap()
    }

    fn random_distribution(
        rng: &mut impl Rng,
        domain_len: i64,
        alphabet: u32,
        support: usize,
    ) -> BlockDistribution {
        let cells = domain_len as usize;
        let mut entries: Vec<(Vec<Symbol>, f64)> = Vec::new();
        for _ in 0..support {
            let key: Vec<Symbol> = (0..cells).map(|_| rng.gen_range(0..alphabet)).collect();
            entries.push((key, rng.gen::<f64>() + 1e-3));
        }
        let total: f64 = entries.iter().map(|(_, m)| m).sum();
        for e in entries.iter_mut() {
            e.1 /= total;
        }
        BlockDistribution::from_weights(Shape::interval(domain_len).unwrap(), entries).unwrap()
    }

    #[test]
    fn partition_d1_examples() {
        // P = P': diagonal joint, d1 = 0.
        let diag = FinitePartitionMeasure::from_joint(vec![
            vec![0.3, 0.0],
            vec![0.0, 0.7],
        ])
        .unwrap();
        assert_eq!(partition_d1(&diag), 0.0);

        // mu(A) = 0.3, mu(A /\ B) = 0.25, mu(B) = 0.3: mu(A tri B) = 0.1,
        // identity pairing 0.1 + 0.1, swap pairing 0.9 + 0.9.
        let pm = FinitePartitionMeasure::from_joint(vec![
            vec![0.25, 0.05],
            vec![0.05, 0.65],
        ])
        .unwrap();
        assert!((partition_d1(&pm) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn partition_d1_matches_brute_force() {
        let mut rng = crate::rng::seeded(23);
        for _ in 0..50 {
            let n = 6;
            let mut joint: Vec<Vec<f64>> =
                (0..n).map(|_| (0..n).map(|_| rng.gen::<f64>()).collect()).collect();
            let total: f64 = joint.iter().flatten().sum();
            for row in joint.iter_mut() {
                for m in row.iter_mut() {
                    *m /= total;
                }
            }
            let pm = FinitePartitionMeasure::from_joint(joint).unwrap();
            let fast = partition_d1(&pm);
            let cost: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| pm.symmetric_difference(i, j)).collect())
                .collect();
            let slow = assignment::brute_force_min(&cost);
            assert!((fast - slow).abs() < 1e-12);
        }
    }

    #[test]
    fn partition_measure_validation() {
        assert!(FinitePartitionMeasure::new(
            vec![0.5, 0.5],
            vec![0.5, 0.5],
            vec![vec![0.5, 0.1], vec![0.0, 0.4]],
        )
        .is_err());
        assert!(FinitePartitionMeasure::from_joint(vec![vec![0.5, -0.1], vec![0.2, 0.4]]).is_err());
    }

    #[test]
    fn tv_dist_examples() {
        let p = dist_on(1, vec![(vec![0], 0.7), (vec![1], 0.3)]);
        assert_eq!(tv_dist(&p, &p).unwrap(), 0.0);

        let q = dist_on(1, vec![(vec![0], 0.4), (vec![1], 0.6)]);
        assert!((tv_dist(&p, &q).unwrap() - 0.6).abs() < 1e-15);

        let a = dist_on(1, vec![(vec![0], 1.0)]);
        let b = dist_on(1, vec![(vec![1], 1.0)]);
        assert_eq!(tv_dist(&a, &b).unwrap(), 2.0);

        let sub = dist_on(1, vec![(vec![0], 0.5)]);
        assert!(tv_dist(&p, &sub).is_err());
    }

    #[test]
    fn hamming_examples() {
        let a = Block::new(Shape::interval(3).unwrap(), vec![0, 1, 0]).unwrap();
        assert_eq!(hamming(&a, &a).unwrap(), 0.0);

        let b = Block::new(Shape::interval(3).unwrap(), vec![1, 0, 1]).unwrap();
        assert_eq!(hamming(&a, &b).unwrap(), 1.0);

        let c = Block::new(Shape::interval(3).unwrap(), vec![0, 1, 1]).unwrap();
        assert!((hamming(&a, &c).unwrap() - 1.0 / 3.0).abs() < 1e-15);

        let d = Block::new(Shape::interval(2).unwrap(), vec![0, 1]).unwrap();
        assert!(hamming(&a, &d).is_err());
    }

    #[test]
    fn dbar_identical_distributions() {
        let p = dist_on(2, vec![(vec![0, 1], 0.5), (vec![1, 0], 0.5)]);
        let (value, coupling) = dbar(&p, &p).unwrap();
        assert_eq!(value, 0.0);
        assert_eq!(coupling.off_diagonal_mass(), 0.0);
        assert!(coupling.marginal_gap(&p, &p) < 1e-9);
    }

    #[test]
    fn dbar_point_masses() {
        let a = Block::new(Shape::interval(4).unwrap(), vec![0, 1, 0, 1]).unwrap();
        let b = Block::new(Shape::interval(4).unwrap(), vec![0, 1, 1, 1]).unwrap();
        let (value, coupling) = dbar(
            &BlockDistribution::point_mass(&a),
            &BlockDistribution::point_mass(&b),
        )
        .unwrap();
        assert!((value - hamming(&a, &b).unwrap()).abs() < 1e-12);
        assert_eq!(coupling.entries().len(), 1);
    }

    #[test]
    fn dbar_singleton_domain() {
        let p = dist_on(1, vec![(vec![0], 0.7), (vec![1], 0.3)]);
        let q = dist_on(1, vec![(vec![0], 0.4), (vec![1], 0.6)]);
        let (value, coupling) = dbar(&p, &q).unwrap();
        assert!((value - 0.3).abs() < 1e-9);
        assert!((coupling.expected_hamming() - value).abs() < 1e-9);
        assert!(coupling.marginal_gap(&p, &q) < 1e-9);
    }

    #[test]
    fn dbar_support_cap() {
        // Fabricate two distributions whose support product exceeds the cap.
        let mut rng = crate::rng::seeded(3);
        let p = random_distribution(&mut rng, 21, 2, 1_100);
        let q = random_distribution(&mut rng, 21, 2, 1_100);
        assert!(matches!(
            dbar(&p, &q),
            Err(Error::SupportCapExceeded(_, _))
        ));
    }

    #[test]
    fn maximal_coupling_examples() {
        let p = dist_on(1, vec![(vec![0], 0.7), (vec![1], 0.3)]);
        let mc = maximal_coupling(&p, &p).unwrap();
        assert_eq!(mc.off_diagonal_mass(), 0.0);

        let a = dist_on(1, vec![(vec![0], 1.0)]);
        let b = dist_on(1, vec![(vec![1], 1.0)]);
        let mc = maximal_coupling(&a, &b).unwrap();
        assert!((mc.off_diagonal_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dbar_sandwich_bounds() {
        let mut rng = crate::rng::seeded(91);
        for _ in 0..40 {
            let p = random_distribution(&mut rng, 3, 2, 5);
            let q = random_distribution(&mut rng, 3, 2, 5);
            let (value, coupling) = dbar(&p, &q).unwrap();
            let mc = maximal_coupling(&p, &q).unwrap();
            let tv = tv_dist(&p, &q).unwrap();
            assert!((mc.off_diagonal_mass() - tv / 2.0).abs() < 1e-9);
            assert!(value <= mc.expected_hamming() + 1e-9);
            assert!(mc.expected_hamming() <= tv / 2.0 + 1e-9);
            assert!(coupling.marginal_gap(&p, &q) < 1e-9);
        }
    }

    #[test]
    fn dbar_symmetry_and_triangle() {
        let mut rng = crate::rng::seeded(129);
        for _ in 0..20 {
            let p = random_distribution(&mut rng, 4, 2, 12);
            let q = random_distribution(&mut rng, 4, 2, 12);
            let r = random_distribution(&mut rng, 4, 2, 12);
            let (pq, _) = dbar(&p, &q).unwrap();
            let (qp, _) = dbar(&q, &p).unwrap();
            assert!((pq - qp).abs() < 1e-10, "asymmetry {pq} vs {qp}");
            let (pr, _) = dbar(&p, &r).unwrap();
            let (qr, _) = dbar(&q, &r).unwrap();
            assert!(pr <= pq + qr + 1e-8, "triangle violated");
        }
    }

    #[test]
    fn coupling_serializes_as_triples() {
        let p = dist_on(1, vec![(vec![0], 1.0)]);
        let q = dist_on(1, vec![(vec![1], 1.0)]);
        let (_, coupling) = dbar(&p, &q).unwrap();
        let json = serde_json::to_string(&coupling).unwrap();
        assert_eq!(json, r#"[["0","1",1.0]]"#);
    }
}
