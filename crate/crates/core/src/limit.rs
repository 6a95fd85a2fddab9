//! Sampling the time-changed Λ-coalescent `Π_{G(t)}`.
//!
//! The chain runs on the internal clock `τ`, where waiting times are plain
//! exponentials, and each event time is mapped back through `G⁻¹`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use crate::math;
use crate::measures::{LambdaMeasure, MeasureError};
use crate::profiles::TimeChange;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LimitError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("sample size must be at least 2, got {0}")]
    SampleSize(u64),
    #[error("genealogy is incomplete: the clock stops before the most recent common ancestor")]
    Incomplete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub time: f64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoalescentEvent {
    pub time: f64,
    pub blocks_before: u64,
    pub merger_size: u64,
    pub blocks_after: u64,
    /// Node created by the merger.
    pub node: usize,
}

/// Nodes `0..n` are the leaves; every event appends one internal node.
#[derive(Debug, Clone, PartialEq)]
pub struct Genealogy {
    sample_size: u64,
    nodes: Vec<Node>,
    events: Vec<CoalescentEvent>,
    /// Mutations on the branch above each node.
    mutations: Option<Vec<u64>>,
}

impl Genealogy {
    fn new(n: u64) -> Self {
        let nodes = (0..n)
            .map(|_| Node {
                time: 0.0,
                parent: None,
                children: Vec::new(),
            })
            .collect();
        Genealogy {
            sample_size: n,
            nodes,
            events: Vec::new(),
            mutations: None,
        }
    }

    fn merge(&mut self, time: f64, blocks: &[usize], blocks_before: u64) {
        let id = self.nodes.len();
        for &c in blocks {
            self.nodes[c].parent = Some(id);
        }
        self.nodes.push(Node {
            time,
            parent: None,
            children: blocks.to_vec(),
        });
        let k = blocks.len() as u64;
        self.events.push(CoalescentEvent {
            time,
            blocks_before,
            merger_size: k,
            blocks_after: blocks_before - (k - 1),
            node: id,
        });
    }

    pub fn sample_size(&self) -> u64 {
        self.sample_size
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn events(&self) -> &[CoalescentEvent] {
        &self.events
    }

    pub fn is_complete(&self) -> bool {
        self.events.last().is_some_and(|e| e.blocks_after == 1)
    }

    pub fn tmrca(&self) -> Option<f64> {
        self.is_complete().then(|| self.events.last().map_or(0.0, |e| e.time))
    }

    /// Time of the first merger.
    pub fn first_event_time(&self) -> Option<f64> {
        self.events.first().map(|e| e.time)
    }

    /// Number of blocks at time `t`.
    pub fn blocks_at(&self, t: f64) -> u64 {
        self.events
            .iter()
            .take_while(|e| e.time <= t)
            .last()
            .map_or(self.sample_size, |e| e.blocks_after)
    }

    /// Sum of branch lengths of the complete tree.
    pub fn total_branch_length(&self) -> f64 {
        math::compensated(
            self.nodes
                .iter()
                .filter_map(|n| n.parent.map(|p| self.nodes[p].time - n.time)),
        )
    }

    pub fn mutations(&self) -> Option<&[u64]> {
        self.mutations.as_deref()
    }

    pub fn total_mutations(&self) -> u64 {
        self.mutations.as_ref().map_or(0, |m| m.iter().sum())
    }

    /// Newick string with leaves `1..n` and branch lengths in coalescent units.
    pub fn to_newick(&self) -> Result<String, LimitError> {
        if !self.is_complete() {
            return Err(LimitError::Incomplete);
        }
        let root = self.nodes.len() - 1;
        let mut min_leaf = alloc::vec![usize::MAX; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            min_leaf[i] = if node.children.is_empty() {
                i
            } else {
                node.children.iter().map(|&c| min_leaf[c]).min().unwrap_or(usize::MAX)
            };
        }
        let mut out = String::new();
        self.write_newick(root, &min_leaf, &mut out);
        out.push(';');
        Ok(out)
    }

    fn write_newick(&self, id: usize, min_leaf: &[usize], out: &mut String) {
        let node = &self.nodes[id];
        if node.children.is_empty() {
            let _ = write!(out, "{}", id + 1);
        } else {
            let mut children = node.children.clone();
            children.sort_by_key(|&c| min_leaf[c]);
            out.push('(');
            for (i, &c) in children.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                self.write_newick(c, min_leaf, out);
            }
            out.push(')');
        }
        if let Some(p) = node.parent {
            let _ = write!(out, ":{}", self.nodes[p].time - node.time);
        }
    }
}

/// Simulator for a fixed measure, sample size and clock.
#[derive(Debug, Clone)]
pub struct LimitSimulator {
    n: u64,
    tc: TimeChange,
    /// `λ_b` indexed by `b`.
    totals: Vec<f64>,
    /// Cumulative first-jump laws indexed by `b`; entry `k - 2` is `P(K <= k)`.
    cumulative: Vec<Vec<f64>>,
}

impl LimitSimulator {
    pub fn new(measure: &LambdaMeasure, n: u64, tc: TimeChange) -> Result<Self, LimitError> {
        measure.require_probability()?;
        if n < 2 {
            return Err(LimitError::SampleSize(n));
        }
        let mut totals = alloc::vec![0.0; n as usize + 1];
        let mut cumulative = alloc::vec![Vec::new(); n as usize + 1];
        for b in 2..=n {
            totals[b as usize] = measure.total_rate(b)?;
            let law = measure.first_jump_law(b)?;
            let mut acc = 0.0;
            cumulative[b as usize] = law
                .probs()
                .iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect();
        }
        Ok(LimitSimulator {
            n,
            tc,
            totals,
            cumulative,
        })
    }

    pub fn sample_size(&self) -> u64 {
        self.n
    }

    pub fn time_change(&self) -> &TimeChange {
        &self.tc
    }

    /// `λ_b`.
    pub fn total_rate(&self, b: u64) -> f64 {
        self.totals[b as usize]
    }

    fn merger_size<R: Rng + ?Sized>(&self, b: u64, rng: &mut R) -> u64 {
        let cdf = &self.cumulative[b as usize];
        let u: f64 = rng.random::<f64>() * cdf[cdf.len() - 1];
        let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        idx as u64 + 2
    }

    /// One genealogy down to the most recent common ancestor. If the clock is
    /// bounded and never reaches the next event, the genealogy is returned
    /// incomplete.
    pub fn simulate<R: Rng + ?Sized>(&self, rng: &mut R) -> Genealogy {
        let mut g = Genealogy::new(self.n);
        let mut active: Vec<usize> = (0..self.n as usize).collect();
        let mut tau = 0.0;
        let mut b = self.n;
        while b >= 2 {
            let e: f64 = Exp1.sample(rng);
            tau += e / self.totals[b as usize];
            let Ok(t) = self.tc.invert(tau) else { break };
            let k = self.merger_size(b, rng) as usize;
            for i in 0..k {
                let j = rng.random_range(i..active.len());
                active.swap(i, j);
            }
            let chosen: Vec<usize> = active.drain(..k).collect();
            g.merge(t, &chosen, b);
            active.push(g.nodes.len() - 1);
            b -= k as u64 - 1;
        }
        g
    }
}

/// `P(T <= t)` for the wait after time `t0` with `b` blocks at total rate `λ_b`.
pub fn waiting_time_cdf(lambda_b: f64, tc: &TimeChange, t0: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    -math::expm1(-lambda_b * (tc.eval(t0 + t) - tc.eval(t0)))
}

/// Gompertz waiting time under `ν(t) = exp(-ρt)` by CDF inversion.
///
/// Returns `f64::INFINITY` when the bounded clock never reaches the event.
pub fn sample_gompertz_event<R: Rng + ?Sized>(
    lambda_b: f64,
    rho: f64,
    gamma: f64,
    t0: f64,
    rng: &mut R,
) -> f64 {
    let e: f64 = Exp1.sample(rng);
    gompertz_quantile(lambda_b, rho * gamma, t0, e)
}

/// Waiting time whose internal-clock increment is `e / λ_b`.
pub fn gompertz_quantile(lambda_b: f64, shape: f64, t0: f64, e: f64) -> f64 {
    if shape == 0.0 {
        return e / lambda_b;
    }
    let arg = shape * e * math::exp(-shape * t0) / lambda_b;
    if arg <= -1.0 {
        return f64::INFINITY;
    }
    math::log1p(arg) / shape
}

/// Adds `Poisson(θ ℓ)` mutations to every branch of length `ℓ`.
pub fn drop_mutations<R: Rng + ?Sized>(g: &mut Genealogy, theta: f64, rng: &mut R) {
    let counts = (0..g.nodes.len())
        .map(|i| {
            let Some(p) = g.nodes[i].parent else { return 0 };
            let mean = theta * (g.nodes[p].time - g.nodes[i].time);
            if mean > 0.0 {
                Poisson::new(mean).map_or(0, |d| d.sample(rng) as u64)
            } else {
                0
            }
        })
        .collect();
    g.mutations = Some(counts);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick;
    use crate::profiles::SizeProfile;
    use crate::seed::{replicate_rng, StreamTag};
    use std::vec::Vec;

    fn identity() -> TimeChange {
        TimeChange::identity()
    }

    fn exp_clock(rho: f64, gamma: f64) -> TimeChange {
        TimeChange::new(SizeProfile::exponential(rho).unwrap(), gamma).unwrap()
    }

    /// One-sample KS distance, computed directly for the oracle.
    fn ks(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn kingman_pair_single_event() {
        let sim = LimitSimulator::new(&LambdaMeasure::kingman(), 2, identity()).unwrap();
        let g = sim.simulate(&mut replicate_rng(1, StreamTag::LIMIT, 0));
        assert_eq!(g.events().len(), 1);
        assert!(g.is_complete());
        let e = g.events()[0];
        assert_eq!((e.blocks_before, e.merger_size, e.blocks_after), (2, 2, 1));
    }

    #[test]
    fn star_coalescent_merges_everything_once() {
        let sim = LimitSimulator::new(&LambdaMeasure::dirac(1.0).unwrap(), 6, exp_clock(0.5, 1.0)).unwrap();
        for rep in 0..20 {
            let g = sim.simulate(&mut replicate_rng(3, StreamTag::LIMIT, rep));
            assert_eq!(g.events().len(), 1);
            assert_eq!(g.events()[0].merger_size, 6);
        }
    }

    #[test]
    fn rejects_non_probability_measures() {
        let heavy = LambdaMeasure::new(alloc::vec![(crate::measures::Component::PointMass { location: 0.5 }, 2.0)]).unwrap();
        assert!(matches!(
            LimitSimulator::new(&heavy, 3, identity()),
            Err(LimitError::Measure(MeasureError::NotNormalized(_)))
        ));
    }

    #[test]
    fn waiting_time_examples() {
        assert_eq!(waiting_time_cdf(3.0, &exp_clock(1.0, 2.0), 0.4, 0.0), 0.0);
        assert!((waiting_time_cdf(1.0, &identity(), 0.0, core::f64::consts::LN_2) - 0.5).abs() < 1e-15);
        let t = (1.0 + 2.0 * core::f64::consts::LN_2).ln() / 2.0;
        assert!((t - 0.434871).abs() < 1e-6);
        assert!((waiting_time_cdf(1.0, &exp_clock(1.0, 2.0), 0.0, t) - 0.5).abs() < 1e-14);
        let tc = exp_clock(0.5, 1.5);
        let mut last = 0.0;
        for i in 1..200 {
            let f = waiting_time_cdf(2.0, &tc, 0.3, i as f64 * 0.05);
            assert!(f >= last);
            last = f;
        }
        assert!(last > 0.999_999);
    }

    #[test]
    fn gompertz_examples() {
        let median = gompertz_quantile(1.0, 0.75, 0.0, core::f64::consts::LN_2);
        assert!((median - 0.558158).abs() < 1e-6);
        assert_eq!(gompertz_quantile(1.0, 0.0, 0.0, 0.7), 0.7);
        assert_eq!(gompertz_quantile(1.0, -1.0, 0.0, 2.0), f64::INFINITY);
        // inversion agrees with the analytic CDF at t0 > 0
        let tc = exp_clock(0.5, 1.5);
        let t = gompertz_quantile(1.3, 0.75, 0.4, 0.9);
        assert!((waiting_time_cdf(1.3, &tc, 0.4, t) - (1.0 - (-0.9f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn dirac_pair_times_match_analytic_cdf() {
        let tc = exp_clock(0.5, 1.5);
        let measure = LambdaMeasure::dirac(0.3).unwrap();
        let sim = LimitSimulator::new(&measure, 2, tc.clone()).unwrap();
        let times: Vec<f64> = (0..10_000)
            .map(|r| sim.simulate(&mut replicate_rng(11, StreamTag::LIMIT, r)).first_event_time().unwrap())
            .collect();
        let lambda2 = measure.total_rate(2).unwrap();
        assert!(ks(times, |t| waiting_time_cdf(lambda2, &tc, 0.0, t)) <= 0.02);
    }

    #[test]
    fn gompertz_and_internal_clock_agree() {
        let sim = LimitSimulator::new(&LambdaMeasure::kingman(), 2, exp_clock(0.5, 1.5)).unwrap();
        let mut a: Vec<f64> = (0..10_000)
            .map(|r| sim.simulate(&mut replicate_rng(5, StreamTag::LIMIT, r)).first_event_time().unwrap())
            .collect();
        let mut b: Vec<f64> = (0..10_000)
            .map(|r| sample_gompertz_event(1.0, 0.5, 1.5, 0.0, &mut replicate_rng(5, StreamTag::REFERENCE, r)))
            .collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (mut i, mut j, mut d) = (0, 0, 0.0f64);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        assert!(d <= 0.02, "{d}");
    }

    #[test]
    fn constant_profile_first_jump_frequencies() {
        let measure = LambdaMeasure::beta(1.0, 1.0).unwrap();
        let tc = TimeChange::new(SizeProfile::constant(1.0).unwrap(), 1.3).unwrap();
        let sim = LimitSimulator::new(&measure, 6, tc).unwrap();
        let reps = 100_000;
        let mut counts = [0u64; 7];
        for r in 0..reps {
            let g = sim.simulate(&mut replicate_rng(9, StreamTag::LIMIT, r));
            counts[g.events()[0].merger_size as usize] += 1;
        }
        let law = measure.first_jump_law(6).unwrap();
        let tv: f64 = (2..=6).map(|k| (counts[k] as f64 / reps as f64 - law.prob(k as u64)).abs()).sum::<f64>() / 2.0;
        assert!(tv <= 0.01, "{tv}");
    }

    #[test]
    fn block_counts_decrease_and_branch_length_adds_up() {
        let sim = LimitSimulator::new(&LambdaMeasure::beta(1.5, 1.0).unwrap(), 10, exp_clock(1.0, 0.5)).unwrap();
        for r in 0..50 {
            let g = sim.simulate(&mut replicate_rng(2, StreamTag::LIMIT, r));
            assert!(g.is_complete());
            let mut prev_time = 0.0;
            let mut prev_blocks = 10;
            let mut by_intervals = 0.0;
            for e in g.events() {
                assert!(e.time > prev_time);
                assert_eq!(e.blocks_before, prev_blocks);
                assert!(e.merger_size >= 2 && e.merger_size <= e.blocks_before);
                assert_eq!(e.blocks_after, e.blocks_before - (e.merger_size - 1));
                by_intervals += (e.time - prev_time) * e.blocks_before as f64;
                prev_time = e.time;
                prev_blocks = e.blocks_after;
            }
            assert_eq!(prev_blocks, 1);
            assert!((g.total_branch_length() - by_intervals).abs() < 1e-12 * by_intervals.max(1.0));
        }
    }

    #[test]
    fn identical_seeds_identical_genealogies() {
        let sim = LimitSimulator::new(&LambdaMeasure::beta(1.0, 1.0).unwrap(), 8, identity()).unwrap();
        let a = sim.simulate(&mut replicate_rng(4, StreamTag::LIMIT, 2));
        let b = sim.simulate(&mut replicate_rng(4, StreamTag::LIMIT, 2));
        assert_eq!(a, b);
    }

    #[test]
    fn bounded_clock_gives_incomplete_genealogy() {
        // ν grows backward with ργ = 1, so G never exceeds 1
        let sim = LimitSimulator::new(&LambdaMeasure::kingman(), 30, exp_clock(-1.0, 1.0)).unwrap();
        let g = sim.simulate(&mut replicate_rng(6, StreamTag::LIMIT, 0));
        assert!(!g.is_complete());
        assert_eq!(g.to_newick(), Err(LimitError::Incomplete));
    }

    #[test]
    fn mutation_counts() {
        let sim = LimitSimulator::new(&LambdaMeasure::kingman(), 2, identity()).unwrap();
        let mut g = sim.simulate(&mut replicate_rng(8, StreamTag::LIMIT, 0));
        drop_mutations(&mut g, 0.0, &mut replicate_rng(8, StreamTag::MUTATIONS, 0));
        assert_eq!(g.total_mutations(), 0);

        let reps = 100_000u64;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for r in 0..reps {
            let mut g = sim.simulate(&mut replicate_rng(8, StreamTag::LIMIT, r));
            drop_mutations(&mut g, 1.0, &mut replicate_rng(8, StreamTag::MUTATIONS, r));
            let m = g.total_mutations() as f64;
            sum += m;
            sum_sq += m * m;
        }
        let mean = sum / reps as f64;
        let se = ((sum_sq / reps as f64 - mean * mean) / reps as f64).sqrt();
        assert!((mean - 2.0).abs() <= 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn newick_examples() {
        let mut pair = Genealogy::new(2);
        pair.merge(0.5, &[0, 1], 2);
        assert_eq!(pair.to_newick().unwrap(), "(1:0.5,2:0.5);");
        let mut star = Genealogy::new(3);
        star.merge(0.25, &[2, 0, 1], 3);
        assert_eq!(star.to_newick().unwrap(), "(1:0.25,2:0.25,3:0.25);");
        let mut nested = Genealogy::new(3);
        nested.merge(0.1, &[2, 1], 3);
        nested.merge(0.4, &[3, 0], 2);
        assert_eq!(nested.to_newick().unwrap(), "(1:0.4,(2:0.1,3:0.1):0.30000000000000004);");
    }

    #[test]
    fn newick_round_trip_reproduces_event_times() {
        let sim = LimitSimulator::new(&LambdaMeasure::beta(1.2, 1.0).unwrap(), 12, exp_clock(0.7, 1.4)).unwrap();
        for r in 0..100 {
            let g = sim.simulate(&mut replicate_rng(12, StreamTag::LIMIT, r));
            let tree = newick::parse_newick(&g.to_newick().unwrap()).unwrap();
            let mut heights = tree.internal_heights();
            heights.sort_by(f64::total_cmp);
            let times: Vec<f64> = g.events().iter().map(|e| e.time).collect();
            assert_eq!(heights.len(), times.len());
            for (h, t) in heights.iter().zip(&times) {
                assert!((h - t).abs() <= 1e-9, "{h} vs {t}");
            }
            assert_eq!(tree.leaf_count(), 12);
        }
    }
}
