use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Hypergeometric};

use super::heavy_tail::HeavyTailLaw;
use super::law::{FamilyLaw, MAX_CACHED_LINEAGES};
use super::{Allocation, CanningsError, CanningsModel};
use crate::math;
use crate::profiles::GenerationSchedule;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    /// Sample labels `0..n`, sorted.
    pub members: Vec<u32>,
    /// Index of the ancestor in the current generation.
    pub ancestor: u64,
}

/// Partition of the sample into blocks with their ancestors at generation `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AncestryState {
    n: u64,
    blocks: Vec<Block>,
    generation: u64,
}

impl AncestryState {
    /// `n` singleton blocks at distinct uniform positions in a generation of size `size`.
    pub fn new<R: Rng + ?Sized>(n: u64, size: u64, rng: &mut R) -> Result<Self, CanningsError> {
        if n < 1 || n > size {
            return Err(CanningsError::SampleSize { n, size });
        }
        let ancestors = distinct_uniform(n as usize, size, None, rng);
        let blocks = ancestors
            .into_iter()
            .enumerate()
            .map(|(i, a)| Block {
                members: alloc::vec![i as u32],
                ancestor: a,
            })
            .collect();
        Ok(AncestryState {
            n,
            blocks,
            generation: 0,
        })
    }

    pub fn sample_size(&self) -> u64 {
        self.n
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block_count(&self) -> u64 {
        self.blocks.len() as u64
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Checks that blocks partition the sample and ancestors are distinct and below `size`.
    pub fn check(&self, size: u64) -> Result<(), CanningsError> {
        let mut seen = alloc::vec![false; self.n as usize];
        let mut ancestors: Vec<u64> = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            if b.ancestor >= size {
                return Err(CanningsError::State("ancestor index out of range"));
            }
            ancestors.push(b.ancestor);
            for &m in &b.members {
                if m as u64 >= self.n || core::mem::replace(&mut seen[m as usize], true) {
                    return Err(CanningsError::State("blocks do not partition the sample"));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(CanningsError::State("blocks do not cover the sample"));
        }
        ancestors.sort_unstable();
        if ancestors.windows(2).any(|w| w[0] == w[1]) {
            return Err(CanningsError::State("ancestor indices are not distinct"));
        }
        Ok(())
    }

    fn check_bound(&self, size: u64) -> Result<(), CanningsError> {
        if self.blocks.iter().any(|b| b.ancestor >= size) {
            Err(CanningsError::State("ancestor index out of range"))
        } else {
            Ok(())
        }
    }

    /// Assigns `parents[i]` to block `i`, merging blocks that share a parent.
    fn apply_parents(&mut self, parents: &[u64], events: &mut Vec<DiscreteEvent>) {
        let generation = self.generation;
        let mut order: Vec<usize> = (0..self.blocks.len()).collect();
        order.sort_by_key(|&i| (parents[i], i));
        let old = core::mem::take(&mut self.blocks);
        let mut old: Vec<Option<Block>> = old.into_iter().map(Some).collect();
        let mut blocks_now = old.len() as u64;
        let mut i = 0;
        while i < order.len() {
            let parent = parents[order[i]];
            let mut j = i + 1;
            while j < order.len() && parents[order[j]] == parent {
                j += 1;
            }
            let mut merged = old[order[i]].take().expect("each block used once");
            for &k in &order[i + 1..j] {
                merged.members.extend(old[k].take().expect("each block used once").members);
            }
            let size = (j - i) as u64;
            if size >= 2 {
                merged.members.sort_unstable();
                events.push(DiscreteEvent {
                    generation,
                    blocks_before: blocks_now,
                    merger_size: size,
                    blocks_after: blocks_now - (size - 1),
                });
                blocks_now -= size - 1;
            }
            merged.ancestor = parent;
            self.blocks.push(merged);
            i = j;
        }
        self.blocks.sort_by_key(|b| b.members[0]);
    }

    /// Merges the blocks at `chosen` into one and redraws all ancestors.
    fn merge_and_redraw<R: Rng + ?Sized>(
        &mut self,
        chosen: &[usize],
        size: u64,
        rng: &mut R,
        events: &mut Vec<DiscreteEvent>,
    ) {
        let before = self.blocks.len() as u64;
        let mut parents: Vec<u64> = alloc::vec![0; self.blocks.len()];
        let fresh = distinct_uniform(self.blocks.len(), size, None, rng);
        let mut next = 0;
        for (i, p) in parents.iter_mut().enumerate() {
            if !chosen.contains(&i) {
                *p = fresh[next];
                next += 1;
            }
        }
        let shared = fresh[next];
        for &i in chosen {
            parents[i] = shared;
        }
        self.apply_parents(&parents, events);
        debug_assert_eq!(self.blocks.len() as u64, before - (chosen.len() as u64 - 1));
    }
}

/// `count` distinct uniform values in `[0, size)`, avoiding `exclude`.
fn distinct_uniform<R: Rng + ?Sized>(count: usize, size: u64, exclude: Option<u64>, rng: &mut R) -> Vec<u64> {
    let available = size - exclude.map_or(0, |_| 1);
    assert!(count as u64 <= available, "not enough distinct values");
    let mut out: Vec<u64> = Vec::with_capacity(count);
    if (count as u64) * 2 > available {
        // dense case: partial Fisher-Yates over the candidates
        let mut pool: Vec<u64> = (0..size).filter(|&v| Some(v) != exclude).collect();
        for i in 0..count {
            let j = rng.random_range(i..pool.len());
            pool.swap(i, j);
            out.push(pool[i]);
        }
        return out;
    }
    while out.len() < count {
        let mut v = rng.random_range(0..available);
        if let Some(x) = exclude {
            if v >= x {
                v += 1;
            }
        }
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscreteEvent {
    pub generation: u64,
    pub blocks_before: u64,
    pub merger_size: u64,
    pub blocks_after: u64,
}

/// Number of growth offspring `A` given to the multiplying parent.
pub fn allocate_growth<R: Rng + ?Sized>(
    u: u64,
    d: u64,
    size: u64,
    allocation: Allocation,
    rng: &mut R,
) -> Result<u64, CanningsError> {
    if d == 0 {
        return Ok(0);
    }
    match allocation {
        Allocation::ToMultiplying => Ok(d),
        Allocation::ToNonReproducing => {
            if d > u - 1 {
                Err(CanningsError::Cap {
                    generation: None,
                    growth: d,
                    limit: u - 1,
                    scheme: allocation.name(),
                })
            } else {
                Ok(0)
            }
        }
        Allocation::Proportional => {
            let a = Binomial::new(d, (u as f64 / size as f64).min(1.0))
                .map_err(|_| CanningsError::State("invalid binomial parameters"))?
                .sample(rng);
            Ok(a.max(d.saturating_sub(u - 1)))
        }
    }
}

/// `(family size, revived parents)` after adding `d` offspring, `a` of them to the family.
pub fn family_composition(u: u64, d: u64, a: u64) -> (u64, u64) {
    (u + a, d - a)
}

/// One generation of the modified Moran model, mapping the tracked lineages
/// from generation `r - 1` (size `n_prev`) to generation `r` (size `n_r`).
pub fn step_modified_moran<R: Rng + ?Sized>(
    state: &mut AncestryState,
    law: &FamilyLaw,
    n_r: u64,
    n_prev: u64,
    allocation: Allocation,
    rng: &mut R,
    events: &mut Vec<DiscreteEvent>,
) -> Result<(), CanningsError> {
    state.check_bound(n_prev)?;
    if law.size() != n_r {
        return Err(CanningsError::State("family-size law does not match the parent generation"));
    }
    state.generation += 1;
    let u = law.sample(rng);
    let (family, pool) = if n_prev >= n_r {
        let d = n_prev - n_r;
        let a = allocate_growth(u, d, n_r, allocation, rng).map_err(|e| e.at(state.generation))?;
        (family_composition(u, d, a).0, n_prev)
    } else {
        let survivors = Hypergeometric::new(n_r, u, n_prev)
            .map_err(|_| CanningsError::State("invalid hypergeometric parameters"))?
            .sample(rng);
        (survivors, n_prev)
    };
    let b = state.blocks.len();
    let mut in_family = alloc::vec![false; b];
    let (mut fam_left, mut pool_left) = (family, pool);
    for slot in in_family.iter_mut() {
        if rng.random_range(0..pool_left) < fam_left {
            *slot = true;
            fam_left -= 1;
        }
        pool_left -= 1;
    }
    let multiplying = rng.random_range(0..n_r);
    let others = in_family.iter().filter(|f| !**f).count();
    let mut fresh = distinct_uniform(others, n_r, Some(multiplying), rng).into_iter();
    let parents: Vec<u64> = in_family
        .iter()
        .map(|&f| if f { multiplying } else { fresh.next().expect("enough parents") })
        .collect();
    state.apply_parents(&parents, events);
    Ok(())
}

/// One generation of the Schweinsberg model with potential offspring counts `counts`.
/// Returns whether the generation had a shortfall.
pub fn step_schweinsberg_with<R: Rng + ?Sized>(
    state: &mut AncestryState,
    counts: &[u64],
    n_prev: u64,
    rng: &mut R,
    events: &mut Vec<DiscreteEvent>,
) -> Result<bool, CanningsError> {
    state.check_bound(n_prev)?;
    state.generation += 1;
    let n_r = counts.len() as u64;
    let mut prefix: Vec<u128> = Vec::with_capacity(counts.len());
    let mut total: u128 = 0;
    for &x in counts {
        total += x as u128;
        prefix.push(total);
    }
    let slots = total.max(n_prev as u128);
    let b = state.blocks.len();
    let mut positions: Vec<u128> = Vec::with_capacity(b);
    while positions.len() < b {
        let p = rng.random_range(0..slots);
        if !positions.contains(&p) {
            positions.push(p);
        }
    }
    let parents: Vec<u64> = positions
        .iter()
        .map(|&p| {
            if p < total {
                prefix.partition_point(|&c| c <= p) as u64
            } else {
                rng.random_range(0..n_r)
            }
        })
        .collect();
    state.apply_parents(&parents, events);
    Ok(total < n_prev as u128)
}

pub fn step_schweinsberg<R: Rng + ?Sized>(
    state: &mut AncestryState,
    tail: &HeavyTailLaw,
    n_r: u64,
    n_prev: u64,
    rng: &mut R,
    events: &mut Vec<DiscreteEvent>,
    counts: &mut Vec<u64>,
) -> Result<bool, CanningsError> {
    counts.clear();
    counts.extend((0..n_r).map(|_| tail.sample(rng)));
    step_schweinsberg_with(state, counts, n_prev, rng, events)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    /// Run until one block remains or the schedule ends.
    Mrca,
    /// Run exactly up to this generation (capped by the schedule).
    Generation(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    pub stop: Stop,
    /// Geometric skip over constant-size generations (modified Moran only).
    pub skip_ahead: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            stop: Stop::Mrca,
            skip_ahead: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteGenealogy {
    pub events: Vec<DiscreteEvent>,
    pub state: AncestryState,
    /// Last generation simulated.
    pub generations: u64,
    /// Whether a single block was reached.
    pub complete: bool,
    pub shortfalls: u64,
}

impl DiscreteGenealogy {
    pub fn first_merger_generation(&self) -> Option<u64> {
        self.events.first().map(|e| e.generation)
    }

    /// Blocks after the step into generation `r`.
    pub fn blocks_at(&self, r: u64) -> u64 {
        self.events
            .iter()
            .take_while(|e| e.generation <= r)
            .last()
            .map_or(self.state.sample_size(), |e| e.blocks_after)
    }
}

/// Traces `n` sampled lineages back through the schedule.
pub fn simulate_genealogy<R: Rng + ?Sized>(
    model: &CanningsModel,
    n: u64,
    schedule: &GenerationSchedule,
    options: SimOptions,
    rng: &mut R,
) -> Result<DiscreteGenealogy, CanningsError> {
    let min = schedule.min_size();
    if n > min {
        return Err(CanningsError::SampleSize { n, size: min });
    }
    let last = match options.stop {
        Stop::Mrca => schedule.last_generation(),
        Stop::Generation(r) => r.min(schedule.last_generation()),
    };
    let mut state = AncestryState::new(n, schedule.size(0), rng)?;
    let mut events = Vec::new();
    let mut shortfalls = 0;
    let mut counts = Vec::new();
    let mut r = 1u64;
    let stop_at_mrca = options.stop == Stop::Mrca;
    while r <= last && !(stop_at_mrca && state.block_count() <= 1) {
        let n_r = schedule.size(r);
        let n_prev = schedule.size(r - 1);
        match model {
            CanningsModel::ModifiedMoran { book, allocation } => {
                let b = state.block_count();
                let entry = book.entry(n_r)?;
                if options.skip_ahead && n_r == n_prev && (2..=MAX_CACHED_LINEAGES).contains(&b) {
                    let run_last = schedule.run_end(r).min(last);
                    let merger = entry.merger(b);
                    match geometric_failures(merger.p_merge, rng) {
                        Some(k) if r + k <= run_last => {
                            state.generation = r + k;
                            let size = merger.sample_size(rng) as usize;
                            let chosen = choose_indices(b as usize, size, rng);
                            state.merge_and_redraw(&chosen, n_r, rng, &mut events);
                            r += k + 1;
                        }
                        _ => {
                            state.generation = run_last;
                            r = run_last + 1;
                        }
                    }
                    continue;
                }
                if b < 2 {
                    // nothing left to merge; only the generation counter moves
                    let run_last = if n_r == n_prev { schedule.run_end(r).min(last) } else { r };
                    state.generation = run_last;
                    redraw_lone(&mut state, n_r, rng);
                    r = run_last + 1;
                    continue;
                }
                step_modified_moran(&mut state, entry.law(), n_r, n_prev, *allocation, rng, &mut events)?;
            }
            CanningsModel::Schweinsberg { tail } => {
                if step_schweinsberg(&mut state, tail, n_r, n_prev, rng, &mut events, &mut counts)? {
                    shortfalls += 1;
                }
            }
        }
        r += 1;
    }
    Ok(DiscreteGenealogy {
        complete: state.block_count() == 1,
        generations: state.generation,
        events,
        state,
        shortfalls,
    })
}

fn redraw_lone<R: Rng + ?Sized>(state: &mut AncestryState, size: u64, rng: &mut R) {
    for b in &mut state.blocks {
        b.ancestor = rng.random_range(0..size);
    }
}

/// Failures before the first success of a Bernoulli(`p`) sequence; `None` if `p = 0`.
fn geometric_failures<R: Rng + ?Sized>(p: f64, rng: &mut R) -> Option<u64> {
    if !(p > 0.0) {
        return None;
    }
    if p >= 1.0 {
        return Some(0);
    }
    let v = 1.0 - rng.random::<f64>();
    let k = math::floor(math::ln(v) / math::log1p(-p));
    (k < 1.8e19).then_some(k as u64)
}

fn choose_indices<R: Rng + ?Sized>(b: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..b).collect();
    for i in 0..k {
        let j = rng.random_range(i..b);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}

#[cfg(test)]
mod tests {
    use super::super::law::{LawBook, LawSpec, OffspringLaw};
    use super::*;
    use crate::measures::LambdaMeasure;
    use crate::seed::{replicate_rng, ReplicateRng, StreamTag};
    use std::vec::Vec;

    fn rng(i: u64) -> ReplicateRng {
        replicate_rng(21, StreamTag::CANNINGS, i)
    }

    fn moran(size: u64) -> FamilyLaw {
        FamilyLaw::Plain(OffspringLaw::fixed(size, 2).unwrap())
    }

    #[test]
    fn pair_merges_with_probability_one_sixth() {
        let law = moran(4);
        let trials = 1_000_000u64;
        let mut r = rng(0);
        let mut merges = 0u64;
        let mut events = Vec::new();
        for _ in 0..trials {
            let mut s = AncestryState::new(2, 4, &mut r).unwrap();
            step_modified_moran(&mut s, &law, 4, 4, Allocation::ToNonReproducing, &mut r, &mut events).unwrap();
            if s.block_count() == 1 {
                merges += 1;
            }
        }
        let p = 1.0 / 6.0;
        let sd = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((merges as f64 / trials as f64 - p).abs() <= 3.0 * sd);
    }

    #[test]
    fn figure_one_composition() {
        let mut r = rng(1);
        assert_eq!(allocate_growth(4, 4, 6, Allocation::ToNonReproducing, &mut r).unwrap_err().scheme(), Some("to-nonrep"));
        assert_eq!(allocate_growth(4, 3, 6, Allocation::ToNonReproducing, &mut r).unwrap(), 0);
        assert_eq!(family_composition(4, 3, 1), (5, 2));
        assert_eq!(allocate_growth(4, 3, 6, Allocation::ToMultiplying, &mut r).unwrap(), 3);
        assert_eq!(allocate_growth(4, 2, 6, Allocation::ToNonReproducing, &mut r).unwrap(), 0);
        for _ in 0..1000 {
            let a = allocate_growth(2, 3, 6, Allocation::Proportional, &mut r).unwrap();
            assert!(3 - a <= 1);
        }
    }

    #[test]
    fn star_law_merges_everything() {
        let law = FamilyLaw::Plain(OffspringLaw::fixed(10, 10).unwrap());
        let mut s = AncestryState::new(5, 10, &mut rng(2)).unwrap();
        let mut events = Vec::new();
        step_modified_moran(&mut s, &law, 10, 10, Allocation::ToNonReproducing, &mut rng(3), &mut events).unwrap();
        assert_eq!(s.block_count(), 1);
        assert_eq!(events, [DiscreteEvent { generation: 1, blocks_before: 5, merger_size: 5, blocks_after: 1 }]);
        s.check(10).unwrap();
    }

    #[test]
    fn states_stay_valid_through_growth_and_shrink() {
        let law8 = FamilyLaw::Plain(OffspringLaw::from_measure(&LambdaMeasure::beta(1.0, 1.0).unwrap(), 8).unwrap());
        let law12 = FamilyLaw::Plain(OffspringLaw::from_measure(&LambdaMeasure::beta(1.0, 1.0).unwrap(), 12).unwrap());
        let mut r = rng(4);
        for alloc in [Allocation::ToMultiplying, Allocation::Proportional] {
            for _ in 0..2000 {
                let mut s = AncestryState::new(6, 12, &mut r).unwrap();
                let mut ev = Vec::new();
                step_modified_moran(&mut s, &law8, 8, 12, alloc, &mut r, &mut ev).unwrap();
                s.check(8).unwrap();
                step_modified_moran(&mut s, &law12, 12, 8, alloc, &mut r, &mut ev).unwrap();
                s.check(12).unwrap();
                let merged: u64 = ev.iter().map(|e| e.merger_size - 1).sum();
                assert_eq!(s.block_count(), 6 - merged);
            }
        }
    }

    #[test]
    fn out_of_range_ancestor_is_a_state_error() {
        let law = moran(4);
        let mut r = rng(5);
        let mut s = AncestryState::new(2, 100, &mut r).unwrap();
        s.blocks[0].ancestor = 50;
        assert_eq!(
            step_modified_moran(&mut s, &law, 4, 4, Allocation::ToMultiplying, &mut r, &mut Vec::new()),
            Err(CanningsError::State("ancestor index out of range"))
        );
    }

    #[test]
    fn parent_of_tracked_individual_is_uniform() {
        let law = FamilyLaw::Plain(OffspringLaw::from_measure(&LambdaMeasure::beta(1.5, 1.0).unwrap(), 20).unwrap());
        let mut r = rng(6);
        let trials = 100_000;
        let mut counts = [0u64; 20];
        for _ in 0..trials {
            let mut s = AncestryState::new(3, 20, &mut r).unwrap();
            step_modified_moran(&mut s, &law, 20, 20, Allocation::ToNonReproducing, &mut r, &mut Vec::new()).unwrap();
            let block = s.blocks().iter().find(|b| b.members.contains(&0)).unwrap();
            counts[block.ancestor as usize] += 1;
        }
        let expect = trials as f64 / 20.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
        // 19 degrees of freedom, 0.999 quantile
        assert!(chi2 < 43.82, "{chi2}");
    }

    #[test]
    fn unit_offspring_never_merge() {
        let mut r = rng(7);
        let mut s = AncestryState::new(10, 50, &mut r).unwrap();
        let ones = [1u64; 50];
        let mut events = Vec::new();
        for _ in 0..1000 {
            assert!(!step_schweinsberg_with(&mut s, &ones, 50, &mut r, &mut events).unwrap());
        }
        assert!(events.is_empty());
        assert_eq!(s.block_count(), 10);
        s.check(50).unwrap();
    }

    #[test]
    fn shortfall_is_filled_and_counted() {
        let mut r = rng(8);
        let mut s = AncestryState::new(4, 10, &mut r).unwrap();
        let counts = [1u64; 6];
        assert!(step_schweinsberg_with(&mut s, &counts, 10, &mut r, &mut Vec::new()).unwrap());
        assert!(s.blocks().iter().all(|b| b.ancestor < 6));
    }

    fn moran_model(size: u64) -> CanningsModel {
        CanningsModel::ModifiedMoran {
            book: LawBook::new(LawSpec::Plain(LambdaMeasure::kingman()), size, size).unwrap(),
            allocation: Allocation::ToNonReproducing,
        }
    }

    #[test]
    fn skip_ahead_mean_matches_geometric() {
        let model = moran_model(1000);
        let schedule = GenerationSchedule::constant(1000, u64::MAX / 4);
        let reps = 10_000u64;
        let total: f64 = (0..reps)
            .map(|i| {
                let g = simulate_genealogy(&model, 2, &schedule, SimOptions::default(), &mut rng(100 + i)).unwrap();
                assert!(g.complete);
                g.first_merger_generation().unwrap() as f64
            })
            .sum();
        let mean = total / reps as f64;
        assert!((mean / 499_500.0 - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn skip_ahead_agrees_with_naive_stepping() {
        let model = CanningsModel::ModifiedMoran {
            book: LawBook::new(LawSpec::Plain(LambdaMeasure::beta(1.0, 1.0).unwrap()), 30, 30).unwrap(),
            allocation: Allocation::ToNonReproducing,
        };
        let schedule = GenerationSchedule::constant(30, 1_000_000);
        let reps = 10_000u64;
        let run = |skip: bool, offset: u64| -> Vec<f64> {
            let mut v: Vec<f64> = (0..reps)
                .map(|i| {
                    let opts = SimOptions { stop: Stop::Mrca, skip_ahead: skip };
                    let g = simulate_genealogy(&model, 4, &schedule, opts, &mut rng(offset + i)).unwrap();
                    g.state.generation() as f64
                })
                .collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let a = run(true, 1_000_000);
        let b = run(false, 2_000_000);
        let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
        while i < a.len() && j < b.len() {
            let x = a[i].min(b[j]);
            while i < a.len() && a[i] <= x {
                i += 1;
            }
            while j < b.len() && b[j] <= x {
                j += 1;
            }
            d = d.max((i as f64 - j as f64).abs() / reps as f64);
        }
        assert!(d <= 0.02, "{d}");
    }

    #[test]
    fn star_model_merges_in_first_generation() {
        let model = CanningsModel::ModifiedMoran {
            book: LawBook::new(LawSpec::Plain(LambdaMeasure::dirac(1.0).unwrap()), 40, 40).unwrap(),
            allocation: Allocation::ToNonReproducing,
        };
        let schedule = GenerationSchedule::constant(40, 100);
        for skip in [true, false] {
            let opts = SimOptions { stop: Stop::Mrca, skip_ahead: skip };
            let g = simulate_genealogy(&model, 5, &schedule, opts, &mut rng(9)).unwrap();
            assert_eq!(g.events.len(), 1);
            assert_eq!((g.events[0].generation, g.events[0].merger_size), (1, 5));
        }
    }

    #[test]
    fn horizon_before_mrca_is_flagged() {
        let model = moran_model(1000);
        let schedule = GenerationSchedule::constant(1000, 10);
        let g = simulate_genealogy(&model, 2, &schedule, SimOptions::default(), &mut rng(10)).unwrap();
        assert!(!g.complete);
        assert_eq!(g.generations, 10);
    }

    #[test]
    fn identical_seeds_identical_runs() {
        let model = moran_model(200);
        let schedule = GenerationSchedule::constant(200, 1_000_000);
        let a = simulate_genealogy(&model, 6, &schedule, SimOptions::default(), &mut rng(11)).unwrap();
        let b = simulate_genealogy(&model, 6, &schedule, SimOptions::default(), &mut rng(11)).unwrap();
        assert_eq!(a, b);
    }
}
