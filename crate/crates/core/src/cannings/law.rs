use alloc::boxed::Box;
use alloc::vec::Vec;

use once_cell::race::OnceBox;
use rand::Rng;

use super::CanningsError;
use crate::math;
use crate::measures::LambdaMeasure;

/// Probabilities below this are dropped from the tails of a family-size law.
const TAIL_CUTOFF: f64 = 1e-20;

/// Law of the family size `U` of the multiplying parent in a population of size `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct OffspringLaw {
    size: u64,
    /// Smallest `j` in the stored support.
    start: u64,
    pmf: Vec<f64>,
    cdf: Vec<f64>,
    falling2: f64,
    mean: f64,
}

impl OffspringLaw {
    /// `P(U'_N = j) ∝ C(N,j) λ_{N,j}` for `j = 2..=N`.
    pub fn from_measure(measure: &LambdaMeasure, size: u64) -> Result<Self, CanningsError> {
        measure.require_probability()?;
        if size < 3 {
            return Err(CanningsError::Size(size));
        }
        let lw = measure.ln_merger_weights(size)?;
        let lse = math::log_sum_exp(&lw);
        if lse == f64::NEG_INFINITY {
            return Err(CanningsError::Degenerate(size));
        }
        let pmf = lw.into_iter().map(|w| math::exp(w - lse)).collect();
        Self::from_pmf(size, 2, pmf)
    }

    /// `U ≡ u`.
    pub fn fixed(size: u64, u: u64) -> Result<Self, CanningsError> {
        Self::from_pmf(size, u, alloc::vec![1.0])
    }

    /// Law with `P(U = start + i) ∝ weights[i]`.
    pub fn from_pmf(size: u64, start: u64, weights: Vec<f64>) -> Result<Self, CanningsError> {
        if size < 2 {
            return Err(CanningsError::Size(size));
        }
        if start < 2 || start + weights.len() as u64 - 1 > size || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(CanningsError::Support(size));
        }
        let peak = weights.iter().copied().fold(0.0, f64::max);
        if !(peak > 0.0) {
            return Err(CanningsError::Degenerate(size));
        }
        let keep = |w: &f64| *w > TAIL_CUTOFF * peak;
        let first = weights.iter().position(keep).unwrap_or(0);
        let last = weights.iter().rposition(keep).unwrap_or(0);
        let total = math::compensated(weights[first..=last].iter().copied());
        let pmf: Vec<f64> = weights[first..=last].iter().map(|w| w / total).collect();
        let start = start + first as u64;
        let mut acc = math::CompensatedSum::default();
        let cdf = pmf
            .iter()
            .map(|p| {
                acc.add(*p);
                acc.value()
            })
            .collect();
        let mut law = OffspringLaw {
            size,
            start,
            pmf,
            cdf,
            falling2: 0.0,
            mean: 0.0,
        };
        law.mean = law.factorial_moment(1);
        law.falling2 = law.factorial_moment(2);
        Ok(law)
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn min_support(&self) -> u64 {
        self.start
    }

    pub fn max_support(&self) -> u64 {
        self.start + self.pmf.len() as u64 - 1
    }

    pub fn pmf(&self, j: u64) -> f64 {
        if j < self.start {
            return 0.0;
        }
        self.pmf.get((j - self.start) as usize).copied().unwrap_or(0.0)
    }

    /// `(j, P(U = j))` over the stored support.
    pub fn atoms(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.pmf.iter().enumerate().map(move |(i, &p)| (self.start + i as u64, p))
    }

    /// `E((U)_k)`.
    pub fn factorial_moment(&self, k: u32) -> f64 {
        math::compensated(self.atoms().map(|(j, p)| p * math::falling(j as f64, k)))
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `E((U)_2) / (N)_2`.
    pub fn coalescence_prob(&self) -> f64 {
        self.falling2 / math::falling(self.size as f64, 2)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u = rng.random::<f64>() * self.cdf[self.cdf.len() - 1];
        let i = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        self.start + i as u64
    }
}

/// `U = U'` with probability `p_active = λ_N N^(-γ)`, otherwise `U = 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThinnedLaw {
    base: OffspringLaw,
    lambda: f64,
    gamma: f64,
    p_active: f64,
}

impl ThinnedLaw {
    pub fn new(measure: &LambdaMeasure, size: u64, gamma: f64) -> Result<Self, CanningsError> {
        if !(gamma > 1.0 && gamma < 2.0) {
            return Err(CanningsError::Gamma(gamma));
        }
        let base = OffspringLaw::from_measure(measure, size)?;
        let lambda = measure.total_rate(size)?;
        let p_active = lambda * math::pow(size as f64, -gamma);
        if !(p_active > 0.0 && p_active <= 1.0) {
            return Err(CanningsError::Thinning { size, p_active });
        }
        Ok(ThinnedLaw {
            base,
            lambda,
            gamma,
            p_active,
        })
    }

    pub fn base(&self) -> &OffspringLaw {
        &self.base
    }

    pub fn p_active(&self) -> f64 {
        self.p_active
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `λ_N` of the underlying measure.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `p_active / λ_N + (1 - p_active) · 2 / (N (N-1))`.
    pub fn coalescence_prob(&self) -> f64 {
        let n = self.base.size as f64;
        self.p_active / self.lambda + (1.0 - self.p_active) * 2.0 / (n * (n - 1.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyLaw {
    Plain(OffspringLaw),
    Thinned(ThinnedLaw),
}

impl FamilyLaw {
    pub fn size(&self) -> u64 {
        match self {
            FamilyLaw::Plain(l) => l.size,
            FamilyLaw::Thinned(t) => t.base.size,
        }
    }

    pub fn min_support(&self) -> u64 {
        match self {
            FamilyLaw::Plain(l) => l.min_support(),
            FamilyLaw::Thinned(t) => t.base.min_support().min(2),
        }
    }

    /// Calls `f(u, w)` for weighted atoms whose weights sum to one; `u` may repeat.
    pub fn for_each_atom(&self, mut f: impl FnMut(u64, f64)) {
        match self {
            FamilyLaw::Plain(l) => l.atoms().for_each(|(u, p)| f(u, p)),
            FamilyLaw::Thinned(t) => {
                t.base.atoms().for_each(|(u, p)| f(u, t.p_active * p));
                f(2, 1.0 - t.p_active);
            }
        }
    }

    pub fn factorial_moment(&self, k: u32) -> f64 {
        match self {
            FamilyLaw::Plain(l) => l.factorial_moment(k),
            FamilyLaw::Thinned(t) => {
                t.p_active * t.base.factorial_moment(k) + (1.0 - t.p_active) * math::falling(2.0, k)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.factorial_moment(1)
    }

    pub fn coalescence_prob(&self) -> f64 {
        match self {
            FamilyLaw::Plain(l) => l.coalescence_prob(),
            FamilyLaw::Thinned(t) => t.coalescence_prob(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            FamilyLaw::Plain(l) => l.sample(rng),
            FamilyLaw::Thinned(t) => {
                if rng.random::<f64>() < t.p_active {
                    t.base.sample(rng)
                } else {
                    2
                }
            }
        }
    }
}

/// Law of a merger among `b` tracked lineages in one generation at constant size.
#[derive(Debug, Clone, PartialEq)]
pub struct MergerLaw {
    /// `P(J >= 2)`.
    pub p_merge: f64,
    /// `P(J <= j | J >= 2)` for `j = 2..=b`.
    pub conditional_cdf: Vec<f64>,
}

/// `P(J = j)` with `J ~ Hypergeometric(N, u, b)`, as a product of ratios.
pub(crate) fn hypergeometric(size: u64, u: u64, b: u64, j: u64) -> f64 {
    if j > u || b - j > size - u {
        return 0.0;
    }
    let (nf, uf) = (size as f64, u as f64);
    let mut p = math::choose(b, j);
    for i in 0..j {
        p *= (uf - i as f64) / (nf - i as f64);
    }
    for i in 0..b - j {
        p *= (nf - uf - i as f64) / (nf - (j + i) as f64);
    }
    p
}

impl MergerLaw {
    pub fn new(law: &FamilyLaw, b: u64) -> Self {
        let size = law.size();
        if b == 2 {
            return MergerLaw {
                p_merge: law.coalescence_prob(),
                conditional_cdf: alloc::vec![1.0],
            };
        }
        let mut by_size = alloc::vec![math::CompensatedSum::default(); b as usize + 1];
        law.for_each_atom(|u, w| {
            for (j, acc) in by_size.iter_mut().enumerate().skip(2) {
                acc.add(w * hypergeometric(size, u, b, j as u64));
            }
        });
        let probs: Vec<f64> = by_size.iter().skip(2).map(|a| a.value()).collect();
        let p_merge = math::compensated(probs.iter().copied());
        let mut acc = 0.0;
        let conditional_cdf = probs
            .iter()
            .map(|p| {
                acc += p / p_merge;
                acc
            })
            .collect();
        MergerLaw {
            p_merge,
            conditional_cdf,
        }
    }

    /// Merger size given that a merger happens.
    pub fn sample_size<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let cdf = &self.conditional_cdf;
        let u = rng.random::<f64>() * cdf[cdf.len() - 1];
        cdf.partition_point(|&c| c <= u).min(cdf.len() - 1) as u64 + 2
    }
}

/// How to build the family-size law at each population size.
#[derive(Debug, Clone, PartialEq)]
pub enum LawSpec {
    Plain(LambdaMeasure),
    Thinned { measure: LambdaMeasure, gamma: f64 },
}

impl LawSpec {
    pub fn build(&self, size: u64) -> Result<FamilyLaw, CanningsError> {
        match self {
            LawSpec::Plain(m) => OffspringLaw::from_measure(m, size).map(FamilyLaw::Plain),
            LawSpec::Thinned { measure, gamma } => ThinnedLaw::new(measure, size, *gamma).map(FamilyLaw::Thinned),
        }
    }
}

/// Largest number of tracked lineages for which merger laws are cached.
pub const MAX_CACHED_LINEAGES: u64 = 64;

pub struct SizeEntry {
    law: FamilyLaw,
    mergers: Vec<OnceBox<MergerLaw>>,
}

impl SizeEntry {
    pub fn law(&self) -> &FamilyLaw {
        &self.law
    }

    /// Cached merger law for `2 <= b <= MAX_CACHED_LINEAGES`.
    pub fn merger(&self, b: u64) -> &MergerLaw {
        self.mergers[b as usize].get_or_init(|| Box::new(MergerLaw::new(&self.law, b)))
    }
}

impl core::fmt::Debug for SizeEntry {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SizeEntry").field("law", &self.law).finish_non_exhaustive()
    }
}

/// Family-size laws for every size in `lo..=hi`, built on first use and
/// shared between threads.
pub struct LawBook {
    spec: LawSpec,
    lo: u64,
    slots: Vec<OnceBox<SizeEntry>>,
}

impl core::fmt::Debug for LawBook {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("LawBook")
            .field("spec", &self.spec)
            .field("lo", &self.lo)
            .field("hi", &(self.lo + self.slots.len() as u64 - 1))
            .finish()
    }
}

impl LawBook {
    /// Validates the laws at both ends of the range.
    pub fn new(spec: LawSpec, lo: u64, hi: u64) -> Result<Self, CanningsError> {
        let (lo, hi) = (lo.min(hi), lo.max(hi));
        let book = LawBook {
            spec,
            lo,
            slots: (lo..=hi).map(|_| OnceBox::new()).collect(),
        };
        book.entry(lo)?;
        book.entry(hi)?;
        Ok(book)
    }

    pub fn spec(&self) -> &LawSpec {
        &self.spec
    }

    pub fn range(&self) -> (u64, u64) {
        (self.lo, self.lo + self.slots.len() as u64 - 1)
    }

    pub fn entry(&self, size: u64) -> Result<&SizeEntry, CanningsError> {
        let (lo, hi) = self.range();
        if size < lo || size > hi {
            return Err(CanningsError::OutOfRange { size, lo, hi });
        }
        self.slots[(size - lo) as usize].get_or_try_init(|| {
            let law = self.spec.build(size)?;
            Ok(Box::new(SizeEntry {
                law,
                mergers: (0..=MAX_CACHED_LINEAGES).map(|_| OnceBox::new()).collect(),
            }))
        })
    }

    pub fn law(&self, size: u64) -> Result<&FamilyLaw, CanningsError> {
        self.entry(size).map(SizeEntry::law)
    }
}
