//! Cannings models with fluctuating size: the modified Moran model (plain or
//! thinned, three growth-allocation schemes) and the Schweinsberg model.
//!
//! Generation `r` has `N_r` individuals and is the parent generation of
//! `r - 1`; `d = N_{r-1} - N_r` offspring are added (`d > 0`) or removed by
//! uniform downsampling (`d < 0`) relative to a fixed-size step at `N_r`.

mod heavy_tail;
mod law;
mod tracker;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

pub use heavy_tail::HeavyTailLaw;
pub(crate) use law::hypergeometric;
pub use law::{
    FamilyLaw, LawBook, LawSpec, MergerLaw, OffspringLaw, SizeEntry, ThinnedLaw, MAX_CACHED_LINEAGES,
};
pub use tracker::{
    allocate_growth, family_composition, simulate_genealogy, step_modified_moran, step_schweinsberg,
    step_schweinsberg_with, AncestryState, Block, DiscreteEvent, DiscreteGenealogy, SimOptions, Stop,
};

use crate::math;
use crate::measures::{parse_measure, LambdaMeasure, LiteralError, MeasureError};
use crate::profiles::GrowthCaps;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CanningsError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("population size must be at least 3, got {0}")]
    Size(u64),
    #[error("family-size support does not fit in 2..={0}")]
    Support(u64),
    #[error("family-size law at N = {0} has no mass")]
    Degenerate(u64),
    #[error("thinning exponent must lie in (1, 2), got {0}")]
    Gamma(f64),
    #[error("thinning probability λ_N N^(-γ) = {p_active} at N = {size} is not in (0, 1]")]
    Thinning { size: u64, p_active: f64 },
    #[error("heavy tail needs 1 <= alpha < 2 and C >= 1, got alpha={alpha}, C={c}")]
    Tail { alpha: f64, c: f64 },
    #[error("population size {size} outside the prepared range {lo}..={hi}")]
    OutOfRange { size: u64, lo: u64, hi: u64 },
    #[error("growth of {growth} exceeds the {scheme} cap of {limit}{}", .generation.map(|g| format!(" at generation {g}")).unwrap_or_default())]
    Cap {
        generation: Option<u64>,
        growth: u64,
        limit: u64,
        scheme: &'static str,
    },
    #[error("sample of {n} does not fit a generation of size {size}")]
    SampleSize { n: u64, size: u64 },
    #[error("invalid ancestry state: {0}")]
    State(&'static str),
    #[error("{0} is only available for the modified Moran model")]
    NotMoran(&'static str),
    #[error("expansion factor m must be 0 or satisfy m N >= 1, got m={0}")]
    Expansion(f64),
}

impl CanningsError {
    pub(crate) fn at(self, generation: u64) -> Self {
        match self {
            CanningsError::Cap {
                growth,
                limit,
                scheme,
                ..
            } => CanningsError::Cap {
                generation: Some(generation),
                growth,
                limit,
                scheme,
            },
            e => e,
        }
    }

    pub fn scheme(&self) -> Option<&'static str> {
        match self {
            CanningsError::Cap { scheme, .. } => Some(scheme),
            _ => None,
        }
    }
}

/// Where the `d > 0` extra offspring of a growing generation go.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Allocation {
    /// All to the multiplying parent.
    ToMultiplying,
    /// One each to distinct parents that had no offspring; needs `d <= U - 1`.
    #[default]
    ToNonReproducing,
    /// `A ~ Binomial(d, U / N_r)` to the multiplying parent, clamped so `d - A <= U - 1`.
    Proportional,
}

impl Allocation {
    pub fn name(self) -> &'static str {
        match self {
            Allocation::ToMultiplying => "to-multiplying",
            Allocation::ToNonReproducing => "to-nonrep",
            Allocation::Proportional => "proportional",
        }
    }
}

impl FromStr for Allocation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "to-multiplying" => Ok(Allocation::ToMultiplying),
            "to-nonrep" => Ok(Allocation::ToNonReproducing),
            "proportional" => Ok(Allocation::Proportional),
            other => Err(format!(
                "unknown allocation `{other}` (expected to-multiplying, to-nonrep or proportional)"
            )),
        }
    }
}

/// Model literal: `moran:<measure>`, `moran-thinned:<measure>,gamma=<g>` or
/// `schweinsberg:alpha=<a>,C=<c>`.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Moran {
        measure: LambdaMeasure,
        gamma: Option<f64>,
    },
    Schweinsberg {
        tail: HeavyTailLaw,
    },
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Moran { measure, gamma: None } => write!(f, "moran:{measure}"),
            ModelSpec::Moran {
                measure,
                gamma: Some(g),
            } => write!(f, "moran-thinned:{measure},gamma={g}"),
            ModelSpec::Schweinsberg { tail } => {
                write!(f, "schweinsberg:alpha={},C={}", tail.alpha(), tail.c())
            }
        }
    }
}

fn literal_number(text: &str, start: usize, what: &str) -> Result<f64, LiteralError> {
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| LiteralError {
            start,
            end: start + text.len().max(1),
            message: format!("expected a number for {what}, found `{text}`"),
        })
}

pub fn parse_model(text: &str) -> Result<ModelSpec, LiteralError> {
    let err = |start: usize, end: usize, msg: &str| LiteralError {
        start,
        end,
        message: String::from(msg),
    };
    if let Some(rest) = text.strip_prefix("moran-thinned:") {
        let offset = "moran-thinned:".len();
        let Some(cut) = rest.rfind(",gamma=") else {
            return Err(err(text.len(), text.len() + 1, "expected `,gamma=<g>` after the measure"));
        };
        let measure = parse_measure(&rest[..cut]).map_err(|e| e.shifted(offset))?;
        let gstart = offset + cut + ",gamma=".len();
        let gamma = literal_number(&text[gstart..], gstart, "gamma")?;
        if !(gamma > 1.0 && gamma < 2.0) {
            return Err(err(gstart, text.len(), "gamma must lie in (1, 2)"));
        }
        measure
            .require_probability()
            .map_err(|e| err(offset, offset + cut, &format!("{e}")))?;
        return Ok(ModelSpec::Moran {
            measure,
            gamma: Some(gamma),
        });
    }
    if let Some(rest) = text.strip_prefix("moran:") {
        let offset = "moran:".len();
        let measure = parse_measure(rest).map_err(|e| e.shifted(offset))?;
        measure
            .require_probability()
            .map_err(|e| err(offset, text.len(), &format!("{e}")))?;
        return Ok(ModelSpec::Moran { measure, gamma: None });
    }
    if let Some(rest) = text.strip_prefix("schweinsberg:") {
        let mut pos = "schweinsberg:".len();
        let (mut alpha, mut c) = (None, 1.0);
        for part in rest.split(',') {
            let (key, value) = part.split_once('=').ok_or_else(|| {
                err(pos, pos + part.len().max(1), "expected `alpha=<a>` or `C=<c>`")
            })?;
            let vstart = pos + key.len() + 1;
            match key {
                "alpha" => alpha = Some(literal_number(value, vstart, "alpha")?),
                "C" => c = literal_number(value, vstart, "C")?,
                _ => return Err(err(pos, pos + key.len(), "unknown parameter (expected alpha or C)")),
            }
            pos += part.len() + 1;
        }
        let alpha = alpha.ok_or_else(|| err(text.len(), text.len() + 1, "missing `alpha=`"))?;
        let tail = HeavyTailLaw::new(alpha, c).map_err(|e| err(13, text.len(), &format!("{e}")))?;
        return Ok(ModelSpec::Schweinsberg { tail });
    }
    let end = text.find(':').unwrap_or(text.len()).max(1);
    Err(err(
        0,
        end,
        "unknown model (expected moran:, moran-thinned: or schweinsberg:)",
    ))
}

impl FromStr for ModelSpec {
    type Err = LiteralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_model(s)
    }
}

impl ModelSpec {
    pub fn law_spec(&self) -> Option<LawSpec> {
        match self {
            ModelSpec::Moran { measure, gamma: None } => Some(LawSpec::Plain(measure.clone())),
            ModelSpec::Moran {
                measure,
                gamma: Some(gamma),
            } => Some(LawSpec::Thinned {
                measure: measure.clone(),
                gamma: *gamma,
            }),
            ModelSpec::Schweinsberg { .. } => None,
        }
    }

    /// Per-generation caps on size changes at reference size `size`.
    pub fn growth_caps(
        &self,
        allocation: Allocation,
        size: u64,
        coalescence: f64,
    ) -> Result<Option<GrowthCaps>, CanningsError> {
        match self {
            ModelSpec::Schweinsberg { .. } => Ok(Some(GrowthCaps::sqrt_ramp(size, coalescence))),
            ModelSpec::Moran { .. } if allocation == Allocation::ToNonReproducing => {
                let law = self.law_spec().expect("moran").build(size)?;
                Ok(Some(GrowthCaps {
                    max_growth: law.min_support() - 1,
                    max_decline: u64::MAX,
                }))
            }
            ModelSpec::Moran { .. } => Ok(None),
        }
    }

    /// Exact `c_N` for the modified Moran model.
    pub fn exact_coalescence(&self, size: u64) -> Result<f64, CanningsError> {
        let spec = self.law_spec().ok_or(CanningsError::NotMoran("an exact coalescence probability"))?;
        Ok(spec.build(size)?.coalescence_prob())
    }

    /// Numerical checks of the regime conditions at size `size`.
    pub fn diagnostics(&self, allocation: Allocation, size: u64) -> Result<Vec<String>, CanningsError> {
        let mut out = Vec::new();
        let Some(spec) = self.law_spec() else { return Ok(out) };
        let law = spec.build(size)?;
        if allocation == Allocation::ToMultiplying {
            let ratio = law.mean() / law.factorial_moment(2);
            if ratio >= 0.1 {
                out.push(format!(
                    "to-multiplying allocation: E(U)/E((U)_2) = {ratio:.3} at N = {size} is not small"
                ));
            }
        }
        if let ModelSpec::Moran { measure, gamma: None } = self {
            let base = OffspringLaw::from_measure(measure, size)?;
            let ratio = base.factorial_moment(2) / (size as f64 - 1.0);
            out.push(format!("E((U'_N)_2)/(N-1) = {ratio:.4} at N = {size}"));
        }
        Ok(out)
    }
}

/// A model prepared for simulation over a range of population sizes.
#[derive(Debug)]
pub enum CanningsModel {
    ModifiedMoran { book: LawBook, allocation: Allocation },
    Schweinsberg { tail: HeavyTailLaw },
}

impl CanningsModel {
    pub fn new(spec: &ModelSpec, allocation: Allocation, lo: u64, hi: u64) -> Result<Self, CanningsError> {
        match spec {
            ModelSpec::Schweinsberg { tail } => Ok(CanningsModel::Schweinsberg { tail: *tail }),
            ModelSpec::Moran { .. } => Ok(CanningsModel::ModifiedMoran {
                book: LawBook::new(spec.law_spec().expect("moran"), lo, hi)?,
                allocation,
            }),
        }
    }

    /// Exact probability that two lineages in generation `r - 1` share a parent in generation `r`.
    pub fn pair_merge_probability(&self, n_r: u64, n_prev: u64) -> Result<f64, CanningsError> {
        match self {
            CanningsModel::ModifiedMoran { book, allocation } => {
                exact_pair_merge(book.law(n_r)?, n_prev, *allocation)
            }
            CanningsModel::Schweinsberg { .. } => Err(CanningsError::NotMoran("an exact per-generation probability")),
        }
    }
}

/// Exact one-generation pair-coalescence probability of the modified Moran
/// model with parent size `law.size()` and offspring size `n_prev`.
pub fn exact_pair_merge(law: &FamilyLaw, n_prev: u64, allocation: Allocation) -> Result<f64, CanningsError> {
    let n_r = law.size();
    if n_prev <= n_r {
        return Ok(law.coalescence_prob());
    }
    let d = n_prev - n_r;
    let pool2 = math::falling(n_prev as f64, 2);
    let df = d as f64;
    match allocation {
        Allocation::ToNonReproducing => {
            if d > law.min_support() - 1 {
                return Err(CanningsError::Cap {
                    generation: None,
                    growth: d,
                    limit: law.min_support() - 1,
                    scheme: allocation.name(),
                });
            }
            Ok(law.factorial_moment(2) / pool2)
        }
        Allocation::ToMultiplying => {
            Ok((law.factorial_moment(2) + 2.0 * df * law.mean() + df * (df - 1.0)) / pool2)
        }
        Allocation::Proportional => {
            let mut acc = math::CompensatedSum::default();
            law.for_each_atom(|u, w| {
                let q = (u as f64 / n_r as f64).min(1.0);
                let floor = d.saturating_sub(u - 1);
                for a in 0..=d {
                    let p = math::choose(d, a) * math::powi_zero(q, a) * math::powi_zero(1.0 - q, d - a);
                    let family = (u + a.max(floor)) as f64;
                    acc.add(w * p * family * (family - 1.0));
                }
            });
            Ok(acc.value() / pool2)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub estimate: f64,
    pub standard_error: f64,
    /// Whether `estimate` is exact (modified Moran) rather than Monte Carlo.
    pub exact: bool,
    /// Large-`N` formula for the Schweinsberg model.
    pub asymptotic: Option<f64>,
    pub trials: u64,
}

/// `C α B(2-α, α) μ^(-α) N^(1-α)` for `α > 1`, `1 / ln N` for `α = 1`.
pub fn schweinsberg_asymptotic_cn(tail: &HeavyTailLaw, size: u64) -> f64 {
    let a = tail.alpha();
    if a == 1.0 {
        return 1.0 / math::ln(size as f64);
    }
    tail.c() * a * math::exp(math::ln_beta(2.0 - a, a)) * math::pow(tail.mean(), -a) * math::pow(size as f64, 1.0 - a)
}

/// Conditional probability, given one generation's offspring potentials, that
/// two distinct offspring of a generation of size `n_prev` share a parent.
pub fn schweinsberg_pair_trial<R: Rng + ?Sized>(
    tail: &HeavyTailLaw,
    size: u64,
    n_prev: u64,
    rng: &mut R,
) -> f64 {
    let mut same = 0u128;
    let mut total = 0u128;
    for _ in 0..size {
        let x = tail.sample(rng) as u128;
        same += x * x.saturating_sub(1);
        total += x;
    }
    let slots = total.max(n_prev as u128);
    let pairs = (slots * (slots - 1)) as f64;
    let fill = (slots * (slots - 1) - total * total.saturating_sub(1)) as f64 / size as f64;
    (same as f64 + fill) / pairs
}

/// `c_N` of a model: exact for the modified Moran model, Monte Carlo for Schweinsberg.
pub fn calibrate_cn<R: Rng + ?Sized>(
    spec: &ModelSpec,
    size: u64,
    trials: u64,
    rng: &mut R,
) -> Result<Calibration, CanningsError> {
    match spec {
        ModelSpec::Moran { .. } => Ok(Calibration {
            estimate: spec.exact_coalescence(size)?,
            standard_error: 0.0,
            exact: true,
            asymptotic: None,
            trials: 0,
        }),
        ModelSpec::Schweinsberg { tail } => {
            let values: Vec<f64> = (0..trials.max(1))
                .map(|_| schweinsberg_pair_trial(tail, size, size, rng))
                .collect();
            let (estimate, standard_error) = mean_and_se(&values);
            Ok(Calibration {
                estimate,
                standard_error,
                exact: false,
                asymptotic: Some(schweinsberg_asymptotic_cn(tail, size)),
                trials: values.len() as u64,
            })
        }
    }
}

/// Sample mean and its standard error.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = math::compensated(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = math::compensated(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0);
    (mean, math::sqrt(var / n))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativeControl {
    pub estimate: f64,
    pub standard_error: f64,
    pub exact: f64,
    /// `c_N` of the same model without the expansion.
    pub baseline: f64,
    pub added: u64,
    pub trials: u64,
}

/// One generation in which `d = ⌊mN⌋` extra offspring all go to the multiplying parent.
pub fn negative_control_expansion<R: Rng + ?Sized>(
    law: &FamilyLaw,
    m: f64,
    trials: u64,
    rng: &mut R,
) -> Result<NegativeControl, CanningsError> {
    let size = law.size();
    if !(m >= 0.0 && m.is_finite()) || (m > 0.0 && m * (size as f64) < 1.0) {
        return Err(CanningsError::Expansion(m));
    }
    let added = math::floor(m * size as f64) as u64;
    let n_prev = size + added;
    let mut merges = 0u64;
    let mut events = Vec::new();
    for _ in 0..trials {
        let mut state = AncestryState::new(2, n_prev, rng)?;
        events.clear();
        step_modified_moran(&mut state, law, size, n_prev, Allocation::ToMultiplying, rng, &mut events)?;
        if state.block_count() == 1 {
            merges += 1;
        }
    }
    let p = merges as f64 / trials.max(1) as f64;
    Ok(NegativeControl {
        estimate: p,
        standard_error: math::sqrt(p * (1.0 - p) / trials.max(1) as f64),
        exact: exact_pair_merge(law, n_prev, Allocation::ToMultiplying)?,
        baseline: law.coalescence_prob(),
        added,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::{replicate_rng, StreamTag};
    use std::vec::Vec;
    use alloc::string::ToString;

    #[test]
    fn literals_round_trip() {
        for lit in ["moran:kingman", "moran:beta:1.5,1", "moran-thinned:dirac:0.3,gamma=1.5", "schweinsberg:alpha=1.5,C=1"] {
            let spec = parse_model(lit).unwrap();
            assert_eq!(spec.to_string(), lit);
        }
        assert!(parse_model("moran-thinned:dirac:0.3,gamma=2.5").is_err());
        assert!(parse_model("schweinsberg:alpha=1.5,C=0.5").is_err());
        let e = parse_model("moran:beta:0,1").unwrap_err();
        assert!(e.start >= 6, "{e:?}");
        assert!(parse_model("wright-fisher").is_err());
        assert_eq!("to-nonrep".parse::<Allocation>().unwrap(), Allocation::ToNonReproducing);
    }

    #[test]
    fn exact_coalescence_examples() {
        let moran = parse_model("moran:kingman").unwrap();
        assert!((moran.exact_coalescence(1000).unwrap() - 2.0 / 999_000.0).abs() < 1e-20);
        let cal = calibrate_cn(&moran, 1000, 10, &mut replicate_rng(1, StreamTag::CALIBRATION, 0)).unwrap();
        assert!(cal.exact && cal.estimate == moran.exact_coalescence(1000).unwrap());
        let thinned = parse_model("moran-thinned:dirac:0.3,gamma=1.5").unwrap();
        let c = thinned.exact_coalescence(5000).unwrap();
        let lambda = LambdaMeasure::dirac(0.3).unwrap().total_rate(5000).unwrap();
        let p = lambda * 5000f64.powf(-1.5);
        let expect = 5000f64.powf(-1.5) + (1.0 - p) * 2.0 / (5000.0 * 4999.0);
        assert!((c - expect).abs() / expect < 1e-12);
    }

    #[test]
    fn lambda_is_monotone_in_size() {
        for m in [LambdaMeasure::dirac(0.3).unwrap(), LambdaMeasure::beta(1.5, 1.0).unwrap(), LambdaMeasure::beta(0.5, 2.0).unwrap()] {
            for n in [50u64, 200] {
                let base = m.total_rate(n).unwrap();
                for nr in (n + 1..=2 * n).step_by(7) {
                    assert!(base <= m.total_rate(nr).unwrap() * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn growth_pair_probabilities_match_simulation() {
        let law = FamilyLaw::Plain(OffspringLaw::from_measure(&LambdaMeasure::beta(1.0, 1.0).unwrap(), 10).unwrap());
        let mut rng = replicate_rng(2, StreamTag::CANNINGS, 0);
        for (alloc, n_prev) in [
            (Allocation::ToMultiplying, 14u64),
            (Allocation::Proportional, 14),
            (Allocation::ToMultiplying, 7),
        ] {
            let exact = exact_pair_merge(&law, n_prev, alloc).unwrap();
            let trials = 200_000;
            let mut merges = 0;
            for _ in 0..trials {
                let mut s = AncestryState::new(2, n_prev, &mut rng).unwrap();
                step_modified_moran(&mut s, &law, 10, n_prev, alloc, &mut rng, &mut Vec::new()).unwrap();
                merges += (s.block_count() == 1) as u64;
            }
            let p = merges as f64 / trials as f64;
            let sd = (exact * (1.0 - exact) / trials as f64).sqrt();
            assert!((p - exact).abs() <= 4.0 * sd, "{alloc:?} {n_prev}: {p} vs {exact}");
        }
        // star law cannot absorb growth under the non-reproducing scheme
        let moran = FamilyLaw::Plain(OffspringLaw::fixed(10, 2).unwrap());
        assert!(exact_pair_merge(&moran, 12, Allocation::ToNonReproducing).is_err());
        assert!(exact_pair_merge(&moran, 11, Allocation::ToNonReproducing).is_ok());
    }

    #[test]
    fn negative_control_examples() {
        let law = FamilyLaw::Plain(OffspringLaw::fixed(10_000, 2).unwrap());
        let mut rng = replicate_rng(3, StreamTag::CANNINGS, 0);
        let nc = negative_control_expansion(&law, 1.0, 100_000, &mut rng).unwrap();
        assert!(nc.estimate >= 0.2, "{}", nc.estimate);
        assert!(nc.baseline <= 1e-3);
        let bound = (1e4f64 - 1.0).powi(2) / (2e4 * (2e4 - 1.0));
        assert!(nc.exact >= bound);
        let zero = negative_control_expansion(&law, 0.0, 10, &mut rng).unwrap();
        assert_eq!(zero.exact, law.coalescence_prob());
        let small = FamilyLaw::Plain(OffspringLaw::fixed(1000, 2).unwrap());
        let smaller = negative_control_expansion(&small, 1.0, 20_000, &mut rng).unwrap();
        // family of size N + 2 in a pool of 2N
        let closed = |n: f64| (n + 2.0) * (n + 1.0) / (2.0 * n * (2.0 * n - 1.0));
        assert!((nc.exact - closed(1e4)).abs() < 1e-14);
        assert!((smaller.exact - closed(1e3)).abs() < 1e-14);
        assert!(smaller.exact.min(nc.exact) > 0.25);
        assert!(negative_control_expansion(&law, 1e-5, 10, &mut rng).is_err());
    }

    #[test]
    fn schweinsberg_calibration_near_asymptotic() {
        let spec = parse_model("schweinsberg:alpha=1.5,C=1").unwrap();
        let mut rng = replicate_rng(4, StreamTag::CALIBRATION, 0);
        let cal = calibrate_cn(&spec, 2000, 20_000, &mut rng).unwrap();
        let asym = cal.asymptotic.unwrap();
        assert!(cal.standard_error > 0.0);
        assert!((cal.estimate - asym).abs() / asym < 0.15, "{} vs {asym}", cal.estimate);
    }

    #[test]
    fn beta_coalescence_scaling() {
        for a in [0.5f64, 1.5] {
            let spec = ModelSpec::Moran { measure: LambdaMeasure::beta(a, 1.0).unwrap(), gamma: None };
            let pts: Vec<(f64, f64)> = [1_000u64, 10_000, 100_000]
                .iter()
                .map(|&n| ((n as f64).ln(), spec.exact_coalescence(n).unwrap().ln()))
                .collect();
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / 3.0;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / 3.0;
            let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
                / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
            assert!((slope - (a - 2.0)).abs() <= 0.05, "a={a}: slope {slope}");
        }
    }
}
