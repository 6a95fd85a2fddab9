//! Convergence experiments comparing discrete genealogies with their limits,
//! exact one-generation oracles, and the distances used to score them.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::cannings::{
    calibrate_cn, hypergeometric, negative_control_expansion, simulate_genealogy, step_modified_moran,
    Allocation, AncestryState, Calibration, CanningsError, CanningsModel, FamilyLaw, HeavyTailLaw, ModelSpec,
    SimOptions, Stop,
};
use crate::limit::{waiting_time_cdf, LimitError, LimitSimulator};
use crate::math;
use crate::measures::{Component, LambdaMeasure, MeasureError};
use crate::profiles::{
    ClockError, EmpiricalClock, GenerationSchedule, ProfileError, ScheduleError, ScheduleMode, SizeProfile,
    TimeChange,
};
use crate::seed::{replicate_rng, StreamTag};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("{0} is empty")]
    Empty(&'static str),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Cannings(#[from] CanningsError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Limit(#[from] LimitError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Clock(#[from] ClockError),
    #[error("the clock G never reaches {0}; give a horizon explicitly")]
    Horizon(f64),
}

// ---------------------------------------------------------------- distances

/// Sup distance between the empirical CDF of `sample` and `cdf`. Infinite
/// values count as censored beyond every finite point.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64, HarnessError> {
    if sample.is_empty() {
        return Err(HarnessError::Empty("sample"));
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = if x == f64::INFINITY { 1.0 } else { cdf(x).clamp(0.0, 1.0) };
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d.min(1.0))
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64, HarnessError> {
    if a.is_empty() || b.is_empty() {
        return Err(HarnessError::Empty("sample"));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let x = if xs[i].total_cmp(&ys[j]).is_le() { xs[i] } else { ys[j] };
        while i < xs.len() && xs[i] == x {
            i += 1;
        }
        while j < ys.len() && ys[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

/// Half the L1 distance; the shorter pmf is padded with zeros.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64, HarnessError> {
    if p.is_empty() && q.is_empty() {
        return Err(HarnessError::Empty("pmf"));
    }
    let len = p.len().max(q.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    let l1 = math::compensated((0..len).map(|i| (at(p, i) - at(q, i)).abs()));
    Ok((0.5 * l1).min(1.0))
}

/// Asymptotic KS critical value at level 0.01; `m` switches to two samples.
pub fn ks_critical_value(n: usize, m: Option<usize>) -> f64 {
    let scale = match m {
        None => 1.0 / n as f64,
        Some(m) => (n + m) as f64 / (n as f64 * m as f64),
    };
    1.628 * math::sqrt(scale)
}

/// Empirical pmf of integer values on `0..len`.
pub fn histogram(values: impl IntoIterator<Item = u64>, len: usize) -> Vec<f64> {
    let mut counts = vec![0u64; len];
    let mut total = 0u64;
    for v in values {
        if let Some(c) = counts.get_mut(v as usize) {
            *c += 1;
        }
        total += 1;
    }
    counts.iter().map(|&c| c as f64 / total.max(1) as f64).collect()
}

// ---------------------------------------------------------------- oracles

/// `P(J = j)` for `j = 0..=n`, where `J` counts tracked lineages that land in
/// the multiplying family: `Σ_u P(U = u) Hyp(j; N, u, n)`.
pub fn one_generation_merger_law(law: &FamilyLaw, n: u64) -> Vec<f64> {
    let size = law.size();
    let mut acc = vec![math::CompensatedSum::default(); n as usize + 1];
    law.for_each_atom(|u, w| {
        for (j, a) in acc.iter_mut().enumerate() {
            a.add(w * hypergeometric(size, u, n, j as u64));
        }
    });
    acc.iter().map(|a| a.value()).collect()
}

/// Merger-size law on `0..=n` with index 0 for "no merger" and index 1 empty.
pub fn merger_size_law(law: &FamilyLaw, n: u64) -> Vec<f64> {
    let mut p = one_generation_merger_law(law, n);
    p[0] += p[1];
    p[1] = 0.0;
    p
}

/// Probability that `a` given lineages of an offspring generation of size
/// `n_prev <= N` share the multiplying parent when that generation is a
/// uniform subsample of the fixed-size offspring.
pub fn composed_merger_probability(law: &FamilyLaw, n_prev: u64, a: u64) -> f64 {
    let size = law.size();
    let mut acc = math::CompensatedSum::default();
    law.for_each_atom(|u, w| {
        for f in a..=u.min(n_prev) {
            acc.add(w * hypergeometric(size, u, n_prev, f) * math::falling(f as f64, a as u32));
        }
    });
    acc.value() / math::falling(n_prev as f64, a as u32)
}

/// Same probability without downsampling: `E((U)_a) / (N)_a`.
pub fn fixed_merger_probability(law: &FamilyLaw, a: u64) -> f64 {
    law.factorial_moment(a as u32) / math::falling(law.size() as f64, a as u32)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn reduced(num: u128, den: u128) -> (u128, u128) {
    let g = gcd(num, den).max(1);
    (num / g, den / g)
}

fn choose_exact(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn falling_exact(x: u64, k: u64) -> u128 {
    if k > x {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (x - i) as u128)
}

/// Checks in exact rational arithmetic that downsampling a family of size `u`
/// from `N` to every `m <= N` preserves `(u)_a / (N)_a` for every `a <= m`.
/// Returns the first `(m, u, a)` that fails. Needs `N <= 20`.
pub fn downsampling_identity_exact(size: u64) -> Result<(), (u64, u64, u64)> {
    assert!(size <= 20, "exact check limited to N <= 20");
    for m in 1..=size {
        let total = choose_exact(size, m);
        for u in 0..=size {
            for a in 1..=m {
                let num: u128 = (0..=u.min(m))
                    .map(|f| choose_exact(u, f) * choose_exact(size - u, m - f) * falling_exact(f, a))
                    .sum();
                let lhs = reduced(num, total * falling_exact(m, a));
                let rhs = reduced(falling_exact(u, a), falling_exact(size, a));
                if lhs != rhs {
                    return Err((m, u, a));
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- models

/// Exponent `γ` of the limit clock `G(t) = ∫ ν^(-γ)`.
pub fn clock_exponent(model: &ModelSpec) -> Result<f64, HarnessError> {
    match model {
        ModelSpec::Moran { gamma: Some(g), .. } => Ok(*g),
        ModelSpec::Moran { measure, gamma: None } => match measure.single() {
            Some(Component::PointMass { location }) if location == 0.0 => Ok(2.0),
            Some(Component::Beta { a, .. }) if (a > 0.0 && a < 1.0) || (a > 1.0 && a < 2.0) => Ok(2.0 - a),
            _ => Err(HarnessError::Config(format!(
                "no known clock exponent for the plain modified Moran model with {measure}; \
                 use kingman, beta:a,b with a in (0,1) or (1,2), or a thinned model"
            ))),
        },
        ModelSpec::Schweinsberg { tail } => Ok(tail.alpha() - 1.0),
    }
}

/// Λ of the limit coalescent.
pub fn limit_measure(model: &ModelSpec) -> Result<LambdaMeasure, HarnessError> {
    match model {
        ModelSpec::Moran { measure, .. } => Ok(measure.clone()),
        ModelSpec::Schweinsberg { tail } => Ok(LambdaMeasure::beta(2.0 - tail.alpha(), tail.alpha())?),
    }
}

/// Everything an experiment needs besides its statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub model: ModelSpec,
    pub allocation: Allocation,
    /// Sample size.
    pub n: u64,
    /// Reference population size `N`.
    pub size: u64,
    pub profile: SizeProfile,
    /// Second profile for two-sample comparisons.
    pub against: Option<SizeProfile>,
    /// Clock exponent; must agree with the model when given.
    pub gamma: Option<f64>,
    /// Coalescent-time horizon of the schedule; derived from the clock when absent.
    pub horizon: Option<f64>,
    pub mode: ScheduleMode,
    pub replicates: u64,
    pub seed: u64,
    pub tolerance: Option<f64>,
    /// Monte Carlo trials when `c_N` has no closed form.
    pub calibration_trials: u64,
    pub skip_ahead: bool,
}

impl ExperimentSpec {
    pub fn new(model: ModelSpec, size: u64, profile: SizeProfile, replicates: u64, seed: u64) -> Self {
        ExperimentSpec {
            model,
            allocation: Allocation::default(),
            n: 2,
            size,
            profile,
            against: None,
            gamma: None,
            horizon: None,
            mode: ScheduleMode::Exact,
            replicates,
            seed,
            tolerance: None,
            calibration_trials: 2000,
            skip_ahead: true,
        }
    }

    fn validate(&self) -> Result<f64, HarnessError> {
        if self.replicates < 100 {
            return Err(HarnessError::Config(format!(
                "at least 100 replicates are needed, got {}",
                self.replicates
            )));
        }
        let gamma = clock_exponent(&self.model)?;
        if let Some(g) = self.gamma {
            if (g - gamma).abs() > 1e-12 {
                return Err(HarnessError::Config(format!(
                    "clock exponent {g} does not match the model, which needs {gamma}"
                )));
            }
        }
        Ok(gamma)
    }

    fn echo(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("model".to_string(), self.model.to_string()),
            ("allocation".to_string(), self.allocation.name().to_string()),
            ("n".to_string(), self.n.to_string()),
            ("N".to_string(), self.size.to_string()),
            ("replicates".to_string(), self.replicates.to_string()),
        ];
        if let Some(h) = self.horizon {
            out.push(("horizon".to_string(), format!("{h}")));
        }
        out
    }
}

/// Maps replicate indices to results; implementations must preserve order.
pub trait Runner {
    fn map<T, F>(&self, count: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Runner for Sequential {
    fn map<T, F>(&self, count: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}

fn try_map<R, T, E, F>(runner: &R, count: u64, f: F) -> Result<Vec<T>, E>
where
    R: Runner + ?Sized,
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync + Send,
{
    runner.map(count, f).into_iter().collect()
}

/// A model, its schedule and its clocks, ready to simulate.
#[derive(Debug)]
pub struct Prepared {
    pub model: CanningsModel,
    pub schedule: GenerationSchedule,
    pub calibration: Calibration,
    pub time_change: TimeChange,
    pub limit: LambdaMeasure,
}

/// `c_N` at the reference size: exact or calibrated.
pub fn coalescence_scale(spec: &ExperimentSpec) -> Result<Calibration, HarnessError> {
    let mut rng = replicate_rng(spec.seed, StreamTag::CALIBRATION, 0);
    Ok(calibrate_cn(&spec.model, spec.size, spec.calibration_trials, &mut rng)?)
}

/// Builds the schedule for `profile` out to `horizon` coalescent time units.
pub fn prepare(
    spec: &ExperimentSpec,
    profile: &SizeProfile,
    calibration: Calibration,
    horizon: f64,
) -> Result<Prepared, HarnessError> {
    let gamma = spec.validate()?;
    let time_change = TimeChange::new(profile.clone(), gamma)?;
    let c = calibration.estimate;
    let caps = spec.model.growth_caps(spec.allocation, spec.size, c)?;
    let schedule = GenerationSchedule::build(profile, spec.size, c, horizon, caps, spec.mode)?;
    let model = CanningsModel::new(&spec.model, spec.allocation, schedule.min_size(), schedule.max_size())?;
    Ok(Prepared {
        model,
        schedule,
        calibration,
        time_change,
        limit: limit_measure(&spec.model)?,
    })
}

/// Smallest `t` with `G(t) = tau`.
fn clock_horizon(spec: &ExperimentSpec, profile: &SizeProfile, tau: f64) -> Result<f64, HarnessError> {
    if let Some(h) = spec.horizon {
        return Ok(h);
    }
    let tc = TimeChange::new(profile.clone(), spec.validate()?)?;
    tc.invert(tau).map_err(|_| HarnessError::Horizon(tau))
}

/// Clock value at which a pair has coalesced with probability `1 - e^-20`.
const PAIR_CLOCK: f64 = 20.0;

// ---------------------------------------------------------------- reports

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    AtMost,
    AtLeast,
}

impl Criterion {
    pub fn symbol(self) -> &'static str {
        match self {
            Criterion::AtMost => "<=",
            Criterion::AtLeast => ">=",
        }
    }

    fn holds(self, value: f64, tolerance: f64) -> bool {
        match self {
            Criterion::AtMost => value <= tolerance,
            Criterion::AtLeast => value >= tolerance,
        }
    }
}

/// Named raw values, written out on request.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub experiment: &'static str,
    pub spec: Vec<(String, String)>,
    pub statistic: String,
    pub reference: String,
    pub distance: f64,
    pub criterion: Criterion,
    pub tolerance: f64,
    pub critical_value: Option<f64>,
    pub pass: bool,
    pub replicates: u64,
    pub seed: u64,
    pub details: Vec<(String, f64)>,
    pub notes: Vec<String>,
    pub samples: Vec<Series>,
}

impl ComparisonReport {
    #[allow(clippy::too_many_arguments)]
    fn new(
        experiment: &'static str,
        spec: Vec<(String, String)>,
        statistic: String,
        reference: String,
        distance: f64,
        criterion: Criterion,
        tolerance: f64,
        replicates: u64,
        seed: u64,
    ) -> Self {
        ComparisonReport {
            experiment,
            spec,
            statistic,
            reference,
            distance,
            criterion,
            tolerance,
            critical_value: None,
            pass: criterion.holds(distance, tolerance),
            replicates,
            seed,
            details: Vec::new(),
            notes: Vec::new(),
            samples: Vec::new(),
        }
    }

    pub fn detail(&self, key: &str) -> Option<f64> {
        self.details.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

fn calibration_details(report: &mut ComparisonReport, cal: &Calibration) {
    report.details.push(("c_N".to_string(), cal.estimate));
    if !cal.exact {
        report.details.push(("c_N_standard_error".to_string(), cal.standard_error));
    }
    if let Some(a) = cal.asymptotic {
        report.details.push(("c_N_asymptotic".to_string(), a));
    }
}

// ---------------------------------------------------------------- experiments

fn pair_times<R: Runner + ?Sized>(
    runner: &R,
    spec: &ExperimentSpec,
    prepared: &Prepared,
    tag: StreamTag,
) -> Result<Vec<f64>, HarnessError> {
    let options = SimOptions {
        stop: Stop::Mrca,
        skip_ahead: spec.skip_ahead,
    };
    let c = prepared.calibration.estimate;
    try_map(runner, spec.replicates, |i| {
        let mut rng = replicate_rng(spec.seed, tag, i);
        let g = simulate_genealogy(&prepared.model, 2, &prepared.schedule, options, &mut rng)?;
        Ok(g.first_merger_generation().map_or(f64::INFINITY, |r| r as f64 * c))
    })
}

/// Scaled pair-coalescence times against the limit law, or against the same
/// model under `spec.against` when that is set.
pub fn pair_time_experiment<R: Runner + ?Sized>(
    runner: &R,
    spec: &ExperimentSpec,
) -> Result<ComparisonReport, HarnessError> {
    if spec.n != 2 {
        return Err(HarnessError::Config(format!("pair-time needs n = 2, got {}", spec.n)));
    }
    spec.validate()?;
    let cal = coalescence_scale(spec)?;
    let horizon = clock_horizon(spec, &spec.profile, PAIR_CLOCK)?;
    let prepared = prepare(spec, &spec.profile, cal, horizon)?;
    let times = pair_times(runner, spec, &prepared, StreamTag::CANNINGS)?;
    let censored = times.iter().filter(|t| t.is_infinite()).count();
    let mut samples = vec![Series {
        name: "pair_time".to_string(),
        values: times.clone(),
    }];
    let (distance, reference, critical, tolerance) = match &spec.against {
        Some(other) => {
            let h = clock_horizon(spec, other, PAIR_CLOCK)?;
            let second = prepare(spec, other, cal, h)?;
            let against = pair_times(runner, spec, &second, StreamTag::AGAINST)?;
            let d = ks_two_sample(&times, &against)?;
            samples.push(Series {
                name: "pair_time_against".to_string(),
                values: against,
            });
            let n = spec.replicates as usize;
            (d, "same model under the second profile".to_string(), ks_critical_value(n, Some(n)), 0.05)
        }
        None => {
            let lambda2 = prepared.limit.total_rate(2)?;
            let tc = &prepared.time_change;
            let d = ks_one_sample(&times, |t| waiting_time_cdf(lambda2, tc, 0.0, t))?;
            let tol = if spec.profile.is_constant() { 0.02 } else { 0.03 };
            (
                d,
                format!("1 - exp(-{lambda2} G(t)) with G = ∫ ν^-{}", tc.gamma()),
                ks_critical_value(times.len(), None),
                tol,
            )
        }
    };
    let mut report = ComparisonReport::new(
        "pair-time",
        spec.echo(),
        "pair coalescence generation times c_N".to_string(),
        reference,
        distance,
        Criterion::AtMost,
        spec.tolerance.unwrap_or(tolerance),
        spec.replicates,
        spec.seed,
    );
    report.critical_value = Some(critical);
    calibration_details(&mut report, &prepared.calibration);
    report.details.push(("censored".to_string(), censored as f64));
    let finite: Vec<f64> = times.iter().copied().filter(|t| t.is_finite()).collect();
    if !finite.is_empty() {
        report
            .details
            .push(("mean_pair_time".to_string(), math::compensated(finite.iter().copied()) / finite.len() as f64));
    }
    report.samples = samples;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FirstMergerMode {
    /// Single generations at fixed size against the enumeration oracle.
    Oracle,
    /// The first collision of a full genealogy against the limit's first jump.
    Limit,
}

/// Size of the first merger among `spec.n` lineages.
pub fn first_merger_experiment<R: Runner + ?Sized>(
    runner: &R,
    spec: &ExperimentSpec,
    mode: FirstMergerMode,
) -> Result<ComparisonReport, HarnessError> {
    let n = spec.n;
    if n < 3 {
        return Err(HarnessError::Config(format!("first-merger needs n >= 3, got {n}")));
    }
    spec.validate()?;
    let limit = limit_measure(&spec.model)?;
    let jump = limit.first_jump_law(n)?;
    let mut jump_pmf = vec![0.0; n as usize + 1];
    jump_pmf[2..].copy_from_slice(jump.probs());
    let law = spec.model.law_spec().map(|s| s.build(spec.size)).transpose()?;
    let conditional_oracle = law.as_ref().map(|law| {
        let mut p = merger_size_law(law, n);
        let merge: f64 = p[2..].iter().sum();
        p[0] = 0.0;
        p.iter_mut().for_each(|v| *v /= merge);
        p
    });
    let (report, sizes) = match mode {
        FirstMergerMode::Oracle => {
            let law = law.ok_or(CanningsError::NotMoran("the enumeration oracle"))?;
            let size = spec.size;
            let allocation = spec.allocation;
            let sizes = try_map(runner, spec.replicates, |i| {
                let mut rng = replicate_rng(spec.seed, StreamTag::CANNINGS, i);
                let mut state = AncestryState::new(n, size, &mut rng)?;
                let mut events = Vec::new();
                step_modified_moran(&mut state, &law, size, size, allocation, &mut rng, &mut events)?;
                Ok::<u64, HarnessError>(events.first().map_or(0, |e| e.merger_size))
            })?;
            let empirical = histogram(sizes.iter().copied(), n as usize + 1);
            let oracle = merger_size_law(&law, n);
            let d = tv_distance(&empirical, &oracle)?;
            let mut report = ComparisonReport::new(
                "first-merger",
                spec.echo(),
                "one-generation merger size (0 = none)".to_string(),
                "Σ_u P(U=u) Hyp(j; N, u, n)".to_string(),
                d,
                Criterion::AtMost,
                spec.tolerance.unwrap_or(0.01),
                spec.replicates,
                spec.seed,
            );
            let merged: Vec<u64> = sizes.iter().copied().filter(|&s| s >= 2).collect();
            if !merged.is_empty() {
                let cond = histogram(merged.iter().copied(), n as usize + 1);
                report.details.push(("tv_limit_first_jump".to_string(), tv_distance(&cond, &jump_pmf)?));
            }
            report.details.push(("merger_frequency".to_string(), merged.len() as f64 / sizes.len() as f64));
            (report, sizes)
        }
        FirstMergerMode::Limit => {
            let cal = coalescence_scale(spec)?;
            let tau = PAIR_CLOCK / limit.total_rate(2)?;
            let horizon = clock_horizon(spec, &spec.profile, tau)?;
            let prepared = prepare(spec, &spec.profile, cal, horizon)?;
            let options = SimOptions {
                stop: Stop::Mrca,
                skip_ahead: spec.skip_ahead,
            };
            let sizes = try_map(runner, spec.replicates, |i| {
                let mut rng = replicate_rng(spec.seed, StreamTag::CANNINGS, i);
                let g = simulate_genealogy(&prepared.model, n, &prepared.schedule, options, &mut rng)?;
                Ok::<u64, HarnessError>(g.events.first().map_or(0, |e| e.merger_size))
            })?;
            let empirical = histogram(sizes.iter().copied().filter(|&s| s >= 2), n as usize + 1);
            let d = tv_distance(&empirical, &jump_pmf)?;
            let mut report = ComparisonReport::new(
                "first-merger",
                spec.echo(),
                "size of the first collision".to_string(),
                format!("first-jump law of {limit} at b = {n}"),
                d,
                Criterion::AtMost,
                spec.tolerance.unwrap_or(0.05),
                spec.replicates,
                spec.seed,
            );
            if let Some(oracle) = &conditional_oracle {
                report.details.push(("tv_oracle_conditional".to_string(), tv_distance(&empirical, oracle)?));
            }
            report.details.push(("no_collision".to_string(), sizes.iter().filter(|&&s| s < 2).count() as f64));
            calibration_details(&mut report, &prepared.calibration);
            (report, sizes)
        }
    };
    let mut report = report;
    report.samples.push(Series {
        name: "merger_size".to_string(),
        values: sizes.iter().map(|&s| s as f64).collect(),
    });
    Ok(report)
}

/// Number of blocks at times `t` against the limit at the same times, which
/// is simulated with ten times as many replicates.
pub fn block_count_experiment<R: Runner + ?Sized>(
    runner: &R,
    spec: &ExperimentSpec,
    times: &[f64],
) -> Result<ComparisonReport, HarnessError> {
    let n = spec.n;
    if !(2..=20).contains(&n) {
        return Err(HarnessError::Config(format!("block-count needs 2 <= n <= 20, got {n}")));
    }
    if times.is_empty() || times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(HarnessError::Config("block-count needs finite times t >= 0".to_string()));
    }
    spec.validate()?;
    let cal = coalescence_scale(spec)?;
    let c = cal.estimate;
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let horizon = spec.horizon.unwrap_or(0.0).max(t_max).max(c);
    let prepared = prepare(spec, &spec.profile, cal, horizon)?;
    let generations: Vec<u64> = times.iter().map(|t| math::floor(t / c) as u64).collect();
    let last = generations.iter().copied().max().unwrap_or(0);
    let options = SimOptions {
        stop: Stop::Generation(last),
        skip_ahead: spec.skip_ahead,
    };
    let discrete = try_map(runner, spec.replicates, |i| {
        let mut rng = replicate_rng(spec.seed, StreamTag::CANNINGS, i);
        let g = simulate_genealogy(&prepared.model, n, &prepared.schedule, options, &mut rng)?;
        Ok::<Vec<u64>, HarnessError>(generations.iter().map(|&r| g.blocks_at(r)).collect())
    })?;
    let simulator = LimitSimulator::new(&prepared.limit, n, prepared.time_change.clone())?;
    let reference: Vec<Vec<u64>> = runner.map(10 * spec.replicates, |i| {
        let mut rng = replicate_rng(spec.seed, StreamTag::REFERENCE, i);
        let g = simulator.simulate(&mut rng);
        times.iter().map(|&t| g.blocks_at(t)).collect()
    });
    let mut report = ComparisonReport::new(
        "block-count",
        spec.echo(),
        "blocks at generation [t / c_N]".to_string(),
        format!("limit coalescent at G(t), {} replicates", reference.len()),
        0.0,
        Criterion::AtMost,
        spec.tolerance.unwrap_or(if spec.profile.is_constant() { 0.05 } else { 0.07 }),
        spec.replicates,
        spec.seed,
    );
    let mut worst: f64 = 0.0;
    for (k, &t) in times.iter().enumerate() {
        let p = histogram(discrete.iter().map(|row| row[k]), n as usize + 1);
        let q = histogram(reference.iter().map(|row| row[k]), n as usize + 1);
        let d = tv_distance(&p, &q)?;
        worst = worst.max(d);
        report.details.push((format!("tv_t={t}"), d));
        report.samples.push(Series {
            name: format!("blocks_t={t}"),
            values: discrete.iter().map(|row| row[k] as f64).collect(),
        });
    }
    report.distance = worst;
    report.pass = report.criterion.holds(worst, report.tolerance);
    calibration_details(&mut report, &prepared.calibration);
    Ok(report)
}

/// Sup over `t ∈ [0, T]` of `|F_N(t / c_N) - G(t)|` for a modified Moran
/// model, with `F_N` summing exact per-generation pair probabilities.
pub fn empirical_clock_experiment(spec: &ExperimentSpec) -> Result<ComparisonReport, HarnessError> {
    let gamma = spec.validate()?;
    let c = spec.model.exact_coalescence(spec.size)?;
    let cal = Calibration {
        estimate: c,
        standard_error: 0.0,
        exact: true,
        asymptotic: None,
        trials: 0,
    };
    let t_max = spec.horizon.unwrap_or(1.0);
    let prepared = prepare(spec, &spec.profile, cal, t_max)?;
    let schedule = &prepared.schedule;
    let last = schedule.last_generation();
    let mut probs = Vec::with_capacity(last as usize);
    let mut previous = (0u64, 0u64, 0.0);
    for r in 1..=last {
        let key = (schedule.size(r), schedule.size(r - 1));
        if (key.0, key.1) != (previous.0, previous.1) {
            previous = (key.0, key.1, prepared.model.pair_merge_probability(key.0, key.1)?);
        }
        probs.push(previous.2);
    }
    let clock = EmpiricalClock::new(&probs)?;
    let tc = TimeChange::new(spec.profile.clone(), gamma)?;
    let mut sup: f64 = 0.0;
    let mut at = 0.0;
    for r in 1..=last {
        let t = r as f64 * c;
        if t > t_max {
            break;
        }
        let g = tc.eval(t);
        let before = clock.cumulative((r - 1) as f64)?;
        let after = clock.cumulative(r as f64)?;
        let d = (g - before).abs().max((g - after).abs());
        if d > sup {
            sup = d;
            at = t;
        }
    }
    let end = clock.cumulative(math::floor(t_max / c).min(last as f64))?;
    sup = sup.max((end - tc.eval(t_max)).abs());
    let mut report = ComparisonReport::new(
        "empirical-clock",
        spec.echo(),
        "F_N(t / c_N) from exact per-generation pair probabilities".to_string(),
        format!("G(t) = ∫ ν^-{gamma}"),
        sup,
        Criterion::AtMost,
        spec.tolerance.unwrap_or(0.02),
        1,
        spec.seed,
    );
    report.details.push(("c_N".to_string(), c));
    report.details.push(("argmax_t".to_string(), at));
    report.details.push(("generations".to_string(), last as f64));
    let grid: Vec<f64> = (0..=100)
        .map(|i| {
            let t = t_max * i as f64 / 100.0;
            let f = clock.cumulative(math::floor(t / c).min(last as f64)).unwrap_or(f64::NAN);
            f - tc.eval(t)
        })
        .collect();
    report.samples.push(Series {
        name: "deviation_on_grid".to_string(),
        values: grid,
    });
    Ok(report)
}

/// One generation in which the population grows by `m N`, all added
/// individuals going to the multiplying parent.
pub fn negative_control_experiment(
    spec: &ExperimentSpec,
    m: f64,
) -> Result<ComparisonReport, HarnessError> {
    let law = spec
        .model
        .law_spec()
        .ok_or(CanningsError::NotMoran("the negative control"))?
        .build(spec.size)?;
    let mut rng = replicate_rng(spec.seed, StreamTag::CANNINGS, 0);
    let nc = negative_control_expansion(&law, m, spec.replicates, &mut rng)?;
    let mut report = ComparisonReport::new(
        "negative-control",
        spec.echo(),
        "pair-coalescence probability in the expanding generation".to_string(),
        "separation from the fixed-size c_N".to_string(),
        nc.estimate,
        Criterion::AtLeast,
        spec.tolerance.unwrap_or(0.2),
        nc.trials,
        spec.seed,
    );
    report.critical_value = None;
    report.details.push(("exact".to_string(), nc.exact));
    report.details.push(("standard_error".to_string(), nc.standard_error));
    report.details.push(("baseline_c_N".to_string(), nc.baseline));
    report.details.push(("added".to_string(), nc.added as f64));
    report.pass = report.pass && nc.baseline <= 1e-3;
    if nc.estimate >= 0.2 {
        report.notes.push("non-coalescent-limit regime".to_string());
    }
    Ok(report)
}

/// Schweinsberg generations at size `N` that must fill a pool of `N + cap`
/// with `cap = round(N √c_N)`; a shortfall is a sum of offspring potentials
/// below the pool. Runs `spec.replicates` blocks of `generations` each.
pub fn shortfall_experiment<R: Runner + ?Sized>(
    runner: &R,
    spec: &ExperimentSpec,
    generations: u64,
) -> Result<ComparisonReport, HarnessError> {
    let ModelSpec::Schweinsberg { tail } = &spec.model else {
        return Err(HarnessError::Config("shortfall needs a schweinsberg model".to_string()));
    };
    let tail: HeavyTailLaw = *tail;
    let cal = coalescence_scale(spec)?;
    let size = spec.size;
    let cap = math::round(size as f64 * math::sqrt(cal.estimate)).max(1.0) as u64;
    let pool = size + cap;
    let blocks = try_map(runner, spec.replicates, |i| {
        let mut rng = replicate_rng(spec.seed, StreamTag::CANNINGS, i);
        let mut shortfalls = 0u64;
        let mut min_surplus = i128::MAX;
        for _ in 0..generations {
            let total: u128 = (0..size).map(|_| tail.sample(&mut rng) as u128).sum();
            let surplus = total as i128 - pool as i128;
            min_surplus = min_surplus.min(surplus);
            shortfalls += (surplus < 0) as u64;
        }
        Ok::<(u64, i128), HarnessError>((shortfalls, min_surplus))
    })?;
    let shortfalls: u64 = blocks.iter().map(|b| b.0).sum();
    let min_surplus = blocks.iter().map(|b| b.1).min().unwrap_or(0);
    let total = generations * spec.replicates;
    let mut report = ComparisonReport::new(
        "shortfall",
        spec.echo(),
        "generations whose offspring potentials fall short of N + N √c_N".to_string(),
        "zero shortfalls".to_string(),
        shortfalls as f64,
        Criterion::AtMost,
        spec.tolerance.unwrap_or(0.0),
        total,
        spec.seed,
    );
    calibration_details(&mut report, &cal);
    report.details.push(("cap".to_string(), cap as f64));
    report.details.push(("generations".to_string(), total as f64));
    report.details.push(("min_surplus".to_string(), min_surplus as f64));
    Ok(report)
}
