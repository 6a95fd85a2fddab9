//! Population-size profiles on the coalescent time scale, the clock
//! `G(t) = ∫₀ᵗ ν(s)^(-γ) ds`, generation schedules and empirical clocks.
//!
//! Sizes are relative (`ν(0) = 1` for a normalized profile) everywhere except
//! in [`GenerationSchedule`], where they become absolute counts `N_r`. The
//! generation index `r` sits at coalescent time `r·c_N`. For `ρ > 0` an
//! exponential epoch shrinks backward in time, i.e. the population grows
//! forward in time and `d_{N,r} = N_{r-1} - N_r > 0`.

use alloc::vec::Vec;

use crate::math;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProfileError {
    #[error("profile needs at least one epoch")]
    Empty,
    #[error("first epoch must start at 0, starts at {0}")]
    Start(f64),
    #[error("epoch {index} starts at {start} but the previous one ends at {previous_end}")]
    NotContiguous { index: usize, start: f64, previous_end: f64 },
    #[error("epoch {0} has an empty or reversed interval")]
    Interval(usize),
    #[error("last epoch must extend to infinity")]
    Unbounded,
    #[error("epoch {index}: size must be positive and finite, got {size}")]
    Size { index: usize, size: f64 },
    #[error("epoch {index}: growth rate must be finite, got {rate}")]
    Rate { index: usize, rate: f64 },
    #[error("clock exponent must be finite and nonnegative, got {0}")]
    Gamma(f64),
    #[error("internal time {0} is beyond the range of the clock")]
    Overflow(f64),
    #[error("time must be finite and nonnegative, got {0}")]
    Time(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpochKind {
    Constant { size: f64 },
    /// `ν(t) = entry_size · exp(-rate (t - start))` inside the epoch.
    Exponential { rate: f64, entry_size: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Epoch {
    pub start: f64,
    /// `f64::INFINITY` for the last epoch.
    pub end: f64,
    pub kind: EpochKind,
}

impl Epoch {
    pub fn entry_size(&self) -> f64 {
        match self.kind {
            EpochKind::Constant { size } => size,
            EpochKind::Exponential { entry_size, .. } => entry_size,
        }
    }

    fn value(&self, t: f64) -> f64 {
        match self.kind {
            EpochKind::Constant { size } => size,
            EpochKind::Exponential { rate, entry_size } => {
                entry_size * math::exp(-rate * (t - self.start))
            }
        }
    }

    /// Left limit of `ν` at the end of the epoch.
    pub fn exit_size(&self) -> f64 {
        if self.end.is_infinite() {
            match self.kind {
                EpochKind::Constant { size } => size,
                EpochKind::Exponential { rate, entry_size } if rate > 0.0 => 0.0 * entry_size,
                EpochKind::Exponential { rate, .. } if rate < 0.0 => f64::INFINITY,
                EpochKind::Exponential { entry_size, .. } => entry_size,
            }
        } else {
            self.value(self.end)
        }
    }

    /// `∫ ν(s)^(-γ) ds` over `[start, start + len)`.
    fn clock_increment(&self, len: f64, gamma: f64) -> f64 {
        if len <= 0.0 {
            return 0.0;
        }
        match self.kind {
            EpochKind::Constant { size } => len * math::pow(size, -gamma),
            EpochKind::Exponential { rate, entry_size } => {
                let base = math::pow(entry_size, -gamma);
                let rg = rate * gamma;
                if rg == 0.0 {
                    base * len
                } else {
                    base * math::expm1(rg * len) / rg
                }
            }
        }
    }

    /// Solves `clock_increment(len) = tau` for `len`, if reachable in this epoch.
    fn clock_solve(&self, tau: f64, gamma: f64) -> Option<f64> {
        let len = match self.kind {
            EpochKind::Constant { size } => tau * math::pow(size, gamma),
            EpochKind::Exponential { rate, entry_size } => {
                let rg = rate * gamma;
                let scaled = tau * math::pow(entry_size, gamma);
                if rg == 0.0 {
                    scaled
                } else {
                    let arg = rg * scaled;
                    if arg <= -1.0 {
                        return None;
                    }
                    math::log1p(arg) / rg
                }
            }
        };
        len.is_finite().then_some(len)
    }
}

/// Piecewise profile `ν` tiling `[0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeProfile {
    epochs: Vec<Epoch>,
}

impl SizeProfile {
    pub fn new(epochs: Vec<Epoch>) -> Result<Self, ProfileError> {
        let first = epochs.first().ok_or(ProfileError::Empty)?;
        if first.start != 0.0 {
            return Err(ProfileError::Start(first.start));
        }
        for (index, e) in epochs.iter().enumerate() {
            if index > 0 && e.start != epochs[index - 1].end {
                return Err(ProfileError::NotContiguous {
                    index,
                    start: e.start,
                    previous_end: epochs[index - 1].end,
                });
            }
            if !(e.end > e.start) || e.start.is_nan() {
                return Err(ProfileError::Interval(index));
            }
            let size = e.entry_size();
            if !(size > 0.0 && size.is_finite()) {
                return Err(ProfileError::Size { index, size });
            }
            if let EpochKind::Exponential { rate, .. } = e.kind {
                if !rate.is_finite() {
                    return Err(ProfileError::Rate { index, rate });
                }
            }
        }
        if epochs.last().is_some_and(|e| e.end != f64::INFINITY) {
            return Err(ProfileError::Unbounded);
        }
        Ok(SizeProfile { epochs })
    }

    /// `ν ≡ size`.
    pub fn constant(size: f64) -> Result<Self, ProfileError> {
        Self::new(alloc::vec![Epoch {
            start: 0.0,
            end: f64::INFINITY,
            kind: EpochKind::Constant { size },
        }])
    }

    /// `ν(t) = exp(-rate·t)`.
    pub fn exponential(rate: f64) -> Result<Self, ProfileError> {
        Self::new(alloc::vec![Epoch {
            start: 0.0,
            end: f64::INFINITY,
            kind: EpochKind::Exponential {
                rate,
                entry_size: 1.0,
            },
        }])
    }

    pub fn epochs(&self) -> &[Epoch] {
        &self.epochs
    }

    fn epoch_index(&self, t: f64) -> usize {
        // last epoch with start <= t
        self.epochs.partition_point(|e| e.start <= t).saturating_sub(1)
    }

    /// `ν(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        self.epochs[self.epoch_index(t)].value(t)
    }

    pub fn is_constant(&self) -> bool {
        self.epochs.iter().all(|e| match e.kind {
            EpochKind::Constant { size } => size == self.epochs[0].entry_size(),
            EpochKind::Exponential { rate, entry_size } => {
                rate == 0.0 && entry_size == self.epochs[0].entry_size()
            }
        })
    }

    pub fn is_normalized(&self) -> bool {
        (self.eval(0.0) - 1.0).abs() <= 1e-12
    }
}

/// The clock `G(t) = ∫₀ᵗ ν(s)^(-γ) ds`; `γ = 0` gives `G(t) = t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeChange {
    profile: SizeProfile,
    gamma: f64,
    /// `G` at every epoch start.
    offsets: Vec<f64>,
}

impl TimeChange {
    pub fn new(profile: SizeProfile, gamma: f64) -> Result<Self, ProfileError> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(ProfileError::Gamma(gamma));
        }
        let mut offsets = Vec::with_capacity(profile.epochs.len());
        let mut acc = 0.0;
        for e in &profile.epochs {
            offsets.push(acc);
            acc += e.clock_increment(e.end - e.start, gamma);
        }
        Ok(TimeChange {
            profile,
            gamma,
            offsets,
        })
    }

    /// Identity clock on a constant profile.
    pub fn identity() -> Self {
        Self::new(SizeProfile::constant(1.0).expect("constant profile"), 0.0)
            .expect("gamma zero")
    }

    pub fn profile(&self) -> &SizeProfile {
        &self.profile
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `G(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        if self.gamma == 0.0 {
            return t;
        }
        let i = self.profile.epoch_index(t);
        let e = &self.profile.epochs[i];
        self.offsets[i] + e.clock_increment(t - e.start, self.gamma)
    }

    /// `G⁻¹(τ)`: closed form inside each epoch, bisection if that fails numerically.
    pub fn invert(&self, tau: f64) -> Result<f64, ProfileError> {
        if !(tau >= 0.0) || tau.is_infinite() {
            return Err(ProfileError::Overflow(tau));
        }
        if self.gamma == 0.0 || tau == 0.0 {
            return Ok(tau);
        }
        let i = self.offsets.partition_point(|&g| g <= tau).saturating_sub(1);
        let e = &self.profile.epochs[i];
        let local = tau - self.offsets[i];
        let t = e
            .clock_solve(local, self.gamma)
            .map(|len| e.start + len)
            .filter(|&t| t >= e.start && t <= e.end && t.is_finite());
        match t {
            Some(t) => Ok(t),
            None if e.end.is_finite() => Ok(self.bisect(tau, e.start, e.end)),
            None => Err(ProfileError::Overflow(tau)),
        }
    }

    fn bisect(&self, tau: f64, mut lo: f64, mut hi: f64) -> f64 {
        while hi - lo > 1e-12 * hi.abs().max(1e-300) {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) < tau {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleMode {
    /// `N_r = max(2, round(N ν(r c_N)))`; caps are checked, not enforced.
    Exact,
    /// Steps are clamped to the caps, so instantaneous jumps become ramps.
    Ramped,
}

/// Per-generation limits on `d_{N,r} = N_{r-1} - N_r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrowthCaps {
    /// Largest allowed forward growth `d_{N,r}`.
    pub max_growth: u64,
    /// Largest allowed forward decline `-d_{N,r}`.
    pub max_decline: u64,
}

impl GrowthCaps {
    pub const UNLIMITED: GrowthCaps = GrowthCaps {
        max_growth: u64::MAX,
        max_decline: u64::MAX,
    };

    /// At most `N·√c_N` individuals per generation in either direction.
    pub fn sqrt_ramp(reference: u64, coalescence: f64) -> Self {
        let cap = math::round(reference as f64 * math::sqrt(coalescence)).max(1.0) as u64;
        GrowthCaps {
            max_growth: cap,
            max_decline: cap,
        }
    }

    pub fn allows(&self, d: i64) -> bool {
        if d >= 0 {
            d as u64 <= self.max_growth
        } else {
            d.unsigned_abs() <= self.max_decline
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScheduleError {
    #[error("reference size must be at least 10, got {0}")]
    Reference(u64),
    #[error("coalescence probability must lie in (0, 1], got {0}")]
    Coalescence(f64),
    #[error("horizon must be positive and finite, got {0}")]
    Horizon(f64),
    #[error("schedule with {0} generations is too long")]
    TooLong(f64),
    #[error("size change violates the per-generation caps at {count} generation(s), first at r = {first:?}")]
    CapViolation { count: usize, first: Vec<u64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleWarning {
    /// `N ν` fell below two at the listed generation and was clamped.
    MinimumSizeClamp { generation: u64 },
}

/// Largest number of generations a schedule may span.
pub const MAX_GENERATIONS: u64 = 1 << 32;

/// Sizes `N_0 .. N_R`, stored run-length encoded.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationSchedule {
    reference: u64,
    coalescence: f64,
    mode: ScheduleMode,
    /// `(first generation, size)`; sizes differ between consecutive runs.
    runs: Vec<(u64, u64)>,
    last: u64,
    warnings: Vec<ScheduleWarning>,
    distortion: f64,
}

impl GenerationSchedule {
    /// Builds the schedule for `ν` with `R = ⌈horizon / c_N⌉` steps.
    pub fn build(
        profile: &SizeProfile,
        reference: u64,
        coalescence: f64,
        horizon: f64,
        caps: Option<GrowthCaps>,
        mode: ScheduleMode,
    ) -> Result<Self, ScheduleError> {
        if reference < 10 {
            return Err(ScheduleError::Reference(reference));
        }
        if !(coalescence > 0.0 && coalescence <= 1.0) {
            return Err(ScheduleError::Coalescence(coalescence));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(ScheduleError::Horizon(horizon));
        }
        let steps = math::ceil(horizon / coalescence);
        if steps >= MAX_GENERATIONS as f64 {
            return Err(ScheduleError::TooLong(steps));
        }
        let steps = steps as u64;
        let caps = caps.unwrap_or(GrowthCaps::UNLIMITED);
        let mut schedule = GenerationSchedule {
            reference,
            coalescence,
            mode,
            runs: alloc::vec![(0, reference)],
            last: steps,
            warnings: Vec::new(),
            distortion: 0.0,
        };
        let mut violations = Vec::new();
        let mut violation_count = 0usize;
        let mut distortion = math::CompensatedSum::default();
        let mut previous = reference;
        let mut r = 1u64;
        while r <= steps {
            let t = r as f64 * coalescence;
            let epoch = &profile.epochs[profile.epoch_index(t)];
            let raw = math::round(reference as f64 * epoch.value(t));
            let target = if raw < 2.0 {
                schedule
                    .warnings
                    .push(ScheduleWarning::MinimumSizeClamp { generation: r });
                2
            } else {
                raw as u64
            };
            let size = match mode {
                ScheduleMode::Exact => {
                    let d = previous as i64 - target as i64;
                    if !caps.allows(d) {
                        violation_count += 1;
                        if violations.len() < 8 {
                            violations.push(r);
                        }
                    }
                    target
                }
                ScheduleMode::Ramped => {
                    let lo = previous.saturating_sub(caps.max_growth).max(2);
                    let hi = previous.saturating_add(caps.max_decline);
                    let size = target.clamp(lo, hi);
                    distortion.add(
                        (size as f64 - target as f64).abs() / reference as f64 * coalescence,
                    );
                    size
                }
            };
            if size != previous {
                schedule.runs.push((r, size));
                previous = size;
                r += 1;
                continue;
            }
            // Skip to the end of a constant epoch when the schedule already sits on target.
            if let EpochKind::Constant { .. } = epoch.kind {
                if size == target {
                    let end_r = if epoch.end.is_finite() {
                        (math::floor(epoch.end / coalescence) as u64).min(steps)
                    } else {
                        steps
                    };
                    // generations strictly inside the epoch all give `target`
                    let mut jump = end_r.max(r);
                    while jump > r && (jump as f64 * coalescence) >= epoch.end {
                        jump -= 1;
                    }
                    r = jump + 1;
                    continue;
                }
            }
            r += 1;
        }
        schedule.distortion = distortion.value();
        if violation_count > 0 {
            return Err(ScheduleError::CapViolation {
                count: violation_count,
                first: violations,
            });
        }
        Ok(schedule)
    }

    /// Constant schedule `N_r = N` for `r = 0..=steps`.
    pub fn constant(reference: u64, steps: u64) -> Self {
        GenerationSchedule {
            reference,
            coalescence: f64::NAN,
            mode: ScheduleMode::Exact,
            runs: alloc::vec![(0, reference)],
            last: steps,
            warnings: Vec::new(),
            distortion: 0.0,
        }
    }

    /// Schedule from explicit sizes `N_0, N_1, ...`.
    pub fn from_sizes(sizes: &[u64]) -> Self {
        let mut runs: Vec<(u64, u64)> = Vec::new();
        for (r, &s) in sizes.iter().enumerate() {
            if runs.last().map(|&(_, prev)| prev) != Some(s) {
                runs.push((r as u64, s));
            }
        }
        GenerationSchedule {
            reference: sizes[0],
            coalescence: f64::NAN,
            mode: ScheduleMode::Exact,
            runs,
            last: sizes.len() as u64 - 1,
            warnings: Vec::new(),
            distortion: 0.0,
        }
    }

    pub fn reference(&self) -> u64 {
        self.reference
    }

    pub fn coalescence(&self) -> f64 {
        self.coalescence
    }

    pub fn mode(&self) -> ScheduleMode {
        self.mode
    }

    /// Index `R` of the last generation.
    pub fn last_generation(&self) -> u64 {
        self.last
    }

    pub fn warnings(&self) -> &[ScheduleWarning] {
        &self.warnings
    }

    /// Integrated deviation `Σ_r |N_r - N ν(r c_N)| / N · c_N` introduced by ramping.
    pub fn distortion(&self) -> f64 {
        self.distortion
    }

    pub fn runs(&self) -> &[(u64, u64)] {
        &self.runs
    }

    fn run_index(&self, r: u64) -> usize {
        self.runs.partition_point(|&(start, _)| start <= r) - 1
    }

    /// `N_r`; generations past the horizon keep the last size.
    pub fn size(&self, r: u64) -> u64 {
        self.runs[self.run_index(r)].1
    }

    /// `d_{N,r} = N_{r-1} - N_r` for `r >= 1`.
    pub fn change(&self, r: u64) -> i64 {
        self.size(r - 1) as i64 - self.size(r) as i64
    }

    /// Last generation `r' >= r` with `N_{r'} = N_r` (capped at the horizon).
    pub fn run_end(&self, r: u64) -> u64 {
        let i = self.run_index(r);
        self.runs
            .get(i + 1)
            .map_or(self.last, |&(next, _)| next - 1)
            .min(self.last)
    }

    pub fn min_size(&self) -> u64 {
        self.runs.iter().map(|r| r.1).min().unwrap_or(self.reference)
    }

    pub fn max_size(&self) -> u64 {
        self.runs.iter().map(|r| r.1).max().unwrap_or(self.reference)
    }

    /// Rows `(r, N_r, d_{N,r})`, with `d = 0` at `r = 0`.
    pub fn rows(&self) -> impl Iterator<Item = (u64, u64, i64)> + '_ {
        let mut previous = self.reference;
        let mut run = 0usize;
        (0..=self.last).map(move |r| {
            while run + 1 < self.runs.len() && self.runs[run + 1].0 <= r {
                run += 1;
            }
            let size = self.runs[run].1;
            let d = if r == 0 { 0 } else { previous as i64 - size as i64 };
            previous = size;
            (r, size, d)
        })
    }

    /// Generations `r >= 1` whose step violates `caps`.
    pub fn cap_violations(&self, caps: GrowthCaps) -> Vec<u64> {
        self.runs
            .windows(2)
            .filter(|w| !caps.allows(w[0].1 as i64 - w[1].1 as i64))
            .map(|w| w[1].0)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClockError {
    #[error("argument {0} exceeds the recorded horizon")]
    Range(f64),
    #[error("clock never exceeds {0} on the recorded horizon")]
    Horizon(f64),
    #[error("per-generation probability {0} outside [0, 1]")]
    Probability(f64),
}

/// Per-generation pair-coalescence probabilities `c_{N,1}, c_{N,2}, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalClock {
    prefix: Vec<f64>,
}

impl EmpiricalClock {
    pub fn new(probs: &[f64]) -> Result<Self, ClockError> {
        let mut prefix = Vec::with_capacity(probs.len() + 1);
        prefix.push(0.0);
        let mut acc = math::CompensatedSum::default();
        for &p in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(ClockError::Probability(p));
            }
            acc.add(p);
            prefix.push(acc.value());
        }
        Ok(EmpiricalClock { prefix })
    }

    pub fn len(&self) -> usize {
        self.prefix.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `F_N(s) = Σ_{r=1}^{[s]} c_{N,r}`.
    pub fn cumulative(&self, s: f64) -> Result<f64, ClockError> {
        if !(s >= 0.0) {
            return Err(ClockError::Range(s));
        }
        let whole = math::floor(s);
        if whole > self.len() as f64 {
            return Err(ClockError::Range(s));
        }
        Ok(self.prefix[whole as usize])
    }

    /// `G_N⁻¹(t) = inf{s > 0 : F_N(s) > t} - 1`.
    pub fn inverse(&self, t: f64) -> Result<u64, ClockError> {
        let m = self.prefix.partition_point(|&f| f <= t);
        if m >= self.prefix.len() {
            return Err(ClockError::Horizon(t));
        }
        Ok(m.max(1) as u64 - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::vec;
    use std::vec::Vec;

    fn bottleneck() -> SizeProfile {
        SizeProfile::new(vec![
            Epoch {
                start: 0.0,
                end: 0.5,
                kind: EpochKind::Constant { size: 1.0 },
            },
            Epoch {
                start: 0.5,
                end: f64::INFINITY,
                kind: EpochKind::Constant { size: 0.2 },
            },
        ])
        .unwrap()
    }

    #[test]
    fn profile_evaluation() {
        let exp = SizeProfile::exponential(1.0).unwrap();
        assert_eq!(exp.eval(0.0), 1.0);
        assert!((exp.eval(core::f64::consts::LN_2) - 0.5).abs() < 1e-15);
        assert_eq!(bottleneck().eval(0.7), 0.2);
        assert_eq!(bottleneck().eval(0.0), 1.0);
    }

    #[test]
    fn profile_validation() {
        let gap = SizeProfile::new(vec![
            Epoch { start: 0.0, end: 1.0, kind: EpochKind::Constant { size: 1.0 } },
            Epoch { start: 1.5, end: f64::INFINITY, kind: EpochKind::Constant { size: 1.0 } },
        ]);
        assert!(matches!(gap, Err(ProfileError::NotContiguous { index: 1, .. })));
        let open = SizeProfile::new(vec![Epoch {
            start: 0.0,
            end: 3.0,
            kind: EpochKind::Constant { size: 1.0 },
        }]);
        assert_eq!(open, Err(ProfileError::Unbounded));
        assert!(SizeProfile::constant(0.0).is_err());
    }

    #[test]
    fn clock_examples() {
        let flat = TimeChange::new(SizeProfile::constant(1.0).unwrap(), 1.7).unwrap();
        assert!((flat.eval(2.5) - 2.5).abs() < 1e-15);
        let exp = TimeChange::new(SizeProfile::exponential(1.0).unwrap(), 2.0).unwrap();
        let expected = (2f64.exp() - 1.0) / 2.0;
        assert!((exp.eval(1.0) - expected).abs() < 1e-14);
        assert!((exp.eval(1.0) - 3.194528).abs() < 1e-6);
        let insensitive = TimeChange::new(bottleneck(), 0.0).unwrap();
        assert_eq!(insensitive.eval(0.7), 0.7);
    }

    #[test]
    fn clock_inversion_examples() {
        let exp = TimeChange::new(SizeProfile::exponential(1.0).unwrap(), 2.0).unwrap();
        let t = exp.invert((2f64.exp() - 1.0) / 2.0).unwrap();
        assert!((t - 1.0).abs() < 1e-13);
        assert_eq!(exp.invert(0.0).unwrap(), 0.0);
        let half = TimeChange::new(SizeProfile::constant(0.5).unwrap(), 1.0).unwrap();
        assert!((half.invert(4.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn bounded_clock_overflows() {
        // ν grows backward, so G stays bounded by 1/(ργ)
        let shrinking = TimeChange::new(SizeProfile::exponential(-1.0).unwrap(), 1.0).unwrap();
        assert!(shrinking.invert(0.5).is_ok());
        assert!(matches!(shrinking.invert(2.0), Err(ProfileError::Overflow(_))));
    }

    #[test]
    fn schedule_examples() {
        let flat = GenerationSchedule::build(
            &SizeProfile::constant(1.0).unwrap(), 500, 0.01, 1.0, None, ScheduleMode::Exact,
        )
        .unwrap();
        assert!(flat.rows().all(|(_, n, d)| n == 500 && d == 0));
        assert_eq!(flat.last_generation(), 100);

        let exp = GenerationSchedule::build(
            &SizeProfile::exponential(1.0).unwrap(), 1000, 0.01, 1.0, None, ScheduleMode::Exact,
        )
        .unwrap();
        assert_eq!(exp.size(10), 905);
        assert_eq!(exp.size(0), 1000);
        assert!(exp.change(10) >= 0);
    }

    #[test]
    fn ramped_bottleneck_spreads_over_expected_generations() {
        let c = 1e-4;
        let caps = GrowthCaps::sqrt_ramp(10_000, c);
        assert_eq!(caps.max_growth, 100);
        let s = GenerationSchedule::build(&bottleneck(), 10_000, c, 1.0, Some(caps), ScheduleMode::Ramped)
            .unwrap();
        let changing: Vec<u64> = s.rows().filter(|r| r.2 != 0).map(|r| r.0).collect();
        assert_eq!(changing.len(), 80);
        assert_eq!(s.size(changing[79]), 2000);
        assert!(s.cap_violations(caps).is_empty());

        let err = GenerationSchedule::build(&bottleneck(), 10_000, c, 1.0, Some(caps), ScheduleMode::Exact)
            .unwrap_err();
        match err {
            ScheduleError::CapViolation { count, first } => {
                assert_eq!(count, 1);
                assert_eq!(first, vec![5000]);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn ramp_distortion_halves_when_coalescence_is_quartered() {
        let run = |c: f64| {
            let caps = GrowthCaps::sqrt_ramp(10_000, c);
            GenerationSchedule::build(&bottleneck(), 10_000, c, 1.0, Some(caps), ScheduleMode::Ramped)
                .unwrap()
                .distortion()
        };
        let coarse = run(1e-4);
        let fine = run(2.5e-5);
        assert!(coarse > 0.0);
        assert!((fine / coarse - 0.5).abs() < 0.05, "{coarse} {fine}");
    }

    #[test]
    fn minimum_size_clamp_warns() {
        let s = GenerationSchedule::build(
            &SizeProfile::exponential(5.0).unwrap(), 10, 0.1, 2.0, None, ScheduleMode::Exact,
        )
        .unwrap();
        assert!(s.min_size() >= 2);
        assert!(!s.warnings().is_empty());
    }

    #[test]
    fn empirical_clock_examples() {
        let flat = EmpiricalClock::new(&[0.1; 10]).unwrap();
        assert!((flat.cumulative(3.7).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(flat.cumulative(0.5).unwrap(), 0.0);
        assert_eq!(flat.inverse(0.35).unwrap(), 3);
        assert_eq!(flat.inverse(0.0).unwrap(), 0);
        assert!(matches!(flat.cumulative(11.0), Err(ClockError::Range(_))));
        assert!(matches!(flat.inverse(5.0), Err(ClockError::Horizon(_))));
        let uneven = EmpiricalClock::new(&[0.2, 0.1, 0.3]).unwrap();
        assert!((uneven.cumulative(3.0).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(uneven.inverse(0.25).unwrap(), 1);
    }

    fn epoch_stack() -> impl Strategy<Value = SizeProfile> {
        prop::collection::vec((0.05f64..2.0, prop::bool::ANY, 0.1f64..3.0, -1.5f64..1.5), 1..5).prop_map(
            |parts| {
                let mut epochs = Vec::new();
                let mut start = 0.0;
                let n = parts.len();
                for (i, (len, is_exp, size, rate)) in parts.into_iter().enumerate() {
                    let end = if i + 1 == n { f64::INFINITY } else { start + len };
                    let kind = if is_exp {
                        EpochKind::Exponential { rate: rate.abs(), entry_size: size }
                    } else {
                        EpochKind::Constant { size }
                    };
                    epochs.push(Epoch { start, end, kind });
                    start = end;
                }
                SizeProfile::new(epochs).unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn inversion_round_trips(profile in epoch_stack(), gamma in 0.1f64..2.0, t in 0.0f64..10.0) {
            let tc = TimeChange::new(profile, gamma).unwrap();
            let tau = tc.eval(t);
            prop_assume!(tau.is_finite());
            let back = tc.invert(tau).unwrap();
            prop_assert!((back - t).abs() <= 1e-9 * t.max(1.0), "t={} back={}", t, back);
        }

        #[test]
        fn clock_is_monotone(profile in epoch_stack(), gamma in 0.1f64..2.0, a in 0.0f64..10.0, b in 0.0f64..10.0) {
            let tc = TimeChange::new(profile, gamma).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-9);
            prop_assert!(tc.eval(lo) < tc.eval(hi));
        }

        #[test]
        fn exact_schedule_tracks_profile(profile in epoch_stack(), n in 50u64..5000, c in 0.001f64..0.05) {
            let s = GenerationSchedule::build(&profile, n, c, 3.0, None, ScheduleMode::Exact).unwrap();
            for (r, size, _) in s.rows().skip(1) {
                let target = n as f64 * profile.eval(r as f64 * c);
                if target >= 2.0 {
                    prop_assert!((size as f64 / n as f64 - profile.eval(r as f64 * c)).abs() <= 1.0 / n as f64);
                }
            }
        }

        #[test]
        fn inverse_of_cumulative_on_constant_clock(c in 0.001f64..0.5, s in 0.0f64..50.0) {
            let clock = EmpiricalClock::new(&vec![c; 60]).unwrap();
            let f = clock.cumulative(s).unwrap();
            prop_assert!(clock.inverse(f).unwrap() as f64 >= s.floor() - 1.0);
        }
    }
}
