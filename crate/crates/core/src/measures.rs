//! The finite measure Λ on `[0, 1]` and the merger rates it induces.
//!
//! A measure is a finite sum of weighted components, each either a point mass
//! or a Beta density. All rates are evaluated in closed form per component:
//! a point mass at `p` contributes `p^(k-2) (1-p)^(b-k)` (with `0^0 = 1`, so
//! `δ₀` gives Kingman rates), a `Beta(a, β)` component contributes
//! `B(a+k-2, β+b-k) / B(a, β)`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::math::{self, CompensatedSum};

/// Relative tolerance used to decide whether a measure has total mass one.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeasureError {
    #[error("point mass location {0} is outside [0, 1]")]
    Location(f64),
    #[error("beta shape parameters must be positive, got a={a}, b={b}")]
    Shape { a: f64, b: f64 },
    #[error("component mass must be positive and finite, got {0}")]
    Mass(f64),
    #[error("a measure needs at least one component")]
    Empty,
    #[error("merger of {k} out of {b} blocks is not defined (need 2 <= k <= b)")]
    Domain { b: u64, k: u64 },
    #[error("total merger rate with {0} blocks is zero")]
    Degenerate(u64),
    #[error("measure must be a probability measure, total mass is {0}")]
    NotNormalized(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Component {
    PointMass { location: f64 },
    Beta { a: f64, b: f64 },
}

impl Component {
    fn validate(self) -> Result<Self, MeasureError> {
        match self {
            Component::PointMass { location } if !(0.0..=1.0).contains(&location) => {
                Err(MeasureError::Location(location))
            }
            Component::Beta { a, b } if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) => {
                Err(MeasureError::Shape { a, b })
            }
            c => Ok(c),
        }
    }

    /// `∫ x^(k-2) (1-x)^(b-k)` against this component normalized to mass one.
    fn rate(self, b: u64, k: u64) -> f64 {
        match self {
            Component::PointMass { location: p } => {
                math::powi_zero(p, k - 2) * math::powi_zero(1.0 - p, b - k)
            }
            Component::Beta { a, b: beta } => {
                if b <= math::EXACT_BINOMIAL_LIMIT {
                    let mut acc = 1.0;
                    for i in 0..k - 2 {
                        acc *= a + i as f64;
                    }
                    for i in 0..b - k {
                        acc *= beta + i as f64;
                    }
                    for i in 0..b - 2 {
                        acc /= a + beta + i as f64;
                    }
                    acc
                } else {
                    math::exp(self.ln_rate(b, k))
                }
            }
        }
    }

    fn ln_rate(self, b: u64, k: u64) -> f64 {
        match self {
            Component::PointMass { location: p } => {
                let left = if k == 2 { 0.0 } else { (k - 2) as f64 * math::ln(p) };
                let right = if b == k { 0.0 } else { (b - k) as f64 * math::log1p(-p) };
                left + right
            }
            Component::Beta { a, b: beta } => {
                math::ln_beta(a + (k - 2) as f64, beta + (b - k) as f64) - math::ln_beta(a, beta)
            }
        }
    }

    fn moment(self, j: u32) -> f64 {
        match self {
            Component::PointMass { location } => math::powi_zero(location, j as u64),
            Component::Beta { a, b } => (0..j)
                .map(|i| (a + i as f64) / (a + b + i as f64))
                .product(),
        }
    }
}

/// Finite measure on `[0, 1]`, a positive combination of point masses and Beta laws.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaMeasure {
    components: Vec<(Component, f64)>,
}

impl LambdaMeasure {
    pub fn new(components: Vec<(Component, f64)>) -> Result<Self, MeasureError> {
        if components.is_empty() {
            return Err(MeasureError::Empty);
        }
        for &(c, mass) in &components {
            c.validate()?;
            if !(mass > 0.0 && mass.is_finite()) {
                return Err(MeasureError::Mass(mass));
            }
        }
        Ok(LambdaMeasure { components })
    }

    pub fn dirac(location: f64) -> Result<Self, MeasureError> {
        Self::new(alloc::vec![(Component::PointMass { location }, 1.0)])
    }

    pub fn beta(a: f64, b: f64) -> Result<Self, MeasureError> {
        Self::new(alloc::vec![(Component::Beta { a, b }, 1.0)])
    }

    /// `δ₀`, whose coalescent is Kingman's.
    pub fn kingman() -> Self {
        LambdaMeasure {
            components: alloc::vec![(Component::PointMass { location: 0.0 }, 1.0)],
        }
    }

    pub fn components(&self) -> &[(Component, f64)] {
        &self.components
    }

    pub fn total_mass(&self) -> f64 {
        math::compensated(self.components.iter().map(|c| c.1))
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= NORMALIZATION_TOLERANCE
    }

    pub fn require_probability(&self) -> Result<(), MeasureError> {
        if self.is_probability() {
            Ok(())
        } else {
            Err(MeasureError::NotNormalized(self.total_mass()))
        }
    }

    /// Single-component view, if the measure has exactly one component.
    pub fn single(&self) -> Option<Component> {
        match self.components.as_slice() {
            [(c, _)] => Some(*c),
            _ => None,
        }
    }

    fn check(b: u64, k: u64) -> Result<(), MeasureError> {
        if k < 2 || k > b {
            Err(MeasureError::Domain { b, k })
        } else {
            Ok(())
        }
    }

    /// Rate `λ_{b,k}` at which a specific set of `k` out of `b` blocks merges.
    pub fn lambda_rate(&self, b: u64, k: u64) -> Result<f64, MeasureError> {
        Self::check(b, k)?;
        Ok(math::compensated(
            self.components.iter().map(|&(c, mass)| mass * c.rate(b, k)),
        ))
    }

    /// `ln λ_{b,k}`; `-inf` when the rate vanishes.
    pub fn ln_lambda_rate(&self, b: u64, k: u64) -> Result<f64, MeasureError> {
        Self::check(b, k)?;
        if let [(c, mass)] = self.components.as_slice() {
            return Ok(math::ln(*mass) + c.ln_rate(b, k));
        }
        let terms: Vec<f64> = self
            .components
            .iter()
            .map(|&(c, mass)| math::ln(mass) + c.ln_rate(b, k))
            .collect();
        Ok(math::log_sum_exp(&terms))
    }

    /// `ln(C(b,k) λ_{b,k})` for `k = 2..=b`, indexed by `k - 2`.
    pub(crate) fn ln_merger_weights(&self, b: u64) -> Result<Vec<f64>, MeasureError> {
        if b < 2 {
            return Err(MeasureError::Domain { b, k: 2 });
        }
        (2..=b)
            .map(|k| Ok(math::ln_choose(b, k) + self.ln_lambda_rate(b, k)?))
            .collect()
    }

    /// Total merger rate `λ_b = Σ_k C(b,k) λ_{b,k}` with `b` blocks.
    pub fn total_rate(&self, b: u64) -> Result<f64, MeasureError> {
        if b < 2 {
            return Err(MeasureError::Domain { b, k: 2 });
        }
        if b <= math::EXACT_BINOMIAL_LIMIT {
            let mut acc = CompensatedSum::default();
            for k in 2..=b {
                acc.add(math::choose(b, k) * self.lambda_rate(b, k)?);
            }
            Ok(acc.value())
        } else {
            Ok(math::exp(math::log_sum_exp(&self.ln_merger_weights(b)?)))
        }
    }

    /// Law of the size of the first merger among `b` blocks.
    pub fn first_jump_law(&self, b: u64) -> Result<FirstJumpLaw, MeasureError> {
        let probs = if b <= math::EXACT_BINOMIAL_LIMIT {
            let w: Vec<f64> = (2..=b)
                .map(|k| Ok(math::choose(b, k) * self.lambda_rate(b, k)?))
                .collect::<Result<_, MeasureError>>()?;
            let total = math::compensated(w.iter().copied());
            if !(total > 0.0) {
                return Err(MeasureError::Degenerate(b));
            }
            w.into_iter().map(|x| x / total).collect()
        } else {
            let lw = self.ln_merger_weights(b)?;
            let lse = math::log_sum_exp(&lw);
            if lse == f64::NEG_INFINITY {
                return Err(MeasureError::Degenerate(b));
            }
            lw.into_iter().map(|x| math::exp(x - lse)).collect()
        };
        Ok(FirstJumpLaw { blocks: b, probs })
    }

    /// `E(X^j)` for `X` distributed as this (probability) measure.
    pub fn moment(&self, j: u32) -> Result<f64, MeasureError> {
        self.require_probability()?;
        Ok(math::compensated(
            self.components.iter().map(|&(c, mass)| mass * c.moment(j)),
        ))
    }

    pub fn rate_table(&self, n_max: u64) -> Result<RateTable, MeasureError> {
        if n_max < 2 {
            return Err(MeasureError::Domain { b: n_max, k: 2 });
        }
        let mut rates = Vec::new();
        let mut totals = Vec::new();
        let mut first_jump = Vec::new();
        for b in 2..=n_max {
            let row = (2..=b)
                .map(|k| self.lambda_rate(b, k))
                .collect::<Result<Vec<_>, _>>()?;
            rates.push(row);
            totals.push(self.total_rate(b)?);
            first_jump.push(self.first_jump_law(b)?);
        }
        Ok(RateTable {
            n_max,
            rates,
            totals,
            first_jump,
        })
    }
}

impl fmt::Display for LambdaMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn component(f: &mut fmt::Formatter<'_>, c: Component) -> fmt::Result {
            match c {
                Component::PointMass { location } if location == 0.0 => f.write_str("kingman"),
                Component::PointMass { location } => write!(f, "dirac:{location}"),
                Component::Beta { a, b } => write!(f, "beta:{a},{b}"),
            }
        }
        match self.components.as_slice() {
            [(c, mass)] if *mass == 1.0 => component(f, *c),
            parts => {
                f.write_str("mix:(")?;
                for (i, (c, mass)) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    component(f, *c)?;
                    write!(f, "*{mass}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Distribution of the first merger size, `P(k) = C(b,k) λ_{b,k} / λ_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstJumpLaw {
    blocks: u64,
    probs: Vec<f64>,
}

impl FirstJumpLaw {
    pub fn blocks(&self) -> u64 {
        self.blocks
    }

    /// Probability that the first merger involves `k` blocks.
    pub fn prob(&self, k: u64) -> f64 {
        if k < 2 || k > self.blocks {
            0.0
        } else {
            self.probs[(k - 2) as usize]
        }
    }

    /// Probabilities for `k = 2..=b`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

#[derive(Debug, Clone)]
pub struct RateTable {
    pub n_max: u64,
    /// `rates[b-2][k-2] = λ_{b,k}`.
    pub rates: Vec<Vec<f64>>,
    /// `totals[b-2] = λ_b`.
    pub totals: Vec<f64>,
    pub first_jump: Vec<FirstJumpLaw>,
}

impl RateTable {
    pub fn rate(&self, b: u64, k: u64) -> f64 {
        self.rates[(b - 2) as usize][(k - 2) as usize]
    }

    pub fn total(&self, b: u64) -> f64 {
        self.totals[(b - 2) as usize]
    }
}

/// Error in a measure or model literal, with the byte range it refers to.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message} (at column {})", .start + 1)]
pub struct LiteralError {
    pub start: usize,
    pub end: usize,
    pub message: String,
}

impl LiteralError {
    pub(crate) fn new(start: usize, end: usize, message: impl Into<String>) -> Self {
        LiteralError {
            start,
            end,
            message: message.into(),
        }
    }

    pub(crate) fn shifted(mut self, offset: usize) -> Self {
        self.start += offset;
        self.end += offset;
        self
    }
}

/// Parses `kingman`, `dirac:<p>`, `beta:<a>,<b>` or `mix:(<lit>*<w>;...)`.
pub fn parse_measure(text: &str) -> Result<LambdaMeasure, LiteralError> {
    let mut parser = LiteralParser { text, pos: 0 };
    let parts = parser.measure()?;
    if parser.pos != text.len() {
        return Err(LiteralError::new(parser.pos, text.len(), "unexpected trailing input"));
    }
    let span_all = (0, text.len());
    LambdaMeasure::new(parts).map_err(|e| LiteralError::new(span_all.0, span_all.1, e.to_string()))
}

impl core::str::FromStr for LambdaMeasure {
    type Err = LiteralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_measure(s)
    }
}

struct LiteralParser<'a> {
    text: &'a str,
    pos: usize,
}

impl LiteralParser<'_> {
    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn eat(&mut self, token: &str) -> bool {
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), LiteralError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(LiteralError::new(
                self.pos,
                (self.pos + 1).min(self.text.len()),
                alloc::format!("expected `{token}`"),
            ))
        }
    }

    fn number(&mut self) -> Result<(f64, usize), LiteralError> {
        let start = self.pos;
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-')))
            .unwrap_or(self.rest().len());
        let raw = &self.text[start..start + len];
        self.pos += len;
        match raw.parse::<f64>() {
            Ok(v) if !raw.is_empty() && v.is_finite() => Ok((v, start)),
            _ => Err(LiteralError::new(start, self.pos.max(start + 1).min(self.text.len().max(start + 1)), "expected a number")),
        }
    }

    fn component(&mut self) -> Result<Vec<(Component, f64)>, LiteralError> {
        let start = self.pos;
        let single = |c: Component, start: usize, end: usize| {
            c.validate()
                .map(|c| alloc::vec![(c, 1.0)])
                .map_err(|e| LiteralError::new(start, end, e.to_string()))
        };
        if self.eat("kingman") {
            return Ok(alloc::vec![(Component::PointMass { location: 0.0 }, 1.0)]);
        }
        if self.eat("dirac:") {
            let (location, _) = self.number()?;
            return single(Component::PointMass { location }, start, self.pos);
        }
        if self.eat("beta:") {
            let (a, _) = self.number()?;
            self.expect(",")?;
            let (b, _) = self.number()?;
            return single(Component::Beta { a, b }, start, self.pos);
        }
        if self.eat("mix:(") {
            let mut parts = Vec::new();
            loop {
                let inner = self.measure()?;
                self.expect("*")?;
                let (w, at) = self.number()?;
                if !(w > 0.0) {
                    return Err(LiteralError::new(at, self.pos, "mixture weight must be positive"));
                }
                parts.extend(inner.into_iter().map(|(c, m)| (c, m * w)));
                if self.eat(")") {
                    break;
                }
                self.expect(";")?;
            }
            return Ok(parts);
        }
        let end = self
            .rest()
            .find(|c: char| matches!(c, ':' | ',' | '*' | ';' | ')'))
            .map_or(self.text.len(), |i| self.pos + i);
        Err(LiteralError::new(
            start,
            end.max(start + 1).min(self.text.len().max(start + 1)),
            "unknown measure (expected kingman, dirac:, beta: or mix:)",
        ))
    }

    fn measure(&mut self) -> Result<Vec<(Component, f64)>, LiteralError> {
        self.component()
    }
}
