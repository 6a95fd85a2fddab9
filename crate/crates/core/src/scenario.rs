//! Line-oriented text format for demographic scenarios.
//!
//! ```text
//! # bottleneck
//! label bottleneck at t = 0.5
//! default gamma=1.5 horizon=4
//! epoch 0 0.5 exp rate=1
//! epoch 0.5 inf constant size=0.2
//! ```
//!
//! An `exp` epoch without `size=` continues from the exit size of the
//! previous epoch, or from 1 when it is the first epoch.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use crate::profiles::{Epoch, EpochKind, SizeProfile};

/// 1-based line and column, with the length of the offending text in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Lexical,
    Structural,
    Value,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{kind:?} error at {span}: {message}")]
pub struct ScenarioError {
    pub kind: ErrorKind,
    pub span: Span,
    /// Second location involved, e.g. the other epoch of an overlap.
    pub related: Option<Span>,
    pub message: String,
}

impl ScenarioError {
    fn new(kind: ErrorKind, span: Span, message: impl Into<String>) -> Self {
        ScenarioError {
            kind,
            span,
            related: None,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpochBody {
    Constant { size: f64 },
    /// `size: None` continues from the previous exit size.
    Exp { rate: f64, size: Option<f64> },
}

#[derive(Debug, Clone, Copy)]
pub struct EpochDecl {
    pub start: f64,
    pub end: f64,
    pub body: EpochBody,
    pub span: Span,
}

impl PartialEq for EpochDecl {
    fn eq(&self, other: &Self) -> bool {
        self.start == other.start && self.end == other.end && self.body == other.body
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Defaults {
    pub gamma: Option<f64>,
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDocument {
    epochs: Vec<EpochDecl>,
    pub defaults: Defaults,
    pub labels: Vec<String>,
    profile: SizeProfile,
}

impl ScenarioDocument {
    /// Canonical document for a profile; sizes of continuous `exp` epochs are omitted.
    pub fn from_profile(profile: SizeProfile) -> Self {
        let mut epochs = Vec::with_capacity(profile.epochs().len());
        let mut previous_exit = 1.0;
        for (i, e) in profile.epochs().iter().enumerate() {
            let body = match e.kind {
                EpochKind::Constant { size } => EpochBody::Constant { size },
                EpochKind::Exponential { rate, entry_size } => {
                    let continuous = (entry_size - previous_exit).abs() <= 1e-12 * previous_exit;
                    EpochBody::Exp {
                        rate,
                        size: (!continuous).then_some(entry_size),
                    }
                }
            };
            epochs.push(EpochDecl {
                start: e.start,
                end: e.end,
                body,
                span: Span {
                    line: i + 1,
                    column: 1,
                    length: 0,
                },
            });
            previous_exit = e.exit_size();
        }
        ScenarioDocument {
            epochs,
            defaults: Defaults::default(),
            labels: Vec::new(),
            profile,
        }
    }

    pub fn profile(&self) -> &SizeProfile {
        &self.profile
    }

    pub fn into_profile(self) -> SizeProfile {
        self.profile
    }

    pub fn epochs(&self) -> &[EpochDecl] {
        &self.epochs
    }
}

/// Formats with at most 12 significant digits.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    let magnitude = rounded.abs();
    if (1e-5..1e15).contains(&magnitude) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// Canonical text: labels, then defaults, then one epoch per line.
pub fn render_scenario(doc: &ScenarioDocument) -> String {
    let mut out = String::new();
    for label in &doc.labels {
        let _ = writeln!(out, "label {label}");
    }
    let mut defaults = Vec::new();
    if let Some(g) = doc.defaults.gamma {
        defaults.push(format!("gamma={}", format_number(g)));
    }
    if let Some(h) = doc.defaults.horizon {
        defaults.push(format!("horizon={}", format_number(h)));
    }
    if !defaults.is_empty() {
        let _ = writeln!(out, "default {}", defaults.join(" "));
    }
    for e in &doc.epochs {
        let end = if e.end.is_infinite() {
            "inf".to_string()
        } else {
            format_number(e.end)
        };
        let _ = write!(out, "epoch {} {end} ", format_number(e.start));
        match e.body {
            EpochBody::Constant { size } => {
                let _ = write!(out, "constant size={}", format_number(size));
            }
            EpochBody::Exp { rate, size } => {
                let _ = write!(out, "exp rate={}", format_number(rate));
                if let Some(size) = size {
                    let _ = write!(out, " size={}", format_number(size));
                }
            }
        }
        out.push('\n');
    }
    if out.ends_with('\n') {
        out.pop();
    }
    out
}

#[derive(Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    span: Span,
}

fn tokenize(line: &str, line_no: usize) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let mut column = 0usize;
    for (byte, ch) in line.char_indices() {
        column += 1;
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                tokens.push(token(line, b, byte, line_no, c));
            }
        } else if start.is_none() {
            start = Some((byte, column));
        }
    }
    if let Some((b, c)) = start {
        tokens.push(token(line, b, line.len(), line_no, c));
    }
    tokens
}

fn token(line: &str, from: usize, to: usize, line_no: usize, column: usize) -> Token<'_> {
    let text = &line[from..to];
    Token {
        text,
        span: Span {
            line: line_no,
            column,
            length: text.chars().count(),
        },
    }
}

/// Decimal number with optional exponent; rejects `inf`, `nan` and hex forms.
fn parse_number(text: &str, span: Span) -> Result<f64, ScenarioError> {
    let bytes = text.as_bytes();
    let mut i = 0;
    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
        i += 1;
    }
    let digits_before = bytes[i..].iter().take_while(|b| b.is_ascii_digit()).count();
    i += digits_before;
    let mut digits_after = 0;
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        digits_after = bytes[i..].iter().take_while(|b| b.is_ascii_digit()).count();
        i += digits_after;
    }
    let mut valid = digits_before + digits_after > 0;
    if valid && i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        i += 1;
        if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            i += 1;
        }
        let exp_digits = bytes[i..].iter().take_while(|b| b.is_ascii_digit()).count();
        valid = exp_digits > 0;
        i += exp_digits;
    }
    if !valid || i != bytes.len() {
        return Err(ScenarioError::new(
            ErrorKind::Lexical,
            span,
            format!("malformed number `{text}`"),
        ));
    }
    let value: f64 = text
        .parse()
        .map_err(|_| ScenarioError::new(ErrorKind::Lexical, span, format!("malformed number `{text}`")))?;
    if !value.is_finite() {
        return Err(ScenarioError::new(ErrorKind::Value, span, format!("number `{text}` is out of range")));
    }
    Ok(value)
}

/// Parses `key=value`, returning the value and its span.
fn keyed<'a>(tok: Token<'a>, key: &str) -> Result<f64, ScenarioError> {
    let Some(rest) = tok.text.strip_prefix(key).and_then(|r| r.strip_prefix('=')) else {
        return Err(ScenarioError::new(
            ErrorKind::Lexical,
            tok.span,
            format!("expected `{key}=`, found `{}`", tok.text),
        ));
    };
    let skip = key.chars().count() + 1;
    let span = Span {
        line: tok.span.line,
        column: tok.span.column + skip,
        length: tok.span.length.saturating_sub(skip).max(1),
    };
    parse_number(rest, span)
}

fn end_of_line(line: &str, line_no: usize) -> Span {
    Span {
        line: line_no,
        column: line.chars().count() + 1,
        length: 1,
    }
}

fn positive(value: f64, span: Span, what: &str) -> Result<f64, ScenarioError> {
    if value > 0.0 {
        Ok(value)
    } else {
        Err(ScenarioError::new(
            ErrorKind::Value,
            span,
            format!("{what} must be positive, got {}", format_number(value)),
        ))
    }
}

fn value_span(tok: Token<'_>) -> Span {
    let skip = tok.text.find('=').map_or(0, |i| tok.text[..=i].chars().count());
    Span {
        line: tok.span.line,
        column: tok.span.column + skip,
        length: tok.span.length.saturating_sub(skip).max(1),
    }
}

fn parse_epoch(tokens: &[Token<'_>], line: &str, line_no: usize) -> Result<EpochDecl, ScenarioError> {
    let missing = |what: &str| {
        ScenarioError::new(
            ErrorKind::Structural,
            end_of_line(line, line_no),
            format!("epoch is missing {what}"),
        )
    };
    let start_tok = *tokens.get(1).ok_or_else(|| missing("its start time"))?;
    let end_tok = *tokens.get(2).ok_or_else(|| missing("its end time"))?;
    let kind_tok = *tokens.get(3).ok_or_else(|| missing("`constant` or `exp`"))?;
    let start = parse_number(start_tok.text, start_tok.span)?;
    if start < 0.0 {
        return Err(ScenarioError::new(ErrorKind::Value, start_tok.span, "start time must be nonnegative"));
    }
    let end = if end_tok.text == "inf" {
        f64::INFINITY
    } else {
        parse_number(end_tok.text, end_tok.span)?
    };
    if !(end > start) {
        return Err(ScenarioError::new(
            ErrorKind::Structural,
            end_tok.span,
            "end time must exceed start time",
        ));
    }
    let (body, used) = match kind_tok.text {
        "constant" => {
            let size_tok = *tokens.get(4).ok_or_else(|| missing("`size=`"))?;
            let size = positive(keyed(size_tok, "size")?, value_span(size_tok), "size")?;
            (EpochBody::Constant { size }, 5)
        }
        "exp" => {
            let rate_tok = *tokens.get(4).ok_or_else(|| missing("`rate=`"))?;
            let rate = keyed(rate_tok, "rate")?;
            match tokens.get(5) {
                Some(&size_tok) => {
                    let size = positive(keyed(size_tok, "size")?, value_span(size_tok), "size")?;
                    (EpochBody::Exp { rate, size: Some(size) }, 6)
                }
                None => (EpochBody::Exp { rate, size: None }, 5),
            }
        }
        other => {
            return Err(ScenarioError::new(
                ErrorKind::Lexical,
                kind_tok.span,
                format!("unknown epoch kind `{other}` (expected `constant` or `exp`)"),
            ))
        }
    };
    if let Some(extra) = tokens.get(used) {
        return Err(ScenarioError::new(
            ErrorKind::Lexical,
            extra.span,
            format!("unexpected token `{}`", extra.text),
        ));
    }
    let span = Span {
        line: line_no,
        column: tokens[0].span.column,
        length: line.trim_end().chars().count() + 1 - tokens[0].span.column,
    };
    Ok(EpochDecl { start, end, body, span })
}

fn parse_defaults(tokens: &[Token<'_>], defaults: &mut Defaults) -> Result<(), ScenarioError> {
    for &tok in &tokens[1..] {
        if tok.text.starts_with("gamma=") {
            let g = keyed(tok, "gamma")?;
            if g < 0.0 {
                return Err(ScenarioError::new(ErrorKind::Value, value_span(tok), "gamma must be nonnegative"));
            }
            defaults.gamma = Some(g);
        } else if tok.text.starts_with("horizon=") {
            defaults.horizon = Some(positive(keyed(tok, "horizon")?, value_span(tok), "horizon")?);
        } else {
            return Err(ScenarioError::new(
                ErrorKind::Lexical,
                tok.span,
                format!("unknown default `{}` (expected `gamma=` or `horizon=`)", tok.text),
            ));
        }
    }
    Ok(())
}

/// Parses raw bytes, reporting invalid UTF-8 as a lexical error.
pub fn parse_scenario_bytes(bytes: &[u8]) -> Result<ScenarioDocument, ScenarioError> {
    match core::str::from_utf8(bytes) {
        Ok(text) => parse_scenario(text),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            let line = valid.iter().filter(|&&b| b == b'\n').count() + 1;
            let line_start = valid.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
            let prefix = core::str::from_utf8(&valid[line_start..]).unwrap_or("");
            Err(ScenarioError::new(
                ErrorKind::Lexical,
                Span {
                    line,
                    column: prefix.chars().count() + 1,
                    length: 1,
                },
                "invalid UTF-8",
            ))
        }
    }
}

pub fn parse_scenario(text: &str) -> Result<ScenarioDocument, ScenarioError> {
    let mut decls: Vec<EpochDecl> = Vec::new();
    let mut defaults = Defaults::default();
    let mut labels = Vec::new();
    let mut line_count = 0;
    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        line_count = line_no;
        let line = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(line, line_no);
        let Some(first) = tokens.first() else { continue };
        match first.text {
            "epoch" => decls.push(parse_epoch(&tokens, line, line_no)?),
            "default" => parse_defaults(&tokens, &mut defaults)?,
            "label" => {
                let rest = line.trim_start()["label".len()..].trim();
                if rest.is_empty() {
                    return Err(ScenarioError::new(
                        ErrorKind::Structural,
                        end_of_line(line, line_no),
                        "label needs text",
                    ));
                }
                labels.push(rest.to_string());
            }
            other => {
                return Err(ScenarioError::new(
                    ErrorKind::Lexical,
                    first.span,
                    format!("unknown keyword `{other}` (expected `epoch`, `default` or `label`)"),
                ))
            }
        }
    }
    let profile = assemble(&decls, line_count.max(1))?;
    Ok(ScenarioDocument {
        epochs: decls,
        defaults,
        labels,
        profile,
    })
}

fn assemble(decls: &[EpochDecl], line_count: usize) -> Result<SizeProfile, ScenarioError> {
    let Some(first) = decls.first() else {
        return Err(ScenarioError::new(
            ErrorKind::Structural,
            Span {
                line: line_count,
                column: 1,
                length: 1,
            },
            "scenario declares no epochs",
        ));
    };
    if first.start != 0.0 {
        return Err(ScenarioError::new(ErrorKind::Structural, first.span, "first epoch must start at 0"));
    }
    let mut epochs = Vec::with_capacity(decls.len());
    let mut previous_exit = 1.0;
    for (i, d) in decls.iter().enumerate() {
        if i > 0 {
            let prev = &decls[i - 1];
            if d.start != prev.end {
                let what = if d.start < prev.end { "overlaps" } else { "leaves a gap after" };
                let mut err = ScenarioError::new(
                    ErrorKind::Structural,
                    d.span,
                    format!(
                        "epoch on line {} {what} epoch on line {}",
                        d.span.line, prev.span.line
                    ),
                );
                err.related = Some(prev.span);
                return Err(err);
            }
        }
        let kind = match d.body {
            EpochBody::Constant { size } => EpochKind::Constant { size },
            EpochBody::Exp { rate, size } => EpochKind::Exponential {
                rate,
                entry_size: size.unwrap_or(previous_exit),
            },
        };
        let epoch = Epoch {
            start: d.start,
            end: d.end,
            kind,
        };
        previous_exit = epoch.exit_size();
        if d.end.is_finite() && !(previous_exit > 0.0 && previous_exit.is_finite()) {
            return Err(ScenarioError::new(ErrorKind::Value, d.span, "size leaves the representable range"));
        }
        epochs.push(epoch);
    }
    let last = decls.last().expect("nonempty");
    if last.end.is_finite() {
        return Err(ScenarioError::new(
            ErrorKind::Structural,
            last.span,
            "last epoch must end at `inf`",
        ));
    }
    SizeProfile::new(epochs).map_err(|e| ScenarioError::new(ErrorKind::Value, last.span, e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discontinuity {
    pub time: f64,
    /// Left limit `ν(t-)`.
    pub before: f64,
    /// `ν(t)`.
    pub after: f64,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub horizon: f64,
    /// Infimum of `ν` on `[0, horizon]`.
    pub min: f64,
    /// Supremum of `ν` on `[0, horizon]`.
    pub max: f64,
    pub discontinuities: Vec<Discontinuity>,
    pub normalized: bool,
    pub diagnostics: Vec<String>,
}

/// Relative jump below which adjacent epochs count as continuous.
pub const CONTINUITY_TOLERANCE: f64 = 1e-6;

pub fn check_scenario(doc: &ScenarioDocument, horizon: f64) -> ScenarioReport {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut discontinuities = Vec::new();
    let epochs = doc.profile.epochs();
    for (i, e) in epochs.iter().enumerate() {
        if e.start > horizon {
            break;
        }
        let entry = e.entry_size();
        let until = e.end.min(horizon);
        let exit = if until == e.end {
            e.exit_size()
        } else {
            doc.profile.eval(until)
        };
        for v in [entry, exit] {
            min = min.min(v);
            max = max.max(v);
        }
        if i > 0 {
            let before = epochs[i - 1].exit_size();
            if (before - entry).abs() > CONTINUITY_TOLERANCE * before.max(entry) {
                discontinuities.push(Discontinuity {
                    time: e.start,
                    before,
                    after: entry,
                    line: doc.epochs[i].span.line,
                });
            }
        }
    }
    let normalized = doc.profile.is_normalized();
    let mut diagnostics = Vec::new();
    if !normalized {
        diagnostics.push(format!(
            "profile not normalized: size at time 0 is {}",
            format_number(doc.profile.eval(0.0))
        ));
    }
    for d in &discontinuities {
        diagnostics.push(format!(
            "line {}: discontinuity at t={} from {} to {}",
            d.line,
            format_number(d.time),
            format_number(d.before),
            format_number(d.after)
        ));
    }
    if min < 1e-6 {
        diagnostics.push(format!("size drops to {} before the horizon", format_number(min)));
    }
    ScenarioReport {
        horizon,
        min,
        max,
        discontinuities,
        normalized,
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::string::String;
    use std::vec;
    use std::vec::Vec;

    #[test]
    fn constant_document() {
        let doc = parse_scenario("epoch 0 inf constant size=1").unwrap();
        assert_eq!(doc.profile(), &SizeProfile::constant(1.0).unwrap());
        assert_eq!(render_scenario(&doc), "epoch 0 inf constant size=1");
    }

    #[test]
    fn continuous_plateau_after_exponential() {
        let doc = parse_scenario("epoch 0 0.5 exp rate=1\nepoch 0.5 inf constant size=0.606531").unwrap();
        let p = doc.profile();
        assert!((p.eval(0.25) - (-0.25f64).exp()).abs() < 1e-15);
        assert_eq!(p.eval(3.0), 0.606531);
        assert!(((-0.5f64).exp() - 0.606531).abs() < 1e-6);
        let report = check_scenario(&doc, 2.0);
        assert!(report.discontinuities.is_empty());
        assert!(report.normalized);
    }

    #[test]
    fn overlap_cites_both_lines() {
        let err = parse_scenario("epoch 0 1 constant size=1\nepoch 0.5 inf constant size=0.2").unwrap_err();
        assert_eq!(err.kind, ErrorKind::Structural);
        assert_eq!(err.span.line, 2);
        assert_eq!(err.related.unwrap().line, 1);
        assert!(err.message.contains("line 1") && err.message.contains("line 2"));
    }

    #[test]
    fn error_classes() {
        let gap = parse_scenario("epoch 0 1 constant size=1\nepoch 2 inf constant size=1").unwrap_err();
        assert_eq!((gap.kind, gap.related.map(|s| s.line)), (ErrorKind::Structural, Some(1)));
        let size = parse_scenario("epoch 0 inf constant size=0").unwrap_err();
        assert_eq!(size.kind, ErrorKind::Value);
        assert_eq!(size.span.column, 27);
        let neg = parse_scenario("epoch 0 inf exp rate=1 size=-2").unwrap_err();
        assert_eq!(neg.kind, ErrorKind::Value);
        let open = parse_scenario("epoch 0 1 constant size=1").unwrap_err();
        assert_eq!(open.kind, ErrorKind::Structural);
        let word = parse_scenario("# hi\n  epoc 0 inf constant size=1").unwrap_err();
        assert_eq!(word.kind, ErrorKind::Lexical);
        assert_eq!((word.span.line, word.span.column, word.span.length), (2, 3, 4));
        let number = parse_scenario("epoch 0 inf constant size=1.2.3").unwrap_err();
        assert_eq!(number.kind, ErrorKind::Lexical);
        let nan = parse_scenario("epoch 0 inf constant size=nan").unwrap_err();
        assert_eq!(nan.kind, ErrorKind::Lexical);
        let empty = parse_scenario("# nothing\n").unwrap_err();
        assert_eq!(empty.kind, ErrorKind::Structural);
        let bytes = parse_scenario_bytes(b"epoch 0 inf \xff").unwrap_err();
        assert_eq!((bytes.kind, bytes.span.column), (ErrorKind::Lexical, 13));
    }

    #[test]
    fn continuous_exponential_renders_without_size() {
        let profile = SizeProfile::new(vec![
            Epoch { start: 0.0, end: 0.25, kind: EpochKind::Exponential { rate: 2.0, entry_size: 1.0 } },
            Epoch { start: 0.25, end: f64::INFINITY, kind: EpochKind::Constant { size: 0.5 } },
        ])
        .unwrap();
        let text = render_scenario(&ScenarioDocument::from_profile(profile));
        assert_eq!(text.lines().next(), Some("epoch 0 0.25 exp rate=2"));
    }

    #[test]
    fn check_reports_jump_and_range() {
        let doc = parse_scenario("epoch 0 1 exp rate=1\nepoch 1 inf constant size=0.2").unwrap();
        let report = check_scenario(&doc, 2.0);
        assert_eq!(report.min, 0.2);
        assert_eq!(report.max, 1.0);
        assert_eq!(report.discontinuities.len(), 1);
        let d = report.discontinuities[0];
        assert_eq!(d.time, 1.0);
        assert!((d.before - 0.367879).abs() < 1e-6);
        assert_eq!(d.after, 0.2);
        let flat = check_scenario(&parse_scenario("epoch 0 inf constant size=1").unwrap(), 5.0);
        assert_eq!((flat.min, flat.max, flat.discontinuities.len()), (1.0, 1.0, 0));
        let half = check_scenario(&parse_scenario("epoch 0 inf constant size=0.5").unwrap(), 1.0);
        assert!(!half.normalized);
        assert!(half.diagnostics.iter().any(|d| d.contains("profile not normalized")));
    }

    #[test]
    fn defaults_and_labels_round_trip() {
        let text = "label two phases\ndefault gamma=1.5 horizon=4\nepoch 0 0.5 exp rate=1\nepoch 0.5 inf constant size=0.2";
        let doc = parse_scenario(text).unwrap();
        assert_eq!(doc.defaults.gamma, Some(1.5));
        assert_eq!(doc.labels, vec![String::from("two phases")]);
        assert_eq!(render_scenario(&doc), text);
    }

    #[test]
    fn number_formatting() {
        assert_eq!(format_number(0.1 + 0.2), "0.3");
        assert_eq!(format_number(1e-7), "1e-7");
        assert_eq!(format_number(123456789.123456789), "123456789.123");
        assert_eq!(format_number(-2.5), "-2.5");
    }

    fn twelve_digits(x: f64) -> f64 {
        format_number(x).parse().unwrap()
    }

    fn canonical_doc() -> impl Strategy<Value = ScenarioDocument> {
        prop::collection::vec((0.01f64..3.0, 0u8..3, 0.05f64..5.0, -2.0f64..2.0), 1..6).prop_map(|parts| {
            let n = parts.len();
            let mut start = 0.0;
            let mut epochs = Vec::new();
            for (i, (len, kind, size, rate)) in parts.into_iter().enumerate() {
                let end = if i + 1 == n { f64::INFINITY } else { twelve_digits(start + len) };
                let (size, rate) = (twelve_digits(size), twelve_digits(rate));
                let kind = match kind {
                    0 => EpochKind::Constant { size },
                    _ => EpochKind::Exponential { rate, entry_size: size },
                };
                epochs.push(Epoch { start, end, kind });
                start = end;
            }
            let text = render_scenario(&ScenarioDocument::from_profile(SizeProfile::new(epochs).unwrap()));
            parse_scenario(&text).unwrap()
        })
    }

    proptest! {
        #[test]
        fn parse_render_round_trip(doc in canonical_doc()) {
            let text = render_scenario(&doc);
            let again = parse_scenario(&text).unwrap();
            prop_assert_eq!(&again, &doc);
            prop_assert_eq!(render_scenario(&again), text);
        }

        #[test]
        fn parser_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
            if let Err(e) = parse_scenario_bytes(&bytes) {
                prop_assert!(e.span.line >= 1 && e.span.column >= 1);
            }
        }

        #[test]
        fn parser_never_panics_on_near_miss_text(
            words in prop::collection::vec(prop::sample::select(vec![
                "epoch", "0", "inf", "1", "-1", "0.5", "constant", "exp", "size=1", "rate=2",
                "size=", "size=-1", "rate=x", "#", "default", "gamma=1", "label", "\n", "1e400",
            ]), 0..20)
        ) {
            let text = words.join(" ");
            if let Err(e) = parse_scenario(&text) {
                prop_assert!(e.span.line >= 1 && e.span.column >= 1);
            }
        }

        #[test]
        fn check_matches_dense_sampling(doc in canonical_doc(), horizon in 0.5f64..8.0) {
            let report = check_scenario(&doc, horizon);
            let p = doc.profile();
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let grid = 10_000;
            let mut points: Vec<f64> = (0..=grid).map(|i| horizon * i as f64 / grid as f64).collect();
            for e in p.epochs() {
                if e.end <= horizon {
                    points.push(e.end);
                    // left limit approached from inside the epoch
                    points.push(e.end - 1e-12 * e.end.max(1.0));
                }
            }
            for t in points {
                let v = p.eval(t);
                lo = lo.min(v);
                hi = hi.max(v);
            }
            prop_assert!((report.min - lo).abs() <= 1e-9 * lo.max(1.0) + 1e-10, "{} vs {}", report.min, lo);
            prop_assert!((report.max - hi).abs() <= 1e-9 * hi.max(1.0) + 1e-10, "{} vs {}", report.max, hi);
        }
    }
}
