//! Research brief, per-stage projections and prompt templating.
//!
//! A brief carries six fields. Each downstream stage is handed a
//! [`BriefProjection`] holding only the fields that stage may read; fields
//! outside it are not present at all, so a template that names one fails to
//! render with [`Error::MissingField`].
//!
//! Templates use single-brace placeholders such as `{source_strategy}` or the
//! short symbols `{u}`, `{σ}`, `{κ}`, `{τ}`, `{λ}`, `{M}`. `{{` and `}}`
//! produce literal braces.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::allocation::LocaleMix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResearchBrief {
    pub query_understanding: String,
    pub source_strategy: String,
    pub keyword_guidance: String,
    pub summary_style: String,
    pub locale_hint: String,
    pub locale_mix: LocaleMix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BriefField {
    QueryUnderstanding,
    SourceStrategy,
    KeywordGuidance,
    SummaryStyle,
    LocaleHint,
    LocaleMix,
}

impl BriefField {
    pub const ALL: [BriefField; 6] = [
        BriefField::QueryUnderstanding,
        BriefField::SourceStrategy,
        BriefField::KeywordGuidance,
        BriefField::SummaryStyle,
        BriefField::LocaleHint,
        BriefField::LocaleMix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BriefField::QueryUnderstanding => "query_understanding",
            BriefField::SourceStrategy => "source_strategy",
            BriefField::KeywordGuidance => "keyword_guidance",
            BriefField::SummaryStyle => "summary_style",
            BriefField::LocaleHint => "locale_hint",
            BriefField::LocaleMix => "locale_mix",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BriefField::QueryUnderstanding => "u",
            BriefField::SourceStrategy => "σ",
            BriefField::KeywordGuidance => "κ",
            BriefField::SummaryStyle => "τ",
            BriefField::LocaleHint => "λ",
            BriefField::LocaleMix => "M",
        }
    }

    pub fn from_placeholder(name: &str) -> Option<BriefField> {
        BriefField::ALL
            .into_iter()
            .find(|f| f.name() == name || f.symbol() == name)
    }
}

impl fmt::Display for BriefField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Keyword,
    Selection,
    Summary,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Keyword, Stage::Selection, Stage::Summary];

    /// Fields the stage is allowed to read.
    pub fn fields(self) -> BTreeSet<BriefField> {
        use BriefField::*;
        match self {
            Stage::Keyword => [QueryUnderstanding, SourceStrategy, KeywordGuidance, LocaleHint, LocaleMix].into(),
            Stage::Selection => [QueryUnderstanding, SourceStrategy].into(),
            Stage::Summary => [QueryUnderstanding, SourceStrategy, SummaryStyle].into(),
        }
    }
}

/// The field set a stage receives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageProjection {
    pub stage: Stage,
    pub fields_present: BTreeSet<BriefField>,
}

impl From<Stage> for StageProjection {
    fn from(stage: Stage) -> Self {
        StageProjection {
            stage,
            fields_present: stage.fields(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldValue {
    Text(String),
    Mix(LocaleMix),
}

impl FieldValue {
    /// Text used when the value is interpolated into a prompt.
    pub fn render(&self) -> String {
        match self {
            FieldValue::Text(text) => text.clone(),
            FieldValue::Mix(mix) => mix
                .entries()
                .iter()
                .map(|e| format!("{}:{}", e.locale, e.weight))
                .collect::<Vec<_>>()
                .join(", "),
        }
    }
}

/// A subset of brief fields. Fields outside the subset are absent.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BriefProjection {
    fields: BTreeMap<BriefField, FieldValue>,
}

impl BriefProjection {
    pub fn get(&self, field: BriefField) -> Option<&FieldValue> {
        self.fields.get(&field)
    }

    pub fn field_names(&self) -> BTreeSet<BriefField> {
        self.fields.keys().copied().collect()
    }

    pub fn with(mut self, field: BriefField, value: FieldValue) -> Self {
        self.fields.insert(field, value);
        self
    }
}

impl ResearchBrief {
    pub fn value(&self, field: BriefField) -> FieldValue {
        match field {
            BriefField::QueryUnderstanding => FieldValue::Text(self.query_understanding.clone()),
            BriefField::SourceStrategy => FieldValue::Text(self.source_strategy.clone()),
            BriefField::KeywordGuidance => FieldValue::Text(self.keyword_guidance.clone()),
            BriefField::SummaryStyle => FieldValue::Text(self.summary_style.clone()),
            BriefField::LocaleHint => FieldValue::Text(self.locale_hint.clone()),
            BriefField::LocaleMix => FieldValue::Mix(self.locale_mix.clone()),
        }
    }
}

pub fn project_brief(brief: &ResearchBrief, stage: Stage) -> BriefProjection {
    BriefProjection {
        fields: stage
            .fields()
            .into_iter()
            .map(|f| (f, brief.value(f)))
            .collect(),
    }
}

/// Supplies the brief for a query.
pub trait BriefProvider {
    fn brief(&self, query: &str) -> Result<ResearchBrief>;
}

/// Returns a fixed brief regardless of the query.
#[derive(Debug, Clone)]
pub struct FixtureBriefProvider {
    brief: ResearchBrief,
}

impl FixtureBriefProvider {
    pub fn new(brief: ResearchBrief) -> Self {
        FixtureBriefProvider { brief }
    }

    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json)
            .map(FixtureBriefProvider::new)
            .map_err(|e| Error::Fixture(format!("brief: {e}")))
    }
}

impl BriefProvider for FixtureBriefProvider {
    fn brief(&self, _query: &str) -> Result<ResearchBrief> {
        Ok(self.brief.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Literal(String),
    Placeholder(BriefField),
}

/// A parsed prompt template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    segments: Vec<Segment>,
}

impl Template {
    pub fn parse(text: &str) -> Result<Template> {
        let mut segments = Vec::new();
        let mut literal = String::new();
        let mut chars = text.char_indices().peekable();

        while let Some((offset, c)) = chars.next() {
            match c {
                '{' if matches!(chars.peek(), Some((_, '{'))) => {
                    chars.next();
                    literal.push('{');
                }
                '}' if matches!(chars.peek(), Some((_, '}'))) => {
                    chars.next();
                    literal.push('}');
                }
                '{' => {
                    let mut name = String::new();
                    loop {
                        match chars.next() {
                            Some((_, '}')) => break,
                            Some((_, '{')) | None => {
                                return Err(Error::MalformedTemplate {
                                    offset,
                                    reason: "unclosed placeholder",
                                })
                            }
                            Some((_, ch)) => name.push(ch),
                        }
                    }
                    let name = name.trim();
                    let field = BriefField::from_placeholder(name)
                        .ok_or_else(|| Error::UnknownPlaceholder(name.to_owned()))?;
                    if !literal.is_empty() {
                        segments.push(Segment::Literal(std::mem::take(&mut literal)));
                    }
                    segments.push(Segment::Placeholder(field));
                }
                '}' => {
                    return Err(Error::MalformedTemplate {
                        offset,
                        reason: "unmatched closing brace",
                    })
                }
                _ => literal.push(c),
            }
        }
        if !literal.is_empty() {
            segments.push(Segment::Literal(literal));
        }
        Ok(Template { segments })
    }

    pub fn placeholders(&self) -> BTreeSet<BriefField> {
        self.segments
            .iter()
            .filter_map(|s| match s {
                Segment::Placeholder(f) => Some(*f),
                Segment::Literal(_) => None,
            })
            .collect()
    }

    /// Substitutes every placeholder for `field` with `value`, leaving the
    /// others in place.
    pub fn bind(&self, field: BriefField, value: &str) -> Template {
        let mut segments: Vec<Segment> = Vec::with_capacity(self.segments.len());
        for segment in &self.segments {
            let text = match segment {
                Segment::Placeholder(f) if *f == field => value,
                Segment::Literal(text) => text.as_str(),
                Segment::Placeholder(_) => {
                    segments.push(segment.clone());
                    continue;
                }
            };
            match segments.last_mut() {
                Some(Segment::Literal(prev)) => prev.push_str(text),
                _ => segments.push(Segment::Literal(text.to_owned())),
            }
        }
        segments.retain(|s| !matches!(s, Segment::Literal(t) if t.is_empty()));
        Template { segments }
    }

    /// Renders against a projection; every placeholder must name a field
    /// the projection carries.
    pub fn render(&self, projection: &BriefProjection) -> Result<String> {
        let mut out = String::new();
        for segment in &self.segments {
            match segment {
                Segment::Literal(text) => out.push_str(text),
                Segment::Placeholder(field) => {
                    let value = projection
                        .get(*field)
                        .ok_or_else(|| Error::MissingField(field.name().to_owned()))?;
                    out.push_str(&value.render());
                }
            }
        }
        Ok(out)
    }

    /// Text with placeholders re-emitted in `{name}` form and braces escaped.
    pub fn source_text(&self) -> String {
        let mut out = String::new();
        for segment in &self.segments {
            match segment {
                Segment::Literal(text) => out.push_str(&text.replace('{', "{{").replace('}', "}}")),
                Segment::Placeholder(field) => {
                    out.push('{');
                    out.push_str(field.name());
                    out.push('}');
                }
            }
        }
        out
    }
}

pub fn render_brief_into_prompt(projection: &BriefProjection, template: &str) -> Result<String> {
    Template::parse(template)?.render(projection)
}

/// Instruction-following capability, semantic clarity and stage count for
/// the convergence calculator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoiParameters {
    pub alpha: f64,
    pub beta: f64,
    pub k: u32,
}

impl LoiParameters {
    pub fn new(alpha: f64, beta: f64, k: u32) -> Result<Self> {
        let params = LoiParameters { alpha, beta, k };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| x > 0.0 && x <= 1.0;
        if !unit(self.alpha) {
            return Err(Error::DomainError(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if !unit(self.beta) {
            return Err(Error::DomainError(format!("beta must lie in (0, 1], got {}", self.beta)));
        }
        if self.k < 1 {
            return Err(Error::DomainError("k must be at least 1".into()));
        }
        Ok(())
    }
}

/// Probability that at least one of `k` independent stages succeeds when
/// each succeeds with probability `alpha * beta`: `1 - (1 - alpha*beta)^k`.
pub fn loi_success_probability(params: &LoiParameters) -> Result<f64> {
    params.validate()?;
    let p = params.alpha * params.beta;
    // -expm1(k * ln(1 - p)) keeps precision when p is tiny.
    Ok(-(f64::from(params.k) * (-p).ln_1p()).exp_m1())
}
