//! Feature-configuration file: the side information behaviour dimensions
//! need that PDDL cannot express (resource objects, fluent boxes, goal
//! utilities) plus run parameters.
//!
//! ```json
//! {
//!   "dimensions": [
//!     {"kind": "goal_order"},
//!     {"kind": "resource_utilisation", "resources": ["rover0", "rover1"]},
//!     {"kind": "cost_bound"},
//!     {"kind": "utility_value", "utilities": {"(communicated_soil_data waypoint2)": 1}},
//!     {"kind": "numeric_fluent", "fluent": "energy_rover0", "min": 0, "max": 100, "epsilon": 5}
//!   ],
//!   "quality_q": 1.0,
//!   "soft_goals": false,
//!   "k": 5
//! }
//! ```
//!
//! Numbers may be JSON numbers (read exactly from their decimal text) or
//! strings such as `"1/3"`.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::GroundAtom;
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, thiserror::Error)]
pub enum FeatureConfigError {
    #[error("feature configuration schema violation: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("invalid feature configuration: {0}")]
    Invalid(String),
}

fn de_rational<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
    let v = serde_json::Value::deserialize(d)?;
    let text = match &v {
        serde_json::Value::Number(n) => n.to_string(),
        serde_json::Value::String(s) => s.clone(),
        other => return Err(D::Error::custom(format!("expected a number, found {other}"))),
    };
    parse_rational(&text).ok_or_else(|| D::Error::custom(format!("not an exact number: {text}")))
}

fn de_opt_rational<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
    de_rational(d).map(Some)
}

fn ser_rational<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    if r.is_integer() {
        s.serialize_i64(r.to_integer())
    } else {
        s.serialize_str(&format_rational(r))
    }
}

fn ser_opt_rational<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => ser_rational(r, s),
        None => s.serialize_none(),
    }
}

/// `⟨fluent, min, max, ε⟩`: the fluent's final value is bucketed into
/// `ceil((max - min) / ε)` boxes, the last one closed at `max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericBox {
    pub fluent: String,
    #[serde(deserialize_with = "de_rational", serialize_with = "ser_rational")]
    pub min: Rational,
    #[serde(deserialize_with = "de_rational", serialize_with = "ser_rational")]
    pub max: Rational,
    #[serde(deserialize_with = "de_rational", serialize_with = "ser_rational")]
    pub epsilon: Rational,
}

impl NumericBox {
    pub fn box_count(&self) -> i64 {
        crate::rational::ceil_div(self.max - self.min, self.epsilon)
    }

    /// Box index of `value`, or `None` outside `[min, max]`.
    pub fn box_of(&self, value: Rational) -> Option<i64> {
        if value < self.min || value > self.max {
            return None;
        }
        let idx = ((value - self.min) / self.epsilon).floor().to_integer();
        Some(idx.min(self.box_count() - 1))
    }

    /// Fluent reference as a ground atom; accepts `(energy rover0)`,
    /// `energy rover0` and `energy_rover0` spellings (the last is resolved
    /// against the task).
    pub fn fluent_atom(&self) -> Option<GroundAtom> {
        GroundAtom::parse_loose(&self.fluent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DimensionSpec {
    CostBound,
    ResourceUtilisation {
        resources: Vec<String>,
    },
    GoalOrder,
    UtilityValue {
        #[serde(deserialize_with = "de_utilities", serialize_with = "ser_utilities")]
        utilities: Vec<(String, Rational)>,
    },
    NumericFluent(NumericBox),
}

fn de_utilities<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(String, Rational)>, D::Error> {
    let m = serde_json::Map::deserialize(d)?;
    let mut out = Vec::new();
    for (k, v) in m {
        let r = de_rational(v).map_err(D::Error::custom)?;
        out.push((k, r));
    }
    Ok(out)
}

fn ser_utilities<S: Serializer>(u: &[(String, Rational)], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut m = s.serialize_map(Some(u.len()))?;
    for (k, v) in u {
        if v.is_integer() {
            m.serialize_entry(k, &v.to_integer())?;
        } else {
            m.serialize_entry(k, &format_rational(v))?;
        }
    }
    m.end()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostBoundSource {
    Quality(Rational),
    Explicit(u32),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureConfig {
    #[serde(default)]
    pub dimensions: Vec<DimensionSpec>,
    #[serde(
        default,
        deserialize_with = "de_opt_rational",
        serialize_with = "ser_opt_rational",
        skip_serializing_if = "Option::is_none"
    )]
    pub quality_q: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_bound: Option<u32>,
    #[serde(default)]
    pub soft_goals: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

impl FeatureConfig {
    pub fn cost_bound_source(&self) -> Option<CostBoundSource> {
        match (self.quality_q, self.cost_bound) {
            (Some(q), None) => Some(CostBoundSource::Quality(q)),
            (None, Some(c)) => Some(CostBoundSource::Explicit(c)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), FeatureConfigError> {
        let bad = |m: String| Err(FeatureConfigError::Invalid(m));
        if self.quality_q.is_some() && self.cost_bound.is_some() {
            return bad("give either `quality_q` or `cost_bound`, not both".into());
        }
        if let Some(q) = self.quality_q {
            if q <= Rational::from_integer(0) {
                return bad(format!("quality_q must be positive, got {}", format_rational(&q)));
            }
        }
        if self.k == Some(0) {
            return bad("k must be at least 1".into());
        }
        let mut seen_kinds = Vec::new();
        for d in &self.dimensions {
            match d {
                DimensionSpec::NumericFluent(b) => {
                    if b.epsilon <= Rational::from_integer(0) {
                        return bad(format!("epsilon for `{}` must be positive", b.fluent));
                    }
                    if b.min >= b.max {
                        return bad(format!("min must be below max for `{}`", b.fluent));
                    }
                }
                DimensionSpec::UtilityValue { utilities } => {
                    for (g, u) in utilities {
                        if *u < Rational::from_integer(0) {
                            return bad(format!("utility of `{g}` is negative"));
                        }
                    }
                }
                DimensionSpec::ResourceUtilisation { resources } => {
                    let mut r = resources.clone();
                    r.sort();
                    r.dedup();
                    if r.len() != resources.len() {
                        return bad("duplicate resource names".into());
                    }
                }
                _ => {}
            }
            let kind = std::mem::discriminant(d);
            if !matches!(d, DimensionSpec::NumericFluent(_)) {
                if seen_kinds.contains(&kind) {
                    return bad("only numeric_fluent dimensions may repeat".into());
                }
                seen_kinds.push(kind);
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("feature config serialises")
    }
}

/// Parse and validate a feature-configuration JSON document.
pub fn parse_addinfo(text: &str) -> Result<FeatureConfig, FeatureConfigError> {
    let mut cfg: FeatureConfig = serde_json::from_str(text)?;
    for d in &mut cfg.dimensions {
        if let DimensionSpec::ResourceUtilisation { resources } = d {
            for r in resources.iter_mut() {
                *r = r.to_ascii_lowercase();
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}
