//! JSON scenario files.
//!
//! ```json
//! {
//!   "name": "table1",
//!   "gamma": ["1", "0.6", "0.5"],
//!   "ranking": "rbr",
//!   "pricing": "gsp",
//!   "bidders": [
//!     { "id": "1", "value_score": "26", "score": "25" },
//!     { "id": "2", "valuation": "22", "relevance": "1", "bid": "20" }
//!   ],
//!   "mediators": [{ "strategy": "flatten_top", "L": 5, "alpha": "0.5" }]
//! }
//! ```
//!
//! Numbers may be JSON numbers or strings; strings are parsed exactly when
//! the scalar type is exact. A bidder gives either `valuation` or
//! `value_score` (`e·t`), and either `bid` or `score`; `relevance` defaults
//! to 1. Trailing zeros in `gamma` are accepted as explicit "no slot"
//! entries and dropped.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::auction::{AuctionConfig, Bidder, CtrCurve, Pricing, Ranking};
use crate::error::ScenarioError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpecStrategy {
    FlattenTop,
    FlattenMiddle,
    Slide,
    LadderedMin,
}

impl SpecStrategy {
    pub fn name(self) -> &'static str {
        match self {
            SpecStrategy::FlattenTop => "flatten_top",
            SpecStrategy::FlattenMiddle => "flatten_middle",
            SpecStrategy::Slide => "slide",
            SpecStrategy::LadderedMin => "laddered_min",
        }
    }

    fn parse(text: &str) -> Option<Self> {
        match text {
            "flatten_top" => Some(SpecStrategy::FlattenTop),
            "flatten_middle" => Some(SpecStrategy::FlattenMiddle),
            "slide" => Some(SpecStrategy::Slide),
            "laddered_min" => Some(SpecStrategy::LadderedMin),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MediatorSpec<T> {
    pub strategy: SpecStrategy,
    /// Number of members, `L`.
    pub members: usize,
    /// Non-members ranked above the block, `l`.
    pub above: usize,
    pub anchor: usize,
    pub score: Option<T>,
    pub alpha: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub name: String,
    pub curve: CtrCurve<T>,
    pub bidders: Vec<Bidder<T>>,
    pub config: AuctionConfig<T>,
    pub mediators: Vec<MediatorSpec<T>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RawNumber {
    Text(String),
    Number(serde_json::Number),
}

impl RawNumber {
    fn text(&self) -> String {
        match self {
            RawNumber::Text(t) => t.clone(),
            RawNumber::Number(n) => n.to_string(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    gamma: Vec<RawNumber>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slots: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ranking: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pricing: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reserve_score: Option<RawNumber>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tolerance: Option<RawNumber>,
    bidders: Vec<RawBidder>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    mediators: Vec<RawMediator>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBidder {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    valuation: Option<RawNumber>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value_score: Option<RawNumber>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    relevance: Option<RawNumber>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bid: Option<RawNumber>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    score: Option<RawNumber>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMediator {
    strategy: String,
    #[serde(rename = "L")]
    members: usize,
    #[serde(rename = "l", default, skip_serializing_if = "Option::is_none")]
    above: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    anchor: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    score: Option<RawNumber>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<RawNumber>,
}

fn number<T: Scalar>(raw: &RawNumber, field: &str) -> Result<T, ScenarioError> {
    T::from_decimal(&raw.text()).ok_or_else(|| ScenarioError::field(field, format!("`{}` is not a number", raw.text())))
}

fn text<T: Scalar>(value: &T) -> RawNumber {
    RawNumber::Text(value.to_exact_string())
}

impl<T: Scalar> Scenario<T> {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let raw: RawScenario = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawScenario) -> Result<Self, ScenarioError> {
        let mut gammas = raw
            .gamma
            .iter()
            .enumerate()
            .map(|(i, g)| number::<T>(g, &format!("gamma[{i}]")))
            .collect::<Result<Vec<T>, _>>()?;
        while gammas.len() > 1 && gammas.last().is_some_and(|g| g.is_zero()) {
            gammas.pop();
        }
        let curve = CtrCurve::new(gammas).map_err(|e| ScenarioError::field("gamma", e.to_string()))?;
        if let Some(slots) = raw.slots {
            if slots != curve.slots() {
                return Err(ScenarioError::field(
                    "slots",
                    format!("{slots} slots declared but gamma has {} positive entries", curve.slots()),
                ));
            }
        }

        let ranking = match &raw.ranking {
            None => Ranking::Rbr,
            Some(r) => Ranking::parse(r).ok_or_else(|| ScenarioError::field("ranking", format!("unknown ranking `{r}`")))?,
        };
        let pricing = match &raw.pricing {
            None => Pricing::Gsp,
            Some(p) => Pricing::parse(p).ok_or_else(|| ScenarioError::field("pricing", format!("unknown pricing `{p}`")))?,
        };
        let mut config = AuctionConfig::<T>::new(ranking, pricing);
        if let Some(r) = &raw.reserve_score {
            config.reserve_score = number(r, "reserve_score")?;
        }
        if let Some(t) = &raw.tolerance {
            config.tolerance = number(t, "tolerance")?;
        }
        config.validate().map_err(|e| ScenarioError::field("config", e.to_string()))?;

        if raw.bidders.is_empty() {
            return Err(ScenarioError::field("bidders", "at least one bidder is required"));
        }
        let mut bidders = Vec::with_capacity(raw.bidders.len());
        for (i, b) in raw.bidders.iter().enumerate() {
            let field = |name: &str| format!("bidders[{i}].{name}");
            let relevance = match &b.relevance {
                Some(e) => number::<T>(e, &field("relevance"))?,
                None => T::one(),
            };
            if !relevance.gt_zero() {
                return Err(ScenarioError::field(field("relevance"), "must be positive"));
            }
            let valuation = match (&b.valuation, &b.value_score) {
                (Some(t), None) => number::<T>(t, &field("valuation"))?,
                (None, Some(x)) => number::<T>(x, &field("value_score"))? / relevance.clone(),
                _ => return Err(ScenarioError::field(field("valuation"), "give exactly one of valuation or value_score")),
            };
            let weight = match ranking {
                Ranking::Rbb => T::one(),
                Ranking::Rbr => relevance.clone(),
            };
            let bid = match (&b.bid, &b.score) {
                (Some(v), None) => number::<T>(v, &field("bid"))?,
                (None, Some(r)) => number::<T>(r, &field("score"))? / weight,
                _ => return Err(ScenarioError::field(field("bid"), "give exactly one of bid or score")),
            };
            if valuation.lt_zero() {
                return Err(ScenarioError::field(field("valuation"), "must be non-negative"));
            }
            if bid.lt_zero() {
                return Err(ScenarioError::field(field("bid"), "must be non-negative"));
            }
            bidders.push(Bidder::new(b.id.clone(), valuation, relevance, bid));
        }

        let n = bidders.len();
        let mut mediators = Vec::with_capacity(raw.mediators.len());
        for (i, m) in raw.mediators.iter().enumerate() {
            let field = |name: &str| format!("mediators[{i}].{name}");
            let strategy = SpecStrategy::parse(&m.strategy)
                .ok_or_else(|| ScenarioError::field(field("strategy"), format!("unknown strategy `{}`", m.strategy)))?;
            let above = m.above.unwrap_or(0);
            if m.members == 0 || above + m.members > n {
                return Err(ScenarioError::field(field("L"), format!("ranks {}..={} exceed {n} bidders", above + 1, above + m.members)));
            }
            let anchor = m.anchor.unwrap_or(1);
            if !(1..=2).contains(&anchor) {
                return Err(ScenarioError::field(field("anchor"), "must be 1 or 2"));
            }
            let spec = MediatorSpec {
                strategy,
                members: m.members,
                above,
                anchor,
                score: m.score.as_ref().map(|s| number(s, &field("score"))).transpose()?,
                alpha: m.alpha.as_ref().map(|a| number(a, &field("alpha"))).transpose()?,
            };
            if strategy == SpecStrategy::Slide && spec.score.is_none() {
                return Err(ScenarioError::field(field("score"), "slide needs a uniform score"));
            }
            mediators.push(spec);
        }

        Ok(Scenario { name: raw.name, curve, bidders, config, mediators })
    }

    fn to_raw(&self) -> RawScenario {
        RawScenario {
            name: self.name.clone(),
            gamma: self.curve.gammas().iter().map(text).collect(),
            slots: None,
            ranking: Some(self.config.ranking.name().to_string()),
            pricing: Some(self.config.pricing.name().to_string()),
            reserve_score: Some(text(&self.config.reserve_score)),
            tolerance: Some(text(&self.config.tolerance)),
            bidders: self
                .bidders
                .iter()
                .map(|b| RawBidder {
                    id: b.id.clone(),
                    valuation: Some(text(&b.valuation)),
                    value_score: None,
                    relevance: Some(text(&b.relevance)),
                    bid: Some(text(&b.bid)),
                    score: None,
                })
                .collect(),
            mediators: self
                .mediators
                .iter()
                .map(|m| RawMediator {
                    strategy: m.strategy.name().to_string(),
                    members: m.members,
                    above: Some(m.above),
                    anchor: Some(m.anchor),
                    score: m.score.as_ref().map(text),
                    alpha: m.alpha.as_ref().map(text),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.to_raw()).expect("scenario serializes");
        out.push('\n');
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json())
            .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use num_rational::BigRational;

    const TABLE1: &str = include_str!("../../../scenarios/table1.json");

    #[test]
    fn bundled_table1_matches_fixture() {
        let s = Scenario::<BigRational>::from_json(TABLE1).unwrap();
        let (bidders, curve, config) = fixtures::table1::<BigRational>();
        assert_eq!(s.bidders.len(), 9);
        assert_eq!(s.curve.slots(), 8);
        assert_eq!(s.bidders, bidders);
        assert_eq!(s.curve, curve);
        assert_eq!(s.config, config);
    }

    #[test]
    fn empty_bidders_rejected() {
        let err = Scenario::<f64>::from_json(r#"{"name":"x","gamma":[1],"bidders":[]}"#).unwrap_err();
        assert!(matches!(err, ScenarioError::Validation { ref field, .. } if field == "bidders"));
    }

    #[test]
    fn score_without_relevance_defaults_to_unit() {
        let s = Scenario::<f64>::from_json(r#"{"name":"x","gamma":[1],"bidders":[{"id":"a","value_score":3,"score":2}]}"#)
            .unwrap();
        assert_eq!(s.bidders[0], Bidder::new("a", 3.0, 1.0, 2.0));
    }

    #[test]
    fn relevance_divides_value_score_and_score() {
        let s = Scenario::<BigRational>::from_json(
            r#"{"name":"x","gamma":["1"],"bidders":[{"id":"a","relevance":"0.5","value_score":"3","score":"2"}]}"#,
        )
        .unwrap();
        assert_eq!(s.bidders[0].valuation, BigRational::from_decimal("6").unwrap());
        assert_eq!(s.bidders[0].bid, BigRational::from_decimal("4").unwrap());
    }

    #[test]
    fn validation_names_the_field() {
        let cases = [
            (r#"{"name":"x","gamma":[1,1],"bidders":[{"id":"a","valuation":1,"bid":1}]}"#, "gamma"),
            (r#"{"name":"x","gamma":[1,0,0.5],"bidders":[{"id":"a","valuation":1,"bid":1}]}"#, "gamma"),
            (r#"{"name":"x","gamma":[1],"bidders":[{"id":"a","valuation":1,"bid":-1}]}"#, "bidders[0].bid"),
            (r#"{"name":"x","gamma":[1],"bidders":[{"id":"a","valuation":1,"relevance":0,"bid":1}]}"#, "bidders[0].relevance"),
            (r#"{"name":"x","gamma":[1],"bidders":[{"id":"a","bid":1}]}"#, "bidders[0].valuation"),
            (r#"{"name":"x","gamma":[1],"slots":2,"bidders":[{"id":"a","valuation":1,"bid":1}]}"#, "slots"),
            (r#"{"name":"x","gamma":[1],"bidders":[{"id":"a","valuation":"abc","bid":1}]}"#, "bidders[0].valuation"),
            (
                r#"{"name":"x","gamma":[1],"bidders":[{"id":"a","valuation":1,"bid":1}],"mediators":[{"strategy":"flatten_top","L":2}]}"#,
                "mediators[0].L",
            ),
        ];
        for (json, expected) in cases {
            match Scenario::<f64>::from_json(json) {
                Err(ScenarioError::Validation { field, .. }) => assert_eq!(field, expected, "{json}"),
                other => panic!("{json}: {other:?}"),
            }
        }
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = Scenario::<f64>::from_json("{\n  \"name\": \"x\",\n  \"gamma\": [1,\n}").unwrap_err();
        match err {
            ScenarioError::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let s = Scenario::<BigRational>::from_json(TABLE1).unwrap();
        let again = Scenario::<BigRational>::from_json(&s.to_json()).unwrap();
        assert_eq!(s, again);
        assert_eq!(s.to_json(), again.to_json());
    }
}
