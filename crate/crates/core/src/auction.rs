//! Ranking, slot allocation and pricing for a single position auction.
//!
//! Positions and ranks are 1-based throughout, matching the usual
//! presentation of slot auctions. A profile always keeps every bidder: ranks
//! beyond the number of slots (or scores below the reserve) are placed but
//! unslotted, with zero price and zero payoff.

use std::cmp::Ordering;

use crate::error::{AuctionError, Result};
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Bidder<T> {
    pub id: String,
    /// Private per-click value.
    pub valuation: T,
    /// Quality score; multiplies bids under rank-by-revenue.
    pub relevance: T,
    pub bid: T,
}

impl<T: Scalar> Bidder<T> {
    pub fn new(id: impl Into<String>, valuation: T, relevance: T, bid: T) -> Self {
        Bidder { id: id.into(), valuation, relevance, bid }
    }

    /// Relevance 1, so scores equal bids under either ranking.
    pub fn unit(id: impl Into<String>, valuation: T, bid: T) -> Self {
        Bidder::new(id, valuation, T::one(), bid)
    }

    /// Expected value per unit of position CTR: `e·t`.
    pub fn value_score(&self) -> T {
        self.relevance.clone() * self.valuation.clone()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: &str| {
            Err(AuctionError::InvalidBidder { id: self.id.clone(), reason: reason.to_string() })
        };
        if !self.relevance.gt_zero() {
            return fail("relevance must be positive");
        }
        if self.valuation.lt_zero() {
            return fail("valuation must be non-negative");
        }
        if self.bid.lt_zero() {
            return fail("bid must be non-negative");
        }
        Ok(())
    }
}

/// Position effects `γ_1 > … > γ_K > 0`; every position past `K` is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CtrCurve<T> {
    gammas: Vec<T>,
}

impl<T: Scalar> CtrCurve<T> {
    pub fn new(gammas: Vec<T>) -> Result<Self> {
        if gammas.is_empty() {
            return Err(AuctionError::InvalidCurve("at least one slot is required".into()));
        }
        for (i, g) in gammas.iter().enumerate() {
            if !g.gt_zero() {
                return Err(AuctionError::InvalidCurve(format!("gamma {} must be positive", i + 1)));
            }
        }
        for (i, pair) in gammas.windows(2).enumerate() {
            if pair[1] >= pair[0] {
                return Err(AuctionError::InvalidCurve(format!(
                    "gammas must be strictly decreasing (gamma {} >= gamma {})",
                    i + 2,
                    i + 1
                )));
            }
        }
        Ok(CtrCurve { gammas })
    }

    /// Number of slots `K`.
    pub fn slots(&self) -> usize {
        self.gammas.len()
    }

    /// `γ_position`, zero for positions outside `1..=K`.
    pub fn gamma(&self, position: usize) -> T {
        position
            .checked_sub(1)
            .and_then(|i| self.gammas.get(i))
            .cloned()
            .unwrap_or_else(T::zero)
    }

    pub fn gammas(&self) -> &[T] {
        &self.gammas
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ranking {
    /// Rank by bid.
    Rbb,
    /// Rank by revenue: bid times relevance.
    Rbr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pricing {
    /// Generalized first price: pay your own bid.
    Gfp,
    /// Generalized second price: pay just enough to keep the slot.
    Gsp,
    /// Laddered (truthful) pricing over the CTR gaps below.
    Laddered,
}

impl Ranking {
    pub fn name(self) -> &'static str {
        match self {
            Ranking::Rbb => "rbb",
            Ranking::Rbr => "rbr",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text.to_ascii_lowercase().as_str() {
            "rbb" => Some(Ranking::Rbb),
            "rbr" => Some(Ranking::Rbr),
            _ => None,
        }
    }
}

impl Pricing {
    pub fn name(self) -> &'static str {
        match self {
            Pricing::Gfp => "gfp",
            Pricing::Gsp => "gsp",
            Pricing::Laddered => "laddered",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text.to_ascii_lowercase().as_str() {
            "gfp" => Some(Pricing::Gfp),
            "gsp" => Some(Pricing::Gsp),
            "laddered" | "ladder" => Some(Pricing::Laddered),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuctionConfig<T> {
    pub ranking: Ranking,
    pub pricing: Pricing,
    /// Score floor; bidders below it are ineligible and the last eligible
    /// slot pays it.
    pub reserve_score: T,
    /// Slack applied to every `>`/`>=` comparison.
    pub tolerance: T,
}

impl<T: Scalar> AuctionConfig<T> {
    pub fn new(ranking: Ranking, pricing: Pricing) -> Self {
        AuctionConfig {
            ranking,
            pricing,
            reserve_score: T::zero(),
            tolerance: T::from_decimal("1e-9").expect("literal"),
        }
    }

    pub fn gsp() -> Self {
        AuctionConfig::new(Ranking::Rbr, Pricing::Gsp)
    }

    pub fn with_pricing(&self, pricing: Pricing) -> Self {
        AuctionConfig { pricing, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.tolerance.gt_zero() {
            return Err(AuctionError::InvalidConfig("tolerance must be positive".into()));
        }
        if self.reserve_score.lt_zero() {
            return Err(AuctionError::InvalidConfig("reserve_score must be non-negative".into()));
        }
        Ok(())
    }

    /// Ranking score of a bidder placing `bid`.
    pub fn score_of(&self, bidder: &Bidder<T>, bid: &T) -> T {
        match self.ranking {
            Ranking::Rbb => bid.clone(),
            Ranking::Rbr => bidder.relevance.clone() * bid.clone(),
        }
    }

    /// Factor turning a score into that bidder's per-click bid.
    pub fn weight(&self, bidder: &Bidder<T>) -> T {
        match self.ranking {
            Ranking::Rbb => T::one(),
            Ranking::Rbr => bidder.relevance.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedEntry<T> {
    /// Index into the bidder slice the profile was built from.
    pub bidder: usize,
    pub score: T,
    /// Lower wins among equal scores.
    pub tie_rank: usize,
}

/// Bidders in slot order. Equal scores are ordered by `tie_rank`, which is
/// how flattened blocks keep the infinitesimal ordering of their original
/// ranks without perturbing any price.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedProfile<T> {
    entries: Vec<RankedEntry<T>>,
}

impl<T: Scalar> RankedProfile<T> {
    pub fn from_entries(mut entries: Vec<RankedEntry<T>>) -> Self {
        entries.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(Ordering::Equal)
                .then(a.tie_rank.cmp(&b.tie_rank))
        });
        RankedProfile { entries }
    }

    pub fn entries(&self) -> &[RankedEntry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry at 1-based `rank`.
    pub fn at(&self, rank: usize) -> Option<&RankedEntry<T>> {
        rank.checked_sub(1).and_then(|i| self.entries.get(i))
    }

    pub fn score(&self, rank: usize) -> Option<&T> {
        self.at(rank).map(|e| &e.score)
    }

    pub fn scores(&self) -> Vec<T> {
        self.entries.iter().map(|e| e.score.clone()).collect()
    }

    /// 1-based rank of the bidder with slice index `bidder`.
    pub fn rank_of(&self, bidder: usize) -> Option<usize> {
        self.entries.iter().position(|e| e.bidder == bidder).map(|i| i + 1)
    }
}

/// Ranks bidders by score, breaking ties by input order.
pub fn rank<T: Scalar>(bidders: &[Bidder<T>], config: &AuctionConfig<T>) -> Result<RankedProfile<T>> {
    config.validate()?;
    for b in bidders {
        b.validate()?;
    }
    let entries = bidders
        .iter()
        .enumerate()
        .map(|(i, b)| RankedEntry { bidder: i, score: config.score_of(b, &b.bid), tie_rank: i })
        .collect();
    Ok(RankedProfile::from_entries(entries))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositionPrice<T> {
    pub position: usize,
    pub bidder: usize,
    /// Score that sets the second price: the next eligible score, or the
    /// reserve when nobody eligible is below.
    pub next_score: T,
    pub price_per_click: T,
    /// `e·PPC`: expected payment per unit of position CTR.
    pub score_price: T,
}

/// Number of slotted positions: eligible bidders, capped at `K`.
pub fn slotted_count<T: Scalar>(ranked: &RankedProfile<T>, curve: &CtrCurve<T>, config: &AuctionConfig<T>) -> usize {
    ranked
        .entries()
        .iter()
        .take(curve.slots())
        .take_while(|e| e.score >= config.reserve_score)
        .count()
}

fn next_score<T: Scalar>(ranked: &RankedProfile<T>, rank: usize, config: &AuctionConfig<T>) -> T {
    match ranked.score(rank + 1) {
        Some(s) if *s >= config.reserve_score => s.clone(),
        _ => config.reserve_score.clone(),
    }
}

/// Per-click prices for every slotted position.
pub fn price<T: Scalar>(
    ranked: &RankedProfile<T>,
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    config: &AuctionConfig<T>,
) -> Result<Vec<PositionPrice<T>>> {
    (1..=slotted_count(ranked, curve, config))
        .map(|position| price_at(ranked, bidders, curve, config, position))
        .collect()
}

pub fn price_at<T: Scalar>(
    ranked: &RankedProfile<T>,
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    config: &AuctionConfig<T>,
    position: usize,
) -> Result<PositionPrice<T>> {
    if position == 0 || position > slotted_count(ranked, curve, config) {
        return Err(AuctionError::NoSlot { position, slots: curve.slots() });
    }
    let entry = ranked.at(position).expect("slotted position is ranked");
    let bidder = bidders.get(entry.bidder).ok_or_else(|| {
        AuctionError::InvalidArgument(format!("ranked profile refers to missing bidder {}", entry.bidder))
    })?;
    let weight = config.weight(bidder);
    let next = next_score(ranked, position, config);

    let price_per_click = match config.pricing {
        Pricing::Gsp => next.clone() / weight,
        Pricing::Gfp => entry.score.clone() / weight,
        Pricing::Laddered => {
            // Σ_{k=j}^{K} (γ_k − γ_{k+1})·next_k, normalized by γ_j·w_j.
            let ladder = scalar::sum((position..=curve.slots()).map(|k| {
                (curve.gamma(k) - curve.gamma(k + 1)) * next_score(ranked, k, config)
            }));
            ladder / (curve.gamma(position) * weight)
        }
    };
    let score_price = bidder.relevance.clone() * price_per_click.clone();
    Ok(PositionPrice { position, bidder: entry.bidder, next_score: next, price_per_click, score_price })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Placement<T> {
    pub position: usize,
    pub bidder: usize,
    pub score: T,
    pub slotted: bool,
    pub next_score: T,
    pub price_per_click: T,
    pub score_price: T,
    /// `γ_j·(e·t − e·PPC)`.
    pub payoff: T,
}

impl<T: Scalar> Placement<T> {
    /// Expected payment `γ_j·e·PPC`.
    pub fn expected_payment(&self, curve: &CtrCurve<T>) -> T {
        curve.gamma(self.position) * self.score_price.clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuctionOutcome<T> {
    pub config: AuctionConfig<T>,
    pub ranked: RankedProfile<T>,
    /// One placement per bidder, in rank order.
    pub placements: Vec<Placement<T>>,
    pub auctioneer_revenue: T,
}

impl<T: Scalar> AuctionOutcome<T> {
    pub fn len(&self) -> usize {
        self.placements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placements.is_empty()
    }

    pub fn at(&self, position: usize) -> Option<&Placement<T>> {
        position.checked_sub(1).and_then(|i| self.placements.get(i))
    }

    pub fn slotted(&self) -> impl Iterator<Item = &Placement<T>> {
        self.placements.iter().filter(|p| p.slotted)
    }

    pub fn position_of(&self, bidder: usize) -> Option<usize> {
        self.placements.iter().find(|p| p.bidder == bidder).map(|p| p.position)
    }

    pub fn payoffs(&self) -> Vec<T> {
        self.placements.iter().map(|p| p.payoff.clone()).collect()
    }

    pub fn score_prices(&self) -> Vec<T> {
        self.placements.iter().map(|p| p.score_price.clone()).collect()
    }
}

/// Prices an existing ranked profile and computes expected payoffs.
pub fn outcome_for<T: Scalar>(
    ranked: RankedProfile<T>,
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    config: &AuctionConfig<T>,
) -> Result<AuctionOutcome<T>> {
    if ranked.is_empty() {
        return Err(AuctionError::NoBidders);
    }
    config.validate()?;
    let prices = price(&ranked, bidders, curve, config)?;
    let mut placements = Vec::with_capacity(ranked.len());
    for (i, entry) in ranked.entries().iter().enumerate() {
        let position = i + 1;
        let bidder = bidders.get(entry.bidder).ok_or_else(|| {
            AuctionError::InvalidArgument(format!("ranked profile refers to missing bidder {}", entry.bidder))
        })?;
        let placement = match prices.get(i) {
            Some(p) => Placement {
                position,
                bidder: entry.bidder,
                score: entry.score.clone(),
                slotted: true,
                next_score: p.next_score.clone(),
                price_per_click: p.price_per_click.clone(),
                score_price: p.score_price.clone(),
                payoff: curve.gamma(position) * (bidder.value_score() - p.score_price.clone()),
            },
            None => Placement {
                position,
                bidder: entry.bidder,
                score: entry.score.clone(),
                slotted: false,
                next_score: T::zero(),
                price_per_click: T::zero(),
                score_price: T::zero(),
                payoff: T::zero(),
            },
        };
        placements.push(placement);
    }
    let auctioneer_revenue = scalar::sum(placements.iter().map(|p| p.expected_payment(curve)));
    Ok(AuctionOutcome { config: config.clone(), ranked, placements, auctioneer_revenue })
}

/// Ranks, prices and settles payoffs for the submitted bids.
pub fn outcome<T: Scalar>(
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    config: &AuctionConfig<T>,
) -> Result<AuctionOutcome<T>> {
    if bidders.is_empty() {
        return Err(AuctionError::NoBidders);
    }
    let ranked = rank(bidders, config)?;
    outcome_for(ranked, bidders, curve, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::table1;
    use num_rational::BigRational;

    fn q(text: &str) -> BigRational {
        BigRational::from_decimal(text).unwrap()
    }

    fn qs(items: &[&str]) -> Vec<BigRational> {
        items.iter().map(|s| q(s)).collect()
    }

    #[test]
    fn table1_ranks_in_listed_order() {
        let (bidders, _, config) = table1::<BigRational>();
        let ranked = rank(&bidders, &config).unwrap();
        let order: Vec<usize> = ranked.entries().iter().map(|e| e.bidder).collect();
        assert_eq!(order, (0..9).collect::<Vec<_>>());
        assert_eq!(ranked.scores(), qs(&["25", "20", "16", "15", "14", "13", "11", "10", "9"]));
    }

    #[test]
    fn ties_follow_input_order() {
        let config = AuctionConfig::<f64>::gsp();
        let bidders = vec![Bidder::unit("A", 5.0, 3.0), Bidder::unit("B", 9.0, 3.0)];
        let ranked = rank(&bidders, &config).unwrap();
        assert_eq!(ranked.at(1).unwrap().bidder, 0);
        assert_eq!(ranked.at(2).unwrap().bidder, 1);

        let single = vec![Bidder::unit("solo", 1.0, 0.5)];
        assert_eq!(rank(&single, &config).unwrap().at(1).unwrap().bidder, 0);
    }

    #[test]
    fn rejects_non_positive_relevance() {
        let config = AuctionConfig::<f64>::gsp();
        let err = rank(&[Bidder::new("x", 1.0, 0.0, 1.0)], &config).unwrap_err();
        assert!(matches!(err, AuctionError::InvalidBidder { .. }));
    }

    #[test]
    fn rejects_bad_curves() {
        assert!(CtrCurve::<f64>::new(vec![]).is_err());
        assert!(CtrCurve::new(vec![1.0, 1.0]).is_err());
        assert!(CtrCurve::new(vec![1.0, 0.0]).is_err());
        let curve = CtrCurve::new(vec![1.0_f64, 0.5]).unwrap();
        assert_eq!(curve.gamma(3), 0.0);
        assert_eq!(curve.gamma(0), 0.0);
    }

    #[test]
    fn table1_gsp_prices_and_payoffs() {
        let (bidders, curve, config) = table1::<BigRational>();
        let out = outcome(&bidders, &curve, &config).unwrap();
        assert_eq!(out.score_prices(), qs(&["20", "16", "15", "14", "13", "11", "10", "9", "0"]));
        assert_eq!(out.payoffs(), qs(&["6", "3.6", "2.5", "1.6", "1.2", "0.8", "0.3", "0.3", "0"]));
        // 20 + 9.6 + 7.5 + 5.6 + 3.9 + 2.2 + 1.5 + 0.9
        assert_eq!(out.auctioneer_revenue, q("51.2"));
        assert!(!out.at(9).unwrap().slotted);
    }

    #[test]
    fn position_beyond_slots_has_no_price() {
        let (bidders, curve, config) = table1::<f64>();
        let ranked = rank(&bidders, &config).unwrap();
        assert!(matches!(
            price_at(&ranked, &bidders, &curve, &config, 9),
            Err(AuctionError::NoSlot { position: 9, slots: 8 })
        ));
    }

    #[test]
    fn lone_bidder_pays_reserve() {
        let curve = CtrCurve::new(vec![0.7_f64]).unwrap();
        let config = AuctionConfig::gsp();
        let out = outcome(&[Bidder::new("a", 4.0, 0.5, 3.0)], &curve, &config).unwrap();
        assert_eq!(out.at(1).unwrap().price_per_click, 0.0);
        assert!((out.at(1).unwrap().payoff - 0.7 * 0.5 * 4.0).abs() < 1e-12);

        let reserve = AuctionConfig { reserve_score: 1.0, ..config };
        let out = outcome(&[Bidder::new("a", 4.0, 0.5, 3.0)], &curve, &reserve).unwrap();
        assert_eq!(out.at(1).unwrap().score_price, 1.0);
        let out = outcome(&[Bidder::new("a", 4.0, 0.5, 1.0)], &curve, &reserve).unwrap();
        assert!(!out.at(1).unwrap().slotted, "score 0.5 is below the reserve");
    }

    #[test]
    fn gfp_charges_own_bid() {
        let (bidders, curve, config) = table1::<f64>();
        let out = outcome(&bidders, &curve, &config.with_pricing(Pricing::Gfp)).unwrap();
        for p in out.slotted() {
            assert_eq!(p.price_per_click, bidders[p.bidder].bid);
        }
    }

    #[test]
    fn laddered_bottom_slot_is_free_when_nobody_is_below() {
        let curve = CtrCurve::new(vec![1.0_f64, 0.5]).unwrap();
        let config = AuctionConfig::new(Ranking::Rbr, Pricing::Laddered);
        let bidders = vec![Bidder::unit("a", 5.0, 4.0), Bidder::unit("b", 3.0, 2.0)];
        let out = outcome(&bidders, &curve, &config).unwrap();
        assert_eq!(out.at(2).unwrap().price_per_click, 0.0);
        // (1 − 0.5)·2 + 0.5·0
        assert_eq!(out.at(1).unwrap().price_per_click, 1.0);
    }

    #[test]
    fn laddered_matches_loop_sum_on_table1() {
        let (bidders, curve, config) = table1::<BigRational>();
        let out = outcome(&bidders, &curve, &config.with_pricing(Pricing::Laddered)).unwrap();
        let payments: Vec<BigRational> = out.placements.iter().map(|p| p.expected_payment(&curve)).collect();
        assert_eq!(payments, qs(&["15.75", "7.75", "6.15", "4.65", "3.25", "1.95", "1.4", "0.9", "0"]));
    }

    #[test]
    fn rbb_applies_relevance_only_to_payoffs() {
        let curve = CtrCurve::new(vec![1.0_f64, 0.5]).unwrap();
        let config = AuctionConfig::new(Ranking::Rbb, Pricing::Gsp);
        let bidders = vec![Bidder::new("a", 5.0, 0.2, 4.0), Bidder::new("b", 3.0, 0.9, 2.0)];
        let out = outcome(&bidders, &curve, &config).unwrap();
        assert_eq!(out.at(1).unwrap().bidder, 0);
        assert_eq!(out.at(1).unwrap().price_per_click, 2.0);
        assert!((out.at(1).unwrap().score_price - 0.4).abs() < 1e-12);
    }
}
