//! Strategies of a for-profit mediator bidding for a contiguous block of
//! ranks (its members), and settlement of the resulting savings.
//!
//! Every strategy returns a [`MediatorPlan`] holding the outcome before and
//! after the bid change. Payment figures on the plan are recomputed from
//! those two outcomes; closed-form gains are checked against them in tests.

mod flatten;
mod laddered;
mod slide;

pub use flatten::{flatten_middle, flatten_top, flatten_top_anchored, threshold_middle, threshold_top};
pub use laddered::laddered_min_plan;
pub use slide::slide_down;

use crate::auction::{outcome_for, AuctionOutcome, Bidder, CtrCurve, Pricing, RankedEntry, RankedProfile, Ranking};
use crate::equilibrium::SneVerdict;
use crate::error::{AuctionError, Result};
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Pool the top ranks at the threshold score.
    FlattenTop,
    /// Keep rank 1, pool ranks from 2 down; needs only plain Nash stability.
    FlattenTopNonsym,
    /// Pool an interior block below its first member.
    FlattenMiddle,
    /// Move every member down one slot under a uniform score.
    Slide,
    /// Laddered pricing: drop every member to just above the next bidder.
    LadderedMin,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::FlattenTop => "flatten_top",
            Strategy::FlattenTopNonsym => "flatten_top_nonsym",
            Strategy::FlattenMiddle => "flatten_middle",
            Strategy::Slide => "slide",
            Strategy::LadderedMin => "laddered_min",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTerm<T> {
    /// Rank of the non-member whose incentive the term encodes.
    pub position: usize,
    pub bidder: usize,
    pub value: T,
}

/// Lowest pooled score that keeps every non-member from moving to the
/// anchor position at the pooled price.
#[derive(Debug, Clone, PartialEq)]
pub struct Threshold<T> {
    pub anchor: usize,
    pub terms: Vec<ThresholdTerm<T>>,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MediatorPlan<T> {
    pub strategy: Strategy,
    /// Members, as 1-based ranks `first..=last` of the original profile.
    pub first: usize,
    pub last: usize,
    pub threshold: Option<Threshold<T>>,
    /// Score given to the pooled members.
    pub pooled_score: Option<T>,
    /// Last pooled rank (`l` for top blocks, `l + s − 1` for interior ones).
    pub flatten_extent: Option<usize>,
    pub before: AuctionOutcome<T>,
    pub after: AuctionOutcome<T>,
    /// Amount available to share between mediator and members.
    pub gain: T,
    /// Members' expected payments, before minus after.
    pub payment_reduction: T,
    /// Non-members' expected payments, before minus after.
    pub other_payment_reduction: T,
    /// Members' expected payoffs, after minus before.
    pub payoff_delta: T,
    /// Non-member stability of the modified profile.
    pub incentive_check: Option<SneVerdict<T>>,
    pub feasible: bool,
    pub note: Option<String>,
}

impl<T: Scalar> MediatorPlan<T> {
    /// Slice indices of the members, in original rank order.
    pub fn members(&self) -> Vec<usize> {
        (self.first..=self.last).filter_map(|r| self.before.at(r).map(|p| p.bidder)).collect()
    }

    pub fn is_member(&self, bidder: usize) -> bool {
        self.members().contains(&bidder)
    }

    pub fn modified_scores(&self) -> &RankedProfile<T> {
        &self.after.ranked
    }

    /// Per-member expected payment before minus after, in original rank
    /// order.
    pub fn member_reductions(&self, curve: &CtrCurve<T>) -> Vec<(usize, T)> {
        self.members()
            .into_iter()
            .map(|b| (b, payment_of(&self.before, curve, b) - payment_of(&self.after, curve, b)))
            .collect()
    }

    /// Bidders carrying the modified bids, listed in modified rank order so
    /// that re-ranking them reproduces the plan's profile. With `epsilon`,
    /// each pooled group gets the score ladder `r + (m−1−k)·ε`, keeping the
    /// order without relying on tie-breaking.
    pub fn modified_bidders(&self, bidders: &[Bidder<T>], epsilon: Option<&T>) -> Vec<Bidder<T>> {
        let entries = self.after.ranked.entries();
        let mut out = Vec::with_capacity(entries.len());
        let mut i = 0;
        while i < entries.len() {
            let group_end = (i..entries.len()).find(|&k| entries[k].score != entries[i].score).unwrap_or(entries.len());
            let size = group_end - i;
            for (k, entry) in entries[i..group_end].iter().enumerate() {
                let mut score = entry.score.clone();
                if let Some(eps) = epsilon {
                    score = score + eps.clone() * T::of_usize(size - 1 - k);
                }
                let mut bidder = bidders[entry.bidder].clone();
                bidder.bid = match self.before.config.ranking {
                    Ranking::Rbb => score,
                    Ranking::Rbr => score / bidder.relevance.clone(),
                };
                out.push(bidder);
            }
            i = group_end;
        }
        out
    }
}

pub(crate) fn payment_of<T: Scalar>(out: &AuctionOutcome<T>, curve: &CtrCurve<T>, bidder: usize) -> T {
    out.placements
        .iter()
        .find(|p| p.bidder == bidder)
        .map(|p| p.expected_payment(curve))
        .unwrap_or_else(T::zero)
}

fn payoff_of<T: Scalar>(out: &AuctionOutcome<T>, bidder: usize) -> T {
    out.placements.iter().find(|p| p.bidder == bidder).map(|p| p.payoff.clone()).unwrap_or_else(T::zero)
}

/// Members must form `first..=last` with `1 <= first <= last <= N`.
pub(crate) fn check_range<T: Scalar>(out: &AuctionOutcome<T>, first: usize, last: usize) -> Result<()> {
    if first == 0 || first > last || last > out.len() {
        return Err(AuctionError::InvalidArgument(format!(
            "member ranks {first}..={last} are not a non-empty range within 1..={}",
            out.len()
        )));
    }
    Ok(())
}

pub(crate) fn require_pricing<T: Scalar>(out: &AuctionOutcome<T>, pricing: Pricing, what: &str) -> Result<()> {
    if out.config.pricing != pricing {
        return Err(AuctionError::Unsupported(format!(
            "{what} requires {} pricing, got {}",
            pricing.name(),
            out.config.pricing.name()
        )));
    }
    Ok(())
}

/// Score-space strategies assume the GSP score price is the next score,
/// which holds under rank-by-revenue or with unit relevances.
pub(crate) fn require_score_prices<T: Scalar>(out: &AuctionOutcome<T>, bidders: &[Bidder<T>]) -> Result<()> {
    if out.config.ranking == Ranking::Rbb && bidders.iter().any(|b| !b.relevance.is_one()) {
        return Err(AuctionError::Unsupported(
            "mediator strategies under rank-by-bid need unit relevances".into(),
        ));
    }
    Ok(())
}

/// Profile with `scores` replacing the listed ranks; every entry keeps its
/// original rank as tie-break.
pub(crate) fn replace_scores<T: Scalar>(out: &AuctionOutcome<T>, replace: impl Fn(usize) -> Option<T>) -> RankedProfile<T> {
    let entries = out
        .ranked
        .entries()
        .iter()
        .enumerate()
        .map(|(i, e)| RankedEntry {
            bidder: e.bidder,
            score: replace(i + 1).unwrap_or_else(|| e.score.clone()),
            tie_rank: i + 1,
        })
        .collect();
    RankedProfile::from_entries(entries)
}

pub(crate) struct Draft<T> {
    pub strategy: Strategy,
    pub first: usize,
    pub last: usize,
    pub threshold: Option<Threshold<T>>,
    pub pooled_score: Option<T>,
    pub flatten_extent: Option<usize>,
}

impl<T: Scalar> Draft<T> {
    /// Prices `modified` and fills in the accounting. `gain` defaults to
    /// the members' payment reduction.
    pub fn finish(
        self,
        before: &AuctionOutcome<T>,
        bidders: &[Bidder<T>],
        curve: &CtrCurve<T>,
        modified: RankedProfile<T>,
        gain: Option<T>,
    ) -> Result<MediatorPlan<T>> {
        let after = outcome_for(modified, bidders, curve, &before.config)?;
        let members: Vec<usize> =
            (self.first..=self.last).filter_map(|r| before.at(r).map(|p| p.bidder)).collect();
        let (mut member_cut, mut other_cut, mut payoff_delta) = (T::zero(), T::zero(), T::zero());
        for p in &before.placements {
            let cut = payment_of(before, curve, p.bidder) - payment_of(&after, curve, p.bidder);
            if members.contains(&p.bidder) {
                member_cut = member_cut + cut;
                payoff_delta = payoff_delta + payoff_of(&after, p.bidder) - payoff_of(before, p.bidder);
            } else {
                other_cut = other_cut + cut;
            }
        }
        Ok(MediatorPlan {
            strategy: self.strategy,
            first: self.first,
            last: self.last,
            threshold: self.threshold,
            pooled_score: self.pooled_score,
            flatten_extent: self.flatten_extent,
            before: before.clone(),
            after,
            gain: gain.unwrap_or_else(|| member_cut.clone()),
            payment_reduction: member_cut,
            other_payment_reduction: other_cut,
            payoff_delta,
            incentive_check: None,
            feasible: true,
            note: None,
        })
    }

    /// A plan that leaves the profile unchanged.
    pub fn infeasible(self, before: &AuctionOutcome<T>, note: impl Into<String>) -> MediatorPlan<T> {
        MediatorPlan {
            strategy: self.strategy,
            first: self.first,
            last: self.last,
            threshold: self.threshold,
            pooled_score: self.pooled_score,
            flatten_extent: self.flatten_extent,
            before: before.clone(),
            after: before.clone(),
            gain: T::zero(),
            payment_reduction: T::zero(),
            other_payment_reduction: T::zero(),
            payoff_delta: T::zero(),
            incentive_check: None,
            feasible: false,
            note: Some(note.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemberSettlement<T> {
    pub bidder: usize,
    pub payment_reduction: T,
    /// Payment reduction minus the member's pro-rata share of the fee.
    pub delta: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevenueReport<T> {
    pub fee_fraction: T,
    pub gain: T,
    pub mediator_take: T,
    pub auctioneer_before: T,
    pub auctioneer_after: T,
    pub members: Vec<MemberSettlement<T>>,
}

impl<T: Scalar> RevenueReport<T> {
    pub fn auctioneer_loss(&self) -> T {
        self.auctioneer_before.clone() - self.auctioneer_after.clone()
    }

    pub fn member_total(&self) -> T {
        scalar::sum(self.members.iter().map(|m| m.delta.clone()))
    }
}

/// Splits a plan's gain: the mediator keeps `fee_fraction` of it and each
/// member bears the fee in proportion to its own payment reduction.
pub fn settle<T: Scalar>(plan: &MediatorPlan<T>, curve: &CtrCurve<T>, fee_fraction: &T) -> Result<RevenueReport<T>> {
    if fee_fraction.lt_zero() || *fee_fraction > T::one() {
        return Err(AuctionError::InvalidArgument("fee fraction must lie in [0, 1]".into()));
    }
    if !plan.feasible || !plan.gain.gt_zero() {
        return Err(AuctionError::SettlementRefused(
            plan.note.clone().unwrap_or_else(|| "plan has no gain to distribute".into()),
        ));
    }
    let take = fee_fraction.clone() * plan.gain.clone();
    let reductions = plan.member_reductions(curve);
    let total = scalar::sum(reductions.iter().map(|(_, r)| r.clone()));
    let members = reductions
        .into_iter()
        .map(|(bidder, reduction)| {
            let share = if total.is_zero() { T::zero() } else { take.clone() * reduction.clone() / total.clone() };
            MemberSettlement { bidder, delta: reduction.clone() - share, payment_reduction: reduction }
        })
        .collect();
    Ok(RevenueReport {
        fee_fraction: fee_fraction.clone(),
        gain: plan.gain.clone(),
        mediator_take: take,
        auctioneer_before: plan.before.auctioneer_revenue.clone(),
        auctioneer_after: plan.after.auctioneer_revenue.clone(),
        members,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::outcome;
    use crate::fixtures::table1;
    use num_rational::BigRational;

    fn q(text: &str) -> BigRational {
        BigRational::from_decimal(text).unwrap()
    }

    fn table1_plan() -> (MediatorPlan<BigRational>, CtrCurve<BigRational>) {
        let (bidders, curve, config) = table1::<BigRational>();
        let out = outcome(&bidders, &curve, &config).unwrap();
        (flatten_top(&out, &bidders, &curve, 5).unwrap(), curve)
    }

    #[test]
    fn settle_edges() {
        let (plan, curve) = table1_plan();
        let none = settle(&plan, &curve, &q("0")).unwrap();
        assert_eq!(none.mediator_take, q("0"));
        assert_eq!(none.member_total(), q("7.28"));

        let all = settle(&plan, &curve, &q("1")).unwrap();
        assert_eq!(all.mediator_take, q("7.28"));
        assert!(all.members.iter().all(|m| m.delta == q("0")));
    }

    #[test]
    fn settle_half_is_pro_rata() {
        let (plan, curve) = table1_plan();
        let report = settle(&plan, &curve, &q("0.5")).unwrap();
        assert_eq!(report.mediator_take, q("3.64"));
        let deltas: Vec<BigRational> = report.members.iter().map(|m| m.delta.clone()).collect();
        assert_eq!(deltas, ["2.9", "0.54", "0.2", "0", "0"].map(q).to_vec());
        assert_eq!(report.mediator_take.clone() + report.member_total(), report.gain);
        assert_eq!(report.auctioneer_loss(), report.gain);
    }

    #[test]
    fn settle_rejects_bad_inputs() {
        let (plan, curve) = table1_plan();
        assert!(matches!(settle(&plan, &curve, &q("1.5")), Err(AuctionError::InvalidArgument(_))));
        assert!(matches!(settle(&plan, &curve, &q("-0.1")), Err(AuctionError::InvalidArgument(_))));

        let (bidders, curve, config) = table1::<BigRational>();
        let out = outcome(&bidders, &curve, &config).unwrap();
        let single = flatten_top(&out, &bidders, &curve, 1).unwrap();
        assert!(matches!(settle(&single, &curve, &q("0.5")), Err(AuctionError::SettlementRefused(_))));
    }

    #[test]
    fn epsilon_export_preserves_order() {
        let (bidders, curve, config) = table1::<BigRational>();
        let out = outcome(&bidders, &curve, &config).unwrap();
        let plan = flatten_top(&out, &bidders, &curve, 5).unwrap();
        let exported = plan.modified_bidders(&bidders, Some(&q("0.01")));
        let bids: Vec<BigRational> = exported.iter().take(5).map(|b| b.bid.clone()).collect();
        assert_eq!(bids, ["14.23", "14.22", "14.21", "14.2", "14"].map(q).to_vec());
        let ids: Vec<&str> = exported.iter().map(|b| b.id.as_str()).collect();
        assert_eq!(ids, ["1", "2", "3", "4", "5", "6", "7", "8", "9"]);
    }
}
