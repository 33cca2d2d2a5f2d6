use crate::auction::{AuctionOutcome, Bidder, CtrCurve, Pricing};
use crate::error::Result;
use crate::scalar::{self, Scalar};

use super::{check_range, replace_scores, require_pricing, Draft, MediatorPlan, Strategy};

/// Under laddered pricing non-members bid truthfully whatever the members
/// do, so the mediator only has to keep ranks: every member drops to the
/// score of the bidder just below the block (the reserve if there is none),
/// ordered among themselves by their original ranks.
pub fn laddered_min_plan<T: Scalar>(
    out: &AuctionOutcome<T>,
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    first: usize,
    last: usize,
) -> Result<MediatorPlan<T>> {
    require_pricing(out, Pricing::Laddered, "the laddered mediator")?;
    check_range(out, first, last)?;
    let floor = match out.at(last + 1) {
        Some(p) if p.score >= out.config.reserve_score => p.score.clone(),
        _ => out.config.reserve_score.clone(),
    };
    let draft = Draft {
        strategy: Strategy::LadderedMin,
        first,
        last,
        threshold: None,
        pooled_score: Some(floor.clone()),
        flatten_extent: Some(last),
    };
    let modified = replace_scores(out, |rank| (first..=last).contains(&rank).then(|| floor.clone()));
    let mut plan = draft.finish(out, bidders, curve, modified, None)?;
    if !scalar::gt(&plan.payment_reduction, &T::zero(), &out.config.tolerance) {
        plan.feasible = false;
        plan.note = Some("members already bid the minimum that keeps their ranks".into());
    }
    Ok(plan)
}
