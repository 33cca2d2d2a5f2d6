use crate::auction::{AuctionOutcome, Bidder, CtrCurve, Pricing};
use crate::equilibrium::{is_sne, is_sne_among, Mode};
use crate::error::{AuctionError, Result};
use crate::scalar::{self, Scalar};

use super::{
    check_range, replace_scores, require_pricing, require_score_prices, Draft, MediatorPlan, Strategy, Threshold,
    ThresholdTerm,
};

/// `max_j (1 − γ_j/γ_a)·e_j t_j + (γ_j/γ_a)·r_{j+1}` over the given ranks,
/// floored at the reserve. Each term equals `e_j t_j − u_j/γ_a`.
fn threshold_over<T: Scalar>(
    out: &AuctionOutcome<T>,
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    anchor: usize,
    ranks: impl Iterator<Item = usize>,
) -> Threshold<T> {
    let anchor_gamma = curve.gamma(anchor);
    let terms: Vec<ThresholdTerm<T>> = ranks
        .filter_map(|j| out.at(j))
        .map(|p| {
            let ratio = curve.gamma(p.position) / anchor_gamma.clone();
            let value_score = bidders[p.bidder].value_score();
            let value = (T::one() - ratio.clone()) * value_score + ratio * p.score_price.clone();
            ThresholdTerm { position: p.position, bidder: p.bidder, value }
        })
        .collect();
    let value = terms
        .iter()
        .map(|t| t.value.clone())
        .fold(out.config.reserve_score.clone(), scalar::max_of);
    Threshold { anchor, terms, value }
}

fn require_sne<T: Scalar>(out: &AuctionOutcome<T>, bidders: &[Bidder<T>], curve: &CtrCurve<T>, mode: Mode) -> Result<()> {
    let verdict = is_sne(out, bidders, curve, mode)?;
    if let Some(w) = verdict.witnesses.first() {
        return Err(AuctionError::Precondition(format!(
            "input profile is not a {} equilibrium: bidder `{}` gains by moving from position {} to {}",
            mode.name(),
            bidders[w.bidder].id,
            w.from_position,
            w.to_position
        )));
    }
    Ok(())
}

fn common_checks<T: Scalar>(out: &AuctionOutcome<T>, bidders: &[Bidder<T>]) -> Result<()> {
    require_pricing(out, Pricing::Gsp, "flattening")?;
    require_score_prices(out, bidders)
}

/// Threshold for pooling the top `members` ranks. `anchor` 1 is the
/// symmetric case; anchor 2 keeps rank 1 and needs only plain Nash
/// stability of the input.
pub fn threshold_top<T: Scalar>(
    out: &AuctionOutcome<T>,
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    members: usize,
    anchor: usize,
) -> Result<Threshold<T>> {
    common_checks(out, bidders)?;
    check_range(out, 1, members)?;
    match anchor {
        1 => require_sne(out, bidders, curve, Mode::Full)?,
        2 if curve.slots() >= 2 => require_sne(out, bidders, curve, Mode::Nash)?,
        2 => return Err(AuctionError::InvalidArgument("anchor 2 needs at least two slots".into())),
        _ => return Err(AuctionError::InvalidArgument(format!("anchor must be 1 or 2, got {anchor}"))),
    }
    Ok(threshold_over(out, bidders, curve, anchor, members + 1..=out.len()))
}

/// Threshold for pooling inside members `above + 1 ..= above + members`:
/// non-members on both sides must not want the first member's slot.
pub fn threshold_middle<T: Scalar>(
    out: &AuctionOutcome<T>,
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    above: usize,
    members: usize,
) -> Result<Threshold<T>> {
    common_checks(out, bidders)?;
    if above == 0 || members == 0 {
        return Err(AuctionError::InvalidArgument("interior blocks need l >= 1 and L >= 1".into()));
    }
    check_range(out, above + 1, above + members)?;
    if !out.at(above + 1).is_some_and(|p| p.slotted) {
        return Err(AuctionError::InvalidArgument(format!("rank {} has no slot", above + 1)));
    }
    require_sne(out, bidders, curve, Mode::Full)?;
    let ranks = (1..=above).chain(above + members + 1..=out.len());
    Ok(threshold_over(out, bidders, curve, above + 1, ranks))
}

/// Largest `e` in `start..=last` with `r_e >= r > r_{e+1}`.
fn pooled_extent<T: Scalar>(out: &AuctionOutcome<T>, start: usize, last: usize, r: &T) -> Option<usize> {
    let tol = &out.config.tolerance;
    (start..=last).rev().find(|&e| {
        let reaches = out.at(e).is_some_and(|p| scalar::ge(&p.score, r, tol));
        let clears = out.at(e + 1).is_none_or(|p| scalar::gt(r, &p.score, tol));
        reaches && clears
    })
}

/// `Σ_{p=max(1,start−1)}^{end−1} γ_p·(r_{p+1} − r)`: every position whose
/// price is set by a pooled score.
fn closed_form_gain<T: Scalar>(out: &AuctionOutcome<T>, curve: &CtrCurve<T>, start: usize, end: usize, r: &T) -> T {
    scalar::sum(
        (start.saturating_sub(1).max(1)..end)
            .map(|p| curve.gamma(p) * (out.at(p + 1).expect("ranked").score.clone() - r.clone())),
    )
}

struct Pool<'a, T> {
    out: &'a AuctionOutcome<T>,
    bidders: &'a [Bidder<T>],
    curve: &'a CtrCurve<T>,
    draft: Draft<T>,
    start: usize,
    stability: Mode,
}

impl<T: Scalar> Pool<'_, T> {
    fn run(mut self) -> Result<MediatorPlan<T>> {
        let out = self.out;
        let r = self.draft.threshold.as_ref().expect("pooling needs a threshold").value.clone();
        self.draft.pooled_score = Some(r.clone());
        if self.start > self.draft.last || self.draft.last - self.draft.first < 1 {
            return Ok(self.draft.infeasible(out, "a single member has nothing to pool"));
        }
        let Some(end) = pooled_extent(out, self.start, self.draft.last, &r) else {
            return Ok(self.draft.infeasible(out, "no member rank admits the threshold score"));
        };
        self.draft.flatten_extent = Some(end);
        let gain = closed_form_gain(out, self.curve, self.start, end, &r);
        if !scalar::gt(&gain, &T::zero(), &out.config.tolerance) {
            return Ok(self.draft.infeasible(out, "threshold leaves no improving pooled score"));
        }

        let start = self.start;
        let modified = replace_scores(out, |rank| (start..=end).contains(&rank).then(|| r.clone()));
        let mut plan = self.draft.finish(out, self.bidders, self.curve, modified, Some(gain))?;
        let members = plan.members();
        let verdict =
            is_sne_among(&plan.after, self.bidders, self.curve, self.stability, |b| !members.contains(&b))?;
        if !verdict.holds {
            plan.feasible = false;
            plan.note = Some("modified profile gives a non-member a profitable deviation".into());
        }
        plan.incentive_check = Some(verdict);
        Ok(plan)
    }
}

/// Pools the top `members` ranks at the symmetric threshold.
pub fn flatten_top<T: Scalar>(
    out: &AuctionOutcome<T>,
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    members: usize,
) -> Result<MediatorPlan<T>> {
    flatten_top_anchored(out, bidders, curve, members, 1)
}

pub fn flatten_top_anchored<T: Scalar>(
    out: &AuctionOutcome<T>,
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    members: usize,
    anchor: usize,
) -> Result<MediatorPlan<T>> {
    let threshold = threshold_top(out, bidders, curve, members, anchor)?;
    let (strategy, stability) = match anchor {
        1 => (Strategy::FlattenTop, Mode::Full),
        _ => (Strategy::FlattenTopNonsym, Mode::Nash),
    };
    let draft = Draft {
        strategy,
        first: 1,
        last: members,
        threshold: Some(threshold),
        pooled_score: None,
        flatten_extent: None,
    };
    Pool { out, bidders, curve, draft, start: anchor, stability }.run()
}

/// Members are ranks `above + 1 ..= above + members`. The first member keeps
/// its bid and the pool starts right below it.
pub fn flatten_middle<T: Scalar>(
    out: &AuctionOutcome<T>,
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    above: usize,
    members: usize,
) -> Result<MediatorPlan<T>> {
    let threshold = threshold_middle(out, bidders, curve, above, members)?;
    let draft = Draft {
        strategy: Strategy::FlattenMiddle,
        first: above + 1,
        last: above + members,
        threshold: Some(threshold),
        pooled_score: None,
        flatten_extent: None,
    };
    Pool { out, bidders, curve, draft, start: above + 2, stability: Mode::Full }.run()
}
