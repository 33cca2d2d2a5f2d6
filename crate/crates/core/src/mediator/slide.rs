use crate::auction::{AuctionOutcome, Bidder, CtrCurve, Pricing};
use crate::equilibrium::{is_sne_among, Mode};
use crate::error::{AuctionError, Result};
use crate::scalar::{self, Scalar};

use super::{check_range, replace_scores, require_pricing, require_score_prices, Draft, MediatorPlan, Strategy};

/// Moves the top `members` ranks down one slot by giving all of them
/// `uniform_score`, which must fall in `[r_{L+2}, r_{L+1})` so that exactly
/// the first non-member is promoted above them.
///
/// The plan's gain is the members' payment reduction; `payoff_delta` also
/// accounts for the clicks they give up.
pub fn slide_down<T: Scalar>(
    out: &AuctionOutcome<T>,
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    members: usize,
    uniform_score: &T,
) -> Result<MediatorPlan<T>> {
    require_pricing(out, Pricing::Gsp, "sliding")?;
    require_score_prices(out, bidders)?;
    check_range(out, 1, members)?;
    let draft = Draft {
        strategy: Strategy::Slide,
        first: 1,
        last: members,
        threshold: None,
        pooled_score: Some(uniform_score.clone()),
        flatten_extent: Some(members),
    };
    if !uniform_score.gt_zero() {
        return Err(AuctionError::InvalidArgument("uniform score must be positive".into()));
    }

    let tol = &out.config.tolerance;
    let Some(promoted) = out.at(members + 1) else {
        return Ok(draft.infeasible(out, "no non-member below the block to promote"));
    };
    if !scalar::gt(&promoted.score, uniform_score, tol) {
        return Ok(draft.infeasible(out, "uniform score must lie strictly below the first non-member's score"));
    }
    let floor = out.at(members + 2).map_or_else(|| out.config.reserve_score.clone(), |p| p.score.clone());
    if !scalar::ge(uniform_score, &floor, tol) {
        return Ok(draft.infeasible(out, "uniform score would drop the block below the next non-member"));
    }

    let modified = replace_scores(out, |rank| (rank <= members).then(|| uniform_score.clone()));
    let mut plan = draft.finish(out, bidders, curve, modified, None)?;
    let m = plan.members();
    let verdict = is_sne_among(&plan.after, bidders, curve, Mode::Full, |b| !m.contains(&b))?;
    if !verdict.holds {
        plan.feasible = false;
        plan.note = Some("slid profile gives a non-member a profitable deviation".into());
    } else if !scalar::gt(&plan.payment_reduction, &T::zero(), tol) {
        plan.feasible = false;
        plan.note = Some("sliding does not reduce member payments".into());
    }
    plan.incentive_check = Some(verdict);
    Ok(plan)
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

    #[test]
    fn table1_slide_to_twelve() {
        let (bidders, curve, config) = table1::<BigRational>();
        let out = outcome(&bidders, &curve, &config).unwrap();
        let plan = slide_down(&out, &bidders, &curve, 5, &q("12")).unwrap();
        assert!(plan.feasible, "{:?}", plan.note);
        // 46.6 before, 23.8 after.
        assert_eq!(plan.payment_reduction, q("22.8"));
        assert_eq!(plan.gain, q("22.8"));
        assert_eq!(plan.payoff_delta, q("4.7"));
        // Bidder 6 now pays 12 at γ = 1 instead of 11 at γ = 0.2.
        assert_eq!(plan.other_payment_reduction, q("-9.8"));
        assert_eq!(plan.after.auctioneer_revenue, q("38.2"));
        assert_eq!(plan.after.at(1).unwrap().bidder, 5);
        let member_prices: Vec<BigRational> = (2..=6).map(|p| plan.after.at(p).unwrap().score_price.clone()).collect();
        assert_eq!(member_prices, ["12", "12", "12", "12", "11"].map(q).to_vec());
        assert!(plan.incentive_check.as_ref().unwrap().holds);
        for (rank, bidder) in plan.members().into_iter().enumerate() {
            assert_eq!(plan.after.position_of(bidder), Some(rank + 2));
        }
    }

    #[test]
    fn boundary_scores_are_infeasible() {
        let (bidders, curve, config) = table1::<BigRational>();
        let out = outcome(&bidders, &curve, &config).unwrap();
        assert!(!slide_down(&out, &bidders, &curve, 5, &q("13")).unwrap().feasible);
        assert!(!slide_down(&out, &bidders, &curve, 5, &q("10.5")).unwrap().feasible);
        // Bidders 7 and 8 value a click at 12, so a pooled score of 11 invites them up.
        assert!(!slide_down(&out, &bidders, &curve, 5, &q("11")).unwrap().feasible);
        assert!(slide_down(&out, &bidders, &curve, 5, &q("12.5")).unwrap().feasible);
        assert!(!slide_down(&out, &bidders, &curve, 9, &q("1")).unwrap().feasible);
        assert!(slide_down(&out, &bidders, &curve, 5, &q("0")).is_err());
    }
}
