//! Machine-readable mirrors of the text reports. Numbers are emitted as
//! JSON floats; exact values are rounded only at this boundary.

use serde_json::{json, Value};

use crate::auction::{AuctionOutcome, Bidder, CtrCurve};
use crate::equilibrium::{DeviationRecord, SneTable, SneVerdict};
use crate::mediator::{MediatorPlan, RevenueReport, Threshold};
use crate::oracle::{Counterexample, OracleDeviation, OracleReport};
use crate::scalar::Scalar;

fn num<T: Scalar>(value: &T) -> Value {
    json!(value.approx())
}

fn id<T>(bidders: &[Bidder<T>], index: usize) -> Value {
    json!(bidders[index].id)
}

pub fn outcome_json<T: Scalar>(out: &AuctionOutcome<T>, bidders: &[Bidder<T>], curve: &CtrCurve<T>) -> Value {
    let placements: Vec<Value> = out
        .placements
        .iter()
        .map(|p| {
            json!({
                "position": p.position,
                "bidder": id(bidders, p.bidder),
                "score": num(&p.score),
                "slotted": p.slotted,
                "gamma": num(&curve.gamma(p.position)),
                "next_score": num(&p.next_score),
                "price_per_click": num(&p.price_per_click),
                "score_price": num(&p.score_price),
                "expected_payment": num(&p.expected_payment(curve)),
                "payoff": num(&p.payoff),
            })
        })
        .collect();
    json!({
        "ranking": out.config.ranking.name(),
        "pricing": out.config.pricing.name(),
        "reserve_score": num(&out.config.reserve_score),
        "placements": placements,
        "auctioneer_revenue": num(&out.auctioneer_revenue),
    })
}

fn deviation_json<T: Scalar>(d: &DeviationRecord<T>, bidders: &[Bidder<T>]) -> Value {
    json!({
        "bidder": id(bidders, d.bidder),
        "from": d.from_position,
        "to": d.to_position,
        "current_payoff": num(&d.current_payoff),
        "deviation_payoff": num(&d.deviation_payoff),
    })
}

pub fn verdict_json<T: Scalar>(verdict: &SneVerdict<T>, bidders: &[Bidder<T>]) -> Value {
    json!({
        "mode": verdict.mode.name(),
        "holds": verdict.holds,
        "witnesses": verdict.witnesses.iter().map(|d| deviation_json(d, bidders)).collect::<Vec<_>>(),
    })
}

pub fn sne_table_json<T: Scalar>(table: &SneTable<T>, bidders: &[Bidder<T>]) -> Value {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| {
            json!({
                "position": r.position,
                "bidder": id(bidders, r.bidder),
                "payoff": num(&r.payoff),
                "up": r.up.as_ref().map(|(to, v)| json!({ "to": to, "payoff": num(v) })),
                "down": json!({ "to": r.down.0, "payoff": num(&r.down.1) }),
                "holds": r.holds,
            })
        })
        .collect();
    json!({ "rows": rows, "holds": table.holds() })
}

fn threshold_json<T: Scalar>(t: &Threshold<T>, bidders: &[Bidder<T>]) -> Value {
    json!({
        "anchor": t.anchor,
        "value": num(&t.value),
        "terms": t.terms.iter().map(|term| json!({
            "position": term.position,
            "bidder": id(bidders, term.bidder),
            "value": num(&term.value),
        })).collect::<Vec<_>>(),
    })
}

pub fn plan_json<T: Scalar>(plan: &MediatorPlan<T>, bidders: &[Bidder<T>], curve: &CtrCurve<T>) -> Value {
    let members: Vec<Value> = plan
        .member_reductions(curve)
        .into_iter()
        .map(|(b, reduction)| {
            let before = plan.before.placements.iter().find(|p| p.bidder == b);
            let after = plan.after.placements.iter().find(|p| p.bidder == b);
            json!({
                "bidder": id(bidders, b),
                "position_before": before.map(|p| p.position),
                "position_after": after.map(|p| p.position),
                "score_before": before.map(|p| num(&p.score)),
                "score_after": after.map(|p| num(&p.score)),
                "score_price_before": before.map(|p| num(&p.score_price)),
                "score_price_after": after.map(|p| num(&p.score_price)),
                "payment_reduction": num(&reduction),
            })
        })
        .collect();
    json!({
        "strategy": plan.strategy.name(),
        "first": plan.first,
        "last": plan.last,
        "feasible": plan.feasible,
        "note": plan.note,
        "threshold": plan.threshold.as_ref().map(|t| threshold_json(t, bidders)),
        "pooled_score": plan.pooled_score.as_ref().map(num),
        "flatten_extent": plan.flatten_extent,
        "gain": num(&plan.gain),
        "payment_reduction": num(&plan.payment_reduction),
        "other_payment_reduction": num(&plan.other_payment_reduction),
        "payoff_delta": num(&plan.payoff_delta),
        "members": members,
        "incentive_check": plan.incentive_check.as_ref().map(|v| verdict_json(v, bidders)),
        "before": outcome_json(&plan.before, bidders, curve),
        "after": outcome_json(&plan.after, bidders, curve),
    })
}

pub fn revenue_json<T: Scalar>(report: &RevenueReport<T>, bidders: &[Bidder<T>]) -> Value {
    json!({
        "fee_fraction": num(&report.fee_fraction),
        "gain": num(&report.gain),
        "mediator_take": num(&report.mediator_take),
        "auctioneer_before": num(&report.auctioneer_before),
        "auctioneer_after": num(&report.auctioneer_after),
        "auctioneer_loss": num(&report.auctioneer_loss()),
        "member_total": num(&report.member_total()),
        "members": report.members.iter().map(|m| json!({
            "bidder": id(bidders, m.bidder),
            "payment_reduction": num(&m.payment_reduction),
            "delta": num(&m.delta),
        })).collect::<Vec<_>>(),
    })
}

fn oracle_deviation_json<T: Scalar>(d: &OracleDeviation<T>, bidders: &[Bidder<T>]) -> Value {
    json!({
        "bidder": id(bidders, d.bidder),
        "from": d.from,
        "to": d.to,
        "current_payoff": num(&d.current),
        "deviation_payoff": num(&d.deviation),
    })
}

pub fn oracle_json<T: Scalar>(report: &OracleReport<T>, bidders: &[Bidder<T>]) -> Value {
    let counterexample = report.counterexample.as_ref().map(|c| match c {
        Counterexample::Deviation(d) => json!({ "kind": "deviation", "deviation": oracle_deviation_json(d, bidders) }),
        Counterexample::BetterFlatten { score, extent, gain } => {
            json!({ "kind": "better_flatten", "score": num(score), "extent": extent, "gain": num(gain) })
        }
        Counterexample::Misreport { bidder, bid, truthful_utility, utility } => json!({
            "kind": "misreport",
            "bidder": id(bidders, *bidder),
            "bid": num(bid),
            "truthful_utility": num(truthful_utility),
            "utility": num(utility),
        }),
        Counterexample::Accounting { quantity, expected, found } => {
            json!({ "kind": "accounting", "quantity": quantity, "expected": num(expected), "found": num(found) })
        }
    });
    json!({
        "claim": report.claim.name(),
        "digest": report.digest,
        "verdict": report.verdict,
        "counterexample": counterexample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::outcome;
    use crate::equilibrium::sne_table;
    use crate::fixtures::table1;

    #[test]
    fn outcome_numbers_survive() {
        let (bidders, curve, config) = table1::<f64>();
        let out = outcome(&bidders, &curve, &config).unwrap();
        let v = outcome_json(&out, &bidders, &curve);
        assert!((v["auctioneer_revenue"].as_f64().unwrap() - 51.2).abs() < 1e-9);
        assert_eq!(v["placements"].as_array().unwrap().len(), 9);
        assert_eq!(v["placements"][8]["slotted"], json!(false));
        assert_eq!(v["placements"][0]["bidder"], json!("1"));
    }

    #[test]
    fn sne_rows_match_table() {
        let (bidders, curve, config) = table1::<f64>();
        let out = outcome(&bidders, &curve, &config).unwrap();
        let table = sne_table(&out, &bidders, &curve).unwrap();
        let v = sne_table_json(&table, &bidders);
        assert_eq!(v["rows"][0]["up"], Value::Null);
        assert!((v["rows"][0]["down"]["payoff"].as_f64().unwrap() - 6.0).abs() < 1e-9);
        assert_eq!(v["holds"], json!(true));
    }
}
