//! Command layer shared by the binary and its tests: each command turns a
//! scenario into a text report, a JSON report and an exit status.

use serde_json::{json, Value};
use thiserror::Error;

use crate::auction::{outcome, AuctionConfig, AuctionOutcome, Bidder, CtrCurve, Pricing, Ranking};
use crate::equilibrium::{is_sne, sne_table, Mode};
use crate::error::{AuctionError, ScenarioError};
use crate::mediator::{
    flatten_middle, flatten_top_anchored, laddered_min_plan, settle, slide_down, MediatorPlan, RevenueReport, Strategy,
};
use crate::oracle::{self, OracleReport};
use crate::render::{fmt_num, TextTable};
use crate::report;
use crate::scalar::Scalar;
use crate::scenario::{MediatorSpec, Scenario, SpecStrategy};

/// Grid points per bidder for the oracle's misreport search.
pub const TRUTHFUL_RESOLUTION: usize = 41;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Verify,
    Mediate,
    Slide,
    Report,
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub members: Option<usize>,
    pub above: Option<usize>,
    pub anchor: Option<usize>,
    pub score: Option<String>,
    pub alpha: Option<String>,
    pub pricing: Option<Pricing>,
    pub ranking: Option<Ranking>,
    pub verify_oracle: bool,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Auction(#[from] AuctionError),
    #[error("{0}")]
    Usage(String),
}

impl RunError {
    /// Refused preconditions are verification failures; everything else is
    /// bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Auction(AuctionError::Precondition(_)) => 1,
            RunError::Scenario(ScenarioError::Auction(AuctionError::Precondition(_))) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub status: i32,
    pub text: String,
    pub json: Value,
}

struct Ctx<'a, T> {
    name: &'a str,
    bidders: &'a [Bidder<T>],
    curve: &'a CtrCurve<T>,
    config: AuctionConfig<T>,
}

pub fn execute<T: Scalar>(scenario: &Scenario<T>, command: Command, options: &Options) -> Result<RunOutput, RunError> {
    let mut config = scenario.config.clone();
    if let Some(p) = options.pricing {
        config.pricing = p;
    }
    if let Some(r) = options.ranking {
        config.ranking = r;
    }
    let ctx = Ctx { name: &scenario.name, bidders: &scenario.bidders, curve: &scenario.curve, config };
    match command {
        Command::Verify => verify(&ctx, options),
        Command::Mediate => {
            let spec = resolve_spec(scenario, options, false)?;
            mediate(&ctx, &spec, options)
        }
        Command::Slide => {
            let spec = resolve_spec(scenario, options, true)?;
            mediate(&ctx, &spec, options)
        }
        Command::Report => full_report(&ctx, scenario, options),
    }
}

fn parse_number<T: Scalar>(text: &str, flag: &str) -> Result<T, RunError> {
    T::from_decimal(text).ok_or_else(|| RunError::Usage(format!("{flag}: `{text}` is not a number")))
}

/// Picks the scenario's first matching mediator entry and lets flags
/// override its fields.
fn resolve_spec<T: Scalar>(scenario: &Scenario<T>, options: &Options, slide: bool) -> Result<MediatorSpec<T>, RunError> {
    let base = scenario
        .mediators
        .iter()
        .find(|m| (m.strategy == SpecStrategy::Slide) == slide)
        .cloned();
    let members = options.members.or(base.as_ref().map(|b| b.members)).ok_or_else(|| {
        RunError::Usage("no mediator block given: pass --L or add a mediators entry to the scenario".into())
    })?;
    let above = options.above.or(base.as_ref().map(|b| b.above)).unwrap_or(0);
    let strategy = if slide {
        SpecStrategy::Slide
    } else if options.above.is_some() {
        if above > 0 { SpecStrategy::FlattenMiddle } else { SpecStrategy::FlattenTop }
    } else {
        base.as_ref().map_or(SpecStrategy::FlattenTop, |b| b.strategy)
    };
    let score = match &options.score {
        Some(s) => Some(parse_number(s, "--score")?),
        None => base.as_ref().and_then(|b| b.score.clone()),
    };
    if slide && score.is_none() {
        return Err(RunError::Usage("slide needs --score".into()));
    }
    let alpha = match &options.alpha {
        Some(a) => Some(parse_number(a, "--alpha")?),
        None => base.as_ref().and_then(|b| b.alpha.clone()),
    };
    let anchor = options.anchor.or(base.as_ref().map(|b| b.anchor)).unwrap_or(1);
    if !(1..=2).contains(&anchor) {
        return Err(RunError::Usage("--anchor must be 1 or 2".into()));
    }
    if members == 0 || above + members > scenario.bidders.len() {
        return Err(RunError::Usage(format!(
            "block of {members} members below {above} others does not fit {} bidders",
            scenario.bidders.len()
        )));
    }
    Ok(MediatorSpec { strategy, members, above, anchor, score, alpha })
}

fn header<T: Scalar>(ctx: &Ctx<T>) -> String {
    format!(
        "scenario {}: {} bidders, {} slots, {} ranking, {} pricing\n",
        ctx.name,
        ctx.bidders.len(),
        ctx.curve.slots(),
        ctx.config.ranking.name(),
        ctx.config.pricing.name()
    )
}

fn outcome_table<T: Scalar>(out: &AuctionOutcome<T>, bidders: &[Bidder<T>], curve: &CtrCurve<T>) -> String {
    let mut t = TextTable::new(["position", "bidder", "gamma", "score", "ppc", "e*ppc", "payment", "payoff"]);
    for p in &out.placements {
        t.row([
            p.position.to_string(),
            bidders[p.bidder].id.clone(),
            fmt_num(&curve.gamma(p.position)),
            fmt_num(&p.score),
            fmt_num(&p.price_per_click),
            fmt_num(&p.score_price),
            fmt_num(&p.expected_payment(curve)),
            fmt_num(&p.payoff),
        ]);
    }
    format!("{}auctioneer revenue: {}\n", t.render(), fmt_num(&out.auctioneer_revenue))
}

fn holds(flag: bool) -> &'static str {
    if flag {
        "holds"
    } else {
        "FAILS"
    }
}

fn oracle_line<T: Scalar>(report: &OracleReport<T>, expected: bool) -> (String, bool) {
    let agree = report.verdict == expected;
    let line = format!(
        "oracle {} [{}]: verdict {}, {}\n",
        report.claim.name(),
        report.digest,
        report.verdict,
        if agree { "agrees" } else { "DISAGREES" }
    );
    (line, agree)
}

/// Runs an oracle check; instances beyond the brute-force limit are
/// reported as skipped instead of failing the command.
fn oracle_step<T: Scalar>(
    result: Result<OracleReport<T>, AuctionError>,
    expected: bool,
    bidders: &[Bidder<T>],
    text: &mut String,
    checks: &mut Vec<Value>,
) -> Result<bool, RunError> {
    match result {
        Ok(report) => {
            let (line, agree) = oracle_line(&report, expected);
            text.push_str(&line);
            let mut v = report::oracle_json(&report, bidders);
            v["agrees"] = json!(agree);
            checks.push(v);
            Ok(agree)
        }
        Err(AuctionError::TooLarge { n, limit }) => {
            text.push_str(&format!("oracle skipped: {n} bidders exceed the brute-force limit of {limit}\n"));
            checks.push(json!({ "skipped": true, "bidders": n, "limit": limit }));
            Ok(true)
        }
        Err(e) => Err(e.into()),
    }
}

fn verify<T: Scalar>(ctx: &Ctx<T>, options: &Options) -> Result<RunOutput, RunError> {
    let out = outcome(ctx.bidders, ctx.curve, &ctx.config)?;
    let table = sne_table(&out, ctx.bidders, ctx.curve)?;
    let local = is_sne(&out, ctx.bidders, ctx.curve, Mode::Local)?;
    let full = is_sne(&out, ctx.bidders, ctx.curve, Mode::Full)?;

    let mut text = header(ctx);
    text.push('\n');
    text.push_str(&outcome_table(&out, ctx.bidders, ctx.curve));
    text.push('\n');
    text.push_str(&table.render(ctx.bidders));
    text.push('\n');
    text.push_str(&format!("local SNE: {}\nfull SNE: {}\n", holds(local.holds), holds(full.holds)));
    for w in &full.witnesses {
        text.push_str(&format!(
            "  bidder {} at position {} earns {} by moving to {} (now {})\n",
            ctx.bidders[w.bidder].id,
            w.from_position,
            fmt_num(&w.deviation_payoff),
            w.to_position,
            fmt_num(&w.current_payoff)
        ));
    }

    let mut status = if full.holds { 0 } else { 1 };
    let mut checks = Vec::new();
    if options.verify_oracle {
        text.push('\n');
        let r = oracle::sne_report(ctx.bidders, ctx.curve, &ctx.config);
        if !oracle_step(r, full.holds, ctx.bidders, &mut text, &mut checks)? {
            status = 1;
        }
    }

    let json = json!({
        "scenario": ctx.name,
        "command": "verify",
        "status": status,
        "outcome": report::outcome_json(&out, ctx.bidders, ctx.curve),
        "sne_table": report::sne_table_json(&table, ctx.bidders),
        "local": report::verdict_json(&local, ctx.bidders),
        "full": report::verdict_json(&full, ctx.bidders),
        "oracle": checks,
    });
    Ok(RunOutput { status, text, json })
}

fn build_plan<T: Scalar>(ctx: &Ctx<T>, spec: &MediatorSpec<T>) -> Result<MediatorPlan<T>, RunError> {
    let out = outcome(ctx.bidders, ctx.curve, &ctx.config)?;
    let plan = match (ctx.config.pricing, spec.strategy) {
        (_, SpecStrategy::Slide) => {
            let score = spec.score.as_ref().ok_or_else(|| RunError::Usage("slide needs a score".into()))?;
            slide_down(&out, ctx.bidders, ctx.curve, spec.members, score)?
        }
        (Pricing::Laddered, _) => {
            laddered_min_plan(&out, ctx.bidders, ctx.curve, spec.above + 1, spec.above + spec.members)?
        }
        (_, SpecStrategy::LadderedMin) => {
            return Err(RunError::Usage("laddered_min needs laddered pricing (--pricing laddered)".into()))
        }
        (_, SpecStrategy::FlattenMiddle) if spec.above > 0 => {
            flatten_middle(&out, ctx.bidders, ctx.curve, spec.above, spec.members)?
        }
        _ => flatten_top_anchored(&out, ctx.bidders, ctx.curve, spec.members, spec.anchor)?,
    };
    Ok(plan)
}

fn block_label<T: Scalar>(plan: &MediatorPlan<T>, bidders: &[Bidder<T>]) -> String {
    let ids: Vec<&str> = plan.members().into_iter().map(|b| bidders[b].id.as_str()).collect();
    format!("ranks {}..={} (bidders {})", plan.first, plan.last, ids.join(", "))
}

/// Columns follow the modified ranking; member-only rows are blank for
/// everyone else.
fn profile_table<T: Scalar>(plan: &MediatorPlan<T>, bidders: &[Bidder<T>]) -> String {
    let columns: Vec<usize> = plan.after.placements.iter().map(|p| p.bidder).collect();
    let before = |b: usize| plan.before.placements.iter().find(|p| p.bidder == b).expect("bidder placed");
    let after = |b: usize| plan.after.placements.iter().find(|p| p.bidder == b).expect("bidder placed");
    let mut label_row = vec!["position".to_string()];
    label_row.extend(plan.after.placements.iter().map(|p| p.position.to_string()));
    let mut t = TextTable::new(label_row);
    let mut row = |label: &str, f: &dyn Fn(usize) -> String| {
        let mut cells = vec![label.to_string()];
        cells.extend(columns.iter().map(|&b| f(b)));
        t.row(cells);
    };
    row("bidder", &|b| bidders[b].id.clone());
    row("e*t", &|b| fmt_num(&bidders[b].value_score()));
    row("r", &|b| fmt_num(&before(b).score));
    row("e*ppc", &|b| fmt_num(&before(b).score_price));
    row("r'", &|b| if plan.is_member(b) { fmt_num(&after(b).score) } else { String::new() });
    row("reduced e*ppc", &|b| if plan.is_member(b) { fmt_num(&after(b).score_price) } else { String::new() });
    t.render()
}

fn plan_text<T: Scalar>(plan: &MediatorPlan<T>, bidders: &[Bidder<T>]) -> String {
    let mut text = format!("{}: members are {}\n", plan.strategy.name(), block_label(plan, bidders));
    if let Some(th) = &plan.threshold {
        text.push_str(&format!("\nthreshold terms (anchor position {})\n", th.anchor));
        let mut t = TextTable::new(["position", "bidder", "term"]);
        for term in &th.terms {
            t.row([term.position.to_string(), bidders[term.bidder].id.clone(), fmt_num(&term.value)]);
        }
        text.push_str(&t.render());
        text.push_str(&format!("threshold: {}\n", fmt_num(&th.value)));
    }
    if !plan.feasible {
        text.push_str(&format!(
            "\nno improving plan: {}\n",
            plan.note.as_deref().unwrap_or("the strategy does not lower member payments")
        ));
        return text;
    }
    text.push('\n');
    if let Some(s) = &plan.pooled_score {
        text.push_str(&format!("pooled score: {}\n", fmt_num(s)));
    }
    if let Some(l) = plan.flatten_extent {
        text.push_str(&format!("pooled through rank: {l}\n"));
    }
    text.push_str(&format!(
        "gain: {}\nmember payment reduction: {}\nmember payoff change: {}\nnon-member payment reduction: {}\n",
        fmt_num(&plan.gain),
        fmt_num(&plan.payment_reduction),
        fmt_num(&plan.payoff_delta),
        fmt_num(&plan.other_payment_reduction)
    ));
    text.push('\n');
    text.push_str(&profile_table(plan, bidders));
    if let Some(v) = &plan.incentive_check {
        text.push_str(&format!("\nnon-member SNE ({}): {}\n", v.mode.name(), holds(v.holds)));
    }
    text
}

fn settlement_text<T: Scalar>(report: &RevenueReport<T>, bidders: &[Bidder<T>]) -> String {
    let mut text = format!(
        "\nsettlement (fee fraction {})\nmediator take: {}\nauctioneer revenue: {} -> {} (loss {})\n",
        fmt_num(&report.fee_fraction),
        fmt_num(&report.mediator_take),
        fmt_num(&report.auctioneer_before),
        fmt_num(&report.auctioneer_after),
        fmt_num(&report.auctioneer_loss())
    );
    let mut t = TextTable::new(["bidder", "payment reduction", "delta"]);
    for m in &report.members {
        t.row([bidders[m.bidder].id.clone(), fmt_num(&m.payment_reduction), fmt_num(&m.delta)]);
    }
    text.push_str(&t.render());
    text
}

/// Oracle checks that apply to a plan. Returns false on any disagreement.
fn plan_oracle<T: Scalar>(
    ctx: &Ctx<T>,
    plan: &MediatorPlan<T>,
    text: &mut String,
    checks: &mut Vec<Value>,
) -> Result<bool, RunError> {
    let mut agree = true;
    if plan.strategy == Strategy::FlattenTop {
        let r = oracle::flatten_report(plan, ctx.bidders, ctx.curve);
        agree &= oracle_step(r, true, ctx.bidders, text, checks)?;
    }
    if plan.strategy == Strategy::LadderedMin {
        let r = oracle::truthfulness_check(ctx.bidders, ctx.curve, &ctx.config, TRUTHFUL_RESOLUTION);
        agree &= oracle_step(r, true, ctx.bidders, text, checks)?;
    }
    if let Some(v) = &plan.incentive_check {
        let nash = v.mode == Mode::Nash;
        match oracle::plan_deviations(plan, ctx.bidders, ctx.curve, nash) {
            Ok(found) => {
                let ok = found.is_empty() == v.holds;
                text.push_str(&format!(
                    "oracle non-member deviations ({}): {} found, {}\n",
                    v.mode.name(),
                    found.len(),
                    if ok { "agrees" } else { "DISAGREES" }
                ));
                checks.push(json!({ "claim": "NON_MEMBER_SNE", "deviations": found.len(), "agrees": ok }));
                agree &= ok;
            }
            Err(AuctionError::TooLarge { n, limit }) => {
                text.push_str(&format!("oracle skipped: {n} bidders exceed the brute-force limit of {limit}\n"));
            }
            Err(e) => return Err(e.into()),
        }
    }
    if plan.feasible {
        let r = oracle::accounting_report(plan, ctx.bidders, ctx.curve);
        agree &= oracle_step(r, true, ctx.bidders, text, checks)?;
    }
    Ok(agree)
}

fn mediate<T: Scalar>(ctx: &Ctx<T>, spec: &MediatorSpec<T>, options: &Options) -> Result<RunOutput, RunError> {
    let plan = build_plan(ctx, spec)?;
    let mut text = header(ctx);
    text.push('\n');
    text.push_str(&plan_text(&plan, ctx.bidders));

    let alpha = spec.alpha.clone().unwrap_or_else(T::zero);
    let settlement = if plan.feasible { Some(settle(&plan, ctx.curve, &alpha)?) } else { None };
    if let Some(s) = &settlement {
        text.push_str(&settlement_text(s, ctx.bidders));
    }

    let mut status = 0;
    let mut checks = Vec::new();
    if options.verify_oracle {
        text.push('\n');
        if !plan_oracle(ctx, &plan, &mut text, &mut checks)? {
            status = 1;
        }
    }
    let json = json!({
        "scenario": ctx.name,
        "command": if spec.strategy == SpecStrategy::Slide { "slide" } else { "mediate" },
        "status": status,
        "plan": report::plan_json(&plan, ctx.bidders, ctx.curve),
        "settlement": settlement.as_ref().map(|s| report::revenue_json(s, ctx.bidders)),
        "oracle": checks,
    });
    Ok(RunOutput { status, text, json })
}

fn full_report<T: Scalar>(ctx: &Ctx<T>, scenario: &Scenario<T>, options: &Options) -> Result<RunOutput, RunError> {
    let out = outcome(ctx.bidders, ctx.curve, &ctx.config)?;
    let mut status = 0;
    let mut checks = Vec::new();
    let mut oracle_text = String::new();
    let equilibrium = if ctx.config.pricing == Pricing::Gsp {
        let table = sne_table(&out, ctx.bidders, ctx.curve)?;
        let local = is_sne(&out, ctx.bidders, ctx.curve, Mode::Local)?;
        let full = is_sne(&out, ctx.bidders, ctx.curve, Mode::Full)?;
        if options.verify_oracle {
            let r = oracle::sne_report(ctx.bidders, ctx.curve, &ctx.config);
            if !oracle_step(r, full.holds, ctx.bidders, &mut oracle_text, &mut checks)? {
                status = 1;
            }
        }
        json!({
            "table": report::sne_table_json(&table, ctx.bidders),
            "local": report::verdict_json(&local, ctx.bidders),
            "full": report::verdict_json(&full, ctx.bidders),
        })
    } else {
        Value::Null
    };

    let mut specs = scenario.mediators.clone();
    if options.members.is_some() {
        let slide = options.score.is_some() && options.above.is_none();
        specs.push(resolve_spec(scenario, options, slide)?);
    }
    let mut plans = Vec::new();
    for spec in &specs {
        let entry = match build_plan(ctx, spec) {
            Ok(plan) => {
                let alpha = spec.alpha.clone().unwrap_or_else(T::zero);
                let settlement = if plan.feasible { Some(settle(&plan, ctx.curve, &alpha)?) } else { None };
                if options.verify_oracle && !plan_oracle(ctx, &plan, &mut oracle_text, &mut checks)? {
                    status = 1;
                }
                json!({
                    "request": spec.strategy.name(),
                    "plan": report::plan_json(&plan, ctx.bidders, ctx.curve),
                    "settlement": settlement.as_ref().map(|s| report::revenue_json(s, ctx.bidders)),
                })
            }
            Err(RunError::Auction(e)) => json!({ "request": spec.strategy.name(), "error": e.to_string() }),
            Err(e) => return Err(e),
        };
        plans.push(entry);
    }

    let json = json!({
        "scenario": ctx.name,
        "command": "report",
        "status": status,
        "digest": oracle::digest(ctx.bidders, ctx.curve, &ctx.config),
        "gamma": ctx.curve.gammas().iter().map(|g| g.approx()).collect::<Vec<_>>(),
        "outcome": report::outcome_json(&out, ctx.bidders, ctx.curve),
        "equilibrium": equilibrium,
        "mediators": plans,
        "oracle": checks,
    });
    let mut text = serde_json::to_string_pretty(&json).expect("report serializes");
    text.push('\n');
    Ok(RunOutput { status, text, json })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Exact;

    fn table1() -> Scenario<Exact> {
        Scenario::from_json(include_str!("../../../scenarios/table1.json")).unwrap()
    }

    #[test]
    fn verify_table1_holds() {
        let out = execute(&table1(), Command::Verify, &Options { verify_oracle: true, ..Options::default() }).unwrap();
        assert_eq!(out.status, 0, "{}", out.text);
        assert!(out.text.contains("full SNE: holds"));
        assert!(out.text.contains("agrees"));
    }

    #[test]
    fn mediate_uses_scenario_block() {
        let out = execute(&table1(), Command::Mediate, &Options { verify_oracle: true, ..Options::default() }).unwrap();
        assert_eq!(out.status, 0, "{}", out.text);
        assert!(out.text.contains("gain: 7.28"), "{}", out.text);
        assert!(out.text.contains("mediator take: 3.64"), "{}", out.text);
    }

    #[test]
    fn middle_block_reports_no_plan() {
        let opts = Options { members: Some(4), above: Some(1), ..Options::default() };
        let out = execute(&table1(), Command::Mediate, &opts).unwrap();
        assert_eq!(out.status, 0);
        assert!(out.text.contains("no improving plan"), "{}", out.text);
    }

    #[test]
    fn slide_needs_score() {
        let mut s = table1();
        s.mediators.clear();
        let err = execute(&s, Command::Slide, &Options { members: Some(5), ..Options::default() }).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn precondition_exit_code() {
        let mut s = table1();
        s.bidders[1].bid = Exact::from_decimal("24").unwrap();
        let err = execute(&s, Command::Mediate, &Options { members: Some(5), ..Options::default() }).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        let verify = execute(&s, Command::Verify, &Options::default()).unwrap();
        assert_eq!(verify.status, 1);
    }

    #[test]
    fn report_lists_every_scenario_plan() {
        let out = execute(&table1(), Command::Report, &Options::default()).unwrap();
        assert_eq!(out.json["mediators"].as_array().unwrap().len(), 4);
        let parsed: Value = serde_json::from_str(&out.text).unwrap();
        assert_eq!(parsed, out.json);
    }
}
