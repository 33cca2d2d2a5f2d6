//! Symmetric Nash equilibrium checks for GSP outcomes.
//!
//! Under SNE a bidder moving to position `s` pays the price currently
//! charged at `s`, whichever direction it moves. Plain Nash is also
//! available: moving up then costs the occupant's score instead.

use crate::auction::{AuctionOutcome, Bidder, CtrCurve, Pricing};
use crate::error::{AuctionError, Result};
use crate::render::{fmt_num, TextTable};
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Every target position, including leaving the auction.
    Full,
    /// Adjacent slots only.
    Local,
    /// Every target position, upward moves priced at the occupant's score.
    Nash,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Local => "local",
            Mode::Nash => "nash",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationRecord<T> {
    pub bidder: usize,
    pub from_position: usize,
    /// Positions past the last ranked bidder stand for leaving the auction.
    pub to_position: usize,
    pub current_payoff: T,
    pub deviation_payoff: T,
    pub profitable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SneVerdict<T> {
    pub holds: bool,
    pub mode: Mode,
    pub witnesses: Vec<DeviationRecord<T>>,
}

fn require_gsp<T: Scalar>(out: &AuctionOutcome<T>) -> Result<()> {
    if out.config.pricing != Pricing::Gsp {
        return Err(AuctionError::Unsupported(format!(
            "equilibrium checks are defined for GSP, not {}",
            out.config.pricing.name()
        )));
    }
    Ok(())
}

fn occupant<'a, T: Scalar>(
    out: &AuctionOutcome<T>,
    bidders: &'a [Bidder<T>],
    position: usize,
) -> Result<(usize, &'a Bidder<T>)> {
    let placement = out
        .at(position)
        .ok_or(AuctionError::InvalidPosition { position, bidders: out.len() })?;
    let bidder = bidders.get(placement.bidder).ok_or_else(|| {
        AuctionError::InvalidArgument(format!("outcome refers to missing bidder {}", placement.bidder))
    })?;
    Ok((placement.bidder, bidder))
}

fn payoff_at<T: Scalar>(
    out: &AuctionOutcome<T>,
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    from: usize,
    to: usize,
    nash: bool,
) -> Result<T> {
    let (_, mover) = occupant(out, bidders, from)?;
    if to == from {
        return Ok(out.at(from).expect("occupied").payoff.clone());
    }
    let target = match out.at(to) {
        Some(p) if p.slotted => p,
        _ => return Ok(T::zero()),
    };
    let pay_score = if nash && to < from { target.score.clone() } else { target.next_score.clone() };
    let weight = out.config.weight(mover);
    let score_price = mover.relevance.clone() * pay_score / weight;
    Ok(curve.gamma(to) * (mover.value_score() - score_price))
}

/// Payoff of the bidder at position `from` if it took position `to` at the
/// price currently charged there. Unslotted targets pay nothing and earn
/// nothing.
pub fn deviation_payoff<T: Scalar>(
    out: &AuctionOutcome<T>,
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    from: usize,
    to: usize,
) -> Result<T> {
    payoff_at(out, bidders, curve, from, to, false)
}

/// Local neighbours of `position`. All unslotted ranks collapse into one
/// "no slot" rung directly below the last slot, so the rung above any of
/// them is the last slot, and the rung below the last ranked bidder is exit.
fn neighbours<T: Scalar>(out: &AuctionOutcome<T>, position: usize) -> (Option<usize>, Option<usize>) {
    let slotted = out.slotted().count();
    let up = match position {
        1 => None,
        p if p <= slotted + 1 => Some(p - 1),
        _ if slotted > 0 => Some(slotted),
        _ => None,
    };
    let down = (position <= slotted).then_some(position + 1);
    (up, down)
}

fn targets<T: Scalar>(out: &AuctionOutcome<T>, position: usize, mode: Mode) -> Vec<usize> {
    match mode {
        Mode::Full | Mode::Nash => (1..=out.len() + 1).filter(|&s| s != position).collect(),
        Mode::Local => {
            let (up, down) = neighbours(out, position);
            up.into_iter().chain(down).collect()
        }
    }
}

/// Equilibrium check over every bidder.
pub fn is_sne<T: Scalar>(
    out: &AuctionOutcome<T>,
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    mode: Mode,
) -> Result<SneVerdict<T>> {
    is_sne_among(out, bidders, curve, mode, |_| true)
}

/// Equilibrium check where only bidders accepted by `deviates` (by slice
/// index) may move. Used for mediated profiles, where the mediator fixes
/// the bids of its own members.
pub fn is_sne_among<T: Scalar>(
    out: &AuctionOutcome<T>,
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    mode: Mode,
    deviates: impl Fn(usize) -> bool,
) -> Result<SneVerdict<T>> {
    require_gsp(out)?;
    let tol = &out.config.tolerance;
    let mut witnesses = Vec::new();
    for placement in &out.placements {
        if !deviates(placement.bidder) {
            continue;
        }
        let from = placement.position;
        for to in targets(out, from, mode) {
            let deviation = payoff_at(out, bidders, curve, from, to, mode == Mode::Nash)?;
            if scalar::gt(&deviation, &placement.payoff, tol) {
                witnesses.push(DeviationRecord {
                    bidder: placement.bidder,
                    from_position: from,
                    to_position: to,
                    current_payoff: placement.payoff.clone(),
                    deviation_payoff: deviation,
                    profitable: true,
                });
            }
        }
    }
    Ok(SneVerdict { holds: witnesses.is_empty(), mode, witnesses })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SneRow<T> {
    pub position: usize,
    pub bidder: usize,
    pub payoff: T,
    /// Target and payoff of the one-up move, absent at the top.
    pub up: Option<(usize, T)>,
    pub down: (usize, T),
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SneTable<T> {
    pub rows: Vec<SneRow<T>>,
}

impl<T: Scalar> SneTable<T> {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }

    pub fn render(&self, bidders: &[Bidder<T>]) -> String {
        let mut table = TextTable::new(["position", "bidder", "payoff", "up", "down", "sne"]);
        for row in &self.rows {
            table.row([
                row.position.to_string(),
                bidders[row.bidder].id.clone(),
                fmt_num(&row.payoff),
                row.up.as_ref().map_or_else(|| "-".to_string(), |(_, v)| fmt_num(v)),
                fmt_num(&row.down.1),
                if row.holds { "YES" } else { "NO" }.to_string(),
            ]);
        }
        table.render()
    }
}

/// One row per ranked bidder: payoff, one-up and one-down deviation payoffs.
pub fn sne_table<T: Scalar>(
    out: &AuctionOutcome<T>,
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
) -> Result<SneTable<T>> {
    require_gsp(out)?;
    let tol = &out.config.tolerance;
    let mut rows = Vec::with_capacity(out.len());
    for placement in &out.placements {
        let j = placement.position;
        let (up_target, _) = neighbours(out, j);
        let up = match up_target {
            Some(s) => Some((s, deviation_payoff(out, bidders, curve, j, s)?)),
            None => None,
        };
        let down = (j + 1, deviation_payoff(out, bidders, curve, j, j + 1)?);
        let holds = up.iter().chain(std::iter::once(&down)).all(|(_, v)| !scalar::gt(v, &placement.payoff, tol));
        rows.push(SneRow { position: j, bidder: placement.bidder, payoff: placement.payoff.clone(), up, down, holds });
    }
    Ok(SneTable { rows })
}
