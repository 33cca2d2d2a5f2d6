//! Brute-force verifiers for small instances.
//!
//! Nothing here calls into the pricing, payoff or equilibrium code of the
//! rest of the crate: ranking, second prices, ladder sums and deviation
//! payoffs are recomputed from the raw bidder data with plain loops. Only
//! the input types are shared. Every entry point refuses instances above a
//! fixed size instead of truncating the search.

use sha2::{Digest, Sha256};

use crate::auction::{AuctionConfig, Bidder, CtrCurve, Pricing, Ranking};
use crate::error::{AuctionError, Result};
use crate::mediator::MediatorPlan;
use crate::scalar::Scalar;

pub const DEVIATION_LIMIT: usize = 12;
pub const FLATTEN_LIMIT: usize = 10;
pub const TRUTHFUL_LIMIT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Claim {
    SneFull,
    FlattenOptimal,
    Truthful,
    GainAccounting,
}

impl Claim {
    pub fn name(self) -> &'static str {
        match self {
            Claim::SneFull => "SNE_FULL",
            Claim::FlattenOptimal => "FLATTEN_OPTIMAL",
            Claim::Truthful => "TRUTHFUL",
            Claim::GainAccounting => "GAIN_ACCOUNTING",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleDeviation<T> {
    pub bidder: usize,
    pub from: usize,
    /// Past the last rank means leaving the auction.
    pub to: usize,
    pub current: T,
    pub deviation: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Counterexample<T> {
    Deviation(OracleDeviation<T>),
    BetterFlatten { score: T, extent: usize, gain: T },
    Misreport { bidder: usize, bid: T, truthful_utility: T, utility: T },
    Accounting { quantity: String, expected: T, found: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport<T> {
    pub claim: Claim,
    pub digest: String,
    pub verdict: bool,
    pub counterexample: Option<Counterexample<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlattenOptimum<T> {
    pub score: Option<T>,
    pub extent: usize,
    pub gain: T,
}

fn guard(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(AuctionError::TooLarge { n, limit });
    }
    Ok(())
}

/// Stable fingerprint of the instance, used to stamp reports.
pub fn digest<T: Scalar>(bidders: &[Bidder<T>], curve: &CtrCurve<T>, config: &AuctionConfig<T>) -> String {
    let mut text = format!(
        "{}|{}|{}|{}|",
        config.ranking.name(),
        config.pricing.name(),
        config.reserve_score.to_exact_string(),
        config.tolerance.to_exact_string()
    );
    for g in curve.gammas() {
        text.push_str(&g.to_exact_string());
        text.push(',');
    }
    for b in bidders {
        text.push_str(&format!(
            "|{}:{}:{}:{}",
            b.id,
            b.valuation.to_exact_string(),
            b.relevance.to_exact_string(),
            b.bid.to_exact_string()
        ));
    }
    hex::encode(&Sha256::digest(text.as_bytes())[..8])
}

/// A priced instance seen from scratch: `order[p]` is the bidder in
/// position `p + 1`, `scores[p]` its ranking score.
struct Board<'a, T> {
    bidders: &'a [Bidder<T>],
    curve: &'a CtrCurve<T>,
    config: &'a AuctionConfig<T>,
    order: Vec<usize>,
    scores: Vec<T>,
}

impl<'a, T: Scalar> Board<'a, T> {
    /// Insertion sort by descending score; earlier entries win ties.
    fn new(
        bidders: &'a [Bidder<T>],
        curve: &'a CtrCurve<T>,
        config: &'a AuctionConfig<T>,
        scored: Vec<(usize, T)>,
    ) -> Self {
        let mut sorted: Vec<(usize, T)> = Vec::with_capacity(scored.len());
        for item in scored {
            let at = sorted.iter().position(|(_, s)| item.1 > *s).unwrap_or(sorted.len());
            sorted.insert(at, item);
        }
        let (order, scores) = sorted.into_iter().unzip();
        Board { bidders, curve, config, order, scores }
    }

    fn from_bids(bidders: &'a [Bidder<T>], curve: &'a CtrCurve<T>, config: &'a AuctionConfig<T>) -> Self {
        let scored = bidders.iter().enumerate().map(|(i, b)| (i, raw_score(config, b, &b.bid))).collect();
        Board::new(bidders, curve, config, scored)
    }

    fn n(&self) -> usize {
        self.order.len()
    }

    fn gamma(&self, position: usize) -> T {
        if position >= 1 && position <= self.curve.gammas().len() {
            self.curve.gammas()[position - 1].clone()
        } else {
            T::zero()
        }
    }

    fn has_slot(&self, position: usize) -> bool {
        position >= 1
            && position <= self.n()
            && position <= self.curve.gammas().len()
            && self.scores[position - 1] >= self.config.reserve_score
    }

    /// Score just below `position`, or the reserve.
    fn score_below(&self, position: usize) -> T {
        match self.scores.get(position) {
            Some(s) if *s >= self.config.reserve_score => s.clone(),
            _ => self.config.reserve_score.clone(),
        }
    }

    fn weight(&self, bidder: usize) -> T {
        match self.config.ranking {
            Ranking::Rbb => T::one(),
            Ranking::Rbr => self.bidders[bidder].relevance.clone(),
        }
    }

    /// Per-click price charged to whoever sits at `position`.
    fn per_click(&self, position: usize) -> T {
        let bidder = self.order[position - 1];
        let w = self.weight(bidder);
        match self.config.pricing {
            Pricing::Gsp => self.score_below(position) / w,
            Pricing::Gfp => self.scores[position - 1].clone() / w,
            Pricing::Laddered => {
                let mut ladder = T::zero();
                let mut k = position;
                while k <= self.curve.gammas().len() {
                    let drop = self.gamma(k) - self.gamma(k + 1);
                    ladder = ladder + drop * self.score_below(k);
                    k += 1;
                }
                ladder / (self.gamma(position) * w)
            }
        }
    }

    /// Expected payment of whoever sits at `position`.
    fn payment(&self, position: usize) -> T {
        if !self.has_slot(position) {
            return T::zero();
        }
        let b = &self.bidders[self.order[position - 1]];
        self.gamma(position) * b.relevance.clone() * self.per_click(position)
    }

    fn payment_of(&self, bidder: usize) -> T {
        match self.order.iter().position(|&b| b == bidder) {
            Some(i) => self.payment(i + 1),
            None => T::zero(),
        }
    }

    fn utility(&self, position: usize) -> T {
        if !self.has_slot(position) {
            return T::zero();
        }
        let b = &self.bidders[self.order[position - 1]];
        self.gamma(position) * b.relevance.clone() * (b.valuation.clone() - self.per_click(position))
    }

    /// GSP payoff of the bidder at `from` if it sat at `to` paying the
    /// score `pay` (in score units).
    fn moved_utility(&self, from: usize, to: usize, pay: T) -> T {
        let mover = self.order[from - 1];
        let b = &self.bidders[mover];
        let per_click = pay / self.weight(mover);
        self.gamma(to) * b.relevance.clone() * (b.valuation.clone() - per_click)
    }

    fn deviations(&self, nash: bool, movers: &dyn Fn(usize) -> bool) -> Vec<OracleDeviation<T>> {
        let mut found = Vec::new();
        for from in 1..=self.n() {
            let bidder = self.order[from - 1];
            if !movers(bidder) {
                continue;
            }
            let current = self.utility(from);
            for to in 1..=self.n() + 1 {
                if to == from {
                    continue;
                }
                let deviation = if !self.has_slot(to) {
                    T::zero()
                } else if nash && to < from {
                    self.moved_utility(from, to, self.scores[to - 1].clone())
                } else {
                    self.moved_utility(from, to, self.score_below(to))
                };
                if deviation > current.clone() + self.config.tolerance.clone() {
                    found.push(OracleDeviation { bidder, from, to, current: current.clone(), deviation });
                }
            }
        }
        found
    }
}

fn raw_score<T: Scalar>(config: &AuctionConfig<T>, bidder: &Bidder<T>, bid: &T) -> T {
    match config.ranking {
        Ranking::Rbb => bid.clone(),
        Ranking::Rbr => bidder.relevance.clone() * bid.clone(),
    }
}

fn require_gsp<T: Scalar>(config: &AuctionConfig<T>) -> Result<()> {
    if config.pricing != Pricing::Gsp {
        return Err(AuctionError::Unsupported("deviation sweeps are defined for GSP".into()));
    }
    Ok(())
}

/// Every profitable move to any position (or out of the auction) at the
/// price currently charged there.
pub fn enumerate_deviations<T: Scalar>(
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    config: &AuctionConfig<T>,
) -> Result<Vec<OracleDeviation<T>>> {
    guard(bidders.len(), DEVIATION_LIMIT)?;
    require_gsp(config)?;
    Ok(Board::from_bids(bidders, curve, config).deviations(false, &|_| true))
}

/// Same sweep with upward moves priced at the displaced occupant's score.
pub fn enumerate_nash_deviations<T: Scalar>(
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    config: &AuctionConfig<T>,
) -> Result<Vec<OracleDeviation<T>>> {
    guard(bidders.len(), DEVIATION_LIMIT)?;
    require_gsp(config)?;
    Ok(Board::from_bids(bidders, curve, config).deviations(true, &|_| true))
}

/// Deviations by non-members in a plan's modified profile. Scores are taken
/// from the plan; everything else is recomputed.
pub fn plan_deviations<T: Scalar>(
    plan: &MediatorPlan<T>,
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    nash: bool,
) -> Result<Vec<OracleDeviation<T>>> {
    guard(bidders.len(), DEVIATION_LIMIT)?;
    let config = &plan.before.config;
    require_gsp(config)?;
    let members = plan.members();
    let scored = plan.after.ranked.entries().iter().map(|e| (e.bidder, e.score.clone())).collect();
    Ok(Board::new(bidders, curve, config, scored).deviations(nash, &|b| !members.contains(&b)))
}

pub fn sne_report<T: Scalar>(
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    config: &AuctionConfig<T>,
) -> Result<OracleReport<T>> {
    let found = enumerate_deviations(bidders, curve, config)?;
    Ok(OracleReport {
        claim: Claim::SneFull,
        digest: digest(bidders, curve, config),
        verdict: found.is_empty(),
        counterexample: found.into_iter().next().map(Counterexample::Deviation),
    })
}

/// Best uniform pooling of the top `members` ranks that leaves every
/// non-member without a profitable move, searched over the critical scores.
///
/// For a fixed extent the gain falls linearly in the pooled score, and the
/// feasibility region only changes at non-member bounds `e·t − u/γ_1` and at
/// existing scores, so those candidates contain the optimum.
pub fn optimal_uniform_flatten<T: Scalar>(
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    config: &AuctionConfig<T>,
    members: usize,
) -> Result<FlattenOptimum<T>> {
    guard(bidders.len(), FLATTEN_LIMIT)?;
    require_gsp(config)?;
    if members == 0 || members > bidders.len() {
        return Err(AuctionError::InvalidArgument(format!("member count {members} out of range")));
    }
    let board = Board::from_bids(bidders, curve, config);
    let tol = config.tolerance.clone();
    let n = board.n();
    let top_gamma = board.gamma(1);

    let mut candidates: Vec<T> = board.scores.clone();
    for position in members + 1..=n {
        if top_gamma.is_zero() {
            break;
        }
        let b = &bidders[board.order[position - 1]];
        let value = b.relevance.clone() * b.valuation.clone();
        candidates.push(value - board.utility(position) / top_gamma.clone());
    }
    candidates.push(config.reserve_score.clone());

    let before: Vec<T> = (1..=members).map(|p| board.payment(p)).collect();
    let mut best = FlattenOptimum { score: None, extent: 1, gain: T::zero() };
    for r in candidates {
        if r < config.reserve_score {
            continue;
        }
        for extent in 2..=members {
            let reaches = board.scores[extent - 1].clone() + tol.clone() >= r;
            let clears = extent == n || r > board.scores[extent].clone() + tol.clone();
            if !reaches || !clears {
                continue;
            }
            let scored = (0..n)
                .map(|p| (board.order[p], if p < extent { r.clone() } else { board.scores[p].clone() }))
                .collect();
            let pooled = Board::new(bidders, curve, config, scored);
            let members_set: Vec<usize> = board.order[..members].to_vec();
            if !pooled.deviations(false, &|b| !members_set.contains(&b)).is_empty() {
                continue;
            }
            let mut gain = T::zero();
            for p in 1..=members {
                gain = gain + before[p - 1].clone() - pooled.payment(p);
            }
            if gain > best.gain.clone() + tol.clone() {
                best = FlattenOptimum { score: Some(r.clone()), extent, gain };
            }
        }
    }
    Ok(best)
}

/// Compares a top-block plan's gain with the brute-force optimum.
pub fn flatten_report<T: Scalar>(
    plan: &MediatorPlan<T>,
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
) -> Result<OracleReport<T>> {
    let config = &plan.before.config;
    let best = optimal_uniform_flatten(bidders, curve, config, plan.last)?;
    let verdict = best.gain <= plan.gain.clone() + config.tolerance.clone();
    Ok(OracleReport {
        claim: Claim::FlattenOptimal,
        digest: digest(bidders, curve, config),
        verdict,
        counterexample: (!verdict).then(|| Counterexample::BetterFlatten {
            score: best.score.clone().unwrap_or_else(T::zero),
            extent: best.extent,
            gain: best.gain.clone(),
        }),
    })
}

/// Recomputes member payments and auctioneer revenue on both sides of a
/// plan and compares them with the plan's figures.
pub fn accounting_report<T: Scalar>(
    plan: &MediatorPlan<T>,
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
) -> Result<OracleReport<T>> {
    let config = &plan.before.config;
    let before = Board::from_bids(bidders, curve, config);
    let scored = plan.after.ranked.entries().iter().map(|e| (e.bidder, e.score.clone())).collect();
    let after = Board::new(bidders, curve, config, scored);

    let mut member_cut = T::zero();
    let mut revenue_before = T::zero();
    let mut revenue_after = T::zero();
    let members = plan.members();
    for bidder in 0..bidders.len() {
        let cut = before.payment_of(bidder) - after.payment_of(bidder);
        if members.contains(&bidder) {
            member_cut = member_cut + cut;
        }
        revenue_before = revenue_before + before.payment_of(bidder);
        revenue_after = revenue_after + after.payment_of(bidder);
    }
    let checks = [
        ("member payment reduction", member_cut, plan.payment_reduction.clone()),
        ("auctioneer revenue before", revenue_before, plan.before.auctioneer_revenue.clone()),
        ("auctioneer revenue after", revenue_after, plan.after.auctioneer_revenue.clone()),
    ];
    let mismatch = checks
        .into_iter()
        .find(|(_, expected, found)| (expected.clone() - found.clone()).abs() > config.tolerance);
    Ok(OracleReport {
        claim: Claim::GainAccounting,
        digest: digest(bidders, curve, config),
        verdict: mismatch.is_none(),
        counterexample: mismatch.map(|(quantity, expected, found)| Counterexample::Accounting {
            quantity: quantity.to_string(),
            expected,
            found,
        }),
    })
}

/// Utility of `bidder` if it alone changed its bid to `bid`.
fn utility_with_bid<T: Scalar>(
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    config: &AuctionConfig<T>,
    bidder: usize,
    bid: &T,
) -> T {
    let scored = bidders
        .iter()
        .enumerate()
        .map(|(i, b)| (i, if i == bidder { raw_score(config, b, bid) } else { raw_score(config, b, &b.bid) }))
        .collect();
    let board = Board::new(bidders, curve, config, scored);
    let position = board.order.iter().position(|&b| b == bidder).expect("bidder is ranked") + 1;
    board.utility(position)
}

fn bid_grid<T: Scalar>(bidders: &[Bidder<T>], config: &AuctionConfig<T>, bidder: usize, resolution: usize) -> Vec<T> {
    let me = &bidders[bidder];
    let weight = match config.ranking {
        Ranking::Rbb => T::one(),
        Ranking::Rbr => me.relevance.clone(),
    };
    let mut top = me.valuation.clone();
    for b in bidders {
        let as_bid = raw_score(config, b, &b.bid) / weight.clone();
        if as_bid > top {
            top = as_bid;
        }
    }
    let top = top * T::of_usize(2);
    let steps = resolution.max(2) - 1;
    let mut grid: Vec<T> = (0..=steps).map(|k| top.clone() * T::of_usize(k) / T::of_usize(steps)).collect();
    grid.push(me.valuation.clone());
    grid.push(me.bid.clone());
    grid
}

/// Searches a bid grid for a bidder who does better than reporting its
/// value, with everyone else's bids held fixed. Works for any pricing.
pub fn find_misreport<T: Scalar>(
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    config: &AuctionConfig<T>,
    resolution: usize,
) -> Result<Option<Counterexample<T>>> {
    guard(bidders.len(), DEVIATION_LIMIT)?;
    for bidder in 0..bidders.len() {
        let truthful = utility_with_bid(bidders, curve, config, bidder, &bidders[bidder].valuation);
        for bid in bid_grid(bidders, config, bidder, resolution) {
            let utility = utility_with_bid(bidders, curve, config, bidder, &bid);
            if utility > truthful.clone() + config.tolerance.clone() {
                return Ok(Some(Counterexample::Misreport { bidder, bid, truthful_utility: truthful, utility }));
            }
        }
    }
    Ok(None)
}

/// Dominant-strategy check for laddered pricing. GSP and GFP are refused:
/// neither is truthful.
pub fn truthfulness_check<T: Scalar>(
    bidders: &[Bidder<T>],
    curve: &CtrCurve<T>,
    config: &AuctionConfig<T>,
    resolution: usize,
) -> Result<OracleReport<T>> {
    if config.pricing != Pricing::Laddered {
        return Err(AuctionError::Unsupported(format!(
            "truthfulness is only claimed for laddered pricing, not {}",
            config.pricing.name()
        )));
    }
    guard(bidders.len(), TRUTHFUL_LIMIT)?;
    let counterexample = find_misreport(bidders, curve, config, resolution)?;
    Ok(OracleReport {
        claim: Claim::Truthful,
        digest: digest(bidders, curve, config),
        verdict: counterexample.is_none(),
        counterexample,
    })
}
